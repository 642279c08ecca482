//! Closed-form choice of every QPE free parameter.
//!
//! The plan is built in a fixed order: time step `t` (which also fixes the
//! integer offset ⌈E₀t⌉ needed to unwrap the measured phase), the minimum
//! phase-register size for chemical accuracy, the accuracy window for each
//! extra qubit count `a`, and the Trotter step budgets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{QpeError, Result};

/// Chemical accuracy in Hartree.
pub const CHEMICAL_ACCURACY: f64 = 1.6e-3;

/// Extra phase qubits tried by default.
pub const DEFAULT_A_SWEEP: [u32; 4] = [0, 1, 2, 3];

/// `ceil` that snaps values within a relative 1e-10 of an integer onto it,
/// so quantities that are integers in exact arithmetic are not bumped up by
/// rounding noise.
pub(crate) fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-10 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TimeStepStrategy {
    /// t = 10^d, for a known order of magnitude of E₀ − E_init.
    KnownGapOrder { d: i32 },
    /// t = −α / E_init with α ∈ [1, 3/2].
    InitEnergy { alpha: f64 },
    /// t = α / Σ|γ_β| with α ∈ (0, 1].
    LcuOneNorm { alpha: f64 },
}

impl TimeStepStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            TimeStepStrategy::KnownGapOrder { .. } => "known-gap",
            TimeStepStrategy::InitEnergy { .. } => "init-energy",
            TimeStepStrategy::LcuOneNorm { .. } => "lcu-norm",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TimeStepStrategy::KnownGapOrder { .. } => Ok(()),
            TimeStepStrategy::InitEnergy { alpha } if (1.0..=1.5).contains(&alpha) => Ok(()),
            TimeStepStrategy::InitEnergy { alpha } => {
                Err(QpeError::Domain(format!("init-energy alpha must lie in [1, 3/2], got {alpha}")))
            }
            TimeStepStrategy::LcuOneNorm { alpha } if alpha > 0.0 && alpha <= 1.0 => Ok(()),
            TimeStepStrategy::LcuOneNorm { alpha } => {
                Err(QpeError::Domain(format!("lcu-norm alpha must lie in (0, 1], got {alpha}")))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeStep {
    pub t: f64,
    /// The value of ⌈E₀t⌉ implied by the strategy.
    pub ceil_e0_t: i64,
    pub note: String,
}

pub fn select_time_step(strategy: TimeStepStrategy, e_init: f64, one_norm: f64) -> Result<TimeStep> {
    strategy.validate()?;
    match strategy {
        TimeStepStrategy::KnownGapOrder { d } => {
            let t = 10f64.powi(d);
            let ceil = (e_init * t).ceil() as i64;
            Ok(TimeStep {
                t,
                ceil_e0_t: ceil,
                note: format!(
                    "assumes E0 - E_init <= -1e{}; ceil(E0 t) is taken as ceil(E_init t) = {ceil}, which the inputs cannot confirm",
                    -(d + 1)
                ),
            })
        }
        TimeStepStrategy::InitEnergy { alpha } => {
            if !(e_init < 0.0) {
                return Err(QpeError::Domain(format!(
                    "init-energy strategy needs a negative E_init, got {e_init}"
                )));
            }
            let ceil = (-alpha).ceil() as i64;
            let bound = (1.0 - ceil as f64) / alpha - 1.0;
            Ok(TimeStep {
                t: -alpha / e_init,
                ceil_e0_t: ceil,
                note: format!(
                    "ceil(E0 t) = {ceil} holds while the relative inaccuracy (E0 - E_init)/E_init stays below {bound:.6}"
                ),
            })
        }
        TimeStepStrategy::LcuOneNorm { alpha } => {
            if !(one_norm > 0.0) {
                return Err(QpeError::Domain(format!("one-norm must be positive, got {one_norm}")));
            }
            Ok(TimeStep {
                t: alpha / one_norm,
                ceil_e0_t: 0,
                note: "sum |gamma| exceeds the spectral norm, so -1 < E0 t and ceil(E0 t) = 0 for a negative ground energy"
                    .into(),
            })
        }
    }
}

/// N_min(t) = ⌈log₂(1/(t ε))⌉ − 1, clamped below at 1.
pub fn min_phase_qubits(t: f64, epsilon: f64) -> Result<u32> {
    if !(t > 0.0 && t.is_finite()) || !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(QpeError::Domain(format!("need t > 0 and epsilon > 0, got t = {t}, epsilon = {epsilon}")));
    }
    let ratio = 1.0 / (t * epsilon);
    // smallest k with 2^k >= ratio; the comparisons against powers of two are exact
    let mut k = ratio.log2().ceil() as i32;
    while 2f64.powi(k - 1) >= ratio {
        k -= 1;
    }
    while 2f64.powi(k) < ratio {
        k += 1;
    }
    Ok((k - 1).max(1) as u32)
}

/// Symmetric half-width e of the chemically accurate window for `a` extra qubits.
pub fn accuracy_window(a: u32) -> u64 {
    if a == 0 {
        0
    } else {
        (1u64 << (a - 1)) - 1
    }
}

/// Asymmetric window (e₁, e₂) given the offset κ and its sign.
pub fn asymmetric_window(a: u32, kappa: f64, sign: i8) -> Result<(u64, u64)> {
    if a == 0 {
        return Err(QpeError::Domain("asymmetric window needs a >= 1".into()));
    }
    if !(0.0..=1.0).contains(&kappa) {
        return Err(QpeError::Domain(format!("kappa must lie in [0, 1], got {kappa}")));
    }
    if sign != 1 && sign != -1 {
        return Err(QpeError::Domain(format!("sign must be +1 or -1, got {sign}")));
    }
    let half = (1u64 << (a - 1)) as f64;
    let shift = f64::from(sign) * kappa / 2.0;
    Ok(((half - shift).floor() as u64, (half + shift).floor() as u64))
}

/// m_ε = ⌈−2 ln ε / Δ²⌉ shots.
pub fn shot_budget(epsilon: f64, delta_gap: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(QpeError::Domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(delta_gap > 0.0) {
        return Err(QpeError::Domain(format!(
            "probability gap {delta_gap} is not positive; the most probable outcome is not identifiable"
        )));
    }
    if delta_gap > 1.0 {
        return Err(QpeError::Domain(format!("probability gap cannot exceed 1, got {delta_gap}")));
    }
    Ok(ceil_snapped(-2.0 * epsilon.ln() / (delta_gap * delta_gap)) as u64)
}

/// π / 2^{N_min − q}, the first-order tolerance on ‖U^{2^q} − S(U^{2^q})‖.
pub fn unitary_error_tolerance(q: u32, n_min: u32) -> f64 {
    PI * 2f64.powi(q as i32 - n_min as i32)
}

/// E ≈ −(l/2^N)/t + ⌈E₀t⌉/t.
pub fn reconstruct_energy(l: u64, n: u32, t: f64, ceil_e0_t: i64) -> f64 {
    let phase = l as f64 / 2f64.powi(n as i32);
    (-phase + ceil_e0_t as f64) / t
}

/// 𝒞_p = π (|C_p| / ε^{p+1})^{1/p}.
pub fn scaled_trotter_constant(order: u32, c_p: f64, epsilon: f64) -> Result<f64> {
    check_order(order)?;
    if !(c_p > 0.0) {
        return Err(QpeError::Domain(format!("|C_p| must be positive, got {c_p}")));
    }
    let p = f64::from(order);
    Ok(PI * (c_p / epsilon.powf(p + 1.0)).powf(1.0 / p))
}

fn check_order(order: u32) -> Result<()> {
    if order == 1 || order == 2 {
        Ok(())
    } else {
        Err(QpeError::Domain(format!("Trotter order must be 1 or 2, got {order}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterBudget {
    pub order: u32,
    /// |C_p| in Hartree^{p+1}; absent when the plan was built from 𝒞_p directly.
    pub c_p: Option<f64>,
    pub script_c_p: f64,
    pub n_min: u32,
    pub a: u32,
    /// n_min(q, t) for q = 0 .. N_min + a − 1.
    pub n_min_per_q: Vec<u64>,
    /// Σ_q n_min(q, t).
    pub n_min_tot: u64,
    /// ⌈2^a 𝒞_p⌉.
    pub n_min_tot_approx: u64,
    pub notes: Vec<String>,
}

impl TrotterBudget {
    pub fn from_scaled_constant(order: u32, script_c_p: f64, n_min: u32, a: u32) -> Result<Self> {
        check_order(order)?;
        if !(script_c_p > 0.0 && script_c_p.is_finite()) {
            return Err(QpeError::Domain(format!("scaled Trotter constant must be positive, got {script_c_p}")));
        }
        let n_phase = n_min + a;
        let n_min_per_q: Vec<u64> = (0..n_phase)
            .map(|q| ceil_snapped(2f64.powi(q as i32 - n_min as i32) * script_c_p) as u64)
            .collect();
        let n_min_tot = n_min_per_q.iter().sum();
        let n_min_tot_approx = ceil_snapped(2f64.powi(a as i32) * script_c_p) as u64;
        let mut notes = Vec::new();
        if a > 0 {
            notes.push(format!(
                "q >= N_min ({n_min}) lies beyond the first-order tolerance regime (pi / 2^(N_min - q) >= pi); budgets for q = {n_min}..{} are extrapolated",
                n_phase - 1
            ));
        }
        Ok(Self {
            order,
            c_p: None,
            script_c_p,
            n_min,
            a,
            n_min_per_q,
            n_min_tot,
            n_min_tot_approx,
            notes,
        })
    }

    pub fn from_commutator_constant(order: u32, c_p: f64, n_min: u32, a: u32, epsilon: f64) -> Result<Self> {
        let script = scaled_trotter_constant(order, c_p, epsilon)?;
        let mut budget = Self::from_scaled_constant(order, script, n_min, a)?;
        budget.c_p = Some(c_p);
        Ok(budget)
    }
}

/// How the Trotter constant enters a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrotterConstant {
    /// |C_p|, converted with the plan's ε.
    Commutator { order: u32, value: f64 },
    /// 𝒞_p given directly (for instance a rounded published value).
    Scaled { order: u32, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanInputs {
    pub strategy: TimeStepStrategy,
    pub e_init: f64,
    /// Exact ground energy when known; only used to check the implied ⌈E₀t⌉.
    pub e0: Option<f64>,
    pub one_norm: f64,
    /// Constant removed from the Hamiltonian before phase evolution.
    pub energy_shift: f64,
    pub epsilon_chem: f64,
    pub a_sweep: Vec<u32>,
    pub trotter: Vec<TrotterConstant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowChoice {
    pub a: u32,
    pub n_phase: u32,
    pub e: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpePlan {
    pub inputs: PlanInputs,
    pub t: f64,
    pub ceil_e0_t: i64,
    pub ceil_e_init_t: i64,
    /// ⌈E₀t⌉ from the exact ground energy, when supplied.
    pub ceil_e0_t_exact: Option<i64>,
    pub n_min: u32,
    pub a: u32,
    pub e: u64,
    pub epsilon_chem: f64,
    pub windows: Vec<WindowChoice>,
    pub trotter_budgets: Vec<TrotterBudget>,
    pub notes: Vec<String>,
}

impl QpePlan {
    pub fn build(inputs: PlanInputs) -> Result<Self> {
        let step = select_time_step(inputs.strategy, inputs.e_init, inputs.one_norm)?;
        Self::from_time_step(inputs, step.t, step.ceil_e0_t, vec![step.note])
    }

    fn from_time_step(inputs: PlanInputs, t: f64, ceil_e0_t: i64, mut notes: Vec<String>) -> Result<Self> {
        if inputs.a_sweep.is_empty() {
            return Err(QpeError::Validation("a sweep must list at least one value".into()));
        }
        let eps = inputs.epsilon_chem;
        let n_min = min_phase_qubits(t, eps)?;
        if 1.0 / (2f64.powi(n_min as i32) * t) <= eps {
            notes.push(format!(
                "t = {t} is large enough that fewer than one phase qubit would reach the target accuracy; N_min clamped to 1"
            ));
        }
        let ceil_e0_t_exact = inputs.e0.map(|e0| (e0 * t).ceil() as i64);
        if let Some(exact) = ceil_e0_t_exact {
            if exact != ceil_e0_t {
                notes.push(format!(
                    "the exact ground energy gives ceil(E0 t) = {exact}, but the strategy implies {ceil_e0_t}; reconstructed energies will be offset by {} / t",
                    exact - ceil_e0_t
                ));
            }
        }
        let windows: Vec<WindowChoice> = inputs
            .a_sweep
            .iter()
            .map(|&a| WindowChoice {
                a,
                n_phase: n_min + a,
                e: accuracy_window(a),
            })
            .collect();
        let mut trotter_budgets = Vec::new();
        for constant in &inputs.trotter {
            for &a in &inputs.a_sweep {
                trotter_budgets.push(match *constant {
                    TrotterConstant::Commutator { order, value } => {
                        TrotterBudget::from_commutator_constant(order, value, n_min, a, eps)?
                    }
                    TrotterConstant::Scaled { order, value } => {
                        TrotterBudget::from_scaled_constant(order, value, n_min, a)?
                    }
                });
            }
        }
        let a = inputs.a_sweep[0];
        Ok(Self {
            ceil_e_init_t: (inputs.e_init * t).ceil() as i64,
            ceil_e0_t_exact,
            t,
            ceil_e0_t,
            n_min,
            a,
            e: accuracy_window(a),
            epsilon_chem: eps,
            windows,
            trotter_budgets,
            notes,
            inputs,
        })
    }

    /// Recomputes every derived field from this plan's own `t`.
    pub fn rederive(&self) -> Result<Self> {
        let notes = self.notes.first().cloned().into_iter().collect();
        Self::from_time_step(self.inputs.clone(), self.t, self.ceil_e0_t, notes)
    }

    /// Budget for the first Trotter constant at `a`.
    pub fn budget_for(&self, a: u32) -> Option<&TrotterBudget> {
        self.trotter_budgets.iter().find(|b| b.a == a)
    }

    /// One summary row: t, ⌈E₀t⌉, ⌈E_init t⌉, N_min, n_min(0,t), n_min-tot(a).
    pub fn summary_row(&self) -> String {
        let budget = self.budget_for(self.a);
        let n0 = budget.map_or("-".to_string(), |b| b.n_min_per_q[0].to_string());
        let tot = budget.map_or("-".to_string(), |b| b.n_min_tot_approx.to_string());
        format!(
            "{:<12} t = {:<10.6} ceil(E0 t) = {:<4} ceil(E_init t) = {:<4} N_min = {:<3} n_min(0,t) = {:<7} n_min-tot(a={}) = {}",
            self.inputs.strategy.label(),
            self.t,
            self.ceil_e0_t_exact.unwrap_or(self.ceil_e0_t),
            self.ceil_e_init_t,
            self.n_min,
            n0,
            self.a,
            tot
        )
    }
}
