//! Analytic QPE outcome distributions.
//!
//! Measuring the phase register after QPE on `Σ_j c_j |ψ_j⟩` yields `l` with
//! probability `P(l) = Σ_j |c_j|² |f(θ_j − l/2^N)|²`, where `f` is the
//! normalized Dirichlet kernel `f(δ) = 2^{-N} Σ_k e^{2πikδ}`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QpeError, Result};
use crate::pauli::C64;
use crate::state::InitialState;

/// Largest phase register whose full outcome table is materialized.
pub const MAX_PHASE_QUBITS: u32 = 24;

/// Accepted deviation of Σ|c_j|² from 1 when building a table.
const WEIGHT_TOL: f64 = 1e-9;

/// Below this probability an outcome is treated as impossible.
const MEASURE_ZERO: f64 = 1e-300;

/// θ = −E t mod 1, in [0, 1).
pub fn phase_of_energy(energy: f64, t: f64) -> f64 {
    wrap_unit(-energy * t)
}

fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        let y2 = y * y;
        1.0 - y2 / 6.0 + y2 * y2 / 120.0
    } else {
        y.sin() / y
    }
}

/// `sin(πMx) / (M sin(πx))` for x ∈ [−½, ½]; exactly zero when Mx is a
/// nonzero integer.
fn dirichlet_ratio(x: f64, m: f64) -> f64 {
    let y = m * x;
    if x != 0.0 && y == y.round() {
        return 0.0;
    }
    sinc(PI * y) / sinc(PI * x)
}

/// Complex kernel f(δ).
pub fn f_kernel(delta: f64, n: u32) -> C64 {
    let m = 2f64.powi(n as i32);
    let x = delta - delta.round();
    C64::from_polar(dirichlet_ratio(x, m), PI * (m - 1.0) * x)
}

/// |f(δ)|².
pub fn f_kernel_sq(delta: f64, n: u32) -> f64 {
    let m = 2f64.powi(n as i32);
    let x = delta - delta.round();
    let r = dirichlet_ratio(x, m);
    r * r
}

/// (1/π²) Σ_{k=−e}^{e} 1/(½ − k)², the guaranteed fraction of |c₀|² inside a
/// symmetric window of half-width `e` around the ground-state bin.
pub fn window_lower_bound(e: u64) -> f64 {
    let e = e as i64;
    (-e..=e).map(|k| 1.0 / (0.5 - k as f64).powi(2)).sum::<f64>() / (PI * PI)
}

fn check_register(n: u32) -> Result<()> {
    if n == 0 {
        return Err(QpeError::Domain("the phase register needs at least one qubit".into()));
    }
    if n > MAX_PHASE_QUBITS {
        return Err(QpeError::Capacity {
            what: "phase qubits",
            requested: n as usize,
            max: MAX_PHASE_QUBITS as usize,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub thetas: Vec<f64>,
    pub coefficients: Vec<C64>,
    pub t: f64,
    pub n: u32,
}

impl PhaseTable {
    pub fn new(energies: &[f64], init: &InitialState, t: f64, n: u32) -> Result<Self> {
        if !(t > 0.0) {
            return Err(QpeError::Domain(format!("t must be positive, got {t}")));
        }
        let thetas = energies.iter().map(|&e| phase_of_energy(e, t)).collect();
        Self::from_phases(thetas, init.overlaps.clone(), t, n)
    }

    /// Table from phases already mapped to [0, 1), e.g. eigenphases of a
    /// product-formula unitary.
    pub fn from_phases(thetas: Vec<f64>, coefficients: Vec<C64>, t: f64, n: u32) -> Result<Self> {
        check_register(n)?;
        if thetas.len() != coefficients.len() || thetas.is_empty() {
            return Err(QpeError::Validation(format!(
                "{} phases but {} coefficients",
                thetas.len(),
                coefficients.len()
            )));
        }
        if let Some(bad) = thetas.iter().find(|th| !(0.0..1.0).contains(*th)) {
            return Err(QpeError::Validation(format!("phase {bad} outside [0, 1)")));
        }
        let norm_sqr: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > WEIGHT_TOL {
            return Err(QpeError::Validation(format!("initial-state weights sum to {norm_sqr}, expected 1")));
        }
        let scale = norm_sqr.sqrt();
        let coefficients = coefficients.into_iter().map(|c| c / scale).collect();
        Ok(Self { thetas, coefficients, t, n })
    }

    /// Same phases and state with a different register size.
    pub fn with_register(&self, n: u32) -> Result<Self> {
        check_register(n)?;
        Ok(Self { n, ..self.clone() })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn bins(&self) -> u64 {
        1u64 << self.n
    }

    fn delta(&self, j: usize, l: u64) -> f64 {
        self.thetas[j] - l as f64 / self.bins() as f64
    }

    /// P(l) evaluated directly.
    pub fn probability(&self, l: u64) -> f64 {
        self.thetas
            .iter()
            .zip(&self.coefficients)
            .map(|(&th, c)| c.norm_sqr() * f_kernel_sq(th - l as f64 / self.bins() as f64, self.n))
            .sum()
    }

    /// Nearest bin of eigenphase `j` (round half up, mod 2^N) with its κ and
    /// the sign of θ_j − l_j/2^N.
    pub fn nearest_bin(&self, j: usize) -> (u64, f64, i8) {
        let x = self.thetas[j] * self.bins() as f64;
        let unwrapped = (x + 0.5).floor();
        let kappa = (2.0 * (x - unwrapped).abs()).min(1.0);
        let sign = if x >= unwrapped { 1 } else { -1 };
        ((unwrapped as u64) % self.bins(), kappa, sign)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakInfo {
    pub j: usize,
    pub weight: f64,
    pub nearest_bin: u64,
    pub kappa: f64,
    pub sign: i8,
    /// |f(θ_j − l_j/2^N)|².
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDistribution {
    pub n: u32,
    #[serde(skip)]
    pub probs: Vec<f64>,
    pub l_star: u64,
    pub delta_gap: f64,
    pub per_state: Vec<PeakInfo>,
}

impl PhaseDistribution {
    /// Distribution from a raw table; peak diagnostics are left empty.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let len = probs.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QpeError::Validation(format!("distribution length {len} is not 2^N with N >= 1")));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(QpeError::Validation("probabilities must be finite and non-negative".into()));
        }
        let (l_star, delta_gap) = top_and_gap(&probs);
        Ok(Self {
            n: len.trailing_zeros(),
            probs,
            l_star,
            delta_gap,
            per_state: Vec::new(),
        })
    }

    pub fn bins(&self) -> u64 {
        self.probs.len() as u64
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Σ_{k=−e₁}^{e₂} P(l₀ + k), indices taken mod 2^N.
    pub fn window_sum(&self, center: u64, below: u64, above: u64) -> f64 {
        let m = self.bins() as i64;
        let span = (below + above + 1).min(self.bins());
        (0..span as i64)
            .map(|k| self.probs[(center as i64 - below as i64 + k).rem_euclid(m) as usize])
            .sum()
    }
}

/// argmax (smallest index on ties) and P(l*) − max_{l≠l*} P(l).
fn top_and_gap(probs: &[f64]) -> (u64, f64) {
    let mut best = 0;
    for (l, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = l;
        }
    }
    let runner_up = probs
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != best)
        .map(|(_, &p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    (best as u64, probs[best] - runner_up)
}

pub fn phase_distribution(table: &PhaseTable) -> Result<PhaseDistribution> {
    check_register(table.n)?;
    let m = table.bins();
    let active: Vec<(f64, f64)> = table
        .thetas
        .iter()
        .zip(&table.coefficients)
        .map(|(&th, c)| (th, c.norm_sqr()))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    let n = table.n;
    let probs: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|l| {
            let phase = l as f64 / m as f64;
            active.iter().map(|&(th, w)| w * f_kernel_sq(th - phase, n)).sum()
        })
        .collect();
    let (l_star, delta_gap) = top_and_gap(&probs);
    let per_state = (0..table.thetas.len())
        .map(|j| {
            let (bin, kappa, sign) = table.nearest_bin(j);
            PeakInfo {
                j,
                weight: table.coefficients[j].norm_sqr(),
                nearest_bin: bin,
                kappa,
                sign,
                peak: f_kernel_sq(table.delta(j, bin), n),
            }
        })
        .collect();
    Ok(PhaseDistribution {
        n,
        probs,
        l_star,
        delta_gap,
        per_state,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub center: u64,
    pub below: u64,
    pub above: u64,
    pub probability: f64,
    /// |c₀|² times the symmetric-window constant, for symmetric windows.
    pub lower_bound: Option<f64>,
}

/// Probability inside the symmetric window of half-width `e` around `center`,
/// with the guaranteed lower bound when `center` is the ground-state bin.
pub fn window_probability(dist: &PhaseDistribution, center: u64, e: u64) -> WindowSummary {
    let lower_bound = dist
        .per_state
        .first()
        .filter(|p| p.nearest_bin == center)
        .map(|p| p.weight * window_lower_bound(e));
    WindowSummary {
        center,
        below: e,
        above: e,
        probability: dist.window_sum(center, e, e),
        lower_bound,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostMeasurementState {
    pub l: u64,
    pub probability: f64,
    pub coefficients: Vec<C64>,
    pub ground_weight: f64,
}

pub fn post_measurement(table: &PhaseTable, l: u64) -> Result<PostMeasurementState> {
    if l >= table.bins() {
        return Err(QpeError::Domain(format!("outcome {l} outside 0..{}", table.bins())));
    }
    let raw: Vec<C64> = (0..table.thetas.len())
        .map(|j| table.coefficients[j] * f_kernel(table.delta(j, l), table.n))
        .collect();
    let probability: f64 = raw.iter().map(|c| c.norm_sqr()).sum();
    if probability < MEASURE_ZERO {
        return Err(QpeError::MeasureZero { l: l as usize, probability });
    }
    let scale = probability.sqrt();
    let coefficients: Vec<C64> = raw.into_iter().map(|c| c / scale).collect();
    Ok(PostMeasurementState {
        l,
        probability,
        ground_weight: coefficients[0].norm_sqr(),
        coefficients,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRatios {
    pub l0: u64,
    /// Λ_j for every j (Λ_0 = 1).
    pub ratios: Vec<f64>,
    /// Whether |θ_j − l₀/2^N| > 1/2^N; `None` for j = 0 and for N < 3,
    /// where the separation constant does not apply.
    pub far_from_peak: Vec<Option<bool>>,
}

pub fn lambda_ratios(table: &PhaseTable, l0: u64) -> Result<LambdaRatios> {
    let denom = f_kernel_sq(table.delta(0, l0), table.n);
    if !(denom > 0.0) {
        return Err(QpeError::Domain(format!("ground-state kernel vanishes at l0 = {l0}")));
    }
    let m = table.bins() as f64;
    let ratios = (0..table.thetas.len())
        .map(|j| f_kernel_sq(table.delta(j, l0), table.n) / denom)
        .collect();
    let far_from_peak = (0..table.thetas.len())
        .map(|j| {
            (j > 0 && table.n >= 3).then(|| {
                let d = table.delta(j, l0);
                (d - d.round()).abs() > 1.0 / m
            })
        })
        .collect();
    Ok(LambdaRatios { l0, ratios, far_from_peak })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialStateReport {
    pub ground_weight: f64,
    pub l0: u64,
    pub ground_peak: f64,
    /// 0.5/|f(θ₀ − l₀/2^N)|² − Σ_{j≥1} |c_j|² Λ_j; may be negative.
    pub threshold: f64,
    pub exceeds_threshold: bool,
    /// |c₀|² ≥ 0.6.
    pub average_weight_ok: bool,
    /// |c₀|² ≥ 3 |c_j|² for all j ≥ 1.
    pub dominance_ok: bool,
    /// |c₀^{(l₀)}|² ≥ 10 |c_j^{(l₀)}|² for all j ≥ 1.
    pub strong_projection: bool,
    /// |c₀^{(l₀)}|² > |c₀|² (or |c₀|² already 1).
    pub weak_projection: bool,
    pub post_ground_weight: Option<f64>,
    /// Groups of eigenindices with non-zero weight sharing a nearest bin.
    pub shared_bins: Vec<(u64, Vec<usize>)>,
}

pub fn initial_state_diagnostics(table: &PhaseTable) -> Result<InitialStateReport> {
    let weights = table.weights();
    let w0 = weights[0];
    let (l0, _, _) = table.nearest_bin(0);
    let lambdas = lambda_ratios(table, l0)?;
    let ground_peak = f_kernel_sq(table.delta(0, l0), table.n);
    let excited: f64 = weights.iter().zip(&lambdas.ratios).skip(1).map(|(w, r)| w * r).sum();
    let threshold = 0.5 / ground_peak - excited;

    let post = post_measurement(table, l0).ok();
    let (strong, weak, post_w0) = match &post {
        Some(p) => {
            let g = p.ground_weight;
            let strong = p.coefficients.iter().skip(1).all(|c| g >= 10.0 * c.norm_sqr());
            let weak = g > w0 || w0 >= 1.0 - 1e-12;
            (strong, weak, Some(g))
        }
        None => (false, false, None),
    };

    let mut by_bin: std::collections::BTreeMap<u64, Vec<usize>> = Default::default();
    for (j, w) in weights.iter().enumerate() {
        if *w > 1e-12 {
            by_bin.entry(table.nearest_bin(j).0).or_default().push(j);
        }
    }
    let shared_bins = by_bin.into_iter().filter(|(_, js)| js.len() > 1).collect();

    Ok(InitialStateReport {
        ground_weight: w0,
        l0,
        ground_peak,
        threshold,
        exceeds_threshold: w0 > threshold,
        average_weight_ok: w0 >= 0.6,
        dominance_ok: weights.iter().skip(1).all(|w| w0 >= 3.0 * w),
        strong_projection: strong,
        weak_projection: weak,
        post_ground_weight: post_w0,
        shared_bins,
    })
}
