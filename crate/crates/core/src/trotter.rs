//! Product-formula approximations of the controlled powers U^{2^q}.
//!
//! With U = e^{−i2πHt}, one order-1 step applies every term exponential
//! `exp(−i γ_β H_β 2πt 2^q / n)` in `term_order`; order 2 applies the same
//! sequence with half angles forward and then in reverse.

use std::f64::consts::PI;

use nalgebra::Schur;
use serde::{Deserialize, Serialize};

use crate::error::{QpeError, Result};
use crate::lcu::LcuHamiltonian;
use crate::linalg::{spectral_norm, CMatrix, Spectrum};
use crate::pauli::C64;
use crate::spectral::{phase_of_energy, PhaseTable};
use crate::state::InitialState;

/// Best-to-second-best overlap ratio under which an eigenphase match is
/// reported as ambiguous.
const MATCH_RATIO: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterSpec {
    pub order: u32,
    pub steps: u64,
    pub q: u32,
    pub t: f64,
    pub term_order: Vec<usize>,
}

impl TrotterSpec {
    /// Spec with the default term order (descending |γ|).
    pub fn new(h: &LcuHamiltonian, order: u32, steps: u64, q: u32, t: f64) -> Result<Self> {
        let spec = Self {
            order,
            steps,
            q,
            t,
            term_order: h.default_term_order(),
        };
        spec.validate(h)?;
        Ok(spec)
    }

    pub fn validate(&self, h: &LcuHamiltonian) -> Result<()> {
        if self.order != 1 && self.order != 2 {
            return Err(QpeError::Domain(format!("Trotter order must be 1 or 2, got {}", self.order)));
        }
        if self.steps == 0 {
            return Err(QpeError::Domain("Trotter step count must be at least 1".into()));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(QpeError::Domain(format!("t must be positive, got {}", self.t)));
        }
        if self.q > 60 {
            return Err(QpeError::Domain(format!("controlled-power exponent {} is too large", self.q)));
        }
        let mut seen = vec![false; h.terms().len()];
        for &i in &self.term_order {
            if i >= seen.len() || seen[i] {
                return Err(QpeError::Validation("term order is not a permutation of the LCU terms".into()));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(QpeError::Validation("term order is not a permutation of the LCU terms".into()));
        }
        Ok(())
    }

    /// Evolution angle of one step per unit coefficient, 2πt2^q/n.
    fn step_angle(&self) -> f64 {
        2.0 * PI * self.t * 2f64.powi(self.q as i32) / self.steps as f64
    }
}

/// V e^{−i2πΛt2^q} V†.
pub fn exact_unitary(spectrum: &Spectrum, t: f64, q: u32) -> CMatrix {
    let scale = t * 2f64.powi(q as i32);
    let mut scaled = spectrum.eigenvectors.clone();
    for (j, &e) in spectrum.energies.iter().enumerate() {
        // reduce the number of turns first so large 2^q keep full precision
        let turns = (e * scale).rem_euclid(1.0);
        let phase = C64::from_polar(1.0, -2.0 * PI * turns);
        for r in 0..scaled.nrows() {
            scaled[(r, j)] *= phase;
        }
    }
    scaled * spectrum.eigenvectors.adjoint()
}

fn matrix_power(base: &CMatrix, mut exponent: u64) -> CMatrix {
    let n = base.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut square = base.clone();
    while exponent > 0 {
        if exponent & 1 == 1 {
            result = &square * &result;
        }
        exponent >>= 1;
        if exponent > 0 {
            square = &square * &square;
        }
    }
    result
}

/// S(U^{2^q}, p) with `spec.steps` steps.
pub fn trotter_step(h: &LcuHamiltonian, spec: &TrotterSpec) -> Result<CMatrix> {
    spec.validate(h)?;
    let dim = h.dim();
    let angle = spec.step_angle();
    let terms = h.terms();
    let mut step = CMatrix::identity(dim, dim);
    match spec.order {
        1 => {
            for &i in &spec.term_order {
                terms[i].string.apply_exponential_left(terms[i].coefficient * angle, &mut step);
            }
        }
        _ => {
            for &i in spec.term_order.iter().chain(spec.term_order.iter().rev()) {
                terms[i].string.apply_exponential_left(terms[i].coefficient * angle / 2.0, &mut step);
            }
        }
    }
    Ok(matrix_power(&step, spec.steps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrotterError {
    pub spectral_error: f64,
    /// |C_p|(2πt2^q)^{p+1}/n^p, when |C_p| is known.
    pub bound: Option<f64>,
}

/// ‖U^{2^q} − S(U^{2^q})‖ with the commutator bound. For p = 1 the constant
/// is computed from the terms when `c_p` is `None`.
pub fn trotter_error(
    h: &LcuHamiltonian,
    spectrum: &Spectrum,
    spec: &TrotterSpec,
    c_p: Option<f64>,
) -> Result<TrotterError> {
    let exact = exact_unitary(spectrum, spec.t, spec.q);
    let approx = trotter_step(h, spec)?;
    let c_p = match (spec.order, c_p) {
        (_, Some(c)) => Some(c),
        (1, None) => Some(h.commutator_constant_c1()),
        _ => None,
    };
    let p = spec.order as i32;
    let bound = c_p.map(|c| {
        c.abs() * (2.0 * PI * spec.t * 2f64.powi(spec.q as i32)).powi(p + 1) / (spec.steps as f64).powi(p)
    });
    Ok(TrotterError {
        spectral_error: spectral_norm(&(exact - approx)),
        bound,
    })
}

/// Signed distance a − b on the unit circle, in [−½, ½).
pub fn circular_difference(a: f64, b: f64) -> f64 {
    let d = a - b;
    d - (d + 0.5).floor()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSpectrum {
    /// φ_j of the effective eigenvector matched to exact eigenstate j.
    pub phases: Vec<f64>,
    pub exact_phases: Vec<f64>,
    /// O[j, k] = ⟨ψ_j|w_k⟩ with columns reordered to follow the matching.
    #[serde(skip)]
    pub overlaps: CMatrix,
    /// ‖H − H_S‖ for the effective Hamiltonian with S = e^{−i2πt2^q H_S}.
    pub hamiltonian_deviation: f64,
    pub warnings: Vec<String>,
}

impl EffectiveSpectrum {
    pub fn max_phase_error(&self) -> f64 {
        self.phases
            .iter()
            .zip(&self.exact_phases)
            .map(|(a, b)| circular_difference(*a, *b).abs())
            .fold(0.0, f64::max)
    }

    /// Whether 2πt2^q‖H − H_S‖ exceeds ½, past the first-order regime.
    pub fn beyond_first_order(&self, t: f64, q: u32) -> bool {
        2.0 * PI * t * 2f64.powi(q as i32) * self.hamiltonian_deviation > 0.5
    }
}

/// Eigenphases of the product-formula unitary, matched to the exact
/// eigenstates by maximum overlap. For q > 0 the reference phases are those
/// of U^{2^q}.
pub fn effective_spectrum(h: &LcuHamiltonian, spectrum: &Spectrum, spec: &TrotterSpec) -> Result<EffectiveSpectrum> {
    let s = trotter_step(h, spec)?;
    let scale = spec.t * 2f64.powi(spec.q as i32);
    let dim = s.nrows();
    let (w, tri) = Schur::new(s).unpack();
    let eff_phases: Vec<f64> = (0..dim)
        .map(|k| (tri[(k, k)].arg() / (2.0 * PI)).rem_euclid(1.0) % 1.0)
        .collect();
    let raw = spectrum.eigenvectors.adjoint() * &w;

    let mut warnings = Vec::new();
    let weights = raw.map(|z| z.norm_sqr());
    let mut pairs: Vec<(usize, usize)> = (0..dim).flat_map(|j| (0..dim).map(move |k| (j, k))).collect();
    pairs.sort_by(|&(a, b), &(c, d)| weights[(c, d)].total_cmp(&weights[(a, b)]).then((a, b).cmp(&(c, d))));
    let mut matched = vec![usize::MAX; dim];
    let mut taken = vec![false; dim];
    for (j, k) in pairs {
        if matched[j] == usize::MAX && !taken[k] {
            matched[j] = k;
            taken[k] = true;
        }
    }
    for j in 0..dim {
        let mut row: Vec<f64> = (0..dim).map(|k| weights[(j, k)]).collect();
        row.sort_by(|a, b| b.total_cmp(a));
        if dim > 1 && row[0] < MATCH_RATIO * row[1] {
            warnings.push(format!(
                "eigenstate {j}: best and second-best effective overlaps {:.3e} and {:.3e} are within a factor {MATCH_RATIO}",
                row[0], row[1]
            ));
        }
    }

    let exact_phases: Vec<f64> = spectrum.energies.iter().map(|&e| phase_of_energy(e, scale)).collect();
    let phases: Vec<f64> = matched.iter().map(|&k| eff_phases[k]).collect();
    let mut overlaps = CMatrix::zeros(dim, dim);
    let mut vectors = CMatrix::zeros(dim, dim);
    for (j, &k) in matched.iter().enumerate() {
        overlaps.set_column(j, &raw.column(k));
        vectors.set_column(j, &w.column(k));
    }

    let max_turns = spectrum.energies.iter().map(|e| (e * scale).abs()).fold(0.0, f64::max);
    if max_turns >= 0.5 {
        warnings.push(format!(
            "max |E_j| t 2^q = {max_turns:.4} >= 1/2: phases are compared mod 1 without unwrapping"
        ));
    }
    let effective_energies: Vec<f64> = (0..dim)
        .map(|j| spectrum.energies[j] - circular_difference(phases[j], exact_phases[j]) / scale)
        .collect();
    let mut h_s = vectors.clone();
    for (j, e) in effective_energies.iter().enumerate() {
        for r in 0..dim {
            h_s[(r, j)] *= C64::new(*e, 0.0);
        }
    }
    let h_s = h_s * vectors.adjoint();
    let hamiltonian_deviation = spectral_norm(&(spectrum.reconstruct() - h_s));

    Ok(EffectiveSpectrum {
        phases,
        exact_phases,
        overlaps,
        hamiltonian_deviation,
        warnings,
    })
}

/// Initial-state coefficients in the effective eigenbasis, d_k = Σ_j conj(O[j,k]) c_j.
pub fn effective_coefficients(eff: &EffectiveSpectrum, init: &InitialState) -> Vec<C64> {
    let dim = eff.phases.len();
    (0..dim)
        .map(|k| {
            (0..dim)
                .map(|j| eff.overlaps[(j, k)].conj() * init.overlaps[j])
                .sum()
        })
        .collect()
}

/// Phase table of the product-formula QPE for a register of `n` qubits.
pub fn trotterized_phase_table(eff: &EffectiveSpectrum, init: &InitialState, t: f64, n: u32) -> Result<PhaseTable> {
    PhaseTable::from_phases(eff.phases.clone(), effective_coefficients(eff, init), t, n)
}
