//! Full-statevector QPE circuit on N + N_S qubits, built from explicit
//! matrices. Exponential in both registers and only meant as a reference for
//! small instances.
//!
//! Layout: amplitude index `l * 2^{N_S} + s`, phase register in the high bits.

use std::f64::consts::PI;

use crate::error::{QpeError, Result};
use crate::linalg::{CMatrix, CVector, Spectrum};
use crate::pauli::C64;
use crate::trotter::exact_unitary;

pub const MAX_ORACLE_PHASE_QUBITS: u32 = 4;
pub const MAX_ORACLE_SYSTEM_QUBITS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub phase_qubits: u32,
    pub system_dim: usize,
    pub amplitudes: CVector,
}

impl FullState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

fn hadamard_layer(n: u32) -> CMatrix {
    let m = 1usize << n;
    let scale = 1.0 / (m as f64).sqrt();
    CMatrix::from_fn(m, m, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        C64::new(sign * scale, 0.0)
    })
}

fn inverse_qft(n: u32) -> CMatrix {
    let m = 1usize << n;
    let scale = 1.0 / (m as f64).sqrt();
    CMatrix::from_fn(m, m, |l, k| {
        let turns = ((k * l) % m) as f64 / m as f64;
        C64::from_polar(scale, -2.0 * PI * turns)
    })
}

/// Block-diagonal Σ_k |k⟩⟨k| ⊗ Π_{q : bit q of k} U^{2^q}.
fn controlled_powers(spectrum: &Spectrum, t: f64, n: u32) -> CMatrix {
    let d = spectrum.dim();
    let m = 1usize << n;
    let powers: Vec<CMatrix> = (0..n).map(|q| exact_unitary(spectrum, t, q)).collect();
    let mut full = CMatrix::zeros(m * d, m * d);
    for k in 0..m {
        let mut block = CMatrix::identity(d, d);
        for (q, u) in powers.iter().enumerate() {
            if k >> q & 1 == 1 {
                block = u * block;
            }
        }
        full.view_mut((k * d, k * d), (d, d)).copy_from(&block);
    }
    full
}

/// Pre-measurement state of the QPE circuit for `init` (computational basis).
pub fn run_qpe_circuit(spectrum: &Spectrum, init: &CVector, t: f64, n: u32) -> Result<FullState> {
    let d = spectrum.dim();
    if n == 0 || n > MAX_ORACLE_PHASE_QUBITS {
        return Err(QpeError::Capacity {
            what: "oracle phase qubits",
            requested: n as usize,
            max: MAX_ORACLE_PHASE_QUBITS as usize,
        });
    }
    if !d.is_power_of_two() || d > 1 << MAX_ORACLE_SYSTEM_QUBITS {
        return Err(QpeError::Capacity {
            what: "oracle system dimension",
            requested: d,
            max: 1 << MAX_ORACLE_SYSTEM_QUBITS,
        });
    }
    if init.len() != d {
        return Err(QpeError::Validation(format!("initial state has {} entries, expected {d}", init.len())));
    }
    let m = 1usize << n;
    let eye = CMatrix::identity(d, d);
    let mut state = CVector::zeros(m * d);
    state.rows_mut(0, d).copy_from(init);

    let state = hadamard_layer(n).kronecker(&eye) * state;
    let state = controlled_powers(spectrum, t, n) * state;
    let state = inverse_qft(n).kronecker(&eye) * state;
    Ok(FullState {
        phase_qubits: n,
        system_dim: d,
        amplitudes: state,
    })
}

/// P(l) = Σ_s |amp(l, s)|².
pub fn marginal_distribution(fs: &FullState) -> Vec<f64> {
    fs.amplitudes
        .as_slice()
        .chunks(fs.system_dim)
        .map(|block| block.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

/// Normalized system-register slice at phase outcome `l`.
pub fn conditional_state(fs: &FullState, l: usize) -> Result<CVector> {
    let m = 1usize << fs.phase_qubits;
    if l >= m {
        return Err(QpeError::Domain(format!("outcome {l} outside 0..{m}")));
    }
    let slice = fs.amplitudes.rows(l * fs.system_dim, fs.system_dim).into_owned();
    let p = slice.norm_squared();
    if p <= 1e-12 {
        return Err(QpeError::MeasureZero { l, probability: p });
    }
    Ok(slice / C64::new(p.sqrt(), 0.0))
}

/// |⟨a|b⟩|².
pub fn fidelity(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm_sqr()
}
