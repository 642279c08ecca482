//! Initial system-register states and their eigenbasis overlaps.
//!
//! File formats (one kind per file, `#` comments allowed):
//!
//! ```text
//! basis 5
//! ```
//! ```text
//! amp 1 0.70710678 0.0
//! amp 2 0.0 0.70710678
//! ```
//! ```text
//! eig 0 0.99 0.0
//! eig 3 0.141067 0.0
//! ```
//! Amplitudes not listed are zero.

use serde::{Deserialize, Serialize};

use crate::error::{QpeError, Result};
use crate::linalg::{CVector, Spectrum};
use crate::pauli::C64;

/// Accepted deviation of an amplitude list's norm from 1 before rejecting it.
pub const NORM_INPUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateSource {
    ComputationalBasisIndex,
    ComputationalAmplitudes,
    EigenbasisAmplitudes,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    BasisIndex(usize),
    /// Sparse (index, amplitude) pairs in the computational basis.
    Amplitudes(Vec<(usize, C64)>),
    /// Sparse (j, c_j) pairs in the eigenbasis.
    EigenAmplitudes(Vec<(usize, C64)>),
}

/// Overlaps c_j = ⟨ψ_j|ψ_init⟩ with the Hamiltonian eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub overlaps: Vec<C64>,
    pub source: StateSource,
}

impl InitialState {
    pub fn weights(&self) -> Vec<f64> {
        self.overlaps.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.overlaps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Σ_j c_j |ψ_j⟩ written in the computational basis.
    pub fn computational_vector(&self, spectrum: &Spectrum) -> CVector {
        &spectrum.eigenvectors * CVector::from_column_slice(&self.overlaps)
    }
}

impl StateSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kind: Option<&'static str> = None;
        let mut entries: Vec<(usize, C64)> = Vec::new();
        let mut basis: Option<usize> = None;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| QpeError::Parse { line: line_no, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            let this_kind = match fields[0] {
                "basis" => "basis",
                "amp" => "amp",
                "eig" => "eig",
                other => return Err(err(format!("unknown record \"{other}\", expected basis/amp/eig"))),
            };
            if let Some(k) = kind {
                if k != this_kind || k == "basis" {
                    return Err(err(format!("cannot mix \"{this_kind}\" with earlier \"{k}\" records")));
                }
            }
            kind = Some(this_kind);
            let parse_index = |s: &str| s.parse::<usize>().map_err(|_| err(format!("invalid index \"{s}\"")));
            let parse_real = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(format!("invalid number \"{s}\"")))
            };
            match (this_kind, fields.len()) {
                ("basis", 2) => basis = Some(parse_index(fields[1])?),
                ("amp" | "eig", 4) => {
                    let i = parse_index(fields[1])?;
                    if entries.iter().any(|(k, _)| *k == i) {
                        return Err(err(format!("index {i} listed twice")));
                    }
                    entries.push((i, C64::new(parse_real(fields[2])?, parse_real(fields[3])?)));
                }
                _ => return Err(err(format!("wrong number of fields in \"{content}\""))),
            }
        }
        match kind {
            Some("basis") => Ok(StateSpec::BasisIndex(basis.expect("basis record parsed"))),
            Some("amp") => Ok(StateSpec::Amplitudes(entries)),
            Some("eig") => Ok(StateSpec::EigenAmplitudes(entries)),
            _ => Err(QpeError::Validation("initial-state file has no records".into())),
        }
    }

    fn dense(entries: &[(usize, C64)], dim: usize) -> Result<Vec<C64>> {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        for &(i, z) in entries {
            if i >= dim {
                return Err(QpeError::Validation(format!("index {i} outside a {dim}-dimensional space")));
            }
            v[i] = z;
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_INPUT_TOL {
            return Err(QpeError::Validation(format!("amplitudes have norm {norm}, expected 1")));
        }
        Ok(v.into_iter().map(|z| z / norm).collect())
    }
}

pub fn overlaps(spectrum: &Spectrum, spec: &StateSpec) -> Result<InitialState> {
    let dim = spectrum.dim();
    match spec {
        StateSpec::BasisIndex(k) => {
            if *k >= dim {
                return Err(QpeError::Validation(format!("basis index {k} outside a {dim}-dimensional space")));
            }
            let overlaps = (0..dim).map(|j| spectrum.eigenvectors[(*k, j)].conj()).collect();
            Ok(InitialState {
                overlaps,
                source: StateSource::ComputationalBasisIndex,
            })
        }
        StateSpec::Amplitudes(entries) => {
            let psi = CVector::from_vec(StateSpec::dense(entries, dim)?);
            let c = spectrum.eigenvectors.adjoint() * psi;
            Ok(InitialState {
                overlaps: c.iter().copied().collect(),
                source: StateSource::ComputationalAmplitudes,
            })
        }
        StateSpec::EigenAmplitudes(entries) => Ok(InitialState {
            overlaps: StateSpec::dense(entries, dim)?,
            source: StateSource::EigenbasisAmplitudes,
        }),
    }
}

/// Σ_j |c_j|² E_j.
pub fn expectation_energy(spectrum: &Spectrum, init: &InitialState) -> f64 {
    spectrum
        .energies
        .iter()
        .zip(&init.overlaps)
        .map(|(e, c)| c.norm_sqr() * e)
        .sum()
}
