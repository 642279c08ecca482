//! Hamiltonians written as real linear combinations of Pauli strings.
//!
//! File grammar: one `<coefficient> <pauli-string>` term per line, `#` starts
//! a comment, blank lines are ignored. Repeated strings are summed and terms
//! that cancel to zero are dropped.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{QpeError, Result};
use crate::pauli::{PauliString, C64, MAX_SYSTEM_QUBITS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcuTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcuHamiltonian {
    n_qubits: usize,
    terms: Vec<LcuTerm>,
}

impl LcuHamiltonian {
    /// Builds a Hamiltonian from raw terms, merging duplicates. Merged terms
    /// keep the position of their first occurrence.
    pub fn from_terms(terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        let mut order: Vec<PauliString> = Vec::new();
        let mut sums: BTreeMap<PauliString, f64> = BTreeMap::new();
        let mut n_qubits = None;
        for (coefficient, string) in terms {
            if !coefficient.is_finite() {
                return Err(QpeError::Validation(format!("non-finite coefficient for {string}")));
            }
            match n_qubits {
                None => n_qubits = Some(string.n_qubits()),
                Some(n) if n != string.n_qubits() => {
                    return Err(QpeError::Validation(format!(
                        "string {string} has {} qubits, expected {n}",
                        string.n_qubits()
                    )))
                }
                _ => {}
            }
            match sums.get_mut(&string) {
                Some(sum) => *sum += coefficient,
                None => {
                    order.push(string.clone());
                    sums.insert(string, coefficient);
                }
            }
        }
        let terms: Vec<LcuTerm> = order
            .into_iter()
            .filter_map(|string| {
                let coefficient = sums[&string];
                (coefficient != 0.0).then_some(LcuTerm { coefficient, string })
            })
            .collect();
        match n_qubits {
            Some(n_qubits) if !terms.is_empty() => Ok(Self { n_qubits, terms }),
            _ => Err(QpeError::EmptyHamiltonian),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        let mut width: Option<usize> = None;
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let parse_err = |message: String| QpeError::Parse { line: line_no, message };
            let mut fields = content.split_whitespace();
            let (Some(coef), Some(word), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err(format!("expected `<coefficient> <pauli-string>`, got \"{content}\"")));
            };
            let coefficient: f64 = coef
                .parse()
                .map_err(|_| parse_err(format!("coefficient \"{coef}\" is not a number")))?;
            if !coefficient.is_finite() {
                return Err(parse_err(format!("coefficient \"{coef}\" is not finite")));
            }
            let string: PauliString = word.parse().map_err(|e: QpeError| match e {
                QpeError::Validation(msg) => parse_err(msg),
                other => other,
            })?;
            match width {
                None => width = Some(string.n_qubits()),
                Some(w) if w != string.n_qubits() => {
                    return Err(parse_err(format!(
                        "pauli string \"{word}\" has length {}, earlier terms have length {w}",
                        string.n_qubits()
                    )))
                }
                _ => {}
            }
            raw.push((coefficient, string));
        }
        Self::from_terms(raw)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[LcuTerm] {
        &self.terms
    }

    /// Σ_β |γ_β|, an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    /// Coefficient of the all-identity string (0 when absent).
    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.string.is_identity())
            .map_or(0.0, |t| t.coefficient)
    }

    /// Copy with the all-identity term removed, plus the removed shift.
    pub fn without_identity(&self) -> Result<(Self, f64)> {
        let shift = self.identity_coefficient();
        let terms = self
            .terms
            .iter()
            .filter(|t| !t.string.is_identity())
            .map(|t| (t.coefficient, t.string.clone()));
        Ok((Self::from_terms(terms)?, shift))
    }

    pub fn dense_matrix(&self) -> Result<DMatrix<C64>> {
        if self.n_qubits > MAX_SYSTEM_QUBITS {
            return Err(QpeError::Capacity {
                what: "system qubits",
                requested: self.n_qubits,
                max: MAX_SYSTEM_QUBITS,
            });
        }
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for term in &self.terms {
            for b in 0..dim {
                let (phase, row) = term.string.apply_to_basis(b);
                m[(row, b)] += phase * term.coefficient;
            }
        }
        Ok(m)
    }

    /// First-order commutator constant ½ Σ_{s<r} |γ_r γ_s| ‖[H_r, H_s]‖.
    pub fn commutator_constant_c1(&self) -> f64 {
        let mut total = 0.0;
        for (s, a) in self.terms.iter().enumerate() {
            for b in &self.terms[s + 1..] {
                total += (a.coefficient * b.coefficient).abs() * a.string.commutator_norm(&b.string);
            }
        }
        0.5 * total
    }

    /// Term indices by descending |γ|, ties kept in file order.
    pub fn default_term_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.terms.len()).collect();
        order.sort_by(|&a, &b| {
            self.terms[b]
                .coefficient
                .abs()
                .total_cmp(&self.terms[a].coefficient.abs())
        });
        order
    }
}

impl fmt::Display for LcuHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "{} {}", t.coefficient, t.string)?;
        }
        Ok(())
    }
}
