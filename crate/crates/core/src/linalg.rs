//! Dense Hermitian eigendecomposition and matrix norms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{QpeError, Result};
use crate::pauli::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance on ‖M − M†‖_max accepted as Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative gap below which neighbouring eigenvalues are treated as one
/// degenerate block.
const DEGENERACY_TOL: f64 = 1e-9;

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn eigenvector(&self, j: usize) -> CVector {
        self.eigenvectors.column(j).into_owned()
    }

    /// V Λ V†.
    pub fn reconstruct(&self) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, e) in self.energies.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*e);
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// Same eigenbasis with every energy shifted by `-shift`.
    pub fn shifted(&self, shift: f64) -> Spectrum {
        Spectrum {
            energies: self.energies.iter().map(|e| e - shift).collect(),
            eigenvectors: self.eigenvectors.clone(),
        }
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// max |M†M − I|.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.ncols();
    max_abs(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

pub fn diagonalize(m: &CMatrix) -> Result<Spectrum> {
    if m.nrows() != m.ncols() {
        return Err(QpeError::Validation(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = hermiticity_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(QpeError::Validation(format!(
            "matrix is not Hermitian (max |M - M†| = {defect:e})"
        )));
    }
    let n = m.nrows();
    let symmetrized = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(symmetrized);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let scale = energies.iter().fold(1.0_f64, |acc, e| acc.max(e.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && energies[end] - energies[end - 1] <= DEGENERACY_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            canonicalize_block(&mut vectors, start, end);
        }
        start = end;
    }
    for j in 0..n {
        fix_phase(&mut vectors, j);
    }
    Ok(Spectrum { energies, eigenvectors: vectors })
}

/// Replaces columns `start..end` by a basis of the same subspace that depends
/// only on the subspace: pivoted Gram-Schmidt on projected basis vectors,
/// picking at each step the basis index with the largest residual (lowest
/// index on ties).
fn canonicalize_block(vectors: &mut CMatrix, start: usize, end: usize) {
    let n = vectors.nrows();
    let block = vectors.columns(start, end - start).into_owned();
    let k = end - start;
    let mut chosen: Vec<CVector> = Vec::with_capacity(k);
    let mut used = vec![false; n];
    for _ in 0..k {
        let mut best: Option<(usize, CVector, f64)> = None;
        for i in 0..n {
            if used[i] {
                continue;
            }
            // P e_i = B (row i of B)^†
            let coeffs: CVector = block.row(i).adjoint();
            let mut r = &block * coeffs;
            for u in &chosen {
                let proj = u.dotc(&r);
                r -= u * proj;
            }
            let norm = r.norm();
            let better = match &best {
                None => true,
                Some((_, _, best_norm)) => norm > best_norm * (1.0 + 1e-8),
            };
            if better {
                best = Some((i, r, norm));
            }
        }
        let (i, r, norm) = best.expect("block has at least one candidate");
        used[i] = true;
        chosen.push(r / C64::new(norm, 0.0));
    }
    for (offset, v) in chosen.iter().enumerate() {
        vectors.set_column(start + offset, v);
    }
}

/// Rotates column `j` so its largest-magnitude entry (lowest index on ties)
/// is real and positive.
fn fix_phase(vectors: &mut CMatrix, j: usize) {
    let col = vectors.column(j);
    let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let Some(pivot) = col.iter().position(|z| z.norm() >= max * (1.0 - 1e-8)) else {
        return;
    };
    let z = col[pivot];
    if z.norm() == 0.0 {
        return;
    }
    let phase = z.conj() / z.norm();
    for r in 0..vectors.nrows() {
        vectors[(r, j)] *= phase;
    }
}

/// Largest singular value, from the top eigenvalue of M†M.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(gram);
    eig.eigenvalues.iter().copied().fold(0.0, f64::max).sqrt()
}
