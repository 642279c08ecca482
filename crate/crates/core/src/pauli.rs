//! Pauli strings in symplectic form.
//!
//! A string over `{I, X, Y, Z}` of length `n` acts on `n` qubits. The first
//! character addresses qubit 0, which is the most significant bit of a
//! computational-basis index, so `"ZI"` is `Z ⊗ I`.
//!
//! Every string is stored as an (x, z) bit-mask pair. Acting on a basis state
//! `|b⟩` gives `i^{#Y} (-1)^{popcount(b & z)} |b ^ x⟩`, which lets us build dense
//! matrices and exponentials without Kronecker products.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{QpeError, Result};

pub type C64 = Complex<f64>;

/// Largest register handled by dense representations (2^14 amplitudes).
pub const MAX_SYSTEM_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliOp::I),
            'X' => Some(PauliOp::X),
            'Y' => Some(PauliOp::Y),
            'Z' => Some(PauliOp::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            PauliOp::I => (false, false),
            PauliOp::X => (true, false),
            PauliOp::Y => (true, true),
            PauliOp::Z => (false, true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    axes: Vec<PauliOp>,
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    pub fn new(axes: Vec<PauliOp>) -> Result<Self> {
        if axes.is_empty() {
            return Err(QpeError::Validation("Pauli string must act on at least one qubit".into()));
        }
        if axes.len() > MAX_SYSTEM_QUBITS {
            return Err(QpeError::Capacity {
                what: "system qubits",
                requested: axes.len(),
                max: MAX_SYSTEM_QUBITS,
            });
        }
        let n = axes.len();
        let (mut x_mask, mut z_mask) = (0u64, 0u64);
        for (k, op) in axes.iter().enumerate() {
            let bit = 1u64 << (n - 1 - k);
            let (x, z) = op.bits();
            if x {
                x_mask |= bit;
            }
            if z {
                z_mask |= bit;
            }
        }
        Ok(Self { axes, x_mask, z_mask })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::new(vec![PauliOp::I; n_qubits])
    }

    pub fn n_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[PauliOp] {
        &self.axes
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// Symplectic test: two Pauli strings anticommute iff their symplectic
    /// inner product is odd.
    pub fn anticommutes(&self, other: &PauliString) -> bool {
        let s = (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        s % 2 == 1
    }

    /// Spectral norm of `[self, other]`: 2 when anticommuting, 0 otherwise.
    pub fn commutator_norm(&self, other: &PauliString) -> f64 {
        if self.anticommutes(other) {
            2.0
        } else {
            0.0
        }
    }

    /// Image of basis state `b` under the string: `(phase, b')` with
    /// `P|b⟩ = phase |b'⟩`.
    #[inline]
    pub fn apply_to_basis(&self, b: usize) -> (C64, usize) {
        let sign_flips = (b as u64 & self.z_mask).count_ones() % 2;
        let mut phase = match self.y_count() % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        if sign_flips == 1 {
            phase = -phase;
        }
        (phase, b ^ self.x_mask as usize)
    }

    pub fn dense_matrix(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n_qubits();
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let (phase, row) = self.apply_to_basis(b);
            m[(row, b)] = phase;
        }
        m
    }

    /// Left-multiplies `m` by `exp(-i angle P) = cos(angle) I - i sin(angle) P`.
    pub fn apply_exponential_left(&self, angle: f64, m: &mut DMatrix<C64>) {
        let dim = m.nrows();
        let cos = C64::new(angle.cos(), 0.0);
        let minus_i_sin = C64::new(0.0, -angle.sin());
        let original = m.clone();
        for b in 0..dim {
            let (phase, row) = self.apply_to_basis(b);
            let factor = minus_i_sin * phase;
            for col in 0..m.ncols() {
                m[(row, col)] = cos * original[(row, col)] + factor * original[(b, col)];
            }
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.axes {
            write!(f, "{}", op.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = QpeError;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .chars()
            .map(|c| {
                PauliOp::from_char(c)
                    .ok_or_else(|| QpeError::Validation(format!("invalid Pauli axis '{c}' in \"{s}\"")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
