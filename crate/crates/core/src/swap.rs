//! Generalized two-party exchange operators with phases.
//!
//! A representation is fixed by a global phase `Δ` and a real antisymmetric
//! `N × N` phase matrix `φ` (`φ_ij = −φ_ji`, zero diagonal):
//!
//! ```text
//! P|ii⟩ = e^{iΔ} |ii⟩,        P|ji⟩ = e^{i(Δ + φ_ij)} |ij⟩
//! ```
//!
//! so that `P² = e^{2iΔ} I` and the spectrum is `±e^{iΔ}`. With `φ_01 = π/2` and
//! `Δ = 0` this is the qubit operator with `⟨01|P|10⟩ = i`, `⟨10|P|01⟩ = −i`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, C64, EXACT_TOL};
use crate::sqs::Sign;

#[derive(Clone, Debug, PartialEq)]
pub struct SwapRepresentation {
    delta: f64,
    phases: DMatrix<f64>,
}

impl SwapRepresentation {
    pub fn new(delta: f64, phases: DMatrix<f64>) -> Result<Self> {
        if !phases.is_square() || phases.nrows() < 2 {
            return Err(Error::Argument("phase matrix must be square with N >= 2".into()));
        }
        if !delta.is_finite() || phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Argument("phases must be finite".into()));
        }
        let asym = (&phases + phases.transpose()).amax();
        if asym > EXACT_TOL {
            return Err(Error::Argument(format!(
                "phase matrix must be antisymmetric (max |φ + φ^T| = {asym:.3e})"
            )));
        }
        Ok(Self { delta, phases })
    }

    /// Ordinary swap on two `N`-level systems.
    pub fn standard(local_dim: usize) -> Self {
        Self { delta: 0.0, phases: DMatrix::zeros(local_dim, local_dim) }
    }

    /// Qubit representation with a single relative phase `φ_01`.
    pub fn qubit(delta: f64, phi01: f64) -> Self {
        let phases = DMatrix::from_row_slice(2, 2, &[0.0, phi01, -phi01, 0.0]);
        Self { delta, phases }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn phases(&self) -> &DMatrix<f64> {
        &self.phases
    }

    pub fn local_dim(&self) -> usize {
        self.phases.nrows()
    }

    /// `N² × N²` matrix in the `|i j⟩` basis (first index most significant).
    pub fn operator(&self) -> ComplexMatrix {
        let n = self.local_dim();
        let mut p = ComplexMatrix::zeros(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                // column |ji⟩ maps to row |ij⟩
                p[(i * n + j, j * n + i)] = C64::from_polar(1.0, self.delta + self.phases[(i, j)]);
            }
        }
        p
    }

    /// Eigenvalue `sign · e^{iΔ}`.
    pub fn eigenvalue(&self, sign: Sign) -> C64 {
        C64::from_polar(sign.value(), self.delta)
    }

    /// Orthonormal eigenbasis for eigenvalue `sign · e^{iΔ}`, ordered by sorted index
    /// pair `(i, j)` lexicographically. Entries are `(flat index, amplitude)`.
    ///
    /// For the standard representation this is the symmetric (or antisymmetric)
    /// two-party basis: `|ii⟩` and `(|ij⟩ ± |ji⟩)/√2`.
    pub fn eigenbasis(&self, sign: Sign) -> Vec<Vec<(usize, C64)>> {
        let n = self.local_dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                if i == j {
                    if sign == Sign::Plus {
                        out.push(vec![(i * n + i, C64::new(1.0, 0.0))]);
                    }
                } else {
                    let rel = C64::from_polar(sign.value() * FRAC_1_SQRT_2, -self.phases[(i, j)]);
                    out.push(vec![(i * n + j, C64::new(FRAC_1_SQRT_2, 0.0)), (j * n + i, rel)]);
                }
            }
        }
        out
    }

    pub fn eigenvector(&self, entries: &[(usize, C64)]) -> ComplexVector {
        let n = self.local_dim();
        let mut v = ComplexVector::zeros(n * n);
        for &(k, a) in entries {
            v[k] = a;
        }
        v
    }
}
