//! Dense complex linear algebra for multipartite systems.
//!
//! Basis convention used throughout the crate: for a joint ancilla ⊗ system
//! space the ancilla index is the most significant digit, followed by the
//! subsystems in order (big-endian). The flat index of `|k; i_1 … i_n⟩` is
//! `k·N^n + Σ_m i_m·N^(n-1-m)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Tolerance for identities that hold in exact arithmetic.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for eigenvalue positivity and other eigensolver-derived checks.
pub const EIGEN_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Number of subsystems `n`, local dimension `N` and ancilla dimension `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemShape {
    n: usize,
    local_dim: usize,
    ancilla_dim: usize,
    system_dim: usize,
}

impl SystemShape {
    pub fn new(n: usize, local_dim: usize, ancilla_dim: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("need at least 2 subsystems, got n = {n}")));
        }
        if local_dim < 2 {
            return Err(Error::Argument(format!("local dimension must be >= 2, got N = {local_dim}")));
        }
        if ancilla_dim < 1 {
            return Err(Error::Argument("ancilla dimension must be >= 1".into()));
        }
        let system_dim = u32::try_from(n)
            .ok()
            .and_then(|e| local_dim.checked_pow(e))
            .ok_or_else(|| Error::Dimension(format!("N^n = {local_dim}^{n} overflows the index range")))?;
        system_dim
            .checked_mul(ancilla_dim)
            .ok_or_else(|| Error::Dimension(format!("M·N^n = {ancilla_dim}·{system_dim} overflows the index range")))?;
        Ok(Self { n, local_dim, ancilla_dim, system_dim })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    /// `N^n`.
    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    /// `M·N^n`.
    pub fn total_dim(&self) -> usize {
        self.system_dim * self.ancilla_dim
    }

    /// Same system, different ancilla.
    pub fn with_ancilla(&self, ancilla_dim: usize) -> Result<Self> {
        Self::new(self.n, self.local_dim, ancilla_dim)
    }

    pub fn subsystem_dims(&self) -> Vec<usize> {
        vec![self.local_dim; self.n]
    }

    /// Flat index of `|ancilla; digits⟩`.
    pub fn basis_index(&self, ancilla: usize, digits: &[usize]) -> Result<usize> {
        if ancilla >= self.ancilla_dim {
            return Err(Error::Argument(format!(
                "ancilla index {ancilla} out of range (M = {})",
                self.ancilla_dim
            )));
        }
        if digits.len() != self.n {
            return Err(Error::Argument(format!("expected {} digits, got {}", self.n, digits.len())));
        }
        let mut flat = 0;
        for &d in digits {
            if d >= self.local_dim {
                return Err(Error::Argument(format!(
                    "digit {d} out of range (N = {})",
                    self.local_dim
                )));
            }
            flat = flat * self.local_dim + d;
        }
        Ok(ancilla * self.system_dim + flat)
    }

    /// Subsystem digits of a flat system index (ancilla part is discarded).
    pub fn digits(&self, flat: usize) -> Vec<usize> {
        let mut rest = flat % self.system_dim;
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = rest % self.local_dim;
            rest /= self.local_dim;
        }
        out
    }

    /// Flat index after exchanging subsystems `i` and `j`; the ancilla digit is untouched.
    pub fn swap_index(&self, flat: usize, i: usize, j: usize) -> usize {
        let ancilla = flat / self.system_dim;
        let sys = flat % self.system_dim;
        let si = self.local_dim.pow((self.n - 1 - i) as u32);
        let sj = self.local_dim.pow((self.n - 1 - j) as u32);
        let di = (sys / si) % self.local_dim;
        let dj = (sys / sj) % self.local_dim;
        let swapped = sys - di * si - dj * sj + dj * si + di * sj;
        ancilla * self.system_dim + swapped
    }

    pub(crate) fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::Argument(format!("pair indices must differ, got ({i}, {j})")));
        }
        if i >= self.n || j >= self.n {
            return Err(Error::Argument(format!("pair ({i}, {j}) out of range for n = {}", self.n)));
        }
        Ok(())
    }

    /// All unordered pairs `(i, j)` with `i < j`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|i| (i + 1..self.n).map(move |j| (i, j))).collect()
    }
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invariant("state has non-finite amplitudes".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(Error::Invariant(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Invariant("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self { amplitudes: amplitudes / C64::from(norm) })
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(ComplexVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Argument(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut v = ComplexVector::zeros(dim);
        v[index] = ONE;
        Ok(Self { amplitudes: v })
    }

    /// Tensor product of the given factors, in order.
    pub fn product(factors: &[PureState]) -> Result<Self> {
        let mut iter = factors.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Argument("empty product".into()))?
            .amplitudes
            .clone();
        let amplitudes = iter.try_fold(first, |acc, f| {
            acc.len()
                .checked_mul(f.dim())
                .ok_or_else(|| Error::Dimension("product dimension overflows".into()))?;
            Ok::<_, Error>(acc.kronecker(&f.amplitudes))
        })?;
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { matrix: &self.amplitudes * self.amplitudes.adjoint() }
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "density matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invariant("density matrix has non-finite entries".into()));
        }
        let herm = max_abs_diff(&matrix, &matrix.adjoint());
        if herm > EXACT_TOL {
            return Err(Error::Invariant(format!("not hermitian (max |rho - rho^dag| = {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > EXACT_TOL {
            return Err(Error::Invariant(format!("trace {tr} differs from 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix).into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -EIGEN_TOL {
            return Err(Error::Invariant(format!("not positive semidefinite (min eigenvalue {min_eig:.3e})")));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix known to be physical by construction.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim, dim) / C64::from(dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn kron(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(Self { matrix: kron(&self.matrix, &other.matrix)? })
    }

    /// `p·self + (1-p)·other`.
    pub fn mix(&self, p: f64, other: &DensityMatrix) -> Result<DensityMatrix> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("mixing weight {p} outside [0, 1]")));
        }
        if self.dim() != other.dim() {
            return Err(Error::Dimension("cannot mix states of different dimension".into()));
        }
        Ok(Self { matrix: &self.matrix * C64::from(p) + &other.matrix * C64::from(1.0 - p) })
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.nrows().checked_mul(b.nrows());
    let cols = a.ncols().checked_mul(b.ncols());
    match (rows, cols) {
        (Some(r), Some(c)) if r.checked_mul(c).is_some() => Ok(a.kronecker(b)),
        _ => Err(Error::Dimension(format!(
            "kron of {}x{} and {}x{} overflows",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        ))),
    }
}

/// Offsets of the kept and traced factors for big-endian multi-indexing.
struct TraceLayout {
    kept: Vec<usize>,
    traced: Vec<usize>,
}

impl TraceLayout {
    fn new(dims: &[usize], keep: &[usize], total: usize) -> Result<Self> {
        let product = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        if product != Some(total) {
            return Err(Error::Dimension(format!(
                "factor dimensions {dims:?} do not multiply to {total}"
            )));
        }
        if keep.is_empty() {
            return Err(Error::Argument("keep set must be nonempty".into()));
        }
        let mut seen = vec![false; dims.len()];
        for &k in keep {
            if k >= dims.len() {
                return Err(Error::Argument(format!("factor {k} out of range ({} factors)", dims.len())));
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::Argument(format!("factor {k} listed twice in keep set")));
            }
        }
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let offsets = |factors: &[usize]| {
            factors.iter().fold(vec![0usize], |acc, &f| {
                acc.iter()
                    .flat_map(|&base| {
                        let (dim, stride) = (dims[f], strides[f]);
                        (0..dim).map(move |d| base + d * stride)
                    })
                    .collect()
            })
        };
        let traced: Vec<usize> = (0..dims.len()).filter(|k| !seen[*k]).collect();
        Ok(Self { kept: offsets(keep), traced: offsets(&traced) })
    }
}

/// Partial trace of an arbitrary square operator; the result is ordered as `keep`.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Dimension("partial trace needs a square operator".into()));
    }
    let layout = TraceLayout::new(dims, keep, m.nrows())?;
    let d = layout.kept.len();
    Ok(ComplexMatrix::from_fn(d, d, |r, c| {
        let (br, bc) = (layout.kept[r], layout.kept[c]);
        layout.traced.iter().map(|&t| m[(br + t, bc + t)]).sum()
    }))
}

pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix { matrix: partial_trace_matrix(&rho.matrix, dims, keep)? })
}

/// `Tr_{traced}(|a⟩⟨b|)` without forming the outer product.
pub fn partial_trace_outer(
    a: &ComplexVector,
    b: &ComplexVector,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("vector lengths differ: {} vs {}", a.len(), b.len())));
    }
    let layout = TraceLayout::new(dims, keep, a.len())?;
    let d = layout.kept.len();
    Ok(ComplexMatrix::from_fn(d, d, |r, c| {
        let (br, bc) = (layout.kept[r], layout.kept[c]);
        layout.traced.iter().map(|&t| a[br + t] * b[bc + t].conj()).sum()
    }))
}

/// Reduced state of subsystem `k` (0-based) of a system-space density matrix.
pub fn single_party_reduction(rho: &DensityMatrix, shape: &SystemShape, k: usize) -> Result<DensityMatrix> {
    partial_trace(rho, &shape.subsystem_dims(), &[k])
}

/// Matrix of the exchange `P_ij` on the `N^n` system space (0-based `i`, `j`).
pub fn permutation_operator(shape: &SystemShape, i: usize, j: usize) -> Result<ComplexMatrix> {
    shape.check_pair(i, j)?;
    let d = shape.system_dim();
    let mut p = ComplexMatrix::zeros(d, d);
    for col in 0..d {
        p[(shape.swap_index(col, i, j), col)] = ONE;
    }
    Ok(p)
}

/// `P_ij` applied to a vector on the system space or on ancilla ⊗ system.
pub fn apply_permutation(shape: &SystemShape, v: &ComplexVector, i: usize, j: usize) -> Result<ComplexVector> {
    shape.check_pair(i, j)?;
    if !v.len().is_multiple_of(shape.system_dim()) {
        return Err(Error::Dimension(format!(
            "vector length {} is not a multiple of N^n = {}",
            v.len(),
            shape.system_dim()
        )));
    }
    let mut out = ComplexVector::zeros(v.len());
    for (idx, &amp) in v.iter().enumerate() {
        out[shape.swap_index(idx, i, j)] = amp;
    }
    Ok(out)
}

/// Eigenvalues of a hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Largest eigenvalue magnitude of a hermitian matrix.
pub fn spectral_norm_hermitian(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Sum of absolute eigenvalues of a hermitian matrix.
pub fn trace_norm_hermitian(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m).into_iter().map(f64::abs).sum()
}

/// `½‖a − b‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension("trace distance between different dimensions".into()));
    }
    Ok(0.5 * trace_norm_hermitian(&(a.matrix() - b.matrix())))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Max elementwise deviation of `A^† A` from the identity.
pub fn isometry_deviation(a: &ComplexMatrix) -> f64 {
    let gram = a.adjoint() * a;
    max_abs_diff(&gram, &ComplexMatrix::identity(a.ncols(), a.ncols()))
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}
