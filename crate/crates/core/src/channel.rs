//! Kraus-form channels on the `N^n` system space with an `M`-dimensional ancilla.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    isometry_deviation, max_abs_diff, partial_trace_matrix, ComplexMatrix, ComplexVector,
    DensityMatrix, PureState, SystemShape, C64, EIGEN_TOL,
};
use crate::random::{derive_seed, haar_product_state, random_density, rng_from_seed};
use crate::sqs::is_sqs_mixed;

/// Completeness tolerance on `Σ K_a^† K_a = I` (max elementwise deviation).
pub const COMPLETENESS_TOL: f64 = EIGEN_TOL;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    shape: SystemShape,
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(shape: SystemShape, operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.len() != shape.ancilla_dim() {
            return Err(Error::Dimension(format!(
                "expected M = {} Kraus operators, got {}",
                shape.ancilla_dim(),
                operators.len()
            )));
        }
        let d = shape.system_dim();
        for (a, k) in operators.iter().enumerate() {
            if k.shape() != (d, d) {
                return Err(Error::Dimension(format!(
                    "Kraus operator {a} is {}x{}, expected {d}x{d}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Invariant(format!("Kraus operator {a} has non-finite entries")));
            }
        }
        let channel = Self { shape, operators };
        let deviation = channel.completeness_deviation();
        if deviation > COMPLETENESS_TOL {
            return Err(Error::Incomplete { deviation });
        }
        Ok(channel)
    }

    /// Single Kraus operator `I`.
    pub fn identity(n: usize, local_dim: usize) -> Result<Self> {
        let shape = SystemShape::new(n, local_dim, 1)?;
        let d = shape.system_dim();
        Self::new(shape, vec![ComplexMatrix::identity(d, d)])
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// Max elementwise `|Σ K^† K − I|`.
    pub fn completeness_deviation(&self) -> f64 {
        let d = self.shape.system_dim();
        let sum = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&sum, &ComplexMatrix::identity(d, d))
    }

    /// `Σ_a K_a ρ K_a^†`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.shape.system_dim() {
            return Err(Error::Dimension(format!(
                "state dimension {} does not match channel dimension {}",
                rho.dim(),
                self.shape.system_dim()
            )));
        }
        let d = self.shape.system_dim();
        let out = self
            .operators
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k * rho.matrix() * k.adjoint());
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    /// Output for a pure input, `Σ_a (K_a ψ)(K_a ψ)^†`.
    pub fn apply_pure(&self, psi: &PureState) -> Result<DensityMatrix> {
        if psi.dim() != self.shape.system_dim() {
            return Err(Error::Dimension(format!(
                "state dimension {} does not match channel dimension {}",
                psi.dim(),
                self.shape.system_dim()
            )));
        }
        let d = self.shape.system_dim();
        let out = self.operators.iter().fold(ComplexMatrix::zeros(d, d), |acc, k| {
            let v = k * psi.amplitudes();
            acc + &v * v.adjoint()
        });
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    /// `other ∘ self`: Kraus operators `L_b K_a`, ancilla dimension `M_self · M_other`.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if self.shape.n() != other.shape.n() || self.shape.local_dim() != other.shape.local_dim() {
            return Err(Error::Dimension("channels act on different systems".into()));
        }
        let shape = self
            .shape
            .with_ancilla(self.shape.ancilla_dim() * other.shape.ancilla_dim())?;
        let operators = other
            .operators
            .iter()
            .flat_map(|l| self.operators.iter().map(move |k| l * k))
            .collect();
        KrausChannel::new(shape, operators)
    }

    /// Stacked Kraus operators as the `M·N^n × N^n` isometry `(K_a)_ij = V_{a·N^n + i, j}`.
    pub fn stacked_isometry(&self) -> ComplexMatrix {
        let d = self.shape.system_dim();
        let mut v = ComplexMatrix::zeros(self.shape.total_dim(), d);
        for (a, k) in self.operators.iter().enumerate() {
            v.view_mut((a * d, 0), (d, d)).copy_from(k);
        }
        v
    }

    /// Splits an isometry with orthonormal columns into `M` stacked Kraus blocks.
    pub fn from_unitary_columns(columns: &ComplexMatrix, shape: SystemShape) -> Result<Self> {
        let d = shape.system_dim();
        if columns.shape() != (shape.total_dim(), d) {
            return Err(Error::Dimension(format!(
                "expected a {}x{d} column block, got {}x{}",
                shape.total_dim(),
                columns.nrows(),
                columns.ncols()
            )));
        }
        let deviation = isometry_deviation(columns);
        if deviation > COMPLETENESS_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        let operators = (0..shape.ancilla_dim())
            .map(|a| columns.view((a * d, 0), (d, d)).into_owned())
            .collect();
        Self::new(shape, operators)
    }

    /// Unitary `U` on ancilla ⊗ system whose first `N^n` columns are the stacked Kraus
    /// operators, so that `Tr_E[U(|0⟩⟨0| ⊗ ρ)U^†] = Φ(ρ)`.
    ///
    /// The remaining columns come from modified Gram-Schmidt over the standard basis,
    /// each candidate orthogonalized twice.
    pub fn complete_dilation(&self) -> ComplexMatrix {
        let total = self.shape.total_dim();
        let d = self.shape.system_dim();
        let mut u = ComplexMatrix::zeros(total, total);
        u.view_mut((0, 0), (total, d)).copy_from(&self.stacked_isometry());
        let mut filled = d;
        // skipped candidates hide at most total·threshold² = 1/8 of the missing
        // dimension, so a candidate above threshold always remains
        let threshold = (0.5 / total as f64).sqrt() * 0.5;
        for e in 0..total {
            if filled == total {
                break;
            }
            let mut v = ComplexVector::zeros(total);
            v[e] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for k in 0..filled {
                    let col = u.column(k);
                    let overlap = col.dotc(&v);
                    v.axpy(-overlap, &col, C64::new(1.0, 0.0));
                }
            }
            let norm = v.norm();
            if norm > threshold {
                u.column_mut(filled).copy_from(&(v / C64::new(norm, 0.0)));
                filled += 1;
            }
        }
        debug_assert_eq!(filled, total, "Gram-Schmidt completion ran out of candidates");
        u
    }

    /// Output of the Stinespring form `Tr_E[U(|0⟩⟨0| ⊗ ρ)U^†]` for a given dilation `U`.
    pub fn apply_via_dilation(&self, dilation: &ComplexMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let total = self.shape.total_dim();
        if dilation.shape() != (total, total) {
            return Err(Error::Dimension(format!("dilation must be {total}x{total}")));
        }
        let d = self.shape.system_dim();
        let mut embedded = ComplexMatrix::zeros(total, total);
        embedded.view_mut((0, 0), (d, d)).copy_from(rho.matrix());
        let joint = dilation * embedded * dilation.adjoint();
        let out = partial_trace_matrix(&joint, &[self.shape.ancilla_dim(), d], &[1])?;
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }
}

/// Result of sampling-based synchronizer certification.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QssrVerdict {
    pub is_qssr: bool,
    /// Worst output trace-distance residual over pure inputs (basis sweep plus random products).
    pub worst_residual: f64,
    /// Worst residual over the random mixed inputs of the cross-check batch.
    pub mixed_worst_residual: f64,
    pub samples_tested: usize,
    pub mixed_samples_tested: usize,
    #[serde(skip)]
    pub witness: Option<PureState>,
}

impl QssrVerdict {
    pub fn witness_amplitudes(&self) -> Option<Vec<[f64; 2]>> {
        self.witness
            .as_ref()
            .map(|w| w.amplitudes().iter().map(|z| [z.re, z.im]).collect())
    }
}

/// Checks that outputs are synchronized for all computational basis inputs, `samples`
/// Haar-random pure product inputs (seed of sample `k` is `seed + k`), and a smaller
/// batch of random mixed inputs.
pub fn certify_qssr(channel: &KrausChannel, samples: usize, tol: f64, seed: u64) -> Result<QssrVerdict> {
    if samples == 0 {
        return Err(Error::Argument("certification needs at least one sample".into()));
    }
    let shape = *channel.shape();
    let d = shape.system_dim();

    let residual_of = |psi: &PureState| -> Result<f64> {
        Ok(is_sqs_mixed(&channel.apply_pure(psi)?, &shape, tol)?.max_pair_residual)
    };

    let mut inputs: Vec<PureState> = (0..d).map(|k| PureState::basis(d, k)).collect::<Result<_>>()?;
    inputs.extend((0..samples as u64).map(|k| haar_product_state(&shape, seed.wrapping_add(k))));

    let residuals = inputs.par_iter().map(residual_of).collect::<Result<Vec<f64>>>()?;
    // first index attaining the maximum, so the witness is deterministic
    let (worst_idx, worst_residual) = residuals
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, r)| if r > best.1 { (k, r) } else { best });

    let mixed_samples = (samples / 10).max(10);
    let mixed_worst_residual = (0..mixed_samples as u64)
        .into_par_iter()
        .map(|k| {
            let rho = random_density(d, &mut rng_from_seed(derive_seed(seed, k)));
            Ok(is_sqs_mixed(&channel.apply(&rho)?, &shape, tol)?.max_pair_residual)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let is_qssr = worst_residual <= tol && mixed_worst_residual <= tol;
    Ok(QssrVerdict {
        is_qssr,
        worst_residual,
        mixed_worst_residual,
        samples_tested: inputs.len(),
        mixed_samples_tested: mixed_samples,
        witness: (!is_qssr).then(|| inputs.swap_remove(worst_idx)),
    })
}
