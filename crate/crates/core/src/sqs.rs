//! Certification of synchronized quantum states (all single-party reductions equal).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    apply_permutation, partial_trace_outer, permutation_operator, single_party_reduction,
    spectral_norm_hermitian, trace_distance, ComplexMatrix, ComplexVector, DensityMatrix,
    PureState, SystemShape, C64,
};

pub const DEFAULT_SQS_TOL: f64 = 1e-10;

/// Eigenvalue sign of an exchange operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "+1" | "1" | "plus" | "sym" => Ok(Sign::Plus),
            "-" | "-1" | "minus" | "anti" | "antisym" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("unrecognized sign {other:?}"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// `|ψ⟩ = |s_ij⟩ + |a_ij⟩` with `P_ij|s⟩ = |s⟩` and `P_ij|a⟩ = -|a⟩`.
#[derive(Clone, Debug)]
pub struct PairDecomposition {
    pub pair: (usize, usize),
    pub sym_part: ComplexVector,
    pub anti_part: ComplexVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub i: usize,
    pub j: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqsVerdict {
    pub is_sqs: bool,
    pub max_pair_residual: f64,
    pub per_pair: Vec<PairResidual>,
}

impl SqsVerdict {
    fn from_residuals(per_pair: Vec<PairResidual>, tol: f64) -> Self {
        let max_pair_residual = per_pair.iter().map(|p| p.residual).fold(0.0, f64::max);
        Self { is_sqs: max_pair_residual <= tol, max_pair_residual, per_pair }
    }
}

/// Factor dimensions of `psi`'s space: system only, or ancilla followed by the system.
fn factor_layout(shape: &SystemShape, len: usize) -> Result<(Vec<usize>, usize)> {
    let mut dims = shape.subsystem_dims();
    if len == shape.system_dim() {
        Ok((dims, 0))
    } else if len.is_multiple_of(shape.system_dim()) {
        dims.insert(0, len / shape.system_dim());
        Ok((dims, 1))
    } else {
        Err(Error::Dimension(format!(
            "state dimension {len} is neither N^n = {} nor a multiple of it",
            shape.system_dim()
        )))
    }
}

pub fn decompose_pair(psi: &PureState, shape: &SystemShape, i: usize, j: usize) -> Result<PairDecomposition> {
    factor_layout(shape, psi.dim())?;
    let v = psi.amplitudes();
    let swapped = apply_permutation(shape, v, i, j)?;
    let half = C64::new(0.5, 0.0);
    Ok(PairDecomposition {
        pair: (i, j),
        sym_part: (v + &swapped) * half,
        anti_part: (v - &swapped) * half,
    })
}

/// Hermitian cross term `Tr_{bar i}(|a_ij⟩⟨s_ij| + |s_ij⟩⟨a_ij|)` on subsystem `i`.
///
/// Ancilla factors, when present, are traced out together with the other subsystems.
pub fn cross_term(psi: &PureState, shape: &SystemShape, i: usize, j: usize) -> Result<ComplexMatrix> {
    let dec = decompose_pair(psi, shape, i, j)?;
    let (dims, offset) = factor_layout(shape, psi.dim())?;
    let x = partial_trace_outer(&dec.anti_part, &dec.sym_part, &dims, &[i + offset])?;
    Ok(&x + x.adjoint())
}

/// Spectral norm of the cross term; zero iff the pair condition holds.
pub fn prop1_residual(psi: &PureState, shape: &SystemShape, i: usize, j: usize) -> Result<f64> {
    Ok(spectral_norm_hermitian(&cross_term(psi, shape, i, j)?))
}

/// Pairwise cross-term test over all `n(n-1)/2` pairs.
pub fn is_sqs_pure(psi: &PureState, shape: &SystemShape, tol: f64) -> Result<SqsVerdict> {
    let per_pair = shape
        .pairs()
        .into_iter()
        .map(|(i, j)| Ok(PairResidual { i, j, residual: prop1_residual(psi, shape, i, j)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SqsVerdict::from_residuals(per_pair, tol))
}

/// Direct comparison of single-party reductions; residual per pair is their trace distance.
pub fn is_sqs_mixed(rho: &DensityMatrix, shape: &SystemShape, tol: f64) -> Result<SqsVerdict> {
    if rho.dim() != shape.system_dim() {
        return Err(Error::Dimension(format!(
            "state dimension {} does not match N^n = {}",
            rho.dim(),
            shape.system_dim()
        )));
    }
    let reductions = (0..shape.n())
        .map(|k| single_party_reduction(rho, shape, k))
        .collect::<Result<Vec<_>>>()?;
    let per_pair = shape
        .pairs()
        .into_iter()
        .map(|(i, j)| Ok(PairResidual { i, j, residual: trace_distance(&reductions[i], &reductions[j])? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SqsVerdict::from_residuals(per_pair, tol))
}

/// Dimension of `{ψ : P_ij ψ = s_ij ψ for every assigned pair}` on the system space.
pub fn mixed_symmetry_nullspace_dim(shape: &SystemShape, signs: &[((usize, usize), Sign)]) -> Result<usize> {
    if signs.is_empty() {
        return Err(Error::Argument("at least one pair sign is required".into()));
    }
    let d = shape.system_dim();
    let mut stacked = ComplexMatrix::zeros(d * signs.len(), d);
    for (block, &((i, j), sign)) in signs.iter().enumerate() {
        let p = permutation_operator(shape, i, j)?;
        let constraint = p - ComplexMatrix::identity(d, d) * C64::new(sign.value(), 0.0);
        stacked.view_mut((block * d, 0), (d, d)).copy_from(&constraint);
    }
    let singular = stacked.singular_values();
    let scale = singular.iter().copied().fold(1.0, f64::max);
    let rank = singular.iter().filter(|&&s| s > 1e-9 * scale).count();
    Ok(d - rank)
}
