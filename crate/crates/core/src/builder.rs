//! Construction of synchronizing channels.
//!
//! Every construction follows the same pipeline: pick an orthonormal basis of
//! "slots" on ancilla ⊗ system whose vectors have definite exchange symmetry,
//! take `N^n` orthonormal columns of a seed unitary written in that slot basis,
//! embed them into the full `M·N^n` space and cut the result into `M` Kraus blocks.
//! Because every output column lives in a space of synchronized states, so does
//! every output of the channel.
//!
//! Slot order: ancilla index first, then the sorted multi-index in lexicographic
//! order. In mixed mode the symmetric ancilla blocks come first.

use itertools::Itertools;
use num_traits::ToPrimitive;

use crate::channel::KrausChannel;
use crate::dimensions;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, PureState, SystemShape, C64};
use crate::random::{haar_unitary, rng_from_seed};
use crate::sqs::Sign;
use crate::swap::SwapRepresentation;

/// Sorted tuple `i_1 ≤ … ≤ i_n` of local levels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(mut levels: Vec<usize>) -> Self {
        levels.sort_unstable();
        Self(levels)
    }

    pub fn levels(&self) -> &[usize] {
        &self.0
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    /// Number of distinct arrangements, `n! / Π multiplicity!`.
    pub fn orbit_size(&self) -> usize {
        let n = self.0.len();
        let mut size = dimensions::factorial(n as u64);
        for (_, group) in &self.0.iter().chunk_by(|&&x| x) {
            size /= dimensions::factorial(group.count() as u64);
        }
        size.to_usize().expect("orbit size fits in usize")
    }

    /// Distinct arrangements in lexicographic order.
    pub fn arrangements(&self) -> Vec<Vec<usize>> {
        let mut current = self.0.clone();
        let mut out = vec![current.clone()];
        while next_permutation(&mut current) {
            out.push(current.clone());
        }
        out
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(pivot) = (1..v.len()).rev().find(|&k| v[k - 1] < v[k]).map(|k| k - 1) else {
        return false;
    };
    let succ = (pivot + 1..v.len()).rev().find(|&k| v[k] > v[pivot]).expect("pivot has a successor");
    v.swap(pivot, succ);
    v[pivot + 1..].reverse();
    true
}

/// Permutation parity of a sequence of distinct values.
fn parity(seq: &[usize]) -> f64 {
    let inversions = (0..seq.len())
        .flat_map(|a| (a + 1..seq.len()).map(move |b| (a, b)))
        .filter(|&(a, b)| seq[a] > seq[b])
        .count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// All `C(n+N-1, n)` sorted multi-indices, lexicographic.
pub fn sym_basis(shape: &SystemShape) -> Vec<MultiIndex> {
    (0..shape.local_dim())
        .combinations_with_replacement(shape.n())
        .map(MultiIndex)
        .collect()
}

/// All `C(N, n)` strictly increasing multi-indices, lexicographic.
pub fn antisym_basis(shape: &SystemShape) -> Vec<MultiIndex> {
    (0..shape.local_dim()).combinations(shape.n()).map(MultiIndex).collect()
}

/// A basis vector on ancilla ⊗ system, stored sparsely over system indices.
#[derive(Clone, Debug)]
struct Slot {
    ancilla: usize,
    entries: Vec<(usize, C64)>,
}

impl Slot {
    fn to_state(&self, shape: &SystemShape) -> PureState {
        let mut v = ComplexVector::zeros(shape.total_dim());
        for &(k, a) in &self.entries {
            v[self.ancilla * shape.system_dim() + k] = a;
        }
        PureState::new(v).expect("slot vectors are normalized")
    }
}

fn check_multi_index(shape: &SystemShape, idx: &MultiIndex) -> Result<()> {
    if idx.levels().len() != shape.n() {
        return Err(Error::Argument(format!("multi-index needs {} levels, got {}", shape.n(), idx.levels().len())));
    }
    if idx.levels().iter().any(|&l| l >= shape.local_dim()) {
        return Err(Error::Argument(format!("level out of range for N = {}", shape.local_dim())));
    }
    Ok(())
}

fn symmetric_slot(shape: &SystemShape, ancilla: usize, idx: &MultiIndex) -> Slot {
    let amp = C64::new(1.0 / (idx.orbit_size() as f64).sqrt(), 0.0);
    let entries = idx
        .arrangements()
        .iter()
        .map(|digits| (shape.basis_index(0, digits).expect("levels checked"), amp))
        .collect();
    Slot { ancilla, entries }
}

fn antisymmetric_slot(shape: &SystemShape, ancilla: usize, idx: &MultiIndex) -> Slot {
    let norm = 1.0 / (dimensions::factorial(shape.n() as u64).to_f64().expect("finite")).sqrt();
    let entries = idx
        .levels()
        .iter()
        .copied()
        .permutations(shape.n())
        .map(|digits| {
            let sign = parity(&digits);
            (shape.basis_index(0, &digits).expect("levels checked"), C64::new(sign * norm, 0.0))
        })
        .collect();
    Slot { ancilla, entries }
}

/// `|j; i_1 … i_n⟩` mapped to the uniform superposition over its distinct arrangements.
pub fn embed_symmetric(shape: &SystemShape, ancilla: usize, idx: &MultiIndex) -> Result<PureState> {
    check_multi_index(shape, idx)?;
    if ancilla >= shape.ancilla_dim() {
        return Err(Error::Argument(format!("ancilla index {ancilla} out of range")));
    }
    Ok(symmetric_slot(shape, ancilla, idx).to_state(shape))
}

/// Signed superposition `Σ_σ sgn(σ)|j; σ(i)⟩ / √n!` for strictly increasing levels.
pub fn embed_antisymmetric(shape: &SystemShape, ancilla: usize, idx: &MultiIndex) -> Result<PureState> {
    check_multi_index(shape, idx)?;
    if ancilla >= shape.ancilla_dim() {
        return Err(Error::Argument(format!("ancilla index {ancilla} out of range")));
    }
    if !idx.is_strictly_increasing() {
        return Err(Error::Argument(format!(
            "repeated level in {:?}: no antisymmetric state exists",
            idx.levels()
        )));
    }
    Ok(antisymmetric_slot(shape, ancilla, idx).to_state(shape))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryKind {
    Symmetric,
    Antisymmetric,
    /// `sym_count` symmetric Kraus operators followed by `asym_count` antisymmetric ones.
    Mixed { sym_count: usize, asym_count: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryMode {
    pub kind: SymmetryKind,
    /// One exchange representation per Kraus operator (`n = 2` only).
    pub swap_reps: Option<Vec<SwapRepresentation>>,
}

impl SymmetryMode {
    pub fn symmetric() -> Self {
        Self { kind: SymmetryKind::Symmetric, swap_reps: None }
    }

    pub fn antisymmetric() -> Self {
        Self { kind: SymmetryKind::Antisymmetric, swap_reps: None }
    }

    pub fn mixed(sym_count: usize, asym_count: usize) -> Self {
        Self { kind: SymmetryKind::Mixed { sym_count, asym_count }, swap_reps: None }
    }
}

/// Source of the unitary whose leading columns define the channel.
#[derive(Clone, Debug, PartialEq)]
pub enum SeedUnitary {
    Identity,
    /// Haar-random unitary drawn with the given seed.
    Random(u64),
    /// Either a square unitary on the slot space or a `slots × N^n` isometry.
    Matrix(ComplexMatrix),
}

fn capacity_error(shape: &SystemShape, kind: &str, capacity: usize, bound: Option<String>) -> Error {
    let mut msg = format!(
        "{kind} slot space of dimension {capacity} cannot hold N^n = {} orthonormal columns (n = {}, N = {}, M = {})",
        shape.system_dim(),
        shape.n(),
        shape.local_dim(),
        shape.ancilla_dim()
    );
    if let Some(b) = bound {
        msg.push_str("; ");
        msg.push_str(&b);
    }
    Error::Capacity(msg)
}

fn slots_for(shape: &SystemShape, kind: SymmetryKind) -> Result<Vec<Slot>> {
    let (n, big_n) = (shape.n() as u64, shape.local_dim() as u64);
    let sym = sym_basis(shape);
    let asym = antisym_basis(shape);
    let sym_block = |a: usize| sym.iter().map(move |idx| symmetric_slot(shape, a, idx));
    let asym_block = |a: usize| asym.iter().map(move |idx| antisymmetric_slot(shape, a, idx));
    let m = shape.ancilla_dim();
    let slots: Vec<Slot> = match kind {
        SymmetryKind::Symmetric => (0..m).flat_map(sym_block).collect(),
        SymmetryKind::Antisymmetric => (0..m).flat_map(asym_block).collect(),
        SymmetryKind::Mixed { sym_count, asym_count } => {
            if sym_count + asym_count != m {
                return Err(Error::Argument(format!(
                    "mixed mode needs sym_count + asym_count = M, got {sym_count} + {asym_count} != {m}"
                )));
            }
            if asym_count > 0 && asym.is_empty() {
                return Err(Error::Capacity(format!(
                    "no antisymmetric subspace for n = {n} > N = {big_n}"
                )));
            }
            (0..sym_count)
                .flat_map(sym_block)
                .chain((sym_count..m).flat_map(asym_block))
                .collect()
        }
    };
    if slots.len() < shape.system_dim() {
        return Err(match kind {
            SymmetryKind::Symmetric => capacity_error(
                shape,
                "symmetric",
                slots.len(),
                Some(format!(
                    "tight bound requires M >= ceil(N^n / C(n+N-1, n)) = {}",
                    dimensions::min_ancilla_symmetric(n, big_n)?
                )),
            ),
            SymmetryKind::Antisymmetric => capacity_error(
                shape,
                "antisymmetric",
                slots.len(),
                Some(match dimensions::min_ancilla_antisymmetric(n, big_n)? {
                    Some(b) => format!("requires M >= ceil(N^n / C(N, n)) = {b}"),
                    None => format!("no antisymmetric subspace exists for n = {n} > N = {big_n}"),
                }),
            ),
            SymmetryKind::Mixed { .. } => capacity_error(shape, "mixed", slots.len(), None),
        });
    }
    Ok(slots)
}

fn seed_columns(seed: &SeedUnitary, slot_count: usize, columns: usize) -> Result<ComplexMatrix> {
    match seed {
        SeedUnitary::Identity => Ok(ComplexMatrix::identity(slot_count, columns)),
        SeedUnitary::Random(s) => Ok(haar_unitary(slot_count, &mut rng_from_seed(*s)).columns(0, columns).into_owned()),
        SeedUnitary::Matrix(m) => {
            if m.nrows() != slot_count || m.ncols() < columns {
                return Err(Error::Dimension(format!(
                    "seed matrix must have {slot_count} rows and at least {columns} columns, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let cols = m.columns(0, columns).into_owned();
            let deviation = crate::linalg::isometry_deviation(&cols);
            if deviation > crate::channel::COMPLETENESS_TOL {
                return Err(Error::NotOrthonormal { deviation });
            }
            Ok(cols)
        }
    }
}

fn assemble(shape: SystemShape, slots: &[Slot], seed: &SeedUnitary) -> Result<KrausChannel> {
    let d = shape.system_dim();
    let cols = seed_columns(seed, slots.len(), d)?;
    let mut stacked = ComplexMatrix::zeros(shape.total_dim(), d);
    for (s, slot) in slots.iter().enumerate() {
        let base = slot.ancilla * d;
        for c in 0..d {
            let w = cols[(s, c)];
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            for &(k, amp) in &slot.entries {
                stacked[(base + k, c)] += w * amp;
            }
        }
    }
    KrausChannel::from_unitary_columns(&stacked, shape)
}

/// Number of slot-space dimensions (= rows of a compatible seed unitary) for a mode.
pub fn slot_dimension(shape: &SystemShape, mode: &SymmetryMode) -> Result<usize> {
    Ok(match &mode.swap_reps {
        Some(reps) => mixed_rep_slots(shape, reps, &default_signs(mode)?)?.len(),
        None => slots_for(shape, mode.kind)?.len(),
    })
}

fn default_signs(mode: &SymmetryMode) -> Result<Vec<Sign>> {
    let len = mode.swap_reps.as_ref().map_or(0, Vec::len);
    match mode.kind {
        SymmetryKind::Symmetric => Ok(vec![Sign::Plus; len]),
        SymmetryKind::Antisymmetric => Ok(vec![Sign::Minus; len]),
        SymmetryKind::Mixed { .. } => Err(Error::Argument(
            "generalized swap representations cannot be combined with Mixed mode; use build_mixed_representation".into(),
        )),
    }
}

/// Builds a synchronizing channel for `shape` in the given symmetry mode.
pub fn build(shape: SystemShape, mode: &SymmetryMode, seed: &SeedUnitary) -> Result<KrausChannel> {
    if let Some(reps) = &mode.swap_reps {
        let signs = default_signs(mode)?;
        return build_mixed_representation(shape, reps, &signs, seed);
    }
    let slots = slots_for(&shape, mode.kind)?;
    assemble(shape, &slots, seed)
}

fn mixed_rep_slots(shape: &SystemShape, reps: &[SwapRepresentation], signs: &[Sign]) -> Result<Vec<Slot>> {
    if shape.n() != 2 {
        return Err(Error::Unsupported(format!(
            "generalized swap representations are only defined for n = 2, got n = {}",
            shape.n()
        )));
    }
    let m = shape.ancilla_dim();
    if reps.len() != m || signs.len() != m {
        return Err(Error::Argument(format!(
            "need one representation and one sign per Kraus operator (M = {m}), got {} and {}",
            reps.len(),
            signs.len()
        )));
    }
    if let Some(bad) = reps.iter().find(|r| r.local_dim() != shape.local_dim()) {
        return Err(Error::Dimension(format!(
            "representation acts on N = {}, expected {}",
            bad.local_dim(),
            shape.local_dim()
        )));
    }
    let slots: Vec<Slot> = reps
        .iter()
        .zip(signs)
        .enumerate()
        .flat_map(|(a, (rep, &sign))| rep.eigenbasis(sign).into_iter().map(move |entries| Slot { ancilla: a, entries }))
        .collect();
    if slots.len() < shape.system_dim() {
        return Err(capacity_error(shape, "eigenspace", slots.len(), None));
    }
    Ok(slots)
}

/// Two-party channel whose Kraus operator `a` has all columns in the
/// `signs[a]·e^{iΔ_a}` eigenspace of `reps[a]`.
pub fn build_mixed_representation(
    shape: SystemShape,
    reps: &[SwapRepresentation],
    signs: &[Sign],
    seed: &SeedUnitary,
) -> Result<KrausChannel> {
    let slots = mixed_rep_slots(&shape, reps, signs)?;
    assemble(shape, &slots, seed)
}
