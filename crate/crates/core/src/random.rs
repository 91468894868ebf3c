//! Seeded sampling of Haar-random unitaries and states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, ComplexVector, DensityMatrix, PureState, SystemShape, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer; derives well-separated child seeds from `(base, index)`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    // column-major fill keeps the draw order independent of nalgebra internals
    let mut m = ComplexMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-distributed `dim × dim` unitary: QR of a complex Gaussian matrix with
/// the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// Haar-random pure state of dimension `dim`.
pub fn haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v = ComplexVector::from_fn(dim, |_, _| complex_gaussian(rng));
        if let Ok(state) = PureState::normalized(v) {
            return state;
        }
    }
}

/// Product of `n` independent Haar-random local pure states, deterministic in `seed`.
pub fn haar_product_state(shape: &SystemShape, seed: u64) -> PureState {
    let mut rng = rng_from_seed(seed);
    let factors: Vec<PureState> = (0..shape.n()).map(|_| haar_state(shape.local_dim(), &mut rng)).collect();
    PureState::product(&factors).expect("shape dimensions were validated")
}

/// Full-rank random density matrix `G G^† / Tr(G G^†)` (Hilbert-Schmidt measure).
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(dim, dim, rng);
    let gg = &g * g.adjoint();
    let tr = gg.trace();
    let mut m = gg / tr;
    // enforce exact hermiticity lost to rounding
    m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::from_matrix_unchecked(m)
}
