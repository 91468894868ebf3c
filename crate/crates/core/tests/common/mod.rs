#![allow(dead_code)]

use std::f64::consts::FRAC_1_SQRT_2;

use qssr::linalg::{ComplexMatrix, ComplexVector, C64};
use qssr::{KrausChannel, SystemShape};

pub const Z: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn ci(im: f64) -> C64 {
    C64::new(0.0, im)
}

pub fn mat(rows: &[&[C64]]) -> ComplexMatrix {
    let r = rows.len();
    let cols = rows[0].len();
    ComplexMatrix::from_row_iterator(r, cols, rows.iter().flat_map(|row| row.iter().copied()))
}

pub fn real(rows: &[&[f64]]) -> ComplexMatrix {
    let r = rows.len();
    let cols = rows[0].len();
    ComplexMatrix::from_row_iterator(r, cols, rows.iter().flat_map(|row| row.iter().map(|&x| c(x))))
}

/// The 6x6 seed unitary on the slot basis |j; i1 <= i2>.
pub fn reference_seed() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    real(&[
        &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        &[0.0, s, s, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        &[0.0, s, -s, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
    ])
}

pub fn reference_kraus() -> [ComplexMatrix; 2] {
    [
        real(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.5, 0.5, 0.0], &[0.0, 0.5, 0.5, 0.0], &[0.0, 0.0, 0.0, 1.0]]),
        real(&[&[0.0, 0.0, 0.0, 0.0], &[0.0, 0.5, -0.5, 0.0], &[0.0, 0.5, -0.5, 0.0], &[0.0, 0.0, 0.0, 0.0]]),
    ]
}

pub fn reference_channel() -> KrausChannel {
    KrausChannel::new(SystemShape::new(2, 2, 2).unwrap(), reference_kraus().to_vec()).unwrap()
}

/// Triplet and singlet projectors.
pub fn pm_kraus() -> [ComplexMatrix; 2] {
    [
        real(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.5, 0.5, 0.0], &[0.0, 0.5, 0.5, 0.0], &[0.0, 0.0, 0.0, 1.0]]),
        real(&[&[0.0, 0.0, 0.0, 0.0], &[0.0, 0.5, -0.5, 0.0], &[0.0, -0.5, 0.5, 0.0], &[0.0, 0.0, 0.0, 0.0]]),
    ]
}

/// Seed for the mixed(1, 1) build that yields the triplet/singlet pair.
pub fn pm_seed() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    real(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, s, s, 0.0], &[0.0, 0.0, 0.0, 1.0], &[0.0, s, -s, 0.0]])
}

/// Pair built from the standard swap and the phased swap with phi01 = pi/2.
pub fn phased_kraus() -> [ComplexMatrix; 2] {
    [
        real(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.5, 0.5, 0.0], &[0.0, 0.5, 0.5, 0.0], &[0.0, 0.0, 0.0, 1.0]]),
        mat(&[
            &[Z, Z, Z, Z],
            &[Z, c(0.5), c(-0.5), Z],
            &[Z, ci(-0.5), ci(0.5), Z],
            &[Z, Z, Z, Z],
        ]),
    ]
}

pub fn digits(mut flat: usize, n: usize, local: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for k in (0..n).rev() {
        d[k] = flat % local;
        flat /= local;
    }
    d
}

/// Reduced state of subsystem `k` from a density matrix on N^n, by explicit index sums.
pub fn oracle_reduction(rho: &ComplexMatrix, n: usize, local: usize, k: usize) -> ComplexMatrix {
    let dim = local.pow(n as u32);
    let mut out = ComplexMatrix::zeros(local, local);
    for r in 0..dim {
        let dr = digits(r, n, local);
        for col in 0..dim {
            let dc = digits(col, n, local);
            if (0..n).all(|m| m == k || dr[m] == dc[m]) {
                out[(dr[k], dc[k])] += rho[(r, col)];
            }
        }
    }
    out
}

pub fn oracle_pure_reduction(psi: &ComplexVector, n: usize, local: usize, k: usize) -> ComplexMatrix {
    oracle_reduction(&(psi * psi.adjoint()), n, local, k)
}

/// Largest entrywise difference between any two single-party reductions.
pub fn oracle_max_reduction_gap(rho: &ComplexMatrix, n: usize, local: usize) -> f64 {
    let reds: Vec<ComplexMatrix> = (0..n).map(|k| oracle_reduction(rho, n, local, k)).collect();
    let mut gap: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            gap = gap.max((&reds[i] - &reds[j]).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    gap
}

/// Channel output by direct Kraus sum.
pub fn oracle_apply(ops: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
    ops.iter().map(|k| k * rho * k.adjoint()).fold(ComplexMatrix::zeros(rho.nrows(), rho.ncols()), |a, b| a + b)
}
