//! Exact combinatorics for ancilla bounds and subspace dimensions.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    // running product stays integral: C(n-k+i, i) after step i
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - k + i) / BigUint::from(i))
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

fn pow(base: u64, exp: u64) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

fn check(n: u64, local_dim: u64) -> Result<()> {
    if n < 2 || local_dim < 2 {
        return Err(Error::Argument(format!("need n >= 2 and N >= 2, got n = {n}, N = {local_dim}")));
    }
    Ok(())
}

/// Dimension of the fully symmetric subspace of `n` qudits, `C(n+N-1, n)`.
pub fn symmetric_dim(n: u64, local_dim: u64) -> BigUint {
    binomial(n + local_dim - 1, n)
}

/// Dimension of the fully antisymmetric subspace, `C(N, n)` (zero for `n > N`).
pub fn antisymmetric_dim(n: u64, local_dim: u64) -> BigUint {
    binomial(local_dim, n)
}

/// Smallest ancilla for a symmetrizing synchronizer: `⌈N^n / C(n+N-1, n)⌉`.
pub fn min_ancilla_symmetric(n: u64, local_dim: u64) -> Result<BigUint> {
    check(n, local_dim)?;
    Ok(pow(local_dim, n).div_ceil(&symmetric_dim(n, local_dim)))
}

/// `⌈N^n / C(N, n)⌉`, or `None` when no antisymmetric subspace exists (`n > N`).
pub fn min_ancilla_antisymmetric(n: u64, local_dim: u64) -> Result<Option<BigUint>> {
    check(n, local_dim)?;
    let asym = antisymmetric_dim(n, local_dim);
    Ok((!asym.is_zero()).then(|| pow(local_dim, n).div_ceil(&asym)))
}

/// Real dimension of the manifold of synchronizers with `sym_count` symmetric and
/// `M - sym_count` antisymmetric Kraus operators: swap-representation freedom plus
/// the choice of `N^n` orthonormal vectors. Negative values signal infeasibility.
pub fn manifold_dimension(n: u64, local_dim: u64, ancilla_dim: u64, sym_count: u64) -> Result<BigInt> {
    check(n, local_dim)?;
    if sym_count > ancilla_dim {
        return Err(Error::Argument(format!("sym_count {sym_count} exceeds M = {ancilla_dim}")));
    }
    let swap_freedom = BigInt::from(ancilla_dim)
        * BigInt::from(n - 1)
        * (BigInt::from(local_dim * (local_dim - 1) / 2) + 1);
    let system = BigInt::from(pow(local_dim, n));
    let capacity = BigInt::from(sym_count) * BigInt::from(symmetric_dim(n, local_dim))
        + BigInt::from(ancilla_dim - sym_count) * BigInt::from(antisymmetric_dim(n, local_dim));
    Ok(swap_freedom + &system * (capacity * 2 - &system))
}

/// Real parameters of a pure state on ancilla ⊗ system left after imposing equal reductions:
/// `2(M·N^n − 1) − (n−1)(N²−1)`.
pub fn free_parameter_count(n: u64, local_dim: u64, ancilla_dim: u64) -> Result<BigInt> {
    check(n, local_dim)?;
    if ancilla_dim == 0 {
        return Err(Error::Argument("M must be >= 1".into()));
    }
    let total = BigInt::from(ancilla_dim) * BigInt::from(pow(local_dim, n));
    let conditions = BigInt::from(n - 1) * (BigInt::from(local_dim) * local_dim - 1);
    Ok((total - 1) * 2 - conditions)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimReport {
    pub n: u64,
    pub local_dim: u64,
    pub sym_dim: BigUint,
    pub asym_dim: BigUint,
    pub min_ancilla_sym: BigUint,
    pub min_ancilla_asym: Option<BigUint>,
    /// Large-`N` limit of the symmetric bound, `n!`.
    pub asymptote: BigUint,
}

fn big_json(x: &BigUint) -> Value {
    x.to_u64().map_or_else(|| Value::String(x.to_string()), Value::from)
}

impl DimReport {
    pub fn new(n: u64, local_dim: u64) -> Result<Self> {
        Ok(Self {
            n,
            local_dim,
            sym_dim: symmetric_dim(n, local_dim),
            asym_dim: antisymmetric_dim(n, local_dim),
            min_ancilla_sym: min_ancilla_symmetric(n, local_dim)?,
            min_ancilla_asym: min_ancilla_antisymmetric(n, local_dim)?,
            asymptote: factorial(n),
        })
    }

    /// Integers that overflow `u64` are emitted as decimal strings.
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "N": self.local_dim,
            "sym_dim": big_json(&self.sym_dim),
            "asym_dim": big_json(&self.asym_dim),
            "min_ancilla_sym": big_json(&self.min_ancilla_sym),
            "min_ancilla_asym": self.min_ancilla_asym.as_ref().map(big_json),
            "asymptote": big_json(&self.asymptote),
        })
    }
}

/// Reports for `n = 2..=n_max` (outer) and `N = 2..=local_max` (inner).
pub fn table(n_max: u64, local_max: u64) -> Result<Vec<DimReport>> {
    if n_max < 2 || local_max < 2 {
        return Err(Error::Argument("table bounds must be >= 2".into()));
    }
    (2..=n_max)
        .flat_map(|n| (2..=local_max).map(move |big_n| DimReport::new(n, big_n)))
        .collect()
}

fn grid<'a>(reports: &'a [DimReport]) -> (Vec<u64>, Vec<u64>, impl Fn(u64, u64) -> Option<&'a DimReport>) {
    let mut ns: Vec<u64> = reports.iter().map(|r| r.n).collect();
    let mut big_ns: Vec<u64> = reports.iter().map(|r| r.local_dim).collect();
    ns.dedup();
    big_ns.sort_unstable();
    big_ns.dedup();
    (ns, big_ns, move |n, big_n| reports.iter().find(|r| r.n == n && r.local_dim == big_n))
}

/// Minimal symmetric ancilla as a grid: rows `n`, columns `N`.
pub fn render_table_pretty(reports: &[DimReport]) -> String {
    let (ns, big_ns, cell) = grid(reports);
    let mut header = vec!["n".to_string()];
    header.extend(big_ns.iter().map(|b| format!("M for N={b}")));
    let mut rows = vec![header];
    for &n in &ns {
        let mut row = vec![n.to_string()];
        row.extend(big_ns.iter().map(|&b| cell(n, b).map_or("-".into(), |r| r.min_ancilla_sym.to_string())));
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (k, row) in rows.iter().enumerate() {
        let line: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  "));
        if k == 0 {
            let _ = writeln!(out, "{}", "-".repeat(line.join("  ").len()));
        }
    }
    out
}

pub fn render_table_csv(reports: &[DimReport]) -> String {
    let (ns, big_ns, cell) = grid(reports);
    let mut out = String::from("n");
    for b in &big_ns {
        let _ = write!(out, ",N={b}");
    }
    out.push('\n');
    for &n in &ns {
        out.push_str(&n.to_string());
        for &b in &big_ns {
            let _ = write!(out, ",{}", cell(n, b).map_or(String::new(), |r| r.min_ancilla_sym.to_string()));
        }
        out.push('\n');
    }
    out
}
