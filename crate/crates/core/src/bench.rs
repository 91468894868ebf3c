//! Synchronization benchmark: Bloch vectors, the asynchronicity measure and
//! shot-noise simulation over Haar-random product inputs.

use std::io::Write;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{pauli_x, pauli_y, pauli_z, single_party_reduction, DensityMatrix};
use crate::random::{derive_seed, rng_from_seed};

pub use crate::random::haar_product_state;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn components(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

fn check_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "Bloch vectors are defined for qubits only, got dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// `(Tr ρσ_x, Tr ρσ_y, Tr ρσ_z)`.
pub fn bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    check_qubit(rho)?;
    let m = rho.matrix();
    let expect = |s: nalgebra::DMatrix<crate::linalg::C64>| (m * s).trace().re;
    Ok(BlochVector::new(expect(pauli_x()), expect(pauli_y()), expect(pauli_z())))
}

/// Sum over axes of the variance of Bloch components across subsystems, after
/// rescaling all vectors so that the longest has unit length.
///
/// All-zero inputs (every subsystem maximally mixed) give 0.
pub fn asynchronicity(vectors: &[BlochVector]) -> Result<f64> {
    if vectors.len() < 2 {
        return Err(Error::Argument(format!("need at least 2 Bloch vectors, got {}", vectors.len())));
    }
    let r_max = vectors.iter().map(BlochVector::length).fold(0.0, f64::max);
    if r_max == 0.0 {
        return Ok(0.0);
    }
    let n = vectors.len() as f64;
    let a = (0..3)
        .map(|axis| {
            let comps: Vec<f64> = vectors.iter().map(|v| v.components()[axis] / r_max).collect();
            let mean = comps.iter().sum::<f64>() / n;
            comps.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n
        })
        .sum();
    Ok(a)
}

/// Mean Bloch length `μ_r`.
pub fn mean_length(vectors: &[BlochVector]) -> f64 {
    vectors.iter().map(BlochVector::length).sum::<f64>() / vectors.len() as f64
}

/// Empirical Bloch vector from `shots` ±1 outcomes per Pauli axis.
///
/// Each axis count is a single binomial draw with `P(+1) = (1 + ⟨σ⟩)/2`, from an
/// independent stream derived from `seed`.
pub fn shot_estimate_bloch(rho: &DensityMatrix, shots: u64, seed: u64) -> Result<BlochVector> {
    if shots == 0 {
        return Err(Error::Argument("need at least one shot".into()));
    }
    let exact = bloch(rho)?;
    let mut est = [0.0; 3];
    for (axis, (slot, mean)) in est.iter_mut().zip(exact.components()).enumerate() {
        let p = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
        let dist = Binomial::new(shots, p).map_err(|e| Error::Argument(format!("binomial: {e}")))?;
        let plus = dist.sample(&mut rng_from_seed(derive_seed(seed, axis as u64)));
        *slot = (2.0 * plus as f64 - shots as f64) / shots as f64;
    }
    Ok(BlochVector::new(est[0], est[1], est[2]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub num_states: usize,
    /// `None` evaluates the output Bloch vectors exactly.
    pub shots: Option<u64>,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsyncReport {
    pub state_id: usize,
    pub seed: u64,
    pub a_init: f64,
    pub a_final: f64,
    pub mu_r_init: f64,
    pub mu_r_final: f64,
    pub shots: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub reports: Vec<AsyncReport>,
    pub a_bar_init: f64,
    pub a_bar_final: f64,
}

impl Experiment {
    pub fn final_values(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.a_final).collect()
    }

    pub fn summary_line(&self) -> String {
        format!("A_bar_init={} A_bar_final={}", self.a_bar_init, self.a_bar_final)
    }
}

/// Seed of input state `index`: `master ⊕ index`.
pub fn state_seed(master_seed: u64, index: usize) -> u64 {
    master_seed ^ index as u64
}

fn run_one(channel: &KrausChannel, shots: Option<u64>, state_id: usize, seed: u64) -> Result<AsyncReport> {
    let shape = channel.shape();
    let psi = haar_product_state(shape, seed);
    let rho_in = psi.to_density();
    let reduce = |rho: &DensityMatrix| -> Result<Vec<DensityMatrix>> {
        (0..shape.n()).map(|k| single_party_reduction(rho, shape, k)).collect()
    };
    let init: Vec<BlochVector> = reduce(&rho_in)?.iter().map(bloch).collect::<Result<_>>()?;
    let out = channel.apply_pure(&psi)?;
    let fin: Vec<BlochVector> = reduce(&out)?
        .iter()
        .enumerate()
        .map(|(k, r)| match shots {
            Some(s) => shot_estimate_bloch(r, s, derive_seed(seed, k as u64)),
            None => bloch(r),
        })
        .collect::<Result<_>>()?;
    Ok(AsyncReport {
        state_id,
        seed,
        a_init: asynchronicity(&init)?,
        a_final: asynchronicity(&fin)?,
        mu_r_init: mean_length(&init),
        mu_r_final: mean_length(&fin),
        shots,
    })
}

/// Asynchronicity before and after the channel for `num_states` Haar-random
/// product inputs. Input states depend only on the master seed, so runs with
/// different shot counts see the same inputs.
pub fn run_experiment(channel: &KrausChannel, config: &ExperimentConfig) -> Result<Experiment> {
    if channel.shape().local_dim() != 2 {
        return Err(Error::Unsupported(format!(
            "asynchronicity is defined for qubit subsystems, got N = {}",
            channel.shape().local_dim()
        )));
    }
    if config.num_states == 0 {
        return Err(Error::Argument("need at least one input state".into()));
    }
    if config.shots == Some(0) {
        return Err(Error::Argument("need at least one shot".into()));
    }
    let reports = (0..config.num_states)
        .into_par_iter()
        .map(|k| run_one(channel, config.shots, k, state_seed(config.master_seed, k)))
        .collect::<Result<Vec<_>>>()?;
    let count = reports.len() as f64;
    let a_bar_init = reports.iter().map(|r| r.a_init).sum::<f64>() / count;
    let a_bar_final = reports.iter().map(|r| r.a_final).sum::<f64>() / count;
    Ok(Experiment { reports, a_bar_init, a_bar_final })
}

/// Geometrically spaced shot counts from `lo` to `hi` inclusive.
pub fn shot_sweep(lo: u64, hi: u64, steps: usize) -> Result<Vec<u64>> {
    if lo == 0 || hi < lo || steps == 0 {
        return Err(Error::Argument(format!("invalid sweep {lo}:{hi}:{steps}")));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi as f64 / lo as f64).ln() / (steps - 1) as f64;
    let mut out: Vec<u64> = (0..steps).map(|k| (lo as f64 * (ratio * k as f64).exp()).round() as u64).collect();
    out.dedup();
    Ok(out)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

#[derive(Serialize)]
struct CsvRow {
    state_id: usize,
    seed: u64,
    #[serde(rename = "A_init")]
    a_init: f64,
    #[serde(rename = "A_final")]
    a_final: f64,
    mu_r_init: f64,
    mu_r_final: f64,
    shots: String,
}

/// Writes `# `-prefixed provenance lines followed by one CSV row per report.
/// Exact-mode rows carry `shots = inf`.
pub fn write_csv<W: Write>(out: W, provenance: &[String], reports: &[AsyncReport]) -> Result<()> {
    let mut out = out;
    for line in provenance {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(CsvRow {
            state_id: r.state_id,
            seed: r.seed,
            a_init: r.a_init,
            a_final: r.a_final,
            mu_r_init: r.mu_r_init,
            mu_r_final: r.mu_r_final,
            shots: r.shots.map_or_else(|| "inf".to_string(), |s| s.to_string()),
        })
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, C64, EXACT_TOL};

    fn qubit(m: [[f64; 2]; 2], off_im: f64) -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(m[0][0], 0.0),
                C64::new(m[0][1], off_im),
                C64::new(m[1][0], -off_im),
                C64::new(m[1][1], 0.0),
            ],
        ))
        .unwrap()
    }

    #[test]
    fn bloch_examples() {
        assert_eq!(bloch(&qubit([[1.0, 0.0], [0.0, 0.0]], 0.0)).unwrap(), BlochVector::new(0.0, 0.0, 1.0));
        assert_eq!(bloch(&DensityMatrix::maximally_mixed(2)).unwrap(), BlochVector::new(0.0, 0.0, 0.0));
        let plus = bloch(&qubit([[0.5, 0.5], [0.5, 0.5]], 0.0)).unwrap();
        assert!((plus.x - 1.0).abs() < EXACT_TOL && plus.y.abs() < EXACT_TOL && plus.z.abs() < EXACT_TOL);
        // ρ = (I + σ_y)/2 has ρ_01 = −i/2
        let y = bloch(&qubit([[0.5, 0.0], [0.0, 0.5]], -0.5)).unwrap();
        assert!((y.y - 1.0).abs() < EXACT_TOL);
        assert!(bloch(&DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn asynchronicity_examples() {
        let v = BlochVector::new(0.3, -0.2, 0.5);
        assert_eq!(asynchronicity(&[v, v, v]).unwrap(), 0.0);
        let a = asynchronicity(&[BlochVector::new(1.0, 0.0, 0.0), BlochVector::new(-1.0, 0.0, 0.0)]).unwrap();
        assert!((a - 1.0).abs() < EXACT_TOL);
        let a = asynchronicity(&[BlochVector::new(0.0, 0.0, 1.0), BlochVector::new(0.0, 0.0, 0.5)]).unwrap();
        assert!((a - 0.0625).abs() < EXACT_TOL);
        assert_eq!(asynchronicity(&[BlochVector::default(); 3]).unwrap(), 0.0);
        assert!(asynchronicity(&[v]).is_err());
    }

    #[test]
    fn shots_are_deterministic_and_converge() {
        let zero = qubit([[1.0, 0.0], [0.0, 0.0]], 0.0);
        let a = shot_estimate_bloch(&zero, 1_000_000, 17).unwrap();
        assert_eq!(a, shot_estimate_bloch(&zero, 1_000_000, 17).unwrap());
        assert!((a.z - 1.0).abs() < 0.005);
        assert!(a.x.abs() < 0.005);
        assert!(shot_estimate_bloch(&zero, 0, 1).is_err());
    }

    #[test]
    fn shot_estimator_variance_matches_bernoulli() {
        // ⟨σ_z⟩ = 0.6, so Var = (1 − 0.36)/N_r
        let rho = qubit([[0.8, 0.0], [0.0, 0.2]], 0.0);
        let shots = 400;
        let draws: Vec<f64> = (0..4000).map(|s| shot_estimate_bloch(&rho, shots, s).unwrap().z).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
        let expected = (1.0 - 0.36) / shots as f64;
        assert!((mean - 0.6).abs() < 4.0 * (expected / 4000.0).sqrt());
        // sample variance of 4000 draws is within ~10% at 4σ
        assert!((var / expected - 1.0).abs() < 0.1, "var {var} vs {expected}");
    }

    #[test]
    fn sweep_spacing() {
        assert_eq!(shot_sweep(100, 100_000, 4).unwrap(), vec![100, 1000, 10_000, 100_000]);
        assert!(shot_sweep(0, 10, 2).is_err());
    }

    #[test]
    fn slope_and_median() {
        let xs = [1e2, 1e3, 1e4];
        let ys = [1e-2, 1e-3, 1e-4];
        assert!((loglog_slope(&xs, &ys) + 1.0).abs() < 1e-12);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn non_qubit_channel_is_unsupported() {
        let ch = KrausChannel::identity(2, 3).unwrap();
        let cfg = ExperimentConfig { num_states: 2, shots: None, master_seed: 0 };
        assert!(matches!(run_experiment(&ch, &cfg), Err(Error::Unsupported(_))));
    }

    #[test]
    fn csv_layout() {
        let r = AsyncReport { state_id: 0, seed: 5, a_init: 0.5, a_final: 0.0, mu_r_init: 1.0, mu_r_final: 0.5, shots: None };
        let mut buf = Vec::new();
        write_csv(&mut buf, &["tool qssr".into()], &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# tool qssr\nstate_id,seed,A_init,A_final,mu_r_init,mu_r_final,shots\n0,5,0.5,0.0,1.0,0.5,inf\n"
        );
    }
}
