//! Python bindings: `import qssr_py`.
//!
//! Matrices cross the boundary as nested lists of Python `complex` (anything
//! with `__complex__` is accepted on input, including numpy arrays).

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qssr::bench::{self, BlochVector, ExperimentConfig};
use qssr::builder::{self, SeedUnitary, SymmetryMode};
use qssr::linalg::{ComplexMatrix, ComplexVector, DensityMatrix, PureState};
use qssr::{dimensions, io, sqs, Error, KrausChannel, Sign, SwapRepresentation, SystemShape};

type Matrix = Vec<Vec<Complex64>>;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for qssr::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn to_matrix(rows: &Matrix) -> PyResult<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("expected a non-empty rectangular matrix"));
    }
    Ok(ComplexMatrix::from_row_iterator(nrows, ncols, rows.iter().flatten().copied()))
}

fn from_matrix(m: &ComplexMatrix) -> Matrix {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn to_density(rows: &Matrix) -> PyResult<DensityMatrix> {
    DensityMatrix::new(to_matrix(rows)?).py()
}

fn to_pure(amps: Vec<Complex64>) -> PyResult<PureState> {
    PureState::new(ComplexVector::from_vec(amps)).py()
}

#[pyclass(name = "Channel", module = "qssr_py", frozen)]
struct PyChannel {
    inner: KrausChannel,
}

#[pymethods]
impl PyChannel {
    #[new]
    #[pyo3(signature = (n, local_dim, kraus))]
    fn new(n: usize, local_dim: usize, kraus: Vec<Matrix>) -> PyResult<Self> {
        let shape = SystemShape::new(n, local_dim, kraus.len()).py()?;
        let ops = kraus.iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        Ok(Self { inner: KrausChannel::new(shape, ops).py()? })
    }

    #[staticmethod]
    fn identity(n: usize, local_dim: usize) -> PyResult<Self> {
        Ok(Self { inner: KrausChannel::identity(n, local_dim).py()? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: io::load_channel(path).py()?.channel })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::channel_from_json(text).py()?.channel })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        io::save_channel(path, &self.inner, None).py()
    }

    fn to_json(&self) -> String {
        io::channel_to_json(&self.inner, None)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.shape().n()
    }

    #[getter(N)]
    fn local_dim(&self) -> usize {
        self.inner.shape().local_dim()
    }

    #[getter(M)]
    fn ancilla_dim(&self) -> usize {
        self.inner.shape().ancilla_dim()
    }

    fn kraus(&self) -> Vec<Matrix> {
        self.inner.operators().iter().map(from_matrix).collect()
    }

    fn completeness_deviation(&self) -> f64 {
        self.inner.completeness_deviation()
    }

    /// Output density matrix for a density-matrix input.
    fn apply(&self, rho: Matrix) -> PyResult<Matrix> {
        Ok(from_matrix(self.inner.apply(&to_density(&rho)?).py()?.matrix()))
    }

    /// Output density matrix for a pure-state input given by its amplitudes.
    fn apply_pure(&self, amplitudes: Vec<Complex64>) -> PyResult<Matrix> {
        Ok(from_matrix(self.inner.apply_pure(&to_pure(amplitudes)?).py()?.matrix()))
    }

    /// `other` applied after `self`.
    fn then(&self, other: PyRef<'_, PyChannel>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.then(&other.inner).py()? })
    }

    fn complete_dilation(&self) -> Matrix {
        from_matrix(&self.inner.complete_dilation())
    }

    #[pyo3(signature = (samples = 500, tol = sqs::DEFAULT_SQS_TOL, seed = qssr::cli::DEFAULT_SEED))]
    fn certify<'py>(&self, py: Python<'py>, samples: usize, tol: f64, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let v = py.detach(|| qssr::certify_qssr(&self.inner, samples, tol, seed)).py()?;
        let d = PyDict::new(py);
        d.set_item("is_qssr", v.is_qssr)?;
        d.set_item("worst_residual", v.worst_residual)?;
        d.set_item("mixed_worst_residual", v.mixed_worst_residual)?;
        d.set_item("samples_tested", v.samples_tested)?;
        d.set_item("mixed_samples_tested", v.mixed_samples_tested)?;
        d.set_item("witness", v.witness.map(|w| w.amplitudes().iter().copied().collect::<Vec<_>>()))?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let s = self.inner.shape();
        format!("Channel(n={}, N={}, M={})", s.n(), s.local_dim(), s.ancilla_dim())
    }
}

fn seed_from(seed_unitary: Option<Matrix>, random_seed: Option<u64>) -> PyResult<SeedUnitary> {
    match (seed_unitary, random_seed) {
        (Some(_), Some(_)) => Err(PyValueError::new_err("give at most one of seed_unitary and random_seed")),
        (Some(m), None) => Ok(SeedUnitary::Matrix(to_matrix(&m)?)),
        (None, Some(s)) => Ok(SeedUnitary::Random(s)),
        (None, None) => Ok(SeedUnitary::Identity),
    }
}

/// Builds a synchronizing channel. `mode` is "sym", "antisym" or "mixed"
/// (the latter with `sym_count` symmetric operators out of `M`).
#[pyfunction]
#[pyo3(signature = (n, local_dim, ancilla_dim, mode = "sym", sym_count = None, seed_unitary = None, random_seed = None))]
fn build(
    n: usize,
    local_dim: usize,
    ancilla_dim: usize,
    mode: &str,
    sym_count: Option<usize>,
    seed_unitary: Option<Matrix>,
    random_seed: Option<u64>,
) -> PyResult<PyChannel> {
    let shape = SystemShape::new(n, local_dim, ancilla_dim).py()?;
    let mode = match mode {
        "sym" | "symmetric" => SymmetryMode::symmetric(),
        "antisym" | "antisymmetric" => SymmetryMode::antisymmetric(),
        "mixed" => {
            let s = sym_count.ok_or_else(|| PyValueError::new_err("mixed mode needs sym_count"))?;
            SymmetryMode::mixed(s, ancilla_dim.saturating_sub(s))
        }
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let seed = seed_from(seed_unitary, random_seed)?;
    Ok(PyChannel { inner: builder::build(shape, &mode, &seed).py()? })
}

/// Two-party channel with one exchange representation per Kraus operator.
/// Each representation is `(delta, phases)` with `phases` an antisymmetric
/// N x N real matrix; `signs` holds "+" or "-" per operator.
#[pyfunction]
#[pyo3(signature = (local_dim, reps, signs, seed_unitary = None, random_seed = None))]
fn build_mixed_representation(
    local_dim: usize,
    reps: Vec<(f64, Vec<Vec<f64>>)>,
    signs: Vec<String>,
    seed_unitary: Option<Matrix>,
    random_seed: Option<u64>,
) -> PyResult<PyChannel> {
    let shape = SystemShape::new(2, local_dim, reps.len()).py()?;
    let reps = reps
        .into_iter()
        .map(|(delta, phases)| {
            let n = phases.len();
            if phases.iter().any(|r| r.len() != n) {
                return Err(PyValueError::new_err("phase matrix must be square"));
            }
            SwapRepresentation::new(delta, nalgebra_from_rows(n, phases)).py()
        })
        .collect::<PyResult<Vec<_>>>()?;
    let signs = signs.iter().map(|s| Sign::parse(s)).collect::<qssr::Result<Vec<_>>>().py()?;
    let seed = seed_from(seed_unitary, random_seed)?;
    Ok(PyChannel { inner: builder::build_mixed_representation(shape, &reps, &signs, &seed).py()? })
}

fn nalgebra_from_rows(n: usize, rows: Vec<Vec<f64>>) -> DMatrix<f64> {
    DMatrix::from_row_iterator(n, n, rows.into_iter().flatten())
}

fn sqs_dict<'py>(py: Python<'py>, v: &sqs::SqsVerdict) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("is_sqs", v.is_sqs)?;
    d.set_item("max_pair_residual", v.max_pair_residual)?;
    let pairs: Vec<(usize, usize, f64)> = v.per_pair.iter().map(|p| (p.i, p.j, p.residual)).collect();
    d.set_item("per_pair", pairs)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (amplitudes, n, local_dim, tol = sqs::DEFAULT_SQS_TOL))]
fn is_sqs_pure<'py>(py: Python<'py>, amplitudes: Vec<Complex64>, n: usize, local_dim: usize, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let shape = SystemShape::new(n, local_dim, 1).py()?;
    sqs_dict(py, &sqs::is_sqs_pure(&to_pure(amplitudes)?, &shape, tol).py()?)
}

#[pyfunction]
#[pyo3(signature = (rho, n, local_dim, tol = sqs::DEFAULT_SQS_TOL))]
fn is_sqs_mixed<'py>(py: Python<'py>, rho: Matrix, n: usize, local_dim: usize, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let shape = SystemShape::new(n, local_dim, 1).py()?;
    sqs_dict(py, &sqs::is_sqs_mixed(&to_density(&rho)?, &shape, tol).py()?)
}

#[pyfunction]
fn bloch(rho: Matrix) -> PyResult<(f64, f64, f64)> {
    let b = bench::bloch(&to_density(&rho)?).py()?;
    Ok((b.x, b.y, b.z))
}

#[pyfunction]
fn asynchronicity(vectors: Vec<(f64, f64, f64)>) -> PyResult<f64> {
    let v: Vec<BlochVector> = vectors.into_iter().map(|(x, y, z)| BlochVector::new(x, y, z)).collect();
    bench::asynchronicity(&v).py()
}

/// Asynchronicity benchmark; `shots=None` uses exact output Bloch vectors.
#[pyfunction]
#[pyo3(signature = (channel, num_states, shots = None, seed = qssr::cli::DEFAULT_SEED))]
fn run_experiment<'py>(
    py: Python<'py>,
    channel: PyRef<'_, PyChannel>,
    num_states: usize,
    shots: Option<u64>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = ExperimentConfig { num_states, shots, master_seed: seed };
    let inner = &channel.inner;
    let exp = py.detach(|| bench::run_experiment(inner, &config)).py()?;
    let d = PyDict::new(py);
    d.set_item("a_bar_init", exp.a_bar_init)?;
    d.set_item("a_bar_final", exp.a_bar_final)?;
    let rows = exp
        .reports
        .iter()
        .map(|r| {
            let row = PyDict::new(py);
            row.set_item("state_id", r.state_id)?;
            row.set_item("seed", r.seed)?;
            row.set_item("A_init", r.a_init)?;
            row.set_item("A_final", r.a_final)?;
            row.set_item("mu_r_init", r.mu_r_init)?;
            row.set_item("mu_r_final", r.mu_r_final)?;
            row.set_item("shots", r.shots)?;
            Ok(row)
        })
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("reports", rows)?;
    Ok(d)
}

#[pyfunction]
fn symmetric_dim(n: u64, local_dim: u64) -> BigUint {
    dimensions::symmetric_dim(n, local_dim)
}

#[pyfunction]
fn antisymmetric_dim(n: u64, local_dim: u64) -> BigUint {
    dimensions::antisymmetric_dim(n, local_dim)
}

#[pyfunction]
fn min_ancilla_symmetric(n: u64, local_dim: u64) -> PyResult<BigUint> {
    dimensions::min_ancilla_symmetric(n, local_dim).py()
}

#[pyfunction]
fn min_ancilla_antisymmetric(n: u64, local_dim: u64) -> PyResult<Option<BigUint>> {
    dimensions::min_ancilla_antisymmetric(n, local_dim).py()
}

#[pyfunction]
#[pyo3(signature = (n, local_dim, ancilla_dim, sym_count = None))]
fn manifold_dimension(n: u64, local_dim: u64, ancilla_dim: u64, sym_count: Option<u64>) -> PyResult<BigInt> {
    dimensions::manifold_dimension(n, local_dim, ancilla_dim, sym_count.unwrap_or(ancilla_dim)).py()
}

#[pyfunction]
fn free_parameter_count(n: u64, local_dim: u64, ancilla_dim: u64) -> PyResult<BigInt> {
    dimensions::free_parameter_count(n, local_dim, ancilla_dim).py()
}

/// Minimal symmetric ancilla dimension for every `2 <= n <= n_max`, `2 <= N <= local_max`,
/// as `{(n, N): M}`.
#[pyfunction]
fn table(py: Python<'_>, n_max: u64, local_max: u64) -> PyResult<Bound<'_, PyDict>> {
    let d = PyDict::new(py);
    for r in dimensions::table(n_max, local_max).py()? {
        d.set_item((r.n, r.local_dim), r.min_ancilla_sym)?;
    }
    Ok(d)
}

#[pymodule]
fn qssr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannel>()?;
    m.add("DEFAULT_SEED", qssr::cli::DEFAULT_SEED)?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(build_mixed_representation, m)?)?;
    m.add_function(wrap_pyfunction!(is_sqs_pure, m)?)?;
    m.add_function(wrap_pyfunction!(is_sqs_mixed, m)?)?;
    m.add_function(wrap_pyfunction!(bloch, m)?)?;
    m.add_function(wrap_pyfunction!(asynchronicity, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_dim, m)?)?;
    m.add_function(wrap_pyfunction!(antisymmetric_dim, m)?)?;
    m.add_function(wrap_pyfunction!(min_ancilla_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(min_ancilla_antisymmetric, m)?)?;
    m.add_function(wrap_pyfunction!(manifold_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(free_parameter_count, m)?)?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    Ok(())
}
