//! JSON file formats: Kraus channels, seed matrices and input states.
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major nested arrays.
//! A channel file looks like
//!
//! ```json
//! { "format_version": 1, "n": 2, "N": 2, "M": 2, "metadata": {...},
//!   "kraus": [ [ [[1.0, 0.0], ...], ... ], ... ] }
//! ```
//!
//! Floats are written in the shortest form that parses back to the same binary64
//! value, so `save(load(f))` reproduces a canonically formatted file byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, DensityMatrix, PureState, SystemShape, C64};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug)]
pub struct ChannelFile {
    pub channel: KrausChannel,
    pub metadata: Option<Value>,
}

#[derive(Deserialize)]
struct RawChannel {
    format_version: u64,
    n: usize,
    #[serde(rename = "N")]
    local_dim: usize,
    #[serde(rename = "M")]
    ancilla_dim: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    metadata: Option<Value>,
}

fn fmt_f64(x: f64) -> String {
    // Debug formatting is the shortest round-trip representation and always valid JSON for finite values
    format!("{x:?}")
}

fn write_row(out: &mut String, row: impl Iterator<Item = C64>) {
    out.push('[');
    for (k, z) in row.enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "[{}, {}]", fmt_f64(z.re), fmt_f64(z.im));
    }
    out.push(']');
}

fn write_matrix(out: &mut String, m: &ComplexMatrix, indent: &str) {
    out.push_str("[\n");
    for r in 0..m.nrows() {
        out.push_str(indent);
        out.push_str("  ");
        write_row(out, m.row(r).iter().copied());
        out.push_str(if r + 1 < m.nrows() { ",\n" } else { "\n" });
    }
    out.push_str(indent);
    out.push(']');
}

pub fn channel_to_json(channel: &KrausChannel, metadata: Option<&Value>) -> String {
    let shape = channel.shape();
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"format_version\": {FORMAT_VERSION},");
    let _ = writeln!(out, "  \"n\": {},", shape.n());
    let _ = writeln!(out, "  \"N\": {},", shape.local_dim());
    let _ = writeln!(out, "  \"M\": {},", shape.ancilla_dim());
    if let Some(meta) = metadata {
        let _ = writeln!(out, "  \"metadata\": {},", serde_json::to_string(meta).expect("JSON value serializes"));
    }
    out.push_str("  \"kraus\": [\n");
    let ops = channel.operators();
    for (a, k) in ops.iter().enumerate() {
        out.push_str("    ");
        write_matrix(&mut out, k, "    ");
        out.push_str(if a + 1 < ops.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

fn matrix_from_rows(rows: &[Vec<[f64; 2]>], what: &str) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Parse(format!("{what}: empty matrix")));
    }
    let mut m = ComplexMatrix::zeros(nrows, ncols);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Parse(format!(
                "{what}: row {r} has {} entries, expected {ncols}",
                row.len()
            )));
        }
        for (c, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse(format!("{what}: non-finite entry at ({r}, {c})")));
            }
            m[(r, c)] = C64::new(re, im);
        }
    }
    Ok(m)
}

pub fn channel_from_json(text: &str) -> Result<ChannelFile> {
    let raw: RawChannel = serde_json::from_str(text).map_err(|e| Error::Parse(format!("channel file: {e}")))?;
    if raw.format_version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            raw.format_version
        )));
    }
    let shape = SystemShape::new(raw.n, raw.local_dim, raw.ancilla_dim)?;
    let operators = raw
        .kraus
        .iter()
        .enumerate()
        .map(|(a, rows)| matrix_from_rows(rows, &format!("kraus[{a}]")))
        .collect::<Result<Vec<_>>>()?;
    let channel = KrausChannel::new(shape, operators)?;
    Ok(ChannelFile { channel, metadata: raw.metadata })
}

pub fn save_channel(path: impl AsRef<Path>, channel: &KrausChannel, metadata: Option<&Value>) -> Result<()> {
    std::fs::write(path, channel_to_json(channel, metadata))?;
    Ok(())
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<ChannelFile> {
    channel_from_json(&std::fs::read_to_string(path)?)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawMatrix {
    Bare(Vec<Vec<[f64; 2]>>),
    Wrapped { matrix: Vec<Vec<[f64; 2]>> },
}

/// A complex matrix given either as a bare nested array or as `{"matrix": ...}`.
pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let raw: RawMatrix = serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix file: {e}")))?;
    let rows = match raw {
        RawMatrix::Bare(rows) | RawMatrix::Wrapped { matrix: rows } => rows,
    };
    matrix_from_rows(&rows, "matrix")
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<ComplexMatrix> {
    matrix_from_json(&std::fs::read_to_string(path)?)
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    write_matrix(&mut out, m, "");
    out.push('\n');
    out
}

/// Input state for `verify`: a pure state or a density matrix on the system space.
#[derive(Clone, Debug)]
pub enum StateInput {
    Pure(PureState),
    Mixed(DensityMatrix),
}

#[derive(Deserialize)]
struct RawState {
    n: usize,
    #[serde(rename = "N")]
    local_dim: usize,
    #[serde(default)]
    amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    rho: Option<Vec<Vec<[f64; 2]>>>,
}

/// `{"n", "N", "amplitudes": [[re, im], ...]}` or `{"n", "N", "rho": [[[re, im], ...], ...]}`.
pub fn state_from_json(text: &str) -> Result<(SystemShape, StateInput)> {
    let raw: RawState = serde_json::from_str(text).map_err(|e| Error::Parse(format!("state file: {e}")))?;
    let shape = SystemShape::new(raw.n, raw.local_dim, 1)?;
    let state = match (raw.amplitudes, raw.rho) {
        (Some(amps), None) => {
            let v = ComplexVector::from_iterator(amps.len(), amps.iter().map(|&[re, im]| C64::new(re, im)));
            StateInput::Pure(PureState::new(v)?)
        }
        (None, Some(rows)) => StateInput::Mixed(DensityMatrix::new(matrix_from_rows(&rows, "rho")?)?),
        _ => return Err(Error::Parse("state file needs exactly one of \"amplitudes\" or \"rho\"".into())),
    };
    let dim = match &state {
        StateInput::Pure(p) => p.dim(),
        StateInput::Mixed(r) => r.dim(),
    };
    if dim != shape.system_dim() {
        return Err(Error::Dimension(format!("state dimension {dim} does not match N^n = {}", shape.system_dim())));
    }
    Ok((shape, state))
}
