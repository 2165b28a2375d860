//! JSON formats for states, channels and results, and the shared real-number
//! formatting used by every textual output.
//!
//! Complex numbers are `[re, im]` pairs (a bare number is read as real),
//! matrices are row-major nested arrays and permutations are 1-based.

use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::{json, Value};

use crate::channels::{
    Certificate, ChannelClassification, FsioChannel, KrausSet, Violation, COMPLETENESS_TOL,
};
use crate::error::{Error, Result};
use crate::measures::RoofResult;
use crate::qstate::{ComplexMatrix, DensityMatrix, PureState, StateInput};

/// Shortest decimal form of `x` rounded to 15 significant digits.
///
/// Magnitudes in `[1e-5, 1e15)` use positional notation with at least one
/// fractional digit; others use exponent notation. Negative zero prints as
/// `0.0` and non-finite values as `NaN`, `inf` or `-inf`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let rounded: f64 = format!("{x:.14e}").parse().expect("formatted float reparses");
    let magnitude = rounded.abs();
    if (1e-5..1e15).contains(&magnitude) {
        let s = format!("{rounded}");
        if s.contains('.') {
            s
        } else {
            s + ".0"
        }
    } else {
        format!("{rounded:e}")
    }
}

/// Compact JSON formatter that writes floats through [`fmt_real`].
struct RealFormatter;

impl Formatter for RealFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_real(value).as_bytes())
    }
}

/// Serializes to compact JSON with 15-significant-digit reals and a trailing newline.
/// Non-finite reals become `null`.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, RealFormatter);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum ComplexRepr {
    Pair([f64; 2]),
    Real(f64),
}

impl From<ComplexRepr> for Complex64 {
    fn from(c: ComplexRepr) -> Self {
        match c {
            ComplexRepr::Pair([re, im]) => Complex64::new(re, im),
            ComplexRepr::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn vector_json(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|&z| complex_json(z)).collect())
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| vector_json(r)).collect())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dim: Option<usize>,
    amplitudes: Option<Vec<ComplexRepr>>,
    rho: Option<Vec<Vec<ComplexRepr>>>,
}

#[derive(Debug, Deserialize)]
struct KrausFile {
    dim: Option<usize>,
    kraus: Vec<Vec<Vec<ComplexRepr>>>,
}

fn parse_error(context: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{context}: {e}"))
}

fn check_declared_dim(declared: Option<usize>, found: usize) -> Result<()> {
    match declared {
        Some(d) if d != found => Err(Error::DimensionMismatch { expected: d, found }),
        _ => Ok(()),
    }
}

fn matrix_from_rows(rows: Vec<Vec<ComplexRepr>>, what: &str) -> Result<ComplexMatrix> {
    let n = rows.len();
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::Parse(format!(
            "{what}: row {i} has {} entries, expected {n}",
            row.len()
        )));
    }
    let rows: Vec<Vec<Complex64>> = rows
        .into_iter()
        .map(|r| r.into_iter().map(Complex64::from).collect())
        .collect();
    ComplexMatrix::from_rows(&rows)
}

/// Reads `{"amplitudes": [...]}` or `{"rho": [[...]]}`, with optional `"dim"`.
pub fn parse_state(text: &str) -> Result<StateInput> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| parse_error("state", e))?;
    match (file.amplitudes, file.rho) {
        (Some(amps), None) => {
            check_declared_dim(file.dim, amps.len())?;
            let amps: Vec<Complex64> = amps.into_iter().map(Complex64::from).collect();
            Ok(StateInput::Pure(PureState::new(amps)?))
        }
        (None, Some(rows)) => {
            check_declared_dim(file.dim, rows.len())?;
            let m = matrix_from_rows(rows, "rho")?;
            Ok(StateInput::Mixed(DensityMatrix::new(m)?))
        }
        _ => Err(Error::Parse(
            "state: exactly one of \"amplitudes\" or \"rho\" is required".into(),
        )),
    }
}

/// Reads `{"kraus": [matrix, ...]}` with optional `"dim"`; other fields are ignored.
pub fn parse_kraus(text: &str) -> Result<KrausSet> {
    parse_kraus_with_tolerance(text, COMPLETENESS_TOL)
}

pub fn parse_kraus_with_tolerance(text: &str, tol: f64) -> Result<KrausSet> {
    let file: KrausFile = serde_json::from_str(text).map_err(|e| parse_error("kraus", e))?;
    let ops = file
        .kraus
        .into_iter()
        .enumerate()
        .map(|(n, rows)| matrix_from_rows(rows, &format!("kraus[{n}]")))
        .collect::<Result<Vec<_>>>()?;
    if let Some(first) = ops.first() {
        check_declared_dim(file.dim, first.rows())?;
    }
    KrausSet::with_tolerance(ops, tol)
}

pub fn pure_state_json(psi: &PureState) -> Value {
    json!({ "dim": psi.dim(), "amplitudes": vector_json(psi.amplitudes()) })
}

pub fn density_json(rho: &DensityMatrix) -> Value {
    json!({ "dim": rho.dim(), "rho": matrix_json(rho.matrix()) })
}

pub fn state_json(state: &StateInput) -> Value {
    match state {
        StateInput::Pure(psi) => pure_state_json(psi),
        StateInput::Mixed(rho) => density_json(rho),
    }
}

pub fn kraus_json(kraus: &KrausSet) -> Value {
    json!({
        "dim": kraus.dim(),
        "kraus": kraus.operators().iter().map(matrix_json).collect::<Vec<_>>(),
    })
}

/// Kraus form plus the structured description `K_n = U_pi A_n`.
pub fn fsio_json(channel: &FsioChannel) -> Result<Value> {
    let mut v = kraus_json(&channel.to_kraus()?);
    v["permutation"] = json!(channel.permutation().to_one_based());
    v["factors"] = Value::Array(channel.factors().iter().map(|a| vector_json(a)).collect());
    Ok(v)
}

pub fn roof_result_json(r: &RoofResult) -> Value {
    let ensemble: Vec<Value> = r
        .ensemble
        .members()
        .iter()
        .map(|(p, psi)| json!({ "p": p, "psi": vector_json(psi.amplitudes()) }))
        .collect();
    json!({
        "value": r.value,
        "converged": r.converged,
        "restarts_used": r.restarts_used,
        "ensemble": ensemble,
    })
}

fn violation_json(v: &Violation) -> Value {
    json!({
        "kind": v.kind.label(),
        "kraus_index": v.kraus_index,
        "row": v.row,
        "col": v.col,
    })
}

pub fn classification_json(c: &ChannelClassification) -> Value {
    let f = &c.flags;
    let certificate = match &c.certificate {
        None => Value::Null,
        Some(Certificate::Permutation {
            pi,
            diagonal_factors,
            completed,
        }) => json!({
            "pi": pi.to_one_based(),
            "diagonal_factors": diagonal_factors.iter().map(|a| vector_json(a)).collect::<Vec<_>>(),
            "completed_columns": completed,
        }),
        Some(Certificate::ColumnMap { map }) => json!({ "column_map": map }),
        Some(Certificate::Violation(v)) => json!({ "violation": violation_json(v) }),
    };
    json!({
        "flags": {
            "gio": f.gio, "fsio": f.fsio, "fio": f.fio,
            "sio": f.sio, "io": f.io, "mio": f.mio,
        },
        "most_specific": c.most_specific.label(),
        "certificate": certificate,
    })
}
