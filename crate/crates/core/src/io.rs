//! JSON interchange: tensors, bases, complex lists and reports.
//!
//! Complex numbers are `[re, im]`. Keys come out sorted and floats carry
//! 17 significant digits, so equal inputs give byte-identical files.

use std::io::Write;
use std::path::Path;

use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

use crate::basis::{clock_shift_basis, pauli_basis, ErrorBasis};
use crate::error::{GlueError, Result};
use crate::linalg::{c, CMat, C64};
use crate::mps::MpsTensor;

/// Pretty printer that writes every float as `d.dddddddddddddddde±x`.
struct Fmt17 {
    inner: PrettyFormatter<'static>,
}

impl Formatter for Fmt17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        if v == 0.0 {
            return w.write_all(if v.is_sign_negative() { b"-0.0" } else { b"0.0" });
        }
        write!(w, "{v:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serialize with sorted keys and 17-digit floats, newline terminated.
pub fn to_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Fmt17 { inner: PrettyFormatter::new() });
    serde::Serialize::serialize(v, &mut ser).expect("Value serialization is infallible");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_string(v))?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| GlueError::Parse(format!("{}: {e}", path.display())))
}

/// Finite floats become numbers, anything else null.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

pub fn complex(z: C64) -> Value {
    Value::Array(vec![num(z.re), num(z.im)])
}

pub fn complex_list(zs: &[C64]) -> Value {
    Value::Array(zs.iter().map(|&z| complex(z)).collect())
}

pub fn matrix(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

fn parse_err(msg: impl Into<String>) -> GlueError {
    GlueError::Parse(msg.into())
}

/// Accepts `[re, im]` or a bare real.
pub fn complex_from(v: &Value) -> Result<C64> {
    match v {
        Value::Number(n) => Ok(c(n.as_f64().ok_or_else(|| parse_err("bad number"))?, 0.0)),
        Value::Array(a) if a.len() == 2 => {
            let re = a[0].as_f64().ok_or_else(|| parse_err("complex real part is not a number"))?;
            let im = a[1].as_f64().ok_or_else(|| parse_err("complex imaginary part is not a number"))?;
            Ok(c(re, im))
        }
        _ => Err(parse_err(format!("expected complex [re, im], got {v}"))),
    }
}

pub fn complex_list_from(v: &Value) -> Result<Vec<C64>> {
    v.as_array().ok_or_else(|| parse_err("expected an array"))?.iter().map(complex_from).collect()
}

pub fn matrix_from(v: &Value, n: usize) -> Result<CMat> {
    let rows = v.as_array().ok_or_else(|| parse_err("matrix must be an array of rows"))?;
    if rows.len() != n {
        return Err(GlueError::DimensionMismatch { expected: n, got: rows.len() });
    }
    let mut m = CMat::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        let r = complex_list_from(r)?;
        if r.len() != n {
            return Err(GlueError::DimensionMismatch { expected: n, got: r.len() });
        }
        for (j, z) in r.into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| parse_err(format!("missing field `{key}`")))
}

fn usize_field(obj: &Value, key: &str) -> Result<usize> {
    field(obj, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(format!("`{key}` must be a non-negative integer")))
}

/// `{"chi", "d", "data"}` with data[l][s][r] = [re, im].
pub fn mps_to_json(a: &MpsTensor) -> Value {
    let (chi, d) = (a.chi(), a.d());
    let data: Vec<Value> = (0..chi)
        .map(|l| {
            Value::Array(
                (0..d)
                    .map(|s| Value::Array((0..chi).map(|r| complex(a.get(l, s, r))).collect()))
                    .collect(),
            )
        })
        .collect();
    json!({"chi": chi, "d": d, "data": data})
}

pub fn mps_from_json(v: &Value) -> Result<MpsTensor> {
    let chi = usize_field(v, "chi")?;
    let d = usize_field(v, "d")?;
    let data = field(v, "data")?.as_array().ok_or_else(|| parse_err("`data` must be an array"))?;
    if data.len() != chi {
        return Err(GlueError::DimensionMismatch { expected: chi, got: data.len() });
    }
    let mut flat = Vec::with_capacity(chi * d * chi);
    for l in data {
        let l = l.as_array().ok_or_else(|| parse_err("`data[l]` must be an array"))?;
        if l.len() != d {
            return Err(GlueError::DimensionMismatch { expected: d, got: l.len() });
        }
        for s in l {
            let row = complex_list_from(s)?;
            if row.len() != chi {
                return Err(GlueError::DimensionMismatch { expected: chi, got: row.len() });
            }
            flat.extend(row);
        }
    }
    MpsTensor::new(chi, d, flat)
}

pub fn load_mps(path: &Path) -> Result<MpsTensor> {
    mps_from_json(&read_json(path)?)
}

pub fn save_mps(path: &Path, a: &MpsTensor) -> Result<()> {
    write_json(path, &mps_to_json(a))
}

pub fn basis_to_json(b: &ErrorBasis) -> Value {
    json!({
        "chi": b.chi,
        "labels": b.labels,
        "ops": b.ops.iter().map(matrix).collect::<Vec<_>>(),
    })
}

pub fn basis_from_json(v: &Value) -> Result<ErrorBasis> {
    let chi = usize_field(v, "chi")?;
    let ops: Vec<CMat> = field(v, "ops")?
        .as_array()
        .ok_or_else(|| parse_err("`ops` must be an array"))?
        .iter()
        .map(|m| matrix_from(m, chi))
        .collect::<Result<_>>()?;
    let labels: Vec<String> = match v.get("labels") {
        Some(l) => serde_json::from_value(l.clone())?,
        None => (0..ops.len()).map(|i| format!("V{i}")).collect(),
    };
    ErrorBasis::new(chi, ops, labels)
}

/// `pauli`, `clock:N`, or a path to a basis JSON file.
pub fn parse_basis_spec(spec: &str) -> Result<ErrorBasis> {
    if spec == "pauli" {
        return Ok(pauli_basis());
    }
    if let Some(n) = spec.strip_prefix("clock:") {
        let n: usize = n.parse().map_err(|_| GlueError::InvalidArg(format!("bad clock dimension `{n}`")))?;
        return clock_shift_basis(n);
    }
    basis_from_json(&read_json(Path::new(spec))?)
}

/// One complex number: `1.5`, `-2i`, `0.5+0.25i`, `1e-3-4.5e-1i`, `i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    let bad = || GlueError::InvalidArg(format!("cannot parse complex number `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Ok(x) = s.parse::<f64>() {
        return Ok(c(x, 0.0));
    }
    let body = s.strip_suffix(['i', 'j']).ok_or_else(bad)?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let coef = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => {
            let re: f64 = body[..k].parse().map_err(|_| bad())?;
            Ok(c(re, coef(&body[k..])?))
        }
        None => Ok(c(0.0, coef(body)?)),
    }
}

/// Comma separated complex numbers.
pub fn parse_complex_csv(s: &str) -> Result<Vec<C64>> {
    s.split(',').map(parse_complex).collect()
}

/// Sorted-key object from pairs.
pub fn object<I: IntoIterator<Item = (String, Value)>>(items: I) -> Value {
    Value::Object(items.into_iter().collect::<Map<String, Value>>())
}
