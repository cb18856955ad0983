//! Run records and their line-delimited file format.
//!
//! A record file is UTF-8 text with one JSON object per line. The first line
//! is the header:
//!
//! ```text
//! {"format_version":1,"problem":"...","solver":"...","n":2,"m":0,
//!  "x0":["0x1p+0",...],"scalers":{"x":[...],"f":"0x1p+0","c":[...]},
//!  "options":{"maxiter":"500",...},"timestamp":"..."}
//! ```
//!
//! and every following line is an event, either an evaluation
//!
//! ```text
//! {"t":"eval","k":"grad","x":["0x1.3333333333333p+0",...],"r":["..."]}
//! ```
//!
//! (with an extra `"lam"` array for `lag_hess`; `"r"` is a string for
//! scalars, an array for vectors and an array of rows for matrices) or an
//! iteration:
//!
//! ```text
//! {"t":"iter","itr":3,"obj":"0x1.8p-2","x":["...","..."]}
//! ```
//!
//! Floats are always hexadecimal literals (see [`hexfloat`](super::hexfloat))
//! so the file reproduces every bit; integers are plain JSON numbers. Only the
//! header carries a timestamp, so the bodies of two identical runs are
//! byte-identical.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use super::hexfloat;
use super::outputs::{IterEvent, OutputValue};
use crate::problem::{EvalKind, EvalValue, Scalers};
use crate::{Error, Matrix, Result, Vector};

pub const FORMAT_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct RecordHeader {
    pub problem: String,
    pub solver: String,
    pub n: usize,
    pub m: usize,
    pub x0: Vec<f64>,
    pub scalers: Scalers,
    pub options: Vec<(String, String)>,
    pub timestamp: String,
}

/// One callback evaluation as seen by the solver (scaled space).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalEvent {
    pub kind: EvalKind,
    pub x: Vec<f64>,
    pub lam: Option<Vec<f64>>,
    pub result: EvalValue,
}

impl EvalEvent {
    /// Bit-level match against a request, used by hot-start replay.
    pub fn matches(&self, kind: EvalKind, x: &Vector, lam: Option<&Vector>) -> bool {
        fn same(a: &[f64], b: &[f64]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p.to_bits() == q.to_bits())
        }
        self.kind == kind
            && same(&self.x, x.as_slice())
            && match (&self.lam, lam) {
                (None, None) => true,
                (Some(a), Some(b)) => same(a, b.as_slice()),
                _ => false,
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Eval(EvalEvent),
    Iter(IterEvent),
}

/// Append-only log of a single solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub header: RecordHeader,
    pub events: Vec<Event>,
}

impl RunRecord {
    pub fn new(header: RecordHeader) -> Self {
        Self {
            header,
            events: Vec::new(),
        }
    }

    pub fn evals(&self) -> impl Iterator<Item = &EvalEvent> {
        self.events.iter().filter_map(|e| match e {
            Event::Eval(ev) => Some(ev),
            Event::Iter(_) => None,
        })
    }

    pub fn iterations(&self) -> impl Iterator<Item = &IterEvent> {
        self.events.iter().filter_map(|e| match e {
            Event::Iter(it) => Some(it),
            Event::Eval(_) => None,
        })
    }

    pub fn n_evals(&self) -> usize {
        self.evals().count()
    }

    pub fn n_iterations(&self) -> usize {
        self.iterations().count()
    }

    /// Serialized body (every line after the header).
    pub fn body_lines(&self) -> Vec<String> {
        self.events.iter().map(|e| event_to_json(e).to_string()).collect()
    }
}

pub fn timestamp_now() -> String {
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .unwrap_or_default();
    format!("{}.{:03}", now.as_secs(), now.subsec_millis())
}

fn hex_array(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(hexfloat::format(*x))).collect())
}

fn header_to_json(h: &RecordHeader) -> Value {
    let options: Map<String, Value> = h
        .options
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    json!({
        "format_version": FORMAT_VERSION,
        "problem": h.problem,
        "solver": h.solver,
        "n": h.n,
        "m": h.m,
        "x0": hex_array(&h.x0),
        "scalers": {
            "x": hex_array(h.scalers.x.as_slice()),
            "f": hexfloat::format(h.scalers.f),
            "c": hex_array(h.scalers.c.as_slice()),
        },
        "options": options,
        "timestamp": h.timestamp,
    })
}

fn event_to_json(e: &Event) -> Value {
    let mut obj = Map::new();
    match e {
        Event::Eval(ev) => {
            obj.insert("t".into(), "eval".into());
            obj.insert("k".into(), ev.kind.as_str().into());
            obj.insert("x".into(), hex_array(&ev.x));
            if let Some(lam) = &ev.lam {
                obj.insert("lam".into(), hex_array(lam));
            }
            let r = match &ev.result {
                EvalValue::Scalar(v) => Value::String(hexfloat::format(*v)),
                EvalValue::Vector(v) => hex_array(v.as_slice()),
                EvalValue::Matrix(m) => Value::Array(
                    m.row_iter()
                        .map(|row| hex_array(&row.iter().copied().collect::<Vec<_>>()))
                        .collect(),
                ),
            };
            obj.insert("r".into(), r);
        }
        Event::Iter(it) => {
            obj.insert("t".into(), "iter".into());
            for (name, value) in &it.values {
                let v = match value {
                    OutputValue::Int(i) => Value::from(*i),
                    OutputValue::Real(r) => Value::String(hexfloat::format(*r)),
                    OutputValue::Vector(v) => hex_array(v),
                };
                obj.insert(name.clone(), v);
            }
        }
    }
    Value::Object(obj)
}

/// Writes `record` to `path`, replacing any existing file.
pub fn write_record(record: &RunRecord, path: &Path) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{}", header_to_json(&record.header))?;
    for e in &record.events {
        writeln!(out, "{}", event_to_json(e))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a record written by [`write_record`]. Errors carry the 1-based line
/// number of the offending line.
pub fn read_record(path: &Path) -> Result<RunRecord> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| Error::RecordParse {
        line: 1,
        message: "empty file, expected a header".into(),
    })?;
    let first = first?;
    let header = parse_json(&first, 1).and_then(|v| parse_header(&v, 1))?;
    let mut record = RunRecord::new(header);
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line?;
        let value = parse_json(&line, lineno)?;
        let event = parse_event(&value, &record.header, lineno)?;
        record.events.push(event);
    }
    Ok(record)
}

fn parse_json(line: &str, lineno: usize) -> Result<Value> {
    serde_json::from_str(line).map_err(|e| Error::RecordParse {
        line: lineno,
        message: format!("malformed JSON: {e}"),
    })
}

struct Ctx {
    line: usize,
}

impl Ctx {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::RecordParse {
            line: self.line,
            message: message.into(),
        })
    }

    fn float(&self, v: &Value, field: &str) -> Result<f64> {
        match v.as_str().and_then(hexfloat::parse) {
            Some(f) => Ok(f),
            None => self.err(format!("field `{field}` is not a hex float")),
        }
    }

    fn floats(&self, v: &Value, field: &str) -> Result<Vec<f64>> {
        match v.as_array() {
            Some(items) => items.iter().map(|x| self.float(x, field)).collect(),
            None => self.err(format!("field `{field}` is not an array")),
        }
    }

    fn field<'a>(&self, obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
        match obj.get(name) {
            Some(v) => Ok(v),
            None => self.err(format!("missing field `{name}`")),
        }
    }

    fn usize(&self, v: &Value, field: &str) -> Result<usize> {
        match v.as_u64() {
            Some(u) => Ok(u as usize),
            None => self.err(format!("field `{field}` is not a nonnegative integer")),
        }
    }

    fn string(&self, v: &Value, field: &str) -> Result<String> {
        match v.as_str() {
            Some(s) => Ok(s.to_string()),
            None => self.err(format!("field `{field}` is not a string")),
        }
    }
}

fn parse_header(v: &Value, line: usize) -> Result<RecordHeader> {
    let cx = Ctx { line };
    let Some(obj) = v.as_object() else {
        return cx.err("header is not an object");
    };
    let version = cx.field(obj, "format_version")?;
    match version.as_i64() {
        Some(FORMAT_VERSION) => {}
        Some(other) => return Err(Error::RecordVersion(other)),
        None => return cx.err("format_version is not an integer"),
    }
    let scalers = cx.field(obj, "scalers")?;
    let Some(sobj) = scalers.as_object() else {
        return cx.err("scalers is not an object");
    };
    let options = match cx.field(obj, "options")?.as_object() {
        Some(o) => o
            .iter()
            .map(|(k, v)| Ok((k.clone(), cx.string(v, k)?)))
            .collect::<Result<Vec<_>>>()?,
        None => return cx.err("options is not an object"),
    };
    let header = RecordHeader {
        problem: cx.string(cx.field(obj, "problem")?, "problem")?,
        solver: cx.string(cx.field(obj, "solver")?, "solver")?,
        n: cx.usize(cx.field(obj, "n")?, "n")?,
        m: cx.usize(cx.field(obj, "m")?, "m")?,
        x0: cx.floats(cx.field(obj, "x0")?, "x0")?,
        scalers: Scalers {
            x: Vector::from_vec(cx.floats(cx.field(sobj, "x")?, "scalers.x")?),
            f: cx.float(cx.field(sobj, "f")?, "scalers.f")?,
            c: Vector::from_vec(cx.floats(cx.field(sobj, "c")?, "scalers.c")?),
        },
        options,
        timestamp: cx.string(cx.field(obj, "timestamp")?, "timestamp")?,
    };
    if header.x0.len() != header.n || header.scalers.x.len() != header.n {
        return cx.err("x0/scaler length does not match n");
    }
    if header.scalers.c.len() != header.m {
        return cx.err("constraint scaler length does not match m");
    }
    Ok(header)
}

fn parse_event(v: &Value, header: &RecordHeader, line: usize) -> Result<Event> {
    let cx = Ctx { line };
    let Some(obj) = v.as_object() else {
        return cx.err("event is not an object");
    };
    match cx.field(obj, "t")?.as_str() {
        Some("eval") => {
            let kind_s = cx.string(cx.field(obj, "k")?, "k")?;
            let Some(kind) = EvalKind::parse(&kind_s) else {
                return cx.err(format!("unknown evaluation kind `{kind_s}`"));
            };
            let x = cx.floats(cx.field(obj, "x")?, "x")?;
            let lam = match obj.get("lam") {
                Some(l) => Some(cx.floats(l, "lam")?),
                None => None,
            };
            let r = cx.field(obj, "r")?;
            let result = match kind {
                EvalKind::Obj => EvalValue::Scalar(cx.float(r, "r")?),
                EvalKind::Grad | EvalKind::Con => {
                    EvalValue::Vector(Vector::from_vec(cx.floats(r, "r")?))
                }
                EvalKind::Jac | EvalKind::ObjHess | EvalKind::LagHess => {
                    let Some(rows) = r.as_array() else {
                        return cx.err("matrix result is not an array of rows");
                    };
                    let rows = rows
                        .iter()
                        .map(|row| cx.floats(row, "r"))
                        .collect::<Result<Vec<_>>>()?;
                    let ncols = rows.first().map_or(header.n, Vec::len);
                    if rows.iter().any(|row| row.len() != ncols) {
                        return cx.err("ragged matrix result");
                    }
                    EvalValue::Matrix(Matrix::from_row_iterator(
                        rows.len(),
                        ncols,
                        rows.into_iter().flatten(),
                    ))
                }
            };
            Ok(Event::Eval(EvalEvent {
                kind,
                x,
                lam,
                result,
            }))
        }
        Some("iter") => {
            let mut values = Vec::new();
            for (name, value) in obj.iter().filter(|(k, _)| k.as_str() != "t") {
                let parsed = if let Some(i) = value.as_i64() {
                    OutputValue::Int(i)
                } else if value.is_string() {
                    OutputValue::Real(cx.float(value, name)?)
                } else if value.is_array() {
                    OutputValue::Vector(cx.floats(value, name)?)
                } else {
                    return cx.err(format!("output `{name}` has an unsupported type"));
                };
                values.push((name.clone(), parsed));
            }
            Ok(Event::Iter(IterEvent { values }))
        }
        _ => cx.err("unknown event type"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    pub(crate) fn header() -> RecordHeader {
        RecordHeader {
            problem: "p".into(),
            solver: "s".into(),
            n: 2,
            m: 1,
            x0: vec![std::f64::consts::PI, -0.0],
            scalers: Scalers {
                x: dvector![1.0, 0.1],
                f: 3.0,
                c: dvector![5.0],
            },
            options: vec![("maxiter".into(), "10".into())],
            timestamp: "0.000".into(),
        }
    }

    #[test]
    fn header_only_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let rec = RunRecord::new(header());
        write_record(&rec, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(read_record(&path).unwrap(), rec);
    }

    #[test]
    fn events_round_trip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let mut rec = RunRecord::new(header());
        let pi = std::f64::consts::PI;
        rec.events.push(Event::Eval(EvalEvent {
            kind: EvalKind::Obj,
            x: vec![pi, 1.0 / 3.0],
            lam: None,
            result: EvalValue::Scalar(pi.sqrt()),
        }));
        rec.events.push(Event::Eval(EvalEvent {
            kind: EvalKind::LagHess,
            x: vec![pi, 1.0 / 3.0],
            lam: Some(vec![0.1]),
            result: EvalValue::Matrix(dmatrix![1.0, 2.0; 2.0, 1e-300]),
        }));
        rec.events.push(Event::Iter(IterEvent {
            values: vec![
                ("itr".into(), OutputValue::Int(0)),
                ("obj".into(), OutputValue::Real(pi)),
                ("x".into(), OutputValue::Vector(vec![pi, -0.0])),
            ],
        }));
        write_record(&rec, &path).unwrap();
        let back = read_record(&path).unwrap();
        assert_eq!(back, rec);
        let Event::Iter(it) = &back.events[2] else { panic!() };
        let x = it.get("x").unwrap().as_slice().unwrap();
        assert_eq!(x[1].to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn truncated_line_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let mut rec = RunRecord::new(header());
        for i in 0..3 {
            rec.events.push(Event::Iter(IterEvent {
                values: vec![("itr".into(), OutputValue::Int(i))],
            }));
        }
        write_record(&rec, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() - 6]).unwrap();
        match read_record(&path) {
            Err(Error::RecordParse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_record(&RunRecord::new(header()), &path).unwrap();
        let text = fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\":1", "\"format_version\":2");
        fs::write(&path, text).unwrap();
        assert!(matches!(read_record(&path), Err(Error::RecordVersion(2))));
    }
}
