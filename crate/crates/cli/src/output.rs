//! Report serialization: JSON with every float printed as `%.12e`, CSV.

use std::io::{self, Write};

use finsler_core::{ExtendedReal, RectMatrix};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Value};

/// C-style `%.12e`: twelve fraction digits, signed exponent of at least two
/// digits.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "+inf".into()
        } else {
            "-inf".into()
        };
    }
    // print -0 as 0
    let v = if v == 0.0 { 0.0 } else { v };
    let s = format!("{v:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

struct SciFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SciFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(sci(v).as_bytes())
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    serde::Serialize::serialize(v, &mut ser).expect("serializing a Value cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Finite values as numbers, infinities as `"+inf"` / `"-inf"`.
pub fn ext(v: ExtendedReal) -> Value {
    match v {
        ExtendedReal::Finite(x) => json!(x),
        ExtendedReal::PosInf => json!("+inf"),
        ExtendedReal::NegInf => json!("-inf"),
    }
}

pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(sci(v))
    }
}

pub fn matrix(m: &RectMatrix) -> Value {
    Value::Array(m.to_rows().into_iter().map(|r| Value::Array(r.into_iter().map(num).collect())).collect())
}

pub fn point(p: &[f64]) -> Value {
    Value::Array(p.iter().map(|&x| num(x)).collect())
}

pub fn ext_csv(v: ExtendedReal) -> String {
    match v {
        ExtendedReal::Finite(x) => sci(x),
        ExtendedReal::PosInf => "+inf".into(),
        ExtendedReal::NegInf => "-inf".into(),
    }
}

/// CSV text from a header and string rows.
pub fn csv_string(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}
