//! Byte-stable rendering of results as JSON or CSV.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::Value;

/// Renders a float with 17 significant digits, in scientific notation when
/// |x| lies outside [1e−4, 1e6], trimming trailing zeros but keeping one
/// fractional digit.
pub fn format_f64(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    // the exponent of the 17-digit scientific form is exact, unlike log10
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    if (1e-4..1e6).contains(&x.abs()) {
        let exponent: usize = exp.parse::<i32>().expect("integer exponent").unsigned_abs() as usize;
        let decimals = if exp.starts_with('-') { 16 + exponent } else { 16 - exponent };
        trim_fraction(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}", trim_fraction(mantissa), exp)
    }
}

fn trim_fraction(s: &str) -> String {
    if !s.contains('.') {
        return format!("{s}.0");
    }
    let t = s.trim_end_matches('0');
    if t.ends_with('.') {
        format!("{t}0")
    } else {
        t.to_string()
    }
}

struct StableFormatter;

impl Formatter for StableFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        writer.write_all(format_f64(f64::from(value)).as_bytes())
    }
}

/// Compact JSON with stable float rendering and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, StableFormatter);
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// A table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format_f64(*x)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Two-column key,value CSV of every leaf of a JSON value.
pub fn flatten_to_csv(value: &Value) -> String {
    let mut rows = Vec::new();
    flatten(value, String::new(), &mut rows);
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        s.push_str(&k);
        s.push(',');
        s.push_str(&v);
        s.push('\n');
    }
    s
}

fn flatten(value: &Value, prefix: String, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(v, join(k), out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(v, join(&i.to_string()), out);
            }
        }
        Value::Number(n) => {
            let text = match n.as_f64() {
                Some(x) if n.is_f64() => format_f64(x),
                _ => n.to_string(),
            };
            out.push((if prefix.is_empty() { "value".into() } else { prefix }, text));
        }
        Value::Null => out.push((prefix, String::new())),
        Value::Bool(b) => out.push((prefix, b.to_string())),
        Value::String(s) => out.push((prefix, s.replace(',', ";"))),
    }
}
