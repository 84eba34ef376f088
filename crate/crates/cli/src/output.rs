//! Number formatting and CSV/JSON writers.

use std::io::Write;

use serde_json::{Map, Value};

use crate::CliError;

/// Version of every JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;
/// Significant digits of every emitted floating-point value.
pub const SIG_DIGITS: usize = 9;

/// Formats `x` with [`SIG_DIGITS`] significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Round through scientific notation first so the exponent reflects the rounded value.
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
    let rounded: f64 = sci.parse().expect("scientific format parses");
    trim_zeros(&format!("{rounded:.decimals$}"))
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// JSON number rounded to [`SIG_DIGITS`]; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    fmt_sig(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
}

/// Optional number, `null` when absent.
pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Writes a CSV table. Fields never contain commas or quotes.
pub fn write_csv(out: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Writes a pretty-printed JSON document followed by a newline.
pub fn write_json(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

/// Flattens nested objects into dotted keys for single-row CSV reports.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into("", value, &mut out);
    out
}

fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten_into(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            let joined: Vec<String> = items.iter().map(scalar_text).collect();
            out.push((prefix.to_string(), joined.join(";")));
        }
        other => out.push((prefix.to_string(), scalar_text(other))),
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => "NaN".into(),
        Value::String(s) => s.replace([',', '\n'], ";"),
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), fmt_sig),
        other => other.to_string().replace(',', ";"),
    }
}

/// Writes a report object as JSON or as a one-row CSV.
pub fn write_report(out: &mut dyn Write, report: Map<String, Value>, csv: bool) -> Result<(), CliError> {
    let value = Value::Object(report);
    if csv {
        let (header, row): (Vec<String>, Vec<String>) = flatten(&value).into_iter().unzip();
        write_csv(out, &header, &[row])
    } else {
        write_json(out, &value)
    }
}
