//! Text and CSV rendering of reports.
//!
//! Trace CSV columns are `n_or_g,term_value,cumulative`.

use std::fmt::Write;

use crate::fentropy::{EntropyReport, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

/// Output units: nats, or bits when `bits` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Units {
    pub bits: bool,
}

impl Units {
    pub fn convert(&self, x: f64) -> f64 {
        if self.bits {
            x / std::f64::consts::LN_2
        } else {
            x
        }
    }

    pub fn name(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }

    pub fn value(&self, v: &Value) -> String {
        match v {
            Value::NegInfinity => "-inf".into(),
            other => sig7(self.convert(other.to_f64())),
        }
    }
}

/// Seven significant digits, plain notation for moderate magnitudes.
pub fn sig7(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Values this close to zero are rounding residue of exact cancellations.
    if x.abs() < 1e-12 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        return format!("{x:.6e}");
    }
    let decimals = (6 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
        return "0".into();
    }
    s
}

pub fn render_report(r: &EntropyReport, format: Format, units: Units) -> String {
    let mut out = String::new();
    match format {
        Format::Text => {
            writeln!(out, "route: {}", r.route).unwrap();
            writeln!(out, "value: {} {}", units.value(&r.value), units.name()).unwrap();
            writeln!(out, "exact: {}", r.exact).unwrap();
            writeln!(out, "truncation: {}", r.truncation).unwrap();
            if let Some(t) = r.tail {
                writeln!(out, "last-sphere contribution: {}", sig7(units.convert(t))).unwrap();
            }
            if !r.trace.is_empty() {
                out.push_str(&render_trace(r, Format::Text, units));
            }
        }
        Format::Csv => out.push_str(&render_trace(r, Format::Csv, units)),
    }
    out
}

pub fn render_trace(r: &EntropyReport, format: Format, units: Units) -> String {
    let rows: Vec<[String; 3]> = r
        .trace
        .iter()
        .map(|t| [t.key.clone(), units.value(&t.term), units.value(&t.cumulative)])
        .collect();
    table(&["n_or_g", "term_value", "cumulative"], &rows, format)
}

/// A simple aligned table (text) or comma-separated rows (CSV).
pub fn table<const N: usize>(header: &[&str; N], rows: &[[String; N]], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&header.join(","));
            out.push('\n');
            for r in rows {
                out.push_str(&r.join(","));
                out.push('\n');
            }
        }
        Format::Text => {
            let mut width = header.map(|h| h.len());
            for r in rows {
                for (w, c) in width.iter_mut().zip(r) {
                    *w = (*w).max(c.len());
                }
            }
            let line = |cells: Vec<&str>| {
                let mut s = String::new();
                for (i, (c, w)) in cells.iter().zip(&width).enumerate() {
                    if i + 1 == N {
                        s.push_str(c);
                    } else {
                        write!(s, "{c:<w$}  ").unwrap();
                    }
                }
                s.push('\n');
                s
            };
            out.push_str(&line(header.to_vec()));
            for r in rows {
                out.push_str(&line(r.iter().map(|s| s.as_str()).collect()));
            }
        }
    }
    out
}
