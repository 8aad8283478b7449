//! CSV output: fixed column order, 12 significant digits, LF line endings.

use std::io::{self, Write};

use crate::experiment::Row;

pub const HEADER: &str = "strategy,M,q01,q10,alpha,route,metric,value,stderr,n_slots,seed";

/// Formats a number with 12 significant digits in the shortest of fixed and
/// scientific notation, trailing zeros removed.
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn format_row(r: &Row) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.strategy.name(),
        r.nodes,
        format_sig(r.q01),
        format_sig(r.q10),
        format_sig(r.alpha),
        r.route.name(),
        r.metric.name(),
        format_sig(r.value),
        opt(r.stderr.map(format_sig)),
        opt(r.n_slots),
        opt(r.seed),
    )
}

pub fn write_csv<W: Write>(mut w: W, rows: &[Row]) -> io::Result<()> {
    w.write_all(HEADER.as_bytes())?;
    w.write_all(b"\n")?;
    for r in rows {
        w.write_all(format_row(r).as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn to_csv_string(rows: &[Row]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}
