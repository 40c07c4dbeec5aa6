//! Plain-text dense complex matrices.
//!
//! ```text
//! 2 2
//! 1+0j 0+0j
//! 0+0j 1+0j
//! ```
//!
//! The first line holds `rows cols`; each following line holds one row of
//! whitespace-separated `re+imj` entries (a bare real number is accepted too).
//! Blank lines and lines starting with `#` are ignored. Writing uses the shortest
//! representation that round-trips, so save/load is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{DenseOperator, C64};

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DenseOperator> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix(&text)
}

pub fn save_matrix(path: impl AsRef<Path>, op: &DenseOperator) -> Result<()> {
    std::fs::write(path, format_matrix(op)?)?;
    Ok(())
}

pub fn format_matrix(op: &DenseOperator) -> Result<String> {
    let mut out = format!("{} {}\n", op.rows(), op.cols());
    for i in 0..op.rows() {
        for j in 0..op.cols() {
            let z = op.get(i, j);
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidInput(format!("entry ({i},{j}) is not finite")));
            }
            if j > 0 {
                out.push(' ');
            }
            let sign = if z.im.is_sign_negative() { '-' } else { '+' };
            write!(out, "{}{}{}j", z.re, sign, z.im.abs()).expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_matrix(text: &str) -> Result<DenseOperator> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing `rows cols` header".into(),
    })?;
    let shape: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |s: &str| {
        s.parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| Error::Parse {
            line: header_line,
            message: format!("invalid dimension `{s}`"),
        })
    };
    if shape.len() != 2 {
        return Err(Error::Parse {
            line: header_line,
            message: format!("expected `rows cols`, found `{header}`"),
        });
    }
    let rows = parse_dim(shape[0])?;
    let cols = parse_dim(shape[1])?;

    let mut entries = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for (line_no, line) in lines {
        if seen_rows == rows {
            return Err(Error::Parse {
                line: line_no,
                message: format!("more than the declared {rows} rows"),
            });
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != cols {
            return Err(Error::Parse {
                line: line_no,
                message: format!("row has {} entries, expected {cols}", tokens.len()),
            });
        }
        for (col, tok) in tokens.iter().enumerate() {
            let z = parse_complex(tok).ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("column {}: cannot parse `{tok}` as a complex number", col + 1),
            })?;
            entries.push(z);
        }
        seen_rows += 1;
    }
    if seen_rows != rows {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: format!("found {seen_rows} rows, expected {rows}"),
        });
    }
    DenseOperator::from_row_major(rows, cols, entries)
}

/// Parses `re`, `re+imj`, `re-imj`, or `imj`.
fn parse_complex(tok: &str) -> Option<C64> {
    let Some(body) = tok.strip_suffix(['j', 'i']) else {
        return tok.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    // Split before the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().ok()?;
            let im = body[k..].parse::<f64>().ok()?;
            Some(C64::new(re, im))
        }
        None => body.parse::<f64>().ok().map(|im| C64::new(0.0, im)),
    }
}
