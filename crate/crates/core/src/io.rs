//! File formats: symbol JSON, matrix/vector/singular-value CSV, and a JSON
//! writer with sorted keys and 17-significant-digit floats.

use std::io::{self, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::FourierSymbol;
use crate::Complex;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolFile {
    coefficients: Vec<CoefficientEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientEntry {
    n: i64,
    re: f64,
    im: f64,
}

/// Parses `{"coefficients": [{"n": .., "re": .., "im": ..}, ...]}`.
pub fn parse_symbol(text: &str) -> Result<FourierSymbol> {
    let file: SymbolFile = serde_json::from_str(text).map_err(|e| Error::SymbolFormat {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    FourierSymbol::from_coefficients(
        file.coefficients
            .into_iter()
            .map(|c| (c.n, Complex::new(c.re, c.im))),
    )
}

pub fn read_symbol(path: &std::path::Path) -> Result<FourierSymbol> {
    parse_symbol(&std::fs::read_to_string(path)?)
}

/// Serialises a symbol in ascending index order.
pub fn symbol_to_json(symbol: &FourierSymbol) -> String {
    let file = SymbolFile {
        coefficients: symbol
            .iter()
            .map(|(n, v)| CoefficientEntry {
                n,
                re: v.re,
                im: v.im,
            })
            .collect(),
    };
    to_json_string(&file).expect("symbol serialises")
}

/// `{:.16e}`: 17 significant digits, round-trip exact for `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".to_owned()
    } else if v > 0.0 {
        "inf".to_owned()
    } else {
        "-inf".to_owned()
    }
}

/// Compact JSON formatter that prints floats with 17 significant digits
/// (non-finite values become `null`).
struct FixedFloatFormatter;

impl serde_json::ser::Formatter for FixedFloatFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Deterministic JSON: object keys sorted, floats fixed-format.
pub fn to_json_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // Round-trip through Value so maps come out key-sorted; floats are kept
    // as f64 by serde_json and re-emitted through the formatter.
    let tree = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloatFormatter);
    tree.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("JSON is UTF-8"))
}

/// `n,m,re,im`, row-major over all `N²` entries.
pub fn matrix_to_csv(matrix: &DMatrix<Complex>) -> String {
    let mut out = String::from("n,m,re,im\n");
    for n in 0..matrix.nrows() {
        for m in 0..matrix.ncols() {
            let v = matrix[(n, m)];
            out.push_str(&format!(
                "{n},{m},{},{}\n",
                format_float(v.re),
                format_float(v.im)
            ));
        }
    }
    out
}

/// `k,re,im`.
pub fn vector_to_csv(values: &[Complex]) -> String {
    let mut out = String::from("k,re,im\n");
    for (k, v) in values.iter().enumerate() {
        out.push_str(&format!(
            "{k},{},{}\n",
            format_float(v.re),
            format_float(v.im)
        ));
    }
    out
}

/// `k,sigma_k` with 1-based `k`.
pub fn singular_values_to_csv(values: &[f64]) -> String {
    let mut out = String::from("k,sigma_k\n");
    for (k, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", k + 1, format_float(*v)));
    }
    out
}

fn csv_rows<'a>(
    text: &'a str,
    header: &str,
) -> Result<impl Iterator<Item = (usize, Vec<&'a str>)>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(Error::CsvFormat {
                line: 1,
                message: format!("expected header \"{header}\""),
            })
        }
    }
    Ok(lines.map(|(i, l)| (i + 1, l.split(',').map(str::trim).collect())))
}

fn field<T: std::str::FromStr>(line: usize, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::CsvFormat {
        line,
        message: format!("cannot parse \"{raw}\""),
    })
}

/// Reads `k,re,im`; rows may come in any order but must cover `0..len`.
pub fn parse_vector_csv(text: &str) -> Result<Vec<Complex>> {
    let mut entries = Vec::new();
    for (line, cols) in csv_rows(text, "k,re,im")? {
        if cols.len() != 3 {
            return Err(Error::CsvFormat {
                line,
                message: "expected 3 fields".into(),
            });
        }
        let k: usize = field(line, cols[0])?;
        entries.push((
            k,
            Complex::new(field(line, cols[1])?, field(line, cols[2])?),
            line,
        ));
    }
    let mut out = vec![None; entries.len()];
    for (k, v, line) in entries {
        match out.get_mut(k) {
            Some(slot @ None) => *slot = Some(v),
            _ => {
                return Err(Error::CsvFormat {
                    line,
                    message: format!("index {k} repeated or out of range"),
                })
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|v| v.expect("all slots filled"))
        .collect())
}

/// Reads a square `n,m,re,im` matrix; missing entries are zero.
pub fn parse_matrix_csv(text: &str, size: usize) -> Result<DMatrix<Complex>> {
    let mut out = DMatrix::from_element(size, size, Complex::new(0.0, 0.0));
    for (line, cols) in csv_rows(text, "n,m,re,im")? {
        if cols.len() != 4 {
            return Err(Error::CsvFormat {
                line,
                message: "expected 4 fields".into(),
            });
        }
        let n: usize = field(line, cols[0])?;
        let m: usize = field(line, cols[1])?;
        if n >= size || m >= size {
            return Err(Error::CsvFormat {
                line,
                message: format!("entry ({n},{m}) outside {size}x{size}"),
            });
        }
        out[(n, m)] = Complex::new(field(line, cols[2])?, field(line, cols[3])?);
    }
    Ok(out)
}
