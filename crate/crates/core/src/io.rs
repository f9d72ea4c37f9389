//! Text formats: fixed-precision reals for CSV and the two-column field file.

use std::io::Read;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Significant digits of reals written to CSV.
pub const CSV_DIGITS: usize = 10;

/// `x` rounded to ten significant digits, in plain decimal notation when the
/// exponent is in [−5, 15) and scientific otherwise, without trailing zeros.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", CSV_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if !(-5..15).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let body = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    } else {
        let int_len = exp as usize + 1;
        if digits.len() <= int_len {
            format!("{}{}", digits, "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    };
    format!("{sign}{body}")
}

/// One CSV row of reals.
pub fn format_row(values: &[f64]) -> String {
    values.iter().map(|v| format_real(*v)).collect::<Vec<_>>().join(",")
}

/// Reads a two-column "x,u" CSV (header optional, `#` lines ignored) whose
/// x column must equal the grid nodes exactly, either as numbers or as the
/// text [`format_real`] writes for them.
pub fn read_field_csv(reader: impl Read, grid: Grid) -> Result<Field> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::with_capacity(grid.n_nodes());
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidInput(format!("field file: {e}")))?;
        if record.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "field file row {} has {} columns, expected 2",
                line + 1,
                record.len()
            )));
        }
        let (x, u) = match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(u)) => (x, u),
            _ if line == 0 => continue,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "field file row {}: cannot parse {:?}",
                    line + 1,
                    record.iter().collect::<Vec<_>>()
                )))
            }
        };
        let i = values.len();
        if i >= grid.n_nodes() {
            return Err(Error::InvalidInput(format!(
                "field file has more than the {} grid nodes",
                grid.n_nodes()
            )));
        }
        if x != grid.x(i) && record[0] != format_real(grid.x(i)) {
            return Err(Error::InvalidInput(format!(
                "field file node {i}: x = {x} does not match grid node {}",
                grid.x(i)
            )));
        }
        values.push(u);
    }
    if values.len() != grid.n_nodes() {
        return Err(Error::InvalidInput(format!(
            "field file has {} nodes, grid has {}",
            values.len(),
            grid.n_nodes()
        )));
    }
    Field::from_values(grid, values)
}
