//! Plain-text sampled maps: a `halfmap-v1 N m` header followed by `N` rows of
//! `m` whitespace-separated samples.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::spectral::{Field, PeriodicGrid};
use crate::Scalar;

pub const MAGIC: &str = "halfmap-v1";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Renders `field` in the sampled-map format. Samples use the shortest
/// decimal that round-trips.
pub fn to_string<T: Scalar>(field: &Field<T>) -> String {
    let mut out = format!("{MAGIC} {} {}\n", field.len(), field.n_components());
    for k in 0..field.len() {
        let row: Vec<String> = field.at(k).iter().map(|v| v.to_f64_lossy().to_string()).collect();
        writeln!(out, "{}", row.join(" ")).expect("writing to a String");
    }
    out
}

pub fn write<T: Scalar>(field: &Field<T>, mut w: impl Write) -> std::io::Result<()> {
    w.write_all(to_string(field).as_bytes())
}

pub fn read<T: Scalar>(r: impl BufRead) -> Result<Field<T>> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header.map_err(|e| parse_err(1, e.to_string()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 3 || tokens[0] != MAGIC {
        return Err(parse_err(1, format!("expected `{MAGIC} N m`, found `{header}`")));
    }
    let n: usize = tokens[1]
        .parse()
        .map_err(|_| parse_err(1, format!("bad grid size `{}`", tokens[1])))?;
    let m: usize = tokens[2]
        .parse()
        .map_err(|_| parse_err(1, format!("bad component count `{}`", tokens[2])))?;
    if m == 0 {
        return Err(parse_err(1, "component count must be positive"));
    }
    let grid = PeriodicGrid::new(n).map_err(|e| parse_err(1, e.to_string()))?;

    let mut comps: Vec<Vec<T>> = (0..m).map(|_| Vec::with_capacity(n)).collect();
    let mut rows = 0;
    for (no, line) in lines {
        let line = line.map_err(|e| parse_err(no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        if rows == n {
            return Err(parse_err(no, format!("more than {n} rows")));
        }
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != m {
            return Err(parse_err(no, format!("expected {m} samples, found {}", vals.len())));
        }
        for (c, v) in comps.iter_mut().zip(vals) {
            let x: f64 = v.parse().map_err(|_| parse_err(no, format!("bad sample `{v}`")))?;
            if !x.is_finite() {
                return Err(parse_err(no, format!("non-finite sample `{v}`")));
            }
            c.push(T::lit(x));
        }
        rows += 1;
    }
    if rows != n {
        return Err(parse_err(rows + 2, format!("expected {n} rows, found {rows}")));
    }
    Field::from_components(&grid, comps)
}

pub fn load<T: Scalar>(path: &Path) -> Result<Field<T>> {
    let file = std::fs::File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    read(std::io::BufReader::new(file))
}

pub fn save<T: Scalar>(field: &Field<T>, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(field)).map_err(|e| invalid(format!("{}: {e}", path.display())))
}
