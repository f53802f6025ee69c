//! Dense square matrices as text: a header line `n <count>`, then one row
//! per line of whitespace-separated reals. `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::failure::Failure;

pub fn to_text(m: &DMatrix<f64>) -> String {
    let mut out = format!("n {}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse(text: &str, path: &Path) -> Result<DMatrix<f64>, Failure> {
    let err =
        |line: usize, msg: String| Failure::usage(format!("{}:{line}: {msg}", path.display()));
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (line, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?;
    let n: usize = header
        .strip_prefix("n ")
        .and_then(|c| c.trim().parse().ok())
        .ok_or_else(|| err(line, format!("expected `n <count>`, found {header:?}")))?;
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (line, text) in lines {
        let row: Vec<f64> = text
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| err(line, format!("{t:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != n {
            return Err(err(
                line,
                format!("expected {n} values, found {}", row.len()),
            ));
        }
        rows += 1;
        if rows > n {
            return Err(err(line, format!("more than {n} rows")));
        }
        data.extend(row);
    }
    if rows != n {
        return Err(err(
            text.lines().count(),
            format!("expected {n} rows, found {rows}"),
        ));
    }
    Ok(DMatrix::from_row_slice(n, n, &data))
}

pub fn read(path: &Path) -> Result<DMatrix<f64>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse(&text, path)
}
