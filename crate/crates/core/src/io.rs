//! Plain-text kernel and proposal files.
//!
//! `VBK1`: the literal header, the state count `n`, one line with `pi`, then
//! `n` rows of the transition matrix. `VBQ1` is the same without the `pi`
//! line. Values are written with 17 significant digits so every `f64` round
//! trips exactly. Anything after the last expected value is an error.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::ReversibleKernel;
use crate::mh_finite::ProposalTable;

pub const KERNEL_MAGIC: &str = "VBK1";
pub const PROPOSAL_MAGIC: &str = "VBQ1";

/// Shortest-safe lossless form: 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            if !line.trim().is_empty() {
                return Ok((i + 1, line));
            }
        }
        Err(Error::Parse {
            line: 0,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }

    fn finish(mut self) -> Result<()> {
        match self.inner.find(|(_, l)| !l.trim().is_empty()) {
            Some((i, l)) => Err(Error::Parse {
                line: i + 1,
                msg: format!("trailing content {:?}", l.trim()),
            }),
            None => Ok(()),
        }
    }
}

fn parse_row(line: usize, text: &str, n: usize) -> Result<Vec<f64>> {
    let vals = parse_decimals(text).map_err(|msg| Error::Parse { line, msg })?;
    if vals.len() != n {
        return Err(Error::Parse {
            line,
            msg: format!("expected {n} values, found {}", vals.len()),
        });
    }
    Ok(vals)
}

fn parse_decimals(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("bad number {tok:?}"))
        })
        .collect()
}

fn parse_table(text: &str, magic: &str, with_pi: bool) -> Result<(Option<Vec<f64>>, DMatrix<f64>)> {
    let mut lines = Lines::new(text);
    let (ln, header) = lines.next("header")?;
    if header.trim() != magic {
        return Err(Error::Parse {
            line: ln,
            msg: format!("expected header {magic}, found {:?}", header.trim()),
        });
    }
    let (ln, count) = lines.next("state count")?;
    let n: usize = count.trim().parse().map_err(|_| Error::Parse {
        line: ln,
        msg: format!("bad state count {:?}", count.trim()),
    })?;
    let pi = if with_pi {
        let (ln, row) = lines.next("stationary law")?;
        Some(parse_row(ln, row, n)?)
    } else {
        None
    };
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let (ln, row) = lines.next("matrix row")?;
        for (j, v) in parse_row(ln, row, n)?.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    lines.finish()?;
    Ok((pi, m))
}

fn write_rows(out: &mut String, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

/// Parses a `VBK1` file body. The stored `pi` is validated, not re-solved.
pub fn parse_kernel(text: &str, tol: f64) -> Result<ReversibleKernel> {
    let (pi, p) = parse_table(text, KERNEL_MAGIC, true)?;
    ReversibleKernel::from_matrix_with_tol(p, pi, tol)
}

pub fn format_kernel(k: &ReversibleKernel) -> String {
    let mut out = format!("{KERNEL_MAGIC}\n{}\n", k.n());
    let pi: Vec<String> = k.pi().iter().map(|&v| fmt_f64(v)).collect();
    let _ = writeln!(out, "{}", pi.join(" "));
    write_rows(&mut out, k.table());
    out
}

pub fn parse_proposal(text: &str) -> Result<ProposalTable> {
    let (_, q) = parse_table(text, PROPOSAL_MAGIC, false)?;
    ProposalTable::new(q)
}

pub fn format_proposal(q: &ProposalTable) -> String {
    let mut out = format!("{PROPOSAL_MAGIC}\n{}\n", q.n());
    write_rows(&mut out, q.table());
    out
}

/// Whitespace-separated decimals (functionals and target weights).
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let vals = parse_decimals(text).map_err(|msg| Error::Parse { line: 0, msg })?;
    if vals.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no values".into(),
        });
    }
    Ok(vals)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_kernel(path: &Path, tol: f64) -> Result<ReversibleKernel> {
    parse_kernel(&read_to_string(path)?, tol)
}

pub fn write_kernel(path: &Path, k: &ReversibleKernel) -> Result<()> {
    std::fs::write(path, format_kernel(k)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_proposal(path: &Path) -> Result<ProposalTable> {
    parse_proposal(&read_to_string(path)?)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::DEFAULT_DB_TOL;

    const TWO_STATE: &str = "VBK1\n2\n0.6666666666666666 0.3333333333333333\n0.7 0.3\n0.6 0.4\n";

    #[test]
    fn parses_and_round_trips() {
        let k = parse_kernel(TWO_STATE, DEFAULT_DB_TOL).unwrap();
        assert_eq!(k.prob(0, 1), 0.3);
        let again = parse_kernel(&format_kernel(&k), DEFAULT_DB_TOL).unwrap();
        assert_eq!(again.table(), k.table());
        assert_eq!(again.pi(), k.pi());
    }

    #[test]
    fn rejects_trailing_garbage() {
        let text = format!("{TWO_STATE}extra\n");
        assert!(matches!(
            parse_kernel(&text, DEFAULT_DB_TOL),
            Err(Error::Parse { line: 6, .. })
        ));
        let short_row = "VBK1\n2\n0.5 0.5\n0.5 0.5 0.1\n0.5 0.5\n";
        assert!(matches!(
            parse_kernel(short_row, DEFAULT_DB_TOL),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn rejects_bad_headers_and_numbers() {
        assert!(parse_kernel("VBK2\n1\n1\n1\n", DEFAULT_DB_TOL).is_err());
        assert!(parse_kernel("VBK1\nx\n", DEFAULT_DB_TOL).is_err());
        assert!(parse_kernel("VBK1\n2\n0.5 nan\n0.5 0.5\n0.5 0.5\n", DEFAULT_DB_TOL).is_err());
        assert!(parse_kernel("VBK1\n2\n0.5 0.5\n0.5 0.5\n", DEFAULT_DB_TOL).is_err());
    }

    #[test]
    fn proposal_round_trip() {
        let q = parse_proposal("VBQ1\n2\n0.1 0.2\n0.3 0\n").unwrap();
        assert_eq!(parse_proposal(&format_proposal(&q)).unwrap(), q);
        assert!(parse_proposal("VBQ1\n2\n0.1 0.2\n0.3 0\n1\n").is_err());
    }

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("1 -2\n 3.5\n").unwrap(), vec![1.0, -2.0, 3.5]);
        assert!(parse_vector("1 two").is_err());
        assert!(parse_vector("  \n").is_err());
    }
}
