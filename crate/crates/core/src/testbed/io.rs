//! Matrix Market text files and a raw little-endian binary format.
//!
//! Matrix Market support covers `array` (column-major values, `general`)
//! and `coordinate` (`general` or `symmetric`) with `real` or `integer`
//! fields. Coordinate indices are 1-based and duplicate entries are summed.
//!
//! The raw format is a 24-byte header (magic, rows, cols as little-endian
//! `u64`) followed by the entries as little-endian `f64` in row-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{CurError, Result};
use crate::matrix::DenseMatrix;

/// `b"CURKITMX"` read as a little-endian `u64`.
pub const RAW_MAGIC: u64 = u64::from_le_bytes(*b"CURKITMX");

fn parse_err(line: usize, msg: impl Into<String>) -> CurError {
    CurError::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(PartialEq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(PartialEq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_header(line: &str) -> Result<(Layout, Symmetry)> {
    let fields: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected `%%MatrixMarket matrix <format> <field> <symmetry>`",
        ));
    }
    let layout = match fields[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(parse_err(1, format!("unknown format `{other}`"))),
    };
    match fields[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(parse_err(1, format!("unsupported field type `{other}`"))),
    }
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" if layout == Layout::Coordinate => Symmetry::Symmetric,
        other => {
            return Err(parse_err(
                1,
                format!("unsupported symmetry `{other}` for this format"),
            ))
        }
    };
    Ok((layout, symmetry))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("bad value `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<DenseMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let (layout, symmetry) = parse_header(&header?)?;

    // Remaining non-comment, non-blank lines.
    let mut body = lines.filter_map(|(no, l)| match l {
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('%') {
                None
            } else {
                Some(Ok((no, t.to_string())))
            }
        }
        Err(e) => Some(Err(CurError::from(e))),
    });

    let (size_no, size_line) = body
        .next()
        .ok_or_else(|| parse_err(2, "missing size line"))??;
    let size: Vec<&str> = size_line.split_whitespace().collect();
    let (rows, cols, nnz) = match (&layout, size.as_slice()) {
        (Layout::Array, [m, n]) => (
            parse_usize(m, size_no, "row count")?,
            parse_usize(n, size_no, "column count")?,
            None,
        ),
        (Layout::Coordinate, [m, n, z]) => (
            parse_usize(m, size_no, "row count")?,
            parse_usize(n, size_no, "column count")?,
            Some(parse_usize(z, size_no, "entry count")?),
        ),
        _ => return Err(parse_err(size_no, "malformed size line")),
    };
    if rows == 0 || cols == 0 {
        return Err(parse_err(size_no, format!("empty {rows}x{cols} matrix")));
    }
    if symmetry == Symmetry::Symmetric && rows != cols {
        return Err(parse_err(size_no, "symmetric matrix must be square"));
    }

    let mut out = DenseMatrix::zeros(rows, cols);
    let mut last_no = size_no;
    match nnz {
        None => {
            let total = rows * cols;
            let mut k = 0;
            for item in body {
                let (no, line) = item?;
                last_no = no;
                for tok in line.split_whitespace() {
                    if k == total {
                        return Err(parse_err(no, "more values than rows x cols"));
                    }
                    // column-major
                    out.set(k % rows, k / rows, parse_f64(tok, no)?);
                    k += 1;
                }
            }
            if k != total {
                return Err(parse_err(
                    last_no,
                    format!("expected {total} values, found {k}"),
                ));
            }
        }
        Some(nnz) => {
            let mut seen = 0;
            for item in body {
                let (no, line) = item?;
                last_no = no;
                let toks: Vec<&str> = line.split_whitespace().collect();
                let [i, j, v] = toks.as_slice() else {
                    return Err(parse_err(no, "expected `row col value`"));
                };
                if seen == nnz {
                    return Err(parse_err(no, "more entries than declared"));
                }
                let i = parse_usize(i, no, "row index")?;
                let j = parse_usize(j, no, "column index")?;
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(parse_err(
                        no,
                        format!("index ({i}, {j}) outside a {rows}x{cols} matrix"),
                    ));
                }
                let v = parse_f64(v, no)?;
                let (r, c) = (i - 1, j - 1);
                out.set(r, c, out.get(r, c) + v);
                if symmetry == Symmetry::Symmetric && r != c {
                    out.set(c, r, out.get(c, r) + v);
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(
                    last_no,
                    format!("expected {nnz} entries, found {seen}"),
                ));
            }
        }
    }
    if !out.is_finite() {
        return Err(parse_err(last_no, "summed entries overflowed"));
    }
    Ok(out)
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

/// Writes `array real general`; values use the shortest representation
/// that parses back to the same bits.
pub fn write_matrix_market<W: Write>(m: &DenseMatrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            writeln!(w, "{:e}", m.get(i, j))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_matrix_market(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_market(m, BufWriter::new(File::create(path)?))
}

pub fn read_raw<R: Read>(mut r: R) -> Result<DenseMatrix> {
    let mut word = [0u8; 8];
    let mut next_u64 = |r: &mut R| -> Result<u64> {
        r.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    if next_u64(&mut r)? != RAW_MAGIC {
        return Err(CurError::param("raw matrix", "bad magic number"));
    }
    let rows = next_u64(&mut r)?;
    let cols = next_u64(&mut r)?;
    let too_big = || CurError::param("raw matrix", format!("{rows}x{cols} is too large"));
    let rows = usize::try_from(rows).map_err(|_| too_big())?;
    let cols = usize::try_from(cols).map_err(|_| too_big())?;
    let len = rows.checked_mul(cols).ok_or_else(too_big)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != len.checked_mul(8).ok_or_else(too_big)? {
        return Err(CurError::param(
            "raw matrix",
            format!("{} payload bytes for a {rows}x{cols} matrix", bytes.len()),
        ));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    DenseMatrix::new(rows, cols, data)
}

pub fn write_raw<W: Write>(m: &DenseMatrix, mut w: W) -> Result<()> {
    w.write_all(&RAW_MAGIC.to_le_bytes())?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_raw(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_raw(BufReader::new(File::open(path)?))
}

pub fn save_raw(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_raw(m, BufWriter::new(File::create(path)?))
}

/// Loads a matrix by sniffing the raw magic; anything else is read as
/// Matrix Market.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let mut f = BufReader::new(File::open(path.as_ref())?);
    let is_raw = f.fill_buf()?.starts_with(&RAW_MAGIC.to_le_bytes());
    if is_raw {
        read_raw(f)
    } else {
        read_matrix_market(f)
    }
}
