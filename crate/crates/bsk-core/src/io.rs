//! The BSK1 text format for complex matrices and vectors, plus the flat
//! key-value serialization of reports.
//!
//! Layout: a header line `BSK1 <rows> <cols> <d>`, then one line per row
//! with whitespace-separated entries written as `re+imj` / `re-imj` with 17
//! significant digits. Vectors are single-column matrices.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::coherence::CoherenceReport;
use crate::error::{Error, Result};
use crate::types::{BlockMatrix, BlockShape, BlockVector};

fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.16e}{}{:.16e}j", z.re, sign, z.im.abs())
}

fn parse_complex(tok: &str, line: usize) -> Result<Complex64> {
    let body = tok
        .strip_suffix('j')
        .ok_or_else(|| Error::Parse { line, msg: format!("entry '{tok}' lacks trailing j") })?;
    // split at the sign separating re and im: a '+'/'-' that is neither the
    // leading sign nor part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i];
        if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
            split = Some(i);
            break;
        }
    }
    let i = split.ok_or_else(|| Error::Parse {
        line,
        msg: format!("entry '{tok}' has no imaginary part separator"),
    })?;
    let re: f64 = body[..i]
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("bad real part in '{tok}'") })?;
    let im: f64 = body[i..]
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("bad imaginary part in '{tok}'") })?;
    Ok(Complex64::new(re, im))
}

/// Write a block matrix in BSK1 format.
pub fn write_matrix(w: &mut impl Write, m: &BlockMatrix) -> Result<()> {
    writeln!(
        w,
        "BSK1 {} {} {}",
        m.nrows(),
        m.ncols(),
        m.col_shape().block_len()
    )?;
    for i in 0..m.nrows() {
        let mut line = String::new();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(' ');
            }
            let _ = write!(line, "{}", format_complex(m.entries()[(i, j)]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_matrix_file(path: impl AsRef<Path>, m: &BlockMatrix) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_matrix(&mut f, m)
}

/// Write a block vector as a single-column BSK1 matrix.
pub fn write_vector(w: &mut impl Write, x: &BlockVector) -> Result<()> {
    let m = BlockMatrix::new(
        BlockShape::new(1, 1)?,
        DMatrix::from_column_slice(x.values().len(), 1, x.values().as_slice()),
    )?;
    // header carries the vector's own block length
    writeln!(w, "BSK1 {} 1 {}", x.values().len(), x.shape().block_len())?;
    for i in 0..m.nrows() {
        writeln!(w, "{}", format_complex(m.entries()[(i, 0)]))?;
    }
    Ok(())
}

pub fn write_vector_file(path: impl AsRef<Path>, x: &BlockVector) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_vector(&mut f, x)
}

/// Read a BSK1 matrix. The column count must be a multiple of the header's
/// block length; rows are unconstrained.
pub fn read_matrix(r: &mut impl BufRead) -> Result<BlockMatrix> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "BSK1" {
        return Err(Error::Parse { line: 1, msg: "expected header 'BSK1 <rows> <cols> <d>'".into() });
    }
    let rows: usize = parts[1]
        .parse()
        .map_err(|_| Error::Parse { line: 1, msg: "bad row count".into() })?;
    let cols: usize = parts[2]
        .parse()
        .map_err(|_| Error::Parse { line: 1, msg: "bad column count".into() })?;
    let d: usize = parts[3]
        .parse()
        .map_err(|_| Error::Parse { line: 1, msg: "bad block length".into() })?;
    if d == 0 || cols == 0 || rows == 0 {
        return Err(Error::Parse { line: 1, msg: "rows, cols and d must be positive".into() });
    }
    let blocked_cols = if cols == 1 { rows } else { cols };
    if blocked_cols % d != 0 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("dimension {blocked_cols} not divisible by block length {d}"),
        });
    }
    let mut entries = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        let mut line = String::new();
        let read = r.read_line(&mut line)?;
        if read == 0 {
            return Err(Error::Parse { line: i + 2, msg: "unexpected end of file".into() });
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != cols {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("expected {cols} entries, found {}", toks.len()),
            });
        }
        for (j, tok) in toks.iter().enumerate() {
            entries[(i, j)] = parse_complex(tok, i + 2)?;
        }
    }
    let shape = if cols == 1 {
        // vector: block length applies to the rows; store as 1-column matrix
        BlockShape::new(1, 1)?
    } else {
        BlockShape::new(d, cols / d)?
    };
    if cols == 1 {
        return BlockMatrix::new(shape, entries);
    }
    BlockMatrix::new(shape, entries)
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<BlockMatrix> {
    let f = std::fs::File::open(path)?;
    read_matrix(&mut std::io::BufReader::new(f))
}

/// Read a BSK1 vector file: a single-column matrix whose header block length
/// partitions the rows.
pub fn read_vector(r: &mut impl BufRead) -> Result<BlockVector> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "BSK1" {
        return Err(Error::Parse { line: 1, msg: "expected header 'BSK1 <rows> 1 <d>'".into() });
    }
    let rows: usize = parts[1]
        .parse()
        .map_err(|_| Error::Parse { line: 1, msg: "bad row count".into() })?;
    let cols: usize = parts[2]
        .parse()
        .map_err(|_| Error::Parse { line: 1, msg: "bad column count".into() })?;
    let d: usize = parts[3]
        .parse()
        .map_err(|_| Error::Parse { line: 1, msg: "bad block length".into() })?;
    if cols != 1 {
        return Err(Error::Parse { line: 1, msg: "vector file must have exactly 1 column".into() });
    }
    if d == 0 || rows == 0 || rows % d != 0 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("vector length {rows} not divisible by block length {d}"),
        });
    }
    let mut values = DVector::zeros(rows);
    for i in 0..rows {
        let mut line = String::new();
        let read = r.read_line(&mut line)?;
        if read == 0 {
            return Err(Error::Parse { line: i + 2, msg: "unexpected end of file".into() });
        }
        let tok = line.trim();
        values[i] = parse_complex(tok, i + 2)?;
    }
    BlockVector::new(BlockShape::new(d, rows / d)?, values)
}

pub fn read_vector_file(path: impl AsRef<Path>) -> Result<BlockVector> {
    let f = std::fs::File::open(path)?;
    read_vector(&mut std::io::BufReader::new(f))
}

/// Flat key-value text serialization of a coherence report; block indices in
/// the optional CSV grid are 1-based.
pub fn coherence_report_text(r: &CoherenceReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mu = {:.12}", r.mu);
    let _ = writeln!(s, "mu_block = {:.12}", r.mu_block);
    let _ = writeln!(s, "d = {}", r.d);
    let _ = writeln!(s, "k_max_block = {}", r.k_max_block);
    let _ = writeln!(s, "k_max_conventional = {}", r.k_max_conventional);
    let _ = writeln!(
        s,
        "guaranteed_scalar_ratio = {:.6}",
        if r.k_max_conventional > 0 {
            (r.k_max_block * r.d) as f64 / r.k_max_conventional as f64
        } else {
            f64::INFINITY
        }
    );
    if !r.coherence_limited {
        let _ = writeln!(s, "note = k_max_block limited by uniqueness, not coherence");
    }
    s
}

/// CSV of the pairwise block spectral radius grid (1-based indices).
pub fn coherence_grid_csv(r: &CoherenceReport) -> String {
    let mut s = String::from("l,r,rho_over_d\n");
    for l in 0..r.grid.nrows() {
        for c in 0..r.grid.ncols() {
            let _ = writeln!(s, "{},{},{:.12}", l + 1, c + 1, r.grid[(l, c)]);
        }
    }
    s
}
