//! CSV serialization of series and kernels.
//!
//! Formats:
//! - functional series: header `t,node_0,...,node_{m-1}`, then one row
//!   per time index (t = 1..n);
//! - kernel matrix: m rows × m columns of plain numbers, no header.
//!
//! Values are written with Rust's shortest-round-trip float formatting,
//! so read(write(x)) reproduces x bit-for-bit. Reading reconstructs the
//! default uniform grid from the column count, as both formats carry
//! values only.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::func::{FunctionalSeries, Grid, KernelMatrix};

fn parse_field(tok: &str, line: usize) -> Result<f64> {
    tok.trim().parse::<f64>().map_err(|_| Error::CsvParse {
        line,
        message: format!("not a number: {tok:?}"),
    })
}

/// Writes a functional series in CSV form.
pub fn write_series_to<W: Write>(w: &mut W, series: &FunctionalSeries) -> Result<()> {
    let m = series.grid().len();
    let mut header = String::from("t");
    for j in 0..m {
        header.push_str(&format!(",node_{j}"));
    }
    writeln!(w, "{header}")?;
    for t in 0..series.len() {
        let mut line = format!("{}", t + 1);
        for v in series.row(t) {
            line.push_str(&format!(",{v}"));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_series<P: AsRef<Path>>(path: P, series: &FunctionalSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_series_to(&mut w, series)?;
    w.flush()?;
    Ok(())
}

/// Reads a functional series; the grid is reconstructed as the uniform
/// grid with as many nodes as there are `node_*` columns.
pub fn read_series_from<R: Read>(r: R) -> Result<FunctionalSeries> {
    let reader = BufReader::new(r);
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::CsvParse {
        line: 1,
        message: "empty input".into(),
    })?;
    let header = header?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first().map(|c| c.trim()) != Some("t") || cols.len() < 3 {
        return Err(Error::CsvParse {
            line: 1,
            message: "expected header `t,node_0,...`".into(),
        });
    }
    let m = cols.len() - 1;
    let grid = Grid::uniform(m);
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != m + 1 {
            return Err(Error::CsvParse {
                line: idx + 1,
                message: format!("expected {} fields, got {}", m + 1, fields.len()),
            });
        }
        parse_field(fields[0], idx + 1)?; // time index, value unused
        let mut row = Vec::with_capacity(m);
        for tok in &fields[1..] {
            row.push(parse_field(tok, idx + 1)?);
        }
        rows.push(row);
    }
    FunctionalSeries::from_rows(grid, rows)
}

pub fn read_series<P: AsRef<Path>>(path: P) -> Result<FunctionalSeries> {
    read_series_from(File::open(path)?)
}

/// Writes a kernel as an m×m table without header.
pub fn write_kernel_to<W: Write>(w: &mut W, kernel: &KernelMatrix) -> Result<()> {
    let e = kernel.entries();
    for i in 0..e.nrows() {
        let mut line = String::new();
        for j in 0..e.ncols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{}", e[(i, j)]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_kernel<P: AsRef<Path>>(path: P, kernel: &KernelMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_kernel_to(&mut w, kernel)?;
    w.flush()?;
    Ok(())
}

/// Reads an m×m kernel. If `grid` is given the size must match it and
/// the handle is shared; otherwise a uniform grid is reconstructed.
/// The result is a general (unflagged) kernel; symmetry, if needed, is
/// the caller's claim to make.
pub fn read_kernel_from<R: Read>(r: R, grid: Option<Arc<Grid>>) -> Result<KernelMatrix> {
    let reader = BufReader::new(r);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for tok in line.split(',') {
            row.push(parse_field(tok, idx + 1)?);
        }
        rows.push(row);
    }
    let m = rows.len();
    if m == 0 {
        return Err(Error::CsvParse {
            line: 1,
            message: "empty kernel".into(),
        });
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != m) {
        return Err(Error::CsvParse {
            line: bad + 1,
            message: format!("kernel must be square: row has {} of {m} columns", rows[bad].len()),
        });
    }
    let grid = match grid {
        Some(g) => {
            if g.len() != m {
                return Err(Error::InvalidShape(format!(
                    "kernel is {m}×{m} but grid has {} nodes",
                    g.len()
                )));
            }
            g
        }
        None => Grid::uniform(m),
    };
    let entries = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    KernelMatrix::new_general(grid, entries)
}

pub fn read_kernel<P: AsRef<Path>>(path: P, grid: Option<Arc<Grid>>) -> Result<KernelMatrix> {
    read_kernel_from(File::open(path)?, grid)
}
