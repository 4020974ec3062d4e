//! CSV and PNG output. Floats are written with `Display`, which prints the
//! shortest string that parses back to the same value, so CSV files
//! round-trip exactly and are byte-identical across runs.

use std::path::Path;

use image::{imageops, GrayImage, Luma};
use wavetomo_core::grid::boundary_index_set;
use wavetomo_core::{DNTrace, PotentialField, Sinogram, SpaceTimeGrid, SpatialGrid};

use crate::error::{CliError, Result};

fn parse_err(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Parse { path: path.into(), message: message.into() }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io { path: path.into(), source },
        other => parse_err(path, format!("{other:?}")),
    }
}

fn write_rows<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}

fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(path, format!("row {}: {e}", line + 2)))?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Wide layout: header `eta,<angle_1>,...`, one row per offset.
pub fn write_sinogram(path: &Path, sino: &Sinogram) -> Result<()> {
    let header: Vec<String> =
        std::iter::once("eta".to_string()).chain(sino.angles_deg().iter().map(|a| a.to_string())).collect();
    let rows = (0..sino.n_offsets())
        .map(|i| std::iter::once(sino.offsets()[i]).chain((0..sino.n_angles()).map(|a| sino.get(i, a))).collect());
    write_rows(path, &header, rows)
}

pub fn read_sinogram(path: &Path) -> Result<Sinogram> {
    let (header, rows) = read_rows(path)?;
    if header.first().map(String::as_str) != Some("eta") {
        return Err(parse_err(path, "sinogram header must start with `eta`"));
    }
    let angles = header[1..]
        .iter()
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| parse_err(path, format!("angle header: {e}")))?;
    if rows.iter().any(|r| r.len() != angles.len() + 1) {
        return Err(parse_err(path, "ragged sinogram rows"));
    }
    let offsets: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let columns: Vec<Vec<f64>> = (0..angles.len()).map(|a| rows.iter().map(|r| r[a + 1]).collect()).collect();
    Sinogram::from_columns(angles, offsets, &columns).map_err(|e| parse_err(path, e.to_string()))
}

/// Long layout `x1,x2,value`, `x2` varying fastest.
pub fn write_field(path: &Path, field: &PotentialField) -> Result<()> {
    let g = *field.grid();
    let header = ["x1", "x2", "value"].map(String::from);
    let rows = (1..=g.n1).flat_map(|i| (1..=g.n2).map(move |j| vec![g.x1(i), g.x2(j), field.get(i, j)]));
    write_rows(path, &header, rows)
}

pub fn read_field(path: &Path) -> Result<PotentialField> {
    let (header, rows) = read_rows(path)?;
    if header != ["x1", "x2", "value"] {
        return Err(parse_err(path, "field header must be `x1,x2,value`"));
    }
    let distinct = |col: usize| {
        let mut v: Vec<f64> = rows.iter().map(|r| r[col]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (xs, ys) = (distinct(0), distinct(1));
    if xs.len() < 2 || ys.len() < 2 || xs.len() * ys.len() != rows.len() {
        return Err(parse_err(path, "nodes do not form a full tensor grid"));
    }
    let grid = SpatialGrid::new(xs[0], xs[xs.len() - 1], ys[0], ys[ys.len() - 1], xs.len(), ys.len())
        .map_err(|e| parse_err(path, e.to_string()))?;
    let mut field = PotentialField::zeros(grid);
    for r in &rows {
        let i = xs.partition_point(|&x| x < r[0]) + 1;
        let j = ys.partition_point(|&y| y < r[1]) + 1;
        field.set(i, j, r[2]);
    }
    Ok(field)
}

/// Long layout `k,t,node,x1,x2,value` in boundary order.
pub fn write_dn(path: &Path, grid: &SpaceTimeGrid, dn: &DNTrace) -> Result<()> {
    let sp = grid.space;
    let points = boundary_index_set(sp.n1, sp.n2);
    let header = ["k", "t", "node", "x1", "x2", "value"].map(String::from);
    let rows = (0..grid.nt).flat_map(|k| {
        let level = dn.level(k);
        points
            .iter()
            .enumerate()
            .map(move |(b, p)| vec![k as f64, grid.time(k), b as f64, sp.x1(p.i), sp.x2(p.j), level[b]])
            .collect::<Vec<_>>()
    });
    write_rows(path, &header, rows)
}

/// Rows of a table of named columns.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    write_rows(path, &header, rows)
}

/// Grayscale image of a `rows x cols` array (row-major, row 0 at the top),
/// scaled to its own min/max and upscaled by an integer factor.
pub fn write_png(path: &Path, rows: usize, cols: usize, data: &[f64], scale: u32) -> Result<()> {
    let (lo, hi) = data.iter().filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
        (a.min(v), b.max(v))
    });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let img = GrayImage::from_fn(cols as u32, rows as u32, |c, r| {
        let v = data[r as usize * cols + c as usize];
        let level = if v.is_finite() { ((v - lo) / span * 255.0).round() } else { 0.0 };
        Luma([level.clamp(0.0, 255.0) as u8])
    });
    let img = imageops::resize(&img, cols as u32 * scale, rows as u32 * scale, imageops::FilterType::Nearest);
    img.save(path)?;
    Ok(())
}

/// `x1` to the right, `x2` up.
pub fn field_png(path: &Path, field: &PotentialField) -> Result<()> {
    let g = field.grid();
    let data: Vec<f64> =
        (1..=g.n2).rev().flat_map(|j| (1..=g.n1).map(move |i| field.get(i, j))).collect();
    write_png(path, g.n2, g.n1, &data, 4)
}

/// Angles to the right, offsets up.
pub fn sinogram_png(path: &Path, sino: &Sinogram) -> Result<()> {
    let (no, na) = (sino.n_offsets(), sino.n_angles());
    let data: Vec<f64> = (0..no).rev().flat_map(|i| (0..na).map(move |a| sino.get(i, a))).collect();
    write_png(path, no, na, &data, 4)
}
