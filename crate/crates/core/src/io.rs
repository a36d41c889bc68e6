//! CSV formats for grids, diagrams, point clouds and bifurcation plots.
//!
//! Floats are written with Rust's shortest round-trip formatting, so output is
//! byte-stable and re-reads to the same values. Essential deaths are written as
//! `-inf` / `inf`.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};

use crate::bifurcation::{BifurcationPlot, ErrorPlot, Provenance};
use crate::cloud::PointCloud;
use crate::diagram::{BettiVector, Direction, PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};
use crate::field::ScalarField2D;
use crate::scalar::Scalar;

const GRID_HEADER: &str = "# x_min y_min dx dy nx ny";

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid {what} `{}`", s.trim())))
}

/// Shortest round-trip text; exponent form outside `[1e-4, 1e16)`.
pub fn fmt_value<T: Scalar>(v: T) -> String {
    let a = v.abs();
    if v.is_finite() && a != T::zero() && (a < T::lit(1e-4) || a >= T::lit(1e16)) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r)
}

/// Two comment lines (names, then values) followed by `ny` rows of `nx` values;
/// row `iy = 0` (smallest y) first.
pub fn write_grid<T: Scalar, W: Write>(field: &ScalarField2D<T>, mut w: W) -> Result<()> {
    writeln!(w, "{GRID_HEADER}")?;
    writeln!(
        w,
        "# {} {} {} {} {} {}",
        field.x_min,
        field.y_min,
        field.dx,
        field.dy,
        field.nx(),
        field.ny()
    )?;
    let mut out = writer(w);
    for row in field.values().chunks(field.nx()) {
        out.write_record(row.iter().map(|&v| fmt_value(v)))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_grid<T: Scalar, R: Read>(r: R) -> Result<ScalarField2D<T>> {
    let mut header = None;
    let mut body = String::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        match line.trim_start().strip_prefix('#') {
            Some(comment) => {
                let fields: Vec<&str> = comment.split_whitespace().collect();
                if fields.len() == 6 && fields[0].parse::<f64>().is_ok() {
                    header = Some(fields.iter().map(|s| s.to_string()).collect::<Vec<_>>());
                }
            }
            None => {
                body.push_str(&line);
                body.push('\n');
            }
        }
    }
    let h = header.ok_or_else(|| {
        Error::Parse("grid CSV is missing the `# x_min y_min dx dy nx ny` values line".into())
    })?;
    let (x_min, y_min, dx, dy): (T, T, T, T) = (
        parse(&h[0], "x_min")?,
        parse(&h[1], "y_min")?,
        parse(&h[2], "dx")?,
        parse(&h[3], "dy")?,
    );
    let (nx, ny): (usize, usize) = (parse(&h[4], "nx")?, parse(&h[5], "ny")?);
    let mut values = Vec::with_capacity(nx * ny);
    for (i, rec) in reader(body.as_bytes()).records().enumerate() {
        let rec = rec?;
        if rec.len() != nx {
            return Err(Error::Parse(format!(
                "grid row {i} has {} values, expected {nx}",
                rec.len()
            )));
        }
        for v in rec.iter() {
            values.push(parse(v, "grid value")?);
        }
    }
    if values.len() != nx * ny {
        return Err(Error::Parse(format!(
            "grid has {} rows, expected {ny}",
            values.len() / nx.max(1)
        )));
    }
    ScalarField2D::new(x_min, y_min, dx, dy, nx, ny, values)
}

/// `dim,birth,death` with a header row, pairs in canonical order.
pub fn write_diagram<T: Scalar, W: Write>(diagram: &PersistenceDiagram<T>, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["dim", "birth", "death"])?;
    for p in diagram.canonical() {
        out.write_record([p.dim.to_string(), fmt_value(p.birth), fmt_value(p.death)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_diagram<T: Scalar, R: Read>(
    r: R,
    direction: Direction,
) -> Result<PersistenceDiagram<T>> {
    let mut diagram = PersistenceDiagram::new(direction);
    for (i, rec) in reader(r).records().enumerate() {
        let rec = rec?;
        if i == 0 && rec.get(0) == Some("dim") {
            continue;
        }
        if rec.len() != 3 {
            return Err(Error::Parse(format!(
                "diagram row {i} has {} fields, expected 3",
                rec.len()
            )));
        }
        diagram.pairs.push(PersistencePair {
            dim: parse(&rec[0], "dimension")?,
            birth: parse(&rec[1], "birth")?,
            death: parse(&rec[2], "death")?,
        });
    }
    Ok(diagram)
}

/// One point per row. Lines starting with `#` are comments; a first row that
/// does not parse as numbers is taken as a header.
pub fn read_points<T: Scalar, R: Read>(r: R) -> Result<PointCloud<T>> {
    let mut dim = None;
    let mut coords = Vec::new();
    for (i, rec) in reader(r).records().enumerate() {
        let rec = rec?;
        if rec.iter().all(|s| s.is_empty()) {
            continue;
        }
        if i == 0 && rec.get(0).is_some_and(|s| s.parse::<f64>().is_err()) {
            continue;
        }
        let d = *dim.get_or_insert(rec.len());
        if rec.len() != d {
            return Err(Error::Parse(format!(
                "point row {i} has {} coordinates, expected {d}",
                rec.len()
            )));
        }
        for v in rec.iter() {
            coords.push(parse(v, "coordinate")?);
        }
    }
    let dim = dim.ok_or_else(|| Error::Parse("point CSV has no rows".into()))?;
    PointCloud::new(dim, coords)
}

/// Header `x1,…,xd` then one point per row.
pub fn write_points<T: Scalar, W: Write>(cloud: &PointCloud<T>, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record((1..=cloud.dim()).map(|i| format!("x{i}")))?;
    for p in cloud.iter() {
        out.write_record(p.iter().map(|&v| fmt_value(v)))?;
    }
    out.flush()?;
    Ok(())
}

/// `dim,L,beta`, one row per (dimension, level).
pub fn write_betti_vectors<T: Scalar, W: Write>(vectors: &[BettiVector<T>], w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(["dim", "L", "beta"])?;
    for bv in vectors {
        for (l, b) in bv.levels.iter().zip(&bv.counts) {
            out.write_record([bv.dim.to_string(), fmt_value(*l), b.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Long format `<parameter>,L,dim,beta`, ordered by (dim, parameter, level).
pub fn write_plot<T: Scalar, W: Write>(plot: &BifurcationPlot<T>, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record([plot.parameter.as_str(), "L", "dim", "beta"])?;
    for (d, &dim) in plot.dims.iter().enumerate() {
        for (j, h) in plot.params.iter().enumerate() {
            for (k, l) in plot.levels.iter().enumerate() {
                out.write_record([
                    fmt_value(*h),
                    fmt_value(*l),
                    dim.to_string(),
                    plot.betti[d][j][k].to_string(),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Long format `<parameter>,L,dim,err`.
pub fn write_error_plot<T: Scalar, W: Write>(
    plot: &ErrorPlot<T>,
    parameter: &str,
    w: W,
) -> Result<()> {
    let mut out = writer(w);
    out.write_record([parameter, "L", "dim", "err"])?;
    for (d, &dim) in plot.dims.iter().enumerate() {
        for (j, h) in plot.params.iter().enumerate() {
            for (k, l) in plot.levels.iter().enumerate() {
                out.write_record([
                    fmt_value(*h),
                    fmt_value(*l),
                    dim.to_string(),
                    plot.err[d][j][k].to_string(),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Long-format table as read back: parameter name and `(param, level, dim, value)` rows.
pub struct LongTable<T> {
    pub parameter: String,
    pub value_column: String,
    pub params: Vec<T>,
    pub levels: Vec<T>,
    pub dims: Vec<usize>,
    /// `values[d][j][k]`
    pub values: Vec<Vec<Vec<i64>>>,
}

/// Reads a long-format plot or error CSV. Every (dim, parameter, level)
/// combination must appear exactly once.
pub fn read_long_table<T: Scalar, R: Read>(r: R) -> Result<LongTable<T>> {
    let mut records = reader(r).into_records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("plot CSV is empty".into()))??;
    if header.len() != 4 || &header[1] != "L" || &header[2] != "dim" {
        return Err(Error::Parse(format!(
            "plot CSV header must be `<parameter>,L,dim,<value>` (got `{}`)",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows: Vec<(T, T, usize, i64)> = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Parse(format!(
                "plot row {} has {} fields, expected 4",
                i + 1,
                rec.len()
            )));
        }
        rows.push((
            parse(&rec[0], "parameter")?,
            parse(&rec[1], "level")?,
            parse(&rec[2], "dimension")?,
            parse(&rec[3], "value")?,
        ));
    }
    if rows.is_empty() {
        return Err(Error::Parse("plot CSV has no data rows".into()));
    }
    let distinct = |f: &dyn Fn(&(T, T, usize, i64)) -> T| -> Vec<T> {
        let mut v: Vec<T> = rows.iter().map(f).collect();
        v.sort_by(crate::scalar::cmp);
        v.dedup();
        v
    };
    let params = distinct(&|r| r.0);
    let levels = distinct(&|r| r.1);
    let dims: Vec<usize> = rows
        .iter()
        .map(|r| r.2)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let find = |v: &[T], x: T| {
        v.iter()
            .position(|&y| y == x)
            .expect("value collected above")
    };
    let mut values = vec![vec![vec![None; levels.len()]; params.len()]; dims.len()];
    for &(h, l, d, b) in &rows {
        let slot = &mut values[dims
            .iter()
            .position(|&x| x == d)
            .expect("dim collected above")][find(&params, h)][find(&levels, l)];
        if slot.replace(b).is_some() {
            return Err(Error::Parse(format!(
                "duplicate plot entry at ({h}, {l}, {d})"
            )));
        }
    }
    let values = values
        .into_iter()
        .map(|m| {
            m.into_iter()
                .map(|c| c.into_iter().collect::<Option<Vec<_>>>())
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| {
            Error::Parse("plot CSV does not cover a full parameter × level grid".into())
        })?;
    Ok(LongTable {
        parameter: header[0].to_string(),
        value_column: header[3].to_string(),
        params,
        levels,
        dims,
        values,
    })
}

pub fn read_plot<T: Scalar, R: Read>(
    r: R,
    family: &str,
    provenance: Provenance,
) -> Result<BifurcationPlot<T>> {
    let t = read_long_table(r)?;
    let betti = t
        .values
        .into_iter()
        .map(|m| {
            m.into_iter()
                .map(|c| {
                    c.into_iter()
                        .map(|b| {
                            usize::try_from(b)
                                .map_err(|_| Error::Parse(format!("negative Betti number {b}")))
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(BifurcationPlot {
        family: family.to_string(),
        parameter: t.parameter,
        params: t.params,
        levels: t.levels,
        dims: t.dims,
        betti,
        provenance,
    })
}
