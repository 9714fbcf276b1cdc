//! Simulation output: legacy VTK snapshots and CSV tables.
//!
//! Numbers are written in scientific notation with 17 significant digits
//! so that files reload bit-exactly and are byte-identical across runs.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::assembly::Field;
use crate::domain::Mesh;
use crate::stepper::{ConvergenceTable, StepReport};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Legacy ASCII VTK unstructured grid with point arrays `theta` and
/// `moisture`.
pub fn write_vtk(mesh: &Mesh, field: &Field, path: &Path) -> io::Result<()> {
    let mut w = create(path)?;
    write_vtk_to(&mut w, mesh, field)?;
    w.flush()
}

pub fn write_vtk_to(w: &mut impl Write, mesh: &Mesh, field: &Field) -> io::Result<()> {
    if field.node_count() != mesh.node_count() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!(
                "field has {} nodes, mesh has {}",
                field.node_count(),
                mesh.node_count()
            ),
        ));
    }
    let n = mesh.node_count();
    let t = mesh.triangles.len();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "hygrotherm field")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    for p in &mesh.nodes {
        writeln!(w, "{} {} {}", num(p[0]), num(p[1]), num(0.0))?;
    }
    writeln!(w, "CELLS {t} {}", 4 * t)?;
    for tri in &mesh.triangles {
        let [a, b, c] = tri.nodes;
        writeln!(w, "3 {a} {b} {c}")?;
    }
    writeln!(w, "CELL_TYPES {t}")?;
    for _ in 0..t {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {n}")?;
    for (c, name) in ["theta", "moisture"].iter().enumerate() {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for p in 0..n {
            writeln!(w, "{}", num(field.get(p)[c]))?;
        }
    }
    Ok(())
}

/// Named nodal time series.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProbeSeries {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `values[p][k]` for probe `p` at `times[k]`.
    pub values: Vec<Vec<[f64; 2]>>,
}

pub fn write_probe_csv(series: &ProbeSeries, path: &Path) -> io::Result<()> {
    let mut w = create(path)?;
    let mut header = vec!["t_s".to_owned()];
    for name in &series.names {
        header.push(format!("{name}_theta"));
        header.push(format!("{name}_moisture"));
    }
    writeln!(w, "{}", header.join(","))?;
    for (k, &t) in series.times.iter().enumerate() {
        let mut row = vec![num(t)];
        for v in &series.values {
            row.push(num(v[k][0]));
            row.push(num(v[k][1]));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// One row per resolution; `order` is relative to the previous row when
/// exactly one of `h`, `h_t` changed.
pub fn write_convergence_report(table: &ConvergenceTable, path: &Path) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "h,h_t,error,order")?;
    let mut prev: Option<(f64, f64, f64)> = None;
    for r in &table.rows {
        let order = match prev {
            Some((h, ht, e)) if (h != r.h) != (ht != r.h_t) => {
                let ratio = if h != r.h { h / r.h } else { ht / r.h_t };
                format!("{:.6}", (e / r.error).ln() / ratio.ln())
            }
            _ => String::new(),
        };
        writeln!(w, "{},{},{},{order}", num(r.h), num(r.h_t), num(r.error))?;
        prev = Some((r.h, r.h_t, r.error));
    }
    w.flush()
}

/// Per-step diagnostics of a run.
pub fn write_step_report(times: &[f64], reports: &[StepReport], path: &Path) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(
        w,
        "step,t_s,picard_iters,max_ratio,last_delta,linear_residual,linear_iterations,mass1,mass2,energy,clamped"
    )?;
    for (k, (t, r)) in times.iter().zip(reports).enumerate() {
        let max_ratio = r
            .contraction_ratios
            .iter()
            .copied()
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            k + 1,
            num(*t),
            r.picard_iters,
            opt(max_ratio),
            opt(r.deltas.last().copied()),
            num(r.linear_residual),
            r.linear_iterations,
            num(r.mass[0]),
            num(r.mass[1]),
            opt(r.energy),
            r.clamped
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepper::ConvergenceRow;

    #[test]
    fn empty_probe_series_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        write_probe_csv(&ProbeSeries::default(), &p).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "t_s\n");
    }

    #[test]
    fn convergence_rows_carry_orders() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        let table = ConvergenceTable {
            rows: [(0.5, 4e-2), (0.25, 1e-2), (0.125, 2.5e-3)]
                .iter()
                .map(|&(h, error)| ConvergenceRow { h, h_t: 0.1, error })
                .collect(),
            ..Default::default()
        };
        write_convergence_report(&table, &p).unwrap();
        let text = std::fs::read_to_string(p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(','));
        assert!(lines[2].ends_with("2.000000"));
        assert!(lines[3].ends_with("2.000000"));
    }
}
