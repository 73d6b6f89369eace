//! CSV time series, convergence tables and legacy VTK snapshots.
//!
//! Floating point values are written with 17 significant digits so files
//! round-trip exactly.

use std::io::{self, Write};

use pme_core::logdensity::LogDensityState;
use pme_core::mesh::{CellKind, Mesh};
use pme_core::mixed::MixedState;

use crate::run::{ConvergenceRow, TimeSeriesRecord};

pub const TIMESERIES_HEADER: &str = "step,time,mass,energy,min_density,max_density,tracked_density,cfl_bound";
pub const CONVERGENCE_HEADER: &str = "level,N,dt,error_inner,order_inner,error_full,order_full";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn write_timeseries_csv(w: &mut dyn Write, records: &[TimeSeriesRecord]) -> io::Result<()> {
    writeln!(w, "{TIMESERIES_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.step,
            num(r.time),
            num(r.mass),
            num(r.energy),
            num(r.min_density),
            num(r.max_density),
            opt(r.tracked_density),
            opt(r.cfl_bound)
        )?;
    }
    Ok(())
}

pub fn write_convergence_csv(w: &mut dyn Write, rows: &[ConvergenceRow]) -> io::Result<()> {
    writeln!(w, "{CONVERGENCE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.level,
            r.n,
            num(r.dt),
            num(r.error_inner),
            opt(r.order_inner),
            num(r.error_full),
            opt(r.order_full)
        )?;
    }
    Ok(())
}

fn vtk_cell_type(kind: CellKind) -> u8 {
    match kind {
        CellKind::Interval => 3,
        CellKind::Triangle => 5,
        CellKind::Quad => 9,
    }
}

fn write_grid(w: &mut dyn Write, mesh: &Mesh, title: &str) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.num_vertices())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} 0", num(p[0]), num(p[1]))?;
    }
    let nv = mesh.kind().vertices_per_cell();
    writeln!(w, "CELLS {} {}", mesh.num_cells(), mesh.num_cells() * (nv + 1))?;
    for k in 0..mesh.num_cells() {
        let ids: Vec<String> = mesh.cell(k).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{nv} {}", ids.join(" "))?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.num_cells())?;
    let t = vtk_cell_type(mesh.kind());
    for _ in 0..mesh.num_cells() {
        writeln!(w, "{t}")?;
    }
    Ok(())
}

fn write_scalars(w: &mut dyn Write, name: &str, values: impl Iterator<Item = f64>) -> io::Result<()> {
    writeln!(w, "SCALARS {name} double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in values {
        writeln!(w, "{}", num(v))?;
    }
    Ok(())
}

/// Nodal density `exp(u)` (zero on inactive vertices) as POINT_DATA.
pub fn write_vtk_nodal(w: &mut dyn Write, mesh: &Mesh, state: &LogDensityState) -> io::Result<()> {
    write_grid(w, mesh, &format!("logdensity t={}", num(state.time)))?;
    writeln!(w, "POINT_DATA {}", mesh.num_vertices())?;
    write_scalars(w, "density", (0..mesh.num_vertices()).map(|i| state.density(i)))
}

/// Cell density and potential as CELL_DATA.
pub fn write_vtk_cells(w: &mut dyn Write, mesh: &Mesh, state: &MixedState) -> io::Result<()> {
    write_grid(w, mesh, &format!("mixed t={}", num(state.time)))?;
    writeln!(w, "CELL_DATA {}", mesh.num_cells())?;
    write_scalars(w, "density", state.rho.iter().copied())?;
    write_scalars(w, "potential", state.mu.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_is_header_only() {
        let mut buf = Vec::new();
        write_timeseries_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{TIMESERIES_HEADER}\n"));
    }

    #[test]
    fn seventeen_digits_round_trip() {
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
        assert_eq!(num(1.0 / 3.0), "3.3333333333333331e-1");
    }

    #[test]
    fn blank_optional_fields() {
        let r = TimeSeriesRecord {
            step: 1,
            time: 0.5,
            mass: 1.0,
            energy: -1.0,
            min_density: 0.0,
            max_density: 2.0,
            tracked_density: None,
            cfl_bound: None,
        };
        let mut buf = Vec::new();
        write_timeseries_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",,"));
    }
}
