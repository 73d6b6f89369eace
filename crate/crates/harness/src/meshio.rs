//! Plain-text mesh files.
//!
//! ```text
//! dim ncells nverts kind
//! x [y]            # one line per vertex
//! v0 v1 [v2 [v3]]  # one line per cell, 0-based
//! ```

use std::fmt::Write as _;

use pme_core::mesh::{CellKind, Mesh};

use crate::error::{HarnessError, Result};

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::MeshFormat(msg.into())
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("empty file"))?.split_whitespace().collect();
    let [dim, ncells, nverts, kind] = header[..] else {
        return Err(bad("header must be `dim ncells nverts kind`"));
    };
    let parse = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("`{s}` is not a count")));
    let (dim, ncells, nverts) = (parse(dim)?, parse(ncells)?, parse(nverts)?);
    let kind = CellKind::from_name(kind).ok_or_else(|| bad(format!("unknown cell kind `{kind}`")))?;
    if kind.dim() != dim {
        return Err(bad(format!("{} cells are not {dim}-dimensional", kind.name())));
    }
    let mut vertices = Vec::with_capacity(nverts);
    for i in 0..nverts {
        let line = lines.next().ok_or_else(|| bad(format!("missing vertex {i}")))?;
        let c: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad(format!("vertex {i}: `{s}` is not a number"))))
            .collect::<Result<_>>()?;
        if c.len() != dim {
            return Err(bad(format!("vertex {i}: expected {dim} coordinates")));
        }
        vertices.push([c[0], if dim == 2 { c[1] } else { 0.0 }]);
    }
    let nv = kind.vertices_per_cell();
    let mut cells = Vec::with_capacity(ncells * nv);
    for k in 0..ncells {
        let line = lines.next().ok_or_else(|| bad(format!("missing cell {k}")))?;
        let ids: Vec<usize> = line.split_whitespace().map(parse).collect::<Result<_>>()?;
        if ids.len() != nv || ids.iter().any(|&v| v >= nverts) {
            return Err(bad(format!("cell {k}: expected {nv} vertex indices below {nverts}")));
        }
        cells.extend(ids);
    }
    if lines.next().is_some() {
        return Err(bad("trailing data after the last cell"));
    }
    Ok(Mesh::from_cells(kind, vertices, cells)?)
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let dim = mesh.dim();
    let mut s = format!("{dim} {} {} {}\n", mesh.num_cells(), mesh.num_vertices(), mesh.kind().name());
    for p in mesh.vertices() {
        let _ = match dim {
            1 => writeln!(s, "{:.16e}", p[0]),
            _ => writeln!(s, "{:.16e} {:.16e}", p[0], p[1]),
        };
    }
    for k in 0..mesh.num_cells() {
        let ids: Vec<String> = mesh.cell(k).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    s
}
