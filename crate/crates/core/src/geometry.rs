//! Per-face weights shared by both schemes.
//!
//! On triangles the weight of face `E` in cell `K` is `½ cot θ_E^K`, with
//! `θ_E^K` the angle of `K` opposite `E`; summed over the incident cells
//! this is the cotangent-formula coefficient of the P1 Laplacian. On
//! axis-aligned quads and on intervals the weight is `|K|/2`, the
//! trapezoidal lumping of the lowest-order Raviart-Thomas mass matrix.

use alloc::vec::Vec;

use crate::error::{PmeError, Result};
use crate::math;
use crate::mesh::{CellKind, Mesh};

/// Default tolerance of [`is_delaunay`].
pub const DELAUNAY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FaceWeights {
    /// `ω_E^K` for the first and (if interior) second incident cell.
    pub per_cell: [f64; 2],
    /// Angle opposite the face in each incident triangle; zero elsewhere.
    pub angles: [f64; 2],
    /// `ω_E = Σ_K ω_E^K`.
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct EdgeGeometry {
    kind: CellKind,
    faces: Vec<FaceWeights>,
}

impl EdgeGeometry {
    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn face(&self, f: usize) -> &FaceWeights {
        &self.faces[f]
    }

    pub fn faces(&self) -> &[FaceWeights] {
        &self.faces
    }

    /// Aggregated weight `ω_E`.
    pub fn omega(&self, f: usize) -> f64 {
        self.faces[f].total
    }
}

/// Angle at `apex` of the triangle `(apex, p, q)` and its cotangent.
fn corner(apex: [f64; 2], p: [f64; 2], q: [f64; 2]) -> (f64, f64) {
    let a = [p[0] - apex[0], p[1] - apex[1]];
    let b = [q[0] - apex[0], q[1] - apex[1]];
    let dot = a[0] * b[0] + a[1] * b[1];
    let cross = (a[0] * b[1] - a[1] * b[0]).abs();
    let norms = math::sqrt(a[0] * a[0] + a[1] * a[1]) * math::sqrt(b[0] * b[0] + b[1] * b[1]);
    let angle = math::acos((dot / norms).clamp(-1.0, 1.0));
    (angle, dot / cross)
}

pub fn compute_edge_geometry(mesh: &Mesh) -> Result<EdgeGeometry> {
    let kind = mesh.kind();
    let mut faces: Vec<FaceWeights> = (0..mesh.num_faces())
        .map(|_| FaceWeights { per_cell: [0.0; 2], angles: [0.0; 2], total: 0.0 })
        .collect();

    for k in 0..mesh.num_cells() {
        if !(mesh.cell_volume(k) > 0.0) {
            return Err(PmeError::DegenerateCell { cell: k });
        }
        let verts = mesh.cell(k);
        for (j, &f) in mesh.cell_faces(k).iter().enumerate() {
            let slot = if mesh.face(f).cells.0 == k { 0 } else { 1 };
            let (angle, weight) = match kind {
                CellKind::Triangle => {
                    let p = |i: usize| mesh.vertex(verts[i % 3]);
                    let (angle, cot) = corner(p(j), p(j + 1), p(j + 2));
                    if !cot.is_finite() {
                        return Err(PmeError::DegenerateCell { cell: k });
                    }
                    (angle, 0.5 * cot)
                }
                CellKind::Quad | CellKind::Interval => (0.0, 0.5 * mesh.cell_volume(k)),
            };
            faces[f].per_cell[slot] = weight;
            faces[f].angles[slot] = angle;
        }
    }
    for w in &mut faces {
        w.total = w.per_cell[0] + w.per_cell[1];
    }
    Ok(EdgeGeometry { kind, faces })
}

/// Delaunay test on the aggregated weights.
///
/// Non-strict: every `ω_E >= -tolerance`. Strict: every interior
/// `ω_E > tolerance`. Quad and interval meshes always pass.
pub fn is_delaunay(mesh: &Mesh, geom: &EdgeGeometry, strict: bool, tolerance: f64) -> bool {
    if geom.kind() != CellKind::Triangle {
        return true;
    }
    geom.faces().iter().zip(mesh.faces()).all(|(w, f)| {
        if strict {
            f.is_boundary() || w.total > tolerance
        } else {
            w.total >= -tolerance
        }
    })
}
