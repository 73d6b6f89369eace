//! Lumped mass, nonlinear-coefficient P1 stiffness and lumped RT0 velocity
//! mass weights.
//!
//! The diffusion coefficient of the log-density scheme is
//! `γ(u) = m exp(m u)`, evaluated from the previous time level. Assembly
//! treats a vertex with `active[i] == false` as carrying density zero,
//! i.e. `γ = 0` there; restricting the resulting systems to active
//! unknowns is up to the caller.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{PmeError, Result};
use crate::geometry::EdgeGeometry;
use crate::math;
use crate::mesh::{CellKind, Mesh};
use crate::sparse::SparseSymMatrix;

/// Below this `|u_i - u_j|` the harmonic average uses the midpoint value.
pub const HARMONIC_BRANCH: f64 = 1e-10;

/// Diagonal of the vertex-lumped mass matrix: `|S_i|/(d+1)` on simplices,
/// `Σ_K |K|/4` on quads.
pub fn lumped_mass(mesh: &Mesh) -> Vec<f64> {
    let share = 1.0 / mesh.kind().vertices_per_cell() as f64;
    let mut mass = vec![0.0; mesh.num_vertices()];
    for k in 0..mesh.num_cells() {
        let w = mesh.cell_volume(k) * share;
        for &v in mesh.cell(k) {
            mass[v] += w;
        }
    }
    mass
}

/// Harmonic mean of `γ = m exp(m u)` along an edge on which `u` is linear
/// between `u_i` and `u_j`, in closed form.
pub fn harmonic_edge_average(u_i: f64, u_j: f64, m: f64) -> f64 {
    let delta = (u_j - u_i).abs();
    if delta > HARMONIC_BRANCH {
        // [m²Δ exp(m·min)] / [1 - exp(-mΔ)], stable for large Δ
        let low = u_i.min(u_j);
        m * m * delta * math::exp(m * low) / -math::expm1(-m * delta)
    } else {
        m * math::exp(0.5 * m * (u_i + u_j))
    }
}

/// Zero matrix on the vertex adjacency graph (all vertex pairs sharing a cell).
pub fn vertex_pattern(mesh: &Mesh) -> SparseSymMatrix {
    let mut pairs = Vec::new();
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        for a in 0..c.len() {
            for b in a + 1..c.len() {
                pairs.push((c[a], c[b]));
            }
        }
    }
    SparseSymMatrix::with_pattern(mesh.num_vertices(), pairs)
}

/// Gradients of the P1 hat functions of a simplex cell (constant per cell).
pub(crate) fn simplex_gradients(mesh: &Mesh, k: usize) -> [[f64; 2]; 3] {
    let c = mesh.cell(k);
    match mesh.kind() {
        CellKind::Interval => {
            let h = mesh.vertex(c[1])[0] - mesh.vertex(c[0])[0];
            [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0; 2]]
        }
        CellKind::Triangle => {
            let p = [mesh.vertex(c[0]), mesh.vertex(c[1]), mesh.vertex(c[2])];
            let two_a = 2.0 * mesh.cell_volume(k);
            let mut g = [[0.0; 2]; 3];
            for i in 0..3 {
                let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                g[i] = [(a[1] - b[1]) / two_a, (b[0] - a[0]) / two_a];
            }
            g
        }
        CellKind::Quad => unreachable!("quads have no constant gradients"),
    }
}

/// Gradient of the bilinear basis function of local vertex `i`, evaluated
/// at local corner `c` of an axis-aligned quad.
fn quad_corner_gradient(mesh: &Mesh, k: usize, i: usize, c: usize) -> [f64; 2] {
    let cell = mesh.cell(k);
    let pi = mesh.vertex(cell[i]);
    let pc = mesh.vertex(cell[c]);
    let (lo, hi) = cell.iter().fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), &v| {
        let p = mesh.vertex(v);
        ([lo[0].min(p[0]), lo[1].min(p[1])], [hi[0].max(p[0]), hi[1].max(p[1])])
    });
    // φ_i = ((x - x_o)/(x_i - x_o)) ((y - y_o)/(y_i - y_o)), o = opposite side
    let xo = if pi[0] == lo[0] { hi[0] } else { lo[0] };
    let yo = if pi[1] == lo[1] { hi[1] } else { lo[1] };
    let fx = if pc[0] == pi[0] { 1.0 } else { 0.0 };
    let fy = if pc[1] == pi[1] { 1.0 } else { 0.0 };
    [fy / (pi[0] - xo), fx / (pi[1] - yo)]
}

fn nodal_coefficient(u_prev: &[f64], active: &[bool], m: f64) -> Vec<f64> {
    u_prev
        .iter()
        .zip(active)
        .map(|(&u, &a)| if a { m * math::exp(m * u) } else { 0.0 })
        .collect()
}

fn check_lengths(mesh: &Mesh, u_prev: &[f64], active: &[bool]) -> Result<()> {
    for len in [u_prev.len(), active.len()] {
        if len != mesh.num_vertices() {
            return Err(PmeError::DimensionMismatch { expected: mesh.num_vertices(), found: len });
        }
    }
    Ok(())
}

/// Stiffness matrix of `∫ γ ∇φ_i·∇φ_j` with the coefficient integrated by
/// the vertex (trapezoidal) rule.
///
/// On simplices this is the element-mean of the nodal `γ` times the exact
/// constant-coefficient element matrix; on quads each corner contributes
/// `|K|/4 · γ(c) ∇φ_i(c)·∇φ_j(c)`.
pub fn stiffness_vertex_quadrature(mesh: &Mesh, u_prev: &[f64], active: &[bool], m: f64) -> Result<SparseSymMatrix> {
    check_lengths(mesh, u_prev, active)?;
    let gamma = nodal_coefficient(u_prev, active, m);
    let mut a = vertex_pattern(mesh);
    let nv = mesh.kind().vertices_per_cell();
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        let vol = mesh.cell_volume(k);
        if mesh.kind().is_simplex() {
            let g = simplex_gradients(mesh, k);
            let mean = c.iter().map(|&v| gamma[v]).sum::<f64>() / nv as f64;
            if mean == 0.0 {
                continue;
            }
            for i in 0..nv {
                for j in i + 1..nv {
                    let kij = vol * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    add_pair(&mut a, c[i], c[j], -mean * kij);
                }
            }
        } else {
            for corner in 0..4 {
                let gc = gamma[c[corner]];
                if gc == 0.0 {
                    continue;
                }
                let grads: Vec<[f64; 2]> = (0..4).map(|i| quad_corner_gradient(mesh, k, i, corner)).collect();
                for i in 0..4 {
                    for j in i + 1..4 {
                        let kij = 0.25 * vol * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
                        if kij != 0.0 {
                            add_pair(&mut a, c[i], c[j], -gc * kij);
                        }
                    }
                }
            }
        }
    }
    Ok(a)
}

/// Adds `w (e_i - e_j)(e_i - e_j)ᵀ`.
fn add_pair(a: &mut SparseSymMatrix, i: usize, j: usize, w: f64) {
    a.add(i, i, w);
    a.add(j, j, w);
    a.add(i, j, -w);
}

/// Edge-based stiffness `Σ_E ω_E γ̃_E (e_i - e_j)(e_i - e_j)ᵀ` with the
/// harmonic edge average `γ̃_E`.
///
/// In 1D the edges are the cells themselves with weight `1/|K|`. Edges
/// with an inactive endpoint contribute nothing (the harmonic mean with a
/// vanishing coefficient is zero). Quads are rejected.
pub fn stiffness_edge_based(
    mesh: &Mesh,
    geom: &EdgeGeometry,
    u_prev: &[f64],
    active: &[bool],
    m: f64,
) -> Result<SparseSymMatrix> {
    check_lengths(mesh, u_prev, active)?;
    let mut a = vertex_pattern(mesh);
    match mesh.kind() {
        CellKind::Quad => return Err(PmeError::UnsupportedCellKind("edge-based stiffness needs simplices")),
        CellKind::Interval => {
            for k in 0..mesh.num_cells() {
                let c = mesh.cell(k);
                let (i, j) = (c[0], c[1]);
                if active[i] && active[j] {
                    let w = harmonic_edge_average(u_prev[i], u_prev[j], m) / mesh.cell_volume(k);
                    add_pair(&mut a, i, j, w);
                }
            }
        }
        CellKind::Triangle => {
            for (f, face) in mesh.faces().iter().enumerate() {
                let [i, j] = face.vertices;
                let omega = geom.omega(f);
                if active[i] && active[j] && omega != 0.0 {
                    add_pair(&mut a, i, j, omega * harmonic_edge_average(u_prev[i], u_prev[j], m));
                }
            }
        }
    }
    Ok(a)
}

/// Diagonal of the lumped RT0 velocity mass matrix, one weight per face,
/// for unknowns given as normal velocity components `u·n_E`.
///
/// Triangles: `|E|² Σ_K ½ cot θ_E^K` (the cotangent rule applied to the
/// face flux `|E| u·n_E`). Quads and intervals: `Σ_K |K|/2`.
pub fn velocity_lumped_weights(mesh: &Mesh, geom: &EdgeGeometry) -> Vec<f64> {
    mesh.faces()
        .iter()
        .enumerate()
        .map(|(f, face)| match mesh.kind() {
            CellKind::Triangle => face.measure * face.measure * geom.omega(f),
            CellKind::Quad | CellKind::Interval => geom.omega(f),
        })
        .collect()
}
