//! Fixed quadrature rules mapped onto mesh cells.

use alloc::vec::Vec;

use crate::error::{PmeError, Result};
use crate::math;
use crate::mesh::{CellKind, Mesh};

/// Highest polynomial degree the rules below integrate exactly on every
/// cell kind.
pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub x: [f64; 2],
    pub weight: f64,
    /// Values of the cell's nodal (P1 or bilinear) basis functions, in
    /// local vertex order.
    pub shape: [f64; 4],
}

const DUNAVANT4: [(f64, f64); 2] = [(0.445_948_490_915_965, 0.223_381_589_678_011), (0.091_576_213_509_771, 0.109_951_743_655_322)];

fn gauss3() -> [(f64, f64); 3] {
    let a = math::sqrt(0.6);
    [(-a, 5.0 / 9.0), (0.0, 8.0 / 9.0), (a, 5.0 / 9.0)]
}

/// Quadrature points of cell `k` exact for polynomials of `degree`
/// (at least 5 on intervals and quads, 4 on triangles).
pub fn cell_points(mesh: &Mesh, k: usize, degree: usize) -> Result<Vec<QuadPoint>> {
    if degree > MAX_DEGREE {
        return Err(PmeError::QuadratureDegree(degree));
    }
    let c = mesh.cell(k);
    let vol = mesh.cell_volume(k);
    let mut pts = Vec::new();
    match mesh.kind() {
        CellKind::Interval => {
            let (a, b) = (mesh.vertex(c[0])[0], mesh.vertex(c[1])[0]);
            for (s, w) in gauss3() {
                let l1 = 0.5 * (1.0 + s);
                pts.push(QuadPoint { x: [a + l1 * (b - a), 0.0], weight: 0.5 * w * vol, shape: [1.0 - l1, l1, 0.0, 0.0] });
            }
        }
        CellKind::Triangle => {
            let p = [mesh.vertex(c[0]), mesh.vertex(c[1]), mesh.vertex(c[2])];
            for (a, w) in DUNAVANT4 {
                let b = 1.0 - 2.0 * a;
                for lam in [[a, a, b], [a, b, a], [b, a, a]] {
                    let x = [
                        lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
                        lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
                    ];
                    pts.push(QuadPoint { x, weight: w * vol, shape: [lam[0], lam[1], lam[2], 0.0] });
                }
            }
        }
        CellKind::Quad => {
            let p: Vec<[f64; 2]> = c.iter().map(|&v| mesh.vertex(v)).collect();
            let lo = [p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min), p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min)];
            let hi = [p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max), p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max)];
            for (sx, wx) in gauss3() {
                for (sy, wy) in gauss3() {
                    let x = [lo[0] + 0.5 * (1.0 + sx) * (hi[0] - lo[0]), lo[1] + 0.5 * (1.0 + sy) * (hi[1] - lo[1])];
                    let mut shape = [0.0; 4];
                    for (i, q) in p.iter().enumerate() {
                        let xo = if q[0] == lo[0] { hi[0] } else { lo[0] };
                        let yo = if q[1] == lo[1] { hi[1] } else { lo[1] };
                        shape[i] = (x[0] - xo) / (q[0] - xo) * (x[1] - yo) / (q[1] - yo);
                    }
                    pts.push(QuadPoint { x, weight: 0.25 * wx * wy * vol, shape });
                }
            }
        }
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, BoxDomain, MeshKind};

    fn integrate(mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> f64 {
        (0..mesh.num_cells())
            .flat_map(|k| cell_points(mesh, k, 4).unwrap())
            .map(|q| q.weight * f(q.x))
            .sum()
    }

    #[test]
    fn exact_for_quartics() {
        let f = |x: [f64; 2]| x[0].powi(4) - 2.0 * x[0] * x[1].powi(3) + x[1] * x[1] + 1.0;
        // ∫_{[0,1]²} = 1/5 - 2·(1/2)(1/4) + 1/3 + 1
        let exact = 0.2 - 0.25 + 1.0 / 3.0 + 1.0;
        for kind in [MeshKind::Triangle, MeshKind::AcuteTriangle, MeshKind::Quad] {
            let m = build_structured_mesh(kind, BoxDomain::square(0.0, 1.0), &[3, 2]).unwrap();
            assert!((integrate(&m, f) - exact).abs() < 1e-13, "{kind:?}");
        }
        let m = build_structured_mesh(MeshKind::Interval, BoxDomain::interval(0.0, 2.0), &[3]).unwrap();
        assert!((integrate(&m, |x| x[0].powi(5)) - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn shapes_interpolate_coordinates() {
        for kind in [MeshKind::Triangle, MeshKind::Quad] {
            let m = build_structured_mesh(kind, BoxDomain::square(-1.0, 2.0), &[2, 2]).unwrap();
            for k in 0..m.num_cells() {
                for q in cell_points(&m, k, 4).unwrap() {
                    let c = m.cell(k);
                    let xs: f64 = c.iter().enumerate().map(|(i, &v)| q.shape[i] * m.vertex(v)[0]).sum();
                    let ys: f64 = c.iter().enumerate().map(|(i, &v)| q.shape[i] * m.vertex(v)[1]).sum();
                    assert!((xs - q.x[0]).abs() < 1e-14 && (ys - q.x[1]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn degree_limit() {
        let m = build_structured_mesh(MeshKind::Interval, BoxDomain::interval(0.0, 1.0), &[1]).unwrap();
        assert!(matches!(cell_points(&m, 0, 5), Err(PmeError::QuadratureDegree(5))));
    }
}
