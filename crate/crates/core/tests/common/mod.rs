#![allow(dead_code)]

use pme_core::mesh::{build_structured_mesh, BoxDomain, CellKind, Mesh, MeshKind};

/// The fixed meshes every structural test runs on.
pub fn test_meshes() -> Vec<(&'static str, Mesh)> {
    vec![
        ("interval", build_structured_mesh(MeshKind::Interval, BoxDomain::interval(-1.0, 2.0), &[9]).unwrap()),
        ("triangle", build_structured_mesh(MeshKind::Triangle, BoxDomain { lo: [0.0, 0.0], hi: [1.0, 1.5] }, &[4, 5]).unwrap()),
        ("acute", build_structured_mesh(MeshKind::AcuteTriangle, BoxDomain::square(-1.0, 1.0), &[5, 6]).unwrap()),
        ("quad", build_structured_mesh(MeshKind::Quad, BoxDomain { lo: [0.0, -1.0], hi: [2.0, 1.0] }, &[5, 4]).unwrap()),
        ("jittered", jittered_acute(5, 6, &[0.13, -0.07, 0.2, -0.18, 0.05, 0.11, -0.2, 0.16, -0.02])),
    ]
}

/// Acute mesh of `[-1, 1]²` with interior vertices moved by up to a fifth
/// of the spacing, cycling through `offsets`.
pub fn jittered_acute(nx: usize, ny: usize, offsets: &[f64]) -> Mesh {
    let base = build_structured_mesh(MeshKind::AcuteTriangle, BoxDomain::square(-1.0, 1.0), &[nx, ny]).unwrap();
    let h = 2.0 / nx as f64;
    let (lo, hi) = base.bounding_box();
    let mut verts = base.vertices().to_vec();
    let mut c = 0;
    for p in verts.iter_mut() {
        let interior = (0..2).all(|d| p[d] > lo[d] + 1e-12 && p[d] < hi[d] - 1e-12);
        if interior {
            p[0] += offsets[c % offsets.len()] * h;
            p[1] += offsets[(c + 3) % offsets.len()] * h;
            c += 1;
        }
    }
    let cells: Vec<usize> = (0..base.num_cells()).flat_map(|k| base.cell(k).to_vec()).collect();
    Mesh::from_cells(CellKind::Triangle, verts, cells).unwrap()
}

/// Dense P1 stiffness `∫ ∇φ_i·∇φ_j` assembled element by element from
/// vertex coordinates.
pub fn p1_stiffness(mesh: &Mesh) -> Vec<Vec<f64>> {
    let n = mesh.num_vertices();
    let mut a = vec![vec![0.0; n]; n];
    for k in 0..mesh.num_cells() {
        let c = mesh.cell(k);
        match mesh.kind() {
            CellKind::Interval => {
                let h = (mesh.vertex(c[1])[0] - mesh.vertex(c[0])[0]).abs();
                for (p, q, s) in [(0, 0, 1.0), (1, 1, 1.0), (0, 1, -1.0), (1, 0, -1.0)] {
                    a[c[p]][c[q]] += s / h;
                }
            }
            CellKind::Triangle => {
                let p: Vec<[f64; 2]> = c.iter().map(|&v| mesh.vertex(v)).collect();
                // rows of B⁻¹ are the gradients of φ_1, φ_2
                let b = [[p[1][0] - p[0][0], p[2][0] - p[0][0]], [p[1][1] - p[0][1], p[2][1] - p[0][1]]];
                let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
                let g1 = [b[1][1] / det, -b[0][1] / det];
                let g2 = [-b[1][0] / det, b[0][0] / det];
                let g = [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2];
                let area = 0.5 * det.abs();
                for i in 0..3 {
                    for j in 0..3 {
                        a[c[i]][c[j]] += area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                    }
                }
            }
            CellKind::Quad => panic!("P1 oracle is for simplices"),
        }
    }
    a
}

/// Bisection on `[lo, hi]` for a sign change of `f`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
