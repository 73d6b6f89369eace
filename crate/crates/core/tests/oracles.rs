mod common;

use common::{bisect, p1_stiffness, test_meshes};
use pme_core::assembly::{stiffness_edge_based, stiffness_vertex_quadrature};
use pme_core::geometry::compute_edge_geometry;
use pme_core::logdensity::{LogDensityScheme, LogDensityState, NewtonOptions, StiffnessVariant};
use pme_core::mesh::{build_structured_mesh, BoxDomain, CellKind, MeshKind};
use pme_core::mixed::{MixedOptions, MixedScheme};
use pme_core::problems::barenblatt;

#[test]
fn constant_coefficient_stiffness_matches_p1() {
    let m: f64 = 2.5;
    let c: f64 = -0.3;
    let gamma = m * (m * c).exp();
    for (name, mesh) in test_meshes() {
        if mesh.kind() == CellKind::Quad {
            continue;
        }
        let geom = compute_edge_geometry(&mesh).unwrap();
        let n = mesh.num_vertices();
        let u = vec![c; n];
        let act = vec![true; n];
        let exact = p1_stiffness(&mesh);
        let vq = stiffness_vertex_quadrature(&mesh, &u, &act, m).unwrap();
        let eb = stiffness_edge_based(&mesh, &geom, &u, &act, m).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = gamma * exact[i][j];
                assert!((vq.get(i, j) - want).abs() < 1e-12, "{name} vertex ({i},{j})");
                assert!((eb.get(i, j) - want).abs() < 1e-12, "{name} edge ({i},{j})");
            }
        }
    }
}

#[test]
fn quad_vertex_rule_is_five_point() {
    let mesh = build_structured_mesh(MeshKind::Quad, BoxDomain { lo: [0.0, 0.0], hi: [3.0, 1.0] }, &[3, 2]).unwrap();
    let n = mesh.num_vertices();
    let a = stiffness_vertex_quadrature(&mesh, &vec![0.0; n], &vec![true; n], 2.0).unwrap();
    // hx = 1, hy = 1/2: horizontal neighbours couple with -γ hy/hx, vertical with -γ hx/hy
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (p, q) = (mesh.vertex(i), mesh.vertex(j));
            let (dx, dy) = ((p[0] - q[0]).abs(), (p[1] - q[1]).abs());
            let boundary_edge = |d: usize| {
                let (lo, hi) = ([0.0, 0.0], [3.0, 1.0]);
                (p[d] == lo[d] && q[d] == lo[d]) || (p[d] == hi[d] && q[d] == hi[d])
            };
            let want = if dy == 0.0 && (dx - 1.0).abs() < 1e-12 {
                -2.0 * 0.5 * if boundary_edge(1) { 0.5 } else { 1.0 }
            } else if dx == 0.0 && (dy - 0.5).abs() < 1e-12 {
                -2.0 * 2.0 * if boundary_edge(0) { 0.5 } else { 1.0 }
            } else {
                0.0
            };
            assert!((a.get(i, j) - want).abs() < 1e-12, "({i},{j}) {} vs {want}", a.get(i, j));
        }
    }
}

fn two_node(variant: StiffnessVariant) -> (f64, f64) {
    let mesh = build_structured_mesh(MeshKind::Interval, BoxDomain::interval(0.0, 1.0), &[1]).unwrap();
    let geom = compute_edge_geometry(&mesh).unwrap();
    let s = LogDensityScheme::new(&mesh, &geom, 2.0, variant, NewtonOptions::default()).unwrap();
    let st = LogDensityState { u: vec![0.0, 2f64.ln()], active: vec![true, true], time: 0.0 };
    let next = s.step(&st, 0.01).unwrap();
    (next.density(0), next.density(1))
}

#[test]
fn two_node_log_density_step_vertex() {
    // M = diag(1/2), A = 5 [[1,-1],[-1,1]]; mass fixes b = 3 - a
    let a = bisect(|a| 2.0 * a - 2.0 + 0.2 * (a / (3.0 - a)).ln(), 0.5, 1.5);
    let (r0, r1) = two_node(StiffnessVariant::Vertex);
    assert!((r0 - a).abs() < 1e-8 && (r1 - (3.0 - a)).abs() < 1e-8);
    assert!((r0 - 1.0604).abs() < 1e-4 && (r1 - 1.9396).abs() < 1e-4);
}

#[test]
fn two_node_log_density_step_edge() {
    // harmonic mean of γ = 2 exp(2u) along the element, by Simpson's rule
    let n = 2000;
    let inv: f64 = (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            w / (2.0 * (2.0 * s * 2f64.ln()).exp())
        })
        .sum::<f64>()
        / (3.0 * n as f64);
    let g = 1.0 / inv;
    let a = bisect(|a| 0.5 * (a - 1.0) + 0.01 * g * (a / (3.0 - a)).ln(), 0.5, 1.5);
    let (r0, r1) = two_node(StiffnessVariant::Edge);
    assert!((r0 - a).abs() < 1e-8 && (r1 - (3.0 - a)).abs() < 1e-8);
}

#[test]
fn two_cell_mixed_steps() {
    let mesh = build_structured_mesh(MeshKind::Interval, BoxDomain::interval(0.0, 2.0), &[2]).unwrap();
    let geom = compute_edge_geometry(&mesh).unwrap();
    for (m, dt) in [(2.0, 0.25), (3.0, 0.25), (3.0, 0.1)] {
        let s = MixedScheme::new(&mesh, &geom, m, MixedOptions::default()).unwrap();
        let st = s.state_from_density(vec![1.0, 0.0], 0.0).unwrap();
        let next = s.step(&st, dt).unwrap();
        // ρ_L - 1 + Δt (μ(ρ_L) - μ(1 - ρ_L)) = 0 with upwind value 1
        let mu = |r: f64| m / (m - 1.0) * r.powf(m - 1.0);
        let a = bisect(|a| a - 1.0 + dt * (mu(a) - mu(1.0 - a)), 0.5, 1.0);
        assert!((next.rho[0] - a).abs() < 1e-10 && (next.rho[1] - (1.0 - a)).abs() < 1e-10, "m={m} dt={dt}");
        if m == 2.0 {
            assert!((next.rho[0] - 0.75).abs() < 1e-12 && (next.rho[1] - 0.25).abs() < 1e-12);
        }
    }
}

#[test]
fn barenblatt_solves_the_pde() {
    let h = 1e-4;
    for (d, m, s0) in [(1usize, 2.0, 3.0), (1, 3.0, 3.0), (2, 2.0, 1.0), (2, 3.0, 1.0), (2, 4.0, 1.0)] {
        let rho = |x: [f64; 2], t: f64| barenblatt(x, t, m, s0, d).unwrap();
        let pm = |x: [f64; 2], t: f64| rho(x, t).powf(m);
        for t in [0.3, 1.0] {
            for x in [[0.0, 0.0], [0.7, 0.0], [0.4, -0.3], [-1.1, 0.2]] {
                let x = if d == 1 { [x[0], 0.0] } else { x };
                if rho(x, t) < 0.05 {
                    continue;
                }
                let dt = (rho(x, t + h) - rho(x, t - h)) / (2.0 * h);
                let mut lap = 0.0;
                for k in 0..d {
                    let mut xp = x;
                    let mut xm = x;
                    xp[k] += h;
                    xm[k] -= h;
                    lap += (pm(xp, t) - 2.0 * pm(x, t) + pm(xm, t)) / (h * h);
                }
                assert!((dt - lap).abs() <= 1e-3, "d={d} m={m} t={t} x={x:?}: {dt} vs {lap}");
            }
        }
    }
}
