use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;

use pme_core::geometry::compute_edge_geometry;
use pme_core::logdensity::LogDensityScheme;
use pme_core::mesh::{build_structured_mesh, BoxDomain, MeshKind};
use pme_core::mixed::{MixedOptions, MixedScheme};
use pme_harness::output::{write_convergence_csv, write_timeseries_csv, write_vtk_cells, CONVERGENCE_HEADER, TIMESERIES_HEADER};
use pme_harness::run::{build_mesh, tracked_index};
use pme_harness::{parse_config, run_convergence, run_simulation, HarnessError, RunConfig, Scheme};

fn config(text: &str) -> RunConfig {
    parse_config(text, &[]).unwrap()
}

fn in_dir(cfg: &mut RunConfig, dir: &Path) {
    let move_to = |p: &Path| dir.join(p.file_name().unwrap());
    cfg.timeseries_csv = cfg.timeseries_csv.as_deref().map(move_to);
    cfg.convergence_csv = cfg.convergence_csv.as_deref().map(move_to);
    cfg.vtk = cfg.vtk.as_ref().map(|p| dir.join(p).to_string_lossy().into_owned());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = parse_config(&fs::read_to_string(&path).unwrap(), &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(cfg.dt > 0.0 && cfg.final_time >= cfg.dt);
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn defaults_and_rejections() {
    let cfg = config("scheme = logdensity\nproblem = barenblatt1d\nm = 2\ndt = 0.2\nT = 1\n");
    assert_eq!(cfg.newton.cutoff, 1e-14);
    assert_eq!(cfg.newton.tolerance, 1e-11);
    assert_eq!(cfg.quadrature_degree, 4);
    assert_eq!(cfg.counts, vec![100]);

    let bad = [
        "scheme = logdensity\nproblem = barenblatt1d\nm = 1\ndt = 0.2\nT = 1\n",
        "scheme = mixed\nproblem = barenblatt1d\nm = 2\ndt = 0.2\nT = 1\nvariant = edge\n",
        "scheme = mixed\nproblem = barenblatt1d\nm = 2\ndt = 0.2\n",
        "scheme = mixed\nproblem = barenblatt1d\nm = 2\ndt = 0.2\nT = 1\ncolour = red\n",
    ];
    for text in bad {
        assert!(parse_config(text, &[]).is_err(), "{text}");
    }
    let over = parse_config(
        "scheme = mixed\nproblem = waiting\nm = 3\ndt = 1e-3\nT = 0.15\n",
        &[("N".into(), "50".into()), ("scheme".into(), "logdensity".into())],
    )
    .unwrap();
    assert_eq!(over.counts, vec![50]);
    assert_eq!(over.scheme, Scheme::LogDensity);
}

#[test]
fn empty_record_list_gives_header_only_csv() {
    let mut buf = Vec::new();
    write_timeseries_csv(&mut buf, &[]).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().trim_end(), TIMESERIES_HEADER);
    let mut buf = Vec::new();
    write_convergence_csv(&mut buf, &[]).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CONVERGENCE_HEADER);
}

#[test]
fn two_cell_vtk() {
    let mesh = build_structured_mesh(MeshKind::Interval, BoxDomain::interval(0.0, 2.0), &[2]).unwrap();
    let geom = compute_edge_geometry(&mesh).unwrap();
    let s = MixedScheme::new(&mesh, &geom, 2.0, MixedOptions::default()).unwrap();
    let st = s.state_from_density(vec![1.0, 0.0], 0.0).unwrap();
    let mut buf = Vec::new();
    write_vtk_cells(&mut buf, &mesh, &st).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let at = lines.iter().position(|l| l.starts_with("CELL_TYPES")).unwrap();
    assert_eq!(lines[at], "CELL_TYPES 2");
    assert_eq!(&lines[at + 1..at + 3], &["3", "3"]);
    assert!(lines.contains(&"CELL_DATA 2"));
    assert!(lines.contains(&"SCALARS density double 1"));
    assert!(lines.contains(&"SCALARS potential double 1"));
}

#[test]
fn convergence_csv_has_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.csv");
    let mut cfg = config("scheme = mixed\nproblem = barenblatt1d\nm = 2\ndt = 0.1\nT = 0.3\nN = 50\nlevels = 3\n");
    cfg.convergence_csv = Some(path.clone());
    let rows = run_convergence(&cfg).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].order_inner.is_none() && rows[2].order_inner.is_some());
    let text = fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(text.lines().next().unwrap(), CONVERGENCE_HEADER);

    cfg.problem = config("scheme = mixed\nproblem = gaussians\nm = 3\ndt = 0.1\nT = 0.3\n").problem;
    assert!(matches!(run_convergence(&cfg), Err(HarnessError::NoExactSolution(_))));
}

#[test]
fn three_steps_three_records() {
    for scheme in ["logdensity", "mixed"] {
        let cfg = config(&format!("scheme = {scheme}\nproblem = barenblatt1d\nm = 2\ndt = 0.1\nT = 0.3\nN = 40\n"));
        let sim = run_simulation(&cfg).unwrap();
        assert_eq!(sim.records.len(), 3, "{scheme}");
        assert_eq!(sim.records[2].time, 0.3);
        assert_eq!(sim.state.time(), 0.3);
    }
}

#[test]
fn waiting_front_starts_empty() {
    for scheme in ["logdensity", "mixed"] {
        let cfg = config(&format!("scheme = {scheme}\nproblem = waiting\nm = 3\ntheta = 0\ndt = 1e-3\nT = 0.15\nN = 200\n"));
        let mesh = build_mesh(&cfg).unwrap();
        let geom = compute_edge_geometry(&mesh).unwrap();
        let k = tracked_index(&cfg, &mesh).unwrap();
        let rho0 = |x: [f64; 2]| cfg.problem.initial_density(x);
        let initial = match cfg.scheme {
            Scheme::LogDensity => {
                assert!((mesh.vertex(k)[0] - FRAC_PI_2).abs() < 1e-12);
                LogDensityScheme::new(&mesh, &geom, 3.0, cfg.variant, cfg.newton).unwrap().init_state(rho0).unwrap().density(k)
            }
            Scheme::Mixed => MixedScheme::new(&mesh, &geom, 3.0, cfg.mixed).unwrap().init_state(rho0).unwrap().rho[k],
        };
        assert_eq!(initial, 0.0, "{scheme}");
    }
}

#[test]
fn barenblatt_interface_stays_nonnegative() {
    let cfg = config("scheme = logdensity\nproblem = barenblatt1d\nm = 3\ndt = 0.05\nT = 1\nN = 200\n");
    let sim = run_simulation(&cfg).unwrap();
    assert_eq!(sim.records.len(), 20);
    let m0 = sim.records[0].mass;
    for r in &sim.records {
        assert!(r.min_density >= 0.0, "step {}: {}", r.step, r.min_density);
        assert!((r.mass - m0).abs() <= 1e-9 * m0);
    }
    for w in sim.records.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-10);
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    for scheme in ["logdensity", "mixed"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let mut cfg = config(&format!(
                "scheme = {scheme}\nproblem = gaussians\nm = 3\ndt = 1e-2\nT = 0.05\nN = 10\ntimeseries_csv = ts{run}.csv\nvtk = snap{run}_{{step}}.vtk\n"
            ));
            in_dir(&mut cfg, dir.path());
            run_simulation(&cfg).unwrap();
            let csv = fs::read(dir.path().join(format!("ts{run}.csv"))).unwrap();
            let vtk = fs::read(dir.path().join(format!("snap{run}_5.vtk"))).unwrap();
            outputs.push((csv, vtk));
        }
        assert_eq!(outputs[0], outputs[1], "{scheme}");
        assert_eq!(String::from_utf8_lossy(&outputs[0].0).lines().count(), 6);
    }
}
