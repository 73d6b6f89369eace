//! Time-stepping loops and convergence studies.

use std::thread;

use pme_core::analysis::{convergence_order, l2_error, DiscreteDensity};
use pme_core::geometry::compute_edge_geometry;
use pme_core::logdensity::{bounds, LogDensityScheme, LogDensityState};
use pme_core::mesh::{build_structured_mesh, Mesh};
use pme_core::mixed::{cfl_max_dt, MixedScheme, MixedState};
use pme_core::PmeError;

use crate::config::{RunConfig, Scheme};
use crate::error::{HarnessError, Result};
use crate::output;

#[derive(Debug, Clone, PartialEq)]
pub enum FinalState {
    LogDensity(LogDensityState),
    Mixed(MixedState),
}

impl FinalState {
    pub fn time(&self) -> f64 {
        match self {
            FinalState::LogDensity(s) => s.time,
            FinalState::Mixed(s) => s.time,
        }
    }

    pub fn density(&self) -> DiscreteDensity<'_> {
        match self {
            FinalState::LogDensity(s) => DiscreteDensity::LogNodal { u: &s.u, active: &s.active },
            FinalState::Mixed(s) => DiscreteDensity::CellConstant(&s.rho),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRecord {
    pub step: usize,
    pub time: f64,
    pub mass: f64,
    /// Entropy for the log-density scheme, physical energy for the mixed one.
    pub energy: f64,
    pub min_density: f64,
    pub max_density: f64,
    pub tracked_density: Option<f64>,
    pub cfl_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub mesh: Mesh,
    pub state: FinalState,
    pub records: Vec<TimeSeriesRecord>,
}

pub fn build_mesh(cfg: &RunConfig) -> Result<Mesh> {
    Ok(build_structured_mesh(cfg.mesh_kind, cfg.domain, &cfg.counts)?)
}

/// Length of the next step when `remaining` time is left: `dt`, or the
/// whole remainder when it is within 1e-9·dt of `dt` or shorter.
pub fn next_step(dt: f64, remaining: f64) -> f64 {
    if remaining - dt <= 1e-9 * dt {
        remaining
    } else {
        dt
    }
}

fn finished(cfg: &RunConfig, time: f64) -> bool {
    cfg.final_time - time <= 1e-9 * cfg.dt
}

fn tracked_cell(mesh: &Mesh, p: [f64; 2], rho0: impl Fn([f64; 2]) -> f64) -> usize {
    let dist = |k: usize| {
        let b = mesh.barycenter(k);
        ((b[0] - p[0]).powi(2) + (b[1] - p[1]).powi(2)).sqrt()
    };
    let best = (0..mesh.num_cells()).map(dist).fold(f64::INFINITY, f64::min);
    let scale = mesh.cell_volumes().iter().copied().fold(0.0, f64::max);
    // ties go to the cell outside the initial support
    (0..mesh.num_cells())
        .filter(|&k| dist(k) <= best + 1e-9 * scale)
        .min_by(|&a, &b| rho0(mesh.barycenter(a)).total_cmp(&rho0(mesh.barycenter(b))))
        .unwrap_or(0)
}

/// Vertex (log-density) or cell (mixed) whose density the time series
/// tracks, if the problem has a tracked point.
pub fn tracked_index(cfg: &RunConfig, mesh: &Mesh) -> Option<usize> {
    let problem = cfg.problem;
    let p = problem.tracked_point()?;
    Some(match cfg.scheme {
        Scheme::LogDensity => mesh.nearest_vertex(p),
        Scheme::Mixed => tracked_cell(mesh, p, |x| problem.initial_density(x)),
    })
}

fn snapshot(cfg: &RunConfig, step: usize, write: impl FnOnce(&mut dyn std::io::Write) -> std::io::Result<()>) -> Result<()> {
    if let Some(pattern) = &cfg.vtk {
        let path = pattern.replace("{step}", &step.to_string());
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write(&mut f)?;
    }
    Ok(())
}

/// Runs one simulation from `t = 0` to `T`, writing the configured outputs.
pub fn run_simulation(cfg: &RunConfig) -> Result<Simulation> {
    let mesh = build_mesh(cfg)?;
    let geom = compute_edge_geometry(&mesh)?;
    let problem = cfg.problem;
    let m = problem.exponent();
    let rho0 = |x: [f64; 2]| problem.initial_density(x);
    let record_at = |step: usize, time: f64| step % cfg.output_every == 0 || time == cfg.final_time;
    let mut records = Vec::new();

    let state = match cfg.scheme {
        Scheme::LogDensity => {
            let scheme = LogDensityScheme::new(&mesh, &geom, m, cfg.variant, cfg.newton)?;
            let tracked = tracked_index(cfg, &mesh);
            let mut state = scheme.init_state(rho0)?;
            snapshot(cfg, 0, |w| output::write_vtk_nodal(w, &mesh, &state))?;
            let mut step = 0;
            while !finished(cfg, state.time) {
                step += 1;
                let h = next_step(cfg.dt, cfg.final_time - state.time);
                state = scheme.step(&state, h).map_err(|source| HarnessError::Solver { step, source })?;
                if finished(cfg, state.time) {
                    state.time = cfg.final_time;
                }
                if record_at(step, state.time) {
                    let (lo, hi) = bounds(&state).unwrap_or((0.0, 0.0));
                    records.push(TimeSeriesRecord {
                        step,
                        time: state.time,
                        mass: scheme.total_mass(&state),
                        energy: scheme.entropy_energy(&state),
                        min_density: lo,
                        max_density: hi,
                        tracked_density: tracked.map(|v| state.density(v)),
                        cfl_bound: None,
                    });
                    snapshot(cfg, step, |w| output::write_vtk_nodal(w, &mesh, &state))?;
                }
            }
            FinalState::LogDensity(state)
        }
        Scheme::Mixed => {
            let scheme = MixedScheme::new(&mesh, &geom, m, cfg.mixed)?;
            let tracked = tracked_index(cfg, &mesh);
            let mut state = scheme.init_state(rho0)?;
            snapshot(cfg, 0, |w| output::write_vtk_cells(w, &mesh, &state))?;
            let mut step = 0;
            while !finished(cfg, state.time) {
                step += 1;
                let h = next_step(cfg.dt, cfg.final_time - state.time);
                let (next, _) = scheme.step_checked(&state, h).map_err(|source| HarnessError::Solver { step, source })?;
                state = next;
                if finished(cfg, state.time) {
                    state.time = cfg.final_time;
                }
                if record_at(step, state.time) {
                    let (lo, hi) = state
                        .rho
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
                    records.push(TimeSeriesRecord {
                        step,
                        time: state.time,
                        mass: scheme.total_mass(&state),
                        energy: scheme.physical_energy(&state),
                        min_density: lo,
                        max_density: hi,
                        tracked_density: tracked.map(|k| state.rho[k]),
                        cfl_bound: Some(cfl_max_dt(&mesh, &state.flux).1),
                    });
                    snapshot(cfg, step, |w| output::write_vtk_cells(w, &mesh, &state))?;
                }
            }
            FinalState::Mixed(state)
        }
    };
    if let Some(path) = &cfg.timeseries_csv {
        output::write_timeseries_csv(&mut std::fs::File::create(path)?, &records)?;
    }
    Ok(Simulation { mesh, state, records })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    /// Cells per axis.
    pub n: usize,
    pub dt: f64,
    pub error_inner: f64,
    pub order_inner: Option<f64>,
    pub error_full: f64,
    pub order_full: Option<f64>,
}

/// Configuration of level `level` in a study started from `template`:
/// cells doubled per level, `dt` divided by 4 (log-density) or 2 (mixed).
pub fn level_config(template: &RunConfig, level: usize) -> RunConfig {
    let mut cfg = template.clone();
    cfg.counts = template.counts.iter().map(|&c| c << level).collect();
    let dt_ratio: f64 = match template.scheme {
        Scheme::LogDensity => 4.0,
        Scheme::Mixed => 2.0,
    };
    cfg.dt = template.dt / dt_ratio.powi(level as i32);
    cfg.timeseries_csv = None;
    cfg.convergence_csv = None;
    cfg.vtk = None;
    cfg
}

/// `L²` errors at the final time in the problem's inner and full regions.
pub fn final_errors(cfg: &RunConfig, sim: &Simulation) -> Result<(f64, f64)> {
    let problem = cfg.problem;
    if !problem.has_exact() {
        return Err(HarnessError::NoExactSolution(problem.name()));
    }
    let t = sim.state.time();
    let exact = |x: [f64; 2]| problem.exact(x, t).unwrap_or(0.0);
    let (inner, full) = problem.error_regions();
    let e_inner = l2_error(&sim.mesh, sim.state.density(), exact, &inner, cfg.quadrature_degree)?;
    let e_full = l2_error(&sim.mesh, sim.state.density(), exact, &full, cfg.quadrature_degree)?;
    Ok((e_inner, e_full))
}

/// Runs `template.levels` refinement levels concurrently.
pub fn run_convergence(template: &RunConfig) -> Result<Vec<ConvergenceRow>> {
    if template.levels < 2 {
        return Err(PmeError::TooFewLevels.into());
    }
    if !template.problem.has_exact() {
        return Err(HarnessError::NoExactSolution(template.problem.name()));
    }
    let configs: Vec<RunConfig> = (0..template.levels).map(|l| level_config(template, l)).collect();
    let results: Vec<Result<(f64, f64)>> = thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| s.spawn(move || run_simulation(cfg).and_then(|sim| final_errors(cfg, &sim))))
            .collect();
        handles.into_iter().map(|h| h.join().expect("convergence level panicked")).collect()
    });
    let errors = results.into_iter().collect::<Result<Vec<_>>>()?;
    let inner: Vec<f64> = errors.iter().map(|e| e.0).collect();
    let full: Vec<f64> = errors.iter().map(|e| e.1).collect();
    let o_inner = convergence_order(&inner, 2.0)?;
    let o_full = convergence_order(&full, 2.0)?;
    let rows: Vec<ConvergenceRow> = configs
        .iter()
        .enumerate()
        .map(|(level, cfg)| ConvergenceRow {
            level,
            n: cfg.counts[0],
            dt: cfg.dt,
            error_inner: inner[level],
            order_inner: o_inner[level],
            error_full: full[level],
            order_full: o_full[level],
        })
        .collect();
    if let Some(path) = &template.convergence_csv {
        output::write_convergence_csv(&mut std::fs::File::create(path)?, &rows)?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_schedule() {
        let count = |dt: f64, t_end: f64| {
            let (mut t, mut n) = (0.0, 0);
            while t_end - t > 1e-9 * dt {
                t += next_step(dt, t_end - t);
                n += 1;
            }
            n
        };
        assert_eq!(count(0.25, 0.75), 3);
        assert_eq!(count(0.4, 1.0), 3);
        assert_eq!(count(0.1, 0.3), 3);
        assert_eq!(count(1.0 / 320.0, 1.0), 320);
        assert!((next_step(0.4, 0.2) - 0.2).abs() < 1e-15);
    }
}
