//! Semi-implicit P1 scheme in the log-density variable `u = log ρ`.
//!
//! Each step solves, on the active vertices,
//!
//! ```text
//! M (exp(uⁿ) - exp(uⁿ⁻¹)) + Δt A(uⁿ⁻¹) uⁿ = 0
//! ```
//!
//! with the lumped mass `M` and a stiffness `A` built from the previous
//! level. This is the optimality condition of the strictly convex
//! functional `F(u) = 1ᵀM exp(u) - uᵀM exp(uⁿ⁻¹) + Δt/2 uᵀAu`, minimised by
//! Newton's method with a backtracking line search on `F`.
//!
//! Vertices where the density is exactly zero are *inactive*: they carry
//! no `u` value and contribute `exp(u) = 0`. Before every Newton solve a
//! vertex joins the system when its diagonal `M_ii exp(u_i) + Δt A_ii`
//! exceeds a small cutoff, which is how the support grows.

use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::{lumped_mass, stiffness_edge_based, stiffness_vertex_quadrature};
use crate::error::{PmeError, Result};
use crate::geometry::EdgeGeometry;
use crate::math;
use crate::mesh::{CellKind, Mesh};
use crate::sparse::{spd_solve_masked, SparseSymMatrix};

/// Largest relative mass change accepted from one Newton solve.
pub const MASS_DEFECT: f64 = 1e-13;

/// How the nonlinear diffusion coefficient enters the stiffness matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StiffnessVariant {
    /// Vertex (trapezoidal) rule for the coefficient.
    #[default]
    Vertex,
    /// Edge-based cotangent form with harmonic edge averages; bound
    /// preserving on Delaunay meshes. Simplices only.
    Edge,
}

impl StiffnessVariant {
    pub fn name(self) -> &'static str {
        match self {
            StiffnessVariant::Vertex => "vertex",
            StiffnessVariant::Edge => "edge",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "vertex" => Some(StiffnessVariant::Vertex),
            "edge" => Some(StiffnessVariant::Edge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Absolute tolerance on the residual ∞-norm and on the mass change of
    /// the step (further capped by [`MASS_DEFECT`] relative).
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Activation threshold on the Newton system diagonal.
    pub cutoff: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tolerance: 1e-11, max_iterations: 50, max_halvings: 50, cutoff: 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogDensityState {
    /// Nodal log-density; meaningless where `active` is false.
    pub u: Vec<f64>,
    pub active: Vec<bool>,
    pub time: f64,
}

impl LogDensityState {
    /// Nodal density `exp(u_i)`, zero on inactive vertices.
    pub fn density(&self, i: usize) -> f64 {
        if self.active[i] {
            math::exp(self.u[i])
        } else {
            0.0
        }
    }

    pub fn densities(&self) -> Vec<f64> {
        (0..self.u.len()).map(|i| self.density(i)).collect()
    }

    pub fn num_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }
}

/// Convergence record of one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub iterations: usize,
    pub residual: f64,
    /// `F` at every iterate where it is finite (all active entries set).
    pub functional: Vec<f64>,
}

/// Fixed data of one time step's Newton solve.
pub struct NewtonContext {
    pub stiffness: SparseSymMatrix,
    /// `M exp(uⁿ⁻¹)`, zero on previously inactive vertices.
    pub old_mass: Vec<f64>,
    pub dt: f64,
}

/// A Newton iterate: values plus the mask of vertices that carry one.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub u: Vec<f64>,
    pub live: Vec<bool>,
}

pub struct LogDensityScheme<'a> {
    mesh: &'a Mesh,
    geom: &'a EdgeGeometry,
    mass: Vec<f64>,
    m: f64,
    variant: StiffnessVariant,
    newton: NewtonOptions,
}

impl<'a> LogDensityScheme<'a> {
    pub fn new(
        mesh: &'a Mesh,
        geom: &'a EdgeGeometry,
        m: f64,
        variant: StiffnessVariant,
        newton: NewtonOptions,
    ) -> Result<Self> {
        if !(m > 1.0 && m.is_finite()) {
            return Err(PmeError::InvalidExponent(m));
        }
        if variant == StiffnessVariant::Edge && mesh.kind() == CellKind::Quad {
            return Err(PmeError::UnsupportedCellKind("edge-based stiffness needs simplices"));
        }
        Ok(LogDensityScheme { mesh, geom, mass: lumped_mass(mesh), m, variant, newton })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn lumped_mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn exponent(&self) -> f64 {
        self.m
    }

    /// Nodal interpolation of `log ρ0`; vertices with `ρ0 = 0` start inactive.
    pub fn init_state(&self, rho0: impl Fn([f64; 2]) -> f64) -> Result<LogDensityState> {
        let n = self.mesh.num_vertices();
        let mut u = vec![0.0; n];
        let mut active = vec![false; n];
        for i in 0..n {
            let rho = rho0(self.mesh.vertex(i));
            if !(rho >= 0.0) || !rho.is_finite() {
                return Err(PmeError::InvalidDensity { index: i, value: rho });
            }
            if rho > 0.0 {
                u[i] = math::ln(rho);
                active[i] = true;
            }
        }
        Ok(LogDensityState { u, active, time: 0.0 })
    }

    /// Stiffness matrix of the chosen variant assembled from `state`.
    pub fn stiffness(&self, state: &LogDensityState) -> Result<SparseSymMatrix> {
        match self.variant {
            StiffnessVariant::Vertex => stiffness_vertex_quadrature(self.mesh, &state.u, &state.active, self.m),
            StiffnessVariant::Edge => stiffness_edge_based(self.mesh, self.geom, &state.u, &state.active, self.m),
        }
    }

    pub fn context(&self, state: &LogDensityState, dt: f64) -> Result<NewtonContext> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(PmeError::InvalidTimeStep(dt));
        }
        let old_mass = (0..self.mass.len()).map(|i| self.mass[i] * state.density(i)).collect();
        Ok(NewtonContext { stiffness: self.stiffness(state)?, old_mass, dt })
    }

    fn exp_live(it: &Iterate, i: usize) -> f64 {
        if it.live[i] {
            math::exp(it.u[i])
        } else {
            0.0
        }
    }

    /// Vertices whose Newton diagonal `M_ii exp(u_i) + Δt A_ii` exceeds the cutoff.
    pub fn active_set(&self, ctx: &NewtonContext, it: &Iterate) -> Vec<bool> {
        (0..self.mass.len())
            .map(|i| self.mass[i] * Self::exp_live(it, i) + ctx.dt * ctx.stiffness.diag(i) > self.newton.cutoff)
            .collect()
    }

    /// `(A u)_i` over the active set, written with differences so that
    /// constants are annihilated exactly.
    fn stiffness_action(ctx: &NewtonContext, u: &[f64], active: &[bool], i: usize) -> f64 {
        let (cols, vals) = ctx.stiffness.row(i);
        cols.iter()
            .zip(vals)
            .filter(|(&j, _)| j != i && active[j])
            .map(|(&j, &a)| a * (u[j] - u[i]))
            .sum()
    }

    /// Residual `M(exp(u) - exp(uⁿ⁻¹)) + Δt A u` on the active set (zero elsewhere).
    pub fn residual(&self, ctx: &NewtonContext, u: &[f64], active: &[bool]) -> Vec<f64> {
        (0..self.mass.len())
            .map(|i| {
                if !active[i] {
                    return 0.0;
                }
                self.mass[i] * math::exp(u[i]) - ctx.old_mass[i] + ctx.dt * Self::stiffness_action(ctx, u, active, i)
            })
            .collect()
    }

    /// `F(u)` restricted to the active set, and a magnitude scale for
    /// round-off comparisons.
    pub fn functional(&self, ctx: &NewtonContext, u: &[f64], active: &[bool]) -> (f64, f64) {
        let mut value = 0.0;
        let mut scale = 0.0;
        for i in 0..self.mass.len() {
            if !active[i] {
                continue;
            }
            let e = self.mass[i] * math::exp(u[i]);
            let lin = u[i] * ctx.old_mass[i];
            let (cols, vals) = ctx.stiffness.row(i);
            // ½ uᵀAu = ¼ Σ_i Σ_{j≠i} (-A_ij)(u_i - u_j)²
            let quad: f64 = cols
                .iter()
                .zip(vals)
                .filter(|(&j, _)| j != i && active[j])
                .map(|(&j, &a)| -a * (u[i] - u[j]) * (u[i] - u[j]))
                .sum::<f64>()
                * 0.25
                * ctx.dt;
            value += e - lin + quad;
            scale += e + lin.abs() + quad.abs();
        }
        (value, scale)
    }

    /// One damped Newton step from `it`.
    ///
    /// The Newton system on the current active set is
    /// `(M D + Δt A) u⁺ = M (D u - exp(u)) + M exp(uⁿ⁻¹)` with
    /// `D = diag(exp(u))`. When vertices enter the set without a value the
    /// new iterate is `u⁺` itself; otherwise the correction
    /// `(M D + Δt A) δ = -r(u)` is computed and halved until `F` does not
    /// increase.
    pub fn newton_update(&self, ctx: &NewtonContext, it: &Iterate, iteration: usize) -> Result<Iterate> {
        let n = self.mass.len();
        let active = self.active_set(ctx, it);
        let shift: Vec<f64> = (0..n).map(|i| if active[i] { self.mass[i] * Self::exp_live(it, i) } else { 0.0 }).collect();
        let mut a = ctx.stiffness.clone();
        a.scale(ctx.dt);

        let entering = (0..n).any(|i| active[i] && !it.live[i]);
        if entering {
            let rhs: Vec<f64> = (0..n)
                .map(|i| {
                    if !active[i] {
                        return 0.0;
                    }
                    let d = Self::exp_live(it, i);
                    let du = if it.live[i] { d * it.u[i] } else { 0.0 };
                    self.mass[i] * (du - d) + ctx.old_mass[i]
                })
                .collect();
            let target = spd_solve_masked(&a, &shift, &rhs, &active)?;
            return Ok(Iterate { u: target, live: active });
        }
        // correction form: the solve's relative accuracy then scales with
        // the residual
        let neg_r: Vec<f64> = self.residual(ctx, &it.u, &active).iter().map(|r| -r).collect();
        let delta = spd_solve_masked(&a, &shift, &neg_r, &active)?;
        let target: Vec<f64> = (0..n).map(|i| it.u[i] + delta[i]).collect();
        let (f0, scale) = self.functional(ctx, &it.u, &active);
        let slack = 1e-13 * scale;
        let mut step = 1.0;
        for _ in 0..=self.newton.max_halvings {
            let trial: Vec<f64> = (0..n)
                .map(|i| if active[i] { it.u[i] + step * (target[i] - it.u[i]) } else { 0.0 })
                .collect();
            let (f1, _) = self.functional(ctx, &trial, &active);
            if f1 <= f0 + slack {
                return Ok(Iterate { u: trial, live: active });
            }
            step *= 0.5;
        }
        Err(PmeError::LineSearchFailed { iteration })
    }

    /// Advances `state` by `dt`.
    pub fn step(&self, state: &LogDensityState, dt: f64) -> Result<LogDensityState> {
        self.step_with_report(state, dt).map(|(s, _)| s)
    }

    pub fn step_with_report(&self, state: &LogDensityState, dt: f64) -> Result<(LogDensityState, StepReport)> {
        let ctx = self.context(state, dt)?;
        let mut it = Iterate { u: state.u.clone(), live: state.active.clone() };
        let old_total: f64 = ctx.old_mass.iter().sum();
        let defect_tol = self.newton.tolerance.min(MASS_DEFECT * old_total);
        let mut functional = Vec::new();
        let mut residual = f64::INFINITY;
        for iteration in 0..=self.newton.max_iterations {
            let active = self.active_set(&ctx, &it);
            let complete = (0..active.len()).all(|i| !active[i] || it.live[i]);
            if complete {
                functional.push(self.functional(&ctx, &it.u, &active).0);
                let r = self.residual(&ctx, &it.u, &active);
                residual = r.iter().fold(0.0, |acc: f64, r| acc.max(r.abs()));
                // mass change on the current active set; vertices leaving the
                // set give up their (sub-cutoff) mass by construction
                let defect: f64 = (0..r.len())
                    .filter(|&i| active[i])
                    .map(|i| self.mass[i] * math::exp(it.u[i]) - ctx.old_mass[i])
                    .sum();
                if residual <= self.newton.tolerance && defect.abs() <= defect_tol {
                    let u = (0..active.len()).map(|i| if active[i] { it.u[i] } else { 0.0 }).collect();
                    let next = LogDensityState { u, active, time: state.time + dt };
                    return Ok((next, StepReport { iterations: iteration, residual, functional }));
                }
            }
            if iteration == self.newton.max_iterations {
                break;
            }
            it = self.newton_update(&ctx, &it, iteration)?;
        }
        Err(PmeError::NewtonDiverged { iterations: self.newton.max_iterations, residual })
    }

    /// Lumped mass `Σ_i M_ii exp(u_i)`.
    pub fn total_mass(&self, state: &LogDensityState) -> f64 {
        (0..self.mass.len()).map(|i| self.mass[i] * state.density(i)).sum()
    }

    /// Entropy `Σ_i M_ii exp(u_i)(u_i - 1)`; inactive vertices contribute 0.
    pub fn entropy_energy(&self, state: &LogDensityState) -> f64 {
        (0..self.mass.len())
            .filter(|&i| state.active[i])
            .map(|i| self.mass[i] * math::exp(state.u[i]) * (state.u[i] - 1.0))
            .sum()
    }
}

/// Smallest and largest nodal density over the active vertices.
pub fn bounds(state: &LogDensityState) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in (0..state.u.len()).filter(|&i| state.active[i]) {
        let rho = math::exp(state.u[i]);
        lo = lo.min(rho);
        hi = hi.max(rho);
    }
    if lo.is_finite() {
        Ok((lo, hi))
    } else {
        Err(PmeError::EmptyActiveSet)
    }
}
