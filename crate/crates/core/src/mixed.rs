//! Lowest-order mixed scheme: piecewise constant density and potential,
//! one normal flux per face.
//!
//! With the lumped velocity mass the flux is a local function of the
//! potential, `u_E = |E| (μ_1 - μ_2) / ω_E`, so each step reduces to one
//! equation per cell,
//!
//! ```text
//! |K| (ρ_K - ρ_K⁻) + Δt Σ_E ρ̂_E u_E (n_E·n_K) |E| = 0,   μ = m/(m-1) ρ^{m-1},
//! ```
//!
//! with `ρ̂_E` the old density of the cell the flux leaves. The upwind
//! choice makes the system only piecewise smooth, so Newton is run with
//! the directions frozen per iterate.

use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::velocity_lumped_weights;
use crate::error::{PmeError, Result};
use crate::geometry::EdgeGeometry;
use crate::math;
use crate::mesh::{Face, Mesh};
use crate::sparse::{spd_solve_masked, SparseSymMatrix};

/// Smallest admissible velocity weight on an interior face.
pub const MIN_FACE_WEIGHT: f64 = 1e-12;

/// Relative size of `Δt L_KK μ'(ρ_K)` against `|K|` below which a cell is
/// left out of the coupled Newton solve.
const DECOUPLED: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedOptions {
    /// Absolute tolerance on the cell residual ∞-norm.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Damped fixed-point iterations tried when Newton keeps switching
    /// upwind directions.
    pub picard_iterations: usize,
    /// Halve Newton steps that increase the residual.
    pub line_search: bool,
    /// Recompute a step with half the time step while the post hoc CFL
    /// bound is violated.
    pub auto_halve: bool,
    pub max_halvings: usize,
}

impl Default for MixedOptions {
    fn default() -> Self {
        MixedOptions {
            tolerance: 1e-11,
            max_iterations: 50,
            picard_iterations: 50,
            line_search: true,
            auto_halve: false,
            max_halvings: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    pub rho: Vec<f64>,
    pub mu: Vec<f64>,
    /// Normal flux `u·n_E` per face, signed along the face normal.
    pub flux: Vec<f64>,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedReport {
    pub newton_iterations: usize,
    pub picard_iterations: usize,
    pub residual: f64,
}

/// Density at face `face` taken from the cell the flux leaves: the first
/// cell for `flux >= 0`, the second otherwise.
pub fn upwind_value(rho_prev: &[f64], flux: f64, face: &Face) -> f64 {
    match face.cells {
        (k, None) => rho_prev[k],
        (k1, Some(k2)) => {
            if flux >= 0.0 {
                rho_prev[k1]
            } else {
                rho_prev[k2]
            }
        }
    }
}

/// `μ = m/(m-1) max(ρ, 0)^{m-1}`.
pub fn potential(rho: f64, m: f64) -> f64 {
    m / (m - 1.0) * math::powf(rho.max(0.0), m - 1.0)
}

fn potential_derivative(rho: f64, m: f64) -> f64 {
    if m == 2.0 {
        2.0
    } else if m > 2.0 {
        if rho > 0.0 {
            m * math::powf(rho, m - 2.0)
        } else {
            0.0
        }
    } else {
        m * math::powf(rho.max(1e-12), m - 2.0)
    }
}

/// `Σ_K |K| max(ρ_K, 0)^m / (m-1)`.
pub fn physical_energy(mesh: &Mesh, rho: &[f64], m: f64) -> f64 {
    rho.iter()
        .zip(mesh.cell_volumes())
        .map(|(&r, &v)| v * math::powf(r.max(0.0), m) / (m - 1.0))
        .sum()
}

/// Face fluxes from the potential; zero on the boundary.
pub fn condense_velocity(mesh: &Mesh, weights: &[f64], mu: &[f64]) -> Result<Vec<f64>> {
    mesh.faces()
        .iter()
        .enumerate()
        .map(|(f, face)| match face.cells {
            (_, None) => Ok(0.0),
            (k1, Some(k2)) => {
                if !(weights[f] > MIN_FACE_WEIGHT) {
                    return Err(PmeError::NonDelaunayFace { face: f, weight: weights[f] });
                }
                Ok(face.measure * (mu[k1] - mu[k2]) / weights[f])
            }
        })
        .collect()
}

/// Per-cell CFL bound `1 / Σ_{outflow} |u·n_K| |E| / |K|` and its minimum;
/// cells without outflow get `+∞`.
pub fn cfl_max_dt(mesh: &Mesh, flux: &[f64]) -> (Vec<f64>, f64) {
    let mut out = vec![0.0; mesh.num_cells()];
    for (f, face) in mesh.faces().iter().enumerate() {
        if let (k1, Some(k2)) = face.cells {
            let rate = flux[f].abs() * face.measure;
            if flux[f] > 0.0 {
                out[k1] += rate;
            } else if flux[f] < 0.0 {
                out[k2] += rate;
            }
        }
    }
    let bounds: Vec<f64> = out
        .iter()
        .zip(mesh.cell_volumes())
        .map(|(&o, &v)| if o > 0.0 { v / o } else { f64::INFINITY })
        .collect();
    let min = bounds.iter().copied().fold(f64::INFINITY, f64::min);
    (bounds, min)
}

pub struct MixedScheme<'a> {
    mesh: &'a Mesh,
    weights: Vec<f64>,
    /// `|E|² / ω_E` on interior faces, zero on the boundary.
    coupling: Vec<f64>,
    pattern: SparseSymMatrix,
    m: f64,
    options: MixedOptions,
}

impl<'a> MixedScheme<'a> {
    /// Fails on `m <= 1` or when an interior face has a velocity weight
    /// below [`MIN_FACE_WEIGHT`].
    pub fn new(mesh: &'a Mesh, geom: &EdgeGeometry, m: f64, options: MixedOptions) -> Result<Self> {
        if !(m > 1.0 && m.is_finite()) {
            return Err(PmeError::InvalidExponent(m));
        }
        let weights = velocity_lumped_weights(mesh, geom);
        let mut coupling = vec![0.0; weights.len()];
        let mut pairs = Vec::new();
        for (f, face) in mesh.faces().iter().enumerate() {
            if let (k1, Some(k2)) = face.cells {
                if !(weights[f] > MIN_FACE_WEIGHT) {
                    return Err(PmeError::NonDelaunayFace { face: f, weight: weights[f] });
                }
                coupling[f] = face.measure * face.measure / weights[f];
                pairs.push((k1, k2));
            }
        }
        let pattern = SparseSymMatrix::with_pattern(mesh.num_cells(), pairs);
        Ok(MixedScheme { mesh, weights, coupling, pattern, m, options })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn exponent(&self) -> f64 {
        self.m
    }

    pub fn options(&self) -> &MixedOptions {
        &self.options
    }

    pub fn velocity_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Barycenter sampling of `rho0`.
    pub fn init_state(&self, rho0: impl Fn([f64; 2]) -> f64) -> Result<MixedState> {
        let mut rho = Vec::with_capacity(self.mesh.num_cells());
        for k in 0..self.mesh.num_cells() {
            let r = rho0(self.mesh.barycenter(k));
            if !(r >= 0.0) || !r.is_finite() {
                return Err(PmeError::InvalidDensity { index: k, value: r });
            }
            rho.push(r);
        }
        self.state_from_density(rho, 0.0)
    }

    /// Completes a density with its potential and fluxes.
    pub fn state_from_density(&self, rho: Vec<f64>, time: f64) -> Result<MixedState> {
        let mu: Vec<f64> = rho.iter().map(|&r| potential(r, self.m)).collect();
        let flux = condense_velocity(self.mesh, &self.weights, &mu)?;
        Ok(MixedState { rho, mu, flux, time })
    }

    /// Upwind direction per face from the potential: `true` when the flux
    /// leaves the first cell (or vanishes).
    fn directions(&self, rho: &[f64]) -> Vec<bool> {
        self.mesh
            .faces()
            .iter()
            .map(|face| match face.cells {
                (k1, Some(k2)) => potential(rho[k1], self.m) >= potential(rho[k2], self.m),
                _ => true,
            })
            .collect()
    }

    fn upwind(&self, rho_old: &[f64], dirs: &[bool], f: usize) -> f64 {
        match self.mesh.face(f).cells {
            (k1, Some(k2)) => {
                if dirs[f] {
                    rho_old[k1]
                } else {
                    rho_old[k2]
                }
            }
            (k, None) => rho_old[k],
        }
    }

    /// Cell residuals with the upwind directions `dirs`.
    fn residual_with(&self, rho: &[f64], rho_old: &[f64], dt: f64, dirs: &[bool]) -> Vec<f64> {
        let vol = self.mesh.cell_volumes();
        let mut r: Vec<f64> = (0..rho.len()).map(|k| vol[k] * (rho[k] - rho_old[k])).collect();
        for (f, face) in self.mesh.faces().iter().enumerate() {
            if let (k1, Some(k2)) = face.cells {
                let w = self.coupling[f] * self.upwind(rho_old, dirs, f);
                if w == 0.0 {
                    continue;
                }
                let q = dt * w * (potential(rho[k1], self.m) - potential(rho[k2], self.m));
                r[k1] += q;
                r[k2] -= q;
            }
        }
        r
    }

    /// Per-cell balance `|K|(ρ_K - ρ_K⁻) + Δt Σ_E ρ̂_E u_E (n_E·n_K)|E|` of
    /// a computed step, with the stored fluxes and their upwind values.
    pub fn balance_residuals(&self, old: &MixedState, new: &MixedState, dt: f64) -> Vec<f64> {
        let vol = self.mesh.cell_volumes();
        let mut r: Vec<f64> = (0..new.rho.len()).map(|k| vol[k] * (new.rho[k] - old.rho[k])).collect();
        for (f, face) in self.mesh.faces().iter().enumerate() {
            if let (k1, Some(k2)) = face.cells {
                let q = dt * upwind_value(&old.rho, new.flux[f], face) * new.flux[f] * face.measure;
                r[k1] += q;
                r[k2] -= q;
            }
        }
        r
    }

    fn norm_inf(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |a: f64, x| a.max(x.abs()))
    }

    /// Newton correction `δ` solving `(M + Δt L D) δ = -r` for frozen
    /// directions, through the symmetric system in `η = D δ`.
    fn newton_direction(&self, rho: &[f64], rho_old: &[f64], dt: f64, dirs: &[bool], r: &[f64]) -> Result<Vec<f64>> {
        let n = rho.len();
        let vol = self.mesh.cell_volumes();
        let mut lap = self.pattern.zeroed();
        for (f, face) in self.mesh.faces().iter().enumerate() {
            if let (k1, Some(k2)) = face.cells {
                let w = dt * self.coupling[f] * self.upwind(rho_old, dirs, f);
                if w != 0.0 {
                    lap.add(k1, k1, w);
                    lap.add(k2, k2, w);
                    lap.add(k1, k2, -w);
                }
            }
        }
        let d: Vec<f64> = rho.iter().map(|&x| potential_derivative(x, self.m)).collect();
        // cells whose coupling is negligible against their mass are solved
        // from the mass term alone
        let coupled: Vec<bool> = (0..n).map(|k| d[k] * lap.diag(k) > DECOUPLED * vol[k]).collect();
        let shift: Vec<f64> = (0..n).map(|k| if coupled[k] { vol[k] / d[k] } else { 0.0 }).collect();
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let eta = spd_solve_masked(&lap, &shift, &rhs, &coupled)?;
        Ok((0..n)
            .map(|k| {
                if coupled[k] {
                    return eta[k] / d[k];
                }
                let (cols, vals) = lap.row(k);
                let cross: f64 = cols.iter().zip(vals).filter(|(&j, _)| coupled[j]).map(|(&j, &a)| a * eta[j]).sum();
                (rhs[k] - cross) / vol[k]
            })
            .collect())
    }

    /// Newton iterations for fixed directions; returns the iterate and the
    /// number of iterations spent.
    fn newton_frozen(&self, start: &[f64], rho_old: &[f64], dt: f64, dirs: &[bool]) -> Result<(Vec<f64>, usize)> {
        let mut rho = start.to_vec();
        let mut r = self.residual_with(&rho, rho_old, dt, dirs);
        for it in 0..self.options.max_iterations {
            if Self::norm_inf(&r) <= self.options.tolerance {
                return Ok((rho, it));
            }
            let delta = self.newton_direction(&rho, rho_old, dt, dirs, &r)?;
            let (next, rn) = self.damped(&rho, &delta, &r, rho_old, dt, dirs);
            rho = next;
            r = rn;
        }
        if Self::norm_inf(&r) <= self.options.tolerance {
            Ok((rho, self.options.max_iterations))
        } else {
            Err(PmeError::NewtonDiverged { iterations: self.options.max_iterations, residual: Self::norm_inf(&r) })
        }
    }

    /// Applies `δ`, halving while the residual 2-norm grows (if enabled).
    fn damped(&self, rho: &[f64], delta: &[f64], r: &[f64], rho_old: &[f64], dt: f64, dirs: &[bool]) -> (Vec<f64>, Vec<f64>) {
        let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let r0 = norm2(r);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = rho.iter().zip(delta).map(|(a, b)| a + t * b).collect();
            let rt = self.residual_with(&trial, rho_old, dt, dirs);
            if !self.options.line_search || norm2(&rt) <= r0 || t < 1e-6 {
                return (trial, rt);
            }
            t *= 0.5;
        }
    }

    /// Advances `state` by `dt`.
    pub fn step(&self, state: &MixedState, dt: f64) -> Result<MixedState> {
        self.step_with_report(state, dt).map(|(s, _)| s)
    }

    pub fn step_with_report(&self, state: &MixedState, dt: f64) -> Result<(MixedState, MixedReport)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(PmeError::InvalidTimeStep(dt));
        }
        let old = &state.rho;
        let tol = self.options.tolerance;
        let mut rho = old.clone();
        let mut dirs = self.directions(&rho);
        let mut residual = Self::norm_inf(&self.residual_with(&rho, old, dt, &dirs));
        let finish = |rho: Vec<f64>, newton: usize, picard: usize, residual: f64| -> Result<(MixedState, MixedReport)> {
            let next = self.state_from_density(rho, state.time + dt)?;
            Ok((next, MixedReport { newton_iterations: newton, picard_iterations: picard, residual }))
        };
        if residual <= tol {
            return finish(rho, 0, 0, residual);
        }
        for it in 1..=self.options.max_iterations {
            let r = self.residual_with(&rho, old, dt, &dirs);
            let delta = self.newton_direction(&rho, old, dt, &dirs, &r)?;
            rho = self.damped(&rho, &delta, &r, old, dt, &dirs).0;
            let next_dirs = self.directions(&rho);
            residual = Self::norm_inf(&self.residual_with(&rho, old, dt, &next_dirs));
            let settled = self.same_pattern(&dirs, &next_dirs, old);
            dirs = next_dirs;
            if residual <= tol && settled {
                return finish(rho, it, 0, residual);
            }
        }
        for it in 1..=self.options.picard_iterations {
            let (solved, _) = self.newton_frozen(&rho, old, dt, &dirs)?;
            rho = rho.iter().zip(&solved).map(|(a, b)| 0.5 * (a + b)).collect();
            dirs = self.directions(&rho);
            residual = Self::norm_inf(&self.residual_with(&rho, old, dt, &dirs));
            if residual <= tol {
                return finish(rho, self.options.max_iterations, it, residual);
            }
        }
        Err(PmeError::NewtonDiverged { iterations: self.options.max_iterations + self.options.picard_iterations, residual })
    }

    /// Direction patterns agree on every face where the choice changes
    /// the upwind value.
    fn same_pattern(&self, a: &[bool], b: &[bool], rho_old: &[f64]) -> bool {
        self.mesh.faces().iter().enumerate().all(|(f, face)| match face.cells {
            (k1, Some(k2)) => a[f] == b[f] || rho_old[k1] == rho_old[k2],
            _ => true,
        })
    }

    /// Step with post hoc CFL monitoring. With auto-halving on, a step
    /// violating its bound is recomputed with half the time step; returns
    /// the new state and the time step actually taken.
    pub fn step_checked(&self, state: &MixedState, dt: f64) -> Result<(MixedState, f64)> {
        let mut h = dt;
        let mut halvings = 0;
        loop {
            let next = self.step(state, h)?;
            let (_, bound) = cfl_max_dt(self.mesh, &next.flux);
            if !self.options.auto_halve || h <= bound {
                return Ok((next, h));
            }
            if halvings == self.options.max_halvings {
                return Err(PmeError::CflNotMet { dt: h, bound });
            }
            h *= 0.5;
            halvings += 1;
        }
    }

    pub fn total_mass(&self, state: &MixedState) -> f64 {
        state.rho.iter().zip(self.mesh.cell_volumes()).map(|(r, v)| r * v).sum()
    }

    pub fn physical_energy(&self, state: &MixedState) -> f64 {
        physical_energy(self.mesh, &state.rho, self.m)
    }
}
