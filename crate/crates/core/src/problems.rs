//! Exact solutions and initial data for the standard test problems.

use crate::error::{PmeError, Result};
use crate::math;
use crate::mesh::{BoxDomain, MeshKind};

use core::f64::consts::FRAC_PI_2;

fn check_exponent(m: f64) -> Result<()> {
    if m > 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(PmeError::InvalidExponent(m))
    }
}

/// Self-similarity exponent `k = d / (d(m-1) + 2)`; `1/(m+1)` in 1D.
pub fn barenblatt_exponent(m: f64, d: usize) -> f64 {
    let d = d as f64;
    d / (d * (m - 1.0) + 2.0)
}

/// Barenblatt-Pattle profile shifted to start at `t + 1`:
///
/// `ρ = (t+1)^{-k} ( s0 - k(m-1)|x|² / (2dm (t+1)^{2k/d}) )_+^{1/(m-1)}`.
pub fn barenblatt(x: [f64; 2], t: f64, m: f64, s0: f64, d: usize) -> Result<f64> {
    check_exponent(m)?;
    let k = barenblatt_exponent(m, d);
    let df = d as f64;
    let r2 = x[..d].iter().map(|v| v * v).sum::<f64>();
    let tau = t + 1.0;
    let base = s0 - k * (m - 1.0) * r2 / (2.0 * df * m * math::powf(tau, 2.0 * k / df));
    if base <= 0.0 {
        return Ok(0.0);
    }
    Ok(math::powf(tau, -k) * math::powf(base, 1.0 / (m - 1.0)))
}

/// Support radius of [`barenblatt`] at time `t`.
pub fn barenblatt_radius(t: f64, m: f64, s0: f64, d: usize) -> f64 {
    let k = barenblatt_exponent(m, d);
    let df = d as f64;
    math::sqrt(2.0 * df * m * s0 / (k * (m - 1.0))) * math::powf(t + 1.0, k / df)
}

/// Right interface `η_m(t) = sqrt(2m / (k(m-1))) (t+1)^k` of the 1D
/// profile with unit scaling (`s0 = 1`).
pub fn front_position(t: f64, m: f64) -> f64 {
    barenblatt_radius(t, m, 1.0, 1)
}

/// Initial datum of the waiting-time test, zero outside `[-π/2, π/2]`.
pub fn waiting_time_profile(x: f64, m: f64, theta: f64) -> f64 {
    // points within rounding of ±π/2 sit on the interface
    if x.abs() >= FRAC_PI_2 * (1.0 - 8.0 * f64::EPSILON) {
        return 0.0;
    }
    let c = math::cos(x);
    let c2 = c * c;
    let inner = (m - 1.0) / m * ((1.0 - theta) * c2 + theta * c2 * c2);
    if inner <= 0.0 {
        0.0
    } else {
        math::powf(inner, 1.0 / (m - 1.0))
    }
}

/// Theoretical waiting time `t* = 1 / (2(m+1)(1-θ))`, valid for `θ <= 1/4`.
pub fn waiting_time(m: f64, theta: f64) -> Result<f64> {
    check_exponent(m)?;
    if !(0.0..=0.25).contains(&theta) {
        return Err(PmeError::WaitingTimeUndefined(theta));
    }
    Ok(1.0 / (2.0 * (m + 1.0) * (1.0 - theta)))
}

/// Two Gaussian bumps centred at `±(0.3, 0.3)`.
pub fn merging_gaussians(x: f64, y: f64) -> f64 {
    let bump = |cx: f64, cy: f64| math::exp(-20.0 * ((x - cx) * (x - cx) + (y - cy) * (y - cy)));
    bump(0.3, 0.3) + bump(-0.3, -0.3)
}

/// Horseshoe-shaped datum: a three-quarter annulus with two round caps.
pub fn complex_support(x: f64, y: f64, m: f64) -> f64 {
    let p = 3.0 / (2.0 * (m - 1.0));
    let r = math::sqrt(x * x + y * y);
    let cap = |v: f64| 25.0 * math::powf(v.max(0.0), p);
    if (0.5..=1.0).contains(&r) && (x < 0.0 || y < 0.0) {
        cap(0.0625 - (r - 0.75) * (r - 0.75))
    } else if x * x + (y - 0.75) * (y - 0.75) <= 0.0625 && x >= 0.0 {
        cap(0.0625 - x * x - (y - 0.75) * (y - 0.75))
    } else if (x - 0.75) * (x - 0.75) + y * y <= 0.0625 && y >= 0.0 {
        cap(0.0625 - (x - 0.75) * (x - 0.75) - y * y)
    } else {
        0.0
    }
}

/// A named test problem with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Problem {
    /// Barenblatt profile in `dim` dimensions.
    Barenblatt { dim: usize, m: f64, s0: f64 },
    /// Waiting-time datum with shape parameter `θ`.
    Waiting { m: f64, theta: f64 },
    /// Two merging Gaussians.
    Gaussians { m: f64 },
    /// Horseshoe (complex support).
    Horseshoe { m: f64 },
}

impl Problem {
    /// Catalog lookup: `barenblatt1d`, `barenblatt2d`, `waiting`,
    /// `gaussians`, `horseshoe`. `s0` and `theta` fall back to the
    /// standard values (3 in 1D, 1 in 2D; θ = 0).
    pub fn from_name(name: &str, m: f64, s0: Option<f64>, theta: Option<f64>) -> Option<Self> {
        Some(match name {
            "barenblatt1d" => Problem::Barenblatt { dim: 1, m, s0: s0.unwrap_or(3.0) },
            "barenblatt2d" => Problem::Barenblatt { dim: 2, m, s0: s0.unwrap_or(1.0) },
            "waiting" => Problem::Waiting { m, theta: theta.unwrap_or(0.0) },
            "gaussians" => Problem::Gaussians { m },
            "horseshoe" => Problem::Horseshoe { m },
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Barenblatt { dim: 1, .. } => "barenblatt1d",
            Problem::Barenblatt { .. } => "barenblatt2d",
            Problem::Waiting { .. } => "waiting",
            Problem::Gaussians { .. } => "gaussians",
            Problem::Horseshoe { .. } => "horseshoe",
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            Problem::Barenblatt { m, .. }
            | Problem::Waiting { m, .. }
            | Problem::Gaussians { m }
            | Problem::Horseshoe { m } => m,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Problem::Barenblatt { dim, .. } => *dim,
            Problem::Waiting { .. } => 1,
            Problem::Gaussians { .. } | Problem::Horseshoe { .. } => 2,
        }
    }

    pub fn domain(&self) -> BoxDomain {
        match self {
            Problem::Barenblatt { dim: 1, .. } => BoxDomain::interval(-10.0, 10.0),
            Problem::Barenblatt { .. } => BoxDomain::square(-6.0, 6.0),
            Problem::Waiting { .. } => BoxDomain::interval(-core::f64::consts::PI, core::f64::consts::PI),
            Problem::Gaussians { .. } => BoxDomain::square(-1.0, 1.0),
            Problem::Horseshoe { .. } => BoxDomain::square(-2.0, 2.0),
        }
    }

    /// Mesh generator used when a run does not ask for one.
    pub fn default_mesh_kind(&self) -> MeshKind {
        match self.dim() {
            1 => MeshKind::Interval,
            _ => match self {
                Problem::Barenblatt { .. } => MeshKind::Quad,
                _ => MeshKind::AcuteTriangle,
            },
        }
    }

    pub fn initial_density(&self, x: [f64; 2]) -> f64 {
        match *self {
            Problem::Barenblatt { dim, m, s0 } => barenblatt(x, 0.0, m, s0, dim).unwrap_or(0.0),
            Problem::Waiting { m, theta } => waiting_time_profile(x[0], m, theta),
            Problem::Gaussians { .. } => merging_gaussians(x[0], x[1]),
            Problem::Horseshoe { m } => complex_support(x[0], x[1], m),
        }
    }

    /// Exact density at `(x, t)`, where one is known.
    pub fn exact(&self, x: [f64; 2], t: f64) -> Option<f64> {
        match *self {
            Problem::Barenblatt { dim, m, s0 } => barenblatt(x, t, m, s0, dim).ok(),
            _ => None,
        }
    }

    pub fn has_exact(&self) -> bool {
        matches!(self, Problem::Barenblatt { .. })
    }

    /// Position of the right interface at time `t` (1D problems).
    pub fn front(&self, t: f64) -> Option<f64> {
        match *self {
            Problem::Barenblatt { dim: 1, m, s0 } => Some(barenblatt_radius(t, m, s0, 1)),
            Problem::Waiting { m, theta } => match waiting_time(m, theta) {
                Ok(ts) if t <= ts => Some(FRAC_PI_2),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn waiting_time(&self) -> Option<f64> {
        match *self {
            Problem::Waiting { m, theta } => waiting_time(m, theta).ok(),
            _ => None,
        }
    }

    /// Point whose density is recorded over time: the initial right
    /// interface for the waiting-time test.
    pub fn tracked_point(&self) -> Option<[f64; 2]> {
        match self {
            Problem::Waiting { .. } => self.front(0.0).map(|x| [x, 0.0]),
            _ => None,
        }
    }

    /// Inner and full error regions of the convergence studies.
    pub fn error_regions(&self) -> (BoxDomain, BoxDomain) {
        match self {
            Problem::Barenblatt { dim: 1, .. } => (BoxDomain::interval(-5.0, 5.0), self.domain()),
            Problem::Barenblatt { .. } => (BoxDomain::square(-3.0, 3.0), self.domain()),
            _ => (self.domain(), self.domain()),
        }
    }
}
