//! Run configuration: a line-oriented `key = value` file with `#`
//! comments.
//!
//! ```text
//! scheme = logdensity      # or mixed
//! problem = barenblatt1d
//! m = 2
//! dt = 0.2
//! T = 1
//! N = 100
//! ```

use std::path::PathBuf;

use pme_core::logdensity::{NewtonOptions, StiffnessVariant};
use pme_core::mesh::{BoxDomain, MeshKind};
use pme_core::mixed::MixedOptions;
use pme_core::problems::Problem;
use pme_core::quadrature::MAX_DEGREE;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    LogDensity,
    Mixed,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::LogDensity => "logdensity",
            Scheme::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub problem: Problem,
    pub domain: BoxDomain,
    pub mesh_kind: MeshKind,
    /// Cells per axis.
    pub counts: Vec<usize>,
    pub dt: f64,
    pub final_time: f64,
    pub variant: StiffnessVariant,
    pub newton: NewtonOptions,
    pub mixed: MixedOptions,
    pub quadrature_degree: usize,
    /// Levels of a convergence study.
    pub levels: usize,
    pub timeseries_csv: Option<PathBuf>,
    pub convergence_csv: Option<PathBuf>,
    /// VTK snapshot path; `{step}` is replaced by the step index.
    pub vtk: Option<String>,
    /// Record every n-th step (the last step is always recorded).
    pub output_every: usize,
}

/// Default cell counts: 100 cells in 1D, 32² for the 2D Barenblatt run and
/// a 3066-cell acute mesh for the qualitative problems.
fn default_counts(problem: &Problem, kind: MeshKind) -> Vec<usize> {
    match (problem.dim(), kind) {
        (1, _) => vec![100],
        (_, MeshKind::AcuteTriangle) => vec![36, 42],
        _ => vec![32, 32],
    }
}

#[derive(Default)]
struct Raw {
    entries: Vec<(String, String)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

const KEYS: &[&str] = &[
    "scheme",
    "problem",
    "m",
    "dt",
    "T",
    "s0",
    "theta",
    "domain",
    "mesh",
    "N",
    "variant",
    "cutoff",
    "newton_tol",
    "newton_max_iter",
    "line_search_halvings",
    "auto_halve",
    "cfl_max_halvings",
    "quadrature_degree",
    "levels",
    "timeseries_csv",
    "convergence_csv",
    "vtk",
    "output_every",
];

fn invalid(key: &str, message: impl Into<String>) -> HarnessError {
    HarnessError::InvalidValue { key: key.to_string(), message: message.into() }
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| invalid(key, format!("cannot parse `{v}`")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| number(key, s.trim())).collect()
}

/// Splits `text` into `(key, value)` pairs.
fn tokenize(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Syntax { line: n + 1, message: format!("expected `key = value`, got `{line}`") })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses and validates a configuration file; `overrides` (`key=value`)
/// take precedence over the file.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut raw = Raw { entries: tokenize(text)? };
    raw.entries.extend(overrides.iter().cloned());
    for (k, _) in &raw.entries {
        if !KEYS.contains(&k.as_str()) {
            return Err(HarnessError::UnknownKey(k.clone()));
        }
    }
    let req = |k: &'static str| raw.get(k).ok_or(HarnessError::MissingKey(k));

    let scheme = match req("scheme")? {
        "logdensity" => Scheme::LogDensity,
        "mixed" => Scheme::Mixed,
        other => return Err(invalid("scheme", format!("`{other}` is not logdensity or mixed"))),
    };
    let m: f64 = number("m", req("m")?)?;
    if !(m > 1.0 && m.is_finite()) {
        return Err(invalid("m", "the exponent must exceed 1"));
    }
    let s0 = raw.get("s0").map(|v| number("s0", v)).transpose()?;
    let theta = raw.get("theta").map(|v| number("theta", v)).transpose()?;
    let name = req("problem")?;
    let problem = Problem::from_name(name, m, s0, theta).ok_or_else(|| invalid("problem", format!("unknown problem `{name}`")))?;

    let dt: f64 = number("dt", req("dt")?)?;
    let final_time: f64 = number("T", req("T")?)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", "must be positive"));
    }
    if !(final_time >= dt && final_time.is_finite()) {
        return Err(invalid("T", "final time must be at least dt"));
    }

    let dim = problem.dim();
    let domain = match raw.get("domain") {
        None => problem.domain(),
        Some(v) => {
            let b = list("domain", v)?;
            match (dim, b.as_slice()) {
                (1, &[a, c]) if a < c => BoxDomain::interval(a, c),
                (2, &[a, c]) if a < c => BoxDomain::square(a, c),
                (2, &[x0, y0, x1, y1]) if x0 < x1 && y0 < y1 => BoxDomain { lo: [x0, y0], hi: [x1, y1] },
                _ => return Err(invalid("domain", "expected `lo,hi` or (2D) `x0,y0,x1,y1`")),
            }
        }
    };
    let mesh_kind = match raw.get("mesh") {
        None => problem.default_mesh_kind(),
        Some(v) => MeshKind::from_name(v).ok_or_else(|| invalid("mesh", format!("unknown mesh kind `{v}`")))?,
    };
    if (mesh_kind == MeshKind::Interval) != (dim == 1) {
        return Err(invalid("mesh", format!("`{}` does not match a {dim}D problem", mesh_kind.name())));
    }
    let counts = match raw.get("N") {
        None => default_counts(&problem, mesh_kind),
        Some(v) => {
            let c: Vec<usize> = v.split(',').map(|s| number("N", s.trim())).collect::<Result<_>>()?;
            match (dim, c.len()) {
                (1, 1) => c,
                (2, 1) => vec![c[0], c[0]],
                (2, 2) => c,
                _ => return Err(invalid("N", "one count per axis")),
            }
        }
    };
    if counts.contains(&0) {
        return Err(invalid("N", "cell counts must be positive"));
    }

    let variant = match raw.get("variant") {
        None => StiffnessVariant::default(),
        Some(v) => {
            if scheme == Scheme::Mixed {
                return Err(invalid("variant", "only the logdensity scheme has stiffness variants"));
            }
            StiffnessVariant::from_name(v).ok_or_else(|| invalid("variant", format!("`{v}` is not vertex or edge")))?
        }
    };
    let mut newton = NewtonOptions::default();
    let mut mixed = MixedOptions::default();
    if let Some(v) = raw.get("cutoff") {
        newton.cutoff = number("cutoff", v)?;
    }
    if let Some(v) = raw.get("newton_tol") {
        let tol: f64 = number("newton_tol", v)?;
        if !(tol > 0.0) {
            return Err(invalid("newton_tol", "must be positive"));
        }
        newton.tolerance = tol;
        mixed.tolerance = tol;
    }
    if let Some(v) = raw.get("newton_max_iter") {
        newton.max_iterations = number("newton_max_iter", v)?;
        mixed.max_iterations = newton.max_iterations;
    }
    if let Some(v) = raw.get("line_search_halvings") {
        newton.max_halvings = number("line_search_halvings", v)?;
    }
    if let Some(v) = raw.get("auto_halve") {
        if scheme != Scheme::Mixed {
            return Err(invalid("auto_halve", "only the mixed scheme monitors the CFL bound"));
        }
        mixed.auto_halve = match v {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            _ => return Err(invalid("auto_halve", format!("`{v}` is not a boolean"))),
        };
    }
    if let Some(v) = raw.get("cfl_max_halvings") {
        mixed.max_halvings = number("cfl_max_halvings", v)?;
    }
    let quadrature_degree = match raw.get("quadrature_degree") {
        None => MAX_DEGREE,
        Some(v) => {
            let d: usize = number("quadrature_degree", v)?;
            if d > MAX_DEGREE {
                return Err(invalid("quadrature_degree", format!("at most {MAX_DEGREE}")));
            }
            d
        }
    };
    let levels = match raw.get("levels") {
        None => 4,
        Some(v) => number("levels", v)?,
    };
    let output_every = match raw.get("output_every") {
        None => 1,
        Some(v) => number("output_every", v)?,
    };
    if output_every == 0 {
        return Err(invalid("output_every", "must be positive"));
    }

    Ok(RunConfig {
        scheme,
        problem,
        domain,
        mesh_kind,
        counts,
        dt,
        final_time,
        variant,
        newton,
        mixed,
        quadrature_degree,
        levels,
        timeseries_csv: raw.get("timeseries_csv").map(PathBuf::from),
        convergence_csv: raw.get("convergence_csv").map(PathBuf::from),
        vtk: raw.get("vtk").map(str::to_string),
        output_every,
    })
}

/// Splits a `key=value` command-line override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| HarnessError::Syntax { line: 0, message: format!("override `{s}` is not key=value") })
}
