use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pme_core::geometry::{compute_edge_geometry, is_delaunay, DELAUNAY_TOLERANCE};
use pme_harness::config::parse_override;
use pme_harness::{meshio, parse_config, run_convergence, run_simulation, FinalState, Result};

#[derive(Parser)]
#[command(name = "pme", version, about = "Porous medium equation solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    dt: Option<String>,
    /// Final time.
    #[arg(long = "final-time")]
    final_time: Option<String>,
    /// Cells per axis.
    #[arg(short = 'n', long)]
    cells: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Result<Vec<(String, String)>> {
        let mut out: Vec<(String, String)> = self.set.iter().map(|s| parse_override(s)).collect::<Result<_>>()?;
        for (key, value) in [("dt", &self.dt), ("T", &self.final_time), ("N", &self.cells)] {
            if let Some(v) = value {
                out.push((key.to_string(), v.clone()));
            }
        }
        Ok(out)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its time series / snapshots.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a refinement study against the exact solution.
    Converge {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Print statistics of a mesh file.
    MeshInfo { mesh: PathBuf },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, overrides } => {
            let cfg = parse_config(&std::fs::read_to_string(config)?, &overrides.pairs()?)?;
            let sim = run_simulation(&cfg)?;
            let last = sim.records.last();
            println!("scheme   {}", cfg.scheme.name());
            println!("problem  {}", cfg.problem.name());
            println!("cells    {}", sim.mesh.num_cells());
            println!("steps    {}", last.map_or(0, |r| r.step));
            println!("time     {}", sim.state.time());
            if let Some(r) = last {
                println!("mass     {:.16e}", r.mass);
                println!("energy   {:.16e}", r.energy);
                println!("density  [{:.6e}, {:.6e}]", r.min_density, r.max_density);
            }
            if let FinalState::LogDensity(s) = &sim.state {
                println!("active   {}/{}", s.num_active(), s.u.len());
            }
        }
        Command::Converge { config, overrides } => {
            let cfg = parse_config(&std::fs::read_to_string(config)?, &overrides.pairs()?)?;
            let rows = run_convergence(&cfg)?;
            println!("{:>5} {:>6} {:>12} {:>12} {:>7} {:>12} {:>7}", "level", "N", "dt", "inner", "order", "full", "order");
            let fmt = |o: Option<f64>| o.map_or("-".to_string(), |v| format!("{v:.3}"));
            for r in rows {
                println!(
                    "{:>5} {:>6} {:>12.4e} {:>12.4e} {:>7} {:>12.4e} {:>7}",
                    r.level,
                    r.n,
                    r.dt,
                    r.error_inner,
                    fmt(r.order_inner),
                    r.error_full,
                    fmt(r.order_full)
                );
            }
        }
        Command::MeshInfo { mesh } => {
            let mesh = meshio::read_mesh(&std::fs::read_to_string(mesh)?)?;
            let geom = compute_edge_geometry(&mesh)?;
            let vols = mesh.cell_volumes();
            let min_omega = (0..mesh.num_faces())
                .filter(|&f| !mesh.face(f).is_boundary())
                .map(|f| geom.omega(f))
                .fold(f64::INFINITY, f64::min);
            println!("kind        {}", mesh.kind().name());
            println!("vertices    {}", mesh.num_vertices());
            println!("cells       {}", mesh.num_cells());
            println!("faces       {}", mesh.num_faces());
            println!("volume      {:.16e}", mesh.domain_volume());
            println!("cell volume [{:.6e}, {:.6e}]", vols.iter().copied().fold(f64::INFINITY, f64::min), vols.iter().copied().fold(0.0, f64::max));
            println!("min weight  {min_omega:.6e}");
            println!("delaunay    {}", is_delaunay(&mesh, &geom, false, DELAUNAY_TOLERANCE));
            println!("strict      {}", is_delaunay(&mesh, &geom, true, DELAUNAY_TOLERANCE));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
