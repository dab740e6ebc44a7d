use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use trap_core::potentials::{PotentialShape, ShapeKind};
use trap_core::runner::config::{execute, load_config};
use trap_core::runner::output::{num, write_results, Sidecar};
use trap_core::runner::{
    estimate_adiabatic_limit, fit_values, reproduce_figure, Execution, FigureOptions, RunControls,
    Scenario, FIGURE_IDS,
};

#[derive(Parser)]
#[command(name = "trapsim", version, about = "Retention in slowly driven 1D traps at threshold")]
struct Cli {
    /// Directory for CSV tables and metadata sidecars.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Plateau tolerance for adiabatic-limit searches.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest grid a single run may use.
    #[arg(long, global = true)]
    max_cost: Option<usize>,
    /// Also write wavefunction snapshots.
    #[arg(long, global = true)]
    dump_snapshots: bool,
    /// Run sweeps on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every scenario of a config file.
    Run { config: PathBuf },
    /// Regenerate the data behind one figure (or `all`).
    Figure { id: String },
    /// Estimate the slow-drive limit of the retention probability.
    Limit {
        #[arg(long)]
        nu: f64,
        /// Exponent after the touch, if different.
        #[arg(long)]
        nu2: Option<f64>,
        #[arg(long, default_value = "delta")]
        shape: String,
        #[arg(long, default_value_t = 0)]
        state: usize,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        v_start: f64,
    },
    /// Print the two closed-form fits at `nu`.
    Fit {
        #[arg(long)]
        nu: f64,
    },
}

impl Cli {
    fn controls(&self) -> RunControls {
        let mut ctl = RunControls::default();
        if let Some(m) = self.max_cost {
            ctl.max_points = m;
        }
        ctl
    }

    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &Cli) -> trap_core::Result<()> {
    match &cli.command {
        Command::Run { config } => {
            let mut cfg = load_config(config)?;
            if let Some(m) = cli.max_cost {
                cfg.controls.max_points = m;
            }
            if let Some(tol) = cli.tol {
                for spec in &mut cfg.scenarios {
                    if let Some(limit) = spec.limit.as_mut() {
                        limit.tol = tol;
                    }
                }
            }
            for f in execute(&cfg, &cli.out_dir, cli.exec(), cli.dump_snapshots)? {
                println!("{}", f.display());
            }
        }
        Command::Figure { id } => {
            let mut opts = FigureOptions::new(&cli.out_dir);
            opts.controls = cli.controls();
            opts.exec = cli.exec();
            if let Some(tol) = cli.tol {
                opts.tol = tol;
            }
            let ids: Vec<&str> = if id == "all" { FIGURE_IDS.to_vec() } else { vec![id.as_str()] };
            for id in ids {
                let report = reproduce_figure(id, &opts)?;
                for w in &report.warnings {
                    eprintln!("warning ({id}): {w}");
                }
                for f in &report.files {
                    println!("{}", f.display());
                }
            }
        }
        Command::Limit { nu, nu2, shape, state, mu, v_start } => {
            let kind = ShapeKind::parse(shape)?;
            let scenario = if kind == ShapeKind::Delta {
                Scenario::zero_range(*nu, *v_start, *mu)
            } else {
                Scenario::culling(PotentialShape::new(kind, 1.0)?, *nu, *v_start, *mu, *state)
            };
            let scenario = scenario.with_departure(nu2.unwrap_or(*nu));
            let tol = cli.tol.unwrap_or(3e-3);
            let est = estimate_adiabatic_limit(&scenario, *v_start, tol, &cli.controls(), 16)?;

            std::fs::create_dir_all(&cli.out_dir)?;
            let csv = cli.out_dir.join("limit.csv");
            write_results(&csv, &est.runs)?;
            let mut meta = Sidecar::new();
            meta.set("scenario", scenario.label());
            meta.set("tol", num(tol));
            meta.set("p_limit", num(est.p_limit));
            meta.set("plateau_residual", num(est.plateau_residual));
            meta.set("converged", est.converged);
            for (k, r) in est.runs.iter().enumerate() {
                meta.record_run(&format!("run{k}"), r);
            }
            meta.write(&cli.out_dir.join("limit_meta.txt"))?;

            println!("P_limit = {:.6}", est.p_limit);
            println!("residual = {:.2e} ({})", est.plateau_residual,
                if est.converged { "plateau reached" } else { "NOT converged" });
            println!("v_min = {:.4e} after {} runs", est.v_sequence.last().copied().unwrap_or(f64::NAN), est.runs.len());
        }
        Command::Fit { nu } => {
            let (large, small) = fit_values(*nu)?;
            println!("1/(0.65+nu)             = {large:.6}");
            println!("1/(1+0.44nu+0.28nu^2)   = {small:.6}");
        }
    }
    Ok(())
}
