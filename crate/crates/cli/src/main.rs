//! `lel`: batch runs of the Lane-Emden laboratory. Each subcommand reads an
//! optional JSON config, applies flag overrides, writes CSV tables and a
//! `manifest.json` into `--out`, and exits 0 when every requested check
//! passes, 1 when a check fails, 2 on configuration errors, 3 when a solver
//! does not converge and 4 on I/O failures.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{load, DomainConfig, Versioned};
use failure::Failure;
use output::Run;

#[derive(Parser, Debug)]
#[command(name = "lel", version, about = "Numerical laboratory for −Δu = v^p, −Δv = u^q with Dirichlet data")]
struct Cli {
    /// JSON config for the subcommand; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "lel-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed of the multistart sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

/// `20,40,80` or `START:END[:STEP]`.
#[derive(Debug, Clone)]
struct PGrid(Vec<f64>);

impl FromStr for PGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.contains(':') {
            return config::parse_p_range(s).map(PGrid);
        }
        s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"))).collect::<Result<_, _>>().map(PGrid)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Limit-problem profiles and the reference integral table.
    Special {
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Green function, regular part and Robin function sampled on a lattice.
    Green {
        /// unit-disk, rectangle:WxH or disk:CX,CY,R
        #[arg(long)]
        domain: Option<DomainConfig>,
    },
    /// Critical points of the Kirchhoff-Routh function by multistart Newton.
    Kr {
        #[arg(long)]
        domain: Option<DomainConfig>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Radial solution on the unit disk.
    SolveRadial {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Planar solution on a composite grid.
    #[command(name = "solve-2d")]
    Solve2d {
        #[arg(long)]
        domain: Option<DomainConfig>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        /// Coarse grid spacing.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Measured maxima and scales against the predicted rates along a p grid.
    Rates {
        #[arg(long)]
        domain: Option<DomainConfig>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        p: Option<PGrid>,
    },
    /// Smallest singular values of the linearisation along a p grid.
    Spectrum {
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        p: Option<PGrid>,
    },
    /// Pohozaev residuals on balls around a point.
    Pohozaev {
        /// A solution.json written by solve-radial.
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn execute<C, F>(cli: &Cli, name: &str, patch: impl FnOnce(&mut C), body: F) -> Result<bool, Failure>
where
    C: serde::de::DeserializeOwned + Default + Versioned + Serialize,
    F: FnOnce(&C, &mut Run) -> Result<(), Failure>,
{
    let mut cfg: C = load(cli.config.as_deref())?;
    patch(&mut cfg);
    let mut run = Run::new(&cli.out, name)?;
    run.set_config(&cfg);
    let result = body(&cfg, &mut run);
    let passed = run.checks_passed();
    let written = run.finish(result.as_ref().err());
    result?;
    written?;
    Ok(passed)
}

fn dispatch(cli: &Cli) -> Result<bool, Failure> {
    let seed = cli.seed;
    match &cli.command {
        Command::Special { theta } => execute(cli, "special", |c: &mut config::SpecialConfig| set(&mut c.theta, *theta), commands::special),
        Command::Green { domain } => execute(cli, "green", |c: &mut config::GreenConfig| set(&mut c.domain, domain.clone()), commands::green),
        Command::Kr { domain, k } => execute(
            cli,
            "kr",
            |c: &mut config::KrConfig| {
                set(&mut c.domain, domain.clone());
                set(&mut c.k, *k);
                set(&mut c.starts.seed, seed);
            },
            commands::kr,
        ),
        Command::SolveRadial { p, theta } => execute(
            cli,
            "solve-radial",
            |c: &mut config::RadialConfig| {
                set(&mut c.p, *p);
                set(&mut c.theta, *theta);
            },
            commands::solve_radial,
        ),
        Command::Solve2d { domain, p, theta, h } => execute(
            cli,
            "solve-2d",
            |c: &mut config::PlanarConfig| {
                set(&mut c.domain, domain.clone());
                set(&mut c.p, *p);
                set(&mut c.theta, *theta);
                set(&mut c.grid.h, *h);
                set(&mut c.starts.seed, seed);
            },
            commands::solve_2d,
        ),
        Command::Rates { domain, theta, p } => execute(
            cli,
            "rates",
            |c: &mut config::RatesConfig| {
                set(&mut c.domain, domain.clone());
                set(&mut c.theta, *theta);
                set(&mut c.p_grid, p.clone().map(|g| g.0));
                set(&mut c.starts.seed, seed);
            },
            commands::rates,
        ),
        Command::Spectrum { theta, p } => execute(
            cli,
            "spectrum",
            |c: &mut config::SpectrumConfig| {
                set(&mut c.theta, *theta);
                set(&mut c.p_grid, p.clone().map(|g| g.0));
            },
            commands::spectrum,
        ),
        Command::Pohozaev { solution, p, theta } => execute(
            cli,
            "pohozaev",
            |c: &mut config::PohozaevConfig| {
                if solution.is_some() {
                    c.solution = solution.clone();
                }
                set(&mut c.p, *p);
                set(&mut c.theta, *theta);
            },
            commands::pohozaev,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LEL_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let built = if n == 0 {
            Err("--threads must be at least 1".to_string())
        } else {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
        };
        if let Err(e) = built {
            eprintln!("lel: {}", Failure::Config(e));
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("lel: one or more checks failed; see {}", cli.out.join(output::MANIFEST).display());
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("lel: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
