//! `uep`: runs the coding validation and allocation experiments from a
//! scenario file and writes CSV tables.
//!
//! Exit status: 0 on success, 2 when no feasible allocation exists, 1 on any
//! other error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use uep_core::allocators::{DirectConfig, DirectMode};
use uep_core::channel::ErasureView;
use uep_core::experiments::{coverage_sc, psnr_map_sfn, rbp_sweep, solve, validate_approx, SolverChoice};
use uep_core::{Error, ExperimentResult, Scenario};

#[derive(Parser, Debug)]
#[command(name = "uep", version, about = "Expanding-window RLNC and eMBMS allocation experiments")]
struct Cli {
    /// Scenario file (TOML). Built-in defaults when omitted.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// Directory for the CSV outputs.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    /// Replaces every seed of the scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo trials per point (validate-approx).
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Reference search next to the heuristic.
    #[arg(long, global = true, value_enum)]
    direct: Option<DirectArg>,

    /// Erasure model used when scoring users.
    #[arg(long, global = true, value_enum)]
    erasure_view: Option<ViewArg>,

    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic decoding probabilities against simulation.
    ValidateApprox,
    /// Heuristic and direct search over the RBP counts of the scenario.
    SweepRbp,
    /// Single-cell coverage along the radial users.
    CoverageSc,
    /// PSNR over the SFN grid.
    PsnrMapSfn,
    /// One allocation at the scenario's RBP count.
    Solve {
        #[arg(long, value_enum, default_value = "heuristic")]
        solver: SolverArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectArg {
    Off,
    Auto,
    Exhaustive,
    Genetic,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ViewArg {
    Allocator,
    Evaluation,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Heuristic,
    Direct,
    Mrt,
}

fn load(cli: &Cli) -> Result<Scenario, Error> {
    let mut s = match &cli.scenario {
        Some(path) => Scenario::load(path)?,
        None => Scenario::default(),
    };
    if let Some(seed) = cli.seed {
        s.seed = seed;
        s.allocation.direct.genetic.seed = seed;
        if let Some(sh) = &mut s.shadowing {
            sh.seed = seed;
        }
    }
    if let Some(trials) = cli.trials {
        s.validation.trials = trials;
    }
    if let Some(view) = cli.erasure_view {
        s.allocation.erasure_view = match view {
            ViewArg::Allocator => ErasureView::Allocator,
            ViewArg::Evaluation => ErasureView::Evaluation,
        };
    }
    match cli.direct {
        Some(DirectArg::Exhaustive) => s.allocation.direct.mode = DirectMode::Exhaustive,
        Some(DirectArg::Genetic) => s.allocation.direct.mode = DirectMode::Genetic,
        Some(DirectArg::Auto) => s.allocation.direct.mode = DirectMode::Auto,
        Some(DirectArg::Off) | None => {}
    }
    s.validate()?;
    Ok(s)
}

fn direct(cli: &Cli, s: &Scenario) -> Option<DirectConfig> {
    match cli.direct {
        Some(DirectArg::Off) => None,
        _ => Some(s.allocation.direct.clone()),
    }
}

fn save(result: &ExperimentResult, out: &Path) -> Result<(), Error> {
    let path = result.save(out)?;
    println!("wrote {} ({} rows, {:.2?})", path.display(), result.rows.len(), result.runtime);
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let s = load(cli)?;
    log::info!("scenario {} ({})", s.name, s.digest()?);
    match &cli.command {
        Command::ValidateApprox => {
            let v = validate_approx(&s.validation, s.seed, &s.digest()?)?;
            save(&v.result, &cli.out)?;
            println!(
                "max |analytic - simulated| = {:.3e}, max excess over bound = {:.3e}",
                v.max_gap(),
                v.max_excess()
            );
        }
        Command::SweepRbp => {
            let r = rbp_sweep(&s, direct(cli, &s).as_ref())?;
            save(&r, &cli.out)?;
            let status = r.column("heuristic_status").expect("status column");
            if r.rows.iter().all(|row| row[status].to_string() == "infeasible") {
                println!("no RBP count admits a feasible allocation");
                return Ok(ExitCode::from(2));
            }
        }
        Command::CoverageSc => {
            let o = coverage_sc(&s, &uep_choice(cli, &s))?;
            save(&o.curves, &cli.out)?;
            save(&o.summary, &cli.out)?;
            for (name, summary, radius) in
                [("uep-ram", &o.comparison.uep, &o.uep_radius_m), ("mrt", &o.comparison.mrt, &o.mrt_radius_m)]
            {
                println!("{name:8} fractions {:.3?} radius {:?}", summary.fractions, radius);
            }
        }
        Command::PsnrMapSfn => {
            let o = psnr_map_sfn(&s, &uep_choice(cli, &s))?;
            save(&o.map, &cli.out)?;
            save(&o.summary, &cli.out)?;
            for (name, summary) in [("uep-ram", &o.comparison.uep), ("mrt", &o.comparison.mrt)] {
                println!("{name:8} fractions {:.3?} mean psnr {:.2} dB", summary.fractions, summary.mean_psnr);
            }
        }
        Command::Solve { solver } => {
            let choice = match solver {
                SolverArg::Heuristic => SolverChoice::Heuristic,
                SolverArg::Direct => SolverChoice::Direct(s.allocation.direct.clone()),
                SolverArg::Mrt => SolverChoice::Mrt,
            };
            let (sol, table) = solve(&s, &choice)?;
            save(&table, &cli.out)?;
            println!(
                "{:?}: mcs {:?} tbs {:?} tau {:.4} feasible {}",
                sol.solver, sol.plan.mcs, sol.plan.tbs, sol.tau, sol.feasible
            );
            if !sol.feasible {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn uep_choice(cli: &Cli, s: &Scenario) -> SolverChoice {
    match cli.direct {
        Some(DirectArg::Off) | None => SolverChoice::Heuristic,
        Some(_) => SolverChoice::Direct(s.allocation.direct.clone()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(code) => code,
        Err(Error::NoSolution) => {
            eprintln!("error: no feasible allocation");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
