//! `marton`: divergences, band selection and Monte Carlo checks of one-shot broadcast coding.
//!
//! Exit status: 0 success, 1 bound violation, 2 infeasible configuration or size cap,
//! 3 unreadable or malformed input.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use marton::divergence::I0Method;
use marton::Execution;

use commands::{ArrayKind, BandsArgs, CoveringArgs, DivergenceArgs, Kind, RegionSource};
use config::{parse_n_list, parse_probability, NList};
use error::{CliResult, EXIT_OK, EXIT_PARSE};
use output::OutputDir;

#[derive(Parser)]
#[command(name = "marton", version, about)]
struct Cli {
    /// Directory receiving JSON reports and CSV plot data.
    #[arg(long, global = true, env = "MARTON_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Overrides the seed of the config (simulate) or the default seed (covering).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// sequential or parallel trial scheduling; results do not depend on it.
    #[arg(long, global = true)]
    execution: Option<Execution>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Smooth min or max divergence of a joint pmf or a cq state.
    Divergence {
        #[arg(long)]
        joint: Option<PathBuf>,
        /// Density operator on U (x) B with a classical U register.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        dim_u: Option<usize>,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "greedy")]
        method: I0Method,
        /// Evaluate on the n-fold iid product via the llr spectrum.
        #[arg(long, default_value_t = 1)]
        blocklength: usize,
    },
    /// Band exponents (r1, r2) for given rates and one-shot quantities.
    Bands {
        #[arg(long = "R1")]
        rate1: u32,
        #[arg(long = "R2")]
        rate2: u32,
        #[arg(long)]
        i0_b: f64,
        #[arg(long)]
        i0_c: f64,
        #[arg(long)]
        i_inf: f64,
        #[arg(long, value_parser = parse_probability)]
        eps_tilde: f64,
        /// Print every constraint with its slack to stderr.
        #[arg(long)]
        explain: bool,
    },
    /// Monte Carlo run of the full coding scheme against every bound.
    Simulate {
        /// Config file, or a report written by an earlier run.
        #[arg(long)]
        config: PathBuf,
    },
    /// Mutual covering: probability that a synthetic array has no accepted cell.
    Covering {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        s: u64,
        #[arg(long, value_parser = parse_probability)]
        q: f64,
        #[arg(long, value_parser = parse_probability)]
        alpha: f64,
        #[arg(long)]
        trials: u64,
        #[arg(long, value_enum, default_value = "extremal")]
        array: ArrayKind,
    },
    /// Rate regions of the scheme and of the binning-based bound.
    Region {
        /// Compute the quantities from a simulate config instead of the flags.
        #[arg(long, conflicts_with_all = ["i0_b", "i0_c", "i_inf", "eps0", "eps_inf", "eps_tilde"])]
        config: Option<PathBuf>,
        #[arg(long, required_unless_present = "config")]
        i0_b: Option<f64>,
        #[arg(long, required_unless_present = "config")]
        i0_c: Option<f64>,
        #[arg(long, required_unless_present = "config")]
        i_inf: Option<f64>,
        #[arg(long, required_unless_present = "config")]
        eps0: Option<f64>,
        #[arg(long, required_unless_present = "config")]
        eps_inf: Option<f64>,
        #[arg(long, required_unless_present = "config")]
        eps_tilde: Option<f64>,
        #[arg(long)]
        gamma: f64,
    },
    /// Per-letter smooth divergences of iid products against their Shannon limits.
    IidCurve {
        /// Joint of (U, Y) for the min divergence.
        #[arg(long)]
        base: PathBuf,
        /// Joint of (U, V) for the max divergence; defaults to the base.
        #[arg(long)]
        pair: Option<PathBuf>,
        #[arg(long)]
        eps: f64,
        /// Comma list; `1,2,4,...,128` continues the progression.
        #[arg(long, value_parser = parse_n_list)]
        n: NList,
    },
}

/// Default seed of commands whose inputs carry none.
const DEFAULT_SEED: u64 = 0;

fn run(cli: Cli) -> CliResult<u8> {
    let execution = cli.execution;
    let out = || OutputDir::create(&cli.out_dir);
    match cli.command {
        Command::Divergence { joint, state, dim_u, kind, eps, method, blocklength } => {
            commands::divergence(DivergenceArgs { joint, state, dim_u, kind, eps, method, blocklength })
        }
        Command::Bands { rate1, rate2, i0_b, i0_c, i_inf, eps_tilde, explain } => {
            commands::bands(BandsArgs { rate1, rate2, i0_b, i0_c, i_inf, eps_tilde, explain })
        }
        Command::Simulate { config } => commands::simulate(&config, cli.seed, execution, &out()?),
        Command::Covering { r, s, q, alpha, trials, array } => commands::covering(
            CoveringArgs {
                r,
                s,
                q,
                alpha,
                trials,
                seed: cli.seed.unwrap_or(DEFAULT_SEED),
                array,
                execution: execution.unwrap_or_default(),
            },
            &out()?,
        ),
        Command::Region { config, i0_b, i0_c, i_inf, eps0, eps_inf, eps_tilde, gamma } => {
            let source = match config {
                Some(path) => RegionSource::Config(path),
                None => RegionSource::Values {
                    i0_b: i0_b.expect("required by clap"),
                    i0_c: i0_c.expect("required by clap"),
                    i_inf: i_inf.expect("required by clap"),
                    eps0: eps0.expect("required by clap"),
                    eps_inf: eps_inf.expect("required by clap"),
                    eps_tilde: eps_tilde.expect("required by clap"),
                },
            };
            commands::region(source, gamma, &out()?)
        }
        Command::IidCurve { base, pair, eps, n } => commands::iid_curve(&base, pair.as_deref(), eps, &n.0, &out()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
