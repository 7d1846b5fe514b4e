//! `ionwire`: stability maps, working points, exchange dynamics and
//! exchange-cooling ensembles from the command line.

mod commands;
mod config;
mod error;
mod manifest;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ionwire::mathieu::Tongue;

use crate::commands::AmplitudeSource;
use crate::config::{OneOrMany, RunConfig};
use crate::error::Failure;
use crate::units::Frequency;

#[derive(Parser)]
#[command(name = "ionwire", version, about = "Wire-coupled electron/ion trap simulator")]
struct Cli {
    /// Worker threads for sweeps and ensembles [default: all cores]
    #[arg(long, global = true, env = "IONWIRE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML config, or a JSON manifest from an earlier run
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory, overriding [output] dir
    #[arg(long)]
    out: Option<String>,

    /// Print the resolved config and exit
    #[arg(long)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Stability and coupling-strength map over (eta', w_e'/w_d)
    Stability {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Fourier order of the coupling sideband, overriding [sweep] k
        #[arg(long)]
        k: Option<i64>,
    },
    /// Drive parameters for a resonant working point, as JSON
    Workpoint {
        /// Drive frequency in units of the effective ion frequency
        #[arg(long)]
        omega_d_ratio: f64,
        /// Mathieu Q
        #[arg(long = "Q", alias = "q", allow_hyphen_values = true)]
        q: f64,
        /// Resonant sideband
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        k: i64,
        /// Ion species for R_k: e, ca40, be9 or p
        #[arg(long, default_value = "ca40")]
        species: String,
        /// Stability region: "lowest", a region index, or "A=<value>"
        #[arg(long, default_value = "lowest", value_parser = parse_tongue)]
        tongue: Tongue,
    },
    /// Single-excitation amplitudes over one exchange plan, as CSV
    Entangle {
        /// Coupling rate as an ordinary frequency, e.g. "5.6 Hz"
        #[arg(long)]
        g: Frequency,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        /// Number of intervals over [0, tau]
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = AmplitudeSource::Closed)]
        source: AmplitudeSource,
        /// Output CSV [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// In-phase exchange trajectory against the analytic curve
    Exchange {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Exit with 4 if [check] max_deviation is exceeded
        #[arg(long)]
        check: bool,
    },
    /// Monte-Carlo exchange-cooling ensemble
    Ensemble {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Master seed, overriding [ensemble] seed
        #[arg(long)]
        seed: Option<u64>,
        /// Detuning width, e.g. "100 mHz", overriding [ensemble] delta_omega
        #[arg(long)]
        delta_omega: Option<Frequency>,
        /// Number of trajectories, overriding [ensemble] n_traj
        #[arg(long)]
        n_traj: Option<usize>,
        /// Exit with 4 if the mean T_P leaves [check] mean_tp
        #[arg(long)]
        check: bool,
    },
}

fn parse_tongue(s: &str) -> Result<Tongue, String> {
    if s == "lowest" || s == "lowest_positive" {
        return Ok(Tongue::LowestPositive);
    }
    if let Some(a) = s.strip_prefix("A=") {
        return a.parse().map(Tongue::Containing).map_err(|e| format!("{e}"));
    }
    s.parse().map(Tongue::Index).map_err(|_| format!("expected 'lowest', an index or 'A=<value>', got '{s}'"))
}

fn load(args: &ConfigArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    let with_config = |args: &ConfigArgs, edit: &dyn Fn(&mut RunConfig), go: &dyn Fn(&RunConfig) -> Result<(), Failure>| {
        let mut cfg = load(args)?;
        edit(&mut cfg);
        if args.print_config {
            print!("{}", cfg.echo());
            return Ok(());
        }
        go(&cfg)
    };
    match cli.command {
        Command::Stability { cfg, k } => with_config(
            &cfg,
            &|c| {
                if let Some(k) = k {
                    c.sweep.k = k;
                }
            },
            &commands::stability,
        ),
        Command::Workpoint { omega_d_ratio, q, k, species, tongue } => {
            commands::workpoint(omega_d_ratio, q, k, &species, tongue)
        }
        Command::Entangle { g, m, n, samples, source, out } => commands::entangle(g, m, n, samples, source, out),
        Command::Exchange { cfg, check } => with_config(&cfg, &|_| {}, &|c| commands::exchange(c, check)),
        Command::Ensemble { cfg, seed, delta_omega, n_traj, check } => with_config(
            &cfg,
            &|c| {
                if let Some(s) = seed {
                    c.ensemble.seed = s;
                }
                if let Some(d) = delta_omega {
                    c.ensemble.delta_omega = OneOrMany::One(d);
                }
                if let Some(n) = n_traj {
                    c.ensemble.n_traj = n;
                }
            },
            &|c| commands::ensemble(c, check),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ionwire: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
