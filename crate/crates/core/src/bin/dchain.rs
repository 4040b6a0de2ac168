use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dissipative_chain::experiments::{acceptance, run_preset, to_csv_string, write_csv, ExperimentConfig, Preset};
use dissipative_chain::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY_FAILED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "dchain",
    version,
    about = "Steady states and correlations of dissipatively driven qubit chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_path` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset: two_qubit, fig2a, fig2b, fig2c, fig3a, fig3b.
    Preset {
        name: String,
        /// Largest n of a sweep, or the chain size of a single-size preset.
        #[arg(long)]
        n_max: Option<usize>,
        /// Dephasing rate on the primary qubits (geometry B).
        #[arg(long)]
        gamma: Option<f64>,
        /// Engineered bi-local jump rate.
        #[arg(long)]
        gamma_engineered: Option<f64>,
        /// Hopping strength, applied to both kappa and theta.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        conv_tol: Option<f64>,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite; exits 0 only if every criterion passes.
    Verify {
        /// Run only these criteria (1-8).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
        criterion: Vec<u8>,
    },
}

fn preset_config(
    name: &str,
    n_max: Option<usize>,
    gamma: Option<f64>,
    gamma_engineered: Option<f64>,
    kappa: Option<f64>,
    t_max: Option<f64>,
    conv_tol: Option<f64>,
) -> Result<ExperimentConfig, Error> {
    let preset: Preset = name.parse()?;
    if preset == Preset::Custom {
        return Err(Error::InvalidConfig(
            "preset custom needs a config file; use `run --config`".into(),
        ));
    }
    let mut cfg = ExperimentConfig::preset(preset);
    if let Some(k) = n_max {
        if preset == Preset::TwoQubit {
            return Err(Error::InvalidConfig("preset two_qubit has no size to set".into()));
        }
        if preset.is_sweep() {
            cfg.n_list = Some((4..=k).step_by(2).collect());
        } else {
            cfg.n = Some(k);
        }
    }
    cfg.gamma_dephasing = gamma;
    cfg.gamma_engineered = gamma_engineered;
    cfg.kappa = kappa;
    cfg.theta = kappa;
    cfg.t_max = t_max;
    cfg.conv_tol = conv_tol;
    Ok(cfg)
}

fn emit(cfg: &ExperimentConfig, out: Option<PathBuf>) -> Result<(), Error> {
    let records = run_preset(cfg)?;
    match out {
        Some(path) => write_csv(&records, &path),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(to_csv_string(&records).as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn verify(selected: &[u8]) -> ExitCode {
    let ids: Vec<usize> = if selected.is_empty() {
        (1..=acceptance::CRITERIA).collect()
    } else {
        selected.iter().map(|&k| k as usize).collect()
    };
    let mut failed = 0;
    for id in &ids {
        let report = acceptance::run(*id);
        println!("{report}");
        if !report.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", ids.len() - failed, ids.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Verify { criterion } => return verify(&criterion),
        Command::Run { config, out } => ExperimentConfig::from_file(&config).and_then(|cfg| {
            let out = out.or_else(|| cfg.output_path.clone());
            emit(&cfg, out)
        }),
        Command::Preset {
            name,
            n_max,
            gamma,
            gamma_engineered,
            kappa,
            t_max,
            conv_tol,
            out,
        } => {
            preset_config(&name, n_max, gamma, gamma_engineered, kappa, t_max, conv_tol).and_then(|cfg| emit(&cfg, out))
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dchain: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
