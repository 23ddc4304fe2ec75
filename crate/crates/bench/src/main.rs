use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use chatter_bench::nyquist::{
    default_amplitude_range, default_omega_range, DEFAULT_POINTS, DF_LOCUS_POINTS,
};
use chatter_bench::output::write_atomic;
use chatter_bench::tune::DEFAULT_ALPHA;
use chatter_bench::{
    df_locus_csv, emit_nyquist, exit, load_scenarios, nyquist_csv, run_scenarios, tune_dsm,
    RunError, TuneError, TunerRequest,
};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "chatter",
    version,
    about = "Chattering prediction and simulation for sliding-mode control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a config file and write CSV/JSON outputs.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Design a dynamic manifold bounding the chattering frequency; prints JSON.
    Tune {
        #[arg(long)]
        tau_min: f64,
        #[arg(long)]
        tau_max: f64,
        #[arg(long)]
        omega_max: f64,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Export the sigma-loop frequency response and relay locus of one scenario.
    Nyquist {
        config: PathBuf,
        #[arg(long)]
        scenario: String,
        /// Defaults to 1e-3/tau.
        #[arg(long)]
        omega_min: Option<f64>,
        /// Defaults to 1e3/tau.
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let code = match Cli::parse().command {
        Command::Run { config, out_dir } => run(&config, &out_dir),
        Command::Tune {
            tau_min,
            tau_max,
            omega_max,
            k,
            alpha,
        } => tune(TunerRequest {
            tau_min,
            tau_max,
            omega_max,
            k,
            alpha,
        }),
        Command::Nyquist {
            config,
            scenario,
            omega_min,
            omega_max,
            points,
            out_dir,
        } => match nyquist(&config, &scenario, omega_min, omega_max, points, &out_dir) {
            Ok(()) => exit::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                if e.downcast_ref::<chatter_bench::ConfigError>().is_some() {
                    exit::CONFIG_ERROR
                } else {
                    exit::FAILURE
                }
            }
        },
    };
    ExitCode::from(code as u8)
}

fn run(config: &std::path::Path, out_dir: &std::path::Path) -> i32 {
    match run_scenarios(config, out_dir) {
        Ok(report) => {
            for row in &report.rows {
                println!(
                    "{}: sigma hb {} sim {} | x hb {} sim {} | omega hb {} sim {}",
                    row.label,
                    row.sigma_hb,
                    row.sigma_sim,
                    row.x_hb,
                    row.x_sim,
                    row.omega_hb,
                    row.omega_sim
                );
            }
            for f in &report.failures {
                eprintln!("scenario {} failed: {}", f.label, f.error);
            }
            if report.is_complete() {
                exit::SUCCESS
            } else {
                exit::PARTIAL_FAILURE
            }
        }
        Err(RunError::Config(e)) => {
            eprintln!("config error in {}: {e}", config.display());
            exit::CONFIG_ERROR
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit::FAILURE
        }
    }
}

fn tune(req: TunerRequest) -> i32 {
    match tune_dsm(&req) {
        Ok(r) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&r).expect("tuner result encodes")
            );
            exit::SUCCESS
        }
        Err(e @ (TuneError::InvalidRequest(_) | TuneError::Infeasible { .. })) => {
            eprintln!("error: {e}");
            exit::CONFIG_ERROR
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit::FAILURE
        }
    }
}

fn nyquist(
    config: &std::path::Path,
    label: &str,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    points: usize,
    out_dir: &std::path::Path,
) -> anyhow::Result<()> {
    let scenarios = load_scenarios(config)?;
    let s = scenarios
        .iter()
        .find(|s| s.label == label)
        .ok_or_else(|| anyhow!("no scenario labelled `{label}` in {}", config.display()))?;
    let (lo, hi) = default_omega_range(&s.plant);
    let curve = emit_nyquist(s, omega_min.unwrap_or(lo), omega_max.unwrap_or(hi), points)?;
    let (amp_lo, amp_hi) = default_amplitude_range(&s.plant);
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let a = write_atomic(
        out_dir,
        &format!("{label}_nyquist.csv"),
        nyquist_csv(&curve).as_bytes(),
    )?;
    let b = write_atomic(
        out_dir,
        &format!("{label}_df_locus.csv"),
        df_locus_csv(&curve, amp_lo, amp_hi, DF_LOCUS_POINTS).as_bytes(),
    )?;
    println!("{}\n{}", a.display(), b.display());
    Ok(())
}
