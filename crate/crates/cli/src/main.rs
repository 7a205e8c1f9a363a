use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ltk_cli::output::{emit, to_json};
use ltk_cli::run::{compute_rho, rho_csv, rho_document, Format, Method, RunConfig};
use ltk_cli::tables::{
    asymptotics_csv, asymptotics_table, bench, localtime_csv, localtime_dist, localtime_profiles_csv, mc_estimate,
    parse_sweep, Regime,
};
use ltk_cli::validate::{load_profile, run_suite};
use ltk_cli::{threads_from_env, CliError, CliResult};
use ltk_core::physics::BlochQuery;

/// Bloch matrices, local times and their asymptotics.
#[derive(Debug, Parser)]
#[command(name = "ltk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate ρ(x_a, x_b; β) over the configured sweep.
    ComputeRho {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// One-point local-time distribution table.
    LocaltimeDist {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact vs leading-order diagonal over a β sweep.
    Asymptotics {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        regime: Regime,
        /// start:stop:count (inclusive, evenly spaced)
        #[arg(long)]
        beta_sweep: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the validation suite; exit 1 if any check fails.
    Validate {
        /// Profile overriding the default sizes and seeds.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        skip_determinism: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time every method on the first query of the config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Feynman–Kac estimate at a single point, optionally with per-path local times.
    Mc {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        slices: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        xa: Option<f64>,
        #[arg(long)]
        xb: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also write binned local-time profiles here.
        #[arg(long)]
        localtime_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        bin_width: f64,
        /// Bridges included in the profile file.
        #[arg(long, default_value_t = 10)]
        localtime_paths: usize,
    },
}

fn out(text: &str, path: Option<&Path>) -> CliResult<()> {
    Ok(emit(text, path)?)
}

fn first_query(cfg: &RunConfig) -> CliResult<BlochQuery<f64>> {
    Ok(cfg.queries()?.remove(0))
}

/// Ok(true) when everything passed.
fn dispatch(command: Command) -> CliResult<bool> {
    match command {
        Command::ComputeRho {
            config,
            method,
            format,
            output,
        } => {
            let mut cfg = RunConfig::from_path(&config)?;
            if let Some(m) = method {
                cfg.method = m;
            }
            if let Some(f) = format {
                cfg.output.format = f;
            }
            if output.is_some() {
                cfg.output.path = output;
            }
            let rows = compute_rho(&cfg)?;
            let text = match cfg.output.format {
                Format::Csv => rho_csv(&rows, cfg.method == Method::Mc).as_str().to_owned(),
                Format::Json => to_json(&rho_document(cfg.method, &rows)),
            };
            out(&text, cfg.output.path.as_deref())?;
        }
        Command::LocaltimeDist { config, x, beta, output } => {
            let mut cfg = RunConfig::from_path(&config)?;
            let lt = cfg.localtime.get_or_insert_with(Default::default);
            if x.is_some() {
                lt.x = x;
            }
            if beta.is_some() {
                lt.beta = beta;
            }
            let rows = localtime_dist(&cfg)?;
            out(localtime_csv(&rows).as_str(), output.or(cfg.output.path).as_deref())?;
        }
        Command::Asymptotics {
            config,
            regime,
            beta_sweep,
            output,
        } => {
            let cfg = RunConfig::from_path(&config)?;
            let rows = asymptotics_table(&cfg, regime, &parse_sweep(&beta_sweep)?)?;
            out(asymptotics_csv(&rows).as_str(), output.or(cfg.output.path).as_deref())?;
        }
        Command::Validate {
            config,
            skip_determinism,
            output,
        } => {
            let profile = load_profile(config.as_deref())?;
            let report = run_suite(&profile, !skip_determinism);
            for c in &report.criteria {
                log::info!(
                    "criterion {} {}: {} ({:.1} s)",
                    c.id,
                    c.title,
                    if c.passed { "pass" } else { "FAIL" },
                    c.elapsed.as_secs_f64()
                );
            }
            out(&to_json(&report), output.as_deref())?;
            return Ok(report.passed);
        }
        Command::Bench { config, output } => {
            let cfg = RunConfig::from_path(&config)?;
            out(&to_json(&bench(&cfg)?), output.as_deref())?;
        }
        Command::Mc {
            config,
            paths,
            slices,
            seed,
            beta,
            xa,
            xb,
            output,
            localtime_csv,
            bin_width,
            localtime_paths,
        } => {
            let mut cfg = match &config {
                Some(p) => RunConfig::from_path(p)?,
                None => RunConfig::free(),
            };
            let base = match cfg.query {
                Some(_) => Some(first_query(&cfg)?),
                None => None,
            };
            let q = BlochQuery::new(
                xa.or(base.map(|q| q.x_a)).unwrap_or(0.0),
                xb.or(base.map(|q| q.x_b)).unwrap_or(0.0),
                beta.or(base.map(|q| q.beta)).unwrap_or(1.0),
            )?;
            let mut mc = cfg.mc.unwrap_or(ltk_cli::run::McSection {
                paths: 0,
                slices: 0,
                seed: 0,
            });
            mc.paths = paths.unwrap_or(mc.paths);
            mc.slices = slices.unwrap_or(mc.slices);
            mc.seed = match (seed, cfg.mc) {
                (Some(s), _) => s,
                (None, Some(m)) => m.seed,
                (None, None) => return Err(CliError::Config("a seed is required (--seed or [mc].seed)".into())),
            };
            if mc.paths == 0 || mc.slices == 0 {
                return Err(CliError::Config("--paths and --slices (or an [mc] section) are required".into()));
            }
            cfg.mc = Some(mc);
            let system = cfg.system()?;
            let mcc = cfg.mc_config(q.beta)?;
            out(&to_json(&mc_estimate(&system, &q, &mcc)?), output.as_deref())?;
            if let Some(path) = localtime_csv {
                let csv = localtime_profiles_csv(&system, &q, &mcc, localtime_paths, bin_width)?;
                out(csv.as_str(), Some(&path))?;
            }
        }
    }
    Ok(true)
}

fn init_threads() -> anyhow::Result<()> {
    if let Some(n) = threads_from_env() {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .with_context(|| format!("building a {n}-thread pool from LTK_THREADS"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = init_threads() {
        log::warn!("{e:#}");
    }
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            log::error!("{e}");
            println!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
