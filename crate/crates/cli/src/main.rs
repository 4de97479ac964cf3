//! `liwa` — run and sweep hybrid LiFi/WiFi association experiments.
//!
//! Exit code 0 on success; on failure a single machine-readable JSON error
//! line goes to stderr and the exit code is nonzero.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use liwa_cli::{
    config_hash, export_run, load_checkpoint, load_config, resolve_output_dir, run_comparison,
    run_sweep, runner, CliError, SweepAxis,
};
use liwa_core::rl::{evaluate, ActorCritic};
use liwa_core::{NetworkEnv, ScenarioPreset};

#[derive(Parser)]
#[command(name = "liwa", version, about = "Hybrid LiFi/WiFi user association simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every enabled solver on one configuration and export CSVs.
    Run {
        /// TOML experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overridden by LIWA_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat the comparison along one axis with derived seeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Axis: user_count | blockage_rate | scenario | setting.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values, e.g. 2,4,6 or 0,0.2,0.4.
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-evaluate a trained checkpoint on a configuration.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Evaluation horizon in slots (default: config's eval_horizon).
        #[arg(long)]
        horizon: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help/version requests print normally; real usage errors get
            // the machine-readable line.
            if err.use_stderr() {
                emit_error("usage", &err.to_string());
                return ExitCode::from(2);
            }
            let _ = err.print();
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            emit_error(err.kind(), &err.to_string());
            ExitCode::FAILURE
        }
    }
}

fn emit_error(kind: &str, message: &str) {
    let line = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{line}");
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(&config)?;
            let (record, trained) = run_comparison(&cfg)?;
            let dir = resolve_output_dir(&cfg, out.as_deref(), &record.run_id);
            export_run(&dir, &cfg, &record, trained.as_ref().map(|t| &t.policy))?;
            println!(
                "{}",
                serde_json::json!({
                    "run_id": record.run_id,
                    "output_dir": dir,
                    "rows": record.comparison.len(),
                })
            );
            Ok(())
        }
        Command::Sweep {
            config,
            axis,
            values,
            out,
        } => {
            let cfg = load_config(&config)?;
            let axis = parse_axis(&axis, &values)?;
            let points = run_sweep(&cfg, &axis)?;
            let dir = resolve_output_dir(&cfg, out.as_deref(), &format!("sweep-{}", axis.name()));
            std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
                what: format!("creating {}", dir.display()),
                source,
            })?;
            runner::write_sweep_csv(&dir.join("sweep.csv"), &axis, &points)?;
            let failures = points.iter().filter(|p| p.result.is_err()).count();
            println!(
                "{}",
                serde_json::json!({
                    "axis": axis.name(),
                    "points": points.len(),
                    "failures": failures,
                    "output_dir": dir,
                })
            );
            Ok(())
        }
        Command::Eval {
            checkpoint,
            config,
            horizon,
        } => {
            let cfg = load_config(&config)?;
            let stored = load_checkpoint(&checkpoint)?;
            let fresh_hash = config_hash(&cfg);
            if stored.config_hash != fresh_hash {
                return Err(CliError::Checkpoint {
                    detail: format!(
                        "checkpoint was trained under config {} but this config hashes to {fresh_hash}",
                        stored.config_hash
                    ),
                });
            }
            let policy = ActorCritic::from_params(stored.params).map_err(|e| {
                CliError::Checkpoint {
                    detail: format!("rebuilding networks: {e}"),
                }
            })?;
            let env = NetworkEnv::from_config(&cfg)?;
            let horizon = horizon.unwrap_or(cfg.eval_horizon).max(1);
            let stats = evaluate(&policy, &env, horizon)?;
            println!(
                "{}",
                serde_json::json!({
                    "horizon": horizon,
                    "mean_sum_rate_mbps": stats.mean_sum_rate_bps / 1e6,
                    "mean_fairness": stats.mean_fairness,
                    "feasible_frac": stats.feasible_frac,
                })
            );
            Ok(())
        }
    }
}

fn parse_axis(axis: &str, values: &str) -> Result<SweepAxis, CliError> {
    let items: Vec<&str> = values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(CliError::InvalidArgument {
            detail: "no axis values supplied".to_string(),
        });
    }
    let parse_err = |what: &str, v: &str| CliError::InvalidArgument {
        detail: format!("cannot parse {what} value `{v}`"),
    };
    match axis {
        "user_count" => Ok(SweepAxis::UserCount(
            items
                .iter()
                .map(|v| v.parse().map_err(|_| parse_err("user_count", v)))
                .collect::<Result<_, _>>()?,
        )),
        "blockage_rate" => Ok(SweepAxis::BlockageRate(
            items
                .iter()
                .map(|v| v.parse().map_err(|_| parse_err("blockage_rate", v)))
                .collect::<Result<_, _>>()?,
        )),
        "scenario" => Ok(SweepAxis::Scenario(
            items
                .iter()
                .map(|v| match *v {
                    "interference_free" => Ok(ScenarioPreset::InterferenceFree),
                    "interference_prone" => Ok(ScenarioPreset::InterferenceProne),
                    "dense" => Ok(ScenarioPreset::Dense),
                    other => Err(parse_err("scenario", other)),
                })
                .collect::<Result<_, _>>()?,
        )),
        "setting" => Ok(SweepAxis::Setting(
            items
                .iter()
                .map(|v| v.parse().map_err(|_| parse_err("setting", v)))
                .collect::<Result<_, _>>()?,
        )),
        other => Err(CliError::InvalidArgument {
            detail: format!(
                "unknown axis `{other}` (expected user_count, blockage_rate, scenario, or setting)"
            ),
        }),
    }
}
