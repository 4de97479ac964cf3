//! Experiment orchestration: solver comparisons on one configuration,
//! axis sweeps with derived seeds, and plot-ready CSV export.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use liwa_core::rl::{evaluate, select_actions_sequential, train, ActorCritic, TrainOutcome};
use liwa_core::solvers::{exhaustive_search, greedy_capacity_aware, sss};
use liwa_core::{
    Association, MobilityMode, NetworkEnv, RandomSource, ScenarioPreset, SimConfig, SlotMetrics,
    SolverError, SolverKind,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::save_checkpoint;
use crate::CliError;

/// Stable hex digest of the canonical (JSON) form of a config.
pub fn config_hash(cfg: &SimConfig) -> String {
    let canon = serde_json::to_string(cfg).expect("config serializes");
    let mut hash = 0xcbf29ce484222325u64;
    for b in canon.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x00000100000001b3);
    }
    format!("{hash:016x}")
}

/// One line of the final solver comparison table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub scenario: String,
    pub setting: String,
    pub users: usize,
    pub solver: String,
    pub sum_rate_mbps: Option<f64>,
    pub fairness: Option<f64>,
    pub feasible_frac: Option<f64>,
    pub wall_time_s: f64,
    pub status: String,
}

impl ComparisonRow {
    fn skipped(cfg: &SimConfig, solver: SolverKind, status: String) -> Self {
        Self {
            scenario: cfg.scenario.name().to_string(),
            setting: cfg.caps.setting_name().to_string(),
            users: cfg.user_count,
            solver: solver.name().to_string(),
            sum_rate_mbps: None,
            fairness: None,
            feasible_frac: None,
            wall_time_s: 0.0,
            status,
        }
    }
}

/// Everything one `run` produces, ready for export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub config_hash: String,
    pub comparison: Vec<ComparisonRow>,
    /// Per-episode mean reward of the S-PPO training run.
    pub convergence: Vec<f64>,
    /// Episodes needed to reach 95% of the final reward level.
    pub episodes_to_95pct: Option<usize>,
    /// Per-slot metrics stream of the trained policy's evaluation.
    #[serde(skip)]
    pub slot_metrics: Vec<SlotMetrics>,
    pub ap_count: usize,
}

impl RunRecord {
    /// The stored hash must match the config that claims to describe it.
    pub fn verify_hash(&self, cfg: &SimConfig) -> Result<(), CliError> {
        let fresh = config_hash(cfg);
        if fresh != self.config_hash {
            return Err(CliError::Checkpoint {
                detail: format!(
                    "config hash mismatch: record has {}, config gives {fresh}",
                    self.config_hash
                ),
            });
        }
        Ok(())
    }
}

struct SolverOutcome {
    association: Association,
    wall_time_s: f64,
    evaluations: u64,
}

/// Trained policy plus its training artifacts.
pub struct TrainedPolicy {
    pub policy: ActorCritic,
    pub outcome: TrainOutcome,
    pub wall_time_s: f64,
}

fn solve_baseline(
    kind: SolverKind,
    env: &NetworkEnv,
) -> Result<SolverOutcome, SolverError> {
    let cfg = env.config();
    let start = Instant::now();
    let result = match kind {
        SolverKind::Es => exhaustive_search(env.snapshot(), env.topology(), &cfg.caps, cfg.es_budget)?,
        SolverKind::Sss => sss(env.snr_matrix(), env.snapshot(), env.topology(), &cfg.caps),
        SolverKind::Greedy => greedy_capacity_aware(env.snapshot(), env.topology(), &cfg.caps),
        SolverKind::Sppo => unreachable!("S-PPO is not a per-snapshot baseline"),
    };
    Ok(SolverOutcome {
        association: result.association,
        wall_time_s: start.elapsed().as_secs_f64(),
        evaluations: result.evaluations,
    })
}

/// Train S-PPO on a fresh environment built from the config.
pub fn train_sppo(cfg: &SimConfig) -> Result<TrainedPolicy, CliError> {
    let mut env = NetworkEnv::from_config(cfg)?;
    let mut rng = RandomSource::from_seed(cfg.seed).derive("sppo", 0);
    let start = Instant::now();
    let outcome = train(&mut env, &cfg.trainer, &mut rng)?;
    Ok(TrainedPolicy {
        policy: outcome.policy.clone(),
        outcome,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn episodes_to_95pct(curve: &[f64]) -> Option<usize> {
    let final_level = *curve.last()?;
    if !final_level.is_finite() {
        return None;
    }
    let first = *curve.first()?;
    let threshold = first + 0.95 * (final_level - first);
    curve
        .iter()
        .position(|&r| r >= threshold)
        .map(|idx| idx + 1)
}

/// Run every enabled solver on the configured instance, returning the
/// record and, when S-PPO was enabled, the trained policy.
///
/// Static mode solves the slot-0 snapshot once per baseline and evaluates
/// the trained policy over `eval_horizon` slots of a fresh environment.
/// Mobile mode re-solves every slot of the evaluation horizon and reports
/// per-solver means. An exhaustive-search refusal (budget or infeasible
/// instance) demotes its row to a skip instead of failing the run.
pub fn run_comparison(cfg: &SimConfig) -> Result<(RunRecord, Option<TrainedPolicy>), CliError> {
    cfg.validate()?;
    let hash = config_hash(cfg);
    let run_id = format!("{hash}-{:08x}", cfg.seed);
    let mobile = cfg.mobility.mode == MobilityMode::Rwp;

    let trained = if cfg.solvers.contains(&SolverKind::Sppo) {
        Some(train_sppo(cfg)?)
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut slot_metrics = Vec::new();
    let eval_env = NetworkEnv::from_config(cfg)?;
    let ap_count = eval_env.ap_count();

    let baselines: Vec<SolverKind> = cfg
        .solvers
        .iter()
        .copied()
        .filter(|s| *s != SolverKind::Sppo)
        .collect();

    if !mobile {
        for kind in &baselines {
            match solve_baseline(*kind, &eval_env) {
                Ok(outcome) => {
                    let metrics = eval_env.score(&outcome.association)?;
                    rows.push(ComparisonRow {
                        scenario: cfg.scenario.name().to_string(),
                        setting: cfg.caps.setting_name().to_string(),
                        users: cfg.user_count,
                        solver: kind.name().to_string(),
                        sum_rate_mbps: Some(metrics.sum_rate_bps / 1e6),
                        fairness: Some(metrics.fairness),
                        feasible_frac: Some(if metrics.feasible { 1.0 } else { 0.0 }),
                        wall_time_s: outcome.wall_time_s,
                        status: format!("ok ({} evaluations)", outcome.evaluations),
                    });
                }
                Err(err) => rows.push(skip_row(cfg, *kind, &err)),
            }
        }
        if let Some(trained) = &trained {
            let start = Instant::now();
            let stats = evaluate(&trained.policy, &eval_env, cfg.eval_horizon)?;
            let eval_time = start.elapsed().as_secs_f64();
            rows.push(ComparisonRow {
                scenario: cfg.scenario.name().to_string(),
                setting: cfg.caps.setting_name().to_string(),
                users: cfg.user_count,
                solver: SolverKind::Sppo.name().to_string(),
                sum_rate_mbps: Some(stats.mean_sum_rate_bps / 1e6),
                fairness: Some(stats.mean_fairness),
                feasible_frac: Some(stats.feasible_frac),
                wall_time_s: trained.wall_time_s + eval_time,
                status: format!(
                    "ok ({} episodes{})",
                    trained.outcome.episodes_run,
                    if trained.outcome.early_stopped {
                        ", early stop"
                    } else {
                        ""
                    }
                ),
            });
            slot_metrics = stats.slots;
        }
    } else {
        // Mobile: one environment drives the horizon; every solver scores
        // the same sequence of snapshots.
        let mut env = eval_env.clone();
        let mut acc: Vec<(SolverKind, f64, f64, f64, usize, f64)> = baselines
            .iter()
            .map(|k| (*k, 0.0, 0.0, 0.0, 0usize, 0.0))
            .collect();
        let mut skipped: Vec<(SolverKind, SolverError)> = Vec::new();
        let mut sppo_acc = (0.0f64, 0.0f64, 0usize);
        for _ in 0..cfg.eval_horizon {
            for entry in &mut acc {
                if skipped.iter().any(|(k, _)| *k == entry.0) {
                    continue;
                }
                match solve_baseline(entry.0, &env) {
                    Ok(outcome) => {
                        let m = env.score(&outcome.association)?;
                        entry.1 += m.sum_rate_bps;
                        entry.2 += m.fairness;
                        entry.3 += outcome.wall_time_s;
                        entry.4 += usize::from(m.feasible);
                        entry.5 += outcome.evaluations as f64;
                    }
                    Err(err) => skipped.push((entry.0, err)),
                }
            }
            if let Some(trained) = &trained {
                let selected = select_actions_sequential(&trained.policy, &env, None)?;
                let m = env.score(&selected.association)?;
                sppo_acc.0 += m.sum_rate_bps;
                sppo_acc.1 += m.fairness;
                sppo_acc.2 += usize::from(m.feasible);
                slot_metrics.push(m);
            }
            env.advance()?;
        }
        let n = cfg.eval_horizon as f64;
        for (kind, rate, fair, wall, feas, evals) in acc {
            if let Some((_, err)) = skipped.iter().find(|(k, _)| *k == kind) {
                rows.push(skip_row(cfg, kind, err));
                continue;
            }
            rows.push(ComparisonRow {
                scenario: cfg.scenario.name().to_string(),
                setting: cfg.caps.setting_name().to_string(),
                users: cfg.user_count,
                solver: kind.name().to_string(),
                sum_rate_mbps: Some(rate / n / 1e6),
                fairness: Some(fair / n),
                feasible_frac: Some(feas as f64 / n),
                wall_time_s: wall,
                status: format!("ok ({:.0} evaluations)", evals),
            });
        }
        if let Some(trained) = &trained {
            rows.push(ComparisonRow {
                scenario: cfg.scenario.name().to_string(),
                setting: cfg.caps.setting_name().to_string(),
                users: cfg.user_count,
                solver: SolverKind::Sppo.name().to_string(),
                sum_rate_mbps: Some(sppo_acc.0 / n / 1e6),
                fairness: Some(sppo_acc.1 / n),
                feasible_frac: Some(sppo_acc.2 as f64 / n),
                wall_time_s: trained.wall_time_s,
                status: format!(
                    "ok ({} episodes{})",
                    trained.outcome.episodes_run,
                    if trained.outcome.early_stopped {
                        ", early stop"
                    } else {
                        ""
                    }
                ),
            });
        }
    }

    let convergence = trained
        .as_ref()
        .map(|t| t.outcome.episode_rewards.clone())
        .unwrap_or_default();
    let record = RunRecord {
        run_id,
        config_hash: hash,
        episodes_to_95pct: episodes_to_95pct(&convergence),
        comparison: rows,
        convergence,
        slot_metrics,
        ap_count,
    };
    Ok((record, trained))
}

fn skip_row(cfg: &SimConfig, kind: SolverKind, err: &SolverError) -> ComparisonRow {
    let status = match err {
        SolverError::InstanceTooLarge { .. } => "skipped (budget)".to_string(),
        SolverError::Infeasible { .. } => "skipped (infeasible)".to_string(),
    };
    ComparisonRow::skipped(cfg, kind, status)
}

/// Sweep axes: each value derives an independent run whose seed is the base
/// seed XOR the value's index.
#[derive(Debug, Clone)]
pub enum SweepAxis {
    UserCount(Vec<usize>),
    BlockageRate(Vec<f64>),
    Scenario(Vec<ScenarioPreset>),
    Setting(Vec<u8>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::UserCount(_) => "user_count",
            SweepAxis::BlockageRate(_) => "blockage_rate",
            SweepAxis::Scenario(_) => "scenario",
            SweepAxis::Setting(_) => "setting",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::UserCount(v) => v.len(),
            SweepAxis::BlockageRate(v) => v.len(),
            SweepAxis::Scenario(v) => v.len(),
            SweepAxis::Setting(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Config and human-readable label for one sweep point.
    pub fn apply(&self, base: &SimConfig, index: usize) -> Result<(SimConfig, String), CliError> {
        let mut cfg = base.clone();
        cfg.seed = base.seed ^ index as u64;
        let label = match self {
            SweepAxis::UserCount(v) => {
                cfg.user_count = v[index];
                v[index].to_string()
            }
            SweepAxis::BlockageRate(v) => {
                cfg.blockage.rate = v[index];
                format!("{}", v[index])
            }
            SweepAxis::Scenario(v) => {
                cfg.scenario = v[index];
                v[index].name().to_string()
            }
            SweepAxis::Setting(v) => {
                cfg.caps = liwa_core::CapacityLimits::setting(v[index]).ok_or_else(|| {
                    CliError::InvalidArgument {
                        detail: format!("unknown network setting {}", v[index]),
                    }
                })?;
                v[index].to_string()
            }
        };
        Ok((cfg, label))
    }
}

/// One sweep point's outcome (failures are recorded, not fatal).
pub struct SweepPoint {
    pub label: String,
    pub seed: u64,
    pub result: Result<RunRecord, CliError>,
}

/// Run all sweep points (in parallel up to `base.workers` threads) and
/// return them in axis order regardless of completion order.
pub fn run_sweep(base: &SimConfig, axis: &SweepAxis) -> Result<Vec<SweepPoint>, CliError> {
    if axis.is_empty() {
        return Err(CliError::InvalidArgument {
            detail: "sweep requires at least one axis value".to_string(),
        });
    }
    base.validate()?;
    let points: Vec<(usize, SimConfig, String)> = (0..axis.len())
        .map(|i| axis.apply(base, i).map(|(cfg, label)| (i, cfg, label)))
        .collect::<Result<_, _>>()?;

    let run_point = |(_, cfg, label): &(usize, SimConfig, String)| SweepPoint {
        label: label.clone(),
        seed: cfg.seed,
        result: run_comparison(cfg).map(|(record, _)| record),
    };

    let results: Vec<SweepPoint> = if base.workers == 1 {
        points.iter().map(run_point).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(base.workers) // 0 = rayon default
            .build()
            .map_err(|e| CliError::Internal {
                detail: format!("building worker pool: {e}"),
            })?;
        pool.install(|| points.par_iter().map(run_point).collect())
    };
    Ok(results)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

/// comparison.csv: one row per (instance, solver).
pub fn write_comparison_csv(path: &Path, rows: &[ComparisonRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    write_record(
        &mut w,
        path,
        &[
            "scenario",
            "setting",
            "users",
            "solver",
            "sum_rate_mbps",
            "fairness",
            "feasible_frac",
            "wall_time_s",
            "status",
        ],
    )?;
    for r in rows {
        write_record(
            &mut w,
            path,
            &[
                r.scenario.as_str(),
                r.setting.as_str(),
                &r.users.to_string(),
                r.solver.as_str(),
                &fmt_opt(r.sum_rate_mbps),
                &fmt_opt(r.fairness),
                &fmt_opt(r.feasible_frac),
                &format!("{}", r.wall_time_s),
                r.status.as_str(),
            ],
        )?;
    }
    flush(w, path)
}

/// convergence.csv: raw per-episode mean rewards of the training run.
pub fn write_convergence_csv(path: &Path, curve: &[f64]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    write_record(&mut w, path, &["episode", "mean_reward", "solver"])?;
    for (i, r) in curve.iter().enumerate() {
        write_record(&mut w, path, &[&(i + 1).to_string(), &format!("{r}"), "sppo"])?;
    }
    flush(w, path)
}

/// metrics.csv: the trained policy's per-slot evaluation stream.
pub fn write_metrics_csv(
    path: &Path,
    slots: &[SlotMetrics],
    ap_count: usize,
) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let mut header = vec![
        "slot".to_string(),
        "sum_rate_mbps".to_string(),
        "fairness".to_string(),
        "overload_count".to_string(),
    ];
    for ap in 0..ap_count {
        header.push(format!("load_ap{ap}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_record(&mut w, path, &header_refs)?;
    for m in slots {
        let mut row = vec![
            m.slot.to_string(),
            format!("{}", m.sum_rate_bps / 1e6),
            format!("{}", m.fairness),
            m.overload_count.to_string(),
        ];
        for load in &m.per_ap_loads {
            row.push(load.to_string());
        }
        let refs: Vec<&str> = row.iter().map(String::as_str).collect();
        write_record(&mut w, path, &refs)?;
    }
    flush(w, path)
}

/// sweep.csv: one row per (axis value, solver), plus error rows for failed
/// points.
pub fn write_sweep_csv(path: &Path, axis: &SweepAxis, points: &[SweepPoint]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    write_record(
        &mut w,
        path,
        &[
            "axis",
            "value",
            "seed",
            "solver",
            "sum_rate_mbps",
            "fairness",
            "feasible_frac",
            "wall_time_s",
            "status",
        ],
    )?;
    for point in points {
        match &point.result {
            Ok(record) => {
                for r in &record.comparison {
                    write_record(
                        &mut w,
                        path,
                        &[
                            axis.name(),
                            point.label.as_str(),
                            &point.seed.to_string(),
                            r.solver.as_str(),
                            &fmt_opt(r.sum_rate_mbps),
                            &fmt_opt(r.fairness),
                            &fmt_opt(r.feasible_frac),
                            &format!("{}", r.wall_time_s),
                            r.status.as_str(),
                        ],
                    )?;
                }
            }
            Err(err) => {
                write_record(
                    &mut w,
                    path,
                    &[
                        axis.name(),
                        point.label.as_str(),
                        &point.seed.to_string(),
                        "-",
                        "",
                        "",
                        "",
                        "0",
                        &format!("error: {err}"),
                    ],
                )?;
            }
        }
    }
    flush(w, path)
}

type CsvFile = csv::Writer<fs::File>;

fn csv_writer(path: &Path) -> Result<CsvFile, CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            what: format!("creating {}", parent.display()),
            source,
        })?;
    }
    csv::Writer::from_path(path).map_err(|e| CliError::Csv {
        what: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn write_record(w: &mut CsvFile, path: &Path, fields: &[&str]) -> Result<(), CliError> {
    w.write_record(fields).map_err(|e| CliError::Csv {
        what: path.display().to_string(),
        detail: e.to_string(),
    })
}

fn flush(mut w: CsvFile, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::Csv {
        what: path.display().to_string(),
        detail: e.to_string(),
    })
}

/// Write the full artifact set for one run into `dir`.
pub fn export_run(
    dir: &Path,
    cfg: &SimConfig,
    record: &RunRecord,
    trained: Option<&ActorCritic>,
) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        what: format!("creating {}", dir.display()),
        source,
    })?;
    write_comparison_csv(&dir.join("comparison.csv"), &record.comparison)?;
    write_convergence_csv(&dir.join("convergence.csv"), &record.convergence)?;
    write_metrics_csv(&dir.join("metrics.csv"), &record.slot_metrics, record.ap_count)?;
    let summary = serde_json::json!({
        "run_id": record.run_id,
        "config_hash": record.config_hash,
        "episodes_to_95pct": record.episodes_to_95pct,
        "config": cfg,
    });
    fs::write(
        dir.join("run.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )
    .map_err(|source| CliError::Io {
        what: format!("writing {}", dir.join("run.json").display()),
        source,
    })?;
    if let Some(policy) = trained {
        save_checkpoint(&dir.join("policy.json"), policy, &record.config_hash)?;
    }
    Ok(())
}

/// Output directory resolution: environment override beats the CLI flag,
/// which beats the config, which beats `./runs/<run-id>`.
pub fn resolve_output_dir(
    cfg: &SimConfig,
    flag: Option<&Path>,
    run_id: &str,
) -> PathBuf {
    if let Ok(dir) = std::env::var("LIWA_OUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = &cfg.output_dir {
        return PathBuf::from(dir);
    }
    PathBuf::from("runs").join(run_id)
}
