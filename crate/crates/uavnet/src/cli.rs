//! Experiment driver: loads a scenario, runs one algorithm, and emits the
//! reproducibility artifacts (`trace.csv`, `result.json`, `meta.json`).
//! Everything a run needs to be replayed is in the manifest echoed to
//! `meta.json`; `result.json` and `trace.csv` are byte-identical across
//! re-runs with the same seed.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blll::{self, BlllConfig, BlllError};
use crate::greedy::{self, ConfigurationSet, GreedyError};
use crate::model::{Scenario, ScenarioLoadError};
use crate::objective::RateTable;
use crate::oracle::{self, OracleBudget, OracleError};
use crate::sampling;
use crate::trace::{self, TraceRecord};

/// Worker-count override for sweep parallelism.
pub const WORKERS_ENV: &str = "UAVNET_WORKERS";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Load(#[from] ScenarioLoadError),
    #[error("cannot {action} {path}: {source}")]
    Io {
        action: &'static str,
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Blll(#[from] BlllError),
    #[error(transparent)]
    Greedy(#[from] GreedyError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
}

impl RunError {
    /// Process exit code: 2 for malformed scenarios, 3 for infeasible
    /// ones, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Load(ScenarioLoadError::Malformed(_)) => 2,
            RunError::Load(ScenarioLoadError::Invalid(_)) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Blll,
    Greedy,
    KmeansGreedy,
    AdaptedGreedy,
    Oracle,
    Validate,
    Sweep,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Blll => "blll",
            Algorithm::Greedy => "greedy",
            Algorithm::KmeansGreedy => "kmeans_greedy",
            Algorithm::AdaptedGreedy => "adapted_greedy",
            Algorithm::Oracle => "oracle",
            Algorithm::Validate => "validate",
            Algorithm::Sweep => "sweep",
        }
    }
}

/// One experiment: scenario path, algorithm, its knobs, output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub scenario: PathBuf,
    pub algorithm: Algorithm,
    pub out_dir: PathBuf,
    /// Algorithm seed; defaults to the scenario's `rng_seed`.
    pub seed: Option<u64>,
    pub iters: Option<u64>,
    pub t0: Option<f64>,
    /// Utility neighborhood range as a fraction of the search-box diagonal.
    pub range_frac: Option<f64>,
    /// Explicit configuration set (JSON array of placements) for
    /// `algorithm = greedy`.
    pub configs: Option<PathBuf>,
    #[serde(default)]
    pub sweep_ranges: Vec<f64>,
    #[serde(default)]
    pub sweep_seeds: Vec<u64>,
    pub validate_samples: Option<u64>,
    pub max_configs: Option<u64>,
    pub max_assoc_states: Option<u64>,
}

impl RunManifest {
    pub fn new(
        scenario: impl Into<PathBuf>,
        algorithm: Algorithm,
        out_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            scenario: scenario.into(),
            algorithm,
            out_dir: out_dir.into(),
            seed: None,
            iters: None,
            t0: None,
            range_frac: None,
            configs: None,
            sweep_ranges: Vec::new(),
            sweep_seeds: Vec::new(),
            validate_samples: None,
            max_configs: None,
            max_assoc_states: None,
        }
    }

    fn oracle_budget(&self) -> OracleBudget {
        let default = OracleBudget::default();
        OracleBudget {
            max_configs: self.max_configs.unwrap_or(default.max_configs),
            max_assoc_states: self.max_assoc_states.unwrap_or(default.max_assoc_states),
        }
    }
}

/// Final state and counters of a run, serialized to `result.json`.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: String,
    pub seed: u64,
    pub sum_rate_bps: f64,
    pub iterations: u64,
    pub placement: Vec<[f64; 3]>,
    pub association: Vec<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neighborhood_range_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub configurations: Option<u64>,
}

/// One property check of the validation suite.
#[derive(Debug, Serialize, Deserialize)]
pub struct ValidateCheck {
    pub name: String,
    pub samples: u64,
    pub violations: u64,
    pub skipped: bool,
    pub ok: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ValidateReport {
    pub algorithm: String,
    pub seed: u64,
    pub checks: Vec<ValidateCheck>,
    pub total_violations: u64,
    pub all_ok: bool,
}

/// One row of the neighborhood-range sweep table.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub range_frac: f64,
    pub range_m: f64,
    pub mean_sum_rate_bps: f64,
    pub std_sum_rate_bps: f64,
    pub kmeans_greedy_mean_bps: f64,
    pub adapted_greedy_bps: f64,
}

/// Paths of the artifacts a run produced, plus headline numbers for the
/// caller.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub trace_path: PathBuf,
    pub result_path: PathBuf,
    pub meta_path: PathBuf,
    pub sum_rate_bps: Option<f64>,
    pub all_ok: bool,
}

fn read_to_string(path: &Path) -> Result<String, RunError> {
    fs::read_to_string(path).map_err(|source| RunError::Io {
        action: "read",
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(|source| RunError::Io {
        action: "write",
        path: path.to_path_buf(),
        source,
    })
}

fn to_pretty_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact structs serialize");
    text.push('\n');
    text.into_bytes()
}

/// Resolved worker count: `UAVNET_WORKERS` if set, else 1.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&w| w >= 1)
        .unwrap_or(1)
}

/// Executes a manifest and writes its artifacts. `trace.csv` and
/// `result.json` depend only on the scenario and the resolved config, so
/// re-running the same manifest reproduces them byte for byte; wall time
/// and other environment facts go to `meta.json`.
pub fn run_manifest(manifest: &RunManifest) -> Result<RunSummary, RunError> {
    let started = Instant::now();
    let text = read_to_string(&manifest.scenario)?;
    let scenario = Scenario::from_json(&text)?;
    let seed = manifest.seed.unwrap_or(scenario.rng_seed);

    fs::create_dir_all(&manifest.out_dir).map_err(|source| RunError::Io {
        action: "create",
        path: manifest.out_dir.clone(),
        source,
    })?;
    let trace_path = manifest.out_dir.join("trace.csv");
    let result_path = manifest.out_dir.join("result.json");
    let meta_path = manifest.out_dir.join("meta.json");

    let mut sum_rate = None;
    let mut all_ok = true;
    let mut resolved_t0: Option<f64> = manifest.t0;
    let mut sweep_rows: Option<Vec<SweepRow>> = None;

    match manifest.algorithm {
        Algorithm::Blll => {
            let config = BlllConfig {
                t0: manifest.t0,
                max_iters: manifest.iters.unwrap_or(50_000),
                neighborhood_range_m: manifest.range_frac.map(|f| f * scenario.box_diagonal()),
                seed,
                ..BlllConfig::default()
            };
            let run = blll::run(&scenario, &config)?;
            resolved_t0 = Some(run.t0);
            let result = RunResult {
                algorithm: manifest.algorithm.name().into(),
                seed,
                sum_rate_bps: run.state.best.sum_rate_bps,
                iterations: run.trace.len() as u64,
                placement: run.state.best.placement.to_coords(&scenario.grid),
                association: run.state.best.association.to_rows(),
                t0: Some(run.t0),
                neighborhood_range_m: config.neighborhood_range_m,
                configurations: None,
            };
            sum_rate = Some(result.sum_rate_bps);
            write_trace_and_result(&trace_path, &result_path, &run.trace, &result)?;
        }
        Algorithm::Greedy | Algorithm::KmeansGreedy => {
            let (configs, label) = match manifest.algorithm {
                Algorithm::Greedy => match &manifest.configs {
                    Some(path) => (
                        ConfigurationSet::from_json(&read_to_string(path)?, &scenario)?,
                        "greedy",
                    ),
                    None => (
                        ConfigurationSet::exhaustive(
                            &scenario,
                            manifest.oracle_budget().max_configs,
                        )?,
                        "greedy",
                    ),
                },
                _ => {
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    use rand::SeedableRng;
                    let initial = sampling::random_placement(&scenario, &mut rng);
                    let centers = greedy::kmeans_2d(&scenario, 30, &initial);
                    (
                        greedy::kmeans_configurations(
                            &scenario,
                            &centers,
                            false,
                            greedy::DEFAULT_CONFIG_BUDGET,
                        )?,
                        "kmeans_greedy",
                    )
                }
            };
            let outcome = greedy::greedy_over_configs(&configs, &scenario)?;
            let mut records = Vec::with_capacity(outcome.per_config_values.len());
            let mut best = f64::NEG_INFINITY;
            for (k, &v) in outcome.per_config_values.iter().enumerate() {
                best = best.max(v);
                records.push(TraceRecord {
                    iter: (k + 1) as u64,
                    temperature: None,
                    mover: None,
                    accepted: None,
                    sum_rate_bps: v,
                    best_sum_rate_bps: best,
                });
            }
            let result = RunResult {
                algorithm: label.into(),
                seed,
                sum_rate_bps: outcome.best_sum_rate_bps,
                iterations: outcome.selection_iterations,
                placement: configs.placements[outcome.best_config].to_coords(&scenario.grid),
                association: outcome.best_association.to_rows(),
                t0: None,
                neighborhood_range_m: None,
                configurations: Some(configs.placements.len() as u64),
            };
            sum_rate = Some(result.sum_rate_bps);
            write_trace_and_result(&trace_path, &result_path, &records, &result)?;
        }
        Algorithm::AdaptedGreedy => {
            let outcome = greedy::adapted_greedy(&scenario);
            let result = RunResult {
                algorithm: manifest.algorithm.name().into(),
                seed,
                sum_rate_bps: outcome.sum_rate_bps,
                iterations: outcome.placement_iterations,
                placement: outcome.placement.to_coords(&scenario.grid),
                association: outcome.association.to_rows(),
                t0: None,
                neighborhood_range_m: None,
                configurations: None,
            };
            sum_rate = Some(result.sum_rate_bps);
            write_trace_and_result(&trace_path, &result_path, &outcome.trace, &result)?;
        }
        Algorithm::Oracle => {
            let budget = manifest.oracle_budget();
            let (placement, assoc, value) = oracle::global_optimum(&scenario, &budget)?;
            let records = vec![TraceRecord {
                iter: 1,
                temperature: None,
                mover: None,
                accepted: None,
                sum_rate_bps: value,
                best_sum_rate_bps: value,
            }];
            let result = RunResult {
                algorithm: manifest.algorithm.name().into(),
                seed,
                sum_rate_bps: value,
                iterations: oracle::placement_count(&scenario).min(u64::MAX as u128) as u64,
                placement: placement.to_coords(&scenario.grid),
                association: assoc.to_rows(),
                t0: None,
                neighborhood_range_m: None,
                configurations: None,
            };
            sum_rate = Some(value);
            write_trace_and_result(&trace_path, &result_path, &records, &result)?;
        }
        Algorithm::Validate => {
            let report = validate_scenario(
                &scenario,
                seed,
                manifest.validate_samples.unwrap_or(200),
                &manifest.oracle_budget(),
            );
            all_ok = report.all_ok;
            write_file(&trace_path, format!("{}\n", trace::CSV_HEADER).as_bytes())?;
            write_file(&result_path, &to_pretty_json(&report))?;
        }
        Algorithm::Sweep => {
            for &f in &manifest.sweep_ranges {
                if !(0.0..=1.0).contains(&f) {
                    return Err(RunError::InvalidManifest(format!(
                        "range fraction {f} outside [0, 1]"
                    )));
                }
            }
            let rows = sweep_neighborhood_range(
                &scenario,
                &manifest.sweep_ranges,
                &manifest.sweep_seeds,
                manifest.iters.unwrap_or(50_000),
                manifest.t0,
            )?;
            write_file(&trace_path, format!("{}\n", trace::CSV_HEADER).as_bytes())?;
            let sweep_path = manifest.out_dir.join("sweep.csv");
            write_file(&sweep_path, sweep_csv(&rows).as_bytes())?;
            write_file(
                &result_path,
                &to_pretty_json(&serde_json::json!({
                    "algorithm": "sweep",
                    "seed": seed,
                    "rows": rows,
                })),
            )?;
            sweep_rows = Some(rows);
        }
    }

    let meta = serde_json::json!({
        "manifest": manifest,
        "resolved_seed": seed,
        "resolved_t0": resolved_t0,
        "workers": worker_count(),
        "wall_time_ms": started.elapsed().as_millis() as u64,
        "version": env!("CARGO_PKG_VERSION"),
        "sweep_rows": sweep_rows.map(|r| r.len()),
    });
    write_file(&meta_path, &to_pretty_json(&meta))?;

    Ok(RunSummary {
        out_dir: manifest.out_dir.clone(),
        trace_path,
        result_path,
        meta_path,
        sum_rate_bps: sum_rate,
        all_ok,
    })
}

fn write_trace_and_result(
    trace_path: &Path,
    result_path: &Path,
    records: &[TraceRecord],
    result: &RunResult,
) -> Result<(), RunError> {
    let mut buf = Vec::new();
    trace::write_csv(&mut buf, records).expect("writing to memory cannot fail");
    write_file(trace_path, &buf)?;
    write_file(result_path, &to_pretty_json(result))
}

/// Property suite over one scenario: potential-game identity on sampled
/// unilateral deviations, exhaustive submodularity/monotonicity when the
/// ground set is small enough, partition-matroid checks, and the greedy
/// bound against the oracle when the instance is desk-scale.
pub fn validate_scenario(
    scenario: &Scenario,
    seed: u64,
    samples: u64,
    budget: &OracleBudget,
) -> ValidateReport {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // potential-game identity
    {
        let mut violations = 0;
        for _ in 0..samples {
            let (placement, assoc) = sampling::random_feasible_state(scenario, &mut rng);
            let (j, placement_p, assoc_p) =
                sampling::random_unilateral_deviation(&placement, &assoc, scenario, &mut rng);
            let residual = crate::objective::potential_identity(
                j,
                (&placement, &assoc),
                (&placement_p, &assoc_p),
                scenario,
            )
            .expect("sampled deviations are unilateral");
            let table = RateTable::new(&placement, scenario);
            let table_p = RateTable::new(&placement_p, scenario);
            let scale = crate::objective::effective_sum_rate(&assoc, &table)
                .abs()
                .max(crate::objective::effective_sum_rate(&assoc_p, &table_p).abs())
                .max(1.0);
            if residual > 1e-9 * scale {
                violations += 1;
            }
        }
        checks.push(ValidateCheck {
            name: "potential_identity".into(),
            samples,
            violations,
            skipped: false,
            ok: violations == 0,
        });
    }

    // submodularity + monotonicity, exhaustive on small ground sets
    {
        let placement = sampling::random_placement(scenario, &mut rng);
        match greedy::check_submodular_monotone(&placement, scenario, 12) {
            Ok(report) => checks.push(ValidateCheck {
                name: "submodular_monotone".into(),
                samples: report.chains_checked,
                violations: report.total_violations(),
                skipped: false,
                ok: report.total_violations() == 0,
            }),
            Err(_) => checks.push(ValidateCheck {
                name: "submodular_monotone".into(),
                samples: 0,
                violations: 0,
                skipped: true,
                ok: true,
            }),
        }
    }

    // partition matroid over a bounded configuration list
    {
        let configs = match ConfigurationSet::exhaustive(scenario, 2_000) {
            Ok(set) => Some(set),
            Err(_) => {
                let placements: Vec<_> = (0..scenario.n_uavs().max(2))
                    .map(|offset| {
                        let cells = (0..scenario.n_uavs())
                            .map(|j| scenario.grid.cell_at(j + offset))
                            .collect();
                        crate::model::Placement::new(cells)
                    })
                    .collect();
                ConfigurationSet::explicit(placements, scenario).ok()
            }
        };
        match configs {
            Some(set) => {
                let report = greedy::check_partition_matroid(&set, scenario, samples, &mut rng);
                checks.push(ValidateCheck {
                    name: "partition_matroid".into(),
                    samples,
                    violations: report.total_violations(),
                    skipped: false,
                    ok: report.total_violations() == 0,
                });
            }
            None => checks.push(ValidateCheck {
                name: "partition_matroid".into(),
                samples: 0,
                violations: 0,
                skipped: true,
                ok: true,
            }),
        }
    }

    // greedy lower bound against the exact optimum
    {
        let check = match oracle::global_optimum(scenario, budget) {
            Ok((_, _, opt)) => {
                let set = ConfigurationSet::exhaustive(scenario, budget.max_configs)
                    .expect("within the oracle budget");
                let sweep =
                    greedy::greedy_over_configs(&set, scenario).expect("non-empty exhaustive set");
                let bound = 1.0 - (-1.0f64).exp();
                let holds = sweep.best_sum_rate_bps >= bound * opt - 1e-9 * opt.max(1.0);
                ValidateCheck {
                    name: "greedy_bound".into(),
                    samples: set.placements.len() as u64,
                    violations: u64::from(!holds),
                    skipped: false,
                    ok: holds,
                }
            }
            Err(_) => ValidateCheck {
                name: "greedy_bound".into(),
                samples: 0,
                violations: 0,
                skipped: true,
                ok: true,
            },
        };
        checks.push(check);
    }

    let total_violations = checks.iter().map(|c| c.violations).sum();
    let all_ok = checks.iter().all(|c| c.ok);
    ValidateReport {
        algorithm: "validate".into(),
        seed,
        checks,
        total_violations,
        all_ok,
    }
}

/// Runs BLLL at each neighborhood-range fraction across the seeds and
/// tabulates mean/stddev of the terminal-state sum-rate (the chain's
/// converged value, not the best-so-far), with the kmeans-greedy and
/// adapted-greedy values as baseline columns. Cells run on
/// `UAVNET_WORKERS` threads when set.
pub fn sweep_neighborhood_range(
    scenario: &Scenario,
    range_fracs: &[f64],
    seeds: &[u64],
    iters: u64,
    t0: Option<f64>,
) -> Result<Vec<SweepRow>, RunError> {
    use rand::SeedableRng;
    if seeds.is_empty() || range_fracs.is_empty() {
        return Ok(Vec::new());
    }
    let diagonal = scenario.box_diagonal();
    let adapted = greedy::adapted_greedy(scenario).sum_rate_bps;
    let mut kmeans_values = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        kmeans_values.push(greedy::combined_kmeans_greedy(scenario, &mut rng)?.best_sum_rate_bps);
    }
    let kmeans_mean = mean(&kmeans_values);

    // one BLLL run per (range, seed) cell, distributed over the workers
    let cells: Vec<(usize, u64)> = range_fracs
        .iter()
        .enumerate()
        .flat_map(|(ri, _)| seeds.iter().map(move |&s| (ri, s)))
        .collect();
    let mut finals = vec![0.0f64; cells.len()];
    let workers = worker_count().min(cells.len().max(1));
    if workers <= 1 {
        for (slot, &(ri, seed)) in cells.iter().enumerate() {
            finals[slot] = blll_cell(scenario, range_fracs[ri] * diagonal, seed, iters, t0)?;
        }
    } else {
        let results: Vec<Result<(usize, f64), RunError>> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..workers {
                let cells = &cells;
                handles.push(scope.spawn(move || {
                    let mut out = Vec::new();
                    for slot in (w..cells.len()).step_by(workers) {
                        let (ri, seed) = cells[slot];
                        match blll_cell(scenario, range_fracs[ri] * diagonal, seed, iters, t0) {
                            Ok(v) => out.push(Ok((slot, v))),
                            Err(e) => out.push(Err(e)),
                        }
                    }
                    out
                }));
            }
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        for r in results {
            let (slot, v) = r?;
            finals[slot] = v;
        }
    }

    let mut rows = Vec::with_capacity(range_fracs.len());
    for (ri, &frac) in range_fracs.iter().enumerate() {
        let values: Vec<f64> = (0..seeds.len())
            .map(|si| finals[ri * seeds.len() + si])
            .collect();
        rows.push(SweepRow {
            range_frac: frac,
            range_m: frac * diagonal,
            mean_sum_rate_bps: mean(&values),
            std_sum_rate_bps: stddev(&values),
            kmeans_greedy_mean_bps: kmeans_mean,
            adapted_greedy_bps: adapted,
        });
    }
    Ok(rows)
}

fn blll_cell(
    scenario: &Scenario,
    range_m: f64,
    seed: u64,
    iters: u64,
    t0: Option<f64>,
) -> Result<f64, RunError> {
    let config = BlllConfig {
        t0,
        max_iters: iters,
        neighborhood_range_m: Some(range_m),
        seed,
        ..BlllConfig::default()
    };
    Ok(blll::run(scenario, &config)?.final_sum_rate_bps())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn stddev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// The sweep table as CSV.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "range_frac,range_m,mean_sum_rate_bps,std_sum_rate_bps,kmeans_greedy_mean_bps,adapted_greedy_bps\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.range_frac,
            r.range_m,
            r.mean_sum_rate_bps,
            r.std_sum_rate_bps,
            r.kmeans_greedy_mean_bps,
            r.adapted_greedy_bps
        ));
    }
    out
}
