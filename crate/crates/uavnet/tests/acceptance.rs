//! Acceptance suite: every release criterion as one test, each printing a
//! single PASS/FAIL line. Exact desk-scale checks run against the
//! exhaustive oracle; the larger scenarios check iteration contracts and
//! the qualitative algorithm ordering on the canonical instances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uavnet::blll::{self, BlllConfig};
use uavnet::cli;
use uavnet::greedy::{self, ConfigurationSet};
use uavnet::model::Placement;
use uavnet::objective::{self, RateTable};
use uavnet::oracle::{self, OracleBudget};
use uavnet::presets;
use uavnet::sampling;

const GREEDY_BOUND: f64 = 1.0 - 1.0 / std::f64::consts::E;

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn scenario_path(name: &str) -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

/// Criterion 1: the utility change of any unilateral deviation equals the
/// sum-rate change to 1e-9 relative, over 1,000 random deviations on 20
/// random feasible instances.
#[test]
fn criterion_1_potential_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let scenario = sampling::random_desk_scenario(&mut rng);
        for _ in 0..50 {
            let (placement, assoc) = sampling::random_feasible_state(&scenario, &mut rng);
            let (j, placement_p, assoc_p) =
                sampling::random_unilateral_deviation(&placement, &assoc, &scenario, &mut rng);
            let residual = objective::potential_identity(
                j,
                (&placement, &assoc),
                (&placement_p, &assoc_p),
                &scenario,
            )
            .expect("sampled deviations are unilateral");
            let table = RateTable::new(&placement, &scenario);
            let table_p = RateTable::new(&placement_p, &scenario);
            let scale = objective::effective_sum_rate(&assoc, &table)
                .abs()
                .max(objective::effective_sum_rate(&assoc_p, &table_p).abs())
                .max(1.0);
            worst = worst.max(residual / scale);
            assert!(
                residual <= 1e-9 * scale,
                "ACCEPTANCE 1 potential-identity: FAIL - residual {residual:.3e} above 1e-9 of {scale:.3e}"
            );
        }
    }
    println!("ACCEPTANCE 1 potential-identity: PASS - 1000 deviations, worst relative residual {worst:.3e}");
}

/// Criterion 2: on the desk instance, at least 90% of 20 seeded BLLL runs
/// (50k iterations, logarithmic cooling) end with best-so-far equal to the
/// exhaustive global optimum to 1e-9 relative.
#[test]
fn criterion_2_blll_reaches_the_oracle_optimum() {
    let scenario = presets::desk();
    let (_, _, optimum) = oracle::global_optimum(&scenario, &OracleBudget::default()).unwrap();
    let mut hits = 0;
    for seed in 0..20u64 {
        let config = BlllConfig {
            max_iters: 50_000,
            seed,
            ..BlllConfig::default()
        };
        let run = blll::run(&scenario, &config).unwrap();
        if (run.state.best.sum_rate_bps - optimum).abs() <= 1e-9 * optimum {
            hits += 1;
        }
    }
    let pass = hits >= 18;
    println!(
        "ACCEPTANCE 2 blll-optimality: {} - {hits}/20 seeds reached the oracle optimum",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "only {hits}/20 seeds reached the optimum, need 18");
}

/// Criterion 3: on 50 random desk instances the exhaustive-configuration
/// greedy stays within the (1 - 1/e) bound of the exact optimum, with no
/// violations.
#[test]
fn criterion_3_greedy_bound_against_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let budget = OracleBudget::default();
    let mut worst_ratio = f64::INFINITY;
    for trial in 0..50 {
        let scenario = sampling::random_desk_scenario(&mut rng);
        let set = ConfigurationSet::exhaustive(&scenario, budget.max_configs).unwrap();
        let sweep = greedy::greedy_over_configs(&set, &scenario).unwrap();
        let (_, _, optimum) = oracle::global_optimum(&scenario, &budget).unwrap();
        if optimum > 0.0 {
            worst_ratio = worst_ratio.min(sweep.best_sum_rate_bps / optimum);
        }
        assert!(
            sweep.best_sum_rate_bps >= GREEDY_BOUND * optimum,
            "ACCEPTANCE 3 greedy-bound: FAIL - trial {trial}: greedy {:.6e} below (1-1/e) x {optimum:.6e}",
            sweep.best_sum_rate_bps
        );
    }
    println!(
        "ACCEPTANCE 3 greedy-bound: PASS - 50 instances, worst greedy/optimum ratio {worst_ratio:.4}"
    );
}

/// Criterion 4: exhaustive chain checks on 50 random small configurations
/// report zero monotonicity or submodularity violations, and the
/// association-dependent negative control is caught.
#[test]
fn criterion_4_submodularity_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut checked = 0;
    let mut chains: u64 = 0;
    while checked < 50 {
        let scenario = sampling::random_desk_scenario(&mut rng);
        let placement = sampling::random_placement(&scenario, &mut rng);
        match greedy::check_submodular_monotone(&placement, &scenario, 12) {
            Ok(report) => {
                assert_eq!(
                    report.total_violations(),
                    0,
                    "ACCEPTANCE 4 submodularity: FAIL - violations on a compliant instance: {:?}",
                    report.witnesses
                );
                chains += report.chains_checked;
                checked += 1;
            }
            Err(greedy::GreedyError::GroundSetTooLarge { .. }) => continue,
            Err(e) => panic!("ACCEPTANCE 4 submodularity: FAIL - {e}"),
        }
    }

    // negative control: association-dependent interference must be caught
    let mut scenario = presets::desk();
    scenario.eta_min_db = -30.0;
    let placement = Placement::new(vec![
        scenario.grid.cell_of(0.0, 0.0, 100.0).unwrap(),
        scenario.grid.cell_of(400.0, 0.0, 100.0).unwrap(),
    ]);
    let corrupted = greedy::check_submodular_monotone_corrupted(&placement, &scenario, 12).unwrap();
    assert!(
        corrupted.total_violations() >= 1,
        "ACCEPTANCE 4 submodularity: FAIL - negative control reported no violation"
    );
    println!(
        "ACCEPTANCE 4 submodularity: PASS - 50 configurations / {chains} chains clean, negative control caught {} violations",
        corrupted.total_violations()
    );
}

/// Criterion 5: adapted greedy uses exactly J placement iterations and the
/// k-means-reduced greedy stays within K x I x J selection steps on the
/// headline scenario.
#[test]
fn criterion_5_iteration_contracts() {
    let scenario = presets::urban45();
    let adapted = greedy::adapted_greedy(&scenario);
    assert_eq!(
        adapted.placement_iterations,
        scenario.n_uavs() as u64,
        "ACCEPTANCE 5 iteration-counts: FAIL - adapted greedy iterations"
    );
    assert_eq!(adapted.trace.len(), scenario.n_uavs());

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
    let initial = sampling::random_placement(&scenario, &mut rng);
    let centers = greedy::kmeans_2d(&scenario, 30, &initial);
    let configs =
        greedy::kmeans_configurations(&scenario, &centers, false, greedy::DEFAULT_CONFIG_BUDGET)
            .unwrap();
    let k = configs.placements.len() as u64;
    let sweep = greedy::greedy_over_configs(&configs, &scenario).unwrap();
    let cap = k * scenario.n_users() as u64 * scenario.n_uavs() as u64;
    assert!(
        sweep.selection_iterations <= cap,
        "ACCEPTANCE 5 iteration-counts: FAIL - {} selection steps above K*I*J = {cap}",
        sweep.selection_iterations
    );
    println!(
        "ACCEPTANCE 5 iteration-counts: PASS - adapted used exactly J={} placements, greedy used {}/{cap} selection steps over K={k} configurations",
        adapted.placement_iterations, sweep.selection_iterations
    );
}

/// Criterion 6: on the headline scenario, averaged over 10 seeds, the
/// algorithms land in the expected order: BLLL >= 0.98 x
/// kmeans-greedy, kmeans-greedy >= adapted-greedy - 5%, and all three stay
/// above (1 - 1/e) of the best value any algorithm found.
#[test]
fn criterion_6_algorithm_ordering() {
    let scenario = presets::urban45();
    let seeds: Vec<u64> = (1..=10).collect();

    let adapted = greedy::adapted_greedy(&scenario).sum_rate_bps;
    let mut kmeans_vals = Vec::new();
    for &seed in &seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        kmeans_vals.push(
            greedy::combined_kmeans_greedy(&scenario, &mut rng)
                .unwrap()
                .best_sum_rate_bps,
        );
    }
    let mut blll_finals = Vec::new();
    let mut best_found = adapted;
    for &seed in &seeds {
        let config = BlllConfig {
            max_iters: 700_000,
            seed,
            ..BlllConfig::default()
        };
        let run = blll::run(&scenario, &config).unwrap();
        blll_finals.push(run.final_sum_rate_bps());
        best_found = best_found.max(run.state.best.sum_rate_bps);
    }
    for &v in &kmeans_vals {
        best_found = best_found.max(v);
    }
    let blll_mean = mean(&blll_finals);
    let kmeans_mean = mean(&kmeans_vals);

    let clause_a = blll_mean >= 0.98 * kmeans_mean;
    let clause_b = kmeans_mean >= adapted - 0.05 * adapted;
    let floor = GREEDY_BOUND * best_found;
    let clause_c = blll_mean >= floor && kmeans_mean >= floor && adapted >= floor;

    let pass = clause_a && clause_b && clause_c;
    println!(
        "ACCEPTANCE 6 algorithm-ordering: {} - blll {blll_mean:.5e}, kmeans-greedy {kmeans_mean:.5e}, adapted {adapted:.5e}, best-found {best_found:.5e}",
        if pass { "PASS" } else { "FAIL" }
    );
    println!(
        "  clause blll >= 0.98 x kmeans: {} ({:.4} required 0.98)",
        if clause_a { "pass" } else { "FAIL" },
        blll_mean / kmeans_mean
    );
    println!(
        "  clause kmeans >= adapted - 5%: {} ({:.4} required 0.95)",
        if clause_b { "pass" } else { "FAIL" },
        kmeans_mean / adapted
    );
    println!(
        "  clause all >= (1-1/e) x best-found: {} (floor {floor:.5e})",
        if clause_c { "pass" } else { "FAIL" }
    );
    assert!(
        clause_a,
        "BLLL mean {blll_mean:.6e} below 0.98 x kmeans-greedy mean {kmeans_mean:.6e}"
    );
    assert!(
        clause_b,
        "kmeans-greedy mean {kmeans_mean:.6e} below adapted - 5% = {:.6e}; the reduced-configuration greedy does not come within 5% of the sequential heuristic on this instance",
        adapted - 0.05 * adapted
    );
    assert!(
        clause_c,
        "an algorithm fell below the (1-1/e) floor {floor:.6e}"
    );
}

/// Criterion 7: on the 10-UAV/60-user instance the full-information BLLL
/// beats the range-limited one, and at 10% range the kmeans-greedy
/// baseline beats the range-limited BLLL, over 10 seeds.
#[test]
fn criterion_7_range_sweep_trend() {
    let scenario = presets::range_sweep();
    let seeds: Vec<u64> = (1..=10).collect();
    let rows =
        cli::sweep_neighborhood_range(&scenario, &[0.1, 1.0], &seeds, 300_000, None).unwrap();
    assert_eq!(rows.len(), 2);
    let near = &rows[0];
    let full = &rows[1];
    let clause_full = full.mean_sum_rate_bps > near.mean_sum_rate_bps;
    let clause_baseline = near.kmeans_greedy_mean_bps > near.mean_sum_rate_bps;
    let pass = clause_full && clause_baseline;
    println!(
        "ACCEPTANCE 7 range-sweep-trend: {} - blll@1.0 {:.5e}, blll@0.1 {:.5e}, kmeans-greedy {:.5e}",
        if pass { "PASS" } else { "FAIL" },
        full.mean_sum_rate_bps,
        near.mean_sum_rate_bps,
        near.kmeans_greedy_mean_bps
    );
    assert!(
        clause_full,
        "full-range BLLL {:.6e} not above 10%-range BLLL {:.6e}",
        full.mean_sum_rate_bps, near.mean_sum_rate_bps
    );
    assert!(
        clause_baseline,
        "kmeans-greedy {:.6e} not above 10%-range BLLL {:.6e}",
        near.kmeans_greedy_mean_bps, near.mean_sum_rate_bps
    );
}

/// Criterion 8: re-running a manifest with the same seed reproduces
/// trace.csv and result.json byte for byte.
#[test]
fn criterion_8_manifest_determinism() {
    let desk = scenario_path("desk.json");
    let cases = [
        (cli::Algorithm::Blll, Some(20_000u64), Some(7u64)),
        (cli::Algorithm::AdaptedGreedy, None, None),
        (cli::Algorithm::KmeansGreedy, None, Some(3)),
    ];
    for (algorithm, iters, seed) in cases {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let mut manifest = cli::RunManifest::new(&desk, algorithm, dir.path().join("run"));
            manifest.iters = iters;
            manifest.seed = seed;
            let summary = cli::run_manifest(&manifest).unwrap();
            outputs.push((
                std::fs::read(&summary.trace_path).unwrap(),
                std::fs::read(&summary.result_path).unwrap(),
            ));
        }
        assert_eq!(
            outputs[0].0,
            outputs[1].0,
            "ACCEPTANCE 8 determinism: FAIL - {} trace.csv differs between runs",
            algorithm.name()
        );
        assert_eq!(
            outputs[0].1,
            outputs[1].1,
            "ACCEPTANCE 8 determinism: FAIL - {} result.json differs between runs",
            algorithm.name()
        );
    }
    println!(
        "ACCEPTANCE 8 determinism: PASS - byte-identical trace.csv and result.json across re-runs"
    );
}
