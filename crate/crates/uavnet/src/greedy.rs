//! Configuration providers, the per-configuration greedy association with
//! its outer loop over configurations, the k-means search-space reduction,
//! the fast adapted greedy, and exhaustive submodularity / matroid
//! property checkers for the per-configuration set function.

use rand::Rng;
use thiserror::Error;

use crate::channel;
use crate::model::{Association, GridCell, GridPoint, ModelError, Placement, Scenario};
use crate::objective::{effective_association, sum_rate_cached, RateTable};
use crate::sampling;
use crate::trace::TraceRecord;

/// Hard cap on materialized configuration lists (a list entry per UAV
/// position tuple); guards against accidentally exhaustive height spaces.
pub const DEFAULT_CONFIG_BUDGET: u64 = 10_000_000;

const KMEANS_ROUNDS: usize = 30;

#[derive(Debug, Error)]
pub enum GreedyError {
    #[error("configuration set is empty")]
    EmptyConfigurationSet,
    #[error("{needed} configurations exceed the budget of {budget}")]
    TooManyConfigurations { needed: u128, budget: u64 },
    #[error("ground set has {size} elements, exhaustive checks allow {limit}")]
    GroundSetTooLarge { size: usize, limit: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Explicit,
    Exhaustive,
    KmeansReduced,
}

/// Ordered list of candidate placements.
#[derive(Debug, Clone)]
pub struct ConfigurationSet {
    pub placements: Vec<Placement>,
    pub provenance: Provenance,
}

impl ConfigurationSet {
    pub fn explicit(placements: Vec<Placement>, scenario: &Scenario) -> Result<Self, GreedyError> {
        if placements.is_empty() {
            return Err(GreedyError::EmptyConfigurationSet);
        }
        for p in &placements {
            scenario.check_placement(p)?;
        }
        Ok(Self {
            placements,
            provenance: Provenance::Explicit,
        })
    }

    /// Every placement over the grid (collocations skipped unless the
    /// scenario allows them). Desk-scale instances only.
    pub fn exhaustive(scenario: &Scenario, max_configs: u64) -> Result<Self, GreedyError> {
        let needed = crate::oracle::placement_count(scenario);
        if needed > max_configs as u128 {
            return Err(GreedyError::TooManyConfigurations {
                needed,
                budget: max_configs,
            });
        }
        let total = scenario.grid.num_points();
        let n_uavs = scenario.n_uavs();
        let mut placements = Vec::new();
        let mut flats = vec![0usize; n_uavs];
        loop {
            let distinct_ok = scenario.allow_collocation
                || (0..n_uavs).all(|a| (a + 1..n_uavs).all(|b| flats[a] != flats[b]));
            if distinct_ok {
                placements.push(Placement::new(
                    flats.iter().map(|&f| scenario.grid.cell_at(f)).collect(),
                ));
            }
            let mut pos = n_uavs;
            let mut done = false;
            while pos > 0 {
                pos -= 1;
                flats[pos] += 1;
                if flats[pos] < total {
                    break;
                }
                flats[pos] = 0;
                if pos == 0 {
                    done = true;
                }
            }
            if done {
                break;
            }
        }
        Ok(Self {
            placements,
            provenance: Provenance::Exhaustive,
        })
    }

    /// JSON export: an array of placements, each an array of [x, y, h]
    /// coordinate triples.
    pub fn to_json(&self, scenario: &Scenario) -> String {
        let coords: Vec<Vec<[f64; 3]>> = self
            .placements
            .iter()
            .map(|p| p.to_coords(&scenario.grid))
            .collect();
        serde_json::to_string_pretty(&coords).expect("plain arrays serialize")
    }

    /// JSON import; every coordinate must be an exact grid point.
    pub fn from_json(text: &str, scenario: &Scenario) -> Result<Self, GreedyError> {
        let coords: Vec<Vec<[f64; 3]>> = serde_json::from_str(text)
            .map_err(|e| GreedyError::Model(ModelError::InvalidScenario(e.to_string())))?;
        let placements = coords
            .iter()
            .map(|c| Placement::from_coords(c, &scenario.grid))
            .collect::<Result<Vec<_>, _>>()?;
        Self::explicit(placements, scenario)
    }
}

/// Result of a greedy sweep over a configuration set.
#[derive(Debug, Clone)]
pub struct GreedyResult {
    pub best_config: usize,
    pub best_association: Association,
    pub best_sum_rate_bps: f64,
    pub per_config_values: Vec<f64>,
    /// Total number of greedy selections (element additions) performed,
    /// at most K x I x J.
    pub selection_iterations: u64,
}

/// Greedy association for one fixed configuration: repeatedly connect the
/// feasible (user, UAV) pair with the highest rate, ties broken by lower
/// user id then lower UAV id, until no pair satisfies the quota and QoS
/// constraints. Rates are fixed by the configuration, independent of the
/// association built so far.
pub fn greedy_per_config(placement: &Placement, scenario: &Scenario) -> (Association, f64) {
    let table = RateTable::new(placement, scenario);
    greedy_with_table(&table, scenario)
}

fn greedy_with_table(table: &RateTable, scenario: &Scenario) -> (Association, f64) {
    let n_users = scenario.n_users();
    let n_uavs = scenario.n_uavs();
    let mut assoc = Association::empty(n_users, n_uavs);
    let mut load = vec![0usize; n_uavs];
    let mut taken = vec![false; n_users];
    let mut value = 0.0;
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n_users {
            if taken[i] {
                continue;
            }
            for j in 0..n_uavs {
                if load[j] >= scenario.uavs[j].quota || !table.qos_ok(i, j) {
                    continue;
                }
                let rate = table.rate(i, j);
                if best.is_none_or(|(r, _, _)| rate > r) {
                    best = Some((rate, i, j));
                }
            }
        }
        match best {
            None => break,
            Some((rate, i, j)) => {
                assoc.set(i, j, true);
                taken[i] = true;
                load[j] += 1;
                value += rate;
            }
        }
    }
    (assoc, value)
}

/// Runs the per-configuration greedy on every placement of the set and
/// keeps the maximizer (first index on ties).
pub fn greedy_over_configs(
    configs: &ConfigurationSet,
    scenario: &Scenario,
) -> Result<GreedyResult, GreedyError> {
    if configs.placements.is_empty() {
        return Err(GreedyError::EmptyConfigurationSet);
    }
    let mut per_config_values = Vec::with_capacity(configs.placements.len());
    let mut best: Option<(usize, Association, f64)> = None;
    let mut selections: u64 = 0;
    for (k, placement) in configs.placements.iter().enumerate() {
        let (assoc, value) = greedy_per_config(placement, scenario);
        selections += assoc.pairs().len() as u64;
        per_config_values.push(value);
        let better = match &best {
            None => true,
            Some((_, _, best_value)) => value > *best_value,
        };
        if better {
            best = Some((k, assoc, value));
        }
    }
    let (best_config, best_association, best_sum_rate_bps) = best.expect("non-empty set");
    Ok(GreedyResult {
        best_config,
        best_association,
        best_sum_rate_bps,
        per_config_values,
        selection_iterations: selections,
    })
}

/// One k-means pass in the 2D plane: users join the UAV giving them the
/// best SINR, every UAV moves to the barycenter of its cluster (keeping
/// its previous point when the cluster is empty), then the final centers
/// snap to the nearest grid (x, y). Heights stay at the initial
/// placement's values during clustering.
pub fn kmeans_2d(scenario: &Scenario, n_rounds: usize, initial: &Placement) -> Vec<(f64, f64)> {
    let n_users = scenario.n_users();
    let n_uavs = scenario.n_uavs();
    let heights: Vec<f64> = (0..n_uavs)
        .map(|j| initial.point(j, &scenario.grid).h)
        .collect();
    let mut centers: Vec<(f64, f64)> = (0..n_uavs)
        .map(|j| {
            let p = initial.point(j, &scenario.grid);
            (p.x, p.y)
        })
        .collect();
    let mut assignment: Vec<usize> = vec![0; n_users];

    for round in 0..n_rounds.max(1) {
        // received power from every center at its clustering height
        let mut power = vec![0.0f64; n_users * n_uavs];
        for (i, user) in scenario.users.iter().enumerate() {
            for j in 0..n_uavs {
                let pos = GridPoint {
                    x: centers[j].0,
                    y: centers[j].1,
                    h: heights[j],
                };
                power[i * n_uavs + j] = channel::received_power_at(
                    pos,
                    scenario.uavs[j].power_w(),
                    user,
                    &scenario.channel,
                )
                .expect("positive clustering heights");
            }
        }
        let noise = scenario.channel.noise_w();
        let mut next_assignment = vec![0usize; n_users];
        for i in 0..n_users {
            let total: f64 = power[i * n_uavs..(i + 1) * n_uavs].iter().sum();
            let mut best = (f64::NEG_INFINITY, 0usize);
            for j in 0..n_uavs {
                let p = power[i * n_uavs + j];
                let gamma = p / (noise + total - p);
                if gamma > best.0 {
                    best = (gamma, j);
                }
            }
            next_assignment[i] = best.1;
        }
        if round > 0 && next_assignment == assignment {
            break;
        }
        assignment = next_assignment;
        for j in 0..n_uavs {
            let members: Vec<usize> = (0..n_users).filter(|&i| assignment[i] == j).collect();
            if !members.is_empty() {
                let inv = 1.0 / members.len() as f64;
                let x = members.iter().map(|&i| scenario.users[i].x).sum::<f64>() * inv;
                let y = members.iter().map(|&i| scenario.users[i].y).sum::<f64>() * inv;
                centers[j] = (x, y);
            }
        }
    }

    centers
        .into_iter()
        .map(|(x, y)| {
            let cell = scenario.grid.snap(x, y, scenario.grid.h_min);
            (scenario.grid.x_at(cell.ix), scenario.grid.y_at(cell.iy))
        })
        .collect()
}

/// Builds the reduced configuration set from fixed 2D centers crossed with
/// every height combination. `permute` additionally tries every bijective
/// assignment of centers to UAVs.
pub fn kmeans_configurations(
    scenario: &Scenario,
    centers: &[(f64, f64)],
    permute: bool,
    max_configs: u64,
) -> Result<ConfigurationSet, GreedyError> {
    assert_eq!(centers.len(), scenario.n_uavs());
    let n_uavs = scenario.n_uavs();
    let nh = scenario.grid.nh() as u128;
    let mut needed: u128 = 1;
    for _ in 0..n_uavs {
        needed = needed.saturating_mul(nh);
    }
    if permute {
        for f in 1..=n_uavs as u128 {
            needed = needed.saturating_mul(f);
        }
    }
    if needed > max_configs as u128 {
        return Err(GreedyError::TooManyConfigurations {
            needed,
            budget: max_configs,
        });
    }

    let mut cells2d: Vec<(usize, usize)> = centers
        .iter()
        .map(|&(x, y)| {
            let c = scenario.grid.snap(x, y, scenario.grid.h_min);
            (c.ix, c.iy)
        })
        .collect();

    let orders: Vec<Vec<usize>> = if permute {
        permutations(n_uavs)
    } else {
        vec![(0..n_uavs).collect()]
    };

    let mut placements = build_height_combinations(scenario, &cells2d, &orders);
    if placements.is_empty() {
        // duplicate centers with a single flight height: nudge duplicates
        // to neighboring grid columns so the set stays non-empty
        dedupe_2d_cells(&mut cells2d, scenario);
        placements = build_height_combinations(scenario, &cells2d, &orders);
    }
    if placements.is_empty() {
        return Err(GreedyError::EmptyConfigurationSet);
    }
    Ok(ConfigurationSet {
        placements,
        provenance: Provenance::KmeansReduced,
    })
}

fn build_height_combinations(
    scenario: &Scenario,
    cells2d: &[(usize, usize)],
    orders: &[Vec<usize>],
) -> Vec<Placement> {
    let n_uavs = cells2d.len();
    let nh = scenario.grid.nh();
    let mut placements = Vec::new();
    for order in orders {
        let mut heights = vec![0usize; n_uavs];
        loop {
            let cells: Vec<GridCell> = (0..n_uavs)
                .map(|j| {
                    let (ix, iy) = cells2d[order[j]];
                    GridCell {
                        ix,
                        iy,
                        ih: heights[j],
                    }
                })
                .collect();
            let placement = Placement::new(cells);
            if scenario.allow_collocation || placement.collocated_pair().is_none() {
                placements.push(placement);
            }
            let mut pos = n_uavs;
            let mut done = false;
            while pos > 0 {
                pos -= 1;
                heights[pos] += 1;
                if heights[pos] < nh {
                    break;
                }
                heights[pos] = 0;
                if pos == 0 {
                    done = true;
                }
            }
            if done {
                break;
            }
        }
    }
    placements
}

fn dedupe_2d_cells(cells2d: &mut [(usize, usize)], scenario: &Scenario) {
    let nx = scenario.grid.nx();
    let ny = scenario.grid.ny();
    for j in 1..cells2d.len() {
        let mut guard = 0;
        while cells2d[..j].contains(&cells2d[j]) && guard < nx * ny {
            let (ix, iy) = cells2d[j];
            cells2d[j] = if ix + 1 < nx {
                (ix + 1, iy)
            } else {
                (0, (iy + 1) % ny)
            };
            guard += 1;
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    heap_permute(&mut items, n, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// K-means reduction followed by the greedy sweep over the reduced set.
pub fn combined_kmeans_greedy<R: Rng>(
    scenario: &Scenario,
    rng: &mut R,
) -> Result<GreedyResult, GreedyError> {
    let initial = sampling::random_placement(scenario, rng);
    let centers = kmeans_2d(scenario, KMEANS_ROUNDS, &initial);
    let configs = kmeans_configurations(scenario, &centers, false, DEFAULT_CONFIG_BUDGET)?;
    greedy_over_configs(&configs, scenario)
}

/// Outcome of the adapted greedy: final state plus the per-placement trace
/// of the running (deployment-order) sum-rate.
#[derive(Debug, Clone)]
pub struct AdaptedGreedyOutcome {
    pub placement: Placement,
    pub association: Association,
    pub sum_rate_bps: f64,
    pub trace: Vec<TraceRecord>,
    pub placement_iterations: u64,
}

/// Sequential per-UAV deployment: UAVs in decreasing-quota order each scan
/// the untaken grid points, pick the one maximizing the sum of their best
/// N_j feasible user rates (interference from already-placed UAVs only),
/// and keep those users permanently. Exactly J placement iterations.
///
/// The returned sum-rate re-evaluates the final state under full
/// interference with below-QoS links dropped, so the output is feasible.
pub fn adapted_greedy(scenario: &Scenario) -> AdaptedGreedyOutcome {
    let n_users = scenario.n_users();
    let n_uavs = scenario.n_uavs();
    let mut order: Vec<usize> = (0..n_uavs).collect();
    order.sort_by(|&a, &b| {
        scenario.uavs[b]
            .quota
            .cmp(&scenario.uavs[a].quota)
            .then(a.cmp(&b))
    });

    let noise = scenario.channel.noise_w();
    let mut interference = vec![0.0f64; n_users]; // from already-placed UAVs
    let mut unassigned: Vec<bool> = vec![true; n_users];
    let mut cells: Vec<GridCell> = vec![
        GridCell {
            ix: 0,
            iy: 0,
            ih: 0
        };
        n_uavs
    ];
    let mut taken_flats: Vec<usize> = Vec::with_capacity(n_uavs);
    let mut assoc = Association::empty(n_users, n_uavs);
    let mut trace = Vec::with_capacity(n_uavs);
    let mut running = 0.0;

    for (step, &j) in order.iter().enumerate() {
        let quota = scenario.uavs[j].quota;
        let power = scenario.uavs[j].power_w();
        let bandwidth = scenario.uavs[j].bandwidth_hz;
        let mut best_value = f64::NEG_INFINITY;
        let mut best_flat = 0usize;
        let mut best_users: Vec<usize> = Vec::new();

        let mut top: Vec<(f64, usize)> = Vec::with_capacity(quota + 1);
        for flat in 0..scenario.grid.num_points() {
            if !scenario.allow_collocation && taken_flats.contains(&flat) {
                continue;
            }
            let pos = scenario.grid.point(scenario.grid.cell_at(flat));
            top.clear();
            for i in 0..n_users {
                if !unassigned[i] {
                    continue;
                }
                let p =
                    channel::received_power_at(pos, power, &scenario.users[i], &scenario.channel)
                        .expect("positive flight heights");
                let gamma = p / (noise + interference[i]);
                let eta = (1.0 + gamma).log2();
                if !scenario.qos_value_ok(gamma, eta) {
                    continue;
                }
                let rate = bandwidth * eta;
                // keep the best `quota` rates; ties prefer the lower id,
                // which insertion order already provides
                let at = top.iter().position(|&(r, _)| rate > r).unwrap_or(top.len());
                if at < quota {
                    top.insert(at, (rate, i));
                    top.truncate(quota);
                }
            }
            let value: f64 = top.iter().map(|&(r, _)| r).sum();
            if value > best_value {
                best_value = value;
                best_flat = flat;
                best_users = top.iter().map(|&(_, i)| i).collect();
            }
        }

        let cell = scenario.grid.cell_at(best_flat);
        cells[j] = cell;
        taken_flats.push(best_flat);
        let pos = scenario.grid.point(cell);
        for &i in &best_users {
            assoc.set(i, j, true);
            unassigned[i] = false;
        }
        for i in 0..n_users {
            interference[i] +=
                channel::received_power_at(pos, power, &scenario.users[i], &scenario.channel)
                    .expect("positive flight heights");
        }
        running += best_value.max(0.0);
        trace.push(TraceRecord {
            iter: (step + 1) as u64,
            temperature: None,
            mover: None,
            accepted: None,
            sum_rate_bps: running,
            best_sum_rate_bps: running,
        });
    }

    let placement = Placement::new(cells);
    let table = RateTable::new(&placement, scenario);
    let association = effective_association(&assoc, &table);
    let sum_rate_bps = sum_rate_cached(&association, &table);
    AdaptedGreedyOutcome {
        placement,
        association,
        sum_rate_bps,
        trace,
        placement_iterations: n_uavs as u64,
    }
}

/// A monotonicity or submodularity counterexample, kept small enough to
/// print.
#[derive(Debug, Clone)]
pub struct ViolationWitness {
    pub kind: &'static str,
    pub set_a: Vec<(usize, usize)>,
    pub set_b: Vec<(usize, usize)>,
    pub element: Option<(usize, usize)>,
}

/// Outcome of the exhaustive chain checks on one configuration.
#[derive(Debug, Clone)]
pub struct SubmodularityReport {
    pub ground_size: usize,
    pub chains_checked: u64,
    pub monotonicity_violations: u64,
    pub submodularity_violations: u64,
    pub witnesses: Vec<ViolationWitness>,
}

impl SubmodularityReport {
    pub fn total_violations(&self) -> u64 {
        self.monotonicity_violations + self.submodularity_violations
    }
}

#[derive(Clone, Copy)]
enum RateWorld {
    /// Interference fixed by the configuration, as the reformulation
    /// requires.
    FixedConfiguration,
    /// Interference only from UAVs that currently serve someone: the
    /// negative control that breaks monotonicity and submodularity.
    AssociationDependent,
}

/// Exhaustively verifies, for one configuration, that the quota-aware set
/// function is monotone and submodular over every chain A subset of B and
/// feasible element outside B. The function value of a set keeps, per UAV,
/// the quota-best elements by spectral efficiency (a new element displaces
/// the weakest incumbent at quota).
pub fn check_submodular_monotone(
    placement: &Placement,
    scenario: &Scenario,
    exhaustive_limit: usize,
) -> Result<SubmodularityReport, GreedyError> {
    check_submodular_with_world(
        placement,
        scenario,
        exhaustive_limit,
        RateWorld::FixedConfiguration,
    )
}

/// Negative control: evaluates the same chains with association-dependent
/// interference and reports the violations that appear.
pub fn check_submodular_monotone_corrupted(
    placement: &Placement,
    scenario: &Scenario,
    exhaustive_limit: usize,
) -> Result<SubmodularityReport, GreedyError> {
    check_submodular_with_world(
        placement,
        scenario,
        exhaustive_limit,
        RateWorld::AssociationDependent,
    )
}

fn check_submodular_with_world(
    placement: &Placement,
    scenario: &Scenario,
    exhaustive_limit: usize,
    world: RateWorld,
) -> Result<SubmodularityReport, GreedyError> {
    const MASK_LIMIT: usize = 20;
    let table = RateTable::new(placement, scenario);
    let ground: Vec<(usize, usize)> = (0..scenario.n_users())
        .flat_map(|i| (0..scenario.n_uavs()).map(move |j| (i, j)))
        .filter(|&(i, j)| table.qos_ok(i, j))
        .collect();
    let n = ground.len();
    if n > exhaustive_limit || n > MASK_LIMIT {
        return Err(GreedyError::GroundSetTooLarge {
            size: n,
            limit: exhaustive_limit.min(MASK_LIMIT),
        });
    }

    // f over every subset mask
    let masks = 1usize << n;
    let mut f = vec![0.0f64; masks];
    for (mask, slot) in f.iter_mut().enumerate() {
        *slot = eval_set(mask, &ground, &table, scenario, world);
    }
    let tol = 1e-9 * f[masks - 1].abs().max(1.0);

    let mut report = SubmodularityReport {
        ground_size: n,
        chains_checked: 0,
        monotonicity_violations: 0,
        submodularity_violations: 0,
        witnesses: Vec::new(),
    };
    let to_set = |mask: usize| -> Vec<(usize, usize)> {
        (0..n)
            .filter(|&e| mask & (1 << e) != 0)
            .map(|e| ground[e])
            .collect()
    };
    for b in 0..masks {
        let mut a = b;
        loop {
            report.chains_checked += 1;
            if f[a] > f[b] + tol {
                report.monotonicity_violations += 1;
                if report.witnesses.len() < 8 {
                    report.witnesses.push(ViolationWitness {
                        kind: "monotonicity",
                        set_a: to_set(a),
                        set_b: to_set(b),
                        element: None,
                    });
                }
            }
            for e in 0..n {
                let bit = 1usize << e;
                if b & bit != 0 {
                    continue;
                }
                let gain_a = f[a | bit] - f[a];
                let gain_b = f[b | bit] - f[b];
                if gain_a + tol < gain_b {
                    report.submodularity_violations += 1;
                    if report.witnesses.len() < 8 {
                        report.witnesses.push(ViolationWitness {
                            kind: "submodularity",
                            set_a: to_set(a),
                            set_b: to_set(b),
                            element: Some(ground[e]),
                        });
                    }
                }
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    Ok(report)
}

/// Value of one element set: per UAV, the quota-best members by spectral
/// efficiency contribute their rates.
fn eval_set(
    mask: usize,
    ground: &[(usize, usize)],
    table: &RateTable,
    scenario: &Scenario,
    world: RateWorld,
) -> f64 {
    let n_uavs = scenario.n_uavs();
    let members: Vec<(usize, usize)> = (0..ground.len())
        .filter(|&e| mask & (1 << e) != 0)
        .map(|e| ground[e])
        .collect();
    let active: Vec<bool> = match world {
        RateWorld::FixedConfiguration => vec![true; n_uavs],
        RateWorld::AssociationDependent => {
            let mut active = vec![false; n_uavs];
            for &(_, j) in &members {
                active[j] = true;
            }
            active
        }
    };
    let mut total = 0.0;
    for j in 0..n_uavs {
        let mut column: Vec<(f64, f64, usize)> = members
            .iter()
            .filter(|&&(_, k)| k == j)
            .map(|&(i, _)| {
                let (eta, rate) = match world {
                    RateWorld::FixedConfiguration => (table.eta(i, j), table.rate(i, j)),
                    RateWorld::AssociationDependent => {
                        let p = table.power_w(i, j);
                        let mut denom = table.noise_w();
                        for l in 0..n_uavs {
                            if l != j && active[l] {
                                denom += table.power_w(i, l);
                            }
                        }
                        let gamma = p / denom;
                        let eta = (1.0 + gamma).log2();
                        (eta, scenario.uavs[j].bandwidth_hz * eta)
                    }
                };
                (eta, rate, i)
            })
            .collect();
        // quota-best by spectral efficiency, ties to the lower user id
        column.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.2.cmp(&b.2)));
        total += column
            .iter()
            .take(scenario.uavs[j].quota)
            .map(|&(_, rate, _)| rate)
            .sum::<f64>();
    }
    total
}

/// Outcome of the sampled partition-matroid property checks.
#[derive(Debug, Clone)]
pub struct MatroidReport {
    pub samples: u64,
    pub empty_set_independent: bool,
    pub hereditary_violations: u64,
    pub augmentation_violations: u64,
    pub cross_config_accepted: u64,
}

impl MatroidReport {
    pub fn total_violations(&self) -> u64 {
        self.hereditary_violations
            + self.augmentation_violations
            + self.cross_config_accepted
            + u64::from(!self.empty_set_independent)
    }
}

/// Independence in the configuration partition: all members share one
/// configuration block and the block's cardinality cap holds.
fn is_independent(set: &[(usize, usize, usize)], cap: usize) -> bool {
    match set.first() {
        None => true,
        Some(&(_, _, k0)) => set.len() <= cap && set.iter().all(|&(_, _, k)| k == k0),
    }
}

/// Samples independent sets of the configuration partition matroid and
/// verifies the hereditary property and the augmentation property
/// restricted to same-configuration pairs.
pub fn check_partition_matroid<R: Rng>(
    configs: &ConfigurationSet,
    scenario: &Scenario,
    samples: u64,
    rng: &mut R,
) -> MatroidReport {
    let n_users = scenario.n_users();
    let n_uavs = scenario.n_uavs();
    let n_configs = configs.placements.len();
    let cap = n_users.min(scenario.uavs.iter().map(|u| u.quota).sum());
    let mut report = MatroidReport {
        samples,
        empty_set_independent: is_independent(&[], cap),
        hereditary_violations: 0,
        augmentation_violations: 0,
        cross_config_accepted: 0,
    };

    let sample_in_config = |k: usize, size: usize, rng: &mut R| -> Vec<(usize, usize, usize)> {
        let block: Vec<(usize, usize, usize)> = (0..n_users)
            .flat_map(|i| (0..n_uavs).map(move |j| (i, j, k)))
            .collect();
        rand::seq::index::sample(rng, block.len(), size.min(block.len()))
            .iter()
            .map(|idx| block[idx])
            .collect()
    };

    for _ in 0..samples {
        let k = rng.gen_range(0..n_configs);
        let max_size = cap.min(n_users * n_uavs);
        let size_a = rng.gen_range(1..=max_size.max(1));
        let set_a = sample_in_config(k, size_a, rng);
        debug_assert!(is_independent(&set_a, cap));

        // hereditary: every sampled subset stays independent
        let keep: Vec<(usize, usize, usize)> = set_a
            .iter()
            .copied()
            .filter(|_| rng.gen::<bool>())
            .collect();
        if !is_independent(&keep, cap) {
            report.hereditary_violations += 1;
        }

        // augmentation within the same configuration block
        if set_a.len() > 1 {
            let size_b = rng.gen_range(0..set_a.len());
            let set_b = sample_in_config(k, size_b, rng);
            if is_independent(&set_b, cap) && set_b.len() < set_a.len() {
                let found = set_a.iter().any(|e| {
                    if set_b.contains(e) {
                        return false;
                    }
                    let mut grown = set_b.clone();
                    grown.push(*e);
                    is_independent(&grown, cap)
                });
                if !found {
                    report.augmentation_violations += 1;
                }
            }
        }

        // sets spanning two configurations must be rejected
        if n_configs > 1 {
            let other = (k + 1) % n_configs;
            let mut spanning = sample_in_config(k, 1, rng);
            spanning.extend(sample_in_config(other, 1, rng));
            if is_independent(&spanning, cap) {
                report.cross_config_accepted += 1;
            }
        }
    }
    report
}
