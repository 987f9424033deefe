//! Binary log-linear learning over the joint position + association action
//! space: one UAV at a time proposes an axis-neighbor move plus a resampled
//! served-user set and accepts via the two-point Gibbs rule under a cooling
//! temperature.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Association, Placement, Scenario};
use crate::objective::{
    effective_association, effective_sum_rate, marginal_utility_cached,
    marginal_utility_ranged_cached, sum_rate_cached, RateTable,
};
use crate::sampling;
use crate::trace::TraceRecord;

#[derive(Debug, Error)]
pub enum BlllError {
    #[error("invalid BLLL config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cooling {
    /// T(t) = t0 / ln(1 + t), starting at t = 1.
    #[default]
    Logarithmic,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// One uniformly chosen UAV per iteration (keeps deviations unilateral).
    #[default]
    UniformSingle,
    /// Per-round fair coin per UAV, as printed in the original scheme; can
    /// activate several UAVs in one round.
    CoinFlip,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlllConfig {
    /// Initial temperature in bit/s. `None` estimates it as the standard
    /// deviation of the sum-rate over 100 random feasible warm-up states.
    pub t0: Option<f64>,
    #[serde(default)]
    pub cooling: Cooling,
    pub max_iters: u64,
    #[serde(default)]
    pub activation: Activation,
    /// Utility neighborhood range in meters; `None` means full information.
    #[serde(default)]
    pub neighborhood_range_m: Option<f64>,
    pub seed: u64,
}

impl Default for BlllConfig {
    fn default() -> Self {
        Self {
            t0: None,
            cooling: Cooling::default(),
            max_iters: 50_000,
            activation: Activation::default(),
            neighborhood_range_m: None,
            seed: 0,
        }
    }
}

impl BlllConfig {
    pub fn validate(&self) -> Result<(), BlllError> {
        if self.max_iters == 0 {
            return Err(BlllError::InvalidConfig("max_iters must be >= 1".into()));
        }
        if let Some(t0) = self.t0 {
            if !(t0 > 0.0) {
                return Err(BlllError::InvalidConfig(format!(
                    "t0 must be > 0, got {t0}"
                )));
            }
        }
        if let Some(r) = self.neighborhood_range_m {
            if !(r >= 0.0) {
                return Err(BlllError::InvalidConfig(format!(
                    "range must be >= 0, got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Best state seen along a run.
#[derive(Debug, Clone)]
pub struct BestState {
    pub placement: Placement,
    pub association: Association,
    pub sum_rate_bps: f64,
}

/// Mutable run state. The association always satisfies the row-sum and
/// quota constraints, with below-QoS links already dropped.
#[derive(Debug, Clone)]
pub struct BlllState {
    pub placement: Placement,
    pub association: Association,
    pub utilities: Vec<f64>,
    pub iteration: u64,
    pub best: BestState,
}

/// A candidate action for one UAV: neighbor position plus resampled
/// own-column, with the link-budget cache for the candidate placement.
pub struct Proposal {
    pub placement: Placement,
    pub association: Association,
    pub table: RateTable,
}

/// Completed run: final state plus the per-iteration trace.
pub struct BlllRun {
    pub state: BlllState,
    pub trace: Vec<TraceRecord>,
    pub t0: f64,
}

impl BlllRun {
    /// Sum-rate of the terminal chain state (the last trace row), as
    /// opposed to the best state ever visited.
    pub fn final_sum_rate_bps(&self) -> f64 {
        match self.trace.last() {
            Some(rec) => rec.sum_rate_bps,
            None => self.state.best.sum_rate_bps,
        }
    }
}

/// Draws UAV `j`'s candidate action: a uniform in-bounds axis neighbor of
/// its cell (falling back to the current cell if none exists) plus a
/// served-user set resampled uniformly from the users no other UAV
/// serves, filling the quota as far as the pool allows; every member must
/// satisfy the QoS floor under the candidate placement.
pub fn propose<R: Rng>(
    j: usize,
    placement: &Placement,
    association: &Association,
    table: &RateTable,
    scenario: &Scenario,
    rng: &mut R,
) -> Proposal {
    let cell = placement.cells[j];
    let mut neighbors = Vec::with_capacity(6);
    for axis in 0..3 {
        for step in [-1isize, 1] {
            if let Some(n) = sampling::axis_neighbor(cell, &scenario.grid, axis, step) {
                let clash = !scenario.allow_collocation
                    && placement
                        .cells
                        .iter()
                        .enumerate()
                        .any(|(k, &c)| k != j && c == n);
                if !clash {
                    neighbors.push(n);
                }
            }
        }
    }
    let mut new_placement = placement.clone();
    if !neighbors.is_empty() {
        new_placement.cells[j] = neighbors[rng.gen_range(0..neighbors.len())];
    }
    let new_table = table.with_moved_uav(j, &new_placement, scenario);

    // users up for grabs: unassociated plus j's own, QoS-feasible at the
    // candidate position
    let pool: Vec<usize> = (0..scenario.n_users())
        .filter(|&i| match association.assignment_of(i) {
            None => true,
            Some(k) => k == j,
        })
        .filter(|&i| new_table.qos_ok(i, j))
        .collect();
    let take = scenario.uavs[j].quota.min(pool.len());
    let chosen = rand::seq::index::sample(rng, pool.len(), take);

    let mut new_assoc = association.clone();
    new_assoc.clear_uav(j);
    for idx in chosen.iter() {
        new_assoc.set(pool[idx], j, true);
    }
    Proposal {
        placement: new_placement,
        association: new_assoc,
        table: new_table,
    }
}

/// Two-point Gibbs acceptance: the candidate wins with probability
/// exp(u_candidate/T) / (exp(u_current/T) + exp(u_candidate/T)), evaluated
/// in the overflow-free form 1 / (1 + exp((u_current - u_candidate)/T)).
pub fn accept<R: Rng>(u_current: f64, u_candidate: f64, temperature: f64, rng: &mut R) -> bool {
    rng.gen::<f64>() < acceptance_probability(u_current, u_candidate, temperature)
}

/// The acceptance probability itself, exposed for calibration tests.
pub fn acceptance_probability(u_current: f64, u_candidate: f64, temperature: f64) -> f64 {
    debug_assert!(temperature > 0.0);
    1.0 / (1.0 + ((u_current - u_candidate) / temperature).exp())
}

fn temperature_at(t: u64, t0: f64, cooling: Cooling) -> f64 {
    match cooling {
        Cooling::Logarithmic => t0 / (1.0 + t as f64).ln(),
        Cooling::Constant => t0,
    }
}

/// Standard deviation of the sum-rate over 100 random feasible states,
/// the default initial temperature.
fn estimate_t0<R: Rng>(scenario: &Scenario, rng: &mut R) -> f64 {
    const WARMUP: usize = 100;
    let mut values = Vec::with_capacity(WARMUP);
    for _ in 0..WARMUP {
        let (placement, assoc) = sampling::random_feasible_state(scenario, rng);
        let table = RateTable::new(&placement, scenario);
        values.push(sum_rate_cached(&assoc, &table));
    }
    let mean = values.iter().sum::<f64>() / WARMUP as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / WARMUP as f64;
    let std = var.sqrt();
    if std > 0.0 {
        std
    } else {
        mean.abs().mul_add(0.1, 1.0)
    }
}

/// Runs BLLL for `max_iters` steps and returns the final state with the
/// full trace. The best-so-far column of the trace is non-decreasing, and
/// replaying with the same config reproduces the trace bit-exactly.
pub fn run(scenario: &Scenario, config: &BlllConfig) -> Result<BlllRun, BlllError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let t0 = match config.t0 {
        Some(t0) => t0,
        None => estimate_t0(scenario, &mut rng),
    };

    let placement = sampling::random_placement(scenario, &mut rng);
    let table = RateTable::new(&placement, scenario);
    let association = Association::empty(scenario.n_users(), scenario.n_uavs());
    let utility_of = |j: usize, assoc: &Association, table: &RateTable| -> f64 {
        match config.neighborhood_range_m {
            Some(range) => marginal_utility_ranged_cached(j, assoc, table, range),
            None => marginal_utility_cached(j, assoc, table),
        }
    };

    let initial_sum = effective_sum_rate(&association, &table);
    let mut state = BlllState {
        best: BestState {
            placement: placement.clone(),
            association: association.clone(),
            sum_rate_bps: initial_sum,
        },
        utilities: (0..scenario.n_uavs())
            .map(|j| utility_of(j, &association, &table))
            .collect(),
        placement,
        association,
        iteration: 0,
    };
    let mut table = table;
    let mut trace = Vec::with_capacity(config.max_iters as usize);
    let mut t: u64 = 0;

    'outer: loop {
        let movers: Vec<usize> = match config.activation {
            Activation::UniformSingle => vec![rng.gen_range(0..scenario.n_uavs())],
            Activation::CoinFlip => (0..scenario.n_uavs())
                .filter(|_| rng.gen::<f64>() > 0.5)
                .collect(),
        };
        for j in movers {
            t += 1;
            let temperature = temperature_at(t, t0, config.cooling);
            let proposal = propose(
                j,
                &state.placement,
                &state.association,
                &table,
                scenario,
                &mut rng,
            );
            let u_current = utility_of(j, &state.association, &table);
            let u_candidate = utility_of(j, &proposal.association, &proposal.table);
            let accepted = accept(u_current, u_candidate, temperature, &mut rng);
            if accepted {
                state.placement = proposal.placement;
                state.association = effective_association(&proposal.association, &proposal.table);
                table = proposal.table;
                for k in 0..scenario.n_uavs() {
                    state.utilities[k] = utility_of(k, &state.association, &table);
                }
            }
            let sum = effective_sum_rate(&state.association, &table);
            if sum > state.best.sum_rate_bps {
                state.best = BestState {
                    placement: state.placement.clone(),
                    association: state.association.clone(),
                    sum_rate_bps: sum,
                };
            }
            state.iteration = t;
            trace.push(TraceRecord {
                iter: t,
                temperature: Some(temperature),
                mover: Some(j),
                accepted: Some(accepted),
                sum_rate_bps: sum,
                best_sum_rate_bps: state.best.sum_rate_bps,
            });
            if t >= config.max_iters {
                break 'outer;
            }
        }
    }
    Ok(BlllRun { state, trace, t0 })
}
