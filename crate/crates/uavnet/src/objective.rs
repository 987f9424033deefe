//! Sum-rate objective, the per-UAV marginal-contribution utility, its
//! neighborhood-range-limited variant, and the potential-game identity
//! checker.
//!
//! QoS policy: during utility evaluation an associated link below the QoS
//! floor is treated as disconnected — it contributes zero rate and does not
//! consume quota. The exclusion term's QoS filter is evaluated in the same
//! interference world as the rates it sums, which keeps the potential
//! identity exact.

use thiserror::Error;

use crate::model::{
    Association, GridPoint, Infeasibility, ModelError, Placement, QosMetric, Scenario,
};

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("infeasible input: {0}")]
    Infeasible(#[from] Infeasibility),
    #[error("deviation is not unilateral for UAV {uav}: {detail}")]
    NonUnilateralDeviation { uav: usize, detail: String },
}

/// Per-placement link-budget cache: received powers, their per-user totals,
/// and the derived rate/spectral-efficiency matrices under full
/// interference. Exclusion variants R_ik(-j) are O(1) from the totals.
#[derive(Debug, Clone)]
pub struct RateTable {
    n_users: usize,
    n_uavs: usize,
    /// Received power (W) at user i from UAV j, row-major I x J.
    power_w: Vec<f64>,
    /// Per-user sum of received powers over all UAVs.
    total_w: Vec<f64>,
    /// R_ij under full interference, row-major I x J.
    rate_bps: Vec<f64>,
    /// Spectral efficiency eta_ij under full interference.
    eta: Vec<f64>,
    /// UAV positions for the cached placement.
    positions: Vec<GridPoint>,
    noise_w: f64,
    eta_min_linear: f64,
    qos_metric: QosMetric,
    bandwidth_hz: Vec<f64>,
}

impl RateTable {
    pub fn new(placement: &Placement, scenario: &Scenario) -> Self {
        let n_users = scenario.n_users();
        let n_uavs = scenario.n_uavs();
        let mut power_w = vec![0.0; n_users * n_uavs];
        for i in 0..n_users {
            for j in 0..n_uavs {
                power_w[i * n_uavs + j] =
                    crate::channel::received_power_w(i, j, placement, scenario)
                        .expect("validated scenarios have positive UAV-user distances");
            }
        }
        let mut table = Self {
            n_users,
            n_uavs,
            power_w,
            total_w: vec![0.0; n_users],
            rate_bps: vec![0.0; n_users * n_uavs],
            eta: vec![0.0; n_users * n_uavs],
            positions: (0..n_uavs)
                .map(|j| placement.point(j, &scenario.grid))
                .collect(),
            noise_w: scenario.channel.noise_w(),
            eta_min_linear: scenario.eta_min_linear(),
            qos_metric: scenario.qos_metric,
            bandwidth_hz: scenario.uavs.iter().map(|u| u.bandwidth_hz).collect(),
        };
        table.refresh_derived();
        table
    }

    /// Cache for a placement differing only in UAV `j`'s position. Only
    /// column `j` of the power matrix is recomputed; derived values are
    /// rebuilt with the same summation order as `new`, so the result is
    /// bit-identical to a fresh table.
    pub fn with_moved_uav(&self, j: usize, placement: &Placement, scenario: &Scenario) -> Self {
        let mut table = self.clone();
        for i in 0..self.n_users {
            table.power_w[i * self.n_uavs + j] =
                crate::channel::received_power_w(i, j, placement, scenario)
                    .expect("validated scenarios have positive UAV-user distances");
        }
        table.positions[j] = placement.point(j, &scenario.grid);
        table.refresh_derived();
        table
    }

    fn refresh_derived(&mut self) {
        for i in 0..self.n_users {
            let row = &self.power_w[i * self.n_uavs..(i + 1) * self.n_uavs];
            self.total_w[i] = row.iter().sum();
        }
        for i in 0..self.n_users {
            for j in 0..self.n_uavs {
                let idx = i * self.n_uavs + j;
                let p = self.power_w[idx];
                let gamma = p / (self.noise_w + self.total_w[i] - p);
                let eta = (1.0 + gamma).log2();
                self.eta[idx] = eta;
                self.rate_bps[idx] = self.bandwidth_hz[j] * eta;
            }
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_uavs(&self) -> usize {
        self.n_uavs
    }

    pub fn position(&self, j: usize) -> GridPoint {
        self.positions[j]
    }

    /// Received power (W) of link (i, j).
    pub fn power_w(&self, i: usize, j: usize) -> f64 {
        self.power_w[i * self.n_uavs + j]
    }

    pub fn noise_w(&self) -> f64 {
        self.noise_w
    }

    /// R_ij (bit/s) under full interference.
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rate_bps[i * self.n_uavs + j]
    }

    /// eta_ij (bit/s/Hz) under full interference.
    pub fn eta(&self, i: usize, j: usize) -> f64 {
        self.eta[i * self.n_uavs + j]
    }

    /// Linear SINR of link (i, j) under full interference.
    pub fn sinr(&self, i: usize, j: usize) -> f64 {
        let p = self.power_w[i * self.n_uavs + j];
        p / (self.noise_w + self.total_w[i] - p)
    }

    fn link_excluding(&self, i: usize, k: usize, j: usize) -> (f64, f64) {
        debug_assert_ne!(k, j);
        let pk = self.power_w[i * self.n_uavs + k];
        let pj = self.power_w[i * self.n_uavs + j];
        let gamma = pk / (self.noise_w + self.total_w[i] - pk - pj);
        (gamma, (1.0 + gamma).log2())
    }

    /// R_ik(-j): rate of link (i, k) when UAV j's interference is removed.
    pub fn rate_excluding(&self, i: usize, k: usize, j: usize) -> f64 {
        if k == j {
            return self.rate(i, k);
        }
        let (_, eta) = self.link_excluding(i, k, j);
        self.bandwidth_hz[k] * eta
    }

    /// Rate of link (i, k) with interference restricted to the UAVs in
    /// `interferers` (which must not contain k).
    pub fn rate_with_interferers(&self, i: usize, k: usize, interferers: &[usize]) -> f64 {
        let pk = self.power_w[i * self.n_uavs + k];
        let mut denom = self.noise_w;
        for &l in interferers {
            debug_assert_ne!(l, k);
            denom += self.power_w[i * self.n_uavs + l];
        }
        let gamma = pk / denom;
        self.bandwidth_hz[k] * (1.0 + gamma).log2()
    }

    fn qos_value_ok(&self, gamma: f64, eta: f64) -> bool {
        match self.qos_metric {
            QosMetric::SpectralEfficiency => eta >= self.eta_min_linear,
            QosMetric::Sinr => gamma >= self.eta_min_linear,
        }
    }

    /// QoS floor check for link (i, j) under full interference.
    pub fn qos_ok(&self, i: usize, j: usize) -> bool {
        self.qos_value_ok(self.sinr(i, j), self.eta(i, j))
    }

    /// QoS floor check for link (i, k) in the world where UAV j is removed.
    pub fn qos_ok_excluding(&self, i: usize, k: usize, j: usize) -> bool {
        if k == j {
            return self.qos_ok(i, k);
        }
        let (gamma, eta) = self.link_excluding(i, k, j);
        self.qos_value_ok(gamma, eta)
    }

    fn qos_ok_with_interferers(&self, i: usize, k: usize, interferers: &[usize]) -> bool {
        let pk = self.power_w[i * self.n_uavs + k];
        let mut denom = self.noise_w;
        for &l in interferers {
            denom += self.power_w[i * self.n_uavs + l];
        }
        let gamma = pk / denom;
        self.qos_value_ok(gamma, (1.0 + gamma).log2())
    }
}

/// Structural feasibility used by utility evaluation: dimensions, per-user
/// row sums, per-UAV quotas. QoS is handled by the drop policy instead.
fn check_structural(assoc: &Association, scenario: &Scenario) -> Result<(), ObjectiveError> {
    if assoc.n_users() != scenario.n_users() || assoc.n_uavs() != scenario.n_uavs() {
        return Err(ModelError::DimensionMismatch {
            rows: assoc.n_users(),
            cols: assoc.n_uavs(),
            users: scenario.n_users(),
            uavs: scenario.n_uavs(),
        }
        .into());
    }
    for i in 0..assoc.n_users() {
        if assoc.row_sum(i) > 1 {
            return Err(Infeasibility::MultipleAssociations { user: i }.into());
        }
    }
    for j in 0..assoc.n_uavs() {
        let served = assoc.served_count(j);
        if served > scenario.uavs[j].quota {
            return Err(Infeasibility::QuotaExceeded {
                uav: j,
                served,
                quota: scenario.uavs[j].quota,
            }
            .into());
        }
    }
    Ok(())
}

/// Downlink sum-rate of a feasible state; errors name the violated
/// constraint when the input is infeasible.
pub fn sum_rate(
    assoc: &Association,
    placement: &Placement,
    scenario: &Scenario,
) -> Result<f64, ObjectiveError> {
    crate::model::check_feasible(assoc, placement, scenario)??;
    let table = RateTable::new(placement, scenario);
    Ok(sum_rate_cached(assoc, &table))
}

/// Raw sum over associated pairs, no feasibility check and no QoS drop.
pub fn sum_rate_unchecked(assoc: &Association, placement: &Placement, scenario: &Scenario) -> f64 {
    sum_rate_cached(assoc, &RateTable::new(placement, scenario))
}

/// Raw sum over associated pairs from a cached table.
pub fn sum_rate_cached(assoc: &Association, table: &RateTable) -> f64 {
    let mut total = 0.0;
    for (i, j) in assoc.pairs() {
        total += table.rate(i, j);
    }
    total
}

/// The association with every below-QoS link dropped.
pub fn effective_association(assoc: &Association, table: &RateTable) -> Association {
    let mut out = assoc.clone();
    for (i, j) in assoc.pairs() {
        if !table.qos_ok(i, j) {
            out.set(i, j, false);
        }
    }
    out
}

/// Sum-rate under the QoS drop policy: below-floor links contribute zero.
pub fn effective_sum_rate(assoc: &Association, table: &RateTable) -> f64 {
    let mut total = 0.0;
    for (i, j) in assoc.pairs() {
        if table.qos_ok(i, j) {
            total += table.rate(i, j);
        }
    }
    total
}

/// Marginal-contribution ("wonderful life") utility of UAV `j`:
/// the QoS-dropped sum-rate minus the sum-rate of the network with UAV j
/// removed (its users gone and its interference excluded).
pub fn marginal_utility(
    j: usize,
    assoc: &Association,
    placement: &Placement,
    scenario: &Scenario,
) -> Result<f64, ObjectiveError> {
    check_structural(assoc, scenario)?;
    scenario.check_placement(placement)?;
    let table = RateTable::new(placement, scenario);
    Ok(marginal_utility_cached(j, assoc, &table))
}

/// Cached-table variant; the caller guarantees structural feasibility.
pub fn marginal_utility_cached(j: usize, assoc: &Association, table: &RateTable) -> f64 {
    let mut utility = effective_sum_rate(assoc, table);
    for (i, k) in assoc.pairs() {
        if k != j && table.qos_ok_excluding(i, k, j) {
            utility -= table.rate_excluding(i, k, j);
        }
    }
    utility
}

/// Range-limited utility: both sums are restricted to the UAVs within 3D
/// distance `range_m` of UAV j (j included), and the exclusion rates count
/// interference from that neighbor set only. With the full neighbor set it
/// delegates to `marginal_utility_cached` and matches it bit for bit.
pub fn marginal_utility_ranged(
    j: usize,
    assoc: &Association,
    placement: &Placement,
    scenario: &Scenario,
    range_m: f64,
) -> Result<f64, ObjectiveError> {
    check_structural(assoc, scenario)?;
    scenario.check_placement(placement)?;
    let table = RateTable::new(placement, scenario);
    Ok(marginal_utility_ranged_cached(j, assoc, &table, range_m))
}

/// Cached-table variant of the range-limited utility.
pub fn marginal_utility_ranged_cached(
    j: usize,
    assoc: &Association,
    table: &RateTable,
    range_m: f64,
) -> f64 {
    let pos_j = table.position(j);
    let neighbors: Vec<usize> = (0..table.n_uavs())
        .filter(|&k| table.position(k).distance_to(&pos_j) <= range_m)
        .collect();
    if neighbors.len() == table.n_uavs() {
        return marginal_utility_cached(j, assoc, table);
    }

    let in_range = |k: usize| neighbors.binary_search(&k).is_ok();
    let mut utility = 0.0;
    for (i, k) in assoc.pairs() {
        if in_range(k) && table.qos_ok(i, k) {
            utility += table.rate(i, k);
        }
    }
    for &k in &neighbors {
        if k == j {
            continue;
        }
        let interferers: Vec<usize> = neighbors
            .iter()
            .copied()
            .filter(|&l| l != k && l != j)
            .collect();
        for i in assoc.served_by(k) {
            if table.qos_ok_with_interferers(i, k, &interferers) {
                utility -= table.rate_with_interferers(i, k, &interferers);
            }
        }
    }
    utility
}

/// Absolute residual |[F(a) - F(a')] - [U_j(a) - U_j(a')]| of the potential
/// identity for a unilateral deviation of UAV `j`. The contract is that the
/// residual stays within 1e-9 relative to max(|F(a)|, |F(a')|, 1).
pub fn potential_identity(
    j: usize,
    a: (&Placement, &Association),
    a_prime: (&Placement, &Association),
    scenario: &Scenario,
) -> Result<f64, ObjectiveError> {
    let (placement, assoc) = a;
    let (placement_p, assoc_p) = a_prime;
    check_structural(assoc, scenario)?;
    check_structural(assoc_p, scenario)?;
    scenario.check_placement(placement)?;
    scenario.check_placement(placement_p)?;

    for k in 0..scenario.n_uavs() {
        if k != j && placement.cells[k] != placement_p.cells[k] {
            return Err(ObjectiveError::NonUnilateralDeviation {
                uav: j,
                detail: format!("UAV {k} also moved"),
            });
        }
    }
    for i in 0..scenario.n_users() {
        for k in 0..scenario.n_uavs() {
            if k != j && assoc.get(i, k) != assoc_p.get(i, k) {
                return Err(ObjectiveError::NonUnilateralDeviation {
                    uav: j,
                    detail: format!("association of user {i} with UAV {k} also changed"),
                });
            }
        }
    }

    let table = RateTable::new(placement, scenario);
    let table_p = RateTable::new(placement_p, scenario);
    let f = effective_sum_rate(assoc, &table);
    let f_p = effective_sum_rate(assoc_p, &table_p);
    let u = marginal_utility_cached(j, assoc, &table);
    let u_p = marginal_utility_cached(j, assoc_p, &table_p);
    Ok(((f - f_p) - (u - u_p)).abs())
}
