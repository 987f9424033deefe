//! Problem-instance types: users, UAV fleet, 3D search grid, placements,
//! associations, and the feasibility predicates that tie them together.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while constructing or validating instance data.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("association is {rows}x{cols}, scenario is {users} users x {uavs} UAVs")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        users: usize,
        uavs: usize,
    },
    #[error("placement has {positions} positions for {uavs} UAVs")]
    PlacementSizeMismatch { positions: usize, uavs: usize },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("point ({x}, {y}, {h}) is not on the grid")]
    OffGrid { x: f64, y: f64, h: f64 },
}

/// A violated constraint, named so checked evaluation can report which one.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Infeasibility {
    #[error("user {user} is associated with more than one UAV")]
    MultipleAssociations { user: usize },
    #[error("UAV {uav} serves {served} users, quota is {quota}")]
    QuotaExceeded {
        uav: usize,
        served: usize,
        quota: usize,
    },
    #[error("link user {user} -> UAV {uav} is below the QoS floor")]
    QosViolated { user: usize, uav: usize },
    #[error("UAVs {a} and {b} are collocated on one grid point")]
    Collocated { a: usize, b: usize },
}

/// Which quantity the QoS floor applies to. The floor is given in dB; the
/// linear value is compared against spectral efficiency by default, or
/// against the SINR under the alternative reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QosMetric {
    #[default]
    SpectralEfficiency,
    Sinr,
}

/// Form of the LoS-probability expression. `Standard` is the
/// elevation-angle sigmoid 1/(1+eps*exp(-beta*(theta-eps))); `AsPrinted`
/// keeps the sign structure 1/(1+eps*exp(-beta*theta-eps)), which is
/// near 1 at grazing angles and retained only for fidelity studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LosFormula {
    #[default]
    Standard,
    AsPrinted,
}

fn default_alpha() -> f64 {
    2.0
}
fn default_carrier() -> f64 {
    2.0e9
}
fn default_light_speed() -> f64 {
    3.0e8
}
fn default_noise_dbm() -> f64 {
    -104.0
}

/// Environment and radio constants for the air-to-ground channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelParams {
    /// LoS environment parameter (urban default 9.61).
    pub epsilon: f64,
    /// Per-degree LoS slope (urban default 0.16).
    pub beta: f64,
    /// Path-loss exponent.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Excess LoS loss in dB.
    pub zeta_los_db: f64,
    /// Excess NLoS loss in dB.
    pub zeta_nlos_db: f64,
    /// Carrier frequency in Hz.
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    /// Propagation speed in m/s.
    #[serde(default = "default_light_speed")]
    pub light_speed: f64,
    /// Noise power sigma^2 in dBm. Defaults to -104 dBm (thermal noise
    /// over 1 MHz plus a 10 dB noise figure).
    #[serde(default = "default_noise_dbm")]
    pub noise_dbm: f64,
    #[serde(default)]
    pub los_formula: LosFormula,
}

impl ChannelParams {
    /// Urban parameter set: eps=9.61, beta=0.16, alpha=2, zeta 1/20 dB,
    /// f=2 GHz, c=3e8, noise -104 dBm.
    pub fn urban() -> Self {
        Self {
            epsilon: 9.61,
            beta: 0.16,
            alpha: 2.0,
            zeta_los_db: 1.0,
            zeta_nlos_db: 20.0,
            carrier_hz: 2.0e9,
            light_speed: 3.0e8,
            noise_dbm: -104.0,
            los_formula: LosFormula::Standard,
        }
    }

    /// Noise power in watts.
    pub fn noise_w(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidScenario(msg));
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !(self.beta > 0.0) {
            return bad(format!("beta must be > 0, got {}", self.beta));
        }
        if !(self.alpha >= 2.0) {
            return bad(format!("alpha must be >= 2, got {}", self.alpha));
        }
        if self.zeta_nlos_db < self.zeta_los_db {
            return bad(format!(
                "zeta_nlos_db {} < zeta_los_db {}",
                self.zeta_nlos_db, self.zeta_los_db
            ));
        }
        if !(self.carrier_hz > 0.0) {
            return bad(format!("carrier_hz must be > 0, got {}", self.carrier_hz));
        }
        if !(self.light_speed > 0.0) {
            return bad(format!("light_speed must be > 0, got {}", self.light_speed));
        }
        if !self.noise_dbm.is_finite() {
            return bad(format!("noise_dbm must be finite, got {}", self.noise_dbm));
        }
        Ok(())
    }
}

/// Convert a dBm figure to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Convert a dB figure to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// A ground user at a fixed 2D position (meters).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct User {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

fn default_bandwidth() -> f64 {
    1.0e6
}

/// One UAV of the fleet.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Uav {
    pub id: usize,
    /// Transmit power in dBm.
    pub power_dbm: f64,
    /// Maximum number of served users (backhaul quota N_j).
    pub quota: usize,
    /// Per-user bandwidth b_j in Hz. Defaults to 1 MHz.
    #[serde(default = "default_bandwidth")]
    pub bandwidth_hz: f64,
}

impl Uav {
    /// Transmit power in watts.
    pub fn power_w(&self) -> f64 {
        dbm_to_watts(self.power_dbm)
    }
}

/// Discretized 3D search box. Points are min + i*step per axis, all inside
/// the closed box.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Grid3D {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub dy: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub dh: f64,
}

fn axis_len(min: f64, max: f64, step: f64) -> usize {
    ((max - min) / step + 1e-9).floor() as usize + 1
}

impl Grid3D {
    pub fn nx(&self) -> usize {
        axis_len(self.x_min, self.x_max, self.dx)
    }
    pub fn ny(&self) -> usize {
        axis_len(self.y_min, self.y_max, self.dy)
    }
    pub fn nh(&self) -> usize {
        axis_len(self.h_min, self.h_max, self.dh)
    }

    /// Total number of grid points L.
    pub fn num_points(&self) -> usize {
        self.nx() * self.ny() * self.nh()
    }

    pub fn x_at(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.dx
    }
    pub fn y_at(&self, iy: usize) -> f64 {
        self.y_min + iy as f64 * self.dy
    }
    pub fn h_at(&self, ih: usize) -> f64 {
        self.h_min + ih as f64 * self.dh
    }

    /// Coordinates of a cell.
    pub fn point(&self, cell: GridCell) -> GridPoint {
        GridPoint {
            x: self.x_at(cell.ix),
            y: self.y_at(cell.iy),
            h: self.h_at(cell.ih),
        }
    }

    /// Flat index of a cell in enumeration order (x slowest, h fastest).
    pub fn flat_index(&self, cell: GridCell) -> usize {
        (cell.ix * self.ny() + cell.iy) * self.nh() + cell.ih
    }

    /// Cell at a flat enumeration index.
    pub fn cell_at(&self, flat: usize) -> GridCell {
        let nh = self.nh();
        let ny = self.ny();
        GridCell {
            ix: flat / (ny * nh),
            iy: (flat / nh) % ny,
            ih: flat % nh,
        }
    }

    /// Nearest cell to arbitrary coordinates (per-axis nearest, ties to
    /// the lower index).
    pub fn snap(&self, x: f64, y: f64, h: f64) -> GridCell {
        GridCell {
            ix: snap_axis(x, self.x_min, self.dx, self.nx()),
            iy: snap_axis(y, self.y_min, self.dy, self.ny()),
            ih: snap_axis(h, self.h_min, self.dh, self.nh()),
        }
    }

    /// Cell whose coordinates match (x, y, h) exactly (within 1e-6 m), or
    /// an `OffGrid` error.
    pub fn cell_of(&self, x: f64, y: f64, h: f64) -> Result<GridCell, ModelError> {
        let cell = self.snap(x, y, h);
        let p = self.point(cell);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-6;
        if close(p.x, x) && close(p.y, y) && close(p.h, h) {
            Ok(cell)
        } else {
            Err(ModelError::OffGrid { x, y, h })
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidScenario(msg));
        for (name, min, max, step) in [
            ("x", self.x_min, self.x_max, self.dx),
            ("y", self.y_min, self.y_max, self.dy),
            ("h", self.h_min, self.h_max, self.dh),
        ] {
            if max < min {
                return bad(format!("{name}_max {max} < {name}_min {min}"));
            }
            if !(step > 0.0) {
                return bad(format!("d{name} must be > 0, got {step}"));
            }
        }
        if !(self.h_min > 0.0) {
            return bad(format!("h_min must be > 0, got {}", self.h_min));
        }
        Ok(())
    }
}

fn snap_axis(v: f64, min: f64, step: f64, n: usize) -> usize {
    let i = ((v - min) / step).round();
    (i.max(0.0) as usize).min(n - 1)
}

/// One grid point by per-axis indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCell {
    pub ix: usize,
    pub iy: usize,
    pub ih: usize,
}

/// One grid point by coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl GridPoint {
    pub fn distance_to(&self, other: &GridPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dh = self.h - other.h;
        (dx * dx + dy * dy + dh * dh).sqrt()
    }
}

/// All grid points in enumeration order: x varies slowest, then y, then h.
pub fn enumerate_grid(grid: &Grid3D) -> Vec<GridPoint> {
    let mut points = Vec::with_capacity(grid.num_points());
    for ix in 0..grid.nx() {
        for iy in 0..grid.ny() {
            for ih in 0..grid.nh() {
                points.push(grid.point(GridCell { ix, iy, ih }));
            }
        }
    }
    points
}

/// The 3D grid position of every UAV (a "configuration").
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub cells: Vec<GridCell>,
}

impl Placement {
    pub fn new(cells: Vec<GridCell>) -> Self {
        Self { cells }
    }

    pub fn n_uavs(&self) -> usize {
        self.cells.len()
    }

    /// Coordinates of UAV `j`.
    pub fn point(&self, j: usize, grid: &Grid3D) -> GridPoint {
        grid.point(self.cells[j])
    }

    /// Index pair of any two UAVs sharing a cell.
    pub fn collocated_pair(&self) -> Option<(usize, usize)> {
        for a in 0..self.cells.len() {
            for b in (a + 1)..self.cells.len() {
                if self.cells[a] == self.cells[b] {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Builds a placement from coordinate triples, requiring each to be an
    /// exact grid point.
    pub fn from_coords(coords: &[[f64; 3]], grid: &Grid3D) -> Result<Self, ModelError> {
        let cells = coords
            .iter()
            .map(|c| grid.cell_of(c[0], c[1], c[2]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { cells })
    }

    /// Coordinate triples of every UAV, for serialization.
    pub fn to_coords(&self, grid: &Grid3D) -> Vec<[f64; 3]> {
        self.cells
            .iter()
            .map(|&c| {
                let p = grid.point(c);
                [p.x, p.y, p.h]
            })
            .collect()
    }
}

/// Binary user-UAV association matrix q (I rows, J columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Association {
    n_users: usize,
    n_uavs: usize,
    bits: Vec<bool>,
}

impl Association {
    pub fn empty(n_users: usize, n_uavs: usize) -> Self {
        Self {
            n_users,
            n_uavs,
            bits: vec![false; n_users * n_uavs],
        }
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_uavs(&self) -> usize {
        self.n_uavs
    }

    pub fn get(&self, user: usize, uav: usize) -> bool {
        self.bits[user * self.n_uavs + uav]
    }

    pub fn set(&mut self, user: usize, uav: usize, value: bool) {
        self.bits[user * self.n_uavs + uav] = value;
    }

    /// Number of UAVs user `i` is associated with (feasible rows have 0 or 1).
    pub fn row_sum(&self, user: usize) -> usize {
        (0..self.n_uavs).filter(|&j| self.get(user, j)).count()
    }

    /// Number of users served by UAV `j`.
    pub fn served_count(&self, uav: usize) -> usize {
        (0..self.n_users).filter(|&i| self.get(i, uav)).count()
    }

    /// Users served by UAV `j`, ascending.
    pub fn served_by(&self, uav: usize) -> Vec<usize> {
        (0..self.n_users).filter(|&i| self.get(i, uav)).collect()
    }

    /// First UAV user `i` is associated with, if any.
    pub fn assignment_of(&self, user: usize) -> Option<usize> {
        (0..self.n_uavs).find(|&j| self.get(user, j))
    }

    /// All associated (user, uav) pairs in row-major order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n_users {
            for j in 0..self.n_uavs {
                if self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Clears UAV `j`'s column.
    pub fn clear_uav(&mut self, uav: usize) {
        for i in 0..self.n_users {
            self.set(i, uav, false);
        }
    }

    /// True if `self` contains every association of `other` entrywise.
    pub fn contains(&self, other: &Association) -> bool {
        self.n_users == other.n_users
            && self.n_uavs == other.n_uavs
            && self
                .bits
                .iter()
                .zip(other.bits.iter())
                .all(|(a, b)| *a || !*b)
    }

    /// Row-major lexicographic comparison of the bit matrices.
    pub fn lex_cmp(&self, other: &Association) -> std::cmp::Ordering {
        self.bits.cmp(&other.bits)
    }

    /// The matrix as rows of 0/1 for serialization.
    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.n_users)
            .map(|i| (0..self.n_uavs).map(|j| u8::from(self.get(i, j))).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, ModelError> {
        let n_users = rows.len();
        let n_uavs = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n_uavs) {
            return Err(ModelError::InvalidScenario(
                "association rows have unequal lengths".into(),
            ));
        }
        let mut assoc = Association::empty(n_users, n_uavs);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assoc.set(i, j, v != 0);
            }
        }
        Ok(assoc)
    }
}

impl Serialize for Association {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Association {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<u8>>::deserialize(deserializer)?;
        Association::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Immutable problem instance. dB quantities carry a `_db`/`_dbm` suffix in
/// JSON keys; meters are unsuffixed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub users: Vec<User>,
    pub uavs: Vec<Uav>,
    pub grid: Grid3D,
    pub channel: ChannelParams,
    /// QoS floor in dB; the linear form 10^(dB/10) is compared against the
    /// quantity selected by `qos_metric`.
    pub eta_min_db: f64,
    #[serde(default)]
    pub qos_metric: QosMetric,
    #[serde(default)]
    pub allow_collocation: bool,
    pub rng_seed: u64,
}

impl Scenario {
    pub fn new(
        users: Vec<User>,
        uavs: Vec<Uav>,
        grid: Grid3D,
        channel: ChannelParams,
        eta_min_db: f64,
        rng_seed: u64,
    ) -> Self {
        Self {
            users,
            uavs,
            grid,
            channel,
            eta_min_db,
            qos_metric: QosMetric::default(),
            allow_collocation: false,
            rng_seed,
        }
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_uavs(&self) -> usize {
        self.uavs.len()
    }

    /// QoS floor as a linear quantity (bit/s/Hz under the default metric).
    pub fn eta_min_linear(&self) -> f64 {
        db_to_linear(self.eta_min_db)
    }

    /// QoS floor check on a (SINR, spectral efficiency) pair, honoring the
    /// configured metric.
    pub fn qos_value_ok(&self, gamma: f64, eta: f64) -> bool {
        match self.qos_metric {
            QosMetric::SpectralEfficiency => eta >= self.eta_min_linear(),
            QosMetric::Sinr => gamma >= self.eta_min_linear(),
        }
    }

    /// Diagonal of the 3D search box, the reference length for
    /// neighborhood-range fractions.
    pub fn box_diagonal(&self) -> f64 {
        let dx = self.grid.x_max - self.grid.x_min;
        let dy = self.grid.y_max - self.grid.y_min;
        let dh = self.grid.h_max - self.grid.h_min;
        (dx * dx + dy * dy + dh * dh).sqrt()
    }

    /// Parses and validates a scenario from JSON text.
    pub fn from_json(text: &str) -> Result<Self, ScenarioLoadError> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(ScenarioLoadError::Malformed)?;
        scenario.validate().map_err(ScenarioLoadError::Invalid)?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidScenario(msg));
        if self.users.is_empty() {
            return bad("scenario needs at least one user".into());
        }
        if self.uavs.is_empty() {
            return bad("scenario needs at least one UAV".into());
        }
        self.grid.validate()?;
        self.channel.validate()?;
        if !self.eta_min_db.is_finite() {
            return bad(format!(
                "eta_min_db must be finite, got {}",
                self.eta_min_db
            ));
        }
        for (i, u) in self.users.iter().enumerate() {
            if u.id != i {
                return bad(format!(
                    "user ids must be 0..n in order, got {} at {i}",
                    u.id
                ));
            }
            if u.x < self.grid.x_min
                || u.x > self.grid.x_max
                || u.y < self.grid.y_min
                || u.y > self.grid.y_max
            {
                return bad(format!(
                    "user {} at ({}, {}) lies outside the area",
                    u.id, u.x, u.y
                ));
            }
        }
        for (j, v) in self.uavs.iter().enumerate() {
            if v.id != j {
                return bad(format!(
                    "UAV ids must be 0..n in order, got {} at {j}",
                    v.id
                ));
            }
            if !(v.bandwidth_hz > 0.0) {
                return bad(format!("UAV {} bandwidth must be > 0", v.id));
            }
        }
        if !self.allow_collocation && self.n_uavs() > self.grid.num_points() {
            return bad(format!(
                "{} UAVs cannot occupy {} grid points pairwise-distinctly",
                self.n_uavs(),
                self.grid.num_points()
            ));
        }
        Ok(())
    }

    /// Structural placement check: one position per UAV, collocation rule.
    pub fn check_placement(&self, placement: &Placement) -> Result<(), ModelError> {
        if placement.n_uavs() != self.n_uavs() {
            return Err(ModelError::PlacementSizeMismatch {
                positions: placement.n_uavs(),
                uavs: self.n_uavs(),
            });
        }
        for &cell in &placement.cells {
            if cell.ix >= self.grid.nx() || cell.iy >= self.grid.ny() || cell.ih >= self.grid.nh() {
                let p = self.grid.point(cell);
                return Err(ModelError::OffGrid {
                    x: p.x,
                    y: p.y,
                    h: p.h,
                });
            }
        }
        Ok(())
    }
}

/// Errors from scenario ingestion, split so the CLI can map them to
/// distinct exit codes.
#[derive(Debug, Error)]
pub enum ScenarioLoadError {
    #[error("malformed scenario: {0}")]
    Malformed(#[source] serde_json::Error),
    #[error("infeasible scenario: {0}")]
    Invalid(#[source] ModelError),
}

/// Full feasibility check of (association, placement) against constraints:
/// per-user row sums <= 1, per-UAV quotas, QoS floor on every associated
/// link, and the placement/collocation rules.
///
/// Returns the first violated constraint, scanning users then UAVs then
/// links in index order.
pub fn check_feasible(
    assoc: &Association,
    placement: &Placement,
    scenario: &Scenario,
) -> Result<Result<(), Infeasibility>, ModelError> {
    if assoc.n_users() != scenario.n_users() || assoc.n_uavs() != scenario.n_uavs() {
        return Err(ModelError::DimensionMismatch {
            rows: assoc.n_users(),
            cols: assoc.n_uavs(),
            users: scenario.n_users(),
            uavs: scenario.n_uavs(),
        });
    }
    scenario.check_placement(placement)?;

    if !scenario.allow_collocation {
        if let Some((a, b)) = placement.collocated_pair() {
            return Ok(Err(Infeasibility::Collocated { a, b }));
        }
    }
    for i in 0..assoc.n_users() {
        if assoc.row_sum(i) > 1 {
            return Ok(Err(Infeasibility::MultipleAssociations { user: i }));
        }
    }
    for j in 0..assoc.n_uavs() {
        let served = assoc.served_count(j);
        if served > scenario.uavs[j].quota {
            return Ok(Err(Infeasibility::QuotaExceeded {
                uav: j,
                served,
                quota: scenario.uavs[j].quota,
            }));
        }
    }
    let table = crate::objective::RateTable::new(placement, scenario);
    for (i, j) in assoc.pairs() {
        if !table.qos_ok(i, j) {
            return Ok(Err(Infeasibility::QosViolated { user: i, uav: j }));
        }
    }
    Ok(Ok(()))
}

/// True iff every constraint holds. Errors only on instance mismatches.
pub fn feasible(
    assoc: &Association,
    placement: &Placement,
    scenario: &Scenario,
) -> Result<bool, ModelError> {
    Ok(check_feasible(assoc, placement, scenario)?.is_ok())
}
