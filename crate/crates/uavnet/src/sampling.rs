//! Seeded generators for placements, feasible associations, unilateral
//! deviations, and small random instances. Used by the BLLL warm-up, the
//! validation suite, and the test harness.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{Association, ChannelParams, Grid3D, GridCell, Placement, Scenario, Uav, User};
use crate::objective::RateTable;

/// The placement occupying the first J cells in grid enumeration order.
pub fn lowest_distinct_placement(scenario: &Scenario) -> Placement {
    let cells = (0..scenario.n_uavs())
        .map(|j| scenario.grid.cell_at(j))
        .collect();
    Placement::new(cells)
}

/// Uniform random placement; cells are pairwise distinct unless the
/// scenario allows collocation.
pub fn random_placement<R: Rng>(scenario: &Scenario, rng: &mut R) -> Placement {
    let total = scenario.grid.num_points();
    let mut taken: Vec<usize> = Vec::with_capacity(scenario.n_uavs());
    for _ in 0..scenario.n_uavs() {
        loop {
            let flat = rng.gen_range(0..total);
            if scenario.allow_collocation || !taken.contains(&flat) {
                taken.push(flat);
                break;
            }
        }
    }
    Placement::new(
        taken
            .into_iter()
            .map(|f| scenario.grid.cell_at(f))
            .collect(),
    )
}

/// Random feasible association for a fixed placement: users in random
/// order each pick uniformly among "stay unassigned" and the UAVs that
/// still have quota and meet the QoS floor.
pub fn random_feasible_association<R: Rng>(
    table: &RateTable,
    scenario: &Scenario,
    rng: &mut R,
) -> Association {
    let mut assoc = Association::empty(scenario.n_users(), scenario.n_uavs());
    let mut load = vec![0usize; scenario.n_uavs()];
    let mut order: Vec<usize> = (0..scenario.n_users()).collect();
    order.shuffle(rng);
    for i in order {
        let candidates: Vec<usize> = (0..scenario.n_uavs())
            .filter(|&j| load[j] < scenario.uavs[j].quota && table.qos_ok(i, j))
            .collect();
        let pick = rng.gen_range(0..=candidates.len());
        if pick < candidates.len() {
            assoc.set(i, candidates[pick], true);
            load[candidates[pick]] += 1;
        }
    }
    assoc
}

/// Random feasible (placement, association) pair.
pub fn random_feasible_state<R: Rng>(scenario: &Scenario, rng: &mut R) -> (Placement, Association) {
    let placement = random_placement(scenario, rng);
    let table = RateTable::new(&placement, scenario);
    let assoc = random_feasible_association(&table, scenario, rng);
    (placement, assoc)
}

/// Random unilateral deviation: one UAV gets a fresh position and a fresh
/// own-column (drawn from users no other UAV serves, within quota). The
/// QoS floor is deliberately not enforced here; evaluation applies the
/// drop policy.
pub fn random_unilateral_deviation<R: Rng>(
    placement: &Placement,
    assoc: &Association,
    scenario: &Scenario,
    rng: &mut R,
) -> (usize, Placement, Association) {
    let j = rng.gen_range(0..scenario.n_uavs());
    let mut new_placement = placement.clone();
    let total = scenario.grid.num_points();
    loop {
        let flat = rng.gen_range(0..total);
        let cell = scenario.grid.cell_at(flat);
        let clash = !scenario.allow_collocation
            && new_placement
                .cells
                .iter()
                .enumerate()
                .any(|(k, &c)| k != j && c == cell);
        if !clash {
            new_placement.cells[j] = cell;
            break;
        }
    }
    let mut new_assoc = assoc.clone();
    new_assoc.clear_uav(j);
    let mut pool: Vec<usize> = (0..scenario.n_users())
        .filter(|&i| new_assoc.row_sum(i) == 0)
        .collect();
    pool.shuffle(rng);
    let size = rng.gen_range(0..=scenario.uavs[j].quota.min(pool.len()));
    for &i in pool.iter().take(size) {
        new_assoc.set(i, j, true);
    }
    (j, new_placement, new_assoc)
}

/// Small random instance for property suites: 3-6 users, 2-3 UAVs, a grid
/// of a few hundred meters, urban channel.
pub fn random_desk_scenario<R: Rng>(rng: &mut R) -> Scenario {
    let n_users = rng.gen_range(3..=6);
    let n_uavs = rng.gen_range(2..=3);
    let side = 400.0;
    let users = (0..n_users)
        .map(|id| User {
            id,
            x: rng.gen_range(0.0..side),
            y: rng.gen_range(0.0..side),
        })
        .collect();
    let uavs = (0..n_uavs)
        .map(|id| Uav {
            id,
            power_dbm: rng.gen_range(5.0..20.0),
            quota: rng.gen_range(1..=3),
            bandwidth_hz: 1.0e6,
        })
        .collect();
    let grid = Grid3D {
        x_min: 0.0,
        x_max: side,
        dx: side / 2.0,
        y_min: 0.0,
        y_max: side,
        dy: side / 2.0,
        h_min: 100.0,
        h_max: 160.0,
        dh: 60.0,
    };
    Scenario::new(users, uavs, grid, ChannelParams::urban(), -3.0, rng.gen())
}

/// A cell adjacent to `cell` along one axis, if it stays on the grid.
pub fn axis_neighbor(cell: GridCell, grid: &Grid3D, axis: usize, step: isize) -> Option<GridCell> {
    let bump = |v: usize, n: usize| -> Option<usize> {
        let moved = v as isize + step;
        (moved >= 0 && (moved as usize) < n).then_some(moved as usize)
    };
    let mut out = cell;
    match axis {
        0 => out.ix = bump(cell.ix, grid.nx())?,
        1 => out.iy = bump(cell.iy, grid.ny())?,
        _ => out.ih = bump(cell.ih, grid.nh())?,
    }
    Some(out)
}
