//! Shared unit-test fixtures and independent raw-formula oracles. The
//! oracle functions deliberately avoid the `channel`/`objective` code
//! paths so they can cross-check them.

use crate::model::{ChannelParams, Grid3D, GridCell, Placement, Scenario, Uav, User};
use crate::sampling;

pub fn desk_scenario() -> Scenario {
    crate::presets::desk()
}

pub fn urban45_scenario() -> Scenario {
    crate::presets::urban45()
}

pub fn first_distinct_placement(scenario: &Scenario) -> Placement {
    sampling::lowest_distinct_placement(scenario)
}

/// One user equidistant from two equal-power UAVs.
pub fn mirror_pair_scenario() -> Scenario {
    let users = vec![User {
        id: 0,
        x: 200.0,
        y: 200.0,
    }];
    let uavs = (0..2)
        .map(|id| Uav {
            id,
            power_dbm: 10.0,
            quota: 1,
            bandwidth_hz: 1.0e6,
        })
        .collect();
    let grid = Grid3D {
        x_min: 100.0,
        x_max: 300.0,
        dx: 200.0,
        y_min: 200.0,
        y_max: 200.0,
        dy: 1.0,
        h_min: 100.0,
        h_max: 100.0,
        dh: 1.0,
    };
    Scenario::new(users, uavs, grid, ChannelParams::urban(), -3.0, 1)
}

pub fn mirror_pair_placement(scenario: &Scenario) -> Placement {
    let _ = scenario;
    Placement::new(vec![
        GridCell {
            ix: 0,
            iy: 0,
            ih: 0,
        },
        GridCell {
            ix: 1,
            iy: 0,
            ih: 0,
        },
    ])
}

/// 3 users, 3 UAVs on a 3x3x2 grid.
pub fn micro3_scenario() -> Scenario {
    let users = vec![
        User {
            id: 0,
            x: 40.0,
            y: 60.0,
        },
        User {
            id: 1,
            x: 420.0,
            y: 80.0,
        },
        User {
            id: 2,
            x: 250.0,
            y: 430.0,
        },
    ];
    let uavs = vec![
        Uav {
            id: 0,
            power_dbm: 10.0,
            quota: 2,
            bandwidth_hz: 1.0e6,
        },
        Uav {
            id: 1,
            power_dbm: 13.0,
            quota: 1,
            bandwidth_hz: 1.0e6,
        },
        Uav {
            id: 2,
            power_dbm: 8.0,
            quota: 2,
            bandwidth_hz: 2.0e6,
        },
    ];
    let grid = Grid3D {
        x_min: 0.0,
        x_max: 500.0,
        dx: 250.0,
        y_min: 0.0,
        y_max: 500.0,
        dy: 250.0,
        h_min: 100.0,
        h_max: 150.0,
        dh: 50.0,
    };
    Scenario::new(users, uavs, grid, ChannelParams::urban(), -3.0, 3)
}

/// 4 users, 2 UAVs.
pub fn micro_4x2_scenario() -> Scenario {
    let users = vec![
        User {
            id: 0,
            x: 60.0,
            y: 70.0,
        },
        User {
            id: 1,
            x: 150.0,
            y: 40.0,
        },
        User {
            id: 2,
            x: 320.0,
            y: 380.0,
        },
        User {
            id: 3,
            x: 400.0,
            y: 310.0,
        },
    ];
    let uavs = (0..2)
        .map(|id| Uav {
            id,
            power_dbm: 10.0,
            quota: 2,
            bandwidth_hz: 1.0e6,
        })
        .collect();
    let grid = Grid3D {
        x_min: 0.0,
        x_max: 450.0,
        dx: 150.0,
        y_min: 0.0,
        y_max: 450.0,
        dy: 150.0,
        h_min: 100.0,
        h_max: 200.0,
        dh: 50.0,
    };
    Scenario::new(users, uavs, grid, ChannelParams::urban(), -3.0, 4)
}

pub fn single_uav_scenario() -> Scenario {
    let users = vec![User {
        id: 0,
        x: 30.0,
        y: 90.0,
    }];
    let uavs = vec![Uav {
        id: 0,
        power_dbm: 10.0,
        quota: 1,
        bandwidth_hz: 1.0e6,
    }];
    let grid = Grid3D {
        x_min: 0.0,
        x_max: 100.0,
        dx: 100.0,
        y_min: 0.0,
        y_max: 100.0,
        dy: 100.0,
        h_min: 100.0,
        h_max: 100.0,
        dh: 1.0,
    };
    Scenario::new(users, uavs, grid, ChannelParams::urban(), -3.0, 5)
}

/// Raw-formula received power (W), written against the equations directly.
pub fn oracle_received_power_w(
    i: usize,
    j: usize,
    placement: &Placement,
    scenario: &Scenario,
) -> f64 {
    let pos = placement.point(j, &scenario.grid);
    let user = scenario.users[i];
    let dx = pos.x - user.x;
    let dy = pos.y - user.y;
    let d = (dx * dx + dy * dy).sqrt();
    let r = (d * d + pos.h * pos.h).sqrt();
    let theta_deg = if d == 0.0 {
        90.0
    } else {
        ((r * r - d * d).sqrt() / d).atan() * 180.0 / std::f64::consts::PI
    };
    let ch = &scenario.channel;
    let p_los = 1.0 / (1.0 + ch.epsilon * (-ch.beta * (theta_deg - ch.epsilon)).exp());
    let fspl = (4.0 * std::f64::consts::PI * ch.carrier_hz * r / ch.light_speed).powf(-ch.alpha);
    let zl = 10f64.powf(ch.zeta_los_db / 10.0);
    let zn = 10f64.powf(ch.zeta_nlos_db / 10.0);
    let loss = fspl / (zl * p_los + zn * (1.0 - p_los));
    10f64.powf((scenario.uavs[j].power_dbm - 30.0) / 10.0) * loss
}

/// Raw-formula SINR.
pub fn oracle_sinr(i: usize, j: usize, placement: &Placement, scenario: &Scenario) -> f64 {
    let signal = oracle_received_power_w(i, j, placement, scenario);
    let mut interference = 0.0;
    for k in 0..scenario.n_uavs() {
        if k != j {
            interference += oracle_received_power_w(i, k, placement, scenario);
        }
    }
    let noise = 10f64.powf((scenario.channel.noise_dbm - 30.0) / 10.0);
    signal / (noise + interference)
}

/// Raw-formula per-link rate (bit/s).
pub fn oracle_rate(i: usize, j: usize, placement: &Placement, scenario: &Scenario) -> f64 {
    scenario.uavs[j].bandwidth_hz * (1.0 + oracle_sinr(i, j, placement, scenario)).log2()
}
