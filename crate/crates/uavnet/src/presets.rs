//! Canonical instances used throughout the docs, the CLI examples, and the
//! acceptance suite. The JSON files under `scenarios/` are generated from
//! these constructors.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{ChannelParams, Grid3D, Scenario, Uav, User};

/// Desk-scale instance: 4 users, 2 UAVs with quota 2, a 2x2x2 grid, urban
/// channel. Small enough for the exhaustive oracle.
pub fn desk() -> Scenario {
    let users = vec![
        User {
            id: 0,
            x: 50.0,
            y: 60.0,
        },
        User {
            id: 1,
            x: 340.0,
            y: 90.0,
        },
        User {
            id: 2,
            x: 80.0,
            y: 350.0,
        },
        User {
            id: 3,
            x: 310.0,
            y: 300.0,
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
        x_max: 400.0,
        dx: 400.0,
        y_min: 0.0,
        y_max: 400.0,
        dy: 400.0,
        h_min: 100.0,
        h_max: 200.0,
        dh: 100.0,
    };
    Scenario::new(users, uavs, grid, ChannelParams::urban(), -3.0, 42)
}

/// The headline simulation settings: 45 users scattered over 1000x1000 m,
/// 5 UAVs at 10 dBm with quota 4, 10 m grid steps, heights 100-200 m,
/// QoS floor -3 dB.
pub fn urban45() -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    let users = (0..45)
        .map(|id| User {
            id,
            x: rng.gen_range(0.0..1000.0),
            y: rng.gen_range(0.0..1000.0),
        })
        .collect();
    let uavs = (0..5)
        .map(|id| Uav {
            id,
            power_dbm: 10.0,
            quota: 4,
            bandwidth_hz: 1.0e6,
        })
        .collect();
    let grid = Grid3D {
        x_min: 0.0,
        x_max: 1000.0,
        dx: 10.0,
        y_min: 0.0,
        y_max: 1000.0,
        dy: 10.0,
        h_min: 100.0,
        h_max: 200.0,
        dh: 10.0,
    };
    Scenario::new(users, uavs, grid, ChannelParams::urban(), -3.0, 2020)
}

/// Larger fleet for the neighborhood-range sweep: 60 users, 10 UAVs with
/// quota 6, a coarser 50 m grid and two flight heights to keep the
/// reduced configuration set tractable.
pub fn range_sweep() -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let users = (0..60)
        .map(|id| User {
            id,
            x: rng.gen_range(0.0..1000.0),
            y: rng.gen_range(0.0..1000.0),
        })
        .collect();
    let uavs = (0..10)
        .map(|id| Uav {
            id,
            power_dbm: 10.0,
            quota: 6,
            bandwidth_hz: 1.0e6,
        })
        .collect();
    let grid = Grid3D {
        x_min: 0.0,
        x_max: 1000.0,
        dx: 50.0,
        y_min: 0.0,
        y_max: 1000.0,
        dy: 50.0,
        h_min: 100.0,
        h_max: 200.0,
        dh: 100.0,
    };
    Scenario::new(users, uavs, grid, ChannelParams::urban(), -3.0, 777)
}
