//! Air-to-ground link budget: LoS probability, averaged path loss, SINR,
//! spectral efficiency, and per-user rate.
//!
//! All arithmetic is in linear watts internally; dB appears only at the
//! I/O boundary (`ChannelParams` fields and scenario JSON).

use thiserror::Error;

use crate::model::{db_to_linear, ChannelParams, LosFormula, Placement, Scenario};

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("invalid link geometry: r={r} < d={d}")]
    InvalidGeometry { r: f64, d: f64 },
    #[error("zero UAV-user distance has no defined path loss")]
    ZeroDistance,
}

/// UAV-to-user link geometry: 3D distance `r` and ground-projected
/// distance `d`, both in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    r: f64,
    d: f64,
}

impl LinkGeometry {
    pub fn new(r: f64, d: f64) -> Result<Self, ChannelError> {
        if d < 0.0 || r < d {
            return Err(ChannelError::InvalidGeometry { r, d });
        }
        if r <= 0.0 {
            return Err(ChannelError::ZeroDistance);
        }
        Ok(Self { r, d })
    }

    /// Geometry between a UAV at (x, y, h) and a ground user at (x, y).
    pub fn between(uav: [f64; 3], user: [f64; 2]) -> Result<Self, ChannelError> {
        let dx = uav[0] - user[0];
        let dy = uav[1] - user[1];
        let d = (dx * dx + dy * dy).sqrt();
        let r = (d * d + uav[2] * uav[2]).sqrt();
        Self::new(r, d)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Elevation angle in degrees; 90 when the UAV is directly overhead.
    pub fn elevation_deg(&self) -> f64 {
        if self.d == 0.0 {
            90.0
        } else {
            ((self.r * self.r - self.d * self.d).max(0.0).sqrt() / self.d)
                .atan()
                .to_degrees()
        }
    }
}

/// LoS probability for a link.
///
/// Under `Standard` this is the elevation-angle sigmoid
/// 1/(1 + eps*exp(-beta*(theta - eps))); under `AsPrinted` the exponent is
/// -beta*theta - eps instead, which stays near 1 even at grazing angles.
pub fn p_los(geom: LinkGeometry, params: &ChannelParams) -> f64 {
    let theta = geom.elevation_deg();
    let exponent = match params.los_formula {
        LosFormula::Standard => -params.beta * (theta - params.epsilon),
        LosFormula::AsPrinted => -params.beta * theta - params.epsilon,
    };
    1.0 / (1.0 + params.epsilon * exponent.exp())
}

/// Averaged path loss L as a linear gain factor:
/// (4*pi*f*r/c)^(-alpha) / (zeta_los*p + zeta_nlos*(1-p)), with the excess
/// losses converted from dB to linear before averaging.
pub fn path_loss(geom: LinkGeometry, params: &ChannelParams) -> f64 {
    let p = p_los(geom, params);
    let base = 4.0 * std::f64::consts::PI * params.carrier_hz * geom.r() / params.light_speed;
    // alpha = 2 is the default and powf dominates the link-budget profile
    let fspl = if params.alpha == 2.0 {
        1.0 / (base * base)
    } else {
        base.powf(-params.alpha)
    };
    let zeta_los = db_to_linear(params.zeta_los_db);
    let zeta_nlos = db_to_linear(params.zeta_nlos_db);
    fspl / (zeta_los * p + zeta_nlos * (1.0 - p))
}

/// Link geometry between UAV `j` of a placement and user `i`.
pub fn link_geometry(
    user: usize,
    uav: usize,
    placement: &Placement,
    scenario: &Scenario,
) -> Result<LinkGeometry, ChannelError> {
    let p = placement.point(uav, &scenario.grid);
    let u = scenario.users[user];
    LinkGeometry::between([p.x, p.y, p.h], [u.x, u.y])
}

/// Received power (watts) at user `i` from UAV `j`.
pub fn received_power_w(
    user: usize,
    uav: usize,
    placement: &Placement,
    scenario: &Scenario,
) -> Result<f64, ChannelError> {
    let geom = link_geometry(user, uav, placement, scenario)?;
    Ok(scenario.uavs[uav].power_w() * path_loss(geom, &scenario.channel))
}

/// Received power (watts) from a transmitter at an arbitrary 3D point,
/// usable for positions between grid points (k-means centers, scans).
pub fn received_power_at(
    pos: crate::model::GridPoint,
    power_w: f64,
    user: &crate::model::User,
    params: &ChannelParams,
) -> Result<f64, ChannelError> {
    let geom = LinkGeometry::between([pos.x, pos.y, pos.h], [user.x, user.y])?;
    Ok(power_w * path_loss(geom, params))
}

/// Linear SINR at user `i` from UAV `j`; every other UAV interferes
/// regardless of association.
pub fn sinr(
    user: usize,
    uav: usize,
    placement: &Placement,
    scenario: &Scenario,
) -> Result<f64, ChannelError> {
    let signal = received_power_w(user, uav, placement, scenario)?;
    let mut interference = 0.0;
    for k in 0..scenario.n_uavs() {
        if k != uav {
            interference += received_power_w(user, k, placement, scenario)?;
        }
    }
    Ok(signal / (scenario.channel.noise_w() + interference))
}

/// Spectral efficiency log2(1 + gamma) in bit/s/Hz.
pub fn spectral_efficiency(gamma: f64) -> f64 {
    (1.0 + gamma).log2()
}

/// Per-user rate R_ij = b_j * log2(1 + gamma_ij) in bit/s.
pub fn rate(
    user: usize,
    uav: usize,
    placement: &Placement,
    scenario: &Scenario,
) -> Result<f64, ChannelError> {
    let gamma = sinr(user, uav, placement, scenario)?;
    Ok(scenario.uavs[uav].bandwidth_hz * spectral_efficiency(gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Grid3D, GridCell, Uav, User};
    use crate::testkit;

    fn urban() -> ChannelParams {
        ChannelParams::urban()
    }

    fn geom_at_theta(theta_deg: f64) -> LinkGeometry {
        // unit-ish geometry realizing the requested elevation angle
        let d = 100.0;
        let h = d * theta_deg.to_radians().tan();
        LinkGeometry::new((d * d + h * h).sqrt(), d).unwrap()
    }

    #[test]
    fn p_los_at_theta_equal_epsilon_is_one_over_one_plus_epsilon() {
        let params = urban();
        let p = p_los(geom_at_theta(params.epsilon), &params);
        let expect = 1.0 / (1.0 + params.epsilon);
        assert!((p - expect).abs() < 1e-12, "p={p}, expect={expect}");
    }

    #[test]
    fn p_los_overhead_matches_golden() {
        // theta = 90 deg (d = 0)
        let params = urban();
        let geom = LinkGeometry::new(150.0, 0.0).unwrap();
        assert_eq!(geom.elevation_deg(), 90.0);
        let p = p_los(geom, &params);
        assert!((p - 0.999975074537903).abs() < 1e-12, "p={p}");
    }

    #[test]
    fn p_los_as_printed_is_high_at_grazing_angles() {
        let mut params = urban();
        params.los_formula = LosFormula::AsPrinted;
        // r == d gives theta = 0 exactly
        let geom = LinkGeometry::new(100.0, 100.0).unwrap();
        let p = p_los(geom, &params);
        assert!((p - 0.9993560181183535).abs() < 1e-12, "p={p}");
        // the standard form is tiny at the same angle
        params.los_formula = LosFormula::Standard;
        assert!(p_los(geom, &params) < 0.03);
    }

    #[test]
    fn invalid_geometry_is_rejected() {
        assert_eq!(
            LinkGeometry::new(50.0, 100.0),
            Err(ChannelError::InvalidGeometry { r: 50.0, d: 100.0 })
        );
        assert_eq!(LinkGeometry::new(0.0, 0.0), Err(ChannelError::ZeroDistance));
    }

    #[test]
    fn zero_excess_loss_reduces_to_free_space() {
        let mut params = urban();
        params.zeta_los_db = 0.0;
        params.zeta_nlos_db = 0.0;
        let geom = LinkGeometry::new(100.0, 10.0).unwrap();
        let expect = (4.0 * std::f64::consts::PI * params.carrier_hz * 100.0 / params.light_speed)
            .powf(-params.alpha);
        let got = path_loss(geom, &params);
        assert!((got - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn doubling_distance_quarters_the_gain_at_alpha_two() {
        let params = urban();
        // fixed elevation angle: scale r and d together
        let g1 = LinkGeometry::new(100.0, 10.0).unwrap();
        let g2 = LinkGeometry::new(200.0, 20.0).unwrap();
        let ratio = path_loss(g1, &params) / path_loss(g2, &params);
        assert!((ratio - 4.0).abs() < 1e-9, "ratio={ratio}");
    }

    #[test]
    fn path_loss_stays_between_pure_los_and_pure_nlos() {
        let params = urban();
        let geom = LinkGeometry::new(250.0, 70.0).unwrap();
        let fspl = (4.0 * std::f64::consts::PI * params.carrier_hz * 250.0 / params.light_speed)
            .powf(-params.alpha);
        let pure_los = fspl / db_to_linear(params.zeta_los_db);
        let pure_nlos = fspl / db_to_linear(params.zeta_nlos_db);
        let l = path_loss(geom, &params);
        assert!(
            l <= pure_los && l >= pure_nlos,
            "l={l} not in [{pure_nlos}, {pure_los}]"
        );
    }

    #[test]
    fn p_los_monotone_in_elevation_and_path_loss_monotone_in_range() {
        let params = urban();
        let mut last_p = 0.0;
        for theta in [1.0, 10.0, 25.0, 45.0, 60.0, 80.0, 89.0] {
            let p = p_los(geom_at_theta(theta), &params);
            assert!(p > last_p, "p_los not increasing at theta={theta}");
            assert!(p > 0.0 && p < 1.0);
            last_p = p;
        }
        let mut last_l = f64::INFINITY;
        for scale in [1.0, 2.0, 5.0, 13.0, 40.0] {
            let geom = LinkGeometry::new(100.0 * scale, 10.0 * scale).unwrap();
            let l = path_loss(geom, &params);
            assert!(l < last_l, "path loss not decreasing at scale={scale}");
            assert!(l > 0.0);
            last_l = l;
        }
    }

    #[test]
    fn single_uav_sinr_has_no_interference_term() {
        let scenario = Scenario::new(
            vec![User {
                id: 0,
                x: 50.0,
                y: 50.0,
            }],
            vec![Uav {
                id: 0,
                power_dbm: 10.0,
                quota: 1,
                bandwidth_hz: 1.0e6,
            }],
            Grid3D {
                x_min: 0.0,
                x_max: 100.0,
                dx: 50.0,
                y_min: 0.0,
                y_max: 100.0,
                dy: 50.0,
                h_min: 100.0,
                h_max: 100.0,
                dh: 10.0,
            },
            ChannelParams::urban(),
            -3.0,
            7,
        );
        let placement = Placement::new(vec![GridCell {
            ix: 0,
            iy: 0,
            ih: 0,
        }]);
        let gamma = sinr(0, 0, &placement, &scenario).unwrap();
        let expect =
            received_power_w(0, 0, &placement, &scenario).unwrap() / scenario.channel.noise_w();
        assert!((gamma - expect).abs() / expect < 1e-15);
    }

    #[test]
    fn equal_gain_interferer_drives_sinr_to_one() {
        // two UAVs mirrored around the user, equal power: signal equals
        // interference, so with negligible noise gamma -> 1 (0 dB)
        let mut scenario = testkit::mirror_pair_scenario();
        scenario.channel.noise_dbm = -300.0;
        let placement = testkit::mirror_pair_placement(&scenario);
        let gamma = sinr(0, 0, &placement, &scenario).unwrap();
        assert!((gamma - 1.0).abs() < 1e-9, "gamma={gamma}");
    }

    #[test]
    fn three_uav_sinr_matches_independent_link_budget() {
        // oracle: raw-formula recomputation, no shared helpers
        let scenario = testkit::micro3_scenario();
        let placement = testkit::first_distinct_placement(&scenario);
        for i in 0..scenario.n_users() {
            for j in 0..scenario.n_uavs() {
                let gamma = sinr(i, j, &placement, &scenario).unwrap();
                let oracle = testkit::oracle_sinr(i, j, &placement, &scenario);
                assert!(
                    (gamma - oracle).abs() / oracle < 1e-12,
                    "link ({i},{j}): {gamma} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn spectral_efficiency_known_points() {
        assert_eq!(spectral_efficiency(1.0), 1.0);
        assert_eq!(spectral_efficiency(0.0), 0.0);
        // gamma = -3 dB
        let eta = spectral_efficiency(db_to_linear(-3.0));
        assert!((eta - 0.5861039264453475).abs() < 1e-12, "eta={eta}");
    }

    #[test]
    fn rate_is_linear_in_bandwidth_and_increasing_in_gamma() {
        let mut scenario = testkit::micro3_scenario();
        let placement = testkit::first_distinct_placement(&scenario);
        let r1 = rate(0, 0, &placement, &scenario).unwrap();
        scenario.uavs[0].bandwidth_hz *= 3.0;
        let r3 = rate(0, 0, &placement, &scenario).unwrap();
        assert!((r3 - 3.0 * r1).abs() / r1 < 1e-12);

        let mut last = -1.0;
        for gamma in [0.0, 0.3, 1.0, 5.0, 100.0] {
            let eta = spectral_efficiency(gamma);
            assert!(eta > last);
            last = eta;
        }
    }

    #[test]
    fn sinr_ignores_interferer_relabeling() {
        // swap UAVs 1 and 2 everywhere; the SINR of user 0 from UAV 0
        // must not move beyond summation-order rounding
        let scenario = testkit::micro3_scenario();
        let placement = testkit::first_distinct_placement(&scenario);
        let gamma = sinr(0, 0, &placement, &scenario).unwrap();

        let mut swapped = scenario.clone();
        swapped.uavs[1] = scenario.uavs[2];
        swapped.uavs[2] = scenario.uavs[1];
        swapped.uavs[1].id = 1;
        swapped.uavs[2].id = 2;
        let mut placement_swapped = placement.clone();
        placement_swapped.cells.swap(1, 2);
        let gamma_swapped = sinr(0, 0, &placement_swapped, &swapped).unwrap();
        assert!(
            (gamma - gamma_swapped).abs() / gamma < 1e-12,
            "{gamma} vs {gamma_swapped}"
        );
    }
}
