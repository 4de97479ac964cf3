//! Room geometry, access-point layout, and random-waypoint user mobility.
//!
//! Users move on a horizontal plane; each user's receiver sits a fixed
//! vertical gap below the ceiling, drawn once at spawn time. All motion is
//! confined to the room footprint by construction: waypoints are sampled
//! inside the room and users travel straight lines between them.

use alloc::vec::Vec;
// With std in the crate graph (tests), inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, MobilityMode, SimConfig};
use crate::rng::RandomSource;

/// Rectangular indoor space. The user plane gap is the vertical distance
/// between the ceiling and a user's receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Room {
    pub width_x: f64,
    pub depth_y: f64,
    pub ceiling_height: f64,
    pub user_plane_gap_range: (f64, f64),
}

impl Default for Room {
    fn default() -> Self {
        Self {
            width_x: 10.0,
            depth_y: 10.0,
            ceiling_height: 3.5,
            user_plane_gap_range: (1.5, 2.0),
        }
    }
}

impl Room {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.width_x > 0.0) || !self.width_x.is_finite() {
            return Err(ConfigError::invalid("room.width_x", "must be positive"));
        }
        if !(self.depth_y > 0.0) || !self.depth_y.is_finite() {
            return Err(ConfigError::invalid("room.depth_y", "must be positive"));
        }
        if !(self.ceiling_height > 0.0) || !self.ceiling_height.is_finite() {
            return Err(ConfigError::invalid("room.ceiling_height", "must be positive"));
        }
        let (lo, hi) = self.user_plane_gap_range;
        if !(lo > 0.0 && lo <= hi && hi < self.ceiling_height) {
            return Err(ConfigError::invalid(
                "room.user_plane_gap_range",
                "requires 0 < low <= high < ceiling_height",
            ));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width_x).contains(&x) && (0.0..=self.depth_y).contains(&y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApKind {
    Lifi,
    Wifi,
}

/// A fixed access point. LiFi nodes sit on the ceiling plane facing down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApNode {
    pub id: usize,
    pub kind: ApKind,
    pub position: [f64; 3],
}

/// Per-user simulation state. `position` is the horizontal location;
/// `receiver_gap` is the ceiling-to-receiver distance, constant per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserState {
    pub id: usize,
    pub position: [f64; 2],
    pub receiver_gap: f64,
    pub waypoint: Option<[f64; 2]>,
    pub speed: f64,
    pub pause_remaining: f64,
    pub required_rate: f64,
}

impl UserState {
    /// Height of the receiver above the floor.
    pub fn receiver_z(&self, room: &Room) -> f64 {
        room.ceiling_height - self.receiver_gap
    }
}

/// Distance and (cosine of) irradiation/incidence angles for one AP-user link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance: f64,
    pub cos_irradiation: f64,
    pub cos_incidence: f64,
}

/// Distance and angles between a downward-facing AP and an upward-facing
/// receiver. Both cosines equal vertical-offset / distance; they are zero
/// (link fully oblique) when the AP is not above the receiver plane.
pub fn link_geometry(ap: &ApNode, user: &UserState, room: &Room) -> LinkGeometry {
    let dx = ap.position[0] - user.position[0];
    let dy = ap.position[1] - user.position[1];
    let dz = ap.position[2] - user.receiver_z(room);
    let distance = (dx * dx + dy * dy + dz * dz).sqrt();
    let cos = if distance > 0.0 && dz > 0.0 {
        dz / distance
    } else {
        0.0
    };
    LinkGeometry {
        distance,
        cos_irradiation: cos,
        cos_incidence: cos,
    }
}

/// Draw the initial user population: positions i.i.d. uniform over the room
/// footprint, receiver gaps uniform over the configured range, and required
/// rates from a truncated Gaussian.
pub fn sample_initial_users(
    cfg: &SimConfig,
    rng: &mut RandomSource,
) -> Result<Vec<UserState>, ConfigError> {
    cfg.room.validate()?;
    if cfg.user_count == 0 {
        return Err(ConfigError::invalid("user_count", "must be at least 1"));
    }
    let mut users = Vec::with_capacity(cfg.user_count);
    for id in 0..cfg.user_count {
        let x = rng.uniform_in(0.0, cfg.room.width_x);
        let y = rng.uniform_in(0.0, cfg.room.depth_y);
        let (lo, hi) = cfg.room.user_plane_gap_range;
        let gap = rng.uniform_in(lo, hi);
        let required_rate = sample_required_rate(cfg, rng);
        users.push(UserState {
            id,
            position: [x, y],
            receiver_gap: gap,
            waypoint: None,
            speed: 0.0,
            pause_remaining: 0.0,
            required_rate,
        });
    }
    Ok(users)
}

fn sample_required_rate(cfg: &SimConfig, rng: &mut RandomSource) -> f64 {
    let rr = &cfg.required_rate;
    for _ in 0..64 {
        let draw = rr.mean + rr.std_dev * rng.normal();
        if draw >= rr.floor {
            return draw;
        }
    }
    rr.floor
}

/// One random-waypoint step of length `dt`. Users without a destination draw
/// one uniformly in the room together with a speed from the configured range,
/// then advance along the straight line; arrival within one step snaps to the
/// waypoint and starts the configured dwell.
pub fn rwp_step(
    user: &UserState,
    dt: f64,
    room: &Room,
    cfg: &SimConfig,
    rng: &mut RandomSource,
) -> UserState {
    debug_assert!(dt > 0.0);
    let mut next = user.clone();
    if cfg.mobility.mode == MobilityMode::Static {
        return next;
    }
    if next.pause_remaining > 0.0 {
        next.pause_remaining = (next.pause_remaining - dt).max(0.0);
        next.speed = 0.0;
        return next;
    }
    let waypoint = match next.waypoint {
        Some(wp) => wp,
        None => {
            let wp = [
                rng.uniform_in(0.0, room.width_x),
                rng.uniform_in(0.0, room.depth_y),
            ];
            let (lo, hi) = cfg.mobility.speed_range;
            next.speed = rng.uniform_in(lo, hi);
            next.waypoint = Some(wp);
            wp
        }
    };
    let dx = waypoint[0] - next.position[0];
    let dy = waypoint[1] - next.position[1];
    let dist = (dx * dx + dy * dy).sqrt();
    let step = next.speed * dt;
    if dist <= step {
        next.position = waypoint;
        next.waypoint = None;
        next.speed = 0.0;
        next.pause_remaining = cfg.mobility.pause_duration;
    } else {
        next.position[0] += step * dx / dist;
        next.position[1] += step * dy / dist;
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use proptest::prelude::*;

    fn cfg_with_users(n: usize) -> SimConfig {
        let mut cfg = SimConfig::default();
        cfg.user_count = n;
        cfg
    }

    fn test_user(x: f64, y: f64, gap: f64) -> UserState {
        UserState {
            id: 0,
            position: [x, y],
            receiver_gap: gap,
            waypoint: None,
            speed: 0.0,
            pause_remaining: 0.0,
            required_rate: 5e7,
        }
    }

    #[test]
    fn initial_users_inside_room() {
        let cfg = cfg_with_users(4);
        let mut rng = RandomSource::from_seed(1);
        let users = sample_initial_users(&cfg, &mut rng).unwrap();
        assert_eq!(users.len(), 4);
        for u in &users {
            assert!(cfg.room.contains(u.position[0], u.position[1]));
            assert!(u.required_rate > 0.0);
        }
    }

    #[test]
    fn receiver_gap_within_table_range() {
        let cfg = cfg_with_users(64);
        let mut rng = RandomSource::from_seed(2);
        for u in sample_initial_users(&cfg, &mut rng).unwrap() {
            assert!((1.5..=2.0).contains(&u.receiver_gap), "gap {}", u.receiver_gap);
        }
    }

    #[test]
    fn same_seed_same_users() {
        let cfg = cfg_with_users(6);
        let a = sample_initial_users(&cfg, &mut RandomSource::from_seed(3)).unwrap();
        let b = sample_initial_users(&cfg, &mut RandomSource::from_seed(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_room_rejected() {
        let mut cfg = cfg_with_users(1);
        cfg.room.width_x = -1.0;
        assert!(sample_initial_users(&cfg, &mut RandomSource::from_seed(0)).is_err());
    }

    #[test]
    fn rwp_unit_vector_step() {
        let mut cfg = cfg_with_users(1);
        cfg.mobility.mode = MobilityMode::Rwp;
        let mut user = test_user(0.0, 0.0, 1.75);
        user.waypoint = Some([3.0, 4.0]);
        user.speed = 1.0;
        let next = rwp_step(&user, 0.1, &cfg.room, &cfg, &mut RandomSource::from_seed(0));
        assert!((next.position[0] - 0.06).abs() < 1e-12);
        assert!((next.position[1] - 0.08).abs() < 1e-12);
    }

    #[test]
    fn static_mode_is_identity() {
        let cfg = cfg_with_users(1);
        let user = test_user(4.0, 5.0, 1.6);
        for dt in [0.1, 1.0, 100.0] {
            let next = rwp_step(&user, dt, &cfg.room, &cfg, &mut RandomSource::from_seed(9));
            assert_eq!(next, user);
        }
    }

    #[test]
    fn long_walk_stays_in_bounds() {
        let mut cfg = cfg_with_users(1);
        cfg.mobility.mode = MobilityMode::Rwp;
        let mut rng = RandomSource::from_seed(5);
        let mut user = test_user(5.0, 5.0, 1.8);
        for _ in 0..10_000 {
            user = rwp_step(&user, 0.1, &cfg.room, &cfg, &mut rng);
            assert!(cfg.room.contains(user.position[0], user.position[1]));
        }
    }

    #[test]
    fn pause_holds_position() {
        let mut cfg = cfg_with_users(1);
        cfg.mobility.mode = MobilityMode::Rwp;
        cfg.mobility.pause_duration = 0.3;
        let mut rng = RandomSource::from_seed(6);
        let mut user = test_user(1.0, 1.0, 1.5);
        user.waypoint = Some([1.0, 1.05]);
        user.speed = 1.0;
        user = rwp_step(&user, 0.1, &cfg.room, &cfg, &mut rng);
        assert_eq!(user.position, [1.0, 1.05]);
        assert!(user.pause_remaining > 0.0);
        let parked = user.position;
        for _ in 0..3 {
            user = rwp_step(&user, 0.1, &cfg.room, &cfg, &mut rng);
            assert_eq!(user.position, parked);
        }
        user = rwp_step(&user, 0.1, &cfg.room, &cfg, &mut rng);
        assert!(user.waypoint.is_some());
    }

    #[test]
    fn vertical_link_geometry() {
        let room = Room::default();
        let ap = ApNode {
            id: 0,
            kind: ApKind::Lifi,
            position: [2.0, 3.0, 3.5],
        };
        let user = test_user(2.0, 3.0, 2.0);
        let g = link_geometry(&ap, &user, &room);
        assert!((g.distance - 2.0).abs() < 1e-12);
        assert!((g.cos_incidence - 1.0).abs() < 1e-12);
        assert!((g.cos_irradiation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn horizontal_limit_geometry() {
        // Zero receiver gap puts the user plane at the ceiling: dz = 0 and
        // the link is fully horizontal.
        let room = Room::default();
        let ap = ApNode {
            id: 0,
            kind: ApKind::Lifi,
            position: [0.0, 0.0, 3.5],
        };
        let user = test_user(3.0, 4.0, 0.0);
        let g = link_geometry(&ap, &user, &room);
        assert!((g.distance - 5.0).abs() < 1e-12);
        assert_eq!(g.cos_incidence, 0.0);
    }

    #[test]
    fn oblique_link_geometry() {
        let room = Room::default();
        let ap = ApNode {
            id: 0,
            kind: ApKind::Lifi,
            position: [1.0, 0.0, 3.5],
        };
        let user = test_user(0.0, 0.0, 1.0);
        let g = link_geometry(&ap, &user, &room);
        assert!((g.distance - core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!((g.cos_incidence - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(g.cos_incidence, g.cos_irradiation);
    }

    proptest! {
        #[test]
        fn cosines_always_equal_and_bounded(
            ax in 0.0..10.0f64, ay in 0.0..10.0f64,
            ux in 0.0..10.0f64, uy in 0.0..10.0f64,
            gap in 0.1..3.4f64,
        ) {
            let room = Room { user_plane_gap_range: (0.1, 3.4), ..Room::default() };
            let ap = ApNode { id: 0, kind: ApKind::Lifi, position: [ax, ay, 3.5] };
            let user = test_user(ux, uy, gap);
            let g = link_geometry(&ap, &user, &room);
            prop_assert_eq!(g.cos_incidence, g.cos_irradiation);
            prop_assert!((0.0..=1.0).contains(&g.cos_incidence));
            prop_assert!(g.distance >= gap - 1e-12);
        }

        #[test]
        fn rwp_displacement_bounded(seed in 0u64..500) {
            let mut cfg = cfg_with_users(1);
            cfg.mobility.mode = MobilityMode::Rwp;
            let (_, speed_max) = cfg.mobility.speed_range;
            let mut rng = RandomSource::from_seed(seed);
            let mut user = test_user(5.0, 5.0, 1.7);
            for _ in 0..200 {
                let next = rwp_step(&user, 0.1, &cfg.room, &cfg, &mut rng);
                let dx = next.position[0] - user.position[0];
                let dy = next.position[1] - user.position[1];
                let moved = (dx * dx + dy * dy).sqrt();
                prop_assert!(moved <= speed_max * 0.1 + 1e-12);
                user = next;
            }
        }
    }
}
