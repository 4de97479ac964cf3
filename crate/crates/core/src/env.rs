//! Association decision space, feasibility, reward, fairness, and the
//! slot-stepping network environment shared by every solver.
//!
//! An association is stored densely: one AP index per user, so the
//! one-AP-per-user constraint cannot be violated by construction and only
//! the per-AP capacity limits remain checkable.

use alloc::vec::Vec;
// With std in the crate graph (tests), inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::channel::{
    build_snapshot, BlockageMask, ChannelError, ChannelSnapshot, LifiParams, Matrix,
};
use crate::config::{CapacityLimits, ConfigError, MobilityMode, RewardMode, SimConfig};
use crate::geometry::{link_geometry, rwp_step, sample_initial_users, ApKind, ApNode, Room, UserState};
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("fairness is undefined for zero users")]
    NoUsers,
}

/// Dense user-to-AP assignment: `assign[k]` is the AP index serving user `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Association {
    pub assign: Vec<usize>,
}

impl Association {
    pub fn new(assign: Vec<usize>) -> Self {
        Self { assign }
    }

    pub fn user_count(&self) -> usize {
        self.assign.len()
    }

    /// Users served by each AP.
    pub fn loads(&self, ap_count: usize) -> Vec<usize> {
        let mut loads = alloc::vec![0usize; ap_count];
        for &ap in &self.assign {
            assert!(ap < ap_count, "association references AP {ap} of {ap_count}");
            loads[ap] += 1;
        }
        loads
    }
}

/// AP layout with LiFi nodes first; `lifi_count` splits the index space.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub aps: Vec<ApNode>,
    pub lifi_count: usize,
}

impl Topology {
    pub fn from_config(cfg: &SimConfig) -> Result<Self, ConfigError> {
        let aps = cfg.ap_layout()?;
        let lifi_count = aps.iter().filter(|a| a.kind == ApKind::Lifi).count();
        Ok(Self { aps, lifi_count })
    }

    pub fn ap_count(&self) -> usize {
        self.aps.len()
    }

    pub fn kind(&self, ap: usize) -> ApKind {
        self.aps[ap].kind
    }

    pub fn cap(&self, ap: usize, caps: &CapacityLimits) -> usize {
        caps.cap_for(self.kind(ap))
    }

    pub fn lifi_aps(&self) -> &[ApNode] {
        &self.aps[..self.lifi_count]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApOverload {
    pub ap: usize,
    pub overload: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<ApOverload>,
    pub total_overload: usize,
}

/// Capacity check: every LiFi AP serves at most `per_lifi` users and every
/// WiFi AP at most `per_wifi`. The report lists each overloaded AP with its
/// excess user count.
pub fn is_feasible(a: &Association, caps: &CapacityLimits, topology: &Topology) -> FeasibilityReport {
    let loads = a.loads(topology.ap_count());
    let mut violations = Vec::new();
    let mut total = 0;
    for (ap, &load) in loads.iter().enumerate() {
        let cap = topology.cap(ap, caps);
        if load > cap {
            let overload = load - cap;
            total += overload;
            violations.push(ApOverload { ap, overload });
        }
    }
    FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
        total_overload: total,
    }
}

/// Sum of the served-link rates (bit/s). Defined for infeasible
/// associations as well.
pub fn sum_rate(a: &Association, snapshot: &ChannelSnapshot) -> f64 {
    a.assign
        .iter()
        .enumerate()
        .map(|(k, &ap)| snapshot.rate.get(ap, k))
        .sum()
}

/// Normalized sum rate minus the capacity penalty: each user beyond an AP's
/// limit subtracts `penalty_coeff`.
pub fn reward(
    a: &Association,
    snapshot: &ChannelSnapshot,
    caps: &CapacityLimits,
    topology: &Topology,
    penalty_coeff: f64,
    rate_scale: f64,
) -> f64 {
    let report = is_feasible(a, caps, topology);
    sum_rate(a, snapshot) / rate_scale - penalty_coeff * report.total_overload as f64
}

/// Jain index over per-user rate-satisfaction ratios q_k = r_k / r_k_req:
/// (sum q)^2 / (K sum q^2). Returns 0 when every ratio is zero.
pub fn jain_fairness(
    a: &Association,
    snapshot: &ChannelSnapshot,
    users: &[UserState],
) -> Result<f64, EnvError> {
    if users.is_empty() {
        return Err(EnvError::NoUsers);
    }
    debug_assert_eq!(a.assign.len(), users.len());
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (k, user) in users.iter().enumerate() {
        debug_assert!(user.required_rate > 0.0);
        let q = snapshot.rate.get(a.assign[k], k) / user.required_rate;
        sum += q;
        sum_sq += q * q;
    }
    if sum_sq == 0.0 {
        return Ok(0.0);
    }
    Ok(sum * sum / (users.len() as f64 * sum_sq))
}

/// Draw the per-slot blockage state. Each user takes a single uniform draw;
/// the draw blocks that user's LiFi links, but only where AP and user are
/// within each other's field of view (out-of-FoV links have no line of
/// sight to obstruct).
pub fn draw_blockage_mask(
    users: &[UserState],
    lifi_aps: &[ApNode],
    lifi: &LifiParams,
    room: &Room,
    blockage_rate: f64,
    rng: &mut RandomSource,
) -> BlockageMask {
    debug_assert!((0.0..=1.0).contains(&blockage_rate));
    let cos_fov = lifi.fov_semi_angle.cos();
    let mut mask = BlockageMask::clear(lifi_aps.len(), users.len());
    for (k, user) in users.iter().enumerate() {
        let blocked = rng.uniform() < blockage_rate;
        if !blocked {
            continue;
        }
        for (l, ap) in lifi_aps.iter().enumerate() {
            let geom = link_geometry(ap, user, room);
            let in_fov = geom.cos_incidence > 0.0 && geom.cos_incidence >= cos_fov;
            if in_fov {
                mask.set(l, k, true);
            }
        }
    }
    mask
}

/// Per-slot record of what an association achieved.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotMetrics {
    pub slot: usize,
    pub sum_rate_bps: f64,
    pub fairness: f64,
    pub overload_count: usize,
    pub per_ap_loads: Vec<usize>,
    pub feasible: bool,
    pub reward: f64,
}

/// The slot-stepping environment: owns the user population, the current
/// channel snapshot, the blockage state, and the random streams that renew
/// them. Cloning yields an independent replica (streams included), which is
/// how deterministic side evaluations are run without disturbing training.
#[derive(Debug, Clone)]
pub struct NetworkEnv {
    cfg: SimConfig,
    topology: Topology,
    users: Vec<UserState>,
    snapshot: ChannelSnapshot,
    mask: BlockageMask,
    slot: usize,
    user_stream: RandomSource,
    mobility_stream: RandomSource,
    channel_stream: RandomSource,
    blockage_stream: RandomSource,
}

impl NetworkEnv {
    pub fn from_config(cfg: &SimConfig) -> Result<Self, EnvError> {
        cfg.validate()?;
        let topology = Topology::from_config(cfg)?;
        let root = RandomSource::from_seed(cfg.seed);
        let mut user_stream = root.derive("users", 0);
        let mobility_stream = root.derive("mobility", 0);
        let mut channel_stream = root.derive("channel", 0);
        let mut blockage_stream = root.derive("blockage", 0);

        let users = sample_initial_users(cfg, &mut user_stream)?;
        let mask = draw_blockage_mask(
            &users,
            topology.lifi_aps(),
            &cfg.lifi,
            &cfg.room,
            cfg.blockage.rate,
            &mut blockage_stream,
        );
        let snapshot = build_snapshot(
            &topology.aps,
            &cfg.lifi,
            &cfg.wifi,
            &cfg.room,
            &users,
            0,
            cfg.channel_mode,
            cfg.blockage.attenuation,
            &mask,
            &mut channel_stream,
        )?;
        Ok(Self {
            cfg: cfg.clone(),
            topology,
            users,
            snapshot,
            mask,
            slot: 0,
            user_stream,
            mobility_stream,
            channel_stream,
            blockage_stream,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn users(&self) -> &[UserState] {
        &self.users
    }

    pub fn snapshot(&self) -> &ChannelSnapshot {
        &self.snapshot
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn ap_count(&self) -> usize {
        self.topology.ap_count()
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    /// Raw per-AP SINR/SNR vector observed by one user.
    pub fn observation(&self, user: usize) -> Vec<f64> {
        self.snapshot.sinr.column(user)
    }

    /// Interference-free SNR matrix of the current snapshot.
    pub fn snr_matrix(&self) -> &Matrix {
        &self.snapshot.snr
    }

    /// Metrics and scalar reward an association earns on the current slot.
    pub fn score(&self, a: &Association) -> Result<SlotMetrics, EnvError> {
        let report = is_feasible(a, &self.cfg.caps, &self.topology);
        let total = sum_rate(a, &self.snapshot);
        let fairness = jain_fairness(a, &self.snapshot, &self.users)?;
        let reward = match self.cfg.reward_mode {
            RewardMode::SumRate => {
                total / self.cfg.rate_scale
                    - self.cfg.trainer.penalty_coeff * report.total_overload as f64
            }
            RewardMode::Fairness => {
                fairness - self.cfg.trainer.penalty_coeff * report.total_overload as f64
            }
        };
        Ok(SlotMetrics {
            slot: self.slot,
            sum_rate_bps: total,
            fairness,
            overload_count: report.total_overload,
            per_ap_loads: a.loads(self.topology.ap_count()),
            feasible: report.feasible,
            reward,
        })
    }

    /// Score the association on the current snapshot, then advance one slot:
    /// move users (mobile mode), redraw blockage, and rebuild the channel.
    pub fn step(&mut self, a: &Association) -> Result<(f64, SlotMetrics), EnvError> {
        let metrics = self.score(a)?;
        self.advance()?;
        Ok((metrics.reward, metrics))
    }

    /// Advance the world state by one slot without scoring an association.
    pub fn advance(&mut self) -> Result<(), EnvError> {
        if self.cfg.mobility.mode == MobilityMode::Rwp {
            let dt = self.cfg.mobility.dt;
            self.users = self
                .users
                .iter()
                .map(|u| rwp_step(u, dt, &self.cfg.room, &self.cfg, &mut self.mobility_stream))
                .collect();
        }
        self.slot += 1;
        self.refresh_channel()
    }

    /// Redraw user start positions (fresh draws from the persistent user
    /// stream) and rebuild the slot state. Used between training episodes
    /// in mobile scenarios.
    pub fn redraw_users(&mut self) -> Result<(), EnvError> {
        self.users = sample_initial_users(&self.cfg, &mut self.user_stream)?;
        self.refresh_channel()
    }

    fn refresh_channel(&mut self) -> Result<(), EnvError> {
        self.mask = draw_blockage_mask(
            &self.users,
            self.topology.lifi_aps(),
            &self.cfg.lifi,
            &self.cfg.room,
            self.cfg.blockage.rate,
            &mut self.blockage_stream,
        );
        self.snapshot = build_snapshot(
            &self.topology.aps,
            &self.cfg.lifi,
            &self.cfg.wifi,
            &self.cfg.room,
            &self.users,
            self.slot,
            self.cfg.channel_mode,
            self.cfg.blockage.attenuation,
            &self.mask,
            &mut self.channel_stream,
        )?;
        Ok(())
    }
}
