//! Experiment configuration: room, AP layout presets, channel constants,
//! capacity limits, mobility, reward shaping, and trainer hyperparameters.
//!
//! Every field has a default so an empty config file yields a runnable
//! experiment (interference-free layout, capacity setting 1, 8 static users).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::channel::{LifiParams, WifiParams};
use crate::geometry::{ApKind, ApNode, Room};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    pub fn invalid(field: &str, reason: &str) -> Self {
        ConfigError::Invalid {
            field: String::from(field),
            reason: String::from(reason),
        }
    }
}

/// Named AP layouts. `Custom` reads the `custom_aps` list instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioPreset {
    InterferenceFree,
    InterferenceProne,
    Dense,
    Custom,
}

impl ScenarioPreset {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioPreset::InterferenceFree => "interference_free",
            ScenarioPreset::InterferenceProne => "interference_prone",
            ScenarioPreset::Dense => "dense",
            ScenarioPreset::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomAp {
    pub kind: ApKind,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Maximum simultaneous users per LiFi and per WiFi AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityLimits {
    pub per_lifi: usize,
    pub per_wifi: usize,
}

impl Default for CapacityLimits {
    fn default() -> Self {
        // Network setting 1.
        Self {
            per_lifi: 2,
            per_wifi: 5,
        }
    }
}

impl CapacityLimits {
    pub fn setting(n: u8) -> Option<Self> {
        match n {
            1 => Some(Self {
                per_lifi: 2,
                per_wifi: 5,
            }),
            2 => Some(Self {
                per_lifi: 3,
                per_wifi: 7,
            }),
            _ => None,
        }
    }

    /// "1" / "2" for the two canonical settings, "custom" otherwise.
    pub fn setting_name(&self) -> &'static str {
        match (self.per_lifi, self.per_wifi) {
            (2, 5) => "1",
            (3, 7) => "2",
            _ => "custom",
        }
    }

    pub fn cap_for(&self, kind: ApKind) -> usize {
        match kind {
            ApKind::Lifi => self.per_lifi,
            ApKind::Wifi => self.per_wifi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityMode {
    Static,
    Rwp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityConfig {
    pub mode: MobilityMode,
    /// Uniform speed range in m/s while moving.
    pub speed_range: (f64, f64),
    /// Dwell after reaching a waypoint, in seconds (0 = redraw immediately).
    pub pause_duration: f64,
    /// Slot duration in seconds.
    pub dt: f64,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            mode: MobilityMode::Static,
            speed_range: (0.5, 2.0),
            pause_duration: 0.0,
            dt: 0.1,
        }
    }
}

/// Deterministic mode zeroes shadow fading and replaces the Rician draw by
/// its mean power, making every channel output a pure function of geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    Deterministic,
    Stochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockageConfig {
    /// Per-slot probability that a user's in-FoV LiFi links are blocked.
    pub rate: f64,
    /// Multiplier applied to blocked LiFi channel gains.
    pub attenuation: f64,
}

impl Default for BlockageConfig {
    fn default() -> Self {
        Self {
            rate: 0.0,
            attenuation: 1e-3,
        }
    }
}

/// Gaussian model of per-user required data rate (bit/s), truncated below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RequiredRateConfig {
    pub mean: f64,
    pub std_dev: f64,
    pub floor: f64,
}

impl Default for RequiredRateConfig {
    fn default() -> Self {
        Self {
            mean: 5e7,
            std_dev: 1e7,
            floor: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    SumRate,
    Fairness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Es,
    Sss,
    Greedy,
    Sppo,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Es => "es",
            SolverKind::Sss => "sss",
            SolverKind::Greedy => "greedy",
            SolverKind::Sppo => "sppo",
        }
    }
}

/// S-PPO trainer hyperparameters (defaults follow the shipped tuning).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    pub learning_rate: f64,
    pub clip_epsilon: f64,
    pub discount: f64,
    pub epochs_per_update: usize,
    /// Timesteps (slots) collected between policy updates.
    pub update_interval: usize,
    pub max_episodes: usize,
    pub episode_length: usize,
    pub penalty_coeff: f64,
    pub value_loss_weight: f64,
    pub entropy_bonus_weight: f64,
    pub hidden_width: usize,
    /// Evaluate the deterministic policy every this many episodes when an
    /// early-stop target is set.
    pub eval_interval_episodes: usize,
    /// Stop training once the deterministic-policy objective reaches this
    /// value (bit/s for sum-rate mode, index value for fairness mode).
    pub target_objective: Option<f64>,
    /// Redraw user start positions each episode in mobile scenarios.
    pub redraw_users_each_episode: bool,
    /// Restart the discounted-return accumulation every slot. Associations
    /// never influence the next slot's channel state, so cross-slot return
    /// tails add variance without any signal about the chosen actions;
    /// disable to reproduce the literal whole-trajectory returns.
    pub single_slot_returns: bool,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            clip_epsilon: 0.1,
            discount: 0.99,
            epochs_per_update: 8,
            update_interval: 450,
            max_episodes: 1000,
            episode_length: 100,
            penalty_coeff: 10.0,
            value_loss_weight: 0.5,
            entropy_bonus_weight: 0.01,
            hidden_width: 64,
            eval_interval_episodes: 5,
            target_objective: None,
            redraw_users_each_episode: true,
            single_slot_returns: true,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.learning_rate > 0.0) {
            return Err(ConfigError::invalid("trainer.learning_rate", "must be positive"));
        }
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return Err(ConfigError::invalid("trainer.clip_epsilon", "must lie in (0, 1)"));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(ConfigError::invalid("trainer.discount", "must lie in (0, 1)"));
        }
        if self.epochs_per_update == 0 {
            return Err(ConfigError::invalid("trainer.epochs_per_update", "must be at least 1"));
        }
        if self.update_interval == 0 {
            return Err(ConfigError::invalid("trainer.update_interval", "must be at least 1"));
        }
        if self.episode_length == 0 {
            return Err(ConfigError::invalid("trainer.episode_length", "must be at least 1"));
        }
        if self.max_episodes == 0 {
            return Err(ConfigError::invalid("trainer.max_episodes", "must be at least 1"));
        }
        if self.hidden_width == 0 {
            return Err(ConfigError::invalid("trainer.hidden_width", "must be at least 1"));
        }
        if self.eval_interval_episodes == 0 {
            return Err(ConfigError::invalid(
                "trainer.eval_interval_episodes",
                "must be at least 1",
            ));
        }
        if !(self.penalty_coeff >= 0.0) {
            return Err(ConfigError::invalid("trainer.penalty_coeff", "must be nonnegative"));
        }
        if !(self.value_loss_weight > 0.0) {
            return Err(ConfigError::invalid("trainer.value_loss_weight", "must be positive"));
        }
        if !(self.entropy_bonus_weight >= 0.0) {
            return Err(ConfigError::invalid(
                "trainer.entropy_bonus_weight",
                "must be nonnegative",
            ));
        }
        Ok(())
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub room: Room,
    pub scenario: ScenarioPreset,
    pub custom_aps: Vec<CustomAp>,
    pub user_count: usize,
    pub caps: CapacityLimits,
    pub mobility: MobilityConfig,
    pub lifi: LifiParams,
    pub wifi: WifiParams,
    pub channel_mode: ChannelMode,
    pub blockage: BlockageConfig,
    pub required_rate: RequiredRateConfig,
    pub reward_mode: RewardMode,
    /// Divisor applied to the sum rate before the capacity penalty.
    pub rate_scale: f64,
    pub solvers: Vec<SolverKind>,
    /// Refuse exhaustive search when (L+W)^K exceeds this many assignments.
    pub es_budget: u64,
    pub trainer: TrainerConfig,
    pub seed: u64,
    /// Slots evaluated after training (also the mobile comparison horizon).
    pub eval_horizon: usize,
    /// Parallel sweep workers; 0 uses the runtime default.
    pub workers: usize,
    pub output_dir: Option<String>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            room: Room::default(),
            scenario: ScenarioPreset::InterferenceFree,
            custom_aps: Vec::new(),
            user_count: 8,
            caps: CapacityLimits::default(),
            mobility: MobilityConfig::default(),
            lifi: LifiParams::default(),
            wifi: WifiParams::default(),
            channel_mode: ChannelMode::Deterministic,
            blockage: BlockageConfig::default(),
            required_rate: RequiredRateConfig::default(),
            reward_mode: RewardMode::SumRate,
            rate_scale: 1e8,
            solvers: alloc::vec![
                SolverKind::Es,
                SolverKind::Sss,
                SolverKind::Greedy,
                SolverKind::Sppo
            ],
            es_budget: 100_000_000,
            trainer: TrainerConfig::default(),
            seed: 1,
            eval_horizon: 1000,
            workers: 0,
            output_dir: None,
        }
    }
}

impl SimConfig {
    /// AP layout for the configured scenario, LiFi nodes first.
    pub fn ap_layout(&self) -> Result<Vec<ApNode>, ConfigError> {
        let ceiling = self.room.ceiling_height;
        let lifi_xy: &[(f64, f64)] = match self.scenario {
            ScenarioPreset::InterferenceFree => &[(2.5, 2.5), (2.5, 7.5), (7.5, 2.5), (7.5, 7.5)],
            ScenarioPreset::InterferenceProne => &[(3.5, 3.5), (3.5, 6.5), (6.5, 3.5), (6.5, 6.5)],
            ScenarioPreset::Dense => &[
                (3.5, 3.5),
                (3.5, 6.5),
                (5.0, 3.5),
                (5.0, 6.5),
                (6.5, 3.5),
                (6.5, 6.5),
            ],
            ScenarioPreset::Custom => {
                if self.custom_aps.is_empty() {
                    return Err(ConfigError::invalid(
                        "custom_aps",
                        "scenario = \"custom\" requires at least one AP",
                    ));
                }
                let mut nodes: Vec<ApNode> = Vec::with_capacity(self.custom_aps.len());
                let mut lifi: Vec<&CustomAp> = self.custom_aps.iter().collect();
                // LiFi-first ordering keeps AP indices stable across modules.
                lifi.sort_by_key(|ap| matches!(ap.kind, ApKind::Wifi));
                for (id, ap) in lifi.into_iter().enumerate() {
                    if !self.room.contains(ap.x, ap.y) {
                        return Err(ConfigError::invalid(
                            "custom_aps",
                            "AP position outside room footprint",
                        ));
                    }
                    nodes.push(ApNode {
                        id,
                        kind: ap.kind,
                        position: [ap.x, ap.y, ap.z],
                    });
                }
                if !nodes.iter().any(|n| n.kind == ApKind::Wifi) {
                    return Err(ConfigError::invalid("custom_aps", "need at least one WiFi AP"));
                }
                return Ok(nodes);
            }
        };
        let mut nodes: Vec<ApNode> = lifi_xy
            .iter()
            .enumerate()
            .map(|(id, &(x, y))| ApNode {
                id,
                kind: ApKind::Lifi,
                position: [x, y, ceiling],
            })
            .collect();
        nodes.push(ApNode {
            id: nodes.len(),
            kind: ApKind::Wifi,
            position: [self.room.width_x / 2.0, self.room.depth_y / 2.0, ceiling],
        });
        Ok(nodes)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.room.validate()?;
        if self.user_count == 0 {
            return Err(ConfigError::invalid("user_count", "must be at least 1"));
        }
        if self.caps.per_lifi == 0 {
            return Err(ConfigError::invalid("caps.per_lifi", "must be at least 1"));
        }
        if self.caps.per_wifi == 0 {
            return Err(ConfigError::invalid("caps.per_wifi", "must be at least 1"));
        }
        let (lo, hi) = self.mobility.speed_range;
        if !(lo > 0.0 && lo <= hi) {
            return Err(ConfigError::invalid(
                "mobility.speed_range",
                "requires 0 < min <= max",
            ));
        }
        if !(self.mobility.dt > 0.0) {
            return Err(ConfigError::invalid("mobility.dt", "must be positive"));
        }
        if !(self.mobility.pause_duration >= 0.0) {
            return Err(ConfigError::invalid("mobility.pause_duration", "must be nonnegative"));
        }
        self.lifi.validate()?;
        self.wifi.validate()?;
        if !(0.0..=1.0).contains(&self.blockage.rate) {
            return Err(ConfigError::invalid("blockage.rate", "must lie in [0, 1]"));
        }
        if !(self.blockage.attenuation >= 0.0 && self.blockage.attenuation <= 1.0) {
            return Err(ConfigError::invalid("blockage.attenuation", "must lie in [0, 1]"));
        }
        if !(self.required_rate.mean > 0.0)
            || !(self.required_rate.std_dev >= 0.0)
            || !(self.required_rate.floor > 0.0)
        {
            return Err(ConfigError::invalid(
                "required_rate",
                "mean and floor must be positive, std_dev nonnegative",
            ));
        }
        if !(self.rate_scale > 0.0) {
            return Err(ConfigError::invalid("rate_scale", "must be positive"));
        }
        if self.solvers.is_empty() {
            return Err(ConfigError::invalid("solvers", "must enable at least one solver"));
        }
        if self.es_budget == 0 {
            return Err(ConfigError::invalid("es_budget", "must be at least 1"));
        }
        if self.eval_horizon == 0 {
            return Err(ConfigError::invalid("eval_horizon", "must be at least 1"));
        }
        self.trainer.validate()?;
        self.ap_layout()?;
        Ok(())
    }
}

pub fn describe_unknown(field: &str) -> String {
    format!("unknown config key `{field}`")
}
