//! Desk-scale simulator and solver suite for user-to-access-point
//! association in hybrid LiFi/WiFi indoor networks.
//!
//! The crate models the optical and radio downlink channels, the
//! capacity-constrained sum-rate association problem, three reference
//! solvers (exhaustive search, signal-strength selection, capacity-aware
//! greedy), and a sequential-PPO learner built on a from-scratch MLP with
//! reverse-mode gradients. Everything is deterministic given a seed.
//!
//! The crate is `no_std` (with `alloc`); file IO, CSV export, and the CLI
//! live in the companion `liwa-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod channel;
pub mod config;
pub mod env;
pub mod geometry;
pub mod rl;
pub mod rng;
pub mod solvers;

pub use channel::{ChannelError, ChannelSnapshot, LifiParams, Matrix, WifiParams};
pub use config::{
    CapacityLimits, ChannelMode, ConfigError, MobilityMode, RewardMode, ScenarioPreset, SimConfig,
    SolverKind, TrainerConfig,
};
pub use env::{Association, EnvError, NetworkEnv, SlotMetrics, Topology};
pub use geometry::{ApKind, ApNode, Room, UserState};
pub use rng::RandomSource;
pub use solvers::{exhaustive_search, greedy_capacity_aware, sss, SolverError, SolverResult};
