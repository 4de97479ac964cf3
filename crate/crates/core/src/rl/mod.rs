//! Actor-critic learning machinery: dense networks with reverse-mode
//! gradients, the clipped-surrogate update, and the sequential per-user
//! training loop.

pub mod mlp;
pub mod ppo;
pub mod train;

pub use mlp::{Activations, Adam, Gradients, Mlp, MlpParams};
pub use ppo::{
    losses_and_grads,
    advantage, clip_ratio, discounted_returns, discounted_returns_with_resets, normalize_state,
    policy_forward, ppo_losses, update, Memory, PpoStats, RlError, Transition, UpdateStats,
};
pub use train::{
    evaluate, select_actions_sequential, train, ActorCritic, EvalStats, PolicyParams,
    SelectedActions, TrainOutcome,
};
