//! Clipped-surrogate policy optimization over sequential per-user actions.
//!
//! Each slot contributes one transition per user; all of a slot's
//! transitions share the slot's combined reward. Returns are discounted
//! backward over the stored interval (resetting at episode ends), advantages
//! are return-minus-value normalized per batch, and both networks take
//! `epochs_per_update` full-batch first-order steps per update.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
// With std in the crate graph (tests), inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use num_traits::Float;

use crate::config::TrainerConfig;
use crate::env::EnvError;
use crate::rl::mlp::{Activations, Adam, Gradients, Mlp};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RlError {
    #[error("non-finite state entry at position {0}")]
    NonFiniteState(usize),
    #[error("non-finite loss (actor {actor_loss}, critic {critic_loss}); batch: {diagnostics}")]
    NonFiniteLoss {
        actor_loss: f64,
        critic_loss: f64,
        diagnostics: String,
    },
    #[error("non-finite parameters after update in the {0} network")]
    NonFiniteParams(&'static str),
    #[error("update called with an empty memory")]
    EmptyMemory,
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// SINR spans several orders of magnitude between LiFi and WiFi links, so
/// observations enter the network as 0.2 * log10(1 + sinr), keeping every
/// entry within tanh's responsive range.
pub fn normalize_state(raw_sinr: &[f64]) -> Result<Vec<f64>, RlError> {
    raw_sinr
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if !v.is_finite() {
                return Err(RlError::NonFiniteState(i));
            }
            Ok(0.2 * (1.0 + v.max(0.0)).log10())
        })
        .collect()
}

/// Action distribution of the actor at one (normalized) state: softmax over
/// the network's logits. Probabilities are strictly positive and sum to one
/// up to rounding.
pub fn policy_forward(actor: &Mlp, state: &[f64]) -> Result<Vec<f64>, RlError> {
    if let Some(bad) = state.iter().position(|v| !v.is_finite()) {
        return Err(RlError::NonFiniteState(bad));
    }
    let mut acts = Activations::default();
    let logits = actor.forward(state, &mut acts);
    Ok(softmax(logits))
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    probs
}

/// One per-user decision made inside a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Normalized per-AP SINR/SNR vector the user observed.
    pub user_state: Vec<f64>,
    pub action: usize,
    pub log_prob_old: f64,
    pub value_old: f64,
    /// The slot's combined reward, shared across its K transitions.
    pub slot_reward: f64,
    pub slot_index: usize,
    pub user_index: usize,
}

/// Fixed-interval experience store. Slots arrive in order; each slot pushes
/// exactly `users_per_slot` transitions plus its reward and episode-end flag.
#[derive(Debug, Clone, Default)]
pub struct Memory {
    pub transitions: Vec<Transition>,
    pub slot_rewards: Vec<f64>,
    pub slot_done: Vec<bool>,
    users_per_slot: usize,
}

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_slot(&mut self, transitions: Vec<Transition>, reward: f64, episode_end: bool) {
        debug_assert!(!transitions.is_empty());
        if self.users_per_slot == 0 {
            self.users_per_slot = transitions.len();
        }
        debug_assert_eq!(self.users_per_slot, transitions.len());
        self.transitions.extend(transitions);
        self.slot_rewards.push(reward);
        self.slot_done.push(episode_end);
    }

    pub fn slots(&self) -> usize {
        self.slot_rewards.len()
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn users_per_slot(&self) -> usize {
        self.users_per_slot
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
        self.slot_rewards.clear();
        self.slot_done.clear();
        self.users_per_slot = 0;
    }
}

/// Backward-accumulated discounted returns over one stored interval:
/// R_t = sum_{i >= t} beta^(i-t) r_i.
pub fn discounted_returns(rewards: &[f64], beta: f64) -> Vec<f64> {
    debug_assert!(beta > 0.0 && beta < 1.0);
    let mut returns = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + beta * acc;
        returns[t] = acc;
    }
    returns
}

/// Same accumulation, restarting whenever a slot closed an episode so value
/// never leaks across episode boundaries.
pub fn discounted_returns_with_resets(rewards: &[f64], dones: &[bool], beta: f64) -> Vec<f64> {
    debug_assert_eq!(rewards.len(), dones.len());
    let mut returns = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for t in (0..rewards.len()).rev() {
        if dones[t] {
            acc = 0.0;
        }
        acc = rewards[t] + beta * acc;
        returns[t] = acc;
    }
    returns
}

/// Return-minus-value advantages, normalized to zero mean and unit variance
/// over the batch (population statistics).
pub fn advantage(returns: &[f64], values: &[f64]) -> Vec<f64> {
    debug_assert_eq!(returns.len(), values.len());
    let raw: Vec<f64> = returns.iter().zip(values).map(|(r, v)| r - v).collect();
    normalize(&raw)
}

fn normalize(raw: &[f64]) -> Vec<f64> {
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let var = raw.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    raw.iter().map(|a| (a - mean) / (std + 1e-8)).collect()
}

/// Probability ratio clamped to [1 - eps, 1 + eps].
pub fn clip_ratio(tau: f64, eps: f64) -> f64 {
    tau.max(1.0 - eps).min(1.0 + eps)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PpoStats {
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub mean_entropy: f64,
    pub clip_fraction: f64,
    pub mean_ratio: f64,
}

/// Actor and critic losses on a batch. Advantages and returns are supplied
/// by the caller (see [`advantage`] / [`discounted_returns_with_resets`]).
///
/// actor loss  = -mean(min(tau A, clip(tau) A)) - w_entropy * mean(entropy)
/// critic loss = mean((V(s) - R)^2)
pub fn ppo_losses(
    batch: &[Transition],
    advantages: &[f64],
    returns: &[f64],
    actor: &Mlp,
    critic: &Mlp,
    cfg: &TrainerConfig,
) -> (f64, f64, PpoStats) {
    losses_and_grads(batch, advantages, returns, actor, critic, cfg, None)
}

/// Shared loss/gradient path: the same traversal either just evaluates the
/// losses or also accumulates parameter gradients, so the finite-difference
/// oracle exercises exactly the code the optimizer uses.
pub fn losses_and_grads(
    batch: &[Transition],
    advantages: &[f64],
    returns: &[f64],
    actor: &Mlp,
    critic: &Mlp,
    cfg: &TrainerConfig,
    mut grads: Option<(&mut Gradients, &mut Gradients)>,
) -> (f64, f64, PpoStats) {
    assert!(!batch.is_empty(), "empty PPO batch");
    assert_eq!(batch.len(), advantages.len());
    assert_eq!(batch.len(), returns.len());
    let n = batch.len() as f64;
    let eps = cfg.clip_epsilon;
    let w_entropy = cfg.entropy_bonus_weight;

    let mut surrogate_sum = 0.0;
    let mut entropy_sum = 0.0;
    let mut critic_sum = 0.0;
    let mut clipped = 0usize;
    let mut ratio_sum = 0.0;
    let mut actor_acts = Activations::default();
    let mut critic_acts = Activations::default();

    for (i, t) in batch.iter().enumerate() {
        let adv = advantages[i];
        let logits = actor.forward(&t.user_state, &mut actor_acts);
        let probs = softmax(logits);
        let log_prob_new = probs[t.action].max(f64::MIN_POSITIVE).ln();
        let tau = (log_prob_new - t.log_prob_old).exp();
        let surr_free = tau * adv;
        let surr_clip = clip_ratio(tau, eps) * adv;
        surrogate_sum += surr_free.min(surr_clip);
        if tau < 1.0 - eps || tau > 1.0 + eps {
            clipped += 1;
        }
        ratio_sum += tau;

        let entropy: f64 = probs
            .iter()
            .map(|&p| if p > 0.0 { -p * p.ln() } else { 0.0 })
            .sum();
        entropy_sum += entropy;

        let value = critic.forward(&t.user_state, &mut critic_acts)[0];
        let v_err = value - returns[i];
        critic_sum += v_err * v_err;

        if let Some((actor_grads, critic_grads)) = grads.as_mut() {
            // Unclipped branch active: d(min)/d(tau) = adv, else zero.
            let g_logp = if surr_free <= surr_clip {
                -adv * tau / n
            } else {
                0.0
            };
            let mut d_logits = vec![0.0; probs.len()];
            for (j, &p) in probs.iter().enumerate() {
                let indicator = if j == t.action { 1.0 } else { 0.0 };
                let mut g = g_logp * (indicator - p);
                if w_entropy > 0.0 && p > 0.0 {
                    g += w_entropy / n * p * (p.ln() + entropy);
                }
                d_logits[j] = g;
            }
            actor.backward(&t.user_state, &actor_acts, &d_logits, actor_grads);

            let d_value = [2.0 * v_err / n];
            critic.backward(&t.user_state, &critic_acts, &d_value, critic_grads);
        }
    }

    let actor_loss = -surrogate_sum / n - w_entropy * entropy_sum / n;
    let critic_loss = critic_sum / n;
    let stats = PpoStats {
        actor_loss,
        critic_loss,
        mean_entropy: entropy_sum / n,
        clip_fraction: clipped as f64 / n,
        mean_ratio: ratio_sum / n,
    };
    (actor_loss, critic_loss, stats)
}

#[derive(Debug, Clone, Default)]
pub struct UpdateStats {
    pub epochs: usize,
    pub first: PpoStats,
    pub last: PpoStats,
}

/// One policy/value update: compute returns and normalized advantages from
/// the stored interval, run `epochs_per_update` full-batch steps on both
/// networks, then clear the memory.
pub fn update(
    actor: &mut Mlp,
    critic: &mut Mlp,
    actor_opt: &mut Adam,
    critic_opt: &mut Adam,
    memory: &mut Memory,
    cfg: &TrainerConfig,
) -> Result<UpdateStats, RlError> {
    if memory.is_empty() {
        return Err(RlError::EmptyMemory);
    }
    let per_slot = memory.users_per_slot();
    let slot_returns =
        discounted_returns_with_resets(&memory.slot_rewards, &memory.slot_done, cfg.discount);
    let returns: Vec<f64> = memory
        .transitions
        .iter()
        .enumerate()
        .map(|(i, _)| slot_returns[i / per_slot])
        .collect();
    let values: Vec<f64> = memory.transitions.iter().map(|t| t.value_old).collect();
    let advantages = advantage(&returns, &values);

    let mut actor_grads = Gradients::zeros_like(actor);
    let mut critic_grads = Gradients::zeros_like(critic);
    let mut stats = UpdateStats {
        epochs: cfg.epochs_per_update,
        ..UpdateStats::default()
    };

    for epoch in 0..cfg.epochs_per_update {
        actor_grads.zero();
        critic_grads.zero();
        let (actor_loss, critic_loss, epoch_stats) = losses_and_grads(
            &memory.transitions,
            &advantages,
            &returns,
            actor,
            critic,
            cfg,
            Some((&mut actor_grads, &mut critic_grads)),
        );
        if !actor_loss.is_finite() || !critic_loss.is_finite() {
            return Err(RlError::NonFiniteLoss {
                actor_loss,
                critic_loss,
                diagnostics: batch_diagnostics(&advantages, &returns, memory),
            });
        }
        critic_grads.scale(cfg.value_loss_weight);
        actor_opt.step(actor, &actor_grads, cfg.learning_rate);
        critic_opt.step(critic, &critic_grads, cfg.learning_rate);
        if !actor.params_finite() {
            return Err(RlError::NonFiniteParams("actor"));
        }
        if !critic.params_finite() {
            return Err(RlError::NonFiniteParams("critic"));
        }
        if epoch == 0 {
            stats.first = epoch_stats.clone();
        }
        stats.last = epoch_stats;
    }
    memory.clear();
    Ok(stats)
}

fn batch_diagnostics(advantages: &[f64], returns: &[f64], memory: &Memory) -> String {
    let span = |xs: &[f64]| {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (a_lo, a_hi) = span(advantages);
    let (r_lo, r_hi) = span(returns);
    let (rw_lo, rw_hi) = span(&memory.slot_rewards);
    format!(
        "{} transitions over {} slots; adv [{a_lo:.3e}, {a_hi:.3e}], returns [{r_lo:.3e}, {r_hi:.3e}], slot rewards [{rw_lo:.3e}, {rw_hi:.3e}]",
        memory.len(),
        memory.slots(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    fn tiny_actor(seed: u64, dims: &[usize]) -> Mlp {
        Mlp::new(dims, &mut RandomSource::from_seed(seed))
    }

    fn transition(state: Vec<f64>, action: usize, log_prob_old: f64, value_old: f64) -> Transition {
        Transition {
            user_state: state,
            action,
            log_prob_old,
            value_old,
            slot_reward: 0.0,
            slot_index: 0,
            user_index: 0,
        }
    }

    #[test]
    fn fresh_policy_is_near_uniform() {
        let actor = tiny_actor(1, &[5, 16, 16, 5]);
        let probs = policy_forward(&actor, &[0.5, 0.2, 0.8, 0.1, 0.4]).unwrap();
        for &p in &probs {
            assert!((p - 0.2).abs() < 0.02, "prob {p}");
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let actor = tiny_actor(2, &[4, 8, 8, 4]);
        let mut rng = RandomSource::from_seed(9);
        for _ in 0..200 {
            let state: Vec<f64> = (0..4).map(|_| rng.uniform_in(-2.0, 2.0)).collect();
            let probs = policy_forward(&actor, &state).unwrap();
            let total: f64 = probs.iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
            assert!(probs.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn non_finite_state_rejected() {
        let actor = tiny_actor(3, &[2, 4, 4, 2]);
        assert_eq!(
            policy_forward(&actor, &[0.1, f64::NAN]),
            Err(RlError::NonFiniteState(1))
        );
    }

    #[test]
    fn permuted_input_with_permuted_first_layer_weights() {
        // Wiring identity: permuting the state entries while permuting the
        // first layer's input columns the same way leaves logits unchanged.
        let actor = tiny_actor(4, &[4, 8, 8, 4]);
        let state = [0.3, -0.1, 0.7, 0.2];
        let perm = [2usize, 0, 3, 1];

        let mut permuted = actor.clone();
        let layer = &mut permuted.layers[0];
        let mut new_w = layer.w.clone();
        for o in 0..layer.out_dim {
            for (new_col, &src_col) in perm.iter().enumerate() {
                new_w[o * layer.in_dim + new_col] = layer.w[o * layer.in_dim + src_col];
            }
        }
        layer.w = new_w;
        let perm_state: Vec<f64> = perm.iter().map(|&i| state[i]).collect();

        let base = policy_forward(&actor, &state).unwrap();
        let swapped = policy_forward(&permuted, &perm_state).unwrap();
        for (a, b) in base.iter().zip(&swapped) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_invariance_of_softmax_logits() {
        let logits = [0.3, -1.2, 2.0];
        let shifted: Vec<f64> = logits.iter().map(|z| z + 7.5).collect();
        let a = softmax(&logits);
        let b = softmax(&shifted);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn discounted_returns_closed_form() {
        let r = discounted_returns(&[1.0, 1.0, 1.0], 0.5);
        assert_eq!(r, vec![1.75, 1.5, 1.0]);

        let nearly_zero = discounted_returns(&[3.0, -2.0, 5.0], 1e-12);
        for (got, want) in nearly_zero.iter().zip([3.0, -2.0, 5.0]) {
            assert!((got - want).abs() < 1e-9);
        }

        assert_eq!(discounted_returns(&[4.2], 0.9), vec![4.2]);
    }

    #[test]
    fn resets_split_episodes() {
        let rewards = [1.0, 1.0, 1.0, 1.0];
        let dones = [false, true, false, true];
        let r = discounted_returns_with_resets(&rewards, &dones, 0.5);
        assert_eq!(r, vec![1.5, 1.0, 1.5, 1.0]);

        // Without dones the two functions agree.
        let plain = discounted_returns(&rewards, 0.5);
        let no_dones = discounted_returns_with_resets(&rewards, &[false; 4], 0.5);
        assert_eq!(plain, no_dones);
    }

    #[test]
    fn advantage_examples() {
        // Raw return-minus-value before normalization.
        let raw: Vec<f64> = [10.0f64].iter().zip([7.0]).map(|(r, v)| r - v).collect();
        assert_eq!(raw[0], 3.0);

        // values == returns -> all raw advantages zero, normalized stays zero.
        let adv = advantage(&[2.0, 2.0, 2.0], &[2.0, 2.0, 2.0]);
        assert!(adv.iter().all(|a| a.abs() < 1e-9));

        // Batch (1, 3) normalizes to (-1, 1).
        let adv = advantage(&[1.0, 3.0], &[0.0, 0.0]);
        assert!((adv[0] + 1.0).abs() < 1e-7);
        assert!((adv[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn clip_ratio_cases() {
        assert_eq!(clip_ratio(1.25, 0.1), 1.1);
        assert_eq!(clip_ratio(0.85, 0.1), 0.9);
        assert_eq!(clip_ratio(1.0, 0.1), 1.0);
    }

    fn loss_cfg(entropy: f64) -> TrainerConfig {
        TrainerConfig {
            entropy_bonus_weight: entropy,
            ..TrainerConfig::default()
        }
    }

    #[test]
    fn identical_policies_give_zero_surrogate() {
        let actor = tiny_actor(5, &[3, 8, 8, 3]);
        let critic = tiny_actor(6, &[3, 8, 8, 1]);
        let mut rng = RandomSource::from_seed(11);
        let mut batch = Vec::new();
        let mut values = Vec::new();
        for i in 0..16 {
            let state: Vec<f64> = (0..3).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            let probs = policy_forward(&actor, &state).unwrap();
            let action = i % 3;
            batch.push(transition(state, action, probs[action].ln(), 0.0));
            values.push(0.0);
        }
        let returns: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let adv = advantage(&returns, &values);
        let (actor_loss, _, stats) =
            ppo_losses(&batch, &adv, &returns, &actor, &critic, &loss_cfg(0.0));
        // tau = 1 everywhere, so the surrogate is -mean(adv) = 0 after
        // normalization.
        assert!(actor_loss.abs() < 1e-9, "actor loss {actor_loss}");
        assert!((stats.mean_ratio - 1.0).abs() < 1e-9);
        assert_eq!(stats.clip_fraction, 0.0);
    }

    #[test]
    fn perfect_critic_gives_zero_loss() {
        let actor = tiny_actor(7, &[2, 4, 4, 2]);
        let critic = tiny_actor(8, &[2, 4, 4, 1]);
        let state = vec![0.2, -0.4];
        let mut acts = Activations::default();
        let v = critic.forward(&state, &mut acts)[0];
        let batch = vec![transition(state, 0, -0.5, v)];
        let (_, critic_loss, _) =
            ppo_losses(&batch, &[0.0], &[v], &actor, &critic, &loss_cfg(0.0));
        assert!(critic_loss.abs() < 1e-12);
    }

    #[test]
    fn clipped_branch_contribution() {
        // Single transition with adv > 0 and tau = 1.5 at eps = 0.1: the
        // clipped branch pins the surrogate at 1.1 * adv.
        let actor = tiny_actor(9, &[2, 4, 4, 2]);
        let critic = tiny_actor(10, &[2, 4, 4, 1]);
        let state = vec![0.1, 0.3];
        let probs = policy_forward(&actor, &state).unwrap();
        let action = 0;
        // Choose log_prob_old so that tau = p_new / p_old = 1.5.
        let log_prob_old = (probs[action] / 1.5).ln();
        let adv = 2.0;
        let batch = vec![transition(state, action, log_prob_old, 0.0)];
        let (actor_loss, _, stats) =
            ppo_losses(&batch, &[adv], &[0.0], &actor, &critic, &loss_cfg(0.0));
        assert!((actor_loss + 1.1 * adv).abs() < 1e-9, "loss {actor_loss}");
        assert_eq!(stats.clip_fraction, 1.0);
    }

    #[test]
    fn zero_advantage_zero_entropy_leaves_actor_unchanged() {
        let mut actor = tiny_actor(11, &[2, 4, 4, 2]);
        let mut critic = tiny_actor(12, &[2, 4, 4, 1]);
        let before = actor.clone();
        let mut memory = Memory::new();
        // Constant rewards and values chosen so every advantage is zero.
        for slot in 0..4 {
            let state = vec![0.5, -0.5];
            let probs = policy_forward(&actor, &state).unwrap();
            let t = Transition {
                user_state: state,
                action: 0,
                log_prob_old: probs[0].ln(),
                value_old: 0.0,
                slot_reward: 0.0,
                slot_index: slot,
                user_index: 0,
            };
            memory.push_slot(vec![t], 0.0, false);
        }
        let cfg = TrainerConfig {
            entropy_bonus_weight: 0.0,
            epochs_per_update: 3,
            ..TrainerConfig::default()
        };
        let mut a_opt = Adam::new(&actor);
        let mut c_opt = Adam::new(&critic);
        update(&mut actor, &mut critic, &mut a_opt, &mut c_opt, &mut memory, &cfg).unwrap();
        assert_eq!(actor, before);
        assert!(memory.is_empty());
    }

    #[test]
    fn update_with_entropy_moves_actor() {
        let mut actor = tiny_actor(13, &[2, 4, 4, 2]);
        let mut critic = tiny_actor(14, &[2, 4, 4, 1]);
        let before = actor.clone();
        let mut memory = Memory::new();
        for slot in 0..4 {
            let state = vec![0.5, -0.5];
            let probs = policy_forward(&actor, &state).unwrap();
            memory.push_slot(
                vec![Transition {
                    user_state: state,
                    action: 0,
                    log_prob_old: probs[0].ln(),
                    value_old: 0.0,
                    slot_reward: 0.0,
                    slot_index: slot,
                    user_index: 0,
                }],
                0.0,
                false,
            );
        }
        let cfg = TrainerConfig {
            entropy_bonus_weight: 0.01,
            epochs_per_update: 1,
            ..TrainerConfig::default()
        };
        let mut a_opt = Adam::new(&actor);
        let mut c_opt = Adam::new(&critic);
        update(&mut actor, &mut critic, &mut a_opt, &mut c_opt, &mut memory, &cfg).unwrap();
        assert_ne!(actor, before);
    }

    #[test]
    fn memory_bookkeeping() {
        let mut memory = Memory::new();
        for slot in 0..3 {
            let ts = (0..2)
                .map(|_| transition(vec![0.0, 0.0], 0, -0.7, 0.0))
                .map(|mut t| {
                    t.slot_index = slot;
                    t
                })
                .collect();
            memory.push_slot(ts, 1.0, slot == 2);
        }
        assert_eq!(memory.slots(), 3);
        assert_eq!(memory.len(), 6);
        assert_eq!(memory.users_per_slot(), 2);
        memory.clear();
        assert_eq!(memory.len(), 0);
        assert_eq!(memory.slots(), 0);
    }

    #[test]
    fn gradient_check_both_networks() {
        // Central finite differences over every parameter of a small
        // actor-critic pair, against the shared analytic path.
        let dims_actor = [3usize, 4, 4, 3];
        let dims_critic = [3usize, 4, 4, 1];
        let mut rng = RandomSource::from_seed(99);
        let actor = tiny_actor(15, &dims_actor);
        let critic = tiny_actor(16, &dims_critic);
        let cfg = loss_cfg(0.01);

        let mut batch = Vec::new();
        for i in 0..6 {
            let state: Vec<f64> = (0..3).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
            let probs = policy_forward(&actor, &state).unwrap();
            let action = i % 3;
            // Perturb old log-probs so ratios are not trivially 1.
            let log_prob_old = probs[action].ln() + rng.uniform_in(-0.2, 0.2);
            batch.push(transition(state, action, log_prob_old, rng.uniform()));
        }
        let returns: Vec<f64> = (0..6).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let values: Vec<f64> = batch.iter().map(|t| t.value_old).collect();
        let adv = advantage(&returns, &values);

        let mut a_grads = Gradients::zeros_like(&actor);
        let mut c_grads = Gradients::zeros_like(&critic);
        losses_and_grads(
            &batch,
            &adv,
            &returns,
            &actor,
            &critic,
            &cfg,
            Some((&mut a_grads, &mut c_grads)),
        );

        let h = 1e-5;
        let mut actor_fd = actor.clone();
        for layer in 0..actor_fd.layers.len() {
            for p in 0..actor_fd.layers[layer].w.len() {
                let orig = actor_fd.layers[layer].w[p];
                actor_fd.layers[layer].w[p] = orig + h;
                let (plus, _, _) = ppo_losses(&batch, &adv, &returns, &actor_fd, &critic, &cfg);
                actor_fd.layers[layer].w[p] = orig - h;
                let (minus, _, _) = ppo_losses(&batch, &adv, &returns, &actor_fd, &critic, &cfg);
                actor_fd.layers[layer].w[p] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                let analytic = a_grads.d_w[layer][p];
                let scale = analytic.abs().max(numeric.abs()).max(1e-6);
                assert!(
                    (analytic - numeric).abs() / scale < 1e-4,
                    "actor layer {layer} w[{p}]: analytic {analytic} vs numeric {numeric}"
                );
            }
        }
        let mut critic_fd = critic.clone();
        for layer in 0..critic_fd.layers.len() {
            for p in 0..critic_fd.layers[layer].b.len() {
                let orig = critic_fd.layers[layer].b[p];
                critic_fd.layers[layer].b[p] = orig + h;
                let (_, plus, _) = ppo_losses(&batch, &adv, &returns, &actor, &critic_fd, &cfg);
                critic_fd.layers[layer].b[p] = orig - h;
                let (_, minus, _) = ppo_losses(&batch, &adv, &returns, &actor, &critic_fd, &cfg);
                critic_fd.layers[layer].b[p] = orig;
                let numeric = (plus - minus) / (2.0 * h);
                let analytic = c_grads.d_b[layer][p];
                let scale = analytic.abs().max(numeric.abs()).max(1e-6);
                assert!(
                    (analytic - numeric).abs() / scale < 1e-4,
                    "critic layer {layer} b[{p}]: analytic {analytic} vs numeric {numeric}"
                );
            }
        }
    }
}
