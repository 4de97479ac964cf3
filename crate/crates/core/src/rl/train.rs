//! Sequential-action training loop: one shared actor picks an AP for each
//! user in turn from that user's own SINR observation, the combined
//! association is scored by the environment, and the clipped-surrogate
//! update fires every `update_interval` collected slots.

use alloc::vec::Vec;
// With std in the crate graph (tests), inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::config::{MobilityMode, RewardMode, TrainerConfig};
use crate::env::{Association, NetworkEnv, SlotMetrics};
use crate::rl::mlp::{Activations, Adam, Mlp, MlpParams};
use crate::rl::ppo::{normalize_state, policy_forward, update, Memory, RlError, Transition, UpdateStats};
use crate::rng::RandomSource;

/// Actor and critic networks of one trained policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub actor: Mlp,
    pub critic: Mlp,
}

impl ActorCritic {
    /// Fresh networks: input and actor output sized to the AP count, two
    /// hidden layers of `hidden_width` units, scalar critic head.
    pub fn init(ap_count: usize, hidden_width: usize, rng: &mut RandomSource) -> Self {
        let actor = Mlp::new(&[ap_count, hidden_width, hidden_width, ap_count], rng);
        let critic = Mlp::new(&[ap_count, hidden_width, hidden_width, 1], rng);
        Self { actor, critic }
    }

    pub fn to_params(&self) -> PolicyParams {
        PolicyParams {
            actor: MlpParams::from(&self.actor),
            critic: MlpParams::from(&self.critic),
        }
    }

    pub fn from_params(params: PolicyParams) -> Result<Self, &'static str> {
        Ok(Self {
            actor: params.actor.into_mlp()?,
            critic: params.critic.into_mlp()?,
        })
    }
}

/// Serializable weights of both networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub actor: MlpParams,
    pub critic: MlpParams,
}

/// Per-user decisions for one slot.
#[derive(Debug, Clone)]
pub struct SelectedActions {
    pub association: Association,
    pub states: Vec<Vec<f64>>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
}

/// Walk the users in index order and let the shared actor choose an AP for
/// each from its own observation, assembling the combined association.
/// `rng: Some` samples from the policy (training); `None` takes the argmax
/// (deterministic evaluation).
pub fn select_actions_sequential(
    policy: &ActorCritic,
    env: &NetworkEnv,
    mut rng: Option<&mut RandomSource>,
) -> Result<SelectedActions, RlError> {
    let user_count = env.user_count();
    let mut assign = Vec::with_capacity(user_count);
    let mut states = Vec::with_capacity(user_count);
    let mut log_probs = Vec::with_capacity(user_count);
    let mut values = Vec::with_capacity(user_count);
    let mut critic_acts = Activations::default();
    for k in 0..user_count {
        let state = normalize_state(&env.observation(k))?;
        let probs = policy_forward(&policy.actor, &state)?;
        let action = match rng.as_deref_mut() {
            Some(r) => r.categorical(&probs),
            None => argmax(&probs),
        };
        let log_prob = probs[action].max(f64::MIN_POSITIVE).ln();
        let value = policy.critic.forward(&state, &mut critic_acts)[0];
        assign.push(action);
        states.push(state);
        log_probs.push(log_prob);
        values.push(value);
    }
    Ok(SelectedActions {
        association: Association::new(assign),
        states,
        log_probs,
        values,
    })
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Aggregate result of a deterministic policy evaluation.
#[derive(Debug, Clone)]
pub struct EvalStats {
    pub mean_sum_rate_bps: f64,
    pub mean_fairness: f64,
    pub mean_reward: f64,
    /// Fraction of evaluation slots with zero capacity overload.
    pub feasible_frac: f64,
    pub slots: Vec<SlotMetrics>,
    pub associations: Vec<Association>,
}

impl EvalStats {
    /// Scalar objective matching the environment's reward mode.
    pub fn objective(&self, mode: RewardMode) -> f64 {
        match mode {
            RewardMode::SumRate => self.mean_sum_rate_bps,
            RewardMode::Fairness => self.mean_fairness,
        }
    }
}

/// Run the argmax policy on a clone of the environment for `horizon` slots.
pub fn evaluate(
    policy: &ActorCritic,
    env: &NetworkEnv,
    horizon: usize,
) -> Result<EvalStats, RlError> {
    debug_assert!(horizon > 0);
    let mut env = env.clone();
    let mut slots = Vec::with_capacity(horizon);
    let mut associations = Vec::with_capacity(horizon);
    let (mut rate_acc, mut fair_acc, mut reward_acc, mut feasible) = (0.0, 0.0, 0.0, 0usize);
    for _ in 0..horizon {
        let selected = select_actions_sequential(policy, &env, None)?;
        let (_, metrics) = env.step(&selected.association)?;
        rate_acc += metrics.sum_rate_bps;
        fair_acc += metrics.fairness;
        reward_acc += metrics.reward;
        feasible += usize::from(metrics.feasible);
        slots.push(metrics);
        associations.push(selected.association);
    }
    let n = horizon as f64;
    Ok(EvalStats {
        mean_sum_rate_bps: rate_acc / n,
        mean_fairness: fair_acc / n,
        mean_reward: reward_acc / n,
        feasible_frac: feasible as f64 / n,
        slots,
        associations,
    })
}

/// Training outcome: final networks, the per-episode mean-reward curve, and
/// whether the early-stop target fired.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub policy: ActorCritic,
    pub episode_rewards: Vec<f64>,
    pub episodes_run: usize,
    pub early_stopped: bool,
    pub updates_applied: usize,
}

const EARLY_STOP_EVAL_SLOTS: usize = 25;

/// Train a policy on the environment. Episodes run for
/// `cfg.episode_length` slots; the update triggers whenever the stored slot
/// count reaches `cfg.update_interval`, intentionally spanning episode
/// boundaries. When `cfg.target_objective` is set, the deterministic policy
/// is probed every `cfg.eval_interval_episodes` episodes and training stops
/// once the objective is reached.
pub fn train(
    env: &mut NetworkEnv,
    cfg: &TrainerConfig,
    rng: &mut RandomSource,
) -> Result<TrainOutcome, RlError> {
    let mut init_rng = rng.derive("policy-init", 0);
    let mut action_rng = rng.derive("actions", 0);
    let mut policy = ActorCritic::init(env.ap_count(), cfg.hidden_width, &mut init_rng);
    let mut actor_opt = Adam::new(&policy.actor);
    let mut critic_opt = Adam::new(&policy.critic);
    let mut memory = Memory::new();
    let mut episode_rewards = Vec::with_capacity(cfg.max_episodes);
    let mut timestep = 0usize;
    let mut early_stopped = false;
    let mut updates_applied = 0usize;
    let mut last_update: Option<UpdateStats> = None;

    let redraw = cfg.redraw_users_each_episode
        && env.config().mobility.mode == MobilityMode::Rwp;

    'episodes: for episode in 0..cfg.max_episodes {
        if redraw && episode > 0 {
            env.redraw_users()?;
        }
        let mut reward_acc = 0.0;
        for slot_in_episode in 0..cfg.episode_length {
            let selected = select_actions_sequential(&policy, env, Some(&mut action_rng))?;
            let slot_index = env.slot();
            let (reward, _) = env.step(&selected.association)?;
            reward_acc += reward;
            let transitions: Vec<Transition> = selected
                .states
                .into_iter()
                .enumerate()
                .map(|(k, state)| Transition {
                    user_state: state,
                    action: selected.association.assign[k],
                    log_prob_old: selected.log_probs[k],
                    value_old: selected.values[k],
                    slot_reward: reward,
                    slot_index,
                    user_index: k,
                })
                .collect();
            let episode_end = slot_in_episode + 1 == cfg.episode_length;
            memory.push_slot(transitions, reward, cfg.single_slot_returns || episode_end);
            timestep += 1;
            if timestep >= cfg.update_interval {
                last_update = Some(update(
                    &mut policy.actor,
                    &mut policy.critic,
                    &mut actor_opt,
                    &mut critic_opt,
                    &mut memory,
                    cfg,
                )?);
                updates_applied += 1;
                timestep = 0;
            }
        }
        episode_rewards.push(reward_acc / cfg.episode_length as f64);

        if let Some(target) = cfg.target_objective {
            if (episode + 1) % cfg.eval_interval_episodes == 0 && updates_applied > 0 {
                let stats = evaluate(&policy, env, EARLY_STOP_EVAL_SLOTS)?;
                if stats.objective(env.config().reward_mode) >= target {
                    early_stopped = true;
                    break 'episodes;
                }
            }
        }
    }
    let _ = last_update;

    Ok(TrainOutcome {
        policy,
        episodes_run: episode_rewards.len(),
        episode_rewards,
        early_stopped,
        updates_applied,
    })
}
