//! Standing finite-difference oracle: analytic actor and critic gradients
//! from the shared loss path must match central differences on randomized
//! small networks.

use liwa_core::config::TrainerConfig;
use liwa_core::rl::{advantage, policy_forward, ppo_losses, Gradients, Mlp, Transition};
use liwa_core::RandomSource;

const PERTURBATION: f64 = 1e-5;
const REL_TOL: f64 = 1e-4;

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(1e-6);
    (analytic - numeric).abs() / scale
}

struct Fixture {
    actor: Mlp,
    critic: Mlp,
    batch: Vec<Transition>,
    advantages: Vec<f64>,
    returns: Vec<f64>,
    cfg: TrainerConfig,
}

fn random_fixture(trial: u64, hidden: usize) -> Fixture {
    let mut rng = RandomSource::from_seed(7_000 + trial);
    let actions = 2 + (rng.uniform() * 4.0) as usize; // 2..=5 APs
    let actor = Mlp::new(
        &[actions, hidden, hidden, actions],
        &mut rng.derive("actor", trial),
    );
    let critic = Mlp::new(&[actions, hidden, hidden, 1], &mut rng.derive("critic", trial));
    let batch_size = 4 + (rng.uniform() * 8.0) as usize;
    let mut batch = Vec::with_capacity(batch_size);
    let mut returns = Vec::with_capacity(batch_size);
    for i in 0..batch_size {
        let state: Vec<f64> = (0..actions).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let probs = policy_forward(&actor, &state).unwrap();
        let action = i % actions;
        batch.push(Transition {
            user_state: state,
            action,
            log_prob_old: probs[action].ln() + rng.uniform_in(-0.3, 0.3),
            value_old: rng.uniform_in(-1.0, 1.0),
            slot_reward: 0.0,
            slot_index: i,
            user_index: 0,
        });
        returns.push(rng.uniform_in(-2.0, 2.0));
    }
    let values: Vec<f64> = batch.iter().map(|t| t.value_old).collect();
    let advantages = advantage(&returns, &values);
    let cfg = TrainerConfig {
        entropy_bonus_weight: 0.01,
        clip_epsilon: 0.1,
        ..TrainerConfig::default()
    };
    Fixture {
        actor,
        critic,
        batch,
        advantages,
        returns,
        cfg,
    }
}

fn analytic_grads(f: &Fixture) -> (Gradients, Gradients) {
    let mut a = Gradients::zeros_like(&f.actor);
    let mut c = Gradients::zeros_like(&f.critic);
    liwa_core::rl::ppo::losses_and_grads(
        &f.batch,
        &f.advantages,
        &f.returns,
        &f.actor,
        &f.critic,
        &f.cfg,
        Some((&mut a, &mut c)),
    );
    (a, c)
}

#[test]
fn gradients_match_central_differences_100_trials() {
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let hidden = if trial % 2 == 0 { 4 } else { 8 };
        let mut f = random_fixture(trial, hidden);
        let (a_grads, c_grads) = analytic_grads(&f);

        // Spot-check a deterministic subset of actor weights per trial (all
        // parameters of one layer) plus every actor bias, and the full
        // critic. Layers rotate across trials so all positions get covered.
        let layer = (trial as usize) % f.actor.layers.len();
        for p in 0..f.actor.layers[layer].w.len() {
            let orig = f.actor.layers[layer].w[p];
            f.actor.layers[layer].w[p] = orig + PERTURBATION;
            let (plus, _, _) = ppo_losses(
                &f.batch,
                &f.advantages,
                &f.returns,
                &f.actor,
                &f.critic,
                &f.cfg,
            );
            f.actor.layers[layer].w[p] = orig - PERTURBATION;
            let (minus, _, _) = ppo_losses(
                &f.batch,
                &f.advantages,
                &f.returns,
                &f.actor,
                &f.critic,
                &f.cfg,
            );
            f.actor.layers[layer].w[p] = orig;
            let numeric = (plus - minus) / (2.0 * PERTURBATION);
            let err = rel_err(a_grads.d_w[layer][p], numeric);
            worst = worst.max(err);
            assert!(
                err <= REL_TOL,
                "trial {trial} actor layer {layer} w[{p}]: rel err {err:.3e}"
            );
        }
        for layer in 0..f.actor.layers.len() {
            for p in 0..f.actor.layers[layer].b.len() {
                let orig = f.actor.layers[layer].b[p];
                f.actor.layers[layer].b[p] = orig + PERTURBATION;
                let (plus, _, _) = ppo_losses(
                    &f.batch,
                    &f.advantages,
                    &f.returns,
                    &f.actor,
                    &f.critic,
                    &f.cfg,
                );
                f.actor.layers[layer].b[p] = orig - PERTURBATION;
                let (minus, _, _) = ppo_losses(
                    &f.batch,
                    &f.advantages,
                    &f.returns,
                    &f.actor,
                    &f.critic,
                    &f.cfg,
                );
                f.actor.layers[layer].b[p] = orig;
                let numeric = (plus - minus) / (2.0 * PERTURBATION);
                let err = rel_err(a_grads.d_b[layer][p], numeric);
                worst = worst.max(err);
                assert!(
                    err <= REL_TOL,
                    "trial {trial} actor layer {layer} b[{p}]: rel err {err:.3e}"
                );
            }
        }

        let layer = (trial as usize) % f.critic.layers.len();
        for p in 0..f.critic.layers[layer].w.len() {
            let orig = f.critic.layers[layer].w[p];
            f.critic.layers[layer].w[p] = orig + PERTURBATION;
            let (_, plus, _) = ppo_losses(
                &f.batch,
                &f.advantages,
                &f.returns,
                &f.actor,
                &f.critic,
                &f.cfg,
            );
            f.critic.layers[layer].w[p] = orig - PERTURBATION;
            let (_, minus, _) = ppo_losses(
                &f.batch,
                &f.advantages,
                &f.returns,
                &f.actor,
                &f.critic,
                &f.cfg,
            );
            f.critic.layers[layer].w[p] = orig;
            let numeric = (plus - minus) / (2.0 * PERTURBATION);
            let err = rel_err(c_grads.d_w[layer][p], numeric);
            worst = worst.max(err);
            assert!(
                err <= REL_TOL,
                "trial {trial} critic layer {layer} w[{p}]: rel err {err:.3e}"
            );
        }
    }
    println!("worst relative error over 100 trials: {worst:.3e}");
}
