//! Clipped-surrogate PPO update.
//!
//! Per minibatch of `N` samples the minimised loss is
//!
//! ```text
//! L = −(1/N) Σ min(ρ·Â, clip(ρ, 1−ε, 1+ε)·Â)      (actor)
//!     −  c·(1/N) Σ H(π(·|s))                        (actor, entropy bonus)
//!     +  (1/N) Σ ½·(V(s) − R)²                       (critic)
//! ```
//!
//! with `ρ = π(a|s) / π_old(a|s)`. Actor and critic have separate
//! parameters, so each half of the gradient only touches its own network.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::policy::{entropy, log_softmax, PolicyNet};
use super::{OptimizerKind, PpoHyperParams, TrainError};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Batch {
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub old_log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Shift and scale to zero mean and unit variance (left as is when the
/// variance is zero).
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let sd = libm::sqrt(var);
    for a in adv.iter_mut() {
        *a -= mean;
        if sd > 1e-12 {
            *a /= sd;
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossTerms {
    pub total: f64,
    /// `−mean(min(ρÂ, clip(ρ)Â))`.
    pub policy: f64,
    pub entropy: f64,
    pub value: f64,
    /// Fraction of samples where the clipped branch was active.
    pub clip_fraction: f64,
    /// Samples whose applied surrogate exceeded `max(ρÂ, clip(ρ)Â)`; always 0.
    pub bound_violations: usize,
}

/// Loss terms and `(actor gradient, critic gradient)` over `indices` of `batch`.
pub fn loss_and_gradients(
    net: &PolicyNet,
    batch: &Batch,
    indices: &[usize],
    hp: &PpoHyperParams,
) -> (LossTerms, Vec<f64>, Vec<f64>) {
    let mut actor_grad = vec![0.0; net.actor.params().len()];
    let mut critic_grad = vec![0.0; net.critic.params().len()];
    let mut terms = LossTerms::default();
    let n = indices.len() as f64;
    let eps = hp.clip_range;
    let mut clipped = 0usize;
    for &i in indices {
        let obs = &batch.observations[i];
        let a = batch.actions[i];
        let adv = batch.advantages[i];

        let cache = net.actor.forward_cached(obs);
        let (logp, p) = log_softmax(cache.output());
        let ratio = libm::exp(logp[a] - batch.old_log_probs[i]);
        let unclipped = ratio * adv;
        let clipped_term = ratio.clamp(1.0 - eps, 1.0 + eps) * adv;
        let surrogate = unclipped.min(clipped_term);
        if surrogate > unclipped.max(clipped_term) {
            terms.bound_violations += 1;
        }
        let dsurr_dratio = if unclipped <= clipped_term { adv } else { 0.0 };
        if unclipped > clipped_term {
            clipped += 1;
        }
        let h = entropy(&logp, &p);
        terms.policy -= surrogate / n;
        terms.entropy += h / n;

        // ∂L/∂z_j = (1/N)[−∂surr/∂ρ · ρ(δ_aj − p_j) + c·p_j(log p_j + H)]
        let gout: Vec<f64> = p
            .iter()
            .zip(&logp)
            .enumerate()
            .map(|(j, (pj, lj))| {
                let onehot = if j == a { 1.0 } else { 0.0 };
                (-dsurr_dratio * ratio * (onehot - pj) + hp.entropy_weight * pj * (lj + h)) / n
            })
            .collect();
        net.actor.backward(&cache, &gout, &mut actor_grad);

        let vcache = net.critic.forward_cached(obs);
        let v = vcache.output()[0];
        let err = v - batch.returns[i];
        terms.value += 0.5 * err * err / n;
        net.critic.backward(&vcache, &[err / n], &mut critic_grad);
    }
    terms.clip_fraction = clipped as f64 / n;
    terms.total = terms.policy - hp.entropy_weight * terms.entropy + terms.value;
    (terms, actor_grad, critic_grad)
}

#[derive(Clone, Debug, PartialEq)]
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let c1 = 1.0 - libm::pow(B1, self.t as f64);
        let c2 = 1.0 - libm::pow(B2, self.t as f64);
        for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut())) {
            *m = B1 * *m + (1.0 - B1) * g;
            *v = B2 * *v + (1.0 - B2) * g * g;
            *p -= lr * (*m / c1) / (libm::sqrt(*v / c2) + EPS);
        }
    }
}

/// Optimiser state for one policy network.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    kind: OptimizerKind,
    actor: Option<Adam>,
    critic: Option<Adam>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, net: &PolicyNet) -> Self {
        let adam = |n| match kind {
            OptimizerKind::Adam => Some(Adam::new(n)),
            OptimizerKind::Sgd => None,
        };
        OptimizerState {
            kind,
            actor: adam(net.actor.params().len()),
            critic: adam(net.critic.params().len()),
        }
    }

    fn apply(&mut self, net: &mut PolicyNet, actor_grad: &[f64], critic_grad: &[f64], hp: &PpoHyperParams) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in net.actor.params_mut().iter_mut().zip(actor_grad) {
                    *p -= hp.actor_step_size * g;
                }
                for (p, g) in net.critic.params_mut().iter_mut().zip(critic_grad) {
                    *p -= hp.critic_step_size * g;
                }
            }
            OptimizerKind::Adam => {
                self.actor
                    .as_mut()
                    .expect("adam state")
                    .step(net.actor.params_mut(), actor_grad, hp.actor_step_size);
                self.critic
                    .as_mut()
                    .expect("adam state")
                    .step(net.critic.params_mut(), critic_grad, hp.critic_step_size);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct UpdateStats {
    /// Loss terms averaged over all minibatches of all epochs.
    pub mean: LossTerms,
    pub minibatches: usize,
}

/// `epochs_per_update` passes over the shuffled batch in minibatches of
/// `minibatch_size`. On a non-finite loss the network and optimiser are
/// restored to their state before the call and an error is returned.
pub fn ppo_update<R: Rng + ?Sized>(
    net: &mut PolicyNet,
    opt: &mut OptimizerState,
    batch: &Batch,
    hp: &PpoHyperParams,
    rng: &mut R,
) -> Result<UpdateStats, TrainError> {
    if batch.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let saved_net = net.clone();
    let saved_opt = opt.clone();
    let mut order: Vec<usize> = (0..batch.len()).collect();
    let mut stats = UpdateStats::default();
    for epoch in 0..hp.epochs_per_update {
        order.shuffle(rng);
        for chunk in order.chunks(hp.minibatch_size) {
            let (terms, ga, gc) = loss_and_gradients(net, batch, chunk, hp);
            let finite = terms.total.is_finite()
                && ga.iter().all(|g| g.is_finite())
                && gc.iter().all(|g| g.is_finite());
            if !finite {
                *net = saved_net;
                *opt = saved_opt;
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    loss: terms.total,
                });
            }
            opt.apply(net, &ga, &gc, hp);
            stats.minibatches += 1;
            stats.mean.total += terms.total;
            stats.mean.policy += terms.policy;
            stats.mean.entropy += terms.entropy;
            stats.mean.value += terms.value;
            stats.mean.clip_fraction += terms.clip_fraction;
            stats.mean.bound_violations += terms.bound_violations;
        }
    }
    let k = stats.minibatches as f64;
    stats.mean.total /= k;
    stats.mean.policy /= k;
    stats.mean.entropy /= k;
    stats.mean.value /= k;
    stats.mean.clip_fraction /= k;
    Ok(stats)
}
