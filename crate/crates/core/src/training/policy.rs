//! Actor-critic policy with separate actor and critic parameter sets.

use alloc::vec::Vec;

use rand::Rng;

use super::mlp::Mlp;

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNet {
    pub actor: Mlp,
    pub critic: Mlp,
}

/// `(log_softmax, softmax)` of `logits`, numerically stable.
pub fn log_softmax(logits: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|z| libm::exp(z - max)).sum();
    let lse = max + libm::log(sum);
    let logp: Vec<f64> = logits.iter().map(|z| z - lse).collect();
    let p = logp.iter().map(|l| libm::exp(*l)).collect();
    (logp, p)
}

/// Shannon entropy (nats) from log-probabilities and probabilities.
pub fn entropy(logp: &[f64], p: &[f64]) -> f64 {
    -p.iter().zip(logp).map(|(pi, li)| pi * li).sum::<f64>()
}

/// Result of sampling the policy for one observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionSample {
    pub action: usize,
    pub log_prob: f64,
    pub value: f64,
}

impl PolicyNet {
    /// Actor `obs → hidden… → actions`, critic `obs → hidden… → 1`.
    pub fn new<R: Rng + ?Sized>(obs_len: usize, hidden: &[usize], actions: usize, rng: &mut R) -> PolicyNet {
        let mut actor_sizes = Vec::with_capacity(hidden.len() + 2);
        actor_sizes.push(obs_len);
        actor_sizes.extend_from_slice(hidden);
        let mut critic_sizes = actor_sizes.clone();
        actor_sizes.push(actions);
        critic_sizes.push(1);
        PolicyNet {
            actor: Mlp::new(&actor_sizes, 0.01, rng),
            critic: Mlp::new(&critic_sizes, 1.0, rng),
        }
    }

    pub fn obs_len(&self) -> usize {
        self.actor.input_len()
    }

    pub fn actions(&self) -> usize {
        self.actor.output_len()
    }

    /// Hidden layer widths.
    pub fn hidden(&self) -> &[usize] {
        let s = self.actor.sizes();
        &s[1..s.len() - 1]
    }

    pub fn probabilities(&self, obs: &[f64]) -> Vec<f64> {
        log_softmax(&self.actor.forward(obs)).1
    }

    pub fn value(&self, obs: &[f64]) -> f64 {
        self.critic.forward(obs)[0]
    }

    /// Most probable action, lowest index on ties.
    pub fn greedy(&self, obs: &[f64]) -> usize {
        let logits = self.actor.forward(obs);
        let mut best = 0;
        for (i, z) in logits.iter().enumerate() {
            if *z > logits[best] {
                best = i;
            }
        }
        best
    }

    pub fn sample<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> ActionSample {
        let (logp, p) = log_softmax(&self.actor.forward(obs));
        let u: f64 = rng.gen_range(0.0..1.0);
        let mut acc = 0.0;
        let mut action = p.len() - 1;
        for (i, pi) in p.iter().enumerate() {
            acc += pi;
            if u < acc {
                action = i;
                break;
            }
        }
        ActionSample {
            action,
            log_prob: logp[action],
            value: self.value(obs),
        }
    }

    /// Actor parameters followed by critic parameters.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut v = self.actor.params().to_vec();
        v.extend_from_slice(self.critic.params());
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::episode_rng;

    #[test]
    fn distribution_is_valid() {
        let mut rng = episode_rng(0);
        let net = PolicyNet::new(6, &[8], 5, &mut rng);
        let obs = [0.1, -0.2, 0.3, 0.9, -1.0, 0.0];
        let p = net.probabilities(&obs);
        assert!(p.iter().all(|x| *x >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_softmax_extreme_logits() {
        let (logp, p) = log_softmax(&[1000.0, 0.0, -1000.0]);
        assert!(logp.iter().all(|l| l.is_finite()));
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(entropy(&logp, &p).is_finite());
    }

    #[test]
    fn sampling_follows_probabilities() {
        let mut rng = episode_rng(1);
        let mut net = PolicyNet::new(1, &[], 2, &mut rng);
        // logits = bias only: [ln 3, 0] → p = [0.75, 0.25]
        let params = net.actor.params_mut();
        params[0] = 0.0;
        params[1] = 0.0;
        params[2] = 3.0f64.ln();
        params[3] = 0.0;
        let hits = (0..20_000).filter(|_| net.sample(&[0.5], &mut rng).action == 0).count();
        assert!((hits as f64 / 20_000.0 - 0.75).abs() < 0.015);
        assert_eq!(net.greedy(&[0.5]), 0);
    }
}
