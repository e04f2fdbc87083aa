//! Rollout buffers and generalized advantage estimation.

use alloc::vec;
use alloc::vec::Vec;

use super::TrainError;

/// Per-tick rollout data of one learner. `done` marks the last tick of an
/// episode or of an agent's life.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub rewards: Vec<f64>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn push(&mut self, obs: Vec<f64>, action: usize, log_prob: f64, reward: f64, value: f64, done: bool) {
        self.observations.push(obs);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.rewards.push(reward);
        self.values.push(value);
        self.dones.push(done);
    }

    pub fn last_done(&self) -> bool {
        self.dones.last().copied().unwrap_or(true)
    }

    pub fn clear(&mut self) {
        *self = Trajectory::default();
    }
}

/// Advantages and return targets by backward recursion:
/// `δ_t = r_t + γ·V_{t+1}·(1 − done_t) − V_t`,
/// `A_t = δ_t + γλ·(1 − done_t)·A_{t+1}`, `R_t = A_t + V_t`.
/// `bootstrap_value` stands in for `V_T` after the last tick.
pub fn compute_gae(
    traj: &Trajectory,
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), TrainError> {
    let n = traj.len();
    if n == 0 {
        return Err(TrainError::EmptyTrajectory);
    }
    let mut adv = vec![0.0; n];
    let mut next_value = bootstrap_value;
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let live = if traj.dones[t] { 0.0 } else { 1.0 };
        let delta = traj.rewards[t] + gamma * next_value * live - traj.values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
        next_value = traj.values[t];
    }
    let returns = adv.iter().zip(&traj.values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::episode_rng;
    use rand::Rng;

    fn random_traj(len: usize, seed: u64) -> (Trajectory, f64) {
        let mut rng = episode_rng(seed);
        let mut t = Trajectory::default();
        for _ in 0..len {
            let done = rng.gen_bool(0.2);
            t.push(Vec::new(), 0, 0.0, rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0), done);
        }
        (t, rng.gen_range(-2.0..2.0))
    }

    /// Explicit sum `Σ_l (γλ)^l δ_{t+l}`, stopping after the first done.
    fn double_sum(t: &Trajectory, boot: f64, gamma: f64, lambda: f64) -> Vec<f64> {
        let n = t.len();
        let next_v = |i: usize| if i + 1 < n { t.values[i + 1] } else { boot };
        let delta = |i: usize| {
            let live = if t.dones[i] { 0.0 } else { 1.0 };
            t.rewards[i] + gamma * next_v(i) * live - t.values[i]
        };
        (0..n)
            .map(|s| {
                let mut total = 0.0;
                let mut weight = 1.0;
                for i in s..n {
                    total += weight * delta(i);
                    if t.dones[i] {
                        break;
                    }
                    weight *= gamma * lambda;
                }
                total
            })
            .collect()
    }

    #[test]
    fn lambda_zero_is_td_residual() {
        let (t, boot) = random_traj(12, 1);
        let (adv, ret) = compute_gae(&t, boot, 0.99, 0.0).unwrap();
        let oracle = double_sum(&t, boot, 0.99, 0.0);
        for i in 0..t.len() {
            assert_eq!(adv[i], oracle[i]);
            assert_eq!(ret[i], adv[i] + t.values[i]);
        }
    }

    #[test]
    fn lambda_one_zero_values_is_reward_to_go() {
        let mut t = Trajectory::default();
        let rewards = [1.0, -0.5, 2.0, 0.25];
        for (i, r) in rewards.iter().enumerate() {
            t.push(Vec::new(), 0, 0.0, *r, 0.0, i == 3);
        }
        let (adv, _) = compute_gae(&t, 0.0, 0.9, 1.0).unwrap();
        for (s, a) in adv.iter().enumerate() {
            let rtg: f64 = (s..4).map(|i| 0.9f64.powi((i - s) as i32) * rewards[i]).sum();
            assert!((a - rtg).abs() < 1e-15);
        }
    }

    #[test]
    fn recursion_matches_double_sum() {
        for seed in 0..100 {
            let (t, boot) = random_traj(10, seed);
            let (adv, _) = compute_gae(&t, boot, 0.99, 0.95).unwrap();
            let oracle = double_sum(&t, boot, 0.99, 0.95);
            for i in 0..10 {
                assert!((adv[i] - oracle[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn empty_is_error() {
        assert_eq!(
            compute_gae(&Trajectory::default(), 0.0, 0.9, 0.9),
            Err(TrainError::EmptyTrajectory)
        );
    }
}
