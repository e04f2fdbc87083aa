//! Episode metrics: per-agent undiscounted rewards and capture counts.
//!
//! Rewards are tallied per [`AgentTag`] (kind + slot), so a prey that is
//! captured and respawned keeps accumulating into the same slot.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::env::{AgentKind, AgentTag, StepResult};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeMetrics {
    pub rewards: BTreeMap<AgentTag, f64>,
    pub captures: u64,
    pub episode_length: u64,
    pub seed: u64,
}

impl EpisodeMetrics {
    pub fn new(seed: u64) -> Self {
        EpisodeMetrics {
            seed,
            ..Default::default()
        }
    }

    pub fn accumulate(&mut self, step: &StepResult) {
        for (id, reward) in &step.rewards {
            let tag = step.tags[id];
            *self.rewards.entry(tag).or_insert(0.0) += reward;
        }
        self.captures += step.capture_events.len() as u64;
        self.episode_length += 1;
    }

    /// Reward sums of every slot of `kind`, in slot order.
    pub fn rewards_of(&self, kind: AgentKind) -> Vec<f64> {
        self.rewards
            .iter()
            .filter(|(t, _)| t.kind == kind)
            .map(|(_, r)| *r)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Deviation {
    /// Divide by N.
    #[default]
    Population,
    /// Divide by N − 1 (0 for a single value).
    Sample,
}

/// `(mean, standard deviation)` of a slice.
pub fn mean_sd(values: &[f64], mode: Deviation) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let denom = match mode {
        Deviation::Population => n,
        Deviation::Sample if values.len() > 1 => n - 1.0,
        Deviation::Sample => 1.0,
    };
    Some((mean, libm::sqrt(ss / denom)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AggregateError {
    NoEpisodes,
    NoAgents,
}

impl fmt::Display for AggregateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregateError::NoEpisodes => f.write_str("cannot aggregate an empty episode list"),
            AggregateError::NoAgents => f.write_str("no agents of the requested kind"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for AggregateError {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aggregate {
    pub mean_reward: f64,
    pub sd_reward: f64,
    pub mean_captures: f64,
}

/// Mean and standard deviation of reward sums over the agents of `kind`,
/// computed per episode and then averaged over the given episodes (one per
/// seed for the same episode index).
pub fn aggregate(episodes: &[EpisodeMetrics], kind: AgentKind, mode: Deviation) -> Result<Aggregate, AggregateError> {
    if episodes.is_empty() {
        return Err(AggregateError::NoEpisodes);
    }
    let mut mean = 0.0;
    let mut sd = 0.0;
    let mut captures = 0.0;
    for ep in episodes {
        let (m, s) = mean_sd(&ep.rewards_of(kind), mode).ok_or(AggregateError::NoAgents)?;
        mean += m;
        sd += s;
        captures += ep.captures as f64;
    }
    let n = episodes.len() as f64;
    Ok(Aggregate {
        mean_reward: mean / n,
        sd_reward: sd / n,
        mean_captures: captures / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::{CollisionEvent, CollisionKind};
    use crate::env::AgentId;
    use crate::geometry::Vec2;

    fn tag(kind: AgentKind, slot: u32) -> AgentTag {
        AgentTag { kind, slot }
    }

    fn episode(rewards: &[(AgentKind, u32, f64)], captures: u64) -> EpisodeMetrics {
        EpisodeMetrics {
            rewards: rewards.iter().map(|(k, s, r)| (tag(*k, *s), *r)).collect(),
            captures,
            episode_length: 1,
            seed: 0,
        }
    }

    fn step(rewards: &[(u32, AgentKind, u32, f64)], captures: usize) -> StepResult {
        StepResult {
            tick: 1,
            observations: BTreeMap::new(),
            rewards: rewards.iter().map(|(id, _, _, r)| (AgentId(*id), *r)).collect(),
            tags: rewards.iter().map(|(id, k, s, _)| (AgentId(*id), tag(*k, *s))).collect(),
            terminated: false,
            horizon_reached: false,
            capture_events: (0..captures)
                .map(|_| CollisionEvent {
                    kind: CollisionKind::Capture,
                    agent_a: AgentId(0),
                    agent_b: AgentId(1),
                    location: Vec2::ZERO,
                    tick: 0,
                })
                .collect(),
            bounce_events: Vec::new(),
            died: Vec::new(),
            spawned: Vec::new(),
        }
    }

    #[test]
    fn empty_episode() {
        let m = EpisodeMetrics::new(3);
        assert!(m.rewards.is_empty());
        assert_eq!(m.captures, 0);
    }

    #[test]
    fn survival_sum() {
        let mut m = EpisodeMetrics::new(0);
        for _ in 0..3000 {
            m.accumulate(&step(&[(1, AgentKind::Prey, 0, 0.1)], 0));
        }
        assert!((m.rewards[&tag(AgentKind::Prey, 0)] - 3000.0 * 0.1).abs() < 1e-9);
        assert_eq!(m.episode_length, 3000);
    }

    #[test]
    fn respawned_prey_share_a_slot() {
        let mut m = EpisodeMetrics::new(0);
        m.accumulate(&step(&[(1, AgentKind::Prey, 0, -10.0)], 1));
        m.accumulate(&step(&[(5, AgentKind::Prey, 0, 0.1)], 0));
        assert_eq!(m.rewards.len(), 1);
        assert!((m.rewards[&tag(AgentKind::Prey, 0)] + 9.9).abs() < 1e-12);
    }

    #[test]
    fn counts_captures() {
        let mut m = EpisodeMetrics::new(0);
        for c in [2, 0, 3] {
            m.accumulate(&step(&[], c));
        }
        assert_eq!(m.captures, 5);
    }

    #[test]
    fn aggregate_examples() {
        let one = episode(&[(AgentKind::Prey, 0, 42.0)], 0);
        let a = aggregate(&[one], AgentKind::Prey, Deviation::Population).unwrap();
        assert_eq!((a.mean_reward, a.sd_reward), (42.0, 0.0));

        let two = episode(&[(AgentKind::Prey, 0, 10.0), (AgentKind::Prey, 1, 20.0)], 0);
        let a = aggregate(&[two], AgentKind::Prey, Deviation::Population).unwrap();
        assert_eq!((a.mean_reward, a.sd_reward), (15.0, 5.0));

        let flat = episode(&[(AgentKind::Prey, 0, 7.0), (AgentKind::Prey, 1, 7.0)], 1);
        let a = aggregate(&[flat.clone(), flat.clone(), flat], AgentKind::Prey, Deviation::Population).unwrap();
        assert_eq!(a.sd_reward, 0.0);
        assert_eq!(a.mean_captures, 1.0);

        assert_eq!(
            aggregate(&[], AgentKind::Prey, Deviation::Population),
            Err(AggregateError::NoEpisodes)
        );
    }

    #[test]
    fn aggregate_permutation_invariant() {
        let eps = [
            episode(&[(AgentKind::Prey, 0, 1.0), (AgentKind::Prey, 1, 4.0)], 2),
            episode(&[(AgentKind::Prey, 0, 9.0), (AgentKind::Prey, 1, -3.0)], 1),
            episode(&[(AgentKind::Prey, 0, 0.5), (AgentKind::Prey, 1, 2.5)], 0),
        ];
        let a = aggregate(&eps, AgentKind::Prey, Deviation::Population).unwrap();
        let rev = [eps[2].clone(), eps[0].clone(), eps[1].clone()];
        let b = aggregate(&rev, AgentKind::Prey, Deviation::Population).unwrap();
        assert!((a.mean_reward - b.mean_reward).abs() < 1e-12);
        assert!((a.sd_reward - b.sd_reward).abs() < 1e-12);
        assert_eq!(a.mean_captures, b.mean_captures);
    }

    #[test]
    fn sample_deviation() {
        assert_eq!(mean_sd(&[10.0, 20.0], Deviation::Sample).unwrap().1, 50.0f64.sqrt());
    }
}
