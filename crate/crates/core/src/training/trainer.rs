//! Training loop: prey learn with PPO against a NaivChase predator.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::gae::{compute_gae, Trajectory};
use super::policy::PolicyNet;
use super::ppo::{normalize_advantages, ppo_update, Batch, OptimizerState, UpdateStats};
use super::{PpoHyperParams, TrainError};
use crate::config::AquariumConfig;
use crate::env::{AgentId, AgentKind, World};
use crate::heuristics::{ScriptedController, ScriptedPolicy};
use crate::metrics::EpisodeMetrics;
use crate::rng::{derive_seed, purpose_rng, streams, SimRng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LearningMode {
    /// One network per prey slot, trained only on that slot's experience.
    IndividualLearning,
    /// One network shared by every prey.
    #[default]
    ParameterSharing,
}

impl LearningMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LearningMode::IndividualLearning => "il",
            LearningMode::ParameterSharing => "ps",
        }
    }

    /// Transitions a learner collects before each update. Under parameter
    /// sharing the configured batch is divided by the number of prey.
    pub fn effective_batch_size(self, batch_size: usize, prey_count: usize) -> usize {
        match self {
            LearningMode::IndividualLearning => batch_size,
            LearningMode::ParameterSharing => (batch_size / prey_count.max(1)).max(1),
        }
    }
}

/// Snapshot handed to the progress callback after every episode.
#[derive(Debug)]
pub struct TrainProgress<'a> {
    pub episode: usize,
    pub metrics: &'a EpisodeMetrics,
    pub policies: &'a [PolicyNet],
    /// Prey slot → index into `policies`.
    pub slot_policy: &'a BTreeMap<u32, usize>,
    pub updates: usize,
    pub last_update: Option<UpdateStats>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub mode: LearningMode,
    /// One entry per episode.
    pub curve: Vec<EpisodeMetrics>,
    /// A single network under parameter sharing, one per slot otherwise.
    pub policies: Vec<PolicyNet>,
    /// Prey slot → index into `policies`.
    pub slot_policy: BTreeMap<u32, usize>,
    pub updates: usize,
}

impl TrainOutcome {
    pub fn policy_for(&self, slot: u32) -> Option<&PolicyNet> {
        self.slot_policy.get(&slot).map(|&i| &self.policies[i])
    }
}

struct Learner {
    net: PolicyNet,
    opt: OptimizerState,
    /// Finished segments with their bootstrap value.
    segments: Vec<(Trajectory, f64)>,
    /// Segment currently being collected, per slot.
    open: BTreeMap<u32, Trajectory>,
}

impl Learner {
    fn new(net: PolicyNet, hp: &PpoHyperParams) -> Self {
        Learner {
            opt: OptimizerState::new(hp.optimizer, &net),
            net,
            segments: Vec::new(),
            open: BTreeMap::new(),
        }
    }

    fn buffered(&self) -> usize {
        self.segments.iter().map(|(t, _)| t.len()).sum::<usize>()
            + self.open.values().map(Trajectory::len).sum::<usize>()
    }

    fn close(&mut self, slot: u32, bootstrap: f64) {
        if let Some(t) = self.open.remove(&slot) {
            if !t.is_empty() {
                self.segments.push((t, bootstrap));
            }
        }
    }

    /// Close every open segment (bootstrapping from the critic where the
    /// agent is still alive) and run one PPO update over the buffer.
    fn update(
        &mut self,
        world: &World,
        slot_agent: &BTreeMap<u32, AgentId>,
        hp: &PpoHyperParams,
        rng: &mut SimRng,
    ) -> Result<UpdateStats, TrainError> {
        let slots: Vec<u32> = self.open.keys().copied().collect();
        for slot in slots {
            let bootstrap = match slot_agent.get(&slot) {
                Some(&id) if !self.open[&slot].last_done() => self.net.value(world.observation(id)?.as_slice()),
                _ => 0.0,
            };
            self.close(slot, bootstrap);
        }
        let mut batch = Batch::default();
        for (traj, bootstrap) in self.segments.drain(..) {
            let (adv, ret) = compute_gae(&traj, bootstrap, hp.gamma, hp.gae_lambda)?;
            batch.observations.extend(traj.observations);
            batch.actions.extend(traj.actions);
            batch.old_log_probs.extend(traj.log_probs);
            batch.advantages.extend(adv);
            batch.returns.extend(ret);
        }
        if hp.normalize_advantages {
            normalize_advantages(&mut batch.advantages);
        }
        ppo_update(&mut self.net, &mut self.opt, &batch, hp, rng)
    }
}

/// Train the prey of `config` for `hp.episodes` episodes of
/// `hp.episode_length` ticks. Episode `e` runs on seed `derive_seed(seed, e)`.
/// `progress` is called after every episode.
pub fn train<F>(
    mode: LearningMode,
    config: &AquariumConfig,
    hp: &PpoHyperParams,
    seed: u64,
    mut progress: F,
) -> Result<TrainOutcome, TrainError>
where
    F: FnMut(&TrainProgress<'_>),
{
    hp.validate()?;
    let mut config = config.clone();
    config.max_timesteps = u32::try_from(hp.episode_length).map_err(|_| TrainError::InvalidHyperParam("episode_length"))?;
    config.validate().map_err(crate::env::EnvError::from)?;
    if config.fish_number == 0 {
        return Err(TrainError::NoLearners);
    }
    let obs_len = config.observation_len();
    let actions = config.actions_number as usize;
    let threshold = mode.effective_batch_size(hp.batch_size, config.fish_number as usize);

    let mut init_rng = purpose_rng(seed, streams::POLICY_INIT);
    let mut sample_rng = purpose_rng(seed, streams::POLICY_SAMPLING);
    let mut shuffle_rng = purpose_rng(seed, streams::MINIBATCH_SHUFFLE);

    let mut learners: Vec<Learner> = Vec::new();
    let mut slot_policy: BTreeMap<u32, usize> = BTreeMap::new();
    if mode == LearningMode::ParameterSharing {
        learners.push(Learner::new(PolicyNet::new(obs_len, &hp.hidden, actions, &mut init_rng), hp));
    }

    let mut curve = Vec::with_capacity(hp.episodes);
    let mut updates = 0usize;
    let mut last_update = None;

    for episode in 0..hp.episodes {
        let episode_seed = derive_seed(seed, episode as u64);
        let mut world = World::new(config.clone(), episode_seed)?;
        let mut predator = ScriptedController::new(ScriptedPolicy::NaivChase, AgentKind::Predator, episode_seed);
        let mut metrics = EpisodeMetrics::new(episode_seed);

        while !world.is_terminated() {
            let slot_agent: BTreeMap<u32, AgentId> = world
                .agents()
                .iter()
                .filter(|a| a.kind == AgentKind::Prey)
                .map(|a| (a.slot, a.id))
                .collect();
            for &slot in slot_agent.keys() {
                slot_policy.entry(slot).or_insert_with(|| match mode {
                    LearningMode::ParameterSharing => 0,
                    LearningMode::IndividualLearning => {
                        learners.push(Learner::new(PolicyNet::new(obs_len, &hp.hidden, actions, &mut init_rng), hp));
                        learners.len() - 1
                    }
                });
            }

            for learner in learners.iter_mut() {
                if learner.buffered() >= threshold {
                    let stats = learner.update(&world, &slot_agent, hp, &mut shuffle_rng)?;
                    updates += 1;
                    last_update = Some(stats);
                }
            }

            let observations = world.observations();
            let mut actions_map = predator.act(&world)?;
            let mut pending = Vec::with_capacity(slot_agent.len());
            for (&slot, &id) in &slot_agent {
                let obs = observations[&id].as_slice().to_vec();
                let learner = &learners[slot_policy[&slot]];
                let s = learner.net.sample(&obs, &mut sample_rng);
                actions_map.insert(id, s.action);
                pending.push((slot, id, obs, s));
            }

            let result = world.step(&actions_map)?;
            metrics.accumulate(&result);

            for (slot, id, obs, s) in pending {
                let reward = result.rewards.get(&id).copied().unwrap_or(0.0);
                let died = result.died.binary_search(&id).is_ok();
                let done = died || result.terminated;
                let learner = &mut learners[slot_policy[&slot]];
                learner
                    .open
                    .entry(slot)
                    .or_default()
                    .push(obs, s.action, s.log_prob, reward, s.value, done);
                if done {
                    learner.close(slot, 0.0);
                }
            }
        }

        let nets: Vec<PolicyNet> = learners.iter().map(|l| l.net.clone()).collect();
        progress(&TrainProgress {
            episode,
            metrics: &metrics,
            policies: &nets,
            slot_policy: &slot_policy,
            updates,
            last_update,
        });
        curve.push(metrics);
    }

    Ok(TrainOutcome {
        mode,
        curve,
        policies: learners.into_iter().map(|l| l.net).collect(),
        slot_policy,
        updates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (AquariumConfig, PpoHyperParams) {
        let config = AquariumConfig {
            width: 300,
            height: 300,
            fish_number: 3,
            observed_fish_number: 2,
            ..Default::default()
        };
        let hp = PpoHyperParams {
            batch_size: 96,
            episodes: 3,
            episode_length: 60,
            hidden: alloc::vec![8],
            ..Default::default()
        };
        (config, hp)
    }

    #[test]
    fn ps_batch_is_divided() {
        assert_eq!(LearningMode::ParameterSharing.effective_batch_size(2048, 8), 256);
        assert_eq!(LearningMode::IndividualLearning.effective_batch_size(2048, 8), 2048);
    }

    #[test]
    fn il_keeps_one_net_per_slot() {
        let (config, hp) = small();
        let out = train(LearningMode::IndividualLearning, &config, &hp, 1, |_| {}).unwrap();
        assert_eq!(out.policies.len(), 3);
        assert!(out.updates > 0);
        for i in 0..3 {
            for j in i + 1..3 {
                assert_ne!(out.policies[i].flat_params(), out.policies[j].flat_params());
            }
        }
        assert_eq!(out.curve.len(), 3);
    }

    #[test]
    fn ps_shares_one_net() {
        let (config, hp) = small();
        let mut seen = 0;
        let out = train(LearningMode::ParameterSharing, &config, &hp, 1, |p| {
            assert_eq!(p.policies.len(), 1);
            seen += 1;
        })
        .unwrap();
        assert_eq!(seen, 3);
        assert_eq!(out.policies.len(), 1);
        assert!(out.slot_policy.values().all(|&i| i == 0));
        assert!(out.updates > 0);
    }

    #[test]
    fn training_is_deterministic() {
        let (config, hp) = small();
        let a = train(LearningMode::ParameterSharing, &config, &hp, 9, |_| {}).unwrap();
        let b = train(LearningMode::ParameterSharing, &config, &hp, 9, |_| {}).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn no_prey_is_an_error() {
        let (mut config, hp) = small();
        config.fish_number = 0;
        assert_eq!(
            train(LearningMode::IndividualLearning, &config, &hp, 0, |_| {}),
            Err(TrainError::NoLearners)
        );
    }
}
