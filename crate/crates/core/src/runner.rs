//! Episode driver for evaluation runs: scripted or learned controllers for
//! each kind, with hooks for logging and rendering.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::config::AquariumConfig;
use crate::env::{AgentId, AgentKind, EnvError, StepResult, World};
use crate::heuristics::{ScriptedController, ScriptedPolicy};
use crate::metrics::EpisodeMetrics;
use crate::rng::{purpose_rng, streams, SimRng};
use crate::training::{PolicyNet, TrainOutcome};

/// Trained networks keyed by lineage slot.
#[derive(Clone, Debug)]
pub struct LearnedController {
    kind: AgentKind,
    policies: Vec<PolicyNet>,
    slot_policy: BTreeMap<u32, usize>,
    greedy: bool,
    rng: SimRng,
}

impl LearnedController {
    /// Slots missing from `slot_policy` (e.g. born by replication) use the
    /// first network.
    pub fn new(
        kind: AgentKind,
        policies: Vec<PolicyNet>,
        slot_policy: BTreeMap<u32, usize>,
        greedy: bool,
        seed: u64,
    ) -> Self {
        assert!(!policies.is_empty(), "at least one policy");
        LearnedController {
            kind,
            policies,
            slot_policy,
            greedy,
            rng: purpose_rng(seed, streams::POLICY_SAMPLING),
        }
    }

    pub fn from_outcome(outcome: &TrainOutcome, greedy: bool, seed: u64) -> Self {
        LearnedController::new(
            AgentKind::Prey,
            outcome.policies.clone(),
            outcome.slot_policy.clone(),
            greedy,
            seed,
        )
    }

    pub fn act(&mut self, world: &World) -> Result<BTreeMap<AgentId, usize>, EnvError> {
        let mut out = BTreeMap::new();
        for agent in world.agents().iter().filter(|a| a.kind == self.kind) {
            let obs = world.observation(agent.id)?;
            let net = &self.policies[self.slot_policy.get(&agent.slot).copied().unwrap_or(0)];
            let action = if self.greedy {
                net.greedy(obs.as_slice())
            } else {
                net.sample(obs.as_slice(), &mut self.rng).action
            };
            out.insert(agent.id, action);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub enum Controller {
    Scripted(ScriptedController),
    Learned(Box<LearnedController>),
}

impl Controller {
    pub fn scripted(policy: ScriptedPolicy, kind: AgentKind, seed: u64) -> Self {
        Controller::Scripted(ScriptedController::new(policy, kind, seed))
    }

    pub fn act(&mut self, world: &World) -> Result<BTreeMap<AgentId, usize>, EnvError> {
        match self {
            Controller::Scripted(c) => c.act(world),
            Controller::Learned(c) => c.act(world),
        }
    }
}

/// Hooks called by [`run_episode`].
pub trait EpisodeObserver {
    fn on_reset(&mut self, _world: &World) {}
    fn on_step(&mut self, _world: &World, _step: &StepResult) {}
}

impl EpisodeObserver for () {}

/// Run one episode to termination. `predator` and `prey` each supply the
/// actions of their kind.
pub fn run_episode<O: EpisodeObserver + ?Sized>(
    config: &AquariumConfig,
    seed: u64,
    predator: &mut Controller,
    prey: &mut Controller,
    observer: &mut O,
) -> Result<EpisodeMetrics, EnvError> {
    let mut world = World::new(config.clone(), seed)?;
    observer.on_reset(&world);
    let mut metrics = EpisodeMetrics::new(seed);
    while !world.is_terminated() {
        let mut actions = predator.act(&world)?;
        actions.extend(prey.act(&world)?);
        let step = world.step(&actions)?;
        metrics.accumulate(&step);
        observer.on_step(&world, &step);
    }
    Ok(metrics)
}

/// Convenience wrapper: both kinds scripted, controllers seeded from `seed`.
pub fn run_scripted_episode(
    config: &AquariumConfig,
    seed: u64,
    predator: ScriptedPolicy,
    prey: ScriptedPolicy,
) -> Result<EpisodeMetrics, EnvError> {
    let mut p = Controller::scripted(predator, AgentKind::Predator, seed);
    let mut q = Controller::scripted(prey, AgentKind::Prey, seed);
    run_episode(config, seed, &mut p, &mut q, &mut ())
}
