//! Parallel multi-agent environment surface with string agent names, the
//! shape a foreign-language binding wraps.
//!
//! Names are `predator_k` / `prey_k`, numbered per kind in order of first
//! appearance. A respawned prey is a new agent and gets a new name.

use std::collections::BTreeMap;

use aquarium_core::{AgentId, AgentKind, AquariumConfig, EnvError, World};
use thiserror::Error;

use crate::log::CaptureRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscreteSpace {
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxSpace {
    pub low: f64,
    pub high: f64,
    pub shape: usize,
}

#[derive(Debug, Error, PartialEq)]
pub enum AdapterError {
    #[error("environment is closed")]
    Closed,
    #[error("reset must be called before step")]
    NotReset,
    #[error("missing action for agent `{0}`")]
    MissingAction(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// One parallel step, keyed by agent name.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParallelStep {
    pub observations: BTreeMap<String, Vec<f64>>,
    pub rewards: BTreeMap<String, f64>,
    pub terminations: BTreeMap<String, bool>,
    pub truncations: BTreeMap<String, bool>,
    /// Capture events the agent took part in.
    pub infos: BTreeMap<String, Vec<CaptureRecord>>,
}

#[derive(Debug)]
pub struct ParallelEnv {
    config: AquariumConfig,
    world: Option<World>,
    closed: bool,
    names: BTreeMap<AgentId, String>,
    counters: [u32; 2],
}

impl ParallelEnv {
    pub fn new(config: AquariumConfig) -> Result<ParallelEnv, AdapterError> {
        config.validate().map_err(EnvError::from)?;
        Ok(ParallelEnv {
            config,
            world: None,
            closed: false,
            names: BTreeMap::new(),
            counters: [0, 0],
        })
    }

    pub fn action_space(&self) -> DiscreteSpace {
        DiscreteSpace {
            n: self.config.actions_number as usize,
        }
    }

    pub fn observation_space(&self) -> BoxSpace {
        let (low, high) = self.config.observation_scale;
        BoxSpace {
            low,
            high,
            shape: self.config.observation_len(),
        }
    }

    pub fn world(&self) -> Option<&World> {
        self.world.as_ref()
    }

    /// Names of the live agents.
    pub fn agents(&self) -> Vec<String> {
        match &self.world {
            Some(w) => w.agents().iter().map(|a| self.names[&a.id].clone()).collect(),
            None => Vec::new(),
        }
    }

    fn name_new_agents(&mut self) {
        let Some(world) = &self.world else { return };
        for a in world.agents() {
            if !self.names.contains_key(&a.id) {
                let (prefix, c) = match a.kind {
                    AgentKind::Predator => ("predator", &mut self.counters[0]),
                    AgentKind::Prey => ("prey", &mut self.counters[1]),
                };
                self.names.insert(a.id, format!("{prefix}_{c}"));
                *c += 1;
            }
        }
    }

    pub fn reset(&mut self, seed: u64) -> Result<BTreeMap<String, Vec<f64>>, AdapterError> {
        if self.closed {
            return Err(AdapterError::Closed);
        }
        let (world, obs) = World::reset(self.config.clone(), seed)?;
        self.world = Some(world);
        self.names.clear();
        self.counters = [0, 0];
        self.name_new_agents();
        Ok(obs.into_iter().map(|(id, o)| (self.names[&id].clone(), o.values)).collect())
    }

    pub fn step(&mut self, actions: &BTreeMap<String, usize>) -> Result<ParallelStep, AdapterError> {
        if self.closed {
            return Err(AdapterError::Closed);
        }
        let world = self.world.as_mut().ok_or(AdapterError::NotReset)?;
        let mut by_id = BTreeMap::new();
        for a in world.agents() {
            let name = &self.names[&a.id];
            let action = actions.get(name).ok_or_else(|| AdapterError::MissingAction(name.clone()))?;
            by_id.insert(a.id, *action);
        }
        if let Some(extra) = actions.keys().find(|n| !self.names.iter().any(|(id, m)| m == *n && by_id.contains_key(id))) {
            return Err(AdapterError::UnknownAgent(extra.clone()));
        }
        let result = world.step(&by_id)?;
        self.name_new_agents();
        let world = self.world.as_ref().expect("reset");

        let mut out = ParallelStep::default();
        let all_gone = result.terminated && !result.horizon_reached;
        let mut record = |id: AgentId, obs: Vec<f64>| {
            let name = self.names[&id].clone();
            out.rewards.insert(name.clone(), result.rewards.get(&id).copied().unwrap_or(0.0));
            out.terminations.insert(name.clone(), all_gone || result.died.binary_search(&id).is_ok());
            out.truncations.insert(name.clone(), result.horizon_reached);
            let events = result
                .capture_events
                .iter()
                .filter(|e| e.agent_a == id || e.agent_b == id)
                .map(|e| CaptureRecord {
                    predator: e.agent_a.0,
                    prey: e.agent_b.0,
                    x: e.location.x,
                    y: e.location.y,
                })
                .collect();
            out.infos.insert(name.clone(), events);
            out.observations.insert(name, obs);
        };
        for (id, obs) in &result.observations {
            record(*id, obs.values.clone());
        }
        for id in &result.spawned {
            if world.agent(*id).is_some() {
                record(*id, world.observation(*id)?.values);
            }
        }
        Ok(out)
    }

    pub fn close(&mut self) {
        self.closed = true;
        self.world = None;
    }
}
