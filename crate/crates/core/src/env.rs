//! World state, agent lifecycle and the step/reset transition function.
//!
//! One call to [`World::step`] runs these stages in order:
//!
//! 1. decode each alive agent's action into a desired velocity, steer, integrate;
//! 2. detect collisions on the new positions;
//! 3. resolve captures (prey dies, and respawns when `constant_fish_number`),
//!    then same-type bounces for agents that were not captured;
//! 4. assign rewards;
//! 5. lifecycle: ageing, prey replication, predator starvation;
//! 6. termination check;
//! 7. observations for every agent that was alive when the tick started.
//!
//! All randomness comes from one seeded stream whose consumption order is
//! fixed by the stages above.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::collision::{detect_collisions, resolve_bounce, CollisionEvent, CollisionKind};
use crate::config::{AquariumConfig, ConfigError};
use crate::geometry::{sin_cos_deg, Torus, Vec2};
use crate::motion::{integrate_step, steering_force, AgentBody};
use crate::perception::{encode_observation, visible_neighbors, Observation, Percept, SlotRanges};
use crate::rng::{episode_rng, SimRng};

/// Agent mass. The parameter table has no mass entry.
pub const AGENT_MASS: f64 = 1.0;

/// Unique per-episode agent identifier. Ids are issued from a monotone
/// counter and never reused, including for respawned prey.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AgentKind {
    Predator,
    Prey,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Predator => "predator",
            AgentKind::Prey => "prey",
        }
    }
}

/// Lineage of an agent. A respawned prey continues the slot of the prey it
/// replaces, so per-slot metrics and per-slot learners span the whole
/// episode. Replicated prey open new slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentTag {
    pub kind: AgentKind,
    pub slot: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    pub id: AgentId,
    pub kind: AgentKind,
    pub slot: u32,
    pub body: AgentBody,
    pub alive: bool,
    pub age_ticks: u64,
    /// Predators only.
    pub ticks_since_last_capture: u64,
}

impl AgentState {
    pub fn tag(&self) -> AgentTag {
        AgentTag {
            kind: self.kind,
            slot: self.slot,
        }
    }

    fn percept(&self) -> Percept {
        Percept {
            id: self.id,
            kind: self.kind,
            body: self.body,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnvError {
    Config(ConfigError),
    UnknownAgent(AgentId),
    DeadAgent(AgentId),
    MissingAction(AgentId),
    InvalidAction { agent: AgentId, action: usize, actions: usize },
    EpisodeFinished,
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::Config(e) => write!(f, "{e}"),
            EnvError::UnknownAgent(id) => write!(f, "unknown agent {id}"),
            EnvError::DeadAgent(id) => write!(f, "agent {id} is not alive"),
            EnvError::MissingAction(id) => write!(f, "no action given for agent {id}"),
            EnvError::InvalidAction {
                agent,
                action,
                actions,
            } => write!(
                f,
                "agent {agent}: action {action} out of range (actions_number = {actions})"
            ),
            EnvError::EpisodeFinished => write!(f, "episode already terminated; call reset"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EnvError {}

impl From<ConfigError> for EnvError {
    fn from(e: ConfigError) -> Self {
        EnvError::Config(e)
    }
}

/// Outcome of one tick. `observations`, `rewards` and `tags` are keyed by
/// exactly the agents alive when the tick started.
#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    /// Tick count after this step (1 for the first step).
    pub tick: u64,
    pub observations: BTreeMap<AgentId, Observation>,
    pub rewards: BTreeMap<AgentId, f64>,
    pub tags: BTreeMap<AgentId, AgentTag>,
    pub terminated: bool,
    /// The step horizon `max_timesteps` was reached.
    pub horizon_reached: bool,
    pub capture_events: Vec<CollisionEvent>,
    pub bounce_events: Vec<CollisionEvent>,
    /// Agents that died this tick (captured or starved).
    pub died: Vec<AgentId>,
    /// Agents created this tick (respawned or replicated prey).
    pub spawned: Vec<AgentId>,
}

/// Desired velocity for a discrete action: bearing `γ = 360·a/n` degrees
/// (0 = north, clockwise), direction `(sin γ, −cos γ)` scaled to the agent's
/// maximum speed.
pub fn action_to_desired_velocity(action: usize, actions: usize, body: &AgentBody) -> Option<Vec2> {
    if action >= actions {
        return None;
    }
    let gamma = 360.0 * action as f64 / actions as f64;
    let (s, c) = sin_cos_deg(gamma);
    Some(Vec2::new(s, -c) * body.max_speed)
}

/// Rewards for one tick.
///
/// Each capture's reward `r` is split equally among the predators within
/// `catch_zone_radius` (torus distance, inclusive) of the capture location;
/// the capturing predator always counts as inside. Prey alive at the start
/// of the tick receive `prey_step_reward`, or `prey_caught_penalty` if they
/// were captured.
pub fn compute_rewards(
    captures: &[CollisionEvent],
    predators: &[(AgentId, Vec2)],
    prey: &[AgentId],
    torus: &Torus,
    config: &AquariumConfig,
) -> BTreeMap<AgentId, f64> {
    let mut rewards: BTreeMap<AgentId, f64> = BTreeMap::new();
    for (id, _) in predators {
        rewards.insert(*id, 0.0);
    }
    for id in prey {
        rewards.insert(*id, config.prey_step_reward);
    }
    for event in captures.iter().filter(|e| e.kind == CollisionKind::Capture) {
        let in_zone: Vec<AgentId> = predators
            .iter()
            .filter(|(id, pos)| {
                *id == event.agent_a || torus.distance(*pos, event.location) <= config.catch_zone_radius
            })
            .map(|(id, _)| *id)
            .collect();
        let share = config.predator_catch_reward / in_zone.len().max(1) as f64;
        for id in in_zone {
            *rewards.entry(id).or_insert(0.0) += share;
        }
        rewards.insert(event.agent_b, config.prey_caught_penalty);
    }
    rewards
}

#[derive(Clone, Debug)]
pub struct World {
    config: AquariumConfig,
    torus: Torus,
    seed: u64,
    agents: Vec<AgentState>,
    departed: Vec<AgentState>,
    next_id: u32,
    next_prey_slot: u32,
    tick: u64,
    terminated: bool,
    rng: SimRng,
    last_actions: BTreeMap<AgentId, usize>,
}

impl World {
    /// Fresh episode: `shark_number` predators then `fish_number` prey at
    /// uniform random positions, at rest and facing north.
    pub fn new(config: AquariumConfig, seed: u64) -> Result<World, EnvError> {
        config.validate()?;
        let torus = config.torus();
        let mut world = World {
            torus,
            seed,
            agents: Vec::new(),
            departed: Vec::new(),
            next_id: 0,
            next_prey_slot: 0,
            tick: 0,
            terminated: false,
            rng: episode_rng(seed),
            last_actions: BTreeMap::new(),
            config,
        };
        for slot in 0..world.config.shark_number {
            let pos = world.random_position();
            world.spawn(AgentKind::Predator, slot, pos);
        }
        for _ in 0..world.config.fish_number {
            let pos = world.random_position();
            let slot = world.next_prey_slot;
            world.next_prey_slot += 1;
            world.spawn(AgentKind::Prey, slot, pos);
        }
        Ok(world)
    }

    /// [`World::new`] plus the initial observation of every agent.
    pub fn reset(
        config: AquariumConfig,
        seed: u64,
    ) -> Result<(World, BTreeMap<AgentId, Observation>), EnvError> {
        let world = World::new(config, seed)?;
        let obs = world.observations();
        Ok((world, obs))
    }

    pub fn config(&self) -> &AquariumConfig {
        &self.config
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Alive agents in ascending id order.
    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    /// Agents that died during the most recent step, with their final state.
    pub fn departed(&self) -> &[AgentState] {
        &self.departed
    }

    /// Actions applied during the most recent step.
    pub fn last_actions(&self) -> &BTreeMap<AgentId, usize> {
        &self.last_actions
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentState> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn count(&self, kind: AgentKind) -> usize {
        self.agents.iter().filter(|a| a.kind == kind).count()
    }

    pub fn ids_of(&self, kind: AgentKind) -> Vec<AgentId> {
        self.agents.iter().filter(|a| a.kind == kind).map(|a| a.id).collect()
    }

    fn random_position(&mut self) -> Vec2 {
        let x = self.rng.gen_range(0.0..self.torus.width());
        let y = self.rng.gen_range(0.0..self.torus.height());
        Vec2::new(x, y)
    }

    fn body_for(&self, kind: AgentKind, position: Vec2) -> AgentBody {
        let c = &self.config;
        match kind {
            AgentKind::Predator => AgentBody::at_rest(
                position,
                AGENT_MASS,
                c.shark_max_velocity as f64,
                c.max_steer_force,
                c.shark_max_acceleration,
                c.shark_radius as f64,
            ),
            AgentKind::Prey => AgentBody::at_rest(
                position,
                AGENT_MASS,
                c.fish_max_velocity as f64,
                c.max_steer_force,
                c.fish_max_acceleration,
                c.fish_radius as f64,
            ),
        }
    }

    fn spawn(&mut self, kind: AgentKind, slot: u32, position: Vec2) -> AgentId {
        let id = AgentId(self.next_id);
        self.next_id += 1;
        let body = self.body_for(kind, position);
        self.agents.push(AgentState {
            id,
            kind,
            slot,
            body,
            alive: true,
            age_ticks: 0,
            ticks_since_last_capture: 0,
        });
        id
    }

    fn spawn_clearance(&self) -> f64 {
        (self.config.shark_radius + self.config.fish_radius) as f64
    }

    fn clear_of_predators(&self, pos: Vec2) -> bool {
        let min = self.spawn_clearance();
        self.agents
            .iter()
            .filter(|a| a.alive && a.kind == AgentKind::Predator)
            .all(|p| self.torus.distance(p.body.position, pos) >= min)
    }

    /// Replace a captured prey with a fresh one (new id, same slot) at a
    /// uniform random position at least `shark_radius + fish_radius` away
    /// from every predator.
    pub fn respawn_prey(&mut self, slot: u32) -> AgentId {
        let mut pos = self.random_position();
        for _ in 0..1000 {
            if self.clear_of_predators(pos) {
                break;
            }
            pos = self.random_position();
        }
        self.spawn(AgentKind::Prey, slot, pos)
    }

    fn slot_ranges(&self) -> SlotRanges {
        SlotRanges {
            max_distance: self.torus.max_distance(),
            predator_max_speed: self.config.shark_max_velocity as f64,
            prey_max_speed: self.config.fish_max_velocity as f64,
        }
    }

    fn fov_for(&self, kind: AgentKind) -> crate::perception::FieldOfView {
        match kind {
            AgentKind::Predator => self.config.shark_fov(),
            AgentKind::Prey => self.config.fish_fov(),
        }
    }

    fn percepts(&self) -> Vec<Percept> {
        self.agents.iter().filter(|a| a.alive).map(AgentState::percept).collect()
    }

    fn observe_state(&self, observer: &AgentState, percepts: &[Percept]) -> Observation {
        let spec = self.config.observation_spec();
        let me = observer.percept();
        let fov = self.fov_for(observer.kind);
        let seen = visible_neighbors(&me, percepts, &fov, &self.torus, Some(spec.max_neighbors));
        let neighbors: Vec<Percept> = seen.iter().map(|(i, _)| percepts[*i]).collect();
        encode_observation(&me, &neighbors, &self.torus, &spec, &self.slot_ranges())
    }

    /// Ids of the alive agents visible to `observer`, nearest first (ties by
    /// id), at most `observed_fish_number` of them.
    pub fn visible_neighbors(&self, observer: AgentId) -> Result<Vec<AgentId>, EnvError> {
        let state = self.alive_agent(observer)?;
        let percepts = self.percepts();
        let fov = self.fov_for(state.kind);
        let limit = self.config.observed_fish_number as usize;
        Ok(
            visible_neighbors(&state.percept(), &percepts, &fov, &self.torus, Some(limit))
                .into_iter()
                .map(|(i, _)| percepts[i].id)
                .collect(),
        )
    }

    /// Alive agents of `kind` inside `observer`'s field of view, nearest
    /// first, without the neighbour cap. Used by the scripted policies.
    pub fn visible_of_kind(&self, observer: AgentId, kind: AgentKind) -> Result<Vec<(AgentId, Vec2)>, EnvError> {
        let state = self.alive_agent(observer)?;
        let percepts: Vec<Percept> = self
            .agents
            .iter()
            .filter(|a| a.alive && a.kind == kind)
            .map(AgentState::percept)
            .collect();
        let fov = self.fov_for(state.kind);
        Ok(
            visible_neighbors(&state.percept(), &percepts, &fov, &self.torus, None)
                .into_iter()
                .map(|(i, _)| (percepts[i].id, percepts[i].body.position))
                .collect(),
        )
    }

    fn alive_agent(&self, id: AgentId) -> Result<&AgentState, EnvError> {
        match self.agent(id) {
            Some(a) if a.alive => Ok(a),
            Some(_) => Err(EnvError::DeadAgent(id)),
            None => Err(EnvError::UnknownAgent(id)),
        }
    }

    /// Observation vector of an alive agent.
    pub fn observation(&self, id: AgentId) -> Result<Observation, EnvError> {
        let state = self.alive_agent(id)?;
        Ok(self.observe_state(state, &self.percepts()))
    }

    /// Observations of all alive agents.
    pub fn observations(&self) -> BTreeMap<AgentId, Observation> {
        let percepts = self.percepts();
        self.agents
            .iter()
            .filter(|a| a.alive)
            .map(|a| (a.id, self.observe_state(a, &percepts)))
            .collect()
    }

    /// Advance one tick. `actions` must hold exactly one valid action for
    /// every alive agent.
    pub fn step(&mut self, actions: &BTreeMap<AgentId, usize>) -> Result<StepResult, EnvError> {
        if self.terminated {
            return Err(EnvError::EpisodeFinished);
        }
        let n = self.config.actions_number as usize;
        for agent in &self.agents {
            match actions.get(&agent.id) {
                None => return Err(EnvError::MissingAction(agent.id)),
                Some(&a) if a >= n => {
                    return Err(EnvError::InvalidAction {
                        agent: agent.id,
                        action: a,
                        actions: n,
                    })
                }
                Some(_) => {}
            }
        }
        if let Some(id) = actions.keys().find(|id| self.agent(**id).is_none()) {
            return Err(EnvError::UnknownAgent(*id));
        }

        self.departed.clear();
        self.last_actions = actions.clone();
        let tick = self.tick;
        let start_ids: Vec<AgentId> = self.agents.iter().map(|a| a.id).collect();
        let tags: BTreeMap<AgentId, AgentTag> = self.agents.iter().map(|a| (a.id, a.tag())).collect();

        // (1) movement
        let model = self.config.motion;
        for agent in self.agents.iter_mut() {
            let desired = action_to_desired_velocity(actions[&agent.id], n, &agent.body)
                .expect("actions validated above");
            let force = steering_force(&agent.body, desired);
            agent.body = integrate_step(&agent.body, force, &self.torus, model);
        }

        // (2) collisions against the post-movement snapshot
        let snapshot: Vec<_> = self.agents.iter().map(|a| (a.id, a.body, a.kind)).collect();
        let events = detect_collisions(&snapshot, &self.torus, tick);

        // (3) captures first, then bounces among survivors
        let mut captured: Vec<AgentId> = Vec::new();
        let mut capture_events = Vec::new();
        for e in events.iter().filter(|e| e.kind == CollisionKind::Capture) {
            if captured.contains(&e.agent_b) {
                continue;
            }
            captured.push(e.agent_b);
            capture_events.push(*e);
        }
        let mut bounce_events = Vec::new();
        for e in events.iter().filter(|e| e.kind == CollisionKind::SameTypeBounce) {
            if captured.contains(&e.agent_a) || captured.contains(&e.agent_b) {
                continue;
            }
            let ia = self.index_of(e.agent_a);
            let ib = self.index_of(e.agent_b);
            let (na, nb) = resolve_bounce(&self.agents[ia].body, &self.agents[ib].body, &self.torus, &mut self.rng);
            self.agents[ia].body = na;
            self.agents[ib].body = nb;
            bounce_events.push(*e);
        }

        // (4) rewards, from post-movement predator positions
        let predators: Vec<(AgentId, Vec2)> = self
            .agents
            .iter()
            .filter(|a| a.kind == AgentKind::Predator)
            .map(|a| (a.id, a.body.position))
            .collect();
        let prey: Vec<AgentId> = self.agents.iter().filter(|a| a.kind == AgentKind::Prey).map(|a| a.id).collect();
        let rewards = compute_rewards(&capture_events, &predators, &prey, &self.torus, &self.config);

        let mut died = Vec::new();
        let mut spawned = Vec::new();
        let mut capturers: Vec<AgentId> = Vec::new();
        for e in &capture_events {
            capturers.push(e.agent_a);
            let i = self.index_of(e.agent_b);
            self.agents[i].alive = false;
            died.push(e.agent_b);
        }
        for e in &capture_events {
            let i = self.index_of(e.agent_a);
            self.agents[i].ticks_since_last_capture = 0;
        }
        if self.config.constant_fish_number {
            for e in &capture_events {
                let slot = self.agents[self.index_of(e.agent_b)].slot;
                spawned.push(self.respawn_prey(slot));
            }
        }

        // (5) lifecycle
        let starvation = self.config.shark_starvation_age as u64;
        for agent in self.agents.iter_mut().filter(|a| a.alive) {
            if start_ids.binary_search(&agent.id).is_err() {
                continue;
            }
            agent.age_ticks += 1;
            if agent.kind == AgentKind::Predator && !capturers.contains(&agent.id) {
                agent.ticks_since_last_capture += 1;
                if agent.ticks_since_last_capture >= starvation {
                    agent.alive = false;
                    died.push(agent.id);
                }
            }
        }
        if self.config.replication {
            spawned.extend(self.replicate());
        }

        // (6) termination
        self.tick += 1;
        let horizon_reached = self.tick >= self.config.max_timesteps as u64;
        let prey_left = self.agents.iter().any(|a| a.alive && a.kind == AgentKind::Prey);
        let predators_left = self.agents.iter().any(|a| a.alive && a.kind == AgentKind::Predator);
        self.terminated = horizon_reached || !prey_left || !predators_left;

        // (7) observations for everyone alive at tick start
        let percepts = self.percepts();
        let observations = self
            .agents
            .iter()
            .filter(|a| start_ids.binary_search(&a.id).is_ok())
            .map(|a| (a.id, self.observe_state(a, &percepts)))
            .collect();

        let (alive, dead): (Vec<AgentState>, Vec<AgentState>) =
            core::mem::take(&mut self.agents).into_iter().partition(|a| a.alive);
        self.agents = alive;
        self.departed = dead;
        died.sort();

        Ok(StepResult {
            tick: self.tick,
            observations,
            rewards,
            tags,
            terminated: self.terminated,
            horizon_reached,
            capture_events,
            bounce_events,
            died,
            spawned,
        })
    }

    fn index_of(&self, id: AgentId) -> usize {
        self.agents
            .binary_search_by_key(&id, |a| a.id)
            .expect("agent ids are sorted and present")
    }

    /// Prey at or above `fish_replication_age` spawn a child `2 · fish_radius`
    /// away at a random bearing, while the prey population is below
    /// `max_fish_number`. A child must also clear every predator; a parent
    /// with no clear spot this tick retries on the next one.
    fn replicate(&mut self) -> Vec<AgentId> {
        let mut spawned = Vec::new();
        let age = self.config.fish_replication_age as u64;
        let cap = self.config.max_fish_number as usize;
        let parents: Vec<AgentId> = self
            .agents
            .iter()
            .filter(|a| a.alive && a.kind == AgentKind::Prey && a.age_ticks >= age)
            .map(|a| a.id)
            .collect();
        let spacing = 2.0 * self.config.fish_radius as f64;
        for parent in parents {
            let alive_prey = self.agents.iter().filter(|a| a.alive && a.kind == AgentKind::Prey).count();
            if alive_prey >= cap {
                break;
            }
            let origin = self.agents[self.index_of(parent)].body.position;
            let mut placed = None;
            for _ in 0..16 {
                let deg: f64 = self.rng.gen_range(0.0..360.0);
                let pos = self.torus.wrap(origin + Vec2::from_bearing_deg(deg) * spacing);
                if self.clear_of_predators(pos) {
                    placed = Some(pos);
                    break;
                }
            }
            if let Some(pos) = placed {
                let slot = self.next_prey_slot;
                self.next_prey_slot += 1;
                spawned.push(self.spawn(AgentKind::Prey, slot, pos));
                let i = self.index_of(parent);
                self.agents[i].age_ticks = 0;
            }
        }
        spawned
    }

    /// Move an agent directly. Intended for constructing test scenarios.
    pub fn place(&mut self, id: AgentId, position: Vec2, velocity: Vec2) -> Result<(), EnvError> {
        let i = self
            .agents
            .iter()
            .position(|a| a.id == id)
            .ok_or(EnvError::UnknownAgent(id))?;
        let pos = self.torus.wrap(position);
        let body = &mut self.agents[i].body;
        body.position = pos;
        body.acceleration = Vec2::ZERO;
        body.set_velocity(crate::geometry::limit(velocity, body.max_speed));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all(world: &World, action: usize) -> BTreeMap<AgentId, usize> {
        world.agents().iter().map(|a| (a.id, action)).collect()
    }

    #[test]
    fn reset_defaults() {
        let (w, obs) = World::reset(AquariumConfig::default(), 1).unwrap();
        assert_eq!(w.count(AgentKind::Predator), 1);
        assert_eq!(w.count(AgentKind::Prey), 8);
        assert_eq!(obs.len(), 9);
        assert!(obs.values().all(|o| o.len() == 54));
        for a in w.agents() {
            assert_eq!(a.body.velocity, Vec2::ZERO);
            assert_eq!(a.body.heading, Vec2::NORTH);
        }
    }

    #[test]
    fn reset_is_deterministic() {
        let (a, oa) = World::reset(AquariumConfig::default(), 9).unwrap();
        let (b, ob) = World::reset(AquariumConfig::default(), 9).unwrap();
        assert_eq!(a.agents(), b.agents());
        assert_eq!(oa, ob);
        let (c, _) = World::reset(AquariumConfig::default(), 10).unwrap();
        assert_ne!(a.agents(), c.agents());
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = AquariumConfig {
            fish_number: 30,
            ..Default::default()
        };
        match World::new(cfg, 0) {
            Err(EnvError::Config(e)) => assert_eq!(e.field, "fish_number"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn action_directions() {
        let b = AgentBody::at_rest(Vec2::ZERO, 1.0, 1.0, 0.6, 1.0, 10.0);
        assert_eq!(action_to_desired_velocity(0, 8, &b), Some(Vec2::new(0.0, -1.0)));
        assert_eq!(action_to_desired_velocity(2, 8, &b), Some(Vec2::new(1.0, 0.0)));
        assert_eq!(action_to_desired_velocity(4, 8, &b), Some(Vec2::new(0.0, 1.0)));
        assert_eq!(action_to_desired_velocity(6, 8, &b), Some(Vec2::new(-1.0, 0.0)));
        assert_eq!(action_to_desired_velocity(8, 8, &b), None);
        let fast = AgentBody::at_rest(Vec2::ZERO, 1.0, 5.0, 0.6, 1.0, 10.0);
        assert_eq!(action_to_desired_velocity(2, 8, &fast), Some(Vec2::new(5.0, 0.0)));
    }

    #[test]
    fn step_errors() {
        let mut w = World::new(AquariumConfig::default(), 0).unwrap();
        let mut acts = all(&w, 0);
        let first = *acts.keys().next().unwrap();
        acts.remove(&first);
        assert_eq!(w.step(&acts), Err(EnvError::MissingAction(first)));
        let mut acts = all(&w, 0);
        acts.insert(first, 8);
        assert!(matches!(w.step(&acts), Err(EnvError::InvalidAction { action: 8, .. })));
        let mut acts = all(&w, 0);
        acts.insert(AgentId(999), 0);
        assert_eq!(w.step(&acts), Err(EnvError::UnknownAgent(AgentId(999))));
    }

    fn spread_world(cfg: AquariumConfig) -> World {
        let mut w = World::new(cfg, 3).unwrap();
        let ids: Vec<AgentId> = w.agents().iter().map(|a| a.id).collect();
        for (k, id) in ids.iter().enumerate() {
            let x = 50.0 + 90.0 * k as f64;
            w.place(*id, Vec2::new(x, 400.0), Vec2::ZERO).unwrap();
        }
        w
    }

    #[test]
    fn isolated_agents_get_neutral_rewards() {
        let cfg = AquariumConfig::default();
        let mut w = spread_world(cfg.clone());
        let r = w.step(&all(&w, 0)).unwrap();
        for a in w.agents() {
            let reward = r.rewards[&a.id];
            match a.kind {
                AgentKind::Predator => assert_eq!(reward, 0.0),
                AgentKind::Prey => assert_eq!(reward, cfg.prey_step_reward),
            }
        }
        assert!(r.capture_events.is_empty());
        assert_eq!(r.observations.len(), 9);
    }

    fn capture_world(constant: bool) -> (World, AgentId, AgentId) {
        let cfg = AquariumConfig {
            fish_number: 2,
            constant_fish_number: constant,
            ..Default::default()
        };
        let mut w = World::new(cfg, 5).unwrap();
        let pred = w.ids_of(AgentKind::Predator)[0];
        let prey = w.ids_of(AgentKind::Prey);
        w.place(pred, Vec2::new(100.0, 100.0), Vec2::ZERO).unwrap();
        w.place(prey[0], Vec2::new(130.0, 100.0), Vec2::ZERO).unwrap();
        w.place(prey[1], Vec2::new(500.0, 500.0), Vec2::ZERO).unwrap();
        (w, pred, prey[0])
    }

    #[test]
    fn capture_rewards_and_respawn() {
        let (mut w, pred, victim) = capture_world(true);
        let slot = w.agent(victim).unwrap().slot;
        let r = w.step(&all(&w, 0)).unwrap();
        assert_eq!(r.capture_events.len(), 1);
        assert_eq!(r.rewards[&pred], 10.0);
        assert_eq!(r.rewards[&victim], -10.0);
        assert!(r.observations.contains_key(&victim));
        assert_eq!(r.died, [victim]);
        assert_eq!(r.spawned.len(), 1);
        assert_eq!(w.count(AgentKind::Prey), 2);
        let newcomer = w.agent(r.spawned[0]).unwrap();
        assert_eq!(newcomer.slot, slot);
        assert!(newcomer.id.0 > victim.0);
        let p = w.agent(pred).unwrap();
        assert!(w.torus().distance(p.body.position, newcomer.body.position) >= 50.0);
        assert_eq!(p.ticks_since_last_capture, 0);
        assert!(!r.observations.contains_key(&newcomer.id));
    }

    #[test]
    fn capture_without_respawn_shrinks_population() {
        let (mut w, _, victim) = capture_world(false);
        let r = w.step(&all(&w, 0)).unwrap();
        assert_eq!(r.died, [victim]);
        assert!(r.spawned.is_empty());
        assert_eq!(w.count(AgentKind::Prey), 1);
        assert!(w.agent(victim).is_none());
        assert_eq!(w.departed().len(), 1);
        assert_eq!(w.observation(victim), Err(EnvError::UnknownAgent(victim)));
    }

    #[test]
    fn last_prey_caught_terminates() {
        let cfg = AquariumConfig {
            fish_number: 1,
            constant_fish_number: false,
            ..Default::default()
        };
        let mut w = World::new(cfg, 5).unwrap();
        let pred = w.ids_of(AgentKind::Predator)[0];
        let prey = w.ids_of(AgentKind::Prey)[0];
        w.place(pred, Vec2::new(100.0, 100.0), Vec2::ZERO).unwrap();
        w.place(prey, Vec2::new(110.0, 100.0), Vec2::ZERO).unwrap();
        let r = w.step(&all(&w, 0)).unwrap();
        assert!(r.terminated);
        assert!(!r.horizon_reached);
        assert_eq!(w.step(&all(&w, 0)), Err(EnvError::EpisodeFinished));
    }

    #[test]
    fn horizon_terminates() {
        let cfg = AquariumConfig {
            max_timesteps: 3,
            ..Default::default()
        };
        let mut w = spread_world(cfg);
        for t in 1..=3 {
            let r = w.step(&all(&w, 0)).unwrap();
            assert_eq!(r.tick, t);
            assert_eq!(r.terminated, t == 3);
        }
        assert_eq!(w.step(&all(&w, 0)), Err(EnvError::EpisodeFinished));
    }

    #[test]
    fn starvation_removes_predator() {
        let cfg = AquariumConfig {
            shark_starvation_age: 2,
            ..Default::default()
        };
        let mut w = spread_world(cfg);
        let pred = w.ids_of(AgentKind::Predator)[0];
        let r = w.step(&all(&w, 0)).unwrap();
        assert!(r.died.is_empty());
        assert_eq!(w.agent(pred).unwrap().ticks_since_last_capture, 1);
        let r = w.step(&all(&w, 0)).unwrap();
        assert_eq!(r.died, [pred]);
        assert!(r.terminated);
        assert!(r.rewards.contains_key(&pred));
    }

    #[test]
    fn replication_respects_cap() {
        let cfg = AquariumConfig {
            replication: true,
            fish_replication_age: 2,
            fish_number: 4,
            max_fish_number: 6,
            ..Default::default()
        };
        let mut w = spread_world(cfg);
        let mut total_spawned = 0;
        for _ in 0..10 {
            let r = w.step(&all(&w, 0)).unwrap();
            total_spawned += r.spawned.len();
            assert!(w.count(AgentKind::Prey) <= 6);
        }
        assert_eq!(w.count(AgentKind::Prey), 6);
        assert!(total_spawned >= 2);
        let mut slots: Vec<u32> = w
            .agents()
            .iter()
            .filter(|a| a.kind == AgentKind::Prey)
            .map(|a| a.slot)
            .collect();
        slots.sort();
        slots.dedup();
        assert_eq!(slots.len(), 6);
    }

    #[test]
    fn zone_split() {
        let cfg = AquariumConfig::default();
        let torus = cfg.torus();
        let loc = Vec2::new(100.0, 100.0);
        let event = CollisionEvent {
            kind: CollisionKind::Capture,
            agent_a: AgentId(0),
            agent_b: AgentId(9),
            location: loc,
            tick: 0,
        };
        let preds = [
            (AgentId(0), Vec2::new(120.0, 100.0)),
            (AgentId(1), Vec2::new(100.0, 140.0)),
            (AgentId(2), Vec2::new(300.0, 100.0)),
        ];
        let r = compute_rewards(&[event], &preds, &[AgentId(9)], &torus, &cfg);
        assert_eq!(r[&AgentId(0)], 5.0);
        assert_eq!(r[&AgentId(1)], 5.0);
        assert_eq!(r[&AgentId(2)], 0.0);
        assert_eq!(r[&AgentId(9)], cfg.prey_caught_penalty);
    }

    #[test]
    fn two_captures_accumulate() {
        let cfg = AquariumConfig::default();
        let torus = cfg.torus();
        let mk = |prey: u32| CollisionEvent {
            kind: CollisionKind::Capture,
            agent_a: AgentId(0),
            agent_b: AgentId(prey),
            location: Vec2::new(100.0, 100.0),
            tick: 0,
        };
        let preds = [(AgentId(0), Vec2::new(110.0, 100.0))];
        let r = compute_rewards(&[mk(5), mk(6)], &preds, &[AgentId(5), AgentId(6)], &torus, &cfg);
        // event-wise accumulation oracle
        let oracle: f64 = [mk(5), mk(6)].iter().map(|_| cfg.predator_catch_reward / 1.0).sum();
        assert_eq!(r[&AgentId(0)], oracle);
        assert_eq!(r[&AgentId(0)], 20.0);
    }

    #[test]
    fn observation_of_dead_or_unknown_agent_errors() {
        let w = World::new(AquariumConfig::default(), 0).unwrap();
        assert_eq!(w.observation(AgentId(77)), Err(EnvError::UnknownAgent(AgentId(77))));
    }
}
