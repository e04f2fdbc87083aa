//! Scripted baseline policies: Random, TurnAway (prey) and NaivChase (predator).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::env::{AgentId, AgentKind, EnvError, World};
use crate::geometry::{Torus, Vec2};
use crate::motion::AgentBody;
use crate::rng::{agent_rng, SimRng};

/// Ties closer than this (in units of one action sector) count as exact.
const TIE_EPS: f64 = 1e-9;

/// Nearest discrete action to the direction `dir`:
/// `k = round(bearing / (360/n)) mod n`, ties going to the lower index.
/// The zero vector maps to action 0.
pub fn direction_to_action(dir: Vec2, actions: usize) -> usize {
    let sector = 360.0 / actions as f64;
    let x = dir.bearing_deg() / sector;
    let k = libm::floor(x);
    let frac = x - k;
    let k = k as usize % actions;
    let up = (k + 1) % actions;
    if libm::fabs(frac - 0.5) <= TIE_EPS {
        k.min(up)
    } else if frac > 0.5 {
        up
    } else {
        k
    }
}

/// Uniform action from `rng`.
pub fn random_policy<R: Rng + ?Sized>(actions: usize, rng: &mut R) -> usize {
    rng.gen_range(0..actions)
}

/// Move directly away from `predator` along the shortest wrapped path.
pub fn turn_away_policy(prey: &AgentBody, predator: Vec2, torus: &Torus, actions: usize) -> usize {
    direction_to_action(-torus.direction(prey.position, predator), actions)
}

/// Chase a prey. With several candidates under an active field of view one
/// of them is picked uniformly at random each tick; otherwise the nearest
/// (first) one is chased. With nothing visible the current heading is held.
pub fn naiv_chase_policy<R: Rng + ?Sized>(
    predator: &AgentBody,
    visible_prey: &[Vec2],
    fov_enabled: bool,
    torus: &Torus,
    actions: usize,
    rng: &mut R,
) -> usize {
    let target = match visible_prey.len() {
        0 => return direction_to_action(predator.facing(), actions),
        1 => visible_prey[0],
        n if fov_enabled => visible_prey[rng.gen_range(0..n)],
        _ => visible_prey[0],
    };
    direction_to_action(torus.direction(predator.position, target), actions)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScriptedPolicy {
    Random,
    TurnAway,
    NaivChase,
}

impl ScriptedPolicy {
    pub fn name(self) -> &'static str {
        match self {
            ScriptedPolicy::Random => "random",
            ScriptedPolicy::TurnAway => "turn_away",
            ScriptedPolicy::NaivChase => "naiv_chase",
        }
    }

    /// Whether the policy makes sense for agents of `kind`.
    pub fn supports(self, kind: AgentKind) -> bool {
        match self {
            ScriptedPolicy::Random => true,
            ScriptedPolicy::TurnAway => kind == AgentKind::Prey,
            ScriptedPolicy::NaivChase => kind == AgentKind::Predator,
        }
    }
}

#[derive(Clone, Debug)]
struct AgentMemory {
    rng: SimRng,
    last_action: Option<usize>,
}

/// Drives every agent of one kind with a scripted policy. Each agent draws
/// from its own RNG substream derived from the episode seed and its id.
#[derive(Clone, Debug)]
pub struct ScriptedController {
    policy: ScriptedPolicy,
    kind: AgentKind,
    seed: u64,
    memory: BTreeMap<AgentId, AgentMemory>,
}

impl ScriptedController {
    pub fn new(policy: ScriptedPolicy, kind: AgentKind, seed: u64) -> Self {
        ScriptedController {
            policy,
            kind,
            seed,
            memory: BTreeMap::new(),
        }
    }

    pub fn policy(&self) -> ScriptedPolicy {
        self.policy
    }

    /// Actions for all alive agents of this controller's kind.
    pub fn act(&mut self, world: &World) -> Result<BTreeMap<AgentId, usize>, EnvError> {
        let n = world.config().actions_number as usize;
        let fov = world.config().fov_enabled;
        let torus = *world.torus();
        let seed = self.seed;
        let mut out = BTreeMap::new();
        let ids = world.ids_of(self.kind);
        self.memory.retain(|id, _| ids.contains(id));
        for id in ids {
            let body = world.agent(id).expect("listed agent").body;
            let mem = self.memory.entry(id).or_insert_with(|| AgentMemory {
                rng: agent_rng(seed, id.0),
                last_action: None,
            });
            let action = match self.policy {
                ScriptedPolicy::Random => random_policy(n, &mut mem.rng),
                ScriptedPolicy::TurnAway => {
                    let threats = world.visible_of_kind(id, AgentKind::Predator)?;
                    match threats.first() {
                        Some((_, pos)) => turn_away_policy(&body, *pos, &torus, n),
                        None => match mem.last_action {
                            Some(a) => a,
                            None => random_policy(n, &mut mem.rng),
                        },
                    }
                }
                ScriptedPolicy::NaivChase => {
                    let prey: Vec<Vec2> = world
                        .visible_of_kind(id, AgentKind::Prey)?
                        .into_iter()
                        .map(|(_, p)| p)
                        .collect();
                    naiv_chase_policy(&body, &prey, fov, &torus, n, &mut mem.rng)
                }
            };
            mem.last_action = Some(action);
            out.insert(id, action);
        }
        Ok(out)
    }
}
