//! Hitbox collisions: detection, same-type bounces and capture events.

use alloc::vec::Vec;

use rand::Rng;

use crate::env::{AgentId, AgentKind};
use crate::geometry::{limit, Torus, Vec2};
use crate::motion::AgentBody;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CollisionKind {
    SameTypeBounce,
    Capture,
}

/// Two overlapping hitboxes. For captures `agent_a` is the predator and
/// `agent_b` the prey, and `location` is the prey's position; for bounces
/// `agent_a < agent_b` and `location` is the midpoint of the pair.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CollisionEvent {
    pub kind: CollisionKind,
    pub agent_a: AgentId,
    pub agent_b: AgentId,
    pub location: Vec2,
    pub tick: u64,
}

/// All pairs whose torus distance is strictly below the sum of radii,
/// ordered by `(lower id, higher id)`.
pub fn detect_collisions(
    bodies: &[(AgentId, AgentBody, AgentKind)],
    torus: &Torus,
    tick: u64,
) -> Vec<CollisionEvent> {
    let mut order: Vec<usize> = (0..bodies.len()).collect();
    order.sort_by_key(|&i| bodies[i].0);
    let mut events = Vec::new();
    for (n, &i) in order.iter().enumerate() {
        let (id_i, body_i, kind_i) = &bodies[i];
        for &j in &order[n + 1..] {
            let (id_j, body_j, kind_j) = &bodies[j];
            let d = torus.distance(body_i.position, body_j.position);
            if d >= body_i.radius + body_j.radius {
                continue;
            }
            let event = if kind_i == kind_j {
                let mid = torus.wrap(
                    body_i.position + torus.direction(body_i.position, body_j.position) * 0.5,
                );
                CollisionEvent {
                    kind: CollisionKind::SameTypeBounce,
                    agent_a: *id_i,
                    agent_b: *id_j,
                    location: mid,
                    tick,
                }
            } else {
                let (pred, prey, prey_body) = if *kind_i == AgentKind::Predator {
                    (*id_i, *id_j, body_j)
                } else {
                    (*id_j, *id_i, body_i)
                };
                CollisionEvent {
                    kind: CollisionKind::Capture,
                    agent_a: pred,
                    agent_b: prey,
                    location: prey_body.position,
                    tick,
                }
            };
            events.push(event);
        }
    }
    events
}

/// Push two overlapping same-type agents apart: each velocity gains the unit
/// vector pointing away from the other agent (shortest wrapped path), then is
/// re-capped at the agent's maximum speed. Coincident centres draw the
/// separation axis from `rng`. Acceleration is left untouched.
pub fn resolve_bounce<R: Rng + ?Sized>(
    a: &AgentBody,
    b: &AgentBody,
    torus: &Torus,
    rng: &mut R,
) -> (AgentBody, AgentBody) {
    let mut a_to_b = torus.direction(a.position, b.position).normalize_or_zero();
    if a_to_b.is_zero() {
        let deg: f64 = rng.gen_range(0.0..360.0);
        a_to_b = Vec2::from_bearing_deg(deg);
    }
    let mut na = *a;
    let mut nb = *b;
    na.set_velocity(limit(a.velocity - a_to_b, a.max_speed));
    nb.set_velocity(limit(b.velocity + a_to_b, b.max_speed));
    (na, nb)
}
