//! Steering-force movement for one agent per tick.
//!
//! The pipeline for a tick is: desired velocity from the chosen target or
//! action, then [`steering_force`], then [`integrate_step`]. There is no
//! time step parameter; each call advances one tick.

use crate::config::{AccelerationRule, MotionModel};
use crate::geometry::{limit, Torus, Vec2};

/// Physical state and caps of an agent.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentBody {
    pub position: Vec2,
    pub velocity: Vec2,
    pub acceleration: Vec2,
    pub mass: f64,
    pub max_speed: f64,
    pub max_force: f64,
    pub max_accel: f64,
    /// Hitbox radius.
    pub radius: f64,
    /// Unit vector of the last nonzero velocity (north at spawn).
    pub heading: Vec2,
}

impl AgentBody {
    /// Body at rest at `position`, facing north.
    pub fn at_rest(
        position: Vec2,
        mass: f64,
        max_speed: f64,
        max_force: f64,
        max_accel: f64,
        radius: f64,
    ) -> Self {
        AgentBody {
            position,
            velocity: Vec2::ZERO,
            acceleration: Vec2::ZERO,
            mass,
            max_speed,
            max_force,
            max_accel,
            radius,
            heading: Vec2::NORTH,
        }
    }

    /// Direction the agent is facing: its velocity, or the last nonzero
    /// velocity direction when at rest.
    pub fn facing(&self) -> Vec2 {
        if self.velocity.is_zero() {
            self.heading
        } else {
            self.velocity
        }
    }

    /// Orientation in degrees, 0 = north, clockwise, `[0, 360)`.
    pub fn orientation_deg(&self) -> f64 {
        self.facing().bearing_deg()
    }

    pub fn speed(&self) -> f64 {
        self.velocity.length()
    }

    /// Replace the velocity, keeping the heading in sync.
    pub fn set_velocity(&mut self, v: Vec2) {
        self.velocity = v;
        if !v.is_zero() {
            self.heading = v.normalize_or_zero();
        }
    }
}

/// Vector towards `target` along the shortest wrapped path, capped at the
/// agent's maximum speed.
pub fn desired_velocity(body: &AgentBody, target: Vec2, torus: &Torus) -> Vec2 {
    limit(torus.direction(body.position, target), body.max_speed)
}

/// `D − V`, capped at the agent's maximum steering force.
pub fn steering_force(body: &AgentBody, desired: Vec2) -> Vec2 {
    let diff = desired - body.velocity;
    if diff.length() <= body.max_force {
        diff
    } else {
        diff.normalize_or_zero() * body.max_force
    }
}

/// Apply `force` for one tick: new acceleration, capped velocity, wrapped position.
pub fn integrate_step(body: &AgentBody, force: Vec2, torus: &Torus, model: MotionModel) -> AgentBody {
    let prior = if model.persist_acceleration {
        body.acceleration
    } else {
        Vec2::ZERO
    };
    let raw = prior + force / body.mass;
    let accel = match model.acceleration_rule {
        AccelerationRule::Normalize => raw.normalize_or_zero() * body.max_accel,
        AccelerationRule::Clamp => limit(raw, body.max_accel),
    };
    let velocity = limit(body.velocity + accel, body.max_speed);
    let mut next = *body;
    next.acceleration = accel;
    next.set_velocity(velocity);
    next.position = torus.wrap(body.position + velocity);
    next
}
