//! Deterministic predator-prey simulation core.
//!
//! Agents move on a continuous 2D torus using capped steering forces, collide
//! through circular hitboxes, perceive neighbours through an optional field of
//! view and receive per-step rewards. The crate also carries the scripted
//! baseline policies, episode metrics, a Lotka-Volterra reference integrator
//! and a small actor-critic PPO trainer.
//!
//! The crate is `no_std` (it needs `alloc`). All floating point math goes
//! through `libm`, so trajectories are bit-identical across platforms for a
//! given seed.

#![no_std]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod collision;
pub mod config;
pub mod env;
pub mod geometry;
pub mod heuristics;
pub mod lv;
pub mod metrics;
pub mod motion;
pub mod perception;
pub mod rng;
pub mod runner;
pub mod training;

pub use collision::{CollisionEvent, CollisionKind};
pub use config::{AccelerationRule, AquariumConfig, ConfigError, MotionModel};
pub use env::{AgentId, AgentKind, AgentState, AgentTag, EnvError, StepResult, World};
pub use geometry::{Torus, Vec2};
pub use motion::AgentBody;
pub use perception::{FieldOfView, Observation, ObservationSpec};
