//! Environment parameters.

use core::fmt;

use crate::geometry::Torus;
use crate::perception::{FieldOfView, ObservationSpec};

/// How the new acceleration is derived from `A + F/m`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AccelerationRule {
    /// Rescale to exactly the maximum acceleration magnitude (zero stays zero).
    #[default]
    Normalize,
    /// Only cap the magnitude at the maximum acceleration.
    Clamp,
}

/// Variants of the movement model kept for sensitivity studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MotionModel {
    pub acceleration_rule: AccelerationRule,
    /// Acceleration carries over between ticks. When false it is reset to
    /// zero before each integration.
    pub persist_acceleration: bool,
}

impl Default for MotionModel {
    fn default() -> Self {
        MotionModel {
            acceleration_rule: AccelerationRule::Normalize,
            persist_acceleration: true,
        }
    }
}

/// Full environment configuration. Field names match the config-file keys.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(default, deny_unknown_fields)
)]
pub struct AquariumConfig {
    pub width: u32,
    pub height: u32,
    pub fps: u32,
    pub max_timesteps: u32,
    pub actions_number: u32,
    pub replication: bool,
    pub fov_enabled: bool,
    pub draw_action_vectors: bool,
    pub draw_hit_box: bool,
    pub draw_capture_points: bool,
    pub constant_fish_number: bool,
    pub record: bool,
    pub max_steer_force: f64,

    pub shark_number: u32,
    pub shark_max_acceleration: f64,
    pub shark_radius: u32,
    pub shark_max_velocity: u32,
    pub shark_view_distance: u32,
    pub observed_fish_number: u32,
    pub shark_starvation_age: u32,
    pub shark_view_angle: u32,

    pub fish_number: u32,
    pub fish_max_acceleration: f64,
    pub fish_radius: u32,
    pub fish_max_velocity: u32,
    pub fish_view_distance: u32,
    pub fish_replication_age: u32,
    pub fish_view_angle: u32,
    pub max_fish_number: u32,

    pub predator_catch_reward: f64,
    pub prey_step_reward: f64,
    pub prey_caught_penalty: f64,
    pub catch_zone_radius: f64,

    pub seed: u64,

    /// Not a file key.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub motion: MotionModel,
    /// Observation rescaling range; not a file key.
    #[cfg_attr(feature = "serde", serde(skip))]
    pub observation_scale: (f64, f64),
}

impl Default for AquariumConfig {
    fn default() -> Self {
        AquariumConfig {
            width: 800,
            height: 800,
            fps: 60,
            max_timesteps: 3000,
            actions_number: 8,
            replication: false,
            fov_enabled: false,
            draw_action_vectors: true,
            draw_hit_box: false,
            draw_capture_points: false,
            constant_fish_number: true,
            record: false,
            max_steer_force: 0.6,

            shark_number: 1,
            shark_max_acceleration: 0.6,
            shark_radius: 30,
            shark_max_velocity: 5,
            shark_view_distance: 200,
            observed_fish_number: 8,
            shark_starvation_age: 3000,
            shark_view_angle: 150,

            fish_number: 8,
            fish_max_acceleration: 1.0,
            fish_radius: 20,
            fish_max_velocity: 4,
            fish_view_distance: 100,
            fish_replication_age: 200,
            fish_view_angle: 100,
            max_fish_number: 20,

            predator_catch_reward: 10.0,
            prey_step_reward: 0.1,
            prey_caught_penalty: -10.0,
            catch_zone_radius: 50.0,

            seed: 0,
            motion: MotionModel::default(),
            observation_scale: (-1.0, 1.0),
        }
    }
}

/// A configuration field failed validation.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.reason)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ConfigError {}

fn check(ok: bool, field: &'static str, reason: &'static str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError { field, reason })
    }
}

impl AquariumConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check(self.width > 0, "width", "must be positive")?;
        check(self.height > 0, "height", "must be positive")?;
        check(self.max_timesteps >= 1, "max_timesteps", "must be at least 1")?;
        check(self.actions_number >= 2, "actions_number", "must be at least 2")?;
        check(
            self.max_steer_force > 0.0 && self.max_steer_force.is_finite(),
            "max_steer_force",
            "must be positive",
        )?;
        check(
            self.shark_max_acceleration > 0.0 && self.shark_max_acceleration.is_finite(),
            "shark_max_acceleration",
            "must be positive",
        )?;
        check(self.shark_radius > 0, "shark_radius", "must be positive")?;
        check(self.shark_max_velocity > 0, "shark_max_velocity", "must be positive")?;
        check(self.shark_view_distance > 0, "shark_view_distance", "must be positive")?;
        check(self.observed_fish_number > 0, "observed_fish_number", "must be positive")?;
        check(self.shark_starvation_age > 0, "shark_starvation_age", "must be positive")?;
        check(
            self.shark_view_angle > 0 && self.shark_view_angle <= 360,
            "shark_view_angle",
            "must be in (0, 360]",
        )?;
        check(
            self.fish_max_acceleration > 0.0 && self.fish_max_acceleration.is_finite(),
            "fish_max_acceleration",
            "must be positive",
        )?;
        check(self.fish_radius > 0, "fish_radius", "must be positive")?;
        check(self.fish_max_velocity > 0, "fish_max_velocity", "must be positive")?;
        check(self.fish_view_distance > 0, "fish_view_distance", "must be positive")?;
        check(self.fish_replication_age > 0, "fish_replication_age", "must be positive")?;
        check(
            self.fish_view_angle > 0 && self.fish_view_angle <= 360,
            "fish_view_angle",
            "must be in (0, 360]",
        )?;
        check(
            self.fish_number <= self.max_fish_number,
            "fish_number",
            "must not exceed max_fish_number",
        )?;
        check(
            self.predator_catch_reward.is_finite(),
            "predator_catch_reward",
            "must be finite",
        )?;
        check(self.prey_step_reward.is_finite(), "prey_step_reward", "must be finite")?;
        check(
            self.prey_caught_penalty.is_finite(),
            "prey_caught_penalty",
            "must be finite",
        )?;
        check(
            self.catch_zone_radius > 0.0 && self.catch_zone_radius.is_finite(),
            "catch_zone_radius",
            "must be positive",
        )?;
        let (lo, hi) = self.observation_scale;
        check(
            lo < hi && lo <= 0.0 && hi >= 0.0,
            "observation_scale",
            "must satisfy low < high with 0 inside the range",
        )?;
        Ok(())
    }

    pub fn torus(&self) -> Torus {
        Torus::new(self.width as f64, self.height as f64).expect("validated config")
    }

    pub fn shark_fov(&self) -> FieldOfView {
        FieldOfView {
            enabled: self.fov_enabled,
            view_distance: self.shark_view_distance as f64,
            view_angle_deg: self.shark_view_angle as f64,
        }
    }

    pub fn fish_fov(&self) -> FieldOfView {
        FieldOfView {
            enabled: self.fov_enabled,
            view_distance: self.fish_view_distance as f64,
            view_angle_deg: self.fish_view_angle as f64,
        }
    }

    pub fn observation_spec(&self) -> ObservationSpec {
        ObservationSpec {
            max_neighbors: self.observed_fish_number as usize,
            scale_low: self.observation_scale.0,
            scale_high: self.observation_scale.1,
        }
    }

    /// Length of every observation vector: `6 · (b + 1)`.
    pub fn observation_len(&self) -> usize {
        self.observation_spec().len()
    }
}
