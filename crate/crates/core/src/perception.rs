//! Field-of-view filtering and fixed-length observation vectors.
//!
//! An observation is the observer's own 6-tuple followed by one 6-tuple per
//! visible neighbour (nearest first, ties by ascending id), zero-padded to
//! `b` neighbours. Tuple slots, before rescaling:
//!
//! | slot | quantity                                   | raw range            |
//! |------|--------------------------------------------|----------------------|
//! | 0    | type flag (predator = 1, prey = 0)         | `[0, 1]`             |
//! | 1    | compass bearing from observer to the agent | `[0, 360]`           |
//! | 2    | torus distance from the observer           | `[0, max distance]`  |
//! | 3    | orientation of the agent's heading         | `[0, 360]`           |
//! | 4    | speed                                      | `[0, kind max speed]`|
//! | 5    | presence flag (always 1 for a real agent)  | `[0, 1]`             |
//!
//! The observer's own tuple has bearing 0 and distance 0. Every slot of a real
//! tuple is mapped affinely onto `[scale_low, scale_high]`; padding stays
//! literally zero.

use alloc::vec;
use alloc::vec::Vec;

use crate::env::{AgentId, AgentKind};
use crate::geometry::{Torus, Vec2};
use crate::motion::AgentBody;

/// Values per agent tuple.
pub const TUPLE_LEN: usize = 6;

pub const SLOT_TYPE: usize = 0;
pub const SLOT_BEARING: usize = 1;
pub const SLOT_DISTANCE: usize = 2;
pub const SLOT_ORIENTATION: usize = 3;
pub const SLOT_SPEED: usize = 4;
pub const SLOT_PRESENCE: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldOfView {
    pub enabled: bool,
    pub view_distance: f64,
    /// Full cone angle in degrees, `(0, 360]`.
    pub view_angle_deg: f64,
}

impl FieldOfView {
    pub const OMNISCIENT: FieldOfView = FieldOfView {
        enabled: false,
        view_distance: f64::INFINITY,
        view_angle_deg: 360.0,
    };
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservationSpec {
    /// Maximum number of neighbours `b`.
    pub max_neighbors: usize,
    pub scale_low: f64,
    pub scale_high: f64,
}

impl ObservationSpec {
    /// `6 · (b + 1)`.
    pub fn len(&self) -> usize {
        TUPLE_LEN * (self.max_neighbors + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Affine map of `raw ∈ [min, max]` onto the scale range, clamped.
    pub fn scale(&self, raw: f64, min: f64, max: f64) -> f64 {
        let unit = if max > min { (raw - min) / (max - min) } else { 0.0 };
        let v = self.scale_low + unit * (self.scale_high - self.scale_low);
        v.clamp(self.scale_low, self.scale_high)
    }

    /// Inverse of [`ObservationSpec::scale`] for in-range values.
    pub fn unscale(&self, scaled: f64, min: f64, max: f64) -> f64 {
        let unit = (scaled - self.scale_low) / (self.scale_high - self.scale_low);
        min + unit * (max - min)
    }
}

/// Raw ranges used to rescale each tuple slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlotRanges {
    pub max_distance: f64,
    pub predator_max_speed: f64,
    pub prey_max_speed: f64,
}

impl SlotRanges {
    /// `(min, max)` of `slot` for an agent of `kind`.
    pub fn range(&self, slot: usize, kind: AgentKind) -> (f64, f64) {
        match slot {
            SLOT_BEARING | SLOT_ORIENTATION => (0.0, 360.0),
            SLOT_DISTANCE => (0.0, self.max_distance),
            SLOT_SPEED => (
                0.0,
                match kind {
                    AgentKind::Predator => self.predator_max_speed,
                    AgentKind::Prey => self.prey_max_speed,
                },
            ),
            _ => (0.0, 1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Observation {
    pub values: Vec<f64>,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Tuple `i` (0 is the observer itself).
    pub fn tuple(&self, i: usize) -> &[f64] {
        &self.values[i * TUPLE_LEN..(i + 1) * TUPLE_LEN]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Angle in degrees between two nonzero vectors, in `[0, 180]`.
fn angle_between_deg(a: Vec2, b: Vec2) -> f64 {
    let cross = a.x * b.y - a.y * b.x;
    libm::atan2(libm::fabs(cross), a.dot(b)).to_degrees()
}

/// Whether `other` lies in the observer's view cone. The cone is tested
/// against all nine torus translates of `other`; any hit counts. With the
/// field of view disabled every position is visible. A target at the
/// observer's own position is visible.
pub fn in_fov(observer: &AgentBody, other: Vec2, fov: &FieldOfView, torus: &Torus) -> bool {
    if !fov.enabled {
        return true;
    }
    let facing = observer.facing();
    let half = fov.view_angle_deg / 2.0;
    for i in [-1.0, 0.0, 1.0] {
        for j in [-1.0, 0.0, 1.0] {
            let copy = Vec2::new(other.x + i * torus.width(), other.y + j * torus.height());
            let to = copy - observer.position;
            if to.length() > fov.view_distance {
                continue;
            }
            if to.is_zero() || angle_between_deg(facing, to) <= half {
                return true;
            }
        }
    }
    false
}

/// Snapshot of one agent as seen by perception.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Percept {
    pub id: AgentId,
    pub kind: AgentKind,
    pub body: AgentBody,
}

/// Agents other than `observer` passing the observer's FOV, sorted by torus
/// distance then id, truncated to `limit`. Returns `(index into agents, distance)`.
pub fn visible_neighbors(
    observer: &Percept,
    agents: &[Percept],
    fov: &FieldOfView,
    torus: &Torus,
    limit: Option<usize>,
) -> Vec<(usize, f64)> {
    let mut seen: Vec<(usize, f64)> = agents
        .iter()
        .enumerate()
        .filter(|(_, p)| p.id != observer.id)
        .filter(|(_, p)| in_fov(&observer.body, p.body.position, fov, torus))
        .map(|(i, p)| (i, torus.distance(observer.body.position, p.body.position)))
        .collect();
    seen.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(agents[a.0].id.cmp(&agents[b.0].id))
    });
    if let Some(limit) = limit {
        seen.truncate(limit);
    }
    seen
}

/// Unscaled 6-tuple of `subject` seen from `observer`.
pub fn raw_tuple(observer: &AgentBody, subject: &Percept, torus: &Torus) -> [f64; TUPLE_LEN] {
    let offset = torus.direction(observer.position, subject.body.position);
    let flag = match subject.kind {
        AgentKind::Predator => 1.0,
        AgentKind::Prey => 0.0,
    };
    [
        flag,
        offset.bearing_deg(),
        torus.distance(observer.position, subject.body.position),
        subject.body.orientation_deg(),
        subject.body.speed(),
        1.0,
    ]
}

/// Observation of `observer` given its already selected, ordered neighbours.
pub fn encode_observation(
    observer: &Percept,
    neighbors: &[Percept],
    torus: &Torus,
    spec: &ObservationSpec,
    ranges: &SlotRanges,
) -> Observation {
    let mut values = vec![0.0; spec.len()];
    let subjects = core::iter::once(observer).chain(neighbors.iter().take(spec.max_neighbors));
    for (i, subject) in subjects.enumerate() {
        let raw = raw_tuple(&observer.body, subject, torus);
        for (slot, &r) in raw.iter().enumerate() {
            let (min, max) = ranges.range(slot, subject.kind);
            values[i * TUPLE_LEN + slot] = spec.scale(r, min, max);
        }
    }
    Observation { values }
}
