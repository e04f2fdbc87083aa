//! Comma-separated metrics tables: one row per episode and agent kind.

use std::io::{Read, Write};

use aquarium_core::metrics::{mean_sd, Deviation, EpisodeMetrics};
use aquarium_core::AgentKind;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub seed: u64,
    pub episode: usize,
    pub agent_kind: String,
    /// Mean over the kind's slots of each slot's episode reward.
    pub mean_reward: f64,
    pub sd_reward: f64,
    pub captures: u64,
}

/// Rows for each kind that had at least one agent in the episode.
pub fn episode_rows(seed: u64, episode: usize, metrics: &EpisodeMetrics) -> Vec<MetricsRow> {
    [AgentKind::Predator, AgentKind::Prey]
        .into_iter()
        .filter_map(|kind| {
            let (mean, sd) = mean_sd(&metrics.rewards_of(kind), Deviation::Population)?;
            Some(MetricsRow {
                seed,
                episode,
                agent_kind: kind.as_str().to_string(),
                mean_reward: mean,
                sd_reward: sd,
                captures: metrics.captures,
            })
        })
        .collect()
}

pub fn write_metrics_csv<W: Write>(out: W, rows: &[MetricsRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["seed", "episode", "agent_kind", "mean_reward", "sd_reward", "captures"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_csv<R: Read>(input: R) -> csv::Result<Vec<MetricsRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
