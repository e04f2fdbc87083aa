//! Line-delimited JSON trajectory logs.
//!
//! A log is one `header` record, one `tick` record per tick starting with
//! the reset state at tick 0, and a closing `footer`. Every record is a
//! single JSON object on its own line with a `type` field. Agent entries
//! carry, in order: `id, kind, slot, x, y, vx, vy, ax, ay, hx, hy, action,
//! reward, alive` (`hx, hy` is the facing direction, `action` is null at
//! tick 0 and for agents spawned during the tick). Agents removed during a
//! tick appear once more with `alive: false`.

use std::io::{self, BufRead, Write};

use aquarium_core::runner::EpisodeObserver;
use aquarium_core::{AgentKind, AgentState, AquariumConfig, StepResult, World};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config_file::fingerprint;

pub const LOG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub version: u32,
    pub seed: u64,
    pub fingerprint: String,
    pub config: AquariumConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: u32,
    pub kind: AgentKind,
    pub slot: u32,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub ax: f64,
    pub ay: f64,
    pub hx: f64,
    pub hy: f64,
    pub action: Option<usize>,
    pub reward: f64,
    pub alive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureRecord {
    pub predator: u32,
    pub prey: u32,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub agents: Vec<AgentRecord>,
    pub captures: Vec<CaptureRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFooter {
    pub ticks: u64,
    pub captures: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Header(LogHeader),
    Tick(TickRecord),
    Footer(LogFooter),
}

fn agent_record(a: &AgentState, action: Option<usize>, reward: f64) -> AgentRecord {
    let b = &a.body;
    let facing = b.facing();
    AgentRecord {
        id: a.id.0,
        kind: a.kind,
        slot: a.slot,
        x: b.position.x,
        y: b.position.y,
        vx: b.velocity.x,
        vy: b.velocity.y,
        ax: b.acceleration.x,
        ay: b.acceleration.y,
        hx: facing.x,
        hy: facing.y,
        action,
        reward,
        alive: a.alive,
    }
}

/// Snapshot of the world after reset.
pub fn reset_record(world: &World) -> TickRecord {
    TickRecord {
        tick: world.tick(),
        agents: world.agents().iter().map(|a| agent_record(a, None, 0.0)).collect(),
        captures: Vec::new(),
    }
}

/// Snapshot of the world after a step, including the agents it removed.
pub fn step_record(world: &World, step: &StepResult) -> TickRecord {
    let actions = world.last_actions();
    let mut agents: Vec<AgentRecord> = world
        .agents()
        .iter()
        .chain(world.departed())
        .map(|a| {
            agent_record(
                a,
                actions.get(&a.id).copied(),
                step.rewards.get(&a.id).copied().unwrap_or(0.0),
            )
        })
        .collect();
    agents.sort_by_key(|a| a.id);
    let captures = step
        .capture_events
        .iter()
        .map(|e| CaptureRecord {
            predator: e.agent_a.0,
            prey: e.agent_b.0,
            x: e.location.x,
            y: e.location.y,
        })
        .collect();
    TickRecord {
        tick: step.tick,
        agents,
        captures,
    }
}

fn write_record<W: Write>(out: &mut W, record: &LogRecord) -> io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}

/// Episode observer that streams a log to `W`. I/O errors are held until
/// [`TrajectoryLogger::finish`].
pub struct TrajectoryLogger<W: Write> {
    out: W,
    error: Option<io::Error>,
    ticks: u64,
    captures: u64,
}

impl<W: Write> TrajectoryLogger<W> {
    pub fn new(out: W) -> Self {
        TrajectoryLogger {
            out,
            error: None,
            ticks: 0,
            captures: 0,
        }
    }

    fn emit(&mut self, record: &LogRecord) {
        if self.error.is_none() {
            if let Err(e) = write_record(&mut self.out, record) {
                self.error = Some(e);
            }
        }
    }

    /// Write the footer, flush and return the writer.
    pub fn finish(mut self) -> io::Result<W> {
        let footer = LogRecord::Footer(LogFooter {
            ticks: self.ticks,
            captures: self.captures,
        });
        self.emit(&footer);
        if let Some(e) = self.error {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> EpisodeObserver for TrajectoryLogger<W> {
    fn on_reset(&mut self, world: &World) {
        let config = world.config().clone();
        self.emit(&LogRecord::Header(LogHeader {
            version: LOG_VERSION,
            seed: world.seed(),
            fingerprint: fingerprint(&config),
            config,
        }));
        self.emit(&LogRecord::Tick(reset_record(world)));
    }

    fn on_step(&mut self, world: &World, step: &StepResult) {
        self.ticks += 1;
        self.captures += step.capture_events.len() as u64;
        self.emit(&LogRecord::Tick(step_record(world, step)));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryLog {
    pub header: LogHeader,
    pub ticks: Vec<TickRecord>,
    pub footer: LogFooter,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("log is truncated; last valid tick is {}", last_valid_tick.map_or("none".to_string(), |t| t.to_string()))]
    Truncated { last_valid_tick: Option<u64> },
}

/// Parse and validate a complete log.
pub fn read_log<R: BufRead>(mut input: R) -> Result<TrajectoryLog, LogError> {
    let mut header = None;
    let mut ticks: Vec<TickRecord> = Vec::new();
    let mut line_no = 0;
    let mut buf = String::new();
    loop {
        buf.clear();
        if input.read_line(&mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let complete = buf.ends_with('\n');
        let text = buf.trim_end();
        if text.is_empty() {
            continue;
        }
        let last_valid_tick = ticks.last().map(|t| t.tick);
        let record: LogRecord = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(_) if !complete => return Err(LogError::Truncated { last_valid_tick }),
            Err(e) => {
                return Err(LogError::Parse {
                    line: line_no,
                    message: e.to_string(),
                })
            }
        };
        let parse = |message: String| LogError::Parse { line: line_no, message };
        match record {
            LogRecord::Header(h) => {
                if header.is_some() || !ticks.is_empty() {
                    return Err(parse("unexpected header".into()));
                }
                if h.version != LOG_VERSION {
                    return Err(parse(format!("unsupported log version {}", h.version)));
                }
                header = Some(h);
            }
            LogRecord::Tick(t) => {
                if header.is_none() {
                    return Err(parse("tick record before header".into()));
                }
                let expected = last_valid_tick.map_or(0, |x| x + 1);
                if t.tick != expected {
                    return Err(parse(format!("expected tick {expected}, found {}", t.tick)));
                }
                ticks.push(t);
            }
            LogRecord::Footer(footer) => {
                let Some(header) = header else {
                    return Err(parse("footer before header".into()));
                };
                if footer.ticks + 1 != ticks.len() as u64 {
                    return Err(parse(format!(
                        "footer counts {} ticks but {} were logged",
                        footer.ticks,
                        ticks.len().saturating_sub(1)
                    )));
                }
                return Ok(TrajectoryLog { header, ticks, footer });
            }
        }
    }
    if header.is_none() && line_no == 0 {
        return Err(LogError::Parse {
            line: 0,
            message: "empty log".into(),
        });
    }
    Err(LogError::Truncated {
        last_valid_tick: ticks.last().map(|t| t.tick),
    })
}
