//! Command-line front end: `run`, `train`, `eval`, `render` and `lv`.
//!
//! Every configuration key is also a flag (`fish_number` → `--fish-number`)
//! overriding the file given by `--config`. Each command writes the
//! effective configuration to `<out>/config.toml` with its fingerprint.
//!
//! Output layout under `--out`:
//!
//! ```text
//! config.toml                 effective configuration
//! metrics/metrics.csv         run / eval: one row per episode and agent kind
//! metrics/learning_curve.csv  train: same schema, one row per training episode
//! logs/seed<S>_ep<E>.jsonl    trajectory logs (--log or record = true)
//! checkpoints/seed<S>/…       train: periodic and final checkpoints
//! frames/                     render: numbered frames and manifest.txt
//! lv.csv                      lv: t,prey,predators
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use aquarium_core::heuristics::ScriptedPolicy;
use aquarium_core::lv::{lv_integrate, LvError, LvParams};
use aquarium_core::rng::derive_seed;
use aquarium_core::runner::{run_episode, Controller, EpisodeObserver};
use aquarium_core::training::{train, LearningMode, OptimizerKind, PpoHyperParams, TrainError};
use aquarium_core::{AgentKind, AquariumConfig, EnvError};
use clap::{Arg, ArgMatches, Args, Command, FromArgMatches, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::checkpoint::{Checkpoint, CheckpointError};
use crate::config_file::{apply_overrides, fingerprint, known_keys, load_config, to_toml_string, ConfigFileError};
use crate::export::{episode_rows, write_metrics_csv, MetricsRow};
use crate::log::TrajectoryLogger;
#[cfg(feature = "png")]
use crate::render::ImageFormat;
use crate::render::{export_episode, RenderError, RenderOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigFileError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Lv(#[from] LvError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "aquarium", version, about = "Predator-prey simulation on a torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Debug, Subcommand)]
pub enum Commands {
    /// Run episodes with scripted or checkpoint policies.
    Run(RunArgs),
    /// Train the prey with PPO against a NaivChase predator.
    Train(TrainArgs),
    /// Evaluate a checkpoint without updating it.
    Eval(EvalArgs),
    /// Export frames from a trajectory log.
    Render(RenderArgs),
    /// Integrate the Lotka-Volterra equations.
    Lv(LvArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file (TOML, flat keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seeds, comma separated. Defaults to the configured seed.
    #[arg(long, value_delimiter = ',')]
    pub seed: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub episodes: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// random | turn_away | path to a checkpoint
    #[arg(long, default_value = "random")]
    pub prey_policy: String,
    /// random | naiv_chase
    #[arg(long, default_value = "naiv_chase")]
    pub predator_policy: String,
    /// Write a trajectory log per episode.
    #[arg(long)]
    pub log: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Il,
    Ps,
}

impl From<ModeArg> for LearningMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Il => LearningMode::IndividualLearning,
            ModeArg::Ps => LearningMode::ParameterSharing,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "ps")]
    pub mode: ModeArg,
    /// Ticks per training episode.
    #[arg(long, default_value_t = 3000)]
    pub episode_length: usize,
    #[arg(long, default_value_t = 2048)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 4)]
    pub epochs_per_update: usize,
    #[arg(long, default_value_t = 16)]
    pub minibatch_size: usize,
    #[arg(long)]
    pub adam: bool,
    /// Write a checkpoint every N episodes (0: final only).
    #[arg(long, default_value_t = 0)]
    pub checkpoint_every: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// random | naiv_chase
    #[arg(long, default_value = "naiv_chase")]
    pub predator_policy: String,
    /// Take the most probable action instead of sampling.
    #[arg(long)]
    pub greedy: bool,
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Trajectory log to render.
    #[arg(long)]
    pub log: PathBuf,
    /// Frames directory.
    #[arg(long, default_value = "out/frames")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub scale: u32,
    /// Draw every overlay regardless of the logged flags.
    #[arg(long)]
    pub all_overlays: bool,
    #[cfg(feature = "png")]
    #[arg(long)]
    pub png: bool,
}

#[derive(Debug, Args)]
pub struct LvArgs {
    #[arg(long, default_value_t = 1.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.4)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.4)]
    pub gamma: f64,
    #[arg(long, default_value_t = 10.0)]
    pub x0: f64,
    #[arg(long, default_value_t = 10.0)]
    pub y0: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 5000)]
    pub steps: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

const CONFIG_COMMANDS: [&str; 3] = ["run", "train", "eval"];

fn flag_id(key: &str) -> String {
    format!("cfg_{key}")
}

/// The derived command plus one flag per configuration key on the
/// commands that build a world.
pub fn command() -> Command {
    let keys = known_keys();
    let mut cmd = <Cli as clap::CommandFactory>::command();
    for name in CONFIG_COMMANDS {
        cmd = cmd.mut_subcommand(name, |mut sc| {
            for key in &keys {
                if key == "seed" {
                    continue;
                }
                sc = sc.arg(
                    Arg::new(flag_id(key))
                        .long(key.replace('_', "-"))
                        .value_name("VALUE")
                        .help_heading("Configuration")
                        .help(format!("Override `{key}`")),
                );
            }
            sc
        });
    }
    cmd
}

/// Config flags given on the command line. Subcommands without config
/// flags yield nothing.
fn config_overrides(matches: &ArgMatches) -> Vec<(String, String)> {
    known_keys()
        .into_iter()
        .filter(|k| k != "seed")
        .filter_map(|k| {
            let v = matches.try_get_one::<String>(&flag_id(&k)).ok().flatten()?;
            Some((k, v.clone()))
        })
        .collect()
}

/// Parse `args` (including the program name) and execute.
pub fn run_from_args<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = command().try_get_matches_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;
    let sub = matches.subcommand().map(|(_, m)| m.clone()).expect("subcommand required");
    execute(cli.command, &config_overrides(&sub))
}

pub fn execute(command: Commands, overrides: &[(String, String)]) -> Result<(), CliError> {
    match command {
        Commands::Run(a) => cmd_run(a, overrides),
        Commands::Train(a) => cmd_train(a, overrides),
        Commands::Eval(a) => cmd_eval(a, overrides),
        Commands::Render(a) => cmd_render(a),
        Commands::Lv(a) => cmd_lv(a),
    }
}

fn effective_config(common: &Common, overrides: &[(String, String)]) -> Result<AquariumConfig, CliError> {
    let base = match &common.config {
        Some(p) => load_config(p)?,
        None => AquariumConfig::default(),
    };
    Ok(apply_overrides(&base, overrides)?)
}

fn seeds(common: &Common, config: &AquariumConfig) -> Vec<u64> {
    if common.seed.is_empty() {
        vec![config.seed]
    } else {
        common.seed.clone()
    }
}

fn write_config(out: &Path, config: &AquariumConfig) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(io_at(out))?;
    let path = out.join("config.toml");
    let text = format!("# fingerprint = {}\n{}", fingerprint(config), to_toml_string(config));
    fs::write(&path, text).map_err(io_at(&path))
}

fn write_rows(path: &Path, rows: &[MetricsRow]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_at(dir))?;
    }
    let file = fs::File::create(path).map_err(io_at(path))?;
    write_metrics_csv(BufWriter::new(file), rows)?;
    Ok(())
}

fn scripted(name: &str, kind: AgentKind) -> Result<ScriptedPolicy, CliError> {
    let policy = match name {
        "random" => ScriptedPolicy::Random,
        "turn_away" => ScriptedPolicy::TurnAway,
        "naiv_chase" => ScriptedPolicy::NaivChase,
        other => return Err(CliError::Usage(format!("unknown policy `{other}`"))),
    };
    if !policy.supports(kind) {
        return Err(CliError::Usage(format!("policy `{name}` cannot drive {} agents", kind.as_str())));
    }
    Ok(policy)
}

/// How prey are controlled in `run`/`eval`.
#[derive(Clone)]
enum PreySource {
    Scripted(ScriptedPolicy),
    Checkpoint(Box<Checkpoint>, bool),
}

impl PreySource {
    fn controller(&self, seed: u64) -> Controller {
        match self {
            PreySource::Scripted(p) => Controller::scripted(*p, AgentKind::Prey, seed),
            PreySource::Checkpoint(ck, greedy) => Controller::Learned(Box::new(ck.controller(*greedy, seed))),
        }
    }
}

/// Episodes for every seed, seeds in parallel. Episode `e` of seed `s` runs
/// on `derive_seed(s, e)`.
fn run_episodes(
    config: &AquariumConfig,
    seeds: &[u64],
    episodes: usize,
    predator: ScriptedPolicy,
    prey: &PreySource,
    log_dir: Option<&Path>,
) -> Result<Vec<MetricsRow>, CliError> {
    if let Some(dir) = log_dir {
        fs::create_dir_all(dir).map_err(io_at(dir))?;
    }
    let per_seed: Vec<Result<Vec<MetricsRow>, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                scope.spawn(move || -> Result<Vec<MetricsRow>, CliError> {
                    let mut rows = Vec::new();
                    for ep in 0..episodes {
                        let episode_seed = derive_seed(seed, ep as u64);
                        let mut p = Controller::scripted(predator, AgentKind::Predator, episode_seed);
                        let mut q = prey.controller(episode_seed);
                        let metrics = match log_dir {
                            Some(dir) => {
                                let path = dir.join(format!("seed{seed}_ep{ep}.jsonl"));
                                let file = fs::File::create(&path).map_err(io_at(&path))?;
                                let mut logger = TrajectoryLogger::new(BufWriter::new(file));
                                let m = run_episode(config, episode_seed, &mut p, &mut q, &mut logger)?;
                                logger.finish().map_err(io_at(&path))?;
                                m
                            }
                            None => run_episode(config, episode_seed, &mut p, &mut q, &mut () as &mut dyn EpisodeObserver)?,
                        };
                        rows.extend(episode_rows(seed, ep, &metrics));
                    }
                    Ok(rows)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    Ok(rows)
}

fn cmd_run(a: RunArgs, overrides: &[(String, String)]) -> Result<(), CliError> {
    let config = effective_config(&a.common, overrides)?;
    let predator = scripted(&a.predator_policy, AgentKind::Predator)?;
    let prey = match scripted(&a.prey_policy, AgentKind::Prey) {
        Ok(p) => PreySource::Scripted(p),
        Err(_) if Path::new(&a.prey_policy).is_file() => {
            let ck = Checkpoint::load(Path::new(&a.prey_policy))?;
            ck.check_compatible(&config)?;
            PreySource::Checkpoint(Box::new(ck), false)
        }
        Err(e) => return Err(e),
    };
    write_config(&a.common.out, &config)?;
    let logs = (a.log || config.record).then(|| a.common.out.join("logs"));
    let rows = run_episodes(&config, &seeds(&a.common, &config), a.common.episodes, predator, &prey, logs.as_deref())?;
    write_rows(&a.common.out.join("metrics").join("metrics.csv"), &rows)
}

fn cmd_eval(a: EvalArgs, overrides: &[(String, String)]) -> Result<(), CliError> {
    let config = effective_config(&a.common, overrides)?;
    let predator = scripted(&a.predator_policy, AgentKind::Predator)?;
    let ck = Checkpoint::load(&a.checkpoint)?;
    ck.check_compatible(&config)?;
    write_config(&a.common.out, &config)?;
    let prey = PreySource::Checkpoint(Box::new(ck), a.greedy);
    let logs = (a.log || config.record).then(|| a.common.out.join("logs"));
    let rows = run_episodes(&config, &seeds(&a.common, &config), a.common.episodes, predator, &prey, logs.as_deref())?;
    write_rows(&a.common.out.join("metrics").join("metrics.csv"), &rows)
}

fn cmd_train(a: TrainArgs, overrides: &[(String, String)]) -> Result<(), CliError> {
    let config = effective_config(&a.common, overrides)?;
    let hp = PpoHyperParams {
        episodes: a.common.episodes,
        episode_length: a.episode_length,
        batch_size: a.batch_size,
        epochs_per_update: a.epochs_per_update,
        minibatch_size: a.minibatch_size,
        optimizer: if a.adam { OptimizerKind::Adam } else { OptimizerKind::Sgd },
        ..Default::default()
    };
    hp.validate()?;
    let mode: LearningMode = a.mode.into();
    write_config(&a.common.out, &config)?;
    let seeds = seeds(&a.common, &config);
    let results: Vec<Result<Vec<MetricsRow>, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let (config, hp, out) = (&config, &hp, &a.common.out);
                scope.spawn(move || -> Result<Vec<MetricsRow>, CliError> {
                    let dir = out.join("checkpoints").join(format!("seed{seed}"));
                    fs::create_dir_all(&dir).map_err(io_at(&dir))?;
                    let mut save_error = None;
                    let outcome = train(mode, config, hp, seed, |p| {
                        let due = a.checkpoint_every > 0 && (p.episode + 1) % a.checkpoint_every == 0;
                        if due && save_error.is_none() {
                            let ck = Checkpoint::from_policies(mode, p.policies.to_vec(), p.slot_policy.clone(), hp, config);
                            save_error = ck.save(&dir.join(format!("episode_{:06}.ckpt", p.episode + 1))).err();
                        }
                    })?;
                    if let Some(e) = save_error {
                        return Err(e.into());
                    }
                    Checkpoint::from_outcome(&outcome, hp, config).save(&dir.join("final.ckpt"))?;
                    Ok(outcome
                        .curve
                        .iter()
                        .enumerate()
                        .flat_map(|(ep, m)| episode_rows(seed, ep, m))
                        .collect())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    write_rows(&a.common.out.join("metrics").join("learning_curve.csv"), &rows)
}

fn cmd_render(a: RenderArgs) -> Result<(), CliError> {
    let file = fs::File::open(&a.log).map_err(io_at(&a.log))?;
    let log = crate::log::read_log(std::io::BufReader::new(file)).map_err(RenderError::from)?;
    let mut opts = if a.all_overlays {
        RenderOptions::all_overlays()
    } else {
        RenderOptions::from_config(&log.header.config)
    };
    opts.scale = a.scale.max(1);
    #[cfg(feature = "png")]
    if a.png {
        opts.format = ImageFormat::Png;
    }
    let summary = export_episode(&log, &opts, &a.out)?;
    println!(
        "{} frames (ticks {}..={}) written to {}",
        summary.frames,
        summary.first_tick,
        summary.last_tick,
        a.out.display()
    );
    Ok(())
}

fn cmd_lv(a: LvArgs) -> Result<(), CliError> {
    let params = LvParams {
        alpha: a.alpha,
        beta: a.beta,
        delta: a.delta,
        gamma: a.gamma,
    };
    let samples = lv_integrate(&params, a.x0, a.y0, a.dt, a.steps)?;
    fs::create_dir_all(&a.out).map_err(io_at(&a.out))?;
    let path = a.out.join("lv.csv");
    let file = fs::File::create(&path).map_err(io_at(&path))?;
    let mut w = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(w, "t,prey,predators")?;
        for s in &samples {
            writeln!(w, "{},{},{}", s.t, s.prey, s.predators)?;
        }
        w.flush()
    };
    write().map_err(io_at(&path))
}
