//! Frame rendering from trajectory logs.
//!
//! Pixel coordinates wrap around the image edges the same way positions
//! wrap around the torus, so shapes near a border continue on the opposite
//! side. All drawing is integer or plain float arithmetic with a fixed
//! order, so identical inputs give identical bytes.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use aquarium_core::geometry::sin_cos_deg;
use aquarium_core::AgentKind;
use thiserror::Error;

use crate::log::{read_log, AgentRecord, CaptureRecord, LogError, LogHeader, TickRecord, TrajectoryLog};

pub type Rgb = [u8; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Theme {
    pub background: Rgb,
    pub predator: Rgb,
    pub prey: Rgb,
    pub hitbox: Rgb,
    pub action: Rgb,
    pub velocity: Rgb,
    pub acceleration: Rgb,
    pub predator_fov: Rgb,
    pub prey_fov: Rgb,
    /// Used for nothing else, so markers can be counted by color.
    pub capture: Rgb,
}

impl Default for Theme {
    fn default() -> Self {
        Theme {
            background: [12, 28, 48],
            predator: [235, 140, 30],
            prey: [200, 220, 235],
            hitbox: [250, 250, 120],
            action: [255, 0, 0],
            velocity: [0, 0, 255],
            acceleration: [0, 255, 0],
            predator_fov: [110, 60, 60],
            prey_fov: [60, 90, 110],
            capture: [255, 0, 255],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    #[cfg(feature = "png")]
    Png,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    pub draw_action_vectors: bool,
    pub draw_velocity_accel: bool,
    pub draw_hitboxes: bool,
    pub draw_capture_points: bool,
    /// Cones are drawn only when the logged config has vision limits on.
    pub draw_fov_cones: bool,
    /// Pixels per world unit.
    pub scale: u32,
    pub theme: Theme,
    pub format: ImageFormat,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            draw_action_vectors: true,
            draw_velocity_accel: true,
            draw_hitboxes: false,
            draw_capture_points: false,
            draw_fov_cones: true,
            scale: 1,
            theme: Theme::default(),
            format: ImageFormat::Ppm,
        }
    }
}

impl RenderOptions {
    /// Overlay flags taken from the logged configuration.
    pub fn from_config(config: &aquarium_core::AquariumConfig) -> Self {
        RenderOptions {
            draw_action_vectors: config.draw_action_vectors,
            draw_velocity_accel: config.draw_action_vectors,
            draw_hitboxes: config.draw_hit_box,
            draw_capture_points: config.draw_capture_points,
            ..Default::default()
        }
    }

    pub fn all_overlays() -> Self {
        RenderOptions {
            draw_action_vectors: true,
            draw_velocity_accel: true,
            draw_hitboxes: true,
            draw_capture_points: true,
            draw_fov_cones: true,
            ..Default::default()
        }
    }
}

/// RGB raster with wrapping pixel access.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Canvas {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Canvas {
    pub fn new(width: u32, height: u32, fill: Rgb) -> Canvas {
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for _ in 0..width as usize * height as usize {
            pixels.extend_from_slice(&fill);
        }
        Canvas { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    fn index(&self, x: i64, y: i64) -> usize {
        let x = x.rem_euclid(self.width as i64) as usize;
        let y = y.rem_euclid(self.height as i64) as usize;
        (y * self.width as usize + x) * 3
    }

    pub fn get(&self, x: i64, y: i64) -> Rgb {
        let i = self.index(x, y);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn put(&mut self, x: i64, y: i64, c: Rgb) {
        let i = self.index(x, y);
        self.pixels[i..i + 3].copy_from_slice(&c);
    }

    /// 3:1 mix of the current pixel and `c`.
    fn tint(&mut self, x: i64, y: i64, c: Rgb) {
        let i = self.index(x, y);
        for (p, c) in self.pixels[i..i + 3].iter_mut().zip(c) {
            *p = ((3 * *p as u16 + c as u16) / 4) as u8;
        }
    }

    pub fn fill_disc(&mut self, cx: f64, cy: f64, r: f64, c: Rgb) {
        let (x0, x1) = ((cx - r).floor() as i64, (cx + r).ceil() as i64);
        let (y0, y1) = ((cy - r).floor() as i64, (cy + r).ceil() as i64);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r * r {
                    self.put(x, y, c);
                }
            }
        }
    }

    pub fn ring(&mut self, cx: f64, cy: f64, r: f64, c: Rgb) {
        let (x0, x1) = ((cx - r - 1.0).floor() as i64, (cx + r + 1.0).ceil() as i64);
        let (y0, y1) = ((cy - r - 1.0).floor() as i64, (cy + r + 1.0).ceil() as i64);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if ((dx * dx + dy * dy).sqrt() - r).abs() <= 0.5 {
                    self.put(x, y, c);
                }
            }
        }
    }

    pub fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, c: Rgb) {
        let steps = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as i64;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let x = x0 + (x1 - x0) * t;
            let y = y0 + (y1 - y0) * t;
            self.put(x.floor() as i64, y.floor() as i64, c);
        }
    }

    /// Tint the sector of radius `r` around `facing` with half-angle
    /// `half_deg`.
    pub fn sector(&mut self, cx: f64, cy: f64, r: f64, facing: (f64, f64), half_deg: f64, c: Rgb) {
        let norm = (facing.0 * facing.0 + facing.1 * facing.1).sqrt();
        if norm == 0.0 {
            return;
        }
        let (fx, fy) = (facing.0 / norm, facing.1 / norm);
        let cos_half = half_deg.to_radians().cos();
        let (x0, x1) = ((cx - r).floor() as i64, (cx + r).ceil() as i64);
        let (y0, y1) = ((cy - r).floor() as i64, (cy + r).ceil() as i64);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                let d2 = dx * dx + dy * dy;
                if d2 > r * r {
                    continue;
                }
                let d = d2.sqrt();
                if d == 0.0 || (dx * fx + dy * fy) / d >= cos_half {
                    self.tint(x, y, c);
                }
            }
        }
    }

    pub fn cross(&mut self, cx: f64, cy: f64, half: i64, c: Rgb) {
        let (x, y) = (cx.floor() as i64, cy.floor() as i64);
        for k in -half..=half {
            self.put(x + k, y + k, c);
            self.put(x + k, y - k, c);
        }
    }

    /// Binary PPM (P6).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    #[cfg(feature = "png")]
    pub fn to_png(&self) -> Vec<u8> {
        let mut out = Vec::new();
        image::codecs::png::PngEncoder::new(&mut out)
            .write_image(&self.pixels, self.width, self.height, image::ExtendedColorType::Rgb8)
            .map(|_| out)
            .expect("in-memory PNG encoding")
    }
}

#[cfg(feature = "png")]
use image::ImageEncoder;

const ACTION_LENGTH: f64 = 30.0;
const VELOCITY_GAIN: f64 = 8.0;
const ACCELERATION_GAIN: f64 = 20.0;
const CAPTURE_MARK: i64 = 4;

/// Draw one tick. `captures` are all capture points up to and including
/// this tick.
pub fn render_frame(header: &LogHeader, tick: &TickRecord, captures: &[CaptureRecord], opts: &RenderOptions) -> Canvas {
    let cfg = &header.config;
    let s = opts.scale.max(1) as f64;
    let theme = &opts.theme;
    let mut canvas = Canvas::new(cfg.width * opts.scale.max(1), cfg.height * opts.scale.max(1), theme.background);
    let alive: Vec<&AgentRecord> = tick.agents.iter().filter(|a| a.alive).collect();

    if opts.draw_fov_cones && cfg.fov_enabled {
        for a in &alive {
            let (dist, angle, color) = match a.kind {
                AgentKind::Predator => (cfg.shark_view_distance, cfg.shark_view_angle, theme.predator_fov),
                AgentKind::Prey => (cfg.fish_view_distance, cfg.fish_view_angle, theme.prey_fov),
            };
            canvas.sector(a.x * s, a.y * s, dist as f64 * s, (a.hx, a.hy), angle as f64 / 2.0, color);
        }
    }
    if opts.draw_capture_points {
        for c in captures {
            canvas.cross(c.x * s, c.y * s, CAPTURE_MARK, theme.capture);
        }
    }
    for a in &alive {
        let (radius, color) = match a.kind {
            AgentKind::Predator => (cfg.shark_radius, theme.predator),
            AgentKind::Prey => (cfg.fish_radius, theme.prey),
        };
        let (x, y) = (a.x * s, a.y * s);
        canvas.fill_disc(x, y, (radius as f64 * 0.4 * s).max(1.0), color);
        if opts.draw_hitboxes {
            canvas.ring(x, y, radius as f64 * s, theme.hitbox);
        }
    }
    for a in &alive {
        let (x, y) = (a.x * s, a.y * s);
        if opts.draw_velocity_accel {
            canvas.line(x, y, x + a.vx * VELOCITY_GAIN * s, y + a.vy * VELOCITY_GAIN * s, theme.velocity);
            canvas.line(x, y, x + a.ax * ACCELERATION_GAIN * s, y + a.ay * ACCELERATION_GAIN * s, theme.acceleration);
        }
        if opts.draw_action_vectors {
            if let Some(action) = a.action {
                let (sin, cos) = sin_cos_deg(360.0 * action as f64 / cfg.actions_number as f64);
                canvas.line(x, y, x + sin * ACTION_LENGTH * s, y - cos * ACTION_LENGTH * s, theme.action);
            }
        }
    }
    canvas
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("log has no ticks to render")]
    Empty,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RenderError + '_ {
    move |source| RenderError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExportSummary {
    pub frames: usize,
    pub first_tick: u64,
    pub last_tick: u64,
    pub manifest: PathBuf,
}

pub fn frame_name(tick: u64, format: ImageFormat) -> String {
    let ext = match format {
        ImageFormat::Ppm => "ppm",
        #[cfg(feature = "png")]
        ImageFormat::Png => "png",
    };
    format!("frame_{tick:06}.{ext}")
}

fn encode(canvas: &Canvas, format: ImageFormat) -> Vec<u8> {
    match format {
        ImageFormat::Ppm => canvas.to_ppm(),
        #[cfg(feature = "png")]
        ImageFormat::Png => canvas.to_png(),
    }
}

/// Render one frame per simulated tick (ticks `1..=N`; the reset state is
/// not a tick) into `dir`, plus `manifest.txt`. Frames are rendered in
/// parallel.
pub fn export_episode(log: &TrajectoryLog, opts: &RenderOptions, dir: &Path) -> Result<ExportSummary, RenderError> {
    let ticks: Vec<&TickRecord> = log.ticks.iter().filter(|t| t.tick > 0).collect();
    if ticks.is_empty() {
        return Err(RenderError::Empty);
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    // captures[..upto[i]] are the ones at or before ticks[i]
    let mut captures = Vec::new();
    let mut upto = Vec::with_capacity(ticks.len());
    for t in &ticks {
        captures.extend_from_slice(&t.captures);
        upto.push(captures.len());
    }

    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(ticks.len());
    let results: Vec<Result<(), RenderError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (ticks, captures, upto) = (&ticks, &captures, &upto);
                scope.spawn(move || -> Result<(), RenderError> {
                    for i in (w..ticks.len()).step_by(workers) {
                        let canvas = render_frame(&log.header, ticks[i], &captures[..upto[i]], opts);
                        let path = dir.join(frame_name(ticks[i].tick, opts.format));
                        fs::write(&path, encode(&canvas, opts.format)).map_err(io_err(&path))?;
                    }
                    Ok(())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("render worker panicked")).collect()
    });
    for r in results {
        r?;
    }

    let summary = ExportSummary {
        frames: ticks.len(),
        first_tick: ticks[0].tick,
        last_tick: ticks[ticks.len() - 1].tick,
        manifest: dir.join("manifest.txt"),
    };
    let mut manifest = fs::File::create(&summary.manifest).map_err(io_err(&summary.manifest))?;
    writeln!(
        manifest,
        "frames = {}\nfirst_tick = {}\nlast_tick = {}\nfingerprint = {}\nseed = {}\nwidth = {}\nheight = {}\nfile_pattern = {}",
        summary.frames,
        summary.first_tick,
        summary.last_tick,
        log.header.fingerprint,
        log.header.seed,
        log.header.config.width * opts.scale.max(1),
        log.header.config.height * opts.scale.max(1),
        frame_name(0, opts.format).replace("000000", "%06d"),
    )
    .map_err(io_err(&summary.manifest))?;
    Ok(summary)
}

/// [`export_episode`] reading the log from a file.
pub fn export_log_file(log_path: &Path, opts: &RenderOptions, dir: &Path) -> Result<ExportSummary, RenderError> {
    let file = fs::File::open(log_path).map_err(io_err(log_path))?;
    let log = read_log(BufReader::new(file))?;
    export_episode(&log, opts, dir)
}
