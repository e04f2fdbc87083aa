use std::io::BufReader;

use aquarium::log::{read_log, TrajectoryLogger};
use aquarium::render::{export_episode, RenderOptions};
use aquarium_core::heuristics::ScriptedPolicy;
use aquarium_core::runner::{run_episode, Controller};
use aquarium_core::{AgentKind, AquariumConfig};

fn hundred_tick_log() -> Vec<u8> {
    let config = AquariumConfig {
        width: 400,
        height: 300,
        max_timesteps: 100,
        fov_enabled: true,
        draw_hit_box: true,
        draw_capture_points: true,
        ..Default::default()
    };
    let mut p = Controller::scripted(ScriptedPolicy::NaivChase, AgentKind::Predator, 3);
    let mut q = Controller::scripted(ScriptedPolicy::Random, AgentKind::Prey, 3);
    let mut logger = TrajectoryLogger::new(Vec::new());
    run_episode(&config, 3, &mut p, &mut q, &mut logger).unwrap();
    logger.finish().unwrap()
}

fn listing(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn hundred_ticks_give_hundred_frames_and_a_manifest() {
    let bytes = hundred_tick_log();
    let log = read_log(BufReader::new(&bytes[..])).unwrap();
    let opts = RenderOptions::from_config(&log.header.config);
    let dir = tempfile::tempdir().unwrap();
    let summary = export_episode(&log, &opts, dir.path()).unwrap();
    assert_eq!(summary.frames, 100);
    assert_eq!((summary.first_tick, summary.last_tick), (1, 100));

    let files = listing(dir.path());
    assert_eq!(files.len(), 101);
    assert_eq!(files[0].0, "frame_000001.ppm");
    assert_eq!(files[99].0, "frame_000100.ppm");
    let manifest = String::from_utf8(files[100].1.clone()).unwrap();
    assert!(manifest.contains("frames = 100\n"));
    assert!(manifest.contains(&format!("fingerprint = {}", log.header.fingerprint)));
    assert!(manifest.contains("width = 400\nheight = 300"));
    let first = &files[0].1;
    assert!(first.starts_with(b"P6\n400 300\n255\n"));
    assert_eq!(first.len(), "P6\n400 300\n255\n".len() + 400 * 300 * 3);
}

#[test]
fn re_export_is_byte_identical() {
    let bytes = hundred_tick_log();
    let log = read_log(BufReader::new(&bytes[..])).unwrap();
    let mut opts = RenderOptions::all_overlays();
    opts.scale = 2;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    export_episode(&log, &opts, a.path()).unwrap();
    export_episode(&log, &opts, b.path()).unwrap();
    assert_eq!(listing(a.path()), listing(b.path()));
}

#[test]
fn truncated_log_is_reported() {
    let bytes = hundred_tick_log();
    let cut = &bytes[..bytes.len() / 2];
    let err = read_log(BufReader::new(cut)).unwrap_err();
    assert!(matches!(err, aquarium::log::LogError::Truncated { last_valid_tick: Some(_) }), "{err}");
}
