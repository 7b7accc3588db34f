use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rirsim_core::render::{write_wav, SampleFormat};

fn rirsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rirsim"))
        .args(args)
        .env_remove("RIRSIM_MATERIALS")
        .output()
        .expect("binary runs")
}

fn room(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../rooms")
        .join(name)
        .display()
        .to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_lists_simulate_flags() {
    let out = rirsim(&["simulate", "--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in [
        "--room", "--method", "--ism-order", "--rays", "--seed", "--air", "--mat", "--multiband",
        "--rt60", "--bin-width-ms", "--max-time", "--reflection-law", "--materials", "--source",
        "--receiver", "--format", "--dump-histogram", "--output", "--threads",
    ] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = rirsim(&["simulate", "--room", &room("office.toml"), "-o", "x.wav", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_room_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = rirsim(&["simulate", "--room", "/no/such/room.toml", "-o", p(&dir.path().join("a.wav"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("/no/such/room.toml"), "{}", stderr(&out));
}

#[test]
fn mat_without_multiband_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = rirsim(&["simulate", "--room", &room("office.toml"), "--mat", "-o", p(&dir.path().join("a.wav"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("multiband"), "{}", stderr(&out));
}

#[test]
fn simulate_writes_wav_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("rir.wav");
    let hist = dir.path().join("hist.csv");
    let out = rirsim(&[
        "simulate", "--room", &room("office.toml"), "--method", "hybrid", "--ism-order", "6",
        "--rays", "3000", "--seed", "7", "--multiband", "--mat", "--air", "--format", "i16",
        "--dump-histogram", p(&hist), "-o", p(&wav),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let audio = rirsim_core::render::read_wav(&wav).unwrap();
    assert_eq!(audio.sample_rate, 16000);
    assert!(audio.samples.iter().any(|v| *v != 0.0));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rir.json")).unwrap()).unwrap();
    assert_eq!(meta["method"], "hybrid");
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(hist).unwrap();
    assert!(csv.starts_with("bin_start_s,"));
}

#[test]
fn rt60_override_and_bad_source_index() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("rir.wav");
    let ok = rirsim(&["simulate", "--room", &room("office.toml"), "--method", "ism", "--ism-order", "5", "--rt60", "0.4", "-o", p(&wav)]);
    assert!(ok.status.success(), "{}", stderr(&ok));
    let bad = rirsim(&["simulate", "--room", &room("office.toml"), "--source", "9", "-o", p(&wav)]);
    assert_eq!(bad.status.code(), Some(2));
    let unreachable = rirsim(&["simulate", "--room", &room("office.toml"), "--rt60", "0.001", "-o", p(&wav)]);
    assert_eq!(unreachable.status.code(), Some(2));
}

fn tone(n: usize, f: f64) -> Vec<f64> {
    (0..n).map(|i| 0.3 * (2.0 * std::f64::consts::PI * f * i as f64 / 16000.0).sin()).collect()
}

#[test]
fn mix_rejects_rate_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("t.wav");
    write_wav(&target, &tone(4000, 300.0), 44100, SampleFormat::F32).unwrap();
    let out = rirsim(&[
        "mix", "--room", &room("office.toml"), "--method", "ism", "--ism-order", "3",
        "--target", p(&target), "-o", p(&dir.path().join("m.wav")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr(&out);
    assert!(msg.contains("44100") && msg.contains("16000"), "{msg}");
}

#[test]
fn mix_with_and_without_noise() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("t.wav");
    let noise = dir.path().join("n.wav");
    write_wav(&target, &tone(8000, 300.0), 16000, SampleFormat::F32).unwrap();
    write_wav(&noise, &tone(3000, 1234.0), 16000, SampleFormat::F32).unwrap();
    let clean = dir.path().join("clean.wav");
    let out = rirsim(&[
        "mix", "--room", &room("office.toml"), "--method", "ism", "--ism-order", "4",
        "--target", p(&target), "-o", p(&clean),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let noisy = dir.path().join("noisy.wav");
    let spec = format!("{},1,5", p(&noise));
    let out = rirsim(&[
        "mix", "--room", &room("office.toml"), "--method", "hybrid", "--ism-order", "4",
        "--rays", "2000", "--target", p(&target), "--noise", &spec, "-o", p(&noisy),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(rirsim_core::render::read_wav(&noisy).unwrap().samples.len() > 8000);
}

#[test]
fn materials_and_filters() {
    let out = rirsim(&["materials"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("brick_wall,0.03 0.03 0.03 0.04 0.05 0.07 0.07"));
    let out = rirsim(&["filters", "--points", "5"]);
    assert!(out.status.success());
    let csv = String::from_utf8_lossy(&out.stdout).into_owned();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.starts_with("freq_hz,band_125_db"));
}

#[test]
fn material_db_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let db = dir.path().join("db.toml");
    std::fs::write(&db, "[only_one]\nabsorption = [0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_rirsim"))
        .arg("materials")
        .env("RIRSIM_MATERIALS", &db)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("only_one") && !text.contains("brick_wall"));
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let out = rirsim(&["bench", "--mode", "order", "--trials", "2", "--values", "1,2", "-o", p(&csv)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("param,value,mean_s,std_s,trials,machine"));
}

#[test]
fn seeded_output_is_byte_identical_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let wav = dir.path().join(name);
        let out = rirsim(&[
            "--threads", threads, "simulate", "--room", &room("office.toml"), "--ism-order", "5",
            "--rays", "4000", "--seed", "3", "--multiband", "-o", p(&wav),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(wav).unwrap()
    };
    let a = run("1", "a.wav");
    let b = run("4", "b.wav");
    let c = run("0", "c.wav");
    assert_eq!(a, b);
    assert_eq!(a, c);
}
