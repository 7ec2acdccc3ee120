use std::fs;
use std::path::Path;
use std::process::Command;

use lstsc::cli::{exit, EvaluationRecord, SceneManifest, StemOrigin};
use lstsc::coherence::FeatureFile;
use lstsc::room::mix_scene;
use lstsc::signal::load_wav;
use lstsc::synth::scene_stems;

const CONFIG: &str = r#"
[scene]
seed = 5
clip_seconds = 2.0
t60_grid = [0.3]
"#;

fn lstsc(args: &[&str], cwd: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lstsc")).args(args).current_dir(cwd).env_remove("LSTSC_OUT_ROOT").output().unwrap()
}

fn ok(out: &std::process::Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn features(path: &Path) -> FeatureFile {
    FeatureFile::read(fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn simulate_extract_enhance_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.toml"), CONFIG).unwrap();

    ok(&lstsc(&["simulate", "--config", "run.toml", "--out", "sim"], d));
    for name in ["mixture", "target", "non_target", "interferer", "image_target", "noise"] {
        assert!(d.join("sim").join(format!("{name}.wav")).exists(), "{name}.wav missing");
    }
    let mixture = load_wav(d.join("sim/mixture.wav")).unwrap();
    assert_eq!((mixture.num_channels(), mixture.len()), (4, 32_000));

    ok(&lstsc(&["extract", "--in", "sim/mixture.wav", "--out", "f3.lsts", "--variant", "lstsc-3"], d));
    let f = features(&d.join("f3.lsts"));
    assert_eq!((f.bins, f.planes.len()), (257, 4));
    assert_eq!(f.frames, 198);
    assert!(d.join("f3.csv").exists());

    ok(&lstsc(
        &["extract", "--in", "sim/mixture.wav", "--out", "f4.lsts", "--variant", "lstsc-4", "--erb-csv", "erb.csv"],
        d,
    ));
    let f = features(&d.join("f4.lsts"));
    assert_eq!((f.frames, f.bins, f.planes.len()), (198, 48, 4));
    assert_eq!(fs::read_to_string(d.join("erb.csv")).unwrap().lines().count(), 49);

    ok(&lstsc(&["enhance", "--in", "sim/mixture.wav", "--out", "enh.wav"], d));
    let enhanced = load_wav(d.join("enh.wav")).unwrap();
    assert_eq!((enhanced.num_channels(), enhanced.len()), (1, 32_000));
    let mask = features(&d.join("enh.mask.lsts"));
    assert_eq!((mask.frames, mask.bins, mask.planes.len()), (198, 257, 1));
    assert!(mask.planes[0].iter().all(|m| (0.0..=1.0).contains(m)));

    for _ in 0..2 {
        ok(&lstsc(
            &[
                "evaluate",
                "--reference",
                "sim/image_target.wav",
                "--estimate",
                "enh.wav",
                "sim/mixture.wav",
                "--out",
                "eval.jsonl",
            ],
            d,
        ));
    }
    let text = fs::read_to_string(d.join("eval.jsonl")).unwrap();
    let records: Vec<EvaluationRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 4);
    assert!(records.iter().all(|r| r.si_sdr_db.is_finite() && r.num_samples == 32_000));
}

#[test]
fn manifest_rebuilds_the_mixture() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.toml"), CONFIG).unwrap();
    ok(&lstsc(&["simulate", "--config", "run.toml", "--seed", "9", "--out", "sim"], d));

    let manifest: SceneManifest = serde_json::from_str(&fs::read_to_string(d.join("sim/scene.json")).unwrap()).unwrap();
    assert_eq!(manifest.seed, 9);
    let StemOrigin::Synthetic { seed } = manifest.stems else { panic!("expected synthetic stems") };
    let stems = scene_stems(seed, manifest.sample_rate, manifest.num_samples).stems;
    let rebuilt = mix_scene(&manifest.scene, &stems, &manifest.mix, None).unwrap();
    let written = load_wav(d.join("sim/mixture.wav")).unwrap();
    for m in 0..written.num_channels() {
        for (a, b) in written.channel(m).iter().zip(rebuilt.mixture.channel(m)) {
            assert_eq!(a.to_bits(), (*b as f32 as f64).to_bits());
        }
    }
}

#[test]
fn rir_command_writes_one_file_per_source() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&lstsc(&["rir", "--seed", "2", "--out", "rirs"], d));
    for role in ["target", "non_target", "interferer"] {
        let rir = load_wav(d.join(format!("rirs/rir_{role}.wav"))).unwrap();
        assert_eq!(rir.num_channels(), 4);
        assert!(rir.len() > 1000);
    }
    assert!(d.join("rirs/scene.json").exists());
}

#[test]
fn out_root_relocates_relative_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = Command::new(env!("CARGO_BIN_EXE_lstsc"))
        .args(["rir", "--seed", "1", "--out", "here"])
        .current_dir(d)
        .env("LSTSC_OUT_ROOT", root.path())
        .output()
        .unwrap();
    ok(&out);
    assert!(root.path().join("here/rir_target.wav").exists());
    assert!(!d.join("here").exists());
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| lstsc(args, d).status.code().unwrap();

    assert_eq!(code(&[]), exit::USAGE);
    assert_eq!(code(&["extract", "--in", "x.wav"]), exit::USAGE);
    assert_eq!(code(&["extract", "--in", "missing.wav", "--out", "f.lsts"]), exit::MISSING_FILE);
    assert_eq!(code(&["simulate", "--config", "missing.toml"]), exit::MISSING_FILE);

    fs::write(d.join("bad.toml"), "[scene]\nt60_grid = [9.0]\n").unwrap();
    assert_eq!(code(&["simulate", "--config", "bad.toml"]), exit::CONFIG);

    fs::write(d.join("noise.wav"), b"not a wav file").unwrap();
    assert_eq!(code(&["extract", "--in", "noise.wav", "--out", "f.lsts"]), exit::IO);

    let mono = lstsc::signal::MultichannelAudio::mono(16_000, vec![0.1; 8000]).unwrap();
    lstsc::signal::save_wav(d.join("mono.wav"), &mono).unwrap();
    assert_eq!(code(&["enhance", "--in", "mono.wav", "--out", "e.wav"]), exit::INPUT);
    let stereo_8k = lstsc::signal::MultichannelAudio::new(8_000, vec![vec![0.1; 8000]; 2]).unwrap();
    lstsc::signal::save_wav(d.join("8k.wav"), &stereo_8k).unwrap();
    assert_eq!(code(&["extract", "--in", "8k.wav", "--out", "f.lsts"]), exit::INPUT);

    fs::write(d.join("tight.toml"), "[scene]\nmin_separation_deg = 179.0\nmax_attempts = 5\n").unwrap();
    assert_eq!(code(&["rir", "--config", "tight.toml"]), exit::SCENE);

    let out = lstsc(&["extract", "--in", "missing.wav", "--out", "f.lsts"], d);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
}
