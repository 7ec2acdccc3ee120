//! Batch driver behind the `lstsc` binary.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coherence::{compute_lstsc, model_features, write_planes, CoherenceConfig, Variant};
use crate::config::RunConfig;
use crate::enhance::{enhance_stream, HeuristicMask};
use crate::erb::ErbFilterbank;
use crate::error::{Error, Result};
use crate::metrics::si_sdr;
use crate::room::{mix_scene, sample_scene, MixGains, MixSpec, RoomScene, SourceRole, Stems};
use crate::signal::{load_wav, save_wav, MultichannelAudio, Stft, StftConfig, PIPELINE_SAMPLE_RATE};
use crate::synth::scene_stems;

/// Environment variable that relocates relative output paths.
pub const OUT_ROOT_ENV: &str = "LSTSC_OUT_ROOT";

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    /// Malformed command line.
    pub const USAGE: i32 = 2;
    /// Invalid configuration values or arguments.
    pub const CONFIG: i32 = 3;
    /// An input file does not exist.
    pub const MISSING_FILE: i32 = 4;
    /// Reading or writing failed, or a file is malformed.
    pub const IO: i32 = 5;
    /// Input signals violate a processing constraint (rate, channels,
    /// length, shape).
    pub const INPUT: i32 = 6;
    /// Scene geometry or room acoustics constraints cannot be met.
    pub const SCENE: i32 = 7;
    /// A mask estimator produced values outside `[0, 1]`.
    pub const MASK: i32 = 8;
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) | Error::InvalidArgument(_) => exit::CONFIG,
        Error::FileNotFound(_) => exit::MISSING_FILE,
        Error::Io { .. } | Error::Wav(_) | Error::Format(_) => exit::IO,
        Error::SampleRate { .. }
        | Error::SignalTooShort { .. }
        | Error::ShapeMismatch(_)
        | Error::TooFewMicrophones(_)
        | Error::StemTooShort { .. }
        | Error::MissingRir { .. } => exit::INPUT,
        Error::Geometry(_) | Error::SamplingBudgetExhausted(_) | Error::DecayRangeNotReached => exit::SCENE,
        Error::MaskOutOfRange { .. } => exit::MASK,
    }
}

#[derive(Debug, Parser)]
#[command(name = "lstsc", version, about = "Spatial coherence features, scene simulation and enhancement")]
pub struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true, env = OUT_ROOT_ENV)]
    pub out_root: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a scene and write its room impulse responses.
    Rir(SceneArgs),
    /// Sample a scene and write the mixture, stems and a manifest.
    Simulate(SceneArgs),
    /// Compute coherence features of a multichannel recording.
    Extract(ExtractArgs),
    /// Mask the reference channel with the coherence-driven heuristic.
    Enhance(EnhanceArgs),
    /// Score estimates against a reference with SI-SDR.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the scene seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the output directory of the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the feature variant of the config.
    #[arg(long)]
    pub variant: Option<Variant>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Feature container (`.lsts`).
    #[arg(long)]
    pub out: PathBuf,
    /// CSV copy of the features; defaults to the output path with `.csv`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Also write the ERB filterbank weights as CSV.
    #[arg(long)]
    pub erb_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnhanceArgs {
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Mask dump (`.lsts`, one plane); defaults to the output path with
    /// `.mask.lsts`.
    #[arg(long)]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Reference recording (e.g. the target image).
    #[arg(long)]
    pub reference: PathBuf,
    /// One or more estimates to score.
    #[arg(long, required = true, num_args = 1..)]
    pub estimate: Vec<PathBuf>,
    /// Channel taken from multichannel files.
    #[arg(long, default_value_t = 0)]
    pub channel: usize,
    /// JSON-lines report; appended to if it exists.
    #[arg(long)]
    pub out: PathBuf,
}

/// Where the stems of a simulated scene came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StemOrigin {
    Synthetic { seed: u64 },
    Files { target: Option<PathBuf>, non_target: Option<PathBuf>, interferer: Option<PathBuf>, synthetic_seed: u64 },
}

/// Everything needed to rebuild a simulated mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub seed: u64,
    pub sample_rate: u32,
    pub num_samples: usize,
    pub scene: RoomScene,
    pub mix: MixSpec,
    pub gains: MixGains,
    pub realized_sir_db: Option<f64>,
    pub realized_snr_db: f64,
    pub stems: StemOrigin,
    /// Sample ranges where the synthetic target talks.
    pub target_activity: Option<Vec<std::ops::Range<usize>>>,
}

/// One line of an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub reference: PathBuf,
    pub estimate: PathBuf,
    pub channel: usize,
    pub num_samples: usize,
    pub si_sdr_db: f64,
    pub projection_gain: f64,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match execute(&cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let root = cli.out_root.as_deref();
    match &cli.command {
        Command::Rir(a) => cmd_rir(a, root),
        Command::Simulate(a) => cmd_simulate(a, root),
        Command::Extract(a) => cmd_extract(a, root),
        Command::Enhance(a) => cmd_enhance(a, root),
        Command::Evaluate(a) => cmd_evaluate(a, root),
    }
}

fn resolve(root: Option<&Path>, p: &Path) -> PathBuf {
    match root {
        Some(r) if p.is_relative() => r.join(p),
        _ => p.to_path_buf(),
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => fs::create_dir_all(d).map_err(|e| Error::io(d, e)),
        _ => Ok(()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    ensure_parent(path)?;
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn scene_config(a: &SceneArgs, root: Option<&Path>) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.scene.seed = s;
    }
    let dir = resolve(root, a.out.as_deref().unwrap_or(&cfg.output.dir));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok((cfg, dir))
}

fn feature_config(a: &FeatureArgs) -> Result<CoherenceConfig> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = a.variant {
        cfg.features.variant = v;
    }
    cfg.features.coherence()
}

fn cmd_rir(a: &SceneArgs, root: Option<&Path>) -> Result<()> {
    let (cfg, dir) = scene_config(a, root)?;
    let scene = sample_scene(cfg.scene.seed, &cfg.scene.array, &cfg.scene.constraints())?;
    let rirs = scene.simulate_rirs(PIPELINE_SAMPLE_RATE)?;
    for (src, per_mic) in scene.sources.iter().zip(&rirs) {
        let len = per_mic.iter().map(|r| r.taps.len()).max().unwrap_or(0);
        let chans = per_mic
            .iter()
            .map(|r| {
                let mut t = r.taps.clone();
                t.resize(len, 0.0);
                t
            })
            .collect();
        let audio = MultichannelAudio::new(PIPELINE_SAMPLE_RATE, chans)?;
        save_wav(dir.join(format!("rir_{}.wav", src.role.name())), &audio)?;
    }
    let json = serde_json::to_string_pretty(&scene).map_err(|e| Error::Format(e.to_string()))?;
    write_text(&dir.join("scene.json"), &json)
}

fn load_mono(path: &Path) -> Result<Vec<f64>> {
    let audio = load_wav(path)?;
    audio.require_pipeline_rate()?;
    Ok(audio.channel(0).to_vec())
}

/// Builds the mixture described by `cfg`: scene, levels and stems.
pub fn simulate(cfg: &RunConfig) -> Result<(SceneManifest, crate::room::MixOutput, Stems)> {
    cfg.validate()?;
    let seed = cfg.scene.seed;
    let scene = sample_scene(seed, &cfg.scene.array, &cfg.scene.constraints())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d69_7873);
    let spec = cfg.scene.draw_mix(&mut rng);
    let len = spec.clip_len(PIPELINE_SAMPLE_RATE);
    let synth = scene_stems(seed, PIPELINE_SAMPLE_RATE, len);
    let mut stems = synth.stems;
    let files = &cfg.stems;
    for (role, path) in [
        (SourceRole::Target, &files.target),
        (SourceRole::NonTarget, &files.non_target),
        (SourceRole::Interferer, &files.interferer),
    ] {
        if let Some(p) = path {
            let x = load_mono(p)?;
            match role {
                SourceRole::Target => stems.target = x,
                SourceRole::NonTarget => stems.non_target = x,
                SourceRole::Interferer => stems.interferer = x,
            }
        }
    }
    let from_files = files.target.is_some() || files.non_target.is_some() || files.interferer.is_some();
    let out = mix_scene(&scene, &stems, &spec, None)?;
    let manifest = SceneManifest {
        seed,
        sample_rate: PIPELINE_SAMPLE_RATE,
        num_samples: len,
        scene,
        mix: spec,
        gains: out.gains,
        realized_sir_db: out.realized_sir_db,
        realized_snr_db: out.realized_snr_db,
        stems: if from_files {
            StemOrigin::Files {
                target: files.target.clone(),
                non_target: files.non_target.clone(),
                interferer: files.interferer.clone(),
                synthetic_seed: seed,
            }
        } else {
            StemOrigin::Synthetic { seed }
        },
        target_activity: files.target.is_none().then(|| synth.target_activity.ranges.clone()),
    };
    Ok((manifest, out, stems))
}

fn cmd_simulate(a: &SceneArgs, root: Option<&Path>) -> Result<()> {
    let (cfg, dir) = scene_config(a, root)?;
    let (manifest, out, stems) = simulate(&cfg)?;
    let fs = manifest.sample_rate;
    let len = manifest.num_samples;
    save_wav(dir.join("mixture.wav"), &out.mixture)?;
    for role in SourceRole::ALL {
        let dry = stems.get(role)[..len].to_vec();
        save_wav(dir.join(format!("{}.wav", role.name())), &MultichannelAudio::mono(fs, dry)?)?;
    }
    for (role, img) in &out.images {
        save_wav(dir.join(format!("image_{}.wav", role.name())), img)?;
    }
    save_wav(dir.join("noise.wav"), &out.noise)?;
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    write_text(&dir.join("scene.json"), &json)
}

fn load_multichannel(path: &Path) -> Result<MultichannelAudio> {
    let audio = load_wav(path)?;
    audio.require_pipeline_rate()?;
    if audio.num_channels() < 2 {
        return Err(Error::TooFewMicrophones(audio.num_channels()));
    }
    Ok(audio)
}

fn cmd_extract(a: &ExtractArgs, root: Option<&Path>) -> Result<()> {
    let cfg = feature_config(&a.features)?;
    let audio = load_multichannel(&a.input)?;
    let engine = Stft::new(StftConfig::default())?;
    let specs = audio.channels().iter().map(|c| engine.forward(c)).collect::<Result<Vec<_>>>()?;
    let features = model_features(&compute_lstsc(&specs, &cfg, None)?, &cfg)?;

    let out = resolve(root, &a.out);
    let mut w = create(&out)?;
    features.write_lsts(&mut w).map_err(|e| Error::io(&out, e))?;
    let csv = resolve(root, &a.csv.clone().unwrap_or_else(|| out.with_extension("csv")));
    write_text(&csv, &features.to_csv())?;
    if let Some(p) = &a.erb_csv {
        let fb = ErbFilterbank::design(
            PIPELINE_SAMPLE_RATE,
            StftConfig::default().fft_size,
            cfg.erb_bands.unwrap_or(crate::coherence::DEFAULT_ERB_BANDS),
        )?;
        write_text(&resolve(root, p), &fb.to_csv())?;
    }
    Ok(())
}

fn cmd_enhance(a: &EnhanceArgs, root: Option<&Path>) -> Result<()> {
    let cfg = feature_config(&a.features)?;
    let audio = load_multichannel(&a.input)?;
    let res = enhance_stream(&audio, &cfg, &StftConfig::default(), &mut HeuristicMask)?;
    let out = resolve(root, &a.out);
    ensure_parent(&out)?;
    save_wav(&out, &res.enhanced)?;
    let mask_path = resolve(root, &a.mask.clone().unwrap_or_else(|| out.with_extension("mask.lsts")));
    let mut w = create(&mask_path)?;
    write_planes(&mut w, res.mask.frames(), res.mask.bins(), &[res.mask.data()]).map_err(|e| Error::io(&mask_path, e))
}

fn cmd_evaluate(a: &EvaluateArgs, root: Option<&Path>) -> Result<()> {
    let pick = |p: &Path| -> Result<Vec<f64>> {
        let audio = load_wav(p)?;
        if a.channel >= audio.num_channels() {
            return Err(Error::InvalidArgument(format!(
                "{} has {} channels, channel {} requested",
                p.display(),
                audio.num_channels(),
                a.channel
            )));
        }
        Ok(audio.channel(a.channel).to_vec())
    };
    let reference = pick(&a.reference)?;
    let out = resolve(root, &a.out);
    ensure_parent(&out)?;
    let file = fs::OpenOptions::new().create(true).append(true).open(&out).map_err(|e| Error::io(&out, e))?;
    let mut w = BufWriter::new(file);
    for est in &a.estimate {
        let e = pick(est)?;
        let report = si_sdr(&reference, &e)?;
        let rec = EvaluationRecord {
            reference: a.reference.clone(),
            estimate: est.clone(),
            channel: a.channel,
            num_samples: reference.len(),
            si_sdr_db: report.value_db,
            projection_gain: report.projection_gain,
        };
        let line = serde_json::to_string(&rec).map_err(|e| Error::Format(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(&out, e))?;
    }
    w.flush().map_err(|e| Error::io(&out, e))
}
