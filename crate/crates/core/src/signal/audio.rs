use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

/// Sample rate every pipeline entry point expects.
pub const PIPELINE_SAMPLE_RATE: u32 = 16_000;

/// An `M`-channel block of audio, stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelAudio {
    sample_rate: u32,
    channels: Vec<Vec<f64>>,
}

impl MultichannelAudio {
    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if channels.is_empty() {
            return Err(Error::InvalidArgument("audio needs at least one channel".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::ShapeMismatch("channels have different lengths".into()));
        }
        Ok(Self { sample_rate, channels })
    }

    pub fn mono(sample_rate: u32, samples: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate, vec![samples])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, m: usize) -> &[f64] {
        &self.channels[m]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    /// Rejects anything that is not at the pipeline rate.
    pub fn require_pipeline_rate(&self) -> Result<()> {
        if self.sample_rate != PIPELINE_SAMPLE_RATE {
            return Err(Error::SampleRate { expected: PIPELINE_SAMPLE_RATE, found: self.sample_rate });
        }
        Ok(())
    }

    /// Frame-interleaved samples (`t * M + m`).
    pub fn interleaved(&self) -> Vec<f64> {
        let m = self.num_channels();
        let mut out = vec![0.0; self.len() * m];
        for (c, ch) in self.channels.iter().enumerate() {
            for (t, &x) in ch.iter().enumerate() {
                out[t * m + c] = x;
            }
        }
        out
    }

    pub fn from_interleaved(sample_rate: u32, num_channels: usize, data: &[f64]) -> Result<Self> {
        if num_channels == 0 || !data.len().is_multiple_of(num_channels) {
            return Err(Error::ShapeMismatch(format!(
                "{} interleaved samples do not divide into {} channels",
                data.len(),
                num_channels
            )));
        }
        let frames = data.len() / num_channels;
        let channels = (0..num_channels).map(|c| (0..frames).map(|t| data[t * num_channels + c]).collect()).collect();
        Self::new(sample_rate, channels)
    }
}

/// Reads a PCM (8/16/24/32-bit) or 32-bit float WAV file. Integer PCM is
/// scaled to `[-1, 1]`.
pub fn load_wav(path: impl AsRef<Path>) -> Result<MultichannelAudio> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let reader = WavReader::open(path).map_err(|e| wav_error(path, e))?;
    let spec = reader.spec();
    let m = spec.channels as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| wav_error(path, e))?
        }
        (fmt, bits) => {
            return Err(Error::Wav(format!("{}: unsupported encoding {:?} {}-bit", path.display(), fmt, bits)))
        }
    };
    MultichannelAudio::from_interleaved(spec.sample_rate, m, &interleaved)
}

/// Writes interleaved 32-bit float WAV.
pub fn save_wav(path: impl AsRef<Path>, audio: &MultichannelAudio) -> Result<()> {
    let path = path.as_ref();
    let spec = WavSpec {
        channels: audio.num_channels() as u16,
        sample_rate: audio.sample_rate(),
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| wav_error(path, e))?;
    for t in 0..audio.len() {
        for ch in audio.channels() {
            writer.write_sample(ch[t] as f32).map_err(|e| wav_error(path, e))?;
        }
    }
    writer.finalize().map_err(|e| wav_error(path, e))
}

fn wav_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Wav(format!("{}: {}", path.display(), other)),
    }
}
