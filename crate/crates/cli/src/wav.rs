//! WAV input and output.
//!
//! Reads 16/24/32-bit PCM and 32-bit float; writes 32-bit float.

use std::io::BufReader;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use modal_core::Signal;

use crate::error::{CliError, Result};
use crate::fsutil::write_atomic;

/// Samples scaled to [-1, 1), downmixed to mono, plus any warnings.
#[derive(Debug, Clone)]
pub struct WavInput {
    pub signal: Signal,
    pub channels: u16,
    pub warnings: Vec<String>,
}

pub fn read(path: &Path) -> Result<WavInput> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let reader = WavReader::new(BufReader::new(file))
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let spec = reader.spec();
    let bad = |e: hound::Error| CliError::input(format!("{}: {e}", path.display()));
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(bad)?,
        (SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = 2f64.powi(i32::from(bits) - 1);
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) / scale))
                .collect::<Result<_, _>>()
                .map_err(bad)?
        }
        (format, bits) => {
            let kind = match format {
                SampleFormat::Float => "float",
                SampleFormat::Int => "PCM",
            };
            return Err(CliError::input(format!(
                "{}: unsupported WAV encoding {bits}-bit {kind}; use 16/24/32-bit PCM or 32-bit float",
                path.display()
            )));
        }
    };
    let channels = spec.channels.max(1);
    let mut warnings = Vec::new();
    let mono: Vec<f64> = if channels == 1 {
        interleaved
    } else {
        warnings.push(format!("{}: downmixed {channels} channels to mono", path.display()));
        interleaved
            .chunks(usize::from(channels))
            .map(|frame| frame.iter().sum::<f64>() / f64::from(channels))
            .collect()
    };
    if mono.is_empty() {
        return Err(CliError::input(format!("{}: no samples", path.display())));
    }
    let signal = Signal::from_real(&mono, f64::from(spec.sample_rate))?;
    Ok(WavInput {
        signal,
        channels,
        warnings,
    })
}

/// Writes mono 32-bit float samples, replacing `path` atomically.
pub fn write_f32(path: &Path, samples: &[f64], sample_rate: f64) -> Result<()> {
    let rate = sample_rate.round();
    if !(rate >= 1.0 && rate <= f64::from(u32::MAX) && (rate - sample_rate).abs() < 1e-9) {
        return Err(CliError::input(format!(
            "sample rate {sample_rate} Hz cannot be stored in a WAV header"
        )));
    }
    let spec = WavSpec {
        channels: 1,
        sample_rate: rate as u32,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    write_atomic(path, |file| {
        let mut writer = WavWriter::new(std::io::BufWriter::new(file), spec).map_err(to_io)?;
        for &s in samples {
            writer.write_sample(s as f32).map_err(to_io)?;
        }
        writer.finalize().map_err(to_io)
    })
}

fn to_io(e: hound::Error) -> std::io::Error {
    match e {
        hound::Error::IoError(e) => e,
        e => std::io::Error::other(e.to_string()),
    }
}
