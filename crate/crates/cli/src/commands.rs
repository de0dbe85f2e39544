//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use modal_core::esprit::{esprit_with, EspritConfig};
use modal_core::optimize::optimize_all;
use modal_core::subband::fz_esprit;
use modal_core::synth::render_recursive;
use modal_core::synthetic::Noise;
use modal_core::warp::{fw_esprit_with, rho_for_zoom, WarpConfig};
use modal_core::{generate, mse_db, Diagnostics, ModeSet, Partial, Signal, SyntheticSpec};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::fsutil::write_text;
use crate::plot::{spectrogram_csv, spectrum_csv, SPECTROGRAM_HOP, SPECTROGRAM_WINDOW};
use crate::preset::{parse_order, Method, Preset, Settings};
use crate::table::ModeTableFile;
use crate::wav;

#[derive(Debug, Parser)]
#[command(name = "modal", version, about = "Modal analysis and resynthesis of impulse responses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate modes from a WAV impulse response.
    Analyze(AnalyzeArgs),
    /// Render a mode table to a WAV file.
    Synth(SynthArgs),
    /// Report the error between two WAV files and write plot data.
    Compare(CompareArgs),
    /// Generate a synthetic impulse response and its ground-truth table.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "esprit")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "custom")]
    pub preset: Preset,
    /// Warping factor in (-1, 1).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "zoom")]
    pub rho: Option<f64>,
    /// Low-frequency magnification; sets rho = (zoom - 1) / (zoom + 1).
    #[arg(long)]
    pub zoom: Option<f64>,
    /// Hankel size N.
    #[arg(long)]
    pub hankel: Option<usize>,
    /// knee, db:<level> or fixed:<M>.
    #[arg(long)]
    pub order: Option<String>,
    /// Refine frequencies and dampings after estimation.
    #[arg(long)]
    pub optimize: bool,
    /// Frequency window half-width, Hz.
    #[arg(long)]
    pub delta_omega: Option<f64>,
    /// Damping window half-width relative to the initial damping.
    #[arg(long)]
    pub delta_alpha: Option<f64>,
    /// Number of Bark-spaced bands.
    #[arg(long)]
    pub bands: Option<usize>,
    /// Maximum decimation factor per band.
    #[arg(long)]
    pub decimate: Option<usize>,
    /// Fundamental, Hz; selects harmonic bands for --method fz.
    #[arg(long)]
    pub f0: Option<f64>,
    /// Number of harmonic partials.
    #[arg(long)]
    pub partials: Option<usize>,
    /// String stiffness B for harmonic bands.
    #[arg(long)]
    pub inharmonicity: Option<f64>,
    /// Maximum modes per band.
    #[arg(long)]
    pub max_modes: Option<usize>,
    /// Pre-damping of the plain FW branch, nepers/second.
    #[arg(long)]
    pub pre_damp: Option<f64>,
    /// Mode table output.
    #[arg(long, default_value = "modes.json")]
    pub out: PathBuf,
    /// Also write the report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the mode table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub table: PathBuf,
    /// Length in seconds.
    #[arg(long, default_value_t = 1.0, conflicts_with = "samples")]
    pub duration: f64,
    /// Length in samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Write the rendered samples unscaled.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, default_value = "out.wav")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Reference.
    pub a: PathBuf,
    pub b: PathBuf,
    /// Directory for spectrum.csv, spectrogram_a.csv and spectrogram_b.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// A single mode, `freq_hz:alpha:amplitude` (alpha in nepers/sample).
    #[arg(long = "mode")]
    pub modes: Vec<String>,
    /// Three modes detuned around a center, `freq_hz:detune_hz[:alpha[:amplitude]]`.
    #[arg(long = "triplet")]
    pub triplets: Vec<String>,
    #[arg(long, default_value_t = 1e-4)]
    pub alpha: f64,
    #[arg(long, default_value_t = 44100.0)]
    pub rate: f64,
    /// Length in seconds.
    #[arg(long, default_value_t = 1.0, conflicts_with = "samples")]
    pub duration: f64,
    /// Length in samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Add white noise at this SNR, dB.
    #[arg(long)]
    pub snr: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scale to a peak of 0.99; the table is scaled to match.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value = "gen.wav")]
    pub out: PathBuf,
    /// Ground-truth table; defaults to the output path with a .json extension.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Synth(a) => synth(&a),
        Command::Compare(a) => compare(&a),
        Command::Gen(a) => gen(&a),
    }
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

fn settings(args: &AnalyzeArgs, sample_rate: f64) -> Result<Settings> {
    let mut s = Settings::preset(args.preset, sample_rate);
    if let Some(r) = args.rho {
        s.rho = r;
    }
    if let Some(z) = args.zoom {
        s.rho = rho_for_zoom(z)?;
    }
    if let Some(n) = args.hankel {
        s.hankel = n;
    }
    if let Some(o) = &args.order {
        s.order = parse_order(o)?;
    }
    if let Some(v) = args.delta_omega {
        s.delta_omega_hz = v;
    }
    if let Some(v) = args.delta_alpha {
        s.delta_alpha = v;
    }
    if let Some(v) = args.bands {
        s.n_bands = v;
    }
    if let Some(v) = args.decimate {
        s.decimation = v;
    }
    if args.f0.is_some() {
        s.f0 = args.f0;
    }
    if let Some(v) = args.partials {
        s.n_partials = v;
    }
    if let Some(v) = args.inharmonicity {
        s.inharmonicity = v;
    }
    if args.max_modes.is_some() {
        s.max_modes_per_band = args.max_modes;
    }
    if let Some(v) = args.pre_damp {
        s.pre_damp_sigma = v;
    }
    Ok(s)
}

fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let input = wav::read(&args.input)?;
    input.warnings.iter().for_each(|w| warn(w));
    let h = input.signal;
    if h.energy() == 0.0 {
        return Err(CliError::input(format!("{}: input is silent", args.input.display())));
    }
    let fs = h.sample_rate();
    let s = settings(args, fs)?;
    let opt_cfg = s.opt_config();
    if args.optimize {
        opt_cfg.validate()?;
    }

    let start = Instant::now();
    let mut esprit_cfg = EspritConfig::new(s.hankel, s.order);
    let mut plan = None;
    let estimate = match args.method {
        Method::Esprit | Method::Fw => {
            let fit = h.len() / 2;
            if esprit_cfg.hankel_size > fit {
                warn(&format!(
                    "Hankel size {} needs {} samples; using {fit}",
                    esprit_cfg.hankel_size,
                    2 * esprit_cfg.hankel_size
                ));
                esprit_cfg.hankel_size = fit;
            }
            if args.method == Method::Esprit {
                esprit_with(&h, &esprit_cfg)?
            } else {
                let cfg = WarpConfig::new(s.rho)?.with_pre_damp(s.pre_damp_sigma);
                let stretch = (1.0 + s.rho.abs()) / (1.0 - s.rho.abs());
                let needed = (stretch * (2 * esprit_cfg.hankel_size + 1) as f64).ceil() as usize;
                if h.len() < needed {
                    warn(&format!(
                        "warping needs about {needed} input samples at rho {:.4}; truncation will add spurious modes",
                        s.rho
                    ));
                }
                fw_esprit_with(&h, &cfg, &esprit_cfg)?.0
            }
        }
        Method::Fz => {
            let p = s.band_plan(fs)?;
            let e = fz_esprit(&h, &p, &esprit_cfg)?;
            plan = Some(p);
            e
        }
    };
    let mut modes = estimate.modes;
    let mut optimization = Vec::new();
    if args.optimize {
        let (optimized, bands) = optimize_all(&h, &modes, plan.as_ref(), &opt_cfg)?;
        modes = optimized;
        optimization = bands;
    }
    let elapsed = start.elapsed().as_secs_f64();

    let model = render_recursive(&modes, h.len())?;
    let nmse = mse_db(&h, &model)?;

    let mut params = s.describe(args.method, args.preset, args.optimize);
    params.insert("input".into(), json!(args.input.display().to_string()));
    let table = ModeTableFile::from_modes(&modes, params);
    table.write(&args.out)?;
    if let Some(path) = &args.csv {
        write_text(path, &table.to_csv())?;
    }

    let mut report = String::new();
    let _ = writeln!(report, "input: {} ({} samples at {fs} Hz)", args.input.display(), h.len());
    let _ = writeln!(report, "method: {:?}, preset: {:?}", args.method, args.preset);
    let _ = writeln!(report, "M: {}", modes.len());
    let _ = writeln!(report, "NMSE (dB): {nmse:.2}");
    let _ = writeln!(report, "wall time (s): {elapsed:.3}");
    report_diagnostics(&mut report, &estimate.diagnostics);
    for b in &optimization {
        let band = b.band.map_or("all".to_string(), |i| i.to_string());
        match &b.outcome {
            Ok(t) => {
                let _ = writeln!(
                    report,
                    "optimize band {band}: {} modes, cost {:.3e} -> {:.3e}, {} evaluations, {:?}",
                    b.modes,
                    t.costs.first().copied().unwrap_or(f64::NAN),
                    t.costs.last().copied().unwrap_or(f64::NAN),
                    t.fevals,
                    t.stop
                );
            }
            Err(e) => {
                let _ = writeln!(report, "optimize band {band}: {} modes kept, failed: {e}", b.modes);
            }
        }
    }
    print!("{report}");
    if let Some(path) = &args.report {
        write_text(path, &report)?;
    }
    Ok(())
}

fn report_diagnostics(out: &mut String, d: &Diagnostics) {
    if let Some(order) = d.selected_order {
        let _ = writeln!(out, "selected order: {order}");
    }
    let _ = writeln!(
        out,
        "dropped: {} origin, {} unstable, {} over-damped, {} duplicate, {} out of band",
        d.dropped_origin, d.dropped_unstable, d.dropped_dead, d.dropped_duplicate, d.dropped_out_of_band
    );
    for b in &d.bands {
        let _ = write!(
            out,
            "band {} at {:.2} Hz: budget {}, order {}, kept {}, discarded {}",
            b.index, b.center_hz, b.budget, b.selected_order, b.kept, b.discarded
        );
        match &b.error {
            Some(e) => {
                let _ = writeln!(out, ", failed: {e}");
            }
            None => out.push('\n'),
        }
    }
    for n in &d.notes {
        let _ = writeln!(out, "note: {n}");
    }
}

fn length(duration: f64, samples: Option<usize>, sample_rate: f64) -> Result<usize> {
    let n = match samples {
        Some(n) => n,
        None => {
            if !(duration.is_finite() && duration > 0.0) {
                return Err(CliError::input(format!("duration {duration} s must be positive")));
            }
            (duration * sample_rate).round() as usize
        }
    };
    if n == 0 {
        return Err(CliError::input("output length is zero samples"));
    }
    Ok(n)
}

fn synth(args: &SynthArgs) -> Result<()> {
    let table = ModeTableFile::read(&args.table)?;
    let modes = table.to_modes()?;
    if modes.is_empty() {
        return Err(CliError::input(format!("{}: mode table is empty", args.table.display())));
    }
    let fs = modes.sample_rate();
    let len = length(args.duration, args.samples, fs)?;
    let mut y = render_recursive(&modes, len)?.real_part();
    if !args.no_normalize {
        let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 0.0 {
            let gain = 0.99 / peak;
            y.iter_mut().for_each(|v| *v *= gain);
            println!("gain: {gain} ({:.2} dB)", 20.0 * gain.log10());
        }
    }
    wav::write_f32(&args.out, &y, fs)?;
    println!("wrote {} ({} modes, {len} samples at {fs} Hz)", args.out.display(), modes.len());
    Ok(())
}

fn compare(args: &CompareArgs) -> Result<()> {
    let a = wav::read(&args.a)?;
    let b = wav::read(&args.b)?;
    a.warnings.iter().chain(&b.warnings).for_each(|w| warn(w));
    let fs = a.signal.sample_rate();
    if fs != b.signal.sample_rate() {
        return Err(CliError::input(format!(
            "sample rates differ: {fs} Hz vs {} Hz",
            b.signal.sample_rate()
        )));
    }
    let len = a.signal.len().min(b.signal.len());
    if a.signal.len() != b.signal.len() {
        warn(&format!("lengths differ; comparing the first {len} samples"));
    }
    let xa = a.signal.real_part()[..len].to_vec();
    let xb = b.signal.real_part()[..len].to_vec();
    let nmse = mse_db(&Signal::from_real(&xa, fs)?, &Signal::from_real(&xb, fs)?)
        .map_err(|e| CliError::input(format!("{}: {e}", args.a.display())))?;
    println!("NMSE (dB): {nmse:.2}");
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        write_text(&dir.join("spectrum.csv"), &spectrum_csv(&xa, &xb, fs))?;
        for (name, x) in [("spectrogram_a.csv", &xa), ("spectrogram_b.csv", &xb)] {
            let csv = spectrogram_csv(x, fs, SPECTROGRAM_WINDOW, SPECTROGRAM_HOP);
            write_text(&dir.join(name), &csv)?;
        }
        println!("wrote plot data to {}", dir.display());
    }
    Ok(())
}

fn parse_fields(s: &str, what: &str, min: usize, max: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = s.split(':').collect();
    if fields.len() < min || fields.len() > max {
        return Err(CliError::input(format!("invalid {what} '{s}'")));
    }
    fields
        .iter()
        .map(|f| f.parse::<f64>().map_err(|_| CliError::input(format!("invalid {what} '{s}'"))))
        .collect()
}

fn gen(args: &GenArgs) -> Result<()> {
    let mut partials = Vec::new();
    for m in &args.modes {
        let v = parse_fields(m, "mode (freq_hz:alpha:amplitude)", 3, 3)?;
        partials.push(Partial::tone(v[0], v[1], v[2]));
    }
    for t in &args.triplets {
        let v = parse_fields(t, "triplet (freq_hz:detune_hz[:alpha[:amplitude]])", 2, 4)?;
        let alpha = v.get(2).copied().unwrap_or(args.alpha);
        let amp = v.get(3).copied().unwrap_or(1.0);
        partials.push(Partial::cluster(v[0], 3, v[1], alpha, amp));
    }
    if partials.is_empty() {
        return Err(CliError::input("nothing to generate: give --mode or --triplet"));
    }
    let mut spec = SyntheticSpec::new(partials);
    spec.noise = args.snr.map(|snr_db| Noise {
        snr_db,
        seed: args.seed,
    });
    let len = length(args.duration, args.samples, args.rate)?;
    let mut y = generate(&spec, len, args.rate)?.real_part();
    let mut truth = spec.modes(args.rate)?;
    let mut gain = 1.0;
    if args.normalize {
        let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak > 0.0 {
            gain = 0.99 / peak;
            y.iter_mut().for_each(|v| *v *= gain);
            truth = scaled(&truth, gain)?;
        }
    }
    let truth_path = args.truth.clone().unwrap_or_else(|| args.out.with_extension("json"));
    if truth_path == args.out {
        return Err(CliError::input("--truth and --out name the same file"));
    }
    let mut params = std::collections::BTreeMap::new();
    params.insert("generator".into(), json!(true));
    params.insert("samples".into(), json!(len));
    params.insert("gain".into(), json!(gain));
    if let Some(snr) = args.snr {
        params.insert("snr_db".into(), json!(snr));
        params.insert("seed".into(), json!(args.seed));
    }
    wav::write_f32(&args.out, &y, args.rate)?;
    ModeTableFile::from_modes(&truth, params).write(&truth_path)?;
    println!(
        "wrote {} and {} ({} modes, {len} samples)",
        args.out.display(),
        truth_path.display(),
        truth.len()
    );
    Ok(())
}

fn scaled(modes: &ModeSet, gain: f64) -> Result<ModeSet> {
    let scaled = modes
        .iter()
        .map(|m| m.with_amplitudes(m.gamma_s() * gain, m.gamma_c() * gain))
        .collect();
    Ok(ModeSet::new(scaled, modes.source(), modes.sample_rate())?)
}
