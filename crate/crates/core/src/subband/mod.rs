//! Frequency-zoomed estimation.
//!
//! Each band is shifted to DC, lowpass filtered and decimated, so a narrow
//! slice of the spectrum fills the whole decimated axis. ESPRIT on the short
//! complex band signal resolves modes that are too close for a full-rate
//! Hankel matrix of practical size. Band poles are mapped back with
//! `omega = omega_b / r + 2 pi f_n / fs` and `alpha = alpha_b / r`, modes
//! outside the band's ownership region are discarded, and amplitudes are
//! re-fitted jointly at the full rate.

pub mod filter;
pub mod plan;

use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

pub use filter::{lowpass_decimate, FilterFamily, FilterSpec, Sos};
pub use plan::{plan_bark, plan_harmonic, plan_uniform, Band, BandPlan, BandScheme};

use crate::diagnostics::{BandReport, Diagnostics};
use crate::esprit::{
    estimate_amplitudes, numerical_rank, poles_to_modes, select_order, EspritConfig, Estimate,
    Subspace,
};
use crate::warp::bare_modes;
use crate::{esprit, Error, ModeSet, Result, Signal, Source, C64};

/// `h(t) e^{-j 2 pi f_n t / fs}`.
pub fn heterodyne(signal: &Signal, f_n: f64) -> Result<Signal> {
    let step = f_n / signal.sample_rate();
    let x = signal
        .samples()
        .iter()
        .enumerate()
        .map(|(t, &h)| {
            // Reduce the phase in cycles first to keep it accurate for long signals.
            let cycles = (step * t as f64).fract();
            h * C64::from_polar(1.0, -2.0 * PI * cycles)
        })
        .collect();
    Signal::from_complex(x, signal.sample_rate())
}

/// Maps band-rate `(omega_b, alpha_b)` (signed `omega_b`) to the full-rate
/// axis. Modes landing outside `[0, pi]` are dropped; the count is returned.
pub fn band_modes_to_global(
    band_modes: &[(f64, f64)],
    f_n: f64,
    r: usize,
    fs: f64,
) -> (Vec<(f64, f64)>, usize) {
    let shift = 2.0 * PI * f_n / fs;
    let r = r as f64;
    let mut dropped = 0;
    let out = band_modes
        .iter()
        .filter_map(|&(w, a)| {
            let omega = w / r + shift;
            if (0.0..=PI).contains(&omega) {
                Some((omega, a / r))
            } else {
                dropped += 1;
                None
            }
        })
        .collect();
    (out, dropped)
}

/// A band signal ready for estimation: heterodyned, filtered, decimated and
/// trimmed past the filter transient.
pub fn band_signal(signal: &Signal, plan: &BandPlan, b: usize) -> Result<Signal> {
    let band = &plan.bands()[b];
    let shifted = heterodyne(signal, band.center_hz)?;
    let d = filter::lowpass_decimate_settled(&shifted, &band.filter, band.decimation, plan.settle_tol)?;
    if d.settle + 4 > d.signal.len() {
        return Err(Error::InsufficientSamples {
            required: (d.settle + 4) * band.decimation,
            available: signal.len(),
        });
    }
    d.signal.slice(d.settle..d.signal.len())
}

struct BandOutcome {
    /// Order chosen before the budget cap.
    selected: usize,
    /// Poles actually extracted.
    used: usize,
    params: Vec<(f64, f64)>,
    diag: Diagnostics,
}

fn band_hankel_size(band_sig: &Signal, cfg: &EspritConfig) -> Result<usize> {
    let n = cfg.hankel_size.min(band_sig.len() / 2);
    if n < 2 {
        return Err(Error::InsufficientSamples {
            required: 4,
            available: band_sig.len(),
        });
    }
    Ok(n)
}

/// RMS over the samples that enter the Hankel matrix.
fn window_rms(band_sig: &Signal, n: usize) -> f64 {
    let x = &band_sig.samples()[..2 * n];
    (x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64).sqrt()
}

/// `level` is the strongest band window RMS. Singular values below
/// `level * 10^(floor/20)` per unit Hankel size are treated as leakage, where
/// the floor is the plan floor or the band filter's stopband, whichever is higher.
fn run_band(
    band_sig: &Signal,
    plan: &BandPlan,
    b: usize,
    cap: usize,
    cfg: &EspritConfig,
    level: f64,
) -> Result<BandOutcome> {
    let band = &plan.bands()[b];
    let floor_db = match band.filter.stopband_db {
        Some(stop) => plan.floor_db.max(-stop),
        None => plan.floor_db,
    };
    let floor_rms = level * 10f64.powf(floor_db / 20.0);
    let n = band_hankel_size(band_sig, cfg)?;
    let pair = esprit::build_hankel(band_sig, n)?;
    let subspace = Subspace::new(&pair)?;
    let sv = subspace.singular_values();
    let above_floor = sv.iter().take_while(|&&s| s > n as f64 * floor_rms).count();
    let selected = if above_floor == 0 {
        0
    } else {
        select_order(sv, cfg.order)?
            .min(numerical_rank(sv))
            .min(above_floor)
    };
    let used = selected.min(cap);
    let mut diag = Diagnostics::default();
    if used == 0 {
        return Ok(BandOutcome {
            selected,
            used,
            params: Vec::new(),
            diag,
        });
    }
    let poles = subspace.poles(&pair, used)?;
    let ceiling = cfg.alpha_ceiling.unwrap_or_else(|| 1e6f64.ln() / n as f64);
    let (local, d) = poles_to_modes(&poles, false, ceiling);
    diag.absorb(d);
    let fs = plan.sample_rate();
    let (global, outside) = band_modes_to_global(&local, band.center_hz, band.decimation, fs);
    diag.dropped_out_of_band += outside;
    let (lo, hi) = plan.ownership(b);
    let owned: Vec<(f64, f64)> = global
        .into_iter()
        .filter(|&(w, _)| {
            let hz = w * fs / (2.0 * PI);
            let keep = hz >= lo && hz < hi;
            diag.dropped_out_of_band += usize::from(!keep);
            keep
        })
        .collect();
    Ok(BandOutcome {
        selected,
        used,
        params: owned,
        diag,
    })
}


/// Per-band ESPRIT with budget redistribution and a joint amplitude fit.
///
/// `cfg.hankel_size` is the per-band Hankel size, reduced where a band has
/// too few samples. Each band extracts at most its `max_modes` poles. Budget
/// left unused by bands that needed fewer is split equally among the bands
/// that hit their cap, which are then re-estimated once. A band that fails
/// contributes no modes and records the error in its report.
pub fn fz_esprit(signal: &Signal, plan: &BandPlan, cfg: &EspritConfig) -> Result<Estimate> {
    if !signal.is_real() {
        return Err(Error::ComplexSignal);
    }
    if signal.sample_rate() != plan.sample_rate() {
        return Err(Error::RateMismatch(signal.sample_rate(), plan.sample_rate()));
    }
    let nb = plan.len();
    let mut signals: Vec<Result<Signal>> = Vec::with_capacity(nb);
    let mut outcomes: Vec<core::result::Result<BandOutcome, Error>> = Vec::with_capacity(nb);
    let mut caps: Vec<usize> = plan.bands().iter().map(|b| b.max_modes).collect();
    let mut level = 0.0f64;
    for b in 0..nb {
        let sig = band_signal(signal, plan, b).and_then(|s| {
            let n = band_hankel_size(&s, cfg)?;
            level = level.max(window_rms(&s, n));
            Ok(s)
        });
        signals.push(sig);
    }
    for (b, sig) in signals.iter().enumerate() {
        outcomes.push(match sig {
            Ok(s) => run_band(s, plan, b, caps[b], cfg, level),
            Err(e) => Err(e.clone()),
        });
    }

    let exhausted: Vec<usize> = (0..nb)
        .filter(|&b| matches!(&outcomes[b], Ok(o) if o.selected > caps[b]))
        .collect();
    let unused: usize = (0..nb)
        .filter(|b| !exhausted.contains(b))
        .map(|b| match &outcomes[b] {
            Ok(o) => caps[b] - o.used,
            Err(_) => caps[b],
        })
        .sum();
    if !exhausted.is_empty() && unused >= exhausted.len() {
        let extra = unused / exhausted.len();
        for &b in &exhausted {
            caps[b] += extra;
            if let Ok(s) = &signals[b] {
                outcomes[b] = run_band(s, plan, b, caps[b], cfg, level);
            }
        }
    }

    let mut diag = Diagnostics::default();
    let mut params = Vec::new();
    for (b, outcome) in outcomes.into_iter().enumerate() {
        let band = &plan.bands()[b];
        let mut report = BandReport {
            index: b,
            center_hz: band.center_hz,
            budget: caps[b],
            ..BandReport::default()
        };
        match outcome {
            Ok(o) => {
                report.selected_order = o.selected;
                report.kept = o.params.len();
                report.discarded = o.diag.total_dropped();
                diag.absorb(o.diag);
                params.extend(o.params);
            }
            Err(e) => report.error = Some(e.to_string()),
        }
        diag.bands.push(report);
    }
    let fs = signal.sample_rate();
    params.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let before = params.len();
    params.dedup_by(|b, a| (a.0 - b.0).abs() <= 1e-12 && (a.1 - b.1).abs() <= 1e-12);
    diag.dropped_duplicate += before - params.len();
    let modes = if params.is_empty() {
        ModeSet::empty(Source::Subband, fs)
    } else {
        // Validates the parameters before the (larger) joint fit.
        bare_modes(&params, Source::Subband, fs)?;
        estimate_amplitudes(signal, &params)?.with_source(Source::Subband)
    };
    Ok(Estimate {
        modes,
        diagnostics: diag,
    })
}

/// Real bandpass copy of `signal` for band `b` at the full rate:
/// `2 Re(e^{j w_n t} LPF(e^{-j w_n t} h))`, and the number of leading
/// samples still inside the filter transient.
pub fn bandpass(signal: &Signal, plan: &BandPlan, b: usize) -> Result<(Signal, usize)> {
    let band = &plan.bands()[b];
    let fs = signal.sample_rate();
    let shifted = heterodyne(signal, band.center_hz)?;
    let mut x = shifted.samples().to_vec();
    let sections = band.filter.design(fs, fs / band.decimation as f64 - band.filter.cutoff_hz)?;
    filter::sos_filter_complex(&sections, &mut x);
    let step = band.center_hz / fs;
    let y: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(t, v)| {
            let cycles = (step * t as f64).fract();
            2.0 * (v * C64::from_polar(1.0, 2.0 * PI * cycles)).re
        })
        .collect();
    let settle = filter::settle_samples(&sections, plan.settle_tol);
    Ok((Signal::from_real(&y, fs)?, settle))
}
