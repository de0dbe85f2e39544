//! CSV plot data: magnitude spectra and log-time spectrograms.

use std::f64::consts::PI;
use std::fmt::Write as _;

use modal_core::metrics::{to_db, DB_FLOOR};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

pub const SPECTROGRAM_WINDOW: usize = 1024;
pub const SPECTROGRAM_HOP: usize = 256;

/// Number of frames for `len` samples: every hop whose window fits, or one
/// zero-padded frame when the input is shorter than a window.
pub fn frame_count(len: usize, window: usize, hop: usize) -> usize {
    if len <= window {
        1
    } else {
        1 + (len - window) / hop
    }
}

/// Power spectrum `|X_k|^2` for `k = 0..=n/2`, with `x` zero-padded to `n`.
fn power_spectrum(planner: &mut FftPlanner<f64>, x: &[f64], n: usize) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    planner.plan_fft_forward(n).process(&mut buf);
    buf[..=n / 2].iter().map(|c| c.norm_sqr()).collect()
}

/// Magnitude spectra of `a` and `b` on a shared grid, one row per bin.
pub fn spectrum_csv(a: &[f64], b: &[f64], sample_rate: f64) -> String {
    let n = a.len().max(b.len()).max(2).next_power_of_two();
    let mut planner = FftPlanner::new();
    let pa = power_spectrum(&mut planner, a, n);
    let pb = power_spectrum(&mut planner, b, n);
    let mut s = String::new();
    let _ = writeln!(s, "# magnitude spectrum, rectangular window, fft size {n}");
    let _ = writeln!(s, "# dB re 1, floor {DB_FLOOR} dB");
    s.push_str("freq_hz,a_db,b_db\n");
    for (k, (x, y)) in pa.iter().zip(&pb).enumerate() {
        let f = k as f64 * sample_rate / n as f64;
        let _ = writeln!(s, "{f},{},{}", to_db(*x), to_db(*y));
    }
    s
}

/// Hann-windowed short-time spectrum. Each row is one frame: its center
/// time in seconds, `log10` of that time, then one dB column per bin.
pub fn spectrogram_csv(x: &[f64], sample_rate: f64, window: usize, hop: usize) -> String {
    let frames = frame_count(x.len(), window, hop);
    let bins = window / 2 + 1;
    let hann: Vec<f64> = (0..window)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / window as f64).cos())
        .collect();
    let mut planner = FftPlanner::new();
    let mut s = String::new();
    let _ = writeln!(s, "# window hann {window}, hop {hop}, floor {DB_FLOOR} dB");
    let _ = writeln!(s, "# frames {frames}, bins {bins}, bin spacing {} Hz", sample_rate / window as f64);
    s.push_str("time_s,log10_time");
    for k in 0..bins {
        let _ = write!(s, ",bin{k}");
    }
    s.push('\n');
    let mut frame = vec![0.0; window];
    for f in 0..frames {
        let start = f * hop;
        for (i, v) in frame.iter_mut().enumerate() {
            *v = x.get(start + i).copied().unwrap_or(0.0) * hann[i];
        }
        let t = (start as f64 + window as f64 / 2.0) / sample_rate;
        let _ = write!(s, "{t},{}", t.log10());
        for p in power_spectrum(&mut planner, &frame, window) {
            let _ = write!(s, ",{}", to_db(p));
        }
        s.push('\n');
    }
    s
}
