//! Band layouts.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::filter::FilterSpec;
use crate::warp::warp_frequency;
use crate::{Error, Result};

/// Default per-band mode budget for harmonic plans.
pub const HARMONIC_MAX_MODES: usize = 6;
/// Default per-band mode budget for Bark and uniform plans.
pub const GRID_MAX_MODES: usize = 100;
/// Default residual level at which filter transients count as settled.
pub const SETTLE_TOL: f64 = 1e-10;
/// Default band floor relative to the strongest band, dB.
pub const FLOOR_DB: f64 = -120.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandScheme {
    HarmonicInharmonic {
        f0: f64,
        inharmonicity: f64,
        n_partials: usize,
    },
    BarkSpaced {
        n_bands: usize,
    },
    UniformGrid {
        n_bands: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub center_hz: f64,
    /// One-sided passband width around the center, Hz.
    pub bandwidth_hz: f64,
    pub decimation: usize,
    pub filter: FilterSpec,
    pub max_modes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandPlan {
    bands: Vec<Band>,
    scheme: BandScheme,
    sample_rate: f64,
    pub settle_tol: f64,
    /// Band content more than this far below the strongest band (RMS over
    /// the Hankel window) is treated as filter leakage and not estimated.
    pub floor_db: f64,
}

impl BandPlan {
    pub fn new(bands: Vec<Band>, scheme: BandScheme, sample_rate: f64) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::InvalidParameter("band plan has no bands".into()));
        }
        let nyquist = sample_rate / 2.0;
        for (i, b) in bands.iter().enumerate() {
            let bad = |what: &str| Error::InvalidParameter(alloc::format!("band {i}: {what}"));
            if !(b.center_hz >= 0.0 && b.center_hz < nyquist) {
                return Err(bad("center outside [0, Nyquist)"));
            }
            if i > 0 && !(b.center_hz > bands[i - 1].center_hz) {
                return Err(bad("centers must be strictly increasing"));
            }
            if b.decimation == 0 || !(b.bandwidth_hz > 0.0) {
                return Err(bad("decimation and bandwidth must be positive"));
            }
            if !((b.bandwidth_hz * b.decimation as f64) < nyquist) {
                return Err(bad("passband aliases after decimation"));
            }
            if b.filter.order == 0 || !(b.filter.cutoff_hz < nyquist / b.decimation as f64) {
                return Err(bad("filter cutoff not below decimated Nyquist"));
            }
        }
        Ok(Self {
            bands,
            scheme,
            sample_rate,
            settle_tol: SETTLE_TOL,
            floor_db: FLOOR_DB,
        })
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn scheme(&self) -> BandScheme {
        self.scheme
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.bands.len()
    }

    /// Always false: a plan holds at least one band.
    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn with_max_modes(mut self, max_modes: usize) -> Self {
        for b in &mut self.bands {
            b.max_modes = max_modes;
        }
        self
    }

    pub fn with_filter_order(mut self, order: usize) -> Self {
        for b in &mut self.bands {
            b.filter.order = order;
        }
        self
    }

    /// Half-open `[lo, hi)` Hz owned by band `b`: midpoints to its
    /// neighbours, closed off by DC and Nyquist at the ends.
    pub fn ownership(&self, b: usize) -> (f64, f64) {
        let lo = if b == 0 {
            0.0
        } else {
            (self.bands[b - 1].center_hz + self.bands[b].center_hz) / 2.0
        };
        let hi = if b + 1 == self.bands.len() {
            // Nyquist itself belongs to the last band.
            f64::INFINITY
        } else {
            (self.bands[b].center_hz + self.bands[b + 1].center_hz) / 2.0
        };
        (lo, hi)
    }

    /// Band whose ownership region contains `freq_hz`.
    pub fn owner_of(&self, freq_hz: f64) -> Option<usize> {
        if !(0.0..=self.sample_rate / 2.0).contains(&freq_hz) {
            return None;
        }
        (0..self.bands.len()).find(|&b| {
            let (lo, hi) = self.ownership(b);
            freq_hz >= lo && freq_hz < hi
        })
    }

    /// Largest total mode count the plan can emit.
    pub fn total_budget(&self) -> usize {
        self.bands.iter().map(|b| b.max_modes).sum()
    }
}

/// Largest factor not above `r` that keeps `bandwidth * factor` below Nyquist.
fn clamp_decimation(r: usize, bandwidth_hz: f64, fs: f64) -> usize {
    let nyquist = fs / 2.0;
    let mut limit = (nyquist / bandwidth_hz).floor() as usize;
    if limit as f64 * bandwidth_hz >= nyquist {
        limit = limit.saturating_sub(1);
    }
    r.min(limit).max(1)
}

/// Bands around stiff-string partials `n f0 sqrt(1 + B n^2)`.
///
/// Each band passes `bw_fraction * f0` in total (half on each side of the
/// partial) through a fourth-order Butterworth. Partials at or above Nyquist
/// are dropped, and decimation is reduced where `r` would alias the band.
pub fn plan_harmonic(
    f0: f64,
    inharmonicity: f64,
    n_partials: usize,
    fs: f64,
    r: usize,
    bw_fraction: f64,
) -> Result<BandPlan> {
    if !(f0 > 0.0 && bw_fraction > 0.0 && inharmonicity >= 0.0) {
        return Err(Error::InvalidParameter(
            "f0 and bandwidth fraction must be positive, B nonnegative".into(),
        ));
    }
    let half = bw_fraction * f0 / 2.0;
    let bands: Vec<Band> = (1..=n_partials)
        .map(|n| {
            let n = n as f64;
            n * f0 * (1.0 + inharmonicity * n * n).sqrt()
        })
        .take_while(|&f| f < fs / 2.0)
        .map(|center_hz| Band {
            center_hz,
            bandwidth_hz: half,
            decimation: clamp_decimation(r, half, fs),
            filter: FilterSpec::butterworth(4, half),
            max_modes: HARMONIC_MAX_MODES,
        })
        .collect();
    BandPlan::new(
        bands,
        BandScheme::HarmonicInharmonic {
            f0,
            inharmonicity,
            n_partials,
        },
        fs,
    )
}

/// `n_bands` centers `(2b - 1) fs / (4 n_bands)`, compressed toward DC by
/// the warping map so that they follow the Bark scale for `rho > 0`.
///
/// Band `b` passes `overlap * (f_{b+1} - f_b) / 2` on each side (the last
/// band reuses the previous spacing) through an elliptic-like filter with
/// 80 dB stopband.
pub fn plan_bark(n_bands: usize, fs: f64, rho: f64, overlap: f64, r: usize) -> Result<BandPlan> {
    if n_bands < 2 {
        return Err(Error::InvalidParameter("need at least two bands".into()));
    }
    let centers: Vec<f64> = uniform_centers(n_bands, fs)
        .into_iter()
        .map(|f| warp_frequency(2.0 * PI * f / fs, -rho) * fs / (2.0 * PI))
        .collect();
    grid_plan(&centers, fs, overlap, r, BandScheme::BarkSpaced { n_bands })
}

/// `n_bands` centers `(2b - 1) fs / (4 n_bands)` without warping.
pub fn plan_uniform(n_bands: usize, fs: f64, overlap: f64, r: usize) -> Result<BandPlan> {
    if n_bands < 2 {
        return Err(Error::InvalidParameter("need at least two bands".into()));
    }
    let centers = uniform_centers(n_bands, fs);
    grid_plan(&centers, fs, overlap, r, BandScheme::UniformGrid { n_bands })
}

fn uniform_centers(n_bands: usize, fs: f64) -> Vec<f64> {
    (1..=n_bands)
        .map(|b| (2 * b - 1) as f64 * fs / (4 * n_bands) as f64)
        .collect()
}

fn grid_plan(centers: &[f64], fs: f64, overlap: f64, r: usize, scheme: BandScheme) -> Result<BandPlan> {
    if !(overlap > 0.0) {
        return Err(Error::InvalidParameter("overlap factor must be positive".into()));
    }
    let n = centers.len();
    let bands = (0..n)
        .map(|b| {
            let spacing = if b + 1 < n {
                centers[b + 1] - centers[b]
            } else {
                centers[b] - centers[b - 1]
            };
            let half = overlap * spacing / 2.0;
            Band {
                center_hz: centers[b],
                bandwidth_hz: half,
                decimation: clamp_decimation(r, half, fs),
                filter: FilterSpec::elliptic_like(7, half, 80.0),
                max_modes: GRID_MAX_MODES,
            }
        })
        .collect();
    BandPlan::new(bands, scheme, fs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::bark_rho;

    #[test]
    fn harmonic_centers() {
        let p = plan_harmonic(220.0, 1e-4, 10, 44100.0, 8, 0.1).unwrap();
        assert!((p.bands()[9].center_hz - 2210.9726366465957).abs() < 1e-9);
        let p = plan_harmonic(100.0, 0.0, 3, 44100.0, 8, 0.1).unwrap();
        assert_eq!(p.bands()[2].center_hz, 300.0);
        assert_eq!(p.bands()[0].filter, FilterSpec::butterworth(4, 5.0));
    }

    #[test]
    fn harmonic_keeps_sixty_partials_at_a3() {
        let p = plan_harmonic(220.0, 1e-4, 60, 44100.0, 5000, 0.1).unwrap();
        assert_eq!(p.len(), 60);
        assert!(p.bands()[59].center_hz < 22050.0);
    }

    #[test]
    fn harmonic_drops_partials_past_nyquist() {
        let p = plan_harmonic(1000.0, 0.0, 30, 44100.0, 8, 0.1).unwrap();
        assert_eq!(p.len(), 22);
    }

    #[test]
    fn decimation_is_clamped_against_aliasing() {
        let p = plan_harmonic(220.0, 1e-4, 3, 44100.0, 5000, 0.1).unwrap();
        for b in p.bands() {
            assert!(b.bandwidth_hz * (b.decimation as f64) < 22050.0);
            assert_eq!(b.decimation, 2004);
        }
    }

    #[test]
    fn bark_two_bands_without_warping() {
        let p = plan_bark(2, 48000.0, 0.0, 1.2, 8).unwrap();
        let c: Vec<f64> = p.bands().iter().map(|b| b.center_hz).collect();
        assert!((c[0] - 6000.0).abs() < 1e-9 && (c[1] - 18000.0).abs() < 1e-9);
    }

    #[test]
    fn bark_twenty_bands() {
        let fs = 48000.0;
        let p = plan_bark(20, fs, bark_rho(fs), 1.2, 8).unwrap();
        let c: Vec<f64> = p.bands().iter().map(|b| b.center_hz).collect();
        assert!(c[0] < 500.0, "{}", c[0]);
        assert!(c[19] > 15000.0, "{}", c[19]);
        for b in 0..19 {
            let (x, y) = (&p.bands()[b], &p.bands()[b + 1]);
            assert!(x.center_hz + x.bandwidth_hz > y.center_hz - y.bandwidth_hz);
        }
    }

    #[test]
    fn ownership_partitions_the_axis() {
        let p = plan_uniform(4, 8000.0, 1.2, 2).unwrap();
        assert_eq!(p.ownership(0), (0.0, 1000.0));
        assert_eq!(p.ownership(1), (1000.0, 2000.0));
        assert_eq!(p.owner_of(999.999), Some(0));
        assert_eq!(p.owner_of(1000.0), Some(1));
        assert_eq!(p.owner_of(4000.0), Some(3));
        assert_eq!(p.owner_of(4000.1), None);
    }

    #[test]
    fn invalid_plans() {
        assert!(plan_bark(1, 48000.0, 0.5, 1.2, 8).is_err());
        let band = Band {
            center_hz: 100.0,
            bandwidth_hz: 10.0,
            decimation: 1,
            filter: FilterSpec::butterworth(4, 10.0),
            max_modes: 1,
        };
        let bad = BandPlan::new(
            vec![band, band],
            BandScheme::UniformGrid { n_bands: 2 },
            1000.0,
        );
        assert!(bad.is_err());
    }
}
