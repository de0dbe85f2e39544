//! Matrix-pencil (ESPRIT) estimation of damped sinusoids.
//!
//! For a signal that is exactly a sum of `M` damped complex exponentials the
//! Hankel matrix `H[i][j] = h(i + j)` has rank `M`, and its one-sample shift
//! `K[i][j] = h(i + j + 1)` satisfies `K = V Psi Gamma V^T` with the poles on
//! the diagonal of `Psi`. The poles are recovered as the eigenvalues of the
//! `M x M` matrix `Phi = S_M^{-1} U_M^H K W_M` built from the leading singular
//! triplets of `H = U S W^H`.
//!
//! For real signals `H` is real symmetric, so its SVD is read off a symmetric
//! eigendecomposition (`sigma = |lambda|`, `w = sign(lambda) u`), which is
//! several times cheaper than a general SVD at the sizes used here.

use alloc::vec::Vec;
use core::f64::consts::PI;

use faer::{Mat, Side};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::diagnostics::Diagnostics;
use crate::mode::{sort_modes, ALPHA_TOL, DUPLICATE_TOL};
use crate::{linalg, Error, Mode, ModeSet, Result, Signal, Source, C64};

/// Default Hankel size for instrument tones.
pub const DEFAULT_HANKEL_SIZE: usize = 2048;

/// How many singular values (exponentials) to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderMethod {
    /// Elbow of the log singular-value curve, by distance to its chord.
    KneePoint,
    /// Singular values more than this many dB (negative) below the largest
    /// are discarded.
    ThresholdDb(f64),
    Fixed(usize),
}

/// Result of model-order selection, kept for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSelection {
    pub method: OrderMethod,
    pub singular_values: Vec<f64>,
    pub order: usize,
}

/// The Hankel matrix of a signal and its one-sample shift.
#[derive(Debug, Clone)]
pub enum HankelPair {
    Real { h: Mat<f64>, k: Mat<f64> },
    Complex { h: Mat<C64>, k: Mat<C64> },
}

impl HankelPair {
    pub fn size(&self) -> usize {
        match self {
            HankelPair::Real { h, .. } => h.nrows(),
            HankelPair::Complex { h, .. } => h.nrows(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, HankelPair::Real { .. })
    }

    pub fn h(&self, i: usize, j: usize) -> C64 {
        match self {
            HankelPair::Real { h, .. } => C64::new(h[(i, j)], 0.0),
            HankelPair::Complex { h, .. } => h[(i, j)],
        }
    }

    pub fn k(&self, i: usize, j: usize) -> C64 {
        match self {
            HankelPair::Real { k, .. } => C64::new(k[(i, j)], 0.0),
            HankelPair::Complex { k, .. } => k[(i, j)],
        }
    }
}

/// `H[i][j] = h(i + j)`, `K[i][j] = h(i + j + 1)` for `i, j < n`.
pub fn build_hankel(signal: &Signal, n: usize) -> Result<HankelPair> {
    if n < 2 {
        return Err(Error::InvalidParameter("Hankel size must be at least 2".into()));
    }
    if signal.len() < 2 * n {
        return Err(Error::InsufficientSamples {
            required: 2 * n,
            available: signal.len(),
        });
    }
    let x = signal.samples();
    Ok(if signal.is_real() {
        HankelPair::Real {
            h: Mat::from_fn(n, n, |i, j| x[i + j].re),
            k: Mat::from_fn(n, n, |i, j| x[i + j + 1].re),
        }
    } else {
        HankelPair::Complex {
            h: Mat::from_fn(n, n, |i, j| x[i + j]),
            k: Mat::from_fn(n, n, |i, j| x[i + j + 1]),
        }
    })
}

/// Singular values and vectors of `H`.
pub struct Subspace {
    singular_values: Vec<f64>,
    factors: Factors,
}

enum Factors {
    /// Eigenvectors of the symmetric `H`, reordered by descending `|lambda|`,
    /// with the sign of each eigenvalue.
    Real { u: Mat<f64>, signs: Vec<f64> },
    Complex { u: Mat<C64>, w: Mat<C64> },
}

impl Subspace {
    pub fn new(pair: &HankelPair) -> Result<Self> {
        match pair {
            HankelPair::Real { h, .. } => {
                let n = h.nrows();
                let eig = h
                    .self_adjoint_eigen(Side::Lower)
                    .map_err(|_| Error::Decomposition("symmetric eigendecomposition"))?;
                let lambda = eig.S().column_vector();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| lambda[b].abs().total_cmp(&lambda[a].abs()));
                let vectors = eig.U();
                let u = Mat::from_fn(n, n, |i, j| vectors[(i, order[j])]);
                let signs = order
                    .iter()
                    .map(|&j| if lambda[j] < 0.0 { -1.0 } else { 1.0 })
                    .collect();
                let singular_values = order.iter().map(|&j| lambda[j].abs()).collect();
                Ok(Self {
                    singular_values,
                    factors: Factors::Real { u, signs },
                })
            }
            HankelPair::Complex { h, .. } => {
                let svd = h
                    .thin_svd()
                    .map_err(|_| Error::Decomposition("singular value decomposition"))?;
                let s = svd.S().column_vector();
                Ok(Self {
                    singular_values: s.iter().map(|x| x.re).collect(),
                    factors: Factors::Complex {
                        u: svd.U().to_owned(),
                        w: svd.V().to_owned(),
                    },
                })
            }
        }
    }

    /// Descending singular values of `H`.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Eigenvalues of `Phi = S_M^{-1} U_M^H K W_M`.
    pub fn poles(&self, pair: &HankelPair, m: usize) -> Result<Vec<C64>> {
        let n = self.singular_values.len();
        if m == 0 || m > n {
            return Err(Error::InvalidParameter(alloc::format!(
                "order {m} outside 1..={n}"
            )));
        }
        let floor = self.singular_values[0] * f64::EPSILON;
        if let Some(index) = self.singular_values[..m].iter().position(|&s| s <= floor) {
            return Err(Error::RankDeficient { requested: m, index });
        }
        let sigma = &self.singular_values[..m];
        let eig = match (&self.factors, pair) {
            (Factors::Real { u, signs }, HankelPair::Real { k, .. }) => {
                let u_m = u.get(.., ..m);
                let w_m = Mat::<f64>::from_fn(n, m, |i, j| u[(i, j)] * signs[j]);
                let kw = k * &w_m;
                let mut phi = u_m.transpose() * &kw;
                for (i, s) in sigma.iter().enumerate() {
                    for j in 0..m {
                        phi[(i, j)] /= s;
                    }
                }
                phi.eigenvalues()
            }
            (Factors::Complex { u, w }, HankelPair::Complex { k, .. }) => {
                let u_m = u.get(.., ..m);
                let kw = k * w.get(.., ..m);
                let mut phi = u_m.adjoint() * &kw;
                for (i, s) in sigma.iter().enumerate() {
                    for j in 0..m {
                        phi[(i, j)] /= *s;
                    }
                }
                phi.eigenvalues()
            }
            _ => return Err(Error::InvalidParameter("subspace built from another pair".into())),
        };
        eig.map_err(|_| Error::Decomposition("pencil eigenvalues"))
    }
}

/// Eigenvalues of the rank-`m` truncated pencil `(K, H)`.
pub fn estimate_poles(pair: &HankelPair, m: usize) -> Result<Vec<C64>> {
    Subspace::new(pair)?.poles(pair, m)
}

/// Number of singular values to retain.
pub fn select_order(singular_values: &[f64], method: OrderMethod) -> Result<usize> {
    let n = singular_values.len();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "order selection needs at least two singular values".into(),
        ));
    }
    if singular_values.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParameter("singular values must be nonnegative".into()));
    }
    let top = singular_values[0];
    if top == 0.0 {
        return Err(Error::ZeroSpectrum);
    }
    Ok(match method {
        OrderMethod::Fixed(m) => m.min(n),
        OrderMethod::ThresholdDb(level) => singular_values
            .iter()
            .filter(|&&s| s > 0.0 && 20.0 * (s / top).log10() > level)
            .count()
            .max(1),
        OrderMethod::KneePoint => knee_point(singular_values),
    })
}

/// Count of singular values above rounding level relative to the largest.
pub fn numerical_rank(singular_values: &[f64]) -> usize {
    let floor = singular_values.first().copied().unwrap_or(0.0) * f64::EPSILON;
    singular_values.iter().take_while(|&&s| s > floor).count()
}

/// Elbow of `log10(sigma)` against index.
///
/// Each point's signed distance to the chord from the first to the last point
/// is compared; the largest magnitude wins. A point above the chord is the
/// last retained value. A point below it lies on the floor past the elbow, so
/// the cut is placed at the steepest drop leading up to it.
fn knee_point(singular_values: &[f64]) -> usize {
    let n = singular_values.len();
    let top = singular_values[0];
    // Values at rounding level carry no structure; exact zeros would make the
    // log curve unbounded.
    let floor = top * f64::EPSILON;
    let y: Vec<f64> = singular_values.iter().map(|&s| s.max(floor).log10()).collect();
    let (y0, y1) = (y[0], y[n - 1]);
    let slope = (y1 - y0) / (n - 1) as f64;
    let scale = (1.0 + slope * slope).sqrt();
    let mut best = (0.0f64, 0usize);
    for (i, &yi) in y.iter().enumerate() {
        let d = (yi - (y0 + slope * i as f64)) / scale;
        if d.abs() > best.0.abs() {
            best = (d, i);
        }
    }
    let (d, i) = best;
    let m = if d > 0.0 {
        i + 1
    } else {
        let mut cut = i;
        let mut steepest = f64::NEG_INFINITY;
        for j in 1..=i {
            let drop = y[j - 1] - y[j];
            if drop > steepest {
                steepest = drop;
                cut = j;
            }
        }
        cut
    };
    m.clamp(1, n)
}

/// Converts poles to `(omega, alpha)` with `ln psi = j omega - alpha`.
///
/// For real signals only the nonnegative-frequency member of each conjugate
/// pair is kept. Poles at the origin, outside the unit disk, or damped beyond
/// `alpha_ceiling` are dropped and counted; exact repeats are merged. Complex
/// signals keep signed frequencies in `(-pi, pi]`.
pub fn poles_to_modes(
    poles: &[C64],
    real_signal: bool,
    alpha_ceiling: f64,
) -> (Vec<(f64, f64)>, Diagnostics) {
    let mut diag = Diagnostics::default();
    let mut out = Vec::with_capacity(poles.len());
    for &p in poles {
        let r = p.norm();
        if r == 0.0 || !r.is_finite() {
            diag.dropped_origin += 1;
            continue;
        }
        let alpha = -r.ln();
        let mut omega = p.im.atan2(p.re);
        if real_signal {
            if omega < 0.0 {
                diag.dropped_conjugate += 1;
                continue;
            }
        } else if omega == -PI {
            omega = PI;
        }
        if alpha < -ALPHA_TOL {
            diag.dropped_unstable += 1;
            continue;
        }
        if alpha > alpha_ceiling {
            diag.dropped_dead += 1;
            continue;
        }
        out.push((omega, alpha));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let before = out.len();
    out.dedup_by(|b, a| (a.0 - b.0).abs() <= DUPLICATE_TOL && (a.1 - b.1).abs() <= DUPLICATE_TOL);
    diag.dropped_duplicate += before - out.len();
    (out, diag)
}

/// Least-squares amplitudes of `modes` against the real signal.
pub fn estimate_amplitudes(signal: &Signal, modes: &[(f64, f64)]) -> Result<ModeSet> {
    if !signal.is_real() {
        return Err(Error::ComplexSignal);
    }
    if modes.is_empty() {
        return Err(Error::InvalidParameter("no modes to fit".into()));
    }
    if signal.len() < 2 * modes.len() {
        return Err(Error::InsufficientSamples {
            required: 2 * modes.len(),
            available: signal.len(),
        });
    }
    let gammas = linalg::fit_amplitudes(&signal.real_part(), modes)?;
    let mut out = Vec::with_capacity(modes.len());
    for (index, (&(w, a), &(gs, gc))) in modes.iter().zip(&gammas).enumerate() {
        let mode = Mode::new(w, a, gs, gc).map_err(|e| match e {
            Error::InvalidMode { reason, .. } => Error::InvalidMode { index, reason },
            e => e,
        })?;
        out.push(mode.with_amplitudes(gs, gc));
    }
    sort_modes(&mut out);
    ModeSet::new(out, Source::Plain, signal.sample_rate())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EspritConfig {
    pub hankel_size: usize,
    pub order: OrderMethod,
    /// Upper bound on the number of exponentials, applied after selection.
    pub max_order: Option<usize>,
    /// Modes damped more than this (nepers/sample) are discarded; defaults to
    /// `ln(1e6) / hankel_size`, i.e. 120 dB of decay across the window.
    pub alpha_ceiling: Option<f64>,
}

impl EspritConfig {
    pub fn new(hankel_size: usize, order: OrderMethod) -> Self {
        Self {
            hankel_size,
            order,
            max_order: None,
            alpha_ceiling: None,
        }
    }

    pub fn alpha_ceiling(&self) -> f64 {
        self.alpha_ceiling
            .unwrap_or_else(|| 1e6f64.ln() / self.hankel_size as f64)
    }
}

/// Poles of a (real or complex) signal together with the order selection.
#[derive(Debug, Clone)]
pub struct PoleEstimate {
    pub poles: Vec<C64>,
    pub selection: OrderSelection,
}

/// Hankel construction, decomposition, order selection and pencil poles.
pub fn estimate_signal_poles(signal: &Signal, cfg: &EspritConfig) -> Result<PoleEstimate> {
    let pair = build_hankel(signal, cfg.hankel_size)?;
    let subspace = Subspace::new(&pair)?;
    let sv = subspace.singular_values();
    let mut order = select_order(sv, cfg.order)?;
    if let Some(cap) = cfg.max_order {
        order = order.min(cap);
    }
    order = order.min(numerical_rank(sv));
    let poles = if order == 0 {
        Vec::new()
    } else {
        subspace.poles(&pair, order)?
    };
    Ok(PoleEstimate {
        poles,
        selection: OrderSelection {
            method: cfg.order,
            singular_values: sv.to_vec(),
            order,
        },
    })
}

/// A mode set with the diagnostics gathered while producing it.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub modes: ModeSet,
    pub diagnostics: Diagnostics,
}

/// Plain ESPRIT on a real signal with Hankel size `n`.
pub fn esprit(signal: &Signal, n: usize, order: OrderMethod) -> Result<Estimate> {
    esprit_with(signal, &EspritConfig::new(n, order))
}

pub fn esprit_with(signal: &Signal, cfg: &EspritConfig) -> Result<Estimate> {
    if !signal.is_real() {
        return Err(Error::ComplexSignal);
    }
    let est = estimate_signal_poles(signal, cfg)?;
    let (params, mut diag) = poles_to_modes(&est.poles, true, cfg.alpha_ceiling());
    diag.selected_order = Some(est.selection.order);
    diag.singular_values = est.selection.singular_values;
    let modes = if params.is_empty() {
        ModeSet::empty(Source::Plain, signal.sample_rate())
    } else {
        estimate_amplitudes(signal, &params)?
    };
    Ok(Estimate {
        modes,
        diagnostics: diag,
    })
}
