//! Time-domain refinement of mode frequencies and dampings.
//!
//! The cost is `J = 1/2 ||h - h_hat||^2` for the real model
//! `h_hat(t) = sum_m e^{-alpha_m t} (gamma_s sin(omega_m t) + gamma_c cos(omega_m t))`.
//! Frequencies and dampings move inside a box around their initial values,
//! with frequencies kept in ascending order; amplitudes are refitted by least
//! squares after every accepted step.
//!
//! The descent is a projected Levenberg-Marquardt iteration on frequencies,
//! dampings and amplitudes jointly. A trial point is accepted only if it
//! lowers `J`, so the cost history is non-increasing.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::linalg::{self, has_sine};
use crate::mode::{Mode, ModeSet, Source};
use crate::subband::BandPlan;
use crate::{Error, Result, Signal};

/// Rows of the Jacobian formed at a time when accumulating normal equations.
const CHUNK_ROWS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptConfig {
    /// Frequency window half-width in Hz.
    pub delta_omega_hz: f64,
    /// Damping window half-width relative to the initial damping.
    pub delta_alpha: f64,
    /// Cost evaluations allowed per band, trial points included.
    pub max_fevals: usize,
    /// Absolute cost below which the iteration stops.
    pub cost_tol: f64,
    /// Largest parameter change (rad/sample or nepers/sample) below which the
    /// iteration stops.
    pub step_tol: f64,
    /// Accepted steps allowed per band.
    pub max_band_iters: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            delta_omega_hz: 0.5,
            delta_alpha: 0.1,
            max_fevals: 500,
            cost_tol: 1e-4,
            step_tol: 1e-9,
            max_band_iters: 100,
        }
    }
}

impl OptConfig {
    pub fn new(delta_omega_hz: f64, delta_alpha: f64) -> Self {
        Self {
            delta_omega_hz,
            delta_alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.into()));
        if !(self.delta_omega_hz >= 0.0 && self.delta_omega_hz.is_finite()) {
            return bad("frequency window must be finite and non-negative");
        }
        if !(self.delta_alpha >= 0.0 && self.delta_alpha.is_finite()) {
            return bad("damping window must be finite and non-negative");
        }
        if !(self.cost_tol > 0.0 && self.step_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_fevals == 0 || self.max_band_iters == 0 {
            return bad("evaluation and iteration budgets must be positive");
        }
        Ok(())
    }
}

/// Dampings and frequencies, packed as `[alpha; omega]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Theta {
    pub alphas: Vec<f64>,
    pub omegas: Vec<f64>,
}

impl Theta {
    pub fn new(alphas: Vec<f64>, omegas: Vec<f64>) -> Result<Self> {
        if alphas.len() != omegas.len() {
            return Err(Error::LengthMismatch(alphas.len(), omegas.len()));
        }
        Ok(Self { alphas, omegas })
    }

    pub fn from_modes(modes: &[Mode]) -> Self {
        Self {
            alphas: modes.iter().map(|m| m.alpha()).collect(),
            omegas: modes.iter().map(|m| m.omega()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn packed(&self) -> Vec<f64> {
        let mut v = self.alphas.clone();
        v.extend_from_slice(&self.omegas);
        v
    }

    pub fn unpack(packed: &[f64]) -> Result<Self> {
        if packed.len() % 2 != 0 {
            return Err(Error::InvalidParameter("packed length must be even".into()));
        }
        let m = packed.len() / 2;
        Ok(Self {
            alphas: packed[..m].to_vec(),
            omegas: packed[m..].to_vec(),
        })
    }

    /// `(omega, alpha)` pairs in the order used by the least-squares helpers.
    pub fn parameters(&self) -> Vec<(f64, f64)> {
        self.omegas.iter().copied().zip(self.alphas.iter().copied()).collect()
    }
}

/// Box `[lower, upper]` around an initial point.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Theta,
    pub upper: Theta,
}

impl Bounds {
    /// Frequencies move by at most `delta_omega_hz`, dampings by
    /// `delta_alpha * alpha_0`. DC and Nyquist modes keep their frequency.
    pub fn new(init: &Theta, cfg: &OptConfig, sample_rate: f64) -> Self {
        let dw = 2.0 * PI * cfg.delta_omega_hz / sample_rate;
        let mut lower = init.clone();
        let mut upper = init.clone();
        for m in 0..init.len() {
            let (w, a) = (init.omegas[m], init.alphas[m]);
            if has_sine(w) {
                lower.omegas[m] = (w - dw).max(0.0);
                upper.omegas[m] = (w + dw).min(PI);
            }
            let da = cfg.delta_alpha * a.abs();
            lower.alphas[m] = (a - da).max(0.0);
            upper.alphas[m] = a + da;
        }
        Self { lower, upper }
    }

    /// Euclidean projection onto the box intersected with ascending
    /// frequencies: isotonic regression of the frequencies, then clipping.
    /// This is exact because the frequency bounds are themselves ascending.
    pub fn project(&self, theta: &mut Theta) {
        isotonic(&mut theta.omegas);
        for m in 0..theta.len() {
            theta.omegas[m] = theta.omegas[m].clamp(self.lower.omegas[m], self.upper.omegas[m]);
            theta.alphas[m] = theta.alphas[m].clamp(self.lower.alphas[m], self.upper.alphas[m]);
        }
    }

    pub fn contains(&self, theta: &Theta) -> bool {
        (0..theta.len()).all(|m| {
            (self.lower.omegas[m]..=self.upper.omegas[m]).contains(&theta.omegas[m])
                && (self.lower.alphas[m]..=self.upper.alphas[m]).contains(&theta.alphas[m])
        }) && theta.omegas.windows(2).all(|w| w[0] <= w[1])
    }

    /// Packed indices whose interval has positive width.
    fn free(&self) -> Vec<usize> {
        let (lo, hi) = (self.lower.packed(), self.upper.packed());
        (0..lo.len()).filter(|&i| hi[i] > lo[i]).collect()
    }
}

/// Pool-adjacent-violators: least-squares non-decreasing fit, in place.
fn isotonic(x: &mut [f64]) {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(x.len());
    for &v in x.iter() {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a <= b {
                break;
            }
            blocks.pop();
            let n = na + nb;
            *blocks.last_mut().unwrap() = ((a * na as f64 + b * nb as f64) / n as f64, n);
        }
    }
    let mut i = 0;
    for (v, n) in blocks {
        x[i..i + n].fill(v);
        i += n;
    }
}

fn check_dims(theta: &Theta, gammas: &[(f64, f64)]) -> Result<()> {
    if theta.alphas.len() != theta.omegas.len() {
        return Err(Error::LengthMismatch(theta.alphas.len(), theta.omegas.len()));
    }
    if gammas.len() != theta.len() {
        return Err(Error::LengthMismatch(gammas.len(), theta.len()));
    }
    Ok(())
}

fn model_into(theta: &Theta, gammas: &[(f64, f64)], out: &mut [f64]) {
    out.fill(0.0);
    for (m, &(gs, gc)) in gammas.iter().enumerate() {
        let (w, a) = (theta.omegas[m], theta.alphas[m]);
        for (t, y) in out.iter_mut().enumerate() {
            let tf = t as f64;
            let (s, c) = (w * tf).sin_cos();
            *y += (-a * tf).exp() * (gs * s + gc * c);
        }
    }
}

/// Samples `0..len` of the model.
pub fn model(theta: &Theta, gammas: &[(f64, f64)], len: usize) -> Result<Vec<f64>> {
    check_dims(theta, gammas)?;
    let mut out = vec![0.0; len];
    model_into(theta, gammas, &mut out);
    Ok(out)
}

pub fn model_signal(
    theta: &Theta,
    gammas: &[(f64, f64)],
    len: usize,
    sample_rate: f64,
) -> Result<Signal> {
    Signal::from_real(&model(theta, gammas, len)?, sample_rate)
}

fn half_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

pub fn cost(theta: &Theta, gammas: &[(f64, f64)], h: &[f64]) -> Result<f64> {
    Ok(half_sq_dist(h, &model(theta, gammas, h.len())?))
}

/// `T x 2M` matrix of model derivatives, columns `[d/d alpha; d/d omega]`.
pub fn jacobian(theta: &Theta, gammas: &[(f64, f64)], len: usize) -> Result<Mat<f64>> {
    check_dims(theta, gammas)?;
    let m = theta.len();
    let mut j = Mat::<f64>::zeros(len, 2 * m);
    for (k, &(gs, gc)) in gammas.iter().enumerate() {
        let (w, a) = (theta.omegas[k], theta.alphas[k]);
        for t in 0..len {
            let tf = t as f64;
            let (s, c) = (w * tf).sin_cos();
            let te = tf * (-a * tf).exp();
            j[(t, k)] = -te * (gs * s + gc * c);
            j[(t, m + k)] = te * (gs * c - gc * s);
        }
    }
    Ok(j)
}

/// `dJ/d theta` in packed order.
pub fn gradient(theta: &Theta, gammas: &[(f64, f64)], h: &[f64]) -> Result<Vec<f64>> {
    let r: Vec<f64> = model(theta, gammas, h.len())?
        .iter()
        .zip(h)
        .map(|(y, x)| y - x)
        .collect();
    let j = jacobian(theta, gammas, h.len())?;
    Ok(linalg::transpose_times(j.as_ref(), &r))
}

/// Least-squares `(gamma_s, gamma_c)` for fixed frequencies and dampings.
pub fn refit_amplitudes(theta: &Theta, h: &[f64]) -> Result<Vec<(f64, f64)>> {
    linalg::fit_amplitudes(h, &theta.parameters())
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    CostTolerance,
    StepTolerance,
    MaxEvaluations,
    MaxIterations,
    /// Nothing to optimize: every parameter window is empty.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Cost at the start and after every accepted step.
    pub costs: Vec<f64>,
    /// Frequencies and dampings matching `costs`.
    pub iterates: Vec<Theta>,
    pub fevals: usize,
    pub stop: StopReason,
}

/// Layout of the LM parameter vector: free theta entries, then one sine
/// amplitude per mode that has one, then one cosine amplitude per mode.
struct Layout {
    free: Vec<usize>,
    sine: Vec<usize>,
    modes: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.free.len() + self.sine.len() + self.modes
    }

    /// Normal equations `J^T J` and `J^T r` with `r = h_hat - h`.
    fn normal_equations(
        &self,
        theta: &Theta,
        gammas: &[(f64, f64)],
        h: &[f64],
        h_hat: &[f64],
    ) -> (Mat<f64>, Mat<f64>) {
        let p = self.len();
        let m = self.modes;
        let (nf, ns) = (self.free.len(), self.sine.len());
        let mut ata = Mat::<f64>::zeros(p, p);
        let mut atr = Mat::<f64>::zeros(p, 1);
        let mut start = 0;
        while start < h.len() {
            let rows = CHUNK_ROWS.min(h.len() - start);
            let mut jc = Mat::<f64>::zeros(rows, p);
            let mut rc = Mat::<f64>::zeros(rows, 1);
            for i in 0..rows {
                rc[(i, 0)] = h_hat[start + i] - h[start + i];
            }
            for k in 0..m {
                let (w, a) = (theta.omegas[k], theta.alphas[k]);
                let (gs, gc) = gammas[k];
                let free_a = self.free.iter().position(|&i| i == k);
                let free_w = self.free.iter().position(|&i| i == m + k);
                let sine_col = self.sine.iter().position(|&i| i == k);
                for i in 0..rows {
                    let tf = (start + i) as f64;
                    let (s, c) = (w * tf).sin_cos();
                    let e = (-a * tf).exp();
                    if let Some(col) = free_a {
                        jc[(i, col)] = -tf * e * (gs * s + gc * c);
                    }
                    if let Some(col) = free_w {
                        jc[(i, col)] = tf * e * (gs * c - gc * s);
                    }
                    if let Some(col) = sine_col {
                        jc[(i, nf + col)] = e * s;
                    }
                    jc[(i, nf + ns + k)] = e * c;
                }
            }
            ata += jc.transpose() * &jc;
            atr += jc.transpose() * &rc;
            start += rows;
        }
        (ata, atr)
    }

    /// Applies the step `delta` and returns the unprojected point.
    fn apply(&self, theta: &Theta, gammas: &[(f64, f64)], delta: &Mat<f64>) -> (Theta, Vec<(f64, f64)>) {
        let mut packed = theta.packed();
        for (col, &i) in self.free.iter().enumerate() {
            packed[i] += delta[(col, 0)];
        }
        let nf = self.free.len();
        let mut g = gammas.to_vec();
        for (col, &k) in self.sine.iter().enumerate() {
            g[k].0 += delta[(nf + col, 0)];
        }
        for (k, gk) in g.iter_mut().enumerate() {
            gk.1 += delta[(nf + self.sine.len() + k, 0)];
        }
        (Theta::unpack(&packed).expect("even length"), g)
    }
}

struct Evaluator<'a> {
    h: &'a [f64],
    buf: Vec<f64>,
    fevals: usize,
}

impl Evaluator<'_> {
    fn cost(&mut self, theta: &Theta, gammas: &[(f64, f64)]) -> f64 {
        self.fevals += 1;
        model_into(theta, gammas, &mut self.buf);
        half_sq_dist(self.h, &self.buf)
    }
}

/// Damped Gauss-Newton step `(A + lambda D) x = -g`, `D = diag(A)` floored.
fn lm_step(ata: &Mat<f64>, atr: &Mat<f64>, lambda: f64) -> Option<Mat<f64>> {
    let p = ata.nrows();
    let dmax = (0..p).map(|i| ata[(i, i)]).fold(0.0f64, f64::max);
    if !(dmax > 0.0) {
        return None;
    }
    let mut a = ata.clone();
    for i in 0..p {
        a[(i, i)] += lambda * ata[(i, i)].max(dmax * 1e-14);
    }
    let llt = a.llt(Side::Lower).ok()?;
    let mut x = -atr.clone();
    llt.solve_in_place(&mut x);
    (0..p).all(|i| x[(i, 0)].is_finite()).then_some(x)
}

fn max_change(a: &Theta, b: &Theta) -> f64 {
    a.packed()
        .iter()
        .zip(b.packed())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Refines `init` against the real signal `h`.
pub fn optimize_band(h: &Signal, init: &ModeSet, cfg: &OptConfig) -> Result<ModeSet> {
    optimize_band_traced(h, init, cfg).map(|(modes, _)| modes)
}

/// [`optimize_band`] that also returns the cost history.
pub fn optimize_band_traced(h: &Signal, init: &ModeSet, cfg: &OptConfig) -> Result<(ModeSet, Trace)> {
    cfg.validate()?;
    if !h.is_real() {
        return Err(Error::ComplexSignal);
    }
    if init.is_empty() {
        return Err(Error::InvalidParameter("no modes to optimize".into()));
    }
    let fs = h.sample_rate();
    let hr = h.real_part();
    let theta0 = Theta::from_modes(init.modes());
    let bounds = Bounds::new(&theta0, cfg, fs);
    let layout = Layout {
        free: bounds.free(),
        sine: (0..theta0.len()).filter(|&k| has_sine(theta0.omegas[k])).collect(),
        modes: theta0.len(),
    };
    if hr.len() < layout.len() {
        return Err(Error::InsufficientSamples {
            required: layout.len(),
            available: hr.len(),
        });
    }
    let mut ev = Evaluator {
        h: &hr,
        buf: vec![0.0; hr.len()],
        fevals: 0,
    };

    let mut theta = theta0;
    let mut gammas: Vec<(f64, f64)> = init.iter().map(|m| (m.gamma_s(), m.gamma_c())).collect();
    let mut j = ev.cost(&theta, &gammas);
    if !j.is_finite() {
        return Err(Error::NonFiniteCost);
    }
    if let Ok(g) = refit_amplitudes(&theta, &hr) {
        let jr = ev.cost(&theta, &g);
        if jr < j {
            (gammas, j) = (g, jr);
        }
    }
    let mut costs = vec![j];
    let mut iterates = vec![theta.clone()];
    let mut lambda = 1e-3;
    let stop = loop {
        if j <= cfg.cost_tol {
            break StopReason::CostTolerance;
        }
        if layout.free.is_empty() {
            break StopReason::Fixed;
        }
        if costs.len() > cfg.max_band_iters {
            break StopReason::MaxIterations;
        }
        if ev.fevals >= cfg.max_fevals {
            break StopReason::MaxEvaluations;
        }
        model_into(&theta, &gammas, &mut ev.buf);
        let (ata, atr) = layout.normal_equations(&theta, &gammas, &hr, &ev.buf);
        let mut accepted = None;
        let mut last_step = f64::INFINITY;
        while ev.fevals < cfg.max_fevals && lambda < 1e20 {
            let Some(delta) = lm_step(&ata, &atr, lambda) else {
                lambda *= 4.0;
                continue;
            };
            let (mut trial, trial_g) = layout.apply(&theta, &gammas, &delta);
            bounds.project(&mut trial);
            last_step = max_change(&trial, &theta);
            let jt = ev.cost(&trial, &trial_g);
            if jt < j {
                lambda = (lambda / 3.0).max(1e-12);
                accepted = Some((trial, trial_g, jt));
                break;
            }
            lambda *= 4.0;
            if last_step <= cfg.step_tol {
                break;
            }
        }
        let Some((trial, mut trial_g, mut jt)) = accepted else {
            break if ev.fevals >= cfg.max_fevals {
                StopReason::MaxEvaluations
            } else {
                StopReason::StepTolerance
            };
        };
        if ev.fevals < cfg.max_fevals {
            if let Ok(g) = refit_amplitudes(&trial, &hr) {
                let jr = ev.cost(&trial, &g);
                if jr < jt {
                    (trial_g, jt) = (g, jr);
                }
            }
        }
        debug_assert!(jt <= j);
        theta = trial;
        gammas = trial_g;
        j = jt;
        costs.push(j);
        iterates.push(theta.clone());
        if last_step <= cfg.step_tol {
            break StopReason::StepTolerance;
        }
    };

    let modes = to_modes(&theta, &gammas)?;
    Ok((
        ModeSet::new(modes, Source::Optimized, fs)?,
        Trace {
            costs,
            iterates,
            fevals: ev.fevals,
            stop,
        },
    ))
}

fn to_modes(theta: &Theta, gammas: &[(f64, f64)]) -> Result<Vec<Mode>> {
    (0..theta.len())
        .map(|k| Mode::new(theta.omegas[k], theta.alphas[k], gammas[k].0, gammas[k].1))
        .collect()
}

/// Outcome of one band in [`optimize_all`].
#[derive(Debug, Clone, PartialEq)]
pub struct BandOptimization {
    /// Band index, or `None` for a whole-signal run.
    pub band: Option<usize>,
    pub modes: usize,
    pub outcome: core::result::Result<Trace, Error>,
}

/// Optimizes `modes` band by band, then refits all amplitudes jointly on
/// the full signal.
///
/// Each mode belongs to the band owning its frequency. A band is optimized
/// against the signal minus the current model of every mode outside it. A
/// band that fails keeps its initial modes. Without a plan the whole mode
/// set is one band.
pub fn optimize_all(
    h: &Signal,
    modes: &ModeSet,
    plan: Option<&BandPlan>,
    cfg: &OptConfig,
) -> Result<(ModeSet, Vec<BandOptimization>)> {
    cfg.validate()?;
    if !h.is_real() {
        return Err(Error::ComplexSignal);
    }
    let fs = h.sample_rate();
    if modes.is_empty() {
        return Ok((ModeSet::empty(Source::Optimized, fs), Vec::new()));
    }
    let hr = h.real_part();
    let mut current: Vec<Mode> = modes.modes().to_vec();
    let groups: Vec<(Option<usize>, Vec<usize>)> = match plan {
        None => vec![(None, (0..current.len()).collect())],
        Some(plan) => {
            let mut groups: Vec<(Option<usize>, Vec<usize>)> =
                (0..plan.len()).map(|b| (Some(b), Vec::new())).collect();
            for (k, m) in current.iter().enumerate() {
                let b = plan.owner_of(m.frequency_hz(fs)).unwrap_or(plan.len() - 1);
                groups[b].1.push(k);
            }
            groups.retain(|(_, members)| !members.is_empty());
            groups
        }
    };

    let mut full = vec![0.0; hr.len()];
    if groups.len() > 1 {
        // Amplitudes of the other bands must be current before subtracting.
        let theta = Theta::from_modes(&current);
        if let Ok(g) = refit_amplitudes(&theta, &hr) {
            for (m, (gs, gc)) in current.iter_mut().zip(g) {
                *m = m.with_amplitudes(gs, gc);
            }
        }
        let gammas: Vec<(f64, f64)> = current.iter().map(|m| (m.gamma_s(), m.gamma_c())).collect();
        model_into(&Theta::from_modes(&current), &gammas, &mut full);
    }

    let mut reports = Vec::with_capacity(groups.len());
    for (band, members) in groups {
        let band_modes: Vec<Mode> = members.iter().map(|&k| current[k]).collect();
        let mut own = vec![0.0; hr.len()];
        let target = if members.len() == current.len() {
            hr.clone()
        } else {
            let gammas: Vec<(f64, f64)> = band_modes.iter().map(|m| (m.gamma_s(), m.gamma_c())).collect();
            model_into(&Theta::from_modes(&band_modes), &gammas, &mut own);
            hr.iter().zip(&full).zip(&own).map(|((x, f), o)| x - (f - o)).collect()
        };
        let outcome = Signal::from_real(&target, fs)
            .and_then(|sig| {
                let init = ModeSet::new(band_modes.clone(), modes.source(), fs)?;
                optimize_band_traced(&sig, &init, cfg)
            })
            .map(|(optimized, trace)| {
                // ModeSet sorting keeps the ascending order of `members`.
                for (&k, m) in members.iter().zip(optimized.modes()) {
                    current[k] = *m;
                }
                if members.len() < full.len() {
                    let gammas: Vec<(f64, f64)> =
                        optimized.iter().map(|m| (m.gamma_s(), m.gamma_c())).collect();
                    let mut new_own = vec![0.0; hr.len()];
                    model_into(&Theta::from_modes(optimized.modes()), &gammas, &mut new_own);
                    for ((f, o), n) in full.iter_mut().zip(&own).zip(&new_own) {
                        *f += n - o;
                    }
                }
                trace
            });
        reports.push(BandOptimization {
            band,
            modes: members.len(),
            outcome,
        });
    }

    let theta = Theta::from_modes(&current);
    let gammas: Vec<(f64, f64)> = current.iter().map(|m| (m.gamma_s(), m.gamma_c())).collect();
    let before = cost(&theta, &gammas, &hr)?;
    if let Ok(g) = refit_amplitudes(&theta, &hr) {
        if cost(&theta, &g, &hr)? <= before {
            current = to_modes(&theta, &g)?;
        }
    }
    Ok((ModeSet::new(current, Source::Optimized, fs)?, reports))
}
