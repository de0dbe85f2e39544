//! Cross-module property tests.

use std::f64::consts::PI;

use modal_core::esprit::{self, build_hankel, estimate_amplitudes, estimate_poles, EspritConfig, OrderMethod};
use modal_core::optimize::{self, Bounds, OptConfig, Theta};
use modal_core::subband::{filter, fz_esprit, plan_bark, FilterSpec};
use modal_core::synth::render;
use modal_core::warp::{self, bark_rho, WarpConfig};
use modal_core::{generate, Mode, ModeSet, Partial, Signal, Source, SyntheticSpec, C64};
use proptest::prelude::*;

/// Well-separated modes: `count` frequencies at least `gap` rad/sample apart.
fn separated(count: usize, gap: f64) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..0.02, 0.3f64..1.0), count).prop_map(move |v| {
        let span = PI - 0.2 - gap * count as f64;
        let mut offsets: Vec<f64> = v.iter().map(|x| x.0 * span).collect();
        offsets.sort_by(f64::total_cmp);
        offsets
            .iter()
            .enumerate()
            .zip(&v)
            .map(|((k, o), x)| (0.1 + o + gap * k as f64, x.1, x.2))
            .collect()
    })
}

fn spec_from(modes: &[(f64, f64, f64)], fs: f64) -> SyntheticSpec {
    SyntheticSpec::new(
        modes
            .iter()
            .map(|&(w, a, g)| Partial::tone(w * fs / (2.0 * PI), a, g))
            .collect(),
    )
}

fn sorted_poles(mut p: Vec<C64>) -> Vec<C64> {
    p.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn esprit_recovers_generated_modes(
        modes in (1usize..=4).prop_flat_map(|count| separated(count, 1.5 * 2.0 * PI / 128.0))
    ) {
        let (n, t, count) = (64, 128, modes.len());
        let spec = spec_from(&modes, 1.0);
        let s = generate(&spec, t, 1.0).unwrap();
        let est = esprit::esprit(&s, n, OrderMethod::KneePoint).unwrap();
        prop_assert_eq!(est.modes.len(), count);
        for (m, &(w, a, _)) in est.modes.iter().zip(&modes) {
            prop_assert!((m.omega() - w).abs() <= 1e-6 * w);
            prop_assert!((m.alpha() - a).abs() <= 1e-6 * a.max(1e-3));
        }
    }

    #[test]
    fn generate_is_linear(a in separated(3, 0.1), b in separated(2, 0.1)) {
        let fs = 1000.0;
        let (sa, sb) = (spec_from(&a, fs), spec_from(&b, fs));
        let mut both = sa.clone();
        both.partials.extend(sb.partials.clone());
        let x = generate(&both, 200, fs).unwrap().real_part();
        let ya = generate(&sa, 200, fs).unwrap().real_part();
        let yb = generate(&sb, 200, fs).unwrap().real_part();
        for t in 0..200 {
            prop_assert!((x[t] - ya[t] - yb[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn pencil_is_invariant_to_hankel_size(modes in separated(3, 0.15), n2 in 12usize..40) {
        let s = generate(&spec_from(&modes, 1.0), 80, 1.0).unwrap();
        let p1 = sorted_poles(estimate_poles(&build_hankel(&s, 10).unwrap(), 6).unwrap());
        let p2 = sorted_poles(estimate_poles(&build_hankel(&s, n2).unwrap(), 6).unwrap());
        for (a, b) in p1.iter().zip(&p2) {
            prop_assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn real_signal_poles_come_in_conjugate_pairs(modes in separated(3, 0.15)) {
        let s = generate(&spec_from(&modes, 1.0), 64, 1.0).unwrap();
        let poles = estimate_poles(&build_hankel(&s, 32).unwrap(), 6).unwrap();
        for p in &poles {
            prop_assert!(poles.iter().any(|q| (q - p.conj()).norm() < 1e-8));
        }
    }

    #[test]
    fn amplitude_fit_never_exceeds_signal(
        x in prop::collection::vec(-1.0f64..1.0, 40..80),
        w in 0.05f64..3.0,
        a in 0.0f64..0.1,
    ) {
        let s = Signal::from_real(&x, 1.0).unwrap();
        let fit = estimate_amplitudes(&s, &[(w, a)]).unwrap();
        let y = render(&fit, x.len()).unwrap().real_part();
        let resid: f64 = x.iter().zip(&y).map(|(p, q)| (p - q) * (p - q)).sum();
        let energy: f64 = x.iter().map(|p| p * p).sum();
        prop_assert!(resid <= energy * (1.0 + 1e-12));
    }

    #[test]
    fn unit_circle_is_preserved(th in -PI..PI, rho in -0.95f64..0.95) {
        let p = warp::unwarp_pole(C64::from_polar(1.0, th), rho);
        prop_assert!((p.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merge_partitions_at_cutoff(
        ws in prop::collection::vec(0.0f64..PI, 0..8),
        ps in prop::collection::vec(0.0f64..PI, 0..8),
        wc in 0.1f64..3.0,
    ) {
        let set = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            ModeSet::new(v.iter().map(|&w| Mode::new(w, 1e-3, 0.0, 1.0).unwrap()).collect(), Source::Plain, 1.0).unwrap()
        };
        let (warped, plain) = (set(&ws), set(&ps));
        let merged = warp::merge_modes(&warped, &plain, wc).unwrap();
        for m in merged.iter() {
            if m.omega() < wc {
                prop_assert!(warped.iter().any(|x| x == m));
            } else {
                prop_assert!(plain.iter().any(|x| x == m));
            }
        }
        let expected = warped.iter().filter(|m| m.omega() < wc).count()
            + plain.iter().filter(|m| m.omega() >= wc).count();
        prop_assert_eq!(merged.len(), expected);
    }

    #[test]
    fn render_matches_generate(modes in separated(4, 0.05)) {
        let fs = 8000.0;
        let spec = spec_from(&modes, fs);
        let x = generate(&spec, 512, fs).unwrap().real_part();
        let y = render(&spec.modes(fs).unwrap(), 512).unwrap().real_part();
        for t in 0..512 {
            prop_assert!((x[t] - y[t]).abs() < 1e-10);
        }
    }

    #[test]
    fn passband_tone_survives_decimation(
        order in 2usize..10,
        frac in 0.05f64..1.0,
        r in 2usize..12,
    ) {
        let fs = 48000.0;
        let cutoff = 0.4 * fs / (2.0 * r as f64);
        let f = frac * cutoff;
        let spec = FilterSpec::butterworth(order, cutoff);
        let x: Vec<f64> = (0..48000).map(|t| (2.0 * PI * f * t as f64 / fs).cos()).collect();
        let d = filter::lowpass_decimate_settled(&Signal::from_real(&x, fs).unwrap(), &spec, r, 1e-10).unwrap();
        let y = d.signal.real_part();
        let tail = &y[d.settle.max(y.len() / 2)..];
        let peak = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Butterworth gain is at most 1 and at least -3 dB up to the cutoff.
        prop_assert!(peak <= 1.0 + 1e-6 && peak >= 10f64.powf(-3.02 / 20.0), "peak {}", peak);
    }

    #[test]
    fn optimizer_output_is_feasible_and_refit(
        dhz in -1.0f64..1.0,
        da in -0.2f64..0.2,
        win in 0.1f64..1.0,
    ) {
        let fs = 8000.0;
        let spec = SyntheticSpec::new(vec![Partial::tone(500.0, 1e-3, 1.0), Partial::tone(520.0, 2e-3, 0.5)]);
        let s = generate(&spec, 1024, fs).unwrap();
        let init: Vec<Mode> = spec
            .modes(fs)
            .unwrap()
            .iter()
            .map(|m| Mode::new(m.omega() + 2.0 * PI * dhz / fs, m.alpha() * (1.0 + da), 0.0, 0.5).unwrap())
            .collect();
        let init = ModeSet::new(init, Source::Plain, fs).unwrap();
        let cfg = OptConfig::new(win, 0.1);
        let (out, trace) = optimize::optimize_band_traced(&s, &init, &cfg).unwrap();
        let bounds = Bounds::new(&Theta::from_modes(init.modes()), &cfg, fs);
        let theta = Theta::from_modes(out.modes());
        prop_assert!(bounds.contains(&theta));
        prop_assert!(trace.costs.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(out.modes().windows(2).all(|w| w[0].omega() <= w[1].omega()));
        let h = s.real_part();
        let (basis, _) = modal_core::linalg::modal_basis(&theta.parameters(), h.len());
        let gammas: Vec<(f64, f64)> = out.iter().map(|m| (m.gamma_s(), m.gamma_c())).collect();
        let y = optimize::model(&theta, &gammas, h.len()).unwrap();
        let r: Vec<f64> = h.iter().zip(&y).map(|(a, b)| a - b).collect();
        let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in modal_core::linalg::transpose_times(basis.as_ref(), &r) {
            prop_assert!(v.abs() < 1e-8 * norm);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn subband_single_mode(f in 200.0f64..18000.0) {
        let fs = 48000.0;
        let plan = plan_bark(20, fs, bark_rho(fs), 1.2, 8).unwrap();
        let s = generate(&SyntheticSpec::new(vec![Partial::tone(f, 2e-4, 1.0)]), 24000, fs).unwrap();
        let est = fz_esprit(&s, &plan, &EspritConfig::new(256, OrderMethod::KneePoint)).unwrap();
        prop_assert!(est.modes.len() <= plan.total_budget());
        prop_assert!(est.modes.iter().any(|m| (m.omega() - 2.0 * PI * f / fs).abs() <= 2.0 * PI * 0.01 / fs));
        for m in est.modes.iter() {
            let b = plan.owner_of(m.frequency_hz(fs)).unwrap();
            let (lo, hi) = plan.ownership(b);
            prop_assert!(m.frequency_hz(fs) >= lo && m.frequency_hz(fs) < hi);
        }
    }

    #[test]
    fn fw_merge_partition(f_low in 80.0f64..2000.0, f_high in 7000.0f64..15000.0) {
        let fs = 44100.0;
        let spec = SyntheticSpec::new(vec![Partial::tone(f_low, 1e-4, 1.0), Partial::tone(f_high, 3e-4, 0.5)]);
        let s = generate(&spec, 8192, fs).unwrap();
        let cfg = WarpConfig::bark(fs).unwrap();
        let (est, branches) = warp::fw_esprit_with(&s, &cfg, &EspritConfig::new(256, OrderMethod::KneePoint)).unwrap();
        for m in est.modes.iter() {
            let source = if m.omega() < cfg.omega_c { &branches.warped } else { &branches.plain };
            prop_assert!(source.iter().any(|x| x.omega() == m.omega() && x.alpha() == m.alpha()));
        }
    }
}
