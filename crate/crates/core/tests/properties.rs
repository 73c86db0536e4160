use std::sync::Arc;

use brm_core::bd::{bd_rate, RdCurve, RdPoint};
use brm_core::brm::{
    argmin_relative, search_binary, search_loglinear, search_loglinear_with, RefitStrategy,
    SearchOptions, TargetSpec, DEFAULT_BINARY_ITERS, DEFAULT_LOGLINEAR_ITERS,
};
use brm_core::codec::{self, CodecModel, GainVector};
use brm_core::rate::SyntheticLogLinearCurve;
use brm_core::{Image, RateCurve};
use proptest::prelude::*;

fn in_range_target(curve: &SyntheticLogLinearCurve, tol: f64, u: f64) -> f64 {
    let lo = (curve.intercept() + curve.slope() * curve.beta_min().ln()).exp() / (1.0 - tol) * 1.01;
    let hi = (curve.intercept() + curve.slope() * curve.beta_max().ln()).exp() / (1.0 + tol) / 1.01;
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

proptest! {
    #[test]
    fn argmin_ignores_common_scale(
        defaults in prop::collection::vec(0.01f64..2.0, 1..8),
        target in 0.01f64..2.0,
        k in 0.05f64..20.0,
    ) {
        let scaled: Vec<f64> = defaults.iter().map(|d| d * k).collect();
        prop_assert_eq!(argmin_relative(&defaults, target), argmin_relative(&scaled, target * k));
    }

    #[test]
    fn loglinear_hits_exact_lines_in_one_step(
        slope in 0.5f64..3.0,
        intercept in -4.0f64..0.0,
        u in 0.0f64..1.0,
        tol in 0.001f64..0.2,
    ) {
        let curve = SyntheticLogLinearCurve::new(slope, intercept, 0.1, 10.0).unwrap();
        let t = TargetSpec::new(in_range_target(&curve, tol, u), tol).unwrap();
        for refit in [RefitStrategy::Anchored, RefitStrategy::Bracketing] {
            let opts = SearchOptions { refit, ..SearchOptions::loglinear() };
            let trace = search_loglinear_with(&curve, &t, &opts, None).unwrap();
            prop_assert!(trace.matched());
            prop_assert_eq!(trace.evaluations(), 3);
        }
    }

    #[test]
    fn probes_stay_inside_the_bracket(
        slope in 0.5f64..3.0,
        intercept in -4.0f64..0.0,
        amplitude in 0.0f64..0.05,
        frequency in 0.0f64..3.0,
        target in 0.001f64..50.0,
        tol in 0.001f64..0.2,
    ) {
        prop_assume!(amplitude * frequency < slope);
        let curve = SyntheticLogLinearCurve::new(slope, intercept, 0.05, 20.0)
            .unwrap()
            .with_perturbation(amplitude, frequency)
            .unwrap();
        let t = TargetSpec::new(target, tol).unwrap();
        let traces = [
            search_binary(&curve, &t, DEFAULT_BINARY_ITERS).unwrap(),
            search_loglinear(&curve, &t, DEFAULT_LOGLINEAR_ITERS).unwrap(),
        ];
        for trace in traces {
            prop_assert!(trace.probes.iter().all(|p| (0.05..=20.0).contains(&p.beta)));
            prop_assert_eq!(trace.cost.entropy_evals as usize, trace.evaluations());
            let best = trace.best_probe();
            let closest = trace
                .probes
                .iter()
                .all(|p| t.relative_error(best.bpp) <= t.relative_error(p.bpp));
            prop_assert!(closest || trace.matched());
        }
    }

    #[test]
    fn bd_rate_is_antisymmetric(
        bpps in prop::collection::vec(0.02f64..2.0, 4..12),
        offsets in prop::collection::vec(-1.0f64..1.0, 12),
        factor in 0.5f64..2.0,
    ) {
        let mut bpps = bpps;
        bpps.sort_by(f64::total_cmp);
        bpps.dedup_by(|a, b| (*a / *b) < 1.25);
        prop_assume!(bpps.len() >= 4);
        let curve = |scale: f64, shift: f64| {
            RdCurve::new(
                bpps.iter()
                    .enumerate()
                    .map(|(i, &b)| RdPoint {
                        bpp: b * scale,
                        quality_db: 30.0 + 4.0 * b.log2() + shift * offsets[i],
                    })
                    .collect(),
            )
            .unwrap()
        };
        let a = curve(1.0, 0.0);
        let b = curve(factor, 0.2);
        let ab = bd_rate(&a, &b).unwrap().bd_rate_percent / 100.0;
        let ba = bd_rate(&b, &a).unwrap().bd_rate_percent / 100.0;
        prop_assert!(((1.0 + ab) * (1.0 + ba) - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cached_latent_is_transparent(
        w in 8usize..48,
        h in 8usize..48,
        channels in prop::sample::select(vec![1usize, 3]),
        seed in 0u32..1000,
        delta in 0.1f64..4.0,
    ) {
        let image = Image::from_fn(w, h, channels, |x, y, c| {
            ((x as u32 * 7 + y as u32 * 13 + c as u32 * 29 + seed) % 251) as u8
        })
        .unwrap();
        let model = CodecModel::new(1, 0.01, GainVector::jpeg_scaled(1.0 / 64.0).unwrap(), 0.1, 4.0)
            .unwrap();
        let fresh = codec::evaluate(&image, &model, delta, None).unwrap();
        let cached = codec::evaluate(&image, &model, delta, Some(Arc::clone(&fresh.latent))).unwrap();
        prop_assert_eq!(fresh.point.bpp.to_bits(), cached.point.bpp.to_bits());
        prop_assert_eq!(fresh.point.mse.to_bits(), cached.point.mse.to_bits());
        prop_assert_eq!(fresh.cost.encoder_runs, cached.cost.encoder_runs + 1);
    }
}
