use proptest::prelude::*;
use qsketch::{
    drop_from_values, project, quantize, rop, sign_template, spe_estimate, DenseRows, DropSketch, GaussianEnsemble,
    OpuConfig, Pairing, Signal, SparseSignal,
};

fn ulps(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

fn signal(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![3 => Just(0.0), 7 => -10.0..10.0f64],
        n,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity_within_eight_ulps(v in signal(24), c in prop_oneof![Just(2.0), Just(-0.5), 0.1..4.0f64], seed in any::<u64>()) {
        let x = Signal::new(v.clone()).unwrap();
        let ens = GaussianEnsemble::new(seed, 24, 40).unwrap();
        let a = rop(&ens, &x).unwrap();
        let b = rop(&ens, &x.scaled(c).unwrap()).unwrap();
        let exact_scale = c.abs().log2().fract() == 0.0;
        for (i, (ra, rb)) in a.values().iter().zip(b.values()).enumerate() {
            let expect = c * c * ra;
            if exact_scale {
                prop_assert_eq!(expect, *rb);
            } else {
                // 8 ulps of the cancellation-free magnitude (Σ|a_j x_j|)²
                let row = qsketch::SensingRows::row(&ens, i);
                let mag: f64 = row.iter().zip(&v).map(|(a, x)| (a * x).abs()).sum();
                let tol = 8.0 * f64::EPSILON * c * c * mag * mag;
                prop_assert!(ulps(expect, *rb) <= 8 || (expect - rb).abs() <= tol, "{expect} vs {rb}");
            }
        }
    }

    #[test]
    fn projection_independent_of_batch_and_row_source(vs in prop::collection::vec(signal(19), 1..6), seed in any::<u64>(), pairs in 1usize..40) {
        let signals: Vec<SparseSignal> = vs.iter().map(|v| SparseSignal::from(&Signal::new(v.clone()).unwrap())).collect();
        let ens = GaussianEnsemble::new(seed, 19, pairs).unwrap();
        let batch = project(&ens, &signals).unwrap();
        let dense = project(&DenseRows::collect(&ens), &signals).unwrap();
        prop_assert_eq!(&batch, &dense);
        for (s, sig) in signals.iter().enumerate() {
            let single = project(&ens, std::slice::from_ref(sig)).unwrap();
            prop_assert_eq!(single.of(0), batch.of(s));
            // sequential dense dot, row by row
            let v = &vs[s];
            for i in 0..ens_rows(&ens) {
                let row = qsketch::SensingRows::row(&ens, i);
                let mut acc = 0.0;
                for (a, b) in row.iter().zip(v) {
                    if *b != 0.0 {
                        acc += a * b;
                    }
                }
                prop_assert_eq!(acc, batch.of(s)[i]);
            }
        }
    }

    #[test]
    fn smaller_ensembles_are_prefixes(v in signal(12), seed in any::<u64>(), small in 1usize..30, extra in 1usize..30) {
        let x = Signal::new(v).unwrap();
        let a = rop(&GaussianEnsemble::new(seed, 12, small).unwrap(), &x).unwrap();
        let b = rop(&GaussianEnsemble::new(seed, 12, small + extra).unwrap(), &x).unwrap();
        prop_assert_eq!(a.values(), &b.values()[..2 * small]);
    }

    #[test]
    fn quantizer_properties(t in 0.0..3.0f64, c in prop_oneof![Just(1.0), 0.01..100.0f64], b in 1u32..16) {
        let cfg = OpuConfig { bit_depth: b, ..OpuConfig::new(c) };
        let delta = cfg.delta();
        let q = quantize(t * c, &cfg).unwrap();
        prop_assert_eq!(quantize(q, &cfg).unwrap(), q);
        prop_assert!(q <= c);
        if t * c <= c {
            prop_assert!(q <= t * c);
            prop_assert!(t * c - q < delta * (1.0 + 1e-12));
            let k = (q / delta).round();
            prop_assert_eq!(k * delta, q);
        } else {
            prop_assert_eq!(q, c);
        }
        let q2 = quantize(t * c * 0.5, &cfg).unwrap();
        prop_assert!(q2 <= q);
    }

    #[test]
    fn spe_is_linear_in_the_sketch(t in prop::collection::vec(-5.0..5.0f64, 8), b1 in prop::collection::vec(-5.0..5.0f64, 8), b2 in prop::collection::vec(-5.0..5.0f64, 8), alpha in -3.0..3.0f64) {
        let tmpl = sign_template(&DropSketch::new(t).unwrap());
        let x1 = DropSketch::new(b1.clone()).unwrap();
        let x2 = DropSketch::new(b2.clone()).unwrap();
        let sum = DropSketch::new(b1.iter().zip(&b2).map(|(a, b)| a + b).collect()).unwrap();
        let lhs = spe_estimate(&tmpl, &sum).unwrap();
        let rhs = spe_estimate(&tmpl, &x1).unwrap() + spe_estimate(&tmpl, &x2).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        let scaled = spe_estimate(&tmpl, &x1.scaled(alpha).unwrap()).unwrap();
        prop_assert!((scaled - alpha * spe_estimate(&tmpl, &x1).unwrap()).abs() <= 1e-12 * (1.0 + scaled.abs()));
    }

    #[test]
    fn halves_pairing_is_consecutive_after_interleaving(vals in prop::collection::vec(0.0..10.0f64, 2..40)) {
        let v: Vec<f64> = vals[..vals.len() / 2 * 2].to_vec();
        let m = v.len() / 2;
        let interleaved: Vec<f64> = (0..m).flat_map(|i| [v[i], v[i + m]]).collect();
        let a = drop_from_values(&interleaved, Pairing::Consecutive).unwrap();
        let b = drop_from_values(&v, Pairing::Halves).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn ens_rows(e: &GaussianEnsemble) -> usize {
    qsketch::SensingRows::row_count(e)
}
