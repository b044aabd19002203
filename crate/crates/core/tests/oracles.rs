//! Monte Carlo oracles: closed-form Gaussian moments checked against the
//! ensemble, the debiased sketch, the sign-product estimate, and the
//! simulated device.

use qsketch::experiments::calibrate::random_binary;
use qsketch::rng::seeded;
use qsketch::{
    calibrate_saturation, drop_correlation, drop_sketch, project, rop, sign_template, spe_estimate, GaussianEnsemble,
    Opu, OpuConfig, Pairing, Signal, SparseSignal, KAPPA,
};
use rand::Rng;
use rand_distr::StandardNormal;

fn unit(n: usize, seed: u64) -> Signal {
    let mut rng = seeded(seed);
    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Signal::new(v).unwrap().normalized().unwrap()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn rop_mean_is_squared_norm() {
    // E (a^T x)^2 = ‖x‖², Var = 2‖x‖⁴
    let x = unit(32, 1).scaled(3.0).unwrap();
    let ens = GaussianEnsemble::new(5, 32, 50_000).unwrap();
    let r = rop(&ens, &x).unwrap();
    let m = mean(r.values());
    let se = (2.0f64).sqrt() * 9.0 / (r.len() as f64).sqrt();
    assert!((m - 9.0).abs() < 4.0 * se, "mean {m}");
}

#[test]
fn debiased_sketch_is_centered_with_variance_four() {
    // B_i = ‖x‖² (g1² − g2²): mean 0, variance 4‖x‖⁴
    let x = unit(16, 2);
    let ens = GaussianEnsemble::new(6, 16, 100_000).unwrap();
    for pairing in [Pairing::Consecutive, Pairing::Halves] {
        let b = rop(&ens, &x).unwrap().debias(pairing);
        let v = b.values();
        let mu = mean(v);
        let var = v.iter().map(|b| (b - mu) * (b - mu)).sum::<f64>() / v.len() as f64;
        assert!(mu.abs() < 4.0 * (4.0 / v.len() as f64).sqrt(), "{pairing:?} mean {mu}");
        assert!((var - 4.0).abs() < 0.15, "{pairing:?} variance {var}");
    }
}

#[test]
fn absolute_debiased_moment_fixes_kappa() {
    // E|g1² − g2²| = 4/π, so κ = π/4 makes the estimate unbiased
    let x = unit(8, 3);
    let ens = GaussianEnsemble::new(7, 8, 200_000).unwrap();
    let b = drop_sketch(&rop(&ens, &x).unwrap());
    let m = mean(&b.values().iter().map(|v| v.abs()).collect::<Vec<_>>());
    assert!((m - 4.0 / std::f64::consts::PI).abs() < 0.01, "{m}");
    assert!((KAPPA * 4.0 / std::f64::consts::PI - 1.0).abs() < 1e-15);
}

#[test]
fn isotropy_small_scale() {
    // E[B(x)B(y)] = 4⟨x, y⟩²
    let n = 32;
    let ens = GaussianEnsemble::new(11, n, 40_000).unwrap();
    let mut hits = 0;
    for p in 0..10 {
        let x = unit(n, 100 + p);
        let y = unit(n, 200 + p);
        let sx = SparseSignal::from(&x);
        let sy = SparseSignal::from(&y);
        let pr = project(&ens, &[sx, sy]).unwrap();
        let bx = drop_sketch(&pr.rop(0).unwrap());
        let by = drop_sketch(&pr.rop(1).unwrap());
        let truth = x.dot(&y).unwrap().powi(2);
        if (drop_correlation(&bx, &by).unwrap() - truth).abs() <= 0.08 {
            hits += 1;
        }
    }
    assert!(hits >= 9, "{hits}/10");
}

#[test]
fn isotropy_self_correlation() {
    // ⟨x, x⟩² = 1 for unit x
    let x = unit(24, 9);
    let ens = GaussianEnsemble::new(12, 24, 50_000).unwrap();
    let b = drop_sketch(&rop(&ens, &x).unwrap());
    let c = drop_correlation(&b, &b).unwrap();
    assert!((c - 1.0).abs() < 0.05, "{c}");
}

#[test]
fn spe_is_unbiased_for_unit_pairs() {
    let n = 64;
    let trials = 40;
    let mut err = 0.0;
    for t in 0..trials {
        let u = unit(n, 300 + t);
        let x = unit(n, 400 + t);
        let ens = GaussianEnsemble::new(t, n, 4000).unwrap();
        let pr = project(&ens, &[SparseSignal::from(&u), SparseSignal::from(&x)]).unwrap();
        let tu = sign_template(&drop_sketch(&pr.rop(0).unwrap()));
        let bx = drop_sketch(&pr.rop(1).unwrap());
        err += spe_estimate(&tu, &bx).unwrap() - u.dot(&x).unwrap().powi(2);
    }
    // per-trial sd is about 0.02 at m = 4000
    assert!((err / trials as f64).abs() < 0.01, "{}", err / trials as f64);
}

#[test]
fn spe_of_self_is_one() {
    let u = unit(50, 21);
    let ens = GaussianEnsemble::new(3, 50, 20_000).unwrap();
    let b = drop_sketch(&rop(&ens, &u).unwrap());
    let est = spe_estimate(&sign_template(&b), &b).unwrap();
    assert!((est - 1.0).abs() < 0.03, "{est}");
}

#[test]
fn opu_error_budget() {
    // n = 1024, half the pixels lit, C at 1% saturation: mean |y − ideal| <= 5δ
    let xs = random_binary(1024, 0.5, 10, 77).unwrap();
    let ens = GaussianEnsemble::new(4, 1024, 500).unwrap();
    let cal = calibrate_saturation(&xs, &ens, 0.01).unwrap();
    assert!(cal.measured_fraction <= 0.01);
    let cfg = OpuConfig {
        noise_seed: 8,
        ..OpuConfig::new(cal.saturation)
    };
    let opu = Opu::new(ens, cfg).unwrap();
    let measured = opu.measure_batch(&xs, 0).unwrap();
    let mut total = 0.0;
    let mut count = 0;
    for (x, y) in xs.iter().zip(&measured) {
        let ideal = rop(&ens, &x.to_signal()).unwrap();
        for (a, b) in ideal.values().iter().zip(y.sketch.values()) {
            total += (a - b).abs();
            count += 1;
        }
    }
    assert_eq!(count, 10_000);
    let mean_err = total / count as f64;
    assert!(mean_err <= 5.0 * cfg.delta(), "{} δ", mean_err / cfg.delta());
}

#[test]
fn calibration_hits_target_on_fresh_inputs() {
    let train = random_binary(256, 0.4, 40, 1).unwrap();
    let fresh = random_binary(256, 0.4, 40, 2).unwrap();
    let ens = GaussianEnsemble::new(9, 256, 1000).unwrap();
    let cal = calibrate_saturation(&train, &ens, 0.05).unwrap();
    let opu = Opu::new(ens, OpuConfig::new(cal.saturation)).unwrap();
    let frac = mean(
        &opu.measure_batch(&fresh, 0)
            .unwrap()
            .iter()
            .map(|m| m.saturation_fraction())
            .collect::<Vec<_>>(),
    );
    // noise and sampling move the held-out rate, not its order of magnitude
    assert!(frac > 0.025 && frac < 0.09, "{frac}");
}

#[test]
fn opu_sketch_tracks_ideal_spe() {
    let xs = random_binary(512, 0.5, 2, 5).unwrap();
    let ens = GaussianEnsemble::new(10, 512, 4000).unwrap();
    let cal = calibrate_saturation(&xs, &ens, 0.01).unwrap();
    let opu = Opu::new(ens, OpuConfig::new(cal.saturation)).unwrap();
    let u = xs[0].to_signal().normalized().unwrap();
    let x = xs[1].to_signal();
    let t = sign_template(&opu.drop_sketch(&xs[0], 0).unwrap());
    let est = spe_estimate(&t, &opu.drop_sketch(&xs[1], 1).unwrap()).unwrap();
    let truth = u.dot(&x).unwrap().powi(2);
    assert!((est / truth - 1.0).abs() < 0.15, "{est} vs {truth}");
}
