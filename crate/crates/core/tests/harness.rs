use std::sync::Arc;

use num_complex::Complex64;
use sdeiter::growth::IterationKind;
use sdeiter::harness::{
    aggregate, estimate_order, ms_stability_factor, ms_stability_monte_carlo, read_csv, vdp_demo, write_csv,
    Experiment, Moments, PathIncrements, PathStream, StabilityScheme,
};
use sdeiter::problems::{Gbm, ScalarNonlinear, SdeProblem};
use sdeiter::schemes::{scheme_by_name, Convergence, StochasticIncrements};
use sdeiter::solvers::{integrate_final, SolveConfig};

/// Midpoint sum of `f` over `[0, h]` with `n` cells.
fn quadrature(h: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let ds = h / n as f64;
    (0..n).map(|j| f((j as f64 + 0.5) * ds) * ds).sum()
}

/// `E[X_{i₁}⋯X_{iₙ}]` of a centred Gaussian vector with covariance `c`, for
/// `n ≤ 4`.
fn isserlis(c: &[[f64; 2]; 2], idx: &[usize]) -> f64 {
    match idx {
        [] => 1.0,
        [_] | [_, _, _] => 0.0,
        [a, b] => c[*a][*b],
        [a, b, x, y] => c[*a][*b] * c[*x][*y] + c[*a][*x] * c[*b][*y] + c[*a][*y] * c[*b][*x],
        _ => unreachable!(),
    }
}

#[test]
fn increment_moments_match_fine_grid_oracle() {
    let h = 0.25;
    let n = 10_000;
    // I₁₀ = ∫(h − u) dW_u; covariances by the Itô isometry
    let cov = [
        [quadrature(h, n, |_| 1.0), quadrature(h, n, |u| h - u)],
        [quadrature(h, n, |u| h - u), quadrature(h, n, |u| (h - u) * (h - u))],
    ];
    assert!((cov[1][1] - h.powi(3) / 3.0).abs() < 1e-9);
    // I₁₁(s) = ∫₀ˢ W dW and I₁₁₁ = ∫ I₁₁ dW
    let e_i11_sq = quadrature(h, n, |s| s);
    let e_i111_sq = quadrature(h, n, |s| s * s / 2.0);

    let mut checks: Vec<(String, Box<dyn Fn(&StochasticIncrements) -> f64>, f64)> = Vec::new();
    for a in 0..=4usize {
        for b in 0..=(4 - a) {
            if a + b == 0 {
                continue;
            }
            let mut idx = vec![0; a];
            idx.extend(vec![1; b]);
            checks.push((
                format!("dW^{a} I10^{b}"),
                Box::new(move |s: &StochasticIncrements| s.dw.powi(a as i32) * s.i10.powi(b as i32)),
                isserlis(&cov, &idx),
            ));
        }
    }
    checks.push(("I11".into(), Box::new(|s| s.i11), 0.0));
    checks.push(("I11^2".into(), Box::new(|s| s.i11 * s.i11), e_i11_sq));
    checks.push(("I11 dW".into(), Box::new(|s| s.i11 * s.dw), 0.0));
    checks.push(("I11 I10".into(), Box::new(|s| s.i11 * s.i10), 0.0));
    checks.push(("I111".into(), Box::new(|s| s.i111), 0.0));
    checks.push(("I111^2".into(), Box::new(|s| s.i111 * s.i111), e_i111_sq));
    checks.push(("I111 dW".into(), Box::new(|s| s.i111 * s.dw), 0.0));
    checks.push(("I111 I11".into(), Box::new(|s| s.i111 * s.i11), 0.0));

    let mut moments = vec![Moments::default(); checks.len()];
    for path in 0..1_000_000u64 {
        let s = PathStream::new(7, path).next_increments(h);
        for (m, (_, f, _)) in moments.iter_mut().zip(&checks) {
            m.push(f(&s));
        }
    }
    for (m, (name, _, exact)) in moments.iter().zip(&checks) {
        let z = (m.mean - exact).abs() / m.stderr();
        assert!(z < 3.0, "{name}: {} vs {exact} ({z:.2} standard errors)", m.mean);
    }
}

#[test]
fn iterated_integrals_agree_with_ito_sums() {
    let n = 20_000;
    let ds = 1.0 / n as f64;
    for path in 0..5 {
        let fine = PathIncrements::sample(3, path, ds, n).unwrap();
        let (mut w, mut i11, mut i111, mut riemann) = (0.0, 0.0, 0.0, 0.0);
        for s in &fine.steps {
            riemann += (w + 0.5 * s.dw) * ds;
            i111 += i11 * s.dw;
            i11 += w * s.dw;
            w += s.dw;
        }
        let coarse = aggregate(&fine, n).unwrap().steps[0];
        assert!((coarse.dw - w).abs() < 1e-12);
        assert!((coarse.i10 - riemann).abs() < 1e-3, "I10 {} vs {riemann}", coarse.i10);
        assert!((coarse.i11 - i11).abs() < 0.03, "I11 {} vs {i11}", coarse.i11);
        assert!((coarse.i111 - i111).abs() < 0.03, "I111 {} vs {i111}", coarse.i111);
    }
}

#[test]
fn aggregation_of_two_steps() {
    let fine = PathIncrements {
        h: 0.5,
        steps: vec![StochasticIncrements::new(0.5, 1.0, 0.1), StochasticIncrements::new(0.5, -2.0, 0.3)],
        seed: 0,
        path: 0,
    };
    let coarse = aggregate(&fine, 2).unwrap();
    assert_eq!(coarse.h, 1.0);
    let s = coarse.steps[0];
    assert_eq!(s.dw, -1.0);
    // 0.1 + 0.3 + 0.5·(W(0.5) − W(0))
    assert!((s.i10 - 0.9).abs() < 1e-15);
    assert!(aggregate(&fine, 3).is_err());
    assert!(aggregate(&fine, 0).is_err());
}

#[test]
fn stream_is_random_access() {
    let mut a = PathStream::new(11, 4);
    let seq: Vec<_> = (0..6).map(|_| a.next_normals()).collect();
    let mut b = PathStream::new(11, 4);
    for step in [5u64, 0, 3] {
        assert_eq!(b.normals_at(step), seq[step as usize]);
    }
    assert_ne!(PathStream::new(11, 5).next_normals(), seq[0]);
}

fn strong_experiment(scheme: &str, paths: usize, workers: usize) -> Experiment {
    Experiment {
        scheme: scheme_by_name(scheme).unwrap(),
        problem: Arc::new(ScalarNonlinear),
        solve: SolveConfig::fixed(IterationKind::Simple, 1),
        step_sizes: vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
        horizon: 1.0,
        paths,
        seed: 42,
        workers,
        reference: None,
    }
}

#[test]
fn coarse_levels_telescope_bit_identically() {
    let exp = strong_experiment("milstein(0,0)", 10, 1);
    let problem = ScalarNonlinear;
    for path in [0u64, 9] {
        let finals = exp.path_finals(path).unwrap();
        let fine = PathIncrements::sample(42, path, 1.0 / 32.0, 32).unwrap();
        for (level, factor) in [(0, 4), (1, 2)] {
            let coarse = aggregate(&fine, factor).unwrap();
            let direct = integrate_final(&exp.scheme, &problem, problem.initial(), coarse.steps, &exp.solve).unwrap();
            assert_eq!(finals[level].as_ref().unwrap(), &direct);
        }
        let direct = integrate_final(&exp.scheme, &problem, problem.initial(), fine.steps, &exp.solve).unwrap();
        assert_eq!(finals[2].as_ref().unwrap(), &direct);
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let one = strong_experiment("sim", 1500, 1).strong().unwrap();
    let three = strong_experiment("sim", 1500, 3).strong().unwrap();
    assert_eq!(one, three);
}

#[test]
fn standard_error_halves_with_four_times_the_paths() {
    let small = strong_experiment("sim", 1000, 1).strong().unwrap();
    let large = strong_experiment("sim", 4000, 1).strong().unwrap();
    for (a, b) in small.stderrs.iter().zip(&large.stderrs) {
        let ratio = b / a;
        assert!((0.4..0.6).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn stability_factors_for_gbm() {
    let mu = Complex64::from(-3.0);
    let sigma = Complex64::from(3f64.sqrt());
    let r = |s, h| ms_stability_factor(s, mu, sigma, h).unwrap();
    assert!((r(StabilityScheme::Explicit, 1.0) - 7.0).abs() < 1e-12);
    assert!((r(StabilityScheme::Explicit, 0.25) - 0.8125).abs() < 1e-12);
    assert!((r(StabilityScheme::SemiImplicit, 1.0) - 0.25).abs() < 1e-12);
    assert!(ms_stability_factor(StabilityScheme::SemiImplicit, 1.0.into(), sigma, 1.0).is_err());
    assert!(ms_stability_factor(StabilityScheme::Explicit, mu, sigma, 0.0).is_err());
}

#[test]
fn stability_factors_match_simulation() {
    for (scheme, h) in [
        (StabilityScheme::Explicit, 1.0),
        (StabilityScheme::Explicit, 0.25),
        (StabilityScheme::SemiImplicit, 1.0),
    ] {
        let est = ms_stability_monte_carlo(scheme, -3.0, 3f64.sqrt(), h, 100_000, 20, 42, 2).unwrap();
        assert!(est.z_score() < 3.0, "{scheme:?} h={h}: {est:?}");
    }
}

#[test]
fn order_fit_examples() {
    let hs = [0.5, 0.25, 0.125];
    assert!((estimate_order(&hs, &hs.map(|h| 0.3 * h)).unwrap().slope - 1.0).abs() < 1e-14);
    assert!((estimate_order(&hs, &hs.map(|h| 2.0 * h.powf(1.5))).unwrap().slope - 1.5).abs() < 1e-14);
    assert!(estimate_order(&[0.5], &[0.1]).is_err());
    assert!(estimate_order(&hs, &[0.1, -0.1, 0.1]).is_err());
}

#[test]
fn csv_round_trip_is_exact() {
    let result = strong_experiment("sim", 300, 1).strong().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let script = write_csv(&result, &path).unwrap();
    assert!(std::fs::read_to_string(script).unwrap().contains("run.csv"));
    let back = read_csv(&path, Convergence::Strong).unwrap();
    assert_eq!(back, result);
}

#[test]
fn strong_error_needs_exact_solution_or_reference() {
    let exp = Experiment {
        problem: Arc::new(Gbm::new(-1.0, 0.5)),
        ..strong_experiment("sim", 10, 1)
    };
    assert!(exp.strong().is_ok());
    let exp = Experiment {
        problem: Arc::new(sdeiter::problems::Coupled2d),
        ..strong_experiment("sim", 10, 1)
    };
    assert!(exp.strong().is_err());
}

#[test]
fn van_der_pol_demo() {
    let demo = vdp_demo(10.0, 1.0, 0.05, 50.0, 42).unwrap();
    assert!(demo.explicit.exploded);
    assert!(!demo.explicit.completed());
    assert!(demo.semi_implicit.completed());
    assert_eq!(demo.semi_implicit.states.len(), 1001);
    assert_eq!(demo.explicit.times.len(), demo.explicit.states.len());
}
