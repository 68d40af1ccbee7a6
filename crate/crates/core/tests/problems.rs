use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdeiter::linalg::Vector;
use sdeiter::problems::{by_name, weak_polynomial, Coupled2d, Gbm, ScalarNonlinear, SdeProblem, VanDerPol};

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    lo + (hi - lo) * u
}

fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vector {
    let v: Vec<f64> = (0..d).map(|_| uniform(rng, -scale, scale)).collect();
    Vector::from_slice(&v)
}

fn close(a: Vector, b: Vector, rel: f64) -> bool {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    (a - b).max_abs() <= rel * scale
}

fn problems() -> Vec<Box<dyn SdeProblem>> {
    vec![
        Box::new(Gbm::new(-3.0, 3f64.sqrt())),
        Box::new(VanDerPol::new(10.0, 1.0)),
        Box::new(ScalarNonlinear),
        Box::new(Coupled2d),
    ]
}

#[test]
fn derivatives_match_central_differences() {
    let eps = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in problems() {
        let d = p.dim();
        for _ in 0..20 {
            let x = random_vec(&mut rng, d, 2.0);
            let u = random_vec(&mut rng, d, 1.0);
            let v = random_vec(&mut rng, d, 1.0);
            let w = random_vec(&mut rng, d, 1.0);
            for l in 0..2 {
                let fd1 = (1.0 / (2.0 * eps)) * (p.g(l, x.axpy(eps, u)) - p.g(l, x.axpy(-eps, u)));
                assert!(close(p.dg(l, x, u), fd1, 1e-5), "{} g{l}' at {x:?}", p.name());
                let fd2 = (1.0 / (2.0 * eps))
                    * (p.dg(l, x.axpy(eps, v), u) - p.dg(l, x.axpy(-eps, v), u));
                assert!(close(p.d2g(l, x, u, v), fd2, 1e-5), "{} g{l}'' at {x:?}", p.name());
                let fd3 = (1.0 / (2.0 * eps))
                    * (p.d2g(l, x.axpy(eps, w), u, v) - p.d2g(l, x.axpy(-eps, w), u, v));
                assert!(close(p.d3g(l, x, u, v, w), fd3, 1e-5), "{} g{l}''' at {x:?}", p.name());
            }
        }
    }
}

#[test]
fn higher_derivatives_are_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for p in problems() {
        let d = p.dim();
        let x = random_vec(&mut rng, d, 2.0);
        let u = random_vec(&mut rng, d, 1.0);
        let v = random_vec(&mut rng, d, 1.0);
        let w = random_vec(&mut rng, d, 1.0);
        for l in 0..2 {
            assert!(close(p.d2g(l, x, u, v), p.d2g(l, x, v, u), 1e-14));
            assert!(close(p.d3g(l, x, u, v, w), p.d3g(l, x, w, u, v), 1e-14));
            assert!(close(p.d3g(l, x, u, v, w), p.d3g(l, x, v, w, u), 1e-14));
        }
    }
}

#[test]
fn weak_functional_undoes_sinh() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let p = ScalarNonlinear;
    for _ in 0..20 {
        let z = uniform(&mut rng, -3.0, 3.0);
        let f = p.weak_functional(Vector::scalar(z.sinh())).unwrap();
        assert!((f - weak_polynomial(z)).abs() <= 1e-12 * weak_polynomial(z).abs().max(1.0));
    }
}

#[test]
fn lookup_by_name() {
    for name in ["gbm", "vdp", "nonlinear1d", "nonlinear2d"] {
        assert_eq!(by_name(name).unwrap().name(), name);
    }
}
