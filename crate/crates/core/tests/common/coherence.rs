//! Symbolic weight tables against the numeric scheme evaluators.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdeiter::algebra::{Catalog, WeightMap};
use sdeiter::linalg::Vector;
use sdeiter::problems::{Coupled2d, Gbm, ScalarNonlinear, SdeProblem, VanDerPol};
use sdeiter::schemes::{bseries_sum, scheme_by_name, SchemeSpec, StochasticIncrements, TABLE_ORDER};

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    lo + (hi - lo) * u
}

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vector {
    let v: Vec<f64> = (0..d).map(|_| uniform(rng, -scale, scale)).collect();
    Vector::from_slice(&v)
}

pub fn random_inc(rng: &mut ChaCha8Rng, h: f64) -> StochasticIncrements {
    let dw = uniform(rng, -2.0, 2.0) * h.sqrt();
    let i10 = uniform(rng, -1.0, 1.0) * h.powf(1.5);
    StochasticIncrements::new(h, dw, i10)
}

/// Every shipped scheme, with a few parameter choices for the families.
pub fn schemes() -> Vec<SchemeSpec> {
    [
        "euler-explicit",
        "euler-semi",
        "euler(0.5)",
        "sim",
        "milstein(0.5,0.5)",
        "milstein(0,1)",
        "milstein(0,0)",
        "im",
        "sikp",
        "siw",
        "fit",
    ]
    .iter()
    .map(|n| scheme_by_name(n).unwrap())
    .collect()
}

pub fn problems() -> Vec<Box<dyn SdeProblem>> {
    vec![
        Box::new(Gbm::new(-3.0, 3f64.sqrt())),
        Box::new(VanDerPol::new(10.0, 1.0)),
        Box::new(ScalarNonlinear),
        Box::new(Coupled2d),
    ]
}

pub fn rel_diff(a: Vector, b: Vector) -> f64 {
    (a - b).max_abs() / a.max_abs().max(b.max_abs()).max(1.0)
}

/// Largest relative difference between the B-series of the symbolic tables
/// and the numeric evaluators over random states and increments.
pub fn symbolic_vs_numeric(seed: u64, samples: usize) -> Result<f64, String> {
    let catalog = Catalog::new(TABLE_ORDER, 2);
    let zero_start = WeightMap::zero(TABLE_ORDER, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for s in schemes() {
        for p in problems() {
            for _ in 0..samples {
                let y = random_vec(&mut rng, p.dim(), 1.5);
                let inc = random_inc(&mut rng, 0.2);
                let ex = bseries_sum(p.as_ref(), &s.symbolic_ex, &catalog, y, &inc).map_err(|e| e.to_string())?;
                worst = worst.max(rel_diff(ex, s.eval_explicit_part(p.as_ref(), y, &inc)));
                let im = bseries_sum(p.as_ref(), &s.symbolic_im, &catalog, y, &inc).map_err(|e| e.to_string())?;
                worst = worst.max(rel_diff(im, s.eval_implicit_part(p.as_ref(), y, &inc)));
                let none = bseries_sum(p.as_ref(), &zero_start, &catalog, y, &inc).map_err(|e| e.to_string())?;
                if none.max_abs() != 0.0 {
                    return Err(format!("zero weights give {none:?}"));
                }
            }
        }
    }
    Ok(worst)
}

/// Largest relative deviation of the implicit Jacobians from central
/// differences with step `1e-6`.
pub fn jacobian_vs_differences(seed: u64, samples: usize) -> f64 {
    let eps = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for s in schemes() {
        for p in problems() {
            let d = p.dim();
            for _ in 0..samples {
                let y = random_vec(&mut rng, d, 1.5);
                let inc = random_inc(&mut rng, 0.2);
                let jac = s.implicit_jacobian(p.as_ref(), y, &inc);
                for j in 0..d {
                    let e = Vector::unit(d, j);
                    let fd = (1.0 / (2.0 * eps))
                        * (s.eval_implicit_part(p.as_ref(), y.axpy(eps, e), &inc)
                            - s.eval_implicit_part(p.as_ref(), y.axpy(-eps, e), &inc));
                    let col = Vector::from_slice(&(0..d).map(|i| jac.get(i, j)).collect::<Vec<_>>());
                    let scale = col.max_abs().max(fd.max_abs()).max(1e-3);
                    worst = worst.max((col - fd).max_abs() / scale);
                }
            }
        }
    }
    worst
}
