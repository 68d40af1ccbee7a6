//! Brownian increments: counter-based per-path streams and coupling of
//! step sizes by aggregation.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HarnessError;
use crate::schemes::StochasticIncrements;

/// 32-bit words consumed per step: two `u64` draws.
const WORDS_PER_STEP: u128 = 4;

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// The random source of one path. Step `n` always reads the same block of
/// the ChaCha stream keyed by `(seed, path)`, so increments can be produced
/// in any order.
#[derive(Clone, Debug)]
pub struct PathStream {
    rng: ChaCha8Rng,
    seed: u64,
    path: u64,
}

impl PathStream {
    pub fn new(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        PathStream { rng, seed, path }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> u64 {
        self.path
    }

    /// Positions the stream at the start of step `step`.
    pub fn seek(&mut self, step: u64) {
        self.rng.set_word_pos(u128::from(step) * WORDS_PER_STEP);
    }

    /// Two independent standard normals (Box–Muller) from the next step's
    /// block.
    pub fn next_normals(&mut self) -> (f64, f64) {
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = ((self.rng.next_u64() >> 11) as f64 + 1.0) * INV_2_53;
        let u2 = (self.rng.next_u64() >> 11) as f64 * INV_2_53;
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }

    /// The normals of step `step`, independent of the stream position.
    pub fn normals_at(&mut self, step: u64) -> (f64, f64) {
        self.seek(step);
        self.next_normals()
    }

    /// Increments of the next step of size `h`.
    pub fn next_increments(&mut self, h: f64) -> StochasticIncrements {
        let (xi1, xi2) = self.next_normals();
        increments_from_normals(h, xi1, xi2)
    }
}

/// `ΔW = √h·ξ₁` and `I₁₀ = h^{3/2}(ξ₁/2 + ξ₂/(2√3))`, so that
/// `Var I₁₀ = h³/3` and `Cov(ΔW, I₁₀) = h²/2`.
pub fn increments_from_normals(h: f64, xi1: f64, xi2: f64) -> StochasticIncrements {
    let sh = h.sqrt();
    let dw = sh * xi1;
    let i10 = h * sh * (0.5 * xi1 + xi2 / (2.0 * 3f64.sqrt()));
    StochasticIncrements::new(h, dw, i10)
}

/// One draw of the increments of a step of size `h`.
pub fn sample_increments(stream: &mut PathStream, h: f64) -> Result<StochasticIncrements, HarnessError> {
    if !(h > 0.0) {
        return Err(HarnessError::Config(format!("step size must be positive, got {h}")));
    }
    Ok(stream.next_increments(h))
}

/// The increments of one path on a uniform grid of step `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathIncrements {
    pub h: f64,
    pub steps: Vec<StochasticIncrements>,
    pub seed: u64,
    pub path: u64,
}

impl PathIncrements {
    /// `n` steps of size `h` from the stream `(seed, path)`.
    pub fn sample(seed: u64, path: u64, h: f64, n: usize) -> Result<Self, HarnessError> {
        let mut stream = PathStream::new(seed, path);
        let mut steps = Vec::with_capacity(n);
        for _ in 0..n {
            steps.push(sample_increments(&mut stream, h)?);
        }
        Ok(PathIncrements { h, steps, seed, path })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `W(T) − W(0)`.
    pub fn total_dw(&self) -> f64 {
        self.steps.iter().map(|s| s.dw).sum()
    }
}

/// Merges `factor` consecutive fine steps into one coarse step.
pub fn aggregate(fine: &PathIncrements, factor: usize) -> Result<PathIncrements, HarnessError> {
    let mut steps = Vec::new();
    aggregate_into(&fine.steps, factor, &mut steps)?;
    Ok(PathIncrements {
        h: fine.h * factor as f64,
        steps,
        seed: fine.seed,
        path: fine.path,
    })
}

/// As [`aggregate`], writing into a reusable buffer.
pub fn aggregate_into(
    fine: &[StochasticIncrements],
    factor: usize,
    out: &mut Vec<StochasticIncrements>,
) -> Result<(), HarnessError> {
    if factor == 0 || !fine.len().is_multiple_of(factor) {
        return Err(HarnessError::Divisibility {
            steps: fine.len(),
            factor,
        });
    }
    out.clear();
    for block in fine.chunks_exact(factor) {
        let mut h = 0.0;
        let mut w = 0.0;
        let mut i10 = 0.0;
        for s in block {
            i10 += s.i10 + s.h * w;
            w += s.dw;
            h += s.h;
        }
        out.push(StochasticIncrements::new(h, w, i10));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_access_matches_sequential() {
        let mut a = PathStream::new(42, 7);
        let seq: Vec<_> = (0..5).map(|_| a.next_normals()).collect();
        let mut b = PathStream::new(42, 7);
        for n in (0..5).rev() {
            assert_eq!(b.normals_at(n as u64), seq[n]);
        }
        let mut other = PathStream::new(42, 8);
        assert_ne!(other.next_normals(), seq[0]);
    }

    #[test]
    fn two_step_aggregation() {
        let h = 0.25;
        let a = StochasticIncrements::new(h, 0.3, 0.01);
        let b = StochasticIncrements::new(h, -0.1, 0.02);
        let mut out = Vec::new();
        aggregate_into(&[a, b], 2, &mut out).unwrap();
        assert_eq!(out[0].h, 0.5);
        assert_eq!(out[0].dw, 0.3 + -0.1);
        assert_eq!(out[0].i10, 0.01 + (0.02 + h * 0.3));
    }

    #[test]
    fn factor_one_is_identity() {
        let fine = PathIncrements::sample(1, 2, 0.125, 8).unwrap();
        let same = aggregate(&fine, 1).unwrap();
        assert_eq!(same, fine);
        assert!(aggregate(&fine, 3).is_err());
        assert!(aggregate(&fine, 0).is_err());
    }

    #[test]
    fn nonpositive_step_rejected() {
        let mut s = PathStream::new(0, 0);
        assert!(sample_increments(&mut s, 0.0).is_err());
        assert!(sample_increments(&mut s, f64::NAN).is_err());
    }
}
