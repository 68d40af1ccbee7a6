//! Mean-square stability of the Euler schemes on the linear test equation.

use std::str::FromStr;

use num_complex::Complex64;

use super::experiment::{run_chunked, Moments};
use super::increments::PathStream;
use super::HarnessError;
use crate::growth::IterationKind;
use crate::linalg::Vector;
use crate::problems::Gbm;
use crate::schemes::{scheme_by_name, SchemeSpec};
use crate::solvers::{solve_step, SolveConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityScheme {
    Explicit,
    SemiImplicit,
}

impl StabilityScheme {
    pub fn name(self) -> &'static str {
        match self {
            StabilityScheme::Explicit => "euler-explicit",
            StabilityScheme::SemiImplicit => "euler-semi",
        }
    }

    fn scheme(self) -> SchemeSpec {
        scheme_by_name(self.name()).expect("built-in scheme")
    }
}

impl FromStr for StabilityScheme {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euler-explicit" | "explicit" => Ok(StabilityScheme::Explicit),
            "euler-semi" | "semi" | "semi-implicit" => Ok(StabilityScheme::SemiImplicit),
            other => Err(HarnessError::Config(format!("no stability formula for scheme {other}"))),
        }
    }
}

/// `R` with `E|Y_{n+1}|² = R·E|Y_n|²` for `dX = µX dt + σX dW`.
pub fn ms_stability_factor(
    scheme: StabilityScheme,
    mu: Complex64,
    sigma: Complex64,
    h: f64,
) -> Result<f64, HarnessError> {
    if !(h > 0.0) {
        return Err(HarnessError::Config(format!("step size must be positive, got {h}")));
    }
    match scheme {
        StabilityScheme::Explicit => Ok((1.0 + h * mu).norm_sqr() + h * sigma.norm_sqr()),
        StabilityScheme::SemiImplicit => {
            let denom = (1.0 - h * mu).norm_sqr();
            if denom == 0.0 {
                return Err(HarnessError::Config("1 − hµ vanishes".into()));
            }
            Ok((1.0 + h * sigma.norm_sqr()) / denom)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityEstimate {
    pub exact: f64,
    /// Mean of the per-step ratio `|Y_{n+1}|²/|Y_n|²`.
    pub estimate: f64,
    pub stderr: f64,
}

impl StabilityEstimate {
    /// Distance to the closed form in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.estimate - self.exact).abs() / self.stderr
    }
}

/// Simulates `paths` GBM paths of `steps` steps with the given Euler scheme
/// and averages the per-step growth of `|Y|²`.
#[allow(clippy::too_many_arguments)]
pub fn ms_stability_monte_carlo(
    scheme: StabilityScheme,
    mu: f64,
    sigma: f64,
    h: f64,
    paths: usize,
    steps: usize,
    seed: u64,
    workers: usize,
) -> Result<StabilityEstimate, HarnessError> {
    let exact = ms_stability_factor(scheme, mu.into(), sigma.into(), h)?;
    if paths == 0 || steps == 0 {
        return Err(HarnessError::Config("need at least one path and one step".into()));
    }
    let spec = scheme.scheme();
    let problem = Gbm::new(mu, sigma);
    // one Newton sweep solves the linear implicit equation exactly
    let cfg = SolveConfig::fixed(IterationKind::FullNewton, 1);
    let partials = run_chunked(paths, workers, |range| {
        let mut m = Moments::default();
        for path in range {
            let mut stream = PathStream::new(seed, path as u64);
            let mut y = Vector::scalar(1.0);
            for _ in 0..steps {
                let inc = stream.next_increments(h);
                let next = solve_step(&spec, &problem, y, &inc, &cfg).map_err(HarnessError::from)?;
                m.push(next[0] * next[0] / (y[0] * y[0]));
                y = next;
            }
        }
        Ok::<_, HarnessError>(m)
    })?;
    let mut total = Moments::default();
    for p in partials {
        total.merge(&p?);
    }
    Ok(StabilityEstimate {
        exact,
        estimate: total.mean,
        stderr: total.stderr(),
    })
}
