//! Monte Carlo strong and weak error estimation on coupled grids.

use std::sync::Arc;

use rayon::prelude::*;

use super::increments::{aggregate_into, PathStream};
use super::report::{estimate_order, Fit};
use super::HarnessError;
use crate::growth::IterationKind;
use crate::linalg::Vector;
use crate::problems::SdeProblem;
use crate::schemes::{scheme_by_name, Convergence, SchemeSpec, StochasticIncrements};
use crate::solvers::{integrate_final, SolveConfig, Stop};

/// Paths per unit of work. Fixed, so the reduction order does not depend on
/// the number of workers.
pub const CHUNK: usize = 512;

/// Largest tolerated fraction of aborted paths per step size.
pub const MAX_ABORT_FRACTION: f64 = 1e-3;

/// How the strong error target is obtained when there is no exact solution.
#[derive(Clone, Debug)]
pub struct Reference {
    pub scheme: SchemeSpec,
    pub solve: SolveConfig,
    /// Reference steps per step of the finest level.
    pub refine: usize,
}

impl Reference {
    /// SIKP with two simple iterations on a grid `refine` times finer.
    pub fn sikp_two_simple(refine: usize) -> Self {
        Reference {
            scheme: scheme_by_name("sikp").expect("built-in scheme"),
            solve: SolveConfig::fixed(IterationKind::Simple, 2),
            refine,
        }
    }
}

#[derive(Clone)]
pub struct Experiment {
    pub scheme: SchemeSpec,
    pub problem: Arc<dyn SdeProblem>,
    pub solve: SolveConfig,
    /// Step sizes; `horizon / h` must be an integer dividing the finest count.
    pub step_sizes: Vec<f64>,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub workers: usize,
    pub reference: Option<Reference>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub convergence: Convergence,
    pub scheme: String,
    pub method: String,
    pub iters: String,
    pub step_sizes: Vec<f64>,
    pub errors: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Aborted paths per step size.
    pub aborted: Vec<usize>,
    pub paths: usize,
    pub seed: u64,
    pub fit: Fit,
}

impl ExperimentResult {
    pub fn slope(&self) -> f64 {
        self.fit.slope
    }
}

/// Running mean and variance (Welford), mergeable in a fixed order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Splits `total` items into [`CHUNK`]-sized pieces, runs `work` on each in a
/// pool of `workers` threads and returns the results in chunk order.
pub fn run_chunked<T, F>(total: usize, workers: usize, work: F) -> Result<Vec<T>, HarnessError>
where
    T: Send,
    F: Fn(std::ops::Range<usize>) -> T + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    let chunks = total.div_ceil(CHUNK);
    Ok(pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| work(c * CHUNK..((c + 1) * CHUNK).min(total)))
            .collect()
    }))
}

fn steps_for(horizon: f64, h: f64) -> Result<usize, HarnessError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(HarnessError::Config(format!("invalid step size {h}")));
    }
    let n = (horizon / h).round();
    if n < 1.0 || ((n * h - horizon) / horizon).abs() > 1e-9 {
        return Err(HarnessError::Config(format!(
            "step size {h} does not divide the horizon {horizon}"
        )));
    }
    Ok(n as usize)
}

/// Per-path buffers reused across paths.
struct Buffers {
    fine: Vec<StochasticIncrements>,
    coarse: Vec<StochasticIncrements>,
}

/// The validated grid layout of an experiment.
#[derive(Clone, Debug)]
struct Layout {
    fine_steps: usize,
    fine_h: f64,
    /// Fine steps per step of each level.
    factors: Vec<usize>,
}

impl Experiment {
    fn layout(&self) -> Result<Layout, HarnessError> {
        if !(self.horizon > 0.0) {
            return Err(HarnessError::Config("horizon must be positive".into()));
        }
        if self.step_sizes.len() < 2 {
            return Err(HarnessError::Config("need at least two step sizes".into()));
        }
        if self.paths == 0 {
            return Err(HarnessError::Config("need at least one path".into()));
        }
        self.solve.validate()?;
        self.scheme.check_problem(self.problem.as_ref())?;
        let counts = self
            .step_sizes
            .iter()
            .map(|&h| steps_for(self.horizon, h))
            .collect::<Result<Vec<_>, _>>()?;
        let finest = *counts.iter().max().expect("nonempty");
        if let Some(n) = counts.iter().find(|&&n| finest % n != 0) {
            return Err(HarnessError::Config(format!(
                "{n} steps do not divide the finest grid of {finest}"
            )));
        }
        let refine = match &self.reference {
            Some(r) => {
                if r.refine == 0 {
                    return Err(HarnessError::Config("reference refinement must be positive".into()));
                }
                r.solve.validate()?;
                r.scheme.check_problem(self.problem.as_ref())?;
                r.refine
            }
            None => 1,
        };
        let fine_steps = finest * refine;
        Ok(Layout {
            fine_steps,
            fine_h: self.horizon / fine_steps as f64,
            factors: counts.iter().map(|n| fine_steps / n).collect(),
        })
    }

    fn iters_label(&self) -> String {
        match self.solve.stop {
            Stop::Fixed(k) => k.to_string(),
            Stop::Converge { .. } => "conv".into(),
        }
    }

    /// Samples the fine increments of `path` into `bufs.fine`.
    fn fill(&self, layout: &Layout, path: u64, bufs: &mut Buffers) {
        let mut stream = PathStream::new(self.seed, path);
        bufs.fine.clear();
        for _ in 0..layout.fine_steps {
            bufs.fine.push(stream.next_increments(layout.fine_h));
        }
    }

    fn level_final(&self, layout: &Layout, level: usize, bufs: &mut Buffers) -> Option<Vector> {
        let factor = layout.factors[level];
        let x0 = self.problem.initial();
        let p = self.problem.as_ref();
        let res = if factor == 1 {
            integrate_final(&self.scheme, p, x0, bufs.fine.iter().copied(), &self.solve)
        } else {
            aggregate_into(&bufs.fine, factor, &mut bufs.coarse).expect("validated layout");
            integrate_final(&self.scheme, p, x0, bufs.coarse.iter().copied(), &self.solve)
        };
        res.ok()
    }

    /// Final states at every level for one path; `None` marks an abort.
    pub fn path_finals(&self, path: u64) -> Result<Vec<Option<Vector>>, HarnessError> {
        let layout = self.layout()?;
        let mut bufs = Buffers {
            fine: Vec::new(),
            coarse: Vec::new(),
        };
        self.fill(&layout, path, &mut bufs);
        Ok((0..layout.factors.len())
            .map(|l| self.level_final(&layout, l, &mut bufs))
            .collect())
    }

    /// The reference always runs on the full fine grid.
    fn strong_target(&self, bufs: &Buffers) -> Option<Vector> {
        match &self.reference {
            None => {
                let w: f64 = bufs.fine.iter().map(|s| s.dw).sum();
                self.problem.exact_path(self.horizon, w)
            }
            Some(r) => {
                integrate_final(
                    &r.scheme,
                    self.problem.as_ref(),
                    self.problem.initial(),
                    bufs.fine.iter().copied(),
                    &r.solve,
                )
                .ok()
            }
        }
    }

    fn run<F>(&self, convergence: Convergence, sample: F) -> Result<ExperimentResult, HarnessError>
    where
        F: Fn(&Layout, &mut Buffers) -> Option<Vec<Option<f64>>> + Sync,
    {
        let layout = self.layout()?;
        let levels = layout.factors.len();
        let partials = run_chunked(self.paths, self.workers, |range| {
            let mut bufs = Buffers {
                fine: Vec::with_capacity(layout.fine_steps),
                coarse: Vec::with_capacity(layout.fine_steps),
            };
            let mut moments = vec![Moments::default(); levels];
            let mut aborted = vec![0usize; levels];
            for path in range {
                self.fill(&layout, path as u64, &mut bufs);
                match sample(&layout, &mut bufs) {
                    None => aborted.iter_mut().for_each(|a| *a += 1),
                    Some(values) => {
                        for (l, v) in values.into_iter().enumerate() {
                            match v {
                                Some(v) => moments[l].push(v),
                                None => aborted[l] += 1,
                            }
                        }
                    }
                }
            }
            (moments, aborted)
        })?;
        let mut moments = vec![Moments::default(); levels];
        let mut aborted = vec![0usize; levels];
        for (m, a) in &partials {
            for l in 0..levels {
                moments[l].merge(&m[l]);
                aborted[l] += a[l];
            }
        }
        for l in 0..levels {
            if aborted[l] as f64 > MAX_ABORT_FRACTION * self.paths as f64 {
                return Err(HarnessError::TooManyAborts {
                    h: self.step_sizes[l],
                    aborted: aborted[l],
                    paths: self.paths,
                });
            }
        }
        let (errors, stderrs): (Vec<f64>, Vec<f64>) = match convergence {
            Convergence::Strong => moments.iter().map(|m| (m.mean, m.stderr())).unzip(),
            Convergence::Weak => {
                let exact = self
                    .problem
                    .exact_expectation(self.horizon)
                    .ok_or_else(|| HarnessError::MissingWeakFunctional(self.problem.name().into()))?;
                moments.iter().map(|m| ((m.mean - exact).abs(), m.stderr())).unzip()
            }
        };
        let fit = estimate_order(&self.step_sizes, &errors)?;
        Ok(ExperimentResult {
            convergence,
            scheme: self.scheme.name.clone(),
            method: self.solve.kind.name().into(),
            iters: self.iters_label(),
            step_sizes: self.step_sizes.clone(),
            errors,
            stderrs,
            aborted,
            paths: self.paths,
            seed: self.seed,
            fit,
        })
    }

    /// Mean of `‖Y_N − X(T)‖` per step size, against the exact solution or
    /// the reference solution on the finest coupled grid.
    pub fn strong(&self) -> Result<ExperimentResult, HarnessError> {
        if self.reference.is_none() && self.problem.exact_path(0.0, 0.0).is_none() {
            return Err(HarnessError::MissingExactSolution(self.problem.name().into()));
        }
        let levels = self.step_sizes.len();
        self.run(Convergence::Strong, |layout, bufs| {
            let target = self.strong_target(bufs)?;
            Some(
                (0..levels)
                    .map(|l| self.level_final(layout, l, bufs).map(|y| (y - target).norm()))
                    .collect(),
            )
        })
    }

    /// `|mean f(Y_N) − E f(X(T))|` per step size.
    pub fn weak(&self) -> Result<ExperimentResult, HarnessError> {
        let p = self.problem.as_ref();
        if p.weak_functional(p.initial()).is_none() || p.exact_expectation(self.horizon).is_none() {
            return Err(HarnessError::MissingWeakFunctional(p.name().into()));
        }
        let levels = self.step_sizes.len();
        self.run(Convergence::Weak, |layout, bufs| {
            Some(
                (0..levels)
                    .map(|l| {
                        self.level_final(layout, l, bufs)
                            .and_then(|y| p.weak_functional(y))
                    })
                    .collect(),
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..40].iter().for_each(|&x| a.push(x));
        xs[40..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - all.mean).abs() < 1e-14);
        assert!((a.variance() - all.variance()).abs() < 1e-13);
        assert_eq!(a.n, 100);
    }

    #[test]
    fn step_counts() {
        assert_eq!(steps_for(1.0, 0.125).unwrap(), 8);
        assert!(steps_for(1.0, 0.3).is_err());
        assert!(steps_for(1.0, 0.0).is_err());
        assert_eq!(steps_for(1.0, 2f64.powi(-9) / 10.0).unwrap(), 5120);
    }
}
