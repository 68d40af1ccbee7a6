//! Solving the implicit one-step equation by simple iteration, modified
//! Newton or full Newton, and integrating whole paths.

use thiserror::Error;

use crate::growth::IterationKind;
use crate::linalg::{Matrix, SingularMatrix, Vector};
use crate::problems::SdeProblem;
use crate::schemes::{SchemeSpec, StochasticIncrements};

/// Any component above this magnitude counts as an explosion.
pub const EXPLOSION_THRESHOLD: f64 = 1e10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("Newton system: {0}")]
    Singular(#[from] SingularMatrix),
    #[error("no convergence after {iters} iterations (last update {update:e})")]
    NoConvergence { iters: usize, update: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stop {
    /// Exactly `k` sweeps from the predictor.
    Fixed(usize),
    /// Until two successive iterates are within `tol` (Euclidean norm).
    Converge { tol: f64, max_iters: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub kind: IterationKind,
    pub stop: Stop,
}

impl SolveConfig {
    pub fn fixed(kind: IterationKind, k: usize) -> Self {
        SolveConfig {
            kind,
            stop: Stop::Fixed(k),
        }
    }

    pub fn converge(kind: IterationKind, tol: f64, max_iters: usize) -> Self {
        SolveConfig {
            kind,
            stop: Stop::Converge { tol, max_iters },
        }
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        match self.stop {
            Stop::Fixed(_) => Ok(()),
            Stop::Converge { tol, .. } if !(tol > 0.0) => Err(SolveError::Config("tol must be positive")),
            Stop::Converge { max_iters: 0, .. } => Err(SolveError::Config("max_iters must be positive")),
            Stop::Converge { .. } => Ok(()),
        }
    }
}

/// One step's iteration state: the explicit part is evaluated once, and the
/// modified Newton matrix `I − J(Yₙ)` is frozen on first use.
pub struct Step<'a, P: ?Sized> {
    scheme: &'a SchemeSpec,
    problem: &'a P,
    inc: &'a StochasticIncrements,
    start: Vector,
    explicit: Vector,
    frozen: Option<Matrix>,
}

impl<'a, P: SdeProblem + ?Sized> Step<'a, P> {
    pub fn new(
        scheme: &'a SchemeSpec,
        problem: &'a P,
        y: Vector,
        inc: &'a StochasticIncrements,
    ) -> Self {
        Step {
            scheme,
            problem,
            inc,
            start: y,
            explicit: scheme.eval_explicit_part(problem, y, inc),
            frozen: None,
        }
    }

    pub fn explicit_part(&self) -> Vector {
        self.explicit
    }

    fn newton_matrix(&self, at: Vector) -> Matrix {
        let d = at.len();
        Matrix::identity(d) - self.scheme.implicit_jacobian(self.problem, at, self.inc)
    }

    /// `Y_{k+1}` from `Y_k`.
    pub fn sweep(&mut self, kind: IterationKind, yk: Vector) -> Result<Vector, SolveError> {
        let fixed_point = self.explicit + self.scheme.eval_implicit_part(self.problem, yk, self.inc);
        match kind {
            IterationKind::Simple => Ok(fixed_point),
            IterationKind::ModifiedNewton => {
                let m = match self.frozen {
                    Some(m) => m,
                    None => {
                        let m = self.newton_matrix(self.start);
                        self.frozen = Some(m);
                        m
                    }
                };
                Ok(yk + m.solve(fixed_point - yk)?)
            }
            IterationKind::FullNewton => {
                let m = self.newton_matrix(yk);
                Ok(yk + m.solve(fixed_point - yk)?)
            }
        }
    }
}

/// Solves one step from the trivial predictor `Y_{n+1,0} = Yₙ`.
pub fn solve_step<P: SdeProblem + ?Sized>(
    scheme: &SchemeSpec,
    problem: &P,
    y: Vector,
    inc: &StochasticIncrements,
    cfg: &SolveConfig,
) -> Result<Vector, SolveError> {
    let mut step = Step::new(scheme, problem, y, inc);
    if scheme.is_explicit() {
        // every sweep returns the explicit part
        return Ok(match cfg.stop {
            Stop::Fixed(0) => y,
            _ => step.explicit_part(),
        });
    }
    match cfg.stop {
        Stop::Fixed(k) => {
            let mut yk = y;
            for _ in 0..k {
                yk = step.sweep(cfg.kind, yk)?;
            }
            Ok(yk)
        }
        Stop::Converge { tol, max_iters } => {
            let mut yk = y;
            let mut update = f64::INFINITY;
            for _ in 0..max_iters {
                let next = step.sweep(cfg.kind, yk)?;
                update = (next - yk).norm();
                yk = next;
                if update <= tol {
                    return Ok(yk);
                }
            }
            Err(SolveError::NoConvergence {
                iters: max_iters,
                update,
            })
        }
    }
}

/// The iterates `Y_{n+1,0}, …, Y_{n+1,k}` of one step.
pub fn step_iterates<P: SdeProblem + ?Sized>(
    scheme: &SchemeSpec,
    problem: &P,
    y: Vector,
    inc: &StochasticIncrements,
    kind: IterationKind,
    k: usize,
) -> Result<Vec<Vector>, SolveError> {
    let mut step = Step::new(scheme, problem, y, inc);
    let mut out = vec![y];
    for _ in 0..k {
        let next = step.sweep(kind, *out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbortReason {
    #[error("explosion (state {0:?})")]
    Explosion(Vector),
    #[error(transparent)]
    Solver(#[from] SolveError),
}

/// Why and where a path was abandoned.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("path aborted in step {step} at t = {time}: {reason}")]
pub struct PathAbort {
    /// Index of the step that failed (0-based).
    pub step: usize,
    /// Time at the end of the failed step.
    pub time: f64,
    pub reason: AbortReason,
    /// Last accepted state.
    pub last: Vector,
}

fn exploded(y: &Vector) -> bool {
    !y.is_finite() || y.max_abs() > EXPLOSION_THRESHOLD
}

fn advance<P: SdeProblem + ?Sized, F: FnMut(Vector)>(
    scheme: &SchemeSpec,
    problem: &P,
    x0: Vector,
    increments: impl IntoIterator<Item = StochasticIncrements>,
    cfg: &SolveConfig,
    mut visit: F,
) -> Result<Vector, PathAbort> {
    let mut y = x0;
    let mut t = 0.0;
    for (n, inc) in increments.into_iter().enumerate() {
        t += inc.h;
        let abort = |reason| PathAbort {
            step: n,
            time: t,
            reason,
            last: y,
        };
        let next = solve_step(scheme, problem, y, &inc, cfg).map_err(|e| abort(e.into()))?;
        if exploded(&next) {
            return Err(abort(AbortReason::Explosion(next)));
        }
        y = next;
        visit(y);
    }
    Ok(y)
}

/// Integrates over the grid implied by `increments`, returning every state.
pub fn integrate_path<P: SdeProblem + ?Sized>(
    scheme: &SchemeSpec,
    problem: &P,
    x0: Vector,
    increments: &[StochasticIncrements],
    cfg: &SolveConfig,
) -> Result<Vec<Vector>, PathAbort> {
    let mut states = Vec::with_capacity(increments.len() + 1);
    states.push(x0);
    advance(scheme, problem, x0, increments.iter().copied(), cfg, |y| {
        states.push(y)
    })?;
    Ok(states)
}

/// As [`integrate_path`] but only keeps the final state.
pub fn integrate_final<P: SdeProblem + ?Sized>(
    scheme: &SchemeSpec,
    problem: &P,
    x0: Vector,
    increments: impl IntoIterator<Item = StochasticIncrements>,
    cfg: &SolveConfig,
) -> Result<Vector, PathAbort> {
    advance(scheme, problem, x0, increments, cfg, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Gbm;
    use crate::schemes::{make_scheme, SchemeKind};

    #[test]
    fn zero_sweeps_return_predictor() {
        let s = make_scheme(SchemeKind::Fit).unwrap();
        let p = Gbm::new(-1.0, 0.3);
        let inc = StochasticIncrements::new(0.1, 0.2, 0.01);
        let y = Vector::scalar(1.5);
        for kind in IterationKind::ALL {
            assert_eq!(solve_step(&s, &p, y, &inc, &SolveConfig::fixed(kind, 0)).unwrap(), y);
        }
    }

    #[test]
    fn bad_configs() {
        assert!(SolveConfig::converge(IterationKind::Simple, 0.0, 10).validate().is_err());
        assert!(SolveConfig::converge(IterationKind::Simple, 1e-9, 0).validate().is_err());
        assert!(SolveConfig::fixed(IterationKind::Simple, 0).validate().is_ok());
    }

    #[test]
    fn divergent_simple_iteration_is_reported() {
        // h·µ = −3: the fixed-point map has slope −3
        let s = make_scheme(SchemeKind::Euler { theta: 1.0 }).unwrap();
        let p = Gbm::new(-3.0, 0.0);
        let inc = StochasticIncrements::new(1.0, 0.0, 0.0);
        let cfg = SolveConfig::converge(IterationKind::Simple, 1e-12, 50);
        assert!(matches!(
            solve_step(&s, &p, Vector::scalar(1.0), &inc, &cfg),
            Err(SolveError::NoConvergence { .. })
        ));
        let newton = SolveConfig::converge(IterationKind::FullNewton, 1e-12, 50);
        let y = solve_step(&s, &p, Vector::scalar(1.0), &inc, &newton).unwrap();
        assert!((y[0] - 0.25).abs() < 1e-14);
    }
}
