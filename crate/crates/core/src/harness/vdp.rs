//! Explicit against semi-implicit Milstein on one stochastic Van der Pol path.

use super::increments::PathStream;
use super::HarnessError;
use crate::growth::IterationKind;
use crate::linalg::Vector;
use crate::problems::{SdeProblem, VanDerPol};
use crate::schemes::scheme_by_name;
use crate::solvers::{integrate_path, AbortReason, SolveConfig};

pub const DEMO_STEP: f64 = 0.05;
pub const DEMO_HORIZON: f64 = 50.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub scheme: String,
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    /// Time of the failed step if the path was abandoned.
    pub abort_time: Option<f64>,
    pub exploded: bool,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.abort_time.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VdpDemo {
    pub explicit: Trajectory,
    pub semi_implicit: Trajectory,
}

/// Runs both schemes on the same Brownian path. The semi-implicit equation is
/// solved by full Newton to `1e-12`.
pub fn vdp_demo(mu: f64, theta: f64, h: f64, horizon: f64, seed: u64) -> Result<VdpDemo, HarnessError> {
    if !(h > 0.0) || !(horizon >= h) {
        return Err(HarnessError::Config(format!("invalid step {h} or horizon {horizon}")));
    }
    let problem = VanDerPol::new(mu, theta);
    let n = (horizon / h).round() as usize;
    let mut stream = PathStream::new(seed, 0);
    let incs: Vec<_> = (0..n).map(|_| stream.next_increments(h)).collect();
    let run = |name: &str, cfg: SolveConfig| -> Result<Trajectory, HarnessError> {
        let scheme = scheme_by_name(name)?;
        let (states, abort_time, exploded) = match integrate_path(&scheme, &problem, problem.initial(), &incs, &cfg) {
            Ok(states) => (states, None, false),
            Err(abort) => {
                let mut states = Vec::with_capacity(abort.step + 1);
                // replay the accepted prefix
                states.extend(
                    integrate_path(&scheme, &problem, problem.initial(), &incs[..abort.step], &cfg)
                        .expect("prefix was accepted"),
                );
                let exploded = matches!(abort.reason, AbortReason::Explosion(_));
                (states, Some(abort.time), exploded)
            }
        };
        let times = (0..states.len()).map(|i| i as f64 * h).collect();
        Ok(Trajectory {
            scheme: name.to_string(),
            times,
            states,
            abort_time,
            exploded,
        })
    };
    Ok(VdpDemo {
        explicit: run("milstein(0,0)", SolveConfig::fixed(IterationKind::Simple, 1))?,
        semi_implicit: run("sim", SolveConfig::converge(IterationKind::FullNewton, 1e-12, 50))?,
    })
}
