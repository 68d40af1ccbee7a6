//! Itô SDEs `dX = g₀(X) dt + g₁(X) dW` with a single noise channel and
//! analytic derivatives of the coefficients up to third order.

use thiserror::Error;

use crate::linalg::{Matrix, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("derivative of order {order} requested; {problem} provides up to {max}")]
    DerivativeOrder {
        problem: String,
        order: usize,
        max: usize,
    },
    #[error("unknown problem {0:?} (expected gbm, vdp, nonlinear1d or nonlinear2d)")]
    Unknown(String),
    #[error("noise channel {0} does not exist (only g0 and g1)")]
    Channel(usize),
}

/// An SDE with coefficients `g₀` (drift) and `g₁` (diffusion).
///
/// `dg`, `d2g` and `d3g` are the first three derivatives of `g_l` applied to
/// the given directions; they are symmetric multilinear maps.
pub trait SdeProblem: Send + Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn initial(&self) -> Vector;

    fn g(&self, l: usize, x: Vector) -> Vector;
    fn dg(&self, l: usize, x: Vector, u: Vector) -> Vector;
    fn d2g(&self, l: usize, x: Vector, u: Vector, v: Vector) -> Vector;
    fn d3g(&self, l: usize, x: Vector, u: Vector, v: Vector, w: Vector) -> Vector;

    fn max_derivative_order(&self) -> usize {
        3
    }

    /// Closed-form solution given the driving Brownian motion at time `t`.
    fn exact_path(&self, _t: f64, _w: f64) -> Option<Vector> {
        None
    }

    /// Functional whose expectation is tracked in weak experiments.
    fn weak_functional(&self, _x: Vector) -> Option<f64> {
        None
    }

    fn exact_expectation(&self, _t: f64) -> Option<f64> {
        None
    }
}

/// `g_l^{(k)}(x)[dirs…]` with `k = dirs.len()`.
pub fn derivative<P: SdeProblem + ?Sized>(
    p: &P,
    l: usize,
    x: Vector,
    dirs: &[Vector],
) -> Result<Vector, ProblemError> {
    if l > 1 {
        return Err(ProblemError::Channel(l));
    }
    if dirs.len() > p.max_derivative_order() {
        return Err(ProblemError::DerivativeOrder {
            problem: p.name().to_string(),
            order: dirs.len(),
            max: p.max_derivative_order(),
        });
    }
    Ok(match dirs {
        [] => p.g(l, x),
        [u] => p.dg(l, x, *u),
        [u, v] => p.d2g(l, x, *u, *v),
        [u, v, w] => p.d3g(l, x, *u, *v, *w),
        _ => unreachable!("order checked above"),
    })
}

/// Jacobian matrix of `g_l` at `x`.
pub fn jacobian<P: SdeProblem + ?Sized>(p: &P, l: usize, x: Vector) -> Matrix {
    Matrix::from_columns(p.dim(), |e| p.dg(l, x, e))
}

/// Looks up a problem by its command-line name, with default parameters.
pub fn by_name(name: &str) -> Result<Box<dyn SdeProblem>, ProblemError> {
    Ok(match name {
        "gbm" => Box::new(Gbm::new(-3.0, 3f64.sqrt())),
        "vdp" => Box::new(VanDerPol::new(10.0, 1.0)),
        "nonlinear1d" => Box::new(ScalarNonlinear),
        "nonlinear2d" => Box::new(Coupled2d),
        _ => return Err(ProblemError::Unknown(name.to_string())),
    })
}

/// Geometric Brownian motion `dX = µX dt + σX dW`.
#[derive(Clone, Debug)]
pub struct Gbm {
    pub mu: f64,
    pub sigma: f64,
    pub x0: f64,
}

impl Gbm {
    pub fn new(mu: f64, sigma: f64) -> Self {
        Gbm { mu, sigma, x0: 1.0 }
    }

    pub fn with_initial(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    fn coeff(&self, l: usize) -> f64 {
        if l == 0 {
            self.mu
        } else {
            self.sigma
        }
    }

    /// Largest step size for which explicit Euler is mean-square stable.
    pub fn ms_step_bound(&self) -> f64 {
        -(2.0 * self.mu + self.sigma * self.sigma) / (self.mu * self.mu)
    }
}

impl SdeProblem for Gbm {
    fn name(&self) -> &str {
        "gbm"
    }
    fn dim(&self) -> usize {
        1
    }
    fn initial(&self) -> Vector {
        Vector::scalar(self.x0)
    }
    fn g(&self, l: usize, x: Vector) -> Vector {
        self.coeff(l) * x
    }
    fn dg(&self, l: usize, _x: Vector, u: Vector) -> Vector {
        self.coeff(l) * u
    }
    fn d2g(&self, _l: usize, _x: Vector, _u: Vector, _v: Vector) -> Vector {
        Vector::zeros(1)
    }
    fn d3g(&self, _l: usize, _x: Vector, _u: Vector, _v: Vector, _w: Vector) -> Vector {
        Vector::zeros(1)
    }
    fn exact_path(&self, t: f64, w: f64) -> Option<Vector> {
        let s = self.sigma;
        Some(Vector::scalar(
            self.x0 * ((self.mu - 0.5 * s * s) * t + s * w).exp(),
        ))
    }
}

/// Stochastic Van der Pol oscillator with noise on the damping term.
#[derive(Clone, Debug)]
pub struct VanDerPol {
    pub mu: f64,
    pub theta: f64,
    pub x0: [f64; 2],
}

impl VanDerPol {
    pub fn new(mu: f64, theta: f64) -> Self {
        VanDerPol {
            mu,
            theta,
            x0: [2.0, 0.0],
        }
    }

    fn scale(&self, l: usize) -> f64 {
        if l == 0 {
            self.mu
        } else {
            self.theta
        }
    }
}

// q(x) = (1 − x₁²) x₂ and its derivatives
fn vdp_q(x: Vector) -> f64 {
    (1.0 - x[0] * x[0]) * x[1]
}
fn vdp_dq(x: Vector, u: Vector) -> f64 {
    -2.0 * x[0] * x[1] * u[0] + (1.0 - x[0] * x[0]) * u[1]
}
fn vdp_d2q(x: Vector, u: Vector, v: Vector) -> f64 {
    -2.0 * x[1] * u[0] * v[0] - 2.0 * x[0] * (u[0] * v[1] + u[1] * v[0])
}
fn vdp_d3q(u: Vector, v: Vector, w: Vector) -> f64 {
    -2.0 * (u[0] * v[0] * w[1] + u[0] * v[1] * w[0] + u[1] * v[0] * w[0])
}

impl SdeProblem for VanDerPol {
    fn name(&self) -> &str {
        "vdp"
    }
    fn dim(&self) -> usize {
        2
    }
    fn initial(&self) -> Vector {
        Vector::from_slice(&self.x0)
    }
    fn g(&self, l: usize, x: Vector) -> Vector {
        let c = self.scale(l) * vdp_q(x);
        if l == 0 {
            Vector::from_slice(&[x[1], c - x[0]])
        } else {
            Vector::from_slice(&[0.0, c])
        }
    }
    fn dg(&self, l: usize, x: Vector, u: Vector) -> Vector {
        let c = self.scale(l) * vdp_dq(x, u);
        if l == 0 {
            Vector::from_slice(&[u[1], c - u[0]])
        } else {
            Vector::from_slice(&[0.0, c])
        }
    }
    fn d2g(&self, l: usize, x: Vector, u: Vector, v: Vector) -> Vector {
        Vector::from_slice(&[0.0, self.scale(l) * vdp_d2q(x, u, v)])
    }
    fn d3g(&self, l: usize, _x: Vector, u: Vector, v: Vector, w: Vector) -> Vector {
        Vector::from_slice(&[0.0, self.scale(l) * vdp_d3q(u, v, w)])
    }
}

/// `dX = (X/2 + √(X²+1)) dt + √(X²+1) dW`, `X(0) = 0`, solved by
/// `X(t) = sinh(t + W(t))`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ScalarNonlinear;

/// `p(z) = z³ − 6z² + 8z`
pub fn weak_polynomial(z: f64) -> f64 {
    ((z - 6.0) * z + 8.0) * z
}

// derivatives of s(x) = √(x²+1)
fn s0(x: f64) -> f64 {
    x.hypot(1.0)
}
fn s1(x: f64) -> f64 {
    x / s0(x)
}
fn s2(x: f64) -> f64 {
    1.0 / s0(x).powi(3)
}
fn s3(x: f64) -> f64 {
    -3.0 * x / s0(x).powi(5)
}

impl SdeProblem for ScalarNonlinear {
    fn name(&self) -> &str {
        "nonlinear1d"
    }
    fn dim(&self) -> usize {
        1
    }
    fn initial(&self) -> Vector {
        Vector::scalar(0.0)
    }
    fn g(&self, l: usize, x: Vector) -> Vector {
        let y = x[0];
        let drift = if l == 0 { 0.5 * y } else { 0.0 };
        Vector::scalar(drift + s0(y))
    }
    fn dg(&self, l: usize, x: Vector, u: Vector) -> Vector {
        let drift = if l == 0 { 0.5 } else { 0.0 };
        Vector::scalar((drift + s1(x[0])) * u[0])
    }
    fn d2g(&self, _l: usize, x: Vector, u: Vector, v: Vector) -> Vector {
        Vector::scalar(s2(x[0]) * u[0] * v[0])
    }
    fn d3g(&self, _l: usize, x: Vector, u: Vector, v: Vector, w: Vector) -> Vector {
        Vector::scalar(s3(x[0]) * u[0] * v[0] * w[0])
    }
    fn exact_path(&self, t: f64, w: f64) -> Option<Vector> {
        Some(Vector::scalar((t + w).sinh()))
    }
    fn weak_functional(&self, x: Vector) -> Option<f64> {
        Some(weak_polynomial(x[0].asinh()))
    }
    fn exact_expectation(&self, t: f64) -> Option<f64> {
        Some(((t - 3.0) * t + 2.0) * t)
    }
}

/// Two-dimensional nonlinear system with drift
/// `(x₁/2 + √(x₁²+x₂²+1), x₁/2 + √(x₂²+1))` and diffusion
/// `(sin x₁ + 2 sin x₂, cos x₁ + 3 cos x₂)`, started at the origin.
#[derive(Clone, Copy, Debug, Default)]
pub struct Coupled2d;

fn dot(a: Vector, b: Vector) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl SdeProblem for Coupled2d {
    fn name(&self) -> &str {
        "nonlinear2d"
    }
    fn dim(&self) -> usize {
        2
    }
    fn initial(&self) -> Vector {
        Vector::zeros(2)
    }
    fn g(&self, l: usize, x: Vector) -> Vector {
        let (a, b) = (x[0], x[1]);
        if l == 0 {
            let r = (a * a + b * b + 1.0).sqrt();
            Vector::from_slice(&[0.5 * a + r, 0.5 * a + s0(b)])
        } else {
            Vector::from_slice(&[a.sin() + 2.0 * b.sin(), a.cos() + 3.0 * b.cos()])
        }
    }
    fn dg(&self, l: usize, x: Vector, u: Vector) -> Vector {
        let (a, b) = (x[0], x[1]);
        if l == 0 {
            let r = (a * a + b * b + 1.0).sqrt();
            Vector::from_slice(&[
                0.5 * u[0] + dot(x, u) / r,
                0.5 * u[0] + s1(b) * u[1],
            ])
        } else {
            Vector::from_slice(&[
                a.cos() * u[0] + 2.0 * b.cos() * u[1],
                -a.sin() * u[0] - 3.0 * b.sin() * u[1],
            ])
        }
    }
    fn d2g(&self, l: usize, x: Vector, u: Vector, v: Vector) -> Vector {
        let (a, b) = (x[0], x[1]);
        if l == 0 {
            let r = (a * a + b * b + 1.0).sqrt();
            let first = dot(u, v) / r - dot(x, u) * dot(x, v) / r.powi(3);
            Vector::from_slice(&[first, s2(b) * u[1] * v[1]])
        } else {
            Vector::from_slice(&[
                -a.sin() * u[0] * v[0] - 2.0 * b.sin() * u[1] * v[1],
                -a.cos() * u[0] * v[0] - 3.0 * b.cos() * u[1] * v[1],
            ])
        }
    }
    fn d3g(&self, l: usize, x: Vector, u: Vector, v: Vector, w: Vector) -> Vector {
        let (a, b) = (x[0], x[1]);
        if l == 0 {
            let r = (a * a + b * b + 1.0).sqrt();
            let (xu, xv, xw) = (dot(x, u), dot(x, v), dot(x, w));
            let first = -(dot(u, v) * xw + dot(u, w) * xv + dot(v, w) * xu) / r.powi(3)
                + 3.0 * xu * xv * xw / r.powi(5);
            Vector::from_slice(&[first, s3(b) * u[1] * v[1] * w[1]])
        } else {
            let uvw0 = u[0] * v[0] * w[0];
            let uvw1 = u[1] * v[1] * w[1];
            Vector::from_slice(&[
                -a.cos() * uvw0 - 2.0 * b.cos() * uvw1,
                a.sin() * uvw0 + 3.0 * b.sin() * uvw1,
            ])
        }
    }
}
