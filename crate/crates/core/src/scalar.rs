//! Fixed points of self-maps of a closed interval `[a, b]`.
//!
//! The Lipschitz constant is estimated from difference quotients on a
//! uniform grid. For non-affine maps this can underestimate the true
//! constant, so the resulting certificate is heuristic.

use crate::error::{Error, Result};
use crate::metric::{banach_iterate, is_contraction_factor, real_map, FixedPointResult, IterationTrace, StoppingRule};

/// Default grid size for [`estimate_lipschitz`].
pub const DEFAULT_SAMPLES: usize = 1024;

/// Slack allowed when checking that `f` maps `[a, b]` into itself.
pub const SELF_MAP_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy)]
pub struct ScalarProblem<F> {
    f: F,
    a: f64,
    b: f64,
}

impl<F> core::fmt::Debug for ScalarProblem<F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ScalarProblem")
            .field("a", &self.a)
            .field("b", &self.b)
            .finish_non_exhaustive()
    }
}

impl<F: Fn(f64) -> f64> ScalarProblem<F> {
    pub fn new(f: F, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain("interval must satisfy a < b with finite ends"));
        }
        Ok(Self { f, a, b })
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn grid_point(&self, i: usize, samples: usize) -> f64 {
        if i + 1 == samples {
            self.b
        } else {
            self.a + (self.b - self.a) * i as f64 / (samples - 1) as f64
        }
    }
}

/// Largest difference quotient `|f(x_{i+1}) - f(x_i)| / (x_{i+1} - x_i)` over a
/// uniform grid of `samples` points, after checking `f(x_i) ∈ [a, b]` at each.
pub fn estimate_lipschitz<F: Fn(f64) -> f64>(problem: &ScalarProblem<F>, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(Error::Domain("need at least two samples"));
    }
    let (a, b) = problem.interval();
    let mut k = 0.0f64;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..samples {
        let x = problem.grid_point(i, samples);
        let fx = problem.eval(x);
        if !fx.is_finite() {
            return Err(Error::NonFinite);
        }
        if fx < a - SELF_MAP_TOLERANCE || fx > b + SELF_MAP_TOLERANCE {
            return Err(Error::NotSelfMap { x, fx });
        }
        if let Some((px, pfx)) = prev {
            k = k.max(libm::fabs(fx - pfx) / (x - px));
        }
        prev = Some((x, fx));
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub samples: usize,
    /// Starting point; the interval midpoint when absent.
    pub start: Option<f64>,
    /// Iterate even when the estimated constant is not below one.
    pub force: bool,
}

impl ScalarOptions {
    pub fn new(tolerance: f64, max_iterations: usize) -> Self {
        Self {
            tolerance,
            max_iterations,
            samples: DEFAULT_SAMPLES,
            start: None,
            force: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub fixed_point: FixedPointResult<f64>,
    pub lipschitz_estimate: f64,
    /// `|f(x*) - x*|` at the returned point.
    pub residual: f64,
}

pub fn solve_scalar_fixed_point<F: Fn(f64) -> f64>(
    problem: &ScalarProblem<F>,
    options: &ScalarOptions,
) -> Result<(ScalarSolution, IterationTrace<f64>)> {
    let k = estimate_lipschitz(problem, options.samples)?;
    let mut rule = StoppingRule::new(options.tolerance, options.max_iterations)?;
    if is_contraction_factor(k) {
        rule = rule.with_contraction_factor(k)?;
    } else if !options.force {
        return Err(Error::NotContractive { factor: k });
    }

    let (a, b) = problem.interval();
    let start = options.start.unwrap_or(0.5 * (a + b));
    if !(a..=b).contains(&start) {
        return Err(Error::Domain("starting point must lie in [a, b]"));
    }

    let map = real_map(|x| problem.eval(x));
    let (fixed_point, trace) = banach_iterate(&map, start, &rule)?;
    let x = fixed_point.point;
    let residual = libm::fabs(problem.eval(x) - x);
    Ok((
        ScalarSolution {
            fixed_point,
            lipschitz_estimate: k,
            residual,
        },
        trace,
    ))
}
