//! Successive approximation in a metric space.
//!
//! [`banach_iterate`] runs `x_{k+1} = T(x_k)` for any [`FixedPointMap`] and
//! reports the outcome together with the a-priori bound
//! `q^n / (1 - q) * d(x_1, x_0)` and the a-posteriori bound
//! `q / (1 - q) * d(x_n, x_{n-1})` whenever a contraction factor `q` is known.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default number of consecutive expanding steps that aborts an iteration.
pub const DEFAULT_DIVERGENCE_WINDOW: usize = 5;

/// Default number of iterates kept in a trace before only distances are recorded.
pub const DEFAULT_TRACE_CAP: usize = 10_000;

/// A self-map `T` on a point type together with the metric it contracts in.
pub trait FixedPointMap {
    type Point: Clone;

    fn apply(&self, x: &Self::Point) -> Self::Point;

    /// Distance between two points. Must be a metric: non-negative, symmetric,
    /// zero on identical points and subadditive.
    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;
}

/// Adapter turning a pair of closures into a [`FixedPointMap`].
pub struct FnMap<P, T, D> {
    map: T,
    metric: D,
    _point: core::marker::PhantomData<fn(&P) -> P>,
}

impl<P, T, D> FnMap<P, T, D>
where
    P: Clone,
    T: Fn(&P) -> P,
    D: Fn(&P, &P) -> f64,
{
    pub fn new(map: T, metric: D) -> Self {
        Self {
            map,
            metric,
            _point: core::marker::PhantomData,
        }
    }
}

impl<P, T, D> core::fmt::Debug for FnMap<P, T, D> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnMap").finish_non_exhaustive()
    }
}

impl<P, T, D> FixedPointMap for FnMap<P, T, D>
where
    P: Clone,
    T: Fn(&P) -> P,
    D: Fn(&P, &P) -> f64,
{
    type Point = P;

    fn apply(&self, x: &P) -> P {
        (self.map)(x)
    }

    fn distance(&self, x: &P, y: &P) -> f64 {
        (self.metric)(x, y)
    }
}

/// Scalar map `T` on the real line with the metric `|x - y|`.
pub fn real_map<T: Fn(f64) -> f64>(
    map: T,
) -> FnMap<f64, impl Fn(&f64) -> f64, impl Fn(&f64, &f64) -> f64> {
    FnMap::new(move |x: &f64| map(*x), |x: &f64, y: &f64| libm::fabs(x - y))
}

/// When to stop iterating.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    /// Target accuracy, in the units of the map's metric.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Known contraction factor. Switches the stopping test to the
    /// a-posteriori bound and enables bound reporting.
    pub q_for_bounds: Option<f64>,
    /// Consecutive step ratios above one that abort the run.
    pub divergence_window: usize,
    /// Maximum number of iterates stored in the trace.
    pub trace_cap: usize,
}

impl StoppingRule {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self> {
        let rule = Self {
            tolerance,
            max_iterations,
            q_for_bounds: None,
            divergence_window: DEFAULT_DIVERGENCE_WINDOW,
            trace_cap: DEFAULT_TRACE_CAP,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn with_contraction_factor(mut self, q: f64) -> Result<Self> {
        self.q_for_bounds = Some(q);
        self.validate()?;
        Ok(self)
    }

    pub fn with_divergence_window(mut self, window: usize) -> Result<Self> {
        self.divergence_window = window;
        self.validate()?;
        Ok(self)
    }

    pub fn with_trace_cap(mut self, cap: usize) -> Self {
        self.trace_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::Domain("tolerance must be positive and finite"));
        }
        if self.max_iterations == 0 {
            return Err(Error::Domain("max_iterations must be positive"));
        }
        if self.divergence_window == 0 {
            return Err(Error::Domain("divergence_window must be positive"));
        }
        if let Some(q) = self.q_for_bounds {
            if !is_contraction_factor(q) {
                return Err(Error::Domain("contraction factor must lie in [0, 1)"));
            }
        }
        Ok(())
    }
}

/// True when `q` is a usable contraction factor, i.e. `0 <= q < 1`.
pub fn is_contraction_factor(q: f64) -> bool {
    (0.0..1.0).contains(&q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    MaxIterationsReached,
    DivergenceDetected,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterationsReached => "max_iterations_reached",
            Status::DivergenceDetected => "divergence_detected",
        }
    }
}

impl core::fmt::Display for Status {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult<P> {
    /// Last iterate `x_n`.
    pub point: P,
    pub iterations: usize,
    /// `d(x_n, x_{n-1})`.
    pub last_step: f64,
    pub a_priori_bound: Option<f64>,
    pub a_posteriori_bound: Option<f64>,
    pub status: Status,
}

impl<P> FixedPointResult<P> {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Replaces the point, keeping the convergence data.
    pub fn map_point<Q>(self, f: impl FnOnce(P) -> Q) -> FixedPointResult<Q> {
        FixedPointResult {
            point: f(self.point),
            iterations: self.iterations,
            last_step: self.last_step,
            a_priori_bound: self.a_priori_bound,
            a_posteriori_bound: self.a_posteriori_bound,
            status: self.status,
        }
    }
}

/// The iterates `x_0, x_1, ...` of a run and the distances between neighbours.
///
/// Iterates are stored up to a cap; after that only distances are appended.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace<P> {
    iterates: Vec<P>,
    step_distances: Vec<f64>,
    cap: usize,
}

impl<P> IterationTrace<P> {
    pub fn new(cap: usize) -> Self {
        Self {
            iterates: Vec::new(),
            step_distances: Vec::new(),
            cap,
        }
    }

    /// Builds a trace that holds distances only.
    pub fn from_step_distances(step_distances: Vec<f64>) -> Self {
        Self {
            iterates: Vec::new(),
            step_distances,
            cap: 0,
        }
    }

    fn record_start(&mut self, x0: P) {
        if self.cap > 0 {
            self.iterates.push(x0);
        }
    }

    fn record_step(&mut self, x: &P, distance: f64)
    where
        P: Clone,
    {
        self.step_distances.push(distance);
        if self.iterates.len() < self.cap && self.iterates.len() == self.step_distances.len() {
            self.iterates.push(x.clone());
        }
    }

    /// Number of applications of the map.
    pub fn len(&self) -> usize {
        self.step_distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.step_distances.is_empty()
    }

    pub fn iterates(&self) -> &[P] {
        &self.iterates
    }

    pub fn step_distances(&self) -> &[f64] {
        &self.step_distances
    }

    /// True when some iterates were dropped because of the cap.
    pub fn is_elided(&self) -> bool {
        self.iterates.len() < self.step_distances.len() + 1
    }

    /// Ratios `d(x_{k+1}, x_k) / d(x_k, x_{k-1})`; `None` where the denominator is zero.
    pub fn step_ratios(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.step_distances
            .windows(2)
            .map(|w| if w[0] > 0.0 { Some(w[1] / w[0]) } else { None })
    }
}

/// Iterates `x_{k+1} = T(x_k)` from `x0` until `rule` stops the run.
///
/// With `rule.q_for_bounds = Some(q)` the run stops once
/// `q / (1 - q) * d(x_n, x_{n-1}) <= tolerance`; otherwise once
/// `d(x_n, x_{n-1}) <= tolerance`. A run is aborted with
/// [`Status::DivergenceDetected`] after `divergence_window` consecutive step
/// ratios above one, or as soon as a step distance is not finite. Errors are
/// returned only for an invalid rule.
pub fn banach_iterate<M: FixedPointMap>(
    map: &M,
    x0: M::Point,
    rule: &StoppingRule,
) -> Result<(FixedPointResult<M::Point>, IterationTrace<M::Point>)> {
    rule.validate()?;

    let mut trace = IterationTrace::new(rule.trace_cap);
    trace.record_start(x0.clone());

    let mut current = x0;
    let mut first_step = 0.0;
    let mut last_step = 0.0;
    let mut expanding = 0usize;
    let mut status = Status::MaxIterationsReached;
    let mut iterations = 0usize;

    while iterations < rule.max_iterations {
        let next = map.apply(&current);
        let step = map.distance(&next, &current);
        iterations += 1;

        if !step.is_finite() {
            trace.record_step(&next, step);
            status = Status::DivergenceDetected;
            last_step = step;
            break;
        }
        trace.record_step(&next, step);

        if iterations == 1 {
            first_step = step;
        } else if last_step > 0.0 && step > last_step {
            expanding += 1;
        } else {
            expanding = 0;
        }
        last_step = step;
        current = next;

        let stop = match rule.q_for_bounds {
            Some(q) => a_posteriori_error_bound(q, step)? <= rule.tolerance,
            None => step <= rule.tolerance,
        };
        if stop {
            status = Status::Converged;
            break;
        }
        if expanding >= rule.divergence_window {
            status = Status::DivergenceDetected;
            break;
        }
    }

    let (a_priori_bound, a_posteriori_bound) = match rule.q_for_bounds {
        Some(q) if last_step.is_finite() => (
            Some(a_priori_error_bound(q, iterations, first_step)?),
            Some(a_posteriori_error_bound(q, last_step)?),
        ),
        _ => (None, None),
    };

    let result = FixedPointResult {
        point: current,
        iterations,
        last_step,
        a_priori_bound,
        a_posteriori_bound,
        status,
    };
    Ok((result, trace))
}

/// `q^n / (1 - q) * d1`: distance from `x_n` to the fixed point, known before iterating.
pub fn a_priori_error_bound(q: f64, n: usize, d1: f64) -> Result<f64> {
    if !is_contraction_factor(q) {
        return Err(Error::Domain("contraction factor must lie in [0, 1)"));
    }
    if !(d1.is_finite() && d1 >= 0.0) {
        return Err(Error::Domain("initial step must be finite and non-negative"));
    }
    Ok(q_pow(q, n) * d1 / (1.0 - q))
}

/// Smallest `n >= 0` with `a_priori_error_bound(q, n, d1) <= tol`.
///
/// `q = 0` and `d1 = 0` are accepted as degenerate cases.
pub fn a_priori_iteration_count(q: f64, d1: f64, tol: f64) -> Result<usize> {
    if !is_contraction_factor(q) {
        return Err(Error::Domain("contraction factor must lie in [0, 1)"));
    }
    if !(d1.is_finite() && d1 >= 0.0) {
        return Err(Error::Domain("initial step must be finite and non-negative"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive and finite"));
    }
    let holds = |n: usize| -> bool { q_pow(q, n) * d1 / (1.0 - q) <= tol };
    if holds(0) {
        return Ok(0);
    }
    if q == 0.0 {
        return Ok(1);
    }
    // Closed-form estimate, then walk to the exact floating-point argmin.
    let estimate = libm::log(tol * (1.0 - q) / d1) / libm::log(q);
    let mut n = if estimate.is_finite() && estimate > 1.0 {
        libm::ceil(estimate) as usize
    } else {
        1
    };
    while n > 1 && holds(n - 1) {
        n -= 1;
    }
    while !holds(n) {
        n += 1;
    }
    Ok(n)
}

/// `q / (1 - q) * last_step`: distance from `x_n` to the fixed point given `d(x_n, x_{n-1})`.
pub fn a_posteriori_error_bound(q: f64, last_step: f64) -> Result<f64> {
    if !is_contraction_factor(q) {
        return Err(Error::Domain("contraction factor must lie in [0, 1)"));
    }
    if !(last_step.is_finite() && last_step >= 0.0) {
        return Err(Error::Domain("last step must be finite and non-negative"));
    }
    Ok(q * last_step / (1.0 - q))
}

/// Empirical contraction factor: the largest ratio of consecutive step distances.
///
/// Ratios with a zero denominator are skipped. A trace that reaches an exact
/// fixed point after at least one usable ratio yields the maximum over the
/// ratios seen so far (zero if the next step vanished). Returns
/// [`Error::InsufficientData`] when no ratio can be formed.
pub fn estimate_contraction_factor<P>(trace: &IterationTrace<P>) -> Result<f64> {
    estimate_from_steps(trace.step_distances())
}

pub fn estimate_from_steps(steps: &[f64]) -> Result<f64> {
    steps
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
        .ok_or(Error::InsufficientData)
}

fn q_pow(q: f64, n: usize) -> f64 {
    match i32::try_from(n) {
        Ok(n) => libm::pow(q, f64::from(n)),
        Err(_) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec;

    fn rule(tol: f64) -> StoppingRule {
        StoppingRule::new(tol, 10_000).unwrap()
    }

    #[test]
    fn halving_converges_to_zero() {
        let map = real_map(|x| x / 2.0);
        let (res, trace) = banach_iterate(&map, 1.0, &rule(1e-12)).unwrap();
        assert_eq!(res.status, Status::Converged);
        assert!(res.point.abs() <= 1e-12);
        assert_eq!(trace.iterates().len(), trace.len() + 1);
    }

    #[test]
    fn identity_stops_after_one_application() {
        let map = real_map(|x| x);
        let (res, trace) = banach_iterate(&map, 3.0, &rule(1e-12)).unwrap();
        assert_eq!(res.status, Status::Converged);
        assert_eq!(res.point, 3.0);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.last_step, 0.0);
        assert_eq!(trace.step_distances(), &[0.0]);
    }

    #[test]
    fn doubling_is_flagged_as_divergent() {
        let map = real_map(|x| 2.0 * x);
        let (res, _) = banach_iterate(&map, 1.0, &rule(1e-12)).unwrap();
        assert_eq!(res.status, Status::DivergenceDetected);
        assert!(res.iterations <= 6, "took {}", res.iterations);
    }

    #[test]
    fn non_finite_step_aborts() {
        let map = real_map(|x| x * 1e300);
        let (res, _) = banach_iterate(&map, 1e10, &rule(1e-12)).unwrap();
        assert_eq!(res.status, Status::DivergenceDetected);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let map = real_map(|x| 0.999 * x);
        let r = StoppingRule::new(1e-12, 10).unwrap();
        let (res, _) = banach_iterate(&map, 1.0, &r).unwrap();
        assert_eq!(res.status, Status::MaxIterationsReached);
        assert_eq!(res.iterations, 10);
    }

    #[test]
    fn a_posteriori_stopping_uses_q() {
        let map = real_map(|x| x / 2.0);
        let r = rule(1e-6).with_contraction_factor(0.5).unwrap();
        let (res, _) = banach_iterate(&map, 1.0, &r).unwrap();
        assert!(res.converged());
        // q/(1-q) = 1, so the run stops once the step itself is below 1e-6.
        assert!(res.last_step <= 1e-6);
        assert!(res.last_step * 2.0 > 1e-6);
        assert_eq!(res.a_posteriori_bound, Some(res.last_step));
        assert!(res.a_priori_bound.unwrap() >= res.point.abs());
    }

    #[test]
    fn rule_validation() {
        assert!(StoppingRule::new(0.0, 10).is_err());
        assert!(StoppingRule::new(-1.0, 10).is_err());
        assert!(StoppingRule::new(1e-3, 0).is_err());
        assert!(rule(1e-3).with_contraction_factor(1.0).is_err());
        assert!(rule(1e-3).with_contraction_factor(-0.1).is_err());
        assert!(rule(1e-3).with_divergence_window(0).is_err());
    }

    #[test]
    fn trace_cap_elides_iterates() {
        let map = real_map(|x| x / 2.0);
        let r = rule(1e-12).with_trace_cap(3);
        let (res, trace) = banach_iterate(&map, 1.0, &r).unwrap();
        assert_eq!(trace.iterates().len(), 3);
        assert_eq!(trace.len(), res.iterations);
        assert!(trace.is_elided());
    }

    #[test]
    fn a_priori_bound_values() {
        assert_eq!(a_priori_error_bound(0.5, 1, 1.0).unwrap(), 1.0);
        assert_eq!(a_priori_error_bound(0.5, 0, 2.0).unwrap(), 4.0);
        // 0.9^50 / 0.1 evaluated with exact rational arithmetic:
        // 9^50 / 10^49 = 0.0515377520732011331036461129765621272702...
        let v = a_priori_error_bound(0.9, 50, 1.0).unwrap();
        assert!((v - 0.051_537_752_073_201_13).abs() <= 1e-14 * 0.0516, "{v}");
        assert!(a_priori_error_bound(1.0, 1, 1.0).is_err());
        assert!(a_priori_error_bound(0.5, 1, -1.0).is_err());
    }

    #[test]
    fn a_priori_count_values() {
        assert_eq!(a_priori_iteration_count(0.5, 1.0, 1e-6).unwrap(), 21);
        assert_eq!(a_priori_iteration_count(0.5, 1.0, 2.0).unwrap(), 0);
        assert!(
            a_priori_iteration_count(0.9, 1.0, 1e-6).unwrap()
                >= a_priori_iteration_count(0.5, 1.0, 1e-6).unwrap()
        );
        assert_eq!(a_priori_iteration_count(0.0, 1.0, 1e-6).unwrap(), 1);
        assert!(a_priori_iteration_count(1.0, 1.0, 1e-6).is_err());
        assert!(a_priori_iteration_count(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn a_priori_count_matches_direct_loop() {
        for &(q, d1, tol) in &[(0.5, 1.0, 1e-6), (0.9, 3.0, 1e-10), (0.1, 100.0, 1e-3), (0.99, 1.0, 1e-8)] {
            let mut n = 0usize;
            while q_pow(q, n) * d1 / (1.0 - q) > tol {
                n += 1;
            }
            assert_eq!(a_priori_iteration_count(q, d1, tol).unwrap(), n, "q={q}");
        }
    }

    #[test]
    fn a_posteriori_values() {
        assert_eq!(a_posteriori_error_bound(0.0, 123.0).unwrap(), 0.0);
        assert_eq!(a_posteriori_error_bound(0.5, 0.01).unwrap(), 0.01);
        assert!(a_posteriori_error_bound(1.5, 0.01).is_err());
    }

    #[test]
    fn bounds_hold_along_halving_trace() {
        let map = real_map(|x| x / 2.0);
        let (_, trace) = banach_iterate(&map, 1.0, &rule(1e-14)).unwrap();
        let d1 = trace.step_distances()[0];
        for (n, x) in trace.iterates().iter().enumerate().skip(1) {
            let err = x.abs();
            let post = a_posteriori_error_bound(0.5, trace.step_distances()[n - 1]).unwrap();
            let prior = a_priori_error_bound(0.5, n, d1).unwrap();
            assert!(err <= post && err <= prior, "n={n}");
        }
    }

    #[test]
    fn estimate_factor() {
        let map = real_map(|x| x / 2.0);
        let (_, trace) = banach_iterate(&map, 1.0, &rule(1e-12)).unwrap();
        assert_eq!(estimate_contraction_factor(&trace).unwrap(), 0.5);

        let affine = real_map(|x| 0.3 * x + 1.0);
        let r = StoppingRule::new(1e-300, 10).unwrap();
        let (_, trace) = banach_iterate(&affine, 0.0, &r).unwrap();
        assert_eq!(trace.len(), 10);
        let q = estimate_contraction_factor(&trace).unwrap();
        assert!((q - 0.3).abs() <= 1e-12, "{q}");
    }

    #[test]
    fn estimate_factor_degenerate() {
        // Exact fixed point reached after one ratio.
        assert_eq!(estimate_from_steps(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(estimate_from_steps(&[0.0, 0.0]), Err(Error::InsufficientData));
        assert_eq!(estimate_from_steps(&[1.0]), Err(Error::InsufficientData));
        let t: IterationTrace<f64> = IterationTrace::from_step_distances(vec![2.0, 1.0, 0.25]);
        assert_eq!(estimate_contraction_factor(&t).unwrap(), 0.5);
    }
}
