//! Fredholm integral equations of the second kind,
//! `f(x) = g(x) + u ∫_a^b M(x, y) f(y) dy`.
//!
//! The integral is replaced by a quadrature rule (Nyström discretization) and
//! the resulting map is iterated (Picard iteration) in the weighted discrete
//! L2 metric `d(f, h)^2 = Σ w_i (f_i - h_i)^2`. In that metric the discrete map
//! is Lipschitz with constant `|u| * sqrt(Σ_i Σ_j w_i w_j M_ij^2)`, which is the
//! tensor-rule estimate of `|u| * ‖M‖_{L2}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metric::{banach_iterate, FixedPointMap, FixedPointResult, IterationTrace, StoppingRule};
use crate::oracle::DenseMatrix;
use crate::quadrature::{QuadratureKind, QuadratureRule};

/// Factors within this distance of 1 are refused: the quadrature estimate of
/// the kernel norm cannot resolve them.
pub const CONTRACTION_MARGIN: f64 = 1e-12;

/// Contraction factor used for the built-in sine-kernel example.
pub const EXAMPLE4_FACTOR: f64 = 0.5;

/// A kernel `M(x, y)` on `[a, b]^2`.
#[derive(Clone, Copy)]
pub struct Kernel<M> {
    m: M,
    a: f64,
    b: f64,
}

impl<M> core::fmt::Debug for Kernel<M> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Kernel")
            .field("a", &self.a)
            .field("b", &self.b)
            .finish_non_exhaustive()
    }
}

impl<M: Fn(f64, f64) -> f64> Kernel<M> {
    pub fn new(m: M, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::Domain("interval must satisfy a < b with finite ends"));
        }
        Ok(Self { m, a, b })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.m)(x, y)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn rule(&self, n_nodes: usize) -> Result<QuadratureRule> {
        if n_nodes < 2 {
            return Err(Error::Domain("need at least two nodes"));
        }
        QuadratureRule::build(QuadratureKind::default(), n_nodes, self.a, self.b)
    }
}

/// Tensor Gauss–Legendre estimate of `(∫∫ M(x, y)^2 dy dx)^{1/2}`.
pub fn kernel_l2_norm<M: Fn(f64, f64) -> f64>(kernel: &Kernel<M>, n_nodes: usize) -> Result<f64> {
    kernel_l2_norm_with(kernel, &kernel.rule(n_nodes)?)
}

pub fn kernel_l2_norm_with<M: Fn(f64, f64) -> f64>(kernel: &Kernel<M>, rule: &QuadratureRule) -> Result<f64> {
    let mut sum = 0.0;
    for (&x, &wx) in rule.nodes().iter().zip(rule.weights()) {
        for (&y, &wy) in rule.nodes().iter().zip(rule.weights()) {
            let m = kernel.eval(x, y);
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
            sum += wx * wy * m * m;
        }
    }
    Ok(libm::sqrt(sum))
}

/// Nyström discretization of the equation on a fixed node set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedFredholm {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Row-major `M(node_i, node_j)`.
    kernel_matrix: Vec<f64>,
    g_samples: Vec<f64>,
    u: f64,
}

pub fn discretize<M, G>(kernel: &Kernel<M>, g: G, u: f64, n_nodes: usize) -> Result<DiscretizedFredholm>
where
    M: Fn(f64, f64) -> f64,
    G: Fn(f64) -> f64,
{
    discretize_with(kernel, g, u, &kernel.rule(n_nodes)?)
}

pub fn discretize_with<M, G>(kernel: &Kernel<M>, g: G, u: f64, rule: &QuadratureRule) -> Result<DiscretizedFredholm>
where
    M: Fn(f64, f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !u.is_finite() {
        return Err(Error::NonFinite);
    }
    let nodes = rule.nodes().to_vec();
    let mut kernel_matrix = Vec::with_capacity(nodes.len() * nodes.len());
    for &x in &nodes {
        for &y in &nodes {
            let m = kernel.eval(x, y);
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
            kernel_matrix.push(m);
        }
    }
    let g_samples: Vec<f64> = nodes.iter().map(|&x| g(x)).collect();
    if g_samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(DiscretizedFredholm {
        nodes,
        weights: rule.weights().to_vec(),
        kernel_matrix,
        g_samples,
        u,
    })
}

impl DiscretizedFredholm {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kernel_matrix(&self) -> &[f64] {
        &self.kernel_matrix
    }

    pub fn kernel_at(&self, i: usize, j: usize) -> f64 {
        self.kernel_matrix[i * self.nodes.len() + j]
    }

    pub fn g_samples(&self) -> &[f64] {
        &self.g_samples
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    /// `sqrt(Σ_i Σ_j w_i w_j M_ij^2)`.
    pub fn kernel_norm(&self) -> f64 {
        let n = self.nodes.len();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let m = self.kernel_at(i, j);
                sum += self.weights[i] * self.weights[j] * m * m;
            }
        }
        libm::sqrt(sum)
    }

    pub fn contraction_factor(&self) -> f64 {
        libm::fabs(self.u) * self.kernel_norm()
    }

    /// One Picard step: `g_i + u Σ_j w_j M_ij f_j`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let row = &self.kernel_matrix[i * n..(i + 1) * n];
                let integral: f64 = row
                    .iter()
                    .zip(&self.weights)
                    .zip(f)
                    .map(|((m, w), fj)| m * w * fj)
                    .sum();
                self.g_samples[i] + self.u * integral
            })
            .collect()
    }

    pub fn weighted_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        weighted_l2_distance(&self.weights, x, y)
    }

    /// Weighted L2 distance between `f` and one Picard step applied to it.
    pub fn residual(&self, f: &[f64]) -> f64 {
        self.weighted_distance(&self.apply(f), f)
    }

    /// The linear Nyström system `(I - u M W) f = g`, for direct solution.
    pub fn linear_system(&self) -> (DenseMatrix, Vec<f64>) {
        let n = self.nodes.len();
        let mut m = DenseMatrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                let v = m.get(i, j) - self.u * self.kernel_at(i, j) * self.weights[j];
                m.set(i, j, v);
            }
        }
        (m, self.g_samples.clone())
    }
}

impl FixedPointMap for DiscretizedFredholm {
    type Point = Vec<f64>;

    fn apply(&self, x: &Vec<f64>) -> Vec<f64> {
        DiscretizedFredholm::apply(self, x)
    }

    fn distance(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        self.weighted_distance(x, y)
    }
}

fn weighted_l2_distance(weights: &[f64], x: &[f64], y: &[f64]) -> f64 {
    libm::sqrt(
        weights
            .iter()
            .zip(x.iter().zip(y))
            .map(|(w, (a, b))| w * (a - b) * (a - b))
            .sum(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct FredholmOptions {
    pub rule: StoppingRule,
    /// Starting samples; zero when absent.
    pub initial: Option<Vec<f64>>,
    /// Iterate even when `|u| ‖M‖ >= 1`, relying on divergence detection.
    pub force: bool,
}

impl FredholmOptions {
    pub fn new(rule: StoppingRule) -> Self {
        Self {
            rule,
            initial: None,
            force: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FredholmSolution {
    pub f_samples: Vec<f64>,
    pub fixed_point: FixedPointResult<Vec<f64>>,
    pub kernel_norm: f64,
    /// `|u| * kernel_norm`.
    pub contraction_factor: f64,
}

pub fn is_certified(factor: f64) -> bool {
    (0.0..1.0 - CONTRACTION_MARGIN).contains(&factor)
}

/// Picard iteration on the discretized equation.
pub fn solve_fredholm(
    disc: &DiscretizedFredholm,
    options: &FredholmOptions,
) -> Result<(FredholmSolution, IterationTrace<Vec<f64>>)> {
    let kernel_norm = disc.kernel_norm();
    let factor = libm::fabs(disc.u) * kernel_norm;
    let mut rule = options.rule;
    if is_certified(factor) {
        rule = rule.with_contraction_factor(factor)?;
    } else if !options.force {
        return Err(Error::NotContractive { factor });
    } else {
        rule.q_for_bounds = None;
    }

    let n = disc.len();
    let start = match &options.initial {
        Some(f0) if f0.len() != n => return Err(Error::DimensionMismatch { expected: n, found: f0.len() }),
        Some(f0) if f0.iter().any(|v| !v.is_finite()) => return Err(Error::NonFinite),
        Some(f0) => f0.clone(),
        None => vec![0.0; n],
    };

    let (fixed_point, trace) = banach_iterate(disc, start, &rule)?;
    Ok((
        FredholmSolution {
            f_samples: fixed_point.point.clone(),
            fixed_point,
            kernel_norm,
            contraction_factor: factor,
        },
        trace,
    ))
}

/// `A(f)(t) = ∫_0^1 sin(f(t) - y) / 2 dy`, evaluated in closed form
/// `(cos(f(t) - 1) - cos(f(t))) / 2` at each sample.
pub fn example4_map(f_samples: &[f64]) -> Result<Vec<f64>> {
    if f_samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(f_samples.iter().map(|&v| example4_value(v)).collect())
}

fn example4_value(v: f64) -> f64 {
    0.5 * (libm::cos(v - 1.0) - libm::cos(v))
}

/// The sine-kernel map on a quadrature grid over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example4Map {
    rule: QuadratureRule,
}

impl Example4Map {
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes < 2 {
            return Err(Error::Domain("need at least two nodes"));
        }
        Ok(Self {
            rule: QuadratureRule::gauss_legendre(n_nodes, 0.0, 1.0)?,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.rule.weights()
    }
}

impl FixedPointMap for Example4Map {
    type Point = Vec<f64>;

    fn apply(&self, x: &Vec<f64>) -> Vec<f64> {
        x.iter().map(|&v| example4_value(v)).collect()
    }

    fn distance(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        weighted_l2_distance(self.rule.weights(), x, y)
    }
}

/// Iterates the sine-kernel map from `initial(t)` sampled at `n_nodes`
/// Gauss–Legendre nodes on `[0, 1]`, with contraction factor 1/2.
///
/// The reported `kernel_norm` is the Lipschitz constant 1 of `sin` and the
/// prefactor 1/2 plays the role of `u`.
pub fn solve_example4(
    n_nodes: usize,
    initial: impl Fn(f64) -> f64,
    rule: &StoppingRule,
) -> Result<(FredholmSolution, IterationTrace<Vec<f64>>)> {
    let map = Example4Map::new(n_nodes)?;
    let start: Vec<f64> = map.nodes().iter().map(|&t| initial(t)).collect();
    if start.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let rule = rule.with_contraction_factor(EXAMPLE4_FACTOR)?;
    let (fixed_point, trace) = banach_iterate(&map, start, &rule)?;
    Ok((
        FredholmSolution {
            f_samples: fixed_point.point.clone(),
            fixed_point,
            kernel_norm: 1.0,
            contraction_factor: EXAMPLE4_FACTOR,
        },
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Status;
    use crate::oracle;

    fn rule(tol: f64) -> StoppingRule {
        StoppingRule::new(tol, 100_000).unwrap()
    }

    #[test]
    fn kernel_norms() {
        let zero = Kernel::new(|_, _| 0.0, 0.0, 1.0).unwrap();
        assert_eq!(kernel_l2_norm(&zero, 8).unwrap(), 0.0);
        let one = Kernel::new(|_, _| 1.0, 0.0, 1.0).unwrap();
        assert!((kernel_l2_norm(&one, 8).unwrap() - 1.0).abs() < 1e-14);
        let xy = Kernel::new(|x, y| x * y, 0.0, 1.0).unwrap();
        assert!((kernel_l2_norm(&xy, 64).unwrap() - 1.0 / 3.0).abs() <= 1e-6);
        assert!(kernel_l2_norm(&xy, 1).is_err());
        let bad = Kernel::new(|x, _| 1.0 / x, -1.0, 1.0).unwrap();
        // Odd node count puts a node at 0.
        assert_eq!(kernel_l2_norm(&bad, 3), Err(Error::NonFinite));
    }

    #[test]
    fn discretization_shape() {
        let xy = Kernel::new(|x, y| x * y, 0.0, 1.0).unwrap();
        let d = discretize(&xy, |x| x, 1.0, 4).unwrap();
        assert_eq!(d.len(), 4);
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(d.kernel_at(i, j), d.nodes()[i] * d.nodes()[j]);
            }
        }
        assert_eq!(d.g_samples(), d.nodes());
        assert!(discretize(&xy, |x| x, f64::NAN, 4).is_err());
        assert_eq!(discretize(&xy, |_| f64::INFINITY, 1.0, 4), Err(Error::NonFinite));
    }

    #[test]
    fn zero_kernel_solves_in_one_step() {
        let zero = Kernel::new(|_, _| 0.0, 0.0, 1.0).unwrap();
        let d = discretize(&zero, |x| x, 1.0, 4).unwrap();
        let (sol, _) = solve_fredholm(&d, &FredholmOptions::new(rule(1e-12))).unwrap();
        assert_eq!(sol.f_samples, d.g_samples());
        assert_eq!(sol.fixed_point.iterations, 1);
    }

    #[test]
    fn separable_kernel_closed_form() {
        let xy = Kernel::new(|x, y| x * y, 0.0, 1.0).unwrap();
        for &u in &[1.0, -2.0, 0.5] {
            let d = discretize(&xy, |x| x, u, 64).unwrap();
            let (sol, trace) = solve_fredholm(&d, &FredholmOptions::new(rule(1e-10))).unwrap();
            assert_eq!(sol.fixed_point.status, Status::Converged);
            let err = d
                .nodes()
                .iter()
                .zip(&sol.f_samples)
                .map(|(x, f)| (f - 3.0 * x / (3.0 - u)).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-6, "u={u}: {err}");
            // The rank-one kernel attains the bound exactly, so late ratios
            // carry cancellation noise of order eps / step.
            let steps = trace.step_distances();
            for (k, r) in trace.step_ratios().enumerate() {
                let r = r.unwrap();
                let noise = 1e3 * f64::EPSILON / steps[k];
                assert!(r <= sol.contraction_factor + 1e-9 + noise, "u={u}: {r}");
            }
        }
    }

    #[test]
    fn boundary_factor_is_refused() {
        let xy = Kernel::new(|x, y| x * y, 0.0, 1.0).unwrap();
        let d = discretize(&xy, |x| x, 3.0, 64).unwrap();
        assert!(d.contraction_factor() >= 1.0 - 1e-6);
        assert!(matches!(
            solve_fredholm(&d, &FredholmOptions::new(rule(1e-10))),
            Err(Error::NotContractive { .. })
        ));
        let d = discretize(&xy, |x| x, 6.0, 16).unwrap();
        let mut opts = FredholmOptions::new(rule(1e-10));
        opts.force = true;
        let (sol, _) = solve_fredholm(&d, &opts).unwrap();
        assert_eq!(sol.fixed_point.status, Status::DivergenceDetected);
    }

    #[test]
    fn matches_direct_nystrom_solution() {
        let k = Kernel::new(|x: f64, y: f64| libm::exp(-(x - y) * (x - y)), -1.0, 2.0).unwrap();
        let d = discretize(&k, libm::cos, 0.2, 20).unwrap();
        let (sol, _) = solve_fredholm(&d, &FredholmOptions::new(rule(1e-12))).unwrap();
        let (m, g) = d.linear_system();
        let direct = oracle::dense_solve(&m, &g).unwrap();
        let err = d.weighted_distance(&sol.f_samples, &direct);
        assert!(err <= sol.fixed_point.a_posteriori_bound.unwrap() + 1e-13);
    }

    #[test]
    fn initial_guess_validation() {
        let one = Kernel::new(|_, _| 1.0, 0.0, 1.0).unwrap();
        let d = discretize(&one, |_| 1.0, 0.5, 4).unwrap();
        let mut opts = FredholmOptions::new(rule(1e-10));
        opts.initial = Some(vec![0.0; 3]);
        assert!(matches!(solve_fredholm(&d, &opts), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn example4_closed_form() {
        let out = example4_map(&[0.0, 0.0]).unwrap();
        let expected = 0.5 * (libm::cos(1.0) - 1.0);
        assert!((out[0] - expected).abs() < 1e-15);
        assert_eq!(out[0], out[1]);
        assert!((expected + 0.229_848_847_065_930_1).abs() < 1e-12);
        assert_eq!(example4_map(&[f64::NAN]), Err(Error::NonFinite));
    }

    #[test]
    fn example4_fixed_point() {
        let (a, trace) = solve_example4(8, |_| 0.0, &rule(1e-12)).unwrap();
        let (b, _) = solve_example4(8, |_| 1.0, &rule(1e-12)).unwrap();
        assert!(a.fixed_point.converged() && b.fixed_point.converged());
        let c = a.f_samples[0];
        assert!(a.f_samples.iter().all(|&v| v == c));
        assert!((c - b.f_samples[0]).abs() <= 2e-12);
        assert!((c + 0.364_838_18).abs() < 1e-8, "{c}");
        for r in trace.step_ratios().flatten() {
            assert!(r <= 0.5 + 1e-9);
        }
    }
}
