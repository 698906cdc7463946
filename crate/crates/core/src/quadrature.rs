//! Quadrature rules on a finite interval.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes (ascending) and positive weights of a quadrature rule on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Rule family used by the Nyström discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    /// Composite Gauss–Legendre on `panels` equal sub-intervals.
    GaussLegendre { panels: usize },
    /// Composite trapezoid rule on equally spaced nodes.
    Trapezoid,
}

impl Default for QuadratureKind {
    fn default() -> Self {
        QuadratureKind::GaussLegendre { panels: 1 }
    }
}

impl QuadratureRule {
    /// Builds a rule with `n_nodes` points in total.
    pub fn build(kind: QuadratureKind, n_nodes: usize, a: f64, b: f64) -> Result<Self> {
        match kind {
            QuadratureKind::GaussLegendre { panels } => {
                if panels == 0 || !n_nodes.is_multiple_of(panels) {
                    return Err(Error::Domain("node count must be a positive multiple of the panel count"));
                }
                Self::composite_gauss_legendre(n_nodes / panels, panels, a, b)
            }
            QuadratureKind::Trapezoid => Self::trapezoid(n_nodes, a, b),
        }
    }

    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Self> {
        Self::composite_gauss_legendre(n, 1, a, b)
    }

    pub fn composite_gauss_legendre(points_per_panel: usize, panels: usize, a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        if points_per_panel == 0 || panels == 0 {
            return Err(Error::Domain("need at least one point and one panel"));
        }
        let (ref_nodes, ref_weights) = legendre_reference(points_per_panel);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(points_per_panel * panels);
        let mut weights = Vec::with_capacity(points_per_panel * panels);
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            for (t, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + 0.5 * h * t);
                weights.push(0.5 * h * w);
            }
        }
        Ok(Self { nodes, weights })
    }

    pub fn trapezoid(n: usize, a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        if n < 2 {
            return Err(Error::Domain("trapezoid rule needs at least two nodes"));
        }
        let h = (b - a) / (n - 1) as f64;
        let nodes = (0..n)
            .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
            .collect();
        let weights = (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
            .collect();
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::Domain("interval must satisfy a < b with finite ends"))
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Newton iteration on `P_n` from the Tricomi initial guesses; roots are
/// computed for the upper half and mirrored.
fn legendre_reference(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if libm::fabs(dx) <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i-th largest root.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let nf = n as f64;
    let dp = nf * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}
