//! JSON certificate documents.
//!
//! Keys are emitted in alphabetical order (struct fields are declared sorted,
//! maps are `BTreeMap`) and non-finite numbers are omitted, so identical
//! inputs always produce identical bytes.

use std::collections::BTreeMap;

use fixpoint_core::fredholm::FredholmSolution;
use fixpoint_core::scalar::ScalarSolution;
use fixpoint_core::sparse::{ContractionCertificate, CsrMatrix, NormKind, SolveReport};
use fixpoint_core::FixedPointResult;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "1";

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemShape {
    pub cols: usize,
    pub nnz: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_posteriori_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_priori_bound: Option<f64>,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub status: String,
}

impl SolveSummary {
    pub fn new<P>(result: &FixedPointResult<P>, residual: f64) -> Self {
        Self {
            a_posteriori_bound: result.a_posteriori_bound.and_then(finite),
            a_priori_bound: result.a_priori_bound.and_then(finite),
            iterations: result.iterations,
            residual: finite(residual),
            status: result.status.as_str().to_string(),
        }
    }
}

/// Certificate for a sparse linear system, optionally with the solve outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub determinant_diagnostic: Option<f64>,
    pub norms: BTreeMap<String, f64>,
    pub problem: ProblemShape,
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    pub verdict: String,
}

impl CertificateDocument {
    /// `norms` selects which norms are listed; `None` lists all three.
    pub fn new(a: &CsrMatrix, certificate: &ContractionCertificate, norms: Option<NormKind>) -> Self {
        let listed = certificate
            .norms
            .iter()
            .filter(|(k, _)| norms.is_none_or(|sel| sel == *k))
            .filter_map(|(k, v)| finite(v).map(|v| (k.as_str().to_string(), v)))
            .collect();
        Self {
            determinant_diagnostic: certificate.determinant_diagnostic.and_then(finite),
            norms: listed,
            problem: ProblemShape {
                cols: a.n_cols(),
                nnz: a.nnz(),
                rows: a.n_rows(),
            },
            schema_version: SCHEMA_VERSION.to_string(),
            solve: None,
            verdict: certificate.verdict.as_str().to_string(),
        }
    }

    pub fn with_solve(mut self, report: &SolveReport) -> Self {
        self.solve = Some(SolveSummary::new(&report.fixed_point, report.residual_norm));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredholmProblem {
    pub a: f64,
    pub b: f64,
    pub g: String,
    pub kernel: String,
    pub nodes: usize,
    pub quadrature: String,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredholmDocument {
    pub contraction_factor: f64,
    pub kernel_norm: f64,
    pub problem: FredholmProblem,
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    pub verdict: String,
}

impl FredholmDocument {
    pub fn new(problem: FredholmProblem, kernel_norm: f64, contraction_factor: f64, verdict: &str) -> Self {
        Self {
            contraction_factor,
            kernel_norm,
            problem,
            schema_version: SCHEMA_VERSION.to_string(),
            solve: None,
            verdict: verdict.to_string(),
        }
    }

    pub fn with_solve(mut self, solution: &FredholmSolution, residual: f64) -> Self {
        self.solve = Some(SolveSummary::new(&solution.fixed_point, residual));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarProblemInfo {
    pub a: f64,
    pub b: f64,
    pub expression: String,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<f64>,
    pub lipschitz_estimate: f64,
    pub problem: ScalarProblemInfo,
    pub schema_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSummary>,
    pub verdict: String,
}

impl ScalarDocument {
    pub fn new(problem: ScalarProblemInfo, lipschitz_estimate: f64, verdict: &str) -> Self {
        Self {
            fixed_point: None,
            lipschitz_estimate,
            problem,
            schema_version: SCHEMA_VERSION.to_string(),
            solve: None,
            verdict: verdict.to_string(),
        }
    }

    pub fn with_solve(mut self, solution: &ScalarSolution) -> Self {
        self.fixed_point = finite(solution.fixed_point.point);
        self.solve = Some(SolveSummary::new(&solution.fixed_point, solution.residual));
        self
    }
}

pub fn write_json<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("documents contain only finite numbers");
    text.push('\n');
    text
}

pub fn write_certificate_json(doc: &CertificateDocument) -> String {
    write_json(doc)
}

pub fn read_certificate_json(text: &str) -> serde_json::Result<CertificateDocument> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fixpoint_core::sparse::{certify, fixtures};
    use proptest::prelude::*;

    #[test]
    fn identity_certificate() {
        let a = CsrMatrix::identity(3);
        let doc = CertificateDocument::new(&a, &certify(&a).unwrap(), None);
        assert_eq!(doc.verdict, "contractive");
        assert_eq!(doc.norms.len(), 3);
        assert!(doc.norms.values().all(|&v| v == 0.0));
        let text = write_certificate_json(&doc);
        assert_eq!(read_certificate_json(&text).unwrap(), doc);
    }

    #[test]
    fn example7_certificate() {
        let a = fixtures::example7_matrix();
        let doc = CertificateDocument::new(&a, &certify(&a).unwrap(), None);
        assert_eq!(doc.verdict, "not_contractive");
        assert!((doc.determinant_diagnostic.unwrap() - 0.5).abs() <= 1e-12);
        assert_eq!(doc.norms["infinity"], 1.5);
        assert_eq!(doc.problem, ProblemShape { cols: 3, nnz: 6, rows: 3 });
        let only = CertificateDocument::new(&a, &certify(&a).unwrap(), Some(NormKind::One));
        assert_eq!(only.norms.keys().collect::<Vec<_>>(), vec!["one"]);
    }

    #[test]
    fn keys_are_sorted() {
        let a = fixtures::example7_matrix();
        let doc = CertificateDocument::new(&a, &certify(&a).unwrap(), None);
        let text = write_certificate_json(&doc);
        let keys: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    fn finite_f64() -> impl Strategy<Value = f64> {
        prop::num::f64::NORMAL | prop::num::f64::ZERO
    }

    proptest! {
        #[test]
        fn certificate_round_trip(
            det in prop::option::of(finite_f64()),
            norms in prop::collection::btree_map("[a-z]{1,8}", finite_f64(), 0..4),
            rows in 0usize..1000, cols in 0usize..1000, nnz in 0usize..10_000,
            solve in prop::option::of((prop::option::of(finite_f64()), prop::option::of(finite_f64()), 0usize..100_000, prop::option::of(finite_f64()), "[a-z_]{1,20}")),
            verdict in "[a-z_]{1,16}",
        ) {
            let doc = CertificateDocument {
                determinant_diagnostic: det,
                norms,
                problem: ProblemShape { cols, nnz, rows },
                schema_version: SCHEMA_VERSION.to_string(),
                solve: solve.map(|(post, prior, iterations, residual, status)| SolveSummary {
                    a_posteriori_bound: post, a_priori_bound: prior, iterations, residual, status,
                }),
                verdict,
            };
            let text = write_certificate_json(&doc);
            prop_assert_eq!(read_certificate_json(&text).unwrap(), doc);
        }
    }
}
