//! Normalized statistics and level-α tests.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::graph::AdjacencyMatrix;
use crate::numeric::{normal_quantile, normal_sf};
use crate::stats;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestKind {
    /// Signed Triangle, two-sided.
    SgnT,
    /// Signed Quadrilateral, one-sided (upper tail).
    SgnQ,
    /// Triangle Signed Cycle under the Erdős–Rényi normalization, two-sided.
    SignedCycle3,
}

impl TestKind {
    pub const ALL: [TestKind; 3] = [TestKind::SgnT, TestKind::SgnQ, TestKind::SignedCycle3];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::SgnT => "sgnt",
            TestKind::SgnQ => "sgnq",
            TestKind::SignedCycle3 => "cycle3",
        }
    }

    /// Parse a CLI-style name (`sgnt`, `sgnq`, `cycle3`), case-insensitive.
    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(name.trim()))
    }
}

/// Outcome of one test on one graph.
///
/// `nuisance` is `‖η̂‖² − 1` for the polygon tests and `α̂_n` for the
/// Signed Cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: TestKind,
    pub statistic: f64,
    pub nuisance: f64,
    pub z: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainError(alpha))
    }
}

fn two_sided(test: TestKind, statistic: f64, nuisance: f64, z: f64, alpha: f64) -> Result<TestReport> {
    let critical = normal_quantile(1.0 - alpha / 2.0)?;
    let p_value = (2.0 * normal_sf(z.abs())).min(1.0);
    Ok(TestReport { test, statistic, nuisance, z, p_value, alpha, reject: z.abs() >= critical })
}

/// `‖η̂‖² − 1 = 1′A²1/1′A1 − 1`, a consistent estimate of `‖θ‖²` under the null.
pub fn estimate_theta_norm_sq(a: &AdjacencyMatrix) -> Result<f64> {
    let volume = a.volume();
    if volume == 0 {
        return Err(Error::DegenerateGraph);
    }
    // Integer numerator keeps small graphs exact.
    let sum_sq: u128 = (0..a.n()).map(|i| (a.degree(i) as u128).pow(2)).sum();
    Ok(sum_sq as f64 / volume as f64 - 1.0)
}

fn positive_nuisance(a: &AdjacencyMatrix) -> Result<f64> {
    let e = estimate_theta_norm_sq(a)?;
    if e > 0.0 {
        Ok(e)
    } else {
        Err(Error::NonpositiveNuisance(e))
    }
}

/// Reject when `|T_n| / √(6(‖η̂‖² − 1)³) ≥ z_{α/2}`.
pub fn sgn_t_test(a: &AdjacencyMatrix, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let e = positive_nuisance(a)?;
    t_report(stats::sgn_t(a)?.value, e, alpha)
}

fn t_report(t: f64, e: f64, alpha: f64) -> Result<TestReport> {
    two_sided(TestKind::SgnT, t, e, t / (6.0 * e * e * e).sqrt(), alpha)
}

/// Reject when `(Q_n − 2(‖η̂‖² − 1)²) / √(8(‖η̂‖² − 1)⁴) ≥ z_α`.
pub fn sgn_q_test(a: &AdjacencyMatrix, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let e = positive_nuisance(a)?;
    q_report(stats::sgn_q(a)?.value, e, alpha)
}

fn q_report(q: f64, e: f64, alpha: f64) -> Result<TestReport> {
    let e2 = e * e;
    let z = (q - 2.0 * e2) / (8.0 * e2 * e2).sqrt();
    let critical = normal_quantile(1.0 - alpha)?;
    Ok(TestReport {
        test: TestKind::SgnQ,
        statistic: q,
        nuisance: e,
        z,
        p_value: normal_sf(z),
        alpha,
        reject: z >= critical,
    })
}

/// Signed triangle cycle `C_n^(3)` standardized by its Erdős–Rényi null
/// variance `6n(n−1)(n−2)(α̂(1−α̂))³`.
pub fn signed_cycle_test(a: &AdjacencyMatrix, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let alpha_hat = stats::alpha_hat(a)?;
    let n = a.n() as f64;
    let var_edge = alpha_hat * (1.0 - alpha_hat);
    if n < 3.0 || var_edge <= 0.0 {
        return Err(Error::NonpositiveNuisance(var_edge));
    }
    let c = stats::signed_cycle(a, 3)?;
    let z = c / (6.0 * n * (n - 1.0) * (n - 2.0) * var_edge * var_edge * var_edge).sqrt();
    two_sided(TestKind::SignedCycle3, c, alpha_hat, z, alpha)
}

pub fn run_test(kind: TestKind, a: &AdjacencyMatrix, alpha: f64) -> Result<TestReport> {
    match kind {
        TestKind::SgnT => sgn_t_test(a, alpha),
        TestKind::SgnQ => sgn_q_test(a, alpha),
        TestKind::SignedCycle3 => signed_cycle_test(a, alpha),
    }
}

/// Run several tests on one graph, sharing the polygon pass between SgnT and
/// SgnQ. Results come back in the order of `kinds`, each with its own error.
pub fn run_tests(kinds: &[TestKind], a: &AdjacencyMatrix, alpha: f64) -> Vec<Result<TestReport>> {
    let polygons = kinds.contains(&TestKind::SgnT) && kinds.contains(&TestKind::SgnQ);
    let shared = if polygons {
        check_alpha(alpha).and_then(|()| {
            let e = positive_nuisance(a)?;
            let eta = stats::eta_hat(a)?;
            Ok((e, stats::polygon_sums(a, &eta.values)?))
        })
    } else {
        Err(Error::ZeroMatrix)
    };
    kinds
        .iter()
        .map(|&kind| match (kind, &shared) {
            (TestKind::SgnT, _) | (TestKind::SgnQ, _) if !polygons => run_test(kind, a, alpha),
            (TestKind::SgnT, Ok((e, sums))) => t_report(sums.triangle, *e, alpha),
            (TestKind::SgnQ, Ok((e, sums))) => q_report(sums.quadrilateral, *e, alpha),
            (TestKind::SgnT | TestKind::SgnQ, Err(err)) => Err(err.clone()),
            (TestKind::SignedCycle3, _) => signed_cycle_test(a, alpha),
        })
        .collect()
}
