//! Self-check of the matrix-form polygon sums against direct enumeration.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sgnpoly_core::graph::{sample_adjacency_with, AdjacencyMatrix};
use sgnpoly_core::rng::{derive_seed, stream};
use sgnpoly_core::stats::{brute_force_polygon, eta_hat, polygon_sums};

/// Relative tolerance between the two evaluation paths.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub trials: usize,
    pub comparisons: usize,
    /// Largest `|fast − slow| / max(|fast|, |slow|)` over sums larger than
    /// their rounding floor.
    pub max_relative_error: f64,
    /// Trial indices whose sums disagreed.
    pub mismatches: Vec<usize>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Rounding scale `10⁻¹³·‖A − cc′‖_F^m` of an order-`m` sum.
pub fn rounding_floor(a: &AdjacencyMatrix, c: &[f64], m: usize) -> f64 {
    let n = a.n();
    let mut frob_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            let aij = if a.has_edge(i, j) { 1.0 } else { 0.0 };
            frob_sq += (aij - c[i] * c[j]) * (aij - c[i] * c[j]);
        }
    }
    1e-13 * frob_sq.powf(m as f64 / 2.0)
}

/// Agreement to [`ORACLE_TOLERANCE`] relative, or within the rounding floor
/// when the sum cancels to nearly zero.
pub fn sums_agree(a: &AdjacencyMatrix, c: &[f64], m: usize, fast: f64, slow: f64) -> bool {
    let diff = (fast - slow).abs();
    diff <= ORACLE_TOLERANCE * fast.abs().max(slow.abs()) || diff <= rounding_floor(a, c, m)
}

/// `trials` random graphs with `n ∈ [5, 12]`; even trials use a random
/// center, odd trials use `η̂`.
pub fn oracle_check(trials: usize, seed: u64) -> OracleReport {
    let mut report = OracleReport { trials, comparisons: 0, max_relative_error: 0.0, mismatches: Vec::new() };
    for trial in 0..trials {
        let mut r = stream(seed, &[trial as u64]);
        let n = r.random_range(5..=12);
        let density = r.random_range(0.15..0.85);
        let graph_seed = derive_seed(seed, &[trial as u64, 1]);
        let g = sample_adjacency_with(n, graph_seed, |_, _| density).expect("density is a probability");
        let center: Vec<f64> = match eta_hat(&g) {
            Ok(eta) if trial % 2 == 1 => eta.values,
            _ => (0..n).map(|_| r.random_range(0.0..0.8)).collect(),
        };
        let sums = polygon_sums(&g, &center).expect("center has length n");
        let mut ok = true;
        for (m, fast) in [(3, sums.triangle), (4, sums.quadrilateral)] {
            let slow = brute_force_polygon(&g, &center, m).expect("n is within the enumeration guard");
            report.comparisons += 1;
            let scale = fast.abs().max(slow.abs());
            if scale > rounding_floor(&g, &center, m) {
                report.max_relative_error = report.max_relative_error.max((fast - slow).abs() / scale);
            }
            ok &= sums_agree(&g, &center, m, fast, slow);
        }
        if !ok {
            report.mismatches.push(trial);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_passes_and_is_deterministic() {
        let a = oracle_check(40, 3);
        assert!(a.passed(), "{a:?}");
        assert_eq!(a.comparisons, 80);
        assert_eq!(a, oracle_check(40, 3));
    }

    #[test]
    fn agreement_rejects_real_differences() {
        let (g, _) = AdjacencyMatrix::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let c = [0.0; 3];
        assert!(sums_agree(&g, &c, 3, 6.0, 6.0 + 1e-12));
        assert!(!sums_agree(&g, &c, 3, 6.0, 6.1));
    }
}
