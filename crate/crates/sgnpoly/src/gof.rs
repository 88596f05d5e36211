//! Goodness of fit of simulated statistics to the standard normal.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    /// `sup_x |F_n(x) − Φ(x)|`
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Sample mean and standard deviation (denominator `n − 1`).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One-sample Kolmogorov–Smirnov test against `N(0, 1)`.
///
/// The p-value uses the asymptotic Kolmogorov series at Stephens' corrected
/// statistic `(√n + 0.12 + 0.11/√n)·D`, accurate for `n ≥ 5`.
pub fn ks_standard_normal(sample: &[f64]) -> KsResult {
    let n = sample.len();
    if n == 0 {
        return KsResult { statistic: f64::NAN, p_value: f64::NAN, n };
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let phi = Normal::standard();
    let nf = n as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = phi.cdf(x);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    let root = nf.sqrt();
    KsResult { statistic: d, p_value: kolmogorov_sf((root + 0.12 + 0.11 / root) * d), n }
}

/// `P(K > λ) = 2Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += if j as u32 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
