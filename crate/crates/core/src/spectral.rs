//! Eigen-diagnostics of `Ω`: the population center `η*`, the residual
//! `Ω̃ = Ω − η*η*′`, trace powers, and phase-diagram placement.

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::linalg::{is_symmetric, leading_eigenpairs};
use crate::numeric::compensated_sum;
use crate::{Error, Result};

/// `η* = Ω1/√(1′Ω1)`.
pub fn eta_star(omega: &DMatrix<f64>) -> Result<Vec<f64>> {
    let row_sums: Vec<f64> = omega.row_iter().map(|r| compensated_sum(r.iter().copied())).collect();
    let v0 = compensated_sum(row_sums.iter().copied());
    if !(v0 > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let root = v0.sqrt();
    Ok(row_sums.into_iter().map(|s| s / root).collect())
}

/// `Ω̃ = Ω − η*(η*)′`. Satisfies `Ω̃1 = 0` up to rounding.
pub fn omega_tilde(omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eta = eta_star(omega)?;
    let n = omega.nrows();
    Ok(DMatrix::from_fn(n, n, |i, j| omega[(i, j)] - eta[i] * eta[j]))
}

/// Leading `K` eigenpairs of `Ω` with the derived diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumInfo {
    /// Sorted by `|λ|` descending, ties by value descending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors, `eigenvectors[k]` paired with `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
    pub sqrt_lambda1: f64,
    /// `|λ₂|/λ₁`, zero when `K = 1`.
    pub ratio: f64,
    /// `|λ₂|/√λ₁`, zero when `K = 1`.
    pub snr: f64,
    /// `h_k = 1′ξ_{k+1} / 1′ξ₁` for `k = 1, …, K − 1`.
    pub h: Vec<f64>,
}

impl SpectrumInfo {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `diag(λ₂, …, λ_K)` as a vector.
    pub fn lambda_rest(&self) -> &[f64] {
        &self.eigenvalues[1..]
    }
}

fn first_significant(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    v.iter().copied().find(|x| x.abs() > 1e-10 * scale).unwrap_or(0.0)
}

/// The `k` leading eigenpairs of symmetric `Ω`, sign-normalized so that
/// `1′ξ₁ > 0` and every other `ξ_k` has a positive first significant entry.
pub fn spectrum(omega: &DMatrix<f64>, k: usize) -> Result<SpectrumInfo> {
    let n = omega.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(alloc::format!("need 1 ≤ K ≤ n, got K = {k}, n = {n}")));
    }
    if !is_symmetric(omega, 1e-12) {
        return Err(Error::InvalidInput("Ω is not symmetric".into()));
    }
    let (values, vectors) = leading_eigenpairs(omega, k)?;
    let mut eigenvectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (idx, col) in vectors.column_iter().enumerate() {
        let mut v: Vec<f64> = col.iter().copied().collect();
        let sign_key = if idx == 0 {
            let s = compensated_sum(v.iter().copied());
            if s.abs() > 1e-12 * (n as f64).sqrt() {
                s
            } else {
                first_significant(&v)
            }
        } else {
            first_significant(&v)
        };
        if sign_key < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvectors.push(v);
    }

    let lambda1 = values[0];
    if !(lambda1 > 0.0) {
        return Err(Error::InvalidInput(alloc::format!("leading eigenvalue {lambda1} is not positive")));
    }
    let lambda2 = values.get(1).map_or(0.0, |l| l.abs());
    let sums: Vec<f64> = eigenvectors.iter().map(|v| compensated_sum(v.iter().copied())).collect();
    if sums[0] <= 0.0 {
        return Err(Error::ConditionViolated("1′ξ₁ = 0, h is undefined".into()));
    }
    let h = sums[1..].iter().map(|s| s / sums[0]).collect();
    Ok(SpectrumInfo {
        sqrt_lambda1: lambda1.sqrt(),
        ratio: lambda2 / lambda1,
        snr: lambda2 / lambda1.sqrt(),
        eigenvalues: values,
        eigenvectors,
        h,
    })
}

/// `tr(X^m)` for symmetric `X`, `m ∈ {3, 4}`, from one product `X²`.
pub fn tr_power_direct(x: &DMatrix<f64>, m: usize) -> Result<f64> {
    let x2 = x * x;
    match m {
        3 => Ok(compensated_sum(x2.iter().zip(x.iter()).map(|(a, b)| a * b))),
        4 => Ok(compensated_sum(x2.iter().map(|a| a * a))),
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// Leading-order `tr(Ω̃^m)` as a polynomial in `Λ = diag(λ₂, …, λ_K)` and
/// `h`. With `s_j = h′Λ^j h`:
///
/// ```text
/// m = 3:  tr Λ³ + 3s₃ + 3s₁s₂ + s₁³
/// m = 4:  tr Λ⁴ + s₁⁴ + 2s₂² + 4s₁²s₂ + 4s₄ + 4s₁s₃
/// ```
///
/// Both equal `(h² + 1)^m λ₂^m` when `K = 2`.
pub fn tr_closed_form(spec: &SpectrumInfo, m: usize) -> Result<f64> {
    if spec.k() < 2 {
        return Err(Error::NullModel);
    }
    let lam = spec.lambda_rest();
    let tr = |p: i32| compensated_sum(lam.iter().map(|l| l.powi(p)));
    let s = |p: i32| compensated_sum(lam.iter().zip(&spec.h).map(|(l, h)| h * h * l.powi(p)));
    match m {
        3 => {
            let s1 = s(1);
            Ok(tr(3) + 3.0 * s(3) + 3.0 * s1 * s(2) + s1 * s1 * s1)
        }
        4 => {
            let (s1, s2) = (s(1), s(2));
            Ok(tr(4) + s1.powi(4) + 2.0 * s2 * s2 + 4.0 * s1 * s1 * s2 + 4.0 * s(4) + 4.0 * s1 * s(3))
        }
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// SNR cut-offs for [`phase_classify`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseThresholds {
    pub lo: f64,
    pub hi: f64,
}

impl Default for PhaseThresholds {
    fn default() -> Self {
        PhaseThresholds { lo: 1.0 / 3.0, hi: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Possibility,
    Impossibility,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    /// `√λ₁`
    pub x: f64,
    /// `|λ₂|/λ₁`
    pub y: f64,
    pub snr: f64,
    pub region: Region,
}

/// Place `Ω` (rank `k`) in the phase diagram.
pub fn phase_classify(omega: &DMatrix<f64>, k: usize, thresholds: PhaseThresholds) -> Result<PhasePoint> {
    if omega.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let spec = spectrum(omega, k)?;
    Ok(classify_spectrum(&spec, thresholds))
}

pub fn classify_spectrum(spec: &SpectrumInfo, thresholds: PhaseThresholds) -> PhasePoint {
    let region = if spec.snr > thresholds.hi {
        Region::Possibility
    } else if spec.snr < thresholds.lo {
        Region::Impossibility
    } else {
        Region::Boundary
    };
    PhasePoint { x: spec.sqrt_lambda1, y: spec.ratio, snr: spec.snr, region }
}

/// Spectral norm of a symmetric matrix (largest `|λ|`).
pub fn spectral_norm(x: &DMatrix<f64>) -> Result<f64> {
    let (values, _) = leading_eigenpairs(x, 1)?;
    Ok(values[0].abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sorted_symmetric_eigen;
    use crate::model::{build_omega, CommunityMatrix, DcmmParams, DegreeVector, MembershipMatrix};
    use crate::rng::stream;
    use nalgebra::DVector;
    use rand::Rng;

    fn example1(n: usize, b: f64, norm: f64) -> DcmmParams {
        let theta = DegreeVector::new(alloc::vec![1.0; n]).rescaled_to(norm);
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let pi = MembershipMatrix::from_labels(&labels, 2).unwrap();
        DcmmParams::new(theta, pi, CommunityMatrix::example1(2, b)).unwrap()
    }

    fn random_omega(n: usize, k: usize, seed: u64) -> (DcmmParams, DMatrix<f64>) {
        let mut rng = stream(seed, &[]);
        let theta = DegreeVector::new((0..n).map(|_| rng.random_range(0.05..0.3)).collect());
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let mut p = DMatrix::from_element(k, k, 0.0);
        for a in 0..k {
            p[(a, a)] = 1.0;
            for b in (a + 1)..k {
                let v = rng.random_range(0.1..0.9);
                p[(a, b)] = v;
                p[(b, a)] = v;
            }
        }
        let params =
            DcmmParams::new(theta, MembershipMatrix::from_rows(&rows).unwrap(), CommunityMatrix::new(p).unwrap())
                .unwrap();
        let omega = build_omega(&params).unwrap();
        (params, omega)
    }

    #[test]
    fn null_eta_star_is_theta() {
        let theta = [0.1, 0.4, 0.2, 0.3];
        let omega = DMatrix::from_fn(4, 4, |i, j| theta[i] * theta[j]);
        let eta = eta_star(&omega).unwrap();
        for (e, t) in eta.iter().zip(theta) {
            assert!((e - t).abs() < 1e-15);
        }
        assert!(omega_tilde(&omega).unwrap().iter().all(|x| x.abs() < 1e-16));
    }

    #[test]
    fn constant_omega_eta_star() {
        let omega = DMatrix::from_element(5, 5, 0.09);
        for e in eta_star(&omega).unwrap() {
            assert!((e - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let zero = DMatrix::zeros(3, 3);
        assert_eq!(eta_star(&zero).unwrap_err(), Error::ZeroMatrix);
        assert_eq!(omega_tilde(&zero).unwrap_err(), Error::ZeroMatrix);
        assert_eq!(phase_classify(&zero, 1, PhaseThresholds::default()).unwrap_err(), Error::ZeroMatrix);
    }

    #[test]
    fn omega_tilde_annihilates_ones() {
        for seed in 0..5 {
            let (_, omega) = random_omega(60, 3, seed);
            let eta = eta_star(&omega).unwrap();
            let total: f64 = omega.iter().sum::<f64>() - eta.iter().sum::<f64>().powi(2);
            assert!(total.abs() < 1e-10);
            let tilde = omega_tilde(&omega).unwrap();
            for r in tilde.row_iter() {
                assert!(r.iter().sum::<f64>().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn omega_tilde_has_rank_k_minus_one() {
        // Ω − Ω11′Ω/(1′Ω1) is a rank-one downdate inside range(Ω) that also
        // kills 1, so exactly K − 1 singular values survive.
        let rank = |m: &DMatrix<f64>| {
            let sv = m.singular_values();
            let top = sv.max();
            sv.iter().filter(|&&s| s > 1e-10 * top).count()
        };
        let omega = build_omega(&example1(200, 0.6, 9.0)).unwrap();
        assert_eq!(rank(&omega), 2);
        assert_eq!(rank(&omega_tilde(&omega).unwrap()), 1);
        for (k, seed) in [(2, 9), (3, 10), (4, 11)] {
            let (_, omega) = random_omega(80, k, seed);
            assert_eq!(rank(&omega), k);
            assert_eq!(rank(&omega_tilde(&omega).unwrap()), k - 1);
        }
    }

    #[test]
    fn null_spectrum() {
        let theta: Vec<f64> = (1..=30).map(|i| 0.01 * i as f64).collect();
        let norm_sq: f64 = theta.iter().map(|t| t * t).sum();
        let omega = DMatrix::from_fn(30, 30, |i, j| theta[i] * theta[j]);
        let spec = spectrum(&omega, 1).unwrap();
        assert!((spec.eigenvalues[0] - norm_sq).abs() < 1e-12 * norm_sq);
        for (x, t) in spec.eigenvectors[0].iter().zip(&theta) {
            assert!((x - t / norm_sq.sqrt()).abs() < 1e-12);
        }
        assert_eq!(spec.snr, 0.0);
        assert!(spec.h.is_empty());
        let pp = classify_spectrum(&spec, PhaseThresholds::default());
        assert_eq!(pp.region, Region::Impossibility);
    }

    #[test]
    fn eigenvalues_match_g_half_p_g_half() {
        for seed in 0..4 {
            let (params, omega) = random_omega(150, 3, 100 + seed);
            let spec = spectrum(&omega, 3).unwrap();
            let g = params.g_matrix();
            let (gv, gq) = sorted_symmetric_eigen(&g).unwrap();
            let g_half = &gq
                * DMatrix::from_diagonal(&DVector::from_iterator(3, gv.iter().map(|v| v.max(0.0).sqrt())))
                * gq.transpose();
            let norm_sq = params.theta.norm().powi(2);
            let small = &g_half * params.p.matrix() * &g_half * norm_sq;
            let (mut expect, _) = sorted_symmetric_eigen(&small).unwrap();
            expect.truncate(3);
            for (a, b) in spec.eigenvalues.iter().zip(&expect) {
                assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-300), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn example1_balanced_eigenvalues() {
        let n = 2000;
        let omega = build_omega(&example1(n, 0.6, 9.0)).unwrap();
        let spec = spectrum(&omega, 2).unwrap();
        // Balanced two-community block: λ = (1 ± b)‖θ‖²/2.
        assert!((spec.eigenvalues[0] - 64.8).abs() < 1e-8);
        assert!((spec.eigenvalues[1] - 16.2).abs() < 1e-8);
        assert!(spec.eigenvectors[0].iter().sum::<f64>() > 0.0);
    }

    #[test]
    fn eigenvalue_sum_is_trace_for_rank_k() {
        let (_, omega) = random_omega(120, 4, 5);
        let spec = spectrum(&omega, 4).unwrap();
        let sum: f64 = spec.eigenvalues.iter().sum();
        assert!((sum - omega.trace()).abs() < 1e-9 * omega.trace());
        for w in spec.eigenvalues.windows(2) {
            assert!(w[0].abs() >= w[1].abs());
        }
    }

    #[test]
    fn sign_convention() {
        let (_, omega) = random_omega(90, 3, 11);
        let spec = spectrum(&omega, 3).unwrap();
        assert!(spec.eigenvectors[0].iter().sum::<f64>() > 0.0);
        for v in &spec.eigenvectors[1..] {
            assert!(first_significant(v) > 0.0);
        }
    }

    #[test]
    fn direct_traces_match_eigen_oracle() {
        let (_, omega) = random_omega(70, 3, 21);
        let tilde = omega_tilde(&omega).unwrap();
        let (vals, _) = sorted_symmetric_eigen(&tilde).unwrap();
        for m in [3, 4] {
            let direct = tr_power_direct(&tilde, m).unwrap();
            let oracle: f64 = vals.iter().map(|v| v.powi(m as i32)).sum();
            assert!((direct - oracle).abs() <= 1e-8 * oracle.abs().max(vals[0].abs().powi(m as i32)));
        }
        assert_eq!(tr_power_direct(&DMatrix::zeros(4, 4), 3).unwrap(), 0.0);
        assert_eq!(tr_power_direct(&tilde, 5).unwrap_err(), Error::UnsupportedOrder(5));
    }

    fn closed_form_of(lam: &[f64], h: &[f64], m: usize) -> f64 {
        let spec = SpectrumInfo {
            eigenvalues: core::iter::once(1.0).chain(lam.iter().copied()).collect(),
            eigenvectors: Vec::new(),
            sqrt_lambda1: 1.0,
            ratio: 0.0,
            snr: 0.0,
            h: h.to_vec(),
        };
        tr_closed_form(&spec, m).unwrap()
    }

    #[test]
    fn closed_form_special_cases() {
        let lam = [0.7, -0.3, 0.2];
        for m in [3, 4] {
            let plain: f64 = lam.iter().map(|l: &f64| l.powi(m as i32)).sum();
            assert!((closed_form_of(&lam, &[0.0; 3], m) - plain).abs() < 1e-15);
        }
        let (l, h) = (-0.4f64, 1.7f64);
        assert!((closed_form_of(&[l], &[h], 3) - (h * h + 1.0).powi(3) * l.powi(3)).abs() < 1e-12);
        assert!((closed_form_of(&[l], &[h], 4) - (h * h + 1.0).powi(4) * l.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_leading_block_exactly() {
        // tr(B^m) with B = [[h′Λh, −(Λh)′], [−Λh, Λ]] is the leading part of
        // tr(Ω̃^m) and equals the polynomial identically.
        let mut rng = stream(77, &[]);
        for _ in 0..50 {
            let k = rng.random_range(1..6);
            let lam: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut b = DMatrix::zeros(k + 1, k + 1);
            b[(0, 0)] = lam.iter().zip(&h).map(|(l, h)| l * h * h).sum();
            for i in 0..k {
                b[(0, i + 1)] = -lam[i] * h[i];
                b[(i + 1, 0)] = -lam[i] * h[i];
                b[(i + 1, i + 1)] = lam[i];
            }
            let b2 = &b * &b;
            let tr3 = (&b2 * &b).trace();
            let tr4 = (&b2 * &b2).trace();
            assert!((closed_form_of(&lam, &h, 3) - tr3).abs() < 1e-11 * (1.0 + tr3.abs()));
            assert!((closed_form_of(&lam, &h, 4) - tr4).abs() < 1e-11 * (1.0 + tr4.abs()));
        }
    }

    #[test]
    fn closed_form_requires_two_communities() {
        let omega = DMatrix::from_element(4, 4, 0.2);
        let spec = spectrum(&omega, 1).unwrap();
        assert_eq!(tr_closed_form(&spec, 3).unwrap_err(), Error::NullModel);
    }

    #[test]
    fn closed_form_tracks_direct_trace_when_gap_is_large() {
        // Unbalanced two-community instance with |λ₂|/λ₁ ≤ 0.05.
        let n = 400;
        let theta = DegreeVector::new((0..n).map(|i| 0.1 + 0.1 * ((i * 7) % 10) as f64 / 10.0).collect());
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i % 3 == 0)).collect();
        let pi = MembershipMatrix::from_labels(&labels, 2).unwrap();
        let params = DcmmParams::new(theta, pi, CommunityMatrix::example1(2, 0.93)).unwrap();
        let omega = build_omega(&params).unwrap();
        let spec = spectrum(&omega, 2).unwrap();
        assert!(spec.ratio <= 0.05, "{}", spec.ratio);
        let tilde = omega_tilde(&omega).unwrap();
        for m in [3, 4] {
            let lam2 = spec.eigenvalues[1].abs().powi(m as i32);
            let direct = tr_power_direct(&tilde, m).unwrap();
            let closed = tr_closed_form(&spec, m).unwrap();
            assert!((direct - closed).abs() <= 0.1 * lam2, "m={m}: {direct} vs {closed}");
        }
    }

    #[test]
    fn tilde_norm_is_comparable_to_lambda2() {
        let (_, omega) = random_omega(100, 3, 31);
        let spec = spectrum(&omega, 3).unwrap();
        let lam2 = spec.eigenvalues[1].abs();
        let norm = spectral_norm(&omega_tilde(&omega).unwrap()).unwrap();
        assert!(norm >= lam2 * (1.0 - 1e-9) && norm <= 10.0 * lam2, "{norm} vs {lam2}");
    }

    #[test]
    fn phase_regions() {
        let th = PhaseThresholds::default();
        // ‖θ‖ = 12, b = 0.2: |λ₂|/√λ₁ = 0.4·144/√(0.6·144) ≈ 6.2.
        let strong = build_omega(&example1(400, 0.2, 12.0)).unwrap();
        assert_eq!(phase_classify(&strong, 2, th).unwrap().region, Region::Possibility);
        // ‖θ‖(1 − b) = 3.2 with b = 0.6 lands between the default cut-offs.
        let mid = build_omega(&example1(400, 0.6, 8.0)).unwrap();
        let pp = phase_classify(&mid, 2, th).unwrap();
        assert_eq!(pp.region, Region::Boundary);
        assert!((pp.snr - 0.2 * 64.0 / (0.8f64 * 64.0).sqrt()).abs() < 1e-9);
        let weak = build_omega(&example1(400, 0.99, 3.0)).unwrap();
        assert_eq!(phase_classify(&weak, 2, th).unwrap().region, Region::Impossibility);
    }
}
