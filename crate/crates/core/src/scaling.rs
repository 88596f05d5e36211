//! Diagonal matrix scaling and least-favorable hypothesis pairs.
//!
//! [`sinkhorn_dad`] finds the positive diagonal `D` with `DADh = 1_K`. The
//! constructions in [`least_favorable`] use it to build alternatives whose
//! degree profile matches a rank-one null, and [`chi_square_mc`] estimates
//! the χ²-distance between the two sampling distributions.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::model::{CommunityMatrix, DcmmParams, DegreeVector, MembershipLaw, MembershipMatrix};
use crate::numeric::NeumaierSum;
use crate::rng;
use crate::{Error, Result};

pub const SCALING_TOLERANCE: f64 = 1e-12;
pub const SCALING_MAX_ITERATIONS: usize = 100_000;

/// Diagonal of `D` with the achieved `‖DADh − 1_K‖_∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub d: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn check_scaling_inputs(a: &DMatrix<f64>, h: &[f64]) -> Result<()> {
    let k = a.nrows();
    if k == 0 || a.ncols() != k || h.len() != k {
        return Err(Error::InvalidInput(alloc::format!(
            "need a square K×K matrix and a K-vector, got {}×{} and {}",
            a.nrows(),
            a.ncols(),
            h.len()
        )));
    }
    for i in 0..k {
        for j in 0..k {
            let v = a[(i, j)];
            let ok = v.is_finite() && if i == j { v > 0.0 } else { v >= 0.0 };
            if !ok {
                return Err(Error::InvalidInput(alloc::format!("entry ({i}, {j}) = {v} is not admissible")));
            }
        }
    }
    if let Some(bad) = h.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidInput(alloc::format!("h must be strictly positive, found {bad}")));
    }
    Ok(())
}

fn dad_residual(a: &DMatrix<f64>, d: &[f64], h: &[f64]) -> f64 {
    let k = d.len();
    (0..k)
        .map(|i| {
            let row: f64 = (0..k).map(|j| a[(i, j)] * d[j] * h[j]).sum();
            (d[i] * row - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Solve `DADh = 1_K` from the default start `d = 1_K`.
pub fn sinkhorn_dad(a: &DMatrix<f64>, h: &[f64]) -> Result<ScalingResult> {
    sinkhorn_dad_from(a, h, &vec![1.0; h.len()])
}

/// Solve `DADh = 1_K` from a given positive start.
///
/// With `u = Dh` the system reads `u ∘ (Au) = h`, i.e. `u` is a fixed point
/// of `u ↦ h / (Au)`. The plain update is used until the residual grows,
/// after which every step takes the geometric mean with the previous
/// iterate, which suppresses the two-cycle the plain map can fall into.
pub fn sinkhorn_dad_from(a: &DMatrix<f64>, h: &[f64], init: &[f64]) -> Result<ScalingResult> {
    check_scaling_inputs(a, h)?;
    if init.len() != h.len() || init.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidInput("initial scaling must be strictly positive".into()));
    }
    let k = h.len();
    let mut u: Vec<f64> = init.iter().zip(h).map(|(d, h)| d * h).collect();
    let mut d: Vec<f64> = init.to_vec();
    let mut residual = dad_residual(a, &d, h);
    let mut damped = false;
    let mut iterations = 0;
    while residual > SCALING_TOLERANCE && iterations < SCALING_MAX_ITERATIONS {
        let au: Vec<f64> = (0..k).map(|i| (0..k).map(|j| a[(i, j)] * u[j]).sum()).collect();
        for i in 0..k {
            let target = h[i] / au[i];
            u[i] = if damped { (u[i] * target).sqrt() } else { target };
        }
        let next: Vec<f64> = u.iter().zip(h).map(|(u, h)| u / h).collect();
        let next_residual = dad_residual(a, &next, h);
        if !damped && next_residual >= residual {
            damped = true;
        }
        d = next;
        residual = next_residual;
        iterations += 1;
    }
    if residual > SCALING_TOLERANCE {
        return Err(Error::NonConvergence { iterations, residual });
    }
    Ok(ScalingResult { d, residual, iterations, converged: true })
}

/// Which least-favorable alternative to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    /// Pure memberships; `θ̃_i = d_k θ_i` for `π_i = e_k`.
    Dcbm,
    /// Mixed memberships; `θ̃_i = θ_i/‖D⁻¹π_i‖₁` with `DPDh̃_D = 1_K`.
    Dcmm,
    /// `π̃_i = Dπ_i/‖Dπ_i‖₁` and `θ̃_i = ‖Dπ_i‖₁θ_i`.
    FlexiblePi,
    /// Same `θ`, null scaled by `q` where `Ph = q1_K`.
    MatchedTheta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeastFavorablePair {
    pub construction: Construction,
    pub null_params: DcmmParams,
    pub alt_params: DcmmParams,
    /// Diagonal of `D`; `q^{-1/2}·1_K` for the matched-theta pair.
    pub d: Vec<f64>,
    /// The vector `D` was solved against (`h`, or `h̃_D` for the DCMM pair).
    pub h: Vec<f64>,
    /// Null scale `q` (1 except for the matched-theta pair).
    pub q: f64,
    /// `‖θ‖·|μ₂(P)|`.
    pub separation: f64,
}

const OUTER_TOLERANCE: f64 = 1e-12;
const OUTER_MAX_ITERATIONS: usize = 1000;

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// `h̃_D = mean_i D⁻¹π_i/‖D⁻¹π_i‖₁`.
fn h_tilde(rows: &[Vec<f64>], d: &[f64]) -> Vec<f64> {
    let k = d.len();
    let mut acc: Vec<NeumaierSum> = (0..k).map(|_| NeumaierSum::new()).collect();
    for row in rows {
        let scaled: Vec<f64> = row.iter().zip(d).map(|(p, d)| p / d).collect();
        let norm = l1(&scaled);
        for (a, s) in acc.iter_mut().zip(&scaled) {
            a.add(s / norm);
        }
    }
    acc.into_iter().map(|a| a.value() / rows.len() as f64).collect()
}

/// Outer fixed point for `DPDh̃_D = 1_K`: alternate between `h̃_D` for the
/// current `D` and the scaling of `P` against it.
pub fn dcmm_scaling(p: &DMatrix<f64>, rows: &[Vec<f64>]) -> Result<(ScalingResult, Vec<f64>)> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no membership rows".into()));
    }
    let k = p.nrows();
    let mut d = vec![1.0; k];
    let mut last_change = f64::INFINITY;
    for _ in 0..OUTER_MAX_ITERATIONS {
        let h = h_tilde(rows, &d);
        let inner = sinkhorn_dad_from(p, &h, &d)?;
        last_change = inner.d.iter().zip(&d).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        d = inner.d.clone();
        if last_change <= OUTER_TOLERANCE {
            let h = h_tilde(rows, &d);
            let scaled = sinkhorn_dad_from(p, &h, &d)?;
            return Ok((scaled, h));
        }
    }
    Err(Error::NonConvergence { iterations: OUTER_MAX_ITERATIONS, residual: last_change })
}

/// `‖Ph − q1_K‖_∞ ≤ 10⁻¹⁰·q` check; returns `q`.
pub fn matched_scale(p: &CommunityMatrix, h: &[f64]) -> Result<f64> {
    let ph = p.apply(h);
    let q = ph.iter().sum::<f64>() / ph.len() as f64;
    let spread = ph.iter().map(|x| (x - q).abs()).fold(0.0, f64::max);
    if !(q > 0.0) || spread > 1e-10 * q {
        return Err(Error::ConditionViolated(alloc::format!("Ph = {ph:?} is not proportional to 1_K")));
    }
    Ok(q)
}

/// Build the null/alternative pair for `construction`.
///
/// `h` defaults to the mean row of `pi`; pass the law's mean to build the
/// population version of the pair.
pub fn least_favorable(
    theta: &DegreeVector,
    p: &CommunityMatrix,
    pi: &MembershipMatrix,
    h: Option<&[f64]>,
    construction: Construction,
) -> Result<LeastFavorablePair> {
    let (n, k) = (theta.len(), p.k());
    if pi.n() != n || pi.k() != k {
        return Err(Error::DimensionMismatch(alloc::format!(
            "θ has {n} entries, Π is {}×{}, P is {k}×{k}",
            pi.n(),
            pi.k()
        )));
    }
    let h: Vec<f64> = h.map_or_else(|| pi.mean_row(), <[f64]>::to_vec);
    if h.len() != k {
        return Err(Error::DimensionMismatch(alloc::format!("h has {} entries, K = {k}", h.len())));
    }
    let separation = theta.norm() * p.mu2()?.abs();
    let th = theta.as_slice();
    let rows = pi.rows();

    let (null_params, alt_params, d, h_used, q) = match construction {
        Construction::Dcbm => {
            if let Some(i) = (0..n).find(|&i| pi.pure_label(i).is_none()) {
                return Err(Error::ConditionViolated(alloc::format!("row {i} of Π is not a basis vector")));
            }
            let s = sinkhorn_dad(p.matrix(), &h)?;
            let tilde: Vec<f64> = (0..n).map(|i| s.d[pi.pure_label(i).unwrap_or(0)] * th[i]).collect();
            let alt = DcmmParams::new(DegreeVector::new(tilde), pi.clone(), p.clone())?;
            (DcmmParams::null(theta.clone())?, alt, s.d, h, 1.0)
        }
        Construction::Dcmm => {
            let (s, h_d) = dcmm_scaling(p.matrix(), &rows)?;
            let tilde: Vec<f64> = rows
                .iter()
                .zip(th)
                .map(|(row, t)| t / l1(&row.iter().zip(&s.d).map(|(p, d)| p / d).collect::<Vec<_>>()))
                .collect();
            let alt = DcmmParams::new(DegreeVector::new(tilde), pi.clone(), p.clone())?;
            (DcmmParams::null(theta.clone())?, alt, s.d, h_d, 1.0)
        }
        Construction::FlexiblePi => {
            let s = sinkhorn_dad(p.matrix(), &h)?;
            let mut tilde = Vec::with_capacity(n);
            let mut new_rows = Vec::with_capacity(n);
            for (row, t) in rows.iter().zip(th) {
                let scaled: Vec<f64> = row.iter().zip(&s.d).map(|(p, d)| p * d).collect();
                let norm = l1(&scaled);
                tilde.push(norm * t);
                new_rows.push(scaled.into_iter().map(|x| x / norm).collect::<Vec<_>>());
            }
            let alt = DcmmParams::new(DegreeVector::new(tilde), MembershipMatrix::from_rows(&new_rows)?, p.clone())?;
            (DcmmParams::null(theta.clone())?, alt, s.d, h, 1.0)
        }
        Construction::MatchedTheta => {
            let q = matched_scale(p, &h)?;
            let null = DcmmParams::null(theta.scaled(q.sqrt()))?;
            let alt = DcmmParams::new(theta.clone(), pi.clone(), p.clone())?;
            (null, alt, vec![1.0 / q.sqrt(); k], h, q)
        }
    };
    Ok(LeastFavorablePair { construction, null_params, alt_params, d, h: h_used, q, separation })
}

/// `P = (1 − q)MM′ + q1_K1_K′` with `M ∈ ℝ^{K×(K−1)}`, `M′α = 0` and unit
/// rows, so that `diag(P) = 1` and `Pα ∝ 1_K`.
///
/// `M` is found by alternating projection between the two constraint sets,
/// started from an orthonormal basis of `α⊥`. A negative entry in the
/// result is reported as [`Error::Infeasible`].
pub fn dirichlet_p_construct(alpha: &[f64], q: f64) -> Result<CommunityMatrix> {
    let k = alpha.len();
    if k < 2 || alpha.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
        return Err(Error::InvalidInput(alloc::format!("need K ≥ 2 positive Dirichlet parameters, got {alpha:?}")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::DomainError(q));
    }
    // M′α = Σ_k α_k m_k = 0 with unit m_k closes a polygon with sides α_k,
    // which exists iff the longest side is at most the sum of the others.
    let total: f64 = alpha.iter().sum();
    let (big, &alpha_max) = alpha.iter().enumerate().fold((0, &alpha[0]), |b, x| if x.1 > b.1 { x } else { b });
    let slack = (total - alpha_max) - alpha_max;
    if slack < -1e-12 * total {
        return Err(Error::Infeasible(alloc::format!("α = {alpha:?} has a component larger than the rest combined")));
    }
    if slack <= 1e-12 * total {
        // Flat polygon: the only solution up to rotation is collinear.
        let m = DMatrix::from_fn(k, k - 1, |i, j| match (j, i == big) {
            (0, true) => 1.0,
            (0, false) => -1.0,
            _ => 0.0,
        });
        return assemble_dirichlet_p(&m, q);
    }

    let a = DVector::from_column_slice(alpha);
    let a_norm_sq = a.norm_squared();
    let mut seed_basis = DMatrix::identity(k, k);
    seed_basis.set_column(0, &a);
    let basis = seed_basis.qr().q();
    let mut m = basis.columns(1, k - 1).into_owned();

    let project_columns = |m: &mut DMatrix<f64>| {
        let coef = m.transpose() * &a / a_norm_sq;
        *m -= &a * coef.transpose();
    };
    let normalize_rows = |m: &mut DMatrix<f64>| -> bool {
        for mut row in m.row_iter_mut() {
            let norm = row.norm();
            if norm == 0.0 {
                return false;
            }
            row /= norm;
        }
        true
    };

    let mut converged = false;
    for _ in 0..SCALING_MAX_ITERATIONS {
        project_columns(&mut m);
        if !normalize_rows(&mut m) {
            break;
        }
        let off = (m.transpose() * &a).amax() / a_norm_sq.sqrt();
        if off <= 1e-10 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Infeasible(alloc::format!(
            "no M with unit rows and columns orthogonal to α = {alpha:?} was found"
        )));
    }
    assemble_dirichlet_p(&m, q)
}

fn assemble_dirichlet_p(m: &DMatrix<f64>, q: f64) -> Result<CommunityMatrix> {
    let k = m.nrows();
    let mm = m * m.transpose();
    let mut p = DMatrix::from_fn(k, k, |i, j| (1.0 - q) * mm[(i, j)] + q);
    for i in 0..k {
        p[(i, i)] = 1.0;
        for j in 0..i {
            let v = 0.5 * (p[(i, j)] + p[(j, i)]);
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    if let Some(v) = p.iter().find(|&&v| v < 0.0) {
        return Err(Error::Infeasible(alloc::format!("constructed P has a negative entry {v}")));
    }
    CommunityMatrix::new(p)
}

/// Everything the χ² estimator needs, fixed across replicates.
#[derive(Debug, Clone)]
pub struct ChiSquarePlan {
    theta: Vec<f64>,
    law: MembershipLaw,
    construction: Construction,
    d: Vec<f64>,
    /// `DPD − 1_K1_K′`
    m: DMatrix<f64>,
    q: f64,
}

/// Monte-Carlo χ² estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub reps: usize,
}

pub const CHI_SQUARE_MAX_N: usize = 500;
const DCMM_REFERENCE_DRAWS: usize = 20_000;

impl ChiSquarePlan {
    /// Population-level pair for `construction` with `π_i ~ law` i.i.d.
    ///
    /// Under the alternative, `Ω_ij = cθ_iθ_j·(π_i^D)′(DPD/c)π_j^D` where
    /// `π^D` is the normalized membership the construction pairs with `D`,
    /// and the null is `cθ_iθ_j`. Hence `Δ_ij = cθ_iθ_j·(π_i^D)′Mπ_j^D`.
    pub fn new(
        theta: &[f64],
        p: &CommunityMatrix,
        law: &MembershipLaw,
        construction: Construction,
        seed: u64,
    ) -> Result<Self> {
        law.validate()?;
        let k = p.k();
        if law.k() != k {
            return Err(Error::DimensionMismatch(alloc::format!("law has {} communities, P has {k}", law.k())));
        }
        if theta.len() > CHI_SQUARE_MAX_N {
            return Err(Error::TooLarge { n: theta.len(), m: 2 });
        }
        let h = law.mean();
        let (d, q) = match construction {
            Construction::Dcbm => {
                if law.dirichlet_weight > 0.0 {
                    return Err(Error::ConditionViolated("the DCBM pair needs a law on basis vectors".into()));
                }
                (sinkhorn_dad(p.matrix(), &h)?.d, 1.0)
            }
            Construction::FlexiblePi => (sinkhorn_dad(p.matrix(), &h)?.d, 1.0),
            Construction::Dcmm => {
                let mut r = rng::stream(seed, &[0xDC]);
                let rows: Vec<Vec<f64>> = (0..DCMM_REFERENCE_DRAWS).map(|_| law.sample(&mut r)).collect();
                (dcmm_scaling(p.matrix(), &rows)?.0.d, 1.0)
            }
            Construction::MatchedTheta => {
                let q = matched_scale(p, &h)?;
                (vec![1.0 / q.sqrt(); k], q)
            }
        };
        let dpd = DMatrix::from_fn(k, k, |i, j| d[i] * p.get(i, j) * d[j]);
        let m = if construction == Construction::MatchedTheta {
            DMatrix::from_fn(k, k, |i, j| p.get(i, j) / q - 1.0)
        } else {
            dpd.map(|x| x - 1.0)
        };
        for (i, ti) in theta.iter().enumerate() {
            let p_ii = q * ti * ti;
            if !(ti.is_finite() && *ti > 0.0 && p_ii < 1.0) {
                return Err(Error::InvalidInput(alloc::format!(
                    "θ_{i} = {ti} gives a null probability outside (0, 1)"
                )));
            }
        }
        Ok(Self { theta: theta.to_vec(), law: law.clone(), construction, d, m, q })
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    fn normalized_row(&self, pi: Vec<f64>) -> Vec<f64> {
        match self.construction {
            Construction::Dcmm => {
                let scaled: Vec<f64> = pi.iter().zip(&self.d).map(|(p, d)| p / d).collect();
                let norm = l1(&scaled);
                scaled.into_iter().map(|x| x / norm).collect()
            }
            _ => pi,
        }
    }

    /// `(π_i^D)′M` for every node, from one draw of `Π`.
    fn draw(&self, r: &mut rand_chacha::ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rows = Vec::with_capacity(self.n());
        let mut projected = Vec::with_capacity(self.n());
        for _ in 0..self.n() {
            let y = self.normalized_row(self.law.sample(r));
            let my: Vec<f64> = (0..y.len()).map(|a| (0..y.len()).map(|b| self.m[(a, b)] * y[b]).sum()).collect();
            rows.push(y);
            projected.push(my);
        }
        (rows, projected)
    }

    /// `log Π_{i<j}(1 + Δ_ijΔ̃_ij/(p_ij(1 − p_ij)))` for replicate `rep`.
    pub fn log_product(&self, seed: u64, rep: u64) -> Result<f64> {
        let mut r = rng::stream(seed, &[rep, 0]);
        let mut r_tilde = rng::stream(seed, &[rep, 1]);
        let (y, my) = self.draw(&mut r);
        let (yt, myt) = self.draw(&mut r_tilde);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut log = NeumaierSum::new();
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                let p = self.q * self.theta[i] * self.theta[j];
                let base = p * dot(&my[i], &y[j]);
                let base_tilde = p * dot(&myt[i], &yt[j]);
                let x = base * base_tilde / (p * (1.0 - p));
                if !(x.abs() < 1.0) {
                    return Err(Error::NumericalOverflow(alloc::format!(
                        "factor term {x} at ({i}, {j}) violates |x| < 1"
                    )));
                }
                log.add(x.ln_1p());
            }
        }
        Ok(log.value())
    }
}

/// Largest log-product accepted before `exp` loses meaning.
const MAX_LOG_PRODUCT: f64 = 700.0;

/// Fold per-replicate log-products into the estimate of
/// `E[Π(1 + ΔΔ̃/(p(1 − p)))] − 1`.
pub fn chi_square_from_logs(logs: &[f64]) -> Result<ChiSquareEstimate> {
    if logs.is_empty() {
        return Err(Error::InvalidInput("need at least one replicate".into()));
    }
    if let Some(&bad) = logs.iter().find(|&&l| !(l <= MAX_LOG_PRODUCT)) {
        return Err(Error::NumericalOverflow(alloc::format!("log-product {bad} exceeds {MAX_LOG_PRODUCT}")));
    }
    let reps = logs.len();
    let values: Vec<f64> = logs.iter().map(|l| l.exp_m1()).collect();
    let mean = values.iter().copied().collect::<NeumaierSum>().value() / reps as f64;
    let std_error = if reps > 1 {
        let ss = values.iter().map(|v| (v - mean) * (v - mean)).collect::<NeumaierSum>().value();
        (ss / (reps as f64 - 1.0)).sqrt() / (reps as f64).sqrt()
    } else {
        0.0
    };
    Ok(ChiSquareEstimate { estimate: mean, std_error, reps })
}

/// One replicate of the χ² integrand, `Π(1 + ΔΔ̃/(p(1 − p))) − 1`.
pub fn chi_square_rep(plan: &ChiSquarePlan, seed: u64, rep: u64) -> Result<f64> {
    Ok(plan.log_product(seed, rep)?.exp_m1())
}

/// Sequential Monte-Carlo χ² estimate over `reps` independent `(Π, Π̃)`.
pub fn chi_square_mc(
    theta: &[f64],
    p: &CommunityMatrix,
    law: &MembershipLaw,
    construction: Construction,
    reps: usize,
    seed: u64,
) -> Result<ChiSquareEstimate> {
    let plan = ChiSquarePlan::new(theta, p, law, construction, seed)?;
    let logs = (0..reps as u64).map(|rep| plan.log_product(seed, rep)).collect::<Result<Vec<_>>>()?;
    chi_square_from_logs(&logs)
}

/// Human-readable summary of a pair, for diagnostics.
pub fn describe(pair: &LeastFavorablePair) -> String {
    alloc::format!(
        "{:?}: n = {}, K = {}, separation = {:.4}, q = {:.6}",
        pair.construction,
        pair.alt_params.n(),
        pair.alt_params.k(),
        pair.separation,
        pair.q
    )
}
