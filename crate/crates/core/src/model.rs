//! DCMM parameters `(θ, Π, P)`, the laws they are drawn from, and the
//! probability matrix `Ω = ΘΠPΠ′Θ`.
//!
//! Matrices are dense; `Ω` costs `8n²` bytes, so materializing it is meant
//! for `n` up to roughly `2·10⁴`. Samplers that only need individual entries
//! go through [`OmegaKernel`] instead.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, serde_rows};
use crate::{rng, Error, Result};

const ROW_SUM_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;

/// Degree-heterogeneity parameters `θ_i > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeVector(Vec<f64>);

impl DegreeVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `‖θ‖`.
    pub fn norm(&self) -> f64 {
        self.norm_q(2.0)
    }

    /// `‖θ‖_q`.
    pub fn norm_q(&self, q: f64) -> f64 {
        self.0.iter().map(|t| t.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `c·θ`.
    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|t| c * t).collect())
    }

    /// `β·θ/‖θ‖`.
    pub fn rescaled_to(&self, target_norm: f64) -> Self {
        self.scaled(target_norm / self.norm())
    }
}

/// Community connectivity `P` (`K × K`, symmetric, nonnegative, unit diagonal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommunityMatrix(#[serde(with = "serde_rows")] DMatrix<f64>);

impl CommunityMatrix {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if p.nrows() != p.ncols() || p.nrows() == 0 {
            return Err(Error::DimensionMismatch(alloc::format!(
                "P must be square and nonempty, got {}x{}",
                p.nrows(),
                p.ncols()
            )));
        }
        Ok(Self(p))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = serde_rows::from_rows(rows).ok_or_else(|| Error::DimensionMismatch("ragged rows in P".into()))?;
        Self::new(m)
    }

    /// `P = (1 − b)I_K + b·1_K1_K′`.
    pub fn example1(k: usize, b: f64) -> Self {
        Self(DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 } else { b }))
    }

    /// The `1 × 1` null matrix `[1]`.
    pub fn null() -> Self {
        Self(DMatrix::from_element(1, 1, 1.0))
    }

    pub fn k(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.0[(k, l)]
    }

    /// Eigenvalues `μ_1, …, μ_K` ordered by magnitude.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let sym = (&self.0 + self.0.transpose()) * 0.5;
        Ok(linalg::sorted_symmetric_eigen(&sym)?.0)
    }

    /// `μ_2(P)`, zero when `K = 1`.
    pub fn mu2(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.get(1).copied().unwrap_or(0.0))
    }

    /// `x′Py`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let k = self.k();
        let mut acc = 0.0;
        for a in 0..k {
            if x[a] == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for b in 0..k {
                row += self.0[(a, b)] * y[b];
            }
            acc += x[a] * row;
        }
        acc
    }

    /// `P·x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.k()).map(|a| (0..self.k()).map(|b| self.0[(a, b)] * x[b]).sum()).collect()
    }
}

/// Membership matrix `Π` (`n × K`, rows on the simplex).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MembershipMatrix(#[serde(with = "serde_rows")] DMatrix<f64>);

impl MembershipMatrix {
    pub fn new(pi: DMatrix<f64>) -> Self {
        Self(pi)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        serde_rows::from_rows(rows).map(Self).ok_or_else(|| Error::DimensionMismatch("ragged rows in Π".into()))
    }

    /// Pure memberships `π_i = e_{labels[i]}`.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::IndexOutOfRange { index: bad, n: k });
        }
        Ok(Self(DMatrix::from_fn(labels.len(), k, |i, c| f64::from(u8::from(labels[i] == c)))))
    }

    /// The single-community `n × 1` matrix of ones.
    pub fn null(n: usize) -> Self {
        Self(DMatrix::from_element(n, 1, 1.0))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    /// Rows as owned vectors.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        serde_rows::to_rows(&self.0)
    }

    /// Column means, the empirical `E[π_i]`.
    pub fn mean_row(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.k()).map(|c| self.0.column(c).sum() / n).collect()
    }

    /// Index of the basis vector `π_i` equals, if it is one.
    pub fn pure_label(&self, i: usize) -> Option<usize> {
        let row = self.0.row(i);
        let ones: Vec<usize> = (0..self.k()).filter(|&c| row[c] == 1.0).collect();
        (ones.len() == 1 && row.iter().filter(|&&x| x != 0.0).count() == 1).then(|| ones[0])
    }
}

/// One violated model invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonpositiveTheta { index: usize, value: f64 },
    PNotSquare { rows: usize, cols: usize },
    PNotSymmetric { k: usize, l: usize },
    PNegative { k: usize, l: usize, value: f64 },
    PDiagonalNotOne { k: usize, value: f64 },
    PiNegative { i: usize, k: usize, value: f64 },
    PiRowSum { i: usize, sum: f64 },
    Dimensions(String),
    OmegaNotProbability { i: usize, j: usize, value: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonpositiveTheta { index, value } => write!(f, "θ_{index} = {value} ≤ 0"),
            Self::PNotSquare { rows, cols } => write!(f, "P is {rows}x{cols}, not square"),
            Self::PNotSymmetric { k, l } => write!(f, "P not symmetric at ({k},{l})"),
            Self::PNegative { k, l, value } => write!(f, "P[{k},{l}] = {value} < 0"),
            Self::PDiagonalNotOne { k, value } => write!(f, "diag(P) ≠ 1: P[{k},{k}] = {value}"),
            Self::PiNegative { i, k, value } => write!(f, "Π[{i},{k}] = {value} < 0"),
            Self::PiRowSum { i, sum } => write!(f, "row sum ≠ 1: row {i} sums to {sum}"),
            Self::Dimensions(msg) => write!(f, "dimension mismatch: {msg}"),
            Self::OmegaNotProbability { i, j, value } => write!(f, "Ω[{i},{j}] = {value} ≥ 1"),
        }
    }
}

/// Every invariant violated by a parameter set; empty iff valid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| alloc::format!("{v}")).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, v) in self.violations.iter().enumerate() {
            if idx > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check the model invariants on raw parts.
pub fn validate_parts(theta: &[f64], pi: &DMatrix<f64>, p: &DMatrix<f64>) -> ValidationReport {
    let mut out = Vec::new();
    for (index, &value) in theta.iter().enumerate() {
        if !(value > 0.0) {
            out.push(Violation::NonpositiveTheta { index, value });
        }
    }
    if p.nrows() != p.ncols() {
        out.push(Violation::PNotSquare { rows: p.nrows(), cols: p.ncols() });
    } else {
        for k in 0..p.nrows() {
            for l in 0..p.ncols() {
                let v = p[(k, l)];
                if !(v >= 0.0) {
                    out.push(Violation::PNegative { k, l, value: v });
                }
                if l > k && (v - p[(l, k)]).abs() > SYMMETRY_TOL * v.abs().max(1.0) {
                    out.push(Violation::PNotSymmetric { k, l });
                }
            }
            if p[(k, k)] != 1.0 {
                out.push(Violation::PDiagonalNotOne { k, value: p[(k, k)] });
            }
        }
    }
    for i in 0..pi.nrows() {
        let mut sum = 0.0;
        for k in 0..pi.ncols() {
            let v = pi[(i, k)];
            if !(v >= 0.0) {
                out.push(Violation::PiNegative { i, k, value: v });
            }
            sum += v;
        }
        if !((sum - 1.0).abs() <= ROW_SUM_TOL) {
            out.push(Violation::PiRowSum { i, sum });
        }
    }
    if pi.nrows() != theta.len() {
        out.push(Violation::Dimensions(alloc::format!("θ has {} entries but Π has {} rows", theta.len(), pi.nrows())));
    }
    if pi.ncols() != p.nrows() {
        out.push(Violation::Dimensions(alloc::format!(
            "Π has {} columns but P is {}x{}",
            pi.ncols(),
            p.nrows(),
            p.ncols()
        )));
    }
    if out.is_empty() {
        if let Some((i, j, value)) = omega_overflow(theta, pi, p) {
            out.push(Violation::OmegaNotProbability { i, j, value });
        }
    }
    ValidationReport { violations: out }
}

/// First off-diagonal `Ω_ij ≥ 1`, if any. A cheap bound
/// `θ_(1)θ_(2)·max P < 1` short-circuits the full scan.
fn omega_overflow(theta: &[f64], pi: &DMatrix<f64>, p: &DMatrix<f64>) -> Option<(usize, usize, f64)> {
    let n = theta.len();
    if n < 2 {
        return None;
    }
    let (mut t1, mut t2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &t in theta {
        if t > t1 {
            t2 = t1;
            t1 = t;
        } else if t > t2 {
            t2 = t;
        }
    }
    if t1 * t2 * p.max() < 1.0 {
        return None;
    }
    let kernel = OmegaKernel::from_parts(theta, pi, p);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = kernel.entry(i, j);
            if !(v < 1.0) {
                return Some((i, j, v));
            }
        }
    }
    None
}

/// A full DCMM parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct DcmmParams {
    pub theta: DegreeVector,
    pub pi: MembershipMatrix,
    pub p: CommunityMatrix,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    theta: Vec<f64>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    #[serde(rename = "Pi")]
    pi: Vec<Vec<f64>>,
}

impl From<DcmmParams> for ParamsRepr {
    fn from(params: DcmmParams) -> Self {
        Self {
            n: params.n(),
            k: params.k(),
            pi: params.pi.rows(),
            p: serde_rows::to_rows(params.p.matrix()),
            theta: params.theta.into_inner(),
        }
    }
}

impl TryFrom<ParamsRepr> for DcmmParams {
    type Error = Error;

    fn try_from(repr: ParamsRepr) -> Result<Self> {
        let params = DcmmParams::new(
            DegreeVector::new(repr.theta),
            MembershipMatrix::from_rows(&repr.pi)?,
            CommunityMatrix::from_rows(&repr.p)?,
        )?;
        if params.n() != repr.n || params.k() != repr.k {
            return Err(Error::DimensionMismatch(alloc::format!(
                "declared (n, K) = ({}, {}) but data has ({}, {})",
                repr.n,
                repr.k,
                params.n(),
                params.k()
            )));
        }
        Ok(params)
    }
}

impl DcmmParams {
    /// Validated constructor.
    pub fn new(theta: DegreeVector, pi: MembershipMatrix, p: CommunityMatrix) -> Result<Self> {
        let report = validate_parts(theta.as_slice(), pi.matrix(), p.matrix());
        if !report.is_valid() {
            return Err(Error::InvalidParams(report));
        }
        Ok(Self { theta, pi, p })
    }

    /// The null model `Ω = θθ′` (`K = 1`).
    pub fn null(theta: DegreeVector) -> Result<Self> {
        let n = theta.len();
        Self::new(theta, MembershipMatrix::null(n), CommunityMatrix::null())
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn k(&self) -> usize {
        self.p.k()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_parts(self.theta.as_slice(), self.pi.matrix(), self.p.matrix())
    }

    pub fn kernel(&self) -> OmegaKernel {
        OmegaKernel::from_parts(self.theta.as_slice(), self.pi.matrix(), self.p.matrix())
    }

    /// `G = ‖θ‖⁻²·Π′Θ²Π`.
    pub fn g_matrix(&self) -> DMatrix<f64> {
        let theta = self.theta.as_slice();
        let weighted = DMatrix::from_fn(self.n(), self.k(), |i, c| theta[i] * self.pi.matrix()[(i, c)]);
        let norm_sq: f64 = theta.iter().map(|t| t * t).sum();
        (weighted.transpose() * weighted) / norm_sq
    }
}

/// Entry evaluator for `Ω_ij = θ_iθ_j·π_i′Pπ_j` without forming `Ω`.
#[derive(Debug, Clone)]
pub struct OmegaKernel {
    theta: Vec<f64>,
    k: usize,
    /// Row-major `Π`.
    pi: Vec<f64>,
    /// Row-major `ΠP`.
    pi_p: Vec<f64>,
}

impl OmegaKernel {
    fn from_parts(theta: &[f64], pi: &DMatrix<f64>, p: &DMatrix<f64>) -> Self {
        let n = theta.len();
        let k = pi.ncols();
        let pi_p = pi * p;
        let mut pi_rows = Vec::with_capacity(n * k);
        let mut pi_p_rows = Vec::with_capacity(n * k);
        for i in 0..n {
            for c in 0..k {
                pi_rows.push(pi[(i, c)]);
                pi_p_rows.push(pi_p[(i, c)]);
            }
        }
        Self { theta: theta.to_vec(), k, pi: pi_rows, pi_p: pi_p_rows }
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let row_a = &self.pi_p[a * self.k..(a + 1) * self.k];
        let row_b = &self.pi[b * self.k..(b + 1) * self.k];
        let mut s = 0.0;
        for c in 0..self.k {
            s += row_a[c] * row_b[c];
        }
        self.theta[a] * self.theta[b] * s
    }
}

/// `Ω = ΘΠPΠ′Θ` including its diagonal, exactly symmetric.
pub fn build_omega(params: &DcmmParams) -> Result<DMatrix<f64>> {
    let n = params.n();
    let kernel = params.kernel();
    let mut omega = DMatrix::zeros(n, n);
    for i in 0..n {
        omega[(i, i)] = kernel.entry(i, i);
        for j in (i + 1)..n {
            let v = kernel.entry(i, j);
            if !(v < 1.0) {
                return Err(Error::OverflowProbability { i, j, value: v });
            }
            omega[(i, j)] = v;
            omega[(j, i)] = v;
        }
    }
    Ok(omega)
}

/// Law of the unscaled degree parameters `θ̃_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThetaDistribution {
    /// `U(low, high)`.
    Uniform { low: f64, high: f64 },
    /// `p1·δ_{v1} + p2·δ_{v2}`.
    TwoPoint { p1: f64, v1: f64, p2: f64, v2: f64 },
    /// Density `shape·scaleᵃ / x^{shape+1}` on `x ≥ scale`.
    Pareto { shape: f64, scale: f64 },
}

impl ThetaDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Uniform { low, high } => low > 0.0 && high >= low && high.is_finite(),
            Self::TwoPoint { p1, v1, p2, v2 } => {
                p1 >= 0.0 && p2 >= 0.0 && (p1 + p2 - 1.0).abs() <= 1e-12 && v1 > 0.0 && v2 > 0.0
            }
            Self::Pareto { shape, scale } => shape > 0.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(alloc::format!("invalid θ law {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match *self {
            Self::Uniform { low, high } => low + (high - low) * u,
            Self::TwoPoint { p1, v1, v2, .. } => {
                if u < p1 {
                    v1
                } else {
                    v2
                }
            }
            Self::Pareto { shape, scale } => scale * (1.0 - u).powf(-1.0 / shape),
        }
    }

    /// CDF of the law.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            Self::TwoPoint { p1, v1, p2, v2 } => f64::from(u8::from(x >= v1)) * p1 + f64::from(u8::from(x >= v2)) * p2,
            Self::Pareto { shape, scale } => {
                if x < scale {
                    0.0
                } else {
                    1.0 - (scale / x).powf(shape)
                }
            }
        }
    }
}

/// `θ_i = β·θ̃_i/‖θ̃‖` with `θ̃_i` drawn i.i.d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaLaw {
    #[serde(flatten)]
    pub distribution: ThetaDistribution,
    pub target_norm: f64,
}

impl ThetaLaw {
    pub fn new(distribution: ThetaDistribution, target_norm: f64) -> Self {
        Self { distribution, target_norm }
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if !(self.target_norm > 0.0 && self.target_norm.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!("target norm must be positive, got {}", self.target_norm)));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DegreeVector {
        let raw = DegreeVector::new((0..n).map(|_| self.distribution.sample(rng)).collect());
        raw.rescaled_to(self.target_norm)
    }
}

/// Mixture of point masses on `e_1, …, e_K` and a symmetric Dirichlet(1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipLaw {
    /// Weight on each basis vector `e_k`; its length fixes `K`.
    pub point_masses: Vec<f64>,
    /// Weight on the symmetric Dirichlet component.
    #[serde(default)]
    pub dirichlet_weight: f64,
}

impl MembershipLaw {
    /// Uniform over `{e_1, …, e_K}`.
    pub fn uniform_basis(k: usize) -> Self {
        Self { point_masses: vec![1.0 / k as f64; k], dirichlet_weight: 0.0 }
    }

    pub fn k(&self) -> usize {
        self.point_masses.len()
    }

    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.point_masses.iter().sum::<f64>() + self.dirichlet_weight;
        let nonneg = self.point_masses.iter().all(|&w| w >= 0.0) && self.dirichlet_weight >= 0.0;
        if self.k() == 0 || !nonneg || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(alloc::format!("invalid membership law {self:?}")));
        }
        Ok(())
    }

    /// `a = E[π]`; the Dirichlet(1) component has mean `1_K/K`.
    pub fn mean(&self) -> Vec<f64> {
        let share = self.dirichlet_weight / self.k() as f64;
        self.point_masses.iter().map(|w| w + share).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let k = self.k();
        let mut u: f64 = rng.random();
        for (c, &w) in self.point_masses.iter().enumerate() {
            if u < w {
                let mut row = vec![0.0; k];
                row[c] = 1.0;
                return row;
            }
            u -= w;
        }
        if self.dirichlet_weight > 0.0 {
            let draws: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
            let total: f64 = draws.iter().sum();
            return draws.into_iter().map(|x: f64| x / total).collect();
        }
        // Rounding left u just above the last cumulative weight.
        let last = self.point_masses.iter().rposition(|&w| w > 0.0).unwrap_or(k - 1);
        let mut row = vec![0.0; k];
        row[last] = 1.0;
        row
    }

    pub fn sample_matrix<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> MembershipMatrix {
        let k = self.k();
        let mut m = DMatrix::zeros(n, k);
        for i in 0..n {
            for (c, v) in self.sample(rng).into_iter().enumerate() {
                m[(i, c)] = v;
            }
        }
        MembershipMatrix::new(m)
    }
}

const THETA_STREAM: u64 = 1;
const PI_STREAM: u64 = 2;

/// Draw `θ` and `Π` i.i.d. from their laws; a deterministic function of `seed`.
pub fn sample_params(
    n: usize,
    k: usize,
    theta_law: &ThetaLaw,
    mem_law: &MembershipLaw,
    p: &CommunityMatrix,
    seed: u64,
) -> Result<DcmmParams> {
    theta_law.validate()?;
    mem_law.validate()?;
    if mem_law.k() != k || p.k() != k {
        return Err(Error::DimensionMismatch(alloc::format!(
            "K = {k} but membership law has {} and P has {} communities",
            mem_law.k(),
            p.k()
        )));
    }
    let theta = theta_law.sample(n, &mut rng::stream(seed, &[THETA_STREAM]));
    let pi = mem_law.sample_matrix(n, &mut rng::stream(seed, &[PI_STREAM]));
    DcmmParams::new(theta, pi, p.clone())
}

/// `a′Pa` for `a = E[π]` under `mem_law`.
pub fn matched_null_scale(p: &CommunityMatrix, mem_law: &MembershipLaw) -> Result<f64> {
    mem_law.validate()?;
    if mem_law.k() != p.k() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "membership law has {} communities, P has {}",
            mem_law.k(),
            p.k()
        )));
    }
    let a = mem_law.mean();
    Ok(p.bilinear(&a, &a))
}

/// Null with `Ω^null = (a′Pa)·θθ′`, matching the alternative's expected
/// average degree.
pub fn matched_null(params: &DcmmParams, mem_law: &MembershipLaw) -> Result<DcmmParams> {
    let scale = matched_null_scale(&params.p, mem_law)?;
    let theta = params.theta.scaled(scale.sqrt());
    DcmmParams::null(theta).map_err(|e| match e {
        Error::InvalidParams(report) => match report.violations.as_slice() {
            [Violation::OmegaNotProbability { i, j, value }] => {
                Error::OverflowProbability { i: *i, j: *j, value: *value }
            }
            _ => Error::InvalidParams(report),
        },
        other => other,
    })
}
