//! Signed Polygon statistics.
//!
//! With `M = A − cc′` for a centering vector `c`, the order-`m` statistic is
//! the sum over ordered distinct tuples `(i_1, …, i_m)` of
//! `M_{i_1 i_2} M_{i_2 i_3} ⋯ M_{i_m i_1}`. The matrix forms for `m = 3, 4`
//! remove the non-distinct tuples from `tr(M^m)` through Hadamard-trace
//! corrections:
//!
//! ```text
//! m = 3:  tr(M³) − 3 tr(M∘M²) + 2 tr(M∘M∘M)
//! m = 4:  tr(M⁴) − 4 tr(M∘M³) + 8 tr(M∘M∘M²) − 6 tr(M∘M∘M∘M)
//!         − 2 tr(M²∘M²) + 2·1′[diag(M)(M∘M)diag(M)]1 + 1′[M∘M∘M∘M]1
//! ```
//!
//! `M` is never formed. Each row of `M² = A² − (Ac)c′ − c(Ac)′ + (c′c)cc′` is
//! built from a sparse scatter of `A²` plus rank-one corrections, and every
//! term above is a row-local reduction of `M`, `M²` and `diag(M) = −c∘c`.
//! Rows cost `O(n + Σ_{k∈N(i)} d_k)`, so the whole pass is `O(n² + Σ d_k²)`,
//! within `O(n²·d̄)`, with `O(n)` scratch memory.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::graph::AdjacencyMatrix;
use crate::numeric::NeumaierSum;
use crate::{Error, Result};

/// `η̂ = A1/√V` together with `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterVector {
    pub values: Vec<f64>,
    pub volume: f64,
}

impl CenterVector {
    /// `‖η̂‖²`, computed as `Σ d_i² / V`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }
}

/// How a [`PolygonStatistic`] was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MatrixForm,
    BruteForce,
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonStatistic {
    pub order: usize,
    pub value: f64,
    pub method: Method,
}

/// `η̂_i = d_i/√V`.
pub fn eta_hat(a: &AdjacencyMatrix) -> Result<CenterVector> {
    let volume = a.volume();
    if volume == 0 {
        return Err(Error::DegenerateGraph);
    }
    let root = (volume as f64).sqrt();
    Ok(CenterVector { values: (0..a.n()).map(|i| a.degree(i) as f64 / root).collect(), volume: volume as f64 })
}

/// Signed triangle and quadrilateral sums for one center, from one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolygonSums {
    pub triangle: f64,
    pub quadrilateral: f64,
}

struct RowTerms {
    /// `(M³)_ii`
    cube: f64,
    /// `(M⁴)_ii = Σ_j (M²)_ij²`
    fourth: f64,
    /// `(M²)_ii`
    square: f64,
    /// `Σ_j M_ii M_ij² M_jj`
    diag_weighted: f64,
    /// `Σ_j M_ij⁴`
    quartic: f64,
}

/// Per-row scratch: a dense accumulator for one row of `A²` and a marker
/// for the row's neighbors.
struct Scratch {
    a2_row: Vec<f64>,
    touched: Vec<usize>,
    is_neighbor: Vec<bool>,
}

fn row_terms(
    a: &AdjacencyMatrix,
    c: &[f64],
    ac: &[f64],
    cc: f64,
    i: usize,
    want_quad: bool,
    scratch: &mut Scratch,
) -> RowTerms {
    let n = a.n();
    for &k in a.neighbors(i) {
        scratch.is_neighbor[k as usize] = true;
        for &j in a.neighbors(k as usize) {
            let j = j as usize;
            if scratch.a2_row[j] == 0.0 {
                scratch.touched.push(j);
            }
            scratch.a2_row[j] += 1.0;
        }
    }

    let (ci, wi) = (c[i], ac[i]);
    let mut cube = NeumaierSum::new();
    let mut fourth = NeumaierSum::new();
    let mut diag_weighted = NeumaierSum::new();
    let mut quartic = NeumaierSum::new();
    let mut square = 0.0;
    let mii = -ci * ci;
    for j in 0..n {
        let cj = c[j];
        let m2 = scratch.a2_row[j] - wi * cj - ci * ac[j] + cc * ci * cj;
        let m1 = if scratch.is_neighbor[j] { 1.0 } else { 0.0 } - ci * cj;
        cube.add(m2 * m1);
        if j == i {
            square = m2;
        }
        if want_quad {
            fourth.add(m2 * m2);
            let m1_sq = m1 * m1;
            diag_weighted.add(mii * m1_sq * (-cj * cj));
            quartic.add(m1_sq * m1_sq);
        }
    }

    for &j in &scratch.touched {
        scratch.a2_row[j] = 0.0;
    }
    scratch.touched.clear();
    for &k in a.neighbors(i) {
        scratch.is_neighbor[k as usize] = false;
    }

    RowTerms {
        cube: cube.value(),
        fourth: fourth.value(),
        square,
        diag_weighted: diag_weighted.value(),
        quartic: quartic.value(),
    }
}

fn polygon_sums_impl(a: &AdjacencyMatrix, c: &[f64], want_quad: bool) -> Result<PolygonSums> {
    let n = a.n();
    if c.len() != n {
        return Err(Error::DimensionMismatch(alloc::format!("center has {} entries, graph has {n} nodes", c.len())));
    }
    let ac: Vec<f64> = (0..n).map(|i| a.neighbors(i).iter().map(|&k| c[k as usize]).sum()).collect();
    let cc: f64 = c.iter().map(|x| x * x).sum();
    let mut scratch = Scratch { a2_row: vec![0.0; n], touched: Vec::new(), is_neighbor: vec![false; n] };

    let mut tr3 = NeumaierSum::new();
    let mut tr4 = NeumaierSum::new();
    let mut had_m_m2 = NeumaierSum::new(); // tr(M∘M²)
    let mut had_m_m3 = NeumaierSum::new(); // tr(M∘M³)
    let mut had_mm_m2 = NeumaierSum::new(); // tr(M∘M∘M²)
    let mut had_m3 = NeumaierSum::new(); // tr(M∘M∘M)
    let mut had_m4 = NeumaierSum::new(); // tr(M∘M∘M∘M)
    let mut had_m2_m2 = NeumaierSum::new(); // tr(M²∘M²)
    let mut diag_form = NeumaierSum::new(); // 1′[diag(M)(M∘M)diag(M)]1
    let mut quartic = NeumaierSum::new(); // 1′[M∘M∘M∘M]1

    for i in 0..n {
        let row = row_terms(a, c, &ac, cc, i, want_quad, &mut scratch);
        let mii = -c[i] * c[i];
        tr3.add(row.cube);
        had_m_m2.add(mii * row.square);
        had_m3.add(mii * mii * mii);
        if want_quad {
            tr4.add(row.fourth);
            had_m_m3.add(mii * row.cube);
            had_mm_m2.add(mii * mii * row.square);
            had_m4.add(mii * mii * mii * mii);
            had_m2_m2.add(row.square * row.square);
            diag_form.add(row.diag_weighted);
            quartic.add(row.quartic);
        }
    }

    let triangle = tr3.value() - 3.0 * had_m_m2.value() + 2.0 * had_m3.value();
    let quadrilateral = if want_quad {
        [
            tr4.value(),
            -4.0 * had_m_m3.value(),
            8.0 * had_mm_m2.value(),
            -6.0 * had_m4.value(),
            -2.0 * had_m2_m2.value(),
            2.0 * diag_form.value(),
            quartic.value(),
        ]
        .into_iter()
        .collect::<NeumaierSum>()
        .value()
    } else {
        f64::NAN
    };
    Ok(PolygonSums { triangle, quadrilateral })
}

/// Both signed sums (`m = 3` and `m = 4`) for center `c` in a single pass.
pub fn polygon_sums(a: &AdjacencyMatrix, c: &[f64]) -> Result<PolygonSums> {
    polygon_sums_impl(a, c, true)
}

/// `Σ_{distinct} Π_t (A − cc′)_{i_t i_{t+1}}` for `m ∈ {3, 4}` via the
/// matrix forms.
pub fn distinct_cycle_sum(a: &AdjacencyMatrix, c: &[f64], m: usize) -> Result<f64> {
    match m {
        3 => Ok(polygon_sums_impl(a, c, false)?.triangle),
        4 => Ok(polygon_sums_impl(a, c, true)?.quadrilateral),
        _ => Err(Error::UnsupportedOrder(m)),
    }
}

/// Signed Triangle `T_n`.
pub fn sgn_t(a: &AdjacencyMatrix) -> Result<PolygonStatistic> {
    let eta = eta_hat(a)?;
    let value = distinct_cycle_sum(a, &eta.values, 3)?;
    Ok(PolygonStatistic { order: 3, value, method: Method::MatrixForm })
}

/// Signed Quadrilateral `Q_n`.
pub fn sgn_q(a: &AdjacencyMatrix) -> Result<PolygonStatistic> {
    let eta = eta_hat(a)?;
    let value = distinct_cycle_sum(a, &eta.values, 4)?;
    Ok(PolygonStatistic { order: 4, value, method: Method::MatrixForm })
}

/// Largest `n` the brute-force enumeration accepts for order `m`.
pub fn brute_force_limit(m: usize) -> usize {
    match m {
        3 => 30,
        4 => 14,
        // n^m ≤ 14⁴ keeps higher orders at a comparable cost.
        _ => (1..).take_while(|&n: &usize| n.checked_pow(m as u32).is_some_and(|v| v <= 38_416)).last().unwrap_or(1),
    }
}

/// Literal sum over all ordered distinct `m`-tuples, any `m ≥ 3`.
pub fn brute_force_polygon(a: &AdjacencyMatrix, c: &[f64], m: usize) -> Result<f64> {
    let n = a.n();
    if m < 3 {
        return Err(Error::UnsupportedOrder(m));
    }
    if c.len() != n {
        return Err(Error::DimensionMismatch(alloc::format!("center has {} entries, graph has {n} nodes", c.len())));
    }
    if n > brute_force_limit(m) {
        return Err(Error::TooLarge { n, m });
    }
    let dense = a.to_dense();
    let centered = |i: usize, j: usize| dense[(i, j)] - c[i] * c[j];

    #[allow(clippy::too_many_arguments)]
    fn walk(
        depth: usize,
        m: usize,
        n: usize,
        tuple: &mut Vec<usize>,
        used: &mut [bool],
        product: f64,
        centered: &dyn Fn(usize, usize) -> f64,
        acc: &mut NeumaierSum,
    ) {
        if depth == m {
            acc.add(product * centered(tuple[m - 1], tuple[0]));
            return;
        }
        for next in 0..n {
            if used[next] {
                continue;
            }
            let factor = centered(tuple[depth - 1], next);
            used[next] = true;
            tuple.push(next);
            walk(depth + 1, m, n, tuple, used, product * factor, centered, acc);
            tuple.pop();
            used[next] = false;
        }
    }

    let mut acc = NeumaierSum::new();
    let mut used = vec![false; n];
    let mut tuple = Vec::with_capacity(m);
    for start in 0..n {
        used[start] = true;
        tuple.push(start);
        walk(1, m, n, &mut tuple, &mut used, 1.0, &centered, &mut acc);
        tuple.pop();
        used[start] = false;
    }
    Ok(acc.value())
}

/// Ideal Signed Polygon `Ũ_n^(m)`: centered at the population `η*` instead
/// of `η̂`. Matrix form for `m ∈ {3, 4}`, enumeration otherwise.
pub fn ideal_polygon(a: &AdjacencyMatrix, eta_star: &[f64], m: usize) -> Result<PolygonStatistic> {
    let value = match m {
        3 | 4 => distinct_cycle_sum(a, eta_star, m)?,
        _ => brute_force_polygon(a, eta_star, m)?,
    };
    Ok(PolygonStatistic { order: m, value, method: Method::Ideal })
}

/// `α̂_n = d̄/(n − 1) = V/(n(n − 1))`.
pub fn alpha_hat(a: &AdjacencyMatrix) -> Result<f64> {
    let n = a.n();
    if a.volume() == 0 || n < 2 {
        return Err(Error::DegenerateGraph);
    }
    Ok(a.volume() as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// Signed Cycle `C_n^(m)`: every factor centered by the scalar `α̂_n`.
/// Realized as the distinct-tuple sum with `c = √α̂_n·1_n`.
pub fn signed_cycle(a: &AdjacencyMatrix, m: usize) -> Result<f64> {
    let alpha = alpha_hat(a)?;
    distinct_cycle_sum(a, &vec![alpha.sqrt(); a.n()], m)
}

/// Uncentered distinct-cycle count `N_n^(m)`.
pub fn raw_cycle_count(a: &AdjacencyMatrix, m: usize) -> Result<f64> {
    distinct_cycle_sum(a, &vec![0.0; a.n()], m)
}
