//! Monte-Carlo experiments.
//!
//! For each sweep point and replicate the harness draws `θ` and `Π`, builds
//! the alternative and its degree-matched null, samples one graph under each
//! and runs every requested test on both. Rejection counts become Type I and
//! Type II error rates per sweep point and test.
//!
//! All randomness is derived from `master_seed` and the `(sweep, rep, tag)`
//! position, and results are collected in index order, so output is
//! bit-identical for any number of worker threads.

use std::io::Write;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sgnpoly_core::graph::sample_from_params;
use sgnpoly_core::inference::{run_tests, TestKind, TestReport};
use sgnpoly_core::model::{
    matched_null, sample_params, CommunityMatrix, DcmmParams, MembershipLaw, ThetaDistribution, ThetaLaw,
};
use sgnpoly_core::rng::{derive_seed, stream};
use sgnpoly_core::scaling::{chi_square_from_logs, ChiSquareEstimate, ChiSquarePlan};

use crate::{Error, Result};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SGNPOLY_THREADS";
/// A row with more skipped replicates than this fraction is invalid.
pub const MAX_SKIP_FRACTION: f64 = 0.05;
pub const DEFAULT_SWEEP_POINTS: usize = 6;
pub const DEFAULT_SEED: u64 = 2021;
const DEFAULT_REPS: usize = 200;
const FIG2_REPS: usize = 1000;

const PARAMS_TAG: u64 = 0x5041_5241;
const NULL_TAG: u64 = 0x4e55_4c4c;
const ALT_TAG: u64 = 0x414c_5400;
const P_TAG: u64 = 0x5000;

/// How the community matrix is chosen at each sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PSpec {
    /// A fixed matrix; the sweep's `b` is only a label.
    Explicit {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
    },
    /// `(1 − b)I + b11′`.
    Example1,
    /// Unit diagonal with off-diagonals i.i.d. `U(b − ε, b + ε)`,
    /// `ε = min(b, 1 − b)/6`, drawn once per sweep point.
    RandomizedOffdiag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// `‖θ‖` under the alternative.
    pub beta: f64,
    pub b: f64,
    /// Use a plain null with this `‖θ‖` instead of the matched null.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub reps_null: usize,
    pub reps_alt: usize,
    pub alpha: f64,
    /// Shape of `θ`; the norm comes from the sweep point.
    pub theta_dist: ThetaDistribution,
    pub mem_law: MembershipLaw,
    pub p_spec: PSpec,
    pub sweep: Vec<SweepPoint>,
    pub tests: Vec<TestKind>,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 3 {
            return bad(format!("n = {} is too small", self.n));
        }
        if self.reps_null == 0 || self.reps_alt == 0 {
            return bad("reps must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} is outside (0, 1)", self.alpha));
        }
        if self.tests.is_empty() {
            return bad("no tests requested".into());
        }
        if (1..self.tests.len()).any(|i| self.tests[..i].contains(&self.tests[i])) {
            return bad("a test is listed twice".into());
        }
        if self.sweep.is_empty() {
            return bad("empty sweep".into());
        }
        self.theta_dist.validate()?;
        self.mem_law.validate()?;
        if self.mem_law.k() != self.k {
            return bad(format!("K = {} but the membership law has {} communities", self.k, self.mem_law.k()));
        }
        for (s, point) in self.sweep.iter().enumerate() {
            let norms_ok = point.beta.is_finite()
                && point.beta >= 0.0
                && point.null_beta.is_none_or(|nb| nb.is_finite() && nb >= 0.0);
            if !norms_ok || !point.b.is_finite() {
                return bad(format!("sweep point {s} has a non-finite or negative norm"));
            }
            if !matches!(self.p_spec, PSpec::Explicit { .. }) && !(0.0..=1.0).contains(&point.b) {
                return bad(format!("sweep point {s}: b = {} is outside [0, 1]", point.b));
            }
            let p = self.community_matrix(s)?;
            if p.k() != self.k {
                return bad(format!("P is {}×{} but K = {}", p.k(), p.k(), self.k));
            }
        }
        Ok(())
    }

    /// The community matrix used at sweep point `s`.
    pub fn community_matrix(&self, s: usize) -> Result<CommunityMatrix> {
        let b = self.sweep[s].b;
        let p = match &self.p_spec {
            PSpec::Explicit { p } => CommunityMatrix::from_rows(p)?,
            PSpec::Example1 => CommunityMatrix::example1(self.k, b),
            PSpec::RandomizedOffdiag => {
                let eps = b.min(1.0 - b) / 6.0;
                let mut rng = stream(self.master_seed, &[s as u64, P_TAG]);
                let mut p = DMatrix::identity(self.k, self.k);
                for i in 0..self.k {
                    for j in (i + 1)..self.k {
                        let v = b + eps * (2.0 * rng.random::<f64>() - 1.0);
                        p[(i, j)] = v;
                        p[(j, i)] = v;
                    }
                }
                CommunityMatrix::new(p)?
            }
        };
        Ok(p)
    }

    /// Null and alternative parameters of replicate `rep` at sweep point `s`.
    pub fn rep_params(
        &self,
        s: usize,
        rep: usize,
        p: &CommunityMatrix,
    ) -> sgnpoly_core::Result<(DcmmParams, DcmmParams)> {
        let point = self.sweep[s];
        let seed = derive_seed(self.master_seed, &[s as u64, rep as u64, PARAMS_TAG]);
        let law = ThetaLaw::new(self.theta_dist.clone(), point.beta);
        let alt = sample_params(self.n, self.k, &law, &self.mem_law, p, seed)?;
        let null = match point.null_beta {
            Some(nb) => DcmmParams::null(alt.theta.rescaled_to(nb))?,
            None => matched_null(&alt, &self.mem_law)?,
        };
        Ok((null, alt))
    }
}

/// Outcomes of the configured tests, in `cfg.tests` order.
pub type Outcomes = Vec<sgnpoly_core::Result<TestReport>>;

/// Everything one replicate produced. A hypothesis is `None` when the
/// replicate index is beyond that hypothesis' rep count.
#[derive(Debug, Clone, PartialEq)]
pub struct RepResult {
    pub sweep: usize,
    pub rep: usize,
    pub null: Option<Outcomes>,
    pub alt: Option<Outcomes>,
}

fn run_rep(cfg: &ExperimentConfig, s: usize, rep: usize, p: &CommunityMatrix) -> RepResult {
    let params = cfg.rep_params(s, rep, p);
    let run = |pick: fn(&(DcmmParams, DcmmParams)) -> &DcmmParams, tag: u64| -> Outcomes {
        let graph = params.as_ref().map_err(Clone::clone).and_then(|pair| {
            sample_from_params(pick(pair), derive_seed(cfg.master_seed, &[s as u64, rep as u64, tag]))
        });
        match graph {
            Ok(a) => run_tests(&cfg.tests, &a, cfg.alpha),
            Err(e) => vec![Err(e); cfg.tests.len()],
        }
    };
    RepResult {
        sweep: s,
        rep,
        null: (rep < cfg.reps_null).then(|| run(|pair| &pair.0, NULL_TAG)),
        alt: (rep < cfg.reps_alt).then(|| run(|pair| &pair.1, ALT_TAG)),
    }
}

/// Worker count from `explicit`, else `SGNPOLY_THREADS`, else rayon's default.
pub fn thread_count(explicit: Option<usize>) -> Result<Option<usize>> {
    if explicit.is_some() {
        return Ok(explicit);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::Usage(format!("{THREADS_ENV} must be a thread count, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = thread_count(threads)?.unwrap_or(0);
    rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::ThreadPool(e.to_string()))
}

/// Run every replicate of every sweep point.
pub fn simulate(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<RepResult>> {
    cfg.validate()?;
    let ps = (0..cfg.sweep.len()).map(|s| cfg.community_matrix(s)).collect::<Result<Vec<_>>>()?;
    let reps = cfg.reps_null.max(cfg.reps_alt);
    let jobs: Vec<(usize, usize)> = (0..cfg.sweep.len()).flat_map(|s| (0..reps).map(move |r| (s, r))).collect();
    let pool = thread_pool(threads)?;
    Ok(pool.install(|| jobs.par_iter().map(|&(s, r)| run_rep(cfg, s, r, &ps[s])).collect()))
}

/// Error rates of one test at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub beta: f64,
    pub b: f64,
    pub test: TestKind,
    /// Rejection frequency under the null; NaN if every null rep was skipped.
    pub type1: f64,
    /// Acceptance frequency under the alternative.
    pub type2: f64,
    pub sum: f64,
    /// Replicates that produced a decision, null plus alternative.
    pub reps: usize,
    pub skipped: usize,
}

impl ResultRow {
    pub fn is_valid(&self) -> bool {
        let attempted = (self.reps + self.skipped) as f64;
        self.sum.is_finite() && self.skipped as f64 <= MAX_SKIP_FRACTION * attempted
    }
}

/// Tally rejection counts into rows ordered by sweep point, then test.
pub fn aggregate(cfg: &ExperimentConfig, results: &[RepResult]) -> Vec<ResultRow> {
    let mut rows = Vec::with_capacity(cfg.sweep.len() * cfg.tests.len());
    for (s, point) in cfg.sweep.iter().enumerate() {
        for (t, &test) in cfg.tests.iter().enumerate() {
            // (decisions, rejections) per hypothesis
            let mut null = (0usize, 0usize);
            let mut alt = (0usize, 0usize);
            let mut skipped = 0;
            for res in results.iter().filter(|r| r.sweep == s) {
                for (outcomes, tally) in [(&res.null, &mut null), (&res.alt, &mut alt)] {
                    match outcomes.as_ref().map(|o| &o[t]) {
                        Some(Ok(report)) => {
                            tally.0 += 1;
                            tally.1 += usize::from(report.reject);
                        }
                        Some(Err(_)) => skipped += 1,
                        None => {}
                    }
                }
            }
            let rate = |num: usize, den: usize| if den == 0 { f64::NAN } else { num as f64 / den as f64 };
            let type1 = rate(null.1, null.0);
            let type2 = rate(alt.0 - alt.1, alt.0);
            rows.push(ResultRow {
                beta: point.beta,
                b: point.b,
                test,
                type1,
                type2,
                sum: type1 + type2,
                reps: null.0 + alt.0,
                skipped,
            });
        }
    }
    rows
}

pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<ResultRow>> {
    Ok(aggregate(cfg, &simulate(cfg, threads)?))
}

pub const CSV_HEADER: [&str; 8] = ["sweep_beta", "sweep_b", "test", "type1", "type2", "sum", "reps", "skipped"];

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.beta.to_string(),
            r.b.to_string(),
            r.test.name().to_string(),
            r.type1.to_string(),
            r.type2.to_string(),
            r.sum.to_string(),
            r.reps.to_string(),
            r.skipped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Same rows as [`write_csv`], grouped by test and ordered along the sweep.
pub fn write_plot_data<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut sorted = rows.to_vec();
    sorted.sort_by(|x, y| x.test.name().cmp(y.test.name()).then(x.beta.total_cmp(&y.beta)).then(x.b.total_cmp(&y.b)));
    write_csv(out, &sorted)
}

/// [`sgnpoly_core::scaling::chi_square_mc`] with replicates spread over a
/// thread pool. Identical to the sequential estimate bit for bit.
pub fn chi_square_parallel(
    plan: &ChiSquarePlan,
    reps: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<ChiSquareEstimate> {
    let pool = thread_pool(threads)?;
    let logs = pool.install(|| {
        (0..reps as u64)
            .into_par_iter()
            .map(|rep| plan.log_product(seed, rep))
            .collect::<sgnpoly_core::Result<Vec<_>>>()
    })?;
    Ok(chi_square_from_logs(&logs)?)
}

pub const PRESETS: [&str; 9] = ["exp1a", "exp1b", "exp1c", "exp2a", "exp2b", "exp3a", "exp3b", "exp3c", "fig2-null"];

/// Overrides applied on top of a preset.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PresetOptions {
    pub n: Option<usize>,
    /// Number of sweep points (ignored by `fig2-null`).
    pub points: Option<usize>,
}

/// Sweep with `β(1 − b) = snr` fixed, `β` evenly spaced from `1.25·snr` to
/// `min(beta_max, 0.35√n)`. The upper cap keeps `θ_i² < 1` at small `n`.
pub fn snr_sweep(snr: f64, n: usize, beta_max: f64, points: usize) -> Vec<SweepPoint> {
    let lo = 1.25 * snr;
    let hi = beta_max.min(0.35 * (n as f64).sqrt()).max(lo);
    (0..points)
        .map(|i| {
            let beta = if points == 1 { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
            SweepPoint { beta, b: 1.0 - snr / beta, null_beta: None }
        })
        .collect()
}

pub fn preset(name: &str, n: Option<usize>) -> Result<ExperimentConfig> {
    preset_with(name, PresetOptions { n, points: None })
}

pub fn preset_with(name: &str, opts: PresetOptions) -> Result<ExperimentConfig> {
    let uniform = ThetaDistribution::Uniform { low: 2.0, high: 3.0 };
    let pareto10 = ThetaDistribution::Pareto { shape: 10.0, scale: 0.375 };
    let two_point = ThetaDistribution::TwoPoint { p1: 0.95, v1: 1.0, p2: 0.05, v2: 3.0 };
    let mixed = |masses: Vec<f64>, w: f64| MembershipLaw { point_masses: masses, dirichlet_weight: w };
    // (n, K, θ shape, membership law, P, SNR product, largest plotted ‖θ‖)
    let (n, k, theta_dist, mem_law, p_spec, snr, beta_max) = match name {
        "exp1a" => (2000, 2, uniform, MembershipLaw::uniform_basis(2), PSpec::Example1, 3.2, 15.0),
        "exp1b" => (2000, 2, two_point, MembershipLaw::uniform_basis(2), PSpec::Example1, 3.2, 15.0),
        "exp1c" => (2000, 2, pareto10, MembershipLaw::uniform_basis(2), PSpec::Example1, 3.2, 15.0),
        "exp2a" => (1000, 5, pareto10, MembershipLaw::uniform_basis(5), PSpec::RandomizedOffdiag, 4.5, 15.0),
        "exp2b" => {
            let w = vec![0.1, 0.1, 0.15, 0.15, 0.15, 0.15, 0.05, 0.05, 0.05, 0.05];
            (3000, 10, two_point, mixed(w, 0.0), PSpec::RandomizedOffdiag, 5.2, 20.0)
        }
        "exp3a" => (2000, 3, uniform, mixed(vec![0.4, 0.3, 0.3], 0.0), PSpec::Example1, 4.2, 15.0),
        "exp3b" => (2000, 3, uniform, mixed(vec![0.3; 3], 0.1), PSpec::Example1, 4.2, 15.0),
        "exp3c" => (2000, 3, uniform, mixed(vec![0.25; 3], 0.25), PSpec::Example1, 4.5, 15.0),
        "fig2-null" => {
            let n = opts.n.unwrap_or(2000);
            return Ok(ExperimentConfig {
                name: name.to_string(),
                n,
                k: 2,
                reps_null: FIG2_REPS,
                reps_alt: FIG2_REPS,
                alpha: 0.05,
                theta_dist: ThetaDistribution::Pareto { shape: 12.0, scale: 0.375 },
                mem_law: MembershipLaw::uniform_basis(2),
                p_spec: PSpec::Example1,
                sweep: vec![SweepPoint { beta: 9.0, b: 0.6, null_beta: Some(8.0) }],
                tests: TestKind::ALL.to_vec(),
                master_seed: DEFAULT_SEED,
            });
        }
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    let n = opts.n.unwrap_or(n);
    Ok(ExperimentConfig {
        name: name.to_string(),
        n,
        k,
        reps_null: DEFAULT_REPS,
        reps_alt: DEFAULT_REPS,
        alpha: 0.05,
        theta_dist,
        mem_law,
        p_spec,
        sweep: snr_sweep(snr, n, beta_max, opts.points.unwrap_or(DEFAULT_SWEEP_POINTS)),
        tests: TestKind::ALL.to_vec(),
        master_seed: DEFAULT_SEED,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_carry_their_parameters() {
        let c = preset("exp1a", None).unwrap();
        assert_eq!((c.n, c.k, c.reps_null, c.reps_alt), (2000, 2, 200, 200));
        assert_eq!(c.theta_dist, ThetaDistribution::Uniform { low: 2.0, high: 3.0 });
        assert_eq!(c.sweep.len(), DEFAULT_SWEEP_POINTS);
        for pt in &c.sweep {
            assert!((pt.beta * (1.0 - pt.b) - 3.2).abs() < 1e-12);
        }

        let c = preset("exp2b", None).unwrap();
        assert_eq!((c.n, c.k), (3000, 10));
        assert!(matches!(c.theta_dist, ThetaDistribution::TwoPoint { .. }));
        assert_eq!(c.mem_law.point_masses, vec![0.1, 0.1, 0.15, 0.15, 0.15, 0.15, 0.05, 0.05, 0.05, 0.05]);
        assert!(c.sweep.iter().all(|pt| (pt.beta * (1.0 - pt.b) - 5.2).abs() < 1e-12));

        let c = preset("fig2-null", None).unwrap();
        assert_eq!(c.n, 2000);
        assert_eq!(c.theta_dist, ThetaDistribution::Pareto { shape: 12.0, scale: 0.375 });
        assert_eq!(c.sweep, vec![SweepPoint { beta: 9.0, b: 0.6, null_beta: Some(8.0) }]);

        for (name, snr) in [("exp2a", 4.5), ("exp3a", 4.2), ("exp3b", 4.2), ("exp3c", 4.5)] {
            let c = preset(name, None).unwrap();
            c.validate().unwrap();
            assert!((c.sweep[0].beta * (1.0 - c.sweep[0].b) - snr).abs() < 1e-12, "{name}");
        }
        assert_eq!((preset("exp2a", None).unwrap().n, preset("exp3c", None).unwrap().k), (1000, 3));
    }

    #[test]
    fn preset_overrides_and_unknown_names() {
        let c = preset_with("exp1c", PresetOptions { n: Some(500), points: Some(3) }).unwrap();
        assert_eq!((c.n, c.sweep.len()), (500, 3));
        assert!((c.sweep[2].beta - 0.35 * 500f64.sqrt()).abs() < 1e-12);
        assert!(matches!(preset("exp9", None), Err(Error::UnknownPreset(_))));
        for name in PRESETS {
            preset(name, Some(300)).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn randomized_offdiag_stays_in_band_and_is_fixed() {
        let c = preset("exp2a", None).unwrap();
        for s in 0..c.sweep.len() {
            let b = c.sweep[s].b;
            let eps = b.min(1.0 - b) / 6.0;
            let p = c.community_matrix(s).unwrap();
            assert_eq!(p, c.community_matrix(s).unwrap());
            for i in 0..5 {
                assert_eq!(p.get(i, i), 1.0);
                for j in 0..5 {
                    if i != j {
                        assert!((p.get(i, j) - b).abs() <= eps);
                        assert_eq!(p.get(i, j), p.get(j, i));
                    }
                }
            }
        }
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let base = preset("exp1a", Some(200)).unwrap();
        let mut c = base.clone();
        c.reps_null = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = base.clone();
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.tests = vec![TestKind::SgnT, TestKind::SgnT];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.sweep[0].b = 1.5;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.k = 3;
        assert!(c.validate().is_err());
        let mut c = base;
        c.p_spec = PSpec::Explicit { p: vec![vec![1.0]] };
        assert!(c.validate().is_err());
    }

    #[test]
    fn rows_flag_excess_skips() {
        let row = |reps, skipped| ResultRow {
            beta: 1.0,
            b: 0.5,
            test: TestKind::SgnT,
            type1: 0.0,
            type2: 0.0,
            sum: 0.0,
            reps,
            skipped,
        };
        assert!(row(95, 5).is_valid());
        assert!(!row(94, 6).is_valid());
        assert!(!ResultRow { sum: f64::NAN, ..row(100, 0) }.is_valid());
    }

    #[test]
    fn csv_has_fixed_header() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "sweep_beta,sweep_b,test,type1,type2,sum,reps,skipped\n");
    }
}
