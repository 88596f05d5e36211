//! The `sgnpoly` command line.
//!
//! Structured results go to stdout as JSON (tables as CSV); diagnostics go
//! to stderr. Exit status is 0 on success, 2 for usage errors, 3 for bad
//! input data and 1 for internal failures.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sgnpoly_core::inference::{run_tests, TestKind};
use sgnpoly_core::model::build_omega;
use sgnpoly_core::scaling::{
    dirichlet_p_construct, least_favorable, sinkhorn_dad, sinkhorn_dad_from, ChiSquarePlan, Construction,
};
use sgnpoly_core::spectral::{phase_classify, PhaseThresholds};

use crate::harness::{self, PresetOptions};
use crate::io::{read_edge_list, IndexBase, ParamsDoc};
use crate::oracle::oracle_check;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "sgnpoly", version, about = "Signed Polygon goodness-of-fit tests for network models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn parse_test(name: &str) -> std::result::Result<TestKind, String> {
    TestKind::parse(name).ok_or_else(|| format!("unknown test `{name}` (expected sgnt, sgnq or cycle3)"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test an observed network for a single community.
    Test {
        /// Edge list, one `i j` pair per line.
        #[arg(long)]
        edges: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "sgnt,sgnq", value_parser = parse_test)]
        tests: Vec<TestKind>,
        /// Whether node indices start at 0 or 1.
        #[arg(long, value_enum, default_value = "0")]
        index: IndexBase,
        /// Number of nodes, if some have no edges.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run a Monte-Carlo experiment preset and write its error-rate table.
    Simulate {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Replicates per hypothesis.
        #[arg(long)]
        reps: Option<usize>,
        /// Number of sweep points.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_delimiter = ',', value_parser = parse_test)]
        tests: Option<Vec<TestKind>>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the rows sorted by test and sweep position.
        #[arg(long)]
        plot_data: Option<PathBuf>,
        /// Worker threads (overrides SGNPOLY_THREADS).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Matrix scaling, least-favorable pairs, Dirichlet P and χ² estimates.
    Scale {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Locate a parameter set in the phase diagram.
    Phase {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare matrix-form polygon sums with direct enumeration.
    OracleCheck {
        #[arg(long, default_value_t = 300)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Request document for `scale --config`, selected by `mode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ScaleConfig {
    /// Solve `DADh = 1` for positive diagonal `D`.
    Sinkhorn {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        h: Vec<f64>,
        #[serde(default)]
        init: Option<Vec<f64>>,
    },
    LeastFavorable {
        construction: Construction,
        #[serde(default)]
        h: Option<Vec<f64>>,
        #[serde(flatten)]
        params: ParamsDoc,
    },
    DirichletP {
        alpha: Vec<f64>,
        q: f64,
    },
    /// χ² distance between a null and its least-favorable mixture.
    ChiSquare {
        construction: Construction,
        reps: usize,
        #[serde(flatten)]
        params: ParamsDoc,
    },
}

/// Request document for `phase --config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    #[serde(default)]
    pub thresholds: Option<PhaseThresholds>,
    #[serde(flatten)]
    pub params: ParamsDoc,
}

/// Parse `args` (program name first) and run. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return e.exit_code();
        }
    };
    match execute(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Json(e)
        }
    })?;
    writeln!(out)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match command {
        Command::Test { edges, alpha, tests, index, n } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::Usage(format!("--alpha must lie in (0, 1), got {alpha}")));
            }
            let (graph, summary) = read_edge_list(&edges, index, n)?;
            if summary.self_loops + summary.duplicates > 0 {
                writeln!(
                    err,
                    "note: dropped {} self-loops and {} duplicate edges",
                    summary.self_loops, summary.duplicates
                )?;
            }
            let reports = run_tests(&tests, &graph, alpha).into_iter().collect::<sgnpoly_core::Result<Vec<_>>>()?;
            emit(out, &reports)
        }
        Command::Simulate { preset, n, seed, reps, points, tests, out: dest, plot_data, threads } => {
            if reps == Some(0) || points == Some(0) {
                return Err(Error::Usage("--reps and --points must be positive".into()));
            }
            let mut cfg = harness::preset_with(&preset, PresetOptions { n, points })?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if let Some(reps) = reps {
                cfg.reps_null = reps;
                cfg.reps_alt = reps;
            }
            if let Some(tests) = tests {
                cfg.tests = tests;
            }
            let rows = harness::run_experiment(&cfg, threads)?;
            for row in rows.iter().filter(|r| !r.is_valid()) {
                writeln!(
                    err,
                    "warning: {} at beta = {}: {} of {} replicates skipped",
                    row.test.name(),
                    row.beta,
                    row.skipped,
                    row.reps + row.skipped
                )?;
            }
            match dest {
                Some(path) => harness::write_csv(create(&path)?, &rows)?,
                None => harness::write_csv(&mut *out, &rows)?,
            }
            if let Some(path) = plot_data {
                harness::write_plot_data(create(&path)?, &rows)?;
            }
            Ok(())
        }
        Command::Scale { config, threads } => match read_json::<ScaleConfig>(&config)? {
            ScaleConfig::Sinkhorn { a, h, init } => {
                let k = a.len();
                if a.iter().any(|row| row.len() != k) {
                    return Err(Error::Config("A must be square".into()));
                }
                let a = DMatrix::from_fn(k, k, |i, j| a[i][j]);
                let result = match init {
                    Some(init) => sinkhorn_dad_from(&a, &h, &init)?,
                    None => sinkhorn_dad(&a, &h)?,
                };
                emit(out, &result)
            }
            ScaleConfig::LeastFavorable { construction, h, params } => {
                let p = params.community_matrix()?;
                let pi = params.memberships(p.k())?;
                let pair = least_favorable(&params.theta()?, &p, &pi, h.as_deref(), construction)?;
                emit(out, &pair)
            }
            ScaleConfig::DirichletP { alpha, q } => {
                let p = dirichlet_p_construct(&alpha, q)?;
                emit(out, &serde_json::json!({ "P": p }))
            }
            ScaleConfig::ChiSquare { construction, reps, params } => {
                if reps == 0 {
                    return Err(Error::Config("reps must be positive".into()));
                }
                let law =
                    params.mem_law.as_ref().ok_or_else(|| Error::Config("the χ² estimate needs `mem_law`".into()))?;
                let theta = params.theta()?;
                let plan =
                    ChiSquarePlan::new(theta.as_slice(), &params.community_matrix()?, law, construction, params.seed)?;
                emit(out, &harness::chi_square_parallel(&plan, reps, params.seed, threads)?)
            }
        },
        Command::Phase { config } => {
            let cfg: PhaseConfig = read_json(&config)?;
            let params = cfg.params.resolve()?;
            let omega = build_omega(&params)?;
            let point = phase_classify(&omega, params.k(), cfg.thresholds.unwrap_or_default())?;
            emit(out, &point)
        }
        Command::OracleCheck { trials, seed } => {
            let report = oracle_check(trials, seed);
            emit(out, &report)?;
            if report.passed() {
                Ok(())
            } else {
                Err(Error::OracleMismatch(format!("{} of {} trials disagree", report.mismatches.len(), trials)))
            }
        }
    }
}
