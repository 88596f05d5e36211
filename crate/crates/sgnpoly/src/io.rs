//! Edge lists and JSON parameter documents.
//!
//! An edge list has one undirected edge per line, two node indices separated
//! by whitespace or a comma. Blank lines and lines starting with `#` or `%`
//! are skipped. Indices are 0-based unless [`IndexBase::One`] is requested.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sgnpoly_core::graph::{AdjacencyMatrix, EdgeSummary};
use sgnpoly_core::model::{CommunityMatrix, DcmmParams, DegreeVector, MembershipLaw, MembershipMatrix, ThetaLaw};
use sgnpoly_core::rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum IndexBase {
    #[default]
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
}

impl IndexBase {
    fn offset(self) -> usize {
        match self {
            IndexBase::Zero => 0,
            IndexBase::One => 1,
        }
    }
}

/// Parse an edge list. `n` defaults to one past the largest index seen.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    base: IndexBase,
    n: Option<usize>,
) -> Result<(AdjacencyMatrix, EdgeSummary)> {
    let mut edges = Vec::new();
    let mut max_index = None::<usize>;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = lineno + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') || text.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = text.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected two node indices, found {} fields", fields.len()),
            });
        }
        let mut ends = [0usize; 2];
        for (slot, field) in ends.iter_mut().zip(&fields) {
            let raw: usize = field
                .parse()
                .map_err(|_| Error::Parse { line: line_no, message: format!("`{field}` is not a node index") })?;
            *slot = raw
                .checked_sub(base.offset())
                .ok_or_else(|| Error::Parse { line: line_no, message: "index 0 in a 1-based edge list".to_string() })?;
        }
        if let Some(n) = n {
            if let Some(&bad) = ends.iter().find(|&&x| x >= n) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("node {} is outside 0..{n}", bad + base.offset()),
                });
            }
        }
        max_index = max_index.max(Some(ends[0].max(ends[1])));
        edges.push((ends[0], ends[1]));
    }
    let n = n.unwrap_or_else(|| max_index.map_or(0, |m| m + 1));
    Ok(AdjacencyMatrix::from_edges(n, edges)?)
}

pub fn read_edge_list(path: &Path, base: IndexBase, n: Option<usize>) -> Result<(AdjacencyMatrix, EdgeSummary)> {
    let file = File::open(path).map_err(|source| Error::File { path: path.to_path_buf(), source })?;
    parse_edge_list(BufReader::new(file), base, n)
}

/// Write each edge once as `i j`, smaller endpoint first.
pub fn write_edge_list<W: Write>(mut out: W, graph: &AdjacencyMatrix, base: IndexBase) -> Result<()> {
    writeln!(out, "# n = {}, edges = {}", graph.n(), graph.edge_count())?;
    let off = base.offset();
    for (i, j) in graph.edges() {
        writeln!(out, "{} {}", i + off, j + off)?;
    }
    Ok(())
}

/// DCMM parameters in JSON, either explicit or drawn from laws.
///
/// `theta` or `theta_law` gives `θ`; `Pi` or `mem_law` gives `Π`. With
/// neither `Pi` nor `mem_law` and `K = 1` the null `Ω = θθ′` is built.
/// Draws use `seed`, identically to `sgnpoly_core::model::sample_params`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_law: Option<ThetaLaw>,
    #[serde(rename = "Pi", default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mem_law: Option<MembershipLaw>,
    #[serde(default)]
    pub seed: u64,
}

impl ParamsDoc {
    pub fn community_matrix(&self) -> Result<CommunityMatrix> {
        let p = CommunityMatrix::from_rows(&self.p)?;
        match self.k {
            Some(k) if k != p.k() => Err(Error::Config(format!("K = {k} but P is {}×{}", p.k(), p.k()))),
            _ => Ok(p),
        }
    }

    fn size(&self) -> Result<usize> {
        let from_theta = self.theta.as_ref().map(Vec::len);
        let from_pi = self.pi.as_ref().map(Vec::len);
        let sizes: Vec<usize> = [self.n, from_theta, from_pi].into_iter().flatten().collect();
        match sizes.first() {
            None => Err(Error::Config("n is required when θ and Π are both drawn from laws".into())),
            Some(&n) if sizes.iter().all(|&m| m == n) => Ok(n),
            Some(_) => Err(Error::Config(format!("inconsistent sizes n / θ / Π: {sizes:?}"))),
        }
    }

    pub fn theta(&self) -> Result<DegreeVector> {
        match (&self.theta, &self.theta_law) {
            (Some(t), None) => Ok(DegreeVector::new(t.clone())),
            (None, Some(law)) => {
                law.validate()?;
                Ok(law.sample(self.size()?, &mut rng::stream(self.seed, &[1])))
            }
            _ => Err(Error::Config("give exactly one of `theta` and `theta_law`".into())),
        }
    }

    pub fn memberships(&self, k: usize) -> Result<MembershipMatrix> {
        match (&self.pi, &self.mem_law) {
            (Some(rows), None) => Ok(MembershipMatrix::from_rows(rows)?),
            (None, Some(law)) => {
                law.validate()?;
                Ok(law.sample_matrix(self.size()?, &mut rng::stream(self.seed, &[2])))
            }
            (None, None) if k == 1 => Ok(MembershipMatrix::null(self.size()?)),
            _ => Err(Error::Config("give exactly one of `Pi` and `mem_law`".into())),
        }
    }

    pub fn resolve(&self) -> Result<DcmmParams> {
        self.size()?;
        let p = self.community_matrix()?;
        let pi = self.memberships(p.k())?;
        Ok(DcmmParams::new(self.theta()?, pi, p)?)
    }
}
