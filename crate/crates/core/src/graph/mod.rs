//! Explanation graphs built from bivariate Shapley matrices.
//!
//! The explanation graph `𝒢` has an edge `i -> j` weighted by `m[j][i]`:
//! how much `j` still matters once `i` is present. Thresholding weights by
//! magnitude gives the redundancy graph `ℋ_γ`, where `i -> j` means `j`
//! becomes (nearly) redundant given `i`. Strongly connected components of
//! `ℋ` are groups of interchangeable features, and PageRank over its
//! condensation separates features that carry information (sources) from
//! the ones they make redundant (sinks).

pub mod pagerank;
pub mod scc;

use serde::{Deserialize, Serialize};

pub use pagerank::{pagerank, ranking_order, PageRankOptions, RankScores, DEFAULT_DAMPING};
pub use scc::{scc, tarjan_scc, Condensation};

use crate::error::{Error, Result};
use crate::shapley::{Attribution, InteractionMatrix};

/// Default redundancy threshold.
pub const DEFAULT_GAMMA: f64 = 1e-5;

/// Shift added before softplus so that no edge weight is exactly zero.
const RANK_EPSILON: f64 = 1e-70;

/// Relative tolerance for treating PageRank scores as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Weighted digraph; `adjacency[i][j]` is the weight of `i -> j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationGraph {
    pub adjacency: Vec<Vec<f64>>,
}

impl ExplanationGraph {
    pub fn dim(&self) -> usize {
        self.adjacency.len()
    }

    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.adjacency[from][to]
    }

    /// Back to the matrix convention, with a zero diagonal.
    pub fn to_matrix_values(&self) -> Vec<Vec<f64>> {
        transpose(&self.adjacency)
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.adjacency.iter().flatten().fold(0.0, |acc, w| acc.max(w.abs()))
    }
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = a.len();
    (0..d).map(|i| (0..d).map(|j| a[j][i]).collect()).collect()
}

/// Adjacency is the transpose of `m` with the diagonal removed.
pub fn build_graph(m: &InteractionMatrix) -> Result<ExplanationGraph> {
    m.validate()?;
    let mut adjacency = transpose(&m.values);
    for (i, row) in adjacency.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    Ok(ExplanationGraph { adjacency })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyGraph {
    pub edges: Vec<Vec<bool>>,
    pub gamma: f64,
}

impl RedundancyGraph {
    /// Graph with the given `(from, to)` edges; self-loops are dropped.
    pub fn from_edges(d: usize, edges: &[(usize, usize)], gamma: f64) -> Result<Self> {
        let mut adj = vec![vec![false; d]; d];
        for &(a, b) in edges {
            if a >= d || b >= d {
                return Err(Error::DimensionMismatch { expected: d, found: a.max(b) + 1 });
            }
            if a != b {
                adj[a][b] = true;
            }
        }
        Ok(RedundancyGraph { edges: adj, gamma })
    }

    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges[from][to]
    }

    /// Edges in row-major order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.edges.iter().enumerate() {
            out.extend(row.iter().enumerate().filter(|(_, &e)| e).map(|(j, _)| (i, j)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flatten().filter(|&&e| e).count()
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(|row| row.iter().enumerate().filter(|(_, &e)| e).map(|(j, _)| j).collect()).collect()
    }
}

/// Keep `i -> j` whenever `|A[i][j]| <= gamma`.
pub fn threshold(g: &ExplanationGraph, gamma: f64) -> Result<RedundancyGraph> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::config(format!("gamma must be non-negative, got {gamma}")));
    }
    let edges = g
        .adjacency
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().map(|(j, w)| i != j && w.abs() <= gamma).collect())
        .collect();
    Ok(RedundancyGraph { edges, gamma })
}

/// Fraction of the `d(d-1)` possible edges present.
pub fn density(h: &RedundancyGraph) -> Result<f64> {
    let d = h.dim();
    if d < 2 {
        return Err(Error::config("density needs at least two nodes"));
    }
    Ok(h.edge_count() as f64 / (d * (d - 1)) as f64)
}

/// One weakly connected piece of `ℋ` and its ranked condensation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subgraph {
    pub features: Vec<usize>,
    /// Indices into the condensation's component list.
    pub components: Vec<usize>,
    /// PageRank of each listed component.
    pub scores: Vec<f64>,
    pub sink: Option<usize>,
    pub source: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinkSourceReport {
    pub sinks: Vec<usize>,
    pub sources: Vec<usize>,
    pub condensation: Condensation,
    pub subgraphs: Vec<Subgraph>,
}

pub fn sinks_sources(h: &RedundancyGraph) -> Result<SinkSourceReport> {
    sinks_sources_with(h, DEFAULT_DAMPING)
}

/// Per weakly connected subgraph, rank the condensed components with
/// uniform teleport and unit edge weights. The top component is the sink,
/// the bottom one the source; ties go to the component with the lowest
/// feature. Subgraphs that condense to a single component have neither.
pub fn sinks_sources_with(h: &RedundancyGraph, damping: f64) -> Result<SinkSourceReport> {
    let condensation = scc(h);
    let k = condensation.len();

    // Weak components over the condensation equal those of ℋ.
    let mut parent: Vec<usize> = (0..k).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in &condensation.dag_edges {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut pieces: Vec<Vec<usize>> = Vec::new();
    let mut piece_of_root = vec![usize::MAX; k];
    for c in 0..k {
        let r = root(&mut parent, c);
        if piece_of_root[r] == usize::MAX {
            piece_of_root[r] = pieces.len();
            pieces.push(Vec::new());
        }
        pieces[piece_of_root[r]].push(c);
    }

    let mut sinks = Vec::new();
    let mut sources = Vec::new();
    let mut subgraphs = Vec::with_capacity(pieces.len());
    for comps in pieces {
        let mut local = vec![usize::MAX; k];
        for (pos, &c) in comps.iter().enumerate() {
            local[c] = pos;
        }
        let n = comps.len();
        let mut features: Vec<usize> = comps.iter().flat_map(|&c| condensation.components[c].clone()).collect();
        features.sort_unstable();

        let (scores, sink, source) = if n < 2 {
            (vec![1.0; n], None, None)
        } else {
            let mut w = vec![vec![0.0; n]; n];
            for &(a, b) in &condensation.dag_edges {
                if local[a] != usize::MAX {
                    w[local[a]][local[b]] = 1.0;
                }
            }
            let scores = pagerank(&w, &PageRankOptions::with_damping(damping))?.scores;
            let (hi, lo) = extremes(&scores);
            let pair = if hi == lo { (None, None) } else { (Some(comps[hi]), Some(comps[lo])) };
            (scores, pair.0, pair.1)
        };
        if let Some(c) = sink {
            sinks.extend_from_slice(&condensation.components[c]);
        }
        if let Some(c) = source {
            sources.extend_from_slice(&condensation.components[c]);
        }
        subgraphs.push(Subgraph { features, components: comps, scores, sink, source });
    }
    sinks.sort_unstable();
    sources.sort_unstable();
    Ok(SinkSourceReport { sinks, sources, condensation, subgraphs })
}

/// Positions of the maximum and minimum; near-ties resolve to the first.
fn extremes(scores: &[f64]) -> (usize, usize) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * max.abs().max(1.0);
    let hi = scores.iter().position(|&s| s >= max - tol).unwrap_or(0);
    let lo = scores.iter().position(|&s| s <= min + tol).unwrap_or(0);
    (hi, lo)
}

/// Numerically stable `ln(1 + e^x)`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn redundancy_rank(g: &ExplanationGraph, personalization: Option<&Attribution>) -> Result<RankScores> {
    redundancy_rank_with(g, personalization.map(|a| a.phi.as_slice()), DEFAULT_DAMPING)
}

/// PageRank over `softplus(A + ε)` with self-loops removed. With `phi`,
/// teleport is proportional to `|phi|`; an all-zero `phi` falls back to
/// uniform teleport and the result is reported as unpersonalized.
pub fn redundancy_rank_with(g: &ExplanationGraph, phi: Option<&[f64]>, damping: f64) -> Result<RankScores> {
    let d = g.dim();
    if let Some(j) = g.adjacency.iter().flatten().position(|w| !w.is_finite()) {
        return Err(Error::InvalidMatrix(format!("adjacency entry {j} is not finite")));
    }
    let weights: Vec<Vec<f64>> = g
        .adjacency
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter().enumerate().map(|(j, &w)| if i == j { 0.0 } else { softplus(w + RANK_EPSILON) }).collect()
        })
        .collect();
    let personalization = match phi {
        Some(phi) => {
            if phi.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: phi.len() });
            }
            let p: Vec<f64> = phi.iter().map(|v| v.abs()).collect();
            (p.iter().sum::<f64>() > 0.0).then_some(p)
        }
        None => None,
    };
    pagerank(&weights, &PageRankOptions { damping, personalization, ..PageRankOptions::default() })
}
