//! Per-instance explanation records.

use std::path::{Path, PathBuf};

use bishap::graph::pagerank::check_damping;
use bishap::graph::{
    build_graph, redundancy_rank_with, sinks_sources_with, threshold, ExplanationGraph, RedundancyGraph,
};
use bishap::shapley::{Attribution, InteractionMatrix, Method};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

/// Graph-analysis settings shared by `explain` and `analyze`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisConfig {
    pub gamma: f64,
    pub damping: f64,
    pub personalize: bool,
}

impl AnalysisConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.gamma.is_nan() || self.gamma < 0.0 {
            return Err(CliError::config(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        check_damping(self.damping)?;
        Ok(())
    }
}

impl From<&crate::GraphArgs> for AnalysisConfig {
    fn from(a: &crate::GraphArgs) -> Self {
        AnalysisConfig { gamma: a.gamma, damping: a.damping, personalize: a.personalize }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationRecord {
    pub id: String,
    pub d: usize,
    pub method: Method,
    pub samples: usize,
    pub seed: u64,
    /// Class whose probability is explained.
    pub target: usize,
    pub phi: Vec<f64>,
    /// `interaction[i][j]`: importance of `i` given `j` present.
    pub interaction: Vec<Vec<f64>>,
    /// `adjacency[i][j]`: weight of edge `i -> j`.
    pub adjacency: Vec<Vec<f64>>,
    pub gamma: f64,
    pub damping: f64,
    pub personalized: bool,
    pub h_edges: Vec<(usize, usize)>,
    /// Every strongly connected component of the redundancy graph.
    pub scc_groups: Vec<Vec<usize>>,
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
    /// Redundancy-rank PageRank scores.
    pub scores: Vec<f64>,
    /// Features by descending score.
    pub ranking: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl ExplanationRecord {
    pub fn build(
        id: String,
        target: usize,
        seed: u64,
        phi: &Attribution,
        m: &InteractionMatrix,
        cfg: &AnalysisConfig,
    ) -> CliResult<Self> {
        let mut record = ExplanationRecord {
            id,
            d: m.dim(),
            method: m.method,
            samples: m.samples,
            seed,
            target,
            phi: phi.phi.clone(),
            interaction: m.values.clone(),
            adjacency: Vec::new(),
            gamma: cfg.gamma,
            damping: cfg.damping,
            personalized: false,
            h_edges: Vec::new(),
            scc_groups: Vec::new(),
            sources: Vec::new(),
            sinks: Vec::new(),
            scores: Vec::new(),
            ranking: Vec::new(),
            runtime_ms: None,
        };
        record.reanalyze(cfg)?;
        Ok(record)
    }

    /// Recomputes every graph field from `interaction` and `phi`.
    pub fn reanalyze(&mut self, cfg: &AnalysisConfig) -> CliResult<()> {
        cfg.validate()?;
        let g = build_graph(&self.interaction_matrix())?;
        let h = threshold(&g, cfg.gamma)?;
        let report = sinks_sources_with(&h, cfg.damping)?;
        let personalization = cfg.personalize.then_some(self.phi.as_slice());
        let rank = redundancy_rank_with(&g, personalization, cfg.damping)?;
        self.adjacency = g.adjacency;
        self.gamma = cfg.gamma;
        self.damping = cfg.damping;
        self.personalized = rank.personalized;
        self.h_edges = h.edge_list();
        self.scc_groups = report.condensation.components;
        self.sources = report.sources;
        self.sinks = report.sinks;
        self.ranking = rank.order();
        self.scores = rank.scores;
        Ok(())
    }

    pub fn interaction_matrix(&self) -> InteractionMatrix {
        InteractionMatrix {
            values: self.interaction.clone(),
            method: self.method,
            samples: self.samples,
            seed: Some(self.seed),
        }
    }

    pub fn explanation_graph(&self) -> ExplanationGraph {
        ExplanationGraph { adjacency: self.adjacency.clone() }
    }

    pub fn redundancy_graph(&self) -> CliResult<RedundancyGraph> {
        Ok(RedundancyGraph::from_edges(self.d, &self.h_edges, self.gamma)?)
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::runtime(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let r: ExplanationRecord =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("bad record: {e}")))?;
        if r.interaction.len() != r.d || r.phi.len() != r.d {
            return Err(CliError::config(format!("record {} is inconsistent with d = {}", r.id, r.d)));
        }
        Ok(r)
    }
}

/// `<dir>/<id>.json` with unsafe characters replaced.
pub fn record_path(dir: &Path, id: &str) -> PathBuf {
    let name: String =
        id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    dir.join(format!("{name}.json"))
}

/// Writes through a temporary file and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// All records in `dir`, ordered by numeric id where possible.
pub fn read_records(dir: &Path) -> CliResult<Vec<ExplanationRecord>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::config(format!("cannot read records in {}: {e}", dir.display())))?;
    let mut records = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json")
            && path.file_name().is_some_and(|n| n != "summary.json" && n != "global.json")
        {
            let text = std::fs::read_to_string(&path)?;
            match ExplanationRecord::from_json(&text) {
                Ok(r) => records.push(r),
                Err(e) => return Err(CliError::config(format!("{}: {}", path.display(), e.message))),
            }
        }
    }
    if records.is_empty() {
        return Err(CliError::config(format!("no records found in {}", dir.display())));
    }
    records.sort_by(|a, b| (a.id.parse::<u64>().ok(), &a.id).cmp(&(b.id.parse::<u64>().ok(), &b.id)));
    Ok(records)
}
