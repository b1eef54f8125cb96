//! Weighted personalized PageRank by power iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DAMPING: f64 = 0.85;

#[derive(Debug, Clone, PartialEq)]
pub struct PageRankOptions {
    /// Probability of following an out-link.
    pub damping: f64,
    /// Teleport distribution; normalized internally. Uniform when `None`.
    pub personalization: Option<Vec<f64>>,
    /// L1 change between iterates that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        PageRankOptions { damping: DEFAULT_DAMPING, personalization: None, tol: 1e-10, max_iter: 1000 }
    }
}

impl PageRankOptions {
    pub fn with_damping(damping: f64) -> Self {
        PageRankOptions { damping, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankScores {
    pub scores: Vec<f64>,
    pub damping: f64,
    pub personalized: bool,
    pub iterations: usize,
    pub converged: bool,
}

impl RankScores {
    /// Node order by descending score; ties go to the lower index.
    pub fn order(&self) -> Vec<usize> {
        ranking_order(&self.scores)
    }

    pub fn argmax(&self) -> Option<usize> {
        self.order().first().copied()
    }
}

/// Indices by descending score, ties broken by lower index.
pub fn ranking_order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

pub fn check_damping(damping: f64) -> Result<()> {
    if damping > 0.0 && damping < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("damping must lie in (0, 1), got {damping}")))
    }
}

/// PageRank over `weights[i][j]`, the weight of edge `i -> j`.
///
/// `s = (1-α) p + α (Σ_j s_j w_j· / out_j + dangling · p)`, where nodes
/// without out-weight hand their mass back to `p`.
pub fn pagerank(weights: &[Vec<f64>], opts: &PageRankOptions) -> Result<RankScores> {
    check_damping(opts.damping)?;
    let n = weights.len();
    for (i, row) in weights.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        if let Some(j) = row.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidMatrix(format!("edge weight [{i}][{j}] must be finite and non-negative")));
        }
    }
    let teleport = match &opts.personalization {
        None => vec![1.0 / n as f64; n],
        Some(p) => {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.len() });
            }
            if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::config("personalization must be finite and non-negative"));
            }
            let total: f64 = p.iter().sum();
            if total <= 0.0 {
                return Err(Error::config("personalization has zero mass"));
            }
            p.iter().map(|v| v / total).collect()
        }
    };
    let out: Vec<f64> = weights.iter().map(|row| row.iter().sum()).collect();
    let alpha = opts.damping;

    let mut s = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = n == 0;
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|&j| out[j] == 0.0).map(|j| s[j]).sum();
        for (i, v) in next.iter_mut().enumerate() {
            *v = ((1.0 - alpha) + alpha * dangling) * teleport[i];
        }
        for (j, row) in weights.iter().enumerate() {
            if out[j] > 0.0 {
                let share = alpha * s[j] / out[j];
                for (v, w) in next.iter_mut().zip(row) {
                    *v += share * w;
                }
            }
        }
        let delta: f64 = next.iter().zip(&s).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut s, &mut next);
        converged = delta <= opts.tol;
    }
    Ok(RankScores { scores: s, damping: alpha, personalized: opts.personalization.is_some(), iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(w: &[Vec<f64>]) -> RankScores {
        pagerank(w, &PageRankOptions::default()).unwrap()
    }

    #[test]
    fn single_node() {
        let r = run(&[vec![0.0]]);
        assert!((r.scores[0] - 1.0).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn symmetric_cycle() {
        let r = run(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((r.scores[0] - 0.5).abs() < 1e-12 && (r.scores[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_edge_matches_hand_solution() {
        // s0 = 0.075 + 0.425 s1, s1 = 0.075 + 0.85 s0 + 0.425 s1.
        let r = run(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        let s1 = (0.075 + 0.85 * 0.075) / (1.0 - 0.425 - 0.85 * 0.425);
        let s0 = 0.075 + 0.425 * s1;
        assert!((r.scores[0] - s0).abs() < 1e-9);
        assert!((r.scores[1] - s1).abs() < 1e-9);
        assert!(r.scores[1] > r.scores[0]);
        assert!((r.scores.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn personalization_is_normalized() {
        let w = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
        let a = pagerank(&w, &PageRankOptions { personalization: Some(vec![1.0, 0.0, 0.0]), ..Default::default() })
            .unwrap();
        let b = pagerank(&w, &PageRankOptions { personalization: Some(vec![7.0, 0.0, 0.0]), ..Default::default() })
            .unwrap();
        assert!(a.personalized);
        assert_eq!(a.scores, b.scores);
        assert!(a.scores[0] > a.scores[1] && a.scores[1] > a.scores[2]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(pagerank(&[vec![-1.0]], &PageRankOptions::default()).is_err());
        assert!(pagerank(&[vec![0.0]], &PageRankOptions::with_damping(1.0)).is_err());
        let zero = PageRankOptions { personalization: Some(vec![0.0]), ..Default::default() };
        assert!(pagerank(&[vec![0.0]], &zero).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let w = vec![vec![0.0, 1.0], vec![0.0, 0.0]];
        let r = pagerank(&w, &PageRankOptions { max_iter: 2, tol: 0.0, ..Default::default() }).unwrap();
        assert_eq!(r.iterations, 2);
        assert!(!r.converged);
    }

    #[test]
    fn ties_go_to_lower_index() {
        assert_eq!(ranking_order(&[0.2, 0.5, 0.5, 0.1]), vec![1, 2, 0, 3]);
    }

    fn weights() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (1usize..12).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..5.0], n), n)
        })
    }

    proptest! {
        #[test]
        fn sums_to_one_and_scale_invariant(w in weights(), scale in 0.01f64..100.0) {
            let a = run(&w);
            let scaled: Vec<Vec<f64>> = w.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
            let b = run(&scaled);
            prop_assert!((a.scores.iter().sum::<f64>() - 1.0).abs() < 1e-8);
            prop_assert!(a.scores.iter().all(|&s| s >= 0.0));
            for (x, y) in a.scores.iter().zip(&b.scores) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
