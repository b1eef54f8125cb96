//! Strongly connected components and the condensation DAG.

use serde::{Deserialize, Serialize};

use super::RedundancyGraph;

/// Strongly connected components of a digraph given as successor lists.
///
/// Iterative Tarjan, so deep graphs cannot overflow the call stack.
/// Components come out in reverse topological order; members are sorted.
pub fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut frames: Vec<(usize, usize)> = Vec::new();
    let mut components = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, 0));

        while let Some(top) = frames.len().checked_sub(1) {
            let (v, pos) = frames[top];
            if pos < adj[v].len() {
                frames[top].1 += 1;
                let w = adj[v][pos];
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack holds the component root");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                component.sort_unstable();
                components.push(component);
            }
        }
    }
    components
}

/// SCCs of a redundancy graph collapsed into a DAG.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condensation {
    /// Ordered by smallest member; members sorted.
    pub components: Vec<Vec<usize>>,
    /// `(from, to)` component indices, sorted and deduplicated.
    pub dag_edges: Vec<(usize, usize)>,
    pub component_of: Vec<usize>,
}

impl Condensation {
    pub fn from_successors(adj: &[Vec<usize>]) -> Self {
        let mut components = tarjan_scc(adj);
        components.sort_by_key(|c| c[0]);
        let mut component_of = vec![0; adj.len()];
        for (c, members) in components.iter().enumerate() {
            for &v in members {
                component_of[v] = c;
            }
        }
        let mut dag_edges: Vec<(usize, usize)> = adj
            .iter()
            .enumerate()
            .flat_map(|(v, succ)| succ.iter().map(move |&w| (v, w)))
            .map(|(v, w)| (component_of[v], component_of[w]))
            .filter(|(a, b)| a != b)
            .collect();
        dag_edges.sort_unstable();
        dag_edges.dedup();
        Condensation { components, dag_edges, component_of }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Components with at least two members.
    pub fn groups(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.components.iter().filter(|c| c.len() >= 2)
    }

    /// Successor lists over component indices.
    pub fn dag_successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.components.len()];
        for &(a, b) in &self.dag_edges {
            succ[a].push(b);
        }
        succ
    }

    /// Kahn's algorithm succeeds on every condensation; exposed for checks.
    pub fn is_acyclic(&self) -> bool {
        let n = self.components.len();
        let mut indegree = vec![0usize; n];
        for &(_, b) in &self.dag_edges {
            indegree[b] += 1;
        }
        let succ = self.dag_successors();
        let mut ready: Vec<usize> = (0..n).filter(|&c| indegree[c] == 0).collect();
        let mut seen = 0;
        while let Some(c) = ready.pop() {
            seen += 1;
            for &n2 in &succ[c] {
                indegree[n2] -= 1;
                if indegree[n2] == 0 {
                    ready.push(n2);
                }
            }
        }
        seen == n
    }
}

/// Condensation of `ℋ`.
pub fn scc(h: &RedundancyGraph) -> Condensation {
    Condensation::from_successors(&h.successors())
}
