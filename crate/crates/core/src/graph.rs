//! Rooted labeled graphs: transitive closure, query embedding, simulation
//! in a tree, and unfolding.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{NodeId, Symbol, UnorderedTree};
use crate::query::{Axis, QueryLabel, TwigQuery};

/// A directed graph with a distinguished root and one label per vertex.
/// Dependency graphs use one vertex per symbol (vertex `i` is the symbol
/// with index `i`); characteristic graphs may repeat labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedGraph {
    labels: Vec<Symbol>,
    succ: Vec<Vec<usize>>,
    root: usize,
}

impl RootedGraph {
    pub fn new(root_label: Symbol) -> RootedGraph {
        RootedGraph { labels: vec![root_label], succ: vec![Vec::new()], root: 0 }
    }

    /// One vertex per symbol `0..n`, rooted at `root`.
    pub fn over_symbols(n: usize, root: Symbol) -> RootedGraph {
        RootedGraph { labels: (0..n).map(Symbol::from_index).collect(), succ: vec![Vec::new(); n], root: root.index() }
    }

    pub fn add_vertex(&mut self, label: Symbol) -> usize {
        self.labels.push(label);
        self.succ.push(Vec::new());
        self.labels.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        if !self.succ[from].contains(&to) {
            self.succ[from].push(to);
        }
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, v: usize) -> Symbol {
        self.labels[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].contains(&v)
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// `reach[u][v]`: a non-empty path leads from `u` to `v`.
    pub fn closure(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut reach = vec![vec![false; n]; n];
        for (u, row) in reach.iter_mut().enumerate() {
            let mut stack: Vec<usize> = self.succ[u].clone();
            while let Some(v) = stack.pop() {
                if !row[v] {
                    row[v] = true;
                    stack.extend_from_slice(&self.succ[v]);
                }
            }
        }
        reach
    }

    pub fn reachable_from_root(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.succ[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Whether a cycle is reachable from the root.
    pub fn has_reachable_cycle(&self) -> bool {
        let reach = self.closure();
        let live = self.reachable_from_root();
        (0..self.len()).any(|v| live[v] && reach[v][v])
    }

    /// `m[x][v]`: the subquery at `x` embeds with `x ↦ v`.
    pub fn match_table(&self, q: &TwigQuery) -> Vec<Vec<bool>> {
        let reach = self.closure();
        self.match_table_with(q, &reach)
    }

    pub fn match_table_with(&self, q: &TwigQuery, reach: &[Vec<bool>]) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut m = vec![vec![false; n]; q.len()];
        // The query is a tree, so children are final before their parent.
        for x in (0..q.len()).rev() {
            for v in 0..n {
                m[x][v] = q.label(x).matches(self.labels[v])
                    && q.children(x).iter().all(|&y| match q.axis(y).unwrap() {
                        Axis::Child => self.succ[v].iter().any(|&w| m[y][w]),
                        Axis::Descendant => (0..n).any(|w| reach[v][w] && m[y][w]),
                    });
            }
        }
        m
    }

    /// Whether the query embeds into the graph.
    pub fn embeds(&self, q: &TwigQuery) -> bool {
        self.match_table(q)[q.root()][self.root]
    }

    /// Every embedding of `q` (query node → vertex), in a deterministic order.
    pub fn embeddings(&self, q: &TwigQuery) -> Vec<Vec<usize>> {
        let reach = self.closure();
        let m = self.match_table_with(q, &reach);
        if !m[q.root()][self.root] {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut cur = vec![self.root; q.len()];
        self.extend_embedding(q, &m, &reach, 1, &mut cur, &mut out);
        out
    }

    fn extend_embedding(
        &self,
        q: &TwigQuery,
        m: &[Vec<bool>],
        reach: &[Vec<bool>],
        x: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if x == q.len() {
            out.push(cur.clone());
            return;
        }
        let p = cur[q.parent(x).unwrap()];
        for v in 0..self.len() {
            let edge_ok = match q.axis(x).unwrap() {
                Axis::Child => self.has_edge(p, v),
                Axis::Descendant => reach[p][v],
            };
            if edge_ok && m[x][v] {
                cur[x] = v;
                self.extend_embedding(q, m, reach, x + 1, cur, out);
            }
        }
    }

    /// Whether the graph can be simulated in `t`.
    pub fn simulates_in(&self, t: &UnorderedTree) -> bool {
        let mut rel: Vec<Vec<bool>> =
            (0..self.len()).map(|v| t.node_ids().map(|n| t.label(n) == self.labels[v]).collect()).collect();
        loop {
            let mut changed = false;
            for v in 0..self.len() {
                for n in t.node_ids() {
                    if rel[v][n.0] && !self.succ[v].iter().all(|&w| t.children(n).iter().any(|c| rel[w][c.0])) {
                        rel[v][n.0] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        rel[self.root][t.root().0]
    }

    /// The tree of root paths. Fails when a cycle is reachable.
    pub fn unfold(&self) -> Result<UnorderedTree> {
        if self.has_reachable_cycle() {
            return Err(Error::InfiniteUnfolding);
        }
        let mut t = UnorderedTree::leaf(self.labels[self.root]);
        let mut stack = vec![(self.root, t.root())];
        while let Some((v, n)) = stack.pop() {
            for &w in &self.succ[v] {
                let c = t.add_child(n, self.labels[w]);
                stack.push((w, c));
            }
        }
        Ok(t)
    }

    /// Number of nodes of the unfolding, without building it.
    pub fn unfolding_size(&self) -> Result<u128> {
        if self.has_reachable_cycle() {
            return Err(Error::InfiniteUnfolding);
        }
        let mut memo: HashMap<usize, u128> = HashMap::new();
        fn size(g: &RootedGraph, v: usize, memo: &mut HashMap<usize, u128>) -> u128 {
            if let Some(&s) = memo.get(&v) {
                return s;
            }
            let s = 1 + g.succ[v].iter().map(|&w| size(g, w, memo)).sum::<u128>();
            memo.insert(v, s);
            s
        }
        Ok(size(self, self.root, &mut memo))
    }
}

/// Reads a tree as a query with child edges only.
pub fn tree_as_query(t: &UnorderedTree) -> TwigQuery {
    let mut q = TwigQuery::new(QueryLabel::Sym(t.label(t.root())));
    let mut stack: Vec<(NodeId, usize)> = vec![(t.root(), 0)];
    while let Some((n, x)) = stack.pop() {
        for &c in t.children(n) {
            let y = q.add(x, Axis::Child, QueryLabel::Sym(t.label(c)));
            stack.push((c, y));
        }
    }
    q
}
