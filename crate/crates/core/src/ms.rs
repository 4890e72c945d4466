//! Static analysis of twig queries under multiplicity schemas: dependency
//! graphs, pruning, query satisfiability and implication by graph
//! embedding, and containment by enumerating characteristic graphs.

use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::exact::{ChildAlgebra, OrSet, Saturation, State, MAX_QUERY_NODES};
use crate::expr::{FactorForm, NormalizedExpression};
use crate::graph::RootedGraph;
use crate::model::{Alphabet, Multiplicity, Symbol, UnorderedTree};
use crate::query::{Axis, TwigQuery};
use crate::schema::Schema;

/// Edges `a → b` for every `b` occurring in the rule of `a`; an edge is
/// nullable when the rule admits no `b` child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    alphabet: Alphabet,
    root: Symbol,
    edges: Vec<(Symbol, Symbol, bool)>,
}

impl DependencyGraph {
    pub fn of(s: &Schema) -> DependencyGraph {
        let mut edges = Vec::new();
        for a in s.alphabet().symbols() {
            let rule = s.rule(a);
            let mut syms: Vec<Symbol> = rule.symbols().collect();
            syms.sort();
            for b in syms {
                edges.push((a, b, rule.multiplicity(b).allows_zero()));
            }
        }
        DependencyGraph { alphabet: s.alphabet().clone(), root: s.root(), edges }
    }

    pub fn edges(&self) -> &[(Symbol, Symbol, bool)] {
        &self.edges
    }

    pub fn has_edge(&self, a: Symbol, b: Symbol) -> bool {
        self.edges.iter().any(|e| e.0 == a && e.1 == b)
    }

    pub fn is_nullable(&self, a: Symbol, b: Symbol) -> Option<bool> {
        self.edges.iter().find(|e| e.0 == a && e.1 == b).map(|e| e.2)
    }

    /// `G_S`: one vertex per symbol.
    pub fn graph(&self) -> RootedGraph {
        self.build(|_| true)
    }

    /// `G^u_S`: non-nullable edges only.
    pub fn universal(&self) -> RootedGraph {
        self.build(|nullable| !nullable)
    }

    fn build(&self, keep: impl Fn(bool) -> bool) -> RootedGraph {
        let mut g = RootedGraph::over_symbols(self.alphabet.len(), self.root);
        for &(a, b, nullable) in &self.edges {
            if keep(nullable) {
                g.add_edge(a.index(), b.index());
            }
        }
        g
    }
}

/// Result of pruning: an equivalent schema whose every label is
/// satisfiable, unless the root itself is not.
#[derive(Debug, Clone)]
pub struct Pruned {
    pub schema: Schema,
    pub satisfiable: bool,
    /// Labels found unsatisfiable; their rules became epsilon.
    pub removed: Vec<Symbol>,
}

/// Gives unsatisfiable labels the rule epsilon and removes them from the
/// other rules. For a multiplicity schema the unsatisfiable labels are
/// exactly those reaching a cycle of the universal dependency graph.
pub fn prune(s: &Schema) -> Pruned {
    let live = s.satisfiable_labels();
    let mut rules = Vec::with_capacity(live.len());
    let mut removed = Vec::new();
    for a in s.alphabet().symbols() {
        if live[a.index()] {
            rules.push(s.restricted_rule(a, &live).expect("satisfiable label"));
        } else {
            removed.push(a);
            rules.push(NormalizedExpression::epsilon(s.alphabet().clone()));
        }
    }
    Pruned { schema: Schema::new(s.alphabet().clone(), s.root(), rules), satisfiable: live[s.root().index()], removed }
}

/// Child-OR algebra of a schema's rules, for the exact engine.
pub struct RuleAlgebra<'a>(pub &'a Schema);

impl ChildAlgebra for RuleAlgebra<'_> {
    fn labels(&self) -> usize {
        self.0.alphabet().len()
    }

    fn children(&self, label: Symbol, states: &[Vec<State>]) -> OrSet {
        expression_orset(self.0.rule(label), states)
    }
}

fn multiplied(set: OrSet, m: Multiplicity) -> OrSet {
    match m {
        Multiplicity::Zero => OrSet::epsilon(),
        Multiplicity::One => set,
        Multiplicity::Optional => set.optional(),
        Multiplicity::Plus => set.plus(),
        Multiplicity::Star => set.star(),
    }
}

pub(crate) fn expression_orset(e: &NormalizedExpression, states: &[Vec<State>]) -> OrSet {
    let mut acc = OrSet::epsilon();
    for f in e.factors() {
        let part = match NormalizedExpression::form(f) {
            FactorForm::Single(m) => {
                let b = f.disjuncts[0].symbol;
                multiplied(OrSet::symbol(b, &states[b.index()]), m)
            }
            FactorForm::Choice | FactorForm::OptionalChoice => f.disjuncts.iter().fold(OrSet::nothing(), |u, d| {
                u.union(&multiplied(OrSet::symbol(d.symbol, &states[d.symbol.index()]), d.mult))
            }),
            FactorForm::Repeated => f
                .disjuncts
                .iter()
                .fold(OrSet::nothing(), |u, d| u.union(&OrSet::symbol(d.symbol, &states[d.symbol.index()])))
                .plus(),
        };
        acc = acc.concat(&part);
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// A graph of the family `G(p, S)`: the image of one embedding of `p` into
/// `G_S`, descendant edges expanded to simple paths, and the universal
/// dependency graph fused below every vertex.
#[derive(Debug, Clone)]
pub struct CharGraph {
    pub graph: RootedGraph,
    /// Vertices `0..tree_vertices` form the query-image part; the rest is
    /// the shared copy of the universal dependency graph.
    pub tree_vertices: usize,
    /// Query node → vertex.
    pub images: Vec<usize>,
}

/// Hash-consed trees: structurally equal subtrees share one id, and
/// children ids are always smaller than their parent's.
#[derive(Debug, Default)]
pub struct TreeDag {
    nodes: Vec<(Symbol, Vec<usize>)>,
    index: HashMap<(Symbol, Vec<usize>), usize>,
}

impl TreeDag {
    pub fn intern(&mut self, label: Symbol, mut kids: Vec<usize>) -> usize {
        kids.sort_unstable();
        let key = (label, kids);
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(key.clone());
        self.index.insert(key, id);
        id
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn label(&self, id: usize) -> Symbol {
        self.nodes[id].0
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.nodes[id].1
    }

    pub fn unfold(&self, id: usize) -> UnorderedTree {
        let mut t = UnorderedTree::leaf(self.label(id));
        let mut stack = vec![(id, t.root())];
        while let Some((d, n)) = stack.pop() {
            for &c in self.children(d) {
                let m = t.add_child(n, self.label(c));
                stack.push((c, m));
            }
        }
        t
    }
}

/// Incremental query evaluation over a [`TreeDag`].
#[derive(Debug)]
struct DagMatcher {
    q: TwigQuery,
    here: Vec<u64>,
    below: Vec<u64>,
}

impl DagMatcher {
    fn new(q: &TwigQuery) -> DagMatcher {
        assert!(q.len() <= 64);
        DagMatcher { q: q.clone(), here: Vec::new(), below: Vec::new() }
    }

    fn embeds_at(&mut self, dag: &TreeDag, id: usize) -> bool {
        for d in self.here.len()..dag.len() {
            let (mut kid_here, mut kid_hb) = (0u64, 0u64);
            for &c in dag.children(d) {
                kid_here |= self.here[c];
                kid_hb |= self.here[c] | self.below[c];
            }
            let mut here = 0u64;
            for x in (0..self.q.len()).rev() {
                let ok = self.q.label(x).matches(dag.label(d))
                    && self.q.children(x).iter().all(|&y| match self.q.axis(y).unwrap() {
                        Axis::Child => kid_here >> y & 1 == 1,
                        Axis::Descendant => kid_hb >> y & 1 == 1,
                    });
                if ok {
                    here |= 1 << x;
                }
            }
            self.here.push(here);
            self.below.push(kid_hb);
        }
        self.here[id] & 1 == 1
    }
}

/// Outcome of a containment check.
#[derive(Debug, Clone)]
pub struct Containment {
    pub holds: bool,
    /// A member of `L(S)` satisfying `p` but not `q`.
    pub counterexample: Option<UnorderedTree>,
    /// The characteristic graph refuting containment, when one did.
    pub certificate: Option<CharGraph>,
    /// Characteristic graphs enumerated.
    pub graphs: usize,
    /// Distinct schema-consistent trees they normalized to.
    pub distinct: usize,
    /// Whether the refutation came from the exact engine after every
    /// characteristic graph embedded `q`.
    pub by_saturation: bool,
}

/// Analyses of one multiplicity schema, computed once.
#[derive(Debug, Clone)]
pub struct MsAnalysis {
    original: Schema,
    pruned: Schema,
    satisfiable: bool,
    gs: RootedGraph,
    gu: RootedGraph,
}

impl MsAnalysis {
    /// Fails unless every rule is disjunction-free.
    pub fn new(s: &Schema) -> Result<MsAnalysis> {
        if !s.is_disjunction_free() {
            return Err(Error::NotDisjunctionFree);
        }
        let p = prune(s);
        let deps = DependencyGraph::of(&p.schema);
        Ok(MsAnalysis {
            original: s.clone(),
            gs: deps.graph(),
            gu: deps.universal(),
            pruned: p.schema,
            satisfiable: p.satisfiable,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.original
    }

    pub fn pruned(&self) -> &Schema {
        &self.pruned
    }

    pub fn is_satisfiable(&self) -> bool {
        self.satisfiable
    }

    /// `G_S` of the pruned schema.
    pub fn dependency_graph(&self) -> &RootedGraph {
        &self.gs
    }

    /// `G^u_S` of the pruned schema.
    pub fn universal_graph(&self) -> &RootedGraph {
        &self.gu
    }

    /// Some member of the schema satisfies `q`.
    pub fn query_satisfiable(&self, q: &TwigQuery) -> bool {
        self.satisfiable && self.gs.embeds(q)
    }

    /// Every member satisfies `q` (vacuously true for an empty language).
    pub fn query_implied(&self, q: &TwigQuery) -> bool {
        !self.satisfiable || self.gu.embeds(q)
    }

    /// A member not satisfying `q`: the unfolding of `G^u_S`, which every
    /// member simulates.
    pub fn implication_counterexample(&self, q: &TwigQuery) -> Option<UnorderedTree> {
        if self.query_implied(q) {
            return None;
        }
        let t = self.gu.unfold().expect("pruned universal graph is acyclic");
        debug_assert!(self.original.tree_satisfies(&t) && !q.embeds_in_tree(&t));
        Some(t)
    }

    /// A member of the schema satisfying `q`.
    pub fn witness_tree(&self, q: &TwigQuery) -> Option<UnorderedTree> {
        if !self.query_satisfiable(q) {
            return None;
        }
        let emb = self.gs.embeddings(q).into_iter().next()?;
        let paths = (1..q.len())
            .map(|x| match q.axis(x).unwrap() {
                Axis::Child => Vec::new(),
                Axis::Descendant => shortest_internal_path(&self.gs, emb[q.parent(x).unwrap()], emb[x]),
            })
            .collect::<Vec<_>>();
        let g = self.build_char_graph(q, &emb, &paths);
        let mut dag = TreeDag::default();
        let id = self.normalize(&g, &mut dag);
        let t = dag.unfold(id);
        debug_assert!(self.original.tree_satisfies(&t) && q.embeds_in_tree(&t));
        Some(t)
    }

    /// Lazily enumerates `G(p, S)`; empty when `p` is unsatisfiable.
    pub fn characteristic_graphs<'a>(&'a self, p: &'a TwigQuery) -> CharGraphs<'a> {
        let embeddings = if self.satisfiable { self.gs.embeddings(p) } else { Vec::new() };
        CharGraphs { analysis: self, p, embeddings, current: None, paths: HashMap::new() }
    }

    /// Merges the graph into a schema-consistent tree: children a vertex may
    /// have at most once are fused into one, repeatable children stay apart,
    /// and universal-graph copies are dropped where the query part already
    /// provides a child with that label. Returns the id of the root.
    pub fn normalize(&self, g: &CharGraph, dag: &mut TreeDag) -> usize {
        let mut memo: HashMap<Vec<usize>, usize> = HashMap::new();
        self.norm(g, vec![g.graph.root()], dag, &mut memo)
    }

    fn norm(
        &self,
        g: &CharGraph,
        sources: Vec<usize>,
        dag: &mut TreeDag,
        memo: &mut HashMap<Vec<usize>, usize>,
    ) -> usize {
        if let Some(&id) = memo.get(&sources) {
            return id;
        }
        let a = g.graph.label(sources[0]);
        let mut by_label: Vec<(Symbol, Vec<usize>)> = Vec::new();
        for &v in &sources {
            for &w in g.graph.successors(v) {
                let b = g.graph.label(w);
                match by_label.iter_mut().find(|e| e.0 == b) {
                    Some(e) => {
                        if !e.1.contains(&w) {
                            e.1.push(w)
                        }
                    }
                    None => by_label.push((b, vec![w])),
                }
            }
        }
        let mut kids = Vec::new();
        for (b, mut group) in by_label {
            group.sort_unstable();
            let m = self.pruned.rule(a).multiplicity(b);
            if matches!(m, Multiplicity::One | Multiplicity::Optional) {
                kids.push(self.norm(g, group, dag, memo));
            } else {
                let tree: Vec<usize> = group.iter().copied().filter(|&v| v < g.tree_vertices).collect();
                if tree.is_empty() {
                    kids.push(self.norm(g, group, dag, memo));
                } else {
                    for t in tree {
                        kids.push(self.norm(g, vec![t], dag, memo));
                    }
                }
            }
        }
        let id = dag.intern(a, kids);
        memo.insert(sources, id);
        id
    }

    fn build_char_graph(&self, p: &TwigQuery, emb: &[usize], paths: &[Vec<usize>]) -> CharGraph {
        let label = |v: usize| self.gs.label(v);
        let mut graph = RootedGraph::new(label(emb[0]));
        let mut images = vec![0; p.len()];
        for x in 1..p.len() {
            let mut at = images[p.parent(x).unwrap()];
            for &v in &paths[x - 1] {
                let n = graph.add_vertex(label(v));
                graph.add_edge(at, n);
                at = n;
            }
            let n = graph.add_vertex(label(emb[x]));
            graph.add_edge(at, n);
            images[x] = n;
        }
        let tree_vertices = graph.len();
        let mut copy: Vec<Option<usize>> = vec![None; self.gu.len()];
        let mut pending: Vec<usize> = Vec::new();
        for v in 0..tree_vertices {
            let a = graph.label(v).index();
            for &b in self.gu.successors(a) {
                let u = *copy[b].get_or_insert_with(|| {
                    pending.push(b);
                    graph.add_vertex(self.gu.label(b))
                });
                graph.add_edge(v, u);
            }
        }
        while let Some(a) = pending.pop() {
            let ua = copy[a].unwrap();
            for &b in self.gu.successors(a) {
                let u = *copy[b].get_or_insert_with(|| {
                    pending.push(b);
                    graph.add_vertex(self.gu.label(b))
                });
                graph.add_edge(ua, u);
            }
        }
        CharGraph { graph, tree_vertices, images }
    }

    /// Decides `p ⊆_S q`.
    pub fn query_contained(&self, p: &TwigQuery, q: &TwigQuery) -> Containment {
        let mut res = Containment {
            holds: true,
            counterexample: None,
            certificate: None,
            graphs: 0,
            distinct: 0,
            by_saturation: false,
        };
        let mut dag = TreeDag::default();
        let mut matcher = DagMatcher::new(q);
        let mut seen = vec![];
        for g in self.characteristic_graphs(p) {
            res.graphs += 1;
            let id = self.normalize(&g, &mut dag);
            if seen.len() <= id {
                seen.resize(id + 1, false);
            }
            if seen[id] {
                continue;
            }
            seen[id] = true;
            res.distinct += 1;
            if !matcher.embeds_at(&dag, id) {
                let t = dag.unfold(id);
                debug_assert!(self.original.tree_satisfies(&t) && p.embeds_in_tree(&t));
                res.holds = false;
                res.counterexample = Some(t);
                res.certificate = Some(g);
                return res;
            }
        }
        // Characteristic graphs only follow simple paths; states of the
        // saturation engine cover the remaining trees.
        if p.len() + q.len() <= MAX_QUERY_NODES && self.satisfiable {
            if let Some(t) = saturation_counterexample(&self.original, p, q) {
                res.holds = false;
                res.counterexample = Some(t);
                res.by_saturation = true;
            }
        }
        res
    }
}

/// A member of `L(S)` satisfying `p` but not `q`, by state saturation.
pub(crate) fn saturation_counterexample(s: &Schema, p: &TwigQuery, q: &TwigQuery) -> Option<UnorderedTree> {
    let sat = Saturation::run(&RuleAlgebra(s), &[p, q]);
    let (pb, qb) = (sat.root_bit(0), sat.root_bit(1));
    let st = sat.find(s.root(), |st| st & pb != 0 && st & qb == 0)?;
    Some(sat.tree(s.root(), st))
}

/// Internal vertices of a shortest non-empty path from `u` to `v`.
fn shortest_internal_path(g: &RootedGraph, u: usize, v: usize) -> Vec<usize> {
    let mut prev: Vec<Option<usize>> = vec![None; g.len()];
    let mut queue = std::collections::VecDeque::from([u]);
    let mut seen = vec![false; g.len()];
    while let Some(x) = queue.pop_front() {
        for &w in g.successors(x) {
            if w == v {
                let mut path = Vec::new();
                let mut cur = x;
                while cur != u {
                    path.push(cur);
                    cur = prev[cur].expect("bfs parent");
                }
                path.reverse();
                return path;
            }
            if !seen[w] && w != u {
                seen[w] = true;
                prev[w] = Some(x);
                queue.push_back(w);
            }
        }
    }
    panic!("descendant image must be reachable")
}

/// Internal vertices of every simple non-empty path from `u` to `v`
/// (`u = v` gives simple cycles).
fn simple_paths(g: &RootedGraph, u: usize, v: usize) -> Vec<Vec<usize>> {
    fn go(
        g: &RootedGraph,
        cur: usize,
        u: usize,
        v: usize,
        on: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for &w in g.successors(cur) {
            if w == v {
                out.push(path.clone());
            } else if w != u && !on[w] {
                on[w] = true;
                path.push(w);
                go(g, w, u, v, on, path, out);
                path.pop();
                on[w] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(g, u, u, v, &mut vec![false; g.len()], &mut Vec::new(), &mut out);
    out
}

/// Pull-based enumeration of characteristic graphs.
pub struct CharGraphs<'a> {
    analysis: &'a MsAnalysis,
    p: &'a TwigQuery,
    embeddings: Vec<Vec<usize>>,
    /// Embedding being expanded, its path choices, and the next choice.
    current: Option<(Vec<usize>, Vec<Rc<Vec<Vec<usize>>>>, Vec<usize>)>,
    paths: HashMap<(usize, usize), Rc<Vec<Vec<usize>>>>,
}

impl Iterator for CharGraphs<'_> {
    type Item = CharGraph;

    fn next(&mut self) -> Option<CharGraph> {
        loop {
            if self.current.is_none() {
                if self.embeddings.is_empty() {
                    return None;
                }
                let emb = self.embeddings.remove(0);
                let mut choices = Vec::with_capacity(self.p.len().saturating_sub(1));
                for x in 1..self.p.len() {
                    let options = match self.p.axis(x).unwrap() {
                        Axis::Child => Rc::new(vec![Vec::new()]),
                        Axis::Descendant => {
                            let key = (emb[self.p.parent(x).unwrap()], emb[x]);
                            let gs = &self.analysis.gs;
                            self.paths.entry(key).or_insert_with(|| Rc::new(simple_paths(gs, key.0, key.1))).clone()
                        }
                    };
                    choices.push(options);
                }
                if choices.iter().any(|c| c.is_empty()) {
                    continue;
                }
                let counter = vec![0; choices.len()];
                self.current = Some((emb, choices, counter));
            }
            let (emb, choices, counter) = self.current.as_mut().unwrap();
            let picked: Vec<Vec<usize>> = choices.iter().zip(counter.iter()).map(|(c, &i)| c[i].clone()).collect();
            let g = self.analysis.build_char_graph(self.p, emb, &picked);
            // Advance the mixed-radix counter.
            let mut i = 0;
            loop {
                if i == counter.len() {
                    self.current = None;
                    break;
                }
                counter[i] += 1;
                if counter[i] < choices[i].len() {
                    break;
                }
                counter[i] = 0;
                i += 1;
            }
            return Some(g);
        }
    }
}
