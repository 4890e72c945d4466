//! Exact query reasoning under a schema by saturating the set of
//! realizable node states.
//!
//! For a fixed list of twig queries, the state of a tree node records, for
//! every query node `x`, whether the subquery at `x` embeds at the node and
//! whether it embeds at or below it. A node's state depends only on its
//! label and the bitwise OR of its children's states, so the set of states
//! realizable by member trees of each label is the least fixpoint of a
//! monotone operator over finite sets. Every state is stored with one
//! derivation, from which a member tree realizing it can be rebuilt.

use std::collections::HashMap;
use std::rc::Rc;

use crate::model::{Symbol, UnorderedTree};
use crate::query::{Axis, TwigQuery};

/// Packed state: bits `0..64` hold "embeds here", bits `64..128` hold
/// "embeds here or below", one bit per query node.
pub type State = u128;

const HIGH: u32 = 64;

/// Largest total number of query nodes the engine accepts.
pub const MAX_QUERY_NODES: usize = 64;

/// Children realizing an OR value: `(label, state)` pairs, one per child.
#[derive(Debug, Clone, Default)]
pub struct Derivation(Option<Rc<(Derivation, Derivation)>>, Option<(Symbol, State)>);

impl Derivation {
    fn empty() -> Derivation {
        Derivation(None, None)
    }

    fn single(label: Symbol, state: State) -> Derivation {
        Derivation(None, Some((label, state)))
    }

    fn join(a: &Derivation, b: &Derivation) -> Derivation {
        if a.is_empty() {
            return b.clone();
        }
        if b.is_empty() {
            return a.clone();
        }
        Derivation(Some(Rc::new((a.clone(), b.clone()))), None)
    }

    fn is_empty(&self) -> bool {
        self.0.is_none() && self.1.is_none()
    }

    pub fn children(&self) -> Vec<(Symbol, State)> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(d) = stack.pop() {
            if let Some(c) = d.1 {
                out.push(c);
            }
            if let Some(pair) = &d.0 {
                stack.push(&pair.0);
                stack.push(&pair.1);
            }
        }
        out
    }
}

/// A set of achievable children-ORs, each with a derivation.
#[derive(Debug, Clone, Default)]
pub struct OrSet {
    items: HashMap<State, Derivation>,
}

impl OrSet {
    /// The set holding only the OR of no children.
    pub fn epsilon() -> OrSet {
        let mut items = HashMap::new();
        items.insert(0, Derivation::empty());
        OrSet { items }
    }

    pub fn nothing() -> OrSet {
        OrSet::default()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    /// One child labeled `label`, in any of the given states.
    pub fn symbol(label: Symbol, states: &[State]) -> OrSet {
        let items = states.iter().map(|&s| (s, Derivation::single(label, s))).collect();
        OrSet { items }
    }

    pub fn union(mut self, other: &OrSet) -> OrSet {
        for (k, d) in &other.items {
            self.items.entry(*k).or_insert_with(|| d.clone());
        }
        self
    }

    /// Children of both parts side by side.
    pub fn concat(&self, other: &OrSet) -> OrSet {
        let mut items = HashMap::with_capacity(self.items.len() * other.items.len());
        for (a, da) in &self.items {
            for (b, db) in &other.items {
                items.entry(a | b).or_insert_with(|| Derivation::join(da, db));
            }
        }
        OrSet { items }
    }

    /// One or more repetitions.
    pub fn plus(&self) -> OrSet {
        let base: Vec<(State, Derivation)> = self.items.iter().map(|(k, d)| (*k, d.clone())).collect();
        let mut items: HashMap<State, Derivation> = base.iter().cloned().collect();
        let mut queue: Vec<State> = items.keys().copied().collect();
        while let Some(v) = queue.pop() {
            let dv = items[&v].clone();
            for (s, ds) in &base {
                let w = v | s;
                if !items.contains_key(&w) {
                    items.insert(w, Derivation::join(&dv, ds));
                    queue.push(w);
                }
            }
        }
        OrSet { items }
    }

    pub fn optional(self) -> OrSet {
        self.union(&OrSet::epsilon())
    }

    pub fn star(&self) -> OrSet {
        self.plus().optional()
    }
}

/// Realizable states per label, each with the children that realize it.
#[derive(Debug)]
pub struct Saturation {
    queries: Vec<TwigQuery>,
    offsets: Vec<usize>,
    states: Vec<Vec<State>>,
    derivations: Vec<HashMap<State, Derivation>>,
}

/// Supplies, for a label, the ORs achievable by a children word of its rule
/// given the states currently known for every label. Returns an empty set
/// when the rule admits no word over those states.
pub trait ChildAlgebra {
    fn labels(&self) -> usize;
    fn children(&self, label: Symbol, states: &[Vec<State>]) -> OrSet;
}

impl Saturation {
    /// Runs the fixpoint. Panics if the queries have more than
    /// [`MAX_QUERY_NODES`] nodes in total.
    pub fn run(algebra: &dyn ChildAlgebra, queries: &[&TwigQuery]) -> Saturation {
        let total: usize = queries.iter().map(|q| q.len()).sum();
        assert!(total <= MAX_QUERY_NODES, "too many query nodes for exact reasoning");
        let mut offsets = Vec::new();
        let mut acc = 0;
        for q in queries {
            offsets.push(acc);
            acc += q.len();
        }
        let n = algebra.labels();
        let mut sat = Saturation {
            queries: queries.iter().map(|q| (*q).clone()).collect(),
            offsets,
            states: vec![Vec::new(); n],
            derivations: vec![HashMap::new(); n],
        };
        loop {
            let mut fresh: Vec<(usize, State, Derivation)> = Vec::new();
            for i in 0..n {
                let a = Symbol::from_index(i);
                let ors = algebra.children(a, &sat.states);
                for (o, d) in ors.items {
                    let s = sat.state_of(a, o);
                    if !sat.derivations[i].contains_key(&s) && !fresh.iter().any(|f| f.0 == i && f.1 == s) {
                        fresh.push((i, s, d));
                    }
                }
            }
            if fresh.is_empty() {
                return sat;
            }
            for (i, s, d) in fresh {
                sat.states[i].push(s);
                sat.derivations[i].insert(s, d);
            }
        }
    }

    /// The state of a node labeled `a` whose children OR to `o`.
    fn state_of(&self, a: Symbol, o: State) -> State {
        let below = o >> HIGH;
        let mut here: u64 = 0;
        for (q, &off) in self.queries.iter().zip(&self.offsets) {
            for x in (0..q.len()).rev() {
                let ok = q.label(x).matches(a)
                    && q.children(x).iter().all(|&y| {
                        let bit = 1u128 << (off + y);
                        match q.axis(y).unwrap() {
                            Axis::Child => o & bit != 0,
                            Axis::Descendant => below & bit != 0,
                        }
                    });
                if ok {
                    here |= 1 << (off + x);
                }
            }
        }
        let here = here as u128;
        here | ((here | below) << HIGH)
    }

    /// Bit of the root of the `i`-th query, in the "here" half.
    pub fn root_bit(&self, i: usize) -> State {
        1u128 << self.offsets[i]
    }

    pub fn states(&self, a: Symbol) -> &[State] {
        &self.states[a.index()]
    }

    pub fn is_realizable(&self, a: Symbol) -> bool {
        !self.states[a.index()].is_empty()
    }

    /// First realizable state of `a` satisfying `pred`.
    pub fn find(&self, a: Symbol, pred: impl Fn(State) -> bool) -> Option<State> {
        self.states[a.index()].iter().copied().find(|&s| pred(s))
    }

    /// A member tree whose root is labeled `a` and has state `s`.
    pub fn tree(&self, a: Symbol, s: State) -> UnorderedTree {
        let mut t = UnorderedTree::leaf(a);
        let root = t.root();
        let mut stack = vec![(root, a, s)];
        while let Some((n, label, state)) = stack.pop() {
            let d = &self.derivations[label.index()][&state];
            for (b, sb) in d.children() {
                let c = t.add_child(n, b);
                stack.push((c, b, sb));
            }
        }
        t
    }
}
