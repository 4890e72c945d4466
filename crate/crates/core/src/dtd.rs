//! Disjunction-free DTDs read with unordered semantics: a children word
//! matches a rule when some ordering of it matches the regular expression.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::exact::{ChildAlgebra, OrSet, Saturation, State, MAX_QUERY_NODES};
use crate::graph::RootedGraph;
use crate::model::{Alphabet, NodeId, Symbol, UnorderedTree, UnorderedWord};
use crate::query::TwigQuery;
use crate::schema::{mentioned_labels, shift, split_statements};
use crate::syntax::{Cursor, Tok};

/// `E ::= ε | a | E* | E? | E+ | E.E`; symbols may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DfRegex {
    Epsilon,
    Sym(Symbol),
    Star(Box<DfRegex>),
    Opt(Box<DfRegex>),
    Plus(Box<DfRegex>),
    Concat(Box<DfRegex>, Box<DfRegex>),
}

use DfRegex::*;

impl DfRegex {
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<DfRegex> {
        let mut cur = Cursor::new(text)?;
        let e = parse_concat(&mut cur, alphabet)?;
        cur.finish()?;
        Ok(e)
    }

    pub fn concat(a: DfRegex, b: DfRegex) -> DfRegex {
        Concat(Box::new(a), Box::new(b))
    }

    pub fn size(&self) -> usize {
        match self {
            Epsilon | Sym(_) => 1,
            Star(e) | Opt(e) | Plus(e) => 1 + e.size(),
            Concat(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Symbols occurring in every word.
    pub fn universal_set(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect(false, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Symbols occurring in some word.
    pub fn existential_set(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.collect(true, &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect(&self, existential: bool, out: &mut Vec<Symbol>) {
        match self {
            Epsilon => {}
            Sym(a) => out.push(*a),
            Star(e) | Opt(e) => {
                if existential {
                    e.collect(existential, out)
                }
            }
            Plus(e) => e.collect(existential, out),
            Concat(a, b) => {
                a.collect(existential, out);
                b.collect(existential, out);
            }
        }
    }

    /// Fewest occurrences of `a` in a word of the language.
    pub fn minnb(&self, a: Symbol) -> u64 {
        match self {
            Epsilon | Star(_) | Opt(_) => 0,
            Sym(b) => u64::from(*b == a),
            Plus(e) => e.minnb(a),
            Concat(x, y) => x.minnb(a) + y.minnb(a),
        }
    }

    /// The expression restricted to words over symbols satisfying `keep`;
    /// `None` when no such word exists.
    pub fn restrict(&self, keep: &impl Fn(Symbol) -> bool) -> Option<DfRegex> {
        Some(match self {
            Epsilon => Epsilon,
            Sym(a) => {
                if keep(*a) {
                    Sym(*a)
                } else {
                    return None;
                }
            }
            Star(e) => e.restrict(keep).map_or(Epsilon, |e| Star(Box::new(e))),
            Opt(e) => e.restrict(keep).map_or(Epsilon, |e| Opt(Box::new(e))),
            Plus(e) => Plus(Box::new(e.restrict(keep)?)),
            Concat(a, b) => DfRegex::concat(a.restrict(keep)?, b.restrict(keep)?),
        })
    }

    /// Unordered membership: some ordering of `w` is in the language.
    /// Decided exactly over Parikh vectors bounded by `w`.
    pub fn matches_unordered(&self, w: &UnorderedWord) -> bool {
        let n = w.support().map(|(s, _)| s.index() + 1).max().unwrap_or(0);
        let target: Vec<u32> = (0..n).map(|i| w.count(Symbol::from_index(i))).collect();
        self.parikh(&target).contains(&target)
    }

    /// Parikh vectors of the language that are bounded by `cap`.
    fn parikh(&self, cap: &[u32]) -> HashSet<Vec<u32>> {
        let zero = vec![0; cap.len()];
        match self {
            Epsilon => HashSet::from([zero]),
            Sym(a) => {
                let mut v = zero;
                match v.get_mut(a.index()) {
                    Some(c) if cap[a.index()] > 0 => {
                        *c = 1;
                        HashSet::from([v])
                    }
                    _ => HashSet::new(),
                }
            }
            Opt(e) => {
                let mut s = e.parikh(cap);
                s.insert(zero);
                s
            }
            Plus(e) => additive_closure(&e.parikh(cap), cap),
            Star(e) => {
                let mut s = additive_closure(&e.parikh(cap), cap);
                s.insert(zero);
                s
            }
            Concat(a, b) => {
                let (sa, sb) = (a.parikh(cap), b.parikh(cap));
                let mut out = HashSet::new();
                for x in &sa {
                    for y in &sb {
                        if let Some(z) = add_within(x, y, cap) {
                            out.insert(z);
                        }
                    }
                }
                out
            }
        }
    }

    /// Child-OR values for the exact engine.
    pub(crate) fn orset(&self, states: &[Vec<State>]) -> OrSet {
        match self {
            Epsilon => OrSet::epsilon(),
            Sym(a) => OrSet::symbol(*a, &states[a.index()]),
            Star(e) => e.orset(states).star(),
            Opt(e) => e.orset(states).optional(),
            Plus(e) => e.orset(states).plus(),
            Concat(a, b) => {
                let left = a.orset(states);
                if left.is_empty() {
                    return left;
                }
                left.concat(&b.orset(states))
            }
        }
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        RegexDisplay(self, alphabet)
    }
}

fn add_within(x: &[u32], y: &[u32], cap: &[u32]) -> Option<Vec<u32>> {
    let z: Vec<u32> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    z.iter().zip(cap).all(|(a, c)| a <= c).then_some(z)
}

/// Sums of one or more vectors of `base`, bounded by `cap`.
fn additive_closure(base: &HashSet<Vec<u32>>, cap: &[u32]) -> HashSet<Vec<u32>> {
    let mut out = base.clone();
    let mut queue: Vec<Vec<u32>> = base.iter().cloned().collect();
    while let Some(v) = queue.pop() {
        for b in base {
            if let Some(z) = add_within(&v, b, cap) {
                if out.insert(z.clone()) {
                    queue.push(z);
                }
            }
        }
    }
    out
}

fn parse_concat(cur: &mut Cursor, alphabet: &Alphabet) -> Result<DfRegex> {
    let mut e = parse_postfix(cur, alphabet)?;
    while cur.eat(&Tok::Dot) || cur.eat(&Tok::Comma) {
        e = DfRegex::concat(e, parse_postfix(cur, alphabet)?);
    }
    Ok(e)
}

fn parse_postfix(cur: &mut Cursor, alphabet: &Alphabet) -> Result<DfRegex> {
    let mut e = match cur.peek() {
        Some(Tok::Epsilon) => {
            cur.bump();
            Epsilon
        }
        Some(Tok::LParen) => {
            cur.bump();
            let e = parse_concat(cur, alphabet)?;
            cur.expect(&Tok::RParen, "`)`")?;
            e
        }
        Some(Tok::Bar) => return Err(cur.error("disjunction is not allowed in a disjunction-free DTD".into())),
        _ => Sym(alphabet.symbol(&cur.ident()?)?),
    };
    loop {
        e = if cur.eat(&Tok::Star) {
            Star(Box::new(e))
        } else if cur.eat(&Tok::Question) {
            Opt(Box::new(e))
        } else if cur.eat(&Tok::Plus) {
            Plus(Box::new(e))
        } else {
            return Ok(e);
        };
    }
}

struct RegexDisplay<'a>(&'a DfRegex, &'a Alphabet);

impl fmt::Display for RegexDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let al = self.1;
        let atom = |e: &DfRegex, f: &mut fmt::Formatter<'_>| match e {
            Concat(..) => write!(f, "({})", e.display(al)),
            _ => write!(f, "{}", e.display(al)),
        };
        match self.0 {
            Epsilon => f.write_str("epsilon"),
            Sym(a) => f.write_str(al.name(*a)),
            Star(e) | Opt(e) | Plus(e) => {
                match **e {
                    Star(_) | Opt(_) | Plus(_) | Concat(..) => write!(f, "({})", e.display(al))?,
                    _ => atom(e, f)?,
                }
                f.write_str(match self.0 {
                    Star(_) => "*",
                    Opt(_) => "?",
                    _ => "+",
                })
            }
            Concat(a, b) => {
                write!(f, "{}", a.display(al))?;
                f.write_str(".")?;
                atom(b, f)
            }
        }
    }
}

/// A disjunction-free DTD: a root label and one expression per label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfDtd {
    alphabet: Alphabet,
    root: Symbol,
    rules: Vec<DfRegex>,
}

impl DfDtd {
    pub fn new(alphabet: Alphabet, root: Symbol, mut rules: Vec<DfRegex>) -> DfDtd {
        rules.resize(alphabet.len(), Epsilon);
        DfDtd { alphabet, root, rules }
    }

    /// Reads `root = r` and `label -> regex` statements.
    pub fn parse(text: &str) -> Result<DfDtd> {
        let (root, texts) = split_statements(text)?;
        let alphabet = Alphabet::new(mentioned_labels(&root, &texts)?)?;
        DfDtd::parse_with_alphabet_inner(&alphabet, &root, &texts)
    }

    pub fn parse_with_alphabet(text: &str, alphabet: &Alphabet) -> Result<DfDtd> {
        let (root, texts) = split_statements(text)?;
        DfDtd::parse_with_alphabet_inner(alphabet, &root, &texts)
    }

    fn parse_with_alphabet_inner(alphabet: &Alphabet, root: &str, texts: &[crate::schema::RuleText]) -> Result<DfDtd> {
        let root = alphabet.symbol(root)?;
        let mut rules = vec![Epsilon; alphabet.len()];
        for r in texts {
            let label = alphabet.symbol(&r.label)?;
            rules[label.index()] = DfRegex::parse(&r.body, alphabet).map_err(|e| shift(e, r.offset))?;
        }
        Ok(DfDtd::new(alphabet.clone(), root, rules))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn root(&self) -> Symbol {
        self.root
    }

    pub fn rule(&self, a: Symbol) -> &DfRegex {
        &self.rules[a.index()]
    }

    pub fn tree_satisfies(&self, t: &UnorderedTree) -> bool {
        t.label(t.root()) == self.root
            && t.node_ids().all(|n: NodeId| {
                let w = t.children_word(n).expect("node of t");
                self.rule(t.label(n)).matches_unordered(&w)
            })
    }

    /// `(G_S, G^u_S)`: edges to existential and to universal symbols.
    pub fn dependency_graphs(&self) -> (RootedGraph, RootedGraph) {
        let n = self.alphabet.len();
        let mut g = RootedGraph::over_symbols(n, self.root);
        let mut gu = RootedGraph::over_symbols(n, self.root);
        for a in self.alphabet.symbols() {
            for b in self.rule(a).existential_set() {
                g.add_edge(a.index(), b.index());
            }
            for b in self.rule(a).universal_set() {
                gu.add_edge(a.index(), b.index());
            }
        }
        (g, gu)
    }

    /// Labels with some finite member tree: no universal-graph cycle is
    /// reachable from them.
    pub fn satisfiable_labels(&self) -> Vec<bool> {
        let (_, gu) = self.dependency_graphs();
        let reach = gu.closure();
        let n = self.alphabet.len();
        (0..n).map(|a| !(0..n).any(|b| (a == b || reach[a][b]) && reach[b][b])).collect()
    }

    /// Fails when a universal-graph cycle is reachable from the root.
    pub fn check(&self) -> Result<()> {
        let live = self.satisfiable_labels();
        let (_, gu) = self.dependency_graphs();
        let reach = gu.reachable_from_root();
        let bad: Vec<String> = self
            .alphabet
            .symbols()
            .filter(|a| reach[a.index()] && !live[a.index()])
            .map(|a| self.alphabet.name(a).to_string())
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::UnsatisfiableLabels(bad))
        }
    }

    pub fn is_satisfiable(&self) -> bool {
        self.check().is_ok()
    }

    /// Unfolding of the universal graph where each node gets `minnb`
    /// copies of every required child subtree.
    pub fn unfold(&self) -> Result<UnorderedTree> {
        self.check()?;
        let mut t = UnorderedTree::leaf(self.root);
        let mut stack = vec![t.root()];
        while let Some(n) = stack.pop() {
            let rule = self.rule(t.label(n)).clone();
            for b in rule.universal_set() {
                for _ in 0..rule.minnb(b) {
                    stack.push(t.add_child(n, b));
                }
            }
        }
        Ok(t)
    }

    /// Every member satisfies `q` (vacuously true without members).
    pub fn query_implied(&self, q: &TwigQuery) -> bool {
        !self.is_satisfiable() || self.dependency_graphs().1.embeds(q)
    }

    /// A member satisfying `q`, by state saturation.
    pub fn query_witness(&self, q: &TwigQuery) -> Option<UnorderedTree> {
        let sat = Saturation::run(self, &[q]);
        let bit = sat.root_bit(0);
        let st = sat.find(self.root, |s| s & bit != 0)?;
        Some(sat.tree(self.root, st))
    }

    pub fn query_satisfiable(&self, q: &TwigQuery) -> bool {
        self.query_witness(q).is_some()
    }

    /// `p ⊆_S q`; on failure, a member satisfying `p` and not `q`.
    pub fn query_contained(&self, p: &TwigQuery, q: &TwigQuery) -> std::result::Result<(), UnorderedTree> {
        assert!(p.len() + q.len() <= MAX_QUERY_NODES, "queries too large");
        let sat = Saturation::run(self, &[p, q]);
        let (pb, qb) = (sat.root_bit(0), sat.root_bit(1));
        match sat.find(self.root, |s| s & pb != 0 && s & qb == 0) {
            Some(st) => Err(sat.tree(self.root, st)),
            None => Ok(()),
        }
    }

    pub fn display(&self) -> impl fmt::Display + '_ {
        DtdDisplay(self)
    }
}

impl ChildAlgebra for DfDtd {
    fn labels(&self) -> usize {
        self.alphabet.len()
    }

    fn children(&self, label: Symbol, states: &[Vec<State>]) -> OrSet {
        self.rule(label).orset(states)
    }
}

struct DtdDisplay<'a>(&'a DfDtd);

impl fmt::Display for DtdDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.0;
        writeln!(f, "root = {}", d.alphabet.name(d.root))?;
        for a in d.alphabet.symbols() {
            if d.rule(a) != &Epsilon {
                writeln!(f, "{} -> {}", d.alphabet.name(a), d.rule(a).display(&d.alphabet))?;
            }
        }
        Ok(())
    }
}
