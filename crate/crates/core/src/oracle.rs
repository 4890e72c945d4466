//! Brute-force reference semantics and bounded exhaustive search. Nothing
//! here uses the characterizing triple, dependency graphs or saturation;
//! verdicts are tri-state so that running out of bounds is never mistaken
//! for a definite answer.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::dtd::{DfDtd, DfRegex};
use crate::error::{Error, Result};
use crate::expr::{DisjunctiveExpression, Factor, NormalizedExpression};
use crate::model::{Alphabet, Multiplicity, Symbol, UnorderedTree, UnorderedWord};
use crate::query::TwigQuery;
use crate::schema::Schema;
use crate::syntax::{Cursor, Tok};

/// Limits of an exhaustive search. Depth counts nodes on a root-to-leaf
/// path, so depth 1 means a single node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBounds {
    pub max_depth: usize,
    pub max_fanout: usize,
    pub max_total_nodes: usize,
    pub max_word_count: usize,
}

impl Default for EnumerationBounds {
    fn default() -> Self {
        EnumerationBounds { max_depth: 3, max_fanout: 3, max_total_nodes: 12, max_word_count: 4 }
    }
}

impl EnumerationBounds {
    /// Parses `depth,fanout,nodes,count`.
    pub fn parse(text: &str) -> Result<EnumerationBounds> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let bad = || Error::Syntax { pos: 0, msg: "expected bounds `depth,fanout,nodes,count`".into() };
        if parts.len() != 4 {
            return Err(bad());
        }
        let n: Vec<usize> = parts.iter().map(|p| p.parse().map_err(|_| bad())).collect::<Result<_>>()?;
        Ok(EnumerationBounds { max_depth: n[0], max_fanout: n[1], max_total_nodes: n[2], max_word_count: n[3] })
    }
}

/// Safety valve on the number of trees kept per label and level.
const MAX_TREES: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::True => "true",
            Tri::False => "false",
            Tri::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub verdict: Tri,
    /// The answer obtained by treating the bounds as complete; equals the
    /// verdict whenever that is definite.
    pub within_bounds: bool,
    /// Witness (for positive existential answers) or counterexample.
    pub witness: Option<UnorderedTree>,
    /// Candidate trees or words examined.
    pub examined: usize,
    /// Whether the search covered the whole (finite) space.
    pub exhaustive: bool,
}

// ---------------------------------------------------------------- words

/// Every unordered word over the first `n` symbols with total count at most
/// `max`, each once, shortest first.
pub fn enumerate_words(n: usize, max: usize) -> Vec<UnorderedWord> {
    let mut out = Vec::new();
    for total in 0..=max {
        let mut counts = vec![0u32; n];
        compositions(&mut counts, 0, total as u32, &mut out);
    }
    out
}

fn compositions(counts: &mut Vec<u32>, i: usize, left: u32, out: &mut Vec<UnorderedWord>) {
    if i + 1 >= counts.len() {
        if let Some(last) = counts.last_mut() {
            *last = left;
            out.push(UnorderedWord::from_counts(counts.clone()));
        } else if left == 0 {
            out.push(UnorderedWord::empty());
        }
        return;
    }
    for k in (0..=left).rev() {
        counts[i] = k;
        compositions(counts, i + 1, left - k, out);
    }
    counts[i] = 0;
}

fn counts_of(w: &UnorderedWord, n: usize) -> Vec<u32> {
    (0..n).map(|i| w.count(Symbol::from_index(i))).collect()
}

/// Non-empty sub-multisets of `u` containing a copy of its first symbol.
fn anchored_parts(u: &[u32]) -> Vec<Vec<u32>> {
    let first = match u.iter().position(|&c| c > 0) {
        Some(i) => i,
        None => return Vec::new(),
    };
    let mut out = vec![vec![0; u.len()]];
    for (i, &c) in u.iter().enumerate() {
        let lo = u32::from(i == first);
        let mut next = Vec::new();
        for v in &out {
            for k in lo..=c {
                let mut v = v.clone();
                v[i] = k;
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn sub_multisets(u: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; u.len()]];
    for (i, &c) in u.iter().enumerate() {
        let mut next = Vec::new();
        for v in &out {
            for k in 0..=c {
                let mut v = v.clone();
                v[i] = k;
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn minus(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn max_count(m: Multiplicity) -> Option<u64> {
    match m {
        Multiplicity::Zero => Some(0),
        Multiplicity::One | Multiplicity::Optional => Some(1),
        Multiplicity::Plus | Multiplicity::Star => None,
    }
}

/// `u ∈ L(D^M)`: `u` splits into `i ∈ ⟦M⟧` words of `L(D)`.
fn in_power(u: &[u32], member: &dyn Fn(&[u32]) -> bool, eps_in: bool, m: Multiplicity) -> bool {
    if u.iter().all(|&c| c == 0) {
        return m.contains(0) || (eps_in && m != Multiplicity::Zero);
    }
    let mut ks = HashSet::new();
    split_counts(u, member, 0, &mut ks);
    ks.into_iter().any(|k| m.contains(k) || (eps_in && max_count(m).map_or(true, |mx| mx > k)))
}

/// Collects every `k` such that `u` splits into `k` non-empty members.
fn split_counts(u: &[u32], member: &dyn Fn(&[u32]) -> bool, depth: u64, out: &mut HashSet<u64>) {
    if u.iter().all(|&c| c == 0) {
        out.insert(depth);
        return;
    }
    for v in anchored_parts(u) {
        if member(&v) {
            split_counts(&minus(u, &v), member, depth + 1, out);
        }
    }
}

fn factor_matches(u: &[u32], f: &Factor) -> bool {
    let disj = |v: &[u32]| {
        f.disjuncts.iter().any(|d| {
            let atom = |x: &[u32]| x.iter().enumerate().all(|(i, &c)| c == u32::from(i == d.symbol.index()));
            in_power(v, &atom, false, d.mult)
        })
    };
    let eps_in = f.disjuncts.iter().any(|d| d.mult.contains(0));
    in_power(u, &disj, eps_in, f.outer)
}

fn factors_match(u: &[u32], factors: &[Factor]) -> bool {
    let Some((f, rest)) = factors.split_first() else {
        return u.iter().all(|&c| c == 0);
    };
    sub_multisets(u).iter().any(|v| factor_matches(v, f) && factors_match(&minus(u, v), rest))
}

/// Membership by the set semantics of expressions: the word is split among
/// the factors, and each factor's share among copies of its disjunction.
pub fn naive_word_matches(w: &UnorderedWord, e: &DisjunctiveExpression, max_word_count: u64) -> Result<bool> {
    if w.total() > max_word_count {
        return Err(Error::BoundExceeded { count: w.total(), bound: max_word_count });
    }
    let n = e.alphabet().len().max(w.support().map(|(s, _)| s.index() + 1).max().unwrap_or(0));
    Ok(factors_match(&counts_of(w, n), e.factors()))
}

// ---------------------------------------------------------------- regular expressions

/// Ordinary regular expressions, with disjunction, matched on ordered words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regex {
    Epsilon,
    Sym(Symbol),
    Alt(Vec<Regex>),
    Cat(Vec<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    Opt(Box<Regex>),
}

impl Regex {
    /// `|` for choice, `,` or `.` for sequence, postfix `*`, `+`, `?`.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Regex> {
        let mut cur = Cursor::new(text)?;
        let r = parse_alt(&mut cur, alphabet)?;
        cur.finish()?;
        Ok(r)
    }

    pub fn from_df(e: &DfRegex) -> Regex {
        match e {
            DfRegex::Epsilon => Regex::Epsilon,
            DfRegex::Sym(a) => Regex::Sym(*a),
            DfRegex::Star(x) => Regex::Star(Box::new(Regex::from_df(x))),
            DfRegex::Opt(x) => Regex::Opt(Box::new(Regex::from_df(x))),
            DfRegex::Plus(x) => Regex::Plus(Box::new(Regex::from_df(x))),
            DfRegex::Concat(a, b) => Regex::Cat(vec![Regex::from_df(a), Regex::from_df(b)]),
        }
    }

    /// Positions where a match starting at `i` can end.
    fn ends(&self, w: &[Symbol], i: usize) -> Vec<usize> {
        let mut out = match self {
            Regex::Epsilon => vec![i],
            Regex::Sym(a) => {
                if w.get(i) == Some(a) {
                    vec![i + 1]
                } else {
                    vec![]
                }
            }
            Regex::Alt(rs) => rs.iter().flat_map(|r| r.ends(w, i)).collect(),
            Regex::Cat(rs) => {
                let mut at = vec![i];
                for r in rs {
                    let mut next: Vec<usize> = at.iter().flat_map(|&j| r.ends(w, j)).collect();
                    next.sort_unstable();
                    next.dedup();
                    at = next;
                }
                at
            }
            Regex::Opt(r) => {
                let mut v = r.ends(w, i);
                v.push(i);
                v
            }
            Regex::Star(r) | Regex::Plus(r) => {
                let mut seen: HashSet<usize> = HashSet::new();
                let mut frontier = r.ends(w, i);
                while let Some(j) = frontier.pop() {
                    if seen.insert(j) {
                        frontier.extend(r.ends(w, j));
                    }
                }
                if matches!(self, Regex::Star(_)) {
                    seen.insert(i);
                }
                seen.into_iter().collect()
            }
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn matches_ordered(&self, w: &[Symbol]) -> bool {
        self.ends(w, 0).contains(&w.len())
    }

    /// Some ordering of `w` matches.
    pub fn matches_some_order(&self, w: &UnorderedWord) -> bool {
        let mut counts: Vec<(Symbol, u32)> = w.support().collect();
        let mut buf = Vec::with_capacity(w.total() as usize);
        self.permute(&mut counts, &mut buf, w.total() as usize)
    }

    fn permute(&self, counts: &mut [(Symbol, u32)], buf: &mut Vec<Symbol>, len: usize) -> bool {
        if buf.len() == len {
            return self.matches_ordered(buf);
        }
        for i in 0..counts.len() {
            if counts[i].1 > 0 {
                counts[i].1 -= 1;
                buf.push(counts[i].0);
                let hit = self.permute(counts, buf, len);
                buf.pop();
                counts[i].1 += 1;
                if hit {
                    return true;
                }
            }
        }
        false
    }
}

fn parse_alt(cur: &mut Cursor, al: &Alphabet) -> Result<Regex> {
    let mut alts = vec![parse_cat(cur, al)?];
    while cur.eat(&Tok::Bar) {
        alts.push(parse_cat(cur, al)?);
    }
    Ok(if alts.len() == 1 { alts.pop().unwrap() } else { Regex::Alt(alts) })
}

fn parse_cat(cur: &mut Cursor, al: &Alphabet) -> Result<Regex> {
    let mut items = vec![parse_post(cur, al)?];
    while cur.eat(&Tok::Comma) || cur.eat(&Tok::Dot) {
        items.push(parse_post(cur, al)?);
    }
    Ok(if items.len() == 1 { items.pop().unwrap() } else { Regex::Cat(items) })
}

fn parse_post(cur: &mut Cursor, al: &Alphabet) -> Result<Regex> {
    let mut r = if cur.eat(&Tok::Epsilon) {
        Regex::Epsilon
    } else if cur.eat(&Tok::LParen) {
        let r = parse_alt(cur, al)?;
        cur.expect(&Tok::RParen, "`)`")?;
        r
    } else {
        Regex::Sym(al.symbol(&cur.ident()?)?)
    };
    loop {
        r = if cur.eat(&Tok::Star) {
            Regex::Star(Box::new(r))
        } else if cur.eat(&Tok::Plus) {
            Regex::Plus(Box::new(r))
        } else if cur.eat(&Tok::Question) {
            Regex::Opt(Box::new(r))
        } else {
            return Ok(r);
        }
    }
}

/// Ordered words of `L(e)` with at most `max_len` symbols.
pub fn regex_words(e: &DfRegex, max_len: usize) -> HashSet<Vec<Symbol>> {
    match e {
        DfRegex::Epsilon => HashSet::from([vec![]]),
        DfRegex::Sym(a) => {
            if max_len >= 1 {
                HashSet::from([vec![*a]])
            } else {
                HashSet::new()
            }
        }
        DfRegex::Opt(x) => {
            let mut s = regex_words(x, max_len);
            s.insert(vec![]);
            s
        }
        DfRegex::Star(x) | DfRegex::Plus(x) => {
            let base = regex_words(x, max_len);
            let mut out = base.clone();
            let mut frontier: Vec<Vec<Symbol>> = base.iter().cloned().collect();
            while let Some(w) = frontier.pop() {
                for b in &base {
                    if w.len() + b.len() <= max_len {
                        let mut c = w.clone();
                        c.extend_from_slice(b);
                        if out.insert(c.clone()) {
                            frontier.push(c);
                        }
                    }
                }
            }
            if matches!(e, DfRegex::Star(_)) {
                out.insert(vec![]);
            }
            out
        }
        DfRegex::Concat(a, b) => {
            let (sa, sb) = (regex_words(a, max_len), regex_words(b, max_len));
            let mut out = HashSet::new();
            for x in &sa {
                for y in &sb {
                    if x.len() + y.len() <= max_len {
                        let mut c = x.clone();
                        c.extend_from_slice(y);
                        out.insert(c);
                    }
                }
            }
            out
        }
    }
}

// ---------------------------------------------------------------- trees

/// Every tree over `alphabet` within the depth, fanout and size bounds, up
/// to isomorphism, each once.
pub fn enumerate_trees(alphabet: &Alphabet, bounds: &EnumerationBounds) -> Vec<UnorderedTree> {
    let everything = Universal(alphabet.clone());
    let mut out = Vec::new();
    for a in alphabet.symbols() {
        out.extend(typed_trees(&everything, a, bounds).trees.remove(&a).unwrap_or_default());
    }
    out
}

/// A tree language given by per-label constraints on children words.
pub trait TreeLanguage {
    fn alphabet(&self) -> &Alphabet;
    fn root(&self) -> Symbol;
    /// Whether a node labeled `label` may have children `w`.
    fn children_ok(&self, label: Symbol, w: &UnorderedWord) -> bool;
    /// Whether some admissible children word has more than `n` symbols.
    fn admits_longer(&self, label: Symbol, n: usize) -> bool;
    /// Labels that may occur below `label` (over-approximation).
    fn child_labels(&self, label: Symbol) -> Vec<Symbol>;
}

struct Universal(Alphabet);

impl TreeLanguage for Universal {
    fn alphabet(&self) -> &Alphabet {
        &self.0
    }
    fn root(&self) -> Symbol {
        Symbol::from_index(0)
    }
    fn children_ok(&self, _: Symbol, _: &UnorderedWord) -> bool {
        true
    }
    fn admits_longer(&self, _: Symbol, _: usize) -> bool {
        true
    }
    fn child_labels(&self, _: Symbol) -> Vec<Symbol> {
        self.0.symbols().collect()
    }
}

impl TreeLanguage for Schema {
    fn alphabet(&self) -> &Alphabet {
        Schema::alphabet(self)
    }
    fn root(&self) -> Symbol {
        Schema::root(self)
    }
    fn children_ok(&self, label: Symbol, w: &UnorderedWord) -> bool {
        naive_word_matches(w, &self.rule(label).as_disjunctive(), u64::MAX).expect("no bound")
    }
    fn admits_longer(&self, label: Symbol, n: usize) -> bool {
        let mut total = 0usize;
        for f in self.rule(label).factors() {
            let inner = f.disjuncts.iter().map(|d| max_count(d.mult)).try_fold(0u64, |m, x| x.map(|x| m.max(x)));
            match (inner, max_count(f.outer)) {
                (Some(i), Some(o)) => total += (i * o) as usize,
                (Some(0), None) => {}
                _ => return true,
            }
        }
        total > n
    }
    fn child_labels(&self, label: Symbol) -> Vec<Symbol> {
        self.rule(label).symbols().collect()
    }
}

/// Unordered reading of a disjunction-free DTD, decided by trying every
/// ordering of the children against the expression.
pub struct DtdLanguage {
    dtd: DfDtd,
    rules: Vec<Regex>,
}

impl DtdLanguage {
    pub fn new(dtd: &DfDtd) -> DtdLanguage {
        let rules = dtd.alphabet().symbols().map(|a| Regex::from_df(dtd.rule(a))).collect();
        DtdLanguage { dtd: dtd.clone(), rules }
    }
}

fn regex_max_len(e: &DfRegex) -> Option<usize> {
    match e {
        DfRegex::Epsilon => Some(0),
        DfRegex::Sym(_) => Some(1),
        DfRegex::Opt(x) => regex_max_len(x),
        DfRegex::Star(x) | DfRegex::Plus(x) => match regex_max_len(x) {
            Some(0) => Some(0),
            _ => None,
        },
        DfRegex::Concat(a, b) => Some(regex_max_len(a)? + regex_max_len(b)?),
    }
}

impl TreeLanguage for DtdLanguage {
    fn alphabet(&self) -> &Alphabet {
        self.dtd.alphabet()
    }
    fn root(&self) -> Symbol {
        self.dtd.root()
    }
    fn children_ok(&self, label: Symbol, w: &UnorderedWord) -> bool {
        self.rules[label.index()].matches_some_order(w)
    }
    fn admits_longer(&self, label: Symbol, n: usize) -> bool {
        regex_max_len(self.dtd.rule(label)).map_or(true, |m| m > n)
    }
    fn child_labels(&self, label: Symbol) -> Vec<Symbol> {
        self.dtd.rule(label).existential_set()
    }
}

/// Trees of a language, per root label, within bounds.
struct Typed {
    trees: HashMap<Symbol, Vec<UnorderedTree>>,
    exhaustive: bool,
}

/// Level-wise generation: trees of depth `d` rooted at `a` are `a` over an
/// admissible children word whose positions are filled with trees of depth
/// below `d`, chosen as multisets so that isomorphic trees arise once.
fn typed_trees(lang: &dyn TreeLanguage, start: Symbol, bounds: &EnumerationBounds) -> Typed {
    let al = lang.alphabet();
    let n = al.len();
    let mut exhaustive = true;
    // Labels that may occur, with their shallowest depth; the search is
    // exhaustive only if no label can occur below the depth bound.
    let mut level: Vec<Option<usize>> = vec![None; n];
    let mut layer = vec![start];
    let mut seen_at: HashSet<(Symbol, usize)> = HashSet::new();
    for d in 1..=bounds.max_depth + 1 {
        if layer.is_empty() {
            break;
        }
        if d > bounds.max_depth {
            exhaustive = false;
            break;
        }
        let mut next = Vec::new();
        for &a in &layer {
            if level[a.index()].is_none() {
                level[a.index()] = Some(d);
            }
            if lang.admits_longer(a, bounds.max_fanout) {
                exhaustive = false;
            }
            for b in lang.child_labels(a) {
                if seen_at.insert((b, d + 1)) {
                    next.push(b);
                }
            }
        }
        layer = next;
    }
    let words: Vec<Vec<UnorderedWord>> = al
        .symbols()
        .map(|a| {
            if level[a.index()].is_none() {
                return Vec::new();
            }
            enumerate_words(n, bounds.max_fanout).into_iter().filter(|w| lang.children_ok(a, w)).collect()
        })
        .collect();
    // by_depth[a]: trees rooted at `a` with depth at most the current level.
    let mut by_depth: Vec<Vec<UnorderedTree>> = vec![Vec::new(); n];
    for d in 1..=bounds.max_depth {
        let mut next: Vec<Vec<UnorderedTree>> = vec![Vec::new(); n];
        for a in al.symbols() {
            let budget = match level[a.index()] {
                Some(l) if l + d <= bounds.max_depth + 1 => bounds.max_depth + 1 - l,
                _ => continue,
            };
            if d > budget {
                continue;
            }
            let mut seen = HashSet::new();
            for w in &words[a.index()] {
                let mut partial: Vec<UnorderedTree> = vec![UnorderedTree::leaf(a)];
                for (b, k) in w.support() {
                    let pool = &by_depth[b.index()];
                    let mut grown = Vec::new();
                    for t in &partial {
                        for combo in multisets(pool.len(), k as usize) {
                            let mut t2 = t.clone();
                            let root = t2.root();
                            for i in combo {
                                t2.graft(root, &pool[i]);
                            }
                            if t2.len() <= bounds.max_total_nodes {
                                grown.push(t2);
                            } else {
                                exhaustive = false;
                            }
                        }
                    }
                    partial = grown;
                }
                for t in partial {
                    if seen.insert(t.canonical()) {
                        next[a.index()].push(t);
                    }
                }
                if next[a.index()].len() > MAX_TREES {
                    exhaustive = false;
                    break;
                }
            }
        }
        by_depth = next;
    }
    let trees = al.symbols().map(|a| (a, std::mem::take(&mut by_depth[a.index()]))).collect();
    Typed { trees, exhaustive }
}

/// Non-decreasing index sequences of length `k` over `0..n`.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            cur.push(i);
            go(n, k, i, cur, out);
            cur.pop();
        }
    }
    go(n, k, 0, &mut cur, &mut out);
    out
}

/// Members of the language within bounds, smallest first.
pub struct Members {
    pub trees: Vec<UnorderedTree>,
    /// No member lies outside the bounds.
    pub exhaustive: bool,
}

pub fn members(lang: &dyn TreeLanguage, bounds: &EnumerationBounds) -> Members {
    let mut typed = typed_trees(lang, lang.root(), bounds);
    let mut trees = typed.trees.remove(&lang.root()).unwrap_or_default();
    trees.sort_by_key(|t| (t.len(), t.canonical()));
    Members { trees, exhaustive: typed.exhaustive }
}

// ---------------------------------------------------------------- decisions

pub enum Problem<'a> {
    /// Definite regardless of bounds.
    Membership {
        lang: &'a dyn TreeLanguage,
        tree: &'a UnorderedTree,
    },
    Satisfiability {
        lang: &'a dyn TreeLanguage,
    },
    SchemaContainment {
        sub: &'a dyn TreeLanguage,
        sup: &'a dyn TreeLanguage,
    },
    QuerySatisfiability {
        lang: &'a dyn TreeLanguage,
        q: &'a TwigQuery,
    },
    QueryImplication {
        lang: &'a dyn TreeLanguage,
        q: &'a TwigQuery,
    },
    QueryContainment {
        lang: &'a dyn TreeLanguage,
        p: &'a TwigQuery,
        q: &'a TwigQuery,
    },
    /// `L(e)` equals the unordered closure of `r`, compared on words up to
    /// the word-count bound.
    Capture {
        e: &'a DisjunctiveExpression,
        r: &'a Regex,
    },
}

fn tree_ok(lang: &dyn TreeLanguage, t: &UnorderedTree) -> bool {
    t.label(t.root()) == lang.root()
        && t.node_ids().all(|n| lang.children_ok(t.label(n), &t.children_word(n).expect("node")))
}

/// Searches for a member with `pred`. Finding one settles `found`;
/// otherwise exhaustiveness settles `!found`.
fn search(
    lang: &dyn TreeLanguage,
    bounds: &EnumerationBounds,
    found: Tri,
    pred: impl Fn(&UnorderedTree) -> bool,
) -> OracleOutcome {
    let m = members(lang, bounds);
    let examined = m.trees.len();
    match m.trees.into_iter().find(|t| pred(t)) {
        Some(t) => OracleOutcome {
            verdict: found,
            within_bounds: found == Tri::True,
            witness: Some(t),
            examined,
            exhaustive: m.exhaustive,
        },
        None => OracleOutcome {
            verdict: if m.exhaustive { negate(found) } else { Tri::Unknown },
            within_bounds: found == Tri::False,
            witness: None,
            examined,
            exhaustive: m.exhaustive,
        },
    }
}

fn negate(t: Tri) -> Tri {
    match t {
        Tri::True => Tri::False,
        Tri::False => Tri::True,
        Tri::Unknown => Tri::Unknown,
    }
}

pub fn oracle_decide(problem: &Problem, bounds: &EnumerationBounds) -> OracleOutcome {
    match *problem {
        Problem::Membership { lang, tree } => OracleOutcome {
            verdict: if tree_ok(lang, tree) { Tri::True } else { Tri::False },
            within_bounds: tree_ok(lang, tree),
            witness: None,
            examined: 1,
            exhaustive: true,
        },
        Problem::Satisfiability { lang } => search(lang, bounds, Tri::True, |_| true),
        Problem::SchemaContainment { sub, sup } => search(sub, bounds, Tri::False, |t| !tree_ok(sup, t)),
        Problem::QuerySatisfiability { lang, q } => search(lang, bounds, Tri::True, |t| q.embeds_in_tree(t)),
        Problem::QueryImplication { lang, q } => search(lang, bounds, Tri::False, |t| !q.embeds_in_tree(t)),
        Problem::QueryContainment { lang, p, q } => {
            search(lang, bounds, Tri::False, |t| p.embeds_in_tree(t) && !q.embeds_in_tree(t))
        }
        Problem::Capture { e, r } => {
            let words = enumerate_words(e.alphabet().len(), bounds.max_word_count);
            let examined = words.len();
            let differs = words.into_iter().find(|w| {
                naive_word_matches(w, e, bounds.max_word_count as u64).expect("within bound") != r.matches_some_order(w)
            });
            match differs {
                Some(w) => {
                    // Report the separating word as the children of a root.
                    let root = Symbol::from_index(0);
                    let mut t = UnorderedTree::leaf(root);
                    let n = t.root();
                    for (s, k) in w.support() {
                        for _ in 0..k {
                            t.add_child(n, s);
                        }
                    }
                    OracleOutcome {
                        verdict: Tri::False,
                        within_bounds: false,
                        witness: Some(t),
                        examined,
                        exhaustive: false,
                    }
                }
                None => OracleOutcome {
                    verdict: Tri::Unknown,
                    within_bounds: true,
                    witness: None,
                    examined,
                    exhaustive: false,
                },
            }
        }
    }
}

/// Words up to `max` on which the expression and its normal form disagree.
pub fn normalization_mismatches(e: &DisjunctiveExpression, max: usize) -> Vec<UnorderedWord> {
    let n: NormalizedExpression = e.normalize();
    enumerate_words(e.alphabet().len(), max)
        .into_iter()
        .filter(|w| naive_word_matches(w, e, max as u64).unwrap() != n.matches(w))
        .collect()
}
