//! Disjunctive multiplicity schemas: parsing, membership, satisfiability,
//! universality and containment.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{Factor, FactorForm, NormalizedExpression};
use crate::model::{Alphabet, Multiplicity, NodeId, Symbol, UnorderedTree, UnorderedWord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaKind {
    /// Disjunctive multiplicity schema.
    Dms,
    /// Disjunction-free multiplicity schema.
    Ms,
}

/// One `label -> body` statement of a schema file.
#[derive(Debug, Clone)]
pub(crate) struct RuleText {
    pub label: String,
    pub body: String,
    pub offset: usize,
}

/// Splits a schema file into its root directive and rule statements.
/// Statements end at a newline or `;`; `#` starts a comment.
pub(crate) fn split_statements(text: &str) -> Result<(String, Vec<RuleText>)> {
    let mut root = None;
    let mut rules = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.split('#').next().unwrap_or("");
        let mut stmt_off = offset;
        for stmt in content.split(';') {
            let trimmed = stmt.trim();
            let lead = stmt.len() - stmt.trim_start().len();
            let pos = stmt_off + lead;
            stmt_off += stmt.len() + 1;
            if trimmed.is_empty() {
                continue;
            }
            if let Some((label, body)) = trimmed.split_once("->") {
                let label = label.trim();
                if label.is_empty() {
                    return Err(Error::Syntax { pos, msg: "missing label before `->`".into() });
                }
                rules.push(RuleText { label: label.to_string(), body: body.trim().to_string(), offset: pos });
            } else if let Some((kw, name)) = trimmed.split_once('=') {
                if kw.trim() != "root" || name.trim().is_empty() || root.is_some() {
                    return Err(Error::Syntax { pos, msg: "expected `root = <label>` once".into() });
                }
                root = Some(name.trim().to_string());
            } else {
                return Err(Error::Syntax { pos, msg: "expected `root = <label>` or `<label> -> <rule>`".into() });
            }
        }
        offset += line.len();
    }
    let root = root.ok_or(Error::MissingRoot)?;
    let mut seen: Vec<&str> = Vec::new();
    for r in &rules {
        if seen.contains(&r.label.as_str()) {
            return Err(Error::DuplicateRule(r.label.clone()));
        }
        seen.push(&r.label);
    }
    Ok((root, rules))
}

/// Labels in order of appearance: root, then rule labels and rule bodies.
pub(crate) fn mentioned_labels(root: &str, rules: &[RuleText]) -> Result<Vec<String>> {
    let mut names = vec![root.to_string()];
    for r in rules {
        if !names.contains(&r.label) {
            names.push(r.label.clone());
        }
        for n in crate::syntax::identifiers(&r.body).map_err(|e| shift(e, r.offset))? {
            if !names.contains(&n) {
                names.push(n);
            }
        }
    }
    Ok(names)
}

pub(crate) fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { pos, msg } => Error::Syntax { pos: pos + by, msg },
        other => other,
    }
}

/// A schema: a root label and one normalized rule per label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    alphabet: Alphabet,
    root: Symbol,
    rules: Vec<NormalizedExpression>,
    kind: SchemaKind,
}

impl Schema {
    /// `rules[i]` is the rule of the symbol with index `i`; missing
    /// trailing rules default to epsilon.
    pub fn new(alphabet: Alphabet, root: Symbol, mut rules: Vec<NormalizedExpression>) -> Schema {
        while rules.len() < alphabet.len() {
            rules.push(NormalizedExpression::epsilon(alphabet.clone()));
        }
        let kind =
            if rules.iter().all(NormalizedExpression::is_disjunction_free) { SchemaKind::Ms } else { SchemaKind::Dms };
        Schema { alphabet, root, rules, kind }
    }

    /// Parses a schema whose alphabet is every label it mentions.
    pub fn parse(text: &str) -> Result<Schema> {
        let (root, rules) = split_statements(text)?;
        let alphabet = Alphabet::new(mentioned_labels(&root, &rules)?)?;
        Schema::build(&alphabet, &root, &rules)
    }

    /// Parses a schema over a fixed alphabet; other labels are errors.
    pub fn parse_with_alphabet(text: &str, alphabet: &Alphabet) -> Result<Schema> {
        let (root, rules) = split_statements(text)?;
        Schema::build(alphabet, &root, &rules)
    }

    fn build(alphabet: &Alphabet, root: &str, texts: &[RuleText]) -> Result<Schema> {
        let written_with_choice = texts.iter().any(|r| r.body.contains('|'));
        let root = alphabet.symbol(root)?;
        let mut rules = vec![NormalizedExpression::epsilon(alphabet.clone()); alphabet.len()];
        for r in texts {
            let label = alphabet.symbol(&r.label)?;
            rules[label.index()] = NormalizedExpression::parse(&r.body, alphabet).map_err(|e| shift(e, r.offset))?;
        }
        let mut s = Schema::new(alphabet.clone(), root, rules);
        if written_with_choice {
            s.kind = SchemaKind::Dms;
        }
        Ok(s)
    }

    /// Whether every normalized rule is disjunction-free, so that the
    /// multiplicity-schema analyses apply (even if written with `|`).
    pub fn is_disjunction_free(&self) -> bool {
        self.rules.iter().all(NormalizedExpression::is_disjunction_free)
    }

    /// Disjunction-free schema from per-label multiplicity lists.
    pub fn from_multiplicities(
        alphabet: Alphabet,
        root: Symbol,
        rules: &[Vec<(Symbol, Multiplicity)>],
    ) -> Result<Schema> {
        let mut exprs = Vec::with_capacity(alphabet.len());
        for i in 0..alphabet.len() {
            let r = rules.get(i).cloned().unwrap_or_default();
            exprs.push(NormalizedExpression::from_multiplicities(alphabet.clone(), r)?);
        }
        Ok(Schema::new(alphabet, root, exprs))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn root(&self) -> Symbol {
        self.root
    }

    pub fn kind(&self) -> SchemaKind {
        self.kind
    }

    pub fn rule(&self, a: Symbol) -> &NormalizedExpression {
        &self.rules[a.index()]
    }

    pub fn rules(&self) -> &[NormalizedExpression] {
        &self.rules
    }

    /// Naive membership: root label, then every node's children word.
    pub fn tree_satisfies(&self, t: &UnorderedTree) -> bool {
        t.label(t.root()) == self.root && t.node_ids().all(|n| self.node_ok(t, n))
    }

    fn node_ok(&self, t: &UnorderedTree, n: NodeId) -> bool {
        let w = t.children_word(n).expect("node of t");
        self.rule(t.label(n)).matches(&w)
    }

    /// For each label, the round of the least fixpoint in which it became
    /// satisfiable (`None` when it never does).
    pub fn satisfiability_ranks(&self) -> Vec<Option<usize>> {
        let mut rank: Vec<Option<usize>> = vec![None; self.alphabet.len()];
        let mut round = 0;
        loop {
            let ok: Vec<usize> = (0..rank.len())
                .filter(|&i| {
                    rank[i].is_none()
                        && self.rules[i].restrict(|s| rank.get(s.index()).is_some_and(|r| r.is_some())).is_some()
                })
                .collect();
            if ok.is_empty() {
                return rank;
            }
            for i in ok {
                rank[i] = Some(round);
            }
            round += 1;
        }
    }

    pub fn satisfiable_labels(&self) -> Vec<bool> {
        self.satisfiability_ranks().into_iter().map(|r| r.is_some()).collect()
    }

    pub fn is_satisfiable(&self) -> bool {
        self.satisfiable_labels()[self.root.index()]
    }

    /// Rule of `a` restricted to words over satisfiable labels.
    pub fn restricted_rule(&self, a: Symbol, live: &[bool]) -> Option<NormalizedExpression> {
        self.rule(a).restrict(|s| live[s.index()])
    }

    /// Labels reachable from the root through symbols occurring in rules;
    /// with `live`, through restricted rules only.
    pub fn reachable(&self, live: Option<&[bool]>) -> Vec<bool> {
        let mut seen = vec![false; self.alphabet.len()];
        let mut queue = VecDeque::from([self.root]);
        seen[self.root.index()] = true;
        while let Some(a) = queue.pop_front() {
            let rule = match live {
                Some(l) => match self.restricted_rule(a, l) {
                    Some(r) => r,
                    None => continue,
                },
                None => self.rule(a).clone(),
            };
            for b in rule.symbols() {
                if !seen[b.index()] {
                    seen[b.index()] = true;
                    queue.push_back(b);
                }
            }
        }
        seen
    }

    /// Whether every tree rooted at the root label is a member.
    pub fn is_universal(&self) -> bool {
        self.reachable(None).iter().enumerate().all(|(i, &r)| !r || self.rules[i].is_universal())
    }

    /// A smallest-effort member tree rooted at `label`, if it is satisfiable.
    pub fn minimal_tree(&self, label: Symbol) -> Option<UnorderedTree> {
        let ranks = self.satisfiability_ranks();
        ranks[label.index()]?;
        let mut t = UnorderedTree::leaf(label);
        let root = t.root();
        self.fill_minimal(&mut t, root, &ranks);
        Some(t)
    }

    fn fill_minimal(&self, t: &mut UnorderedTree, n: NodeId, ranks: &[Option<usize>]) {
        let here = ranks[t.label(n).index()].expect("satisfiable");
        let w = self
            .rule(t.label(n))
            .word_using(|s| ranks[s.index()].is_some_and(|r| r < here), None)
            .expect("rank witness");
        for (b, k) in w.support() {
            for _ in 0..k {
                let c = t.add_child(n, b);
                self.fill_minimal(t, c, ranks);
            }
        }
    }

    /// Adds children spelling `w` under `n`, each completed minimally.
    fn attach_word(&self, t: &mut UnorderedTree, n: NodeId, w: &UnorderedWord, ranks: &[Option<usize>]) {
        for (b, k) in w.support() {
            for _ in 0..k {
                let c = t.add_child(n, b);
                self.fill_minimal(t, c, ranks);
            }
        }
    }

    /// A member tree containing a node labeled `target` whose children word
    /// is `word` (which must use satisfiable labels only), if `target` is
    /// reachable through satisfiable labels.
    pub fn tree_with_node(&self, target: Symbol, word: &UnorderedWord) -> Option<UnorderedTree> {
        let ranks = self.satisfiability_ranks();
        let live: Vec<bool> = ranks.iter().map(|r| r.is_some()).collect();
        if !live[self.root.index()] {
            return None;
        }
        // Breadth-first parents over restricted rules.
        let mut parent: Vec<Option<Symbol>> = vec![None; self.alphabet.len()];
        let mut seen = vec![false; self.alphabet.len()];
        seen[self.root.index()] = true;
        let mut queue = VecDeque::from([self.root]);
        while let Some(a) = queue.pop_front() {
            if a == target {
                break;
            }
            let Some(rule) = self.restricted_rule(a, &live) else {
                continue;
            };
            for b in rule.symbols() {
                if !seen[b.index()] {
                    seen[b.index()] = true;
                    parent[b.index()] = Some(a);
                    queue.push_back(b);
                }
            }
        }
        if !seen[target.index()] {
            return None;
        }
        let mut path = vec![target];
        while let Some(p) = parent[path.last().unwrap().index()] {
            path.push(p);
        }
        path.reverse();
        let mut t = UnorderedTree::leaf(self.root);
        let mut cur = t.root();
        for win in path.windows(2) {
            let (a, b) = (win[0], win[1]);
            let w = self.rule(a).word_using(|s| live[s.index()], Some(b)).expect("edge of restricted rule");
            let mut rest = w.clone();
            rest.set(b, w.count(b) - 1);
            self.attach_word(&mut t, cur, &rest, &ranks);
            cur = t.add_child(cur, b);
        }
        self.attach_word(&mut t, cur, word, &ranks);
        Some(t)
    }

    /// `L(self) ⊆ L(other)`.
    pub fn contains_in(&self, other: &Schema) -> bool {
        self.containment_counterexample(other).map_or(true, |c| c.is_none())
    }

    /// `Ok(None)` when `L(self) ⊆ L(other)`, otherwise a tree of
    /// `L(self) \ L(other)`.
    pub fn containment_counterexample(&self, other: &Schema) -> Result<Option<UnorderedTree>> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch);
        }
        let live = self.satisfiable_labels();
        if !live[self.root.index()] {
            return Ok(None);
        }
        if self.root != other.root {
            return Ok(self.minimal_tree(self.root));
        }
        let reach = self.reachable(Some(&live));
        for a in self.alphabet.symbols() {
            if !reach[a.index()] {
                continue;
            }
            let mine = self.restricted_rule(a, &live).expect("reachable labels are satisfiable");
            if let Some(w) = other.rule(a).containment_counterexample(&mine) {
                let t = self.tree_with_node(a, &w).expect("reachable");
                debug_assert!(self.tree_satisfies(&t) && !other.tree_satisfies(&t));
                return Ok(Some(t));
            }
        }
        Ok(None)
    }

    pub fn display(&self) -> impl fmt::Display + '_ {
        SchemaDisplay(self)
    }
}

impl NormalizedExpression {
    /// The expression restricted to words whose symbols satisfy `keep`;
    /// `None` when no such word exists.
    pub fn restrict(&self, keep: impl Fn(Symbol) -> bool) -> Option<NormalizedExpression> {
        let mut factors: Vec<Factor> = Vec::new();
        for f in self.factors() {
            let form = NormalizedExpression::form(f);
            let disjuncts: Vec<_> = f.disjuncts.iter().copied().filter(|d| keep(d.symbol)).collect();
            let nullable =
                matches!(form, FactorForm::OptionalChoice) || matches!(form, FactorForm::Single(m) if m.allows_zero());
            match disjuncts.len() {
                0 if nullable => {}
                0 => return None,
                1 if form == FactorForm::Repeated => factors.push(Factor {
                    disjuncts: vec![crate::expr::Disjunct { symbol: disjuncts[0].symbol, mult: Multiplicity::Plus }],
                    outer: Multiplicity::One,
                }),
                _ => factors.push(Factor { disjuncts, outer: f.outer }),
            }
        }
        Some(NormalizedExpression::from_normal_factors(self.alphabet().clone(), factors))
    }

    /// A word of the language over symbols satisfying `allowed`, containing
    /// `force` when given (which must then be allowed and occur).
    pub fn word_using(&self, allowed: impl Fn(Symbol) -> bool, force: Option<Symbol>) -> Option<UnorderedWord> {
        let mut w = UnorderedWord::empty();
        for f in self.factors() {
            if let Some(x) = force.filter(|&x| f.symbols().any(|s| s == x)) {
                w.add(x, 1);
                continue;
            }
            let form = NormalizedExpression::form(f);
            match form {
                FactorForm::OptionalChoice => {}
                FactorForm::Single(m) if m.allows_zero() => {}
                _ => {
                    let d = f.disjuncts.iter().find(|d| allowed(d.symbol))?;
                    let k = if form == FactorForm::Repeated { 1 } else { d.mult.min().max(1) };
                    w.add(d.symbol, k as u32);
                }
            }
        }
        Some(w)
    }
}

struct SchemaDisplay<'a>(&'a Schema);

impl fmt::Display for SchemaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.0;
        writeln!(f, "root = {}", s.alphabet.name(s.root))?;
        for a in s.alphabet.symbols() {
            if !s.rule(a).is_epsilon() {
                writeln!(f, "{} -> {}", s.alphabet.name(a), s.rule(a))?;
            }
        }
        Ok(())
    }
}
