//! Disjunctive multiplicity expressions: syntax, normal forms, the
//! characterizing triple, membership and containment.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Alphabet, Multiplicity, Symbol, UnorderedWord};
use crate::syntax::{Cursor, Tok};

use Multiplicity::{One, Optional, Plus, Star, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Disjunct {
    pub symbol: Symbol,
    pub mult: Multiplicity,
}

/// `(a1^M1 | … | an^Mn)^outer`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Factor {
    pub disjuncts: Vec<Disjunct>,
    pub outer: Multiplicity,
}

impl Factor {
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.disjuncts.iter().map(|d| d.symbol)
    }

    pub fn is_singleton(&self) -> bool {
        self.disjuncts.len() == 1
    }

    fn mult_of(&self, sym: Symbol) -> Option<Multiplicity> {
        self.disjuncts.iter().find(|d| d.symbol == sym).map(|d| d.mult)
    }
}

/// An expression as written: factors joined by unordered concatenation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjunctiveExpression {
    alphabet: Alphabet,
    factors: Vec<Factor>,
}

impl DisjunctiveExpression {
    /// Builds an expression, checking that every symbol occurs once and
    /// that no disjunction is empty.
    pub fn new(alphabet: Alphabet, factors: Vec<Factor>) -> Result<DisjunctiveExpression> {
        let mut seen = vec![false; alphabet.len()];
        for f in &factors {
            if f.disjuncts.is_empty() {
                return Err(Error::Syntax { pos: 0, msg: "empty disjunction".into() });
            }
            for s in f.symbols() {
                if s.index() >= alphabet.len() {
                    return Err(Error::UnknownSymbol(format!("#{}", s.id())));
                }
                if std::mem::replace(&mut seen[s.index()], true) {
                    return Err(Error::RepeatedSymbol(alphabet.name(s).to_string()));
                }
            }
        }
        Ok(DisjunctiveExpression { alphabet, factors })
    }

    pub fn epsilon(alphabet: Alphabet) -> DisjunctiveExpression {
        DisjunctiveExpression { alphabet, factors: Vec::new() }
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<DisjunctiveExpression> {
        let mut cur = Cursor::new(text)?;
        let mut factors = Vec::new();
        if cur.eat(&Tok::Epsilon) {
            cur.finish()?;
            return Ok(DisjunctiveExpression::epsilon(alphabet.clone()));
        }
        loop {
            factors.push(parse_factor(&mut cur, alphabet)?);
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        cur.finish()?;
        DisjunctiveExpression::new(alphabet.clone(), factors)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Applies the rewrite rules until every factor is in a normal form.
    pub fn normalize(&self) -> NormalizedExpression {
        let mut out = Vec::new();
        for f in &self.factors {
            normalize_factor(f, &mut out);
        }
        NormalizedExpression::make(self.alphabet.clone(), out)
    }
}

fn parse_mult(cur: &mut Cursor) -> Multiplicity {
    match cur.peek() {
        Some(Tok::Star) => {
            cur.bump();
            Star
        }
        Some(Tok::Plus) => {
            cur.bump();
            Plus
        }
        Some(Tok::Question) => {
            cur.bump();
            Optional
        }
        Some(Tok::ZeroMark) => {
            cur.bump();
            Zero
        }
        _ => One,
    }
}

fn parse_disjunct(cur: &mut Cursor, alphabet: &Alphabet) -> Result<Disjunct> {
    let name = cur.ident()?;
    let symbol = alphabet.symbol(&name)?;
    Ok(Disjunct { symbol, mult: parse_mult(cur) })
}

fn parse_factor(cur: &mut Cursor, alphabet: &Alphabet) -> Result<Factor> {
    if cur.eat(&Tok::LParen) {
        let mut disjuncts = vec![parse_disjunct(cur, alphabet)?];
        while cur.eat(&Tok::Bar) {
            disjuncts.push(parse_disjunct(cur, alphabet)?);
        }
        cur.expect(&Tok::RParen, "`)` or `|`")?;
        let outer = parse_mult(cur);
        Ok(Factor { disjuncts, outer })
    } else {
        let d = parse_disjunct(cur, alphabet)?;
        Ok(Factor { disjuncts: vec![d], outer: One })
    }
}

fn singleton(symbol: Symbol, mult: Multiplicity) -> Factor {
    Factor { disjuncts: vec![Disjunct { symbol, mult }], outer: One }
}

fn normalize_factor(f: &Factor, out: &mut Vec<Factor>) {
    if f.outer == Zero {
        return;
    }
    // Whether one pass through the disjunction may produce nothing; must be
    // read before zero-multiplicity disjuncts are dropped.
    let nullable = f.disjuncts.iter().any(|d| d.mult.allows_zero());
    let live: Vec<Disjunct> = f.disjuncts.iter().copied().filter(|d| d.mult != Zero).collect();
    match live.len() {
        0 => {}
        1 => {
            let d = live[0];
            let inner = if nullable { d.mult.with_zero() } else { d.mult };
            out.push(singleton(d.symbol, inner.repeat(f.outer)));
        }
        _ => match f.outer {
            Zero => unreachable!(),
            One => {
                let disjuncts = live
                    .iter()
                    .map(|d| Disjunct { symbol: d.symbol, mult: if nullable { d.mult.with_zero() } else { d.mult } })
                    .collect();
                out.push(Factor { disjuncts, outer: One });
            }
            Optional => {
                let disjuncts = live.iter().map(|d| Disjunct { symbol: d.symbol, mult: d.mult.with_zero() }).collect();
                out.push(Factor { disjuncts, outer: One });
            }
            Star => out.extend(live.iter().map(|d| singleton(d.symbol, Star))),
            Plus => {
                if nullable {
                    out.extend(live.iter().map(|d| singleton(d.symbol, Star)));
                } else {
                    let disjuncts = live.iter().map(|d| Disjunct { symbol: d.symbol, mult: One }).collect();
                    out.push(Factor { disjuncts, outer: Plus });
                }
            }
        },
    }
}

/// Shape of a normalized factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorForm {
    /// A single symbol `a^M`.
    Single(Multiplicity),
    /// `(a1 | … | an)+`.
    Repeated,
    /// Outer multiplicity 1, no inner multiplicity admits 0.
    Choice,
    /// Outer multiplicity 1, every inner multiplicity admits 0.
    OptionalChoice,
}

/// An expression whose factors are all in normal form. Singleton factors
/// always carry outer multiplicity 1 with the combined multiplicity inside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedExpression {
    alphabet: Alphabet,
    factors: Vec<Factor>,
    triple: CharTriple,
}

impl NormalizedExpression {
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<NormalizedExpression> {
        Ok(DisjunctiveExpression::parse(text, alphabet)?.normalize())
    }

    pub fn epsilon(alphabet: Alphabet) -> NormalizedExpression {
        NormalizedExpression::make(alphabet, Vec::new())
    }

    /// The expression `a1* , … , an*` over the whole alphabet.
    pub fn universal(alphabet: Alphabet) -> NormalizedExpression {
        let factors = alphabet.symbols().map(|s| singleton(s, Star)).collect();
        NormalizedExpression::make(alphabet, factors)
    }

    /// Disjunction-free expression with one factor per `(symbol, mult)`.
    pub fn from_multiplicities(
        alphabet: Alphabet,
        mults: impl IntoIterator<Item = (Symbol, Multiplicity)>,
    ) -> Result<NormalizedExpression> {
        let factors = mults.into_iter().map(|(s, m)| singleton(s, m)).collect();
        Ok(DisjunctiveExpression::new(alphabet, factors)?.normalize())
    }

    /// Wraps factors that are already in normal form.
    pub(crate) fn from_normal_factors(alphabet: Alphabet, factors: Vec<Factor>) -> NormalizedExpression {
        NormalizedExpression::make(alphabet, factors)
    }

    fn make(alphabet: Alphabet, factors: Vec<Factor>) -> NormalizedExpression {
        let triple = compute_triple(&alphabet, &factors);
        NormalizedExpression { alphabet, factors, triple }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn form(f: &Factor) -> FactorForm {
        if f.is_singleton() {
            FactorForm::Single(f.disjuncts[0].mult)
        } else if f.outer == Plus {
            FactorForm::Repeated
        } else if f.disjuncts[0].mult.allows_zero() {
            FactorForm::OptionalChoice
        } else {
            FactorForm::Choice
        }
    }

    pub fn as_disjunctive(&self) -> DisjunctiveExpression {
        DisjunctiveExpression { alphabet: self.alphabet.clone(), factors: self.factors.clone() }
    }

    /// True when no factor has more than one disjunct.
    pub fn is_disjunction_free(&self) -> bool {
        self.factors.iter().all(Factor::is_singleton)
    }

    pub fn is_epsilon(&self) -> bool {
        self.factors.is_empty()
    }

    /// True for `a1* , … , an*` over all of the alphabet.
    pub fn is_universal(&self) -> bool {
        let n = self.triple();
        n.cardinality.iter().all(|&m| m == Star) && n.required.is_empty() && n.conflicts.is_empty()
    }

    /// Symbols occurring in the expression, in factor order.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.factors.iter().flat_map(|f| f.symbols())
    }

    pub fn factor_of(&self, sym: Symbol) -> Option<&Factor> {
        self.factors.iter().find(|f| f.symbols().any(|s| s == sym))
    }

    /// N*(sym); for a disjunction-free expression, the multiplicity of
    /// `sym` (zero when absent).
    pub fn multiplicity(&self, sym: Symbol) -> Multiplicity {
        self.triple.n(sym)
    }

    /// The compact characterizing triple (C*, N*, P*).
    pub fn triple(&self) -> &CharTriple {
        &self.triple
    }

    /// Membership `w ∈ L(self)` through the characterizing triple.
    pub fn matches(&self, w: &UnorderedWord) -> bool {
        let (c, n, p) = self.triple().tests(w);
        c && n && p
    }

    /// `L(sub) ⊆ L(self)`.
    pub fn contains(&self, sub: &NormalizedExpression) -> bool {
        self.triple().includes(sub.triple()).is_none()
    }

    /// A word of `L(sub) \ L(self)`, if any.
    pub fn containment_counterexample(&self, sub: &NormalizedExpression) -> Option<UnorderedWord> {
        let failure = self.triple().includes(sub.triple())?;
        let w = sub.word_violating(failure);
        debug_assert!(sub.matches(&w) && !self.matches(&w));
        Some(w)
    }

    pub fn equivalent(&self, other: &NormalizedExpression) -> bool {
        self.triple == other.triple
    }

    /// The smallest word of the expression (one symbol with its least
    /// count per required factor).
    pub fn minimal_word(&self) -> UnorderedWord {
        self.word_where(|_| None)
    }

    /// Builds a word of the language where, for each factor, `pick` may fix
    /// the contribution; otherwise the factor contributes a minimal word.
    fn word_where(&self, pick: impl Fn(&Factor) -> Option<UnorderedWord>) -> UnorderedWord {
        let mut w = UnorderedWord::empty();
        for f in &self.factors {
            let part = pick(f).unwrap_or_else(|| factor_word_avoiding(f, &[]).expect("minimal word"));
            w = w.concat(&part);
        }
        w
    }

    fn word_violating(&self, failure: InclusionFailure) -> UnorderedWord {
        match failure {
            InclusionFailure::Cardinality { symbol, count } => self.word_where(|f| {
                f.symbols().any(|s| s == symbol).then(|| factor_word_with_count(f, symbol, count).expect("count"))
            }),
            InclusionFailure::Required(x) => self.word_where(|f| Some(factor_word_avoiding(f, &x).expect("avoidable"))),
            InclusionFailure::Conflict(a, b) => {
                let mut w = self.word_where(|f| {
                    let has_a = f.symbols().any(|s| s == a);
                    let has_b = f.symbols().any(|s| s == b);
                    match (has_a, has_b) {
                        (true, true) => {
                            let mut w = UnorderedWord::from_symbols([a]);
                            if a != b {
                                w.add(b, 1);
                            }
                            Some(w)
                        }
                        (true, false) => factor_word_with_count(f, a, 1),
                        (false, true) => factor_word_with_count(f, b, 1),
                        _ => None,
                    }
                });
                // Only reachable with a==b or both present; keep `w` honest.
                if !(w.contains(a) && w.contains(b)) {
                    w = UnorderedWord::empty();
                }
                w
            }
        }
    }
}

fn cardinality_in(factors: &[Factor], a: Symbol) -> Multiplicity {
    let Some(f) = factors.iter().find(|f| f.symbols().any(|s| s == a)) else {
        return Zero;
    };
    let m = f.mult_of(a).expect("symbol in factor");
    match NormalizedExpression::form(f) {
        FactorForm::Single(m) => m,
        FactorForm::Repeated => Star,
        FactorForm::Choice | FactorForm::OptionalChoice if matches!(m, Optional | One) => Optional,
        FactorForm::Choice | FactorForm::OptionalChoice => Star,
    }
}

fn compute_triple(alphabet: &Alphabet, factors: &[Factor]) -> CharTriple {
    let mut conflicts = Vec::new();
    let mut required = Vec::new();
    let mut present = vec![false; alphabet.len()];
    for f in factors {
        let mut syms: Vec<Symbol> = f.symbols().collect();
        syms.sort();
        for s in &syms {
            present[s.index()] = true;
        }
        if f.disjuncts.len() >= 2 && f.outer == One {
            conflicts.push(syms.clone());
        }
        if f.disjuncts.iter().all(|d| !d.mult.allows_zero()) {
            required.push(syms);
        }
    }
    let cardinality = alphabet.symbols().map(|a| cardinality_in(factors, a)).collect();
    CharTriple { conflicts, cardinality, required, present }
}

/// A word of `L(f)` with `count` occurrences of `sym`, if one exists.
fn factor_word_with_count(f: &Factor, sym: Symbol, count: u32) -> Option<UnorderedWord> {
    let m = f.mult_of(sym)?;
    if count == 0 {
        let others: Vec<Symbol> = vec![sym];
        return factor_word_avoiding(f, &others);
    }
    let ok = match NormalizedExpression::form(f) {
        FactorForm::Repeated => true,
        _ => m.contains(count as u64),
    };
    if !ok {
        return None;
    }
    let mut w = UnorderedWord::empty();
    w.add(sym, count);
    Some(w)
}

/// A smallest word of `L(f)` that avoids every symbol of `avoid`.
fn factor_word_avoiding(f: &Factor, avoid: &[Symbol]) -> Option<UnorderedWord> {
    let form = NormalizedExpression::form(f);
    let nullable = match form {
        FactorForm::Single(m) => m.allows_zero(),
        FactorForm::OptionalChoice => true,
        _ => false,
    };
    if nullable {
        return Some(UnorderedWord::empty());
    }
    let d = f.disjuncts.iter().find(|d| !avoid.contains(&d.symbol))?;
    let count = match form {
        FactorForm::Repeated => 1,
        _ => d.mult.min().max(1) as u32,
    };
    let mut w = UnorderedWord::empty();
    w.add(d.symbol, count);
    Some(w)
}

/// Which component of the triple inclusion failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InclusionFailure {
    /// `count` is a possible number of `symbol` in the smaller language only.
    Cardinality { symbol: Symbol, count: u32 },
    /// Every word of the larger language hits this set; some word of the
    /// smaller one avoids it.
    Required(Vec<Symbol>),
    /// The pair conflicts in the larger language but co-occurs in the smaller.
    Conflict(Symbol, Symbol),
}

/// Compact characterizing triple. `cardinality` is indexed by symbol index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharTriple {
    pub conflicts: Vec<Vec<Symbol>>,
    pub cardinality: Vec<Multiplicity>,
    pub required: Vec<Vec<Symbol>>,
    present: Vec<bool>,
}

impl CharTriple {
    /// N*(a).
    pub fn n(&self, a: Symbol) -> Multiplicity {
        self.cardinality.get(a.index()).copied().unwrap_or(Zero)
    }

    /// Whether `(a, b)` belongs to the expanded conflict relation C.
    pub fn conflict(&self, a: Symbol, b: Symbol) -> bool {
        let inside = |s: Symbol| self.present.get(s.index()).copied().unwrap_or(false);
        if !inside(a) || !inside(b) {
            return true;
        }
        a != b && self.conflicts.iter().any(|x| x.contains(&a) && x.contains(&b))
    }

    /// `(w ⊨ C, w ⊨ N, w ⊨ P)`.
    pub fn tests(&self, w: &UnorderedWord) -> (bool, bool, bool) {
        let c = self.conflicts.iter().all(|x| x.iter().filter(|&&s| w.contains(s)).count() <= 1)
            && w.support().all(|(s, _)| self.present.get(s.index()).copied().unwrap_or(false));
        // Absent symbols are the business of P: a symbol whose count may not
        // be 0 always forms a required singleton.
        let n = w.support().all(|(s, k)| self.n(s).contains(k as u64));
        let p = self.required.iter().all(|x| x.iter().any(|&s| w.contains(s)));
        (c, n, p)
    }

    /// Checks that the language of `sub` is included in the language of
    /// `self`, returning the first failing component.
    pub fn includes(&self, sub: &CharTriple) -> Option<InclusionFailure> {
        let n = self.cardinality.len().max(sub.cardinality.len());
        for i in 0..n {
            let a = Symbol::from_index(i);
            let (big, small) = (self.n(a), sub.n(a));
            if !small.is_subset_of(big) {
                let count = (0..=2).find(|&k| small.contains(k) && !big.contains(k)).expect("differs below 3");
                return Some(InclusionFailure::Cardinality { symbol: a, count: count as u32 });
            }
        }
        for x in &self.required {
            if !sub.required.iter().any(|y| y.iter().all(|s| x.contains(s))) {
                return Some(InclusionFailure::Required(x.clone()));
            }
        }
        for i in 0..n {
            for j in i..n {
                let (a, b) = (Symbol::from_index(i), Symbol::from_index(j));
                if self.conflict(a, b) && !sub.conflict(a, b) {
                    return Some(InclusionFailure::Conflict(a, b));
                }
            }
        }
        None
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        TripleDisplay { triple: self, alphabet }
    }
}

fn set_list(sets: &[Vec<Symbol>], alphabet: &Alphabet) -> String {
    let inner: Vec<String> = sets
        .iter()
        .map(|x| format!("{{{}}}", x.iter().map(|&s| alphabet.name(s)).collect::<Vec<_>>().join(",")))
        .collect();
    format!("{{{}}}", inner.join(","))
}

struct TripleDisplay<'a> {
    triple: &'a CharTriple,
    alphabet: &'a Alphabet,
}

impl fmt::Display for TripleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "C*={}", set_list(&self.triple.conflicts, self.alphabet))?;
        writeln!(f, "P*={}", set_list(&self.triple.required, self.alphabet))?;
        let n: Vec<String> =
            self.alphabet.symbols().map(|s| format!("{}:{}", self.alphabet.name(s), self.triple.n(s))).collect();
        write!(f, "N*={}", n.join(" "))
    }
}

fn fmt_factors(factors: &[Factor], alphabet: &Alphabet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if factors.is_empty() {
        return f.write_str("epsilon");
    }
    for (i, fac) in factors.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        let suffix = |m: Multiplicity| if m == Zero { "^0" } else { m.suffix() };
        if fac.is_singleton() && fac.outer == One {
            let d = fac.disjuncts[0];
            write!(f, "{}{}", alphabet.name(d.symbol), suffix(d.mult))?;
        } else {
            f.write_str("(")?;
            for (j, d) in fac.disjuncts.iter().enumerate() {
                if j > 0 {
                    f.write_str(" | ")?;
                }
                write!(f, "{}{}", alphabet.name(d.symbol), suffix(d.mult))?;
            }
            write!(f, "){}", suffix(fac.outer))?;
        }
    }
    Ok(())
}

impl fmt::Display for DisjunctiveExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_factors(&self.factors, &self.alphabet, f)
    }
}

impl fmt::Display for NormalizedExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_factors(&self.factors, &self.alphabet, f)
    }
}
