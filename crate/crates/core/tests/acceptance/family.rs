//! Every multiplicity schema over {r, a, b} with at most two symbols per
//! rule, against all twig queries of at most three nodes.

use std::collections::HashSet;

use mschema::{Alphabet, MsAnalysis, Multiplicity, Schema, Symbol, TwigQuery, UnorderedTree};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::sig::{self, bit, Count, Lang, Queries};

pub type Rule = Vec<(usize, Multiplicity)>;

const NONZERO: [Multiplicity; 4] = [Multiplicity::Optional, Multiplicity::One, Multiplicity::Plus, Multiplicity::Star];

/// Rules with at most two symbols; a symbol with multiplicity 0 is the
/// same as an absent one.
fn rules(n: usize) -> Vec<Rule> {
    let mut out = vec![vec![]];
    for s in 0..n {
        for &m in &NONZERO {
            out.push(vec![(s, m)]);
        }
    }
    for s in 0..n {
        for t in s + 1..n {
            for &m in &NONZERO {
                for &k in &NONZERO {
                    out.push(vec![(s, m), (t, k)]);
                }
            }
        }
    }
    out
}

fn reachable(rules: &[Rule]) -> Vec<bool> {
    let mut seen = vec![false; rules.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(a) = stack.pop() {
        for &(b, _) in &rules[a] {
            if !std::mem::replace(&mut seen[b], true) {
                stack.push(b);
            }
        }
    }
    seen
}

/// Unreachable rules blanked, then the smaller of the schema and its copy
/// with `a` and `b` swapped.
fn canonical(rs: &[Rule]) -> Vec<Rule> {
    let live = reachable(rs);
    let blank: Vec<Rule> = rs.iter().zip(&live).map(|(r, &l)| if l { r.clone() } else { vec![] }).collect();
    let swap = |s: usize| [0, 2, 1][s];
    let mut swapped: Vec<Rule> = vec![blank[0].clone(), blank[2].clone(), blank[1].clone()];
    for r in &mut swapped {
        for e in r.iter_mut() {
            e.0 = swap(e.0);
        }
        r.sort();
    }
    blank.min(swapped)
}

pub fn family() -> Vec<Vec<Rule>> {
    let all = rules(3);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for x in &all {
        for y in &all {
            for z in &all {
                let c = canonical(&[x.clone(), y.clone(), z.clone()]);
                if seen.insert(c.clone()) {
                    out.push(c);
                }
            }
        }
    }
    out
}

pub fn accepts(rules: &[Rule], t: &UnorderedTree) -> bool {
    t.label(t.root()).index() == 0
        && t.node_ids().all(|n| {
            let c = crate::brute::counts_of_children(t, n, rules.len());
            let rule = &rules[t.label(n).index()];
            (0..rules.len()).all(|s| match rule.iter().find(|e| e.0 == s) {
                Some(&(_, m)) => m.contains(c[s] as u64),
                None => c[s] == 0,
            })
        })
}

fn lang(rules: &[Rule]) -> Lang {
    let alts = rules
        .iter()
        .map(|rule| {
            let mut alts: Vec<Vec<(usize, Count)>> = vec![vec![]];
            for &(b, m) in rule {
                let mut counts = Vec::new();
                if m.contains(0) {
                    counts.push(Count::Exactly(0));
                }
                if m.contains(1) {
                    counts.push(Count::Exactly(1));
                }
                if m.is_unbounded() {
                    counts.push(Count::Many);
                }
                alts = alts
                    .iter()
                    .flat_map(|a| {
                        counts.iter().map(move |&k| {
                            let mut a = a.clone();
                            a.push((b, k));
                            a
                        })
                    })
                    .collect();
            }
            alts
        })
        .collect();
    Lang { root: 0, alts, complete: true }
}

pub fn schema(rules: &[Rule], al: &Alphabet) -> Schema {
    let rs: Vec<Vec<(Symbol, Multiplicity)>> =
        rules.iter().map(|r| r.iter().map(|&(s, m)| (Symbol::from_index(s), m)).collect()).collect();
    Schema::from_multiplicities(al.clone(), Symbol::from_index(0), &rs).unwrap()
}

#[derive(Default)]
pub struct Tally {
    pub schemas: usize,
    pub exhaustive: usize,
    pub definite: [usize; 3],
    pub unknown: [usize; 3],
    pub certificates: usize,
    pub failures: Vec<String>,
}

impl Tally {
    fn fail(&mut self, msg: String) {
        if self.failures.len() < 10 {
            self.failures.push(msg);
        }
    }
}

fn describe(rules: &[Rule], al: &Alphabet) -> String {
    schema(rules, al).display().to_string().replace('\n', "; ")
}

pub fn run(rng: &mut impl Rng, levels: usize, pairs_per_schema: usize) -> Tally {
    let al = Alphabet::new(["r", "a", "b"]).unwrap();
    let qs = Queries::up_to_three(3);
    let twigs: Vec<TwigQuery> = (0..qs.len()).map(|i| qs.twig(i)).collect();
    let mut tally = Tally::default();
    for (idx, rules) in family().iter().enumerate() {
        tally.schemas += 1;
        let s = schema(rules, &al);
        let m = MsAnalysis::new(&s).unwrap();
        let e = sig::enumerate(&qs, &lang(rules), levels);
        tally.exhaustive += e.exhaustive as usize;
        let roots: Vec<_> = e.roots.iter().collect();
        // certificates of the implementation are checked on a rotating
        // slice of the queries
        let certify = |q: usize| (q + idx) % 16 == 0;
        for q in 0..qs.len() {
            let oracle_sat = roots.iter().any(|(b, _)| bit(b, q));
            let sat = m.query_satisfiable(&twigs[q]);
            if oracle_sat || e.exhaustive {
                tally.definite[0] += 1;
                if sat != oracle_sat {
                    tally.fail(format!(
                        "sat {} under {}: {} vs oracle {}",
                        qs.text(q, &al),
                        describe(rules, &al),
                        sat,
                        oracle_sat
                    ));
                }
            } else {
                tally.unknown[0] += 1;
            }
            if sat && certify(q) {
                tally.certificates += 1;
                match m.witness_tree(&twigs[q]) {
                    Some(t) if accepts(rules, &t) && crate::brute::embeds(&twigs[q], &t) => {}
                    _ => tally.fail(format!("bad witness for {} under {}", qs.text(q, &al), describe(rules, &al))),
                }
            }

            let missing = roots.iter().find(|(b, _)| !bit(b, q));
            let implied = m.query_implied(&twigs[q]);
            if missing.is_some() || e.exhaustive {
                tally.definite[1] += 1;
                if implied != missing.is_none() {
                    tally.fail(format!(
                        "impl {} under {}: {} vs oracle {}",
                        qs.text(q, &al),
                        describe(rules, &al),
                        implied,
                        missing.is_none()
                    ));
                }
            } else {
                tally.unknown[1] += 1;
            }
            if !implied && certify(q) {
                tally.certificates += 1;
                match m.implication_counterexample(&twigs[q]) {
                    Some(t) if accepts(rules, &t) && !crate::brute::embeds(&twigs[q], &t) => {}
                    _ => {
                        tally.fail(format!("bad counterexample for {} under {}", qs.text(q, &al), describe(rules, &al)))
                    }
                }
            }
        }

        // containment on sampled pairs, half of them chosen among pairs the
        // enumeration finds contained
        let sat_queries: Vec<usize> = (0..qs.len()).filter(|&q| roots.iter().any(|(b, _)| bit(b, q))).collect();
        for k in 0..pairs_per_schema {
            let (p, q) = if k % 2 == 0 || sat_queries.is_empty() {
                (rng.gen_range(0..qs.len()), rng.gen_range(0..qs.len()))
            } else {
                let p = *sat_queries.choose(rng).unwrap();
                let implied: Vec<usize> =
                    (0..qs.len()).filter(|&q| roots.iter().all(|(b, _)| !bit(b, p) || bit(b, q))).collect();
                (p, *implied.choose(rng).unwrap())
            };
            let sep = roots.iter().find(|(b, _)| bit(b, p) && !bit(b, q));
            let c = m.query_contained(&twigs[p], &twigs[q]);
            if sep.is_some() || e.exhaustive {
                tally.definite[2] += 1;
                if c.holds != sep.is_none() {
                    tally.fail(format!(
                        "cnt {} ⊆ {} under {}: {} vs oracle {}{}",
                        qs.text(p, &al),
                        qs.text(q, &al),
                        describe(rules, &al),
                        c.holds,
                        sep.is_none(),
                        sep.map(|(_, t)| format!(" (separating {})", t.display(&al))).unwrap_or_default()
                    ));
                }
            } else {
                tally.unknown[2] += 1;
            }
            if !c.holds {
                tally.certificates += 1;
                match &c.counterexample {
                    Some(t)
                        if accepts(rules, t)
                            && crate::brute::embeds(&twigs[p], t)
                            && !crate::brute::embeds(&twigs[q], t) => {}
                    _ => tally.fail(format!(
                        "bad containment counterexample for {} ⊆ {} under {}",
                        qs.text(p, &al),
                        qs.text(q, &al),
                        describe(rules, &al)
                    )),
                }
            }
        }
        // the enumeration's own trees are members
        for (b, t) in roots.iter().take(3) {
            if !accepts(rules, t) || qs.of_tree(t).0 != **b {
                tally.fail(format!("oracle tree {} is not a member of {}", t.display(&al), describe(rules, &al)));
            }
        }
    }
    tally
}
