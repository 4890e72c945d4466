//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the lines show up in plain `cargo test` output.

mod family;

use std::collections::{BTreeSet, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mschema::expr::{Disjunct, Factor};
use mschema::oracle::{self, EnumerationBounds, Problem, Tri};
use mschema::{
    validate_stream, Alphabet, DependencyGraph, DfDtd, DfRegex, DisjunctiveExpression, MsAnalysis, Multiplicity,
    NormalizedExpression, RootedGraph, RuleEncoding, Schema, Symbol, TwigQuery, UnorderedTree, UnorderedWord,
    Validator, Verdict,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use brute::{Counts, RawSchema};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let spent = start.elapsed();
    if spent > limit {
        return Err(format!("{what} took {spent:.1?}, limit {limit:?}"));
    }
    Ok(())
}

fn names(al: &Alphabet, sets: &[Vec<Symbol>]) -> BTreeSet<BTreeSet<String>> {
    sets.iter().map(|x| x.iter().map(|&s| al.name(s).to_string()).collect()).collect()
}

fn set_of(groups: &[&str]) -> BTreeSet<BTreeSet<String>> {
    groups.iter().map(|g| g.chars().map(|c| c.to_string()).collect()).collect()
}

fn counts_word(c: &Counts) -> UnorderedWord {
    UnorderedWord::from_counts(c.iter().map(|&k| k as u32).collect())
}

fn c1_worked_examples() -> Outcome {
    let start = Instant::now();
    let al = Alphabet::new(["a", "b", "c", "d"]).unwrap();
    let e0 = NormalizedExpression::parse("a+, (b|c), d?", &al).unwrap();
    let t = e0.triple();
    ensure!(names(&al, &t.conflicts) == set_of(&["bc"]), "C* of E0: {:?}", names(&al, &t.conflicts));
    ensure!(names(&al, &t.required) == set_of(&["a", "bc"]), "P* of E0: {:?}", names(&al, &t.required));
    let n: Vec<&str> = al.symbols().map(|s| t.n(s).token()).collect();
    ensure!(n == ["+", "?", "?", "?"], "N* of E0: {n:?}");

    let al = Alphabet::new(["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]).unwrap();
    let e1 = NormalizedExpression::parse("(a|b)+, (c?|d*|e*), f+, g?, (h+|i)", &al).unwrap();
    let t = e1.triple();
    ensure!(names(&al, &t.conflicts) == set_of(&["cde", "hi"]), "C* of E1: {:?}", names(&al, &t.conflicts));
    ensure!(names(&al, &t.required) == set_of(&["ab", "f", "hi"]), "P* of E1: {:?}", names(&al, &t.required));
    let n: String = al.symbols().map(|s| t.n(s).token()).collect();
    ensure!(n == "**?**+?*?0", "N* of E1: {n}");

    let al = Alphabet::new(["r", "a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]).unwrap();
    let s = Schema::parse_with_alphabet("root = r; r -> (a|b)+, (c?|d*|e*), f+, g?, (i|j+)", &al).unwrap();
    let enc = RuleEncoding::new(&s);
    let r = s.root();
    let letters: Vec<Symbol> = al.symbols().skip(1).collect();
    let card: String = letters.iter().map(|&b| enc.cardinality(r, b).token()).collect();
    ensure!(card == "**?**+?0?*", "cardinality_r: {card}");
    let groups = |id: &dyn Fn(Symbol) -> u32| -> Result<BTreeSet<BTreeSet<String>>, String> {
        let mut by: std::collections::BTreeMap<u32, BTreeSet<String>> = Default::default();
        for &b in &letters {
            if id(b) != 0 {
                by.entry(id(b)).or_default().insert(al.name(b).to_string());
            }
        }
        Ok(by.into_values().collect())
    };
    let conflict = groups(&|b| enc.conflict(r, b))?;
    ensure!(conflict == set_of(&["cde", "ij"]), "conflict_r groups: {conflict:?}");
    let required = groups(&|b| enc.required(r, b))?;
    ensure!(required == set_of(&["ab", "f", "ij"]), "required_r groups: {required:?}");
    within(start, Duration::from_secs(1), "worked examples")?;
    Ok("E0 and E1 triples and the encoding example reproduce".into())
}

const S1: &str = "root = r; r -> a, b*, c?; a -> b?; b -> a?; c -> b";
const S2: &str = "root = r; r -> c, b, a; a -> b?; b -> a; c -> b";
const S3: &str = "root = r; r -> (a | b)+, c; a -> b?; b -> a?; c -> b";
const S4: &str = "root = r; r -> (a | b | c)*; a -> epsilon; b -> a?; c -> b";

fn raw_schema(text: &str, al: &Alphabet) -> RawSchema {
    // the parser is used only to read the factors as written
    let mut rules = vec![vec![]; al.len()];
    let mut root = 0;
    for stmt in text.split(';').map(str::trim) {
        if let Some(r) = stmt.strip_prefix("root =") {
            root = al.symbol(r.trim()).unwrap().index();
        } else if let Some((lhs, rhs)) = stmt.split_once("->") {
            let a = al.symbol(lhs.trim()).unwrap().index();
            rules[a] = DisjunctiveExpression::parse(rhs.trim(), al).unwrap().factors().to_vec();
        }
    }
    RawSchema::new(al.len(), root, rules)
}

fn c2_example_one() -> Outcome {
    let start = Instant::now();
    let al = Alphabet::new(["r", "a", "b", "c"]).unwrap();
    let t0 = UnorderedTree::parse("r(a(b), b(a), c(b(a)))", &al).unwrap();
    let expected = [true, false, true, false];
    let mut orders = 0;
    for (i, text) in [S1, S2, S3, S4].iter().enumerate() {
        let s = Schema::parse_with_alphabet(text, &al).unwrap();
        ensure!(s.tree_satisfies(&t0) == expected[i], "tree_satisfies(t0, S{}) != {}", i + 1, expected[i]);
        ensure!(raw_schema(text, &al).accepts(&t0) == expected[i], "reference membership disagrees on S{}", i + 1);
        let enc = RuleEncoding::new(&s);
        let serializations = brute::all_serializations(&t0);
        orders = serializations.len();
        for ev in serializations {
            let v = validate_stream(ev.iter().copied(), &enc).unwrap();
            ensure!(v.is_accepted() == expected[i], "streaming verdict on S{} for an order: {v:?}", i + 1);
        }
    }
    within(start, Duration::from_secs(1), "example 1")?;
    Ok(format!("(true, false, true, false); validator agrees on all {orders} sibling orders"))
}

fn c3_figure_three() -> Outcome {
    let al = Alphabet::new(["r", "a", "b", "c"]).unwrap();
    let t0 = UnorderedTree::parse("r(a(b), b(a), c(b(a)))", &al).unwrap();
    let q0 = TwigQuery::parse("r/*[*]//a", &al).unwrap();
    let n = q0.count_embeddings(&t0);
    let reference = brute::count_embeddings(&q0, &t0);
    ensure!(n == 2 && reference == 2, "count_embeddings = {n}, exhaustive count = {reference}");
    Ok("count_embeddings(q0, t0) = 2, matching the exhaustive count".into())
}

fn c4_keystone() -> Outcome {
    let start = Instant::now();
    let al = Alphabet::new(["a", "b", "c"]).unwrap();
    let words = brute::words(3, 4);
    let mut expressions = 0usize;
    let mut checks = 0usize;
    // symbol i goes to factor slot[i] (2 = absent)
    for code in 0..27 {
        let slot = [code % 3, code / 3 % 3, code / 9];
        let used: Vec<usize> = (0..2).filter(|f| slot.contains(f)).collect();
        let present: Vec<usize> = (0..3).filter(|&i| slot[i] < 2).collect();
        for inner in 0..5usize.pow(present.len() as u32) {
            for outer in 0..5usize.pow(used.len() as u32) {
                let factors: Vec<Factor> = used
                    .iter()
                    .enumerate()
                    .map(|(k, &f)| Factor {
                        disjuncts: present
                            .iter()
                            .enumerate()
                            .filter(|&(_, &i)| slot[i] == f)
                            .map(|(j, &i)| Disjunct {
                                symbol: Symbol::from_index(i),
                                mult: Multiplicity::ALL[inner / 5usize.pow(j as u32) % 5],
                            })
                            .collect(),
                        outer: Multiplicity::ALL[outer / 5usize.pow(k as u32) % 5],
                    })
                    .collect();
                expressions += 1;
                let e = DisjunctiveExpression::new(al.clone(), factors.clone()).unwrap();
                let norm = e.normalize();
                let lang = brute::language(&factors, 3, 4);
                for w in &words {
                    let word = counts_word(w);
                    let by_triple = norm.matches(&word);
                    let naive = oracle::naive_word_matches(&word, &e, 4).unwrap();
                    let reference = lang.contains(w);
                    checks += 1;
                    ensure!(
                        by_triple == naive && naive == reference,
                        "{} on {}: triple {by_triple}, naive {naive}, set semantics {reference}",
                        brute::expr_text(&factors, &al),
                        word.display(&al)
                    );
                }
            }
        }
    }
    within(start, Duration::from_secs(60), "keystone")?;
    Ok(format!("{expressions} expressions x {} words, {checks} agreements", words.len()))
}

fn mutate(rng: &mut impl Rng, factors: &[Factor]) -> Vec<Factor> {
    let mut out = factors.to_vec();
    if out.is_empty() {
        return out;
    }
    let f = rng.gen_range(0..out.len());
    match rng.gen_range(0..3) {
        0 => out[f].outer = brute::random_mult(rng),
        1 => {
            let d = rng.gen_range(0..out[f].disjuncts.len());
            out[f].disjuncts[d].mult = brute::random_mult(rng);
        }
        _ => {
            let d = rng.gen_range(0..out[f].disjuncts.len());
            out[f].disjuncts.remove(d);
            out.retain(|f| !f.disjuncts.is_empty());
        }
    }
    out
}

fn c5_characterizing_sets() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(5);
    let mut contained = 0;
    for i in 0..2000 {
        let n = rng.gen_range(1..=4);
        let al = Alphabet::new((0..n).map(|k| format!("s{k}"))).unwrap();
        let f1 = brute::random_factors(&mut rng, n, 3);
        let f2 = if i % 2 == 0 { brute::random_factors(&mut rng, n, 3) } else { mutate(&mut rng, &f1) };
        let e1 = DisjunctiveExpression::new(al.clone(), f1.clone()).unwrap().normalize();
        let e2 = DisjunctiveExpression::new(al.clone(), f2.clone()).unwrap().normalize();
        let (l1, l2) = (brute::language(&f1, n, 4), brute::language(&f2, n, 4));
        for (big, small, lb, ls, fb, fs) in [(&e1, &e2, &l1, &l2, &f1, &f2), (&e2, &e1, &l2, &l1, &f2, &f1)] {
            let oracle = ls.is_subset(lb);
            let decided = big.contains(small);
            contained += decided as usize;
            ensure!(
                decided == oracle,
                "L({}) ⊆ L({}): decided {decided}, words up to 4 say {oracle}",
                brute::expr_text(fs, &al),
                brute::expr_text(fb, &al)
            );
            if let Some(w) = big.containment_counterexample(small) {
                let c: Counts = al.symbols().map(|s| w.count(s) as u8).collect();
                let k = w.total() as usize;
                let ok = brute::language(fs, n, k).contains(&c) && !brute::language(fb, n, k).contains(&c);
                ensure!(ok, "counterexample {} does not separate", w.display(&al));
            }
        }
    }
    within(start, Duration::from_secs(60), "characterizing sets")?;
    Ok(format!("4000 directed pairs agree ({contained} contained); every counterexample word separates"))
}

fn random_tree(
    rng: &mut impl Rng,
    label: usize,
    level: usize,
    max_levels: usize,
    words: &[Vec<Counts>],
    n: usize,
) -> UnorderedTree {
    let mut t = UnorderedTree::leaf(Symbol::from_index(label));
    if level == max_levels {
        return t;
    }
    let counts: Counts = if rng.gen_bool(0.75) && !words[label].is_empty() {
        words[label].choose(rng).unwrap().clone()
    } else {
        let mut c = vec![0u8; n];
        for _ in 0..rng.gen_range(0..=3) {
            c[rng.gen_range(0..n)] += 1;
        }
        c
    };
    for (b, &k) in counts.iter().enumerate() {
        for _ in 0..k {
            let sub = random_tree(rng, b, level + 1, max_levels, words, n);
            t.graft(t.root(), &sub);
        }
    }
    t
}

fn c6_streaming() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(6);
    let (mut accepted, mut events_total, mut full_streams) = (0, 0, 0);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=5);
        let al = Alphabet::new((0..n).map(|k| format!("s{k}"))).unwrap();
        let raw: Vec<Vec<Factor>> = (0..n).map(|_| brute::random_factors(&mut rng, n, 3)).collect();
        let rules =
            raw.iter().map(|f| DisjunctiveExpression::new(al.clone(), f.clone()).unwrap().normalize()).collect();
        let s = Schema::new(al.clone(), Symbol::from_index(0), rules);
        let mut reference = RawSchema::new(n, 0, raw.clone());
        let words: Vec<Vec<Counts>> = raw.iter().map(|f| brute::language(f, n, 4).into_iter().collect()).collect();
        let mut words = words;
        for w in &mut words {
            w.sort();
        }
        let t = random_tree(&mut rng, 0, 1, 5, &words, n);
        let member = reference.accepts(&t);
        ensure!(s.tree_satisfies(&t) == member, "tree_satisfies disagrees on {}", t.display(&al));
        let enc = RuleEncoding::new(&s);
        let mut verdicts = Vec::new();
        for _ in 0..2 {
            let ev = brute::shuffled_events(&t, &mut rng);
            let mut v = Validator::new(&enc);
            let mut fed = 0u64;
            let mut verdict = v.verdict();
            for &e in &ev {
                if verdict != Verdict::Running {
                    break;
                }
                verdict = v.feed(e).unwrap();
                fed += 1;
            }
            if verdict == Verdict::Running {
                verdict = v.finish().unwrap();
            }
            ensure!(
                verdict.is_accepted() == member,
                "validator says {verdict:?} on {} under {}",
                t.display(&al),
                s.display()
            );
            // an earliest verdict stops reading, so the full height is only
            // reached when the whole stream was consumed
            let full = fed as usize == ev.len();
            ensure!(
                v.peak_depth() <= 1 + t.height() && (!full || v.peak_depth() == 1 + t.height()),
                "peak stack {} for height {} after {fed} of {} events",
                v.peak_depth(),
                t.height(),
                ev.len()
            );
            full_streams += full as usize;
            let bound = 3 * n as u64 * fed.max(1);
            ensure!(v.ops() <= bound, "{} operations for {fed} events over {n} symbols", v.ops());
            events_total += fed;
            verdicts.push(verdict.is_accepted());
        }
        ensure!(verdicts[0] == verdicts[1], "verdict depends on sibling order");
        accepted += member as usize;
    }
    // work per event does not grow with the document
    let al = Alphabet::new(["r", "a", "b"]).unwrap();
    let s = Schema::parse_with_alphabet("root = r; r -> a*; a -> b*, a?; b -> epsilon", &al).unwrap();
    let enc = RuleEncoding::new(&s);
    let per_event = |width: usize| -> f64 {
        let mut t = UnorderedTree::leaf(s.root());
        for _ in 0..width {
            let a = t.add_child(t.root(), al.symbol("a").unwrap());
            for _ in 0..width {
                t.add_child(a, al.symbol("b").unwrap());
            }
        }
        let mut v = Validator::new(&enc);
        let ev = t.events();
        for &e in &ev {
            v.feed(e).unwrap();
        }
        assert!(v.finish().unwrap().is_accepted());
        v.ops() as f64 / ev.len() as f64
    };
    let (small, large) = (per_event(10), per_event(300));
    ensure!(large <= small * 1.1 + 1.0, "ops per event {small:.2} at 10^2 nodes, {large:.2} at 9*10^4");
    within(start, Duration::from_secs(60), "streaming")?;
    Ok(format!(
        "1000 pairs agree ({accepted} members, {events_total} events, {full_streams} streams read to the end); ops/event {small:.2} vs {large:.2} at 900x size"
    ))
}

fn c7_ms_family() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(7);
    let tally = family::run(&mut rng, 4, 4);
    ensure!(
        tally.failures.is_empty(),
        "{} disagreement(s):\n    {}",
        tally.failures.len(),
        tally.failures.join("\n    ")
    );
    within(start, Duration::from_secs(300), "MS family")?;
    Ok(format!(
        "{} schemas ({} fully enumerated); definite sat/impl/cnt verdicts {}/{}/{} all agree, unknown {}/{}/{}; {} certificates verified",
        tally.schemas,
        tally.exhaustive,
        tally.definite[0],
        tally.definite[1],
        tally.definite[2],
        tally.unknown[0],
        tally.unknown[1],
        tally.unknown[2],
        tally.certificates
    ))
}

fn random_ms(rng: &mut impl Rng, n: usize) -> (Schema, Vec<family::Rule>) {
    let al = Alphabet::new((0..n).map(|k| format!("s{k}"))).unwrap();
    let rules: Vec<family::Rule> = (0..n)
        .map(|_| {
            let mut r: Vec<(usize, Multiplicity)> = Vec::new();
            for b in 0..n {
                if rng.gen_bool(0.45) {
                    r.push((b, brute::random_mult(rng)));
                }
            }
            r.retain(|e| e.1 != Multiplicity::Zero);
            r
        })
        .collect();
    (family::schema(&rules, &al), rules)
}

/// A random member of the schema with at most `levels` levels, if one is
/// found quickly.
fn random_member(rng: &mut impl Rng, rules: &[family::Rule], levels: usize) -> Option<UnorderedTree> {
    fn grow(rng: &mut impl Rng, rules: &[family::Rule], label: usize, left: usize) -> Option<UnorderedTree> {
        let mut t = UnorderedTree::leaf(Symbol::from_index(label));
        for &(b, m) in &rules[label] {
            let options: Vec<u64> = (0..=2).filter(|&k| m.contains(k)).collect();
            let k = if left == 1 { options[0] } else { *options.choose(rng).unwrap() };
            for _ in 0..k {
                if left == 1 {
                    return None;
                }
                let sub = grow(rng, rules, b, left - 1)?;
                t.graft(t.root(), &sub);
            }
        }
        Some(t)
    }
    (0..50).find_map(|_| grow(rng, rules, 0, levels))
}

fn graph_parts(g: &RootedGraph) -> (Vec<Vec<usize>>, Vec<Symbol>) {
    ((0..g.len()).map(|v| g.successors(v).to_vec()).collect(), (0..g.len()).map(|v| g.label(v)).collect())
}

fn random_dag(rng: &mut impl Rng, n_labels: usize) -> RootedGraph {
    let k = rng.gen_range(1..=6);
    let mut g = RootedGraph::new(Symbol::from_index(rng.gen_range(0..n_labels)));
    for v in 1..k {
        g.add_vertex(Symbol::from_index(rng.gen_range(0..n_labels)));
        let p = rng.gen_range(0..v);
        g.add_edge(p, v);
    }
    for _ in 0..rng.gen_range(0..=3) {
        let (u, v) = (rng.gen_range(0..k), rng.gen_range(0..k));
        if u < v && !g.has_edge(u, v) {
            g.add_edge(u, v);
        }
    }
    g
}

fn random_small_tree(rng: &mut impl Rng, n_labels: usize, max: usize) -> UnorderedTree {
    let mut t = UnorderedTree::leaf(Symbol::from_index(rng.gen_range(0..n_labels)));
    let size = rng.gen_range(1..=max);
    while t.len() < size {
        let p = mschema::NodeId(rng.gen_range(0..t.len()));
        t.add_child(p, Symbol::from_index(rng.gen_range(0..n_labels)));
    }
    t
}

/// A query that embeds in `t` (before the optional random relabelling).
fn query_from_tree(rng: &mut impl Rng, t: &UnorderedTree, n_labels: usize, max: usize) -> TwigQuery {
    use mschema::{Axis, QueryLabel};
    let pick = |rng: &mut ChaCha8Rng, s: Symbol| {
        if rng.gen_bool(0.2) {
            QueryLabel::Any
        } else {
            QueryLabel::Sym(s)
        }
    };
    let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut q = TwigQuery::new(pick(&mut local, t.label(t.root())));
    let mut image = vec![t.root()];
    let size = local.gen_range(1..=max);
    for _ in 1..size {
        let x = local.gen_range(0..q.len());
        let below = brute::proper_descendants(t, image[x]);
        let Some(&m) = below.choose(&mut local) else {
            continue;
        };
        let axis = if t.parent(m) == Some(image[x]) && local.gen_bool(0.6) { Axis::Child } else { Axis::Descendant };
        let label = pick(&mut local, t.label(m));
        q.add(x, axis, label);
        image.push(m);
    }
    if local.gen_bool(0.3) {
        let x = local.gen_range(0..q.len());
        q = q.with_label(x, QueryLabel::Sym(Symbol::from_index(local.gen_range(0..n_labels))));
    }
    q
}

fn c8_graph_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(8);
    // the universal dependency graph simulates in every member
    let mut l1 = 0;
    let mut tries = 0;
    while l1 < 500 {
        tries += 1;
        ensure!(tries < 100_000, "could not generate enough members");
        let n = rng.gen_range(2..=4);
        let (s, rules) = random_ms(&mut rng, n);
        if !s.is_satisfiable() {
            continue;
        }
        let Some(t) = random_member(&mut rng, &rules, 4) else {
            continue;
        };
        ensure!(family_accepts(&rules, &t), "generated tree is not a member");
        let gu = DependencyGraph::of(&s).universal();
        let (succ, labels) = graph_parts(&gu);
        ensure!(gu.simulates_in(&t), "G^u does not simulate in {} for {}", t.display(s.alphabet()), s.display());
        ensure!(brute::simulates(&succ, &labels, &t), "reference simulation fails for {}", s.display());
        l1 += 1;
    }
    // simulation and embedding against unfoldings of random acyclic graphs
    let (mut l2_true, mut l3_true) = (0, 0);
    for _ in 0..500 {
        let g = random_dag(&mut rng, 3);
        let u = g.unfold().unwrap();
        let t = if rng.gen_bool(0.5) && u.len() <= 10 {
            let mut t = u.clone();
            while t.len() < 10 && rng.gen_bool(0.5) {
                let p = mschema::NodeId(rng.gen_range(0..t.len()));
                t.add_child(p, Symbol::from_index(rng.gen_range(0..3)));
            }
            t
        } else {
            random_small_tree(&mut rng, 3, 10)
        };
        let (succ, labels) = graph_parts(&g);
        let sim = g.simulates_in(&t);
        let as_query = mschema::graph::tree_as_query(&u);
        ensure!(sim == brute::simulates(&succ, &labels, &t), "simulation differs from the reference");
        ensure!(sim == brute::embeds(&as_query, &t), "simulation disagrees: simulate {sim} on tree of {} nodes", t.len());
        l2_true += sim as usize;

        let q = query_from_tree(&mut rng, &u, 3, 5);
        let in_graph = g.embeds(&q);
        ensure!(in_graph == q.embeds_in_tree(&u), "graph embedding disagrees with the unfolding");
        ensure!(in_graph == brute::embeds(&q, &u), "graph embedding disagrees with the reference embedding");
        l3_true += in_graph as usize;
    }
    within(start, Duration::from_secs(60), "graph properties")?;
    Ok(format!("universal graph simulates in 500 members; simulation 500 ({l2_true} hold); graph embedding 500 ({l3_true} hold)"))
}

fn family_accepts(rules: &[family::Rule], t: &UnorderedTree) -> bool {
    family::accepts(rules, t)
}

fn random_dtd(rng: &mut impl Rng, n: usize, budget: usize) -> DfDtd {
    let al = Alphabet::new((0..n).map(|k| format!("s{k}"))).unwrap();
    let rules = (0..n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                DfRegex::Epsilon
            } else {
                {
                    let b = rng.gen_range(1..=budget);
                    brute::random_regex(rng, n, b)
                }
            }
        })
        .collect();
    DfDtd::new(al, Symbol::from_index(0), rules)
}

fn dtd_accepts(d: &DfDtd, t: &UnorderedTree) -> bool {
    let n = d.alphabet().len();
    t.label(t.root()) == d.root()
        && t.node_ids().all(|v| brute::regex_accepts_unordered(d.rule(t.label(v)), &brute::counts_of_children(t, v, n)))
}

fn dtd_lang(d: &DfDtd, max_word: usize) -> sig::Lang {
    let n = d.alphabet().len();
    let mut complete = true;
    let alts = (0..n)
        .map(|a| {
            let rule = d.rule(Symbol::from_index(a));
            let all = brute::regex_words(rule, rule.size().max(max_word) + 1);
            if brute::regex_infinite(rule) || all.iter().any(|w| w.len() > max_word) {
                complete = false;
            }
            let mut parikh: HashSet<Vec<(usize, sig::Count)>> = HashSet::new();
            for w in all.iter().filter(|w| w.len() <= max_word) {
                let mut c = vec![0u8; n];
                for s in w {
                    c[s.index()] += 1;
                }
                parikh.insert(
                    c.iter().enumerate().filter(|(_, &k)| k > 0).map(|(b, &k)| (b, sig::Count::Exactly(k))).collect(),
                );
            }
            parikh.into_iter().collect()
        })
        .collect();
    sig::Lang { root: 0, alts, complete }
}

fn c9_dtd() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(9);
    let al = Alphabet::new(["a", "b", "c"]).unwrap();
    // recursions against enumerated words
    let mut regexes = 0;
    while regexes < 500 {
        let budget = rng.gen_range(1..=8);
        let e = brute::random_regex(&mut rng, 3, budget);
        if e.size() > 8 {
            continue;
        }
        regexes += 1;
        // every minimal witness uses each symbol occurrence at most once,
        // so words up to the size of the expression decide all three
        let words = brute::regex_words(&e, 8);
        for s in al.symbols() {
            let universal = words.iter().all(|w| w.contains(&s));
            let existential = words.iter().any(|w| w.contains(&s));
            let minnb = words.iter().map(|w| w.iter().filter(|&&x| x == s).count() as u64).min().unwrap();
            ensure!(e.universal_set().contains(&s) == universal, "universal({}) at {}", e.display(&al), al.name(s));
            ensure!(
                e.existential_set().contains(&s) == existential,
                "existential({}) at {}",
                e.display(&al),
                al.name(s)
            );
            ensure!(e.minnb(s) == minnb, "minnb({}, {}) = {} not {minnb}", e.display(&al), al.name(s), e.minnb(s));
        }
        for w in brute::words(3, 4) {
            ensure!(
                e.matches_unordered(&counts_word(&w)) == brute::regex_accepts_unordered(&e, &w),
                "unordered membership of {} in {}",
                counts_word(&w).display(&al),
                e.display(&al)
            );
        }
    }
    // unfolding yields a member
    let mut unfolded = 0;
    while unfolded < 300 {
        let n = rng.gen_range(2..=4);
        let d = random_dtd(&mut rng, n, 5);
        if d.check().is_err() {
            continue;
        }
        let t = d.unfold().unwrap();
        ensure!(d.tree_satisfies(&t) && dtd_accepts(&d, &t), "unfolding of {} is not valid", d.display());
        unfolded += 1;
    }
    // query reasoning against the bounded enumeration
    let qs = sig::Queries::up_to_three(3);
    let twigs: Vec<TwigQuery> = (0..qs.len()).map(|i| qs.twig(i)).collect();
    let (mut definite, mut unknown, mut instances) = (0, 0, 0);
    while instances < 300 {
        let d = random_dtd(&mut rng, 3, 4);
        if d.check().is_err() {
            continue;
        }
        instances += 1;
        let e = sig::enumerate(&qs, &dtd_lang(&d, 3), 4);
        let roots: Vec<_> = e.roots.iter().collect();
        for _ in 0..30 {
            let q = rng.gen_range(0..qs.len());
            let sat = roots.iter().any(|(b, _)| sig::bit(b, q));
            if sat || e.exhaustive {
                definite += 1;
                ensure!(
                    d.query_satisfiable(&twigs[q]) == sat,
                    "dtd sat {} under {}",
                    qs.text(q, d.alphabet()),
                    d.display()
                );
            } else {
                unknown += 1;
            }
            let missing = roots.iter().any(|(b, _)| !sig::bit(b, q));
            let implied = d.query_implied(&twigs[q]);
            if missing || e.exhaustive {
                definite += 1;
                ensure!(implied == !missing, "dtd impl {} under {}: {implied}", qs.text(q, d.alphabet()), d.display());
            } else {
                unknown += 1;
            }
            if let Some(w) = d.query_witness(&twigs[q]) {
                ensure!(dtd_accepts(&d, &w) && brute::embeds(&twigs[q], &w), "bad dtd witness");
            }
            let p = rng.gen_range(0..qs.len());
            let sep = roots.iter().any(|(b, _)| sig::bit(b, p) && !sig::bit(b, q));
            let c = d.query_contained(&twigs[p], &twigs[q]);
            if sep || e.exhaustive {
                definite += 1;
                ensure!(
                    c.is_ok() == !sep,
                    "dtd cnt {} ⊆ {} under {}: {}",
                    qs.text(p, d.alphabet()),
                    qs.text(q, d.alphabet()),
                    d.display(),
                    c.is_ok()
                );
            } else {
                unknown += 1;
            }
            if let Err(t) = c {
                ensure!(
                    dtd_accepts(&d, &t) && brute::embeds(&twigs[p], &t) && !brute::embeds(&twigs[q], &t),
                    "bad dtd containment counterexample"
                );
            }
        }
    }
    within(start, Duration::from_secs(120), "dtd")?;
    Ok(format!(
        "500 expressions; 300 unfoldings valid; 300 DTDs: {definite} definite verdicts agree, {unknown} unknown"
    ))
}

const DBLP_LABELS: [&str; 7] = ["dblp", "book", "title", "year", "publisher", "author", "editor"];

fn c10_dblp() -> Outcome {
    let start = Instant::now();
    let al = Alphabet::new(DBLP_LABELS).unwrap();
    let leaves = "title -> epsilon; year -> epsilon; publisher -> epsilon; author -> epsilon; editor -> epsilon";
    let permissive = Schema::parse_with_alphabet(
        &format!("root = dblp; dblp -> book*; book -> (title | year | publisher | author | editor)*; {leaves}"),
        &al,
    )
    .unwrap();
    let dms = Schema::parse_with_alphabet(
        &format!("root = dblp; dblp -> book*; book -> title, year, publisher?, (author+ | editor+); {leaves}"),
        &al,
    )
    .unwrap();
    let p = TwigQuery::parse("dblp/book[author]", &al).unwrap();
    let q = TwigQuery::parse("dblp/book[author][title]", &al).unwrap();

    // over-permissive rule: a separating tree exists
    let small = EnumerationBounds { max_depth: 3, max_fanout: 4, max_total_nodes: 6, max_word_count: 4 };
    let r = oracle::oracle_decide(&Problem::QueryContainment { lang: &permissive, p: &p, q: &q }, &small);
    ensure!(r.verdict == Tri::False, "oracle verdict {} under the permissive rule", r.verdict);
    let sep = r.witness.clone().ok_or("no separating tree")?;
    ensure!(
        permissive.tree_satisfies(&sep) && brute::embeds(&p, &sep) && !brute::embeds(&q, &sep),
        "separating tree {} does not separate",
        sep.display(&al)
    );

    // disjunctive schema: nothing separates within depth 3, width 4
    let wide = EnumerationBounds { max_depth: 3, max_fanout: 4, max_total_nodes: 21, max_word_count: 4 };
    let r2 = oracle::oracle_decide(&Problem::QueryContainment { lang: &dms, p: &p, q: &q }, &wide);
    ensure!(r2.witness.is_none() && r2.verdict != Tri::False, "separating tree under the DMS");
    ensure!(r2.within_bounds, "the search did not cover depth 3, width 4");
    // the same bounds, enumerated independently
    let members = oracle::members(&dms, &wide);
    let mut reference = raw_schema(
        &format!("root = dblp; dblp -> book*; book -> title, year, publisher?, (author+ | editor+); {leaves}"),
        &al,
    );
    let mut examined = 0;
    for t in &members.trees {
        ensure!(reference.accepts(t), "enumerated tree {} is not a member", t.display(&al));
        ensure!(!brute::embeds(&p, t) || brute::embeds(&q, t), "{} separates", t.display(&al));
        examined += 1;
    }
    ensure!(examined > 0, "no members enumerated");

    // MS fragment: containment decided exactly
    let ms = Schema::parse_with_alphabet(
        &format!("root = dblp; dblp -> book*; book -> title, year, publisher?, author+; {leaves}"),
        &al,
    )
    .unwrap();
    let m = MsAnalysis::new(&ms).unwrap();
    let c = m.query_contained(&p, &q);
    ensure!(c.holds, "MS fragment: containment not confirmed");
    let back = m.query_contained(&q, &p);
    ensure!(back.holds, "MS fragment: reverse containment not confirmed");
    // and under the permissive rule the exact procedure agrees with the oracle
    let perm_ms = MsAnalysis::new(
        &Schema::parse_with_alphabet(
            &format!("root = dblp; dblp -> book*; book -> title*, year*, publisher*, author*, editor*; {leaves}"),
            &al,
        )
        .unwrap(),
    )
    .unwrap();
    ensure!(!perm_ms.query_contained(&p, &q).holds, "all-star MS should not contain");
    within(start, Duration::from_secs(30), "dblp")?;
    Ok(format!(
        "permissive rule separated by {}; DMS: none among {examined} trees within depth 3, width 4; MS fragment contained both ways",
        sep.display(&al)
    ))
}

fn c11_large_family() -> Outcome {
    let start = Instant::now();
    // nine diamonds: v_i -> u_i?, w_i?; u_i -> v_{i+1}?; w_i -> v_{i+1}?
    let k = 9;
    let mut labels = Vec::new();
    for i in 0..=k {
        labels.push(format!("v{i}"));
        if i < k {
            labels.push(format!("u{i}"));
            labels.push(format!("w{i}"));
        }
    }
    let al = Alphabet::new(labels.clone()).unwrap();
    let mut text = "root = v0".to_string();
    for i in 0..k {
        text.push_str(&format!("; v{i} -> u{i}?, w{i}?; u{i} -> v{}?; w{i} -> v{}?", i + 1, i + 1));
    }
    text.push_str(&format!("; v{k} -> epsilon"));
    let s = Schema::parse_with_alphabet(&text, &al).unwrap();
    // independent count of the simple paths v0 ⇝ v9 in the dependency graph
    fn paths(al: &Alphabet, s: &Schema, from: Symbol, to: Symbol) -> u64 {
        if from == to {
            return 1;
        }
        s.rule(from).symbols().map(|b| paths(al, s, b, to)).sum()
    }
    let expected = paths(&al, &s, al.symbol("v0").unwrap(), al.symbol(&format!("v{k}")).unwrap());
    let m = MsAnalysis::new(&s).unwrap();
    let p = TwigQuery::parse(&format!("v0//v{k}"), &al).unwrap();
    let q = TwigQuery::parse(&format!("v0//*[v{k}]"), &al).unwrap();
    let c = m.query_contained(&p, &q);
    ensure!(c.graphs as u64 == expected, "{} graphs, {expected} simple paths", c.graphs);
    ensure!(c.graphs > 256, "family has only {} graphs", c.graphs);
    ensure!(c.holds, "containment should hold");
    let q2 = TwigQuery::parse(&format!("v0//u{}", k - 1), &al).unwrap();
    let c2 = m.query_contained(&p, &q2);
    ensure!(!c2.holds, "v0//v{k} does not force u{}", k - 1);
    let t = c2.counterexample.ok_or("missing counterexample")?;
    ensure!(s.tree_satisfies(&t) && brute::embeds(&p, &t) && !brute::embeds(&q2, &t), "bad counterexample");
    within(start, Duration::from_secs(60), "large family")?;
    Ok(format!("{} characteristic graphs ({} distinct after merging) in {:.2?}", c.graphs, c.distinct, start.elapsed()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("worked examples", c1_worked_examples),
        ("example 1", c2_example_one),
        ("embedding count", c3_figure_three),
        ("keystone", c4_keystone),
        ("characterizing sets", c5_characterizing_sets),
        ("streaming", c6_streaming),
        ("MS family vs oracle", c7_ms_family),
        ("graph properties", c8_graph_properties),
        ("DTD extension", c9_dtd),
        ("dblp discrepancy", c10_dblp),
        ("large family", c11_large_family),
    ];
    // `cargo test -- 7` runs a single criterion
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n:>2} PASS [{secs:7.2}s] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL [{secs:7.2}s] {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
