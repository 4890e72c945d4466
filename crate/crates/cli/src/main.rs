//! `mschema`: validation, schema analysis, query reasoning and bounded
//! oracle runs from the command line.
//!
//! Exit codes: 0 the property holds (or the document is valid), 1 it fails,
//! 2 usage or input error, 3 the bounded oracle could not decide.

mod xml;

use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mschema::oracle::{self, EnumerationBounds, Problem, Regex, TreeLanguage, Tri};
use mschema::{
    Alphabet, DfDtd, DisjunctiveExpression, MsAnalysis, NormalizedExpression, RuleEncoding, Schema, TreeEvent,
    TwigQuery, UnorderedTree, Validator, Verdict,
};

#[derive(Parser)]
#[command(name = "mschema", version, about = "Unordered XML schemas with multiplicities")]
struct Cli {
    /// Output style: readable text or one key=value record per line.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stream an XML document (or standard input) through the validator.
    Validate { schema: PathBuf, document: Option<PathBuf> },
    /// Schema satisfiability, universality and containment.
    Schema {
        #[command(subcommand)]
        op: SchemaOp,
    },
    /// Twig query satisfiability, implication and containment.
    Query {
        #[command(subcommand)]
        op: QueryOp,
    },
    /// Disjunctive multiplicity expressions.
    Expr {
        #[command(subcommand)]
        op: ExprOp,
    },
    /// Bounded brute-force decisions.
    Oracle {
        #[command(subcommand)]
        problem: OracleProblem,
    },
}

#[derive(Subcommand)]
enum SchemaOp {
    /// Whether the schema has a member.
    Sat {
        schema: PathBuf,
    },
    /// Whether the schema accepts every tree with its root label.
    Universal {
        schema: PathBuf,
    },
    /// Whether every tree of SUB is a tree of SUP.
    Contains {
        sub: PathBuf,
        sup: PathBuf,
    },
}

#[derive(Args)]
struct SchemaOpts {
    /// Read the schema as a disjunction-free DTD.
    #[arg(long)]
    dtd: bool,
    /// Oracle bounds `depth,fanout,nodes,count`, used for schemas with
    /// disjunction.
    #[arg(long)]
    bounds: Option<String>,
}

#[derive(Subcommand)]
enum QueryOp {
    /// Whether some member satisfies the query.
    Sat {
        schema: PathBuf,
        query: String,
        #[command(flatten)]
        opts: SchemaOpts,
    },
    /// Whether every member satisfies the query.
    Impl {
        schema: PathBuf,
        query: String,
        #[command(flatten)]
        opts: SchemaOpts,
    },
    /// Whether every tree of the schema satisfying P satisfies Q.
    Cnt {
        schema: PathBuf,
        p: String,
        q: String,
        #[command(flatten)]
        opts: SchemaOpts,
    },
}

#[derive(Subcommand)]
enum ExprOp {
    /// Normal form of an expression.
    Normalize {
        expr: String,
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Characterizing triple: conflicts, cardinalities, required sets.
    Triple {
        expr: String,
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Whether the language of SUB is included in that of SUP.
    Contains {
        sup: String,
        sub: String,
        #[arg(long)]
        alphabet: Option<String>,
    },
}

#[derive(Args)]
struct OracleOpts {
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long)]
    dtd: bool,
}

#[derive(Subcommand)]
enum OracleProblem {
    /// Whether a tree belongs to the schema.
    Memb {
        schema: PathBuf,
        tree: String,
        #[command(flatten)]
        opts: OracleOpts,
    },
    /// Whether the schema has a member within bounds.
    Sat {
        schema: PathBuf,
        #[command(flatten)]
        opts: OracleOpts,
    },
    /// Whether every tree of SUB within bounds is a tree of SUP.
    SchemaCnt {
        sub: PathBuf,
        sup: PathBuf,
        #[command(flatten)]
        opts: OracleOpts,
    },
    /// Whether some member within bounds satisfies the query.
    QuerySat {
        schema: PathBuf,
        query: String,
        #[command(flatten)]
        opts: OracleOpts,
    },
    /// Whether every member within bounds satisfies the query.
    QueryImpl {
        schema: PathBuf,
        query: String,
        #[command(flatten)]
        opts: OracleOpts,
    },
    /// Whether every member within bounds satisfying P satisfies Q.
    QueryCnt {
        schema: PathBuf,
        p: String,
        q: String,
        #[command(flatten)]
        opts: OracleOpts,
    },
    /// Compare an expression with the unordered closure of a regular
    /// expression on all words up to the count bound.
    Capture {
        expr: String,
        regex: String,
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long)]
        bounds: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Holds,
    Fails,
    Unknown,
}

impl From<bool> for Outcome {
    fn from(b: bool) -> Outcome {
        if b {
            Outcome::Holds
        } else {
            Outcome::Fails
        }
    }
}

impl From<Tri> for Outcome {
    fn from(t: Tri) -> Outcome {
        match t {
            Tri::True => Outcome::Holds,
            Tri::False => Outcome::Fails,
            Tri::Unknown => Outcome::Unknown,
        }
    }
}

/// Collected output fields, printed in order.
struct Report {
    format: Format,
    fields: Vec<(String, String)>,
}

impl Report {
    fn put(&mut self, key: &str, value: impl ToString) {
        self.fields.push((key.to_string(), value.to_string()));
    }

    fn print(&self) {
        for (k, v) in &self.fields {
            match self.format {
                Format::Machine => println!("{k}={}", v.replace('\n', " ")),
                Format::Human => println!("{k}: {v}"),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut report = Report { format: cli.format, fields: Vec::new() };
    let result = run(cli.cmd, &mut report);
    report.print();
    match result {
        Ok(Outcome::Holds) => ExitCode::from(0),
        Ok(Outcome::Fails) => ExitCode::from(1),
        Ok(Outcome::Unknown) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd, out: &mut Report) -> Result<Outcome> {
    match cmd {
        Cmd::Validate { schema, document } => validate(&schema, document.as_deref(), out),
        Cmd::Schema { op } => schema_cmd(op, out),
        Cmd::Query { op } => query_cmd(op, out),
        Cmd::Expr { op } => expr_cmd(op, out),
        Cmd::Oracle { problem } => oracle_cmd(problem, out),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_schema(path: &Path) -> Result<Schema> {
    Schema::parse(&read(path)?).with_context(|| format!("in schema {}", path.display()))
}

fn load_dtd(path: &Path) -> Result<DfDtd> {
    DfDtd::parse(&read(path)?).with_context(|| format!("in DTD {}", path.display()))
}

/// Both schemas over the union of their labels.
fn load_pair(a: &Path, b: &Path) -> Result<(Schema, Schema)> {
    let (sa, sb) = (load_schema(a)?, load_schema(b)?);
    let mut names: Vec<String> = sa.alphabet().names().to_vec();
    for n in sb.alphabet().names() {
        if !names.contains(n) {
            names.push(n.clone());
        }
    }
    let al = Alphabet::new(names)?;
    Ok((Schema::parse_with_alphabet(&read(a)?, &al)?, Schema::parse_with_alphabet(&read(b)?, &al)?))
}

fn bounds_of(text: &Option<String>) -> Result<EnumerationBounds> {
    match text {
        Some(t) => Ok(EnumerationBounds::parse(t)?),
        None => Ok(EnumerationBounds::default()),
    }
}

fn show(t: &UnorderedTree, al: &Alphabet) -> String {
    t.display(al).to_string()
}

fn validate(schema: &Path, document: Option<&Path>, out: &mut Report) -> Result<Outcome> {
    let s = load_schema(schema)?;
    let input: Box<dyn BufRead> = match document {
        Some(p) if p.as_os_str() != "-" => {
            Box::new(BufReader::new(File::open(p).with_context(|| format!("cannot open {}", p.display()))?))
        }
        _ => Box::new(BufReader::new(io::stdin())),
    };
    let enc = RuleEncoding::new(&s);
    let mut v = Validator::new(&enc);
    let mut reader = xml::ElementReader::new(input);
    let mut events = 0usize;
    let mut verdict = v.verdict();
    let mut unknown = None;
    while verdict == Verdict::Running {
        let Some(ev) = reader.next_event()? else {
            break;
        };
        let name = match &ev {
            xml::XmlEvent::Open(n) | xml::XmlEvent::Close(n) => n.clone(),
        };
        let Some(sym) = s.alphabet().get(&name) else {
            unknown = Some((events, name));
            break;
        };
        let ev = match ev {
            xml::XmlEvent::Open(_) => TreeEvent::Open(sym),
            xml::XmlEvent::Close(_) => TreeEvent::Close(sym),
        };
        events += 1;
        verdict = v.feed(ev)?;
    }
    for what in &reader.skipped {
        eprintln!("warning: skipped {what}");
    }
    if let Some((pos, name)) = unknown {
        out.put("verdict", "invalid");
        out.put("position", pos);
        out.put("reason", "unknown-label");
        out.put("label", name);
        return Ok(Outcome::Fails);
    }
    if events == 0 && verdict == Verdict::Running {
        bail!("empty document");
    }
    if verdict == Verdict::Running {
        verdict = v.finish()?;
    }
    let outcome = match verdict {
        Verdict::Accepted { position } => {
            out.put("verdict", "valid");
            out.put("position", position);
            Outcome::Holds
        }
        Verdict::Rejected { position, label, reason } => {
            out.put("verdict", "invalid");
            out.put("position", position);
            out.put("reason", reason);
            if let Some(l) = label {
                out.put("label", s.alphabet().name(l));
            }
            Outcome::Fails
        }
        Verdict::Running => bail!("document ended before the verdict"),
    };
    out.put("events", events);
    out.put("peak_depth", v.peak_depth());
    out.put("frames", v.frames_allocated());
    Ok(outcome)
}

fn schema_cmd(op: SchemaOp, out: &mut Report) -> Result<Outcome> {
    match op {
        SchemaOp::Sat { schema } => {
            let s = load_schema(&schema)?;
            let t = s.minimal_tree(s.root());
            out.put("satisfiable", t.is_some());
            if let Some(t) = &t {
                out.put("witness", show(t, s.alphabet()));
            }
            Ok(t.is_some().into())
        }
        SchemaOp::Universal { schema } => {
            let s = load_schema(&schema)?;
            let u = s.is_universal();
            out.put("universal", u);
            Ok(u.into())
        }
        SchemaOp::Contains { sub, sup } => {
            let (a, b) = load_pair(&sub, &sup)?;
            let cex = a.containment_counterexample(&b)?;
            out.put("contained", cex.is_none());
            if let Some(t) = &cex {
                out.put("counterexample", show(t, a.alphabet()));
            }
            Ok(cex.is_none().into())
        }
    }
}

enum Loaded {
    Ms(MsAnalysis),
    Dms(Schema),
    Dtd(DfDtd),
}

impl Loaded {
    fn open(path: &Path, dtd: bool) -> Result<Loaded> {
        if dtd {
            return Ok(Loaded::Dtd(load_dtd(path)?));
        }
        let s = load_schema(path)?;
        Ok(match MsAnalysis::new(&s) {
            Ok(m) => Loaded::Ms(m),
            Err(_) => Loaded::Dms(s),
        })
    }

    fn alphabet(&self) -> &Alphabet {
        match self {
            Loaded::Ms(m) => m.schema().alphabet(),
            Loaded::Dms(s) => s.alphabet(),
            Loaded::Dtd(d) => d.alphabet(),
        }
    }

    fn query(&self, text: &str) -> Result<TwigQuery> {
        TwigQuery::parse(text, self.alphabet()).with_context(|| format!("in query `{text}`"))
    }
}

const DMS_REJECTED: &str = "implication and containment of twig queries under schemas with disjunction are \
     EXPTIME-complete and not supported; use `mschema oracle` for a bounded answer";

fn query_cmd(op: QueryOp, out: &mut Report) -> Result<Outcome> {
    match op {
        QueryOp::Sat { schema, query, opts } => {
            let l = Loaded::open(&schema, opts.dtd)?;
            let q = l.query(&query)?;
            let al = l.alphabet().clone();
            let witness = match &l {
                Loaded::Ms(m) => {
                    if !m.is_satisfiable() {
                        out.put("note", "the schema is unsatisfiable");
                    }
                    m.witness_tree(&q)
                }
                Loaded::Dtd(d) => d.query_witness(&q),
                Loaded::Dms(s) => {
                    let b = bounds_of(&opts.bounds)?;
                    let r = oracle::oracle_decide(&Problem::QuerySatisfiability { lang: s, q: &q }, &b);
                    out.put("method", "bounded-oracle");
                    out.put("satisfiable", r.verdict);
                    if let Some(t) = &r.witness {
                        out.put("witness", show(t, &al));
                    }
                    return Ok(r.verdict.into());
                }
            };
            out.put("satisfiable", witness.is_some());
            if let Some(t) = &witness {
                out.put("witness", show(t, &al));
            }
            Ok(witness.is_some().into())
        }
        QueryOp::Impl { schema, query, opts } => {
            let l = Loaded::open(&schema, opts.dtd)?;
            let q = l.query(&query)?;
            let al = l.alphabet().clone();
            let (implied, cex) = match &l {
                Loaded::Ms(m) => (m.query_implied(&q), m.implication_counterexample(&q)),
                Loaded::Dtd(d) => {
                    let implied = d.query_implied(&q);
                    (implied, if implied { None } else { d.unfold().ok() })
                }
                Loaded::Dms(_) => bail!(DMS_REJECTED),
            };
            out.put("implied", implied);
            if let Some(t) = &cex {
                out.put("counterexample", show(t, &al));
            }
            Ok(implied.into())
        }
        QueryOp::Cnt { schema, p, q, opts } => {
            let l = Loaded::open(&schema, opts.dtd)?;
            let (p, q) = (l.query(&p)?, l.query(&q)?);
            let al = l.alphabet().clone();
            let cex = match &l {
                Loaded::Ms(m) => {
                    let c = m.query_contained(&p, &q);
                    out.put("graphs", c.graphs);
                    out.put("distinct_trees", c.distinct);
                    c.counterexample
                }
                Loaded::Dtd(d) => d.query_contained(&p, &q).err(),
                Loaded::Dms(_) => bail!(DMS_REJECTED),
            };
            out.put("contained", cex.is_none());
            if let Some(t) = &cex {
                out.put("counterexample", show(t, &al));
            }
            Ok(cex.is_none().into())
        }
    }
}

/// Identifiers of expression texts, in order of appearance.
fn infer_alphabet(texts: &[&str], given: &Option<String>) -> Result<Alphabet> {
    if let Some(list) = given {
        return Ok(Alphabet::new(list.split(',').map(str::trim).filter(|s| !s.is_empty()))?);
    }
    let mut names: Vec<String> = Vec::new();
    for text in texts {
        let mut chars = text.chars().peekable();
        let mut cur = String::new();
        while let Some(c) = chars.next() {
            if c == '^' {
                chars.next();
                continue;
            }
            if c.is_alphanumeric() || matches!(c, '_' | '-' | ':') {
                cur.push(c);
            } else if !cur.is_empty() {
                names.push(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            names.push(cur);
        }
    }
    let mut uniq: Vec<String> = Vec::new();
    for n in names {
        if n != "epsilon" && !uniq.contains(&n) {
            uniq.push(n);
        }
    }
    if uniq.is_empty() {
        bail!("cannot infer an alphabet; pass --alphabet");
    }
    Ok(Alphabet::new(uniq)?)
}

fn expr_cmd(op: ExprOp, out: &mut Report) -> Result<Outcome> {
    match op {
        ExprOp::Normalize { expr, alphabet } => {
            let al = infer_alphabet(&[&expr], &alphabet)?;
            let e = DisjunctiveExpression::parse(&expr, &al)?;
            out.put("normalized", e.normalize());
            Ok(Outcome::Holds)
        }
        ExprOp::Triple { expr, alphabet } => {
            let al = infer_alphabet(&[&expr], &alphabet)?;
            let e = NormalizedExpression::parse(&expr, &al)?;
            for line in e.triple().display(&al).to_string().lines() {
                let (k, v) = line.split_once('=').unwrap_or((line, ""));
                out.put(k, v);
            }
            Ok(Outcome::Holds)
        }
        ExprOp::Contains { sup, sub, alphabet } => {
            let al = infer_alphabet(&[&sup, &sub], &alphabet)?;
            let (big, small) = (NormalizedExpression::parse(&sup, &al)?, NormalizedExpression::parse(&sub, &al)?);
            let cex = big.containment_counterexample(&small);
            out.put("contained", cex.is_none());
            if let Some(w) = &cex {
                out.put("counterexample", w.display(&al));
            }
            Ok(cex.is_none().into())
        }
    }
}

fn oracle_cmd(problem: OracleProblem, out: &mut Report) -> Result<Outcome> {
    enum Lang {
        S(Schema),
        D(oracle::DtdLanguage, Alphabet),
    }
    let open = |path: &Path, dtd: bool| -> Result<Lang> {
        Ok(if dtd {
            let d = load_dtd(path)?;
            let al = d.alphabet().clone();
            Lang::D(oracle::DtdLanguage::new(&d), al)
        } else {
            Lang::S(load_schema(path)?)
        })
    };
    fn lang(l: &Lang) -> &dyn TreeLanguage {
        match l {
            Lang::S(s) => s,
            Lang::D(d, _) => d,
        }
    }
    fn al(l: &Lang) -> Alphabet {
        match l {
            Lang::S(s) => s.alphabet().clone(),
            Lang::D(_, a) => a.clone(),
        }
    }
    let q = |l: &Lang, text: &str| -> Result<TwigQuery> {
        TwigQuery::parse(text, &al(l)).with_context(|| format!("in query `{text}`"))
    };
    let (outcome, alphabet) = match problem {
        OracleProblem::Memb { schema, tree, opts } => {
            let l = open(&schema, opts.dtd)?;
            let t = UnorderedTree::parse(&tree, &al(&l))?;
            let b = bounds_of(&opts.bounds)?;
            (oracle::oracle_decide(&Problem::Membership { lang: lang(&l), tree: &t }, &b), al(&l))
        }
        OracleProblem::Sat { schema, opts } => {
            let l = open(&schema, opts.dtd)?;
            let b = bounds_of(&opts.bounds)?;
            (oracle::oracle_decide(&Problem::Satisfiability { lang: lang(&l) }, &b), al(&l))
        }
        OracleProblem::SchemaCnt { sub, sup, opts } => {
            let (a, c) = load_pair(&sub, &sup)?;
            let b = bounds_of(&opts.bounds)?;
            let al = a.alphabet().clone();
            (oracle::oracle_decide(&Problem::SchemaContainment { sub: &a, sup: &c }, &b), al)
        }
        OracleProblem::QuerySat { schema, query, opts } => {
            let l = open(&schema, opts.dtd)?;
            let qq = q(&l, &query)?;
            let b = bounds_of(&opts.bounds)?;
            (oracle::oracle_decide(&Problem::QuerySatisfiability { lang: lang(&l), q: &qq }, &b), al(&l))
        }
        OracleProblem::QueryImpl { schema, query, opts } => {
            let l = open(&schema, opts.dtd)?;
            let qq = q(&l, &query)?;
            let b = bounds_of(&opts.bounds)?;
            (oracle::oracle_decide(&Problem::QueryImplication { lang: lang(&l), q: &qq }, &b), al(&l))
        }
        OracleProblem::QueryCnt { schema, p, q: qt, opts } => {
            let l = open(&schema, opts.dtd)?;
            let (pp, qq) = (q(&l, &p)?, q(&l, &qt)?);
            let b = bounds_of(&opts.bounds)?;
            let r = oracle::oracle_decide(&Problem::QueryContainment { lang: lang(&l), p: &pp, q: &qq }, &b);
            (r, al(&l))
        }
        OracleProblem::Capture { expr, regex, alphabet, bounds } => {
            let al = infer_alphabet(&[&expr, &regex], &alphabet)?;
            let e = DisjunctiveExpression::parse(&expr, &al)?;
            let r = Regex::parse(&regex, &al)?;
            let b = bounds_of(&bounds)?;
            (oracle::oracle_decide(&Problem::Capture { e: &e, r: &r }, &b), al)
        }
    };
    out.put("verdict", outcome.verdict);
    out.put("within_bounds", outcome.within_bounds);
    out.put("examined", outcome.examined);
    out.put("exhaustive", outcome.exhaustive);
    if let Some(t) = &outcome.witness {
        out.put("witness", show(t, &alphabet));
    }
    Ok(outcome.verdict.into())
}
