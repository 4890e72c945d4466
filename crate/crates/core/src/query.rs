//! Twig queries and their embeddings into unordered trees.

use std::fmt;

#[cfg(test)]
use crate::error::Error;
use crate::error::Result;
use crate::model::{Alphabet, NodeId, Symbol, UnorderedTree};
use crate::syntax::{Cursor, Tok};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryLabel {
    Any,
    Sym(Symbol),
}

impl QueryLabel {
    pub fn matches(self, s: Symbol) -> bool {
        match self {
            QueryLabel::Any => true,
            QueryLabel::Sym(t) => t == s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Child,
    Descendant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct QNode {
    label: QueryLabel,
    parent: Option<(usize, Axis)>,
    children: Vec<usize>,
}

/// A twig query. Node 0 is the root and every node's parent has a smaller
/// index, so reverse index order visits children before parents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TwigQuery {
    nodes: Vec<QNode>,
}

impl TwigQuery {
    pub fn new(root: QueryLabel) -> TwigQuery {
        TwigQuery { nodes: vec![QNode { label: root, parent: None, children: Vec::new() }] }
    }

    pub fn add(&mut self, parent: usize, axis: Axis, label: QueryLabel) -> usize {
        let id = self.nodes.len();
        self.nodes.push(QNode { label, parent: Some((parent, axis)), children: Vec::new() });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, x: usize) -> QueryLabel {
        self.nodes[x].label
    }

    pub fn children(&self, x: usize) -> &[usize] {
        &self.nodes[x].children
    }

    /// The axis of the edge entering `x` (none for the root).
    pub fn axis(&self, x: usize) -> Option<Axis> {
        self.nodes[x].parent.map(|(_, a)| a)
    }

    pub fn parent(&self, x: usize) -> Option<usize> {
        self.nodes[x].parent.map(|(p, _)| p)
    }

    pub fn with_label(&self, x: usize, label: QueryLabel) -> TwigQuery {
        let mut q = self.clone();
        q.nodes[x].label = label;
        q
    }

    /// The query rooted at `x`.
    pub fn subquery(&self, x: usize) -> TwigQuery {
        let mut q = TwigQuery::new(self.label(x));
        let mut stack = vec![(x, 0)];
        while let Some((src, dst)) = stack.pop() {
            for &c in self.children(src) {
                let copy = q.add(dst, self.axis(c).unwrap(), self.label(c));
                stack.push((c, copy));
            }
        }
        q
    }

    /// Parses the XPath subset `r/*[a//b][c]//d`.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<TwigQuery> {
        let mut cur = Cursor::new(text)?;
        cur.eat(&Tok::Slash);
        let label = parse_label(&mut cur, alphabet)?;
        let mut q = TwigQuery::new(label);
        parse_predicates(&mut cur, alphabet, &mut q, 0)?;
        parse_steps(&mut cur, alphabet, &mut q, 0)?;
        cur.finish()?;
        Ok(q)
    }

    /// Whether the query embeds into `t`.
    pub fn embeds_in_tree(&self, t: &UnorderedTree) -> bool {
        let (here, _) = self.match_tables(t);
        here[self.root()][t.root().0]
    }

    /// `here[x][n]`: the subquery at `x` embeds with `x ↦ n`;
    /// `below[x][n]`: it embeds at some proper descendant of `n`.
    pub fn match_tables(&self, t: &UnorderedTree) -> (Vec<Vec<bool>>, Vec<Vec<bool>>) {
        let order = t.preorder();
        let mut here = vec![vec![false; t.len()]; self.len()];
        let mut below = vec![vec![false; t.len()]; self.len()];
        for x in (0..self.len()).rev() {
            for &n in order.iter().rev() {
                let kids = t.children(n);
                below[x][n.0] = kids.iter().any(|c| here[x][c.0] || below[x][c.0]);
                here[x][n.0] = self.label(x).matches(t.label(n))
                    && self.children(x).iter().all(|&y| match self.axis(y).unwrap() {
                        Axis::Child => kids.iter().any(|c| here[y][c.0]),
                        Axis::Descendant => below[y][n.0],
                    });
            }
        }
        (here, below)
    }

    /// Number of embeddings of the query into `t`.
    pub fn count_embeddings(&self, t: &UnorderedTree) -> u128 {
        let order = t.preorder();
        let mut cnt = vec![vec![0u128; t.len()]; self.len()];
        // sum of cnt over proper descendants
        let mut desc = vec![vec![0u128; t.len()]; self.len()];
        for x in (0..self.len()).rev() {
            for &n in order.iter().rev() {
                let kids = t.children(n);
                desc[x][n.0] = kids.iter().map(|c| cnt[x][c.0] + desc[x][c.0]).sum();
                if !self.label(x).matches(t.label(n)) {
                    continue;
                }
                let mut total: u128 = 1;
                for &y in self.children(x) {
                    let ways: u128 = match self.axis(y).unwrap() {
                        Axis::Child => kids.iter().map(|c| cnt[y][c.0]).sum(),
                        Axis::Descendant => desc[y][n.0],
                    };
                    total = total.saturating_mul(ways);
                }
                cnt[x][n.0] = total;
            }
        }
        cnt[self.root()][t.root().0]
    }

    /// One embedding into `t`, as query node → tree node.
    pub fn embedding_in_tree(&self, t: &UnorderedTree) -> Option<Vec<NodeId>> {
        let (here, _) = self.match_tables(t);
        if !here[0][t.root().0] {
            return None;
        }
        let mut out = vec![t.root(); self.len()];
        for x in 1..self.len() {
            let p = out[self.parent(x).unwrap()];
            let candidates: Vec<NodeId> = match self.axis(x).unwrap() {
                Axis::Child => t.children(p).to_vec(),
                Axis::Descendant => t.descendants(p),
            };
            out[x] = *candidates.iter().find(|c| here[x][c.0]).expect("table guarantees a match");
        }
        Some(out)
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        QueryDisplay { q: self, alphabet }
    }

    fn write(&self, x: usize, alphabet: &Alphabet, out: &mut String) {
        match self.label(x) {
            QueryLabel::Any => out.push('*'),
            QueryLabel::Sym(s) => out.push_str(alphabet.name(s)),
        }
        let kids = self.children(x);
        let Some((&last, preds)) = kids.split_last() else {
            return;
        };
        for &c in preds {
            out.push('[');
            if self.axis(c) == Some(Axis::Descendant) {
                out.push_str("//");
            }
            self.write(c, alphabet, out);
            out.push(']');
        }
        out.push_str(if self.axis(last) == Some(Axis::Descendant) { "//" } else { "/" });
        self.write(last, alphabet, out);
    }
}

fn parse_label(cur: &mut Cursor, alphabet: &Alphabet) -> Result<QueryLabel> {
    if cur.eat(&Tok::Star) {
        return Ok(QueryLabel::Any);
    }
    let name = cur.ident()?;
    Ok(QueryLabel::Sym(alphabet.symbol(&name)?))
}

fn parse_predicates(cur: &mut Cursor, alphabet: &Alphabet, q: &mut TwigQuery, at: usize) -> Result<()> {
    while cur.eat(&Tok::LBracket) {
        let axis = if cur.eat(&Tok::DoubleSlash) {
            Axis::Descendant
        } else {
            cur.eat(&Tok::Slash);
            Axis::Child
        };
        let label = parse_label(cur, alphabet)?;
        let node = q.add(at, axis, label);
        parse_predicates(cur, alphabet, q, node)?;
        parse_steps(cur, alphabet, q, node)?;
        if matches!(cur.peek(), Some(Tok::Eq)) {
            return Err(cur.error("value predicates are not supported; only structure is queried".into()));
        }
        cur.expect(&Tok::RBracket, "`]`")?;
    }
    Ok(())
}

fn parse_steps(cur: &mut Cursor, alphabet: &Alphabet, q: &mut TwigQuery, mut at: usize) -> Result<()> {
    loop {
        let axis = if cur.eat(&Tok::Slash) {
            Axis::Child
        } else if cur.eat(&Tok::DoubleSlash) {
            Axis::Descendant
        } else {
            return Ok(());
        };
        let label = parse_label(cur, alphabet)?;
        at = q.add(at, axis, label);
        parse_predicates(cur, alphabet, q, at)?;
    }
}

struct QueryDisplay<'a> {
    q: &'a TwigQuery,
    alphabet: &'a Alphabet,
}

impl fmt::Display for QueryDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.q.write(0, self.alphabet, &mut s);
        f.write_str(&s)
    }
}
