//! Alphabets, multiplicities, unordered words, unordered trees and the
//! open/close event streams used by the streaming validator.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An interned label. Ids are dense and start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(u32);

impl Symbol {
    pub fn from_id(id: u32) -> Symbol {
        assert!(id >= 1, "symbol ids start at 1");
        Symbol(id)
    }

    pub fn from_index(index: usize) -> Symbol {
        Symbol(index as u32 + 1)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    /// Zero-based position, used to index per-symbol tables.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

#[derive(Debug, PartialEq, Eq)]
struct AlphabetInner {
    names: Vec<String>,
    lookup: HashMap<String, Symbol>,
}

/// A finite, non-empty, ordered set of labels. Cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet(Arc<AlphabetInner>);

impl Alphabet {
    /// Interns `names` in order, ignoring repeats.
    pub fn new<I, S>(names: I) -> Result<Alphabet>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list = Vec::new();
        let mut lookup = HashMap::new();
        for name in names {
            let name = name.as_ref();
            if !lookup.contains_key(name) {
                let sym = Symbol::from_index(list.len());
                lookup.insert(name.to_string(), sym);
                list.push(name.to_string());
            }
        }
        if list.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Alphabet(Arc::new(AlphabetInner { names: list, lookup })))
    }

    pub fn len(&self) -> usize {
        self.0.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, name: &str) -> Option<Symbol> {
        self.0.lookup.get(name).copied()
    }

    pub fn symbol(&self, name: &str) -> Result<Symbol> {
        self.get(name).ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn name(&self, sym: Symbol) -> &str {
        &self.0.names[sym.index()]
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.len()).map(Symbol::from_index)
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }
}

/// Occurrence constraint attached to a symbol or a disjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Multiplicity {
    Zero,
    One,
    Optional,
    Plus,
    Star,
}

// SUBSET[m1][m2] == [[m1]] is a subset of [[m2]], order Zero One Optional Plus Star.
const SUBSET: [[bool; 5]; 5] = [
    [true, false, true, false, true],
    [false, true, true, true, true],
    [false, false, true, false, true],
    [false, false, false, true, true],
    [false, false, false, false, true],
];

impl Multiplicity {
    pub const ALL: [Multiplicity; 5] =
        [Multiplicity::Zero, Multiplicity::One, Multiplicity::Optional, Multiplicity::Plus, Multiplicity::Star];

    fn ord(self) -> usize {
        match self {
            Multiplicity::Zero => 0,
            Multiplicity::One => 1,
            Multiplicity::Optional => 2,
            Multiplicity::Plus => 3,
            Multiplicity::Star => 4,
        }
    }

    /// Membership of `k` in the set of counts the multiplicity denotes.
    pub fn contains(self, k: u64) -> bool {
        match self {
            Multiplicity::Zero => k == 0,
            Multiplicity::One => k == 1,
            Multiplicity::Optional => k <= 1,
            Multiplicity::Plus => k >= 1,
            Multiplicity::Star => true,
        }
    }

    pub fn allows_zero(self) -> bool {
        self.contains(0)
    }

    /// True when the denoted set has no upper bound.
    pub fn is_unbounded(self) -> bool {
        matches!(self, Multiplicity::Plus | Multiplicity::Star)
    }

    pub fn min(self) -> u64 {
        match self {
            Multiplicity::One | Multiplicity::Plus => 1,
            _ => 0,
        }
    }

    pub fn is_subset_of(self, other: Multiplicity) -> bool {
        SUBSET[self.ord()][other.ord()]
    }

    /// The multiplicity denoting `{0} ∪ [[self]]`.
    pub fn with_zero(self) -> Multiplicity {
        match self {
            Multiplicity::Zero => Multiplicity::Zero,
            Multiplicity::One | Multiplicity::Optional => Multiplicity::Optional,
            Multiplicity::Plus | Multiplicity::Star => Multiplicity::Star,
        }
    }

    /// Counts obtainable as a sum of `i` values from `self`, for `i` in `outer`.
    pub fn repeat(self, outer: Multiplicity) -> Multiplicity {
        use Multiplicity::*;
        match (outer, self) {
            (Zero, _) | (_, Zero) => Zero,
            (One, m) => m,
            (Optional, m) => m.with_zero(),
            (Plus, One) | (Plus, Plus) => Plus,
            (Plus, Optional) | (Plus, Star) => Star,
            (Star, _) => Star,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Multiplicity::Zero => "0",
            Multiplicity::One => "",
            Multiplicity::Optional => "?",
            Multiplicity::Plus => "+",
            Multiplicity::Star => "*",
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Multiplicity::One => "1",
            m => m.suffix(),
        }
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A multiset of symbols. Trailing zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnorderedWord {
    counts: Vec<u32>,
}

impl UnorderedWord {
    pub fn empty() -> UnorderedWord {
        UnorderedWord::default()
    }

    pub fn from_counts(mut counts: Vec<u32>) -> UnorderedWord {
        while counts.last() == Some(&0) {
            counts.pop();
        }
        UnorderedWord { counts }
    }

    pub fn from_symbols<I: IntoIterator<Item = Symbol>>(symbols: I) -> UnorderedWord {
        let mut w = UnorderedWord::empty();
        for s in symbols {
            w.add(s, 1);
        }
        w
    }

    /// Parses the compact notation `aaacc` (single-character names) or a
    /// whitespace separated list of names. `ε` and the empty string give
    /// the empty word.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<UnorderedWord> {
        let text = text.trim();
        if text.is_empty() || text == "ε" || text == "epsilon" {
            return Ok(UnorderedWord::empty());
        }
        let mut w = UnorderedWord::empty();
        if text.contains(char::is_whitespace) || text.contains(',') {
            for name in text.split(|c: char| c.is_whitespace() || c == ',') {
                if !name.is_empty() {
                    w.add(alphabet.symbol(name)?, 1);
                }
            }
        } else {
            for ch in text.chars() {
                let mut buf = [0u8; 4];
                w.add(alphabet.symbol(ch.encode_utf8(&mut buf))?, 1);
            }
        }
        Ok(w)
    }

    pub fn count(&self, sym: Symbol) -> u32 {
        self.counts.get(sym.index()).copied().unwrap_or(0)
    }

    pub fn contains(&self, sym: Symbol) -> bool {
        self.count(sym) > 0
    }

    pub fn add(&mut self, sym: Symbol, k: u32) {
        if k == 0 {
            return;
        }
        let i = sym.index();
        if self.counts.len() <= i {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += k;
    }

    pub fn set(&mut self, sym: Symbol, k: u32) {
        let i = sym.index();
        if self.counts.len() <= i {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] = k;
        while self.counts.last() == Some(&0) {
            self.counts.pop();
        }
    }

    /// Multiset union.
    pub fn concat(&self, other: &UnorderedWord) -> UnorderedWord {
        let n = self.counts.len().max(other.counts.len());
        let counts = (0..n)
            .map(|i| self.counts.get(i).copied().unwrap_or(0) + other.counts.get(i).copied().unwrap_or(0))
            .collect();
        UnorderedWord::from_counts(counts)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Symbols with a non-zero count, in id order.
    pub fn support(&self) -> impl Iterator<Item = (Symbol, u32)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (Symbol::from_index(i), c))
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        WordDisplay { word: self, alphabet }
    }
}

struct WordDisplay<'a> {
    word: &'a UnorderedWord,
    alphabet: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("ε");
        }
        let compact = self.alphabet.names().iter().all(|n| n.chars().count() == 1);
        let mut first = true;
        for (sym, k) in self.word.support() {
            for _ in 0..k {
                if !compact && !first {
                    f.write_str(" ")?;
                }
                f.write_str(self.alphabet.name(sym))?;
                first = false;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone)]
struct TreeNode {
    label: Symbol,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
}

/// A node-labeled unordered tree stored as an arena; the root is node 0.
///
/// Equality is isomorphism: sibling order and node ids are ignored.
#[derive(Debug, Clone)]
pub struct UnorderedTree {
    nodes: Vec<TreeNode>,
}

impl UnorderedTree {
    pub fn leaf(label: Symbol) -> UnorderedTree {
        UnorderedTree { nodes: vec![TreeNode { label, parent: None, children: Vec::new() }] }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn add_child(&mut self, parent: NodeId, label: Symbol) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(TreeNode { label, parent: Some(parent), children: Vec::new() });
        self.nodes[parent.0].children.push(id);
        id
    }

    /// Copies `other` below `parent`, returning the id of the copied root.
    pub fn graft(&mut self, parent: NodeId, other: &UnorderedTree) -> NodeId {
        self.graft_from(parent, other, other.root())
    }

    pub fn graft_from(&mut self, parent: NodeId, other: &UnorderedTree, from: NodeId) -> NodeId {
        let top = self.add_child(parent, other.label(from));
        let mut stack = vec![(from, top)];
        while let Some((src, dst)) = stack.pop() {
            for &c in other.children(src) {
                let copy = self.add_child(dst, other.label(c));
                stack.push((c, copy));
            }
        }
        top
    }

    /// Subtree of `self` rooted at `node`, as a standalone tree.
    pub fn subtree(&self, node: NodeId) -> UnorderedTree {
        let mut t = UnorderedTree::leaf(self.label(node));
        let mut stack = vec![(node, t.root())];
        while let Some((src, dst)) = stack.pop() {
            for &c in self.children(src) {
                let copy = t.add_child(dst, self.label(c));
                stack.push((c, copy));
            }
        }
        t
    }

    pub fn label(&self, n: NodeId) -> Symbol {
        self.nodes[n.0].label
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.nodes[n.0].parent
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        &self.nodes[n.0].children
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn contains_node(&self, n: NodeId) -> bool {
        n.0 < self.nodes.len()
    }

    /// Unordered word of the labels of the children of `n`.
    pub fn children_word(&self, n: NodeId) -> Result<UnorderedWord> {
        if !self.contains_node(n) {
            return Err(Error::UnknownNode(n.0));
        }
        Ok(UnorderedWord::from_symbols(self.children(n).iter().map(|&c| self.label(c))))
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root(), 0usize)];
        while let Some((n, d)) = stack.pop() {
            best = best.max(d);
            for &c in self.children(n) {
                stack.push((c, d + 1));
            }
        }
        best
    }

    /// Nodes in pre-order (parents before children).
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root()];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children(n).iter().rev());
        }
        out
    }

    /// Proper descendants of `n`.
    pub fn descendants(&self, n: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.children(n).to_vec();
        while let Some(m) = stack.pop() {
            out.push(m);
            stack.extend_from_slice(self.children(m));
        }
        out
    }

    /// Depth-first serialization in stored sibling order.
    pub fn events(&self) -> Vec<TreeEvent> {
        self.events_with(|_, kids| kids.to_vec())
    }

    /// Depth-first serialization where `order` chooses the sibling order
    /// at every node.
    pub fn events_with<F>(&self, mut order: F) -> Vec<TreeEvent>
    where
        F: FnMut(NodeId, &[NodeId]) -> Vec<NodeId>,
    {
        enum Step {
            Enter(NodeId),
            Leave(Symbol),
        }
        let mut out = Vec::with_capacity(2 * self.len());
        let mut stack = vec![Step::Enter(self.root())];
        while let Some(step) = stack.pop() {
            match step {
                Step::Enter(n) => {
                    let label = self.label(n);
                    out.push(TreeEvent::Open(label));
                    stack.push(Step::Leave(label));
                    let kids = order(n, self.children(n));
                    for &c in kids.iter().rev() {
                        stack.push(Step::Enter(c));
                    }
                }
                Step::Leave(label) => out.push(TreeEvent::Close(label)),
            }
        }
        out
    }

    /// Canonical encoding: children encodings sorted. Two trees are
    /// isomorphic iff their encodings are equal.
    pub fn canonical(&self) -> String {
        self.canonical_at(self.root())
    }

    pub fn canonical_at(&self, n: NodeId) -> String {
        let mut codes: Vec<String> = vec![String::new(); self.len()];
        let order = self.preorder();
        for &m in order.iter().rev() {
            let mut kids: Vec<&String> = self.children(m).iter().map(|c| &codes[c.0]).collect();
            kids.sort();
            let mut code = self.label(m).id().to_string();
            if !kids.is_empty() {
                code.push('(');
                for (i, k) in kids.iter().enumerate() {
                    if i > 0 {
                        code.push(',');
                    }
                    code.push_str(k);
                }
                code.push(')');
            }
            codes[m.0] = code;
        }
        std::mem::take(&mut codes[n.0])
    }

    /// Parses a term such as `r(a(b), b(a), c(b(a)))`.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<UnorderedTree> {
        let mut p = TermParser { src: text.as_bytes(), pos: 0, alphabet };
        p.skip_ws();
        let label = p.name()?;
        let mut tree = UnorderedTree::leaf(label);
        let root = tree.root();
        p.children(&mut tree, root)?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Syntax { pos: p.pos, msg: "trailing input".into() });
        }
        Ok(tree)
    }

    /// Term notation with children sorted canonically, e.g. `r(a(b), b(a))`.
    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        TreeDisplay { tree: self, alphabet }
    }

    fn term(&self, n: NodeId, alphabet: &Alphabet) -> String {
        let mut kids: Vec<String> = self.children(n).iter().map(|&c| self.term(c, alphabet)).collect();
        kids.sort();
        let name = alphabet.name(self.label(n));
        if kids.is_empty() {
            name.to_string()
        } else {
            format!("{}({})", name, kids.join(", "))
        }
    }
}

impl PartialEq for UnorderedTree {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.canonical() == other.canonical()
    }
}

impl Eq for UnorderedTree {}

struct TreeDisplay<'a> {
    tree: &'a UnorderedTree,
    alphabet: &'a Alphabet,
}

impl fmt::Display for TreeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tree.term(self.tree.root(), self.alphabet))
    }
}

struct TermParser<'a> {
    src: &'a [u8],
    pos: usize,
    alphabet: &'a Alphabet,
}

impl TermParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn name(&mut self) -> Result<Symbol> {
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'-' || c == b'.' || c >= 0x80 {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(Error::Syntax { pos: start, msg: "expected a label".into() });
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        self.alphabet.symbol(name)
    }

    fn children(&mut self, tree: &mut UnorderedTree, parent: NodeId) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) != Some(&b'(') {
            return Ok(());
        }
        self.pos += 1;
        loop {
            self.skip_ws();
            let label = self.name()?;
            let node = tree.add_child(parent, label);
            self.children(tree, node)?;
            self.skip_ws();
            match self.src.get(self.pos) {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(());
                }
                _ => return Err(Error::Syntax { pos: self.pos, msg: "expected `,` or `)`".into() }),
            }
        }
    }
}

/// One step of a depth-first serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeEvent {
    Open(Symbol),
    Close(Symbol),
}

impl TreeEvent {
    pub fn label(self) -> Symbol {
        match self {
            TreeEvent::Open(s) | TreeEvent::Close(s) => s,
        }
    }
}

/// Rebuilds the tree from a balanced event stream.
pub fn events_to_tree<I>(events: I) -> Result<UnorderedTree>
where
    I: IntoIterator<Item = TreeEvent>,
{
    let mut tree: Option<UnorderedTree> = None;
    let mut stack: Vec<NodeId> = Vec::new();
    let mut done = false;
    let mut pos = 0;
    for (i, ev) in events.into_iter().enumerate() {
        pos = i;
        if done {
            return Err(Error::MalformedStream { pos: i, msg: "event after the root was closed".into() });
        }
        match ev {
            TreeEvent::Open(label) => match (&mut tree, stack.last()) {
                (None, _) => {
                    tree = Some(UnorderedTree::leaf(label));
                    stack.push(NodeId(0));
                }
                (Some(t), Some(&parent)) => {
                    let n = t.add_child(parent, label);
                    stack.push(n);
                }
                (Some(_), None) => unreachable!(),
            },
            TreeEvent::Close(label) => {
                let Some(top) = stack.pop() else {
                    return Err(Error::MalformedStream { pos: i, msg: "close without open".into() });
                };
                let t = tree.as_ref().expect("open precedes close");
                if t.label(top) != label {
                    return Err(Error::MalformedStream {
                        pos: i,
                        msg: "close label does not match the open element".into(),
                    });
                }
                if stack.is_empty() {
                    done = true;
                }
            }
        }
    }
    match tree {
        None => Err(Error::MalformedStream { pos: 0, msg: "empty stream".into() }),
        Some(_) if !done => Err(Error::MalformedStream { pos: pos + 1, msg: "unclosed elements".into() }),
        Some(t) => Ok(t),
    }
}
