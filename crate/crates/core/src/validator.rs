//! Single-pass, earliest validation of open/close event streams.
//!
//! Each rule is compiled into three per-symbol tables (cardinality, conflict
//! group, required group). The validator keeps one frame per open element
//! holding saturating child counts and the group bookkeeping, so memory is
//! proportional to depth times alphabet size.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Multiplicity, Symbol, TreeEvent};
use crate::schema::Schema;

/// The compiled form of a schema.
#[derive(Debug, Clone)]
pub struct RuleEncoding {
    n: usize,
    root: Symbol,
    // Row-major `n × n` tables: entry `a * n + b` describes child `b` of `a`.
    cardinality: Vec<Multiplicity>,
    conflict: Vec<u32>,
    required: Vec<u32>,
    conflict_groups: Vec<u32>,
    required_groups: Vec<u32>,
    universal: bool,
    satisfiable: bool,
}

impl RuleEncoding {
    pub fn new(s: &Schema) -> RuleEncoding {
        let n = s.alphabet().len();
        let mut enc = RuleEncoding {
            n,
            root: s.root(),
            cardinality: vec![Multiplicity::Zero; n * n],
            conflict: vec![0; n * n],
            required: vec![0; n * n],
            conflict_groups: vec![0; n],
            required_groups: vec![0; n],
            universal: s.is_universal(),
            satisfiable: s.is_satisfiable(),
        };
        for a in s.alphabet().symbols() {
            let row = a.index() * n;
            let triple = s.rule(a).triple();
            for b in s.alphabet().symbols() {
                enc.cardinality[row + b.index()] = triple.n(b);
            }
            for (g, group) in triple.conflicts.iter().enumerate() {
                for b in group {
                    enc.conflict[row + b.index()] = g as u32 + 1;
                }
            }
            for (g, group) in triple.required.iter().enumerate() {
                for b in group {
                    enc.required[row + b.index()] = g as u32 + 1;
                }
            }
            enc.conflict_groups[a.index()] = triple.conflicts.len() as u32;
            enc.required_groups[a.index()] = triple.required.len() as u32;
        }
        enc
    }

    pub fn cardinality(&self, a: Symbol, b: Symbol) -> Multiplicity {
        self.cardinality[a.index() * self.n + b.index()]
    }

    /// Conflict group of child `b` under `a`; 0 when unconstrained.
    pub fn conflict(&self, a: Symbol, b: Symbol) -> u32 {
        self.conflict[a.index() * self.n + b.index()]
    }

    /// Required group of child `b` under `a`; 0 when in none.
    pub fn required(&self, a: Symbol, b: Symbol) -> u32 {
        self.required[a.index() * self.n + b.index()]
    }

    pub fn conflict_group_count(&self, a: Symbol) -> u32 {
        self.conflict_groups[a.index()]
    }

    pub fn required_group_count(&self, a: Symbol) -> u32 {
        self.required_groups[a.index()]
    }

    pub fn is_universal(&self) -> bool {
        self.universal
    }

    pub fn is_satisfiable(&self) -> bool {
        self.satisfiable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    RootLabel,
    Cardinality,
    ZeroCardinality,
    Conflict,
    Required,
    Unsatisfiable,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reason::RootLabel => "root-label",
            Reason::Cardinality => "cardinality",
            Reason::ZeroCardinality => "zero-cardinality",
            Reason::Conflict => "conflict",
            Reason::Required => "required",
            Reason::Unsatisfiable => "unsatisfiable",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Running,
    /// Accepted after consuming the event at `position`.
    Accepted {
        position: usize,
    },
    /// Rejected at the event at `position`, because of the rule of `label`.
    Rejected {
        position: usize,
        label: Option<Symbol>,
        reason: Reason,
    },
}

impl Verdict {
    pub fn is_accepted(self) -> bool {
        matches!(self, Verdict::Accepted { .. })
    }

    pub fn is_rejected(self) -> bool {
        matches!(self, Verdict::Rejected { .. })
    }
}

#[derive(Debug, Clone)]
struct Frame {
    label: Symbol,
    mcount: Vec<u8>,
    pconflict: Vec<u32>,
    prequired: Vec<bool>,
}

/// Validation state for one stream.
#[derive(Debug, Clone)]
pub struct Validator<'e> {
    enc: &'e RuleEncoding,
    stack: Vec<Frame>,
    // Popped frames are kept for reuse so steady-state validation does not
    // allocate.
    spare: Vec<Frame>,
    verdict: Verdict,
    position: usize,
    peak: usize,
    ops: u64,
}

impl<'e> Validator<'e> {
    pub fn new(enc: &'e RuleEncoding) -> Validator<'e> {
        let verdict = if enc.satisfiable {
            Verdict::Running
        } else {
            Verdict::Rejected { position: 0, label: None, reason: Reason::Unsatisfiable }
        };
        Validator { enc, stack: Vec::new(), spare: Vec::new(), verdict, position: 0, peak: 0, ops: 0 }
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    /// Number of events consumed so far.
    pub fn position(&self) -> usize {
        self.position
    }

    /// Highest stack height reached.
    pub fn peak_depth(&self) -> usize {
        self.peak
    }

    /// Elementary table operations performed so far.
    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// Frames ever allocated (live plus pooled).
    pub fn frames_allocated(&self) -> usize {
        self.stack.len() + self.spare.len()
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    pub fn feed(&mut self, ev: TreeEvent) -> Result<Verdict> {
        if self.verdict != Verdict::Running {
            return Err(Error::MalformedStream { pos: self.position, msg: "event after the verdict".into() });
        }
        let pos = self.position;
        self.position += 1;
        match ev {
            TreeEvent::Open(a) => self.open(a, pos),
            TreeEvent::Close(a) => self.close(a, pos)?,
        }
        Ok(self.verdict)
    }

    fn reject(&mut self, position: usize, label: Symbol, reason: Reason) {
        self.verdict = Verdict::Rejected { position, label: Some(label), reason };
    }

    fn push(&mut self, label: Symbol) {
        let n = self.enc.n;
        let cg = self.enc.conflict_groups[label.index()] as usize;
        let rg = self.enc.required_groups[label.index()] as usize;
        let mut frame = self.spare.pop().unwrap_or_else(|| Frame {
            label,
            mcount: Vec::with_capacity(n),
            pconflict: Vec::new(),
            prequired: Vec::new(),
        });
        frame.label = label;
        frame.mcount.clear();
        frame.mcount.resize(n, 0);
        frame.pconflict.clear();
        frame.pconflict.resize(cg + 1, 0);
        frame.prequired.clear();
        frame.prequired.resize(rg + 1, false);
        self.ops += (n + cg + rg) as u64;
        self.stack.push(frame);
        self.peak = self.peak.max(self.stack.len());
    }

    fn open(&mut self, b: Symbol, pos: usize) {
        if b.index() >= self.enc.n {
            let label = self.stack.last().map_or(b, |f| f.label);
            self.reject(pos, label, Reason::ZeroCardinality);
            return;
        }
        let Some(parent) = self.stack.last_mut() else {
            if b != self.enc.root {
                self.reject(pos, b, Reason::RootLabel);
                return;
            }
            if self.enc.universal {
                self.verdict = Verdict::Accepted { position: pos };
                return;
            }
            self.push(b);
            return;
        };
        let a = parent.label;
        let idx = a.index() * self.enc.n + b.index();
        self.ops += 1;
        let count = &mut parent.mcount[b.index()];
        *count = (*count + 1).min(2);
        let card = self.enc.cardinality[idx];
        if *count == 2 && !card.is_unbounded() {
            self.reject(pos, a, Reason::Cardinality);
            return;
        }
        if *count == 1 && card == Multiplicity::Zero {
            self.reject(pos, a, Reason::ZeroCardinality);
            return;
        }
        let g = self.enc.conflict[idx] as usize;
        if g != 0 {
            let seen = parent.pconflict[g];
            if seen != 0 && seen != b.id() {
                self.reject(pos, a, Reason::Conflict);
                return;
            }
            parent.pconflict[g] = b.id();
        }
        let h = self.enc.required[idx] as usize;
        if h != 0 {
            parent.prequired[h] = true;
        }
        self.push(b);
    }

    fn close(&mut self, b: Symbol, pos: usize) -> Result<()> {
        let Some(top) = self.stack.last() else {
            return Err(Error::MalformedStream { pos, msg: "close without open".into() });
        };
        if top.label != b {
            return Err(Error::MalformedStream { pos, msg: "close label does not match the open element".into() });
        }
        self.ops += top.prequired.len() as u64;
        if top.prequired.iter().skip(1).any(|&met| !met) {
            self.reject(pos, b, Reason::Required);
            return Ok(());
        }
        let frame = self.stack.pop().expect("non-empty");
        self.spare.push(frame);
        if self.stack.is_empty() {
            self.verdict = Verdict::Accepted { position: pos };
        }
        Ok(())
    }

    /// Call once the input is exhausted.
    pub fn finish(&self) -> Result<Verdict> {
        match self.verdict {
            Verdict::Running if self.position == 0 => {
                Err(Error::MalformedStream { pos: 0, msg: "empty stream".into() })
            }
            Verdict::Running => Err(Error::MalformedStream { pos: self.position, msg: "unclosed elements".into() }),
            v => Ok(v),
        }
    }
}

/// Validates a whole stream, stopping at the first verdict.
pub fn validate_stream<I>(events: I, enc: &RuleEncoding) -> Result<Verdict>
where
    I: IntoIterator<Item = TreeEvent>,
{
    let mut v = Validator::new(enc);
    if v.verdict() != Verdict::Running {
        return Ok(v.verdict());
    }
    for ev in events {
        if v.feed(ev)? != Verdict::Running {
            return Ok(v.verdict());
        }
    }
    v.finish()
}
