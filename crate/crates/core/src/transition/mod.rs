//! Gap transition systems over a split stack.
//!
//! A configuration holds a stack `S`, a double-ended queue `D`, the index of
//! the last shifted token and the set of constituents built so far. `SHIFT`
//! and merging actions move the whole of `D` onto `S` and leave the new item
//! as the only element of `D`; `GAP` moves the top of `S` to the front of `D`,
//! exposing deeper stack items to the next merge.
//!
//! The ML (merge-label-gap) family separates structure from labelling: every
//! `SHIFT` or merge is followed by exactly one `LABEL(X)` or `NO_LABEL`, and a
//! `GAP` must be followed by another `GAP` or a merge. The SR
//! (shift-reduce-gap) family uses labelled binary reductions instead, plus a
//! unary reduction allowed right after a shift.

mod action;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use action::{parse_derivations, write_derivations, Action};

use crate::token_set::TokenSet;
use crate::treebank::{expand_unaries, Constituent, Sentence, Tree};

/// Suffix marking the intermediate nodes of a binarized constituent.
pub const TEMPORARY_SUFFIX: char = ':';

pub fn is_temporary(label: &str) -> bool {
    label.ends_with(TEMPORARY_SUFFIX)
}

pub fn temporary_label(label: &str) -> String {
    format!("{}{}", label, TEMPORARY_SUFFIX)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransitionError {
    #[error("cannot parse action {0:?}")]
    Parse(String),
    #[error("unknown transition system {0:?}")]
    UnknownSystem(String),
    #[error("empty sentence")]
    EmptySentence,
    #[error("configuration is terminal")]
    Terminal,
    #[error("illegal action {action}: {premise}")]
    Illegal { action: String, premise: String },
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<TransitionError>,
    },
    #[error("derivation stops before a terminal configuration")]
    Incomplete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SystemKind {
    MlGap,
    MlGapLex,
    SrGapLex,
    SrGapUnlex,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [SystemKind::MlGap, SystemKind::MlGapLex, SystemKind::SrGapLex, SystemKind::SrGapUnlex];

    pub fn is_lexicalized(self) -> bool {
        matches!(self, SystemKind::MlGapLex | SystemKind::SrGapLex)
    }

    pub fn is_merge_label(self) -> bool {
        matches!(self, SystemKind::MlGap | SystemKind::MlGapLex)
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::MlGap => "mlgap",
            SystemKind::MlGapLex => "mlgaplex",
            SystemKind::SrGapLex => "srgap",
            SystemKind::SrGapUnlex => "srgapunlex",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = TransitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SystemKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| TransitionError::UnknownSystem(s.to_string()))
    }
}

/// Which family of actions may come next (the states of the action automaton).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Any structural action.
    Structural,
    /// Right after `SHIFT` or a merge. ML: a labelling action must follow.
    /// SR: structural actions, or a unary reduction of the shifted token.
    Labelling,
    /// Right after `GAP`: only `GAP` or a merge/reduction.
    Gap,
}

/// The set of action types the classifier chooses from in a given phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionFamily {
    Structural,
    /// `LABEL-X`, `NO_LABEL`, `REDUCE_UNARY-X`.
    Labelling,
    /// Structural actions and unary reductions (SR systems after `SHIFT`).
    Any,
}

impl ActionFamily {
    pub const ALL: [ActionFamily; 3] = [ActionFamily::Structural, ActionFamily::Labelling, ActionFamily::Any];

    pub fn of(kind: SystemKind, phase: Phase) -> Self {
        match (phase, kind.is_merge_label()) {
            (Phase::Labelling, true) => ActionFamily::Labelling,
            (Phase::Labelling, false) => ActionFamily::Any,
            _ => ActionFamily::Structural,
        }
    }

    pub fn contains(self, action: &Action) -> bool {
        match self {
            ActionFamily::Structural => action.is_structural(),
            ActionFamily::Labelling => !action.is_structural(),
            ActionFamily::Any => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StackItem {
    pub tokens: TokenSet,
    /// Lexical head; present iff the system is lexicalized.
    pub head: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    /// Top is the last element.
    pub stack: Vec<StackItem>,
    /// `d0` is the back; `GAP` pushes to the front.
    pub dequeue: VecDeque<StackItem>,
    /// Index of the last shifted token (0 before the first shift).
    pub last_shifted: usize,
    pub constituents: Vec<Constituent>,
    pub phase: Phase,
    pub sentence_len: usize,
}

impl Configuration {
    pub fn s(&self, k: usize) -> Option<&StackItem> {
        self.stack.len().checked_sub(k + 1).map(|i| &self.stack[i])
    }

    pub fn d(&self, k: usize) -> Option<&StackItem> {
        self.dequeue.len().checked_sub(k + 1).map(|i| &self.dequeue[i])
    }

    /// Number of connected components, `|S| + |D|`.
    pub fn width(&self) -> usize {
        self.stack.len() + self.dequeue.len()
    }

    pub fn is_terminal(&self) -> bool {
        is_terminal(self, self.sentence_len)
    }

    /// True when `d0` is the only item and covers the whole sentence.
    fn d0_is_full(&self) -> bool {
        self.stack.is_empty() && self.dequeue.len() == 1 && self.last_shifted == self.sentence_len
    }

    /// Checks the yield-partition invariant and head consistency.
    pub fn check_invariants(&self, lexicalized: bool) -> Result<(), String> {
        let mut union = TokenSet::new();
        let mut total = 0;
        for item in self.stack.iter().chain(&self.dequeue) {
            if item.tokens.is_empty() {
                return Err("empty item".into());
            }
            if !item.tokens.is_disjoint(&union) {
                return Err(format!("overlapping item {}", item.tokens));
            }
            match item.head {
                Some(h) if !lexicalized || !item.tokens.contains(h) => return Err(format!("bad head {} on {}", h, item.tokens)),
                None if lexicalized => return Err(format!("missing head on {}", item.tokens)),
                _ => {}
            }
            total += item.tokens.len();
            union = union.union(&item.tokens);
        }
        if total != self.last_shifted || (total > 0 && union != TokenSet::range(1, self.last_shifted)) {
            return Err(format!("items cover {} instead of 1..{}", union, self.last_shifted));
        }
        Ok(())
    }
}

/// True iff the whole sentence has been assembled into one labelled item.
pub fn is_terminal(config: &Configuration, n: usize) -> bool {
    config.last_shifted == n
        && config.stack.is_empty()
        && config.dequeue.len() == 1
        && config.phase == Phase::Structural
        && config.dequeue[0].tokens.len() == n
}

/// Labels the systems may emit, split by whether they may label the whole
/// sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelInventory {
    pub root: BTreeSet<String>,
    pub inner: BTreeSet<String>,
    /// Accept any label where it is structurally allowed. Enumeration still
    /// only proposes the listed labels.
    pub permissive: bool,
}

impl LabelInventory {
    pub fn permissive() -> Self {
        LabelInventory {
            permissive: true,
            ..Default::default()
        }
    }

    pub fn new<I, J, S, T>(root: I, inner: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        LabelInventory {
            root: root.into_iter().map(Into::into).collect(),
            inner: inner.into_iter().map(Into::into).collect(),
            permissive: false,
        }
    }

    /// Collects labels from gold derivations: the label given to the full
    /// sentence counts as a root label, every other one as inner.
    pub fn from_derivations<'a>(kind: SystemKind, sentences: impl IntoIterator<Item = (usize, &'a [Action])>) -> Self {
        let system = TransitionSystem::new(kind, LabelInventory::permissive());
        let mut inv = LabelInventory::default();
        for (n, derivation) in sentences {
            let Ok(mut config) = system.initial(n) else { continue };
            for a in derivation {
                if let Some(label) = a.label() {
                    let full = config.d0_is_full() || (a.is_binary_reduce() && config.stack.len() == 1 && config.dequeue.len() == 1 && config.last_shifted == n);
                    if full {
                        inv.root.insert(label.to_string());
                    } else {
                        inv.inner.insert(label.to_string());
                    }
                }
                if system.apply_in_place(&mut config, a).is_err() {
                    break;
                }
            }
        }
        inv
    }

    fn allows(&self, label: &str, full: bool) -> bool {
        if full && is_temporary(label) {
            return false;
        }
        self.permissive || if full { self.root.contains(label) } else { self.inner.contains(label) }
    }

    fn candidates(&self, full: bool, temporaries: bool) -> impl Iterator<Item = &String> {
        let set = if full { &self.root } else { &self.inner };
        set.iter().filter(move |l| (temporaries && !full) || !is_temporary(l))
    }
}

/// A transition system together with its label inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    pub kind: SystemKind,
    pub labels: LabelInventory,
}

impl TransitionSystem {
    pub fn new(kind: SystemKind, labels: LabelInventory) -> Self {
        TransitionSystem { kind, labels }
    }

    pub fn initial(&self, sentence_len: usize) -> Result<Configuration, TransitionError> {
        if sentence_len == 0 {
            return Err(TransitionError::EmptySentence);
        }
        Ok(Configuration {
            stack: Vec::new(),
            dequeue: VecDeque::new(),
            last_shifted: 0,
            constituents: Vec::new(),
            phase: Phase::Structural,
            sentence_len,
        })
    }

    /// Every action allowed in `config`, in a fixed order.
    pub fn legal_actions(&self, config: &Configuration) -> Result<Vec<Action>, TransitionError> {
        if config.is_terminal() {
            return Err(TransitionError::Terminal);
        }
        let mut out = Vec::new();
        let n = config.sentence_len;
        let (s, d) = (config.stack.len(), config.dequeue.len());
        let lex = self.kind.is_lexicalized();

        if self.kind.is_merge_label() {
            match config.phase {
                Phase::Labelling => {
                    let full = config.d0_is_full();
                    if !full {
                        out.push(Action::NoLabel);
                    }
                    out.extend(self.labels.candidates(full, false).map(|l| Action::Label(l.clone())));
                }
                Phase::Structural | Phase::Gap => {
                    let structural = config.phase == Phase::Structural;
                    if structural && config.last_shifted < n {
                        out.push(Action::Shift);
                    }
                    if s >= 1 && d >= 1 {
                        if lex {
                            out.extend([Action::MergeLeft, Action::MergeRight]);
                        } else {
                            out.push(Action::Merge);
                        }
                    }
                    if s >= 2 && d >= 1 {
                        out.push(Action::Gap);
                    }
                }
            }
        } else {
            if config.phase != Phase::Gap && config.last_shifted < n {
                out.push(Action::Shift);
            }
            if s >= 1 && d >= 1 {
                let full = s == 1 && d == 1 && config.last_shifted == n;
                for l in self.labels.candidates(full, true) {
                    if lex {
                        out.push(Action::ReduceLeft(l.clone()));
                        out.push(Action::ReduceRight(l.clone()));
                    } else {
                        out.push(Action::Reduce(l.clone()));
                    }
                }
            }
            if s >= 2 && d >= 1 {
                out.push(Action::Gap);
            }
            if config.phase == Phase::Labelling {
                let full = config.d0_is_full();
                out.extend(self.labels.candidates(full, false).map(|l| Action::ReduceUnary(l.clone())));
            }
        }
        Ok(out)
    }

    /// Checks the premises of `action` in `config`.
    pub fn check(&self, config: &Configuration, action: &Action) -> Result<(), TransitionError> {
        if config.is_terminal() {
            return Err(TransitionError::Terminal);
        }
        let illegal = |premise: &str| {
            Err(TransitionError::Illegal {
                action: action.to_string(),
                premise: premise.to_string(),
            })
        };
        let n = config.sentence_len;
        let (s, d) = (config.stack.len(), config.dequeue.len());
        let ml = self.kind.is_merge_label();
        let lex = self.kind.is_lexicalized();

        let family_ok = match action {
            Action::Shift | Action::Gap => true,
            Action::Merge => ml && !lex,
            Action::MergeLeft | Action::MergeRight => ml && lex,
            Action::Label(_) | Action::NoLabel => ml,
            Action::Reduce(_) => !ml && !lex,
            Action::ReduceLeft(_) | Action::ReduceRight(_) => !ml && lex,
            Action::ReduceUnary(_) => !ml,
        };
        if !family_ok {
            return illegal(&format!("not an action of {}", self.kind));
        }

        match action {
            Action::Label(_) | Action::NoLabel if config.phase != Phase::Labelling => {
                return illegal("labelling actions must follow SHIFT or MERGE")
            }
            a if ml && a.is_structural() && config.phase == Phase::Labelling => {
                return illegal("a labelling action is pending")
            }
            Action::Shift if config.phase == Phase::Gap => return illegal("GAP must be followed by GAP or a merge"),
            Action::ReduceUnary(_) if config.phase != Phase::Labelling => {
                return illegal("unary reduction must directly follow SHIFT")
            }
            _ => {}
        }

        match action {
            Action::Shift => {
                if config.last_shifted >= n {
                    return illegal("buffer is empty");
                }
            }
            Action::Gap => {
                if d < 1 {
                    return illegal("dequeue is empty");
                }
                if s < 2 {
                    return illegal("GAP needs two stack items");
                }
            }
            Action::Merge | Action::MergeLeft | Action::MergeRight => {
                if s < 1 || d < 1 {
                    return illegal("merge needs s0 and d0");
                }
            }
            Action::Reduce(x) | Action::ReduceLeft(x) | Action::ReduceRight(x) => {
                if s < 1 || d < 1 {
                    return illegal("reduction needs s0 and d0");
                }
                let full = s == 1 && d == 1 && config.last_shifted == n;
                if !self.labels.allows(x, full) {
                    return illegal(if full { "not a root label" } else { "unknown label" });
                }
            }
            Action::NoLabel => {
                if config.d0_is_full() {
                    return illegal("the final item must be labelled");
                }
            }
            Action::Label(x) | Action::ReduceUnary(x) => {
                let full = config.d0_is_full();
                if is_temporary(x) {
                    return illegal("temporary labels only come from binary reductions");
                }
                if !self.labels.allows(x, full) {
                    return illegal(if full { "not a root label" } else { "unknown label" });
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, config: &Configuration, action: &Action) -> Result<Configuration, TransitionError> {
        let mut next = config.clone();
        self.apply_in_place(&mut next, action)?;
        Ok(next)
    }

    pub fn apply_in_place(&self, config: &mut Configuration, action: &Action) -> Result<(), TransitionError> {
        self.check(config, action)?;
        let lex = self.kind.is_lexicalized();
        match action {
            Action::Shift => {
                config.stack.extend(config.dequeue.drain(..));
                config.last_shifted += 1;
                let i = config.last_shifted;
                config.dequeue.push_back(StackItem {
                    tokens: TokenSet::singleton(i),
                    head: lex.then_some(i),
                });
                config.phase = Phase::Labelling;
            }
            Action::Gap => {
                let s0 = config.stack.pop().expect("checked");
                config.dequeue.push_front(s0);
                config.phase = Phase::Gap;
            }
            Action::Merge
            | Action::MergeLeft
            | Action::MergeRight
            | Action::Reduce(_)
            | Action::ReduceLeft(_)
            | Action::ReduceRight(_) => {
                let s0 = config.stack.pop().expect("checked");
                let d0 = config.dequeue.pop_back().expect("checked");
                let head = match action {
                    Action::MergeLeft | Action::ReduceLeft(_) => s0.head,
                    Action::MergeRight | Action::ReduceRight(_) => d0.head,
                    _ => None,
                };
                let merged = StackItem {
                    tokens: s0.tokens.union(&d0.tokens),
                    head,
                };
                config.stack.extend(config.dequeue.drain(..));
                if let Some(x) = action.label() {
                    config.constituents.push(Constituent {
                        label: x.to_string(),
                        tokens: merged.tokens.clone(),
                        head: merged.head,
                    });
                }
                config.dequeue.push_back(merged);
                config.phase = if action.is_merge() { Phase::Labelling } else { Phase::Structural };
            }
            Action::Label(x) | Action::ReduceUnary(x) => {
                let d0 = config.dequeue.back().expect("checked");
                config.constituents.push(Constituent {
                    label: x.clone(),
                    tokens: d0.tokens.clone(),
                    head: d0.head,
                });
                config.phase = Phase::Structural;
            }
            Action::NoLabel => config.phase = Phase::Structural,
        }
        Ok(())
    }

    /// All configurations visited by `derivation`, initial and final included.
    pub fn trace(&self, sentence_len: usize, derivation: &[Action]) -> Result<Vec<Configuration>, TransitionError> {
        let mut config = self.initial(sentence_len)?;
        let mut out = Vec::with_capacity(derivation.len() + 1);
        out.push(config.clone());
        for (step, a) in derivation.iter().enumerate() {
            self.apply_in_place(&mut config, a).map_err(|e| TransitionError::AtStep {
                step,
                source: Box::new(e),
            })?;
            out.push(config.clone());
        }
        if !config.is_terminal() {
            return Err(TransitionError::Incomplete);
        }
        Ok(out)
    }

    /// Runs `derivation` and returns the tree it builds, with unary chains
    /// expanded and temporary (binarization) nodes removed.
    pub fn execute(&self, sentence: &Sentence, derivation: &[Action]) -> Result<Tree, TransitionError> {
        let mut config = self.initial(sentence.len())?;
        for (step, a) in derivation.iter().enumerate() {
            self.apply_in_place(&mut config, a).map_err(|e| TransitionError::AtStep {
                step,
                source: Box::new(e),
            })?;
        }
        if !config.is_terminal() {
            return Err(TransitionError::Incomplete);
        }
        Ok(tree_from_constituents(sentence, config.constituents))
    }
}

/// Builds the output tree from the constituents of a terminal configuration.
pub fn tree_from_constituents(sentence: &Sentence, constituents: Vec<Constituent>) -> Tree {
    let kept = constituents.into_iter().filter(|c| !is_temporary(&c.label)).collect();
    let mut tree = expand_unaries(&Tree::new(sentence.clone(), kept));
    tree.ensure_root();
    tree
}
