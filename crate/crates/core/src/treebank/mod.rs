//! Discontinuous constituency trees: data types, validation, corpus formats
//! and unary-chain normalization.

mod conll;
mod discbracket;
mod export;
mod unary;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::token_set::TokenSet;

pub use conll::{attach_deplabels, read_conll_deplabels};
pub use discbracket::{parse_discbracket, write_discbracket};
pub use export::{parse_export, parse_export_with, write_export, write_export_with, ExportFormat};
pub use unary::{collapse_unaries, expand_unaries, join_chain_label, split_chain_label};

/// Morphological attributes predicted by the tagger, in canonical order.
pub const MORPH_ATTRIBUTES: [&str; 7] = ["case", "degree", "gender", "mood", "number", "person", "tense"];

/// Value of an attribute that does not apply to a token.
pub const UNDEF: &str = "undef";

/// Label of the synthetic root added above multi-rooted sentences.
pub const VIRTUAL_ROOT: &str = "VROOT";

#[derive(Debug, Error)]
pub enum TreebankError {
    #[error("export sentence {sentence}, line {line}: {message}")]
    Export {
        sentence: String,
        line: usize,
        message: String,
    },
    #[error("discbracket line {line}: {message}")]
    Bracket { line: usize, message: String },
    #[error("conll: {0}")]
    Conll(String),
    #[error("invalid tree: {0}")]
    Invalid(#[from] Violation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub pos: String,
    /// Always holds every key of [`MORPH_ATTRIBUTES`]; extra keys are kept.
    pub morph: BTreeMap<String, String>,
    pub deplabel: String,
}

impl Token {
    pub fn new(index: usize, form: impl Into<String>, pos: impl Into<String>) -> Self {
        Token {
            index,
            form: form.into(),
            pos: pos.into(),
            morph: default_morph(),
            deplabel: UNDEF.to_string(),
        }
    }

    pub fn morph_value(&self, attribute: &str) -> &str {
        self.morph.get(attribute).map(String::as_str).unwrap_or(UNDEF)
    }
}

pub(crate) fn default_morph() -> BTreeMap<String, String> {
    MORPH_ATTRIBUTES.iter().map(|a| (a.to_string(), UNDEF.to_string())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    /// Builds a sentence from `(form, pos)` pairs, numbering tokens from 1.
    pub fn from_tagged<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Sentence {
            tokens: pairs
                .into_iter()
                .enumerate()
                .map(|(k, (form, pos))| Token::new(k + 1, form, pos))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token with 1-based index `index`.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    pub fn forms(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.form.as_str())
    }
}

/// A labelled, possibly discontinuous constituent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constituent {
    pub label: String,
    pub tokens: TokenSet,
    pub head: Option<usize>,
}

impl Constituent {
    pub fn new(label: impl Into<String>, tokens: TokenSet) -> Self {
        Constituent {
            label: label.into(),
            tokens,
            head: None,
        }
    }

    pub fn with_head(mut self, head: usize) -> Self {
        self.head = Some(head);
        self
    }

    pub fn is_discontinuous(&self) -> bool {
        !self.tokens.is_contiguous()
    }
}

impl fmt::Display for Constituent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}", self.label, self.tokens)?;
        if let Some(h) = self.head {
            write!(f, ", head={}", h)?;
        }
        write!(f, ")")
    }
}

/// A node's child: either a nested constituent (by position in
/// [`Tree::constituents`]) or a bare token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Child {
    Constituent(usize),
    Token(usize),
}

/// A sentence with its constituents.
///
/// Constituents are kept in canonical order: larger yields first, equal-size
/// yields lexicographically, and the members of a unary chain (identical
/// yields) top-down. Two trees are equal iff sentences and ordered
/// constituent lists are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub sentence: Sentence,
    pub constituents: Vec<Constituent>,
}

impl Tree {
    /// `constituents` must list unary-chain members top-down; any other
    /// ordering is normalized.
    pub fn new(sentence: Sentence, mut constituents: Vec<Constituent>) -> Self {
        canonical_sort(&mut constituents);
        Tree {
            sentence,
            constituents,
        }
    }

    pub fn len(&self) -> usize {
        self.sentence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentence.is_empty()
    }

    pub fn full_span(&self) -> TokenSet {
        TokenSet::range(1, self.len())
    }

    /// The topmost constituent (first in canonical order).
    pub fn root(&self) -> Option<&Constituent> {
        self.constituents.first()
    }

    /// Adds a virtual root unless a constituent already spans the sentence.
    pub fn ensure_root(&mut self) {
        let full = self.full_span();
        if !self.constituents.iter().any(|c| c.tokens == full) && !self.is_empty() {
            self.constituents.insert(0, Constituent::new(VIRTUAL_ROOT, full));
        }
    }

    pub fn without_heads(&self) -> Tree {
        let mut t = self.clone();
        for c in &mut t.constituents {
            c.head = None;
        }
        t
    }

    pub fn has_discontinuity(&self) -> bool {
        self.constituents.iter().any(Constituent::is_discontinuous)
    }

    /// Parent position of every constituent (the smallest strict superset,
    /// or the member directly above in a unary chain).
    pub fn parents(&self) -> Vec<Option<usize>> {
        (0..self.constituents.len())
            .map(|j| {
                let cj = &self.constituents[j].tokens;
                (0..j).rev().find(|&i| cj.is_subset(&self.constituents[i].tokens))
            })
            .collect()
    }

    /// For each token (0-based slot for index 1..=n), the lowest constituent
    /// containing it.
    pub fn token_parents(&self) -> Vec<Option<usize>> {
        (1..=self.len())
            .map(|t| (0..self.constituents.len()).rev().find(|&i| self.constituents[i].tokens.contains(t)))
            .collect()
    }

    /// Children of every constituent, ordered by their smallest token index.
    pub fn children(&self) -> Vec<Vec<Child>> {
        let mut out = vec![Vec::new(); self.constituents.len()];
        for (j, p) in self.parents().into_iter().enumerate() {
            if let Some(p) = p {
                out[p].push(Child::Constituent(j));
            }
        }
        for (k, p) in self.token_parents().into_iter().enumerate() {
            if let Some(p) = p {
                out[p].push(Child::Token(k + 1));
            }
        }
        for kids in &mut out {
            kids.sort_by_key(|c| self.child_min(*c));
        }
        out
    }

    pub(crate) fn child_min(&self, child: Child) -> usize {
        match child {
            Child::Constituent(j) => self.constituents[j].tokens.first().unwrap_or(0),
            Child::Token(t) => t,
        }
    }

    pub(crate) fn child_tokens(&self, child: Child) -> TokenSet {
        match child {
            Child::Constituent(j) => self.constituents[j].tokens.clone(),
            Child::Token(t) => TokenSet::singleton(t),
        }
    }
}

pub(crate) fn canonical_sort(constituents: &mut [Constituent]) {
    // Stable, so chain members keep their top-down order.
    constituents.sort_by(|a, b| b.tokens.len().cmp(&a.tokens.len()).then_with(|| a.tokens.cmp(&b.tokens)));
}

/// The first broken tree invariant found by [`validate_tree`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}{}", .constituent.as_ref().map(|c| format!(" at {}", c)).unwrap_or_default())]
pub struct Violation {
    pub kind: ViolationKind,
    pub constituent: Option<Constituent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViolationKind {
    #[error("empty sentence")]
    EmptySentence,
    #[error("token indexes are not 1..n (token {0})")]
    TokenIndex(usize),
    #[error("token {0} lacks morphological attribute {1}")]
    MissingMorph(usize, String),
    #[error("empty yield")]
    EmptyYield,
    #[error("yield outside 1..n")]
    YieldOutOfRange,
    #[error("head not in yield")]
    HeadOutsideYield,
    #[error("duplicate constituent")]
    Duplicate,
    #[error("crossing yields with {0}")]
    Crossing(String),
    #[error("no constituent spans the whole sentence")]
    NoRoot,
}

/// Checks every tree invariant and reports the first violation.
pub fn validate_tree(tree: &Tree) -> Result<(), Violation> {
    let fail = |kind, c: Option<&Constituent>| Err(Violation { kind, constituent: c.cloned() });
    let n = tree.len();
    if n == 0 {
        return fail(ViolationKind::EmptySentence, None);
    }
    for (k, tok) in tree.sentence.tokens.iter().enumerate() {
        if tok.index != k + 1 {
            return fail(ViolationKind::TokenIndex(tok.index), None);
        }
        if let Some(a) = MORPH_ATTRIBUTES.iter().find(|a| !tok.morph.contains_key(**a)) {
            return fail(ViolationKind::MissingMorph(tok.index, a.to_string()), None);
        }
    }
    let mut seen = HashSet::new();
    for c in &tree.constituents {
        if c.tokens.is_empty() {
            return fail(ViolationKind::EmptyYield, Some(c));
        }
        if c.tokens.first() < Some(1) || c.tokens.last() > Some(n) {
            return fail(ViolationKind::YieldOutOfRange, Some(c));
        }
        if let Some(h) = c.head {
            if !c.tokens.contains(h) {
                return fail(ViolationKind::HeadOutsideYield, Some(c));
            }
        }
        if !seen.insert((&c.label, &c.tokens)) {
            return fail(ViolationKind::Duplicate, Some(c));
        }
    }
    for (i, a) in tree.constituents.iter().enumerate() {
        for b in &tree.constituents[i + 1..] {
            if !a.tokens.is_disjoint(&b.tokens) && !a.tokens.is_subset(&b.tokens) && !b.tokens.is_subset(&a.tokens) {
                return fail(ViolationKind::Crossing(b.to_string()), Some(a));
            }
        }
    }
    let full = tree.full_span();
    if !tree.constituents.iter().any(|c| c.tokens == full) {
        return fail(ViolationKind::NoRoot, None);
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// The left-dislocation tree used throughout the tests:
    /// (S (VP (NP An excellent environment actor) is) (NP he)).
    pub fn dislocation_tree() -> Tree {
        parse_discbracket(
            "(S (VP (NP (DT 0=An) (JJ 1=excellent) (NN 2=environment) (NN 3=actor)) (VBZ 5=is)) (NP (PRP 4=he)))",
        )
        .unwrap()
        .remove(0)
    }

    #[test]
    fn dislocation_tree_is_valid() {
        let t = dislocation_tree();
        assert_eq!(validate_tree(&t), Ok(()));
        let vp = t.constituents.iter().find(|c| c.label == "VP").unwrap();
        assert_eq!(vp.tokens.to_vec(), vec![1, 2, 3, 4, 6]);
        assert!(vp.is_discontinuous());
    }

    #[test]
    fn crossing_yields_are_rejected() {
        let s = Sentence::from_tagged([("a", "X"), ("b", "X"), ("c", "X")]);
        let t = Tree::new(
            s,
            vec![
                Constituent::new("S", TokenSet::range(1, 3)),
                Constituent::new("A", TokenSet::range(1, 2)),
                Constituent::new("B", TokenSet::range(2, 3)),
            ],
        );
        let v = validate_tree(&t).unwrap_err();
        assert!(matches!(v.kind, ViolationKind::Crossing(_)));
    }

    #[test]
    fn head_outside_yield_is_rejected() {
        let s = Sentence::from_tagged([("a", "X"), ("b", "X")]);
        let t = Tree::new(
            s,
            vec![
                Constituent::new("S", TokenSet::range(1, 2)),
                Constituent::new("A", TokenSet::singleton(1)).with_head(2),
            ],
        );
        assert_eq!(validate_tree(&t).unwrap_err().kind, ViolationKind::HeadOutsideYield);
    }

    #[test]
    fn missing_root_and_duplicates() {
        let s = Sentence::from_tagged([("a", "X"), ("b", "X")]);
        let t = Tree::new(s.clone(), vec![Constituent::new("A", TokenSet::singleton(1))]);
        assert_eq!(validate_tree(&t).unwrap_err().kind, ViolationKind::NoRoot);
        let t = Tree::new(
            s,
            vec![
                Constituent::new("S", TokenSet::range(1, 2)),
                Constituent::new("S", TokenSet::range(1, 2)),
            ],
        );
        assert_eq!(validate_tree(&t).unwrap_err().kind, ViolationKind::Duplicate);
    }

    #[test]
    fn children_are_ordered_by_left_boundary() {
        let t = dislocation_tree();
        let kids = t.children();
        let s = &kids[0];
        assert_eq!(t.constituents[0].label, "S");
        assert_eq!(s.len(), 2);
        assert!(matches!(s[0], Child::Constituent(j) if t.constituents[j].label == "VP"));
        assert!(matches!(s[1], Child::Constituent(j) if t.constituents[j].label == "NP"));
    }
}
