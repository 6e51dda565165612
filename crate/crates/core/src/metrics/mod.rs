//! Evaluation: labelled bracketing F1, discontinuous F1, tagging scores, and
//! derivation analyses (incrementality, gap statistics).
//!
//! Bracket scoring follows the usual discontinuous-parsing convention:
//! unary chains are expanded, punctuation tokens (by gold POS) are removed
//! from every yield and the remaining tokens renumbered, constituents left
//! empty are dropped, root-labelled constituents are ignored, and the
//! remaining `(label, yield)` pairs are compared as multisets.

mod analysis;
mod tagging;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::token_set::TokenSet;
use crate::treebank::{expand_unaries, Sentence, Tree};

pub use analysis::{gap_stats, incrementality_stats, GapStats};
pub use tagging::{tagging_metrics, AttributeScore, TaggingReport};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("corpus sizes differ: {gold} gold vs {pred} predicted sentences")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("sentence {index}: {gold} gold vs {pred} predicted tokens")]
    TokenMismatch { index: usize, gold: usize, pred: usize },
    #[error("empty input")]
    Empty,
    #[error("parameter file line {line}: {message}")]
    Param { line: usize, message: String },
}

/// Which tokens and labels evaluation ignores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalParams {
    pub punct_pos: BTreeSet<String>,
    pub root_labels: BTreeSet<String>,
}

const DEFAULT_PUNCT: &[&str] = &[
    // Penn Treebank
    ",", ".", ":", "``", "''", "-LRB-", "-RRB-", "#", "-NONE-",
    // STTS
    "$,", "$.", "$(", "$[",
];
const DEFAULT_ROOTS: &[&str] = &["VROOT", "ROOT", "TOP"];

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            punct_pos: DEFAULT_PUNCT.iter().map(|s| s.to_string()).collect(),
            root_labels: DEFAULT_ROOTS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl EvalParams {
    /// Reads `punct_pos=...` and `root_labels=...` lines (whitespace-separated
    /// values, `#` comments). A key that is present replaces its default.
    pub fn parse(text: &str) -> Result<Self, MetricsError> {
        let mut p = EvalParams::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| MetricsError::Param { line: i + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
            let values = value.split_whitespace().map(str::to_string).collect();
            match key.trim() {
                "punct_pos" => p.punct_pos = values,
                "root_labels" => p.root_labels = values,
                other => return Err(err(format!("unknown key {:?}", other))),
            }
        }
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(" ");
        format!("punct_pos={}\nroot_labels={}\n", join(&self.punct_pos), join(&self.root_labels))
    }
}

/// Precision, recall and F1 in percent, with the underlying counts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub matched: usize,
    pub gold: usize,
    pub pred: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(matched: usize, gold: usize, pred: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { 100.0 * a as f64 / b as f64 };
        let (precision, recall) = (ratio(matched, pred), ratio(matched, gold));
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            matched,
            gold,
            pred,
            precision,
            recall,
            f1,
        }
    }
}

type Brackets = BTreeMap<(String, TokenSet), usize>;

/// Scored brackets of `tree`; punctuation is read from `gold_sentence`.
fn brackets(tree: &Tree, gold_sentence: &Sentence, params: &EvalParams, discontinuous_only: bool) -> Brackets {
    let mut renumber = vec![None; gold_sentence.len() + 1];
    let mut next = 0;
    for (k, tok) in gold_sentence.tokens.iter().enumerate() {
        if !params.punct_pos.contains(&tok.pos) {
            next += 1;
            renumber[k + 1] = Some(next);
        }
    }
    let mut out = Brackets::new();
    for c in expand_unaries(tree).constituents {
        if params.root_labels.contains(&c.label) {
            continue;
        }
        let span: TokenSet = c.tokens.iter().filter_map(|i| renumber.get(i).copied().flatten()).collect();
        if span.is_empty() || (discontinuous_only && span.is_contiguous()) {
            continue;
        }
        *out.entry((c.label, span)).or_default() += 1;
    }
    out
}

fn score(gold: &[Tree], pred: &[Tree], params: &EvalParams, discontinuous_only: bool) -> Result<Prf, MetricsError> {
    check_aligned(gold, pred)?;
    let (mut matched, mut g_total, mut p_total) = (0, 0, 0);
    for (g, p) in gold.iter().zip(pred) {
        let gb = brackets(g, &g.sentence, params, discontinuous_only);
        let pb = brackets(p, &g.sentence, params, discontinuous_only);
        g_total += gb.values().sum::<usize>();
        p_total += pb.values().sum::<usize>();
        matched += gb.iter().map(|(k, &n)| n.min(pb.get(k).copied().unwrap_or(0))).sum::<usize>();
    }
    Ok(Prf::from_counts(matched, g_total, p_total))
}

fn check_aligned(gold: &[Tree], pred: &[Tree]) -> Result<(), MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    for (index, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(MetricsError::TokenMismatch {
                index,
                gold: g.len(),
                pred: p.len(),
            });
        }
    }
    Ok(())
}

/// Micro-averaged labelled bracketing scores.
pub fn labelled_f1(gold: &[Tree], pred: &[Tree], params: &EvalParams) -> Result<Prf, MetricsError> {
    score(gold, pred, params, false)
}

/// Labelled bracketing scores restricted to constituents whose filtered
/// yield is discontinuous (decided on each side independently). With no
/// discontinuous constituents on either side every figure is 0.
pub fn disc_f1(gold: &[Tree], pred: &[Tree], params: &EvalParams) -> Result<Prf, MetricsError> {
    score(gold, pred, params, true)
}

/// Everything `eval` reports.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub labelled: Prf,
    pub discontinuous: Prf,
    pub tagging: TaggingReport,
}

pub fn evaluate(gold: &[Tree], pred: &[Tree], params: &EvalParams) -> Result<Evaluation, MetricsError> {
    let gs: Vec<Sentence> = gold.iter().map(|t| t.sentence.clone()).collect();
    let ps: Vec<Sentence> = pred.iter().map(|t| t.sentence.clone()).collect();
    Ok(Evaluation {
        labelled: labelled_f1(gold, pred, params)?,
        discontinuous: disc_f1(gold, pred, params)?,
        tagging: tagging_metrics(&gs, &ps)?,
    })
}

impl Evaluation {
    /// Aligned, human-readable table.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<14}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}", "", "P", "R", "F", "match", "gold", "pred");
        for (name, p) in [("labelled", &self.labelled), ("discontinuous", &self.discontinuous)] {
            let _ = writeln!(
                s,
                "{:<14}{:>8.2}{:>8.2}{:>8.2}{:>8}{:>8}{:>8}",
                name, p.precision, p.recall, p.f1, p.matched, p.gold, p.pred
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<14}{:>8}{:>8}{:>8}", "attribute", "acc", "F", "cov");
        for a in &self.tagging.attributes {
            if a.coverage == 0.0 {
                let _ = writeln!(s, "{:<14}{:>8.2}{:>8}{:>8.2}", a.name, a.accuracy, "-", a.coverage);
            } else {
                let _ = writeln!(s, "{:<14}{:>8.2}{:>8.2}{:>8.2}", a.name, a.accuracy, a.f1, a.coverage);
            }
        }
        let _ = writeln!(s, "{:<14}{:>8.2}", "complete", self.tagging.complete_match);
        s
    }

    /// One `metric<TAB>value` row per figure.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("metric\tvalue\n");
        for (name, p) in [("labelled", &self.labelled), ("disc", &self.discontinuous)] {
            let _ = writeln!(s, "{}_precision\t{:.4}", name, p.precision);
            let _ = writeln!(s, "{}_recall\t{:.4}", name, p.recall);
            let _ = writeln!(s, "{}_f1\t{:.4}", name, p.f1);
        }
        for a in &self.tagging.attributes {
            let _ = writeln!(s, "{}_accuracy\t{:.4}", a.name, a.accuracy);
            let _ = writeln!(s, "{}_f1\t{:.4}", a.name, a.f1);
            let _ = writeln!(s, "{}_coverage\t{:.4}", a.name, a.coverage);
        }
        let _ = writeln!(s, "complete_match\t{:.4}", self.tagging.complete_match);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::{parse_discbracket, Constituent};
    use proptest::prelude::*;

    fn tree(s: &str) -> Tree {
        parse_discbracket(s).unwrap().remove(0)
    }

    fn flat(n: usize, spans: &[(&str, &[usize])]) -> Tree {
        let pairs: Vec<(String, String)> = (1..=n).map(|i| (format!("w{}", i), "N".to_string())).collect();
        let sentence = Sentence::from_tagged(pairs.iter().map(|(w, p)| (w.as_str(), p.as_str())));
        let cs = spans
            .iter()
            .map(|(l, ix)| Constituent::new(*l, ix.iter().copied().collect()))
            .collect();
        Tree::new(sentence, cs)
    }

    #[test]
    fn half_right() {
        let g = flat(3, &[("S", &[1, 2, 3]), ("NP", &[1, 2])]);
        let p = flat(3, &[("S", &[1, 2, 3]), ("NP", &[2, 3])]);
        let r = labelled_f1(&[g], &[p], &EvalParams::default()).unwrap();
        assert_eq!((r.matched, r.gold, r.pred), (1, 2, 2));
        assert_eq!((r.precision, r.recall, r.f1), (50.0, 50.0, 50.0));
    }

    #[test]
    fn roots_and_punctuation_are_ignored() {
        let g = tree("(VROOT (S (NP (ART 0=Der) (NN 1=Hund)) (VVFIN 2=bellt)) ($. 3=.))");
        let p = tree("(VROOT (S (NP (ART 0=Der) (NN 1=Hund)) (VVFIN 2=bellt) ($. 3=.)))");
        let r = labelled_f1(&[g], &[p], &EvalParams::default()).unwrap();
        assert_eq!((r.matched, r.gold, r.pred, r.f1), (2, 2, 2, 100.0));
    }

    #[test]
    fn punctuation_gap_is_not_a_discontinuity() {
        let mut g = flat(4, &[("S", &[1, 2, 3, 4]), ("NP", &[1, 2, 4])]);
        g.sentence.tokens[2].pos = "$,".into();
        let d = disc_f1(&[g.clone()], &[g.clone()], &EvalParams::default()).unwrap();
        assert_eq!((d.gold, d.pred, d.f1), (0, 0, 0.0));
        g.sentence.tokens[2].pos = "N".into();
        let d = disc_f1(&[g.clone()], &[g], &EvalParams::default()).unwrap();
        assert_eq!((d.gold, d.f1), (1, 100.0));
    }

    #[test]
    fn one_sided_discontinuity() {
        let g = flat(5, &[("S", &[1, 2, 3, 4, 5]), ("VP", &[1, 2, 4]), ("NP", &[4, 5])]);
        let p = flat(5, &[("S", &[1, 2, 3, 4, 5]), ("VP", &[1, 2, 4]), ("VP", &[1, 3])]);
        let d = disc_f1(&[g.clone()], &[p.clone()], &EvalParams::default()).unwrap();
        assert_eq!((d.matched, d.gold, d.pred), (1, 1, 2));
        assert_eq!((d.precision, d.recall), (50.0, 100.0));
        let l = labelled_f1(&[g], &[p], &EvalParams::default()).unwrap();
        assert_eq!((l.matched, l.gold, l.pred), (2, 3, 3));
    }

    #[test]
    fn unary_chains_count_each_label() {
        let g = flat(2, &[("S", &[1, 2]), ("VP", &[1, 2])]);
        let p = flat(2, &[("S+VP", &[1, 2])]);
        let r = labelled_f1(&[g], &[p], &EvalParams::default()).unwrap();
        assert_eq!(r.f1, 100.0);
    }

    #[test]
    fn misaligned_corpora_are_rejected() {
        let g = flat(2, &[("S", &[1, 2])]);
        let p = flat(3, &[("S", &[1, 2, 3])]);
        assert!(matches!(labelled_f1(&[g.clone()], &[], &EvalParams::default()), Err(MetricsError::LengthMismatch { .. })));
        assert!(matches!(labelled_f1(&[g], &[p], &EvalParams::default()), Err(MetricsError::TokenMismatch { index: 0, .. })));
    }

    #[test]
    fn parameter_file() {
        let p = EvalParams::parse("# comment\npunct_pos=$. $,\n").unwrap();
        assert_eq!(p.punct_pos.len(), 2);
        assert_eq!(p.root_labels, EvalParams::default().root_labels);
        assert_eq!(EvalParams::parse(&p.to_text()).unwrap(), p);
        assert!(matches!(EvalParams::parse("colour=red"), Err(MetricsError::Param { line: 1, .. })));
    }

    fn arb_tree() -> impl Strategy<Value = Tree> {
        (2usize..9).prop_flat_map(arb_tree_of)
    }

    fn arb_tree_of(n: usize) -> impl Strategy<Value = Tree> {
        {
            let span = proptest::collection::btree_set(1..=n, 1..=n);
            let label = prop_oneof![Just("NP"), Just("VP"), Just("PP")];
            proptest::collection::vec((label, span), 0..6).prop_map(move |cs| {
                let mut spans: Vec<(&str, Vec<usize>)> = cs.into_iter().map(|(l, s)| (l, s.into_iter().collect())).collect();
                spans.push(("S", (1..=n).collect()));
                let refs: Vec<(&str, &[usize])> = spans.iter().map(|(l, s)| (*l, s.as_slice())).collect();
                flat(n, &refs)
            })
        }
    }

    proptest! {
        #[test]
        fn self_evaluation_is_perfect(t in arb_tree()) {
            let r = labelled_f1(&[t.clone()], &[t], &EvalParams::default()).unwrap();
            prop_assert_eq!(r.f1, 100.0);
        }

        #[test]
        fn precision_and_recall_are_symmetric((g, p) in (2usize..9).prop_flat_map(|n| (arb_tree_of(n), arb_tree_of(n)))) {
            let params = EvalParams::default();
            let a = labelled_f1(&[g.clone()], &[p.clone()], &params).unwrap();
            let b = labelled_f1(&[p.clone()], &[g.clone()], &params).unwrap();
            prop_assert_eq!(a.precision, b.recall);
            prop_assert_eq!(a.recall, b.precision);
            let d = disc_f1(&[g], &[p], &params).unwrap();
            prop_assert!(d.gold <= a.gold && d.pred <= a.pred && d.matched <= a.matched);
        }
    }
}
