//! Static oracles: gold derivations from gold trees.
//!
//! Both oracles run the same procedure on a target tree whose unary chains
//! are collapsed. At each structural step it reduces `s0` and `d0` when they
//! share the lowest target constituent strictly containing them, otherwise
//! gaps toward the shallowest stack item sharing `d0`'s, otherwise shifts.
//!
//! The eager oracle uses the gold tree itself as target, so every n-ary
//! constituent is built left to right as soon as two of its parts are
//! available. The head-driven oracle uses the head-outward binarization, so
//! each constituent grows from its head. Derivations are produced in the
//! shift-reduce form and rewritten for the merge-label systems.

mod binarize;
mod heads;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use binarize::{binarize_head_outward, is_binary, unbinarize};
pub use heads::{assign_heads, base_label, Direction, HeadRule, HeadRuleError, HeadRuleTable};

use crate::token_set::TokenSet;
use crate::transition::{
    is_temporary, temporary_label, Action, Configuration, LabelInventory, Phase, StackItem, SystemKind, TransitionError,
    TransitionSystem,
};
use crate::treebank::{collapse_unaries, validate_tree, Constituent, Tree, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OracleKind {
    Eager,
    HeadDriven,
}

impl OracleKind {
    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Eager => "eager",
            OracleKind::HeadDriven => "head",
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OracleKind {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eager" => Ok(OracleKind::Eager),
            "head" | "head-driven" => Ok(OracleKind::HeadDriven),
            _ => Err(OracleError::UnknownOracle(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("unknown oracle {0:?}")]
    UnknownOracle(String),
    #[error("the {oracle} oracle cannot be used with {system}: it needs an unlexicalized system")]
    Incompatible { system: SystemKind, oracle: OracleKind },
    #[error("invalid tree: {0}")]
    InvalidTree(#[from] Violation),
    #[error("constituent {0} has no head")]
    MissingHead(Constituent),
    #[error("oracle is stuck after {step} actions: {reason}")]
    Stuck { step: usize, reason: String },
    #[error(transparent)]
    Transition(#[from] TransitionError),
}

/// Whether `oracle` can produce derivations for `system`. The eager oracle
/// builds partial constituents before their head is known, so it only
/// suits unlexicalized systems.
pub fn is_compatible(system: SystemKind, oracle: OracleKind) -> bool {
    oracle == OracleKind::HeadDriven || !system.is_lexicalized()
}

/// Gold derivation of `tree` for `system`. The head-driven oracle needs a
/// head on every constituent (see [`assign_heads`]).
pub fn derive(system: SystemKind, oracle: OracleKind, tree: &Tree) -> Result<Vec<Action>, OracleError> {
    if !is_compatible(system, oracle) {
        return Err(OracleError::Incompatible { system, oracle });
    }
    validate_tree(tree)?;
    let sr = match oracle {
        OracleKind::Eager => derive_shift_reduce(&collapse_unaries(tree), false)?,
        OracleKind::HeadDriven => {
            if let Some(c) = tree.constituents.iter().find(|c| c.head.is_none()) {
                return Err(OracleError::MissingHead(c.clone()));
            }
            let sr = derive_shift_reduce(&binarize_head_outward(&collapse_unaries(tree))?, true)?;
            if system.is_lexicalized() {
                sr
            } else {
                erase_directions(&sr)
            }
        }
    };
    Ok(if system.is_merge_label() { shift_reduce_to_merge_label(&sr) } else { sr })
}

/// The eager ML-GAP derivation.
pub fn eager_oracle(tree: &Tree) -> Result<Vec<Action>, OracleError> {
    derive(SystemKind::MlGap, OracleKind::Eager, tree)
}

/// The head-driven derivation for a lexicalized system.
pub fn head_driven_oracle(tree: &Tree, system: SystemKind) -> Result<Vec<Action>, OracleError> {
    derive(system, OracleKind::HeadDriven, tree)
}

/// Rewrites a shift-reduce derivation for the merge-label systems: binary
/// reductions become merges followed by `LABEL(X)` (or `NO_LABEL` for a
/// temporary symbol), unary reductions become labels, and a `NO_LABEL` is
/// inserted after every shift that is not followed by a unary reduction.
pub fn shift_reduce_to_merge_label(derivation: &[Action]) -> Vec<Action> {
    let mut out = Vec::with_capacity(derivation.len() * 2);
    for (k, a) in derivation.iter().enumerate() {
        let label_of = |x: &String| {
            if is_temporary(x) {
                Action::NoLabel
            } else {
                Action::Label(x.clone())
            }
        };
        match a {
            Action::Shift => {
                out.push(Action::Shift);
                if !matches!(derivation.get(k + 1), Some(Action::ReduceUnary(_))) {
                    out.push(Action::NoLabel);
                }
            }
            Action::ReduceUnary(x) => out.push(Action::Label(x.clone())),
            Action::Reduce(x) => out.extend([Action::Merge, label_of(x)]),
            Action::ReduceLeft(x) => out.extend([Action::MergeLeft, label_of(x)]),
            Action::ReduceRight(x) => out.extend([Action::MergeRight, label_of(x)]),
            other => out.push(other.clone()),
        }
    }
    out
}

/// Drops merge directions (and reduction directions).
pub fn erase_directions(derivation: &[Action]) -> Vec<Action> {
    derivation
        .iter()
        .map(|a| match a {
            Action::MergeLeft | Action::MergeRight => Action::Merge,
            Action::ReduceLeft(x) | Action::ReduceRight(x) => Action::Reduce(x.clone()),
            other => other.clone(),
        })
        .collect()
}

/// The tree `execute` is expected to return for `tree` under `system`:
/// heads are only kept by lexicalized systems.
pub fn expected_tree(system: SystemKind, tree: &Tree) -> Tree {
    let mut t = if system.is_lexicalized() {
        tree.clone()
    } else {
        tree.without_heads()
    };
    t.ensure_root();
    t
}

/// Runs the oracle and executes its derivation; true iff the tree comes back.
pub fn round_trip(system: SystemKind, oracle: OracleKind, tree: &Tree) -> Result<bool, OracleError> {
    let derivation = derive(system, oracle, tree)?;
    let ts = TransitionSystem::new(system, LabelInventory::permissive());
    let rebuilt = ts.execute(&tree.sentence, &derivation)?;
    Ok(rebuilt == expected_tree(system, tree))
}

struct Target<'a> {
    nodes: &'a [Constituent],
}

impl Target<'_> {
    fn node(&self, tokens: &TokenSet) -> Option<&Constituent> {
        self.nodes.iter().find(|c| &c.tokens == tokens)
    }

    /// Position of the smallest node strictly containing `tokens`.
    fn parent(&self, tokens: &TokenSet) -> Option<usize> {
        (0..self.nodes.len())
            .rev()
            .find(|&j| self.nodes[j].tokens.len() > tokens.len() && tokens.is_subset(&self.nodes[j].tokens))
    }
}

/// Shift-reduce derivation of a tree with collapsed unaries. Partial
/// constituents (only possible when the target is not binary) get the
/// temporary label of the constituent they belong to.
fn derive_shift_reduce(target: &Tree, lexicalized: bool) -> Result<Vec<Action>, OracleError> {
    let kind = if lexicalized {
        SystemKind::SrGapLex
    } else {
        SystemKind::SrGapUnlex
    };
    let system = TransitionSystem::new(kind, LabelInventory::permissive());
    let target_nodes = Target {
        nodes: &target.constituents,
    };
    let mut config = system.initial(target.len())?;
    let mut out = Vec::new();
    while !config.is_terminal() {
        let action = next_action(&config, &target_nodes, lexicalized).map_err(|reason| OracleError::Stuck {
            step: out.len(),
            reason,
        })?;
        system.apply_in_place(&mut config, &action).map_err(|e| OracleError::Stuck {
            step: out.len(),
            reason: e.to_string(),
        })?;
        out.push(action);
    }
    Ok(out)
}

fn next_action(config: &Configuration, target: &Target, lexicalized: bool) -> Result<Action, String> {
    if config.phase == Phase::Labelling {
        let d0 = config.d(0).expect("a shifted token");
        if let Some(node) = target.node(&d0.tokens) {
            return Ok(Action::ReduceUnary(node.label.clone()));
        }
    }
    if let Some(d0) = config.d(0) {
        if let Some(p) = target.parent(&d0.tokens) {
            if let Some(s0) = config.s(0).filter(|s0| target.parent(&s0.tokens) == Some(p)) {
                return reduction(s0, d0, target, p, lexicalized);
            }
            if (1..config.stack.len()).any(|k| target.parent(&config.s(k).unwrap().tokens) == Some(p)) {
                return Ok(Action::Gap);
            }
        }
    }
    if config.last_shifted < config.sentence_len {
        Ok(Action::Shift)
    } else {
        Err(format!("no sibling for d0 among {} stack items", config.stack.len()))
    }
}

fn reduction(
    s0: &StackItem,
    d0: &StackItem,
    target: &Target,
    parent: usize,
    lexicalized: bool,
) -> Result<Action, String> {
    let merged = s0.tokens.union(&d0.tokens);
    let (label, head) = match target.node(&merged) {
        Some(node) => (node.label.clone(), node.head),
        None => {
            let p = &target.nodes[parent];
            (temporary_label(&p.label), p.head)
        }
    };
    if !lexicalized {
        return Ok(Action::Reduce(label));
    }
    let head = head.ok_or_else(|| format!("no head for {}", merged))?;
    if s0.tokens.contains(head) {
        Ok(Action::ReduceLeft(label))
    } else {
        Ok(Action::ReduceRight(label))
    }
}


#[cfg(test)]
mod corpus_tests {
    use super::tests::all_pairs;
    use super::*;
    use crate::synth;

    #[test]
    fn round_trip_on_generated_corpus() {
        for t in synth::generate(500, 11) {
            for (system, oracle) in all_pairs() {
                assert!(round_trip(system, oracle, &t).unwrap(), "{} {} {:?}", system, oracle, t);
            }
        }
    }
}
