//! Feature templates: which token states describe a configuration.
//!
//! Items are described only by their boundaries (`min`/`max` token index),
//! plus lexical heads for the lexicalized template set. Positions are
//! 1-based token indexes; `None` selects the trained NONE vector.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::transition::{Configuration, StackItem, SystemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateSet {
    Base,
    PlusLex,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("unknown template set {0:?}")]
    Unknown(String),
    #[error("lexical templates need a lexicalized system, not {0}")]
    NeedsLexicalized(SystemKind),
    #[error("position {position} outside a sentence of {len} tokens")]
    OutOfRange { position: usize, len: usize },
}

impl TemplateSet {
    pub fn len(self) -> usize {
        match self {
            TemplateSet::Base => 7,
            TemplateSet::PlusLex => 11,
        }
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn name(self) -> &'static str {
        match self {
            TemplateSet::Base => "base",
            TemplateSet::PlusLex => "lex",
        }
    }

    pub fn descriptors(self) -> &'static [&'static str] {
        const ALL: [&str; 11] = [
            "max(s1)", "min(s0)", "max(s0)", "max(d1)", "min(d0)", "max(d0)", "i", "h(d0)", "h(d1)", "h(s0)", "h(s1)",
        ];
        &ALL[..self.len()]
    }

    pub fn check(self, system: SystemKind) -> Result<(), FeatureError> {
        if self == TemplateSet::PlusLex && !system.is_lexicalized() {
            return Err(FeatureError::NeedsLexicalized(system));
        }
        Ok(())
    }
}

impl fmt::Display for TemplateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TemplateSet {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(TemplateSet::Base),
            "lex" | "+lex" | "plus_lex" => Ok(TemplateSet::PlusLex),
            _ => Err(FeatureError::Unknown(s.to_string())),
        }
    }
}

/// Resolves every template of `set` against `config`.
pub fn extract_positions(config: &Configuration, set: TemplateSet) -> Vec<Option<usize>> {
    let min = |x: Option<&StackItem>| x.and_then(|x| x.tokens.first());
    let max = |x: Option<&StackItem>| x.and_then(|x| x.tokens.last());
    let head = |x: Option<&StackItem>| x.and_then(|x| x.head);
    let (s0, s1, d0, d1) = (config.s(0), config.s(1), config.d(0), config.d(1));
    let i = (config.last_shifted > 0).then_some(config.last_shifted);
    let mut out = vec![max(s1), min(s0), max(s0), max(d1), min(d0), max(d0), i];
    if set == TemplateSet::PlusLex {
        out.extend([head(d0), head(d1), head(s0), head(s1)]);
    }
    out
}

/// Concatenates the state of each position (or `none` for empty ones).
/// `states[k]` is the state of token `k + 1`.
pub fn assemble_input<T: Copy>(positions: &[Option<usize>], states: &[Vec<T>], none: &[T]) -> Result<Vec<T>, FeatureError> {
    let mut out = Vec::with_capacity(positions.len() * none.len());
    for p in positions {
        match p {
            None => out.extend_from_slice(none),
            Some(p) => {
                let s = p
                    .checked_sub(1)
                    .and_then(|k| states.get(k))
                    .ok_or(FeatureError::OutOfRange {
                        position: *p,
                        len: states.len(),
                    })?;
                out.extend_from_slice(s);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{assign_heads, derive, HeadRuleTable, OracleKind};
    use crate::transition::{Action, LabelInventory, TransitionSystem};
    use crate::treebank::parse_discbracket;

    fn dislocation() -> crate::treebank::Tree {
        parse_discbracket(
            "(S (VP (NP (DT 0=An) (JJ 1=excellent) (NN 2=environment) (NN 3=actor)) (VBZ 5=is)) (NP (PRP 4=he)))",
        )
        .unwrap()
        .remove(0)
    }

    #[test]
    fn initial_configuration_is_all_none() {
        let sys = TransitionSystem::new(SystemKind::MlGap, LabelInventory::permissive());
        let c = sys.initial(3).unwrap();
        assert_eq!(extract_positions(&c, TemplateSet::Base), vec![None; 7]);
    }

    #[test]
    fn configuration_before_the_gap() {
        let t = dislocation();
        let d = derive(SystemKind::MlGap, OracleKind::Eager, &t).unwrap();
        let sys = TransitionSystem::new(SystemKind::MlGap, LabelInventory::permissive());
        let trace = sys.trace(6, &d).unwrap();
        let gap = d.iter().position(|a| *a == Action::Gap).unwrap();
        assert_eq!(
            extract_positions(&trace[gap], TemplateSet::Base),
            vec![Some(4), Some(5), Some(5), None, Some(6), Some(6), Some(6)]
        );
    }

    #[test]
    fn lexical_positions_follow_heads() {
        let t = assign_heads(&dislocation(), &HeadRuleTable::ptb());
        let d = derive(SystemKind::MlGapLex, OracleKind::HeadDriven, &t).unwrap();
        let sys = TransitionSystem::new(SystemKind::MlGapLex, LabelInventory::permissive());
        let trace = sys.trace(6, &d).unwrap();
        let gap = d.iter().position(|a| *a == Action::Gap).unwrap();
        let p = extract_positions(&trace[gap], TemplateSet::PlusLex);
        assert_eq!(p.len(), 11);
        assert_eq!(&p[..7], &[Some(4), Some(5), Some(5), None, Some(6), Some(6), Some(6)]);
        assert_eq!(&p[7..], &[Some(6), None, Some(5), Some(4)]);
    }

    #[test]
    fn lexical_templates_need_lexicalized_systems() {
        assert!(TemplateSet::PlusLex.check(SystemKind::MlGap).is_err());
        assert!(TemplateSet::PlusLex.check(SystemKind::SrGapLex).is_ok());
        assert!(TemplateSet::Base.check(SystemKind::MlGap).is_ok());
    }

    #[test]
    fn assembling_blocks() {
        let states = vec![vec![1, 1], vec![2, 2], vec![3, 3]];
        let none = [0, 0];
        assert_eq!(assemble_input(&[None, None], &states, &none).unwrap(), vec![0; 4]);
        assert_eq!(assemble_input(&[Some(3), None, Some(1)], &states, &none).unwrap(), vec![3, 3, 0, 0, 1, 1]);
        assert_eq!(assemble_input(&[Some(1), Some(3)], &states, &none).unwrap(), vec![1, 1, 3, 3]);
        assert!(assemble_input(&[Some(4)], &states, &none).is_err());
        assert!(assemble_input(&[Some(0)], &states, &none).is_err());
    }
}
