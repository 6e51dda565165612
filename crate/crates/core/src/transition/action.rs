use std::fmt;
use std::str::FromStr;

use super::TransitionError;

/// One parser action. The merge/label actions belong to the ML family, the
/// reduce actions to the SR family; `Shift` and `Gap` are shared.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Shift,
    Gap,
    Merge,
    MergeLeft,
    MergeRight,
    Label(String),
    NoLabel,
    Reduce(String),
    ReduceLeft(String),
    ReduceRight(String),
    ReduceUnary(String),
}

impl Action {
    pub fn is_structural(&self) -> bool {
        !matches!(self, Action::Label(_) | Action::NoLabel | Action::ReduceUnary(_))
    }

    pub fn is_merge(&self) -> bool {
        matches!(self, Action::Merge | Action::MergeLeft | Action::MergeRight)
    }

    pub fn is_binary_reduce(&self) -> bool {
        matches!(self, Action::Reduce(_) | Action::ReduceLeft(_) | Action::ReduceRight(_))
    }

    /// The nonterminal carried by a labelling or reducing action.
    pub fn label(&self) -> Option<&str> {
        match self {
            Action::Label(x) | Action::Reduce(x) | Action::ReduceLeft(x) | Action::ReduceRight(x) | Action::ReduceUnary(x) => {
                Some(x)
            }
            _ => None,
        }
    }

    pub fn with_label(&self, label: String) -> Action {
        match self {
            Action::Label(_) => Action::Label(label),
            Action::Reduce(_) => Action::Reduce(label),
            Action::ReduceLeft(_) => Action::ReduceLeft(label),
            Action::ReduceRight(_) => Action::ReduceRight(label),
            Action::ReduceUnary(_) => Action::ReduceUnary(label),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Shift => f.write_str("SHIFT"),
            Action::Gap => f.write_str("GAP"),
            Action::Merge => f.write_str("MERGE"),
            Action::MergeLeft => f.write_str("MERGE_LEFT"),
            Action::MergeRight => f.write_str("MERGE_RIGHT"),
            Action::NoLabel => f.write_str("NO_LABEL"),
            Action::Label(x) => write!(f, "LABEL:{}", x),
            Action::Reduce(x) => write!(f, "REDUCE:{}", x),
            Action::ReduceLeft(x) => write!(f, "REDUCE_LEFT:{}", x),
            Action::ReduceRight(x) => write!(f, "REDUCE_RIGHT:{}", x),
            Action::ReduceUnary(x) => write!(f, "REDUCE_UNARY:{}", x),
        }
    }
}

impl FromStr for Action {
    type Err = TransitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TransitionError::Parse(s.to_string());
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a.to_string())),
            None => (s, None),
        };
        let labelled = |make: fn(String) -> Action| arg.clone().filter(|a| !a.is_empty()).map(make).ok_or_else(bad);
        let bare = |a: Action| if arg.is_none() { Ok(a) } else { Err(bad()) };
        match name {
            "SHIFT" => bare(Action::Shift),
            "GAP" => bare(Action::Gap),
            "MERGE" => bare(Action::Merge),
            "MERGE_LEFT" => bare(Action::MergeLeft),
            "MERGE_RIGHT" => bare(Action::MergeRight),
            "NO_LABEL" => bare(Action::NoLabel),
            "LABEL" => labelled(Action::Label),
            "REDUCE" => labelled(Action::Reduce),
            "REDUCE_LEFT" => labelled(Action::ReduceLeft),
            "REDUCE_RIGHT" => labelled(Action::ReduceRight),
            "REDUCE_UNARY" => labelled(Action::ReduceUnary),
            _ => Err(bad()),
        }
    }
}

/// Derivations as text: one sentence per line, actions separated by tabs.
pub fn write_derivations(derivations: &[Vec<Action>]) -> String {
    let mut out = String::new();
    for d in derivations {
        let line: Vec<String> = d.iter().map(Action::to_string).collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    out
}

pub fn parse_derivations(text: &str) -> Result<Vec<Vec<Action>>, TransitionError> {
    text.lines()
        .map(|line| {
            if line.is_empty() {
                Ok(Vec::new())
            } else {
                line.split('\t').map(str::parse).collect()
            }
        })
        .collect()
}
