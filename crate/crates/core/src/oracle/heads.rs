//! Head percolation tables.
//!
//! Table text format, one rule per line, rules for a label tried in order:
//!
//! ```text
//! # comment
//! VP  left      TO VBD VBN MD VBZ VB VBG VBP VP
//! NP  rightdis  NN NNP NNPS NNS NX POS JJR
//! *   left
//! ```
//!
//! `left`/`right` try each category in priority order and scan the children
//! from that side; `leftdis`/`rightdis` scan the children once and stop at
//! the first one matching any category. An empty category list picks the
//! first child from that side. `*` rules apply to labels without an entry;
//! when nothing matches the leftmost child is the head.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::treebank::{Child, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
    LeftDis,
    RightDis,
}

impl FromStr for Direction {
    type Err = HeadRuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(Direction::Left),
            "right" => Ok(Direction::Right),
            "leftdis" => Ok(Direction::LeftDis),
            "rightdis" => Ok(Direction::RightDis),
            _ => Err(HeadRuleError(format!("unknown direction {:?}", s))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Left => "left",
            Direction::Right => "right",
            Direction::LeftDis => "leftdis",
            Direction::RightDis => "rightdis",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadRule {
    pub direction: Direction,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("head rules: {0}")]
pub struct HeadRuleError(pub String);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeadRuleTable {
    pub rules: BTreeMap<String, Vec<HeadRule>>,
}

const DEFAULT_KEY: &str = "*";

const PTB_RULES: &str = "\
ADJP left NNS QP NN $ ADVP JJ VBN VBG ADJP JJR NP JJS DT FW RBR RBS SBAR RB
ADVP right RB RBR RBS FW ADVP TO CD JJR JJ IN NP JJS NN
CONJP right CC RB IN
FRAG right
INTJ left
LST right LS :
NAC left NN NNS NNP NNPS NP NAC EX $ CD QP PRP VBG JJ JJS JJR ADJP FW
NP rightdis NN NNP NNPS NNS NX POS JJR
NP left NP
NP rightdis $ ADJP PRN
NP right CD
NP rightdis JJ JJS RB QP
NX rightdis NN NNP NNPS NNS NX POS JJR
NX left NP NX
PP right IN TO VBG VBN RP FW
PRN left
PRT right RP
QP left $ IN NNS NN JJ RB DT CD NCD QP JJR JJS
RRC right VP NP ADVP ADJP PP
S left TO IN VP S SBAR ADJP UCP NP
SBAR left WHNP WHPP WHADVP WHADJP IN DT S SQ SINV SBAR FRAG
SBARQ left SQ S SINV SBARQ FRAG
SINV left VBZ VBD VBP VB MD VP S SINV ADJP NP
SQ left VBZ VBD VBP VB MD VP SQ
UCP right
VP left TO VBD VBN MD VBZ VB VBG VBP VP ADJP NN NNS NP
WHADJP left CC WRB JJ ADJP
WHADVP right CC WRB
WHNP left WDT WP WP$ WHADJP WHPP WHNP
WHPP right IN TO FW
X right
ROOT left S SQ SINV SBARQ FRAG
TOP left S SQ SINV SBARQ FRAG
VROOT left S SQ SINV SBARQ FRAG
";

const NEGRA_RULES: &str = "\
AA right ADJD ADJA
AP right ADJD ADJA CAP AA ADV
AVP right ADV AVP ADJD PROAV PP
CAC left KON
CAP right ADJD ADJA CAP AP
CAVP right ADV AVP
CCP right KOUS
CNP right NN NE MPN NP CNP PN CARD
CPP right APPR PP CPP
CS right S CS
CVP right VP CVP
CVZ right VZ
MPN right NE FM CARD
MTA right ADJA ADJD NN
NM right CARD NN
NP right NN NE MPN NP CNP PN CARD NM PPER PIS PDS PRELS PWS
PN right NE NNE NN
PP left KOKOM APPR PROAV APPRART APPO APZR
S left VVFIN VAFIN VMFIN VVIMP VAIMP
S right VP CVP
VP right VVINF VVIZU VVPP VAINF VAPP VMINF VMPP VZ VP CVP
VZ right VVINF VAINF VMINF
VROOT left S CS VP CVP NP PP
";

impl HeadRuleTable {
    /// Collins-style rules for Penn Treebank labels.
    pub fn ptb() -> Self {
        HeadRuleTable::parse(PTB_RULES).expect("built-in table")
    }

    /// Rules for the Negra/Tiger label set.
    pub fn negra() -> Self {
        HeadRuleTable::parse(NEGRA_RULES).expect("built-in table")
    }

    /// Only the leftmost-child fallback.
    pub fn leftmost() -> Self {
        HeadRuleTable::default()
    }

    pub fn parse(text: &str) -> Result<Self, HeadRuleError> {
        let mut table = HeadRuleTable::default();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let label = fields.next().expect("nonempty line");
            let direction = fields
                .next()
                .ok_or_else(|| HeadRuleError(format!("line {}: missing direction", k + 1)))?
                .parse()
                .map_err(|e: HeadRuleError| HeadRuleError(format!("line {}: {}", k + 1, e.0)))?;
            table.rules.entry(label.to_string()).or_default().push(HeadRule {
                direction,
                categories: fields.map(str::to_string).collect(),
            });
        }
        Ok(table)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (label, rules) in &self.rules {
            for r in rules {
                out.push_str(&format!("{} {}", label, r.direction));
                for c in &r.categories {
                    out.push(' ');
                    out.push_str(c);
                }
                out.push('\n');
            }
        }
        out
    }

    /// Position of the head among `children` (labels in surface order).
    pub fn find_head(&self, label: &str, children: &[&str]) -> usize {
        if children.len() <= 1 {
            return 0;
        }
        let rules = self
            .rules
            .get(label)
            .or_else(|| self.rules.get(base_label(label)))
            .or_else(|| self.rules.get(DEFAULT_KEY));
        let matches = |child: &str, cat: &str| child == cat || base_label(child) == cat;
        for rule in rules.into_iter().flatten() {
            let order: Vec<usize> = match rule.direction {
                Direction::Left | Direction::LeftDis => (0..children.len()).collect(),
                Direction::Right | Direction::RightDis => (0..children.len()).rev().collect(),
            };
            if rule.categories.is_empty() {
                return order[0];
            }
            let found = match rule.direction {
                Direction::Left | Direction::Right => rule
                    .categories
                    .iter()
                    .find_map(|cat| order.iter().copied().find(|&i| matches(children[i], cat))),
                Direction::LeftDis | Direction::RightDis => order
                    .iter()
                    .copied()
                    .find(|&i| rule.categories.iter().any(|cat| matches(children[i], cat))),
            };
            if let Some(i) = found {
                return i;
            }
        }
        0
    }
}

/// Label without function tags (`NP-SBJ=2` → `NP`); labels starting with a
/// dash such as `-NONE-` are kept whole.
pub fn base_label(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    match label.char_indices().skip(1).find(|(_, c)| *c == '-' || *c == '=') {
        Some((i, _)) => &label[..i],
        None => label,
    }
}

/// Fills in missing constituent heads bottom-up. Existing heads (from corpus
/// head marks) are kept. A unary chain member takes the head of the member
/// below it.
pub fn assign_heads(tree: &Tree, table: &HeadRuleTable) -> Tree {
    let mut out = tree.clone();
    let children = tree.children();
    for j in (0..out.constituents.len()).rev() {
        if out.constituents[j].head.is_some() {
            continue;
        }
        let kids = &children[j];
        let labels: Vec<&str> = kids
            .iter()
            .map(|c| match *c {
                Child::Constituent(k) => out.constituents[k].label.as_str(),
                Child::Token(t) => out.sentence.token(t).pos.as_str(),
            })
            .collect();
        let head = match kids.get(table.find_head(&out.constituents[j].label, &labels)) {
            Some(Child::Constituent(k)) => out.constituents[*k].head,
            Some(Child::Token(t)) => Some(*t),
            None => None,
        };
        out.constituents[j].head = head;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::tests::dislocation_tree;
    use crate::treebank::{parse_discbracket, validate_tree};

    #[test]
    fn verb_heads_a_clause() {
        let t = parse_discbracket("(S (NP (PRP 0=he)) (VP (VBZ 1=sleeps)))").unwrap().remove(0);
        let h = assign_heads(&t, &HeadRuleTable::ptb());
        assert_eq!(h.root().unwrap().head, Some(2));
        assert!(h.constituents.iter().all(|c| c.head.is_some()));
    }

    #[test]
    fn percolation_through_the_dislocation_tree() {
        let h = assign_heads(&dislocation_tree(), &HeadRuleTable::ptb());
        let head = |label: &str, first: usize| {
            h.constituents
                .iter()
                .find(|c| c.label == label && c.tokens.first() == Some(first))
                .unwrap()
                .head
        };
        // NP: rightmost noun; VP: the verb; S: the VP child, hence the verb.
        assert_eq!(head("NP", 1), Some(4));
        assert_eq!(head("NP", 5), Some(5));
        assert_eq!(head("VP", 1), Some(6));
        assert_eq!(head("S", 1), Some(6));
        assert_eq!(validate_tree(&h), Ok(()));
    }

    #[test]
    fn fallback_is_leftmost() {
        let t = parse_discbracket("(FOO (A 0=a) (B 1=b) (C 2=c))").unwrap().remove(0);
        assert_eq!(assign_heads(&t, &HeadRuleTable::leftmost()).root().unwrap().head, Some(1));
        assert_eq!(assign_heads(&t, &HeadRuleTable::ptb()).root().unwrap().head, Some(1));
    }

    #[test]
    fn corpus_heads_are_kept() {
        let mut t = dislocation_tree();
        let vp = t.constituents.iter_mut().find(|c| c.label == "VP").unwrap();
        vp.head = Some(2);
        let h = assign_heads(&t, &HeadRuleTable::ptb());
        assert_eq!(h.constituents.iter().find(|c| c.label == "VP").unwrap().head, Some(2));
        assert_eq!(h.root().unwrap().head, Some(2));
    }

    #[test]
    fn category_major_versus_child_major() {
        let t = HeadRuleTable::parse("X left B A\nY leftdis B A\n").unwrap();
        assert_eq!(t.find_head("X", &["A", "B"]), 1);
        assert_eq!(t.find_head("Y", &["A", "B"]), 0);
        assert_eq!(t.find_head("X-SBJ", &["C", "B-TMP"]), 1);
    }

    #[test]
    fn table_text_round_trip() {
        for t in [HeadRuleTable::ptb(), HeadRuleTable::negra()] {
            assert_eq!(HeadRuleTable::parse(&t.to_text()).unwrap(), t);
        }
        assert!(HeadRuleTable::parse("NP sideways NN").is_err());
        assert!(HeadRuleTable::parse("NP").is_err());
    }

    #[test]
    fn base_labels() {
        assert_eq!(base_label("NP-SBJ-1"), "NP");
        assert_eq!(base_label("-NONE-"), "-NONE-");
        assert_eq!(base_label("S=2"), "S");
    }
}
