//! Unary chains (constituents sharing one yield) are collapsed into a single
//! constituent labelled `Top+...+Bottom`. Literal `+` and `\` inside labels
//! are backslash-escaped so that expansion is exact.

use super::{Constituent, Tree};

pub fn join_chain_label<S: AsRef<str>>(labels: &[S]) -> String {
    labels
        .iter()
        .map(|l| l.as_ref().replace('\\', "\\\\").replace('+', "\\+"))
        .collect::<Vec<_>>()
        .join("+")
}

pub fn split_chain_label(label: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut chars = label.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                if let Some(next) = chars.next() {
                    out.last_mut().unwrap().push(next);
                }
            }
            '+' => out.push(String::new()),
            c => out.last_mut().unwrap().push(c),
        }
    }
    out
}

pub fn collapse_unaries(tree: &Tree) -> Tree {
    let mut out: Vec<Constituent> = Vec::with_capacity(tree.constituents.len());
    let mut chain: Vec<&str> = Vec::new();
    let cs = &tree.constituents;
    for (j, c) in cs.iter().enumerate() {
        chain.push(&c.label);
        let chain_ends = cs.get(j + 1).is_none_or(|next| next.tokens != c.tokens);
        if chain_ends {
            let first = j + 1 - chain.len();
            let head = cs[first..=j].iter().find_map(|c| c.head);
            out.push(Constituent {
                label: join_chain_label(&chain),
                tokens: c.tokens.clone(),
                head,
            });
            chain.clear();
        }
    }
    Tree::new(tree.sentence.clone(), out)
}

pub fn expand_unaries(tree: &Tree) -> Tree {
    let mut out = Vec::with_capacity(tree.constituents.len());
    for c in &tree.constituents {
        for label in split_chain_label(&c.label) {
            out.push(Constituent {
                label,
                tokens: c.tokens.clone(),
                head: c.head,
            });
        }
    }
    Tree::new(tree.sentence.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token_set::TokenSet;
    use crate::treebank::tests::dislocation_tree;
    use crate::treebank::{Sentence, VIRTUAL_ROOT};

    fn chain_tree() -> Tree {
        Tree::new(
            Sentence::from_tagged([("he", "PRP"), ("sleeps", "VBZ")]),
            vec![
                Constituent::new("S", TokenSet::range(1, 2)),
                Constituent::new("VP", TokenSet::range(1, 2)),
                Constituent::new("NP", TokenSet::singleton(1)),
            ],
        )
    }

    #[test]
    fn chain_is_collapsed_top_down() {
        let c = collapse_unaries(&chain_tree());
        assert_eq!(c.constituents[0].label, "S+VP");
        assert_eq!(c.constituents[0].tokens, TokenSet::range(1, 2));
        assert_eq!(c.constituents.len(), 2);
        assert_eq!(expand_unaries(&c), chain_tree());
    }

    #[test]
    fn tree_without_chains_is_unchanged() {
        let t = dislocation_tree();
        assert_eq!(collapse_unaries(&t), t);
    }

    #[test]
    fn plus_in_labels_is_escaped() {
        let mut t = chain_tree();
        t.constituents[1].label = "V+P".into();
        let c = collapse_unaries(&t);
        assert_eq!(c.constituents[0].label, "S+V\\+P");
        assert_eq!(split_chain_label(&c.constituents[0].label), vec!["S", "V+P"]);
        assert_eq!(expand_unaries(&c), t);
    }

    #[test]
    fn virtual_root_over_full_chain() {
        let mut t = chain_tree();
        t.constituents.insert(0, Constituent::new(VIRTUAL_ROOT, TokenSet::range(1, 2)));
        let c = collapse_unaries(&t);
        assert_eq!(c.constituents[0].label, "VROOT+S+VP");
        assert_eq!(expand_unaries(&c), t);
    }
}
