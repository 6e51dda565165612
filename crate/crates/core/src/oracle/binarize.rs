//! Head-outward binarization. Intermediate nodes get the temporary label
//! `X:` and the head of the constituent they belong to.

use crate::transition::{is_temporary, temporary_label};
use crate::treebank::{Constituent, Tree};

use super::OracleError;

/// Splits every constituent with more than two children. Starting from the
/// head child, left dependents are attached first (nearest first), then
/// right dependents from the nearest outward. The original label stays on
/// the topmost node.
pub fn binarize_head_outward(tree: &Tree) -> Result<Tree, OracleError> {
    let children = tree.children();
    let mut out = Vec::with_capacity(tree.constituents.len() * 2);
    for (j, c) in tree.constituents.iter().enumerate() {
        let kids = &children[j];
        if kids.len() <= 2 {
            out.push(c.clone());
            continue;
        }
        let head = c.head.ok_or_else(|| OracleError::MissingHead(c.clone()))?;
        let spans: Vec<_> = kids.iter().map(|k| tree.child_tokens(*k)).collect();
        let h = spans
            .iter()
            .position(|s| s.contains(head))
            .expect("head lies in the yield of some child");
        let temp = temporary_label(&c.label);
        let mut current = spans[h].clone();
        let order = (0..h).rev().chain(h + 1..kids.len());
        for (step, k) in order.enumerate() {
            current = current.union(&spans[k]);
            let last = step + 2 == kids.len();
            let label = if last { c.label.clone() } else { temp.clone() };
            out.push(Constituent {
                label,
                tokens: current.clone(),
                head: Some(head),
            });
        }
    }
    Ok(Tree::new(tree.sentence.clone(), out))
}

/// Removes every temporary node.
pub fn unbinarize(tree: &Tree) -> Tree {
    let kept = tree.constituents.iter().filter(|c| !is_temporary(&c.label)).cloned().collect();
    Tree::new(tree.sentence.clone(), kept)
}

/// True iff every constituent has at most two children.
pub fn is_binary(tree: &Tree) -> bool {
    tree.children().iter().all(|k| k.len() <= 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::tests::{dislocation_tree, ptb_heads};
    use crate::treebank::{parse_discbracket, validate_tree};
    use crate::TokenSet;

    fn flat(head: usize) -> Tree {
        let mut t = parse_discbracket("(X (A 0=a) (B 1=b) (C 2=c) (D 3=d))").unwrap().remove(0);
        t.constituents[0].head = Some(head);
        t
    }

    fn yields(t: &Tree) -> Vec<(String, Vec<usize>)> {
        t.constituents.iter().map(|c| (c.label.clone(), c.tokens.to_vec())).collect()
    }

    #[test]
    fn head_final_attaches_nearest_left_dependent_first() {
        let b = binarize_head_outward(&flat(4)).unwrap();
        assert_eq!(
            yields(&b),
            vec![
                ("X".into(), vec![1, 2, 3, 4]),
                ("X:".into(), vec![2, 3, 4]),
                ("X:".into(), vec![3, 4]),
            ]
        );
        assert!(b.constituents.iter().all(|c| c.head == Some(4)));
    }

    #[test]
    fn left_dependents_before_right_ones() {
        let b = binarize_head_outward(&flat(2)).unwrap();
        assert_eq!(
            yields(&b),
            vec![
                ("X".into(), vec![1, 2, 3, 4]),
                ("X:".into(), vec![1, 2, 3]),
                ("X:".into(), vec![1, 2]),
            ]
        );
    }

    #[test]
    fn discontinuous_children() {
        let b = binarize_head_outward(&ptb_heads(&dislocation_tree())).unwrap();
        assert!(is_binary(&b));
        assert_eq!(validate_tree(&b), Ok(()));
        let vp = b.constituents.iter().find(|c| c.label == "VP").unwrap();
        assert_eq!(vp.tokens, [1, 2, 3, 4, 6].into_iter().collect::<TokenSet>());
    }

    #[test]
    fn binary_trees_are_unchanged() {
        let t = ptb_heads(&parse_discbracket("(S (NP (PRP 0=he)) (VP (VBZ 1=sleeps)))").unwrap().remove(0));
        assert_eq!(binarize_head_outward(&t).unwrap(), t);
    }

    #[test]
    fn missing_head_is_reported() {
        let t = parse_discbracket("(X (A 0=a) (B 1=b) (C 2=c))").unwrap().remove(0);
        assert!(matches!(binarize_head_outward(&t), Err(OracleError::MissingHead(_))));
    }

    #[test]
    fn unbinarize_inverts() {
        let t = ptb_heads(&dislocation_tree());
        assert_eq!(unbinarize(&binarize_head_outward(&t).unwrap()), t);
        assert_eq!(unbinarize(&binarize_head_outward(&flat(3)).unwrap()), flat(3));
    }
}
