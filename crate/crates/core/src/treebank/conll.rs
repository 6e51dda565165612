//! Dependency labels from a CoNLL-style column file, matched to trees by
//! sentence order.

use super::{Tree, TreebankError};

const DEPREL_COLUMN: usize = 7;

/// Returns the DEPREL column of every sentence. Comment lines and
/// multiword-token ranges (`3-4`) are skipped.
pub fn read_conll_deplabels(text: &str) -> Result<Vec<Vec<String>>, TreebankError> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let label = cols
            .get(DEPREL_COLUMN)
            .ok_or_else(|| TreebankError::Conll(format!("line {}: fewer than {} columns", k + 1, DEPREL_COLUMN + 1)))?;
        current.push(label.to_string());
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

pub fn attach_deplabels(trees: &mut [Tree], labels: &[Vec<String>]) -> Result<(), TreebankError> {
    if trees.len() != labels.len() {
        return Err(TreebankError::Conll(format!(
            "{} trees but {} dependency sentences",
            trees.len(),
            labels.len()
        )));
    }
    for (k, (tree, labs)) in trees.iter_mut().zip(labels).enumerate() {
        if tree.len() != labs.len() {
            return Err(TreebankError::Conll(format!(
                "sentence {}: {} tokens but {} dependency labels",
                k + 1,
                tree.len(),
                labs.len()
            )));
        }
        for (tok, lab) in tree.sentence.tokens.iter_mut().zip(labs) {
            tok.deplabel = lab.clone();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::parse_discbracket;

    #[test]
    fn reads_and_attaches() {
        let conll = "# sent 1\n1\the\the\tPRP\tPRP\t_\t2\tnsubj\t_\t_\n2\tsleeps\tsleep\tVBZ\tVBZ\t_\t0\troot\t_\t_\n\n";
        let labels = read_conll_deplabels(conll).unwrap();
        assert_eq!(labels, vec![vec!["nsubj".to_string(), "root".to_string()]]);
        let mut trees = parse_discbracket("(S (NP (PRP 0=he)) (VP (VBZ 1=sleeps)))").unwrap();
        attach_deplabels(&mut trees, &labels).unwrap();
        assert_eq!(trees[0].sentence.token(1).deplabel, "nsubj");
        assert!(attach_deplabels(&mut trees, &[]).is_err());
    }
}
