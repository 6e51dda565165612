use super::MetricsError;
use crate::treebank::{Sentence, Token, MORPH_ATTRIBUTES, UNDEF};

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeScore {
    pub name: String,
    /// Percentage of tokens with the gold value.
    pub accuracy: f64,
    /// F1 over tokens where gold or prediction is defined.
    pub f1: f64,
    /// Percentage of gold tokens with a defined value.
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggingReport {
    pub tokens: usize,
    /// POS, then every morphological attribute.
    pub attributes: Vec<AttributeScore>,
    /// Percentage of tokens whose POS and morphological attributes are all correct.
    pub complete_match: f64,
}

fn value<'a>(tok: &'a Token, name: &str) -> &'a str {
    if name == "pos" {
        &tok.pos
    } else {
        tok.morph_value(name)
    }
}

fn pct(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        100.0 * a as f64 / b as f64
    }
}

pub fn tagging_metrics(gold: &[Sentence], pred: &[Sentence]) -> Result<TaggingReport, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    let mut pairs = Vec::new();
    for (index, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(MetricsError::TokenMismatch {
                index,
                gold: g.len(),
                pred: p.len(),
            });
        }
        pairs.extend(g.tokens.iter().zip(&p.tokens));
    }
    let names: Vec<&str> = std::iter::once("pos").chain(MORPH_ATTRIBUTES).collect();
    let mut all_correct = vec![true; pairs.len()];
    let attributes = names
        .iter()
        .map(|&name| {
            let (mut correct, mut covered, mut tp, mut gold_def, mut pred_def) = (0, 0, 0, 0, 0);
            for (k, (g, p)) in pairs.iter().enumerate() {
                let (gv, pv) = (value(g, name), value(p, name));
                let ok = gv == pv;
                correct += ok as usize;
                all_correct[k] &= ok;
                covered += (gv != UNDEF) as usize;
                gold_def += (gv != UNDEF) as usize;
                pred_def += (pv != UNDEF) as usize;
                tp += (ok && gv != UNDEF) as usize;
            }
            let (p, r) = (pct(tp, pred_def), pct(tp, gold_def));
            AttributeScore {
                name: name.to_string(),
                accuracy: pct(correct, pairs.len()),
                f1: if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) },
                coverage: pct(covered, pairs.len()),
            }
        })
        .collect();
    Ok(TaggingReport {
        tokens: pairs.len(),
        attributes,
        complete_match: pct(all_correct.iter().filter(|&&b| b).count(), pairs.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(rows: &[(&str, &str, &str)]) -> Sentence {
        let mut s = Sentence::from_tagged(rows.iter().map(|(_, pos, _)| ("w", *pos)));
        for (tok, (case, _, number)) in s.tokens.iter_mut().zip(rows) {
            tok.morph.insert("case".into(), case.to_string());
            tok.morph.insert("number".into(), number.to_string());
        }
        s
    }

    fn score<'a>(r: &'a TaggingReport, name: &str) -> &'a AttributeScore {
        r.attributes.iter().find(|a| a.name == name).unwrap()
    }

    #[test]
    fn ten_tokens_by_hand() {
        // (case, pos, number)
        let gold = sentence(&[
            ("nom", "ART", "sg"),
            ("nom", "NN", "sg"),
            ("undef", "VVFIN", "sg"),
            ("acc", "ART", "pl"),
            ("acc", "NN", "pl"),
            ("undef", "ADV", "undef"),
            ("dat", "APPR", "undef"),
            ("dat", "NN", "sg"),
            ("undef", "$.", "undef"),
            ("gen", "NE", "sg"),
        ]);
        let pred = sentence(&[
            ("nom", "ART", "sg"),
            ("acc", "NN", "sg"),
            ("undef", "VVFIN", "pl"),
            ("acc", "ART", "pl"),
            ("acc", "NN", "pl"),
            ("nom", "ADV", "undef"),
            ("undef", "APPR", "undef"),
            ("dat", "NN", "sg"),
            ("undef", "$.", "undef"),
            ("gen", "NN", "sg"),
        ]);
        let r = tagging_metrics(&[gold], &[pred]).unwrap();
        assert_eq!(r.tokens, 10);
        assert_eq!(score(&r, "pos").accuracy, 90.0);
        // case: correct at 1,3,4,5,8,9,10; gold defined 7, pred defined 7, tp 5.
        let case = score(&r, "case");
        assert_eq!(case.accuracy, 70.0);
        assert_eq!(case.coverage, 70.0);
        assert!((case.f1 - 100.0 * 5.0 / 7.0).abs() < 1e-9);
        // number: wrong only at 3; gold defined 7 (tp 6), pred defined 7.
        let number = score(&r, "number");
        assert_eq!(number.accuracy, 90.0);
        assert!((number.f1 - 100.0 * 6.0 / 7.0).abs() < 1e-9);
        assert_eq!(score(&r, "tense").coverage, 0.0);
        assert_eq!(score(&r, "tense").accuracy, 100.0);
        // all attributes right at 1,4,5,8,9
        assert_eq!(r.complete_match, 50.0);
    }

    #[test]
    fn perfect_tagging() {
        let s = sentence(&[("nom", "NN", "sg"), ("undef", "VVFIN", "sg")]);
        let r = tagging_metrics(&[s.clone()], &[s]).unwrap();
        assert_eq!(score(&r, "pos").f1, 100.0);
        assert_eq!(score(&r, "case").f1, 100.0);
        assert_eq!(r.complete_match, 100.0);
    }
}
