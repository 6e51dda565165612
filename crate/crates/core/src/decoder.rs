//! Greedy decoding: tag every token, then follow the highest-scoring legal
//! action until the configuration is terminal.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::features::extract_positions;
use crate::nn::{Model, Scalar, DEPLABEL, POS};
use crate::transition::{tree_from_constituents, Action, ActionFamily, TransitionError, TransitionSystem};
use crate::treebank::{Sentence, Tree};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error("no terminal configuration after {0} actions")]
    Runaway(usize),
    #[error("could not build a worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parse {
    /// Predicted tree; its sentence carries the predicted tags.
    pub tree: Tree,
    pub derivation: Vec<Action>,
}

/// Index of the best-scoring action among `legal`; actions outside the
/// model's vocabulary never win unless nothing else is available.
pub fn choose<T: Scalar>(legal: &[Action], scores: &[T], index: impl Fn(&Action) -> Option<usize>) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (k, a) in legal.iter().enumerate() {
        if let Some(i) = index(a) {
            if best.is_none_or(|(_, s)| scores[i] > s) {
                best = Some((k, scores[i]));
            }
        }
    }
    best.map_or(0, |(k, _)| k)
}

/// Tags `sentence` and parses it with the model's transition system.
pub fn parse_sentence<T: Scalar>(model: &Model<T>, sentence: &Sentence) -> Result<Parse, DecodeError> {
    let n = sentence.len();
    let forms: Vec<&str> = sentence.forms().collect();
    let ids = model.token_ids(&forms);
    let tr = model.transduce(&ids, model.dims.layers);
    let mut tagged = sentence.clone();
    for (tt, dist) in model.vocab.tags.iter().zip(model.tag_distributions(&tr.states[0])) {
        for (tok, p) in tagged.tokens.iter_mut().zip(dist) {
            let best = choose_max(&p);
            let value = tt.labels.item(best).to_string();
            match tt.name.as_str() {
                POS => tok.pos = value,
                DEPLABEL => tok.deplabel = value,
                attr => {
                    tok.morph.insert(attr.to_string(), value);
                }
            }
        }
    }
    let top = &tr.states[model.dims.layers - 1];
    let sys = TransitionSystem::new(model.spec.system, model.spec.labels.clone());
    let mut config = sys.initial(n)?;
    let mut derivation = Vec::new();
    // n shifts, n - 1 merges, 2n - 1 labelling steps, fewer than n gaps per merge
    let limit = n * n + 4 * n + 8;
    while !config.is_terminal() {
        if derivation.len() > limit {
            return Err(DecodeError::Runaway(derivation.len()));
        }
        let legal = sys.legal_actions(&config)?;
        let k = if legal.len() == 1 {
            0
        } else {
            let x = model.assemble(&extract_positions(&config, model.spec.templates), top);
            let p = model.action_distribution(&x, ActionFamily::of(model.spec.system, config.phase));
            choose(&legal, &p, |a| model.vocab.action(a))
        };
        let action = legal[k].clone();
        sys.apply_in_place(&mut config, &action)?;
        derivation.push(action);
    }
    Ok(Parse {
        tree: tree_from_constituents(&tagged, config.constituents),
        derivation,
    })
}

fn choose_max<T: Scalar>(p: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    pub sentences: usize,
    pub tokens: usize,
    pub seconds: f64,
}

impl Throughput {
    pub fn tokens_per_second(&self) -> f64 {
        self.tokens as f64 / self.seconds.max(1e-9)
    }

    pub fn sentences_per_second(&self) -> f64 {
        self.sentences as f64 / self.seconds.max(1e-9)
    }
}

/// Parses `sentences` on `workers` threads (0 = all cores). Output order
/// matches input order; timing covers parsing only.
pub fn parse_corpus<T: Scalar>(
    model: &Model<T>,
    sentences: &[Sentence],
    workers: usize,
) -> Result<(Vec<Parse>, Throughput), DecodeError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| DecodeError::Pool(e.to_string()))?;
    let start = Instant::now();
    let parses = pool.install(|| sentences.par_iter().map(|s| parse_sentence(model, s)).collect::<Result<Vec<_>, _>>())?;
    let throughput = Throughput {
        sentences: sentences.len(),
        tokens: sentences.iter().map(Sentence::len).sum(),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((parses, throughput))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::TemplateSet;
    use crate::nn::tests::mini_model;
    use crate::transition::SystemKind;
    use crate::treebank::validate_tree;
    use proptest::prelude::*;

    #[test]
    fn untrained_models_still_produce_valid_trees() {
        for system in SystemKind::ALL {
            let templates = if system.is_lexicalized() { TemplateSet::PlusLex } else { TemplateSet::Base };
            let (m, trees) = mini_model::<f32>(system, templates);
            for t in &trees {
                let p = parse_sentence(&m, &t.sentence).unwrap();
                validate_tree(&p.tree).unwrap();
                assert_eq!(p.tree.len(), t.len());
                let sys = TransitionSystem::new(system, m.spec.labels.clone());
                assert_eq!(sys.execute(&p.tree.sentence, &p.derivation).unwrap(), p.tree);
            }
        }
    }

    #[test]
    fn single_token() {
        let (m, _) = mini_model::<f32>(SystemKind::MlGap, TemplateSet::Base);
        let s = Sentence::from_tagged([("Ja", "ITJ")]);
        let p = parse_sentence(&m, &s).unwrap();
        assert_eq!(p.derivation[0], Action::Shift);
        assert_eq!(p.derivation.len(), 2);
        assert!(matches!(p.derivation[1], Action::Label(_)));
    }

    #[test]
    fn corpus_order_and_worker_count() {
        let (m, trees) = mini_model::<f32>(SystemKind::SrGapLex, TemplateSet::PlusLex);
        let sentences: Vec<Sentence> = trees.iter().map(|t| t.sentence.clone()).collect();
        let (one, tp) = parse_corpus(&m, &sentences, 1).unwrap();
        let (four, _) = parse_corpus(&m, &sentences, 4).unwrap();
        assert_eq!(one, four);
        assert_eq!(tp.tokens, sentences.iter().map(Sentence::len).sum::<usize>());
        assert!(tp.tokens_per_second() > 0.0);
        let (none, tp) = parse_corpus(&m, &[], 2).unwrap();
        assert!(none.is_empty());
        assert_eq!(tp.sentences, 0);
    }

    #[test]
    fn unseen_actions_lose() {
        let legal = [Action::Gap, Action::Shift, Action::Merge];
        let scores = [0.2f32, 0.7, 0.1];
        // GAP -> 0, SHIFT unseen, MERGE -> 2
        let pick = choose(&legal, &scores, |a| match a {
            Action::Gap => Some(0),
            Action::Merge => Some(2),
            _ => None,
        });
        assert_eq!(pick, 0);
        assert_eq!(choose(&legal, &scores, |_| None), 0);
    }

    proptest! {
        #[test]
        fn masking_keeps_a_legal_argmax(scores in proptest::collection::vec(0.0f64..1.0, 4)) {
            let legal = [Action::Shift, Action::Gap, Action::Merge, Action::NoLabel];
            let global = choose_max(&scores);
            let pick = choose(&legal, &scores, |a| legal.iter().position(|b| b == a));
            prop_assert_eq!(pick, global);
        }
    }
}
