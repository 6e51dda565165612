//! Training: per-sentence alternation of a tagging step and a parsing step,
//! stochastic word dropout, averaged SGD and best-epoch selection.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::decoder::{parse_corpus, DecodeError};
use crate::features::{extract_positions, FeatureError, TemplateSet};
use crate::metrics::{disc_f1, labelled_f1, tagging_metrics, EvalParams};
use crate::nn::{Dims, Model, ParserSpec, Step, Tensor, TokenIds, Vocabularies};
use crate::oracle::{self, OracleError, OracleKind};
use crate::transition::{ActionFamily, LabelInventory, SystemKind, TransitionSystem};
use crate::treebank::{Sentence, Tree};

/// Word-dropout constant.
pub const ALPHA: f64 = 0.8375;

pub const LEARNING_RATES: [f64; 2] = [0.01, 0.02];

pub fn epoch_grid() -> impl Iterator<Item = usize> {
    (4..=28).step_by(4).chain([30])
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("training tree {index}: {source}")]
    Oracle { index: usize, source: Box<OracleError> },
    #[error("training tree {index}: oracle derivation does not rebuild the tree")]
    RoundTrip { index: usize },
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("non-finite {objective} loss at epoch {epoch}, sentence {sentence}")]
    Divergence {
        objective: &'static str,
        epoch: usize,
        sentence: usize,
    },
    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(String),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub system: SystemKind,
    pub oracle: OracleKind,
    pub templates: TemplateSet,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub alpha: f64,
    /// Evaluate on the dev set every this many epochs (the last epoch always).
    pub dev_every: usize,
    /// Restart the parameter average at every epoch instead of averaging
    /// every iterate since the first step.
    pub average_per_epoch: bool,
    /// Reject learning rates and epoch counts outside the tuning grids.
    pub strict_grid: bool,
    pub dims: Dims,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            system: SystemKind::MlGap,
            oracle: OracleKind::Eager,
            templates: TemplateSet::Base,
            learning_rate: 0.01,
            epochs: 30,
            seed: 1,
            alpha: ALPHA,
            dev_every: 1,
            average_per_epoch: true,
            strict_grid: true,
            dims: Dims::default(),
        }
    }
}

impl TrainConfig {
    /// Sets one key; used for the config file and for command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad number {:?}", v))
        }
        let v = value.trim();
        match key.trim() {
            "system" => self.system = v.parse().map_err(|e| format!("{}", e))?,
            "oracle" => self.oracle = v.parse().map_err(|e| format!("{}", e))?,
            "features" => self.templates = v.parse().map_err(|e| format!("{}", e))?,
            "lr" => self.learning_rate = num(v)?,
            "epochs" => self.epochs = num(v)?,
            "seed" => self.seed = num(v)?,
            "alpha" => self.alpha = num(v)?,
            "dev_every" => self.dev_every = num(v)?,
            "average_per_epoch" => self.average_per_epoch = num(v)?,
            "strict_grid" => self.strict_grid = num(v)?,
            "word_dim" => self.dims.word = num(v)?,
            "char_dim" => self.dims.char = num(v)?,
            "char_hidden" => self.dims.char_hidden = num(v)?,
            "hidden" => self.dims.hidden = num(v)?,
            "layers" => self.dims.layers = num(v)?,
            "mlp" => self.dims.mlp = num(v)?,
            other => return Err(format!("unknown key {:?}", other)),
        }
        Ok(())
    }

    /// Applies a `key=value` file on top of `self` (`#` starts a comment).
    pub fn apply_text(&mut self, text: &str) -> Result<(), TrainError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| TrainError::Config { line: i + 1, message };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
            self.set(k, v).map_err(err)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, TrainError> {
        let mut c = TrainConfig::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Invalid(m));
        if !oracle::is_compatible(self.system, self.oracle) {
            return bad(format!("oracle {} cannot be used with system {}", self.oracle, self.system));
        }
        self.templates.check(self.system)?;
        if self.strict_grid && !LEARNING_RATES.contains(&self.learning_rate) {
            return bad(format!("learning rate {} is not one of 0.01, 0.02", self.learning_rate));
        }
        if self.strict_grid && !epoch_grid().any(|e| e == self.epochs) {
            return bad(format!("epochs {} is not one of 4, 8, ..., 28, 30", self.epochs));
        }
        if self.epochs == 0 || self.dev_every == 0 {
            return bad("epochs and dev_every must be positive".into());
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive".into());
        }
        let d = &self.dims;
        if [d.word, d.char, d.char_hidden, d.hidden, d.layers, d.mlp].contains(&0) {
            return bad("dimensions must be positive".into());
        }
        Ok(())
    }
}

impl fmt::Display for TrainConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.dims;
        writeln!(f, "system={}", self.system)?;
        writeln!(f, "oracle={}", self.oracle)?;
        writeln!(f, "features={}", self.templates)?;
        writeln!(f, "lr={}", self.learning_rate)?;
        writeln!(f, "epochs={}", self.epochs)?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "alpha={}", self.alpha)?;
        writeln!(f, "dev_every={}", self.dev_every)?;
        writeln!(f, "average_per_epoch={}", self.average_per_epoch)?;
        writeln!(f, "strict_grid={}", self.strict_grid)?;
        writeln!(f, "word_dim={}", d.word)?;
        writeln!(f, "char_dim={}", d.char)?;
        writeln!(f, "char_hidden={}", d.char_hidden)?;
        writeln!(f, "hidden={}", d.hidden)?;
        writeln!(f, "layers={}", d.layers)?;
        writeln!(f, "mlp={}", d.mlp)
    }
}

/// Replacement probability of a word seen `count` times.
pub fn dropout_probability(count: u64, alpha: f64) -> f64 {
    alpha / (count as f64 + alpha)
}

/// Positions (0-based) whose word embedding is replaced by the unknown
/// embedding for one training pass.
pub fn word_dropout_plan<R: Rng>(word_ids: &[usize], word_counts: &[u64], alpha: f64, rng: &mut R) -> Vec<bool> {
    word_ids
        .iter()
        .map(|&w| rng.gen::<f64>() < dropout_probability(word_counts.get(w).copied().unwrap_or(0), alpha))
        .collect()
}

/// Averaged SGD: plain SGD on the live weights plus the running mean of
/// every post-step iterate since the last restart.
#[derive(Debug, Clone)]
pub struct Asgd {
    pub steps: u64,
    /// Iterates in the current average.
    pub averaged: u64,
    pub average: Vec<Tensor<f32>>,
}

impl Asgd {
    pub fn new(params: &[Tensor<f32>]) -> Self {
        Asgd {
            steps: 0,
            averaged: 0,
            average: params.to_vec(),
        }
    }

    pub fn update(&mut self, params: &mut [Tensor<f32>], grads: &[Tensor<f32>], lr: f32) -> Result<(), TrainError> {
        if let Some(g) = grads.iter().find(|g| g.data.iter().any(|x| !x.is_finite())) {
            return Err(TrainError::NonFiniteGradient(g.name.clone()));
        }
        self.steps += 1;
        self.averaged += 1;
        let inv = 1.0 / self.averaged as f32;
        for ((w, g), a) in params.iter_mut().zip(grads).zip(&mut self.average) {
            for ((wi, gi), ai) in w.data.iter_mut().zip(&g.data).zip(&mut a.data) {
                *wi -= lr * gi;
                *ai += (*wi - *ai) * inv;
            }
        }
        Ok(())
    }

    /// The next update replaces the average with the new iterate.
    pub fn restart(&mut self) {
        self.averaged = 0;
    }
}

/// Number of optimization steps per objective, in execution order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub tagging_steps: u64,
    pub parsing_steps: u64,
    /// Parsing steps not immediately preceded by the same sentence's tagging step.
    pub out_of_order: u64,
}

struct Example {
    ids: TokenIds,
    gold_tags: Vec<Vec<Option<usize>>>,
    steps: Vec<Step>,
}

/// Trainer state between epochs.
pub struct Trainer {
    pub config: TrainConfig,
    pub model: Model<f32>,
    pub asgd: Asgd,
    pub counters: Counters,
    pub epoch: usize,
    examples: Vec<Example>,
    rng: ChaCha8Rng,
    grads: Vec<Tensor<f32>>,
}

impl Trainer {
    /// Derives gold derivations (failing on the first tree that does not
    /// round-trip), builds vocabularies and initializes the model.
    pub fn new(train: &[Tree], config: TrainConfig) -> Result<Self, TrainError> {
        config.validate()?;
        if train.is_empty() {
            return Err(TrainError::EmptyCorpus);
        }
        let mut derivations = Vec::with_capacity(train.len());
        for (index, tree) in train.iter().enumerate() {
            let ok = oracle::round_trip(config.system, config.oracle, tree).map_err(|e| TrainError::Oracle { index, source: Box::new(e) })?;
            if !ok {
                return Err(TrainError::RoundTrip { index });
            }
            derivations.push(oracle::derive(config.system, config.oracle, tree).map_err(|e| TrainError::Oracle { index, source: Box::new(e) })?);
        }
        let vocab = Vocabularies::from_corpus(train, &derivations);
        let labels = LabelInventory::from_derivations(config.system, train.iter().zip(&derivations).map(|(t, d)| (t.len(), d.as_slice())));
        let spec = ParserSpec {
            system: config.system,
            oracle: config.oracle,
            templates: config.templates,
            labels,
        };
        let model = Model::<f32>::new(config.dims, spec, vocab, config.seed);
        let system = TransitionSystem::new(config.system, model.spec.labels.clone());
        let mut examples = Vec::with_capacity(train.len());
        for (tree, d) in train.iter().zip(&derivations) {
            let trace = system.trace(tree.len(), d).map_err(|e| TrainError::Invalid(e.to_string()))?;
            let steps = d
                .iter()
                .zip(&trace)
                .map(|(a, c)| Step {
                    positions: extract_positions(c, config.templates),
                    gold: model.vocab.action(a).expect("action in vocabulary"),
                    family: ActionFamily::of(config.system, c.phase),
                })
                .collect();
            let forms: Vec<&str> = tree.sentence.forms().collect();
            examples.push(Example {
                ids: model.token_ids(&forms),
                gold_tags: model.vocab.gold_tags(&tree.sentence),
                steps,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1);
        let grads = model.zeros_like();
        Ok(Trainer {
            asgd: Asgd::new(&model.params),
            config,
            model,
            counters: Counters::default(),
            epoch: 0,
            examples,
            rng,
            grads,
        })
    }

    fn step(&mut self, objective: &'static str, ids: &TokenIds, index: usize) -> Result<f64, TrainError> {
        self.grads.iter_mut().for_each(Tensor::fill_zero);
        let ex = &self.examples[index];
        let loss = match objective {
            "tagging" => self.model.tagging_loss(ids, &ex.gold_tags, &mut self.grads),
            _ => self.model.parsing_loss(ids, &ex.steps, &mut self.grads),
        };
        if !loss.is_finite() {
            return Err(TrainError::Divergence {
                objective,
                epoch: self.epoch,
                sentence: index,
            });
        }
        let lr = self.config.learning_rate as f32;
        self.asgd.update(&mut self.model.params, &self.grads, lr)?;
        Ok(loss as f64)
    }

    /// One pass over the shuffled corpus; returns summed (L_t, L_p).
    pub fn run_epoch(&mut self) -> Result<(f64, f64), TrainError> {
        self.epoch += 1;
        if self.config.average_per_epoch {
            self.asgd.restart();
        }
        let mut order: Vec<usize> = (0..self.examples.len()).collect();
        order.shuffle(&mut self.rng);
        let (mut lt, mut lp) = (0.0, 0.0);
        for i in order {
            let ex = &self.examples[i];
            let drop = word_dropout_plan(&ex.ids.words, &self.model.vocab.word_counts, self.config.alpha, &mut self.rng);
            let mut ids = ex.ids.clone();
            for (w, d) in ids.words.iter_mut().zip(drop) {
                if d {
                    *w = 0;
                }
            }
            lt += self.step("tagging", &ids, i)?;
            self.counters.tagging_steps += 1;
            if self.counters.tagging_steps != self.counters.parsing_steps + 1 {
                self.counters.out_of_order += 1;
            }
            lp += self.step("parsing", &ids, i)?;
            self.counters.parsing_steps += 1;
        }
        Ok((lt, lp))
    }

    /// The model with averaged parameters.
    pub fn averaged(&self) -> Model<f32> {
        let mut m = self.model.clone();
        m.params = self.asgd.average.clone();
        m
    }
}

/// Summed (L_t, L_p) of `model` over `trees`, without dropout.
pub fn corpus_loss(model: &Model<f32>, trees: &[Tree]) -> Result<(f64, f64), TrainError> {
    let system = TransitionSystem::new(model.spec.system, LabelInventory::permissive());
    let mut scratch = model.zeros_like();
    let (mut lt, mut lp) = (0.0, 0.0);
    for (index, tree) in trees.iter().enumerate() {
        let d = oracle::derive(model.spec.system, model.spec.oracle, tree).map_err(|e| TrainError::Oracle { index, source: Box::new(e) })?;
        let trace = system.trace(tree.len(), &d).map_err(|e| TrainError::Invalid(e.to_string()))?;
        let Some(steps) = d
            .iter()
            .zip(&trace)
            .map(|(a, c)| {
                model.vocab.action(a).map(|gold| Step {
                    positions: extract_positions(c, model.spec.templates),
                    gold,
                    family: ActionFamily::of(model.spec.system, c.phase),
                })
            })
            .collect::<Option<Vec<Step>>>()
        else {
            continue;
        };
        let forms: Vec<&str> = tree.sentence.forms().collect();
        let ids = model.token_ids(&forms);
        lt += model.tagging_loss(&ids, &model.vocab.gold_tags(&tree.sentence), &mut scratch) as f64;
        lp += model.parsing_loss(&ids, &steps, &mut scratch) as f64;
    }
    Ok((lt, lp))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub tagging_loss: f64,
    pub parsing_loss: f64,
    /// Dev scores of the averaged model, when evaluated.
    pub dev: Option<DevScores>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevScores {
    pub f1: f64,
    pub disc_f1: f64,
    pub tag_accuracy: f64,
}

pub const LOG_HEADER: &str = "epoch\tL_t\tL_p\tdev_f1\tdev_disc_f1\ttag_acc";

impl EpochLog {
    pub fn to_tsv_row(&self) -> String {
        let dev = |f: fn(&DevScores) -> f64| self.dev.as_ref().map_or("-".to_string(), |d| format!("{:.2}", f(d)));
        format!(
            "{}\t{:.4}\t{:.4}\t{}\t{}\t{}",
            self.epoch,
            self.tagging_loss,
            self.parsing_loss,
            dev(|d| d.f1),
            dev(|d| d.disc_f1),
            dev(|d| d.tag_accuracy)
        )
    }
}

pub fn log_to_tsv(log: &[EpochLog]) -> String {
    let mut s = String::from(LOG_HEADER);
    s.push('\n');
    for e in log {
        let _ = writeln!(s, "{}", e.to_tsv_row());
    }
    s
}

pub struct Trained {
    /// Averaged parameters of the selected epoch.
    pub model: Model<f32>,
    pub log: Vec<EpochLog>,
    pub best_epoch: usize,
    pub counters: Counters,
}

/// Scores `model` on `dev` (POS accuracy as the tag score).
pub fn dev_scores(model: &Model<f32>, dev: &[Tree], workers: usize) -> Result<DevScores, TrainError> {
    let sentences: Vec<Sentence> = dev.iter().map(|t| t.sentence.clone()).collect();
    let (parses, _) = parse_corpus(model, &sentences, workers)?;
    let pred: Vec<Tree> = parses.into_iter().map(|p| p.tree).collect();
    let params = EvalParams::default();
    let l = labelled_f1(dev, &pred, &params).map_err(|e| TrainError::Invalid(e.to_string()))?;
    let d = disc_f1(dev, &pred, &params).map_err(|e| TrainError::Invalid(e.to_string()))?;
    let pred_sentences: Vec<Sentence> = pred.into_iter().map(|t| t.sentence).collect();
    let tags = tagging_metrics(&sentences, &pred_sentences).map_err(|e| TrainError::Invalid(e.to_string()))?;
    Ok(DevScores {
        f1: l.f1,
        disc_f1: d.f1,
        tag_accuracy: tags.attributes[0].accuracy,
    })
}

/// Trains for `config.epochs` epochs and keeps the averaged model of the
/// epoch with the best dev F1 (earliest on ties; the last epoch without a
/// dev set). `on_epoch` sees every log row as it is produced.
pub fn train(
    train: &[Tree],
    dev: &[Tree],
    config: &TrainConfig,
    workers: usize,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<Trained, TrainError> {
    let mut trainer = Trainer::new(train, config.clone())?;
    let mut log = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, Model<f32>)> = None;
    for epoch in 1..=config.epochs {
        let (lt, lp) = trainer.run_epoch()?;
        let evaluate = !dev.is_empty() && (epoch % config.dev_every == 0 || epoch == config.epochs);
        let mut row = EpochLog {
            epoch,
            tagging_loss: lt,
            parsing_loss: lp,
            dev: None,
        };
        if evaluate {
            let averaged = trainer.averaged();
            let scores = dev_scores(&averaged, dev, workers)?;
            row.dev = Some(scores);
            if best.as_ref().is_none_or(|(f, _, _)| scores.f1 > *f) {
                best = Some((scores.f1, epoch, averaged));
            }
        }
        on_epoch(&row);
        log.push(row);
    }
    let (best_epoch, model) = match best {
        Some((_, e, m)) => (e, m),
        None => (config.epochs, trainer.averaged()),
    };
    Ok(Trained {
        model,
        log,
        best_epoch,
        counters: trainer.counters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::to_bytes;
    use crate::synth;

    fn small_config() -> TrainConfig {
        TrainConfig {
            epochs: 4,
            dims: Dims {
                word: 8,
                char: 8,
                char_hidden: 8,
                hidden: 16,
                layers: 2,
                mlp: 16,
            },
            ..TrainConfig::default()
        }
    }

    #[test]
    fn dropout_probability_limits() {
        assert_eq!(dropout_probability(0, ALPHA), 1.0);
        assert!(dropout_probability(1_000_000_000, ALPHA) < 1e-8);
        assert!((dropout_probability(1, ALPHA) - 0.8375 / 1.8375).abs() < 1e-15);
    }

    #[test]
    fn dropout_frequency_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let counts = [0, 1];
        let draws = 100_000;
        let hits: usize = (0..draws).filter(|_| word_dropout_plan(&[1], &counts, ALPHA, &mut rng)[0]).count();
        assert!((hits as f64 / draws as f64 - 0.8375 / 1.8375).abs() < 0.01);
    }

    #[test]
    fn asgd_arithmetic() {
        let mut w = vec![Tensor::<f32>::zeros("w", 1, 1)];
        let mut g = Tensor::<f32>::zeros("w", 1, 1);
        g.data[0] = 2.0;
        let mut opt = Asgd::new(&w);
        for _ in 0..3 {
            opt.update(&mut w, std::slice::from_ref(&g), 0.5).unwrap();
        }
        // iterates -1, -2, -3
        assert_eq!(w[0].data[0], -3.0);
        assert!((opt.average[0].data[0] + 2.0).abs() < 1e-6);
        opt.restart();
        opt.update(&mut w, std::slice::from_ref(&g), 0.5).unwrap();
        assert_eq!(opt.average[0].data[0], -4.0);
        assert_eq!(opt.steps, 4);
        g.data[0] = f32::NAN;
        assert!(matches!(opt.update(&mut w, &[g], 0.5), Err(TrainError::NonFiniteGradient(_))));
    }

    #[test]
    fn config_text_round_trip_and_grid() {
        let c = TrainConfig::parse("system=mlgaplex\noracle=head\nfeatures=lex # lexical\nepochs=8\n").unwrap();
        assert_eq!(c.system, SystemKind::MlGapLex);
        assert_eq!(TrainConfig::parse(&c.to_string()).unwrap(), c);
        c.validate().unwrap();
        let mut bad = c.clone();
        bad.epochs = 7;
        assert!(bad.validate().is_err());
        bad.strict_grid = false;
        bad.validate().unwrap();
        assert!(matches!(TrainConfig::parse("color=blue"), Err(TrainError::Config { line: 1, .. })));
        let incompatible = TrainConfig::parse("system=mlgaplex\noracle=eager").unwrap();
        assert!(incompatible.validate().is_err());
        let lex = TrainConfig::parse("system=mlgap\nfeatures=lex").unwrap();
        assert!(lex.validate().is_err());
    }

    #[test]
    fn alternation_counters_and_log_shape() {
        let trees = synth::generate(6, 2);
        let out = train(&trees, &trees[..2], &small_config(), 1, |_| {}).unwrap();
        assert_eq!(out.counters.tagging_steps, 24);
        assert_eq!(out.counters.parsing_steps, 24);
        assert_eq!(out.counters.out_of_order, 0);
        assert_eq!(out.log.len(), 4);
        assert_eq!(log_to_tsv(&out.log).lines().count(), 5);
        assert!(out.log.iter().all(|r| r.dev.is_some()));
    }

    #[test]
    fn shared_and_private_parameters() {
        let trees = synth::generate(4, 8);
        let t = Trainer::new(&trees, small_config()).unwrap();
        let ex = &t.examples[0];
        let mut gt = t.model.zeros_like();
        t.model.tagging_loss(&ex.ids, &ex.gold_tags, &mut gt);
        let mut gp = t.model.zeros_like();
        t.model.parsing_loss(&ex.ids, &ex.steps, &mut gp);
        let touched = |g: &Tensor<f32>| g.data.iter().any(|&x| x != 0.0);
        for (a, b) in gt.iter().zip(&gp) {
            let n = &a.name;
            if n.starts_with("word_emb") || n.starts_with("char") || n.starts_with("layer1") {
                assert!(touched(a) && touched(b), "{}", n);
            } else if n.starts_with("tagger") {
                assert!(touched(a) && !touched(b), "{}", n);
            } else if n.starts_with("layer2") || n.starts_with("mlp") {
                assert!(!touched(a) && touched(b), "{}", n);
            }
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let trees = synth::generate(5, 4);
        let c = small_config();
        let a = train(&trees, &trees, &c, 1, |_| {}).unwrap();
        let b = train(&trees, &trees, &c, 3, |_| {}).unwrap();
        assert_eq!(to_bytes(&a.model), to_bytes(&b.model));
        assert_eq!(log_to_tsv(&a.log), log_to_tsv(&b.log));
        let mut other = c.clone();
        other.seed = 2;
        let d = train(&trees, &trees, &other, 1, |_| {}).unwrap();
        assert_ne!(to_bytes(&a.model), to_bytes(&d.model));
    }

    #[test]
    fn loss_drops_on_a_small_corpus() {
        let trees = synth::generate(10, 6);
        let mut c = small_config();
        c.dims.hidden = 32;
        c.dims.mlp = 32;
        let mut t = Trainer::new(&trees, c).unwrap();
        let (lt0, lp0) = corpus_loss(&t.model, &trees).unwrap();
        for _ in 0..40 {
            t.run_epoch().unwrap();
        }
        let (lt, lp) = corpus_loss(&t.model, &trees).unwrap();
        assert!(lt < 0.5 * lt0, "tagging {} -> {}", lt0, lt);
        assert!(lp < 0.5 * lp0, "parsing {} -> {}", lp0, lp);
        let (at, ap) = corpus_loss(&t.averaged(), &trees).unwrap();
        assert!(at + ap < 0.7 * (lt0 + lp0));
    }

    #[test]
    fn non_roundtripping_trees_fail_fast() {
        let trees = synth::generate(3, 1);
        let mut c = small_config();
        c.system = SystemKind::MlGapLex;
        c.oracle = OracleKind::HeadDriven;
        let headless: Vec<Tree> = trees.iter().map(Tree::without_heads).collect();
        assert!(matches!(Trainer::new(&headless, c), Err(TrainError::Oracle { index: 0, .. })));
    }
}
