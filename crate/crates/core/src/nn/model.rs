use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lstm::{self, LstmCache};
use super::tensor::{add_into, softmax, Scalar, Tensor};
use super::vocab::Vocabularies;
use crate::features::TemplateSet;
use crate::oracle::OracleKind;
use crate::transition::{ActionFamily, LabelInventory, SystemKind};

/// Layer sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub word: usize,
    pub char: usize,
    /// Per direction.
    pub char_hidden: usize,
    /// Per direction.
    pub hidden: usize,
    pub layers: usize,
    pub mlp: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Dims {
            word: 32,
            char: 32,
            char_hidden: 32,
            hidden: 128,
            layers: 2,
            mlp: 128,
        }
    }
}

impl Dims {
    pub fn state(&self) -> usize {
        2 * self.hidden
    }

    pub fn token_input(&self) -> usize {
        self.word + 2 * self.char_hidden
    }
}

/// What the model parses with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParserSpec {
    pub system: SystemKind,
    pub oracle: OracleKind,
    pub templates: TemplateSet,
    pub labels: LabelInventory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LstmIx {
    pub w: usize,
    pub b: usize,
}

/// Positions of the parameter blocks in [`Model::params`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub word_emb: usize,
    pub char_emb: usize,
    pub char_fwd: LstmIx,
    pub char_bwd: LstmIx,
    pub layers: Vec<(LstmIx, LstmIx)>,
    pub taggers: Vec<LstmIx>,
    pub none: usize,
    pub mlp: [LstmIx; 3],
}

enum Init {
    Glorot,
    Embedding,
    Zero,
    LstmBias,
}

fn layout(dims: &Dims, vocab: &Vocabularies, templates: TemplateSet) -> (Layout, Vec<(String, usize, usize, Init)>) {
    let mut blocks = Vec::new();
    let mut add = |name: String, rows: usize, cols: usize, init: Init| {
        blocks.push((name, rows, cols, init));
        blocks.len() - 1
    };
    let lstm = |add: &mut dyn FnMut(String, usize, usize, Init) -> usize, name: &str, n_in: usize, h: usize| LstmIx {
        w: add(format!("{}.w", name), 4 * h, n_in + h, Init::Glorot),
        b: add(format!("{}.b", name), 4 * h, 1, Init::LstmBias),
    };
    let word_emb = add("word_embeddings".into(), vocab.words.len(), dims.word, Init::Embedding);
    let char_emb = add("char_embeddings".into(), vocab.chars.len(), dims.char, Init::Embedding);
    let char_fwd = lstm(&mut add, "char_lstm.fwd", dims.char, dims.char_hidden);
    let char_bwd = lstm(&mut add, "char_lstm.bwd", dims.char, dims.char_hidden);
    let mut layers = Vec::new();
    for l in 0..dims.layers {
        let n_in = if l == 0 { dims.token_input() } else { dims.state() };
        let f = lstm(&mut add, &format!("layer{}.fwd", l + 1), n_in, dims.hidden);
        let b = lstm(&mut add, &format!("layer{}.bwd", l + 1), n_in, dims.hidden);
        layers.push((f, b));
    }
    let taggers = vocab
        .tags
        .iter()
        .map(|t| LstmIx {
            w: add(format!("tagger.{}.w", t.name), t.labels.len(), dims.state(), Init::Glorot),
            b: add(format!("tagger.{}.b", t.name), t.labels.len(), 1, Init::Zero),
        })
        .collect();
    let none = add("none".into(), 1, dims.state(), Init::Embedding);
    let n_feat = templates.len() * dims.state();
    let mlp = [
        LstmIx {
            w: add("mlp.w1".into(), dims.mlp, n_feat, Init::Glorot),
            b: add("mlp.b1".into(), dims.mlp, 1, Init::Zero),
        },
        LstmIx {
            w: add("mlp.w2".into(), dims.mlp, dims.mlp, Init::Glorot),
            b: add("mlp.b2".into(), dims.mlp, 1, Init::Zero),
        },
        LstmIx {
            w: add("mlp.w3".into(), vocab.actions.len(), dims.mlp, Init::Glorot),
            b: add("mlp.b3".into(), vocab.actions.len(), 1, Init::Zero),
        },
    ];
    (
        Layout {
            word_emb,
            char_emb,
            char_fwd,
            char_bwd,
            layers,
            taggers,
            none,
            mlp,
        },
        blocks,
    )
}

/// The scorer: character and word embeddings, a character bi-LSTM, a
/// stacked sentence bi-LSTM, tagger heads on the first layer and a
/// two-hidden-layer action classifier on second-layer features.
#[derive(Debug, Clone, PartialEq)]
pub struct Model<T = f32> {
    pub dims: Dims,
    pub spec: ParserSpec,
    pub vocab: Vocabularies,
    pub params: Vec<Tensor<T>>,
    pub(crate) layout: Layout,
}

/// Vocabulary ids of a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenIds {
    pub words: Vec<usize>,
    pub chars: Vec<Vec<usize>>,
}

/// Forward-pass values kept for backpropagation.
pub struct Transduction<T> {
    chars: Vec<(LstmCache<T>, LstmCache<T>)>,
    layers: Vec<(LstmCache<T>, LstmCache<T>)>,
    /// `states[l][k]`: output of layer `l + 1` for token `k + 1`.
    pub states: Vec<Vec<Vec<T>>>,
}

/// One parser decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub positions: Vec<Option<usize>>,
    /// Gold action index.
    pub gold: usize,
    /// Actions the softmax ranges over (set by the phase).
    pub family: ActionFamily,
}

impl<T: Scalar> Model<T> {
    pub fn new(dims: Dims, spec: ParserSpec, vocab: Vocabularies, seed: u64) -> Self {
        let (layout, blocks) = layout(&dims, &vocab, spec.templates);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = blocks
            .into_iter()
            .map(|(name, rows, cols, init)| {
                let mut t = Tensor::zeros(name, rows, cols);
                match init {
                    Init::Zero => {}
                    Init::Glorot => {
                        let a = (6.0 / (rows + cols) as f64).sqrt();
                        t.data.iter_mut().for_each(|x| *x = T::of(rng.gen_range(-a..a)));
                    }
                    Init::Embedding => {
                        let a = (6.0 / (1 + cols) as f64).sqrt();
                        t.data.iter_mut().for_each(|x| *x = T::of(rng.gen_range(-a..a)));
                    }
                    Init::LstmBias => {
                        let h = rows / 4;
                        t.data[h..2 * h].iter_mut().for_each(|x| *x = T::one());
                    }
                }
                t
            })
            .collect();
        Model {
            dims,
            spec,
            vocab,
            params,
            layout,
        }
    }

    /// A model with the same structure and zero parameters (gradient buffers).
    pub fn zeros_like(&self) -> Vec<Tensor<T>> {
        self.params.iter().map(|t| Tensor::zeros(t.name.clone(), t.rows, t.cols)).collect()
    }

    pub(crate) fn empty_layout(dims: &Dims, vocab: &Vocabularies, templates: TemplateSet) -> Vec<(String, usize, usize)> {
        layout(dims, vocab, templates).1.into_iter().map(|(n, r, c, _)| (n, r, c)).collect()
    }

    pub(crate) fn from_parts(dims: Dims, spec: ParserSpec, vocab: Vocabularies, params: Vec<Tensor<T>>) -> Self {
        let (layout, _) = layout(&dims, &vocab, spec.templates);
        Model {
            dims,
            spec,
            vocab,
            params,
            layout,
        }
    }

    pub fn cast<U: Scalar>(&self) -> Model<U> {
        Model {
            dims: self.dims,
            spec: self.spec.clone(),
            vocab: self.vocab.clone(),
            params: self.params.iter().map(Tensor::cast).collect(),
            layout: self.layout.clone(),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(|t| t.data.len()).sum()
    }

    pub fn token_ids(&self, forms: &[&str]) -> TokenIds {
        TokenIds {
            words: forms.iter().map(|f| self.vocab.word_id(f)).collect(),
            chars: forms.iter().map(|f| self.vocab.char_ids(f)).collect(),
        }
    }

    fn char_forward(&self, chars: &[usize]) -> (LstmCache<T>, LstmCache<T>) {
        let emb = &self.params[self.layout.char_emb];
        let xs: Vec<&[T]> = chars.iter().map(|&c| emb.row(c)).collect();
        let rev: Vec<&[T]> = xs.iter().rev().copied().collect();
        let (f, b) = (self.layout.char_fwd, self.layout.char_bwd);
        (
            lstm::forward(&self.params[f.w], &self.params[f.b], &xs),
            lstm::forward(&self.params[b.w], &self.params[b.b], &rev),
        )
    }

    /// Character representation of a word: last forward state followed by
    /// last backward state.
    pub fn char_encode(&self, word: &str) -> Vec<T> {
        let (f, b) = self.char_forward(&self.vocab.char_ids(word));
        let mut out = f.last().to_vec();
        out.extend_from_slice(b.last());
        out
    }

    /// Runs the first `layers` sentence layers. Word ids replaced by 0 act
    /// as unknown words; characters are always read.
    pub fn transduce(&self, ids: &TokenIds, layers: usize) -> Transduction<T> {
        let n = ids.words.len();
        let mut chars = Vec::with_capacity(n);
        let mut inputs = Vec::with_capacity(n);
        for k in 0..n {
            let (f, b) = self.char_forward(&ids.chars[k]);
            let mut x = Vec::with_capacity(self.dims.token_input());
            x.extend_from_slice(self.params[self.layout.word_emb].row(ids.words[k]));
            x.extend_from_slice(f.last());
            x.extend_from_slice(b.last());
            inputs.push(x);
            chars.push((f, b));
        }
        let mut caches = Vec::with_capacity(layers);
        let mut states: Vec<Vec<Vec<T>>> = Vec::with_capacity(layers);
        for l in 0..layers {
            let (fi, bi) = self.layout.layers[l];
            let xs: Vec<&[T]> = if l == 0 {
                inputs.iter().map(Vec::as_slice).collect()
            } else {
                states[l - 1].iter().map(Vec::as_slice).collect()
            };
            let rev: Vec<&[T]> = xs.iter().rev().copied().collect();
            let f = lstm::forward(&self.params[fi.w], &self.params[fi.b], &xs);
            let b = lstm::forward(&self.params[bi.w], &self.params[bi.b], &rev);
            let out = (0..n)
                .map(|k| {
                    let mut s = f.hidden[k].clone();
                    s.extend_from_slice(&b.hidden[n - 1 - k]);
                    s
                })
                .collect();
            states.push(out);
            caches.push((f, b));
        }
        Transduction {
            chars,
            layers: caches,
            states,
        }
    }

    /// Backpropagates gradients of the layer outputs (`d_states[l][k]`, one
    /// entry per computed layer) down to the embeddings.
    pub fn transduce_backward(&self, ids: &TokenIds, tr: &Transduction<T>, mut d_states: Vec<Vec<Vec<T>>>, grads: &mut [Tensor<T>]) {
        let n = ids.words.len();
        let h = self.dims.hidden;
        let mut d_inputs: Vec<Vec<T>> = Vec::new();
        for l in (0..tr.layers.len()).rev() {
            let (fi, bi) = self.layout.layers[l];
            let (f, b) = &tr.layers[l];
            let d = &d_states[l];
            let df: Vec<Vec<T>> = (0..n).map(|k| d[k][..h].to_vec()).collect();
            let db: Vec<Vec<T>> = (0..n).map(|k| d[n - 1 - k][h..].to_vec()).collect();
            let dxf = backward_into(&self.params[fi.w], f, &df, grads, fi);
            let dxb = backward_into(&self.params[bi.w], b, &db, grads, bi);
            let dx: Vec<Vec<T>> = (0..n)
                .map(|k| {
                    let mut v = dxf[k].clone();
                    add_into(&dxb[n - 1 - k], &mut v);
                    v
                })
                .collect();
            if l == 0 {
                d_inputs = dx;
            } else {
                for (k, v) in dx.iter().enumerate() {
                    add_into(v, &mut d_states[l - 1][k]);
                }
            }
        }
        let (w, ch) = (self.dims.word, self.dims.char_hidden);
        for k in 0..n {
            let dx = &d_inputs[k];
            add_into(&dx[..w], grads[self.layout.word_emb].row_mut(ids.words[k]));
            let (f, b) = &tr.chars[k];
            let m = ids.chars[k].len();
            let mut df = vec![vec![T::zero(); ch]; m];
            df[m - 1].copy_from_slice(&dx[w..w + ch]);
            let mut db = vec![vec![T::zero(); ch]; m];
            db[m - 1].copy_from_slice(&dx[w + ch..]);
            let dcf = backward_into(&self.params[self.layout.char_fwd.w], f, &df, grads, self.layout.char_fwd);
            let dcb = backward_into(&self.params[self.layout.char_bwd.w], b, &db, grads, self.layout.char_bwd);
            let emb = self.layout.char_emb;
            for j in 0..m {
                add_into(&dcf[j], grads[emb].row_mut(ids.chars[k][j]));
                add_into(&dcb[m - 1 - j], grads[emb].row_mut(ids.chars[k][j]));
            }
        }
    }

    /// Per tag type, per token: a distribution over that type's labels.
    pub fn tag_distributions(&self, layer1: &[Vec<T>]) -> Vec<Vec<Vec<T>>> {
        self.layout
            .taggers
            .iter()
            .map(|ix| {
                let (w, b) = (&self.params[ix.w], &self.params[ix.b]);
                layer1
                    .iter()
                    .map(|s| {
                        let mut p = vec![T::zero(); w.rows];
                        w.affine(s, &b.data, &mut p);
                        softmax(&mut p);
                        p
                    })
                    .collect()
            })
            .collect()
    }

    /// Hidden activations and the distribution over the actions of `family`
    /// (zero elsewhere) for an assembled feature vector.
    pub fn action_forward(&self, x: &[T], family: ActionFamily) -> (Vec<T>, Vec<T>, Vec<T>) {
        let [l1, l2, l3] = self.layout.mlp;
        let mut o1 = vec![T::zero(); self.dims.mlp];
        self.params[l1.w].affine(x, &self.params[l1.b].data, &mut o1);
        o1.iter_mut().for_each(|v| *v = v.max(T::zero()));
        let mut o2 = vec![T::zero(); self.dims.mlp];
        self.params[l2.w].affine(&o1, &self.params[l2.b].data, &mut o2);
        o2.iter_mut().for_each(|v| *v = v.max(T::zero()));
        let mut p = vec![T::zero(); self.params[l3.w].rows];
        self.params[l3.w].affine(&o2, &self.params[l3.b].data, &mut p);
        if family != ActionFamily::Any {
            let mut masked = vec![T::neg_infinity(); p.len()];
            for &i in self.vocab.family(family) {
                masked[i] = p[i];
            }
            p = masked;
        }
        softmax(&mut p);
        (o1, o2, p)
    }

    pub fn action_distribution(&self, x: &[T], family: ActionFamily) -> Vec<T> {
        self.action_forward(x, family).2
    }

    pub fn none_vector(&self) -> &[T] {
        &self.params[self.layout.none].data
    }

    /// Feature vector for `positions` over second-layer `states`.
    pub fn assemble(&self, positions: &[Option<usize>], states: &[Vec<T>]) -> Vec<T> {
        crate::features::assemble_input(positions, states, self.none_vector()).expect("positions inside the sentence")
    }

    /// Tagging loss (sum of negative log-likelihoods over tokens and tag
    /// types); accumulates gradients. Gold labels that are `None` are skipped.
    pub fn tagging_loss(&self, ids: &TokenIds, gold: &[Vec<Option<usize>>], grads: &mut [Tensor<T>]) -> T {
        let tr = self.transduce(ids, 1);
        let n = ids.words.len();
        let dist = self.tag_distributions(&tr.states[0]);
        let mut loss = T::zero();
        let mut d1 = vec![vec![T::zero(); self.dims.state()]; n];
        for (t, ix) in self.layout.taggers.iter().enumerate() {
            for k in 0..n {
                let Some(g) = gold[t][k] else { continue };
                let mut d = dist[t][k].clone();
                loss -= d[g].ln();
                d[g] -= T::one();
                grads[ix.w].add_outer(&d, &tr.states[0][k]);
                add_into(&d, &mut grads[ix.b].data);
                self.params[ix.w].backprop_input(&d, &mut d1[k]);
            }
        }
        self.transduce_backward(ids, &tr, vec![d1], grads);
        loss
    }

    /// Parsing loss (negative log-likelihood of the gold derivation);
    /// accumulates gradients.
    pub fn parsing_loss(&self, ids: &TokenIds, steps: &[Step], grads: &mut [Tensor<T>]) -> T {
        let layers = self.dims.layers;
        let tr = self.transduce(ids, layers);
        let n = ids.words.len();
        let top = &tr.states[layers - 1];
        let sd = self.dims.state();
        let mut d_top = vec![vec![T::zero(); sd]; n];
        let [l1, l2, l3] = self.layout.mlp;
        let mut loss = T::zero();
        for step in steps {
            let (positions, gold) = (&step.positions, step.gold);
            let x = self.assemble(positions, top);
            let (o1, o2, mut d3) = self.action_forward(&x, step.family);
            loss -= d3[gold].ln();
            d3[gold] -= T::one();
            grads[l3.w].add_outer(&d3, &o2);
            add_into(&d3, &mut grads[l3.b].data);
            let mut d2 = vec![T::zero(); o2.len()];
            self.params[l3.w].backprop_input(&d3, &mut d2);
            relu_mask(&mut d2, &o2);
            grads[l2.w].add_outer(&d2, &o1);
            add_into(&d2, &mut grads[l2.b].data);
            let mut d1 = vec![T::zero(); o1.len()];
            self.params[l2.w].backprop_input(&d2, &mut d1);
            relu_mask(&mut d1, &o1);
            grads[l1.w].add_outer(&d1, &x);
            add_into(&d1, &mut grads[l1.b].data);
            let mut dx = vec![T::zero(); x.len()];
            self.params[l1.w].backprop_input(&d1, &mut dx);
            for (j, p) in positions.iter().enumerate() {
                let block = &dx[j * sd..(j + 1) * sd];
                match p {
                    Some(p) => add_into(block, &mut d_top[p - 1]),
                    None => add_into(block, &mut grads[self.layout.none].data),
                }
            }
        }
        let mut d_states = vec![vec![vec![T::zero(); sd]; n]; layers];
        d_states[layers - 1] = d_top;
        self.transduce_backward(ids, &tr, d_states, grads);
        loss
    }

    /// Both losses and the gradient of their sum, at the current parameters.
    pub fn loss_and_gradients(&self, ids: &TokenIds, gold_tags: &[Vec<Option<usize>>], steps: &[Step]) -> (T, T, Vec<Tensor<T>>) {
        let mut grads = self.zeros_like();
        let lt = self.tagging_loss(ids, gold_tags, &mut grads);
        let lp = self.parsing_loss(ids, steps, &mut grads);
        (lt, lp, grads)
    }
}

fn relu_mask<T: Scalar>(d: &mut [T], out: &[T]) {
    for (g, o) in d.iter_mut().zip(out) {
        if *o <= T::zero() {
            *g = T::zero();
        }
    }
}

fn backward_into<T: Scalar>(
    w: &Tensor<T>,
    cache: &LstmCache<T>,
    d: &[Vec<T>],
    grads: &mut [Tensor<T>],
    ix: LstmIx,
) -> Vec<Vec<T>> {
    let (gw, gb) = two_mut(grads, ix.w, ix.b);
    lstm::backward(w, cache, d, gw, gb)
}

fn two_mut<T>(xs: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert!(a < b);
    let (left, right) = xs.split_at_mut(b);
    (&mut left[a], &mut right[0])
}
