use std::collections::{BTreeMap, HashMap};

use crate::transition::{Action, ActionFamily};
use crate::treebank::{Sentence, Tree, MORPH_ATTRIBUTES, UNDEF};

pub const UNKNOWN: &str = "<UNK>";

/// A string-to-index map with a fixed order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn new<I: IntoIterator<Item = String>>(items: I) -> Self {
        let mut v = Vocab::default();
        for s in items {
            v.add(s);
        }
        v
    }

    pub fn add(&mut self, s: String) -> usize {
        if let Some(&i) = self.index.get(&s) {
            return i;
        }
        let i = self.items.len();
        self.index.insert(s.clone(), i);
        self.items.push(s);
        i
    }

    pub fn get(&self, s: &str) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn item(&self, i: usize) -> &str {
        &self.items[i]
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// One tagger output: POS, a morphological attribute, or the dependency label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagType {
    pub name: String,
    pub labels: Vocab,
}

pub const POS: &str = "pos";
pub const DEPLABEL: &str = "deplabel";

impl TagType {
    pub fn value<'a>(&self, sentence: &'a Sentence, k: usize) -> &'a str {
        let tok = &sentence.tokens[k];
        match self.name.as_str() {
            POS => &tok.pos,
            DEPLABEL => &tok.deplabel,
            attr => tok.morph_value(attr),
        }
    }
}

/// Vocabularies of a model. Index 0 of `words` and `chars` is the unknown
/// symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabularies {
    pub words: Vocab,
    /// Training frequency of every word (0 for the unknown symbol).
    pub word_counts: Vec<u64>,
    pub chars: Vocab,
    pub tags: Vec<TagType>,
    pub actions: Vec<Action>,
    action_index: HashMap<Action, usize>,
    /// Action indexes of every [`ActionFamily`], in `ActionFamily::ALL` order.
    families: [Vec<usize>; 3],
}

impl Vocabularies {
    pub fn new(words: Vocab, word_counts: Vec<u64>, chars: Vocab, tags: Vec<TagType>, actions: Vec<Action>) -> Self {
        let action_index = actions.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        let families = ActionFamily::ALL.map(|f| (0..actions.len()).filter(|&i| f.contains(&actions[i])).collect());
        Vocabularies {
            words,
            word_counts,
            chars,
            tags,
            actions,
            action_index,
            families,
        }
    }

    /// Collects vocabularies in order of first occurrence. Tag types are POS,
    /// every morphological attribute with a defined value somewhere, and the
    /// dependency label when any token has one.
    pub fn from_corpus(trees: &[Tree], derivations: &[Vec<Action>]) -> Self {
        let mut words = Vocab::new([UNKNOWN.to_string()]);
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        let mut chars = Vocab::new([UNKNOWN.to_string()]);
        let mut names = vec![POS.to_string()];
        for attr in MORPH_ATTRIBUTES {
            if trees.iter().flat_map(|t| &t.sentence.tokens).any(|tok| tok.morph_value(attr) != UNDEF) {
                names.push(attr.to_string());
            }
        }
        if trees.iter().flat_map(|t| &t.sentence.tokens).any(|tok| tok.deplabel != UNDEF) {
            names.push(DEPLABEL.to_string());
        }
        let mut tags: Vec<TagType> = names
            .into_iter()
            .map(|name| TagType {
                name,
                labels: Vocab::default(),
            })
            .collect();
        for t in trees {
            for (k, tok) in t.sentence.tokens.iter().enumerate() {
                *counts.entry(words.add(tok.form.clone())).or_default() += 1;
                for c in tok.form.chars() {
                    chars.add(c.to_string());
                }
                for tt in &mut tags {
                    let v = tt.value(&t.sentence, k).to_string();
                    tt.labels.add(v);
                }
            }
        }
        let word_counts = (0..words.len()).map(|i| counts.get(&i).copied().unwrap_or(0)).collect();
        let mut actions: Vec<Action> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for d in derivations {
            for a in d {
                if seen.insert(a.clone()) {
                    actions.push(a.clone());
                }
            }
        }
        Vocabularies::new(words, word_counts, chars, tags, actions)
    }

    pub fn action(&self, a: &Action) -> Option<usize> {
        self.action_index.get(a).copied()
    }

    pub fn family(&self, family: ActionFamily) -> &[usize] {
        &self.families[family as usize]
    }

    pub fn word_id(&self, form: &str) -> usize {
        self.words.get(form).unwrap_or(0)
    }

    pub fn char_ids(&self, form: &str) -> Vec<usize> {
        let ids: Vec<usize> = form.chars().map(|c| self.chars.get(c.encode_utf8(&mut [0; 4])).unwrap_or(0)).collect();
        if ids.is_empty() {
            vec![0]
        } else {
            ids
        }
    }

    /// Gold tag indexes, `[type][token]`; `None` for labels outside the vocabulary.
    pub fn gold_tags(&self, sentence: &Sentence) -> Vec<Vec<Option<usize>>> {
        self.tags
            .iter()
            .map(|tt| (0..sentence.len()).map(|k| tt.labels.get(tt.value(sentence, k))).collect())
            .collect()
    }
}
