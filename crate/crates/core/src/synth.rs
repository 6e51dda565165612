//! A deterministic generator of small German-like treebanks in the Negra
//! annotation style: verb-second clauses with discontinuous VPs (fronted
//! objects and adverbs), extraposed PPs, subordinate and coordinated
//! clauses, head-final noun phrases, full morphology, and sentence-final
//! punctuation attached to the virtual root.
//!
//! Used as fixture data by tests, benchmarks and the CLI `synth` command.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::{assign_heads, HeadRuleTable};
use crate::token_set::TokenSet;
use crate::treebank::{default_morph, Constituent, Sentence, Token, Tree};

struct Word {
    form: String,
    pos: &'static str,
    morph: Vec<(&'static str, &'static str)>,
    /// Enclosing phrase ids, innermost first.
    path: Vec<usize>,
}

type Phrase = Vec<Word>;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Case {
    Nom,
    Acc,
    Dat,
}

impl Case {
    fn name(self) -> &'static str {
        match self {
            Case::Nom => "nom",
            Case::Acc => "acc",
            Case::Dat => "dat",
        }
    }
}

const NOUNS: &[(&str, &str, &str)] = &[
    // (singular, plural, gender)
    ("Hund", "Hunde", "masc"),
    ("Mann", "Männer", "masc"),
    ("Lehrer", "Lehrer", "masc"),
    ("Wagen", "Wagen", "masc"),
    ("Brief", "Briefe", "masc"),
    ("Katze", "Katzen", "fem"),
    ("Frau", "Frauen", "fem"),
    ("Stadt", "Städte", "fem"),
    ("Zeitung", "Zeitungen", "fem"),
    ("Kind", "Kinder", "neut"),
    ("Haus", "Häuser", "neut"),
    ("Buch", "Bücher", "neut"),
    ("Auto", "Autos", "neut"),
];
const NAMES: &[&str] = &["Anna", "Peter", "Maria", "Klaus", "Berlin"];
const ADJECTIVES: &[&str] = &["alt", "neu", "groß", "klein", "rot", "schön"];
const ADVERBS: &[&str] = &["gestern", "heute", "oft", "dort", "leider"];
const PREPOSITIONS: &[&str] = &["mit", "aus", "bei", "von", "nach"];
// (3sg present, 3pl present, participle)
const VERBS: &[(&str, &str, &str)] = &[
    ("sieht", "sehen", "gesehen"),
    ("kauft", "kaufen", "gekauft"),
    ("liest", "lesen", "gelesen"),
    ("findet", "finden", "gefunden"),
    ("sucht", "suchen", "gesucht"),
    ("trifft", "treffen", "getroffen"),
];
const SUBORDINATORS: &[&str] = &["weil", "dass", "obwohl"];
const CONJUNCTIONS: &[&str] = &["und", "aber"];

fn article(case: Case, gender: &str, plural: bool) -> &'static str {
    if plural {
        return match case {
            Case::Dat => "den",
            _ => "die",
        };
    }
    match (case, gender) {
        (Case::Nom, "masc") => "der",
        (Case::Acc, "masc") => "den",
        (Case::Dat, "masc") | (Case::Dat, "neut") => "dem",
        (Case::Dat, _) => "der",
        (_, "fem") => "die",
        _ => "das",
    }
}

struct Generator {
    rng: ChaCha8Rng,
    next_id: usize,
    labels: Vec<&'static str>,
}

impl Generator {
    fn node(&mut self, label: &'static str, children: Vec<Phrase>) -> (usize, Phrase) {
        let id = self.next_id;
        self.next_id += 1;
        self.labels.push(label);
        let mut words = Vec::new();
        for phrase in children {
            for mut w in phrase {
                w.path.push(id);
                words.push(w);
            }
        }
        (id, words)
    }

    fn wrap(&mut self, label: &'static str, children: Vec<Phrase>) -> Phrase {
        self.node(label, children).1
    }

    fn word(form: impl Into<String>, pos: &'static str, morph: Vec<(&'static str, &'static str)>) -> Phrase {
        vec![Word {
            form: form.into(),
            pos,
            morph,
            path: Vec::new(),
        }]
    }

    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        *xs.choose(&mut self.rng).expect("nonempty")
    }

    /// A noun phrase, with a postmodifying PP returned separately when
    /// `extraposable` is set (the caller decides where it goes).
    fn np(&mut self, case: Case, extraposable: bool) -> (Phrase, Option<Phrase>) {
        if self.rng.gen_bool(0.15) {
            let name = self.pick(NAMES);
            let nom = vec![("case", case.name()), ("number", "sg")];
            let w = Generator::word(name, "NE", nom);
            return (self.wrap("NP", vec![w]), None);
        }
        let (sg, pl, gender) = self.pick(NOUNS);
        let plural = self.rng.gen_bool(0.3);
        let number = if plural { "pl" } else { "sg" };
        let agr = vec![("case", case.name()), ("gender", gender), ("number", number)];
        let mut parts = vec![Generator::word(article(case, gender, plural), "ART", agr.clone())];
        if self.rng.gen_bool(0.35) {
            let adj = self.pick(ADJECTIVES);
            let suffix = if case == Case::Nom && !plural { "e" } else { "en" };
            let mut m = agr.clone();
            m.push(("degree", "pos"));
            parts.push(Generator::word(format!("{}{}", adj, suffix), "ADJA", m));
        }
        parts.push(Generator::word(if plural { pl } else { sg }, "NN", agr));
        let pp = if self.rng.gen_bool(if extraposable { 0.45 } else { 0.15 }) {
            Some(self.pp())
        } else {
            None
        };
        match pp {
            Some(pp) if extraposable => {
                // Build the NP over both pieces; the caller receives them apart.
                let id = self.next_id;
                let mut all = parts;
                let n_core: usize = all.iter().map(Vec::len).sum();
                all.push(pp);
                let mut words = self.wrap("NP", all);
                let tail = words.split_off(n_core);
                debug_assert!(words.iter().chain(&tail).all(|w| w.path.contains(&id)));
                (words, Some(tail))
            }
            Some(pp) => {
                parts.push(pp);
                (self.wrap("NP", parts), None)
            }
            None => (self.wrap("NP", parts), None),
        }
    }

    fn pp(&mut self) -> Phrase {
        let p = self.pick(PREPOSITIONS);
        let prep = Generator::word(p, "APPR", vec![]);
        let (np, _) = self.np(Case::Dat, false);
        self.wrap("PP", vec![prep, np])
    }

    fn adverb(&mut self) -> Phrase {
        let a = self.pick(ADVERBS);
        let w = Generator::word(a, "ADV", vec![]);
        // Some adverbs always project a phrase, the others never do.
        if a.len().is_multiple_of(2) {
            self.wrap("AVP", vec![w])
        } else {
            w
        }
    }

    fn verb_morph(plural: bool) -> Vec<(&'static str, &'static str)> {
        let number = if plural { "pl" } else { "sg" };
        vec![("mood", "ind"), ("number", number), ("person", "3"), ("tense", "pres")]
    }

    fn subject_is_plural(subj: &Phrase) -> bool {
        subj.iter().any(|w| w.pos != "APPR" && w.morph.contains(&("number", "pl")) && w.morph.contains(&("case", "nom")))
    }

    /// A main clause; a PP extraposed from the subject goes to its end.
    fn main_clause(&mut self) -> Phrase {
        let (subj, subj_tail) = self.np(Case::Nom, true);
        let plural = Generator::subject_is_plural(&subj);
        let (obj, _) = self.np(Case::Acc, false);
        let (fin, _, part) = self.pick(VERBS);
        let (sg_aux, pl_aux) = ("hat", "haben");
        let parts = match self.rng.gen_range(0..5) {
            0 => {
                // Simple verb-second: subject, finite verb, object.
                let v = Generator::word(if plural { fin_plural(fin) } else { fin.to_string() }, "VVFIN", Generator::verb_morph(plural));
                let mut parts = vec![subj, v, obj];
                if self.rng.gen_bool(0.3) {
                    parts.push(self.adverb());
                }
                parts
            }
            1 => {
                // Perfect with a contiguous VP.
                let aux = Generator::word(if plural { pl_aux } else { sg_aux }, "VAFIN", Generator::verb_morph(plural));
                let pp = Generator::word(part, "VVPP", vec![]);
                let vp = self.wrap("VP", vec![obj, pp]);
                vec![subj, aux, vp]
            }
            2 => {
                // Fronted object: the VP is split by the auxiliary and subject.
                let aux = Generator::word(if plural { pl_aux } else { sg_aux }, "VAFIN", Generator::verb_morph(plural));
                let pp = Generator::word(part, "VVPP", vec![]);
                let (vp_id, vp) = self.node("VP", vec![obj, pp]);
                let (front, back) = split_first_child(vp, vp_id);
                vec![front, aux, subj, back]
            }
            3 => {
                // Fronted adverb inside the VP.
                let adv = self.adverb();
                let aux = Generator::word(if plural { pl_aux } else { sg_aux }, "VAFIN", Generator::verb_morph(plural));
                let pp = Generator::word(part, "VVPP", vec![]);
                let (vp_id, vp) = self.node("VP", vec![adv, obj, pp]);
                let (front, back) = split_first_child(vp, vp_id);
                vec![front, aux, subj, back]
            }
            _ => {
                // Adverb-initial verb-second with the subject after the verb.
                let adv = self.adverb();
                let v = Generator::word(if plural { fin_plural(fin) } else { fin.to_string() }, "VVFIN", Generator::verb_morph(plural));
                vec![adv, v, subj, obj]
            }
        };
        self.with_order("S", parts, subj_tail)
    }

    /// Wraps `parts` (already in surface order) in `label`, then appends the
    /// extraposed tail after them as part of the same clause.
    fn with_order(&mut self, label: &'static str, mut parts: Vec<Phrase>, tail: Option<Phrase>) -> Phrase {
        if let Some(t) = tail {
            parts.push(t);
        }
        self.wrap(label, parts)
    }

    /// A verb-final subordinate clause.
    fn subordinate_clause(&mut self) -> Phrase {
        let c = self.pick(SUBORDINATORS);
        let comp = Generator::word(c, "KOUS", vec![]);
        let (subj, _) = self.np(Case::Nom, false);
        let plural = Generator::subject_is_plural(&subj);
        let (obj, _) = self.np(Case::Acc, false);
        let (fin, _, _) = self.pick(VERBS);
        let v = Generator::word(if plural { fin_plural(fin) } else { fin.to_string() }, "VVFIN", Generator::verb_morph(plural));
        self.wrap("S", vec![comp, subj, obj, v])
    }

    fn sentence(&mut self) -> Vec<Word> {
        self.next_id = 0;
        self.labels.clear();
        let roll = self.rng.gen_range(0..10);
        let mut body = if roll < 6 {
            self.main_clause()
        } else if roll < 8 {
            // Subordinate clause inside the main clause; the comma hangs off
            // the virtual root, which makes the clause discontinuous.
            let mut words = self.main_clause();
            let clause = *words[0].path.last().expect("clause id");
            words.extend(Generator::word(",", "$,", vec![]));
            for mut w in self.subordinate_clause() {
                w.path.push(clause);
                words.push(w);
            }
            words
        } else {
            let a = self.main_clause();
            let c = self.pick(CONJUNCTIONS);
            let conj = Generator::word(c, "KON", vec![]);
            let b = self.main_clause();
            self.wrap("CS", vec![a, conj, b])
        };
        if self.rng.gen_bool(0.9) {
            body.extend(Generator::word(".", "$.", vec![]));
        }
        body
    }

    fn tree(&mut self) -> Tree {
        let words = self.sentence();
        let mut tokens = Vec::with_capacity(words.len());
        let mut yields = vec![TokenSet::new(); self.next_id];
        for (k, w) in words.iter().enumerate() {
            let mut t = Token::new(k + 1, w.form.clone(), w.pos);
            let mut morph = default_morph();
            for (a, v) in &w.morph {
                morph.insert(a.to_string(), v.to_string());
            }
            t.morph = morph;
            tokens.push(t);
            for &id in &w.path {
                yields[id].insert(k + 1);
            }
        }
        let constituents = yields
            .into_iter()
            .zip(&self.labels)
            .filter(|(y, _)| !y.is_empty())
            .map(|(y, l)| Constituent::new(*l, y))
            .collect();
        let mut tree = Tree::new(Sentence::new(tokens), constituents);
        tree.ensure_root();
        tree
    }
}

fn fin_plural(fin: &str) -> String {
    VERBS.iter().find(|v| v.0 == fin).map(|v| v.1.to_string()).unwrap_or_else(|| fin.to_string())
}

/// Splits the words of phrase `id` into its first direct child and the rest.
fn split_first_child(mut words: Phrase, id: usize) -> (Phrase, Phrase) {
    let first_child = |w: &Word| {
        let pos = w.path.iter().position(|&p| p == id).expect("inside phrase");
        if pos == 0 {
            None
        } else {
            Some(w.path[pos - 1])
        }
    };
    let key = first_child(&words[0]);
    let split = if key.is_none() {
        1
    } else {
        words.iter().position(|w| first_child(w) != key).unwrap_or(words.len())
    };
    let back = words.split_off(split);
    (words, back)
}

/// Generates `count` trees from `seed`, with heads assigned by the Negra
/// head table.
pub fn generate(count: usize, seed: u64) -> Vec<Tree> {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(seed),
        next_id: 0,
        labels: Vec::new(),
    };
    let table = HeadRuleTable::negra();
    (0..count).map(|_| assign_heads(&g.tree(), &table)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::{parse_export, validate_tree, write_export};

    #[test]
    fn trees_are_valid_and_varied() {
        let trees = generate(300, 1);
        for t in &trees {
            assert_eq!(validate_tree(t), Ok(()), "{:?}", t.sentence.forms().collect::<Vec<_>>());
            assert!(t.constituents.iter().all(|c| c.head.is_some()));
        }
        let disc = trees.iter().filter(|t| t.has_discontinuity()).count();
        assert!(disc * 3 > trees.len(), "only {} discontinuous trees", disc);
        let lengths: Vec<usize> = trees.iter().map(Tree::len).collect();
        assert!(lengths.iter().min() < Some(&6) && lengths.iter().max() > Some(&15));
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(generate(20, 5), generate(20, 5));
        assert_ne!(generate(20, 5), generate(20, 6));
    }

    #[test]
    fn export_round_trip() {
        let trees = generate(50, 2);
        assert_eq!(parse_export(&write_export(&trees)).unwrap(), trees);
    }
}
