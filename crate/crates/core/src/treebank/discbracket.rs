//! Single-line discontinuous bracket notation, as used by disco-dop:
//! `(S (VP (VB 0=is) (JJ 2=rich)) (NP (NN 1=John)))`.
//!
//! Terminals are written `index=form` with 0-based indexes. A bracket whose
//! only child is a terminal is a preterminal and carries the POS tag.

use super::{Constituent, Sentence, Token, Tree, TreebankError};
use crate::token_set::TokenSet;

enum Item {
    Node { label: String, children: Vec<Item> },
    Terminal { index: usize, form: String },
}

pub fn parse_discbracket(text: &str) -> Result<Vec<Tree>, TreebankError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| parse_line(l, k + 1))
        .collect()
}

fn parse_line(line: &str, lineno: usize) -> Result<Tree, TreebankError> {
    let err = |message: String| TreebankError::Bracket { line: lineno, message };
    let tokens = lex(line);
    let mut pos = 0;
    let root = parse_item(&tokens, &mut pos).map_err(err)?;
    if pos != tokens.len() {
        return Err(err("unbalanced brackets: trailing material".into()));
    }
    if !matches!(root, Item::Node { .. }) {
        return Err(err("expected a bracketed tree".into()));
    }

    let mut terminals: Vec<Option<Token>> = Vec::new();
    let mut constituents = Vec::new();
    collect(&root, None, &mut terminals, &mut constituents).map_err(err)?;
    let mut toks = Vec::with_capacity(terminals.len());
    for (k, t) in terminals.into_iter().enumerate() {
        toks.push(t.ok_or_else(|| err(format!("missing terminal index {}", k)))?);
    }
    let mut tree = Tree::new(Sentence::new(toks), constituents);
    tree.ensure_root();
    Ok(tree)
}

fn lex(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match ch {
            '(' | ')' => {
                if let Some(s) = start.take() {
                    out.push(&line[s..i]);
                }
                out.push(&line[i..i + 1]);
            }
            c if c.is_whitespace() => {
                if let Some(s) = start.take() {
                    out.push(&line[s..i]);
                }
            }
            _ => {
                if start.is_none() {
                    start = Some(i);
                }
            }
        }
    }
    if let Some(s) = start {
        out.push(&line[s..]);
    }
    out
}

fn parse_item(tokens: &[&str], pos: &mut usize) -> Result<Item, String> {
    match tokens.get(*pos) {
        None => Err("unbalanced brackets: unexpected end of line".into()),
        Some(&"(") => {
            *pos += 1;
            let label = match tokens.get(*pos) {
                Some(&t) if t != "(" && t != ")" => t.to_string(),
                _ => return Err("bracket without label".into()),
            };
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err("unbalanced brackets: missing ')'".into()),
                    Some(&")") => {
                        *pos += 1;
                        break;
                    }
                    _ => children.push(parse_item(tokens, pos)?),
                }
            }
            if children.is_empty() {
                return Err(format!("empty bracket ({})", label));
            }
            Ok(Item::Node { label, children })
        }
        Some(&")") => Err("unbalanced brackets: unexpected ')'".into()),
        Some(t) => {
            *pos += 1;
            let (idx, form) = t.split_once('=').ok_or_else(|| format!("terminal {:?} lacks an index", t))?;
            let index = idx.parse().map_err(|_| format!("bad terminal index {:?}", idx))?;
            Ok(Item::Terminal {
                index,
                form: form.to_string(),
            })
        }
    }
}

fn collect(
    item: &Item,
    pos_tag: Option<&str>,
    terminals: &mut Vec<Option<Token>>,
    constituents: &mut Vec<Constituent>,
) -> Result<TokenSet, String> {
    match item {
        Item::Terminal { index, form } => {
            if terminals.len() <= *index {
                terminals.resize(*index + 1, None);
            }
            if terminals[*index].is_some() {
                return Err(format!("duplicate terminal index {}", index));
            }
            terminals[*index] = Some(Token::new(index + 1, form.clone(), pos_tag.unwrap_or("--")));
            Ok(TokenSet::singleton(index + 1))
        }
        Item::Node { label, children } => {
            if let [child @ Item::Terminal { .. }] = children.as_slice() {
                return collect(child, Some(label), terminals, constituents);
            }
            // Reserve the slot first so unary chains stay top-down.
            let slot = constituents.len();
            constituents.push(Constituent::new(label.clone(), TokenSet::new()));
            let mut span = TokenSet::new();
            for child in children {
                span = span.union(&collect(child, None, terminals, constituents)?);
            }
            constituents[slot].tokens = span.clone();
            Ok(span)
        }
    }
}

/// One tree per line. Heads are not representable and are dropped.
pub fn write_discbracket(trees: &[Tree]) -> String {
    let mut out = String::new();
    for tree in trees {
        let kids = tree.children();
        if tree.constituents.is_empty() {
            for tok in &tree.sentence.tokens {
                write_token(&mut out, tok);
            }
        } else {
            write_node(&mut out, tree, &kids, 0);
        }
        out.push('\n');
    }
    out
}

fn write_node(out: &mut String, tree: &Tree, kids: &[Vec<super::Child>], j: usize) {
    out.push('(');
    out.push_str(&tree.constituents[j].label);
    for child in &kids[j] {
        out.push(' ');
        match *child {
            super::Child::Constituent(c) => write_node(out, tree, kids, c),
            super::Child::Token(t) => write_token(out, tree.sentence.token(t)),
        }
    }
    out.push(')');
}

fn write_token(out: &mut String, tok: &Token) {
    let form = tok.form.replace('(', "-LRB-").replace(')', "-RRB-");
    out.push_str(&format!("({} {}={})", tok.pos, tok.index - 1, form));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::tests::dislocation_tree;
    use crate::treebank::VIRTUAL_ROOT;

    #[test]
    fn preterminals_carry_pos() {
        let t = &parse_discbracket("(S (NP (PPER 0=he)) (VP (VVFIN 1=sleeps)))").unwrap()[0];
        let got: Vec<(String, Vec<usize>)> =
            t.constituents.iter().map(|c| (c.label.clone(), c.tokens.to_vec())).collect();
        assert_eq!(
            got,
            vec![("S".into(), vec![1, 2]), ("NP".into(), vec![1]), ("VP".into(), vec![2])]
        );
        assert_eq!(t.sentence.token(2).pos, "VVFIN");
    }

    #[test]
    fn bare_terminals_under_constituents() {
        // A bracket holding a single terminal is read as its POS tag.
        let t = &parse_discbracket("(S (NP 0=he) (VP 1=sleeps))").unwrap()[0];
        assert_eq!(t.constituents.len(), 1);
        assert_eq!(t.sentence.token(1).pos, "NP");
        let t = &parse_discbracket("(S 0=he (VP 1=sleeps))").unwrap()[0];
        assert_eq!(t.sentence.token(1).pos, "--");
    }

    #[test]
    fn dislocation_tree_round_trip() {
        let t = dislocation_tree();
        let text = write_discbracket(&[t.clone()]);
        assert_eq!(
            text,
            "(S (VP (NP (DT 0=An) (JJ 1=excellent) (NN 2=environment) (NN 3=actor)) (VBZ 5=is)) (NP (PRP 4=he)))\n"
        );
        assert_eq!(parse_discbracket(&text).unwrap(), vec![t]);
    }

    #[test]
    fn malformed_input() {
        for bad in [
            "(S (NP (PPER 0=he)) (VP (VVFIN 1=sleeps))",
            "(S (NP (PPER 0=he)))) ",
            "(S (A 0=a) (B 0=b))",
            "(S (A 0=a) (B 2=b))",
            "(S (A a))",
        ] {
            assert!(
                matches!(parse_discbracket(bad), Err(TreebankError::Bracket { line: 1, .. })),
                "{}",
                bad
            );
        }
    }

    #[test]
    fn lone_preterminal_gets_virtual_root() {
        let t = &parse_discbracket("(ITJ 0=Hi)").unwrap()[0];
        assert_eq!(t.constituents.len(), 1);
        assert_eq!(t.constituents[0].label, VIRTUAL_ROOT);
        assert_eq!(write_discbracket(&[t.clone()]), "(VROOT (ITJ 0=Hi))\n");
    }
}
