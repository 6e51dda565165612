//! NEGRA export format (versions 3 and 4).

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{default_morph, Child, Constituent, Sentence, Token, Tree, TreebankError, UNDEF, VIRTUAL_ROOT};
use crate::token_set::TokenSet;

/// Column layout of an export file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    /// `word tag morph edge parent`
    #[default]
    V3,
    /// `word lemma tag morph edge parent`
    V4,
}

const HEAD_EDGE: &str = "HD";
const FIRST_NODE_ID: usize = 500;

/// Reads every `#BOS`/`#EOS` block. The column layout is taken from a
/// `#FORMAT` line when present and defaults to version 3.
pub fn parse_export(text: &str) -> Result<Vec<Tree>, TreebankError> {
    parse_export_with(text, None)
}

pub fn parse_export_with(text: &str, format: Option<ExportFormat>) -> Result<Vec<Tree>, TreebankError> {
    let mut format = format;
    let forced = format.is_some();
    let mut trees = Vec::new();
    let mut block: Option<Block> = None;
    let mut in_table = false;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with("%%") {
            continue;
        }
        let mut fields = line.split_whitespace();
        let first = fields.next().unwrap_or("");
        match first {
            "#FORMAT" => {
                if !forced {
                    format = match fields.next() {
                        Some("4") => Some(ExportFormat::V4),
                        _ => Some(ExportFormat::V3),
                    };
                }
            }
            "#BOT" => in_table = true,
            "#EOT" => in_table = false,
            _ if in_table => {}
            "#BOS" => {
                if let Some(b) = &block {
                    return Err(b.error(lineno, "#BOS inside an open sentence"));
                }
                let id = fields.next().unwrap_or("?").to_string();
                block = Some(Block::new(id, lineno));
            }
            "#EOS" => {
                let b = block.take().ok_or_else(|| TreebankError::Export {
                    sentence: fields.next().unwrap_or("?").to_string(),
                    line: lineno,
                    message: "#EOS without #BOS".into(),
                })?;
                trees.push(b.finish(lineno)?);
            }
            _ => {
                let b = block.as_mut().ok_or_else(|| TreebankError::Export {
                    sentence: "?".into(),
                    line: lineno,
                    message: "line outside a sentence block".into(),
                })?;
                b.push_line(line, lineno, format.unwrap_or_default())?;
            }
        }
    }
    if let Some(b) = block {
        return Err(b.error(b.start, "missing #EOS"));
    }
    Ok(trees)
}

struct Node {
    label: String,
    edge: String,
    parent: usize,
    line: usize,
}

struct Block {
    id: String,
    start: usize,
    tokens: Vec<Token>,
    token_links: Vec<(String, usize, usize)>,
    nodes: BTreeMap<usize, Node>,
}

impl Block {
    fn new(id: String, start: usize) -> Self {
        Block {
            id,
            start,
            tokens: Vec::new(),
            token_links: Vec::new(),
            nodes: BTreeMap::new(),
        }
    }

    fn error(&self, line: usize, message: impl Into<String>) -> TreebankError {
        TreebankError::Export {
            sentence: self.id.clone(),
            line,
            message: message.into(),
        }
    }

    fn push_line(&mut self, line: &str, lineno: usize, format: ExportFormat) -> Result<(), TreebankError> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (word, rest) = (fields[0], &fields[1..]);
        let rest = match format {
            ExportFormat::V3 => rest,
            ExportFormat::V4 => rest.get(1..).unwrap_or(&[]),
        };
        if rest.len() < 4 {
            return Err(self.error(lineno, format!("expected at least {} columns", fields.len() - rest.len() + 4)));
        }
        let (tag, morph, edge, parent) = (rest[0], rest[1], rest[2], rest[3]);
        let parent: usize = parent
            .parse()
            .map_err(|_| self.error(lineno, format!("bad parent pointer {:?}", parent)))?;
        if parent != 0 && parent < FIRST_NODE_ID {
            return Err(self.error(lineno, format!("bad parent pointer {}", parent)));
        }

        if let Some(num) = word.strip_prefix('#') {
            let id: usize = num
                .parse()
                .ok()
                .filter(|&id| id >= FIRST_NODE_ID)
                .ok_or_else(|| self.error(lineno, format!("bad node id {:?}", word)))?;
            if self.nodes.contains_key(&id) {
                return Err(self.error(lineno, format!("duplicate node #{}", id)));
            }
            self.nodes.insert(
                id,
                Node {
                    label: tag.to_string(),
                    edge: edge.to_string(),
                    parent,
                    line: lineno,
                },
            );
        } else {
            if !self.nodes.is_empty() {
                return Err(self.error(lineno, "terminal after nonterminal lines"));
            }
            let index = self.tokens.len() + 1;
            let mut token = Token::new(index, word, tag);
            token.morph = parse_morph(morph);
            self.tokens.push(token);
            self.token_links.push((edge.to_string(), parent, lineno));
        }
        Ok(())
    }

    fn finish(self, end: usize) -> Result<Tree, TreebankError> {
        if self.tokens.is_empty() {
            return Err(self.error(end, "sentence without terminals"));
        }
        let mut children: HashMap<usize, Vec<(Child, bool)>> = HashMap::new();
        for (k, (edge, parent, line)) in self.token_links.iter().enumerate() {
            if *parent != 0 && !self.nodes.contains_key(parent) {
                return Err(self.error(*line, format!("dangling parent pointer #{}", parent)));
            }
            children.entry(*parent).or_default().push((Child::Token(k + 1), edge == HEAD_EDGE));
        }
        for (&id, node) in &self.nodes {
            if node.parent != 0 && !self.nodes.contains_key(&node.parent) {
                return Err(self.error(node.line, format!("dangling parent pointer #{}", node.parent)));
            }
            children
                .entry(node.parent)
                .or_default()
                .push((Child::Constituent(id), node.edge == HEAD_EDGE));
        }

        // Resolve yields and heads bottom-up, detecting cycles.
        let mut resolved: HashMap<usize, (TokenSet, Option<usize>)> = HashMap::new();
        for &id in self.nodes.keys() {
            self.resolve(id, &children, &mut resolved, &mut Vec::new())?;
        }

        // Pre-order from the top so unary chains are listed top-down.
        let mut constituents = Vec::new();
        let mut stack: Vec<usize> = children
            .get(&0)
            .map(|v| v.iter().filter_map(|(c, _)| node_id(*c)).collect())
            .unwrap_or_default();
        stack.reverse();
        while let Some(id) = stack.pop() {
            let (tokens, head) = resolved[&id].clone();
            constituents.push(Constituent {
                label: self.nodes[&id].label.clone(),
                tokens,
                head,
            });
            if let Some(kids) = children.get(&id) {
                stack.extend(kids.iter().rev().filter_map(|(c, _)| node_id(*c)));
            }
        }
        if constituents.len() != self.nodes.len() {
            return Err(self.error(end, "nonterminal not reachable from the root"));
        }

        let n = self.tokens.len();
        let top = children.get(&0).map(Vec::as_slice).unwrap_or(&[]);
        let single_root = top.len() == 1
            && matches!(top[0].0, Child::Constituent(id) if resolved[&id].0 == TokenSet::range(1, n));
        if !single_root {
            constituents.insert(0, Constituent::new(VIRTUAL_ROOT, TokenSet::range(1, n)));
        }
        Ok(Tree::new(Sentence::new(self.tokens), constituents))
    }

    fn resolve(
        &self,
        id: usize,
        children: &HashMap<usize, Vec<(Child, bool)>>,
        resolved: &mut HashMap<usize, (TokenSet, Option<usize>)>,
        path: &mut Vec<usize>,
    ) -> Result<(TokenSet, Option<usize>), TreebankError> {
        if let Some(r) = resolved.get(&id) {
            return Ok(r.clone());
        }
        if path.contains(&id) {
            return Err(self.error(self.nodes[&id].line, format!("cycle through node #{}", id)));
        }
        path.push(id);
        let kids = children
            .get(&id)
            .ok_or_else(|| self.error(self.nodes[&id].line, format!("node #{} has no children", id)))?;
        let mut tokens = TokenSet::new();
        let mut head = None;
        for &(child, is_head) in kids {
            let (t, h) = match child {
                Child::Token(t) => (TokenSet::singleton(t), Some(t)),
                Child::Constituent(c) => self.resolve(c, children, resolved, path)?,
            };
            if is_head && head.is_none() {
                head = h;
            }
            tokens = tokens.union(&t);
        }
        path.pop();
        resolved.insert(id, (tokens.clone(), head));
        Ok((tokens, head))
    }
}

fn node_id(c: Child) -> Option<usize> {
    match c {
        Child::Constituent(id) => Some(id),
        Child::Token(_) => None,
    }
}

fn parse_morph(column: &str) -> BTreeMap<String, String> {
    let mut morph = default_morph();
    if column == "--" || column == "_" {
        return morph;
    }
    for part in column.split('|') {
        if let Some((k, v)) = part.split_once('=') {
            morph.insert(k.to_lowercase(), v.to_string());
        }
    }
    morph
}

fn format_morph(morph: &BTreeMap<String, String>) -> String {
    let parts: Vec<String> = morph
        .iter()
        .filter(|(_, v)| v.as_str() != UNDEF)
        .map(|(k, v)| format!("{}={}", k, v))
        .collect();
    if parts.is_empty() {
        "--".to_string()
    } else {
        parts.join("|")
    }
}

pub fn write_export(trees: &[Tree]) -> String {
    write_export_with(trees, ExportFormat::V3)
}

/// Writes trees as export blocks numbered from 1. Nonterminals are numbered
/// from #500 bottom-up; a virtual root is left implicit when the reader
/// would reconstruct it.
pub fn write_export_with(trees: &[Tree], format: ExportFormat) -> String {
    let mut out = String::new();
    if format == ExportFormat::V4 && !trees.is_empty() {
        out.push_str("#FORMAT 4\n");
    }
    for (k, tree) in trees.iter().enumerate() {
        write_block(&mut out, k + 1, tree, format);
    }
    out
}

fn write_block(out: &mut String, id: usize, tree: &Tree, format: ExportFormat) {
    let parents = tree.parents();
    let token_parents = tree.token_parents();
    let kids = tree.children();
    let cs = &tree.constituents;

    let implicit_root = cs.first().is_some_and(|root| {
        root.label == VIRTUAL_ROOT && root.head.is_none() && {
            let top = &kids[0];
            !(top.len() == 1 && matches!(top[0], Child::Constituent(j) if cs[j].tokens == root.tokens))
        }
    });

    // Bottom-up numbering: the last constituent in canonical order first.
    let skip = usize::from(implicit_root);
    let mut node_ids = vec![0usize; cs.len()];
    for (rank, j) in (skip..cs.len()).rev().enumerate() {
        node_ids[j] = FIRST_NODE_ID + rank;
    }
    let parent_id = |p: Option<usize>| match p {
        Some(p) if !(implicit_root && p == 0) => node_ids[p],
        _ => 0,
    };

    let _ = writeln!(out, "#BOS {}", id);
    let lemma = |out: &mut String| {
        if format == ExportFormat::V4 {
            out.push_str("\t--");
        }
    };
    for tok in &tree.sentence.tokens {
        let p = token_parents[tok.index - 1];
        let edge = match p {
            Some(p) if cs[p].head == Some(tok.index) => HEAD_EDGE,
            _ => "--",
        };
        out.push_str(&tok.form);
        lemma(out);
        let _ = writeln!(out, "\t{}\t{}\t{}\t{}", tok.pos, format_morph(&tok.morph), edge, parent_id(p));
    }
    for j in (skip..cs.len()).rev() {
        let c = &cs[j];
        let p = parents[j];
        let edge = match p.and_then(|p| cs[p].head) {
            Some(h) if c.tokens.contains(h) => HEAD_EDGE,
            _ => "--",
        };
        let _ = write!(out, "#{}", node_ids[j]);
        lemma(out);
        let _ = writeln!(out, "\t{}\t--\t{}\t{}", c.label, edge, parent_id(p));
    }
    let _ = writeln!(out, "#EOS {}", id);
}
