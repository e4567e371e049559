//! Newick reading and writing.
//!
//! A Newick string describes a tree drawn from some node; we only keep its
//! bipartitions. Every non-top node contributes the split "leaves below this
//! node", normalized so the root leaf's side is dropped. Nodes of degree two
//! (including a bifurcating top node) produce the same split twice and their
//! lengths are summed.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fmt::num;
use crate::split::{LeafSet, Split};
use crate::tree::{CladeTree, PhyloTree};

/// What to do with an edge that carries no `:length`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum MissingLength {
    #[default]
    Error,
    Default(f64),
}

/// How leaves are mapped to indices when parsing.
#[derive(Clone, Debug, Default)]
pub struct NewickOptions {
    /// Label of the leaf that becomes index 0. When `None` and no leaf set is
    /// given, the first label in sort order is used.
    pub root_label: Option<String>,
    /// Pin the index order; labels must match exactly.
    pub leaves: Option<Arc<LeafSet>>,
    pub missing_length: MissingLength,
}

impl NewickOptions {
    pub fn with_root(root_label: impl Into<String>) -> Self {
        NewickOptions {
            root_label: Some(root_label.into()),
            ..Default::default()
        }
    }

    pub fn with_leaves(leaves: Arc<LeafSet>) -> Self {
        NewickOptions {
            leaves: Some(leaves),
            ..Default::default()
        }
    }
}

/// Parses one tree, mapping `root_label` to leaf index 0.
pub fn parse_newick(text: &str, root_label: &str) -> Result<PhyloTree> {
    parse_newick_with(text, &NewickOptions::with_root(root_label))
}

pub fn parse_newick_with(text: &str, opts: &NewickOptions) -> Result<PhyloTree> {
    let raw = Parser::new(text).parse()?;
    let leaves = match &opts.leaves {
        Some(l) => {
            check_taxa(&raw, l)?;
            l.clone()
        }
        None => Arc::new(leaf_set_for(&raw, opts.root_label.as_deref())?),
    };
    raw.into_tree(leaves, opts.missing_length)
}

/// Parses a file with one tree per line. Blank lines and lines starting with
/// `#` are skipped. All trees share the leaf set of the first one (or the one
/// in `opts`). Errors carry the 1-based line number.
pub fn parse_newick_lines(content: &str, opts: &NewickOptions) -> Result<Vec<PhyloTree>> {
    let mut leaves = opts.leaves.clone();
    let mut trees = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = || -> Result<PhyloTree> {
            let raw = Parser::new(line).parse()?;
            let l = match &leaves {
                Some(l) => {
                    check_taxa(&raw, l)?;
                    l.clone()
                }
                None => Arc::new(leaf_set_for(&raw, opts.root_label.as_deref())?),
            };
            raw.into_tree(l, opts.missing_length)
        };
        let tree = parse().map_err(|e| e.at_line(i + 1))?;
        if leaves.is_none() {
            leaves = Some(tree.leaves().clone());
        }
        trees.push(tree);
    }
    Ok(trees)
}

/// Writes `tree` as a Newick string drawn from the node adjacent to the root
/// leaf. Lengths use 12 significant digits; absent pendant edges are written
/// with length 0.
pub fn write_newick(tree: &PhyloTree) -> String {
    let leaves = tree.leaves();
    let clades = CladeTree::of_tree(tree);
    let mut out = String::from("(");
    out.push_str(&quote(leaves.root_label()));
    out.push(':');
    out.push_str(&num(tree.length(leaves.root_split())));
    let top = clades.root;
    if clades.children[top].is_empty() {
        // One non-root leaf: the full clade is that leaf, and its split is
        // already written as the root's edge.
        out.push(',');
        out.push_str(&quote(leaves.label(leaves.n())));
        out.push_str(":0");
    }
    for &c in &clades.children[top] {
        out.push(',');
        write_clade(tree, &clades, c, &mut out);
    }
    out.push_str(");");
    out
}

fn write_clade(tree: &PhyloTree, clades: &CladeTree, node: usize, out: &mut String) {
    let mask = clades.masks[node];
    if clades.children[node].is_empty() {
        out.push_str(&quote(tree.leaves().label(mask.trailing_zeros() as usize)));
    } else {
        out.push('(');
        for (k, &c) in clades.children[node].iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write_clade(tree, clades, c, out);
        }
        out.push(')');
    }
    out.push(':');
    out.push_str(&num(tree.length(Split::from_bits(mask))));
}

fn quote(label: &str) -> String {
    let plain = label
        .chars()
        .all(|c| !c.is_whitespace() && !"()[]':;,".contains(c));
    if plain {
        label.to_string()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

struct Node {
    label: Option<String>,
    length: Option<f64>,
    /// Byte offset of the node, for error messages.
    position: usize,
    children: Vec<usize>,
}

struct RawTree {
    nodes: Vec<Node>,
    top: usize,
}

impl RawTree {
    fn leaf_labels(&self) -> impl Iterator<Item = &str> {
        self.nodes
            .iter()
            .filter(|n| n.children.is_empty())
            .map(|n| n.label.as_deref().unwrap_or(""))
    }

    fn into_tree(self, leaves: Arc<LeafSet>, missing: MissingLength) -> Result<PhyloTree> {
        // Post-order: children always have larger indices than their parent.
        let mut masks = vec![0u64; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            let node = &self.nodes[i];
            masks[i] = if node.children.is_empty() {
                let label = node.label.as_deref().unwrap_or("");
                let idx = leaves
                    .index_of(label)
                    .ok_or_else(|| Error::TaxaMismatch(format!("unknown taxon {label:?}")))?;
                1u64 << idx
            } else {
                node.children.iter().fold(0, |m, &c| m | masks[c])
            };
        }
        let mut lengths: HashMap<Split, f64> = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if i == self.top {
                continue;
            }
            let len = match (node.length, missing) {
                (Some(l), _) => l,
                (None, MissingLength::Default(d)) => d,
                (None, MissingLength::Error) => {
                    return Err(Error::MissingLength {
                        position: node.position,
                    })
                }
            };
            let split = leaves.split_from_mask(masks[i])?;
            if len < 0.0 || !len.is_finite() {
                return Err(Error::NonPositiveLength {
                    split: leaves.format_split(split),
                    length: len,
                });
            }
            *lengths.entry(split).or_insert(0.0) += len;
        }
        let edges = lengths.into_iter().filter(|e| e.1 > 0.0);
        PhyloTree::new(leaves, edges)
    }
}

fn check_taxa(raw: &RawTree, leaves: &LeafSet) -> Result<()> {
    let mut seen = BTreeSet::new();
    for label in raw.leaf_labels() {
        if leaves.index_of(label).is_none() {
            return Err(Error::TaxaMismatch(format!("unexpected taxon {label:?}")));
        }
        seen.insert(label);
    }
    if seen.len() != leaves.len() {
        let missing: Vec<&str> = leaves
            .labels()
            .iter()
            .map(String::as_str)
            .filter(|l| !seen.contains(l))
            .collect();
        return Err(Error::TaxaMismatch(format!("missing taxa {missing:?}")));
    }
    Ok(())
}

/// Root label first; the rest in numeric order when every label is an
/// integer, otherwise lexicographic.
fn leaf_set_for(raw: &RawTree, root_label: Option<&str>) -> Result<LeafSet> {
    let mut labels: Vec<String> = raw.leaf_labels().map(str::to_string).collect();
    let all_numeric = labels.iter().all(|l| l.parse::<u64>().is_ok());
    if all_numeric {
        labels.sort_by_key(|l| l.parse::<u64>().unwrap_or(0));
    } else {
        labels.sort();
    }
    let root = match root_label {
        Some(r) => labels
            .iter()
            .position(|l| l == r)
            .ok_or_else(|| Error::UnknownRootLabel(r.to_string()))?,
        None => 0,
    };
    let r = labels.remove(root);
    labels.insert(0, r);
    LeafSet::new(labels)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    nodes: Vec<Node>,
    labels: BTreeSet<String>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            nodes: Vec::new(),
            labels: BTreeSet::new(),
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            position: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) -> Result<()> {
        loop {
            match self.bytes.get(self.pos) {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => match self.src[self.pos..].find(']') {
                    Some(end) => self.pos += end + 1,
                    None => return self.err("unterminated comment"),
                },
                _ => return Ok(()),
            }
        }
    }

    fn peek(&mut self) -> Result<Option<u8>> {
        self.skip_ws()?;
        Ok(self.bytes.get(self.pos).copied())
    }

    fn parse(mut self) -> Result<RawTree> {
        let top = self.subtree()?;
        match self.peek()? {
            Some(b';') => self.pos += 1,
            Some(c) => return self.err(format!("unexpected {:?}", c as char)),
            None => return self.err("missing ';'"),
        }
        if self.peek()?.is_some() {
            return self.err("trailing characters after ';'");
        }
        Ok(RawTree {
            nodes: self.nodes,
            top,
        })
    }

    fn subtree(&mut self) -> Result<usize> {
        let position = self.pos;
        let id = self.nodes.len();
        self.nodes.push(Node {
            label: None,
            length: None,
            position,
            children: Vec::new(),
        });
        if self.peek()? == Some(b'(') {
            self.pos += 1;
            loop {
                let child = self.subtree()?;
                self.nodes[id].children.push(child);
                match self.peek()? {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(c) => return self.err(format!("expected ',' or ')', found {:?}", c as char)),
                    None => return self.err("unbalanced parentheses"),
                }
            }
            // Internal labels (often support values) are read and discarded.
            self.label()?;
        } else {
            let label = match self.label()? {
                Some(l) => l,
                None => return self.err("expected a leaf label"),
            };
            if !self.labels.insert(label.clone()) {
                return Err(Error::DuplicateTaxon(label));
            }
            self.nodes[id].label = Some(label);
        }
        if self.peek()? == Some(b':') {
            self.pos += 1;
            self.nodes[id].length = Some(self.number()?);
        }
        Ok(id)
    }

    fn label(&mut self) -> Result<Option<String>> {
        match self.peek()? {
            Some(b'\'') => {
                self.pos += 1;
                let mut out = String::new();
                loop {
                    let rest = &self.src[self.pos..];
                    match rest.find('\'') {
                        None => return self.err("unterminated quoted label"),
                        Some(i) => {
                            out.push_str(&rest[..i]);
                            self.pos += i + 1;
                            if self.bytes.get(self.pos) == Some(&b'\'') {
                                out.push('\'');
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                    }
                }
                if out.is_empty() {
                    return self.err("empty quoted label");
                }
                Ok(Some(out))
            }
            _ => {
                let start = self.pos;
                while let Some(&b) = self.bytes.get(self.pos) {
                    if b.is_ascii_whitespace() || b"()[]':;,".contains(&b) {
                        break;
                    }
                    self.pos += 1;
                }
                if self.pos == start {
                    Ok(None)
                } else {
                    Ok(Some(self.src[start..self.pos].to_string()))
                }
            }
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws()?;
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_digit() || b"+-.eE".contains(&b) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                if text.is_empty() {
                    Err(Error::MissingLength { position: start })
                } else {
                    self.err(format!("bad branch length {text:?}"))
                }
            }
        }
    }
}
