//! Penn-style bracketed constituency trees.
//!
//! A preterminal such as `(PRP I)` is represented as a single terminal node
//! labelled `PRP` whose leaf carries the token index and surface string.
//! Leaves use the treebank bracket escapes (`-LRB-`, `-RRB-`, ...) on the
//! wire and are unescaped in memory.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::TreeError;

/// A terminal's position in the sentence and its (unescaped) surface form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    pub index: usize,
    pub word: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseTree {
    pub label: String,
    pub children: Vec<ParseTree>,
    pub leaf: Option<Leaf>,
}

impl ParseTree {
    pub fn is_terminal(&self) -> bool {
        self.leaf.is_some()
    }

    /// Terminals in left-to-right order.
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match &self.leaf {
            Some(leaf) => out.push(leaf),
            None => self.children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    /// Index of the leftmost terminal under this node.
    pub fn first_leaf(&self) -> Option<&Leaf> {
        match &self.leaf {
            Some(leaf) => Some(leaf),
            None => self.children.first().and_then(ParseTree::first_leaf),
        }
    }

    pub fn last_leaf(&self) -> Option<&Leaf> {
        match &self.leaf {
            Some(leaf) => Some(leaf),
            None => self.children.last().and_then(ParseTree::last_leaf),
        }
    }

    /// Pre-order walk handing each node its parent (if any) and its position
    /// among the parent's children.
    pub fn walk<'a, F>(&'a self, f: &mut F)
    where
        F: FnMut(&'a ParseTree, Option<&'a ParseTree>, usize),
    {
        fn go<'a, F>(node: &'a ParseTree, parent: Option<&'a ParseTree>, pos: usize, f: &mut F)
        where
            F: FnMut(&'a ParseTree, Option<&'a ParseTree>, usize),
        {
            f(node, parent, pos);
            for (i, child) in node.children.iter().enumerate() {
                go(child, Some(node), i, f);
            }
        }
        go(self, None, 0, f)
    }

    /// Chain of ancestors of the terminal with token index `index`, root first,
    /// ending with the terminal itself.
    pub fn path_to_leaf(&self, index: usize) -> Option<Vec<&ParseTree>> {
        let mut path = Vec::new();
        if self.find_path(index, &mut path) {
            Some(path)
        } else {
            None
        }
    }

    fn find_path<'a>(&'a self, index: usize, path: &mut Vec<&'a ParseTree>) -> bool {
        path.push(self);
        match &self.leaf {
            Some(leaf) if leaf.index == index => return true,
            Some(_) => {}
            None => {
                for child in &self.children {
                    if child.find_path(index, path) {
                        return true;
                    }
                }
            }
        }
        path.pop();
        false
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.leaf {
            Some(leaf) => write!(f, "({} {})", self.label, escape_leaf(&leaf.word)),
            None => {
                write!(f, "({}", self.label)?;
                for child in &self.children {
                    write!(f, " {child}")?;
                }
                f.write_str(")")
            }
        }
    }
}

const ESCAPES: [(&str, &str); 6] = [
    ("-LRB-", "("),
    ("-RRB-", ")"),
    ("-LSB-", "["),
    ("-RSB-", "]"),
    ("-LCB-", "{"),
    ("-RCB-", "}"),
];

pub fn unescape_leaf(word: &str) -> String {
    ESCAPES
        .iter()
        .find(|(esc, _)| *esc == word)
        .map_or_else(|| word.to_string(), |(_, raw)| raw.to_string())
}

pub fn escape_leaf(word: &str) -> String {
    match word {
        "(" => "-LRB-".to_string(),
        ")" => "-RRB-".to_string(),
        _ => word.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Open(usize),
    Close(usize),
    Atom(usize, &'a str),
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut atom_start: Option<usize> = None;
    // char offsets are reported, byte offsets are used for slicing
    let mut char_pos = 0;
    let mut atom_char = 0;
    for (byte, ch) in text.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if let Some(start) = atom_start.take() {
                tokens.push(Token::Atom(atom_char, &text[start..byte]));
            }
            match ch {
                '(' => tokens.push(Token::Open(char_pos)),
                ')' => tokens.push(Token::Close(char_pos)),
                _ => {}
            }
        } else if atom_start.is_none() {
            atom_start = Some(byte);
            atom_char = char_pos;
        }
        char_pos += 1;
    }
    if let Some(start) = atom_start {
        tokens.push(Token::Atom(atom_char, &text[start..]));
    }
    tokens
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    next_leaf: usize,
    end_offset: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn unexpected_end(&self) -> TreeError {
        TreeError::Unbalanced {
            offset: self.end_offset,
        }
    }

    // Assumes the current token is Open.
    fn node(&mut self) -> Result<ParseTree, TreeError> {
        let open_at = match self.peek() {
            Some(Token::Open(at)) => *at,
            _ => unreachable!("node() called off an open bracket"),
        };
        self.pos += 1;
        let label = match self.peek() {
            Some(Token::Atom(_, label)) => {
                let label = label.to_string();
                self.pos += 1;
                label
            }
            // "( (S ...))": unlabeled wrapper as emitted by some treebanks
            Some(Token::Open(_)) => String::from("ROOT"),
            Some(Token::Close(_)) => return Err(TreeError::EmptyConstituent { offset: open_at }),
            None => return Err(self.unexpected_end()),
        };

        match self.peek() {
            Some(Token::Atom(at, word)) => {
                let (at, word) = (*at, *word);
                self.pos += 1;
                match self.peek() {
                    Some(Token::Close(_)) => {
                        self.pos += 1;
                        let leaf = Leaf {
                            index: self.next_leaf,
                            word: unescape_leaf(word),
                        };
                        self.next_leaf += 1;
                        Ok(ParseTree {
                            label,
                            children: Vec::new(),
                            leaf: Some(leaf),
                        })
                    }
                    None => Err(self.unexpected_end()),
                    Some(_) => Err(TreeError::UnexpectedToken { offset: at }),
                }
            }
            Some(Token::Close(_)) => Err(TreeError::EmptyConstituent { offset: open_at }),
            None => Err(self.unexpected_end()),
            Some(Token::Open(_)) => {
                let mut children = Vec::new();
                loop {
                    match self.peek() {
                        Some(Token::Open(_)) => children.push(self.node()?),
                        Some(Token::Close(_)) => {
                            self.pos += 1;
                            break;
                        }
                        Some(Token::Atom(at, _)) => {
                            return Err(TreeError::UnexpectedToken { offset: *at })
                        }
                        None => return Err(self.unexpected_end()),
                    }
                }
                Ok(ParseTree {
                    label,
                    children,
                    leaf: None,
                })
            }
        }
    }
}

/// Parses one bracketed tree. Trailing non-whitespace after the root is an error.
pub fn parse_bracketed_tree(text: &str) -> Result<ParseTree, TreeError> {
    let tokens = tokenize(text);
    // offset of the last non-whitespace char, reported when input ends early
    let end_offset = text
        .chars()
        .enumerate()
        .filter(|(_, c)| !c.is_whitespace())
        .map(|(i, _)| i)
        .last()
        .unwrap_or(0);
    let mut parser = Parser {
        tokens,
        pos: 0,
        next_leaf: 0,
        end_offset,
    };
    let tree = match parser.peek() {
        None => return Err(TreeError::Empty),
        Some(Token::Open(_)) => parser.node()?,
        Some(Token::Close(at)) | Some(Token::Atom(at, _)) => {
            return Err(TreeError::UnexpectedToken { offset: *at })
        }
    };
    match parser.peek() {
        None => Ok(tree),
        Some(Token::Close(at)) => Err(TreeError::Unbalanced { offset: *at }),
        Some(Token::Open(at)) | Some(Token::Atom(at, _)) => {
            Err(TreeError::TrailingInput { offset: *at })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    #[test]
    fn reads_simple_tree() {
        let tree = parse_bracketed_tree("(S (NP (PRP I)) (VP (VBP agree)))").unwrap();
        assert_eq!(tree.label, "S");
        assert_eq!(tree.children.len(), 2);
        let words: Vec<_> = tree.leaves().iter().map(|l| l.word.as_str()).collect();
        assert_eq!(words, vec!["I", "agree"]);
        let idx: Vec<_> = tree.leaves().iter().map(|l| l.index).collect();
        assert_eq!(idx, vec![0, 1]);
    }

    #[test]
    fn unbalanced_reports_offset() {
        let err = parse_bracketed_tree("(X (Y a) (Y b").unwrap_err();
        assert_eq!(err, TreeError::Unbalanced { offset: 12 });
        let err = parse_bracketed_tree("(X (Y a)))").unwrap_err();
        assert_eq!(err, TreeError::Unbalanced { offset: 9 });
    }

    #[test]
    fn empty_constituents_rejected() {
        assert!(matches!(
            parse_bracketed_tree("(S (NP) (VP (VB go)))"),
            Err(TreeError::EmptyConstituent { offset: 3 })
        ));
        assert!(matches!(
            parse_bracketed_tree("()"),
            Err(TreeError::EmptyConstituent { offset: 0 })
        ));
        assert_eq!(parse_bracketed_tree("   "), Err(TreeError::Empty));
    }

    #[test]
    fn escapes_round_trip() {
        let text = "(S (-LRB- -LRB-) (NN word) (-RRB- -RRB-))";
        let tree = parse_bracketed_tree(text).unwrap();
        let words: Vec<_> = tree.leaves().iter().map(|l| l.word.clone()).collect();
        assert_eq!(words, vec!["(", "word", ")"]);
        assert_eq!(format!("{tree}"), text);
    }

    #[test]
    fn unlabeled_wrapper_becomes_root() {
        let tree = parse_bracketed_tree("( (S (NN x)))").unwrap();
        assert_eq!(tree.label, "ROOT");
        assert_eq!(tree.children[0].label, "S");
    }

    #[test]
    fn path_to_leaf_walks_down() {
        let tree = parse_bracketed_tree("(S (NP (PRP I)) (VP (VBP agree)))").unwrap();
        let path = tree.path_to_leaf(1).unwrap();
        let labels: Vec<_> = path.iter().map(|n| n.label.as_str()).collect();
        assert_eq!(labels, vec!["S", "VP", "VBP"]);
        assert!(tree.path_to_leaf(5).is_none());
    }
}
