//! Access trees and the text policy grammar.
//!
//! Grammar (UTF-8):
//!
//! ```text
//! policy := attr | "and(" list ")" | "or(" list ")" | INT "-of(" list ")"
//! list   := policy ("," policy)*
//! attr   := [A-Za-z0-9_:-]+
//! ```
//!
//! `and` maps to a threshold gate requiring all children, `or` to a gate
//! requiring one, and `k-of` to an explicit threshold. Children are
//! numbered 1..=n under their parent; those indexes are the evaluation
//! points of the secret-sharing polynomials.

use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};

/// Node of an access tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Leaf {
        attribute: String,
    },
    Gate {
        threshold: usize,
        children: Vec<Node>,
    },
}

/// Threshold access tree with attribute leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccessTree {
    root: Node,
}

impl AccessTree {
    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Leaf attributes in depth-first order. Ciphertext leaf components are
    /// aligned with this ordering.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        fn walk<'a>(node: &'a Node, out: &mut Vec<&'a str>) {
            match node {
                Node::Leaf { attribute } => out.push(attribute.as_str()),
                Node::Gate { children, .. } => {
                    for child in children {
                        walk(child, out);
                    }
                }
            }
        }
        walk(&self.root, &mut out);
        out
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }

    /// Builds a tree from explicit nodes, checking threshold bounds.
    pub fn from_root(root: Node) -> Result<AccessTree> {
        fn check(node: &Node) -> Result<()> {
            match node {
                Node::Leaf { attribute } => {
                    if attribute.is_empty() || !attribute.bytes().all(is_attr_byte) {
                        return Err(Error::InvalidParameter(format!(
                            "invalid attribute {attribute:?}"
                        )));
                    }
                    Ok(())
                }
                Node::Gate {
                    threshold,
                    children,
                } => {
                    if *threshold < 1 || *threshold > children.len() {
                        return Err(Error::ThresholdOutOfBounds {
                            threshold: *threshold,
                            children: children.len(),
                        });
                    }
                    children.iter().try_for_each(check)
                }
            }
        }
        check(&root)?;
        Ok(AccessTree { root })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        encode_node(&self.root, &mut w);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<AccessTree> {
        let mut r = ByteReader::new(bytes);
        let root = decode_node(&mut r)?;
        r.finish()?;
        AccessTree::from_root(root)
    }
}

impl std::fmt::Display for AccessTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fn render(node: &Node, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            match node {
                Node::Leaf { attribute } => f.write_str(attribute),
                Node::Gate {
                    threshold,
                    children,
                } => {
                    if *threshold == children.len() {
                        f.write_str("and(")?;
                    } else if *threshold == 1 {
                        f.write_str("or(")?;
                    } else {
                        write!(f, "{threshold}-of(")?;
                    }
                    for (i, child) in children.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        render(child, f)?;
                    }
                    f.write_str(")")
                }
            }
        }
        render(&self.root, f)
    }
}

fn encode_node(node: &Node, w: &mut ByteWriter) {
    match node {
        Node::Leaf { attribute } => {
            w.put_u8(0);
            w.put_str(attribute);
        }
        Node::Gate {
            threshold,
            children,
        } => {
            w.put_u8(1);
            w.put_u32(*threshold as u32);
            w.put_u32(children.len() as u32);
            for child in children {
                encode_node(child, w);
            }
        }
    }
}

fn decode_node(r: &mut ByteReader) -> Result<Node> {
    match r.get_u8()? {
        0 => Ok(Node::Leaf {
            attribute: r.get_str()?,
        }),
        1 => {
            let threshold = r.get_u32()? as usize;
            let count = r.get_u32()? as usize;
            if count > 4096 {
                return Err(Error::Decode("gate child count out of range".into()));
            }
            let children = (0..count)
                .map(|_| decode_node(r))
                .collect::<Result<Vec<_>>>()?;
            Ok(Node::Gate {
                threshold,
                children,
            })
        }
        tag => Err(Error::Decode(format!("unknown tree node tag {tag}"))),
    }
}

fn is_attr_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b':' || b == b'-'
}

/// Parses the policy grammar into an access tree.
pub fn parse_policy(expr: &str) -> Result<AccessTree> {
    let mut parser = Parser {
        input: expr.as_bytes(),
        pos: 0,
    };
    parser.skip_ws();
    let root = parser.policy()?;
    parser.skip_ws();
    if parser.pos != parser.input.len() {
        return Err(parser.err("unexpected trailing input"));
    }
    AccessTree::from_root(root)
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::PolicySyntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {:?}", b as char)))
        }
    }

    /// Longest run of attribute bytes at the cursor.
    fn word(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while self.pos < self.input.len() && is_attr_byte(self.input[self.pos]) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected attribute or operator"));
        }
        Ok(std::str::from_utf8(&self.input[start..self.pos]).unwrap())
    }

    fn policy(&mut self) -> Result<Node> {
        self.skip_ws();
        let word_start = self.pos;
        let word = self.word()?.to_string();
        self.skip_ws();
        if self.peek() == Some(b'(') {
            let threshold_kind = if word == "and" {
                ThresholdKind::All
            } else if word == "or" {
                ThresholdKind::Any
            } else if let Some(k) = parse_k_of(&word) {
                ThresholdKind::Exact(k)
            } else {
                self.pos = word_start;
                return Err(self.err(&format!("unknown operator {word:?}")));
            };
            self.eat(b'(')?;
            let children = self.list()?;
            self.skip_ws();
            self.eat(b')')?;
            let threshold = match threshold_kind {
                ThresholdKind::All => children.len(),
                ThresholdKind::Any => 1,
                ThresholdKind::Exact(k) => k,
            };
            if threshold < 1 || threshold > children.len() {
                return Err(Error::ThresholdOutOfBounds {
                    threshold,
                    children: children.len(),
                });
            }
            Ok(Node::Gate {
                threshold,
                children,
            })
        } else {
            Ok(Node::Leaf { attribute: word })
        }
    }

    fn list(&mut self) -> Result<Vec<Node>> {
        let mut out = vec![self.policy()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(b',') {
                self.pos += 1;
                out.push(self.policy()?);
            } else {
                return Ok(out);
            }
        }
    }
}

enum ThresholdKind {
    All,
    Any,
    Exact(usize),
}

/// Recognizes "<INT>-of"; the digits and suffix are attribute bytes, so the
/// whole word is captured before the opening parenthesis.
fn parse_k_of(word: &str) -> Option<usize> {
    let digits = word.strip_suffix("-of")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_policy_is_a_single_leaf() {
        let tree = parse_policy("doctor").unwrap();
        assert_eq!(
            tree.root(),
            &Node::Leaf {
                attribute: "doctor".into()
            }
        );
        assert_eq!(tree.leaves(), vec!["doctor"]);
    }

    #[test]
    fn nested_and_or() {
        let tree = parse_policy("and(doctor, or(cardiology, oncology))").unwrap();
        match tree.root() {
            Node::Gate {
                threshold,
                children,
            } => {
                assert_eq!(*threshold, 2);
                assert_eq!(children.len(), 2);
                assert_eq!(
                    children[0],
                    Node::Leaf {
                        attribute: "doctor".into()
                    }
                );
                match &children[1] {
                    Node::Gate {
                        threshold,
                        children,
                    } => {
                        assert_eq!(*threshold, 1);
                        assert_eq!(children.len(), 2);
                    }
                    _ => panic!("expected inner gate"),
                }
            }
            _ => panic!("expected root gate"),
        }
        assert_eq!(tree.leaves(), vec!["doctor", "cardiology", "oncology"]);
    }

    #[test]
    fn k_of_threshold() {
        let tree = parse_policy("2-of(a, b, c)").unwrap();
        match tree.root() {
            Node::Gate {
                threshold,
                children,
            } => {
                assert_eq!(*threshold, 2);
                assert_eq!(children.len(), 3);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn threshold_exceeding_children_is_rejected() {
        assert!(matches!(
            parse_policy("3-of(a, b)"),
            Err(Error::ThresholdOutOfBounds {
                threshold: 3,
                children: 2
            })
        ));
        assert!(matches!(
            parse_policy("0-of(a, b)"),
            Err(Error::ThresholdOutOfBounds { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_a_position() {
        match parse_policy("and(doctor, ") {
            Err(Error::PolicySyntax { position, .. }) => assert_eq!(position, 12),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse_policy("").is_err());
        assert!(parse_policy("and()").is_err());
        assert!(parse_policy("xor(a, b)").is_err());
        assert!(parse_policy("a b").is_err());
    }

    #[test]
    fn attribute_charset_is_enforced() {
        assert!(parse_policy("dept:card-io_9").is_ok());
        assert!(parse_policy("bad attr!").is_err());
    }

    #[test]
    fn display_round_trips_through_parser() {
        for expr in [
            "doctor",
            "and(a, b)",
            "or(a, b, c)",
            "2-of(a, b, c)",
            "and(x, or(y, 2-of(a, b, c)))",
        ] {
            let tree = parse_policy(expr).unwrap();
            let rendered = tree.to_string();
            assert_eq!(parse_policy(&rendered).unwrap(), tree);
        }
    }

    #[test]
    fn binary_codec_round_trips() {
        let tree = parse_policy("and(x, or(y, 2-of(a, b, c)))").unwrap();
        let bytes = tree.to_bytes();
        assert_eq!(AccessTree::from_bytes(&bytes).unwrap(), tree);
    }

    #[test]
    fn single_child_gates_parse() {
        // and(x) == or(x) == 1-of(x)
        let tree = parse_policy("and(doctor)").unwrap();
        match tree.root() {
            Node::Gate {
                threshold,
                children,
            } => {
                assert_eq!(*threshold, 1);
                assert_eq!(children.len(), 1);
            }
            _ => panic!(),
        }
    }
}
