//! Plotkin trees: the recursive skeleton shared by RM, Polar and KO codes.
//!
//! An internal node combines a left child `v` and a right child `u` of equal
//! length into `(u, u ⊕ v)`. Decoding visits the left child first, so the
//! leaves are decoded in left-first depth order. Message slices are handed
//! out in the opposite order: the last leaf to be decoded owns message bits
//! `0..`, the first one owns the highest block.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::{plotkin_map, BitWord};
use crate::error::{check_len, Error, Result};

/// Sub-code sitting at a leaf of a Plotkin tree. `m` is log2 of the leaf length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeafKind {
    /// RM(m, 0): one bit repeated 2^m times.
    Repetition { m: usize },
    /// RM(m, 1).
    FirstOrder { m: usize },
    /// RM(m, m): every word of length 2^m.
    FullRate { m: usize },
    /// Always the zero word; carries no message bits.
    Frozen { m: usize },
}

impl LeafKind {
    pub fn m(&self) -> usize {
        match *self {
            LeafKind::Repetition { m }
            | LeafKind::FirstOrder { m }
            | LeafKind::FullRate { m }
            | LeafKind::Frozen { m } => m,
        }
    }

    pub fn len(&self) -> usize {
        1 << self.m()
    }

    /// Number of message bits the leaf carries.
    pub fn dimension(&self) -> usize {
        match *self {
            LeafKind::Repetition { .. } => 1,
            LeafKind::FirstOrder { m } => m + 1,
            LeafKind::FullRate { m } => 1 << m,
            LeafKind::Frozen { .. } => 0,
        }
    }

    /// Equivalent RM order, `None` for frozen leaves.
    pub fn rm_order(&self) -> Option<usize> {
        match *self {
            LeafKind::Repetition { .. } => Some(0),
            LeafKind::FirstOrder { .. } => Some(1),
            LeafKind::FullRate { m } => Some(m),
            LeafKind::Frozen { .. } => None,
        }
    }

    /// Encodes the leaf message with the recursive RM encoder.
    pub fn encode(&self, msg: &BitWord) -> Result<BitWord> {
        check_len(self.dimension(), msg.len())?;
        Ok(match self.rm_order() {
            Some(r) => rm_recursive_encode(self.m(), r, msg.bits()),
            None => BitWord::zeros(self.len()),
        })
    }

    /// Sign-domain encoding of real "soft signs" s_j ∈ [−1, 1]. On hard inputs
    /// s_j = 1 − 2b_j this equals BPSK of [`LeafKind::encode`]. Frozen leaves
    /// give the all-ones word.
    pub fn encode_signs(&self, signs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dimension(), signs.len())?;
        Ok(match self.rm_order() {
            Some(r) => sign_recursive_encode(self.m(), r, signs),
            None => vec![1.0; self.len()],
        })
    }

    pub fn label(&self) -> String {
        match *self {
            LeafKind::Repetition { m } => format!("RM({m},0)"),
            LeafKind::FirstOrder { m } => format!("RM({m},1)"),
            LeafKind::FullRate { m } => format!("RM({m},{m})"),
            LeafKind::Frozen { m } => format!("Frozen({})", 1usize << m),
        }
    }
}

/// Dimension of RM(m, r): Σ_{i≤r} C(m, i).
pub fn rm_dimension(m: usize, r: usize) -> usize {
    let r = r.min(m);
    let mut binom = 1usize;
    let mut total = 1usize;
    for i in 1..=r {
        binom = binom * (m + 1 - i) / i;
        total += binom;
    }
    total
}

/// Recursive Plotkin encoding of RM(m, r): the `u ∈ RM(m−1, r)` part takes
/// the first message bits, `v ∈ RM(m−1, r−1)` the remaining ones.
pub(crate) fn rm_recursive_encode(m: usize, r: usize, msg: &[u8]) -> BitWord {
    let r = r.min(m);
    if r == 0 {
        return BitWord::from_raw(vec![msg[0]; 1 << m]);
    }
    let ku = rm_dimension(m - 1, r);
    let u = rm_recursive_encode(m - 1, r, &msg[..ku]);
    let v = rm_recursive_encode(m - 1, r - 1, &msg[ku..]);
    plotkin_map(&u, &v).expect("equal halves")
}

pub(crate) fn sign_recursive_encode(m: usize, r: usize, signs: &[f64]) -> Vec<f64> {
    let r = r.min(m);
    if r == 0 {
        return vec![signs[0]; 1 << m];
    }
    let ku = rm_dimension(m - 1, r);
    let mut u = sign_recursive_encode(m - 1, r, &signs[..ku]);
    let v = sign_recursive_encode(m - 1, r - 1, &signs[ku..]);
    let prod: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a * b).collect();
    u.extend(prod);
    u
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Internal {
        /// Pre-order index among internal nodes, root = 0.
        id: usize,
        /// log2 of the node length.
        m: usize,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        /// Position of the leaf in decoding order.
        index: usize,
        leaf: LeafKind,
        msg_start: usize,
        msg_end: usize,
    },
}

impl Node {
    pub fn m(&self) -> usize {
        match self {
            Node::Internal { m, .. } => *m,
            Node::Leaf { leaf, .. } => leaf.m(),
        }
    }

    pub fn len(&self) -> usize {
        1 << self.m()
    }

    pub fn msg_range(&self) -> Option<Range<usize>> {
        match self {
            Node::Leaf { msg_start, msg_end, .. } => Some(*msg_start..*msg_end),
            Node::Internal { .. } => None,
        }
    }

    fn dimension(&self) -> usize {
        match self {
            Node::Internal { left, right, .. } => left.dimension() + right.dimension(),
            Node::Leaf { leaf, .. } => leaf.dimension(),
        }
    }
}

/// Unnumbered tree shape used while building.
pub(crate) enum Shape {
    Internal(Box<Shape>, Box<Shape>),
    Leaf(LeafKind),
}

impl Shape {
    fn m(&self) -> usize {
        match self {
            Shape::Internal(l, _) => l.m() + 1,
            Shape::Leaf(k) => k.m(),
        }
    }
}

/// Leaf descriptor in decoding order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafInfo {
    pub index: usize,
    pub kind: LeafKind,
    pub msg: Range<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotkinTree {
    pub label: String,
    pub n: usize,
    pub k: usize,
    pub root: Node,
}

impl PlotkinTree {
    pub(crate) fn from_shape(label: String, shape: Shape) -> Result<Self> {
        let m = shape.m();
        validate_shape(&shape)?;
        let mut next_internal = 0;
        let mut next_leaf = 0;
        let mut root = number(shape, &mut next_internal, &mut next_leaf);
        let k = root.dimension();
        let mut next_msg = 0;
        assign_slices(&mut root, &mut next_msg);
        Ok(Self { label, n: 1 << m, k, root })
    }

    pub fn m(&self) -> usize {
        self.root.m()
    }

    pub fn internal_count(&self) -> usize {
        fn count(n: &Node) -> usize {
            match n {
                Node::Internal { left, right, .. } => 1 + count(left) + count(right),
                Node::Leaf { .. } => 0,
            }
        }
        count(&self.root)
    }

    /// Leaves in decoding (left-first) order.
    pub fn leaves(&self) -> Vec<LeafInfo> {
        fn walk(n: &Node, out: &mut Vec<LeafInfo>) {
            match n {
                Node::Internal { left, right, .. } => {
                    walk(left, out);
                    walk(right, out);
                }
                Node::Leaf { index, leaf, msg_start, msg_end } => out.push(LeafInfo {
                    index: *index,
                    kind: *leaf,
                    msg: *msg_start..*msg_end,
                }),
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    /// Message leaves only (frozen leaves dropped), decoding order.
    pub fn message_leaves(&self) -> Vec<LeafInfo> {
        self.leaves().into_iter().filter(|l| l.kind.dimension() > 0).collect()
    }

    pub fn encode(&self, msg: &BitWord) -> Result<BitWord> {
        check_len(self.k, msg.len())?;
        Ok(encode_node(&self.root, msg))
    }

    /// Every codeword, indexed by message integer (bit j of the index is m_j).
    pub fn codebook(&self) -> Result<Vec<BitWord>> {
        if self.k > ENUMERATION_LIMIT {
            return Err(Error::CodebookTooLarge { k: self.k, limit: ENUMERATION_LIMIT });
        }
        (0..1u64 << self.k)
            .map(|i| self.encode(&BitWord::from_index(i, self.k)))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// SHA-256 of the canonical JSON description, hex encoded.
    pub fn structure_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("tree serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Multi-line indented rendering used by `codes info`.
    pub fn render(&self) -> String {
        fn walk(n: &Node, depth: usize, out: &mut String) {
            let pad = "  ".repeat(depth);
            match n {
                Node::Internal { id, m, left, right } => {
                    out.push_str(&format!("{pad}node {id} (length {})\n", 1usize << m));
                    walk(left, depth + 1, out);
                    walk(right, depth + 1, out);
                }
                Node::Leaf { index, leaf, msg_start, msg_end } => {
                    out.push_str(&format!(
                        "{pad}leaf {index}: {} bits [{msg_start}, {msg_end})\n",
                        leaf.label()
                    ));
                }
            }
        }
        let mut out = String::new();
        walk(&self.root, 0, &mut out);
        out
    }
}

/// Largest dimension for which codebooks are enumerated.
pub const ENUMERATION_LIMIT: usize = 20;

fn validate_shape(shape: &Shape) -> Result<()> {
    if let Shape::Internal(l, r) = shape {
        if l.m() != r.m() {
            return Err(Error::InvalidParameter("children of a Plotkin node differ in length".into()));
        }
        validate_shape(l)?;
        validate_shape(r)?;
    }
    Ok(())
}

fn number(shape: Shape, next_internal: &mut usize, next_leaf: &mut usize) -> Node {
    match shape {
        Shape::Internal(l, r) => {
            let id = *next_internal;
            *next_internal += 1;
            let left = number(*l, next_internal, next_leaf);
            let right = number(*r, next_internal, next_leaf);
            Node::Internal { id, m: left.m() + 1, left: Box::new(left), right: Box::new(right) }
        }
        Shape::Leaf(leaf) => {
            let index = *next_leaf;
            *next_leaf += 1;
            Node::Leaf { index, leaf, msg_start: 0, msg_end: 0 }
        }
    }
}

// right-first traversal: the last decoded leaf gets the lowest message indices
fn assign_slices(node: &mut Node, next: &mut usize) {
    match node {
        Node::Internal { left, right, .. } => {
            assign_slices(right, next);
            assign_slices(left, next);
        }
        Node::Leaf { leaf, msg_start, msg_end, .. } => {
            *msg_start = *next;
            *next += leaf.dimension();
            *msg_end = *next;
        }
    }
}

fn encode_node(node: &Node, msg: &BitWord) -> BitWord {
    match node {
        Node::Internal { left, right, .. } => {
            let v = encode_node(left, msg);
            let u = encode_node(right, msg);
            plotkin_map(&u, &v).expect("equal halves")
        }
        Node::Leaf { leaf, msg_start, msg_end, .. } => leaf
            .encode(&msg.slice(*msg_start..*msg_end))
            .expect("slice length equals leaf dimension"),
    }
}
