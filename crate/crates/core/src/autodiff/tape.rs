//! Reverse-mode tape over row-major tensors.

use crate::autodiff::tensor::{matmul, matmul_at, matmul_bt, Tensor};
use crate::codes::LeafKind;
use crate::decoders::llr::{lse, lse_grad, sigmoid, soft_sign};
use crate::decoders::softmap::{leaf_codeword_signs, soft_map, soft_map_codebook, soft_map_counted};
use crate::error::{Error, Result};
use crate::eval::opcount::Ops;

pub const SELU_LAMBDA: f64 = 1.050_700_987_355_48;
pub const SELU_ALPHA: f64 = 1.673_263_242_354_38;

/// Clamp applied to probabilities inside the cross-entropy logs.
pub const BCE_CLAMP: f64 = 1e-12;

#[inline]
pub fn selu(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA * x
    } else {
        SELU_LAMBDA * SELU_ALPHA * x.exp_m1()
    }
}

#[inline]
fn selu_grad(x: f64) -> f64 {
    if x > 0.0 {
        SELU_LAMBDA
    } else {
        SELU_LAMBDA * SELU_ALPHA * x.exp()
    }
}

/// Handle to a tape node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(&self) -> usize {
        self.0
    }
}

enum Op {
    Leaf,
    Affine { x: Var, w: Var, b: Var },
    Selu(Var),
    Sigmoid(Var),
    SoftSign(Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Lse(Var, Var),
    Scale(Var, f64),
    Sum(Var),
    RowDot(Var, Var),
    SliceCols { x: Var, start: usize },
    ConcatCols(Vec<Var>),
    StackCoords(Vec<Var>),
    Reshape(Var),
    Gather { x: Var, rows: Vec<usize> },
    SoftMap { x: Var, leaf: LeafKind, winners: Vec<Vec<[usize; 2]>> },
    SignEncode { x: Var, leaf: LeafKind },
    CodebookMaxLog { book: Var, l: Var, winners: Vec<Vec<[usize; 2]>> },
    Bce { x: Var, targets: Tensor },
    RowNormalize { x: Var, scales: Vec<f64> },
}

struct Node {
    op: Op,
    value: Tensor,
}

/// Single-owner computation record. Values are computed eagerly on push.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of one backward pass, indexed by [`Var`].
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<(usize, usize)>,
}

impl Gradients {
    /// Gradient of `v`; zeros if the loss does not depend on it.
    pub fn wrt(&self, v: Var) -> Tensor {
        match &self.grads[v.0] {
            Some(g) => g.clone(),
            None => {
                let (r, c) = self.shapes[v.0];
                Tensor::zeros(r, c)
            }
        }
    }
}

fn shape_err(op: &'static str, detail: String) -> Error {
    Error::Shape { op, detail }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op, value: Tensor) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        let (sa, sb) = (self.value(a).shape(), self.value(b).shape());
        if sa != sb {
            return Err(shape_err(op, format!("{sa:?} vs {sb:?}")));
        }
        Ok(())
    }

    /// Input or parameter.
    pub fn leaf(&mut self, t: Tensor) -> Var {
        self.push(Op::Leaf, t)
    }

    /// `x·w + b` with x: B×in, w: in×out, b: 1×out.
    pub fn affine(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let (bt, inp) = self.value(x).shape();
        let (wi, out) = self.value(w).shape();
        if wi != inp || self.value(b).shape() != (1, out) {
            return Err(shape_err(
                "affine",
                format!("x {:?}, w {:?}, b {:?}", (bt, inp), (wi, out), self.value(b).shape()),
            ));
        }
        let mut y = matmul(self.value(x).data(), self.value(w).data(), bt, inp, out);
        let bias = self.value(b).data();
        for row in y.chunks_exact_mut(out) {
            for (v, bb) in row.iter_mut().zip(bias) {
                *v += bb;
            }
        }
        let t = Tensor::new(bt, out, y)?;
        Ok(self.push(Op::Affine { x, w, b }, t))
    }

    fn map(&mut self, x: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let v = self.value(x);
        let data = v.data().iter().map(|&a| f(a)).collect();
        let t = Tensor::new(v.rows(), v.cols(), data).expect("same shape");
        self.push(op, t)
    }

    pub fn selu(&mut self, x: Var) -> Var {
        self.map(x, selu, Op::Selu(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.map(x, sigmoid, Op::Sigmoid(x))
    }

    /// tanh(x/2), the sign-domain soft bit of an LLR.
    pub fn soft_sign(&mut self, x: Var) -> Var {
        self.map(x, soft_sign, Op::SoftSign(x))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        self.map(x, |a| c * a, Op::Scale(x, c))
    }

    fn zip(&mut self, name: &'static str, a: Var, b: Var, f: impl Fn(f64, f64) -> f64, op: Op) -> Result<Var> {
        self.same_shape(name, a, b)?;
        let (va, vb) = (self.value(a), self.value(b));
        let data = va.data().iter().zip(vb.data()).map(|(&x, &y)| f(x, y)).collect();
        let t = Tensor::new(va.rows(), va.cols(), data)?;
        Ok(self.push(op, t))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn lse(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip("lse", a, b, lse, Op::Lse(a, b))
    }

    /// Sum of all entries, 1×1.
    pub fn sum(&mut self, x: Var) -> Var {
        let s = self.value(x).data().iter().sum();
        self.push(Op::Sum(x), Tensor::scalar(s))
    }

    /// Row-wise inner product, B×1.
    pub fn row_dot(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("row_dot", a, b)?;
        let (va, vb) = (self.value(a), self.value(b));
        let data: Vec<f64> = (0..va.rows())
            .map(|r| va.row(r).iter().zip(vb.row(r)).map(|(x, y)| x * y).sum())
            .collect();
        let t = Tensor::new(va.rows(), 1, data)?;
        Ok(self.push(Op::RowDot(a, b), t))
    }

    pub fn slice_cols(&mut self, x: Var, start: usize, end: usize) -> Result<Var> {
        let v = self.value(x);
        if start > end || end > v.cols() {
            return Err(shape_err("slice_cols", format!("{start}..{end} of {} columns", v.cols())));
        }
        let w = end - start;
        let mut data = Vec::with_capacity(v.rows() * w);
        for r in 0..v.rows() {
            data.extend_from_slice(&v.row(r)[start..end]);
        }
        let t = Tensor::new(v.rows(), w, data)?;
        Ok(self.push(Op::SliceCols { x, start }, t))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = self.value(parts[0]).rows();
        if parts.iter().any(|&p| self.value(p).rows() != rows) {
            return Err(shape_err("concat_cols", "row counts differ".into()));
        }
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for &p in parts {
                data.extend_from_slice(self.value(p).row(r));
            }
        }
        let t = Tensor::new(rows, cols, data)?;
        Ok(self.push(Op::ConcatCols(parts.to_vec()), t))
    }

    /// Coordinate-wise stacking: `c` tensors of shape B×h become a (B·h)×c
    /// tensor whose row `b·h + j` holds entry (b, j) of each input.
    pub fn stack_coords(&mut self, parts: &[Var]) -> Result<Var> {
        let shape = self.value(parts[0]).shape();
        if parts.iter().any(|&p| self.value(p).shape() != shape) {
            return Err(shape_err("stack_coords", "input shapes differ".into()));
        }
        let c = parts.len();
        let mut data = vec![0.0; shape.0 * shape.1 * c];
        for (k, &p) in parts.iter().enumerate() {
            for (i, &v) in self.value(p).data().iter().enumerate() {
                data[i * c + k] = v;
            }
        }
        let t = Tensor::new(shape.0 * shape.1, c, data)?;
        Ok(self.push(Op::StackCoords(parts.to_vec()), t))
    }

    /// Row-major reinterpretation.
    pub fn reshape(&mut self, x: Var, rows: usize, cols: usize) -> Result<Var> {
        let v = self.value(x);
        if v.len() != rows * cols {
            return Err(shape_err("reshape", format!("{:?} to {rows}x{cols}", v.shape())));
        }
        let t = Tensor::new(rows, cols, v.data().to_vec())?;
        Ok(self.push(Op::Reshape(x), t))
    }

    pub fn gather_rows(&mut self, x: Var, rows: &[usize]) -> Result<Var> {
        let v = self.value(x);
        if let Some(&r) = rows.iter().find(|&&r| r >= v.rows()) {
            return Err(shape_err("gather_rows", format!("row {r} of {}", v.rows())));
        }
        let mut data = Vec::with_capacity(rows.len() * v.cols());
        for &r in rows {
            data.extend_from_slice(v.row(r));
        }
        let t = Tensor::new(rows.len(), v.cols(), data)?;
        Ok(self.push(Op::Gather { x, rows: rows.to_vec() }, t))
    }

    /// Row-wise Soft-MAP of a leaf code: B×len → B×k.
    pub fn soft_map(&mut self, x: Var, leaf: LeafKind) -> Result<Var> {
        let v = self.value(x);
        let k = leaf.dimension();
        let mut data = Vec::with_capacity(v.rows() * k);
        let mut winners = Vec::with_capacity(v.rows());
        for r in 0..v.rows() {
            let out = soft_map(leaf, v.row(r))?;
            data.extend_from_slice(&out.llrs);
            winners.push(out.winners);
        }
        let t = Tensor::new(v.rows(), k, data)?;
        Ok(self.push(Op::SoftMap { x, leaf, winners }, t))
    }

    /// Row-wise sign-domain leaf encoding: B×k soft signs → B×len.
    pub fn sign_encode(&mut self, x: Var, leaf: LeafKind) -> Result<Var> {
        let v = self.value(x);
        let mut data = Vec::with_capacity(v.rows() * leaf.len());
        for r in 0..v.rows() {
            data.extend(leaf.encode_signs(v.row(r))?);
        }
        let t = Tensor::new(v.rows(), leaf.len(), data)?;
        Ok(self.push(Op::SignEncode { x, leaf }, t))
    }

    /// Soft-MAP against a full real codebook (2^k × n, row i = message i)
    /// for each row of `l` (B × n): B × k.
    pub fn codebook_max_log(&mut self, book: Var, l: Var, k: usize) -> Result<Var> {
        let cb = self.value(book);
        let words: Vec<Vec<f64>> = (0..cb.rows()).map(|r| cb.row(r).to_vec()).collect();
        let lv = self.value(l);
        let mut data = Vec::with_capacity(lv.rows() * k);
        let mut winners = Vec::with_capacity(lv.rows());
        for r in 0..lv.rows() {
            let out = soft_map_codebook(&words, k, lv.row(r))?;
            data.extend_from_slice(&out.llrs);
            winners.push(out.winners);
        }
        let t = Tensor::new(lv.rows(), k, data)?;
        Ok(self.push(Op::CodebookMaxLog { book, l, winners }, t))
    }

    /// Mean binary cross-entropy of logits `x` (LLRs, σ(x) = P(bit = 0))
    /// against 0/1 targets: −mean[(1−m)·log σ(x) + m·log(1−σ(x))].
    pub fn bce(&mut self, x: Var, targets: Tensor) -> Result<Var> {
        let v = self.value(x);
        if v.shape() != targets.shape() {
            return Err(shape_err("bce", format!("{:?} vs {:?}", v.shape(), targets.shape())));
        }
        let total: f64 = v
            .data()
            .iter()
            .zip(targets.data())
            .map(|(&l, &m)| {
                let p = sigmoid(l).clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
                -((1.0 - m) * p.ln() + m * (1.0 - p).ln())
            })
            .sum();
        let loss = total / v.len() as f64;
        Ok(self.push(Op::Bce { x, targets }, Tensor::scalar(loss)))
    }

    /// Scales every row to squared norm equal to the row length.
    pub fn row_normalize(&mut self, x: Var) -> Result<Var> {
        let v = self.value(x);
        let n = v.cols();
        let mut scales = Vec::with_capacity(v.rows());
        let mut data = Vec::with_capacity(v.len());
        for r in 0..v.rows() {
            let row = v.row(r);
            let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidParameter("cannot normalize an all-zero codeword".into()));
            }
            let s = (n as f64).sqrt() / norm;
            scales.push(s);
            data.extend(row.iter().map(|a| a * s));
        }
        let t = Tensor::new(v.rows(), n, data)?;
        Ok(self.push(Op::RowNormalize { x, scales }, t))
    }

    /// Reverse accumulation from a scalar node.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.value(loss).shape() != (1, 1) {
            return Err(shape_err("backward", format!("loss has shape {:?}", self.value(loss).shape())));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));
        for id in (0..=loss.0).rev() {
            let Some(g) = grads[id].take() else { continue };
            self.propagate(id, &g, &mut grads);
            grads[id] = Some(g);
        }
        Ok(Gradients { grads, shapes: self.nodes.iter().map(|n| n.value.shape()).collect() })
    }

    fn propagate(&self, id: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let node = &self.nodes[id];
        let acc = |grads: &mut [Option<Tensor>], v: Var, t: Tensor| match &mut grads[v.0] {
            Some(e) => e.add_assign(&t),
            slot @ None => *slot = Some(t),
        };
        let like = |v: Var, data: Vec<f64>| {
            let s = self.value(v);
            Tensor::new(s.rows(), s.cols(), data).expect("gradient shape")
        };
        let elementwise = |x: Var, f: &dyn Fn(f64, f64) -> f64| {
            like(x, self.value(x).data().iter().zip(g.data()).map(|(&a, &gg)| f(a, gg)).collect())
        };
        match &node.op {
            Op::Leaf => {}
            Op::Affine { x, w, b } => {
                let (bt, inp) = self.value(*x).shape();
                let out = self.value(*w).cols();
                let gx = matmul_bt(g.data(), self.value(*w).data(), bt, out, inp);
                let gw = matmul_at(self.value(*x).data(), g.data(), bt, inp, out);
                let mut gb = vec![0.0; out];
                for row in g.data().chunks_exact(out) {
                    for (s, v) in gb.iter_mut().zip(row) {
                        *s += v;
                    }
                }
                acc(grads, *x, like(*x, gx));
                acc(grads, *w, like(*w, gw));
                acc(grads, *b, like(*b, gb));
            }
            Op::Selu(x) => acc(grads, *x, elementwise(*x, &|a, gg| gg * selu_grad(a))),
            Op::Sigmoid(x) => acc(
                grads,
                *x,
                like(*x, node.value.data().iter().zip(g.data()).map(|(&s, &gg)| gg * s * (1.0 - s)).collect()),
            ),
            Op::SoftSign(x) => acc(
                grads,
                *x,
                like(*x, node.value.data().iter().zip(g.data()).map(|(&t, &gg)| gg * 0.5 * (1.0 - t * t)).collect()),
            ),
            Op::Scale(x, c) => acc(grads, *x, elementwise(*x, &|_, gg| c * gg)),
            Op::Add(a, b) => {
                acc(grads, *a, g.clone());
                acc(grads, *b, g.clone());
            }
            Op::Sub(a, b) => {
                acc(grads, *a, g.clone());
                acc(grads, *b, elementwise(*b, &|_, gg| -gg));
            }
            Op::Mul(a, b) => {
                let (va, vb) = (self.value(*a).data(), self.value(*b).data());
                acc(grads, *a, like(*a, vb.iter().zip(g.data()).map(|(y, gg)| y * gg).collect()));
                acc(grads, *b, like(*b, va.iter().zip(g.data()).map(|(x, gg)| x * gg).collect()));
            }
            Op::Lse(a, b) => {
                let (va, vb) = (self.value(*a).data(), self.value(*b).data());
                let mut ga = Vec::with_capacity(va.len());
                let mut gb = Vec::with_capacity(va.len());
                for ((&x, &y), &gg) in va.iter().zip(vb).zip(g.data()) {
                    let (dx, dy) = lse_grad(x, y);
                    ga.push(gg * dx);
                    gb.push(gg * dy);
                }
                acc(grads, *a, like(*a, ga));
                acc(grads, *b, like(*b, gb));
            }
            Op::Sum(x) => {
                let s = self.value(*x);
                acc(grads, *x, Tensor::filled(s.rows(), s.cols(), g.data()[0]));
            }
            Op::RowDot(a, b) => {
                let (va, vb) = (self.value(*a), self.value(*b));
                let c = va.cols();
                let mut ga = Vec::with_capacity(va.len());
                let mut gb = Vec::with_capacity(va.len());
                for r in 0..va.rows() {
                    let gg = g.data()[r];
                    ga.extend(vb.row(r).iter().map(|y| y * gg));
                    gb.extend(va.row(r).iter().map(|x| x * gg));
                }
                debug_assert_eq!(ga.len(), va.rows() * c);
                acc(grads, *a, like(*a, ga));
                acc(grads, *b, like(*b, gb));
            }
            Op::SliceCols { x, start } => {
                let s = self.value(*x);
                let mut gx = Tensor::zeros(s.rows(), s.cols());
                let w = g.cols();
                for r in 0..s.rows() {
                    gx.row_mut(r)[*start..start + w].copy_from_slice(g.row(r));
                }
                acc(grads, *x, gx);
            }
            Op::ConcatCols(parts) => {
                let mut off = 0;
                for &p in parts {
                    let s = self.value(p);
                    let mut gp = Vec::with_capacity(s.len());
                    for r in 0..s.rows() {
                        gp.extend_from_slice(&g.row(r)[off..off + s.cols()]);
                    }
                    off += s.cols();
                    acc(grads, p, like(p, gp));
                }
            }
            Op::StackCoords(parts) => {
                let c = parts.len();
                for (k, &p) in parts.iter().enumerate() {
                    let gp = (0..self.value(p).len()).map(|i| g.data()[i * c + k]).collect();
                    acc(grads, p, like(p, gp));
                }
            }
            Op::Reshape(x) => acc(grads, *x, like(*x, g.data().to_vec())),
            Op::Gather { x, rows } => {
                let s = self.value(*x);
                let mut gx = Tensor::zeros(s.rows(), s.cols());
                for (i, &r) in rows.iter().enumerate() {
                    for (a, b) in gx.row_mut(r).iter_mut().zip(g.row(i)) {
                        *a += b;
                    }
                }
                acc(grads, *x, gx);
            }
            Op::SoftMap { x, leaf, winners } => {
                let s = self.value(*x);
                let book: Vec<Vec<f64>> =
                    (0..1usize << leaf.dimension()).map(|i| leaf_codeword_signs(*leaf, i)).collect();
                let mut gx = Tensor::zeros(s.rows(), s.cols());
                for (r, row_w) in winners.iter().enumerate() {
                    let gr = g.row(r).to_vec();
                    let out = gx.row_mut(r);
                    for (i, [c0, c1]) in row_w.iter().enumerate() {
                        if gr[i] == 0.0 {
                            continue;
                        }
                        for ((o, a), b) in out.iter_mut().zip(&book[*c0]).zip(&book[*c1]) {
                            *o += gr[i] * (a - b);
                        }
                    }
                }
                acc(grads, *x, gx);
            }
            Op::SignEncode { x, leaf } => {
                let supports = column_supports(*leaf);
                let s = self.value(*x);
                let mut gx = Tensor::zeros(s.rows(), s.cols());
                for r in 0..s.rows() {
                    let sr = s.row(r).to_vec();
                    let gr = g.row(r);
                    let out = gx.row_mut(r);
                    for (j, sup) in supports.iter().enumerate() {
                        for (a, &i) in sup.iter().enumerate() {
                            let others: f64 = sup
                                .iter()
                                .enumerate()
                                .filter(|&(b, _)| b != a)
                                .map(|(_, &p)| sr[p])
                                .product();
                            out[i] += gr[j] * others;
                        }
                    }
                }
                acc(grads, *x, gx);
            }
            Op::CodebookMaxLog { book, l, winners } => {
                let (cb, lv) = (self.value(*book), self.value(*l));
                let mut gbook = Tensor::zeros(cb.rows(), cb.cols());
                let mut gl = Tensor::zeros(lv.rows(), lv.cols());
                for (r, row_w) in winners.iter().enumerate() {
                    for (i, [c0, c1]) in row_w.iter().enumerate() {
                        let gg = g.get(r, i);
                        if gg == 0.0 {
                            continue;
                        }
                        for (j, o) in gl.row_mut(r).iter_mut().enumerate() {
                            *o += gg * (cb.get(*c0, j) - cb.get(*c1, j));
                        }
                        for (o, &v) in gbook.row_mut(*c0).iter_mut().zip(lv.row(r)) {
                            *o += gg * v;
                        }
                        for (o, &v) in gbook.row_mut(*c1).iter_mut().zip(lv.row(r)) {
                            *o -= gg * v;
                        }
                    }
                }
                acc(grads, *book, gbook);
                acc(grads, *l, gl);
            }
            Op::Bce { x, targets } => {
                let v = self.value(*x);
                let scale = g.data()[0] / v.len() as f64;
                let gx = v
                    .data()
                    .iter()
                    .zip(targets.data())
                    .map(|(&l, &m)| {
                        let s = sigmoid(l);
                        if !(BCE_CLAMP..=1.0 - BCE_CLAMP).contains(&s) {
                            return 0.0;
                        }
                        // d/ds of the clamped loss times ds/dl
                        scale * (-(1.0 - m) / s + m / (1.0 - s)) * s * (1.0 - s)
                    })
                    .collect();
                acc(grads, *x, like(*x, gx));
            }
            Op::RowNormalize { x, scales } => {
                let v = self.value(*x);
                let n = v.cols() as f64;
                let mut gx = Vec::with_capacity(v.len());
                for (r, &s) in scales.iter().enumerate() {
                    // y = s·x with s = √n/‖x‖: ∂ = s·(g − x (x·g)/‖x‖²)
                    let xr = v.row(r);
                    let gr = g.row(r);
                    let norm_sq = n / (s * s);
                    let dot: f64 = xr.iter().zip(gr).map(|(a, b)| a * b).sum();
                    gx.extend(xr.iter().zip(gr).map(|(a, b)| s * (b - a * dot / norm_sq)));
                }
                acc(grads, *x, like(*x, gx));
            }
        }
    }

    /// Scalar operation count of the recorded forward computation.
    pub fn count_ops(&self, ops: &mut impl Ops) {
        for node in &self.nodes {
            let len = node.value.len();
            match &node.op {
                Op::Leaf | Op::SliceCols { .. } | Op::ConcatCols(_) | Op::StackCoords(_) | Op::Reshape(_) => {}
                Op::Gather { .. } => {}
                Op::Affine { x, .. } => {
                    let inp = self.value(*x).cols();
                    ops.mul(len * inp);
                    ops.add(len * inp);
                }
                Op::Selu(x) => {
                    ops.cmp(len);
                    ops.mul(len);
                    let neg = self.value(*x).data().iter().filter(|&&v| v <= 0.0).count();
                    ops.exp_log(neg);
                    ops.add(neg);
                    ops.mul(neg);
                }
                Op::Sigmoid(_) => {
                    ops.exp_log(len);
                    ops.add(len);
                    ops.mul(len);
                }
                Op::SoftSign(_) => {
                    ops.mul(len);
                    ops.exp_log(len);
                }
                Op::Add(..) | Op::Sub(..) => ops.add(len),
                Op::Mul(..) | Op::Scale(..) => ops.mul(len),
                Op::Lse(..) => ops.lse(len),
                Op::Sum(x) => ops.add(self.value(*x).len().saturating_sub(1)),
                Op::RowDot(a, _) => {
                    ops.mul(self.value(*a).len());
                    ops.add(self.value(*a).len());
                }
                Op::SoftMap { x, leaf, .. } => {
                    let v = self.value(*x);
                    for r in 0..v.rows() {
                        let _ = soft_map_counted(*leaf, v.row(r), ops);
                    }
                }
                Op::SignEncode { leaf, .. } => {
                    let muls: usize = column_supports(*leaf).iter().map(|s| s.len().saturating_sub(1)).sum();
                    ops.mul(muls * node.value.rows());
                }
                Op::CodebookMaxLog { book, .. } => {
                    let cb = self.value(*book);
                    let rows = node.value.rows();
                    ops.mul(rows * cb.len());
                    ops.add(rows * cb.len());
                    ops.cmp(rows * cb.rows() * node.value.cols());
                }
                Op::Bce { .. } | Op::RowNormalize { .. } => {
                    ops.mul(len);
                    ops.add(len);
                    ops.exp_log(len);
                }
            }
        }
    }
}

/// For each codeword position of a leaf, the message bits XORed into it.
pub(crate) fn column_supports(leaf: LeafKind) -> Vec<Vec<usize>> {
    let k = leaf.dimension();
    let mut sup = vec![Vec::new(); leaf.len()];
    for i in 0..k {
        for (j, &s) in leaf_codeword_signs(leaf, 1 << i).iter().enumerate() {
            if s < 0.0 {
                sup[j].push(i);
            }
        }
    }
    sup
}
