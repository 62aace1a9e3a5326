use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::autodiff::tape::{Tape, Var};
use crate::autodiff::tensor::Tensor;
use crate::error::{Error, Result};

/// Standard deviation of the N(0, 0.02²) initialization.
pub const INIT_STD: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Selu,
    Linear,
}

/// Fully connected stack: SeLU after every hidden layer, linear output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseBlock {
    pub widths: Vec<usize>,
    pub activations: Vec<Activation>,
    pub weights: Vec<Tensor>,
    pub biases: Vec<Tensor>,
}

/// Parameter handles of a block registered on a tape.
#[derive(Clone, Debug)]
pub struct BoundBlock {
    pub params: Vec<Var>,
    activations: Vec<Activation>,
}

impl DenseBlock {
    /// Zero-initialized block with layer widths `[in, h1, …, out]`.
    pub fn zeros(widths: &[usize]) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(Error::InvalidParameter(format!("bad layer widths {widths:?}")));
        }
        let layers = widths.len() - 1;
        let mut activations = vec![Activation::Selu; layers];
        activations[layers - 1] = Activation::Linear;
        Ok(Self {
            widths: widths.to_vec(),
            activations,
            weights: widths.windows(2).map(|w| Tensor::zeros(w[0], w[1])).collect(),
            biases: widths[1..].iter().map(|&w| Tensor::zeros(1, w)).collect(),
        })
    }

    /// Redraws every weight and bias i.i.d. from N(0, 0.02²).
    pub fn init_weights<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let dist = Normal::new(0.0, INIT_STD).expect("valid std");
        for t in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            for v in t.data_mut() {
                *v = dist.sample(rng);
            }
        }
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|t| t.len()).sum()
    }

    /// Parameters in canonical order `w0, b0, w1, b1, …`.
    pub fn params(&self) -> Vec<&Tensor> {
        self.weights.iter().zip(&self.biases).flat_map(|(w, b)| [w, b]).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.weights.iter_mut().zip(self.biases.iter_mut()).flat_map(|(w, b)| [w, b]).collect()
    }

    pub fn bind(&self, tape: &mut Tape) -> BoundBlock {
        BoundBlock {
            params: self.params().into_iter().map(|t| tape.leaf(t.clone())).collect(),
            activations: self.activations.clone(),
        }
    }

    /// Untaped forward pass on a batch of rows.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape);
        let xv = tape.leaf(x.clone());
        let y = bound.apply(&mut tape, xv)?;
        Ok(tape.value(y).clone())
    }
}

impl BoundBlock {
    pub fn apply(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        let mut h = x;
        for (layer, act) in self.params.chunks_exact(2).zip(&self.activations) {
            h = tape.affine(h, layer[0], layer[1])?;
            if *act == Activation::Selu {
                h = tape.selu(h);
            }
        }
        Ok(h)
    }
}
