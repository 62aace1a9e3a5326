use serde::{Deserialize, Serialize};

use crate::autodiff::{DenseBlock, Tensor};
use crate::codes::{build_polar_tree, build_rm_tree, rm_spec, CodeSpec, PlotkinTree, PolarSpec};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Code whose Plotkin tree forms the skeleton of a KO model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KoCode {
    Rm { m: usize, r: usize },
    /// `active` is the sorted 1-indexed information set.
    Polar { n: usize, active: Vec<usize> },
}

impl KoCode {
    pub fn tree(&self) -> Result<PlotkinTree> {
        match self {
            KoCode::Rm { m, r } => build_rm_tree(*m, *r),
            KoCode::Polar { n, active } => build_polar_tree(&PolarSpec::from_active_set(*n, active)?),
        }
    }

    pub fn spec(&self) -> Result<CodeSpec> {
        match self {
            KoCode::Rm { m, r } => rm_spec(*m, *r),
            KoCode::Polar { n, active } => Ok(PolarSpec::from_active_set(*n, active)?.code_spec()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            KoCode::Rm { m, r } => format!("KO({m},{r})"),
            KoCode::Polar { n, active } => format!("KO-Polar({n},{})", active.len()),
        }
    }

    /// Neuralization used for this family: every internal node for RM,
    /// every node but the root for Polar.
    pub fn default_neuralize(&self) -> Neuralize {
        match self {
            KoCode::Rm { .. } => Neuralize::AllInternal,
            KoCode::Polar { .. } => Neuralize::AllButRoot,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Three hidden SeLU layers of width 32.
    Standard,
    /// One hidden SeLU layer of width 4.
    Tiny,
}

impl Profile {
    pub fn hidden(&self) -> &'static [usize] {
        match self {
            Profile::Standard => &[32, 32, 32],
            Profile::Tiny => &[4],
        }
    }

    fn widths(&self, input: usize) -> Vec<usize> {
        let mut w = vec![input];
        w.extend_from_slice(self.hidden());
        w.push(1);
        w
    }
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Profile::Standard),
            "tiny" => Ok(Profile::Tiny),
            _ => Err(Error::InvalidParameter(format!("unknown profile '{s}' (standard|tiny)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neuralize {
    AllInternal,
    AllButRoot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    /// N(0, 0.02²) from the given seed.
    Random(u64),
    /// Every parameter exactly 0: the model reduces to the classical code.
    Zeros,
}

/// Neural blocks of one internal node: the encoder g̃ (2→1) and the decoder
/// pair f̃_left (2→1), f̃_right (4→1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeBlocks {
    pub encoder: DenseBlock,
    pub dec_left: DenseBlock,
    pub dec_right: DenseBlock,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KoModel {
    pub code: KoCode,
    pub tree: PlotkinTree,
    pub profile: Profile,
    pub neuralize: Neuralize,
    /// Indexed by internal node id; `None` for plain Plotkin nodes.
    pub blocks: Vec<Option<NodeBlocks>>,
    /// Seed of the initialization, if random.
    pub init_seed: Option<u64>,
    /// Free-form history (training runs applied to this model).
    pub lineage: Vec<String>,
}

impl KoModel {
    pub fn new(code: KoCode, profile: Profile, neuralize: Neuralize, init: Init) -> Result<Self> {
        let tree = code.tree()?;
        let count = tree.internal_count();
        let mut blocks = Vec::with_capacity(count);
        for id in 0..count {
            let neural = match neuralize {
                Neuralize::AllInternal => true,
                Neuralize::AllButRoot => id != 0,
            };
            blocks.push(if neural {
                Some(NodeBlocks {
                    encoder: DenseBlock::zeros(&profile.widths(2))?,
                    dec_left: DenseBlock::zeros(&profile.widths(2))?,
                    dec_right: DenseBlock::zeros(&profile.widths(4))?,
                })
            } else {
                None
            });
        }
        let mut model = Self {
            code,
            tree,
            profile,
            neuralize,
            blocks,
            init_seed: None,
            lineage: Vec::new(),
        };
        if let Init::Random(seed) = init {
            let mut rng = stream_rng(seed, 0);
            for b in model.blocks.iter_mut().flatten() {
                b.encoder.init_weights(&mut rng);
                b.dec_left.init_weights(&mut rng);
                b.dec_right.init_weights(&mut rng);
            }
            model.init_seed = Some(seed);
        }
        Ok(model)
    }

    /// KO(m, r) with every internal node neural.
    pub fn rm(m: usize, r: usize, profile: Profile, init: Init) -> Result<Self> {
        Self::new(KoCode::Rm { m, r }, profile, Neuralize::AllInternal, init)
    }

    /// KO counterpart of a Polar code; the root stays a Plotkin node.
    pub fn polar(spec: &PolarSpec, profile: Profile, init: Init) -> Result<Self> {
        Self::new(
            KoCode::Polar { n: spec.n, active: spec.active.clone() },
            profile,
            Neuralize::AllButRoot,
            init,
        )
    }

    pub fn n(&self) -> usize {
        self.tree.n
    }

    pub fn k(&self) -> usize {
        self.tree.k
    }

    pub fn encoder_block_count(&self) -> usize {
        self.blocks.iter().flatten().count()
    }

    pub fn decoder_block_count(&self) -> usize {
        2 * self.blocks.iter().flatten().count()
    }

    /// Encoder parameters in canonical order (node id, then layer).
    pub fn encoder_params(&self) -> Vec<&Tensor> {
        self.blocks.iter().flatten().flat_map(|b| b.encoder.params()).collect()
    }

    pub fn encoder_params_mut(&mut self) -> Vec<&mut Tensor> {
        self.blocks.iter_mut().flatten().flat_map(|b| b.encoder.params_mut()).collect()
    }

    /// Decoder parameters in canonical order (node id, left block, right block).
    pub fn decoder_params(&self) -> Vec<&Tensor> {
        self.blocks
            .iter()
            .flatten()
            .flat_map(|b| b.dec_left.params().into_iter().chain(b.dec_right.params()))
            .collect()
    }

    pub fn decoder_params_mut(&mut self) -> Vec<&mut Tensor> {
        self.blocks
            .iter_mut()
            .flatten()
            .flat_map(|b| b.dec_left.params_mut().into_iter().chain(b.dec_right.params_mut()))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.encoder_params().iter().chain(&self.decoder_params()).map(|t| t.len()).sum()
    }

    pub fn label(&self) -> String {
        self.code.label()
    }

}
