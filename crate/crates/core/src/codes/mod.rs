//! Code constructions: RM(m, r) and Polar(n, k) specs, their Plotkin trees
//! and encoders.

mod polar;
mod rm;
mod tree;

pub use polar::{
    build_polar_tree, polar_encode, polar_reliabilities, polar_spec, PolarSpec, DEFAULT_DESIGN_Z0,
    POLAR_64_7_ACTIVE,
};
pub use rm::{build_rm_tree, enumerate_codebook, rm_encode, rm_generator_rows, rm_spec, CodeSpec, CodeVariant, MAX_RM_M};
pub use tree::{rm_dimension, LeafInfo, LeafKind, Node, PlotkinTree, ENUMERATION_LIMIT};
