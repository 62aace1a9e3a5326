//! Monte-Carlo error rates, BLER decomposition, distance analysis and
//! decoder operation counts.

pub mod distance;
pub mod opcount;
pub mod scheme;
pub mod sim;

pub use distance::{
    euclidean, gaussian_codebook, gaussian_encoder, pairwise_distance_histogram, pairwise_distances, DistanceHistogram,
    DistanceMode, DEFAULT_BINS, HISTOGRAM_HEADER,
};
pub use opcount::{OpCounter, Ops};
pub use scheme::{count_decode_ops, nearest_codeword, DecoderKind, Encoder, Scheme, MAX_CODEBOOK_K};
pub use sim::{
    bler_decomposition, results_csv, simulate_error_rates, standard_error, BlerDecomposition, LeafContribution,
    SimConfig, SimResult, RESULTS_HEADER,
};
