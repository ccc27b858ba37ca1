//! Limiting spectral moments of sample covariance matrices whose columns are
//! stationary (Markov-dependent) sequences, with the non-crossing partition
//! combinatorics behind them and a Monte Carlo harness to check them.

pub mod counting;
pub mod eigen;
pub mod error;
pub mod format;
pub mod graphs;
pub mod models;
pub mod moments;
pub mod partition;
pub mod rng;
pub mod sim;

pub use counting::{binomial, catalan, count_nc_by_block_sizes, enumerate_compositions, narayana, Composition};
pub use error::{Error, Result};
pub use graphs::{enumerate_consistent_graphs, max_component_graphs, ConsistentGraph};
pub use models::{
    chain_joint_moment, check_product_decay, covariance_matrix, h_finite, h_limit, h_szego, isserlis_moment,
    sample_path, spectral_density, CovarianceSpec, FiniteMarkovChain, IidDistribution, StationaryModel,
};
pub use moments::{
    limiting_moment, limiting_moment_exact, limiting_moment_via_nc, mp_moment, mp_moment_exact, qform_moment,
    AspectRatio, HSequence, QSequence, SequenceOrigin,
};
pub use partition::{enumerate_noncrossing, enumerate_partitions, ClosedBlockView, Partition};
pub use sim::{
    compare_reports, compare_to_prediction, eigenvalue_histogram, run_monte_carlo, sample_matrix, spectral_moments,
    Budget, Histogram, MomentReport, MomentRow, PredictionTarget, RunOptions, SimConfig, SimMode, SpectrumSample,
    Verdict,
};
