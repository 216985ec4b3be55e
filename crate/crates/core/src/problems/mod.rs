//! Builders, loaders and generators for the application SDPs.

pub mod fft;
pub mod graph;
pub mod matcomp;
pub mod phase;
pub mod stable_set;

pub use graph::{load_graph, Graph};
pub use matcomp::{
    build_matrix_completion, generate_matrix_completion, load_observations, recovered_block, sample_count, ObservationSet,
};
pub use phase::{build_phase_retrieval, generate_phase_retrieval, leading_signal, phase_error, DiffractionModel};
pub use stable_set::{build_stable_set, build_stable_set_over};
