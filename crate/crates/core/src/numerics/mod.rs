//! Spherical means of test functions, variation norms and scaling experiments.

pub mod embedding;
pub mod experiment;
pub mod quadrature;
pub mod sphere;
pub mod variation;

pub use embedding::{embedding_check, embedding_scan, EmbeddingResult, EmbeddingScan};
pub use experiment::{run_experiment, set_dimension, Example, ExperimentReport, ExperimentRow, ExperimentSpec};
pub use quadrature::GaussLegendre;
pub use sphere::{spherical_average_radial, Piece, RadialProfile};
pub use variation::{variation, Exponent, SampledVariationInput};
