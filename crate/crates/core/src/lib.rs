//! Heterogeneous-weight mixing matrices and decentralized gradient tracking.
//!
//! This crate builds lazy Metropolis–Hastings mixing matrices whose stationary
//! distribution matches a prescribed positive node-weight vector, synthesizes
//! network topologies whose degrees track those weights, computes the spectral
//! quantities (weighted spectral norms, gaps, penalty factors) that govern
//! consensus speed, evaluates the associated convergence-rate bounds, and
//! simulates decentralized stochastic gradient tracking under two weighting
//! strategies on a synthetic least-squares problem.
//!
//! All randomized components are driven by explicitly seeded ChaCha8 streams,
//! so every graph, matrix, and trajectory is bit-reproducible from its seed.

pub mod bounds;
pub mod error;
pub mod graph;
pub mod mixing;
pub mod rng;
pub mod sim;
pub mod spectral;
pub mod topology;
pub mod weights;

pub use error::{Error, Result};
pub use graph::{DegreeSequence, Graph};
pub use mixing::{doubly_stochastic, metropolis, MatrixKind, MixingMatrix, ValidationReport};
pub use sim::{QuadraticProblem, Strategy, Trajectory, TrajectoryRow};
pub use spectral::SpectralReport;
pub use topology::TopologySpec;
pub use weights::WeightVector;
