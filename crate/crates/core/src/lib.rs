//! Classification by ensembles of randomly generated feedforward networks.
//!
//! Instead of optimizing one network's parameters, sample networks with
//! i.i.d. random weights, score each by its error count on the training
//! set, and classify by the Gibbs-weighted ensemble average. Rejection
//! sampling (keep only zero-error networks) is the zero-temperature limit
//! of the same construction. An exact enumeration oracle over finite
//! parameter grids provides the ground truth the Monte Carlo estimator is
//! verified against.

pub mod artifact;
pub mod cli;
pub mod config;
pub mod data;
pub mod ensemble;
pub mod error;
pub mod network;
pub mod oracle;
pub mod sampling;
pub mod selection;

pub use config::{Beta, Mode, RunConfig};
pub use ensemble::{build, convergence_curve, EnsembleEstimate, GibbsEnsemble};
pub use error::{Error, Result};
pub use network::{eval_network, eval_neuron, Activation, Architecture, NetworkParams, NeuronParams};
pub use sampling::{sample_architecture, sample_params, ArchitecturePool, ParamDistribution, PoolEntry, SeedSpec};
pub use selection::{
    accept_zero_error, accept_zero_error_pool, classify, error_count, gibbs_weights,
    gibbs_weights_variant, score_batch, Acceptance, ExponentVariant, ScoredNetwork,
};
