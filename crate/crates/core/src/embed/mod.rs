//! Neural approximation of GED retrieval: node featurization,
//! message-passing encoders, Siamese GED regression, unsupervised graph
//! autoencoders, and cosine-similarity retrieval.

mod config;
mod encoder;
mod features;
mod index;
mod loss;
mod model;
mod train;

pub use config::{Architecture, EncoderConfig, Pooling, TrainingRegime};
pub use encoder::encode;
pub use features::NodeFeatureProvider;
pub use index::{EmbeddingIndex, SimilarityHit};
pub use loss::{gfa_loss, siamese_loss, vgae_losses, GfaLosses, VgaeLosses};
pub use model::{EmbeddingModel, ParamStore};
pub use train::{
    default_learning_rate, train_inductive, train_transductive, Adam, EpochRecord,
    InductiveConfig, InductiveRegime, TrainTrace, TransductiveConfig,
};

#[allow(unused_imports)]
pub(crate) use encoder::graph_tensors;
#[allow(unused_imports)]
pub(crate) use train::inductive_epoch;

use crate::scene::SceneGraphError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error(transparent)]
    Scene(#[from] SceneGraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("feature dimension {got} does not match the model's input dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid encoder configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error("model has no parameter named {name}")]
    UnknownParameter { name: String },
    #[error("parameter {name} expects {expected} values, got {got}")]
    ShapeMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("training needs at least 2 graphs, found {found}")]
    NotEnoughGraphs { found: usize },
    #[error("GED target for pair ({left}, {right}) is infinite; cannot regress against it")]
    InfiniteTarget { left: String, right: String },
    #[error("pretraining corpus overlaps the evaluation set at id {id}")]
    EvalOverlap { id: String },
    #[error("no eligible candidates in the index: every entry has class {class}")]
    EmptyEligibleIndex { class: String },
    #[error("{path}:{line}: bad word-vector file: {reason}")]
    BadWordVectorFile {
        path: String,
        line: u32,
        reason: String,
    },
}

/// Gradient support for the test suites: loss and flat parameter gradient
/// for each objective, so finite-difference checks can drive any regime.
pub mod gradients {
    use super::*;
    use crate::relational::Taxonomies;
    use crate::scene::SceneGraph;

    /// Siamese pair loss and its gradient with respect to every parameter.
    pub fn siamese_pair(
        model: &EmbeddingModel,
        provider: &NodeFeatureProvider,
        g1: &SceneGraph,
        g2: &SceneGraph,
        target: f64,
    ) -> Result<(f64, Vec<f64>), EmbedError> {
        let t1 = encoder::graph_tensors(g1, provider)?;
        let t2 = encoder::graph_tensors(g2, provider)?;
        let mut grads = vec![0.0; model.parameter_count()];
        let loss = loss::siamese_pair_grads(model, &t1, &t2, target, &mut grads);
        Ok((loss, grads))
    }

    /// Autoencoder loss (VGAE or GFA per the model's regime) and gradient.
    pub fn autoencoder(
        model: &EmbeddingModel,
        provider: &NodeFeatureProvider,
        graph: &SceneGraph,
        noise_seed: u64,
    ) -> Result<(f64, Vec<f64>), EmbedError> {
        let gt = encoder::graph_tensors(graph, provider)?;
        let mut grads = vec![0.0; model.parameter_count()];
        let loss = loss::autoencoder_grads(model, &gt, noise_seed, &mut grads);
        Ok((loss, grads))
    }

    /// Re-evaluate the loss at explicitly supplied parameters, leaving the
    /// model untouched. Drives central finite differences.
    pub fn loss_at(
        model: &EmbeddingModel,
        params: &[f64],
        provider: &NodeFeatureProvider,
        objective: &Objective,
    ) -> Result<f64, EmbedError> {
        let mut probe = model.clone();
        probe.params_mut().data_mut().copy_from_slice(params);
        match objective {
            Objective::Siamese { g1, g2, target } => {
                let t1 = encoder::graph_tensors(g1, provider)?;
                let t2 = encoder::graph_tensors(g2, provider)?;
                let mut scratch = vec![0.0; probe.parameter_count()];
                Ok(loss::siamese_pair_grads(&probe, &t1, &t2, *target, &mut scratch))
            }
            Objective::Autoencoder { graph, noise_seed } => {
                let gt = encoder::graph_tensors(graph, provider)?;
                let mut scratch = vec![0.0; probe.parameter_count()];
                Ok(loss::autoencoder_grads(&probe, &gt, *noise_seed, &mut scratch))
            }
        }
    }

    pub enum Objective {
        Siamese {
            g1: SceneGraph,
            g2: SceneGraph,
            target: f64,
        },
        Autoencoder {
            graph: SceneGraph,
            noise_seed: u64,
        },
    }

    /// Convenience: GED-target helper mirroring the training path.
    pub fn approx_target(
        g1: &SceneGraph,
        g2: &SceneGraph,
        tx: &Taxonomies,
    ) -> Option<f64> {
        crate::ged::approx_ged_bipartite(g1, g2, tx)
            .ok()
            .and_then(|r| r.cost.value())
    }
}
