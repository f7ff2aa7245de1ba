//! Training loops: transductive Siamese GED regression and inductive
//! autoencoder pretraining with optional finetuning.
//!
//! Everything is seed-deterministic: pair sampling, epoch shuffles,
//! reparameterization noise, and negative edges all derive from the encoder
//! seed, and gradient accumulation folds in a fixed order regardless of how
//! the per-pair work is parallelized.

use super::config::{Architecture, EncoderConfig, TrainingRegime};
use super::encoder::{graph_tensors, GraphTensors};
use super::features::NodeFeatureProvider;
use super::loss::{autoencoder_grads, siamese_pair_grads};
use super::model::EmbeddingModel;
use super::EmbedError;
use crate::ged::approx_ged_bipartite;
use crate::relational::Taxonomies;
use crate::scene::SceneGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// First-order adaptive-moment optimizer; no weight decay.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(learning_rate: f64, parameter_count: usize) -> Adam {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; parameter_count],
            v: vec![0.0; parameter_count],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        debug_assert_eq!(params.len(), grads.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Architecture-specific defaults for the Siamese regression.
pub fn default_learning_rate(architecture: Architecture) -> f64 {
    match architecture {
        Architecture::Gcn => 0.04,
        Architecture::Gat | Architecture::Gin => 0.02,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransductiveConfig {
    /// Number of supervision pairs; half the corpus size when unset.
    pub pair_budget: Option<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    /// Architecture default when unset.
    pub learning_rate: Option<f64>,
    /// Divide GED targets by the summed node counts of the pair.
    pub normalize_targets: bool,
}

impl Default for TransductiveConfig {
    fn default() -> Self {
        TransductiveConfig {
            pair_budget: None,
            epochs: 50,
            batch_size: 32,
            learning_rate: None,
            normalize_targets: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InductiveRegime {
    Vgae,
    Gfa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InductiveConfig {
    pub regime: InductiveRegime,
    pub pretrain_epochs: usize,
    pub finetune_epochs: usize,
    pub pretrain_lr: f64,
    pub finetune_lr: f64,
    pub batch_size: usize,
}

impl Default for InductiveConfig {
    fn default() -> Self {
        InductiveConfig {
            regime: InductiveRegime::Vgae,
            pretrain_epochs: 30,
            finetune_epochs: 20,
            pretrain_lr: 1e-3,
            finetune_lr: 1e-4,
            batch_size: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub phase: String,
    pub epoch: usize,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    pub records: Vec<EpochRecord>,
}

impl TrainTrace {
    pub fn phase_losses(&self, phase: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.phase == phase)
            .map(|r| r.mean_loss)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,epoch,mean_loss\n");
        for r in &self.records {
            out.push_str(&format!("{},{},{}\n", r.phase, r.epoch, r.mean_loss));
        }
        out
    }
}

fn mix(a: u64, b: u64) -> u64 {
    // splitmix64 over the combined words.
    let mut x = a ^ b.wrapping_mul(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

fn decode_pair(index: usize, n: usize) -> (usize, usize) {
    let mut idx = index;
    for i in 0..n {
        let row = n - 1 - i;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
    }
    unreachable!("pair index out of range")
}

/// Train a Siamese encoder against approximate-GED targets over seeded
/// unordered pairs of the corpus.
pub fn train_transductive(
    graphs: &[SceneGraph],
    tx: &Taxonomies,
    encoder: &EncoderConfig,
    config: &TransductiveConfig,
    provider: &NodeFeatureProvider,
) -> Result<(EmbeddingModel, TrainTrace), EmbedError> {
    let n = graphs.len();
    if n < 2 {
        return Err(EmbedError::NotEnoughGraphs { found: n });
    }
    let total_pairs = n * (n - 1) / 2;
    let mut budget = config.pair_budget.unwrap_or_else(|| (n / 2).max(1));
    if budget > total_pairs {
        log::warn!("pair budget {budget} exceeds the {total_pairs} available pairs; clamping");
        budget = total_pairs;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(mix(encoder.seed, 0x7061697273));
    let mut indices: Vec<usize> = (0..total_pairs).collect();
    for i in 0..budget {
        let j = rng.gen_range(i..total_pairs);
        indices.swap(i, j);
    }
    indices.truncate(budget);
    let pairs: Vec<(usize, usize)> = indices.iter().map(|&i| decode_pair(i, n)).collect();

    let targets: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let result = approx_ged_bipartite(&graphs[i], &graphs[j], tx)
                .map_err(|e| EmbedError::InvalidConfig {
                    reason: format!("GED target failed: {e}"),
                })?;
            let cost = result.cost.value().ok_or_else(|| EmbedError::InfiniteTarget {
                left: graphs[i].id.clone(),
                right: graphs[j].id.clone(),
            })?;
            if config.normalize_targets {
                let denom = (graphs[i].node_count() + graphs[j].node_count()).max(1);
                Ok(cost / denom as f64)
            } else {
                Ok(cost)
            }
        })
        .collect::<Result<_, EmbedError>>()?;

    let tensors: Vec<GraphTensors> = graphs
        .iter()
        .map(|g| graph_tensors(g, provider))
        .collect::<Result<_, _>>()?;

    let mut model = EmbeddingModel::init(encoder, TrainingRegime::TransductiveSiamese, provider.dimension())?;
    let lr = config
        .learning_rate
        .unwrap_or_else(|| default_learning_rate(encoder.architecture));
    let mut adam = Adam::new(lr, model.parameter_count());
    let mut trace = TrainTrace::default();

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    for epoch in 1..=config.epochs {
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let contributions: Vec<(f64, Vec<f64>)> = batch
                .par_iter()
                .map(|&pair_idx| {
                    let (i, j) = pairs[pair_idx];
                    let mut grads = vec![0.0; model.parameter_count()];
                    let loss =
                        siamese_pair_grads(&model, &tensors[i], &tensors[j], targets[pair_idx], &mut grads);
                    (loss, grads)
                })
                .collect();
            let mut grads = vec![0.0; model.parameter_count()];
            let mut batch_loss = 0.0;
            for (loss, g) in &contributions {
                batch_loss += loss;
                for (acc, v) in grads.iter_mut().zip(g) {
                    *acc += v;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            for g in &mut grads {
                *g *= scale;
            }
            epoch_loss += batch_loss;
            adam.step(model.params_mut().data_mut(), &grads);
        }
        trace.records.push(EpochRecord {
            phase: "train".to_string(),
            epoch,
            mean_loss: epoch_loss / pairs.len() as f64,
        });
    }
    Ok((model, trace))
}

/// One pass over the corpus for an autoencoder model; returns the mean
/// per-graph loss. Exposed within the crate for the scaling benchmark.
pub(crate) fn inductive_epoch(
    model: &mut EmbeddingModel,
    adam: &mut Adam,
    tensors: &[GraphTensors],
    batch_size: usize,
    order_seed: u64,
    noise_base: u64,
) -> f64 {
    let mut order: Vec<usize> = (0..tensors.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(order_seed);
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut epoch_loss = 0.0;
    for batch in order.chunks(batch_size) {
        let contributions: Vec<(f64, Vec<f64>)> = batch
            .par_iter()
            .map(|&g_idx| {
                let mut grads = vec![0.0; model.parameter_count()];
                let loss = autoencoder_grads(
                    model,
                    &tensors[g_idx],
                    mix(noise_base, g_idx as u64),
                    &mut grads,
                );
                (loss, grads)
            })
            .collect();
        let mut grads = vec![0.0; model.parameter_count()];
        let mut batch_loss = 0.0;
        for (loss, g) in &contributions {
            batch_loss += loss;
            for (acc, v) in grads.iter_mut().zip(g) {
                *acc += v;
            }
        }
        let scale = 1.0 / batch.len() as f64;
        for g in &mut grads {
            *g *= scale;
        }
        epoch_loss += batch_loss;
        adam.step(model.params_mut().data_mut(), &grads);
    }
    if tensors.is_empty() {
        0.0
    } else {
        epoch_loss / tensors.len() as f64
    }
}

/// Unsupervised pretraining on a corpus disjoint from the evaluation set,
/// followed by an optional finetuning phase. The id-disjointness of the
/// pretraining corpus is enforced, not assumed.
pub fn train_inductive(
    pretrain: &[SceneGraph],
    finetune: Option<&[SceneGraph]>,
    eval_ids: &[String],
    encoder: &EncoderConfig,
    config: &InductiveConfig,
    provider: &NodeFeatureProvider,
) -> Result<(EmbeddingModel, TrainTrace), EmbedError> {
    let eval: HashSet<&str> = eval_ids.iter().map(String::as_str).collect();
    for g in pretrain {
        if eval.contains(g.id.as_str()) {
            return Err(EmbedError::EvalOverlap { id: g.id.clone() });
        }
    }
    if pretrain.is_empty() {
        return Err(EmbedError::NotEnoughGraphs { found: 0 });
    }

    let regime = match config.regime {
        InductiveRegime::Vgae => TrainingRegime::InductiveVgae,
        InductiveRegime::Gfa => TrainingRegime::InductiveGfa,
    };
    let mut model = EmbeddingModel::init(encoder, regime, provider.dimension())?;
    let mut trace = TrainTrace::default();

    let tensors: Vec<GraphTensors> = pretrain
        .iter()
        .map(|g| graph_tensors(g, provider))
        .collect::<Result<_, _>>()?;
    let mut adam = Adam::new(config.pretrain_lr, model.parameter_count());
    for epoch in 1..=config.pretrain_epochs {
        let mean = inductive_epoch(
            &mut model,
            &mut adam,
            &tensors,
            config.batch_size,
            mix(encoder.seed, mix(1, epoch as u64)),
            mix(encoder.seed, mix(2, epoch as u64)),
        );
        trace.records.push(EpochRecord {
            phase: "pretrain".to_string(),
            epoch,
            mean_loss: mean,
        });
    }

    if let Some(finetune_graphs) = finetune {
        let tensors: Vec<GraphTensors> = finetune_graphs
            .iter()
            .map(|g| graph_tensors(g, provider))
            .collect::<Result<_, _>>()?;
        let mut adam = Adam::new(config.finetune_lr, model.parameter_count());
        for epoch in 1..=config.finetune_epochs {
            let mean = inductive_epoch(
                &mut model,
                &mut adam,
                &tensors,
                config.batch_size,
                mix(encoder.seed, mix(3, epoch as u64)),
                mix(encoder.seed, mix(4, epoch as u64)),
            );
            trace.records.push(EpochRecord {
                phase: "finetune".to_string(),
                epoch,
                mean_loss: mean,
            });
        }
    }
    Ok((model, trace))
}
