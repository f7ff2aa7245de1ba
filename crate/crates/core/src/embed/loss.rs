//! Training objectives and their gradients.
//!
//! The Siamese regression loss pins embedding distances to GED targets; the
//! variational autoencoder losses reconstruct edges from latent inner
//! products with a closed-form Gaussian divergence; the feature-autoencoder
//! variant adds node-feature reconstruction. Sampling (reparameterization
//! noise, negative edges) is driven by an explicit seed so losses are pure
//! functions of (parameters, graph, seed) and finite differences are exact.

use super::encoder::{backward_body, forward_body, node_embedding, pool, pool_backward, BodyForward, GraphTensors};
use super::model::EmbeddingModel;
use super::EmbedError;
use crate::embed::config::TrainingRegime;
use crate::embed::features::NodeFeatureProvider;
use crate::scene::SceneGraph;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Squared gap between embedding distance and the GED target:
/// `(||h1 - h2|| - ged)^2`.
pub fn siamese_loss(h1: &[f64], h2: &[f64], ged: f64) -> f64 {
    assert_eq!(h1.len(), h2.len(), "embedding dimensions differ");
    let dist = h1
        .iter()
        .zip(h2)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    (dist - ged) * (dist - ged)
}

fn siamese_backward(h1: &[f64], h2: &[f64], ged: f64) -> (f64, Array1<f64>, Array1<f64>) {
    let d: Vec<f64> = h1.iter().zip(h2).map(|(a, b)| a - b).collect();
    let dist = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    let loss = (dist - ged) * (dist - ged);
    let mut dh1 = Array1::zeros(h1.len());
    let mut dh2 = Array1::zeros(h1.len());
    if dist > 1e-12 {
        let factor = 2.0 * (dist - ged) / dist;
        for i in 0..d.len() {
            dh1[i] = factor * d[i];
            dh2[i] = -factor * d[i];
        }
    }
    (loss, dh1, dh2)
}

/// Loss and parameter gradients for one graph pair under the Siamese
/// objective. Gradients accumulate into `grads`.
pub(crate) fn siamese_pair_grads(
    model: &EmbeddingModel,
    gt1: &GraphTensors,
    gt2: &GraphTensors,
    target: f64,
    grads: &mut [f64],
) -> f64 {
    let fwd1 = forward_body(model, gt1);
    let fwd2 = forward_body(model, gt2);
    let nodes1 = node_embedding(model, &fwd1);
    let nodes2 = node_embedding(model, &fwd2);
    let (h1, cache1) = pool(&nodes1, model.config.pooling);
    let (h2, cache2) = pool(&nodes2, model.config.pooling);
    let (loss, dh1, dh2) = siamese_backward(
        h1.as_slice().unwrap(),
        h2.as_slice().unwrap(),
        target,
    );
    for (gt, fwd, cache, dh) in [(gt1, &fwd1, &cache1, dh1), (gt2, &fwd2, &cache2, dh2)] {
        let d_nodes = pool_backward(&dh, gt.n, model.config.pooling, cache);
        backward_body(model, gt, fwd, d_nodes, grads);
    }
    loss
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VgaeLosses {
    pub edge_recon: f64,
    pub kl: f64,
}

impl VgaeLosses {
    pub fn total(&self) -> f64 {
        self.edge_recon + self.kl
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GfaLosses {
    pub edge_recon: f64,
    pub kl: f64,
    pub feat_recon: f64,
}

impl GfaLosses {
    pub fn total(&self) -> f64 {
        self.edge_recon + self.kl + self.feat_recon
    }
}

struct VariationalForward {
    body: BodyForward,
    mu: Array2<f64>,
    logvar: Array2<f64>,
    eps: Array2<f64>,
    z: Array2<f64>,
    positives: Vec<(usize, usize)>,
    negatives: Vec<(usize, usize)>,
}

fn standard_normals(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count + 1);
    while out.len() < count {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(radius * theta.cos());
        out.push(radius * theta.sin());
    }
    out.truncate(count);
    out
}

type PairList = Vec<(usize, usize)>;

/// Reconstruction treats edges as unordered pairs: the inner-product
/// decoder is symmetric, so direction is not recoverable at this stage.
fn edge_pairs(gt: &GraphTensors) -> (PairList, PairList) {
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for i in 0..gt.n {
        for j in (i + 1)..gt.n {
            if gt.neighbors[i].binary_search(&j).is_ok() {
                positives.push((i, j));
            } else {
                negatives.push((i, j));
            }
        }
    }
    (positives, negatives)
}

fn variational_forward(
    model: &EmbeddingModel,
    gt: &GraphTensors,
    noise_seed: u64,
) -> VariationalForward {
    let body = forward_body(model, gt);
    let h = body.output();
    let mu = h.dot(&model.params.view("head.mu"));
    let logvar = h.dot(&model.params.view("head.logvar"));
    let d = mu.ncols();

    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
    let noise = standard_normals(&mut rng, gt.n * d);
    let eps = Array2::from_shape_vec((gt.n, d), noise).expect("shape matches");
    let z = &mu + &(logvar.mapv(|v| (0.5 * v).exp()) * &eps);

    let (positives, mut non_edges) = edge_pairs(gt);
    // One negative per positive, sampled without replacement.
    let negatives = if non_edges.len() > positives.len() {
        for i in 0..positives.len() {
            let j = rng.gen_range(i..non_edges.len());
            non_edges.swap(i, j);
        }
        non_edges.truncate(positives.len());
        non_edges
    } else {
        non_edges
    };

    VariationalForward {
        body,
        mu,
        logvar,
        eps,
        z,
        positives,
        negatives,
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn recon_and_kl(vf: &VariationalForward) -> VgaeLosses {
    let count = vf.positives.len() + vf.negatives.len();
    let mut edge_recon = 0.0;
    if count > 0 {
        for &(i, j) in &vf.positives {
            let logit = vf.z.row(i).dot(&vf.z.row(j));
            edge_recon += softplus(-logit);
        }
        for &(i, j) in &vf.negatives {
            let logit = vf.z.row(i).dot(&vf.z.row(j));
            edge_recon += softplus(logit);
        }
        edge_recon /= count as f64;
    }
    let mut kl = 0.0;
    for (&m, &l) in vf.mu.iter().zip(vf.logvar.iter()) {
        kl += -0.5 * (1.0 + l - m * m - l.exp());
    }
    VgaeLosses { edge_recon, kl }
}

/// Edge-reconstruction and divergence terms for one graph; forward only.
pub fn vgae_losses(
    graph: &SceneGraph,
    model: &EmbeddingModel,
    provider: &NodeFeatureProvider,
    noise_seed: u64,
) -> Result<VgaeLosses, EmbedError> {
    let gt = super::encoder::graph_tensors(graph, provider)?;
    if gt.n == 0 {
        return Ok(VgaeLosses {
            edge_recon: 0.0,
            kl: 0.0,
        });
    }
    let vf = variational_forward(model, &gt, noise_seed);
    Ok(recon_and_kl(&vf))
}

/// VGAE losses plus mean-squared node-feature reconstruction; forward only.
pub fn gfa_loss(
    graph: &SceneGraph,
    model: &EmbeddingModel,
    provider: &NodeFeatureProvider,
    noise_seed: u64,
) -> Result<GfaLosses, EmbedError> {
    let gt = super::encoder::graph_tensors(graph, provider)?;
    if gt.n == 0 {
        return Ok(GfaLosses {
            edge_recon: 0.0,
            kl: 0.0,
            feat_recon: 0.0,
        });
    }
    let vf = variational_forward(model, &gt, noise_seed);
    let base = recon_and_kl(&vf);
    let xhat = vf.z.dot(&model.params.view("head.feat"));
    Ok(GfaLosses {
        edge_recon: base.edge_recon,
        kl: base.kl,
        feat_recon: feature_mse(&xhat, &gt.x),
    })
}

pub(crate) fn feature_mse(xhat: &Array2<f64>, x: &Array2<f64>) -> f64 {
    let count = x.len();
    if count == 0 {
        return 0.0;
    }
    xhat.iter()
        .zip(x.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / count as f64
}

/// Loss and parameter gradients for one graph under VGAE or GFA. Gradients
/// accumulate into `grads`; the returned value is the total loss.
pub(crate) fn autoencoder_grads(
    model: &EmbeddingModel,
    gt: &GraphTensors,
    noise_seed: u64,
    grads: &mut [f64],
) -> f64 {
    if gt.n == 0 {
        return 0.0;
    }
    let vf = variational_forward(model, &gt.clone(), noise_seed);
    let base = recon_and_kl(&vf);
    let d = vf.mu.ncols();
    let count = vf.positives.len() + vf.negatives.len();

    let mut d_z: Array2<f64> = Array2::zeros((gt.n, d));
    if count > 0 {
        let scale = 1.0 / count as f64;
        for &(i, j) in &vf.positives {
            let logit = vf.z.row(i).dot(&vf.z.row(j));
            let d_logit = -sigmoid(-logit) * scale;
            for k in 0..d {
                d_z[[i, k]] += d_logit * vf.z[[j, k]];
                d_z[[j, k]] += d_logit * vf.z[[i, k]];
            }
        }
        for &(i, j) in &vf.negatives {
            let logit = vf.z.row(i).dot(&vf.z.row(j));
            let d_logit = sigmoid(logit) * scale;
            for k in 0..d {
                d_z[[i, k]] += d_logit * vf.z[[j, k]];
                d_z[[j, k]] += d_logit * vf.z[[i, k]];
            }
        }
    }

    let mut total = base.total();
    if model.regime == TrainingRegime::InductiveGfa {
        let w_feat = model.params.view("head.feat");
        let xhat = vf.z.dot(&w_feat);
        total += feature_mse(&xhat, &gt.x);
        let scale = 2.0 / gt.x.len() as f64;
        let d_xhat = (&xhat - &gt.x) * scale;
        {
            let mut dw_feat = model.params.grad_view_mut(grads, "head.feat");
            dw_feat += &vf.z.t().dot(&d_xhat);
        }
        d_z += &d_xhat.dot(&w_feat.t());
    }

    // KL pulls mu toward 0 and logvar toward log 1.
    let mut d_mu = vf.mu.clone();
    let mut d_logvar = vf.logvar.mapv(|l| 0.5 * (l.exp() - 1.0));

    // Reparameterization: z = mu + exp(logvar/2) * eps.
    d_mu += &d_z;
    let half_std = vf.logvar.mapv(|l| 0.5 * (0.5 * l).exp());
    d_logvar += &(&d_z * &vf.eps * &half_std);

    let h = vf.body.output();
    {
        let mut dw_mu = model.params.grad_view_mut(grads, "head.mu");
        dw_mu += &h.t().dot(&d_mu);
    }
    {
        let mut dw_lv = model.params.grad_view_mut(grads, "head.logvar");
        dw_lv += &h.t().dot(&d_logvar);
    }
    let d_h = d_mu.dot(&model.params.view("head.mu").t())
        + d_logvar.dot(&model.params.view("head.logvar").t());
    backward_body(model, gt, &vf.body, d_h, grads);
    total
}
