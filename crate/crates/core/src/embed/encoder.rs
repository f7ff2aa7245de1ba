//! Message-passing forward and backward passes.
//!
//! All math is dense 64-bit per graph; nodes are processed in canonical
//! (id-sorted) order, so encoding is bit-identical under node/edge
//! permutations of the input. Backward passes are hand-derived and checked
//! against central finite differences in the test suites.
//!
//! Per layer, each node aggregates over its closed undirected neighborhood
//! and passes through a learned map with a rectifier:
//! GCN averages the closed neighborhood; GAT weights it by multi-head
//! attention; GIN sums neighbors plus `(1+eps)` times the node itself and
//! applies a two-layer perceptron.

use super::config::{Architecture, Pooling, TrainingRegime};
use super::features::NodeFeatureProvider;
use super::model::EmbeddingModel;
use super::EmbedError;
use crate::scene::SceneGraph;
use ndarray::{s, Array1, Array2, Axis};

const LEAKY_SLOPE: f64 = 0.2;

/// Dense per-graph inputs in canonical node order.
#[derive(Debug, Clone)]
pub(crate) struct GraphTensors {
    pub n: usize,
    pub x: Array2<f64>,
    /// Undirected unique neighbors, ascending, self excluded.
    pub neighbors: Vec<Vec<usize>>,
}

pub(crate) fn graph_tensors(
    graph: &SceneGraph,
    provider: &NodeFeatureProvider,
) -> Result<GraphTensors, EmbedError> {
    let indexed = graph.indexed()?;
    let n = indexed.node_count();
    let f = provider.dimension();
    let mut x = Array2::zeros((n, f));
    for (i, concept) in indexed.concepts.iter().enumerate() {
        let row = provider.lookup(concept);
        for (j, v) in row.iter().enumerate() {
            x[[i, j]] = *v;
        }
    }
    Ok(GraphTensors {
        n,
        x,
        neighbors: indexed.neighbor_sets(),
    })
}

#[derive(Debug)]
enum LayerCache {
    Gcn {
        agg: Array2<f64>,
        pre: Array2<f64>,
    },
    Gin {
        sh: Array2<f64>,
        z1: Array2<f64>,
        a1: Array2<f64>,
        pre: Array2<f64>,
    },
    Gat {
        p: Vec<Array2<f64>>,
        scores: Vec<Array2<f64>>,
        alpha: Vec<Array2<f64>>,
        pre: Array2<f64>,
    },
}

#[derive(Debug)]
pub(crate) struct BodyForward {
    /// Node states H^0 .. H^L.
    pub states: Vec<Array2<f64>>,
    caches: Vec<LayerCache>,
}

impl BodyForward {
    pub fn output(&self) -> &Array2<f64> {
        self.states.last().expect("at least the input state")
    }
}

fn relu(m: &Array2<f64>) -> Array2<f64> {
    m.mapv(|v| if v > 0.0 { v } else { 0.0 })
}

fn relu_gate(upstream: &Array2<f64>, pre: &Array2<f64>) -> Array2<f64> {
    let mut out = upstream.clone();
    out.zip_mut_with(pre, |g, &p| {
        if p <= 0.0 {
            *g = 0.0;
        }
    });
    out
}

/// Mean over the closed neighborhood.
fn gcn_matrix(gt: &GraphTensors) -> Array2<f64> {
    let n = gt.n;
    let mut a = Array2::zeros((n, n));
    for v in 0..n {
        let weight = 1.0 / (gt.neighbors[v].len() + 1) as f64;
        a[[v, v]] = weight;
        for &u in &gt.neighbors[v] {
            a[[v, u]] = weight;
        }
    }
    a
}

/// `(1 + eps) I + A`.
fn gin_matrix(gt: &GraphTensors, eps: f64) -> Array2<f64> {
    let n = gt.n;
    let mut a = Array2::zeros((n, n));
    for v in 0..n {
        a[[v, v]] = 1.0 + eps;
        for &u in &gt.neighbors[v] {
            a[[v, u]] = 1.0;
        }
    }
    a
}

fn closed_neighborhood(gt: &GraphTensors, v: usize) -> Vec<usize> {
    let mut row = gt.neighbors[v].clone();
    row.push(v);
    row.sort_unstable();
    row
}

pub(crate) fn forward_body(model: &EmbeddingModel, gt: &GraphTensors) -> BodyForward {
    let mut states = vec![gt.x.clone()];
    let mut caches = Vec::new();
    for layer in 0..model.config.layers {
        let h = states.last().expect("input state present");
        let (out, cache) = match model.config.architecture {
            Architecture::Gcn => {
                let w = model.params.view(&format!("layer{layer}.weight"));
                let agg = gcn_matrix(gt).dot(h);
                let pre = agg.dot(&w);
                (relu(&pre), LayerCache::Gcn { agg, pre })
            }
            Architecture::Gin => {
                let w1 = model.params.view(&format!("layer{layer}.mlp1"));
                let w2 = model.params.view(&format!("layer{layer}.mlp2"));
                let sh = gin_matrix(gt, model.config.gin_epsilon).dot(h);
                let z1 = sh.dot(&w1);
                let a1 = relu(&z1);
                let pre = a1.dot(&w2);
                (relu(&pre), LayerCache::Gin { sh, z1, a1, pre })
            }
            Architecture::Gat => {
                let heads = model.config.attention_heads;
                let head_dim = model.config.hidden_dim / heads;
                let w = model.params.view(&format!("layer{layer}.weight"));
                let a_src = model.params.view(&format!("layer{layer}.att_src"));
                let a_dst = model.params.view(&format!("layer{layer}.att_dst"));
                let n = gt.n;
                let mut pre = Array2::zeros((n, model.config.hidden_dim));
                let mut p_all = Vec::with_capacity(heads);
                let mut score_all = Vec::with_capacity(heads);
                let mut alpha_all = Vec::with_capacity(heads);
                for k in 0..heads {
                    let w_k = w.slice(s![.., k * head_dim..(k + 1) * head_dim]);
                    let p = h.dot(&w_k);
                    let src_scores: Array1<f64> = p.dot(&a_src.row(k));
                    let dst_scores: Array1<f64> = p.dot(&a_dst.row(k));
                    let mut scores = Array2::zeros((n, n));
                    let mut alpha = Array2::zeros((n, n));
                    for v in 0..n {
                        let hood = closed_neighborhood(gt, v);
                        let mut max_e = f64::NEG_INFINITY;
                        for &u in &hood {
                            let raw = src_scores[v] + dst_scores[u];
                            scores[[v, u]] = raw;
                            let e = if raw > 0.0 { raw } else { LEAKY_SLOPE * raw };
                            if e > max_e {
                                max_e = e;
                            }
                        }
                        let mut total = 0.0;
                        for &u in &hood {
                            let raw = scores[[v, u]];
                            let e = if raw > 0.0 { raw } else { LEAKY_SLOPE * raw };
                            let val = (e - max_e).exp();
                            alpha[[v, u]] = val;
                            total += val;
                        }
                        for &u in &hood {
                            alpha[[v, u]] /= total;
                        }
                    }
                    let out_k = alpha.dot(&p);
                    pre.slice_mut(s![.., k * head_dim..(k + 1) * head_dim])
                        .assign(&out_k);
                    p_all.push(p);
                    score_all.push(scores);
                    alpha_all.push(alpha);
                }
                (
                    relu(&pre),
                    LayerCache::Gat {
                        p: p_all,
                        scores: score_all,
                        alpha: alpha_all,
                        pre,
                    },
                )
            }
        };
        states.push(out);
        caches.push(cache);
    }
    BodyForward { states, caches }
}

/// Accumulate parameter gradients for `d_out = dL/dH^L`, returning nothing;
/// gradients land in `grads` (laid out like the model's parameter store).
pub(crate) fn backward_body(
    model: &EmbeddingModel,
    gt: &GraphTensors,
    fwd: &BodyForward,
    d_out: Array2<f64>,
    grads: &mut [f64],
) {
    let mut upstream = d_out;
    for layer in (0..model.config.layers).rev() {
        let h_in = &fwd.states[layer];
        upstream = match &fwd.caches[layer] {
            LayerCache::Gcn { agg, pre } => {
                let w = model.params.view(&format!("layer{layer}.weight"));
                let d_pre = relu_gate(&upstream, pre);
                {
                    let mut dw = model
                        .params
                        .grad_view_mut(grads, &format!("layer{layer}.weight"));
                    dw += &agg.t().dot(&d_pre);
                }
                let d_agg = d_pre.dot(&w.t());
                gcn_matrix(gt).t().dot(&d_agg)
            }
            LayerCache::Gin { sh, z1, a1, pre } => {
                let w1 = model.params.view(&format!("layer{layer}.mlp1"));
                let w2 = model.params.view(&format!("layer{layer}.mlp2"));
                let d_pre = relu_gate(&upstream, pre);
                {
                    let mut dw2 = model
                        .params
                        .grad_view_mut(grads, &format!("layer{layer}.mlp2"));
                    dw2 += &a1.t().dot(&d_pre);
                }
                let d_a1 = d_pre.dot(&w2.t());
                let d_z1 = relu_gate(&d_a1, z1);
                {
                    let mut dw1 = model
                        .params
                        .grad_view_mut(grads, &format!("layer{layer}.mlp1"));
                    dw1 += &sh.t().dot(&d_z1);
                }
                let d_sh = d_z1.dot(&w1.t());
                gin_matrix(gt, model.config.gin_epsilon).t().dot(&d_sh)
            }
            LayerCache::Gat {
                p,
                scores,
                alpha,
                pre,
            } => {
                let heads = model.config.attention_heads;
                let head_dim = model.config.hidden_dim / heads;
                let w = model.params.view(&format!("layer{layer}.weight"));
                let a_src = model.params.view(&format!("layer{layer}.att_src"));
                let a_dst = model.params.view(&format!("layer{layer}.att_dst"));
                let n = gt.n;
                let d_pre = relu_gate(&upstream, pre);
                let mut d_h = Array2::zeros(h_in.raw_dim());
                for k in 0..heads {
                    let d_out_k = d_pre.slice(s![.., k * head_dim..(k + 1) * head_dim]);
                    let p_k = &p[k];
                    let alpha_k = &alpha[k];
                    let scores_k = &scores[k];

                    // Output term: O = alpha · P.
                    let mut d_p = alpha_k.t().dot(&d_out_k);
                    let d_alpha = d_out_k.dot(&p_k.t());

                    // Softmax rows, then the leaky-rectified raw scores.
                    let mut d_s = Array1::zeros(n);
                    let mut d_t = Array1::zeros(n);
                    for v in 0..n {
                        let hood = closed_neighborhood(gt, v);
                        let dot: f64 = hood
                            .iter()
                            .map(|&u| alpha_k[[v, u]] * d_alpha[[v, u]])
                            .sum();
                        for &u in &hood {
                            let d_e = alpha_k[[v, u]] * (d_alpha[[v, u]] - dot);
                            let slope = if scores_k[[v, u]] > 0.0 {
                                1.0
                            } else {
                                LEAKY_SLOPE
                            };
                            let d_raw = d_e * slope;
                            d_s[v] += d_raw;
                            d_t[u] += d_raw;
                        }
                    }

                    // s = P a_src, t = P a_dst.
                    {
                        let mut da_src = model
                            .params
                            .grad_view_mut(grads, &format!("layer{layer}.att_src"));
                        let contribution = p_k.t().dot(&d_s);
                        for j in 0..head_dim {
                            da_src[[k, j]] += contribution[j];
                        }
                    }
                    {
                        let mut da_dst = model
                            .params
                            .grad_view_mut(grads, &format!("layer{layer}.att_dst"));
                        let contribution = p_k.t().dot(&d_t);
                        for j in 0..head_dim {
                            da_dst[[k, j]] += contribution[j];
                        }
                    }
                    for v in 0..n {
                        for j in 0..head_dim {
                            d_p[[v, j]] += d_s[v] * a_src[[k, j]] + d_t[v] * a_dst[[k, j]];
                        }
                    }

                    // P = H W_k.
                    {
                        let mut dw = model
                            .params
                            .grad_view_mut(grads, &format!("layer{layer}.weight"));
                        let mut dw_block = dw.slice_mut(s![.., k * head_dim..(k + 1) * head_dim]);
                        dw_block += &h_in.t().dot(&d_p);
                    }
                    let w_k = w.slice(s![.., k * head_dim..(k + 1) * head_dim]);
                    d_h += &d_p.dot(&w_k.t());
                }
                d_h
            }
        };
    }
}

#[derive(Debug)]
pub(crate) enum PoolCache {
    Plain,
    ArgMax(Vec<usize>),
}

pub(crate) fn pool(h: &Array2<f64>, pooling: Pooling) -> (Array1<f64>, PoolCache) {
    let (n, d) = h.dim();
    if n == 0 {
        return (Array1::zeros(d), PoolCache::Plain);
    }
    match pooling {
        Pooling::Sum => (h.sum_axis(Axis(0)), PoolCache::Plain),
        Pooling::Mean => (h.sum_axis(Axis(0)) / n as f64, PoolCache::Plain),
        Pooling::Max => {
            let mut out = Array1::zeros(d);
            let mut winners = vec![0usize; d];
            for j in 0..d {
                let mut best = h[[0, j]];
                let mut row = 0;
                for i in 1..n {
                    if h[[i, j]] > best {
                        best = h[[i, j]];
                        row = i;
                    }
                }
                out[j] = best;
                winners[j] = row;
            }
            (out, PoolCache::ArgMax(winners))
        }
    }
}

pub(crate) fn pool_backward(
    d_pooled: &Array1<f64>,
    n: usize,
    pooling: Pooling,
    cache: &PoolCache,
) -> Array2<f64> {
    let d = d_pooled.len();
    let mut out = Array2::zeros((n, d));
    if n == 0 {
        return out;
    }
    match (pooling, cache) {
        (Pooling::Sum, _) => {
            for i in 0..n {
                for j in 0..d {
                    out[[i, j]] = d_pooled[j];
                }
            }
        }
        (Pooling::Mean, _) => {
            let scale = 1.0 / n as f64;
            for i in 0..n {
                for j in 0..d {
                    out[[i, j]] = d_pooled[j] * scale;
                }
            }
        }
        (Pooling::Max, PoolCache::ArgMax(winners)) => {
            for j in 0..d {
                out[[winners[j], j]] = d_pooled[j];
            }
        }
        (Pooling::Max, PoolCache::Plain) => unreachable!("max pooling caches winners"),
    }
    out
}

/// Node-level output feeding the pooled graph embedding: the final body
/// state for Siamese models, the mu head for variational ones.
pub(crate) fn node_embedding(model: &EmbeddingModel, fwd: &BodyForward) -> Array2<f64> {
    match model.regime {
        TrainingRegime::TransductiveSiamese => fwd.output().clone(),
        TrainingRegime::InductiveVgae | TrainingRegime::InductiveGfa => {
            fwd.output().dot(&model.params.view("head.mu"))
        }
    }
}

/// Embed one graph. Deterministic for fixed parameters and invariant to
/// input node/edge ordering.
pub fn encode(
    graph: &SceneGraph,
    model: &EmbeddingModel,
    provider: &NodeFeatureProvider,
) -> Result<Vec<f64>, EmbedError> {
    if provider.dimension() != model.input_dim {
        return Err(EmbedError::DimensionMismatch {
            expected: model.input_dim,
            got: provider.dimension(),
        });
    }
    let gt = graph_tensors(graph, provider)?;
    let fwd = forward_body(model, &gt);
    let nodes = node_embedding(model, &fwd);
    let (pooled, _) = pool(&nodes, model.config.pooling);
    Ok(pooled.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::config::EncoderConfig;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn provider() -> NodeFeatureProvider {
        NodeFeatureProvider::hashed(3, 9)
    }

    fn demo_graph() -> SceneGraph {
        SceneGraph::new("g", "c")
            .with_node("a", "cat")
            .with_node("b", "keyboard")
            .with_node("c", "table")
            .with_edge("a", "on", "b")
            .with_edge("b", "on", "c")
            .with_edge("a", "near", "c")
    }

    #[test]
    fn single_node_gcn_is_rectified_linear_map() {
        let fp = provider();
        let cfg = EncoderConfig::small(Architecture::Gcn, 4, 5);
        let mut model =
            EmbeddingModel::init(&cfg, TrainingRegime::TransductiveSiamese, 3).unwrap();
        #[rustfmt::skip]
        let w = vec![
            1.0, -1.0, 0.5, 2.0,
            0.0,  1.0, 1.0, -2.0,
            3.0,  0.0, -1.0, 1.0,
        ];
        model.set_parameter("layer0.weight", &w).unwrap();
        let g = SceneGraph::new("g", "c").with_node("only", "cat");
        let x = fp.lookup("cat");
        let expected: Vec<f64> = (0..4)
            .map(|j| {
                let v: f64 = (0..3).map(|i| x[i] * w[i * 4 + j]).sum();
                v.max(0.0)
            })
            .collect();
        let got = encode(&g, &model, &fp).unwrap();
        for (e, g) in expected.iter().zip(&got) {
            assert!((e - g).abs() < 1e-12);
        }
    }

    #[test]
    fn permuted_inputs_encode_identically() {
        let fp = provider();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for arch in [Architecture::Gcn, Architecture::Gat, Architecture::Gin] {
            let cfg = EncoderConfig::small(arch, 4, 21);
            let model =
                EmbeddingModel::init(&cfg, TrainingRegime::TransductiveSiamese, 3).unwrap();
            let g = demo_graph();
            let base = encode(&g, &model, &fp).unwrap();
            for _ in 0..5 {
                let mut shuffled = g.clone();
                shuffled.nodes.shuffle(&mut rng);
                shuffled.edges.shuffle(&mut rng);
                assert_eq!(encode(&shuffled, &model, &fp).unwrap(), base);
            }
        }
    }

    #[test]
    fn gin_separates_non_isomorphic_labeled_graphs() {
        let fp = provider();
        // Same label multiset, different wiring.
        let g1 = SceneGraph::new("g1", "c")
            .with_node("a", "cat")
            .with_node("b", "cat")
            .with_node("c", "dog")
            .with_edge("a", "on", "b");
        let g2 = SceneGraph::new("g2", "c")
            .with_node("a", "cat")
            .with_node("b", "cat")
            .with_node("c", "dog")
            .with_edge("a", "on", "c");
        let mut distinct = 0;
        for seed in 0..8 {
            let cfg = EncoderConfig::small(Architecture::Gin, 6, seed);
            let model =
                EmbeddingModel::init(&cfg, TrainingRegime::TransductiveSiamese, 3).unwrap();
            let h1 = encode(&g1, &model, &fp).unwrap();
            let h2 = encode(&g2, &model, &fp).unwrap();
            if h1 != h2 {
                distinct += 1;
            }
        }
        assert!(distinct >= 7, "GIN separated only {distinct}/8 seeds");
    }

    #[test]
    fn empty_graph_encodes_to_zeros() {
        let fp = provider();
        let cfg = EncoderConfig::small(Architecture::Gcn, 4, 0);
        let model = EmbeddingModel::init(&cfg, TrainingRegime::TransductiveSiamese, 3).unwrap();
        let g = SceneGraph::new("empty", "c");
        assert_eq!(encode(&g, &model, &fp).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let fp = NodeFeatureProvider::hashed(5, 0);
        let cfg = EncoderConfig::small(Architecture::Gcn, 4, 0);
        let model = EmbeddingModel::init(&cfg, TrainingRegime::TransductiveSiamese, 3).unwrap();
        assert!(matches!(
            encode(&demo_graph(), &model, &fp),
            Err(EmbedError::DimensionMismatch { .. })
        ));
    }
}
