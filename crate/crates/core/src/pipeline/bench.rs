//! Scaling benchmark: pairwise GED supervision versus per-instance
//! autoencoder epochs across corpus sizes.
//!
//! The transductive regime is dominated by generating pairwise GED
//! targets: all C(N,2) combinations, measured here as a serial loop so the
//! quadratic law shows independent of core count. The inductive regime
//! trains per instance, so an epoch is linear in N. Log-log slopes over
//! the measured times estimate the exponents.

use super::PipelineError;
use crate::embed::{
    Adam, Architecture, EmbeddingModel, EncoderConfig, NodeFeatureProvider, TrainingRegime,
};
use crate::ged::approx_ged_bipartite;
use crate::ged::synthetic::{generate_synthetic_graphs, SyntheticConfig};
use crate::relational::Taxonomies;
use crate::taxonomy::Taxonomy;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchRegime {
    Transductive,
    Inductive,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    /// Corpus sizes, ascending.
    pub sizes: Vec<usize>,
    pub regime: BenchRegime,
    pub seed: u64,
    /// Timing repetitions; the minimum is kept.
    pub reps: usize,
    /// Epochs averaged per inductive measurement.
    pub epochs_per_measure: usize,
    pub graph_size_range: (usize, usize),
    pub edge_prob: f64,
    pub hidden_dim: usize,
    pub feature_dim: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![50, 100, 200],
            regime: BenchRegime::Both,
            seed: 0,
            reps: 3,
            epochs_per_measure: 3,
            graph_size_range: (4, 8),
            edge_prob: 0.25,
            hidden_dim: 8,
            feature_dim: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub regime: String,
    pub corpus_size: usize,
    pub seconds: f64,
    /// Pairs priced (transductive) or graphs visited per epoch (inductive).
    pub work_items: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Fitted log-log slope of seconds against corpus size, per regime;
    /// absent with fewer than two sizes.
    pub slopes: BTreeMap<String, f64>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("regime,corpus_size,seconds,work_items\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.regime, r.corpus_size, r.seconds, r.work_items
            ));
        }
        out
    }

    pub fn slopes_csv(&self) -> String {
        let mut out = String::from("regime,slope\n");
        for (regime, slope) in &self.slopes {
            out.push_str(&format!("{regime},{slope}\n"));
        }
        out
    }
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let cov: f64 = points
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let var: f64 = points.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    cov / var
}

/// Measure supervision-target generation and autoencoder epoch times over
/// synthetic corpora of the given sizes.
pub fn bench_scaling(
    config: &BenchConfig,
    taxonomy: &Taxonomy,
    roles: &Taxonomy,
) -> Result<BenchReport, PipelineError> {
    if config.sizes.is_empty() || config.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PipelineError::InvalidConfig {
            reason: "bench sizes must be ascending and non-empty".to_string(),
        });
    }
    taxonomy.ensure_all_pairs();
    roles.ensure_all_pairs();
    let tx = Taxonomies {
        concepts: taxonomy,
        roles,
    };
    let provider = NodeFeatureProvider::hashed(config.feature_dim, config.seed);
    let mut rows = Vec::new();
    let mut trans_points = Vec::new();
    let mut induc_points = Vec::new();

    for &n in &config.sizes {
        let gen = SyntheticConfig {
            seed: config.seed ^ (n as u64).wrapping_mul(0x9E3779B97F4A7C15),
            count: n,
            size_range: config.graph_size_range,
            edge_prob: config.edge_prob,
            ..Default::default()
        };
        let graphs = generate_synthetic_graphs(&gen, taxonomy)?;

        if matches!(config.regime, BenchRegime::Transductive | BenchRegime::Both) {
            let pairs = n * (n - 1) / 2;
            let mut best = f64::INFINITY;
            for _ in 0..config.reps {
                let start = Instant::now();
                let mut checksum = 0.0f64;
                for i in 0..graphs.len() {
                    for j in (i + 1)..graphs.len() {
                        let r = approx_ged_bipartite(&graphs[i], &graphs[j], &tx)?;
                        checksum += r.cost.value().unwrap_or(0.0);
                    }
                }
                let elapsed = start.elapsed().as_secs_f64();
                std::hint::black_box(checksum);
                best = best.min(elapsed);
            }
            rows.push(BenchRow {
                regime: "transductive".to_string(),
                corpus_size: n,
                seconds: best,
                work_items: pairs,
            });
            trans_points.push(((n as f64).ln(), best.ln()));
        }

        if matches!(config.regime, BenchRegime::Inductive | BenchRegime::Both) {
            let encoder = EncoderConfig {
                hidden_dim: config.hidden_dim,
                seed: config.seed,
                ..EncoderConfig::new(Architecture::Gcn)
            };
            let mut model =
                EmbeddingModel::init(&encoder, TrainingRegime::InductiveVgae, config.feature_dim)
                    .map_err(PipelineError::Embed)?;
            let tensors: Vec<_> = graphs
                .iter()
                .map(|g| crate::embed::graph_tensors(g, &provider))
                .collect::<Result<_, _>>()
                .map_err(PipelineError::Embed)?;
            let mut adam = Adam::new(1e-3, model.parameter_count());
            let mut best = f64::INFINITY;
            for rep in 0..config.reps {
                let start = Instant::now();
                for epoch in 0..config.epochs_per_measure {
                    crate::embed::inductive_epoch(
                        &mut model,
                        &mut adam,
                        &tensors,
                        32,
                        config.seed ^ (rep * 1000 + epoch) as u64,
                        config.seed ^ (rep * 7777 + epoch) as u64,
                    );
                }
                let elapsed = start.elapsed().as_secs_f64() / config.epochs_per_measure as f64;
                best = best.min(elapsed);
            }
            rows.push(BenchRow {
                regime: "inductive".to_string(),
                corpus_size: n,
                seconds: best,
                work_items: n,
            });
            induc_points.push(((n as f64).ln(), best.ln()));
        }
    }

    let mut slopes = BTreeMap::new();
    if trans_points.len() >= 2 {
        slopes.insert("transductive".to_string(), fit_slope(&trans_points));
    }
    if induc_points.len() >= 2 {
        slopes.insert("inductive".to_string(), fit_slope(&induc_points));
    }
    Ok(BenchReport { rows, slopes })
}
