//! End-to-end experiment execution: retrieval per tier/engine, one final
//! GED per query for the explanation, and metrics against the exhaustive
//! GED ground truth.

use super::ingest::{ingest, Corpus, IngestOptions};
use super::PipelineError;
use crate::atomic::{retrieve_atomic, ConceptSet, DummyPenalty, SetEditConfig};
use crate::cost::Cost;
use crate::embed::{
    train_inductive, train_transductive, EmbeddingIndex, EncoderConfig, InductiveConfig,
    InductiveRegime, NodeFeatureProvider, TransductiveConfig,
};
use crate::ged::{ged, GedConfig, GedMode, GedResult};
use crate::metrics::{edit_metrics, MetricsReport, RankingPair};
use crate::rank::RankedCandidate;
use crate::relational::{retrieve_relational, roll_up, Exemplar};
use crate::scene::SceneGraph;
use crate::script::{EditOp, EditScript};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Atomic,
    Relational,
    Structural,
}

impl Tier {
    pub fn label(&self) -> &'static str {
        match self {
            Tier::Atomic => "atomic",
            Tier::Relational => "relational",
            Tier::Structural => "structural",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    ExhaustiveExact,
    ExhaustiveApprox,
    Transductive,
    InductiveVgae,
    InductiveGfa,
}

impl Engine {
    pub fn label(&self) -> &'static str {
        match self {
            Engine::ExhaustiveExact => "exact",
            Engine::ExhaustiveApprox => "lap",
            Engine::Transductive => "transductive",
            Engine::InductiveVgae => "inductive-vgae",
            Engine::InductiveGfa => "inductive-gfa",
        }
    }
}

/// How the counterfactual target class is chosen per query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// Every different-class candidate is eligible.
    #[default]
    Any,
    /// Restrict to the class most confused with the query's (needs the
    /// confusion table).
    Confusion,
    /// Restrict to the class of the nearest different-class candidate
    /// under the active tier's distance.
    Nearest,
}

fn default_ks() -> Vec<usize> {
    vec![1, 2, 4]
}
fn default_feature_dim() -> usize {
    64
}
fn default_exact_cap() -> usize {
    8
}
fn default_gt_mode() -> GedMode {
    GedMode::Approximate
}
fn default_encoder() -> EncoderConfig {
    EncoderConfig::new(crate::embed::Architecture::Gcn)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub tier: Tier,
    /// Structural retrieval engine; only valid (and defaulted to the LAP
    /// approximation) when the tier is structural.
    #[serde(default)]
    pub engine: Option<Engine>,
    #[serde(default = "default_encoder")]
    pub encoder: EncoderConfig,
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub target_mode: TargetMode,
    /// Mode for the ground-truth ranking and per-query explanations.
    #[serde(default = "default_gt_mode")]
    pub gt_mode: GedMode,
    #[serde(default = "default_exact_cap")]
    pub exact_cap: usize,
    /// Constant dummy-penalty override for the atomic tier.
    #[serde(default)]
    pub dummy_penalty: Option<f64>,
    /// Hashed-feature dimension when no word-vector file is given.
    #[serde(default = "default_feature_dim")]
    pub feature_dim: usize,
    #[serde(default)]
    pub word_vectors: Option<PathBuf>,
    #[serde(default)]
    pub transductive: TransductiveConfig,
    #[serde(default)]
    pub inductive: InductiveConfig,
    /// Pretraining corpus directory for the inductive engines.
    #[serde(default)]
    pub pretrain_dir: Option<PathBuf>,
    /// Optional finetuning corpus directory.
    #[serde(default)]
    pub finetune_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(tier: Tier) -> ExperimentConfig {
        ExperimentConfig {
            tier,
            engine: None,
            encoder: default_encoder(),
            ks: default_ks(),
            seed: 0,
            target_mode: TargetMode::Any,
            gt_mode: default_gt_mode(),
            exact_cap: default_exact_cap(),
            dummy_penalty: None,
            feature_dim: default_feature_dim(),
            word_vectors: None,
            transductive: TransductiveConfig::default(),
            inductive: InductiveConfig::default(),
            pretrain_dir: None,
            finetune_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.engine.is_some() && self.tier != Tier::Structural {
            return Err(PipelineError::InvalidConfig {
                reason: format!(
                    "engine is only valid for the structural tier, not {}",
                    self.tier.label()
                ),
            });
        }
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(PipelineError::InvalidConfig {
                reason: "ks must be non-empty positive cutoffs".to_string(),
            });
        }
        Ok(())
    }

    pub fn engine_label(&self) -> String {
        match self.tier {
            Tier::Structural => format!(
                "structural-{}",
                self.engine.unwrap_or(Engine::ExhaustiveApprox).label()
            ),
            tier => tier.label().to_string(),
        }
    }

    fn feature_provider(&self) -> Result<NodeFeatureProvider, PipelineError> {
        match &self.word_vectors {
            Some(path) => NodeFeatureProvider::from_word_vector_file(path)
                .map_err(PipelineError::Embed),
            None => Ok(NodeFeatureProvider::hashed(self.feature_dim, self.seed)),
        }
    }
}

/// One query's explanation: the retrieved counterfactual and the priced
/// edit script reaching it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationRecord {
    pub query_id: String,
    pub query_class: String,
    pub retrieved_id: String,
    pub retrieved_class: String,
    pub cost: Cost,
    pub node_edits: usize,
    pub edge_edits: usize,
    pub ops: Vec<EditOp>,
}

impl ExplanationRecord {
    pub fn script(&self) -> EditScript {
        EditScript::new(self.ops.clone())
    }
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub engine_label: String,
    pub report: MetricsReport,
    pub explanations: Vec<ExplanationRecord>,
}

/// The class most frequently confused with the query's class.
pub fn confusion_target(query: &SceneGraph, corpus: &Corpus) -> Result<String, PipelineError> {
    let table = corpus
        .confusion
        .as_ref()
        .ok_or(PipelineError::MissingConfusionTable)?;
    table
        .most_confused(&query.class)
        .map(str::to_string)
        .ok_or_else(|| PipelineError::NoConfusionRow {
            class: query.class.clone(),
        })
}

/// The class of the nearest different-class candidate under the tier's
/// distance.
pub fn nearest_target(
    query: &SceneGraph,
    corpus: &Corpus,
    tier: Tier,
    config: &ExperimentConfig,
) -> Result<String, PipelineError> {
    let tx = corpus.taxonomies();
    let top = match tier {
        Tier::Atomic => {
            let q = ConceptSet::from_graph(query);
            let pool: Vec<ConceptSet> = corpus
                .graphs
                .iter()
                .filter(|g| g.id != query.id)
                .map(ConceptSet::from_graph)
                .collect();
            let set_cfg = set_edit_config(config);
            retrieve_atomic(&q, &pool, &corpus.concepts, &set_cfg)?
                .into_iter()
                .next()
                .map(|r| r.instance_id)
        }
        Tier::Relational => {
            let q = roll_up(query);
            let pool: Vec<Exemplar> = corpus
                .graphs
                .iter()
                .filter(|g| g.id != query.id)
                .map(roll_up)
                .collect();
            retrieve_relational(&q, &pool, &tx)?
                .into_iter()
                .next()
                .map(|r| r.instance_id)
        }
        Tier::Structural => {
            let pool: Vec<SceneGraph> = corpus
                .graphs
                .iter()
                .filter(|g| g.id != query.id)
                .cloned()
                .collect();
            let ged_cfg = GedConfig {
                exact_cap: config.exact_cap,
            };
            crate::ged::retrieve_structural_exhaustive(query, &pool, &tx, config.gt_mode, &ged_cfg)?
                .into_iter()
                .next()
                .map(|(id, _)| id)
        }
    };
    let top = top.ok_or_else(|| PipelineError::EmptyPool {
        query: query.id.clone(),
        class: query.class.clone(),
    })?;
    Ok(corpus
        .graph(&top)
        .expect("retrieved candidate exists in corpus")
        .class
        .clone())
}

/// Select the target class for a query per the experiment's mode; `None`
/// means every different-class candidate stays eligible.
pub fn select_target_class(
    query: &SceneGraph,
    corpus: &Corpus,
    config: &ExperimentConfig,
) -> Result<Option<String>, PipelineError> {
    match config.target_mode {
        TargetMode::Any => Ok(None),
        TargetMode::Confusion => confusion_target(query, corpus).map(Some),
        TargetMode::Nearest => nearest_target(query, corpus, config.tier, config).map(Some),
    }
}

fn set_edit_config(config: &ExperimentConfig) -> SetEditConfig {
    SetEditConfig {
        dummy_penalty: match config.dummy_penalty {
            Some(c) => DummyPenalty::Constant(c),
            None => DummyPenalty::DepthCost,
        },
    }
}

fn ranked_ids(ranking: &[RankedCandidate]) -> Vec<String> {
    ranking.iter().map(|r| r.instance_id.clone()).collect()
}

/// Run one experiment: retrieval per query, a single final GED pricing the
/// top-1 explanation, and metrics against the exhaustive GED ground truth.
/// Fully deterministic for a fixed (corpus, config, seed).
pub fn run_experiment(
    config: &ExperimentConfig,
    corpus: &Corpus,
) -> Result<ExperimentOutput, PipelineError> {
    config.validate()?;
    corpus.concepts.ensure_all_pairs();
    corpus.roles.ensure_all_pairs();
    let tx = corpus.taxonomies();
    let ged_cfg = GedConfig {
        exact_cap: config.exact_cap,
    };

    // Eligible pools per query, honoring the target-class mode.
    let mut pools: Vec<(usize, Vec<usize>)> = Vec::new();
    for (qi, query) in corpus.graphs.iter().enumerate() {
        let target = select_target_class(query, corpus, config)?;
        let pool: Vec<usize> = corpus
            .graphs
            .iter()
            .enumerate()
            .filter(|(ci, c)| {
                *ci != qi
                    && c.class != query.class
                    && target.as_deref().is_none_or(|t| c.class == t)
            })
            .map(|(ci, _)| ci)
            .collect();
        if pool.is_empty() {
            return Err(PipelineError::EmptyPool {
                query: query.id.clone(),
                class: query.class.clone(),
            });
        }
        pools.push((qi, pool));
    }

    // Ground-truth GED for every (query, candidate) pair, in parallel with
    // deterministic assembly.
    let flat: Vec<(usize, usize)> = pools
        .iter()
        .flat_map(|(qi, pool)| pool.iter().map(|ci| (*qi, *ci)))
        .collect();
    let results: Vec<GedResult> = flat
        .par_iter()
        .map(|&(qi, ci)| ged(&corpus.graphs[qi], &corpus.graphs[ci], &tx, config.gt_mode, &ged_cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut gt: HashMap<(usize, usize), GedResult> = HashMap::new();
    for (&pair, result) in flat.iter().zip(results) {
        gt.insert(pair, result);
    }

    // Engine rankings.
    let predicted = predict_rankings(config, corpus, &pools, &gt)?;

    // Metrics and explanations.
    let mut ranking_pairs = Vec::new();
    let mut top_results = Vec::new();
    let mut explanations = Vec::new();
    for ((qi, pool), predicted_ids) in pools.iter().zip(&predicted) {
        let query = &corpus.graphs[*qi];
        let mut gt_ranking: Vec<RankedCandidate> = pool
            .iter()
            .map(|ci| RankedCandidate {
                instance_id: corpus.graphs[*ci].id.clone(),
                cost: gt[&(*qi, *ci)].cost,
            })
            .collect();
        crate::rank::sort_ranking(&mut gt_ranking);
        let lookup: BTreeMap<String, Cost> = gt_ranking
            .iter()
            .map(|r| (r.instance_id.clone(), r.cost))
            .collect();
        let rp = RankingPair::new(predicted_ids.clone(), ranked_ids(&gt_ranking), lookup)?;

        let top_id = &predicted_ids[0];
        let top_ci = corpus
            .graphs
            .iter()
            .position(|g| &g.id == top_id)
            .expect("top candidate exists");
        let result = gt[&(*qi, top_ci)].clone();
        explanations.push(ExplanationRecord {
            query_id: query.id.clone(),
            query_class: query.class.clone(),
            retrieved_id: top_id.clone(),
            retrieved_class: corpus.graphs[top_ci].class.clone(),
            cost: result.cost,
            node_edits: result.script.node_edit_count(),
            edge_edits: result.script.edge_edit_count(),
            ops: result.script.ops.clone(),
        });
        top_results.push(result);
        ranking_pairs.push(rp);
    }

    let edits = edit_metrics(&top_results)?;
    let report = MetricsReport::aggregate(&ranking_pairs, &config.ks, edits)?;
    Ok(ExperimentOutput {
        engine_label: config.engine_label(),
        report,
        explanations,
    })
}

fn predict_rankings(
    config: &ExperimentConfig,
    corpus: &Corpus,
    pools: &[(usize, Vec<usize>)],
    gt: &HashMap<(usize, usize), GedResult>,
) -> Result<Vec<Vec<String>>, PipelineError> {
    let tx = corpus.taxonomies();
    match config.tier {
        Tier::Atomic => {
            let views: Vec<ConceptSet> = corpus.graphs.iter().map(ConceptSet::from_graph).collect();
            let set_cfg = set_edit_config(config);
            pools
                .iter()
                .map(|(qi, pool)| {
                    let candidates: Vec<ConceptSet> =
                        pool.iter().map(|ci| views[*ci].clone()).collect();
                    let ranking =
                        retrieve_atomic(&views[*qi], &candidates, &corpus.concepts, &set_cfg)?;
                    Ok(ranked_ids(&ranking))
                })
                .collect()
        }
        Tier::Relational => {
            let views: Vec<Exemplar> = corpus.graphs.iter().map(roll_up).collect();
            pools
                .iter()
                .map(|(qi, pool)| {
                    let candidates: Vec<Exemplar> =
                        pool.iter().map(|ci| views[*ci].clone()).collect();
                    let ranking = retrieve_relational(&views[*qi], &candidates, &tx)?;
                    Ok(ranked_ids(&ranking))
                })
                .collect()
        }
        Tier::Structural => {
            let engine = config.engine.unwrap_or(Engine::ExhaustiveApprox);
            match engine {
                Engine::ExhaustiveExact | Engine::ExhaustiveApprox => {
                    let mode = if engine == Engine::ExhaustiveExact {
                        GedMode::Exact
                    } else {
                        GedMode::Approximate
                    };
                    let ged_cfg = GedConfig {
                        exact_cap: config.exact_cap,
                    };
                    pools
                        .iter()
                        .map(|(qi, pool)| {
                            let mut ranking: Vec<RankedCandidate> = if mode == config.gt_mode {
                                pool.iter()
                                    .map(|ci| {
                                        Ok(RankedCandidate {
                                            instance_id: corpus.graphs[*ci].id.clone(),
                                            cost: gt[&(*qi, *ci)].cost,
                                        })
                                    })
                                    .collect::<Result<_, PipelineError>>()?
                            } else {
                                pool.iter()
                                    .map(|ci| {
                                        let r = ged(
                                            &corpus.graphs[*qi],
                                            &corpus.graphs[*ci],
                                            &tx,
                                            mode,
                                            &ged_cfg,
                                        )?;
                                        Ok(RankedCandidate {
                                            instance_id: corpus.graphs[*ci].id.clone(),
                                            cost: r.cost,
                                        })
                                    })
                                    .collect::<Result<_, PipelineError>>()?
                            };
                            crate::rank::sort_ranking(&mut ranking);
                            Ok(ranked_ids(&ranking))
                        })
                        .collect()
                }
                Engine::Transductive | Engine::InductiveVgae | Engine::InductiveGfa => {
                    embedding_rankings(config, corpus, pools, engine)
                }
            }
        }
    }
}

fn embedding_rankings(
    config: &ExperimentConfig,
    corpus: &Corpus,
    pools: &[(usize, Vec<usize>)],
    engine: Engine,
) -> Result<Vec<Vec<String>>, PipelineError> {
    let provider = config.feature_provider()?;
    let tx = corpus.taxonomies();
    let mut encoder = config.encoder.clone();
    encoder.seed = config.seed;

    let model = match engine {
        Engine::Transductive => {
            let (model, _) = train_transductive(
                &corpus.graphs,
                &tx,
                &encoder,
                &config.transductive,
                &provider,
            )?;
            model
        }
        Engine::InductiveVgae | Engine::InductiveGfa => {
            let pretrain_dir =
                config
                    .pretrain_dir
                    .as_ref()
                    .ok_or_else(|| PipelineError::InvalidConfig {
                        reason: "inductive engines need a pretraining corpus directory"
                            .to_string(),
                    })?;
            let pretrain = ingest(pretrain_dir, &IngestOptions::default())?;
            let finetune = match &config.finetune_dir {
                Some(dir) => Some(ingest(dir, &IngestOptions::default())?),
                None => None,
            };
            let mut icfg = config.inductive.clone();
            icfg.regime = if engine == Engine::InductiveVgae {
                InductiveRegime::Vgae
            } else {
                InductiveRegime::Gfa
            };
            let eval_ids: Vec<String> = corpus.graphs.iter().map(|g| g.id.clone()).collect();
            let (model, _) = train_inductive(
                &pretrain.graphs,
                finetune.as_ref().map(|c| c.graphs.as_slice()),
                &eval_ids,
                &encoder,
                &icfg,
                &provider,
            )?;
            model
        }
        _ => unreachable!("embedding_rankings only handles embedding engines"),
    };

    let index = EmbeddingIndex::build(&corpus.graphs, &model, &provider)?;
    pools
        .iter()
        .map(|(qi, pool)| {
            let query = &corpus.graphs[*qi];
            let pool_ids: HashSet<&str> = pool
                .iter()
                .map(|ci| corpus.graphs[*ci].id.as_str())
                .collect();
            let hits = index.retrieve_graph(query, &model, &provider)?;
            let mut predicted: Vec<String> = hits
                .into_iter()
                .filter(|h| pool_ids.contains(h.instance_id.as_str()))
                .map(|h| h.instance_id)
                .collect();
            // Candidates the index dropped (zero-norm embeddings) still
            // belong to the pool; they rank last, by id.
            let mut missing: Vec<String> = pool_ids
                .iter()
                .filter(|id| !predicted.iter().any(|p| p == *id))
                .map(|id| id.to_string())
                .collect();
            missing.sort();
            predicted.extend(missing);
            Ok(predicted)
        })
        .collect()
}
