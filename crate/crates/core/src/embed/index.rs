//! Cosine-similarity retrieval over precomputed graph embeddings.

use super::encoder::encode;
use super::features::NodeFeatureProvider;
use super::model::EmbeddingModel;
use super::EmbedError;
use crate::scene::SceneGraph;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
struct IndexEntry {
    id: String,
    class: String,
    vector: Vec<f64>,
    norm: f64,
}

/// An immutable embedding store; safe to share across threads.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingIndex {
    entries: Vec<IndexEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityHit {
    pub instance_id: String,
    pub similarity: f64,
}

impl EmbeddingIndex {
    /// Encode and index a corpus. Zero-norm or non-finite embeddings are
    /// excluded with a warning; cosine similarity is undefined for them.
    pub fn build(
        graphs: &[SceneGraph],
        model: &EmbeddingModel,
        provider: &NodeFeatureProvider,
    ) -> Result<EmbeddingIndex, EmbedError> {
        let mut items = Vec::with_capacity(graphs.len());
        for g in graphs {
            let vector = encode(g, model, provider)?;
            items.push((g.id.clone(), g.class.clone(), vector));
        }
        Ok(EmbeddingIndex::from_embeddings(items))
    }

    /// Index precomputed embeddings.
    pub fn from_embeddings(items: Vec<(String, String, Vec<f64>)>) -> EmbeddingIndex {
        let mut entries = Vec::with_capacity(items.len());
        for (id, class, vector) in items {
            let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm < 1e-12 {
                log::warn!("excluding {id} from the index: embedding norm {norm}");
                continue;
            }
            entries.push(IndexEntry {
                id,
                class,
                vector,
                norm,
            });
        }
        entries.sort_by(|a, b| a.id.cmp(&b.id));
        EmbeddingIndex { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    /// Rank candidates whose class differs from the query's, descending by
    /// cosine similarity, ties by ascending instance id.
    pub fn retrieve(
        &self,
        query: &[f64],
        query_class: &str,
    ) -> Result<Vec<SimilarityHit>, EmbedError> {
        let query_norm = query.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut hits: Vec<SimilarityHit> = self
            .entries
            .iter()
            .filter(|e| e.class != query_class)
            .map(|e| {
                let similarity = if query_norm < 1e-12 {
                    0.0
                } else {
                    let dot: f64 = e.vector.iter().zip(query).map(|(a, b)| a * b).sum();
                    dot / (e.norm * query_norm)
                };
                SimilarityHit {
                    instance_id: e.id.clone(),
                    similarity,
                }
            })
            .collect();
        if hits.is_empty() {
            return Err(EmbedError::EmptyEligibleIndex {
                class: query_class.to_string(),
            });
        }
        hits.sort_by(|a, b| {
            b.similarity
                .total_cmp(&a.similarity)
                .then_with(|| a.instance_id.cmp(&b.instance_id))
        });
        Ok(hits)
    }

    pub fn retrieve_graph(
        &self,
        query: &SceneGraph,
        model: &EmbeddingModel,
        provider: &NodeFeatureProvider,
    ) -> Result<Vec<SimilarityHit>, EmbedError> {
        let vector = encode(query, model, provider)?;
        self.retrieve(&vector, &query.class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn own_embedding_under_other_class_is_top_hit() {
        let v = vec![1.0, 2.0, 3.0];
        let index = EmbeddingIndex::from_embeddings(vec![
            ("other".to_string(), "b".to_string(), v.clone()),
            ("far".to_string(), "b".to_string(), vec![-1.0, 0.0, 0.0]),
        ]);
        let hits = index.retrieve(&v, "a").unwrap();
        assert_eq!(hits[0].instance_id, "other");
        assert!((hits[0].similarity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn same_class_candidates_are_excluded() {
        let index = EmbeddingIndex::from_embeddings(vec![(
            "mate".to_string(),
            "a".to_string(),
            vec![1.0, 0.0],
        )]);
        assert!(matches!(
            index.retrieve(&[1.0, 0.0], "a"),
            Err(EmbedError::EmptyEligibleIndex { .. })
        ));
    }

    #[test]
    fn zero_norm_embeddings_are_dropped() {
        let index = EmbeddingIndex::from_embeddings(vec![
            ("zero".to_string(), "b".to_string(), vec![0.0, 0.0]),
            ("ok".to_string(), "b".to_string(), vec![1.0, 0.0]),
        ]);
        assert_eq!(index.len(), 1);
        assert_eq!(index.ids(), vec!["ok"]);
    }

    #[test]
    fn ties_break_by_ascending_id() {
        let index = EmbeddingIndex::from_embeddings(vec![
            ("zeta".to_string(), "b".to_string(), vec![2.0, 0.0]),
            ("alpha".to_string(), "b".to_string(), vec![1.0, 0.0]),
        ]);
        let hits = index.retrieve(&[1.0, 0.0], "a").unwrap();
        assert_eq!(hits[0].instance_id, "alpha");
        assert_eq!(hits[1].instance_id, "zeta");
    }
}
