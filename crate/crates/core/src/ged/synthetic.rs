//! Seeded synthetic scene-graph corpora for tests, benchmarks, and demos.

use super::GedError;
use crate::scene::SceneGraph;
use crate::taxonomy::{ConceptIdx, Taxonomy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub count: usize,
    /// Inclusive node-count range per graph.
    pub size_range: (usize, usize),
    /// Probability of an edge per ordered node pair.
    pub edge_prob: f64,
    /// Role vocabulary edges draw from; empty means edgeless graphs.
    pub roles: Vec<String>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 0,
            count: 20,
            size_range: (3, 8),
            edge_prob: 0.25,
            roles: default_roles(),
        }
    }
}

/// The default role vocabulary.
pub fn default_roles() -> Vec<String> {
    ["holds", "near", "on", "under", "wears"]
        .into_iter()
        .map(str::to_string)
        .collect()
}

/// A small four-family hierarchy used by the CLI demo corpus and tests.
pub fn demo_taxonomy() -> Taxonomy {
    Taxonomy::builder()
        .edge("animal", "cat")
        .edge("animal", "dog")
        .edge("animal", "bird")
        .edge("animal", "horse")
        .edge("furniture", "table")
        .edge("furniture", "desk")
        .edge("furniture", "chair")
        .edge("furniture", "sofa")
        .edge("device", "keyboard")
        .edge("device", "screen")
        .edge("device", "laptop")
        .edge("device", "phone")
        .edge("person", "man")
        .edge("person", "woman")
        .edge("person", "doctor")
        .build()
        .expect("demo taxonomy is valid")
}

/// Generate a deterministic corpus: node labels drawn from the taxonomy
/// leaves, edges from the role vocabulary, and the class label assigned by
/// the dominant concept family (the top-level ancestor covering the most
/// node labels, ties broken lexicographically).
pub fn generate_synthetic_graphs(
    config: &SyntheticConfig,
    taxonomy: &Taxonomy,
) -> Result<Vec<SceneGraph>, GedError> {
    assert!(config.count >= 1, "count must be at least 1");
    assert!(
        config.size_range.0 >= 1 && config.size_range.0 <= config.size_range.1,
        "invalid size range"
    );
    let leaves = taxonomy.leaves();
    if leaves.is_empty() {
        return Err(GedError::EmptyTaxonomy);
    }

    // Family roots: direct children of ⊤, with their descendant leaf sets.
    let mut families: Vec<(String, Vec<ConceptIdx>)> = taxonomy
        .children(taxonomy.top())
        .map(|root| {
            (
                taxonomy.concept(root).id.clone(),
                taxonomy.descendants(root),
            )
        })
        .collect();
    families.sort_by(|a, b| a.0.cmp(&b.0));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut graphs = Vec::with_capacity(config.count);
    for index in 0..config.count {
        let n = rng.gen_range(config.size_range.0..=config.size_range.1);
        let mut graph = SceneGraph::new(&format!("g{index:04}"), "");
        let mut labels = Vec::with_capacity(n);
        for node in 0..n {
            let leaf = leaves[rng.gen_range(0..leaves.len())];
            labels.push(leaf);
            graph = graph.with_node(&format!("n{node}"), &taxonomy.concept(leaf).id);
        }
        if !config.roles.is_empty() {
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.gen_bool(config.edge_prob) {
                        let role = &config.roles[rng.gen_range(0..config.roles.len())];
                        graph = graph.with_edge(&format!("n{i}"), role, &format!("n{j}"));
                    }
                }
            }
        }
        graph.class = dominant_family(&families, &labels);
        graphs.push(graph);
    }
    Ok(graphs)
}

fn dominant_family(families: &[(String, Vec<ConceptIdx>)], labels: &[ConceptIdx]) -> String {
    let mut best: Option<(&str, usize)> = None;
    for (name, members) in families {
        let coverage = labels.iter().filter(|l| members.contains(l)).count();
        if coverage == 0 {
            continue;
        }
        match best {
            Some((_, c)) if c >= coverage => {}
            _ => best = Some((name, coverage)),
        }
    }
    best.map(|(name, _)| name.to_string())
        .unwrap_or_else(|| "other".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn same_seed_reproduces_the_corpus() {
        let cfg = SyntheticConfig {
            seed: 7,
            count: 10,
            ..Default::default()
        };
        let t = demo_taxonomy();
        let a = generate_synthetic_graphs(&cfg, &t).unwrap();
        let b = generate_synthetic_graphs(&cfg, &t).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn size_range_is_respected() {
        let cfg = SyntheticConfig {
            seed: 1,
            count: 12,
            size_range: (3, 3),
            ..Default::default()
        };
        let t = demo_taxonomy();
        for g in generate_synthetic_graphs(&cfg, &t).unwrap() {
            assert_eq!(g.node_count(), 3);
        }
    }

    #[test]
    fn corpus_spans_multiple_classes() {
        let cfg = SyntheticConfig {
            seed: 3,
            count: 100,
            ..Default::default()
        };
        let t = demo_taxonomy();
        let classes: HashSet<String> = generate_synthetic_graphs(&cfg, &t)
            .unwrap()
            .into_iter()
            .map(|g| g.class)
            .collect();
        assert!(classes.len() >= 2, "saw classes {classes:?}");
    }

    #[test]
    fn generated_graphs_validate() {
        let cfg = SyntheticConfig {
            seed: 5,
            count: 25,
            ..Default::default()
        };
        let t = demo_taxonomy();
        for g in generate_synthetic_graphs(&cfg, &t).unwrap() {
            g.validate().unwrap();
        }
    }

    #[test]
    fn dominant_family_tie_breaks_lexicographically() {
        let t = demo_taxonomy();
        let cat = t.resolve("cat").unwrap();
        let table = t.resolve("table").unwrap();
        let families: Vec<(String, Vec<ConceptIdx>)> = vec![
            ("animal".to_string(), t.descendants(t.resolve("animal").unwrap())),
            ("furniture".to_string(), t.descendants(t.resolve("furniture").unwrap())),
        ];
        assert_eq!(dominant_family(&families, &[cat, table]), "animal");
    }
}
