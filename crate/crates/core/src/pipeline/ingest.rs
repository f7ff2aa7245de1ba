//! Corpus ingestion and the on-disk corpus layout.
//!
//! A corpus directory holds scene graphs as `*.json` (one graph per file)
//! and/or `*.jsonl` (one graph per line), a `taxonomy.tsv` concept
//! hierarchy, an optional `roles.tsv` role hierarchy (a flat two-level
//! hierarchy over the observed roles is synthesized when absent), and an
//! optional `confusion.csv` with `source_class,other_class,count` rows.

use super::PipelineError;
use crate::relational::Taxonomies;
use crate::scene::SceneGraph;
use crate::taxonomy::Taxonomy;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

/// Classifier confusion counts between class pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfusionTable {
    counts: BTreeMap<(String, String), u64>,
}

impl ConfusionTable {
    pub fn parse(text: &str, source_name: &str) -> Result<ConfusionTable, PipelineError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "source_class,other_class,count" => {}
            _ => {
                return Err(PipelineError::BadConfusionFile {
                    file: source_name.to_string(),
                    line: 1,
                    reason: "expected header source_class,other_class,count".to_string(),
                })
            }
        }
        let mut counts = BTreeMap::new();
        for (idx, raw) in lines {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [source, other, count] = fields.as_slice() else {
                return Err(PipelineError::BadConfusionFile {
                    file: source_name.to_string(),
                    line: idx as u32 + 1,
                    reason: "expected three comma-separated fields".to_string(),
                });
            };
            let count: u64 = count.parse().map_err(|_| PipelineError::BadConfusionFile {
                file: source_name.to_string(),
                line: idx as u32 + 1,
                reason: format!("invalid count {count:?}"),
            })?;
            counts.insert((source.to_string(), other.to_string()), count);
        }
        Ok(ConfusionTable { counts })
    }

    pub fn insert(&mut self, source: &str, other: &str, count: u64) {
        self.counts
            .insert((source.to_string(), other.to_string()), count);
    }

    /// The class most frequently confused with `source`; ties break
    /// lexicographically. `None` when the source has no rows.
    pub fn most_confused(&self, source: &str) -> Option<&str> {
        self.counts
            .iter()
            .filter(|((s, _), _)| s == source)
            .max_by(|((_, a), ca), ((_, b), cb)| ca.cmp(cb).then_with(|| b.cmp(a)))
            .map(|((_, other), _)| other.as_str())
    }
}

/// A validated corpus: graphs sorted by instance id plus the hierarchies
/// they are priced against.
#[derive(Debug)]
pub struct Corpus {
    pub graphs: Vec<SceneGraph>,
    pub concepts: Taxonomy,
    pub roles: Taxonomy,
    pub confusion: Option<ConfusionTable>,
}

impl Corpus {
    pub fn taxonomies(&self) -> Taxonomies<'_> {
        Taxonomies {
            concepts: &self.concepts,
            roles: &self.roles,
        }
    }

    pub fn graph(&self, id: &str) -> Option<&SceneGraph> {
        self.graphs.iter().find(|g| g.id == id)
    }

    pub fn instance_ids(&self) -> Vec<&str> {
        self.graphs.iter().map(|g| g.id.as_str()).collect()
    }

    /// Assemble and validate a corpus from in-memory parts.
    pub fn assemble(
        mut graphs: Vec<SceneGraph>,
        concepts: Taxonomy,
        roles: Option<Taxonomy>,
        confusion: Option<ConfusionTable>,
    ) -> Result<Corpus, PipelineError> {
        graphs.sort_by(|a, b| a.id.cmp(&b.id));
        let mut ids = HashSet::new();
        for g in &graphs {
            g.validate()
                .map_err(|e| PipelineError::InvalidGraph {
                    file: "<memory>".to_string(),
                    reason: e.to_string(),
                })?;
            if !ids.insert(g.id.clone()) {
                return Err(PipelineError::DuplicateInstance { id: g.id.clone() });
            }
        }
        let roles = match roles {
            Some(r) => r,
            None => Taxonomy::flat(collect_roles(&graphs))
                .map_err(PipelineError::Taxonomy)?,
        };
        for g in &graphs {
            for node in &g.nodes {
                if !concepts.contains(&node.concept) {
                    return Err(PipelineError::UnknownLabel {
                        graph: g.id.clone(),
                        label: node.concept.clone(),
                        vocabulary: "concept taxonomy".to_string(),
                    });
                }
            }
            for edge in &g.edges {
                if !roles.contains(&edge.role) {
                    return Err(PipelineError::UnknownLabel {
                        graph: g.id.clone(),
                        label: edge.role.clone(),
                        vocabulary: "role taxonomy".to_string(),
                    });
                }
            }
        }
        Ok(Corpus {
            graphs,
            concepts,
            roles,
            confusion,
        })
    }
}

fn collect_roles(graphs: &[SceneGraph]) -> Vec<String> {
    let set: BTreeSet<String> = graphs
        .iter()
        .flat_map(|g| g.edges.iter().map(|e| e.role.clone()))
        .collect();
    set.into_iter().collect()
}

#[derive(Debug, Default, Clone)]
pub struct IngestOptions {
    /// Concept taxonomy path; `<dir>/taxonomy.tsv` when unset.
    pub concept_taxonomy: Option<PathBuf>,
    /// Role taxonomy path; `<dir>/roles.tsv` or a flat default when unset.
    pub role_taxonomy: Option<PathBuf>,
    /// Confusion table path; `<dir>/confusion.csv` when unset.
    pub confusion: Option<PathBuf>,
}

/// Load and validate a corpus directory.
pub fn ingest(dir: impl AsRef<Path>, options: &IngestOptions) -> Result<Corpus, PipelineError> {
    let dir = dir.as_ref();
    let mut graph_files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| PipelineError::Io {
            context: format!("reading corpus directory {}", dir.display()),
            source: e,
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("json") | Some("jsonl")
            )
        })
        .collect();
    graph_files.sort();

    let mut graphs = Vec::new();
    for file in &graph_files {
        let text = std::fs::read_to_string(file).map_err(|e| PipelineError::Io {
            context: format!("reading {}", file.display()),
            source: e,
        })?;
        let name = file.display().to_string();
        if file.extension().and_then(|e| e.to_str()) == Some("jsonl") {
            for (idx, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let graph =
                    SceneGraph::from_json(line).map_err(|e| PipelineError::BadGraphFile {
                        file: name.clone(),
                        line: idx as u32 + 1,
                        reason: e.to_string(),
                    })?;
                graphs.push(graph);
            }
        } else {
            let graph = SceneGraph::from_json(&text).map_err(|e| PipelineError::BadGraphFile {
                file: name.clone(),
                line: 1,
                reason: e.to_string(),
            })?;
            graphs.push(graph);
        }
    }

    let taxonomy_path = options
        .concept_taxonomy
        .clone()
        .unwrap_or_else(|| dir.join("taxonomy.tsv"));
    if !taxonomy_path.exists() {
        return Err(PipelineError::MissingTaxonomy {
            path: taxonomy_path.display().to_string(),
        });
    }
    let concepts = Taxonomy::load(&taxonomy_path).map_err(PipelineError::Taxonomy)?;

    let role_path = options
        .role_taxonomy
        .clone()
        .unwrap_or_else(|| dir.join("roles.tsv"));
    let roles = if role_path.exists() {
        Some(Taxonomy::load(&role_path).map_err(PipelineError::Taxonomy)?)
    } else {
        None
    };

    let confusion_path = options
        .confusion
        .clone()
        .unwrap_or_else(|| dir.join("confusion.csv"));
    let confusion = if confusion_path.exists() {
        let text = std::fs::read_to_string(&confusion_path).map_err(|e| PipelineError::Io {
            context: format!("reading {}", confusion_path.display()),
            source: e,
        })?;
        Some(ConfusionTable::parse(
            &text,
            &confusion_path.display().to_string(),
        )?)
    } else {
        None
    };

    Corpus::assemble(graphs, concepts, roles, confusion)
}

/// Write a corpus directory: `graphs.jsonl`, `taxonomy.tsv`, `roles.tsv`.
pub fn write_corpus(
    dir: impl AsRef<Path>,
    graphs: &[SceneGraph],
    concepts: &Taxonomy,
    roles: &[String],
) -> Result<(), PipelineError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::Io {
        context: format!("creating {}", dir.display()),
        source: e,
    })?;
    let mut sorted: Vec<&SceneGraph> = graphs.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut jsonl = String::new();
    for g in sorted {
        jsonl.push_str(&g.to_json());
        jsonl.push('\n');
    }
    let write = |name: &str, text: &str| -> Result<(), PipelineError> {
        std::fs::write(dir.join(name), text).map_err(|e| PipelineError::Io {
            context: format!("writing {}", dir.join(name).display()),
            source: e,
        })
    };
    write("graphs.jsonl", &jsonl)?;

    let mut taxonomy_text = String::new();
    for (parent, child, weight) in concepts.subsumption_edges() {
        if weight == 1.0 {
            taxonomy_text.push_str(&format!("{parent}\t{child}\n"));
        } else {
            taxonomy_text.push_str(&format!("{parent}\t{child}\t{weight}\n"));
        }
    }
    write("taxonomy.tsv", &taxonomy_text)?;

    let mut role_text = String::new();
    let mut role_list = roles.to_vec();
    role_list.sort();
    role_list.dedup();
    for role in &role_list {
        role_text.push_str(&format!("{}\t{role}\n", crate::taxonomy::TOP_ID));
    }
    write("roles.tsv", &role_text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ged::synthetic::{demo_taxonomy, generate_synthetic_graphs, SyntheticConfig};

    #[test]
    fn minimal_corpus_round_trips() {
        let tmp = tempfile::tempdir().unwrap();
        let graphs = vec![SceneGraph::new("g1", "animal")
            .with_node("a", "cat")
            .with_node("b", "table")
            .with_edge("a", "on", "b")];
        write_corpus(tmp.path(), &graphs, &demo_taxonomy(), &["on".to_string()]).unwrap();
        let corpus = ingest(tmp.path(), &IngestOptions::default()).unwrap();
        assert_eq!(corpus.graphs.len(), 1);
        assert_eq!(corpus.graphs[0], graphs[0]);
    }

    #[test]
    fn synthetic_corpus_round_trips_unchanged() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = SyntheticConfig {
            seed: 12,
            count: 500,
            ..Default::default()
        };
        let taxonomy = demo_taxonomy();
        let graphs = generate_synthetic_graphs(&cfg, &taxonomy).unwrap();
        write_corpus(tmp.path(), &graphs, &taxonomy, &cfg.roles).unwrap();
        let corpus = ingest(tmp.path(), &IngestOptions::default()).unwrap();
        assert_eq!(corpus.graphs, graphs);
    }

    #[test]
    fn bad_edge_reference_is_located() {
        let tmp = tempfile::tempdir().unwrap();
        let graphs = vec![SceneGraph::new("g1", "animal").with_node("a", "cat")];
        write_corpus(tmp.path(), &graphs, &demo_taxonomy(), &[]).unwrap();
        // Corrupt the jsonl with an edge to a missing node.
        let path = tmp.path().join("graphs.jsonl");
        let bad = r#"{"id":"g2","class":"animal","nodes":[{"id":"a","concept":"cat"}],"edges":[{"src":"a","role":"on","dst":"ghost"}]}"#;
        std::fs::write(&path, format!("{bad}\n")).unwrap();
        let err = ingest(tmp.path(), &IngestOptions::default()).unwrap_err();
        assert!(err.to_string().contains("ghost") || err.to_string().contains("missing"));
    }

    #[test]
    fn unknown_concept_is_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let graphs = vec![SceneGraph::new("g1", "animal").with_node("a", "unicorn")];
        let err = Corpus::assemble(graphs, demo_taxonomy(), None, None).unwrap_err();
        assert!(matches!(err, PipelineError::UnknownLabel { .. }));
        let _ = tmp;
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let graphs = vec![
            SceneGraph::new("g1", "animal").with_node("a", "cat"),
            SceneGraph::new("g1", "animal").with_node("a", "dog"),
        ];
        assert!(matches!(
            Corpus::assemble(graphs, demo_taxonomy(), None, None),
            Err(PipelineError::DuplicateInstance { .. })
        ));
    }

    #[test]
    fn confusion_table_argmax_with_ties() {
        let text = "source_class,other_class,count\nA,B,10\nA,C,3\nD,E,5\nD,F,5\n";
        let table = ConfusionTable::parse(text, "test.csv").unwrap();
        assert_eq!(table.most_confused("A"), Some("B"));
        // Tie between E and F resolves lexicographically.
        assert_eq!(table.most_confused("D"), Some("E"));
        assert_eq!(table.most_confused("Z"), None);
    }
}
