//! Concept hierarchies (TBoxes) and the semantic distance / edit-cost
//! primitives shared by every expressivity level.
//!
//! A taxonomy is a weighted DAG of subsumption edges over atomic concepts,
//! with a distinguished top concept `⊤` and a virtual bottom concept `⊥`.
//! Distances are minimum-cost paths traversing subsumption edges as
//! undirected, so sibling concepts remain reachable through their common
//! ancestors. Disconnected pairs have infinite distance: the corresponding
//! edit is infeasible.

use crate::cost::Cost;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;
use thiserror::Error;

/// Reserved identifier of the top concept.
pub const TOP_ID: &str = "⊤";
/// Reserved identifier of the virtual bottom concept.
pub const BOTTOM_ID: &str = "⊥";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConceptKind {
    Atomic,
    Top,
    Bottom,
}

/// A node of the concept hierarchy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    pub kind: ConceptKind,
}

/// Index of a concept within its taxonomy. Valid only for the taxonomy that
/// issued it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConceptIdx(pub(crate) usize);

impl ConceptIdx {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Kind of a conceptual edit operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    Replace,
    Delete,
    Insert,
}

/// A priced edit primitive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditCost {
    pub kind: EditKind,
    pub value: Cost,
}

/// Shortest-path algorithm selection for [`Taxonomy::distance_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceAlgo {
    /// BFS on unit weights, Dijkstra otherwise.
    Auto,
    /// Breadth-first search; only valid when every edge weight is 1.
    Bfs,
    Dijkstra,
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{source_name}:{line}: malformed taxonomy line: {message}")]
    Parse {
        source_name: String,
        line: u32,
        message: String,
    },
    #[error("{source_name}:{line}: negative weight {weight} on edge {parent} -> {child}")]
    NegativeWeight {
        source_name: String,
        line: u32,
        parent: String,
        child: String,
        weight: f64,
    },
    #[error("{source_name}:{line}: duplicate edge {parent} -> {child}")]
    DuplicateEdge {
        source_name: String,
        line: u32,
        parent: String,
        child: String,
    },
    #[error("duplicate concept id {id}")]
    DuplicateConcept { id: String },
    #[error("{source_name}:{line}: cycle detected: {}", path.join(" -> "))]
    Cycle {
        source_name: String,
        line: u32,
        path: Vec<String>,
    },
    #[error("{source_name}:{line}: reserved concept {id} cannot appear here")]
    ReservedConcept {
        source_name: String,
        line: u32,
        id: String,
    },
    #[error("unknown concept id {id}")]
    UnknownConcept { id: String },
}

#[derive(Debug, Clone)]
struct TaxEdge {
    parent: usize,
    child: usize,
    weight: f64,
    line: u32,
}

/// An immutable concept hierarchy. All distance queries are pure; the
/// optional all-pairs cache is filled at most once and is safe to share
/// across threads.
#[derive(Debug)]
pub struct Taxonomy {
    concepts: Vec<Concept>,
    by_id: HashMap<String, usize>,
    edges: Vec<TaxEdge>,
    /// Undirected adjacency: for each concept, (neighbor, weight).
    adj: Vec<Vec<(usize, f64)>>,
    /// Children per concept under the directed subsumption edges.
    children: Vec<Vec<usize>>,
    top: usize,
    bottom: usize,
    unit_weights: bool,
    all_pairs: OnceLock<Vec<Vec<Cost>>>,
}

impl Taxonomy {
    /// Parse a taxonomy file: UTF-8 text, one `parent<TAB>child[<TAB>weight]`
    /// edge per line, `#` starting a comment line. Weight defaults to 1.
    pub fn load(path: impl AsRef<Path>) -> Result<Taxonomy, TaxonomyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parse taxonomy text; `source_name` appears in diagnostics.
    pub fn parse(text: &str, source_name: &str) -> Result<Taxonomy, TaxonomyError> {
        let mut builder = TaxonomyBuilder::named(source_name);
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx as u32 + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let (parent, child, weight) = match fields.as_slice() {
                [p, c] => (*p, *c, 1.0),
                [p, c, w] => {
                    let weight = w.parse::<f64>().map_err(|_| TaxonomyError::Parse {
                        source_name: source_name.to_string(),
                        line: line_no,
                        message: format!("invalid weight {w:?}"),
                    })?;
                    (*p, *c, weight)
                }
                _ => {
                    return Err(TaxonomyError::Parse {
                        source_name: source_name.to_string(),
                        line: line_no,
                        message: "expected parent<TAB>child[<TAB>weight]".to_string(),
                    })
                }
            };
            if parent.is_empty() || child.is_empty() {
                return Err(TaxonomyError::Parse {
                    source_name: source_name.to_string(),
                    line: line_no,
                    message: "empty concept id".to_string(),
                });
            }
            builder.add_edge_at(parent, child, weight, line_no)?;
        }
        builder.build()
    }

    /// A flat two-level hierarchy: `⊤` over every given concept with unit
    /// weights. Used as the default role taxonomy when none is supplied:
    /// distinct roles then cost 2 to substitute and 1 to delete or insert.
    pub fn flat<I, S>(ids: I) -> Result<Taxonomy, TaxonomyError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut builder = TaxonomyBuilder::named("<flat>");
        let mut seen = Vec::new();
        for id in ids {
            let id = id.as_ref();
            if !seen.iter().any(|s| s == id) {
                seen.push(id.to_string());
            }
        }
        seen.sort();
        for id in &seen {
            builder.add_concept(id)?;
        }
        builder.build()
    }

    pub fn builder() -> TaxonomyBuilder {
        TaxonomyBuilder::named("<builder>")
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.iter()
    }

    pub fn concept(&self, idx: ConceptIdx) -> &Concept {
        &self.concepts[idx.0]
    }

    pub fn top(&self) -> ConceptIdx {
        ConceptIdx(self.top)
    }

    pub fn bottom(&self) -> ConceptIdx {
        ConceptIdx(self.bottom)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    /// True when every subsumption edge has weight exactly 1.
    pub fn unit_weights(&self) -> bool {
        self.unit_weights
    }

    pub fn resolve(&self, id: &str) -> Result<ConceptIdx, TaxonomyError> {
        self.by_id
            .get(id)
            .copied()
            .map(ConceptIdx)
            .ok_or_else(|| TaxonomyError::UnknownConcept { id: id.to_string() })
    }

    /// Directed subsumption edges as (parent id, child id, weight),
    /// including any synthesized `⊤` edges. Writing these back out and
    /// reloading reproduces the same distances.
    pub fn subsumption_edges(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.edges.iter().map(|e| {
            (
                self.concepts[e.parent].id.as_str(),
                self.concepts[e.child].id.as_str(),
                e.weight,
            )
        })
    }

    /// Atomic concepts with no children, sorted by id.
    pub fn leaves(&self) -> Vec<ConceptIdx> {
        let mut out: Vec<ConceptIdx> = (0..self.concepts.len())
            .filter(|&i| {
                self.concepts[i].kind == ConceptKind::Atomic && self.children[i].is_empty()
            })
            .map(ConceptIdx)
            .collect();
        out.sort_by(|a, b| self.concepts[a.0].id.cmp(&self.concepts[b.0].id));
        out
    }

    /// Direct children of a concept under the directed subsumption edges.
    pub fn children(&self, idx: ConceptIdx) -> impl Iterator<Item = ConceptIdx> + '_ {
        self.children[idx.0].iter().copied().map(ConceptIdx)
    }

    /// Concepts reachable from `root` via directed subsumption edges,
    /// including `root` itself.
    pub fn descendants(&self, root: ConceptIdx) -> Vec<ConceptIdx> {
        let mut seen = vec![false; self.concepts.len()];
        let mut queue = VecDeque::from([root.0]);
        seen[root.0] = true;
        let mut out = vec![root];
        while let Some(u) = queue.pop_front() {
            for &c in &self.children[u] {
                if !seen[c] {
                    seen[c] = true;
                    out.push(ConceptIdx(c));
                    queue.push_back(c);
                }
            }
        }
        out
    }

    /// Minimum-cost path between two concepts, traversing subsumption edges
    /// as undirected. Infinite when the concepts lie in different connected
    /// components.
    pub fn concept_distance(&self, a: &str, b: &str) -> Result<Cost, TaxonomyError> {
        Ok(self.distance_idx(self.resolve(a)?, self.resolve(b)?))
    }

    pub fn distance_idx(&self, a: ConceptIdx, b: ConceptIdx) -> Cost {
        if let Some(cache) = self.all_pairs.get() {
            return cache[a.0][b.0];
        }
        self.shortest_path(a.0, b.0, DistanceAlgo::Auto)
    }

    /// Distance under an explicitly-chosen algorithm. `Bfs` is rejected on
    /// non-unit weights.
    pub fn distance_with(
        &self,
        a: &str,
        b: &str,
        algo: DistanceAlgo,
    ) -> Result<Cost, TaxonomyError> {
        let a = self.resolve(a)?;
        let b = self.resolve(b)?;
        if algo == DistanceAlgo::Bfs {
            assert!(self.unit_weights, "BFS requires unit weights");
        }
        Ok(self.shortest_path(a.0, b.0, algo))
    }

    /// Single-source distances to every concept.
    pub fn distances_from(&self, a: ConceptIdx) -> Vec<Cost> {
        if self.unit_weights {
            self.bfs_from(a.0)
        } else {
            self.dijkstra_from(a.0)
        }
    }

    /// Cost of deleting a concept: its distance from `⊤`.
    pub fn deletion_cost(&self, id: &str) -> Result<Cost, TaxonomyError> {
        Ok(self.deletion_cost_idx(self.resolve(id)?))
    }

    pub fn deletion_cost_idx(&self, idx: ConceptIdx) -> Cost {
        self.distance_idx(idx, ConceptIdx(self.top))
    }

    /// Cost of inserting a concept; symmetric with deletion, so the virtual
    /// `⊥` never shortcuts paths between leaves.
    pub fn insertion_cost(&self, id: &str) -> Result<Cost, TaxonomyError> {
        self.deletion_cost(id)
    }

    pub fn insertion_cost_idx(&self, idx: ConceptIdx) -> Cost {
        self.deletion_cost_idx(idx)
    }

    /// Cost of replacing one concept with another: their distance.
    pub fn replace_cost(&self, a: &str, b: &str) -> Result<Cost, TaxonomyError> {
        self.concept_distance(a, b)
    }

    pub fn edit_cost(&self, kind: EditKind, a: &str, b: Option<&str>) -> Result<EditCost, TaxonomyError> {
        let value = match kind {
            EditKind::Replace => {
                let b = b.ok_or_else(|| TaxonomyError::UnknownConcept {
                    id: "<missing replacement>".to_string(),
                })?;
                self.replace_cost(a, b)?
            }
            EditKind::Delete => self.deletion_cost(a)?,
            EditKind::Insert => self.insertion_cost(a)?,
        };
        Ok(EditCost { kind, value })
    }

    /// Fill the all-pairs cache. Idempotent; concurrent callers block until
    /// the single fill completes.
    pub fn ensure_all_pairs(&self) {
        self.all_pairs.get_or_init(|| {
            (0..self.concepts.len())
                .map(|i| self.distances_from(ConceptIdx(i)))
                .collect()
        });
    }

    fn shortest_path(&self, a: usize, b: usize, algo: DistanceAlgo) -> Cost {
        let use_bfs = match algo {
            DistanceAlgo::Auto => self.unit_weights,
            DistanceAlgo::Bfs => true,
            DistanceAlgo::Dijkstra => false,
        };
        if use_bfs {
            self.bfs_from(a)[b]
        } else {
            self.dijkstra_from(a)[b]
        }
    }

    fn bfs_from(&self, start: usize) -> Vec<Cost> {
        let mut dist = vec![Cost::Infinite; self.concepts.len()];
        dist[start] = Cost::ZERO;
        let mut queue = VecDeque::from([start]);
        let mut hops = vec![u64::MAX; self.concepts.len()];
        hops[start] = 0;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adj[u] {
                if hops[v] == u64::MAX {
                    hops[v] = hops[u] + 1;
                    dist[v] = Cost::finite(hops[v] as f64);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    fn dijkstra_from(&self, start: usize) -> Vec<Cost> {
        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
            }
        }

        let mut dist = vec![Cost::Infinite; self.concepts.len()];
        let mut best = vec![f64::INFINITY; self.concepts.len()];
        best[start] = 0.0;
        dist[start] = Cost::ZERO;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse(Entry(0.0, start)));
        while let Some(Reverse(Entry(d, u))) = heap.pop() {
            if d > best[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < best[v] {
                    best[v] = nd;
                    dist[v] = Cost::finite(nd);
                    heap.push(Reverse(Entry(nd, v)));
                }
            }
        }
        dist
    }
}

impl fmt::Display for Taxonomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "taxonomy of {} concepts, {} edges",
            self.concepts.len(),
            self.edges.len()
        )
    }
}

/// Incremental construction of a [`Taxonomy`]. Validation (cycles, duplicate
/// declarations, reserved symbols) happens in [`TaxonomyBuilder::build`].
#[derive(Debug)]
pub struct TaxonomyBuilder {
    source_name: String,
    edges: Vec<(String, String, f64, u32)>,
    isolated: Vec<String>,
}

impl TaxonomyBuilder {
    fn named(source_name: &str) -> TaxonomyBuilder {
        TaxonomyBuilder {
            source_name: source_name.to_string(),
            edges: Vec::new(),
            isolated: Vec::new(),
        }
    }

    /// Add a unit-weight subsumption edge.
    pub fn edge(mut self, parent: &str, child: &str) -> Self {
        self.edges.push((parent.to_string(), child.to_string(), 1.0, 0));
        self
    }

    pub fn weighted_edge(mut self, parent: &str, child: &str, weight: f64) -> Self {
        self.edges
            .push((parent.to_string(), child.to_string(), weight, 0));
        self
    }

    /// Declare a concept with no subsumption edges.
    pub fn concept(mut self, id: &str) -> Self {
        self.isolated.push(id.to_string());
        self
    }

    fn add_edge_at(
        &mut self,
        parent: &str,
        child: &str,
        weight: f64,
        line: u32,
    ) -> Result<(), TaxonomyError> {
        self.edges
            .push((parent.to_string(), child.to_string(), weight, line));
        Ok(())
    }

    fn add_concept(&mut self, id: &str) -> Result<(), TaxonomyError> {
        self.isolated.push(id.to_string());
        Ok(())
    }

    pub fn build(self) -> Result<Taxonomy, TaxonomyError> {
        let source_name = self.source_name;
        let mut concepts: Vec<Concept> = Vec::new();
        let mut by_id: HashMap<String, usize> = HashMap::new();
        fn intern(id: &str, concepts: &mut Vec<Concept>, by_id: &mut HashMap<String, usize>) -> usize {
            match by_id.entry(id.to_string()) {
                Entry::Occupied(e) => *e.get(),
                Entry::Vacant(e) => {
                    let idx = concepts.len();
                    let kind = if id == TOP_ID {
                        ConceptKind::Top
                    } else {
                        ConceptKind::Atomic
                    };
                    concepts.push(Concept {
                        id: id.to_string(),
                        kind,
                    });
                    e.insert(idx);
                    idx
                }
            }
        }

        let mut edges: Vec<TaxEdge> = Vec::new();
        let mut seen_pairs: HashMap<(usize, usize), u32> = HashMap::new();
        for (parent, child, weight, line) in &self.edges {
            let (parent, child, weight, line) = (parent.as_str(), child.as_str(), *weight, *line);
            if child == TOP_ID || parent == BOTTOM_ID || child == BOTTOM_ID {
                let id = if child == TOP_ID { TOP_ID } else { BOTTOM_ID };
                return Err(TaxonomyError::ReservedConcept {
                    source_name,
                    line,
                    id: id.to_string(),
                });
            }
            if weight < 0.0 || !weight.is_finite() {
                return Err(TaxonomyError::NegativeWeight {
                    source_name,
                    line,
                    parent: parent.to_string(),
                    child: child.to_string(),
                    weight,
                });
            }
            let p = intern(parent, &mut concepts, &mut by_id);
            let c = intern(child, &mut concepts, &mut by_id);
            if p == c {
                return Err(TaxonomyError::Cycle {
                    source_name,
                    line,
                    path: vec![parent.to_string(), child.to_string()],
                });
            }
            if seen_pairs.insert((p, c), line).is_some() {
                return Err(TaxonomyError::DuplicateEdge {
                    source_name,
                    line,
                    parent: parent.to_string(),
                    child: child.to_string(),
                });
            }
            edges.push(TaxEdge {
                parent: p,
                child: c,
                weight,
                line,
            });
        }

        for id in &self.isolated {
            if id == TOP_ID || id == BOTTOM_ID {
                return Err(TaxonomyError::ReservedConcept {
                    source_name,
                    line: 0,
                    id: id.clone(),
                });
            }
            if by_id.contains_key(id) {
                return Err(TaxonomyError::DuplicateConcept { id: id.clone() });
            }
            intern(id, &mut concepts, &mut by_id);
        }

        Self::check_acyclic(&concepts, &edges, &source_name)?;

        // Synthesize ⊤ over every parentless concept unless declared.
        let top = match by_id.get(TOP_ID) {
            Some(&idx) => idx,
            None => {
                let idx = concepts.len();
                concepts.push(Concept {
                    id: TOP_ID.to_string(),
                    kind: ConceptKind::Top,
                });
                by_id.insert(TOP_ID.to_string(), idx);
                let mut has_parent = vec![false; concepts.len()];
                for e in &edges {
                    has_parent[e.child] = true;
                }
                for (i, covered) in has_parent.iter().enumerate().take(idx) {
                    if !covered {
                        edges.push(TaxEdge {
                            parent: idx,
                            child: i,
                            weight: 1.0,
                            line: 0,
                        });
                    }
                }
                idx
            }
        };

        // ⊥ is always virtual: present as a concept, attached to nothing.
        let bottom = concepts.len();
        concepts.push(Concept {
            id: BOTTOM_ID.to_string(),
            kind: ConceptKind::Bottom,
        });
        by_id.insert(BOTTOM_ID.to_string(), bottom);

        let mut adj = vec![Vec::new(); concepts.len()];
        let mut children = vec![Vec::new(); concepts.len()];
        for e in &edges {
            adj[e.parent].push((e.child, e.weight));
            adj[e.child].push((e.parent, e.weight));
            children[e.parent].push(e.child);
        }
        for list in &mut children {
            list.sort_unstable();
        }
        let unit_weights = edges.iter().all(|e| e.weight == 1.0);

        Ok(Taxonomy {
            concepts,
            by_id,
            edges,
            adj,
            children,
            top,
            bottom,
            unit_weights,
            all_pairs: OnceLock::new(),
        })
    }

    fn check_acyclic(
        concepts: &[Concept],
        edges: &[TaxEdge],
        source_name: &str,
    ) -> Result<(), TaxonomyError> {
        let n = concepts.len();
        let mut out: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n];
        for e in edges {
            out[e.parent].push((e.child, e.line));
        }
        // Iterative DFS with colors; a back edge closes a cycle.
        const WHITE: u8 = 0;
        const GREY: u8 = 1;
        const BLACK: u8 = 2;
        let mut color = vec![WHITE; n];
        let mut parent: Vec<usize> = vec![usize::MAX; n];
        for root in 0..n {
            if color[root] != WHITE {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            color[root] = GREY;
            while let Some(&mut (u, ref mut next)) = stack.last_mut() {
                if *next < out[u].len() {
                    let (v, line) = out[u][*next];
                    *next += 1;
                    match color[v] {
                        WHITE => {
                            color[v] = GREY;
                            parent[v] = u;
                            stack.push((v, 0));
                        }
                        GREY => {
                            // Reconstruct u -> ... -> v along the grey chain.
                            let mut path = vec![concepts[v].id.clone()];
                            let mut cur = u;
                            loop {
                                path.push(concepts[cur].id.clone());
                                if cur == v {
                                    break;
                                }
                                cur = parent[cur];
                            }
                            path.reverse();
                            return Err(TaxonomyError::Cycle {
                                source_name: source_name.to_string(),
                                line,
                                path,
                            });
                        }
                        _ => {}
                    }
                } else {
                    color[u] = BLACK;
                    stack.pop();
                }
            }
        }
        Ok(())
    }
}
