//! Multi-resolution conceptual counterfactual retrieval.
//!
//! Given a query instance and a pool of labeled candidates, this crate
//! retrieves the minimal-distance counterfactual at three expressivity
//! levels and prices the edits that explain it:
//!
//! - **Atomic** ([`atomic`]): instances as unordered concept multisets,
//!   compared by taxonomy-priced set-edit distance.
//! - **Relational** ([`relational`]): instances as bags of roled-up facts
//!   `∃r.C`, compared by a hierarchical set-of-sets distance.
//! - **Structural** ([`ged`]): full scene graphs compared by exact or
//!   assignment-approximated Graph Edit Distance, with trainable graph
//!   embeddings ([`embed`]) that approximate GED retrieval at scale.
//!
//! [`metrics`] scores any retriever against the GED ground truth and
//! [`pipeline`] orchestrates ingestion, experiments, and reports.

pub mod assignment;
pub mod atomic;
pub mod cost;
pub mod embed;
pub mod ged;
pub mod metrics;
pub mod pipeline;
pub mod rank;
pub mod relational;
pub mod scene;
pub mod script;
pub mod taxonomy;

pub use cost::Cost;
pub use rank::RankedCandidate;
pub use scene::{SceneEdge, SceneGraph, SceneNode};
pub use script::{EditOp, EditScript, NodeRef};
pub use taxonomy::{Concept, ConceptKind, EditKind, Taxonomy, TaxonomyBuilder};
