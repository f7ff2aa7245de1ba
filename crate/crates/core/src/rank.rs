//! Shared ranking plumbing for the distance-based retrieval tiers.

use crate::cost::Cost;
use serde::{Deserialize, Serialize};

/// One pool candidate with its distance to the query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub instance_id: String,
    pub cost: Cost,
}

/// Ascending by cost, ties broken by ascending instance id so runs are
/// reproducible. Infeasible candidates sort last.
pub(crate) fn sort_ranking(list: &mut [RankedCandidate]) {
    list.sort_by(|a, b| {
        a.cost
            .cmp(&b.cost)
            .then_with(|| a.instance_id.cmp(&b.instance_id))
    });
}
