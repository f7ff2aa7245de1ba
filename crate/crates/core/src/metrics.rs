//! Ranking-fidelity and edit-economy metrics against the GED ground truth.
//!
//! Ground-truth relevance is tie-closed: every candidate tied at the k-th
//! cost counts as relevant, so a retriever is never penalized for choosing
//! among true co-optima. Binary variants shrink the relevant set to the
//! tie-closed top-1.

use crate::cost::Cost;
use crate::ged::GedResult;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("k={k} out of range for {candidates} candidates")]
    KOutOfRange { k: usize, candidates: usize },
    #[error("predicted and ground-truth rankings cover different candidates")]
    CandidateMismatch,
    #[error("candidate {id} has no GED cost in the lookup")]
    MissingCost { id: String },
    #[error("empty input")]
    Empty,
}

/// A retriever's ordering next to the ground-truth ordering over the same
/// candidate pool.
#[derive(Debug, Clone)]
pub struct RankingPair {
    pub predicted: Vec<String>,
    pub ground_truth: Vec<String>,
    pub ged_lookup: BTreeMap<String, Cost>,
}

impl RankingPair {
    pub fn new(
        predicted: Vec<String>,
        ground_truth: Vec<String>,
        ged_lookup: BTreeMap<String, Cost>,
    ) -> Result<RankingPair, MetricsError> {
        let a: HashSet<&String> = predicted.iter().collect();
        let b: HashSet<&String> = ground_truth.iter().collect();
        if a != b || predicted.len() != ground_truth.len() {
            return Err(MetricsError::CandidateMismatch);
        }
        for id in &ground_truth {
            if !ged_lookup.contains_key(id) {
                return Err(MetricsError::MissingCost { id: id.clone() });
            }
        }
        Ok(RankingPair {
            predicted,
            ground_truth,
            ged_lookup,
        })
    }

    pub fn candidates(&self) -> usize {
        self.ground_truth.len()
    }

    fn check_k(&self, k: usize) -> Result<(), MetricsError> {
        if k == 0 || k > self.candidates() {
            return Err(MetricsError::KOutOfRange {
                k,
                candidates: self.candidates(),
            });
        }
        Ok(())
    }

    /// Ground-truth top-k closed under cost ties at the boundary.
    fn relevant_set(&self, k: usize) -> HashSet<&str> {
        let boundary = self.ged_lookup[&self.ground_truth[k - 1]];
        self.ground_truth
            .iter()
            .filter(|id| self.ged_lookup[*id] <= boundary)
            .map(String::as_str)
            .collect()
    }
}

fn dcg_at_k(predicted: &[String], relevant: &HashSet<&str>, k: usize) -> f64 {
    predicted
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, id)| relevant.contains(id.as_str()))
        .map(|(rank, _)| 1.0 / ((rank + 2) as f64).log2())
        .sum()
}

fn ideal_dcg(relevant_count: usize, k: usize) -> f64 {
    (0..relevant_count.min(k))
        .map(|rank| 1.0 / ((rank + 2) as f64).log2())
        .sum()
}

/// Fraction of the predicted top-k that is ground-truth relevant.
pub fn precision_at_k(rp: &RankingPair, k: usize) -> Result<f64, MetricsError> {
    rp.check_k(k)?;
    let relevant = rp.relevant_set(k);
    let hits = rp
        .predicted
        .iter()
        .take(k)
        .filter(|id| relevant.contains(id.as_str()))
        .count();
    Ok(hits as f64 / k as f64)
}

/// Flat-gain normalized discounted cumulative gain at k.
pub fn ndcg_at_k(rp: &RankingPair, k: usize) -> Result<f64, MetricsError> {
    rp.check_k(k)?;
    let relevant = rp.relevant_set(k);
    let ideal = ideal_dcg(relevant.len(), k);
    if ideal == 0.0 {
        return Ok(0.0);
    }
    Ok(dcg_at_k(&rp.predicted, &relevant, k) / ideal)
}

/// Binary counterparts: the relevant set shrinks to the tie-closed GT
/// top-1. Binary P@k is the hit indicator; binary nDCG@k discounts the
/// positions of the recovered optima.
pub fn binary_variants(rp: &RankingPair, k: usize) -> Result<(f64, f64), MetricsError> {
    rp.check_k(k)?;
    let optima = rp.relevant_set(1);
    let hit = rp
        .predicted
        .iter()
        .take(k)
        .any(|id| optima.contains(id.as_str()));
    let ideal = ideal_dcg(optima.len(), k);
    let ndcg = if ideal == 0.0 {
        0.0
    } else {
        dcg_at_k(&rp.predicted, &optima, k) / ideal
    };
    Ok((if hit { 1.0 } else { 0.0 }, ndcg))
}

/// Edit-economy summary of per-query top-1 explanations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditMetrics {
    pub mean_node_edits: f64,
    pub mean_edge_edits: f64,
    pub mean_total_edits: f64,
    pub mean_ged: f64,
}

pub fn edit_metrics(results: &[GedResult]) -> Result<EditMetrics, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = results.len() as f64;
    let mut nodes = 0.0;
    let mut edges = 0.0;
    let mut ged = 0.0;
    for r in results {
        nodes += r.script.node_edit_count() as f64;
        edges += r.script.edge_edit_count() as f64;
        ged += r.cost.value().unwrap_or(f64::NAN);
    }
    Ok(EditMetrics {
        mean_node_edits: nodes / n,
        mean_edge_edits: edges / n,
        mean_total_edits: (nodes + edges) / n,
        mean_ged: ged / n,
    })
}

/// All ranking metrics at the configured cutoffs plus the edit economy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: BTreeMap<usize, f64>,
    pub ndcg: BTreeMap<usize, f64>,
    pub binary_precision: BTreeMap<usize, f64>,
    pub binary_ndcg: BTreeMap<usize, f64>,
    pub edits: EditMetrics,
    /// Queries that contributed to each k (pools smaller than k skip it).
    pub support: BTreeMap<usize, usize>,
}

impl MetricsReport {
    /// Average per-query metrics over a set of ranking pairs.
    pub fn aggregate(
        pairs: &[RankingPair],
        ks: &[usize],
        edits: EditMetrics,
    ) -> Result<MetricsReport, MetricsError> {
        if pairs.is_empty() {
            return Err(MetricsError::Empty);
        }
        let mut precision = BTreeMap::new();
        let mut ndcg = BTreeMap::new();
        let mut binary_precision = BTreeMap::new();
        let mut binary_ndcg = BTreeMap::new();
        let mut support = BTreeMap::new();
        for &k in ks {
            let mut sums = (0.0, 0.0, 0.0, 0.0);
            let mut count = 0usize;
            for rp in pairs {
                if k > rp.candidates() {
                    continue;
                }
                sums.0 += precision_at_k(rp, k)?;
                sums.1 += ndcg_at_k(rp, k)?;
                let (bp, bn) = binary_variants(rp, k)?;
                sums.2 += bp;
                sums.3 += bn;
                count += 1;
            }
            if count > 0 {
                let c = count as f64;
                precision.insert(k, sums.0 / c);
                ndcg.insert(k, sums.1 / c);
                binary_precision.insert(k, sums.2 / c);
                binary_ndcg.insert(k, sums.3 / c);
            }
            support.insert(k, count);
        }
        Ok(MetricsReport {
            precision,
            ndcg,
            binary_precision,
            binary_ndcg,
            edits,
            support,
        })
    }

    /// Long-format rows: (metric, k, value); k = 0 flags corpus-level edit
    /// metrics.
    pub fn rows(&self) -> Vec<(String, usize, f64)> {
        let mut rows = Vec::new();
        for (map, name) in [
            (&self.precision, "precision"),
            (&self.ndcg, "ndcg"),
            (&self.binary_precision, "binary_precision"),
            (&self.binary_ndcg, "binary_ndcg"),
        ] {
            for (&k, &v) in map {
                rows.push((name.to_string(), k, v));
            }
        }
        rows.push(("mean_node_edits".to_string(), 0, self.edits.mean_node_edits));
        rows.push(("mean_edge_edits".to_string(), 0, self.edits.mean_edge_edits));
        rows.push(("mean_total_edits".to_string(), 0, self.edits.mean_total_edits));
        rows.push(("mean_ged".to_string(), 0, self.edits.mean_ged));
        rows
    }
}

/// Side-by-side comparison of tiers or engines: P@1 plus edit metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub tier: String,
    pub precision_at_1: f64,
    pub mean_node_edits: f64,
    pub mean_edge_edits: f64,
    pub mean_total_edits: f64,
    pub mean_ged: f64,
}

pub fn compare_tiers(reports: &BTreeMap<String, MetricsReport>) -> ComparisonTable {
    let rows = reports
        .iter()
        .map(|(tier, report)| ComparisonRow {
            tier: tier.clone(),
            precision_at_1: report.precision.get(&1).copied().unwrap_or(f64::NAN),
            mean_node_edits: report.edits.mean_node_edits,
            mean_edge_edits: report.edits.mean_edge_edits,
            mean_total_edits: report.edits.mean_total_edits,
            mean_ged: report.edits.mean_ged,
        })
        .collect();
    ComparisonTable { rows }
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("tier,precision_at_1,mean_node_edits,mean_edge_edits,mean_total_edits,mean_ged\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.tier,
                r.precision_at_1,
                r.mean_node_edits,
                r.mean_edge_edits,
                r.mean_total_edits,
                r.mean_ged
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<24} {:>8} {:>12} {:>12} {:>13} {:>10}\n",
            "tier", "P@1", "node edits", "edge edits", "total edits", "mean GED"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<24} {:>8.3} {:>12.3} {:>12.3} {:>13.3} {:>10.3}\n",
                r.tier,
                r.precision_at_1,
                r.mean_node_edits,
                r.mean_edge_edits,
                r.mean_total_edits,
                r.mean_ged
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::script::EditScript;

    fn pair(predicted: &[&str], gt: &[&str], costs: &[f64]) -> RankingPair {
        let lookup = gt
            .iter()
            .zip(costs)
            .map(|(id, &c)| (id.to_string(), Cost::finite(c)))
            .collect();
        RankingPair::new(
            predicted.iter().map(|s| s.to_string()).collect(),
            gt.iter().map(|s| s.to_string()).collect(),
            lookup,
        )
        .unwrap()
    }

    #[test]
    fn perfect_ranking_scores_one_everywhere() {
        let rp = pair(
            &["a", "b", "c", "d"],
            &["a", "b", "c", "d"],
            &[1.0, 2.0, 3.0, 4.0],
        );
        for k in 1..=4 {
            assert_eq!(precision_at_k(&rp, k).unwrap(), 1.0);
            assert_eq!(ndcg_at_k(&rp, k).unwrap(), 1.0);
        }
    }

    #[test]
    fn reversed_ranking_misses_the_top() {
        let ids: Vec<String> = (0..10).map(|i| format!("c{i}")).collect();
        let reversed: Vec<&str> = ids.iter().rev().map(String::as_str).collect();
        let forward: Vec<&str> = ids.iter().map(String::as_str).collect();
        let costs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let rp = pair(&reversed, &forward, &costs);
        assert_eq!(precision_at_k(&rp, 2).unwrap(), 0.0);
    }

    #[test]
    fn half_overlap_at_four() {
        let rp = pair(
            &["a", "b", "x", "y", "c", "d"],
            &["a", "b", "c", "d", "x", "y"],
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        );
        assert_eq!(precision_at_k(&rp, 4).unwrap(), 0.5);
    }

    #[test]
    fn swapped_top_two_is_still_a_perfect_top_two() {
        // Tie-closed relevance at k=2 is {a, b}; predicting them swapped
        // fills both ranks with relevant items.
        let rp = pair(&["b", "a", "c"], &["a", "b", "c"], &[1.0, 2.0, 3.0]);
        assert!((ndcg_at_k(&rp, 2).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(precision_at_k(&rp, 2).unwrap(), 1.0);
        // At k=1 the relevant set is {a} alone and rank 1 misses it.
        assert_eq!(precision_at_k(&rp, 1).unwrap(), 0.0);
    }

    #[test]
    fn one_relevant_item_recovered_at_rank_two() {
        // DCG = 1/log2(3) against an ideal of 1: the single optimum sits
        // at predicted rank 2 within a k=2 window.
        let rp = pair(&["b", "a", "c"], &["a", "b", "c"], &[1.0, 2.0, 3.0]);
        let (_, ndcg) = binary_variants(&rp, 2).unwrap();
        assert!((ndcg - 1.0 / 3.0f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn no_relevant_in_top_k_scores_zero() {
        let rp = pair(
            &["d", "e", "a", "b", "c"],
            &["a", "b", "c", "d", "e"],
            &[1.0, 2.0, 3.0, 4.0, 5.0],
        );
        assert_eq!(ndcg_at_k(&rp, 2).unwrap(), 0.0);
    }

    #[test]
    fn binary_variants_follow_the_optimum() {
        let rp = pair(&["b", "a", "c"], &["a", "b", "c"], &[1.0, 2.0, 3.0]);
        // Optimum a sits at predicted rank 2.
        let (p1, n1) = binary_variants(&rp, 1).unwrap();
        assert_eq!((p1, n1), (0.0, 0.0));
        let (p2, n2) = binary_variants(&rp, 2).unwrap();
        assert_eq!(p2, 1.0);
        assert!((n2 - 1.0 / 3.0f64.log2()).abs() < 1e-12);

        let top = pair(&["a", "b"], &["a", "b"], &[1.0, 2.0]);
        assert_eq!(binary_variants(&top, 1).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn binary_precision_is_monotone_in_k() {
        let rp = pair(
            &["c", "b", "a", "d"],
            &["a", "b", "c", "d"],
            &[1.0, 2.0, 3.0, 4.0],
        );
        let mut last = 0.0;
        for k in 1..=4 {
            let (p, _) = binary_variants(&rp, k).unwrap();
            assert!(p >= last);
            last = p;
        }
    }

    #[test]
    fn ties_close_the_relevant_set() {
        // b and c tie at the k=1 boundary: predicting either is perfect.
        let rp = pair(&["c", "b", "a"], &["b", "c", "a"], &[1.0, 1.0, 3.0]);
        assert_eq!(precision_at_k(&rp, 1).unwrap(), 1.0);
        let (bp, _) = binary_variants(&rp, 1).unwrap();
        assert_eq!(bp, 1.0);
    }

    #[test]
    fn k_out_of_range_is_an_error() {
        let rp = pair(&["a"], &["a"], &[1.0]);
        assert!(matches!(
            precision_at_k(&rp, 2),
            Err(MetricsError::KOutOfRange { .. })
        ));
        assert!(matches!(
            ndcg_at_k(&rp, 0),
            Err(MetricsError::KOutOfRange { .. })
        ));
    }

    #[test]
    fn edit_metrics_average_ops_and_costs() {
        use crate::ged::{GedMode, GedResult};
        use crate::script::EditOp;
        let script_a = EditScript::new(vec![
            EditOp::DeleteNode {
                node: "a".into(),
                concept: "cat".into(),
                cost: Cost::finite(2.0),
            },
            EditOp::DeleteNode {
                node: "b".into(),
                concept: "dog".into(),
                cost: Cost::finite(2.0),
            },
            EditOp::DeleteEdge {
                src: "a".into(),
                dst: "b".into(),
                role: "on".into(),
                cost: Cost::finite(1.0),
            },
        ]);
        let script_b = EditScript::new(vec![
            EditOp::DeleteNode {
                node: "a".into(),
                concept: "cat".into(),
                cost: Cost::finite(2.0),
            },
            EditOp::DeleteNode {
                node: "b".into(),
                concept: "dog".into(),
                cost: Cost::finite(2.0),
            },
            EditOp::DeleteNode {
                node: "c".into(),
                concept: "cat".into(),
                cost: Cost::finite(2.0),
            },
            EditOp::DeleteNode {
                node: "d".into(),
                concept: "dog".into(),
                cost: Cost::finite(2.0),
            },
            EditOp::DeleteEdge {
                src: "a".into(),
                dst: "b".into(),
                role: "on".into(),
                cost: Cost::finite(1.0),
            },
            EditOp::DeleteEdge {
                src: "c".into(),
                dst: "d".into(),
                role: "on".into(),
                cost: Cost::finite(1.0),
            },
            EditOp::DeleteEdge {
                src: "a".into(),
                dst: "d".into(),
                role: "on".into(),
                cost: Cost::finite(1.0),
            },
        ]);
        let results = vec![
            GedResult {
                cost: Cost::finite(5.0),
                script: script_a,
                mode: GedMode::Exact,
            },
            GedResult {
                cost: Cost::finite(7.0),
                script: script_b,
                mode: GedMode::Exact,
            },
        ];
        let m = edit_metrics(&results).unwrap();
        assert_eq!(m.mean_node_edits, 3.0);
        assert_eq!(m.mean_edge_edits, 2.0);
        assert_eq!(m.mean_total_edits, 5.0);
        assert_eq!(m.mean_ged, 6.0);
        assert!(edit_metrics(&[]).is_err());
    }

    #[test]
    fn comparison_table_mirrors_reports() {
        let rp = pair(&["a", "b"], &["a", "b"], &[1.0, 2.0]);
        let edits = EditMetrics {
            mean_node_edits: 1.0,
            mean_edge_edits: 2.0,
            mean_total_edits: 3.0,
            mean_ged: 4.0,
        };
        let report = MetricsReport::aggregate(&[rp], &[1, 2], edits).unwrap();
        let mut reports = BTreeMap::new();
        reports.insert("atomic".to_string(), report.clone());
        reports.insert("structural".to_string(), report);
        let table = compare_tiers(&reports);
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].tier, "atomic");
        assert_eq!(table.rows[0].precision_at_1, 1.0);
        assert!(table.to_csv().lines().count() == 3);
        assert!(table.to_text().contains("P@1"));
    }

    #[test]
    fn comparison_rows_render_reference_values() {
        // A hand-filled orientation row renders with its exact P@1.
        let table = ComparisonTable {
            rows: vec![ComparisonRow {
                tier: "structural".to_string(),
                precision_at_1: 0.248,
                mean_node_edits: 4.942,
                mean_edge_edits: 10.312,
                mean_total_edits: 15.254,
                mean_ged: 105.194,
            }],
        };
        assert!(table.to_csv().contains("structural,0.248,"));
        assert!(table.to_text().contains("0.248"));
    }

    #[test]
    fn metrics_survive_candidate_relabeling() {
        let rp1 = pair(&["b", "a", "c"], &["a", "b", "c"], &[1.0, 2.0, 3.0]);
        let rp2 = pair(&["y", "x", "z"], &["x", "y", "z"], &[1.0, 2.0, 3.0]);
        for k in 1..=3 {
            assert_eq!(
                precision_at_k(&rp1, k).unwrap(),
                precision_at_k(&rp2, k).unwrap()
            );
            assert_eq!(ndcg_at_k(&rp1, k).unwrap(), ndcg_at_k(&rp2, k).unwrap());
        }
    }
}
