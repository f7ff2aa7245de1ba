//! Label-aware graph isomorphism for small graphs.
//!
//! Backtracking over candidate node maps, used to check that GED is zero
//! exactly on structurally identical graphs and that applying an edit
//! script reproduces the target graph.

use crate::scene::{IndexedGraph, SceneGraph};
use std::collections::BTreeMap;

/// True when a bijection exists that preserves concept labels and all
/// role-labeled directed edges.
pub fn isomorphic(a: &SceneGraph, b: &SceneGraph) -> bool {
    let (Ok(ia), Ok(ib)) = (a.indexed(), b.indexed()) else {
        return false;
    };
    if ia.node_count() != ib.node_count() || ia.edges.len() != ib.edges.len() {
        return false;
    }
    let mut la: Vec<&String> = ia.concepts.iter().collect();
    let mut lb: Vec<&String> = ib.concepts.iter().collect();
    la.sort();
    lb.sort();
    if la != lb {
        return false;
    }
    let mut ra: Vec<&String> = ia.edges.iter().map(|(_, r, _)| r).collect();
    let mut rb: Vec<&String> = ib.edges.iter().map(|(_, r, _)| r).collect();
    ra.sort();
    rb.sort();
    if ra != rb {
        return false;
    }

    let n = ia.node_count();
    if n == 0 {
        return true;
    }

    let groups_a = role_groups(&ia);
    let groups_b = role_groups(&ib);
    let degree = |groups: &BTreeMap<(usize, usize), Vec<String>>, v: usize| -> (usize, usize) {
        let out = groups
            .iter()
            .filter(|(&(s, _), _)| s == v)
            .map(|(_, r)| r.len())
            .sum();
        let inn = groups
            .iter()
            .filter(|(&(_, d), _)| d == v)
            .map(|(_, r)| r.len())
            .sum();
        (out, inn)
    };
    let deg_a: Vec<(usize, usize)> = (0..n).map(|v| degree(&groups_a, v)).collect();
    let deg_b: Vec<(usize, usize)> = (0..n).map(|v| degree(&groups_b, v)).collect();

    // Assign high-degree nodes first to fail fast.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(deg_a[v].0 + deg_a[v].1));

    let mut mapping = vec![usize::MAX; n];
    let mut used = vec![false; n];
    backtrack(
        0,
        &order,
        &ia,
        &ib,
        &groups_a,
        &groups_b,
        &deg_a,
        &deg_b,
        &mut mapping,
        &mut used,
    )
}

fn role_groups(g: &IndexedGraph) -> BTreeMap<(usize, usize), Vec<String>> {
    let mut groups: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    for (s, role, d) in &g.edges {
        groups.entry((*s, *d)).or_default().push(role.clone());
    }
    for roles in groups.values_mut() {
        roles.sort();
    }
    groups
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    pos: usize,
    order: &[usize],
    ia: &IndexedGraph,
    ib: &IndexedGraph,
    groups_a: &BTreeMap<(usize, usize), Vec<String>>,
    groups_b: &BTreeMap<(usize, usize), Vec<String>>,
    deg_a: &[(usize, usize)],
    deg_b: &[(usize, usize)],
    mapping: &mut Vec<usize>,
    used: &mut Vec<bool>,
) -> bool {
    if pos == order.len() {
        return true;
    }
    let u = order[pos];
    for v in 0..ib.node_count() {
        if used[v] || ia.concepts[u] != ib.concepts[v] || deg_a[u] != deg_b[v] {
            continue;
        }
        // Edge groups towards every already-mapped node must agree exactly.
        let consistent = order[..pos].iter().all(|&w| {
            let empty: Vec<String> = Vec::new();
            let fw = groups_a.get(&(u, w)).unwrap_or(&empty);
            let fw_b = groups_b.get(&(v, mapping[w])).unwrap_or(&empty);
            let bw = groups_a.get(&(w, u)).unwrap_or(&empty);
            let bw_b = groups_b.get(&(mapping[w], v)).unwrap_or(&empty);
            fw == fw_b && bw == bw_b
        });
        if !consistent {
            continue;
        }
        mapping[u] = v;
        used[v] = true;
        if backtrack(
            pos + 1,
            order,
            ia,
            ib,
            groups_a,
            groups_b,
            deg_a,
            deg_b,
            mapping,
            used,
        ) {
            return true;
        }
        mapping[u] = usize::MAX;
        used[v] = false;
    }
    false
}
