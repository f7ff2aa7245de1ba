//! Optimal GED via best-first search over partial node assignments.
//!
//! States assign the source nodes in canonical order; each node maps to an
//! unused candidate node or to the dummy (deletion). Edge costs are priced
//! as soon as both endpoints of a pair are decided, so the path cost `g` is
//! exact for the decided subgraph. The heuristic `h` combines the optimal
//! node-only assignment of the remaining nodes with an edge-count mismatch
//! bound; both undercount true completion cost, so the first completed
//! state popped is optimal. The approximate LAP solution seeds an upper
//! bound that prunes hopeless branches early.

use super::approx::lap_assignment;
use super::assemble::{assemble, GraphAssignment};
use super::{match_role_groups, resolve_graph, GedConfig, GedError, GedMode, GedResult, ResolvedGraph};
use crate::atomic::match_with_dummies;
use crate::cost::Cost;
use crate::relational::Taxonomies;
use crate::scene::SceneGraph;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

struct State {
    f: Cost,
    seq: u64,
    depth: usize,
    used: u64,
    g: Cost,
    map: Vec<Option<usize>>,
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.seq == other.seq
    }
}
impl Eq for State {}
impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for State {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.f.cmp(&other.f).then(self.seq.cmp(&other.seq))
    }
}

pub fn exact_ged(
    g1: &SceneGraph,
    g2: &SceneGraph,
    tx: &Taxonomies,
    config: &GedConfig,
) -> Result<GedResult, GedError> {
    let r1 = resolve_graph(g1, tx)?;
    let r2 = resolve_graph(g2, tx)?;
    for (graph, r) in [(g1, &r1), (g2, &r2)] {
        if r.node_count() > config.exact_cap {
            return Err(GedError::ExactCapExceeded {
                graph: graph.id.clone(),
                nodes: r.node_count(),
                cap: config.exact_cap,
            });
        }
    }
    assert!(r2.node_count() <= 64, "candidate graph exceeds mask width");

    let assignment = search(&r1, &r2, tx);
    let script = assemble(&r1, &r2, &assignment, tx);
    Ok(GedResult {
        cost: script.total_cost(),
        script,
        mode: GedMode::Exact,
    })
}

fn search(r1: &ResolvedGraph, r2: &ResolvedGraph, tx: &Taxonomies) -> GraphAssignment {
    let m = r1.node_count();
    let n = r2.node_count();

    // Seed an upper bound from the LAP approximation; it is a valid edit
    // path, so no optimal state can exceed its cost.
    let seed = lap_assignment(r1, r2, tx);
    let best_complete = assemble(r1, r2, &seed, tx).total_cost();
    let mut best_map = seed.node_map.clone();

    let min_role_del = min_role_depth(r1, tx);
    let min_role_ins = min_role_depth(r2, tx);

    let mut heap: BinaryHeap<Reverse<State>> = BinaryHeap::new();
    let mut seq = 0u64;
    let initial_g = if m == 0 {
        completion_cost(r2, 0, tx)
    } else {
        Cost::ZERO
    };
    let initial_h = lower_bound(r1, r2, 0, 0, tx, min_role_del, min_role_ins);
    heap.push(Reverse(State {
        f: initial_g + initial_h,
        seq,
        depth: 0,
        used: 0,
        g: initial_g,
        map: Vec::new(),
    }));

    while let Some(Reverse(state)) = heap.pop() {
        if state.f > best_complete {
            break;
        }
        if state.depth == m {
            // Admissible heuristic: the first completed state popped wins.
            if state.g <= best_complete {
                best_map = state.map;
            }
            break;
        }
        let u = state.depth;
        let push = |target: Option<usize>, seq: &mut u64, heap: &mut BinaryHeap<Reverse<State>>| {
            let delta = extension_cost(r1, r2, &state.map, u, target, tx);
            let mut g = state.g + delta;
            let used = match target {
                Some(v) => state.used | (1u64 << v),
                None => state.used,
            };
            let depth = state.depth + 1;
            if depth == m {
                g += completion_cost(r2, used, tx);
            }
            let h = lower_bound(r1, r2, depth, used, tx, min_role_del, min_role_ins);
            let f = g + h;
            if f > best_complete {
                return;
            }
            let mut map = state.map.clone();
            map.push(target);
            *seq += 1;
            heap.push(Reverse(State {
                f,
                seq: *seq,
                depth,
                used,
                g,
                map,
            }));
        };
        for v in 0..n {
            if state.used & (1u64 << v) == 0 {
                push(Some(v), &mut seq, &mut heap);
            }
        }
        push(None, &mut seq, &mut heap);
    }

    GraphAssignment { node_map: best_map }
}

/// Cost added by deciding node `u` (the next in canonical order): its node
/// op plus every edge group between `u` and the already-decided nodes.
fn extension_cost(
    r1: &ResolvedGraph,
    r2: &ResolvedGraph,
    map: &[Option<usize>],
    u: usize,
    target: Option<usize>,
    tx: &Taxonomies,
) -> Cost {
    let mut cost = match target {
        Some(v) => tx.concepts.distance_idx(r1.labels[u], r2.labels[v]),
        None => tx.concepts.deletion_cost_idx(r1.labels[u]),
    };
    for (i, phi) in map.iter().enumerate() {
        for (a, b) in [(u, i), (i, u)] {
            let left: Vec<_> = r1.roles_between(a, b).iter().map(|(idx, _)| *idx).collect();
            let right: Vec<_> = match (target, phi) {
                (Some(v), Some(w)) => {
                    let (x, y) = if a == u { (v, *w) } else { (*w, v) };
                    r2.roles_between(x, y).iter().map(|(idx, _)| *idx).collect()
                }
                _ => Vec::new(),
            };
            if left.is_empty() && right.is_empty() {
                continue;
            }
            cost += match_role_groups(&left, &right, tx).1;
        }
    }
    cost
}

/// Cost of finishing once every source node is decided: insert the unused
/// candidate nodes and every candidate edge not yet priced.
fn completion_cost(r2: &ResolvedGraph, used: u64, tx: &Taxonomies) -> Cost {
    let mut cost = Cost::ZERO;
    for v in 0..r2.node_count() {
        if used & (1u64 << v) == 0 {
            cost += tx.concepts.insertion_cost_idx(r2.labels[v]);
        }
    }
    for (&(w1, w2), roles) in &r2.groups {
        let covered = used & (1u64 << w1) != 0 && used & (1u64 << w2) != 0;
        if !covered {
            for (role_idx, _) in roles {
                cost += tx.roles.insertion_cost_idx(*role_idx);
            }
        }
    }
    cost
}

/// Admissible completion bound: optimal node-only assignment of the
/// remaining nodes plus the unavoidable edge-count mismatch.
fn lower_bound(
    r1: &ResolvedGraph,
    r2: &ResolvedGraph,
    depth: usize,
    used: u64,
    tx: &Taxonomies,
    min_role_del: Cost,
    min_role_ins: Cost,
) -> Cost {
    let m = r1.node_count();
    if depth == m {
        return Cost::ZERO;
    }
    let rem1: Vec<usize> = (depth..m).collect();
    let rem2: Vec<usize> = (0..r2.node_count())
        .filter(|v| used & (1u64 << v) == 0)
        .collect();
    let node_bound = match_with_dummies(
        rem1.len(),
        rem2.len(),
        |i, j| tx.concepts.distance_idx(r1.labels[rem1[i]], r2.labels[rem2[j]]),
        |i| tx.concepts.deletion_cost_idx(r1.labels[rem1[i]]),
        |j| tx.concepts.insertion_cost_idx(r2.labels[rem2[j]]),
    )
    .1;

    let e1: usize = r1
        .groups
        .iter()
        .map(|(&(a, b), roles)| {
            if a >= depth || b >= depth {
                roles.len()
            } else {
                0
            }
        })
        .sum();
    let e2: usize = r2
        .groups
        .iter()
        .map(|(&(a, b), roles)| {
            if used & (1u64 << a) == 0 || used & (1u64 << b) == 0 {
                roles.len()
            } else {
                0
            }
        })
        .sum();
    let edge_bound = if e1 >= e2 {
        min_role_del.scale((e1 - e2) as f64)
    } else {
        min_role_ins.scale((e2 - e1) as f64)
    };
    node_bound + edge_bound
}

fn min_role_depth(r: &ResolvedGraph, tx: &Taxonomies) -> Cost {
    r.groups
        .values()
        .flatten()
        .map(|(idx, _)| tx.roles.deletion_cost_idx(*idx))
        .min()
        .unwrap_or(Cost::ZERO)
}
