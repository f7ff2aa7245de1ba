//! Brute-force reference solvers for the test suites.
//!
//! Everything here verifies results by exhaustive enumeration and never
//! touches the assignment solver or the search code it is used to check.
//! Costs are priced through the same taxonomy primitives (the cost model is
//! the shared contract); the *optimization* is what these oracles replace.

use ccf::atomic::{ConceptSet, DummyPenalty, SetEditConfig};
use ccf::cost::Cost;
use ccf::relational::{Exemplar, Taxonomies};
use ccf::scene::SceneGraph;
use ccf::taxonomy::{Taxonomy, TaxonomyBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Minimum cost over every full matching of `n_left` x `n_right` elements,
/// where unmatched elements pair with dummies. Pure recursion.
pub fn brute_match(
    n_left: usize,
    n_right: usize,
    sub: &dyn Fn(usize, usize) -> Cost,
    del: &dyn Fn(usize) -> Cost,
    ins: &dyn Fn(usize) -> Cost,
) -> Cost {
    fn recurse(
        i: usize,
        n_left: usize,
        used: &mut Vec<bool>,
        sub: &dyn Fn(usize, usize) -> Cost,
        del: &dyn Fn(usize) -> Cost,
        ins: &dyn Fn(usize) -> Cost,
    ) -> Cost {
        if i == n_left {
            let mut rest = Cost::ZERO;
            for (j, taken) in used.iter().enumerate() {
                if !taken {
                    rest += ins(j);
                }
            }
            return rest;
        }
        let mut best = del(i) + recurse(i + 1, n_left, used, sub, del, ins);
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                let candidate = sub(i, j) + recurse(i + 1, n_left, used, sub, del, ins);
                used[j] = false;
                if candidate < best {
                    best = candidate;
                }
            }
        }
        best
    }
    let mut used = vec![false; n_right];
    recurse(0, n_left, &mut used, sub, del, ins)
}

/// Exhaustive set-edit distance between two concept multisets.
pub fn brute_set_edit(
    s1: &ConceptSet,
    s2: &ConceptSet,
    taxonomy: &Taxonomy,
    config: &SetEditConfig,
) -> Cost {
    let dummy = |id: &str| match config.dummy_penalty {
        DummyPenalty::DepthCost => taxonomy.deletion_cost(id).unwrap(),
        DummyPenalty::Constant(c) => Cost::finite(c),
    };
    brute_match(
        s1.elements.len(),
        s2.elements.len(),
        &|i, j| {
            taxonomy
                .concept_distance(&s1.elements[i], &s2.elements[j])
                .unwrap()
        },
        &|i| dummy(&s1.elements[i]),
        &|j| dummy(&s2.elements[j]),
    )
}

/// Exhaustive distance between two roled-up concepts: both two-element sets
/// enumerated fully, cross-kind pairings infeasible.
pub fn brute_role_distance(
    role1: &str,
    filler1: &str,
    role2: &str,
    filler2: &str,
    tx: &Taxonomies,
) -> Cost {
    brute_match(
        2,
        2,
        &|i, j| match (i, j) {
            (0, 0) => tx.roles.concept_distance(role1, role2).unwrap(),
            (1, 1) => tx.concepts.concept_distance(filler1, filler2).unwrap(),
            _ => Cost::Infinite,
        },
        &|i| {
            if i == 0 {
                tx.roles.deletion_cost(role1).unwrap()
            } else {
                tx.concepts.deletion_cost(filler1).unwrap()
            }
        },
        &|j| {
            if j == 0 {
                tx.roles.deletion_cost(role2).unwrap()
            } else {
                tx.concepts.deletion_cost(filler2).unwrap()
            }
        },
    )
}

/// Exhaustive exemplar distance: enumerated element matching with fully
/// enumerated per-element costs.
pub fn brute_exemplar_distance(e1: &Exemplar, e2: &Exemplar, tx: &Taxonomies) -> Cost {
    let full_price = |el: &ccf::relational::ExemplarElement| -> Cost {
        tx.concepts.deletion_cost(&el.source).unwrap()
            + tx.roles.deletion_cost(&el.relation.role).unwrap()
            + tx.concepts.deletion_cost(&el.relation.filler).unwrap()
    };
    brute_match(
        e1.elements.len(),
        e2.elements.len(),
        &|i, j| {
            let a = &e1.elements[i];
            let b = &e2.elements[j];
            tx.concepts.concept_distance(&a.source, &b.source).unwrap()
                + brute_role_distance(
                    &a.relation.role,
                    &a.relation.filler,
                    &b.relation.role,
                    &b.relation.filler,
                    tx,
                )
        },
        &|i| full_price(&e1.elements[i]),
        &|j| full_price(&e2.elements[j]),
    )
}

/// Exhaustive GED: enumerate every injective partial node mapping (others
/// delete / insert) and price nodes plus all induced edge operations.
pub fn brute_ged(g1: &SceneGraph, g2: &SceneGraph, tx: &Taxonomies) -> Cost {
    let i1 = g1.indexed().unwrap();
    let i2 = g2.indexed().unwrap();
    let groups1 = edge_groups(&i1.edges);
    let groups2 = edge_groups(&i2.edges);
    let m = i1.node_ids.len();
    let n = i2.node_ids.len();

    let mut best = Cost::Infinite;
    let mut mapping: Vec<Option<usize>> = vec![None; m];
    let mut used = vec![false; n];
    enumerate_mappings(0, m, n, &mut mapping, &mut used, &mut |mapping| {
        let cost = price_mapping(&i1.concepts, &i2.concepts, &groups1, &groups2, mapping, n, tx);
        if cost < best {
            best = cost;
        }
    });
    best
}

fn edge_groups(edges: &[(usize, String, usize)]) -> BTreeMap<(usize, usize), Vec<String>> {
    let mut groups: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    for (s, role, d) in edges {
        groups.entry((*s, *d)).or_default().push(role.clone());
    }
    groups
}

fn enumerate_mappings(
    u: usize,
    m: usize,
    n: usize,
    mapping: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    visit: &mut dyn FnMut(&[Option<usize>]),
) {
    if u == m {
        visit(mapping);
        return;
    }
    mapping[u] = None;
    enumerate_mappings(u + 1, m, n, mapping, used, visit);
    for v in 0..n {
        if !used[v] {
            used[v] = true;
            mapping[u] = Some(v);
            enumerate_mappings(u + 1, m, n, mapping, used, visit);
            mapping[u] = None;
            used[v] = false;
        }
    }
}

fn price_mapping(
    labels1: &[String],
    labels2: &[String],
    groups1: &BTreeMap<(usize, usize), Vec<String>>,
    groups2: &BTreeMap<(usize, usize), Vec<String>>,
    mapping: &[Option<usize>],
    n2: usize,
    tx: &Taxonomies,
) -> Cost {
    let mut cost = Cost::ZERO;
    let mut image = vec![false; n2];
    for (u, target) in mapping.iter().enumerate() {
        match target {
            Some(v) => {
                image[*v] = true;
                cost += tx.concepts.concept_distance(&labels1[u], &labels2[*v]).unwrap();
            }
            None => cost += tx.concepts.deletion_cost(&labels1[u]).unwrap(),
        }
    }
    for (v, covered) in image.iter().enumerate() {
        if !covered {
            cost += tx.concepts.deletion_cost(&labels2[v]).unwrap();
        }
    }

    // Every ordered source pair, including pairs whose images carry edges
    // the sources lack.
    let m = mapping.len();
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            let empty = Vec::new();
            let left = groups1.get(&(a, b)).unwrap_or(&empty);
            let right = match (mapping[a], mapping[b]) {
                (Some(va), Some(vb)) => groups2.get(&(va, vb)).unwrap_or(&empty),
                _ => &empty,
            };
            if left.is_empty() && right.is_empty() {
                continue;
            }
            cost += brute_match(
                left.len(),
                right.len(),
                &|i, j| tx.roles.concept_distance(&left[i], &right[j]).unwrap(),
                &|i| tx.roles.deletion_cost(&left[i]).unwrap(),
                &|j| tx.roles.deletion_cost(&right[j]).unwrap(),
            );
        }
    }

    // Candidate edges touching a non-image node are pure insertions.
    for (&(w1, w2), roles) in groups2 {
        if !image[w1] || !image[w2] {
            for role in roles {
                cost += tx.roles.deletion_cost(role).unwrap();
            }
        }
    }
    cost
}

/// A random connected tree taxonomy with unit weights, `n` atomic concepts
/// named c0..c{n-1}.
pub fn random_tree_taxonomy(rng: &mut ChaCha8Rng, n: usize) -> Taxonomy {
    let mut builder: TaxonomyBuilder = Taxonomy::builder();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        builder = builder.edge(&format!("c{parent}"), &format!("c{i}"));
    }
    if n == 1 {
        builder = builder.concept("c0");
    }
    builder.build().unwrap()
}

/// A random concept multiset over the taxonomy's atomic concepts.
pub fn random_concept_set(
    rng: &mut ChaCha8Rng,
    taxonomy: &Taxonomy,
    id: &str,
    class: &str,
    max_len: usize,
) -> ConceptSet {
    let atoms: Vec<String> = taxonomy
        .concepts()
        .filter(|c| c.kind == ccf::taxonomy::ConceptKind::Atomic)
        .map(|c| c.id.clone())
        .collect();
    let len = rng.gen_range(0..=max_len);
    let elements = (0..len)
        .map(|_| atoms[rng.gen_range(0..atoms.len())].clone())
        .collect();
    ConceptSet::new(id, class, elements)
}

/// Seeded RNG shorthand.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
