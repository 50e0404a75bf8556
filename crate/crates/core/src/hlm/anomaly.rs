//! Planted attack anomalies: a scan (edges fanned out from three source
//! vertices) and lateral movement (a random spanning tree over a random
//! vertex subset). Both only ever add edges.

use rand::seq::index::sample;
use rand::Rng as _;

use super::HlmError;
use crate::graph::Graph;
use crate::rng::Rng;

/// Adds exactly `budget` new edges from 3 random source vertices to
/// uniformly random other vertices, resampling any collision with an
/// existing or already-added edge. Fails when the budget exceeds the free
/// pairs available at the chosen sources.
pub fn inject_scan(g: &Graph, budget: usize, rng: &mut Rng) -> Result<Graph, HlmError> {
    let n = g.vertex_count();
    if n < 4 {
        return Err(HlmError::TooFewVertices { needed: 4, n });
    }
    let sources: Vec<usize> = sample(rng, n, 3).into_iter().collect();

    // Free pairs incident to a source, counting source-source pairs once.
    let degrees = g.degrees();
    let mut available: usize = sources.iter().map(|&s| n - 1 - degrees[s] as usize).sum();
    for (i, &s) in sources.iter().enumerate() {
        for &t in &sources[i + 1..] {
            if !g.has_edge(s as u32, t as u32) {
                available -= 1;
            }
        }
    }
    if budget > available {
        return Err(HlmError::InsufficientCapacity { budget, available });
    }

    let mut added: Vec<(u32, u32)> = Vec::with_capacity(budget);
    let mut attempts = 0usize;
    let attempt_limit = 10_000_000usize;
    while added.len() < budget {
        attempts += 1;
        if attempts > attempt_limit {
            return Err(HlmError::InsufficientCapacity { budget, available });
        }
        let s = sources[rng.gen_range(0..3)] as u32;
        let t = rng.gen_range(0..n as u32 - 1);
        let t = if t >= s { t + 1 } else { t };
        let pair = (s.min(t), s.max(t));
        if g.has_edge(pair.0, pair.1) || added.contains(&pair) {
            continue;
        }
        added.push(pair);
    }

    let mut edges = g.edges().to_vec();
    edges.extend(added);
    Ok(Graph::new(n, edges).expect("valid edges"))
}

/// Adds a uniformly random spanning tree over `budget + 1` random distinct
/// vertices, generated from a uniform label sequence. Tree edges that
/// already exist in the graph are kept as they are, so the number of added
/// edges can fall below the budget on collision.
pub fn inject_lateral(g: &Graph, budget: usize, rng: &mut Rng) -> Result<Graph, HlmError> {
    let n = g.vertex_count();
    let k = budget + 1;
    if k > n {
        return Err(HlmError::TooFewVertices { needed: k, n });
    }
    let chosen: Vec<usize> = sample(rng, n, k).into_iter().collect();

    let tree_edges: Vec<(usize, usize)> = if k == 2 {
        vec![(0, 1)]
    } else {
        let prufer: Vec<usize> = (0..k - 2).map(|_| rng.gen_range(0..k)).collect();
        prufer_decode(&prufer)
    };

    let mut edges = g.edges().to_vec();
    for (a, b) in tree_edges {
        let u = chosen[a] as u32;
        let v = chosen[b] as u32;
        if !g.has_edge(u, v) {
            edges.push((u.min(v), u.max(v)));
        }
    }
    Ok(Graph::new(n, edges).expect("valid edges"))
}

/// Decodes a label sequence of length m into the edge list of the labeled
/// tree on m + 2 vertices it encodes. The encoding is a bijection, so a
/// uniform sequence yields a uniform labeled tree.
pub fn prufer_decode(prufer: &[usize]) -> Vec<(usize, usize)> {
    let n = prufer.len() + 2;
    debug_assert!(prufer.iter().all(|&a| a < n));
    let mut degree = vec![1u32; n];
    for &a in prufer {
        degree[a] += 1;
    }
    let mut ptr = 0;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    let mut edges = Vec::with_capacity(n - 1);
    for &a in prufer {
        edges.push((leaf, a));
        degree[a] -= 1;
        if degree[a] == 1 && a < ptr {
            leaf = a;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf, n - 1));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use crate::similarity::edit_distance_aligned;
    use std::collections::{BTreeSet, HashMap, HashSet};

    #[test]
    fn scan_on_empty_graph_touches_three_sources() {
        let g = Graph::empty(100);
        let out = inject_scan(&g, 10, &mut rng::seeded(1)).unwrap();
        assert_eq!(out.edge_count(), 10);
        // Every edge must be incident to one of at most 3 distinct sources.
        let mut incident: HashMap<u32, usize> = HashMap::new();
        for &(u, v) in out.edges() {
            *incident.entry(u).or_default() += 1;
            *incident.entry(v).or_default() += 1;
        }
        let mut counts: Vec<usize> = incident.values().copied().collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        let top3: usize = counts.iter().take(3).sum();
        assert!(top3 >= 10, "3 vertices must cover all 10 edges: {counts:?}");
    }

    #[test]
    fn scan_edit_distance_equals_budget() {
        let mut rng = rng::seeded(2);
        let base = Graph::new(50, (0..49u32).map(|i| (i, i + 1))).unwrap();
        for budget in [1, 5, 20] {
            let out = inject_scan(&base, budget, &mut rng).unwrap();
            assert_eq!(edit_distance_aligned(&base, &out).unwrap(), budget);
            // Strictly additive.
            for &e in base.edges() {
                assert!(out.has_edge(e.0, e.1));
            }
        }
    }

    #[test]
    fn scan_degree_increase_concentrates() {
        // Over 100 random injections, at most 3 vertices gain degree.
        let base = Graph::new(60, (0..59u32).map(|i| (i, i + 1))).unwrap();
        let mut rng = rng::seeded(3);
        for _ in 0..100 {
            let out = inject_scan(&base, 12, &mut rng).unwrap();
            let before = base.degrees();
            let after = out.degrees();
            let sources: Vec<usize> = (0..60)
                .filter(|&v| {
                    // A gaining vertex is either a source or a target; only
                    // sources can gain more than a few.
                    after[v] > before[v] + 3
                })
                .collect();
            assert!(sources.len() <= 3, "gainers: {sources:?}");
        }
    }

    #[test]
    fn scan_capacity_errors() {
        assert!(matches!(
            inject_scan(&Graph::empty(3), 1, &mut rng::seeded(0)),
            Err(HlmError::TooFewVertices { .. })
        ));
        // n = 4: three sources can reach at most 3 + 3 = 6 pairs.
        let g = Graph::empty(4);
        assert!(matches!(
            inject_scan(&g, 7, &mut rng::seeded(0)),
            Err(HlmError::InsufficientCapacity { available: 6, .. })
        ));
        assert!(inject_scan(&g, 6, &mut rng::seeded(0)).is_ok());
    }

    #[test]
    fn lateral_adds_a_tree_on_empty_graph() {
        let g = Graph::empty(40);
        for budget in [1, 2, 7, 20] {
            let out = inject_lateral(&g, budget, &mut rng::seeded(budget as u64)).unwrap();
            assert_eq!(out.edge_count(), budget);
            // The added edges span exactly budget + 1 vertices and form a
            // connected acyclic graph (edge count = vertex count - 1 and
            // connected).
            let mut verts = BTreeSet::new();
            for &(u, v) in out.edges() {
                verts.insert(u);
                verts.insert(v);
            }
            assert_eq!(verts.len(), budget + 1);
            assert!(is_connected_over(out.edges(), &verts));
        }
    }

    #[test]
    fn lateral_keeps_existing_edges_and_never_exceeds_budget() {
        let base = Graph::new(10, (0..9u32).map(|i| (i, i + 1))).unwrap();
        let mut rng = rng::seeded(5);
        for _ in 0..200 {
            let out = inject_lateral(&base, 4, &mut rng).unwrap();
            let added = out.edge_count() - base.edge_count();
            assert!(added <= 4);
            for &e in base.edges() {
                assert!(out.has_edge(e.0, e.1));
            }
        }
    }

    #[test]
    fn lateral_requires_enough_vertices() {
        assert!(matches!(
            inject_lateral(&Graph::empty(5), 5, &mut rng::seeded(0)),
            Err(HlmError::TooFewVertices { needed: 6, n: 5 })
        ));
    }

    #[test]
    fn prufer_decode_is_a_bijection_on_four_vertices() {
        // All 4^2 = 16 label sequences decode to 16 distinct labeled trees,
        // matching the Cayley count.
        let mut trees = HashSet::new();
        for a in 0..4 {
            for b in 0..4 {
                let edges = prufer_decode(&[a, b]);
                assert_eq!(edges.len(), 3);
                let mut canon: Vec<(usize, usize)> =
                    edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
                canon.sort_unstable();
                let verts: BTreeSet<u32> = canon
                    .iter()
                    .flat_map(|&(u, v)| [u as u32, v as u32])
                    .collect();
                assert_eq!(verts.len(), 4);
                assert!(trees.insert(canon));
            }
        }
        assert_eq!(trees.len(), 16);
    }

    #[test]
    fn prufer_sampling_is_close_to_uniform() {
        // 16,000 random 4-vertex trees: each of the 16 trees should appear
        // about 1,000 times; allow 4 sigma of binomial slack.
        let mut rng = rng::seeded(6);
        let mut counts: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        let draws = 16_000;
        for _ in 0..draws {
            let prufer = [rng.gen_range(0..4), rng.gen_range(0..4)];
            let mut canon: Vec<(usize, usize)> = prufer_decode(&prufer)
                .iter()
                .map(|&(u, v)| (u.min(v), u.max(v)))
                .collect();
            canon.sort_unstable();
            *counts.entry(canon).or_default() += 1;
        }
        assert_eq!(counts.len(), 16);
        let p: f64 = 1.0 / 16.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (tree, c) in counts {
            assert!(
                (c as f64 - draws as f64 * p).abs() < 4.0 * sigma,
                "tree {tree:?} count {c}"
            );
        }
    }

    fn is_connected_over(edges: &[(u32, u32)], verts: &BTreeSet<u32>) -> bool {
        if verts.is_empty() {
            return true;
        }
        let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
        for &(u, v) in edges {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        let start = *verts.iter().next().unwrap();
        let mut seen = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if !seen.insert(v) {
                continue;
            }
            for &w in adj.get(&v).into_iter().flatten() {
                stack.push(w);
            }
        }
        seen == *verts
    }
}
