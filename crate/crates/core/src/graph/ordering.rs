use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::DissimilarityGraph;
use crate::error::{invalid, Result};

/// Vertex order starting with a complete seed clique, where every later
/// vertex is adjacent to at least `p + 1` earlier ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaterativeOrdering {
    pub order: Vec<usize>,
    /// The first `seed_size` entries of `order` form the seed clique.
    pub seed_size: usize,
    /// For every position `k >= seed_size`, the earlier neighbors of
    /// `order[k]` used as landmarks.
    pub landmarks: Vec<Vec<usize>>,
}

impl LaterativeOrdering {
    pub fn seed_clique(&self) -> &[usize] {
        &self.order[..self.seed_size]
    }

    /// Landmark set for the vertex at `position` (which must be past the seed).
    pub fn landmarks_at(&self, position: usize) -> &[usize] {
        &self.landmarks[position - self.seed_size]
    }
}

/// How the greedy seed-clique search behaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueStrategy {
    /// Number of highest-degree vertices tried as clique roots.
    pub restarts: usize,
    /// Largest seed clique to grow; `None` means `3(p + 1)`.
    pub max_size: Option<usize>,
}

impl Default for CliqueStrategy {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_size: None,
        }
    }
}

impl CliqueStrategy {
    /// Stop growing the seed clique at exactly `p + 1` vertices.
    pub fn minimal(p: usize) -> Self {
        Self {
            max_size: Some(p + 1),
            ..Self::default()
        }
    }

    pub fn size_cap(&self, p: usize) -> usize {
        self.max_size.unwrap_or(3 * (p + 1)).max(p + 1)
    }
}

/// Grows a clique from `root`: repeatedly add the common neighbor of all
/// members that has the most neighbors among the remaining candidates
/// (ties: higher degree, then smaller id).
fn greedy_clique(graph: &DissimilarityGraph, root: usize, cap: usize, mark: &mut [bool]) -> Vec<usize> {
    let mut members = vec![root];
    let mut cands: Vec<usize> = graph.neighbor_ids(root).collect();
    while members.len() < cap && !cands.is_empty() {
        for &c in &cands {
            mark[c] = true;
        }
        let best = cands
            .iter()
            .map(|&c| {
                let inside = graph.neighbor_ids(c).filter(|&u| mark[u]).count();
                (inside, graph.degree(c), Reverse(c))
            })
            .max()
            .map(|(_, _, Reverse(c))| c)
            .expect("candidates are non-empty");
        for &c in &cands {
            mark[c] = false;
        }
        members.push(best);
        cands.retain(|&c| c != best && graph.has_edge(best, c));
    }
    members
}

/// Places `seed`, then repeatedly appends an unplaced vertex with at least
/// `p + 1` placed neighbors, most placed neighbors first (ties: smaller id).
/// Returns the ordering when every vertex gets placed, `None` if the frontier stalls.
pub fn frontier_closure(graph: &DissimilarityGraph, p: usize, seed: &[usize]) -> Option<LaterativeOrdering> {
    let n = graph.node_count();
    let mut placed = vec![false; n];
    let mut count = vec![0usize; n];
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = BinaryHeap::new();
    let mut order = Vec::with_capacity(n);
    let mut landmarks = Vec::with_capacity(n.saturating_sub(seed.len()));

    let mut place = |v: usize, order: &mut Vec<usize>, placed: &mut [bool], heap: &mut BinaryHeap<_>| {
        placed[v] = true;
        order.push(v);
        for u in graph.neighbor_ids(v) {
            if !placed[u] {
                count[u] += 1;
                if count[u] > p {
                    heap.push((count[u], Reverse(u)));
                }
            }
        }
    };
    for &s in seed {
        place(s, &mut order, &mut placed, &mut heap);
    }
    while let Some((_, Reverse(u))) = heap.pop() {
        if placed[u] {
            continue;
        }
        // stale entries carry an outdated count; the freshest one is popped first
        landmarks.push(graph.neighbor_ids(u).filter(|&w| placed[w]).collect());
        place(u, &mut order, &mut placed, &mut heap);
    }
    (order.len() == n).then_some(LaterativeOrdering {
        order,
        seed_size: seed.len(),
        landmarks,
    })
}

/// Vertices sorted by decreasing degree, ties by id.
pub(crate) fn by_degree(graph: &DissimilarityGraph) -> Vec<usize> {
    let mut verts: Vec<usize> = (0..graph.node_count()).collect();
    verts.sort_by_key(|&v| (Reverse(graph.degree(v)), v));
    verts
}

/// Greedy seed cliques (size >= p + 1) grown from the top-degree roots, deduplicated.
pub(crate) fn greedy_seed_cliques(graph: &DissimilarityGraph, p: usize, strategy: &CliqueStrategy) -> Vec<Vec<usize>> {
    let cap = strategy.size_cap(p);
    let mut mark = vec![false; graph.node_count()];
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut out = Vec::new();
    for root in by_degree(graph).into_iter().take(strategy.restarts.max(1)) {
        let clique = greedy_clique(graph, root, cap, &mut mark);
        if clique.len() < p + 1 {
            continue;
        }
        let mut key = clique.clone();
        key.sort_unstable();
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        out.push(clique);
    }
    out
}

/// Heuristic search for a laterative ordering in dimension `p`.
///
/// Seed cliques are grown greedily from the `strategy.restarts` highest-degree
/// vertices; the first one whose frontier closure covers the graph wins.
/// `Ok(None)` means no tried seed worked, not that no ordering exists.
pub fn find_laterative_ordering(
    graph: &DissimilarityGraph,
    p: usize,
    strategy: &CliqueStrategy,
) -> Result<Option<LaterativeOrdering>> {
    if p == 0 {
        return invalid("dimension p must be at least 1");
    }
    if graph.node_count() < p + 1 {
        return invalid(format!(
            "a lateration graph in dimension {p} needs at least {} nodes, got {}",
            p + 1,
            graph.node_count()
        ));
    }
    Ok(greedy_seed_cliques(graph, p, strategy)
        .into_iter()
        .find_map(|seed| frontier_closure(graph, p, &seed)))
}

/// Exact check of every ordering invariant against `graph`.
pub fn is_laterative_ordering(graph: &DissimilarityGraph, ordering: &LaterativeOrdering, p: usize) -> bool {
    let n = graph.node_count();
    if ordering.order.len() != n || ordering.seed_size < p + 1 || ordering.seed_size > n {
        return false;
    }
    if ordering.landmarks.len() != n - ordering.seed_size {
        return false;
    }
    let mut position = vec![usize::MAX; n];
    for (k, &v) in ordering.order.iter().enumerate() {
        if v >= n || position[v] != usize::MAX {
            return false;
        }
        position[v] = k;
    }
    let seed = ordering.seed_clique();
    for (a, &u) in seed.iter().enumerate() {
        if seed[a + 1..].iter().any(|&w| !graph.has_edge(u, w)) {
            return false;
        }
    }
    for (offset, set) in ordering.landmarks.iter().enumerate() {
        let k = ordering.seed_size + offset;
        let v = ordering.order[k];
        if set.len() < p + 1 {
            return false;
        }
        let mut sorted = set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != set.len() {
            return false;
        }
        if set.iter().any(|&w| w >= n || position[w] >= k || !graph.has_edge(v, w)) {
            return false;
        }
    }
    true
}

/// Calls `f` on every clique of exactly `size` vertices, each listed in
/// increasing order, in lexicographic order.
pub fn for_each_clique<F: FnMut(&[usize])>(graph: &DissimilarityGraph, size: usize, mut f: F) {
    fn extend<F: FnMut(&[usize])>(
        graph: &DissimilarityGraph,
        size: usize,
        current: &mut Vec<usize>,
        cands: &[usize],
        f: &mut F,
    ) {
        if current.len() == size {
            f(current);
            return;
        }
        for (k, &v) in cands.iter().enumerate() {
            if current.len() + (cands.len() - k) < size {
                break;
            }
            let next: Vec<usize> = cands[k + 1..].iter().copied().filter(|&w| graph.has_edge(v, w)).collect();
            current.push(v);
            extend(graph, size, current, &next, f);
            current.pop();
        }
    }
    if size == 0 {
        return;
    }
    let mut current = Vec::with_capacity(size);
    for v in 0..graph.node_count() {
        let higher: Vec<usize> = graph.neighbor_ids(v).filter(|&w| w > v).collect();
        current.push(v);
        extend(graph, size, &mut current, &higher, &mut f);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Configuration;
    use crate::graph::{geometric_graph, sample_domain, DomainSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn complete(n: usize) -> DissimilarityGraph {
        let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j, 1.0)));
        DissimilarityGraph::new(n, edges).unwrap()
    }

    fn path(n: usize) -> DissimilarityGraph {
        DissimilarityGraph::new(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    #[test]
    fn complete_graph_is_laterable() {
        for p in 1..=3 {
            let g = complete(p + 2);
            let ord = find_laterative_ordering(&g, p, &CliqueStrategy::default()).unwrap().unwrap();
            assert!(is_laterative_ordering(&g, &ord, p));
            let ord = find_laterative_ordering(&g, p, &CliqueStrategy::minimal(p)).unwrap().unwrap();
            assert_eq!(ord.seed_size, p + 1);
            assert_eq!(ord.landmarks, vec![(0..=p).collect::<Vec<_>>()]);
            assert!(is_laterative_ordering(&g, &ord, p));
        }
    }

    #[test]
    fn path_is_not_laterable_in_the_plane() {
        assert!(find_laterative_ordering(&path(10), 2, &CliqueStrategy::default()).unwrap().is_none());
    }

    #[test]
    fn too_few_nodes() {
        assert!(find_laterative_ordering(&complete(2), 2, &CliqueStrategy::default()).is_err());
    }

    #[test]
    fn validator_catches_broken_orderings() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = Configuration::random_gaussian(60, 2, 1.0, &mut rng).unwrap();
        let g = geometric_graph(&c, 1.5).unwrap();
        let ord = find_laterative_ordering(&g, 2, &CliqueStrategy::minimal(2)).unwrap().unwrap();
        assert!(is_laterative_ordering(&g, &ord, 2));

        // drop one landmark edge from the graph
        let k = ord.seed_size;
        let (v, w) = (ord.order[k], ord.landmarks[0][0]);
        let pruned = DissimilarityGraph::new(
            g.node_count(),
            g.edges()
                .iter()
                .filter(|e| (e.i, e.j) != (v.min(w), v.max(w)))
                .map(|e| (e.i, e.j, e.d2)),
        )
        .unwrap();
        assert!(!is_laterative_ordering(&pruned, &ord, 2));

        // seed clique missing an edge
        let (a, b) = (ord.order[0], ord.order[1]);
        let pruned = DissimilarityGraph::new(
            g.node_count(),
            g.edges()
                .iter()
                .filter(|e| (e.i, e.j) != (a.min(b), a.max(b)))
                .map(|e| (e.i, e.j, e.d2)),
        )
        .unwrap();
        assert!(!is_laterative_ordering(&pruned, &ord, 2));

        // malformed: duplicated vertex, short landmark set
        let mut bad = ord.clone();
        bad.order[1] = bad.order[0];
        assert!(!is_laterative_ordering(&g, &bad, 2));
        let mut bad = ord.clone();
        bad.landmarks[0].truncate(2);
        assert!(!is_laterative_ordering(&g, &bad, 2));
        let mut bad = ord;
        bad.seed_size = 2;
        assert!(!is_laterative_ordering(&g, &bad, 2));
    }

    #[test]
    fn greedy_seed_respects_cap() {
        let g = complete(20);
        let ord = find_laterative_ordering(&g, 2, &CliqueStrategy::default()).unwrap().unwrap();
        assert_eq!(ord.seed_size, 9);
    }

    #[test]
    fn clique_enumeration_counts() {
        // K5 has C(5,3) = 10 triangles and 5 four-cliques
        let g = complete(5);
        let mut tri = Vec::new();
        for_each_clique(&g, 3, |c| tri.push(c.to_vec()));
        assert_eq!(tri.len(), 10);
        assert_eq!(tri[0], vec![0, 1, 2]);
        assert!(tri.windows(2).all(|w| w[0] < w[1]));
        let mut four = 0;
        for_each_clique(&g, 4, |_| four += 1);
        assert_eq!(four, 5);
        let mut none = 0;
        for_each_clique(&path(6), 3, |_| none += 1);
        assert_eq!(none, 0);
    }

    #[test]
    fn radius_monotonicity_on_samples() {
        let domain = DomainSpec::new(0.2, 1.0).unwrap();
        for seed in 0..10 {
            let c = sample_domain(&domain, 150, seed).unwrap();
            let mut ok_before = false;
            for r in [0.2, 0.25, 0.3, 0.35, 0.4] {
                let g = geometric_graph(&c, r).unwrap();
                let ok = find_laterative_ordering(&g, 2, &CliqueStrategy::default()).unwrap().is_some();
                assert!(!ok_before || ok, "seed {seed}: lost laterability at r = {r}");
                ok_before = ok;
            }
        }
    }

    #[test]
    fn hollow_square_success_rate() {
        let domain = DomainSpec::new(0.2, 1.0).unwrap();
        let found = (0..100u64)
            .filter(|&seed| {
                let g = geometric_graph(&sample_domain(&domain, 500, seed).unwrap(), 0.3).unwrap();
                find_laterative_ordering(&g, 2, &CliqueStrategy::default()).unwrap().is_some()
            })
            .count();
        // measured 100/100
        assert!(found >= 95, "only {found}/100 draws laterable");
    }
}
