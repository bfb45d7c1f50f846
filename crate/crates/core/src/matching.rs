//! Hopcroft–Karp maximum bipartite matching.
//!
//! Used by the bottleneck computation to test whether a distance threshold
//! admits a perfect matching.

use std::collections::VecDeque;

const INF: usize = usize::MAX;

/// Maximum matching of a bipartite graph given as left-side adjacency lists.
///
/// Returns `mate[u] = Some(v)` for every matched left vertex `u`.
pub fn max_matching(n_left: usize, n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    debug_assert_eq!(adj.len(), n_left);
    let mut left_mate: Vec<Option<usize>> = vec![None; n_left];
    let mut right_mate: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![INF; n_left];

    while bfs(adj, &left_mate, &right_mate, &mut dist) {
        for u in 0..n_left {
            if left_mate[u].is_none() {
                dfs(u, adj, &mut left_mate, &mut right_mate, &mut dist);
            }
        }
    }
    left_mate
}

/// Layers free left vertices at distance 0; returns whether some augmenting
/// path reaches a free right vertex.
fn bfs(
    adj: &[Vec<usize>],
    left_mate: &[Option<usize>],
    right_mate: &[Option<usize>],
    dist: &mut [usize],
) -> bool {
    let mut queue = VecDeque::new();
    for (u, m) in left_mate.iter().enumerate() {
        if m.is_none() {
            dist[u] = 0;
            queue.push_back(u);
        } else {
            dist[u] = INF;
        }
    }
    let mut found = false;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            match right_mate[v] {
                None => found = true,
                Some(w) if dist[w] == INF => {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
                Some(_) => {}
            }
        }
    }
    found
}

fn dfs(
    u: usize,
    adj: &[Vec<usize>],
    left_mate: &mut [Option<usize>],
    right_mate: &mut [Option<usize>],
    dist: &mut [usize],
) -> bool {
    for &v in &adj[u] {
        let advance = match right_mate[v] {
            None => true,
            Some(w) => dist[w] == dist[u].wrapping_add(1) && dfs(w, adj, left_mate, right_mate, dist),
        };
        if advance {
            left_mate[u] = Some(v);
            right_mate[v] = Some(u);
            return true;
        }
    }
    dist[u] = INF;
    false
}

/// True if the square bipartite graph on `n + n` vertices has a perfect matching.
pub fn has_perfect_matching(n: usize, adj: &[Vec<usize>]) -> bool {
    if adj.iter().any(Vec::is_empty) {
        return false;
    }
    max_matching(n, n, adj).iter().all(Option::is_some)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_is_perfect() {
        let adj = vec![vec![0, 1, 2]; 3];
        assert!(has_perfect_matching(3, &adj));
    }

    #[test]
    fn hall_violation_is_detected() {
        // Left vertices 0 and 1 both only see right vertex 0.
        let adj = vec![vec![0], vec![0], vec![1, 2]];
        assert!(!has_perfect_matching(3, &adj));
        let mate = max_matching(3, 3, &adj);
        assert_eq!(mate.iter().filter(|m| m.is_some()).count(), 2);
    }

    #[test]
    fn needs_augmenting_path() {
        // Greedy 0->0 must be undone to match everything.
        let adj = vec![vec![0, 1], vec![0]];
        let mate = max_matching(2, 2, &adj);
        assert_eq!(mate, vec![Some(1), Some(0)]);
    }

    #[test]
    fn brute_force_agreement_on_small_graphs() {
        use itertools::Itertools;
        // Every bipartite graph on 3 + 3 vertices.
        for mask in 0u32..(1 << 9) {
            let adj: Vec<Vec<usize>> = (0..3)
                .map(|i| (0..3).filter(|j| mask & (1 << (i * 3 + j)) != 0).collect())
                .collect();
            let brute = (0..3)
                .permutations(3)
                .any(|p| p.iter().enumerate().all(|(i, &j)| adj[i].contains(&j)));
            assert_eq!(has_perfect_matching(3, &adj), brute, "mask {mask:#b}");
        }
    }
}
