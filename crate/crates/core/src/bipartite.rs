//! Maximum-cardinality bipartite matching (Hopcroft-Karp).
//!
//! Used to count fuzzy interest overlaps so that every interest on either side
//! is paired at most once, independent of iteration order.

use std::collections::VecDeque;

const FREE: usize = usize::MAX;
const INF: u32 = u32::MAX;

/// Size of a maximum matching. `adjacency[u]` lists the right-side vertices
/// (`< n_right`) adjacent to left vertex `u`.
pub fn maximum_matching<A: AsRef<[usize]>>(adjacency: &[A], n_right: usize) -> usize {
    let n_left = adjacency.len();
    if n_left == 0 || n_right == 0 {
        return 0;
    }
    let mut left_match = vec![FREE; n_left];
    let mut right_match = vec![FREE; n_right];
    let mut dist = vec![INF; n_left];
    let mut size = 0;

    // Greedy seed; augmentation fixes any poor early choices.
    for (u, edges) in adjacency.iter().enumerate() {
        if let Some(&v) = edges.as_ref().iter().find(|&&v| right_match[v] == FREE) {
            left_match[u] = v;
            right_match[v] = u;
            size += 1;
        }
    }

    while bfs(adjacency, &left_match, &right_match, &mut dist) {
        for u in 0..n_left {
            if left_match[u] == FREE && dfs(u, adjacency, &mut left_match, &mut right_match, &mut dist) {
                size += 1;
            }
        }
    }
    size
}

fn bfs<A: AsRef<[usize]>>(adjacency: &[A], left_match: &[usize], right_match: &[usize], dist: &mut [u32]) -> bool {
    let mut queue = VecDeque::new();
    for (u, d) in dist.iter_mut().enumerate() {
        if left_match[u] == FREE {
            *d = 0;
            queue.push_back(u);
        } else {
            *d = INF;
        }
    }
    let mut found = false;
    while let Some(u) = queue.pop_front() {
        for &v in adjacency[u].as_ref() {
            match right_match[v] {
                FREE => found = true,
                w if dist[w] == INF => {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
                _ => {}
            }
        }
    }
    found
}

fn dfs<A: AsRef<[usize]>>(
    u: usize,
    adjacency: &[A],
    left_match: &mut [usize],
    right_match: &mut [usize],
    dist: &mut [u32],
) -> bool {
    for &v in adjacency[u].as_ref() {
        let w = right_match[v];
        let advance = w == FREE
            || (dist[w] == dist[u] + 1 && dfs(w, adjacency, left_match, right_match, dist));
        if advance {
            left_match[u] = v;
            right_match[v] = u;
            return true;
        }
    }
    dist[u] = INF;
    false
}
