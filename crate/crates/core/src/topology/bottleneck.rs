use std::collections::VecDeque;

use super::{Bar, PersistenceDiagram};

const FREE: usize = usize::MAX;

/// Maximum bipartite matching size. `adj[u]` lists the right-hand vertices
/// adjacent to left vertex `u`; right vertices are `0..n_right`.
pub fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> usize {
    let n_left = adj.len();
    let mut match_left = vec![FREE; n_left];
    let mut match_right = vec![FREE; n_right];
    let mut dist = vec![0usize; n_left];
    let mut matched = 0;

    loop {
        // BFS layers from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if match_left[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_right[v];
                if w == FREE {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut next_edge = vec![0usize; n_left];
        for u in 0..n_left {
            if match_left[u] == FREE
                && augment(u, adj, &mut match_left, &mut match_right, &mut dist, &mut next_edge)
            {
                matched += 1;
            }
        }
    }
    matched
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_left: &mut [usize],
    match_right: &mut [usize],
    dist: &mut [usize],
    next_edge: &mut [usize],
) -> bool {
    while next_edge[u] < adj[u].len() {
        let v = adj[u][next_edge[u]];
        next_edge[u] += 1;
        let w = match_right[v];
        let ok = w == FREE
            || (dist[w] == dist[u] + 1 && augment(w, adj, match_left, match_right, dist, next_edge));
        if ok {
            match_left[u] = v;
            match_right[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

fn linf(a: &Bar, b: &Bar) -> f64 {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

fn half_persistence(a: &Bar) -> f64 {
    (a.death - a.birth) / 2.0
}

/// Whether a perfect matching of cost `<= r` exists between the finite bars,
/// with each side allowed to match the diagonal.
fn feasible(a: &[Bar], b: &[Bar], r: f64) -> bool {
    let (n, m) = (a.len(), b.len());
    // left: a_0..a_n, diag(b_0)..diag(b_m); right: b_0..b_m, diag(a_0)..diag(a_n)
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + m];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            if linf(ai, bj) <= r {
                adj[i].push(j);
            }
        }
        if half_persistence(ai) <= r {
            adj[i].push(m + i);
        }
    }
    for (j, bj) in b.iter().enumerate() {
        if half_persistence(bj) <= r {
            adj[n + j].push(j);
        }
        adj[n + j].extend(m..m + n);
    }
    hopcroft_karp(&adj, n + m) == n + m
}

/// Exact bottleneck distance between the dimension-`dim` parts of two
/// diagrams.
///
/// Essential bars can only be matched to each other, so differing counts
/// give `+inf`; otherwise they are paired in birth order. Finite bars are
/// handled by a binary search over every candidate cost (pairwise
/// ℓ∞ distances and half-persistences) with a Hopcroft–Karp feasibility test.
pub fn bottleneck_distance(d1: &PersistenceDiagram, d2: &PersistenceDiagram, dim: u8) -> f64 {
    let split = |d: &PersistenceDiagram| -> (Vec<Bar>, Vec<f64>) {
        let finite = d.in_dim(dim).filter(|b| !b.is_infinite()).copied().collect();
        let mut births: Vec<f64> = d.in_dim(dim).filter(|b| b.is_infinite()).map(|b| b.birth).collect();
        births.sort_by(f64::total_cmp);
        (finite, births)
    };
    let (a, inf_a) = split(d1);
    let (b, inf_b) = split(d2);
    if inf_a.len() != inf_b.len() {
        return f64::INFINITY;
    }
    let essential = inf_a
        .iter()
        .zip(&inf_b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);

    let mut candidates: Vec<f64> = vec![0.0];
    candidates.extend(a.iter().chain(&b).map(half_persistence));
    for ai in &a {
        candidates.extend(b.iter().map(|bj| linf(ai, bj)));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(&a, &b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    essential.max(candidates[lo])
}
