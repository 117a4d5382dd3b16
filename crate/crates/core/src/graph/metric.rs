//! Combinatorial distance on the support graph `p(x,y) > 0`.

use std::collections::VecDeque;

use super::WeightedGraph;
use crate::error::GraphError;
use crate::scalar::Scalar;

/// Hop distances from `src`; `None` for unreachable vertices.
pub fn bfs_distances<T: Scalar>(g: &WeightedGraph<T>, src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.len()];
    let mut queue = VecDeque::new();
    dist[src] = Some(0);
    queue.push_back(src);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap_or(0);
        for (y, _) in g.neighbors(x) {
            if dist[y].is_none() {
                dist[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

pub fn distance<T: Scalar>(g: &WeightedGraph<T>, x: usize, y: usize) -> Result<usize, GraphError> {
    bfs_distances(g, x)[y].ok_or(GraphError::Unreachable)
}

/// Vertices within distance `r` of `x`, ordered by distance then index.
pub fn ball<T: Scalar>(g: &WeightedGraph<T>, x: usize, r: usize) -> Vec<usize> {
    let dist = bfs_distances(g, x);
    let mut out: Vec<(usize, usize)> = dist
        .iter()
        .enumerate()
        .filter_map(|(v, d)| d.filter(|&d| d <= r).map(|d| (d, v)))
        .collect();
    out.sort_unstable();
    out.into_iter().map(|(_, v)| v).collect()
}

/// `V(x, r) = sum of mu over the closed ball`.
pub fn volume<T: Scalar>(g: &WeightedGraph<T>, x: usize, r: usize) -> T {
    ball(g, x, r).into_iter().map(|v| g.mu(v)).sum()
}

pub fn diameter<T: Scalar>(g: &WeightedGraph<T>) -> usize {
    (0..g.len())
        .map(|x| bfs_distances(g, x).into_iter().flatten().max().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cycle_graph;

    #[test]
    fn cycle_distances() {
        let g = cycle_graph::<f64>(6);
        assert_eq!(distance(&g, 0, 3).unwrap(), 3);
        assert_eq!(distance(&g, 0, 5).unwrap(), 1);
        assert_eq!(diameter(&g), 3);
        assert_eq!(ball(&g, 0, 1).len(), 3);
        assert_eq!(ball(&g, 0, 1)[0], 0);
        assert!((volume(&g, 0, 3) - 12.0).abs() < 1e-12);
    }
}
