//! Small named graphs and random generators used throughout the tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_from_conductance_ids, KernelBuilder, LaplacianMode, WeightedGraph};
use crate::error::GraphError;
use crate::scalar::Scalar;

/// Two vertices joined by an edge, `p = 1`, `mu = 1`.
pub fn two_vertex<T: Scalar>() -> WeightedGraph<T> {
    let mut b = KernelBuilder::new();
    b.vertex("a", T::one()).expect("fresh label");
    b.vertex("b", T::one()).expect("fresh label");
    b.edge_ids(0, 1, T::one(), T::one()).expect("positive weights");
    b.build(LaplacianMode::Markov).expect("two-vertex graph is valid")
}

/// `a - b - c` with `p(b,.) = 1/2`, `p(a,b) = p(c,b) = 1`, `mu = (1, 2, 1)`.
pub fn path_graph_example<T: Scalar>() -> WeightedGraph<T> {
    let mut b = KernelBuilder::new();
    for (l, m) in [("a", 1.0), ("b", 2.0), ("c", 1.0)] {
        b.vertex(l, T::lit(m)).expect("fresh label");
    }
    b.edge_ids(0, 1, T::one(), T::half()).expect("positive weights");
    b.edge_ids(1, 2, T::half(), T::one()).expect("positive weights");
    b.build(LaplacianMode::Markov).expect("path example is valid")
}

fn unit_conductance<T: Scalar>(n: usize, edges: Vec<(usize, usize)>) -> WeightedGraph<T> {
    let labels = (0..n).map(|i| i.to_string()).collect();
    let edges: Vec<_> = edges.into_iter().map(|(x, y)| (x, y, T::one())).collect();
    build_from_conductance_ids(labels, &edges).expect("unit conductance graph is valid")
}

/// `n`-cycle with unit conductances (`n >= 3`).
pub fn cycle_graph<T: Scalar>(n: usize) -> WeightedGraph<T> {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    unit_conductance(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
}

/// Complete graph `K_n` with unit conductances (`n >= 2`).
pub fn complete_graph<T: Scalar>(n: usize) -> WeightedGraph<T> {
    assert!(n >= 2, "complete graph needs at least 2 vertices");
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    unit_conductance(n, edges)
}

/// Star with center `0` and `leaves` leaves.
pub fn star_graph<T: Scalar>(leaves: usize) -> WeightedGraph<T> {
    assert!(leaves >= 1);
    unit_conductance(leaves + 1, (1..=leaves).map(|i| (0, i)).collect())
}

#[derive(Debug, Clone, Copy)]
pub struct RandomConductanceParams {
    pub min_vertices: usize,
    pub max_vertices: usize,
    /// Extra edges beyond the spanning tree, as a fraction of the vertex count.
    pub extra_edge_ratio: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl Default for RandomConductanceParams {
    fn default() -> Self {
        Self {
            min_vertices: 8,
            max_vertices: 60,
            extra_edge_ratio: 0.5,
            omega_min: 0.5,
            omega_max: 2.0,
        }
    }
}

/// Random connected conductance graph: a random recursive tree plus extra chords.
pub fn random_conductance_graph<T: Scalar>(seed: u64, params: RandomConductanceParams) -> WeightedGraph<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(params.min_vertices.max(2)..=params.max_vertices.max(params.min_vertices.max(2)));
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    let extra = (params.extra_edge_ratio * n as f64).round() as usize;
    let mut attempts = 0;
    while edges.len() < n - 1 + extra && attempts < 100 * (extra + 1) {
        attempts += 1;
        let x = rng.random_range(0..n);
        let y = rng.random_range(0..n);
        let (a, b) = (x.min(y), x.max(y));
        if a != b && !edges.iter().any(|&(p, q)| (p.min(q), p.max(q)) == (a, b)) {
            edges.push((a, b));
        }
    }
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    let weighted: Vec<_> = edges
        .into_iter()
        .map(|(x, y)| (x, y, T::lit(rng.random_range(params.omega_min..=params.omega_max))))
        .collect();
    build_from_conductance_ids(labels, &weighted).expect("random conductance graph is connected")
}

/// The integer line with `omega_{i,i+1} = 1/(|i| |i+1|)` away from the origin,
/// `omega_{0,+-1} = 1`, `mu(i) = i^-4`, `mu(0) = 1`, truncated to `|i| <= radius`.
///
/// The kernel is `p(i,j) = omega_ij / mu(i)`; rows do not sum to one, so the
/// graph is built in unnormalized mode.
pub fn z_non_h2_example<T: Scalar>(radius: usize) -> Result<WeightedGraph<T>, GraphError> {
    if radius == 0 {
        return Err(GraphError::Empty);
    }
    let r = radius as i64;
    let mu = |i: i64| -> T {
        if i == 0 {
            T::one()
        } else {
            T::one() / T::lit((i as f64).powi(4))
        }
    };
    let omega = |i: i64, j: i64| -> T {
        let (a, b) = (i.abs().min(j.abs()), i.abs().max(j.abs()));
        if a == 0 {
            T::one()
        } else {
            T::one() / T::lit((a * b) as f64)
        }
    };
    let mut b = KernelBuilder::new();
    let ids: Vec<i64> = (-r..=r).collect();
    for &i in &ids {
        b.vertex(i.to_string(), mu(i))?;
    }
    for &i in &ids[..ids.len() - 1] {
        let j = i + 1;
        let w = omega(i, j);
        b.edge_ids((i + r) as usize, (j + r) as usize, w / mu(i), w / mu(j))?;
    }
    b.build(LaplacianMode::Unnormalized)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_graphs_are_valid() {
        for seed in 0..20 {
            let g = random_conductance_graph::<f64>(seed, RandomConductanceParams::default());
            assert!((8..=60).contains(&g.len()));
            let r = g.validate();
            assert!(r.connected && r.valence_bound_ok && r.measure_ratio_ok);
            assert!(r.markov_residual_max < 1e-12);
        }
    }

    #[test]
    fn random_graphs_are_reproducible() {
        let a = random_conductance_graph::<f64>(7, RandomConductanceParams::default());
        let b = random_conductance_graph::<f64>(7, RandomConductanceParams::default());
        assert_eq!(a.measure(), b.measure());
    }

    #[test]
    fn z_example_geometry() {
        let g = z_non_h2_example::<f64>(20).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g.alpha(), 0.5);
        let r = g.validate();
        assert!(r.reversibility_residual_max < 1e-12);
        let g10 = z_non_h2_example::<f64>(10).unwrap();
        assert!(r.d_mu_sup > 3.0 * g10.validate().d_mu_sup);
    }

    #[test]
    fn small_families() {
        assert_eq!(complete_graph::<f64>(4).alpha(), 1.0 / 3.0);
        assert_eq!(star_graph::<f64>(3).len(), 4);
        assert_eq!(path_graph_example::<f64>().alpha(), 0.5);
    }
}
