#![allow(dead_code)]

use curvlab::graph::{random_conductance_graph, RandomConductanceParams, WeightedGraph};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// The random conductance corpus shared by the acceptance suite.
pub fn corpus_graph(seed: u64) -> WeightedGraph<f64> {
    random_conductance_graph(seed, RandomConductanceParams::default())
}

/// Smaller graphs for property tests.
pub fn small_graph(seed: u64) -> WeightedGraph<f64> {
    random_conductance_graph(
        seed,
        RandomConductanceParams {
            min_vertices: 3,
            max_vertices: 14,
            ..RandomConductanceParams::default()
        },
    )
}

/// Generator `L = P - diag(row sums)` as a dense matrix.
pub fn generator(g: &WeightedGraph<f64>) -> DMatrix<f64> {
    let n = g.len();
    let mut l = DMatrix::zeros(n, n);
    for x in 0..n {
        for (y, p) in g.neighbors(x) {
            l[(x, y)] += p;
            l[(x, x)] -= p;
        }
    }
    l
}

/// `e^{tL}` through the spectral decomposition of `mu^{1/2} L mu^{-1/2}`,
/// which is symmetric for reversible kernels.
pub struct SpectralSemigroup {
    sqrt_mu: Vec<f64>,
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
}

impl SpectralSemigroup {
    pub fn new(g: &WeightedGraph<f64>) -> Self {
        let l = generator(g);
        let n = g.len();
        let sqrt_mu: Vec<f64> = g.measure().iter().map(|m| m.sqrt()).collect();
        let mut s = DMatrix::zeros(n, n);
        for x in 0..n {
            for y in 0..n {
                s[(x, y)] = sqrt_mu[x] * l[(x, y)] / sqrt_mu[y];
            }
        }
        let s = (&s + s.transpose()) * 0.5;
        Self {
            sqrt_mu,
            eig: SymmetricEigen::new(s),
        }
    }

    pub fn apply(&self, t: f64, f: &[f64]) -> Vec<f64> {
        let v = DVector::from_iterator(f.len(), f.iter().zip(&self.sqrt_mu).map(|(a, s)| a * s));
        let q = &self.eig.eigenvectors;
        let mut c = q.transpose() * v;
        for (ci, lam) in c.iter_mut().zip(self.eig.eigenvalues.iter()) {
            *ci *= (t * lam).exp();
        }
        let w = q * c;
        w.iter().zip(&self.sqrt_mu).map(|(a, s)| a / s).collect()
    }
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn sup(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Number of points of `Z^2` with `|a| + |b| <= r`, by direct enumeration.
pub fn l1_ball_count(r: i64) -> usize {
    (-r..=r).flat_map(|a| (-r..=r).map(move |b| (a, b))).filter(|(a, b)| a.abs() + b.abs() <= r).count()
}
