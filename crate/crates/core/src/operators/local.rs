//! Local quadratic forms of `Gamma`, `Gamma_2` and `Delta` at a vertex.

use std::collections::HashMap;

use crate::graph::{ball, WeightedGraph};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Forms over `B(x,2) \ {x}` in the gauge `f(x) = 0`.
#[derive(Debug, Clone)]
pub struct LocalFormBundle<T> {
    pub center: usize,
    /// Graph indices of the coordinates, ordered by distance from the center.
    pub support: Vec<usize>,
    /// `f^T q_gamma f = Gamma f(x)`.
    pub q_gamma: Matrix<T>,
    /// `f^T q_gamma2 f = Gamma_2 f(x)`.
    pub q_gamma2: Matrix<T>,
    /// `d_vec . f = Delta f(x)`.
    pub d_vec: Vec<T>,
}

impl<T: Scalar> LocalFormBundle<T> {
    pub fn dim(&self) -> usize {
        self.support.len()
    }

    /// Restricts a global function to the support after subtracting `f(x)`.
    pub fn gauge(&self, f: &[T]) -> Vec<T> {
        let fx = f[self.center];
        self.support.iter().map(|&y| f[y] - fx).collect()
    }

    /// Extends local coordinates to a global function vanishing off the support.
    pub fn extend(&self, v: &[T], n: usize) -> Vec<T> {
        let mut f = vec![T::zero(); n];
        for (&y, &val) in self.support.iter().zip(v) {
            f[y] = val;
        }
        f
    }
}

/// Assembles the forms symbolically from kernel weights by expanding
/// `2 Gamma_2 = Delta Gamma - 2 Gamma(., Delta .)` termwise.
pub fn local_forms<T: Scalar>(g: &WeightedGraph<T>, x: usize) -> LocalFormBundle<T> {
    let full = ball(g, x, 2);
    let pos: HashMap<usize, usize> = full.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = full.len();
    let quarter = T::lit(0.25);
    let half = T::half();
    // the self-loop term of Delta(Gamma f)(x) vanishes, so it is left out of both halves
    let mx: T = g.neighbors(x).filter(|&(y, _)| y != x).map(|(_, p)| p).sum();

    let mut qg = Matrix::zeros(n);
    let mut q2 = Matrix::zeros(n);
    let mut d = vec![T::zero(); n];
    let cx = pos[&x];

    // Delta functional at any vertex of B(x,1), expressed in ball coordinates.
    let delta_at = |v: usize| -> Vec<T> {
        let mut l = vec![T::zero(); n];
        let cv = pos[&v];
        for (z, p) in g.neighbors(v) {
            l[pos[&z]] += p;
            l[cv] -= p;
        }
        l
    };
    let delta_x = delta_at(x);

    for (y, pxy) in g.neighbors(x) {
        let cy = pos[&y];
        d[cy] += pxy;
        d[cx] -= pxy;
        qg.add_sq_diff(half * pxy, cx, cy);
        if y == x {
            continue;
        }
        // 1/2 Delta(Gamma f)(x) = 1/4 sum_y p(x,y) sum_z p(y,z)(f(z)-f(y))^2 - 1/2 m(x) Gamma f(x)
        for (z, pyz) in g.neighbors(y) {
            q2.add_sq_diff(quarter * pxy * pyz, cy, pos[&z]);
        }
        q2.add_sq_diff(-quarter * mx * pxy, cx, cy);
        // - Gamma(f, Delta f)(x) = -1/2 sum_y p(x,y) (f(y)-f(x)) (Delta f(y) - Delta f(x))
        let mut ell = vec![T::zero(); n];
        ell[cy] += T::one();
        ell[cx] -= T::one();
        let big_l: Vec<T> = delta_at(y).iter().zip(&delta_x).map(|(&a, &b)| a - b).collect();
        q2.add_outer(-quarter * pxy, &ell, &big_l);
        q2.add_outer(-quarter * pxy, &big_l, &ell);
    }
    q2.symmetrize();

    let keep: Vec<usize> = (0..n).filter(|&i| i != cx).collect();
    LocalFormBundle {
        center: x,
        support: keep.iter().map(|&i| full[i]).collect(),
        q_gamma: qg.submatrix(&keep),
        q_gamma2: q2.submatrix(&keep),
        d_vec: keep.iter().map(|&i| d[i]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_conductance_graph, star_graph, two_vertex, RandomConductanceParams};
    use crate::operators::{gamma2_at, gamma_sq_at, laplacian_at};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_vertex_bundle() {
        let b = local_forms(&two_vertex::<f64>(), 0);
        assert_eq!(b.support, vec![1]);
        assert_eq!(b.q_gamma[(0, 0)], 0.5);
        assert_eq!(b.q_gamma2[(0, 0)], 1.0);
        assert_eq!(b.d_vec, vec![1.0]);
    }

    #[test]
    fn star_center_gamma_is_scaled_identity() {
        let k = 4;
        let g = star_graph::<f64>(k);
        let b = local_forms(&g, 0);
        assert_eq!(b.dim(), k);
        for i in 0..k {
            for j in 0..k {
                let expect = if i == j { 0.5 / k as f64 } else { 0.0 };
                assert!((b.q_gamma[(i, j)] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn forms_match_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..5 {
            let g = random_conductance_graph::<f64>(seed, RandomConductanceParams::default());
            for x in [0, g.len() / 2, g.len() - 1] {
                let b = local_forms(&g, x);
                for _ in 0..20 {
                    let f: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
                    let v = b.gauge(&f);
                    assert!((b.q_gamma.quad_form(&v) - gamma_sq_at(&g, &f, x)).abs() < 1e-12 * 4.0);
                    assert!((b.q_gamma2.quad_form(&v) - gamma2_at(&g, &f, x)).abs() < 1e-12 * 4.0);
                    let dv: f64 = b.d_vec.iter().zip(&v).map(|(a, b)| a * b).sum();
                    assert!((dv - laplacian_at(&g, &f, x)).abs() < 1e-12 * 4.0);
                }
            }
        }
    }
}
