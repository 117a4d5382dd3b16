//! Partial differences along Cayley generators.

use crate::error::OperatorError;
use crate::graph::{LaplacianMode, WeightedGraph};
use crate::scalar::Scalar;

/// Generator decomposition of `Gamma_2 f(x)` on a Cayley graph with unit weights.
#[derive(Debug, Clone)]
pub struct CayleyPartials<T> {
    /// `d_i f(x) = f(x s_i) - f(x)`.
    pub first: Vec<T>,
    /// `second[i * k + j] = d_i d_j f(x) = f(x s_i s_j) - f(x s_i) - f(x s_j) + f(x)`.
    pub second: Vec<T>,
    /// `1/4 sum_ij (d_i d_j f)^2`.
    pub hessian_part: T,
    /// `1/2 sum_ij d_j f (d_i d_j f - d_j d_i f)`.
    pub ricci_part: T,
}

impl<T: Scalar> CayleyPartials<T> {
    pub fn gamma2(&self) -> T {
        self.hessian_part + self.ricci_part
    }
}

pub fn cayley_partials<T: Scalar>(
    g: &WeightedGraph<T>,
    f: &[T],
    x: usize,
) -> Result<CayleyPartials<T>, OperatorError> {
    super::check_len(g, f)?;
    let table = g.cayley().ok_or(OperatorError::NotCayley)?;
    if g.mode() != LaplacianMode::Unnormalized {
        return Err(OperatorError::RequiresUnnormalized);
    }
    let k = table.num_generators();
    let step = |v: usize, i: usize| table.translate(v, i).ok_or(OperatorError::LeftTruncation { vertex: v });
    let fx = f[x];
    let mut xs = Vec::with_capacity(k);
    for i in 0..k {
        xs.push(step(x, i)?);
    }
    let first: Vec<T> = xs.iter().map(|&y| f[y] - fx).collect();
    let mut second = vec![T::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            let xij = step(xs[i], j)?;
            // grouped so that d_i d_j and d_j d_i round identically when x s_i s_j = x s_j s_i
            second[i * k + j] = (f[xij] + fx) - (f[xs[i]] + f[xs[j]]);
        }
    }
    let mut hessian_part = T::zero();
    let mut ricci_part = T::zero();
    for i in 0..k {
        for j in 0..k {
            let dij = second[i * k + j];
            hessian_part += dij * dij;
            ricci_part += first[j] * (dij - second[j * k + i]);
        }
    }
    Ok(CayleyPartials {
        first,
        second,
        hessian_part: T::lit(0.25) * hessian_part,
        ricci_part: T::half() * ricci_part,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_cayley, GroupSpec};
    use crate::operators::gamma2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_f(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn decomposition_matches_gamma2() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in [GroupSpec::torus(2, 5), GroupSpec::symmetric(3), GroupSpec::symmetric(4)] {
            let g = generate_cayley::<f64>(spec, None, LaplacianMode::Unnormalized).unwrap();
            for _ in 0..10 {
                let f = random_f(g.len(), &mut rng);
                let g2 = gamma2(&g, &f).unwrap();
                for x in 0..g.len() {
                    let cp = cayley_partials(&g, &f, x).unwrap();
                    assert!((cp.gamma2() - g2[x]).abs() < 1e-10, "{} vs {}", cp.gamma2(), g2[x]);
                }
            }
        }
    }

    #[test]
    fn abelian_ricci_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = generate_cayley::<f64>(GroupSpec::torus(2, 6), None, LaplacianMode::Unnormalized).unwrap();
        let f = random_f(g.len(), &mut rng);
        for x in 0..g.len() {
            assert_eq!(cayley_partials(&g, &f, x).unwrap().ricci_part, 0.0);
        }
    }

    #[test]
    fn markov_mode_rejected() {
        let g = generate_cayley::<f64>(GroupSpec::cyclic(5), None, LaplacianMode::Markov).unwrap();
        let f = vec![0.0; 5];
        assert_eq!(cayley_partials(&g, &f, 0).unwrap_err(), OperatorError::RequiresUnnormalized);
    }

    #[test]
    fn truncation_edge() {
        let g = generate_cayley::<f64>(GroupSpec::integer_lattice(1), Some(3), LaplacianMode::Unnormalized).unwrap();
        let f = vec![0.0; g.len()];
        let edge = g.index_of("(3)").unwrap();
        assert!(matches!(cayley_partials(&g, &f, edge), Err(OperatorError::LeftTruncation { .. })));
        assert!(cayley_partials(&g, &f, g.index_of("(1)").unwrap()).is_ok());
    }
}
