//! Laplacian, carré du champ, iterated carré du champ and the discrete Hessian.
//!
//! Every operator reads `f` on a bounded neighborhood only: `Delta` and `Gamma`
//! on `B(x,1)`, `Gamma_2` and `|D^2 f|^2` on `B(x,2)`.

mod cayley;
mod local;

use crate::error::OperatorError;
use crate::graph::WeightedGraph;
use crate::scalar::{sup_norm, Scalar};

pub use cayley::{cayley_partials, CayleyPartials};
pub use local::{local_forms, LocalFormBundle};

/// A function on the vertices, indexed like the graph.
pub type VertexFunction<T> = Vec<T>;

pub(crate) fn check_len<T: Scalar>(g: &WeightedGraph<T>, f: &[T]) -> Result<(), OperatorError> {
    if f.len() != g.len() {
        return Err(OperatorError::LengthMismatch {
            expected: g.len(),
            got: f.len(),
        });
    }
    Ok(())
}

/// `max(1, ||f||_inf^2)`, the scale for tolerances on quadratic quantities.
pub fn quadratic_scale<T: Scalar>(f: &[T]) -> T {
    let s = sup_norm(f);
    T::one().max(s * s)
}

/// `Delta f(x) = sum_y p(x,y) (f(y) - f(x))`.
#[inline]
pub fn laplacian_at<T: Scalar>(g: &WeightedGraph<T>, f: &[T], x: usize) -> T {
    let fx = f[x];
    g.neighbors(x).map(|(y, p)| p * (f[y] - fx)).sum()
}

/// `Gamma(f,h)(x) = 1/2 sum_y p(x,y) (f(x) - f(y)) (h(x) - h(y))`.
#[inline]
pub fn gamma_at<T: Scalar>(g: &WeightedGraph<T>, f: &[T], h: &[T], x: usize) -> T {
    let (fx, hx) = (f[x], h[x]);
    T::half() * g.neighbors(x).map(|(y, p)| p * (fx - f[y]) * (hx - h[y])).sum::<T>()
}

#[inline]
pub fn gamma_sq_at<T: Scalar>(g: &WeightedGraph<T>, f: &[T], x: usize) -> T {
    let fx = f[x];
    T::half()
        * g.neighbors(x)
            .map(|(y, p)| {
                let d = fx - f[y];
                p * d * d
            })
            .sum::<T>()
}

/// `Gamma_2 f(x) = 1/2 Delta(Gamma f)(x) - Gamma(f, Delta f)(x)`, evaluated from `B(x,2)` alone.
pub fn gamma2_at<T: Scalar>(g: &WeightedGraph<T>, f: &[T], x: usize) -> T {
    let gx = gamma_sq_at(g, f, x);
    let lx = laplacian_at(g, f, x);
    let fx = f[x];
    let mut acc = T::zero();
    for (y, p) in g.neighbors(x) {
        if y == x {
            continue;
        }
        let gy = gamma_sq_at(g, f, y);
        let ly = laplacian_at(g, f, y);
        acc += p * ((gy - gx) - (fx - f[y]) * (lx - ly));
    }
    T::half() * acc
}

/// `|D^2 f|^2(x) = sum_y p(x,y) sum_z p(y,z) (f(x) - 2 f(y) + f(z))^2`.
pub fn hessian_norm_sq_at<T: Scalar>(g: &WeightedGraph<T>, f: &[T], x: usize) -> T {
    let fx = f[x];
    let mut acc = T::zero();
    for (y, pxy) in g.neighbors(x) {
        let c = fx - T::two() * f[y];
        let inner: T = g
            .neighbors(y)
            .map(|(z, pyz)| {
                let d = c + f[z];
                pyz * d * d
            })
            .sum();
        acc += pxy * inner;
    }
    acc
}

fn pointwise<T: Scalar>(
    g: &WeightedGraph<T>,
    f: &[T],
    op: impl Fn(&WeightedGraph<T>, &[T], usize) -> T,
) -> Result<VertexFunction<T>, OperatorError> {
    check_len(g, f)?;
    Ok((0..g.len()).map(|x| op(g, f, x)).collect())
}

pub fn laplacian<T: Scalar>(g: &WeightedGraph<T>, f: &[T]) -> Result<VertexFunction<T>, OperatorError> {
    pointwise(g, f, laplacian_at)
}

pub fn gamma<T: Scalar>(g: &WeightedGraph<T>, f: &[T], h: &[T]) -> Result<VertexFunction<T>, OperatorError> {
    check_len(g, h)?;
    pointwise(g, f, |g, f, x| gamma_at(g, f, h, x))
}

pub fn gamma_sq<T: Scalar>(g: &WeightedGraph<T>, f: &[T]) -> Result<VertexFunction<T>, OperatorError> {
    pointwise(g, f, gamma_sq_at)
}

pub fn gamma2<T: Scalar>(g: &WeightedGraph<T>, f: &[T]) -> Result<VertexFunction<T>, OperatorError> {
    check_len(g, f)?;
    let gf = gamma_sq(g, f)?;
    let lf = laplacian(g, f)?;
    let half = T::half();
    Ok((0..g.len())
        .map(|x| {
            let d_gamma = laplacian_at(g, &gf, x);
            half * d_gamma - gamma_at(g, f, &lf, x)
        })
        .collect())
}

pub fn hessian_norm_sq<T: Scalar>(g: &WeightedGraph<T>, f: &[T]) -> Result<VertexFunction<T>, OperatorError> {
    pointwise(g, f, hessian_norm_sq_at)
}

/// `Gamma_2 f - (1/4 |D^2 f|^2 - Gamma f + 1/2 (Delta f)^2)` on markov graphs.
///
/// For kernels whose rows do not sum to one the identity picks up the row
/// sums `m(x) = sum_y p(x,y)`:
/// `Gamma_2 f = 1/4 |D^2 f|^2 - 1/4 sum_y p(x,y) m(y) (f(y)-f(x))^2 - m(x)/2 Gamma f + 1/2 (Delta f)^2`,
/// which reduces to the markov form when `m = 1`. The residual uses this form.
pub fn bochner_residual<T: Scalar>(g: &WeightedGraph<T>, f: &[T]) -> Result<VertexFunction<T>, OperatorError> {
    check_len(g, f)?;
    let g2 = gamma2(g, f)?;
    let quarter = T::lit(0.25);
    let row: Vec<T> = (0..g.len()).map(|x| g.row_sum(x)).collect();
    Ok((0..g.len())
        .map(|x| {
            let h = hessian_norm_sq_at(g, f, x);
            let gx = gamma_sq_at(g, f, x);
            let lx = laplacian_at(g, f, x);
            let drift: T = g
                .neighbors(x)
                .map(|(y, p)| {
                    let d = f[y] - f[x];
                    p * row[y] * d * d
                })
                .sum();
            g2[x] - (quarter * h - quarter * drift - T::half() * row[x] * gx + T::half() * lx * lx)
        })
        .collect())
}

/// `sqrt(f) Delta(sqrt f) - (1/2 Delta f - Gamma(sqrt f))` for `f > 0`.
pub fn sqrt_identity_residual<T: Scalar>(g: &WeightedGraph<T>, f: &[T]) -> Result<VertexFunction<T>, OperatorError> {
    check_len(g, f)?;
    if f.iter().any(|&v| !(v > T::zero())) {
        return Err(OperatorError::NonPositive);
    }
    let r: Vec<T> = f.iter().map(|v| v.sqrt()).collect();
    Ok((0..g.len())
        .map(|x| r[x] * laplacian_at(g, &r, x) - (T::half() * laplacian_at(g, f, x) - gamma_sq_at(g, &r, x)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_graph, generate_cayley, two_vertex, GroupSpec, LaplacianMode};

    #[test]
    fn two_vertex_values() {
        let g = two_vertex::<f64>();
        let f = [0.0, 1.0];
        assert_eq!(laplacian(&g, &f).unwrap(), vec![1.0, -1.0]);
        assert_eq!(gamma_sq(&g, &f).unwrap(), vec![0.5, 0.5]);
        assert_eq!(gamma2(&g, &f).unwrap(), vec![1.0, 1.0]);
        assert_eq!(hessian_norm_sq(&g, &f).unwrap(), vec![4.0, 4.0]);
        assert_eq!(bochner_residual(&g, &f).unwrap(), vec![0.0, 0.0]);
        assert_eq!(gamma2_at(&g, &f, 0), 1.0);
    }

    #[test]
    fn constants_are_null() {
        let g = cycle_graph::<f64>(5);
        let c = vec![3.5; 5];
        let h: Vec<f64> = (0..5).map(|i| i as f64).collect();
        assert!(laplacian(&g, &c).unwrap().iter().all(|&v| v == 0.0));
        assert!(gamma(&g, &c, &h).unwrap().iter().all(|&v| v == 0.0));
        assert!(gamma2(&g, &c).unwrap().iter().all(|&v| v == 0.0));
        assert!(hessian_norm_sq(&g, &c).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cycle_indicator() {
        let g = cycle_graph::<f64>(5);
        let mut f = vec![0.0; 5];
        f[0] = 1.0;
        assert_eq!(laplacian(&g, &f).unwrap(), vec![-1.0, 0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn lattice_linear_hessian() {
        let g = generate_cayley::<f64>(GroupSpec::integer_lattice(1), Some(6), LaplacianMode::Markov).unwrap();
        let f: Vec<f64> = g.labels().iter().map(|l| l.trim_matches(|c| c == '(' || c == ')').parse().unwrap()).collect();
        let h = hessian_norm_sq(&g, &f).unwrap();
        let x = g.index_of("(0)").unwrap();
        assert!((h[x] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let g = two_vertex::<f64>();
        assert!(matches!(laplacian(&g, &[1.0]), Err(OperatorError::LengthMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn sqrt_identity_rejects_zero() {
        let g = two_vertex::<f64>();
        assert_eq!(sqrt_identity_residual(&g, &[0.0, 1.0]).unwrap_err(), OperatorError::NonPositive);
        let r = sqrt_identity_residual(&g, &[2.0, 1.0]).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-15));
    }
}
