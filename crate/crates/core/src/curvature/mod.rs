//! Curvature-dimension conditions `CD(K, n)` as local eigenvalue problems.
//!
//! At each vertex `x`, `CD(K, n)` holds iff
//! `M = Q_gamma2 - (1/n) d d^T - K Q_gamma` is positive semidefinite on `B(x,2)`.

mod oracle;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::CurvatureError;
use crate::graph::{diameter, LaplacianMode, WeightedGraph};
use crate::linalg::{pseudo_inverse, symmetric_eigen, Matrix};
use crate::operators::{local_forms, LocalFormBundle};
use crate::report::{extended_real, extended_reals};
use crate::scalar::Scalar;
use crate::tolerance::{NULL_REL, PSD_REL};

pub use oracle::{brute_force_cd, cross_check, BruteForceResult, OracleComparison};

/// Which vertices a query covers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum VertexScope {
    #[default]
    All,
    List(Vec<usize>),
}

impl VertexScope {
    pub fn vertices(&self, n: usize) -> Result<Vec<usize>, CurvatureError> {
        match self {
            VertexScope::All => Ok((0..n).collect()),
            VertexScope::List(v) => match v.iter().find(|&&x| x >= n) {
                Some(&x) => Err(CurvatureError::BadVertex(x)),
                None => Ok(v.clone()),
            },
        }
    }
}

/// `n >= 1`, or `+inf`.
pub fn check_dimension<T: Scalar>(n: T) -> Result<(), CurvatureError> {
    if n.is_nan() || n < T::one() {
        return Err(CurvatureError::BadDimension(n.to_f64_lossy()));
    }
    Ok(())
}

fn is_integer_dimension<T: Scalar>(n: T) -> bool {
    n.is_infinite() || n.fract() == T::zero()
}

/// `Q_gamma2 - (1/n) d d^T`.
fn dimension_adjusted<T: Scalar>(b: &LocalFormBundle<T>, n: T) -> Matrix<T> {
    let mut a = b.q_gamma2.clone();
    if n.is_finite() {
        a.add_outer(-T::one() / n, &b.d_vec, &b.d_vec);
    }
    a
}

/// `1e-9 (1 + ||Q_gamma2||_inf)`.
pub fn psd_tolerance<T: Scalar>(b: &LocalFormBundle<T>) -> T {
    T::tol(PSD_REL, 1e3) * (T::one() + b.q_gamma2.inf_norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct CdVertexVerdict<T: Scalar> {
    pub vertex: usize,
    pub label: String,
    pub satisfied: bool,
    pub min_eigenvalue: T,
    pub psd_tol: T,
    /// Labels of `B(x,2) \ {x}`; the witness vanishes at `x`.
    pub support: Vec<String>,
    /// Unit eigenvector of the minimum eigenvalue.
    pub witness: Vec<T>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CdVerdict<T: Scalar> {
    pub k: T,
    #[serde(serialize_with = "extended_real")]
    pub n: T,
    /// `false` when `n` is a non-integer real (an extension of the integer definition).
    pub n_is_integer: bool,
    pub satisfied: bool,
    pub vertices: Vec<CdVertexVerdict<T>>,
}

impl<T: Scalar> CdVerdict<T> {
    pub fn failures(&self) -> impl Iterator<Item = &CdVertexVerdict<T>> {
        self.vertices.iter().filter(|v| !v.satisfied)
    }
}

fn cd_at<T: Scalar>(g: &WeightedGraph<T>, x: usize, k: T, n: T) -> Result<CdVertexVerdict<T>, CurvatureError> {
    let b = local_forms(g, x);
    let m = dimension_adjusted(&b, n).add_scaled(-k, &b.q_gamma);
    let tol = psd_tolerance(&b);
    let (min_eigenvalue, witness) = symmetric_eigen(&m)?.min();
    Ok(CdVertexVerdict {
        vertex: x,
        label: g.label(x).to_string(),
        satisfied: min_eigenvalue >= -tol,
        min_eigenvalue,
        psd_tol: tol,
        support: b.support.iter().map(|&y| g.label(y).to_string()).collect(),
        witness,
    })
}

/// Decides `Gamma_2 f >= (1/n) (Delta f)^2 + K Gamma f` at every vertex in `scope`.
pub fn check_cd<T: Scalar>(g: &WeightedGraph<T>, k: T, n: T, scope: &VertexScope) -> Result<CdVerdict<T>, CurvatureError> {
    check_dimension(n)?;
    let xs = scope.vertices(g.len())?;
    let vertices = xs
        .par_iter()
        .map(|&x| cd_at(g, x, k, n))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CdVerdict {
        k,
        n,
        n_is_integer: is_integer_dimension(n),
        satisfied: vertices.iter().all(|v| v.satisfied),
        vertices,
    })
}

/// Largest `K` such that `CD(K, n)` holds at one vertex.
#[derive(Debug, Clone, Serialize)]
pub struct OptimalK<T: Scalar> {
    pub vertex: usize,
    #[serde(serialize_with = "extended_real")]
    pub k_opt: T,
    /// Global function (zero off `B(x,2)`, zero at `x`) attaining `k_opt`
    /// as `(Gamma_2 f - (Delta f)^2 / n) / Gamma f`; for `k_opt = -inf` a direction
    /// with `Gamma f = 0` and negative numerator.
    pub witness: Vec<T>,
    /// Dimension of the null space of `Q_gamma` (vertices at distance exactly 2).
    pub null_dim: usize,
}

pub fn optimal_k<T: Scalar>(g: &WeightedGraph<T>, x: usize, n: T) -> Result<OptimalK<T>, CurvatureError> {
    check_dimension(n)?;
    if x >= g.len() {
        return Err(CurvatureError::BadVertex(x));
    }
    let b = local_forms(g, x);
    let a = dimension_adjusted(&b, n);
    let tol = psd_tolerance(&b);
    let d = b.dim();

    let e1 = symmetric_eigen(&b.q_gamma)?;
    let lam_max = e1.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let cut = T::tol(NULL_REL, 16.0) * lam_max;
    let range: Vec<usize> = (0..d).filter(|&i| e1.values[i] > cut).collect();
    let null: Vec<usize> = (0..d).filter(|&i| e1.values[i] <= cut).collect();
    let u = &e1.vectors;

    // A in the eigenbasis of Q_gamma.
    let at = u.transpose().matmul(&a).matmul(u);
    let extend = |coeffs: &[T]| -> Vec<T> { b.extend(&u.matvec(coeffs), g.len()) };

    if range.is_empty() {
        return Ok(OptimalK {
            vertex: x,
            k_opt: T::infinity(),
            witness: vec![T::zero(); g.len()],
            null_dim: null.len(),
        });
    }

    let a_rr = at.submatrix(&range);
    let (s, a_nn_pinv, a_nr) = if null.is_empty() {
        (a_rr, Matrix::zeros(0), Vec::new())
    } else {
        let a_nn = at.submatrix(&null);
        let en = symmetric_eigen(&a_nn)?;
        let (lmin, vmin) = en.min();
        if lmin < -tol {
            let mut coeffs = vec![T::zero(); d];
            for (c, &i) in null.iter().enumerate() {
                coeffs[i] = vmin[c];
            }
            return Ok(OptimalK {
                vertex: x,
                k_opt: T::neg_infinity(),
                witness: extend(&coeffs),
                null_dim: null.len(),
            });
        }
        // couplings A_NR, stored by null row
        let a_nr: Vec<Vec<T>> = null.iter().map(|&i| range.iter().map(|&j| at[(i, j)]).collect()).collect();
        for (k, &lam) in en.values.iter().enumerate() {
            if lam.abs() <= tol {
                let w = en.vector(k);
                let coupling = (0..range.len())
                    .map(|r| (0..null.len()).map(|c| w[c] * a_nr[c][r]).sum::<T>().abs())
                    .fold(T::zero(), T::max);
                if coupling > tol.sqrt() {
                    // the quotient is unbounded below along w
                    let mut coeffs = vec![T::zero(); d];
                    for (c, &i) in null.iter().enumerate() {
                        coeffs[i] = w[c];
                    }
                    return Ok(OptimalK {
                        vertex: x,
                        k_opt: T::neg_infinity(),
                        witness: extend(&coeffs),
                        null_dim: null.len(),
                    });
                }
            }
        }
        let pinv = pseudo_inverse(&en, tol);
        let mut s = a_rr;
        // S = A_RR - A_RN A_NN^+ A_NR
        for r1 in 0..range.len() {
            for r2 in 0..range.len() {
                let mut acc = T::zero();
                for c1 in 0..null.len() {
                    if a_nr[c1][r1] == T::zero() {
                        continue;
                    }
                    for c2 in 0..null.len() {
                        acc += a_nr[c1][r1] * pinv[(c1, c2)] * a_nr[c2][r2];
                    }
                }
                s[(r1, r2)] -= acc;
            }
        }
        (s, pinv, a_nr)
    };

    let inv_sqrt: Vec<T> = range.iter().map(|&i| T::one() / e1.values[i].sqrt()).collect();
    let mut scaled = s;
    for r1 in 0..range.len() {
        for r2 in 0..range.len() {
            scaled[(r1, r2)] *= inv_sqrt[r1] * inv_sqrt[r2];
        }
    }
    scaled.symmetrize();
    let (k_opt, v) = symmetric_eigen(&scaled)?.min();

    let g_r: Vec<T> = v.iter().zip(&inv_sqrt).map(|(&a, &b)| a * b).collect();
    let mut coeffs = vec![T::zero(); d];
    for (r, &i) in range.iter().enumerate() {
        coeffs[i] = g_r[r];
    }
    for (c1, &i) in null.iter().enumerate() {
        // g_N = -A_NN^+ A_NR g_R
        let mut acc = T::zero();
        for c2 in 0..null.len() {
            let coupling: T = (0..range.len()).map(|r| a_nr[c2][r] * g_r[r]).sum();
            acc += a_nn_pinv[(c1, c2)] * coupling;
        }
        coeffs[i] = -acc;
    }
    Ok(OptimalK {
        vertex: x,
        k_opt,
        witness: extend(&coeffs),
        null_dim: null.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureProfile<T: Scalar> {
    #[serde(serialize_with = "extended_real")]
    pub n: T,
    pub n_is_integer: bool,
    pub vertices: Vec<usize>,
    pub labels: Vec<String>,
    #[serde(serialize_with = "extended_reals")]
    pub k_opt: Vec<T>,
    /// `inf_x K_opt(x, n)` over the scope.
    #[serde(serialize_with = "extended_real")]
    pub k_inf: T,
    #[serde(skip)]
    pub witnesses: Vec<Vec<T>>,
}

impl<T: Scalar> CurvatureProfile<T> {
    pub fn argmin(&self) -> Option<usize> {
        (0..self.k_opt.len()).min_by(|&a, &b| self.k_opt[a].partial_cmp(&self.k_opt[b]).unwrap_or(std::cmp::Ordering::Equal))
    }
}

/// `optimal_k` over `scope`; pass the trusted interior for truncated graphs.
pub fn curvature_profile<T: Scalar>(
    g: &WeightedGraph<T>,
    n: T,
    scope: &VertexScope,
) -> Result<CurvatureProfile<T>, CurvatureError> {
    check_dimension(n)?;
    let xs = scope.vertices(g.len())?;
    let results = xs
        .par_iter()
        .map(|&x| optimal_k(g, x, n))
        .collect::<Result<Vec<_>, _>>()?;
    let k_opt: Vec<T> = results.iter().map(|r| r.k_opt).collect();
    Ok(CurvatureProfile {
        n,
        n_is_integer: is_integer_dimension(n),
        labels: xs.iter().map(|&x| g.label(x).to_string()).collect(),
        vertices: xs,
        k_inf: k_opt.iter().copied().fold(T::infinity(), T::min),
        k_opt,
        witnesses: results.into_iter().map(|r| r.witness).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BonnetMyersReport<T: Scalar> {
    #[serde(serialize_with = "extended_real")]
    pub k_inf: T,
    pub diameter: usize,
    /// `2 / K_inf` when the bound applies.
    pub bound: Option<T>,
    /// `K_inf > 0` on a markov graph.
    pub applicable: bool,
    /// `diam <= 2 / K_inf`; vacuously true when not applicable.
    pub holds: bool,
    pub note: Option<&'static str>,
}

/// Diameter bound `diam(G) <= 2/K` under `CD(K, inf)` with `K > 0`.
///
/// The bound is stated for markov kernels; an unnormalized kernel with row
/// sums `m` has its curvature scaled by `m`, so it is reported as not applicable.
pub fn bonnet_myers_check<T: Scalar>(g: &WeightedGraph<T>) -> Result<BonnetMyersReport<T>, CurvatureError> {
    let profile = curvature_profile(g, T::infinity(), &VertexScope::All)?;
    let diameter = diameter(g);
    let k_inf = profile.k_inf;
    let mut report = BonnetMyersReport {
        k_inf,
        diameter,
        bound: None,
        applicable: false,
        holds: true,
        note: None,
    };
    if g.mode() != LaplacianMode::Markov || !g.is_stochastic() {
        report.note = Some("requires a markov kernel");
    } else if k_inf > T::zero() {
        let bound = T::two() / k_inf;
        // diameters are integers, so compare with a relative slack for the eigen-solver
        report.holds = T::from_usize_lossy(diameter) <= bound * (T::one() + T::tol(1e-12, 64.0));
        report.bound = Some(bound);
        report.applicable = true;
    } else {
        report.note = Some("requires K_inf > 0");
    }
    Ok(report)
}
