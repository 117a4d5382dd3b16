//! The heat semigroup `P_t = exp(t Delta)`, Duhamel's formula and the
//! gradient estimates satisfied by `P_t` under curvature-dimension bounds.

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{check_cd, VertexScope};
use crate::error::SemigroupError;
use crate::graph::WeightedGraph;
use crate::operators::{check_len, gamma_sq, laplacian, quadratic_scale};
use crate::report::extended_real;
use crate::scalar::{sup_norm, Scalar};
use crate::tolerance::{AUDIT_TOL, DUHAMEL_REFINE_TOL, SEMIGROUP_TOL, TOL_MARKOV};

const MAX_TAYLOR_ORDER: usize = 80;

/// How `P_t` is evaluated: `substeps` applications of a Taylor polynomial of `exp((t/s) Delta)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SemigroupPlan<T: Scalar> {
    pub t: T,
    pub substeps: usize,
    pub taylor_order: usize,
    /// A-priori bound on `||P_t f - approx||_inf / ||f||_inf`.
    pub error_bound: T,
    /// Bound on `||Delta||_{inf -> inf}`: twice the largest row sum.
    pub norm_bound: T,
}

/// `sum_{k > m} x^k / k!`, bounded by its first term over `1 - x/(m+2)`.
fn taylor_tail<T: Scalar>(x: T, m: usize) -> T {
    let mut term = T::one();
    for k in 1..=m + 1 {
        term *= x / T::from_usize_lossy(k);
    }
    let ratio = x / T::from_usize_lossy(m + 2);
    if ratio >= T::one() {
        T::infinity()
    } else {
        term / (T::one() - ratio)
    }
}

impl<T: Scalar> SemigroupPlan<T> {
    pub fn new(g: &WeightedGraph<T>, t: T, tol: T) -> Result<Self, SemigroupError> {
        if t < T::zero() || !t.is_finite() {
            return Err(SemigroupError::NegativeTime(t.to_f64_lossy()));
        }
        let norm_bound = T::two() * g.max_row_sum();
        let tol = tol.max(T::epsilon() * T::lit(4.0));
        // s = ceil(t ||Delta|| / 2) + 1, which is ceil(t) + 1 for markov kernels
        let substeps = (t * norm_bound * T::half()).ceil().to_usize().unwrap_or(usize::MAX - 1) + 1;
        let x = norm_bound * t / T::from_usize_lossy(substeps);
        let per_step = tol / T::from_usize_lossy(substeps);
        let mut taylor_order = 1;
        while taylor_order < MAX_TAYLOR_ORDER && taylor_tail(x, taylor_order) > per_step {
            taylor_order += 1;
        }
        Ok(Self {
            t,
            substeps,
            taylor_order,
            error_bound: T::from_usize_lossy(substeps) * taylor_tail(x, taylor_order),
            norm_bound,
        })
    }

    pub fn cost(&self) -> usize {
        self.substeps * self.taylor_order
    }

    pub fn apply(&self, g: &WeightedGraph<T>, f: &[T]) -> Result<Vec<T>, SemigroupError> {
        check_len(g, f).map_err(SemigroupError::from)?;
        if self.t == T::zero() {
            return Ok(f.to_vec());
        }
        let h = self.t / T::from_usize_lossy(self.substeps);
        let mut v = f.to_vec();
        let mut term = vec![T::zero(); f.len()];
        let mut next = vec![T::zero(); f.len()];
        for _ in 0..self.substeps {
            term.copy_from_slice(&v);
            for k in 1..=self.taylor_order {
                laplacian_into(g, &term, &mut next);
                let c = h / T::from_usize_lossy(k);
                for (t, n) in term.iter_mut().zip(&next) {
                    *t = c * *n;
                }
                for (a, t) in v.iter_mut().zip(&term) {
                    *a += *t;
                }
            }
        }
        Ok(v)
    }
}

fn laplacian_into<T: Scalar>(g: &WeightedGraph<T>, f: &[T], out: &mut [T]) {
    for (x, o) in out.iter_mut().enumerate() {
        let (ys, ps) = g.row(x);
        let fx = f[x];
        let mut acc = T::zero();
        for (&y, &p) in ys.iter().zip(ps) {
            acc += p * (f[y] - fx);
        }
        *o = acc;
    }
}

/// `P_t f` with relative accuracy `tol`.
pub fn apply_semigroup<T: Scalar>(g: &WeightedGraph<T>, t: T, f: &[T], tol: T) -> Result<Vec<T>, SemigroupError> {
    SemigroupPlan::new(g, t, tol)?.apply(g, f)
}

/// `apply_semigroup` with the default tolerance.
pub fn heat<T: Scalar>(g: &WeightedGraph<T>, t: T, f: &[T]) -> Result<Vec<T>, SemigroupError> {
    apply_semigroup(g, t, f, T::lit(SEMIGROUP_TOL))
}

/// Quadrature weights on nodes `0..=i` of a uniform grid with unit spacing:
/// composite Simpson for even `i`, Simpson plus a closing 3/8 panel for odd
/// `i >= 3`, and the trapezoid for `i = 1` (which the Duhamel solver replaces
/// by an interpolated Simpson panel).
pub fn simpson_weights<T: Scalar>(i: usize) -> Vec<T> {
    let mut w = vec![T::zero(); i + 1];
    match i {
        0 => {}
        1 => {
            w[0] = T::half();
            w[1] = T::half();
        }
        _ => {
            let even_end = if i.is_multiple_of(2) { i } else { i - 3 };
            let third = T::one() / T::lit(3.0);
            for j in (0..even_end).step_by(2) {
                w[j] += third;
                w[j + 1] += T::lit(4.0) * third;
                w[j + 2] += third;
            }
            if i % 2 == 1 {
                let e = T::lit(0.375);
                let c = [e, T::lit(3.0) * e, T::lit(3.0) * e, e];
                for (k, ck) in c.iter().enumerate() {
                    w[even_end + k] += *ck;
                }
            }
        }
    }
    w
}

/// Solution of `du/dt = Delta u + F` on a uniform grid.
#[derive(Debug, Clone, Serialize)]
pub struct DuhamelSolution<T: Scalar> {
    pub step: T,
    pub values: Vec<Vec<T>>,
    /// Sup-deviation from the same formula on every other node, relative to
    /// the solution scale (`None` when the grid cannot be halved).
    pub coarse_deviation: Option<T>,
}

impl<T: Scalar> DuhamelSolution<T> {
    pub fn times(&self) -> Vec<T> {
        (0..self.values.len()).map(|i| self.step * T::from_usize_lossy(i)).collect()
    }
}

/// Repeated `P_h` on a uniform grid, shared by the Duhamel and Picard solvers.
#[derive(Debug, Clone)]
pub struct GridPropagator<T: Scalar> {
    pub plan: SemigroupPlan<T>,
    tol: T,
}

impl<T: Scalar> GridPropagator<T> {
    pub fn new(g: &WeightedGraph<T>, step: T, tol: T) -> Result<Self, SemigroupError> {
        Ok(Self {
            plan: SemigroupPlan::new(g, step, tol)?,
            tol,
        })
    }

    pub fn step(&self) -> T {
        self.plan.t
    }

    /// `[f, P_h f, ..., P_h^m f]`.
    pub fn orbit(&self, g: &WeightedGraph<T>, f: &[T], m: usize) -> Result<Vec<Vec<T>>, SemigroupError> {
        let mut out = Vec::with_capacity(m + 1);
        out.push(f.to_vec());
        for k in 0..m {
            let next = self.plan.apply(g, &out[k])?;
            out.push(next);
        }
        Ok(out)
    }

    /// `u_i = P_{ih} u0 + int_0^{ih} P_{ih - s} F(s) ds` for every node `i`.
    pub fn duhamel(&self, g: &WeightedGraph<T>, u0: &[T], forcing: &[Vec<T>]) -> Result<Vec<Vec<T>>, SemigroupError> {
        let nodes = forcing.len();
        let homogeneous = self.orbit(g, u0, nodes.saturating_sub(1))?;
        let mut out = homogeneous;
        if nodes == 0 {
            return Ok(out);
        }
        let h = self.step();
        // q[j][m] = P_h^m F_j
        let q: Vec<Vec<Vec<T>>> = (0..nodes)
            .map(|j| self.orbit(g, &forcing[j], nodes - 1 - j))
            .collect::<Result<_, _>>()?;
        // First interval: Simpson with the midpoint forcing interpolated through F_0, F_1, F_2.
        if nodes >= 3 {
            let half = SemigroupPlan::new(g, h * T::half(), self.tol)?;
            let eighth = T::one() / T::lit(8.0);
            let mid: Vec<T> = (0..u0.len())
                .map(|x| eighth * (T::lit(3.0) * forcing[0][x] + T::lit(6.0) * forcing[1][x] - forcing[2][x]))
                .collect();
            let mid = half.apply(g, &mid)?;
            let c = h / T::lit(6.0);
            for x in 0..u0.len() {
                out[1][x] += c * (q[0][1][x] + T::lit(4.0) * mid[x] + q[1][0][x]);
            }
        }
        for (i, u) in out.iter_mut().enumerate().skip(if nodes >= 3 { 2 } else { 1 }) {
            let w = simpson_weights::<T>(i);
            for (j, wj) in w.iter().enumerate() {
                let c = h * *wj;
                for (a, b) in u.iter_mut().zip(&q[j][i - j]) {
                    *a += c * *b;
                }
            }
        }
        Ok(out)
    }
}

/// Duhamel's formula with the forcing sampled on `forcing.len()` uniform nodes over `[0, horizon]`.
pub fn duhamel_solve<T: Scalar>(
    g: &WeightedGraph<T>,
    u0: &[T],
    forcing: &[Vec<T>],
    horizon: T,
) -> Result<DuhamelSolution<T>, SemigroupError> {
    let nodes = forcing.len();
    if nodes < 3 {
        return Err(SemigroupError::GridTooCoarse(nodes));
    }
    if horizon < T::zero() {
        return Err(SemigroupError::NegativeTime(horizon.to_f64_lossy()));
    }
    check_len(g, u0)?;
    for f in forcing {
        check_len(g, f)?;
    }
    let step = horizon / T::from_usize_lossy(nodes - 1);
    let tol = T::lit(SEMIGROUP_TOL) / T::from_usize_lossy(nodes);
    let prop = GridPropagator::new(g, step, tol)?;
    let values = prop.duhamel(g, u0, forcing)?;

    let coarse_deviation = if nodes >= 5 && (nodes - 1).is_multiple_of(2) {
        let coarse_prop = GridPropagator::new(g, step * T::two(), tol)?;
        let coarse_forcing: Vec<Vec<T>> = forcing.iter().step_by(2).cloned().collect();
        let coarse = coarse_prop.duhamel(g, u0, &coarse_forcing)?;
        let scale = values.iter().fold(T::one(), |m, v| m.max(sup_norm(v)));
        let dev = coarse
            .iter()
            .enumerate()
            .map(|(k, c)| sup_norm(&c.iter().zip(&values[2 * k]).map(|(a, b)| *a - *b).collect::<Vec<_>>()))
            .fold(T::zero(), T::max);
        Some(dev / scale)
    } else {
        None
    };
    Ok(DuhamelSolution {
        step,
        values,
        coarse_deviation,
    })
}

/// Duhamel's formula for a forcing given as a function of time. The node
/// count doubles until two successive solutions agree to
/// `1e-8 * max(1, ||u||)`, at most twice; the result is reported on the
/// initial grid together with whether that agreement was reached.
pub fn duhamel_adaptive<T, F>(
    g: &WeightedGraph<T>,
    u0: &[T],
    forcing: F,
    horizon: T,
    intervals: usize,
) -> Result<(DuhamelSolution<T>, bool), SemigroupError>
where
    T: Scalar,
    F: Fn(T) -> Vec<T>,
{
    if intervals < 2 {
        return Err(SemigroupError::GridTooCoarse(intervals + 1));
    }
    let solve = |m: usize| -> Result<DuhamelSolution<T>, SemigroupError> {
        let h = horizon / T::from_usize_lossy(m);
        let samples: Vec<Vec<T>> = (0..=m).map(|i| forcing(h * T::from_usize_lossy(i))).collect();
        duhamel_solve(g, u0, &samples, horizon)
    };
    let restrict = |sol: &DuhamelSolution<T>, factor: usize| -> Vec<Vec<T>> {
        sol.values.iter().step_by(factor).cloned().collect()
    };
    let mut current = solve(intervals)?;
    let mut factor = 1;
    let mut converged = false;
    for _ in 0..2 {
        let finer = solve(intervals * factor * 2)?;
        let a = restrict(&current, factor);
        let b = restrict(&finer, factor * 2);
        let scale = b.iter().fold(T::one(), |m, v| m.max(sup_norm(v)));
        let change = a
            .iter()
            .zip(&b)
            .map(|(x, y)| x.iter().zip(y).fold(T::zero(), |m, (p, q)| m.max((*p - *q).abs())))
            .fold(T::zero(), T::max);
        current = finer;
        factor *= 2;
        if change < T::tol(DUHAMEL_REFINE_TOL, 64.0) * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("Duhamel quadrature did not settle to 1e-8 after two refinements");
    }
    let values = restrict(&current, factor);
    Ok((
        DuhamelSolution {
            step: horizon / T::from_usize_lossy(intervals),
            values,
            coarse_deviation: None,
        },
        converged,
    ))
}

/// One inequality of the gradient audit.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityRecord<T: Scalar> {
    pub name: &'static str,
    /// `None` when the hypotheses hold; otherwise why the record is vacuous.
    pub vacuous: Option<String>,
    /// `max(0, lhs - rhs) / max(1, ||f||^2)` over the corpus and grid.
    pub max_violation: T,
    pub tolerance: T,
    pub pass: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientAuditReport<T: Scalar> {
    pub k: T,
    #[serde(serialize_with = "extended_real")]
    pub n: T,
    pub corpus_size: usize,
    pub times: Vec<T>,
    /// `CD(K, n)` verified by `check_cd`.
    pub cd_verified: bool,
    pub records: Vec<InequalityRecord<T>>,
}

impl<T: Scalar> GradientAuditReport<T> {
    pub fn record(&self, name: &str) -> Option<&InequalityRecord<T>> {
        self.records.iter().find(|r| r.name == name)
    }

    /// No applicable record failed.
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn all_vacuous(&self) -> bool {
        self.records.iter().all(|r| r.vacuous.is_some())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AuditOptions {
    /// Simpson intervals for the integral term; the estimate is repeated with
    /// twice as many and the difference is added to that record's tolerance.
    pub quadrature_intervals: usize,
    pub semigroup_tol: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            quadrature_intervals: 64,
            semigroup_tol: 1e-13,
        }
    }
}

const NAMES: [&str; 8] = [
    "gammapt1",
    "gammapt2",
    "gammapt2bis",
    "gammapt",
    "gradpt0",
    "gradpt",
    "ptf2",
    "stochastic_completeness",
];

/// Per `(f, t)` pair: violation per inequality (normalized), and the quadrature
/// error estimate of the integral term.
struct PairOutcome<T> {
    violations: [T; 8],
    quad_error: T,
}

fn positive_part<T: Scalar>(v: T) -> T {
    v.max(T::zero())
}

/// `int_0^t e^{-2Ks} P_s((P_{t-s} D)^2) ds` by composite Simpson with `m` intervals,
/// accumulated Horner-style so that only `2m` applications of `P_{t/m}` are needed.
fn integral_term<T: Scalar>(g: &WeightedGraph<T>, d: &[T], t: T, k: T, m: usize, tol: T) -> Result<Vec<T>, SemigroupError> {
    let h = t / T::from_usize_lossy(m);
    let plan = SemigroupPlan::new(g, h, tol)?;
    // backward[j] = P_{(m-j)h} D
    let mut backward = vec![Vec::new(); m + 1];
    backward[m] = d.to_vec();
    for j in (0..m).rev() {
        backward[j] = plan.apply(g, &backward[j + 1])?;
    }
    let w = simpson_weights::<T>(m);
    let coef = |j: usize| h * w[j] * (-T::two() * k * h * T::from_usize_lossy(j)).exp();
    let sq = |j: usize| -> Vec<T> { backward[j].iter().map(|v| *v * *v).collect() };
    let mut acc: Vec<T> = sq(m).into_iter().map(|v| coef(m) * v).collect();
    for j in (0..m).rev() {
        acc = plan.apply(g, &acc)?;
        let c = coef(j);
        for (a, s) in acc.iter_mut().zip(sq(j)) {
            *a += c * s;
        }
    }
    Ok(acc)
}

fn audit_pair<T: Scalar>(
    g: &WeightedGraph<T>,
    f: &[T],
    t: T,
    k: T,
    n: T,
    opts: &AuditOptions,
) -> Result<PairOutcome<T>, SemigroupError> {
    let tol = T::tol(opts.semigroup_tol, 16.0);
    let plan = SemigroupPlan::new(g, t, tol)?;
    let p = |v: &[T]| plan.apply(g, v);
    let scale = quadratic_scale(f);
    let inv_n = if n.is_finite() { T::one() / n } else { T::zero() };
    let decay = (-T::two() * k * t).exp();

    let ptf = p(f)?;
    let gamma_ptf = gamma_sq(g, &ptf)?;
    let gamma_f = gamma_sq(g, f)?;
    let pt_gamma_f = p(&gamma_f)?;
    let lap_f = laplacian(g, f)?;
    let pt_lap_f = p(&lap_f)?;
    let f_sq: Vec<T> = f.iter().map(|v| *v * *v).collect();
    let pt_f_sq = p(&f_sq)?;

    let m = opts.quadrature_intervals.max(2) & !1;
    let integral = integral_term(g, &lap_f, t, k, m, tol)?;
    let integral_fine = integral_term(g, &lap_f, t, k, 2 * m, tol)?;
    let quad_error = sup_norm(&integral.iter().zip(&integral_fine).map(|(a, b)| *a - *b).collect::<Vec<_>>());

    let sup_gamma_f = sup_norm(&gamma_f);
    let sup_f = sup_norm(f);
    let mut v = [T::zero(); 8];
    for x in 0..g.len() {
        let lhs = gamma_ptf[x];
        let d2 = pt_lap_f[x] * pt_lap_f[x];
        v[0] = v[0].max(positive_part(lhs - (decay * pt_gamma_f[x] - T::two() * inv_n * integral_fine[x])));
        if k > T::zero() {
            v[1] = v[1].max(positive_part(lhs - (decay * pt_gamma_f[x] + (decay - T::one()) / (k * n) * d2)));
        }
        v[2] = v[2].max(positive_part(lhs - (pt_gamma_f[x] - T::two() * t * inv_n * d2)));
        v[3] = v[3].max(positive_part(lhs - decay * pt_gamma_f[x]));
        v[4] = v[4].max(positive_part(lhs - sup_gamma_f));
        if t > T::zero() {
            v[5] = v[5].max(positive_part(t * lhs - sup_f * sup_f));
        }
        let variance = pt_f_sq[x] - ptf[x] * ptf[x];
        v[6] = v[6].max(positive_part(T::two() * t * lhs - variance));
    }
    for vi in v.iter_mut().take(7) {
        *vi /= scale;
    }
    let ones = vec![T::one(); g.len()];
    v[7] = sup_norm(&p(&ones)?.iter().map(|a| *a - T::one()).collect::<Vec<_>>());
    Ok(PairOutcome {
        violations: v,
        quad_error: quad_error * T::two() * inv_n / scale,
    })
}

/// Evaluates the semigroup gradient estimates over a corpus of functions and times.
///
/// The hypotheses are checked first: every estimate except stochastic
/// completeness needs `CD(K, n)` (verified with `check_cd`) and `K >= 0`;
/// `gammapt2` needs `K > 0`. Records whose hypotheses fail are vacuous.
pub fn audit_gradient_estimates<T: Scalar>(
    g: &WeightedGraph<T>,
    corpus: &[Vec<T>],
    times: &[T],
    k: T,
    n: T,
    opts: &AuditOptions,
) -> Result<GradientAuditReport<T>, SemigroupError> {
    for f in corpus {
        check_len(g, f)?;
    }
    if let Some(t) = times.iter().find(|t| !(**t >= T::zero())) {
        return Err(SemigroupError::NegativeTime(t.to_f64_lossy()));
    }
    let cd_verified = check_cd(g, k, n, &VertexScope::All)?.satisfied;
    let pairs: Vec<(usize, T)> = (0..corpus.len()).flat_map(|i| times.iter().map(move |&t| (i, t))).collect();
    let outcomes = pairs
        .par_iter()
        .map(|&(i, t)| audit_pair(g, &corpus[i], t, k, n, opts))
        .collect::<Result<Vec<_>, _>>()?;

    let mut records = Vec::with_capacity(NAMES.len());
    let audit_tol = T::tol(AUDIT_TOL, 1e4);
    let quad_error = outcomes.iter().fold(T::zero(), |m, o| m.max(o.quad_error));
    for (idx, &name) in NAMES.iter().enumerate() {
        let vacuous = match name {
            "stochastic_completeness" if !g.is_stochastic() => {
                Some("graph is not stochastic (absorbing truncation or unnormalized kernel)".to_string())
            }
            "stochastic_completeness" => None,
            _ if !cd_verified => Some(format!("CD({k}, {n}) does not hold on this graph")),
            "gammapt2" if k <= T::zero() => Some("requires K > 0".to_string()),
            _ if k < T::zero() => Some("requires K >= 0".to_string()),
            _ => None,
        };
        let tolerance = match name {
            "stochastic_completeness" => T::tol(TOL_MARKOV, 64.0),
            "gammapt1" => audit_tol + quad_error,
            _ => audit_tol,
        };
        let max_violation = outcomes.iter().fold(T::zero(), |m, o| m.max(o.violations[idx]));
        let pass = vacuous.is_some() || max_violation <= tolerance;
        records.push(InequalityRecord {
            name,
            vacuous,
            max_violation,
            tolerance,
            pass,
            evaluations: outcomes.len(),
        });
    }
    Ok(GradientAuditReport {
        k,
        n,
        corpus_size: corpus.len(),
        times: times.to_vec(),
        cd_verified,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_graph, generate_cayley, two_vertex, GroupSpec, KernelBuilder, LaplacianMode};

    #[test]
    fn zero_time_is_identity() {
        let g = cycle_graph::<f64>(5);
        let f = vec![0.3, -1.0, 2.0, 0.0, 5.0];
        assert_eq!(heat(&g, 0.0, &f).unwrap(), f);
    }

    #[test]
    fn two_vertex_closed_form() {
        let g = two_vertex::<f64>();
        let u = apply_semigroup(&g, std::f64::consts::LN_2 / 2.0, &[0.0, 1.0], 1e-14).unwrap();
        assert!((u[0] - 0.25).abs() < 1e-13 && (u[1] - 0.75).abs() < 1e-13);
    }

    #[test]
    fn plan_respects_bounds() {
        let g = cycle_graph::<f64>(6);
        for t in [0.1, 1.0, 5.0] {
            let plan = SemigroupPlan::new(&g, t, 1e-10).unwrap();
            assert_eq!(plan.substeps, t.ceil() as usize + 1);
            assert!(plan.error_bound <= 1e-10);
        }
        assert!(SemigroupPlan::new(&g, -1.0, 1e-10).is_err());
    }

    #[test]
    fn semigroup_law() {
        let g = generate_cayley::<f64>(GroupSpec::torus(2, 5), None, LaplacianMode::Markov).unwrap();
        let f: Vec<f64> = (0..g.len()).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let (s, t) = (0.7, 1.3);
        let direct = heat(&g, s + t, &f).unwrap();
        let composed = heat(&g, t, &heat(&g, s, &f).unwrap()).unwrap();
        let dev = direct.iter().zip(&composed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(dev <= 2e-10 * 5.0);
    }

    #[test]
    fn simpson_weights_sum_to_length() {
        for i in 1..12 {
            let s: f64 = simpson_weights::<f64>(i).iter().sum();
            assert!((s - i as f64).abs() < 1e-14, "i={i}");
        }
        assert_eq!(simpson_weights::<f64>(2), vec![1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn duhamel_homogeneous_and_constant() {
        let g = cycle_graph::<f64>(5);
        let u0 = vec![1.0, 0.0, 0.0, 2.0, 0.0];
        let zero = vec![vec![0.0; 5]; 9];
        let sol = duhamel_solve(&g, &u0, &zero, 1.0).unwrap();
        let direct = heat(&g, 1.0, &u0).unwrap();
        for (a, b) in sol.values[8].iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = vec![vec![0.5; 5]; 9];
        let sol = duhamel_solve(&g, &u0, &c, 1.0).unwrap();
        for (a, b) in sol.values[8].iter().zip(&direct) {
            assert!((a - (b + 0.5)).abs() < 1e-12);
        }
        assert!(matches!(
            duhamel_solve(&g, &u0, &zero[..2], 1.0),
            Err(SemigroupError::GridTooCoarse(2))
        ));
    }

    #[test]
    fn duhamel_cubic_forcing_on_self_loop() {
        let mut b = KernelBuilder::<f64>::new();
        b.vertex("v", 1.0).unwrap();
        b.edge("v", "v", 1.0, 1.0).unwrap();
        let g = b.build(LaplacianMode::Markov).unwrap();
        let forcing = |t: f64| vec![t * t * t - 2.0 * t];
        for nodes in [5, 6, 8] {
            let h = 2.0 / (nodes - 1) as f64;
            let samples: Vec<_> = (0..nodes).map(|i| forcing(i as f64 * h)).collect();
            let sol = duhamel_solve(&g, &[1.0], &samples, 2.0).unwrap();
            for (i, u) in sol.values.iter().enumerate().skip(2) {
                let t = i as f64 * h;
                let exact = 1.0 + t.powi(4) / 4.0 - t * t;
                assert!((u[0] - exact).abs() < 1e-12, "nodes={nodes} i={i}");
            }
        }
    }

    #[test]
    fn adaptive_duhamel_converges() {
        let g = cycle_graph::<f64>(4);
        let forcing = |t: f64| vec![t.sin(), 0.0, t.cos(), 1.0];
        let (sol, converged) = duhamel_adaptive(&g, &[0.0; 4], forcing, 1.0, 32).unwrap();
        assert!(converged);
        assert_eq!(sol.values.len(), 33);
        let (_, converged) = duhamel_adaptive(&g, &[0.0; 4], forcing, 1.0, 4).unwrap();
        assert!(!converged);
    }

    #[test]
    fn two_vertex_audit() {
        let g = two_vertex::<f64>();
        let corpus = vec![vec![0.0, 1.0], vec![2.0, 2.0]];
        let r = audit_gradient_estimates(&g, &corpus, &[0.0, 0.5], 2.0, f64::INFINITY, &AuditOptions::default()).unwrap();
        assert!(r.cd_verified);
        assert!(r.pass(), "{r:#?}");
        assert!(r.record("gammapt").unwrap().vacuous.is_none());
    }

    #[test]
    fn audit_is_vacuous_without_curvature() {
        let g = two_vertex::<f64>();
        let r = audit_gradient_estimates(&g, &[vec![0.0, 1.0]], &[0.5], 3.0, 2.0, &AuditOptions::default()).unwrap();
        assert!(!r.cd_verified);
        assert!(r.records.iter().filter(|x| x.name != "stochastic_completeness").all(|x| x.vacuous.is_some()));
    }
}
