//! Inequalities satisfied by admissible solutions of the modified heat equation.
//!
//! Every report normalizes `max(0, lhs - rhs)` by the trace scale
//! `max(1, ||u0||, ||u0||^2)` and passes at `1e-7`. Hypotheses that can be
//! checked from the graph are checked here; when one fails the report is
//! vacuous and passes without evaluating anything.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::SolveTrace;
use crate::curvature::{check_cd, VertexScope};
use crate::error::SolveError;
use crate::graph::{bfs_distances, WeightedGraph};
use crate::report::extended_real;
use crate::scalar::Scalar;
use crate::semigroup::apply_semigroup;
use crate::tolerance::{gamma_upper, omega_constant, EDGE_OSCILLATION_BOUND, VERIFY_TOL};

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport<T: Scalar> {
    pub name: &'static str,
    #[serde(serialize_with = "extended_map")]
    pub parameters: BTreeMap<&'static str, f64>,
    pub vacuous: Option<String>,
    pub max_violation: T,
    pub tolerance: T,
    pub scale: T,
    pub evaluations: usize,
    /// Largest `lhs - rhs` before normalization; negative when the bound has slack.
    #[serde(serialize_with = "extended_real")]
    pub worst_gap: T,
    /// Time and vertex of the largest violation (or smallest slack).
    pub worst_time: Option<T>,
    pub worst_vertex: Option<String>,
    pub pass: bool,
}

fn extended_map<S: Serializer>(m: &BTreeMap<&'static str, f64>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    struct Ext(f64);
    impl Serialize for Ext {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            extended_real(&self.0, s)
        }
    }
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &Ext(*v))?;
    }
    map.end()
}

/// Space-time pair for the Harnack inequality: compares `u_{t1}(x)` with `u_{t2}(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimePair<T> {
    pub x: usize,
    pub y: usize,
    pub t1: T,
    pub t2: T,
}

/// Every ordered `(x, y)`, including `x = y`, at the given times.
pub fn all_ordered_pairs<T: Scalar>(n: usize, t1: T, t2: T) -> Vec<TimePair<T>> {
    (0..n).flat_map(|x| (0..n).map(move |y| TimePair { x, y, t1, t2 })).collect()
}

struct Audit<'a, T: Scalar> {
    trace: &'a SolveTrace<T>,
    name: &'static str,
    parameters: BTreeMap<&'static str, f64>,
    worst: T,
    at: Option<(T, usize)>,
    evaluations: usize,
}

impl<'a, T: Scalar> Audit<'a, T> {
    fn new(trace: &'a SolveTrace<T>, name: &'static str) -> Self {
        Self {
            trace,
            name,
            parameters: BTreeMap::new(),
            worst: T::neg_infinity(),
            at: None,
            evaluations: 0,
        }
    }

    fn param(mut self, key: &'static str, v: T) -> Self {
        self.parameters.insert(key, v.to_f64_lossy());
        self
    }

    /// Records `lhs <= rhs` at node `i`, vertex `x`.
    fn check(&mut self, lhs: T, rhs: T, i: usize, x: usize) {
        self.evaluations += 1;
        let d = lhs - rhs;
        if d > self.worst || self.at.is_none() {
            self.worst = d;
            self.at = Some((self.trace.times[i], x));
        }
    }

    fn finish(self, g: &WeightedGraph<T>, vacuous: Option<String>) -> InequalityReport<T> {
        let scale = self.trace.scale();
        let tolerance = T::tol(VERIFY_TOL, 1e4);
        let max_violation = if vacuous.is_some() {
            T::zero()
        } else {
            self.worst.max(T::zero()) / scale
        };
        InequalityReport {
            name: self.name,
            parameters: self.parameters,
            pass: vacuous.is_some() || max_violation <= tolerance,
            vacuous,
            max_violation,
            tolerance,
            scale,
            evaluations: self.evaluations,
            worst_gap: self.worst,
            worst_time: self.at.map(|(t, _)| t),
            worst_vertex: self.at.map(|(_, x)| g.label(x).to_string()),
        }
    }
}

fn inadmissible<T: Scalar>(trace: &SolveTrace<T>) -> Option<String> {
    (!trace.admissible).then(|| {
        format!(
            "||Gamma u0|| = {} is not below alpha/2 = {}",
            trace.gamma0_sup,
            trace.alpha * T::half()
        )
    })
}

fn curvature_fails<T: Scalar>(g: &WeightedGraph<T>, k: T, n: T) -> Result<Option<String>, SolveError> {
    let verdict = check_cd(g, k, n, &VertexScope::All)?;
    Ok((!verdict.satisfied).then(|| format!("CD({k}, {n}) does not hold on this graph")))
}

/// `||Gamma u(t)||_inf <= e^{-2Kt} ||Gamma u0||_inf` at every node; needs
/// `CD(K, inf)` and admissible initial data.
pub fn verify_gradient_decay<T: Scalar>(g: &WeightedGraph<T>, trace: &SolveTrace<T>, k: T) -> Result<InequalityReport<T>, SolveError> {
    let mut audit = Audit::new(trace, "gradient_decay").param("K", k);
    let vacuous = match inadmissible(trace) {
        Some(v) => Some(v),
        None => curvature_fails(g, k, T::infinity())?,
    };
    if vacuous.is_none() {
        for (i, &t) in trace.times.iter().enumerate() {
            let (x, lhs) = trace.gamma[i]
                .iter()
                .copied()
                .enumerate()
                .fold((0, T::neg_infinity()), |a, (x, v)| if v > a.1 { (x, v) } else { a });
            audit.check(lhs, (-T::two() * k * t).exp() * trace.gamma0_sup, i, x);
        }
    }
    Ok(audit.finish(g, vacuous))
}

/// `|u(t)(y) - u(t)(x)| <= 1` across every edge and node; needs admissible initial data.
pub fn verify_edge_oscillation<T: Scalar>(g: &WeightedGraph<T>, trace: &SolveTrace<T>) -> InequalityReport<T> {
    let mut audit = Audit::new(trace, "edge_oscillation").param("alpha", trace.alpha);
    let vacuous = inadmissible(trace);
    if vacuous.is_none() {
        let bound = T::lit(EDGE_OSCILLATION_BOUND);
        for (i, u) in trace.u.iter().enumerate() {
            for x in 0..g.len() {
                for (y, _) in g.neighbors(x) {
                    audit.check((u[y] - u[x]).abs(), bound, i, x);
                }
            }
        }
    }
    audit.finish(g, vacuous)
}

/// `-Delta u(t) <= n / (2t)` for `t > 0`; needs `CD(0, n)` with finite `n`.
pub fn verify_li_yau<T: Scalar>(g: &WeightedGraph<T>, trace: &SolveTrace<T>, n: T) -> Result<InequalityReport<T>, SolveError> {
    let mut audit = Audit::new(trace, "li_yau").param("n", n);
    let vacuous = if !n.is_finite() {
        Some("requires a finite dimension".to_string())
    } else {
        curvature_fails(g, T::zero(), n)?
    };
    if vacuous.is_none() {
        for (i, &t) in trace.times.iter().enumerate().filter(|(_, &t)| t > T::zero()) {
            let rhs = n / (T::two() * t);
            for (x, d) in trace.laplacian[i].iter().enumerate() {
                audit.check(-*d, rhs, i, x);
            }
        }
    }
    Ok(audit.finish(g, vacuous))
}

/// `u_{T1}(x) - u_{T2}(y) <= (n/2) log(T2/T1) + 2 d(x,y)^2 / (alpha (T2 - T1))`
/// for each pair; needs `CD(0, n)` and admissible initial data. Times must be grid nodes.
pub fn verify_harnack<T: Scalar>(
    g: &WeightedGraph<T>,
    trace: &SolveTrace<T>,
    n: T,
    pairs: &[TimePair<T>],
) -> Result<InequalityReport<T>, SolveError> {
    let mut nodes = Vec::with_capacity(pairs.len());
    for p in pairs {
        if !(T::zero() < p.t1 && p.t1 < p.t2) {
            return Err(SolveError::BadTimePair {
                t1: p.t1.to_f64_lossy(),
                t2: p.t2.to_f64_lossy(),
            });
        }
        let i1 = trace.node(p.t1).ok_or(SolveError::NotOnGrid(p.t1.to_f64_lossy()))?;
        let i2 = trace.node(p.t2).ok_or(SolveError::NotOnGrid(p.t2.to_f64_lossy()))?;
        if p.x >= g.len() || p.y >= g.len() {
            return Err(crate::error::OperatorError::LengthMismatch {
                expected: g.len(),
                got: p.x.max(p.y) + 1,
            }
            .into());
        }
        nodes.push((i1, i2));
    }
    let mut audit = Audit::new(trace, "harnack")
        .param("n", n)
        .param("alpha", trace.alpha)
        .param("pairs", T::from_usize_lossy(pairs.len()));
    let vacuous = match inadmissible(trace) {
        Some(v) => Some(v),
        None if !n.is_finite() => Some("requires a finite dimension".to_string()),
        None => curvature_fails(g, T::zero(), n)?,
    };
    if vacuous.is_none() {
        let mut dist: Vec<Option<Vec<Option<usize>>>> = vec![None; g.len()];
        for (p, &(i1, i2)) in pairs.iter().zip(&nodes) {
            let d = dist[p.x].get_or_insert_with(|| bfs_distances(g, p.x))[p.y].expect("graph is connected");
            let d = T::from_usize_lossy(d);
            let (t1, t2) = (trace.times[i1], trace.times[i2]);
            let rhs = n * T::half() * (t2 / t1).ln() + T::two() * d * d / (trace.alpha * (t2 - t1));
            audit.check(trace.u[i1][p.x] - trace.u[i2][p.y], rhs, i1, p.x);
        }
    }
    Ok(audit.finish(g, vacuous))
}

/// Comparison with the linear flow of `e^{gamma u0}`: `P_t e^{gamma u0} <= e^{gamma u(t)}`
/// for `0 < gamma <= Omega` (`Omega e^Omega = 1`) and `>=` for `gamma >= e^2`.
/// Other `gamma` are rejected. Needs admissible initial data.
pub fn verify_comparison<T: Scalar>(
    g: &WeightedGraph<T>,
    trace: &SolveTrace<T>,
    gammas: &[T],
) -> Result<Vec<InequalityReport<T>>, SolveError> {
    let (omega, upper) = (T::lit(omega_constant()), T::lit(gamma_upper()));
    for &gm in gammas {
        if !(gm > T::zero()) || (gm > omega && gm < upper) {
            return Err(SolveError::UnprovenRegime(gm.to_f64_lossy()));
        }
    }
    let mut out = Vec::with_capacity(gammas.len());
    for &gm in gammas {
        let lower = gm <= omega;
        let name = if lower { "comparison_lower" } else { "comparison_upper" };
        let mut audit = Audit::new(trace, name).param("gamma", gm).param(if lower { "omega" } else { "gamma_1" }, if lower { omega } else { upper });
        let vacuous = inadmissible(trace);
        if vacuous.is_none() {
            let e0: Vec<T> = trace.u0().iter().map(|&v| (gm * v).exp()).collect();
            let linear = trace
                .times
                .par_iter()
                .map(|&t| apply_semigroup(g, t, &e0, T::tol(1e-14, 16.0)))
                .collect::<Result<Vec<_>, _>>()?;
            for (i, (lin, u)) in linear.iter().zip(&trace.u).enumerate() {
                for x in 0..g.len() {
                    let nonlinear = (gm * u[x]).exp();
                    if lower {
                        audit.check(lin[x], nonlinear, i, x);
                    } else {
                        audit.check(nonlinear, lin[x], i, x);
                    }
                }
            }
        }
        out.push(audit.finish(g, vacuous));
    }
    Ok(out)
}
