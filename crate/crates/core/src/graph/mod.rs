//! Weighted graphs `(V, p, mu)` with bounded geometry.
//!
//! A graph stores its Markov (or conductance-like) kernel in compressed
//! sparse row layout. Self-loops are allowed; they never contribute to
//! `Delta`, `Gamma` or `Gamma_2` because `f(x) - f(x) = 0`.

mod cayley;
mod families;
mod format;
mod metric;
mod truncate;

use std::collections::HashMap;

use serde::Serialize;

use crate::error::GraphError;
use crate::scalar::Scalar;
use crate::tolerance::{TOL_MARKOV, TOL_REV};

pub use cayley::{cayley_truncation, generate_cayley, CayleyOracle, GroupElement, GroupKind, GroupSpec};
pub use families::{
    complete_graph, cycle_graph, path_graph_example, random_conductance_graph, star_graph, two_vertex,
    z_non_h2_example, RandomConductanceParams,
};
pub use format::{parse_graph, write_graph, GraphFileFormat};
pub use metric::{ball, bfs_distances, diameter, distance, volume};
pub use truncate::{truncate, BallTruncation, BoundaryMode, NeighborOracle};

/// How kernel weights are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LaplacianMode {
    /// Rows of `p` sum to one.
    Markov,
    /// Kernel weights are used as given (e.g. Cayley graphs with `p = 1`).
    Unnormalized,
}

impl std::str::FromStr for LaplacianMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markov" => Ok(Self::Markov),
            "unnormalized" => Ok(Self::Unnormalized),
            other => Err(format!("unknown laplacian mode `{other}`")),
        }
    }
}

impl std::fmt::Display for LaplacianMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Markov => "markov",
            Self::Unnormalized => "unnormalized",
        })
    }
}

/// Right-multiplication table of a Cayley graph: `table[x * k + i]` is `x * s_i`,
/// or `None` when the translate falls outside a truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyTable {
    pub generator_labels: Vec<String>,
    pub table: Vec<Option<usize>>,
}

impl CayleyTable {
    pub fn num_generators(&self) -> usize {
        self.generator_labels.len()
    }

    pub fn translate(&self, x: usize, generator: usize) -> Option<usize> {
        self.table[x * self.num_generators() + generator]
    }
}

/// Finite weighted graph. Immutable after construction.
#[derive(Debug, Clone)]
pub struct WeightedGraph<T> {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<T>,
    measure: Vec<T>,
    alpha: T,
    mode: LaplacianMode,
    stochastic: bool,
    cayley: Option<CayleyTable>,
}

/// Row-wise kernel before validation: `rows[x]` lists `(y, p(x,y))`.
pub(crate) struct RawGraph<T> {
    pub labels: Vec<String>,
    pub rows: Vec<Vec<(usize, T)>>,
    pub measure: Vec<T>,
    pub mode: LaplacianMode,
}

/// Which invariants are enforced when assembling a graph.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Enforce {
    pub row_sums: bool,
}

impl<T: Scalar> WeightedGraph<T> {
    pub(crate) fn assemble(raw: RawGraph<T>, enforce: Enforce) -> Result<Self, GraphError> {
        let RawGraph {
            labels,
            rows,
            measure,
            mode,
        } = raw;
        let n = labels.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(l.clone()));
            }
        }
        for (i, m) in measure.iter().enumerate() {
            if !(m.is_finite() && *m > T::zero()) {
                return Err(GraphError::BadMeasure(labels[i].clone()));
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for (x, row) in rows.iter().enumerate() {
            if row.is_empty() {
                return Err(GraphError::EmptyNeighborhood(labels[x].clone()));
            }
            for &(y, p) in row {
                if !(p.is_finite() && p > T::zero()) {
                    return Err(GraphError::BadWeight {
                        x: labels[x].clone(),
                        y: labels[y].clone(),
                    });
                }
                targets.push(y);
                weights.push(p);
            }
            offsets.push(targets.len());
        }
        let alpha = weights.iter().fold(T::infinity(), |a, &w| a.min(w));
        let g = WeightedGraph {
            labels,
            index,
            offsets,
            targets,
            weights,
            measure,
            alpha,
            mode,
            stochastic: mode == LaplacianMode::Markov,
            cayley: None,
        };
        g.check_reversibility()?;
        if enforce.row_sums && mode == LaplacianMode::Markov {
            g.check_row_sums()?;
        }
        g.check_connected()?;
        Ok(g)
    }

    pub(crate) fn with_cayley(mut self, table: CayleyTable) -> Self {
        self.cayley = Some(table);
        self
    }

    pub(crate) fn with_stochastic(mut self, stochastic: bool) -> Self {
        self.stochastic = stochastic && self.mode == LaplacianMode::Markov;
        self
    }

    fn check_reversibility(&self) -> Result<(), GraphError> {
        let tol = T::tol(TOL_REV, 8.0);
        for x in 0..self.len() {
            for (y, pxy) in self.neighbors(x) {
                let pyx = self.weight(y, x).unwrap_or_else(T::zero);
                let lhs = pxy * self.measure[x];
                let rhs = pyx * self.measure[y];
                if (lhs - rhs).abs() > tol * lhs.max(rhs) {
                    return Err(GraphError::Reversibility {
                        x: self.labels[x].clone(),
                        y: self.labels[y].clone(),
                        lhs: lhs.to_f64_lossy(),
                        rhs: rhs.to_f64_lossy(),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_row_sums(&self) -> Result<(), GraphError> {
        let tol = T::tol(TOL_MARKOV, 8.0);
        for x in 0..self.len() {
            let s = self.row_sum(x);
            if (s - T::one()).abs() > tol {
                return Err(GraphError::RowSum {
                    x: self.labels[x].clone(),
                    sum: s.to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let dist = bfs_distances(self, 0);
        match dist.iter().position(|d| d.is_none()) {
            Some(v) => Err(GraphError::Disconnected(self.labels[v].clone())),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn measure(&self) -> &[T] {
        &self.measure
    }

    pub fn mu(&self, x: usize) -> T {
        self.measure[x]
    }

    /// Minimum kernel weight over all edges (including self-loops).
    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Accepts a user-supplied ellipticity constant only as an assertion.
    pub fn assert_alpha(&self, asserted: T) -> Result<(), GraphError> {
        if asserted > self.alpha * (T::one() + T::tol(TOL_REV, 8.0)) {
            Err(GraphError::AlphaAssertion {
                asserted: asserted.to_f64_lossy(),
                observed: self.alpha.to_f64_lossy(),
            })
        } else {
            Ok(())
        }
    }

    pub fn mode(&self) -> LaplacianMode {
        self.mode
    }

    /// True when `P_t 1 = 1` holds: markov mode without absorbing boundary.
    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    pub fn cayley(&self) -> Option<&CayleyTable> {
        self.cayley.as_ref()
    }

    /// `(y, p(x,y))` for every kernel entry of row `x`, self-loops included.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.offsets[x]..self.offsets[x + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn row(&self, x: usize) -> (&[usize], &[T]) {
        let range = self.offsets[x]..self.offsets[x + 1];
        (&self.targets[range.clone()], &self.weights[range])
    }

    /// Valence `N(x)`: number of kernel entries in row `x`.
    pub fn valence(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    pub fn weight(&self, x: usize, y: usize) -> Option<T> {
        self.neighbors(x).find(|&(z, _)| z == y).map(|(_, p)| p)
    }

    pub fn row_sum(&self, x: usize) -> T {
        self.row(x).1.iter().copied().sum()
    }

    /// `sup_x sum_y p(x,y)`; bounds `||Delta||_{inf->inf} <= 2 * max_row_sum`.
    pub fn max_row_sum(&self) -> T {
        (0..self.len()).fold(T::zero(), |a, x| a.max(self.row_sum(x)))
    }

    pub fn num_kernel_entries(&self) -> usize {
        self.targets.len()
    }

    /// Recompute every bounded-geometry diagnostic.
    pub fn validate(&self) -> GraphValidationReport<T> {
        let mut markov_residual_max = T::zero();
        let mut reversibility_residual_max = T::zero();
        let mut max_valence = 0;
        let mut measure_ratio_ok = true;
        let mut d_mu_sup = T::zero();
        let slack = T::one() + T::tol(TOL_REV, 8.0);
        for x in 0..self.len() {
            let s = self.row_sum(x);
            markov_residual_max = markov_residual_max.max((s - T::one()).abs());
            // m(x)/mu(x) with m(x) = sum_y omega_xy = sum_y p(x,y) mu(x)
            d_mu_sup = d_mu_sup.max(s);
            max_valence = max_valence.max(self.valence(x));
            for (y, pxy) in self.neighbors(x) {
                let pyx = self.weight(y, x).unwrap_or_else(T::zero);
                let lhs = pxy * self.measure[x];
                let rhs = pyx * self.measure[y];
                let denom = lhs.max(rhs);
                if denom > T::zero() {
                    reversibility_residual_max = reversibility_residual_max.max((lhs - rhs).abs() / denom);
                }
                let (mx, my) = (self.measure[x], self.measure[y]);
                if self.alpha * mx > my * slack || my > mx / self.alpha * slack {
                    measure_ratio_ok = false;
                }
            }
        }
        let valence_cap = (T::one() / self.alpha * slack).floor();
        let valence_bound_ok = T::from_usize_lossy(max_valence) <= valence_cap;
        GraphValidationReport {
            vertices: self.len(),
            mode: self.mode,
            alpha_observed: self.alpha,
            markov_residual_max,
            reversibility_residual_max,
            connected: bfs_distances(self, 0).iter().all(Option::is_some),
            max_valence,
            valence_bound_ok,
            measure_ratio_ok,
            d_mu_sup,
        }
    }
}

/// Bounded-geometry diagnostics of a graph.
#[derive(Debug, Clone, Serialize)]
pub struct GraphValidationReport<T: Scalar> {
    pub vertices: usize,
    pub mode: LaplacianMode,
    pub alpha_observed: T,
    pub markov_residual_max: T,
    pub reversibility_residual_max: T,
    pub connected: bool,
    pub max_valence: usize,
    /// `N(x) <= 1/alpha` for every vertex.
    pub valence_bound_ok: bool,
    /// `alpha mu(x) <= mu(y) <= mu(x)/alpha` across every edge.
    pub measure_ratio_ok: bool,
    /// `sup_x m(x)/mu(x)`.
    pub d_mu_sup: T,
}

/// Builds a graph from vertex measures and two-sided kernel weights.
#[derive(Debug, Clone)]
pub struct KernelBuilder<T> {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    measure: Vec<T>,
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> Default for KernelBuilder<T> {
    fn default() -> Self {
        Self {
            labels: Vec::new(),
            index: HashMap::new(),
            measure: Vec::new(),
            rows: Vec::new(),
        }
    }
}

impl<T: Scalar> KernelBuilder<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, label: impl Into<String>, mu: T) -> Result<usize, GraphError> {
        let label = label.into();
        if self.index.contains_key(&label) {
            return Err(GraphError::DuplicateVertex(label));
        }
        let id = self.labels.len();
        self.index.insert(label.clone(), id);
        self.labels.push(label);
        self.measure.push(mu);
        self.rows.push(Vec::new());
        Ok(id)
    }

    pub fn id(&self, label: &str) -> Result<usize, GraphError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(label.to_string()))
    }

    /// Adds `p(x,y) = pxy` and `p(y,x) = pyx`. A self-loop uses `pxy` once.
    pub fn edge(&mut self, x: &str, y: &str, pxy: T, pyx: T) -> Result<&mut Self, GraphError> {
        let (xi, yi) = (self.id(x)?, self.id(y)?);
        self.edge_ids(xi, yi, pxy, pyx)?;
        Ok(self)
    }

    pub fn edge_ids(&mut self, x: usize, y: usize, pxy: T, pyx: T) -> Result<(), GraphError> {
        if self.rows[x].iter().any(|&(z, _)| z == y) {
            return Err(GraphError::DuplicateEdge {
                x: self.labels[x].clone(),
                y: self.labels[y].clone(),
            });
        }
        for (a, b, p) in [(x, y, pxy), (y, x, pyx)] {
            if !(p.is_finite() && p > T::zero()) {
                return Err(GraphError::BadWeight {
                    x: self.labels[a].clone(),
                    y: self.labels[b].clone(),
                });
            }
        }
        self.rows[x].push((y, pxy));
        if x != y {
            self.rows[y].push((x, pyx));
        }
        Ok(())
    }

    pub fn build(self, mode: LaplacianMode) -> Result<WeightedGraph<T>, GraphError> {
        WeightedGraph::assemble(
            RawGraph {
                labels: self.labels,
                rows: self.rows,
                measure: self.measure,
                mode,
            },
            Enforce { row_sums: true },
        )
    }
}

/// Vertex measures plus edges `(x, y, p_xy, p_yx)`, validated into a graph.
pub fn build_from_kernel<T: Scalar>(
    vertices: &[(String, T)],
    edges: &[(String, String, T, T)],
    mode: LaplacianMode,
) -> Result<WeightedGraph<T>, GraphError> {
    let mut b = KernelBuilder::new();
    for (l, mu) in vertices {
        b.vertex(l.clone(), *mu)?;
    }
    for (x, y, pxy, pyx) in edges {
        b.edge(x, y, *pxy, *pyx)?;
    }
    b.build(mode)
}

/// Random-conductance construction: `p(x,y) = omega_xy / m(x)`, `mu = m`.
///
/// Vertices are labelled in order of first appearance.
pub fn build_from_conductance<T: Scalar>(
    conductances: &[(String, String, T)],
) -> Result<WeightedGraph<T>, GraphError> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut intern = |l: &String, labels: &mut Vec<String>| -> usize {
        *index.entry(l.clone()).or_insert_with(|| {
            labels.push(l.clone());
            labels.len() - 1
        })
    };
    let mut edges = Vec::with_capacity(conductances.len());
    for (x, y, w) in conductances {
        let xi = intern(x, &mut labels);
        let yi = intern(y, &mut labels);
        edges.push((xi, yi, *w));
    }
    build_from_conductance_ids(labels, &edges)
}

/// Index-based variant of [`build_from_conductance`].
pub fn build_from_conductance_ids<T: Scalar>(
    labels: Vec<String>,
    edges: &[(usize, usize, T)],
) -> Result<WeightedGraph<T>, GraphError> {
    let n = labels.len();
    let mut omega: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    for &(x, y, w) in edges {
        if !(w.is_finite() && w > T::zero()) {
            return Err(GraphError::BadWeight {
                x: labels[x].clone(),
                y: labels[y].clone(),
            });
        }
        if omega[x].iter().any(|&(z, _)| z == y) {
            return Err(GraphError::DuplicateEdge {
                x: labels[x].clone(),
                y: labels[y].clone(),
            });
        }
        omega[x].push((y, w));
        if x != y {
            omega[y].push((x, w));
        }
    }
    let mut measure = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for (x, row) in omega.into_iter().enumerate() {
        let m: T = row.iter().map(|&(_, w)| w).sum();
        if m <= T::zero() {
            return Err(GraphError::EmptyNeighborhood(labels[x].clone()));
        }
        measure.push(m);
        rows.push(row.into_iter().map(|(y, w)| (y, w / m)).collect());
    }
    WeightedGraph::assemble(
        RawGraph {
            labels,
            rows,
            measure,
            mode: LaplacianMode::Markov,
        },
        Enforce { row_sums: true },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> String {
        x.to_string()
    }

    #[test]
    fn two_vertex_kernel() {
        let g = build_from_kernel(
            &[(s("a"), 1.0), (s("b"), 1.0)],
            &[(s("a"), s("b"), 1.0, 1.0)],
            LaplacianMode::Markov,
        )
        .unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.alpha(), 1.0);
        assert!(g.is_stochastic());
    }

    #[test]
    fn path_kernel_reversible() {
        let g = build_from_kernel(
            &[(s("a"), 1.0), (s("b"), 2.0), (s("c"), 1.0)],
            &[(s("a"), s("b"), 1.0, 0.5), (s("b"), s("c"), 0.5, 1.0)],
            LaplacianMode::Markov,
        )
        .unwrap();
        assert_eq!(g.alpha(), 0.5);
        let r = g.validate();
        assert_eq!(r.reversibility_residual_max, 0.0);
        assert!(r.valence_bound_ok && r.measure_ratio_ok);
    }

    #[test]
    fn path_kernel_irreversible() {
        let err = build_from_kernel(
            &[(s("a"), 1.0), (s("b"), 1.0), (s("c"), 1.0)],
            &[(s("a"), s("b"), 1.0, 0.5), (s("b"), s("c"), 0.5, 1.0)],
            LaplacianMode::Markov,
        )
        .unwrap_err();
        match err {
            GraphError::Reversibility { x, y, .. } => assert_eq!((x.as_str(), y.as_str()), ("a", "b")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn row_sum_violation() {
        let err = build_from_kernel(
            &[(s("a"), 1.0), (s("b"), 1.0)],
            &[(s("a"), s("b"), 0.5, 0.5)],
            LaplacianMode::Markov,
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::RowSum { .. }));
        // the same kernel is fine without a row-sum constraint
        build_from_kernel(
            &[(s("a"), 1.0), (s("b"), 1.0)],
            &[(s("a"), s("b"), 0.5, 0.5)],
            LaplacianMode::Unnormalized,
        )
        .unwrap();
    }

    #[test]
    fn disconnected_and_isolated() {
        let mut b = KernelBuilder::<f64>::new();
        for l in ["a", "b", "c", "d"] {
            b.vertex(l, 1.0).unwrap();
        }
        b.edge("a", "b", 1.0, 1.0).unwrap();
        b.edge("c", "d", 1.0, 1.0).unwrap();
        assert!(matches!(b.build(LaplacianMode::Markov), Err(GraphError::Disconnected(_))));

        let mut b = KernelBuilder::<f64>::new();
        b.vertex("a", 1.0).unwrap();
        b.vertex("b", 1.0).unwrap();
        b.vertex("c", 1.0).unwrap();
        b.edge("a", "b", 1.0, 1.0).unwrap();
        assert!(matches!(
            b.build(LaplacianMode::Markov),
            Err(GraphError::EmptyNeighborhood(l)) if l == "c"
        ));
    }

    #[test]
    fn conductance_cycle_and_star() {
        let cyc: Vec<_> = (0..4).map(|i| (i.to_string(), ((i + 1) % 4).to_string(), 1.0)).collect();
        let g = build_from_conductance(&cyc).unwrap();
        assert_eq!(g.alpha(), 0.5);
        assert!(g.measure().iter().all(|&m| m == 2.0));

        let star: Vec<_> = (1..=3).map(|i| (s("c"), i.to_string(), 1.0_f64)).collect();
        let g = build_from_conductance(&star).unwrap();
        let c = g.index_of("c").unwrap();
        assert!(g.neighbors(c).all(|(_, p)| (p - 1.0 / 3.0).abs() < 1e-15));
        assert!(g.neighbors(g.index_of("1").unwrap()).all(|(_, p)| p == 1.0));
        assert!((g.alpha() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn isolated_conductance_vertex() {
        let err = build_from_conductance_ids::<f64>(vec![s("a"), s("b"), s("c")], &[(0, 1, 1.0)]).unwrap_err();
        assert!(matches!(err, GraphError::EmptyNeighborhood(l) if l == "c"));
    }

    #[test]
    fn alpha_assertion() {
        let g = two_vertex::<f64>();
        g.assert_alpha(1.0).unwrap();
        g.assert_alpha(0.3).unwrap();
        assert!(g.assert_alpha(1.5).is_err());
    }

    #[test]
    fn single_precision_graph() {
        let g = build_from_conductance::<f32>(&[(s("a"), s("b"), 0.3), (s("b"), s("c"), 0.7)]).unwrap();
        assert_eq!(g.len(), 3);
        assert!(g.validate().reversibility_residual_max < 1e-6);
    }
}
