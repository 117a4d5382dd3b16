//! Finite windows onto possibly infinite graphs.

use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use super::{CayleyTable, Enforce, LaplacianMode, RawGraph, WeightedGraph};
use crate::error::GraphError;
use crate::scalar::Scalar;

/// Lazy neighbor access to a locally finite graph.
pub trait NeighborOracle<T: Scalar> {
    type Vertex: Clone + Eq + Hash;

    /// `(y, p(x,y))` for every kernel entry of `x`.
    fn neighbors(&self, x: &Self::Vertex) -> Vec<(Self::Vertex, T)>;
    fn measure(&self, x: &Self::Vertex) -> T;
    fn label(&self, x: &Self::Vertex) -> String;
    fn mode(&self) -> LaplacianMode;

    /// For Cayley oracles: generator labels, with `neighbors` returning exactly
    /// one translate per generator in this order.
    fn generator_labels(&self) -> Option<Vec<String>> {
        None
    }
}

impl<T: Scalar> NeighborOracle<T> for WeightedGraph<T> {
    type Vertex = usize;

    fn neighbors(&self, x: &usize) -> Vec<(usize, T)> {
        WeightedGraph::neighbors(self, *x).collect()
    }

    fn measure(&self, x: &usize) -> T {
        self.mu(*x)
    }

    fn label(&self, x: &usize) -> String {
        WeightedGraph::label(self, *x).to_string()
    }

    fn mode(&self) -> LaplacianMode {
        WeightedGraph::mode(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Dropped kernel mass is returned as a self-loop.
    #[default]
    Reflecting,
    /// Rows are left deficient; the graph is flagged non-stochastic.
    AbsorbingFlagged,
}

impl std::str::FromStr for BoundaryMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reflecting" => Ok(Self::Reflecting),
            "absorbing_flagged" | "absorbing" => Ok(Self::AbsorbingFlagged),
            other => Err(format!("unknown boundary mode `{other}`")),
        }
    }
}

/// A finite ball `B(x0, R)` cut out of a larger graph.
#[derive(Debug, Clone)]
pub struct BallTruncation<T> {
    pub graph: WeightedGraph<T>,
    /// Index of `x0` in `graph` (always 0: vertices are ordered breadth-first).
    pub center: usize,
    /// `None` when the source was enumerated exhaustively.
    pub radius: Option<usize>,
    pub margin: usize,
    pub boundary_mode: BoundaryMode,
    /// Distance from the center, per vertex.
    pub depth: Vec<usize>,
    /// Kernel mass removed from each row.
    pub dropped: Vec<T>,
}

impl<T: Scalar> BallTruncation<T> {
    /// True when the source was fully enumerated: nothing was cut.
    pub fn is_exhaustive(&self) -> bool {
        self.dropped.iter().all(|d| *d == T::zero())
    }

    /// `d(x0, x) <= R - margin`.
    pub fn is_trusted(&self, x: usize) -> bool {
        match self.radius {
            None => true,
            Some(r) => self.is_exhaustive() || self.depth[x] + self.margin <= r,
        }
    }

    pub fn trusted_vertices(&self) -> Vec<usize> {
        (0..self.graph.len()).filter(|&x| self.is_trusted(x)).collect()
    }

    /// Vertices whose rows lost mass.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.graph.len()).filter(|&x| self.dropped[x] > T::zero()).collect()
    }

    /// Largest `r` such that every ball `B(x, r)` with trusted `x` stays inside the window.
    pub fn trusted_depth(&self) -> Option<usize> {
        self.radius.map(|r| r.saturating_sub(self.margin))
    }
}

/// Enumerates `B(x0, R)` breadth-first, each layer sorted by label, and builds
/// the induced finite graph. `radius = None` enumerates the whole (finite) source.
pub fn truncate<T, O>(
    oracle: &O,
    x0: &O::Vertex,
    radius: Option<usize>,
    boundary: BoundaryMode,
    margin: usize,
) -> Result<BallTruncation<T>, GraphError>
where
    T: Scalar,
    O: NeighborOracle<T> + ?Sized,
{
    if let Some(r) = radius {
        if margin > r {
            return Err(GraphError::MarginExceedsRadius { margin, radius: r });
        }
    }
    let mut order: Vec<O::Vertex> = vec![x0.clone()];
    let mut labels: Vec<String> = vec![oracle.label(x0)];
    let mut depth: Vec<usize> = vec![0];
    let mut index: HashMap<O::Vertex, usize> = HashMap::from([(x0.clone(), 0)]);
    let mut neighbor_cache: Vec<Vec<(O::Vertex, T)>> = Vec::new();
    let mut layer_start = 0;
    let mut d = 0;
    loop {
        let layer_end = order.len();
        let mut next: Vec<(String, O::Vertex)> = Vec::new();
        for i in layer_start..layer_end {
            let nbrs = oracle.neighbors(&order[i]);
            if radius.is_none_or(|r| d < r) {
                for (y, _) in &nbrs {
                    if !index.contains_key(y) && !next.iter().any(|(_, z)| z == y) {
                        next.push((oracle.label(y), y.clone()));
                    }
                }
            }
            neighbor_cache.push(nbrs);
        }
        if next.is_empty() {
            break;
        }
        next.sort_by(|a, b| a.0.cmp(&b.0));
        d += 1;
        layer_start = layer_end;
        for (label, v) in next {
            index.insert(v.clone(), order.len());
            order.push(v);
            labels.push(label);
            depth.push(d);
        }
    }

    let n = order.len();
    let generators = oracle.generator_labels();
    let k = generators.as_ref().map_or(0, Vec::len);
    let mut table = vec![None; n * k];
    let mut rows = Vec::with_capacity(n);
    let mut dropped = Vec::with_capacity(n);
    for (x, nbrs) in neighbor_cache.into_iter().enumerate() {
        let mut row: Vec<(usize, T)> = Vec::with_capacity(nbrs.len() + 1);
        let mut lost = T::zero();
        for (i, (y, p)) in nbrs.into_iter().enumerate() {
            match index.get(&y) {
                Some(&yi) => {
                    if k > 0 {
                        table[x * k + i] = Some(yi);
                    }
                    row.push((yi, p));
                }
                None => lost += p,
            }
        }
        if lost > T::zero() && boundary == BoundaryMode::Reflecting {
            match row.iter_mut().find(|(y, _)| *y == x) {
                Some(entry) => entry.1 += lost,
                None => row.push((x, lost)),
            }
        }
        rows.push(row);
        dropped.push(lost);
    }
    let measure = order.iter().map(|v| oracle.measure(v)).collect();
    let cut = dropped.iter().any(|&l| l > T::zero());
    let absorbing_cut = cut && boundary == BoundaryMode::AbsorbingFlagged;
    let mut graph = WeightedGraph::assemble(
        RawGraph {
            labels,
            rows,
            measure,
            mode: oracle.mode(),
        },
        Enforce {
            row_sums: !absorbing_cut,
        },
    )?
    .with_stochastic(!absorbing_cut);
    if let Some(generator_labels) = generators {
        graph = graph.with_cayley(CayleyTable {
            generator_labels,
            table,
        });
    }
    Ok(BallTruncation {
        graph,
        center: 0,
        radius,
        margin,
        boundary_mode: boundary,
        depth,
        dropped,
    })
}
