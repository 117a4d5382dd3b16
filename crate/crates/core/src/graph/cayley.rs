//! Cayley graphs of finitely generated groups.

use serde::Serialize;

use super::truncate::{truncate, BallTruncation, BoundaryMode, NeighborOracle};
use super::{LaplacianMode, WeightedGraph};
use crate::error::GraphError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GroupElement {
    /// Integer tuple, reduced modulo the group's moduli where present.
    Abelian(Vec<i64>),
    /// Permutation in one-line notation: `k -> perm[k]`.
    Perm(Vec<usize>),
}

impl std::fmt::Display for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (open, close, parts): (&str, &str, Vec<String>) = match self {
            GroupElement::Abelian(v) => ("(", ")", v.iter().map(i64::to_string).collect()),
            GroupElement::Perm(p) => ("[", "]", p.iter().map(usize::to_string).collect()),
        };
        write!(f, "{open}{}{close}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    IntegerLattice { dim: usize },
    Torus { dim: usize, modulus: u32 },
    Cyclic { modulus: u32 },
    Symmetric { n: usize },
    /// `Z^d` or a product of cyclic groups, with caller-supplied generators.
    CustomAbelian { moduli: Option<Vec<u32>> },
}

/// A group together with a symmetric generating family `S`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub generators: Vec<GroupElement>,
}

fn unit_vectors(dim: usize) -> Vec<GroupElement> {
    let mut gens = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        for sign in [1, -1] {
            let mut v = vec![0; dim];
            v[i] = sign;
            gens.push(GroupElement::Abelian(v));
        }
    }
    gens
}

impl GroupSpec {
    /// `Z^d` with `S = {+-e_i}`.
    pub fn integer_lattice(dim: usize) -> Self {
        Self {
            kind: GroupKind::IntegerLattice { dim },
            generators: unit_vectors(dim),
        }
    }

    /// `(Z/mZ)^d` with `S = {+-e_i}`.
    pub fn torus(dim: usize, modulus: u32) -> Self {
        Self {
            kind: GroupKind::Torus { dim, modulus },
            generators: unit_vectors(dim),
        }
    }

    pub fn cyclic(modulus: u32) -> Self {
        Self {
            kind: GroupKind::Cyclic { modulus },
            generators: unit_vectors(1),
        }
    }

    /// `S_n` generated by all transpositions.
    pub fn symmetric(n: usize) -> Self {
        let mut generators = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut p: Vec<usize> = (0..n).collect();
                p.swap(i, j);
                generators.push(GroupElement::Perm(p));
            }
        }
        Self {
            kind: GroupKind::Symmetric { n },
            generators,
        }
    }

    pub fn custom_abelian(generators: Vec<Vec<i64>>, moduli: Option<Vec<u32>>) -> Self {
        Self {
            kind: GroupKind::CustomAbelian { moduli },
            generators: generators.into_iter().map(GroupElement::Abelian).collect(),
        }
    }

    fn moduli(&self) -> Option<Vec<u32>> {
        match &self.kind {
            GroupKind::IntegerLattice { .. } => None,
            GroupKind::Torus { dim, modulus } => Some(vec![*modulus; *dim]),
            GroupKind::Cyclic { modulus } => Some(vec![*modulus]),
            GroupKind::Symmetric { .. } => None,
            GroupKind::CustomAbelian { moduli } => moduli.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self.kind {
            GroupKind::Symmetric { .. } => true,
            _ => self.moduli().is_some(),
        }
    }

    fn dim(&self) -> usize {
        match &self.kind {
            GroupKind::IntegerLattice { dim } | GroupKind::Torus { dim, .. } => *dim,
            GroupKind::Cyclic { .. } => 1,
            GroupKind::Symmetric { n } => *n,
            GroupKind::CustomAbelian { moduli } => match (moduli, self.generators.first()) {
                (Some(m), _) => m.len(),
                (None, Some(GroupElement::Abelian(v))) => v.len(),
                _ => 0,
            },
        }
    }
}

/// Lazy neighbor oracle over a Cayley graph; `neighbors(x)` lists `x * s` in generator order.
#[derive(Debug, Clone)]
pub struct CayleyOracle<T> {
    moduli: Option<Vec<u32>>,
    dim: usize,
    perm: bool,
    generators: Vec<GroupElement>,
    mode: LaplacianMode,
    weight: T,
    mu: T,
}

impl<T: Scalar> CayleyOracle<T> {
    /// Validates `S` (identity excluded, closed under inversion) and removes duplicates.
    pub fn new(spec: GroupSpec, mode: LaplacianMode) -> Result<Self, GraphError> {
        let moduli = spec.moduli();
        let dim = spec.dim();
        let perm = matches!(spec.kind, GroupKind::Symmetric { .. });
        if dim == 0 {
            return Err(GraphError::InvalidGroup("group of dimension 0".into()));
        }
        if let Some(m) = &moduli {
            if m.len() != dim || m.contains(&0) {
                return Err(GraphError::InvalidGroup("moduli must be positive, one per coordinate".into()));
            }
        }
        let mut oracle = Self {
            moduli,
            dim,
            perm,
            generators: Vec::new(),
            mode,
            weight: T::one(),
            mu: T::one(),
        };
        let identity = oracle.identity();
        let mut gens: Vec<GroupElement> = Vec::new();
        for g in spec.generators {
            let g = oracle.reduce(g)?;
            if g == identity {
                return Err(GraphError::InvalidGroup("identity in generating family".into()));
            }
            if !gens.contains(&g) {
                gens.push(g);
            }
        }
        if gens.is_empty() {
            return Err(GraphError::InvalidGroup("empty generating family".into()));
        }
        for g in &gens {
            let inv = oracle.inverse(g);
            if !gens.contains(&inv) {
                return Err(GraphError::InvalidGroup(format!("generator {g} has no inverse {inv} in S")));
            }
        }
        let k = T::from_usize_lossy(gens.len());
        oracle.weight = match mode {
            LaplacianMode::Markov => T::one() / k,
            LaplacianMode::Unnormalized => T::one(),
        };
        oracle.mu = k;
        oracle.generators = gens;
        Ok(oracle)
    }

    pub fn identity(&self) -> GroupElement {
        if self.perm {
            GroupElement::Perm((0..self.dim).collect())
        } else {
            GroupElement::Abelian(vec![0; self.dim])
        }
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    fn reduce(&self, g: GroupElement) -> Result<GroupElement, GraphError> {
        match g {
            GroupElement::Abelian(mut v) if !self.perm => {
                if v.len() != self.dim {
                    return Err(GraphError::InvalidGroup(format!("generator has {} coordinates", v.len())));
                }
                if let Some(m) = &self.moduli {
                    for (c, &q) in v.iter_mut().zip(m) {
                        *c = c.rem_euclid(i64::from(q));
                    }
                }
                Ok(GroupElement::Abelian(v))
            }
            GroupElement::Perm(p) if self.perm => {
                let mut seen = vec![false; self.dim];
                if p.len() != self.dim || p.iter().any(|&i| i >= self.dim || std::mem::replace(&mut seen[i], true)) {
                    return Err(GraphError::InvalidGroup("not a permutation".into()));
                }
                Ok(GroupElement::Perm(p))
            }
            other => Err(GraphError::InvalidGroup(format!("element {other} does not belong to the group"))),
        }
    }

    fn inverse(&self, g: &GroupElement) -> GroupElement {
        match g {
            GroupElement::Abelian(v) => {
                let neg = GroupElement::Abelian(v.iter().map(|c| -c).collect());
                self.reduce(neg).expect("inverse of a group element")
            }
            GroupElement::Perm(p) => {
                let mut inv = vec![0; p.len()];
                for (k, &pk) in p.iter().enumerate() {
                    inv[pk] = k;
                }
                GroupElement::Perm(inv)
            }
        }
    }

    /// Right multiplication `x * s`.
    pub fn mul(&self, x: &GroupElement, s: &GroupElement) -> GroupElement {
        match (x, s) {
            (GroupElement::Abelian(a), GroupElement::Abelian(b)) => {
                let mut v: Vec<i64> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                if let Some(m) = &self.moduli {
                    for (c, &q) in v.iter_mut().zip(m) {
                        *c = c.rem_euclid(i64::from(q));
                    }
                }
                GroupElement::Abelian(v)
            }
            // (x s)(k) = x(s(k))
            (GroupElement::Perm(a), GroupElement::Perm(b)) => GroupElement::Perm(b.iter().map(|&k| a[k]).collect()),
            _ => panic!("mixed group elements"),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.perm || self.moduli.is_some()
    }
}

impl<T: Scalar> NeighborOracle<T> for CayleyOracle<T> {
    type Vertex = GroupElement;

    fn neighbors(&self, x: &GroupElement) -> Vec<(GroupElement, T)> {
        self.generators.iter().map(|s| (self.mul(x, s), self.weight)).collect()
    }

    fn measure(&self, _: &GroupElement) -> T {
        self.mu
    }

    fn label(&self, x: &GroupElement) -> String {
        x.to_string()
    }

    fn mode(&self) -> LaplacianMode {
        self.mode
    }

    fn generator_labels(&self) -> Option<Vec<String>> {
        Some(self.generators.iter().map(ToString::to_string).collect())
    }
}

/// Word-metric ball (or the whole finite group) as a [`BallTruncation`].
pub fn cayley_truncation<T: Scalar>(
    spec: GroupSpec,
    radius: Option<usize>,
    mode: LaplacianMode,
    boundary: BoundaryMode,
    margin: usize,
) -> Result<BallTruncation<T>, GraphError> {
    let oracle = CayleyOracle::<T>::new(spec, mode)?;
    if radius.is_none() && !oracle.is_finite() {
        return Err(GraphError::InvalidGroup("infinite group requires a radius".into()));
    }
    truncate(&oracle, &oracle.identity(), radius, boundary, margin)
}

/// Cayley graph of `spec`, reflecting truncation at `radius` when given.
pub fn generate_cayley<T: Scalar>(
    spec: GroupSpec,
    radius: Option<usize>,
    mode: LaplacianMode,
) -> Result<WeightedGraph<T>, GraphError> {
    cayley_truncation(spec, radius, mode, BoundaryMode::Reflecting, 0).map(|t| t.graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{distance, diameter};

    #[test]
    fn cyclic_five() {
        let g = generate_cayley::<f64>(GroupSpec::cyclic(5), None, LaplacianMode::Markov).unwrap();
        assert_eq!(g.len(), 5);
        assert!(g.measure().iter().all(|&m| m == 2.0));
        for x in 0..5 {
            assert!(g.neighbors(x).all(|(_, p)| p == 0.5));
        }
        assert_eq!(diameter(&g), 2);
        assert_eq!(g.cayley().unwrap().num_generators(), 2);
    }

    #[test]
    fn cyclic_two_has_one_generator() {
        let g = generate_cayley::<f64>(GroupSpec::cyclic(2), None, LaplacianMode::Markov).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.weight(0, 1), Some(1.0));
        assert_eq!(g.valence(0), 1);
    }

    #[test]
    fn symmetric_three() {
        let g = generate_cayley::<f64>(GroupSpec::symmetric(3), None, LaplacianMode::Unnormalized).unwrap();
        assert_eq!(g.len(), 6);
        assert!((0..6).all(|x| g.valence(x) == 3 && g.weight(x, x).is_none()));
        // bipartite: transpositions flip parity, so neighbors are at odd distance
        for x in 0..6 {
            for (y, _) in g.neighbors(x) {
                assert!(distance(&g, 0, x).unwrap() % 2 != distance(&g, 0, y).unwrap() % 2);
            }
        }
        assert_eq!(g.label(0), "[0,1,2]");
    }

    #[test]
    fn lattice_ball_size() {
        let g = generate_cayley::<f64>(GroupSpec::integer_lattice(2), Some(6), LaplacianMode::Markov).unwrap();
        assert_eq!(g.len(), 2 * 36 + 2 * 6 + 1);
    }

    #[test]
    fn lattice_needs_radius() {
        assert!(generate_cayley::<f64>(GroupSpec::integer_lattice(2), None, LaplacianMode::Markov).is_err());
    }

    #[test]
    fn invalid_families() {
        let no_inverse = GroupSpec::custom_abelian(vec![vec![1, 0], vec![0, 1], vec![0, -1]], None);
        assert!(CayleyOracle::<f64>::new(no_inverse, LaplacianMode::Markov).is_err());
        let identity = GroupSpec::custom_abelian(vec![vec![3], vec![-3]], Some(vec![3]));
        assert!(CayleyOracle::<f64>::new(identity, LaplacianMode::Markov).is_err());
        assert!(CayleyOracle::<f64>::new(GroupSpec::cyclic(1), LaplacianMode::Markov).is_err());
    }

    #[test]
    fn permutation_right_multiplication() {
        let o = CayleyOracle::<f64>::new(GroupSpec::symmetric(3), LaplacianMode::Markov).unwrap();
        let x = GroupElement::Perm(vec![1, 2, 0]);
        let s = GroupElement::Perm(vec![1, 0, 2]);
        assert_eq!(o.mul(&x, &s), GroupElement::Perm(vec![2, 1, 0]));
    }

    #[test]
    fn table_matches_kernel() {
        let g = generate_cayley::<f64>(GroupSpec::torus(2, 5), None, LaplacianMode::Unnormalized).unwrap();
        let t = g.cayley().unwrap();
        for x in 0..g.len() {
            for i in 0..t.num_generators() {
                let y = t.translate(x, i).unwrap();
                assert_eq!(g.weight(x, y), Some(1.0));
            }
        }
    }
}
