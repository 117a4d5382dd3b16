//! Text format for vertex functions: one `<label> <value>` per line.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GraphError;
use crate::graph::WeightedGraph;
use crate::scalar::Scalar;

/// Absent labels default to zero; `#` starts a comment.
pub fn parse_vertex_function<T: Scalar>(g: &WeightedGraph<T>, text: &str) -> Result<Vec<T>, GraphError> {
    let mut f = vec![T::zero(); g.len()];
    let mut seen = vec![false; g.len()];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            [label, value] => {
                let x = g.index_of(label).ok_or_else(|| GraphError::UnknownVertex(label.to_string()))?;
                if std::mem::replace(&mut seen[x], true) {
                    return Err(GraphError::Parse {
                        line,
                        msg: format!("duplicate value for `{label}`"),
                    });
                }
                let v: f64 = value.parse().map_err(|_| GraphError::Parse {
                    line,
                    msg: format!("invalid number `{value}`"),
                })?;
                if !v.is_finite() {
                    return Err(GraphError::Parse {
                        line,
                        msg: "values must be finite".into(),
                    });
                }
                f[x] = T::lit(v);
            }
            _ => {
                return Err(GraphError::Parse {
                    line,
                    msg: format!("expected `<label> <value>`, got `{}`", raw.trim()),
                })
            }
        }
    }
    Ok(f)
}

pub fn write_vertex_function<T: Scalar>(g: &WeightedGraph<T>, f: &[T]) -> String {
    g.labels()
        .iter()
        .zip(f)
        .map(|(l, v)| format!("{l} {v}\n"))
        .collect()
}

/// `len` independent uniform values in `[-1, 1]`, reproducible from `seed`.
pub fn random_function<T: Scalar>(len: usize, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| T::lit(rng.random_range(-1.0..=1.0))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cycle_graph;

    #[test]
    fn random_functions_are_seeded() {
        let a: Vec<f64> = random_function(10, 3);
        assert_eq!(a, random_function::<f64>(10, 3));
        assert_ne!(a, random_function::<f64>(10, 4));
        assert!(a.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn defaults_and_round_trip() {
        let g = cycle_graph::<f64>(4);
        let f = parse_vertex_function(&g, "# values\n1 2.5e-1\n3 -1\n").unwrap();
        assert_eq!(f, vec![0.0, 0.25, 0.0, -1.0]);
        assert_eq!(parse_vertex_function(&g, &write_vertex_function(&g, &f)).unwrap(), f);
    }

    #[test]
    fn rejects_unknown_label() {
        let g = cycle_graph::<f64>(4);
        assert_eq!(
            parse_vertex_function(&g, "9 1\n").unwrap_err(),
            GraphError::UnknownVertex("9".into())
        );
    }
}
