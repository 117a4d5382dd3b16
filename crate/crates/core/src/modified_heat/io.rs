//! CSV traces and Harnack pair files.

use std::fmt::Write;

use super::{SolveTrace, TimePair};
use crate::error::GraphError;
use crate::graph::WeightedGraph;
use crate::scalar::Scalar;

/// Columns `t,vertex,u,gamma,laplacian`, one row per node and vertex.
pub fn trace_csv<T: Scalar>(g: &WeightedGraph<T>, trace: &SolveTrace<T>) -> String {
    let mut out = String::from("t,vertex,u,gamma,laplacian\n");
    for (i, &t) in trace.times.iter().enumerate() {
        for x in 0..g.len() {
            let _ = writeln!(
                out,
                "{:.16e},{},{:.16e},{:.16e},{:.16e}",
                t.to_f64_lossy(),
                g.label(x),
                trace.u[i][x].to_f64_lossy(),
                trace.gamma[i][x].to_f64_lossy(),
                trace.laplacian[i][x].to_f64_lossy()
            );
        }
    }
    out
}

/// Lines `<x> <y> <t1> <t2>` with vertex labels; `#` starts a comment.
pub fn parse_pairs<T: Scalar>(g: &WeightedGraph<T>, text: &str) -> Result<Vec<TimePair<T>>, GraphError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let [x, y, t1, t2] = toks.as_slice() else {
            return Err(GraphError::Parse {
                line,
                msg: "expected `<x> <y> <t1> <t2>`".into(),
            });
        };
        let vertex = |l: &str| g.index_of(l).ok_or_else(|| GraphError::UnknownVertex(l.to_string()));
        let time = |s: &str| -> Result<T, GraphError> {
            s.parse::<f64>().ok().filter(|v| v.is_finite()).map(T::lit).ok_or_else(|| GraphError::Parse {
                line,
                msg: format!("invalid time `{s}`"),
            })
        };
        out.push(TimePair {
            x: vertex(x)?,
            y: vertex(y)?,
            t1: time(t1)?,
            t2: time(t2)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::two_vertex;
    use crate::modified_heat::{solve_rk4, SolveTrace};

    #[test]
    fn pairs_file() {
        let g = two_vertex::<f64>();
        let p = parse_pairs(&g, "# x y t1 t2\na b 0.25 0.75\n\nb a 1 2 # trailing\n").unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!((p[1].x, p[1].y, p[1].t2), (1, 0, 2.0));
        assert!(parse_pairs(&g, "a c 1 2").is_err());
        assert!(parse_pairs(&g, "a b 1").is_err());
    }

    #[test]
    fn csv_shape() {
        let g = two_vertex::<f64>();
        let t: SolveTrace<f64> = solve_rk4(&g, &[0.0, 0.5], 1.0, 0.01).unwrap();
        let csv = trace_csv(&g, &t);
        assert_eq!(csv.lines().count(), 1 + 2 * 101);
        assert!(csv.lines().nth(2).unwrap().starts_with("0.0000000000000000e0,b,5.0000000000000000e-1"));
    }
}
