//! Line-oriented graph text format.
//!
//! ```text
//! format kernel
//! mode markov
//! vertex a 1
//! vertex b 1
//! edge a b 1 1
//! ```

use super::{build_from_conductance, KernelBuilder, LaplacianMode, WeightedGraph};
use crate::error::GraphError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFileFormat {
    Kernel,
    Conductance,
}

fn parse_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse { line, msg: msg.into() }
}

fn number<T: Scalar>(tok: &str, line: usize) -> Result<T, GraphError> {
    tok.parse::<f64>()
        .map(T::lit)
        .map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

pub fn parse_graph<T: Scalar>(text: &str) -> Result<WeightedGraph<T>, GraphError> {
    let mut format: Option<GraphFileFormat> = None;
    let mut mode = LaplacianMode::Markov;
    let mut seen_record = false;
    let mut kernel = KernelBuilder::<T>::new();
    let mut conductances: Vec<(String, String, T)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, args)) = toks.split_first() else {
            continue;
        };
        match (head, args) {
            ("format", [f]) if !seen_record => {
                format = Some(match *f {
                    "kernel" => GraphFileFormat::Kernel,
                    "conductance" => GraphFileFormat::Conductance,
                    other => return Err(parse_err(line, format!("unknown format `{other}`"))),
                })
            }
            ("mode", [m]) if !seen_record => mode = m.parse().map_err(|e: String| parse_err(line, e))?,
            ("format" | "mode", _) if seen_record => return Err(parse_err(line, "header after records")),
            ("vertex", [label, mu]) => {
                seen_record = true;
                if format != Some(GraphFileFormat::Kernel) {
                    return Err(parse_err(line, "`vertex` records require `format kernel`"));
                }
                kernel.vertex(*label, number(mu, line)?)?;
            }
            ("edge", [x, y, pxy, pyx]) => {
                seen_record = true;
                if format != Some(GraphFileFormat::Kernel) {
                    return Err(parse_err(line, "`edge` records require `format kernel`"));
                }
                kernel.edge(x, y, number(pxy, line)?, number(pyx, line)?)?;
            }
            ("cond", [x, y, w]) => {
                seen_record = true;
                if format != Some(GraphFileFormat::Conductance) {
                    return Err(parse_err(line, "`cond` records require `format conductance`"));
                }
                conductances.push((x.to_string(), y.to_string(), number(w, line)?));
            }
            _ => return Err(parse_err(line, format!("malformed record `{}`", content.trim()))),
        }
    }
    match format {
        None => Err(parse_err(0, "missing `format` header")),
        Some(GraphFileFormat::Kernel) => kernel.build(mode),
        Some(GraphFileFormat::Conductance) => {
            if mode != LaplacianMode::Markov {
                return Err(parse_err(0, "conductance format is always markov"));
            }
            build_from_conductance(&conductances)
        }
    }
}

/// Serializes `g`; numbers use shortest round-trip formatting.
///
/// The conductance format stores `omega = p(x,y) mu(x)` and is only offered for markov graphs.
pub fn write_graph<T: Scalar>(g: &WeightedGraph<T>, format: GraphFileFormat) -> Result<String, GraphError> {
    use std::fmt::Write;
    let mut out = String::new();
    match format {
        GraphFileFormat::Kernel => {
            let _ = writeln!(out, "format kernel\nmode {}", g.mode());
            for x in 0..g.len() {
                let _ = writeln!(out, "vertex {} {}", g.label(x), g.mu(x));
            }
            for x in 0..g.len() {
                for (y, p) in g.neighbors(x).filter(|&(y, _)| y >= x) {
                    let back = g.weight(y, x).unwrap_or(p);
                    let _ = writeln!(out, "edge {} {} {} {}", g.label(x), g.label(y), p, back);
                }
            }
        }
        GraphFileFormat::Conductance => {
            if g.mode() != LaplacianMode::Markov {
                return Err(parse_err(0, "conductance format requires a markov graph"));
            }
            out.push_str("format conductance\nmode markov\n");
            for x in 0..g.len() {
                for (y, p) in g.neighbors(x).filter(|&(y, _)| y >= x) {
                    let _ = writeln!(out, "cond {} {} {}", g.label(x), g.label(y), p * g.mu(x));
                }
            }
        }
    }
    Ok(out)
}
