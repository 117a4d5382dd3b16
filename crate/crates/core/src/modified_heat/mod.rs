//! The modified heat equation `du/dt = Delta u + Gamma u`.
//!
//! `solve_picard` follows the fixed-point construction
//! `u^k(t) = P_t u0 + int_0^t P_{t-s} Gamma u^{k-1}(s) ds` on windows no longer
//! than the local existence time; `solve_rk4` integrates the same system as an
//! ODE and serves as the oracle.

mod io;
mod picard;
mod rk4;
mod verify;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::SolveError;
use crate::graph::WeightedGraph;
use crate::operators::{gamma_sq, laplacian};
use crate::scalar::{sup_norm, Scalar};
use crate::tolerance::{PICARD_MAX_ITER, PICARD_TOL};

pub use io::{parse_pairs, trace_csv};
pub use picard::{solve_picard, PicardDiagnostics, PicardWindow};
pub use rk4::{solve_rk4, solve_rk4_on_grid};
pub use verify::{
    all_ordered_pairs, verify_comparison, verify_edge_oscillation, verify_gradient_decay, verify_harnack,
    verify_li_yau, InequalityReport, TimePair,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Picard,
    Rk4,
    Both,
}

impl FromStr for SolveMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "picard" => Ok(Self::Picard),
            "rk4" => Ok(Self::Rk4),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown method `{other}` (expected picard, rk4 or both)")),
        }
    }
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Picard => "picard",
            Self::Rk4 => "rk4",
            Self::Both => "both",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig<T: Scalar> {
    pub u0: Vec<T>,
    pub horizon: T,
    pub grid_step: T,
    pub method: SolveMethod,
    pub picard_tol: T,
    pub picard_max_iter: usize,
    /// Restart at half the local existence time until the horizon is covered.
    pub global_extension: bool,
    /// Longest Picard window, in grid steps.
    pub max_window_steps: usize,
    /// Minimum Simpson intervals inside one window.
    pub min_quadrature_intervals: usize,
}

impl<T: Scalar> SolveConfig<T> {
    pub fn new(u0: Vec<T>, horizon: T, grid_step: T) -> Self {
        Self {
            u0,
            horizon,
            grid_step,
            method: SolveMethod::Picard,
            picard_tol: T::lit(PICARD_TOL),
            picard_max_iter: PICARD_MAX_ITER,
            global_extension: false,
            max_window_steps: 32,
            min_quadrature_intervals: 16,
        }
    }

    pub fn method(mut self, method: SolveMethod) -> Self {
        self.method = method;
        self
    }

    pub fn global(mut self, on: bool) -> Self {
        self.global_extension = on;
        self
    }

    /// Number of grid steps covering the horizon.
    pub fn steps(&self) -> Result<usize, SolveError> {
        let mismatch = || SolveError::GridMismatch {
            step: self.grid_step.to_f64_lossy(),
            horizon: self.horizon.to_f64_lossy(),
        };
        if !(self.grid_step > T::zero()) || !(self.horizon > T::zero()) {
            return Err(mismatch());
        }
        let ratio = self.horizon / self.grid_step;
        let m = ratio.round();
        if (ratio - m).abs() > T::tol(1e-9, 64.0) * m.max(T::one()) || m < T::one() {
            return Err(mismatch());
        }
        m.to_usize().ok_or_else(mismatch)
    }
}

/// `T_local = 1 / (256 ||Gamma u||_inf)`, infinite for constant `u`.
pub fn local_existence_time<T: Scalar>(gamma_sup: T) -> T {
    if gamma_sup > T::zero() {
        T::one() / (T::lit(256.0) * gamma_sup)
    } else {
        T::infinity()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveTrace<T: Scalar> {
    pub method: SolveMethod,
    pub times: Vec<T>,
    pub u: Vec<Vec<T>>,
    pub gamma: Vec<Vec<T>>,
    pub laplacian: Vec<Vec<T>>,
    pub alpha: T,
    /// `||Gamma u0||_inf`.
    pub gamma0_sup: T,
    pub t_local: T,
    /// `||Gamma u0||_inf < alpha / 2`.
    pub admissible: bool,
    pub picard: Option<PicardDiagnostics<T>>,
    /// Sup-deviation from the RK4 oracle on the grid.
    pub oracle_deviation: Option<T>,
}

impl<T: Scalar> SolveTrace<T> {
    pub(crate) fn from_path(g: &WeightedGraph<T>, method: SolveMethod, times: Vec<T>, u: Vec<Vec<T>>) -> Result<Self, SolveError> {
        let gamma = u.iter().map(|v| gamma_sq(g, v)).collect::<Result<Vec<_>, _>>()?;
        let laplacian = u.iter().map(|v| laplacian(g, v)).collect::<Result<Vec<_>, _>>()?;
        let gamma0_sup = sup_norm(&gamma[0]);
        Ok(Self {
            method,
            times,
            u,
            gamma,
            laplacian,
            alpha: g.alpha(),
            gamma0_sup,
            t_local: local_existence_time(gamma0_sup),
            admissible: gamma0_sup < g.alpha() * T::half(),
            picard: None,
            oracle_deviation: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn u0(&self) -> &[T] {
        &self.u[0]
    }

    pub fn horizon(&self) -> T {
        *self.times.last().unwrap_or(&T::zero())
    }

    /// Index of the grid node at time `t`, if there is one.
    pub fn node(&self, t: T) -> Option<usize> {
        let slack = T::tol(1e-9, 64.0) * T::one().max(t.abs());
        self.times.iter().position(|&s| (s - t).abs() <= slack)
    }

    /// `max(1, ||u0||, ||u0||^2)`, the scale of every inequality audit.
    pub fn scale(&self) -> T {
        let s = sup_norm(self.u0());
        T::one().max(s).max(s * s)
    }

    /// Sup-deviation from `other` over the nodes both grids share.
    pub fn deviation(&self, other: &Self) -> T {
        let mut dev = T::zero();
        for (i, &t) in self.times.iter().enumerate() {
            if let Some(j) = other.node(t) {
                for (a, b) in self.u[i].iter().zip(&other.u[j]) {
                    dev = dev.max((*a - *b).abs());
                }
            }
        }
        dev
    }
}

/// Runs the configured method; `Both` returns the Picard trace with the oracle deviation attached.
pub fn solve<T: Scalar>(g: &WeightedGraph<T>, config: &SolveConfig<T>) -> Result<SolveTrace<T>, SolveError> {
    match config.method {
        SolveMethod::Picard => solve_picard(g, config),
        SolveMethod::Rk4 => solve_rk4_on_grid(g, &config.u0, config.horizon, config.grid_step),
        SolveMethod::Both => {
            let mut trace = solve_picard(g, config)?;
            let oracle = solve_rk4_on_grid(g, &config.u0, config.horizon, config.grid_step)?;
            trace.oracle_deviation = Some(trace.deviation(&oracle));
            trace.method = SolveMethod::Both;
            Ok(trace)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_graph, two_vertex};

    #[test]
    fn method_round_trip() {
        for m in [SolveMethod::Picard, SolveMethod::Rk4, SolveMethod::Both] {
            assert_eq!(m.to_string().parse::<SolveMethod>().unwrap(), m);
        }
        assert!("euler".parse::<SolveMethod>().is_err());
    }

    #[test]
    fn grid_must_divide_horizon() {
        let c = SolveConfig::new(vec![0.0_f64; 2], 1.0, 0.25);
        assert_eq!(c.steps().unwrap(), 4);
        let c = SolveConfig::new(vec![0.0_f64; 2], 1.0, 0.3);
        assert!(matches!(c.steps(), Err(SolveError::GridMismatch { .. })));
    }

    #[test]
    fn two_vertex_local_time() {
        let g = two_vertex::<f64>();
        let trace = SolveTrace::from_path(&g, SolveMethod::Picard, vec![0.0], vec![vec![0.0, 0.9]]).unwrap();
        assert!((trace.gamma0_sup - 0.405).abs() < 1e-15);
        assert!(trace.admissible);
        assert!((trace.t_local - 1.0 / (256.0 * 0.405)).abs() < 1e-15);
    }

    #[test]
    fn both_methods_agree() {
        let g = cycle_graph::<f64>(6);
        let u0: Vec<f64> = (0..6).map(|i| 0.2 * (i as f64).sin()).collect();
        let gamma0 = sup_norm(&gamma_sq(&g, &u0).unwrap());
        let horizon = local_existence_time(gamma0) / 2.0;
        let cfg = SolveConfig::new(u0, horizon, horizon / 8.0).method(SolveMethod::Both);
        let trace = solve(&g, &cfg).unwrap();
        assert!(trace.oracle_deviation.unwrap() < 1e-9);
    }
}
