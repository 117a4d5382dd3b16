use rayon::prelude::*;
use serde::Serialize;

use super::{local_existence_time, SolveConfig, SolveMethod, SolveTrace};
use crate::error::SolveError;
use crate::graph::WeightedGraph;
use crate::operators::{check_len, gamma_sq};
use crate::scalar::{sup_norm, Scalar};
use crate::semigroup::GridPropagator;
use crate::tolerance::DIVERGENCE_RATIO;

/// One local Picard solve on `[t_start, t_end]`.
#[derive(Debug, Clone, Serialize)]
pub struct PicardWindow<T: Scalar> {
    pub t_start: T,
    pub t_end: T,
    /// Local existence time computed from `u(t_start)`.
    pub t_local: T,
    pub quadrature_intervals: usize,
    pub iterations: usize,
    pub converged: bool,
    /// `M_k = sup_t ||sqrt(Gamma u^k(t))||_inf`.
    pub m: Vec<T>,
    /// `N_k = sup_t ||Gamma u^k(t) - Gamma u^{k-1}(t)||_inf`, with `u^{-1} = 0`.
    pub residuals: Vec<T>,
    /// `N_k / N_{k-1}` wherever `N_{k-1}` is above rounding noise.
    pub ratios: Vec<T>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardDiagnostics<T: Scalar> {
    pub windows: Vec<PicardWindow<T>>,
    /// `2 ||sqrt(Gamma u0)||_inf`.
    pub m_bound: T,
    pub max_m: T,
    pub max_ratio: Option<T>,
    pub total_iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> PicardDiagnostics<T> {
    fn new(windows: Vec<PicardWindow<T>>, gamma0_sup: T) -> Self {
        let max_m = windows.iter().flat_map(|w| &w.m).fold(T::zero(), |a, &b| a.max(b));
        let max_ratio = windows.iter().flat_map(|w| &w.ratios).copied().reduce(T::max);
        Self {
            m_bound: T::two() * gamma0_sup.sqrt(),
            max_m,
            max_ratio,
            total_iterations: windows.iter().map(|w| w.iterations).sum(),
            converged: windows.iter().all(|w| w.converged),
            windows,
        }
    }

    /// Every recorded `M_k` is within `2 ||sqrt(Gamma u0)||_inf`.
    pub fn m_bound_holds(&self) -> bool {
        self.max_m <= self.m_bound * (T::one() + T::tol(1e-12, 64.0))
    }
}

struct WindowRun<T: Scalar> {
    path: Vec<Vec<T>>,
    window: PicardWindow<T>,
}

fn picard_window<T: Scalar>(
    g: &WeightedGraph<T>,
    v0: &[T],
    step: T,
    intervals: usize,
    config: &SolveConfig<T>,
) -> Result<WindowRun<T>, SolveError> {
    let prop = GridPropagator::new(g, step, T::tol(1e-14, 16.0))?;
    let noise = T::tol(1e-13, 1e3) * T::one().max(sup_norm(&gamma_sq(g, v0)?));
    let mut forcing = vec![vec![T::zero(); v0.len()]; intervals + 1];
    let mut m = Vec::new();
    let mut residuals: Vec<T> = Vec::new();
    let mut ratios = Vec::new();
    let mut above = 0;
    let mut converged = false;
    let mut path = Vec::new();
    for _ in 0..config.picard_max_iter.max(1) {
        path = prop.duhamel(g, v0, &forcing)?;
        let gam = path.par_iter().map(|u| gamma_sq(g, u)).collect::<Result<Vec<_>, _>>()?;
        m.push(gam.iter().map(|v| sup_norm(v)).fold(T::zero(), T::max).sqrt());
        let n_k = gam
            .iter()
            .zip(&forcing)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (*x - *y).abs()))
            .fold(T::zero(), T::max);
        if let Some(&prev) = residuals.last() {
            if prev > noise {
                let r = n_k / prev;
                ratios.push(r);
                above = if r > T::lit(DIVERGENCE_RATIO) { above + 1 } else { 0 };
                if above >= 3 {
                    return Err(SolveError::Diverging);
                }
            }
        }
        residuals.push(n_k);
        forcing = gam;
        if n_k <= config.picard_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "Picard iteration stopped after {} iterations with residual {}",
            residuals.len(),
            residuals.last().map_or(f64::NAN, |r| r.to_f64_lossy())
        );
    }
    Ok(WindowRun {
        path,
        window: PicardWindow {
            t_start: T::zero(),
            t_end: T::zero(),
            t_local: T::zero(),
            quadrature_intervals: intervals,
            iterations: residuals.len(),
            converged,
            m,
            residuals,
            ratios,
        },
    })
}

/// Picard iteration with Duhamel's formula, window by window.
///
/// Without global extension the horizon must not exceed the local existence
/// time `1/(256 ||Gamma u0||)`. With it, `||Gamma u0|| < alpha/2` is required
/// and each window covers at most half the local time recomputed from its
/// starting value.
pub fn solve_picard<T: Scalar>(g: &WeightedGraph<T>, config: &SolveConfig<T>) -> Result<SolveTrace<T>, SolveError> {
    if !g.is_stochastic() {
        return Err(SolveError::NotStochastic);
    }
    check_len(g, &config.u0)?;
    let steps = config.steps()?;
    let step = config.grid_step;
    let gamma0_sup = sup_norm(&gamma_sq(g, &config.u0)?);
    let half_alpha = g.alpha() * T::half();
    let t_local = local_existence_time(gamma0_sup);
    if config.global_extension && gamma0_sup >= half_alpha {
        return Err(SolveError::NotAdmissible {
            gamma_sup: gamma0_sup.to_f64_lossy(),
            half_alpha: half_alpha.to_f64_lossy(),
        });
    }
    if !config.global_extension && config.horizon > t_local * (T::one() + T::tol(1e-12, 64.0)) {
        return Err(SolveError::HorizonTooLong {
            horizon: config.horizon.to_f64_lossy(),
            t_local: t_local.to_f64_lossy(),
        });
    }
    let times: Vec<T> = (0..=steps).map(|i| step * T::from_usize_lossy(i)).collect();

    if gamma0_sup == T::zero() {
        let window = PicardWindow {
            t_start: T::zero(),
            t_end: config.horizon,
            t_local,
            quadrature_intervals: 0,
            iterations: 1,
            converged: true,
            m: vec![T::zero()],
            residuals: vec![T::zero()],
            ratios: Vec::new(),
        };
        let mut trace = SolveTrace::from_path(g, SolveMethod::Picard, times, vec![config.u0.clone(); steps + 1])?;
        trace.picard = Some(PicardDiagnostics::new(vec![window], gamma0_sup));
        return Ok(trace);
    }

    let mut u = Vec::with_capacity(steps + 1);
    u.push(config.u0.clone());
    let mut windows = Vec::new();
    let mut start = 0;
    while start < steps {
        let v0 = u[start].clone();
        let local = local_existence_time(sup_norm(&gamma_sq(g, &v0)?));
        let allowed = if config.global_extension {
            let limit = local * T::half();
            let m = (limit / step * (T::one() + T::tol(1e-12, 64.0))).floor();
            let m = m.min(T::from_usize_lossy(steps)).to_usize().unwrap_or(0);
            if m == 0 {
                return Err(SolveError::StepTooLarge {
                    step: step.to_f64_lossy(),
                    limit: limit.to_f64_lossy(),
                });
            }
            m
        } else {
            steps
        };
        let m = allowed.min(config.max_window_steps.max(1)).min(steps - start);
        let refine = config.min_quadrature_intervals.div_ceil(m).max(1);
        let intervals = m * refine;
        let run = picard_window(g, &v0, step / T::from_usize_lossy(refine), intervals, config)?;
        u.extend(run.path.into_iter().step_by(refine).skip(1));
        let mut window = run.window;
        window.t_start = times[start];
        window.t_end = times[start + m];
        window.t_local = local;
        windows.push(window);
        start += m;
    }
    let mut trace = SolveTrace::from_path(g, SolveMethod::Picard, times, u)?;
    trace.picard = Some(PicardDiagnostics::new(windows, gamma0_sup));
    Ok(trace)
}
