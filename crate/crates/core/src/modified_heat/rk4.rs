use super::{SolveMethod, SolveTrace};
use crate::error::SolveError;
use crate::graph::WeightedGraph;
use crate::operators::check_len;
use crate::scalar::{sup_norm, Scalar};

const BLOW_UP: f64 = 1e6;

/// `Delta u + Gamma u` in one pass over the kernel.
fn rhs<T: Scalar>(g: &WeightedGraph<T>, u: &[T], out: &mut [T]) {
    for (x, o) in out.iter_mut().enumerate() {
        let (ys, ps) = g.row(x);
        let ux = u[x];
        let mut acc = T::zero();
        for (&y, &p) in ys.iter().zip(ps) {
            let d = u[y] - ux;
            acc += p * (d + T::half() * d * d);
        }
        *o = acc;
    }
}

fn integrate<T: Scalar>(g: &WeightedGraph<T>, u0: &[T], step: T, steps: usize, every: usize) -> Result<Vec<Vec<T>>, SolveError> {
    let n = u0.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut tmp = vec![T::zero(); n];
    let mut u = u0.to_vec();
    let mut out = vec![u.clone()];
    let half = step * T::half();
    let sixth = step / T::lit(6.0);
    for i in 1..=steps {
        rhs(g, &u, &mut k1);
        for x in 0..n {
            tmp[x] = u[x] + half * k1[x];
        }
        rhs(g, &tmp, &mut k2);
        for x in 0..n {
            tmp[x] = u[x] + half * k2[x];
        }
        rhs(g, &tmp, &mut k3);
        for x in 0..n {
            tmp[x] = u[x] + step * k3[x];
        }
        rhs(g, &tmp, &mut k4);
        for x in 0..n {
            u[x] += sixth * (k1[x] + T::two() * (k2[x] + k3[x]) + k4[x]);
        }
        let s = sup_norm(&u);
        if !(s <= T::lit(BLOW_UP)) {
            return Err(SolveError::BlowUp(s.to_f64_lossy()));
        }
        if i % every == 0 {
            out.push(u.clone());
        }
    }
    Ok(out)
}

fn step_limit<T: Scalar>(horizon: T) -> T {
    T::lit(0.01).min(horizon / T::lit(100.0))
}

/// Classical fourth-order Runge-Kutta with a fixed step, recorded at every step.
pub fn solve_rk4<T: Scalar>(g: &WeightedGraph<T>, u0: &[T], horizon: T, step: T) -> Result<SolveTrace<T>, SolveError> {
    check_len(g, u0)?;
    let limit = step_limit(horizon);
    if step > limit * (T::one() + T::tol(1e-12, 64.0)) {
        return Err(SolveError::StepTooLarge {
            step: step.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    let steps = super::SolveConfig::new(u0.to_vec(), horizon, step).steps()?;
    let u = integrate(g, u0, step, steps, 1)?;
    let times = (0..=steps).map(|i| step * T::from_usize_lossy(i)).collect();
    SolveTrace::from_path(g, SolveMethod::Rk4, times, u)
}

/// RK4 on a refinement of `grid_step`, sampled back onto the grid. The inner
/// step also keeps `step * max_row_sum` below 0.05.
pub fn solve_rk4_on_grid<T: Scalar>(g: &WeightedGraph<T>, u0: &[T], horizon: T, grid_step: T) -> Result<SolveTrace<T>, SolveError> {
    check_len(g, u0)?;
    let steps = super::SolveConfig::new(u0.to_vec(), horizon, grid_step).steps()?;
    let limit = step_limit(horizon).min(T::lit(0.05) / g.max_row_sum());
    let refine = (grid_step / limit).ceil().to_usize().unwrap_or(1).max(1);
    let step = grid_step / T::from_usize_lossy(refine);
    let u = integrate(g, u0, step, steps * refine, refine)?;
    let times = (0..=steps).map(|i| grid_step * T::from_usize_lossy(i)).collect();
    SolveTrace::from_path(g, SolveMethod::Rk4, times, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_graph, two_vertex};

    #[test]
    fn constant_trace() {
        let g = cycle_graph::<f64>(4);
        let t = solve_rk4(&g, &[1.5; 4], 1.0, 0.01).unwrap();
        assert_eq!(t.len(), 101);
        assert!(t.u.iter().all(|v| v == &vec![1.5; 4]));
    }

    #[test]
    fn step_guard() {
        let g = cycle_graph::<f64>(4);
        assert!(matches!(solve_rk4(&g, &[0.0; 4], 1.0, 0.02), Err(SolveError::StepTooLarge { .. })));
    }

    #[test]
    fn fourth_order_convergence() {
        // on two vertices the nonlinearity cancels in u1 - u0, so use a triangle
        let g = cycle_graph::<f64>(3);
        let u0 = [0.0, 0.4, -0.2];
        let reference = solve_rk4(&g, &u0, 1.0, 0.000625).unwrap();
        let err = |h: f64| {
            let t = solve_rk4(&g, &u0, 1.0, h).unwrap();
            t.u.last().unwrap().iter().zip(reference.u.last().unwrap()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let ratio = err(0.01) / err(0.005);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn two_vertex_difference_decays() {
        let g = two_vertex::<f64>();
        let t = solve_rk4(&g, &[0.0, 0.9], 1.0, 0.001).unwrap();
        let w = t.u.last().unwrap()[1] - t.u.last().unwrap()[0];
        assert!((w - 0.9 * (-2.0_f64).exp()).abs() < 1e-10);
    }
}
