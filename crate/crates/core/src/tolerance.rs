//! Numerical tolerances used across modules.
//!
//! Each constant is the `f64` value; generic code lifts it with
//! [`Scalar::tol`](crate::Scalar::tol) so single precision gets a floor
//! proportional to its own epsilon.

/// Relative tolerance on Markov row sums.
pub const TOL_MARKOV: f64 = 1e-12;
/// Relative tolerance on detailed balance `p(x,y)mu(x) = p(y,x)mu(y)`.
pub const TOL_REV: f64 = 1e-12;

/// PSD acceptance: `min_eig >= -PSD_REL * (1 + ||Q_gamma2||_inf)`.
pub const PSD_REL: f64 = 1e-9;
/// Eigenvalues of `Q_gamma` below `NULL_REL * lambda_max` are treated as null.
pub const NULL_REL: f64 = 1e-12;

/// Default accuracy of the Taylor semigroup action.
pub const SEMIGROUP_TOL: f64 = 1e-10;
/// Gradient-estimate audit tolerance, multiplied by `max(1, ||f||^2)`.
pub const AUDIT_TOL: f64 = 1e-8;
/// Target agreement between successive Duhamel refinements.
pub const DUHAMEL_REFINE_TOL: f64 = 1e-8;

pub const PICARD_TOL: f64 = 1e-10;
pub const PICARD_MAX_ITER: usize = 60;
/// Contraction ratio treated as divergence when sustained.
pub const DIVERGENCE_RATIO: f64 = 0.9;

/// Modified-heat inequality audits, multiplied by `max(1, ||u0||, ||u0||^2)`.
pub const VERIFY_TOL: f64 = 1e-7;

/// Edge-oscillation bound from `||Gamma u|| <= alpha/2`.
pub const EDGE_OSCILLATION_BOUND: f64 = 1.0;

/// Lower comparison regime: `gamma <= omega` where `omega * e^omega = 1`.
pub fn omega_constant() -> f64 {
    // Newton on w e^w - 1 from w = 0.5; quadratic convergence reaches 1e-14 in a few steps.
    let mut w: f64 = 0.5;
    for _ in 0..100 {
        let e = w.exp();
        let step = (w * e - 1.0) / (e * (w + 1.0));
        w -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    w
}

/// Upper comparison regime: `gamma >= e^2`.
pub fn gamma_upper() -> f64 {
    std::f64::consts::E * std::f64::consts::E
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_solves_fixed_point() {
        let w = omega_constant();
        assert!((w * w.exp() - 1.0).abs() < 1e-14);
        assert!((w - 0.567_143_290_409_783_8).abs() < 1e-14);
    }

    #[test]
    fn upper_constant() {
        assert!((gamma_upper() - 7.389_056_098_930_65).abs() < 1e-12);
    }
}
