//! Volume growth `V(x, r) = mu(B(x, r))` and doubling constants.

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{check_cd, VertexScope};
use crate::error::GeometryError;
use crate::graph::{bfs_distances, BallTruncation, WeightedGraph};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize)]
pub struct VolumeProfile<T: Scalar> {
    pub center: usize,
    pub label: String,
    pub r_max: usize,
    /// `V(x, r)` for `r = 0..=r_max`.
    pub volumes: Vec<T>,
    /// `V(x, 2r) / V(x, r)` for `r = 1..=r_max/2`.
    pub ratios: Vec<T>,
}

impl<T: Scalar> VolumeProfile<T> {
    pub fn volume(&self, r: usize) -> T {
        self.volumes[r]
    }

    /// `V(x, 2r) / V(x, r)`, for `1 <= r <= r_max / 2`.
    pub fn ratio(&self, r: usize) -> Option<T> {
        r.checked_sub(1).and_then(|i| self.ratios.get(i)).copied()
    }

    pub fn max_ratio(&self) -> Option<(usize, T)> {
        self.ratios
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, T)>, (i, &v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i + 1, v)),
            })
    }
}

/// Layered breadth-first volumes around `x`.
pub fn volume_profile<T: Scalar>(g: &WeightedGraph<T>, x: usize, r_max: usize) -> Result<VolumeProfile<T>, GeometryError> {
    if x >= g.len() {
        return Err(GeometryError::BadVertex(x));
    }
    let mut layers = vec![T::zero(); r_max + 1];
    for (y, d) in bfs_distances(g, x).into_iter().enumerate() {
        if let Some(d) = d.filter(|&d| d <= r_max) {
            layers[d] += g.mu(y);
        }
    }
    let mut volumes = Vec::with_capacity(r_max + 1);
    let mut acc = T::zero();
    for l in layers {
        acc += l;
        volumes.push(acc);
    }
    let ratios = (1..=r_max / 2).map(|r| volumes[2 * r] / volumes[r]).collect();
    Ok(VolumeProfile {
        center: x,
        label: g.label(x).to_string(),
        r_max,
        volumes,
        ratios,
    })
}

/// `volume_profile` on a truncation, refusing balls that reach past the trusted
/// region: `d(x0, x) + r_max <= R - margin`.
pub fn volume_profile_trusted<T: Scalar>(
    t: &BallTruncation<T>,
    x: usize,
    r_max: usize,
) -> Result<VolumeProfile<T>, GeometryError> {
    if x >= t.graph.len() {
        return Err(GeometryError::BadVertex(x));
    }
    if let Some(radius) = t.radius {
        let d = t.depth[x];
        if d + r_max + t.margin > radius && !t.is_exhaustive() {
            return Err(GeometryError::UntrustedRadius { r_max });
        }
    }
    volume_profile(&t.graph, x, r_max)
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingCheck<T: Scalar> {
    pub r: usize,
    pub ratio: T,
    /// `(1 + alpha^{-2})^r`.
    pub bound: T,
    /// `bound - ratio`.
    pub slack: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalDoublingReport<T: Scalar> {
    pub center: usize,
    pub alpha: T,
    pub checks: Vec<DoublingCheck<T>>,
    /// `V(x, r+1) <= (1 + alpha^{-2}) V(x, r)` for every `r < r_max`.
    pub step_bound_holds: bool,
    pub pass: bool,
}

/// `V(x, 2r) <= (1 + alpha^{-2})^r V(x, r)` for every `r` in the profile.
pub fn check_local_doubling<T: Scalar>(profile: &VolumeProfile<T>, alpha: T) -> LocalDoublingReport<T> {
    let growth = T::one() + T::one() / (alpha * alpha);
    let slack = T::one() + T::tol(1e-12, 64.0);
    let checks: Vec<DoublingCheck<T>> = profile
        .ratios
        .iter()
        .enumerate()
        .map(|(i, &ratio)| {
            let r = i + 1;
            let bound = growth.powi(r as i32);
            DoublingCheck {
                r,
                ratio,
                bound,
                slack: bound - ratio,
            }
        })
        .collect();
    let step_bound_holds = profile.volumes.windows(2).all(|w| w[1] <= growth * w[0] * slack);
    let pass = step_bound_holds && checks.iter().all(|c| c.ratio <= c.bound * slack);
    LocalDoublingReport {
        center: profile.center,
        alpha,
        checks,
        step_bound_holds,
        pass,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingReport<T: Scalar> {
    pub r_max: usize,
    pub alpha: T,
    /// `max V(x, 2r) / V(x, r)` over centers and `1 <= r <= r_max/2`.
    pub empirical_cdv: T,
    pub argmax_center: Option<String>,
    pub argmax_radius: Option<usize>,
    /// Dimension `n` for which `CD(0, n)` was verified, if requested and it holds.
    pub cd0_dimension: Option<T>,
    pub note: &'static str,
    pub profiles: Vec<VolumeProfile<T>>,
    pub local: Vec<LocalDoublingReport<T>>,
}

const DOUBLING_NOTE: &str = "under CD(0,n) a uniform doubling constant exists depending only on (n, alpha); \
no closed form is known, so only the empirical constant is reported";

/// Empirical doubling constant over `centers`; `cd0_n` additionally checks `CD(0, n)`.
pub fn doubling_report<T: Scalar>(
    g: &WeightedGraph<T>,
    centers: &[usize],
    r_max: usize,
    cd0_n: Option<T>,
) -> Result<DoublingReport<T>, GeometryError> {
    let profiles = centers
        .par_iter()
        .map(|&x| volume_profile(g, x, r_max))
        .collect::<Result<Vec<_>, _>>()?;
    let alpha = g.alpha();
    let local = profiles.iter().map(|p| check_local_doubling(p, alpha)).collect();
    let mut best: Option<(usize, usize, T)> = None;
    for (i, p) in profiles.iter().enumerate() {
        if let Some((r, v)) = p.max_ratio() {
            if best.is_none_or(|(_, _, b)| v > b) {
                best = Some((i, r, v));
            }
        }
    }
    let cd0_dimension = match cd0_n {
        Some(n) => {
            check_cd(g, T::zero(), n, &VertexScope::All)?.satisfied.then_some(n)
        }
        None => None,
    };
    Ok(DoublingReport {
        r_max,
        alpha,
        empirical_cdv: best.map_or(T::one(), |b| b.2),
        argmax_center: best.map(|b| profiles[b.0].label.clone()),
        argmax_radius: best.map(|b| b.1),
        cd0_dimension,
        note: DOUBLING_NOTE,
        profiles,
        local,
    })
}

/// Columns `center,r,V,ratio,local_bound`; ratio and bound are empty where `2r > r_max`.
pub fn profiles_csv<T: Scalar>(profiles: &[VolumeProfile<T>], alpha: T) -> String {
    use std::fmt::Write;
    let growth = T::one() + T::one() / (alpha * alpha);
    let mut out = String::from("center,r,V,ratio,local_bound\n");
    for p in profiles {
        for (r, v) in p.volumes.iter().enumerate() {
            let (ratio, bound) = match p.ratio(r) {
                Some(q) => (
                    format!("{:.16e}", q.to_f64_lossy()),
                    format!("{:.16e}", growth.powi(r as i32).to_f64_lossy()),
                ),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(out, "{},{r},{:.16e},{ratio},{bound}", p.label, v.to_f64_lossy());
        }
    }
    out
}
