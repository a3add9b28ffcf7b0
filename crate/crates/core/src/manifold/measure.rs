use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::{sample_manifold, ManifoldKind, ManifoldSpec};
use crate::combinatorics::binomial_u128;
use crate::error::{CoreError, Result};
use crate::linalg::solve;
use crate::rng::{gaussian_matrix, stream_rng, unit_sphere, Stream};
use crate::routing::{route_unchecked, RouterSpec};
use crate::Scalar;

const BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureOptions {
    /// Angular half-width of the tube around `π(M)`, radians.
    pub theta: f64,
    /// Random isotropic routers for the direct estimator.
    pub routers: usize,
    /// Manifold samples per router in the direct estimator.
    pub points: usize,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions { theta: 0.05, routers: 64, points: 2048 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalMeasure {
    /// Codimension of `π(M)` in `S^{d_in−1}`.
    pub codimension: usize,
    /// `Vol(π(M)) / Vol(S^{d_in−1})`; zero in positive codimension.
    pub measure: f64,
    pub measure_stderr: f64,
    pub theta: f64,
    /// Fraction of the sphere within `theta` of `π(M)`.
    pub tube_fraction: Option<f64>,
    /// Tube fraction divided by that of a great subsphere of equal dimension.
    pub tube_density: Option<f64>,
    pub tube_stderr: Option<f64>,
    /// Mean fraction of coalitions whose cone meets `π(M)` under random
    /// isotropic routers.
    pub direct_estimate: Option<f64>,
    pub direct_stderr: Option<f64>,
    pub samples: usize,
    /// Fraction used in capacity bounds: `measure` at codimension 0, else the
    /// tube fraction.
    pub bound_fraction: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Does the open ray `{t u : t > 0}` meet the manifold? Codimension 0 only.
fn ray_hits<T: Scalar>(m: &ManifoldSpec<T>, u: &[f64]) -> bool {
    let c: Vec<f64> = m.center.iter().map(|v| v.to_f64_lossy()).collect();
    let frame: Vec<Vec<f64>> = m.frame.iter().map(|f| f.iter().map(|v| v.to_f64_lossy()).collect()).collect();
    let d = c.len();
    match m.kind {
        ManifoldKind::Circle | ManifoldKind::Sphere2 => {
            // |t u − c|² = r²
            let r = m.radius_f64();
            let uc = dot(u, &c);
            let disc = uc * uc - (dot(&c, &c) - r * r);
            if disc < 0.0 {
                return false;
            }
            let zmin = m.z_min();
            [uc - disc.sqrt(), uc + disc.sqrt()].into_iter().any(|t| {
                if t <= 0.0 {
                    return false;
                }
                if m.kind == ManifoldKind::Circle || m.cap.is_none() {
                    return true;
                }
                let p: Vec<f64> = u.iter().zip(&c).map(|(ui, ci)| t * ui - ci).collect();
                dot(&p, &frame[2]) / r > zmin
            })
        }
        ManifoldKind::Segment | ManifoldKind::AffinePatch => {
            let e = m.extent_f64();
            if frame.len() == d {
                // full-dimensional box: slab test in frame coordinates
                let o: Vec<f64> = frame.iter().map(|f| -dot(f, &c)).collect();
                let v: Vec<f64> = frame.iter().map(|f| dot(f, u)).collect();
                let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
                for (oi, vi) in o.iter().zip(&v) {
                    if vi.abs() < 1e-300 {
                        if oi.abs() >= e {
                            return false;
                        }
                        continue;
                    }
                    let (a, b) = ((-e - oi) / vi, (e - oi) / vi);
                    lo = lo.max(a.min(b));
                    hi = hi.min(a.max(b));
                }
                return lo < hi;
            }
            // t u − F s = c
            let rows: Vec<Vec<f64>> = (0..d)
                .map(|i| std::iter::once(u[i]).chain(frame.iter().map(|f| -f[i])).collect())
                .collect();
            match solve(&rows, &c, 1e-12) {
                Some(sol) => sol[0] > 0.0 && sol[1..].iter().all(|s| s.abs() < e),
                None => false,
            }
        }
    }
}

/// Largest cosine between `u` and the projected manifold, by a coarse mesh
/// over the parameter box refined with a shrinking pattern search.
fn max_cosine<T: Scalar>(m: &ManifoldSpec<T>, mesh: &[(Vec<f64>, Vec<f64>)], u: &[f64]) -> f64 {
    let bounds = m.param_bounds();
    let cos_at = |p: &[f64]| {
        let x = m.point_f64(p);
        dot(&x, u) / dot(&x, &x).sqrt()
    };
    let (start, mut best) = mesh
        .iter()
        .map(|(p, xhat)| (p, dot(xhat, u)))
        .fold((&mesh[0].0, f64::NEG_INFINITY), |acc, (p, c)| if c > acc.1 { (p, c) } else { acc });
    let mut p = start.clone();
    let per_axis = mesh_per_axis(bounds.len());
    let mut step: Vec<f64> = bounds.iter().map(|&(lo, hi, _)| (hi - lo) / per_axis as f64).collect();
    for _ in 0..400 {
        let mut improved = false;
        for j in 0..p.len() {
            for dir in [-1.0, 1.0] {
                let mut q = p.clone();
                let (lo, hi, periodic) = bounds[j];
                q[j] += dir * step[j];
                if periodic {
                    q[j] = lo + (q[j] - lo).rem_euclid(hi - lo);
                } else {
                    q[j] = q[j].clamp(lo, hi);
                }
                let c = cos_at(&q);
                if c > best {
                    best = c;
                    p = q;
                    improved = true;
                }
            }
        }
        if !improved {
            for s in step.iter_mut() {
                *s *= 0.5;
            }
            if step.iter().zip(&bounds).all(|(s, &(lo, hi, _))| *s < 1e-9 * (hi - lo)) {
                break;
            }
        }
    }
    best
}

fn mesh_per_axis(dims: usize) -> usize {
    match dims {
        1 => 256,
        2 => 32,
        _ => 8,
    }
}

fn param_mesh<T: Scalar>(m: &ManifoldSpec<T>) -> Vec<(Vec<f64>, Vec<f64>)> {
    let bounds = m.param_bounds();
    let k = mesh_per_axis(bounds.len());
    let mut out = Vec::new();
    let total = k.pow(bounds.len() as u32);
    for idx in 0..total {
        let mut rem = idx;
        let p: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi, periodic)| {
                let i = rem % k;
                rem /= k;
                let t = if periodic { i as f64 / k as f64 } else { (i as f64 + 0.5) / k as f64 };
                lo + (hi - lo) * t
            })
            .collect();
        let x = m.point_f64(&p);
        let nrm = dot(&x, &x).sqrt();
        out.push((p, x.iter().map(|v| v / nrm).collect()));
    }
    out
}

/// Normalized spherical measure of the radial projection `π(M)`.
pub fn spherical_measure<T: Scalar>(
    m: &ManifoldSpec<T>,
    n: usize,
    seed: u64,
    router: Option<&RouterSpec<T>>,
    opts: &MeasureOptions,
) -> Result<SphericalMeasure> {
    if m.contains_origin() {
        return Err(CoreError::OriginCrossing);
    }
    if n == 0 {
        return Err(CoreError::InvalidArgument("need at least one sphere sample".into()));
    }
    if !(opts.theta > 0.0 && opts.theta < std::f64::consts::FRAC_PI_2) {
        return Err(CoreError::InvalidArgument("tube angle must lie in (0, π/2)".into()));
    }
    let d = m.d_in();
    if d < 2 {
        return Err(CoreError::InvalidArgument("spherical projection needs d_in >= 2".into()));
    }
    let codim = (d - 1).saturating_sub(m.d_eff());
    let mesh = if codim > 0 { param_mesh(m) } else { Vec::new() };
    let cos_theta = opts.theta.cos();
    let blocks = n.div_ceil(BLOCK);
    let hits: usize = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, Stream::Sphere, 1 + b as u64);
            let count = BLOCK.min(n - b * BLOCK);
            (0..count)
                .filter(|_| {
                    let u: Vec<f64> = unit_sphere(&mut rng, d);
                    if codim == 0 {
                        ray_hits(m, &u)
                    } else {
                        max_cosine(m, &mesh, &u) > cos_theta
                    }
                })
                .count()
        })
        .sum();
    let p = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let (measure, measure_stderr, tube_fraction, tube_density, tube_stderr) = if codim == 0 {
        (p, se, None, None, None)
    } else {
        let s2 = opts.theta.sin().powi(2);
        let norm = beta_reg(codim as f64 / 2.0, (d - codim) as f64 / 2.0, s2);
        (0.0, 0.0, Some(p), Some(p / norm), Some(se / norm))
    };

    let (direct_estimate, direct_stderr) = match router {
        Some(r) => {
            if r.d_in() != d {
                return Err(CoreError::DimensionMismatch { expected: d, got: r.d_in() });
            }
            let (est, se) = direct_estimator(m, r.n_experts(), r.k(), seed, opts)?;
            (Some(est), Some(se))
        }
        None => (None, None),
    };
    Ok(SphericalMeasure {
        codimension: codim,
        measure,
        measure_stderr,
        theta: opts.theta,
        tube_fraction,
        tube_density,
        tube_stderr,
        direct_estimate,
        direct_stderr,
        samples: n,
        bound_fraction: if codim == 0 { p } else { tube_fraction.unwrap_or(0.0) },
    })
}

fn direct_estimator<T: Scalar>(
    m: &ManifoldSpec<T>,
    n_experts: usize,
    k: usize,
    seed: u64,
    opts: &MeasureOptions,
) -> Result<(f64, f64)> {
    if opts.routers < 2 || opts.points == 0 {
        return Err(CoreError::InvalidArgument("direct estimator needs >= 2 routers and >= 1 point".into()));
    }
    let d = m.d_in();
    let total = binomial_u128(n_experts as u64, k as u64) as f64;
    let points = sample_manifold(m, opts.points, seed)?;
    let fractions: Vec<f64> = (0..opts.routers)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, Stream::Router, 1 + i as u64);
            let w: Vec<Vec<T>> = gaussian_matrix(&mut rng, n_experts, d);
            let router = RouterSpec::new(w, vec![T::zero(); n_experts], k)?;
            let seen: HashSet<_> = points.iter().map(|x| route_unchecked(&router, x)).collect();
            Ok(seen.len() as f64 / total)
        })
        .collect::<Result<_>>()?;
    let r = fractions.len() as f64;
    let mean = fractions.iter().sum::<f64>() / r;
    let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Ok((mean, (var / r).sqrt()))
}
