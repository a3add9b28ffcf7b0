use std::f64::consts::PI;

use rand::Rng;

use super::{ExpertSpec, MoESpec};
use crate::error::{CoreError, Result};
use crate::rng::{gaussian_matrix, gaussian_vec, stream_rng, Stream};
use crate::routing::{fan_router, identity_router, random_router};
use crate::Scalar;

/// Gaussian expert `index` drawn from the expert stream of `seed`.
pub fn random_expert<T: Scalar>(h: usize, d_in: usize, seed: u64, index: u64) -> ExpertSpec<T> {
    let mut rng = stream_rng(seed, Stream::Experts, index);
    loop {
        let w: Vec<Vec<T>> = gaussian_matrix(&mut rng, h, d_in);
        let b = gaussian_vec(&mut rng, h);
        if let Ok(e) = ExpertSpec::new(w, b) {
            return e;
        }
    }
}

/// Gaussian router and experts; router and expert draws use separate streams.
pub fn random_moe<T: Scalar>(n: usize, k: usize, h: usize, d_in: usize, seed: u64) -> Result<MoESpec<T>> {
    let router = random_router(n, k, d_in, seed)?;
    let experts = (0..n).map(|i| random_expert(h, d_in, seed, i as u64)).collect();
    MoESpec::new(router, experts)
}

/// Identity router `[I_N | 0]` with Gaussian experts: every coalition owns a
/// full-dimensional cone, and the experts are generic almost surely.
pub fn lower_bound_construction<T: Scalar>(n: usize, k: usize, h: usize, d_in: usize, seed: u64) -> Result<MoESpec<T>> {
    if d_in < n {
        return Err(CoreError::InvalidArgument(format!(
            "the identity-router construction embeds the N = {n} logits as coordinates and needs d_in >= N (got d_in = {d_in})"
        )));
    }
    if h == 0 {
        return Err(CoreError::InvalidArgument("expert width must be positive".into()));
    }
    let router = identity_router(n, k, d_in)?;
    let experts = (0..n).map(|i| random_expert(h, d_in, seed, i as u64)).collect();
    MoESpec::new(router, experts)
}

/// Planar Top-1 layer whose count is exactly `N·Φ(H, 2)`.
///
/// The router is a conical fan of `N` equal wedges. Expert `i` places its `H`
/// lines through a small disc on the axis of wedge `i`, with directions spread
/// over `[0, π)` so every pairwise crossing stays inside the disc and hence
/// inside the wedge.
pub fn top1_fan_construction<T: Scalar>(n: usize, h: usize, seed: u64) -> Result<MoESpec<T>> {
    if n < 2 || h == 0 {
        return Err(CoreError::InvalidArgument(format!("fan construction needs N >= 2 and H >= 1 (got N={n}, H={h})")));
    }
    let router = fan_router(n, 1, 2)?;
    let half_wedge = PI / n as f64;
    let delta = 0.2 * half_wedge.sin();
    let min_angle = PI / (2.0 * h as f64);
    let r = 0.9 * delta / (1.0 + 2.0 / min_angle.sin());
    let experts = (0..n)
        .map(|i| {
            let mut rng = stream_rng(seed, Stream::Experts, i as u64);
            let theta = 2.0 * half_wedge * i as f64;
            let center = [theta.cos(), theta.sin()];
            let rotation = rng.random::<f64>() * PI;
            let mut w = Vec::with_capacity(h);
            let mut b = Vec::with_capacity(h);
            for j in 0..h {
                let jitter = (rng.random::<f64>() - 0.5) * 0.5 * PI / h as f64;
                let phi = rotation + PI * j as f64 / h as f64 + jitter;
                let (rho, ang) = (r * rng.random::<f64>().sqrt(), rng.random::<f64>() * 2.0 * PI);
                let p = [center[0] + rho * ang.cos(), center[1] + rho * ang.sin()];
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let normal = [-sign * phi.sin(), sign * phi.cos()];
                w.push(vec![T::lit(normal[0]), T::lit(normal[1])]);
                b.push(T::lit(-(normal[0] * p[0] + normal[1] * p[1])));
            }
            ExpertSpec::new(w, b)
        })
        .collect::<Result<Vec<_>>>()?;
    MoESpec::new(router, experts)
}
