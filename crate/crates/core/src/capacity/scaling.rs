use serde::{Deserialize, Serialize};

use super::{
    count_dense_regions, count_topk_regions, global_pattern_census, lower_bound_construction, random_expert,
    random_moe, top1_fan_construction, CountOptions, MoESpec,
};
use crate::arrangement::{multiscale_domain, sampling_region_census, Polyhedron};
use crate::combinatorics::binomial_u128;
use crate::error::{CoreError, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// Dense width `H`; fitted against `log H`.
    DenseH,
    /// Top-1 expert count `N`; fitted against `log N`.
    Top1N,
    /// Top-k sparsity `k` at fixed `N`; fitted against `log C(N,k)`.
    TopkK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Exact,
    Census,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub sweep: Sweep,
    pub values: Vec<usize>,
    /// Fixed `N` for the k sweep.
    pub n_experts: usize,
    /// Fixed `k` for the N sweep (Top-1 uses 1).
    pub k: usize,
    /// Expert width for MoE sweeps.
    pub h: usize,
    pub d_in: usize,
    pub seeds: usize,
    pub seed: u64,
    pub method: CountMethod,
    pub samples: usize,
    /// Top-k sweep: shrink expert width to `max(1, H/k)` so active width stays `H`.
    #[serde(default)]
    pub normalized: bool,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            sweep: Sweep::DenseH,
            values: vec![4, 8, 16, 32],
            n_experts: 6,
            k: 1,
            h: 3,
            d_in: 2,
            seeds: 1,
            seed: 0,
            method: CountMethod::Census,
            samples: 1_000_000,
            normalized: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residuals: Vec<f64>,
}

/// Least-squares fit of `log y = slope · log x + intercept`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(CoreError::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 3 {
        return Err(CoreError::InvalidArgument(format!(
            "a scaling fit needs at least 3 sweep points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(CoreError::InvalidArgument("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CoreError::InvalidArgument("sweep values must not all coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = lx.iter().zip(&ly).map(|(x, y)| y - (slope * x + intercept)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(LogLogFit { slope, intercept, r_squared, residuals })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub value: usize,
    /// Abscissa of the fit before taking logs.
    pub x: f64,
    pub counts: Vec<u64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub config: ScalingConfig,
    pub points: Vec<ScalingPoint>,
    pub fit: LogLogFit,
    /// `mean[i+1] / mean[i]`.
    pub successive_ratios: Vec<f64>,
}

fn as_u64(c: &super::BigCount) -> u64 {
    u64::try_from(&c.0).unwrap_or(u64::MAX)
}

fn moe_count<T: Scalar>(moe: &MoESpec<T>, cfg: &ScalingConfig, seed: u64) -> Result<u64> {
    match cfg.method {
        CountMethod::Exact => {
            let opts = CountOptions { seed, ..CountOptions::default() };
            let r = count_topk_regions(moe, false, &opts)?;
            Ok(as_u64(r.exact_count.as_ref().expect("exact mode")))
        }
        CountMethod::Census => Ok(global_pattern_census(moe, cfg.samples, seed)?.distinct() as u64),
    }
}

fn instance_count<T: Scalar>(cfg: &ScalingConfig, value: usize, seed: u64) -> Result<u64> {
    match cfg.sweep {
        Sweep::DenseH => {
            let e = random_expert::<T>(value, cfg.d_in, seed, 0);
            match cfg.method {
                CountMethod::Exact => {
                    let r = count_dense_regions(&e, &Polyhedron::whole(cfg.d_in), &CountOptions { seed, ..CountOptions::default() })?;
                    Ok(as_u64(r.exact_count.as_ref().expect("exact mode")))
                }
                CountMethod::Census => {
                    let domain = multiscale_domain(&e.rows(), cfg.d_in);
                    Ok(sampling_region_census(&e.arrangement(), &domain, cfg.samples, seed)?.distinct() as u64)
                }
            }
        }
        Sweep::Top1N => {
            let moe = if cfg.d_in == 2 {
                top1_fan_construction::<T>(value, cfg.h, seed)?
            } else {
                random_moe::<T>(value, 1, cfg.h, cfg.d_in, seed)?
            };
            moe_count(&moe, cfg, seed)
        }
        Sweep::TopkK => {
            let h = if cfg.normalized { (cfg.h / value).max(1) } else { cfg.h };
            let moe = if cfg.d_in >= cfg.n_experts {
                lower_bound_construction::<T>(cfg.n_experts, value, h, cfg.d_in, seed)?
            } else {
                random_moe::<T>(cfg.n_experts, value, h, cfg.d_in, seed)?
            };
            moe_count(&moe, cfg, seed)
        }
    }
}

/// Counts every sweep value over `seeds` instances and fits the log-log slope.
///
/// Top-1 sweeps in the plane use [`top1_fan_construction`], where every
/// expert owns a wedge; Top-k sweeps use the identity-router construction
/// whenever `d_in ≥ N`.
pub fn scaling_probe<T: Scalar>(cfg: &ScalingConfig) -> Result<ScalingReport> {
    if cfg.values.len() < 3 {
        return Err(CoreError::InvalidArgument(format!(
            "a scaling sweep needs at least 3 values, got {}",
            cfg.values.len()
        )));
    }
    if cfg.seeds == 0 {
        return Err(CoreError::InvalidArgument("seeds must be positive".into()));
    }
    let mut points = Vec::with_capacity(cfg.values.len());
    for &value in &cfg.values {
        let counts = (0..cfg.seeds as u64)
            .map(|s| instance_count::<T>(cfg, value, cfg.seed.wrapping_add(s)))
            .collect::<Result<Vec<_>>>()?;
        let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
        let x = match cfg.sweep {
            Sweep::DenseH | Sweep::Top1N => value as f64,
            Sweep::TopkK => binomial_u128(cfg.n_experts as u64, value as u64) as f64,
        };
        points.push(ScalingPoint { value, x, counts, mean });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let fit = fit_loglog(&xs, &ys)?;
    let successive_ratios = ys.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(ScalingReport { config: cfg.clone(), points, fit, successive_ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        let f = fit_loglog(&xs, &ys).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.residuals.iter().all(|r| r.abs() < 1e-12));
        assert!(fit_loglog(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn dense_exact_sweep_matches_phi() {
        let cfg = ScalingConfig { values: vec![2, 4, 8], method: CountMethod::Exact, ..ScalingConfig::default() };
        let r = scaling_probe::<f64>(&cfg).unwrap();
        assert_eq!(r.points.iter().map(|p| p.counts[0]).collect::<Vec<_>>(), vec![4, 11, 37]);
    }

    #[test]
    fn top1_sweep_doubles() {
        let cfg = ScalingConfig {
            sweep: Sweep::Top1N,
            values: vec![2, 4, 8],
            method: CountMethod::Exact,
            ..ScalingConfig::default()
        };
        let r = scaling_probe::<f64>(&cfg).unwrap();
        for q in &r.successive_ratios {
            assert!((q - 2.0).abs() < 1e-12);
        }
        assert!((r.fit.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refuses_short_sweeps() {
        let cfg = ScalingConfig { values: vec![2, 4], ..ScalingConfig::default() };
        assert!(scaling_probe::<f64>(&cfg).is_err());
    }
}
