use serde::{Deserialize, Serialize};

use super::{effective_census, ManifoldSpec};
use crate::capacity::{random_moe, LayerSpec};
use crate::combinatorics::binomial_u128;
use crate::error::{CoreError, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ResilienceConfig<T: Scalar> {
    pub n_experts: usize,
    pub k: usize,
    pub h: usize,
    pub manifold: ManifoldSpec<T>,
    pub seeds: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResilienceRow {
    pub seed: u64,
    pub dense_patterns: u64,
    pub moe_patterns: u64,
    pub moe_coalitions: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResilienceReport {
    pub rows: Vec<ResilienceRow>,
    pub median_dense: f64,
    pub median_moe: f64,
    pub median_ratio: f64,
    /// `C(N,k) · k^{d_eff}`.
    pub ceiling: f64,
    pub d_eff: usize,
    pub rank_deficient: bool,
    pub flags: Vec<String>,
}

pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Effective pattern counts of a Gaussian MoE layer and of a dense layer of
/// the same expert width on the same manifold, seed by seed. The dense
/// baseline is the MoE's first expert.
pub fn resilience_experiment<T: Scalar>(cfg: &ResilienceConfig<T>) -> Result<ResilienceReport> {
    if cfg.seeds == 0 {
        return Err(CoreError::InvalidArgument("seeds must be positive".into()));
    }
    let d_in = cfg.manifold.d_in();
    let d_eff = cfg.manifold.d_eff();
    let rank_deficient = cfg.k * cfg.h < d_eff;
    let mut flags = Vec::new();
    if rank_deficient {
        flags.push(format!("RANK_DEFICIENT: kH = {} < d_eff = {d_eff}", cfg.k * cfg.h));
    }
    let mut rows = Vec::with_capacity(cfg.seeds);
    for s in 0..cfg.seeds as u64 {
        let seed = cfg.seed.wrapping_add(s);
        let moe = random_moe::<T>(cfg.n_experts, cfg.k, cfg.h, d_in, seed)?;
        let dense = LayerSpec::Dense(moe.experts()[0].clone());
        let dr = effective_census(&dense, &cfg.manifold, cfg.samples, seed, None)?;
        let mr = effective_census(&LayerSpec::MoE(moe), &cfg.manifold, cfg.samples, seed, None)?;
        let dp = u64::try_from(&dr.distinct_patterns.0).unwrap_or(u64::MAX);
        let mp = u64::try_from(&mr.distinct_patterns.0).unwrap_or(u64::MAX);
        rows.push(ResilienceRow {
            seed,
            dense_patterns: dp,
            moe_patterns: mp,
            moe_coalitions: mr.distinct_coalitions,
            ratio: mp as f64 / dp as f64,
        });
    }
    let col = |f: fn(&ResilienceRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let ceiling = binomial_u128(cfg.n_experts as u64, cfg.k as u64) as f64 * (cfg.k as f64).powi(d_eff as i32);
    Ok(ResilienceReport {
        median_dense: median(&col(|r| r.dense_patterns as f64)),
        median_moe: median(&col(|r| r.moe_patterns as f64)),
        median_ratio: median(&col(|r| r.ratio)),
        rows,
        ceiling,
        d_eff,
        rank_deficient,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn k_equals_n_ceiling_is_one_coalition() {
        let m = ManifoldSpec::segment(&[-3.0, 1.0], &[3.0, 0.5]).unwrap();
        let cfg = ResilienceConfig { n_experts: 3, k: 3, h: 2, manifold: m, seeds: 3, samples: 20_000, seed: 0 };
        let r = resilience_experiment::<f64>(&cfg).unwrap();
        assert_eq!(r.ceiling, 3f64.powi(1));
        assert!(r.rows.iter().all(|row| row.moe_coalitions == 1));
        assert!(!r.rank_deficient);
    }

    #[test]
    fn rank_deficiency_is_flagged_but_run() {
        let e = |i: usize| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        let m = ManifoldSpec::affine_patch(vec![3.0, 0.0, 0.0, 0.0], 1.0, vec![e(1), e(2), e(3)]).unwrap();
        let cfg = ResilienceConfig { n_experts: 3, k: 1, h: 2, manifold: m, seeds: 1, samples: 5_000, seed: 0 };
        let r = resilience_experiment::<f64>(&cfg).unwrap();
        assert!(r.rank_deficient);
        assert!(r.flags[0].starts_with("RANK_DEFICIENT"));
        assert_eq!(r.rows.len(), 1);
    }
}
