//! Effective capacity on low-dimensional manifolds.
//!
//! Manifolds are parametric (segment, circle, 2-sphere or sphere cap, affine
//! patch) and embedded through an orthonormal frame. Effective capacity is a
//! sample census of activation patterns along the manifold, so it is a lower
//! bound on the number of regions the manifold meets.

mod measure;
mod resilience;

pub use measure::{spherical_measure, MeasureOptions, SphericalMeasure};
pub use resilience::{resilience_experiment, ResilienceConfig, ResilienceReport, ResilienceRow};

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arrangement::{census_labels, zaslavsky_phi, SampleDomain};
use crate::capacity::LayerSpec;
use crate::combinatorics::{binomial, BigCount};
use crate::error::{CoreError, Result};
use crate::rng::{open_uniform, stream_rng, Stream};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    /// `center + s·f₀`, `|s| < extent`.
    Segment,
    /// `center + radius·(cos φ f₀ + sin φ f₁)`.
    Circle,
    /// `center + radius·(√(1−z²)(cos φ f₀ + sin φ f₁) + z f₂)`, with
    /// `z > cos(cap)` when a polar cap angle is given.
    Sphere2,
    /// `center + Σ s_j f_j`, `|s_j| < extent`.
    AffinePatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawManifold<T>", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ManifoldSpec<T: Scalar> {
    kind: ManifoldKind,
    center: Vec<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    extent: Option<T>,
    frame: Vec<Vec<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<T>,
}

#[derive(Deserialize)]
struct RawManifold<T> {
    kind: ManifoldKind,
    center: Vec<T>,
    #[serde(default)]
    radius: Option<T>,
    #[serde(default)]
    extent: Option<T>,
    frame: Vec<Vec<T>>,
    #[serde(default)]
    cap: Option<T>,
}

impl<T: Scalar> TryFrom<RawManifold<T>> for ManifoldSpec<T> {
    type Error = CoreError;
    fn try_from(r: RawManifold<T>) -> Result<Self> {
        ManifoldSpec::new(r.kind, r.center, r.radius, r.extent, r.frame, r.cap)
    }
}

fn frame_tolerance<T: Scalar>() -> f64 {
    (1e3 * T::epsilon().to_f64_lossy()).max(1e-10)
}

impl<T: Scalar> ManifoldSpec<T> {
    pub fn new(
        kind: ManifoldKind,
        center: Vec<T>,
        radius: Option<T>,
        extent: Option<T>,
        frame: Vec<Vec<T>>,
        cap: Option<T>,
    ) -> Result<Self> {
        let d = center.len();
        if d == 0 {
            return Err(CoreError::InvalidFrame("center must have positive dimension".into()));
        }
        let want = match kind {
            ManifoldKind::Segment => Some(1),
            ManifoldKind::Circle => Some(2),
            ManifoldKind::Sphere2 => Some(3),
            ManifoldKind::AffinePatch => None,
        };
        if let Some(w) = want {
            if frame.len() != w {
                return Err(CoreError::InvalidFrame(format!("{kind:?} needs {w} frame vectors, got {}", frame.len())));
            }
        }
        if frame.is_empty() || frame.len() > d {
            return Err(CoreError::InvalidFrame(format!("{} frame vectors in dimension {d}", frame.len())));
        }
        let tol = frame_tolerance::<T>();
        for (i, f) in frame.iter().enumerate() {
            if f.len() != d {
                return Err(CoreError::DimensionMismatch { expected: d, got: f.len() });
            }
            for (j, g) in frame.iter().enumerate().skip(i) {
                let ip: f64 = f.iter().zip(g).map(|(&a, &b)| a.to_f64_lossy() * b.to_f64_lossy()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (ip - target).abs() > tol {
                    return Err(CoreError::InvalidFrame(format!(
                        "frame vectors {i},{j} have inner product {ip:e}, expected {target}"
                    )));
                }
            }
        }
        let positive = |v: Option<T>, name: &str| -> Result<()> {
            match v {
                Some(x) if x > T::zero() && x.is_finite() => Ok(()),
                _ => Err(CoreError::InvalidArgument(format!("{kind:?} needs a positive {name}"))),
            }
        };
        match kind {
            ManifoldKind::Segment | ManifoldKind::AffinePatch => positive(extent, "extent")?,
            ManifoldKind::Circle | ManifoldKind::Sphere2 => positive(radius, "radius")?,
        }
        if let Some(c) = cap {
            if kind != ManifoldKind::Sphere2 {
                return Err(CoreError::InvalidArgument("cap applies to sphere2 only".into()));
            }
            if !(c > T::zero() && c.to_f64_lossy() <= PI) {
                return Err(CoreError::InvalidArgument("cap angle must lie in (0, π]".into()));
            }
        }
        Ok(ManifoldSpec { kind, center, radius, extent, frame, cap })
    }

    /// Open segment from `p` to `q`.
    pub fn segment(p: &[T], q: &[T]) -> Result<Self> {
        if p.len() != q.len() {
            return Err(CoreError::DimensionMismatch { expected: p.len(), got: q.len() });
        }
        let diff: Vec<T> = q.iter().zip(p).map(|(&a, &b)| a - b).collect();
        let len = crate::linalg::norm(&diff);
        if !(len > T::zero()) {
            return Err(CoreError::InvalidArgument("segment endpoints coincide".into()));
        }
        let half = T::lit(0.5);
        let center = p.iter().zip(q).map(|(&a, &b)| (a + b) * half).collect();
        let f = diff.iter().map(|&v| v / len).collect();
        ManifoldSpec::new(ManifoldKind::Segment, center, None, Some(len * half), vec![f], None)
    }

    pub fn circle(center: Vec<T>, radius: T, frame: [Vec<T>; 2]) -> Result<Self> {
        ManifoldSpec::new(ManifoldKind::Circle, center, Some(radius), None, frame.to_vec(), None)
    }

    pub fn sphere2(center: Vec<T>, radius: T, frame: [Vec<T>; 3], cap: Option<T>) -> Result<Self> {
        ManifoldSpec::new(ManifoldKind::Sphere2, center, Some(radius), None, frame.to_vec(), cap)
    }

    pub fn affine_patch(center: Vec<T>, extent: T, frame: Vec<Vec<T>>) -> Result<Self> {
        ManifoldSpec::new(ManifoldKind::AffinePatch, center, None, Some(extent), frame, None)
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn center(&self) -> &[T] {
        &self.center
    }

    pub fn frame(&self) -> &[Vec<T>] {
        &self.frame
    }

    pub fn d_in(&self) -> usize {
        self.center.len()
    }

    pub fn d_eff(&self) -> usize {
        match self.kind {
            ManifoldKind::Segment | ManifoldKind::Circle => 1,
            ManifoldKind::Sphere2 => 2,
            ManifoldKind::AffinePatch => self.frame.len(),
        }
    }

    pub fn is_closed(&self) -> bool {
        match self.kind {
            ManifoldKind::Circle => true,
            ManifoldKind::Sphere2 => self.cap.is_none_or(|c| c.to_f64_lossy() >= PI),
            _ => false,
        }
    }

    fn radius_f64(&self) -> f64 {
        self.radius.map_or(0.0, |r| r.to_f64_lossy())
    }

    fn extent_f64(&self) -> f64 {
        self.extent.map_or(0.0, |e| e.to_f64_lossy())
    }

    fn z_min(&self) -> f64 {
        self.cap.map_or(-1.0, |c| c.to_f64_lossy().cos())
    }

    /// Parameter box: `(lo, hi, periodic)` per intrinsic coordinate.
    pub(crate) fn param_bounds(&self) -> Vec<(f64, f64, bool)> {
        let e = self.extent_f64();
        match self.kind {
            ManifoldKind::Segment => vec![(-e, e, false)],
            ManifoldKind::Circle => vec![(0.0, 2.0 * PI, true)],
            ManifoldKind::Sphere2 => vec![(self.z_min(), 1.0, false), (0.0, 2.0 * PI, true)],
            ManifoldKind::AffinePatch => vec![(-e, e, false); self.frame.len()],
        }
    }

    /// Frame coefficients of the point with intrinsic parameters `p`.
    fn local(&self, p: &[f64]) -> Vec<f64> {
        let r = self.radius_f64();
        match self.kind {
            ManifoldKind::Segment | ManifoldKind::AffinePatch => p.to_vec(),
            ManifoldKind::Circle => vec![r * p[0].cos(), r * p[0].sin()],
            ManifoldKind::Sphere2 => {
                let s = (1.0 - p[0] * p[0]).max(0.0).sqrt();
                vec![r * s * p[1].cos(), r * s * p[1].sin(), r * p[0]]
            }
        }
    }

    pub(crate) fn point_f64(&self, p: &[f64]) -> Vec<f64> {
        let a = self.local(p);
        let mut x: Vec<f64> = self.center.iter().map(|v| v.to_f64_lossy()).collect();
        for (coef, f) in a.iter().zip(&self.frame) {
            for (xi, &fi) in x.iter_mut().zip(f) {
                *xi += coef * fi.to_f64_lossy();
            }
        }
        x
    }

    pub fn point(&self, p: &[f64]) -> Vec<T> {
        self.point_f64(p).into_iter().map(T::lit).collect()
    }

    /// Euclidean distance from the origin to the (closed) manifold.
    pub fn distance_to_origin(&self) -> f64 {
        let v: Vec<f64> = self.center.iter().map(|c| -c.to_f64_lossy()).collect();
        let a: Vec<f64> = self
            .frame
            .iter()
            .map(|f| f.iter().zip(&v).map(|(&fi, vi)| fi.to_f64_lossy() * vi).sum())
            .collect();
        let v2: f64 = v.iter().map(|x| x * x).sum();
        let a2: f64 = a.iter().map(|x| x * x).sum();
        let perp2 = (v2 - a2).max(0.0);
        let rho = a2.sqrt();
        let r = self.radius_f64();
        let in_frame2 = match self.kind {
            ManifoldKind::Segment | ManifoldKind::AffinePatch => {
                let e = self.extent_f64();
                a.iter().map(|&x| (x - x.clamp(-e, e)).powi(2)).sum()
            }
            ManifoldKind::Circle => (rho - r).powi(2),
            ManifoldKind::Sphere2 => {
                let zmin = self.z_min();
                if rho == 0.0 {
                    r * r
                } else if a[2] / rho >= zmin {
                    (rho - r).powi(2)
                } else {
                    let s = (1.0 - zmin * zmin).max(0.0).sqrt();
                    let phi = a[1].atan2(a[0]);
                    let q = [r * s * phi.cos(), r * s * phi.sin(), r * zmin];
                    a.iter().zip(&q).map(|(x, y)| (x - y).powi(2)).sum()
                }
            }
        };
        (perp2 + in_frame2).sqrt()
    }

    pub fn contains_origin(&self) -> bool {
        let scale = self
            .center
            .iter()
            .fold(1.0f64, |acc, c| acc.max(c.to_f64_lossy().abs()))
            .max(self.radius_f64())
            .max(self.extent_f64());
        self.distance_to_origin() <= 1e-9 * scale
    }
}

/// Uniform samples in the intrinsic parameter (arc length, area or
/// Lebesgue measure), open at the boundary; deterministic in `seed`, and
/// every prefix is itself a valid sample.
pub fn sample_manifold<T: Scalar>(m: &ManifoldSpec<T>, n: usize, seed: u64) -> Result<Vec<Vec<T>>> {
    if n == 0 {
        return Err(CoreError::InvalidArgument("need at least one manifold sample".into()));
    }
    let mut rng = stream_rng(seed, Stream::Sphere, 0);
    let bounds = m.param_bounds();
    Ok((0..n)
        .map(|_| {
            // z-uniform on the sphere is area-uniform (Archimedes)
            let p: Vec<f64> = bounds.iter().map(|&(lo, hi, _)| open_uniform(&mut rng, lo, hi)).collect();
            m.point(&p)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCapacityReport {
    pub distinct_patterns: BigCount,
    pub distinct_coalitions: usize,
    /// Patterns seen in the first 90% of the samples.
    pub patterns_at_90pct: BigCount,
    /// No new pattern appeared in the last 10% of the samples.
    pub plateau: bool,
    pub d_eff: usize,
    /// `Φ(H, d_eff)`.
    pub bound_dense: BigCount,
    /// `2H` on a circle, `H + 1` on a segment (dense layers only).
    pub crossing_ceiling: Option<u64>,
    pub spherical_measure_estimate: Option<f64>,
    /// `measure · C(N,k) · Φ(kH, d_eff)`.
    pub bound_moe: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub warnings: Vec<String>,
}

/// Distinct activation patterns among `n` manifold samples.
///
/// `measure` is the spherical measure used for the MoE bound; pass the
/// result of [`spherical_measure`] or `None` to omit that bound.
pub fn effective_census<T: Scalar>(
    spec: &LayerSpec<T>,
    m: &ManifoldSpec<T>,
    n: usize,
    seed: u64,
    measure: Option<f64>,
) -> Result<EffectiveCapacityReport> {
    if spec.d_in() != m.d_in() {
        return Err(CoreError::DimensionMismatch { expected: spec.d_in(), got: m.d_in() });
    }
    let points = sample_manifold(m, n, seed)?;
    let domain = SampleDomain::Points(points);
    let full = census_labels(&domain, n, seed, |x| spec.pattern_at(x))?;
    let head = (n * 9 / 10).max(1);
    let early = census_labels(&domain, head, seed, |x| spec.pattern_at(x))?;
    let coalitions: BTreeSet<_> = full.labels.iter().map(|p| &p.coalition).collect();

    let h = spec.width();
    let d_eff = m.d_eff();
    let bound_dense = zaslavsky_phi(h as u64, d_eff as u64);
    let mut warnings = Vec::new();
    let crossing_ceiling = match (spec, m.kind()) {
        (LayerSpec::Dense(_), ManifoldKind::Segment) => Some(h as u64 + 1),
        (LayerSpec::Dense(_), ManifoldKind::Circle) => Some(2 * h as u64),
        _ => None,
    };
    let distinct = full.distinct();
    if m.is_closed() && num_bigint::BigUint::from(distinct) > bound_dense {
        warnings.push(format!(
            "closed manifold: {distinct} patterns exceed Phi(H, d_eff) = {bound_dense}; hyperplanes cut closed curves twice"
        ));
    }
    let bound_moe = match (spec, measure) {
        (LayerSpec::MoE(moe), Some(mu)) => {
            let c = binomial(moe.n_experts() as u64, moe.k() as u64);
            let phi = zaslavsky_phi((moe.k() * h) as u64, d_eff as u64);
            Some(mu * BigCount(c * phi).to_f64())
        }
        _ => None,
    };
    let plateau = early.distinct() == distinct;
    if !plateau {
        warnings.push(format!(
            "pattern count still growing: {} after 90% of samples, {distinct} at the end",
            early.distinct()
        ));
    }
    Ok(EffectiveCapacityReport {
        distinct_patterns: BigCount::from(distinct),
        distinct_coalitions: coalitions.len(),
        patterns_at_90pct: BigCount::from(early.distinct()),
        plateau,
        d_eff,
        bound_dense: bound_dense.into(),
        crossing_ceiling,
        spherical_measure_estimate: measure,
        bound_moe,
        samples: full.samples,
        seed,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{random_expert, ExpertSpec};

    fn e(i: usize, d: usize) -> Vec<f64> {
        (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn frame_validation() {
        assert!(ManifoldSpec::circle(vec![0.0; 3], 1.0, [e(0, 3), e(0, 3)]).is_err());
        assert!(ManifoldSpec::circle(vec![0.0; 3], 1.0, [e(0, 3), vec![0.0, 1.0 + 1e-9, 0.0]]).is_err());
        assert!(ManifoldSpec::circle(vec![0.0; 3], 1.0, [e(0, 3), vec![0.0, 1.0 + 1e-12, 0.0]]).is_ok());
        assert!(ManifoldSpec::circle(vec![0.0; 3], -1.0, [e(0, 3), e(1, 3)]).is_err());
        assert!(ManifoldSpec::segment(&[1.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(ManifoldSpec::affine_patch(vec![0.0; 2], 1.0, vec![e(0, 2), e(1, 2), e(0, 2)]).is_err());
        let json = r#"{"kind":"circle","center":[2.0,0.0,0.0],"radius":1.0,"frame":[[1.0,0.0,0.0],[0.0,1.0,0.0]]}"#;
        let m: ManifoldSpec<f64> = serde_json::from_str(json).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), json);
        assert!(serde_json::from_str::<ManifoldSpec<f64>>(&json.replace("1.0,0.0,0.0],[0.0", "1.0,0.0,0.0],[1.0")).is_err());
    }

    #[test]
    fn open_segment_sampling() {
        let m = ManifoldSpec::segment(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let pts = sample_manifold(&m, 1000, 1).unwrap();
        assert!(pts.iter().all(|p| p[0] > 0.0 && p[0] < 1.0 && p[1] == 0.0));
        assert_eq!(sample_manifold(&m, 3, 1).unwrap(), pts[..3].to_vec());
        assert!(sample_manifold(&m, 0, 1).is_err());
    }

    #[test]
    fn circle_samples_lie_on_circle() {
        let m = ManifoldSpec::circle(vec![2.0, 0.0, 0.0], 1.0, [e(0, 3), e(1, 3)]).unwrap();
        for p in sample_manifold(&m, 2000, 4).unwrap() {
            let dc = ((p[0] - 2.0).powi(2) + p[1].powi(2) + p[2].powi(2)).sqrt();
            assert!((dc - 1.0).abs() < 1e-12);
            let r = (p[0].powi(2) + p[1].powi(2) + p[2].powi(2)).sqrt();
            assert!((1.0 - 1e-12..=3.0 + 1e-12).contains(&r));
        }
    }

    #[test]
    fn origin_distance() {
        let c = ManifoldSpec::circle(vec![2.0, 0.0, 0.0], 1.0, [e(0, 3), e(1, 3)]).unwrap();
        assert!((c.distance_to_origin() - 1.0).abs() < 1e-12);
        let through = ManifoldSpec::circle(vec![1.0, 0.0, 0.0], 1.0, [e(0, 3), e(1, 3)]).unwrap();
        assert!(through.contains_origin());
        let s = ManifoldSpec::segment(&[-1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(s.contains_origin());
        let s = ManifoldSpec::segment(&[-1.0, 0.5], &[1.0, 0.5]).unwrap();
        assert!((s.distance_to_origin() - 0.5).abs() < 1e-12);
        let sphere = ManifoldSpec::sphere2(vec![0.0; 3], 1.0, [e(0, 3), e(1, 3), e(2, 3)], None).unwrap();
        assert!((sphere.distance_to_origin() - 1.0).abs() < 1e-12);
        let cap = ManifoldSpec::sphere2(vec![0.0, 0.0, 1.0], 1.0, [e(0, 3), e(1, 3), e(2, 3)], Some(0.5)).unwrap();
        assert!((cap.distance_to_origin() - (2.0 + 2.0 * 0.5f64.cos()).sqrt()).abs() < 1e-12);
        assert!(!cap.contains_origin());
        let full = ManifoldSpec::sphere2(vec![0.0, 0.0, -1.0], 1.0, [e(0, 3), e(1, 3), e(2, 3)], None).unwrap();
        assert!(full.contains_origin());
    }

    #[test]
    fn dense_segment_patterns_match_crossings() {
        let ex = random_expert::<f64>(8, 3, 2, 0);
        let (p, q) = ([-3.0, 0.5, 1.0], [3.0, -0.2, 0.4]);
        let m = ManifoldSpec::segment(&p, &q).unwrap();
        let crossings = ex
            .rows()
            .iter()
            .filter(|(w, b)| {
                let a: f64 = w.iter().zip(&p).map(|(x, y)| x * y).sum::<f64>() + b;
                let c: f64 = w.iter().zip(&q).map(|(x, y)| x * y).sum::<f64>() + b;
                a * c < 0.0
            })
            .count();
        let r = effective_census(&LayerSpec::Dense(ex), &m, 200_000, 1, None).unwrap();
        assert_eq!(r.distinct_patterns, BigCount::from(crossings + 1));
        assert!(crossings <= 8);
        assert_eq!(r.crossing_ceiling, Some(9));
        assert_eq!(r.distinct_coalitions, 1);
        assert!(r.plateau);
    }

    #[test]
    fn circle_against_one_line() {
        let ex = ExpertSpec::new(vec![vec![1.0, 0.3, 0.0]], vec![-2.1]).unwrap();
        let m = ManifoldSpec::circle(vec![2.0, 0.0, 0.0], 1.0, [e(0, 3), e(1, 3)]).unwrap();
        let r = effective_census(&LayerSpec::Dense(ex), &m, 10_000, 3, None).unwrap();
        assert_eq!(r.distinct_patterns, BigCount::from(2u64));
        assert_eq!(r.crossing_ceiling, Some(2));
    }

    #[test]
    fn monotone_in_samples() {
        let ex = random_expert::<f64>(6, 2, 9, 0);
        let m = ManifoldSpec::circle(vec![0.3, 0.1], 2.0, [e(0, 2), e(1, 2)]).unwrap();
        let spec = LayerSpec::Dense(ex);
        let mut last = BigCount::from(0u64);
        for n in [10, 100, 1000, 10_000] {
            let r = effective_census(&spec, &m, n, 5, None).unwrap();
            assert!(r.distinct_patterns >= last);
            last = r.distinct_patterns;
        }
    }
}
