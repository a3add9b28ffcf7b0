//! Sampling censuses: distinct labels (sign vectors, activation patterns)
//! over random points of a domain. Always a lower bound on the exact count.

use std::collections::{BTreeSet, HashSet};
use std::hash::Hash;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{arrangement_vertices, Arrangement, Polyhedron, SignVector};
use crate::error::{CoreError, Result};
use crate::linalg::dot;
use crate::lp::{strict_feasibility_with, LpOptions};
use crate::rng::{gaussian, stream_rng, unit_sphere, Stream};
use crate::Scalar;

/// Samples per RNG block. Fixed so results do not depend on thread count.
pub const BLOCK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub enum SampleDomain<T> {
    /// Uniform in an axis-aligned box.
    Box { lower: Vec<T>, upper: Vec<T> },
    /// Hit-and-run inside a polyhedron intersected with `±box_radius`.
    Polyhedron { polyhedron: Polyhedron<T>, box_radius: T },
    /// A fixed sample set (e.g. manifold samples); `n_samples` takes a prefix.
    Points(Vec<Vec<T>>),
    /// Half uniform in `±radius`, half Gaussian bursts around anchor points at
    /// log-uniform scales down to `radius · 1e-7`. Reaches the small regions
    /// near arrangement vertices that a plain box misses.
    MultiScale { dimension: usize, anchors: Vec<Vec<T>>, radius: T },
}

impl<T: Scalar> SampleDomain<T> {
    pub fn dimension(&self) -> usize {
        match self {
            SampleDomain::Box { lower, .. } => lower.len(),
            SampleDomain::Polyhedron { polyhedron, .. } => polyhedron.dimension,
            SampleDomain::Points(p) => p.first().map_or(0, |x| x.len()),
            SampleDomain::MultiScale { dimension, .. } => *dimension,
        }
    }
}

/// Multi-scale domain anchored at the vertices of the arrangement formed by
/// `rows` (capped), with a box four times the vertex extent.
pub fn multiscale_domain<T: Scalar>(rows: &[(Vec<T>, T)], dim: usize) -> SampleDomain<T> {
    let anchors = arrangement_vertices(rows, dim, 5_000);
    let extent = anchors
        .iter()
        .flat_map(|v| v.iter())
        .fold(T::one(), |acc, &x| acc.max(x.abs()));
    let offsets = rows
        .iter()
        .map(|(w, b)| b.abs() / crate::linalg::norm(w))
        .fold(T::one(), |acc, v| acc.max(v));
    SampleDomain::MultiScale { dimension: dim, anchors, radius: T::lit(4.0) * extent.max(offsets) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Census<K> {
    pub samples: usize,
    pub labels: BTreeSet<K>,
}

impl<K> Census<K> {
    pub fn distinct(&self) -> usize {
        self.labels.len()
    }
}

enum Prepared<'a, T> {
    Box(&'a [T], &'a [T]),
    Chain { poly: &'a Polyhedron<T>, start: Vec<T>, radius: T },
    Points(&'a [Vec<T>]),
    Multi { dim: usize, anchors: &'a [Vec<T>], radius: T },
}

fn prepare<T: Scalar>(domain: &SampleDomain<T>) -> Result<Prepared<'_, T>> {
    Ok(match domain {
        SampleDomain::Box { lower, upper } => {
            if lower.len() != upper.len() {
                return Err(CoreError::DimensionMismatch { expected: lower.len(), got: upper.len() });
            }
            if lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
                return Err(CoreError::EmptyDomain { attempts: 0 });
            }
            Prepared::Box(lower, upper)
        }
        SampleDomain::Polyhedron { polyhedron, box_radius } => {
            let opts = LpOptions::default().with_box(*box_radius);
            let r = strict_feasibility_with(polyhedron.dimension, &polyhedron.halfspaces, &opts)?;
            let start = r.witness.ok_or(CoreError::EmptyDomain { attempts: 1 })?;
            Prepared::Chain { poly: polyhedron, start, radius: *box_radius }
        }
        SampleDomain::Points(p) => {
            if p.is_empty() {
                return Err(CoreError::EmptyDomain { attempts: 0 });
            }
            Prepared::Points(p)
        }
        SampleDomain::MultiScale { dimension, anchors, radius } => {
            Prepared::Multi { dim: *dimension, anchors, radius: *radius }
        }
    })
}

fn hit_and_run_step<T: Scalar>(rng: &mut ChaCha8Rng, poly: &Polyhedron<T>, radius: T, x: &mut Vec<T>) {
    let d = x.len();
    let u: Vec<T> = unit_sphere(rng, d);
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    for h in &poly.halfspaces {
        let s = h.eval(x);
        let r = dot(&h.normal, &u);
        if r > T::zero() {
            lo = lo.max(-s / r);
        } else if r < T::zero() {
            hi = hi.min(-s / r);
        }
    }
    for j in 0..d {
        if u[j] > T::zero() {
            hi = hi.min((radius - x[j]) / u[j]);
            lo = lo.max((-radius - x[j]) / u[j]);
        } else if u[j] < T::zero() {
            hi = hi.min((-radius - x[j]) / u[j]);
            lo = lo.max((radius - x[j]) / u[j]);
        }
    }
    if lo < hi && lo.is_finite() && hi.is_finite() {
        let t = lo + (hi - lo) * T::lit(rng.random::<f64>());
        for j in 0..d {
            x[j] = x[j] + t * u[j];
        }
    }
}

fn block_points<T: Scalar>(p: &Prepared<'_, T>, seed: u64, block: usize, count: usize) -> Vec<Vec<T>> {
    let mut rng = stream_rng(seed, Stream::Samples, block as u64);
    match p {
        Prepared::Box(lower, upper) => (0..count)
            .map(|_| {
                lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(&l, &u)| l + (u - l) * T::lit(rng.random::<f64>()))
                    .collect()
            })
            .collect(),
        Prepared::Chain { poly, start, radius } => {
            let mut x = start.clone();
            for _ in 0..16 {
                hit_and_run_step(&mut rng, poly, *radius, &mut x);
            }
            (0..count)
                .map(|_| {
                    hit_and_run_step(&mut rng, poly, *radius, &mut x);
                    x.clone()
                })
                .collect()
        }
        Prepared::Points(pts) => {
            let start = block * BLOCK;
            pts[start..start + count].to_vec()
        }
        Prepared::Multi { dim, anchors, radius } => (0..count)
            .map(|_| {
                if anchors.is_empty() || rng.random::<bool>() {
                    (0..*dim)
                        .map(|_| *radius * T::lit(2.0 * rng.random::<f64>() - 1.0))
                        .collect()
                } else {
                    let a = &anchors[rng.random_range(0..anchors.len())];
                    let s = *radius * T::lit(10f64.powf(-7.0 * rng.random::<f64>()));
                    a.iter().map(|&c| c + s * gaussian::<T, _>(&mut rng)).collect()
                }
            })
            .collect(),
    }
}

fn total_samples<T>(p: &Prepared<'_, T>, n: usize) -> usize {
    match p {
        Prepared::Points(pts) => n.min(pts.len()),
        _ => n,
    }
}

/// Materializes the first `n` samples of a domain (deterministic in `seed`).
pub fn sample_points<T: Scalar>(domain: &SampleDomain<T>, n: usize, seed: u64) -> Result<Vec<Vec<T>>> {
    let p = prepare(domain)?;
    let n = total_samples(&p, n);
    let blocks = n.div_ceil(BLOCK);
    Ok((0..blocks)
        .into_par_iter()
        .map(|b| block_points(&p, seed, b, BLOCK.min(n - b * BLOCK)))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect())
}

/// Distinct `label(x)` over `n` samples of the domain.
pub fn census_labels<T, K, F>(domain: &SampleDomain<T>, n: usize, seed: u64, label: F) -> Result<Census<K>>
where
    T: Scalar,
    K: Ord + Hash + Send + Clone,
    F: Fn(&[T]) -> K + Sync,
{
    if n == 0 {
        return Err(CoreError::InvalidArgument("census needs at least one sample".into()));
    }
    let p = prepare(domain)?;
    let n = total_samples(&p, n);
    let blocks = n.div_ceil(BLOCK);
    let sets: Vec<HashSet<K>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            block_points(&p, seed, b, BLOCK.min(n - b * BLOCK))
                .iter()
                .map(|x| label(x))
                .collect()
        })
        .collect();
    let mut labels = BTreeSet::new();
    for s in sets {
        labels.extend(s);
    }
    Ok(Census { samples: n, labels })
}

/// Distinct sign vectors of `arr` among `n` samples of `domain`.
pub fn sampling_region_census<T: Scalar>(
    arr: &Arrangement<T>,
    domain: &SampleDomain<T>,
    n: usize,
    seed: u64,
) -> Result<Census<SignVector>> {
    if domain.dimension() != arr.dimension() {
        return Err(CoreError::DimensionMismatch { expected: arr.dimension(), got: domain.dimension() });
    }
    census_labels(domain, n, seed, |x| arr.signs_at(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{count_regions, EnumerationOptions, Halfspace, Hyperplane};

    #[test]
    fn one_line_box_census() {
        let a = Arrangement::new(2, vec![Hyperplane::new(vec![1.0, -1.0], 0.1).unwrap()]).unwrap();
        let dom = SampleDomain::Box { lower: vec![-1.0, -1.0], upper: vec![1.0, 1.0] };
        assert_eq!(sampling_region_census(&a, &dom, 1000, 1).unwrap().distinct(), 2);
    }

    #[test]
    fn census_is_deterministic_and_bounded() {
        let a = Arrangement::from_rows(
            2,
            &[vec![1.0, 0.2], vec![-0.3, 1.0], vec![0.7, 0.7]],
            &[0.1, -0.2, 0.05],
        )
        .unwrap();
        let rows: Vec<_> = a.hyperplanes().iter().map(|h| (h.normal().to_vec(), h.offset())).collect();
        let dom = multiscale_domain(&rows, 2);
        let c1 = sampling_region_census(&a, &dom, 20_000, 5).unwrap();
        let c2 = sampling_region_census(&a, &dom, 20_000, 5).unwrap();
        assert_eq!(c1, c2);
        let exact = count_regions(&a, &Polyhedron::whole(2), &EnumerationOptions::default()).unwrap();
        assert!(c1.distinct() <= exact);
        assert_eq!(c1.distinct(), 7);
    }

    #[test]
    fn hit_and_run_stays_inside() {
        let poly = Polyhedron::new(
            2,
            vec![
                Halfspace::new(vec![1.0, 0.0], 0.0),
                Halfspace::new(vec![0.0, 1.0], 0.0),
                Halfspace::new(vec![-1.0, -1.0], 1.0),
            ],
        )
        .unwrap();
        let dom = SampleDomain::Polyhedron { polyhedron: poly.clone(), box_radius: 10.0 };
        let pts = sample_points(&dom, 5000, 2).unwrap();
        assert_eq!(pts.len(), 5000);
        assert!(pts.iter().all(|x| poly.contains(x)));
        let mean_x = pts.iter().map(|p| p[0]).sum::<f64>() / 5000.0;
        assert!((mean_x - 1.0 / 3.0).abs() < 0.05, "{mean_x}");
    }

    #[test]
    fn empty_domains_are_reported() {
        let poly = Polyhedron::new(
            1,
            vec![Halfspace::new(vec![1.0], -1.0), Halfspace::new(vec![-1.0], 0.0)],
        )
        .unwrap();
        let dom = SampleDomain::Polyhedron { polyhedron: poly, box_radius: 10.0 };
        assert!(matches!(sample_points(&dom, 10, 0), Err(CoreError::EmptyDomain { .. })));
        let dom = SampleDomain::<f64>::Box { lower: vec![1.0], upper: vec![1.0] };
        assert!(matches!(sample_points(&dom, 10, 0), Err(CoreError::EmptyDomain { .. })));
    }

    #[test]
    fn sample_prefix_is_stable() {
        let dom = SampleDomain::Box { lower: vec![0.0; 3], upper: vec![1.0; 3] };
        let a = sample_points(&dom, 5000, 9).unwrap();
        let b = sample_points(&dom, 9000, 9).unwrap();
        assert_eq!(&b[..5000], &a[..]);
    }
}
