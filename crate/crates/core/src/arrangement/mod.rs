//! Affine hyperplane arrangements: exact region enumeration certified by the
//! LP kernel, general-position checks, and Zaslavsky's region count.

mod census;
mod sign;

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use census::{multiscale_domain, sample_points, sampling_region_census, census_labels, Census, SampleDomain};
pub use sign::SignVector;

use crate::combinatorics::{binomial, Combinations};
use crate::error::{CoreError, Result};
use crate::linalg::{dot, norm, normalized_rank, solve};
use crate::lp::{strict_feasibility_with, LpOptions};
use crate::rng::{stream_rng, unit_sphere, Stream};
use crate::Scalar;

/// Default cap on hyperplanes handed to the exact enumerator.
pub const DEFAULT_N_MAX: usize = 24;

/// Zero set of `w·x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHyperplane<T>", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Hyperplane<T: Scalar> {
    #[serde(rename = "w")]
    normal: Vec<T>,
    #[serde(rename = "b")]
    offset: T,
}

#[derive(Deserialize)]
struct RawHyperplane<T> {
    w: Vec<T>,
    b: T,
}

impl<T: Scalar> TryFrom<RawHyperplane<T>> for Hyperplane<T> {
    type Error = CoreError;
    fn try_from(raw: RawHyperplane<T>) -> Result<Self> {
        Hyperplane::new(raw.w, raw.b)
    }
}

impl<T: Scalar> Hyperplane<T> {
    pub fn new(normal: Vec<T>, offset: T) -> Result<Self> {
        if !(norm(&normal) > T::zero()) {
            return Err(CoreError::ZeroNormal { index: 0 });
        }
        Ok(Hyperplane { normal, offset })
    }

    pub fn normal(&self) -> &[T] {
        &self.normal
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        dot(&self.normal, x) + self.offset
    }

    /// Positive side as a half-space.
    pub fn positive(&self) -> Halfspace<T> {
        Halfspace::new(self.normal.clone(), self.offset)
    }

    pub fn negative(&self) -> Halfspace<T> {
        Halfspace::new(self.normal.iter().map(|&w| -w).collect(), -self.offset)
    }

    pub fn side(&self, positive: bool) -> Halfspace<T> {
        if positive {
            self.positive()
        } else {
            self.negative()
        }
    }
}

/// Closed half-space `w·x + b ≥ 0` (strict in the interior).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halfspace<T> {
    #[serde(rename = "w")]
    pub normal: Vec<T>,
    #[serde(rename = "b")]
    pub offset: T,
}

impl<T: Scalar> Halfspace<T> {
    pub fn new(normal: Vec<T>, offset: T) -> Self {
        Halfspace { normal, offset }
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        dot(&self.normal, x) + self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArrangement<T>", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Arrangement<T: Scalar> {
    dimension: usize,
    hyperplanes: Vec<Hyperplane<T>>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
struct RawArrangement<T: Scalar> {
    dimension: usize,
    hyperplanes: Vec<Hyperplane<T>>,
}

impl<T: Scalar> TryFrom<RawArrangement<T>> for Arrangement<T> {
    type Error = CoreError;
    fn try_from(raw: RawArrangement<T>) -> Result<Self> {
        Arrangement::new(raw.dimension, raw.hyperplanes)
    }
}

impl<T: Scalar> Arrangement<T> {
    pub fn new(dimension: usize, hyperplanes: Vec<Hyperplane<T>>) -> Result<Self> {
        for h in &hyperplanes {
            if h.normal.len() != dimension {
                return Err(CoreError::DimensionMismatch { expected: dimension, got: h.normal.len() });
            }
        }
        Ok(Arrangement { dimension, hyperplanes })
    }

    /// Builds from rows `w_i` and offsets `b_i`, rejecting zero rows.
    pub fn from_rows(dimension: usize, rows: &[Vec<T>], offsets: &[T]) -> Result<Self> {
        if rows.len() != offsets.len() {
            return Err(CoreError::DimensionMismatch { expected: rows.len(), got: offsets.len() });
        }
        let hyperplanes = rows
            .iter()
            .zip(offsets)
            .enumerate()
            .map(|(i, (w, &b))| Hyperplane::new(w.clone(), b).map_err(|_| CoreError::ZeroNormal { index: i }))
            .collect::<Result<Vec<_>>>()?;
        Arrangement::new(dimension, hyperplanes)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn hyperplanes(&self) -> &[Hyperplane<T>] {
        &self.hyperplanes
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn push(&mut self, h: Hyperplane<T>) -> Result<()> {
        if h.normal.len() != self.dimension {
            return Err(CoreError::DimensionMismatch { expected: self.dimension, got: h.normal.len() });
        }
        self.hyperplanes.push(h);
        Ok(())
    }

    /// Sign vector of a point (zero counts as +).
    pub fn signs_at(&self, x: &[T]) -> SignVector {
        SignVector::from_bools(self.hyperplanes.iter().map(|h| h.eval(x) >= T::zero()))
    }
}

/// H-representation `{x : w_i·x + b_i ≥ 0}`; the empty list is all of R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyhedron<T> {
    pub dimension: usize,
    pub halfspaces: Vec<Halfspace<T>>,
}

impl<T: Scalar> Polyhedron<T> {
    pub fn whole(dimension: usize) -> Self {
        Polyhedron { dimension, halfspaces: Vec::new() }
    }

    pub fn new(dimension: usize, halfspaces: Vec<Halfspace<T>>) -> Result<Self> {
        for h in &halfspaces {
            if h.normal.len() != dimension {
                return Err(CoreError::DimensionMismatch { expected: dimension, got: h.normal.len() });
            }
        }
        Ok(Polyhedron { dimension, halfspaces })
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.halfspaces.iter().all(|h| h.eval(x) >= T::zero())
    }
}

/// `Φ(n, d) = Σ_{j=0}^{d} C(n, j)`, exact.
pub fn zaslavsky_phi(n: u64, d: u64) -> BigUint {
    (0..=d.min(n)).fold(BigUint::zero(), |acc, j| acc + binomial(n, j))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralPosition {
    pub holds: bool,
    pub violation: Option<String>,
}

/// Checks the three general-position clauses: no parallel pair, every
/// `min(n, d)` normals independent, and no `d + 1` hyperplanes through a point.
pub fn is_general_position<T: Scalar>(arr: &Arrangement<T>) -> GeneralPosition {
    let d = arr.dimension;
    let n = arr.len();
    let tol = T::lit(T::GP_EPS);
    let hs = &arr.hyperplanes;
    let fail = |msg: String| GeneralPosition { holds: false, violation: Some(msg) };

    for i in 0..n {
        for j in i + 1..n {
            let rows = [hs[i].normal.clone(), hs[j].normal.clone()];
            if d >= 2 && normalized_rank(&rows, tol) < 2 {
                return fail(format!("parallel pair ({i},{j})"));
            }
        }
    }
    let r = n.min(d);
    if r >= 3 {
        for subset in Combinations::new(n, r) {
            let rows: Vec<Vec<T>> = subset.iter().map(|&i| hs[i].normal.clone()).collect();
            if normalized_rank(&rows, tol) < r {
                return fail(format!("rank-deficient normals {subset:?}"));
            }
        }
    }
    if n > d {
        for subset in Combinations::new(n, d + 1) {
            let rows: Vec<Vec<T>> = subset
                .iter()
                .map(|&i| {
                    let w = &hs[i].normal;
                    let nw = norm(w);
                    let mut row: Vec<T> = w.iter().map(|&v| v / nw).collect();
                    row.push(hs[i].offset / nw);
                    row
                })
                .collect();
            if normalized_rank(&rows, tol) < d + 1 {
                return fail(format!("common point of hyperplanes {subset:?}"));
            }
        }
    }
    GeneralPosition { holds: true, violation: None }
}

/// Vertices of the arrangement formed by the given (normal, offset) rows,
/// capped at `max_subsets` d-subsets (evenly strided beyond the cap).
pub fn arrangement_vertices<T: Scalar>(rows: &[(Vec<T>, T)], dim: usize, max_subsets: usize) -> Vec<Vec<T>> {
    if dim == 0 || rows.len() < dim {
        return Vec::new();
    }
    let total = crate::combinatorics::binomial_u128(rows.len() as u64, dim as u64);
    let stride = (total / max_subsets.max(1) as u128).max(1);
    let tol = T::lit(T::GP_EPS);
    Combinations::new(rows.len(), dim)
        .enumerate()
        .filter(|(i, _)| (*i as u128) % stride == 0)
        .filter_map(|(_, subset)| {
            let a: Vec<Vec<T>> = subset.iter().map(|&i| rows[i].0.clone()).collect();
            let b: Vec<T> = subset.iter().map(|&i| -rows[i].1).collect();
            solve(&a, &b, tol)
        })
        .filter(|v| v.iter().all(|x| x.is_finite()))
        .collect()
}

/// Box radius large enough to contain every arrangement vertex, starting at
/// the scalar's default and growing ×10 up to its maximum.
pub fn certifying_box_radius<T: Scalar>(rows: &[(Vec<T>, T)], dim: usize) -> T {
    let extent = arrangement_vertices(rows, dim, 20_000)
        .iter()
        .flat_map(|v| v.iter())
        .fold(T::zero(), |acc, &x| acc.max(x.abs()));
    let mut r = T::lit(T::BOX_RADIUS);
    let max = T::lit(T::BOX_RADIUS_MAX);
    while r < T::lit(4.0) * extent && r < max {
        r = r * T::lit(10.0);
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationOptions<T> {
    pub n_max: usize,
    /// Overrides the automatically sized LP box.
    pub lp: Option<LpOptions<T>>,
    /// Random interior samples used to seed the flip search.
    pub seeds: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for EnumerationOptions<T> {
    fn default() -> Self {
        EnumerationOptions { n_max: DEFAULT_N_MAX, lp: None, seeds: 8, seed: 0 }
    }
}

/// One certified open region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region<T> {
    pub signs: SignVector,
    pub witness: Vec<T>,
    pub slack: T,
}

/// Coincident hyperplanes collapse to one class; `orientation[i]` records
/// whether hyperplane `i` agrees with its class representative.
struct Classes<T: Scalar> {
    reps: Vec<Hyperplane<T>>,
    class_of: Vec<usize>,
    orientation: Vec<bool>,
}

fn coincidence_classes<T: Scalar>(arr: &Arrangement<T>) -> Classes<T> {
    let tol = T::lit(T::GP_EPS);
    let mut reps: Vec<Hyperplane<T>> = Vec::new();
    let mut keys: Vec<Vec<T>> = Vec::new();
    let mut class_of = Vec::with_capacity(arr.len());
    let mut orientation = Vec::with_capacity(arr.len());
    for h in &arr.hyperplanes {
        let n = norm(&h.normal);
        let mut key: Vec<T> = h.normal.iter().map(|&w| w / n).collect();
        key.push(h.offset / n);
        let lead = key.iter().position(|v| v.abs() > tol).unwrap_or(0);
        let forward = key[lead] > T::zero();
        if !forward {
            key.iter_mut().for_each(|v| *v = -*v);
        }
        let found = keys
            .iter()
            .position(|k| k.iter().zip(&key).all(|(&a, &b)| (a - b).abs() <= tol));
        let c = match found {
            Some(c) => c,
            None => {
                keys.push(key);
                reps.push(if forward {
                    h.clone()
                } else {
                    Hyperplane { normal: h.normal.iter().map(|&w| -w).collect(), offset: -h.offset }
                });
                reps.len() - 1
            }
        };
        class_of.push(c);
        orientation.push(forward);
    }
    Classes { reps, class_of, orientation }
}

fn region_constraints<T: Scalar>(reps: &[Hyperplane<T>], signs: &SignVector, within: &Polyhedron<T>) -> Vec<Halfspace<T>> {
    reps.iter()
        .enumerate()
        .map(|(i, h)| h.side(signs.get(i)))
        .chain(within.halfspaces.iter().cloned())
        .collect()
}

/// Every sign vector whose open region meets the interior of `within`,
/// canonically sorted, each certified by a strict-feasibility LP.
///
/// The search seeds from random interior points and then flips one
/// hyperplane at a time; coincident hyperplanes are merged first so the flip
/// graph stays connected.
pub fn enumerate_regions<T: Scalar>(
    arr: &Arrangement<T>,
    within: &Polyhedron<T>,
    opts: &EnumerationOptions<T>,
) -> Result<Vec<Region<T>>> {
    let d = arr.dimension;
    if within.dimension != d {
        return Err(CoreError::DimensionMismatch { expected: d, got: within.dimension });
    }
    if arr.len() > opts.n_max {
        return Err(CoreError::BudgetExceeded {
            what: "hyperplanes",
            value: arr.len() as u128,
            budget: opts.n_max as u128,
            hint: "use the sampling census for large arrangements",
        });
    }
    for (i, h) in within.halfspaces.iter().enumerate() {
        if !(norm(&h.normal) > T::zero()) {
            return Err(CoreError::ZeroNormal { index: i });
        }
    }
    let classes = coincidence_classes(arr);
    let reps = &classes.reps;

    let rows: Vec<(Vec<T>, T)> = reps
        .iter()
        .map(|h| (h.normal.clone(), h.offset))
        .chain(within.halfspaces.iter().map(|h| (h.normal.clone(), h.offset)))
        .collect();
    let lp = match opts.lp {
        Some(lp) => lp,
        None => LpOptions::default().with_box(certifying_box_radius(&rows, d)),
    };

    let base = strict_feasibility_with(d, &within.halfspaces, &lp)?;
    let Some(center) = base.witness else {
        return Ok(Vec::new());
    };

    let certify = |sv: &SignVector| -> Result<Option<Region<T>>> {
        let cons = region_constraints(reps, sv, within);
        let r = strict_feasibility_with(d, &cons, &lp)?;
        Ok(r.witness.map(|w| Region { signs: sv.clone(), witness: w, slack: r.slack }))
    };
    let class_signs = |x: &[T]| SignVector::from_bools(reps.iter().map(|h| h.eval(x) >= T::zero()));

    let extent = rows
        .iter()
        .map(|(w, b)| b.abs() / norm(w))
        .fold(T::one(), |acc, v| acc.max(v));
    let radius = (base.slack * T::lit(0.5)).min(extent).max(T::lit(T::LP_EPS));
    let mut rng = stream_rng(opts.seed, Stream::Seeds, 0);
    let mut tested: HashSet<SignVector> = HashSet::new();
    let mut seeds = vec![class_signs(&center)];
    for _ in 0..opts.seeds {
        let u: Vec<T> = unit_sphere(&mut rng, d);
        let s = radius * T::lit(rng.random::<f64>());
        let x: Vec<T> = center.iter().zip(&u).map(|(&c, &v)| c + s * v).collect();
        seeds.push(class_signs(&x));
    }
    seeds.sort();
    seeds.dedup();
    let mut found: BTreeMap<SignVector, Region<T>> = BTreeMap::new();
    let mut frontier = Vec::new();
    for sv in seeds {
        tested.insert(sv.clone());
        if let Some(r) = certify(&sv)? {
            frontier.push(sv.clone());
            found.insert(sv, r);
        }
    }
    if found.is_empty() {
        // every seed landed on a measure-zero face or a sliver; fall back to flips from the first seed
        let sv = class_signs(&center);
        for i in 0..reps.len() {
            let c = sv.flipped(i);
            if tested.insert(c.clone()) {
                if let Some(r) = certify(&c)? {
                    frontier.push(c.clone());
                    found.insert(c, r);
                }
            }
        }
        if found.is_empty() {
            return Err(CoreError::IllConditioned { constraint: 0 });
        }
    }

    while !frontier.is_empty() {
        let mut candidates = Vec::new();
        for sv in &frontier {
            for i in 0..reps.len() {
                let c = sv.flipped(i);
                if tested.insert(c.clone()) {
                    candidates.push(c);
                }
            }
        }
        candidates.sort();
        let certified: Vec<Option<Region<T>>> = candidates.par_iter().map(certify).collect::<Result<_>>()?;
        frontier = Vec::new();
        for r in certified.into_iter().flatten() {
            frontier.push(r.signs.clone());
            found.insert(r.signs.clone(), r);
        }
    }

    let mut out: Vec<Region<T>> = found
        .into_values()
        .map(|r| {
            let signs = SignVector::from_bools(
                (0..arr.len()).map(|i| r.signs.get(classes.class_of[i]) == classes.orientation[i]),
            );
            Region { signs, ..r }
        })
        .collect();
    out.sort_by(|a, b| a.signs.cmp(&b.signs));
    Ok(out)
}

pub fn count_regions<T: Scalar>(arr: &Arrangement<T>, within: &Polyhedron<T>, opts: &EnumerationOptions<T>) -> Result<usize> {
    Ok(enumerate_regions(arr, within, opts)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::gaussian_matrix;

    fn arr(rows: &[(&[f64], f64)]) -> Arrangement<f64> {
        let d = rows[0].0.len();
        Arrangement::new(d, rows.iter().map(|(w, b)| Hyperplane::new(w.to_vec(), *b).unwrap()).collect()).unwrap()
    }

    fn count(a: &Arrangement<f64>) -> usize {
        count_regions(a, &Polyhedron::whole(a.dimension()), &EnumerationOptions::default()).unwrap()
    }

    #[test]
    fn phi_small_values() {
        assert_eq!(zaslavsky_phi(3, 2), BigUint::from(7u32));
        assert_eq!(zaslavsky_phi(0, 5), BigUint::from(1u32));
        for h in 0..20 {
            assert_eq!(zaslavsky_phi(h, 1), BigUint::from(h + 1));
        }
        assert_eq!(zaslavsky_phi(5, 2), BigUint::from(16u32));
        assert_eq!(zaslavsky_phi(12, 3), BigUint::from(299u32));
    }

    #[test]
    fn crossing_and_parallel_lines() {
        assert_eq!(count(&arr(&[(&[1.0, 0.0], 0.0), (&[0.0, 1.0], 0.0)])), 4);
        assert_eq!(count(&arr(&[(&[1.0, 1.0], 0.0), (&[1.0, 1.0], -1.0)])), 3);
    }

    #[test]
    fn coincident_hyperplanes_give_two_regions() {
        let a = arr(&[(&[1.0, 2.0], 1.0), (&[2.0, 4.0], 2.0), (&[-1.0, -2.0], -1.0)]);
        let regions = enumerate_regions(&a, &Polyhedron::whole(2), &EnumerationOptions::default()).unwrap();
        assert_eq!(regions.len(), 2);
        let labels: Vec<String> = regions.iter().map(|r| r.signs.to_string()).collect();
        assert!(labels.contains(&"++-".to_string()) && labels.contains(&"--+".to_string()));
    }

    #[test]
    fn witnesses_realize_their_sign_vectors() {
        let mut rng = stream_rng(3, Stream::Misc, 0);
        let w: Vec<Vec<f64>> = gaussian_matrix(&mut rng, 6, 3);
        let b: Vec<f64> = crate::rng::gaussian_vec(&mut rng, 6);
        let a = Arrangement::from_rows(3, &w, &b).unwrap();
        let regions = enumerate_regions(&a, &Polyhedron::whole(3), &EnumerationOptions::default()).unwrap();
        assert_eq!(BigUint::from(regions.len()), zaslavsky_phi(6, 3));
        for r in &regions {
            assert_eq!(a.signs_at(&r.witness), r.signs);
        }
    }

    #[test]
    fn restriction_to_a_polyhedron() {
        // two crossing lines restricted to x > 1: only the two right-hand quadrants... shifted
        let a = arr(&[(&[1.0, 0.0], 0.0), (&[0.0, 1.0], 0.0)]);
        let within = Polyhedron::new(2, vec![Halfspace::new(vec![1.0, 0.0], -1.0)]).unwrap();
        assert_eq!(count_regions(&a, &within, &EnumerationOptions::default()).unwrap(), 2);
        let empty = Polyhedron::new(
            2,
            vec![Halfspace::new(vec![1.0, 0.0], -1.0), Halfspace::new(vec![-1.0, 0.0], 0.0)],
        )
        .unwrap();
        assert_eq!(count_regions(&a, &empty, &EnumerationOptions::default()).unwrap(), 0);
    }

    #[test]
    fn budget_refusal() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64]).collect();
        let a = Arrangement::from_rows(2, &rows, &[0.0; 5]).unwrap();
        let opts = EnumerationOptions { n_max: 4, ..Default::default() };
        assert!(enumerate_regions(&a, &Polyhedron::whole(2), &opts).unwrap_err().is_budget());
    }

    #[test]
    fn general_position_clauses() {
        let gp = is_general_position(&arr(&[(&[1.0, 1.0], 0.0), (&[2.0, 2.0], -1.0)]));
        assert!(!gp.holds);
        assert_eq!(gp.violation.as_deref(), Some("parallel pair (0,1)"));
        let basis = arr(&[(&[1.0, 0.0, 0.0], 1.0), (&[0.0, 1.0, 0.0], 2.0), (&[0.0, 0.0, 1.0], 3.0)]);
        assert!(is_general_position(&basis).holds);
        // three lines through the origin in the plane
        let concurrent = arr(&[(&[1.0, 0.0], 0.0), (&[0.0, 1.0], 0.0), (&[1.0, 1.0], 0.0)]);
        let gp = is_general_position(&concurrent);
        assert!(!gp.holds);
        assert!(gp.violation.unwrap().starts_with("common point"));
        // three normals in a plane in R^3
        let flat = arr(&[(&[1.0, 0.0, 0.0], 1.0), (&[0.0, 1.0, 0.0], 2.0), (&[1.0, 1.0, 0.0], 5.0)]);
        assert!(is_general_position(&flat).violation.unwrap().starts_with("rank-deficient"));
        // coincident points on a line
        let pts = arr(&[(&[1.0], 1.0), (&[2.0], 2.0)]);
        assert!(!is_general_position(&pts).holds);
        assert!(is_general_position(&arr(&[(&[1.0], 1.0), (&[2.0], 3.0)])).holds);
    }

    #[test]
    fn rejects_zero_normals() {
        assert!(Hyperplane::new(vec![0.0, 0.0], 1.0).is_err());
        assert_eq!(
            Arrangement::from_rows(2, &[vec![1.0, 0.0], vec![0.0, 0.0]], &[0.0, 0.0]).unwrap_err(),
            CoreError::ZeroNormal { index: 1 }
        );
        let json = r#"{"dimension":2,"hyperplanes":[{"w":[0.0,0.0],"b":1.0}]}"#;
        assert!(serde_json::from_str::<Arrangement<f64>>(json).is_err());
    }

    #[test]
    fn arrangement_json_shape() {
        let a = arr(&[(&[1.0, 0.0], 0.5)]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"dimension":2,"hyperplanes":[{"w":[1.0,0.0],"b":0.5}]}"#);
        let back: Arrangement<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn single_precision_counts() {
        let a = Arrangement::new(
            2,
            vec![
                Hyperplane::new(vec![1.0f32, 0.0], 0.0).unwrap(),
                Hyperplane::new(vec![0.0f32, 1.0], 0.0).unwrap(),
                Hyperplane::new(vec![1.0f32, 1.0], -1.0).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(count_regions(&a, &Polyhedron::whole(2), &EnumerationOptions::default()).unwrap(), 7);
    }
}
