//! Top-k routing geometry.
//!
//! A coalition `I` wins at `x` when each of its members beats each outsider:
//! the routing cell is cut out by the `k(N−k)` swap half-spaces
//! `(w_u − w_v)·x + (b_u − b_v) ≥ 0`, `u ∈ I`, `v ∉ I`. Every coalition
//! comparison with a larger exchange is a sum of swap comparisons, which
//! [`verify_redundancy`] checks by LP.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::{certifying_box_radius, sample_points, Halfspace, Polyhedron, SampleDomain};
use crate::combinatorics::{binomial_u128, Combinations};
use crate::error::{CoreError, Result};
use crate::linalg::{dot, norm, orthogonal_complement};
use crate::lp::{maximize_affine, strict_feasibility_with, FeasibilityResult, LpOptions};
use crate::rng::{gaussian_matrix, gaussian_vec, stream_rng, Stream};
use crate::tropical::tie_tolerance;
use crate::Scalar;

/// Default cap on the number of coalitions examined exhaustively.
pub const DEFAULT_COALITION_BUDGET: u128 = 100_000;

/// Router `z = W_r x + b_r` selecting the top `k` of `N` experts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRouter<T>", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct RouterSpec<T: Scalar> {
    #[serde(rename = "W_r")]
    weights: Vec<Vec<T>>,
    #[serde(rename = "b_r")]
    biases: Vec<T>,
    k: usize,
}

#[derive(Deserialize)]
struct RawRouter<T> {
    #[serde(rename = "W_r")]
    weights: Vec<Vec<T>>,
    #[serde(rename = "b_r")]
    biases: Vec<T>,
    k: usize,
}

impl<T: Scalar> TryFrom<RawRouter<T>> for RouterSpec<T> {
    type Error = CoreError;
    fn try_from(r: RawRouter<T>) -> Result<Self> {
        RouterSpec::new(r.weights, r.biases, r.k)
    }
}

impl<T: Scalar> RouterSpec<T> {
    pub fn new(weights: Vec<Vec<T>>, biases: Vec<T>, k: usize) -> Result<Self> {
        let n = weights.len();
        if n < 2 {
            return Err(CoreError::InvalidArgument(format!("router needs N >= 2 experts, got {n}")));
        }
        if biases.len() != n {
            return Err(CoreError::DimensionMismatch { expected: n, got: biases.len() });
        }
        let d = weights[0].len();
        if d == 0 {
            return Err(CoreError::InvalidArgument("router input dimension must be positive".into()));
        }
        if let Some(row) = weights.iter().find(|r| r.len() != d) {
            return Err(CoreError::DimensionMismatch { expected: d, got: row.len() });
        }
        if k == 0 || k > n {
            return Err(CoreError::InvalidArgument(format!("k = {k} out of range 1..={n}")));
        }
        Ok(RouterSpec { weights, biases, k })
    }

    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn biases(&self) -> &[T] {
        &self.biases
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_experts(&self) -> usize {
        self.weights.len()
    }

    pub fn d_in(&self) -> usize {
        self.weights[0].len()
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        RouterSpec::new(self.weights.clone(), self.biases.clone(), k)
    }

    /// Same weights, zero offsets.
    pub fn centered(&self) -> Self {
        RouterSpec { weights: self.weights.clone(), biases: vec![T::zero(); self.n_experts()], k: self.k }
    }

    pub fn logits(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.d_in() {
            return Err(CoreError::DimensionMismatch { expected: self.d_in(), got: x.len() });
        }
        Ok(self.logits_unchecked(x))
    }

    #[inline]
    pub(crate) fn logits_unchecked(&self, x: &[T]) -> Vec<T> {
        self.weights.iter().zip(&self.biases).map(|(w, &b)| dot(w, x) + b).collect()
    }

    /// Coalition score `S_I(x) = Σ_{i∈I} z_i(x)` as an affine function `(c, c0)`.
    pub fn coalition_score(&self, members: &[usize]) -> (Vec<T>, T) {
        let mut c = vec![T::zero(); self.d_in()];
        let mut c0 = T::zero();
        for &i in members {
            for (a, &w) in c.iter_mut().zip(&self.weights[i]) {
                *a = *a + w;
            }
            c0 = c0 + self.biases[i];
        }
        (c, c0)
    }
}

/// Sorted, duplicate-free set of expert indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Coalition(Vec<usize>);

impl TryFrom<Vec<usize>> for Coalition {
    type Error = CoreError;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Coalition::from_members(v)
    }
}

impl From<Coalition> for Vec<usize> {
    fn from(c: Coalition) -> Vec<usize> {
        c.0
    }
}

impl Coalition {
    /// Canonicalizes `members`; duplicates are an error.
    pub fn from_members(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(CoreError::InvalidArgument(format!("duplicate coalition member in {members:?}")));
        }
        Ok(Coalition(members))
    }

    pub fn new(members: Vec<usize>, n: usize, k: usize) -> Result<Self> {
        let c = Coalition::from_members(members)?;
        if c.0.len() != k {
            return Err(CoreError::InvalidArgument(format!("coalition {c} has size {} != k = {k}", c.0.len())));
        }
        if c.0.last().is_some_and(|&m| m >= n) {
            return Err(CoreError::InvalidArgument(format!("coalition {c} exceeds N = {n}")));
        }
        Ok(c)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices of `0..n` not in the coalition.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| !self.contains(i)).collect()
    }

    /// `|I \ J|`
    pub fn exchange_size(&self, other: &Coalition) -> usize {
        self.0.iter().filter(|&&i| !other.contains(i)).count()
    }

    pub fn symmetric_difference(&self, other: &Coalition) -> usize {
        self.exchange_size(other) + other.exchange_size(self)
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

/// Indices of the `k` largest entries; ties at the cut go to the lower index.
pub fn top_k_indices<T: Scalar>(z: &[T], k: usize) -> Coalition {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| z[b].partial_cmp(&z[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    Coalition(idx)
}

pub fn route_top_k<T: Scalar>(router: &RouterSpec<T>, x: &[T]) -> Result<Coalition> {
    Ok(top_k_indices(&router.logits(x)?, router.k))
}

pub(crate) fn route_unchecked<T: Scalar>(router: &RouterSpec<T>, x: &[T]) -> Coalition {
    top_k_indices(&router.logits_unchecked(x), router.k)
}

/// Restricted softmax over the active coalition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateVector<T> {
    pub weights: Vec<T>,
    pub active: Coalition,
}

pub fn gate_weights<T: Scalar>(router: &RouterSpec<T>, x: &[T]) -> Result<GateVector<T>> {
    let z = router.logits(x)?;
    let active = top_k_indices(&z, router.k);
    let m = active.members().iter().fold(T::neg_infinity(), |acc, &i| acc.max(z[i]));
    let mut weights = vec![T::zero(); z.len()];
    let mut total = T::zero();
    for &i in active.members() {
        let e = (z[i] - m).exp();
        weights[i] = e;
        total = total + e;
    }
    for &i in active.members() {
        weights[i] = weights[i] / total;
    }
    Ok(GateVector { weights, active })
}

/// Full softmax with max subtraction.
pub fn softmax<T: Scalar>(z: &[T]) -> Vec<T> {
    let m = z.iter().fold(T::neg_infinity(), |acc, &v| acc.max(v));
    let e: Vec<T> = z.iter().map(|&v| (v - m).exp()).collect();
    let s = e.iter().fold(T::zero(), |acc, &v| acc + v);
    e.into_iter().map(|v| v / s).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingCell<T> {
    pub coalition: Coalition,
    pub dimension: usize,
    /// All `k(N−k)` swap half-spaces, ordered by `(u, v)`.
    pub halfspaces: Vec<Halfspace<T>>,
    pub feasible: FeasibilityResult<T>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> RoutingCell<T> {
    /// Swap half-spaces with nonzero normals (what the LP sees).
    pub fn proper_halfspaces(&self) -> Vec<Halfspace<T>> {
        self.halfspaces.iter().filter(|h| norm(&h.normal) > T::zero()).cloned().collect()
    }

    pub fn polyhedron(&self) -> Polyhedron<T> {
        Polyhedron { dimension: self.dimension, halfspaces: self.proper_halfspaces() }
    }
}

pub fn swap_halfspaces<T: Scalar>(router: &RouterSpec<T>, coalition: &Coalition) -> Vec<Halfspace<T>> {
    let n = router.n_experts();
    let outside = coalition.complement(n);
    let mut out = Vec::with_capacity(coalition.len() * outside.len());
    for &u in coalition.members() {
        for &v in &outside {
            let normal: Vec<T> = router.weights[u].iter().zip(&router.weights[v]).map(|(&a, &b)| a - b).collect();
            out.push(Halfspace::new(normal, router.biases[u] - router.biases[v]));
        }
    }
    out
}

fn lp_for<T: Scalar>(halfspaces: &[Halfspace<T>], d: usize) -> LpOptions<T> {
    let rows: Vec<(Vec<T>, T)> = halfspaces.iter().map(|h| (h.normal.clone(), h.offset)).collect();
    LpOptions::default().with_box(certifying_box_radius(&rows, d))
}

pub fn build_routing_cell<T: Scalar>(router: &RouterSpec<T>, coalition: &Coalition) -> Result<RoutingCell<T>> {
    let n = router.n_experts();
    let coalition = Coalition::new(coalition.members().to_vec(), n, router.k)?;
    let d = router.d_in();
    let halfspaces = swap_halfspaces(router, &coalition);
    let mut warnings = Vec::new();
    let mut blocked = false;
    let mut proper = Vec::new();
    let outside = coalition.complement(n);
    let mut idx = 0;
    for &u in coalition.members() {
        for &v in &outside {
            let h = &halfspaces[idx];
            idx += 1;
            if norm(&h.normal) > T::zero() {
                proper.push(h.clone());
                continue;
            }
            if h.offset == T::zero() {
                warnings.push(format!("degenerate router: experts {u} and {v} have identical logits"));
            }
            if h.offset <= T::zero() {
                // u never strictly beats v
                blocked = true;
            }
        }
    }
    let feasible = if blocked {
        FeasibilityResult { feasible: false, witness: None, slack: T::zero() }
    } else {
        strict_feasibility_with(d, &proper, &lp_for(&proper, d))?
    };
    Ok(RoutingCell { coalition, dimension: d, halfspaces, feasible, warnings })
}

fn check_budget(n: usize, k: usize, budget: u128) -> Result<()> {
    let count = binomial_u128(n as u64, k as u64);
    if count > budget {
        return Err(CoreError::BudgetExceeded {
            what: "coalitions",
            value: count,
            budget,
            hint: "reduce N or k, or raise the coalition budget",
        });
    }
    Ok(())
}

/// Feasible cells in lexicographic coalition order.
pub fn enumerate_routing_cells<T: Scalar>(router: &RouterSpec<T>, budget: u128) -> Result<Vec<RoutingCell<T>>> {
    let n = router.n_experts();
    check_budget(n, router.k, budget)?;
    let coalitions: Vec<Coalition> = Combinations::new(n, router.k).map(Coalition).collect();
    let cells: Vec<RoutingCell<T>> = coalitions
        .par_iter()
        .map(|c| build_routing_cell(router, c))
        .collect::<Result<_>>()?;
    Ok(cells.into_iter().filter(|c| c.feasible.feasible).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedundancyReport<T> {
    pub coalition: Coalition,
    /// Competing coalitions with `|I \ J| > 1` that were LP-checked.
    pub competitors_checked: usize,
    /// Largest normalized `max (S_J − S_I)` over the swap cell.
    pub max_lp_excess: T,
    /// Competitors whose excess fell between `ε_lp` and `10·ε_lp`.
    pub marginal: Vec<Coalition>,
    pub samples_checked: usize,
    /// Interior samples where some `S_J` beat `S_I` beyond the tie band.
    pub sample_violations: usize,
}

fn competitors<T: Scalar>(router: &RouterSpec<T>, coalition: &Coalition, seed: u64) -> Vec<Coalition> {
    let n = router.n_experts();
    let k = router.k;
    if n <= 8 {
        return Combinations::new(n, k)
            .map(Coalition)
            .filter(|j| coalition.exchange_size(j) > 1)
            .collect();
    }
    let mut rng = stream_rng(seed, Stream::Misc, 17);
    let mut out = Vec::new();
    for _ in 0..256 {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            pool.swap(i, j);
        }
        let j = Coalition::from_members(pool[..k].to_vec()).expect("distinct draws");
        if coalition.exchange_size(&j) > 1 {
            out.push(j);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Certifies that every coalition comparison with exchange size > 1 is implied
/// by the swap half-spaces of `coalition`, by LP and by interior sampling.
pub fn verify_redundancy<T: Scalar>(
    router: &RouterSpec<T>,
    coalition: &Coalition,
    trials: usize,
    seed: u64,
) -> Result<RedundancyReport<T>> {
    let cell = build_routing_cell(router, coalition)?;
    let Some(witness) = cell.feasible.witness.clone() else {
        return Err(CoreError::InvalidArgument(format!("cell {} has empty interior", cell.coalition)));
    };
    let d = router.d_in();
    let proper = cell.proper_halfspaces();
    let lp = lp_for(&proper, d);
    let eps = T::lit(T::LP_EPS);
    let (si, si0) = router.coalition_score(coalition.members());
    let comps = competitors(router, coalition, seed);

    let excesses: Vec<(Coalition, T)> = comps
        .par_iter()
        .map(|j| {
            let (sj, sj0) = router.coalition_score(j.members());
            let c: Vec<T> = sj.iter().zip(&si).map(|(&a, &b)| a - b).collect();
            let c0 = sj0 - si0;
            let cn = norm(&c);
            let excess = if cn > T::zero() {
                let cu: Vec<T> = c.iter().map(|&v| v / cn).collect();
                match maximize_affine(d, (&cu, c0 / cn), &proper, &lp)? {
                    Some((v, _)) => v,
                    None => T::neg_infinity(),
                }
            } else {
                c0
            };
            Ok((j.clone(), excess))
        })
        .collect::<Result<_>>()?;

    let mut max_lp_excess = T::neg_infinity();
    let mut marginal = Vec::new();
    for (j, e) in &excesses {
        max_lp_excess = max_lp_excess.max(*e);
        if *e > T::lit(10.0) * eps {
            return Err(CoreError::PropertyFailure(format!(
                "coalition {j} beats {} by {e:e} inside the swap cell",
                cell.coalition
            )));
        }
        if *e > eps {
            marginal.push(j.clone());
        }
    }

    let radius = T::lit(10.0) * (T::one() + norm(&witness));
    let mut sample_violations = 0;
    let mut samples_checked = 0;
    if trials > 0 {
        let domain = SampleDomain::Polyhedron { polyhedron: cell.polyhedron(), box_radius: radius };
        let points = sample_points(&domain, trials, seed)?;
        for x in &points {
            samples_checked += 1;
            let z = router.logits_unchecked(x);
            let s_i: T = coalition.members().iter().map(|&i| z[i]).fold(T::zero(), |a, b| a + b);
            let beaten = comps.iter().any(|j| {
                let s_j = j.members().iter().map(|&i| z[i]).fold(T::zero(), |a, b| a + b);
                s_j - s_i > tie_tolerance(s_i)
            });
            if beaten {
                sample_violations += 1;
            }
        }
    }
    Ok(RedundancyReport {
        coalition: cell.coalition,
        competitors_checked: comps.len(),
        max_lp_excess,
        marginal,
        samples_checked,
        sample_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypersimplexVertex<T> {
    pub coalition: Coalition,
    /// `v_I = W_rᵀ e_I = Σ_{i∈I} w_i`
    pub vertex: Vec<T>,
    pub is_extreme: bool,
}

/// Projects the hypersimplex vertices through `W_rᵀ` and tests each for
/// extremality: `v_I` is a vertex of the hull iff some direction `c` has
/// `c·v_I > c·v_J` for every other coalition.
pub fn hypersimplex_projection<T: Scalar>(router: &RouterSpec<T>, budget: u128) -> Result<Vec<HypersimplexVertex<T>>> {
    let n = router.n_experts();
    let k = router.k;
    check_budget(n, k, budget)?;
    let d = router.d_in();
    let coalitions: Vec<Coalition> = Combinations::new(n, k).map(Coalition).collect();
    let vertices: Vec<Vec<T>> = coalitions.iter().map(|c| router.coalition_score(c.members()).0).collect();
    let lp = LpOptions::default();
    coalitions
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut cons = Vec::with_capacity(vertices.len());
            let mut duplicate = false;
            for (j, v) in vertices.iter().enumerate() {
                if j == i {
                    continue;
                }
                let diff: Vec<T> = vertices[i].iter().zip(v).map(|(&a, &b)| a - b).collect();
                if norm(&diff) <= T::lit(T::GP_EPS) {
                    duplicate = true;
                    break;
                }
                cons.push(Halfspace::new(diff, T::zero()));
            }
            let is_extreme = !duplicate && strict_feasibility_with(d, &cons, &lp)?.feasible;
            Ok(HypersimplexVertex { coalition: c.clone(), vertex: vertices[i].clone(), is_extreme })
        })
        .collect()
}

/// Pairs of feasible cells whose closures share a (d−1)-dimensional face,
/// found independently of the swap structure: `I` and `J` are adjacent iff
/// `S_I = S_J` beats every other coalition strictly on a relatively open
/// subset of that hyperplane.
pub fn fan_adjacency<T: Scalar>(router: &RouterSpec<T>, budget: u128) -> Result<Vec<(Coalition, Coalition)>> {
    let n = router.n_experts();
    let k = router.k;
    check_budget(n, k, budget)?;
    let d = router.d_in();
    let all: Vec<Coalition> = Combinations::new(n, k).map(Coalition).collect();
    let feasible: Vec<Coalition> = enumerate_routing_cells(router, budget)?.into_iter().map(|c| c.coalition).collect();
    let scores: Vec<(Vec<T>, T)> = all.iter().map(|c| router.coalition_score(c.members())).collect();
    let index_of = |c: &Coalition| all.iter().position(|a| a == c).expect("coalition in list");
    let mut pairs = Vec::new();
    for (a, ci) in feasible.iter().enumerate() {
        for cj in &feasible[a + 1..] {
            pairs.push((ci.clone(), cj.clone()));
        }
    }
    let adjacent: Vec<Option<(Coalition, Coalition)>> = pairs
        .par_iter()
        .map(|(ci, cj)| {
            let (si, si0) = &scores[index_of(ci)];
            let (sj, sj0) = &scores[index_of(cj)];
            let a: Vec<T> = si.iter().zip(sj).map(|(&x, &y)| x - y).collect();
            let a0 = *si0 - *sj0;
            let an = norm(&a);
            if an <= T::lit(T::GP_EPS) || d < 1 {
                return Ok(None);
            }
            // x = p + B y with p the closest point of {a·x + a0 = 0} to the origin
            let p: Vec<T> = a.iter().map(|&v| -v * a0 / (an * an)).collect();
            let basis = orthogonal_complement(&a);
            let mut cons = Vec::new();
            for (l, (sl, sl0)) in scores.iter().enumerate() {
                if all[l] == *ci || all[l] == *cj {
                    continue;
                }
                let g: Vec<T> = si.iter().zip(sl).map(|(&x, &y)| x - y).collect();
                let g0 = dot(&g, &p) + *si0 - *sl0;
                let gy: Vec<T> = basis.iter().map(|b| dot(&g, b)).collect();
                if norm(&gy) <= T::lit(T::GP_EPS) {
                    if g0 <= T::zero() {
                        return Ok(None);
                    }
                    continue;
                }
                cons.push(Halfspace::new(gy, g0));
            }
            let dim = basis.len();
            let r = if dim == 0 {
                cons.is_empty()
            } else {
                strict_feasibility_with(dim, &cons, &lp_for(&cons, dim))?.feasible
            };
            Ok(r.then(|| (ci.clone(), cj.clone())))
        })
        .collect::<Result<_>>()?;
    Ok(adjacent.into_iter().flatten().collect())
}

/// `W_r = [I_N | 0]`, `b_r = 0`: every size-k coalition wins on an open cone.
pub fn identity_router<T: Scalar>(n: usize, k: usize, d_in: usize) -> Result<RouterSpec<T>> {
    if d_in < n {
        return Err(CoreError::InvalidArgument(format!(
            "identity router needs d_in >= N (got d_in = {d_in}, N = {n})"
        )));
    }
    let weights = (0..n)
        .map(|i| (0..d_in).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    RouterSpec::new(weights, vec![T::zero(); n], k)
}

/// Router rows at `N` evenly spaced angles in the first two coordinates, zero
/// offsets: a conical fan with one cell per expert for `k = 1`.
pub fn fan_router<T: Scalar>(n: usize, k: usize, d_in: usize) -> Result<RouterSpec<T>> {
    if d_in < 2 {
        return Err(CoreError::InvalidArgument("fan router needs d_in >= 2".into()));
    }
    let weights = (0..n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            let mut row = vec![T::zero(); d_in];
            row[0] = T::lit(a.cos());
            row[1] = T::lit(a.sin());
            row
        })
        .collect();
    RouterSpec::new(weights, vec![T::zero(); n], k)
}

/// Gaussian router weights and offsets from the router stream of `seed`.
pub fn random_router<T: Scalar>(n: usize, k: usize, d_in: usize, seed: u64) -> Result<RouterSpec<T>> {
    let mut rng = stream_rng(seed, Stream::Router, 0);
    let weights = gaussian_matrix(&mut rng, n, d_in);
    let biases = gaussian_vec(&mut rng, n);
    RouterSpec::new(weights, biases, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye3(k: usize) -> RouterSpec<f64> {
        identity_router(3, k, 3).unwrap()
    }

    #[test]
    fn top_k_and_ties() {
        assert_eq!(route_top_k(&eye3(2), &[3.0, 1.0, 2.0]).unwrap().members(), &[0, 2]);
        assert_eq!(top_k_indices(&[1.0, 2.0, 2.0, 0.0], 2).members(), &[1, 2]);
        assert_eq!(top_k_indices(&[5.0, 1.0, 1.0, 1.0], 2).members(), &[0, 1]);
        assert!(route_top_k(&eye3(2), &[1.0]).is_err());
    }

    #[test]
    fn router_validation() {
        assert!(RouterSpec::new(vec![vec![1.0]], vec![0.0], 1).is_err());
        assert!(RouterSpec::new(vec![vec![1.0], vec![2.0]], vec![0.0], 1).is_err());
        assert!(RouterSpec::new(vec![vec![1.0], vec![2.0]], vec![0.0, 0.0], 3).is_err());
        assert!(RouterSpec::new(vec![vec![1.0], vec![2.0, 1.0]], vec![0.0, 0.0], 1).is_err());
        let json = r#"{"W_r":[[1.0,0.0],[0.0,1.0]],"b_r":[0.0,0.5],"k":1}"#;
        let r: RouterSpec<f64> = serde_json::from_str(json).unwrap();
        assert_eq!(serde_json::to_string(&r).unwrap(), json);
        assert!(serde_json::from_str::<RouterSpec<f64>>(r#"{"W_r":[[1.0]],"b_r":[0.0],"k":1}"#).is_err());
    }

    #[test]
    fn coalition_canonical_form() {
        let c = Coalition::new(vec![2, 0], 3, 2).unwrap();
        assert_eq!(c.members(), &[0, 2]);
        assert_eq!(c.to_string(), "{0,2}");
        assert!(Coalition::new(vec![1, 1], 3, 2).is_err());
        assert!(Coalition::new(vec![0, 3], 3, 2).is_err());
        assert!(Coalition::new(vec![0], 3, 2).is_err());
        assert_eq!(c.complement(4), vec![1, 3]);
        let j = Coalition::new(vec![1, 2], 3, 2).unwrap();
        assert_eq!(c.exchange_size(&j), 1);
        assert_eq!(c.symmetric_difference(&j), 2);
        assert!(serde_json::from_str::<Coalition>("[1,1]").is_err());
    }

    #[test]
    fn gate_weight_closed_forms() {
        let r = eye3(2);
        let g = gate_weights(&r, &[1.0, 1.0, -3.0]).unwrap();
        assert_eq!(g.active.members(), &[0, 1]);
        assert!((g.weights[0] - 0.5).abs() < 1e-15 && (g.weights[1] - 0.5).abs() < 1e-15);
        assert_eq!(g.weights[2], 0.0);
        let g = gate_weights(&r, &[2f64.ln(), 0.0, -1.0]).unwrap();
        assert!((g.weights[0] - 2.0 / 3.0).abs() < 1e-15 && (g.weights[1] - 1.0 / 3.0).abs() < 1e-15);
        let shifted = RouterSpec::new(r.weights().to_vec(), vec![1000.0; 3], 2).unwrap();
        let x = [0.3, -0.2, 0.1];
        let a = gate_weights(&r, &x).unwrap();
        let b = gate_weights(&shifted, &x).unwrap();
        assert_eq!(a.active, b.active);
        for (p, q) in a.weights.iter().zip(&b.weights) {
            assert!((p - q).abs() < 1e-12);
        }
        assert!((b.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_cells() {
        let cell = build_routing_cell(&eye3(2), &Coalition::new(vec![0, 1], 3, 2).unwrap()).unwrap();
        assert_eq!(cell.halfspaces, vec![
            Halfspace::new(vec![1.0, 0.0, -1.0], 0.0),
            Halfspace::new(vec![0.0, 1.0, -1.0], 0.0),
        ]);
        assert!(cell.feasible.feasible);
        let r = RouterSpec::new(vec![vec![1.0, 2.0], vec![-1.0, 0.5]], vec![0.5, -0.5], 1).unwrap();
        let cell = build_routing_cell(&r, &Coalition::new(vec![0], 2, 1).unwrap()).unwrap();
        assert_eq!(cell.halfspaces, vec![Halfspace::new(vec![2.0, 1.5], 1.0)]);
        assert_eq!(enumerate_routing_cells(&r, DEFAULT_COALITION_BUDGET).unwrap().len(), 2);
    }

    #[test]
    fn duplicate_rows_are_flagged() {
        let r = RouterSpec::new(vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0; 3], 1).unwrap();
        let cell = build_routing_cell(&r, &Coalition::new(vec![0], 3, 1).unwrap()).unwrap();
        assert!(!cell.feasible.feasible);
        assert_eq!(cell.warnings.len(), 1);
        let cell = build_routing_cell(&r, &Coalition::new(vec![2], 3, 1).unwrap()).unwrap();
        assert!(cell.feasible.feasible && cell.warnings.is_empty());
    }

    #[test]
    fn identity_router_realizes_every_coalition() {
        for n in 2..=6 {
            for k in 1..=n {
                let r = identity_router::<f64>(n, k, n).unwrap();
                let cells = enumerate_routing_cells(&r, DEFAULT_COALITION_BUDGET).unwrap();
                assert_eq!(cells.len() as u128, binomial_u128(n as u64, k as u64));
            }
        }
        assert!(identity_router::<f64>(4, 2, 3).is_err());
    }

    #[test]
    fn budget_refusal() {
        let r = identity_router::<f64>(20, 10, 20).unwrap();
        assert!(enumerate_routing_cells(&r, 1000).unwrap_err().is_budget());
    }

    #[test]
    fn hypersimplex_of_identity() {
        let r = identity_router::<f64>(4, 2, 4).unwrap();
        let verts = hypersimplex_projection(&r, DEFAULT_COALITION_BUDGET).unwrap();
        assert_eq!(verts.len(), 6);
        for v in &verts {
            assert!(v.is_extreme);
            let ones: Vec<f64> = (0..4).map(|i| if v.coalition.contains(i) { 1.0 } else { 0.0 }).collect();
            assert_eq!(v.vertex, ones);
        }
    }

    #[test]
    fn redundancy_two_for_two() {
        let r = identity_router::<f64>(4, 2, 4).unwrap();
        let rep = verify_redundancy(&r, &Coalition::new(vec![0, 1], 4, 2).unwrap(), 1000, 1).unwrap();
        assert_eq!(rep.competitors_checked, 1);
        assert!(rep.max_lp_excess <= 1e-7);
        assert_eq!(rep.sample_violations, 0);
        assert_eq!(rep.samples_checked, 1000);
    }
}
