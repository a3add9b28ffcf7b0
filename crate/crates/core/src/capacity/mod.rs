//! Linear-region counting for dense, Top-1 and Top-k layers.
//!
//! An MoE layer's linear pieces are labelled by [`ActivationPattern`]: the
//! routed coalition plus the signs of its `kH` neurons. Exact counts slice
//! the input space by routing cell and enumerate each active arrangement
//! restricted to its cell; censuses sample the same labels globally.

mod construction;
mod scaling;
mod zonotope;

pub use construction::{lower_bound_construction, random_expert, random_moe, top1_fan_construction};
pub use scaling::{fit_loglog, scaling_probe, LogLogFit, ScalingConfig, ScalingPoint, ScalingReport, Sweep};
pub use zonotope::{zonotope_vertex_count, Zonotope, ZonotopeReport, ZONOTOPE_MAX_GENERATORS};

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrangement::{
    census_labels, certifying_box_radius, count_regions, is_general_position, multiscale_domain, sampling_region_census,
    zaslavsky_phi, Arrangement, Census, EnumerationOptions, Halfspace, Hyperplane, Polyhedron, SampleDomain, SignVector,
    DEFAULT_N_MAX,
};
use crate::combinatorics::{binomial, BigCount};
use crate::error::{CoreError, Result};
use crate::linalg::{dot, norm};
use crate::lp::{strict_feasibility_with, LpOptions};
use crate::routing::{build_routing_cell, route_unchecked, Coalition, RouterSpec, RoutingCell, DEFAULT_COALITION_BUDGET};
use crate::Scalar;

/// One ReLU layer `x ↦ σ(W x + b)` of width `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExpert<T>", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ExpertSpec<T: Scalar> {
    #[serde(rename = "W")]
    weights: Vec<Vec<T>>,
    #[serde(rename = "b")]
    biases: Vec<T>,
}

#[derive(Deserialize)]
struct RawExpert<T> {
    #[serde(rename = "W")]
    weights: Vec<Vec<T>>,
    #[serde(rename = "b")]
    biases: Vec<T>,
}

impl<T: Scalar> TryFrom<RawExpert<T>> for ExpertSpec<T> {
    type Error = CoreError;
    fn try_from(r: RawExpert<T>) -> Result<Self> {
        ExpertSpec::new(r.weights, r.biases)
    }
}

impl<T: Scalar> ExpertSpec<T> {
    pub fn new(weights: Vec<Vec<T>>, biases: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(CoreError::InvalidArgument("expert needs at least one neuron".into()));
        }
        if biases.len() != weights.len() {
            return Err(CoreError::DimensionMismatch { expected: weights.len(), got: biases.len() });
        }
        let d = weights[0].len();
        if d == 0 {
            return Err(CoreError::InvalidArgument("expert input dimension must be positive".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if w.len() != d {
                return Err(CoreError::DimensionMismatch { expected: d, got: w.len() });
            }
            if !(norm(w) > T::zero()) {
                return Err(CoreError::ZeroNormal { index: i });
            }
        }
        Ok(ExpertSpec { weights, biases })
    }

    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn biases(&self) -> &[T] {
        &self.biases
    }

    pub fn width(&self) -> usize {
        self.weights.len()
    }

    pub fn d_in(&self) -> usize {
        self.weights[0].len()
    }

    pub fn rows(&self) -> Vec<(Vec<T>, T)> {
        self.weights.iter().cloned().zip(self.biases.iter().copied()).collect()
    }

    pub fn hyperplanes(&self) -> Vec<Hyperplane<T>> {
        self.rows()
            .into_iter()
            .map(|(w, b)| Hyperplane::new(w, b).expect("validated nonzero rows"))
            .collect()
    }

    pub fn arrangement(&self) -> Arrangement<T> {
        Arrangement::new(self.d_in(), self.hyperplanes()).expect("validated dimensions")
    }

    /// Appends neuron signs (`pre-activation ≥ 0` is `+`) to `out`.
    pub fn push_signs(&self, x: &[T], out: &mut SignVector) {
        for (w, &b) in self.weights.iter().zip(&self.biases) {
            out.push(dot(w, x) + b >= T::zero());
        }
    }

    pub fn forward(&self, x: &[T]) -> Vec<T> {
        self.weights.iter().zip(&self.biases).map(|(w, &b)| (dot(w, x) + b).max(T::zero())).collect()
    }
}

/// Router plus `N` experts of a shared width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMoE<T>", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct MoESpec<T: Scalar> {
    router: RouterSpec<T>,
    experts: Vec<ExpertSpec<T>>,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
struct RawMoE<T: Scalar> {
    router: RouterSpec<T>,
    experts: Vec<ExpertSpec<T>>,
}

impl<T: Scalar> TryFrom<RawMoE<T>> for MoESpec<T> {
    type Error = CoreError;
    fn try_from(r: RawMoE<T>) -> Result<Self> {
        MoESpec::new(r.router, r.experts)
    }
}

impl<T: Scalar> MoESpec<T> {
    pub fn new(router: RouterSpec<T>, experts: Vec<ExpertSpec<T>>) -> Result<Self> {
        if experts.len() != router.n_experts() {
            return Err(CoreError::DimensionMismatch { expected: router.n_experts(), got: experts.len() });
        }
        let h = experts[0].width();
        for e in &experts {
            if e.d_in() != router.d_in() {
                return Err(CoreError::DimensionMismatch { expected: router.d_in(), got: e.d_in() });
            }
            if e.width() != h {
                return Err(CoreError::InvalidArgument(format!(
                    "experts must share a width (found {} and {h})",
                    e.width()
                )));
            }
        }
        Ok(MoESpec { router, experts })
    }

    pub fn router(&self) -> &RouterSpec<T> {
        &self.router
    }

    pub fn experts(&self) -> &[ExpertSpec<T>] {
        &self.experts
    }

    pub fn width(&self) -> usize {
        self.experts[0].width()
    }

    pub fn d_in(&self) -> usize {
        self.router.d_in()
    }

    pub fn n_experts(&self) -> usize {
        self.experts.len()
    }

    pub fn k(&self) -> usize {
        self.router.k()
    }

    /// Pooled hyperplanes of the coalition, ordered by (expert, neuron).
    pub fn active_arrangement(&self, coalition: &Coalition) -> Arrangement<T> {
        let hs = coalition.members().iter().flat_map(|&i| self.experts[i].hyperplanes()).collect();
        Arrangement::new(self.d_in(), hs).expect("validated dimensions")
    }

    pub fn pattern_at(&self, x: &[T]) -> ActivationPattern {
        let coalition = route_unchecked(&self.router, x);
        let mut signs = SignVector::new(0);
        for &i in coalition.members() {
            self.experts[i].push_signs(x, &mut signs);
        }
        ActivationPattern { coalition, signs }
    }

    /// Expert hyperplanes plus every pairwise logit tie `z_u = z_v`: the union
    /// contains all boundaries of the MoE partition.
    pub fn boundary_rows(&self) -> Vec<(Vec<T>, T)> {
        let mut rows: Vec<(Vec<T>, T)> = self.experts.iter().flat_map(|e| e.rows()).collect();
        let (w, b) = (self.router.weights(), self.router.biases());
        for u in 0..w.len() {
            for v in u + 1..w.len() {
                let n: Vec<T> = w[u].iter().zip(&w[v]).map(|(&a, &c)| a - c).collect();
                if norm(&n) > T::zero() {
                    rows.push((n, b[u] - b[v]));
                }
            }
        }
        rows
    }
}

/// A dense layer or an MoE layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub enum LayerSpec<T: Scalar> {
    MoE(MoESpec<T>),
    Dense(ExpertSpec<T>),
}

impl<T: Scalar> LayerSpec<T> {
    pub fn d_in(&self) -> usize {
        match self {
            LayerSpec::MoE(m) => m.d_in(),
            LayerSpec::Dense(e) => e.d_in(),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            LayerSpec::MoE(m) => m.width(),
            LayerSpec::Dense(e) => e.width(),
        }
    }

    /// Dense layers report the empty coalition.
    pub fn pattern_at(&self, x: &[T]) -> ActivationPattern {
        match self {
            LayerSpec::MoE(m) => m.pattern_at(x),
            LayerSpec::Dense(e) => {
                let mut signs = SignVector::new(0);
                e.push_signs(x, &mut signs);
                ActivationPattern { coalition: Coalition::from_members(Vec::new()).expect("empty"), signs }
            }
        }
    }
}

/// Canonical label of a linear piece: routed coalition plus the signs of its
/// `kH` neurons, ordered by (expert index, neuron index).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActivationPattern {
    pub coalition: Coalition,
    pub signs: SignVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityMode {
    Dense,
    Top1,
    Topk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCount {
    pub coalition: Coalition,
    pub count: u64,
    /// Irredundant swap constraints of the cell.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub facets: Option<usize>,
    /// `Φ(kH + facets, d)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refined_bound: Option<BigCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub mode: CapacityMode,
    pub exact_count: Option<BigCount>,
    pub census_count: Option<BigCount>,
    pub bound_upper: BigCount,
    pub bound_terms: BTreeMap<String, BigCount>,
    pub per_cell: Vec<CellCount>,
    pub params_active: u64,
    pub params_total: u64,
    pub general_position: Option<bool>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountOptions {
    /// Largest per-cell arrangement (expert hyperplanes plus swap constraints)
    /// enumerated exactly.
    pub n_max: usize,
    pub coalition_budget: u128,
    /// Global census size; `0` skips the census.
    pub census_samples: usize,
    pub seed: u64,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { n_max: DEFAULT_N_MAX, coalition_budget: DEFAULT_COALITION_BUDGET, census_samples: 0, seed: 0 }
    }
}

impl CountOptions {
    fn enumeration<T: Scalar>(&self) -> EnumerationOptions<T> {
        EnumerationOptions { n_max: self.n_max, seed: self.seed, ..EnumerationOptions::default() }
    }
}

fn phi(n: usize, d: usize) -> BigUint {
    zaslavsky_phi(n as u64, d as u64)
}

pub fn count_dense_regions<T: Scalar>(
    expert: &ExpertSpec<T>,
    within: &Polyhedron<T>,
    opts: &CountOptions,
) -> Result<CapacityReport> {
    let h = expert.width();
    let d = expert.d_in();
    let arr = expert.arrangement();
    let gp = is_general_position(&arr);
    let mut warnings = Vec::new();
    if let Some(v) = &gp.violation {
        warnings.push(format!("not in general position: {v}"));
    }
    let exact_count = if h <= opts.n_max {
        Some(BigCount::from(count_regions(&arr, within, &opts.enumeration())?))
    } else if opts.census_samples > 0 {
        warnings.push(format!("H = {h} exceeds n_max = {}; census only", opts.n_max));
        None
    } else {
        return Err(CoreError::BudgetExceeded {
            what: "hyperplanes",
            value: h as u128,
            budget: opts.n_max as u128,
            hint: "request a census with --samples",
        });
    };
    let census_count = if opts.census_samples > 0 {
        let domain = if within.halfspaces.is_empty() {
            multiscale_domain(&expert.rows(), d)
        } else {
            let rows: Vec<(Vec<T>, T)> = expert
                .rows()
                .into_iter()
                .chain(within.halfspaces.iter().map(|h| (h.normal.clone(), h.offset)))
                .collect();
            SampleDomain::Polyhedron { polyhedron: within.clone(), box_radius: certifying_box_radius(&rows, d) }
        };
        Some(BigCount::from(sampling_region_census(&arr, &domain, opts.census_samples, opts.seed)?.distinct()))
    } else {
        None
    };
    let bound = phi(h, d);
    let params = (h * d) as u64;
    Ok(CapacityReport {
        mode: CapacityMode::Dense,
        exact_count,
        census_count,
        bound_upper: bound.clone().into(),
        bound_terms: BTreeMap::from([("phi(H,d)".to_string(), bound.into())]),
        per_cell: Vec::new(),
        params_active: params,
        params_total: params,
        general_position: Some(gp.holds),
        warnings,
    })
}

/// Distinct activation patterns among `n` samples of a multi-scale domain
/// anchored at the vertices of the MoE boundary arrangement.
pub fn global_pattern_census<T: Scalar>(moe: &MoESpec<T>, n: usize, seed: u64) -> Result<Census<ActivationPattern>> {
    let domain = multiscale_domain(&moe.boundary_rows(), moe.d_in());
    census_labels(&domain, n, seed, |x| moe.pattern_at(x))
}

/// Swap constraints of `cell` that cannot be dropped without enlarging it.
pub fn cell_facets<T: Scalar>(cell: &RoutingCell<T>, lp: &LpOptions<T>) -> Result<usize> {
    let mut unique: Vec<Halfspace<T>> = Vec::new();
    let tol = T::lit(T::GP_EPS);
    for h in cell.proper_halfspaces() {
        let n = norm(&h.normal);
        let u = Halfspace::new(h.normal.iter().map(|&v| v / n).collect(), h.offset / n);
        let dup = unique.iter().any(|g| {
            (g.offset - u.offset).abs() <= tol && g.normal.iter().zip(&u.normal).all(|(&a, &b)| (a - b).abs() <= tol)
        });
        if !dup {
            unique.push(u);
        }
    }
    let d = cell.dimension;
    let mut facets = 0;
    for j in 0..unique.len() {
        let mut cons: Vec<Halfspace<T>> =
            unique.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, h)| h.clone()).collect();
        cons.push(Halfspace::new(unique[j].normal.iter().map(|&v| -v).collect(), -unique[j].offset));
        if strict_feasibility_with(d, &cons, lp)?.feasible {
            facets += 1;
        }
    }
    Ok(facets)
}

/// Top-1 count: each routing cell keeps only its own expert's hyperplanes.
pub fn count_top1_regions<T: Scalar>(moe: &MoESpec<T>, opts: &CountOptions) -> Result<CapacityReport> {
    if moe.k() != 1 {
        return Err(CoreError::InvalidArgument(format!("Top-1 count needs k = 1, got {}", moe.k())));
    }
    count_topk_regions(moe, true, opts)
}

/// Combinatorial-slicing count: for each feasible cell, regions of the pooled
/// active arrangement restricted to the cell, summed over cells.
pub fn count_topk_regions<T: Scalar>(
    moe: &MoESpec<T>,
    include_router_cuts: bool,
    opts: &CountOptions,
) -> Result<CapacityReport> {
    let n = moe.n_experts();
    let k = moe.k();
    let h = moe.width();
    let d = moe.d_in();
    let coalitions = binomial(n as u64, k as u64);
    let coalition_count = u128::try_from(&coalitions).unwrap_or(u128::MAX);
    if coalition_count > opts.coalition_budget {
        return Err(CoreError::BudgetExceeded {
            what: "coalitions",
            value: coalition_count,
            budget: opts.coalition_budget,
            hint: "reduce N or k, or raise --budget-coalitions",
        });
    }
    let per_cell_size = k * h + k * (n - k);
    let exact = per_cell_size <= opts.n_max;
    if !exact && opts.census_samples == 0 {
        return Err(CoreError::BudgetExceeded {
            what: "hyperplanes per cell",
            value: per_cell_size as u128,
            budget: opts.n_max as u128,
            hint: "request a census with --samples",
        });
    }
    let mut warnings = Vec::new();
    let mut per_cell = Vec::new();
    let mut exact_count = None;
    if exact {
        let enumeration = opts.enumeration::<T>();
        let all: Vec<Coalition> = crate::combinatorics::Combinations::new(n, k)
            .map(|m| Coalition::from_members(m).expect("distinct"))
            .collect();
        let results: Vec<(Option<CellCount>, Vec<String>)> = all
            .par_iter()
            .map(|c| {
                let cell = build_routing_cell(moe.router(), c)?;
                if !cell.feasible.feasible {
                    return Ok((None, cell.warnings));
                }
                let arr = moe.active_arrangement(c);
                let count = count_regions(&arr, &cell.polyhedron(), &enumeration)? as u64;
                let (facets, refined_bound) = if include_router_cuts {
                    let rows: Vec<(Vec<T>, T)> =
                        cell.proper_halfspaces().into_iter().map(|h| (h.normal, h.offset)).collect();
                    let lp = LpOptions::default().with_box(certifying_box_radius(&rows, d));
                    let f = cell_facets(&cell, &lp)?;
                    (Some(f), Some(phi(k * h + f, d).into()))
                } else {
                    (None, None)
                };
                Ok((Some(CellCount { coalition: c.clone(), count, facets, refined_bound }), cell.warnings))
            })
            .collect::<Result<_>>()?;
        for (c, w) in results {
            for msg in w {
                if !warnings.contains(&msg) {
                    warnings.push(msg);
                }
            }
            per_cell.extend(c);
        }
        exact_count = Some(BigCount::from(per_cell.iter().map(|c| c.count).sum::<u64>()));
    } else {
        warnings.push(format!(
            "per-cell arrangement size kH + k(N-k) = {per_cell_size} exceeds n_max = {}; census only",
            opts.n_max
        ));
    }
    let census_count = if opts.census_samples > 0 {
        Some(BigCount::from(global_pattern_census(moe, opts.census_samples, opts.seed)?.distinct()))
    } else {
        None
    };
    let gp = moe
        .experts()
        .iter()
        .all(|e| is_general_position(&e.arrangement()).holds);

    let phi_kh = phi(k * h, d);
    let bound = &coalitions * &phi_kh;
    let mut terms = BTreeMap::new();
    terms.insert("C(N,k)".to_string(), BigCount::from(coalitions.clone()));
    terms.insert("phi(kH,d)".to_string(), BigCount::from(phi_kh));
    terms.insert("C(N,k)*phi(kH,d)".to_string(), BigCount::from(bound.clone()));
    terms.insert(
        "C(N,k)*phi(kH+k(N-k),d)".to_string(),
        BigCount::from(&coalitions * phi(per_cell_size, d)),
    );
    if include_router_cuts && exact {
        let refined: BigUint = per_cell.iter().filter_map(|c| c.refined_bound.as_ref()).map(|b| b.0.clone()).sum();
        terms.insert("sum_I phi(kH+facets_I,d)".to_string(), refined.into());
    }
    let mode = if k == 1 { CapacityMode::Top1 } else { CapacityMode::Topk };
    if mode == CapacityMode::Top1 {
        terms.insert("N*phi(H,d)".to_string(), BigCount::from(bound.clone()));
    }
    Ok(CapacityReport {
        mode,
        exact_count,
        census_count,
        bound_upper: bound.into(),
        bound_terms: terms,
        per_cell,
        params_active: (k * h * d + n * d) as u64,
        params_total: (n * h * d + n * d) as u64,
        general_position: Some(gp),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub model: String,
    pub active_params: u64,
    pub total_params: u64,
    pub capacity_bound: BigCount,
    pub asymptotic: String,
}

/// The four-architecture comparison of parameters and capacity bounds.
pub fn bound_table(n: usize, k: usize, h: usize, d: usize) -> Result<Vec<BoundRow>> {
    if n == 0 || k == 0 || k > n || h == 0 || d == 0 {
        return Err(CoreError::InvalidArgument(format!("invalid sizes N={n}, k={k}, H={h}, d={d}")));
    }
    let c = binomial(n as u64, k as u64);
    let moe_total = (n * h * d + n * d) as u64;
    let row = |model: &str, active: usize, total: u64, bound: BigUint, asym: &str| BoundRow {
        model: model.to_string(),
        active_params: active as u64,
        total_params: total,
        capacity_bound: bound.into(),
        asymptotic: asym.to_string(),
    };
    Ok(vec![
        row("dense", h * d, (h * d) as u64, phi(h, d), "Theta(H^d)"),
        row("top1", h * d + n * d, moe_total, BigUint::from(n) * phi(h, d), "Theta(N*H^d)"),
        row("topk", k * h * d + n * d, moe_total, &c * phi(k * h, d), "Theta(C(N,k)*(kH)^d)"),
        row("topk_normalized", h * d + n * d, moe_total, &c * phi(h, d), "Theta(C(N,k)*H^d)"),
    ])
}
