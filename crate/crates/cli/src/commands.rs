use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tropcap_core::arrangement::{count_regions, is_general_position, zaslavsky_phi, EnumerationOptions, Polyhedron};
use tropcap_core::capacity::{
    bound_table, count_dense_regions, count_top1_regions, count_topk_regions, lower_bound_construction,
    scaling_probe, zonotope_vertex_count, CountOptions, ScalingConfig,
};
use tropcap_core::combinatorics::{binomial, binomial_u128, BigCount, Combinations};
use tropcap_core::manifold::{effective_census, spherical_measure, MeasureOptions};
use tropcap_core::manifold::{resilience_experiment, ResilienceConfig};
use tropcap_core::routing::{
    build_routing_cell, enumerate_routing_cells, fan_adjacency, hypersimplex_projection, verify_redundancy, Coalition,
};
use tropcap_core::{Arrangement, CoreError, ExpertSpec, LayerSpec, ManifoldSpec, MoESpec, RouterSpec, Zonotope};

use crate::canonical::to_value;
use crate::config::{Command, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::fixtures;

/// What a command produced: the report payload, per-stage wall times, and
/// an optional property failure that still leaves a report worth writing.
#[derive(Debug)]
pub struct Outcome {
    pub result: Value,
    pub stages: Vec<(String, f64)>,
    pub failure: Option<CliError>,
}

struct Timer(Vec<(String, f64)>);

impl Timer {
    fn new() -> Self {
        Timer(Vec::new())
    }

    fn stage<R>(&mut self, name: &str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        self.0.push((name.to_string(), t.elapsed().as_secs_f64()));
        r
    }
}

fn parse<T: serde::de::DeserializeOwned>(v: &Value, what: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("invalid {what}: {e}")))
}

fn count_options(cfg: &ExperimentConfig, census: usize) -> CountOptions {
    CountOptions {
        n_max: cfg.budgets.n_max,
        coalition_budget: cfg.budgets.coalitions as u128,
        census_samples: census,
        seed: cfg.seed,
    }
}

/// Router of a router or MoE spec.
fn router_of(v: &Value) -> Result<RouterSpec> {
    match v.get("router") {
        Some(r) => parse(r, "router"),
        None => parse(v, "router"),
    }
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    match cfg.command {
        Command::CountRegions => count_regions_cmd(cfg),
        Command::EnumerateCells => enumerate_cells_cmd(cfg),
        Command::Bounds => bounds_cmd(cfg),
        Command::VerifyRedundancy => verify_redundancy_cmd(cfg),
        Command::Zonotope => zonotope_cmd(cfg),
        Command::Scaling => scaling_cmd(cfg),
        Command::EffectiveCapacity => effective_capacity_cmd(cfg),
        Command::Resilience => resilience_cmd(cfg),
        Command::VerifyAll => verify_all_cmd(cfg),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CountParams {
    #[serde(default = "yes")]
    include_router_cuts: bool,
    /// Global census size; 0 disables it.
    #[serde(default)]
    census: usize,
}

fn yes() -> bool {
    true
}

fn count_regions_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p: CountParams = cfg.params()?;
    let spec = cfg.spec_value()?;
    let opts = count_options(cfg, p.census);
    let mut t = Timer::new();
    let result = if spec.get("router").is_some() {
        let moe: MoESpec = parse(&spec, "MoE spec")?;
        let report = t.stage("count", || {
            if moe.k() == 1 {
                count_top1_regions(&moe, &opts)
            } else {
                count_topk_regions(&moe, p.include_router_cuts, &opts)
            }
        })?;
        to_value(&report)?
    } else if spec.get("W").is_some() {
        let expert: ExpertSpec = parse(&spec, "expert spec")?;
        let report = t.stage("count", || count_dense_regions(&expert, &Polyhedron::whole(expert.d_in()), &opts))?;
        to_value(&report)?
    } else if spec.get("hyperplanes").is_some() {
        let arr: Arrangement = parse(&spec, "arrangement")?;
        let eo = EnumerationOptions { n_max: cfg.budgets.n_max, seed: cfg.seed, ..EnumerationOptions::default() };
        let d = arr.dimension();
        let count = t.stage("count", || count_regions(&arr, &Polyhedron::whole(d), &eo))?;
        let gp = is_general_position(&arr);
        json!({
            "mode": "arrangement",
            "exact_count": BigCount::from(count),
            "bound_upper": BigCount(zaslavsky_phi(arr.len() as u64, d as u64)),
            "general_position": gp.holds,
            "warnings": gp.violation.into_iter().collect::<Vec<_>>(),
        })
    } else {
        return Err(CliError::Config("spec is neither an MoE, an expert, nor an arrangement".into()));
    };
    Ok(Outcome { result, stages: t.0, failure: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CellParams {
    #[serde(default)]
    halfspaces: bool,
    #[serde(default)]
    adjacency: bool,
    #[serde(default)]
    hypersimplex: bool,
}

fn enumerate_cells_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p: CellParams = cfg.params()?;
    let router = router_of(&cfg.spec_value()?)?;
    let budget = cfg.budgets.coalitions as u128;
    let mut t = Timer::new();
    let total = binomial_u128(router.n_experts() as u64, router.k() as u64);
    if total > budget {
        return Err(CoreError::BudgetExceeded {
            what: "coalitions",
            value: total,
            budget,
            hint: "reduce N or k, or raise --budget-coalitions",
        }
        .into());
    }
    // every coalition, infeasible ones included
    let cells = t.stage("cells", || {
        Combinations::new(router.n_experts(), router.k())
            .map(|m| build_routing_cell(&router, &Coalition::from_members(m)?))
            .collect::<tropcap_core::Result<Vec<_>>>()
    })?;
    let feasible = cells.iter().filter(|c| c.feasible.feasible).count();
    let rows: Vec<Value> = cells
        .iter()
        .map(|c| {
            let mut row = json!({
                "coalition": c.coalition,
                "feasible": c.feasible.feasible,
                "witness": c.feasible.witness,
                "slack": c.feasible.slack,
                "constraints": c.halfspaces.len(),
                "warnings": c.warnings,
            });
            if p.halfspaces {
                row["halfspaces"] = json!(c.halfspaces);
            }
            row
        })
        .collect();
    let mut result = json!({
        "n_experts": router.n_experts(),
        "k": router.k(),
        "coalitions": BigCount(binomial(router.n_experts() as u64, router.k() as u64)),
        "feasible_cells": feasible,
        "cells": rows,
    });
    if p.adjacency {
        let adj = t.stage("adjacency", || fan_adjacency(&router, budget))?;
        result["adjacency"] = to_value(&adj)?;
    }
    if p.hypersimplex {
        let hs = t.stage("hypersimplex", || hypersimplex_projection(&router, budget))?;
        result["hypersimplex"] = to_value(&hs)?;
    }
    Ok(Outcome { result, stages: t.0, failure: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundParams {
    n: Option<usize>,
    k: Option<usize>,
    h: Option<usize>,
    d: Option<usize>,
}

fn bounds_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p: BoundParams = cfg.params()?;
    let from_spec = match &cfg.spec {
        Some(_) => {
            let moe: MoESpec = parse(&cfg.spec_value()?, "MoE spec")?;
            Some((moe.n_experts(), moe.k(), moe.width(), moe.d_in()))
        }
        None => None,
    };
    let pick = |v: Option<usize>, i: usize, name: &str| {
        v.or(from_spec.map(|s| [s.0, s.1, s.2, s.3][i]))
            .ok_or_else(|| CliError::Config(format!("bounds needs param {name} or an MoE spec")))
    };
    let (n, k, h, d) = (pick(p.n, 0, "n")?, pick(p.k, 1, "k")?, pick(p.h, 2, "h")?, pick(p.d, 3, "d")?);
    let mut t = Timer::new();
    let rows = t.stage("table", || bound_table(n, k, h, d))?;
    let result = json!({ "n": n, "k": k, "h": h, "d": d, "rows": rows });
    Ok(Outcome { result, stages: t.0, failure: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RedundancyParams {
    #[serde(default = "default_trials")]
    trials: usize,
    coalition: Option<Vec<usize>>,
}

fn default_trials() -> usize {
    2000
}

fn verify_redundancy_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p: RedundancyParams = cfg.params()?;
    let router = router_of(&cfg.spec_value()?)?;
    let mut t = Timer::new();
    let targets: Vec<Coalition> = match p.coalition {
        Some(m) => vec![Coalition::new(m, router.n_experts(), router.k())?],
        None => t
            .stage("cells", || enumerate_routing_cells(&router, cfg.budgets.coalitions as u128))?
            .into_iter()
            .filter(|c| c.feasible.feasible)
            .map(|c| c.coalition)
            .collect(),
    };
    let reports = t.stage("verify", || {
        targets
            .iter()
            .map(|c| verify_redundancy(&router, c, p.trials, cfg.seed))
            .collect::<tropcap_core::Result<Vec<_>>>()
    })?;
    let violations: usize = reports.iter().map(|r| r.sample_violations).sum();
    let max_excess = reports.iter().map(|r| r.max_lp_excess).fold(f64::NEG_INFINITY, f64::max);
    let failure = (violations > 0)
        .then(|| CliError::Property(format!("{violations} sampled points violate an implied coalition inequality")));
    let result = json!({
        "cells_checked": reports.len(),
        "sample_violations": violations,
        "max_lp_excess": if max_excess.is_finite() { json!(max_excess) } else { Value::Null },
        "reports": reports,
    });
    Ok(Outcome { result, stages: t.0, failure })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZonotopeParams {
    /// For expert specs: generators `(w_i, b_i)` rather than `w_i`.
    #[serde(default = "yes")]
    lifted: bool,
}

fn zonotope_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p: ZonotopeParams = cfg.params()?;
    let spec = cfg.spec_value()?;
    let z: Zonotope = if spec.get("generators").is_some() {
        parse(&spec, "zonotope")?
    } else {
        let e: ExpertSpec = parse(&spec, "expert spec")?;
        if p.lifted {
            Zonotope::lifted(&e)
        } else {
            Zonotope::from_weights(&e)
        }
    };
    let mut t = Timer::new();
    let report = t.stage("vertices", || zonotope_vertex_count(&z))?;
    Ok(Outcome { result: to_value(&report)?, stages: t.0, failure: None })
}

fn scaling_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut merged = to_value(&ScalingConfig { samples: cfg.budgets.samples, ..ScalingConfig::default() })?;
    for (k, v) in &cfg.params {
        merged[k] = v.clone();
    }
    merged["seed"] = json!(cfg.seed);
    let sc: ScalingConfig = parse(&merged, "scaling params")?;
    let mut t = Timer::new();
    let report = t.stage("sweep", || scaling_probe::<f64>(&sc))?;
    Ok(Outcome { result: to_value(&report)?, stages: t.0, failure: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EffectiveParams {
    samples: Option<usize>,
    #[serde(default = "yes")]
    measure: bool,
    #[serde(default = "default_measure_samples")]
    measure_samples: usize,
    #[serde(default)]
    measure_options: MeasureOptions,
}

fn default_measure_samples() -> usize {
    20_000
}

fn effective_capacity_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p: EffectiveParams = cfg.params()?;
    let layer: LayerSpec = parse(&cfg.spec_value()?, "layer spec")?;
    let m: ManifoldSpec = parse(&cfg.manifold_value()?, "manifold")?;
    let n = p.samples.unwrap_or(cfg.budgets.samples);
    let mut t = Timer::new();
    let mut warnings = Vec::new();
    let measure = match &layer {
        LayerSpec::MoE(moe) if p.measure => {
            if m.contains_origin() {
                warnings.push("manifold meets the origin; spherical measure skipped".to_string());
                None
            } else {
                Some(t.stage("measure", || {
                    spherical_measure(&m, p.measure_samples, cfg.seed, Some(moe.router()), &p.measure_options)
                })?)
            }
        }
        _ => None,
    };
    let share = measure.as_ref().map(|s| if s.codimension == 0 { s.measure } else { s.tube_fraction.unwrap_or(0.0) });
    let mut report = t.stage("census", || effective_census(&layer, &m, n, cfg.seed, share))?;
    report.warnings.extend(warnings);
    let mut result = to_value(&report)?;
    if let Some(s) = measure {
        result["spherical_measure"] = to_value(&s)?;
    }
    Ok(Outcome { result, stages: t.0, failure: None })
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ResilienceParams {
    #[serde(default = "default_n")]
    n_experts: usize,
    #[serde(default = "one")]
    k: usize,
    #[serde(default = "default_h")]
    h: usize,
    #[serde(default = "default_seeds")]
    seeds: usize,
    samples: Option<usize>,
}

fn default_n() -> usize {
    4
}

fn one() -> usize {
    1
}

fn default_h() -> usize {
    3
}

fn default_seeds() -> usize {
    20
}

fn resilience_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let p: ResilienceParams = cfg.params()?;
    let manifold: ManifoldSpec = parse(&cfg.manifold_value()?, "manifold")?;
    let rc = ResilienceConfig {
        n_experts: p.n_experts,
        k: p.k,
        h: p.h,
        manifold,
        seeds: p.seeds,
        samples: p.samples.unwrap_or(cfg.budgets.samples),
        seed: cfg.seed,
    };
    let mut t = Timer::new();
    let report = t.stage("experiment", || resilience_experiment(&rc))?;
    Ok(Outcome { result: to_value(&report)?, stages: t.0, failure: None })
}

fn fixture<T: serde::de::DeserializeOwned>(name: &str) -> Result<T> {
    let text = fixtures::get(name).ok_or_else(|| CliError::Config(format!("missing fixture {name}")))?;
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("fixture {name}: {e}")))
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: Value,
}

/// A quick end-to-end pass over the bundled fixtures.
fn verify_all_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Params {
        #[serde(default = "default_verify_samples")]
        samples: usize,
    }
    fn default_verify_samples() -> usize {
        100_000
    }
    let p: Params = cfg.params()?;
    let samples = p.samples.min(cfg.budgets.samples);
    let seed = cfg.seed;
    let mut t = Timer::new();
    let mut checks = Vec::new();

    let five: ExpertSpec = fixture("five_lines")?;
    let r = t.stage("five_lines", || {
        count_dense_regions(&five, &Polyhedron::whole(2), &count_options(cfg, samples))
    })?;
    let exact = r.exact_count.clone().map(|c| c.0);
    checks.push(Check {
        name: "five_lines_exact_equals_phi",
        passed: exact == Some(zaslavsky_phi(5, 2)) && r.census_count.as_ref().map(|c| &c.0) == exact.as_ref(),
        detail: json!({ "exact": r.exact_count, "census": r.census_count, "phi": BigCount(zaslavsky_phi(5, 2)) }),
    });

    let moe: MoESpec = fixture("moe_n4_k2_h2")?;
    let r = t.stage("topk_fixture", || count_topk_regions(&moe, true, &count_options(cfg, samples)))?;
    let exact = r.exact_count.clone().map(|c| c.0);
    let cut_bound = r.bound_terms.get("C(N,k)*phi(kH+k(N-k),d)").map(|c| c.0.clone());
    let census = r.census_count.clone().map(|c| c.0);
    checks.push(Check {
        name: "topk_slicing_bounds",
        passed: matches!((&exact, &cut_bound), (Some(e), Some(b)) if e <= b)
            && matches!((&census, &exact), (Some(c), Some(e)) if c <= e),
        detail: json!({ "exact": r.exact_count, "census": r.census_count, "bound": r.bound_terms }),
    });

    let top1: MoESpec = fixture("moe_top1_n3")?;
    let r = t.stage("top1_fixture", || count_top1_regions(&top1, &count_options(cfg, 0)))?;
    checks.push(Check {
        name: "top1_within_bound",
        passed: r.exact_count.as_ref().is_some_and(|e| e.0 <= r.bound_upper.0),
        detail: json!({ "exact": r.exact_count, "bound": r.bound_upper }),
    });

    let router: RouterSpec = fixture("router_n4_k2")?;
    let cells = t.stage("cells", || enumerate_routing_cells(&router, cfg.budgets.coalitions as u128))?;
    let mut violations = 0;
    let mut checked = 0;
    t.stage("redundancy", || -> Result<()> {
        for c in cells.iter().filter(|c| c.feasible.feasible) {
            let rep = verify_redundancy(&router, &c.coalition, 500, seed)?;
            violations += rep.sample_violations;
            checked += 1;
        }
        Ok(())
    })?;
    checks.push(Check {
        name: "redundancy_of_multi_swaps",
        passed: violations == 0 && checked > 0,
        detail: json!({ "cells_checked": checked, "sample_violations": violations }),
    });

    let lb: MoESpec = t.stage("construction", || lower_bound_construction(4, 2, 1, 4, seed))?;
    let lb_cells = enumerate_routing_cells(lb.router(), cfg.budgets.coalitions as u128)?;
    let feasible = lb_cells.iter().filter(|c| c.feasible.feasible).count();
    checks.push(Check {
        name: "identity_router_reaches_all_coalitions",
        passed: feasible == 6,
        detail: json!({ "feasible_cells": feasible, "coalitions": 6 }),
    });

    let z: Zonotope = fixture("zonotope_hexagon")?;
    let zr = t.stage("zonotope", || zonotope_vertex_count(&z))?;
    checks.push(Check {
        name: "zonotope_hexagon",
        passed: zr.enumerated == zr.formula_generic && zr.enumerated.0 == 6u32.into(),
        detail: to_value(&zr)?,
    });

    let table = t.stage("bounds", || bound_table(8, 2, 8, 2))?;
    checks.push(Check {
        name: "bound_table",
        passed: table.len() == 4,
        detail: json!(table),
    });

    let seg: ManifoldSpec = fixture("segment_d2")?;
    let dense = LayerSpec::Dense(five.clone());
    let er = t.stage("segment", || effective_census(&dense, &seg, samples, seed, None))?;
    checks.push(Check {
        name: "segment_crossings",
        passed: er.distinct_patterns.0 <= (five.width() as u64 + 1).into(),
        detail: json!({ "patterns": er.distinct_patterns, "ceiling": five.width() + 1 }),
    });

    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let failure = (!failed.is_empty()).then(|| CliError::Property(format!("failed checks: {}", failed.join(", "))));
    let result = json!({
        "passed": failed.is_empty(),
        "checks": checks
            .iter()
            .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect::<Vec<_>>(),
    });
    Ok(Outcome { result, stages: t.0, failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SpecSource;

    fn cfg(command: Command, spec: Option<&str>) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(command);
        c.spec = spec.map(SpecSource::parse_arg);
        c
    }

    #[test]
    fn five_lines_fixture_counts_sixteen() {
        let out = execute(&cfg(Command::CountRegions, Some("fixture:five_lines"))).unwrap();
        assert_eq!(out.result["exact_count"], "16");
        assert_eq!(out.result["bound_upper"], "16");
        assert_eq!(out.result["general_position"], true);
    }

    #[test]
    fn bounds_from_params() {
        let mut c = cfg(Command::Bounds, None);
        c.params = serde_json::from_str(r#"{"n":8,"k":2,"h":8,"d":2}"#).unwrap();
        let out = execute(&c).unwrap();
        assert_eq!(out.result["rows"].as_array().unwrap().len(), 4);
        c.params.remove("h");
        assert!(execute(&c).is_err());
    }

    #[test]
    fn enumerate_cells_on_router_fixture() {
        let mut c = cfg(Command::EnumerateCells, Some("fixture:router_n4_k2"));
        c.params = serde_json::from_str(r#"{"adjacency":true}"#).unwrap();
        let out = execute(&c).unwrap();
        assert_eq!(out.result["cells"].as_array().unwrap().len(), 6);
        assert!(out.result["feasible_cells"].as_u64().unwrap() >= 3);
    }

    #[test]
    fn unknown_params_are_rejected() {
        let mut c = cfg(Command::Zonotope, Some("fixture:zonotope_hexagon"));
        c.params = serde_json::from_str(r#"{"liftd":true}"#).unwrap();
        assert!(matches!(execute(&c), Err(CliError::Config(_))));
    }
}
