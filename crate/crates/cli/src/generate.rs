use serde_json::Value;
use tropcap_core::capacity::{lower_bound_construction, random_expert, random_moe};
use tropcap_core::combinatorics::binomial_u128;
use tropcap_core::routing::enumerate_routing_cells;
use tropcap_core::MoESpec;

use crate::canonical::to_value;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GenerateKind {
    Dense,
    Top1,
    Topk,
    LowerBoundConstruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub k: usize,
    pub h: usize,
    /// Defaults to `N` for the lower-bound construction, 2 otherwise.
    pub d: Option<usize>,
}

/// A random or constructed spec as JSON.
pub fn generate(kind: GenerateKind, dims: Dims, seed: u64) -> Result<Value> {
    let Dims { n, k, h, d } = dims;
    match kind {
        GenerateKind::Dense => to_value(&random_expert::<f64>(h, d.unwrap_or(2), seed, 0)),
        GenerateKind::Top1 => to_value(&random_moe::<f64>(n, 1, h, d.unwrap_or(2), seed)?),
        GenerateKind::Topk => to_value(&random_moe::<f64>(n, k, h, d.unwrap_or(2), seed)?),
        GenerateKind::LowerBoundConstruction => {
            let d = d.unwrap_or(n);
            if d < n {
                return Err(CliError::Refusal(format!(
                    "the identity router needs d_in >= N to reach every coalition; got d_in = {d}, N = {n}"
                )));
            }
            let moe = lower_bound_construction::<f64>(n, k, h, d, seed)?;
            check_construction(&to_value(&moe)?)?;
            to_value(&moe)
        }
    }
}

/// Reloads a constructed spec and confirms every coalition cell is feasible.
pub fn check_construction(v: &Value) -> Result<()> {
    let moe: MoESpec =
        serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("reload failed: {e}")))?;
    let cells = enumerate_routing_cells(moe.router(), u128::MAX)?;
    let feasible = cells.iter().filter(|c| c.feasible.feasible).count() as u128;
    let expected = binomial_u128(moe.n_experts() as u64, moe.k() as u64);
    if feasible != expected {
        return Err(CliError::Property(format!("{feasible} of {expected} coalition cells are feasible")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tropcap_core::{ExpertSpec, MoESpec};

    use crate::canonical::to_canonical_string;

    fn dims(n: usize, k: usize, h: usize, d: Option<usize>) -> Dims {
        Dims { n, k, h, d }
    }

    #[test]
    fn dense_is_reproducible_and_round_trips() {
        let a = generate(GenerateKind::Dense, dims(0, 0, 6, Some(2)), 7).unwrap();
        let b = generate(GenerateKind::Dense, dims(0, 0, 6, Some(2)), 7).unwrap();
        assert_eq!(to_canonical_string(&a), to_canonical_string(&b));
        let text = to_canonical_string(&a);
        let parsed: ExpertSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, serde_json::from_value::<ExpertSpec>(a).unwrap());
        assert_eq!(parsed.width(), 6);
    }

    #[test]
    fn topk_round_trips() {
        let v = generate(GenerateKind::Topk, dims(4, 2, 3, Some(2)), 1).unwrap();
        let m: MoESpec = serde_json::from_str(&to_canonical_string(&v)).unwrap();
        assert_eq!((m.n_experts(), m.k(), m.width(), m.d_in()), (4, 2, 3, 2));
        assert_eq!(m, serde_json::from_value::<MoESpec>(v).unwrap());
    }

    #[test]
    fn construction_refuses_low_dimension() {
        let e = generate(GenerateKind::LowerBoundConstruction, dims(3, 2, 1, Some(2)), 0).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("d_in >= N"));
        let v = generate(GenerateKind::LowerBoundConstruction, dims(3, 2, 1, None), 0).unwrap();
        let m: MoESpec = serde_json::from_value(v).unwrap();
        assert_eq!(m.d_in(), 3);
    }
}
