use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::ExpertSpec;
use crate::arrangement::{enumerate_regions, Arrangement, EnumerationOptions, Hyperplane, Polyhedron};
use crate::combinatorics::{binomial, BigCount, Combinations};
use crate::error::{CoreError, Result};
use crate::linalg::{norm, normalized_rank};
use crate::Scalar;

pub const ZONOTOPE_MAX_GENERATORS: usize = 16;

/// Minkowski sum of the segments `[0, g_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawZonotope<T>", bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Zonotope<T: Scalar> {
    generators: Vec<Vec<T>>,
}

#[derive(Deserialize)]
struct RawZonotope<T> {
    generators: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<RawZonotope<T>> for Zonotope<T> {
    type Error = CoreError;
    fn try_from(r: RawZonotope<T>) -> Result<Self> {
        Zonotope::new(r.generators)
    }
}

impl<T: Scalar> Zonotope<T> {
    pub fn new(generators: Vec<Vec<T>>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(CoreError::InvalidArgument("zonotope needs at least one generator".into()));
        };
        let d = first.len();
        if d == 0 {
            return Err(CoreError::InvalidArgument("generators must have positive dimension".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.len() != d {
                return Err(CoreError::DimensionMismatch { expected: d, got: g.len() });
            }
            if !(norm(g) > T::zero()) {
                return Err(CoreError::ZeroNormal { index: i });
            }
        }
        Ok(Zonotope { generators })
    }

    /// Generators `(w_i, b_i)` in `d_in + 1` dimensions.
    pub fn lifted(expert: &ExpertSpec<T>) -> Self {
        let generators = expert
            .weights()
            .iter()
            .zip(expert.biases())
            .map(|(w, &b)| w.iter().copied().chain(std::iter::once(b)).collect())
            .collect();
        Zonotope { generators }
    }

    /// Generators `w_i` only.
    pub fn from_weights(expert: &ExpertSpec<T>) -> Self {
        Zonotope { generators: expert.weights().to_vec() }
    }

    pub fn generators(&self) -> &[Vec<T>] {
        &self.generators
    }

    pub fn dimension(&self) -> usize {
        self.generators[0].len()
    }

    /// Every `min(H, d)` generators linearly independent.
    pub fn is_generic(&self) -> bool {
        let r = self.generators.len().min(self.dimension());
        let tol = T::lit(T::GP_EPS);
        Combinations::new(self.generators.len(), r).all(|s| {
            let rows: Vec<Vec<T>> = s.iter().map(|&i| self.generators[i].clone()).collect();
            normalized_rank(&rows, tol) == r
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonotopeReport {
    pub generators: usize,
    pub dimension: usize,
    pub generic: bool,
    /// Distinct vertices `Σ_{c·g_i > 0} g_i` over the regions `c` of the
    /// central arrangement `{c·g_i = 0}`.
    pub enumerated: BigCount,
    /// `2 Σ_{j=0}^{d−1} C(H−1, j)`.
    pub formula_generic: BigCount,
    /// Same sum taken up to `j = d`.
    pub formula_literal: BigCount,
    pub warnings: Vec<String>,
}

fn vertex_formula(h: usize, upper: usize) -> BigUint {
    let s: BigUint = (0..=upper).map(|j| binomial(h as u64 - 1, j as u64)).sum();
    s * 2u32
}

pub fn zonotope_vertex_count<T: Scalar>(z: &Zonotope<T>) -> Result<ZonotopeReport> {
    let h = z.generators.len();
    let d = z.dimension();
    if h > ZONOTOPE_MAX_GENERATORS {
        return Err(CoreError::BudgetExceeded {
            what: "zonotope generators",
            value: h as u128,
            budget: ZONOTOPE_MAX_GENERATORS as u128,
            hint: "vertex enumeration is limited to small generator sets",
        });
    }
    let hyperplanes = z
        .generators
        .iter()
        .map(|g| Hyperplane::new(g.clone(), T::zero()))
        .collect::<Result<Vec<_>>>()?;
    let arr = Arrangement::new(d, hyperplanes)?;
    let opts = EnumerationOptions { n_max: ZONOTOPE_MAX_GENERATORS, ..EnumerationOptions::default() };
    let regions = enumerate_regions(&arr, &Polyhedron::whole(d), &opts)?;

    let vertices: Vec<Vec<T>> = regions
        .iter()
        .map(|r| {
            let mut v = vec![T::zero(); d];
            for (g, s) in z.generators.iter().zip(r.signs.iter()) {
                if s {
                    for (a, &b) in v.iter_mut().zip(g) {
                        *a = *a + b;
                    }
                }
            }
            v
        })
        .collect();
    let scale = z.generators.iter().map(|g| norm(g)).fold(T::zero(), |a, b| a + b);
    let tol = T::lit(T::GP_EPS) * scale.max(T::one());
    let mut distinct: Vec<&Vec<T>> = Vec::new();
    for v in &vertices {
        if !distinct.iter().any(|u| u.iter().zip(v).all(|(&a, &b)| (a - b).abs() <= tol)) {
            distinct.push(v);
        }
    }

    let generic = z.is_generic();
    let enumerated = BigUint::from(distinct.len());
    let formula_generic = vertex_formula(h, d - 1);
    let formula_literal = vertex_formula(h, d);
    let mut warnings = Vec::new();
    if generic && enumerated != formula_generic {
        warnings.push(format!("enumerated {enumerated} differs from generic formula {formula_generic}"));
    }
    if enumerated != formula_literal {
        warnings.push(format!(
            "sum taken up to j = d gives {formula_literal}, enumerated {enumerated}"
        ));
    }
    Ok(ZonotopeReport {
        generators: h,
        dimension: d,
        generic,
        enumerated: enumerated.into(),
        formula_generic: formula_generic.into(),
        formula_literal: formula_literal.into(),
        warnings,
    })
}
