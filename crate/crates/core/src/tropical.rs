//! Max-plus arithmetic, tropical polynomials and the routing score polynomials.
//!
//! A tropical polynomial is the pointwise maximum of affine functions. The
//! routing score of Top-k selection is the k-th elementary symmetric tropical
//! polynomial of the router logits, with one monomial per size-k coalition.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::combinatorics::Combinations;
use crate::error::{CoreError, Result};
use crate::Scalar;

/// Element of the max-plus semiring: a real number or the bottom element −∞.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TropicalValue<T: Scalar>(pub T);

impl<T: Scalar> TropicalValue<T> {
    /// Additive identity (−∞).
    pub fn bottom() -> Self {
        TropicalValue(T::neg_infinity())
    }

    /// Multiplicative identity (0).
    pub fn unit() -> Self {
        TropicalValue(T::zero())
    }

    pub fn is_bottom(&self) -> bool {
        self.0 == T::neg_infinity()
    }
}

/// ⊕ is max.
impl<T: Scalar> Add for TropicalValue<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        TropicalValue(self.0.max(rhs.0))
    }
}

/// ⊗ is ordinary addition; −∞ absorbs.
impl<T: Scalar> Mul for TropicalValue<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_bottom() || rhs.is_bottom() {
            Self::bottom()
        } else {
            TropicalValue(self.0 + rhs.0)
        }
    }
}

/// Absolute tie band around a maximum value `m`.
pub fn tie_tolerance<T: Scalar>(m: T) -> T {
    T::lit(T::TIE_REL) * T::one().max(m.abs())
}

/// `c ⊗ x^a`, evaluating to `c + ⟨a, x⟩`. Exponents are real so that router
/// rows can serve directly as exponent vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TropicalMonomial<T: Scalar> {
    pub exponent: Vec<T>,
    pub coefficient: T,
}

impl<T: Scalar> TropicalMonomial<T> {
    pub fn new(exponent: Vec<T>, coefficient: T) -> Self {
        TropicalMonomial { exponent, coefficient }
    }

    pub fn eval(&self, x: &[T]) -> T {
        // left-to-right accumulation keeps results reproducible
        self.exponent
            .iter()
            .zip(x)
            .fold(self.coefficient, |acc, (&a, &xi)| acc + a * xi)
    }
}

/// Result of evaluating a tropical polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub value: T,
    /// Every monomial within the tie band of the maximum, ascending.
    pub argmax: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TropicalPolynomial<T: Scalar> {
    monomials: Vec<TropicalMonomial<T>>,
    dimension: usize,
}

impl<T: Scalar> TropicalPolynomial<T> {
    pub fn new(monomials: Vec<TropicalMonomial<T>>) -> Result<Self> {
        let first = monomials
            .first()
            .ok_or_else(|| CoreError::InvalidArgument("tropical polynomial needs at least one monomial".into()))?;
        let dimension = first.exponent.len();
        for m in &monomials {
            if m.exponent.len() != dimension {
                return Err(CoreError::DimensionMismatch { expected: dimension, got: m.exponent.len() });
            }
        }
        Ok(TropicalPolynomial { monomials, dimension })
    }

    /// `max(0, x_j)` written as `0 ⊕ x_j`.
    pub fn relu(j: usize, dimension: usize) -> Self {
        let mut e = vec![T::zero(); dimension];
        e[j] = T::one();
        TropicalPolynomial {
            monomials: vec![
                TropicalMonomial::new(vec![T::zero(); dimension], T::zero()),
                TropicalMonomial::new(e, T::zero()),
            ],
            dimension,
        }
    }

    pub fn monomials(&self) -> &[TropicalMonomial<T>] {
        &self.monomials
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn eval(&self, x: &[T]) -> Result<Evaluation<T>> {
        if x.len() != self.dimension {
            return Err(CoreError::DimensionMismatch { expected: self.dimension, got: x.len() });
        }
        let values: Vec<T> = self.monomials.iter().map(|m| m.eval(x)).collect();
        let value = values.iter().fold(T::neg_infinity(), |acc, &v| acc.max(v));
        let tol = tie_tolerance(value);
        let argmax = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| value - v <= tol)
            .map(|(i, _)| i)
            .collect();
        Ok(Evaluation { value, argmax })
    }

    /// True when at least two monomials attain the maximum (within the tie band).
    pub fn on_singular_locus(&self, x: &[T]) -> Result<bool> {
        Ok(self.eval(x)?.argmax.len() >= 2)
    }
}

/// `P ⊘ Q`, evaluating to `P(x) − Q(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TropicalRationalFunction<T: Scalar> {
    pub numerator: TropicalPolynomial<T>,
    pub denominator: TropicalPolynomial<T>,
}

impl<T: Scalar> TropicalRationalFunction<T> {
    pub fn new(numerator: TropicalPolynomial<T>, denominator: TropicalPolynomial<T>) -> Result<Self> {
        if numerator.dimension != denominator.dimension {
            return Err(CoreError::DimensionMismatch {
                expected: numerator.dimension,
                got: denominator.dimension,
            });
        }
        Ok(TropicalRationalFunction { numerator, denominator })
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        Ok(self.numerator.eval(x)?.value - self.denominator.eval(x)?.value)
    }
}

/// The k-th elementary symmetric tropical polynomial of the affine logits
/// `W x + b`: one monomial per size-k coalition (lexicographic order), with
/// exponent `Σ_{i∈I} w_i` and coefficient `Σ_{i∈I} b_i`.
pub fn build_sym_trop_k<T: Scalar>(weights: &[Vec<T>], biases: &[T], k: usize) -> Result<TropicalPolynomial<T>> {
    let n = weights.len();
    if biases.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: biases.len() });
    }
    if k == 0 || k > n {
        return Err(CoreError::InvalidArgument(format!("k = {k} out of range 1..={n}")));
    }
    let d = weights[0].len();
    let monomials = Combinations::new(n, k)
        .map(|coalition| {
            let mut exponent = vec![T::zero(); d];
            let mut coefficient = T::zero();
            for &i in &coalition {
                for (e, &w) in exponent.iter_mut().zip(&weights[i]) {
                    *e = *e + w;
                }
                coefficient = coefficient + biases[i];
            }
            TropicalMonomial::new(exponent, coefficient)
        })
        .collect();
    TropicalPolynomial::new(monomials)
}

/// Top-1 score `max_i z_i(x)`.
pub fn build_top1<T: Scalar>(weights: &[Vec<T>], biases: &[T]) -> Result<TropicalPolynomial<T>> {
    build_sym_trop_k(weights, biases, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_coords() -> TropicalPolynomial<f64> {
        TropicalPolynomial::new(vec![
            TropicalMonomial::new(vec![1.0, 0.0], 0.0),
            TropicalMonomial::new(vec![0.0, 1.0], 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn semiring_identities() {
        let x = TropicalValue(3.5f64);
        assert_eq!(TropicalValue::bottom() + x, x);
        assert_eq!(TropicalValue::unit() * x, x);
        assert!((TropicalValue::bottom() * x).is_bottom());
        assert_eq!(TropicalValue(1.0) + TropicalValue(2.0), TropicalValue(2.0));
        assert_eq!(TropicalValue(1.0) * TropicalValue(2.0), TropicalValue(3.0));
    }

    #[test]
    fn eval_max_and_ties() {
        let p = two_coords();
        assert_eq!(p.eval(&[3.0, 1.0]).unwrap(), Evaluation { value: 3.0, argmax: vec![0] });
        assert_eq!(p.eval(&[2.0, 2.0]).unwrap(), Evaluation { value: 2.0, argmax: vec![0, 1] });
        assert!(p.on_singular_locus(&[2.0, 2.0]).unwrap());
        assert!(!p.on_singular_locus(&[3.0, 1.0]).unwrap());
        let tol = tie_tolerance(2.0f64);
        assert!(!p.on_singular_locus(&[2.0 + 2.0 * tol, 2.0]).unwrap());
        assert!(p.on_singular_locus(&[2.0 + 0.5 * tol, 2.0]).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let p = two_coords();
        assert_eq!(
            p.eval(&[1.0]).unwrap_err(),
            CoreError::DimensionMismatch { expected: 2, got: 1 }
        );
        assert!(TropicalPolynomial::<f64>::new(vec![]).is_err());
        assert!(TropicalPolynomial::new(vec![
            TropicalMonomial::new(vec![1.0], 0.0),
            TropicalMonomial::new(vec![1.0, 2.0], 0.0)
        ])
        .is_err());
    }

    #[test]
    fn top1_identity_router() {
        let w = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let p = build_top1(&w, &[0.0; 3]).unwrap();
        assert_eq!(p.eval(&[3.0, 1.0, 2.0]).unwrap(), Evaluation { value: 3.0, argmax: vec![0] });
    }

    #[test]
    fn sym_trop_exponents_are_coalition_sums() {
        let w = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let p = build_sym_trop_k(&w, &[0.0; 3], 2).unwrap();
        let exps: Vec<_> = p.monomials().iter().map(|m| m.exponent.clone()).collect();
        assert_eq!(exps, vec![vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]);
        let full = build_sym_trop_k(&w, &[0.0; 3], 3).unwrap();
        assert_eq!(full.monomials().len(), 1);
        assert_eq!(full.eval(&[1.0, 2.0, 4.0]).unwrap().value, 7.0);
        assert!(!full.on_singular_locus(&[1.0, 1.0, 1.0]).unwrap());
        assert!(build_sym_trop_k(&w, &[0.0; 3], 0).is_err());
        assert!(build_sym_trop_k(&w, &[0.0; 3], 4).is_err());
    }

    #[test]
    fn relu_and_rational() {
        let r = TropicalPolynomial::<f64>::relu(1, 2);
        assert_eq!(r.eval(&[5.0, -2.0]).unwrap().value, 0.0);
        assert_eq!(r.eval(&[5.0, 2.5]).unwrap().value, 2.5);
        let q = TropicalRationalFunction::new(two_coords(), r.clone()).unwrap();
        let x = [0.3, 1.7];
        assert_eq!(q.eval(&x).unwrap(), two_coords().eval(&x).unwrap().value - r.eval(&x).unwrap().value);
    }

    #[test]
    fn works_in_single_precision() {
        let p = TropicalPolynomial::new(vec![
            TropicalMonomial::new(vec![1.0f32, 0.0], 0.0),
            TropicalMonomial::new(vec![0.0f32, 1.0], 0.0),
        ])
        .unwrap();
        assert_eq!(p.eval(&[2.0, 2.0]).unwrap().argmax, vec![0, 1]);
        assert_eq!(p.eval(&[3.0, 1.0]).unwrap().argmax, vec![0]);
    }
}
