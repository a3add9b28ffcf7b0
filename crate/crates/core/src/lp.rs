//! Dense simplex kernel used to certify full-dimensional polyhedra.
//!
//! Every program solved here lives in a bounded box, so the tableau always
//! starts from a feasible slack basis and needs a single phase. Pivoting uses
//! Bland's rule, which rules out cycling on the degenerate vertices that
//! arrangements produce in abundance.

use serde::{Deserialize, Serialize};

use crate::arrangement::Halfspace;
use crate::error::{CoreError, Result};
use crate::linalg::{dot, norm};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions<T> {
    /// Half-width of the box confining `x`.
    pub box_radius: T,
    /// Normalized slack a region must exceed to count as full-dimensional.
    pub eps: T,
}

impl<T: Scalar> Default for LpOptions<T> {
    fn default() -> Self {
        LpOptions {
            box_radius: T::lit(T::BOX_RADIUS),
            eps: T::lit(T::LP_EPS),
        }
    }
}

impl<T: Scalar> LpOptions<T> {
    pub fn with_box(mut self, r: T) -> Self {
        self.box_radius = r;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult<T> {
    pub feasible: bool,
    pub witness: Option<Vec<T>>,
    /// Smallest normalized slack `(w·x + b)/‖w‖` at the witness.
    pub slack: T,
}

/// maximize c·x  s.t.  A x ≤ b, x ≥ 0, with b ≥ 0 (slack basis feasible).
///
/// `row_tags` names the caller-visible constraint behind every row, reported
/// on pivot failure.
fn simplex_max<T: Scalar>(a: &[Vec<T>], b: &[T], c: &[T], row_tags: &[usize]) -> Result<(T, Vec<T>)> {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let rhs = n + m;
    let mut tab: Vec<Vec<T>> = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let mut r = vec![T::zero(); width];
        r[..n].copy_from_slice(row);
        r[n + i] = T::one();
        r[rhs] = b[i].max(T::zero());
        tab.push(r);
    }
    let mut cost = vec![T::zero(); width];
    cost[..n].copy_from_slice(c);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let piv_eps = T::lit(T::PIVOT_EPS);
    let cscale = c.iter().fold(T::one(), |acc, &v| acc.max(v.abs()));
    let max_iter = 200 * (m + n + 1);
    let mut last_row = 0usize;
    for _ in 0..max_iter {
        let entering = (0..n + m).find(|&j| cost[j] > piv_eps * cscale);
        let Some(s) = entering else {
            let mut x = vec![T::zero(); n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = tab[i][rhs];
                }
            }
            let value = -cost[rhs];
            if !value.is_finite() || x.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::IllConditioned { constraint: row_tags.get(last_row).copied().unwrap_or(0) });
            }
            return Ok((value, x));
        };
        let colmax = tab.iter().fold(T::zero(), |acc, r| acc.max(r[s].abs()));
        let mut leave: Option<(usize, T)> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[s] > piv_eps * colmax.max(T::one()) {
                let ratio = row[rhs] / row[s];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr || (ratio == lr && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else {
            // unbounded direction: impossible inside the box, so the data is bad
            return Err(CoreError::IllConditioned { constraint: row_tags.get(last_row).copied().unwrap_or(0) });
        };
        last_row = r;
        let p = tab[r][s];
        if !p.is_finite() || p == T::zero() {
            return Err(CoreError::IllConditioned { constraint: row_tags.get(r).copied().unwrap_or(0) });
        }
        for v in tab[r].iter_mut() {
            *v = *v / p;
        }
        let pivot_row = tab[r].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[s];
            if f != T::zero() {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v = *v - f * pv;
                }
                row[s] = T::zero();
                if row[rhs] < T::zero() {
                    row[rhs] = T::zero().max(row[rhs]);
                }
            }
        }
        let f = cost[s];
        for (v, &pv) in cost.iter_mut().zip(&pivot_row) {
            *v = *v - f * pv;
        }
        cost[s] = T::zero();
        basis[r] = s;
    }
    Err(CoreError::IllConditioned { constraint: row_tags.get(last_row).copied().unwrap_or(0) })
}

fn normalized<T: Scalar>(constraints: &[Halfspace<T>], dim: usize) -> Result<Vec<(Vec<T>, T)>> {
    constraints
        .iter()
        .enumerate()
        .map(|(i, h)| {
            if h.normal.len() != dim {
                return Err(CoreError::DimensionMismatch { expected: dim, got: h.normal.len() });
            }
            let n = norm(&h.normal);
            if !(n > T::zero()) {
                return Err(CoreError::ZeroNormal { index: i });
            }
            Ok((h.normal.iter().map(|&w| w / n).collect(), h.offset / n))
        })
        .collect()
}

/// Largest `t` such that every normalized constraint is at least `t` at some
/// `x` in the box `center ± R`, shifted so the slack basis is feasible.
///
/// Variables: `y⁺, y⁻ ∈ [0, R]` (so `x = center + y⁺ − y⁻`) and `u = t + T0 ∈ [0, T0 + R]`.
fn max_min_slack<T: Scalar>(
    rows: &[(Vec<T>, T)],
    dim: usize,
    center: &[T],
    opts: &LpOptions<T>,
) -> Result<(T, Vec<T>)> {
    let r = opts.box_radius;
    let shifted: Vec<T> = rows.iter().map(|(w, b)| dot(w, center) + *b).collect();
    let t0 = shifted.iter().fold(T::zero(), |acc, &v| acc.max(-v)) + T::one();
    let nvar = 2 * dim + 1;
    let mut a = Vec::with_capacity(rows.len() + 2 * dim + 1);
    let mut b = Vec::with_capacity(a.capacity());
    let mut tags = Vec::with_capacity(a.capacity());
    for (i, ((w, _), &s)) in rows.iter().zip(&shifted).enumerate() {
        // t ≤ w·x + b  ⇔  −w·y⁺ + w·y⁻ + u ≤ s + T0
        let mut row = vec![T::zero(); nvar];
        for j in 0..dim {
            row[j] = -w[j];
            row[dim + j] = w[j];
        }
        row[2 * dim] = T::one();
        a.push(row);
        b.push(s + t0);
        tags.push(i);
    }
    for j in 0..2 * dim {
        let mut row = vec![T::zero(); nvar];
        row[j] = T::one();
        a.push(row);
        b.push(r);
        tags.push(rows.len() + j);
    }
    let mut cap = vec![T::zero(); nvar];
    cap[2 * dim] = T::one();
    a.push(cap);
    b.push(t0 + r);
    tags.push(rows.len() + 2 * dim);

    let mut c = vec![T::zero(); nvar];
    c[2 * dim] = T::one();
    let (_, y) = simplex_max(&a, &b, &c, &tags)?;
    let x: Vec<T> = (0..dim).map(|j| center[j] + y[j] - y[dim + j]).collect();
    let slack = rows
        .iter()
        .map(|(w, b)| dot(w, &x) + *b)
        .fold(r, |acc, v| acc.min(v));
    Ok((slack, x))
}

/// Decides whether `{x : w_i·x + b_i > 0 ∀i}` has nonempty interior by
/// maximizing the smallest normalized slack inside the box.
pub fn strict_feasibility<T: Scalar>(dim: usize, constraints: &[Halfspace<T>]) -> Result<FeasibilityResult<T>> {
    strict_feasibility_with(dim, constraints, &LpOptions::default())
}

pub fn strict_feasibility_with<T: Scalar>(
    dim: usize,
    constraints: &[Halfspace<T>],
    opts: &LpOptions<T>,
) -> Result<FeasibilityResult<T>> {
    let rows = normalized(constraints, dim)?;
    if rows.is_empty() {
        return Ok(FeasibilityResult { feasible: true, witness: Some(vec![T::zero(); dim]), slack: opts.box_radius });
    }
    let origin = vec![T::zero(); dim];
    let (slack, x) = max_min_slack(&rows, dim, &origin, opts)?;
    let feasible = slack > opts.eps;
    Ok(FeasibilityResult { feasible, witness: feasible.then_some(x), slack })
}

/// Maximizes `c·x + c0` over `{x : w_i·x + b_i ≥ 0}` intersected with the box.
/// Returns `None` when the constraint set is empty (beyond `eps`).
pub fn maximize_affine<T: Scalar>(
    dim: usize,
    objective: (&[T], T),
    constraints: &[Halfspace<T>],
    opts: &LpOptions<T>,
) -> Result<Option<(T, Vec<T>)>> {
    let rows = normalized(constraints, dim)?;
    let origin = vec![T::zero(); dim];
    let start = if rows.is_empty() {
        origin
    } else {
        let (slack, x) = max_min_slack(&rows, dim, &origin, opts)?;
        if slack < -opts.eps {
            return Ok(None);
        }
        x
    };
    let (c, c0) = objective;
    let r = opts.box_radius;
    let nvar = 2 * dim;
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut tags = Vec::new();
    for (i, (w, off)) in rows.iter().enumerate() {
        // w·(start + y⁺ − y⁻) + off ≥ 0  ⇔  −w·y⁺ + w·y⁻ ≤ w·start + off
        let mut row = vec![T::zero(); nvar];
        for j in 0..dim {
            row[j] = -w[j];
            row[dim + j] = w[j];
        }
        a.push(row);
        b.push((dot(w, &start) + *off).max(T::zero()));
        tags.push(i);
    }
    for j in 0..nvar {
        let mut row = vec![T::zero(); nvar];
        row[j] = T::one();
        a.push(row);
        b.push(r);
        tags.push(rows.len() + j);
    }
    let mut cc = vec![T::zero(); nvar];
    for j in 0..dim {
        cc[j] = c[j];
        cc[dim + j] = -c[j];
    }
    let (_, y) = simplex_max(&a, &b, &cc, &tags)?;
    let x: Vec<T> = (0..dim).map(|j| start[j] + y[j] - y[dim + j]).collect();
    Ok(Some((dot(c, &x) + c0, x)))
}
