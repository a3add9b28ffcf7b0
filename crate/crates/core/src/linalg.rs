//! Small dense linear algebra on row-major `Vec<Vec<T>>` matrices.

use crate::Scalar;

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `a + s * b`
pub fn axpy<T: Scalar>(a: &[T], s: T, b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
}

pub fn mat_vec<T: Scalar>(m: &[Vec<T>], x: &[T]) -> Vec<T> {
    m.iter().map(|row| dot(row, x)).collect()
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `tol` relative to the
/// largest entry of `a`.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T], tol: T) -> Option<Vec<T>> {
    let n = b.len();
    let mut m: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |acc, &v| acc.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i][col]
                .abs()
                .partial_cmp(&m[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[piv][col].abs() <= tol * scale {
            return None;
        }
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f != T::zero() {
                for c in col..=n {
                    let v = m[col][c];
                    m[row][c] = m[row][c] - f * v;
                }
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for c in row + 1..n {
            acc = acc - m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Singular values of a small matrix (rows × cols), descending, via one-sided
/// Jacobi rotations on the columns of the transpose.
pub fn singular_values<T: Scalar>(rows: &[Vec<T>]) -> Vec<T> {
    if rows.is_empty() {
        return Vec::new();
    }
    // Work on vectors = the shorter side so the rotation count stays small.
    let ncols = rows[0].len();
    let mut vecs: Vec<Vec<T>> = if rows.len() <= ncols {
        rows.to_vec()
    } else {
        (0..ncols)
            .map(|c| rows.iter().map(|r| r[c]).collect())
            .collect()
    };
    let k = vecs.len();
    let eps = T::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = dot(&vecs[p], &vecs[p]);
                let beta = dot(&vecs[q], &vecs[q]);
                let gamma = dot(&vecs[p], &vecs[q]);
                if gamma.abs() <= eps * (alpha * beta).sqrt() || gamma == T::zero() {
                    continue;
                }
                rotated = true;
                let two = T::lit(2.0);
                let zeta = (beta - alpha) / (two * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (vp, vq) = (vecs[p].clone(), vecs[q].clone());
                for i in 0..vp.len() {
                    vecs[p][i] = c * vp[i] - s * vq[i];
                    vecs[q][i] = s * vp[i] + c * vq[i];
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = vecs.iter().map(|v| norm(v)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Numerical rank: number of singular values above `tol * max(1, σ_max)` after
/// normalizing every row to unit length.
pub fn normalized_rank<T: Scalar>(rows: &[Vec<T>], tol: T) -> usize {
    let normed: Vec<Vec<T>> = rows
        .iter()
        .map(|r| {
            let n = norm(r);
            if n > T::zero() {
                scale(r, T::one() / n)
            } else {
                r.clone()
            }
        })
        .collect();
    singular_values(&normed)
        .into_iter()
        .filter(|&s| s > tol)
        .count()
}

/// Orthonormal basis of the orthogonal complement of a nonzero vector.
pub fn orthogonal_complement<T: Scalar>(a: &[T]) -> Vec<Vec<T>> {
    let d = a.len();
    let n = norm(a);
    let unit = scale(a, T::one() / n);
    let mut basis: Vec<Vec<T>> = vec![unit];
    for e in 0..d {
        let mut v = vec![T::zero(); d];
        v[e] = T::one();
        for b in &basis {
            let p = dot(&v, b);
            v = axpy(&v, -p, b);
        }
        // second pass for stability
        for b in &basis {
            let p = dot(&v, b);
            v = axpy(&v, -p, b);
        }
        let nv = norm(&v);
        if nv > T::lit(1e-3) {
            basis.push(scale(&v, T::one() / nv));
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}
