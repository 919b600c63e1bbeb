//! Dense Gaussian elimination over any [`Scalar`].
//!
//! Pivots are chosen by largest absolute value, which is a harmless choice on
//! the exact path and partial pivoting on the float path.

use crate::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

fn pivot_row<S: Scalar>(a: &Matrix<S>, col: usize, from: usize, tol: f64) -> Option<usize> {
    let mut best: Option<(usize, S)> = None;
    for (r, row) in a.iter().enumerate().skip(from) {
        let v = row[col].abs();
        if v.is_zero_within(tol) {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((r, v));
        }
    }
    best.map(|(r, _)| r)
}

/// `a[target][from..] -= f · a[source][from..]`.
fn subtract_row<S: Scalar>(a: &mut Matrix<S>, target: usize, source: usize, f: &S, from: usize) {
    let (src, dst) = if source < target {
        let (lo, hi) = a.split_at_mut(target);
        (&lo[source], &mut hi[0])
    } else {
        let (lo, hi) = a.split_at_mut(source);
        (&hi[0], &mut lo[target])
    };
    for (t, v) in dst[from..].iter_mut().zip(&src[from..]) {
        *t = t.clone() - v.clone() * f.clone();
    }
}

/// Solves the square system `a·x = b`; `None` when `a` is singular.
pub fn solve<S: Scalar>(mut a: Matrix<S>, mut b: Vec<S>, tol: f64) -> Option<Vec<S>> {
    let n = a.len();
    for col in 0..n {
        let p = pivot_row(&a, col, col, tol)?;
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / a[col][col].clone();
            subtract_row(&mut a, r, col, &f, col);
            b[r] = b[r].clone() - b[col].clone() * f;
        }
    }
    let mut x = vec![S::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = acc - a[r][c].clone() * x[c].clone();
        }
        x[r] = acc / a[r][r].clone();
    }
    Some(x)
}

pub fn determinant<S: Scalar>(mut a: Matrix<S>, tol: f64) -> S {
    let n = a.len();
    let mut det = S::one();
    for col in 0..n {
        let Some(p) = pivot_row(&a, col, col, tol) else {
            return S::zero();
        };
        if p != col {
            a.swap(col, p);
            det = -det;
        }
        det = det * a[col][col].clone();
        for r in col + 1..n {
            let f = a[r][col].clone() / a[col][col].clone();
            subtract_row(&mut a, r, col, &f, col);
        }
    }
    det
}

/// Inverse of a square matrix; `None` when singular.
pub fn invert<S: Scalar>(a: &Matrix<S>, tol: f64) -> Option<Matrix<S>> {
    let n = a.len();
    let mut aug: Matrix<S> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { S::one() } else { S::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = pivot_row(&aug, col, col, tol)?;
        aug.swap(col, p);
        let inv = S::one() / aug[col][col].clone();
        for v in aug[col].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for r in 0..n {
            if r == col || aug[r][col].is_zero() {
                continue;
            }
            let f = aug[r][col].clone();
            subtract_row(&mut aug, r, col, &f, 0);
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Column indices of a maximal independent set of columns of `rows`
/// (the pivot columns of its echelon form).
pub fn pivot_columns<S: Scalar>(rows: &Matrix<S>, tol: f64) -> Vec<usize> {
    let mut a = rows.clone();
    let ncols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == a.len() {
            break;
        }
        let Some(p) = pivot_row(&a, col, rank, tol) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..a.len() {
            if a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone() / a[rank][col].clone();
            subtract_row(&mut a, r, rank, &f, col);
        }
        pivots.push(col);
        rank += 1;
    }
    pivots
}

pub fn transpose<S: Clone>(a: &Matrix<S>) -> Matrix<S> {
    let n = a.len();
    let m = a.first().map_or(0, Vec::len);
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn mat_vec<S: Scalar>(a: &Matrix<S>, x: &[S]) -> Vec<S> {
    a.iter().map(|row| crate::scalar::dot(row, x)).collect()
}
