//! Small dense linear algebra written once over [`Scalar`].
//!
//! Pivot choices are always made on the value part so that a jet-valued
//! computation follows one smooth branch around the evaluation point.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::NumericError;
use crate::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

pub fn zeros<S: Scalar>(rows: usize, cols: usize) -> Matrix<S> {
    vec![vec![S::zero(); cols]; rows]
}

pub fn identity<S: Scalar>(n: usize) -> Matrix<S> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = S::one();
    }
    m
}

pub fn transpose<S: Scalar>(a: &Matrix<S>) -> Matrix<S> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_vec<S: Scalar>(a: &Matrix<S>, v: &[S]) -> Vec<S> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y)
        })
        .collect()
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Matrix<S> {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(S::zero(), |acc, k| acc + row[k].clone() * &b[k][j])
                })
                .collect()
        })
        .collect()
}

/// `g(u, v) = u^i g_ij v^j`.
pub fn inner<S: Scalar>(g: &Matrix<S>, u: &[S], v: &[S]) -> S {
    let gv = mat_vec(g, v);
    u.iter()
        .zip(&gv)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y)
}

pub fn axpy<S: Scalar>(a: &S, x: &[S], y: &mut [S]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = yi.clone() + a.clone() * xi;
    }
}

fn pivot_row<S: Scalar>(a: &Matrix<S>, col: usize, from: usize) -> usize {
    let mut best = from;
    for r in from + 1..a.len() {
        if a[r][col].value().abs() > a[best][col].value().abs() {
            best = r;
        }
    }
    best
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve_many<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>, NumericError> {
    let n = a.len();
    let mut a = a.clone();
    let mut b = b.clone();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, x| m.max(x.value().abs()))
        .max(f64::MIN_POSITIVE);
    for k in 0..n {
        let p = pivot_row(&a, k, k);
        if a[p][k].value().abs() <= 1e-14 * scale {
            return Err(NumericError::Singular);
        }
        a.swap(k, p);
        b.swap(k, p);
        let inv = a[k][k].recip();
        for r in k + 1..n {
            if a[r][k].value() == 0.0 && !a[r][k].has_derivatives() {
                continue;
            }
            let f = a[r][k].clone() * &inv;
            for c in k..n {
                let t = f.clone() * &a[k][c];
                a[r][c] = a[r][c].clone() - t;
            }
            for c in 0..b[r].len() {
                let t = f.clone() * &b[k][c];
                b[r][c] = b[r][c].clone() - t;
            }
        }
    }
    let cols = b.first().map_or(0, |r| r.len());
    let mut x = zeros::<S>(n, cols);
    for k in (0..n).rev() {
        for c in 0..cols {
            let mut acc = b[k][c].clone();
            for j in k + 1..n {
                acc = acc - a[k][j].clone() * &x[j][c];
            }
            x[k][c] = acc / &a[k][k];
        }
    }
    Ok(x)
}

pub fn solve<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<Vec<S>, NumericError> {
    let bm: Matrix<S> = b.iter().map(|v| vec![v.clone()]).collect();
    Ok(solve_many(a, &bm)?.into_iter().map(|mut r| r.remove(0)).collect())
}

pub fn inverse<S: Scalar>(a: &Matrix<S>) -> Result<Matrix<S>, NumericError> {
    solve_many(a, &identity(a.len()))
}

/// Gram–Schmidt with respect to `g`, in the given order.
pub fn gram_schmidt<S: Scalar>(g: &Matrix<S>, vectors: &[Vec<S>]) -> Result<Vec<Vec<S>>, NumericError> {
    let mut out: Vec<Vec<S>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for u in &out {
            let c = inner(g, &w, u);
            axpy(&(-c), u, &mut w);
        }
        let n2 = inner(g, &w, &w);
        if n2.value() <= 1e-24 {
            return Err(NumericError::Singular);
        }
        let inv = n2.sqrt().recip();
        out.push(w.iter().map(|x| x.clone() * &inv).collect());
    }
    Ok(out)
}

/// Full-pivoting elimination on values; returns the rank and the pivot
/// columns in pivot order. Ties are broken towards the lowest column, then
/// the lowest row.
pub fn pivot_columns(a: &[Vec<f64>], rel_tol: f64) -> (usize, Vec<usize>) {
    let rows = a.len();
    if rows == 0 {
        return (0, Vec::new());
    }
    let cols = a[0].len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let scale = m.iter().flatten().fold(0.0f64, |x, y| x.max(y.abs()));
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut pivots = Vec::new();
    for _ in 0..rows.min(cols) {
        let mut best: Option<(usize, usize, f64)> = None;
        for c in 0..cols {
            if col_used[c] {
                continue;
            }
            for (r, used) in row_used.iter().enumerate() {
                if *used {
                    continue;
                }
                let v = m[r][c].abs();
                if best.is_none_or(|(_, _, b)| v > b) {
                    best = Some((r, c, v));
                }
            }
        }
        let Some((r, c, v)) = best else { break };
        if v <= rel_tol * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        row_used[r] = true;
        col_used[c] = true;
        pivots.push(c);
        for rr in 0..rows {
            if rr == r || row_used[rr] {
                continue;
            }
            let f = m[rr][c] / m[r][c];
            for cc in 0..cols {
                m[rr][cc] -= f * m[r][cc];
            }
        }
    }
    (pivots.len(), pivots)
}

/// Null-space basis of a full-row-rank `q × p` matrix, one vector per free
/// column (in increasing column order): `x_F = e_f`, `x_P = -J_P⁻¹ J_F e_f`.
pub fn null_space<S: Scalar>(j: &Matrix<S>, pivots: &[usize]) -> Result<Vec<Vec<S>>, NumericError> {
    let q = j.len();
    let p = if q == 0 { 0 } else { j[0].len() };
    let jp: Matrix<S> = (0..q)
        .map(|r| pivots.iter().map(|&c| j[r][c].clone()).collect())
        .collect();
    let free: Vec<usize> = (0..p).filter(|c| !pivots.contains(c)).collect();
    let rhs: Matrix<S> = (0..q)
        .map(|r| free.iter().map(|&f| -j[r][f].clone()).collect())
        .collect();
    let xp = solve_many(&jp, &rhs)?;
    Ok(free
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let mut v = vec![S::zero(); p];
            v[f] = S::one();
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = xp[i][k].clone();
            }
            v
        })
        .collect())
}

pub fn values(a: &[Vec<impl Scalar>]) -> Vec<Vec<f64>> {
    a.iter().map(|r| r.iter().map(Scalar::value).collect()).collect()
}

/// Eigenvalues of a symmetric real matrix, ascending.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[i][j] + a[j][i]));
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_two_by_two() {
        let a = vec![vec![4.0, 7.0], vec![2.0, 6.0]];
        let inv = inverse(&a).unwrap();
        let expect = [[0.6, -0.7], [-0.2, 0.4]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv[i][j] - expect[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(inverse(&a), Err(NumericError::Singular));
    }

    #[test]
    fn gram_schmidt_in_weighted_metric() {
        let g = vec![vec![4.0, 0.0], vec![0.0, 1.0]];
        let e = gram_schmidt(&g, &[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((inner(&g, &e[a], &e[b]) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rank_and_null_space() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let j = vec![
            vec![s, s, 0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, s, s, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0, s, s],
        ];
        let (rank, piv) = pivot_columns(&j, 1e-12);
        assert_eq!(rank, 3);
        assert_eq!(piv, vec![0, 2, 4]);
        let ns = null_space(&j, &piv).unwrap();
        assert_eq!(ns[0], vec![-1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        for v in &ns {
            for row in &j {
                let d: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(d.abs() < 1e-15);
            }
        }
        let (rank, _) = pivot_columns(&[vec![1.0, 2.0], vec![2.0, 4.0]], 1e-12);
        assert_eq!(rank, 1);
    }

    #[test]
    fn eigenvalues_sorted() {
        let ev = symmetric_eigenvalues(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }
}
