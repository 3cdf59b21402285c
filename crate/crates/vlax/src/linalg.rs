//! Exact rational linear algebra: reduced row echelon form, kernels, column
//! spaces, inverses, and a fraction-free (Bareiss) elimination over integers
//! for large kernel computations.

use crate::diffpoly::Q;
use num::{BigInt, One, Signed, Zero};

pub type Matrix = Vec<Vec<Q>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Q::one() } else { Q::zero() })
                .collect()
        })
        .collect()
}

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![Q::zero(); cols]; rows]
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m) = (a.len(), b[0].len());
    let inner = b.len();
    let mut out = zeros(n, m);
    for i in 0..n {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[k][j].is_zero() {
                    out[i][j] = &out[i][j] + &(&a[i][k] * &b[k][j]);
                }
            }
        }
    }
    out
}

pub fn mat_vec(a: &Matrix, v: &[Q]) -> Vec<Q> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Q::zero(), |acc, (c, x)| acc + c * x)
        })
        .collect()
}

pub fn mat_add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn mat_scale(a: &Matrix, c: &Q) -> Matrix {
    a.iter()
        .map(|r| r.iter().map(|x| x * c).collect())
        .collect()
}

/// In-place Gauss-Jordan; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].clone();
        for x in &mut m[r] {
            *x = &*x / &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for j in 0..cols {
                    m[i][j] = &m[i][j] - &(&factor * &m[r][j]);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Basis of the null space of `m` (as column vectors of length `cols`).
pub fn kernel(m: &Matrix) -> Vec<Vec<Q>> {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free {
        let mut v = vec![Q::zero(); cols];
        v[fc] = Q::one();
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[ri][fc].clone();
        }
        basis.push(v);
    }
    basis
}

/// Basis of the column space of `m`.
pub fn column_space(m: &Matrix) -> Vec<Vec<Q>> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut a = m.clone();
    let pivots = rref(&mut a);
    pivots
        .iter()
        .map(|&c| m.iter().map(|row| row[c].clone()).collect())
        .collect()
}

/// Inverse of a square matrix; `None` when singular.
pub fn inverse(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend(identity(n)[i].clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Does `v` lie in the span of `basis` (vectors of equal length)?
pub fn in_span(basis: &[Vec<Q>], v: &[Q]) -> bool {
    if v.iter().all(|x| x.is_zero()) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    let cols_a: Matrix = transpose_vecs(basis);
    let mut with: Matrix = cols_a.clone();
    for (i, row) in with.iter_mut().enumerate() {
        row.push(v[i].clone());
    }
    rank(&cols_a) == rank(&with)
}

fn transpose_vecs(vs: &[Vec<Q>]) -> Matrix {
    let rows = vs[0].len();
    (0..rows)
        .map(|i| vs.iter().map(|v| v[i].clone()).collect())
        .collect()
}

/// Kernel basis via fraction-free Bareiss elimination over the integers.
///
/// Rows are first scaled to clear denominators; the elimination keeps all
/// intermediate entries integral, which keeps big kernel computations (the
/// invariant-polynomial solves) cheap and exact.
pub fn kernel_fraction_free(m: &Matrix) -> Vec<Vec<Q>> {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let lcm = row
                .iter()
                .fold(BigInt::one(), |acc, x| num::integer::lcm(acc, x.denom().clone()));
            row.iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect()
        })
        .collect();
    let rows = a.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0usize;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, pr);
        let pivot = a[r][c].clone();
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = a[i][c].clone();
            for j in 0..cols {
                let num = &pivot * &a[i][j] - &factor * &a[r][j];
                a[i][j] = &num / &prev;
            }
        }
        prev = pivot;
        pivots.push(c);
        r += 1;
    }
    // back-substitute from the integer echelon form
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free {
        let mut v = vec![Q::zero(); cols];
        v[fc] = Q::one();
        for (ri, &pc) in pivots.iter().enumerate().rev() {
            let mut s = Q::zero();
            for j in (pc + 1)..cols {
                if !a[ri][j].is_zero() {
                    s += Q::from_integer(a[ri][j].clone()) * &v[j];
                }
            }
            v[pc] = -s / Q::from_integer(a[ri][pc].clone());
        }
        basis.push(normalize_primitive(v));
    }
    basis
}

/// Scale a rational vector to a primitive integer vector with positive
/// leading entry; keeps kernel bases deterministic.
pub fn normalize_primitive(v: Vec<Q>) -> Vec<Q> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| num::integer::lcm(acc, x.denom().clone()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let gcd = ints
        .iter()
        .fold(BigInt::zero(), |acc, x| num::integer::gcd(acc, x.clone()));
    if gcd.is_zero() {
        return v;
    }
    let lead_neg = ints.iter().find(|x| !x.is_zero()).map(|x| x.is_negative());
    let sign = if lead_neg == Some(true) { -BigInt::one() } else { BigInt::one() };
    ints.into_iter()
        .map(|x| Q::from_integer(x / &gcd * &sign))
        .collect()
}
