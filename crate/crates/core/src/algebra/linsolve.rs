//! Exact Gaussian elimination over ℚ and over rational functions.

use super::rat::Rat;
use super::ratfunc::RatFunc;
use crate::error::{Error, Result};
use num_traits::{One, Zero};

/// Solve `a·x = b`. Returns a particular solution and a basis of the null space,
/// or `None` when the system is inconsistent.
pub fn solve_affine(a: &[Vec<Rat>], b: &[Rat]) -> Option<(Vec<Rat>, Vec<Vec<Rat>>)> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rat>> = a.iter().zip(b).map(|(r, bi)| r.iter().cloned().chain([bi.clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rat::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][cols].clone();
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let null = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = -m[i][f].clone();
            }
            v
        })
        .collect();
    Some((x, null))
}

#[allow(clippy::needless_range_loop)]
pub fn det(a: &[Vec<Rat>]) -> Rat {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else { return Rat::zero() };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        for i in c + 1..n {
            let f = &m[i][c] / &m[c][c];
            for j in c..n {
                let t = &f * &m[c][j];
                m[i][j] -= t;
            }
        }
    }
    d
}

pub fn inverse(a: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let e: Vec<Rat> = (0..n).map(|i| if i == k { Rat::one() } else { Rat::zero() }).collect();
        let (x, null) = solve_affine(a, &e)?;
        if !null.is_empty() {
            return None;
        }
        cols.push(x);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

/// Solve a square system over rational functions.
#[allow(clippy::needless_range_loop)]
pub fn solve_square(mut m: Vec<Vec<RatFunc>>, mut b: Vec<RatFunc>) -> Result<Vec<RatFunc>> {
    let n = m.len();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero()).ok_or_else(|| Error::Singular("singular matrix".into()))?;
        m.swap(p, c);
        b.swap(p, c);
        let inv = m[c][c].recip()?;
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = &m[i][c] * &inv;
                for j in c..n {
                    let t = &f * &m[c][j];
                    m[i][j] = &m[i][j] - &t;
                }
                let t = &f * &b[c];
                b[i] = &b[i] - &t;
            }
        }
    }
    (0..n).map(|i| b[i].checked_div(&m[i][i])).collect()
}
