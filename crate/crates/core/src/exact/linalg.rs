//! Dense Gaussian elimination over any ordered field.

use crate::error::{Error, Result};
use crate::scalar::RealScalar;

/// Solves `A X = B` for a square `A` and a matrix of right-hand sides `B` (row-major).
pub fn solve_many<T: RealScalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = a.len();
    if a.iter().any(|r| r.len() != n) || b.len() != n {
        return Err(Error::Domain("matrix dimensions do not match".into()));
    }
    let cols = b.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<T>> = a.iter().zip(b).map(|(ra, rb)| ra.iter().chain(rb).cloned().collect()).collect();
    for c in 0..n {
        // Largest pivot: exact arithmetic only needs a nonzero one, floats need the largest.
        let p = (c..n)
            .filter(|&r| !m[r][c].is_zero())
            .max_by(|&x, &y| m[x][c].abs().partial_cmp(&m[y][c].abs()).unwrap_or(std::cmp::Ordering::Equal))
            .ok_or(Error::SingularSystem)?;
        m.swap(c, p);
        let piv = m[c][c].clone();
        for r in 0..n {
            if r == c || m[r][c].is_zero() {
                continue;
            }
            let f = m[r][c].clone() / piv.clone();
            for j in c..n + cols {
                let t = f.clone() * m[c][j].clone();
                m[r][j] = m[r][j].clone() - t;
            }
        }
    }
    Ok((0..n).map(|r| (0..cols).map(|j| m[r][n + j].clone() / m[r][r].clone()).collect()).collect())
}

/// Solves `A x = b`.
pub fn solve<T: RealScalar>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    let rhs: Vec<Vec<T>> = b.iter().map(|v| vec![v.clone()]).collect();
    Ok(solve_many(a, &rhs)?.into_iter().map(|mut r| r.remove(0)).collect())
}

/// `A^T A` and `A^T b` with row weights `w` (each row of `A` and entry of `b` multiplied by `w_i`).
pub fn weighted_normal_equations<T: RealScalar>(a: &[Vec<T>], b: &[T], w: &[T]) -> (Vec<Vec<T>>, Vec<T>) {
    let n = a.first().map_or(0, Vec::len);
    let mut ata = vec![vec![T::zero(); n]; n];
    let mut atb = vec![T::zero(); n];
    for ((row, bi), wi) in a.iter().zip(b).zip(w) {
        let w2 = wi.clone() * wi.clone();
        for i in 0..n {
            let ri = row[i].clone() * w2.clone();
            atb[i] = atb[i].clone() + ri.clone() * bi.clone();
            for j in 0..n {
                ata[i][j] = ata[i][j].clone() + ri.clone() * row[j].clone();
            }
        }
    }
    (ata, atb)
}
