//! Exact Gauss–Jordan routines over rationals.

use crate::scalar::{Rat, Scalar};
use num_traits::Zero;

fn zero() -> Rat {
    <Rat as Zero>::zero()
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(a: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = Rat::one() / a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let d = f.clone() * a[r][j].clone();
                    a[i][j] = a[i][j].clone() - d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(a: &[Vec<Rat>]) -> usize {
    let mut m = a.to_vec();
    rref(&mut m).len()
}

/// Inverse of a square matrix, `None` when singular.
pub fn invert(a: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = a.len();
    let mut aug: Vec<Vec<Rat>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { zero() }));
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Unique solution of `A x = b`, `None` when singular or inconsistent.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<Rat>> = a.iter().zip(b).map(|(r, bi)| {
        let mut r = r.clone();
        r.push(bi.clone());
        r
    }).collect();
    let piv = rref(&mut aug);
    if piv.len() != n || piv.iter().any(|&c| c >= n) {
        return None;
    }
    Some((0..n).map(|i| aug[i][n].clone()).collect())
}

/// Rank of the affine hull of a point set.
pub fn affine_rank(points: &[Vec<Rat>]) -> usize {
    match points.split_first() {
        None => 0,
        Some((p0, rest)) => {
            let diffs: Vec<Vec<Rat>> =
                rest.iter().map(|p| p.iter().zip(p0).map(|(a, b)| a.clone() - b.clone()).collect()).collect();
            if diffs.is_empty() {
                0
            } else {
                rank(&diffs)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn m(v: &[&[i64]]) -> Vec<Vec<Rat>> {
        v.iter().map(|r| r.iter().map(|&x| Rat::from_i64(x)).collect()).collect()
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = invert(&a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s = (0..3).fold(zero(), |s, k| s + a[i][k].clone() * inv[k][j].clone());
                assert_eq!(s, Rat::from_i64((i == j) as i64));
            }
        }
        assert!(invert(&m(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn solve_and_rank() {
        let a = m(&[&[1, 1], &[1, -1]]);
        let x = solve(&a, &[Rat::from_i64(3), Rat::from_i64(1)]).unwrap();
        assert_eq!(x, vec![Rat::from_i64(2), Rat::from_i64(1)]);
        assert_eq!(rank(&m(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]])), 2);
        let pts = vec![vec![rat(0, 1), rat(0, 1)], vec![rat(1, 2), rat(1, 2)], vec![rat(1, 1), rat(1, 1)]];
        assert_eq!(affine_rank(&pts), 1);
    }
}
