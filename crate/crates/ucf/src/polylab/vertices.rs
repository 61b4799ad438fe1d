//! Exact vertex enumeration by the double-description method.

use super::polytope::Polytope;
use super::PolylabError;
use crate::builder::Sense;
use crate::scalar::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

pub const MAX_DIM: usize = 24;
const WORDS: usize = 4;
const MAX_CONSTRAINTS: usize = WORDS * 64;

/// Deduplicated, sorted vertex list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    pub points: Vec<Vec<Rat>>,
}

impl VertexSet {
    pub fn new(mut points: Vec<Vec<Rat>>) -> Self {
        points.sort();
        points.dedup();
        VertexSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Dense constraint `a·x (sense) b`.
#[derive(Debug, Clone)]
pub struct DenseRow {
    pub a: Vec<Rat>,
    pub sense: Sense,
    pub b: Rat,
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct Bits([u64; WORDS]);

impl Bits {
    fn empty() -> Self {
        Bits([0; WORDS])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, o: &Bits) -> Bits {
        let mut r = [0; WORDS];
        for (k, w) in r.iter_mut().enumerate() {
            *w = self.0[k] & o.0[k];
        }
        Bits(r)
    }

    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    fn subset_of(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & !b == 0)
    }
}

struct Ray {
    y: Vec<BigInt>,
    zero: Bits,
}

/// Homogeneous integer constraint `c·(x, λ) ≥ 0` (or `= 0`).
fn homogenize(row: &DenseRow) -> (Vec<BigInt>, bool) {
    let lcm = row
        .a
        .iter()
        .chain(std::iter::once(&row.b))
        .fold(BigInt::from(1), |l, v| l.lcm(v.denom()));
    let scale = |v: &Rat| (v * Rat::from_integer(lcm.clone())).to_integer();
    let sign = if row.sense == Sense::Ge { BigInt::from(-1) } else { BigInt::from(1) };
    let mut c: Vec<BigInt> = row.a.iter().map(|v| -scale(v) * &sign).collect();
    c.push(scale(&row.b) * &sign);
    (c, row.sense == Sense::Eq)
}

fn normalize(y: &mut [BigInt]) {
    let g = y.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    if !g.is_zero() && g != BigInt::from(1) {
        for v in y.iter_mut() {
            *v = &*v / &g;
        }
    }
}

fn dot(c: &[BigInt], y: &[BigInt]) -> BigInt {
    c.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Vertices of `{x ∈ [0,1]^d : rows}`.
pub fn box_vertices(d: usize, rows: &[DenseRow]) -> Result<Vec<Vec<Rat>>, PolylabError> {
    if d > MAX_DIM {
        return Err(PolylabError::Guard(format!("dimension {d} exceeds {MAX_DIM}")));
    }
    if d == 0 {
        let ok = rows.iter().all(|r| match r.sense {
            Sense::Le => Rat::zero() <= r.b,
            Sense::Ge => Rat::zero() >= r.b,
            Sense::Eq => r.b.is_zero(),
        });
        return Ok(if ok { vec![Vec::new()] } else { Vec::new() });
    }
    let total = 2 * d + 1 + rows.len();
    if total > MAX_CONSTRAINTS {
        return Err(PolylabError::Guard(format!("{total} constraints exceed {MAX_CONSTRAINTS}")));
    }
    // Orthant x ≥ 0, λ ≥ 0 as the starting cone: constraints 0..=d.
    let mut rays: Vec<Ray> = (0..=d)
        .map(|i| {
            let mut y = vec![BigInt::zero(); d + 1];
            y[i] = BigInt::from(1);
            let mut zero = Bits::empty();
            (0..=d).filter(|&j| j != i).for_each(|j| zero.set(j));
            Ray { y, zero }
        })
        .collect();
    let mut cons: Vec<(Vec<BigInt>, bool)> = Vec::new();
    for r in rows.iter().filter(|r| r.sense == Sense::Eq) {
        cons.push(homogenize(r));
    }
    for j in 0..d {
        let mut c = vec![BigInt::zero(); d + 1];
        c[j] = BigInt::from(-1);
        c[d] = BigInt::from(1);
        cons.push((c, false));
    }
    for r in rows.iter().filter(|r| r.sense != Sense::Eq) {
        cons.push(homogenize(r));
    }
    let min_common = d.saturating_sub(1) as u32;
    for (k, (c, eq)) in cons.iter().enumerate() {
        let idx = d + 1 + k;
        let s: Vec<BigInt> = rays.iter().map(|r| dot(c, &r.y)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| s[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| s[i].is_negative()).collect();
        if neg.is_empty() && !*eq {
            for (i, r) in rays.iter_mut().enumerate() {
                if s[i].is_zero() {
                    r.zero.set(idx);
                }
            }
            continue;
        }
        let mut next: Vec<Ray> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zero.and(&rays[n].zero);
                if common.count() < min_common {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(i, r)| i == p || i == n || !common.subset_of(&r.zero));
                if !adjacent {
                    continue;
                }
                let mut y: Vec<BigInt> =
                    rays[n].y.iter().zip(&rays[p].y).map(|(yn, yp)| &s[p] * yn - &s[n] * yp).collect();
                normalize(&mut y);
                let mut zero = common;
                zero.set(idx);
                next.push(Ray { y, zero });
            }
        }
        let old = std::mem::take(&mut rays);
        for (i, mut r) in old.into_iter().enumerate() {
            if s[i].is_zero() {
                r.zero.set(idx);
                rays.push(r);
            } else if s[i].is_positive() && !*eq {
                rays.push(r);
            }
        }
        rays.extend(next);
    }
    let mut out: Vec<Vec<Rat>> = rays
        .into_iter()
        .filter(|r| r.y[d].is_positive())
        .map(|r| r.y[..d].iter().map(|v| Rat::new(v.clone(), r.y[d].clone())).collect())
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Dense rows of a polytope.
pub fn dense_rows(p: &Polytope) -> Vec<DenseRow> {
    let d = p.dim_ambient();
    p.rows
        .iter()
        .map(|r| {
            let mut a = vec![Rat::zero(); d];
            for (&j, c) in r.expr.terms() {
                a[j] = c.clone();
            }
            DenseRow { a, sense: r.sense, b: r.rhs.clone() - r.expr.constant().clone() }
        })
        .collect()
}

/// Every vertex of the continuous relaxation.
pub fn enumerate_vertices(p: &Polytope) -> Result<VertexSet, PolylabError> {
    Ok(VertexSet::new(box_vertices(p.dim_ambient(), &dense_rows(p))?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn le(a: &[i64], b: i64) -> DenseRow {
        DenseRow { a: a.iter().map(|&v| rat(v, 1)).collect(), sense: Sense::Le, b: rat(b, 1) }
    }

    #[test]
    fn unit_cube_has_eight_vertices() {
        let v = box_vertices(3, &[]).unwrap();
        assert_eq!(v.len(), 8);
    }

    #[test]
    fn simplex_has_four_vertices() {
        let v = box_vertices(3, &[le(&[1, 1, 1], 1)]).unwrap();
        assert_eq!(v.len(), 4);
    }

    #[test]
    fn fractional_vertices_and_equalities() {
        // x + y ≤ 3/2 cuts the square's corner.
        let r = DenseRow { a: vec![rat(1, 1), rat(1, 1)], sense: Sense::Le, b: rat(3, 2) };
        let v = box_vertices(2, &[r]).unwrap();
        assert_eq!(v.len(), 5);
        assert!(v.contains(&vec![rat(1, 2), rat(1, 1)]));
        let e = DenseRow { a: vec![rat(1, 1), rat(1, 1)], sense: Sense::Eq, b: rat(1, 1) };
        let v = box_vertices(2, &[e]).unwrap();
        assert_eq!(v, vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]]);
    }

    #[test]
    fn infeasible_is_empty() {
        let r = DenseRow { a: vec![rat(1, 1)], sense: Sense::Ge, b: rat(2, 1) };
        assert!(box_vertices(1, &[r]).unwrap().is_empty());
    }

    #[test]
    fn matches_brute_force_active_sets() {
        use crate::polylab::linalg::solve;
        let rows = vec![le(&[2, 1, 0], 2), le(&[0, 1, 3], 3), le(&[1, -1, 1], 1), le(&[-1, 2, 2], 3)];
        let dd = box_vertices(3, &rows).unwrap();
        let mut all: Vec<(Vec<Rat>, Rat)> = rows.iter().map(|r| (r.a.clone(), r.b.clone())).collect();
        for j in 0..3 {
            let mut e = vec![rat(0, 1); 3];
            e[j] = rat(1, 1);
            all.push((e.clone(), rat(1, 1)));
            all.push((e.iter().map(|v| -v.clone()).collect(), rat(0, 1)));
        }
        let mut brute = Vec::new();
        let n = all.len();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let a = vec![all[i].0.clone(), all[j].0.clone(), all[k].0.clone()];
                    let b = vec![all[i].1.clone(), all[j].1.clone(), all[k].1.clone()];
                    if let Some(x) = solve(&a, &b) {
                        let ok = all.iter().all(|(c, r)| c.iter().zip(&x).map(|(p, q)| p * q).sum::<Rat>() <= *r);
                        if ok {
                            brute.push(x);
                        }
                    }
                }
            }
        }
        brute.sort();
        brute.dedup();
        assert_eq!(dd, brute);
    }
}
