//! Dense exact linear algebra over the rationals.

use num::{One, Zero};

use crate::novikov::Q;

/// A dense matrix stored as rows.
pub type Matrix = Vec<Vec<Q>>;

/// Reduced row echelon form; returns the reduced matrix and pivot columns.
pub fn rref(m: &Matrix, cols: usize) -> (Matrix, Vec<usize>) {
    let mut a: Matrix = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= a.len() {
            break;
        }
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = Q::one() / a[row][col].clone();
        for x in a[row].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = a[row].clone();
        for (r, other) in a.iter_mut().enumerate() {
            if r == row || other[col].is_zero() {
                continue;
            }
            let f = other[col].clone();
            for (x, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Rank of a matrix with `cols` columns.
pub fn rank(m: &Matrix, cols: usize) -> usize {
    rref(m, cols).1.len()
}

/// A basis of the null space `{x : m x = 0}`.
pub fn kernel(m: &Matrix, cols: usize) -> Vec<Vec<Q>> {
    let (r, pivots) = rref(m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r[row][f].clone();
            }
            v
        })
        .collect()
}

/// Some solution of `m x = b`, if one exists.
pub fn solve(m: &Matrix, cols: usize, b: &[Q]) -> Option<Vec<Q>> {
    let aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&aug, cols + 1);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = r[row][cols].clone();
    }
    Some(x)
}

/// Whether `v` lies in the span of `vectors` (all of length `dim`).
pub fn in_span(vectors: &[Vec<Q>], v: &[Q], dim: usize) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    // Columns are the spanning vectors.
    let m: Matrix = (0..dim).map(|i| vectors.iter().map(|w| w[i].clone()).collect()).collect();
    solve(&m, vectors.len(), v).is_some()
}

/// Determinant-free invertibility check for a square matrix.
pub fn is_invertible(m: &Matrix) -> bool {
    rank(m, m.len()) == m.len()
}

/// A row-echelon basis grown one vector at a time.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(usize, Vec<Q>)>,
}

impl Echelon {
    pub fn new() -> Self {
        Echelon::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `v` minus its projection along the pivots.
    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut w = v.to_vec();
        for (p, row) in &self.rows {
            if !w[*p].is_zero() {
                let f = w[*p].clone();
                for (x, r) in w.iter_mut().zip(row) {
                    *x -= &f * r;
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Adds `v`; returns whether it was independent of the basis.
    pub fn insert(&mut self, v: &[Q]) -> bool {
        let mut w = self.reduce(v);
        let Some(p) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[p].recip();
        for x in w.iter_mut() {
            *x *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (x, r) in row.iter_mut().zip(&w) {
                    *x -= &f * r;
                }
            }
        }
        self.rows.push((p, w));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::novikov::q_int;

    fn mat(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| q_int(x)).collect()).collect()
    }

    #[test]
    fn echelon_detects_dependence() {
        let mut e = Echelon::new();
        assert!(e.insert(&[q_int(1), q_int(2), q_int(0)]));
        assert!(e.insert(&[q_int(0), q_int(1), q_int(1)]));
        assert!(!e.insert(&[q_int(2), q_int(5), q_int(1)]));
        assert!(e.contains(&[q_int(1), q_int(3), q_int(1)]));
        assert!(!e.contains(&[q_int(0), q_int(0), q_int(1)]));
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn rank_and_kernel() {
        let m = mat(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(rank(&m, 3), 1);
        let k = kernel(&m, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            let s: Q = m[0].iter().zip(v).map(|(a, b)| a * b).sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn solve_and_span() {
        let m = mat(&[&[1, 1], &[1, -1]]);
        let x = solve(&m, 2, &[q_int(3), q_int(1)]).unwrap();
        assert_eq!(x, vec![q_int(2), q_int(1)]);
        let singular = mat(&[&[1, 1], &[1, 1]]);
        assert!(solve(&singular, 2, &[q_int(1), q_int(2)]).is_none());
        assert!(in_span(&[vec![q_int(1), q_int(1)]], &[q_int(2), q_int(2)], 2));
        assert!(!in_span(&[vec![q_int(1), q_int(1)]], &[q_int(1), q_int(2)], 2));
        assert!(is_invertible(&m));
        assert!(!is_invertible(&singular));
    }
}
