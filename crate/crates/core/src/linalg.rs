//! Dense linear algebra over GF(2^k), with a packed path for GF(2).

use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Fe>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Fe>]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn from_cols(cols: &[Vec<Fe>]) -> Mat {
        Mat::from_rows(cols).transpose()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Fe> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat, f: &Field) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut r = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        r.data[i * other.cols + j] += f.mul(a, b);
                    }
                }
            }
        }
        r
    }

    pub fn mul_vec(&self, v: &[Fe], f: &Field) -> Vec<Fe> {
        (0..self.rows)
            .map(|i| {
                let mut s = Fe::ZERO;
                for (j, x) in v.iter().enumerate() {
                    s += f.mul(self.get(i, j), *x);
                }
                s
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self, f: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else { continue };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self.get(r, c)).unwrap();
            for j in 0..self.cols {
                let v = self.get(r, j);
                self.set(r, j, f.mul(v, inv));
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let v = self.get(r, j);
                    if !v.is_zero() {
                        self.data[i * self.cols + j] += f.mul(factor, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &Field) -> usize {
        if f.k() == 1 && self.cols <= 64 {
            return rank_packed(&self.pack_rows());
        }
        self.clone().rref(f).len()
    }

    /// Rows as u64 bit masks; only meaningful over GF(2) with cols <= 64.
    pub fn pack_rows(&self) -> Vec<u64> {
        (0..self.rows)
            .map(|i| {
                let mut w = 0u64;
                for j in 0..self.cols {
                    if !self.get(i, j).is_zero() {
                        w |= 1 << j;
                    }
                }
                w
            })
            .collect()
    }

    /// Basis of the right kernel {v : M v = 0}.
    pub fn nullspace(&self, f: &Field) -> Vec<Vec<Fe>> {
        let mut m = self.clone();
        let pivots = m.rref(f);
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![Fe::ZERO; self.cols];
            v[free] = Fe::ONE;
            for (r, &p) in pivots.iter().enumerate() {
                // char 2: -a = a
                v[p] = m.get(r, free);
            }
            out.push(v);
        }
        out
    }

    pub fn inverse(&self, f: &Field) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::Precondition("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, Fe::ONE);
        }
        let piv = aug.rref(f);
        if piv.len() < n || piv[n - 1] != n - 1 {
            return Err(Error::Precondition("matrix is singular".into()));
        }
        let mut inv = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j));
            }
        }
        Ok(inv)
    }

    pub fn det(&self, f: &Field) -> Fe {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Fe::ONE;
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else { return Fe::ZERO };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
            }
            let pv = m.get(c, c);
            det = f.mul(det, pv);
            let inv = f.inv(pv).unwrap();
            for i in c + 1..n {
                let factor = f.mul(m.get(i, c), inv);
                if factor.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = m.get(c, j);
                    m.data[i * n + j] += f.mul(factor, v);
                }
            }
        }
        det
    }
}

/// Rank of GF(2) rows packed into u64 words.
pub fn rank_packed(rows: &[u64]) -> usize {
    let mut basis: [u64; 64] = [0; 64];
    let mut rank = 0;
    for &r in rows {
        let mut v = r;
        while v != 0 {
            let top = 63 - v.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = v;
                rank += 1;
                break;
            }
            v ^= basis[top];
        }
    }
    rank
}

/// A subspace of F^d kept in reduced echelon form.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub ambient: usize,
    rows: Vec<Vec<Fe>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Subspace {
        Subspace { ambient, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Subspace {
        let mut s = Subspace::zero(ambient);
        for i in 0..ambient {
            let mut v = vec![Fe::ZERO; ambient];
            v[i] = Fe::ONE;
            s.rows.push(v);
            s.pivots.push(i);
        }
        s
    }

    pub fn span(ambient: usize, vs: &[Vec<Fe>], f: &Field) -> Subspace {
        let mut s = Subspace::zero(ambient);
        for v in vs {
            s.insert(v.clone(), f);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<Fe>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn reduce(&self, v: &mut [Fe], f: &Field) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if c.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x += f.mul(c, *y);
                }
            }
        }
    }

    pub fn contains(&self, v: &[Fe], f: &Field) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w, f);
        w.iter().all(|x| x.is_zero())
    }

    /// Adds v to the span; true if the dimension grew.
    pub fn insert(&mut self, mut v: Vec<Fe>, f: &Field) -> bool {
        self.reduce(&mut v, f);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else { return false };
        let inv = f.inv(v[p]).unwrap();
        for x in v.iter_mut() {
            *x = f.mul(*x, inv);
        }
        for row in self.rows.iter_mut() {
            let c = row[p];
            if c.is_zero() {
                continue;
            }
            for (x, y) in row.iter_mut().zip(&v) {
                if !y.is_zero() {
                    *x += f.mul(c, *y);
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, v);
        true
    }

    /// Coordinates of v in the echelon basis, if v lies in the span.
    pub fn coordinates(&self, v: &[Fe], f: &Field) -> Option<Vec<Fe>> {
        let coords: Vec<Fe> = self.pivots.iter().map(|&p| v[p]).collect();
        let mut w = v.to_vec();
        for (row, c) in self.rows.iter().zip(&coords) {
            for (x, y) in w.iter_mut().zip(row) {
                *x += f.mul(*c, *y);
            }
        }
        w.iter().all(|x| x.is_zero()).then_some(coords)
    }

    pub fn intersect(&self, other: &Subspace, f: &Field) -> Subspace {
        // solve sum a_i s_i = sum b_j t_j
        let d = self.ambient;
        let k = self.dim() + other.dim();
        if k == 0 {
            return Subspace::zero(d);
        }
        let mut m = Mat::zeros(d, k);
        for (j, v) in self.rows.iter().chain(other.rows.iter()).enumerate() {
            for i in 0..d {
                m.set(i, j, v[i]);
            }
        }
        let mut out = Subspace::zero(d);
        for sol in m.nullspace(f) {
            let mut v = vec![Fe::ZERO; d];
            for (a, row) in sol.iter().zip(&self.rows) {
                for (x, y) in v.iter_mut().zip(row) {
                    *x += f.mul(*a, *y);
                }
            }
            out.insert(v, f);
        }
        out
    }

    pub fn sum(&self, other: &Subspace, f: &Field) -> Subspace {
        let mut s = self.clone();
        for v in &other.rows {
            s.insert(v.clone(), f);
        }
        s
    }

    pub fn same_as(&self, other: &Subspace) -> bool {
        self.ambient == other.ambient && self.rows == other.rows
    }
}

pub fn dot(a: &[Fe], b: &[Fe], f: &Field) -> Fe {
    let mut s = Fe::ZERO;
    for (x, y) in a.iter().zip(b) {
        s += f.mul(*x, *y);
    }
    s
}

pub fn axpy(y: &mut [Fe], a: Fe, x: &[Fe], f: &Field) {
    if a.is_zero() {
        return;
    }
    for (u, v) in y.iter_mut().zip(x) {
        if !v.is_zero() {
            *u += f.mul(a, *v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip_gf4() {
        let f = Field::get(2).unwrap();
        let m = Mat::from_rows(&[
            vec![Fe(1), Fe(2), Fe(0)],
            vec![Fe(3), Fe(1), Fe(1)],
            vec![Fe(0), Fe(2), Fe(3)],
        ]);
        let det = m.det(f);
        assert!(!det.is_zero());
        let inv = m.inverse(f).unwrap();
        assert_eq!(m.mul(&inv, f), Mat::identity(3));
    }

    #[test]
    fn packed_rank_matches_generic() {
        let f = Field::gf2();
        let m = Mat::from_rows(&[
            vec![Fe(1), Fe(1), Fe(0), Fe(1)],
            vec![Fe(0), Fe(1), Fe(1), Fe(0)],
            vec![Fe(1), Fe(0), Fe(1), Fe(1)],
        ]);
        assert_eq!(m.rank(f), 2);
        assert_eq!(m.clone().rref(f).len(), 2);
        for v in m.nullspace(f) {
            assert!(m.mul_vec(&v, f).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn subspace_intersection() {
        let f = Field::gf2();
        let e = |i: usize| {
            let mut v = vec![Fe::ZERO; 3];
            v[i] = Fe::ONE;
            v
        };
        let a = Subspace::span(3, &[e(0), e(1)], f);
        let b = Subspace::span(3, &[e(1), e(2)], f);
        let c = a.intersect(&b, f);
        assert_eq!(c.dim(), 1);
        assert!(c.contains(&e(1), f));
        assert_eq!(a.sum(&b, f).dim(), 3);
    }
}
