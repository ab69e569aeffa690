//! Symmetric bilinear forms on a three-dimensional space with a flag,
//! classified up to flag-preserving congruence in characteristic two.
//!
//! The flag is given by heights: V_j is spanned by the basis vectors e_i
//! with h_i <= j. A change of basis P (columns are the new vectors) is
//! flag-compatible when P_ij != 0 only if h_i <= h'_j and the height
//! multisets agree.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};
use crate::linalg::{dot, Mat, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CanonTag {
    B1,
    B2,
    B3,
}

impl fmt::Display for CanonTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

pub fn canonical_matrix(tag: CanonTag) -> Mat {
    let z = Fe::ZERO;
    let o = Fe::ONE;
    match tag {
        CanonTag::B1 => Mat::from_rows(&[vec![z, o, z], vec![o, z, z], vec![z, z, o]]),
        CanonTag::B2 => Mat::from_rows(&[vec![z, o, z], vec![o, o, z], vec![z, z, o]]),
        CanonTag::B3 => Mat::identity(3),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinPair {
    heights: [u8; 3],
    b: Mat,
    field: &'static Field,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Canonical {
    pub tag: CanonTag,
    /// Columns are the new basis vectors in old coordinates.
    pub change: Mat,
    pub heights: [u8; 3],
    /// The B2-to-B1 rewrite was applied.
    pub rewritten: bool,
}

fn unit(i: usize) -> Vec<Fe> {
    let mut v = vec![Fe::ZERO; 3];
    v[i] = Fe::ONE;
    v
}

impl BilinPair {
    pub fn new(heights: [u8; 3], b: Mat, field: &'static Field) -> Result<BilinPair> {
        if b.rows != 3 || b.cols != 3 {
            return Err(Error::Input("bilinear form must be 3x3".into()));
        }
        if heights.contains(&0) {
            return Err(Error::Input("heights must be positive".into()));
        }
        if b.data.iter().any(|x| x.0 as usize >= field.order()) {
            return Err(Error::Input("matrix entry outside the field".into()));
        }
        if b != b.transpose() {
            return Err(Error::Input("matrix is not symmetric".into()));
        }
        if b.det(field).is_zero() {
            return Err(Error::Input("form is degenerate".into()));
        }
        if (0..3).all(|i| b.get(i, i).is_zero()) {
            return Err(Error::Input("form is alternating".into()));
        }
        Ok(BilinPair { heights, b, field })
    }

    /// From the upper triangle b11, b12, b13, b22, b23, b33.
    pub fn from_upper(heights: [u8; 3], u: [Fe; 6], field: &'static Field) -> Result<BilinPair> {
        let b = Mat::from_rows(&[vec![u[0], u[1], u[2]], vec![u[1], u[3], u[4]], vec![u[2], u[4], u[5]]]);
        BilinPair::new(heights, b, field)
    }

    pub fn heights(&self) -> [u8; 3] {
        self.heights
    }

    pub fn matrix(&self) -> &Mat {
        &self.b
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    pub fn form(&self, u: &[Fe], v: &[Fe]) -> Fe {
        dot(u, &self.b.mul_vec(v, self.field), self.field)
    }

    /// ℓ(v) = sum √b_ii v_i, so that b(v, v) = ℓ(v)^2.
    pub fn ell(&self, v: &[Fe]) -> Fe {
        let f = self.field;
        let mut s = Fe::ZERO;
        for i in 0..3 {
            s += f.mul(f.sqrt(self.b.get(i, i)), v[i]);
        }
        s
    }

    fn ell_row(&self) -> Vec<Fe> {
        (0..3).map(|i| self.field.sqrt(self.b.get(i, i))).collect()
    }

    /// V^0 = { v : b(v, v) = 0 } = ker ℓ.
    pub fn isotropic_hyperplane(&self) -> Subspace {
        let m = Mat::from_rows(&[self.ell_row()]);
        Subspace::span(3, &m.nullspace(self.field), self.field)
    }

    /// The c with b(c, v) = ℓ(v) for all v; V^1 = ⟨c⟩ and b(c, c) = 1.
    pub fn characteristic_vector(&self) -> Vec<Fe> {
        let inv = self.b.inverse(self.field).expect("nondegenerate");
        inv.mul_vec(&self.ell_row(), self.field)
    }

    pub fn flag_space(&self, j: u8) -> Subspace {
        let vs: Vec<Vec<Fe>> = (0..3).filter(|&i| self.heights[i] <= j).map(unit).collect();
        Subspace::span(3, &vs, self.field)
    }

    pub fn perp(&self, s: &Subspace) -> Subspace {
        if s.dim() == 0 {
            return Subspace::full(3);
        }
        let rows: Vec<Vec<Fe>> = s.basis().iter().map(|v| self.b.mul_vec(v, self.field)).collect();
        Subspace::span(3, &Mat::from_rows(&rows).nullspace(self.field), self.field)
    }

    pub fn height_of(&self, v: &[Fe]) -> u8 {
        (0..3).filter(|&i| !v[i].is_zero()).map(|i| self.heights[i]).max().unwrap_or(0)
    }

    fn normalize(&self, v: &[Fe]) -> Vec<Fe> {
        let f = self.field;
        let inv = f.inv(self.ell(v)).expect("ℓ(v) != 0");
        v.iter().map(|x| f.mul(*x, inv)).collect()
    }

    fn first_with_nonzero_ell(&self, s: &Subspace) -> Option<Vec<Fe>> {
        s.basis().iter().find(|v| !self.ell(v).is_zero()).cloned()
    }

    /// Orthonormal basis with v3 outside ⟨c⟩, used when every height is equal.
    fn orthonormal(&self) -> Result<[Vec<Fe>; 3]> {
        let f = self.field;
        let c = self.characteristic_vector();
        let cs = Subspace::span(3, &[c], f);
        let mut cands: Vec<Vec<Fe>> = (0..3).map(unit).collect();
        for i in 0..3 {
            for j in i + 1..3 {
                let mut v = unit(i);
                v[j] = Fe::ONE;
                cands.push(v);
            }
        }
        let v = cands
            .into_iter()
            .find(|v| !self.ell(v).is_zero() && !cs.contains(v, f))
            .ok_or_else(|| Error::Internal("no vector off the characteristic line".into()))?;
        let v = self.normalize(&v);
        let plane = self.perp(&Subspace::span(3, std::slice::from_ref(&v), f));
        let (u, w) = self.plane_orthonormal(&plane)?;
        Ok([u, w, v])
    }

    fn plane_orthonormal(&self, plane: &Subspace) -> Result<(Vec<Fe>, Vec<Fe>)> {
        let f = self.field;
        let a = &plane.basis()[0];
        let b = &plane.basis()[1];
        let mut ab = a.clone();
        for (x, y) in ab.iter_mut().zip(b) {
            *x += *y;
        }
        let u = [a.clone(), b.clone(), ab]
            .into_iter()
            .find(|v| !self.ell(v).is_zero())
            .ok_or_else(|| Error::Internal("plane is alternating".into()))?;
        let u = self.normalize(&u);
        let wsp = plane.intersect(&self.perp(&Subspace::span(3, std::slice::from_ref(&u), f)), f);
        let w = self.normalize(&wsp.basis()[0]);
        Ok((u, w))
    }

    pub fn canonicalize(&self) -> Result<Canonical> {
        let f = self.field;
        let h = self.heights;
        let (tag, basis) = if h[0] == h[1] && h[1] == h[2] {
            (CanonTag::B3, self.orthonormal()?)
        } else {
            let mut s = h.to_vec();
            s.sort_unstable();
            let (m1, m2) = (s[0], s[1]);
            let w1 = self.flag_space(m1);
            let w2 = self.flag_space(m2).intersect(&self.perp(&w1), f);
            let w3 = self.perp(&self.flag_space(m2));
            let v = [w1, w2, w3]
                .iter()
                .find_map(|w| self.first_with_nonzero_ell(w))
                .ok_or_else(|| Error::Internal("ℓ vanishes on every piece".into()))?;
            let v = self.normalize(&v);
            let plane = self.perp(&Subspace::span(3, std::slice::from_ref(&v), f));
            let (tag, u, w) = self.plane_canonical(&plane)?;
            (tag, [u, w, v])
        };
        let mut change = Mat::from_cols(&basis);
        let mut heights = [self.height_of(&basis[0]), self.height_of(&basis[1]), self.height_of(&basis[2])];
        let mut tag = tag;
        let mut rewritten = false;
        if tag == CanonTag::B2 && heights[0] <= heights[2] && heights[2] <= heights[1] {
            let [u, w, v] = basis;
            let add = |a: &[Fe], b: &[Fe]| -> Vec<Fe> { a.iter().zip(b).map(|(x, y)| *x + *y).collect() };
            let nb = [u.clone(), add(&w, &v), add(&v, &u)];
            heights = [self.height_of(&nb[0]), self.height_of(&nb[1]), self.height_of(&nb[2])];
            change = Mat::from_cols(&nb);
            tag = CanonTag::B1;
            rewritten = true;
        }
        let out = Canonical { tag, change, heights, rewritten };
        self.verify(&out)?;
        Ok(out)
    }

    fn plane_canonical(&self, plane: &Subspace) -> Result<(CanonTag, Vec<Fe>, Vec<Fe>)> {
        let f = self.field;
        let mut levels: Vec<u8> = self.heights.to_vec();
        levels.sort_unstable();
        levels.dedup();
        let line = levels
            .iter()
            .map(|&j| self.flag_space(j).intersect(plane, f))
            .find(|s| s.dim() >= 1)
            .expect("the whole space is a flag level");
        let alternating = plane.basis().iter().all(|v| self.ell(v).is_zero());
        if line.dim() == 2 {
            if alternating {
                let a = plane.basis()[0].clone();
                let b = &plane.basis()[1];
                let c = f.inv(self.form(&a, b))?;
                return Ok((CanonTag::B1, a, b.iter().map(|x| f.mul(*x, c)).collect()));
            }
            let (u, w) = self.plane_orthonormal(plane)?;
            return Ok((CanonTag::B3, u, w));
        }
        let u0 = line.basis()[0].clone();
        let w0 = plane
            .basis()
            .iter()
            .find(|v| !line.contains(v, f))
            .cloned()
            .ok_or_else(|| Error::Internal("plane equals its line".into()))?;
        if alternating {
            let c = f.inv(self.form(&u0, &w0))?;
            return Ok((CanonTag::B1, u0, w0.iter().map(|x| f.mul(*x, c)).collect()));
        }
        if !self.ell(&u0).is_zero() {
            let (u, w) = {
                let u = self.normalize(&u0);
                let wsp = plane.intersect(&self.perp(&Subspace::span(3, std::slice::from_ref(&u), f)), f);
                let w = self.normalize(&wsp.basis()[0]);
                (u, w)
            };
            return Ok((CanonTag::B3, u, w));
        }
        // isotropic line in a non-alternating plane: matrix [[0,1],[1,1]]
        let lw = self.ell(&w0);
        let beta = f.inv(lw)?;
        let alpha = f.div(lw, self.form(&u0, &w0))?;
        let u = u0.iter().map(|x| f.mul(*x, alpha)).collect();
        let w = w0.iter().map(|x| f.mul(*x, beta)).collect();
        Ok((CanonTag::B2, u, w))
    }

    fn verify(&self, c: &Canonical) -> Result<()> {
        let f = self.field;
        let pt = c.change.transpose();
        let img = pt.mul(&self.b, f).mul(&c.change, f);
        if img != canonical_matrix(c.tag) {
            return Err(Error::Internal(format!("canonical form check failed for {:?}", c.tag)));
        }
        if !is_flag_compatible(&c.change, &self.heights, &c.heights, f) {
            return Err(Error::Internal("canonicalizing basis is not flag-compatible".into()));
        }
        if c.tag == CanonTag::B2 && !(c.heights[0] < c.heights[1] && !(c.heights[0]..=c.heights[1]).contains(&c.heights[2])) {
            return Err(Error::Internal("B2 outside its height convention".into()));
        }
        Ok(())
    }

    /// n_r = dim(V_{s_r} ∩ V_{s_{r-1}}^⊥) - dim(V_{s_r} ∩ V_{s_{r-1}}^⊥ ∩ V^0), padded to three entries.
    pub fn n_invariants(&self) -> [usize; 3] {
        let f = self.field;
        let mut levels: Vec<u8> = self.heights.to_vec();
        levels.sort_unstable();
        levels.dedup();
        let v0 = self.isotropic_hyperplane();
        let mut out = [0usize; 3];
        let mut prev = Subspace::zero(3);
        for (r, &s) in levels.iter().enumerate() {
            let cur = self.flag_space(s);
            let piece = cur.intersect(&self.perp(&prev), f);
            out[r] = piece.dim() - piece.intersect(&v0, f).dim();
            prev = cur;
        }
        out
    }
}

pub fn is_flag_compatible(p: &Mat, h: &[u8; 3], h_new: &[u8; 3], f: &Field) -> bool {
    let mut a = *h;
    let mut b = *h_new;
    a.sort_unstable();
    b.sort_unstable();
    if a != b || p.det(f).is_zero() {
        return false;
    }
    (0..3).all(|i| (0..3).all(|j| p.get(i, j).is_zero() || h[i] <= h_new[j]))
}

/// Equivalence read off canonical data: B1 by {m1, m2} and m3, B2 by the
/// ordered heights, B3 by the height multiset.
pub fn pairs_equivalent(a: &Canonical, b: &Canonical) -> bool {
    if a.tag != b.tag {
        return false;
    }
    let (x, y) = (a.heights, b.heights);
    match a.tag {
        CanonTag::B1 => {
            let mut p = [x[0], x[1]];
            let mut q = [y[0], y[1]];
            p.sort_unstable();
            q.sort_unstable();
            p == q && x[2] == y[2]
        }
        CanonTag::B2 => x == y,
        CanonTag::B3 => {
            let mut p = x;
            let mut q = y;
            p.sort_unstable();
            q.sort_unstable();
            p == q
        }
    }
}

static INVERTIBLE: [OnceLock<Vec<Mat>>; 2] = [OnceLock::new(), OnceLock::new()];

/// Every invertible 3x3 matrix over GF(2) or GF(4).
pub fn invertible_matrices(f: &'static Field) -> Result<&'static [Mat]> {
    if f.k() > 2 {
        return Err(Error::Bound("brute-force congruence is limited to GF(2) and GF(4)".into()));
    }
    let slot = &INVERTIBLE[(f.k() - 1) as usize];
    Ok(slot.get_or_init(|| {
        let q = f.order() as u64;
        let total = q.pow(9);
        (0..total)
            .into_par_iter()
            .filter_map(|mut code| {
                let mut m = Mat::zeros(3, 3);
                for e in m.data.iter_mut() {
                    *e = Fe((code % q) as u16);
                    code /= q;
                }
                (!m.det(f).is_zero()).then_some(m)
            })
            .collect()
    }))
}

/// Search for a flag-compatible P with P^T B P = B'.
pub fn brute_force_equivalent(a: &BilinPair, b: &BilinPair) -> Result<bool> {
    if a.field != b.field {
        return Err(Error::FieldMismatch(a.field.k(), b.field.k()));
    }
    let f = a.field;
    let mut ha = a.heights;
    let mut hb = b.heights;
    ha.sort_unstable();
    hb.sort_unstable();
    if ha != hb {
        return Ok(false);
    }
    let mats = invertible_matrices(f)?;
    Ok(mats.par_iter().any(|p| {
        (0..3).all(|i| (0..3).all(|j| p.get(i, j).is_zero() || a.heights[i] <= b.heights[j]))
            && p.transpose().mul(&a.b, f).mul(p, f) == b.b
    }))
}

/// Orbit of (h, B) under all flag-compatible changes to every admissible h'.
pub fn brute_force_orbit(a: &BilinPair) -> Result<BTreeSet<([u8; 3], Vec<u16>)>> {
    let f = a.field;
    let mats = invertible_matrices(f)?;
    let h = a.heights;
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let targets: BTreeSet<[u8; 3]> = perms.iter().map(|p| [h[p[0]], h[p[1]], h[p[2]]]).collect();
    let mut out = BTreeSet::new();
    for t in targets {
        for p in mats {
            if (0..3).all(|i| (0..3).all(|j| p.get(i, j).is_zero() || h[i] <= t[j])) {
                let img = p.transpose().mul(&a.b, f).mul(p, f);
                out.insert((t, img.data.iter().map(|x| x.0).collect()));
            }
        }
    }
    Ok(out)
}
