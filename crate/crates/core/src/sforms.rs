//! Symmetric differential forms over O(n; m).
//!
//! A k-form is a sum g·(dx)^(a) with |a| = k, where the dx_i generate an
//! untruncated divided-power algebra. So dx_i·dx_i = 2(dx_i)^(2) = 0 and the
//! product (dx)^(a)(dx)^(b) is nonzero exactly when a and b add without carry.

use std::collections::BTreeMap;
use std::fmt;

use crate::divpow::{Derivation, Heights, Monomial, Poly, Ring, MAX_VARS};
use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};
use crate::linalg::Mat;

pub type DxExp = [u8; MAX_VARS];

pub fn dx_single(i: usize) -> DxExp {
    let mut a = [0u8; MAX_VARS];
    a[i] = 1;
    a
}

pub fn dx_square(i: usize) -> DxExp {
    let mut a = [0u8; MAX_VARS];
    a[i] = 2;
    a
}

pub fn dx_pair(i: usize, j: usize) -> DxExp {
    let mut a = [0u8; MAX_VARS];
    a[i] += 1;
    a[j] += 1;
    a
}

fn dx_carry_free(a: &DxExp, b: &DxExp) -> Option<DxExp> {
    let mut c = [0u8; MAX_VARS];
    for i in 0..MAX_VARS {
        if a[i] & b[i] != 0 {
            return None;
        }
        c[i] = a[i] | b[i];
    }
    Some(c)
}

#[derive(Clone, PartialEq, Eq)]
pub struct SymForm {
    ring: Ring,
    degree: usize,
    terms: BTreeMap<DxExp, Poly>,
}

pub type Form1 = SymForm;
pub type Form2 = SymForm;
pub type Form3 = SymForm;

impl fmt::Debug for SymForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (a, g) in &self.terms {
            let mut dx = Vec::new();
            for (i, &e) in a.iter().enumerate() {
                match e {
                    0 => {}
                    1 => dx.push(format!("dx{}", i + 1)),
                    _ => dx.push(format!("dx{}^({e})", i + 1)),
                }
            }
            parts.push(format!("({g:?}){}", dx.join("")));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl SymForm {
    pub fn zero(ring: Ring, degree: usize) -> SymForm {
        SymForm { ring, degree, terms: BTreeMap::new() }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn field(&self) -> &'static Field {
        self.ring.field
    }

    pub fn heights(&self) -> Heights {
        self.ring.heights
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DxExp, &Poly)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, a: DxExp, g: &Poly) -> Result<()> {
        self.ring.check_same(&g.ring())?;
        let deg: usize = a.iter().map(|&e| e as usize).sum();
        if deg != self.degree {
            return Err(Error::Input(format!("dx exponent of degree {deg} in a {}-form", self.degree)));
        }
        if a[self.ring.n()..].iter().any(|&e| e != 0) {
            return Err(Error::Input("dx index beyond the number of variables".into()));
        }
        self.add_term_unchecked(a, g);
        Ok(())
    }

    fn add_term_unchecked(&mut self, a: DxExp, g: &Poly) {
        if g.is_zero() {
            return;
        }
        let slot = self.terms.entry(a).or_insert_with(|| Poly::zero(g.ring()));
        slot.add_assign_unchecked(g);
        if slot.is_zero() {
            self.terms.remove(&a);
        }
    }

    pub fn coeff(&self, a: &DxExp) -> Poly {
        self.terms.get(a).cloned().unwrap_or_else(|| Poly::zero(self.ring))
    }

    pub fn add(&self, other: &SymForm) -> Result<SymForm> {
        self.ring.check_same(&other.ring)?;
        if self.degree != other.degree {
            return Err(Error::Input("adding forms of different degrees".into()));
        }
        let mut r = self.clone();
        for (a, g) in &other.terms {
            r.add_term_unchecked(*a, g);
        }
        Ok(r)
    }

    pub fn scale(&self, c: Fe) -> SymForm {
        let mut r = SymForm::zero(self.ring, self.degree);
        for (a, g) in &self.terms {
            r.add_term_unchecked(*a, &g.scale(c));
        }
        r
    }

    /// Multiply every coefficient by a function.
    pub fn mul_fn(&self, h: &Poly) -> Result<SymForm> {
        let mut r = SymForm::zero(self.ring, self.degree);
        for (a, g) in &self.terms {
            r.add_term_unchecked(*a, &g.mul(h)?);
        }
        Ok(r)
    }

    pub fn mul(&self, other: &SymForm) -> Result<SymForm> {
        self.ring.check_same(&other.ring)?;
        let mut r = SymForm::zero(self.ring, self.degree + other.degree);
        for (a, g) in &self.terms {
            for (b, h) in &other.terms {
                if let Some(c) = dx_carry_free(a, b) {
                    r.add_term_unchecked(c, &g.mul(h)?);
                }
            }
        }
        Ok(r)
    }

    // 1-forms

    pub fn from_components(ring: Ring, comps: &[Poly]) -> Result<Form1> {
        if comps.len() != ring.n() {
            return Err(Error::Input(format!("1-form needs {} components", ring.n())));
        }
        let mut r = SymForm::zero(ring, 1);
        for (i, g) in comps.iter().enumerate() {
            r.add_term(dx_single(i), g)?;
        }
        Ok(r)
    }

    pub fn component(&self, i: usize) -> Poly {
        debug_assert_eq!(self.degree, 1);
        self.coeff(&dx_single(i))
    }

    // 2-forms

    pub fn square(&self, i: usize) -> Poly {
        debug_assert_eq!(self.degree, 2);
        self.coeff(&dx_square(i))
    }

    pub fn mixed(&self, i: usize, j: usize) -> Poly {
        debug_assert_eq!(self.degree, 2);
        self.coeff(&dx_pair(i, j))
    }

    pub fn set_square(&mut self, i: usize, g: &Poly) -> Result<()> {
        self.terms.remove(&dx_square(i));
        self.add_term(dx_square(i), g)
    }

    pub fn set_mixed(&mut self, i: usize, j: usize, g: &Poly) -> Result<()> {
        if i == j {
            return Err(Error::Input("mixed term needs i != j".into()));
        }
        self.terms.remove(&dx_pair(i, j));
        self.add_term(dx_pair(i, j), g)
    }

    /// Gram matrix of coefficient functions, G_ii = ω_ii and G_ij = ω_ij.
    pub fn gram(&self) -> Result<Vec<Vec<Poly>>> {
        if self.degree != 2 {
            return Err(Error::Precondition("Gram matrix of a non-2-form".into()));
        }
        let n = self.ring.n();
        Ok((0..n)
            .map(|i| (0..n).map(|j| if i == j { self.square(i) } else { self.mixed(i, j) }).collect())
            .collect())
    }

    pub fn from_gram(ring: Ring, g: &[Vec<Poly>]) -> Result<Form2> {
        let n = ring.n();
        let mut r = SymForm::zero(ring, 2);
        for i in 0..n {
            r.add_term(dx_square(i), &g[i][i])?;
            for j in i + 1..n {
                if g[i][j] != g[j][i] {
                    return Err(Error::Input("Gram matrix is not symmetric".into()));
                }
                r.add_term(dx_pair(i, j), &g[i][j])?;
            }
        }
        Ok(r)
    }

    /// Gram matrix at the origin, as a scalar matrix.
    pub fn gram_at_zero(&self) -> Result<Mat> {
        let g = self.gram()?;
        let n = self.ring.n();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, g[i][j].constant_term());
            }
        }
        Ok(m)
    }

    pub fn d(&self) -> SymForm {
        let n = self.ring.n();
        let mut r = SymForm::zero(self.ring, self.degree + 1);
        for (a, g) in &self.terms {
            for k in 0..n {
                // dx_k·(dx_k)^(a_k) = (a_k+1)(dx_k)^(a_k+1)
                if a[k] % 2 == 1 {
                    continue;
                }
                let dg = g.partial(k);
                if dg.is_zero() {
                    continue;
                }
                let mut b = *a;
                b[k] += 1;
                r.add_term_unchecked(b, &dg);
            }
        }
        r
    }

    /// θ^(r) for a 1-form θ = sum θ_i dx_i: sum over |a| = r of prod θ_i^{a_i} (dx)^(a).
    pub fn one_form_divided_power(&self, r: usize) -> Result<SymForm> {
        if self.degree != 1 {
            return Err(Error::Precondition("divided power of a non-1-form".into()));
        }
        let n = self.ring.n();
        let comps: Vec<Poly> = (0..n).map(|i| self.component(i)).collect();
        let mut out = SymForm::zero(self.ring, r);
        let mut a = [0u8; MAX_VARS];
        fn rec(
            i: usize,
            left: usize,
            n: usize,
            a: &mut DxExp,
            acc: Poly,
            comps: &[Poly],
            out: &mut SymForm,
        ) {
            if acc.is_zero() {
                return;
            }
            if i == n - 1 {
                a[i] = left as u8;
                let c = acc.mul_unchecked(&comps[i].pow(left as u32));
                out.add_term_unchecked(*a, &c);
                a[i] = 0;
                return;
            }
            for e in 0..=left {
                a[i] = e as u8;
                let c = acc.mul_unchecked(&comps[i].pow(e as u32));
                rec(i + 1, left - e, n, a, c, comps, out);
            }
            a[i] = 0;
        }
        rec(0, r, n, &mut a, Poly::one(self.ring), &comps, &mut out);
        Ok(out)
    }

    pub fn reinterpret(&self, ring: Ring) -> Result<SymForm> {
        let mut r = SymForm::zero(ring, self.degree);
        for (a, g) in &self.terms {
            r.add_term(*a, &g.reinterpret(ring)?)?;
        }
        Ok(r)
    }
}

pub fn d_poly(f: &Poly) -> Form1 {
    let ring = f.ring();
    let mut r = SymForm::zero(ring, 1);
    for i in 0..ring.n() {
        r.add_term_unchecked(dx_single(i), &f.partial(i));
    }
    r
}

pub fn square_of_1form(theta: &Form1) -> Result<Form2> {
    theta.one_form_divided_power(2)
}

#[derive(Debug, Clone)]
pub struct ClosedVerdict {
    pub closed: bool,
    pub residual: Form3,
}

pub fn is_closed(w: &Form2) -> ClosedVerdict {
    let residual = w.d();
    ClosedVerdict { closed: residual.is_zero(), residual }
}

/// Closedness in three variables read off the coefficients directly:
/// every g_i constant and ∂1 g23 + ∂2 g13 + ∂3 g12 = 0.
pub fn is_closed_by_coefficients(w: &Form2) -> Result<bool> {
    if w.ring().n() != 3 {
        return Err(Error::Precondition("coefficient test is for three variables".into()));
    }
    for i in 0..3 {
        let g = w.square(i);
        if g.terms().any(|(a, _)| !a.is_one()) {
            return Ok(false);
        }
    }
    let s = w.mixed(1, 2).partial(0).add(&w.mixed(0, 2).partial(1))?.add(&w.mixed(0, 1).partial(2))?;
    Ok(s.is_zero())
}

pub fn is_nondegenerate(w: &Form2) -> Result<bool> {
    let m = w.gram_at_zero()?;
    Ok(!m.det(w.field()).is_zero())
}

/// ω(D, D) = sum g_i f_i^2, so some g_i != 0 is both necessary and sufficient.
pub fn is_nonalternating(w: &Form2) -> Result<bool> {
    if w.degree() != 2 {
        return Err(Error::Precondition("not a 2-form".into()));
    }
    Ok((0..w.ring().n()).any(|i| !w.square(i).is_zero()))
}

/// u^{-1} for a unit u = c(1 + ν) of the local ring: c^{-1} sum_t ν^t.
pub fn unit_inverse(u: &Poly) -> Result<Poly> {
    let c = u.constant_term();
    let f = u.field();
    let cinv = f.inv(c).map_err(|_| Error::Precondition("inverse of a non-unit".into()))?;
    let nu = u.scale(cinv).without_constant();
    let mut acc = Poly::one(u.ring());
    let mut p = Poly::one(u.ring());
    loop {
        p = p.mul(&nu)?;
        if p.is_zero() {
            break;
        }
        acc = acc.add(&p)?;
    }
    Ok(acc.scale(cinv))
}

/// Inverse of the Gram matrix over O, by Gauss-Jordan with unit pivots.
pub fn gram_inverse(w: &Form2) -> Result<Vec<Vec<Poly>>> {
    if !is_nondegenerate(w)? {
        return Err(Error::Precondition("form is degenerate at the origin".into()));
    }
    let ring = w.ring();
    let n = ring.n();
    let g = w.gram()?;
    let mut a: Vec<Vec<Poly>> = g;
    let mut inv: Vec<Vec<Poly>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Poly::one(ring) } else { Poly::zero(ring) }).collect()).collect();
    for c in 0..n {
        let p = (c..n)
            .find(|&r| !a[r][c].constant_term().is_zero())
            .ok_or_else(|| Error::Internal("no unit pivot in an invertible matrix".into()))?;
        a.swap(p, c);
        inv.swap(p, c);
        let u = unit_inverse(&a[c][c])?;
        for j in 0..n {
            a[c][j] = a[c][j].mul(&u)?;
            inv[c][j] = inv[c][j].mul(&u)?;
        }
        for r in 0..n {
            if r == c || a[r][c].is_zero() {
                continue;
            }
            let factor = a[r][c].clone();
            for j in 0..n {
                let t = factor.mul(&a[c][j])?;
                a[r][j] = a[r][j].add(&t)?;
                let t = factor.mul(&inv[c][j])?;
                inv[r][j] = inv[r][j].add(&t)?;
            }
        }
    }
    Ok(inv)
}

/// ω(D1, D2) for a 2-form.
pub fn eval_form2(w: &Form2, d1: &Derivation, d2: &Derivation) -> Result<Poly> {
    if w.degree() != 2 {
        return Err(Error::Precondition("not a 2-form".into()));
    }
    w.ring().check_same(&d1.ring())?;
    w.ring().check_same(&d2.ring())?;
    let n = w.ring().n();
    let mut r = Poly::zero(w.ring());
    for i in 0..n {
        let g = w.square(i);
        if !g.is_zero() {
            r = r.add(&g.mul(&d1.coeff(i).mul(d2.coeff(i))?)?)?;
        }
        for j in i + 1..n {
            let g = w.mixed(i, j);
            if g.is_zero() {
                continue;
            }
            let s = d1.coeff(i).mul(d2.coeff(j))?.add(&d1.coeff(j).mul(d2.coeff(i))?)?;
            r = r.add(&g.mul(&s)?)?;
        }
    }
    Ok(r)
}

/// L_D ω on basis pairs: D(ω(∂i,∂j)) + ω([D,∂i],∂j) + ω(∂i,[D,∂j]).
pub fn lie_derivative(d: &Derivation, w: &Form2) -> Result<Form2> {
    let ring = w.ring();
    ring.check_same(&d.ring())?;
    let n = ring.n();
    let partials: Vec<Derivation> = (0..n).map(|i| Derivation::partial(ring, i)).collect();
    let brackets: Vec<Derivation> = partials.iter().map(|p| d.commutator(p)).collect::<Result<_>>()?;
    let g = w.gram()?;
    let mut out = vec![vec![Poly::zero(ring); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut v = d.apply(&g[i][j])?;
            v = v.add(&eval_form2(w, &brackets[i], &partials[j])?)?;
            v = v.add(&eval_form2(w, &partials[i], &brackets[j])?)?;
            out[i][j] = v.clone();
            out[j][i] = v;
        }
    }
    SymForm::from_gram(ring, &out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormTag {
    Omega1,
    Omega2,
    Omega3,
    Omega4,
}

impl FormTag {
    pub const ALL: [FormTag; 4] = [FormTag::Omega1, FormTag::Omega2, FormTag::Omega3, FormTag::Omega4];

    pub fn name(self) -> &'static str {
        match self {
            FormTag::Omega1 => "omega1",
            FormTag::Omega2 => "omega2",
            FormTag::Omega3 => "omega3",
            FormTag::Omega4 => "omega4",
        }
    }

    pub fn parse(s: &str) -> Option<FormTag> {
        FormTag::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for FormTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The four standard forms in three variables:
/// ω1 = dx1dx2 + dx3^(2), ω2 = dx1^(2) + dx1dx2 + dx3^(2),
/// ω3 = dx1^(2) + dx2^(2) + dx3^(2), ω4 = ω1 + x-bar1·x3 dx1dx3.
pub fn builtin_form(tag: FormTag, ring: Ring) -> Result<Form2> {
    if ring.n() != 3 {
        return Err(Error::Input("standard forms live in three variables".into()));
    }
    let one = Poly::one(ring);
    let mut w = SymForm::zero(ring, 2);
    match tag {
        FormTag::Omega1 => {
            w.add_term(dx_pair(0, 1), &one)?;
            w.add_term(dx_square(2), &one)?;
        }
        FormTag::Omega2 => {
            w.add_term(dx_square(0), &one)?;
            w.add_term(dx_pair(0, 1), &one)?;
            w.add_term(dx_square(2), &one)?;
        }
        FormTag::Omega3 => {
            for i in 0..3 {
                w.add_term(dx_square(i), &one)?;
            }
        }
        FormTag::Omega4 => {
            w.add_term(dx_pair(0, 1), &one)?;
            w.add_term(dx_square(2), &one)?;
            let h = ring.heights;
            let coeff = Monomial::new(&[h.top(0) - 1, 0, 1]);
            w.add_term(dx_pair(0, 2), &Poly::monomial(ring, coeff, Fe::ONE)?)?;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(h: &[u8]) -> Ring {
        Ring::gf2(Heights::new(h).unwrap())
    }

    #[test]
    fn standard_forms_predicates() {
        let r = ring(&[1, 1, 1]);
        for tag in FormTag::ALL {
            let w = builtin_form(tag, r).unwrap();
            assert!(is_closed(&w).closed, "{tag}");
            assert!(is_nondegenerate(&w).unwrap(), "{tag}");
            assert!(is_nonalternating(&w).unwrap(), "{tag}");
        }
    }

    #[test]
    fn open_form_residual() {
        let r = ring(&[1, 1, 1]);
        let mut w = builtin_form(FormTag::Omega1, r).unwrap();
        w.add_term(dx_pair(1, 2), &Poly::var(r, 0)).unwrap();
        let v = is_closed(&w);
        assert!(!v.closed);
        let mut expected = SymForm::zero(r, 3);
        expected.add_term([1, 1, 1, 0, 0, 0], &Poly::one(r)).unwrap();
        assert_eq!(v.residual, expected);
    }

    #[test]
    fn dx_squares_vanish() {
        let r = ring(&[1, 1, 1]);
        let dx1 = d_poly(&Poly::var(r, 0));
        assert!(dx1.mul(&dx1).unwrap().is_zero());
        let sq = square_of_1form(&dx1).unwrap();
        let mut e = SymForm::zero(r, 2);
        e.add_term(dx_square(0), &Poly::one(r)).unwrap();
        assert_eq!(sq, e);
    }

    #[test]
    fn omega4_gram_inverse() {
        let r = ring(&[2, 1, 1]);
        let w = builtin_form(FormTag::Omega4, r).unwrap();
        let inv = gram_inverse(&w).unwrap();
        let u = Poly::monomial(r, Monomial::new(&[3, 0, 1]), Fe::ONE).unwrap();
        let z = Poly::zero(r);
        let o = Poly::one(r);
        let expected = vec![
            vec![z.clone(), o.clone(), z.clone()],
            vec![o.clone(), z.clone(), u.clone()],
            vec![z.clone(), u, o],
        ];
        assert_eq!(inv, expected);
    }

    #[test]
    fn lie_derivative_example() {
        let r = ring(&[2, 1, 1]);
        let w = builtin_form(FormTag::Omega4, r).unwrap();
        let u = Poly::monomial(r, Monomial::new(&[3, 0, 1]), Fe::ONE).unwrap();
        let d = Derivation::new(r, vec![Poly::zero(r), u, Poly::one(r)]).unwrap();
        assert!(lie_derivative(&d, &w).unwrap().is_zero());
    }
}
