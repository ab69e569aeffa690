//! Admissible automorphisms of O(n; m): those that commute with every divided
//! power, equivalently the ones whose images of the x_i keep the flag.
//!
//! An automorphism is stored as a word of generators applied left to right.

use std::collections::BTreeMap;

use crate::divpow::{Heights, Monomial, Poly, Ring};
use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};
use crate::linalg::Mat;
use crate::sforms::{d_poly, SymForm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AutoGen {
    /// x_i -> sum_j m[i][j] x_j, landing in `heights_out` (same heights if None).
    Linear { m: Vec<Vec<Fe>>, heights_out: Option<Heights> },
    /// x_i -> x_i + c x_j^(2^t), needs t + m_i <= m_j. Indices are 0-based.
    AddSub { i: usize, j: usize, t: u32, c: Fe },
    /// x_i -> c_i x_i.
    Scale { c: Vec<Fe> },
    /// x_i -> images[i], each congruent to x_i modulo the square of the maximal ideal.
    Substitution { images: Vec<Poly> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub ok: bool,
    pub reason: String,
    pub target: Option<Heights>,
}

impl Verdict {
    fn fail(reason: impl Into<String>) -> Verdict {
        Verdict { ok: false, reason: reason.into(), target: None }
    }

    fn pass(target: Heights) -> Verdict {
        Verdict { ok: true, reason: String::new(), target: Some(target) }
    }
}

/// Support of an invertible matrix against source and target heights:
/// a_ij != 0 only if h_out_j >= h_i, and the same for the inverse.
fn linear_support_ok(m: &Mat, h: &Heights, h_out: &Heights) -> bool {
    let n = h.n();
    (0..n).all(|i| (0..n).all(|j| m.get(i, j).is_zero() || h_out.get(j) >= h.get(i)))
}

pub fn check_admissible(g: &AutoGen, h: &Heights, field: &'static Field) -> Verdict {
    let n = h.n();
    match g {
        AutoGen::Linear { m, heights_out } => {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Verdict::fail(format!("linear generator needs a {n}x{n} matrix"));
            }
            if m.iter().flatten().any(|c| (c.0 as usize) >= field.order()) {
                return Verdict::fail("matrix entry outside the field");
            }
            let h_out = heights_out.unwrap_or(*h);
            if h_out.n() != n || h_out.sorted_multiset() != h.sorted_multiset() {
                return Verdict::fail("target heights must be a permutation of the source heights");
            }
            let mat = Mat::from_rows(m);
            let Ok(inv) = mat.inverse(field) else { return Verdict::fail("matrix is singular") };
            if !linear_support_ok(&mat, h, &h_out) {
                return Verdict::fail("matrix moves a variable to a lower height");
            }
            if !linear_support_ok(&inv, &h_out, h) {
                return Verdict::fail("inverse matrix moves a variable to a lower height");
            }
            Verdict::pass(h_out)
        }
        AutoGen::AddSub { i, j, t, c } => {
            if *i >= n || *j >= n || i == j {
                return Verdict::fail("add-substitution needs distinct valid indices");
            }
            if (c.0 as usize) >= field.order() {
                return Verdict::fail("coefficient outside the field");
            }
            if *t + h.get(*i) as u32 > h.get(*j) as u32 {
                return Verdict::fail(format!(
                    "x{} -> x{} + c x{}^(2^{t}) needs {t} + m{} <= m{}",
                    i + 1,
                    i + 1,
                    j + 1,
                    i + 1,
                    j + 1
                ));
            }
            Verdict::pass(*h)
        }
        AutoGen::Scale { c } => {
            if c.len() != n {
                return Verdict::fail(format!("scaling needs {n} coefficients"));
            }
            if c.iter().any(|x| x.is_zero() || (x.0 as usize) >= field.order()) {
                return Verdict::fail("scaling coefficients must be nonzero field elements");
            }
            Verdict::pass(*h)
        }
        AutoGen::Substitution { images } => {
            let ring = Ring::new(*h, field);
            if images.len() != n {
                return Verdict::fail(format!("substitution needs {n} images"));
            }
            for (i, p) in images.iter().enumerate() {
                if p.ring() != ring {
                    return Verdict::fail("image lives in another ring");
                }
                if p.has_top_powers() {
                    return Verdict::fail("image contains a top power");
                }
                let lin: Vec<(Monomial, Fe)> =
                    p.terms().filter(|(a, _)| a.degree() <= 1).map(|(a, c)| (*a, *c)).collect();
                if lin != vec![(Monomial::var(i), Fe::ONE)] {
                    return Verdict::fail(format!("image of x{} is not x{} modulo degree 2", i + 1, i + 1));
                }
                let top = h.top(i);
                if let Err(e) = p.divided_power(top - 1) {
                    return Verdict::fail(format!("image of x{}: {e}", i + 1));
                }
                for r in 1..top - 1 {
                    if let Err(e) = p.divided_power(r) {
                        return Verdict::fail(format!("image of x{}: {e}", i + 1));
                    }
                }
                if p.divided_power(top).is_ok() {
                    return Verdict::fail(format!("image of x{} has a defined 2^m-th divided power", i + 1));
                }
            }
            Verdict::pass(*h)
        }
    }
}

impl AutoGen {
    /// Images of the variables in the target ring.
    pub fn images(&self, src: Ring) -> Result<(Vec<Poly>, Ring)> {
        let v = check_admissible(self, &src.heights, src.field);
        if !v.ok {
            return Err(Error::Precondition(v.reason));
        }
        let tgt = Ring::new(v.target.unwrap(), src.field);
        let n = src.n();
        let imgs = match self {
            AutoGen::Linear { m, .. } => (0..n)
                .map(|i| {
                    let terms = (0..n).map(|j| (Monomial::var(j), m[i][j]));
                    Poly::from_terms(tgt, terms)
                })
                .collect::<Result<Vec<_>>>()?,
            AutoGen::AddSub { i, j, t, c } => {
                let mut v: Vec<Poly> = (0..n).map(|k| Poly::var(tgt, k)).collect();
                let extra = Poly::monomial(tgt, Monomial::var_pow(*j, 1 << t), *c)?;
                v[*i] = v[*i].add(&extra)?;
                v
            }
            AutoGen::Scale { c } => (0..n).map(|k| Poly::var(tgt, k).scale(c[k])).collect(),
            AutoGen::Substitution { images } => images.clone(),
        };
        Ok((imgs, tgt))
    }

    pub fn inverse(&self, src: Ring) -> Result<AutoGen> {
        let f = src.field;
        Ok(match self {
            AutoGen::Linear { m, heights_out } => {
                let inv = Mat::from_rows(m).inverse(f)?;
                let rows = (0..inv.rows).map(|i| inv.row(i).to_vec()).collect();
                AutoGen::Linear { m: rows, heights_out: heights_out.map(|_| src.heights) }
            }
            AutoGen::AddSub { .. } => self.clone(),
            AutoGen::Scale { c } => AutoGen::Scale { c: c.iter().map(|x| f.inv(*x)).collect::<Result<_>>()? },
            AutoGen::Substitution { images } => invert_substitution(src, images)?,
        })
    }
}

/// Tables x_i -> σ(x_i)^(r) for r < 2^{m_i}, filled lazily.
struct PowerTables {
    tables: Vec<BTreeMap<u32, Poly>>,
    images: Vec<Poly>,
}

impl PowerTables {
    fn new(images: Vec<Poly>) -> PowerTables {
        PowerTables { tables: vec![BTreeMap::new(); images.len()], images }
    }

    fn get(&mut self, i: usize, r: u32) -> Result<&Poly> {
        if !self.tables[i].contains_key(&r) {
            let p = self.images[i].divided_power(r)?;
            self.tables[i].insert(r, p);
        }
        Ok(&self.tables[i][&r])
    }
}

fn apply_images(images: &[Poly], tgt: Ring, f: &Poly) -> Result<Poly> {
    if f.has_top_powers() {
        return Err(Error::Precondition("automorphisms act on O, not on top powers".into()));
    }
    let mut tables = PowerTables::new(images.to_vec());
    let mut out = Poly::zero(tgt);
    for (a, c) in f.terms() {
        let mut term = Poly::constant(tgt, *c);
        for i in 0..tgt.n() {
            if a.0[i] == 0 {
                continue;
            }
            let p = tables.get(i, a.0[i])?;
            term = term.mul_unchecked(p);
            if term.is_zero() {
                break;
            }
        }
        out.add_assign_unchecked(&term);
    }
    Ok(out)
}

fn invert_substitution(src: Ring, images: &[Poly]) -> Result<AutoGen> {
    let n = src.n();
    let tails: Vec<Poly> = images.iter().enumerate().map(|(i, p)| p.add(&Poly::var(src, i))).collect::<Result<_>>()?;
    // τ_i = x_i + h_i(τ), iterated until stable; degrees climb so this ends
    let mut tau: Vec<Poly> = (0..n).map(|i| Poly::var(src, i)).collect();
    let limit = src.heights.top_monomial().degree() + 2;
    for _ in 0..=limit {
        let next: Vec<Poly> = (0..n)
            .map(|i| apply_images(&tau, src, &tails[i])?.add(&Poly::var(src, i)))
            .collect::<Result<_>>()?;
        if next == tau {
            break;
        }
        tau = next;
    }
    for (i, p) in images.iter().enumerate() {
        if apply_images(&tau, src, p)? != Poly::var(src, i) {
            return Err(Error::Internal("substitution inverse did not converge".into()));
        }
    }
    Ok(AutoGen::Substitution { images: tau })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Admissible {
    source: Ring,
    target: Ring,
    word: Vec<AutoGen>,
}

impl Admissible {
    pub fn identity(ring: Ring) -> Admissible {
        Admissible { source: ring, target: ring, word: Vec::new() }
    }

    pub fn new(source: Ring, word: Vec<AutoGen>) -> Result<Admissible> {
        let mut cur = source;
        for g in &word {
            let v = check_admissible(g, &cur.heights, cur.field);
            if !v.ok {
                return Err(Error::Precondition(v.reason));
            }
            cur = Ring::new(v.target.unwrap(), cur.field);
        }
        Ok(Admissible { source, target: cur, word })
    }

    pub fn single(source: Ring, g: AutoGen) -> Result<Admissible> {
        Admissible::new(source, vec![g])
    }

    pub fn source(&self) -> Ring {
        self.source
    }

    pub fn target(&self) -> Ring {
        self.target
    }

    pub fn word(&self) -> &[AutoGen] {
        &self.word
    }

    pub fn apply_poly(&self, f: &Poly) -> Result<Poly> {
        f.ring().check_same(&self.source)?;
        let mut cur = f.clone();
        let mut ring = self.source;
        for g in &self.word {
            let (imgs, tgt) = g.images(ring)?;
            cur = apply_images(&imgs, tgt, &cur)?;
            ring = tgt;
        }
        Ok(cur)
    }

    /// Push a form forward: g (dx)^(a) -> σ(g) prod (d σ(x_i))^(a_i).
    pub fn apply_form(&self, w: &SymForm) -> Result<SymForm> {
        w.ring().check_same(&self.source)?;
        let mut cur = w.clone();
        let mut ring = self.source;
        for g in &self.word {
            let (imgs, tgt) = g.images(ring)?;
            let dimgs: Vec<SymForm> = imgs.iter().map(d_poly).collect();
            let mut out = SymForm::zero(tgt, cur.degree());
            for (a, coeff) in cur.terms() {
                let mut piece = SymForm::zero(tgt, 0);
                piece.add_term([0; 6], &apply_images(&imgs, tgt, coeff)?)?;
                for (i, &e) in a.iter().enumerate().take(tgt.n()) {
                    if e == 0 {
                        continue;
                    }
                    piece = piece.mul(&dimgs[i].one_form_divided_power(e as usize)?)?;
                }
                out = out.add(&piece)?;
            }
            cur = out;
            ring = tgt;
        }
        Ok(cur)
    }

    /// self after other: apply `other` first.
    pub fn compose(&self, other: &Admissible) -> Result<Admissible> {
        other.target.check_same(&self.source)?;
        let mut word = other.word.clone();
        word.extend(self.word.iter().cloned());
        Ok(Admissible { source: other.source, target: self.target, word })
    }

    pub fn invert(&self) -> Result<Admissible> {
        let mut rings = vec![self.source];
        for g in &self.word {
            let v = check_admissible(g, &rings.last().unwrap().heights, self.source.field);
            rings.push(Ring::new(v.target.unwrap(), self.source.field));
        }
        let mut word = Vec::with_capacity(self.word.len());
        for (k, g) in self.word.iter().enumerate().rev() {
            word.push(g.inverse(rings[k])?);
        }
        Admissible::new(self.target, word)
    }

    /// Matrix of σ on the monomial basis of O; for tests only.
    pub fn matrix(&self) -> Result<Mat> {
        let src = self.source.heights.monomials();
        let tgt = self.target.heights.monomials();
        let index: BTreeMap<Monomial, usize> = tgt.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut m = Mat::zeros(tgt.len(), src.len());
        for (j, a) in src.iter().enumerate() {
            let img = self.apply_poly(&Poly::monomial(self.source, *a, Fe::ONE)?)?;
            for (b, c) in img.terms() {
                m.set(index[b], j, *c);
            }
        }
        Ok(m)
    }
}

/// Divided-power antiderivative in x_i: x^(a) -> x^(a + e_i).
pub fn integrate(f: &Poly, i: usize) -> Result<Poly> {
    let ring = f.ring();
    let mut out = Poly::zero(ring);
    for (a, c) in f.terms() {
        let mut b = *a;
        b.0[i] += 1;
        if !ring.heights.in_range(&b) {
            return Err(Error::Precondition(format!("{a:?} has no antiderivative in x{}", i + 1)));
        }
        out = out.add(&Poly::monomial(ring, b, *c)?)?;
    }
    Ok(out)
}

/// Normal form of ω(0) + c13 x̄1 x3 dx1dx3 + c23 x̄2 x3 dx2dx3 with m3 = 1.
#[derive(Debug, Clone)]
pub struct Elimination {
    pub auto: Admissible,
    /// Residual after the add-substitution alone, before the correction step.
    pub after_addsub: SymForm,
    pub normal_form: SymForm,
    /// Which mixed coefficient survives: (0, 2) means c·x̄1x3 dx1dx3.
    pub surviving: (usize, usize),
    pub coefficient: Fe,
}

pub fn omega4_family(ring: Ring, c13: Fe, c23: Fe) -> Result<SymForm> {
    let h = ring.heights;
    if ring.n() != 3 || h.get(2) != 1 {
        return Err(Error::Precondition("the ω4 family needs three variables and m3 = 1".into()));
    }
    let mut w = crate::sforms::builtin_form(crate::sforms::FormTag::Omega1, ring)?;
    let t1 = Poly::monomial(ring, Monomial::new(&[h.top(0) - 1, 0, 1]), c13)?;
    let t2 = Poly::monomial(ring, Monomial::new(&[0, h.top(1) - 1, 1]), c23)?;
    w.set_mixed(0, 2, &t1)?;
    w.set_mixed(1, 2, &t2)?;
    Ok(w)
}

/// Kill one of the two mixed coefficients of the ω4 family.
///
/// For m1 <= m2 the add-substitution x1 -> x1 + c x2^(2^{m2-m1}) with
/// c^{2^{m1}} = c23/c13 removes c23 but leaves an exact remainder
/// d(x3 H dx3); x3 -> x3 + x3 G with G = H + G^(2) removes that too.
/// For m1 > m2 the roles of x1 and x2 swap and c13 is removed.
pub fn eliminate_mixed(ring: Ring, c13: Fe, c23: Fe) -> Result<Elimination> {
    let f = ring.field;
    let h = ring.heights;
    let w = omega4_family(ring, c13, c23)?;
    if c13.is_zero() || c23.is_zero() {
        return Err(Error::Precondition("both coefficients must be nonzero".into()));
    }
    let (keep, kill, ck, cx) = if h.get(0) <= h.get(1) { (0, 1, c13, c23) } else { (1, 0, c23, c13) };
    let s = (h.get(kill) - h.get(keep)) as u32;
    let c = f.root_2e(f.div(cx, ck)?, h.get(keep) as u32);
    let sub = AutoGen::AddSub { i: keep, j: kill, t: s, c };
    let first = Admissible::single(ring, sub.clone())?;
    let after = first.apply_form(&w)?;
    if !after.mixed(kill, 2).coeff(&Monomial::new(&kill_top(h, kill))).is_zero() {
        return Err(Error::Internal("add-substitution left the targeted coefficient".into()));
    }

    let target = {
        let mut t = crate::sforms::builtin_form(crate::sforms::FormTag::Omega1, ring)?;
        let mut e = [0u32; 3];
        e[keep] = h.top(keep) - 1;
        e[2] = 1;
        t.set_mixed(keep, 2, &Poly::monomial(ring, Monomial::new(&e), ck)?)?;
        t
    };
    let residual = after.add(&target)?;
    if residual.is_zero() {
        return Ok(Elimination { auto: first, after_addsub: after.clone(), normal_form: after, surviving: (keep, 2), coefficient: ck });
    }
    // residual = x3 A dx1dx3 + x3 B dx2dx3 with (A, B) = grad H
    let strip = |p: &Poly| -> Result<Poly> {
        let mut out = Poly::zero(ring);
        for (a, c) in p.terms() {
            if a.0[2] != 1 {
                return Err(Error::Internal("remainder is not divisible by x3".into()));
            }
            let mut b = *a;
            b.0[2] = 0;
            out = out.add(&Poly::monomial(ring, b, *c)?)?;
        }
        Ok(out)
    };
    let a_part = strip(&residual.mixed(0, 2))?;
    let b_part = strip(&residual.mixed(1, 2))?;
    let mut hpot = integrate(&a_part, 0)?;
    let rest = b_part.add(&hpot.partial(1))?;
    hpot = hpot.add(&integrate(&rest, 1)?)?;
    if hpot.partial(0) != a_part || hpot.partial(1) != b_part {
        return Err(Error::Internal("remainder is not a gradient".into()));
    }
    let mut g = hpot.clone();
    for _ in 0..=h.top_monomial().degree() {
        let next = hpot.add(&g.divided_power(2)?)?;
        if next == g {
            break;
        }
        g = next;
    }
    let img3 = Poly::var(ring, 2).add(&Poly::var(ring, 2).mul(&g)?)?;
    let images = vec![Poly::var(ring, 0), Poly::var(ring, 1), img3];
    let auto = Admissible::new(ring, vec![sub, AutoGen::Substitution { images }])?;
    let normal_form = auto.apply_form(&w)?;
    Ok(Elimination { auto, after_addsub: after, normal_form, surviving: (keep, 2), coefficient: ck })
}

/// As `eliminate_mixed`, but always ends on a form without the x̄2x3 dx2dx3 term.
///
/// When m1 > m2 the elimination keeps x̄2, so a swap x1 <-> x2 (with permuted
/// heights) is appended.
pub fn eliminate_to_c23_free(ring: Ring, c13: Fe, c23: Fe) -> Result<Elimination> {
    let e = eliminate_mixed(ring, c13, c23)?;
    if e.surviving.0 == 0 {
        return Ok(e);
    }
    let h = ring.heights;
    let (o, z) = (Fe::ONE, Fe::ZERO);
    let swap = AutoGen::Linear {
        m: vec![vec![z, o, z], vec![o, z, z], vec![z, z, o]],
        heights_out: Some(h.permuted(&[1, 0, 2])?),
    };
    let s = Admissible::single(ring, swap)?;
    let auto = s.compose(&e.auto)?;
    let w = omega4_family(ring, c13, c23)?;
    let normal_form = auto.apply_form(&w)?;
    Ok(Elimination { auto, after_addsub: e.after_addsub, normal_form, surviving: (0, 2), coefficient: e.coefficient })
}

fn kill_top(h: Heights, kill: usize) -> [u32; 3] {
    let mut e = [0u32; 3];
    e[kill] = h.top(kill) - 1;
    e[2] = 1;
    e
}

/// Scale x1 -> x1/c̃, x2 -> c̃ x2 with c̃^{2^{m1}} = c, taking c·x̄1x3 dx1dx3 to ω4's coefficient 1.
pub fn rescale_to_omega4(ring: Ring, c: Fe) -> Result<Admissible> {
    let f = ring.field;
    let ct = f.root_2e(c, ring.heights.get(0) as u32);
    Admissible::single(ring, AutoGen::Scale { c: vec![f.inv(ct)?, ct, Fe::ONE] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sforms::{builtin_form, FormTag};

    fn ring(h: &[u8]) -> Ring {
        Ring::gf2(Heights::new(h).unwrap())
    }

    #[test]
    fn addsub_admissibility() {
        let h = Heights::three(1, 2, 1).unwrap();
        let f = Field::gf2();
        let ok = AutoGen::AddSub { i: 0, j: 1, t: 1, c: Fe::ONE };
        assert!(check_admissible(&ok, &h, f).ok);
        let bad = AutoGen::AddSub { i: 0, j: 1, t: 2, c: Fe::ONE };
        assert!(!check_admissible(&bad, &h, f).ok);
        let down = AutoGen::AddSub { i: 1, j: 0, t: 0, c: Fe::ONE };
        assert!(!check_admissible(&down, &h, f).ok);
    }

    #[test]
    fn swap_needs_target_heights() {
        let h = Heights::three(2, 1, 1).unwrap();
        let f = Field::gf2();
        let p = vec![vec![Fe(0), Fe(1), Fe(0)], vec![Fe(1), Fe(0), Fe(0)], vec![Fe(0), Fe(0), Fe(1)]];
        let same = AutoGen::Linear { m: p.clone(), heights_out: None };
        assert!(!check_admissible(&same, &h, f).ok);
        let swapped = AutoGen::Linear { m: p, heights_out: Some(Heights::three(1, 2, 1).unwrap()) };
        assert!(check_admissible(&swapped, &h, f).ok);
    }

    #[test]
    fn elimination_at_trivial_heights() {
        let r = ring(&[1, 1, 1]);
        let e = eliminate_mixed(r, Fe::ONE, Fe::ONE).unwrap();
        let expected = builtin_form(FormTag::Omega4, r).unwrap();
        assert_eq!(e.normal_form, expected);
        assert_ne!(e.after_addsub, expected);
        assert!(e.after_addsub.mixed(1, 2).coeff(&Monomial::new(&[0, 1, 1])).is_zero());
    }

    #[test]
    fn scaling_omega4() {
        let f = Field::get(2).unwrap();
        let r = Ring::new(Heights::three(1, 1, 1).unwrap(), f);
        let a = Fe(2);
        let s = Admissible::single(r, AutoGen::Scale { c: vec![Fe::ONE, a, f.sqrt(a)] }).unwrap();
        let w = builtin_form(FormTag::Omega4, r).unwrap();
        assert_eq!(s.apply_form(&w).unwrap(), w.scale(a));
    }
}
