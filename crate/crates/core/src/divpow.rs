//! Truncated divided-power algebra O(n; m) over GF(2^k).
//!
//! Monomials x^(a) carry exponents a_i < 2^{m_i}. The product
//! x^(a) x^(b) = prod C(a_i+b_i, a_i) x^(a+b) is, by Lucas, nonzero mod 2
//! exactly when a_i & b_i == 0 for all i. A polynomial may also hold the
//! top powers x_i^(2^{m_i}); those are only ever differentiated.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};

pub const MAX_VARS: usize = 6;
pub const MAX_HEIGHT: u8 = 12;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Heights {
    n: u8,
    m: [u8; MAX_VARS],
}

impl Heights {
    pub fn new(m: &[u8]) -> Result<Heights> {
        if m.is_empty() || m.len() > MAX_VARS {
            return Err(Error::Input(format!("need 1..={MAX_VARS} heights, got {}", m.len())));
        }
        if let Some(bad) = m.iter().find(|&&h| h == 0 || h > MAX_HEIGHT) {
            return Err(Error::Input(format!("height {bad} outside 1..={MAX_HEIGHT}")));
        }
        let mut arr = [0u8; MAX_VARS];
        arr[..m.len()].copy_from_slice(m);
        Ok(Heights { n: m.len() as u8, m: arr })
    }

    pub fn three(a: u8, b: u8, c: u8) -> Result<Heights> {
        Heights::new(&[a, b, c])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.m[i]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.m[..self.n()]
    }

    pub fn total(&self) -> u32 {
        self.as_slice().iter().map(|&h| h as u32).sum()
    }

    /// 2^{m_i}, one past the largest admissible exponent in variable i.
    #[inline]
    pub fn top(&self, i: usize) -> u32 {
        1u32 << self.m[i]
    }

    pub fn dim_ring(&self) -> usize {
        1usize << self.total()
    }

    pub fn classify(&self, a: &Monomial) -> MonoKind {
        let mut top = false;
        for i in 0..MAX_VARS {
            let e = a.0[i];
            if i >= self.n() {
                if e != 0 {
                    return MonoKind::OutOfRange;
                }
                continue;
            }
            let t = self.top(i);
            if e == t {
                if top {
                    return MonoKind::OutOfRange;
                }
                top = true;
            } else if e > t {
                return MonoKind::OutOfRange;
            }
        }
        if !top {
            return MonoKind::InRange;
        }
        // a top power is only meaningful on its own
        if a.0.iter().filter(|&&e| e != 0).count() == 1 {
            MonoKind::TopPower
        } else {
            MonoKind::OutOfRange
        }
    }

    pub fn in_range(&self, a: &Monomial) -> bool {
        self.classify(a) == MonoKind::InRange
    }

    /// All in-range monomials, ordered by total degree then lexicographically.
    pub fn monomials(&self) -> Vec<Monomial> {
        let mut out = Vec::with_capacity(self.dim_ring());
        let n = self.n();
        let mut cur = [0u32; MAX_VARS];
        loop {
            out.push(Monomial(cur));
            let mut i = 0;
            loop {
                if i == n {
                    out.sort_by(Monomial::graded_cmp);
                    return out;
                }
                cur[i] += 1;
                if cur[i] < self.top(i) {
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }

    /// x-bar, the product of the largest allowed divided powers.
    pub fn top_monomial(&self) -> Monomial {
        let mut a = [0u32; MAX_VARS];
        for (i, e) in a.iter_mut().enumerate().take(self.n()) {
            *e = self.top(i) - 1;
        }
        Monomial(a)
    }

    pub fn top_power(&self, i: usize) -> Monomial {
        Monomial::var_pow(i, self.top(i))
    }

    /// Flag level E_j = { i : m_i > j }.
    pub fn flag_level(&self, j: u8) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.m[i] > j).collect()
    }

    pub fn is_trivial_flag(&self) -> bool {
        self.as_slice().iter().all(|&h| h == self.m[0])
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Heights> {
        let v: Vec<u8> = perm.iter().map(|&p| self.m[p]).collect();
        Heights::new(&v)
    }

    pub fn sorted_multiset(&self) -> Vec<u8> {
        let mut v = self.as_slice().to_vec();
        v.sort_unstable();
        v
    }
}

impl fmt::Debug for Heights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Heights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.as_slice().iter().map(|h| h.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonoKind {
    InRange,
    TopPower,
    OutOfRange,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub [u32; MAX_VARS]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; MAX_VARS]);

    pub fn new(e: &[u32]) -> Monomial {
        let mut a = [0u32; MAX_VARS];
        a[..e.len()].copy_from_slice(e);
        Monomial(a)
    }

    pub fn var(i: usize) -> Monomial {
        Monomial::var_pow(i, 1)
    }

    pub fn var_pow(i: usize, e: u32) -> Monomial {
        let mut a = [0u32; MAX_VARS];
        a[i] = e;
        Monomial(a)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0 == [0; MAX_VARS]
    }

    pub fn graded_cmp(a: &Monomial, b: &Monomial) -> Ordering {
        a.degree().cmp(&b.degree()).then_with(|| a.0.cmp(&b.0))
    }

    /// Product in the untruncated divided-power algebra: None when a carry occurs.
    #[inline]
    pub fn carry_free_mul(&self, other: &Monomial) -> Option<Monomial> {
        let mut c = [0u32; MAX_VARS];
        for i in 0..MAX_VARS {
            if self.0[i] & other.0[i] != 0 {
                return None;
            }
            c[i] = self.0[i] | other.0[i];
        }
        Some(Monomial(c))
    }

    pub fn exps(&self, n: usize) -> &[u32] {
        &self.0[..n]
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("x{}", i + 1)),
                _ => parts.push(format!("x{}^({e})", i + 1)),
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

/// Product of two monomials of O(n; m). Top powers are rejected.
pub fn mono_mul(a: &Monomial, b: &Monomial, h: &Heights) -> Result<Option<Monomial>> {
    for x in [a, b] {
        match h.classify(x) {
            MonoKind::InRange => {}
            MonoKind::TopPower => {
                return Err(Error::Precondition(format!("top power {x:?} cannot be multiplied")))
            }
            MonoKind::OutOfRange => return Err(Error::Input(format!("{x:?} outside heights {h}"))),
        }
    }
    // carry-free sums of in-range exponents stay in range
    Ok(a.carry_free_mul(b))
}

/// 2-adic valuation of n!, by Legendre.
#[inline]
pub fn v2_factorial(n: u64) -> u64 {
    n - n.count_ones() as u64
}

/// Parity of the coefficient of x^(r a) in (x^(a))^(r), i.e. of
/// prod_i (r a_i)! / (r! prod_i (a_i!)^r).
pub fn divided_power_parity(a: &Monomial, r: u32) -> bool {
    if r == 0 {
        return true;
    }
    let r = r as u64;
    let mut num = 0u64;
    let mut den = v2_factorial(r);
    for &e in &a.0 {
        let e = e as u64;
        num += v2_factorial(r * e);
        den += r * v2_factorial(e);
    }
    num == den
}

/// Scalars and heights shared by a family of polynomials.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Ring {
    pub heights: Heights,
    pub field: &'static Field,
}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "O{} over GF(2^{})", self.heights, self.field.k())
    }
}

impl Ring {
    pub fn new(heights: Heights, field: &'static Field) -> Ring {
        Ring { heights, field }
    }

    pub fn gf2(heights: Heights) -> Ring {
        Ring { heights, field: Field::gf2() }
    }

    pub fn n(&self) -> usize {
        self.heights.n()
    }

    pub fn check_same(&self, other: &Ring) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.k(), other.field.k()));
        }
        if self.heights != other.heights {
            return Err(Error::HeightMismatch(self.heights.to_string(), other.heights.to_string()));
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    ring: Ring,
    terms: BTreeMap<Monomial, Fe>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| if *c == Fe::ONE { format!("{m:?}") } else { format!("{c}·{m:?}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Poly {
    pub fn zero(ring: Ring) -> Poly {
        Poly { ring, terms: BTreeMap::new() }
    }

    pub fn constant(ring: Ring, c: Fe) -> Poly {
        let mut p = Poly::zero(ring);
        p.add_term_unchecked(Monomial::ONE, c);
        p
    }

    pub fn one(ring: Ring) -> Poly {
        Poly::constant(ring, Fe::ONE)
    }

    pub fn var(ring: Ring, i: usize) -> Poly {
        Poly::monomial(ring, Monomial::var(i), Fe::ONE).expect("x_i is in range")
    }

    /// c·x^(a); the exponent may be in range or a single top power.
    pub fn monomial(ring: Ring, a: Monomial, c: Fe) -> Result<Poly> {
        if ring.heights.classify(&a) == MonoKind::OutOfRange {
            return Err(Error::Input(format!("{a:?} outside heights {}", ring.heights)));
        }
        let mut p = Poly::zero(ring);
        p.add_term_unchecked(a, c);
        Ok(p)
    }

    pub fn from_terms(ring: Ring, terms: impl IntoIterator<Item = (Monomial, Fe)>) -> Result<Poly> {
        let mut p = Poly::zero(ring);
        for (a, c) in terms {
            if ring.heights.classify(&a) == MonoKind::OutOfRange {
                return Err(Error::Input(format!("{a:?} outside heights {}", ring.heights)));
            }
            p.add_term_unchecked(a, c);
        }
        Ok(p)
    }

    #[inline]
    pub(crate) fn add_term_unchecked(&mut self, a: Monomial, c: Fe) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(a).or_insert(Fe::ZERO);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&a);
        }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn heights(&self) -> Heights {
        self.ring.heights
    }

    pub fn field(&self) -> &'static Field {
        self.ring.field
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Fe)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, a: &Monomial) -> Fe {
        self.terms.get(a).copied().unwrap_or(Fe::ZERO)
    }

    pub fn constant_term(&self) -> Fe {
        self.coeff(&Monomial::ONE)
    }

    pub fn has_top_powers(&self) -> bool {
        self.terms.keys().any(|a| self.ring.heights.classify(a) == MonoKind::TopPower)
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.degree()).min()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.degree()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.min_degree() == self.max_degree()
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.ring.check_same(&other.ring)?;
        let mut r = self.clone();
        r.add_assign_unchecked(other);
        Ok(r)
    }

    pub(crate) fn add_assign_unchecked(&mut self, other: &Poly) {
        for (a, c) in &other.terms {
            self.add_term_unchecked(*a, *c);
        }
    }

    pub fn scale(&self, c: Fe) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.ring);
        }
        let f = self.ring.field;
        Poly { ring: self.ring, terms: self.terms.iter().map(|(a, x)| (*a, f.mul(*x, c))).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        self.ring.check_same(&other.ring)?;
        if self.has_top_powers() || other.has_top_powers() {
            return Err(Error::Precondition("top powers cannot be multiplied".into()));
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Poly) -> Poly {
        let f = self.ring.field;
        let mut r = Poly::zero(self.ring);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if let Some(c) = a.carry_free_mul(b) {
                    r.add_term_unchecked(c, f.mul(*x, *y));
                }
            }
        }
        r
    }

    /// ∂_i x^(a) = x^(a - e_i); top powers are allowed here.
    pub fn partial(&self, i: usize) -> Poly {
        let mut r = Poly::zero(self.ring);
        for (a, c) in &self.terms {
            if a.0[i] > 0 {
                let mut b = *a;
                b.0[i] -= 1;
                r.add_term_unchecked(b, *c);
            }
        }
        r
    }

    pub fn without_constant(&self) -> Poly {
        let mut r = self.clone();
        r.terms.remove(&Monomial::ONE);
        r
    }

    /// Lowest-degree homogeneous part.
    pub fn lambda_part(&self) -> Result<Poly> {
        let d = self.min_degree().ok_or_else(|| Error::Precondition("λ(0) is undefined".into()))?;
        Ok(self.homogeneous_part(d))
    }

    pub fn homogeneous_part(&self, d: u32) -> Poly {
        Poly {
            ring: self.ring,
            terms: self.terms.iter().filter(|(a, _)| a.degree() == d).map(|(a, c)| (*a, *c)).collect(),
        }
    }

    /// f^(r) for f in the maximal ideal, computed in the untruncated
    /// divided-power algebra one term at a time: (u+v)^(r) = sum u^(s) v^(r-s).
    pub fn divided_power(&self, r: u32) -> Result<Poly> {
        if r == 0 {
            return Ok(Poly::one(self.ring));
        }
        if !self.constant_term().is_zero() {
            return Err(Error::Precondition("divided powers need a zero constant term".into()));
        }
        if self.has_top_powers() {
            return Err(Error::Precondition("divided powers of top powers are not formed".into()));
        }
        if r > 1 << 16 {
            return Err(Error::Bound(format!("divided power order {r} too large")));
        }
        let f = self.ring.field;
        let r = r as usize;
        let mut acc: Vec<BTreeMap<Monomial, Fe>> = vec![BTreeMap::new(); r + 1];
        acc[0].insert(Monomial::ONE, Fe::ONE);
        for (a, c) in &self.terms {
            // t^(s) for s = 0..=r; higher s vanish once the parity does for good
            let mut tp: Vec<Option<(Monomial, Fe)>> = Vec::with_capacity(r + 1);
            for s in 0..=r {
                let mut e = [0u32; MAX_VARS];
                for i in 0..MAX_VARS {
                    e[i] = a.0[i] * s as u32;
                }
                tp.push(divided_power_parity(a, s as u32).then(|| (Monomial(e), f.pow(*c, s as u64))));
            }
            let mut next: Vec<BTreeMap<Monomial, Fe>> = vec![BTreeMap::new(); r + 1];
            for (k, slot) in next.iter_mut().enumerate() {
                for s in 0..=k {
                    let Some((ts, cs)) = tp[s] else { continue };
                    for (b, y) in &acc[k - s] {
                        if let Some(m) = ts.carry_free_mul(b) {
                            let e = slot.entry(m).or_insert(Fe::ZERO);
                            *e += f.mul(cs, *y);
                        }
                    }
                }
                slot.retain(|_, v| !v.is_zero());
            }
            acc = next;
        }
        let mut out = Poly::zero(self.ring);
        for (m, c) in std::mem::take(&mut acc[r]) {
            if !self.ring.heights.in_range(&m) {
                return Err(Error::UndefinedDividedPower { r: r as u32, what: format!("{self:?}") });
            }
            out.add_term_unchecked(m, c);
        }
        Ok(out)
    }

    /// Ordinary power f^e, by repeated multiplication.
    pub fn pow(&self, e: u32) -> Poly {
        let mut r = Poly::one(self.ring);
        for _ in 0..e {
            r = r.mul_unchecked(self);
        }
        r
    }

    /// Relabel into another ring with the same field; every term must fit.
    pub fn reinterpret(&self, ring: Ring) -> Result<Poly> {
        if ring.field != self.ring.field {
            return Err(Error::FieldMismatch(self.ring.field.k(), ring.field.k()));
        }
        Poly::from_terms(ring, self.terms.iter().map(|(a, c)| (*a, *c)))
    }
}

/// A derivation sum f_i ∂_i of O(n; m), i.e. an element of W(n).
#[derive(Clone, PartialEq, Eq)]
pub struct Derivation {
    ring: Ring,
    coeffs: Vec<Poly>,
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| format!("({p:?})∂{}", i + 1))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl Derivation {
    pub fn new(ring: Ring, coeffs: Vec<Poly>) -> Result<Derivation> {
        if coeffs.len() != ring.n() {
            return Err(Error::Input(format!("derivation needs {} coefficients", ring.n())));
        }
        for c in &coeffs {
            c.ring.check_same(&ring)?;
            if c.has_top_powers() {
                return Err(Error::Precondition("derivation coefficients must lie in O".into()));
            }
        }
        Ok(Derivation { ring, coeffs })
    }

    pub fn zero(ring: Ring) -> Derivation {
        Derivation { ring, coeffs: vec![Poly::zero(ring); ring.n()] }
    }

    pub fn partial(ring: Ring, i: usize) -> Derivation {
        let mut d = Derivation::zero(ring);
        d.coeffs[i] = Poly::one(ring);
        d
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn coeff(&self, i: usize) -> &Poly {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    pub fn apply(&self, g: &Poly) -> Result<Poly> {
        self.ring.check_same(&g.ring)?;
        let mut r = Poly::zero(self.ring);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                r.add_assign_unchecked(&c.mul_unchecked(&g.partial(i)));
            }
        }
        Ok(r)
    }

    /// [D, E] = D∘E - E∘D, computed coefficientwise.
    pub fn commutator(&self, other: &Derivation) -> Result<Derivation> {
        self.ring.check_same(&other.ring)?;
        let mut coeffs = Vec::with_capacity(self.ring.n());
        for i in 0..self.ring.n() {
            let mut c = self.apply(&other.coeffs[i])?;
            c.add_assign_unchecked(&other.apply(&self.coeffs[i])?);
            coeffs.push(c);
        }
        Ok(Derivation { ring: self.ring, coeffs })
    }

    pub fn add(&self, other: &Derivation) -> Result<Derivation> {
        self.ring.check_same(&other.ring)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Derivation { ring: self.ring, coeffs })
    }
}
