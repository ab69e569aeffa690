//! Independent oracles and generators shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use hamlie_core::divpow::{Heights, Monomial, Poly, Ring};
use hamlie_core::gfield::{Fe, Field};
use proptest::prelude::*;

/// Schoolbook carry-less product reduced by the field modulus.
pub fn field_mul_oracle(f: &Field, a: Fe, b: Fe) -> Fe {
    let k = f.k();
    let m = f.modulus() as u64;
    let mut wide = 0u64;
    for i in 0..k {
        if b.0 >> i & 1 == 1 {
            wide ^= (a.0 as u64) << i;
        }
    }
    for bit in (k..2 * k).rev() {
        if wide >> bit & 1 == 1 {
            wide ^= m << (bit - k);
        }
    }
    Fe(wide as u16)
}

/// Rows of Pascal's triangle mod 2.
pub fn pascal_mod2(rows: usize) -> Vec<Vec<bool>> {
    let mut t: Vec<Vec<bool>> = vec![vec![true]];
    for n in 1..rows {
        let prev = &t[n - 1];
        let mut row = vec![true; n + 1];
        for k in 1..n {
            row[k] = prev[k - 1] ^ prev[k];
        }
        t.push(row);
    }
    t
}

pub fn binom_odd(t: &[Vec<bool>], n: u32, k: u32) -> bool {
    k <= n && t[n as usize][k as usize]
}

/// x^(a) x^(b) from the binomial definition, truncated to the ring.
pub fn mul_oracle(f: &Poly, g: &Poly, pascal: &[Vec<bool>]) -> BTreeMap<Monomial, Fe> {
    let ring = f.ring();
    let fld = ring.field;
    let n = ring.n();
    let mut out: BTreeMap<Monomial, Fe> = BTreeMap::new();
    for (a, x) in f.terms() {
        for (b, y) in g.terms() {
            let mut e = [0u32; 6];
            let mut odd = true;
            for i in 0..n {
                e[i] = a.0[i] + b.0[i];
                odd &= binom_odd(pascal, e[i], a.0[i]);
            }
            let m = Monomial(e);
            if odd && ring.heights.in_range(&m) {
                *out.entry(m).or_insert(Fe::ZERO) += fld.mul(*x, *y);
            }
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn to_map(p: &Poly) -> BTreeMap<Monomial, Fe> {
    p.terms().map(|(a, c)| (*a, *c)).collect()
}

/// f^(2) = sum of t^(2) over terms plus sum over pairs t_i t_j; a single
/// term c x^(a) has a nonzero square only when a = 2^k e_i.
fn dp_square_oracle(f: &Poly) -> Poly {
    let ring = f.ring();
    let fld = ring.field;
    let terms: Vec<(Monomial, Fe)> = f.terms().map(|(a, c)| (*a, *c)).collect();
    let mut out = Poly::zero(ring);
    for (a, c) in &terms {
        let nz: Vec<usize> = (0..ring.n()).filter(|&i| a.0[i] != 0).collect();
        if nz.len() == 1 && a.0[nz[0]].is_power_of_two() {
            let e = Monomial::var_pow(nz[0], 2 * a.0[nz[0]]);
            out = out.add(&Poly::monomial(ring, e, fld.mul(*c, *c)).unwrap()).unwrap();
        }
    }
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let u = Poly::monomial(ring, terms[i].0, terms[i].1).unwrap();
            let v = Poly::monomial(ring, terms[j].0, terms[j].1).unwrap();
            out = out.add(&u.mul(&v).unwrap()).unwrap();
        }
    }
    out
}

/// f^(r) as the product of f^(2^s) over the binary digits of r, all
/// computed in a ring with room to spare; None when the result leaves
/// the original ring.
pub fn divided_power_oracle(f: &Poly, r: u32) -> Option<Poly> {
    let ring = f.ring();
    let spare = 32 - r.max(1).leading_zeros() as u8 + 1;
    let big_m: Vec<u8> = ring.heights.as_slice().iter().map(|m| (m + spare).min(12)).collect();
    let big = Ring::new(Heights::new(&big_m).unwrap(), ring.field);
    let mut pow2 = f.reinterpret(big).unwrap();
    let mut acc = Poly::one(big);
    let mut bits = r;
    while bits != 0 {
        if bits & 1 == 1 {
            acc = acc.mul(&pow2).unwrap();
        }
        bits >>= 1;
        if bits != 0 {
            pow2 = dp_square_oracle(&pow2);
        }
    }
    if acc.terms().any(|(a, _)| !ring.heights.in_range(a)) {
        return None;
    }
    acc.reinterpret(ring).ok()
}

pub fn field_strategy() -> impl Strategy<Value = &'static Field> {
    prop_oneof![Just(1u32), Just(2), Just(3), Just(8)].prop_map(|k| Field::get(k).unwrap())
}

pub fn heights3() -> impl Strategy<Value = Heights> {
    (1u8..=3, 1u8..=3, 1u8..=3).prop_map(|(a, b, c)| Heights::three(a, b, c).unwrap())
}

pub fn ring_strategy() -> impl Strategy<Value = Ring> {
    (heights3(), field_strategy()).prop_map(|(h, f)| Ring::new(h, f))
}

pub fn poly_strategy(ring: Ring, max_terms: usize, with_constant: bool) -> impl Strategy<Value = Poly> {
    let monos: Vec<Monomial> = ring.heights.monomials().into_iter().filter(|a| with_constant || !a.is_one()).collect();
    let q = ring.field.order() as u16;
    proptest::collection::vec((0..monos.len(), 1..q), 0..=max_terms).prop_map(move |ts| {
        Poly::from_terms(ring, ts.into_iter().map(|(i, c)| (monos[i], Fe(c)))).unwrap()
    })
}

pub fn ring_and_polys(k: usize, max_terms: usize, with_constant: bool) -> impl Strategy<Value = (Ring, Vec<Poly>)> {
    ring_strategy().prop_flat_map(move |r| {
        (Just(r), proptest::collection::vec(poly_strategy(r, max_terms, with_constant), k))
    })
}
