//! Arithmetic in GF(2^k) for 1 <= k <= 16.
//!
//! Elements are bit vectors in the polynomial basis modulo the numerically
//! smallest irreducible polynomial of degree k. Multiplication goes through
//! exp/log tables built once per field and shared for the process lifetime.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_FIELD_EXP: u32 = 16;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn bits(self) -> u16 {
        self.0
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::ops::Add for Fe {
    type Output = Fe;
    #[inline]
    fn add(self, rhs: Fe) -> Fe {
        Fe(self.0 ^ rhs.0)
    }
}

impl std::ops::AddAssign for Fe {
    #[inline]
    fn add_assign(&mut self, rhs: Fe) {
        self.0 ^= rhs.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub k: u32,
    pub irreducible_bits: u32,
}

pub struct Field {
    k: u32,
    modulus: u32,
    order: usize,
    // exp has length 2*(order-1) so a product of logs indexes it directly
    exp: Vec<u16>,
    log: Vec<u32>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#b}", self.k, self.modulus)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
    }
}

impl Eq for Field {}

static FIELDS: [OnceLock<Field>; MAX_FIELD_EXP as usize] = [const { OnceLock::new() }; MAX_FIELD_EXP as usize];

fn clmul_reduce(mut a: u32, mut b: u32, modulus: u32, k: u32) -> u32 {
    let mut r = 0u32;
    while b != 0 {
        if b & 1 != 0 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> k & 1 != 0 {
            a ^= modulus;
        }
    }
    r
}

fn poly_degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree at most deg(p)/2.
pub fn is_irreducible(p: u32) -> bool {
    let d = poly_degree(p);
    if d < 1 {
        return false;
    }
    for q in 2u32..(1u32 << (d / 2 + 1)) {
        if poly_degree(q) >= 1 && poly_degree(q) <= d / 2 && poly_rem(p, q) == 0 {
            return false;
        }
    }
    true
}

/// Numerically smallest irreducible polynomial of degree k, as a bit mask.
pub fn least_irreducible(k: u32) -> u32 {
    (1u32 << k..1u32 << (k + 1))
        .find(|&p| is_irreducible(p))
        .expect("irreducible polynomials exist in every degree")
}

impl Field {
    pub fn get(k: u32) -> Result<&'static Field> {
        if !(1..=MAX_FIELD_EXP).contains(&k) {
            return Err(Error::Input(format!("field exponent {k} outside 1..={MAX_FIELD_EXP}")));
        }
        Ok(FIELDS[(k - 1) as usize].get_or_init(|| Field::build(k)))
    }

    /// GF(2), the default everywhere.
    pub fn gf2() -> &'static Field {
        Field::get(1).unwrap()
    }

    /// A generator of the multiplicative group.
    pub fn generator(&self) -> Fe {
        Fe(self.exp[1 % self.exp.len()])
    }

    fn build(k: u32) -> Field {
        let modulus = least_irreducible(k);
        let order = 1usize << k;
        let n = order - 1;
        // the class of t need not be primitive, so search for a generator
        let gen = (1..order as u32)
            .find(|&g| {
                let mut x = g;
                let mut e = 1usize;
                while x != 1 {
                    x = clmul_reduce(x, g, modulus, k);
                    e += 1;
                }
                e == n
            })
            .unwrap();
        let mut exp = vec![0u16; 2 * n];
        let mut log = vec![0u32; order];
        let mut x = 1u32;
        for i in 0..n {
            exp[i] = x as u16;
            exp[i + n] = x as u16;
            log[x as usize] = i as u32;
            x = clmul_reduce(x, gen, modulus, k);
        }
        Field { k, modulus, order, exp, log }
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn descriptor(&self) -> FieldDescriptor {
        FieldDescriptor { k: self.k, irreducible_bits: self.modulus }
    }

    pub fn element(&self, bits: u32) -> Result<Fe> {
        if (bits as usize) < self.order {
            Ok(Fe(bits as u16))
        } else {
            Err(Error::Input(format!("{bits} is not an element of GF(2^{})", self.k)))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order as u32).map(|b| Fe(b as u16))
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let s = self.log[a.0 as usize] + self.log[b.0 as usize];
        Fe(self.exp[s as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = (self.order - 1) as u32;
        let l = self.log[a.0 as usize];
        Ok(Fe(self.exp[((n - l) % n) as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let n = (self.order - 1) as u64;
        let l = self.log[a.0 as usize] as u64 * (e % n) % n;
        Fe(self.exp[l as usize])
    }

    /// The Frobenius a -> a^2, which is the identity on GF(2).
    pub fn frob(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    /// Inverse Frobenius, a^(2^(k-1)).
    pub fn sqrt(&self, a: Fe) -> Fe {
        self.pow(a, 1u64 << (self.k - 1))
    }

    /// The unique b with b^(2^e) = a.
    pub fn root_2e(&self, a: Fe, e: u32) -> Fe {
        let mut b = a;
        for _ in 0..e {
            b = self.sqrt(b);
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slow_mul(f: &Field, a: Fe, b: Fe) -> Fe {
        Fe(clmul_reduce(a.0 as u32, b.0 as u32, f.modulus(), f.k()) as u16)
    }

    #[test]
    fn least_irreducibles_small_degrees() {
        assert_eq!(least_irreducible(1), 0b10);
        assert_eq!(least_irreducible(2), 0b111);
        assert_eq!(least_irreducible(3), 0b1011);
        assert_eq!(least_irreducible(4), 0b10011);
        assert_eq!(least_irreducible(8), 0x11b);
    }

    #[test]
    fn gf4_generator_relation() {
        let f = Field::get(2).unwrap();
        let g = Fe(2);
        assert_eq!(f.mul(g, g), g + Fe::ONE);
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.mul(a, b), slow_mul(f, a, b));
            }
        }
    }

    #[test]
    fn tables_agree_with_shift_and_add() {
        for k in [1, 3, 5, 8] {
            let f = Field::get(k).unwrap();
            for a in f.elements().step_by(3) {
                for b in f.elements().step_by(5) {
                    assert_eq!(f.mul(a, b), slow_mul(f, a, b));
                }
            }
        }
    }

    #[test]
    fn inverse_sqrt_roundtrip() {
        for k in [1, 2, 4, 7, 16] {
            let f = Field::get(k).unwrap();
            for a in f.elements().skip(1).step_by(97) {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
                let s = f.sqrt(a);
                assert_eq!(f.mul(s, s), a);
            }
            assert_eq!(f.inv(Fe::ZERO), Err(Error::DivisionByZero));
        }
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(Field::get(0).is_err());
        assert!(Field::get(17).is_err());
        assert!(Field::get(2).unwrap().element(4).is_err());
    }
}
