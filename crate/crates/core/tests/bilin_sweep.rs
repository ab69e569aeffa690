#![allow(clippy::needless_range_loop)]

use std::collections::BTreeSet;

use hamlie_core::bilin::{
    brute_force_equivalent, brute_force_orbit, canonical_matrix, invertible_matrices, is_flag_compatible,
    pairs_equivalent, BilinPair, CanonTag,
};
use hamlie_core::gfield::{Fe, Field};
use hamlie_core::linalg::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn det3(m: &Mat, f: &Field) -> Fe {
    let g = |i, j| m.get(i, j);
    let t = |a: Fe, b: Fe, c: Fe| f.mul(f.mul(a, b), c);
    t(g(0, 0), g(1, 1), g(2, 2))
        + t(g(0, 1), g(1, 2), g(2, 0))
        + t(g(0, 2), g(1, 0), g(2, 1))
        + t(g(0, 2), g(1, 1), g(2, 0))
        + t(g(0, 0), g(1, 2), g(2, 1))
        + t(g(0, 1), g(1, 0), g(2, 2))
}

/// Symmetric, nondegenerate, some diagonal entry nonzero.
fn valid_forms(f: &'static Field) -> Vec<[Fe; 6]> {
    let q = f.order() as u32;
    let mut out = Vec::new();
    for code in 0..q.pow(6) {
        let mut c = code;
        let mut u = [Fe::ZERO; 6];
        for x in u.iter_mut() {
            *x = Fe((c % q) as u16);
            c /= q;
        }
        let m = Mat::from_rows(&[vec![u[0], u[1], u[2]], vec![u[1], u[3], u[4]], vec![u[2], u[4], u[5]]]);
        if !det3(&m, f).is_zero() && !(u[0].is_zero() && u[3].is_zero() && u[5].is_zero()) {
            out.push(u);
        }
    }
    out
}

fn nontrivial_heights() -> Vec<[u8; 3]> {
    let mut hs = Vec::new();
    for a in 1..=3 {
        for b in 1..=3 {
            for c in 1..=3 {
                if !(a == b && b == c) {
                    hs.push([a, b, c]);
                }
            }
        }
    }
    hs
}

#[test]
fn canonical_forms_are_sound() {
    let f = Field::gf2();
    for h in nontrivial_heights().into_iter().chain([[1, 1, 1], [2, 2, 2]]) {
        for u in valid_forms(f) {
            let p = BilinPair::from_upper(h, u, f).unwrap();
            let c = p.canonicalize().unwrap();
            let img = c.change.transpose().mul(p.matrix(), f).mul(&c.change, f);
            assert_eq!(img, canonical_matrix(c.tag), "{h:?} {u:?}");
            assert!(is_flag_compatible(&c.change, &h, &c.heights, f), "{h:?} {u:?}");
            assert!(!det3(&c.change, f).is_zero());
            if c.tag == CanonTag::B2 {
                let [m1, m2, m3] = c.heights;
                assert!(m1 < m2 && !(m1..=m2).contains(&m3), "{h:?} {u:?} {:?}", c.heights);
            }
        }
    }
}

#[test]
fn equivalence_criterion_matches_brute_force_over_gf2() {
    let f = Field::gf2();
    let items: Vec<([u8; 3], [Fe; 6])> =
        nontrivial_heights().into_iter().flat_map(|h| valid_forms(f).into_iter().map(move |u| (h, u))).collect();
    let pairs: Vec<BilinPair> = items.iter().map(|(h, u)| BilinPair::from_upper(*h, *u, f).unwrap()).collect();
    let canon: Vec<_> = pairs.iter().map(|p| p.canonicalize().unwrap()).collect();
    let keys: Vec<([u8; 3], Vec<u16>)> = pairs.iter().map(|p| (p.heights(), p.matrix().data.iter().map(|x| x.0).collect())).collect();
    let mismatches: usize = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let orbit: BTreeSet<_> = brute_force_orbit(p).unwrap();
            (0..pairs.len())
                .filter(|&j| {
                    let mut a = pairs[i].heights();
                    let mut b = pairs[j].heights();
                    a.sort_unstable();
                    b.sort_unstable();
                    a == b && orbit.contains(&keys[j]) != pairs_equivalent(&canon[i], &canon[j])
                })
                .count()
        })
        .sum();
    assert_eq!(mismatches, 0);
}

#[test]
fn brute_force_spot_checks() {
    let f = Field::gf2();
    let b1 = BilinPair::new([1, 1, 1], canonical_matrix(CanonTag::B1), f).unwrap();
    let b3 = BilinPair::new([1, 1, 1], canonical_matrix(CanonTag::B3), f).unwrap();
    assert!(brute_force_equivalent(&b1, &b3).unwrap());
    assert!(brute_force_equivalent(&b1, &b1).unwrap());
    let x = BilinPair::new([1, 2, 1], canonical_matrix(CanonTag::B1), f).unwrap();
    let y = BilinPair::new([2, 1, 1], canonical_matrix(CanonTag::B1), f).unwrap();
    assert!(pairs_equivalent(&x.canonicalize().unwrap(), &y.canonicalize().unwrap()));
    assert!(brute_force_equivalent(&x, &y).unwrap());
    let z = BilinPair::new([1, 2, 2], canonical_matrix(CanonTag::B1), f).unwrap();
    assert!(!pairs_equivalent(&z.canonicalize().unwrap(), &x.canonicalize().unwrap()));
    assert_eq!(invertible_matrices(f).unwrap().len(), 168);
    assert!(invertible_matrices(Field::get(3).unwrap()).is_err());
}

#[test]
fn gf4_spot_sweep_matches_brute_force() {
    let f = Field::get(2).unwrap();
    let forms = valid_forms(f);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for h in [[1u8, 2, 1], [1, 2, 3], [2, 1, 1]] {
        for _ in 0..12 {
            let u = forms[rng.gen_range(0..forms.len())];
            let v = forms[rng.gen_range(0..forms.len())];
            let a = BilinPair::from_upper(h, u, f).unwrap();
            let b = BilinPair::from_upper(h, v, f).unwrap();
            let (ca, cb) = (a.canonicalize().unwrap(), b.canonicalize().unwrap());
            assert_eq!(pairs_equivalent(&ca, &cb), brute_force_equivalent(&a, &b).unwrap(), "{h:?} {u:?} {v:?}");
        }
    }
}

#[test]
fn n_invariants_values_and_invariance() {
    let f = Field::gf2();
    let b3 = BilinPair::new([1, 2, 3], canonical_matrix(CanonTag::B3), f).unwrap();
    assert_eq!(b3.n_invariants(), [1, 1, 1]);
    let b2 = BilinPair::new([1, 2, 3], canonical_matrix(CanonTag::B2), f).unwrap();
    assert!(b2.n_invariants().contains(&0));
    let mats = invertible_matrices(f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for h in nontrivial_heights() {
        for u in valid_forms(f) {
            let p = BilinPair::from_upper(h, u, f).unwrap();
            let n = p.n_invariants();
            let mut tried = 0;
            while tried < 200 {
                let m = &mats[rng.gen_range(0..mats.len())];
                if !is_flag_compatible(m, &h, &h, f) {
                    continue;
                }
                tried += 1;
                let img = m.transpose().mul(p.matrix(), f).mul(m, f);
                assert_eq!(BilinPair::new(h, img, f).unwrap().n_invariants(), n, "{h:?} {u:?}");
            }
        }
    }
}
