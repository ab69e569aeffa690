#![allow(clippy::needless_range_loop)]

use hamlie_core::divpow::{Heights, MonoKind, Monomial};
use hamlie_core::gfield::{Fe, Field};
use hamlie_core::hamlie::{build_algebra, AlgebraSpec, LieAlg, Variant};
use hamlie_core::linalg::{Mat, Subspace};
use hamlie_core::lstruct::*;
use hamlie_core::sforms::FormTag;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn heights_up_to(total: u8) -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for a in 1..=total {
        for b in 1..=total {
            for c in 1..=total {
                if a + b + c <= total {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

fn all_specs(total: u8) -> Vec<AlgebraSpec> {
    let mut out = Vec::new();
    for h in heights_up_to(total) {
        for tag in FormTag::ALL {
            for v in [Variant::P, Variant::Ptilde, Variant::P1] {
                let s = AlgebraSpec::builtin(tag, Heights::new(&h).unwrap(), v);
                if s.validate().is_ok() {
                    out.push(s);
                }
            }
        }
    }
    out
}

fn alg(tag: FormTag, h: [u8; 3], v: Variant) -> LieAlg {
    build_algebra(&AlgebraSpec::builtin(tag, Heights::new(&h).unwrap(), v)).unwrap()
}

fn index_of(l: &LieAlg, e: [u32; 3]) -> usize {
    let m = Monomial::new(&e);
    l.labels().unwrap().iter().position(|x| x.as_monomial() == Some(m)).unwrap()
}

fn add(a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

fn jacobi_failures(l: &LieAlg) -> usize {
    let d = l.dim();
    (0..d)
        .into_par_iter()
        .map(|a| {
            let mut bad = 0;
            for b in a..d {
                let ab = l.bracket(&l.unit(a), &l.unit(b));
                for c in b..d {
                    let bc = l.bracket(&l.unit(b), &l.unit(c));
                    let ca = l.bracket(&l.unit(c), &l.unit(a));
                    let s = add(&add(&l.bracket(&ab, &l.unit(c)), &l.bracket(&bc, &l.unit(a))), &l.bracket(&ca, &l.unit(b)));
                    if s.iter().any(|x| !x.is_zero()) {
                        bad += 1;
                    }
                }
            }
            bad
        })
        .sum()
}

#[test]
fn jacobi_and_alternation_for_every_algebra_up_to_dim_63() {
    let specs = all_specs(6);
    assert!(specs.len() > 60);
    for s in &specs {
        let l = build_algebra(s).unwrap();
        assert!(l.dim() <= 66);
        for a in 0..l.dim() {
            assert!(l.sc(a, a).is_empty(), "{}", s.label());
            for b in 0..a {
                assert_eq!(l.sc(a, b), l.sc(b, a), "{}", s.label());
            }
        }
        assert_eq!(jacobi_failures(&l), 0, "{}", s.label());
    }
}

#[test]
fn self_brackets_vanish_exhaustively_up_to_dim_15() {
    for s in all_specs(4) {
        let l = build_algebra(&s).unwrap();
        if l.dim() > 15 {
            continue;
        }
        let d = l.dim();
        let bad = (1u32..1 << d)
            .into_par_iter()
            .filter(|&code| {
                let v: Vec<Fe> = (0..d).map(|i| Fe((code >> i & 1) as u16)).collect();
                l.bracket(&v, &v).iter().any(|x| !x.is_zero())
            })
            .count();
        assert_eq!(bad, 0, "{}", s.label());
    }
}

#[test]
fn dimensions() {
    for s in all_specs(6) {
        let l = build_algebra(&s).unwrap();
        let n = 1usize << s.heights.total();
        match s.variant {
            Variant::P => assert_eq!(l.dim(), n - 1),
            Variant::Ptilde => assert_eq!(l.dim(), n + 2),
            Variant::P1 => assert!(l.dim() == n - 1 || l.dim() == n - 2),
        }
    }
    assert_eq!(alg(FormTag::Omega1, [1, 1, 1], Variant::P1).dim(), 6);
    assert_eq!(alg(FormTag::Omega1, [2, 1, 1], Variant::P1).dim(), 14);
}

#[test]
fn p_is_an_ideal_of_ptilde_and_p1_of_p() {
    for h in [[1, 1, 1], [2, 1, 1], [1, 1, 2], [1, 2, 1]] {
        for tag in [FormTag::Omega1, FormTag::Omega3] {
            let big = alg(tag, h, Variant::Ptilde);
            let hh = Heights::new(&h).unwrap();
            let labels = big.labels().unwrap();
            let in_p: Vec<bool> = labels.iter().map(|x| hh.classify(&x.as_monomial().unwrap()) != MonoKind::TopPower).collect();
            assert_eq!(in_p.iter().filter(|x| !**x).count(), 3);
            for a in 0..big.dim() {
                for b in 0..big.dim() {
                    if in_p[b] {
                        assert!(big.sc(a, b).iter().all(|(g, _)| in_p[*g as usize]), "{tag} {h:?}");
                    }
                }
            }
            let p = alg(tag, h, Variant::P);
            let d = derived_subalgebra_basis(&p);
            for v in d.basis() {
                for a in 0..p.dim() {
                    assert!(d.contains(&p.bracket(&p.unit(a), v), p.field()));
                }
            }
        }
    }
}

#[test]
fn brackets_respect_the_filtration() {
    for s in all_specs(5) {
        if s.variant != Variant::P {
            continue;
        }
        let l = build_algebra(&s).unwrap();
        let deg = filtration(&l).unwrap();
        for a in 0..l.dim() {
            for b in 0..l.dim() {
                for (g, _) in l.sc(a, b) {
                    assert!(deg[*g as usize] >= deg[a] + deg[b], "{}", s.label());
                }
            }
        }
        let graded = !matches!(s.form, hamlie_core::hamlie::FormSpec::Builtin(FormTag::Omega4));
        assert_eq!(graded_algebra(&l).unwrap().same_structure(&l), graded, "{}", s.label());
    }
}

#[test]
fn associated_graded_of_omega4_is_omega1() {
    for h in [[1, 1, 1], [2, 1, 1], [1, 2, 1], [3, 1, 1], [2, 2, 1]] {
        let gr = graded_algebra(&alg(FormTag::Omega4, h, Variant::P)).unwrap();
        assert!(gr.same_structure(&alg(FormTag::Omega1, h, Variant::P)), "{h:?}");
    }
}

#[test]
fn grading_profile_counts_monomials() {
    let l = alg(FormTag::Omega1, [2, 1, 1], Variant::P);
    let g = grading_profile(&l).unwrap();
    assert_eq!(g.min_lie_degree, -1);
    assert_eq!(g.dims.iter().sum::<usize>(), 15);
    assert_eq!(*g.dims.last().unwrap(), 1);
}

#[test]
fn derived_series_and_centers() {
    let cases: [(FormTag, [u8; 3], Vec<usize>); 6] = [
        (FormTag::Omega1, [1, 1, 1], vec![7, 6, 6]),
        (FormTag::Omega3, [1, 1, 1], vec![7, 6, 6]),
        (FormTag::Omega4, [1, 1, 1], vec![7, 7]),
        (FormTag::Omega1, [2, 1, 1], vec![15, 14, 14]),
        (FormTag::Omega1, [1, 1, 2], vec![15, 15]),
        (FormTag::Omega3, [2, 1, 1], vec![15, 15]),
    ];
    for (tag, h, dims) in cases {
        let l = alg(tag, h, Variant::P);
        assert_eq!(derived_series(&l).dims, dims, "{tag} {h:?}");
        assert_eq!(center(&l).dim(), 0, "{tag} {h:?}");
    }
}

#[test]
fn certifiers_agree_on_small_algebras() {
    for s in all_specs(4) {
        let l = build_algebra(&s).unwrap();
        if l.dim() > 16 {
            continue;
        }
        let ex = is_simple(&l, SimplicityMethod::Exhaustive).unwrap();
        for seed in 0..3 {
            let no = is_simple(&l, SimplicityMethod::Norton { seed }).unwrap();
            assert_eq!(ex.simple, no.simple, "{} seed {seed}", s.label());
        }
        if let (Some(v), Some(k)) = (&ex.witness, ex.witness_ideal_dim) {
            let i = ideal_closure(&l, v);
            assert_eq!(i.dim(), k);
            assert!(k > 0 && k < l.dim());
            for b in i.basis() {
                for a in 0..l.dim() {
                    assert!(i.contains(&l.bracket(&l.unit(a), b), l.field()));
                }
            }
        }
    }
}

#[test]
fn norton_handles_larger_fields() {
    for (tag, h, expect) in [(FormTag::Omega4, [1, 1, 1], true), (FormTag::Omega3, [1, 1, 1], false)] {
        let s = AlgebraSpec { field_exp: 2, ..AlgebraSpec::builtin(tag, Heights::new(&h).unwrap(), Variant::P) };
        let l = build_algebra(&s).unwrap();
        assert_eq!(l.field().k(), 2);
        assert_eq!(is_simple(&l, SimplicityMethod::Norton { seed: 3 }).unwrap().simple, expect, "{tag}");
        assert!(is_simple(&l, SimplicityMethod::Exhaustive).is_err());
    }
}

#[test]
fn min_rank_modes_are_consistent() {
    for s in all_specs(4) {
        if s.variant != Variant::P {
            continue;
        }
        let l = build_algebra(&s).unwrap();
        let ex = min_ad_rank(&l, RankMode::Exhaustive, 0).unwrap();
        let ho = min_ad_rank(&l, RankMode::Homogeneous, 0).unwrap();
        let sa = min_ad_rank(&l, RankMode::Sampled, 9).unwrap();
        assert!(ho.r >= ex.r && sa.r >= ex.r, "{}", s.label());
        if ho.exact {
            assert_eq!(ho.r, ex.r, "{}", s.label());
        }
        for v in &ex.argmin {
            assert_eq!(l.ad(v).rank(l.field()), ex.r);
        }
        assert_eq!(ex.examined, (1u64 << l.dim()) - 1);
    }
}

#[test]
fn min_rank_is_attained_only_on_the_top_monomial() {
    for (tag, h, r) in [
        (FormTag::Omega1, [2, 1, 1], 3),
        (FormTag::Omega1, [1, 2, 1], 3),
        (FormTag::Omega1, [1, 1, 2], 4),
        (FormTag::Omega3, [2, 1, 1], 4),
        (FormTag::Omega3, [1, 1, 2], 4),
        (FormTag::Omega4, [2, 1, 1], 3),
        (FormTag::Omega4, [1, 2, 1], 3),
    ] {
        let l = alg(tag, h, Variant::P);
        let m = min_ad_rank(&l, RankMode::Exhaustive, 0).unwrap();
        let top = index_of(&l, [(1 << h[0]) - 1, (1 << h[1]) - 1, (1 << h[2]) - 1]);
        assert_eq!(m.r, r, "{tag} {h:?}");
        assert_eq!(m.argmin, vec![l.unit(top)], "{tag} {h:?}");
    }
}

#[test]
fn witness_sets_bound_ranks_from_below() {
    // D = x3 against brackets with a set E of basis monomials
    let l = alg(FormTag::Omega1, [1, 1, 2], Variant::P);
    let d = l.unit(index_of(&l, [0, 0, 1]));
    let es: Vec<Vec<Fe>> =
        [[0, 0, 2], [0, 0, 3], [1, 0, 3], [0, 1, 3], [1, 1, 3]].iter().map(|e| l.unit(index_of(&l, *e))).collect();
    assert_eq!(witness_rank(&l, &d, &es), 5);
    assert!(l.ad(&d).rank(l.field()) >= 5);

    let l = alg(FormTag::Omega4, [2, 1, 1], Variant::P);
    let d = l.unit(index_of(&l, [0, 0, 1]));
    let es: Vec<Vec<Fe>> = [[1, 0, 1], [1, 1, 1], [2, 0, 1], [3, 0, 1]].iter().map(|e| l.unit(index_of(&l, *e))).collect();
    assert_eq!(witness_rank(&l, &d, &es), 4);
    assert!(l.ad(&d).rank(l.field()) >= 4);

    let l = alg(FormTag::Omega3, [2, 1, 1], Variant::P);
    let d = l.unit(index_of(&l, [1, 0, 0]));
    // {x1, f} = ∂1 f for ω3, so x1^(2), x1x2, x1x3 map to x1, x2, x3
    let es: Vec<Vec<Fe>> = [[2, 0, 0], [1, 1, 0], [1, 0, 1]].iter().map(|e| l.unit(index_of(&l, *e))).collect();
    assert_eq!(witness_rank(&l, &d, &es), 3);
    let lin: Vec<Vec<Fe>> = [[1, 0, 0], [0, 1, 0], [0, 0, 1]].iter().map(|e| l.unit(index_of(&l, *e))).collect();
    assert_eq!(witness_rank(&l, &d, &lin), 0);
    assert_eq!(witness_rank(&l, &d, &[]), 0);
}

#[test]
fn fingerprints_separate_the_three_classes() {
    let fps: Vec<Fingerprint> = [FormTag::Omega1, FormTag::Omega3, FormTag::Omega4]
        .iter()
        .map(|t| fingerprint(&alg(*t, [2, 1, 1], Variant::P), 1).unwrap())
        .collect();
    for i in 0..3 {
        for j in i + 1..3 {
            assert!(fingerprints_distinct(&fps[i], &fps[j]), "{i} {j}");
        }
    }
    assert_eq!(fps[1].normalizer_dim, Some(12));
}

#[test]
fn normalizer_contains_the_span_and_is_a_subalgebra() {
    let l = alg(FormTag::Omega4, [2, 1, 1], Variant::P);
    let s = Subspace::span(l.dim(), &[l.unit(0), l.unit(3)], l.field());
    let n = normalizer_of_span(&l, &s);
    for v in n.basis() {
        for w in n.basis() {
            assert!(n.contains(&l.bracket(v, w), l.field()));
        }
    }
    let dims = intrinsic_filtration_dims(&l, &n);
    assert_eq!(dims.iter().sum::<usize>(), l.dim());
}

fn random_invertible(d: usize, f: &'static Field, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut m = Mat::zeros(d, d);
        for x in m.data.iter_mut() {
            *x = Fe(rng.gen_range(0..f.order()) as u16);
        }
        if m.rank(f) == d {
            return m;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fingerprints_ignore_the_basis(which in 0usize..4, seed in any::<u64>()) {
        let (tag, h) = [(FormTag::Omega1, [2, 1, 1]), (FormTag::Omega3, [2, 1, 1]), (FormTag::Omega4, [2, 1, 1]), (FormTag::Omega3, [1, 1, 1])][which];
        let l = alg(tag, h, Variant::P);
        let p = random_invertible(l.dim(), l.field(), seed);
        let m = l.change_basis(&p).unwrap();
        prop_assert_eq!(jacobi_failures(&m), 0);
        prop_assert_eq!(fingerprint(&l, 1).unwrap(), fingerprint(&m, 1).unwrap());
    }
}
