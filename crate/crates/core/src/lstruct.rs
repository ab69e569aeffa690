//! Structure of finite-dimensional Lie algebras over GF(2^k).
//!
//! Ideals are submodules of the adjoint module, so simplicity is checked
//! either by spinning every nonzero vector (small GF(2) cases) or with a
//! Norton-style irreducibility test on the algebra generated by ad(e_a).

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};
use crate::hamlie::{LieAlg, SparseVec};
use crate::linalg::{rank_packed, Mat, Subspace};

pub const EXHAUSTIVE_RANK_MAX_DIM: usize = 16;
pub const EXHAUSTIVE_SIMPLE_MAX_DIM: usize = 20;
pub const HOMOGENEOUS_MAX_COUNT: u64 = 1 << 20;
pub const NORTON_MAX_NULLITY: usize = 8;

pub fn rank(m: &Mat, f: &Field) -> usize {
    m.rank(f)
}

/// Span of all structure-constant images, [L, L].
pub fn derived_subalgebra_basis(l: &LieAlg) -> Subspace {
    let f = l.field();
    let d = l.dim();
    let mut s = Subspace::zero(d);
    for a in 0..d {
        for b in a + 1..d {
            let sc = l.sc(a, b);
            if sc.is_empty() {
                continue;
            }
            s.insert(dense(sc, d), f);
            if s.dim() == d {
                return s;
            }
        }
    }
    s
}

fn dense(v: &SparseVec, d: usize) -> Vec<Fe> {
    let mut out = vec![Fe::ZERO; d];
    for &(g, c) in v {
        out[g as usize] = c;
    }
    out
}

#[derive(Debug, Clone)]
pub struct DerivedSeries {
    pub dims: Vec<usize>,
    pub terms: Vec<Subspace>,
}

/// L, [L,L], [[L,L],[L,L]], ... until the dimension repeats or hits zero.
pub fn derived_series(l: &LieAlg) -> DerivedSeries {
    let f = l.field();
    let d = l.dim();
    let mut terms = vec![Subspace::full(d)];
    let mut dims = vec![d];
    loop {
        let cur = terms.last().unwrap();
        if cur.dim() == 0 {
            break;
        }
        let next = if cur.dim() == d {
            derived_subalgebra_basis(l)
        } else {
            let basis = cur.basis();
            let mut s = Subspace::zero(d);
            for i in 0..basis.len() {
                for j in i + 1..basis.len() {
                    s.insert(l.bracket(&basis[i], &basis[j]), f);
                }
            }
            s
        };
        let nd = next.dim();
        let cd = cur.dim();
        dims.push(nd);
        terms.push(next);
        if nd == 0 || nd == cd {
            break;
        }
    }
    DerivedSeries { dims, terms }
}

/// Kernel of v -> ad(v).
pub fn center(l: &LieAlg) -> Subspace {
    let f = l.field();
    let d = l.dim();
    let mut m = Mat::zeros(d * d, d);
    for a in 0..d {
        for b in 0..d {
            for &(g, c) in l.sc(a, b) {
                m.set(b * d + g as usize, a, c);
            }
        }
    }
    Subspace::span(d, &m.nullspace(f), f)
}

/// Smallest subspace containing the given vectors and stable under the maps.
fn spin<F>(d: usize, f: &Field, start: &[Vec<Fe>], gens: usize, apply: F) -> Subspace
where
    F: Fn(usize, &[Fe]) -> Vec<Fe>,
{
    let mut s = Subspace::zero(d);
    let mut queue: Vec<Vec<Fe>> = Vec::new();
    for v in start {
        if s.insert(v.clone(), f) {
            queue.push(v.clone());
        }
    }
    while let Some(w) = queue.pop() {
        for a in 0..gens {
            if s.dim() == d {
                return s;
            }
            let img = apply(a, &w);
            if s.insert(img.clone(), f) {
                queue.push(img);
            }
        }
    }
    s
}

/// The ideal generated by v.
pub fn ideal_closure(l: &LieAlg, v: &[Fe]) -> Subspace {
    let d = l.dim();
    spin(d, l.field(), &[v.to_vec()], d, |a, w| apply_ad_basis(l, a, w))
}

/// ad(e_a) w without building the matrix.
fn apply_ad_basis(l: &LieAlg, a: usize, w: &[Fe]) -> Vec<Fe> {
    let f = l.field();
    let mut out = vec![Fe::ZERO; l.dim()];
    for (b, &x) in w.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for &(g, c) in l.sc(a, b) {
            out[g as usize] += f.mul(x, c);
        }
    }
    out
}

/// ad(e_a)^T w.
fn apply_ad_basis_t(l: &LieAlg, a: usize, w: &[Fe]) -> Vec<Fe> {
    let f = l.field();
    let d = l.dim();
    let mut out = vec![Fe::ZERO; d];
    for (b, o) in out.iter_mut().enumerate() {
        for &(g, c) in l.sc(a, b) {
            let x = w[g as usize];
            if !x.is_zero() {
                *o += f.mul(x, c);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimplicityMethod {
    Exhaustive,
    Norton { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicityVerdict {
    pub simple: bool,
    pub perfect: bool,
    pub method: SimplicityMethod,
    /// A vector generating a nonzero proper ideal, when one was found.
    pub witness: Option<Vec<Fe>>,
    pub witness_ideal_dim: Option<usize>,
}

pub fn is_perfect(l: &LieAlg) -> bool {
    derived_subalgebra_basis(l).dim() == l.dim()
}

pub fn is_simple(l: &LieAlg, method: SimplicityMethod) -> Result<SimplicityVerdict> {
    if l.dim() == 0 {
        return Ok(SimplicityVerdict { simple: false, perfect: true, method, witness: None, witness_ideal_dim: None });
    }
    let derived = derived_subalgebra_basis(l);
    let perfect = l.dim() > 0 && derived.dim() == l.dim();
    match method {
        SimplicityMethod::Exhaustive => {
            if l.field().k() != 1 || l.dim() > EXHAUSTIVE_SIMPLE_MAX_DIM {
                return Err(Error::Bound(format!(
                    "exhaustive simplicity needs GF(2) and dim <= {EXHAUSTIVE_SIMPLE_MAX_DIM}"
                )));
            }
            let (witness, wdim) = match exhaustive_proper_ideal(l) {
                Some((v, k)) => (Some(v), Some(k)),
                None => (None, None),
            };
            Ok(SimplicityVerdict { simple: perfect && witness.is_none(), perfect, method, witness, witness_ideal_dim: wdim })
        }
        SimplicityMethod::Norton { .. } if !perfect => {
            // [L, L] is itself an ideal; any vector will do when L is abelian
            let v = derived.basis().first().cloned().unwrap_or_else(|| l.unit(0));
            let k = ideal_closure(l, &v).dim();
            Ok(SimplicityVerdict { simple: false, perfect, method, witness: Some(v), witness_ideal_dim: Some(k) })
        }
        SimplicityMethod::Norton { seed } => {
            let found = norton_proper_submodule(l, seed)?;
            let (witness, wdim) = match found {
                Some((v, k)) => (Some(v), Some(k)),
                None => (None, None),
            };
            Ok(SimplicityVerdict { simple: perfect && witness.is_none(), perfect, method, witness, witness_ideal_dim: wdim })
        }
    }
}

/// Packed structure table over GF(2): adcols[a][b] = [e_a, e_b] as a bit mask.
fn packed_table(l: &LieAlg) -> Vec<Vec<u64>> {
    let d = l.dim();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| l.sc(a, b).iter().fold(0u64, |acc, &(g, c)| if c.is_zero() { acc } else { acc ^ (1 << g) }))
                .collect()
        })
        .collect()
}

fn packed_ideal_dim(adcols: &[Vec<u64>], v: u64, d: usize) -> usize {
    let mut basis = [0u64; 64];
    let mut dim = 0;
    let mut queue = Vec::with_capacity(d);
    let insert = |mut x: u64, basis: &mut [u64; 64]| -> bool {
        while x != 0 {
            let t = 63 - x.leading_zeros() as usize;
            if basis[t] == 0 {
                basis[t] = x;
                return true;
            }
            x ^= basis[t];
        }
        false
    };
    if insert(v, &mut basis) {
        dim += 1;
        queue.push(v);
    }
    while let Some(w) = queue.pop() {
        for col in adcols {
            let mut img = 0u64;
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                img ^= col[b];
                bits &= bits - 1;
            }
            if insert(img, &mut basis) {
                dim += 1;
                if dim == d {
                    return d;
                }
                queue.push(img);
            }
        }
    }
    dim
}

fn exhaustive_proper_ideal(l: &LieAlg) -> Option<(Vec<Fe>, usize)> {
    let d = l.dim();
    if d == 0 {
        return None;
    }
    let adcols = packed_table(l);
    let hit = (1u64..1u64 << d).into_par_iter().find_first(|&v| packed_ideal_dim(&adcols, v, d) < d)?;
    let v: Vec<Fe> = (0..d).map(|i| Fe((hit >> i & 1) as u16)).collect();
    Some((v, packed_ideal_dim(&adcols, hit, d)))
}

fn random_fe(rng: &mut ChaCha8Rng, f: &Field) -> Fe {
    Fe(rng.gen_range(0..f.order()) as u16)
}

/// Enumerate nonzero vectors of a subspace up to scalars: first coordinate 1.
fn projective_points(basis: &[Vec<Fe>], f: &Field) -> Vec<Vec<Fe>> {
    let k = basis.len();
    let d = basis.first().map_or(0, |v| v.len());
    let q = f.order() as u64;
    let mut out = Vec::new();
    for lead in 0..k {
        let free = k - lead - 1;
        for code in 0..q.pow(free as u32) {
            let mut v = basis[lead].clone();
            let mut c = code;
            for row in &basis[lead + 1..] {
                let x = Fe((c % q) as u16);
                c /= q;
                crate::linalg::axpy(&mut v, x, row, f);
            }
            debug_assert_eq!(v.len(), d);
            out.push(v);
        }
    }
    out
}

/// A singular element of the associative envelope of ad L with small nullity.
fn norton_element(l: &LieAlg, rng: &mut ChaCha8Rng) -> Option<Mat> {
    let f = l.field();
    let d = l.dim();
    let gens: Vec<Mat> = (0..d).map(|a| l.ad(&l.unit(a))).collect();
    let mut best: Option<(usize, Mat)> = None;
    for _ in 0..400 {
        let mut theta = Mat::zeros(d, d);
        let terms = rng.gen_range(2..6);
        for _ in 0..terms {
            let len = rng.gen_range(1..4);
            let mut w = gens[rng.gen_range(0..d)].clone();
            for _ in 1..len {
                w = w.mul(&gens[rng.gen_range(0..d)], f);
            }
            let c = random_fe(rng, f);
            for (x, y) in theta.data.iter_mut().zip(&w.data) {
                *x += f.mul(c, *y);
            }
        }
        let shifts: Vec<Fe> = if f.order() <= 16 { f.elements().collect() } else { vec![random_fe(rng, f)] };
        for lam in shifts {
            let mut t = theta.clone();
            for i in 0..d {
                let v = t.get(i, i);
                t.set(i, i, v + lam);
            }
            let nullity = d - t.rank(f);
            if nullity == 0 || nullity > NORTON_MAX_NULLITY {
                continue;
            }
            if best.as_ref().is_none_or(|(n, _)| nullity < *n) {
                best = Some((nullity, t));
            }
        }
        if best.as_ref().is_some_and(|(n, _)| *n == 1) {
            break;
        }
    }
    best.map(|(_, t)| t)
}

/// Some vector spanning a proper nonzero submodule of the adjoint module,
/// or None when the module is irreducible.
fn norton_proper_submodule(l: &LieAlg, seed: u64) -> Result<Option<(Vec<Fe>, usize)>> {
    let f = l.field();
    let d = l.dim();
    if d <= 1 {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = norton_element(l, &mut rng)
        .ok_or_else(|| Error::Bound("no envelope element of small positive nullity found".into()))?;
    let kernel = theta.nullspace(f);
    for v in projective_points(&kernel, f) {
        let s = ideal_closure(l, &v);
        if s.dim() < d {
            return Ok(Some((v, s.dim())));
        }
    }
    let tkernel = theta.transpose().nullspace(f);
    let w = &tkernel[0];
    let s = spin(d, f, std::slice::from_ref(w), d, |a, x| apply_ad_basis_t(l, a, x));
    if s.dim() < d {
        // the annihilator of the dual submodule is a proper ideal
        let ann = Mat::from_rows(s.basis()).nullspace(f);
        let v = ann[0].clone();
        let k = ideal_closure(l, &v).dim();
        return Ok(Some((v, k)));
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMode {
    Exhaustive,
    Homogeneous,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinRank {
    pub r: usize,
    pub argmin: Vec<Vec<Fe>>,
    pub mode: RankMode,
    /// True when r is the exact invariant rather than a bound.
    pub exact: bool,
    pub examined: u64,
}

pub fn min_ad_rank(l: &LieAlg, mode: RankMode, seed: u64) -> Result<MinRank> {
    match mode {
        RankMode::Exhaustive => exhaustive_min_rank(l),
        RankMode::Homogeneous => homogeneous_min_rank(l),
        RankMode::Sampled => sampled_min_rank(l, seed, 4096),
    }
}

fn exhaustive_min_rank(l: &LieAlg) -> Result<MinRank> {
    let d = l.dim();
    if l.field().k() != 1 || d > EXHAUSTIVE_RANK_MAX_DIM || d == 0 {
        return Err(Error::Bound(format!("exhaustive min-rank needs GF(2) and 1 <= dim <= {EXHAUSTIVE_RANK_MAX_DIM}")));
    }
    let adcols = packed_table(l);
    let total = 1u64 << d;
    let chunk = 1u64 << 10;
    let chunks: Vec<u64> = (0..total.div_ceil(chunk)).collect();
    let partial: Vec<(usize, Vec<u64>)> = chunks
        .par_iter()
        .map(|&c| {
            let lo = (c * chunk).max(1);
            let hi = ((c + 1) * chunk).min(total);
            let mut best = usize::MAX;
            let mut arg = Vec::new();
            let mut g = lo ^ (lo >> 1);
            let mut cols = vec![0u64; d];
            for (a, col) in adcols.iter().enumerate() {
                if g >> a & 1 == 1 {
                    for (x, y) in cols.iter_mut().zip(col) {
                        *x ^= y;
                    }
                }
            }
            let mut i = lo;
            loop {
                let r = rank_packed(&cols);
                if r < best {
                    best = r;
                    arg.clear();
                }
                if r == best {
                    arg.push(g);
                }
                i += 1;
                if i >= hi {
                    break;
                }
                let bit = i.trailing_zeros() as usize;
                g ^= 1 << bit;
                for (x, y) in cols.iter_mut().zip(&adcols[bit]) {
                    *x ^= y;
                }
            }
            (best, arg)
        })
        .collect();
    let r = partial.iter().map(|p| p.0).min().unwrap();
    let mut arg: Vec<u64> = partial.into_iter().filter(|p| p.0 == r).flat_map(|p| p.1).collect();
    arg.sort_unstable();
    let argmin = arg.iter().map(|&v| (0..d).map(|i| Fe((v >> i & 1) as u16)).collect()).collect();
    Ok(MinRank { r, argmin, mode: RankMode::Exhaustive, exact: true, examined: total - 1 })
}

fn components(l: &LieAlg) -> Result<Vec<(u32, Vec<usize>)>> {
    let labels = l.labels().ok_or_else(|| Error::Precondition("degree metadata is missing".into()))?;
    if labels.iter().any(|x| !x.is_homogeneous()) {
        return Err(Error::Precondition("basis labels are not homogeneous".into()));
    }
    let mut degs: Vec<u32> = labels.iter().map(|x| x.degree()).collect();
    degs.sort_unstable();
    degs.dedup();
    Ok(degs
        .into_iter()
        .map(|t| (t, (0..l.dim()).filter(|&i| labels[i].degree() == t).collect()))
        .collect())
}

fn min_over_components(l: &LieAlg, rank_in: &LieAlg) -> Result<(usize, Vec<Vec<Fe>>, u64)> {
    let f = l.field();
    let q = f.order() as u64;
    let d = l.dim();
    let mut best = usize::MAX;
    let mut arg: Vec<Vec<Fe>> = Vec::new();
    let mut examined = 0u64;
    for (_, idx) in components(l)? {
        let c = idx.len() as u32;
        let count = (q.pow(c) - 1) / (q - 1);
        if count > HOMOGENEOUS_MAX_COUNT {
            return Err(Error::Bound(format!("component of dimension {c} has {count} projective points")));
        }
        let basis: Vec<Vec<Fe>> = idx.iter().map(|&i| l.unit(i)).collect();
        let pts = projective_points(&basis, f);
        examined += pts.len() as u64;
        let ranks: Vec<usize> = pts.par_iter().map(|v| rank_in.ad(v).rank(f)).collect();
        for (v, r) in pts.into_iter().zip(ranks) {
            if r < best {
                best = r;
                arg.clear();
            }
            if r == best {
                arg.push(v);
            }
        }
    }
    debug_assert!(arg.iter().all(|v| v.len() == d));
    Ok((best, arg, examined))
}

/// Minimum over homogeneous elements. The value is exact when it equals the
/// same minimum taken in the associated graded algebra, which bounds R from below.
fn homogeneous_min_rank(l: &LieAlg) -> Result<MinRank> {
    let (r, argmin, examined) = min_over_components(l, l)?;
    let gr = graded_algebra(l)?;
    let exact = if gr.same_structure(l) {
        true
    } else {
        let (rg, _, _) = min_over_components(&gr, &gr)?;
        rg == r
    };
    Ok(MinRank { r, argmin, mode: RankMode::Homogeneous, exact, examined })
}

fn sampled_min_rank(l: &LieAlg, seed: u64, samples: usize) -> Result<MinRank> {
    let f = l.field();
    let d = l.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vs = Vec::with_capacity(samples);
    while vs.len() < samples {
        let v: Vec<Fe> = (0..d).map(|_| random_fe(&mut rng, f)).collect();
        if v.iter().any(|x| !x.is_zero()) {
            vs.push(normalize_projective(&v, f));
        }
    }
    let ranks: Vec<usize> = vs.par_iter().map(|v| l.ad(v).rank(f)).collect();
    let r = *ranks.iter().min().unwrap();
    let mut argmin: Vec<Vec<Fe>> = vs.into_iter().zip(ranks).filter(|(_, x)| *x == r).map(|(v, _)| v).collect();
    argmin.sort();
    argmin.dedup();
    Ok(MinRank { r, argmin, mode: RankMode::Sampled, exact: false, examined: samples as u64 })
}

pub fn normalize_projective(v: &[Fe], f: &Field) -> Vec<Fe> {
    match v.iter().find(|x| !x.is_zero()) {
        None => v.to_vec(),
        Some(&lead) => {
            let inv = f.inv(lead).unwrap();
            v.iter().map(|x| f.mul(*x, inv)).collect()
        }
    }
}

/// Lie degree |α| - 2 of each basis label.
pub fn filtration(l: &LieAlg) -> Result<Vec<i32>> {
    let labels = l.labels().ok_or_else(|| Error::Precondition("degree metadata is missing".into()))?;
    Ok(labels.iter().map(|x| x.degree() as i32 - 2).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradingProfile {
    pub min_lie_degree: i32,
    pub dims: Vec<usize>,
}

pub fn grading_profile(l: &LieAlg) -> Result<GradingProfile> {
    let degs = filtration(l)?;
    let lo = *degs.iter().min().ok_or_else(|| Error::Precondition("empty algebra".into()))?;
    let hi = *degs.iter().max().unwrap();
    let mut dims = vec![0usize; (hi - lo + 1) as usize];
    for t in degs {
        dims[(t - lo) as usize] += 1;
    }
    Ok(GradingProfile { min_lie_degree: lo, dims })
}

/// Keep only the part of each bracket in degree deg(a) + deg(b) - 2.
pub fn graded_algebra(l: &LieAlg) -> Result<LieAlg> {
    let labels = l.labels().ok_or_else(|| Error::Precondition("degree metadata is missing".into()))?;
    if labels.iter().any(|x| !x.is_homogeneous()) {
        return Err(Error::Precondition("basis labels are not homogeneous".into()));
    }
    let deg: Vec<i64> = labels.iter().map(|x| x.degree() as i64).collect();
    let d = l.dim();
    let table: Vec<SparseVec> = (0..d * d)
        .map(|ab| {
            let (a, b) = (ab / d, ab % d);
            let want = deg[a] + deg[b] - 2;
            l.sc(a, b).iter().copied().filter(|(g, _)| deg[*g as usize] == want).collect()
        })
        .collect();
    let mut gr = LieAlg::from_table(l.field(), d, table)?.with_labels(labels.to_vec())?;
    if let Some(s) = l.spec() {
        gr = gr.with_spec(s.clone());
    }
    Ok(gr)
}

/// {v : [v, s] in S for every s in a basis of S}.
pub fn normalizer_of_span(l: &LieAlg, s: &Subspace) -> Subspace {
    let f = l.field();
    let d = l.dim();
    if s.dim() == 0 {
        return Subspace::full(d);
    }
    let mut rows: Vec<Vec<Fe>> = Vec::new();
    for sv in s.basis() {
        // [v, s] = ad(s) v in characteristic two
        let m = l.ad(sv);
        let cols: Vec<Vec<Fe>> = (0..d)
            .map(|a| {
                let mut c = m.col(a);
                s.reduce(&mut c, f);
                c
            })
            .collect();
        for i in 0..d {
            let row: Vec<Fe> = cols.iter().map(|c| c[i]).collect();
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return Subspace::full(d);
    }
    Subspace::span(d, &Mat::from_rows(&rows).nullspace(f), f)
}

/// {x in S : [x, L] ⊆ S}.
fn filtration_step(l: &LieAlg, s: &Subspace) -> Subspace {
    let f = l.field();
    let d = l.dim();
    let k = s.dim();
    if k == 0 {
        return s.clone();
    }
    let mut rows: Vec<Vec<Fe>> = Vec::new();
    let images: Vec<Mat> = s.basis().iter().map(|v| l.ad(v)).collect();
    for b in 0..d {
        let reduced: Vec<Vec<Fe>> = images
            .iter()
            .map(|m| {
                let mut c = m.col(b);
                s.reduce(&mut c, f);
                c
            })
            .collect();
        for i in 0..d {
            let row: Vec<Fe> = reduced.iter().map(|c| c[i]).collect();
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return s.clone();
    }
    let coeffs = Mat::from_rows(&rows).nullspace(f);
    let vs: Vec<Vec<Fe>> = coeffs
        .iter()
        .map(|c| {
            let mut v = vec![Fe::ZERO; d];
            for (x, row) in c.iter().zip(s.basis()) {
                crate::linalg::axpy(&mut v, *x, row, f);
            }
            v
        })
        .collect();
    Subspace::span(d, &vs, f)
}

/// Dimensions of L/L_(0), L_(0)/L_(1), ... for the filtration that starts at
/// L_(0) and continues with L_(i+1) = {x in L_(i) : [x, L] ⊆ L_(i)}.
pub fn intrinsic_filtration_dims(l: &LieAlg, l0: &Subspace) -> Vec<usize> {
    let mut dims = vec![l.dim() - l0.dim()];
    let mut cur = l0.clone();
    while cur.dim() > 0 {
        let next = filtration_step(l, &cur);
        if next.dim() == cur.dim() {
            dims.push(cur.dim());
            break;
        }
        dims.push(cur.dim() - next.dim());
        cur = next;
    }
    dims
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub dim: usize,
    pub derived_dims: Vec<usize>,
    pub center_dim: usize,
    pub simple: bool,
    /// None when no certified mode was feasible.
    pub r: Option<usize>,
    pub r_note: String,
    pub argmin_points: Option<usize>,
    pub graded_dims: Option<Vec<usize>>,
    pub normalizer_dim: Option<usize>,
}

pub fn default_simplicity_method(l: &LieAlg, seed: u64) -> SimplicityMethod {
    if l.field().k() == 1 && l.dim() <= 16 {
        SimplicityMethod::Exhaustive
    } else {
        SimplicityMethod::Norton { seed }
    }
}

/// Basis-free invariants; distinct fingerprints certify non-isomorphism.
pub fn fingerprint(l: &LieAlg, seed: u64) -> Result<Fingerprint> {
    let f = l.field();
    let d = l.dim();
    let derived = derived_series(l);
    let simple = is_simple(l, default_simplicity_method(l, seed))?.simple;
    let mut fp = Fingerprint {
        dim: d,
        derived_dims: derived.dims,
        center_dim: center(l).dim(),
        simple,
        r: None,
        r_note: "omitted: no certified mode".into(),
        argmin_points: None,
        graded_dims: None,
        normalizer_dim: None,
    };
    if f.k() == 1 && d <= EXHAUSTIVE_RANK_MAX_DIM && d > 0 {
        let mr = exhaustive_min_rank(l)?;
        fp.r = Some(mr.r);
        fp.r_note = "exhaustive".into();
        fp.argmin_points = Some(mr.argmin.len());
        if mr.argmin.len() == 1 {
            let line = Subspace::span(d, &mr.argmin, f);
            let n = normalizer_of_span(l, &line);
            fp.normalizer_dim = Some(n.dim());
            fp.graded_dims = Some(intrinsic_filtration_dims(l, &n));
        }
    }
    Ok(fp)
}

pub fn fingerprints_distinct(a: &Fingerprint, b: &Fingerprint) -> bool {
    a != b
}

/// rank of {[D, E_j]}.
pub fn witness_rank(l: &LieAlg, d: &[Fe], es: &[Vec<Fe>]) -> usize {
    let f = l.field();
    let rows: Vec<Vec<Fe>> = es.iter().map(|e| l.bracket(d, e)).collect();
    if rows.is_empty() {
        return 0;
    }
    Mat::from_rows(&rows).rank(f)
}

/// Sorted projective representatives, for comparing argmin sets.
pub fn projective_set(vs: &[Vec<Fe>], f: &Field) -> BTreeSet<Vec<Fe>> {
    vs.iter().map(|v| normalize_projective(v, f)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divpow::{Heights, Monomial};
    use crate::hamlie::{build_algebra, AlgebraSpec, Variant};
    use crate::sforms::FormTag;

    fn alg(tag: FormTag, h: [u8; 3], v: Variant) -> LieAlg {
        build_algebra(&AlgebraSpec::builtin(tag, Heights::new(&h).unwrap(), v)).unwrap()
    }

    fn index_of(l: &LieAlg, e: &[u32]) -> usize {
        let m = Monomial::new(e);
        l.labels().unwrap().iter().position(|x| x.as_monomial() == Some(m)).unwrap()
    }

    #[test]
    fn derived_dims_small() {
        assert_eq!(derived_series(&alg(FormTag::Omega1, [1, 1, 1], Variant::P)).dims, vec![7, 6, 6]);
        assert_eq!(derived_series(&alg(FormTag::Omega4, [1, 1, 1], Variant::P)).dims, vec![7, 7]);
    }

    #[test]
    fn abelian_series() {
        let l = LieAlg::from_table(Field::gf2(), 4, vec![Vec::new(); 16]).unwrap();
        assert_eq!(derived_series(&l).dims, vec![4, 0]);
        assert_eq!(center(&l).dim(), 4);
        assert!(!is_simple(&l, SimplicityMethod::Exhaustive).unwrap().simple);
    }

    #[test]
    fn rank_examples() {
        let l = alg(FormTag::Omega1, [1, 1, 2], Variant::P);
        let top = index_of(&l, &[1, 1, 3]);
        assert_eq!(rank(&l.ad(&l.unit(top)), l.field()), 4);
        let l = alg(FormTag::Omega4, [1, 1, 1], Variant::P);
        let top = index_of(&l, &[1, 1, 1]);
        assert_eq!(rank(&l.ad(&l.unit(top)), l.field()), 3);
        assert_eq!(rank(&Mat::zeros(3, 3), l.field()), 0);
    }

    #[test]
    fn simplicity_small() {
        for (tag, h, v, expect) in [
            (FormTag::Omega4, [1, 1, 1], Variant::P, true),
            (FormTag::Omega3, [1, 1, 1], Variant::P, false),
            (FormTag::Omega1, [1, 1, 2], Variant::P, true),
        ] {
            let l = alg(tag, h, v);
            let a = is_simple(&l, SimplicityMethod::Exhaustive).unwrap();
            let b = is_simple(&l, SimplicityMethod::Norton { seed: 7 }).unwrap();
            assert_eq!(a.simple, expect, "{tag} {h:?}");
            assert_eq!(b.simple, expect, "{tag} {h:?}");
        }
    }

    #[test]
    fn normalizer_of_top_line() {
        for tag in [FormTag::Omega3, FormTag::Omega4] {
            let l = alg(tag, [2, 1, 1], Variant::P);
            let top = index_of(&l, &[3, 1, 1]);
            let s = Subspace::span(l.dim(), &[l.unit(top)], l.field());
            assert_eq!(normalizer_of_span(&l, &s).dim(), 12, "{tag}");
        }
        let l = alg(FormTag::Omega3, [1, 1, 1], Variant::P);
        assert_eq!(normalizer_of_span(&l, &Subspace::full(7)).dim(), 7);
    }

    #[test]
    fn grading_examples() {
        let l = alg(FormTag::Omega1, [1, 1, 1], Variant::P);
        let g = grading_profile(&l).unwrap();
        assert_eq!((g.min_lie_degree, g.dims), (-1, vec![3, 3, 1]));
        let l4 = alg(FormTag::Omega4, [1, 1, 1], Variant::P);
        assert!(graded_algebra(&l4).unwrap().same_structure(&l));
        assert!(graded_algebra(&l).unwrap().same_structure(&l));
    }
}
