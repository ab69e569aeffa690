//! Hamiltonian Lie algebras P, P̃ and P^(1) from a Hamiltonian 2-form.
//!
//! Elements are functions modulo constants; {f, g} = sum ω̄_ij ∂_i f ∂_j g
//! where ω̄ is the inverse Gram matrix, and constants are dropped as they
//! are produced.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::divpow::{Derivation, Heights, MonoKind, Monomial, Poly, Ring};
use crate::error::{Error, Result};
use crate::gfield::{Fe, Field};
use crate::linalg::{axpy, Mat};
use crate::sforms::{builtin_form, gram_inverse, is_closed, is_nonalternating, is_nondegenerate, FormTag, SymForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    P,
    Ptilde,
    P1,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::P => "P",
            Variant::Ptilde => "Ptilde",
            Variant::P1 => "P1",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "P" => Some(Variant::P),
            "Ptilde" => Some(Variant::Ptilde),
            "P1" => Some(Variant::P1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormSpec {
    Builtin(FormTag),
    Explicit(SymForm),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraSpec {
    pub heights: Heights,
    pub form: FormSpec,
    pub field_exp: u32,
    pub variant: Variant,
}

impl AlgebraSpec {
    pub fn builtin(tag: FormTag, heights: Heights, variant: Variant) -> AlgebraSpec {
        AlgebraSpec { heights, form: FormSpec::Builtin(tag), field_exp: 1, variant }
    }

    pub fn ring(&self) -> Result<Ring> {
        Ok(Ring::new(self.heights, Field::get(self.field_exp)?))
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.heights;
        if h.n() != 3 {
            return Err(Error::Precondition("Hamiltonian algebras here use three variables".into()));
        }
        if let FormSpec::Builtin(tag) = self.form {
            let (m1, m2, m3) = (h.get(0), h.get(1), h.get(2));
            match tag {
                FormTag::Omega2 if !(m1 < m2 && !(m1..=m2).contains(&m3)) => {
                    return Err(Error::Precondition(format!(
                        "omega2 needs m1 < m2 and m3 outside [m1, m2], got {h}"
                    )))
                }
                FormTag::Omega4 if m3 != 1 => {
                    return Err(Error::Precondition(format!("omega4 needs m3 = 1, got {h}")))
                }
                _ => {}
            }
        }
        let w = self.form()?;
        if !is_closed(&w).closed {
            return Err(Error::Precondition("form is not closed".into()));
        }
        if !is_nondegenerate(&w)? {
            return Err(Error::Precondition("form is degenerate".into()));
        }
        if !is_nonalternating(&w)? {
            return Err(Error::Precondition("form is alternating".into()));
        }
        Ok(())
    }

    pub fn form(&self) -> Result<SymForm> {
        let ring = self.ring()?;
        match &self.form {
            FormSpec::Builtin(tag) => builtin_form(*tag, ring),
            FormSpec::Explicit(w) => {
                if w.degree() != 2 {
                    return Err(Error::Input("explicit form must be a 2-form".into()));
                }
                w.ring().check_same(&ring)?;
                Ok(w.clone())
            }
        }
    }

    pub fn label(&self) -> String {
        let form = match &self.form {
            FormSpec::Builtin(t) => t.name().to_string(),
            FormSpec::Explicit(_) => "explicit".to_string(),
        };
        format!("{}(3,{},{})", self.variant.name(), self.heights, form)
    }
}

/// Poisson structure of a Hamiltonian form: ω̄ = Gram(ω)^{-1}.
#[derive(Debug, Clone)]
pub struct Poisson {
    ring: Ring,
    wbar: Vec<Vec<Poly>>,
}

impl Poisson {
    pub fn new(w: &SymForm) -> Result<Poisson> {
        Ok(Poisson { ring: w.ring(), wbar: gram_inverse(w)? })
    }

    pub fn from_gram_inverse(ring: Ring, wbar: Vec<Vec<Poly>>) -> Poisson {
        Poisson { ring, wbar }
    }

    pub fn wbar(&self) -> &[Vec<Poly>] {
        &self.wbar
    }

    /// sum ω̄_ij ∂_i f ∂_j g, constant term included.
    pub fn bracket_raw(&self, f: &Poly, g: &Poly) -> Result<Poly> {
        f.ring().check_same(&self.ring)?;
        g.ring().check_same(&self.ring)?;
        let n = self.ring.n();
        let df: Vec<Poly> = (0..n).map(|i| f.partial(i)).collect();
        let dg: Vec<Poly> = (0..n).map(|j| g.partial(j)).collect();
        let mut r = Poly::zero(self.ring);
        for i in 0..n {
            if df[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if self.wbar[i][j].is_zero() || dg[j].is_zero() {
                    continue;
                }
                r.add_assign_unchecked(&self.wbar[i][j].mul_unchecked(&df[i]).mul_unchecked(&dg[j]));
            }
        }
        Ok(r)
    }

    /// The bracket in O/K.
    pub fn bracket(&self, f: &Poly, g: &Poly) -> Result<Poly> {
        Ok(self.bracket_raw(f, g)?.without_constant())
    }

    /// D_f = sum ω̄_ij ∂_j f ∂_i.
    pub fn hamiltonian_field(&self, f: &Poly) -> Result<Derivation> {
        f.ring().check_same(&self.ring)?;
        let n = self.ring.n();
        let df: Vec<Poly> = (0..n).map(|j| f.partial(j)).collect();
        let coeffs = (0..n)
            .map(|i| {
                let mut c = Poly::zero(self.ring);
                for j in 0..n {
                    c.add_assign_unchecked(&self.wbar[i][j].mul_unchecked(&df[j]));
                }
                c
            })
            .collect();
        Derivation::new(self.ring, coeffs)
    }
}

/// A basis element: a single monomial or, after re-basing, a combination.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BasisLabel {
    pub terms: Vec<(Monomial, Fe)>,
}

impl BasisLabel {
    pub fn monomial(a: Monomial) -> BasisLabel {
        BasisLabel { terms: vec![(a, Fe::ONE)] }
    }

    pub fn as_monomial(&self) -> Option<Monomial> {
        match self.terms.as_slice() {
            [(a, c)] if *c == Fe::ONE => Some(*a),
            _ => None,
        }
    }

    /// Degree of the lowest-degree part.
    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(a, _)| a.degree()).min().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.terms.iter().all(|(a, _)| a.degree() == self.degree())
    }

    pub fn to_poly(&self, ring: Ring) -> Result<Poly> {
        Poly::from_terms(ring, self.terms.iter().copied())
    }
}

impl fmt::Debug for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(a, c)| if *c == Fe::ONE { format!("{a:?}") } else { format!("{c}·{a:?}") })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

pub type SparseVec = Vec<(u32, Fe)>;

/// A Lie algebra given by structure constants [e_a, e_b] = sum c_ab^g e_g.
#[derive(Clone)]
pub struct LieAlg {
    field: &'static Field,
    dim: usize,
    table: Vec<SparseVec>,
    labels: Option<Vec<BasisLabel>>,
    spec: Option<AlgebraSpec>,
}

impl fmt::Debug for LieAlg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieAlg(dim {} over GF(2^{}))", self.dim, self.field.k())
    }
}

impl LieAlg {
    /// From a full table indexed a * dim + b.
    pub fn from_table(field: &'static Field, dim: usize, table: Vec<SparseVec>) -> Result<LieAlg> {
        if table.len() != dim * dim {
            return Err(Error::Input("structure table has the wrong size".into()));
        }
        if table.iter().flatten().any(|(g, _)| *g as usize >= dim) {
            return Err(Error::Input("structure constant index out of range".into()));
        }
        Ok(LieAlg { field, dim, table, labels: None, spec: None })
    }

    pub fn with_labels(mut self, labels: Vec<BasisLabel>) -> Result<LieAlg> {
        if labels.len() != self.dim {
            return Err(Error::Input("label count differs from dimension".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_spec(mut self, spec: AlgebraSpec) -> LieAlg {
        self.spec = Some(spec);
        self
    }

    pub fn field(&self) -> &'static Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> Option<&[BasisLabel]> {
        self.labels.as_deref()
    }

    pub fn spec(&self) -> Option<&AlgebraSpec> {
        self.spec.as_ref()
    }

    /// Total degree of each basis label, when labels are known.
    pub fn degrees(&self) -> Option<Vec<u32>> {
        self.labels.as_ref().map(|ls| ls.iter().map(BasisLabel::degree).collect())
    }

    #[inline]
    pub fn sc(&self, a: usize, b: usize) -> &SparseVec {
        &self.table[a * self.dim + b]
    }

    pub fn unit(&self, a: usize) -> Vec<Fe> {
        let mut v = vec![Fe::ZERO; self.dim];
        v[a] = Fe::ONE;
        v
    }

    pub fn bracket(&self, u: &[Fe], v: &[Fe]) -> Vec<Fe> {
        let f = self.field;
        let mut out = vec![Fe::ZERO; self.dim];
        for (a, &x) in u.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (b, &y) in v.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let c = f.mul(x, y);
                for &(g, s) in self.sc(a, b) {
                    out[g as usize] += f.mul(c, s);
                }
            }
        }
        out
    }

    /// Matrix of ad(v): column b is [v, e_b].
    pub fn ad(&self, v: &[Fe]) -> Mat {
        let f = self.field;
        let d = self.dim;
        let mut m = Mat::zeros(d, d);
        for (a, &x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for b in 0..d {
                for &(g, s) in self.sc(a, b) {
                    m.data[g as usize * d + b] += f.mul(x, s);
                }
            }
        }
        m
    }

    /// Structure constants in a new basis; columns of `p` are the new vectors.
    pub fn change_basis(&self, p: &Mat) -> Result<LieAlg> {
        let f = self.field;
        let pinv = p.inverse(f)?;
        let d = self.dim;
        let cols: Vec<Vec<Fe>> = (0..d).map(|j| p.col(j)).collect();
        let table: Vec<SparseVec> = (0..d * d)
            .into_par_iter()
            .map(|ab| {
                let br = self.bracket(&cols[ab / d], &cols[ab % d]);
                let c = pinv.mul_vec(&br, f);
                c.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(g, x)| (g as u32, *x)).collect()
            })
            .collect();
        LieAlg::from_table(f, d, table)
    }

    /// The subalgebra spanned by reduced echelon rows; fails if not closed.
    pub fn subalgebra(&self, rows: &[Vec<Fe>], pivots: &[usize]) -> Result<LieAlg> {
        let f = self.field;
        let k = rows.len();
        let table: Vec<Result<SparseVec>> = (0..k * k)
            .into_par_iter()
            .map(|ab| {
                let br = self.bracket(&rows[ab / k], &rows[ab % k]);
                let coords: Vec<Fe> = pivots.iter().map(|&p| br[p]).collect();
                let mut rest = br.clone();
                for (c, row) in coords.iter().zip(rows) {
                    axpy(&mut rest, *c, row, f);
                }
                if rest.iter().any(|x| !x.is_zero()) {
                    return Err(Error::Precondition("span is not a subalgebra".into()));
                }
                Ok(coords.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(g, x)| (g as u32, *x)).collect())
            })
            .collect();
        let table = table.into_iter().collect::<Result<Vec<_>>>()?;
        let mut sub = LieAlg::from_table(f, k, table)?;
        if let Some(ls) = &self.labels {
            let labels = rows
                .iter()
                .map(|r| {
                    let mut acc: BTreeMap<Monomial, Fe> = BTreeMap::new();
                    for (i, c) in r.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        for (a, x) in &ls[i].terms {
                            *acc.entry(*a).or_insert(Fe::ZERO) += f.mul(*c, *x);
                        }
                    }
                    let mut terms: Vec<(Monomial, Fe)> = acc.into_iter().filter(|(_, x)| !x.is_zero()).collect();
                    terms.sort_by(|a, b| Monomial::graded_cmp(&a.0, &b.0));
                    BasisLabel { terms }
                })
                .collect();
            sub.labels = Some(labels);
        }
        Ok(sub)
    }

    pub fn same_structure(&self, other: &LieAlg) -> bool {
        self.field == other.field && self.dim == other.dim && self.table == other.table
    }
}

/// Basis monomials of P (all α != 0) and, for P̃, the three top powers, in
/// graded lexicographic order.
pub fn basis_monomials(h: &Heights, variant: Variant) -> Vec<Monomial> {
    let mut ms: Vec<Monomial> = h.monomials().into_iter().filter(|a| !a.is_one()).collect();
    if variant == Variant::Ptilde {
        for i in 0..h.n() {
            ms.push(h.top_power(i));
        }
        ms.sort_by(Monomial::graded_cmp);
    }
    ms
}

fn structure_table(ring: Ring, poisson: &Poisson, basis: &[Monomial]) -> Result<Vec<SparseVec>> {
    let index: BTreeMap<Monomial, u32> = basis.iter().enumerate().map(|(i, a)| (*a, i as u32)).collect();
    let polys: Vec<Poly> = basis.iter().map(|a| Poly::monomial(ring, *a, Fe::ONE)).collect::<Result<_>>()?;
    let d = basis.len();
    let rows: Vec<Result<SparseVec>> = (0..d * d)
        .into_par_iter()
        .map(|ab| {
            let br = poisson.bracket(&polys[ab / d], &polys[ab % d])?;
            let mut v: SparseVec = Vec::with_capacity(br.len());
            for (m, c) in br.terms() {
                let g = index
                    .get(m)
                    .ok_or_else(|| Error::Internal(format!("bracket left the basis at {m:?}")))?;
                v.push((*g, *c));
            }
            v.sort_unstable_by_key(|x| x.0);
            Ok(v)
        })
        .collect();
    rows.into_iter().collect()
}

pub fn build_algebra(spec: &AlgebraSpec) -> Result<LieAlg> {
    spec.validate()?;
    let ring = spec.ring()?;
    let w = spec.form()?;
    let poisson = Poisson::new(&w)?;
    let base_variant = if spec.variant == Variant::Ptilde { Variant::Ptilde } else { Variant::P };
    let basis = basis_monomials(&spec.heights, base_variant);
    let table = structure_table(ring, &poisson, &basis)?;
    let labels = basis.iter().map(|a| BasisLabel::monomial(*a)).collect();
    let alg = LieAlg::from_table(ring.field, basis.len(), table)?.with_labels(labels)?;
    match spec.variant {
        Variant::P | Variant::Ptilde => Ok(alg.with_spec(spec.clone())),
        Variant::P1 => {
            let derived = crate::lstruct::derived_subalgebra_basis(&alg);
            Ok(alg.subalgebra(derived.basis(), derived.pivots())?.with_spec(spec.clone()))
        }
    }
}

/// Lie degree of a monomial, |α| - 2.
pub fn lie_degree(a: &Monomial) -> i32 {
    a.degree() as i32 - 2
}

/// Largest Lie degree, sum 2^{m_i} - 5, carried by x-bar.
pub fn top_lie_degree(h: &Heights) -> i32 {
    (0..h.n()).map(|i| h.top(i) as i32).sum::<i32>() - 5
}

pub fn is_top_power(h: &Heights, a: &Monomial) -> bool {
    h.classify(a) == MonoKind::TopPower
}
