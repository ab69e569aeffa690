//! JSON documents for polynomials, 2-forms, automorphism words and algebras.
//!
//! Variable indices are 1-based in every document.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::admiso::{Admissible, AutoGen};
use crate::divpow::{Heights, Monomial, Poly, Ring, MAX_VARS};
use crate::error::{Error, Result};
use crate::gfield::{Fe, Field, FieldDescriptor};
use crate::hamlie::{AlgebraSpec, BasisLabel, FormSpec, LieAlg, SparseVec, Variant};
use crate::sforms::{builtin_form, FormTag, SymForm};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub alpha: Vec<u32>,
    pub coeff: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heights: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDescriptor>,
    pub terms: Vec<TermDoc>,
}

pub fn field_from_descriptor(d: &FieldDescriptor) -> Result<&'static Field> {
    let f = Field::get(d.k)?;
    if f.modulus() != d.irreducible_bits {
        return Err(Error::Input(format!(
            "field GF(2^{}) uses modulus {:#b}, document has {:#b}",
            d.k,
            f.modulus(),
            d.irreducible_bits
        )));
    }
    Ok(f)
}

fn ring_from_parts(heights: &[u8], field: Option<&FieldDescriptor>) -> Result<Ring> {
    let f = match field {
        Some(d) => field_from_descriptor(d)?,
        None => Field::gf2(),
    };
    Ok(Ring::new(Heights::new(heights)?, f))
}

fn terms_doc(p: &Poly) -> Vec<TermDoc> {
    let n = p.ring().n();
    let mut ts: Vec<TermDoc> = p.terms().map(|(a, c)| TermDoc { alpha: a.exps(n).to_vec(), coeff: c.0 }).collect();
    ts.sort_by(|x, y| x.alpha.cmp(&y.alpha));
    ts
}

pub fn poly_to_doc(p: &Poly) -> PolyDoc {
    PolyDoc {
        heights: Some(p.heights().as_slice().to_vec()),
        field: Some(p.field().descriptor()),
        terms: terms_doc(p),
    }
}

fn monomial_from(alpha: &[u32], n: usize) -> Result<Monomial> {
    if alpha.len() != n || n > MAX_VARS {
        return Err(Error::Input(format!("exponent {alpha:?} has the wrong length for {n} variables")));
    }
    Ok(Monomial::new(alpha))
}

fn terms_from(ts: &[TermDoc], ring: Ring) -> Result<Vec<(Monomial, Fe)>> {
    ts.iter()
        .map(|t| {
            let c = ring.field.element(t.coeff as u32)?;
            Ok((monomial_from(&t.alpha, ring.n())?, c))
        })
        .collect()
}

/// A polynomial; `ctx` supplies the ring when the document omits it.
pub fn poly_from_doc(doc: &PolyDoc, ctx: Option<Ring>) -> Result<Poly> {
    let ring = match (&doc.heights, ctx) {
        (Some(h), Some(r)) => {
            let own = ring_from_parts(h, doc.field.as_ref().or(Some(&r.field.descriptor())))?;
            own.check_same(&r)?;
            r
        }
        (Some(h), None) => ring_from_parts(h, doc.field.as_ref())?,
        (None, Some(r)) => r,
        (None, None) => return Err(Error::Input("polynomial without heights".into())),
    };
    let terms = terms_from(&doc.terms, ring)?;
    for (a, _) in &terms {
        if !ring.heights.in_range(a) {
            return Err(Error::Input(format!("exponent {:?} is out of range for {}", a.exps(ring.n()), ring.heights)));
        }
    }
    Poly::from_terms(ring, terms)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Form2Doc {
    pub heights: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDescriptor>,
    #[serde(default)]
    pub squares: BTreeMap<String, PolyDoc>,
    #[serde(default)]
    pub mixed: BTreeMap<String, PolyDoc>,
}

pub fn form2_to_doc(w: &SymForm) -> Result<Form2Doc> {
    if w.degree() != 2 {
        return Err(Error::Input("only 2-forms have a document form".into()));
    }
    let n = w.ring().n();
    let mut squares = BTreeMap::new();
    let mut mixed = BTreeMap::new();
    for i in 0..n {
        let s = w.square(i);
        if !s.is_zero() {
            squares.insert(format!("{}", i + 1), poly_to_doc(&s));
        }
        for j in i + 1..n {
            let m = w.mixed(i, j);
            if !m.is_zero() {
                mixed.insert(format!("{},{}", i + 1, j + 1), poly_to_doc(&m));
            }
        }
    }
    Ok(Form2Doc {
        heights: w.heights().as_slice().to_vec(),
        field: Some(w.field().descriptor()),
        squares,
        mixed,
    })
}

fn parse_index(s: &str, n: usize) -> Result<usize> {
    let i: usize = s.trim().parse().map_err(|_| Error::Input(format!("bad variable index {s:?}")))?;
    if i == 0 || i > n {
        return Err(Error::Input(format!("variable index {i} outside 1..={n}")));
    }
    Ok(i - 1)
}

pub fn form2_from_doc(doc: &Form2Doc) -> Result<SymForm> {
    let ring = ring_from_parts(&doc.heights, doc.field.as_ref())?;
    let n = ring.n();
    let mut w = SymForm::zero(ring, 2);
    for (k, p) in &doc.squares {
        let i = parse_index(k, n)?;
        w.set_square(i, &poly_from_doc(p, Some(ring))?)?;
    }
    for (k, p) in &doc.mixed {
        let (a, b) = k.split_once(',').ok_or_else(|| Error::Input(format!("mixed key {k:?} is not \"i,j\"")))?;
        let (i, j) = (parse_index(a, n)?, parse_index(b, n)?);
        if i == j {
            return Err(Error::Input(format!("mixed key {k:?} repeats an index")));
        }
        w.set_mixed(i.min(j), i.max(j), &poly_from_doc(p, Some(ring))?)?;
    }
    Ok(w)
}

/// Either a builtin tag such as "omega4" (given a ring) or a Form2 document.
pub fn form2_from_value(v: &Value, ctx: Option<Ring>) -> Result<SymForm> {
    if let Value::String(s) = v {
        let tag = FormTag::parse(s).ok_or_else(|| Error::Input(format!("unknown form tag {s:?}")))?;
        let ring = ctx.ok_or_else(|| Error::Input("builtin form tag needs heights".into()))?;
        return builtin_form(tag, ring);
    }
    let doc: Form2Doc = serde_json::from_value(v.clone()).map_err(|e| Error::Input(format!("form document: {e}")))?;
    let w = form2_from_doc(&doc)?;
    if let Some(r) = ctx {
        w.ring().check_same(&r)?;
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GenDoc {
    Addsub {
        i: usize,
        j: usize,
        t: u32,
        c: u16,
    },
    Scale {
        c: Vec<u16>,
    },
    Linear {
        m: Vec<Vec<u16>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        heights_out: Option<Vec<u8>>,
    },
    Substitution {
        images: Vec<Vec<TermDoc>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutoDoc {
    pub word: Vec<GenDoc>,
    pub heights: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldDescriptor>,
}

fn gen_to_doc(g: &AutoGen, ring: Ring) -> GenDoc {
    match g {
        AutoGen::AddSub { i, j, t, c } => GenDoc::Addsub { i: i + 1, j: j + 1, t: *t, c: c.0 },
        AutoGen::Scale { c } => GenDoc::Scale { c: c.iter().map(|x| x.0).collect() },
        AutoGen::Linear { m, heights_out } => GenDoc::Linear {
            m: m.iter().map(|r| r.iter().map(|x| x.0).collect()).collect(),
            heights_out: heights_out.map(|h| h.as_slice().to_vec()),
        },
        AutoGen::Substitution { images } => GenDoc::Substitution {
            images: images.iter().map(|p| terms_doc(&p.reinterpret(ring).unwrap_or_else(|_| p.clone()))).collect(),
        },
    }
}

pub fn auto_to_doc(a: &Admissible) -> AutoDoc {
    let mut ring = a.source();
    let mut word = Vec::new();
    for g in a.word() {
        word.push(gen_to_doc(g, ring));
        if let Ok((_, next)) = g.images(ring) {
            ring = next;
        }
    }
    AutoDoc {
        word,
        heights: a.source().heights.as_slice().to_vec(),
        field: Some(a.source().field.descriptor()),
    }
}

pub fn auto_from_doc(doc: &AutoDoc, field_override: Option<&'static Field>) -> Result<Admissible> {
    let mut ring = ring_from_parts(&doc.heights, doc.field.as_ref())?;
    if let Some(f) = field_override {
        if doc.field.is_none() {
            ring = Ring::new(ring.heights, f);
        }
    }
    let source = ring;
    let f = ring.field;
    let n = ring.n();
    let el = |b: u16| f.element(b as u32);
    let mut word = Vec::new();
    for g in &doc.word {
        let gen = match g {
            GenDoc::Addsub { i, j, t, c } => AutoGen::AddSub {
                i: parse_index(&i.to_string(), n)?,
                j: parse_index(&j.to_string(), n)?,
                t: *t,
                c: el(*c)?,
            },
            GenDoc::Scale { c } => AutoGen::Scale { c: c.iter().map(|&x| el(x)).collect::<Result<_>>()? },
            GenDoc::Linear { m, heights_out } => AutoGen::Linear {
                m: m.iter().map(|r| r.iter().map(|&x| el(x)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?,
                heights_out: heights_out.as_ref().map(|h| Heights::new(h)).transpose()?,
            },
            GenDoc::Substitution { images } => AutoGen::Substitution {
                images: images
                    .iter()
                    .map(|ts| Poly::from_terms(ring, terms_from(ts, ring)?))
                    .collect::<Result<_>>()?,
            },
        };
        let (_, next) = gen.images(ring)?;
        word.push(gen);
        ring = next;
    }
    Admissible::new(source, word)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecDoc {
    pub heights: Vec<u8>,
    pub form: Value,
    pub field_exp: u32,
    pub variant: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelDoc {
    Alpha(Vec<u32>),
    Combination { terms: Vec<TermDoc> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScDoc {
    pub a: usize,
    pub b: usize,
    pub c: Vec<(u32, u16)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDoc {
    pub field: FieldDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpecDoc>,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<LabelDoc>>,
    pub sc: Vec<ScDoc>,
}

pub fn spec_to_doc(s: &AlgebraSpec) -> Result<SpecDoc> {
    let form = match &s.form {
        FormSpec::Builtin(t) => Value::String(t.name().to_string()),
        FormSpec::Explicit(w) => serde_json::to_value(form2_to_doc(w)?).map_err(|e| Error::Internal(e.to_string()))?,
    };
    Ok(SpecDoc {
        heights: s.heights.as_slice().to_vec(),
        form,
        field_exp: s.field_exp,
        variant: s.variant.name().to_string(),
    })
}

pub fn spec_from_doc(d: &SpecDoc) -> Result<AlgebraSpec> {
    let heights = Heights::new(&d.heights)?;
    let variant = Variant::parse(&d.variant).ok_or_else(|| Error::Input(format!("unknown variant {:?}", d.variant)))?;
    let form = match &d.form {
        Value::String(s) => FormSpec::Builtin(FormTag::parse(s).ok_or_else(|| Error::Input(format!("unknown form tag {s:?}")))?),
        v => {
            let ring = Ring::new(heights, Field::get(d.field_exp)?);
            FormSpec::Explicit(form2_from_value(v, Some(ring))?)
        }
    };
    Ok(AlgebraSpec { heights, form, field_exp: d.field_exp, variant })
}

pub fn algebra_to_doc(l: &LieAlg) -> Result<AlgebraDoc> {
    let d = l.dim();
    let n = l.spec().map_or(MAX_VARS, |s| s.heights.n());
    let basis = l.labels().map(|ls| {
        ls.iter()
            .map(|x| match x.as_monomial() {
                Some(a) => LabelDoc::Alpha(a.exps(n).to_vec()),
                None => LabelDoc::Combination {
                    terms: x.terms.iter().map(|(a, c)| TermDoc { alpha: a.exps(n).to_vec(), coeff: c.0 }).collect(),
                },
            })
            .collect()
    });
    let mut sc = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            let v = l.sc(a, b);
            if !v.is_empty() {
                let mut c: Vec<(u32, u16)> = v.iter().map(|(g, x)| (*g, x.0)).collect();
                c.sort_unstable();
                sc.push(ScDoc { a, b, c });
            }
        }
    }
    Ok(AlgebraDoc {
        field: l.field().descriptor(),
        spec: l.spec().map(spec_to_doc).transpose()?,
        dim: d,
        basis,
        sc,
    })
}

pub fn algebra_from_doc(doc: &AlgebraDoc) -> Result<LieAlg> {
    let f = field_from_descriptor(&doc.field)?;
    let d = doc.dim;
    let mut table: Vec<SparseVec> = vec![Vec::new(); d * d];
    for e in &doc.sc {
        if e.a >= d || e.b >= d || e.a == e.b {
            return Err(Error::Input(format!("structure constant entry ({}, {}) is invalid", e.a, e.b)));
        }
        let mut v: BTreeMap<u32, Fe> = BTreeMap::new();
        for &(g, c) in &e.c {
            let x = v.entry(g).or_insert(Fe::ZERO);
            *x += f.element(c as u32)?;
        }
        let v: SparseVec = v.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        table[e.a * d + e.b] = v.clone();
        table[e.b * d + e.a] = v;
    }
    let mut l = LieAlg::from_table(f, d, table)?;
    let spec = doc.spec.as_ref().map(spec_from_doc).transpose()?;
    if let Some(labels) = &doc.basis {
        let n = spec.as_ref().map_or(3, |s| s.heights.n());
        let ls = labels
            .iter()
            .map(|x| {
                Ok(match x {
                    LabelDoc::Alpha(a) => BasisLabel::monomial(monomial_from(a, n)?),
                    LabelDoc::Combination { terms } => BasisLabel {
                        terms: terms
                            .iter()
                            .map(|t| Ok((monomial_from(&t.alpha, n)?, f.element(t.coeff as u32)?)))
                            .collect::<Result<_>>()?,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        l = l.with_labels(ls)?;
    }
    if let Some(s) = spec {
        l = l.with_spec(s);
    }
    Ok(l)
}

pub fn to_json_pretty<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Internal(e.to_string()))
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Input(format!("json: {e}")))
}
