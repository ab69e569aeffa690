use std::fs;
use std::io::Write;
use std::path::Path;

use hamlie_core::bilin::BilinPair;
use hamlie_core::divpow::{Heights, Monomial, Ring};
use hamlie_core::gfield::{Fe, Field, FieldDescriptor};
use hamlie_core::hamlie::{build_algebra, AlgebraSpec, FormSpec, LieAlg, Variant};
use hamlie_core::linalg::Subspace;
use hamlie_core::lstruct::{
    center, default_simplicity_method, derived_series, grading_profile, is_simple, min_ad_rank, normalizer_of_span,
    GradingProfile, RankMode, SimplicityMethod,
};
use hamlie_core::serial::{self, AlgebraDoc, AutoDoc, PolyDoc};
use hamlie_core::sforms::{is_closed, is_nonalternating, is_nondegenerate, FormTag, SymForm};
use serde::Serialize;
use serde_json::Value;

use crate::{Check, CliResult, Failure, Format, Global};

pub fn write_output(g: &Global, text: &str) -> CliResult<()> {
    match &g.out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

pub fn parse_heights(s: &str) -> CliResult<Heights> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<u8>().map_err(|_| invalid(format!("bad height {x:?}"))))
        .collect::<CliResult<Vec<u8>>>()?;
    Ok(Heights::new(&v)?)
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(serial::to_json_pretty(v)?)
}

/// A builtin tag needs a ring; a file carries its own heights and field.
fn resolve_form(arg: &str, ring: Option<Ring>) -> CliResult<SymForm> {
    if let Some(tag) = FormTag::parse(arg) {
        let ring = ring.ok_or_else(|| invalid("a builtin form tag needs --heights"))?;
        return Ok(hamlie_core::sforms::builtin_form(tag, ring)?);
    }
    let v = read_json(Path::new(arg))?;
    Ok(serial::form2_from_value(&v, ring)?)
}

pub fn build(g: &Global, heights: &str, form: &str, variant: &str) -> CliResult<bool> {
    let h = parse_heights(heights)?;
    let variant = Variant::parse(variant).ok_or_else(|| invalid(format!("unknown variant {variant:?}")))?;
    let ring = Ring::new(h, Field::get(g.field_exp)?);
    let form = match FormTag::parse(form) {
        Some(t) => FormSpec::Builtin(t),
        None => FormSpec::Explicit(resolve_form(form, Some(ring))?),
    };
    let spec = AlgebraSpec { heights: h, form, field_exp: g.field_exp, variant };
    let l = build_algebra(&spec)?;
    let text = match g.format {
        Format::Json => to_json(&serial::algebra_to_doc(&l)?)?,
        Format::Md => format!(
            "# {}\n\n| field | dim | structure constants |\n|---|---|---|\n| GF(2^{}) | {} | {} |\n",
            spec.label(),
            g.field_exp,
            l.dim(),
            serial::algebra_to_doc(&l)?.sc.len()
        ),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["a", "b", "c", "coeff"]).map_err(csv_err)?;
            for e in serial::algebra_to_doc(&l)?.sc {
                for (c, x) in e.c {
                    w.write_record([e.a.to_string(), e.b.to_string(), c.to_string(), x.to_string()]).map_err(csv_err)?;
                }
            }
            csv_text(w)?
        }
    };
    write_output(g, &text)?;
    Ok(true)
}

pub fn csv_err(e: csv::Error) -> Failure {
    Failure::Invalid(e.to_string())
}

pub fn csv_text(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))
}

#[derive(Serialize)]
struct SimpleDoc {
    simple: bool,
    perfect: bool,
    method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    ideal_dim: Option<usize>,
}

#[derive(Serialize)]
struct RankDoc {
    r: usize,
    mode: String,
    /// false means r is an upper bound only
    exact: bool,
    examined: u64,
    argmin: Vec<Vec<u16>>,
}

#[derive(Serialize)]
struct NormalizerDoc {
    of: String,
    dim: usize,
}

#[derive(Serialize)]
struct AnalysisDoc {
    field: FieldDescriptor,
    #[serde(skip_serializing_if = "Option::is_none")]
    algebra: Option<String>,
    dim: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    simple: Option<SimpleDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    derived: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank_invariant: Option<RankDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalizer: Option<NormalizerDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grading: Option<GradingProfile>,
}

fn top_label_index(l: &LieAlg) -> Option<usize> {
    let h = l.spec()?.heights;
    let top: Monomial = h.top_monomial();
    l.labels()?.iter().position(|x| x.as_monomial() == Some(top))
}

pub fn analyze(g: &Global, input: &Path, checks: &[String], mode: &str, fmt: Format) -> CliResult<bool> {
    let doc: AlgebraDoc =
        serde_json::from_value(read_json(input)?).map_err(|e| invalid(format!("{}: {e}", input.display())))?;
    let l = serial::algebra_from_doc(&doc)?;
    let mode = match mode {
        "exhaustive" => RankMode::Exhaustive,
        "homogeneous" => RankMode::Homogeneous,
        "sampled" => RankMode::Sampled,
        m => return Err(invalid(format!("unknown mode {m:?}"))),
    };
    let mut out = AnalysisDoc {
        field: l.field().descriptor(),
        algebra: l.spec().map(|s| s.label()),
        dim: l.dim(),
        seed: g.seed,
        simple: None,
        derived: None,
        center: None,
        rank_invariant: None,
        normalizer: None,
        grading: None,
    };
    for c in checks {
        match c.as_str() {
            "simple" => {
                let v = is_simple(&l, default_simplicity_method(&l, g.seed))?;
                out.simple = Some(SimpleDoc {
                    simple: v.simple,
                    perfect: v.perfect,
                    method: match v.method {
                        SimplicityMethod::Exhaustive => "exhaustive".into(),
                        SimplicityMethod::Norton { .. } => "norton".into(),
                    },
                    ideal_dim: v.witness_ideal_dim,
                });
            }
            "derived" => out.derived = Some(derived_series(&l).dims),
            "center" => out.center = Some(center(&l).dim()),
            "rank-invariant" => {
                let m = min_ad_rank(&l, mode, g.seed)?;
                out.rank_invariant = Some(RankDoc {
                    r: m.r,
                    mode: format!("{:?}", m.mode).to_lowercase(),
                    exact: m.exact,
                    examined: m.examined,
                    argmin: m.argmin.iter().map(|v| v.iter().map(|x| x.0).collect()).collect(),
                });
            }
            "normalizer" => {
                let i = top_label_index(&l)
                    .ok_or_else(|| invalid("normalizer check needs monomial labels with the top monomial"))?;
                let s = Subspace::span(l.dim(), &[l.unit(i)], l.field());
                out.normalizer = Some(NormalizerDoc { of: "top monomial".into(), dim: normalizer_of_span(&l, &s).dim() });
            }
            "grading" => out.grading = Some(grading_profile(&l)?),
            other => return Err(invalid(format!("unknown check {other:?}"))),
        }
    }
    let text = match fmt {
        Format::Json => to_json(&out)?,
        Format::Md | Format::Csv => {
            let mut rows: Vec<(String, String)> = vec![("dim".into(), out.dim.to_string())];
            if let Some(s) = &out.simple {
                rows.push(("simple".into(), format!("{} ({})", s.simple, s.method)));
            }
            if let Some(d) = &out.derived {
                rows.push(("derived series".into(), format!("{d:?}")));
            }
            if let Some(c) = out.center {
                rows.push(("center dim".into(), c.to_string()));
            }
            if let Some(r) = &out.rank_invariant {
                let kind = if r.exact { "exact" } else { "upper bound" };
                rows.push(("R".into(), format!("{} ({}, {kind}, minimizers: {})", r.r, r.mode, r.argmin.len())));
            }
            if let Some(n) = &out.normalizer {
                rows.push(("normalizer dim".into(), n.dim.to_string()));
            }
            if let Some(p) = &out.grading {
                rows.push(("graded dims".into(), format!("from degree {}: {:?}", p.min_lie_degree, p.dims)));
            }
            if fmt == Format::Md {
                let title = out.algebra.clone().unwrap_or_else(|| "algebra".into());
                let mut s = format!("# {title}\n\nfield GF(2^{}), seed {}\n\n| check | result |\n|---|---|\n", out.field.k, g.seed);
                for (k, v) in rows {
                    s.push_str(&format!("| {k} | {v} |\n"));
                }
                s
            } else {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["check", "result"]).map_err(csv_err)?;
                for (k, v) in rows {
                    w.write_record([k, v]).map_err(csv_err)?;
                }
                csv_text(w)?
            }
        }
    };
    write_output(g, &text)?;
    Ok(true)
}

#[derive(Serialize)]
struct BilinDoc {
    field: FieldDescriptor,
    heights_in: [u8; 3],
    tag: String,
    /// Columns are the new basis vectors in old coordinates.
    change: Vec<Vec<u16>>,
    heights: [u8; 3],
    rewritten: bool,
    n_invariants: [usize; 3],
}

pub fn classify_bilinear(g: &Global, heights: &str, matrix: &str) -> CliResult<bool> {
    let h = parse_heights(heights)?;
    let h: [u8; 3] = h.as_slice().try_into().map_err(|_| invalid("bilinear forms here are 3x3: give three heights"))?;
    let f = Field::get(g.field_exp)?;
    let vals = matrix
        .split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|_| invalid(format!("bad entry {x:?}"))).and_then(|b| Ok(f.element(b)?)))
        .collect::<CliResult<Vec<Fe>>>()?;
    let u: [Fe; 6] = vals.try_into().map_err(|_| invalid("--matrix takes six entries b11,b12,b13,b22,b23,b33"))?;
    let p = BilinPair::from_upper(h, u, f)?;
    let c = p.canonicalize()?;
    let doc = BilinDoc {
        field: f.descriptor(),
        heights_in: h,
        tag: c.tag.to_string(),
        change: (0..3).map(|i| (0..3).map(|j| c.change.get(i, j).0).collect()).collect(),
        heights: c.heights,
        rewritten: c.rewritten,
        n_invariants: p.n_invariants(),
    };
    let text = match g.format {
        Format::Json => to_json(&doc)?,
        Format::Md => format!(
            "| heights | tag | canonical heights | n-invariants |\n|---|---|---|---|\n| {:?} | {} | {:?} | {:?} |\n",
            doc.heights_in, doc.tag, doc.heights, doc.n_invariants
        ),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["heights", "tag", "canonical_heights", "n_invariants"]).map_err(csv_err)?;
            w.write_record([
                format!("{:?}", doc.heights_in),
                doc.tag.clone(),
                format!("{:?}", doc.heights),
                format!("{:?}", doc.n_invariants),
            ])
            .map_err(csv_err)?;
            csv_text(w)?
        }
    };
    write_output(g, &text)?;
    Ok(true)
}

#[derive(Serialize)]
struct FormCheckDoc {
    field: FieldDescriptor,
    heights: Vec<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed: Option<bool>,
    /// dω when it is nonzero
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<Vec<(Vec<u8>, PolyDoc)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nondegenerate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nonalternating: Option<bool>,
}

pub fn form(g: &Global, input: &str, heights: Option<&str>, checks: &[Check]) -> CliResult<bool> {
    let ring = heights.map(parse_heights).transpose()?.map(|h| Field::get(g.field_exp).map(|f| Ring::new(h, f))).transpose()?;
    let w = resolve_form(input, ring)?;
    if w.degree() != 2 {
        return Err(invalid("expected a 2-form"));
    }
    let n = w.heights().n();
    let mut doc = FormCheckDoc {
        field: w.field().descriptor(),
        heights: w.heights().as_slice().to_vec(),
        closed: None,
        residual: None,
        nondegenerate: None,
        nonalternating: None,
    };
    let mut ok = true;
    for c in checks {
        match c {
            Check::Closed => {
                let v = is_closed(&w);
                ok &= v.closed;
                doc.closed = Some(v.closed);
                if !v.closed {
                    doc.residual =
                        Some(v.residual.terms().map(|(a, p)| (a[..n].to_vec(), serial::poly_to_doc(p))).collect());
                }
            }
            Check::Nondeg => {
                let v = is_nondegenerate(&w)?;
                ok &= v;
                doc.nondegenerate = Some(v);
            }
            Check::Nonalt => {
                let v = is_nonalternating(&w)?;
                ok &= v;
                doc.nonalternating = Some(v);
            }
        }
    }
    let rows: Vec<(&str, Option<bool>)> =
        vec![("closed", doc.closed), ("nondegenerate", doc.nondegenerate), ("nonalternating", doc.nonalternating)];
    let text = match g.format {
        Format::Json => to_json(&doc)?,
        Format::Md => {
            let mut s = String::from("| predicate | holds |\n|---|---|\n");
            for (k, v) in rows.iter().filter_map(|(k, v)| v.map(|v| (k, v))) {
                s.push_str(&format!("| {k} | {v} |\n"));
            }
            s
        }
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(Vec::new());
            wr.write_record(["predicate", "holds"]).map_err(csv_err)?;
            for (k, v) in rows.iter().filter_map(|(k, v)| v.map(|v| (k, v))) {
                wr.write_record([k.to_string(), v.to_string()]).map_err(csv_err)?;
            }
            csv_text(wr)?
        }
    };
    write_output(g, &text)?;
    Ok(ok)
}

#[derive(Serialize)]
struct ApplyDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    form: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    poly: Option<PolyDoc>,
}

pub fn apply_auto(g: &Global, auto: &Path, form: Option<&str>, poly: Option<&Path>) -> CliResult<bool> {
    if g.format != Format::Json {
        return Err(invalid("apply-auto writes JSON documents only"));
    }
    let doc: AutoDoc =
        serde_json::from_value(read_json(auto)?).map_err(|e| invalid(format!("{}: {e}", auto.display())))?;
    let a = serial::auto_from_doc(&doc, Some(Field::get(g.field_exp)?))?;
    if form.is_none() && poly.is_none() {
        return Err(invalid("give --form or --poly"));
    }
    let mut out = ApplyDoc { form: None, poly: None };
    if let Some(f) = form {
        let w = resolve_form(f, Some(a.source()))?;
        let img = a.apply_form(&w)?;
        let d = if img.degree() == 2 {
            serde_json::to_value(serial::form2_to_doc(&img)?).map_err(|e| Failure::Verification(e.to_string()))?
        } else {
            return Err(invalid("only 2-forms are supported"));
        };
        out.form = Some(d);
    }
    if let Some(p) = poly {
        let pd: PolyDoc = serde_json::from_value(read_json(p)?).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
        let f = serial::poly_from_doc(&pd, Some(a.source()))?;
        out.poly = Some(serial::poly_to_doc(&a.apply_poly(&f)?));
    }
    write_output(g, &to_json(&out)?)?;
    Ok(true)
}
