use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::Instant;

use hamlie_core::admiso::{eliminate_to_c23_free, omega4_family, rescale_to_omega4, Admissible, AutoGen};
use hamlie_core::bilin::{brute_force_orbit, canonical_matrix, pairs_equivalent, BilinPair, CanonTag};
use hamlie_core::divpow::{Heights, Monomial, Poly, Ring};
use hamlie_core::gfield::{Fe, Field};
use hamlie_core::hamlie::{build_algebra, AlgebraSpec, LieAlg, Variant};
use hamlie_core::linalg::Mat;
use hamlie_core::lstruct::{
    center, derived_subalgebra_basis, fingerprint, fingerprints_distinct, graded_algebra, is_simple, min_ad_rank,
    normalizer_of_span, RankMode, SimplicityMethod, EXHAUSTIVE_RANK_MAX_DIM,
};
use hamlie_core::sforms::{builtin_form, is_closed, is_nonalternating, is_nondegenerate, FormTag, SymForm};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::report::{self, Header, Report, Status, Summary, Verdict};
use crate::{CliResult, Failure, Global, Suite};

const BUNDLED: &str = include_str!("../data/scenarios.json");
pub const MAX_STRUCTURE_DIM: usize = 63;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub suite: String,
    pub description: String,
    pub topic: String,
    /// Where the expected value comes from: "reference", "computed" or "trivial".
    pub basis: String,
    pub check: String,
    #[serde(default)]
    pub inputs: Inputs,
    pub expect: Value,
    pub budget_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heights: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default = "one")]
    pub field_exp: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matrix: Vec<u16>,
}

fn one() -> u32 {
    1
}

pub fn load_manifest(path: Option<&Path>) -> CliResult<Manifest> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?,
        None => BUNDLED.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("manifest: {e}")))
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Forms => "forms",
        Suite::Bilinear => "bilinear",
        Suite::Algebras => "algebras",
        Suite::Invariants => "invariants",
        Suite::All => "all",
    }
}

/// Measured value, or a skip with its reason.
enum Measured {
    Value(Value),
    Skip(String),
}

type Run = Result<Measured, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

impl Inputs {
    fn heights(&self) -> Result<Heights, String> {
        Heights::new(self.heights.as_deref().ok_or("scenario needs heights")?).map_err(err)
    }

    fn ring(&self) -> Result<Ring, String> {
        Ok(Ring::new(self.heights()?, Field::get(self.field_exp).map_err(err)?))
    }

    fn tag(&self) -> Result<FormTag, String> {
        let f = self.form.as_deref().ok_or("scenario needs a form")?;
        FormTag::parse(f).ok_or_else(|| format!("unknown form {f:?}"))
    }

    fn spec(&self, tag: FormTag) -> Result<AlgebraSpec, String> {
        let v = self.variant.as_deref().unwrap_or("P");
        let variant = Variant::parse(v).ok_or_else(|| format!("unknown variant {v:?}"))?;
        Ok(AlgebraSpec { field_exp: self.field_exp, ..AlgebraSpec::builtin(tag, self.heights()?, variant) })
    }

    fn algebra(&self, max_dim: usize) -> Result<Result<LieAlg, String>, String> {
        let s = self.spec(self.tag()?)?;
        let l = build_algebra(&s).map_err(err)?;
        if l.dim() > max_dim {
            return Ok(Err(format!("dim {} exceeds --max-dim {max_dim}", l.dim())));
        }
        Ok(Ok(l))
    }
}

macro_rules! algebra_or_skip {
    ($inputs:expr, $max:expr) => {
        match $inputs.algebra($max)? {
            Ok(l) => l,
            Err(reason) => return Ok(Measured::Skip(reason)),
        }
    };
}

fn check_predicates(i: &Inputs) -> Run {
    let w = builtin_form(i.tag()?, i.ring()?).map_err(err)?;
    Ok(Measured::Value(json!({
        "closed": is_closed(&w).closed,
        "nondeg": is_nondegenerate(&w).map_err(err)?,
        "nonalt": is_nonalternating(&w).map_err(err)?,
    })))
}

fn c23_free_target(ring: Ring, c: Fe) -> Result<SymForm, String> {
    let h = ring.heights;
    let mut w = builtin_form(FormTag::Omega1, ring).map_err(err)?;
    let m = Poly::monomial(ring, Monomial::new(&[h.top(0) - 1, 0, 1]), c).map_err(err)?;
    w.set_mixed(0, 2, &m).map_err(err)?;
    Ok(w)
}

/// Every pair of nonzero (c13, c23) must land on the c23-free form and rescale to ω4.
fn check_elimination(i: &Inputs) -> Run {
    let r = i.ring()?;
    let f = r.field;
    let mut all = true;
    for c13 in f.elements().filter(|x| !x.is_zero()) {
        for c23 in f.elements().filter(|x| !x.is_zero()) {
            let e = eliminate_to_c23_free(r, c13, c23).map_err(err)?;
            let img = e.auto.apply_form(&omega4_family(r, c13, c23).map_err(err)?).map_err(err)?;
            let t = e.auto.target();
            let rescaled = rescale_to_omega4(t, e.coefficient).map_err(err)?.apply_form(&img).map_err(err)?;
            all &= img == c23_free_target(t, e.coefficient)? && rescaled == builtin_form(FormTag::Omega4, t).map_err(err)?;
        }
    }
    Ok(Measured::Value(json!(all)))
}

fn check_scale(i: &Inputs) -> Run {
    let r = i.ring()?;
    let f = r.field;
    let g = f.generator();
    let s = Admissible::single(r, AutoGen::Scale { c: vec![Fe::ONE, g, f.sqrt(g)] }).map_err(err)?;
    let w = builtin_form(FormTag::Omega4, r).map_err(err)?;
    Ok(Measured::Value(json!(s.apply_form(&w).map_err(err)? == w.scale(g))))
}

fn check_swap(i: &Inputs) -> Run {
    let r = i.ring()?;
    let (o, z) = (Fe::ONE, Fe::ZERO);
    let m = vec![vec![z, o, z], vec![o, z, z], vec![z, z, o]];
    let out = r.heights.permuted(&[1, 0, 2]).map_err(err)?;
    let a = Admissible::single(r, AutoGen::Linear { m, heights_out: Some(out) }).map_err(err)?;
    let t = a.target();
    let w = builtin_form(i.tag()?, r).map_err(err)?;
    let ok = a.apply_form(&w).map_err(err)? == builtin_form(i.tag()?, t).map_err(err)?
        && a.apply_poly(&Poly::var(r, 0)).map_err(err)? == Poly::var(t, 1);
    Ok(Measured::Value(json!(ok)))
}

fn upper_forms(f: &'static Field) -> Vec<[Fe; 6]> {
    let q = f.order() as u32;
    (0..q.pow(6))
        .filter_map(|code| {
            let mut c = code;
            let mut u = [Fe::ZERO; 6];
            for x in u.iter_mut() {
                *x = Fe((c % q) as u16);
                c /= q;
            }
            let m = Mat::from_rows(&[vec![u[0], u[1], u[2]], vec![u[1], u[3], u[4]], vec![u[2], u[4], u[5]]]);
            let nonalt = !(u[0].is_zero() && u[3].is_zero() && u[5].is_zero());
            (nonalt && !m.det(f).is_zero()).then_some(u)
        })
        .collect()
}

/// Mismatches between the canonical-form criterion and brute-force orbits.
fn check_bilinear_sweep(i: &Inputs) -> Run {
    let f = Field::get(i.field_exp).map_err(err)?;
    let mut hs = Vec::new();
    for a in 1..=3u8 {
        for b in 1..=3u8 {
            for c in 1..=3u8 {
                if !(a == b && b == c) {
                    hs.push([a, b, c]);
                }
            }
        }
    }
    let forms = upper_forms(f);
    let pairs = hs
        .iter()
        .flat_map(|h| forms.iter().map(move |u| BilinPair::from_upper(*h, *u, f)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let canon = pairs.iter().map(|p| p.canonicalize()).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let keys: Vec<([u8; 3], Vec<u16>)> =
        pairs.iter().map(|p| (p.heights(), p.matrix().data.iter().map(|x| x.0).collect())).collect();
    let mismatches = (0..pairs.len())
        .into_par_iter()
        .map(|a| -> Result<usize, String> {
            let orbit: BTreeSet<_> = brute_force_orbit(&pairs[a]).map_err(err)?;
            Ok((0..pairs.len()).filter(|&b| orbit.contains(&keys[b]) != pairs_equivalent(&canon[a], &canon[b])).count())
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum::<usize>();
    Ok(Measured::Value(json!(mismatches)))
}

fn bilin_input(i: &Inputs) -> Result<BilinPair, String> {
    let h: [u8; 3] = i.heights.clone().ok_or("scenario needs heights")?.try_into().map_err(|_| "three heights")?;
    let f = Field::get(i.field_exp).map_err(err)?;
    if let Some(t) = i.form.as_deref() {
        let tag = match t {
            "B1" => CanonTag::B1,
            "B2" => CanonTag::B2,
            "B3" => CanonTag::B3,
            _ => return Err(format!("unknown canonical tag {t:?}")),
        };
        return BilinPair::new(h, canonical_matrix(tag), f).map_err(err);
    }
    let u: Vec<Fe> = i.matrix.iter().map(|&b| f.element(b as u32)).collect::<Result<_, _>>().map_err(err)?;
    let u: [Fe; 6] = u.try_into().map_err(|_| "matrix needs six entries")?;
    BilinPair::from_upper(h, u, f).map_err(err)
}

fn check_simple(i: &Inputs, max_dim: usize, seed: u64) -> Run {
    let l = algebra_or_skip!(i, max_dim);
    let no = is_simple(&l, SimplicityMethod::Norton { seed }).map_err(err)?;
    if l.field().k() == 1 && l.dim() <= 15 {
        let ex = is_simple(&l, SimplicityMethod::Exhaustive).map_err(err)?;
        if ex.simple != no.simple {
            return Err(format!("certifiers disagree: exhaustive {}, norton {}", ex.simple, no.simple));
        }
    }
    Ok(Measured::Value(json!(no.simple)))
}

fn check_min_rank(i: &Inputs, max_dim: usize, seed: u64) -> Run {
    let l = algebra_or_skip!(i, max_dim);
    let mode = match i.mode.as_deref().unwrap_or("exhaustive") {
        "exhaustive" => RankMode::Exhaustive,
        "homogeneous" => RankMode::Homogeneous,
        "sampled" => RankMode::Sampled,
        m => return Err(format!("unknown mode {m:?}")),
    };
    if mode == RankMode::Exhaustive && l.dim() > EXHAUSTIVE_RANK_MAX_DIM {
        return Ok(Measured::Skip(format!("exhaustive rank needs dim <= {EXHAUSTIVE_RANK_MAX_DIM}")));
    }
    let m = min_ad_rank(&l, mode, seed).map_err(err)?;
    let h = l.spec().map(|s| s.heights).ok_or("algebra has no spec")?;
    let top = l
        .labels()
        .and_then(|ls| ls.iter().position(|x| x.as_monomial() == Some(h.top_monomial())))
        .map(|t| l.unit(t));
    let is_top = top.map(|t| m.argmin == vec![t]).unwrap_or(false);
    Ok(Measured::Value(json!({ "r": m.r, "argmin_points": m.argmin.len(), "argmin_is_top": is_top, "exact": m.exact })))
}

fn run_one(sc: &Scenario, max_dim: usize, seed: u64) -> Run {
    let i = &sc.inputs;
    match sc.check.as_str() {
        "predicates" => check_predicates(i),
        "elimination" => check_elimination(i),
        "scale" => check_scale(i),
        "swap" => check_swap(i),
        "bilinear_sweep" => check_bilinear_sweep(i),
        "canonical" => Ok(Measured::Value(json!(bilin_input(i)?.canonicalize().map_err(err)?.tag.to_string()))),
        "n_invariants" => Ok(Measured::Value(json!(bilin_input(i)?.n_invariants()))),
        "dim" => Ok(Measured::Value(json!(algebra_or_skip!(i, max_dim).dim()))),
        "simple" => check_simple(i, max_dim, seed),
        "derived_dim" => {
            let l = algebra_or_skip!(i, max_dim);
            Ok(Measured::Value(json!(derived_subalgebra_basis(&l).dim())))
        }
        "center_dim" => Ok(Measured::Value(json!(center(&algebra_or_skip!(i, max_dim)).dim()))),
        "graded_is_omega1" => {
            let l = algebra_or_skip!(i, max_dim);
            let w1 = build_algebra(&i.spec(FormTag::Omega1)?).map_err(err)?;
            Ok(Measured::Value(json!(graded_algebra(&l).map_err(err)?.same_structure(&w1))))
        }
        "min_rank" => check_min_rank(i, max_dim, seed),
        "normalizer_dim" => {
            let l = algebra_or_skip!(i, max_dim);
            let h = i.heights()?;
            let t = l
                .labels()
                .and_then(|ls| ls.iter().position(|x| x.as_monomial() == Some(h.top_monomial())))
                .ok_or("no top monomial label")?;
            let s = hamlie_core::linalg::Subspace::span(l.dim(), &[l.unit(t)], l.field());
            Ok(Measured::Value(json!(normalizer_of_span(&l, &s).dim())))
        }
        "fingerprints_distinct" => {
            let mut fps = Vec::new();
            for f in &i.forms {
                let one = Inputs { form: Some(f.clone()), ..i.clone() };
                let l = algebra_or_skip!(one, max_dim);
                if l.dim() > EXHAUSTIVE_RANK_MAX_DIM {
                    return Ok(Measured::Skip(format!("fingerprints need dim <= {EXHAUSTIVE_RANK_MAX_DIM}")));
                }
                fps.push(fingerprint(&l, seed).map_err(err)?);
            }
            let distinct = (0..fps.len()).all(|a| (a + 1..fps.len()).all(|b| fingerprints_distinct(&fps[a], &fps[b])));
            Ok(Measured::Value(json!(distinct)))
        }
        other => Err(format!("unknown check {other:?}")),
    }
}

pub fn execute(manifest: &Manifest, suite: Suite, max_dim: usize, seed: u64, strict_time: bool) -> Vec<Verdict> {
    let chosen: Vec<&Scenario> =
        manifest.scenarios.iter().filter(|s| suite == Suite::All || s.suite == suite_name(suite)).collect();
    chosen
        .par_iter()
        .map(|sc| {
            let t = Instant::now();
            let res = run_one(sc, max_dim, seed);
            let elapsed = t.elapsed();
            let over = elapsed.as_millis() as u64 > sc.budget_ms;
            if over {
                eprintln!("warning: {} took {} ms, budget {} ms", sc.id, elapsed.as_millis(), sc.budget_ms);
            }
            let (status, measured, mut note) = match res {
                Ok(Measured::Value(v)) => {
                    let st = if v == sc.expect { Status::Pass } else { Status::Fail };
                    (st, Some(v), None)
                }
                Ok(Measured::Skip(reason)) => (Status::Skip, None, Some(reason)),
                Err(e) => (Status::Fail, None, Some(e)),
            };
            let status = if over && strict_time && status == Status::Pass {
                note = Some(format!("over budget: {} ms > {} ms", elapsed.as_millis(), sc.budget_ms));
                Status::Fail
            } else {
                status
            };
            Verdict {
                id: sc.id.clone(),
                suite: sc.suite.clone(),
                description: sc.description.clone(),
                topic: sc.topic.clone(),
                basis: sc.basis.clone(),
                check: sc.check.clone(),
                inputs: sc.inputs.clone(),
                expected: sc.expect.clone(),
                measured,
                status,
                note,
                elapsed_ms: Some(elapsed.as_millis() as u64),
            }
        })
        .collect()
}

pub fn run(
    g: &Global,
    suite: Suite,
    max_dim: usize,
    strict_time: bool,
    manifest: Option<&Path>,
    timings: bool,
) -> CliResult<bool> {
    if max_dim > MAX_STRUCTURE_DIM {
        return Err(Failure::Invalid(format!("--max-dim must be at most {MAX_STRUCTURE_DIM}")));
    }
    let field = Field::get(g.field_exp)?;
    let m = load_manifest(manifest)?;
    let mut verdicts = execute(&m, suite, max_dim, g.seed, strict_time);
    if !timings {
        for v in &mut verdicts {
            v.elapsed_ms = None;
        }
    }
    let rep = Report {
        header: Header {
            tool: "hamlie".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            field: field.descriptor(),
            seed: g.seed,
            suite: suite_name(suite).into(),
            max_dim,
        },
        summary: Summary::of(&verdicts),
        scenarios: verdicts,
    };
    let text = report::emit(&rep, g.format)?;
    crate::commands::write_output(g, &text)?;
    Ok(rep.summary.failed == 0)
}
