use std::collections::BTreeMap;

use hamlie_core::gfield::FieldDescriptor;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::{csv_err, csv_text};
use crate::verify::Inputs;
use crate::{CliResult, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skip => "skip",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub field: FieldDescriptor,
    pub seed: u64,
    pub suite: String,
    pub max_dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub id: String,
    pub suite: String,
    pub description: String,
    pub topic: String,
    pub basis: String,
    pub check: String,
    pub inputs: Inputs,
    pub expected: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<Value>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl Summary {
    pub fn of(vs: &[Verdict]) -> Summary {
        let count = |s: Status| vs.iter().filter(|v| v.status == s).count();
        Summary { total: vs.len(), passed: count(Status::Pass), failed: count(Status::Fail), skipped: count(Status::Skip) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub header: Header,
    pub summary: Summary,
    pub scenarios: Vec<Verdict>,
}

pub fn emit(r: &Report, fmt: Format) -> CliResult<String> {
    match fmt {
        Format::Json => Ok(hamlie_core::serial::to_json_pretty(r)?),
        Format::Md => Ok(markdown(r)),
        Format::Csv => csv_report(r),
    }
}

fn show(v: &Option<Value>) -> String {
    v.as_ref().map(compact).unwrap_or_else(|| "-".into())
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn constraint(form: &str) -> &'static str {
    match form {
        "omega2" => "m1 < m2, m3 outside [m1, m2]",
        "omega4" => "m3 = 1",
        _ => "any",
    }
}

#[derive(Default)]
struct Row {
    dim: Option<String>,
    simple: Option<String>,
    r: Option<String>,
}

/// One row per algebra that any dim, simple or min_rank scenario measured.
fn classification(r: &Report) -> BTreeMap<(String, Vec<u8>, String, u32), Row> {
    let mut rows: BTreeMap<(String, Vec<u8>, String, u32), Row> = BTreeMap::new();
    for v in &r.scenarios {
        let i = &v.inputs;
        let (Some(form), Some(h)) = (&i.form, &i.heights) else { continue };
        if !matches!(v.check.as_str(), "dim" | "simple" | "min_rank") {
            continue;
        }
        let key = (form.clone(), h.clone(), i.variant.clone().unwrap_or_else(|| "P".into()), i.field_exp);
        let row = rows.entry(key).or_default();
        let Some(m) = &v.measured else { continue };
        match v.check.as_str() {
            "dim" => row.dim = Some(compact(m)),
            "simple" => row.simple = Some(if m == &Value::Bool(true) { "yes".into() } else { "no".into() }),
            _ => row.r = m.get("r").map(compact),
        }
    }
    rows
}

fn markdown(r: &Report) -> String {
    let h = &r.header;
    let mut s = format!(
        "# {} verify report\n\n- version: {}\n- field: GF(2^{}) mod {:#b}\n- seed: {}\n- suite: {}\n- max dim: {}\n- passed {}, failed {}, skipped {} of {}\n",
        h.tool, h.version, h.field.k, h.field.irreducible_bits, h.seed, h.suite, h.max_dim,
        r.summary.passed, r.summary.failed, r.summary.skipped, r.summary.total
    );
    let mut rows = classification(r);
    rows.retain(|_, x| x.dim.is_some() || x.simple.is_some() || x.r.is_some());
    if !rows.is_empty() {
        s.push_str("\n## Classification\n\n| form | heights constraint | heights | variant | dim | simple? | R |\n|---|---|---|---|---|---|---|\n");
        for ((form, hs, variant, k), row) in &rows {
            let hs: Vec<String> = hs.iter().map(|x| x.to_string()).collect();
            let field = if *k == 1 { String::new() } else { format!(" over GF(2^{k})") };
            s.push_str(&format!(
                "| {form} | {} | ({}){field} | {variant} | {} | {} | {} |\n",
                constraint(form),
                hs.join(","),
                row.dim.as_deref().unwrap_or("-"),
                row.simple.as_deref().unwrap_or("-"),
                row.r.as_deref().unwrap_or("-"),
            ));
        }
    }
    s.push_str("\n## Scenarios\n\n| id | check | expected | measured | status | basis |\n|---|---|---|---|---|---|\n");
    for v in &r.scenarios {
        let status = match &v.note {
            Some(n) => format!("{} ({n})", v.status.as_str()),
            None => v.status.as_str().to_string(),
        };
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            v.id,
            v.check,
            compact(&v.expected),
            show(&v.measured),
            status,
            v.basis
        ));
    }
    s
}

fn csv_report(r: &Report) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "suite", "check", "status", "expected", "measured", "basis", "note"]).map_err(csv_err)?;
    for v in &r.scenarios {
        w.write_record([
            v.id.as_str(),
            v.suite.as_str(),
            v.check.as_str(),
            v.status.as_str(),
            &compact(&v.expected),
            &show(&v.measured),
            v.basis.as_str(),
            v.note.as_deref().unwrap_or(""),
        ])
        .map_err(csv_err)?;
    }
    csv_text(w)
}
