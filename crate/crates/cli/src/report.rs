//! The report document every subcommand emits, and its JSON, CSV and
//! table renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qpriv_core::privacy::PrivacyReport;
use qpriv_core::protocol::{Party, Protocol};

pub const TOOL: &str = "qpriv";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub schema: u32,
    /// Arguments as given on the command line, program name excluded.
    pub command: Vec<String>,
    pub sections: Vec<Section>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub criteria: Vec<CriterionVerdict>,
    pub passed: bool,
    /// Only present with `--timing`, so that plain runs are reproducible byte for byte.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_seconds: Option<f64>,
}

impl ReportDocument {
    pub fn new(command: Vec<String>, sections: Vec<Section>) -> Self {
        let passed = sections.iter().all(Section::passed);
        Self {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            schema: SCHEMA_VERSION,
            command,
            sections,
            criteria: Vec::new(),
            passed,
            duration_seconds: None,
        }
    }

    pub fn failing_checks(&self) -> Vec<String> {
        self.sections
            .iter()
            .flat_map(|s| s.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}: {}", s.id, c.name)))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub id: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default)]
    pub quantities: Vec<PrivacyReport>,
    #[serde(default)]
    pub references: Vec<ReferenceRow>,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub details: BTreeMap<String, Value>,
}

impl Section {
    pub fn new(id: impl Into<String>, title: impl Into<String>) -> Self {
        Self { id: id.into(), title: title.into(), ..Self::default() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn detail<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.details.insert(key.to_string(), v);
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }
}

/// A computed value next to a reference value. Informational rows never
/// affect the exit code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub label: String,
    pub computed: f64,
    pub reference: f64,
    pub delta: f64,
    /// Where the reference value comes from: a closed form, an oracle or a
    /// published asymptotic constant.
    pub source: String,
    pub informational: bool,
}

impl ReferenceRow {
    pub fn new(label: impl Into<String>, computed: f64, reference: f64, source: &str, informational: bool) -> Self {
        Self {
            label: label.into(),
            computed,
            reference,
            delta: computed - reference,
            source: source.into(),
            informational,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Acceptance criterion this check contributes to, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u8>,
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { criterion: None, name: name.into(), passed, value: None, limit: None, detail: detail.into() }
    }

    /// `|value - target| <= tol`.
    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let gap = (value - target).abs();
        Self {
            criterion: None,
            name: name.into(),
            passed: gap <= tol,
            value: Some(value),
            limit: Some(tol),
            detail: format!("|{value:.12} - {target:.12}| = {gap:.3e}"),
        }
    }

    /// `value <= limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            criterion: None,
            name: name.into(),
            passed: value <= limit,
            value: Some(value),
            limit: Some(limit),
            detail: format!("{value:.12} <= {limit:.12}"),
        }
    }

    pub fn for_criterion(mut self, id: u8) -> Self {
        self.criterion = Some(id);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub checks: usize,
    pub failing: Vec<String>,
}

/// Registers, owners and rounds of a protocol.
pub fn protocol_descriptor(p: &Protocol) -> Value {
    let owners: BTreeMap<&str, &str> = [Party::P0, Party::P1]
        .into_iter()
        .flat_map(|party| p.held_by(party, 0).unwrap_or_default().into_iter().map(move |r| (r, p.role(party))))
        .collect();
    let registers: Vec<Value> = p
        .layout()
        .registers()
        .iter()
        .map(|r| {
            serde_json::json!({
                "name": r.name,
                "width": r.width,
                "owner": owners.get(r.name.as_str()).copied().unwrap_or("-"),
            })
        })
        .collect();
    let rounds: Vec<Value> = (1..=p.round_count())
        .map(|k| {
            serde_json::json!({
                "round": k,
                "sender": p.role(Party::sender_of(k)),
                "message": p.message(k).unwrap_or_default(),
            })
        })
        .collect();
    serde_json::json!({
        "name": p.name(),
        "roles": [p.role(Party::P0), p.role(Party::P1)],
        "inputs": [p.input_size(Party::P0), p.input_size(Party::P1)],
        "registers": registers,
        "rounds": rounds,
        "communication_qubits": p.communication_qubits(),
        "prior_entanglement": p.has_prior_entanglement(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

pub fn render(doc: &ReportDocument, format: Format) -> String {
    match format {
        Format::Json => to_json(doc),
        Format::Csv => to_csv(doc),
        Format::Table => to_table(doc),
    }
}

pub fn to_json(doc: &ReportDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct CsvRow<'a> {
    section: &'a str,
    kind: &'static str,
    protocol: &'a str,
    quantity: &'a str,
    side: &'a str,
    party: &'a str,
    mode: &'a str,
    measure_after: String,
    round: String,
    value: String,
    reference: String,
    delta: String,
    passed: String,
    detail: &'a str,
}

fn num(v: f64) -> String {
    // shortest representation that parses back to the same value
    serde_json::to_string(&v).unwrap_or_default()
}

/// One row per round term and quantity, then totals, reference rows and
/// checks.
pub fn to_csv(doc: &ReportDocument) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let blank = || String::new();
    for s in &doc.sections {
        for q in &s.quantities {
            let side = format!("{:?}", q.side);
            let measure = q.measure_after.map(|m| m.to_string()).unwrap_or_else(|| "never".into());
            let measure = if q.quantity.symbol() == "SIC" { measure } else { blank() };
            let rows = q
                .terms
                .iter()
                .map(|t| ("term", t.round.to_string(), t.value))
                .chain(std::iter::once(("total", blank(), q.total)));
            for (kind, round, value) in rows {
                w.serialize(CsvRow {
                    section: &s.id,
                    kind,
                    protocol: &q.protocol,
                    quantity: q.quantity.symbol(),
                    side: &side,
                    party: &q.party,
                    mode: &q.mode,
                    measure_after: measure.clone(),
                    round,
                    value: num(value),
                    reference: blank(),
                    delta: blank(),
                    passed: blank(),
                    detail: "",
                })
                .expect("csv row");
            }
        }
        for r in &s.references {
            w.serialize(CsvRow {
                section: &s.id,
                kind: if r.informational { "informational" } else { "reference" },
                protocol: "",
                quantity: &r.label,
                side: "",
                party: "",
                mode: "",
                measure_after: blank(),
                round: blank(),
                value: num(r.computed),
                reference: num(r.reference),
                delta: num(r.delta),
                passed: blank(),
                detail: &r.source,
            })
            .expect("csv row");
        }
        for c in &s.checks {
            w.serialize(CsvRow {
                section: &s.id,
                kind: "check",
                protocol: "",
                quantity: &c.name,
                side: "",
                party: "",
                mode: "",
                measure_after: blank(),
                round: blank(),
                value: c.value.map(num).unwrap_or_default(),
                reference: c.limit.map(num).unwrap_or_default(),
                delta: blank(),
                passed: c.passed.to_string(),
                detail: &c.detail,
            })
            .expect("csv row");
        }
    }
    String::from_utf8(w.into_inner().expect("csv buffer")).expect("csv is utf-8")
}

fn mark(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn to_table(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}  {}", doc.tool, doc.version, doc.command.join(" "));
    for s in &doc.sections {
        let _ = writeln!(out, "\n== {} ==", s.title);
        if let Some(m) = &s.mode {
            let _ = writeln!(out, "mode: {m}");
        }
        for (key, value) in &s.details {
            match value {
                Value::Number(v) => {
                    let _ = writeln!(out, "{key}: {v}");
                }
                Value::String(v) => {
                    let _ = writeln!(out, "{key}: {v}");
                }
                _ => {}
            }
        }
        if !s.quantities.is_empty() {
            let _ = writeln!(out, "{:<5} {:<5} {:<8} {:<8} {:>14}  terms", "qty", "side", "party", "measure", "total");
            for q in &s.quantities {
                let measure = match (q.quantity.symbol(), q.measure_after) {
                    ("SIC", Some(m)) => format!("after {m}"),
                    ("SIC", None) => "never".into(),
                    _ => "-".into(),
                };
                let terms: Vec<String> = q.terms.iter().map(|t| format!("{}:{:.6}", t.round, t.value)).collect();
                let _ = writeln!(
                    out,
                    "{:<5} {:<5} {:<8} {:<8} {:>14.9}  {}",
                    q.quantity.symbol(),
                    format!("{:?}", q.side),
                    q.party,
                    measure,
                    q.total,
                    terms.join(" ")
                );
            }
        }
        if !s.references.is_empty() {
            let _ = writeln!(out, "{:<28} {:>14} {:>14} {:>12}  source", "reference", "computed", "value", "delta");
            for r in &s.references {
                let tag = if r.informational { " (informational)" } else { "" };
                let _ = writeln!(
                    out,
                    "{:<28} {:>14.9} {:>14.9} {:>12.3e}  {}{}",
                    r.label, r.computed, r.reference, r.delta, r.source, tag
                );
            }
        }
        for c in &s.checks {
            let crit = c.criterion.map(|id| format!("[{id}] ")).unwrap_or_default();
            let _ = writeln!(out, "{} {}{}: {}", mark(c.passed), crit, c.name, c.detail);
        }
    }
    if !doc.criteria.is_empty() {
        let _ = writeln!(out, "\n== acceptance ==");
        for c in &doc.criteria {
            let _ = writeln!(out, "{} {:>2}. {} ({} checks)", mark(c.passed), c.id, c.title, c.checks);
            for f in &c.failing {
                let _ = writeln!(out, "       failing: {f}");
            }
        }
    }
    let _ = writeln!(out, "\noverall: {}", mark(doc.passed));
    if let Some(d) = doc.duration_seconds {
        let _ = writeln!(out, "duration: {d:.3} s");
    }
    out
}
