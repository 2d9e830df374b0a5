//! Section builders behind the `ip`, `pir` and `pir-entangled` subcommands.

use rayon::prelude::*;

use qpriv_core::bits::BitString;
use qpriv_core::ip::{
    analytic_first_message, build_ip_protocol, build_ip_tradeoff, ensemble_first_message, first_message_entropy, gram_entropy,
    theoretical_ip_table, MAX_IP_BITS,
};
use qpriv_core::linalg::MAX_QUBITS;
use qpriv_core::pir::classical::{cube_scheme, two_server_xor_scheme, verify_scheme, ClassicalPirScheme};
use qpriv_core::pir::entangled::{
    build_ppir, ppir_correctness, ppir_privacy_report, ppir_user_privacy, run_ppir, MAX_ENSEMBLE_LEVELS, MAX_LEVELS,
};
use qpriv_core::pir::quantum::{build_qpir, qpir_correctness, qpir_privacy_report, qpir_width, server_view_independence};
use qpriv_core::pir::{PirPrivacyBundle, USER_PRIVACY_TOLERANCE};
use qpriv_core::privacy::{
    ordering_check, privacy_loss, quantum_ic, superposed_ic, OrderingCheck, PrivacyReport, Quantity, Side,
};
use qpriv_core::protocol::{InputDistribution, Protocol};

use crate::report::{protocol_descriptor, Check, ReferenceRow, Section};
use crate::CliError;

pub const EQUALITY_TOLERANCE: f64 = 1e-9;
pub const MATRIX_TOLERANCE: f64 = 1e-10;
pub const STATE_TOLERANCE: f64 = 1e-10;
/// Random (database, index) pairs checked at depth 3.
pub const DEPTH_THREE_SAMPLES: usize = 64;
pub const SAMPLE_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum QuantitySelector {
    All,
    #[value(name = "L")]
    #[serde(rename = "L")]
    Loss,
    #[value(name = "SIC")]
    #[serde(rename = "SIC")]
    Superposed,
    #[value(name = "QIC")]
    #[serde(rename = "QIC")]
    Quantum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    TwoServer,
    Cube,
}

pub fn parity(x: u64, y: u64) -> u64 {
    u64::from((x & y).count_ones() & 1)
}

/// Checks that `protocol` outputs `f(x, y)` with certainty on every input
/// pair; returns the failing pairs.
pub fn certain_outputs(protocol: &Protocol, f: impl Fn(u64, u64) -> u64 + Sync) -> Result<Vec<(u64, u64)>, CliError> {
    let nx = protocol.input_size(qpriv_core::protocol::Party::P0) as u64;
    let ny = protocol.input_size(qpriv_core::protocol::Party::P1) as u64;
    let failures: Vec<Vec<(u64, u64)>> = (0..nx)
        .into_par_iter()
        .map(|x| {
            let mut bad = Vec::new();
            for y in 0..ny {
                let run = protocol.run_honest(x, y)?;
                if run.outcomes.len() != 1 || run.output != Some(f(x, y)) {
                    bad.push((x, y));
                }
            }
            Ok(bad)
        })
        .collect::<Result<_, qpriv_core::Error>>()?;
    Ok(failures.into_iter().flatten().collect())
}

fn failures_detail(cases: u64, failures: &[(u64, u64)]) -> String {
    match failures.first() {
        None => format!("{cases} input pairs, all certain and correct"),
        Some(f) => format!("{} of {cases} input pairs fail, first {f:?}", failures.len()),
    }
}

pub fn check_ip_bits(n: usize) -> Result<(), CliError> {
    if n == 0 || n > MAX_IP_BITS {
        return Err(CliError::Usage(format!(
            "n = {n} is outside 1..={MAX_IP_BITS}: larger inputs exceed the width cap of the exhaustive analysis"
        )));
    }
    Ok(())
}

/// Measurement choice for the superposed cost: after round `m`, or never.
pub type MeasureChoice = Option<usize>;

pub struct IpOptions {
    pub n: usize,
    pub quantity: QuantitySelector,
    /// Measurement choices to report for the superposed cost; empty means
    /// every choice when the ordering is checked and `never` otherwise.
    pub measure_after: Vec<MeasureChoice>,
}

fn keep_choice(choices: &[MeasureChoice], m: MeasureChoice) -> bool {
    choices.is_empty() || choices.contains(&m)
}

pub fn ip_section(o: &IpOptions) -> Result<Section, CliError> {
    let n = o.n;
    check_ip_bits(n)?;
    let p = build_ip_protocol(n)?;
    let mu = InputDistribution::uniform(1 << n, 1 << n);
    let mut s = Section::new(format!("ip-n{n}"), format!("inner product, n = {n}"));
    s.protocol = Some(protocol_descriptor(&p));
    s.mode = Some("uniform inputs".into());

    let failures = certain_outputs(&p, parity)?;
    s.check(Check::flag("correctness", failures.is_empty(), failures_detail(1 << (2 * n), &failures)));

    let mut orderings: Vec<OrderingCheck> = Vec::new();
    match o.quantity {
        QuantitySelector::All => {
            for side in [Side::A, Side::B] {
                orderings.push(ordering_check(&p, &mu, side)?);
            }
            for c in &orderings {
                s.quantities.push(c.loss.clone());
            }
            for c in &orderings {
                s.quantities
                    .extend(c.superposed.iter().filter(|r| keep_choice(&o.measure_after, r.measure_after)).cloned());
            }
            for c in &orderings {
                s.quantities.push(c.quantum.clone());
            }
        }
        QuantitySelector::Loss => {
            for side in [Side::A, Side::B] {
                s.quantities.push(privacy_loss(&p, &mu, side)?);
            }
        }
        QuantitySelector::Superposed => {
            let choices = if o.measure_after.is_empty() { vec![None] } else { o.measure_after.clone() };
            for side in [Side::A, Side::B] {
                for &m in &choices {
                    if m.is_some_and(|m| m > p.round_count()) {
                        return Err(CliError::Usage(format!(
                            "measurement round {} exceeds the {} rounds",
                            m.unwrap_or_default(),
                            p.round_count()
                        )));
                    }
                    s.quantities.push(superposed_ic(&p, &mu, side, m)?);
                }
            }
        }
        QuantitySelector::Quantum => {
            for side in [Side::A, Side::B] {
                s.quantities.push(quantum_ic(&p, &mu, side)?);
            }
        }
    }

    let find = |q: Quantity, side: Side| -> Option<&PrivacyReport> {
        s.quantities.iter().find(|r| r.quantity == q && r.side == side && r.measure_after.is_none())
    };
    let gram = gram_entropy(n)?;
    let closed_b = 1.0 - 0.5f64.powi(n as i32);
    let mut checks = Vec::new();
    let loss_a = find(Quantity::PrivacyLoss, Side::A).map(|r| r.total);
    if let Some(la) = loss_a {
        checks.push(Check::within("L_A equals the Gram-spectrum entropy", la, gram, EQUALITY_TOLERANCE));
    }
    if let Some(lb) = find(Quantity::PrivacyLoss, Side::B).map(|r| r.total) {
        checks.push(Check::within("L_B equals 1 - 2^-n", lb, closed_b, EQUALITY_TOLERANCE));
    }
    if let Some(qa) = find(Quantity::QuantumCost, Side::A).map(|r| r.total) {
        checks.push(Check::within("QIC_A equals the first-message entropy", qa, gram, EQUALITY_TOLERANCE));
    }
    let inconsistent: Vec<String> = s
        .quantities
        .iter()
        .filter(|r| !r.is_consistent())
        .map(|r| format!("{} side {:?}", r.quantity.symbol(), r.side))
        .collect();
    checks.push(Check::flag(
        "terms sum to totals and are non-negative",
        inconsistent.is_empty(),
        if inconsistent.is_empty() { "all reports".to_string() } else { inconsistent.join(", ") },
    ));
    for c in &orderings {
        let detail = if c.failures.is_empty() {
            format!("L = {:.9}, max SIC = {:.9}, QIC = {:.9}", c.loss.total, c.superposed_max, c.quantum.total)
        } else {
            c.failures.join("; ")
        };
        checks.push(Check::flag(format!("L <= SIC <= QIC on side {:?}", c.side), c.holds, detail));
    }

    let analytic = analytic_first_message(n)?;
    let deviation = analytic.max_deviation(&ensemble_first_message(n)?)?;
    checks.push(Check::at_most("first-message matrix matches the ensemble", deviation, MATRIX_TOLERANCE));
    checks.push(Check::within("first-message entropy equals the Gram oracle", analytic.entropy()?, gram, EQUALITY_TOLERANCE));
    s.checks.extend(checks);

    for row in theoretical_ip_table(n)? {
        let computed = match row.quantity.as_str() {
            "L_A" => loss_a,
            "L_B" => find(Quantity::PrivacyLoss, Side::B).map(|r| r.total),
            "SIC_A" => find(Quantity::SuperposedCost, Side::A).map(|r| r.total),
            "SIC_B" => find(Quantity::SuperposedCost, Side::B).map(|r| r.total),
            "QIC_A" => find(Quantity::QuantumCost, Side::A).map(|r| r.total),
            "QIC_B" => find(Quantity::QuantumCost, Side::B).map(|r| r.total),
            _ => None,
        };
        let Some(computed) = computed else { continue };
        if let Some(exact) = row.closed_form {
            s.references.push(ReferenceRow::new(&row.quantity, computed, exact, "closed form", false));
        }
        s.references.push(ReferenceRow::new(&row.quantity, computed, row.published_asymptotic, "published asymptotic", true));
    }
    s.references.extend(first_message_rows(n)?);
    Ok(s)
}

/// The exact first-message entropy against both candidate constants.
pub fn first_message_rows(n: usize) -> Result<Vec<ReferenceRow>, CliError> {
    let e = first_message_entropy(n)?;
    let half = n as f64 / 2.0;
    Ok(vec![
        ReferenceRow::new("first-message entropy", e.exact, half + 0.5, "asymptotic constant n/2 + 1/2", true),
        ReferenceRow::new("first-message entropy", e.exact, half + 1.0, "asymptotic constant n/2 + 1", true),
    ])
}

/// Upper bounds on the split protocol's losses.
pub fn tradeoff_bounds(n: usize, t: usize) -> (f64, f64) {
    (t as f64 / 2.0 + 1.5, (n - t) as f64 / 2.0 + 2.5)
}

pub fn tradeoff_section(n: usize, t: usize) -> Result<Section, CliError> {
    check_ip_bits(n)?;
    if t > n {
        return Err(CliError::Usage(format!("split t = {t} exceeds n = {n}")));
    }
    let p = build_ip_tradeoff(n, t)?;
    let mu = InputDistribution::uniform(1 << n, 1 << n);
    let mut s = Section::new(format!("ip-tradeoff-n{n}-t{t}"), format!("split inner product, n = {n}, t = {t}"));
    s.protocol = Some(protocol_descriptor(&p));
    s.mode = Some("uniform inputs".into());
    let failures = certain_outputs(&p, parity)?;
    s.check(Check::flag("correctness", failures.is_empty(), failures_detail(1 << (2 * n), &failures)));
    let la = privacy_loss(&p, &mu, Side::A)?;
    let lb = privacy_loss(&p, &mu, Side::B)?;
    let (bound_a, bound_b) = tradeoff_bounds(n, t);
    s.check(Check::at_most("L_A <= t/2 + 3/2", la.total, bound_a + EQUALITY_TOLERANCE));
    s.check(Check::at_most("L_B <= (n-t)/2 + 5/2", lb.total, bound_b + EQUALITY_TOLERANCE));
    s.quantities.push(la);
    s.quantities.push(lb);
    Ok(s)
}

pub fn build_scheme(kind: SchemeKind, n: usize, d: usize) -> Result<ClassicalPirScheme, CliError> {
    Ok(match kind {
        SchemeKind::TwoServer => two_server_xor_scheme(n)?,
        SchemeKind::Cube => cube_scheme(n, d)?,
    })
}

pub fn classical_section(scheme: &ClassicalPirScheme) -> Result<Section, CliError> {
    let v = verify_scheme(scheme)?;
    let mut s = Section::new(format!("pir-classical-{}", slug(&scheme.name)), format!("classical scheme {}", scheme.name));
    s.protocol = Some(serde_json::to_value(scheme.descriptor()).expect("descriptor serializes"));
    let detail = match &v.counterexample {
        None => format!("{} (x, i, r) cases", v.cases),
        Some(c) => format!("x = {:#x}, i = {}, r = {} reconstructs wrongly", c.x, c.index, c.r),
    };
    s.check(Check::flag("exhaustive correctness", v.correct, detail));
    for d in &v.servers {
        let detail = match d.worst_pair {
            Some((a, b)) => format!("count gap {} between indices {a} and {b}", d.max_count_gap),
            None => "identical query counts for every index".into(),
        };
        s.check(Check::flag(format!("server {} query distribution independent of the index", d.server + 1), d.max_count_gap == 0, detail));
    }
    s.detail("communication_bits", &scheme.communication_bits());
    s.detail("quantum_communication_qubits", &(2 * scheme.communication_bits()));
    s.detail("verdict", &v);
    Ok(s)
}

fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' }).collect()
}

/// Databases to check the server's view against: all of them for short
/// databases, otherwise a fixed spread.
pub fn view_databases(n: usize) -> Vec<u64> {
    if n <= 3 {
        return (0..(1u64 << n)).collect();
    }
    let all = (1u64 << n) - 1;
    let alternating = 0xAAAA_AAAA_AAAA_AAAAu64 & all;
    let mut v = vec![0, all, alternating, all ^ alternating, 1, 1 << (n - 1)];
    v.sort_unstable();
    v.dedup();
    v
}

pub fn pir_bundle_into(s: &mut Section, b: &PirPrivacyBundle) {
    s.quantities.push(b.user_loss.clone());
    s.quantities.push(b.server_loss.clone());
    for o in &b.orderings {
        s.quantities.extend(o.superposed.iter().cloned());
        s.quantities.push(o.quantum.clone());
    }
    s.quantities.extend(b.quantum.iter().cloned());
    s.check(Check::within("user privacy loss is zero", b.user_loss.total, 0.0, USER_PRIVACY_TOLERANCE));
    let worst = s
        .quantities
        .iter()
        .filter(|q| q.side == b.server_loss.side)
        .map(|q| q.total)
        .fold(f64::NEG_INFINITY, f64::max);
    s.check(Check::at_most("server-side quantities within the communication bound", worst, b.server_bound + EQUALITY_TOLERANCE));
    for o in &b.orderings {
        let detail = if o.failures.is_empty() { "every measurement choice".to_string() } else { o.failures.join("; ") };
        s.check(Check::flag(format!("L <= SIC <= QIC on side {:?}", o.side), o.holds, detail));
    }
    if !b.skipped.is_empty() {
        s.detail("skipped", &b.skipped);
    }
}

pub fn quantum_pir_section(scheme: &ClassicalPirScheme, costs: bool) -> Result<Section, CliError> {
    let mut s = Section::new(format!("pir-quantum-{}", slug(&scheme.name)), format!("one-server quantum PIR from {}", scheme.name));
    let width = qpir_width(scheme);
    s.detail("width", &width);
    s.detail("communication_qubits", &(2 * scheme.communication_bits()));
    if width > MAX_QUBITS {
        s.detail("skipped", &format!("compiled protocol needs {width} qubits, above the {MAX_QUBITS}-qubit cap"));
        return Ok(s);
    }
    let p = build_qpir(scheme)?;
    s.protocol = Some(protocol_descriptor(&p));
    s.mode = Some("uniform index and database".into());
    let c = qpir_correctness(scheme, &p)?;
    let detail = match c.failures.first() {
        None => format!("{} (x, i) pairs, every branch decodes x_i", c.cases),
        Some((x, i)) => format!("{} failures, first x = {x:#x}, i = {i}", c.failures.len()),
    };
    s.check(Check::flag("every branch decodes", c.all_branches_correct, detail));
    s.check(Check::flag(
        "quantum communication is twice the classical",
        c.communication_qubits == 2 * scheme.communication_bits(),
        format!("{} qubits", c.communication_qubits),
    ));
    let databases = view_databases(scheme.n);
    let distances: Vec<f64> =
        databases.par_iter().map(|&x| server_view_independence(&p, x)).collect::<Result<_, qpriv_core::Error>>()?;
    let worst = distances.iter().copied().fold(0.0, f64::max);
    s.check(Check::at_most(format!("server view independent of the index ({} databases)", databases.len()), worst, STATE_TOLERANCE));
    let bundle = qpir_privacy_report(scheme, costs)?;
    pir_bundle_into(&mut s, &bundle);
    Ok(s)
}

pub fn pir_sections(kind: SchemeKind, n: usize, d: usize, costs: bool) -> Result<Vec<Section>, CliError> {
    let scheme = build_scheme(kind, n, d)?;
    Ok(vec![classical_section(&scheme)?, quantum_pir_section(&scheme, costs)?])
}

pub fn check_levels(ell: usize) -> Result<(), CliError> {
    if ell == 0 || ell > MAX_LEVELS {
        return Err(CliError::Usage(format!("ell = {ell} is outside 1..={MAX_LEVELS}")));
    }
    Ok(())
}

pub fn parse_database(ell: usize, hex: &str) -> Result<BitString, CliError> {
    BitString::from_hex(hex, 1 << ell).map_err(|e| CliError::Usage(format!("database: {e}")))
}

pub fn pir_entangled_sections(
    ell: usize,
    database: Option<&str>,
    index: Option<usize>,
    costs: bool,
) -> Result<Vec<Section>, CliError> {
    check_levels(ell)?;
    let n = 1usize << ell;
    let chosen = match (database, index) {
        (Some(db), Some(i)) => {
            let db = parse_database(ell, db)?;
            if i == 0 || i > n {
                return Err(CliError::Usage(format!("index {i} is outside 1..={n}")));
            }
            Some((db, i))
        }
        (None, None) => None,
        _ => return Err(CliError::Usage("--database and --index go together".into())),
    };
    let p = build_ppir(ell)?;
    let mut out = Vec::new();

    let mut run_section = Section::new(format!("ppir-l{ell}"), format!("PIR with prior entanglement, depth {ell}"));
    run_section.protocol = Some(protocol_descriptor(&p));
    communication_check(&mut run_section, p.communication_qubits(), ell);
    if let Some((db, i)) = &chosen {
        let run = run_ppir(ell, db.value(), *i)?;
        run_section.check(Check::flag(
            "recovered bit",
            run.recovered == Some(run.expected),
            format!(
                "x = {}, i = {i}: expected {}, recovered {}",
                run.database,
                run.expected,
                run.recovered.map_or("nothing definite".to_string(), |b| b.to_string())
            ),
        ));
        let min = run.closed_form_fidelities.iter().copied().fold(1.0, f64::min);
        run_section.check(Check::at_most("closed-form state infidelity at every level", 1.0 - min, STATE_TOLERANCE));
        run_section.detail("run", &run);
    }
    let samples = if ell <= MAX_ENSEMBLE_LEVELS { None } else { Some((DEPTH_THREE_SAMPLES, SAMPLE_SEED)) };
    let c = ppir_correctness(ell, samples)?;
    let detail = match c.failures.first() {
        None => format!("{} (x, i) pairs{}", c.cases, if c.exhaustive { ", exhaustive" } else { ", sampled" }),
        Some((x, i)) => format!("{} failures, first x = {x:#x}, i = {i}", c.failures.len()),
    };
    run_section.check(Check::flag("correctness", c.failures.is_empty(), detail));
    run_section.check(Check::at_most("closed-form state infidelity over all runs", 1.0 - c.min_fidelity, STATE_TOLERANCE));
    out.push(run_section);

    let mut privacy = Section::new(format!("ppir-l{ell}-privacy"), format!("PIR with prior entanglement, depth {ell}, privacy"));
    let databases: Vec<u64> = match &chosen {
        Some((db, _)) => vec![db.value()],
        None if ell <= MAX_ENSEMBLE_LEVELS => (0..(1u64 << n)).collect(),
        None => vec![0, 0xA6, 0xFF, 0x5A],
    };
    let views = databases
        .par_iter()
        .map(|&x| ppir_user_privacy(ell, x))
        .collect::<Result<Vec<_>, qpriv_core::Error>>()?;
    let distance = views.iter().map(|v| v.max_distance).fold(0.0, f64::max);
    let mixture = views.iter().map(|v| v.max_mixture_deviation).fold(0.0, f64::max);
    privacy.check(Check::at_most(
        format!("server state independent of the index ({} databases)", databases.len()),
        distance,
        STATE_TOLERANCE,
    ));
    privacy.check(Check::at_most("server state equals the closed-form mixture", mixture, STATE_TOLERANCE));
    if ell <= MAX_ENSEMBLE_LEVELS {
        privacy.mode = Some("uniform database and index".into());
        let bundle = ppir_privacy_report(ell, costs)?;
        pir_bundle_into(&mut privacy, &bundle);
    } else {
        privacy.detail("skipped", &format!("ensemble analysis above depth {MAX_ENSEMBLE_LEVELS}"));
    }
    out.push(privacy);
    Ok(out)
}

fn communication_check(s: &mut Section, qubits: usize, ell: usize) {
    s.check(Check::flag("communication is 4 ell + 1 qubits", qubits == 4 * ell + 1, format!("{qubits} qubits")));
}
