//! The acceptance suite behind `reproduce`. Every check carries the number
//! of the criterion it belongs to; a criterion passes when all of its
//! checks in the selected sections pass.

use std::time::Instant;

use rayon::prelude::*;

use qpriv_core::ip::{analytic_first_message, build_ip_protocol, build_ip_tradeoff, ensemble_first_message, gram_entropy, theoretical_ip_table};
use qpriv_core::pir::classical::{cube_scheme, two_server_xor_scheme, verify_scheme};
use qpriv_core::pir::entangled::{ppir_correctness, ppir_privacy_report, ppir_user_privacy, MAX_ENSEMBLE_LEVELS};
use qpriv_core::pir::quantum::{build_qpir, qpir_correctness, qpir_privacy_report, server_view_independence};
use qpriv_core::pir::{PirPrivacyBundle, USER_PRIVACY_TOLERANCE};
use qpriv_core::privacy::{ordering_check, privacy_loss, quantum_ic, Side};
use qpriv_core::protocol::classical::{
    classical_transcript_privacy, id_minimum_protocol, id_minimum_substitution, random_protocol, MAX_ID_MIN_DOMAIN,
};
use qpriv_core::protocol::{
    echo_protocol, echo_with_copy, verify_honest_execution, InputDistribution, Party,
};

use crate::commands::{
    certain_outputs, first_message_rows, parity, tradeoff_bounds, view_databases, DEPTH_THREE_SAMPLES,
    EQUALITY_TOLERANCE, MATRIX_TOLERANCE, SAMPLE_SEED, STATE_TOLERANCE,
};
use crate::report::{Check, CriterionVerdict, ReferenceRow, Section};
use crate::CliError;

pub const CRITERIA: [(u8, &str); 11] = [
    (1, "inner product is correct on every input"),
    (2, "first-message matrix matches the ensemble and the Gram oracle"),
    (3, "inner product privacy loss matches the closed forms"),
    (4, "L <= SIC <= QIC for every measurement choice"),
    (5, "split inner product is correct and within its bounds"),
    (6, "classical PIR schemes are correct and private"),
    (7, "one-server quantum PIR is correct and hides the index"),
    (8, "PIR with prior entanglement is correct and hides the index"),
    (9, "honest-execution checker"),
    (10, "classical chain rule and input substitution"),
    (11, "whole suite runs in under five minutes"),
];

pub const IP_CORRECTNESS_SECONDS: f64 = 10.0;
pub const SUITE_SECONDS: f64 = 300.0;
pub const RANDOM_PROTOCOLS: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Selection {
    All,
    Ip,
    Pir,
    PirEntangled,
    Framework,
}

pub struct SuiteOutcome {
    pub sections: Vec<Section>,
    pub criteria: Vec<CriterionVerdict>,
    pub seconds: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

fn tag(mut checks: Vec<Check>, id: u8) -> Vec<Check> {
    for c in &mut checks {
        c.criterion = Some(id);
    }
    checks
}

fn seconds_detail(timing: bool, seconds: f64, limit: f64) -> String {
    if timing {
        format!("{seconds:.3} s, limit {limit} s")
    } else {
        format!("limit {limit} s")
    }
}

fn ip_sections(timing: bool) -> Result<Vec<Section>, CliError> {
    let mut out = Vec::new();

    let mut s = Section::new("ip-correctness", "inner product correctness, n = 1..4");
    let start = Instant::now();
    for n in 1..=4 {
        let p = build_ip_protocol(n)?;
        let failures = certain_outputs(&p, parity)?;
        s.check(Check::flag(format!("n = {n}"), failures.is_empty(), format!("{} failing pairs", failures.len())).for_criterion(1));
    }
    let secs = start.elapsed().as_secs_f64();
    s.check(Check::flag("runtime", secs < IP_CORRECTNESS_SECONDS, seconds_detail(timing, secs, IP_CORRECTNESS_SECONDS)).for_criterion(1));
    out.push(s);

    let mut s = Section::new("ip-first-message", "first-message matrix, n = 1..6");
    for n in 1..=6 {
        let a = analytic_first_message(n)?;
        let gram = gram_entropy(n)?;
        s.check(Check::at_most(format!("n = {n}: entrywise against the ensemble"), a.max_deviation(&ensemble_first_message(n)?)?, MATRIX_TOLERANCE).for_criterion(2));
        s.check(Check::within(format!("n = {n}: entropy against the Gram oracle"), a.entropy()?, gram, EQUALITY_TOLERANCE).for_criterion(2));
    }
    out.push(s);

    let mut s = Section::new("ip-loss", "inner product privacy loss, n = 1..4");
    s.mode = Some("uniform inputs".into());
    for n in 1..=4 {
        let p = build_ip_protocol(n)?;
        let mu = InputDistribution::uniform(1 << n, 1 << n);
        let la = privacy_loss(&p, &mu, Side::A)?;
        let lb = privacy_loss(&p, &mu, Side::B)?;
        let qa = quantum_ic(&p, &mu, Side::A)?;
        let gram = gram_entropy(n)?;
        s.check(Check::within(format!("n = {n}: L_A equals the Gram-spectrum entropy"), la.total, gram, EQUALITY_TOLERANCE).for_criterion(3));
        s.check(Check::within(format!("n = {n}: L_B equals 1 - 2^-n"), lb.total, 1.0 - 0.5f64.powi(n as i32), EQUALITY_TOLERANCE).for_criterion(3));
        s.check(Check::within(format!("n = {n}: QIC_A equals L_A"), qa.total, la.total, EQUALITY_TOLERANCE).for_criterion(3));
        for row in theoretical_ip_table(n)? {
            let computed = match row.quantity.as_str() {
                "L_A" => la.total,
                "L_B" => lb.total,
                "QIC_A" => qa.total,
                _ => continue,
            };
            s.references.push(ReferenceRow::new(format!("{} (n = {n})", row.quantity), computed, row.published_asymptotic, "published asymptotic", true));
        }
        for mut r in first_message_rows(n)? {
            r.label = format!("{} (n = {n})", r.label);
            s.references.push(r);
        }
        s.quantities.extend([la, lb, qa]);
    }
    out.push(s);

    let mut s = Section::new("ip-ordering", "inner product ordering, n = 1..3");
    for n in 1..=3 {
        let p = build_ip_protocol(n)?;
        let mu = InputDistribution::uniform(1 << n, 1 << n);
        for side in [Side::A, Side::B] {
            let c = ordering_check(&p, &mu, side)?;
            let detail = if c.failures.is_empty() { format!("{} measurement choices", c.superposed.len()) } else { c.failures.join("; ") };
            s.check(Check::flag(format!("inner product n = {n}, side {side:?}"), c.holds, detail).for_criterion(4));
        }
    }
    out.push(s);

    let n = 4;
    let mut s = Section::new("ip-tradeoff", "split inner product, n = 4");
    s.mode = Some("uniform inputs".into());
    let mu = InputDistribution::uniform(1 << n, 1 << n);
    for t in 0..=n {
        let p = build_ip_tradeoff(n, t)?;
        let failures = certain_outputs(&p, parity)?;
        s.check(Check::flag(format!("t = {t}: correctness"), failures.is_empty(), format!("{} failing pairs", failures.len())).for_criterion(5));
        let la = privacy_loss(&p, &mu, Side::A)?;
        let lb = privacy_loss(&p, &mu, Side::B)?;
        let (ba, bb) = tradeoff_bounds(n, t);
        s.check(Check::at_most(format!("t = {t}: L_A <= t/2 + 3/2"), la.total, ba + EQUALITY_TOLERANCE).for_criterion(5));
        s.check(Check::at_most(format!("t = {t}: L_B <= (n-t)/2 + 5/2"), lb.total, bb + EQUALITY_TOLERANCE).for_criterion(5));
        s.quantities.extend([la, lb]);
    }
    out.push(s);
    Ok(out)
}

fn ordering_checks(label: &str, b: &PirPrivacyBundle) -> Vec<Check> {
    let mut checks = Vec::new();
    for o in &b.orderings {
        let detail = if o.failures.is_empty() { format!("{} measurement choices", o.superposed.len()) } else { o.failures.join("; ") };
        checks.push(Check::flag(format!("{label}, side {:?}", o.side), o.holds, detail));
        checks.push(Check::flag(
            format!("{label}, side {:?}: L <= max SIC <= QIC", o.side),
            o.holds_for_max,
            format!("L = {:.9}, max SIC = {:.9}, QIC = {:.9}", o.loss.total, o.superposed_max, o.quantum.total),
        ));
    }
    if b.orderings.len() != 2 {
        checks.push(Check::flag(format!("{label}: both sides analyzed"), false, b.skipped.join("; ")));
    }
    checks
}

fn bundle_checks(label: &str, b: &PirPrivacyBundle) -> Vec<Check> {
    vec![
        Check::within(format!("{label}: user loss is zero"), b.user_loss.total, 0.0, USER_PRIVACY_TOLERANCE),
        Check::at_most(format!("{label}: server loss within the bound"), b.server_loss.total, b.server_bound + EQUALITY_TOLERANCE),
    ]
}

fn pir_sections() -> Result<Vec<Section>, CliError> {
    let mut out = Vec::new();

    let mut s = Section::new("pir-classical", "classical PIR schemes");
    let mut schemes = Vec::new();
    for n in 1..=8 {
        schemes.push(two_server_xor_scheme(n)?);
    }
    for n in [4, 9, 16] {
        schemes.push(cube_scheme(n, 2)?);
    }
    let verdicts = schemes.iter().map(verify_scheme).collect::<Result<Vec<_>, _>>()?;
    for v in &verdicts {
        let gaps: Vec<u64> = v.servers.iter().map(|d| d.max_count_gap).collect();
        s.check(Check::flag(format!("{}: correct", v.scheme.name), v.correct, format!("{} cases", v.cases)).for_criterion(6));
        s.check(Check::flag(
            format!("{}: query distributions identical across indices", v.scheme.name),
            v.private && gaps.iter().all(|&g| g == 0),
            format!("count gaps {gaps:?}"),
        ).for_criterion(6));
    }
    s.detail("verdicts", &verdicts);
    out.push(s);

    let scheme = two_server_xor_scheme(4)?;
    let p = build_qpir(&scheme)?;
    let mut s = Section::new("pir-quantum", "one-server quantum PIR, two-server scheme, n = 4");
    s.mode = Some("uniform index and database".into());
    let c = qpir_correctness(&scheme, &p)?;
    s.check(Check::flag("every branch decodes", c.all_branches_correct, format!("{} pairs, {} failures", c.cases, c.failures.len())).for_criterion(7));
    let databases: Vec<u64> = (0..16).collect();
    let worst = databases
        .par_iter()
        .map(|&x| server_view_independence(&p, x))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    s.check(Check::at_most("server view independent of the index (all databases)", worst, STATE_TOLERANCE).for_criterion(7));
    let b = qpir_privacy_report(&scheme, false)?;
    s.checks.extend(tag(bundle_checks("n = 4", &b), 7));
    s.detail("communication_qubits", &c.communication_qubits);
    s.quantities.extend([b.user_loss.clone(), b.server_loss.clone()]);
    out.push(s);

    let scheme = two_server_xor_scheme(2)?;
    let mut s = Section::new("pir-quantum-ordering", "one-server quantum PIR ordering, n = 2");
    let b = qpir_privacy_report(&scheme, true)?;
    s.checks.extend(tag(ordering_checks("quantum PIR n = 2", &b), 4));
    for o in &b.orderings {
        s.quantities.push(o.loss.clone());
        s.quantities.extend(o.superposed.iter().cloned());
        s.quantities.push(o.quantum.clone());
    }
    out.push(s);
    Ok(out)
}

fn pir_entangled_sections() -> Result<Vec<Section>, CliError> {
    let mut out = Vec::new();
    let mut s = Section::new("ppir", "PIR with prior entanglement");
    for ell in 1..=3 {
        let samples = if ell <= MAX_ENSEMBLE_LEVELS { None } else { Some((DEPTH_THREE_SAMPLES, SAMPLE_SEED)) };
        let c = ppir_correctness(ell, samples)?;
        let how = if c.exhaustive { "exhaustive" } else { "sampled" };
        s.check(Check::flag(format!("depth {ell}: correctness"), c.failures.is_empty(), format!("{} pairs, {how}, {} failures", c.cases, c.failures.len())).for_criterion(8));
        s.check(Check::flag(
            format!("depth {ell}: communication is 4 ell + 1"),
            c.communication_qubits == 4 * ell + 1,
            format!("{} qubits", c.communication_qubits),
        ).for_criterion(8));
        s.check(Check::at_most(format!("depth {ell}: closed-form state infidelity"), 1.0 - c.min_fidelity, STATE_TOLERANCE).for_criterion(8));
        let databases: Vec<u64> = if ell <= MAX_ENSEMBLE_LEVELS { (0..(1u64 << (1 << ell))).collect() } else { view_databases(1 << ell) };
        let views = databases.par_iter().map(|&x| ppir_user_privacy(ell, x)).collect::<Result<Vec<_>, _>>()?;
        let distance = views.iter().map(|v| v.max_distance).fold(0.0, f64::max);
        s.check(Check::at_most(format!("depth {ell}: server state independent of the index ({} databases)", databases.len()), distance, STATE_TOLERANCE).for_criterion(8));
        if ell <= MAX_ENSEMBLE_LEVELS {
            let b = ppir_privacy_report(ell, false)?;
            s.checks.extend(tag(bundle_checks(&format!("depth {ell}"), &b), 8));
            s.quantities.extend([b.user_loss.clone(), b.server_loss.clone()]);
        }
    }
    out.push(s);

    let mut s = Section::new("ppir-ordering", "PIR with prior entanglement ordering, depth 1");
    let b = ppir_privacy_report(1, true)?;
    s.checks.extend(tag(ordering_checks("entangled PIR depth 1", &b), 4));
    for o in &b.orderings {
        s.quantities.push(o.loss.clone());
        s.quantities.extend(o.superposed.iter().cloned());
        s.quantities.push(o.quantum.clone());
    }
    out.push(s);
    Ok(out)
}

fn framework_sections() -> Result<Vec<Section>, CliError> {
    let mut out = Vec::new();
    let mut s = Section::new("honesty", "honest-execution checker");
    let ip = build_ip_protocol(2)?;
    let v = verify_honest_execution(&ip, &ip)?;
    s.check(Check::flag("honest inner product accepted", v.accepted, format!("{:?}", v.first_failure)).for_criterion(9));
    let echo = echo_protocol()?;
    let v = verify_honest_execution(&echo, &echo)?;
    s.check(Check::flag("honest echo accepted", v.accepted, format!("{:?}", v.first_failure)).for_criterion(9));
    let v = verify_honest_execution(&echo, &echo_with_copy()?)?;
    let detail = v.first_failure.as_ref().map(|f| format!("first failure in round {}", f.round())).unwrap_or_default();
    s.check(Check::flag("copying deviation rejected", !v.accepted, detail).for_criterion(9));
    let alice = v.final_purity.iter().find(|p| p.party == Party::P0);
    let (observed, prescribed) = alice.map(|a| (a.observed, a.prescribed)).unwrap_or((0.0, 0.0));
    s.check(Check::within("Alice's final purity under the deviation", observed, 0.5, EQUALITY_TOLERANCE).for_criterion(9));
    s.check(Check::within("Alice's prescribed final purity", prescribed, 1.0, EQUALITY_TOLERANCE).for_criterion(9));
    s.detail("copy_verdict", &v);
    out.push(s);

    let mut s = Section::new("chain-rule", "classical chain rule");
    let mut worst = 0.0f64;
    let mut inconsistent = Vec::new();
    for seed in 0..RANDOM_PROTOCOLS {
        let (p, mu) = random_protocol(seed);
        let r = classical_transcript_privacy(&p, &mu)?;
        worst = worst.max((r.leak_x - r.sum_x).abs()).max((r.leak_y - r.sum_y).abs());
        if !r.consistent {
            inconsistent.push(seed);
        }
    }
    s.check(Check::at_most(format!("{RANDOM_PROTOCOLS} random protocols: direct against round sums"), worst, EQUALITY_TOLERANCE).for_criterion(10));
    let mut worst = 0.0f64;
    let mut not_increased = Vec::new();
    let mut reports = Vec::new();
    for domain in 2..=MAX_ID_MIN_DOMAIN {
        let p = id_minimum_protocol(domain)?;
        let r = classical_transcript_privacy(&p, &InputDistribution::uniform(domain, domain))?;
        worst = worst.max((r.leak_x - r.sum_x).abs()).max((r.leak_y - r.sum_y).abs());
        let sub = id_minimum_substitution(domain)?;
        if sub.substituted_excess <= sub.honest_excess {
            not_increased.push(domain);
        }
        reports.push(sub);
    }
    s.check(Check::at_most(format!("minimum finding, domains 2..={MAX_ID_MIN_DOMAIN}: direct against round sums"), worst, EQUALITY_TOLERANCE).for_criterion(10));
    s.check(Check::flag(
        "random-input substitution strictly increases the leakage about Bob's input",
        not_increased.is_empty(),
        if not_increased.is_empty() { "every domain".to_string() } else { format!("no increase at domains {not_increased:?}") },
    ).for_criterion(10));
    s.detail("substitution", &reports);
    out.push(s);
    Ok(out)
}

fn verdicts(sections: &[Section]) -> Vec<CriterionVerdict> {
    CRITERIA
        .iter()
        .filter_map(|&(id, title)| {
            let checks: Vec<(&Section, &Check)> = sections
                .iter()
                .flat_map(|s| s.checks.iter().map(move |c| (s, c)))
                .filter(|(_, c)| c.criterion == Some(id))
                .collect();
            if checks.is_empty() {
                return None;
            }
            let failing: Vec<String> =
                checks.iter().filter(|(_, c)| !c.passed).map(|(s, c)| format!("{}: {}", s.id, c.name)).collect();
            Some(CriterionVerdict { id, title: title.into(), passed: failing.is_empty(), checks: checks.len(), failing })
        })
        .collect()
}

/// Runs the selected part of the suite. The runtime criterion is only
/// evaluated for the whole suite.
pub fn run_suite(selection: Selection, timing: bool) -> Result<SuiteOutcome, CliError> {
    let start = Instant::now();
    let mut sections = Vec::new();
    let all = selection == Selection::All;
    if all || selection == Selection::Ip {
        sections.extend(ip_sections(timing)?);
    }
    if all || selection == Selection::Pir {
        sections.extend(pir_sections()?);
    }
    if all || selection == Selection::PirEntangled {
        sections.extend(pir_entangled_sections()?);
    }
    if all || selection == Selection::Framework {
        sections.extend(framework_sections()?);
    }
    let seconds = start.elapsed().as_secs_f64();
    if all {
        let mut s = Section::new("suite", "suite runtime");
        s.check(Check::flag("whole suite", seconds < SUITE_SECONDS, seconds_detail(timing, seconds, SUITE_SECONDS)).for_criterion(11));
        sections.push(s);
    }
    let criteria = verdicts(&sections);
    Ok(SuiteOutcome { sections, criteria, seconds })
}
