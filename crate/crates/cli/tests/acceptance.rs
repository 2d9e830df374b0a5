//! Runs the whole acceptance suite and prints one line per criterion.
//!
//! Criterion 4 asks for `L <= SIC(m)` at every measurement choice `m`.
//! For the one-server quantum PIR at n = 2 the server-side loss exceeds the
//! superposed cost when the user's index stays coherent through the last
//! answer (2.6101 against 2.2988), so that criterion is reported as failing.
//! The test pins that failure down exactly: any other failing check, or a
//! failure of the weaker `L <= max_m SIC(m) <= QIC` form, fails the test.

use qpriv_cli::report::Section;
use qpriv_cli::reproduce::{run_suite, Selection, CRITERIA};

const KNOWN_FAILING: &[&str] = &["pir-quantum-ordering: quantum PIR n = 2, side B"];

fn check<'a>(sections: &'a [Section], section: &str, name: &str) -> &'a qpriv_cli::report::Check {
    sections
        .iter()
        .find(|s| s.id == section)
        .and_then(|s| s.checks.iter().find(|c| c.name == name))
        .unwrap_or_else(|| panic!("missing check {section}: {name}"))
}

#[test]
fn acceptance_suite() {
    let outcome = run_suite(Selection::All, true).expect("suite runs");
    println!();
    for c in &outcome.criteria {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} criterion {:>2}: {} ({} checks)", c.id, c.title, c.checks);
        for f in &c.failing {
            println!("            failing: {f}");
        }
    }
    println!("suite time: {:.1} s", outcome.seconds);

    assert_eq!(outcome.criteria.len(), CRITERIA.len(), "every criterion is evaluated");
    for c in &outcome.criteria {
        if c.id == 4 {
            assert_eq!(c.failing, KNOWN_FAILING, "criterion 4 fails exactly where analyzed");
        } else {
            assert!(c.passed, "criterion {} failed: {:?}", c.id, c.failing);
        }
    }
    let weaker = check(&outcome.sections, "pir-quantum-ordering", "quantum PIR n = 2, side B: L <= max SIC <= QIC");
    assert!(weaker.passed, "{}", weaker.detail);
    let user = check(&outcome.sections, "pir-quantum-ordering", "quantum PIR n = 2, side A");
    assert!(user.passed, "{}", user.detail);
}
