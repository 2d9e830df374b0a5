use qpriv_core::pir::classical::{cube_scheme, two_server_xor_scheme};
use qpriv_core::pir::quantum::*;
use qpriv_core::privacy::Side;

#[test]
fn every_branch_decodes() {
    for n in 1..=4 {
        let s = two_server_xor_scheme(n).unwrap();
        let p = build_qpir(&s).unwrap();
        let c = qpir_correctness(&s, &p).unwrap();
        assert!(c.all_branches_correct, "n={n}: {:?}", c.failures);
        assert_eq!(c.communication_qubits, 4 * (n + 1));
    }
    let cube = cube_scheme(4, 2).unwrap();
    assert!(build_qpir(&cube).is_err());
}

#[test]
fn server_view_is_independent_of_the_index() {
    let s = two_server_xor_scheme(3).unwrap();
    let p = build_qpir(&s).unwrap();
    for x in 0..8 {
        assert!(server_view_independence(&p, x).unwrap() < 1e-10);
    }
    let tilted = build_qpir_tilted(&s).unwrap();
    assert!(server_view_independence(&tilted, 0b101).unwrap() > 0.05);
}

#[test]
fn privacy_of_both_sides() {
    let s = two_server_xor_scheme(2).unwrap();
    let b = qpir_privacy_report(&s, true).unwrap();
    assert_eq!(b.user_loss.side, Side::A);
    assert!(b.user_private);
    assert!(b.user_loss.total.abs() < 1e-10);
    assert!((b.server_loss.total - 2.6101).abs() < 1e-4, "{}", b.server_loss.total);
    assert!(b.server_within_bound);
    assert_eq!(b.orderings.len(), 2);
    let user = b.orderings.iter().find(|o| o.side == Side::A).unwrap();
    assert!(user.holds);
    // the server side exceeds the cost of superposed runs measured late;
    // only the maximum over measurement rounds dominates the loss
    let server = b.orderings.iter().find(|o| o.side == Side::B).unwrap();
    assert!(!server.holds);
    assert!(server.holds_for_max);
    assert!(!b.ordering_holds);
}
