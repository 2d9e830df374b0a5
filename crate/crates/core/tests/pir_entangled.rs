use qpriv_core::bits::BitString;
use qpriv_core::pir::entangled::*;
use qpriv_core::privacy::Side;

#[test]
fn recovers_every_bit() {
    for ell in 1..=2 {
        let c = ppir_correctness(ell, None).unwrap();
        assert!(c.exhaustive);
        assert!(c.failures.is_empty(), "ell={ell}: {:?}", c.failures);
        assert!(c.min_fidelity >= 1.0 - 1e-10);
        assert_eq!(c.communication_qubits, 4 * ell + 1);
    }
    let c = ppir_correctness(3, Some((64, 7))).unwrap();
    assert!(!c.exhaustive && c.failures.is_empty());
}

#[test]
fn worked_run() {
    let r = run_ppir(3, 0xA6, 1).unwrap();
    assert_eq!(r.expected, 1);
    assert_eq!(r.recovered, Some(1));
    assert_eq!(r.closed_form_fidelities.len(), 3);
    assert_eq!(r.communication_qubits, 13);
}

#[test]
fn fixed_phase_breaks_retrieval() {
    let p = build_ppir_fixed_phase(2).unwrap();
    let wrong = (0..16u64)
        .flat_map(|x| (1..=4usize).map(move |i| (x, i)))
        .filter(|&(x, i)| p.run_honest(x, i as u64 - 1).map(|r| r.output != Some((x >> (4 - i)) & 1)).unwrap_or(true))
        .count();
    assert!(wrong > 0);
}

#[test]
fn decoder_examples() {
    let a = BitString::parse("1").unwrap();
    assert!(ppir_decode(&a, &[], &[]).is_err());
    let b = vec![BitString::parse("0").unwrap()];
    assert!(ppir_decode(&a, &b, &[true]).unwrap());
    assert!(ppir_decode(&a, &[BitString::parse("00").unwrap()], &[true]).is_err());
    let zero = BitString::parse("0").unwrap();
    let b = vec![BitString::parse("10").unwrap(), BitString::parse("1").unwrap()];
    assert!(ppir_decode(&zero, &b, &[false, true]).unwrap());
    assert!(!ppir_decode(&zero, &b, &[false, false]).unwrap());
}

#[test]
fn user_index_is_hidden() {
    for (ell, x) in [(1, 0b10), (2, 0xB), (3, 0xA6)] {
        let u = ppir_user_privacy(ell, x).unwrap();
        assert!(u.max_distance < 1e-10, "ell={ell}: {}", u.max_distance);
        assert!(u.max_mixture_deviation < 1e-10);
    }
}

#[test]
fn leakage_of_both_sides() {
    let b1 = ppir_privacy_report(1, true).unwrap();
    assert_eq!(b1.user_loss.side, Side::B);
    assert!(b1.user_private);
    assert!((b1.server_loss.total - 2.0).abs() < 1e-9);
    assert!(b1.ordering_holds && b1.passed());
    let b2 = ppir_privacy_report(2, false).unwrap();
    assert!((b2.server_loss.total - 3.5).abs() < 1e-9);
    assert!(b2.server_within_bound);
    assert_eq!(b2.server_bound, 5.0);
    assert!(ppir_privacy_report(3, false).is_err());
}
