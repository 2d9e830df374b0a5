use qpriv_core::ip::build_ip_protocol;
use qpriv_core::privacy::{ordering_check, privacy_loss, quantum_ic, superposed_ic, Quantity, Side};
use qpriv_core::protocol::classical::{
    classical_transcript_privacy, id_minimum_protocol, id_minimum_substitution, random_protocol, MAX_ID_MIN_DOMAIN,
};
use qpriv_core::protocol::{
    echo_protocol, echo_with_copy, echo_with_local_unitary, fixed_message_protocol, verify_honest_execution,
    HonestyFailure, InputDistribution, Party,
};
use qpriv_core::Error;

#[test]
fn chain_rule_on_random_protocols() {
    for seed in 0..100 {
        let (p, mu) = random_protocol(seed);
        let r = classical_transcript_privacy(&p, &mu).unwrap();
        assert!(r.consistent, "seed {seed}: {} vs {}, {} vs {}", r.leak_x, r.sum_x, r.leak_y, r.sum_y);
        assert!(r.terms.iter().all(|t| t.value >= -1e-9));
    }
}

#[test]
fn ascending_halt_reveals_only_the_output() {
    for domain in [2, 5, MAX_ID_MIN_DOMAIN] {
        let p = id_minimum_protocol(domain).unwrap();
        let mu = InputDistribution::uniform(domain, domain);
        assert!(classical_transcript_privacy(&p, &mu).unwrap().consistent);
        let r = id_minimum_substitution(domain).unwrap();
        assert!(r.honest_excess.abs() < 1e-9, "domain {domain}: {}", r.honest_excess);
        assert!(r.substituted_excess > 0.1, "domain {domain}: {}", r.substituted_excess);
        assert!(r.reveal_probability > 0.0);
    }
    assert!(id_minimum_protocol(MAX_ID_MIN_DOMAIN + 1).is_err());
}

#[test]
fn fixed_messages_leak_nothing() {
    let p = fixed_message_protocol().unwrap();
    let mu = InputDistribution::new(vec![vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
    for side in [Side::A, Side::B] {
        assert!(privacy_loss(&p, &mu, side).unwrap().total.abs() < 1e-12);
        assert!(quantum_ic(&p, &mu, side).unwrap().total.abs() < 1e-12);
    }
}

#[test]
fn superposed_cost_needs_product_inputs() {
    let p = fixed_message_protocol().unwrap();
    let mu = InputDistribution::new(vec![vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
    assert!(matches!(superposed_ic(&p, &mu, Side::A, None), Err(Error::ModeMismatch(_))));
}

#[test]
fn reports_are_consistent_sums() {
    let p = build_ip_protocol(2).unwrap();
    let mu = InputDistribution::uniform(4, 4);
    let r = superposed_ic(&p, &mu, Side::B, Some(1)).unwrap();
    assert_eq!(r.quantity, Quantity::SuperposedCost);
    assert_eq!(r.party, "Bob");
    assert_eq!(r.terms.iter().map(|t| t.round).collect::<Vec<_>>(), vec![2]);
    assert!(r.is_consistent());
}

#[test]
fn inner_product_ordering() {
    for n in 1..=3 {
        let p = build_ip_protocol(n).unwrap();
        let mu = InputDistribution::uniform(1 << n, 1 << n);
        for side in [Side::A, Side::B] {
            let c = ordering_check(&p, &mu, side).unwrap();
            assert!(c.holds, "n={n} {side:?}: {:?}", c.failures);
            assert!(c.superposed.len() == p.round_count() + 2);
            assert!(c.loss.total <= c.superposed_max + 1e-9);
            assert!(c.superposed_max <= c.quantum.total + 1e-9);
        }
    }
}

#[test]
fn honest_and_deviated_runs() {
    let honest = echo_protocol().unwrap();
    assert!(verify_honest_execution(&honest, &honest).unwrap().accepted);

    let local = verify_honest_execution(&honest, &echo_with_local_unitary().unwrap()).unwrap();
    assert!(local.accepted, "{:?}", local.first_failure);

    let copy = verify_honest_execution(&honest, &echo_with_copy().unwrap()).unwrap();
    assert!(!copy.accepted);
    assert!(matches!(copy.first_failure, Some(HonestyFailure::Receiver { round: 2, .. })));
    let alice = copy.final_purity.iter().find(|p| p.party == Party::P0).unwrap();
    assert!((alice.prescribed - 1.0).abs() < 1e-9);
    assert!((alice.observed - 0.5).abs() < 1e-9);

    let ip = build_ip_protocol(2).unwrap();
    assert!(verify_honest_execution(&ip, &ip).unwrap().accepted);
    assert!(matches!(verify_honest_execution(&ip, &honest), Err(Error::Incompatible(_))));
}
