use num_complex::Complex64;
use qpriv_core::ip::*;
use qpriv_core::linalg::{spectrum_entropy, PureState, RegisterLayout};
use qpriv_core::privacy::{privacy_loss, quantum_ic, Side};
use qpriv_core::protocol::InputDistribution;

fn inner(x: u64, y: u64) -> u64 {
    ((x & y).count_ones() & 1) as u64
}

#[test]
fn outputs_inner_product_with_certainty() {
    for n in 1..=4 {
        let p = build_ip_protocol(n).unwrap();
        for x in 0..(1u64 << n) {
            for y in 0..(1u64 << n) {
                let run = p.run_honest(x, y).unwrap();
                assert_eq!(run.output, Some(inner(x, y)), "n={n} x={x} y={y}");
                assert_eq!(run.outcomes.len(), 1);
            }
        }
    }
}

#[test]
fn final_state_is_plus_register_and_result() {
    let n = 2;
    let p = build_ip_protocol(n).unwrap();
    let layout = RegisterLayout::new([("Q", n), ("R", 1)]).unwrap();
    for x in 0..4u64 {
        for y in 0..4u64 {
            let run = p.run_honest(x, y).unwrap();
            // the final state before measurement, after the local uncompute
            let dec = p.decoder().unwrap();
            let mut st = run.final_state.clone();
            let gate = (dec.steps[0].gate)(x);
            let perm = match gate {
                qpriv_core::protocol::Gate::Permutation(perm) => perm,
                _ => panic!("expected a permutation"),
            };
            let mut amps = vec![Complex64::new(0.0, 0.0); st.dim()];
            for (k, a) in st.amplitudes().iter().enumerate() {
                amps[perm[k]] = *a;
            }
            st = PureState::new(amps, layout.clone()).unwrap();
            let mut target = vec![Complex64::new(0.0, 0.0); 8];
            for r in 0..4usize {
                target[(r << 1) | inner(x, y) as usize] = Complex64::new(0.5, 0.0);
            }
            let target = PureState::new(target, layout.clone()).unwrap();
            assert!(st.fidelity(&target).unwrap() >= 1.0 - 1e-10);
        }
    }
}

#[test]
fn closed_form_first_message_matches_ensemble() {
    for n in 1..=6 {
        let analytic = analytic_first_message(n).unwrap();
        let ensemble = ensemble_first_message(n).unwrap();
        assert!(analytic.max_deviation(&ensemble).unwrap() <= 1e-10);
        assert!((analytic.trace().re - 1.0).abs() < 1e-12);
        let m = analytic.matrix();
        let full = (1u64 << n) as f64;
        assert!((m[(0, 0)].re - 1.0 / full).abs() < 1e-15);
        assert_eq!(m[(2, 3)].norm(), 0.0);
        let s = analytic.entropy().unwrap();
        assert!((s - gram_entropy(n).unwrap()).abs() < 1e-9, "n={n}");
    }
    assert!(analytic_first_message(8).is_ok());
}

#[test]
fn gram_oracle_values() {
    let one = gram_spectrum_oracle(1).unwrap();
    assert_eq!(one, vec![0.75, 0.25]);
    assert!((spectrum_entropy(&one) - 0.811_278_124_459_132_8).abs() < 1e-12);
    assert_eq!(gram_spectrum_oracle(2).unwrap(), vec![0.625, 0.125, 0.125, 0.125]);
    assert!((gram_entropy(2).unwrap() - 1.548_794_940_695_398_5).abs() < 1e-12);
    assert!((gram_entropy(4).unwrap() - 2.828_535).abs() < 1e-6);
    assert_eq!(gram_spectrum_oracle(16).unwrap().len(), 1 << 16);
}

#[test]
fn losses_match_closed_forms() {
    for n in 1..=4 {
        let p = build_ip_protocol(n).unwrap();
        let mu = InputDistribution::uniform(1 << n, 1 << n);
        let la = privacy_loss(&p, &mu, Side::A).unwrap();
        let lb = privacy_loss(&p, &mu, Side::B).unwrap();
        assert!((la.total - gram_entropy(n).unwrap()).abs() < 1e-9, "n={n}");
        assert!((lb.total - (1.0 - 0.5f64.powi(n as i32))).abs() < 1e-9, "n={n}");
        let qa = quantum_ic(&p, &mu, Side::A).unwrap();
        assert!((qa.total - la.total).abs() < 1e-9);
    }
}

#[test]
fn reference_table() {
    let t = theoretical_ip_table(4).unwrap();
    let get = |q: &str| t.iter().find(|r| r.quantity == q).unwrap();
    assert_eq!(get("L_B").published_asymptotic, 1.0);
    assert_eq!(get("QIC_B").published_asymptotic, 3.5);
    assert!((get("L_A").closed_form.unwrap() - 2.828_535).abs() < 1e-6);
    let e = first_message_entropy(6).unwrap();
    assert!(e.offset_one.abs() < e.offset_half.abs());
}

#[test]
fn tradeoff_is_correct_and_within_bounds() {
    let n = 4;
    let mu = InputDistribution::uniform(16, 16);
    for t in 0..=n {
        let p = build_ip_tradeoff(n, t).unwrap();
        for x in 0..16 {
            for y in 0..16 {
                assert_eq!(p.run_honest(x, y).unwrap().output, Some(inner(x, y)), "t={t} x={x} y={y}");
            }
        }
        let la = privacy_loss(&p, &mu, Side::A).unwrap().total;
        let lb = privacy_loss(&p, &mu, Side::B).unwrap().total;
        assert!(la <= t as f64 / 2.0 + 1.5 + 1e-9, "t={t} L_A={la}");
        assert!(lb <= (n - t) as f64 / 2.0 + 2.5 + 1e-9, "t={t} L_B={lb}");
    }
}

#[test]
fn full_split_is_the_plain_protocol_plus_a_constant_round() {
    let n = 4;
    let mu = InputDistribution::uniform(16, 16);
    let plain = build_ip_protocol(n).unwrap();
    let split = build_ip_tradeoff(n, n).unwrap();
    assert_eq!(split.round_count(), 4);
    assert!(split.message(3).unwrap().is_empty());
    for side in [Side::A, Side::B] {
        let a = privacy_loss(&plain, &mu, side).unwrap().total;
        let b = privacy_loss(&split, &mu, side).unwrap().total;
        assert!((a - b).abs() < 1e-9, "{side:?}: {a} vs {b}");
    }
}
