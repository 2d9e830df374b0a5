use num_complex::Complex64;
use proptest::prelude::*;

use qpriv_core::linalg::{
    conditional_mutual_information, CqEntry, CqState, DensityMatrix, PureState, RegisterEntropy, RegisterLayout,
};
use qpriv_core::protocol::{round_state, AnalysisMode, InputDistribution, RoundState};

fn layout(regs: &[(&str, usize)]) -> RegisterLayout {
    RegisterLayout::new(regs.iter().map(|&(n, w)| (n, w))).unwrap()
}

fn amplitudes(dim: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect::<Vec<_>>())
        .prop_filter("non-zero vector", |v| v.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3)
}

fn four_qubits() -> impl Strategy<Value = PureState> {
    amplitudes(16).prop_map(|a| PureState::normalized(a, layout(&[("A", 1), ("B", 1), ("C", 1), ("D", 1)])).unwrap())
}

fn reduced_pair() -> impl Strategy<Value = (DensityMatrix, DensityMatrix, DensityMatrix)> {
    let three = || {
        amplitudes(16).prop_map(|a| {
            PureState::normalized(a, layout(&[("S", 2), ("E", 2)])).unwrap().reduced(&["S"]).unwrap()
        })
    };
    (three(), three(), three())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_preserves_trace(psi in four_qubits()) {
        let rho = psi.to_density();
        for keep in [vec!["A"], vec!["B", "D"], vec!["A", "C", "D"]] {
            let t = rho.partial_trace(&keep).unwrap().trace();
            prop_assert!((t.re - 1.0).abs() < 1e-10 && t.im.abs() < 1e-10);
        }
    }

    #[test]
    fn entropy_within_bounds(psi in four_qubits()) {
        for (keep, qubits) in [(vec!["A"], 1.0f64), (vec!["A", "B"], 2.0), (vec!["B", "C", "D"], 3.0)] {
            let s = psi.entropy_of_registers(&keep).unwrap();
            prop_assert!(s >= -1e-10 && s <= qubits.min(4.0 - qubits) + 1e-9);
        }
    }

    #[test]
    fn pure_state_entropy_matches_dense_route(psi in four_qubits()) {
        for keep in [vec!["A", "C"], vec!["B", "C", "D"]] {
            let sparse = psi.entropy_of_registers(&keep).unwrap();
            let dense = psi.reduced(&keep).unwrap().entropy().unwrap();
            prop_assert!((sparse - dense).abs() < 1e-9);
        }
    }

    #[test]
    fn strong_subadditivity(psi in four_qubits()) {
        let s = |r: &[&str]| psi.entropy_of_registers(r).unwrap();
        let lhs = s(&["A", "B"]) + s(&["B", "C"]);
        let rhs = s(&["A", "B", "C"]) + s(&["B"]);
        prop_assert!(lhs >= rhs - 1e-9);
        prop_assert!(conditional_mutual_information(&psi, &["A"], &["C"], &["B"]).unwrap() >= -1e-9);
    }

    #[test]
    fn trace_distance_is_a_metric((a, b, c) in reduced_pair()) {
        let d = |x: &DensityMatrix, y: &DensityMatrix| x.trace_distance(y).unwrap();
        prop_assert!(d(&a, &a).abs() < 1e-10);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-10);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
        prop_assert!(d(&a, &b) <= 1.0 + 1e-10);
    }

    #[test]
    fn classical_quantum_shortcut_matches_assembled(
        states in prop::collection::vec(amplitudes(4), 2..5),
        weights in prop::collection::vec(0.05..1.0f64, 4),
    ) {
        let total: f64 = weights[..states.len()].iter().sum();
        let entries: Vec<CqEntry> = states
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                let psi = PureState::normalized(a, layout(&[("A", 1), ("B", 1)])).unwrap();
                CqEntry::pure(vec![format!("c{i}")], weights[i] / total, psi)
            })
            .collect();
        let cq = CqState::new(vec!["C"], entries).unwrap();
        let dense = cq.assemble().unwrap();
        for regs in [vec!["C"], vec!["A"], vec!["C", "B"], vec!["C", "A", "B"], vec!["A", "B"]] {
            let fast = cq.entropy_of_registers(&regs).unwrap();
            let slow = dense.entropy_of_registers(&regs).unwrap();
            prop_assert!((fast - slow).abs() < 1e-9, "{regs:?}: {fast} vs {slow}");
        }
    }
}

#[test]
fn purified_state_matches_dense_assembly() {
    let p = qpriv_core::ip::build_ip_protocol(1).unwrap();
    let mu = InputDistribution::new(vec![vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
    for k in 0..=2 {
        let RoundState::Purified(implicit) = round_state(&p, &AnalysisMode::Purified(mu.clone()), k).unwrap() else {
            panic!("expected a purified state");
        };
        let dense = implicit.assemble().unwrap();
        for regs in [
            vec!["Env"],
            vec!["Env", "Q"],
            vec!["Env", "X"],
            vec!["Env", "R", "Y"],
            vec!["X", "Q", "R"],
            vec!["Env", "X", "Y", "Q"],
        ] {
            let a = implicit.entropy_of(&regs).unwrap();
            let b = dense.entropy_of_registers(&regs).unwrap();
            assert!((a - b).abs() < 1e-9, "round {k} {regs:?}: {a} vs {b}");
        }
    }
}

#[test]
fn superposed_measured_at_start_is_classical() {
    let p = qpriv_core::ip::build_ip_protocol(2).unwrap();
    let mu = InputDistribution::uniform(4, 4);
    for side in [qpriv_core::privacy::Side::A, qpriv_core::privacy::Side::B] {
        let l = qpriv_core::privacy::privacy_loss(&p, &mu, side).unwrap();
        let s = qpriv_core::privacy::superposed_ic(&p, &mu, side, Some(0)).unwrap();
        assert!((l.total - s.total).abs() < 1e-12);
    }
}
