use proptest::prelude::*;
use qpriv_core::pir::classical::*;

#[test]
fn cube_schemes_are_accepted() {
    for n in [4, 9, 16] {
        let s = cube_scheme(n, 2).unwrap();
        let v = verify_scheme(&s).unwrap();
        assert!(v.accepted, "n={n}: {:?}", v.counterexample);
        assert_eq!(v.servers.len(), 4);
        assert!(v.servers.iter().all(|d| d.max_count_gap == 0));
    }
    let s = cube_scheme(8, 3).unwrap();
    assert_eq!(s.servers, 8);
    assert!(verify_scheme(&s).unwrap().accepted);
    assert!(cube_scheme(10, 2).is_err());
}

#[test]
fn two_server_schemes_are_accepted() {
    for n in 1..=8 {
        let v = verify_scheme(&two_server_xor_scheme(n).unwrap()).unwrap();
        assert!(v.accepted, "n={n}");
        assert_eq!(v.scheme.communication_bits, 2 * (n + 1));
    }
}

#[test]
fn cleartext_index_is_rejected() {
    let v = verify_scheme(&cleartext_index_scheme(4).unwrap()).unwrap();
    assert!(v.correct);
    assert!(!v.private);
    assert!(!v.accepted);
    assert!((v.servers[0].max_tv_distance - 1.0).abs() < 1e-12);
}

#[test]
fn indices_are_checked() {
    let s = two_server_xor_scheme(4).unwrap();
    assert!(s.check_index(0).is_err());
    assert!(s.check_index(5).is_err());
    assert!(s.check_index(4).is_ok());
    assert!(two_server_xor_scheme(MAX_DATABASE_BITS + 1).is_err());
}

proptest! {
    #[test]
    fn retrieval_returns_the_indexed_bit(n in 1usize..=12, x in any::<u64>(), i in any::<usize>(), r in any::<u64>()) {
        let s = two_server_xor_scheme(n).unwrap();
        let x = x & ((1u64 << n) - 1);
        let i = i % n + 1;
        let r = r % s.randomness;
        prop_assert_eq!(s.retrieve(x, i, r), database_bit(x, n, i));
    }

    #[test]
    fn cube_retrieval(side in 2usize..=5, x in any::<u64>(), i in any::<usize>(), r in any::<u64>()) {
        let n = side * side;
        let s = cube_scheme(n, 2).unwrap();
        let x = x & ((1u64 << n) - 1);
        let i = i % n + 1;
        let r = r % s.randomness;
        prop_assert_eq!(s.retrieve(x, i, r), database_bit(x, n, i));
    }
}
