use modsig::hofstadter::{eval_direct, eval_shift, linear_envelope, max_preimages};
use modsig::numeration::{decode, encode_greedy, Registry};
use modsig::seqcore::{generate_recurrent, generate_ulam, RecurrenceSpec};
use num_bigint::BigInt;
use proptest::prelude::*;

#[test]
fn ulam_terms_have_exactly_one_representation() {
    let u = generate_ulam(400).unwrap().u64_prefix();
    assert!(u.windows(2).all(|w| w[0] < w[1]));
    for (i, &x) in u.iter().enumerate().skip(2) {
        let mut reps = 0;
        for a in 0..i {
            for b in a + 1..i {
                if u[a] + u[b] == x {
                    reps += 1;
                }
            }
        }
        assert_eq!(reps, 1, "u[{i}] = {x}");
    }
    // every skipped integer below the last term has zero or several
    let max = *u.last().unwrap();
    for m in 3..max {
        if u.binary_search(&m).is_ok() {
            continue;
        }
        let below: Vec<u64> = u.iter().copied().filter(|&v| v < m).collect();
        let reps = below
            .iter()
            .filter(|&&a| 2 * a < m && below.binary_search(&(m - a)).is_ok())
            .count();
        assert_ne!(reps, 1, "{m} should have been taken");
    }
}

#[test]
fn recurrences_have_zero_residual() {
    for spec in [
        RecurrenceSpec::narayana(),
        RecurrenceSpec::fibonacci(),
        RecurrenceSpec::sqrt13_example(),
        RecurrenceSpec::sqrt6_example(),
    ] {
        generate_recurrent(&spec, 400).unwrap().check_recurrence().unwrap();
    }
}

#[test]
fn round_trip_on_every_registered_base() {
    let reg = Registry::default();
    for b in &reg.bases {
        let base = reg.base_past(&b.name, 100_000).unwrap();
        for n in 0..=100_000u64 {
            let n = BigInt::from(n);
            let rep = encode_greedy(&n, &base).unwrap();
            assert_eq!(decode(&rep, &base).unwrap(), n, "base {}", b.name);
        }
    }
}

#[test]
fn narayana_digits_are_three_apart() {
    let base = Registry::default().base_past("narayana", 100_000).unwrap();
    for n in 1..=100_000u64 {
        let idx = encode_greedy(&BigInt::from(n), &base).unwrap().indices();
        for w in idx.windows(2) {
            assert!(w[0].abs_diff(w[1]) >= 3, "{n}: {idx:?}");
        }
    }
}

#[test]
fn preimages_are_one_or_two() {
    let n = 200_000usize;
    let map = Registry::default().map("narayana_shift", n as u64).unwrap();
    let bulk = map.bulk(n).unwrap();
    let counts = bulk.preimage_counts();
    let top = *bulk.values.last().unwrap() as usize;
    let base = map.source();
    let mut twice = vec![false; top + 1];
    for i in 1..n {
        let rep = encode_greedy(&BigInt::from(i), base).unwrap();
        if rep.lowest_index() == Some(1) {
            twice[bulk.values[i] as usize] = true;
        }
    }
    for m in 1..top {
        assert!(counts[m] == 1 || counts[m] == 2, "m = {m}");
        assert_eq!(counts[m] == 2, twice[m], "m = {m}");
    }
}

#[test]
fn hofstadter_envelope_and_preimages_to_a_million() {
    let h = eval_direct(3, 1_000_000);
    assert!(max_preimages(&h) <= 2);
    let env = linear_envelope(&h, 0.682_327_803_828_019_3);
    assert!(env.max_deviation < 3.0, "{env:?}");
}

proptest! {
    #[test]
    fn big_round_trip(digits in proptest::collection::vec(0u8..10, 1..60)) {
        let text: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
        let n: BigInt = text.parse().unwrap();
        let base = Registry::default().base("narayana", 400).unwrap();
        let rep = encode_greedy(&n, &base).unwrap();
        prop_assert_eq!(decode(&rep, &base).unwrap(), n);
    }

    #[test]
    fn direct_equals_shift(d in 1usize..=7, n in 1usize..3000) {
        prop_assert_eq!(eval_direct(d, n), eval_shift(d, n).unwrap());
    }
}
