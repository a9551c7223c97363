use modsig::hofstadter::eval_direct;
use modsig::precision::{constants, Real};
use modsig::weyl::{direct_at_grid, fft_scan, fourier_coeffs, histogram, weyl_direct, Frequency};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};

#[test]
fn zero_frequency_sums_to_one() {
    let h = eval_direct(3, 10_000);
    let s = weyl_direct(&h, &Frequency::zero(), &[10, 10_001]).unwrap();
    for c in &s.checkpoints {
        assert_eq!((c.re, c.im), (1.0, 0.0));
    }
}

#[test]
fn fft_agrees_with_direct_at_random_grid_points() {
    let t = 10_000;
    let h = eval_direct(3, t);
    let spec = fft_scan(&h, t, None, "H").unwrap();
    let m = spec.grid_size;
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..10 {
        let j = rng.random_range(1..m);
        let direct = direct_at_grid(&h[..t], j, m);
        assert!((spec.magnitudes[j] - direct).abs() < 1e-6, "j={j}");
    }
}

#[test]
fn hofstadter_mod_m_coefficients_vanish() {
    let h = eval_direct(3, 10_000_000);
    for m in [2i64, 3, 5, 7] {
        let mu = fourier_coeffs(&h[1..], &Frequency::new("1/m", &Real::ratio(1, m)), m as usize - 1);
        for (i, z) in mu.iter().enumerate() {
            assert!(z.norm() < 0.02, "m={m} d={}: {}", i + 1, z.norm());
        }
    }
}

#[test]
fn d1_is_uniform() {
    let f = eval_direct(1, 1_000_000);
    let beta = Frequency::new("sqrt2", &Real::algebraic(constants::sqrt(2)));
    let dev = histogram(&f[1..], &beta, 64, "F").unwrap().max_deviation();
    assert!(dev <= 0.02, "{dev}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weyl_sums_lie_in_the_disk(values in proptest::collection::vec(any::<u64>(), 1..500), p in 0i64..1000) {
        let beta = Frequency::new("p/1000", &Real::ratio(p, 1000));
        let s = weyl_direct(&values, &beta, &[values.len()]).unwrap();
        prop_assert!(s.last().unwrap().modulus <= 1.0 + 1e-12);
    }

    #[test]
    fn histogram_counts_add_up(values in proptest::collection::vec(any::<u64>(), 0..500), bins in 1usize..2000) {
        let beta = Frequency::new("sqrt2", &Real::algebraic(constants::sqrt(2)));
        let h = histogram(&values, &beta, bins, "x").unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>(), values.len() as u64);
        prop_assert_eq!(h.total, values.len() as u64);
    }
}
