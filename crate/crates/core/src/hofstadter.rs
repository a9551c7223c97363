//! `H(n) = n − H^{(d)}(n−1)` with `H(1) = 1`.
//!
//! `d = 1` gives `⌈n/2⌉`, `d = 2` gives `⌊(n+1)/φ⌋` and `d = 3` is Hofstadter's
//! `H`. Tables are indexed from 0 with `H(0) = 0`, which is the value the
//! recursion needs at `n = 1`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::numeration::{base_past, encode_greedy, right_shift, ReplacementMap};
use crate::seqcore::RecurrenceSpec;
use crate::{Error, Result};

/// `H(0), H(1), …, H(upto)` by bottom-up evaluation.
pub fn eval_direct(d: usize, upto: usize) -> Vec<u64> {
    assert!(d >= 1, "depth must be positive");
    let mut h = vec![0u64; upto + 1];
    if upto >= 1 {
        h[1] = 1;
    }
    for n in 2..=upto {
        let mut x = (n - 1) as u64;
        for _ in 0..d {
            // H(m) ≤ m, so every argument is already tabulated
            debug_assert!((x as usize) < n);
            x = h[x as usize];
        }
        h[n] = n as u64 - x;
    }
    h
}

/// Same table, each value obtained by encoding `n` in the generalized
/// Narayana base, shifting the digits right and decoding.
pub fn eval_shift(d: usize, upto: usize) -> Result<Vec<u64>> {
    let base = base_past(&RecurrenceSpec::generalized_narayana(d), upto as u64)?;
    let mut out = Vec::with_capacity(upto + 1);
    out.push(0);
    for n in 1..=upto {
        let rep = encode_greedy(&BigInt::from(n), &base)?;
        let v = right_shift(&rep, &base)?.value;
        out.push(v.to_u64().ok_or_else(|| Error::invalid("value exceeds 64 bits"))?);
    }
    Ok(out)
}

/// The shift table computed by the `O(N)` replacement recursion.
pub fn eval_shift_bulk(d: usize, upto: usize) -> Result<Vec<u64>> {
    let map = ReplacementMap::hofstadter(d, upto as u64 + 1)?;
    Ok(map.bulk(upto + 1)?.values)
}

/// Checks `1 ≤ H(n) ≤ n` and monotonicity; returns the first offending `n`.
pub fn check_shape(h: &[u64]) -> Result<()> {
    for n in 1..h.len() {
        if h[n] < 1 || h[n] > n as u64 {
            return Err(Error::Hypothesis(format!("H({n}) = {} outside [1, n]", h[n])));
        }
        if h[n] < h[n - 1] {
            return Err(Error::Hypothesis(format!("H decreases at {n}")));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Envelope {
    /// `max |H(n) − α·n|` over the table.
    pub max_deviation: f64,
    pub at: usize,
}

/// Deviation of `H(n)` from the line `α·n`.
pub fn linear_envelope(h: &[u64], alpha: f64) -> Envelope {
    let mut best = Envelope {
        max_deviation: 0.0,
        at: 0,
    };
    for (n, &v) in h.iter().enumerate() {
        let dev = (v as f64 - alpha * n as f64).abs();
        if dev > best.max_deviation {
            best = Envelope {
                max_deviation: dev,
                at: n,
            };
        }
    }
    best
}

/// Largest number of `n ≥ 1` sharing a value, over values below `H(last)`
/// (the last value may still collect preimages beyond the table).
pub fn max_preimages(h: &[u64]) -> usize {
    let mut best = 0usize;
    let mut run = 0usize;
    let last = *h.last().unwrap_or(&0);
    for n in 1..h.len() {
        if n > 1 && h[n] == h[n - 1] {
            run += 1;
        } else {
            run = 1;
        }
        if h[n] < last {
            best = best.max(run);
        }
    }
    best
}

/// `n,H(n)` lines with a header.
pub fn write_csv<W: std::io::Write>(h: &[u64], mut w: W) -> Result<()> {
    writeln!(w, "n,value")?;
    for (n, v) in h.iter().enumerate().skip(1) {
        writeln!(w, "{n},{v}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_fifteen() {
        let h = eval_direct(3, 16);
        assert_eq!(&h[1..16], &[1, 1, 2, 3, 4, 4, 5, 5, 6, 7, 7, 8, 9, 10, 10]);
        assert_eq!(h[16], 11);
        assert_eq!(eval_shift(3, 16).unwrap()[16], 11);
    }

    #[test]
    fn d1_is_half_rounded_up() {
        let f = eval_direct(1, 10_000);
        for n in 1..=10_000u64 {
            assert_eq!(f[n as usize], n.div_ceil(2));
        }
    }

    /// `⌊m/φ⌋ = ⌊(√(5m²) − m)/2⌋`, exact since `5m²` is never a square.
    fn floor_over_phi(m: u64) -> u64 {
        ((5 * m * m).isqrt() - m) / 2
    }

    #[test]
    fn d2_is_n_plus_one_over_phi_rounded_down() {
        let g = eval_direct(2, 10_000);
        for n in 1..=10_000u64 {
            assert_eq!(g[n as usize], floor_over_phi(n + 1), "n={n}");
        }
        // 10 = 8 + 2 in the Fibonacci base shifts to 5 + 1
        assert_eq!(eval_shift(2, 10).unwrap()[10], 6);
    }

    #[test]
    fn ceiling_of_n_over_phi_is_a_different_sequence() {
        let g = eval_direct(2, 10_000);
        let ceil = |n: u64| floor_over_phi(n) + 1;
        let diffs: Vec<u64> = (1..=10_000u64).filter(|&n| g[n as usize] != ceil(n)).collect();
        assert_eq!(diffs[0], 2);
        assert!(diffs.contains(&10));
        // they differ exactly when {n/φ} < 2 − φ
        assert!(diffs.len() > 3000 && diffs.len() < 4000, "{}", diffs.len());
    }

    #[test]
    fn shift_matches_direct() {
        for d in 1..=4 {
            assert_eq!(eval_shift(d, 3000).unwrap(), eval_direct(d, 3000), "d={d}");
            assert_eq!(eval_shift_bulk(d, 3000).unwrap(), eval_direct(d, 3000), "d={d}");
        }
    }

    #[test]
    fn shape_and_preimages() {
        let h = eval_direct(3, 100_000);
        check_shape(&h).unwrap();
        assert_eq!(max_preimages(&h), 2);
        let env = linear_envelope(&h, 0.682_327_803_828_019_3);
        assert!(env.max_deviation < 3.0, "{env:?}");
        assert!(check_shape(&[0, 2]).is_err());
    }
}
