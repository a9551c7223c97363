use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::algebraic::AlgebraicReal;
use super::ext::ExtReal;
use super::real::Real;
use crate::seqcore::SequenceTable;
use crate::{Error, Result};

/// Guard bits used on top of the integer part of `β·a` by default.
pub const DEFAULT_GUARD_BITS: u32 = 64;
/// Largest guard the escalation loop will try.
pub const MAX_GUARD_BITS: u32 = 4096;

/// `‖β·a‖` enclosed with `guard` bits past the integer part of `β·a`.
///
/// Fails only when the frequency itself is known too coarsely for the
/// enclosure to say anything (half-width of 1/2 or more).
pub fn dist_to_int(beta: &Real, a: &BigInt, guard: u32) -> Result<ExtReal> {
    let x = beta.times_int_enclosure(a, guard);
    let d = x.dist_to_int();
    if d.error_f64() >= 0.5 {
        return Err(Error::Indeterminate(format!(
            "frequency {beta} is too coarse for a {}-bit multiplier",
            a.bits()
        )));
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    DecaysGeometric,
    NonDecaying,
    Indeterminate,
}

/// Thresholds for [`classify_decay`]. They classify a finite window and say
/// nothing about limits.
#[derive(Clone, Debug, Serialize)]
pub struct DecayConfig {
    /// The fitted slope of `ln‖βa_k‖` must be below `−delta`.
    pub delta: f64,
    /// Every tail sample must be below `epsilon` to call the window decaying.
    pub epsilon: f64,
    pub non_decay_level: f64,
    /// Share of tail samples above `non_decay_level` that marks non-decay.
    pub non_decay_share: f64,
    pub guard_bits: u32,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig {
            delta: 0.05,
            epsilon: 1e-3,
            non_decay_level: 0.05,
            non_decay_share: 0.2,
            guard_bits: DEFAULT_GUARD_BITS,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecaySample {
    pub k: usize,
    pub dist: ExtReal,
    pub indeterminate: bool,
}

impl Serialize for DecaySample {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DecaySample", 4)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("value", &format!("{:.17e}", self.dist.to_f64()))?;
        st.serialize_field("error_log2", &self.dist.error_log2())?;
        st.serialize_field("indeterminate", &self.indeterminate)?;
        st.end()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub frequency: String,
    pub sequence: String,
    pub requested_range: (usize, usize),
    /// Window actually sampled; shorter than requested when the frequency
    /// carries a fixed number of bits.
    pub range: (usize, usize),
    pub samples: Vec<DecaySample>,
    pub classification: DecayClass,
    /// Least-squares slope of `ln‖βa_k‖` against `k` (when geometric).
    pub fitted_rate: Option<f64>,
    pub slope: Option<f64>,
    pub tail_max: Option<f64>,
    pub tail_share_above: f64,
    pub config: DecayConfig,
}

impl DecayReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn sample(beta: &Real, a: &BigInt, guard: u32, limit: Option<u32>) -> (ExtReal, bool) {
    let mut g = guard;
    loop {
        let d = match dist_to_int(beta, a, g) {
            Ok(d) => d,
            Err(_) => {
                return (
                    ExtReal::from_parts(BigInt::zero(), 1, num_bigint::BigUint::one()),
                    true,
                )
            }
        };
        let v = d.to_f64();
        let e = d.error_f64();
        if e == 0.0 || e < 0.1 * v {
            return (d, false);
        }
        let fixed = limit.is_some_and(|l| l < a.bits() as u32 + g);
        if g >= MAX_GUARD_BITS || fixed {
            return (d, true);
        }
        g *= 2;
    }
}

/// Classify the window `k_range` (inclusive, 1-based) of `‖β·a_k‖`.
///
/// * `decays_geometric`: slope of the log-linear fit below `−δ` and every
///   tail sample below `ε` (a window of exact zeros also counts);
/// * `non_decaying`: at least `non_decay_share` of the tail certified above
///   `non_decay_level`;
/// * `indeterminate`: anything else, including tails with uncertified samples.
///
/// The tail is the second half of the window.
pub fn classify_decay(
    beta: &Real,
    seq: &SequenceTable,
    k_range: (usize, usize),
    config: &DecayConfig,
) -> Result<DecayReport> {
    let (k0, k1) = k_range;
    if k0 < 1 || k1 < k0 {
        return Err(Error::invalid(format!("bad window {k0}..={k1}")));
    }
    if k1 > seq.len() {
        return Err(Error::Range {
            base: seq.name().to_string(),
            value: format!("index {k1}"),
            largest: format!("index {}", seq.len()),
        });
    }
    let limit = beta.precision_limit();
    let mut end = k1;
    if let Some(l) = limit {
        while end >= k0 && seq.get(end).bits() as u32 + 8 > l {
            end -= 1;
        }
        if end < k0 + 3 {
            return Err(Error::Indeterminate(format!(
                "frequency carries {l} bits, not enough for indices from {k0}"
            )));
        }
    }

    let samples: Vec<DecaySample> = (k0..=end)
        .map(|k| {
            let (dist, indeterminate) = sample(beta, seq.get(k), config.guard_bits, limit);
            DecaySample {
                k,
                dist,
                indeterminate,
            }
        })
        .collect();

    let tail_start = samples.len() / 2;
    let tail = &samples[tail_start..];
    let tail_len = tail.len() as f64;
    let above = tail
        .iter()
        .filter(|s| {
            !s.indeterminate && s.dist.to_f64() - s.dist.error_f64() > config.non_decay_level
        })
        .count() as f64;
    let share = above / tail_len;
    let tail_uncertain = tail.iter().any(|s| s.indeterminate);
    let tail_max = tail
        .iter()
        .filter(|s| !s.indeterminate)
        .map(|s| s.dist.to_f64() + s.dist.error_f64())
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));

    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| !s.indeterminate && s.dist.to_f64() > 0.0)
        .map(|s| (s.k as f64, s.dist.to_f64().ln()))
        .collect();
    let slope = fit_slope(&pts);
    let all_zero = samples
        .iter()
        .skip(tail_start)
        .all(|s| !s.indeterminate && s.dist.mantissa().is_zero() && s.dist.is_exact());

    let classification = if share >= config.non_decay_share {
        DecayClass::NonDecaying
    } else if tail_uncertain {
        DecayClass::Indeterminate
    } else if all_zero
        || (slope.is_some_and(|s| s < -config.delta) && tail_max.is_some_and(|m| m < config.epsilon))
    {
        DecayClass::DecaysGeometric
    } else {
        DecayClass::Indeterminate
    };

    Ok(DecayReport {
        frequency: beta.to_string(),
        sequence: seq.name().to_string(),
        requested_range: k_range,
        range: (k0, end),
        fitted_rate: if classification == DecayClass::DecaysGeometric {
            slope
        } else {
            None
        },
        slope,
        tail_max,
        tail_share_above: share,
        samples,
        classification,
        config: config.clone(),
    })
}

/// Ordinary least squares slope; `None` with fewer than three points.
pub(crate) fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Nearest integers `b_n` to `β·a_n` and the point from which they obey the
/// recurrence of `a`.
#[derive(Clone, Debug, Serialize)]
pub struct NearestIntegerSequence {
    pub frequency: String,
    pub sequence: String,
    #[serde(serialize_with = "ser_bigints")]
    pub terms: Vec<BigInt>,
    /// Smallest `i` (1-based) such that every `b_n` with `n ≥ i + L` satisfies
    /// the recurrence; `None` if the last window already fails.
    pub residual_recurrence_index: Option<usize>,
}

fn ser_bigints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

/// Rigorously rounded `β·a`, escalating precision until the rounding is
/// decided. Exact ties are reported as errors.
pub fn nearest_integer(beta: &Real, a: &BigInt, guard: u32) -> Result<BigInt> {
    let limit = beta.precision_limit();
    let mut g = guard;
    loop {
        let x = beta.times_int_enclosure(a, g);
        match x.nearest_integer() {
            Ok(v) => return Ok(v),
            Err(e) => {
                let fixed = limit.is_some_and(|l| l < a.bits() as u32 + g);
                if g >= MAX_GUARD_BITS || fixed || x.is_exact() {
                    return Err(e);
                }
                g *= 2;
            }
        }
    }
}

pub fn nearest_integer_sequence(beta: &Real, seq: &SequenceTable) -> Result<NearestIntegerSequence> {
    let spec = seq.recurrence().ok_or_else(|| {
        Error::invalid(format!("sequence `{}` has no recurrence attached", seq.name()))
    })?;
    let mut terms = Vec::with_capacity(seq.len());
    for (i, a) in seq.terms().iter().enumerate() {
        let b = nearest_integer(beta, a, DEFAULT_GUARD_BITS).map_err(|e| {
            Error::Indeterminate(format!("rounding of beta*a_{} undecided: {e}", i + 1))
        })?;
        terms.push(b);
    }
    let order = spec.order();
    let holds = |n: usize| -> bool {
        // n is a 0-based position with n >= order
        let mut acc = BigInt::zero();
        for (j, c) in spec.coefficients().iter().enumerate() {
            acc += c * &terms[n - 1 - j];
        }
        acc == terms[n]
    };
    let mut first_fail: Option<usize> = None;
    for n in order..terms.len() {
        if !holds(n) {
            first_fail = Some(n);
        }
    }
    let residual_recurrence_index = match first_fail {
        None => Some(1),
        Some(n) if n + 1 < terms.len() => Some(n + 2 - order),
        Some(_) => None,
    };
    Ok(NearestIntegerSequence {
        frequency: beta.to_string(),
        sequence: seq.name().to_string(),
        terms,
        residual_recurrence_index,
    })
}

/// Integer coordinates of `β` in the power basis `1, α, …, α^{n−1}` of a
/// degree-`n` algebraic `α = 1/ρ`, with `ρ` the dominant root of the
/// recurrence behind `seq`.
///
/// Since `α^j·a_k ≈ a_{k−j}` for large `k`, the nearest integers `b_k` to
/// `β·a_k` satisfy `Σ c_j a_{k−j} = b_k` once the window is past the
/// transient. The system at `n` consecutive indices ending at `k_end` is
/// solved exactly; the candidate is accepted only if it is integral, agrees
/// with `β` numerically, and the decay classification confirms it.
pub fn recover_coefficients(
    beta: &Real,
    base: &AlgebraicReal,
    seq: &SequenceTable,
    k_end: usize,
) -> Result<Vec<BigInt>> {
    let n = base.degree();
    if k_end > seq.len() || k_end < 2 * n + 2 {
        return Err(Error::invalid(format!(
            "index {k_end} outside usable range of `{}`",
            seq.name()
        )));
    }
    let ks: Vec<usize> = (k_end + 1 - n..=k_end).collect();
    let mut m: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    for &k in &ks {
        let mut row: Vec<BigRational> = (0..n)
            .map(|j| BigRational::from_integer(seq.get(k - j).clone()))
            .collect();
        let b = nearest_integer(beta, seq.get(k), DEFAULT_GUARD_BITS)?;
        row.push(BigRational::from_integer(b));
        m.push(row);
    }
    let sol = solve_exact(m).ok_or_else(|| Error::Hypothesis("singular system".into()))?;
    if !sol.iter().all(|q| q.is_integer()) {
        return Err(Error::Hypothesis(format!(
            "non-integral solution {:?}",
            sol.iter().map(|q| q.to_string()).collect::<Vec<_>>()
        )));
    }
    let coeffs: Vec<BigInt> = sol.into_iter().map(|q| q.to_integer()).collect();

    // β must equal Σ c_j α^j to working accuracy
    let alpha = base.refine(200);
    let mut acc = ExtReal::zero();
    let mut pow = ExtReal::exact_int(BigInt::one());
    for c in &coeffs {
        acc = acc.add(&pow.mul_int(c));
        pow = pow.mul(&alpha, 200);
    }
    let diff = acc.sub(&beta.approx(200));
    let mag = diff.to_f64().abs();
    if mag > diff.error_f64() + 2f64.powi(-60) {
        return Err(Error::Hypothesis(format!(
            "recovered combination differs from beta by {mag:e}"
        )));
    }

    let k0 = (k_end / 4).max(2);
    let report = classify_decay(beta, seq, (k0, k_end), &DecayConfig::default())?;
    if report.classification != DecayClass::DecaysGeometric {
        return Err(Error::Hypothesis(format!(
            "decay check failed: {:?}",
            report.classification
        )));
    }
    Ok(coeffs)
}

/// Gaussian elimination over the rationals on an augmented `n × (n+1)`
/// matrix.
pub(crate) fn solve_exact(mut m: Vec<Vec<BigRational>>) -> Option<Vec<BigRational>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let t = &f * &m[col][c];
                    m[r][c] -= t;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::super::algebraic::constants;
    use super::*;
    use crate::seqcore::{generate_recurrent, RecurrenceSpec};

    fn narayana(n: usize) -> SequenceTable {
        generate_recurrent(&RecurrenceSpec::narayana(), n).unwrap()
    }

    #[test]
    fn half_times_three() {
        let d = dist_to_int(&Real::ratio(1, 2), &BigInt::from(3), 64).unwrap();
        assert_eq!(d.to_f64(), 0.5);
        assert!(d.is_exact());
    }

    #[test]
    fn alpha_times_41() {
        let a = Real::algebraic(constants::alpha(3));
        let d = dist_to_int(&a, &BigInt::from(41), 64).unwrap();
        // 41 * 0.6823278038280193 = 27.975439956948791
        assert!((d.to_f64() - 0.024_560_043_051_209).abs() < 1e-12);
    }

    #[test]
    fn integer_frequency_is_zero() {
        let seq = narayana(60);
        for a in seq.terms() {
            let d = dist_to_int(&Real::int(7), a, 64).unwrap();
            assert!(d.mantissa().is_zero());
        }
    }

    #[test]
    fn alpha_decays_on_narayana() {
        let seq = narayana(130);
        let a = Real::algebraic(constants::alpha(3));
        let r = classify_decay(&a, &seq, (10, 120), &DecayConfig::default()).unwrap();
        assert_eq!(r.classification, DecayClass::DecaysGeometric);
        let rate = r.fitted_rate.unwrap();
        assert!((rate + 0.1911).abs() < 0.01, "rate {rate}");
        let json = r.to_json().unwrap();
        assert!(json.contains("decays_geometric"));
    }

    #[test]
    fn sqrt2_does_not_decay() {
        let seq = narayana(130);
        let s = Real::algebraic(constants::sqrt(2));
        let r = classify_decay(&s, &seq, (10, 120), &DecayConfig::default()).unwrap();
        assert_eq!(r.classification, DecayClass::NonDecaying);
    }

    #[test]
    fn coarse_decimal_shrinks_the_window() {
        let seq = narayana(130);
        let s = Real::decimal("1.41421356237", 40).unwrap();
        let r = classify_decay(&s, &seq, (10, 120), &DecayConfig::default()).unwrap();
        assert!(r.range.1 < 120);
        assert_eq!(r.classification, DecayClass::NonDecaying);
    }

    #[test]
    fn rationals_do_not_decay() {
        let seq = narayana(130);
        for (p, q) in [(1, 2), (1, 3), (2, 7), (5, 11), (1, 1000)] {
            let r = classify_decay(&Real::ratio(p, q), &seq, (10, 120), &DecayConfig::default())
                .unwrap();
            assert_eq!(r.classification, DecayClass::NonDecaying, "{p}/{q}");
        }
    }

    #[test]
    fn nearest_integers_follow_the_recurrence() {
        let seq = narayana(100);
        let a = Real::algebraic(constants::alpha(3));
        let ns = nearest_integer_sequence(&a, &seq).unwrap();
        assert!(ns.residual_recurrence_index.unwrap() <= 5);
        // b_k = h_{k-1}
        for k in 10..100 {
            assert_eq!(&ns.terms[k - 1], seq.get(k - 1));
        }
        let z = nearest_integer_sequence(&Real::int(0), &seq).unwrap();
        assert!(z.terms.iter().all(|t| t.is_zero()));
        assert_eq!(z.residual_recurrence_index, Some(1));
    }

    #[test]
    fn ties_are_errors() {
        let r = nearest_integer(&Real::ratio(1, 2), &BigInt::from(3), 64);
        assert!(r.is_err());
        assert_eq!(
            nearest_integer(&Real::ratio(1, 3), &BigInt::from(5), 64).unwrap(),
            BigInt::from(2)
        );
    }

    #[test]
    fn recovers_basis_combinations() {
        let seq = narayana(160);
        let base = constants::alpha(3);
        let alpha = || Real::algebraic(constants::alpha(3));
        let got = recover_coefficients(&alpha(), &base, &seq, 150).unwrap();
        assert_eq!(got, vec![0.into(), 1.into(), 0.into()]);
        let b = Real::int(1).plus(alpha().times(alpha()));
        let got = recover_coefficients(&b, &base, &seq, 150).unwrap();
        assert_eq!(got, vec![1.into(), 0.into(), 1.into()]);
        let s = Real::algebraic(constants::sqrt(2));
        assert!(recover_coefficients(&s, &base, &seq, 150).is_err());
    }

    #[test]
    fn fit_slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 0.5 * i as f64)).collect();
        assert!((fit_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert!(fit_slope(&pts[..2]).is_none());
    }

    #[test]
    fn exact_solver() {
        let q = |x: i64| BigRational::from_integer(BigInt::from(x));
        let m = vec![vec![q(2), q(1), q(5)], vec![q(1), q(3), q(10)]];
        let s = solve_exact(m).unwrap();
        assert_eq!(s, vec![q(1), q(3)]);
    }
}
