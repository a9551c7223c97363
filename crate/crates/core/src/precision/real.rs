use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::algebraic::AlgebraicReal;
use super::ext::ExtReal;
use crate::{Error, Result};

/// A real frequency that can be approximated to any requested precision.
///
/// `Enclosure` is the odd one out: it wraps a value that is only known to a
/// fixed accuracy (a decimal typed by the user, for instance) and asking for
/// more bits than it carries leaves its error bound untouched.
#[derive(Clone, Debug)]
pub enum Real {
    Rational(BigRational),
    Algebraic(Arc<AlgebraicReal>),
    E,
    InvE,
    Sum(Box<Real>, Box<Real>),
    Product(Box<Real>, Box<Real>),
    Enclosure(ExtReal),
}

impl Real {
    pub fn int(v: i64) -> Real {
        Real::Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(p: i64, q: i64) -> Real {
        Real::Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn algebraic(a: AlgebraicReal) -> Real {
        Real::Algebraic(Arc::new(a))
    }

    /// A decimal literal taken as the center of an enclosure of half-width
    /// `max(2^{−bits}, 10^{−k})`, `k` being the number of digits after the
    /// point: a literal cannot carry more precision than it writes down.
    pub fn decimal(text: &str, bits: u32) -> Result<Real> {
        let (q, k) = parse_decimal(text)?;
        let p = bits + 2;
        let center = ExtReal::from_ratio(q.numer(), q.denom(), p);
        let one = BigInt::one() << p as usize;
        let ten_k = num_traits::pow(BigInt::from(10), k);
        let digit_ulps = (&one + &ten_k - 1u32) / &ten_k;
        let digit_ulps = digit_ulps.to_biguint().expect("positive");
        let err = center.error_ulps() + (BigUint::one() << 2usize).max(digit_ulps);
        Ok(Real::Enclosure(ExtReal::from_parts(
            center.mantissa().clone(),
            p,
            err,
        )))
    }

    pub fn plus(self, other: Real) -> Real {
        Real::Sum(Box::new(self), Box::new(other))
    }

    pub fn times(self, other: Real) -> Real {
        Real::Product(Box::new(self), Box::new(other))
    }

    /// Multiply by an integer (kept symbolic so precision is not lost).
    pub fn scale(self, k: i64) -> Real {
        Real::int(k).times(self)
    }

    pub fn is_exact_rational(&self) -> Option<&BigRational> {
        match self {
            Real::Rational(q) => Some(q),
            _ => None,
        }
    }

    /// Enclosure whose error is at most `2^{−bits}`, except for `Enclosure`
    /// leaves whose own error may be larger.
    pub fn approx(&self, bits: u32) -> ExtReal {
        match self {
            Real::Rational(q) => ExtReal::from_ratio(q.numer(), q.denom(), bits),
            Real::Algebraic(a) => a.refine(bits),
            Real::E => e_series(bits, false),
            Real::InvE => e_series(bits, true),
            Real::Sum(a, b) => a.approx(bits + 1).add(&b.approx(bits + 1)),
            Real::Product(a, b) => {
                let ma = a.approx(8).magnitude_bits() as u32 + 1;
                let mb = b.approx(8).magnitude_bits() as u32 + 1;
                let pa = bits + mb + 2;
                let pb = bits + ma + 2;
                a.approx(pa).mul(&b.approx(pb), bits + 2)
            }
            Real::Enclosure(x) => {
                if bits < x.bits() {
                    x.with_bits(bits)
                } else {
                    x.clone()
                }
            }
        }
    }

    /// Best available accuracy for leaves of fixed precision, `None` if the
    /// value can be refined without limit.
    pub fn precision_limit(&self) -> Option<u32> {
        match self {
            Real::Enclosure(x) => {
                Some((x.bits() as u64).saturating_sub(x.error_ulps().bits()) as u32)
            }
            Real::Sum(a, b) | Real::Product(a, b) => {
                match (a.precision_limit(), b.precision_limit()) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (Some(x), None) | (None, Some(x)) => Some(x),
                    (None, None) => None,
                }
            }
            _ => None,
        }
    }

    /// `‖β·a‖` with `bits` fractional bits of accuracy beyond the integer part.
    pub fn times_int_enclosure(&self, a: &BigInt, bits: u32) -> ExtReal {
        let extra = a.bits() as u32 + 2;
        self.approx(bits + extra).mul_int(a)
    }

    pub fn to_f64(&self) -> f64 {
        self.approx(64).to_f64()
    }

    /// `⌊{β}·2^128⌋`, the phase word used by the Weyl and histogram engines.
    pub fn fraction_u128(&self) -> u128 {
        self.approx(160).fraction_u128()
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Rational(q) => write!(f, "{q}"),
            Real::Algebraic(a) => write!(f, "{}", a.name()),
            Real::E => write!(f, "e"),
            Real::InvE => write!(f, "1/e"),
            Real::Sum(a, b) => write!(f, "({a} + {b})"),
            Real::Product(a, b) => write!(f, "{a}*{b}"),
            Real::Enclosure(x) => write!(f, "{x}"),
        }
    }
}

fn parse_decimal(text: &str) -> Result<(BigRational, usize)> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(Error::invalid(format!("empty decimal `{text}`")));
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(Error::invalid(format!("malformed decimal `{text}`")));
    }
    let digits = format!("{ip}{fp}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
        .map_err(|e| Error::invalid(e.to_string()))?;
    let den = num_traits::pow(BigInt::from(10), fp.len());
    let q = BigRational::new(num, den);
    Ok((if neg { -q } else { q }, fp.len()))
}

/// `e` or `1/e` by the factorial series in fixed point. Every truncating
/// division loses less than one ulp, and the series is cut when the term
/// vanishes, leaving a tail below two ulps.
fn e_series(bits: u32, inverse: bool) -> ExtReal {
    let w = bits + 16;
    let mut term = BigInt::one() << w as usize;
    let mut sum = term.clone();
    let mut k = 1u64;
    loop {
        term /= k;
        if term.is_zero() {
            break;
        }
        if inverse && k % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        k += 1;
    }
    let err = BigUint::from(k + 2);
    ExtReal::from_parts(sum, w, err).with_bits(bits + 2)
}

#[cfg(test)]
mod tests {
    use super::super::algebraic::constants;
    use super::*;

    #[test]
    fn e_and_inverse_multiply_to_one() {
        let e = Real::E.approx(400);
        let ie = Real::InvE.approx(400);
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!((ie.to_f64() - 1.0 / std::f64::consts::E).abs() < 1e-16);
        let p = e.mul(&ie, 400).sub(&ExtReal::exact_int(BigInt::one()));
        assert!(p.to_f64().abs() < 1e-115);
        assert!(p.error_f64() < 1e-115);
    }

    #[test]
    fn decimal_enclosure_holds_its_value() {
        let r = Real::decimal("1.41421356237", 40).unwrap();
        let s = Real::algebraic(constants::sqrt(2));
        let d = r.approx(80).sub(&s.approx(80));
        assert!(d.to_f64().abs() <= r.approx(80).error_f64());
        // eleven written digits carry about 36 bits, whatever is claimed
        let lim = r.precision_limit().unwrap();
        assert!((35..=37).contains(&lim), "{lim}");
        let fine = Real::decimal("1.4142135623730950488016887242097", 40).unwrap();
        assert_eq!(fine.precision_limit(), Some(39));
        assert!(Real::decimal("1.4.1", 10).is_err());
        assert!(Real::decimal("", 10).is_err());
        let neg = Real::decimal("-0.25", 10).unwrap();
        assert!((neg.to_f64() + 0.25).abs() < 1e-12);
    }

    #[test]
    fn products_of_algebraics() {
        let a = Real::algebraic(constants::alpha(3));
        let sq = a.clone().times(a.clone());
        let v = sq.approx(300);
        let expect = 0.682_327_803_828_019_3f64.powi(2);
        assert!((v.to_f64() - expect).abs() < 1e-15);
        assert!(v.error_f64() <= 2f64.powi(-300));
    }

    #[test]
    fn phase_word_of_rational() {
        assert_eq!(Real::ratio(1, 2).fraction_u128(), 1u128 << 127);
        assert_eq!(Real::ratio(7, 4).fraction_u128(), 3u128 << 126);
        assert_eq!(Real::int(5).fraction_u128(), 0);
    }

    #[test]
    fn times_int_keeps_fraction_bits() {
        let a = Real::algebraic(constants::alpha(3));
        let big = BigInt::one() << 500usize;
        let x = a.times_int_enclosure(&big, 64);
        assert!(x.error_f64() <= 2f64.powi(-64));
    }
}
