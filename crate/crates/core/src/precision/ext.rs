use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// A real number known up to a binary fixed-point enclosure.
///
/// The represented interval is `[(m − e)·2^{−P}, (m + e)·2^{−P}]` where `m`
/// is the signed mantissa, `P` the number of fractional bits and `e` the
/// error bound in units of the last place. Every operation widens `e` so that
/// the true value stays inside; comparisons that cannot be decided from the
/// enclosure return `None` instead of guessing.
#[derive(Clone, PartialEq, Eq)]
pub struct ExtReal {
    mant: BigInt,
    bits: u32,
    err: BigUint,
}

impl ExtReal {
    pub fn from_parts(mant: BigInt, bits: u32, err: BigUint) -> Self {
        ExtReal { mant, bits, err }
    }

    pub fn exact_int(v: BigInt) -> Self {
        ExtReal {
            mant: v,
            bits: 0,
            err: BigUint::zero(),
        }
    }

    pub fn zero() -> Self {
        Self::exact_int(BigInt::zero())
    }

    /// `num/den` rounded down to `bits` fractional bits.
    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let scaled = num << bits as usize;
        let (q, r) = scaled.div_mod_floor(den);
        let exact = r.is_zero();
        ExtReal {
            mant: q,
            bits,
            err: if exact { BigUint::zero() } else { BigUint::one() },
        }
    }

    /// Exact enclosure of an `f64` (every finite double is dyadic).
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value");
        if x == 0.0 {
            return Self::zero();
        }
        let raw = x.to_bits();
        let negative = raw >> 63 == 1;
        let exp_field = ((raw >> 52) & 0x7ff) as i64;
        let frac = raw & ((1u64 << 52) - 1);
        let (m, e) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        let mut mant = BigInt::from(m);
        if negative {
            mant = -mant;
        }
        if e >= 0 {
            Self::exact_int(mant << e as usize)
        } else {
            ExtReal {
                mant,
                bits: (-e) as u32,
                err: BigUint::zero(),
            }
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn error_ulps(&self) -> &BigUint {
        &self.err
    }

    pub fn is_exact(&self) -> bool {
        self.err.is_zero()
    }

    /// Re-express at a different number of fractional bits. Dropping bits
    /// rounds down and adds one ulp of error.
    pub fn with_bits(&self, bits: u32) -> Self {
        match bits.cmp(&self.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let k = (bits - self.bits) as usize;
                ExtReal {
                    mant: &self.mant << k,
                    bits,
                    err: &self.err << k,
                }
            }
            Ordering::Less => {
                let k = (self.bits - bits) as usize;
                let mask = (BigInt::one() << k) - 1;
                let truncated = !(&self.mant & &mask).is_zero();
                let mant = &self.mant >> k;
                let mut err = (&self.err + (BigUint::one() << k) - 1u32) >> k;
                if truncated {
                    err += 1u32;
                }
                ExtReal { mant, bits, err }
            }
        }
    }

    fn aligned(&self, other: &ExtReal) -> (ExtReal, ExtReal) {
        let bits = self.bits.max(other.bits);
        (self.with_bits(bits), other.with_bits(bits))
    }

    pub fn add(&self, other: &ExtReal) -> ExtReal {
        let (a, b) = self.aligned(other);
        ExtReal {
            mant: a.mant + b.mant,
            bits: a.bits,
            err: a.err + b.err,
        }
    }

    pub fn neg(&self) -> ExtReal {
        ExtReal {
            mant: -&self.mant,
            bits: self.bits,
            err: self.err.clone(),
        }
    }

    pub fn sub(&self, other: &ExtReal) -> ExtReal {
        self.add(&other.neg())
    }

    /// Product rounded to `bits` fractional bits.
    pub fn mul(&self, other: &ExtReal, bits: u32) -> ExtReal {
        let mant = &self.mant * &other.mant;
        let a = self.mant.magnitude();
        let b = other.mant.magnitude();
        let err = a * &other.err + b * &self.err + &self.err * &other.err;
        let raw = ExtReal {
            mant,
            bits: self.bits + other.bits,
            err,
        };
        raw.with_bits(bits)
    }

    pub fn mul_int(&self, k: &BigInt) -> ExtReal {
        ExtReal {
            mant: &self.mant * k,
            bits: self.bits,
            err: &self.err * k.magnitude(),
        }
    }

    fn lower_mant(&self) -> BigInt {
        &self.mant - BigInt::from(self.err.clone())
    }

    fn upper_mant(&self) -> BigInt {
        &self.mant + BigInt::from(self.err.clone())
    }

    /// Sign of the enclosed value, or `None` when the enclosure contains zero
    /// without being exactly zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.err.is_zero() {
            return Some(self.mant.sign_ordering());
        }
        let lo = self.lower_mant();
        let hi = self.upper_mant();
        if lo.is_positive() {
            Some(Ordering::Greater)
        } else if hi.is_negative() {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    pub fn compare(&self, other: &ExtReal) -> Option<Ordering> {
        self.sub(other).sign()
    }

    /// `⌊x⌋` when it is determined by the enclosure.
    pub fn floor(&self) -> Option<BigInt> {
        let lo = self.lower_mant() >> self.bits as usize;
        let hi = self.upper_mant() >> self.bits as usize;
        (lo == hi).then_some(lo)
    }

    /// The integer nearest to the enclosed value. Fails when the enclosure
    /// reaches a half-integer, where the answer is ambiguous.
    pub fn nearest_integer(&self) -> Result<BigInt> {
        let half = if self.bits == 0 {
            BigInt::zero()
        } else {
            BigInt::one() << (self.bits as usize - 1)
        };
        if self.bits == 0 {
            if self.err.is_zero() {
                return Ok(self.mant.clone());
            }
            return Err(Error::Indeterminate(
                "integer-scaled enclosure with nonzero error".into(),
            ));
        }
        let b = self.bits as usize;
        let lo = self.lower_mant() + &half;
        let hi = self.upper_mant() + &half;
        // a half-integer inside [lower, upper] means a multiple of 2^b in [lo, hi]
        let first_multiple = -((-&lo) >> b);
        let last_multiple = &hi >> b;
        if first_multiple <= last_multiple {
            return Err(Error::Indeterminate(format!(
                "enclosure (error 2^{} ulps) reaches a half-integer",
                self.err.bits()
            )));
        }
        Ok(lo >> b)
    }

    /// Enclosure of `‖x‖`, the distance to the nearest integer. The map is
    /// 1-Lipschitz, so the error bound carries over unchanged.
    pub fn dist_to_int(&self) -> ExtReal {
        if self.bits == 0 {
            return ExtReal {
                mant: BigInt::zero(),
                bits: 0,
                err: self.err.clone(),
            };
        }
        let one = BigInt::one() << self.bits as usize;
        let half = &one >> 1usize;
        let frac = self.mant.mod_floor(&one);
        let d = if frac > half { &one - &frac } else { frac };
        ExtReal {
            mant: d,
            bits: self.bits,
            err: self.err.clone(),
        }
    }

    /// Fractional part of the center scaled to `2^128`, i.e. `⌊{x}·2^128⌋`.
    pub fn fraction_u128(&self) -> u128 {
        let x = if self.bits < 128 {
            self.with_bits(128)
        } else {
            self.clone()
        };
        let one = BigInt::one() << x.bits as usize;
        let frac = x.mant.mod_floor(&one);
        let top = frac >> (x.bits as usize - 128);
        let mag = top.magnitude();
        let digits = mag.to_u64_digits();
        let lo = digits.first().copied().unwrap_or(0) as u128;
        let hi = digits.get(1).copied().unwrap_or(0) as u128;
        lo | (hi << 64)
    }

    pub fn to_f64(&self) -> f64 {
        scaled_to_f64(&self.mant, self.bits)
    }

    /// Half-width of the enclosure as an `f64`.
    pub fn error_f64(&self) -> f64 {
        scaled_to_f64(&BigInt::from(self.err.clone()), self.bits)
    }

    /// `log2` of the error bound, `None` for exact values.
    pub fn error_log2(&self) -> Option<i64> {
        if self.err.is_zero() {
            None
        } else {
            Some(self.err.bits() as i64 - self.bits as i64)
        }
    }

    /// Number of bits in the integer part of `|x|`.
    pub fn magnitude_bits(&self) -> u64 {
        let ip = self.mant.magnitude() >> self.bits as usize;
        ip.bits()
    }
}

trait SignOrdering {
    fn sign_ordering(&self) -> Ordering;
}

impl SignOrdering for BigInt {
    fn sign_ordering(&self) -> Ordering {
        match self.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

/// `m·2^{−bits}` as the nearest-ish `f64`, without overflowing on huge mantissas.
pub(crate) fn scaled_to_f64(m: &BigInt, bits: u32) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    let len = m.bits() as i64;
    let drop = (len - 64).max(0);
    let top = (m >> drop as usize).to_f64().unwrap_or(0.0);
    ldexp(top, drop - bits as i64)
}

pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())?;
        match self.error_log2() {
            Some(e) => write!(f, " ± 2^{e}"),
            None => write!(f, " (exact)"),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.17e}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(p: i64, q: i64, bits: u32) -> ExtReal {
        ExtReal::from_ratio(&BigInt::from(p), &BigInt::from(q), bits)
    }

    #[test]
    fn half_times_three_is_exactly_half_from_an_integer() {
        let x = ratio(1, 2, 64).mul_int(&BigInt::from(3));
        let d = x.dist_to_int();
        assert!(d.is_exact());
        assert_eq!(d.to_f64(), 0.5);
    }

    #[test]
    fn integer_frequency_has_zero_distance() {
        let x = ExtReal::exact_int(BigInt::from(7)).mul_int(&BigInt::from(123456789));
        assert_eq!(x.dist_to_int().to_f64(), 0.0);
        assert!(x.dist_to_int().is_exact());
    }

    #[test]
    fn rounding_down_bits_widens_error() {
        let x = ratio(1, 3, 100);
        let y = x.with_bits(20);
        assert!(y.error_ulps() >= &BigUint::from(1u32));
        assert!((y.to_f64() - 1.0 / 3.0).abs() < 2e-6);
    }

    #[test]
    fn ambiguous_rounding_is_reported() {
        // 1/2 ± 2^-64 straddles the half
        let x = ExtReal::from_parts(BigInt::one() << 63usize, 64, BigUint::one());
        assert!(x.nearest_integer().is_err());
        let y = ratio(7, 3, 64);
        assert_eq!(y.nearest_integer().unwrap(), BigInt::from(2));
        let z = ratio(-7, 3, 64);
        assert_eq!(z.nearest_integer().unwrap(), BigInt::from(-2));
    }

    #[test]
    fn products_keep_the_true_value_inside() {
        let a = ratio(1, 3, 80);
        let b = ratio(2, 7, 80);
        let p = a.mul(&b, 80);
        let exact = ratio(2, 21, 200);
        let diff = p.sub(&exact);
        assert!(diff.error_f64() >= diff.to_f64().abs());
    }

    #[test]
    fn sign_of_enclosure_containing_zero_is_unknown() {
        let x = ExtReal::from_parts(BigInt::zero(), 10, BigUint::one());
        assert_eq!(x.sign(), None);
        assert_eq!(ratio(-1, 5, 30).sign(), Some(Ordering::Less));
    }

    #[test]
    fn fraction_u128_of_quarter() {
        assert_eq!(ratio(5, 4, 8).fraction_u128(), 1u128 << 126);
        assert_eq!(ratio(-1, 4, 8).fraction_u128(), 3u128 << 126);
    }

    #[test]
    fn f64_round_trip() {
        for x in [0.75, -3.125, 1e-30, 123456.789] {
            assert_eq!(ExtReal::from_f64(x).to_f64(), x);
        }
    }
}
