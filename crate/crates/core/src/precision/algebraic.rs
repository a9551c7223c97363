use std::cmp::Ordering;
use std::fmt;
use std::sync::Mutex;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ext::ExtReal;
use crate::{Error, Result};

/// A real algebraic number: an integer polynomial together with a rational
/// interval that contains exactly one of its real roots.
///
/// Approximations are produced on demand at any precision and cached; the
/// cache is behind a mutex so a shared constant can be refined from several
/// threads.
pub struct AlgebraicReal {
    name: String,
    /// Coefficients in ascending degree order.
    poly: Vec<BigInt>,
    lo: BigRational,
    hi: BigRational,
    /// Sign of the polynomial just left of the root.
    left_sign: Ordering,
    cache: Mutex<Option<ExtReal>>,
}

impl fmt::Debug for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlgebraicReal")
            .field("name", &self.name)
            .field("poly", &self.poly)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .finish()
    }
}

impl AlgebraicReal {
    /// Builds the root of `poly` isolated by `[lo, hi]`. The endpoints must
    /// give opposite signs and the interval must contain exactly one distinct
    /// real root (checked with a Sturm sequence).
    pub fn new(
        name: impl Into<String>,
        poly: Vec<BigInt>,
        lo: BigRational,
        hi: BigRational,
    ) -> Result<Self> {
        let poly = trim(poly);
        if poly.len() < 2 {
            return Err(Error::invalid("polynomial must have degree at least 1"));
        }
        if lo >= hi {
            return Err(Error::invalid("isolating interval is empty"));
        }
        let s_lo = sign_at_rational(&poly, &lo);
        let s_hi = sign_at_rational(&poly, &hi);
        if s_lo == Ordering::Equal || s_hi == Ordering::Equal || s_lo == s_hi {
            return Err(Error::invalid(
                "polynomial must take opposite nonzero signs at the interval endpoints",
            ));
        }
        let roots = sturm_root_count(&poly, &lo, &hi);
        if roots != 1 {
            return Err(Error::invalid(format!(
                "isolating interval contains {roots} distinct real roots"
            )));
        }
        Ok(AlgebraicReal {
            name: name.into(),
            poly,
            lo,
            hi,
            left_sign: s_lo,
            cache: Mutex::new(None),
        })
    }

    /// Convenience constructor from small integer coefficients and `f64`
    /// bracket endpoints (converted exactly).
    pub fn from_coeffs(name: &str, coeffs: &[i64], lo: f64, hi: f64) -> Result<Self> {
        let poly = coeffs.iter().map(|&c| BigInt::from(c)).collect();
        let lo = BigRational::from_float(lo).ok_or_else(|| Error::invalid("bad bracket"))?;
        let hi = BigRational::from_float(hi).ok_or_else(|| Error::invalid("bad bracket"))?;
        Self::new(name, poly, lo, hi)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn polynomial(&self) -> &[BigInt] {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn interval(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    pub fn to_f64(&self) -> f64 {
        self.refine(64).to_f64()
    }

    /// Enclosure with error at most `2^{−bits}`.
    pub fn refine(&self, bits: u32) -> ExtReal {
        let target = bits + 2;
        {
            let cache = self.cache.lock().expect("algebraic cache poisoned");
            if let Some(c) = cache.as_ref() {
                if c.bits() >= target {
                    return c.with_bits(target);
                }
            }
        }
        let fresh = self.compute(target);
        let mut cache = self.cache.lock().expect("algebraic cache poisoned");
        match cache.as_ref() {
            Some(c) if c.bits() >= fresh.bits() => {}
            _ => *cache = Some(fresh.clone()),
        }
        fresh
    }

    /// Certified bracket `[(m−1)/2^P, (m+1)/2^P]` around the root.
    fn compute(&self, target: u32) -> ExtReal {
        // start: bisection on dyadics at 64 bits
        let mut prec = 64u32;
        let scale = |r: &BigRational, p: u32| -> BigInt {
            let n = r.numer() << p as usize;
            num_integer::Integer::div_floor(&n, r.denom())
        };
        let mut left = scale(&self.lo, prec);
        let mut right = scale(&self.hi, prec) + 1;
        // tighten the endpoints so they stay inside [lo, hi]
        while self.dyadic_sign(&left, prec) != self.left_sign
            && self.dyadic_sign(&left, prec) != Ordering::Equal
        {
            left += 1;
        }
        while self.dyadic_sign(&right, prec) == self.left_sign {
            right -= 1;
        }
        self.bisect(&mut left, &mut right, prec, 2);

        while prec < target || &right - &left > BigInt::from(2) {
            let next = (prec * 2).min(target.max(prec + 1));
            let shift = (next - prec) as usize;
            left <<= shift;
            right <<= shift;
            prec = next;
            let center: BigInt = (&left + &right) >> 1usize;
            let mut m = center;
            let mut certified = false;
            for _ in 0..4 {
                m = self.newton_step(&m, prec);
                let lo_m = &m - 1;
                let hi_m = &m + 1;
                if lo_m >= left && hi_m <= right && self.brackets(&lo_m, &hi_m, prec) {
                    left = lo_m;
                    right = hi_m;
                    certified = true;
                    break;
                }
            }
            if !certified {
                self.bisect(&mut left, &mut right, prec, 2);
            }
        }
        let m = (&left + &right) >> 1usize;
        let err = (&right - &left).magnitude().clone().max(BigUint::one());
        ExtReal::from_parts(m, prec, err)
    }

    fn bisect(&self, left: &mut BigInt, right: &mut BigInt, prec: u32, width: u64) {
        let width = BigInt::from(width);
        while &*right - &*left > width {
            let mid: BigInt = (&*left + &*right) >> 1usize;
            match self.dyadic_sign(&mid, prec) {
                Ordering::Equal => {
                    *left = &mid - 1;
                    *right = mid + 1;
                    return;
                }
                s if s == self.left_sign => *left = mid,
                _ => *right = mid,
            }
        }
    }

    fn brackets(&self, lo: &BigInt, hi: &BigInt, prec: u32) -> bool {
        let sl = self.dyadic_sign(lo, prec);
        let sh = self.dyadic_sign(hi, prec);
        (sl == self.left_sign || sl == Ordering::Equal)
            && (sh != self.left_sign || sh == Ordering::Equal)
    }

    /// Exact sign of `p(m/2^prec)`.
    fn dyadic_sign(&self, m: &BigInt, prec: u32) -> Ordering {
        let n = self.poly.len() - 1;
        let mut acc = self.poly[n].clone();
        for i in (0..n).rev() {
            acc = acc * m + (&self.poly[i] << (prec as usize * (n - i)));
        }
        acc.sign_cmp()
    }

    /// One Newton step in fixed point at `prec` fractional bits.
    fn newton_step(&self, m: &BigInt, prec: u32) -> BigInt {
        let p = prec as usize;
        let n = self.poly.len() - 1;
        let mut val = &self.poly[n] << p;
        let mut der = BigInt::zero();
        for i in (0..n).rev() {
            der = ((&der * m) >> p) + &val;
            val = ((&val * m) >> p) + (&self.poly[i] << p);
        }
        if der.is_zero() {
            return m.clone();
        }
        m - (val << p) / der
    }

    pub fn approx_interval_f64(&self) -> (f64, f64) {
        (
            self.lo.to_f64().unwrap_or(f64::NAN),
            self.hi.to_f64().unwrap_or(f64::NAN),
        )
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn eval_rational(poly: &[BigInt], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in poly.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    acc
}

fn sign_at_rational(poly: &[BigInt], x: &BigRational) -> Ordering {
    let v = eval_rational(poly, x);
    v.cmp(&BigRational::zero())
}

/// Number of distinct real roots in `(lo, hi]` via Sturm's theorem.
pub(crate) fn sturm_root_count(poly: &[BigInt], lo: &BigRational, hi: &BigRational) -> usize {
    let p0: Vec<BigRational> = poly
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    let p1: Vec<BigRational> = (1..p0.len())
        .map(|i| &p0[i] * BigRational::from_integer(BigInt::from(i)))
        .collect();
    let mut seq = vec![p0, p1];
    loop {
        let n = seq.len();
        let r = rat_poly_rem(&seq[n - 2], &seq[n - 1]);
        if r.iter().all(|c| c.is_zero()) {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    let changes = |x: &BigRational| -> usize {
        let signs: Vec<Ordering> = seq
            .iter()
            .map(|p| {
                let mut acc = BigRational::zero();
                for c in p.iter().rev() {
                    acc = acc * x + c;
                }
                acc.cmp(&BigRational::zero())
            })
            .filter(|s| *s != Ordering::Equal)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    changes(lo).saturating_sub(changes(hi))
}

fn rat_poly_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut b = b.to_vec();
    while b.len() > 1 && b.last().is_some_and(|c| c.is_zero()) {
        b.pop();
    }
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !r.iter().all(|c| c.is_zero()) {
        let dr = r.len() - 1;
        if r[dr].is_zero() {
            r.pop();
            continue;
        }
        let q = &r[dr] / &lead;
        for i in 0..=db {
            let t = &q * &b[i];
            r[dr - db + i] -= t;
        }
        r.pop();
    }
    while r.len() > 1 && r.last().is_some_and(|c| c.is_zero()) {
        r.pop();
    }
    if r.is_empty() {
        r.push(BigRational::zero());
    }
    r
}

/// Named constants used across the crate.
pub mod constants {
    use super::*;

    /// The real root of `x^d + x − 1` in `(0, 1)`.
    pub fn alpha(d: usize) -> AlgebraicReal {
        assert!(d >= 1, "d must be positive");
        let mut c = vec![0i64; d + 1];
        c[0] = -1;
        c[1] += 1;
        c[d] += 1;
        AlgebraicReal::from_coeffs(&format!("alpha{d}"), &c, 0.0, 1.0)
            .expect("x^d + x - 1 has a single root in (0, 1)")
    }

    /// The real root greater than one of `x^d − x^{d−1} − 1`.
    pub fn dominant_trinomial_root(d: usize) -> AlgebraicReal {
        assert!(d >= 1, "d must be positive");
        let mut c = vec![0i64; d + 1];
        c[0] = -1;
        c[d - 1] -= 1;
        c[d] += 1;
        AlgebraicReal::from_coeffs(&format!("rho{d}"), &c, 1.0, 2.0)
            .expect("x^d - x^(d-1) - 1 has a single root in (1, 2]")
    }

    pub fn phi() -> AlgebraicReal {
        AlgebraicReal::from_coeffs("phi", &[-1, -1, 1], 1.0, 2.0).expect("golden ratio")
    }

    pub fn sqrt(n: i64) -> AlgebraicReal {
        assert!(n >= 2, "need a non-square positive integer");
        let r = (n as f64).sqrt();
        AlgebraicReal::from_coeffs(&format!("sqrt{n}"), &[-n, 0, 1], r.floor(), r.floor() + 1.0)
            .expect("square root bracket")
    }

    /// `(1 + √13)/2`, root of `x² − x − 3`.
    pub fn sqrt13_half() -> AlgebraicReal {
        AlgebraicReal::from_coeffs("sqrt13_half", &[-3, -1, 1], 2.0, 3.0).expect("(1+sqrt13)/2")
    }

    /// `1 + √6`, root of `x² − 2x − 5`.
    pub fn one_plus_sqrt6() -> AlgebraicReal {
        AlgebraicReal::from_coeffs("one_plus_sqrt6", &[-5, -2, 1], 3.0, 4.0).expect("1+sqrt6")
    }
}

#[cfg(test)]
mod tests {
    use super::constants::*;
    use super::*;

    #[test]
    fn alpha3_digits() {
        let a = alpha(3);
        assert!((a.to_f64() - 0.682_327_803_828_019_3).abs() < 1e-15);
        let hi = a.refine(300);
        assert!(hi.error_f64() <= 2f64.powi(-300));
        // consistent with the low-precision value
        let lo = a.refine(40);
        assert!((lo.to_f64() - hi.to_f64()).abs() <= 2f64.powi(-40));
    }

    #[test]
    fn sqrt2_squared_is_two() {
        let s = sqrt(2).refine(500);
        let sq = s.mul(&s, 500);
        let diff = sq.sub(&ExtReal::exact_int(BigInt::from(2)));
        assert!(diff.to_f64().abs() < 2f64.powi(-495));
    }

    #[test]
    fn rejects_interval_with_two_roots() {
        // x^2 - 1 on [-2, 2]
        let r = AlgebraicReal::from_coeffs("bad", &[-1, 0, 1], -2.0, 2.5);
        assert!(r.is_err());
        let r = AlgebraicReal::from_coeffs("bad", &[-1, 0, 1], 2.0, 3.0);
        assert!(r.is_err());
    }

    #[test]
    fn sturm_counts_roots() {
        let p: Vec<BigInt> = [-6i64, 11, -6, 1].iter().map(|&c| BigInt::from(c)).collect();
        let r = |x: i64| BigRational::from_integer(BigInt::from(x));
        assert_eq!(sturm_root_count(&p, &r(0), &r(4)), 3);
        assert_eq!(sturm_root_count(&p, &r(0), &r(2)), 2);
    }

    #[test]
    fn reciprocal_of_alpha_is_the_trinomial_root() {
        for d in 2..=6 {
            let a = alpha(d).refine(200);
            let r = dominant_trinomial_root(d).refine(200);
            let p = a.mul(&r, 200);
            assert!((p.to_f64() - 1.0).abs() < 1e-50, "d={d}");
        }
    }

    #[test]
    fn cache_serves_lower_precision() {
        let p = phi();
        let hi = p.refine(1000);
        let lo = p.refine(100);
        assert!((hi.to_f64() - lo.to_f64()).abs() < 1e-29);
        assert!((lo.to_f64() - 1.618_033_988_749_895).abs() < 1e-15);
    }
}
