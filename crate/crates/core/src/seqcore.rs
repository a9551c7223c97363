//! Exact prefixes of the integer sequences under study.
//!
//! Tables are 1-indexed, hold arbitrary-precision terms and are immutable
//! once built, so they can be shared freely between threads.

use std::io::{BufRead, Read, Write};

use num_bigint::{BigInt, Sign};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A linear recurrence `a_n = c₁a_{n−1} + … + c_L a_{n−L}` with its first
/// `L` terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecurrenceSpec {
    pub name: String,
    coefficients: Vec<BigInt>,
    initial_terms: Vec<BigInt>,
}

impl RecurrenceSpec {
    pub fn new(name: impl Into<String>, coefficients: Vec<BigInt>, initial: Vec<BigInt>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::invalid("recurrence order must be at least 1"));
        }
        if coefficients.len() != initial.len() {
            return Err(Error::invalid(format!(
                "order {} but {} initial terms",
                coefficients.len(),
                initial.len()
            )));
        }
        Ok(RecurrenceSpec {
            name: name.into(),
            coefficients,
            initial_terms: initial,
        })
    }

    pub fn from_i64(name: &str, coefficients: &[i64], initial: &[i64]) -> Result<Self> {
        Self::new(
            name,
            coefficients.iter().map(|&c| BigInt::from(c)).collect(),
            initial.iter().map(|&c| BigInt::from(c)).collect(),
        )
    }

    /// `h_k = h_{k−1} + h_{k−3}`, starting 1, 2, 3.
    pub fn narayana() -> Self {
        Self::from_i64("narayana", &[1, 0, 1], &[1, 2, 3]).expect("static spec")
    }

    /// Fibonacci numbers in the Zeckendorf convention 1, 2, 3, 5, …
    pub fn fibonacci() -> Self {
        Self::from_i64("fibonacci", &[1, 1], &[1, 2]).expect("static spec")
    }

    /// `a_i = i` for `i ≤ d`, then `a_i = a_{i−1} + a_{i−d}`. For `d = 1`
    /// this degenerates to the powers of two.
    pub fn generalized_narayana(d: usize) -> Self {
        assert!(d >= 1, "depth must be positive");
        if d == 1 {
            let mut s = Self::powers(2);
            s.name = "narayana_d1".into();
            return s;
        }
        let mut c = vec![0i64; d];
        c[0] = 1;
        c[d - 1] += 1;
        let init: Vec<i64> = (1..=d as i64).collect();
        Self::from_i64(&format!("narayana_d{d}"), &c, &init).expect("static spec")
    }

    /// Order-6 recurrence whose nearest-integer frequencies are exactly
    /// `Z[(1+√13)/2]`.
    pub fn sqrt13_example() -> Self {
        Self::from_i64("sqrt13_example", &[3, 6, -4, -5, 1, 1], &[0, 0, 0, 0, 0, 1])
            .expect("static spec")
    }

    /// `a_n = 10a_{n−2} − a_{n−4}` starting 1, 2, 3, 4.
    pub fn sqrt6_example() -> Self {
        Self::from_i64("sqrt6_example", &[0, 10, 0, -1], &[1, 2, 3, 4]).expect("static spec")
    }

    /// `b^{n−1}`.
    pub fn powers(b: i64) -> Self {
        Self::from_i64(&format!("powers{b}"), &[b], &[1]).expect("static spec")
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    pub fn initial_terms(&self) -> &[BigInt] {
        &self.initial_terms
    }

    /// `x^L − c₁x^{L−1} − … − c_L`, coefficients in ascending degree order.
    pub fn characteristic_polynomial(&self) -> Vec<BigInt> {
        let l = self.order();
        let mut p = vec![BigInt::zero(); l + 1];
        p[l] = BigInt::one();
        for (j, c) in self.coefficients.iter().enumerate() {
            p[l - 1 - j] = -c;
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Recurrence(RecurrenceSpec),
    Ulam,
    FactorialSum,
    Custom { name: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceTable {
    generator: Generator,
    terms: Vec<BigInt>,
}

impl SequenceTable {
    pub fn custom(name: impl Into<String>, terms: Vec<BigInt>) -> Self {
        SequenceTable {
            generator: Generator::Custom { name: name.into() },
            terms,
        }
    }

    pub fn from_u64(name: impl Into<String>, terms: &[u64]) -> Self {
        Self::custom(name, terms.iter().map(|&t| BigInt::from(t)).collect())
    }

    pub fn name(&self) -> &str {
        match &self.generator {
            Generator::Recurrence(s) => &s.name,
            Generator::Ulam => "ulam",
            Generator::FactorialSum => "factorial_sum",
            Generator::Custom { name } => name,
        }
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn recurrence(&self) -> Option<&RecurrenceSpec> {
        match &self.generator {
            Generator::Recurrence(s) => Some(s),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term `a_i`, 1-indexed. Panics outside the materialized range.
    pub fn get(&self, i: usize) -> &BigInt {
        assert!(i >= 1 && i <= self.terms.len(), "index {i} out of range");
        &self.terms[i - 1]
    }

    pub fn try_get(&self, i: usize) -> Option<&BigInt> {
        i.checked_sub(1).and_then(|j| self.terms.get(j))
    }

    pub fn terms(&self) -> &[BigInt] {
        &self.terms
    }

    pub fn last(&self) -> Option<&BigInt> {
        self.terms.last()
    }

    /// Terms as machine words, `None` if one does not fit.
    pub fn to_u64(&self) -> Option<Vec<u64>> {
        self.terms.iter().map(|t| t.to_u64()).collect()
    }

    /// Terms up to the first one exceeding `u64`.
    pub fn u64_prefix(&self) -> Vec<u64> {
        self.terms.iter().map_while(|t| t.to_u64()).collect()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.terms.windows(2).all(|w| w[0] < w[1])
    }

    /// Re-checks the recurrence at every index past the order. Fails at the
    /// first index whose residual is nonzero.
    pub fn check_recurrence(&self) -> Result<()> {
        let Some(spec) = self.recurrence() else {
            return Ok(());
        };
        let l = spec.order();
        for n in l..self.terms.len() {
            let mut acc = BigInt::zero();
            for (j, c) in spec.coefficients.iter().enumerate() {
                acc += c * &self.terms[n - 1 - j];
            }
            if acc != self.terms[n] {
                return Err(Error::Signature {
                    index: n + 1,
                    reason: format!("recurrence residual {}", &self.terms[n] - acc),
                });
            }
        }
        Ok(())
    }

    /// Smallest index `k₀` such that `r·a_k < a_{k+1} < s·a_k` for every
    /// materialized `k ≥ k₀`, with the extreme ratios seen from there on.
    pub fn growth_window(&self, r: (u64, u64), s: (u64, u64)) -> GrowthWindow {
        let ok = |k: usize| -> bool {
            let a = &self.terms[k];
            let b = &self.terms[k + 1];
            let lo = a * r.0;
            let hi = a * s.0;
            b * r.1 > lo && b * s.1 < hi
        };
        let n = self.terms.len();
        let mut start = n.saturating_sub(1);
        while start > 0 && ok(start - 1) {
            start -= 1;
        }
        let ratios = self.terms[start..]
            .windows(2)
            .filter(|w| !w[0].is_zero())
            .map(|w| ratio_f64(&w[1], &w[0]));
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for q in ratios {
            min = min.min(q);
            max = max.max(q);
        }
        GrowthWindow {
            first_index: start + 1,
            min_ratio: min,
            max_ratio: max,
        }
    }

    /// CSV with header `index,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,value")?;
        for (i, t) in self.terms.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, t)?;
        }
        Ok(())
    }

    /// Compact binary cache: magic, generator as JSON, then each term as a
    /// sign byte, a little-endian `u32` byte count and its little-endian
    /// magnitude.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        let meta = serde_json::to_vec(&self.generator)?;
        w.write_all(&(meta.len() as u32).to_le_bytes())?;
        w.write_all(&meta)?;
        w.write_all(&(self.terms.len() as u64).to_le_bytes())?;
        for t in &self.terms {
            let (sign, bytes) = t.to_bytes_le();
            w.write_all(&[u8::from(sign == Sign::Minus)])?;
            let bytes: &[u8] = if t.is_zero() { &[] } else { &bytes };
            w.write_all(&(bytes.len() as u32).to_le_bytes())?;
            w.write_all(bytes)?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Format("not a sequence cache".into()));
        }
        let meta_len = read_u32(&mut r)? as usize;
        let mut meta = vec![0u8; meta_len];
        r.read_exact(&mut meta)?;
        let generator: Generator = serde_json::from_slice(&meta)?;
        let mut n = [0u8; 8];
        r.read_exact(&mut n)?;
        let n = u64::from_le_bytes(n) as usize;
        let mut terms = Vec::with_capacity(n.min(1 << 24));
        for _ in 0..n {
            let mut sign = [0u8; 1];
            r.read_exact(&mut sign)?;
            let len = read_u32(&mut r)? as usize;
            let mut bytes = vec![0u8; len];
            r.read_exact(&mut bytes)?;
            let sign = match sign[0] {
                0 => Sign::Plus,
                1 => Sign::Minus,
                b => return Err(Error::Format(format!("bad sign byte {b}"))),
            };
            terms.push(BigInt::from_bytes_le(sign, &bytes));
        }
        Ok(SequenceTable { generator, terms })
    }

    /// Reads the `index,value` CSV written by [`write_csv`](Self::write_csv).
    pub fn read_csv<R: BufRead>(name: &str, r: R) -> Result<Self> {
        let mut terms = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let (_, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("line {}: expected `index,value`", i + 1)))?;
            let v: BigInt = v
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad integer", i + 1)))?;
            terms.push(v);
        }
        Ok(Self::custom(name, terms))
    }
}

const CACHE_MAGIC: &[u8; 4] = b"MSQ1";

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn ratio_f64(a: &BigInt, b: &BigInt) -> f64 {
    let shift = a.bits().max(b.bits()).saturating_sub(60) as usize;
    let x = (a >> shift).to_f64().unwrap_or(f64::NAN);
    let y = (b >> shift).to_f64().unwrap_or(f64::NAN);
    x / y
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthWindow {
    /// First index `k` from which every consecutive ratio is in the window.
    pub first_index: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

pub fn generate_recurrent(spec: &RecurrenceSpec, count: usize) -> Result<SequenceTable> {
    let l = spec.order();
    if count < l {
        return Err(Error::invalid(format!(
            "count {count} is below the recurrence order {l}"
        )));
    }
    let mut terms: Vec<BigInt> = spec.initial_terms.clone();
    terms.reserve(count - l);
    while terms.len() < count {
        let n = terms.len();
        let mut acc = BigInt::zero();
        for (j, c) in spec.coefficients.iter().enumerate() {
            if !c.is_zero() {
                acc += c * &terms[n - 1 - j];
            }
        }
        terms.push(acc);
    }
    Ok(SequenceTable {
        generator: Generator::Recurrence(spec.clone()),
        terms,
    })
}

/// First `count` Ulam numbers, by a running table of representation counts
/// (saturated at 2) over all sums of two distinct terms.
pub fn generate_ulam(count: usize) -> Result<SequenceTable> {
    if count < 2 {
        return Err(Error::invalid("the Ulam sequence needs at least its two seeds"));
    }
    let mut terms: Vec<u64> = Vec::with_capacity(count);
    let mut reps: Vec<u8> = vec![0; 64];
    let add = |terms: &mut Vec<u64>, reps: &mut Vec<u8>, u: u64| {
        let need = 2 * u as usize + 2;
        if reps.len() < need {
            reps.resize(need.max(reps.len() * 2), 0);
        }
        for &t in terms.iter() {
            let r = &mut reps[(t + u) as usize];
            if *r < 2 {
                *r += 1;
            }
        }
        terms.push(u);
    };
    add(&mut terms, &mut reps, 1);
    add(&mut terms, &mut reps, 2);
    while terms.len() < count {
        let mut v = *terms.last().expect("seeded") as usize + 1;
        while reps[v] != 1 {
            v += 1;
        }
        add(&mut terms, &mut reps, v as u64);
    }
    Ok(SequenceTable {
        generator: Generator::Ulam,
        terms: terms.into_iter().map(BigInt::from).collect(),
    })
}

/// Sums of distinct factorials `1!, 2!, 3!, …` in increasing order, starting
/// from `f₁ = 1`: `f_n` reads the binary digits of `n` as factorial digits.
pub fn generate_factorial_sums(count: usize) -> Result<SequenceTable> {
    if count < 1 {
        return Err(Error::invalid("count must be positive"));
    }
    // a[n] = (k+1)! + a[n − 2^k] with 2^k the top bit of n
    let mut vals: Vec<BigInt> = Vec::with_capacity(count + 1);
    vals.push(BigInt::zero());
    let mut fact = BigInt::one();
    let mut top = 0u32;
    for n in 1..=count {
        if n == 1usize << top {
            top += 1;
            fact *= top;
        }
        let hi = 1usize << (top - 1);
        let v = &fact + &vals[n - hi];
        vals.push(v);
    }
    vals.remove(0);
    Ok(SequenceTable {
        generator: Generator::FactorialSum,
        terms: vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn narayana_prefix() {
        let t = generate_recurrent(&RecurrenceSpec::narayana(), 11).unwrap();
        assert_eq!(t.terms(), ints(&[1, 2, 3, 4, 6, 9, 13, 19, 28, 41, 60]).as_slice());
        assert_eq!(t.get(10), &BigInt::from(41));
    }

    #[test]
    fn sqrt13_prefix() {
        let t = generate_recurrent(&RecurrenceSpec::sqrt13_example(), 8).unwrap();
        assert_eq!(t.terms(), ints(&[0, 0, 0, 0, 0, 1, 3, 15]).as_slice());
    }

    #[test]
    fn count_below_order_is_rejected() {
        assert!(generate_recurrent(&RecurrenceSpec::narayana(), 2).is_err());
    }

    #[test]
    fn characteristic_polynomial_of_narayana() {
        assert_eq!(
            RecurrenceSpec::narayana().characteristic_polynomial(),
            ints(&[-1, 0, -1, 1])
        );
    }

    #[test]
    fn generalized_family_heads() {
        let t = generate_recurrent(&RecurrenceSpec::generalized_narayana(5), 8).unwrap();
        assert_eq!(t.terms(), ints(&[1, 2, 3, 4, 5, 6, 8, 11]).as_slice());
        let t = generate_recurrent(&RecurrenceSpec::generalized_narayana(1), 5).unwrap();
        assert_eq!(t.terms(), ints(&[1, 2, 4, 8, 16]).as_slice());
    }

    #[test]
    fn ulam_head() {
        let t = generate_ulam(8).unwrap();
        assert_eq!(t.terms(), ints(&[1, 2, 3, 4, 6, 8, 11, 13]).as_slice());
        assert_eq!(generate_ulam(2).unwrap().len(), 2);
        assert!(generate_ulam(1).is_err());
    }

    #[test]
    fn factorial_sum_head() {
        let t = generate_factorial_sums(6).unwrap();
        assert_eq!(t.terms(), ints(&[1, 2, 3, 6, 7, 8]).as_slice());
        let t = generate_factorial_sums(1 << 6).unwrap();
        let mut f = BigInt::one();
        for k in 0..=6usize {
            f *= k + 1;
            assert_eq!(t.get(1 << k), &f);
        }
    }

    #[test]
    fn cache_round_trip() {
        let mut t = generate_recurrent(&RecurrenceSpec::sqrt6_example(), 50).unwrap();
        let mut buf = Vec::new();
        t.write_cache(&mut buf).unwrap();
        let back = SequenceTable::read_cache(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        t.terms.push(BigInt::from(-12345));
        let mut buf = Vec::new();
        t.write_cache(&mut buf).unwrap();
        assert_eq!(SequenceTable::read_cache(buf.as_slice()).unwrap(), t);
        assert!(SequenceTable::read_cache(&b"nope"[..]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = generate_recurrent(&RecurrenceSpec::narayana(), 200).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("index,value\n1,1\n2,2\n"));
        let back = SequenceTable::read_csv("narayana", buf.as_slice()).unwrap();
        assert_eq!(back.terms(), t.terms());
    }

    #[test]
    fn residual_check_flags_tampering() {
        let mut t = generate_recurrent(&RecurrenceSpec::narayana(), 30).unwrap();
        assert!(t.check_recurrence().is_ok());
        t.terms[20] += 1;
        match t.check_recurrence() {
            Err(Error::Signature { index, .. }) => assert_eq!(index, 21),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn narayana_growth_window() {
        let t = generate_recurrent(&RecurrenceSpec::narayana(), 400).unwrap();
        let g = t.growth_window((13, 10), (16, 10));
        // h₂/h₁ = 2 is the only ratio outside (1.3, 1.6)
        assert_eq!(g.first_index, 2);
        assert!(g.min_ratio > 1.3 && g.max_ratio < 1.6);
    }
}
