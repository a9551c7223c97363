//! Greedy numeration in a base `a₁ = 1 < a₂ < …` and replacement sequences.
//!
//! Writing `n` greedily in base `aᵢ` and reading the digits in base `bᵢ`
//! gives `A(n)`. With `bᵢ = a_{i−1}` (and `b₁ = 1`) over the generalized
//! Narayana base this is the Hofstadter family; other choices give digit
//! sums, the Szekeres and Moser–de Bruijn sequences, Fibbinary numbers and
//! sums of distinct factorials.

use std::io::Write;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::seqcore::{generate_recurrent, RecurrenceSpec, SequenceTable};
use crate::{Error, Result};

/// Digits `(index, multiplicity)` with strictly decreasing indices. Index 0
/// only appears after a right shift and stands for the value 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreedyRepresentation {
    pub digits: Vec<(usize, u64)>,
    pub value: BigInt,
}

impl GreedyRepresentation {
    pub fn digit_sum(&self) -> u64 {
        self.digits.iter().map(|d| d.1).sum()
    }

    pub fn lowest_index(&self) -> Option<usize> {
        self.digits.last().map(|d| d.0)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.digits.iter().map(|d| d.0).collect()
    }
}

fn check_base(base: &SequenceTable) -> Result<()> {
    match base.try_get(1) {
        Some(a) if a.is_one() => Ok(()),
        _ => Err(Error::invalid(format!(
            "base `{}` must start with a₁ = 1",
            base.name()
        ))),
    }
}

/// Largest index `k` with `a_k ≤ n`, requiring a materialized term above `n`.
fn top_index(n: &BigInt, base: &SequenceTable) -> Result<usize> {
    let terms = base.terms();
    let k = terms.partition_point(|t| t <= n);
    if k == terms.len() {
        return Err(Error::Range {
            base: base.name().to_string(),
            value: n.to_string(),
            largest: terms.last().map(|t| t.to_string()).unwrap_or_default(),
        });
    }
    Ok(k)
}

/// Repeatedly subtract the largest term not exceeding what is left.
///
/// The base must be increasing with `a₁ = 1`, and materialized past `n`.
pub fn encode_greedy(n: &BigInt, base: &SequenceTable) -> Result<GreedyRepresentation> {
    if n.is_negative() {
        return Err(Error::invalid("only non-negative integers have a representation"));
    }
    check_base(base)?;
    let mut rem = n.clone();
    let mut digits = Vec::new();
    let mut hi = top_index(n, base)?;
    while !rem.is_zero() {
        let k = base.terms()[..hi].partition_point(|t| *t <= rem);
        let a = base.get(k);
        let (q, r) = rem.div_rem(a);
        let m = q
            .to_u64()
            .ok_or_else(|| Error::invalid("digit multiplicity exceeds 64 bits"))?;
        digits.push((k, m));
        rem = r;
        hi = k - 1;
    }
    Ok(GreedyRepresentation {
        digits,
        value: n.clone(),
    })
}

/// `Σ multiplicity·a_index`, with index 0 read as 1.
pub fn decode(rep: &GreedyRepresentation, base: &SequenceTable) -> Result<BigInt> {
    decode_digits(&rep.digits, base)
}

fn decode_digits(digits: &[(usize, u64)], base: &SequenceTable) -> Result<BigInt> {
    let mut acc = BigInt::zero();
    for &(i, m) in digits {
        let a = if i == 0 {
            BigInt::one()
        } else {
            base.try_get(i).cloned().ok_or_else(|| Error::Range {
                base: base.name().to_string(),
                value: format!("index {i}"),
                largest: format!("index {}", base.len()),
            })?
        };
        acc += a * m;
    }
    Ok(acc)
}

/// Every index moves down by one; index 1 lands on the virtual index 0.
pub fn right_shift(rep: &GreedyRepresentation, base: &SequenceTable) -> Result<GreedyRepresentation> {
    let digits: Vec<(usize, u64)> = rep
        .digits
        .iter()
        .map(|&(i, m)| (i.saturating_sub(1), m))
        .collect();
    let value = decode_digits(&digits, base)?;
    Ok(GreedyRepresentation { digits, value })
}

pub fn digit_sum(n: &BigInt, base: &SequenceTable) -> Result<u64> {
    Ok(encode_greedy(n, base)?.digit_sum())
}

/// Replace digit `aᵢ` by `bᵢ`: `target.get(i)` is `bᵢ`.
#[derive(Clone, Debug)]
pub struct ReplacementMap {
    name: String,
    source: SequenceTable,
    target: SequenceTable,
}

impl ReplacementMap {
    pub fn new(name: impl Into<String>, source: SequenceTable, target: SequenceTable) -> Result<Self> {
        check_base(&source)?;
        if !source.is_strictly_increasing() {
            return Err(Error::invalid(format!(
                "base `{}` is not increasing",
                source.name()
            )));
        }
        if target.len() < source.len() {
            return Err(Error::invalid(format!(
                "target has {} terms, source {}",
                target.len(),
                source.len()
            )));
        }
        Ok(ReplacementMap {
            name: name.into(),
            source,
            target,
        })
    }

    /// `bᵢ = a_{i−1}` with `b₁ = 1`: the right shift.
    pub fn shift(source: SequenceTable) -> Result<Self> {
        let mut t = Vec::with_capacity(source.len());
        t.push(BigInt::one());
        t.extend(source.terms()[..source.len().saturating_sub(1)].iter().cloned());
        let name = format!("{}_shift", source.name());
        let target = SequenceTable::custom(format!("{}_shifted", source.name()), t);
        Self::new(name, source, target)
    }

    /// `bᵢ = 1`: the digit sum.
    pub fn digit_sum(source: SequenceTable) -> Result<Self> {
        let target = SequenceTable::custom("ones", vec![BigInt::one(); source.len()]);
        let name = format!("{}_digit_sum", source.name());
        Self::new(name, source, target)
    }

    /// The right shift over `a_i = i (i ≤ d)`, `a_i = a_{i−1} + a_{i−d}`,
    /// materialized past `max_n`.
    pub fn hofstadter(d: usize, max_n: u64) -> Result<Self> {
        let base = base_past(&RecurrenceSpec::generalized_narayana(d), max_n)?;
        Self::shift(base)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> &SequenceTable {
        &self.source
    }

    pub fn target(&self) -> &SequenceTable {
        &self.target
    }

    pub fn replace(&self, n: &BigInt) -> Result<BigInt> {
        let rep = encode_greedy(n, &self.source)?;
        let mut acc = BigInt::zero();
        for &(i, m) in &rep.digits {
            acc += self.target.get(i) * m;
        }
        Ok(acc)
    }

    /// `A(0), …, A(count−1)` in machine words by the recursion
    /// `A(n) = b_k + A(n − a_k)`, `a_k` the largest term `≤ n`. Also records
    /// the lowest digit index of each `n` (0 for `n = 0`).
    pub fn bulk(&self, count: usize) -> Result<BulkReplacement> {
        let a = self.source.u64_prefix();
        let need = count.saturating_sub(1) as u64;
        if a.last().is_none_or(|&t| t <= need) {
            return Err(Error::Range {
                base: self.source.name().to_string(),
                value: need.to_string(),
                largest: self
                    .source
                    .last()
                    .map(|t| t.to_string())
                    .unwrap_or_default(),
            });
        }
        let b: Vec<Option<u64>> = self.target.terms().iter().map(|t| t.to_u64()).collect();
        let mut values = vec![0u64; count];
        let mut lowest = vec![0u8; count];
        let mut k = 0usize; // a[k] is the largest term <= n
        for n in 1..count {
            while k + 1 < a.len() && a[k + 1] <= n as u64 {
                k += 1;
            }
            let ak = a[k] as usize;
            let bk = b[k].ok_or_else(|| overflow(&self.name))?;
            values[n] = bk
                .checked_add(values[n - ak])
                .ok_or_else(|| overflow(&self.name))?;
            lowest[n] = if n == ak {
                (k + 1) as u8
            } else {
                lowest[n - ak]
            };
        }
        Ok(BulkReplacement { values, lowest })
    }
}

fn overflow(name: &str) -> Error {
    Error::invalid(format!("values of `{name}` exceed 64 bits in this range"))
}

/// Materialize a recurrence until its last term exceeds `max_n`.
pub fn base_past(spec: &RecurrenceSpec, max_n: u64) -> Result<SequenceTable> {
    let mut count = spec.order().max(8);
    loop {
        let t = generate_recurrent(spec, count)?;
        if t.last().is_some_and(|x| *x > BigInt::from(max_n)) && t.is_strictly_increasing() {
            return Ok(t);
        }
        if count > 1 << 20 {
            return Err(Error::invalid(format!(
                "`{}` does not grow past {max_n}",
                spec.name
            )));
        }
        count *= 2;
    }
}

/// `A(0..count)` with the lowest greedy digit index of each argument.
#[derive(Clone, Debug)]
pub struct BulkReplacement {
    pub values: Vec<u64>,
    pub lowest: Vec<u8>,
}

impl BulkReplacement {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `#{n : A(n) = m}` for every `m ≤ max A`, saturating at 255.
    pub fn preimage_counts(&self) -> Vec<u8> {
        let max = self.values.iter().copied().max().unwrap_or(0) as usize;
        let mut c = vec![0u8; max + 1];
        for &v in &self.values {
            let slot = &mut c[v as usize];
            *slot = slot.saturating_add(1);
        }
        c
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,value")?;
        for (n, v) in self.values.iter().enumerate() {
            writeln!(w, "{n},{v}")?;
        }
        Ok(())
    }
}

/// Checks `{A(i) : i < a_n} = {A(i) : i < a_{n−1}} ⊎ {b_{n−1} + A(l) : l < a_n − a_{n−1}}`
/// as multisets for every `n ≥ 2` with `a_n ≤ values.len()`. Returns the
/// indices `n` that were checked; fails at the first mismatch.
pub fn check_multiset_recurrence(map: &ReplacementMap, values: &[u64]) -> Result<Vec<usize>> {
    let a = map.source().u64_prefix();
    let b: Vec<u64> = map.target().u64_prefix();
    let max = values.iter().copied().max().unwrap_or(0) as usize;
    let mut lhs = vec![0u32; max + 1];
    let mut rhs = vec![0u32; max + 1];
    let mut filled = 0usize;
    let mut checked = Vec::new();
    for n in 2..=a.len() {
        let an = a[n - 1] as usize;
        let prev = a[n - 2] as usize;
        if an > values.len() || n - 1 > b.len() {
            break;
        }
        // lhs counts every i < a_n
        for &v in &values[filled..an] {
            lhs[v as usize] += 1;
        }
        filled = an;
        rhs.iter_mut().for_each(|c| *c = 0);
        for &v in &values[..prev] {
            rhs[v as usize] += 1;
        }
        let shift = b[n - 2];
        for &v in &values[..an - prev] {
            let w = (v + shift) as usize;
            if w > max {
                return Err(Error::Signature {
                    index: n,
                    reason: format!("shifted value {w} outside the range of A"),
                });
            }
            rhs[w] += 1;
        }
        if lhs != rhs {
            return Err(Error::Signature {
                index: n,
                reason: "multiset recurrence fails".into(),
            });
        }
        checked.push(n);
    }
    Ok(checked)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignatureProfile {
    /// Largest lookback `n − i` used by the greedy self-expansion of `a_n`.
    pub l: usize,
    pub growth_r: f64,
    pub growth_s: f64,
    pub verified_range: (usize, usize),
    /// Largest digit multiplicity seen in a self-expansion.
    pub max_multiplicity: u64,
}

/// Caps for [`verify_signature`].
#[derive(Clone, Copy, Debug)]
pub struct SignatureCaps {
    pub max_lookback: usize,
    /// Consecutive ratios above this count as unbounded growth.
    pub max_ratio: f64,
}

impl Default for SignatureCaps {
    fn default() -> Self {
        SignatureCaps {
            max_lookback: 12,
            max_ratio: 16.0,
        }
    }
}

/// Expand each `a_n` (`n` in `range`, inclusive, `n ≥ 2`) greedily over
/// `a₁..a_{n−1}` and measure the lookback and the growth ratios.
pub fn verify_signature(
    base: &SequenceTable,
    range: (usize, usize),
    caps: SignatureCaps,
) -> Result<SignatureProfile> {
    check_base(base)?;
    let (lo, hi) = range;
    let lo = lo.max(2);
    if hi < lo || hi + 1 > base.len() {
        return Err(Error::invalid(format!(
            "range {lo}..={hi} needs {} materialized terms, have {}",
            hi + 1,
            base.len()
        )));
    }
    let mut l = 0usize;
    let mut max_mult = 0u64;
    let mut r = f64::INFINITY;
    let mut s = 0f64;
    for n in lo..=hi {
        let prefix = SequenceTable::custom(base.name(), base.terms()[..n].to_vec());
        let target = base.get(n);
        // a_n itself is excluded: expand over indices below n
        let mut rem = target.clone();
        let mut hi_idx = n - 1;
        let mut lowest = n;
        while !rem.is_zero() {
            let k = prefix.terms()[..hi_idx].partition_point(|t| *t <= rem);
            let (q, rr) = rem.div_rem(prefix.get(k));
            max_mult = max_mult.max(q.to_u64().unwrap_or(u64::MAX));
            rem = rr;
            lowest = k;
            if k == 1 {
                break;
            }
            hi_idx = k - 1;
        }
        let lookback = n - lowest;
        if lookback > caps.max_lookback {
            return Err(Error::Signature {
                index: n,
                reason: format!(
                    "greedy self-expansion reaches back {lookback} places (cap {})",
                    caps.max_lookback
                ),
            });
        }
        l = l.max(lookback);
        let ratio = ratio(base.get(n + 1), base.get(n));
        if ratio > caps.max_ratio {
            return Err(Error::Signature {
                index: n,
                reason: format!(
                    "growth ratio {ratio:.3} exceeds {} (no upper growth constant)",
                    caps.max_ratio
                ),
            });
        }
        r = r.min(ratio);
        s = s.max(ratio);
    }
    Ok(SignatureProfile {
        l,
        growth_r: r,
        growth_s: s,
        verified_range: (lo, hi),
        max_multiplicity: max_mult,
    })
}

fn ratio(a: &BigInt, b: &BigInt) -> f64 {
    let shift = a.bits().max(b.bits()).saturating_sub(60) as usize;
    (a >> shift).to_f64().unwrap_or(f64::NAN) / (b >> shift).to_f64().unwrap_or(f64::NAN)
}

/// How a named base is produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseGenerator {
    Recurrence { spec: RecurrenceSpec },
    /// `i!` for `i ≥ 1`.
    Factorials,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseEntry {
    pub name: String,
    pub generator: BaseGenerator,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetRule {
    /// `bᵢ = a_{i−1}`, `b₁ = 1`.
    Shift,
    /// `bᵢ = 1`.
    Ones,
    /// `bᵢ` is the `i`-th term of another registered base.
    Base { name: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapEntry {
    pub name: String,
    pub source: String,
    pub target: TargetRule,
}

/// Named bases and replacement maps, loadable from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    pub bases: Vec<BaseEntry>,
    pub maps: Vec<MapEntry>,
}

impl Default for Registry {
    fn default() -> Self {
        let rec = |name: &str, spec: RecurrenceSpec| BaseEntry {
            name: name.into(),
            generator: BaseGenerator::Recurrence { spec },
        };
        let mut bases = vec![
            rec("narayana", RecurrenceSpec::narayana()),
            rec("fibonacci", RecurrenceSpec::fibonacci()),
            rec("binary", RecurrenceSpec::powers(2)),
            rec("ternary", RecurrenceSpec::powers(3)),
            rec("quaternary", RecurrenceSpec::powers(4)),
            BaseEntry {
                name: "factorials".into(),
                generator: BaseGenerator::Factorials,
            },
        ];
        for d in 1..=7 {
            bases.push(rec(
                &format!("narayana_d{d}"),
                RecurrenceSpec::generalized_narayana(d),
            ));
        }
        let map = |name: &str, source: &str, target: TargetRule| MapEntry {
            name: name.into(),
            source: source.into(),
            target,
        };
        let base = |n: &str| TargetRule::Base { name: n.into() };
        let mut maps = vec![
            map("narayana_shift", "narayana", TargetRule::Shift),
            map("binary_ternary", "binary", base("ternary")),
            map("binary_quaternary", "binary", base("quaternary")),
            map("binary_factorial", "binary", base("factorials")),
            map("fibonacci_binary", "fibonacci", base("binary")),
            map("fibonacci_shift", "fibonacci", TargetRule::Shift),
            map("digit_sum_narayana", "narayana", TargetRule::Ones),
            map("digit_sum_fibonacci", "fibonacci", TargetRule::Ones),
            map("digit_sum_binary", "binary", TargetRule::Ones),
        ];
        for d in 1..=7 {
            maps.push(map(
                &format!("hofstadter_d{d}"),
                &format!("narayana_d{d}"),
                TargetRule::Shift,
            ));
        }
        Registry { bases, maps }
    }
}

impl Registry {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn base_entry(&self, name: &str) -> Result<&BaseEntry> {
        self.bases
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| Error::invalid(format!("unknown base `{name}`")))
    }

    /// The first `count` terms of a registered base.
    pub fn base(&self, name: &str, count: usize) -> Result<SequenceTable> {
        match &self.base_entry(name)?.generator {
            BaseGenerator::Recurrence { spec } => {
                let mut spec = spec.clone();
                spec.name = name.to_string();
                generate_recurrent(&spec, count.max(spec.order()))
            }
            BaseGenerator::Factorials => {
                let mut f = BigInt::one();
                let terms = (1..=count)
                    .map(|i| {
                        f *= i;
                        f.clone()
                    })
                    .collect();
                Ok(SequenceTable::custom(name, terms))
            }
        }
    }

    /// A registered base materialized past `max_n`.
    pub fn base_past(&self, name: &str, max_n: u64) -> Result<SequenceTable> {
        let mut count = 8;
        loop {
            let t = self.base(name, count)?;
            if t.last().is_some_and(|x| *x > BigInt::from(max_n)) {
                return Ok(t);
            }
            if count > 1 << 20 {
                return Err(Error::invalid(format!("base `{name}` does not grow")));
            }
            count *= 2;
        }
    }

    /// Build a registered map able to encode every `n ≤ max_n`.
    pub fn map(&self, name: &str, max_n: u64) -> Result<ReplacementMap> {
        let entry = self
            .maps
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::invalid(format!("unknown map `{name}`")))?;
        let source = self.base_past(&entry.source, max_n)?;
        let map = match &entry.target {
            TargetRule::Shift => ReplacementMap::shift(source)?,
            TargetRule::Ones => ReplacementMap::digit_sum(source)?,
            TargetRule::Base { name: t } => {
                let target = self.base(t, source.len())?;
                ReplacementMap::new(name, source, target)?
            }
        };
        Ok(ReplacementMap {
            name: name.to_string(),
            ..map
        })
    }

    pub fn map_names(&self) -> Vec<&str> {
        self.maps.iter().map(|m| m.name.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn narayana() -> SequenceTable {
        generate_recurrent(&RecurrenceSpec::narayana(), 40).unwrap()
    }

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn sixteen_is_thirteen_plus_three() {
        let rep = encode_greedy(&big(16), &narayana()).unwrap();
        assert_eq!(rep.digits, vec![(7, 1), (3, 1)]);
        assert_eq!(rep.digit_sum(), 2);
        let s = right_shift(&rep, &narayana()).unwrap();
        assert_eq!(s.value, big(11));
    }

    #[test]
    fn one_and_its_shift() {
        let rep = encode_greedy(&big(1), &narayana()).unwrap();
        assert_eq!(rep.digits, vec![(1, 1)]);
        let s = right_shift(&rep, &narayana()).unwrap();
        assert_eq!(s.digits, vec![(0, 1)]);
        assert_eq!(s.value, big(1));
    }

    #[test]
    fn hundred() {
        let rep = encode_greedy(&big(100), &narayana()).unwrap();
        assert_eq!(rep.indices(), vec![12, 6, 3]);
        assert_eq!(decode(&rep, &narayana()).unwrap(), big(100));
        assert_eq!(right_shift(&rep, &narayana()).unwrap().value, big(68));
        let digits = GreedyRepresentation {
            digits: vec![(12, 1), (6, 1), (3, 1)],
            value: big(100),
        };
        assert_eq!(decode(&digits, &narayana()).unwrap(), big(100));
    }

    #[test]
    fn range_errors() {
        let short = generate_recurrent(&RecurrenceSpec::narayana(), 5).unwrap();
        assert!(matches!(
            encode_greedy(&big(6), &short),
            Err(Error::Range { .. })
        ));
        assert!(encode_greedy(&big(5), &short).is_ok());
        let bad = SequenceTable::from_u64("bad", &[2, 3, 5]);
        assert!(encode_greedy(&big(4), &bad).is_err());
    }

    #[test]
    fn registry_maps() {
        let reg = Registry::default();
        let t = reg.map("binary_ternary", 1000).unwrap();
        assert_eq!(t.replace(&big(5)).unwrap(), big(10));
        let q = reg.map("binary_quaternary", 1000).unwrap();
        assert_eq!(q.replace(&big(3)).unwrap(), big(5));
        let f = reg.map("binary_factorial", 1000).unwrap();
        assert_eq!(f.replace(&big(4)).unwrap(), big(6));
        let fb = reg.map("fibonacci_binary", 1000).unwrap();
        // 12 = 8 + 3 + 1 → indices 5, 3, 1 → 16 + 4 + 1
        assert_eq!(fb.replace(&big(12)).unwrap(), big(21));
        let json = reg.to_json().unwrap();
        assert_eq!(Registry::from_json(&json).unwrap(), reg);
    }

    #[test]
    fn digit_sums() {
        let bin = Registry::default().base_past("binary", 1000).unwrap();
        assert_eq!(digit_sum(&big(100), &bin).unwrap(), 3);
        assert_eq!(digit_sum(&big(1), &bin).unwrap(), 1);
        assert_eq!(digit_sum(&big(16), &narayana()).unwrap(), 2);
    }

    #[test]
    fn bulk_agrees_with_codec() {
        let map = ReplacementMap::hofstadter(3, 5000).unwrap();
        let bulk = map.bulk(5000).unwrap();
        for n in 1..5000i64 {
            let rep = encode_greedy(&big(n), map.source()).unwrap();
            assert_eq!(BigInt::from(bulk.values[n as usize]), map.replace(&big(n)).unwrap());
            assert_eq!(bulk.lowest[n as usize] as usize, rep.lowest_index().unwrap());
        }
    }

    #[test]
    fn signatures() {
        let reg = Registry::default();
        let n = reg.base("narayana", 60).unwrap();
        let p = verify_signature(&n, (2, 58), SignatureCaps::default()).unwrap();
        assert_eq!(p.l, 3);
        let b = reg.base("binary", 40).unwrap();
        let p = verify_signature(&b, (2, 38), SignatureCaps::default()).unwrap();
        assert_eq!(p.l, 1);
        assert_eq!(p.max_multiplicity, 2);
        assert_eq!((p.growth_r, p.growth_s), (2.0, 2.0));
        let f = reg.base("factorials", 30).unwrap();
        match verify_signature(&f, (2, 28), SignatureCaps::default()) {
            Err(Error::Signature { index, .. }) => assert_eq!(index, 16),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lookback_cap() {
        // a_n = a_{n-1} + a_{n-14}-ish growth: a base whose expansions reach far back
        let mut t: Vec<u64> = (1..=14).collect();
        for _ in 0..20 {
            let n = t.len();
            t.push(t[n - 1] + t[n - 14]);
        }
        let base = SequenceTable::from_u64("deep", &t);
        assert!(matches!(
            verify_signature(&base, (2, 30), SignatureCaps::default()),
            Err(Error::Signature { .. })
        ));
    }

    #[test]
    fn multiplicities_above_one_are_kept() {
        // base 3: 8 = 2·3 + 2·1
        let t = Registry::default().base("ternary", 10).unwrap();
        let rep = encode_greedy(&big(8), &t).unwrap();
        assert_eq!(rep.digits, vec![(2, 2), (1, 2)]);
        assert_eq!(decode(&rep, &t).unwrap(), big(8));
    }

    #[test]
    fn multiset_recurrence_for_the_shift() {
        let map = ReplacementMap::hofstadter(3, 100_000).unwrap();
        let bulk = map.bulk(100_000).unwrap();
        let checked = check_multiset_recurrence(&map, &bulk.values).unwrap();
        assert!(checked.len() > 20);
    }
}
