//! Limit distributions: infinite-product Fourier coefficients, density
//! bounds, the valley/hill geometry of `{α·H(n)}` and the histogram
//! identities that follow from the numeration structure.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::numeration::ReplacementMap;
use crate::precision::Real;
use crate::svg::{line_chart, ChartStyle};
use crate::weyl::{bin_of, histogram, unit, CircleHistogram, Frequency};
use crate::{Error, Result};

// ---- infinite products over factorials ----

/// Frequencies whose factorial multiples are analysed in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorialFrequency {
    InvE,
    E,
}

impl FactorialFrequency {
    fn real(self) -> Real {
        match self {
            FactorialFrequency::InvE => Real::InvE,
            FactorialFrequency::E => Real::E,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductStatus {
    Converged,
    DivergentArgument,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartialProduct {
    pub n: usize,
    pub re: f64,
    pub im: f64,
}

/// `Π_{n≥1} (1 + e(d·β·n!))/2`, truncated.
#[derive(Clone, Debug, Serialize)]
pub struct InfiniteProductCoeff {
    pub d: u64,
    pub frequency: FactorialFrequency,
    pub partial_products: Vec<PartialProduct>,
    pub truncation: usize,
    /// Bound on `|P_∞ − P_N|`; meaningful only when converged.
    pub tail_bound: f64,
    pub status: ProductStatus,
    /// Unwrapped argument `Σ π·θₙ` of the truncated product.
    pub accumulated_argument: f64,
}

impl InfiniteProductCoeff {
    pub fn value(&self) -> Complex64 {
        let p = self.partial_products.last().expect("at least one checkpoint");
        Complex64::new(p.re, p.im)
    }

    pub fn modulus(&self) -> f64 {
        self.value().norm()
    }
}

/// `⌊{β·n!}·2^128⌋` for `n = 1..=count`, from `β` at `bits(count!) + 96`
/// bits and exact multiplication by `n`: the error of the running value
/// `β·n!` grows by the factor `n` and stays below `2^{−64}`.
pub fn factorial_phases(beta: FactorialFrequency, count: usize) -> Result<Vec<u128>> {
    let fact_bits: f64 = (2..=count.max(2)).map(|n| (n as f64).log2()).sum();
    let w = (fact_bits.ceil() as u32 + 96).max(192);
    let x = beta.real().approx(w);
    let bits = x.bits() as usize;
    let mut mant = x.mantissa().clone();
    let mut err = BigInt::from(x.error_ulps().clone());
    if mant.is_negative() {
        return Err(Error::invalid("frequency must be positive"));
    }
    let mask = (BigInt::from(1u8) << bits) - 1u8;
    let mut out = Vec::with_capacity(count);
    for n in 1..=count {
        mant *= n;
        err *= n;
        if err.bits() + 64 > bits as u64 {
            return Err(Error::Certification(format!(
                "enclosure of {:?}·{n}! too wide",
                beta
            )));
        }
        let frac: BigInt = &mant & &mask;
        let top = (frac >> (bits - 128)).to_u128().expect("128-bit word");
        out.push(top);
    }
    Ok(out)
}

/// Coefficients for `d = 0..=d_max` in one pass over `n ≤ truncation`.
///
/// For `β = 1/e` the phases `θₙ = {d·n!/e}` alternate in sign with
/// `|θₙ| ≈ d/(n+1)`; pairing consecutive factors bounds the argument of the
/// omitted tail by its first term and the modulus by `Σ (πθₙ)²`. For `β = e`
/// the phases `≈ d/n` keep one sign and the argument grows like `π·d·log n`.
pub fn factorial_product_coeffs(
    beta: FactorialFrequency,
    d_max: u64,
    truncation: usize,
) -> Result<Vec<InfiniteProductCoeff>> {
    if truncation == 0 {
        return Err(Error::invalid("truncation must be positive"));
    }
    let phases = factorial_phases(beta, truncation)?;
    let checkpoints = product_checkpoints(truncation);
    let mut out = Vec::with_capacity(d_max as usize + 1);
    for d in 0..=d_max {
        let mut p = Complex64::new(1.0, 0.0);
        let mut arg = 0.0f64;
        let mut partial = Vec::new();
        let mut signs = Vec::with_capacity(truncation);
        let mut next_cp = 0;
        for (i, &ph) in phases.iter().enumerate() {
            let n = i + 1;
            let theta = ph.wrapping_mul(d as u128);
            p *= (Complex64::new(1.0, 0.0) + unit(theta)) * 0.5;
            let t = ((theta >> 64) as u64 as i64) as f64 * 2f64.powi(-64);
            arg += PI * t;
            signs.push(t.signum());
            if checkpoints.get(next_cp) == Some(&n) {
                partial.push(PartialProduct { n, re: p.re, im: p.im });
                next_cp += 1;
            }
        }
        let (status, tail) = if d == 0 {
            (ProductStatus::Converged, 0.0)
        } else {
            diagnose(d, truncation, &signs, arg, p.norm())
        };
        out.push(InfiniteProductCoeff {
            d,
            frequency: beta,
            partial_products: partial,
            truncation,
            tail_bound: tail,
            status,
            accumulated_argument: arg,
        });
    }
    Ok(out)
}

pub fn factorial_product_coeff(
    d: u64,
    beta: FactorialFrequency,
    truncation: usize,
) -> Result<InfiniteProductCoeff> {
    Ok(factorial_product_coeffs(beta, d, truncation)?.pop().expect("d_max + 1 entries"))
}

fn product_checkpoints(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..)
        .map(|k| 10usize.pow(k / 3) * [1, 2, 5][(k % 3) as usize])
        .take_while(|&x| x < n)
        .collect();
    v.push(n);
    v
}

fn diagnose(d: u64, n: usize, signs: &[f64], arg: f64, modulus: f64) -> (ProductStatus, f64) {
    let half = n / 2;
    let start = half.max(2 * d as usize + 1);
    if start + 2 > n {
        return (ProductStatus::Undecided, f64::INFINITY);
    }
    let tail = &signs[start..];
    let alternating = tail.windows(2).all(|w| w[0] * w[1] < 0.0);
    let one_sign = tail.iter().all(|&s| s == tail[0] && s != 0.0);
    if alternating && n >= 4 * d as usize {
        // |θ_m| ≤ d/(m+1)·(1 + 1/m) for the omitted m > n
        let d = d as f64;
        let first = d / (n as f64 + 1.0) * (1.0 + 1.0 / n as f64);
        let arg_tail = PI * first;
        let mod_tail = PI * PI * d * d * 1.03 / n as f64;
        let z = arg_tail.hypot(mod_tail);
        (ProductStatus::Converged, modulus * (z.exp() - 1.0))
    } else if one_sign && arg.abs() > 4.0 * PI {
        (ProductStatus::DivergentArgument, f64::INFINITY)
    } else {
        (ProductStatus::Undecided, f64::INFINITY)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayBoundLine {
    pub d: usize,
    pub modulus: f64,
    pub bound: f64,
    pub passed: bool,
}

/// `|μ̂(d)| ≤ 0.98^d` for `d = 1..=d_max`; `moduli[d]` is `|μ̂(d)|` and
/// index 0 is ignored.
pub fn coeff_decay_bound_check(moduli: &[f64], d_max: usize) -> Vec<DecayBoundLine> {
    (1..=d_max.min(moduli.len().saturating_sub(1)))
        .map(|d| {
            let bound = 0.98f64.powi(d as i32);
            DecayBoundLine {
                d,
                modulus: moduli[d],
                bound,
                passed: moduli[d] <= bound,
            }
        })
        .collect()
}

// ---- density bound ----

#[derive(Clone, Debug, Serialize)]
pub struct DensityHypotheses {
    /// `max aₙ/n` over the checked range.
    pub linear_constant: f64,
    pub max_multiplicity: u64,
}

/// Checks `aₙ ≤ B·n` (with `n = first_index + i`) and that no value occurs
/// more than `C` times.
pub fn verify_density_hypotheses(
    values: &[u64],
    first_index: u64,
    b_lin: (u64, u64),
    c_mult: u64,
) -> Result<DensityHypotheses> {
    let (bn, bd) = b_lin;
    if bd == 0 {
        return Err(Error::invalid("zero denominator"));
    }
    let mut lin = 0.0f64;
    for (i, &v) in values.iter().enumerate() {
        let n = first_index + i as u64;
        if v as u128 * bd as u128 > bn as u128 * n as u128 {
            return Err(Error::Hypothesis(format!(
                "a({n}) = {v} exceeds {bn}/{bd}·{n}"
            )));
        }
        if n > 0 {
            lin = lin.max(v as f64 / n as f64);
        }
    }
    let max = values.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0u32; max + 1];
    let mut worst = 0u64;
    for &v in values {
        counts[v as usize] += 1;
        worst = worst.max(counts[v as usize] as u64);
    }
    if worst > c_mult {
        return Err(Error::Hypothesis(format!(
            "a value occurs {worst} times, more than {c_mult}"
        )));
    }
    Ok(DensityHypotheses {
        linear_constant: lin,
        max_multiplicity: worst,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityCheck {
    pub max_density: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Largest bin density against `4·B·C`.
pub fn density_bound_check(hist: &CircleHistogram, b_lin: (u64, u64), c_mult: u64) -> DensityCheck {
    let max_density = hist.densities().into_iter().fold(0.0, f64::max);
    let bound = 4.0 * b_lin.0 as f64 / b_lin.1 as f64 * c_mult as f64;
    DensityCheck {
        max_density,
        bound,
        passed: max_density <= bound,
    }
}

// ---- valley and hill ----

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct FlatRun {
    pub start: usize,
    pub len: usize,
    /// Center in turns.
    pub center: f64,
    /// Mean density over the run.
    pub height: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValleyHillReport {
    pub bins: usize,
    pub valley: FlatRun,
    pub hill: FlatRun,
    pub ratio: f64,
    /// `(valley center − hill center) mod 1`.
    pub offset: f64,
    /// `{2α}`.
    pub expected_offset: f64,
    pub offset_error_bins: f64,
    /// Bins where the valley run meets the hill run moved by `{2α}`.
    pub common_bins: usize,
    /// `max |μ(x) − (v + h − μ(x − 2α))| / h` over the common bins.
    pub fit_residual: f64,
    /// The same over the whole valley run widened by its length.
    pub wide_residual: f64,
}

impl ValleyHillReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Longest circular run of bins satisfying `pred`.
fn longest_run(mask: &[bool]) -> Option<(usize, usize)> {
    let n = mask.len();
    if mask.iter().all(|&m| m) {
        return Some((0, n));
    }
    let start = mask.iter().position(|&m| !m)?;
    let mut best: Option<(usize, usize)> = None;
    let mut cur: Option<(usize, usize)> = None;
    for k in 1..=n {
        let i = (start + k) % n;
        if mask[i] {
            let c = cur.get_or_insert((i, 0));
            c.1 += 1;
            if best.is_none_or(|b| c.1 > b.1) {
                best = Some(*c);
            }
        } else {
            cur = None;
        }
    }
    best
}

fn run(d: &[f64], start: usize, len: usize) -> FlatRun {
    let b = d.len();
    let height = (0..len).map(|i| d[(start + i) % b]).sum::<f64>() / len as f64;
    let center = ((start as f64 + len as f64 / 2.0) / b as f64).rem_euclid(1.0);
    FlatRun {
        start,
        len,
        center,
        height,
    }
}

/// Density at a fractional bin position, interpolating between bin centers.
fn sample(d: &[f64], pos: f64) -> f64 {
    let b = d.len() as f64;
    let x = (pos - 0.5).rem_euclid(b);
    let i = x.floor() as usize % d.len();
    let f = x - x.floor();
    d[i] * (1.0 - f) + d[(i + 1) % d.len()] * f
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let x = (a - b).rem_euclid(1.0);
    x.min(1.0 - x)
}

/// Flat runs within 2% of the extremal densities (minimum length 8 bins per
/// 512), their heights, offset and the reflected-hill overlay.
pub fn valley_hill_analysis(hist: &CircleHistogram, alpha: f64) -> Result<ValleyHillReport> {
    let d = hist.densities();
    let b = d.len();
    let min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let max = d.iter().copied().fold(0.0, f64::max);
    let min_len = (8 * b).div_ceil(512).max(2);
    let valley_mask: Vec<bool> = d.iter().map(|&x| x <= 1.02 * min).collect();
    let hill_mask: Vec<bool> = d.iter().map(|&x| x >= 0.98 * max).collect();
    let (vs, vl) = longest_run(&valley_mask).ok_or_else(|| Error::Undecided("no valley".into()))?;
    let (hs, hl) = longest_run(&hill_mask).ok_or_else(|| Error::Undecided("no hill".into()))?;
    if vl < min_len || hl < min_len || vl == b || hl == b || max < 1.02 * min / 0.98 {
        return Err(Error::Undecided(format!(
            "no distinct flat runs (valley {vl} bins, hill {hl} bins, min {min:.4}, max {max:.4})"
        )));
    }
    let valley = run(&d, vs, vl);
    let hill = run(&d, hs, hl);
    let offset = (valley.center - hill.center).rem_euclid(1.0);
    let expected = (2.0 * alpha).rem_euclid(1.0);
    let shift_bins = expected * b as f64;
    let reflected = |pos: f64| valley.height + hill.height - sample(&d, pos - shift_bins);
    // bins of the valley run whose shifted image lies in the hill run
    let in_hill = |pos: f64| {
        let p = (pos - shift_bins - hs as f64).rem_euclid(b as f64);
        p >= 0.0 && p <= hl as f64 - 1.0
    };
    let mut common = 0usize;
    let mut fit = 0.0f64;
    for i in 0..vl {
        let bin = (vs + i) % b;
        let pos = bin as f64 + 0.5;
        if in_hill(pos - 0.5) {
            common += 1;
            fit = fit.max((d[bin] - reflected(pos)).abs());
        }
    }
    let mut wide = 0.0f64;
    for i in 0..3 * vl {
        let bin = (vs + b - vl + i) % b;
        let pos = bin as f64 + 0.5;
        wide = wide.max((d[bin] - reflected(pos)).abs());
    }
    if common == 0 {
        return Err(Error::Undecided(
            "valley and shifted hill do not overlap".into(),
        ));
    }
    Ok(ValleyHillReport {
        bins: b,
        valley,
        hill,
        ratio: hill.height / valley.height,
        offset,
        expected_offset: expected,
        offset_error_bins: circle_dist(offset, expected) * b as f64,
        common_bins: common,
        fit_residual: fit / hill.height,
        wide_residual: wide / hill.height,
    })
}

/// The valley against the reflected, shifted hill around the valley run.
pub fn overlay_svg(hist: &CircleHistogram, report: &ValleyHillReport, width: u32, height: u32) -> String {
    let d = hist.densities();
    let b = d.len();
    let shift = report.expected_offset * b as f64;
    let vl = report.valley.len;
    let lo = report.valley.start + b - vl;
    let valley: Vec<f64> = (0..3 * vl).map(|i| d[(lo + i) % b]).collect();
    let hill: Vec<f64> = (0..3 * vl)
        .map(|i| {
            let pos = ((lo + i) % b) as f64 + 0.5;
            report.valley.height + report.hill.height - sample(&d, pos - shift)
        })
        .collect();
    line_chart(
        &[("valley", &valley), ("reflected hill", &hill)],
        &ChartStyle::new("valley vs reflected hill", width, height),
    )
}

// ---- preimage split ----

#[derive(Clone, Debug, Serialize)]
pub struct PreimageSplit {
    pub total: CircleHistogram,
    /// Every `m` from 1 to the largest value.
    pub naturals: CircleHistogram,
    /// Values hit twice (each counted once).
    pub eta1: CircleHistogram,
    /// Values hit once.
    pub eta2: CircleHistogram,
    pub distinct: u64,
}

impl PreimageSplit {
    /// `total = naturals + η₁` and `total = 2·naturals − η₂`, bin by bin.
    pub fn identities_hold(&self) -> bool {
        (0..self.total.bins).all(|i| {
            let t = self.total.counts[i];
            let u = self.naturals.counts[i];
            t == u + self.eta1.counts[i] && t + self.eta2.counts[i] == 2 * u
        }) && self.eta1.total + self.eta2.total == self.distinct
    }
}

/// Splits the histogram of `{β·H(n)}`, `1 ≤ n < values.len()`, by the
/// number of preimages. `values[0]` is `H(0)` and skipped. The last value
/// may still be missing its second preimage and is dropped from every part.
pub fn preimage_split_histograms(values: &[u64], beta: &Frequency, bins: usize) -> Result<PreimageSplit> {
    if values.len() < 3 {
        return Err(Error::invalid("need at least two terms"));
    }
    let h = &values[1..];
    let last = *h.last().expect("nonempty");
    let mut mult = vec![0u8; last as usize + 1];
    for &v in h {
        let slot = &mut mult[v as usize];
        *slot = slot.saturating_add(1);
    }
    let mut ones = Vec::new();
    let mut twos = Vec::new();
    let mut total = Vec::new();
    for m in 1..last {
        match mult[m as usize] {
            1 => ones.push(m),
            2 => twos.push(m),
            k => {
                return Err(Error::Hypothesis(format!(
                    "value {m} has {k} preimages"
                )))
            }
        }
        for _ in 0..mult[m as usize] {
            total.push(m);
        }
    }
    let naturals: Vec<u64> = (1..last).collect();
    let label = "H";
    Ok(PreimageSplit {
        total: histogram(&total, beta, bins, label)?,
        naturals: histogram(&naturals, beta, bins, "naturals")?,
        eta1: histogram(&twos, beta, bins, "hit twice")?,
        eta2: histogram(&ones, beta, bins, "hit once")?,
        distinct: naturals.len() as u64,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaFreeRun {
    pub start: usize,
    pub len: usize,
    pub inside_valley: bool,
    pub covers_center: bool,
    /// `len / valley.len`.
    pub coverage: f64,
}

/// Longest run of bins that no doubly hit value reaches, against the flat
/// valley run. The 2% flatness rule admits edge bins carrying a small `η₁`
/// mass, so the free run is compared by containment and coverage.
pub fn eta1_free_run(split: &PreimageSplit, report: &ValleyHillReport) -> EtaFreeRun {
    let b = split.eta1.bins;
    let mask: Vec<bool> = split.eta1.counts.iter().map(|&c| c == 0).collect();
    let (start, len) = longest_run(&mask).unwrap_or((0, 0));
    let v = &report.valley;
    let rel = |i: usize| (i + b - v.start) % b;
    let inside_valley = len > 0 && rel(start) + len <= v.len;
    let center_bin = (v.start + v.len / 2) % b;
    let covers_center = len > 0 && (center_bin + b - start) % b < len;
    EtaFreeRun {
        start,
        len,
        inside_valley,
        covers_center,
        coverage: len as f64 / v.len as f64,
    }
}

/// `max |η₂(y) − η₁(y + 2α)| / hill height` over the hill run widened by
/// `widen` bins on both sides (counts converted to densities).
pub fn eta_shift_residual(split: &PreimageSplit, report: &ValleyHillReport, widen: usize) -> f64 {
    let b = split.eta1.bins;
    let hl = report.hill.len;
    let window = (0..hl + 2 * widen).map(|i| (report.hill.start + b - widen + i) % b);
    let norm = split.total.total as f64 / b as f64 * report.hill.height;
    shifted_residual(
        &split.eta2.counts,
        &split.eta1.counts,
        -report.expected_offset,
        window,
        norm,
    )
}

/// `max |a(x) − b(x − shift)|` over the given bins, in the units of the
/// count vectors normalized by `norm`.
pub fn shifted_residual(a: &[u64], b: &[u64], shift_turns: f64, bins: impl IntoIterator<Item = usize>, norm: f64) -> f64 {
    let bf: Vec<f64> = b.iter().map(|&x| x as f64).collect();
    let s = shift_turns * a.len() as f64;
    bins.into_iter()
        .map(|i| (a[i] as f64 - sample(&bf, i as f64 + 0.5 - s)).abs() / norm)
        .fold(0.0, f64::max)
}

// ---- scaled copies ----

/// `m` consecutive segments of a histogram, each as a count vector scaled
/// by `m` (so that each is comparable to a histogram with `bins/m` bins).
pub fn fold_segments(hist: &CircleHistogram, m: usize) -> Result<Vec<Vec<u64>>> {
    if m == 0 || !hist.bins.is_multiple_of(m) {
        return Err(Error::invalid(format!("{} bins do not split into {m}", hist.bins)));
    }
    let seg = hist.bins / m;
    Ok(hist
        .counts
        .chunks(seg)
        .map(|c| c.iter().map(|&x| x * m as u64).collect())
        .collect())
}

/// `max_{j,b} |segment_j[b] − reference[b]| / reference[b]`.
pub fn scaled_copies_deviation(folded: &[Vec<u64>], reference: &CircleHistogram) -> f64 {
    folded
        .iter()
        .flat_map(|seg| {
            seg.iter()
                .zip(&reference.counts)
                .map(|(&s, &r)| (s as f64 - r as f64).abs() / (r as f64).max(1.0))
        })
        .fold(0.0, f64::max)
}

// ---- G step function ----

#[derive(Clone, Debug, Serialize)]
pub struct StepLevels {
    /// Left end of the doubly covered arc, `2 − φ`.
    pub step_at: f64,
    pub low: f64,
    pub high: f64,
    pub expected_low: f64,
    pub expected_high: f64,
    /// Largest relative deviation of a bin (away from the step) from its level.
    pub max_relative_deviation: f64,
}

/// Density of `{G(n)/φ}` against the two levels `φ − 1` and `2(φ − 1)`.
/// `{G(n)/φ} = {−φ·u}` with `u = {(n+1)/φ}` equidistributed, so `[0, 2 − φ)`
/// is covered once and `[2 − φ, 1)` twice by an interval of length `φ`.
pub fn g_step_levels(g: &[u64], bins: usize) -> Result<StepLevels> {
    use crate::precision::constants::phi;
    let inv_phi = Real::algebraic(phi()).plus(Real::int(-1));
    let beta = Frequency::new("1/phi", &inv_phi);
    let hist = histogram(&g[1..], &beta, bins, "G")?;
    let d = hist.densities();
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let step = 2.0 - golden;
    let (lo_level, hi_level) = (golden - 1.0, 2.0 * (golden - 1.0));
    let mut low = (0.0, 0usize);
    let mut high = (0.0, 0usize);
    let mut worst = 0.0f64;
    for (i, &x) in d.iter().enumerate() {
        let (a, b) = (i as f64 / bins as f64, (i + 1) as f64 / bins as f64);
        if a < step && b > step {
            continue;
        }
        let (acc, level) = if b <= step {
            (&mut low, lo_level)
        } else {
            (&mut high, hi_level)
        };
        acc.0 += x;
        acc.1 += 1;
        worst = worst.max((x - level).abs() / level);
    }
    Ok(StepLevels {
        step_at: step,
        low: low.0 / low.1.max(1) as f64,
        high: high.0 / high.1.max(1) as f64,
        expected_low: lo_level,
        expected_high: hi_level,
        max_relative_deviation: worst,
    })
}

// ---- mixture identity ----

/// At each `n` with `a_n ≤ values.len()`: the histogram of the first `a_n`
/// values equals the histogram of the first `a_{n−1}` values plus that of
/// `b_{n−1} + A(l)`, `l < a_n − a_{n−1}`, count for count.
pub fn mixture_identity_check(map: &ReplacementMap, values: &[u64], beta: &Frequency, bins: usize) -> Result<Vec<usize>> {
    let a = map.source().u64_prefix();
    let b = map.target().u64_prefix();
    let mut checked = Vec::new();
    for n in 2..=a.len() {
        let (an, prev) = (a[n - 1] as usize, a[n - 2] as usize);
        if an > values.len() || n - 1 > b.len() {
            break;
        }
        let whole = histogram(&values[..an], beta, bins, "")?;
        let head = histogram(&values[..prev], beta, bins, "")?;
        let shift = b[n - 2];
        let mut mixed = head.counts.clone();
        for &v in &values[..an - prev] {
            mixed[bin_of(beta.phase(v + shift), bins)] += 1;
        }
        if mixed != whole.counts {
            return Err(Error::Signature {
                index: n,
                reason: "histogram mixture identity fails".into(),
            });
        }
        checked.push(an);
    }
    Ok(checked)
}

// ---- Fourier decay ----

#[derive(Clone, Debug, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub points: usize,
}

/// Least squares of `log|μ̂(d)|` on `log d` over `d_lo..=d_hi`; `moduli[d−1]`
/// is `|μ̂(d)|`.
pub fn fit_power_law(moduli: &[f64], d_lo: usize, d_hi: usize) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = (d_lo.max(1)..=d_hi.min(moduli.len()))
        .filter(|&d| moduli[d - 1] > 0.0)
        .map(|d| ((d as f64).ln(), moduli[d - 1].ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::invalid("need at least three positive coefficients"));
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    let stderr = (rss / (n as f64 - 2.0) / sxx).sqrt();
    Ok(PowerFit {
        exponent: slope,
        stderr,
        ci95: (slope - 1.96 * stderr, slope + 1.96 * stderr),
        points: n,
    })
}

/// `|Π_{n≤k} (1 + e(β·n!))/2|`-style products are exact Weyl sums over the
/// first `2^k` sums of distinct factorials; this evaluates the product for
/// a `BigInt`-free cross-check.
pub fn truncated_factorial_product(beta: FactorialFrequency, d: u64, k: usize) -> Result<Complex64> {
    let phases = factorial_phases(beta, k)?;
    Ok(phases
        .iter()
        .map(|&p| (Complex64::new(1.0, 0.0) + unit(p.wrapping_mul(d as u128))) * 0.5)
        .product())
}

/// Histogram of `{β·f_n}` for the sums of distinct factorials `f_1..f_count`,
/// with `f_n = Σ (k+1)!` over the set bits `k` of `n`. Phase words add, so
/// no `f_n` is ever materialized.
pub fn factorial_sum_histogram(beta: FactorialFrequency, count: usize, bins: usize) -> Result<CircleHistogram> {
    use rayon::prelude::*;
    if bins == 0 || count == 0 {
        return Err(Error::invalid("count and bin count must be positive"));
    }
    let k = usize::BITS as usize - count.leading_zeros() as usize;
    let phases = factorial_phases(beta, k)?;
    let counts = (1..=count)
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut c, n| {
                let mut ph = 0u128;
                let mut m = n;
                while m != 0 {
                    let b = m.trailing_zeros() as usize;
                    ph = ph.wrapping_add(phases[b]);
                    m &= m - 1;
                }
                c[bin_of(ph, bins)] += 1;
                c
            },
        )
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let label = match beta {
        FactorialFrequency::InvE => "1/e",
        FactorialFrequency::E => "e",
    };
    Ok(CircleHistogram::from_counts(counts, label, "factorial_sums"))
}

/// The exact multiplicity test behind [`preimage_split_histograms`], for
/// tables that are not Hofstadter's.
pub fn max_multiplicity(values: &[u64]) -> u64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    sorted
        .chunk_by(|a, b| a == b)
        .map(|c| c.len() as u64)
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hofstadter::eval_direct;
    use crate::precision::constants;
    use crate::seqcore::generate_factorial_sums;
    use crate::weyl::exp_sum;

    const ALPHA: f64 = 0.682_327_803_828_019_3;

    #[test]
    fn factorial_phases_match_tail_series() {
        // {n!/e} is the fractional part of Σ_{j≥1} (−1)^{n+j} n!/(n+j)!
        let ph = factorial_phases(FactorialFrequency::InvE, 300).unwrap();
        for n in 1..=300usize {
            let mut t = 0.0;
            let mut term = 1.0;
            for j in 1..40 {
                term /= (n + j) as f64;
                t += if (n + j) % 2 == 0 { term } else { -term };
            }
            let expect = t.rem_euclid(1.0);
            let got = (ph[n - 1] >> 64) as f64 * 2f64.powi(-64);
            let diff = (got - expect).abs();
            assert!(diff.min(1.0 - diff) < 1e-12, "n={n}");
        }
        // {n!·e} from the tail Σ_{j≥1} n!/(n+j)!
        let ph = factorial_phases(FactorialFrequency::E, 100).unwrap();
        for n in 3..=100usize {
            let mut t = 0.0;
            let mut term = 1.0;
            for j in 1..40 {
                term /= (n + j) as f64;
                t += term;
            }
            let got = (ph[n - 1] >> 64) as f64 * 2f64.powi(-64);
            assert!((got - t).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn product_statuses() {
        let c = factorial_product_coeffs(FactorialFrequency::InvE, 3, 10_000).unwrap();
        assert_eq!(c[0].modulus(), 1.0);
        assert_eq!(c[0].status, ProductStatus::Converged);
        assert_eq!(c[1].status, ProductStatus::Converged);
        assert!(c[1].tail_bound < 1e-3);
        let e = factorial_product_coeff(1, FactorialFrequency::E, 10_000).unwrap();
        assert_eq!(e.status, ProductStatus::DivergentArgument);
        assert!(e.accumulated_argument.abs() > 4.0 * PI);
        let short = factorial_product_coeff(40, FactorialFrequency::InvE, 50).unwrap();
        assert_eq!(short.status, ProductStatus::Undecided);
    }

    #[test]
    fn truncated_product_is_the_weyl_sum() {
        let s = generate_factorial_sums(1 << 12).unwrap().to_u64().unwrap();
        let mut vals = vec![0u64];
        vals.extend_from_slice(&s[..(1 << 12) - 1]);
        let beta = Frequency::new("1/e", &Real::InvE);
        let direct = exp_sum(&vals, &beta) / vals.len() as f64;
        let prod = truncated_factorial_product(FactorialFrequency::InvE, 1, 12).unwrap();
        assert!((direct - prod).norm() < 1e-12, "{direct} {prod}");
    }

    #[test]
    fn factorial_sum_histogram_matches_values() {
        let n = 3000;
        let vals: Vec<u64> = generate_factorial_sums(n).unwrap().to_u64().unwrap();
        let f = Frequency::new("1/e", &Real::InvE);
        let direct = histogram(&vals, &f, 97, "f").unwrap();
        let fast = factorial_sum_histogram(FactorialFrequency::InvE, n, 97).unwrap();
        assert_eq!(direct.counts, fast.counts);
    }

    #[test]
    fn decay_bound_lines() {
        let lines = coeff_decay_bound_check(&[1.0, 0.5, 0.97, 0.9], 3);
        assert_eq!(lines.len(), 3);
        assert!(lines[0].passed && !lines[1].passed && lines[2].passed);
    }

    #[test]
    fn density_bound() {
        let h = eval_direct(3, 200_000);
        let hyp = verify_density_hypotheses(&h, 0, (1, 1), 2).unwrap();
        assert_eq!(hyp.max_multiplicity, 2);
        let hist = histogram(&h, &Frequency::new("a", &Real::algebraic(constants::alpha(3))), 512, "H").unwrap();
        let c = density_bound_check(&hist, (1, 1), 2);
        assert!(c.passed && c.bound == 8.0);
        assert!(c.max_density > 1.2 && c.max_density < 1.5, "{}", c.max_density);
        let ones = vec![1u64; 100];
        assert!(matches!(
            verify_density_hypotheses(&ones, 1, (1, 1), 2),
            Err(Error::Hypothesis(_))
        ));
        let uniform: Vec<u64> = (0..1024).collect();
        let u = histogram(&uniform, &Frequency::rational(1, 1024), 64, "id").unwrap();
        assert_eq!(density_bound_check(&u, (1, 1), 1).max_density, 1.0);
    }

    #[test]
    fn runs_on_the_circle() {
        let m = [true, false, false, true, true];
        assert_eq!(longest_run(&m), Some((3, 3)));
        assert_eq!(longest_run(&[true; 4]), Some((0, 4)));
        assert_eq!(longest_run(&[false; 4]), None);
    }

    #[test]
    fn uniform_is_undecided() {
        let h = CircleHistogram::from_counts(vec![10; 512], "x", "y");
        assert!(matches!(valley_hill_analysis(&h, ALPHA), Err(Error::Undecided(_))));
    }

    #[test]
    fn valley_and_hill_at_two_million() {
        let h = eval_direct(3, 2_000_000);
        let beta = Frequency::new("a", &Real::algebraic(constants::alpha(3)));
        let hist = histogram(&h, &beta, 512, "H").unwrap();
        let r = valley_hill_analysis(&hist, ALPHA).unwrap();
        assert!(r.ratio > 1.85 && r.ratio < 2.15, "{r:?}");
        assert!(r.offset_error_bins < 3.0, "{r:?}");
        assert!(r.valley.height <= r.hill.height);
        assert!(overlay_svg(&hist, &r, 400, 200).contains("reflected hill"));
    }

    #[test]
    fn preimage_split() {
        let h = eval_direct(3, 1_000_000);
        let beta = Frequency::new("a", &Real::algebraic(constants::alpha(3)));
        let s = preimage_split_histograms(&h, &beta, 512).unwrap();
        assert!(s.identities_hold());
        let r = valley_hill_analysis(&s.total, ALPHA).unwrap();
        let free = eta1_free_run(&s, &r);
        assert!(free.inside_valley && free.covers_center, "{free:?}");
        assert!(free.coverage >= 0.8, "{free:?}");
        let res = eta_shift_residual(&s, &r, 0);
        assert!(res < 0.05, "{res}");
        assert!(eta_shift_residual(&s, &r, 16) < 0.05);
    }

    #[test]
    fn g_steps() {
        let g = eval_direct(2, 1_000_000);
        let s = g_step_levels(&g, 512).unwrap();
        assert!((s.low / s.expected_low - 1.0).abs() < 0.02, "{s:?}");
        assert!((s.high / s.expected_high - 1.0).abs() < 0.02, "{s:?}");
        assert!(s.max_relative_deviation < 0.02, "{s:?}");
    }

    #[test]
    fn mixture_identity() {
        let map = ReplacementMap::hofstadter(3, 300_000).unwrap();
        let h = eval_direct(3, 300_000);
        let beta = Frequency::new("a", &Real::algebraic(constants::alpha(3)));
        let done = mixture_identity_check(&map, &h, &beta, 512).unwrap();
        assert!(done.len() > 20);
        assert!(*done.last().unwrap() > 100_000);
    }

    #[test]
    fn power_fit_recovers_exponent() {
        let m: Vec<f64> = (1..=200).map(|d| 3.0 * (d as f64).powf(-1.5)).collect();
        let f = fit_power_law(&m, 4, 200).unwrap();
        assert!((f.exponent + 1.5).abs() < 1e-12);
        assert!(f.stderr < 1e-10);
    }

    #[test]
    fn folding() {
        let h = CircleHistogram::from_counts((0..12).collect(), "x", "y");
        let f = fold_segments(&h, 3).unwrap();
        assert_eq!(f[1], vec![12, 15, 18, 21]);
        assert!(fold_segments(&h, 5).is_err());
        assert_eq!(max_multiplicity(&[1, 2, 2, 3, 2]), 3);
    }
}
