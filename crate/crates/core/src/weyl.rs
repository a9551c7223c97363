//! Weyl sums, FFT scans and circle histograms.
//!
//! Every phase `{β·v}` is a 128-bit word `⌊{β}·2^128⌋·v mod 2^128`, so the
//! reduction mod 1 is exact integer arithmetic and the only error is the
//! enclosure of `β` itself, scaled by `v` (see [`Frequency::phase_error`]).
//! Sums run over fixed chunks in parallel and are combined in order with
//! compensated summation, so results do not depend on the thread count.

use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::numeration::{verify_signature, ReplacementMap, SignatureCaps};
use crate::precision::Real;
use crate::svg::{bar_chart, ChartStyle};
use crate::{Error, Result};

const CHUNK: usize = 1 << 16;

/// A frequency reduced mod 1 to a 128-bit phase word.
#[derive(Clone, Debug)]
pub struct Frequency {
    label: String,
    word: u128,
    /// Half-width of the enclosure of `{β}` in units of `2^{−128}`.
    err: u128,
}

impl Frequency {
    pub fn new(label: impl Into<String>, beta: &Real) -> Self {
        let x = beta.approx(160);
        let word = x.fraction_u128();
        let e = x.error_f64();
        // one more unit for the truncation of the word
        let err = if e == 0.0 {
            1
        } else {
            let scaled = e * 2f64.powi(128) * (1.0 + 1e-12);
            if scaled >= u128::MAX as f64 {
                u128::MAX
            } else {
                scaled.ceil() as u128 + 1
            }
        };
        Frequency {
            label: label.into(),
            word,
            err,
        }
    }

    pub fn from_real(beta: &Real) -> Self {
        Self::new(beta.to_string(), beta)
    }

    pub fn zero() -> Self {
        Frequency {
            label: "0".into(),
            word: 0,
            err: 0,
        }
    }

    /// `p/q` exactly (up to the last bit of the word).
    pub fn rational(p: i64, q: i64) -> Self {
        Self::new(format!("{p}/{q}"), &Real::ratio(p, q))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `{β}` in `[0, 1)`.
    pub fn turns(&self) -> f64 {
        (self.word >> 64) as u64 as f64 * 2f64.powi(-64)
    }

    pub fn word(&self) -> u128 {
        self.word
    }

    /// `d·β`.
    pub fn multiple(&self, d: u64) -> Frequency {
        Frequency {
            label: format!("{d}*({})", self.label),
            word: self.word.wrapping_mul(d as u128),
            err: self.err.saturating_mul(d as u128),
        }
    }

    #[inline]
    pub fn phase(&self, v: u64) -> u128 {
        self.word.wrapping_mul(v as u128)
    }

    pub fn phase_big(&self, v: &BigInt) -> u128 {
        let m = v.mod_floor(&(BigInt::one() << 128));
        let digits = m.to_u64_digits().1;
        let lo = digits.first().copied().unwrap_or(0) as u128;
        let hi = digits.get(1).copied().unwrap_or(0) as u128;
        self.word.wrapping_mul(lo | (hi << 64))
    }

    /// Bound on `|phase − {β·v}|` in turns for all `v ≤ max_v`.
    pub fn phase_error(&self, max_v: u64) -> f64 {
        self.err as f64 * max_v as f64 * 2f64.powi(-128)
    }
}

/// `e(t) = exp(2πit)` for the phase word `t·2^128`.
#[inline]
pub fn unit(phase: u128) -> Complex64 {
    // signed top word puts t in [−1/2, 1/2)
    let t = ((phase >> 64) as u64 as i64) as f64 * 2f64.powi(-64);
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// Neumaier summation of complex terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

#[inline]
fn neumaier(acc: &mut (f64, f64), x: f64) {
    let t = acc.0 + x;
    if acc.0.abs() >= x.abs() {
        acc.1 += (acc.0 - t) + x;
    } else {
        acc.1 += (x - t) + acc.0;
    }
    acc.0 = t;
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.value());
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

fn chunk_sum(values: &[u64], beta: &Frequency) -> CompensatedSum {
    let mut s = CompensatedSum::default();
    for &v in values {
        s.add(unit(beta.phase(v)));
    }
    s
}

/// `Σ e(β·v)` over `values` (not normalized).
pub fn exp_sum(values: &[u64], beta: &Frequency) -> Complex64 {
    let parts: Vec<CompensatedSum> = values.par_chunks(CHUNK).map(|c| chunk_sum(c, beta)).collect();
    let mut total = CompensatedSum::default();
    for p in &parts {
        total.merge(p);
    }
    total.value()
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylCheckpoint {
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylSeries {
    pub frequency: String,
    pub checkpoints: Vec<WeylCheckpoint>,
    pub final_n: usize,
}

impl WeylSeries {
    pub fn last(&self) -> Option<&WeylCheckpoint> {
        self.checkpoints.last()
    }

    pub fn at(&self, n: usize) -> Option<Complex64> {
        self.checkpoints
            .iter()
            .find(|c| c.n == n)
            .map(|c| Complex64::new(c.re, c.im))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `1, 2, 4, …` below `n`, then `n`.
pub fn geometric_checkpoints(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = std::iter::successors(Some(1usize), |&x| x.checked_mul(2))
        .take_while(|&x| x < n)
        .collect();
    if n > 0 {
        v.push(n);
    }
    v
}

/// `x_N = (1/N) Σ_{i<N} e(β·values[i])` at each checkpoint `N`.
pub fn weyl_direct(values: &[u64], beta: &Frequency, checkpoints: &[usize]) -> Result<WeylSeries> {
    let mut cps: Vec<usize> = checkpoints.iter().copied().filter(|&n| n > 0).collect();
    cps.sort_unstable();
    cps.dedup();
    if let Some(&last) = cps.last() {
        if last > values.len() {
            return Err(Error::invalid(format!(
                "checkpoint {last} beyond the {} available values",
                values.len()
            )));
        }
    }
    // chunk boundaries: multiples of CHUNK plus every checkpoint
    let end = cps.last().copied().unwrap_or(0);
    let mut bounds: Vec<usize> = (0..end).step_by(CHUNK).chain(cps.iter().copied()).collect();
    bounds.sort_unstable();
    bounds.dedup();
    let segments: Vec<(usize, usize)> = bounds
        .iter()
        .scan(0usize, |lo, &hi| {
            let seg = (*lo, hi);
            *lo = hi;
            Some(seg)
        })
        .filter(|(lo, hi)| hi > lo)
        .collect();
    let parts: Vec<CompensatedSum> = segments
        .par_iter()
        .map(|&(lo, hi)| chunk_sum(&values[lo..hi], beta))
        .collect();
    let mut total = CompensatedSum::default();
    let mut out = Vec::with_capacity(cps.len());
    let mut next = cps.iter().peekable();
    for ((_, hi), part) in segments.iter().zip(&parts) {
        total.merge(part);
        if next.peek() == Some(&hi) {
            next.next();
            let x = total.value() / *hi as f64;
            out.push(WeylCheckpoint {
                n: *hi,
                re: x.re,
                im: x.im,
                modulus: x.norm(),
            });
        }
    }
    Ok(WeylSeries {
        frequency: beta.label().to_string(),
        checkpoints: out,
        final_n: end,
    })
}

/// `x_{a_k}` for every `a_k ≤ upto` from the multiset recurrence
/// `S(a_k) = S(a_{k−1}) + e(β b_{k−1}) S(a_k − a_{k−1})`, with `S(m)` for
/// general `m` unrolled along the greedy representation of `m`. No term of
/// the replacement sequence is enumerated.
pub fn weyl_recurrence(map: &ReplacementMap, beta: &Frequency, upto: u64) -> Result<Vec<(u64, Complex64)>> {
    let a = map.source().u64_prefix();
    let k_max = a.partition_point(|&x| x <= upto);
    if k_max == 0 {
        return Ok(Vec::new());
    }
    if a.len() >= 3 {
        let hi = (k_max + 1).min(a.len() - 1).max(2);
        verify_signature(map.source(), (2, hi), SignatureCaps::default())?;
    }
    let phases: Vec<Complex64> = map.target().terms()[..k_max]
        .iter()
        .map(|b| unit(beta.phase_big(b)))
        .collect();
    // memo[j] = S(a_j)
    let mut memo: Vec<Complex64> = Vec::with_capacity(k_max);
    memo.push(Complex64::new(1.0, 0.0)); // S(1) = e(β·A(0)) = 1
    let s_of = |m: u64, memo: &[Complex64]| -> Complex64 {
        // S(m) = S(a_j) + e(β b_j) S(m − a_j), a_j the largest term ≤ m
        let mut acc = Complex64::new(0.0, 0.0);
        let mut factor = Complex64::new(1.0, 0.0);
        let mut rest = m;
        while rest > 0 {
            let j = a[..memo.len()].partition_point(|&x| x <= rest) - 1;
            acc += factor * memo[j];
            factor *= phases[j];
            rest -= a[j];
        }
        acc
    };
    for k in 1..k_max {
        let tail = s_of(a[k] - a[k - 1], &memo);
        let s = memo[k - 1] + phases[k - 1] * tail;
        memo.push(s);
    }
    Ok(a[..k_max]
        .iter()
        .zip(&memo)
        .map(|(&ak, &s)| (ak, s / ak as f64))
        .collect())
}

/// `μ̂_N(d) = (1/N) Σ e(d·β·v)` for `d = 1..=d_max` in a single pass.
pub fn fourier_coeffs(values: &[u64], beta: &Frequency, d_max: usize) -> Vec<Complex64> {
    if values.is_empty() || d_max == 0 {
        return vec![Complex64::new(0.0, 0.0); d_max];
    }
    let parts: Vec<Vec<CompensatedSum>> = values
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![CompensatedSum::default(); d_max];
            for &v in chunk {
                let ph = beta.phase(v);
                let z = unit(ph);
                let mut w = z;
                for (d, a) in acc.iter_mut().enumerate() {
                    // exact phase every 16 steps keeps the powers on the circle
                    if d % 16 == 15 {
                        w = unit(ph.wrapping_mul(d as u128 + 1));
                    }
                    a.add(w);
                    w *= z;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![CompensatedSum::default(); d_max];
    for p in &parts {
        for (t, s) in total.iter_mut().zip(p) {
            t.merge(s);
        }
    }
    let n = values.len() as f64;
    total.iter().map(|s| s.value() / n).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CircleHistogram {
    pub bins: usize,
    pub counts: Vec<u64>,
    pub total: u64,
    pub frequency: String,
    pub sequence: String,
}

impl CircleHistogram {
    /// Builds a histogram from raw counts.
    pub fn from_counts(counts: Vec<u64>, frequency: impl Into<String>, sequence: impl Into<String>) -> Self {
        CircleHistogram {
            bins: counts.len(),
            total: counts.iter().sum(),
            counts,
            frequency: frequency.into(),
            sequence: sequence.into(),
        }
    }

    /// `count·B/N`, 1 for the uniform distribution.
    pub fn densities(&self) -> Vec<f64> {
        let scale = self.bins as f64 / self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 * scale).collect()
    }

    /// `max_b |density_b − 1|`.
    pub fn max_deviation(&self) -> f64 {
        self.densities()
            .iter()
            .map(|d| (d - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bin_index,value")?;
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(w, "{i},{c}")?;
        }
        Ok(())
    }

    pub fn to_svg(&self, width: u32, height: u32) -> String {
        let title = format!("{{{}·{}}}, N = {}, B = {}", self.frequency, self.sequence, self.total, self.bins);
        bar_chart(&self.densities(), &ChartStyle::new(title, width, height))
    }
}

/// Bin `⌊{β·v}·B⌋` for a phase word; exact for every `B`.
#[inline]
pub fn bin_of(phase: u128, bins: usize) -> usize {
    (((phase >> 64) as u64 as u128 * bins as u128) >> 64) as usize
}

/// Histogram of `{β·v}` over `values` into `bins` equal arcs.
pub fn histogram(values: &[u64], beta: &Frequency, bins: usize, sequence: &str) -> Result<CircleHistogram> {
    if bins == 0 {
        return Err(Error::invalid("bin count must be positive"));
    }
    let counts = values
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut c = vec![0u64; bins];
            for &v in chunk {
                c[bin_of(beta.phase(v), bins)] += 1;
            }
            c
        })
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(CircleHistogram::from_counts(counts, beta.label(), sequence))
}

/// Frequencies of `v mod m`.
pub fn residue_frequencies(values: &[u64], m: u64) -> Vec<f64> {
    assert!(m > 0, "modulus must be positive");
    let counts = values
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut c = vec![0u64; m as usize];
            for &v in chunk {
                c[(v % m) as usize] += 1;
            }
            c
        })
        .reduce(
            || vec![0u64; m as usize],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let n = values.len().max(1) as f64;
    counts.iter().map(|&c| c as f64 / n).collect()
}

/// Largest grid the scan allocates; values are folded mod the grid size
/// beyond it.
pub const MAX_GRID: usize = 1 << 26;

#[derive(Clone, Debug, Serialize)]
pub struct FourierSpectrum {
    pub grid_size: usize,
    /// `|f(j/M)|/T`.
    pub magnitudes: Vec<f64>,
    pub terms: usize,
    pub sequence: String,
    /// Whether values were reduced mod `M` (exact at the grid points).
    pub folded: bool,
    /// Largest value scanned.
    pub max_value: u64,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Peak {
    pub index: usize,
    /// In `[1/2, 1)`.
    pub frequency: f64,
    /// `1 − frequency`, where the magnitude is the same for integer data.
    pub mirror: f64,
    pub magnitude: f64,
}

impl FourierSpectrum {
    /// Largest local maxima away from the zero frequency. Grid points whose
    /// circle distance to 0 is below `guard/max_value` are skipped: they sit
    /// in the side lobes of the DC peak, whose heights fall like
    /// `1/(π·lobe)`. Since `|f(x)| = |f(1 − x)|`, each mirror pair is
    /// reported once, from the upper half of the grid.
    pub fn peaks(&self, k: usize, guard: f64) -> Vec<Peak> {
        let m = self.grid_size;
        let g = &self.magnitudes;
        let cutoff = guard / (self.max_value.max(1) as f64);
        let mut out: Vec<Peak> = (m.div_ceil(2).max(1)..m)
            .filter(|&j| {
                let x = j as f64 / m as f64;
                x.min(1.0 - x) >= cutoff
            })
            .filter(|&j| g[j] >= g[j - 1] && g[j] >= g[(j + 1) % m] && g[j] > 0.0)
            .map(|j| Peak {
                index: j,
                frequency: j as f64 / m as f64,
                mirror: (m - j) as f64 / m as f64,
                magnitude: g[j],
            })
            .collect();
        out.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude).then(a.index.cmp(&b.index)));
        out.truncate(k);
        out
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "grid_index,value")?;
        for (i, v) in self.magnitudes.iter().enumerate() {
            writeln!(w, "{i},{v:.12e}")?;
        }
        Ok(())
    }

    /// Bars for at most `width` bins (maximum over each group of grid points).
    pub fn to_svg(&self, width: u32, height: u32) -> String {
        let groups = (width as usize).clamp(1, self.grid_size);
        let per = self.grid_size.div_ceil(groups);
        let v: Vec<f64> = self
            .magnitudes
            .chunks(per)
            .map(|c| c.iter().copied().fold(0.0, f64::max))
            .collect();
        let title = format!("|f(x)|/T for {}, T = {}, M = {}", self.sequence, self.terms, self.grid_size);
        bar_chart(&v, &ChartStyle::new(title, width, height))
    }
}

/// `|f(j/M)|/T` with `f(x) = Σ_{n≤T} e(x·aₙ)` for `j = 0..M−1`, through the
/// multiplicity vector `c[v]`. `grid` defaults to the next power of two above
/// the largest value, capped at [`MAX_GRID`].
pub fn fft_scan(values: &[u64], terms: usize, grid: Option<usize>, sequence: &str) -> Result<FourierSpectrum> {
    use rustfft::FftPlanner;
    if terms == 0 || terms > values.len() {
        return Err(Error::invalid(format!(
            "term count {terms} outside 1..={}",
            values.len()
        )));
    }
    let vals = &values[..terms];
    let max_value = vals.iter().copied().max().unwrap_or(0);
    let m = match grid {
        Some(m) => {
            if !m.is_power_of_two() {
                return Err(Error::invalid(format!("grid size {m} is not a power of two")));
            }
            if (m as u64) <= max_value {
                return Err(Error::invalid(format!(
                    "grid size {m} too small for values up to {max_value}"
                )));
            }
            m
        }
        None => ((max_value + 1).next_power_of_two() as usize).min(MAX_GRID),
    };
    let folded = max_value >= m as u64;
    let mut buf = vec![rustfft::num_complex::Complex::<f64>::new(0.0, 0.0); m];
    for &v in vals {
        buf[(v % m as u64) as usize].re += 1.0;
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let t = terms as f64;
    let magnitudes = buf.iter().map(|z| z.norm() / t).collect();
    Ok(FourierSpectrum {
        grid_size: m,
        magnitudes,
        terms,
        sequence: sequence.to_string(),
        folded,
        max_value,
    })
}

/// `|x_N|` at `x = j/M` by direct summation, the oracle for [`fft_scan`].
pub fn direct_at_grid(values: &[u64], j: usize, m: usize) -> f64 {
    let beta = Frequency::new("grid", &Real::ratio(j as i64, m as i64));
    exp_sum(values, &beta).norm() / values.len() as f64
}

impl Frequency {
    /// `1/2^k`-spaced frequencies are exact; used by tests and scans.
    pub fn is_exact(&self) -> bool {
        self.err <= 1
    }
}

/// `BigInt` values (e.g. base-3 images of large binary numbers) as a
/// `u64` stream when they fit.
pub fn to_u64_stream(values: &[BigInt]) -> Result<Vec<u64>> {
    values
        .iter()
        .map(|v| {
            v.to_u64()
                .ok_or_else(|| Error::invalid(format!("value {v} exceeds 64 bits")))
        })
        .collect()
}

/// Σ over `BigInt` values, for streams that do not fit machine words.
pub fn exp_sum_big(values: &[BigInt], beta: &Frequency) -> Complex64 {
    let mut s = CompensatedSum::default();
    for v in values {
        if v.is_zero() {
            s.add(Complex64::new(1.0, 0.0));
        } else {
            s.add(unit(beta.phase_big(v)));
        }
    }
    s.value()
}
