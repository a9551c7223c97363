use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use modsig::algebra::{is_pisot, isolate_roots, Location};
use modsig::limits::{
    density_bound_check, factorial_sum_histogram, overlay_svg, valley_hill_analysis,
    verify_density_hypotheses,
};
use modsig::precision::{classify_decay, DecayClass, DecayConfig};
use modsig::weyl::{
    fft_scan, fourier_coeffs, geometric_checkpoints, histogram as circle_hist, weyl_direct, weyl_recurrence,
    CircleHistogram, Frequency, Peak,
};

use crate::parse::{parse_beta, parse_count, parse_poly, Beta};
use crate::seq::Selector;
use crate::SeqArgs;

/// A run that completed but whose certification or hypothesis check failed.
#[derive(Debug)]
pub struct Failed(pub String);

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failed {}

pub fn selector(args: &SeqArgs) -> Result<(Selector, usize)> {
    Ok((Selector::new(&args.seq, args.d)?, parse_count(&args.n)?))
}

/// File-name-safe form of a label.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

pub fn out_file(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(name))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn generate(args: &SeqArgs, dir: &Path, out: Option<PathBuf>) -> Result<()> {
    let (sel, n) = selector(args)?;
    let path = match out {
        Some(p) => p,
        None => out_file(dir, &format!("{}-{n}.csv", sel.key()))?,
    };
    let mut w = BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    if sel.is_exponential() {
        sel.table(n)?.write_csv(&mut w)?;
        w.flush()?;
        println!("{} terms of {} -> {}", n, sel.key(), path.display());
    } else {
        let (values, cache) = sel.materialize(n)?;
        writeln!(w, "n,value")?;
        let first = if sel.name.starts_with("map:") { 0 } else { 1 };
        for (i, v) in values.iter().enumerate() {
            writeln!(w, "{},{v}", i + first)?;
        }
        w.flush()?;
        println!(
            "{} terms of {} -> {} (cache {})",
            n,
            sel.key(),
            path.display(),
            cache.display()
        );
    }
    Ok(())
}

#[derive(Serialize)]
pub struct ScanReport {
    pub sequence: String,
    pub terms: usize,
    pub grid_size: usize,
    pub folded: bool,
    pub peaks: Vec<Peak>,
}

pub fn scan_files(sel: &Selector, n: usize, dir: &Path, stem: &str, grid: Option<usize>, top: usize, guard: f64) -> Result<ScanReport> {
    let values = sel.values(n)?;
    let spec = fft_scan(&values, n, grid, &sel.key())?;
    let report = ScanReport {
        sequence: sel.key(),
        terms: n,
        grid_size: spec.grid_size,
        folded: spec.folded,
        peaks: spec.peaks(top, guard),
    };
    spec.write_csv(BufWriter::new(fs::File::create(out_file(dir, &format!("{stem}.csv"))?)?))?;
    write_text(&out_file(dir, &format!("{stem}.svg"))?, &spec.to_svg(900, 360))?;
    write_json(&out_file(dir, &format!("{stem}.json"))?, &report)?;
    Ok(report)
}

pub fn scan(args: &SeqArgs, dir: &Path, grid: Option<usize>, top: usize, guard: f64) -> Result<()> {
    let (sel, n) = selector(args)?;
    let stem = format!("scan-{}-{n}", sel.key());
    let r = scan_files(&sel, n, dir, &stem, grid, top, guard)?;
    println!("grid {} ({} terms{})", r.grid_size, r.terms, if r.folded { ", folded" } else { "" });
    for p in &r.peaks {
        println!("x = {:.6} (and {:.6})  |f(x)|/T = {:.6}", p.frequency, p.mirror, p.magnitude);
    }
    Ok(())
}

pub fn circle_histogram(sel: &Selector, n: usize, beta: &Beta, bins: usize) -> Result<CircleHistogram> {
    if sel.name == "factorial_sums" {
        if let Some(f) = beta.factorial {
            return Ok(factorial_sum_histogram(f, n, bins)?);
        }
    }
    let values = sel.values(n)?;
    Ok(circle_hist(&values, &Frequency::new(&beta.label, &beta.real), bins, &sel.key())?)
}

#[derive(Serialize)]
pub struct HistogramSummary {
    pub sequence: String,
    pub frequency: String,
    pub terms: usize,
    pub bins: usize,
    pub max_deviation: f64,
    pub min_density: f64,
    pub max_density: f64,
}

pub fn summarize(h: &CircleHistogram, terms: usize) -> HistogramSummary {
    let d = h.densities();
    HistogramSummary {
        sequence: h.sequence.clone(),
        frequency: h.frequency.clone(),
        terms,
        bins: h.bins,
        max_deviation: h.max_deviation(),
        min_density: d.iter().copied().fold(f64::INFINITY, f64::min),
        max_density: d.iter().copied().fold(0.0, f64::max),
    }
}

pub fn write_histogram(h: &CircleHistogram, dir: &Path, stem: &str) -> Result<()> {
    h.write_csv(BufWriter::new(fs::File::create(out_file(dir, &format!("{stem}.csv"))?)?))?;
    write_text(&out_file(dir, &format!("{stem}.svg"))?, &h.to_svg(900, 360))
}

pub fn histogram_cmd_stem(sel: &Selector, beta: &Beta, n: usize, bins: usize) -> String {
    format!("hist-{}-{}-{n}-{bins}", sel.key(), slug(&beta.label))
}

pub fn histogram(
    args: &SeqArgs,
    dir: &Path,
    beta: &str,
    bins: usize,
    density_bound: Option<&str>,
    valley_hill: bool,
) -> Result<()> {
    let (sel, n) = selector(args)?;
    let beta = parse_beta(beta)?;
    let h = circle_histogram(&sel, n, &beta, bins)?;
    let stem = histogram_cmd_stem(&sel, &beta, n, bins);
    write_histogram(&h, dir, &stem)?;
    let summary = summarize(&h, n);
    let mut report = serde_json::to_value(&summary)?;
    println!(
        "{} at {}: {} bins, max deviation {:.4}, density range [{:.4}, {:.4}]",
        summary.sequence, summary.frequency, summary.bins, summary.max_deviation, summary.min_density, summary.max_density
    );
    let mut failure = None;
    if let Some(spec) = density_bound {
        let (b, c) = spec
            .split_once(',')
            .context("--density-bound takes B,C")?;
        let b: u64 = b.trim().parse().context("B")?;
        let c: u64 = c.trim().parse().context("C")?;
        let values = sel.values(n)?;
        let first = if sel.name.starts_with("map:") { 0 } else { 1 };
        let hyp = verify_density_hypotheses(&values, first, (b, 1), c)?;
        let check = density_bound_check(&h, (b, 1), c);
        println!(
            "density bound 4BC = {}: max density {:.4} ({})",
            check.bound,
            check.max_density,
            if check.passed { "holds" } else { "violated" }
        );
        if !check.passed {
            failure = Some(format!("density {} exceeds {}", check.max_density, check.bound));
        }
        report["density_hypotheses"] = json!(hyp);
        report["density_bound"] = json!(check);
    }
    if valley_hill {
        let alpha = beta.real.to_f64();
        let vh = valley_hill_analysis(&h, alpha)?;
        println!(
            "valley/hill: ratio {:.4}, offset {:.5} (expected {:.5}, {:.2} bins), overlay residual {:.4}",
            vh.ratio, vh.offset, vh.expected_offset, vh.offset_error_bins, vh.fit_residual
        );
        write_text(&out_file(dir, &format!("{stem}-overlay.svg"))?, &overlay_svg(&h, &vh, 900, 360))?;
        report["valley_hill"] = serde_json::to_value(&vh)?;
    }
    write_json(&out_file(dir, &format!("{stem}.json"))?, &report)?;
    match failure {
        Some(msg) => Err(Failed(msg).into()),
        None => Ok(()),
    }
}

pub fn weyl(args: &SeqArgs, dir: &Path, beta: &str, method: &str, coefficients: usize) -> Result<()> {
    let (sel, n) = selector(args)?;
    let beta = parse_beta(beta)?;
    let freq = Frequency::new(&beta.label, &beta.real);
    let stem = format!("weyl-{}-{}-{n}-{method}", sel.key(), slug(&beta.label));
    // Weyl sums follow the replacement-map convention: A(0..N), with H(0) = 0.
    let values = || -> Result<Vec<u64>> {
        if sel.name == "hofstadter" {
            let mut v = vec![0];
            if n > 1 {
                v.extend(sel.values(n - 1)?);
            }
            Ok(v)
        } else {
            sel.values(n)
        }
    };
    let mut report = match method {
        "direct" => {
            let values = values()?;
            let series = weyl_direct(&values, &freq, &geometric_checkpoints(n))?;
            if let Some(last) = series.last() {
                println!("|x_{}| = {:.8}", last.n, last.modulus);
            }
            serde_json::to_value(&series)?
        }
        "recurrence" => {
            let map = sel.map(n as u64)?;
            let points = weyl_recurrence(&map, &freq, n as u64)?;
            let rows: Vec<_> = points
                .iter()
                .map(|(k, z)| json!({"n": k, "re": z.re, "im": z.im, "modulus": z.norm()}))
                .collect();
            if let Some((k, z)) = points.last() {
                println!("|x_{k}| = {:.8} ({} checkpoints)", z.norm(), points.len());
            }
            json!({"frequency": beta.label, "sequence": sel.key(), "checkpoints": rows})
        }
        _ => bail!("unknown method `{method}` (direct or recurrence)"),
    };
    if coefficients > 0 {
        let values = values()?;
        let mu = fourier_coeffs(&values, &freq, coefficients);
        report["coefficients"] = json!(mu
            .iter()
            .enumerate()
            .map(|(i, z)| json!({"d": i + 1, "re": z.re, "im": z.im, "modulus": z.norm()}))
            .collect::<Vec<_>>());
    }
    write_json(&out_file(dir, &format!("{stem}.json"))?, &report)
}

pub fn decay(args: &SeqArgs, dir: &Path, beta: &str, from: usize, to: usize) -> Result<()> {
    let sel = Selector::new(&args.seq, args.d)?;
    let count = parse_count(&args.n)?.max(to + 1).min(100_000);
    let beta = parse_beta(beta)?;
    let table = sel.table(count)?;
    let r = classify_decay(&beta.real, &table, (from, to), &DecayConfig::default())?;
    let stem = format!("decay-{}-{}", sel.key(), slug(&beta.label));
    fs::write(out_file(dir, &format!("{stem}.json"))?, r.to_json()? + "\n")?;
    let class = match r.classification {
        DecayClass::DecaysGeometric => "decays_geometric",
        DecayClass::NonDecaying => "non_decaying",
        DecayClass::Indeterminate => "indeterminate",
    };
    println!(
        "{} on {} over k in [{}, {}]: {class}{}",
        beta.label,
        sel.key(),
        r.range.0,
        r.range.1,
        r.fitted_rate.map(|s| format!(" (rate {s:.5})")).unwrap_or_default()
    );
    Ok(())
}

pub fn roots(dir: &Path, poly: &str, precision: u32) -> Result<()> {
    let p = parse_poly(poly)?;
    let set = isolate_roots(&p, precision)?;
    let pisot = is_pisot(&p).ok();
    let mut report = serde_json::to_value(&set)?;
    report["is_pisot"] = json!(pisot);
    write_json(&out_file(dir, &format!("roots-{}.json", slug(poly)))?, &report)?;
    println!(
        "{}: {} outside, {} on the unit circle, {} inside",
        set.polynomial,
        set.count_outside_unit,
        set.count_on_unit,
        set.roots
            .iter()
            .filter(|r| r.location == Location::Inside)
            .map(|r| r.multiplicity)
            .sum::<usize>()
    );
    let ambiguous = set.roots.iter().filter(|r| r.location == Location::Ambiguous).count();
    if ambiguous > 0 {
        return Err(Failed(format!("{ambiguous} root enclosures meet the unit circle at {precision} bits")).into());
    }
    Ok(())
}
