//! `report`: every figure config in a directory, then the numbered checks.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::{json, Value};

use modsig::limits::{overlay_svg, valley_hill_analysis};
use modsig::reproduce;

use crate::commands::{circle_histogram, out_file, scan_files, summarize, write_histogram, write_json};
use crate::parse::{parse_beta, parse_count};
use crate::seq::Selector;

fn default_d() -> usize {
    3
}

fn default_bins() -> usize {
    512
}

fn default_top() -> usize {
    5
}

/// One figure: a histogram, a histogram with the valley/hill overlay, or a scan.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    pub title: String,
    pub kind: String,
    pub seq: String,
    #[serde(default = "default_d")]
    pub d: usize,
    pub n: String,
    pub beta: Option<String>,
    #[serde(default = "default_bins")]
    pub bins: usize,
    pub grid: Option<usize>,
    #[serde(default = "default_top")]
    pub top: usize,
}

pub fn load(path: &Path) -> Result<FigureConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn run_figure(name: &str, cfg: &FigureConfig, dir: &Path) -> Result<Value> {
    let sel = Selector::new(&cfg.seq, cfg.d)?;
    let n = parse_count(&cfg.n)?;
    let mut files = vec![];
    let summary = match cfg.kind.as_str() {
        "histogram" | "overlay" => {
            let beta = parse_beta(cfg.beta.as_deref().context("histogram figures need `beta`")?)?;
            let h = circle_histogram(&sel, n, &beta, cfg.bins)?;
            write_histogram(&h, dir, name)?;
            files.push(format!("{name}.csv"));
            files.push(format!("{name}.svg"));
            let mut s = serde_json::to_value(summarize(&h, n))?;
            if cfg.kind == "overlay" {
                let vh = valley_hill_analysis(&h, beta.real.to_f64())?;
                fs::write(out_file(dir, &format!("{name}-overlay.svg"))?, overlay_svg(&h, &vh, 900, 360))?;
                files.push(format!("{name}-overlay.svg"));
                s["valley_hill"] = serde_json::to_value(&vh)?;
            }
            s
        }
        "scan" => {
            let r = scan_files(&sel, n, dir, name, cfg.grid, cfg.top, 32.0)?;
            files.extend(["csv", "svg", "json"].map(|e| format!("{name}.{e}")));
            serde_json::to_value(&r)?
        }
        k => bail!("unknown figure kind `{k}` (histogram, overlay or scan)"),
    };
    Ok(json!({
        "config": name,
        "title": cfg.title,
        "kind": cfg.kind,
        "files": files,
        "summary": summary,
    }))
}

fn selected_checks(spec: Option<&str>) -> Result<Vec<u8>> {
    match spec {
        None => Ok((1..=16).collect()),
        Some("none") => Ok(vec![]),
        Some(s) => s
            .split(',')
            .map(|t| {
                let id: u8 = t.trim().parse().with_context(|| format!("check id `{t}`"))?;
                if !(1..=16).contains(&id) {
                    bail!("check id {id} outside 1..=16");
                }
                Ok(id)
            })
            .collect(),
    }
}

pub fn run(configs: &Path, dir: &Path, checks: Option<&str>) -> Result<()> {
    let ids = selected_checks(checks)?;
    let mut paths: Vec<_> = fs::read_dir(configs)
        .with_context(|| format!("reading {}", configs.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    let mut figures = vec![];
    for p in &paths {
        let name = p.file_stem().and_then(|s| s.to_str()).context("config file name")?;
        let cfg = load(p)?;
        println!("figure {name}: {}", cfg.title);
        figures.push(run_figure(name, &cfg, dir).with_context(|| format!("figure {name}"))?);
    }
    let mut results = vec![];
    let mut failed = vec![];
    for id in ids {
        let c = reproduce::run(id)?;
        println!("{}", c.line());
        if !c.passed {
            failed.push(id);
        }
        results.push(serde_json::to_value(&c)?);
    }
    let report = json!({
        "figures": figures,
        "checks": results,
        "failed_checks": failed,
    });
    let path = out_file(dir, "report.json")?;
    write_json(&path, &report)?;
    println!("report -> {}", path.display());
    Ok(())
}
