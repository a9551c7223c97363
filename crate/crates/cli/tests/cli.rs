use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn modsig(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modsig"))
        .current_dir(dir)
        .env("MODSIG_CACHE_DIR", dir.join("cache"))
        .args(args)
        .output()
        .expect("run modsig")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = modsig(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_writes_csv_and_cache() {
    let t = tempfile::tempdir().unwrap();
    ok(t.path(), &["generate", "--seq", "narayana", "--count", "400"]);
    let csv = fs::read_to_string(t.path().join("out/narayana-400.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 401);
    assert_eq!(&lines[1..12], ["1,1", "2,2", "3,3", "4,4", "5,6", "6,9", "7,13", "8,19", "9,28", "10,41", "11,60"]);

    ok(t.path(), &["generate", "--seq", "hofstadter", "--d", "3", "--n", "1e5"]);
    assert!(t.path().join("cache/hofstadter_d3-100000.u64").exists());
    let csv = fs::read_to_string(t.path().join("out/hofstadter_d3-100000.csv")).unwrap();
    assert!(csv.starts_with("n,value\n1,1\n2,1\n3,2\n"));
}

#[test]
fn scans() {
    let t = tempfile::tempdir().unwrap();
    ok(t.path(), &["scan", "--seq", "hofstadter", "--n", "1e5"]);
    let r = json(&t.path().join("out/scan-hofstadter_d3-100000.json"));
    let top = &r["peaks"][0];
    let step = 1.0 / r["grid_size"].as_f64().unwrap();
    assert!((top["frequency"].as_f64().unwrap() - 0.682_327_803_828_019_3).abs() <= step);

    ok(t.path(), &["scan", "--seq", "identity", "--n", "1e5"]);
    let r = json(&t.path().join("out/scan-identity-100000.json"));
    for p in r["peaks"].as_array().unwrap() {
        assert!(p["magnitude"].as_f64().unwrap() < 0.01, "{p}");
    }

    ok(t.path(), &["scan", "--seq", "ulam", "--n", "1e4", "--top", "1"]);
    let r = json(&t.path().join("out/scan-ulam-10000.json"));
    let x = 2.571_447_499_5 / std::f64::consts::TAU;
    assert!((r["peaks"][0]["mirror"].as_f64().unwrap() - x).abs() < 1e-4);
}

#[test]
fn histogram_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    let args = ["histogram", "--seq", "hofstadter", "--n", "1e7", "--beta", "alg:alpha3", "--bins", "512"];
    ok(t.path(), &args);
    let stem = t.path().join("out/hist-hofstadter_d3-alg_alpha3-10000000-512");
    let csv = fs::read(stem.with_extension("csv")).unwrap();
    let js = fs::read(stem.with_extension("json")).unwrap();
    let svg = fs::read(stem.with_extension("svg")).unwrap();
    let summary: Value = serde_json::from_slice(&js).unwrap();
    let ratio = summary["max_density"].as_f64().unwrap() / summary["min_density"].as_f64().unwrap();
    assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    ok(t.path(), &args);
    assert_eq!(fs::read(stem.with_extension("csv")).unwrap(), csv);
    assert_eq!(fs::read(stem.with_extension("json")).unwrap(), js);
    assert_eq!(fs::read(stem.with_extension("svg")).unwrap(), svg);
}

#[test]
fn decay_and_roots() {
    let t = tempfile::tempdir().unwrap();
    let out = ok(t.path(), &["decay", "--seq", "narayana", "--beta", "dec:1.41421356237:40"]);
    assert!(out.contains("non_decaying"), "{out}");
    let out = ok(t.path(), &["decay", "--seq", "sqrt6", "--beta", "one_plus_sqrt6"]);
    assert!(out.contains("decays_geometric"), "{out}");

    ok(t.path(), &["roots", "--poly", "trinomial:60"]);
    let r = json(&t.path().join("out/roots-trinomial_60.json"));
    let outside = r["count_outside_unit"].as_i64().unwrap();
    assert!((outside - 20).abs() <= 3, "{outside}");
    ok(t.path(), &["roots", "--poly", "trinomial:3"]);
    assert_eq!(json(&t.path().join("out/roots-trinomial_3.json"))["is_pisot"], true);
}

#[test]
fn weyl_methods_agree() {
    let t = tempfile::tempdir().unwrap();
    let base = ["weyl", "--seq", "hofstadter", "--n", "1e5", "--beta", "alg:alpha3"];
    ok(t.path(), &[&base[..], &["--method", "recurrence"]].concat());
    let r = json(&t.path().join("out/weyl-hofstadter_d3-alg_alpha3-100000-recurrence.json"));
    let last = r["checkpoints"].as_array().unwrap().last().unwrap().clone();
    let n = last["n"].as_u64().unwrap();
    let nstr = n.to_string();
    ok(t.path(), &["weyl", "--seq", "hofstadter", "--n", &nstr, "--beta", "alg:alpha3"]);
    let d = json(&t.path().join(format!("out/weyl-hofstadter_d3-alg_alpha3-{n}-direct.json")));
    let dl = d["checkpoints"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(dl["n"].as_u64().unwrap(), n);
    let diff = (dl["re"].as_f64().unwrap() - last["re"].as_f64().unwrap())
        .hypot(dl["im"].as_f64().unwrap() - last["im"].as_f64().unwrap());
    assert!(diff < 1e-9, "{diff}");
}

#[test]
fn exit_codes() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(modsig(t.path(), &["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(modsig(t.path(), &["scan", "--seq", "nope"]).status.code(), Some(1));
    assert_eq!(modsig(t.path(), &["histogram", "--beta", "dec:1.4142"]).status.code(), Some(1));
    let hyp = modsig(
        t.path(),
        &["histogram", "--n", "1e4", "--beta", "alg:alpha3", "--density-bound", "1,1"],
    );
    assert_eq!(hyp.status.code(), Some(2));
    assert_eq!(modsig(t.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn report_runs_configs_and_checks() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("configs");
    fs::create_dir(&cfg).unwrap();
    fs::write(
        cfg.join("g.toml"),
        "title = \"G steps\"\nkind = \"histogram\"\nseq = \"hofstadter\"\nd = 2\nn = \"1e5\"\nbeta = \"alg:phi\"\nbins = 64\n",
    )
    .unwrap();
    fs::write(
        cfg.join("h.toml"),
        "title = \"H overlay\"\nkind = \"overlay\"\nseq = \"hofstadter\"\nn = \"1e6\"\nbeta = \"alg:alpha3\"\n",
    )
    .unwrap();
    let out = ok(t.path(), &["report", "--checks", "2,12"]);
    assert!(out.contains("PASS  2") && out.contains("PASS 12"), "{out}");
    let r = json(&t.path().join("out/report.json"));
    assert_eq!(r["figures"].as_array().unwrap().len(), 2);
    assert_eq!(r["failed_checks"].as_array().unwrap().len(), 0);
    assert!(t.path().join("out/h-overlay.svg").exists());

    fs::write(cfg.join("bad.toml"), "title = \"x\"\nkind = \"pie\"\nseq = \"identity\"\nn = \"10\"\n").unwrap();
    assert_eq!(modsig(t.path(), &["report", "--checks", "none"]).status.code(), Some(1));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let text = fs::read_to_string(&p).unwrap();
        let v: toml::Value = toml::from_str(&text).unwrap();
        assert!(v.get("title").is_some() && v.get("kind").is_some(), "{}", p.display());
        n += 1;
    }
    assert!(n >= 8);
}
