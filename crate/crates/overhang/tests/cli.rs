use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn overhang(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_overhang"))
        .args(args)
        .env_remove("OVERHANG_TOL")
        .output()
        .unwrap()
}

fn piped(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_overhang"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn text(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value_after(report: &str, key: &str) -> f64 {
    let line = report
        .lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no {key} in {report}"));
    line[key.len()..].split_whitespace().next().unwrap().parse().unwrap()
}

fn build(dir: &Path, family: &str, param: &str) -> String {
    let path = dir.join(format!("{family}-{param}.json"));
    let o = overhang(&["build", family, param, "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let h = build(dir.path(), "harmonic", "10");
    let o = overhang(&["verify", &h]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o).starts_with("balanced"));
    assert!(text(&o).contains("witness"));

    let o = overhang(&["verify", "--mode", "exact", &build(dir.path(), "triangle", "3")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("certificate"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"blocks\": [\n    {\"x\": 0.5 \"level\": 0}\n  ]\n}\n").unwrap();
    let o = overhang(&["verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = overhang(&["verify", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let h = build(dir.path(), "harmonic", "4");
    let o = Command::new(env!("CARGO_BIN_EXE_overhang"))
        .args(["verify", &h])
        .env("OVERHANG_TOL", "1e-6")
        .output()
        .unwrap();
    assert!(text(&o).contains("tol 1e-6"));
}

#[test]
fn verify_reads_stdin() {
    let o = overhang(&["build", "diamond", "5"]);
    let v = piped(&["verify", "-"], &o.stdout);
    assert_eq!(v.status.code(), Some(1));
    let o = overhang(&["build", "diamond", "4"]);
    assert_eq!(piped(&["verify", "--mode", "exact", "-"], &o.stdout).status.code(), Some(0));
}

#[test]
fn build_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = overhang(&["build", "parabolic", "6", "-o", dir.path().join("p.json").to_str().unwrap()]);
    assert_eq!(value_after(&text(&o), "blocks "), 111.0);
    assert_eq!(value_after(&text(&o), "overhang "), 3.0);

    let o = overhang(&["build", "harmonic", "10", "-o", dir.path().join("h.json").to_str().unwrap()]);
    let h10: f64 = (1..=10).map(|i| 0.5 / i as f64).sum();
    assert!((value_after(&text(&o), "overhang ") - h10).abs() < 1e-9);
    assert!((h10 - 1.46448).abs() < 1e-5);

    let o = overhang(&["build", "diamond", "4", "-o", dir.path().join("d.json").to_str().unwrap()]);
    assert_eq!(value_after(&text(&o), "blocks "), 16.0);

    let o = overhang(&["build", "harmonic", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage: build"));
    let o = overhang(&["build", "pyramid", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("possible values"));
}

#[test]
fn modified_stack_carries_order() {
    let o = overhang(&["build", "modified", "3"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let order = doc["order"].as_array().unwrap();
    assert_eq!(order.len(), doc["blocks"].as_array().unwrap().len());
}

#[test]
fn spinal_reports() {
    let o = overhang(&["spinal", "--weight", "100"]);
    assert!((value_after(&text(&o), "S*(100) = ") - 3.6979).abs() < 1e-3);
    let o = overhang(&["spinal", "--weight", "1"]);
    assert_eq!(value_after(&text(&o), "S*(1) = "), 0.5);
    let o = overhang(&["spinal", "--weight", "100", "--construction", "sqrt"]);
    let v = value_after(&text(&o), "sqrt construction overhang ");
    assert!((v - 3.5332).abs() < 1e-3, "{v}");
    let o = overhang(&["spinal", "--weight", "10", "--k", "3"]);
    assert_eq!(value_after(&text(&o), "k "), 3.0);
}

#[test]
fn convert_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let spine = dir.path().join("spine.json");
    let out = dir.path().join("converted.json");
    overhang(&["spinal", "--weight", "100", "--emit", spine.to_str().unwrap()]);
    let o = overhang(&["convert", spine.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert_eq!(value_after(&text(&o), "blocks "), 100.0);
    assert_eq!(value_after(&text(&o), "towers "), 1.0);
    assert_eq!(overhang(&["verify", "--mode", "exact", out.to_str().unwrap()]).status.code(), Some(0));

    let o = overhang(&["convert", "--weight", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("point weights cannot be supplied"));

    let o = overhang(&["convert", "--weight", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value_after(&text(&o), "blocks "), 1.0);

    // a harmonic stack is a spine with no point weights
    let h = build(dir.path(), "harmonic", "5");
    assert_eq!(overhang(&["convert", &h]).status.code(), Some(0));
    let t = build(dir.path(), "triangle", "2");
    assert_eq!(overhang(&["convert", &t]).status.code(), Some(2));
}

#[test]
fn exhaustive_search() {
    let o = overhang(&["search", "exhaustive", "3"]);
    assert!((value_after(&text(&o), "D(3) = ") - 1.0).abs() < 1e-6);
    assert_eq!(overhang(&["search", "exhaustive", "9"]).status.code(), Some(2));
}

#[test]
fn brickwall_search_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("s.json");
    let prof = dir.path().join("p.json");
    let csv = dir.path().join("o.csv");
    let o = overhang(&[
        "search",
        "brickwall",
        "--overhang",
        "4",
        "--symmetric",
        "-o",
        doc.to_str().unwrap(),
        "--profile",
        prof.to_str().unwrap(),
        "--outline",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(value_after(&text(&o), "blocks ") <= 95.0);
    assert_eq!(overhang(&["verify", "--mode", "exact", doc.to_str().unwrap()]).status.code(), Some(0));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("x,y\n"));

    // restarting from the result stays put
    let again = overhang(&["search", "brickwall", "--overhang", "4", "--seed-profile", prof.to_str().unwrap()]);
    assert_eq!(value_after(&text(&again), "moves "), 0.0);
    assert_eq!(value_after(&text(&again), "weight "), value_after(&text(&o), "weight "));

    let bare = overhang(&["search", "brickwall", "--overhang", "4", "--bare", "-o", doc.to_str().unwrap()]);
    assert_eq!(bare.status.code(), Some(0));
    assert!(value_after(&text(&bare), "blocks ") <= 95.0);
    assert_eq!(overhang(&["verify", "--mode", "exact", doc.to_str().unwrap()]).status.code(), Some(0));

    assert_eq!(overhang(&["search", "brickwall", "--overhang", "0.3"]).status.code(), Some(2));
}

#[test]
fn render_counts_elements() {
    let o = overhang(&["build", "parabolic", "6"]);
    let svg = text(&piped(&["render", "-"], &o.stdout));
    assert!(svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("class=\"block").count(), 111);

    let dir = tempfile::tempdir().unwrap();
    let spine = dir.path().join("spine.json");
    overhang(&["spinal", "--weight", "20", "--emit", spine.to_str().unwrap()]);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&spine).unwrap()).unwrap();
    let weights = doc["point_weights"].as_array().unwrap().len();
    let svg = text(&overhang(&["render", spine.to_str().unwrap(), "--forces"]));
    assert_eq!(svg.matches("class=\"weight\"").count(), weights);
    assert!(svg.contains("class=\"force\""));
    let plain = text(&overhang(&["render", spine.to_str().unwrap(), "--no-weights", "--no-shading"]));
    assert_eq!(plain.matches("class=\"weight\"").count(), 0);
    assert!(!plain.contains("balancing"));

    let o = overhang(&["build", "triangle", "3"]);
    assert!(text(&piped(&["render", "-"], &o.stdout)).contains("WARNING"));
    let o = overhang(&["build", "triangle", "2"]);
    assert_eq!(piped(&["render", "--scale", "0", "-"], &o.stdout).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let runs: [&[&str]; 4] = [
        &["build", "modified", "4"],
        &["spinal", "--weight", "37.5"],
        &["search", "exhaustive", "3"],
        &["search", "brickwall", "--overhang", "3", "--symmetric"],
    ];
    for args in runs {
        let a = overhang(args);
        let b = overhang(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stderr, b.stderr, "{args:?}");
    }
    let o = overhang(&["build", "diamond", "4"]);
    assert_eq!(piped(&["render", "-"], &o.stdout).stdout, piped(&["render", "-"], &o.stdout).stdout);
}

#[test]
fn figures_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = overhang(&["figures", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["parabolic-6", "diamond-4", "converted-100", "brickwall-4"] {
        assert!(dir.path().join(format!("{name}.svg")).exists(), "{name}");
        assert!(dir.path().join(format!("{name}.json")).exists(), "{name}");
    }
}
