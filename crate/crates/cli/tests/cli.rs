use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

const SAMPLE: &str = r#"{"k":0.5,"m":1,"boundary":{"cos":[0.05,0.02],"sin":[0.0,0.01]}}"#;

fn kend(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kend")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn solve(dir: &Path, cfg: &str) -> String {
    let c = write(dir, "cfg.json", cfg);
    let out = dir.join("end");
    let o = kend(&["solve-end", "--config", &c, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out.to_str().unwrap().to_owned()
}

fn num(v: &Value) -> f64 {
    v.as_str().expect("decimal string").parse().unwrap()
}

#[test]
fn solve_end_converges_and_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let a = solve(d.path(), SAMPLE);
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(Path::new(&a).join("solve_report.json")).unwrap()).unwrap();
    assert_eq!(rep["command"], "solve-end");
    assert_eq!(rep["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(rep["body"]["report"]["converged"], true);

    let d2 = tempfile::tempdir().unwrap();
    let b = solve(d2.path(), SAMPLE);
    for f in ["solve_report.json", "end.csv"] {
        let x = std::fs::read(Path::new(&a).join(f)).unwrap();
        let y = std::fs::read(Path::new(&b).join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn invalid_configs_exit_with_usage_code() {
    let d = tempfile::tempdir().unwrap();
    let bad = write(d.path(), "bad.json", r#"{"k":1.2,"boundary":{"cos":[0.05]}}"#);
    let out = d.path().join("o");
    assert_eq!(code(&kend(&["solve-end", "--config", &bad, "--out", out.to_str().unwrap()])), 3);
    let missing = d.path().join("missing.json");
    assert_eq!(code(&kend(&["solve-end", "--config", missing.to_str().unwrap(), "--out", "x"])), 3);
    assert_eq!(code(&kend(&["no-such-command"])), 3);
    assert_eq!(code(&kend(&["--help"])), 0);
}

#[test]
fn expand_reports_the_leading_term() {
    let d = tempfile::tempdir().unwrap();
    let a = solve(d.path(), SAMPLE);
    let o = kend(&["expand", &a]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let terms = v["body"]["terms"].as_array().unwrap();
    let lead = terms
        .iter()
        .find(|t| num(&t["lambda"]) == 0.0 && (num(&t["mu"]) - 0.5f64.sqrt()).abs() < 1e-15)
        .expect("(0, √(1−k)) term");
    assert!((num(&lead["re"]) - num(&v["body"]["r"])).abs() < 1e-15);
    assert!((num(&v["body"]["c"][0]) - 0.02).abs() < 1e-6);
    assert!((num(&v["body"]["c"][1]) - 0.01).abs() < 1e-6);
    assert!(num(&v["body"]["remainder_exponent"]) > (4.0f64 - 1.5).sqrt() - 0.05);
}

#[test]
fn zero_end_is_a_numerical_failure() {
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "zero.json", r#"{"k":0.5,"boundary":{"cos":[0.0]}}"#);
    assert_eq!(code(&kend(&["solve-end", "--config", &c, "--out", d.path().join("z").to_str().unwrap()])), 2);

    // An artifact whose values were overwritten by zeros.
    let a = solve(d.path(), SAMPLE);
    let csv = std::fs::read_to_string(Path::new(&a).join("end.csv")).unwrap();
    let mut zeroed = String::from("x,y,u\n");
    for l in csv.lines().skip(1) {
        let (xy, _) = l.rsplit_once(',').unwrap();
        zeroed.push_str(&format!("{xy},0\n"));
    }
    std::fs::write(Path::new(&a).join("end.csv"), zeroed).unwrap();
    assert_eq!(code(&kend(&["expand", &a])), 2);
}

#[test]
fn steiner_of_a_solved_end_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let a = solve(d.path(), SAMPLE);
    let v = json(&kend(&["steiner", &a]));
    let foot = &v["body"]["foot"];
    assert!((foot[0].as_f64().unwrap() - 0.02).abs() < 1e-6);
    assert!((foot[1].as_f64().unwrap() - 0.01).abs() < 1e-6);
    assert!(v["body"]["round_trip_error"].as_f64().unwrap() < 1e-12);
}

#[test]
fn steiner_examples() {
    let o = kend(&["steiner", "--example", "I", "--n", "5"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["body"]["data"]["ends"].as_array().unwrap().len(), 5);
    let r = &v["body"]["relations"];
    for key in ["sum_vectors", "moment", "reflected"] {
        assert!(r[key].as_f64().unwrap() < 1e-14, "{key}");
    }
    assert_eq!(code(&kend(&["steiner", "--example", "II", "--n", "4"])), 0);
    assert_eq!(code(&kend(&["steiner", "--example", "III", "--n", "2", "--m0", "2", "--m1", "4"])), 0);
    assert_eq!(code(&kend(&["steiner", "--example", "III", "--n", "5", "--m0", "5", "--m1", "5"])), 2);
}

#[test]
fn relations_from_json() {
    let d = tempfile::tempdir().unwrap();
    let good = write(d.path(), "g.json", r#"{"ends":[{"m":1,"z":[1,0],"c":[-0.5,0]},{"m":1,"z":[-1,0],"c":[0.5,0]}]}"#);
    let v = json(&kend(&["relations", "--config", &good]));
    assert_eq!(v["body"]["relations"]["pass"], serde_json::json!([true, true, true]));

    let unbalanced = write(d.path(), "u.json", r#"{"ends":[{"m":1,"z":[1,0],"c":[-0.5,0]},{"m":1,"z":[-1,0],"c":[0.25,0]}]}"#);
    let v = json(&kend(&["relations", "--config", &unbalanced]));
    assert_eq!(v["body"]["relations"]["pass"][0], false);

    let inf = write(d.path(), "i.json", r#"{"ends":[{"m":1,"z":null,"c":[0,0]},{"m":1,"z":[1,0],"c":[0,0]}]}"#);
    assert_eq!(code(&kend(&["relations", "--config", &inf])), 2);
    let junk = write(d.path(), "j.json", r#"{"ends":[{"m":1}]}"#);
    assert_eq!(code(&kend(&["relations", "--config", &junk])), 3);
}

#[test]
fn flux_writes_profile_and_summary() {
    let d = tempfile::tempdir().unwrap();
    let a = solve(d.path(), SAMPLE);
    let out = d.path().join("flux");
    let o = kend(&["flux", &a, "--a", "0.3", "--b", "-0.2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("flux.csv")).unwrap();
    assert!(csv.starts_with("y,conormal,dnu,alpha,normal\n"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out.join("flux.json")).unwrap()).unwrap();
    let lim = v["body"]["conormal"]["limit"].as_f64().unwrap();
    assert!(lim.is_finite() && lim != 0.0);

    // Fluxes are linear in the Killing field.
    let out2 = d.path().join("flux2");
    assert_eq!(code(&kend(&["flux", &a, "--a", "0.6", "--b", "-0.4", "--out", out2.to_str().unwrap()])), 0);
    let v2: Value = serde_json::from_str(&std::fs::read_to_string(out2.join("flux.json")).unwrap()).unwrap();
    let lim2 = v2["body"]["conormal"]["limit"].as_f64().unwrap();
    assert!((lim2 - 2.0 * lim).abs() < 1e-12 * lim.abs().max(1.0));
}

#[test]
fn oracle_ode_needs_radial_data() {
    let d = tempfile::tempdir().unwrap();
    let c = write(d.path(), "r.json", r#"{"k":0.5,"boundary":{"cos":[0.05]}}"#);
    let out = d.path().join("ode");
    assert_eq!(code(&kend(&["oracle-ode", "--config", &c, "--out", out.to_str().unwrap()])), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out.join("radial.json")).unwrap()).unwrap();
    assert!((v["body"]["radius"].as_f64().unwrap() - 0.05).abs() < 1e-3);
    let c = write(d.path(), "s.json", SAMPLE);
    assert_eq!(code(&kend(&["oracle-ode", "--config", &c])), 3);
}

#[test]
fn selftest_lists_every_criterion() {
    let d = tempfile::tempdir().unwrap();
    let o = kend(&["selftest", "--out", d.path().to_str().unwrap()]);
    let text = String::from_utf8_lossy(&o.stdout);
    let ids: Vec<&str> = text.lines().filter_map(|l| l.split_whitespace().nth(1)).collect();
    let want = ["1", "2", "3", "4", "5", "6", "7", "8", "9", "10a", "10b", "11a", "11b", "12", "13", "14"];
    assert_eq!(ids, want);
    let all_pass = text.lines().all(|l| l.starts_with("PASS"));
    assert_eq!(code(&o), if all_pass { 0 } else { 1 });
    let v: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("selftest.json")).unwrap()).unwrap();
    assert_eq!(v["body"].as_array().unwrap().len(), want.len());

    let o = kend(&["selftest", "--inject-fault", "13"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).lines().any(|l| l.starts_with("FAIL  13")));
}
