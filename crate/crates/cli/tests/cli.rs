use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn curvlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("CURVLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let o = curvlab(&full, dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn cyclic_five_is_a_five_cycle() {
    let dir = TempDir::new().unwrap();
    let o = curvlab(&["gen", "--cayley", "cyclic", "--mod", "5"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("vertex")).count(), 5);
    let edges: Vec<&str> = text.lines().filter(|l| l.starts_with("edge")).collect();
    assert_eq!(edges.len(), 5);
    assert!(edges.iter().all(|e| e.ends_with(" 0.5 0.5")));
    assert!(text.lines().filter(|l| l.starts_with("vertex")).all(|l| l.ends_with(" 2")));
}

#[test]
fn symmetric_three_has_six_vertices() {
    let dir = TempDir::new().unwrap();
    let o = curvlab(&["gen", "--cayley", "sym", "--n", "3"], dir.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("vertex")).count(), 6);
}

#[test]
fn z_example_validates_with_growing_degree() {
    let dir = TempDir::new().unwrap();
    let mut sup = Vec::new();
    for r in ["10", "20"] {
        let g = gen(dir.path(), &format!("z{r}.txt"), &["--example-z-nonh2", "--radius", r]);
        let o = curvlab(&["validate", g.to_str().unwrap()], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v = json(&o);
        assert!(v["result"]["reversibility_residual_max"].as_f64().unwrap() < 1e-12);
        assert!(v["result"]["alpha_observed"].as_f64().unwrap() > 0.0);
        sup.push(v["result"]["d_mu_sup"].as_f64().unwrap());
    }
    assert!(sup[1] > 3.0 * sup[0], "{sup:?}");
}

#[test]
fn conductance_files_validate() {
    let dir = TempDir::new().unwrap();
    let g = gen(dir.path(), "rc.txt", &["--conductance-random", "--seed", "7"]);
    assert!(std::fs::read_to_string(&g).unwrap().starts_with("format conductance"));
    let o = curvlab(&["validate", g.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0);
    assert!(json(&o)["manifest"]["inputs"][0]["sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn non_reversible_file_exits_two_naming_the_edge() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "bad.txt", "format kernel\nvertex a 1\nvertex b 1\nedge a b 1 0.5\n");
    let o = curvlab(&["validate", g.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("a -- b"), "{err}");
}

#[test]
fn two_vertex_curvature_exit_codes() {
    let dir = TempDir::new().unwrap();
    let g = gen(dir.path(), "tv.txt", &["--family", "two-vertex"]);
    let g = g.to_str().unwrap();
    let fail = curvlab(&["curvature", g, "--k", "1.5", "--n", "2"], dir.path());
    assert_eq!(code(&fail), 3);
    let v = json(&fail);
    assert_eq!(v["result"]["verdict"]["satisfied"], false);
    assert_eq!(v["result"]["oracle_agrees"], true);
    let pass = curvlab(&["curvature", g, "--k", "-1", "--n", "2"], dir.path());
    assert_eq!(code(&pass), 0);
    let profile = curvlab(&["curvature", g, "--profile", "--n", "inf"], dir.path());
    assert_eq!(code(&profile), 0);
    let k = json(&profile)["result"]["profile"]["k_inf"].as_f64().unwrap();
    assert!((k - 2.0).abs() < 1e-9, "{k}");
}

#[test]
fn torus_satisfies_cd_zero_four() {
    let dir = TempDir::new().unwrap();
    let g = gen(dir.path(), "t.txt", &["--cayley", "torus", "--dims", "2", "--mod", "7"]);
    let o = curvlab(&["curvature", g.to_str().unwrap(), "--k", "0", "--n", "4", "--oracle-trials", "500"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["result"]["verdict"]["vertices"].as_array().unwrap().len(), 49);
}

#[test]
fn constant_data_passes_every_verifier() {
    let dir = TempDir::new().unwrap();
    let g = gen(dir.path(), "c.txt", &["--family", "cycle", "--n", "6"]);
    let u0 = write(dir.path(), "u0.txt", &(0..6).map(|i| format!("{i} 0.25\n")).collect::<String>());
    let o = curvlab(
        &[
            "modified-heat",
            g.to_str().unwrap(),
            "--u0",
            u0.to_str().unwrap(),
            "--horizon",
            "1",
            "--step",
            "0.05",
            "--global",
            "--verify",
            "decay,oscillation,liyau,harnack,comparison",
            "--n",
            "4",
            "--k",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["result"]["reports"].as_array().unwrap().len(), 6);
    assert!(v["manifest"]["hypotheses"].as_array().unwrap().len() >= 6);
}

#[test]
fn method_both_reports_oracle_deviation() {
    let dir = TempDir::new().unwrap();
    let g = gen(dir.path(), "c.txt", &["--family", "cycle", "--n", "6"]);
    let u0 = write(dir.path(), "u0.txt", &(0..6).map(|i| format!("{i} {}\n", 0.05 * (i as f64).sin())).collect::<String>());
    let csv = dir.path().join("trace.csv");
    let o = curvlab(
        &[
            "modified-heat",
            g.to_str().unwrap(),
            "--u0",
            u0.to_str().unwrap(),
            "--horizon",
            "0.5",
            "--step",
            "0.01",
            "--global",
            "--method",
            "both",
            "--csv",
            csv.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dev = json(&o)["result"]["oracle_deviation"].as_f64().unwrap();
    assert!(dev < 1e-8, "{dev}");
    let trace = std::fs::read_to_string(csv).unwrap();
    assert_eq!(trace.lines().count(), 1 + 51 * 6);
}

#[test]
fn failed_hypotheses_are_refused() {
    let dir = TempDir::new().unwrap();
    let g = gen(dir.path(), "tv.txt", &["--family", "two-vertex"]);
    let o = curvlab(&["heat", g.to_str().unwrap(), "--t", "0.5,1", "--audit", "-1,2"], dir.path());
    assert_eq!(code(&o), 5);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("vacuous audit refused"));

    // CD(3, inf) fails on two vertices, so the decay verifier has nothing to check
    let u0 = write(dir.path(), "u0.txt", "a 0\nb 0.1\n");
    let o = curvlab(
        &["modified-heat", g.to_str().unwrap(), "--u0", u0.to_str().unwrap(), "--horizon", "0.01", "--step", "0.001", "--verify", "decay", "--k", "3"],
        dir.path(),
    );
    assert_eq!(code(&o), 5);
    assert!(o.stdout.is_empty());
}

#[test]
fn heat_audit_on_the_torus() {
    let dir = TempDir::new().unwrap();
    let g = gen(dir.path(), "t.txt", &["--cayley", "torus", "--dims", "2", "--mod", "7"]);
    let o = curvlab(&["heat", g.to_str().unwrap(), "--t", "0.5,1,2", "--audit", "0,4", "--corpus", "3", "--seed", "11"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["manifest"]["seed"], 11);
    let records = v["result"]["audit"]["records"].as_array().unwrap();
    assert!(records.iter().all(|r| r["pass"] == true));
    assert!(!records.iter().find(|r| r["name"] == "gammapt2").unwrap()["vacuous"].is_null());
}

#[test]
fn doubling_reports_local_checks() {
    let dir = TempDir::new().unwrap();
    let g = gen(dir.path(), "t.txt", &["--cayley", "torus", "--dims", "2", "--mod", "7"]);
    let csv = dir.path().join("v.csv");
    let o = curvlab(
        &["doubling", g.to_str().unwrap(), "--r-max", "8", "--center", "(0,0)", "--cd0-n", "4", "--csv", csv.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["cd0_dimension"].as_f64(), Some(4.0));
    assert!(std::fs::read_to_string(csv).unwrap().starts_with("center,r,V,ratio,local_bound"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let g = gen(dir.path(), "rc.txt", &["--conductance-random", "--seed", "3"]);
    let args = ["curvature", g.to_str().unwrap(), "--profile", "--n", "3", "--seed", "5", "--oracle-trials", "200"];
    let a = curvlab(&args, dir.path());
    let b = curvlab(&args, dir.path());
    assert_eq!(code(&a), code(&b));
    assert_eq!(a.stdout, b.stdout);
    let g2 = gen(dir.path(), "rc2.txt", &["--conductance-random", "--seed", "3"]);
    assert_eq!(std::fs::read(g).unwrap(), std::fs::read(g2).unwrap());
}

#[test]
fn usage_errors_exit_one_without_report() {
    let dir = TempDir::new().unwrap();
    let o = curvlab(&["gen", "--cayley", "torus", "--dims", "2"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    let o = curvlab(&["curvature", "missing.txt", "--n", "2", "--k", "0"], dir.path());
    assert_eq!(code(&o), 1);
    let o = curvlab(&["frobnicate"], dir.path());
    assert_eq!(code(&o), 1);
}
