use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const LAMBDA_SET: &str = r#"
[set]
[[set.families]]
rule = "scaled_atom"
atom = 1.0
range = [1.0, 2.0]
grid = 11
"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_glevy"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--quiet")
        .output()
        .unwrap()
}

fn record(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn expect_both_reports_duality() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!(
        "seed = 3\n{LAMBDA_SET}\n[mc]\nn_paths = 4000\n[expect]\npayoff = {{ kind = \"clamped_linear\", hi = 1.0 }}\n"
    );
    let o = run(tmp.path(), &cfg, &["expect", "--method", "both", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = record(&out, "expect.json");
    assert_eq!(r["seed"], 3);
    assert_eq!(r["config_sha256"].as_str().unwrap().len(), 64);
    let pide = r["result"]["pide"]["value"].as_f64().unwrap();
    assert!((pide - (1.0 - (-2.0f64).exp())).abs() < 5e-3);
    let mc = r["result"]["mc"]["value"].as_f64().unwrap();
    let se = r["result"]["mc"]["std_error"].as_f64().unwrap();
    assert!(mc <= pide + 3.0 * se);
    assert_eq!(r["result"]["duality"]["consistent"], true);
    assert!(out.join("expect_pide.csv").exists());
}

#[test]
fn identical_configs_give_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!(
        "seed = 11\n{LAMBDA_SET}\n[mc]\nn_paths = 500\n[capacity]\nevent = {{ kind = \"prm_at_least\", region = {{ type = \"points\", points = [[1.0]] }} }}\n"
    );
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        let o = run(tmp.path(), &cfg, &["capacity", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(a.join("capacity.json")).unwrap(), fs::read(b.join("capacity.json")).unwrap());
    let v = record(&a, "capacity.json")["result"]["value"].as_f64().unwrap();
    assert!((v - (1.0 - (-2.0f64).exp())).abs() < 0.1);
}

#[test]
fn validate_moving_atom_set() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = "[set]\n[[set.families]]\nrule = \"moving_atom\"\nrange = [1.0, 2.0]\ngrid = 5\n";
    let o = run(tmp.path(), cfg, &["validate", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = record(&out, "validate.json");
    assert_eq!(r["result"]["passed"], true);
    assert_eq!(r["result"]["report"]["property_bound"], 2.0);
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    for cfg in ["[set\n", "[expect]\nt = 1.0\n", "unknown = 1\n"] {
        let o = run(tmp.path(), cfg, &["expect", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{cfg}");
        assert!(!out.exists());
    }
    // stochastic command without a seed
    let cfg = format!("{LAMBDA_SET}\n[capacity]\nevent = {{ kind = \"always\" }}\n");
    let o = run(tmp.path(), &cfg, &["capacity", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn violated_precondition_exits_3_with_record() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!(
        "seed = 1\n{LAMBDA_SET}\n[erlang]\na = {{ type = \"points\", points = [[5.0]] }}\nb = {{ type = \"whole\" }}\nwindow = [0.0, 1.0]\n"
    );
    let o = run(tmp.path(), &cfg, &["erlang-bound", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(record(&out, "erlang-bound.json")["status"], "assumption_violated");
}

#[test]
fn unstable_time_step_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!("{LAMBDA_SET}\n[grid]\ndt = 1.0\n[expect]\npayoff = {{ kind = \"linear\" }}\n");
    let o = run(tmp.path(), &cfg, &["expect", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(record(&out, "expect.json")["status"], "numerical_failure");
}

#[test]
fn decompose_and_compensate_path_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let path = sample_path_csv();
    fs::write(tmp.path().join("path.csv"), path).unwrap();
    let cfg = format!("{LAMBDA_SET}\n[decompose]\ninput = \"path.csv\"\n[compensate]\ninput = \"path.csv\"\n");
    let o = run(tmp.path(), &cfg, &["decompose", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = record(&out, "decompose.json");
    assert_eq!(r["result"]["max_reconstruction_error"], 0.0);
    assert_eq!(r["result"]["jumps"], 2);
    assert!(out.join("continuous.csv").exists() && out.join("jumps.csv").exists());

    let o = run(tmp.path(), &cfg, &["compensate", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let y = record(&out, "compensate.json")["result"]["terminal_value"][0].as_f64().unwrap();
    // jumps 1 + 1 minus drift 2·1
    assert!(y.abs() < 1e-12);
}

fn sample_path_csv() -> &'static str {
    "horizon,1,dim,1\nsample,0,0\nsample,0.5,0.25\nsample,1,0\njump,0.3,1\njump,0.7,1\n"
}

#[test]
fn martingale_transport_fnspace_counterexample() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = format!(
        "{LAMBDA_SET}
[martingale]
process = {{ kind = \"compensated_jump_part\" }}
t = 1.0
[fnspace]
function = {{ kind = \"identity\" }}
p = 2.0
"
    );
    let o = run(tmp.path(), &cfg, &["martingale-check", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = record(&out, "martingale-check.json")["result"]["report"].clone();
    assert_eq!(r["martingale"], true);
    assert_eq!(r["symmetric"], false);

    let o = run(tmp.path(), &cfg, &["transport", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(record(&out, "transport.json")["result"]["max_pushforward_error"].as_f64().unwrap() < 1e-12);

    let o = run(tmp.path(), &cfg, &["fnspace", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = record(&out, "fnspace.json");
    assert!((r["result"]["norm"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(r["result"]["quasi_continuity"]["verdict"], "inconclusive");

    let o = run(tmp.path(), "", &["counterexample", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r = record(&out, "counterexample.json");
    let last = r["result"]["sequence"].as_array().unwrap().last().unwrap().clone();
    assert!(last["skorohod_upper"].as_f64().unwrap() < 0.02);
    assert_eq!(last["integral_gap"], 1.0);
    assert_eq!(r["result"]["indicator_of_one"]["verdict"], "not_quasi_continuous");
}

#[test]
fn gpoisson_matches_poisson_series_at_upper_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = "[gpoisson]\nlambda = [1.0, 2.0]\nphi = { kind = \"linear\" }\n";
    let o = run(tmp.path(), cfg, &["gpoisson", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = record(&out, "gpoisson.json")["result"]["value"].as_f64().unwrap();
    assert!((v - 2.0).abs() < 1e-6);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = glevy_core::config::RunConfig::from_toml_str(&fs::read_to_string(&path).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.uncertainty_set().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
