use std::path::PathBuf;
use std::process::{Command, Output};

fn calibra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calibra")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("calibra-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn status_line(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).lines().last().unwrap_or_default().to_string()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

#[test]
fn steklov_unit_square_prints_k_and_closed_form() {
    let o = calibra(&["steklov", "--rect", "1", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", status_line(&o));
    let v = json(&o);
    assert_eq!(v["schema_version"], "1.0");
    let k = v["result"]["k"].as_f64().unwrap();
    let exact = v["result"]["closed_form"].as_f64().unwrap();
    assert!((exact - 3.1533).abs() < 1e-3);
    assert!((k - exact).abs() / exact < 0.01);
    assert!(status_line(&o).starts_with("status=pass command=steklov"));
}

#[test]
fn bad_arguments_exit_2() {
    let o = calibra(&["steklov", "--rect", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(status_line(&o).starts_with("status=parse-error"));
    let o = calibra(&[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_exits_2() {
    let p = scratch("bad.toml");
    std::fs::write(&p, "command = \"steklov\"\nrect = \"wide\"\n").unwrap();
    let o = calibra(&["--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(status_line(&o).lines().count(), 1);
}

#[test]
fn unknown_fixture_exits_3() {
    let o = calibra(&["euler-check", "--fixture", "no_such_thing"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(status_line(&o).starts_with("status=fixture-error command=euler-check"));
}

#[test]
fn failed_check_exits_1() {
    let o = calibra(&["euler-check", "--fixture", "slope_mismatch"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["pass"], false);
}

#[test]
fn config_file_with_outputs_is_deterministic() {
    let cfg = scratch("circle.toml");
    let out = scratch("circle.json");
    let csv = scratch("circle.csv");
    std::fs::write(
        &cfg,
        format!(
            "command = \"calibrate-verify\"\nfixture = \"circle_arc\"\ngrid = 16\nst_samples = 16\n\n[output]\njson = {:?}\ncsv = {:?}\n",
            out.to_str().unwrap(),
            csv.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = calibra(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", status_line(&o));
    let first = std::fs::read(&out).unwrap();
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 16 * 16);
    let o = calibra(&["--config", cfg.to_str().unwrap(), "--sequential"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn flags_override_the_config() {
    let cfg = scratch("steklov.toml");
    std::fs::write(&cfg, "command = \"steklov\"\nrect = [1.0, 1.0]\ngrid = 16\n").unwrap();
    let o = calibra(&["--config", cfg.to_str().unwrap(), "steklov", "--rect", "2", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["result"]["a"], 2.0);
    assert_eq!(v["result"]["h"], 1.0 / 16.0);
}

#[test]
fn counterexample_short_rectangle_finds_nothing() {
    let o = calibra(&["counterexample", "--l-over-c", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", status_line(&o));
    assert_eq!(json(&o)["result"]["decrease"]["verdict"], "none-found");
}

#[test]
fn linear_jump_fails_the_sufficient_condition() {
    let o = calibra(&["sufficient", "--fixture", "linear_jump", "--length", "9.5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = calibra(&["sufficient", "--fixture", "pure_jump_line"]);
    assert_eq!(o.status.code(), Some(0));
}
