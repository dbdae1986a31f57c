//! Scenario configs and the dispatcher behind the command line tool.
//!
//! A scenario is a TOML document with a `command` key, optional fixture and
//! tolerance keys, and an `[output]` section:
//!
//! ```toml
//! command = "calibrate-verify"
//! fixture = "pure_jump_line"
//! grid = 64
//!
//! [output]
//! json = "report.json"
//! csv = "points.csv"
//! ```
//!
//! Every run produces an [`Outcome`]: an exit code, a one-line status and a
//! JSON report whose content depends only on the scenario.

use crate::calibration_builder::{assemble_field, AssembleOptions, Variant};
use crate::calibration_verify::{derivative_identities, Tolerances, VerifyOptions};
use crate::counterexample::{default_eps, find_energy_decrease, solve_w0};
use crate::euler_check::{check_euler, Candidate};
use crate::fixtures::{self, FixtureSpec};
use crate::par::Exec;
use crate::steklov_capacity::{blowup_study, compute_k, compute_k_on, rectangle_k, sufficient_condition, DomainSpec, SplitSpec};
use crate::{Error, Result, SCHEMA_VERSION};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::Path;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_FIXTURE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    EulerCheck,
    CalibrateVerify,
    Steklov,
    Sufficient,
    Counterexample,
    Blowup,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::EulerCheck => "euler-check",
            Command::CalibrateVerify => "calibrate-verify",
            Command::Steklov => "steklov",
            Command::Sufficient => "sufficient",
            Command::Counterexample => "counterexample",
            Command::Blowup => "blowup",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Output {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub command: Command,
    /// Name of a built-in fixture.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    /// Inline fixture; takes precedence over `fixture`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<FixtureSpec>,
    /// Length of `Γ` for `linear_jump` and `blowup`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    /// Main tolerance of the command: Euler residuals, relative Steklov
    /// error, or the (c)/(e) tolerance of the verifier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Verifier base grid, or Steklov cells per unit length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub st_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    /// `min K(Γ, Ω_i)` for the graph variant; computed from the first split when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    /// Rectangle sides for `steklov`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rect: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_over_c: Option<f64>,
    /// Cells per unit length of the coarsest reference mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default)]
    pub output: Output,
}

impl Scenario {
    pub fn new(command: Command) -> Self {
        Scenario {
            command,
            fixture: None,
            candidate: None,
            length: None,
            tol: None,
            grid: None,
            st_samples: None,
            variant: None,
            capacity: None,
            rect: None,
            l_over_c: None,
            cells: None,
            deltas: None,
            output: Output::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Scenario> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn fixture_spec(&self) -> Result<FixtureSpec> {
        if let Some(c) = &self.candidate {
            return Ok(c.clone());
        }
        let name = self.fixture.as_deref().unwrap_or("pure_jump_line");
        match (name, self.length) {
            ("linear_jump", Some(l)) => Ok(fixtures::linear_jump(l)),
            _ => fixtures::by_name(name),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// `status=<word> command=<name> reason=<text>` on one line.
    pub status: String,
    pub report: Value,
    pub csv: Option<String>,
}

impl Outcome {
    fn new(command: &str, exit_code: i32, reason: &str, report: Value, csv: Option<String>) -> Self {
        let word = match exit_code {
            EXIT_PASS => "pass",
            EXIT_CHECK => "fail",
            EXIT_PARSE => "parse-error",
            _ => "fixture-error",
        };
        let reason = reason.replace(['\n', '\r'], " ");
        Outcome { exit_code, status: format!("status={word} command={command} reason={reason}"), report, csv }
    }

    fn error(command: &str, e: &Error) -> Self {
        let code = exit_code_for(e);
        let report = json!({ "schema_version": SCHEMA_VERSION, "command": command, "error": e.to_string() });
        Outcome::new(command, code, &e.to_string(), report, None)
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes") + "\n"
    }

    /// Writes the JSON report and CSV dump to the configured paths.
    pub fn write(&self, output: &Output) -> std::io::Result<()> {
        if let Some(p) = &output.json {
            std::fs::write(p, self.json())?;
        }
        if let (Some(p), Some(csv)) = (&output.csv, &self.csv) {
            std::fs::write(p, csv)?;
        }
        Ok(())
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_PARSE,
        Error::UnknownFixture(_)
        | Error::NonRegular { .. }
        | Error::SelfIntersection { .. }
        | Error::HalfwidthTooLarge { .. }
        | Error::ChartOverlap { .. }
        | Error::RadiusTooSmall { .. }
        | Error::Geometry(_)
        | Error::NotAdmissible(_) => EXIT_FIXTURE,
        _ => EXIT_CHECK,
    }
}

/// Parses `text` and runs it.
pub fn run_config(text: &str, exec: Exec) -> (Option<Scenario>, Outcome) {
    match Scenario::parse(text) {
        Ok(s) => {
            let o = run_scenario(&s, exec);
            (Some(s), o)
        }
        Err(e) => (None, Outcome::error("none", &e)),
    }
}

/// Reads a config file; I/O failures count as parse errors.
pub fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Scenario::parse(&text)
}

pub fn run_scenario(s: &Scenario, exec: Exec) -> Outcome {
    let name = s.command.name();
    let run = match s.command {
        Command::EulerCheck => euler(s),
        Command::CalibrateVerify => calibrate(s, exec),
        Command::Steklov => steklov(s, exec),
        Command::Sufficient => sufficient(s, exec),
        Command::Counterexample => counterexample(s, exec),
        Command::Blowup => blowup(s, exec),
    };
    match run {
        Ok((pass, reason, body, csv)) => {
            let mut report = json!({ "schema_version": SCHEMA_VERSION, "command": name, "pass": pass });
            report.as_object_mut().unwrap().insert("result".into(), body);
            let code = if pass { EXIT_PASS } else { EXIT_CHECK };
            Outcome::new(name, code, &reason, report, csv)
        }
        Err(e) => Outcome::error(name, &e),
    }
}

type Run = Result<(bool, String, Value, Option<String>)>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn candidate(s: &Scenario) -> Result<(FixtureSpec, Candidate)> {
    let spec = s.fixture_spec()?;
    let c = fixtures::build_candidate(&spec)?;
    Ok((spec, c))
}

fn euler(s: &Scenario) -> Run {
    let (_, c) = candidate(s)?;
    let r = check_euler(&c, s.tol.unwrap_or(1e-6));
    let reason = format!("laplacian={:.3e} neumann={:.3e} curvature={:.3e}", r.laplacian, r.neumann, r.curvature);
    Ok((r.pass, reason, json!({ "fixture": c.name, "euler": to_value(&r) }), None))
}

/// `min K` over the two components of a split, at 64 cells across.
pub fn split_capacity(split: &SplitSpec, exec: Exec) -> Result<f64> {
    let h = split.mesh_size(64.0);
    let mut k = f64::INFINITY;
    for d in split.components()? {
        k = k.min(compute_k_on(&d.mesh(h)?, h, exec)?.k);
    }
    Ok(k)
}

fn calibrate(s: &Scenario, exec: Exec) -> Run {
    let (spec, c) = candidate(s)?;
    let variant = s.variant.unwrap_or(Variant::Dirichlet);
    let mut tol = Tolerances::default();
    if let Some(t) = s.tol {
        tol.graph = t;
        tol.jump = t;
    }
    let fine = VerifyOptions { grid: s.grid.unwrap_or(64), st_samples: s.st_samples.unwrap_or(64), tol, exec };
    let mut opts = AssembleOptions { fine, ..AssembleOptions::default() };
    opts.coarse.tol = tol;
    opts.coarse.exec = exec;
    if variant == Variant::Graph {
        opts.capacity = match (s.capacity, spec.splits.first()) {
            (Some(k), _) => Some(k),
            (None, Some(split)) => Some(split_capacity(split, exec)?),
            (None, None) => return Err(Error::Config("graph variant needs `capacity` or a fixture split".into())),
        };
    }
    let a = match assemble_field(&c, variant, &opts) {
        Ok(a) => a,
        Err(e @ (Error::AssemblyFailed { .. } | Error::EmptyWindow { .. })) => {
            let body = json!({ "fixture": c.name, "variant": variant, "error": e.to_string() });
            return Ok((false, e.to_string(), body, None));
        }
        Err(e) => return Err(e),
    };
    let ids = derivative_identities(&a.field, 16, exec);
    let r = &a.report;
    let margins: Vec<String> = r.conditions.iter().map(|k| format!("{}={:.3e}", k.name, k.margin)).collect();
    let pass = r.pass && (variant == Variant::Graph || ids.pass);
    let body = json!({
        "fixture": c.name,
        "variant": variant,
        "manifest": to_value(&a.field.manifest()),
        "verification": to_value(r),
        "identities": to_value(&ids),
        "history": to_value(&a.history),
    });
    Ok((pass, margins.join(","), body, Some(r.to_csv())))
}

fn steklov(s: &Scenario, exec: Exec) -> Run {
    let [a, b] = s.rect.unwrap_or([1.0, 1.0]);
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Config(format!("rect sides must be positive, got {a} {b}")));
    }
    let h = 1.0 / s.grid.unwrap_or(64) as f64;
    let r = compute_k(&DomainSpec::rectangle(a, b), h, exec)?;
    let exact = rectangle_k(a, b);
    let rel = (r.k - exact).abs() / exact;
    let tol = s.tol.unwrap_or(1e-2);
    let reason = format!("K={:.6} closed_form={:.6} rel_error={:.3e}", r.k, exact, rel);
    let body = json!({ "a": a, "b": b, "h": h, "k": r.k, "closed_form": exact, "rel_error": rel, "tol": tol, "solve": to_value(&r) });
    Ok((rel < tol, reason, body, None))
}

fn sufficient(s: &Scenario, exec: Exec) -> Run {
    let (spec, c) = candidate(s)?;
    if spec.splits.is_empty() {
        return Err(Error::NotAdmissible(format!("fixture {} has no split domains", spec.name)));
    }
    let mut rows = Vec::new();
    let mut pass = true;
    for split in &spec.splits {
        let r = sufficient_condition(&c, split, exec)?;
        pass &= r.pass;
        rows.push(json!({ "split": to_value(split), "report": to_value(&r) }));
    }
    let reason = format!("{} of {} splits", if pass { "passed all" } else { "failed some" }, rows.len());
    Ok((pass, reason, json!({ "fixture": c.name, "splits": rows }), None))
}

fn counterexample(s: &Scenario, exec: Exec) -> Run {
    let ratio = s.l_over_c.unwrap_or(2.0);
    if !(ratio > 0.0) {
        return Err(Error::Config(format!("l_over_c must be positive, got {ratio}")));
    }
    let (w, energy) = solve_w0(s.cells.unwrap_or(32))?;
    let l = ratio * energy.c_limit;
    let r = find_energy_decrease(l, energy.c_limit, &w, &default_eps(), exec)?;
    // A decrease is expected exactly when l > c.
    let pass = (ratio > 1.0) == (r.verdict == "decrease");
    let reason = format!("verdict={} slope={:.6} expected={:.6}", r.verdict, r.slope, r.slope_expected);
    let csv = r.to_csv();
    Ok((pass, reason, json!({ "l_over_c": ratio, "reference": to_value(&energy), "decrease": to_value(&r) }), Some(csv)))
}

fn blowup(s: &Scenario, exec: Exec) -> Run {
    let deltas = s.deltas.clone().unwrap_or_else(|| (0..5).map(|k| 0.2 * 0.5f64.powi(k)).collect());
    let t = blowup_study(s.length.unwrap_or(1.0), &deltas, s.cells.unwrap_or(16), exec)?;
    let pass = t.increasing && t.min_k_delta > 0.0;
    let reason = format!("increasing={} min_k_delta={:.4}", t.increasing, t.min_k_delta);
    let mut csv = String::from("delta,k,k_delta,nodes\n");
    for r in &t.rows {
        csv += &format!("{},{},{},{}\n", r.delta, r.k, r.k_delta, r.nodes);
    }
    Ok((pass, reason, to_value(&t), Some(csv)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let text = "command = \"steklov\"\nrect = [2.0, 1.0]\ntol = 0.01\n\n[output]\njson = \"k.json\"\n";
        let s = Scenario::parse(text).unwrap();
        assert_eq!(s.command, Command::Steklov);
        assert_eq!(s.rect, Some([2.0, 1.0]));
        let back = Scenario::parse(&s.to_toml().unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn inline_candidate_round_trips() {
        let mut s = Scenario::new(Command::Sufficient);
        s.candidate = Some(fixtures::circle_arc());
        let back = Scenario::parse(&s.to_toml().unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn bad_config_is_a_parse_error() {
        let (_, o) = run_config("command = \"fly\"", Exec::Sequential);
        assert_eq!(o.exit_code, EXIT_PARSE);
        assert!(o.status.starts_with("status=parse-error"));
        let (_, o) = run_config("command = \"steklov\"\nbogus = 1", Exec::Sequential);
        assert_eq!(o.exit_code, EXIT_PARSE);
    }

    #[test]
    fn unknown_fixture_is_a_fixture_error() {
        let mut s = Scenario::new(Command::EulerCheck);
        s.fixture = Some("nope".into());
        let o = run_scenario(&s, Exec::Sequential);
        assert_eq!(o.exit_code, EXIT_FIXTURE);
        assert!(!o.status.contains('\n'));
    }

    #[test]
    fn steklov_unit_square() {
        let mut s = Scenario::new(Command::Steklov);
        s.grid = Some(32);
        let o = run_scenario(&s, Exec::Sequential);
        assert_eq!(o.exit_code, EXIT_PASS, "{}", o.status);
        assert_eq!(o.report["schema_version"], SCHEMA_VERSION);
        let k = o.report["result"]["k"].as_f64().unwrap();
        assert!((k - 3.15334809493716).abs() < 0.02);
    }

    #[test]
    fn euler_on_every_builtin() {
        for name in fixtures::BUILTIN {
            let mut s = Scenario::new(Command::EulerCheck);
            s.fixture = Some(name.into());
            let o = run_scenario(&s, Exec::Sequential);
            let want = if matches!(name, "slope_mismatch" | "sine_curve") { EXIT_CHECK } else { EXIT_PASS };
            assert_eq!(o.exit_code, want, "{name}: {}", o.status);
        }
    }
}
