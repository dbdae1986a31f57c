//! End-to-end acceptance checks. Prints one `criterion N: PASS|FAIL ...` line
//! per criterion, then fails if any of them failed.

use calibra::calibration_builder::{assemble_field, solve_riccati_n, AssembleOptions, Coefficients, Variant};
use calibra::calibration_verify::derivative_identities;
use calibra::counterexample::{default_eps, find_energy_decrease, solve_w0};
use calibra::fixtures;
use calibra::par::Exec;
use calibra::scenario::{run_scenario, Command, Scenario};
use calibra::steklov_capacity::{blowup_study, compute_k, rectangle_k, sufficient_condition, Arc, DomainSpec};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Line {
    pass: bool,
    detail: String,
}

fn line(pass: bool, detail: String) -> Line {
    Line { pass, detail }
}

fn within(t: Instant, limit: u64) -> (bool, Duration) {
    let e = t.elapsed();
    (e < Duration::from_secs(limit), e)
}

fn steklov_oracle() -> Line {
    let h = 1.0 / 64.0;
    let mut pass = true;
    let mut parts = Vec::new();
    for (a, b) in [(1.0, 1.0), (2.0, 1.0), (1.0, 0.5)] {
        let t = Instant::now();
        let k = compute_k(&DomainSpec::rectangle(a, b), h, Exec::Parallel).unwrap().k;
        let (fast, e) = within(t, 10);
        let exact = rectangle_k(a, b);
        let rel = (k - exact).abs() / exact;
        pass &= rel < 1e-2 && fast;
        parts.push(format!("({a},{b}) K={k:.5} exact={exact:.5} rel={rel:.2e} {:.2}s", e.as_secs_f64()));
    }
    // π / tanh(π), the unit square value.
    pass &= (rectangle_k(1.0, 1.0) - PI / PI.tanh()).abs() < 1e-14;
    line(pass, parts.join("; "))
}

fn monotonicity() -> Line {
    let h = 1.0 / 32.0;
    let k = |d: DomainSpec| compute_k(&d, h, Exec::Parallel).unwrap().k;
    let pairs = [
        (DomainSpec::rectangle(1.0, 0.5), DomainSpec::rectangle(1.0, 1.0)),
        (
            DomainSpec::Rectangle { a: 2.0, b: 1.0, gamma: Some([0.5, 1.5]) },
            DomainSpec::Rectangle { a: 2.0, b: 2.0, gamma: Some([0.5, 1.5]) },
        ),
        (
            DomainSpec::AnnularSector { r_inner: 1.0, r_outer: 1.5, theta: 1.0, marked: Arc::Inner },
            DomainSpec::AnnularSector { r_inner: 1.0, r_outer: 2.0, theta: 1.0, marked: Arc::Inner },
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (small, big) in pairs {
        let (ks, kb) = (k(small), k(big));
        pass &= ks >= kb;
        parts.push(format!("{ks:.5} >= {kb:.5}"));
    }
    line(pass, parts.join("; "))
}

fn blowup() -> Line {
    let t = Instant::now();
    let deltas: Vec<f64> = (0..5).map(|k| 0.2 * 0.5f64.powi(k)).collect();
    let table = blowup_study(1.0, &deltas, 16, Exec::Parallel).unwrap();
    let (fast, e) = within(t, 120);
    let strict = table.rows.windows(2).all(|w| w[1].k > w[0].k);
    let pass = strict && table.increasing && table.min_k_delta > 0.5 && fast;
    let ks: Vec<String> = table.rows.iter().map(|r| format!("{:.3}", r.k)).collect();
    line(pass, format!("K=[{}] min K*delta={:.4} {:.1}s", ks.join(", "), table.min_k_delta, e.as_secs_f64()))
}

fn calibration_and_identities() -> (Line, Line) {
    let mut pass4 = true;
    let mut pass5 = true;
    let mut parts4 = Vec::new();
    let mut parts5 = Vec::new();
    for spec in [fixtures::pure_jump_line(), fixtures::circle_arc()] {
        let c = fixtures::build_candidate(&spec).unwrap();
        let t = Instant::now();
        let opts = AssembleOptions::default();
        assert_eq!((opts.fine.grid, opts.fine.st_samples), (64, 64));
        match assemble_field(&c, Variant::Dirichlet, &opts) {
            Ok(a) => {
                let (fast, e) = within(t, 300);
                let r = &a.report;
                let positive = r.conditions.iter().all(|k| k.pass && k.margin > 0.0);
                let min = r.conditions.iter().map(|k| k.margin).fold(f64::INFINITY, f64::min);
                pass4 &= r.pass && positive && fast && r.grid == 64;
                parts4.push(format!("{} min margin {min:.2e} eps={} {:.1}s", spec.name, r.eps, e.as_secs_f64()));
                let ids = derivative_identities(&a.field, 32, Exec::Parallel);
                pass5 &= ids.pass;
                let worst: Vec<String> = ids.identities.iter().map(|i| format!("{:.1e}", i.error)).collect();
                parts5.push(format!("{} errors [{}]", spec.name, worst.join(", ")));
            }
            Err(e) => {
                pass4 = false;
                pass5 = false;
                parts4.push(format!("{}: {e}", spec.name));
            }
        }
    }
    (line(pass4, parts4.join("; ")), line(pass5, parts5.join("; ")))
}

fn riccati() -> Line {
    let r = solve_riccati_n(&|_| 0.0, 1.0, &Coefficients::limit(), (0.0, 1.0)).unwrap();
    let err = (0..=1000)
        .map(|i| {
            let x = i as f64 / 1000.0;
            (r.tau.eval(x) - 0.25 * PI * (0.25 * PI * x).tan()).abs()
        })
        .fold(0.0, f64::max);
    let n = 1.0 + PI / 4.0;
    let pass = err < 1e-8 && r.sup_tau <= n && (r.bound - n).abs() < 1e-14;
    line(pass, format!("sup error {err:.2e}, |tau| = {:.6} <= N = {n:.6}", r.sup_tau))
}

fn counterexample() -> (Line, f64) {
    let t = Instant::now();
    let (_, coarse) = solve_w0(16).unwrap();
    let (w, energy) = solve_w0(32).unwrap();
    let c = energy.c_limit;
    let drift = (coarse.c_limit - c).abs() / c;
    let long = find_energy_decrease(2.0 * c, c, &w, &default_eps(), Exec::Parallel).unwrap();
    let short = find_energy_decrease(0.5 * c, c, &w, &default_eps(), Exec::Parallel).unwrap();
    let (fast, e) = within(t, 120);
    let first_ok = long.first.as_ref().is_some_and(|r| r.eps <= 0.1 && r.decrease && r.delta_e > 0.0);
    let slope_err = (long.slope - long.slope_expected).abs() / long.slope_expected.abs();
    let pass = drift < 1e-3 && long.verdict == "decrease" && first_ok && slope_err < 0.05 && short.verdict == "none-found" && fast;
    let detail = format!(
        "c={c:.5} (drift {drift:.1e}), l=2c slope {:.5} vs {:.5} ({:.2}%), l=c/2 {} {:.1}s",
        long.slope,
        long.slope_expected,
        100.0 * slope_err,
        short.verdict,
        e.as_secs_f64()
    );
    (line(pass, detail), c)
}

fn sufficient(c: f64) -> Line {
    let pure = fixtures::build_candidate(&fixtures::pure_jump_line()).unwrap();
    let l = 2.0 * c;
    let lin = fixtures::linear_jump(l);
    let mut splits = fixtures::pure_jump_line().splits;
    splits.extend(lin.splits.iter().cloned());
    let mut pass = true;
    for s in &splits {
        pass &= sufficient_condition(&pure, s, Exec::Parallel).unwrap().pass;
    }
    let lc = fixtures::build_candidate(&lin).unwrap();
    let r = sufficient_condition(&lc, &lin.splits[0], Exec::Parallel).unwrap();
    let pass = pass && !r.pass;
    line(pass, format!("pure jump on {} domains; u=+-x at l={l:.4}: lhs {:.3e} rhs {:.3e}", splits.len(), r.lhs, r.rhs))
}

fn suite_reports(exec: Exec) -> Vec<String> {
    let mut runs = Vec::new();
    let mut s = Scenario::new(Command::Steklov);
    s.grid = Some(32);
    runs.push(s);
    let mut s = Scenario::new(Command::EulerCheck);
    s.fixture = Some("circle_arc".into());
    runs.push(s);
    runs.push(Scenario::new(Command::Sufficient));
    runs.push(Scenario::new(Command::Blowup));
    let mut s = Scenario::new(Command::Counterexample);
    s.cells = Some(8);
    runs.push(s);
    let mut s = Scenario::new(Command::CalibrateVerify);
    s.fixture = Some("circle_arc".into());
    s.grid = Some(16);
    s.st_samples = Some(16);
    runs.push(s);
    runs.iter().map(|s| run_scenario(s, exec).json()).collect()
}

fn determinism() -> Line {
    let a = suite_reports(Exec::Parallel);
    let b = suite_reports(Exec::Parallel);
    let c = suite_reports(Exec::Sequential);
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    for (i, r) in a.iter().enumerate() {
        std::fs::write(dir.join(format!("report-{i}.json")), r).unwrap();
    }
    let bytes: usize = a.iter().map(String::len).sum();
    line(a == b && a == c, format!("{} reports, {bytes} bytes, parallel x2 and sequential identical", a.len()))
}

#[test]
fn acceptance() {
    let mut lines = vec![steklov_oracle(), monotonicity(), blowup()];
    let (four, five) = calibration_and_identities();
    lines.push(four);
    lines.push(five);
    lines.push(riccati());
    let (seven, c) = counterexample();
    lines.push(seven);
    lines.push(sufficient(c));
    lines.push(determinism());
    for (i, l) in lines.iter().enumerate() {
        println!("criterion {}: {} {}", i + 1, if l.pass { "PASS" } else { "FAIL" }, l.detail);
    }
    let failed: Vec<usize> = lines.iter().enumerate().filter(|(_, l)| !l.pass).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
