use calibra::calibration_builder::extension::outer_field;
use calibra::calibration_builder::riccati::comparison_sup;
use calibra::calibration_builder::{build_field, select_parameters, solve_riccati_n, CalibrationField, Coefficients, Variant};
use calibra::counterexample::{boundary_mismatch, perturbed_energy, solve_w0_at, ReferenceSolution};
use calibra::euler_check::check_euler;
use calibra::fixtures;
use calibra::par::{map_indexed, Exec};
use calibra::scenario::{Command, Output, Scenario};
use calibra::steklov_capacity::{compute_k, rectangle_k, thin_domain_h, DomainSpec};
use proptest::prelude::*;
use std::sync::OnceLock;

fn pure_jump_field() -> &'static CalibrationField {
    static F: OnceLock<CalibrationField> = OnceLock::new();
    F.get_or_init(|| {
        let c = fixtures::build_candidate(&fixtures::pure_jump_line()).unwrap();
        let p = select_parameters(&c, Variant::Dirichlet, 0.1, None).unwrap();
        build_field(&c, p, 0.05).unwrap()
    })
}

fn circle_field() -> &'static CalibrationField {
    static F: OnceLock<CalibrationField> = OnceLock::new();
    F.get_or_init(|| {
        let c = fixtures::build_candidate(&fixtures::circle_arc()).unwrap();
        let p = select_parameters(&c, Variant::Dirichlet, 0.1, None).unwrap();
        build_field(&c, p, 0.004).unwrap()
    })
}

fn reference() -> &'static ReferenceSolution {
    static W: OnceLock<ReferenceSolution> = OnceLock::new();
    W.get_or_init(|| solve_w0_at(8).unwrap())
}

fn close(a: [f64; 2], b: [f64; 2], tol: f64) -> bool {
    (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn euler_residuals_survive_rigid_motions(angle in -3.0f64..3.0, sx in -2.0f64..2.0, sy in -2.0f64..2.0) {
        for spec in [fixtures::pure_jump_line(), fixtures::circle_arc(), fixtures::slope_mismatch()] {
            let a = check_euler(&fixtures::build_candidate(&spec).unwrap(), 1e-6);
            let b = check_euler(&fixtures::build_candidate(&spec.moved(angle, [sx, sy])).unwrap(), 1e-6);
            prop_assert!((a.laplacian - b.laplacian).abs() < 1e-8);
            prop_assert!((a.neumann - b.neumann).abs() < 1e-10);
            prop_assert!((a.curvature - b.curvature).abs() < 1e-10, "{} vs {}", a.curvature, b.curvature);
            prop_assert_eq!(a.pass, b.pass);
        }
    }

    #[test]
    fn euler_residuals_survive_constant_shifts(shift in -5.0f64..5.0) {
        for spec in [fixtures::circle_arc(), fixtures::slope_mismatch()] {
            let c = fixtures::build_candidate(&spec).unwrap();
            let a = check_euler(&c, 1e-6);
            let b = check_euler(&c.shifted(shift), 1e-6);
            prop_assert!((a.curvature - b.curvature).abs() < 1e-10);
            prop_assert!((a.neumann - b.neumann).abs() < 1e-10);
        }
    }

    #[test]
    fn chart_is_anchored_on_the_curve(t in 0.0f64..1.0, e in -0.9f64..0.9) {
        for spec in [fixtures::circle_arc(), fixtures::sine_curve()] {
            let c = fixtures::build_candidate(&spec).unwrap();
            let xi = t * c.length();
            prop_assert!((c.chart.gamma(xi, 0.0) - 1.0).abs() < 1e-10);
            let eta = e * c.chart.halfwidth;
            let [x, y] = c.chart.psi(xi, eta);
            let back = c.chart.forward(x, y).unwrap();
            prop_assert!(close(back, [xi, eta], 1e-9), "{:?} vs {:?}", back, (xi, eta));
        }
    }

    #[test]
    fn vertical_integral_is_additive(t in 0.0f64..1.0, e in -0.98f64..0.98, s in -1.0f64..3.0, w in 0.0f64..2.0) {
        for f in [pure_jump_field(), circle_field()] {
            let xi = t * f.candidate.length();
            let col = f.column(xi, e * f.halfwidth).unwrap();
            let t_end = s + w;
            let whole = col.integral(s, t_end);
            prop_assert!(close(col.integral(s, s), [0.0, 0.0], 0.0));
            let back = col.integral(t_end, s);
            prop_assert!(close(whole, [-back[0], -back[1]], 1e-15));
            for seg in &col.profile.segs {
                for m in [seg.lo, 0.5 * (seg.lo + seg.hi)] {
                    if m.is_finite() {
                        let (a, b) = (col.integral(s, m), col.integral(m, t_end));
                        prop_assert!(close(whole, [a[0] + b[0], a[1] + b[1]], 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn integral_saturates_beyond_the_caps(t in 0.0f64..1.0, e in -0.98f64..0.98, s in 0.0f64..1.0, d in 0.0f64..5.0) {
        let f = pure_jump_field();
        let col = f.column(t * f.candidate.length(), e * f.halfwidth).unwrap();
        let (lo, hi) = col.caps();
        let z = lo + s * (hi - lo);
        prop_assert!(close(col.integral(z, hi), col.integral(z, hi + d), 1e-12));
        prop_assert!(close(col.integral(lo, z), col.integral(lo - d, z), 1e-12));
    }

    #[test]
    fn dirichlet_parameter_invariants(eps in 0.001f64..0.1) {
        for spec in [fixtures::pure_jump_line(), fixtures::circle_arc()] {
            let c = fixtures::build_candidate(&spec).unwrap();
            let p = select_parameters(&c, Variant::Dirichlet, eps, None).unwrap();
            let s = c.sup_tangential();
            prop_assert!(p.m > s[0].max(s[1]));
            prop_assert!(p.mu > p.mu_floor);
            prop_assert!(1.0 - 2.0 * eps * p.m > 0.0);
            let k = &p.constants;
            prop_assert!(0.0 < k.d && k.d < 1.0);
            prop_assert!(k.n_big >= 1.0 && k.h > 0.0);
        }
    }

    #[test]
    fn riccati_stays_below_comparison(k in 0.0f64..1.2, l in 0.3f64..1.5) {
        let r = solve_riccati_n(&|_| k, l, &Coefficients::limit(), (0.0, l)).unwrap();
        prop_assert!(r.sup_tau <= comparison_sup(l, k) + 1e-9);
        prop_assert!(r.sup_tau <= r.bound);
    }

    #[test]
    fn rectangle_capacity_is_monotone_and_homogeneous(a in 0.2f64..4.0, b in 0.1f64..3.0, f in 1.01f64..3.0) {
        // tanh rounds to 1 once π b / a is large
        if b / a < 5.0 {
            prop_assert!(rectangle_k(a, b) > rectangle_k(a, f * b));
        }
        prop_assert!(rectangle_k(a, b) >= rectangle_k(a, f * b));
        prop_assert!((rectangle_k(f * a, f * b) * f - rectangle_k(a, b)).abs() < 1e-12 * rectangle_k(a, b));
    }

    #[test]
    fn thin_width_shrinks_with_m(lip in 0.0f64..3.0, m in 0.1f64..10.0, f in 1.01f64..4.0, l in 0.1f64..3.0, k in 0.0f64..2.0) {
        prop_assert!(thin_domain_h(lip, f * m, l, k) < thin_domain_h(lip, m, l, k));
        prop_assert!(thin_domain_h(lip, m, l, k) > 0.0);
    }

    #[test]
    fn outer_field_is_saturated(u in -3.0f64..3.0, z in -3.0f64..3.0, v in 1.0f64..4.0, g in prop::array::uniform4(-2.0f64..2.0)) {
        let p = outer_field(u, [g[0], g[1]], z, v, [g[2], g[3]]);
        prop_assert!((p[0] * p[0] + p[1] * p[1] - 4.0 * p[2]).abs() <= 1e-12 * (1.0 + p[2]));
    }

    #[test]
    fn energy_terms_add_up(eps in 0.001f64..0.2, amp in 0.0f64..0.9, l in 1.0f64..10.0) {
        let w = reference();
        let r = perturbed_energy(l, eps, amp, w).unwrap();
        prop_assert_eq!(r.delta_e, r.term_length + r.term_triangle + r.term_r2);
        prop_assert_eq!(r.decrease, r.delta_e > 0.0);
        let (bnd, iface) = boundary_mismatch(l, amp, w);
        prop_assert!(bnd == 0.0 && iface <= 1e-8, "{} {}", bnd, iface);
    }

    #[test]
    fn both_execution_modes_agree(n in 0usize..500) {
        let f = |i: usize| (i as f64).sqrt().sin();
        prop_assert_eq!(map_indexed(Exec::Parallel, n, f), map_indexed(Exec::Sequential, n, f));
    }

    #[test]
    fn scenario_config_round_trips(
        cmd in 0usize..6,
        fixture in prop::option::of(prop::sample::select(fixtures::BUILTIN.to_vec())),
        tol in prop::option::of(1e-12f64..1.0),
        grid in prop::option::of(2usize..512),
        rect in prop::option::of((0.01f64..10.0, 0.01f64..10.0)),
        deltas in prop::option::of(prop::collection::vec(1e-4f64..1.0, 0..6)),
        graph in any::<bool>(),
        json in prop::option::of("[a-z]{1,8}\\.json"),
    ) {
        let commands = [Command::EulerCheck, Command::CalibrateVerify, Command::Steklov, Command::Sufficient, Command::Counterexample, Command::Blowup];
        let mut s = Scenario::new(commands[cmd]);
        s.fixture = fixture.map(String::from);
        s.tol = tol;
        s.grid = grid;
        s.rect = rect.map(|(a, b)| [a, b]);
        s.deltas = deltas;
        s.variant = graph.then_some(Variant::Graph);
        s.output = Output { json, csv: None };
        let text = s.to_toml().unwrap();
        let back = Scenario::parse(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_toml().unwrap(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn discrete_capacity_scales_like_inverse_length(a in 0.5f64..2.0, b in 0.5f64..1.5, f in 1.5f64..3.0) {
        let h = 1.0 / 12.0;
        let k = compute_k(&DomainSpec::rectangle(a, b), h, Exec::Parallel).unwrap().k;
        let kf = compute_k(&DomainSpec::rectangle(f * a, f * b), f * h, Exec::Parallel).unwrap().k;
        prop_assert!((kf * f - k).abs() < 1e-6 * k, "{} vs {}", kf * f, k);
    }
}

#[test]
fn inline_candidate_round_trips_for_every_fixture() {
    for name in fixtures::BUILTIN {
        let mut s = Scenario::new(Command::Sufficient);
        s.candidate = Some(fixtures::by_name(name).unwrap());
        let back = Scenario::parse(&s.to_toml().unwrap()).unwrap();
        assert_eq!(back, s, "{name}");
    }
}
