//! Parameter selection and assembly of the calibration field.

pub mod extension;
pub mod field;
pub mod params;
pub mod riccati;

pub use field::{CalibrationField, Column, FieldManifest, Tamper};
pub use params::{select_parameters, CalibrationParams, Variant};
pub use riccati::{solve_riccati_n, Coefficients, RiccatiSolution};

use crate::calibration_verify::{verify_field, VerificationReport, VerifyOptions};
use crate::euler_check::Candidate;
use crate::par::Exec;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssembleOptions {
    /// `min K(Γ, Ω_i)`; required by the graph variant.
    pub capacity: Option<f64>,
    /// Defaults to `0.1 · min gap`.
    pub eps_start: Option<f64>,
    pub eps_floor: f64,
    /// Strip halvings allowed per `ε` before `ε` itself is halved.
    pub max_strip_halvings: usize,
    /// Grid used inside the loop.
    pub coarse: VerifyOptions,
    /// Grid used once the coarse grid passes.
    pub fine: VerifyOptions,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        let fine = VerifyOptions::default();
        AssembleOptions {
            capacity: None,
            eps_start: None,
            eps_floor: 1e-4,
            max_strip_halvings: 6,
            coarse: VerifyOptions { grid: 12, st_samples: 24, ..fine },
            fine,
        }
    }
}

impl AssembleOptions {
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.coarse.exec = exec;
        self.fine.exec = exec;
        self
    }
}

/// One pass of the ε/strip loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub eps: f64,
    pub halfwidth: f64,
    pub grid: usize,
    pub outcome: String,
}

#[derive(Clone, Debug)]
pub struct Assembly {
    pub field: CalibrationField,
    pub report: VerificationReport,
    pub history: Vec<Attempt>,
}

/// Initial strip halfwidth for a given `ε`: small enough that the vertical
/// regions keep `ω_i > 0`.
pub fn initial_halfwidth(c: &Candidate, p: &CalibrationParams) -> f64 {
    let s = c.sup_tangential();
    let s = s[0].max(s[1]);
    let h = match p.variant {
        Variant::Dirichlet => 0.5 * p.eps * (p.m - s) / p.m,
        Variant::Graph => (0.05 * p.eps / p.m_prime.unwrap_or(1.0)).min(0.1 / p.m),
    };
    h.min(c.chart.halfwidth)
}

/// Riccati coefficients used for a variant.
pub fn coefficients(c: &Candidate, p: &CalibrationParams) -> Coefficients {
    match p.variant {
        Variant::Dirichlet => Coefficients::dirichlet(c, p.eps, p.m),
        Variant::Graph => Coefficients::limit(),
    }
}

/// Builds the field for one `ε` on a strip of the given halfwidth.
pub fn build_field(c: &Candidate, params: CalibrationParams, halfwidth: f64) -> Result<CalibrationField> {
    let l = c.length();
    let range = (-0.1 * l, 1.1 * l);
    let chart = &c.chart;
    let ricc = solve_riccati_n(&|x| chart.curv(x), l, &coefficients(c, &params), range)?;
    CalibrationField::new(c, params, ricc, range, halfwidth)
}

/// The ε/strip loop: start at `0.1 · min gap`, halve the strip when the worst
/// witness sits in the outer half of it, otherwise halve `ε`, until the
/// verifier passes on the coarse and then the fine grid.
pub fn assemble_field(c: &Candidate, variant: Variant, opts: &AssembleOptions) -> Result<Assembly> {
    let mut eps = opts.eps_start.unwrap_or(0.1 * c.min_gap());
    let mut history = Vec::new();
    let mut worst: (String, f64) = ("none".into(), f64::NEG_INFINITY);
    while eps >= opts.eps_floor {
        let params = match select_parameters(c, variant, eps, opts.capacity) {
            Ok(p) => p,
            Err(e @ Error::EmptyWindow { .. }) => return Err(e),
            Err(e) => {
                history.push(Attempt { eps, halfwidth: 0.0, grid: 0, outcome: e.to_string() });
                eps *= 0.5;
                continue;
            }
        };
        let mut h = initial_halfwidth(c, &params);
        let mut halvings = 0;
        loop {
            let field = match build_field(c, params.clone(), h) {
                Ok(f) => f,
                Err(e) => {
                    history.push(Attempt { eps, halfwidth: h, grid: 0, outcome: e.to_string() });
                    worst = ("build".into(), f64::NEG_INFINITY);
                    let strip = matches!(e, Error::LeftStrip { .. } | Error::RadiusTooSmall { .. } | Error::HalfwidthTooLarge { .. });
                    if strip && halvings < opts.max_strip_halvings {
                        h *= 0.5;
                        halvings += 1;
                        continue;
                    }
                    break;
                }
            };
            let mut report = verify_field(&field, &opts.coarse);
            let mut grid = opts.coarse.grid;
            if report.pass {
                report = verify_field(&field, &opts.fine);
                grid = opts.fine.grid;
            }
            let outcome = match report.worst() {
                None if report.pass => "pass".to_string(),
                None => format!("build failure: {}", report.first_build_failure.clone().unwrap_or_default()),
                Some(w) => format!("({}) margin {:.3e} at xi={}, eta={}", w.name, w.margin, w.witness.xi, w.witness.eta),
            };
            history.push(Attempt { eps, halfwidth: h, grid, outcome });
            if report.pass {
                return Ok(Assembly { field, report, history });
            }
            let (name, margin, eta) = match report.worst() {
                Some(w) => (w.name.clone(), w.margin, w.witness.eta),
                None => ("regions".to_string(), f64::NEG_INFINITY, h),
            };
            worst = (name, margin);
            if eta.abs() > 0.5 * h && halvings < opts.max_strip_halvings {
                h *= 0.5;
                halvings += 1;
            } else {
                break;
            }
        }
        eps *= 0.5;
    }
    Err(Error::AssemblyFailed { condition: worst.0, margin: worst.1 })
}
