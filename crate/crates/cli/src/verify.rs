//! `verify`: every invariant suite at every grid angle, fanned out with rayon.

use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use tribilliard_core::angles::ordering_report;
use tribilliard_core::cylinders::{
    four_cylinder, ten_cylinder, verify_template_both, CylinderTemplate,
};
use tribilliard_core::induced::FirstReturn;
use tribilliard_core::{
    generalized_diagonal, AngleReport, Billiard, InducedMap, PhaseState, Side, StepResult, Stepper,
    Tolerances,
};

use crate::output::write_atomic;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub passed: bool,
    /// Largest deviation observed, in the suite's own units.
    pub worst: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleResult {
    pub alpha: f64,
    pub suites: Vec<SuiteResult>,
}

impl AngleResult {
    fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

type SuiteOutcome = Result<f64, String>;

fn record(suite: &'static str, out: SuiteOutcome) -> SuiteResult {
    match out {
        Ok(worst) => SuiteResult {
            suite,
            passed: true,
            worst,
            failure: None,
        },
        Err(msg) => SuiteResult {
            suite,
            passed: false,
            worst: f64::NAN,
            failure: Some(msg),
        },
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn angles_suite(alpha: f64) -> SuiteOutcome {
    let r = AngleReport::new(alpha).map_err(|e| e.to_string())?;
    let worst = r.max_residual();
    ensure(worst <= 1e-12, || format!("identity residual {worst:e}"))?;
    ensure(r.epsilon > 0.0, || format!("epsilon = {}", r.epsilon))?;
    ensure(r.omega > 0.0 && r.omega < 1.0, || {
        format!("omega = {}", r.omega)
    })?;
    let l3 = ordering_report(alpha, r.phi_star).map_err(|e| e.to_string())?;
    if let Some(c) = l3.checks.iter().find(|c| !c.holds) {
        return Err(format!("{} fails by {:e}", c.name, c.margin));
    }
    Ok(worst)
}

fn diagonal_suite(b: &Billiard) -> SuiteOutcome {
    let d = generalized_diagonal(b.alpha()).map_err(|e| e.to_string())?;
    ensure(d.states[0].x == 0.0, || "does not start at a vertex".into())?;
    ensure(d.closure_residual() <= 1e-12, || {
        format!("closure {:e}", d.closure_residual())
    })?;
    ensure(d.interior_ok(b.params()), || {
        "intermediate bounce not interior".into()
    })?;
    ensure(d.angles_ok(), || "angle outside (0, pi)".into())?;
    Ok(d.closure_residual())
}

fn template_suite(b: &Billiard, t: &CylinderTemplate, rng: &mut StdRng) -> SuiteOutcome {
    let (lo, hi) = t.delta_range;
    let mut worst: f64 = 0.0;
    for i in 0..8 {
        let delta = if i == 0 {
            (lo + hi) / 2.0
        } else {
            rng.gen_range(lo..hi)
        };
        if !t.contains(delta, b.tolerances().delta_margin) {
            continue;
        }
        worst = worst.max(t.recurrence_residual(b.params(), delta));
        let both =
            verify_template_both(b, t, delta).map_err(|e| format!("delta = {delta}: {e}"))?;
        if let Err(e) = &both.algebraic {
            return Err(format!("delta = {delta}: algebraic {e}"));
        }
        worst = worst.max(both.geometric.max_coordinate_deviation);
    }
    ensure(worst <= 1e-9, || format!("deviation {worst:e}"))?;
    Ok(worst)
}

fn conjugacy_suite(b: &Billiard, samples: usize, rng: &mut StdRng) -> SuiteOutcome {
    let map = InducedMap::with_billiard(*b).map_err(|e| e.to_string())?;
    let iet = map.iet();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < samples {
        let x: f64 = rng.gen_range(0.0..1.0);
        if !(1e-6..=1.0 - 1e-6).contains(&x) || (x - iet.breakpoint).abs() < 1e-6 {
            continue;
        }
        n += 1;
        match map.first_return(x).map_err(|e| e.to_string())? {
            FirstReturn::Regular { x: y, steps } => {
                let err = (y - iet.apply(x)).abs();
                ensure(err <= 1e-9 && steps == iet.return_time(x), || {
                    format!("x = {x}: return {y} after {steps} bounces")
                })?;
                worst = worst.max(err);
            }
            FirstReturn::Singular { step, hit } => {
                return Err(format!("x = {x}: vertex {} at bounce {step}", hit.vertex))
            }
        }
    }
    Ok(worst)
}

fn random_state(b: &Billiard, rng: &mut StdRng) -> PhaseState {
    loop {
        let side = Side::ALL[rng.gen_range(0..3)];
        let len = b.params().side_length(side);
        let s = PhaseState::new(
            side,
            rng.gen_range(1e-6..std::f64::consts::PI - 1e-6),
            rng.gen_range(1e-6..len - 1e-6),
        );
        if b.is_regular(&s) {
            return s;
        }
    }
}

fn stepper_suite(b: &Billiard, samples: usize, rng: &mut StdRng) -> SuiteOutcome {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let s = random_state(b, rng);
        let geo = b.step_geometric(s).map_err(|e| format!("{s:?}: {e}"))?;
        match (b.step_algebraic(s), geo) {
            (StepResult::Regular { state: p, .. }, StepResult::Regular { state: q, .. }) => {
                ensure(p.side == q.side, || {
                    format!("{s:?}: sides {} vs {}", p.side, q.side)
                })?;
                worst = worst.max((p.phi - q.phi).abs()).max((p.x - q.x).abs());
            }
            (StepResult::Singular(_), StepResult::Singular(_)) => {}
            (p, q) => return Err(format!("{s:?}: {p:?} vs {q:?}")),
        }
    }
    ensure(worst <= 1e-10, || format!("deviation {worst:e}"))?;
    Ok(worst)
}

fn symmetry_suite(b: &Billiard, rng: &mut StdRng) -> SuiteOutcome {
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 20 {
        let orbit = b
            .iterate(random_state(b, rng), 20, Stepper::Algebraic)
            .map_err(|e| e.to_string())?;
        if orbit.terminated_singular() {
            continue;
        }
        done += 1;
        let img = b.symmetry_image(&orbit).map_err(|e| e.to_string())?;
        worst = worst.max(img.max_step_residual(b.params()));
        let back = b.symmetry_image(&img).map_err(|e| e.to_string())?;
        ensure(back.sides() == orbit.sides(), || {
            "double image changes sides".into()
        })?;
    }
    ensure(worst <= 1e-10, || format!("residual {worst:e}"))?;
    Ok(worst)
}

fn check_angle(alpha: f64, samples: usize, seed: u64, tol: Tolerances) -> AngleResult {
    let mut rng = StdRng::seed_from_u64(seed ^ alpha.to_bits());
    let mut suites = vec![record("angles", angles_suite(alpha))];
    match Billiard::new(alpha) {
        Ok(b) => {
            let b = b.with_tolerances(tol);
            suites.push(record("diagonal", diagonal_suite(&b)));
            let ten = ten_cylinder(alpha).map_err(|e| e.to_string());
            suites.push(record(
                "ten_cylinder",
                ten.and_then(|t| template_suite(&b, &t, &mut rng)),
            ));
            let four = four_cylinder(alpha).map_err(|e| e.to_string());
            suites.push(record(
                "four_cylinder",
                four.and_then(|t| template_suite(&b, &t, &mut rng)),
            ));
            suites.push(record("conjugacy", conjugacy_suite(&b, samples, &mut rng)));
            suites.push(record("steppers", stepper_suite(&b, samples, &mut rng)));
            suites.push(record("symmetry", symmetry_suite(&b, &mut rng)));
        }
        Err(e) => suites.push(record("billiard", Err(e.to_string()))),
    }
    AngleResult { alpha, suites }
}

pub fn run(
    grid: &[f64],
    samples: usize,
    seed: u64,
    tol: Tolerances,
    json: Option<&Path>,
) -> Result<(), CliError> {
    let results: Vec<AngleResult> = grid
        .par_iter()
        .map(|&alpha| check_angle(alpha, samples, seed, tol))
        .collect();
    for r in &results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        let names: Vec<String> = r
            .suites
            .iter()
            .map(|s| format!("{}={}", s.suite, if s.passed { "ok" } else { "FAIL" }))
            .collect();
        println!("{status} alpha={:.12} {}", r.alpha, names.join(" "));
    }
    let failed: Vec<&AngleResult> = results.iter().filter(|r| !r.passed()).collect();
    println!(
        "{} of {} angles passed",
        results.len() - failed.len(),
        results.len()
    );
    if let Some(path) = json {
        let text = tribilliard_core::export::to_json_pretty(&results)?;
        write_atomic(path, text.as_bytes())?;
    }
    match failed.first() {
        None => Ok(()),
        Some(r) => {
            let s = r
                .suites
                .iter()
                .find(|s| !s.passed)
                .expect("failed angle has a failed suite");
            Err(CliError::Check(format!(
                "alpha = {}: suite {} failed: {}",
                r.alpha,
                s.suite,
                s.failure.as_deref().unwrap_or("")
            )))
        }
    }
}
