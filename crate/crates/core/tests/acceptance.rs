//! End-to-end acceptance checks, one line of output per criterion.
//!
//! Run with `cargo test -p tribilliard-core --test acceptance -- --nocapture`
//! to see the report.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::io::Write;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use tribilliard_core::angles::{
    admissible_grid, alpha_star, alpha_star_equation, linspace, phi_star, AngleReport, ALPHA_MAX,
};
use tribilliard_core::billiard::{Billiard, Orbit, PhaseState, StepResult, Stepper};
use tribilliard_core::cylinders::{
    generalized_diagonal, ten_cylinder, verify_template, DIAGONAL_SIDES,
};
use tribilliard_core::geometry::{Side, Vertex};
use tribilliard_core::induced::{
    chords_entering, exclusion_triangle, gap_stats, rationality_probe, FirstReturn, InducedMap,
    RationalityVerdict,
};

fn reference_alpha() -> f64 {
    PI * 3f64.sqrt() / 6.0
}

fn grid25() -> Vec<f64> {
    admissible_grid(25, 1e-3)
}

struct Outcome {
    ok: bool,
    detail: String,
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        ok: false,
        detail: detail.into(),
    }
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

/// Writes through the raw stdout handle so the report survives output capture.
fn report(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

/// Runs `body`, applies the time limit and prints the verdict line.
fn criterion(n: u32, name: &str, limit: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let out = body();
    let took = t0.elapsed();
    let in_time = took <= limit;
    let ok = out.ok && in_time;
    report(format!(
        "[{}] criterion {n:2} {name}: {} ({:.3} s, limit {:.3} s{})",
        if ok { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64(),
        limit.as_secs_f64(),
        if in_time { "" } else { ", over time" }
    ));
    ok
}

fn random_regular_state(rng: &mut StdRng, b: &Billiard) -> PhaseState {
    loop {
        let side = Side::ALL[rng.gen_range(0..3)];
        let len = b.params().side_length(side);
        let s = PhaseState::new(
            side,
            rng.gen_range(1e-6..PI - 1e-6),
            rng.gen_range(1e-6..len - 1e-6),
        );
        if b.is_regular(&s) {
            return s;
        }
    }
}

fn c1_phi_star() -> Outcome {
    match phi_star(reference_alpha()) {
        Ok(phi) => {
            let err = (phi - 0.732_925_2).abs();
            check(
                err <= 5e-7,
                format!("phi* = {phi:.10}, |phi* - 0.7329252| = {err:.2e}"),
            )
        }
        Err(e) => fail(e.to_string()),
    }
}

fn c2_alpha_star() -> Outcome {
    let a = alpha_star();
    let g = alpha_star_equation(a);
    let lo = alpha_star_equation(FRAC_PI_4);
    let hi = alpha_star_equation(ALPHA_MAX);
    let ok = a > FRAC_PI_4 && a < 2.0 * PI / 7.0 && g.abs() <= 1e-13 && lo < 0.0 && hi > 0.0;
    check(
        ok,
        format!(
            "alpha* = {a:.16}, |g| = {:.1e}, g(pi/4) = {lo:.3}, g(3pi/10) = {hi:.3}",
            g.abs()
        ),
    )
}

fn c3_diagonal() -> Outcome {
    let want_sides = [1, 2, 3, 1, 3, 1];
    let mut worst_close: f64 = 0.0;
    let mut worst_dev: f64 = 0.0;
    for alpha in grid25() {
        let d = match generalized_diagonal(alpha) {
            Ok(d) => d,
            Err(e) => return fail(format!("alpha = {alpha}: {e}")),
        };
        let params = *Billiard::new(alpha).unwrap().params();
        if d.states[0].x != 0.0
            || d.closure_residual() > 1e-12
            || !d.interior_ok(&params)
            || !d.angles_ok()
        {
            return fail(format!(
                "diagonal fails at alpha = {alpha}: closure {:.2e}",
                d.closure_residual()
            ));
        }
        worst_close = worst_close.max(d.closure_residual());

        let b = Billiard::new(alpha).unwrap();
        let delta = 1e-6;
        let phi = phi_star(alpha).unwrap();
        let orbit = match b.iterate(
            PhaseState::new(Side::Base, phi, delta),
            5,
            Stepper::Geometric,
        ) {
            Ok(o) => o,
            Err(e) => return fail(format!("alpha = {alpha}: {e}")),
        };
        let sides: Vec<u8> = orbit.sides().iter().map(|s| s.number()).collect();
        if sides != want_sides {
            return fail(format!("alpha = {alpha}: sides {sides:?}"));
        }
        // the perturbed orbit lives on the 10-cylinder; compare with its
        // template evaluated at delta
        let template = ten_cylinder(alpha).unwrap();
        for (t, s) in orbit.states().iter().enumerate() {
            let want = template.state(t, delta);
            worst_dev = worst_dev
                .max((s.x - want.x).abs())
                .max((s.phi - want.phi).abs());
        }
    }
    check(
        worst_dev <= 1e-5,
        format!("max closure {worst_close:.1e}, max deviation from template at delta=1e-6 {worst_dev:.1e}"),
    )
}

fn c4_conjugacy() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    let mut samples = 0usize;
    for alpha in grid25() {
        let map = InducedMap::new(alpha).unwrap();
        let (xd, omega) = (map.x_d(), map.omega());
        let closed = (3.0 * alpha).cos() / (2.0 * alpha.cos() * (4.0 * alpha).cos());
        if (closed - omega).abs() > 1e-12 {
            return fail(format!("omega mismatch at alpha = {alpha}"));
        }
        let mut n = 0;
        while n < 1000 {
            let x: f64 = rng.gen_range(0.0..1.0);
            if x < 1e-6 || (x - xd).abs() < 1e-6 || x > 1.0 - 1e-6 {
                continue;
            }
            n += 1;
            let (y, steps) = match map.first_return(x) {
                Ok(FirstReturn::Regular { x, steps }) => (x, steps),
                other => return fail(format!("alpha = {alpha}, x = {x}: {other:?}")),
            };
            let want = (x + omega).rem_euclid(1.0);
            let err = (y - want).abs().min(1.0 - (y - want).abs());
            let want_steps = if x < xd { 10 } else { 4 };
            if err > 1e-9 || steps != want_steps {
                return fail(format!(
                    "alpha = {alpha}, x = {x}: return {y} vs {want}, {steps} bounces"
                ));
            }
            worst = worst.max(err);
        }
        samples += n;
    }
    check(
        true,
        format!("{samples} returns, max |T(x) - (x + omega)| = {worst:.1e}"),
    )
}

fn c5_steppers() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut singular = 0usize;
    for alpha in grid25() {
        let b = Billiard::new(alpha).unwrap();
        for _ in 0..1000 {
            let s = random_regular_state(&mut rng, &b);
            let alg = b.step_algebraic(s);
            let geo = match b.step_geometric(s) {
                Ok(g) => g,
                Err(e) => return fail(format!("geometric step failed at {s:?}: {e}")),
            };
            match (alg, geo) {
                (
                    StepResult::Regular { state: a, dir: da },
                    StepResult::Regular { state: g, dir: dg },
                ) => {
                    if a.side != g.side || da != dg {
                        return fail(format!("side mismatch from {s:?}"));
                    }
                    worst = worst.max((a.phi - g.phi).abs()).max((a.x - g.x).abs());
                }
                (StepResult::Singular(_), StepResult::Singular(_)) => singular += 1,
                (a, g) => {
                    return fail(format!("classification differs from {s:?}: {a:?} vs {g:?}"))
                }
            }
        }
    }
    check(
        worst <= 1e-10,
        format!("25000 states, max deviation {worst:.1e}, {singular} singular on both"),
    )
}

fn c6_symmetry() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let b = Billiard::new(reference_alpha()).unwrap();
    let mut worst_res: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let s = random_regular_state(&mut rng, &b);
        let orbit = b.iterate(s, 20, Stepper::Algebraic).unwrap();
        if orbit.terminated_singular() || orbit.steps() < 20 {
            continue;
        }
        done += 1;
        let img = match b.symmetry_image(&orbit) {
            Ok(o) => o,
            Err(e) => return fail(e.to_string()),
        };
        worst_res = worst_res.max(img.max_step_residual(b.params()));
        let back = b.symmetry_image(&img).unwrap();
        if back.sides() != orbit.sides() || back.dirs() != orbit.dirs() {
            return fail("double image changes the side sequence");
        }
        for (p, q) in back.states().iter().zip(orbit.states()) {
            worst_inv = worst_inv.max((p.phi - q.phi).abs()).max((p.x - q.x).abs());
        }
    }
    check(
        worst_res <= 1e-10 && worst_inv <= 1e-14,
        format!(
            "100 orbits, max image residual {worst_res:.1e}, max |S(S(o)) - o| = {worst_inv:.1e}"
        ),
    )
}

fn c7_rotation() -> Outcome {
    let n = 100_000;
    let map = InducedMap::new(reference_alpha()).unwrap();
    let est = match map.rotation_estimate(FRAC_1_SQRT_2, n) {
        Ok(e) => e,
        Err(e) => return fail(e.to_string()),
    };
    let verdict = rationality_probe(map.omega(), 1_000_000).unwrap();
    let irrational = matches!(verdict, RationalityVerdict::LikelyIrrational { .. });
    check(
        est.error_bound <= 10.0 / n as f64 && irrational,
        format!(
            "omega_hat = {:.12}, |omega_hat - omega| = {:.1e}, probe: {verdict:?}",
            est.omega_hat, est.error_bound
        ),
    )
}

fn c8_gap() -> Outcome {
    let map = InducedMap::new(reference_alpha()).unwrap();
    let report = map.report();
    let eps = report.epsilon;
    let orbit = match map.orbit(FRAC_1_SQRT_2, 100_000) {
        Ok(o) => o,
        Err(e) => return fail(e.to_string()),
    };
    if orbit.steps() < 100_000 {
        return fail(format!(
            "orbit hit a vertex after {} bounces",
            orbit.steps()
        ));
    }
    let b = map.billiard();
    let stats = gap_stats(
        b.params(),
        &orbit,
        report.phi_star,
        eps,
        b.tolerances().return_angle,
    );
    let tri = exclusion_triangle(b, eps);
    let entering = chords_entering(b, &orbit, &tri);
    check(
        eps > 0.0 && stats.respects_epsilon(1e-9) && entering == 0,
        format!(
            "epsilon = {eps:.6}, min margins {:.6} / {:.6}, {entering} chords enter the tip",
            stats.min_margin_side2, stats.min_margin_side3
        ),
    )
}

fn c9_monotone() -> Outcome {
    let grid = linspace(alpha_star() + 1e-6, ALPHA_MAX - 1e-6, 100);
    let reports: Vec<AngleReport> = match grid.iter().map(|&a| AngleReport::new(a)).collect() {
        Ok(r) => r,
        Err(e) => return fail(format!("{e}")),
    };
    let d_omega: Vec<f64> = reports
        .windows(2)
        .map(|w| w[1].omega - w[0].omega)
        .collect();
    let omega_mono = d_omega.iter().all(|&d| d > 0.0) || d_omega.iter().all(|&d| d < 0.0);
    let phi_dec = reports.windows(2).all(|w| w[1].phi_star < w[0].phi_star);
    check(
        omega_mono && phi_dec,
        format!(
            "omega {:.6} -> {:.6}, phi* {:.6} -> {:.6}",
            reports[0].omega, reports[99].omega, reports[0].phi_star, reports[99].phi_star
        ),
    )
}

fn c10_unfolding() -> Outcome {
    let alpha = reference_alpha();
    let b = Billiard::new(alpha).unwrap();
    let map = InducedMap::new(alpha).unwrap();
    let orbit = map.orbit(FRAC_1_SQRT_2, 500).unwrap();
    let path = b.unfold(&orbit);
    let col = path.collinearity_residual();

    let diag = generalized_diagonal(alpha).unwrap();
    let dpath = b.unfold(&Orbit::from_states(diag.states.clone()).unwrap());
    let frames = b.unfold_frames(&DIAGONAL_SIDES);
    let v1 = frames[0].vertices[usize::from(Vertex::BaseLeft.number() - 1)];
    let v2 = frames[5].vertices[usize::from(Vertex::BaseRight.number() - 1)];
    let gap = (dpath.start().unwrap() - v1)
        .norm()
        .max((dpath.end().unwrap() - v2).norm());
    check(
        col <= 1e-9 && gap <= 1e-12 && orbit.steps() == 500,
        format!("500-bounce collinearity {col:.1e}, diagonal endpoint offset {gap:.1e}"),
    )
}

#[test]
fn acceptance() {
    let ms = Duration::from_millis;
    let results = [
        criterion(1, "phi* anchor", ms(1), c1_phi_star),
        criterion(2, "alpha* bracket", ms(1), c2_alpha_star),
        criterion(3, "generalised diagonal", ms(1_000), c3_diagonal),
        criterion(4, "first-return conjugacy", ms(30_000), c4_conjugacy),
        criterion(5, "stepper equivalence", ms(10_000), c5_steppers),
        criterion(6, "time-reversal symmetry", ms(5_000), c6_symmetry),
        criterion(7, "rotation number", ms(30_000), c7_rotation),
        criterion(8, "density gap", ms(60_000), c8_gap),
        criterion(9, "monotonicity", ms(1_000), c9_monotone),
        criterion(10, "unfolding straightness", ms(1_000), c10_unfolding),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    report(format!(
        "acceptance: {passed}/{} criteria passed",
        results.len()
    ));
    assert_eq!(passed, results.len(), "some acceptance criteria failed");
}

#[test]
fn template_verifier_agrees_with_criterion_3() {
    // same comparison through the library's own verifier
    for alpha in grid25() {
        let b = Billiard::new(alpha).unwrap();
        let t = ten_cylinder(alpha).unwrap();
        verify_template(&b, &t, 1e-6, Stepper::Geometric).unwrap();
    }
}
