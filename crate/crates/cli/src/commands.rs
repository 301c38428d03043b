use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use tribilliard_core::angles::{ordering_report, OrderingReport};
use tribilliard_core::export::{
    read_trajectory, render_trajectory, render_unfolding, replay_trajectory, to_json_pretty,
    trajectory_csv, SvgStyle, UnfoldingFigure,
};
use tribilliard_core::induced::{
    chords_entering, exclusion_triangle, gap_stats, max_circular_gap, FirstReturn, IetSpec,
};
use tribilliard_core::{
    generalized_diagonal, rationality_probe, AngleReport, Billiard, InducedMap, PhaseState,
    RationalityVerdict, RotationEstimate, Side, Stepper, Tolerances,
};

use crate::config::RunConfig;
use crate::output::{emit, write_atomic};
use crate::CliError;

const REPLAY_TOLERANCE: f64 = 1e-9;
const RETURN_TOLERANCE: f64 = 1e-9;

#[derive(Serialize)]
struct AnglesOut<'a> {
    #[serde(flatten)]
    report: &'a AngleReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    inequalities: Option<OrderingReport>,
}

pub fn angles(alpha: f64, inequalities: bool, out: Option<&Path>) -> Result<(), CliError> {
    let report = AngleReport::new(alpha)?;
    let inequalities = if inequalities {
        Some(ordering_report(alpha, report.phi_star)?)
    } else {
        None
    };
    let json = to_json_pretty(&AnglesOut {
        report: &report,
        inequalities,
    })?;
    emit(out, &json)
}

pub fn diag(alpha: f64, json: bool) -> Result<(), CliError> {
    let d = generalized_diagonal(alpha)?;
    if json {
        return emit(None, &to_json_pretty(&d)?);
    }
    let b = Billiard::new(alpha)?;
    let mut s = String::new();
    let _ = writeln!(s, "alpha = {alpha:.16}");
    let _ = writeln!(
        s,
        "{:>2} {:>4} {:>20} {:>20} {:>20}",
        "t", "side", "psi", "xi(0)", "side length"
    );
    for (t, st) in d.states.iter().enumerate() {
        let _ = writeln!(
            s,
            "{t:>2} {:>4} {:>20.16} {:>20.16} {:>20.16}",
            st.side.number(),
            st.phi,
            st.x,
            b.params().side_length(st.side)
        );
    }
    let _ = writeln!(
        s,
        "closure residual {:.3e}; starts at vertex {}; ends at vertex {}",
        d.closure_residual(),
        d.starts_at_vertex,
        d.ends_at_vertex
    );
    emit(None, &s)?;
    if d.starts_at_vertex && d.ends_at_vertex && d.interior_ok(b.params()) && d.angles_ok() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "diagonal invariants fail at alpha = {alpha}"
        )))
    }
}

pub fn simulate(cfg: &RunConfig, side: u8, replay: bool) -> Result<(), CliError> {
    let b = Billiard::new(cfg.alpha)?.with_tolerances(cfg.tolerances);
    let side = Side::from_number(side).map_err(|e| CliError::Usage(e.to_string()))?;
    let phi = match cfg.phi0 {
        Some(p) => p,
        None => AngleReport::new(cfg.alpha)?.phi_star,
    };
    let start = PhaseState::new(side, phi, cfg.x0);
    let orbit = b.iterate(start, cfg.steps, cfg.stepper)?;
    let csv = trajectory_csv(&b, &orbit)?;
    emit(cfg.csv.as_deref(), &csv)?;
    if let Some(path) = &cfg.svg {
        write_atomic(
            path,
            render_trajectory(&b, &orbit, &SvgStyle::default()).as_bytes(),
        )?;
    }
    if orbit.terminated_singular() {
        eprintln!(
            "tribilliard: orbit reached a vertex after {} of {} bounces",
            orbit.steps(),
            cfg.steps
        );
    }
    if replay {
        let text = match &cfg.csv {
            Some(p) => std::fs::read_to_string(p)?,
            None => csv,
        };
        let rows = read_trajectory(text.as_bytes())?;
        let dev = replay_trajectory(&b, &rows, cfg.stepper)?;
        if dev > REPLAY_TOLERANCE {
            return Err(CliError::Check(format!("replay deviates by {dev:e}")));
        }
        eprintln!("tribilliard: replay deviation {dev:.1e}");
    }
    Ok(())
}

pub struct InducedArgs {
    pub alpha: f64,
    pub x0: f64,
    pub returns: usize,
    pub samples: usize,
    pub q_max: u128,
    pub bounces: usize,
    pub stepper: Stepper,
    pub tolerances: Tolerances,
}

#[derive(Serialize)]
struct Sample {
    x: f64,
    returned: Option<f64>,
    predicted: f64,
    steps: Option<usize>,
    error: Option<f64>,
}

#[derive(Serialize)]
struct Margins {
    bounces: usize,
    epsilon: f64,
    min_margin_side2: f64,
    min_margin_side3: f64,
    chords_entering_tip: usize,
    base_returns: usize,
    max_base_gap: f64,
}

#[derive(Serialize)]
struct InducedOut {
    alpha: f64,
    phi_star: f64,
    x_d: f64,
    omega: f64,
    stepper: Stepper,
    iet: IetSpec,
    samples: Vec<Sample>,
    rotation: RotationEstimate,
    rotation_within_bound: bool,
    probe: RationalityVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    margins: Option<Margins>,
}

pub fn induced(args: &InducedArgs, out: Option<&Path>) -> Result<(), CliError> {
    let b = Billiard::new(args.alpha)?.with_tolerances(args.tolerances);
    let map = InducedMap::with_billiard(b)?.with_stepper(args.stepper);
    let iet = map.iet();
    let mut failures = Vec::new();

    let mut samples = Vec::with_capacity(args.samples);
    for i in 0..args.samples {
        // midpoints avoid 0, 1 and, generically, x_d
        let x = (i as f64 + 0.5) / args.samples as f64;
        let predicted = iet.apply(x);
        let sample = match map.first_return(x) {
            Ok(FirstReturn::Regular { x: y, steps }) => {
                let error = (y - predicted).abs();
                if error > RETURN_TOLERANCE || steps != iet.return_time(x) {
                    failures.push(format!("return from x = {x}: {y} after {steps} bounces"));
                }
                Sample {
                    x,
                    returned: Some(y),
                    predicted,
                    steps: Some(steps),
                    error: Some(error),
                }
            }
            Ok(FirstReturn::Singular { step, hit }) => {
                failures.push(format!(
                    "return from x = {x} hit vertex {} at bounce {step}",
                    hit.vertex
                ));
                Sample {
                    x,
                    returned: None,
                    predicted,
                    steps: None,
                    error: None,
                }
            }
            // too close to the breakpoint to be sampled
            Err(_) => continue,
        };
        samples.push(sample);
    }

    let rotation = map.rotation_estimate(args.x0, args.returns)?;
    let bound = 10.0 / args.returns as f64;
    let rotation_within_bound = rotation.error_bound <= bound;
    if !rotation_within_bound {
        failures.push(format!(
            "|omega_hat - omega| = {:e} exceeds 10/N = {bound:e}",
            rotation.error_bound
        ));
    }
    let probe = rationality_probe(map.omega(), args.q_max)?;

    let margins = if args.bounces > 0 {
        let report = map.report();
        let orbit = map.orbit(args.x0, args.bounces)?;
        let b = map.billiard();
        let stats = gap_stats(
            b.params(),
            &orbit,
            report.phi_star,
            report.epsilon,
            b.tolerances().return_angle,
        );
        let tip = exclusion_triangle(b, report.epsilon);
        let entering = chords_entering(b, &orbit, &tip);
        if !stats.respects_epsilon(1e-9) || entering > 0 {
            failures.push(format!(
                "margins {:.3e} / {:.3e} below epsilon {:.3e} or {entering} chords in the tip",
                stats.min_margin_side2, stats.min_margin_side3, report.epsilon
            ));
        }
        Some(Margins {
            bounces: orbit.steps(),
            epsilon: report.epsilon,
            min_margin_side2: stats.min_margin_side2,
            min_margin_side3: stats.min_margin_side3,
            chords_entering_tip: entering,
            base_returns: stats.base_positions.len(),
            max_base_gap: max_circular_gap(&stats.base_positions),
        })
    } else {
        None
    };

    let body = InducedOut {
        alpha: args.alpha,
        phi_star: map.phi_star(),
        x_d: map.x_d(),
        omega: map.omega(),
        stepper: args.stepper,
        iet,
        samples,
        rotation,
        rotation_within_bound,
        probe,
        margins,
    };
    emit(out, &to_json_pretty(&body)?)?;
    match failures.first() {
        None => Ok(()),
        Some(first) => Err(CliError::Check(format!(
            "{} failures; first: {first}",
            failures.len()
        ))),
    }
}

#[derive(Serialize)]
struct UnfoldOut<'a> {
    #[serde(flatten)]
    figure: &'a UnfoldingFigure,
    diagonal_collinearity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    path_collinearity: Option<f64>,
}

pub fn unfold(
    alpha: f64,
    x0: f64,
    steps: usize,
    tol: Tolerances,
    svg: Option<&Path>,
    json: Option<&Path>,
) -> Result<(), CliError> {
    let b = Billiard::new(alpha)?.with_tolerances(tol);
    let orbit = if steps > 0 {
        let phi = AngleReport::new(alpha)?.phi_star;
        Some(b.iterate(
            PhaseState::new(Side::Base, phi, x0),
            steps,
            Stepper::Algebraic,
        )?)
    } else {
        None
    };
    let figure = UnfoldingFigure::build(&b, orbit.as_ref())?;
    let diagonal = b.unfold(&generalized_diagonal(alpha)?.to_orbit());
    let body = UnfoldOut {
        figure: &figure,
        diagonal_collinearity: diagonal.collinearity_residual(),
        path_collinearity: figure.path.as_ref().map(|p| p.collinearity_residual()),
    };
    let svg_text = render_unfolding(&figure, &SvgStyle::default());
    match (svg, json) {
        (None, None) => emit(None, &svg_text)?,
        _ => {
            if let Some(p) = svg {
                write_atomic(p, svg_text.as_bytes())?;
            }
            if let Some(p) = json {
                write_atomic(p, to_json_pretty(&body)?.as_bytes())?;
            }
        }
    }
    let col = body
        .path_collinearity
        .unwrap_or(0.0)
        .max(body.diagonal_collinearity);
    if col > 1e-9 {
        return Err(CliError::Check(format!(
            "unfolded chords deviate from a line by {col:e}"
        )));
    }
    Ok(())
}
