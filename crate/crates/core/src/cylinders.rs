//! Explicit orbit families in the induction direction.
//!
//! Every orbit leaving the base at `phi_star` from an offset `delta` follows one
//! of two fixed side sequences: `1,2,3,1,3,1,2,1,2,3,1` for `delta` in
//! `(0, x_d)` and `1,2,1,3,1` for `delta` in `(x_d, 1)`. Along either sequence
//! each bounce position is affine in `delta`, so a template stores one
//! `(offset, slope)` pair per step. The second half of each sequence is the
//! mirrored, time-reversed first half evaluated at a reflected offset.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::angles::AngleReport;
use crate::billiard::{map_residual, Billiard, Frame, MoveDir, Orbit, PhaseState, Stepper};
use crate::error::{domain, Error, Result};
use crate::geometry::{Side, TriangleParams, Vec2};

/// `delta ↦ offset + slope * delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Affine {
    pub offset: f64,
    pub slope: f64,
}

impl Affine {
    pub const fn new(offset: f64, slope: f64) -> Self {
        Self { offset, slope }
    }

    pub const fn constant(c: f64) -> Self {
        Self::new(c, 0.0)
    }

    pub const fn identity() -> Self {
        Self::new(0.0, 1.0)
    }

    pub fn eval(self, delta: f64) -> f64 {
        self.offset + self.slope * delta
    }

    /// `delta ↦ self(c - delta)`.
    pub fn reflect_argument(self, c: f64) -> Self {
        Self::new(self.offset + self.slope * c, -self.slope)
    }
}

impl Add for Affine {
    type Output = Affine;
    fn add(self, rhs: Affine) -> Affine {
        Affine::new(self.offset + rhs.offset, self.slope + rhs.slope)
    }
}

impl Sub for Affine {
    type Output = Affine;
    fn sub(self, rhs: Affine) -> Affine {
        Affine::new(self.offset - rhs.offset, self.slope - rhs.slope)
    }
}

impl Mul<f64> for Affine {
    type Output = Affine;
    fn mul(self, rhs: f64) -> Affine {
        Affine::new(self.offset * rhs, self.slope * rhs)
    }
}

impl Neg for Affine {
    type Output = Affine;
    fn neg(self) -> Affine {
        Affine::new(-self.offset, -self.slope)
    }
}

/// A recurrent cylinder: per-step sides, angles and affine coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderTemplate {
    pub alpha: f64,
    pub phi_star: f64,
    pub sides: Vec<Side>,
    pub angles: Vec<f64>,
    pub coords: Vec<Affine>,
    /// Open interval of admissible base offsets.
    pub delta_range: (f64, f64),
    pub return_length: usize,
}

impl CylinderTemplate {
    /// For every template the return coordinate is `delta + return_shift`.
    pub fn return_shift(&self) -> f64 {
        self.coords[self.return_length].offset
    }

    pub fn contains(&self, delta: f64, margin: f64) -> bool {
        delta > self.delta_range.0 + margin && delta < self.delta_range.1 - margin
    }

    pub fn state(&self, t: usize, delta: f64) -> PhaseState {
        PhaseState::new(self.sides[t], self.angles[t], self.coords[t].eval(delta))
    }

    pub fn states(&self, delta: f64) -> Vec<PhaseState> {
        (0..=self.return_length)
            .map(|t| self.state(t, delta))
            .collect()
    }

    pub fn orbit(&self, delta: f64) -> Result<Orbit> {
        Orbit::from_states(self.states(delta))
    }

    /// Largest deviation of the template states from the bounce recurrence.
    pub fn recurrence_residual(&self, params: &TriangleParams, delta: f64) -> f64 {
        let states = self.states(delta);
        states
            .windows(2)
            .map(|w| match MoveDir::between(w[0].side, w[1].side) {
                Some(dir) => map_residual(params, w[0], w[1], dir),
                None => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    /// Smallest distance from a template coordinate to the ends of its side.
    pub fn interior_margin(&self, params: &TriangleParams, delta: f64) -> f64 {
        self.states(delta)
            .iter()
            .map(|s| s.x.min(params.side_length(s.side) - s.x))
            .fold(f64::INFINITY, f64::min)
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    num.sin() / den.sin()
}

/// Base coordinate `xi_t(delta)` of the length-5 diagonal sequence.
fn diagonal_coords(leg: f64, psi: &[f64; 6]) -> [Affine; 6] {
    let one_minus = Affine::new(1.0, -1.0);
    let xi1 = one_minus * ratio(psi[0], psi[1]);
    let xi2 = Affine::constant(leg * ratio(psi[1], psi[2])) - one_minus * ratio(psi[0], psi[2]);
    let xi3 = Affine::constant(leg * ratio(psi[2], psi[3]) - leg * ratio(psi[1], psi[3]))
        + one_minus * ratio(psi[0], psi[3]);
    let xi4 = Affine::constant(leg - leg * ratio(psi[2], psi[4]) + leg * ratio(psi[1], psi[4]))
        - one_minus * ratio(psi[0], psi[4]);
    let xi5 = Affine::constant(leg * ratio(psi[2], psi[5]) - leg * ratio(psi[1], psi[5]))
        + one_minus * ratio(psi[0], psi[5]);
    [Affine::identity(), xi1, xi2, xi3, xi4, xi5]
}

fn four_coords(theta: &[f64; 3]) -> [Affine; 3] {
    let one_minus = Affine::new(1.0, -1.0);
    [
        Affine::identity(),
        one_minus * ratio(theta[0], theta[1]),
        Affine::constant(1.0) - one_minus * ratio(theta[0], theta[2]),
    ]
}

pub const DIAGONAL_SIDES: [Side; 6] = [
    Side::Base,
    Side::Right,
    Side::Left,
    Side::Base,
    Side::Left,
    Side::Base,
];

pub const FOUR_HALF_SIDES: [Side; 3] = [Side::Base, Side::Right, Side::Base];

/// Extends a half sequence `0..=h` to a full one of length `2h` by the mirror rule
/// `k_t = adjoint(m_{2h-t})`, `x_t = s - xi_{2h-t}(c - delta)`.
fn mirror_extend(
    params: &TriangleParams,
    sides: &[Side],
    angles: &[f64],
    coords: &[Affine],
    c: f64,
) -> (Vec<Side>, Vec<f64>, Vec<Affine>) {
    let h = sides.len() - 1;
    let mut out_sides = sides.to_vec();
    let mut out_angles = angles.to_vec();
    let mut out_coords = coords.to_vec();
    for t in h + 1..=2 * h {
        let src = 2 * h - t;
        let side = sides[src].adjoint();
        out_sides.push(side);
        out_angles.push(angles[src]);
        out_coords
            .push(Affine::constant(params.side_length(side)) - coords[src].reflect_argument(c));
    }
    (out_sides, out_angles, out_coords)
}

/// The 10-recurrent cylinder over `(0, x_d)`.
pub fn ten_cylinder(alpha: f64) -> Result<CylinderTemplate> {
    let report = AngleReport::new(alpha)?;
    let params = TriangleParams::new(alpha)?;
    let psi = report.angles.psi;
    let xi = diagonal_coords(params.leg(), &psi);
    let (sides, angles, coords) = mirror_extend(&params, &DIAGONAL_SIDES, &psi, &xi, report.x_d);
    Ok(CylinderTemplate {
        alpha,
        phi_star: report.phi_star,
        sides,
        angles,
        coords,
        delta_range: (0.0, report.x_d),
        return_length: 10,
    })
}

/// The 4-recurrent cylinder over `(x_d, 1)`.
pub fn four_cylinder(alpha: f64) -> Result<CylinderTemplate> {
    let report = AngleReport::new(alpha)?;
    let params = TriangleParams::new(alpha)?;
    let theta = report.angles.theta;
    let eta = four_coords(&theta);
    let (sides, angles, coords) =
        mirror_extend(&params, &FOUR_HALF_SIDES, &theta, &eta, 1.0 + report.x_d);
    Ok(CylinderTemplate {
        alpha,
        phi_star: report.phi_star,
        sides,
        angles,
        coords,
        delta_range: (report.x_d, 1.0),
        return_length: 4,
    })
}

/// The length-5 orbit from the left base vertex to the right base vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalRecord {
    pub alpha: f64,
    /// `[m_t, psi_t, xi_t(0)]` for `t = 0..=5`.
    pub states: Vec<PhaseState>,
    pub starts_at_vertex: bool,
    pub ends_at_vertex: bool,
}

impl DiagonalRecord {
    /// `|xi_5(0) - 1|`.
    pub fn closure_residual(&self) -> f64 {
        (self.states[5].x - 1.0).abs()
    }

    pub fn interior_ok(&self, params: &TriangleParams) -> bool {
        self.states[1..5]
            .iter()
            .all(|s| s.x > 0.0 && s.x < params.side_length(s.side))
    }

    pub fn angles_ok(&self) -> bool {
        self.states.iter().all(|s| s.phi > 0.0 && s.phi < PI)
    }

    pub fn to_orbit(&self) -> Orbit {
        Orbit::from_states(self.states.clone()).expect("diagonal side sequence alternates")
    }
}

const DIAGONAL_CLOSURE_TOLERANCE: f64 = 1e-12;

pub fn generalized_diagonal(alpha: f64) -> Result<DiagonalRecord> {
    let report = AngleReport::new(alpha)?;
    let params = TriangleParams::new(alpha)?;
    let psi = report.angles.psi;
    let xi = diagonal_coords(params.leg(), &psi);
    let states: Vec<PhaseState> = (0..6)
        .map(|t| PhaseState::new(DIAGONAL_SIDES[t], psi[t], xi[t].eval(0.0)))
        .collect();
    Ok(DiagonalRecord {
        alpha,
        starts_at_vertex: states[0].x == 0.0,
        ends_at_vertex: (states[5].x - 1.0).abs() <= DIAGONAL_CLOSURE_TOLERANCE,
        states,
    })
}

/// Deviations of a stepped orbit from a template.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplateCheck {
    pub stepper: Stepper,
    pub delta: f64,
    pub max_angle_deviation: f64,
    pub max_coordinate_deviation: f64,
    pub return_state: PhaseState,
}

const TEMPLATE_ANGLE_TOLERANCE: f64 = 1e-10;

/// Runs `stepper` from `[1, phi_star, delta]` and compares with the template step
/// by step, failing at the first divergent step.
pub fn verify_template(
    billiard: &Billiard,
    template: &CylinderTemplate,
    delta: f64,
    stepper: Stepper,
) -> Result<TemplateCheck> {
    let tol = billiard.tolerances();
    if !template.contains(delta, tol.delta_margin) {
        return Err(domain(
            "delta",
            delta,
            format!(
                "{} < delta < {} with margin {:e}",
                template.delta_range.0, template.delta_range.1, tol.delta_margin
            ),
        ));
    }
    let start = PhaseState::new(Side::Base, template.phi_star, delta);
    let orbit = billiard.iterate(start, template.return_length, stepper)?;
    let mut max_angle: f64 = 0.0;
    let mut max_coord: f64 = 0.0;
    for (t, got) in orbit.states().iter().enumerate() {
        let want = template.state(t, delta);
        if got.side != want.side {
            return Err(Error::TemplateMismatch {
                step: t,
                detail: format!(
                    "{stepper} stepper landed on side {}, template expects {}",
                    got.side, want.side
                ),
            });
        }
        let da = (got.phi - want.phi).abs();
        let dx = (got.x - want.x).abs();
        if !(da <= TEMPLATE_ANGLE_TOLERANCE) || !(dx <= tol.coordinate) {
            return Err(Error::TemplateMismatch {
                step: t,
                detail: format!("{stepper} stepper deviates by angle {da:e}, coordinate {dx:e}"),
            });
        }
        max_angle = max_angle.max(da);
        max_coord = max_coord.max(dx);
    }
    if orbit.steps() < template.return_length {
        let hit = orbit.singular_hit();
        return Err(Error::TemplateMismatch {
            step: orbit.steps() + 1,
            detail: format!("{stepper} stepper hit a vertex: {hit:?}"),
        });
    }
    Ok(TemplateCheck {
        stepper,
        delta,
        max_angle_deviation: max_angle,
        max_coordinate_deviation: max_coord,
        return_state: orbit.last(),
    })
}

/// Both steppers; the geometric one decides pass or fail.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTemplateCheck {
    pub geometric: TemplateCheck,
    pub algebraic: Result<TemplateCheck, String>,
}

impl DualTemplateCheck {
    pub fn steppers_agree(&self) -> bool {
        self.algebraic.is_ok()
    }
}

pub fn verify_template_both(
    billiard: &Billiard,
    template: &CylinderTemplate,
    delta: f64,
) -> Result<DualTemplateCheck> {
    let geometric = verify_template(billiard, template, delta, Stepper::Geometric)?;
    let algebraic =
        verify_template(billiard, template, delta, Stepper::Algebraic).map_err(|e| e.to_string());
    Ok(DualTemplateCheck {
        geometric,
        algebraic,
    })
}

/// Unfolded picture of a cylinder: its frame chain and the parallelogram swept
/// by the chords for offsets across `delta_range`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderStrip {
    pub return_length: usize,
    pub frames: Vec<Frame>,
    /// Start at the low end, start at the high end, return at the high end,
    /// return at the low end.
    pub corners: [Vec2; 4],
}

pub fn cylinder_strip(billiard: &Billiard, template: &CylinderTemplate) -> CylinderStrip {
    let params = billiard.params();
    let frames = billiard.unfold_frames(&template.sides);
    let (lo, hi) = template.delta_range;
    let first = &frames[0];
    let last = &frames[template.return_length];
    let back = template.coords[template.return_length];
    CylinderStrip {
        return_length: template.return_length,
        corners: [
            first.point(params, Side::Base, lo),
            first.point(params, Side::Base, hi),
            last.point(params, Side::Base, back.eval(hi)),
            last.point(params, Side::Base, back.eval(lo)),
        ],
        frames,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::{admissible_grid, phi_star};

    fn reference_alpha() -> f64 {
        PI * 3f64.sqrt() / 6.0
    }

    /// Independent route: push `(offset, slope)` pairs through the bounce
    /// recurrence itself instead of the closed forms.
    fn formal_recurrence(params: &TriangleParams, sides: &[Side], angles: &[f64]) -> Vec<Affine> {
        let mut out = vec![Affine::identity()];
        for t in 0..sides.len() - 1 {
            let prev = out[t];
            let (k, next) = (sides[t], sides[t + 1]);
            let r = angles[t].sin() / angles[t + 1].sin();
            let step = match MoveDir::between(k, next).unwrap() {
                MoveDir::Ccw => (Affine::constant(params.side_length(k)) - prev) * r,
                MoveDir::Cw => Affine::constant(params.side_length(next)) - prev * r,
            };
            out.push(step);
        }
        out
    }

    #[test]
    fn first_angles_and_sides() {
        let alpha = reference_alpha();
        let t = ten_cylinder(alpha).unwrap();
        let phi = phi_star(alpha).unwrap();
        assert_eq!(t.angles[0], phi);
        assert!((t.angles[1] - (PI - alpha - phi)).abs() < 1e-15);
        assert_eq!(t.angles[10], phi);
        let numbers: Vec<u8> = t.sides.iter().map(|s| s.number()).collect();
        assert_eq!(numbers, [1, 2, 3, 1, 3, 1, 2, 1, 2, 3, 1]);
        let f = four_cylinder(alpha).unwrap();
        let numbers: Vec<u8> = f.sides.iter().map(|s| s.number()).collect();
        assert_eq!(numbers, [1, 2, 1, 3, 1]);
        assert_eq!(f.angles[4], phi);
    }

    #[test]
    fn return_coordinates_are_translations() {
        for alpha in admissible_grid(25, 1e-3) {
            let r = AngleReport::new(alpha).unwrap();
            let t = ten_cylinder(alpha).unwrap();
            let back = t.coords[10];
            assert!((back.slope - 1.0).abs() < 1e-12);
            assert!((back.offset - (1.0 - r.x_d)).abs() < 1e-12);
            let f = four_cylinder(alpha).unwrap();
            let back = f.coords[4];
            assert!((back.slope - 1.0).abs() < 1e-12);
            assert!((back.offset + r.x_d).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_match_formal_recurrence() {
        for alpha in admissible_grid(25, 1e-3) {
            let params = TriangleParams::new(alpha).unwrap();
            for template in [ten_cylinder(alpha).unwrap(), four_cylinder(alpha).unwrap()] {
                let formal = formal_recurrence(&params, &template.sides, &template.angles);
                for (a, b) in template.coords.iter().zip(&formal) {
                    // two points determine an affine map
                    for delta in [0.0, 1.0] {
                        let scale = b.slope.abs().max(1.0);
                        assert!(
                            (a.eval(delta) - b.eval(delta)).abs() < 1e-10 * scale,
                            "{alpha}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn slopes_follow_sine_ratios() {
        let t = ten_cylinder(reference_alpha()).unwrap();
        let psi0 = t.angles[0].sin();
        for step in 0..=5 {
            let expect = psi0 / t.angles[step].sin();
            let sign = if step % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                (t.coords[step].slope - sign * expect).abs() < 1e-12,
                "{step}"
            );
        }
    }

    #[test]
    fn templates_are_interior_and_satisfy_recurrence() {
        for alpha in admissible_grid(25, 1e-3) {
            let params = TriangleParams::new(alpha).unwrap();
            for template in [ten_cylinder(alpha).unwrap(), four_cylinder(alpha).unwrap()] {
                let (lo, hi) = template.delta_range;
                for i in 1..20 {
                    let delta = lo + (hi - lo) * f64::from(i) / 20.0;
                    assert!(template.recurrence_residual(&params, delta) < 1e-12);
                    assert!(template.interior_margin(&params, delta) > 0.0);
                }
            }
        }
    }

    #[test]
    fn singular_boundary_offsets() {
        let alpha = reference_alpha();
        let params = TriangleParams::new(alpha).unwrap();
        let r = AngleReport::new(alpha).unwrap();
        let t = ten_cylinder(alpha).unwrap();
        assert!((t.coords[2].eval(r.x_d) - params.leg()).abs() < 1e-12);
        assert!(t.coords[3].eval(r.x_d).abs() < 1e-12);
        assert!((t.coords[4].eval(r.x_d) - params.leg()).abs() < 1e-12);
        assert!(t.coords[5].eval(r.x_d).abs() < 1e-12);
        let f = four_cylinder(alpha).unwrap();
        assert!(f.coords[2].eval(r.x_d).abs() < 1e-12);
        assert!((f.coords[2].eval(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn middle_state_is_shared_by_both_halves() {
        // xi_5(delta) = 1 - xi_5(x_d - delta)
        let alpha = reference_alpha();
        let params = TriangleParams::new(alpha).unwrap();
        let psi = AngleReport::new(alpha).unwrap().angles.psi;
        let xi = diagonal_coords(params.leg(), &psi);
        let r = AngleReport::new(alpha).unwrap();
        for delta in [0.01, 0.05, 0.1] {
            assert!((xi[5].eval(delta) - (1.0 - xi[5].eval(r.x_d - delta))).abs() < 1e-12);
        }
    }

    #[test]
    fn mirror_half_is_symmetry_image() {
        for alpha in admissible_grid(10, 1e-3) {
            let b = Billiard::new(alpha).unwrap();
            let t = ten_cylinder(alpha).unwrap();
            let f = four_cylinder(alpha).unwrap();
            for (template, half, c) in [
                (&t, 5usize, t.delta_range.1),
                (&f, 2, 1.0 + f.delta_range.0),
            ] {
                let (lo, hi) = template.delta_range;
                let delta = lo + 0.37 * (hi - lo);
                let first =
                    Orbit::from_states(template.states(c - delta)[..=half].to_vec()).unwrap();
                let image = b.symmetry_image(&first).unwrap();
                let full = template.states(delta);
                for (got, want) in image.states().iter().zip(&full[half..]) {
                    assert_eq!(got.side, want.side);
                    assert!((got.phi - want.phi).abs() < 1e-12);
                    assert!((got.x - want.x).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn diagonal_closes_at_vertex() {
        for alpha in admissible_grid(25, 1e-3) {
            let params = TriangleParams::new(alpha).unwrap();
            let d = generalized_diagonal(alpha).unwrap();
            assert!(d.starts_at_vertex && d.ends_at_vertex);
            assert!(d.closure_residual() <= 1e-12);
            assert!(d.interior_ok(&params));
            assert!(d.angles_ok());
        }
    }

    #[test]
    fn diagonal_sine_identity_on_grid() {
        for alpha in admissible_grid(50, 1e-3) {
            let psi = AngleReport::new(alpha).unwrap().angles.psi;
            let leg = 1.0 / (2.0 * alpha.cos());
            assert!(psi[0].sin() < leg * psi[1].sin());
        }
    }

    #[test]
    fn footprints_partition_base() {
        let alpha = reference_alpha();
        let t = ten_cylinder(alpha).unwrap();
        let f = four_cylinder(alpha).unwrap();
        assert_eq!(t.delta_range.0, 0.0);
        assert_eq!(t.delta_range.1, f.delta_range.0);
        assert_eq!(f.delta_range.1, 1.0);
    }

    #[test]
    fn verify_both_cylinders() {
        let alpha = reference_alpha();
        let b = Billiard::new(alpha).unwrap();
        let t = ten_cylinder(alpha).unwrap();
        let chk = verify_template(&b, &t, t.delta_range.1 / 2.0, Stepper::Geometric).unwrap();
        assert!(chk.max_coordinate_deviation <= 1e-9);
        let f = four_cylinder(alpha).unwrap();
        let mid = 0.5 * (f.delta_range.0 + 1.0);
        let chk = verify_template_both(&b, &f, mid).unwrap();
        assert!(chk.steppers_agree());
        assert_eq!(chk.geometric.return_state.side, Side::Base);
        assert!((chk.geometric.return_state.phi - f.phi_star).abs() < 1e-10);
        assert!((chk.geometric.return_state.x - (mid - f.delta_range.0)).abs() < 1e-9);
    }

    #[test]
    fn verify_rejects_boundary_offset() {
        let alpha = reference_alpha();
        let b = Billiard::new(alpha).unwrap();
        let t = ten_cylinder(alpha).unwrap();
        let err = verify_template(&b, &t, t.delta_range.1, Stepper::Geometric).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn verify_reports_first_divergent_step() {
        let alpha = reference_alpha();
        let b = Billiard::new(alpha).unwrap();
        let mut t = ten_cylinder(alpha).unwrap();
        t.sides[3] = Side::Right;
        match verify_template(&b, &t, 0.05, Stepper::Algebraic) {
            Err(Error::TemplateMismatch { step, .. }) => assert_eq!(step, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn strip_corners_are_parallel() {
        let alpha = reference_alpha();
        let b = Billiard::new(alpha).unwrap();
        for template in [ten_cylinder(alpha).unwrap(), four_cylinder(alpha).unwrap()] {
            let strip = cylinder_strip(&b, &template);
            let [a, bb, c, d] = strip.corners;
            let u = (d - a).normalized();
            let v = (c - bb).normalized();
            assert!(u.cross(v).abs() < 1e-10);
            let dir = Vec2::new(template.phi_star.cos(), template.phi_star.sin());
            assert!(u.cross(dir).abs() < 1e-10);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(ten_cylinder(0.8).is_err());
        assert!(four_cylinder(1.0).is_err());
        assert!(generalized_diagonal(0.5).is_err());
    }
}
