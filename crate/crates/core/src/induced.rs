//! First return to the base at the induction angle.
//!
//! Launched from `[1, phi_star, x]`, an orbit comes back to the base at the same
//! angle after 10 bounces when `x < x_d` and after 4 when `x > x_d`, landing at
//! `x + omega mod 1`. This module measures that map with the ray-traced
//! stepper, estimates the rotation number from long runs, probes it for
//! rationality and collects the statistics that witness non-density.

use serde::Serialize;

use crate::angles::AngleReport;
use crate::billiard::{Billiard, Orbit, PhaseState, SingularHit, StepResult, Stepper};
use crate::error::{domain, Error, Result};
use crate::geometry::{Side, TriangleParams, Vec2};

/// No admissible orbit needs more bounces than this to come back.
const MAX_RETURN_STEPS: usize = 16;

/// Two-interval exchange on the base, predicted in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IetSpec {
    pub breakpoint: f64,
    /// Translation on `(0, breakpoint)` and on `(breakpoint, 1)`.
    pub translations: [f64; 2],
    pub return_times: [usize; 2],
    pub omega: f64,
}

impl IetSpec {
    pub fn apply(&self, x: f64) -> f64 {
        if x < self.breakpoint {
            x + self.translations[0]
        } else {
            x + self.translations[1]
        }
    }

    pub fn return_time(&self, x: f64) -> usize {
        if x < self.breakpoint {
            self.return_times[0]
        } else {
            self.return_times[1]
        }
    }
}

pub fn analytic_iet(alpha: f64) -> Result<IetSpec> {
    let report = AngleReport::new(alpha)?;
    Ok(IetSpec {
        breakpoint: report.x_d,
        translations: [1.0 - report.x_d, -report.x_d],
        return_times: [10, 4],
        omega: report.omega,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FirstReturn {
    Regular { x: f64, steps: usize },
    Singular { step: usize, hit: SingularHit },
}

impl FirstReturn {
    pub fn regular(self) -> Option<(f64, usize)> {
        match self {
            FirstReturn::Regular { x, steps } => Some((x, steps)),
            FirstReturn::Singular { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationEstimate {
    pub omega_hat: f64,
    pub n: usize,
    /// `|omega_hat - omega|` against the closed form.
    pub error_bound: f64,
    /// Partial quotients of `omega_hat`.
    pub cf: Vec<u64>,
}

/// Base positions visited by a run of first returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnRun {
    pub positions: Vec<f64>,
    pub steps: Vec<usize>,
}

/// The induced map for one base angle.
#[derive(Debug, Clone)]
pub struct InducedMap {
    billiard: Billiard,
    report: AngleReport,
    stepper: Stepper,
}

impl InducedMap {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_billiard(Billiard::new(alpha)?)
    }

    pub fn with_billiard(billiard: Billiard) -> Result<Self> {
        let report = AngleReport::new(billiard.alpha())?;
        Ok(Self {
            billiard,
            report,
            stepper: Stepper::Geometric,
        })
    }

    pub fn with_stepper(mut self, stepper: Stepper) -> Self {
        self.stepper = stepper;
        self
    }

    pub fn billiard(&self) -> &Billiard {
        &self.billiard
    }

    pub fn report(&self) -> &AngleReport {
        &self.report
    }

    pub fn phi_star(&self) -> f64 {
        self.report.phi_star
    }

    pub fn x_d(&self) -> f64 {
        self.report.x_d
    }

    pub fn omega(&self) -> f64 {
        self.report.omega
    }

    pub fn iet(&self) -> IetSpec {
        IetSpec {
            breakpoint: self.report.x_d,
            translations: [1.0 - self.report.x_d, -self.report.x_d],
            return_times: [10, 4],
            omega: self.report.omega,
        }
    }

    fn is_return(&self, s: &PhaseState) -> bool {
        s.side == Side::Base
            && (s.phi - self.report.phi_star).abs() <= self.billiard.tolerances().return_angle
    }

    /// Steps from `[1, phi_star, x]` until the base is hit again at `phi_star`.
    pub fn first_return(&self, x: f64) -> Result<FirstReturn> {
        let margin = self.billiard.tolerances().delta_margin;
        if !(x > 0.0 && x < 1.0) {
            return Err(domain("x", x, "0 < x < 1"));
        }
        if (x - self.report.x_d).abs() <= margin {
            return Err(domain("x", x, format!("|x - x_d| > {margin:e}")));
        }
        self.return_from(x)
    }

    fn return_from(&self, x: f64) -> Result<FirstReturn> {
        let mut cur = PhaseState::new(Side::Base, self.report.phi_star, x);
        for step in 1..=MAX_RETURN_STEPS {
            match self.billiard.step(cur, self.stepper)? {
                StepResult::Regular { state, .. } => {
                    if self.is_return(&state) {
                        return Ok(FirstReturn::Regular {
                            x: state.x,
                            steps: step,
                        });
                    }
                    cur = state;
                }
                StepResult::Singular(hit) => return Ok(FirstReturn::Singular { step, hit }),
            }
        }
        Err(Error::NoReturn {
            side: Side::Base,
            max_steps: MAX_RETURN_STEPS,
        })
    }

    /// `n` successive first returns from `x0`. Each return restarts at exactly
    /// `phi_star` from the landed position; a singular landing is an error.
    pub fn returns(&self, x0: f64, n: usize) -> Result<ReturnRun> {
        let mut positions = Vec::with_capacity(n + 1);
        let mut steps = Vec::with_capacity(n);
        positions.push(x0);
        let mut x = x0;
        for i in 0..n {
            let next = if i == 0 {
                self.first_return(x)?
            } else {
                self.return_from(x)?
            };
            match next {
                FirstReturn::Regular { x: nx, steps: s } => {
                    positions.push(nx);
                    steps.push(s);
                    x = nx;
                }
                FirstReturn::Singular { step, hit } => {
                    return Err(Error::Geometry(format!(
                        "return {i} from x = {x} hit vertex {} after {step} bounces",
                        hit.vertex
                    )))
                }
            }
        }
        Ok(ReturnRun { positions, steps })
    }

    /// Lifted average displacement over `n` returns: every 4-return wraps
    /// around once, so the lift advances by `x_n - x_0 + wraps`.
    pub fn rotation_estimate(&self, x0: f64, n: usize) -> Result<RotationEstimate> {
        if n == 0 {
            return Err(domain("n", 0.0, "n >= 1"));
        }
        let run = self.returns(x0, n)?;
        let wraps = run.positions.windows(2).filter(|w| w[1] < w[0]).count();
        let lift = run.positions[n] - run.positions[0] + wraps as f64;
        let omega_hat = lift / n as f64;
        Ok(RotationEstimate {
            omega_hat,
            n,
            error_bound: (omega_hat - self.report.omega).abs(),
            cf: continued_fraction(omega_hat, 24),
        })
    }

    /// Orbit of `bounces` billiard steps from `[1, phi_star, x0]`.
    pub fn orbit(&self, x0: f64, bounces: usize) -> Result<Orbit> {
        self.billiard.iterate(
            PhaseState::new(Side::Base, self.report.phi_star, x0),
            bounces,
            self.stepper,
        )
    }
}

/// Partial quotients of `x >= 0`, stopping once a convergent reproduces `x`
/// to within a few ulps.
pub fn continued_fraction(x: f64, max_terms: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (1.0f64, 0.0f64, 0.0f64, 1.0f64);
    let mut r = x;
    for _ in 0..max_terms {
        if !r.is_finite() || r < 0.0 || r >= u64::MAX as f64 {
            break;
        }
        let a = r.floor();
        out.push(a as u64);
        (p1, q1, p0, q0) = (p0, q0, a * p0 + p1, a * q0 + q1);
        let frac = r - a;
        if frac == 0.0 || (x - p0 / q0).abs() <= 4.0 * f64::EPSILON * x.abs() {
            break;
        }
        r = 1.0 / frac;
    }
    out
}

/// Convergents `p/q` of a continued fraction.
pub fn convergents(cf: &[u64]) -> Vec<(u128, u128)> {
    let (mut p0, mut q0, mut p1, mut q1) = (1u128, 0u128, 0u128, 1u128);
    let mut out = Vec::with_capacity(cf.len());
    for &a in cf {
        let a = u128::from(a);
        let (Some(p), Some(q)) = (
            a.checked_mul(p0).and_then(|v| v.checked_add(p1)),
            a.checked_mul(q0).and_then(|v| v.checked_add(q1)),
        ) else {
            break;
        };
        out.push((p, q));
        (p1, q1, p0, q0) = (p0, q0, p, q);
    }
    out
}

/// Heuristic verdict; double precision cannot decide membership in the rationals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum RationalityVerdict {
    /// Convergent with `q <= q_max` within [`RATIONAL_MATCH`].
    Rational { p: u128, q: u128, error: f64 },
    /// An unexpectedly good match exists, but only with `q_max < q <= MEANINGFUL_Q`.
    Inconclusive { p: u128, q: u128, error: f64 },
    /// No match with a denominator small enough to carry evidence.
    LikelyIrrational { best_q: u128, best_error: f64 },
}

/// Distance below which a convergent counts as equal to the probed value.
pub const RATIONAL_MATCH: f64 = 1e-14;

/// Beyond this denominator a generic real is matched within [`RATIONAL_MATCH`]
/// anyway, since `|x - p/q| < 1/q^2`.
pub const MEANINGFUL_Q: u128 = 10_000_000;

/// A convergent past `q_max` is only suspicious when `q^2 |x - p/q|` is this
/// small; generic reals sit near `1 / a_{n+1}` with modest partial quotients.
pub const SURPRISE: f64 = 1e-3;

pub fn rationality_probe(omega: f64, q_max: u128) -> Result<RationalityVerdict> {
    if !(omega > 0.0 && omega < 1.0) {
        return Err(domain("omega", omega, "0 < omega < 1"));
    }
    if q_max < 2 {
        return Err(domain("q_max", q_max as f64, "q_max >= 2"));
    }
    let mut best = (1u128, f64::INFINITY);
    for (p, q) in convergents(&continued_fraction(omega, 64)) {
        if q > MEANINGFUL_Q.max(q_max) {
            break;
        }
        let error = (omega - p as f64 / q as f64).abs();
        if error <= RATIONAL_MATCH {
            if q <= q_max {
                return Ok(RationalityVerdict::Rational { p, q, error });
            }
            if (q as f64).powi(2) * error <= SURPRISE {
                return Ok(RationalityVerdict::Inconclusive { p, q, error });
            }
        }
        if q <= q_max && error < best.1 {
            best = (q, error);
        }
    }
    Ok(RationalityVerdict::LikelyIrrational {
        best_q: best.0,
        best_error: best.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStats {
    /// Smallest `s_2 - x` over bounces on side 2.
    pub min_margin_side2: f64,
    /// Smallest `x` over bounces on side 3.
    pub min_margin_side3: f64,
    pub epsilon_ref: f64,
    /// Sorted base positions of bounces at the induction angle.
    pub base_positions: Vec<f64>,
}

impl GapStats {
    pub fn respects_epsilon(&self, slack: f64) -> bool {
        self.min_margin_side2 >= self.epsilon_ref - slack
            && self.min_margin_side3 >= self.epsilon_ref - slack
    }
}

pub fn gap_stats(
    params: &TriangleParams,
    orbit: &Orbit,
    phi_star: f64,
    epsilon: f64,
    angle_tol: f64,
) -> GapStats {
    let leg = params.leg();
    let mut m2 = f64::INFINITY;
    let mut m3 = f64::INFINITY;
    let mut base = Vec::new();
    for s in orbit.states() {
        match s.side {
            Side::Right => m2 = m2.min(leg - s.x),
            Side::Left => m3 = m3.min(s.x),
            Side::Base => {
                if (s.phi - phi_star).abs() <= angle_tol {
                    base.push(s.x);
                }
            }
        }
    }
    base.sort_by(f64::total_cmp);
    GapStats {
        min_margin_side2: m2,
        min_margin_side3: m3,
        epsilon_ref: epsilon,
        base_positions: base,
    }
}

/// Apex together with the points at arclength `epsilon` from it on both legs.
pub fn tip_triangle(
    params: &TriangleParams,
    apex: Vec2,
    right_foot: Vec2,
    epsilon: f64,
) -> [Vec2; 3] {
    let leg = params.leg();
    let t = epsilon / leg;
    // the legs are symmetric about x = apex.x
    let on_right = apex.lerp(right_foot, t);
    let on_left = Vec2::new(2.0 * apex.x - on_right.x, on_right.y);
    [on_left, on_right, apex]
}

/// Whether the segment `p..q` meets the interior of the counter-clockwise
/// triangle `tri`, shrunk by `slack`.
pub fn segment_enters_triangle(p: Vec2, q: Vec2, tri: &[Vec2; 3], slack: f64) -> bool {
    // Clip the parameter range against each inward half-plane.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let d = q - p;
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let e = b - a;
        let len = e.norm();
        // signed distance inside the edge, positive towards the interior
        let f0 = e.cross(p - a) / len - slack;
        let df = e.cross(d) / len;
        if df == 0.0 {
            if f0 <= 0.0 {
                return false;
            }
            continue;
        }
        let t = -f0 / df;
        if df > 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        if lo >= hi {
            return false;
        }
    }
    lo < hi
}

/// Number of chords of `orbit` that cross into `tri`.
pub fn chords_entering(billiard: &Billiard, orbit: &Orbit, tri: &[Vec2; 3]) -> usize {
    let emb = billiard.embedding();
    orbit
        .states()
        .windows(2)
        .filter(|w| {
            let p = emb.boundary_to_plane(w[0].boundary_point());
            let q = emb.boundary_to_plane(w[1].boundary_point());
            segment_enters_triangle(p, q, tri, 0.0)
        })
        .count()
}

/// Tip region of the triangle excluded by the margin `epsilon`.
pub fn exclusion_triangle(billiard: &Billiard, epsilon: f64) -> [Vec2; 3] {
    let emb = billiard.embedding();
    let (foot, apex) = emb.side_segment(Side::Right);
    tip_triangle(billiard.params(), apex, foot, epsilon)
}

/// Largest gap between circularly consecutive points of `sorted` in `[0, 1)`.
pub fn max_circular_gap(sorted: &[f64]) -> f64 {
    match sorted {
        [] => 1.0,
        [_] => 1.0,
        _ => {
            let inner = sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            inner.max(1.0 - sorted[sorted.len() - 1] + sorted[0])
        }
    }
}

/// Smallest gap between consecutive sorted points.
pub fn min_gap(sorted: &[f64]) -> f64 {
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Counts of positions per equal-width bin of `[0, 1]`.
pub fn coverage_histogram(positions: &[f64], bins: usize) -> Vec<usize> {
    let mut out = vec![0; bins];
    if bins == 0 {
        return out;
    }
    for &x in positions {
        let i = ((x * bins as f64).floor() as isize).clamp(0, bins as isize - 1) as usize;
        out[i] += 1;
    }
    out
}

/// `x + omega mod 1`.
pub fn rotate(x: f64, omega: f64) -> f64 {
    let y = x + omega;
    if y >= 1.0 {
        y - 1.0
    } else {
        y
    }
}

/// Synthetic rotation sequence, used as a control beside the billiard data.
pub fn rotation_orbit(x0: f64, omega: f64, n: usize) -> Vec<f64> {
    std::iter::successors(Some(x0), |&x| Some(rotate(x, omega)))
        .take(n + 1)
        .collect()
}
