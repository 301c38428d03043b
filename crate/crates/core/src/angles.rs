//! The induction direction and the quantities derived from it.
//!
//! `alpha_star` is the unique zero of `sin 7a - sin 3a + sin a` in
//! `(pi/4, 2pi/7)`. For base angles in `(alpha_star, 3pi/10)` the direction
//! `phi_star(alpha)` launches a generalised diagonal from the left end of the
//! base; the breakpoint `x_d`, rotation number `omega` and the exclusion margin
//! `epsilon` all follow from it in closed form.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};

use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Upper end of the admissible base angle interval.
pub const ALPHA_MAX: f64 = 3.0 * PI / 10.0;

const ALPHA_STAR_BRACKET: (f64, f64) = (FRAC_PI_4, 2.0 * PI / 7.0);

/// `sin 7a - sin 3a + sin a`.
pub fn alpha_star_equation(alpha: f64) -> f64 {
    (7.0 * alpha).sin() - (3.0 * alpha).sin() + alpha.sin()
}

/// `sin(6a + phi) - sin(2a + phi) + sin(phi)`.
pub fn g_phi(alpha: f64, phi: f64) -> f64 {
    (6.0 * alpha + phi).sin() - (2.0 * alpha + phi).sin() + phi.sin()
}

fn g_phi_derivative(alpha: f64, phi: f64) -> f64 {
    (6.0 * alpha + phi).cos() - (2.0 * alpha + phi).cos() + phi.cos()
}

/// Plain bisection; `f(lo)` and `f(hi)` must have opposite signs.
pub fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64, width: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo.signum() * f_hi.signum() < 0.0) {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if f(lo).abs() <= f(hi).abs() { lo } else { hi })
}

/// Lower end of the admissible base angle interval.
pub fn alpha_star() -> f64 {
    let (lo, hi) = ALPHA_STAR_BRACKET;
    bisect(alpha_star_equation, lo, hi, 1e-14).expect("g changes sign on (pi/4, 2pi/7)")
}

fn check_closed_range(alpha: f64) -> Result<()> {
    if !(alpha >= FRAC_PI_4) {
        return Err(domain("alpha", alpha, "pi/4 <= alpha"));
    }
    if !(alpha <= ALPHA_MAX) {
        return Err(domain("alpha", alpha, "alpha <= 3pi/10"));
    }
    Ok(())
}

/// Rejects base angles outside the open interval `(alpha_star, 3pi/10)`.
pub fn check_admissible(alpha: f64) -> Result<()> {
    if !(alpha > alpha_star()) {
        return Err(domain("alpha", alpha, "alpha_star < alpha"));
    }
    if !(alpha < ALPHA_MAX) {
        return Err(domain("alpha", alpha, "alpha < 3pi/10"));
    }
    Ok(())
}

/// Unique zero of [`g_phi`] in `(0, pi)`, for `alpha` in `[pi/4, 3pi/10]`.
///
/// `g_phi` expands to `A sin(phi) + B cos(phi)` with `A = cos 6a - cos 2a + 1`
/// and `B = sin 6a - sin 2a`, so the root is an arctangent. One Newton step
/// cleans up the last bits.
pub fn phi_star(alpha: f64) -> Result<f64> {
    check_closed_range(alpha)?;
    let a = (6.0 * alpha).cos() - (2.0 * alpha).cos() + 1.0;
    let b = (6.0 * alpha).sin() - (2.0 * alpha).sin();
    let mut phi = (-b).atan2(a);
    if phi <= 0.0 {
        phi += PI;
    } else if phi >= PI {
        phi -= PI;
    }
    let d = g_phi_derivative(alpha, phi);
    if d != 0.0 {
        let polished = phi - g_phi(alpha, phi) / d;
        if polished > 0.0
            && polished < PI
            && g_phi(alpha, polished).abs() <= g_phi(alpha, phi).abs()
        {
            phi = polished;
        }
    }
    Ok(phi)
}

/// Bounce angles of the length-5 diagonal sequence and the length-2 half of the
/// four-cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionAngles {
    pub psi: [f64; 6],
    pub theta: [f64; 3],
}

impl DirectionAngles {
    pub fn new(alpha: f64, phi: f64) -> Self {
        Self {
            psi: [
                phi,
                PI - alpha - phi,
                -PI + 3.0 * alpha + phi,
                2.0 * PI - 4.0 * alpha - phi,
                -PI + 5.0 * alpha + phi,
                2.0 * PI - 6.0 * alpha - phi,
            ],
            theta: [phi, PI - alpha - phi, 2.0 * alpha + phi],
        }
    }
}

/// One inequality of the ordering satisfied by `phi_star`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub holds: bool,
    /// Signed distance to the bound, positive when the inequality holds.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub alpha: f64,
    pub phi_star: f64,
    pub checks: [InequalityCheck; 5],
}

impl OrderingReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Evaluates `0 < phi < alpha`, `alpha + phi > pi/2`, `3 alpha + phi > pi`,
/// `6 alpha + phi < 2pi` and `7 alpha + phi > 2pi`.
pub fn ordering_report(alpha: f64, phi: f64) -> Result<OrderingReport> {
    check_admissible(alpha)?;
    let check = |name, margin: f64| InequalityCheck {
        name,
        holds: margin > 0.0,
        margin,
    };
    Ok(OrderingReport {
        alpha,
        phi_star: phi,
        checks: [
            check("0 < phi_star < alpha", phi.min(alpha - phi)),
            check("alpha + phi_star > pi/2", alpha + phi - PI / 2.0),
            check("3 alpha + phi_star > pi", 3.0 * alpha + phi - PI),
            check("6 alpha + phi_star < 2 pi", 2.0 * PI - 6.0 * alpha - phi),
            check("7 alpha + phi_star > 2 pi", 7.0 * alpha + phi - 2.0 * PI),
        ],
    })
}

/// `1 - cos 3a / (2 cos a cos 4a)`.
pub fn x_d_closed_form(alpha: f64) -> f64 {
    1.0 - omega_closed_form(alpha)
}

/// Rotation number `cos 3a / (2 cos a cos 4a)` of the induced map.
pub fn omega_closed_form(alpha: f64) -> f64 {
    (3.0 * alpha).cos() / (2.0 * alpha.cos() * (4.0 * alpha).cos())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleReport {
    pub alpha: f64,
    pub phi_star: f64,
    /// Breakpoint `1 - sin(2a + phi) / sin(phi)` separating the two cylinders.
    pub x_d: f64,
    pub omega: f64,
    pub epsilon: f64,
    /// The four candidate margins whose minimum is `epsilon`.
    #[serde(skip)]
    pub epsilon_terms: [f64; 4],
    #[serde(skip)]
    pub angles: DirectionAngles,
    pub residuals: BTreeMap<&'static str, f64>,
}

impl AngleReport {
    pub fn new(alpha: f64) -> Result<Self> {
        check_admissible(alpha)?;
        let phi = phi_star(alpha)?;
        let leg = 1.0 / (2.0 * alpha.cos());
        let angles = DirectionAngles::new(alpha, phi);
        let [psi0, psi1, psi2, _, psi4, psi5] = angles.psi.map(f64::sin);
        let [_, theta1, theta2] = angles.theta.map(f64::sin);

        let x_d = 1.0 - (2.0 * alpha + phi).sin() / phi.sin();
        let x_d_closed = x_d_closed_form(alpha);
        let x_d_ratio = psi5 / psi0;
        let omega = omega_closed_form(alpha);
        let epsilon_terms = [
            leg - theta2 / theta1,
            leg - psi0 / psi1,
            leg - psi5 / psi2,
            leg - psi5 / psi4,
        ];
        let epsilon = epsilon_terms.iter().copied().fold(f64::INFINITY, f64::min);

        let mut residuals = BTreeMap::new();
        residuals.insert("phi_equation", g_phi(alpha, phi).abs());
        residuals.insert("x_d_closed_form", (x_d - x_d_closed).abs());
        residuals.insert("x_d_sine_ratio", (x_d - x_d_ratio).abs());
        residuals.insert("omega_complement", (omega - (1.0 - x_d)).abs());
        residuals.insert(
            "diagonal_closure",
            (psi5 - (leg * psi2 - leg * psi1 + psi0)).abs(),
        );
        Ok(Self {
            alpha,
            phi_star: phi,
            x_d,
            omega,
            epsilon,
            epsilon_terms,
            angles,
            residuals,
        })
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

/// See [`AngleReport::new`].
pub fn angle_report(alpha: f64) -> Result<AngleReport> {
    AngleReport::new(alpha)
}

/// `n >= 2` evenly spaced angles over `(alpha_star, 3pi/10)` with both ends pulled
/// in by `inset`.
pub fn admissible_grid(n: usize, inset: f64) -> Vec<f64> {
    linspace(alpha_star() + inset, ALPHA_MAX - inset, n)
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
