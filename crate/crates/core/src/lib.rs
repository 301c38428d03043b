//! Billiards in isosceles triangles with base angle between roughly 49.5 and
//! 54 degrees: the bounce map, the critical direction `phi*`, the periodic
//! cylinders bounding its orbit and the induced rotation on the base.
//!
//! Phase space is `(side, phi, x)`: `phi` in `(0, pi)` is the angle of the
//! outgoing ray against the side's direction and `x` the arclength from the
//! side's start vertex.

pub mod angles;
pub mod billiard;
pub mod cylinders;
mod error;
pub mod export;
pub mod geometry;
pub mod induced;
pub mod tolerances;

pub use angles::{alpha_star, angle_report, phi_star, AngleReport, DirectionAngles, ALPHA_MAX};
pub use billiard::{Billiard, MoveDir, Orbit, PhaseState, SingularHit, StepResult, Stepper};
pub use cylinders::{
    four_cylinder, generalized_diagonal, ten_cylinder, verify_template, CylinderTemplate,
    DiagonalRecord,
};
pub use error::{DomainError, Error, Result};
pub use geometry::{BoundaryPoint, PlanarEmbedding, Side, TriangleParams, Vec2, Vertex};
pub use induced::{rationality_probe, InducedMap, RationalityVerdict, RotationEstimate};
pub use tolerances::Tolerances;
