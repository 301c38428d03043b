//! Triangle parameterisation, the canonical planar embedding and conversions
//! between boundary arclength coordinates and the plane.
//!
//! Sides carry a cyclic label `1, 2, 3`. Side `k` runs from vertex `k` to
//! vertex `k + 1`, the boundary is positively oriented, and the base (side 1)
//! has unit length. The inner angle `gamma_k` sits opposite side `k`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Maximum perpendicular distance for a planar point to count as lying on a side.
pub const ON_SIDE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3d cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Self, t: f64) -> Self {
        self + (other - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Cyclic side label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Side {
    /// Side 1, from (0, 0) to (1, 0).
    Base,
    /// Side 2, from the right base vertex up to the apex.
    Right,
    /// Side 3, from the apex down to the origin.
    Left,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::Base, Side::Right, Side::Left];

    pub fn from_number(k: u8) -> Result<Side> {
        match k {
            1 => Ok(Side::Base),
            2 => Ok(Side::Right),
            3 => Ok(Side::Left),
            _ => Err(domain("side", f64::from(k), "side in {1, 2, 3}")),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Side::Base => 1,
            Side::Right => 2,
            Side::Left => 3,
        }
    }

    fn index(self) -> usize {
        usize::from(self.number() - 1)
    }

    /// `k + 1` cyclically.
    pub fn next(self) -> Side {
        match self {
            Side::Base => Side::Right,
            Side::Right => Side::Left,
            Side::Left => Side::Base,
        }
    }

    /// `k - 1` cyclically.
    pub fn prev(self) -> Side {
        match self {
            Side::Base => Side::Left,
            Side::Right => Side::Base,
            Side::Left => Side::Right,
        }
    }

    /// Relabeling under the mirror symmetry of the isosceles triangle: 1 ↦ 1, 2 ↦ 3, 3 ↦ 2.
    pub fn adjoint(self) -> Side {
        match self {
            Side::Base => Side::Base,
            Side::Right => Side::Left,
            Side::Left => Side::Right,
        }
    }

    /// Vertex where the side starts (`x = 0`).
    pub fn start_vertex(self) -> Vertex {
        Vertex::ALL[self.index()]
    }

    /// Vertex where the side ends (`x = s_k`).
    pub fn end_vertex(self) -> Vertex {
        self.next().start_vertex()
    }
}

impl TryFrom<u8> for Side {
    type Error = Error;
    fn try_from(k: u8) -> Result<Side> {
        Side::from_number(k)
    }
}

impl From<Side> for u8 {
    fn from(side: Side) -> u8 {
        side.number()
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// See [`Side::adjoint`].
pub fn adjoint_index(k: Side) -> Side {
    k.adjoint()
}

/// Vertex `k` is the start of side `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vertex {
    /// Vertex 1 at the origin.
    BaseLeft,
    /// Vertex 2 at (1, 0).
    BaseRight,
    /// Vertex 3, opposite the base.
    Apex,
}

impl Vertex {
    pub const ALL: [Vertex; 3] = [Vertex::BaseLeft, Vertex::BaseRight, Vertex::Apex];

    pub fn number(self) -> u8 {
        match self {
            Vertex::BaseLeft => 1,
            Vertex::BaseRight => 2,
            Vertex::Apex => 3,
        }
    }

    fn index(self) -> usize {
        usize::from(self.number() - 1)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Vertex::BaseLeft => "base-left",
            Vertex::BaseRight => "base-right",
            Vertex::Apex => "apex",
        };
        f.write_str(name)
    }
}

/// Isosceles triangle with base angle `alpha`, lengths in units of the base.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleParams {
    alpha: f64,
    gamma: [f64; 3],
    lengths: [f64; 3],
}

impl TriangleParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(domain("alpha", alpha, "0 < alpha"));
        }
        if alpha >= FRAC_PI_2 {
            return Err(domain("alpha", alpha, "alpha < pi/2"));
        }
        let leg = 1.0 / (2.0 * alpha.cos());
        Ok(Self {
            alpha,
            gamma: [PI - 2.0 * alpha, alpha, alpha],
            lengths: [1.0, leg, leg],
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Inner angle opposite side `k`.
    pub fn gamma(&self, k: Side) -> f64 {
        self.gamma[k.index()]
    }

    /// Length `s_k` of side `k`.
    pub fn side_length(&self, k: Side) -> f64 {
        self.lengths[k.index()]
    }

    /// Common length of the two legs, `s_2 = s_3`.
    pub fn leg(&self) -> f64 {
        self.lengths[1]
    }

    pub fn gammas(&self) -> [f64; 3] {
        self.gamma
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }
}

/// See [`TriangleParams::new`].
pub fn make_triangle(alpha: f64) -> Result<TriangleParams> {
    TriangleParams::new(alpha)
}

/// Arclength position on an oriented side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub side: Side,
    pub x: f64,
}

impl BoundaryPoint {
    pub fn new(side: Side, x: f64) -> Self {
        Self { side, x }
    }
}

/// Fixed planar frame: base on the x-axis, apex above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarEmbedding {
    vertices: [Vec2; 3],
    lengths: [f64; 3],
}

impl PlanarEmbedding {
    pub fn new(params: &TriangleParams) -> Self {
        let apex = Vec2::new(0.5, 0.5 * params.alpha().tan());
        Self {
            vertices: [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), apex],
            lengths: params.lengths(),
        }
    }

    pub fn vertices(&self) -> [Vec2; 3] {
        self.vertices
    }

    pub fn vertex(&self, v: Vertex) -> Vec2 {
        self.vertices[v.index()]
    }

    pub fn apex(&self) -> Vec2 {
        self.vertex(Vertex::Apex)
    }

    /// Start and end point of side `k`.
    pub fn side_segment(&self, k: Side) -> (Vec2, Vec2) {
        (self.vertex(k.start_vertex()), self.vertex(k.end_vertex()))
    }

    /// Unit vector along the oriented side.
    pub fn tangent(&self, k: Side) -> Vec2 {
        let (a, b) = self.side_segment(k);
        (b - a).normalized()
    }

    /// Unit normal pointing into the triangle.
    pub fn inward_normal(&self, k: Side) -> Vec2 {
        self.tangent(k).perp()
    }

    pub fn signed_area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * (b - a).cross(c - a)
    }

    pub fn boundary_to_plane(&self, p: BoundaryPoint) -> Vec2 {
        let (a, b) = self.side_segment(p.side);
        a.lerp(b, p.x / self.lengths[p.side.index()])
    }

    /// Inverse of [`boundary_to_plane`](Self::boundary_to_plane). Fails when `q`
    /// is farther than [`ON_SIDE_TOLERANCE`] from the closed side segment.
    pub fn plane_to_boundary(&self, q: Vec2, side: Side) -> Result<BoundaryPoint> {
        let (a, b) = self.side_segment(side);
        let len = self.lengths[side.index()];
        let u = (b - a) * (1.0 / len);
        let along = (q - a).dot(u);
        let off = (q - a).cross(u).abs();
        if off > ON_SIDE_TOLERANCE {
            return Err(Error::Geometry(format!(
                "point ({}, {}) is {off:e} away from side {side}",
                q.x, q.y
            )));
        }
        if along < -ON_SIDE_TOLERANCE || along > len + ON_SIDE_TOLERANCE {
            return Err(Error::Geometry(format!(
                "point ({}, {}) projects to x = {along} outside side {side} of length {len}",
                q.x, q.y
            )));
        }
        Ok(BoundaryPoint::new(side, along.clamp(0.0, len)))
    }
}

/// See [`PlanarEmbedding::new`].
pub fn embed(params: &TriangleParams) -> PlanarEmbedding {
    PlanarEmbedding::new(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_legs_are_unit() {
        let t = TriangleParams::new(PI / 3.0).unwrap();
        assert!((t.side_length(Side::Right) - 1.0).abs() < 1e-15);
        assert!((t.side_length(Side::Left) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reference_angle_leg_length() {
        let alpha = PI * 3f64.sqrt() / 6.0;
        let t = TriangleParams::new(alpha).unwrap();
        assert_eq!(t.leg(), 1.0 / (2.0 * alpha.cos()));
        assert!((t.leg() - 0.811_437_360_880_069).abs() < 1e-14);
    }

    #[test]
    fn rejects_degenerate_angles() {
        for bad in [FRAC_PI_2, 0.0, -0.1, 2.0, f64::NAN] {
            let err = TriangleParams::new(bad).unwrap_err();
            assert!(matches!(err, Error::Domain(_)), "{bad}: {err}");
        }
        let msg = TriangleParams::new(FRAC_PI_2).unwrap_err().to_string();
        assert!(msg.contains("alpha < pi/2"), "{msg}");
    }

    #[test]
    fn angle_sum_is_pi() {
        for i in 1..100 {
            let alpha = FRAC_PI_2 * f64::from(i) / 100.0;
            let t = TriangleParams::new(alpha).unwrap();
            let sum: f64 = t.gammas().iter().sum();
            assert!((sum - PI).abs() <= 1e-15, "{alpha}");
            assert!((t.leg() * 2.0 * alpha.cos() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn apex_positions() {
        let e = embed(&TriangleParams::new(PI / 4.0).unwrap());
        assert!((e.apex() - Vec2::new(0.5, 0.5)).norm() < 1e-15);
        let e = embed(&TriangleParams::new(PI / 3.0).unwrap());
        assert!((e.apex() - Vec2::new(0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn embedding_matches_side_lengths_and_orientation() {
        for i in 1..50 {
            let alpha = FRAC_PI_2 * f64::from(i) / 50.0;
            let t = TriangleParams::new(alpha).unwrap();
            let e = embed(&t);
            assert!(e.signed_area() > 0.0);
            for k in Side::ALL {
                let (a, b) = e.side_segment(k);
                assert!(
                    ((b - a).norm() - t.side_length(k)).abs() <= 1e-14 * t.side_length(k).max(1.0)
                );
            }
        }
    }

    #[test]
    fn boundary_points() {
        let t = TriangleParams::new(PI * 3f64.sqrt() / 6.0).unwrap();
        let e = embed(&t);
        let origin = e.boundary_to_plane(BoundaryPoint::new(Side::Base, 0.0));
        assert_eq!(origin, Vec2::new(0.0, 0.0));
        let q = e.boundary_to_plane(BoundaryPoint::new(Side::Base, 1.0 / 2f64.sqrt()));
        assert!((q.x - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15 && q.y == 0.0);
        let top = e.boundary_to_plane(BoundaryPoint::new(Side::Right, t.leg()));
        assert!((top - e.apex()).norm() < 1e-15);
    }

    #[test]
    fn off_side_point_is_rejected() {
        let t = TriangleParams::new(1.0).unwrap();
        let e = embed(&t);
        assert!(e
            .plane_to_boundary(Vec2::new(0.5, 1e-6), Side::Base)
            .is_err());
        assert!(e
            .plane_to_boundary(Vec2::new(1.5, 0.0), Side::Base)
            .is_err());
        assert!(e
            .plane_to_boundary(Vec2::new(0.5, 0.0), Side::Right)
            .is_err());
    }

    #[test]
    fn adjoint_is_involution() {
        assert_eq!(adjoint_index(Side::Base), Side::Base);
        assert_eq!(adjoint_index(Side::Right), Side::Left);
        for k in Side::ALL {
            assert_eq!(k.adjoint().adjoint(), k);
            // bar(k ± 1) = bar(k) ∓ 1
            assert_eq!(k.next().adjoint(), k.adjoint().prev());
        }
    }

    #[test]
    fn side_vertex_bookkeeping() {
        assert_eq!(Side::Base.start_vertex(), Vertex::BaseLeft);
        assert_eq!(Side::Base.end_vertex(), Vertex::BaseRight);
        assert_eq!(Side::Right.end_vertex(), Vertex::Apex);
        assert_eq!(Side::Left.end_vertex(), Vertex::BaseLeft);
        for k in Side::ALL {
            assert_eq!(Side::from_number(k.number()).unwrap(), k);
            assert_eq!(k.next().prev(), k);
        }
        assert!(Side::from_number(4).is_err());
    }
}
