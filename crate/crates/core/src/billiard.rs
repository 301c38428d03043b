//! The billiard map on the triangle boundary.
//!
//! Two independent steppers are provided. [`Billiard::step_algebraic`] applies
//! the closed-form bounce recurrence on (side, angle, arclength) directly;
//! [`Billiard::step_geometric`] traces the outgoing ray through the planar
//! embedding and reflects it at the landing side. The second one is the
//! reference the first is checked against.
//!
//! The phase angle `phi` is measured from the oriented side to the outgoing ray,
//! so it always lies in `(0, pi)` for a ray entering the triangle.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{BoundaryPoint, PlanarEmbedding, Side, TriangleParams, Vec2, Vertex};
use crate::tolerances::Tolerances;

/// Landing farther than this outside a side segment means the ray tracer is broken.
const GEOMETRIC_SLACK: f64 = 1e-9;

/// A bounce `[k, phi, x]`: side, outgoing angle and arclength along the side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub side: Side,
    pub phi: f64,
    pub x: f64,
}

impl PhaseState {
    pub fn new(side: Side, phi: f64, x: f64) -> Self {
        Self { side, phi, x }
    }

    /// Time reversal `[k, pi - phi, x]`.
    pub fn reversed(self) -> Self {
        Self::new(self.side, PI - self.phi, self.x)
    }

    /// Reflection in the symmetry axis, `[adjoint(k), pi - phi, s_k - x]`.
    pub fn mirrored(self, params: &TriangleParams) -> Self {
        Self::new(
            self.side.adjoint(),
            PI - self.phi,
            params.side_length(self.side) - self.x,
        )
    }

    pub fn boundary_point(self) -> BoundaryPoint {
        BoundaryPoint::new(self.side, self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveDir {
    /// Next bounce on side `k + 1`.
    Ccw,
    /// Next bounce on side `k - 1`.
    Cw,
}

impl MoveDir {
    pub fn target(self, from: Side) -> Side {
        match self {
            MoveDir::Ccw => from.next(),
            MoveDir::Cw => from.prev(),
        }
    }

    pub fn between(from: Side, to: Side) -> Option<MoveDir> {
        if from.next() == to {
            Some(MoveDir::Ccw)
        } else if from.prev() == to {
            Some(MoveDir::Cw)
        } else {
            None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MoveDir::Ccw => "ccw",
            MoveDir::Cw => "cw",
        }
    }
}

impl fmt::Display for MoveDir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MoveDir {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ccw" => Ok(MoveDir::Ccw),
            "cw" => Ok(MoveDir::Cw),
            other => Err(Error::Parse(format!("unknown move direction {other:?}"))),
        }
    }
}

/// Landing at (or numerically indistinguishable from) a corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularHit {
    pub vertex: Vertex,
    /// Arclength between the computed landing point and the vertex.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepResult {
    Regular { state: PhaseState, dir: MoveDir },
    Singular(SingularHit),
}

impl StepResult {
    pub fn regular(self) -> Option<(PhaseState, MoveDir)> {
        match self {
            StepResult::Regular { state, dir } => Some((state, dir)),
            StepResult::Singular(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stepper {
    #[default]
    Algebraic,
    Geometric,
}

impl FromStr for Stepper {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebraic" | "alg" => Ok(Stepper::Algebraic),
            "geometric" | "geo" => Ok(Stepper::Geometric),
            other => Err(Error::Parse(format!(
                "unknown stepper {other:?} (expected algebraic or geometric)"
            ))),
        }
    }
}

impl fmt::Display for Stepper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stepper::Algebraic => "algebraic",
            Stepper::Geometric => "geometric",
        })
    }
}

/// Finite orbit. `states[t]` is the bounce at time `t` and `dirs[t]` the move
/// from `t` to `t + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    states: Vec<PhaseState>,
    dirs: Vec<MoveDir>,
    /// Set when iteration stopped because the next landing hit a vertex.
    singular: Option<SingularHit>,
}

impl Orbit {
    /// Builds an orbit from explicit states; the move directions must match
    /// the side sequence.
    pub fn new(states: Vec<PhaseState>, dirs: Vec<MoveDir>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Geometry("an orbit needs at least one state".into()));
        }
        if dirs.len() + 1 != states.len() {
            return Err(Error::Geometry(format!(
                "{} states need {} moves, got {}",
                states.len(),
                states.len() - 1,
                dirs.len()
            )));
        }
        for (t, (pair, dir)) in states.windows(2).zip(&dirs).enumerate() {
            if dir.target(pair[0].side) != pair[1].side {
                return Err(Error::Geometry(format!(
                    "move {t} is {dir} but goes from side {} to side {}",
                    pair[0].side, pair[1].side
                )));
            }
        }
        Ok(Self {
            states,
            dirs,
            singular: None,
        })
    }

    /// Builds an orbit from a side sequence, deriving the moves.
    pub fn from_states(states: Vec<PhaseState>) -> Result<Self> {
        let dirs = states
            .windows(2)
            .map(|w| {
                MoveDir::between(w[0].side, w[1].side).ok_or_else(|| {
                    Error::Geometry(format!("no move from side {} to itself", w[0].side))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(states, dirs)
    }

    pub fn single(state: PhaseState) -> Self {
        Self {
            states: vec![state],
            dirs: Vec::new(),
            singular: None,
        }
    }

    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }

    pub fn dirs(&self) -> &[MoveDir] {
        &self.dirs
    }

    /// Number of bounces after the initial one.
    pub fn steps(&self) -> usize {
        self.dirs.len()
    }

    pub fn first(&self) -> PhaseState {
        self.states[0]
    }

    pub fn last(&self) -> PhaseState {
        *self.states.last().expect("orbit is never empty")
    }

    pub fn terminated_singular(&self) -> bool {
        self.singular.is_some()
    }

    pub fn singular_hit(&self) -> Option<SingularHit> {
        self.singular
    }

    pub fn sides(&self) -> Vec<Side> {
        self.states.iter().map(|s| s.side).collect()
    }

    /// Largest per-step deviation from the bounce recurrence.
    pub fn max_step_residual(&self, params: &TriangleParams) -> f64 {
        self.states
            .windows(2)
            .zip(&self.dirs)
            .map(|(w, &dir)| map_residual(params, w[0], w[1], dir))
            .fold(0.0, f64::max)
    }

    pub fn validate(&self, params: &TriangleParams, tol: &Tolerances) -> Result<()> {
        for (t, (w, &dir)) in self.states.windows(2).zip(&self.dirs).enumerate() {
            let r = map_residual(params, w[0], w[1], dir);
            if !(r <= tol.step_residual) {
                return Err(Error::Geometry(format!(
                    "step {t} -> {} violates the billiard map by {r:e}",
                    t + 1
                )));
            }
        }
        Ok(())
    }
}

/// Angle and arclength predicted by the recurrence for a move in direction `dir`.
pub fn map_image(params: &TriangleParams, from: PhaseState, dir: MoveDir) -> (f64, f64) {
    let k = from.side;
    match dir {
        MoveDir::Ccw => {
            let phi = PI - from.phi - params.gamma(k.prev());
            let x = (params.side_length(k) - from.x) * from.phi.sin() / phi.sin();
            (phi, x)
        }
        MoveDir::Cw => {
            let phi = PI - from.phi + params.gamma(k.next());
            let x = params.side_length(k.prev()) - from.x * from.phi.sin() / phi.sin();
            (phi, x)
        }
    }
}

/// `max(|dphi|, |dx|)` of `to` against the recurrence applied to `from`.
pub fn map_residual(
    params: &TriangleParams,
    from: PhaseState,
    to: PhaseState,
    dir: MoveDir,
) -> f64 {
    if dir.target(from.side) != to.side {
        return f64::INFINITY;
    }
    let (phi, x) = map_image(params, from, dir);
    (to.phi - phi).abs().max((to.x - x).abs())
}

/// One reflected copy of the triangle in an unfolding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frame {
    /// Images of vertices 1, 2, 3.
    pub vertices: [Vec2; 3],
    /// Odd number of reflections away from the base placement.
    pub mirrored: bool,
}

impl Frame {
    pub fn from_embedding(embedding: &PlanarEmbedding) -> Self {
        Self {
            vertices: embedding.vertices(),
            mirrored: false,
        }
    }

    fn corner(&self, v: Vertex) -> Vec2 {
        self.vertices[usize::from(v.number() - 1)]
    }

    pub fn side_segment(&self, k: Side) -> (Vec2, Vec2) {
        (self.corner(k.start_vertex()), self.corner(k.end_vertex()))
    }

    /// Image of the boundary point `x` on side `k`.
    pub fn point(&self, params: &TriangleParams, k: Side, x: f64) -> Vec2 {
        let (a, b) = self.side_segment(k);
        a.lerp(b, x / params.side_length(k))
    }

    /// Mirror image across side `k`; the two vertices on `k` are kept bit-for-bit.
    pub fn reflected_across(&self, k: Side) -> Frame {
        let (a, b) = self.side_segment(k);
        let e = (b - a).normalized();
        let mut vertices = self.vertices;
        let off = usize::from(k.next().end_vertex().number() - 1);
        let r = vertices[off] - a;
        vertices[off] = a + e * (2.0 * r.dot(e)) - r;
        Frame {
            vertices,
            mirrored: !self.mirrored,
        }
    }
}

/// A trajectory straightened by successive reflection of the triangle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnfoldedPath {
    pub frames: Vec<Frame>,
    /// Chord `t` drawn in frame `t`.
    pub segments: Vec<(Vec2, Vec2)>,
}

impl UnfoldedPath {
    pub fn start(&self) -> Option<Vec2> {
        self.segments.first().map(|s| s.0)
    }

    pub fn end(&self) -> Option<Vec2> {
        self.segments.last().map(|s| s.1)
    }

    pub fn length(&self) -> f64 {
        match (self.start(), self.end()) {
            (Some(a), Some(b)) => (b - a).norm(),
            _ => 0.0,
        }
    }

    /// Largest distance of any chord endpoint from the line through the first
    /// and last point, divided by the distance between those two points.
    pub fn collinearity_residual(&self) -> f64 {
        let (Some(a), Some(b)) = (self.start(), self.end()) else {
            return 0.0;
        };
        let len = (b - a).norm();
        if len == 0.0 {
            return 0.0;
        }
        let u = (b - a) * (1.0 / len);
        self.segments
            .iter()
            .flat_map(|&(p, q)| [p, q])
            .map(|p| (p - a).cross(u).abs())
            .fold(0.0, f64::max)
            / len
    }

    /// Largest gap between the end of chord `t` and the start of chord `t + 1`.
    pub fn continuity_residual(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| (w[1].0 - w[0].1).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Landing {
    Interior,
    Vertex(SingularHit),
}

/// Triangle table together with its embedding and numerical thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Billiard {
    params: TriangleParams,
    embedding: PlanarEmbedding,
    tol: Tolerances,
}

impl Billiard {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(Self::from_params(TriangleParams::new(alpha)?))
    }

    pub fn from_params(params: TriangleParams) -> Self {
        Self {
            embedding: PlanarEmbedding::new(&params),
            params,
            tol: Tolerances::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn params(&self) -> &TriangleParams {
        &self.params
    }

    pub fn embedding(&self) -> &PlanarEmbedding {
        &self.embedding
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    /// Strictly interior position and an angle strictly inside `(0, pi)`.
    pub fn is_regular(&self, s: &PhaseState) -> bool {
        let len = self.params.side_length(s.side);
        s.phi > 0.0 && s.phi < PI && s.x > 0.0 && s.x < len
    }

    fn classify(&self, side: Side, x: f64) -> Landing {
        let len = self.params.side_length(side);
        let tau = self.tol.tau_vertex;
        let to_start = x.abs();
        let to_end = (len - x).abs();
        if x <= tau || to_start <= tau {
            Landing::Vertex(SingularHit {
                vertex: side.start_vertex(),
                distance: to_start,
            })
        } else if len - x <= tau {
            Landing::Vertex(SingularHit {
                vertex: side.end_vertex(),
                distance: to_end,
            })
        } else {
            Landing::Interior
        }
    }

    fn accept(&self, side: Side, phi: f64, x: f64, dir: MoveDir) -> Option<StepResult> {
        let len = self.params.side_length(side);
        let tau = self.tol.tau_vertex;
        if !(phi > 0.0 && phi < PI && x > -tau && x < len + tau) {
            return None;
        }
        Some(match self.classify(side, x) {
            Landing::Interior => StepResult::Regular {
                state: PhaseState::new(side, phi, x),
                dir,
            },
            Landing::Vertex(hit) => StepResult::Singular(hit),
        })
    }

    /// Closed-form step: try the counter-clockwise branch, validate it, and
    /// fall back to the clockwise branch.
    pub fn step_algebraic(&self, s: PhaseState) -> StepResult {
        let mut candidates = [(MoveDir::Ccw, 0.0, 0.0); 2];
        for (slot, dir) in candidates.iter_mut().zip([MoveDir::Ccw, MoveDir::Cw]) {
            let (phi, x) = map_image(&self.params, s, dir);
            if let Some(result) = self.accept(dir.target(s.side), phi, x, dir) {
                return result;
            }
            *slot = (dir, phi, x);
        }
        // Neither branch landed on its side: only reachable by rounding right at a
        // corner, so report the corner closest to either candidate.
        candidates
            .iter()
            .map(|&(dir, _, x)| {
                let side = dir.target(s.side);
                let len = self.params.side_length(side);
                if (x - len).abs() < x.abs() {
                    SingularHit {
                        vertex: side.end_vertex(),
                        distance: (x - len).abs(),
                    }
                } else {
                    SingularHit {
                        vertex: side.start_vertex(),
                        distance: x.abs(),
                    }
                }
            })
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
            .map(StepResult::Singular)
            .expect("two candidates")
    }

    /// Ray-traced step in the planar embedding.
    pub fn step_geometric(&self, s: PhaseState) -> Result<StepResult> {
        let emb = &self.embedding;
        let origin = emb.boundary_to_plane(s.boundary_point());
        let dir_vec = emb.tangent(s.side) * s.phi.cos() + emb.inward_normal(s.side) * s.phi.sin();

        // (violation outside the segment, target side, arclength, move)
        let mut best: Option<(f64, Side, f64, MoveDir)> = None;
        for mv in [MoveDir::Ccw, MoveDir::Cw] {
            let target = mv.target(s.side);
            let (a, b) = emb.side_segment(target);
            let edge = b - a;
            let denom = dir_vec.cross(edge);
            if denom == 0.0 {
                continue;
            }
            let rel = a - origin;
            let t = rel.cross(edge) / denom;
            if !(t > 0.0) {
                continue;
            }
            let frac = rel.cross(dir_vec) / denom;
            let len = self.params.side_length(target);
            let x = frac * len;
            let violation = (-x).max(x - len).max(0.0);
            if best.is_none_or(|(v, ..)| violation < v) {
                best = Some((violation, target, x, mv));
            }
        }
        let Some((violation, target, x, mv)) = best else {
            return Err(Error::Geometry(format!(
                "ray from side {} at x = {}, phi = {} meets no side ahead",
                s.side, s.x, s.phi
            )));
        };
        if violation > GEOMETRIC_SLACK {
            return Err(Error::Geometry(format!(
                "ray from side {} at x = {}, phi = {} misses side {target} by {violation:e}",
                s.side, s.x, s.phi
            )));
        }
        if let Landing::Vertex(hit) = self.classify(target, x) {
            return Ok(StepResult::Singular(hit));
        }

        let n = emb.inward_normal(target);
        let out = dir_vec - n * (2.0 * dir_vec.dot(n));
        let phi = out.dot(n).atan2(out.dot(emb.tangent(target)));
        if !(phi > 0.0 && phi < PI) {
            let len = self.params.side_length(target);
            let hit = if x < len - x {
                SingularHit {
                    vertex: target.start_vertex(),
                    distance: x,
                }
            } else {
                SingularHit {
                    vertex: target.end_vertex(),
                    distance: len - x,
                }
            };
            return Ok(StepResult::Singular(hit));
        }
        Ok(StepResult::Regular {
            state: PhaseState::new(target, phi, x),
            dir: mv,
        })
    }

    pub fn step(&self, s: PhaseState, stepper: Stepper) -> Result<StepResult> {
        match stepper {
            Stepper::Algebraic => Ok(self.step_algebraic(s)),
            Stepper::Geometric => self.step_geometric(s),
        }
    }

    /// Up to `n` bounces from `start`, stopping early at a vertex.
    pub fn iterate(&self, start: PhaseState, n: usize, stepper: Stepper) -> Result<Orbit> {
        if !self.is_regular(&start) {
            return Err(domain(
                "start",
                start.x,
                format!(
                    "regular start: 0 < x < s_{k}, 0 < phi < pi (phi = {})",
                    start.phi,
                    k = start.side
                ),
            ));
        }
        let mut states = Vec::with_capacity(n + 1);
        let mut dirs = Vec::with_capacity(n);
        states.push(start);
        let mut singular = None;
        let mut cur = start;
        for _ in 0..n {
            match self.step(cur, stepper)? {
                StepResult::Regular { state, dir } => {
                    states.push(state);
                    dirs.push(dir);
                    cur = state;
                }
                StepResult::Singular(hit) => {
                    singular = Some(hit);
                    break;
                }
            }
        }
        Ok(Orbit {
            states,
            dirs,
            singular,
        })
    }

    /// Mirror-and-reverse image of a finite regular orbit:
    /// `[adjoint(k_{T-t}), phi_{T-t}, s - x_{T-t}]`.
    pub fn symmetry_image(&self, orbit: &Orbit) -> Result<Orbit> {
        if orbit.terminated_singular() || !orbit.states.iter().all(|s| self.is_regular(s)) {
            return Err(Error::SingularOrbit);
        }
        let states = orbit
            .states
            .iter()
            .rev()
            .map(|s| {
                PhaseState::new(
                    s.side.adjoint(),
                    s.phi,
                    self.params.side_length(s.side) - s.x,
                )
            })
            .collect();
        let dirs = orbit.dirs.iter().rev().copied().collect();
        Ok(Orbit {
            states,
            dirs,
            singular: None,
        })
    }

    /// Frames obtained by reflecting across each landing side in turn, starting
    /// from the embedding itself.
    pub fn unfold_frames(&self, sides: &[Side]) -> Vec<Frame> {
        let mut frames = Vec::with_capacity(sides.len().max(1));
        frames.push(Frame::from_embedding(&self.embedding));
        for &side in sides.iter().skip(1) {
            let next = frames.last().expect("non-empty").reflected_across(side);
            frames.push(next);
        }
        frames
    }

    pub fn unfold(&self, orbit: &Orbit) -> UnfoldedPath {
        let frames = self.unfold_frames(&orbit.sides());
        let segments = orbit
            .states
            .windows(2)
            .zip(&frames)
            .map(|(w, frame)| {
                (
                    frame.point(&self.params, w[0].side, w[0].x),
                    frame.point(&self.params, w[1].side, w[1].x),
                )
            })
            .collect();
        UnfoldedPath { frames, segments }
    }
}
