//! Deterministic SVG output: fixed 6-decimal coordinates, y axis pointing up.

use std::fmt::Write as _;

use serde::Serialize;

use crate::billiard::{Billiard, Frame, Orbit, UnfoldedPath};
use crate::cylinders::{
    cylinder_strip, four_cylinder, ten_cylinder, CylinderStrip, DIAGONAL_SIDES,
};
use crate::error::Result;
use crate::geometry::{Vec2, Vertex};

#[derive(Debug, Clone, PartialEq)]
pub struct SvgStyle {
    /// Width of the drawing in user units; height follows the aspect ratio.
    pub width: f64,
    pub margin: f64,
    pub stroke_width: f64,
    pub chord_color: String,
    pub edge_color: String,
}

impl Default for SvgStyle {
    fn default() -> Self {
        Self {
            width: 800.0,
            margin: 20.0,
            stroke_width: 1.0,
            chord_color: "#c0392b".into(),
            edge_color: "#222222".into(),
        }
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

struct Canvas {
    lo: Vec2,
    scale: f64,
    height: f64,
    style: SvgStyle,
    body: String,
}

impl Canvas {
    fn new(points: impl IntoIterator<Item = Vec2>, style: &SvgStyle) -> Self {
        let (mut lo, mut hi) = (
            Vec2::new(f64::INFINITY, f64::INFINITY),
            Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.x.is_finite() {
            lo = Vec2::new(0.0, 0.0);
            hi = Vec2::new(1.0, 1.0);
        }
        let span = Vec2::new((hi.x - lo.x).max(1e-12), (hi.y - lo.y).max(1e-12));
        let inner = style.width - 2.0 * style.margin;
        let scale = inner / span.x.max(span.y);
        let height = span.y * scale + 2.0 * style.margin;
        Self {
            lo: Vec2::new(lo.x, hi.y),
            scale,
            height,
            style: style.clone(),
            body: String::new(),
        }
    }

    fn map(&self, p: Vec2) -> (String, String) {
        let m = self.style.margin;
        (
            num(m + (p.x - self.lo.x) * self.scale),
            num(m + (self.lo.y - p.y) * self.scale),
        )
    }

    fn polygon(&mut self, class: &str, pts: &[Vec2], fill: &str, stroke: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x},{y}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon class="{class}" points="{}" fill="{fill}" stroke="{stroke}" stroke-width="{}"/>"#,
            coords.join(" "),
            num(self.style.stroke_width)
        );
    }

    fn line(&mut self, class: &str, a: Vec2, b: Vec2, stroke: &str, extra: &str) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="{stroke}" stroke-width="{}"{extra}/>"#,
            num(self.style.stroke_width)
        );
    }

    fn finish(self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
            w = num(self.style.width),
            h = num(self.height)
        );
        out.push_str(&self.body);
        out.push_str("</svg>\n");
        out
    }
}

/// The table with one `<line class="chord">` per bounce-to-bounce segment.
pub fn render_trajectory(billiard: &Billiard, orbit: &Orbit, style: &SvgStyle) -> String {
    let emb = billiard.embedding();
    let tri = emb.vertices();
    let mut c = Canvas::new(tri, style);
    let edge = c.style.edge_color.clone();
    let chord = c.style.chord_color.clone();
    c.polygon("table", &tri, "none", &edge);
    for w in orbit.states().windows(2) {
        let a = emb.boundary_to_plane(w[0].boundary_point());
        let b = emb.boundary_to_plane(w[1].boundary_point());
        c.line("chord", a, b, &chord, "");
    }
    c.finish()
}

/// Everything needed to draw the unfolded diagonal, both cylinder strips and
/// optionally an unfolded trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnfoldingFigure {
    pub alpha: f64,
    pub diagonal_frames: Vec<Frame>,
    /// From vertex 1 in the base frame to the image of vertex 2 in frame 5.
    pub diagonal: (Vec2, Vec2),
    pub ten: CylinderStrip,
    pub four: CylinderStrip,
    pub path: Option<UnfoldedPath>,
}

impl UnfoldingFigure {
    pub fn build(billiard: &Billiard, orbit: Option<&Orbit>) -> Result<Self> {
        let alpha = billiard.alpha();
        let diagonal_frames = billiard.unfold_frames(&DIAGONAL_SIDES);
        let start = diagonal_frames[0].vertices[usize::from(Vertex::BaseLeft.number() - 1)];
        let end = diagonal_frames[5].vertices[usize::from(Vertex::BaseRight.number() - 1)];
        Ok(Self {
            alpha,
            diagonal: (start, end),
            ten: cylinder_strip(billiard, &ten_cylinder(alpha)?),
            four: cylinder_strip(billiard, &four_cylinder(alpha)?),
            path: orbit.map(|o| billiard.unfold(o)),
            diagonal_frames,
        })
    }

    fn points(&self) -> Vec<Vec2> {
        let mut pts: Vec<Vec2> = self
            .diagonal_frames
            .iter()
            .chain(&self.ten.frames)
            .chain(&self.four.frames)
            .flat_map(|f| f.vertices)
            .collect();
        if let Some(p) = &self.path {
            pts.extend(p.frames.iter().flat_map(|f| f.vertices));
        }
        pts
    }
}

pub fn render_unfolding(fig: &UnfoldingFigure, style: &SvgStyle) -> String {
    let mut c = Canvas::new(fig.points(), style);
    let edge = c.style.edge_color.clone();
    let chord = c.style.chord_color.clone();
    for (class, strip, fill) in [
        ("ten", &fig.ten, "#3498db33"),
        ("four", &fig.four, "#27ae6033"),
    ] {
        for f in &strip.frames {
            c.polygon(&format!("frame {class}"), &f.vertices, "none", "#999999");
        }
        c.polygon(&format!("strip {class}"), &strip.corners, fill, "none");
    }
    for f in &fig.diagonal_frames {
        c.polygon("frame diagonal", &f.vertices, "none", &edge);
    }
    if let Some(p) = &fig.path {
        for f in &p.frames {
            c.polygon("frame path", &f.vertices, "none", "#cccccc");
        }
        for &(a, b) in &p.segments {
            c.line("chord", a, b, &chord, "");
        }
    }
    let (a, b) = fig.diagonal;
    c.line("diagonal", a, b, &edge, r#" stroke-dasharray="4 3""#);
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::{PhaseState, Stepper};
    use crate::geometry::Side;

    #[test]
    fn negative_zero_is_normalized() {
        assert_eq!(num(-0.0), "0.000000");
        assert_eq!(num(-1e-9), "0.000000");
        assert_eq!(num(1.5), "1.500000");
    }

    #[test]
    fn one_line_per_chord() {
        let b = Billiard::new(0.9).unwrap();
        let orbit = b
            .iterate(
                PhaseState::new(Side::Base, 0.7, 0.3),
                12,
                Stepper::Algebraic,
            )
            .unwrap();
        let svg = render_trajectory(&b, &orbit, &SvgStyle::default());
        assert_eq!(svg.matches(r#"class="chord""#).count(), orbit.steps());
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg, render_trajectory(&b, &orbit, &SvgStyle::default()));
    }

    #[test]
    fn unfolding_has_dashed_diagonal() {
        let b = Billiard::new(0.9).unwrap();
        let fig = UnfoldingFigure::build(&b, None).unwrap();
        let svg = render_unfolding(&fig, &SvgStyle::default());
        assert_eq!(svg.matches(r#"class="diagonal""#).count(), 1);
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(fig.ten.frames.len(), 11);
        assert_eq!(fig.four.frames.len(), 5);
    }
}
