use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Numerical thresholds shared by the steppers and the checks built on them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Landing closer than this (arclength) to a vertex is classified singular.
    pub tau_vertex: f64,
    /// Per-step residual allowed when an orbit is checked against the billiard map.
    pub step_residual: f64,
    /// Angle match used to detect a return to the base at the induction angle.
    pub return_angle: f64,
    /// Coordinate match for template verification and return-map conjugacy.
    pub coordinate: f64,
    /// Margin required between a template offset and the ends of its range.
    pub delta_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tau_vertex: 1e-12,
            step_residual: 1e-10,
            return_angle: 1e-9,
            coordinate: 1e-9,
            delta_margin: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("tau_vertex", self.tau_vertex),
            ("step_residual", self.step_residual),
            ("return_angle", self.return_angle),
            ("coordinate", self.coordinate),
            ("delta_margin", self.delta_margin),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(domain(name, value, format!("0 < {name} < inf")));
            }
        }
        Ok(())
    }

    /// Applies a partial JSON map such as `{"tau_vertex": 1e-11}` on top of `self`.
    pub fn with_json_overrides(self, json: &str) -> Result<Self> {
        let mut base = serde_json::to_value(self)?;
        let patch: serde_json::Map<String, serde_json::Value> = serde_json::from_str(json)?;
        if let serde_json::Value::Object(map) = &mut base {
            for (k, v) in patch {
                map.insert(k, v);
            }
        }
        let merged: Tolerances = serde_json::from_value(base)?;
        merged.validate()?;
        Ok(merged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_override_is_partial() {
        let t = Tolerances::default()
            .with_json_overrides(r#"{"tau_vertex": 1e-11}"#)
            .unwrap();
        assert_eq!(t.tau_vertex, 1e-11);
        assert_eq!(t.step_residual, 1e-10);
    }

    #[test]
    fn rejects_unknown_and_nonpositive() {
        assert!(Tolerances::default()
            .with_json_overrides(r#"{"bogus": 1}"#)
            .is_err());
        assert!(Tolerances::default()
            .with_json_overrides(r#"{"coordinate": 0}"#)
            .is_err());
        assert!(Tolerances::default().with_json_overrides("[1]").is_err());
    }
}
