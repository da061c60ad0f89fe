use crate::Point;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid configuration field `{field}`: {message}")]
    ConfigField { field: String, message: String },

    #[error("geometric degeneracy: vertex {vertex} at ({:.6}, {:.6}) lies on the interface (|phi| = {phi:.3e})", point.x, point.y)]
    GeometricDegeneracy { vertex: usize, point: Point, phi: f64 },

    #[error("assumption violation: {0}")]
    AssumptionViolation(String),

    #[error("segment has no sign change of the level set")]
    NoIntersection,

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("local system of element {element} is not positive definite (lambda = {lambda}): {detail}")]
    LocalDegeneracy {
        element: usize,
        lambda: f64,
        detail: String,
    },

    #[error("matrix is not positive definite: pivot {pivot} = {value:.3e}")]
    NotSpd { pivot: usize, value: f64 },

    #[error("eigenvalue estimation did not converge (best bounds: max {max:.6e}, min {min:.6e})")]
    EstimationFailure { max: f64, min: f64 },

    #[error("round-off indicator undefined: exact vector has zero norm")]
    UndefinedIndicator,

    #[error("diagonal scaling impossible: diagonal entry {index} = {value:.3e} is not positive")]
    Scaling { index: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid-config",
            Error::ConfigField { .. } => "config-field",
            Error::GeometricDegeneracy { .. } => "geometric-degeneracy",
            Error::AssumptionViolation(_) => "assumption-violation",
            Error::NoIntersection => "no-intersection",
            Error::DegenerateRegion(_) => "degenerate-region",
            Error::LocalDegeneracy { .. } => "local-degeneracy",
            Error::NotSpd { .. } => "not-spd",
            Error::EstimationFailure { .. } => "estimation-failure",
            Error::UndefinedIndicator => "undefined-indicator",
            Error::Scaling { .. } => "scaling",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::Consistency(_) => "consistency",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    /// `{"error": kind, "message": ..., ...}` with the variant's fields.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
        });
        let extra = match self {
            Error::ConfigField { field, .. } => serde_json::json!({ "field": field }),
            Error::GeometricDegeneracy { vertex, point, phi } => {
                serde_json::json!({ "vertex": vertex, "point": [point.x, point.y], "phi": phi })
            }
            Error::LocalDegeneracy { element, lambda, .. } => {
                serde_json::json!({ "element": element, "lambda": lambda })
            }
            Error::NotSpd { pivot, value } => serde_json::json!({ "pivot": pivot, "value": value }),
            Error::Scaling { index, value } => serde_json::json!({ "index": index, "value": value }),
            _ => serde_json::json!({}),
        };
        if let (Some(m), serde_json::Value::Object(e)) = (v.as_object_mut(), extra) {
            m.extend(e);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_carries_kind_and_fields() {
        let e = Error::ConfigField {
            field: "lambda".into(),
            message: "must be in [1, 2], got 3".into(),
        };
        let j = e.to_json();
        assert_eq!(j["error"], "config-field");
        assert_eq!(j["field"], "lambda");
        assert!(j["message"].as_str().unwrap().contains("lambda"));
        let j = Error::NotSpd { pivot: 3, value: -1.0 }.to_json();
        assert_eq!(j["pivot"], 3);
    }
}
