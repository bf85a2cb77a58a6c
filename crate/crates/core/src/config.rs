//! Model configuration files (JSON).

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Interval,
    MetricGraph,
    Discrete,
}

/// Vertex identifiers may be written as integers or strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexId {
    Int(u64),
    Name(String),
}

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VertexId::Int(i) => write!(f, "{i}"),
            VertexId::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub from: VertexId,
    pub to: VertexId,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    DecLumped,
    FemP1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    pub n_per_edge: usize,
    pub scheme: Scheme,
}

/// Deliberate faults, used to exercise the verification and exit-code paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flip the sign of the normal-flux boundary map.
    FlipNormalFlux,
    /// Make every Dirichlet solve fail.
    FailSolve,
}

fn default_quadrature_order() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "type")]
    pub kind: ModelKind,
    pub edges: Vec<EdgeConfig>,
    /// Boundary vertices in boundary order. Defaults to both ends for an interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<VertexId>>,
    #[serde(default = "default_quadrature_order")]
    pub quadrature_order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretization: Option<DiscretizationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_fault: Option<Fault>,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ModelConfig = serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Unit-style interval of the given length with both ends as boundary.
    pub fn interval(length: f64) -> Self {
        ModelConfig {
            kind: ModelKind::Interval,
            edges: vec![EdgeConfig { from: VertexId::Int(0), to: VertexId::Int(1), length }],
            boundary: None,
            quadrature_order: default_quadrature_order(),
            discretization: None,
            inject_fault: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.edges.is_empty() {
            return Err(Error::config("edges", "at least one edge is required"));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(Error::config(format!("edges[{i}].length"), "must be > 0"));
            }
        }
        if self.quadrature_order == 0 {
            return Err(Error::config("quadrature_order", "must be >= 1"));
        }
        let vertices: BTreeSet<String> =
            self.edges.iter().flat_map(|e| [e.from.to_string(), e.to.to_string()]).collect();
        match self.kind {
            ModelKind::Interval => {
                if self.edges.len() != 1 {
                    return Err(Error::config("edges", "an interval model has exactly one edge"));
                }
                if self.edges[0].from == self.edges[0].to {
                    return Err(Error::config("edges[0].to", "an interval cannot be a loop"));
                }
            }
            ModelKind::Discrete => {
                let d = self
                    .discretization
                    .ok_or_else(|| Error::config("discretization", "required for type = discrete"))?;
                if d.n_per_edge == 0 {
                    return Err(Error::config("discretization.n_per_edge", "must be >= 1"));
                }
            }
            ModelKind::MetricGraph => {}
        }
        if let Some(boundary) = &self.boundary {
            if boundary.is_empty() {
                return Err(Error::config("boundary", "must not be empty"));
            }
            let mut seen = BTreeSet::new();
            for (i, v) in boundary.iter().enumerate() {
                let id = v.to_string();
                if !vertices.contains(&id) {
                    return Err(Error::config(format!("boundary[{i}]"), format!("vertex {id} has no incident edge")));
                }
                if !seen.insert(id.clone()) {
                    return Err(Error::config(format!("boundary[{i}]"), format!("duplicate vertex {id}")));
                }
            }
        } else if self.kind != ModelKind::Interval {
            return Err(Error::config("boundary", "required for this model type"));
        }
        if self.discretization.is_some() && self.kind != ModelKind::Discrete {
            return Err(Error::config("discretization", "only allowed for type = discrete"));
        }
        Ok(())
    }

    /// Boundary vertex ids, resolving the interval default.
    pub fn boundary_ids(&self) -> Vec<String> {
        match &self.boundary {
            Some(b) => b.iter().map(|v| v.to_string()).collect(),
            None => vec![self.edges[0].from.to_string(), self.edges[0].to.to_string()],
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ModelConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    ModelConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_interval() {
        let c =
            ModelConfig::from_json(r#"{"type": "interval", "edges": [{"from": 0, "to": 1, "length": 1.0}]}"#).unwrap();
        assert_eq!(c.kind, ModelKind::Interval);
        assert_eq!(c.quadrature_order, 32);
        assert_eq!(c.boundary_ids(), vec!["0", "1"]);
    }

    #[test]
    fn negative_length_names_the_field() {
        let err = ModelConfig::from_json(r#"{"type": "interval", "edges": [{"from": 0, "to": 1, "length": -1}]}"#)
            .unwrap_err();
        assert_eq!(err.to_string(), "edges[0].length: must be > 0");
    }

    #[test]
    fn unknown_field_is_named() {
        let err = ModelConfig::from_json(
            r#"{"type": "metric_graph", "edges": [{"from": "a", "to": "b", "length": 1}], "boundry": ["a"]}"#,
        )
        .unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("boundry"), "{err}");
    }

    #[test]
    fn boundary_must_be_known() {
        let err = ModelConfig::from_json(
            r#"{"type": "metric_graph", "edges": [{"from": "a", "to": "b", "length": 1}], "boundary": ["c"]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("boundary[0]"), "{err}");
    }

    #[test]
    fn discrete_needs_a_known_scheme() {
        let err = ModelConfig::from_json(
            r#"{"type": "discrete", "edges": [{"from": 0, "to": 1, "length": 1}], "boundary": [0, 1],
                "discretization": {"n_per_edge": 4, "scheme": "fem-p2"}}"#,
        )
        .unwrap_err();
        assert!(err.is_config() && err.to_string().contains("fem-p2"), "{err}");
    }
}
