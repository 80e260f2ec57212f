//! On-disk instance format.
//!
//! Every input is a single JSON document with a `schema_version`, a `kind`
//! tag, and a `payload` whose shape depends on the kind. Rationals travel as
//! strings ("3/4", "-2") so that nothing is lost to floating point. Unknown
//! fields are rejected everywhere; a typo in a corpus file should fail loudly
//! instead of silently relaxing an expectation.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use vacal_core::linalg::{Matrix, Vector};
use vacal_core::mappings::PolyMapping;
use vacal_core::normal_cones::PolyUnion;
use vacal_core::pl_functions::{AffinePiece, CellPL, ConvexPL};
use vacal_core::polyhedra::Polyhedron;
use vacal_core::scalar::{parse_scalar, Scalar};

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("unsupported schema version \"{0}\" (this build reads version \"1\")")]
    Version(String),
    #[error("invalid rational \"{0}\"")]
    Rational(String),
    #[error("{0}")]
    Shape(String),
}

fn shape(msg: impl Into<String>) -> SchemaError {
    SchemaError::Shape(msg.into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub payload: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<ExpectedSpec>,
}

impl InstanceFile {
    pub fn validate_version(&self) -> Result<(), SchemaError> {
        if self.schema_version != "1" {
            return Err(SchemaError::Version(self.schema_version.clone()));
        }
        Ok(())
    }

    pub fn set_payload(&self) -> Result<SetSpec, SchemaError> {
        self.typed_payload("set", Kind::Set)
    }

    pub fn function_payload(&self) -> Result<FunctionSpec, SchemaError> {
        self.typed_payload("function", Kind::Function)
    }

    pub fn mapping_payload(&self) -> Result<MappingSpec, SchemaError> {
        self.typed_payload("mapping", Kind::Mapping)
    }

    pub fn rule_payload(&self) -> Result<RuleSpec, SchemaError> {
        self.typed_payload("rule-instance", Kind::RuleInstance)
    }

    fn typed_payload<T: serde::de::DeserializeOwned>(
        &self,
        label: &str,
        want: Kind,
    ) -> Result<T, SchemaError> {
        if self.kind != want {
            return Err(shape(format!(
                "instance kind is {:?} but a {label} payload was requested",
                self.kind
            )));
        }
        serde_json::from_value(self.payload.clone())
            .map_err(|e| shape(format!("bad {label} payload: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Set,
    Function,
    Mapping,
    RuleInstance,
}

impl Kind {
    pub fn label(self) -> &'static str {
        match self {
            Kind::Set => "set",
            Kind::Function => "function",
            Kind::Mapping => "mapping",
            Kind::RuleInstance => "rule-instance",
        }
    }
}

/// One linear condition `normal . x <= rhs` (or `= rhs` under `eqs`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub normal: Vec<String>,
    pub rhs: String,
}

/// A single polyhedron, in exactly one of the two representations. Generator
/// fields describe conv(vertices) + cone(rays) + span(lineality); a nonempty
/// set in that form needs at least one vertex. With only constraint fields
/// (or none at all) the set is the solution set of the listed conditions.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ineqs: Option<Vec<RowSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eqs: Option<Vec<RowSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lineality: Option<Vec<Vec<String>>>,
}

impl PartSpec {
    pub fn to_polyhedron(&self, dim: usize) -> Result<Polyhedron, SchemaError> {
        let has_gens =
            self.vertices.is_some() || self.rays.is_some() || self.lineality.is_some();
        let has_rows = self.ineqs.is_some() || self.eqs.is_some();
        if has_gens && has_rows {
            return Err(shape(
                "a part must use either generators or constraints, not both",
            ));
        }
        if has_gens {
            let vertices = parse_points(self.vertices.as_deref().unwrap_or(&[]), dim)?;
            let rays = parse_points(self.rays.as_deref().unwrap_or(&[]), dim)?;
            let lineality = parse_points(self.lineality.as_deref().unwrap_or(&[]), dim)?;
            Ok(Polyhedron::from_vrep(dim, vertices, rays, lineality))
        } else {
            let ineqs = parse_rows(self.ineqs.as_deref().unwrap_or(&[]), dim)?;
            let eqs = parse_rows(self.eqs.as_deref().unwrap_or(&[]), dim)?;
            Ok(Polyhedron::from_hrep(dim, ineqs, eqs))
        }
    }
}

/// A finite union of polyhedra in a common ambient space.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub dim: usize,
    pub parts: Vec<PartSpec>,
}

impl SetSpec {
    pub fn to_union(&self) -> Result<PolyUnion, SchemaError> {
        let parts = self
            .parts
            .iter()
            .map(|p| p.to_polyhedron(self.dim))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolyUnion::new(self.dim, parts))
    }

    pub fn to_single(&self) -> Result<Polyhedron, SchemaError> {
        if self.parts.len() != 1 {
            return Err(shape(format!(
                "expected a single polyhedron, got a union of {} parts",
                self.parts.len()
            )));
        }
        self.parts[0].to_polyhedron(self.dim)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub gradient: Vec<String>,
    pub offset: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub cell: PartSpec,
    pub gradient: Vec<String>,
    pub offset: String,
}

/// A piecewise linear function in one of two forms: `pieces` (+ optional
/// `domain`) gives the pointwise maximum of affine pieces over the domain,
/// which is always convex; `cells` pins one affine piece to each cell of a
/// polyhedral cover and may describe a nonconvex function.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<Vec<PieceSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<PartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<CellSpec>>,
}

impl FunctionSpec {
    fn check_form(&self) -> Result<(), SchemaError> {
        match (&self.pieces, &self.cells) {
            (Some(_), Some(_)) => Err(shape("a function uses either pieces or cells, not both")),
            (None, None) => Err(shape("a function needs either pieces or cells")),
            (None, Some(_)) if self.domain.is_some() => {
                Err(shape("domain only applies to the pieces form"))
            }
            _ => Ok(()),
        }
    }

    pub fn is_convex_form(&self) -> bool {
        self.pieces.is_some()
    }

    pub fn to_convex(&self) -> Result<ConvexPL, SchemaError> {
        self.check_form()?;
        let Some(pieces) = &self.pieces else {
            return Err(shape(
                "this operation needs the convex pieces form of the function",
            ));
        };
        if pieces.is_empty() {
            // No pieces over a domain is the indicator of that domain.
            let domain = match &self.domain {
                Some(d) => d.to_polyhedron(self.dim)?,
                None => Polyhedron::full_space(self.dim),
            };
            return ConvexPL::indicator(domain).map_err(|e| shape(e.to_string()));
        }
        let parsed = pieces
            .iter()
            .map(|p| self.parse_piece(&p.gradient, &p.offset))
            .collect::<Result<Vec<_>, _>>()?;
        let domain = match &self.domain {
            Some(d) => d.to_polyhedron(self.dim)?,
            None => Polyhedron::full_space(self.dim),
        };
        ConvexPL::new(self.dim, parsed, domain).map_err(|e| shape(e.to_string()))
    }

    pub fn to_cell(&self) -> Result<CellPL, SchemaError> {
        self.check_form()?;
        if self.pieces.is_some() {
            return Ok(CellPL::from_convex(&self.to_convex()?));
        }
        let cells = self
            .cells
            .as_ref()
            .unwrap()
            .iter()
            .map(|c| {
                let poly = c.cell.to_polyhedron(self.dim)?;
                let piece = self.parse_piece(&c.gradient, &c.offset)?;
                Ok((poly, piece))
            })
            .collect::<Result<Vec<_>, SchemaError>>()?;
        CellPL::new(self.dim, cells).map_err(|e| shape(e.to_string()))
    }

    fn parse_piece(&self, gradient: &[String], offset: &str) -> Result<AffinePiece, SchemaError> {
        let g = parse_point(gradient, self.dim)?;
        let c = parse_one(offset)?;
        Ok(AffinePiece::new(g, c))
    }
}

/// A set-valued mapping given by its graph in the product of input and
/// output space (input coordinates first).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MappingSpec {
    pub dim_in: usize,
    pub dim_out: usize,
    pub graph: SetSpec,
}

impl MappingSpec {
    pub fn to_mapping(&self) -> Result<PolyMapping, SchemaError> {
        if self.graph.dim != self.dim_in + self.dim_out {
            return Err(shape(format!(
                "graph lives in dimension {} but dim_in + dim_out = {}",
                self.graph.dim,
                self.dim_in + self.dim_out
            )));
        }
        Ok(PolyMapping::new(
            self.dim_in,
            self.dim_out,
            self.graph.to_union()?,
        ))
    }
}

/// Payload of a rule instance. Only the fields the named rule consumes need
/// to be present; the runner reports which field is missing otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub rule_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<MappingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping1: Option<MappingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping2: Option<MappingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_mapping: Option<MappingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_mapping: Option<MappingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<FunctionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<FunctionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set1: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set2: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_bar: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_bar: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y1_bar: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y2_bar: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_star: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_bar: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_star: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assume_isc: Option<bool>,
}

/// What to compute on a set, function, or mapping instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub variant: String,
    pub point: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_star: Option<Vec<String>>,
}

/// Regression expectations checked by the suite runner. Sets compare by
/// exact set equality, independent of how either side is written down.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qc: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<SetSpec>,
    /// When true, additionally require that rhs is strictly larger than lhs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
}

pub fn parse_one(s: &str) -> Result<Scalar, SchemaError> {
    parse_scalar(s).map_err(|_| SchemaError::Rational(s.to_string()))
}

pub fn parse_point(coords: &[String], dim: usize) -> Result<Vector, SchemaError> {
    if coords.len() != dim {
        return Err(shape(format!(
            "point has {} coordinates, expected {dim}",
            coords.len()
        )));
    }
    coords.iter().map(|c| parse_one(c)).collect()
}

pub fn parse_points(rows: &[Vec<String>], dim: usize) -> Result<Vec<Vector>, SchemaError> {
    rows.iter().map(|r| parse_point(r, dim)).collect()
}

pub fn parse_matrix(rows: &[Vec<String>], cols: usize) -> Result<Matrix, SchemaError> {
    rows.iter().map(|r| parse_point(r, cols)).collect()
}

fn parse_rows(rows: &[RowSpec], dim: usize) -> Result<Vec<(Vector, Scalar)>, SchemaError> {
    rows.iter()
        .map(|r| Ok((parse_point(&r.normal, dim)?, parse_one(&r.rhs)?)))
        .collect()
}
