//! Piecewise linear functions in two exact forms.
//!
//! `ConvexPL` is a max of affine pieces plus the indicator of a polyhedral
//! domain; it covers every proper polyhedral convex function. `CellPL` is a
//! cell complex with one affine piece per cell, agreeing on overlaps; that
//! is the natural format for the nonconvex side (differences of convex
//! functions, selections, negatives of norms).
//!
//! Both forms evaluate exactly, convert to epigraph polyhedra exactly, and
//! round-trip through the epigraph where the epigraph determines the data.

use crate::linalg::{dot, lex_cmp, neg, zeros, Vector};
use crate::polyhedra::{Cone, Polyhedron};
use crate::scalar::{one, zero, Scalar};
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AffinePiece {
    pub gradient: Vector,
    pub offset: Scalar,
}

impl AffinePiece {
    pub fn new(gradient: Vector, offset: Scalar) -> Self {
        AffinePiece { gradient, offset }
    }

    pub fn eval(&self, x: &[Scalar]) -> Scalar {
        dot(&self.gradient, x) + &self.offset
    }

    pub fn negate(&self) -> Self {
        AffinePiece { gradient: neg(&self.gradient), offset: -&self.offset }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlError {
    #[error("a function needs at least one affine piece")]
    NoPieces,
    #[error("the effective domain is empty")]
    EmptyDomain,
    #[error("dimension mismatch between pieces and domain")]
    DimMismatch,
    #[error("every cell must be a nonempty polyhedron")]
    EmptyCell,
    #[error("cell values disagree on an overlap at {witness:?}")]
    CellDisagreement { witness: Vector },
    #[error("the polyhedron is not an epigraph (not upward closed in the last coordinate)")]
    NotAnEpigraph,
    #[error("the function described by this epigraph is unbounded below on its domain")]
    UnboundedBelow,
}

/// Extended value of a one-sided directional derivative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtVal {
    Finite(Scalar),
    PlusInfinity,
}

impl ExtVal {
    pub fn finite(&self) -> Option<&Scalar> {
        match self {
            ExtVal::Finite(s) => Some(s),
            ExtVal::PlusInfinity => None,
        }
    }
}

/// `f(x) = max_i (a_i . x + b_i)` on a polyhedral domain, `+inf` outside.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexPL {
    dim: usize,
    pieces: Vec<AffinePiece>,
    domain: Polyhedron,
}

impl ConvexPL {
    pub fn new(dim: usize, pieces: Vec<AffinePiece>, domain: Polyhedron) -> Result<Self, PlError> {
        if pieces.is_empty() {
            return Err(PlError::NoPieces);
        }
        if pieces.iter().any(|p| p.gradient.len() != dim) || domain.dim() != dim {
            return Err(PlError::DimMismatch);
        }
        if domain.is_empty() {
            return Err(PlError::EmptyDomain);
        }
        let mut pieces = pieces;
        pieces.sort_by(|p, q| lex_cmp(&p.gradient, &q.gradient).then_with(|| p.offset.cmp(&q.offset)));
        pieces.dedup();
        Ok(ConvexPL { dim, pieces, domain })
    }

    /// The indicator function of a nonempty polyhedron: 0 inside, +inf out.
    pub fn indicator(domain: Polyhedron) -> Result<Self, PlError> {
        let dim = domain.dim();
        Self::new(dim, vec![AffinePiece::new(zeros(dim), zero())], domain)
    }

    pub fn affine(gradient: Vector, offset: Scalar) -> Self {
        let dim = gradient.len();
        ConvexPL {
            dim,
            pieces: vec![AffinePiece::new(gradient, offset)],
            domain: Polyhedron::full_space(dim),
        }
    }

    /// `max(a_1 . x, ..., a_k . x)` through given linear slopes, full domain.
    pub fn max_of_linear(dim: usize, slopes: Vec<Vector>) -> Result<Self, PlError> {
        let pieces = slopes.into_iter().map(|g| AffinePiece::new(g, zero())).collect();
        Self::new(dim, pieces, Polyhedron::full_space(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn domain(&self) -> &Polyhedron {
        &self.domain
    }

    pub fn eval(&self, x: &[Scalar]) -> Option<Scalar> {
        if !self.domain.contains(x) {
            return None;
        }
        self.pieces.iter().map(|p| p.eval(x)).max()
    }

    fn active_pieces(&self, x: &[Scalar], value: &Scalar) -> Vec<&AffinePiece> {
        self.pieces.iter().filter(|p| p.eval(x) == *value).collect()
    }

    /// `{(x, t) : x in dom, t >= f(x)}` in one extra dimension.
    pub fn epigraph(&self) -> Polyhedron {
        let mut ineqs = Vec::new();
        for p in &self.pieces {
            let mut row = p.gradient.clone();
            row.push(-one());
            ineqs.push((row, -p.offset.clone()));
        }
        for (a, b) in self.domain.ineqs() {
            let mut row = a.clone();
            row.push(zero());
            ineqs.push((row, b.clone()));
        }
        let eqs = self
            .domain
            .eqs()
            .iter()
            .map(|(a, b)| {
                let mut row = a.clone();
                row.push(zero());
                (row, b.clone())
            })
            .collect();
        Polyhedron::from_hrep(self.dim + 1, ineqs, eqs)
    }

    /// Reads a function back off an epigraph polyhedron: rows with a
    /// negative last coefficient become pieces, rows not involving the last
    /// coordinate become the domain. Rejects sets that are not upward
    /// closed and functions with no affine minorant on their domain.
    pub fn from_epigraph(epi: &Polyhedron) -> Result<Self, PlError> {
        assert!(epi.dim() >= 1, "an epigraph needs at least one coordinate");
        let dim = epi.dim() - 1;
        if epi.is_empty() {
            return Err(PlError::EmptyDomain);
        }
        let mut pieces = Vec::new();
        let mut dom_ineqs = Vec::new();
        for (row, c) in epi.ineqs() {
            let (a, g) = (&row[..dim], &row[dim]);
            if g.is_zero() {
                dom_ineqs.push((a.to_vec(), c.clone()));
            } else if g.is_negative() {
                let scale = -g.clone();
                pieces.push(AffinePiece::new(
                    a.iter().map(|x| x / &scale).collect(),
                    c / g,
                ));
            } else {
                return Err(PlError::NotAnEpigraph);
            }
        }
        let mut dom_eqs = Vec::new();
        for (row, c) in epi.eqs() {
            let (a, g) = (&row[..dim], &row[dim]);
            if !g.is_zero() {
                return Err(PlError::NotAnEpigraph);
            }
            dom_eqs.push((a.to_vec(), c.clone()));
        }
        if pieces.is_empty() {
            return Err(PlError::UnboundedBelow);
        }
        let domain = Polyhedron::from_hrep(dim, dom_ineqs, dom_eqs);
        let f = Self::new(dim, pieces, domain)?;
        debug_assert!(f.epigraph().set_equal(epi));
        Ok(f)
    }

    /// Subgradients at `x̄`: the convex hull of the active slopes, widened
    /// by the normal cone of the domain. Empty when `x̄` is outside.
    pub fn subdifferential(&self, x: &[Scalar]) -> Polyhedron {
        let value = match self.eval(x) {
            Some(v) => v,
            None => return Polyhedron::empty(self.dim),
        };
        let grads: Vec<Vector> =
            self.active_pieces(x, &value).iter().map(|p| p.gradient.clone()).collect();
        let hull = Polyhedron::from_vrep(self.dim, grads, vec![], vec![]);
        hull.minkowski_sum(self.domain.normal_cone_convex(x).as_poly())
    }

    /// Directions along which `f` grows at most linearly from `x̄`: the
    /// normal cone of the domain, read off the horizontal part of the
    /// epigraph normal cone.
    pub fn singular_subdifferential(&self, x: &[Scalar]) -> Cone {
        if !self.domain.contains(x) {
            return Cone::empty_marker(self.dim);
        }
        let value = self.eval(x).expect("checked membership");
        let mut xt = x.to_vec();
        xt.push(value);
        let n = self.epigraph().normal_cone_convex(&xt);
        Cone::from_poly(n.as_poly().substitute(self.dim, &[zero()]))
    }

    /// One-sided derivative `t -> f(x̄ + t v)` at `t = 0+`; `PlusInfinity`
    /// when the direction immediately leaves the domain. `None` off domain.
    pub fn directional_derivative(&self, x: &[Scalar], v: &[Scalar]) -> Option<ExtVal> {
        let value = self.eval(x)?;
        if !self.domain.tangent_cone_convex(x).contains(v) {
            return Some(ExtVal::PlusInfinity);
        }
        let slope = self
            .active_pieces(x, &value)
            .iter()
            .map(|p| dot(&p.gradient, v))
            .max()
            .expect("at least one active piece");
        Some(ExtVal::Finite(slope))
    }

    /// Pointwise sum; defined where both domains meet.
    pub fn sum(&self, other: &ConvexPL) -> Result<ConvexPL, PlError> {
        if self.dim != other.dim {
            return Err(PlError::DimMismatch);
        }
        let mut pieces = Vec::new();
        for p in &self.pieces {
            for q in &other.pieces {
                pieces.push(AffinePiece::new(
                    crate::linalg::add(&p.gradient, &q.gradient),
                    &p.offset + &q.offset,
                ));
            }
        }
        Self::new(self.dim, pieces, self.domain.intersect(&other.domain))
    }

    /// Pointwise max; defined where both domains meet.
    pub fn max(&self, other: &ConvexPL) -> Result<ConvexPL, PlError> {
        if self.dim != other.dim {
            return Err(PlError::DimMismatch);
        }
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        Self::new(self.dim, pieces, self.domain.intersect(&other.domain))
    }

    /// `x -> f(Mx + c)`; `m` is row-major with `self.dim` rows.
    pub fn precompose_affine(&self, m: &[Vector], c: &[Scalar]) -> Result<ConvexPL, PlError> {
        assert_eq!(m.len(), self.dim, "matrix height mismatch");
        assert_eq!(c.len(), self.dim, "offset dimension mismatch");
        let in_dim = m.first().map_or(0, |r| r.len());
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                AffinePiece::new(
                    crate::linalg::mat_t_vec(m, &p.gradient),
                    dot(&p.gradient, c) + &p.offset,
                )
            })
            .collect();
        let shifted = self.domain.translate(&neg(c));
        Self::new(in_dim, pieces, shifted.linear_preimage(m))
    }

    /// Nonnegative scaling `(c f)(x) = c * f(x)`.
    pub fn scale(&self, c: &Scalar) -> ConvexPL {
        assert!(!c.is_negative(), "scaling a convex function needs c >= 0");
        if c.is_zero() {
            return ConvexPL {
                dim: self.dim,
                pieces: vec![AffinePiece::new(zeros(self.dim), zero())],
                domain: self.domain.clone(),
            };
        }
        ConvexPL {
            dim: self.dim,
            pieces: self
                .pieces
                .iter()
                .map(|p| {
                    AffinePiece::new(p.gradient.iter().map(|g| g * c).collect(), &p.offset * c)
                })
                .collect(),
            domain: self.domain.clone(),
        }
    }
}

/// A function given by affine pieces on closed polyhedral cells; values must
/// agree wherever cells overlap, so the data defines one function on the
/// union of the cells. The union need not be convex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellPL {
    dim: usize,
    cells: Vec<(Polyhedron, AffinePiece)>,
}

impl CellPL {
    pub fn new(dim: usize, cells: Vec<(Polyhedron, AffinePiece)>) -> Result<Self, PlError> {
        if cells.is_empty() {
            return Err(PlError::NoPieces);
        }
        for (c, p) in &cells {
            if c.dim() != dim || p.gradient.len() != dim {
                return Err(PlError::DimMismatch);
            }
            if c.is_empty() {
                return Err(PlError::EmptyCell);
            }
        }
        for i in 0..cells.len() {
            for j in i + 1..cells.len() {
                check_agreement(&cells[i], &cells[j])?;
            }
        }
        Ok(CellPL { dim, cells })
    }

    /// Splits a max-form function into its linearity cells: one per piece,
    /// where that piece attains the max.
    pub fn from_convex(f: &ConvexPL) -> CellPL {
        let mut cells = Vec::new();
        for (i, p) in f.pieces().iter().enumerate() {
            let mut ineqs: Vec<(Vector, Scalar)> = Vec::new();
            for (j, q) in f.pieces().iter().enumerate() {
                if i == j {
                    continue;
                }
                // q <= p on the cell
                let row: Vector =
                    q.gradient.iter().zip(&p.gradient).map(|(a, b)| a - b).collect();
                ineqs.push((row, &p.offset - &q.offset));
            }
            let region = Polyhedron::from_hrep(f.dim(), ineqs, vec![]);
            let cell = region.intersect(f.domain());
            if !cell.is_empty() {
                cells.push((cell, p.clone()));
            }
        }
        CellPL { dim: f.dim(), cells }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[(Polyhedron, AffinePiece)] {
        &self.cells
    }

    pub fn eval(&self, x: &[Scalar]) -> Option<Scalar> {
        self.cells.iter().find(|(c, _)| c.contains(x)).map(|(_, p)| p.eval(x))
    }

    pub fn negate(&self) -> CellPL {
        CellPL {
            dim: self.dim,
            cells: self.cells.iter().map(|(c, p)| (c.clone(), p.negate())).collect(),
        }
    }

    /// Pointwise sum on the common refinement of the two cell complexes.
    pub fn sum(&self, other: &CellPL) -> Result<CellPL, PlError> {
        if self.dim != other.dim {
            return Err(PlError::DimMismatch);
        }
        let mut cells = Vec::new();
        for (c1, p1) in &self.cells {
            for (c2, p2) in &other.cells {
                let c = c1.intersect(c2);
                if !c.is_empty() {
                    cells.push((
                        c,
                        AffinePiece::new(
                            crate::linalg::add(&p1.gradient, &p2.gradient),
                            &p1.offset + &p2.offset,
                        ),
                    ));
                }
            }
        }
        if cells.is_empty() {
            return Err(PlError::EmptyDomain);
        }
        Ok(CellPL { dim: self.dim, cells })
    }

    /// Epigraph pieces `{(x,t) : x in cell, t >= value}`, one per cell;
    /// their union is the epigraph of the function.
    pub fn epigraph_parts(&self) -> Vec<Polyhedron> {
        self.cells.iter().map(|(c, p)| lift_cell(c, p, true)).collect()
    }

    /// Graph pieces `{(x, f(x)) : x in cell}`.
    pub fn graph_parts(&self) -> Vec<Polyhedron> {
        self.cells.iter().map(|(c, p)| lift_cell(c, p, false)).collect()
    }
}

/// Lifts a cell into (x, t) space, as `t >= a.x + b` over the cell when
/// `epi` is set, as the graph `t = a.x + b` otherwise.
fn lift_cell(cell: &Polyhedron, piece: &AffinePiece, epi: bool) -> Polyhedron {
    let dim = cell.dim();
    let mut ineqs: Vec<(Vector, Scalar)> = Vec::new();
    let mut eqs: Vec<(Vector, Scalar)> = Vec::new();
    for (a, b) in cell.ineqs() {
        let mut row = a.clone();
        row.push(zero());
        ineqs.push((row, b.clone()));
    }
    for (a, b) in cell.eqs() {
        let mut row = a.clone();
        row.push(zero());
        eqs.push((row, b.clone()));
    }
    let mut frow = piece.gradient.clone();
    frow.push(-one());
    if epi {
        ineqs.push((frow, -piece.offset.clone()));
    } else {
        eqs.push((frow, -piece.offset.clone()));
    }
    Polyhedron::from_hrep(dim + 1, ineqs, eqs)
}

fn check_agreement(
    (c1, p1): &(Polyhedron, AffinePiece),
    (c2, p2): &(Polyhedron, AffinePiece),
) -> Result<(), PlError> {
    let overlap = c1.intersect(c2);
    if overlap.is_empty() {
        return Ok(());
    }
    let d: Vector = p1.gradient.iter().zip(&p2.gradient).map(|(a, b)| a - b).collect();
    let db = &p1.offset - &p2.offset;
    for v in overlap.vertices() {
        if dot(&d, v) + &db != zero() {
            return Err(PlError::CellDisagreement { witness: v.clone() });
        }
    }
    for r in overlap.rays().iter().chain(overlap.lineality()) {
        if !dot(&d, r).is_zero() {
            let witness =
                crate::linalg::add(&overlap.vertices()[0], r);
            return Err(PlError::CellDisagreement { witness });
        }
    }
    Ok(())
}

/// `|x_1| + ... + |x_n|` as a max of sign patterns; handy in tests and as a
/// canonical Lipschitz example.
pub fn l1_norm(dim: usize) -> ConvexPL {
    let mut slopes = vec![Vector::new()];
    for _ in 0..dim {
        let mut next = Vec::new();
        for s in &slopes {
            let mut a = s.clone();
            a.push(one());
            next.push(a);
            let mut b = s.clone();
            b.push(-one());
            next.push(b);
        }
        slopes = next;
    }
    ConvexPL::max_of_linear(dim, slopes).expect("nonempty slope list")
}
