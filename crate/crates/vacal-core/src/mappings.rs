//! Set-valued mappings with polyhedral graphs.
//!
//! A mapping `F : R^n => R^m` is stored as its graph, a finite union of
//! polyhedra in `R^{n+m}`. Coderivatives are slices of graph normal cones:
//! `D*F(x,y)(y*) = {x* : (x*, -y*) in N((x,y); gph F)}`, with the regular,
//! limiting, or Clarke cone supplying the three flavors. Structural
//! builders (sums, compositions, restrictions) assemble graphs by lifting
//! parts into a shared coordinate space, intersecting, and projecting, so
//! the results stay exact.
//!
//! Some calculus rules for coderivatives are only valid when an auxiliary
//! mapping is inner semicontinuous at the reference point. That property is
//! not decidable from one point alone, so this module offers certificates:
//! verified sufficient conditions reported as `IscHint::Holds`, with
//! everything else left `Unknown` for the caller to assume explicitly.

use crate::linalg::{neg, unit, zeros, Vector};
use crate::normal_cones::{
    clarke_normal_union, frechet_normal_union, limiting_normal_union, ConeUnion, PolyUnion,
};
use crate::polyhedra::{Cone, Polyhedron};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMapping {
    dim_in: usize,
    dim_out: usize,
    graph: PolyUnion,
}

impl PolyMapping {
    pub fn new(dim_in: usize, dim_out: usize, graph: PolyUnion) -> Self {
        assert_eq!(graph.dim(), dim_in + dim_out, "graph lives in the product space");
        PolyMapping { dim_in, dim_out, graph }
    }

    /// `F(x) = K` for every x.
    pub fn constant(dim_in: usize, values: &Polyhedron) -> Self {
        let graph = PolyUnion::from_poly(Polyhedron::full_space(dim_in).product(values));
        PolyMapping { dim_in, dim_out: values.dim(), graph }
    }

    /// Single-valued affine map `x -> Mx + c` as a mapping.
    pub fn affine(m: &[Vector], c: &[Scalar]) -> Self {
        let dim_out = m.len();
        assert_eq!(dim_out, c.len(), "offset length mismatch");
        let dim_in = m.first().map_or(0, |r| r.len());
        let mut eqs = Vec::new();
        for (row, ci) in m.iter().zip(c) {
            let mut r = row.clone();
            r.extend(neg(&unit(dim_out, eqs.len())));
            eqs.push((r, -ci.clone()));
        }
        let graph = PolyUnion::from_poly(Polyhedron::from_hrep(dim_in + dim_out, vec![], eqs));
        PolyMapping { dim_in, dim_out, graph }
    }

    /// The epigraphical mapping `x -> [f(x), +inf)` of a convex function.
    pub fn from_epigraph_of(f: &crate::pl_functions::ConvexPL) -> Self {
        PolyMapping {
            dim_in: f.dim(),
            dim_out: 1,
            graph: PolyUnion::from_poly(f.epigraph()),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn graph(&self) -> &PolyUnion {
        &self.graph
    }

    pub fn graph_contains(&self, x: &[Scalar], y: &[Scalar]) -> bool {
        let mut p = x.to_vec();
        p.extend(y.iter().cloned());
        self.graph.contains(&p)
    }

    pub fn image(&self, x: &[Scalar]) -> PolyUnion {
        assert_eq!(x.len(), self.dim_in, "input dimension mismatch");
        self.graph.substitute(0, x)
    }

    pub fn domain(&self) -> PolyUnion {
        self.graph.project(&(0..self.dim_in).collect::<Vec<_>>())
    }

    pub fn range(&self) -> PolyUnion {
        self.graph.project(&(self.dim_in..self.dim_in + self.dim_out).collect::<Vec<_>>())
    }

    /// Swaps input and output blocks.
    pub fn inverse(&self) -> PolyMapping {
        let (n, m) = (self.dim_in, self.dim_out);
        let mut rows = Vec::with_capacity(n + m);
        for i in 0..m {
            rows.push(unit(n + m, n + i));
        }
        for i in 0..n {
            rows.push(unit(n + m, i));
        }
        PolyMapping { dim_in: m, dim_out: n, graph: self.graph.linear_image(&rows) }
    }

    /// Exactly one output per input across the whole graph: the set of
    /// pairs `(x, y, y')` with both `(x,y)` and `(x,y')` in the graph must
    /// satisfy `y = y'`. Checking all part pairs, including a part against
    /// itself, covers both within-part and cross-part ambiguity.
    pub fn is_single_valued(&self) -> bool {
        let (n, m) = (self.dim_in, self.dim_out);
        let total = n + 2 * m;
        let first: Vec<usize> = (0..n + m).collect();
        let second: Vec<usize> = (0..n).chain(n + m..total).collect();
        let mut diag_eqs = Vec::new();
        for k in 0..m {
            let mut row = zeros(total);
            row[n + k] = crate::scalar::one();
            row[n + m + k] = -crate::scalar::one();
            diag_eqs.push((row, crate::scalar::zero()));
        }
        let diag = Polyhedron::from_hrep(total, vec![], diag_eqs);
        for p in self.graph.parts() {
            for q in self.graph.parts() {
                let both = place(p, total, &first).intersect(&place(q, total, &second));
                if !both.is_subset(&diag) {
                    return false;
                }
            }
        }
        true
    }

    // ----- coderivatives -----

    fn point(&self, x: &[Scalar], y: &[Scalar]) -> Vector {
        assert_eq!(x.len(), self.dim_in, "input dimension mismatch");
        assert_eq!(y.len(), self.dim_out, "output dimension mismatch");
        let mut p = x.to_vec();
        p.extend(y.iter().cloned());
        p
    }

    pub fn limiting_normal_cone_at(&self, x: &[Scalar], y: &[Scalar]) -> ConeUnion {
        limiting_normal_union(&self.graph, &self.point(x, y))
    }

    pub fn clarke_normal_cone_at(&self, x: &[Scalar], y: &[Scalar]) -> Cone {
        clarke_normal_union(&self.graph, &self.point(x, y))
    }

    /// Regular coderivative at a graph point.
    pub fn regular_coderivative(&self, x: &[Scalar], y: &[Scalar], ystar: &[Scalar]) -> Polyhedron {
        let n = frechet_normal_union(&self.graph, &self.point(x, y));
        if n.is_empty_marker() {
            return Polyhedron::empty(self.dim_in);
        }
        n.as_poly().substitute(self.dim_in, &neg(ystar))
    }

    /// Limiting coderivative: a union, one slice per limiting cone part.
    pub fn coderivative(&self, x: &[Scalar], y: &[Scalar], ystar: &[Scalar]) -> PolyUnion {
        self.limiting_normal_cone_at(x, y).slice_last(&neg(ystar))
    }

    /// Clarke (convexified) coderivative.
    pub fn clarke_coderivative(
        &self,
        x: &[Scalar],
        y: &[Scalar],
        ystar: &[Scalar],
    ) -> Polyhedron {
        let n = self.clarke_normal_cone_at(x, y);
        if n.is_empty_marker() {
            return Polyhedron::empty(self.dim_in);
        }
        n.as_poly().substitute(self.dim_in, &neg(ystar))
    }

    /// `{y* : 0 in D*F(x,y)(y*)}` for the Clarke coderivative: fix the
    /// input block of the Clarke graph normal cone to zero and flip sign.
    pub fn clarke_coderivative_kernel(&self, x: &[Scalar], y: &[Scalar]) -> Cone {
        let n = self.clarke_normal_cone_at(x, y);
        if n.is_empty_marker() {
            return Cone::empty_marker(self.dim_out);
        }
        let at_zero = n.as_poly().substitute(0, &zeros(self.dim_in));
        let flip: Vec<Vector> = (0..self.dim_out).map(|i| neg(&unit(self.dim_out, i))).collect();
        Cone::from_poly(at_zero.linear_image(&flip))
    }

    // ----- structural builders -----

    /// Pointwise sum `x -> F(x) + G(x)`, via the lifted space (x, y1, y2).
    pub fn sum(&self, other: &PolyMapping) -> PolyMapping {
        assert_eq!(self.dim_in, other.dim_in, "input dimensions differ");
        assert_eq!(self.dim_out, other.dim_out, "output dimensions differ");
        let (n, m) = (self.dim_in, self.dim_out);
        let total = n + 2 * m;
        let first: Vec<usize> = (0..n + m).collect();
        let second: Vec<usize> = (0..n).chain(n + m..total).collect();
        // (x, y1, y2) -> (x, y1 + y2)
        let mut proj: Vec<Vector> = Vec::new();
        for i in 0..n {
            proj.push(unit(total, i));
        }
        for k in 0..m {
            let mut row = zeros(total);
            row[n + k] = crate::scalar::one();
            row[n + m + k] = crate::scalar::one();
            proj.push(row);
        }
        let mut parts = Vec::new();
        for p in self.graph.parts() {
            for q in other.graph.parts() {
                let lifted = place(p, total, &first).intersect(&place(q, total, &second));
                parts.push(lifted.linear_image(&proj));
            }
        }
        PolyMapping { dim_in: n, dim_out: m, graph: PolyUnion::new(n + m, parts) }
    }

    /// Composition `x -> self(inner(x))`, eliminating the middle variable.
    pub fn compose_after(&self, inner: &PolyMapping) -> PolyMapping {
        assert_eq!(inner.dim_out, self.dim_in, "composition dimensions differ");
        let (n, m, q) = (inner.dim_in, inner.dim_out, self.dim_out);
        let total = n + m + q;
        let inner_pos: Vec<usize> = (0..n + m).collect();
        let outer_pos: Vec<usize> = (n..total).collect();
        let keep: Vec<usize> = (0..n).chain(n + m..total).collect();
        let mut parts = Vec::new();
        for p in inner.graph.parts() {
            for g in self.graph.parts() {
                let lifted = place(p, total, &inner_pos).intersect(&place(g, total, &outer_pos));
                parts.push(lifted.project(&keep));
            }
        }
        PolyMapping { dim_in: n, dim_out: q, graph: PolyUnion::new(n + q, parts) }
    }

    /// Restriction to a union of sets: `F(x)` for x in the union, empty
    /// elsewhere.
    pub fn restrict(&self, omega: &PolyUnion) -> PolyMapping {
        assert_eq!(omega.dim(), self.dim_in, "restriction set dimension mismatch");
        let out_space = PolyUnion::from_poly(Polyhedron::full_space(self.dim_out));
        let cylinder = omega.product(&out_space);
        PolyMapping {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            graph: self.graph.intersect(&cylinder),
        }
    }
}

/// Embeds the rows of `p` into a `total`-dimensional space, sending the
/// i-th coordinate of `p` to coordinate `positions[i]`.
fn place(p: &Polyhedron, total: usize, positions: &[usize]) -> Polyhedron {
    assert_eq!(positions.len(), p.dim());
    let spread = |(a, b): &(Vector, Scalar)| {
        let mut row = zeros(total);
        for (coef, &pos) in a.iter().zip(positions) {
            row[pos] = coef.clone();
        }
        (row, b.clone())
    };
    Polyhedron::from_hrep(
        total,
        p.ineqs().iter().map(spread).collect(),
        p.eqs().iter().map(spread).collect(),
    )
}

// ----- inner semicontinuity certificates -----

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IscHint {
    Holds(&'static str),
    Unknown,
}

impl IscHint {
    pub fn holds(&self) -> bool {
        matches!(self, IscHint::Holds(_))
    }
}

/// The split map of a sum at `(x, y)`: pairs `(y1, y2)` with `y1 + y2 = y`
/// and `yi in Fi(x)`.
pub fn sum_split_map(
    f1: &PolyMapping,
    f2: &PolyMapping,
    x: &[Scalar],
    y: &[Scalar],
) -> PolyUnion {
    assert_eq!(f1.dim_in, f2.dim_in, "input dimensions differ");
    assert_eq!(f1.dim_out, f2.dim_out, "output dimensions differ");
    let m = f1.dim_out;
    let mut eqs = Vec::new();
    for k in 0..m {
        let mut row = zeros(2 * m);
        row[k] = crate::scalar::one();
        row[m + k] = crate::scalar::one();
        eqs.push((row, y[k].clone()));
    }
    let diag = Polyhedron::from_hrep(2 * m, vec![], eqs);
    f1.image(x).product(&f2.image(x)).intersect(&PolyUnion::from_poly(diag))
}

/// Is the part union unchanged by adding the upward ray in the last
/// coordinate? True for epigraphs.
fn upward_closed(f: &PolyMapping) -> bool {
    let d = f.graph.dim();
    let up = Polyhedron::from_vrep(d, vec![zeros(d)], vec![unit(d, d - 1)], vec![]);
    let shifted = PolyUnion::new(
        d,
        f.graph.parts().iter().map(|p| p.minkowski_sum(&up)).collect(),
    );
    shifted.is_subset(&f.graph)
}

/// Certificate search for inner semicontinuity of the split map of
/// `F1 + F2` at `(x, y)` relative to the graph of the sum.
///
/// `Holds` is returned only with a proof-backed reason:
/// - one summand is single-valued, so the split is forced and moves
///   continuously (single-valued polyhedral-graph mappings are continuous
///   on their domains);
/// - both mappings are epigraphical with scalar outputs and the split at
///   `(x, y)` is a single point, which pins the split to the function
///   values; polyhedral functions are continuous relative to their domains.
pub fn sum_isc_hint(
    f1: &PolyMapping,
    f2: &PolyMapping,
    x: &[Scalar],
    y: &[Scalar],
) -> IscHint {
    if f1.is_single_valued() || f2.is_single_valued() {
        return IscHint::Holds("one summand is single-valued with a polyhedral graph");
    }
    if f1.dim_out == 1 && upward_closed(f1) && upward_closed(f2) {
        let s = sum_split_map(f1, f2, x, y);
        if s.parts().len() == 1 && s.parts()[0].affine_dim() == Some(0) {
            return IscHint::Holds("epigraphical summands with a unique split");
        }
    }
    IscHint::Unknown
}

/// Certificate search for inner semicontinuity of the intermediate-point
/// map `(x, z) -> F(x) ∩ G^{-1}(z)` of a composition `G ∘ F`.
pub fn composition_isc_hint(inner: &PolyMapping, outer: &PolyMapping) -> IscHint {
    if inner.is_single_valued() {
        return IscHint::Holds("inner mapping is single-valued with a polyhedral graph");
    }
    if outer.inverse().is_single_valued() {
        return IscHint::Holds("outer mapping has a single-valued inverse");
    }
    IscHint::Unknown
}

/// Certificate search for inner semicontinuity of a constrained image map
/// `x -> F(x) ∩ Ω`. Both certificates are independent of the constraint
/// set: a single-valued or constant mapping moves its images continuously
/// wherever the intersection stays nonempty.
pub fn preimage_isc_hint(f: &PolyMapping) -> IscHint {
    if f.is_single_valued() {
        return IscHint::Holds("the mapping is single-valued with a polyhedral graph");
    }
    let cylinder = PolyUnion::from_poly(Polyhedron::full_space(f.dim_in())).product(&f.range());
    if cylinder.set_equal(f.graph()) {
        return IscHint::Holds("the mapping is constant");
    }
    IscHint::Unknown
}
