//! Normal cones beyond the convex case.
//!
//! Sets here are finite unions of polyhedra. At a point of such a union the
//! regular (Fréchet) normal cone is the intersection of the part-wise
//! convex normal cones; the limiting cone collects the regular cones from
//! all nearby points, which for polyhedral data is a finite union computed
//! by stratifying a neighborhood of the point; the Clarke (convexified)
//! cone is the closed convex hull of the limiting one. Subdifferentials of
//! piecewise linear functions are read off epigraph normal cones by fixing
//! the vertical multiplier: -1 for the subgradients themselves, 0 for the
//! horizon directions.
//!
//! Inclusions between unions are decided exactly: the difference of closed
//! polyhedra is split into regions bounded by weak and strict rows, and
//! strict feasibility is settled by a slack maximization over the lifted
//! polyhedron, so every negative answer comes with a rational witness
//! point.

use crate::linalg::{add, dot, lex_cmp, primitive_signed, scale, unit, Vector};
use crate::pl_functions::CellPL;
use crate::polyhedra::{lp, Cone, Polyhedron};
use crate::scalar::{int, one, rat, zero, Scalar};
use num_traits::{Signed, Zero};

/// A finite union of nonempty polyhedra in a common dimension. Parts that
/// lie inside another part are dropped on construction, and the remainder
/// is sorted, so equal unions built from equal part sets compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyUnion {
    dim: usize,
    parts: Vec<Polyhedron>,
}

impl PolyUnion {
    pub fn new(dim: usize, parts: Vec<Polyhedron>) -> Self {
        let mut kept: Vec<Polyhedron> = Vec::new();
        for p in parts.into_iter().filter(|p| !p.is_empty()) {
            assert_eq!(p.dim(), dim, "dimension mismatch");
            kept.push(p);
        }
        let mut keep_flags = vec![true; kept.len()];
        for i in 0..kept.len() {
            if !keep_flags[i] {
                continue;
            }
            for j in 0..kept.len() {
                if i != j
                    && keep_flags[j]
                    && kept[i].is_subset(&kept[j])
                    && (!kept[j].is_subset(&kept[i]) || j < i)
                {
                    keep_flags[i] = false;
                    break;
                }
            }
        }
        let mut parts: Vec<Polyhedron> = kept
            .into_iter()
            .zip(keep_flags)
            .filter_map(|(p, k)| if k { Some(p) } else { None })
            .collect();
        parts.sort();
        parts.dedup();
        PolyUnion { dim, parts }
    }

    pub fn from_poly(p: Polyhedron) -> Self {
        let dim = p.dim();
        Self::new(dim, vec![p])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parts(&self) -> &[Polyhedron] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: &[Scalar]) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    /// If some point of `self` escapes `other`, returns one such point.
    pub fn subset_witness(&self, other: &PolyUnion) -> Option<Vector> {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for p in &self.parts {
            if let Some(w) = cover_witness(&Region::from_poly(p), &other.parts) {
                return Some(w);
            }
        }
        None
    }

    pub fn is_subset(&self, other: &PolyUnion) -> bool {
        self.subset_witness(other).is_none()
    }

    pub fn set_equal(&self, other: &PolyUnion) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    /// Pairwise intersection of parts.
    pub fn intersect(&self, other: &PolyUnion) -> PolyUnion {
        let mut parts = Vec::new();
        for p in &self.parts {
            for q in &other.parts {
                parts.push(p.intersect(q));
            }
        }
        PolyUnion::new(self.dim, parts)
    }

    pub fn union(&self, other: &PolyUnion) -> PolyUnion {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        PolyUnion::new(self.dim, parts)
    }

    pub fn product(&self, other: &PolyUnion) -> PolyUnion {
        let mut parts = Vec::new();
        for p in &self.parts {
            for q in &other.parts {
                parts.push(p.product(q));
            }
        }
        PolyUnion::new(self.dim + other.dim, parts)
    }

    pub fn linear_image(&self, m: &[Vector]) -> PolyUnion {
        PolyUnion::new(m.len(), self.parts.iter().map(|p| p.linear_image(m)).collect())
    }

    pub fn project(&self, keep: &[usize]) -> PolyUnion {
        PolyUnion::new(keep.len(), self.parts.iter().map(|p| p.project(keep)).collect())
    }

    pub fn substitute(&self, start: usize, vals: &[Scalar]) -> PolyUnion {
        PolyUnion::new(
            self.dim - vals.len(),
            self.parts.iter().map(|p| p.substitute(start, vals)).collect(),
        )
    }

    pub fn translate(&self, c: &[Scalar]) -> PolyUnion {
        PolyUnion::new(self.dim, self.parts.iter().map(|p| p.translate(c)).collect())
    }

    /// Closed convex hull of the union.
    pub fn clconv(&self) -> Polyhedron {
        Polyhedron::clconv_union(self.dim, &self.parts)
    }
}

/// A finite union of polyhedral cones. An empty part list plays the role of
/// the empty-set marker (a normal cone queried off the set).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeUnion {
    dim: usize,
    parts: Vec<Cone>,
}

impl ConeUnion {
    pub fn new(dim: usize, parts: Vec<Cone>) -> Self {
        let polys: Vec<Polyhedron> = parts
            .into_iter()
            .filter(|c| !c.is_empty_marker())
            .map(|c| c.into_poly())
            .collect();
        let u = PolyUnion::new(dim, polys);
        ConeUnion { dim, parts: u.parts.into_iter().map(Cone::from_poly).collect() }
    }

    pub fn empty_marker(dim: usize) -> Self {
        ConeUnion { dim, parts: Vec::new() }
    }

    pub fn from_cone(c: Cone) -> Self {
        let dim = c.dim();
        Self::new(dim, vec![c])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parts(&self) -> &[Cone] {
        &self.parts
    }

    pub fn is_empty_marker(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.parts.iter().any(|c| c.contains(v))
    }

    pub fn to_poly_union(&self) -> PolyUnion {
        PolyUnion::new(self.dim, self.parts.iter().map(|c| c.as_poly().clone()).collect())
    }

    pub fn is_subset(&self, other: &ConeUnion) -> bool {
        self.to_poly_union().is_subset(&other.to_poly_union())
    }

    pub fn set_equal(&self, other: &ConeUnion) -> bool {
        self.to_poly_union().set_equal(&other.to_poly_union())
    }

    /// Closed convex hull, which for cones is also the Minkowski sum of the
    /// parts. Empty marker stays the empty marker.
    pub fn clconv(&self) -> Cone {
        if self.parts.is_empty() {
            return Cone::empty_marker(self.dim);
        }
        let mut rays = Vec::new();
        let mut lin = Vec::new();
        for c in &self.parts {
            rays.extend(c.rays().iter().cloned());
            lin.extend(c.lineality().iter().cloned());
        }
        Cone::from_gens(self.dim, rays, lin)
    }

    /// Slices every part at a fixed value of the trailing coordinate block
    /// and returns the union of the nonempty slices.
    pub fn slice_last(&self, vals: &[Scalar]) -> PolyUnion {
        let start = self.dim - vals.len();
        PolyUnion::new(
            start,
            self.parts.iter().map(|c| c.as_poly().substitute(start, vals)).collect(),
        )
    }
}

// ----- exact covering of polyhedra by unions -----

/// A solution set of weak rows `a.x <= b`, equalities, and strict rows
/// `a.x < b`. Strict feasibility is decided by maximizing a shared slack.
#[derive(Debug, Clone)]
struct Region {
    dim: usize,
    weak: Vec<(Vector, Scalar)>,
    eqs: Vec<(Vector, Scalar)>,
    strict: Vec<(Vector, Scalar)>,
}

impl Region {
    fn from_poly(p: &Polyhedron) -> Region {
        Region {
            dim: p.dim(),
            weak: p.ineqs().to_vec(),
            eqs: p.eqs().to_vec(),
            strict: Vec::new(),
        }
    }

    fn full(dim: usize) -> Region {
        Region { dim, weak: Vec::new(), eqs: Vec::new(), strict: Vec::new() }
    }

    /// A point satisfying every strict row strictly, if one exists. Lifts
    /// to one extra slack coordinate s, demands `a.x + s <= b` on strict
    /// rows with `s <= 1`, and maximizes s; the region is nonempty exactly
    /// when the maximum is positive.
    fn feasible_point(&self) -> Option<Vector> {
        let d = self.dim;
        let lift0 = |rows: &[(Vector, Scalar)], s_coef: i64| -> Vec<(Vector, Scalar)> {
            rows.iter()
                .map(|(a, b)| {
                    let mut r = a.clone();
                    r.push(int(s_coef));
                    (r, b.clone())
                })
                .collect()
        };
        let mut ineqs = lift0(&self.weak, 0);
        ineqs.extend(lift0(&self.strict, 1));
        ineqs.push((unit(d + 1, d), one()));
        let lifted = Polyhedron::from_hrep(d + 1, ineqs, lift0(&self.eqs, 0));
        match lp::maximize(&lifted, &unit(d + 1, d)) {
            lp::LpOutcome::Optimal { value, point } if value.is_positive() => {
                Some(point[..d].to_vec())
            }
            _ => None,
        }
    }
}

/// A point of `r` missed by every part, or `None` when `r` is covered.
/// Splits `r` off the first part along that part's rows, each branch
/// strictly violating one row and weakly satisfying the earlier ones, so
/// the branches and `r` intersected with the part partition `r` exactly.
fn cover_witness(r: &Region, parts: &[Polyhedron]) -> Option<Vector> {
    let w = r.feasible_point()?;
    let Some((q, rest)) = parts.split_first() else {
        return Some(w);
    };
    let mut rows: Vec<(Vector, Scalar)> = q.ineqs().to_vec();
    for (a, b) in q.eqs() {
        rows.push((a.clone(), b.clone()));
        rows.push((scale(&-one(), a), -b));
    }
    let mut cur = r.clone();
    for (a, b) in rows {
        let mut bad = cur.clone();
        bad.strict.push((scale(&-one(), &a), -&b));
        if let Some(w) = cover_witness(&bad, rest) {
            return Some(w);
        }
        cur.weak.push((a, b));
    }
    None
}

/// Does the union of `parts` cover all of space? Returns a missed point if
/// not.
pub fn space_cover_witness(dim: usize, parts: &[Polyhedron]) -> Option<Vector> {
    cover_witness(&Region::full(dim), parts)
}

// ----- normal cones of unions -----

/// Regular (Fréchet) normal cone of a union at `x`: the intersection of the
/// convex normal cones of the parts containing `x`. Parts missing `x` sit
/// at positive distance and cannot influence it. Empty marker off the set.
pub fn frechet_normal_union(u: &PolyUnion, x: &[Scalar]) -> Cone {
    let mut seen = false;
    let mut acc = Polyhedron::full_space(u.dim());
    for p in u.parts() {
        if p.contains(x) {
            seen = true;
            acc = acc.intersect(p.normal_cone_convex(x).as_poly());
        }
    }
    if !seen {
        return Cone::empty_marker(u.dim());
    }
    Cone::from_poly(acc)
}

/// Limiting (outer limit) normal cone of a union at `x̄`, as a finite union
/// of polyhedral cones.
///
/// Near `x̄` the union looks like a fan: the regular normal cone at
/// `x̄ + εv` depends only on the sign pattern of `v` against the
/// hyperplanes of the rows active at `x̄`, once ε is small enough to keep
/// every inactive row strict and every non-containing part excluded. The
/// routine enumerates the feasible sign patterns, takes one representative
/// point per pattern, and unions the regular cones found there. The
/// all-zero pattern contributes the regular cone at `x̄` itself.
pub fn limiting_normal_union(u: &PolyUnion, x: &[Scalar]) -> ConeUnion {
    let dim = u.dim();
    if !u.contains(x) {
        return ConeUnion::empty_marker(dim);
    }
    let mut hyperplanes: Vec<Vector> = Vec::new();
    for p in u.parts().iter().filter(|p| p.contains(x)) {
        for (a, b) in p.ineqs() {
            if dot(a, x) == *b {
                hyperplanes.push(primitive_signed(a));
            }
        }
        for (a, _) in p.eqs() {
            hyperplanes.push(primitive_signed(a));
        }
    }
    hyperplanes.sort_by(|a, b| lex_cmp(a, b));
    hyperplanes.dedup();

    let mut cones: Vec<Cone> = Vec::new();
    let mut ineq_rows: Vec<(Vector, Scalar)> = Vec::new();
    let mut eq_rows: Vec<(Vector, Scalar)> = Vec::new();
    enumerate_patterns(
        u,
        x,
        &hyperplanes,
        0,
        &mut ineq_rows,
        &mut eq_rows,
        &mut cones,
    );
    ConeUnion::new(dim, cones)
}

/// Depth-first walk over sign patterns, pruning infeasible prefixes. Signs
/// are encoded as margin rows: `a.v >= 1` for +, `a.v <= -1` for -, `a.v =
/// 0` for 0; homogeneity of the pattern makes the margin harmless.
fn enumerate_patterns(
    u: &PolyUnion,
    x: &[Scalar],
    hs: &[Vector],
    idx: usize,
    ineq_rows: &mut Vec<(Vector, Scalar)>,
    eq_rows: &mut Vec<(Vector, Scalar)>,
    cones: &mut Vec<Cone>,
) {
    let dim = u.dim();
    let cell = Polyhedron::from_hrep(dim, ineq_rows.clone(), eq_rows.clone());
    if cell.is_empty() {
        return;
    }
    if idx == hs.len() {
        let v = cell.relint_point().expect("nonempty cell");
        let p = stratum_point(u, x, &v);
        if u.contains(&p) {
            cones.push(frechet_normal_union(u, &p));
        }
        return;
    }
    let a = &hs[idx];
    // sign 0
    eq_rows.push((a.clone(), zero()));
    enumerate_patterns(u, x, hs, idx + 1, ineq_rows, eq_rows, cones);
    eq_rows.pop();
    // sign +
    ineq_rows.push((scale(&-one(), a), -one()));
    enumerate_patterns(u, x, hs, idx + 1, ineq_rows, eq_rows, cones);
    ineq_rows.pop();
    // sign -
    ineq_rows.push((a.clone(), -one()));
    enumerate_patterns(u, x, hs, idx + 1, ineq_rows, eq_rows, cones);
    ineq_rows.pop();
}

/// `x + εv` with ε > 0 chosen so that every row of every part that is
/// strictly satisfied or strictly violated at `x` keeps its strict status.
/// Within that radius the membership pattern along direction `v` is
/// constant, so the returned point represents its whole stratum.
fn stratum_point(u: &PolyUnion, x: &[Scalar], v: &[Scalar]) -> Vector {
    let mut bound: Option<Scalar> = None;
    let mut shrink = |cand: Scalar| {
        debug_assert!(cand.is_positive());
        match &bound {
            Some(b) if *b <= cand => {}
            _ => bound = Some(cand),
        }
    };
    for p in u.parts() {
        for (a, b) in p.ineqs() {
            let slack = b - dot(a, x);
            let drift = dot(a, v);
            if (slack.is_positive() && drift.is_positive())
                || (slack.is_negative() && drift.is_negative())
            {
                shrink(slack / drift);
            }
        }
        for (a, b) in p.eqs() {
            let slack = b - dot(a, x);
            let drift = dot(a, v);
            if !slack.is_zero() && !drift.is_zero() {
                let ratio = slack / drift;
                if ratio.is_positive() {
                    shrink(ratio);
                }
            }
        }
    }
    let eps = match bound {
        None => one(),
        Some(b) => b * rat(1, 2),
    };
    add(x, &scale(&eps, v))
}

/// Clarke (convexified) normal cone: closed convex hull of the limiting
/// cone. Empty marker off the set.
pub fn clarke_normal_union(u: &PolyUnion, x: &[Scalar]) -> Cone {
    limiting_normal_union(u, x).clconv()
}

/// Clarke tangent cone, the polar of the Clarke normal cone.
pub fn clarke_tangent_union(u: &PolyUnion, x: &[Scalar]) -> Cone {
    clarke_normal_union(u, x).polar()
}

// ----- subdifferentials of cellwise linear functions -----

/// Epigraph of a cellwise function as a union of lifted cells.
pub fn epigraph_union(f: &CellPL) -> PolyUnion {
    PolyUnion::new(f.dim() + 1, f.epigraph_parts())
}

fn epi_point(f: &CellPL, x: &[Scalar]) -> Option<Vector> {
    let t = f.eval(x)?;
    let mut p = x.to_vec();
    p.push(t);
    Some(p)
}

/// Regular subdifferential: subgradients read off the regular normal cone
/// of the epigraph at vertical multiplier -1. Empty off the domain, and
/// possibly empty on it (concave kinks have no regular subgradients).
pub fn regular_subdifferential(f: &CellPL, x: &[Scalar]) -> Polyhedron {
    match epi_point(f, x) {
        None => Polyhedron::empty(f.dim()),
        Some(p) => {
            let n = frechet_normal_union(&epigraph_union(f), &p);
            n.as_poly().substitute(f.dim(), &[-one()])
        }
    }
}

/// Limiting subdifferential: the union of the part slices of the limiting
/// epigraph normal cone at vertical multiplier -1.
pub fn limiting_subdifferential(f: &CellPL, x: &[Scalar]) -> PolyUnion {
    match epi_point(f, x) {
        None => PolyUnion::new(f.dim(), Vec::new()),
        Some(p) => {
            let n = limiting_normal_union(&epigraph_union(f), &p);
            n.slice_last(&[-one()])
        }
    }
}

/// Singular subdifferential: horizon subgradients, the slice of the
/// limiting epigraph cone at vertical multiplier 0. Always contains 0 on
/// the domain; reduces to {0} exactly for locally Lipschitz behavior.
pub fn singular_subdifferential(f: &CellPL, x: &[Scalar]) -> ConeUnion {
    match epi_point(f, x) {
        None => ConeUnion::empty_marker(f.dim()),
        Some(p) => {
            let n = limiting_normal_union(&epigraph_union(f), &p);
            let slices = n.slice_last(&[zero()]);
            ConeUnion::new(f.dim(), slices.parts().iter().cloned().map(Cone::from_poly).collect())
        }
    }
}

/// Clarke subdifferential: the Clarke epigraph normal cone sliced at
/// vertical multiplier -1. For locally Lipschitz functions this is the
/// convex hull of the limiting subdifferential.
pub fn clarke_subdifferential(f: &CellPL, x: &[Scalar]) -> Polyhedron {
    match epi_point(f, x) {
        None => Polyhedron::empty(f.dim()),
        Some(p) => {
            let n = clarke_normal_union(&epigraph_union(f), &p);
            if n.is_empty_marker() {
                Polyhedron::empty(f.dim())
            } else {
                n.as_poly().substitute(f.dim(), &[-one()])
            }
        }
    }
}

/// Horizon directions of the Clarke epigraph normal cone: the slice at
/// vertical multiplier 0.
pub fn clarke_singular_subdifferential(f: &CellPL, x: &[Scalar]) -> Cone {
    match epi_point(f, x) {
        None => Cone::empty_marker(f.dim()),
        Some(p) => {
            let n = clarke_normal_union(&epigraph_union(f), &p);
            if n.is_empty_marker() {
                Cone::empty_marker(f.dim())
            } else {
                Cone::from_poly(n.as_poly().substitute(f.dim(), &[zero()]))
            }
        }
    }
}

/// Clarke generalized directional derivative at `x` in direction `v`, for
/// functions whose cells cover a neighborhood of `x` (locally Lipschitz
/// there): the largest slope among the full-dimensional cells containing
/// `x`. Lower-dimensional cells cannot carry a limit of gradients and are
/// skipped. `None` when no full-dimensional cell contains `x`.
pub fn clarke_directional_derivative(f: &CellPL, x: &[Scalar], v: &[Scalar]) -> Option<Scalar> {
    f.cells()
        .iter()
        .filter(|(c, _)| c.is_full_dimensional() && c.contains(x))
        .map(|(_, p)| dot(&p.gradient, v))
        .max()
}

/// A point around which the cells of `f` fail to cover space, or `None`
/// when they tile all of it (so `f` is finite everywhere and Lipschitz).
pub fn cover_gap(f: &CellPL) -> Option<Vector> {
    let cells: Vec<Polyhedron> = f.cells().iter().map(|(c, _)| c.clone()).collect();
    space_cover_witness(f.dim(), &cells)
}

/// Lower regularity at `x`: every limiting subgradient is already a
/// regular one. With Lipschitz behavior this makes the Clarke
/// subdifferential collapse onto the regular one.
pub fn is_lower_regular(f: &CellPL, x: &[Scalar]) -> bool {
    let reg = regular_subdifferential(f, x);
    if reg.is_empty() {
        return false;
    }
    limiting_subdifferential(f, x).is_subset(&PolyUnion::from_poly(reg))
}
