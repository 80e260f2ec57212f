//! Exact rational polyhedra with canonical dual representations.
//!
//! A `Polyhedron` always carries both descriptions of its point set: the
//! facet form (inequality and equality rows) and the generator form
//! (vertices, extreme rays, lineality basis). Construction from either side
//! runs the double-description engine twice, once per direction, so both
//! forms are minimal and canonical: equal sets have structurally equal
//! values, whichever representation they were built from. That single
//! invariant is what makes set-equality assertions downstream cheap and
//! reproducible.
//!
//! Vertices are stored as the representatives orthogonal to the lineality
//! space, rays as primitive integer vectors, the lineality basis in reduced
//! row echelon form; all lists are sorted. The empty set has one canonical
//! encoding: no generators plus the infeasible row `0·x <= -1`.
//!
//! Values are immutable after construction and freely shareable across
//! threads; every operation is a pure function.

pub mod dd;
pub mod fm;
pub mod lp;

use crate::linalg::{
    add, dot, is_zero_vec, lex_cmp, mat_t_vec, mat_vec, neg, zeros, Vector,
};
use crate::scalar::{one, zero, Scalar};
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Polyhedron {
    dim: usize,
    empty: bool,
    vertices: Vec<Vector>,
    rays: Vec<Vector>,
    lineality: Vec<Vector>,
    /// Rows `(a, b)` meaning `a·x <= b`.
    ineqs: Vec<(Vector, Scalar)>,
    /// Rows `(a, b)` meaning `a·x = b`.
    eqs: Vec<(Vector, Scalar)>,
}

impl Polyhedron {
    // ----- constructors -----

    pub fn empty(dim: usize) -> Self {
        Polyhedron {
            dim,
            empty: true,
            vertices: Vec::new(),
            rays: Vec::new(),
            lineality: Vec::new(),
            ineqs: vec![(zeros(dim), -one())],
            eqs: Vec::new(),
        }
    }

    pub fn full_space(dim: usize) -> Self {
        Self::from_hrep(dim, Vec::new(), Vec::new())
    }

    pub fn point(x: &[Scalar]) -> Self {
        Self::from_vrep(x.len(), vec![x.to_vec()], Vec::new(), Vec::new())
    }

    /// `{x : a·x <= b, e·x = c}`. Any row set is accepted; the result is
    /// canonical and minimal.
    pub fn from_hrep(
        dim: usize,
        ineqs: Vec<(Vector, Scalar)>,
        eqs: Vec<(Vector, Scalar)>,
    ) -> Self {
        let hi = ineqs.iter().map(|(a, b)| homogenize_row(a, b)).collect();
        let he = eqs.iter().map(|(a, b)| homogenize_row(a, b)).collect();
        Self::build_homogeneous(dim, hi, he)
    }

    /// `conv(vertices) + cone(rays) + span(lineality)`. An empty vertex list
    /// denotes the empty set regardless of rays, matching the convention
    /// that the convex hull of nothing is nothing.
    pub fn from_vrep(
        dim: usize,
        vertices: Vec<Vector>,
        rays: Vec<Vector>,
        lineality: Vec<Vector>,
    ) -> Self {
        if vertices.is_empty() {
            return Self::empty(dim);
        }
        let mut gen_rays: Vec<Vector> = Vec::new();
        for v in &vertices {
            let mut g = v.clone();
            g.push(one());
            gen_rays.push(g);
        }
        for r in &rays {
            let mut g = r.clone();
            g.push(zero());
            gen_rays.push(g);
        }
        let gen_lin: Vec<Vector> = lineality
            .iter()
            .map(|l| {
                let mut g = l.clone();
                g.push(zero());
                g
            })
            .collect();
        // Facets of the homogenization cone are the generators of its polar.
        let rows = dd::polar_generators(dim + 1, &dd::ConeGens { rays: gen_rays, lineality: gen_lin });
        Self::build_homogeneous(dim, rows.rays, rows.lineality)
    }

    /// Core canonicalizer. Input: rows of the homogenization cone in
    /// `R^{dim+1}` (last coordinate is the homogenization parameter t);
    /// the row `t >= 0` is added here. Output: both canonical forms.
    fn build_homogeneous(dim: usize, mut hi: Vec<Vector>, he: Vec<Vector>) -> Self {
        let mut t_row = zeros(dim + 1);
        t_row[dim] = -one();
        hi.push(t_row);
        let gens = dd::cone_generators(dim + 1, &hi, &he);

        let mut vertices = Vec::new();
        let mut rays = Vec::new();
        let mut vertex_gens = Vec::new();
        for g in &gens.rays {
            let tau = &g[dim];
            debug_assert!(!tau.is_negative(), "t >= 0 must hold on the homogenization cone");
            if tau.is_zero() {
                rays.push(g[..dim].to_vec());
            } else {
                vertices.push(g[..dim].iter().map(|x| x / tau).collect::<Vector>());
                vertex_gens.push(g.clone());
            }
        }
        if vertices.is_empty() {
            return Self::empty(dim);
        }
        let lineality: Vec<Vector> = gens.lineality.iter().map(|l| l[..dim].to_vec()).collect();
        vertices.sort_by(|a, b| lex_cmp(a, b));

        let polar = dd::polar_generators(dim + 1, &gens);
        let mut ineqs = Vec::new();
        let mut eqs = Vec::new();
        for r in &polar.rays {
            // A facet of the homogenization cone yields a facet of the
            // dehomogenized set only if it touches the t > 0 part, i.e. if
            // some vertex generator is active on it. This also discards the
            // t >= 0 facet itself.
            if !vertex_gens.iter().any(|g| dot(r, g).is_zero()) {
                continue;
            }
            let (a, g) = (r[..dim].to_vec(), r[dim].clone());
            debug_assert!(!is_zero_vec(&a));
            ineqs.push((a, -g));
        }
        for l in &polar.lineality {
            let (a, g) = (l[..dim].to_vec(), l[dim].clone());
            debug_assert!(!is_zero_vec(&a), "t = 0 would mean an empty set");
            eqs.push((a, -g));
        }
        ineqs.sort_by(|x, y| lex_cmp(&x.0, &y.0).then_with(|| x.1.cmp(&y.1)));
        eqs.sort_by(|x, y| lex_cmp(&x.0, &y.0).then_with(|| x.1.cmp(&y.1)));

        Polyhedron { dim, empty: false, vertices, rays, lineality, ineqs, eqs }
    }

    // ----- accessors -----

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn rays(&self) -> &[Vector] {
        &self.rays
    }

    pub fn lineality(&self) -> &[Vector] {
        &self.lineality
    }

    pub fn ineqs(&self) -> &[(Vector, Scalar)] {
        &self.ineqs
    }

    pub fn eqs(&self) -> &[(Vector, Scalar)] {
        &self.eqs
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }

    /// Dimension of the affine hull; `None` for the empty set. Canonical
    /// equality rows are independent, so this is just a count.
    pub fn affine_dim(&self) -> Option<usize> {
        if self.empty {
            None
        } else {
            Some(self.dim - self.eqs.len())
        }
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_dim() == Some(self.dim)
    }

    /// A point in the relative interior: the vertex barycenter pushed along
    /// the sum of all extreme rays. Every non-implicit inequality has some
    /// generator strict, so the combination is strict on all of them.
    pub fn relint_point(&self) -> Option<Vector> {
        if self.empty {
            return None;
        }
        let n = crate::scalar::int(self.vertices.len() as i64);
        let mut p = zeros(self.dim);
        for v in &self.vertices {
            p = add(&p, v);
        }
        p = p.iter().map(|x| x / &n).collect();
        for r in &self.rays {
            p = add(&p, r);
        }
        Some(p)
    }

    // ----- predicates -----

    pub fn contains(&self, x: &[Scalar]) -> bool {
        assert_eq!(x.len(), self.dim, "point dimension mismatch");
        !self.empty
            && self.ineqs.iter().all(|(a, b)| dot(a, x) <= *b)
            && self.eqs.iter().all(|(a, b)| dot(a, x) == *b)
    }

    /// Exact inclusion, decided by checking this set's generators against
    /// the other's facet description.
    pub fn is_subset(&self, other: &Polyhedron) -> bool {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if self.empty {
            return true;
        }
        if other.empty {
            return false;
        }
        let ineq_ok = |v: &Vector, strict_dir: bool| {
            other.ineqs.iter().all(|(a, b)| {
                let s = dot(a, v);
                if strict_dir {
                    !s.is_positive()
                } else {
                    s <= *b
                }
            })
        };
        self.vertices.iter().all(|v| ineq_ok(v, false))
            && self.vertices.iter().all(|v| other.eqs.iter().all(|(a, b)| dot(a, v) == *b))
            && self.rays.iter().all(|r| ineq_ok(r, true))
            && self.rays.iter().all(|r| other.eqs.iter().all(|(a, _)| dot(a, r).is_zero()))
            && self
                .lineality
                .iter()
                .all(|l| other.ineqs.iter().all(|(a, _)| dot(a, l).is_zero()))
            && self.lineality.iter().all(|l| other.eqs.iter().all(|(a, _)| dot(a, l).is_zero()))
    }

    pub fn set_equal(&self, other: &Polyhedron) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    // ----- set operations -----

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut ineqs = self.ineqs.clone();
        ineqs.extend(other.ineqs.iter().cloned());
        let mut eqs = self.eqs.clone();
        eqs.extend(other.eqs.iter().cloned());
        Self::from_hrep(self.dim, ineqs, eqs)
    }

    pub fn minkowski_sum(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if self.empty || other.empty {
            return Self::empty(self.dim);
        }
        let mut vertices = Vec::new();
        for u in &self.vertices {
            for v in &other.vertices {
                vertices.push(add(u, v));
            }
        }
        let mut rays = self.rays.clone();
        rays.extend(other.rays.iter().cloned());
        let mut lineality = self.lineality.clone();
        lineality.extend(other.lineality.iter().cloned());
        Self::from_vrep(self.dim, vertices, rays, lineality)
    }

    /// `{Mx : x in p}`; `m` is row-major, one row per output coordinate.
    pub fn linear_image(&self, m: &[Vector]) -> Polyhedron {
        let out = m.len();
        assert!(m.iter().all(|r| r.len() == self.dim), "matrix width mismatch");
        if self.empty {
            return Self::empty(out);
        }
        Self::from_vrep(
            out,
            self.vertices.iter().map(|v| mat_vec(m, v)).collect(),
            self.rays.iter().map(|r| mat_vec(m, r)).collect(),
            self.lineality.iter().map(|l| mat_vec(m, l)).collect(),
        )
    }

    /// `{Mx + c : x in p}`.
    pub fn affine_image(&self, m: &[Vector], c: &[Scalar]) -> Polyhedron {
        self.linear_image(m).translate_checked(c)
    }

    fn translate_checked(&self, c: &[Scalar]) -> Polyhedron {
        if self.empty {
            return self.clone();
        }
        self.translate(c)
    }

    /// `{x : Mx in p}`; `m` has `p.dim` rows.
    pub fn linear_preimage(&self, m: &[Vector]) -> Polyhedron {
        assert_eq!(m.len(), self.dim, "matrix height mismatch");
        let in_dim = m.first().map_or(0, |r| r.len());
        if self.empty {
            return Self::empty(in_dim);
        }
        let ineqs = self.ineqs.iter().map(|(a, b)| (mat_t_vec(m, a), b.clone())).collect();
        let eqs = self.eqs.iter().map(|(a, b)| (mat_t_vec(m, a), b.clone())).collect();
        Self::from_hrep(in_dim, ineqs, eqs)
    }

    /// Coordinate projection onto `keep`, in the order given.
    pub fn project(&self, keep: &[usize]) -> Polyhedron {
        assert!(keep.iter().all(|&i| i < self.dim), "projection index out of range");
        if self.empty {
            return Self::empty(keep.len());
        }
        let pick = |v: &Vector| keep.iter().map(|&i| v[i].clone()).collect::<Vector>();
        Self::from_vrep(
            keep.len(),
            self.vertices.iter().map(pick).collect(),
            self.rays.iter().map(pick).collect(),
            self.lineality.iter().map(pick).collect(),
        )
    }

    pub fn translate(&self, c: &[Scalar]) -> Polyhedron {
        assert_eq!(c.len(), self.dim, "translation dimension mismatch");
        if self.empty {
            return self.clone();
        }
        Self::from_vrep(
            self.dim,
            self.vertices.iter().map(|v| add(v, c)).collect(),
            self.rays.clone(),
            self.lineality.clone(),
        )
    }

    /// Cartesian product, coordinates of `self` first.
    pub fn product(&self, other: &Polyhedron) -> Polyhedron {
        let dim = self.dim + other.dim;
        if self.empty || other.empty {
            return Self::empty(dim);
        }
        let pad_left = |rows: &[(Vector, Scalar)]| {
            rows.iter()
                .map(|(a, b)| {
                    let mut v = a.clone();
                    v.extend(zeros(other.dim));
                    (v, b.clone())
                })
                .collect::<Vec<_>>()
        };
        let pad_right = |rows: &[(Vector, Scalar)]| {
            rows.iter()
                .map(|(a, b)| {
                    let mut v = zeros(self.dim);
                    v.extend(a.iter().cloned());
                    (v, b.clone())
                })
                .collect::<Vec<_>>()
        };
        let mut ineqs = pad_left(&self.ineqs);
        ineqs.extend(pad_right(&other.ineqs));
        let mut eqs = pad_left(&self.eqs);
        eqs.extend(pad_right(&other.eqs));
        Self::from_hrep(dim, ineqs, eqs)
    }

    /// Fixes the coordinate block `[start, start+vals.len())` to constants
    /// and drops it: `{(x_out) : x with block = vals lies in p}`.
    pub fn substitute(&self, start: usize, vals: &[Scalar]) -> Polyhedron {
        let k = vals.len();
        assert!(start + k <= self.dim, "substitution block out of range");
        let out_dim = self.dim - k;
        if self.empty {
            return Self::empty(out_dim);
        }
        let map_row = |(a, b): &(Vector, Scalar)| {
            let mut shift = zero();
            for (ai, vi) in a[start..start + k].iter().zip(vals) {
                shift += ai * vi;
            }
            let mut out: Vector = a[..start].to_vec();
            out.extend(a[start + k..].iter().cloned());
            (out, b - shift)
        };
        Self::from_hrep(
            out_dim,
            self.ineqs.iter().map(map_row).collect(),
            self.eqs.iter().map(map_row).collect(),
        )
    }

    pub fn recession_cone(&self) -> Cone {
        if self.empty {
            return Cone::empty_marker(self.dim);
        }
        Cone::from_rows(
            self.dim,
            self.ineqs.iter().map(|(a, _)| a.clone()).collect(),
            self.eqs.iter().map(|(a, _)| a.clone()).collect(),
        )
    }

    /// Closed convex hull of a finite union, via the generator union.
    pub fn clconv_union(dim: usize, parts: &[Polyhedron]) -> Polyhedron {
        let mut vertices = Vec::new();
        let mut rays = Vec::new();
        let mut lineality = Vec::new();
        for p in parts.iter().filter(|p| !p.is_empty()) {
            assert_eq!(p.dim, dim, "dimension mismatch");
            vertices.extend(p.vertices.iter().cloned());
            rays.extend(p.rays.iter().cloned());
            lineality.extend(p.lineality.iter().cloned());
        }
        Self::from_vrep(dim, vertices, rays, lineality)
    }

    // ----- normal and tangent cones -----

    /// Normal cone of convex analysis at `x̄`: generated by the outward
    /// normals of the rows active at `x̄`, with equality normals contributing
    /// full lines. The empty marker encodes the convention that the cone is
    /// the empty set (not `{0}`) off the polyhedron.
    pub fn normal_cone_convex(&self, x: &[Scalar]) -> Cone {
        if !self.contains(x) {
            return Cone::empty_marker(self.dim);
        }
        let rays = self
            .ineqs
            .iter()
            .filter(|(a, b)| dot(a, x) == *b)
            .map(|(a, _)| a.clone())
            .collect();
        let lineality = self.eqs.iter().map(|(a, _)| a.clone()).collect();
        Cone::from_gens(self.dim, rays, lineality)
    }

    /// Tangent cone at `x̄`: directions satisfying the active constraints
    /// homogeneously. Polar to `normal_cone_convex` at the same point.
    pub fn tangent_cone_convex(&self, x: &[Scalar]) -> Cone {
        if !self.contains(x) {
            return Cone::empty_marker(self.dim);
        }
        let rows = self
            .ineqs
            .iter()
            .filter(|(a, b)| dot(a, x) == *b)
            .map(|(a, _)| a.clone())
            .collect();
        let eqs = self.eqs.iter().map(|(a, _)| a.clone()).collect();
        Cone::from_rows(self.dim, rows, eqs)
    }
}

fn homogenize_row(a: &[Scalar], b: &Scalar) -> Vector {
    let mut row = a.to_vec();
    row.push(-b.clone());
    row
}

/// A polyhedral cone: a `Polyhedron` whose only vertex is the origin, or the
/// empty marker (used where a normal cone is the empty set by convention).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cone {
    poly: Polyhedron,
}

impl Cone {
    pub fn from_gens(dim: usize, rays: Vec<Vector>, lineality: Vec<Vector>) -> Self {
        let poly = Polyhedron::from_vrep(dim, vec![zeros(dim)], rays, lineality);
        Cone { poly }
    }

    /// `{x : a·x <= 0, e·x = 0}`.
    pub fn from_rows(dim: usize, ineq_normals: Vec<Vector>, eq_normals: Vec<Vector>) -> Self {
        let ineqs = ineq_normals.into_iter().map(|a| (a, zero())).collect();
        let eqs = eq_normals.into_iter().map(|a| (a, zero())).collect();
        let poly = Polyhedron::from_hrep(dim, ineqs, eqs);
        debug_assert!(!poly.is_empty(), "a homogeneous system always contains 0");
        Cone { poly }
    }

    pub fn from_poly(poly: Polyhedron) -> Self {
        debug_assert!(
            poly.is_empty() || poly.vertices() == [zeros(poly.dim())],
            "not a cone: vertex other than the origin"
        );
        Cone { poly }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_gens(dim, Vec::new(), Vec::new())
    }

    pub fn full_space(dim: usize) -> Self {
        Self::from_rows(dim, Vec::new(), Vec::new())
    }

    pub fn empty_marker(dim: usize) -> Self {
        Cone { poly: Polyhedron::empty(dim) }
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn is_empty_marker(&self) -> bool {
        self.poly.is_empty()
    }

    /// True when the cone is exactly `{0}`.
    pub fn is_zero(&self) -> bool {
        !self.is_empty_marker() && self.poly.rays().is_empty() && self.poly.lineality().is_empty()
    }

    pub fn rays(&self) -> &[Vector] {
        self.poly.rays()
    }

    pub fn lineality(&self) -> &[Vector] {
        self.poly.lineality()
    }

    pub fn as_poly(&self) -> &Polyhedron {
        &self.poly
    }

    pub fn into_poly(self) -> Polyhedron {
        self.poly
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.poly.contains(v)
    }

    pub fn is_subset(&self, other: &Cone) -> bool {
        self.poly.is_subset(&other.poly)
    }

    pub fn set_equal(&self, other: &Cone) -> bool {
        self.poly.set_equal(&other.poly)
    }

    /// `{y : <y,w> <= 0 for all w in self}`. The polar of the empty marker
    /// is the full space (the defining condition is vacuous).
    pub fn polar(&self) -> Cone {
        if self.is_empty_marker() {
            return Cone::full_space(self.dim());
        }
        Cone::from_rows(self.dim(), self.poly.rays().to_vec(), self.poly.lineality().to_vec())
    }

    pub fn intersect(&self, other: &Cone) -> Cone {
        Cone { poly: self.poly.intersect(&other.poly) }
    }

    /// For cones containing 0 this is also the closed convex hull of the
    /// union, which is how Clarke objects arise from limiting ones.
    pub fn minkowski_sum(&self, other: &Cone) -> Cone {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        if self.is_empty_marker() || other.is_empty_marker() {
            return Cone::empty_marker(self.dim());
        }
        let mut rays = self.poly.rays().to_vec();
        rays.extend(other.poly.rays().iter().cloned());
        let mut lin = self.poly.lineality().to_vec();
        lin.extend(other.poly.lineality().iter().cloned());
        Cone::from_gens(self.dim(), rays, lin)
    }

    pub fn negate(&self) -> Cone {
        if self.is_empty_marker() {
            return self.clone();
        }
        Cone::from_gens(
            self.dim(),
            self.poly.rays().iter().map(|r| neg(r)).collect(),
            self.poly.lineality().to_vec(),
        )
    }
}
