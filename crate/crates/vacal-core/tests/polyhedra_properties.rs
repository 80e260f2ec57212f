//! Randomized structural invariants of the polyhedra kernel. Inputs are
//! small random row systems and generator lists in dimensions 1 through 4;
//! every check is an exact set comparison, so a single counterexample would
//! be a hard bug, not noise.

use proptest::prelude::*;
use vacal_core::linalg::{dot, Vector};
use vacal_core::polyhedra::{fm, Cone, Polyhedron};
use vacal_core::scalar::{int, Scalar};

fn sv(x: i64) -> Scalar {
    int(x)
}

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec((-3i64..=3).prop_map(sv), dim)
}

fn hrep_strategy(dim: usize) -> impl Strategy<Value = Polyhedron> {
    let rows = prop::collection::vec((vec_strategy(dim), (-4i64..=4).prop_map(sv)), 0..5);
    let eqs = prop::collection::vec((vec_strategy(dim), (-2i64..=2).prop_map(sv)), 0..2);
    (rows, eqs).prop_map(move |(r, e)| Polyhedron::from_hrep(dim, r, e))
}

fn vrep_strategy(dim: usize) -> impl Strategy<Value = Polyhedron> {
    let vs = prop::collection::vec(vec_strategy(dim), 1..4);
    let rs = prop::collection::vec(vec_strategy(dim), 0..3);
    (vs, rs).prop_map(move |(v, r)| Polyhedron::from_vrep(dim, v, r, vec![]))
}

fn any_poly(dim: usize) -> impl Strategy<Value = Polyhedron> {
    prop_oneof![hrep_strategy(dim), vrep_strategy(dim)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_both_directions(p in (1usize..=4).prop_flat_map(any_poly)) {
        let via_h = Polyhedron::from_hrep(p.dim(), p.ineqs().to_vec(), p.eqs().to_vec());
        prop_assert_eq!(&via_h, &p);
        let via_v = Polyhedron::from_vrep(
            p.dim(), p.vertices().to_vec(), p.rays().to_vec(), p.lineality().to_vec());
        prop_assert_eq!(&via_v, &p);
    }

    #[test]
    fn generators_satisfy_rows_and_rows_are_facets(p in (1usize..=4).prop_flat_map(hrep_strategy)) {
        prop_assume!(!p.is_empty());
        for v in p.vertices() {
            prop_assert!(p.contains(v));
        }
        for (a, b) in p.ineqs() {
            for r in p.rays() {
                prop_assert!(dot(a, r) <= sv(0));
            }
            for l in p.lineality() {
                prop_assert_eq!(dot(a, l), sv(0));
            }
            // every stored row is active at some vertex (minimality witness)
            let touched = p.vertices().iter().any(|v| dot(a, v) == *b);
            prop_assert!(touched);
        }
    }

    #[test]
    fn polar_is_involutive_on_cones(rays in prop::collection::vec(vec_strategy(3), 0..4),
                                    lin in prop::collection::vec(vec_strategy(3), 0..2)) {
        let k = Cone::from_gens(3, rays, lin);
        prop_assert_eq!(&k.polar().polar(), &k);
    }

    #[test]
    fn polar_pairing_is_nonpositive(rays in prop::collection::vec(vec_strategy(3), 0..4)) {
        let k = Cone::from_gens(3, rays, vec![]);
        let kp = k.polar();
        for r in k.rays() {
            for s in kp.rays() {
                prop_assert!(dot(r, s) <= sv(0));
            }
        }
    }

    #[test]
    fn minkowski_with_point_translates(p in (1usize..=3).prop_flat_map(any_poly),
                                       shift in vec_strategy(3)) {
        let shift = &shift[..p.dim()];
        let q = Polyhedron::point(shift);
        prop_assert_eq!(p.minkowski_sum(&q), p.translate(shift));
    }

    #[test]
    fn intersection_is_largest_common_subset(a in (1usize..=3).prop_flat_map(hrep_strategy)) {
        let b = Polyhedron::full_space(a.dim());
        prop_assert_eq!(a.intersect(&b), a.clone());
        prop_assert!(a.intersect(&a).set_equal(&a));
    }

    #[test]
    fn cone_hull_of_union_is_minkowski_sum(r1 in prop::collection::vec(vec_strategy(3), 0..3),
                                           r2 in prop::collection::vec(vec_strategy(3), 0..3)) {
        let k1 = Cone::from_gens(3, r1, vec![]);
        let k2 = Cone::from_gens(3, r2, vec![]);
        let hull = Polyhedron::clconv_union(3, &[k1.as_poly().clone(), k2.as_poly().clone()]);
        prop_assert!(hull.set_equal(k1.minkowski_sum(&k2).as_poly()));
    }

    #[test]
    fn normal_cone_matches_definition(p in (1usize..=3).prop_flat_map(hrep_strategy)) {
        prop_assume!(!p.is_empty());
        // test at a vertex and at the relative interior point
        let mut pts = vec![p.relint_point().unwrap()];
        pts.extend(p.vertices().iter().cloned());
        for x in pts {
            let n = p.normal_cone_convex(&x);
            // definitional form: directions making x the farthest point
            let direct = definitional_normal_cone(&p, &x);
            prop_assert!(n.set_equal(&direct), "normal cone mismatch at {:?}", x);
        }
    }

    #[test]
    fn tangent_is_polar_of_normal(p in (1usize..=3).prop_flat_map(hrep_strategy)) {
        prop_assume!(!p.is_empty());
        let x = p.vertices()[0].clone();
        let n = p.normal_cone_convex(&x);
        let t = p.tangent_cone_convex(&x);
        prop_assert_eq!(n.polar(), t.clone());
        prop_assert_eq!(t.polar(), n);
    }

    #[test]
    fn fm_projection_agrees(p in (2usize..=4).prop_flat_map(hrep_strategy)) {
        let keep: Vec<usize> = (0..p.dim() - 1).collect();
        prop_assert_eq!(fm::project(&p, &keep), p.project(&keep));
    }

    #[test]
    fn recession_cone_absorbs(p in (1usize..=3).prop_flat_map(hrep_strategy)) {
        prop_assume!(!p.is_empty());
        let rec = p.recession_cone();
        let sum = p.minkowski_sum(rec.as_poly());
        prop_assert!(sum.set_equal(&p));
    }

    #[test]
    fn subset_agrees_with_intersection(a in (1usize..=3).prop_flat_map(any_poly),
                                       b in (1usize..=3).prop_flat_map(any_poly)) {
        prop_assume!(a.dim() == b.dim());
        let inter = a.intersect(&b);
        prop_assert_eq!(a.is_subset(&b), inter.set_equal(&a));
    }
}

/// The textbook normal cone: all u with <u, w - x> <= 0 for every generator
/// w of the set (vertices as points, rays and lineality as directions).
/// Built from rows only, sharing nothing with the generator-side routine.
fn definitional_normal_cone(p: &Polyhedron, x: &[Scalar]) -> Cone {
    let mut rows: Vec<Vector> = Vec::new();
    for w in p.vertices() {
        let d: Vector = w.iter().zip(x).map(|(wi, xi)| wi - xi).collect();
        rows.push(d);
    }
    for r in p.rays() {
        rows.push(r.clone());
    }
    let mut eqs: Vec<Vector> = Vec::new();
    for l in p.lineality() {
        eqs.push(l.clone());
    }
    Cone::from_rows(p.dim(), rows, eqs)
}
