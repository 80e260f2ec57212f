//! Release gate for the workspace, run against the shipped corpus plus
//! instances generated here. Each test guards one promise: the four
//! normal cone and subdifferential constructions collapse to one on
//! convex data, the convexified constructions match their definitions on
//! Lipschitz data, every calculus rule holds on its instance family with
//! its qualification condition checked, the sampling oracles agree with
//! the exact engine, and the suite runner is fast and byte-deterministic.
//!
//! Run with `--nocapture` to see one PASS line per gate.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use vacal_cli::instance::parse_point;
use vacal_cli::run::{load_instance, run_rule};
use vacal_core::calculus_rules::{
    marginal_convexity_check, max_as_optimal_value, optimal_value_subdifferential,
    qc_normal_intersection, qc_tangent_intersection, sum_as_optimal_value, QcStatus, Relation,
    RuleReport, Verdict,
};
use vacal_core::linalg::{neg, unit, zeros, Vector};
use vacal_core::normal_cones::{
    clarke_directional_derivative, clarke_normal_union, clarke_subdifferential, cover_gap,
    frechet_normal_union, limiting_normal_union, limiting_subdifferential,
    regular_subdifferential, PolyUnion,
};
use vacal_core::oracle::{
    clarke_dirderiv_estimate, limiting_sample_agrees, sample_vectors,
    subgradient_membership_exact, SamplingConfig,
};
use vacal_core::pl_functions::{l1_norm, AffinePiece, CellPL, ConvexPL};
use vacal_core::polyhedra::Polyhedron;
use vacal_core::scalar::{int, one, rat, zero, Scalar};

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_files(prefix: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("corpus entry").path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(prefix) && n.ends_with(".json"))
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no corpus instances start with {prefix}");
    out
}

fn rule_reports(prefix: &str) -> Vec<(String, RuleReport)> {
    corpus_files(prefix)
        .into_iter()
        .map(|path| {
            let name = path.file_name().unwrap().to_str().unwrap().to_string();
            let inst = load_instance(&path).unwrap_or_else(|e| panic!("{name}: {e:?}"));
            let spec = inst.rule_payload().unwrap_or_else(|e| panic!("{name}: {e}"));
            let report = run_rule(&spec, false, &name)
                .unwrap_or_else(|e| panic!("{name}: {e:?}"));
            (name, report)
        })
        .collect()
}

fn v(coords: &[i64]) -> Vector {
    coords.iter().map(|&c| int(c)).collect()
}

fn rows(data: &[(&[i64], i64)]) -> Vec<(Vector, Scalar)> {
    data.iter().map(|(a, b)| (v(a), int(*b))).collect()
}

fn poly_h(dim: usize, ineqs: &[(&[i64], i64)], eqs: &[(&[i64], i64)]) -> Polyhedron {
    Polyhedron::from_hrep(dim, rows(ineqs), rows(eqs))
}

fn interval(lo: i64, hi: i64) -> Polyhedron {
    Polyhedron::from_vrep(1, vec![v(&[lo]), v(&[hi])], vec![], vec![])
}

fn piece(gradient: &[i64], offset: i64) -> AffinePiece {
    AffinePiece::new(v(gradient), int(offset))
}

fn pl(dim: usize, pieces: &[(&[i64], i64)]) -> ConvexPL {
    let ps = pieces.iter().map(|(g, o)| piece(g, *o)).collect();
    ConvexPL::new(dim, ps, Polyhedron::full_space(dim)).unwrap()
}

fn cells(dim: usize, data: &[(Polyhedron, &[i64], i64)]) -> CellPL {
    let cs = data
        .iter()
        .map(|(c, g, o)| (c.clone(), piece(g, *o)))
        .collect();
    CellPL::new(dim, cs).unwrap()
}

fn neg_abs() -> CellPL {
    cells(
        1,
        &[
            (poly_h(1, &[(&[-1], 0)], &[]), &[-1], 0),
            (poly_h(1, &[(&[1], 0)], &[]), &[1], 0),
        ],
    )
}

/// Convex polyhedra paired with a reference point in each.
fn convex_set_catalog() -> Vec<(Polyhedron, Vector)> {
    let half = rat(1, 2);
    let box2 = poly_h(2, &[(&[1, 0], 1), (&[0, 1], 1), (&[-1, 0], 0), (&[0, -1], 0)], &[]);
    let cube = poly_h(
        3,
        &[
            (&[1, 0, 0], 1),
            (&[0, 1, 0], 1),
            (&[0, 0, 1], 1),
            (&[-1, 0, 0], 0),
            (&[0, -1, 0], 0),
            (&[0, 0, -1], 0),
        ],
        &[],
    );
    vec![
        (poly_h(1, &[(&[-1], 0)], &[]), v(&[0])),
        (interval(0, 1), v(&[1])),
        (interval(0, 1), vec![half.clone()]),
        (Polyhedron::from_vrep(1, vec![v(&[2])], vec![], vec![]), v(&[2])),
        (Polyhedron::full_space(1), v(&[0])),
        (box2.clone(), v(&[0, 0])),
        (box2.clone(), vec![half.clone(), zero()]),
        (box2, vec![half.clone(), half.clone()]),
        (
            Polyhedron::from_vrep(2, vec![v(&[0, 0]), v(&[1, 0]), v(&[0, 1])], vec![], vec![]),
            vec![half.clone(), half.clone()],
        ),
        (poly_h(2, &[(&[-1, 0], 0), (&[0, -1], 0)], &[]), v(&[0, 0])),
        (
            Polyhedron::from_vrep(2, vec![v(&[0, 0])], vec![v(&[1, 0]), v(&[1, 1])], vec![]),
            v(&[0, 0]),
        ),
        (poly_h(2, &[], &[(&[1, -1], 0)]), v(&[1, 1])),
        (cube.clone(), v(&[0, 0, 0])),
        (cube.clone(), vec![half.clone(), zero(), zero()]),
        (cube, vec![half.clone(), half, zero()]),
        (
            Polyhedron::from_vrep(
                3,
                vec![v(&[0, 0, 0]), v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])],
                vec![],
                vec![],
            ),
            v(&[0, 0, 0]),
        ),
        (poly_h(3, &[(&[-1, 0, 0], 0), (&[0, -1, 0], 0), (&[0, 0, -1], 0)], &[]), v(&[0, 0, 0])),
        (poly_h(3, &[], &[(&[0, 0, 1], 0)]), v(&[0, 0, 0])),
    ]
}

/// Convex piecewise linear functions paired with a point where each is
/// finite, kinks included.
fn convex_function_catalog() -> Vec<(ConvexPL, Vector)> {
    let abs = pl(1, &[(&[1], 0), (&[-1], 0)]);
    let restricted = ConvexPL::new(
        1,
        vec![piece(&[1], 0), piece(&[-1], 0)],
        interval(-1, 1),
    )
    .unwrap();
    vec![
        (abs, v(&[0])),
        (l1_norm(2), v(&[0, 0])),
        (l1_norm(2), v(&[1, 0])),
        (pl(3, &[(&[1, 0, 0], 0), (&[0, 1, 0], 0), (&[0, 0, 1], 0)]), v(&[0, 0, 0])),
        (pl(2, &[(&[1, 0], 0), (&[0, 1], 0)]), v(&[0, 0])),
        (pl(2, &[(&[1, 0], 0), (&[0, 1], 0)]), v(&[1, 1])),
        (pl(1, &[(&[1], 0), (&[0], 0)]), v(&[0])),
        (pl(1, &[(&[2], 1)]), v(&[5])),
        (ConvexPL::indicator(poly_h(1, &[(&[-1], 0)], &[])).unwrap(), v(&[0])),
        (pl(2, &[(&[1, 0], 0), (&[0, 1], 0), (&[-1, -1], 0)]), v(&[0, 0])),
        (pl(2, &[(&[2, 1], 0), (&[2, -1], 0), (&[-2, 1], 0), (&[-2, -1], 0)]), v(&[0, 0])),
        (restricted, v(&[1])),
    ]
}

/// Lipschitz cell functions paired with a reference point; the zigzag is
/// the hat profile `|x|` inside `[-1, 1]` flipped to `2 - |x|` outside.
fn lipschitz_catalog() -> Vec<(&'static str, CellPL, Vector)> {
    let abs_cells = CellPL::from_convex(&pl(1, &[(&[1], 0), (&[-1], 0)]));
    let hinge_cells = CellPL::from_convex(&pl(1, &[(&[1], 0), (&[0], 0)]));
    let neg_hinge = cells(
        1,
        &[
            (poly_h(1, &[(&[1], 0)], &[]), &[0], 0),
            (poly_h(1, &[(&[-1], 0)], &[]), &[-1], 0),
        ],
    );
    let zigzag = cells(
        1,
        &[
            (poly_h(1, &[(&[1], -1)], &[]), &[1], 2),
            (poly_h(1, &[(&[-1], 1), (&[1], 0)], &[]), &[-1], 0),
            (poly_h(1, &[(&[-1], 0), (&[1], 1)], &[]), &[1], 0),
            (poly_h(1, &[(&[-1], -1)], &[]), &[-1], 2),
        ],
    );
    let neg_l1 = cells(
        2,
        &[
            (poly_h(2, &[(&[-1, 0], 0), (&[0, -1], 0)], &[]), &[-1, -1], 0),
            (poly_h(2, &[(&[-1, 0], 0), (&[0, 1], 0)], &[]), &[-1, 1], 0),
            (poly_h(2, &[(&[1, 0], 0), (&[0, -1], 0)], &[]), &[1, -1], 0),
            (poly_h(2, &[(&[1, 0], 0), (&[0, 1], 0)], &[]), &[1, 1], 0),
        ],
    );
    let max_pair = cells(
        2,
        &[
            (poly_h(2, &[(&[-1, 1], 0)], &[]), &[1, 0], 0),
            (poly_h(2, &[(&[1, -1], 0)], &[]), &[0, 1], 0),
        ],
    );
    let min_pair = cells(
        2,
        &[
            (poly_h(2, &[(&[-1, 1], 0)], &[]), &[0, -1], 0),
            (poly_h(2, &[(&[1, -1], 0)], &[]), &[-1, 0], 0),
        ],
    );
    let split = cells(
        2,
        &[
            (poly_h(2, &[(&[-1, 0], 0), (&[0, -1], 0)], &[]), &[1, -1], 0),
            (poly_h(2, &[(&[-1, 0], 0), (&[0, 1], 0)], &[]), &[1, 1], 0),
            (poly_h(2, &[(&[1, 0], 0), (&[0, -1], 0)], &[]), &[-1, -1], 0),
            (poly_h(2, &[(&[1, 0], 0), (&[0, 1], 0)], &[]), &[-1, 1], 0),
        ],
    );
    vec![
        ("negated absolute value", neg_abs(), v(&[0])),
        ("absolute value", abs_cells, v(&[0])),
        ("positive part", hinge_cells, v(&[0])),
        ("negated positive part", neg_hinge, v(&[0])),
        ("zigzag at the center kink", zigzag.clone(), v(&[0])),
        ("zigzag at the right crest", zigzag.clone(), v(&[1])),
        ("zigzag at the left crest", zigzag, v(&[-1])),
        ("negated taxicab norm", neg_l1, v(&[0, 0])),
        ("coordinate maximum", max_pair, v(&[0, 0])),
        ("coordinate minimum", min_pair, v(&[0, 0])),
        ("sign split at the crossing", split.clone(), v(&[0, 0])),
        // Base point two units from the vertical crease: the widest
        // sampling shell then stays inside cells containing it, which the
        // slope estimator's one-sidedness depends on.
        ("sign split off center", split, v(&[2, 0])),
    ]
}

#[test]
fn convex_data_collapses_all_four_constructions() {
    let started = Instant::now();
    let mut count = 0usize;
    for (p, x) in convex_set_catalog() {
        let u = PolyUnion::from_poly(p.clone());
        let reference = p.normal_cone_convex(&x);
        assert!(
            frechet_normal_union(&u, &x).set_equal(&reference),
            "regular cone differs from the convex cone at {x:?}"
        );
        assert!(
            clarke_normal_union(&u, &x).set_equal(&reference),
            "convexified cone differs from the convex cone at {x:?}"
        );
        let limiting = limiting_normal_union(&u, &x).to_poly_union();
        assert!(
            limiting.set_equal(&PolyUnion::from_poly(reference.as_poly().clone())),
            "limiting cone differs from the convex cone at {x:?}"
        );
        count += 1;
    }
    for (f, x) in convex_function_catalog() {
        let sub = f.subdifferential(&x);
        let cell = CellPL::from_convex(&f);
        assert!(regular_subdifferential(&cell, &x).set_equal(&sub));
        assert!(clarke_subdifferential(&cell, &x).set_equal(&sub));
        let limiting = limiting_subdifferential(&cell, &x);
        assert!(limiting.set_equal(&PolyUnion::from_poly(sub.clone())));
        count += 1;
    }
    assert!(count >= 20, "only {count} convex instances");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!(
        "PASS convex collapse: {count} instances, all four constructions equal, {} ms",
        elapsed.as_millis()
    );
}

#[test]
fn convexified_subdifferential_is_hull_of_limiting() {
    let mut count = 0usize;
    for (label, cell, x) in lipschitz_catalog() {
        assert!(cover_gap(&cell).is_none(), "{label}: not finite everywhere");
        let clarke = clarke_subdifferential(&cell, &x);
        let hull = limiting_subdifferential(&cell, &x).clconv();
        assert!(clarke.set_equal(&hull), "{label}: hull mismatch at {x:?}");
        count += 1;
    }
    assert!(count >= 10, "only {count} Lipschitz instances");

    // The flagship gap: at the kink of -|x| the limiting subdifferential
    // is the two slopes while the convexified one fills the interval.
    let f = neg_abs();
    let two_points = PolyUnion::new(
        1,
        vec![
            Polyhedron::from_vrep(1, vec![v(&[-1])], vec![], vec![]),
            Polyhedron::from_vrep(1, vec![v(&[1])], vec![], vec![]),
        ],
    );
    assert!(limiting_subdifferential(&f, &[zero()]).set_equal(&two_points));
    assert!(clarke_subdifferential(&f, &[zero()]).set_equal(&interval(-1, 1)));
    assert!(!regular_subdifferential(&f, &[zero()]).contains(&[zero()]));
    println!("PASS convexified hull: {count} Lipschitz instances, gap witnessed at the kink");
}

#[test]
fn optimal_value_suite_holds_with_guarded_violator() {
    let reports = rule_reports("rule-ov-");
    let mut equalities = 0usize;
    let mut violators = 0usize;
    for (name, rep) in &reports {
        assert_eq!(rep.rule_id, "optimal-value", "{name}");
        if matches!(rep.qc, QcStatus::Violated(_)) {
            violators += 1;
            assert!(matches!(rep.verdict, Verdict::Skipped(_)), "{name}");
            assert!(matches!(rep.relation, Relation::RhsWithinLhs), "{name}");
            assert!(
                rep.rhs.is_subset(&rep.lhs),
                "{name}: formula side escapes the marginal subdifferential"
            );
        } else {
            assert!(matches!(rep.verdict, Verdict::Confirmed), "{name}");
            assert!(matches!(rep.relation, Relation::Equality), "{name}");
            assert!(rep.lhs.set_equal(&rep.rhs), "{name}");
            equalities += 1;
        }
    }
    assert!(equalities >= 10, "only {equalities} equality instances");
    assert!(violators >= 1, "no qualification violator in the suite");
    println!(
        "PASS optimal value: {equalities} equalities, {violators} violator held to one-sided containment"
    );
}

#[test]
fn marginal_family_rules_hold_per_instance_family() {
    for (prefix, rule_id) in [
        ("rule-ov-", "optimal-value"),
        ("rule-cs-", "chain-scalar"),
        ("rule-cv-", "chain-vector"),
        ("rule-cm-", "constrained-marginal"),
        ("rule-ap-", "affine-preimage"),
        ("rule-ic-", "inf-convolution"),
    ] {
        let reports = rule_reports(prefix);
        let equalities = reports
            .iter()
            .filter(|(_, r)| {
                matches!(r.verdict, Verdict::Confirmed)
                    && matches!(r.relation, Relation::Equality)
                    && r.lhs.set_equal(&r.rhs)
            })
            .count();
        assert!(equalities >= 3, "{rule_id}: only {equalities} exact equalities");
        for (name, r) in &reports {
            assert_eq!(r.rule_id, rule_id, "{name}");
        }
    }

    // Sums rebuilt as marginal functions against the direct subdifferential sum.
    let abs = pl(1, &[(&[1], 0), (&[-1], 0)]);
    let hinge = pl(1, &[(&[1], 0), (&[0], 0)]);
    let max_xy = pl(2, &[(&[1, 0], 0), (&[0, 1], 0)]);
    let sums: Vec<(ConvexPL, ConvexPL, Vector)> = vec![
        (abs.clone(), abs.clone(), v(&[0])),
        (abs.clone(), hinge.clone(), v(&[0])),
        (l1_norm(2), max_xy.clone(), v(&[0, 0])),
        (abs.clone(), pl(1, &[(&[3], 2)]), v(&[1])),
    ];
    for (f1, f2, x) in &sums {
        let inst = sum_as_optimal_value(f1, f2, x).unwrap();
        assert!(marginal_convexity_check(&inst));
        let rep = optimal_value_subdifferential(&inst).unwrap();
        assert!(matches!(rep.verdict, Verdict::Confirmed));
        assert!(matches!(rep.relation, Relation::Equality));
        let direct = f1.subdifferential(x).minkowski_sum(&f2.subdifferential(x));
        assert!(
            rep.lhs.set_equal(&PolyUnion::from_poly(direct)),
            "marginal sum differs from the direct sum at {x:?}"
        );
    }

    // Maxima rebuilt as marginal functions against the active-piece hull.
    let maxima: Vec<(ConvexPL, ConvexPL, Vector)> = vec![
        (abs.clone(), hinge, v(&[0])),
        (pl(1, &[(&[1], 0)]), pl(1, &[(&[-1], 0)]), v(&[0])),
        (pl(1, &[(&[1], 1)]), pl(1, &[(&[2], 0)]), v(&[1])),
        (l1_norm(2), max_xy, v(&[0, 0])),
    ];
    for (f1, f2, x) in &maxima {
        let inst = max_as_optimal_value(f1, f2, x).unwrap();
        assert!(marginal_convexity_check(&inst));
        let rep = optimal_value_subdifferential(&inst).unwrap();
        assert!(matches!(rep.verdict, Verdict::Confirmed));
        assert!(matches!(rep.relation, Relation::Equality));
        let top = [f1, f2]
            .iter()
            .map(|f| f.eval(x).unwrap())
            .max()
            .unwrap();
        let active: Vec<Polyhedron> = [f1, f2]
            .iter()
            .filter(|f| f.eval(x).unwrap() == top)
            .map(|f| f.subdifferential(x))
            .collect();
        let hull = PolyUnion::new(x.len(), active).clconv();
        assert!(
            rep.lhs.set_equal(&PolyUnion::from_poly(hull)),
            "marginal maximum differs from the active hull at {x:?}"
        );
    }
    println!("PASS marginal family: six rules at three equalities each, sums and maxima cross-checked");
}

#[test]
fn convexified_rule_suites_cover_strict_and_equality() {
    for (prefix, rule_id) in [
        ("rule-cds-", "coderivative-sum"),
        ("rule-ni-", "normal-intersection"),
        ("rule-ss-", "subdifferential-sum"),
        ("rule-cc-", "coderivative-chain"),
        ("rule-sp-", "set-preimage"),
        ("rule-ac-", "affine-composition"),
    ] {
        let reports = rule_reports(prefix);
        for (name, r) in &reports {
            assert_eq!(r.rule_id, rule_id, "{name}");
        }
        let confirmed: Vec<&(String, RuleReport)> = reports
            .iter()
            .filter(|(_, r)| matches!(r.verdict, Verdict::Confirmed))
            .collect();
        assert!(confirmed.len() >= 3, "{rule_id}: only {} confirmed", confirmed.len());
        for (name, r) in &confirmed {
            assert!(matches!(r.qc, QcStatus::Satisfied), "{name}: qualification not verified");
            let claim_holds = match r.relation {
                Relation::Equality => r.lhs.set_equal(&r.rhs),
                Relation::LhsWithinRhs => r.lhs.is_subset(&r.rhs),
                Relation::RhsWithinLhs => r.rhs.is_subset(&r.lhs),
            };
            assert!(claim_holds, "{name}: reported relation fails recheck");
        }
        let strict = confirmed
            .iter()
            .any(|(_, r)| r.rhs.subset_witness(&r.lhs).is_some());
        let equality = confirmed.iter().any(|(_, r)| r.lhs.set_equal(&r.rhs));
        assert!(strict, "{rule_id}: no strictly larger formula side in the suite");
        assert!(equality, "{rule_id}: no equality witness in the suite");
    }
    println!("PASS convexified rules: six suites, each with a strict and an equality witness");
}

/// Set pairs probing the tangent overlap condition in both outcomes.
fn qc_battery() -> Vec<(&'static str, PolyUnion, PolyUnion, Vector)> {
    let u = PolyUnion::from_poly;
    let quadrant = poly_h(2, &[(&[-1, 0], 0), (&[0, -1], 0)], &[]);
    let box2 = poly_h(2, &[(&[1, 0], 1), (&[0, 1], 1), (&[-1, 0], 0), (&[0, -1], 0)], &[]);
    let neg_box = poly_h(2, &[(&[1, 0], 0), (&[0, 1], 0), (&[-1, 0], 1), (&[0, -1], 1)], &[]);
    let diag = poly_h(2, &[], &[(&[1, -1], 0)]);
    let x_axis = poly_h(2, &[], &[(&[0, 1], 0)]);
    let kinked = PolyUnion::new(
        2,
        vec![
            poly_h(2, &[(&[-1, -1], 0)], &[]),
            poly_h(2, &[(&[1, -1], 0)], &[]),
        ],
    );
    let half = rat(1, 2);
    vec![
        (
            "two halfplanes at the corner",
            u(poly_h(2, &[(&[0, -1], 0)], &[])),
            u(poly_h(2, &[(&[-1, 0], 0)], &[])),
            v(&[0, 0]),
        ),
        ("diagonal through the box interior", u(diag.clone()), u(box2.clone()), vec![half.clone(), half]),
        ("box corner against the quadrant", u(box2), u(quadrant.clone()), v(&[0, 0])),
        (
            "quadrant against a slanted halfplane",
            u(quadrant.clone()),
            u(poly_h(2, &[(&[-1, -1], 0)], &[])),
            v(&[0, 0]),
        ),
        ("kinked union inside a tilted halfplane", kinked.clone(), u(poly_h(2, &[(&[1, -2], 0)], &[])), v(&[0, 0])),
        (
            "axis inside the upper halfspace",
            u(poly_h(3, &[], &[(&[1, 0, 0], 0), (&[0, 1, 0], 0)])),
            u(poly_h(3, &[(&[0, 0, -1], 0)], &[])),
            v(&[0, 0, 0]),
        ),
        ("a line against itself", u(x_axis.clone()), u(x_axis.clone()), v(&[0, 0])),
        ("two lines meeting thin", u(x_axis.clone()), u(diag), v(&[0, 0])),
        ("opposed corners", u(quadrant), u(neg_box), v(&[0, 0])),
        ("crossing union as the far side", u(poly_h(2, &[(&[0, -1], 0)], &[])), PolyUnion::new(2, vec![x_axis, poly_h(2, &[], &[(&[1, 0], 0)])]), v(&[0, 0])),
    ]
}

#[test]
fn tangent_overlap_implies_normal_qualification() {
    let mut satisfied = 0usize;
    let mut violated = 0usize;
    for (label, o1, o2, x) in qc_battery() {
        let tangent = qc_tangent_intersection(&o1, &o2, &x);
        let normal = qc_normal_intersection(&o1, &o2, &x);
        if matches!(tangent, QcStatus::Satisfied) {
            satisfied += 1;
            assert!(
                matches!(normal, QcStatus::Satisfied),
                "{label}: tangent overlap held but the normal condition failed"
            );
        } else {
            violated += 1;
        }
    }
    assert!(satisfied >= 5, "only {satisfied} pairs with tangent overlap");
    assert!(violated >= 3, "only {violated} pairs without it");

    // Same implication across the shipped intersection instances.
    for path in corpus_files("rule-ni-") {
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let spec = load_instance(&path).unwrap().rule_payload().unwrap();
        let o1 = spec.set1.as_ref().unwrap().to_union().unwrap();
        let o2 = spec.set2.as_ref().unwrap().to_union().unwrap();
        let x = parse_point(spec.x_bar.as_ref().unwrap(), o1.dim()).unwrap();
        if matches!(qc_tangent_intersection(&o1, &o2, &x), QcStatus::Satisfied) {
            assert!(
                matches!(qc_normal_intersection(&o1, &o2, &x), QcStatus::Satisfied),
                "{name}: implication fails"
            );
        }
    }

    // Thin three-dimensional crossing: the normal condition holds even
    // though neither tangent cone can overlap the other's interior.
    let axis = PolyUnion::from_poly(poly_h(3, &[], &[(&[1, 0, 0], 0), (&[0, 1, 0], 0)]));
    let plane = PolyUnion::from_poly(poly_h(3, &[], &[(&[0, 0, 1], 0)]));
    let origin = zeros(3);
    let horizontal = Polyhedron::from_vrep(
        3,
        vec![zeros(3)],
        vec![],
        vec![v(&[1, 0, 0]), v(&[0, 1, 0])],
    );
    let vertical = Polyhedron::from_vrep(3, vec![zeros(3)], vec![], vec![v(&[0, 0, 1])]);
    assert!(clarke_normal_union(&axis, &origin).as_poly().set_equal(&horizontal));
    assert!(clarke_normal_union(&plane, &origin).as_poly().set_equal(&vertical));
    assert!(matches!(qc_normal_intersection(&axis, &plane, &origin), QcStatus::Satisfied));
    assert!(matches!(qc_tangent_intersection(&axis, &plane, &origin), QcStatus::Violated(_)));
    println!(
        "PASS qualification implication: {satisfied} overlapping pairs, {violated} thin ones, axis-plane witness exact"
    );
}

#[test]
fn oracles_agree_with_exact_engine() {
    let cfg = SamplingConfig::default();

    // Membership oracle against the exact subdifferential, both directions.
    let mut functions = 0usize;
    for (f, x) in convex_function_catalog() {
        assert!(f.eval(&x).is_some());
        let sub = f.subdifferential(&x);
        let mut candidates = sample_vectors(f.dim(), 25, &cfg);
        candidates.extend(sub.vertices().iter().cloned());
        for c in &candidates {
            assert_eq!(
                subgradient_membership_exact(&f, &x, c),
                sub.contains(c),
                "membership oracle splits from the exact set at {c:?}"
            );
        }
        functions += 1;
    }
    assert!(functions >= 10);

    // Sampled directional derivatives against the exact maximum slope.
    let tol = rat(1, 1000);
    for (label, cell, x) in lipschitz_catalog() {
        let d = cell.dim();
        let mut dirs: Vec<Vector> = Vec::new();
        for i in 0..d {
            dirs.push(unit(d, i));
            dirs.push(neg(&unit(d, i)));
        }
        dirs.push(vec![one(); d]);
        for dir in &dirs {
            let est = clarke_dirderiv_estimate(&cell, &x, dir, &cfg);
            let exact = clarke_directional_derivative(&cell, &x, dir).unwrap();
            assert!(est <= exact, "{label}: estimate overshoots along {dir:?}");
            assert!(
                &exact - &est <= tol,
                "{label}: estimate misses by more than the tolerance along {dir:?}"
            );
        }
    }

    // Sampled limiting normals against the exact cones on the planar sets.
    let mut planar = 0usize;
    for path in corpus_files("set-") {
        let inst = load_instance(&path).unwrap();
        let spec = inst.set_payload().unwrap();
        if spec.dim != 2 {
            continue;
        }
        let u = spec.to_union().unwrap();
        let probe = inst.probe.as_ref().expect("set instances carry a probe");
        let x = parse_point(&probe.point, 2).unwrap();
        assert!(
            matches!(limiting_sample_agrees(&u, &x, &cfg), Ok(true)),
            "{}: sampled cloud disagrees",
            path.display()
        );
        planar += 1;
    }
    assert!(planar >= 3, "only {planar} planar sets");
    println!(
        "PASS oracles: membership on {functions} functions, slopes within 1/1000, {planar} planar clouds"
    );
}

#[test]
fn suite_runner_is_deterministic_and_fast() {
    let bin = env!("CARGO_BIN_EXE_vacal");
    let corpus = corpus_dir();
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first.json");
    let second = tmp.path().join("second.json");

    let started = Instant::now();
    let out1 = Command::new(bin)
        .arg("verify")
        .arg(&corpus)
        .args(["--oracle", "on", "--jobs", "2", "--report"])
        .arg(&first)
        .output()
        .unwrap();
    let elapsed = started.elapsed();
    assert!(
        out1.status.success(),
        "first run failed: {}",
        String::from_utf8_lossy(&out1.stderr)
    );
    assert!(elapsed.as_secs() < 300, "full corpus took {elapsed:?}");

    // Second run: different parallelism, suite given through the
    // environment while the positional argument points nowhere.
    let out2 = Command::new(bin)
        .env("VACAL_CORPUS", &corpus)
        .args(["verify", "/nonexistent-suite", "--oracle", "on", "--jobs", "1", "--report"])
        .arg(&second)
        .output()
        .unwrap();
    assert!(
        out2.status.success(),
        "second run failed: {}",
        String::from_utf8_lossy(&out2.stderr)
    );

    let a = fs::read(&first).unwrap();
    let b = fs::read(&second).unwrap();
    assert_eq!(a, b, "reports differ between reruns");
    assert!(!a.is_empty());
    println!(
        "PASS determinism: corpus verified in {} ms, reruns byte-identical across job counts",
        elapsed.as_millis()
    );
}
