//! Calculus rules as checkable computations.
//!
//! Every operation here takes a concrete rule instance, computes the two
//! sides of the rule by *independent* routes, decides the rule's
//! qualification condition exactly, and packages the outcome in a
//! `RuleReport`. The left-hand side is always produced without using the
//! rule: marginal functions are materialized by projecting lifted
//! epigraphs, sums and compositions are assembled as explicit cell or
//! graph constructions, and only then differentiated. The right-hand side
//! follows the rule's formula, with unions over subgradient parameters
//! replaced by single projections of lifted polyhedra (the union of a
//! parameterized family of slices is the linear image of the joint
//! feasible set).
//!
//! Convex marginal rules claim equalities; when their qualification
//! condition fails, the one-sided containment of the formula side inside
//! the true subdifferential still holds and is verified instead, with the
//! verdict downgraded to skipped. Convexified (Clarke) rules claim
//! inclusions; a violated qualification condition or an uncertified inner
//! semicontinuity assumption downgrades them the same way. A `Refuted`
//! verdict carries an explicit witness point separating the two sides and
//! must never occur on shipped data.

use crate::linalg::{add, kernel_basis, mat_t_vec, mat_vec, neg, transpose, unit, zeros, Vector};
use crate::mappings::{
    composition_isc_hint, preimage_isc_hint, sum_isc_hint, IscHint, PolyMapping,
};
use crate::normal_cones::{
    clarke_normal_union, clarke_singular_subdifferential, clarke_subdifferential,
    clarke_tangent_union, is_lower_regular, limiting_normal_union, ConeUnion, PolyUnion,
};
use crate::pl_functions::{AffinePiece, CellPL, ConvexPL, PlError};
use crate::polyhedra::lp::{self, LpOutcome};
use crate::polyhedra::{Cone, Polyhedron};
use crate::scalar::{format_scalar, one, zero, Scalar};
use num_traits::Signed;

#[derive(Debug, thiserror::Error)]
pub enum RuleError {
    #[error("{0}")]
    Precondition(String),
    #[error("the minimized value is unbounded below")]
    UnboundedBelow,
    #[error("the outer function must be nondecreasing")]
    NotMonotone,
    #[error(transparent)]
    Function(#[from] PlError),
}

fn pre<T>(msg: impl Into<String>) -> Result<T, RuleError> {
    Err(RuleError::Precondition(msg.into()))
}

/// Status of a rule's qualification condition. A violation carries a
/// witness when the condition is a "only the zero vector" test; witnesses
/// for existential conditions (a required point that does not exist) are
/// omitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QcStatus {
    Satisfied,
    Violated(Option<Vector>),
    NotApplicable,
}

impl QcStatus {
    pub fn satisfied(&self) -> bool {
        matches!(self, QcStatus::Satisfied)
    }
}

/// The set relation a rule claims between its two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equality,
    LhsWithinRhs,
    RhsWithinLhs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// The claimed relation was checked and holds.
    Confirmed,
    /// Hypotheses are not established, so nothing is asserted; the reason
    /// is recorded. Whatever weaker containment still applies has been
    /// checked before choosing this verdict.
    Skipped(String),
    /// The claimed relation fails; the witness lies in exactly one side.
    Refuted(Vector),
}

/// Outcome of one rule application: both sides, the qualification status,
/// the relation that was claimed, and the verdict of checking it.
#[derive(Debug, Clone)]
pub struct RuleReport {
    pub rule_id: &'static str,
    pub lhs: PolyUnion,
    pub rhs: PolyUnion,
    pub qc: QcStatus,
    pub relation: Relation,
    pub verdict: Verdict,
    pub assumptions: Vec<String>,
}

impl RuleReport {
    pub fn confirmed(&self) -> bool {
        matches!(self.verdict, Verdict::Confirmed)
    }
}

// ----- small geometric helpers -----

fn block(start: usize, len: usize) -> Vec<usize> {
    (start..start + len).collect()
}

fn concat(x: &[Scalar], y: &[Scalar]) -> Vector {
    let mut p = x.to_vec();
    p.extend(y.iter().cloned());
    p
}

fn fmt_vec(v: &[Scalar]) -> String {
    let inner: Vec<String> = v.iter().map(format_scalar).collect();
    format!("({})", inner.join(", "))
}

fn neg_identity(d: usize) -> Vec<Vector> {
    (0..d).map(|i| neg(&unit(d, i))).collect()
}

fn negate_poly(p: &Polyhedron) -> Polyhedron {
    p.linear_image(&neg_identity(p.dim()))
}

/// Copies rows into a larger coordinate space, coordinate i of the source
/// landing at `positions[i]`.
fn scatter_rows(
    rows: &[(Vector, Scalar)],
    total: usize,
    positions: &[usize],
    out: &mut Vec<(Vector, Scalar)>,
) {
    for (a, b) in rows {
        let mut row = zeros(total);
        for (coef, &pos) in a.iter().zip(positions) {
            row[pos] = coef.clone();
        }
        out.push((row, b.clone()));
    }
}

fn embed(
    p: &Polyhedron,
    total: usize,
    positions: &[usize],
    ineqs: &mut Vec<(Vector, Scalar)>,
    eqs: &mut Vec<(Vector, Scalar)>,
) {
    assert_eq!(p.dim(), positions.len(), "embedding positions mismatch");
    scatter_rows(p.ineqs(), total, positions, ineqs);
    scatter_rows(p.eqs(), total, positions, eqs);
}

/// A nonzero point of `p` when one exists. Canonical generators make this
/// a lookup: any ray or lineality direction, else a nonzero vertex.
fn nonzero_point(p: &Polyhedron) -> Option<Vector> {
    if p.is_empty() {
        return None;
    }
    if let Some(r) = p.rays().first() {
        return Some(r.clone());
    }
    if let Some(l) = p.lineality().first() {
        return Some(l.clone());
    }
    p.vertices().iter().find(|v| !crate::linalg::is_zero_vec(v)).cloned()
}

/// Decides a "contains only the zero vector" qualification condition.
fn only_zero(p: &Polyhedron) -> QcStatus {
    match nonzero_point(p) {
        None => QcStatus::Satisfied,
        Some(w) => QcStatus::Violated(Some(w)),
    }
}

fn u(p: Polyhedron) -> PolyUnion {
    PolyUnion::from_poly(p)
}

fn decide(relation: Relation, lhs: &PolyUnion, rhs: &PolyUnion) -> Verdict {
    let fwd = || lhs.subset_witness(rhs);
    let bwd = || rhs.subset_witness(lhs);
    let witness = match relation {
        Relation::Equality => fwd().or_else(bwd),
        Relation::LhsWithinRhs => fwd(),
        Relation::RhsWithinLhs => bwd(),
    };
    witness.map_or(Verdict::Confirmed, Verdict::Refuted)
}

/// Report builder for the convex marginal rules: equality under the
/// qualification condition, and the still-valid containment of the formula
/// side inside the true subdifferential when it fails.
fn equality_gated(
    rule_id: &'static str,
    lhs: PolyUnion,
    rhs: PolyUnion,
    qc: QcStatus,
    assumptions: Vec<String>,
) -> RuleReport {
    let (relation, verdict) = match &qc {
        QcStatus::Satisfied | QcStatus::NotApplicable => {
            (Relation::Equality, decide(Relation::Equality, &lhs, &rhs))
        }
        QcStatus::Violated(_) => {
            let v = match decide(Relation::RhsWithinLhs, &lhs, &rhs) {
                Verdict::Confirmed => Verdict::Skipped(
                    "qualification condition violated; only the one-sided containment of the \
                     formula side was verified"
                        .to_string(),
                ),
                other => other,
            };
            (Relation::RhsWithinLhs, v)
        }
    };
    RuleReport { rule_id, lhs, rhs, qc, relation, verdict, assumptions }
}

/// Report builder for the convexified rules: the claimed relation is only
/// asserted when the qualification condition holds and inner
/// semicontinuity is certified or assumed.
fn inclusion_gated(
    rule_id: &'static str,
    lhs: PolyUnion,
    rhs: PolyUnion,
    qc: QcStatus,
    relation: Relation,
    isc_ok: bool,
    assumptions: Vec<String>,
) -> RuleReport {
    let verdict = if !isc_ok {
        Verdict::Skipped("inner semicontinuity neither certified nor assumed".to_string())
    } else {
        match &qc {
            QcStatus::Satisfied | QcStatus::NotApplicable => decide(relation, &lhs, &rhs),
            QcStatus::Violated(_) => Verdict::Skipped(
                "qualification condition violated; both sides reported without assertion"
                    .to_string(),
            ),
        }
    };
    RuleReport { rule_id, lhs, rhs, qc, relation, verdict, assumptions }
}

fn isc_gate(hint: IscHint, assume: bool, assumptions: &mut Vec<String>) -> bool {
    match hint {
        IscHint::Holds(reason) => {
            assumptions.push(format!("inner semicontinuity certified: {reason}"));
            true
        }
        IscHint::Unknown if assume => {
            assumptions.push("inner semicontinuity assumed by caller".to_string());
            true
        }
        IscHint::Unknown => {
            assumptions.push("inner semicontinuity neither certified nor assumed".to_string());
            false
        }
    }
}

/// Reads a convex function off a lifted polyhedron: project onto `keep`
/// (last kept coordinate is the epigraph height) and interpret the result
/// as an epigraph.
fn function_from_projection(lifted: &Polyhedron, keep: &[usize]) -> Result<ConvexPL, RuleError> {
    let epi = lifted.project(keep);
    ConvexPL::from_epigraph(&epi).map_err(|e| match e {
        PlError::UnboundedBelow => RuleError::UnboundedBelow,
        PlError::EmptyDomain => {
            RuleError::Precondition("the marginal function is nowhere finite".to_string())
        }
        other => RuleError::Function(other),
    })
}

// ----- marginal functions over a constraint mapping -----

/// A marginal-function instance: minimize `objective(x, y)` over
/// `y ∈ mapping(x)`, anchored at a reference pair where the minimum is
/// attained. The mapping graph must be a single polyhedron so the marginal
/// function is convex.
#[derive(Debug, Clone)]
pub struct OptValueInstance {
    mapping: PolyMapping,
    objective: ConvexPL,
    x_bar: Vector,
    y_bar: Vector,
}

/// The value of a marginal minimization, with both infinities kept
/// distinct: `PlusInfinity` for an empty feasible set, `MinusInfinity` for
/// a feasible but unbounded one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Marginal {
    Finite(Scalar),
    PlusInfinity,
    MinusInfinity,
}

impl OptValueInstance {
    pub fn new(
        mapping: PolyMapping,
        objective: ConvexPL,
        x_bar: Vector,
        y_bar: Vector,
    ) -> Result<Self, RuleError> {
        if objective.dim() != mapping.dim_in() + mapping.dim_out() {
            return pre("the objective must live on the product of input and output spaces");
        }
        if x_bar.len() != mapping.dim_in() || y_bar.len() != mapping.dim_out() {
            return pre("reference point dimensions do not match the mapping");
        }
        if mapping.graph().parts().len() != 1 {
            return pre("the mapping graph must be a single polyhedron");
        }
        if !mapping.graph_contains(&x_bar, &y_bar) {
            return pre("the reference pair must lie on the mapping graph");
        }
        let inst = OptValueInstance { mapping, objective, x_bar, y_bar };
        let pair = concat(&inst.x_bar, &inst.y_bar);
        let val = match inst.objective.eval(&pair) {
            Some(v) => v,
            None => return pre("the objective must be finite at the reference pair"),
        };
        match marginal_value(&inst, &inst.x_bar) {
            Marginal::Finite(v) if v == val => Ok(inst),
            Marginal::Finite(_) => pre("the reference output does not attain the minimum"),
            Marginal::MinusInfinity => Err(RuleError::UnboundedBelow),
            Marginal::PlusInfinity => pre("no feasible output at the reference input"),
        }
    }

    pub fn mapping(&self) -> &PolyMapping {
        &self.mapping
    }

    pub fn objective(&self) -> &ConvexPL {
        &self.objective
    }

    pub fn x_bar(&self) -> &[Scalar] {
        &self.x_bar
    }

    pub fn y_bar(&self) -> &[Scalar] {
        &self.y_bar
    }

    fn graph_part(&self) -> &Polyhedron {
        &self.mapping.graph().parts()[0]
    }
}

/// Exact minimization of `objective(x, ·)` over `mapping(x)`.
pub fn marginal_value(inst: &OptValueInstance, x: &[Scalar]) -> Marginal {
    assert_eq!(x.len(), inst.mapping.dim_in(), "input dimension mismatch");
    let m = inst.mapping.dim_out();
    let feasible_heights = inst.objective.epigraph().substitute(0, x);
    let image = inst.graph_part().substitute(0, x);
    let feasible = feasible_heights.intersect(&image.product(&Polyhedron::full_space(1)));
    match lp::minimize(&feasible, &unit(m + 1, m)) {
        LpOutcome::Infeasible => Marginal::PlusInfinity,
        LpOutcome::Unbounded => Marginal::MinusInfinity,
        LpOutcome::Optimal { value, .. } => Marginal::Finite(value),
    }
}

/// Midpoint convexity of the marginal value on a deterministic rational
/// grid spanning the graph's input range, widened by one unit on each
/// side. A `MinusInfinity` value anywhere on the grid fails the check.
pub fn marginal_convexity_check(inst: &OptValueInstance) -> bool {
    let n = inst.mapping.dim_in();
    let part = inst.graph_part();
    let mut lo = vec![zero(); n];
    let mut hi = vec![zero(); n];
    for v in part.vertices() {
        for i in 0..n {
            if v[i] < lo[i] {
                lo[i] = v[i].clone();
            }
            if v[i] > hi[i] {
                hi[i] = v[i].clone();
            }
        }
    }
    let steps: i64 = if n <= 1 { 4 } else { 2 };
    let mut axes: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    for i in 0..n {
        let a = lo[i].clone() - one();
        let b = hi[i].clone() + one();
        let width = &b - &a;
        axes.push(
            (0..=steps)
                .map(|k| &a + &width * crate::scalar::rat(k, steps))
                .collect(),
        );
    }
    let mut points: Vec<Vector> = vec![vec![]];
    for axis in &axes {
        let mut next = Vec::new();
        for p in &points {
            for v in axis {
                let mut q = p.clone();
                q.push(v.clone());
                next.push(q);
            }
        }
        points = next;
    }
    let mut cache: std::collections::BTreeMap<Vector, Marginal> = std::collections::BTreeMap::new();
    let value = |x: &Vector, cache: &mut std::collections::BTreeMap<Vector, Marginal>| {
        cache.entry(x.clone()).or_insert_with(|| marginal_value(inst, x)).clone()
    };
    for i in 0..points.len() {
        for j in i..points.len() {
            let mid: Vector = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a + b) / crate::scalar::int(2))
                .collect();
            let vi = value(&points[i], &mut cache);
            let vj = value(&points[j], &mut cache);
            let vm = value(&mid, &mut cache);
            match (&vi, &vj, &vm) {
                (_, _, Marginal::MinusInfinity) => return false,
                (Marginal::MinusInfinity, _, _) | (_, Marginal::MinusInfinity, _) => return false,
                (Marginal::PlusInfinity, _, _) | (_, Marginal::PlusInfinity, _) => {}
                (Marginal::Finite(_), Marginal::Finite(_), Marginal::PlusInfinity) => {
                    return false;
                }
                (Marginal::Finite(a), Marginal::Finite(b), Marginal::Finite(m)) => {
                    if crate::scalar::int(2) * m > a + b {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Subdifferential of the marginal function at the reference input:
/// equality of the true subdifferential with the union, over subgradients
/// `(u, v)` of the objective, of `u` shifted by the graph-coderivative of
/// the mapping at `v`. The union is computed as one projection of the
/// joint polyhedron of compatible pairs.
pub fn optimal_value_subdifferential(inst: &OptValueInstance) -> Result<RuleReport, RuleError> {
    let n = inst.mapping.dim_in();
    let m = inst.mapping.dim_out();
    let graph = inst.graph_part();
    let pair = concat(&inst.x_bar, &inst.y_bar);

    // Left side: project the lifted epigraph of the minimization onto
    // (input, height) to materialize the marginal function, then
    // differentiate it. This never looks at the formula side.
    let lifted = inst
        .objective
        .epigraph()
        .intersect(&graph.product(&Polyhedron::full_space(1)));
    let mut keep = block(0, n);
    keep.push(n + m);
    let marginal = function_from_projection(&lifted, &keep)?;
    let lhs = marginal.subdifferential(&inst.x_bar);

    // Right side: pairs of an objective subgradient (u, v) and a graph
    // normal (w, -v), imaged under (u, v, w, v') -> u + w.
    let sub = inst.objective.subdifferential(&pair);
    let ncone = graph.normal_cone_convex(&pair);
    let total = 2 * (n + m);
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    embed(&sub, total, &block(0, n + m), &mut ineqs, &mut eqs);
    embed(ncone.as_poly(), total, &block(n + m, n + m), &mut ineqs, &mut eqs);
    for k in 0..m {
        let mut row = zeros(total);
        row[n + k] = one();
        row[n + m + n + k] = one();
        eqs.push((row, zero()));
    }
    let pairs = Polyhedron::from_hrep(total, ineqs, eqs);
    let image: Vec<Vector> = (0..n)
        .map(|i| {
            let mut row = zeros(total);
            row[i] = one();
            row[n + m + i] = one();
            row
        })
        .collect();
    let rhs = pairs.linear_image(&image);

    // Qualification: horizon subgradients of the objective may meet the
    // negated graph normal cone only at zero.
    let sing = inst.objective.singular_subdifferential(&pair);
    let qc = only_zero(sing.intersect(&ncone.negate()).as_poly());

    let assumptions =
        vec!["reference output verified to attain the marginal minimum".to_string()];
    Ok(equality_gated("optimal-value", u(lhs), u(rhs), qc, assumptions))
}

/// Builds the marginal-function instance whose value function is
/// `f1 + f2`: minimize `f1(x) + y` over `y` at least `f2(x)`.
pub fn sum_as_optimal_value(
    f1: &ConvexPL,
    f2: &ConvexPL,
    x_bar: &[Scalar],
) -> Result<OptValueInstance, RuleError> {
    if f1.dim() != f2.dim() {
        return pre("summands live in different spaces");
    }
    let d = f1.dim();
    let pieces = f1
        .pieces()
        .iter()
        .map(|p| {
            let mut g = p.gradient.clone();
            g.push(one());
            AffinePiece::new(g, p.offset.clone())
        })
        .collect();
    let domain = f1.domain().product(&Polyhedron::full_space(1));
    let objective = ConvexPL::new(d + 1, pieces, domain)?;
    let y = match f2.eval(x_bar) {
        Some(v) => v,
        None => return pre("the reference point must be in both domains"),
    };
    OptValueInstance::new(
        PolyMapping::from_epigraph_of(f2),
        objective,
        x_bar.to_vec(),
        vec![y],
    )
}

/// Builds the marginal-function instance whose value function is
/// `max(f1, f2)`: minimize `max(y1, y2)` over `y1 >= f1(x)`, `y2 >= f2(x)`.
pub fn max_as_optimal_value(
    f1: &ConvexPL,
    f2: &ConvexPL,
    x_bar: &[Scalar],
) -> Result<OptValueInstance, RuleError> {
    if f1.dim() != f2.dim() {
        return pre("the two functions live in different spaces");
    }
    let d = f1.dim();
    let total = d + 2;
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    let mut pos1 = block(0, d);
    pos1.push(d);
    let mut pos2 = block(0, d);
    pos2.push(d + 1);
    embed(&f1.epigraph(), total, &pos1, &mut ineqs, &mut eqs);
    embed(&f2.epigraph(), total, &pos2, &mut ineqs, &mut eqs);
    let graph = Polyhedron::from_hrep(total, ineqs, eqs);
    let mapping = PolyMapping::new(d, 2, PolyUnion::from_poly(graph));
    let objective = ConvexPL::new(
        total,
        vec![
            AffinePiece::new(unit(total, d), zero()),
            AffinePiece::new(unit(total, d + 1), zero()),
        ],
        Polyhedron::full_space(total),
    )?;
    let (y1, y2) = match (f1.eval(x_bar), f2.eval(x_bar)) {
        (Some(a), Some(b)) => (a, b),
        _ => return pre("the reference point must be in both domains"),
    };
    OptValueInstance::new(mapping, objective, x_bar.to_vec(), vec![y1, y2])
}

// ----- chain rules for convex compositions -----

/// The scalar chain rule `∂(outer ∘ f)` for a nondecreasing convex outer
/// function on the line: subgradients of the composition are the slices
/// of the inner epigraph normal cone at outer subgradient multipliers.
pub fn chain_rule_scalar(
    f: &ConvexPL,
    outer: &ConvexPL,
    x_bar: &[Scalar],
) -> Result<RuleReport, RuleError> {
    if outer.dim() != 1 {
        return pre("the outer function must live on the line");
    }
    if f.dim() != x_bar.len() {
        return pre("reference point dimension mismatch");
    }
    // Nondecreasing as an extended-real function: nonnegative slopes and a
    // domain unbounded below (a finite lower endpoint would jump from
    // +infinity down to finite values).
    let slopes_ok = outer.pieces().iter().all(|p| !p.gradient[0].is_negative());
    let dom_ok = outer.domain().eqs().is_empty()
        && outer.domain().ineqs().iter().all(|(a, _)| !a[0].is_negative());
    if !slopes_ok || !dom_ok {
        return Err(RuleError::NotMonotone);
    }
    let d = f.dim();
    let y = match f.eval(x_bar) {
        Some(v) => v,
        None => return pre("the inner function must be finite at the reference point"),
    };
    if outer.eval(&[y.clone()]).is_none() {
        return pre("the composition must be finite at the reference point");
    }

    // Left side: join the epigraphs through the shared middle coordinate
    // and project out that coordinate; monotonicity makes the projected
    // set the epigraph of the composition.
    let total = d + 2;
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    embed(&f.epigraph(), total, &block(0, d + 1), &mut ineqs, &mut eqs);
    embed(&outer.epigraph(), total, &block(d, 2), &mut ineqs, &mut eqs);
    let lifted = Polyhedron::from_hrep(total, ineqs, eqs);
    let mut keep = block(0, d);
    keep.push(d + 1);
    let composed = function_from_projection(&lifted, &keep)?;
    debug_assert_eq!(composed.eval(x_bar), outer.eval(&[y.clone()]));
    let lhs = composed.subdifferential(x_bar);

    // Right side: slices (x*, -lambda) of the inner epigraph normal cone,
    // lambda ranging over the outer subdifferential.
    let epi_pt = concat(x_bar, &[y.clone()]);
    let ncone = f.epigraph().normal_cone_convex(&epi_pt);
    let lambda = outer.subdifferential(&[y.clone()]);
    let rhs = ncone
        .as_poly()
        .intersect(&Polyhedron::full_space(d).product(&negate_poly(&lambda)))
        .project(&block(0, d));

    // Qualification: no nonzero horizon slope of the outer function, or
    // zero is not an inner subgradient.
    let sing = outer.singular_subdifferential(&[y]);
    let qc = if sing.is_zero() || !f.subdifferential(x_bar).contains(&zeros(d)) {
        QcStatus::Satisfied
    } else {
        QcStatus::Violated(nonzero_point(sing.as_poly()))
    };

    let assumptions =
        vec!["outer slopes are nonnegative and the outer domain has no lower bound".to_string()];
    Ok(equality_gated("chain-scalar", u(lhs), u(rhs), qc, assumptions))
}

/// Cone of weighted selections `{(z_i, λ_i)} : z_i ∈ λ_i · P_i, λ_i ≥ 0`,
/// one block per bounded polyhedron `P_i`, imaged under `Σ z_i` after
/// constraining `λ` to `weights`. Exact because each `P_i` is a polytope,
/// so `z ∈ λ P_i` is the cone over `P_i × {1}`.
fn weighted_sum_image(parts: &[Polyhedron], weights: &Polyhedron) -> Polyhedron {
    let k = parts.len();
    let d = parts[0].dim();
    let total = k * d + k;
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        debug_assert!(p.rays().is_empty() && p.lineality().is_empty(), "parts must be bounded");
        let gens: Vec<Vector> = p
            .vertices()
            .iter()
            .map(|v| {
                let mut g = v.clone();
                g.push(one());
                g
            })
            .collect();
        let cone = Cone::from_gens(d + 1, gens, vec![]);
        let mut pos = block(i * d, d);
        pos.push(k * d + i);
        embed(cone.as_poly(), total, &pos, &mut ineqs, &mut eqs);
    }
    embed(weights, total, &block(k * d, k), &mut ineqs, &mut eqs);
    let joint = Polyhedron::from_hrep(total, ineqs, eqs);
    let image: Vec<Vector> = (0..d)
        .map(|j| {
            let mut row = zeros(total);
            for i in 0..k {
                row[i * d + j] = one();
            }
            row
        })
        .collect();
    joint.linear_image(&image)
}

/// Is some nonzero multiplier from `horizon` able to cancel a weighted
/// sum of subgradients? Decided exactly over the normalized slice
/// `Σ λ_i = 1` (valid since the horizon multipliers are nonnegative).
fn multiplier_cancellation(parts: &[Polyhedron], horizon: &Cone) -> QcStatus {
    let k = parts.len();
    let d = parts[0].dim();
    let total = k * d + k;
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let gens: Vec<Vector> = p
            .vertices()
            .iter()
            .map(|v| {
                let mut g = v.clone();
                g.push(one());
                g
            })
            .collect();
        let cone = Cone::from_gens(d + 1, gens, vec![]);
        let mut pos = block(i * d, d);
        pos.push(k * d + i);
        embed(cone.as_poly(), total, &pos, &mut ineqs, &mut eqs);
    }
    embed(horizon.as_poly(), total, &block(k * d, k), &mut ineqs, &mut eqs);
    for j in 0..d {
        let mut row = zeros(total);
        for i in 0..k {
            row[i * d + j] = one();
        }
        eqs.push((row, zero()));
    }
    let mut norm = zeros(total);
    for i in 0..k {
        norm[k * d + i] = one();
    }
    eqs.push((norm, one()));
    let feasible = Polyhedron::from_hrep(total, ineqs, eqs);
    if feasible.is_empty() {
        QcStatus::Satisfied
    } else {
        let v = &feasible.vertices()[0];
        QcStatus::Violated(Some(v[k * d..].to_vec()))
    }
}

/// Zero-sum selections from a family of cones: satisfied when the only
/// selection with a vanishing sum is all-zero.
fn sum_zero_only(cones: &[Cone]) -> QcStatus {
    let k = cones.len();
    let d = cones[0].dim();
    let total = k * d;
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    for (i, c) in cones.iter().enumerate() {
        embed(c.as_poly(), total, &block(i * d, d), &mut ineqs, &mut eqs);
    }
    for j in 0..d {
        let mut row = zeros(total);
        for i in 0..k {
            row[i * d + j] = one();
        }
        eqs.push((row, zero()));
    }
    only_zero(&Polyhedron::from_hrep(total, ineqs, eqs))
}

/// The componentwise chain rule `∂(outer ∘ (f_1, …, f_k))` for finite
/// convex components and an outer function nondecreasing in every
/// coordinate. The formula side is computed twice: as a slice of the
/// joint-graph normal cone, and as the weighted-sum form printed by the
/// rule; the two must agree whenever the qualification conditions hold.
pub fn chain_rule_vector(
    components: &[ConvexPL],
    outer: &ConvexPL,
    x_bar: &[Scalar],
) -> Result<RuleReport, RuleError> {
    let k = components.len();
    if k == 0 {
        return pre("at least one component function is required");
    }
    let d = components[0].dim();
    if components.iter().any(|f| f.dim() != d) || x_bar.len() != d {
        return pre("component dimensions disagree");
    }
    if outer.dim() != k {
        return pre("the outer function must live on the component space");
    }
    for f in components {
        if !(f.domain().ineqs().is_empty() && f.domain().eqs().is_empty()) {
            return pre("component functions must be finite everywhere");
        }
    }
    let slopes_ok = outer
        .pieces()
        .iter()
        .all(|p| p.gradient.iter().all(|g| !g.is_negative()));
    let dom_ok = outer.domain().eqs().is_empty()
        && outer
            .domain()
            .ineqs()
            .iter()
            .all(|(a, _)| a.iter().all(|g| !g.is_negative()));
    if !slopes_ok || !dom_ok {
        return Err(RuleError::NotMonotone);
    }
    let y: Vector = components.iter().map(|f| f.eval(x_bar).unwrap()).collect();
    if outer.eval(&y).is_none() {
        return pre("the outer function must be finite at the inner values");
    }

    // Joint graph {(x, y) : y_i >= f_i(x)}.
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    for (i, f) in components.iter().enumerate() {
        let mut pos = block(0, d);
        pos.push(d + i);
        embed(&f.epigraph(), d + k, &pos, &mut ineqs, &mut eqs);
    }
    let graph = Polyhedron::from_hrep(d + k, ineqs, eqs);

    // Left side through the materialized composition.
    let total = d + k + 1;
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    embed(&graph, total, &block(0, d + k), &mut ineqs, &mut eqs);
    embed(&outer.epigraph(), total, &block(d, k + 1), &mut ineqs, &mut eqs);
    let lifted = Polyhedron::from_hrep(total, ineqs, eqs);
    let mut keep = block(0, d);
    keep.push(d + k);
    let composed = function_from_projection(&lifted, &keep)?;
    debug_assert_eq!(composed.eval(x_bar), outer.eval(&y));
    let lhs = composed.subdifferential(x_bar);

    // Slice form of the right side.
    let pair = concat(x_bar, &y);
    let ncone = graph.normal_cone_convex(&pair);
    let lambda = outer.subdifferential(&y);
    let rhs_slice = ncone
        .as_poly()
        .intersect(&Polyhedron::full_space(d).product(&negate_poly(&lambda)))
        .project(&block(0, d));

    // Weighted-sum form of the right side.
    let subs: Vec<Polyhedron> = components.iter().map(|f| f.subdifferential(x_bar)).collect();
    let rhs_sum = weighted_sum_image(&subs, &lambda);

    // Qualifications: zero-sum horizon selections must vanish, and no
    // nonzero horizon multiplier of the outer function may cancel a
    // weighted subgradient sum.
    let sings: Vec<Cone> =
        components.iter().map(|f| f.singular_subdifferential(x_bar)).collect();
    let qc_sum = sum_zero_only(&sings);
    let qc_mult = multiplier_cancellation(&subs, &outer.singular_subdifferential(&y));
    let mut assumptions = vec![format!(
        "horizon zero-sum condition: {}; multiplier cancellation condition: {}",
        if qc_sum.satisfied() { "satisfied" } else { "violated" },
        if qc_mult.satisfied() { "satisfied" } else { "violated" },
    )];
    let qc = match (&qc_sum, &qc_mult) {
        (QcStatus::Satisfied, QcStatus::Satisfied) => QcStatus::Satisfied,
        (QcStatus::Violated(w), _) => QcStatus::Violated(w.clone()),
        (_, QcStatus::Violated(w)) => QcStatus::Violated(w.clone()),
        _ => unreachable!("both conditions are decided"),
    };

    if qc.satisfied() {
        // The two routes to the formula side must coincide.
        if !rhs_slice.set_equal(&rhs_sum) {
            let w = u(rhs_slice.clone())
                .subset_witness(&u(rhs_sum.clone()))
                .or_else(|| u(rhs_sum.clone()).subset_witness(&u(rhs_slice.clone())))
                .expect("unequal sets admit a separating point");
            assumptions.push("the slice and weighted-sum forms disagree".to_string());
            return Ok(RuleReport {
                rule_id: "chain-vector",
                lhs: u(lhs),
                rhs: u(rhs_sum),
                qc,
                relation: Relation::Equality,
                verdict: Verdict::Refuted(w),
                assumptions,
            });
        }
        assumptions.push("slice and weighted-sum forms of the formula side agree".to_string());
        Ok(equality_gated("chain-vector", u(lhs), u(rhs_sum), qc, assumptions))
    } else {
        // Fall back to the always-valid containment of the slice form.
        Ok(equality_gated("chain-vector", u(lhs), u(rhs_slice), qc, assumptions))
    }
}

// ----- marginal rules with explicit constraints -----

/// Marginal rule for minimization over a fixed constraint set: the
/// subgradients of `inf_y { objective(x, y) : y ∈ constraint }` are the
/// input blocks of objective subgradients whose output block is the
/// negative of a constraint normal (the stationarity pairing at a
/// constrained minimum).
pub fn constrained_marginal_rule(
    objective: &ConvexPL,
    constraint: &Polyhedron,
    x_bar: &[Scalar],
    y_bar: &[Scalar],
) -> Result<RuleReport, RuleError> {
    let dy = constraint.dim();
    let dx = x_bar.len();
    if objective.dim() != dx + dy || y_bar.len() != dy {
        return pre("objective, constraint, and reference dimensions disagree");
    }
    if !constraint.contains(y_bar) {
        return pre("the reference output must satisfy the constraint");
    }
    let pair = concat(x_bar, y_bar);
    let val = match objective.eval(&pair) {
        Some(v) => v,
        None => return pre("the objective must be finite at the reference pair"),
    };
    let feasible = objective
        .epigraph()
        .substitute(0, x_bar)
        .intersect(&constraint.product(&Polyhedron::full_space(1)));
    match lp::minimize(&feasible, &unit(dy + 1, dy)) {
        LpOutcome::Optimal { value, .. } if value == val => {}
        LpOutcome::Unbounded => return Err(RuleError::UnboundedBelow),
        _ => return pre("the reference output does not minimize over the constraint set"),
    }

    // Left side via the materialized marginal function.
    let lifted = objective.epigraph().intersect(
        &Polyhedron::full_space(dx)
            .product(constraint)
            .product(&Polyhedron::full_space(1)),
    );
    let mut keep = block(0, dx);
    keep.push(dx + dy);
    let marginal = function_from_projection(&lifted, &keep)?;
    let lhs = marginal.subdifferential(x_bar);

    // Right side: slice the objective subdifferential by the stationarity
    // condition on the output block.
    let ncone = constraint.normal_cone_convex(y_bar);
    let slab = Polyhedron::full_space(dx).product(ncone.negate().as_poly());
    let rhs = objective.subdifferential(&pair).intersect(&slab).project(&block(0, dx));

    // Qualification: a horizon subgradient (0, v) with -v a constraint
    // normal forces v = 0.
    let sing = objective.singular_subdifferential(&pair);
    let zero_block = Polyhedron::point(&zeros(dx)).product(ncone.negate().as_poly());
    let qc = only_zero(&sing.as_poly().intersect(&zero_block));

    let mut assumptions =
        vec!["reference output verified as a minimizer over the constraint set".to_string()];
    if constraint.ineqs().is_empty() && constraint.eqs().is_empty() {
        assumptions.push("unconstrained output space: the qualification holds automatically".to_string());
    }
    Ok(equality_gated("constrained-marginal", u(lhs), u(rhs), qc, assumptions))
}

/// Marginal rule for minimization over the fibers of an affine map
/// `y -> map · y + offset`: the subgradients of the fiber minimum are the
/// vectors whose adjoint image is a subgradient at the fiber minimizer.
pub fn affine_preimage_rule(
    objective: &ConvexPL,
    map: &[Vector],
    offset: &[Scalar],
    x_bar: &[Scalar],
    y_bar: &[Scalar],
) -> Result<RuleReport, RuleError> {
    let n = map.len();
    let m = objective.dim();
    if map.iter().any(|r| r.len() != m) || offset.len() != n || x_bar.len() != n || y_bar.len() != m
    {
        return pre("map, offset, and reference dimensions disagree");
    }
    if add(&mat_vec(map, y_bar), offset) != x_bar {
        return pre("the reference output must map to the reference input");
    }
    let val = match objective.eval(y_bar) {
        Some(v) => v,
        None => return pre("the objective must be finite at the reference output"),
    };
    let fiber_eqs: Vec<(Vector, Scalar)> = map
        .iter()
        .zip(x_bar.iter().zip(offset))
        .map(|(row, (xi, bi))| (row.clone(), xi - bi))
        .collect();
    let fiber = Polyhedron::from_hrep(m, vec![], fiber_eqs.clone());
    let feasible = objective.epigraph().intersect(&fiber.product(&Polyhedron::full_space(1)));
    match lp::minimize(&feasible, &unit(m + 1, m)) {
        LpOutcome::Optimal { value, .. } if value == val => {}
        LpOutcome::Unbounded => return Err(RuleError::UnboundedBelow),
        _ => return pre("the reference output does not minimize over its fiber"),
    }

    // Left side: materialize the fiber minimum as a function of the input.
    let total = n + m + 1;
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    embed(&objective.epigraph(), total, &block(n, m + 1), &mut ineqs, &mut eqs);
    for (i, (row, bi)) in map.iter().zip(offset).enumerate() {
        let mut r = zeros(total);
        r[i] = one();
        for (j, c) in row.iter().enumerate() {
            r[n + j] = -c.clone();
        }
        eqs.push((r, bi.clone()));
    }
    let lifted = Polyhedron::from_hrep(total, ineqs, eqs);
    let mut keep = block(0, n);
    keep.push(n + m);
    let marginal = function_from_projection(&lifted, &keep)?;
    let lhs = marginal.subdifferential(x_bar);

    // Right side: adjoint preimage of the subdifferential at the
    // reference output.
    let rhs = objective.subdifferential(y_bar).linear_preimage(&transpose(map));

    let assumptions = vec![
        "reference output verified as a fiber minimizer".to_string(),
        "qualification holds automatically: the mapping graph is an affine subspace".to_string(),
    ];
    Ok(equality_gated("affine-preimage", u(lhs), u(rhs), QcStatus::NotApplicable, assumptions))
}

/// Subdifferential of the infimal convolution at a point where the
/// infimum is attained: the intersection of the summands' subdifferentials
/// at any optimal split.
pub fn inf_convolution_rule(
    f1: &ConvexPL,
    f2: &ConvexPL,
    x_bar: &[Scalar],
) -> Result<RuleReport, RuleError> {
    if f1.dim() != f2.dim() || x_bar.len() != f1.dim() {
        return pre("summands and reference dimensions disagree");
    }
    let d = f1.dim();
    let total = 2 * d + 2;
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    embed(&f1.epigraph(), total, &block(0, d + 1), &mut ineqs, &mut eqs);
    embed(&f2.epigraph(), total, &block(d + 1, d + 1), &mut ineqs, &mut eqs);
    let joint = Polyhedron::from_hrep(total, ineqs.clone(), eqs.clone());
    for j in 0..d {
        let mut row = zeros(total);
        row[j] = one();
        row[d + 1 + j] = one();
        eqs.push((row, x_bar[j].clone()));
    }
    let split = Polyhedron::from_hrep(total, ineqs, eqs);
    let mut cost = zeros(total);
    cost[d] = one();
    cost[2 * d + 1] = one();
    let (x1, x2) = match lp::minimize(&split, &cost) {
        LpOutcome::Infeasible => {
            return pre("the reference point is outside the domain of the convolution")
        }
        LpOutcome::Unbounded => return Err(RuleError::UnboundedBelow),
        LpOutcome::Optimal { point, .. } => {
            (point[..d].to_vec(), point[d + 1..2 * d + 1].to_vec())
        }
    };

    // Left side: the convolution's epigraph is the image of the joint
    // epigraph under the pairwise sum of points and heights.
    let mut image: Vec<Vector> = Vec::with_capacity(d + 1);
    for j in 0..d {
        let mut row = zeros(total);
        row[j] = one();
        row[d + 1 + j] = one();
        image.push(row);
    }
    image.push(cost);
    let epi = joint.linear_image(&image);
    let conv = ConvexPL::from_epigraph(&epi).map_err(|e| match e {
        PlError::UnboundedBelow => RuleError::UnboundedBelow,
        other => RuleError::Function(other),
    })?;
    let lhs = conv.subdifferential(x_bar);

    let rhs = f1.subdifferential(&x1).intersect(&f2.subdifferential(&x2));

    let assumptions = vec![
        format!("optimal split at {} and {}", fmt_vec(&x1), fmt_vec(&x2)),
        "qualification holds automatically: the split map is a surjective linear image"
            .to_string(),
    ];
    Ok(equality_gated("inf-convolution", u(lhs), u(rhs), QcStatus::NotApplicable, assumptions))
}

// ----- convexified (Clarke) rules -----

/// Sum rule for convexified coderivatives: the coderivative of `F1 + F2`
/// at a split reference point is contained in the sum of the summands'
/// coderivatives, provided the zero-coderivative cones overlap only at
/// zero and the split map is inner semicontinuous.
pub fn clarke_coderivative_sum_rule(
    f1: &PolyMapping,
    f2: &PolyMapping,
    x_bar: &[Scalar],
    y1_bar: &[Scalar],
    y2_bar: &[Scalar],
    y_star: &[Scalar],
    assume_isc: bool,
) -> Result<RuleReport, RuleError> {
    if f1.dim_in() != f2.dim_in() || f1.dim_out() != f2.dim_out() {
        return pre("the two mappings must share input and output spaces");
    }
    let m = f1.dim_out();
    if y_star.len() != m {
        return pre("the coderivative argument must live in the output space");
    }
    if !f1.graph_contains(x_bar, y1_bar) || !f2.graph_contains(x_bar, y2_bar) {
        return pre("the split reference points must lie on the graphs");
    }
    let y_bar = add(y1_bar, y2_bar);

    let mut assumptions = Vec::new();
    let isc_ok = isc_gate(sum_isc_hint(f1, f2, x_bar, &y_bar), assume_isc, &mut assumptions);

    let k1 = f1.clarke_coderivative(x_bar, y1_bar, &zeros(m));
    let k2 = f2.clarke_coderivative(x_bar, y2_bar, &zeros(m));
    let qc = only_zero(&k1.intersect(&negate_poly(&k2)));

    let lhs = f1.sum(f2).clarke_coderivative(x_bar, &y_bar, y_star);
    let rhs = f1
        .clarke_coderivative(x_bar, y1_bar, y_star)
        .minkowski_sum(&f2.clarke_coderivative(x_bar, y2_bar, y_star));

    Ok(inclusion_gated(
        "coderivative-sum",
        u(lhs),
        u(rhs),
        qc,
        Relation::LhsWithinRhs,
        isc_ok,
        assumptions,
    ))
}

/// The "only zero in common with the negation" condition on convexified
/// normal cones of two set unions at a shared point.
pub fn qc_normal_intersection(o1: &PolyUnion, o2: &PolyUnion, x: &[Scalar]) -> QcStatus {
    let n1 = clarke_normal_union(o1, x);
    let n2 = clarke_normal_union(o2, x);
    only_zero(n1.intersect(&n2.negate()).as_poly())
}

/// Does some convexified tangent direction of the first union lie in the
/// interior of the second union's tangent cone? Decided exactly: the
/// interior is nonempty only for a full-dimensional cone, and strict
/// membership is a slack maximization.
pub fn qc_tangent_intersection(o1: &PolyUnion, o2: &PolyUnion, x: &[Scalar]) -> QcStatus {
    let dim = o1.dim();
    let t1 = clarke_tangent_union(o1, x);
    let t2 = clarke_tangent_union(o2, x);
    if !t2.as_poly().is_full_dimensional() {
        return QcStatus::Violated(None);
    }
    let total = dim + 1;
    let mut ineqs = Vec::new();
    let mut eqs = Vec::new();
    embed(t1.as_poly(), total, &block(0, dim), &mut ineqs, &mut eqs);
    for (a, _) in t2.as_poly().ineqs() {
        let mut row = a.clone();
        row.push(one());
        ineqs.push((row, zero()));
    }
    ineqs.push((unit(total, dim), one()));
    let feasible = Polyhedron::from_hrep(total, ineqs, eqs);
    match lp::maximize(&feasible, &unit(total, dim)) {
        LpOutcome::Optimal { value, .. } if value.is_positive() => QcStatus::Satisfied,
        _ => QcStatus::Violated(None),
    }
}

/// Intersection rule for convexified normal cones: the normal cone of the
/// intersection is contained in the sum of the normal cones. The tangent
/// overlap condition is also evaluated and recorded; it implies the
/// normal-cone condition, and the report flags the (impossible) reverse
/// situation as a refutation.
pub fn clarke_intersection_rule(
    o1: &PolyUnion,
    o2: &PolyUnion,
    x_bar: &[Scalar],
) -> Result<RuleReport, RuleError> {
    if o1.dim() != o2.dim() || x_bar.len() != o1.dim() {
        return pre("the two sets and the point must share one space");
    }
    if !o1.contains(x_bar) || !o2.contains(x_bar) {
        return pre("the reference point must lie in both sets");
    }
    let qc = qc_normal_intersection(o1, o2, x_bar);
    let qct = qc_tangent_intersection(o1, o2, x_bar);
    let lhs = clarke_normal_union(&o1.intersect(o2), x_bar);
    let rhs =
        clarke_normal_union(o1, x_bar).minkowski_sum(&clarke_normal_union(o2, x_bar));
    let mut assumptions = vec![format!(
        "tangent overlap condition: {}",
        if qct.satisfied() { "satisfied" } else { "not satisfied" }
    )];
    if qct.satisfied() && !qc.satisfied() {
        // Tangent overlap implies the normal condition; reaching this arm
        // would falsify that implication.
        let w = match &qc {
            QcStatus::Violated(Some(w)) => w.clone(),
            _ => zeros(o1.dim()),
        };
        assumptions.push("tangent overlap holds but the normal condition fails".to_string());
        return Ok(RuleReport {
            rule_id: "normal-intersection",
            lhs: u(lhs.as_poly().clone()),
            rhs: u(rhs.as_poly().clone()),
            qc,
            relation: Relation::LhsWithinRhs,
            verdict: Verdict::Refuted(w),
            assumptions,
        });
    }
    Ok(inclusion_gated(
        "normal-intersection",
        u(lhs.as_poly().clone()),
        u(rhs.as_poly().clone()),
        qc,
        Relation::LhsWithinRhs,
        true,
        assumptions,
    ))
}

/// Sum rule for convexified subdifferentials: the subdifferential of the
/// sum is contained in the sum of subdifferentials when zero-sum horizon
/// selections vanish; equality when every term is lower regular. The
/// horizon analogue of the inclusion is checked alongside.
pub fn clarke_subdifferential_sum_rule(
    terms: &[CellPL],
    x_bar: &[Scalar],
) -> Result<RuleReport, RuleError> {
    if terms.is_empty() {
        return pre("at least one summand is required");
    }
    let d = terms[0].dim();
    if terms.iter().any(|t| t.dim() != d) || x_bar.len() != d {
        return pre("summand dimensions disagree");
    }
    if terms.iter().any(|t| t.eval(x_bar).is_none()) {
        return pre("every summand must be finite at the reference point");
    }

    let mut total_fn = terms[0].clone();
    for t in &terms[1..] {
        total_fn = total_fn.sum(t)?;
    }
    let lhs = clarke_subdifferential(&total_fn, x_bar);
    let lhs_horizon = clarke_singular_subdifferential(&total_fn, x_bar);

    let subs: Vec<Polyhedron> = terms.iter().map(|t| clarke_subdifferential(t, x_bar)).collect();
    let sings: Vec<Cone> =
        terms.iter().map(|t| clarke_singular_subdifferential(t, x_bar)).collect();
    let rhs = subs
        .iter()
        .skip(1)
        .fold(subs[0].clone(), |acc, p| acc.minkowski_sum(p));
    let rhs_horizon = sings
        .iter()
        .skip(1)
        .fold(sings[0].clone(), |acc, c| acc.minkowski_sum(c));

    let qc = sum_zero_only(&sings);
    let all_regular = terms.iter().all(|t| is_lower_regular(t, x_bar));
    let relation = if all_regular { Relation::Equality } else { Relation::LhsWithinRhs };
    let mut assumptions = vec![if all_regular {
        "every summand is lower regular at the point: equality claimed".to_string()
    } else {
        "some summand is not lower regular at the point: inclusion claimed".to_string()
    }];

    let mut report = inclusion_gated(
        "subdifferential-sum",
        u(lhs),
        u(rhs),
        qc,
        relation,
        true,
        Vec::new(),
    );
    if matches!(report.verdict, Verdict::Confirmed) {
        match u(lhs_horizon.as_poly().clone())
            .subset_witness(&u(rhs_horizon.as_poly().clone()))
        {
            None => assumptions.push("horizon inclusion verified".to_string()),
            Some(w) => {
                assumptions.push("horizon inclusion fails".to_string());
                report.verdict = Verdict::Refuted(w);
            }
        }
    }
    assumptions.append(&mut report.assumptions);
    report.assumptions = assumptions;
    Ok(report)
}

/// Chain rule for convexified coderivatives of a composition
/// `outer ∘ inner`: coderivatives of the composition are contained in the
/// composition of coderivatives through an intermediate multiplier.
pub fn clarke_chain_rule(
    inner: &PolyMapping,
    outer: &PolyMapping,
    x_bar: &[Scalar],
    y_bar: &[Scalar],
    z_bar: &[Scalar],
    z_star: &[Scalar],
    assume_isc: bool,
) -> Result<RuleReport, RuleError> {
    if inner.dim_out() != outer.dim_in() {
        return pre("the mappings do not compose");
    }
    if !inner.graph_contains(x_bar, y_bar) || !outer.graph_contains(y_bar, z_bar) {
        return pre("the reference chain must lie on the graphs");
    }
    let dx = inner.dim_in();
    let dz = outer.dim_out();
    if z_star.len() != dz {
        return pre("the coderivative argument must live in the final output space");
    }

    let mut assumptions = Vec::new();
    let isc_ok = isc_gate(composition_isc_hint(inner, outer), assume_isc, &mut assumptions);

    let k_outer = outer.clarke_coderivative(y_bar, z_bar, &zeros(dz));
    let kernel = inner.clarke_coderivative_kernel(x_bar, y_bar);
    let qc = only_zero(&k_outer.intersect(kernel.as_poly()));

    let lhs = outer.compose_after(inner).clarke_coderivative(x_bar, z_bar, z_star);

    let n_inner = inner.clarke_normal_cone_at(x_bar, y_bar);
    let mid = outer.clarke_coderivative(y_bar, z_bar, z_star);
    let rhs = n_inner
        .as_poly()
        .intersect(&Polyhedron::full_space(dx).product(&negate_poly(&mid)))
        .project(&block(0, dx));

    Ok(inclusion_gated(
        "coderivative-chain",
        u(lhs),
        u(rhs),
        qc,
        Relation::LhsWithinRhs,
        isc_ok,
        assumptions,
    ))
}

/// Preimage rule: convexified normals of `{x : F(x) meets Ω}` are
/// contained in the convexified coderivative of `F` applied to the
/// limiting normals of `Ω`. The variant using convexified normals of `Ω`
/// as the argument is computed and recorded alongside.
pub fn clarke_preimage_rule(
    mapping: &PolyMapping,
    omega: &PolyUnion,
    x_bar: &[Scalar],
    y_bar: &[Scalar],
    assume_isc: bool,
) -> Result<RuleReport, RuleError> {
    if omega.dim() != mapping.dim_out() {
        return pre("the target set must live in the output space");
    }
    if !mapping.graph_contains(x_bar, y_bar) || !omega.contains(y_bar) {
        return pre("the reference pair must lie on the graph with output in the target set");
    }
    let dx = mapping.dim_in();

    let mut assumptions = Vec::new();
    let isc_ok = isc_gate(preimage_isc_hint(mapping), assume_isc, &mut assumptions);

    let cylinder = u(Polyhedron::full_space(dx)).product(omega);
    let preimage = mapping.graph().intersect(&cylinder).project(&block(0, dx));
    let lhs = clarke_normal_union(&preimage, x_bar);

    let ngraph = mapping.clarke_normal_cone_at(x_bar, y_bar);
    let push = |cone_poly: &Polyhedron| {
        ngraph
            .as_poly()
            .intersect(&Polyhedron::full_space(dx).product(&negate_poly(cone_poly)))
            .project(&block(0, dx))
    };
    let limiting: ConeUnion = limiting_normal_union(omega, y_bar);
    let rhs = PolyUnion::new(
        dx,
        limiting.parts().iter().map(|c| push(c.as_poly())).collect(),
    );

    let clarke_arg = clarke_normal_union(omega, y_bar);
    let rhs_clarke = push(clarke_arg.as_poly());
    assumptions.push(format!(
        "variant with convexified target normals: containment {}",
        if u(lhs.as_poly().clone()).is_subset(&u(rhs_clarke)) { "holds" } else { "fails" }
    ));

    let qc = only_zero(
        clarke_arg
            .intersect(&mapping.clarke_coderivative_kernel(x_bar, y_bar))
            .as_poly(),
    );

    Ok(inclusion_gated(
        "set-preimage",
        u(lhs.as_poly().clone()),
        rhs,
        qc,
        Relation::LhsWithinRhs,
        isc_ok,
        assumptions,
    ))
}

/// Convexified subdifferential of `outer(map · x + offset)`: contained in
/// the adjoint image of the outer convexified subdifferential; equality
/// when the outer function is lower regular at the image point. The
/// horizon analogue is checked alongside.
pub fn clarke_affine_composition_rule(
    outer: &CellPL,
    map: &[Vector],
    offset: &[Scalar],
    x_bar: &[Scalar],
) -> Result<RuleReport, RuleError> {
    let m = map.len();
    let n = x_bar.len();
    if outer.dim() != m || offset.len() != m || map.iter().any(|r| r.len() != n) {
        return pre("map, offset, and reference dimensions disagree");
    }
    let y_bar = add(&mat_vec(map, x_bar), offset);

    // Materialize the composition cell by cell.
    let mut cells = Vec::new();
    for (cell, piece) in outer.cells() {
        let pulled = cell.translate(&neg(offset)).linear_preimage(map);
        if pulled.is_empty() {
            continue;
        }
        cells.push((
            pulled,
            AffinePiece::new(mat_t_vec(map, &piece.gradient), piece.eval(offset)),
        ));
    }
    let composed = CellPL::new(n, cells)?;
    if composed.eval(x_bar).is_none() {
        return pre("the reference point is outside the composite domain");
    }
    let lhs = clarke_subdifferential(&composed, x_bar);
    let lhs_horizon = clarke_singular_subdifferential(&composed, x_bar);

    let adjoint = transpose(map);
    let rhs = clarke_subdifferential(outer, &y_bar).linear_image(&adjoint);
    let rhs_horizon = clarke_singular_subdifferential(outer, &y_bar)
        .as_poly()
        .linear_image(&adjoint);

    // Qualification: horizon outer subgradients in the adjoint kernel
    // must vanish.
    let kernel = Polyhedron::from_vrep(m, vec![zeros(m)], vec![], kernel_basis(&adjoint, m));
    let qc = only_zero(
        &clarke_singular_subdifferential(outer, &y_bar)
            .as_poly()
            .intersect(&kernel),
    );

    let regular = is_lower_regular(outer, &y_bar);
    let relation = if regular { Relation::Equality } else { Relation::LhsWithinRhs };
    let mut assumptions = vec![if regular {
        "outer function lower regular at the image point: equality claimed".to_string()
    } else {
        "outer function not lower regular at the image point: inclusion claimed".to_string()
    }];

    let mut report =
        inclusion_gated("affine-composition", u(lhs), u(rhs), qc, relation, true, Vec::new());
    if matches!(report.verdict, Verdict::Confirmed) {
        match u(lhs_horizon.as_poly().clone()).subset_witness(&u(rhs_horizon)) {
            None => assumptions.push("horizon inclusion verified".to_string()),
            Some(w) => {
                assumptions.push("horizon inclusion fails".to_string());
                report.verdict = Verdict::Refuted(w);
            }
        }
    }
    assumptions.append(&mut report.assumptions);
    report.assumptions = assumptions;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pl_functions::l1_norm;
    use crate::scalar::int;

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| int(x)).collect()
    }

    fn segment(a: i64, b: i64) -> Polyhedron {
        Polyhedron::from_vrep(1, vec![v(&[a]), v(&[b])], vec![], vec![])
    }

    fn neg_abs() -> CellPL {
        CellPL::new(
            1,
            vec![
                (
                    Polyhedron::from_hrep(1, vec![(v(&[-1]), zero())], vec![]),
                    AffinePiece::new(v(&[-1]), zero()),
                ),
                (
                    Polyhedron::from_hrep(1, vec![(v(&[1]), zero())], vec![]),
                    AffinePiece::new(v(&[1]), zero()),
                ),
            ],
        )
        .unwrap()
    }

    fn abs_cell() -> CellPL {
        CellPL::from_convex(&l1_norm(1))
    }

    #[test]
    fn marginal_of_epigraph_mapping_is_the_function() {
        // minimize y over y >= |x|
        let objective = ConvexPL::new(
            2,
            vec![AffinePiece::new(v(&[0, 1]), zero())],
            Polyhedron::full_space(2),
        )
        .unwrap();
        let inst = OptValueInstance::new(
            PolyMapping::from_epigraph_of(&l1_norm(1)),
            objective,
            v(&[0]),
            v(&[0]),
        )
        .unwrap();
        assert_eq!(marginal_value(&inst, &v(&[3])), Marginal::Finite(int(3)));
        assert_eq!(marginal_value(&inst, &v(&[-2])), Marginal::Finite(int(2)));
        assert!(marginal_convexity_check(&inst));

        let report = optimal_value_subdifferential(&inst).unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed(), "verdict: {:?}", report.verdict);
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));
    }

    #[test]
    fn marginal_handles_empty_and_unbounded_images() {
        // mapping with graph x >= 1 (empty image left of 1), objective y
        let graph = Polyhedron::from_hrep(
            2,
            vec![(v(&[-1, 0]), -one()), (v(&[0, -1]), zero())],
            vec![],
        );
        let objective = ConvexPL::new(
            2,
            vec![AffinePiece::new(v(&[0, 1]), zero())],
            Polyhedron::full_space(2),
        )
        .unwrap();
        let inst = OptValueInstance::new(
            PolyMapping::new(1, 1, PolyUnion::from_poly(graph)),
            objective.clone(),
            v(&[1]),
            v(&[0]),
        )
        .unwrap();
        assert_eq!(marginal_value(&inst, &v(&[0])), Marginal::PlusInfinity);

        let full = PolyMapping::constant(1, &Polyhedron::full_space(1));
        assert!(matches!(
            OptValueInstance::new(full, objective, v(&[0]), v(&[0])),
            Err(RuleError::UnboundedBelow)
        ));
    }

    #[test]
    fn optimal_value_for_sum_and_max_constructions() {
        let f = l1_norm(1);
        let sum = sum_as_optimal_value(&f, &f, &v(&[0])).unwrap();
        let report = optimal_value_subdifferential(&sum).unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-2, 2))));
        assert!(marginal_convexity_check(&sum));

        let id = ConvexPL::affine(v(&[1]), zero());
        let neg_id = ConvexPL::affine(v(&[-1]), zero());
        let max = max_as_optimal_value(&id, &neg_id, &v(&[0])).unwrap();
        let report = optimal_value_subdifferential(&max).unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));
        assert!(marginal_convexity_check(&max));
    }

    #[test]
    fn optimal_value_with_constant_full_mapping_recovers_the_objective() {
        // objective ignores y: mu = |x|
        let objective = l1_norm(1).precompose_affine(&[v(&[1, 0])], &v(&[0])).unwrap();
        let inst = OptValueInstance::new(
            PolyMapping::constant(1, &Polyhedron::full_space(1)),
            objective,
            v(&[0]),
            v(&[7]),
        )
        .unwrap();
        let report = optimal_value_subdifferential(&inst).unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));
    }

    #[test]
    fn optimal_value_qualification_failure_still_verifies_containment() {
        // objective: indicator of the closed upper halfplane in (x, y);
        // mapping: constantly {0}. The marginal function vanishes
        // identically but the objective carries vertical horizon
        // subgradients matched by the graph normals.
        let halfplane = Polyhedron::from_hrep(2, vec![(v(&[0, -1]), zero())], vec![]);
        let objective = ConvexPL::indicator(halfplane).unwrap();
        let inst = OptValueInstance::new(
            PolyMapping::constant(1, &Polyhedron::point(&v(&[0]))),
            objective,
            v(&[0]),
            v(&[0]),
        )
        .unwrap();
        let report = optimal_value_subdifferential(&inst).unwrap();
        assert!(matches!(report.qc, QcStatus::Violated(Some(_))));
        assert_eq!(report.relation, Relation::RhsWithinLhs);
        assert!(matches!(report.verdict, Verdict::Skipped(_)));
        // both sides are actually {0} here
        assert!(report.rhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[0])))));
    }

    #[test]
    fn scalar_chain_with_hinge_outer() {
        let f = l1_norm(1);
        let hinge = ConvexPL::max_of_linear(1, vec![v(&[0]), v(&[1])]).unwrap();
        let report = chain_rule_scalar(&f, &hinge, &v(&[0])).unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));

        // affine outer: 2t + 1
        let outer = ConvexPL::affine(v(&[2]), one());
        let report = chain_rule_scalar(&f, &outer, &v(&[0])).unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-2, 2))));

        // identity outer reproduces the subdifferential
        let id = ConvexPL::affine(v(&[1]), zero());
        let report = chain_rule_scalar(&f, &id, &v(&[0])).unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));

        // |t| outer is not monotone
        assert!(matches!(
            chain_rule_scalar(&f, &l1_norm(1), &v(&[0])),
            Err(RuleError::NotMonotone)
        ));
    }

    #[test]
    fn vector_chain_sum_and_max_instances() {
        let f = l1_norm(1);
        let add_outer = ConvexPL::affine(v(&[1, 1]), zero());
        let report = chain_rule_vector(&[f.clone(), f.clone()], &add_outer, &v(&[0])).unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed(), "verdict: {:?}", report.verdict);
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-2, 2))));

        let max_outer = ConvexPL::max_of_linear(2, vec![v(&[1, 0]), v(&[0, 1])]).unwrap();
        let id = ConvexPL::affine(v(&[1]), zero());
        let neg_id = ConvexPL::affine(v(&[-1]), zero());
        let report = chain_rule_vector(&[id, neg_id], &max_outer, &v(&[0])).unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));

        // single component with identity outer
        let id1 = ConvexPL::affine(v(&[1]), zero());
        let report = chain_rule_vector(&[f.clone()], &id1, &v(&[0])).unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));
    }

    #[test]
    fn constrained_marginal_matches_direct_computation() {
        // objective |x| + |y|, constraint R: slice at v = 0
        let objective = l1_norm(2);
        let report = constrained_marginal_rule(
            &objective,
            &Polyhedron::full_space(1),
            &v(&[0]),
            &v(&[0]),
        )
        .unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));

        // objective |x - y|, constraint {0}: marginal is |x|
        let diff = l1_norm(1).precompose_affine(&[v(&[1, -1])], &v(&[0])).unwrap();
        let report = constrained_marginal_rule(
            &diff,
            &Polyhedron::point(&v(&[0])),
            &v(&[0]),
            &v(&[0]),
        )
        .unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));

        // objective |x| + y over y >= 0: pins the stationarity sign. The
        // output-block subgradient is +1, whose negative is the downward
        // constraint normal.
        let slope = ConvexPL::new(
            2,
            vec![
                AffinePiece::new(v(&[1, 1]), zero()),
                AffinePiece::new(v(&[-1, 1]), zero()),
            ],
            Polyhedron::full_space(2),
        )
        .unwrap();
        let halfline = Polyhedron::from_hrep(1, vec![(v(&[-1]), zero())], vec![]);
        let report = constrained_marginal_rule(&slope, &halfline, &v(&[0]), &v(&[0])).unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed(), "verdict: {:?}", report.verdict);
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));
    }

    #[test]
    fn affine_preimage_identity_and_sum_fiber() {
        let f = l1_norm(2);
        let identity = vec![v(&[1, 0]), v(&[0, 1])];
        let report =
            affine_preimage_rule(&f, &identity, &v(&[0, 0]), &v(&[1, 1]), &v(&[1, 1])).unwrap();
        assert!(report.confirmed());
        assert!(report
            .lhs
            .set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[1, 1])))));

        // |y1| + 2|y2| minimized over y1 + y2 = x
        let weighted = l1_norm(1)
            .precompose_affine(&[v(&[1, 0])], &v(&[0]))
            .unwrap()
            .sum(
                &l1_norm(1)
                    .precompose_affine(&[v(&[0, 1])], &v(&[0]))
                    .unwrap()
                    .scale(&int(2)),
            )
            .unwrap();
        let report =
            affine_preimage_rule(&weighted, &[v(&[1, 1])], &v(&[0]), &v(&[1]), &v(&[1, 0]))
                .unwrap();
        assert!(report.confirmed(), "verdict: {:?}", report.verdict);
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[1])))));
    }

    #[test]
    fn inf_convolution_splits_and_intersects() {
        let f1 = l1_norm(1);
        let f2 = l1_norm(1).scale(&int(2));
        let report = inf_convolution_rule(&f1, &f2, &v(&[1])).unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[1])))));

        let report = inf_convolution_rule(&f1, &f1, &v(&[0])).unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));

        // convolution with a point indicator is the function itself
        let delta = ConvexPL::indicator(Polyhedron::point(&v(&[0]))).unwrap();
        let report = inf_convolution_rule(&f1, &delta, &v(&[1])).unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[1])))));
    }

    #[test]
    fn coderivative_sum_affine_and_nonconvex() {
        let a1 = PolyMapping::affine(&[v(&[1])], &v(&[0]));
        let a2 = PolyMapping::affine(&[v(&[2])], &v(&[0]));
        let report = clarke_coderivative_sum_rule(
            &a1,
            &a2,
            &v(&[0]),
            &v(&[0]),
            &v(&[0]),
            &v(&[1]),
            false,
        )
        .unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[3])))));

        // epigraphs of |x| and -|x|: the sum is the epigraph of zero and
        // the inclusion is strict.
        let up = PolyMapping::from_epigraph_of(&l1_norm(1));
        let down = PolyMapping::new(
            1,
            1,
            crate::normal_cones::epigraph_union(&neg_abs()),
        );
        let report = clarke_coderivative_sum_rule(
            &up,
            &down,
            &v(&[0]),
            &v(&[0]),
            &v(&[0]),
            &v(&[1]),
            false,
        )
        .unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed(), "verdict: {:?}", report.verdict);
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[0])))));
        assert!(report.rhs.set_equal(&PolyUnion::from_poly(segment(-2, 2))));

        // sum with the constant zero mapping changes nothing
        let zero_map = PolyMapping::constant(1, &Polyhedron::point(&v(&[0])));
        let report = clarke_coderivative_sum_rule(
            &up,
            &zero_map,
            &v(&[1]),
            &v(&[1]),
            &v(&[0]),
            &v(&[1]),
            false,
        )
        .unwrap();
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[1])))));
    }

    #[test]
    fn intersection_rule_and_tangent_condition() {
        // axis and plane in three dimensions: normal condition holds,
        // tangent overlap cannot (neither tangent cone has interior)
        let axis = PolyUnion::from_poly(Polyhedron::from_vrep(
            3,
            vec![v(&[0, 0, 0])],
            vec![],
            vec![v(&[0, 0, 1])],
        ));
        let plane = PolyUnion::from_poly(Polyhedron::from_vrep(
            3,
            vec![v(&[0, 0, 0])],
            vec![],
            vec![v(&[1, 0, 0]), v(&[0, 1, 0])],
        ));
        let origin = v(&[0, 0, 0]);
        assert!(qc_normal_intersection(&axis, &plane, &origin).satisfied());
        assert!(!qc_tangent_intersection(&axis, &plane, &origin).satisfied());
        let report = clarke_intersection_rule(&axis, &plane, &origin).unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed());
        assert!(report
            .lhs
            .set_equal(&PolyUnion::from_poly(Polyhedron::full_space(3))));

        // halfplane against itself: tangent overlap holds and the sum is exact
        let half = PolyUnion::from_poly(Polyhedron::from_hrep(
            2,
            vec![(v(&[0, 1]), zero())],
            vec![],
        ));
        let report = clarke_intersection_rule(&half, &half, &v(&[0, 0])).unwrap();
        assert!(report.confirmed());
        assert!(qc_tangent_intersection(&half, &half, &v(&[0, 0])).satisfied());

        // strict inclusion: epigraph of -|x| against a halfplane through
        // the origin with a tilted boundary
        let downward = crate::normal_cones::epigraph_union(&neg_abs());
        let tilted = PolyUnion::from_poly(Polyhedron::from_hrep(
            2,
            vec![(v(&[1, -2]), zero())],
            vec![],
        ));
        let report = clarke_intersection_rule(&downward, &tilted, &v(&[0, 0])).unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed());
        let strict = report.rhs.subset_witness(&report.lhs);
        assert!(strict.is_some(), "inclusion should be strict here");
    }

    #[test]
    fn subdifferential_sum_rule_equality_and_strictness() {
        // |x| + |x|: both convex, equality
        let report =
            clarke_subdifferential_sum_rule(&[abs_cell(), abs_cell()], &v(&[0])).unwrap();
        assert_eq!(report.relation, Relation::Equality);
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-2, 2))));

        // |x| + (-|x|): sum is zero, strict inclusion
        let report =
            clarke_subdifferential_sum_rule(&[abs_cell(), neg_abs()], &v(&[0])).unwrap();
        assert_eq!(report.relation, Relation::LhsWithinRhs);
        assert!(report.confirmed(), "verdict: {:?}", report.verdict);
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[0])))));
        assert!(report.rhs.set_equal(&PolyUnion::from_poly(segment(-2, 2))));

        // adding the zero function changes nothing
        let zero_fn = CellPL::new(
            1,
            vec![(Polyhedron::full_space(1), AffinePiece::new(v(&[0]), zero()))],
        )
        .unwrap();
        let report =
            clarke_subdifferential_sum_rule(&[abs_cell(), zero_fn], &v(&[0])).unwrap();
        assert_eq!(report.relation, Relation::Equality);
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-1, 1))));
    }

    #[test]
    fn coderivative_chain_affine_and_strict() {
        let g = PolyMapping::affine(&[v(&[2])], &v(&[0]));
        let f = PolyMapping::affine(&[v(&[3])], &v(&[0]));
        let report =
            clarke_chain_rule(&g, &f, &v(&[0]), &v(&[0]), &v(&[0]), &v(&[1]), false).unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[6])))));

        // cross-shaped inner graph composed with the constant {0}:
        // the composite is single-valued zero, the formula side is a line
        let x_axis = Polyhedron::from_vrep(2, vec![v(&[0, 0])], vec![], vec![v(&[1, 0])]);
        let y_axis = Polyhedron::from_vrep(2, vec![v(&[0, 0])], vec![], vec![v(&[0, 1])]);
        let cross = PolyMapping::new(1, 1, PolyUnion::new(2, vec![x_axis, y_axis]));
        let const_zero = PolyMapping::constant(1, &Polyhedron::point(&v(&[0])));
        let report = clarke_chain_rule(
            &cross,
            &const_zero,
            &v(&[0]),
            &v(&[0]),
            &v(&[0]),
            &v(&[1]),
            true,
        )
        .unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed(), "verdict: {:?}", report.verdict);
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[0])))));
        assert!(report.rhs.set_equal(&PolyUnion::from_poly(Polyhedron::full_space(1))));

        // without the assumption the verdict is withheld
        let report = clarke_chain_rule(
            &cross,
            &const_zero,
            &v(&[0]),
            &v(&[0]),
            &v(&[0]),
            &v(&[1]),
            false,
        )
        .unwrap();
        assert!(matches!(report.verdict, Verdict::Skipped(_)));
    }

    #[test]
    fn preimage_rule_halfline_and_strict() {
        // F(x) = 2x, target [0, inf): preimage [0, inf)
        let f = PolyMapping::affine(&[v(&[2])], &v(&[0]));
        let halfline = PolyUnion::from_poly(Polyhedron::from_hrep(
            1,
            vec![(v(&[-1]), zero())],
            vec![],
        ));
        let report = clarke_preimage_rule(&f, &halfline, &v(&[0]), &v(&[0]), false).unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed());
        let down = PolyUnion::from_poly(Polyhedron::from_vrep(
            1,
            vec![v(&[0])],
            vec![v(&[-1])],
            vec![],
        ));
        assert!(report.lhs.set_equal(&down));
        assert!(report.rhs.set_equal(&down));

        // cross graph against the full line: {0} strictly inside R
        let x_axis = Polyhedron::from_vrep(2, vec![v(&[0, 0])], vec![], vec![v(&[1, 0])]);
        let y_axis = Polyhedron::from_vrep(2, vec![v(&[0, 0])], vec![], vec![v(&[0, 1])]);
        let cross = PolyMapping::new(1, 1, PolyUnion::new(2, vec![x_axis, y_axis]));
        let full = PolyUnion::from_poly(Polyhedron::full_space(1));
        let report = clarke_preimage_rule(&cross, &full, &v(&[0]), &v(&[0]), true).unwrap();
        assert!(report.confirmed(), "verdict: {:?}", report.verdict);
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[0])))));
        assert!(report.rhs.set_equal(&PolyUnion::from_poly(Polyhedron::full_space(1))));
    }

    #[test]
    fn affine_composition_scaling_and_strict() {
        // -|y| after x -> 2x
        let report =
            clarke_affine_composition_rule(&neg_abs(), &[v(&[2])], &v(&[0]), &v(&[0])).unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed());
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(segment(-2, 2))));

        // identity map on a convex function: equality claimed and holds
        let report =
            clarke_affine_composition_rule(&abs_cell(), &[v(&[1])], &v(&[0]), &v(&[0])).unwrap();
        assert_eq!(report.relation, Relation::Equality);
        assert!(report.confirmed());

        // |y1| - |y2| pulled back along x -> (x, x): composite is zero
        let kinks = CellPL::new(
            2,
            vec![
                (
                    Polyhedron::from_hrep(
                        2,
                        vec![(v(&[-1, 0]), zero()), (v(&[0, -1]), zero())],
                        vec![],
                    ),
                    AffinePiece::new(v(&[1, -1]), zero()),
                ),
                (
                    Polyhedron::from_hrep(
                        2,
                        vec![(v(&[-1, 0]), zero()), (v(&[0, 1]), zero())],
                        vec![],
                    ),
                    AffinePiece::new(v(&[1, 1]), zero()),
                ),
                (
                    Polyhedron::from_hrep(
                        2,
                        vec![(v(&[1, 0]), zero()), (v(&[0, -1]), zero())],
                        vec![],
                    ),
                    AffinePiece::new(v(&[-1, -1]), zero()),
                ),
                (
                    Polyhedron::from_hrep(
                        2,
                        vec![(v(&[1, 0]), zero()), (v(&[0, 1]), zero())],
                        vec![],
                    ),
                    AffinePiece::new(v(&[-1, 1]), zero()),
                ),
            ],
        )
        .unwrap();
        let report =
            clarke_affine_composition_rule(&kinks, &[v(&[1]), v(&[1])], &v(&[0, 0]), &v(&[0]))
                .unwrap();
        assert!(report.qc.satisfied());
        assert!(report.confirmed(), "verdict: {:?}", report.verdict);
        assert!(report.lhs.set_equal(&PolyUnion::from_poly(Polyhedron::point(&v(&[0])))));
        assert!(report.rhs.set_equal(&PolyUnion::from_poly(segment(-2, 2))));
    }
}
