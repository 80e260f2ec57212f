//! Linear optimization over a canonical polyhedron by generator enumeration.
//!
//! With both representations already computed, optimizing a linear
//! functional needs no pivoting: the problem is unbounded exactly when some
//! extreme ray improves the objective (or a lineality direction is not
//! orthogonal to it), and otherwise the minimum is attained at a vertex.
//! Ties break to the lexicographically smallest vertex, so results are
//! deterministic functions of the set, not of its construction history.

use super::Polyhedron;
use crate::linalg::{dot, lex_cmp, neg, Vector};
use crate::scalar::Scalar;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Scalar, point: Vector },
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Scalar> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

pub fn minimize(p: &Polyhedron, c: &[Scalar]) -> LpOutcome {
    assert_eq!(c.len(), p.dim(), "objective dimension mismatch");
    if p.is_empty() {
        return LpOutcome::Infeasible;
    }
    if p.lineality().iter().any(|l| !dot(c, l).is_zero())
        || p.rays().iter().any(|r| dot(c, r).is_negative())
    {
        return LpOutcome::Unbounded;
    }
    let mut best: Option<(Scalar, &Vector)> = None;
    for v in p.vertices() {
        let val = dot(c, v);
        let better = match &best {
            None => true,
            Some((bv, bp)) => match val.cmp(bv) {
                Ordering::Less => true,
                Ordering::Equal => lex_cmp(v, bp) == Ordering::Less,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some((val, v));
        }
    }
    let (value, point) = best.expect("nonempty polyhedron has a vertex");
    LpOutcome::Optimal { value, point: point.clone() }
}

pub fn maximize(p: &Polyhedron, c: &[Scalar]) -> LpOutcome {
    match minimize(p, &neg(c)) {
        LpOutcome::Optimal { value, point } => LpOutcome::Optimal { value: -value, point },
        other => other,
    }
}
