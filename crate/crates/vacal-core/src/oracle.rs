//! Definitional verifiers for the exact engines.
//!
//! Two kinds live here. `subgradient_membership_exact` is itself exact: it
//! certifies the global subgradient inequality with one linear program
//! over the epigraph, so agreement with a computed subdifferential is a
//! true biconditional. The samplers discretize limit definitions:
//! generalized directional derivatives as difference quotients over
//! shrinking shells, claimed normals as normalized inner products against
//! nearby set points, limiting cones as clouds of regular normals
//! collected at grid points. The samplers are one-sided by construction.
//! Difference quotients approach the exact slope from below (provided the
//! sampled neighborhood only meets cells anchored at the base point; radii
//! are configurable for data with structure farther out), the rejector
//! can refute a claimed normal but never certify one, and the cloud check
//! demands containment in, and coverage of, the exact cone. Every
//! quotient and inner product is computed in exact rationals; only the
//! limit process is truncated, so a disagreement is attributable to grid
//! resolution, never to rounding.

use crate::linalg::{dot, is_zero_vec, neg, sub, zeros, Vector};
use crate::normal_cones::{frechet_normal_union, limiting_normal_union, PolyUnion};
use crate::pl_functions::{CellPL, ConvexPL};
use crate::polyhedra::lp::{self, LpOutcome};
use crate::scalar::{one, rat, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("sampling supports dimension at most 3 (got {0})")]
    UnsupportedDimension(usize),
}

/// Shared sampling parameters. Radii shrink toward the base point, the
/// grid density counts points per axis of the sampling cube, and the
/// tolerance bounds every approximate comparison. The seed feeds the
/// candidate-vector generator so randomized checks replay exactly.
#[derive(Debug, Clone)]
pub struct SamplingConfig {
    pub radii: Vec<Scalar>,
    pub grid_density: usize,
    pub tolerance: Scalar,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            radii: vec![one(), rat(1, 4), rat(1, 16), rat(1, 64)],
            grid_density: 9,
            tolerance: rat(1, 1000),
            seed: 0x5eed,
        }
    }
}

impl SamplingConfig {
    fn assert_valid(&self) {
        assert!(!self.radii.is_empty(), "at least one sampling radius");
        assert!(self.radii[0] > crate::scalar::zero(), "radii must be positive");
        for w in self.radii.windows(2) {
            assert!(w[1] > crate::scalar::zero() && w[1] < w[0], "radii must strictly decrease");
        }
        assert!(self.tolerance > crate::scalar::zero(), "tolerance must be positive");
        assert!(self.grid_density >= 3, "grid needs at least the endpoints and center");
    }
}

/// Per-axis offsets of the sampling cube, spanning [-1, 1].
fn grid_offsets(density: usize) -> Vec<Scalar> {
    (0..density)
        .map(|k| rat(2 * k as i64, (density - 1) as i64) - one())
        .collect()
}

fn cube_points(dim: usize, density: usize) -> Vec<Vector> {
    let offsets = grid_offsets(density);
    let mut points: Vec<Vector> = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(points.len() * density);
        for p in &points {
            for o in &offsets {
                let mut q = p.clone();
                q.push(o.clone());
                next.push(q);
            }
        }
        points = next;
    }
    points
}

/// Deterministic pseudorandom candidate vectors with coordinates in
/// [-2, 2] on a 1/8 lattice, for membership biconditional checks.
pub fn sample_vectors(dim: usize, count: usize, cfg: &SamplingConfig) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rat(rng.gen_range(-16..=16), 8)).collect())
        .collect()
}

/// Exact decision of the global subgradient inequality
/// `⟨x*, x − x̄⟩ ≤ f(x) − f(x̄)` for all x: one linear program minimizing
/// `t − ⟨x*, x⟩` over the epigraph. No sampling is involved; the result
/// is a certificate, not an estimate.
pub fn subgradient_membership_exact(f: &ConvexPL, x_bar: &[Scalar], x_star: &[Scalar]) -> bool {
    let fx = f.eval(x_bar).expect("the reference value must be finite");
    assert_eq!(x_star.len(), f.dim(), "candidate dimension mismatch");
    let mut cost: Vector = x_star.iter().map(|c| -c.clone()).collect();
    cost.push(one());
    match lp::minimize(&f.epigraph(), &cost) {
        LpOutcome::Unbounded => false,
        LpOutcome::Infeasible => unreachable!("the domain contains the reference point"),
        LpOutcome::Optimal { value, .. } => value >= &fx - &dot(x_star, x_bar),
    }
}

/// Sampled estimate of the generalized directional slope
/// `limsup (f(x + tv) − f(x)) / t` for x near the base point and t small:
/// the running maximum of exact difference quotients over every shell of
/// base points and a ladder of step sizes. For piecewise linear data the
/// estimate never exceeds the exact value when the sampled region only
/// meets cells containing the base point, and it attains the exact value
/// once a grid point lands in the interior of a maximizing cell.
pub fn clarke_dirderiv_estimate(
    f: &CellPL,
    x_bar: &[Scalar],
    v: &[Scalar],
    cfg: &SamplingConfig,
) -> Scalar {
    cfg.assert_valid();
    let d = f.dim();
    assert_eq!(x_bar.len(), d, "base point dimension mismatch");
    assert_eq!(v.len(), d, "direction dimension mismatch");
    let mut best: Option<Scalar> = None;
    for r in &cfg.radii {
        for offset in cube_points(d, cfg.grid_density) {
            let x: Vector = x_bar
                .iter()
                .zip(&offset)
                .map(|(c, o)| c + &(r * o))
                .collect();
            let fx = f.eval(&x).expect("the function must be finite on the sampled region");
            for j in 1..=3u32 {
                let t = r * rat(1, 1 << j);
                let xt: Vector = x.iter().zip(v).map(|(c, vi)| c + &(&t * vi)).collect();
                let fxt =
                    f.eval(&xt).expect("the function must be finite on the sampled region");
                let q = (&fxt - &fx) / t;
                if best.as_ref().is_none_or(|b| q > *b) {
                    best = Some(q);
                }
            }
        }
    }
    best.expect("at least one sample")
}

/// Outcome of the normalized-inner-product test for a claimed regular
/// normal: either no persistent violation was sampled, or a witness point
/// of the set where the normalized product exceeds the tolerance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrechetCheck {
    Consistent,
    Rejected { witness: Vector },
}

/// One-sided refuter for a claimed regular normal at `x_bar`: samples set
/// points in the two smallest shells and reports a witness if
/// `⟨x*, x − x̄⟩ / ‖x − x̄‖` exceeds the tolerance in both. The 1-norm
/// keeps the comparison rational; it only rescales the threshold.
pub fn frechet_normal_reject(
    omega: &PolyUnion,
    x_bar: &[Scalar],
    x_star: &[Scalar],
    cfg: &SamplingConfig,
) -> FrechetCheck {
    cfg.assert_valid();
    assert!(omega.contains(x_bar), "the base point must lie in the set");
    let d = omega.dim();
    assert_eq!(x_star.len(), d, "candidate dimension mismatch");
    let smallest = &cfg.radii[cfg.radii.len().saturating_sub(2)..];
    let mut witnesses = Vec::new();
    for r in smallest {
        let mut found = None;
        for offset in cube_points(d, cfg.grid_density) {
            let x: Vector = x_bar
                .iter()
                .zip(&offset)
                .map(|(c, o)| c + &(r * o))
                .collect();
            if x == x_bar || !omega.contains(&x) {
                continue;
            }
            let step = sub(&x, x_bar);
            let gap = dot(x_star, &step);
            let norm1: Scalar = step.iter().map(crate::scalar::abs).sum();
            if gap > &cfg.tolerance * &norm1 {
                found = Some(x);
                break;
            }
        }
        witnesses.push(found);
    }
    match witnesses.pop() {
        Some(Some(w)) if witnesses.iter().all(|earlier| earlier.is_some()) => {
            FrechetCheck::Rejected { witness: w }
        }
        _ => FrechetCheck::Consistent,
    }
}

/// Cloud of regular-normal directions collected at grid points of the set
/// near the base point: for each sampled member point the exact regular
/// normal cone is computed and its generators (rays, lineality in both
/// signs) are pooled; a trivial cone contributes the zero vector. The
/// cloud discretizes the outer limit that defines the limiting cone, so
/// only the smallest shell is sampled: within it a polyhedral set looks
/// conical around the base point and every visible face is incident to
/// it, while wider shells would pick up normals of unrelated faces.
pub fn limiting_normal_sample(
    omega: &PolyUnion,
    x_bar: &[Scalar],
    cfg: &SamplingConfig,
) -> Result<Vec<Vector>, OracleError> {
    let d = omega.dim();
    if d > 3 {
        return Err(OracleError::UnsupportedDimension(d));
    }
    cfg.assert_valid();
    assert!(omega.contains(x_bar), "the base point must lie in the set");
    let r = cfg.radii.last().expect("validated nonempty");
    let mut points: BTreeSet<Vector> = BTreeSet::new();
    points.insert(x_bar.to_vec());
    for offset in cube_points(d, cfg.grid_density) {
        let x: Vector = x_bar
            .iter()
            .zip(&offset)
            .map(|(c, o)| c + &(r * o))
            .collect();
        if omega.contains(&x) {
            points.insert(x);
        }
    }
    let mut cloud: BTreeSet<Vector> = BTreeSet::new();
    for x in &points {
        let cone = frechet_normal_union(omega, x);
        let mut dirs: Vec<Vector> = cone.rays().to_vec();
        for l in cone.lineality() {
            dirs.push(l.clone());
            dirs.push(neg(l));
        }
        if dirs.is_empty() {
            cloud.insert(zeros(d));
        } else {
            cloud.extend(dirs);
        }
    }
    Ok(cloud.into_iter().collect())
}

/// Containment-and-coverage comparison of the sampled cloud against the
/// exact limiting cone: every cloud direction must lie in the exact
/// result, and every part of the exact result must be hit by a sampled
/// direction (the zero vector only counts for the trivial part).
pub fn limiting_sample_agrees(
    omega: &PolyUnion,
    x_bar: &[Scalar],
    cfg: &SamplingConfig,
) -> Result<bool, OracleError> {
    let cloud = limiting_normal_sample(omega, x_bar, cfg)?;
    let exact = limiting_normal_union(omega, x_bar);
    for dir in &cloud {
        if !exact.contains(dir) {
            return Ok(false);
        }
    }
    for part in exact.parts() {
        let hit = if part.is_zero() {
            cloud.iter().any(|c| is_zero_vec(c))
        } else {
            cloud.iter().any(|c| !is_zero_vec(c) && part.contains(c))
        };
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pl_functions::l1_norm;
    use crate::polyhedra::Polyhedron;
    use crate::scalar::{abs, int, zero};

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| int(x)).collect()
    }

    fn cross() -> PolyUnion {
        PolyUnion::new(
            2,
            vec![
                Polyhedron::from_vrep(2, vec![v(&[0, 0])], vec![], vec![v(&[1, 0])]),
                Polyhedron::from_vrep(2, vec![v(&[0, 0])], vec![], vec![v(&[0, 1])]),
            ],
        )
    }

    #[test]
    fn membership_matches_subdifferential_boundary() {
        let f = l1_norm(1);
        assert!(subgradient_membership_exact(&f, &v(&[0]), &v(&[1])));
        assert!(subgradient_membership_exact(&f, &v(&[0]), &v(&[-1])));
        assert!(!subgradient_membership_exact(&f, &v(&[0]), &v(&[2])));

        let halfline = Polyhedron::from_hrep(1, vec![(v(&[-1]), zero())], vec![]);
        let delta = ConvexPL::indicator(halfline).unwrap();
        assert!(subgradient_membership_exact(&delta, &v(&[0]), &v(&[-5])));
        assert!(!subgradient_membership_exact(&delta, &v(&[0]), &v(&[1])));
    }

    #[test]
    fn membership_biconditional_on_random_candidates() {
        let cfg = SamplingConfig::default();
        let f = l1_norm(2);
        let x_bar = v(&[0, 0]);
        let sub = f.subdifferential(&x_bar);
        for cand in sample_vectors(2, 25, &cfg) {
            assert_eq!(
                sub.contains(&cand),
                subgradient_membership_exact(&f, &x_bar, &cand),
                "candidate {cand:?}"
            );
        }
    }

    #[test]
    fn dirderiv_estimates_reach_exact_slopes() {
        let cfg = SamplingConfig::default();
        let down = CellPL::new(
            1,
            vec![
                (
                    Polyhedron::from_hrep(1, vec![(v(&[1]), zero())], vec![]),
                    crate::pl_functions::AffinePiece::new(v(&[1]), zero()),
                ),
                (
                    Polyhedron::from_hrep(1, vec![(v(&[-1]), zero())], vec![]),
                    crate::pl_functions::AffinePiece::new(v(&[-1]), zero()),
                ),
            ],
        )
        .unwrap();
        // -|x|: the exact generalized slope in direction 1 is max{-1, 1}
        let est = clarke_dirderiv_estimate(&down, &v(&[0]), &v(&[1]), &cfg);
        assert!(est <= int(1));
        assert!(abs(&(&est - &int(1))) <= cfg.tolerance);

        // affine pieces give the slope exactly at every sample
        let affine = CellPL::from_convex(&ConvexPL::affine(v(&[3]), int(7)));
        assert_eq!(clarke_dirderiv_estimate(&affine, &v(&[2]), &v(&[1]), &cfg), int(3));

        // convex corner: the estimate equals the directional derivative
        let up = CellPL::from_convex(&l1_norm(1));
        assert_eq!(clarke_dirderiv_estimate(&up, &v(&[0]), &v(&[1]), &cfg), int(1));
    }

    #[test]
    fn frechet_rejector_finds_cross_witness() {
        let cfg = SamplingConfig::default();
        let omega = cross();
        let origin = v(&[0, 0]);
        match frechet_normal_reject(&omega, &origin, &v(&[1, 0]), &cfg) {
            FrechetCheck::Rejected { witness } => {
                assert!(witness[0] > zero());
                assert_eq!(witness[1], zero());
            }
            FrechetCheck::Consistent => panic!("a positive-axis witness exists"),
        }
        assert_eq!(
            frechet_normal_reject(&omega, &origin, &v(&[0, 0]), &cfg),
            FrechetCheck::Consistent
        );

        // outward normal of a halfplane is never rejected
        let half = PolyUnion::from_poly(Polyhedron::from_hrep(
            2,
            vec![(v(&[0, 1]), zero())],
            vec![],
        ));
        assert_eq!(
            frechet_normal_reject(&half, &origin, &v(&[0, 1]), &cfg),
            FrechetCheck::Consistent
        );
    }

    #[test]
    fn limiting_cloud_containment_and_coverage() {
        let cfg = SamplingConfig::default();
        let origin = v(&[0, 0]);
        assert!(limiting_sample_agrees(&cross(), &origin, &cfg).unwrap());

        // convex corner: the cloud stays inside the convex normal cone
        let square = Polyhedron::from_vrep(
            2,
            vec![v(&[0, 0]), v(&[1, 0]), v(&[0, 1]), v(&[1, 1])],
            vec![],
            vec![],
        );
        let cloud =
            limiting_normal_sample(&PolyUnion::from_poly(square.clone()), &origin, &cfg).unwrap();
        let ncone = square.normal_cone_convex(&origin);
        assert!(cloud.iter().all(|d| ncone.contains(d)));
        assert!(limiting_sample_agrees(&PolyUnion::from_poly(square), &origin, &cfg).unwrap());

        // interior point: the cloud is just the zero vector
        let cloud = limiting_normal_sample(
            &PolyUnion::from_poly(Polyhedron::full_space(2)),
            &origin,
            &cfg,
        )
        .unwrap();
        assert_eq!(cloud, vec![v(&[0, 0])]);

        let high = PolyUnion::from_poly(Polyhedron::full_space(4));
        assert!(matches!(
            limiting_normal_sample(&high, &v(&[0, 0, 0, 0]), &cfg),
            Err(OracleError::UnsupportedDimension(4))
        ));
    }
}
