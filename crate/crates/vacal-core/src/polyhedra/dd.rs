//! Double description: exact conversion between the two cone representations.
//!
//! `cone_generators` turns a homogeneous inequality/equality system into the
//! minimal generator form (extreme rays plus a lineality basis), and by
//! polarity the same routine also converts generators back into facets. The
//! non-pointed case is reduced to the pointed one by splitting off the
//! lineality space first: the cone is rebuilt inside the row space of the
//! constraint matrix, where the standard ray-insertion loop with the
//! combinatorial adjacency test is valid.
//!
//! Output is canonical: extreme rays of a pointed cone are unique up to
//! positive scaling, lineality bases are reduced to RREF, and rays are
//! scaled primitive and sorted. Two inputs describing the same cone yield
//! identical output regardless of row order or redundancy.

use crate::linalg::{
    dot, is_zero_vec, kernel_basis, lex_cmp, primitive, primitive_signed, row_space_basis, Vector,
};
use num_traits::Zero;

/// Generators of a polyhedral cone: `cone(rays) + span(lineality)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeGens {
    pub rays: Vec<Vector>,
    pub lineality: Vec<Vector>,
}

/// Desk-scale guard: the insertion loop tracks active sets in a `u128`.
const MAX_ROWS: usize = 128;

/// Generator form of `{x : a·x <= 0 for a in ineqs, e·x = 0 for e in eqs}`.
///
/// Panics if the deduplicated row count exceeds `MAX_ROWS`; the geometry this
/// crate works with stays far below that.
pub fn cone_generators(dim: usize, ineqs: &[Vector], eqs: &[Vector]) -> ConeGens {
    // Equalities enter as opposite inequality pairs; the kernel computation
    // below recovers them exactly.
    let mut rows: Vec<Vector> = Vec::new();
    for a in ineqs {
        let p = primitive(a);
        if !is_zero_vec(&p) && !rows.contains(&p) {
            rows.push(p);
        }
    }
    for e in eqs {
        for a in [primitive(e), primitive(&crate::linalg::neg(e))] {
            if !is_zero_vec(&a) && !rows.contains(&a) {
                rows.push(a);
            }
        }
    }
    rows.sort_by(|a, b| lex_cmp(a, b));
    assert!(rows.len() <= MAX_ROWS, "constraint system too large for this engine");

    // Lineality is the kernel of the full row matrix; the pointed part lives
    // in the row space, for which RREF gives a canonical basis.
    let lineality = kernel_basis(&rows, dim)
        .iter()
        .map(|v| primitive_signed(v))
        .collect::<Vec<_>>();
    let basis = row_space_basis(&rows); // basis of lineality-complement, canonical
    let k = basis.len();
    if k == 0 {
        return sorted(ConeGens { rays: Vec::new(), lineality });
    }

    // Constraints expressed in the reduced coordinates u, where x = B^T u.
    let reduced: Vec<Vector> = rows
        .iter()
        .map(|a| basis.iter().map(|b| dot(a, b)).collect())
        .collect();
    let rays_u = pointed_cone_rays(k, &reduced);

    let rays = rays_u
        .iter()
        .map(|u| {
            let mut x = vec![crate::scalar::zero(); dim];
            for (ui, b) in u.iter().zip(&basis) {
                for (xj, bj) in x.iter_mut().zip(b) {
                    *xj += ui * bj;
                }
            }
            primitive(&x)
        })
        .collect();
    sorted(ConeGens { rays, lineality })
}

fn sorted(mut g: ConeGens) -> ConeGens {
    g.rays.sort_by(|a, b| lex_cmp(a, b));
    g.lineality.sort_by(|a, b| lex_cmp(a, b));
    g
}

/// Extreme rays of the pointed cone `{u in R^k : r·u <= 0 for r in rows}`.
/// Pointedness (rank of `rows` equal to `k`) is a precondition.
fn pointed_cone_rays(k: usize, rows: &[Vector]) -> Vec<Vector> {
    // Initial basis: k linearly independent rows, taken greedily in input
    // order. {R u <= 0} is generated by the columns of -R^{-1}.
    let mut chosen: Vec<usize> = Vec::new();
    let mut staged: Vec<Vector> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        staged.push(r.clone());
        if crate::linalg::rank(&staged) == staged.len() {
            chosen.push(i);
            if chosen.len() == k {
                break;
            }
        } else {
            staged.pop();
        }
    }
    debug_assert_eq!(chosen.len(), k, "cone not pointed in reduced coordinates");

    let rmat: Vec<Vector> = chosen.iter().map(|&i| rows[i].clone()).collect();
    let init_mask: u128 = chosen.iter().fold(0, |m, &i| m | (1 << i));
    let mut rays: Vec<Ray> = (0..k)
        .map(|j| {
            let mut e = vec![crate::scalar::zero(); k];
            e[j] = -crate::scalar::one();
            let dir = crate::linalg::solve_square(&rmat, &e).expect("initial basis invertible");
            Ray::new(primitive(&dir), rows, init_mask)
        })
        .collect();

    let mut processed: u128 = init_mask;
    for (i, row) in rows.iter().enumerate() {
        if chosen.contains(&i) {
            continue;
        }
        insert_row(&mut rays, rows, processed, i, row);
        processed |= 1 << i;
    }
    rays.into_iter().map(|r| r.dir).collect()
}

struct Ray {
    dir: Vector,
    /// Bitmask of rows satisfied with equality, over all rows seen so far.
    active: u128,
}

impl Ray {
    /// `over` is the bitmask of processed rows; the active set must be exact
    /// over these for the adjacency test to be sound.
    fn new(dir: Vector, rows: &[Vector], over: u128) -> Self {
        let mut active = 0;
        for (i, row) in rows.iter().enumerate() {
            if over & (1 << i) != 0 && dot(row, &dir).is_zero() {
                active |= 1 << i;
            }
        }
        Ray { dir, active }
    }
}

/// One double-description step: cut the current cone with `row`.
fn insert_row(rays: &mut Vec<Ray>, rows: &[Vector], processed: u128, idx: usize, row: &Vector) {
    let signs: Vec<std::cmp::Ordering> = rays
        .iter()
        .map(|r| dot(row, &r.dir).cmp(&crate::scalar::zero()))
        .collect();

    let mut fresh: Vec<Ray> = Vec::new();
    for (p, sp) in signs.iter().enumerate() {
        if *sp != std::cmp::Ordering::Greater {
            continue;
        }
        for (n, sn) in signs.iter().enumerate() {
            if *sn != std::cmp::Ordering::Less {
                continue;
            }
            // Combinatorial adjacency: no third extreme ray's active set
            // contains the common active set of the pair. Valid because the
            // cone is pointed and `rays` holds exactly its extreme rays.
            let common = rays[p].active & rays[n].active & processed;
            let adjacent = rays
                .iter()
                .enumerate()
                .all(|(j, r)| j == p || j == n || (common & !r.active) != 0);
            if !adjacent {
                continue;
            }
            let a = dot(row, &rays[p].dir); // > 0
            let b = dot(row, &rays[n].dir); // < 0
            let dir: Vector = rays[p]
                .dir
                .iter()
                .zip(&rays[n].dir)
                .map(|(pp, nn)| &a * nn - &b * pp)
                .collect();
            fresh.push(Ray::new(primitive(&dir), rows, processed | (1 << idx)));
        }
    }

    let mut kept: Vec<Ray> = Vec::new();
    for (r, s) in rays.drain(..).zip(signs) {
        match s {
            std::cmp::Ordering::Greater => {}
            std::cmp::Ordering::Equal => {
                let mut r = r;
                r.active |= 1 << idx;
                kept.push(r);
            }
            std::cmp::Ordering::Less => kept.push(r),
        }
    }
    kept.extend(fresh);
    *rays = kept;
}

/// Polar of a cone given by generators: `{y : r·y <= 0, l·y = 0}` in
/// generator form. Applying it twice returns the original closed cone, and
/// one application converts generators to the facet/equation form (the rays
/// of the polar are the facet normals, its lineality the equation normals).
pub fn polar_generators(dim: usize, gens: &ConeGens) -> ConeGens {
    cone_generators(dim, &gens.rays, &gens.lineality)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn orthant_round_trip() {
        // {x <= 0, y <= 0} in the plane: rays -e1, -e2.
        let g = cone_generators(2, &[v(&[1, 0]), v(&[0, 1])], &[]);
        assert_eq!(g.rays, vec![v(&[-1, 0]), v(&[0, -1])]);
        assert!(g.lineality.is_empty());
        let p = polar_generators(2, &g);
        // polar of the nonpositive orthant is the nonnegative orthant
        assert_eq!(p.rays, vec![v(&[0, 1]), v(&[1, 0])]);
        let pp = polar_generators(2, &p);
        assert_eq!(pp, g);
    }

    #[test]
    fn halfspace_has_lineality() {
        let g = cone_generators(2, &[v(&[1, 0])], &[]);
        assert_eq!(g.rays, vec![v(&[-1, 0])]);
        assert_eq!(g.lineality, vec![v(&[0, 1])]);
    }

    #[test]
    fn full_space_and_zero_cone() {
        let full = cone_generators(2, &[], &[]);
        assert!(full.rays.is_empty());
        assert_eq!(full.lineality.len(), 2);

        let zero = cone_generators(1, &[v(&[1]), v(&[-1])], &[]);
        assert!(zero.rays.is_empty());
        assert!(zero.lineality.is_empty());
    }

    #[test]
    fn equalities_cut_lineality() {
        // {x : x + y = 0, x <= 0} is the ray through (-1, 1).
        let g = cone_generators(2, &[v(&[1, 0])], &[v(&[1, 1])]);
        assert_eq!(g.rays, vec![v(&[-1, 1])]);
        assert!(g.lineality.is_empty());
    }

    #[test]
    fn redundant_rows_do_not_change_output() {
        let a = cone_generators(2, &[v(&[1, 0]), v(&[0, 1])], &[]);
        let b = cone_generators(
            2,
            &[v(&[1, 0]), v(&[0, 1]), v(&[1, 1]), v(&[2, 1]), v(&[1, 0])],
            &[],
        );
        assert_eq!(a, b);
    }

    #[test]
    fn ice_cream_like_cone_in_three_dimensions() {
        // {x <= z, -x <= z, y <= z, -y <= z} rewritten homogeneously:
        // four facets, four extreme rays.
        let rows = vec![v(&[1, 0, -1]), v(&[-1, 0, -1]), v(&[0, 1, -1]), v(&[0, -1, -1])];
        let g = cone_generators(3, &rows, &[]);
        assert_eq!(g.rays.len(), 4);
        assert!(g.lineality.is_empty());
        for r in &g.rays {
            for row in &rows {
                assert!(dot(row, r) <= crate::scalar::zero());
            }
        }
        // polarity is involutive here too
        let back = polar_generators(3, &polar_generators(3, &g));
        assert_eq!(back, g);
    }
}
