//! Dense exact linear algebra on rational vectors and matrices.
//!
//! Everything here is elementary Gaussian elimination, kept runnable at the
//! problem sizes this crate targets (dimensions in the single digits). The
//! payoff for hand-rolling is canonical output: reduced row echelon form is
//! unique per row space, which the polyhedral layer leans on to make every
//! representation it produces deterministic.

use crate::scalar::{zero, Scalar};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type Vector = Vec<Scalar>;
pub type Matrix = Vec<Vector>;

pub fn zeros(n: usize) -> Vector {
    vec![zero(); n]
}

pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = zeros(n);
    v[i] = Scalar::one();
    v
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn add(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(c: &Scalar, a: &[Scalar]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

pub fn neg(a: &[Scalar]) -> Vector {
    a.iter().map(|x| -x).collect()
}

pub fn is_zero_vec(a: &[Scalar]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// `m * v` for a row-major matrix.
pub fn mat_vec(m: &[Vector], v: &[Scalar]) -> Vector {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `m^T * v`; `m` is row-major with rows of length `v.len()`-independent width.
pub fn mat_t_vec(m: &[Vector], v: &[Scalar]) -> Vector {
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = zeros(cols);
    for (row, vi) in m.iter().zip(v) {
        for (o, rj) in out.iter_mut().zip(row) {
            *o += vi * rj;
        }
    }
    out
}

pub fn transpose(m: &[Vector]) -> Matrix {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Scales a nonzero vector to integer entries with gcd 1, preserving
/// direction. The result is the canonical representative of the open ray
/// through `a`. Zero vectors are returned unchanged.
pub fn primitive(a: &[Scalar]) -> Vector {
    if is_zero_vec(a) {
        return a.to_vec();
    }
    let mut lcm = BigInt::one();
    for x in a {
        lcm = num_integer::lcm(lcm, x.denom().clone());
    }
    let ints: Vec<BigInt> = a.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut g = BigInt::zero();
    for n in &ints {
        g = num_integer::gcd(g, n.abs());
    }
    ints.into_iter().map(|n| Scalar::from_integer(n / &g)).collect()
}

/// Canonical representative of the line through `a`: primitive, with the
/// first nonzero entry positive.
pub fn primitive_signed(a: &[Scalar]) -> Vector {
    let p = primitive(a);
    match p.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => neg(&p),
        _ => p,
    }
}

/// Lexicographic comparison, used for all deterministic orderings.
pub fn lex_cmp(a: &[Scalar], b: &[Scalar]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Reduced row echelon form computed in place; returns the pivot columns.
/// Zero rows are removed, so `m.len()` afterwards is the rank. RREF is
/// unique per row space, making this a canonicalizer for spans.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        m[r] = scale(&inv, &m[r]);
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                m[i] = sub(&m[i], &scale(&f, &m[r]));
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank(m: &[Vector]) -> usize {
    let mut c = m.to_vec();
    rref(&mut c);
    c.len()
}

/// Basis of `{x : m x = 0}`, one vector per free column of the RREF.
/// The basis is canonical given the row space of `m`.
pub fn kernel_basis(m: &[Vector], cols: usize) -> Vec<Vector> {
    let mut red = m.to_vec();
    let pivots = rref(&mut red);
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = zeros(cols);
        v[free] = Scalar::one();
        for (row, &pc) in red.iter().zip(&pivots) {
            v[pc] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Canonical basis of the row space of `m`: the nonzero rows of its RREF.
pub fn row_space_basis(m: &[Vector]) -> Vec<Vector> {
    let mut red = m.to_vec();
    rref(&mut red);
    red
}

/// Solves the square system `m x = b` when `m` is invertible.
pub fn solve_square(m: &[Vector], b: &[Scalar]) -> Option<Vector> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    Some(aug.iter().map(|row| row[n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn primitive_scaling() {
        assert_eq!(primitive(&[rat(1, 2), rat(1, 3)]), vec![int(3), int(2)]);
        assert_eq!(primitive(&[int(-4), int(6)]), vec![int(-2), int(3)]);
        assert_eq!(primitive_signed(&[int(0), int(-5)]), vec![int(0), int(1)]);
    }

    #[test]
    fn rref_canonical_for_equal_row_spaces() {
        let mut a = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        let mut b = vec![vec![int(3), int(6)]];
        rref(&mut a);
        rref(&mut b);
        assert_eq!(a, b);
    }

    #[test]
    fn kernel_of_plane_normal() {
        let m = vec![vec![int(1), int(1), int(0)]];
        let k = kernel_basis(&m, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(dot(&m[0], v).is_zero());
        }
    }

    #[test]
    fn solve_invertible() {
        let m = vec![vec![int(2), int(0)], vec![int(1), int(1)]];
        let x = solve_square(&m, &[int(4), int(5)]).unwrap();
        assert_eq!(x, vec![int(2), int(3)]);
        let sing = vec![vec![int(1), int(1)], vec![int(2), int(2)]];
        assert!(solve_square(&sing, &[int(1), int(1)]).is_none());
    }

    #[test]
    fn kernel_and_row_space_are_complementary() {
        let m = vec![
            vec![int(1), int(2), int(3), int(4)],
            vec![int(0), int(1), int(0), int(1)],
        ];
        let k = kernel_basis(&m, 4);
        let r = row_space_basis(&m);
        assert_eq!(k.len() + r.len(), 4);
        for kv in &k {
            for rv in &r {
                // rows annihilate the kernel by construction
                assert!(dot(rv, kv).is_zero());
            }
        }
    }
}
