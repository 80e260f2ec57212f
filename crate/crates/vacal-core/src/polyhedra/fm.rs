//! Fourier-Motzkin projection, kept as an independent route to the same
//! answer the generator-based `Polyhedron::project` produces. The two share
//! no code below the row representation, which makes agreement between them
//! a meaningful check rather than a tautology.

use super::Polyhedron;
use crate::linalg::Vector;
use crate::scalar::Scalar;
use num_traits::Zero;

type Row = (Vector, Scalar);

/// Projects onto the coordinates in `keep` (strictly increasing), by
/// eliminating the complementary coordinates one at a time from the row
/// description. No redundancy removal is attempted along the way; the
/// result is canonicalized by the final constructor call.
pub fn project(p: &Polyhedron, keep: &[usize]) -> Polyhedron {
    assert!(keep.windows(2).all(|w| w[0] < w[1]), "keep must be strictly increasing");
    assert!(keep.iter().all(|&i| i < p.dim()), "projection index out of range");
    if p.is_empty() {
        return Polyhedron::empty(keep.len());
    }
    let mut ineqs: Vec<Row> = p.ineqs().to_vec();
    let mut eqs: Vec<Row> = p.eqs().to_vec();
    let drop: Vec<usize> =
        (0..p.dim()).filter(|i| !keep.contains(i)).rev().collect();
    for j in drop {
        let (ni, ne) = eliminate(&ineqs, &eqs, j);
        ineqs = ni;
        eqs = ne;
    }
    Polyhedron::from_hrep(keep.len(), ineqs, eqs)
}

/// Removes coordinate `j`: by pivoting on an equality that involves it when
/// one exists, otherwise by combining opposite-sign inequality pairs.
fn eliminate(ineqs: &[Row], eqs: &[Row], j: usize) -> (Vec<Row>, Vec<Row>) {
    let strip = |(a, b): &Row| -> Row {
        let mut v = a[..j].to_vec();
        v.extend(a[j + 1..].iter().cloned());
        (v, b.clone())
    };
    if let Some(pivot) = eqs.iter().position(|(a, _)| !a[j].is_zero()) {
        let (pa, pb) = &eqs[pivot];
        let reduce = |(a, b): &Row| -> Row {
            let f = &a[j] / &pa[j];
            let row: Vector = a.iter().zip(pa).map(|(x, y)| x - &f * y).collect();
            (row, b - &f * pb)
        };
        let ni = ineqs.iter().map(|r| strip(&reduce(r))).collect();
        let ne = eqs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pivot)
            .map(|(_, r)| strip(&reduce(r)))
            .collect();
        return (ni, ne);
    }
    let mut out = Vec::new();
    let mut pos = Vec::new();
    let mut negs = Vec::new();
    for r in ineqs {
        match r.0[j].cmp(&Scalar::zero()) {
            std::cmp::Ordering::Equal => out.push(strip(r)),
            std::cmp::Ordering::Greater => pos.push(r),
            std::cmp::Ordering::Less => negs.push(r),
        }
    }
    for (pa, pb) in &pos {
        for (na, nb) in &negs {
            // coefficient of x_j cancels: (-n_j) * p + p_j * n
            let cp = -&na[j];
            let cn = pa[j].clone();
            let row: Vector = pa.iter().zip(na.iter()).map(|(x, y)| &cp * x + &cn * y).collect();
            let b = &cp * pb + &cn * nb;
            out.push(strip(&(row, b)));
        }
    }
    let ne = eqs.iter().map(strip).collect();
    (out, ne)
}
