//! Exact calculus for polyhedral variational analysis.
//!
//! Everything here runs over arbitrary-precision rationals: polyhedra carry
//! canonical facet and generator forms, piecewise linear functions are exact
//! data, and the derived objects of nonsmooth analysis (normal cones in the
//! convex, regular, limiting, and Clarke senses, subdifferentials,
//! coderivatives) come out as polyhedral sets that can be compared for
//! equality, not merely approximated. On top of the set layer sit the
//! calculus rules for sums, compositions, intersections, images, and
//! marginal functions, each packaged with its qualification check and a
//! verdict comparing both sides. A sampling oracle provides definitional
//! cross-checks that share no code with the exact routes.

pub mod linalg;
pub mod scalar;

pub mod polyhedra;

pub mod pl_functions;

pub mod normal_cones;

pub mod mappings;

pub mod calculus_rules;

pub mod oracle;
