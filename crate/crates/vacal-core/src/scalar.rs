//! Exact rational scalars.
//!
//! All geometry in this crate is computed over arbitrary-precision rationals;
//! nothing is ever rounded. `Scalar` is a re-export of `BigRational`, which
//! keeps values reduced with a positive denominator, so equality of scalars
//! is equality of the numbers they denote.

use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Scalar = BigRational;

/// Integer literal as a scalar.
pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

/// Ratio literal `p/q`. Panics on `q == 0`.
pub fn rat(p: i64, q: i64) -> Scalar {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// Parses "p/q" or a plain decimal integer such as "-3".
pub fn parse_scalar(s: &str) -> Result<Scalar, ScalarParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ScalarParseError(s.to_string()));
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let p: BigInt = num.parse().map_err(|_| ScalarParseError(s.to_string()))?;
    let q: BigInt = match den {
        Some(d) => d.parse().map_err(|_| ScalarParseError(s.to_string()))?,
        None => BigInt::one(),
    };
    if q.is_zero() {
        return Err(ScalarParseError(s.to_string()));
    }
    Ok(BigRational::new(p, q))
}

/// Renders a scalar as "p/q", or "p" when the denominator is one.
/// `parse_scalar(&format_scalar(x)) == x` for every scalar.
pub fn format_scalar(x: &Scalar) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact absolute value.
pub fn abs(x: &Scalar) -> Scalar {
    x.abs()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a rational literal: {0:?}")]
pub struct ScalarParseError(pub String);
