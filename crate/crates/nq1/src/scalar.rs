//! Exact rational scalars.
//!
//! Every coefficient in the kernel is a `Rat` (arbitrary-precision rational).
//! `num_rational::BigRational` already keeps values in lowest terms with a
//! positive denominator, which is exactly the canonical form we rely on for
//! structural equality.

use num_bigint::BigInt;
use num_rational::BigRational;

pub type Rat = BigRational;

/// Integer as a rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Fraction `n/d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical text form: `p` for integers, `p/q` otherwise.
pub fn render_rat(x: &Rat) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
