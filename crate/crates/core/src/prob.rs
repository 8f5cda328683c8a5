//! Exact probabilities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Prob = BigRational;

pub fn ratio(num: i64, den: i64) -> Prob {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn one() -> Prob {
    Prob::one()
}

pub fn zero() -> Prob {
    Prob::zero()
}

/// True when `p` lies strictly between 0 and 1.
pub fn is_proper(p: &Prob) -> bool {
    p > &Prob::zero() && p < &Prob::one()
}

/// `num/den` in lowest terms.
pub fn format(p: &Prob) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

pub fn to_f64(p: &Prob) -> f64 {
    use num_traits::ToPrimitive;
    p.to_f64().unwrap_or(f64::NAN)
}
