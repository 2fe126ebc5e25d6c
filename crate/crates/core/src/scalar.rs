//! Integer scalar abstraction shared by the stream model and the module sketch.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Signed integer type usable as a frequency value or modulus.
///
/// Implemented for the primitive signed integers and for `BigInt`. Every
/// operation in this crate that touches frequencies is written against this
/// trait, so the same code runs on `i64` for speed and on `BigInt` when
/// intermediate values may overflow a machine word.
pub trait Scalar:
    Integer
    + Signed
    + Clone
    + Debug
    + Display
    + Hash
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    fn lift(v: i64) -> Self {
        <Self as FromPrimitive>::from_i64(v).expect("i64 fits every scalar type")
    }

    /// Number of bits needed to write values in `[0, self)`; zero for moduli <= 1.
    fn ceil_log2(&self) -> u32 {
        if *self <= Self::one() {
            return 0;
        }
        let mut bits = 0u32;
        let mut reach = Self::one();
        let two = Self::one() + Self::one();
        while reach < *self {
            reach = reach * two.clone();
            bits += 1;
        }
        bits
    }
}

impl<T> Scalar for T where
    T: Integer
        + Signed
        + Clone
        + Debug
        + Display
        + Hash
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Bits to index `count` distinct values.
pub fn bits_for(count: u64) -> u32 {
    if count <= 1 {
        0
    } else {
        64 - (count - 1).leading_zeros()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn ceil_log2_matches_bits_for() {
        for a in 0i64..300 {
            assert_eq!(a.ceil_log2(), bits_for(a.max(0) as u64), "a = {a}");
            assert_eq!(BigInt::from(a).ceil_log2(), bits_for(a.max(0) as u64));
        }
    }
}
