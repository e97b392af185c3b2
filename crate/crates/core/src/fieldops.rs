//! A runtime field-object abstraction so that elimination, rank, and kernel
//! code is written once and reused over F_p and extension fields F_q.

use crate::error::Result;
use crate::field::PrimeModulus;

pub trait FieldOps: Clone {
    type Elem: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    /// A short human-readable field description for error messages.
    fn describe(&self) -> String;
    /// Fields must match for cross-object operations.
    fn same_field(&self, other: &Self) -> bool;
}

impl FieldOps for PrimeModulus {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }

    #[inline]
    fn one(&self) -> u64 {
        1
    }

    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        PrimeModulus::add(self, *a, *b)
    }

    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        PrimeModulus::sub(self, *a, *b)
    }

    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        PrimeModulus::mul(self, *a, *b)
    }

    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        PrimeModulus::neg(self, *a)
    }

    fn inv(&self, a: &u64) -> Result<u64> {
        PrimeModulus::inv(self, *a)
    }

    fn describe(&self) -> String {
        format!("F_{}", self.p())
    }

    fn same_field(&self, other: &Self) -> bool {
        self.p() == other.p()
    }
}
