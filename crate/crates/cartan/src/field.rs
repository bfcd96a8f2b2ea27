//! Exact arithmetic in the prime field GF(p), p > 3.
//!
//! All computations in this crate run over the prime subfield: every
//! structure constant and every witness below has coefficients there, so
//! nothing is lost by never extending the field, and every result is exact.

use crate::error::{Error, Result};
use std::fmt;

/// A validated prime modulus p > 3.
///
/// Carries the raw-residue helpers used throughout the crate; `FieldElem`
/// is the boxed form for API surfaces that want a self-describing scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Prime> {
        if p > 3 && is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(Error::InvalidPrime(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn reduce(self, a: i64) -> u64 {
        a.rem_euclid(self.0 as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        // p < 2^31 in all supported uses; the product fits u64.
        (a * b) % self.0
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(self, a: u64) -> Result<u64> {
        if a % self.0 == 0 {
            return Err(Error::ZeroInversion(self.0));
        }
        Ok(self.pow(a, self.0 - 2))
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A residue modulo a prime p > 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    prime: Prime,
}

impl FieldElem {
    pub fn new(value: i64, prime: Prime) -> FieldElem {
        FieldElem {
            value: prime.reduce(value),
            prime,
        }
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.value
    }

    #[inline]
    pub fn prime(self) -> Prime {
        self.prime
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<FieldElem> {
        Ok(FieldElem {
            value: self.prime.inv(self.value)?,
            prime: self.prime,
        })
    }

    pub fn pow(self, exp: u64) -> FieldElem {
        FieldElem {
            value: self.prime.pow(self.value, exp),
            prime: self.prime,
        }
    }

    #[inline]
    fn same(self, rhs: FieldElem) -> Prime {
        assert_eq!(self.prime, rhs.prime, "field elements with different moduli");
        self.prime
    }
}

impl std::ops::Add for FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: FieldElem) -> FieldElem {
        let p = self.same(rhs);
        FieldElem {
            value: p.add(self.value, rhs.value),
            prime: p,
        }
    }
}

impl std::ops::Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: FieldElem) -> FieldElem {
        let p = self.same(rhs);
        FieldElem {
            value: p.sub(self.value, rhs.value),
            prime: p,
        }
    }
}

impl std::ops::Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: FieldElem) -> FieldElem {
        let p = self.same(rhs);
        FieldElem {
            value: p.mul(self.value, rhs.value),
            prime: p,
        }
    }
}

impl std::ops::Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem {
            value: self.prime.neg(self.value),
            prime: self.prime,
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p5() -> Prime {
        Prime::new(5).unwrap()
    }

    #[test]
    fn rejects_non_primes_and_small_primes() {
        assert!(Prime::new(4).is_err());
        assert!(Prime::new(3).is_err());
        assert!(Prime::new(2).is_err());
        assert!(Prime::new(9).is_err());
        assert!(Prime::new(5).is_ok());
        assert!(Prime::new(7).is_ok());
    }

    #[test]
    fn inverse_of_two_mod_five_is_three() {
        let two = FieldElem::new(2, p5());
        assert_eq!(two.inv().unwrap().value(), 3);
    }

    #[test]
    fn addition_reduces() {
        let a = FieldElem::new(4, p5());
        let b = FieldElem::new(3, p5());
        assert_eq!((a + b).value(), 2);
    }

    #[test]
    fn zeroth_power_is_one() {
        let p7 = Prime::new(7).unwrap();
        assert_eq!(FieldElem::new(2, p7).pow(0).value(), 1);
    }

    #[test]
    fn zero_inversion_is_an_error() {
        let zero = FieldElem::new(0, p5());
        assert!(matches!(zero.inv(), Err(Error::ZeroInversion(5))));
    }

    #[test]
    fn negative_values_reduce_into_range() {
        assert_eq!(FieldElem::new(-1, p5()).value(), 4);
        assert_eq!(FieldElem::new(-10, p5()).value(), 0);
    }
}
