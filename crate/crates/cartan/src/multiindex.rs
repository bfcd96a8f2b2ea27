//! Exponent tuples for the truncated polynomial ring A(n).
//!
//! A multi-index holds exponents 0 <= a_i < p. `tau` is the all-(p-1)
//! tuple and `unit(j)` the j-th standard tuple. Monomials are ordered
//! graded-lexicographically: first by total degree, then by the exponent
//! tuple itself, which fixes a deterministic basis order everywhere.

use crate::error::{Error, Result};
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    /// The zero index (constant monomial) in n variables.
    pub fn zero(n: usize) -> MultiIndex {
        MultiIndex(vec![0; n])
    }

    /// Build from explicit exponents; every entry must be < p.
    pub fn new(exps: &[u8], p: u64) -> MultiIndex {
        assert!(
            exps.iter().all(|&e| (e as u64) < p),
            "exponent out of range for modulus {p}"
        );
        MultiIndex(exps.to_vec())
    }

    /// The j-th unit index (1-based j).
    pub fn unit(n: usize, j: usize) -> MultiIndex {
        assert!((1..=n).contains(&j), "variable index {j} out of range");
        let mut e = vec![0; n];
        e[j - 1] = 1;
        MultiIndex(e)
    }

    /// The top index (p-1, ..., p-1).
    pub fn tau(n: usize, p: u64) -> MultiIndex {
        MultiIndex(vec![(p - 1) as u8; n])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, j: usize) -> u8 {
        self.0[j - 1]
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Total degree |a|.
    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    /// Weighted degree sum(i * a_i), with variables numbered from 1.
    pub fn alternate_degree(&self) -> i64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &e)| (i as i64 + 1) * e as i64)
            .sum()
    }

    /// Contact degree |a| + a_n - 2; requires an odd number of variables.
    pub fn contact_degree(&self) -> Result<i64> {
        if self.0.len() % 2 == 0 {
            return Err(Error::InvalidParameters(format!(
                "contact degree needs an odd number of variables, got {}",
                self.0.len()
            )));
        }
        Ok(self.degree() + *self.0.last().unwrap() as i64 - 2)
    }

    /// Sum with another index; None when some exponent reaches p (truncation).
    pub fn checked_add(&self, rhs: &MultiIndex, p: u64) -> Option<MultiIndex> {
        debug_assert_eq!(self.0.len(), rhs.0.len());
        let mut out = Vec::with_capacity(self.0.len());
        for (&a, &b) in self.0.iter().zip(&rhs.0) {
            let s = a as u64 + b as u64;
            if s >= p {
                return None;
            }
            out.push(s as u8);
        }
        Some(MultiIndex(out))
    }

    /// The exponent vector self + rhs - e_j (1-based j); None when any
    /// final entry leaves [0, p). The intermediate sum may exceed p - 1 at
    /// position j itself, since the subtraction happens before truncation.
    pub fn add_sub_unit(&self, rhs: &MultiIndex, j: usize, p: u64) -> Option<MultiIndex> {
        debug_assert_eq!(self.0.len(), rhs.0.len());
        let mut out = Vec::with_capacity(self.0.len());
        for (k, (&a, &b)) in self.0.iter().zip(&rhs.0).enumerate() {
            let mut s = a as i64 + b as i64;
            if k + 1 == j {
                s -= 1;
            }
            if s < 0 || s >= p as i64 {
                return None;
            }
            out.push(s as u8);
        }
        Some(MultiIndex(out))
    }

    /// Add d to the j-th exponent (1-based); None if the result leaves [0, p).
    pub fn shift(&self, j: usize, d: i64, p: u64) -> Option<MultiIndex> {
        let mut out = self.0.clone();
        let v = out[j - 1] as i64 + d;
        if v < 0 || v >= p as i64 {
            return None;
        }
        out[j - 1] = v as u8;
        Some(MultiIndex(out))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &MultiIndex) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &MultiIndex) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

/// All multi-indices for A(n) in graded-lex order.
pub fn monomials(n: usize, p: u64) -> Vec<MultiIndex> {
    let mut all = Vec::with_capacity((p as usize).pow(n as u32));
    let mut cur = vec![0u8; n];
    loop {
        all.push(MultiIndex(cur.clone()));
        let mut i = n;
        loop {
            if i == 0 {
                let mut sorted = all;
                sorted.sort();
                return sorted;
            }
            i -= 1;
            if (cur[i] as u64) + 1 < p {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Monomials satisfying a degree predicate, in graded-lex order.
pub fn monomials_where<F: Fn(&MultiIndex) -> bool>(n: usize, p: u64, pred: F) -> Vec<MultiIndex> {
    monomials(n, p).into_iter().filter(|m| pred(m)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_and_tau() {
        let e2 = MultiIndex::unit(3, 2);
        assert_eq!(e2.exponents(), &[0, 1, 0]);
        let t = MultiIndex::tau(2, 5);
        assert_eq!(t.degree(), 8);
    }

    #[test]
    fn contact_degree_of_unit_last_variable() {
        // ||e_3|| in three variables: 1 + 1 - 2 = 0
        let e3 = MultiIndex::unit(3, 3);
        assert_eq!(e3.contact_degree().unwrap(), 0);
        // even variable count is rejected
        assert!(MultiIndex::unit(2, 1).contact_degree().is_err());
    }

    #[test]
    fn alternate_degree_example() {
        let m = MultiIndex::new(&[1, 2], 5);
        assert_eq!(m.alternate_degree(), 5);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(monomials(1, 5).len(), 5);
        // all 25 indices in A(2), p=5, except tau have degree < 2p-2
        let below_top = monomials_where(2, 5, |m| m.degree() < 8);
        assert_eq!(below_top.len(), 24);
        // the unique contact-degree -2 index in A(3) is zero
        let bottom = monomials_where(3, 5, |m| m.contact_degree().unwrap() == -2);
        assert_eq!(bottom, vec![MultiIndex::zero(3)]);
    }

    #[test]
    fn graded_lex_is_degree_then_tuple() {
        let ms = monomials(2, 5);
        assert_eq!(ms[0], MultiIndex::zero(2));
        assert_eq!(ms[1], MultiIndex::new(&[0, 1], 5));
        assert_eq!(ms[2], MultiIndex::new(&[1, 0], 5));
        assert_eq!(ms[3], MultiIndex::new(&[0, 2], 5));
        let mut sorted = ms.clone();
        sorted.sort();
        assert_eq!(ms, sorted);
    }

    #[test]
    fn truncating_addition() {
        let a = MultiIndex::new(&[4], 5);
        let b = MultiIndex::new(&[1], 5);
        assert!(a.checked_add(&b, 5).is_none());
        let c = MultiIndex::new(&[2], 5).checked_add(&b, 5).unwrap();
        assert_eq!(c.exponents(), &[3]);
    }
}
