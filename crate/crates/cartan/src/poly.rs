//! Sparse elements of the truncated polynomial ring A(n) = k[x]/(x_i^p).
//!
//! Terms are kept in a BTreeMap under graded-lex order, so iteration (and
//! therefore every downstream output) is deterministic. Zero coefficients
//! are never stored; the zero polynomial is the empty map and its degree
//! is reported as `None`.

use crate::field::Prime;
use crate::multiindex::MultiIndex;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncPoly {
    n: usize,
    p: Prime,
    terms: BTreeMap<MultiIndex, u64>,
}

impl TruncPoly {
    pub fn zero(n: usize, p: Prime) -> TruncPoly {
        TruncPoly {
            n,
            p,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: i64, n: usize, p: Prime) -> TruncPoly {
        let mut f = TruncPoly::zero(n, p);
        f.add_term(MultiIndex::zero(n), p.reduce(c));
        f
    }

    pub fn monomial(alpha: MultiIndex, c: i64, n: usize, p: Prime) -> TruncPoly {
        assert_eq!(alpha.len(), n, "index arity does not match ambient");
        let mut f = TruncPoly::zero(n, p);
        f.add_term(alpha, p.reduce(c));
        f
    }

    /// The variable x_j (1-based).
    pub fn var(j: usize, n: usize, p: Prime) -> TruncPoly {
        TruncPoly::monomial(MultiIndex::unit(n, j), 1, n, p)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, u64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> u64 {
        self.terms.get(alpha).copied().unwrap_or(0)
    }

    /// Total degree of the highest term; None for the zero polynomial.
    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Accumulate c * x^alpha, dropping the term if the sum cancels.
    pub fn add_term(&mut self, alpha: MultiIndex, c: u64) {
        let c = c % self.p.get();
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(alpha).or_insert(0);
        *entry = self.p.add(*entry, c);
        if *entry == 0 {
            // remove the cancelled key; find it back via retain on zero
            self.terms.retain(|_, v| *v != 0);
        }
    }

    fn same_ambient(&self, rhs: &TruncPoly) {
        assert!(
            self.n == rhs.n && self.p == rhs.p,
            "ambient mismatch: A({}) mod {} vs A({}) mod {}",
            self.n,
            self.p.get(),
            rhs.n,
            rhs.p.get()
        );
    }

    pub fn add(&self, rhs: &TruncPoly) -> TruncPoly {
        self.same_ambient(rhs);
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, rhs: &TruncPoly) -> TruncPoly {
        self.same_ambient(rhs);
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(m.clone(), self.p.neg(c));
        }
        out
    }

    pub fn scale(&self, c: i64) -> TruncPoly {
        let c = self.p.reduce(c);
        let mut out = TruncPoly::zero(self.n, self.p);
        if c == 0 {
            return out;
        }
        for (m, a) in self.terms() {
            out.add_term(m.clone(), self.p.mul(a, c));
        }
        out
    }

    /// Product in A(n); any term with an exponent reaching p truncates away.
    pub fn mul(&self, rhs: &TruncPoly) -> TruncPoly {
        self.same_ambient(rhs);
        let mut out = TruncPoly::zero(self.n, self.p);
        for (ma, ca) in self.terms() {
            for (mb, cb) in rhs.terms() {
                if let Some(m) = ma.checked_add(mb, self.p.get()) {
                    out.add_term(m, self.p.mul(ca, cb));
                }
            }
        }
        out
    }

    /// Partial derivative with respect to x_i (1-based).
    pub fn partial(&self, i: usize) -> TruncPoly {
        assert!((1..=self.n).contains(&i), "variable index {i} out of range");
        let mut out = TruncPoly::zero(self.n, self.p);
        for (m, c) in self.terms() {
            let e = m.get(i) as u64;
            if e == 0 {
                continue;
            }
            let lowered = m.shift(i, -1, self.p.get()).unwrap();
            out.add_term(lowered, self.p.mul(c, e));
        }
        out
    }

    /// Multiply by the variable x_j, truncating.
    pub fn mul_var(&self, j: usize) -> TruncPoly {
        let mut out = TruncPoly::zero(self.n, self.p);
        for (m, c) in self.terms() {
            if let Some(raised) = m.shift(j, 1, self.p.get()) {
                out.add_term(raised, c);
            }
        }
        out
    }
}

impl std::fmt::Display for TruncPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if m.is_zero() {
                write!(f, "{c}")?;
            } else if c == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{c}*{m}")?;
            }
        }
        Ok(())
    }
}
