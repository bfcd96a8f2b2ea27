//! Derivations of A(n) and the maps that carve the four families out of
//! the full derivation algebra.
//!
//! A `CartanElement` is a tuple (f_1, ..., f_n) standing for the derivation
//! sum f_i d_i. The bracket below expands the commutator of monomial terms
//! directly; everything else (divergence, the D maps, the contact product)
//! is built from partial derivatives and truncated multiplication.

use crate::error::{Error, Result};
use crate::field::Prime;
use crate::multiindex::MultiIndex;
use crate::poly::TruncPoly;

/// Sign attached to the symplectic pairing: +1 on the first half of the
/// variables, -1 on the second half. `i` is 1-based, `two_m` the number of
/// paired variables.
#[inline]
pub fn sigma(i: usize, two_m: usize) -> i64 {
    debug_assert!(i >= 1 && i <= two_m);
    if i <= two_m / 2 {
        1
    } else {
        -1
    }
}

/// The index paired with i: i' = 2m + 1 - i.
#[inline]
pub fn paired(i: usize, two_m: usize) -> usize {
    two_m + 1 - i
}

/// A derivation of A(n), stored componentwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanElement {
    n: usize,
    p: Prime,
    coeffs: Vec<TruncPoly>,
}

impl CartanElement {
    pub fn zero(n: usize, p: Prime) -> CartanElement {
        CartanElement {
            n,
            p,
            coeffs: (0..n).map(|_| TruncPoly::zero(n, p)).collect(),
        }
    }

    pub fn from_coeffs(coeffs: Vec<TruncPoly>) -> CartanElement {
        assert!(!coeffs.is_empty());
        let n = coeffs.len();
        let p = coeffs[0].prime();
        for f in &coeffs {
            assert!(f.n() == n && f.prime() == p, "component ambient mismatch");
        }
        CartanElement { n, p, coeffs }
    }

    /// The monomial derivation c * x^alpha d_i.
    pub fn monomial_term(alpha: MultiIndex, i: usize, c: i64, n: usize, p: Prime) -> CartanElement {
        let mut el = CartanElement::zero(n, p);
        el.coeffs[i - 1] = TruncPoly::monomial(alpha, c, n, p);
        el
    }

    /// The coordinate derivation d_i.
    pub fn partial_op(i: usize, n: usize, p: Prime) -> CartanElement {
        CartanElement::monomial_term(MultiIndex::zero(n), i, 1, n, p)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn component(&self, i: usize) -> &TruncPoly {
        &self.coeffs[i - 1]
    }

    pub fn components(&self) -> &[TruncPoly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|f| f.is_zero())
    }

    pub fn add(&self, rhs: &CartanElement) -> CartanElement {
        self.check_ambient(rhs);
        CartanElement {
            n: self.n,
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &CartanElement) -> CartanElement {
        self.check_ambient(rhs);
        CartanElement {
            n: self.n,
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: i64) -> CartanElement {
        CartanElement {
            n: self.n,
            p: self.p,
            coeffs: self.coeffs.iter().map(|f| f.scale(c)).collect(),
        }
    }

    fn check_ambient(&self, rhs: &CartanElement) {
        assert!(
            self.n == rhs.n && self.p == rhs.p,
            "derivations over different ambients"
        );
    }

    /// Apply the derivation to a polynomial: sum f_i * d_i(g).
    pub fn apply(&self, g: &TruncPoly) -> TruncPoly {
        let mut out = TruncPoly::zero(self.n, self.p);
        for i in 1..=self.n {
            if self.coeffs[i - 1].is_zero() {
                continue;
            }
            out = out.add(&self.coeffs[i - 1].mul(&g.partial(i)));
        }
        out
    }

    /// Commutator of derivations, expanded termwise:
    /// [x^a d_i, x^b d_j] = b_i x^(a+b-e_i) d_j - a_j x^(a+b-e_j) d_i.
    pub fn bracket(&self, rhs: &CartanElement) -> CartanElement {
        self.check_ambient(rhs);
        let p = self.p.get();
        let mut out = CartanElement::zero(self.n, self.p);
        for i in 1..=self.n {
            for (alpha, ca) in self.coeffs[i - 1].terms() {
                for j in 1..=self.n {
                    for (beta, cb) in rhs.coeffs[j - 1].terms() {
                        let c = self.p.mul(ca, cb);
                        let bi = beta.get(i) as u64;
                        if bi != 0 {
                            if let Some(m) = alpha.add_sub_unit(beta, i, p) {
                                out.coeffs[j - 1].add_term(m, self.p.mul(c, bi));
                            }
                        }
                        let aj = alpha.get(j) as u64;
                        if aj != 0 {
                            if let Some(m) = alpha.add_sub_unit(beta, j, p) {
                                out.coeffs[i - 1].add_term(m, self.p.neg(self.p.mul(c, aj)));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// div(sum f_i d_i) = sum d_i(f_i); zero exactly on the special algebra
    /// directions.
    pub fn divergence(&self) -> TruncPoly {
        let mut out = TruncPoly::zero(self.n, self.p);
        for i in 1..=self.n {
            out = out.add(&self.coeffs[i - 1].partial(i));
        }
        out
    }

    /// Standard degree if homogeneous: |alpha| - 1 over all terms.
    pub fn standard_degree(&self) -> Option<i64> {
        let mut deg = None;
        for f in &self.coeffs {
            for (m, _) in f.terms() {
                let d = m.degree() - 1;
                match deg {
                    None => deg = Some(d),
                    Some(existing) if existing != d => return None,
                    _ => {}
                }
            }
        }
        deg
    }
}

impl std::fmt::Display for CartanElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in 1..=self.n {
            if self.coeffs[i - 1].is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})d{}", self.coeffs[i - 1], i)?;
        }
        Ok(())
    }
}

/// D_i(f) = f d_i, the maps generating the full derivation algebra.
pub fn d_i(f: &TruncPoly, i: usize) -> CartanElement {
    let n = f.n();
    let mut el = CartanElement::zero(n, f.prime());
    el.coeffs[i - 1] = f.clone();
    el
}

/// D_ij(f) = d_j(f) d_i - d_i(f) d_j; images have divergence zero.
pub fn d_ij(f: &TruncPoly, i: usize, j: usize) -> Result<CartanElement> {
    let n = f.n();
    if i == j || i < 1 || j < 1 || i > n || j > n {
        return Err(Error::InvalidParameters(format!(
            "distinct variable indices in 1..={n} required, got ({i}, {j})"
        )));
    }
    let mut el = CartanElement::zero(n, f.prime());
    el.coeffs[i - 1] = f.partial(j);
    el.coeffs[j - 1] = f.partial(i).scale(-1);
    Ok(el)
}

/// The Hamiltonian map: D_H(f) = sum sigma(i) d_i(f) d_{i'} on an even
/// number of variables.
pub fn d_h(f: &TruncPoly) -> Result<CartanElement> {
    let n = f.n();
    if n % 2 != 0 {
        return Err(Error::InvalidParameters(format!(
            "hamiltonian map needs an even number of variables, got {n}"
        )));
    }
    let mut el = CartanElement::zero(n, f.prime());
    for i in 1..=n {
        el.coeffs[paired(i, n) - 1] = f.partial(i).scale(sigma(i, n));
    }
    Ok(el)
}

/// Delta(f) = 2f - sum_{j<=2m} x_j d_j(f), the last component of the
/// contact map.
pub fn delta(f: &TruncPoly) -> Result<TruncPoly> {
    let n = f.n();
    if n % 2 == 0 {
        return Err(Error::InvalidParameters(format!(
            "contact ambient needs an odd number of variables, got {n}"
        )));
    }
    let mut out = f.scale(2);
    for j in 1..n {
        out = out.sub(&f.partial(j).mul_var(j));
    }
    Ok(out)
}

/// The contact map D_K on an odd number of variables 2m+1:
///   component i (i <= 2m):  x_i d_n(f) + sigma(i') d_{i'}(f)
///   component n:            Delta(f)
pub fn d_k(f: &TruncPoly) -> Result<CartanElement> {
    let n = f.n();
    if n % 2 == 0 {
        return Err(Error::InvalidParameters(format!(
            "contact map needs an odd number of variables, got {n}"
        )));
    }
    let two_m = n - 1;
    let mut el = CartanElement::zero(n, f.prime());
    let dn = f.partial(n);
    for i in 1..=two_m {
        let ip = paired(i, two_m);
        el.coeffs[i - 1] = dn.mul_var(i).add(&f.partial(ip).scale(sigma(ip, two_m)));
    }
    el.coeffs[n - 1] = delta(f)?;
    Ok(el)
}

/// Membership condition for the Hamiltonian family:
/// sigma(i) d_j(f_i) = sigma(j') d_{i'}(f_{j'}) for all i, j.
pub fn hamiltonian_condition(e: &CartanElement) -> bool {
    let n = e.n();
    if n % 2 != 0 {
        return false;
    }
    for i in 1..=n {
        for j in 1..=n {
            let lhs = e.component(i).partial(j).scale(sigma(i, n));
            let jp = paired(j, n);
            let ip = paired(i, n);
            let rhs = e.component(jp).partial(ip).scale(sigma(jp, n));
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// The contact product: <f, g> = Delta(f) d_n(g) - Delta(g) d_n(f)
/// + sum_{j<=2m} sigma(j) d_j(f) d_{j'}(g). It satisfies
/// [D_K(f), D_K(g)] = D_K(<f, g>).
pub fn contact_bracket(f: &TruncPoly, g: &TruncPoly) -> Result<TruncPoly> {
    let n = f.n();
    if n % 2 == 0 {
        return Err(Error::InvalidParameters(format!(
            "contact product needs an odd number of variables, got {n}"
        )));
    }
    assert!(f.n() == g.n() && f.prime() == g.prime(), "ambient mismatch");
    let two_m = n - 1;
    let mut out = delta(f)?.mul(&g.partial(n));
    out = out.sub(&delta(g)?.mul(&f.partial(n)));
    for j in 1..=two_m {
        let jp = paired(j, two_m);
        out = out.add(&f.partial(j).mul(&g.partial(jp)).scale(sigma(j, two_m)));
    }
    Ok(out)
}
