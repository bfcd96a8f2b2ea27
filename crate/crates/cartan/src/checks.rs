//! Exhaustive and randomized verification sweeps over a built algebra:
//! antisymmetry, the Jacobi identity, grading compatibility, family
//! membership, restrictedness, the contact-product closed forms, and the
//! derivation intertwining identity.
//!
//! Each sweep returns (checked, failures); suites turn these into report
//! lines. Failures carry a witness in the returned detail when available.

use crate::algebra::{CartanAlgebra, Family, GradingKind};
use crate::error::{Error, Result};
use crate::linalg::{SparseAccum, SparseVec};
use crate::multiindex::{monomials, MultiIndex};
use crate::poly::TruncPoly;
use crate::witt::{contact_bracket, d_k, paired, sigma, CartanElement};
use rand::Rng;

/// Closed-form dimension of each simple algebra, from the construction:
/// W has n p^n monomial pairs; S(2) and H lose the constants and the top
/// monomial; S(n >= 3) has (n-1)(p^n - 1) independent images; K is the
/// full monomial count, minus one when p divides 2m + 4.
pub fn expected_dim(family: Family, n: usize, p: u64) -> usize {
    let pn = (p as usize).pow(n as u32);
    match family {
        Family::W => n * pn,
        Family::S => {
            if n == 2 {
                pn - 2
            } else {
                (n - 1) * (pn - 1)
            }
        }
        Family::H => pn - 2,
        Family::K => {
            if (n as u64 - 1 + 4) % p == 0 {
                pn - 1
            } else {
                pn
            }
        }
    }
}

/// Recompute every bracket in both argument orders and compare signs.
pub fn antisymmetry_exhaustive(l: &CartanAlgebra) -> (usize, usize) {
    let p = l.prime();
    let mut checked = 0;
    let mut failures = 0;
    for j in 0..l.dim() {
        for i in 0..j {
            checked += 1;
            let ij = l.bracket_basis(i, j);
            let ji_elt = l.basis_element(j).bracket(l.basis_element(i));
            let ji = match l.express(&ji_elt) {
                Ok(v) => v,
                Err(_) => {
                    failures += 1;
                    continue;
                }
            };
            let neg: SparseVec = ij.iter().map(|&(k, c)| (k, p.neg(c))).collect();
            if neg != ji {
                failures += 1;
            }
        }
    }
    (checked, failures)
}

fn jacobi_triple(l: &CartanAlgebra, i: usize, j: usize, k: usize, acc: &mut SparseAccum) -> bool {
    let ek = vec![(k, 1u64)];
    let ei = vec![(i, 1u64)];
    let ej = vec![(j, 1u64)];
    l.bracket_vec_into(&l.bracket_basis(i, j), &ek, acc);
    l.bracket_vec_into(&l.bracket_basis(j, k), &ei, acc);
    l.bracket_vec_into(&l.bracket_basis(k, i), &ej, acc);
    acc.take().is_empty()
}

/// Jacobi identity over all basis triples i < j < k.
pub fn jacobi_exhaustive(l: &CartanAlgebra) -> (usize, usize) {
    let mut acc = SparseAccum::new(l.dim(), l.prime());
    let mut checked = 0;
    let mut failures = 0;
    for i in 0..l.dim() {
        for j in (i + 1)..l.dim() {
            for k in (j + 1)..l.dim() {
                checked += 1;
                if !jacobi_triple(l, i, j, k, &mut acc) {
                    failures += 1;
                }
            }
        }
    }
    (checked, failures)
}

/// Jacobi identity over seeded random triples.
pub fn jacobi_random<R: Rng>(l: &CartanAlgebra, triples: usize, rng: &mut R) -> (usize, usize) {
    let mut acc = SparseAccum::new(l.dim(), l.prime());
    let mut failures = 0;
    for _ in 0..triples {
        let i = rng.gen_range(0..l.dim());
        let j = rng.gen_range(0..l.dim());
        let k = rng.gen_range(0..l.dim());
        if !jacobi_triple(l, i, j, k, &mut acc) {
            failures += 1;
        }
    }
    (triples, failures)
}

/// Every structure constant lands in the right component of both gradings.
pub fn grading_respected(l: &CartanAlgebra) -> (usize, usize) {
    let std = l.degrees(GradingKind::Standard);
    let alt = l.degrees(GradingKind::Alternate);
    let mut checked = 0;
    let mut failures = 0;
    for j in 0..l.dim() {
        for i in 0..j {
            checked += 1;
            for &(k, _) in l.bracket_entry(i, j) {
                if std[k] != std[i] + std[j] || alt[k] != alt[i] + alt[j] {
                    failures += 1;
                    break;
                }
            }
        }
    }
    (checked, failures)
}

/// The family membership predicate on every basis vector.
pub fn basis_membership(l: &CartanAlgebra) -> (usize, usize) {
    let mut failures = 0;
    for k in 0..l.dim() {
        if !l.is_family_member(l.basis_element(k)) {
            failures += 1;
        }
    }
    (l.dim(), failures)
}

fn restricted_one(l: &CartanAlgebra, u: usize) -> bool {
    let pu = l.pmap_basis(u).clone();
    let eu = vec![(u, 1u64)];
    for j in 0..l.dim() {
        let mut w: SparseVec = vec![(j, 1)];
        for _ in 0..l.prime().get() {
            w = l.bracket_vec(&eu, &w);
        }
        let lhs = l.bracket_vec(&pu, &vec![(j, 1)]);
        if lhs != w {
            return false;
        }
    }
    true
}

/// ad(u^[p]) = (ad u)^p as matrices, for every basis vector.
pub fn restricted_exhaustive(l: &CartanAlgebra) -> (usize, usize) {
    let mut failures = 0;
    for u in 0..l.dim() {
        if !restricted_one(l, u) {
            failures += 1;
        }
    }
    (l.dim(), failures)
}

/// Same check on a seeded random sample of basis vectors.
pub fn restricted_sampled<R: Rng>(l: &CartanAlgebra, count: usize, rng: &mut R) -> (usize, usize) {
    let mut failures = 0;
    for _ in 0..count {
        let u = rng.gen_range(0..l.dim());
        if !restricted_one(l, u) {
            failures += 1;
        }
    }
    (count, failures)
}

/// A closed-form term c * x^gamma where gamma may fall outside the
/// exponent box: coefficient-zero terms vanish first, out-of-range
/// exponents truncate to zero.
fn closed_term(coeff: i64, gamma: &[i64], n: usize, p: crate::field::Prime) -> TruncPoly {
    if p.reduce(coeff) == 0 {
        return TruncPoly::zero(n, p);
    }
    if gamma.iter().any(|&e| e < 0 || e >= p.get() as i64) {
        return TruncPoly::zero(n, p);
    }
    let exps: Vec<u8> = gamma.iter().map(|&e| e as u8).collect();
    TruncPoly::monomial(MultiIndex::new(&exps, p.get()), coeff, n, p)
}

/// Mismatch counts for the contact-product closed forms and the
/// commutation formula on a contact algebra.
#[derive(Debug, Clone, Default)]
pub struct ContactReport {
    pub unit: (usize, usize),
    pub linear: (usize, usize),
    pub grading: (usize, usize),
    pub quadratic: (usize, usize),
    pub diagonal: (usize, usize),
    pub commutation: (usize, usize),
    pub mismatches: Vec<String>,
}

impl ContactReport {
    pub fn total_failures(&self) -> usize {
        self.unit.1 + self.linear.1 + self.grading.1 + self.quadratic.1 + self.diagonal.1
            + self.commutation.1
    }
}

/// Check the product of every generator-level polynomial against the
/// closed forms, evaluating the defining formula directly as the oracle.
///
/// The closed form for the unit carries the factor 2 = Delta(1); the
/// commutation formula forces it, e.g. [D_K(1), D_K(x_n)] = D_K(2).
pub fn verify_contact_identities(l: &CartanAlgebra) -> Result<ContactReport> {
    if l.family() != Family::K {
        return Err(Error::InvalidParameters(
            "contact identities only apply to the K family".into(),
        ));
    }
    let n = l.n();
    let two_m = n - 1;
    let p = l.prime();
    let mut rep = ContactReport::default();
    let one = TruncPoly::constant(1, n, p);
    let alphas = monomials(n, p.get());
    let gi = |a: &MultiIndex, i: usize| a.get(i) as i64;

    for alpha in &alphas {
        let xa = TruncPoly::monomial(alpha.clone(), 1, n, p);
        let e: Vec<i64> = alpha.exponents().iter().map(|&v| v as i64).collect();

        // <1, x^a> = 2 a_n x^(a - e_n)
        {
            let mut g = e.clone();
            g[n - 1] -= 1;
            let rhs = closed_term(2 * gi(alpha, n), &g, n, p);
            let lhs = contact_bracket(&one, &xa)?;
            rep.unit.0 += 1;
            if lhs != rhs {
                rep.unit.1 += 1;
                push_witness(&mut rep.mismatches, "unit", alpha, &lhs, &rhs);
            }
        }

        // <x_i, x^a> = sigma(i) a_{i'} x^(a - e_{i'}) + a_n x^(a + e_i - e_n)
        for i in 1..=two_m {
            let ip = paired(i, two_m);
            let xi = TruncPoly::var(i, n, p);
            let mut g1 = e.clone();
            g1[ip - 1] -= 1;
            let mut g2 = e.clone();
            g2[i - 1] += 1;
            g2[n - 1] -= 1;
            let rhs = closed_term(sigma(i, two_m) * gi(alpha, ip), &g1, n, p)
                .add(&closed_term(gi(alpha, n), &g2, n, p));
            let lhs = contact_bracket(&xi, &xa)?;
            rep.linear.0 += 1;
            if lhs != rhs {
                rep.linear.1 += 1;
                push_witness(&mut rep.mismatches, "linear", alpha, &lhs, &rhs);
            }
        }

        // <x_n, x^a> = ||a|| x^a
        {
            let xn = TruncPoly::var(n, n, p);
            let rhs = xa.scale(alpha.contact_degree().unwrap());
            let lhs = contact_bracket(&xn, &xa)?;
            rep.grading.0 += 1;
            if lhs != rhs {
                rep.grading.1 += 1;
                push_witness(&mut rep.mismatches, "grading", alpha, &lhs, &rhs);
            }
        }

        // <x_i x_j, x^a> = sigma(i) a_{i'} x^(a + e_j - e_{i'})
        //                + sigma(j) a_{j'} x^(a + e_i - e_{j'})
        for i in 1..=two_m {
            for j in 1..=two_m {
                let ip = paired(i, two_m);
                let jp = paired(j, two_m);
                let f = TruncPoly::var(i, n, p).mul(&TruncPoly::var(j, n, p));
                let mut g1 = e.clone();
                g1[j - 1] += 1;
                g1[ip - 1] -= 1;
                let mut g2 = e.clone();
                g2[i - 1] += 1;
                g2[jp - 1] -= 1;
                let rhs = closed_term(sigma(i, two_m) * gi(alpha, ip), &g1, n, p)
                    .add(&closed_term(sigma(j, two_m) * gi(alpha, jp), &g2, n, p));
                let lhs = contact_bracket(&f, &xa)?;
                rep.quadratic.0 += 1;
                if lhs != rhs {
                    rep.quadratic.1 += 1;
                    push_witness(&mut rep.mismatches, "quadratic", alpha, &lhs, &rhs);
                }
            }
        }

        // <x_i x_{i'}, x^a> = (a_{i'} - a_i) x^a for i in the first half
        for i in 1..=(two_m / 2) {
            let ip = paired(i, two_m);
            let f = TruncPoly::var(i, n, p).mul(&TruncPoly::var(ip, n, p));
            let rhs = xa.scale(gi(alpha, ip) - gi(alpha, i));
            let lhs = contact_bracket(&f, &xa)?;
            rep.diagonal.0 += 1;
            if lhs != rhs {
                rep.diagonal.1 += 1;
                push_witness(&mut rep.mismatches, "diagonal", alpha, &lhs, &rhs);
            }
        }
    }

    // [D_K(f), D_K(g)] = D_K(<f, g>) over all ordered monomial pairs
    for a in &alphas {
        let fa = TruncPoly::monomial(a.clone(), 1, n, p);
        let da = d_k(&fa)?;
        for b in &alphas {
            let fb = TruncPoly::monomial(b.clone(), 1, n, p);
            let lhs = da.bracket(&d_k(&fb)?);
            let rhs = d_k(&contact_bracket(&fa, &fb)?)?;
            rep.commutation.0 += 1;
            if lhs != rhs {
                rep.commutation.1 += 1;
                rep.mismatches
                    .push(format!("commutation at ({a}, {b})"));
            }
        }
    }
    Ok(rep)
}

fn push_witness(
    out: &mut Vec<String>,
    which: &str,
    alpha: &MultiIndex,
    lhs: &TruncPoly,
    rhs: &TruncPoly,
) {
    if out.len() < 8 {
        out.push(format!("{which} at {alpha}: direct {lhs} vs closed {rhs}"));
    }
}

/// (ad d_s) . D = D . d_s on every monomial, for every spanning map of a
/// W/S/H algebra. `s = None` sweeps all coordinate directions.
pub fn intertwine_check(l: &CartanAlgebra, s: Option<usize>) -> Result<(usize, usize)> {
    if l.family() == Family::K {
        return Err(Error::InvalidParameters(
            "the intertwining identity is not asserted for the K family".into(),
        ));
    }
    let n = l.n();
    let p = l.prime();
    let svals: Vec<usize> = match s {
        Some(v) => vec![v],
        None => (1..=n).collect(),
    };
    let mut checked = 0;
    let mut failures = 0;
    for map in l.associated_maps() {
        for alpha in monomials(n, p.get()) {
            let f = TruncPoly::monomial(alpha.clone(), 1, n, p);
            let df = map.apply(&f)?;
            for &sv in &svals {
                let ds = CartanElement::partial_op(sv, n, p);
                let lhs = ds.bracket(&df);
                let rhs = map.apply(&f.partial(sv))?;
                checked += 1;
                if lhs != rhs {
                    failures += 1;
                }
            }
        }
    }
    Ok((checked, failures))
}

/// The weighted degree of D(x^beta) equals alt-degree(beta) plus the
/// declared degree of D, whenever the image is nonzero.
pub fn associated_map_grading(l: &CartanAlgebra) -> Result<(usize, usize)> {
    let n = l.n();
    let p = l.prime();
    let mut checked = 0;
    let mut failures = 0;
    for map in l.associated_maps() {
        for beta in monomials(n, p.get()) {
            let f = TruncPoly::monomial(beta.clone(), 1, n, p);
            let im = map.apply(&f)?;
            if im.is_zero() {
                continue;
            }
            checked += 1;
            let want = beta.alternate_degree() + map.alt_degree;
            // weighted degree of each term x^gamma d_j is altdeg(gamma) - j
            let mut ok = true;
            for i in 1..=n {
                for (m, _) in im.component(i).terms() {
                    if m.alternate_degree() - i as i64 != want {
                        ok = false;
                    }
                }
            }
            if !ok {
                failures += 1;
            }
        }
    }
    Ok((checked, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn structure_checks_small_witt() {
        let l = CartanAlgebra::build(Family::W, 1, 5).unwrap();
        assert_eq!(antisymmetry_exhaustive(&l), (10, 0));
        let (c, f) = jacobi_exhaustive(&l);
        assert_eq!(c, 10);
        assert_eq!(f, 0);
        assert_eq!(grading_respected(&l).1, 0);
        assert_eq!(restricted_exhaustive(&l).1, 0);
    }

    #[test]
    fn structure_checks_special() {
        let l = CartanAlgebra::build(Family::S, 2, 5).unwrap();
        assert_eq!(antisymmetry_exhaustive(&l).1, 0);
        assert_eq!(jacobi_exhaustive(&l).1, 0);
        assert_eq!(grading_respected(&l).1, 0);
        assert_eq!(basis_membership(&l).1, 0);
        assert_eq!(restricted_exhaustive(&l).1, 0);
    }

    #[test]
    fn contact_identity_sweep_small() {
        let l = CartanAlgebra::build(Family::K, 3, 5).unwrap();
        let rep = verify_contact_identities(&l).unwrap();
        assert_eq!(rep.unit, (125, 0));
        assert_eq!(rep.grading, (125, 0));
        assert_eq!(rep.linear.1, 0);
        assert_eq!(rep.quadratic.1, 0);
        assert_eq!(rep.diagonal.1, 0);
        assert_eq!(rep.commutation, (15625, 0), "{:?}", rep.mismatches);
    }

    #[test]
    fn intertwining_on_w_and_s() {
        let w = CartanAlgebra::build(Family::W, 2, 5).unwrap();
        assert_eq!(intertwine_check(&w, None).unwrap().1, 0);
        let s = CartanAlgebra::build(Family::S, 2, 5).unwrap();
        assert_eq!(intertwine_check(&s, None).unwrap().1, 0);
        let k = CartanAlgebra::build(Family::K, 3, 5).unwrap();
        assert!(intertwine_check(&k, None).is_err());
    }

    #[test]
    fn associated_maps_are_graded() {
        for (fam, n) in [(Family::W, 2), (Family::S, 2), (Family::K, 3)] {
            let l = CartanAlgebra::build(fam, n, 5).unwrap();
            let (c, f) = associated_map_grading(&l).unwrap();
            assert!(c > 0);
            assert_eq!(f, 0, "{fam}({n})");
        }
    }

    #[test]
    fn random_jacobi_contact() {
        let l = CartanAlgebra::build(Family::K, 3, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        assert_eq!(jacobi_random(&l, 2000, &mut rng).1, 0);
    }

    #[test]
    fn expected_dims_match_builds() {
        for (fam, n, p) in [
            (Family::W, 1, 5),
            (Family::W, 2, 5),
            (Family::S, 2, 5),
            (Family::K, 3, 5),
        ] {
            let l = CartanAlgebra::build(fam, n, p).unwrap();
            assert_eq!(l.dim(), expected_dim(fam, n, p));
        }
    }
}
