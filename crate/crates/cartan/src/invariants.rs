//! Polynomial functions on the dual space of bounded degree, the induced
//! action of certified automorphisms on them, the scaling-weight filter,
//! and the exact fixed-space solver.
//!
//! Coordinates c_k evaluate a functional at basis vector k. A monomial in
//! the c_k carries the weight sum(e_k * deg(b_k)); invariance under the
//! scaling automorphisms forces weight zero, so the solver works inside
//! the weight-zero span and intersects kernels of (action - identity)
//! generator by generator.

use crate::algebra::{CartanAlgebra, GradingKind};
use crate::auto::LinearAuto;
use crate::field::Prime;
use crate::linalg::GfMatrix;
use std::collections::BTreeMap;

/// A monomial in the dual coordinates: sorted (variable, exponent) pairs.
pub type DualMonomial = Vec<(usize, u32)>;

/// Sparse polynomial in the dual coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyOnDual {
    p: Prime,
    terms: BTreeMap<DualMonomial, u64>,
}

impl PolyOnDual {
    pub fn zero(p: Prime) -> PolyOnDual {
        PolyOnDual {
            p,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: i64, p: Prime) -> PolyOnDual {
        let mut f = PolyOnDual::zero(p);
        f.add_term(Vec::new(), p.reduce(c));
        f
    }

    /// The coordinate function c_k.
    pub fn coordinate(k: usize, p: Prime) -> PolyOnDual {
        let mut f = PolyOnDual::zero(p);
        f.add_term(vec![(k, 1)], 1);
        f
    }

    pub fn monomial(mono: DualMonomial, c: i64, p: Prime) -> PolyOnDual {
        let mut f = PolyOnDual::zero(p);
        f.add_term(mono, p.reduce(c));
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DualMonomial, u64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, mono: &DualMonomial) -> u64 {
        self.terms.get(mono).copied().unwrap_or(0)
    }

    pub fn add_term(&mut self, mono: DualMonomial, c: u64) {
        let c = c % self.p.get();
        if c == 0 {
            return;
        }
        let e = self.terms.entry(mono).or_insert(0);
        *e = self.p.add(*e, c);
        if *e == 0 {
            self.terms.retain(|_, v| *v != 0);
        }
    }

    pub fn add(&self, rhs: &PolyOnDual) -> PolyOnDual {
        let mut out = self.clone();
        for (m, c) in rhs.terms() {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: i64) -> PolyOnDual {
        let c = self.p.reduce(c);
        let mut out = PolyOnDual::zero(self.p);
        for (m, a) in self.terms() {
            out.add_term(m.clone(), self.p.mul(a, c));
        }
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&(_, e)| e).sum())
            .max()
            .unwrap_or(0)
    }

    /// Evaluate at a functional given by its dense coefficient vector.
    pub fn eval(&self, chi: &[u64]) -> u64 {
        let mut acc = 0u64;
        for (m, c) in self.terms() {
            let mut t = c;
            for &(k, e) in m {
                t = self.p.mul(t, self.p.pow(chi[k], e as u64));
            }
            acc = self.p.add(acc, t);
        }
        acc
    }
}

fn mono_mul_var(mono: &DualMonomial, var: usize) -> DualMonomial {
    let mut out = mono.clone();
    match out.binary_search_by_key(&var, |&(k, _)| k) {
        Ok(i) => out[i].1 += 1,
        Err(i) => out.insert(i, (var, 1)),
    }
    out
}

/// Weight of a dual monomial: the sum of exponent times degree of the
/// underlying basis vector.
pub fn weight(l: &CartanAlgebra, mono: &DualMonomial) -> i64 {
    mono.iter()
        .map(|&(k, e)| e as i64 * l.degree(k, GradingKind::Standard))
        .sum()
}

/// The action (g.f)(chi) = f(g^{-1}.chi): substitutes the linear form
/// sum_j M[j][i] c_j for each coordinate c_i, where M is the matrix of g.
pub fn act(l: &CartanAlgebra, g: &LinearAuto, f: &PolyOnDual) -> PolyOnDual {
    let p = l.prime();
    let mut out = PolyOnDual::zero(p);
    for (mono, coeff) in f.terms() {
        // expand the product of substituted linear forms
        let mut acc: BTreeMap<DualMonomial, u64> = BTreeMap::new();
        acc.insert(Vec::new(), coeff);
        for &(i, e) in mono {
            let form = g.matrix().col(i);
            for _ in 0..e {
                let mut next: BTreeMap<DualMonomial, u64> = BTreeMap::new();
                for (m, &c) in &acc {
                    for &(j, a) in form {
                        let nm = mono_mul_var(m, j);
                        let e = next.entry(nm).or_insert(0);
                        *e = p.add(*e, p.mul(c, a));
                    }
                }
                next.retain(|_, v| *v != 0);
                acc = next;
            }
        }
        for (m, c) in acc {
            out.add_term(m, c);
        }
    }
    out
}

/// All weight-zero dual monomials of total degree at most d, in a fixed
/// deterministic order.
pub fn weight_zero_monomials(l: &CartanAlgebra, d: u32) -> Vec<DualMonomial> {
    let mut out = Vec::new();
    let mut stack: DualMonomial = Vec::new();
    fn recurse(
        l: &CartanAlgebra,
        start: usize,
        remaining: u32,
        w: i64,
        stack: &mut DualMonomial,
        out: &mut Vec<DualMonomial>,
    ) {
        if w == 0 {
            out.push(stack.clone());
        }
        if remaining == 0 {
            return;
        }
        for k in start..l.dim() {
            let dw = l.degree(k, GradingKind::Standard);
            stack.push((k, 1));
            recurse_extend(l, k, remaining - 1, w + dw, stack, out);
            stack.pop();
        }
    }
    fn recurse_extend(
        l: &CartanAlgebra,
        k: usize,
        remaining: u32,
        w: i64,
        stack: &mut DualMonomial,
        out: &mut Vec<DualMonomial>,
    ) {
        if w == 0 {
            out.push(stack.clone());
        }
        if remaining == 0 {
            return;
        }
        // extend the current variable or move to a later one
        let last = stack.last_mut().unwrap();
        last.1 += 1;
        let dw = l.degree(k, GradingKind::Standard);
        recurse_extend(l, k, remaining - 1, w + dw, stack, out);
        stack.last_mut().unwrap().1 -= 1;
        for k2 in (k + 1)..l.dim() {
            let dw2 = l.degree(k2, GradingKind::Standard);
            stack.push((k2, 1));
            recurse_extend(l, k2, remaining - 1, w + dw2, stack, out);
            stack.pop();
        }
    }
    recurse(l, 0, d, 0, &mut stack, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Exact basis of the space of weight-zero polynomials of degree <= d
/// fixed by every generator. With no generators this is the whole
/// weight-zero span; adding generators can only cut it down.
pub fn fixed_space(l: &CartanAlgebra, d: u32, gens: &[&LinearAuto]) -> Vec<PolyOnDual> {
    let p = l.prime();
    let monos = weight_zero_monomials(l, d);
    let dim = monos.len();
    // current solution space as columns over the weight-zero monomials
    let mut space = GfMatrix::identity(dim, p);
    let mut space_cols = dim;
    for g in gens {
        if space_cols == 0 {
            break;
        }
        // constraint vectors: act(g, w) - w for each monomial w, combined
        // through the current solution columns
        let mut row_index: BTreeMap<DualMonomial, usize> = BTreeMap::new();
        let mut cols: Vec<Vec<(usize, u64)>> = Vec::with_capacity(dim);
        for w in &monos {
            let mut moved = act(l, g, &PolyOnDual::monomial(w.clone(), 1, p));
            moved.add_term(w.clone(), p.neg(1));
            let mut col = Vec::with_capacity(moved.num_terms());
            for (m, c) in moved.terms() {
                let next = row_index.len();
                let r = *row_index.entry(m.clone()).or_insert(next);
                col.push((r, c));
            }
            cols.push(col);
        }
        let rows = row_index.len();
        if rows == 0 {
            continue; // generator fixes everything in range
        }
        // constraint matrix restricted to the current space
        let mut m = GfMatrix::zeros(rows, space_cols, p);
        for (w_idx, col) in cols.iter().enumerate() {
            for c in 0..space_cols {
                let s = space.get(w_idx, c);
                if s == 0 {
                    continue;
                }
                for &(r, v) in col {
                    let cur = m.get(r, c);
                    m.set(r, c, p.add(cur, p.mul(s, v)));
                }
            }
        }
        let kernel = m.kernel_basis();
        // new space = old space composed with the kernel
        let mut next = GfMatrix::zeros(dim, kernel.len(), p);
        for (c, kvec) in kernel.iter().enumerate() {
            for r in 0..dim {
                let mut acc = 0u64;
                for (j, &kc) in kvec.iter().enumerate() {
                    acc = p.add(acc, p.mul(space.get(r, j), kc));
                }
                next.set(r, c, acc);
            }
        }
        space = next;
        space_cols = kernel.len();
    }
    // materialize the basis
    let mut basis = Vec::with_capacity(space_cols);
    for c in 0..space_cols {
        let mut f = PolyOnDual::zero(p);
        for (r, w) in monos.iter().enumerate() {
            f.add_term(w.clone(), space.get(r, c));
        }
        basis.push(f);
    }
    basis
}
