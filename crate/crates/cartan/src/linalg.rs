//! Exact linear algebra over GF(p): dense elimination, kernels, solving,
//! and an incremental echelon index for span membership queries.

use crate::error::{Error, Result};
use crate::field::Prime;

/// Sparse vector: strictly increasing indices, nonzero entries.
pub type SparseVec = Vec<(usize, u64)>;

/// Normalize an unsorted accumulation into a canonical sparse vector.
pub fn sparse_from_dense(v: &[u64]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| (i, c))
        .collect()
}

pub fn sparse_scale(v: &SparseVec, c: u64, p: Prime) -> SparseVec {
    if c == 0 {
        return Vec::new();
    }
    v.iter().map(|&(i, a)| (i, p.mul(a, c))).collect()
}

/// Accumulator for building sparse vectors out of scattered contributions.
pub struct SparseAccum {
    dense: Vec<u64>,
    touched: Vec<usize>,
    p: Prime,
}

impl SparseAccum {
    pub fn new(dim: usize, p: Prime) -> SparseAccum {
        SparseAccum {
            dense: vec![0; dim],
            touched: Vec::new(),
            p,
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, c: u64) {
        if c == 0 {
            return;
        }
        if self.dense[i] == 0 {
            self.touched.push(i);
        }
        self.dense[i] = self.p.add(self.dense[i], c % self.p.get());
    }

    /// Drain into a canonical sparse vector, resetting the accumulator.
    pub fn take(&mut self) -> SparseVec {
        self.touched.sort_unstable();
        let mut out = Vec::with_capacity(self.touched.len());
        for &i in &self.touched {
            if self.dense[i] != 0 {
                out.push((i, self.dense[i]));
            }
            self.dense[i] = 0;
        }
        self.touched.clear();
        out
    }
}

/// Dense row-major matrix over GF(p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GfMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    p: Prime,
}

impl GfMatrix {
    pub fn zeros(rows: usize, cols: usize, p: Prime) -> GfMatrix {
        GfMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
            p,
        }
    }

    pub fn identity(n: usize, p: Prime) -> GfMatrix {
        let mut m = GfMatrix::zeros(n, n, p);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<u64>>, p: Prime) -> GfMatrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&v| v % p.get()));
        }
        GfMatrix {
            rows: r,
            cols: c,
            data,
            p,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn prime(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.p.get();
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0u64; self.rows];
        for r in 0..self.rows {
            let mut acc = 0u64;
            for c in 0..self.cols {
                acc += self.get(r, c) * v[c];
                // delayed reduction is safe: p < 2^31, cols < 2^31
                if acc >= 1 << 62 {
                    acc %= self.p.get();
                }
            }
            out[r] = acc % self.p.get();
        }
        out
    }

    pub fn mul_mat(&self, rhs: &GfMatrix) -> GfMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = GfMatrix::zeros(self.rows, rhs.cols, self.p);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = self.p.add(out.get(r, c), self.p.mul(a, rhs.get(k, c)));
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    /// Reduced row echelon form in place; returns pivot column per pivot row.
    ///
    /// Pivoting is deterministic: first nonzero entry scanning columns left
    /// to right, rows top to bottom.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let mut pr = None;
            for i in r..self.rows {
                if self.get(i, c) != 0 {
                    pr = Some(i);
                    break;
                }
            }
            let Some(pr) = pr else { continue };
            if pr != r {
                for j in 0..self.cols {
                    let a = self.get(r, j);
                    let b = self.get(pr, j);
                    self.set(r, j, b);
                    self.set(pr, j, a);
                }
            }
            let inv = self.p.inv(self.get(r, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let v = self.p.mul(self.get(r, j), inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = self.p.sub(self.get(i, j), self.p.mul(f, self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    pub fn inverse(&self) -> Result<GfMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = GfMatrix::zeros(n, 2 * n, self.p);
        for r in 0..n {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n + r, 1);
        }
        let pivots = aug.rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return Err(Error::NotInvertible);
        }
        let mut inv = GfMatrix::zeros(n, n, self.p);
        for r in 0..n {
            for c in 0..n {
                inv.set(r, c, aug.get(r, n + c));
            }
        }
        Ok(inv)
    }

    /// One solution of A x = b, or None when inconsistent. Free variables
    /// are set to zero, which keeps solutions deterministic.
    pub fn solve(&self, b: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = GfMatrix::zeros(self.rows, self.cols + 1, self.p);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, b[r]);
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![0u64; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.cols);
        }
        Some(x)
    }

    /// Basis of the right kernel, deterministic order.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![0u64; self.cols];
            v[free] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = self.p.neg(m.get(r, free));
            }
            basis.push(v);
        }
        basis
    }
}

/// Incrementally echelonized span of vectors in a fixed coordinate space.
///
/// Rows are kept reduced with unit pivots; insertion order decides which
/// incoming vectors become basis rows, so the result is canonical for a
/// fixed generator order.
#[derive(Debug, Clone)]
pub struct SpanIndex {
    dim: usize,
    p: Prime,
    /// Echelon rows, each paired with its pivot column.
    rows: Vec<(usize, Vec<u64>)>,
    /// combos[r] expresses rows[r] in terms of inserted generators.
    combos: Vec<SparseVec>,
    inserted: usize,
}

impl SpanIndex {
    pub fn new(dim: usize, p: Prime) -> SpanIndex {
        SpanIndex {
            dim,
            p,
            rows: Vec::new(),
            combos: Vec::new(),
            inserted: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Dense contents of an echelon row.
    pub fn row(&self, r: usize) -> &[u64] {
        &self.rows[r].1
    }

    /// Reduce v against the current rows; returns the residual and the
    /// coefficients of the reduction in terms of stored basis rows.
    fn reduce(&self, v: &SparseVec) -> (Vec<u64>, SparseVec) {
        let mut dense = vec![0u64; self.dim];
        for &(i, c) in v {
            dense[i] = self.p.add(dense[i], c % self.p.get());
        }
        let mut coeffs: SparseVec = Vec::new();
        for (r, &(piv, ref row)) in self.rows.iter().enumerate() {
            let f = dense[piv];
            if f == 0 {
                continue;
            }
            coeffs.push((r, f));
            for (j, &a) in row.iter().enumerate() {
                if a != 0 {
                    dense[j] = self.p.sub(dense[j], self.p.mul(f, a));
                }
            }
        }
        (dense, coeffs)
    }

    /// Insert a generator. Returns the new row index when it enlarges the
    /// span, None when it was already contained.
    ///
    /// Rows are kept mutually reduced (every row has zeros at all other
    /// pivots), so membership reduction is a single pass.
    pub fn insert(&mut self, v: &SparseVec) -> Option<usize> {
        let gen_id = self.inserted;
        self.inserted += 1;
        let (mut dense, coeffs) = self.reduce(v);
        let piv = dense.iter().position(|&c| c != 0)?;
        let inv = self.p.inv(dense[piv]).expect("nonzero pivot");
        for c in dense.iter_mut() {
            *c = self.p.mul(*c, inv);
        }
        // combo of the new row: (gen - sum coeffs*rows) * inv
        let mut combo: SparseVec = vec![(gen_id, inv)];
        for &(r, f) in &coeffs {
            let scale = self.p.mul(f, inv);
            for &(g, c) in &self.combos[r] {
                merge_term(&mut combo, g, self.p.neg(self.p.mul(scale, c)), self.p);
            }
        }
        combo.sort_unstable_by_key(|&(g, _)| g);
        combo.retain(|&(_, c)| c != 0);
        // back-eliminate the new pivot from every stored row
        let new_row = dense.clone();
        for r in 0..self.rows.len() {
            let f = self.rows[r].1[piv];
            if f == 0 {
                continue;
            }
            for (j, &a) in new_row.iter().enumerate() {
                if a != 0 {
                    let v = self.p.sub(self.rows[r].1[j], self.p.mul(f, a));
                    self.rows[r].1[j] = v;
                }
            }
            let addition: Vec<(usize, u64)> = combo
                .iter()
                .map(|&(g, c)| (g, self.p.neg(self.p.mul(f, c))))
                .collect();
            for (g, c) in addition {
                merge_term(&mut self.combos[r], g, c, self.p);
            }
            self.combos[r].sort_unstable_by_key(|&(g, _)| g);
            self.combos[r].retain(|&(_, c)| c != 0);
        }
        self.rows.push((piv, dense));
        self.combos.push(combo);
        Some(self.rows.len() - 1)
    }

    /// Coordinates of v against the stored rows, or None if outside the span.
    pub fn express(&self, v: &SparseVec) -> Option<SparseVec> {
        let (dense, coeffs) = self.reduce(v);
        if dense.iter().any(|&c| c != 0) {
            return None;
        }
        Some(coeffs)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.express(v).is_some()
    }

    /// Expresses v as a combination of the original inserted generators.
    pub fn express_in_generators(&self, v: &SparseVec) -> Option<SparseVec> {
        let coeffs = self.express(v)?;
        let mut out: SparseVec = Vec::new();
        for &(r, f) in &coeffs {
            for &(g, c) in &self.combos[r] {
                merge_term(&mut out, g, self.p.mul(f, c), self.p);
            }
        }
        out.sort_unstable_by_key(|&(g, _)| g);
        out.retain(|&(_, c)| c != 0);
        Some(out)
    }
}

fn merge_term(v: &mut SparseVec, idx: usize, c: u64, p: Prime) {
    if c == 0 {
        return;
    }
    if let Some(slot) = v.iter_mut().find(|(i, _)| *i == idx) {
        slot.1 = p.add(slot.1, c);
    } else {
        v.push((idx, c));
    }
}
