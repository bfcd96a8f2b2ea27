//! Deterministic JSON interchange for built algebras: basis labels with
//! both degrees, the structure-constant table (pairs i < j with nonzero
//! brackets), and the p-map table. Serialization is canonical, so
//! export, import, and re-export reproduce the bytes exactly.

use crate::algebra::{CartanAlgebra, Family, GradingKind};
use crate::error::{Error, Result};
use crate::field::Prime;
use crate::linalg::SparseVec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct BasisEntry {
    pub alpha: Vec<u8>,
    pub degree_alt: i64,
    pub degree_std: i64,
    pub map_tag: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct AlgebraDoc {
    pub basis: Vec<BasisEntry>,
    pub brackets: Vec<(usize, usize, Vec<(usize, u64)>)>,
    pub dim: usize,
    pub family: String,
    pub n: usize,
    pub p: u64,
    pub pmap: Vec<(usize, Vec<(usize, u64)>)>,
}

impl AlgebraDoc {
    pub fn from_algebra(l: &CartanAlgebra) -> AlgebraDoc {
        let mut basis = Vec::with_capacity(l.dim());
        for k in 0..l.dim() {
            let label = l.label(k);
            basis.push(BasisEntry {
                alpha: label.alpha.exponents().to_vec(),
                degree_alt: l.degree(k, GradingKind::Alternate),
                degree_std: l.degree(k, GradingKind::Standard),
                map_tag: label.tag.name(),
            });
        }
        let mut brackets = Vec::new();
        for j in 0..l.dim() {
            for i in 0..j {
                let entry = l.bracket_entry(i, j);
                if !entry.is_empty() {
                    brackets.push((i, j, entry.clone()));
                }
            }
        }
        let mut pmap = Vec::new();
        for k in 0..l.dim() {
            let img = l.pmap_basis(k);
            if !img.is_empty() {
                pmap.push((k, img.clone()));
            }
        }
        AlgebraDoc {
            basis,
            brackets,
            dim: l.dim(),
            family: l.family().to_string(),
            n: l.n(),
            p: l.prime().get(),
            pmap,
        }
    }

    /// Canonical serialization: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<AlgebraDoc> {
        serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameters(format!("malformed algebra document: {e}")))
    }

    pub fn family(&self) -> Result<Family> {
        self.family.parse()
    }
}

/// A structure-constant table rebuilt from an imported document; brackets
/// come from the table alone.
#[derive(Debug, Clone)]
pub struct ImportedTable {
    pub doc: AlgebraDoc,
    prime: Prime,
    table: std::collections::BTreeMap<(usize, usize), SparseVec>,
}

impl ImportedTable {
    pub fn new(doc: AlgebraDoc) -> Result<ImportedTable> {
        let prime = Prime::new(doc.p)?;
        let mut table = std::collections::BTreeMap::new();
        for (i, j, entry) in &doc.brackets {
            if *i >= *j || *j >= doc.dim {
                return Err(Error::InvalidParameters(format!(
                    "bracket entry ({i}, {j}) out of order or range"
                )));
            }
            table.insert((*i, *j), entry.clone());
        }
        Ok(ImportedTable { doc, prime, table })
    }

    pub fn dim(&self) -> usize {
        self.doc.dim
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> SparseVec {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => Vec::new(),
            Less => self.table.get(&(i, j)).cloned().unwrap_or_default(),
            Greater => {
                let mut v = self.table.get(&(j, i)).cloned().unwrap_or_default();
                for t in v.iter_mut() {
                    t.1 = self.prime.neg(t.1);
                }
                v
            }
        }
    }

    /// Re-export; byte-identical to the original serialization.
    pub fn to_json(&self) -> String {
        self.doc.to_json()
    }
}
