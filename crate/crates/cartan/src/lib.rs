//! Exact construction of the four families of restricted simple Lie
//! algebras of Cartan type over prime fields GF(p), p > 3, together with
//! the machinery used to probe their coadjoint representation: certified
//! automorphisms, functional rectification and flattening, and a solver
//! for polynomial fixed spaces on the dual.
//!
//! Everything is computed in exact modular arithmetic with deterministic
//! orderings, so structure constants, traces, and exports are reproducible
//! bit for bit.

pub mod algebra;
pub mod auto;
pub mod checks;
pub mod coadjoint;
pub mod error;
pub mod export;
pub mod field;
pub mod invariants;
pub mod linalg;
pub mod multiindex;
pub mod poly;
pub mod suites;
pub mod witt;

pub use algebra::{CartanAlgebra, Family};
pub use error::{Error, Result};
pub use field::{FieldElem, Prime};
pub use multiindex::MultiIndex;
pub use poly::TruncPoly;
pub use witt::CartanElement;
