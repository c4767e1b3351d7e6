//! Finite-scale coarse geometry and Roe-type operator numerics.
//!
//! Spaces are finite point sets carrying an extended metric (distances in
//! `ℕ ∪ {∞}`); every asymptotic notion is reported as a witness [`Scale`]
//! rather than a boolean, so callers decide what "bounded" means at the size
//! they work with.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, generators and
//! the command line live in the companion `coarse-lab` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bitset;
pub mod category;
pub mod error;
pub mod lfcm;
pub mod matrix;
pub mod norm;
pub mod operator;
pub mod profile;
pub mod relation;
pub mod rigidity;
pub mod scale;
pub mod space;

pub use bitset::BitSet;
pub use error::{CoarseError, Result};
pub use lfcm::{DimensionVector, LfcmSpace, MeasurableMap, Module};
pub use matrix::{CMatrix, C64};
pub use operator::Operator;
pub use profile::Profile;
pub use relation::{Relation, RelationReport};
pub use scale::Scale;
pub use space::Space;
