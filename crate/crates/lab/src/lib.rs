//! Formats, generators, experiment pipeline and law suites on top of
//! `coarse-core`.

pub mod binfmt;
pub mod experiment;
pub mod gen;
pub mod json;
pub mod laws;
pub mod pgm;
