#![cfg(doctest)]
//! Runs every Rust snippet in the guide (`book/`) as a doc-test, keeping the
//! prose and the crate in sync: a chapter that drifts from the API breaks
//! `cargo test`.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/games.md")]
mod games {}

#[doc = include_str!("../../../book/src/dynamics.md")]
mod dynamics {}

#[doc = include_str!("../../../book/src/discretization.md")]
mod discretization {}

#[doc = include_str!("../../../book/src/spectra.md")]
mod spectra {}

#[doc = include_str!("../../../book/src/energies.md")]
mod energies {}

#[doc = include_str!("../../../book/src/benchmarks.md")]
mod benchmarks {}
