//! Library surface of the walklab command-line front end.
//!
//! The binary in `main.rs` is a thin argument-parsing shell; everything
//! it does goes through [`run::execute`] so the grammar, resolution,
//! and report writers stay testable in isolation.

pub mod ast;
pub mod error;
pub mod grammar;
pub mod output;
pub mod resolve;
pub mod run;
