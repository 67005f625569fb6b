//! Exact-arithmetic engines for symmetric random walks on finitely generated
//! groups.
//!
//! The crate computes convolution powers of finitely supported rational
//! probability measures and the derived return-ratio series
//! `r_n(g) = mu^{*n}(g) / mu^{*n}(e)`, whose limit behaviour classifies group
//! elements into the ratio set of the walk. Everything downstream of a measure
//! is exact: weights are big rationals kept over a common denominator, support
//! truncation is tracked as an explicit mass deficit, and every identity the
//! engines rely on is checkable as a rational equality.
//!
//! Modules:
//! - [`group`]: group backends with canonical element forms (free, cyclic,
//!   finite multiplication tables, free products of finite groups, direct
//!   products, integer lattices).
//! - [`measure`]: finitely supported measures, convolution, powers, and the
//!   measure constructors (lazy uniform, smoothing, conjugation, products,
//!   truncation).
//! - [`radial`]: a birth-death collapse of generator-transitive walks on free
//!   groups, pushing step counts into the thousands.
//! - [`analysis`]: ratio series, membership classification, displacement and
//!   spectral estimates, subgroup checks, and the conjugation probe.
//! - [`chain`]: the factor Markov chain on a finite normal subgroup, with
//!   exact detailed-balance and mixing diagnostics.

pub mod analysis;
pub mod chain;
pub mod group;
pub mod measure;
pub mod radial;

mod error;

pub use error::Error;

/// Default cap on the number of support entries a single measure may hold.
pub const DEFAULT_SUPPORT_CAP: usize = 5_000_000;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
