//! Ratio-series computation and the decision procedures built on it.
//!
//! The central quantity is the pointwise ratio `r_n(g) = p_n(g)/p_n(e)`
//! where `p_n` is the n-fold convolution power of a step measure. Walks
//! are driven by one of three interchangeable engines:
//!
//! * `sparse` - direct convolution of exact rational measures; works for
//!   every group and measure, cost grows with the support.
//! * `radial` - the distance-class collapse, selected automatically when
//!   the group is free and the measure is the lazy-uniform step; cost is
//!   quadratic in the horizon regardless of support size.
//! * `product` - coordinate factorization on direct products whose step
//!   measure splits exactly as a product of its marginals; each factor
//!   recursively picks its own engine and ratios multiply.
//!
//! When truncation discards mass, ratios are reported as exact enclosing
//! intervals `[p(g)/(p(e)+d), (p(g)+d)/p(e)]` with `d` the accumulated
//! deficit, so every emitted bound is still a proved statement about the
//! untruncated walk.

mod classify;
mod checks;
mod engine;
mod probe;

pub use classify::{classify, ClassifyPolicy, MembershipVerdict, Verdict};
pub use checks::{
    displacement, kpower_consistency, run_verification, spectral_estimate, subgroup_triangle,
    CheckResult, CheckStatus, DisplacementReport, DoublingCheck, KPowerReport, SpectralPoint,
    SpectralReport, TriangleReport, VerifyConfig,
};
pub use probe::{conjugacy_probe, ProbeCandidate, ProbeReport, ProbeSource};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;

use crate::group::{Elem, Group};
use crate::measure::Measure;
use crate::{Error, Result};

/// Which computation path produced a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Sparse,
    Radial,
    Product,
    SparseFloat,
    RadialFloat,
}

impl EngineKind {
    /// Stable tag used in CSV and JSON output.
    pub fn tag(self) -> &'static str {
        match self {
            EngineKind::Sparse => "sparse",
            EngineKind::Radial => "radial",
            EngineKind::Product => "product",
            EngineKind::SparseFloat => "sparse_f64",
            EngineKind::RadialFloat => "radial_f64",
        }
    }
}

/// One horizon of a ratio series, as an exact enclosing interval.
/// `lo == hi` and `exact` when no mass has been truncated.
#[derive(Debug, Clone)]
pub struct RatioPoint {
    pub n: u64,
    pub lo: BigRational,
    pub hi: BigRational,
    pub exact: bool,
}

/// Floating-point series point (interval endpoints collapse unless the
/// walk was truncated).
#[derive(Debug, Clone, Copy)]
pub struct RatioPointF64 {
    pub n: u64,
    pub lo: f64,
    pub hi: f64,
}

/// Series payload; exact and float engines never mix in one series.
#[derive(Debug, Clone)]
pub enum SeriesData {
    Exact(Vec<RatioPoint>),
    Float(Vec<RatioPointF64>),
}

impl SeriesData {
    pub fn len(&self) -> usize {
        match self {
            SeriesData::Exact(v) => v.len(),
            SeriesData::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// View every point as exact rational endpoints. Float points convert
    /// via the exact binary value of the f64.
    pub fn rational_points(&self) -> Vec<(u64, BigRational, BigRational)> {
        match self {
            SeriesData::Exact(v) => v
                .iter()
                .map(|p| (p.n, p.lo.clone(), p.hi.clone()))
                .collect(),
            SeriesData::Float(v) => v
                .iter()
                .filter_map(|p| {
                    let lo = BigRational::from_float(p.lo)?;
                    let hi = BigRational::from_float(p.hi)?;
                    Some((p.n, lo, hi))
                })
                .collect(),
        }
    }
}

/// Ratio series for one target element.
#[derive(Debug, Clone)]
pub struct TargetSeries {
    pub target: Elem,
    pub engine: EngineKind,
    pub data: SeriesData,
}

/// Recorded when a walk stopped early because a support cap was hit.
#[derive(Debug, Clone, Copy)]
pub struct CapHit {
    /// The horizon whose convolution overflowed the cap.
    pub at_n: u64,
    pub cap: usize,
    pub support: usize,
}

/// Result of a walk over all requested targets.
#[derive(Debug, Clone)]
pub struct WalkOutcome {
    pub series: Vec<TargetSeries>,
    /// Last horizon actually computed (equals the request unless capped).
    pub reached_n: u64,
    pub cap_hit: Option<CapHit>,
}

/// Walk configuration.
#[derive(Debug, Clone)]
pub struct WalkOptions {
    /// Hard bound on convolution support size.
    pub cap: usize,
    /// Mass budget removed per step, forcing the sparse engine.
    pub per_step_truncation: Option<BigRational>,
    /// Use f64 weights instead of exact rationals.
    pub float_mode: bool,
}

impl Default for WalkOptions {
    fn default() -> Self {
        WalkOptions {
            cap: crate::DEFAULT_SUPPORT_CAP,
            per_step_truncation: None,
            float_mode: false,
        }
    }
}

/// Lazy-uniform shape on a free group, the radial engine's precondition.
#[derive(Debug, Clone)]
pub(crate) struct RadialProfile {
    pub rank: u32,
    pub alpha: BigRational,
}

/// Detects whether `mu` is exactly the lazy-uniform measure on a free
/// group: every standard generator carries the same weight, nothing else
/// is in the support except possibly the identity, and no mass is missing.
pub(crate) fn radial_profile(mu: &Measure) -> Option<RadialProfile> {
    let rank = mu.group().backend_free_rank()?;
    if !mu.is_exact() {
        return None;
    }
    let gens = mu.group().generators();
    let expected = gens.len();
    let identity = mu.group().identity();
    let id_num = mu.numerator(&identity);
    let with_id = usize::from(!id_num.is_zero());
    if mu.support_len() != expected + with_id {
        return None;
    }
    let mut gen_num: Option<BigInt> = None;
    for s in &gens {
        let w = mu.numerator(s);
        if w.is_zero() {
            return None;
        }
        match &gen_num {
            None => gen_num = Some(w),
            Some(prev) if *prev == w => {}
            Some(_) => return None,
        }
    }
    let alpha = BigRational::new(id_num, mu.denom().clone());
    Some(RadialProfile { rank, alpha })
}

/// Splits a direct-product step measure into exact marginals when the
/// measure is literally their product; returns the factor measures.
pub(crate) fn product_profile(mu: &Measure) -> Option<(Measure, Measure)> {
    let (left, right) = mu.group().backend_product()?;
    if !mu.is_exact() {
        return None;
    }
    let mut left_entries: std::collections::HashMap<Elem, BigInt> = std::collections::HashMap::new();
    let mut right_entries: std::collections::HashMap<Elem, BigInt> = std::collections::HashMap::new();
    for (pair, w) in mu.iter() {
        let (x, y) = Group::split_pair(pair)?;
        *left_entries.entry(x.clone()).or_insert_with(BigInt::zero) += w;
        *right_entries.entry(y.clone()).or_insert_with(BigInt::zero) += w;
    }
    // The support must be the full rectangle and each weight the product
    // of its marginals (cross-multiplied against the total mass).
    if left_entries.len() * right_entries.len() != mu.support_len() {
        return None;
    }
    let denom = mu.denom();
    for (pair, w) in mu.iter() {
        let (x, y) = Group::split_pair(pair)?;
        if w * denom != left_entries[x].clone() * &right_entries[y] {
            return None;
        }
    }
    let to_weights = |entries: std::collections::HashMap<Elem, BigInt>| {
        entries
            .into_iter()
            .map(|(g, num)| (g, BigRational::new(num, denom.clone())))
            .collect::<Vec<_>>()
    };
    let left_mu = Measure::from_weights(left.clone(), to_weights(left_entries)).ok()?;
    let right_mu = Measure::from_weights(right.clone(), to_weights(right_entries)).ok()?;
    Some((left_mu, right_mu))
}

/// Picks the cheapest engine consistent with the options.
pub fn select_engine(mu: &Measure, opts: &WalkOptions) -> EngineKind {
    // A per-step truncation budget is a statement about the convolution
    // itself, so it pins the sparse engine.
    if opts.per_step_truncation.is_some() {
        return if opts.float_mode {
            EngineKind::SparseFloat
        } else {
            EngineKind::Sparse
        };
    }
    if radial_profile(mu).is_some() {
        return if opts.float_mode {
            EngineKind::RadialFloat
        } else {
            EngineKind::Radial
        };
    }
    if !opts.float_mode && product_profile(mu).is_some() {
        return EngineKind::Product;
    }
    if opts.float_mode {
        EngineKind::SparseFloat
    } else {
        EngineKind::Sparse
    }
}

/// Computes the ratio series `r_n(g)` for every target over horizons
/// `1..=n_max`, skipping horizons where the return probability cannot be
/// bounded away from zero. Stops early (recording the cap hit) if the
/// support cap is exceeded.
pub fn walk_ratios(
    mu: &Measure,
    targets: &[Elem],
    n_max: u64,
    opts: &WalkOptions,
) -> Result<WalkOutcome> {
    for t in targets {
        if !mu.group().is_valid(t) {
            return Err(Error::MalformedElement(format!("{t:?}")));
        }
    }
    if n_max == 0 {
        return Ok(WalkOutcome {
            series: targets
                .iter()
                .map(|t| TargetSeries {
                    target: t.clone(),
                    engine: select_engine(mu, opts),
                    data: if opts.float_mode {
                        SeriesData::Float(Vec::new())
                    } else {
                        SeriesData::Exact(Vec::new())
                    },
                })
                .collect(),
            reached_n: 0,
            cap_hit: None,
        });
    }
    match select_engine(mu, opts) {
        EngineKind::Radial => engine::radial_walk(mu, targets, n_max),
        EngineKind::RadialFloat => engine::radial_walk_f64(mu, targets, n_max),
        EngineKind::Product => engine::product_walk(mu, targets, n_max, opts),
        EngineKind::Sparse => engine::sparse_walk(mu, targets, n_max, opts),
        EngineKind::SparseFloat => engine::sparse_walk_f64(mu, targets, n_max, opts),
    }
}

/// Exact interval endpoints for a ratio with a known deficit, in shared
/// numerator units: `[p(g)/(p(e)+d), (p(g)+d)/p(e)]`.
pub(crate) fn ratio_interval(
    num_g: &BigInt,
    num_e: &BigInt,
    deficit: &BigInt,
) -> Option<(BigRational, BigRational, bool)> {
    if num_e.is_zero() {
        return None;
    }
    if deficit.is_zero() {
        let v = BigRational::new(num_g.clone(), num_e.clone());
        return Some((v.clone(), v, true));
    }
    let lo = BigRational::new(num_g.clone(), num_e + deficit);
    let hi = BigRational::new(num_g + deficit, num_e.clone());
    Some((lo, hi, false))
}

/// Convenience: the exact ratio at a single horizon, requiring an exact
/// (deficit-free) walk.
pub fn exact_ratio_at(mu: &Measure, target: &Elem, n: u64, cap: usize) -> Result<BigRational> {
    let power = mu.power(n, cap)?;
    if !power.is_exact() {
        return Err(Error::TruncatedMeasure {
            deficit: power.deficit().to_string(),
        });
    }
    let num_e = power.numerator(&power.group().identity());
    if num_e.is_zero() {
        return Err(Error::ZeroReturn { n });
    }
    Ok(BigRational::new(power.numerator(target), num_e))
}
