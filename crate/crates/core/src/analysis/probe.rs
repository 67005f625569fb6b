//! Conjugacy probing: ratio behaviour across a conjugacy class sample.
//!
//! Ratio-set membership is a conjugation-invariant property, so the
//! verdicts for `c·g·c⁻¹` over any set of conjugators `c` must agree.
//! The probe computes all conjugate series in one walk pass and reports
//! per-conjugate verdicts together with an agreement flag; disagreement
//! is evidence of an unsettled tail, never of genuine asymmetry.

use num::rational::BigRational;

use crate::group::Elem;
use crate::measure::Measure;
use crate::{Error, Result};

use super::{classify, walk_ratios, CapHit, ClassifyPolicy, MembershipVerdict, WalkOptions};

/// Where the probe's conjugators come from.
#[derive(Debug, Clone)]
pub enum ProbeSource {
    /// Every element of the radius-`radius` ball (cap guards the BFS).
    Ball { radius: u32, cap: usize },
    /// An explicit conjugator list; must be nonempty.
    Explicit(Vec<Elem>),
}

/// One distinct conjugate and the decision made for it.
#[derive(Debug, Clone)]
pub struct ProbeCandidate {
    /// First conjugator (in canonical order) producing this conjugate.
    pub conjugator: Elem,
    pub conjugate: Elem,
    pub verdict: MembershipVerdict,
    /// Last available series point `(n, lo, hi)`.
    pub final_point: Option<(u64, BigRational, BigRational)>,
}

#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub base: Elem,
    /// Conjugators examined (before deduplication of conjugates).
    pub conjugators: usize,
    pub candidates: Vec<ProbeCandidate>,
    /// All candidate verdicts coincide.
    pub verdicts_agree: bool,
    pub reached_n: u64,
    pub cap_hit: Option<CapHit>,
}

/// Classifies every distinct conjugate of `base` by conjugators from
/// `source`, sharing a single multi-target walk.
pub fn conjugacy_probe(
    mu: &Measure,
    base: &Elem,
    source: &ProbeSource,
    n_max: u64,
    walk_opts: &WalkOptions,
    policy: &ClassifyPolicy,
) -> Result<ProbeReport> {
    let group = mu.group().clone();
    if !group.is_valid(base) {
        return Err(Error::MalformedElement(format!("{base:?}")));
    }
    let conjugators: Vec<Elem> = match source {
        ProbeSource::Ball { radius, cap } => group.ball(*radius, *cap)?,
        ProbeSource::Explicit(list) => list.clone(),
    };
    if conjugators.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    // Deduplicate conjugates, keeping the first conjugator for each.
    let mut seen: Vec<(Elem, Elem)> = Vec::new();
    for c in &conjugators {
        let conj = group.mul(&group.mul(c, base), &group.inv(c));
        if !seen.iter().any(|(t, _)| *t == conj) {
            seen.push((conj, c.clone()));
        }
    }
    seen.sort_by(|a, b| a.0.cmp(&b.0));
    let targets: Vec<Elem> = seen.iter().map(|(t, _)| t.clone()).collect();
    let outcome = walk_ratios(mu, &targets, n_max, walk_opts)?;
    let mut candidates = Vec::with_capacity(seen.len());
    for ((conjugate, conjugator), series) in seen.into_iter().zip(&outcome.series) {
        let verdict = classify(&series.data, policy);
        let final_point = series
            .data
            .rational_points()
            .last()
            .map(|(n, lo, hi)| (*n, lo.clone(), hi.clone()));
        candidates.push(ProbeCandidate {
            conjugator,
            conjugate,
            verdict,
            final_point,
        });
    }
    let verdicts_agree = candidates
        .windows(2)
        .all(|w| w[0].verdict.verdict == w[1].verdict.verdict);
    Ok(ProbeReport {
        base: base.clone(),
        conjugators: conjugators.len(),
        candidates,
        verdicts_agree,
        reached_n: outcome.reached_n,
        cap_hit: outcome.cap_hit,
    })
}
