//! Finitely supported exact-rational probability measures and convolution.
//!
//! A measure keeps integer numerators over one shared denominator, so
//! convolution needs no per-entry rational reduction: numerators multiply and
//! add, denominators multiply once per operation, and the representation is
//! re-normalized by a single gcd pass at the end. Mass removed by truncation
//! is carried as an explicit deficit numerator, preserving the invariant
//! `sum(weights) + deficit = 1` as an exact identity at every step.

use std::collections::HashMap;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::group::{Elem, Group, GroupDescriptor, Subgroup};
use crate::{Error, Result};

/// A finitely supported measure with total mass `1 - deficit`.
#[derive(Clone)]
pub struct Measure {
    group: Arc<Group>,
    entries: HashMap<Elem, BigInt>,
    denom: BigInt,
    deficit: BigInt,
    symmetric: bool,
    declared_generating: bool,
}

/// How confident the validator is that walks driven by the measure have
/// period 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aperiodicity {
    /// Positive identity mass forces period 1.
    Proved,
    /// Zero identity mass with a symmetric measure: the period is 1 or 2,
    /// and 2 is possible.
    PeriodTwoRisk,
    /// Zero identity mass, symmetry unverified.
    Unknown,
}

/// Outcome of [`Measure::validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub symmetric: bool,
    /// Identity mass as a reduced rational string.
    pub identity_mass: String,
    pub aperiodic: Aperiodicity,
    pub support_contains_standard_generators: bool,
}

impl PartialEq for Measure {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group
            && self.denom == other.denom
            && self.deficit == other.deficit
            && self.entries == other.entries
    }
}
impl Eq for Measure {}

impl std::fmt::Debug for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Measure({} entries over {}, deficit {})",
            self.entries.len(),
            self.denom,
            self.deficit
        )
    }
}

/// Divides the whole representation by the gcd of every numerator, the
/// deficit, and the denominator, producing the unique reduced form.
fn finish(
    group: Arc<Group>,
    mut entries: HashMap<Elem, BigInt>,
    mut denom: BigInt,
    mut deficit: BigInt,
    symmetric: bool,
) -> Measure {
    debug_assert!(denom.is_positive());
    debug_assert!(!deficit.is_negative());
    entries.retain(|_, v| !v.is_zero());
    let mut g = denom.clone();
    g = g.gcd(&deficit);
    for v in entries.values() {
        if g.is_one() {
            break;
        }
        g = g.gcd(v);
    }
    if !g.is_one() {
        denom /= &g;
        deficit /= &g;
        for v in entries.values_mut() {
            *v /= &g;
        }
    }
    let declared_generating = {
        let gens = group.generators();
        gens.iter().all(|s| entries.contains_key(s))
    };
    debug_assert_eq!(
        entries.values().sum::<BigInt>() + &deficit,
        denom,
        "mass accounting violated"
    );
    Measure {
        group,
        entries,
        denom,
        deficit,
        symmetric,
        declared_generating,
    }
}

impl Measure {
    /// Point mass at the identity; the convolution unit.
    pub fn delta(group: Arc<Group>) -> Measure {
        let mut entries = HashMap::new();
        entries.insert(group.identity(), BigInt::one());
        finish(group, entries, BigInt::one(), BigInt::zero(), true)
    }

    /// Mass `alpha` at the identity and `(1-alpha)/|S|` on each element of
    /// the standard symmetric generating set `S`.
    pub fn lazy_uniform(group: Arc<Group>, alpha: &BigRational) -> Result<Measure> {
        if alpha.is_negative() || *alpha >= BigRational::one() {
            return Err(Error::LazinessRange(alpha.to_string()));
        }
        let gens = group.generators();
        let count = BigInt::from(gens.len());
        let (a, b) = (alpha.numer().clone(), alpha.denom().clone());
        let denom = &count * &b;
        let mut entries = HashMap::new();
        if !a.is_zero() {
            entries.insert(group.identity(), &count * &a);
        }
        let gen_mass = &b - &a;
        for s in gens {
            entries.insert(s, gen_mass.clone());
        }
        let mut m = finish(group, entries, denom, BigInt::zero(), false);
        m.symmetric = m.verify_symmetric();
        Ok(m)
    }

    /// Measure from explicit weights, which must be positive, keyed by
    /// distinct canonical elements, and sum to exactly 1.
    pub fn from_weights(group: Arc<Group>, weights: Vec<(Elem, BigRational)>) -> Result<Measure> {
        let mut denom = BigInt::one();
        for (g, w) in &weights {
            if !group.is_valid(g) {
                return Err(Error::MalformedElement(format!("{g:?}")));
            }
            if !w.is_positive() {
                return Err(Error::BadWeights(format!("weight {w} at {}", group.format_elem(g))));
            }
            denom = denom.lcm(w.denom());
        }
        let mut entries: HashMap<Elem, BigInt> = HashMap::with_capacity(weights.len());
        let mut sum = BigInt::zero();
        for (g, w) in weights {
            let num = w.numer() * (&denom / w.denom());
            sum += &num;
            if entries.insert(g, num).is_some() {
                return Err(Error::BadWeights("duplicate element in weight list".into()));
            }
        }
        if sum != denom {
            return Err(Error::BadWeights(
                BigRational::new(sum, denom).to_string(),
            ));
        }
        let mut m = finish(group, entries, denom, BigInt::zero(), false);
        m.symmetric = m.verify_symmetric();
        Ok(m)
    }

    /// Uniform measure on a finite subgroup.
    pub fn uniform_on(subgroup: &Subgroup) -> Measure {
        let group = subgroup.parent().clone();
        let entries = subgroup
            .elements()
            .iter()
            .map(|f| (f.clone(), BigInt::one()))
            .collect();
        finish(
            group,
            entries,
            BigInt::from(subgroup.len()),
            BigInt::zero(),
            true,
        )
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    /// Number of support elements.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Exact weight at `g` (0 off the support).
    pub fn value(&self, g: &Elem) -> BigRational {
        match self.entries.get(g) {
            Some(num) => BigRational::new(num.clone(), self.denom.clone()),
            None => BigRational::zero(),
        }
    }

    /// Raw numerator at `g` over [`Measure::denom`].
    pub fn numerator(&self, g: &Elem) -> BigInt {
        self.entries.get(g).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    /// Total mass removed by truncation, as an exact rational.
    pub fn deficit(&self) -> BigRational {
        BigRational::new(self.deficit.clone(), self.denom.clone())
    }

    /// Deficit numerator over [`Measure::denom`], the same units as
    /// [`Measure::numerator`].
    pub fn deficit_numerator(&self) -> &BigInt {
        &self.deficit
    }

    pub fn is_exact(&self) -> bool {
        self.deficit.is_zero()
    }

    /// Identity mass.
    pub fn identity_mass(&self) -> BigRational {
        self.value(&self.group.identity())
    }

    /// Whether the symmetry flag has been verified.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Support iteration in undefined order; use [`Measure::sorted_entries`]
    /// for deterministic output.
    pub fn iter(&self) -> impl Iterator<Item = (&Elem, &BigInt)> {
        self.entries.iter()
    }

    pub fn contains(&self, g: &Elem) -> bool {
        self.entries.contains_key(g)
    }

    /// Entries sorted by canonical element order.
    pub fn sorted_entries(&self) -> Vec<(&Elem, &BigInt)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    fn verify_symmetric(&self) -> bool {
        self.entries.iter().all(|(g, w)| {
            let gi = self.group.inv(g);
            self.entries.get(&gi) == Some(w)
        })
    }

    fn require_same_group(&self, other: &Measure) -> Result<()> {
        if Arc::ptr_eq(&self.group, &other.group) || self.group == other.group {
            Ok(())
        } else {
            Err(Error::MixedGroups)
        }
    }

    /// Exact sparse convolution `(self * other)(y) = sum_x self(x)·other(x⁻¹y)`.
    ///
    /// The support may not exceed `cap` entries. The deficit of the result is
    /// the exact mass shortfall `1 - sum(weights)`, which is at most the sum
    /// of the operands' deficits.
    pub fn convolve(&self, other: &Measure, cap: usize) -> Result<Measure> {
        self.require_same_group(other)?;
        let mut out: HashMap<Elem, BigInt> =
            HashMap::with_capacity(self.entries.len().max(other.entries.len()));
        for (x, px) in &self.entries {
            for (z, pz) in &other.entries {
                let y = self.group.mul(x, z);
                let prod = px * pz;
                match out.get_mut(&y) {
                    Some(acc) => *acc += prod,
                    None => {
                        out.insert(y, prod);
                    }
                }
            }
            if out.len() > cap {
                return Err(Error::SupportCapExceeded {
                    cap,
                    support: out.len(),
                });
            }
        }
        let denom = &self.denom * &other.denom;
        let total: BigInt = out.values().sum();
        let deficit = &denom - total;
        Ok(finish(self.group.clone(), out, denom, deficit, false))
    }

    /// `n`-fold convolution power by binary squaring.
    pub fn power(&self, n: u64, cap: usize) -> Result<Measure> {
        assert!(n >= 1, "power requires n >= 1");
        let mut result: Option<Measure> = None;
        let mut base = self.clone();
        let mut k = n;
        loop {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(acc) => acc.convolve(&base, cap)?,
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = base.convolve(&base, cap)?;
        }
        let mut m = result.expect("n >= 1");
        // Powers of one symmetric measure stay symmetric: reversing every
        // factor of a length-n product chain maps the chain set bijectively.
        if self.symmetric {
            m.symmetric = true;
        }
        Ok(m)
    }

    /// The conjugated measure `mu_g(x) = mu(g⁻¹xg)`.
    pub fn conjugate(&self, g: &Elem) -> Measure {
        let gi = self.group.inv(g);
        let entries = self
            .entries
            .iter()
            .map(|(x, w)| (self.group.mul(&self.group.mul(g, x), &gi), w.clone()))
            .collect();
        finish(
            self.group.clone(),
            entries,
            self.denom.clone(),
            self.deficit.clone(),
            self.symmetric,
        )
    }

    /// Two-sided smoothing `(1/|F|²)·sum_{f1,f2 in F} mu(f1·x·f2)` by the
    /// uniform measure on a finite subgroup.
    pub fn smooth(&self, subgroup: &Subgroup) -> Result<Measure> {
        if **subgroup.parent() != *self.group {
            return Err(Error::GroupMismatch(
                "subgroup belongs to a different group".into(),
            ));
        }
        let fs = subgroup.elements();
        let size = BigInt::from(fs.len());
        let mut out: HashMap<Elem, BigInt> = HashMap::with_capacity(self.entries.len());
        for f1 in fs {
            for f2 in fs {
                for (x, w) in &self.entries {
                    let y = self.group.mul(&self.group.mul(f1, x), f2);
                    match out.get_mut(&y) {
                        Some(acc) => *acc += w,
                        None => {
                            out.insert(y, w.clone());
                        }
                    }
                }
            }
        }
        let denom = &self.denom * &size * &size;
        let deficit = &self.deficit * &size * &size;
        Ok(finish(self.group.clone(), out, denom, deficit, self.symmetric))
    }

    /// Product measure on a direct-product group: `(x,y) ↦ phi(x)·psi(y)`.
    pub fn product(phi: &Measure, psi: &Measure, product_group: Arc<Group>) -> Result<Measure> {
        let (left, right) = product_group
            .backend_product()
            .ok_or_else(|| Error::GroupMismatch("product measure needs a direct-product group".into()))?;
        if **left != *phi.group || **right != *psi.group {
            return Err(Error::GroupMismatch(
                "factor measures do not match the product group's factors".into(),
            ));
        }
        let mut entries = HashMap::with_capacity(phi.entries.len() * psi.entries.len());
        for (x, wx) in &phi.entries {
            for (y, wy) in &psi.entries {
                entries.insert(Group::pair(x.clone(), y.clone()), wx * wy);
            }
        }
        let denom = &phi.denom * &psi.denom;
        let total: BigInt = entries.values().sum();
        let deficit = &denom - total;
        let symmetric = phi.symmetric && psi.symmetric;
        Ok(finish(product_group, entries, denom, deficit, symmetric))
    }

    /// Removes lowest-weight entries whose total mass stays within `eps`,
    /// accounting the removed mass into the deficit. Remaining weights are
    /// untouched, so the result is a pointwise lower bound of `self` and
    /// `self(x) <= result(x) + deficit` for every `x`.
    pub fn truncate(&self, eps: &BigRational) -> Result<Measure> {
        if eps.is_negative() || *eps >= BigRational::one() {
            return Err(Error::TruncationRange(eps.to_string()));
        }
        if eps.is_zero() || self.entries.is_empty() {
            return Ok(self.clone());
        }
        // Budget in numerator units: removed <= eps·denom.
        let budget_num = eps.numer() * &self.denom;
        let budget_den = eps.denom().clone();
        let mut order: Vec<(&Elem, &BigInt)> = self.entries.iter().collect();
        order.sort_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.cmp(b.0)));
        let mut removed = BigInt::zero();
        let mut dropped: Vec<Elem> = Vec::new();
        for (g, w) in order {
            let candidate = &removed + w;
            if &candidate * &budget_den <= budget_num {
                removed = candidate;
                dropped.push(g.clone());
            } else {
                break;
            }
        }
        if dropped.is_empty() {
            return Ok(self.clone());
        }
        let mut entries = self.entries.clone();
        for g in &dropped {
            entries.remove(g);
        }
        let deficit = &self.deficit + removed;
        Ok(finish(
            self.group.clone(),
            entries,
            self.denom.clone(),
            deficit,
            false,
        ))
    }

    /// Keeps at most the `cap` heaviest entries, moving the rest into the
    /// deficit; ties are resolved toward keeping earlier canonical elements.
    pub fn truncate_to_cap(&self, cap: usize) -> Measure {
        if self.entries.len() <= cap {
            return self.clone();
        }
        let mut order: Vec<(&Elem, &BigInt)> = self.entries.iter().collect();
        // Heaviest first; among equals, canonical order.
        order.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        let mut entries = HashMap::with_capacity(cap);
        let mut kept = BigInt::zero();
        for (g, w) in order.into_iter().take(cap) {
            kept += w;
            entries.insert(g.clone(), w.clone());
        }
        let deficit = &self.denom - kept;
        finish(
            self.group.clone(),
            entries,
            self.denom.clone(),
            deficit,
            false,
        )
    }

    /// Fresh validation of the standing hypotheses: symmetry by exhaustive
    /// inversion, aperiodicity by identity mass, and the sufficient
    /// generation check `supp ⊇ standard generators`.
    pub fn validate(&self) -> ValidationReport {
        let symmetric = self.verify_symmetric();
        let identity_mass = self.identity_mass();
        let aperiodic = if identity_mass.is_positive() {
            Aperiodicity::Proved
        } else if symmetric {
            Aperiodicity::PeriodTwoRisk
        } else {
            Aperiodicity::Unknown
        };
        ValidationReport {
            symmetric,
            identity_mass: identity_mass.to_string(),
            aperiodic,
            support_contains_standard_generators: self.declared_generating,
        }
    }

    /// The generation assertion flag (support contains the standard set).
    pub fn declared_generating(&self) -> bool {
        self.declared_generating
    }

    /// Serializes to the measure JSON document
    /// `{group, entries: [[element, "p/q"], ...], deficit: "p/q"}` with
    /// entries in canonical element order.
    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<(String, String)> = self
            .sorted_entries()
            .into_iter()
            .map(|(g, num)| {
                (
                    self.group.format_elem(g),
                    BigRational::new(num.clone(), self.denom.clone()).to_string(),
                )
            })
            .collect();
        serde_json::json!({
            "group": self.group.descriptor(),
            "entries": entries,
            "deficit": self.deficit().to_string(),
        })
    }

    /// Reads the measure JSON document produced by [`Measure::to_json`].
    pub fn from_json(value: &serde_json::Value) -> Result<Measure> {
        #[derive(Deserialize)]
        struct Doc {
            group: GroupDescriptor,
            entries: Vec<(String, String)>,
            deficit: String,
        }
        let doc: Doc = serde_json::from_value(value.clone())
            .map_err(|e| Error::Serialization(e.to_string()))?;
        let group = crate::group::build_group(doc.group)?;
        let deficit: BigRational = doc
            .deficit
            .parse()
            .map_err(|_| Error::Serialization(format!("bad deficit {:?}", doc.deficit)))?;
        if deficit.is_negative() || deficit >= BigRational::one() {
            return Err(Error::Serialization(format!("deficit {deficit} out of range")));
        }
        let mut denom = deficit.denom().clone();
        let mut parsed: Vec<(Elem, BigRational)> = Vec::with_capacity(doc.entries.len());
        for (text, wtext) in &doc.entries {
            let g = group.parse_elem(text)?;
            let w: BigRational = wtext
                .parse()
                .map_err(|_| Error::Serialization(format!("bad weight {wtext:?}")))?;
            if !w.is_positive() {
                return Err(Error::Serialization(format!("weight {w} at {text} not positive")));
            }
            denom = denom.lcm(w.denom());
            parsed.push((g, w));
        }
        let mut entries: HashMap<Elem, BigInt> = HashMap::with_capacity(parsed.len());
        let mut sum = BigInt::zero();
        for (g, w) in parsed {
            let num = w.numer() * (&denom / w.denom());
            sum += &num;
            if entries.insert(g, num).is_some() {
                return Err(Error::Serialization("duplicate element in entries".into()));
            }
        }
        let deficit_num = deficit.numer() * (&denom / deficit.denom());
        if &sum + &deficit_num != denom {
            return Err(Error::Serialization(
                "entries and deficit do not sum to 1".into(),
            ));
        }
        let mut m = finish(group, entries, denom, deficit_num, false);
        m.symmetric = m.verify_symmetric();
        Ok(m)
    }
}
