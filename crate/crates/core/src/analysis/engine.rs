//! Walk drivers behind [`walk_ratios`](super::walk_ratios).

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::ToPrimitive;

use crate::group::Elem;
use crate::measure::Measure;
use crate::radial::{RadialWalk, RadialWalkF64};
use crate::{Error, Result};

use super::{
    product_profile, radial_profile, ratio_interval, CapHit, EngineKind, RatioPoint,
    RatioPointF64, SeriesData, TargetSeries, WalkOptions, WalkOutcome,
};

/// Exact sparse driver: iterated convolution with optional per-step
/// truncation, recording interval ratios for every target.
pub(super) fn sparse_walk(
    mu: &Measure,
    targets: &[Elem],
    n_max: u64,
    opts: &WalkOptions,
) -> Result<WalkOutcome> {
    let identity = mu.group().identity();
    let mut rows: Vec<Vec<RatioPoint>> = vec![Vec::new(); targets.len()];
    let mut state = mu.clone();
    let mut cap_hit = None;
    let mut reached = 0;
    for n in 1..=n_max {
        if n > 1 {
            state = match state.convolve(mu, opts.cap) {
                Ok(next) => next,
                Err(Error::SupportCapExceeded { cap, support }) => {
                    cap_hit = Some(CapHit {
                        at_n: n,
                        cap,
                        support,
                    });
                    break;
                }
                Err(e) => return Err(e),
            };
            if let Some(eps) = &opts.per_step_truncation {
                state = state.truncate(eps)?;
            }
        }
        reached = n;
        let num_e = state.numerator(&identity);
        let deficit = state.deficit_numerator();
        for (idx, t) in targets.iter().enumerate() {
            let num_g = state.numerator(t);
            if let Some((lo, hi, exact)) = ratio_interval(&num_g, &num_e, deficit) {
                rows[idx].push(RatioPoint { n, lo, hi, exact });
            }
        }
    }
    Ok(WalkOutcome {
        series: targets
            .iter()
            .cloned()
            .zip(rows)
            .map(|(target, points)| TargetSeries {
                target,
                engine: EngineKind::Sparse,
                data: SeriesData::Exact(points),
            })
            .collect(),
        reached_n: reached,
        cap_hit,
    })
}

/// f64 sparse driver. State lives in a `BTreeMap` so accumulation order,
/// and therefore every rounding decision, is reproducible run to run.
pub(super) fn sparse_walk_f64(
    mu: &Measure,
    targets: &[Elem],
    n_max: u64,
    opts: &WalkOptions,
) -> Result<WalkOutcome> {
    let group = mu.group().clone();
    let identity = group.identity();
    let step: Vec<(Elem, f64)> = mu
        .sorted_entries()
        .into_iter()
        .map(|(g, num)| {
            let w = BigRational::new(num.clone(), mu.denom().clone())
                .to_f64()
                .unwrap_or(0.0);
            (g.clone(), w)
        })
        .collect();
    let eps = opts
        .per_step_truncation
        .as_ref()
        .and_then(|e| e.to_f64())
        .unwrap_or(0.0);
    let mut state: BTreeMap<Elem, f64> = step.iter().cloned().collect();
    let mut rows: Vec<Vec<RatioPointF64>> = vec![Vec::new(); targets.len()];
    let mut cap_hit = None;
    let mut reached = 0;
    for n in 1..=n_max {
        if n > 1 {
            let mut next: BTreeMap<Elem, f64> = BTreeMap::new();
            let mut over_cap = false;
            for (x, px) in &state {
                for (z, pz) in &step {
                    let y = group.mul(x, z);
                    *next.entry(y).or_insert(0.0) += px * pz;
                }
                if next.len() > opts.cap {
                    over_cap = true;
                    break;
                }
            }
            if over_cap {
                cap_hit = Some(CapHit {
                    at_n: n,
                    cap: opts.cap,
                    support: next.len(),
                });
                break;
            }
            if eps > 0.0 {
                truncate_f64(&mut next, eps);
            }
            state = next;
        }
        reached = n;
        let total: f64 = state.values().sum();
        let deficit = (1.0 - total).max(0.0);
        let p_e = state.get(&identity).copied().unwrap_or(0.0);
        if p_e <= 0.0 {
            continue;
        }
        for (idx, t) in targets.iter().enumerate() {
            let p_g = state.get(t).copied().unwrap_or(0.0);
            rows[idx].push(RatioPointF64 {
                n,
                lo: p_g / (p_e + deficit),
                hi: (p_g + deficit) / p_e,
            });
        }
    }
    Ok(WalkOutcome {
        series: targets
            .iter()
            .cloned()
            .zip(rows)
            .map(|(target, points)| TargetSeries {
                target,
                engine: EngineKind::SparseFloat,
                data: SeriesData::Float(points),
            })
            .collect(),
        reached_n: reached,
        cap_hit,
    })
}

/// Removes the lightest entries whose mass fits in `eps`, ties broken by
/// element order, mirroring the exact truncation rule.
fn truncate_f64(state: &mut BTreeMap<Elem, f64>, eps: f64) {
    let mut order: Vec<(Elem, f64)> = state.iter().map(|(g, w)| (g.clone(), *w)).collect();
    order.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
    let mut removed = 0.0;
    for (g, w) in order {
        if removed + w <= eps {
            removed += w;
            state.remove(&g);
        } else {
            break;
        }
    }
}

/// Exact distance-class driver for lazy-uniform steps on free groups.
pub(super) fn radial_walk(mu: &Measure, targets: &[Elem], n_max: u64) -> Result<WalkOutcome> {
    let profile = radial_profile(mu).expect("caller selected the radial engine");
    let ks: Vec<usize> = targets
        .iter()
        .map(|t| mu.group().word_length(t) as usize)
        .collect();
    let mut walk = RadialWalk::new(profile.rank, &profile.alpha)?;
    let mut rows: Vec<Vec<RatioPoint>> = vec![Vec::new(); targets.len()];
    for n in 1..=n_max {
        walk.step();
        debug_assert_eq!(walk.n(), n);
        for (idx, &k) in ks.iter().enumerate() {
            match walk.ratio(k) {
                Ok(v) => rows[idx].push(RatioPoint {
                    n,
                    lo: v.clone(),
                    hi: v,
                    exact: true,
                }),
                Err(Error::ZeroReturn { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(WalkOutcome {
        series: targets
            .iter()
            .cloned()
            .zip(rows)
            .map(|(target, points)| TargetSeries {
                target,
                engine: EngineKind::Radial,
                data: SeriesData::Exact(points),
            })
            .collect(),
        reached_n: n_max,
        cap_hit: None,
    })
}

/// f64 distance-class driver.
pub(super) fn radial_walk_f64(mu: &Measure, targets: &[Elem], n_max: u64) -> Result<WalkOutcome> {
    let profile = radial_profile(mu).expect("caller selected the radial engine");
    let alpha = profile.alpha.to_f64().unwrap_or(0.0);
    let ks: Vec<usize> = targets
        .iter()
        .map(|t| mu.group().word_length(t) as usize)
        .collect();
    let mut walk = RadialWalkF64::new(profile.rank, alpha)?;
    let mut rows: Vec<Vec<RatioPointF64>> = vec![Vec::new(); targets.len()];
    for n in 1..=n_max {
        walk.step();
        for (idx, &k) in ks.iter().enumerate() {
            let v = walk.ratio(k);
            if v.is_finite() {
                rows[idx].push(RatioPointF64 { n, lo: v, hi: v });
            }
        }
    }
    Ok(WalkOutcome {
        series: targets
            .iter()
            .cloned()
            .zip(rows)
            .map(|(target, points)| TargetSeries {
                target,
                engine: EngineKind::RadialFloat,
                data: SeriesData::Float(points),
            })
            .collect(),
        reached_n: n_max,
        cap_hit: None,
    })
}

/// Coordinate-factorized driver: walks each factor independently and
/// multiplies exact factor ratios pointwise at matching horizons.
pub(super) fn product_walk(
    mu: &Measure,
    targets: &[Elem],
    n_max: u64,
    opts: &WalkOptions,
) -> Result<WalkOutcome> {
    let (phi, psi) = product_profile(mu).expect("caller selected the product engine");
    let mut left_targets: Vec<Elem> = Vec::new();
    let mut right_targets: Vec<Elem> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(targets.len());
    for t in targets {
        let (x, y) =
            crate::group::Group::split_pair(t).ok_or_else(|| Error::MalformedElement(format!("{t:?}")))?;
        let li = match left_targets.iter().position(|u| u == x) {
            Some(i) => i,
            None => {
                left_targets.push(x.clone());
                left_targets.len() - 1
            }
        };
        let ri = match right_targets.iter().position(|u| u == y) {
            Some(i) => i,
            None => {
                right_targets.push(y.clone());
                right_targets.len() - 1
            }
        };
        pairs.push((li, ri));
    }
    let left = super::walk_ratios(&phi, &left_targets, n_max, opts)?;
    let right = super::walk_ratios(&psi, &right_targets, n_max, opts)?;
    let reached = left.reached_n.min(right.reached_n);
    let cap_hit = match (left.cap_hit, right.cap_hit) {
        (Some(a), Some(b)) => Some(if a.at_n <= b.at_n { a } else { b }),
        (a, b) => a.or(b),
    };
    let mut series = Vec::with_capacity(targets.len());
    for (t, (li, ri)) in targets.iter().zip(&pairs) {
        let lp = exact_points(&left.series[*li].data);
        let rp = exact_points(&right.series[*ri].data);
        // Inner join on the horizon: both factor returns must be positive.
        let mut points = Vec::new();
        let mut j = 0usize;
        for p in &lp {
            while j < rp.len() && rp[j].n < p.n {
                j += 1;
            }
            if j < rp.len() && rp[j].n == p.n {
                points.push(RatioPoint {
                    n: p.n,
                    lo: &p.lo * &rp[j].lo,
                    hi: &p.hi * &rp[j].hi,
                    exact: p.exact && rp[j].exact,
                });
            }
        }
        series.push(TargetSeries {
            target: t.clone(),
            engine: EngineKind::Product,
            data: SeriesData::Exact(points),
        });
    }
    Ok(WalkOutcome {
        series,
        reached_n: reached,
        cap_hit,
    })
}

fn exact_points(data: &SeriesData) -> Vec<RatioPoint> {
    match data {
        SeriesData::Exact(v) => v.clone(),
        SeriesData::Float(_) => unreachable!("product engine is exact-only"),
    }
}
