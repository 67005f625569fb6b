//! Ratio series engines, classification, and the derived diagnostics.

mod common;

use common::*;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use walklab_core::analysis::{
    classify, conjugacy_probe, displacement, exact_ratio_at, kpower_consistency, select_engine,
    spectral_estimate, subgroup_triangle, walk_ratios, ClassifyPolicy, EngineKind, ProbeSource,
    RatioPoint, SeriesData, Verdict, WalkOptions,
};
use walklab_core::radial::RadialWalk;
use walklab_core::Error;

fn exact_opts() -> WalkOptions {
    WalkOptions::default()
}

/// Forces the sparse engine while keeping arithmetic exact.
fn forced_sparse() -> WalkOptions {
    WalkOptions {
        per_step_truncation: Some(BigRational::zero()),
        ..WalkOptions::default()
    }
}

fn float_opts() -> WalkOptions {
    WalkOptions {
        float_mode: true,
        ..WalkOptions::default()
    }
}

fn exact_points(data: &SeriesData) -> &[RatioPoint] {
    match data {
        SeriesData::Exact(v) => v,
        SeriesData::Float(_) => panic!("expected exact series"),
    }
}

#[test]
fn engine_selection() {
    assert_eq!(
        select_engine(&lazy(&free(2), 1, 4), &exact_opts()),
        EngineKind::Radial
    );
    assert_eq!(
        select_engine(&lazy(&free(2), 1, 4), &float_opts()),
        EngineKind::RadialFloat
    );
    assert_eq!(
        select_engine(&lazy(&free(2), 1, 4), &forced_sparse()),
        EngineKind::Sparse
    );
    assert_eq!(select_engine(&f2c3_step(), &exact_opts()), EngineKind::Product);
    assert_eq!(select_engine(&c3_table_step(), &exact_opts()), EngineKind::Sparse);
    // Unequal generator weights break the distance-class symmetry.
    let g = free(1);
    let skew = walklab_core::measure::Measure::from_weights(
        g.clone(),
        vec![(el(&g, "a"), rat(2, 3)), (el(&g, "a^-1"), rat(1, 3))],
    )
    .unwrap();
    assert_eq!(select_engine(&skew, &exact_opts()), EngineKind::Sparse);
}

#[test]
fn radial_agrees_with_sparse_convolution() {
    for (rank, alpha) in [(2u32, (0i64, 1i64)), (2, (1, 4)), (3, (1, 4))] {
        let g = free(rank);
        let mu = lazy(&g, alpha.0, alpha.1);
        let targets = vec![el(&g, "a"), el(&g, "ab"), el(&g, "aba")];
        let fast = walk_ratios(&mu, &targets, 6, &exact_opts()).unwrap();
        let slow = walk_ratios(&mu, &targets, 6, &forced_sparse()).unwrap();
        for (f, s) in fast.series.iter().zip(&slow.series) {
            assert_eq!(f.engine, EngineKind::Radial);
            assert_eq!(s.engine, EngineKind::Sparse);
            let fp = exact_points(&f.data);
            let sp = exact_points(&s.data);
            assert_eq!(fp.len(), sp.len(), "rank {rank} alpha {alpha:?}");
            for (a, b) in fp.iter().zip(sp) {
                assert_eq!(a.n, b.n);
                assert_eq!(a.lo, b.lo, "n={} rank {rank} alpha {alpha:?}", a.n);
                assert!(a.exact && b.exact);
            }
        }
    }
}

#[test]
fn radial_golden_checkpoints() {
    let mut walk = RadialWalk::new(2, &rat(1, 4)).unwrap();
    let golden = [
        (10u64, 0.752534317674_f64),
        (50, 0.835331461331),
        (100, 0.849605065426),
        (200, 0.857468057592),
        (400, 0.861644479231),
    ];
    for (n, expected) in golden {
        walk.advance_to(n);
        assert!(walk.mass_check(), "mass conserved at {n}");
        let got = walk.ratio(1).unwrap().to_f64().unwrap();
        assert!(
            (got - expected).abs() < 1e-9,
            "ratio at {n}: got {got}, expected {expected}"
        );
    }
}

#[test]
fn lazy_line_ratio_closed_form() {
    let g = line();
    let mu = lazy(&g, 1, 2);
    let outcome = walk_ratios(&mu, &[el(&g, "1")], 200, &exact_opts()).unwrap();
    let series = &outcome.series[0];
    assert_eq!(series.engine, EngineKind::Sparse);
    let points = exact_points(&series.data);
    assert_eq!(points.len(), 200);
    for p in points {
        let n = p.n as i64;
        assert_eq!(p.lo, rat(n, n + 1), "closed form at {}", p.n);
        assert!(p.exact);
    }
}

#[test]
fn rank_one_radial_collapse_is_the_line_walk() {
    let free1 = free(1);
    let z = line();
    let fast = walk_ratios(&lazy(&free1, 1, 2), &[el(&free1, "a")], 60, &exact_opts()).unwrap();
    let slow = walk_ratios(&lazy(&z, 1, 2), &[el(&z, "1")], 60, &exact_opts()).unwrap();
    assert_eq!(fast.series[0].engine, EngineKind::Radial);
    let fp = exact_points(&fast.series[0].data);
    let sp = exact_points(&slow.series[0].data);
    for (a, b) in fp.iter().zip(sp) {
        assert_eq!((a.n, &a.lo), (b.n, &b.lo));
    }
}

#[test]
fn product_engine_factorizes_ratios() {
    let mu = f2c3_step();
    let g = f2_c3();
    let targets = vec![el(&g, "(e,c)"), el(&g, "(a,e)"), el(&g, "(a,c)")];
    let outcome = walk_ratios(&mu, &targets, 8, &exact_opts()).unwrap();
    assert!(outcome.cap_hit.is_none());
    let mut radial = RadialWalk::new(2, &rat(1, 4)).unwrap();
    for series in &outcome.series {
        assert_eq!(series.engine, EngineKind::Product);
    }
    for p in exact_points(&outcome.series[0].data) {
        let four_n = BigRational::from_integer(4i64.pow(p.n as u32).into());
        let expected = (&four_n - BigRational::one())
            / (&four_n + BigRational::from_integer(2.into()));
        assert_eq!(p.lo, expected, "finite-factor ratio at {}", p.n);
    }
    for p in exact_points(&outcome.series[1].data) {
        radial.advance_to(p.n);
        assert_eq!(p.lo, radial.ratio(1).unwrap(), "free-factor ratio at {}", p.n);
    }
    // The mixed target is the pointwise product of the two pure ones.
    let pure_c = exact_points(&outcome.series[0].data);
    let pure_a = exact_points(&outcome.series[1].data);
    for ((pc, pa), pm) in pure_c
        .iter()
        .zip(pure_a)
        .zip(exact_points(&outcome.series[2].data))
    {
        assert_eq!(pm.lo, &pc.lo * &pa.lo);
    }
    // And everything agrees with brute-force convolution in the product.
    let slow = walk_ratios(&mu, &targets, 4, &forced_sparse()).unwrap();
    for (fast_series, slow_series) in outcome.series.iter().zip(&slow.series) {
        for (a, b) in exact_points(&fast_series.data)
            .iter()
            .take(4)
            .zip(exact_points(&slow_series.data))
        {
            assert_eq!((a.n, &a.lo), (b.n, &b.lo));
        }
    }
}

#[test]
fn truncated_walk_brackets_the_exact_ratio() {
    let g = free(2);
    let mu = lazy(&g, 1, 4);
    let opts = WalkOptions {
        per_step_truncation: Some(rat(1, 1000)),
        ..WalkOptions::default()
    };
    let truncated = walk_ratios(&mu, &[el(&g, "a")], 10, &opts).unwrap();
    let mut radial = RadialWalk::new(2, &rat(1, 4)).unwrap();
    let points = exact_points(&truncated.series[0].data);
    assert_eq!(points.len(), 10);
    let mut saw_inexact = false;
    for p in points {
        radial.advance_to(p.n);
        let exact = radial.ratio(1).unwrap();
        assert!(p.lo <= exact, "lower bound at {}", p.n);
        assert!(exact <= p.hi, "upper bound at {}", p.n);
        saw_inexact |= !p.exact;
    }
    assert!(saw_inexact, "truncation budget was actually spent");
}

#[test]
fn period_two_walks_report_even_horizons_only() {
    let g = free(2);
    let mu = lazy(&g, 0, 1);
    let outcome = walk_ratios(&mu, &[el(&g, "a"), el(&g, "ab")], 10, &exact_opts()).unwrap();
    for series in &outcome.series {
        for p in exact_points(&series.data) {
            assert_eq!(p.n % 2, 0, "odd horizon emitted");
        }
    }
    let ab = exact_points(&outcome.series[1].data);
    assert_eq!(ab[0].n, 2);
    assert_eq!(ab[0].lo, rat(1, 4));
    // Odd-length targets carry zero mass at even horizons.
    let a = exact_points(&outcome.series[0].data);
    assert!(a.iter().all(|p| p.lo.is_zero() && p.exact));
}

fn exact_series(vals: &[(u64, BigRational)]) -> SeriesData {
    SeriesData::Exact(
        vals.iter()
            .map(|(n, v)| RatioPoint {
                n: *n,
                lo: v.clone(),
                hi: v.clone(),
                exact: true,
            })
            .collect(),
    )
}

fn interval_series(vals: &[(u64, BigRational, BigRational)]) -> SeriesData {
    SeriesData::Exact(
        vals.iter()
            .map(|(n, lo, hi)| RatioPoint {
                n: *n,
                lo: lo.clone(),
                hi: hi.clone(),
                exact: false,
            })
            .collect(),
    )
}

#[test]
fn classify_policy_behaviors() {
    let policy = ClassifyPolicy::default();
    let evens: Vec<u64> = (1..=40).map(|i| 2 * i).collect();

    let ones: Vec<_> = evens.iter().map(|&n| (n, BigRational::one())).collect();
    let verdict = classify(&exact_series(&ones), &policy);
    assert_eq!(verdict.verdict, Verdict::Member);
    assert_eq!(verdict.note, "ok");
    assert_eq!(verdict.width.unwrap(), BigRational::zero());

    let away: Vec<_> = evens.iter().map(|&n| (n, rat(4, 5))).collect();
    let verdict = classify(&exact_series(&away), &policy);
    assert_eq!(verdict.verdict, Verdict::Nonmember);
    assert_eq!(verdict.inner_distance.unwrap(), rat(1, 5));

    let drifting: Vec<_> = evens
        .iter()
        .map(|&n| (n, BigRational::one() - rat(10, n as i64)))
        .collect();
    let verdict = classify(&exact_series(&drifting), &policy);
    assert_eq!(verdict.verdict, Verdict::Undecided);
    assert_eq!(verdict.note, "not_settled");

    let close: Vec<_> = evens.iter().map(|&n| (n, rat(97, 100))).collect();
    let verdict = classify(&exact_series(&close), &policy);
    assert_eq!(verdict.verdict, Verdict::Undecided);
    assert_eq!(verdict.note, "between_thresholds");

    let short: Vec<_> = evens.iter().take(5).map(|&n| (n, BigRational::one())).collect();
    let verdict = classify(&exact_series(&short), &policy);
    assert_eq!(verdict.verdict, Verdict::Undecided);
    assert_eq!(verdict.note, "insufficient_window");

    // Input order cannot matter.
    let mut reversed = ones.clone();
    reversed.reverse();
    assert_eq!(
        classify(&exact_series(&reversed), &policy).verdict,
        Verdict::Member
    );

    // Interval-aware calls: the whole interval must sit near 1 for a
    // member and entirely away from 1 for a nonmember.
    let near: Vec<_> = evens
        .iter()
        .map(|&n| (n, BigRational::one() - rat(1, 2000), BigRational::one()))
        .collect();
    assert_eq!(
        classify(&interval_series(&near), &policy).verdict,
        Verdict::Member
    );
    let far: Vec<_> = evens
        .iter()
        .map(|&n| (n, rat(4, 5) - rat(1, 2000), rat(4, 5)))
        .collect();
    assert_eq!(
        classify(&interval_series(&far), &policy).verdict,
        Verdict::Nonmember
    );
}

#[test]
fn spectral_estimates_with_exact_doubling() {
    // Driftless free walk: the distance-class engine drives checkpoints.
    let report = spectral_estimate(&lazy(&free(2), 0, 1), 64, CAP).unwrap();
    assert_eq!(report.engine, EngineKind::Radial);
    assert!(report.points.iter().all(|p| p.m % 2 == 0));
    assert!(!report.doubling.is_empty());
    assert!(report.doubling.iter().all(|d| d.nondecreasing));
    let rho = report.final_rho.unwrap();
    assert!(rho > 0.80 && rho < 0.8660255, "rho at 64: {rho}");

    // Finite group through the sparse engine, ending off-schedule.
    let report = spectral_estimate(&s3_step(), 12, CAP).unwrap();
    assert_eq!(report.engine, EngineKind::Sparse);
    assert_eq!(report.points.last().unwrap().m, 12);
    assert!(report.doubling.iter().all(|d| d.nondecreasing));
    assert!((report.final_rho.unwrap() - 1.0).abs() < 0.2);
}

#[test]
fn displacement_routes_agree_exactly() {
    let g = free(2);
    let mu = lazy(&g, 1, 4);
    for target in ["a", "ab", "e"] {
        let report = displacement(&mu, &el(&g, target), 3, CAP).unwrap();
        assert!(report.agree, "target {target}");
        if target == "e" {
            assert_eq!(report.direct, BigRational::zero());
            assert_eq!(report.ratio_2n, BigRational::one());
        }
    }
    let report = displacement(&s3_step(), &el(&s3(), "g1"), 3, CAP).unwrap();
    assert!(report.agree);

    // Lazy line walk: |g·xi_n - xi_n|² = 2/(2n+1) for the unit shift.
    let z = line();
    let report = displacement(&lazy(&z, 1, 2), &el(&z, "1"), 5, CAP).unwrap();
    assert!(report.agree);
    assert_eq!(report.direct, rat(2, 11));

    let g3 = cyclic(3);
    let skew = walklab_core::measure::Measure::from_weights(
        g3.clone(),
        vec![(el(&g3, "c"), rat(1, 1))],
    )
    .unwrap();
    assert!(matches!(
        displacement(&skew, &el(&g3, "c"), 2, CAP),
        Err(Error::SymmetryRequired)
    ));
}

#[test]
fn displacement_triangle_inequality() {
    let g = free(2);
    let mu = lazy(&g, 1, 4);
    for (x, y) in [("a", "b"), ("a", "a^-1"), ("ab", "b^-1")] {
        let report = subgroup_triangle(&mu, &el(&g, x), &el(&g, y), 3, CAP).unwrap();
        assert!(report.holds, "pair ({x}, {y})");
    }
    let report = subgroup_triangle(&s3_step(), &el(&s3(), "g1"), &el(&s3(), "g3"), 4, CAP).unwrap();
    assert!(report.holds);
}

#[test]
fn power_route_consistency() {
    let g = c2_c3();
    let mu = lazy(&g, 1, 4);
    let targets = vec![el(&g, "a"), el(&g, "b")];
    for (k, n) in [(2u64, 3u64), (3, 2)] {
        let report = kpower_consistency(&mu, k, n, &targets, CAP).unwrap();
        assert!(report.measures_equal, "k={k} n={n}");
        for (t, a, b, eq) in &report.ratios {
            assert!(eq, "ratio mismatch at {}", g.format_elem(t));
            assert!(a.is_some() && b.is_some());
        }
    }
}

#[test]
fn conjugacy_probe_verdicts_agree() {
    let g = free(2);
    let mu = lazy(&g, 1, 4);
    let policy = ClassifyPolicy {
        window: 10,
        cauchy_tol: rat(1, 10),
        ..ClassifyPolicy::default()
    };
    let report = conjugacy_probe(
        &mu,
        &el(&g, "a"),
        &ProbeSource::Ball {
            radius: 1,
            cap: 1000,
        },
        60,
        &exact_opts(),
        &policy,
    )
    .unwrap();
    assert_eq!(report.conjugators, 5);
    assert_eq!(report.candidates.len(), 3);
    assert!(report.verdicts_agree);
    for c in &report.candidates {
        assert_eq!(c.verdict.verdict, Verdict::Nonmember);
        assert!(c.final_point.is_some());
    }
    assert!(matches!(
        conjugacy_probe(
            &mu,
            &el(&g, "a"),
            &ProbeSource::Explicit(vec![]),
            10,
            &exact_opts(),
            &policy,
        ),
        Err(Error::EmptyCandidates)
    ));
}

#[test]
fn cap_exhaustion_yields_partial_series() {
    let g = free(2);
    let mu = lazy(&g, 1, 4);
    let opts = WalkOptions {
        cap: 200,
        per_step_truncation: Some(BigRational::zero()),
        ..WalkOptions::default()
    };
    let outcome = walk_ratios(&mu, &[el(&g, "a")], 10, &opts).unwrap();
    let hit = outcome.cap_hit.expect("cap must trip");
    assert_eq!(hit.cap, 200);
    assert!(outcome.reached_n < 10);
    assert_eq!(hit.at_n, outcome.reached_n + 1);
    let points = exact_points(&outcome.series[0].data);
    assert_eq!(points.last().unwrap().n, outcome.reached_n);
}

#[test]
fn walks_reject_foreign_targets() {
    let mu = lazy(&free(2), 1, 4);
    let foreign = el(&line(), "1");
    assert!(matches!(
        walk_ratios(&mu, &[foreign], 5, &exact_opts()),
        Err(Error::MalformedElement(_))
    ));
}

#[test]
fn single_horizon_ratio_matches_series() {
    let g = free(2);
    let mu = lazy(&g, 1, 4);
    let series = walk_ratios(&mu, &[el(&g, "a")], 6, &exact_opts()).unwrap();
    let from_series = &exact_points(&series.series[0].data)[5];
    assert_eq!(from_series.n, 6);
    assert_eq!(
        exact_ratio_at(&mu, &el(&g, "a"), 6, CAP).unwrap(),
        from_series.lo
    );
}

#[test]
fn float_engines_track_exact_values() {
    let g = line();
    let outcome = walk_ratios(&lazy(&g, 1, 2), &[el(&g, "1")], 200, &float_opts()).unwrap();
    let series = &outcome.series[0];
    assert_eq!(series.engine, EngineKind::SparseFloat);
    match &series.data {
        SeriesData::Float(points) => {
            let last = points.last().unwrap();
            assert_eq!(last.n, 200);
            assert!((last.lo - 200.0 / 201.0).abs() < 1e-12);
        }
        SeriesData::Exact(_) => panic!("expected float series"),
    }

    let f2 = free(2);
    let outcome = walk_ratios(&lazy(&f2, 1, 4), &[el(&f2, "a")], 10, &float_opts()).unwrap();
    assert_eq!(outcome.series[0].engine, EngineKind::RadialFloat);
    match &outcome.series[0].data {
        SeriesData::Float(points) => {
            let last = points.last().unwrap();
            assert!((last.lo - 0.752534317674).abs() < 1e-9);
        }
        SeriesData::Exact(_) => panic!("expected float series"),
    }
}
