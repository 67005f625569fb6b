//! Membership calls on ratio series.
//!
//! A target is called a member when its tail ratios have settled close to
//! 1, a nonmember when they have settled clearly away from 1, and
//! undecided otherwise. All comparisons are exact rational arithmetic on
//! the interval endpoints, so a verdict is a proved statement about the
//! computed series: member uses the farthest endpoint from 1 (the whole
//! interval is near 1), nonmember the nearest (the whole interval is far).

use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::SeriesData;

/// Tail-window decision thresholds.
#[derive(Debug, Clone)]
pub struct ClassifyPolicy {
    /// Number of even-horizon points in the decision window.
    pub window: usize,
    /// Maximum spread (max hi - min lo) for the tail to count as settled.
    pub cauchy_tol: BigRational,
    /// Member call: every endpoint within this distance of 1.
    pub member_dist: BigRational,
    /// Nonmember call: every interval at least this far from 1.
    pub nonmember_dist: BigRational,
}

impl Default for ClassifyPolicy {
    fn default() -> Self {
        ClassifyPolicy {
            window: 20,
            cauchy_tol: BigRational::new(1.into(), 1000.into()),
            member_dist: BigRational::new(1.into(), 50.into()),
            nonmember_dist: BigRational::new(1.into(), 20.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    Nonmember,
    Undecided,
}

/// Evidence backing a verdict.
#[derive(Debug, Clone)]
pub struct MembershipVerdict {
    pub verdict: Verdict,
    /// Even-horizon points actually examined.
    pub points_used: usize,
    /// First and last horizon of the window, when nonempty.
    pub window: Option<(u64, u64)>,
    /// Tail spread: max over the window of hi minus min of lo.
    pub width: Option<BigRational>,
    /// Largest endpoint distance from 1 anywhere in the window.
    pub outer_distance: Option<BigRational>,
    /// Smallest distance from 1 to any window interval.
    pub inner_distance: Option<BigRational>,
    /// Whether the spread passed the settling tolerance.
    pub settled: bool,
    /// Machine-readable reason: `ok`, `insufficient_window`,
    /// `not_settled`, or `between_thresholds`.
    pub note: &'static str,
}

/// Applies the tail-window policy to one series. Points are re-sorted by
/// horizon first, so the verdict is independent of input order.
pub fn classify(data: &SeriesData, policy: &ClassifyPolicy) -> MembershipVerdict {
    let mut points = data.rational_points();
    points.sort_by_key(|p| p.0);
    points.dedup_by_key(|p| p.0);
    let even: Vec<_> = points.into_iter().filter(|p| p.0 % 2 == 0).collect();
    if even.len() < policy.window || policy.window == 0 {
        return MembershipVerdict {
            verdict: Verdict::Undecided,
            points_used: even.len(),
            window: None,
            width: None,
            outer_distance: None,
            inner_distance: None,
            settled: false,
            note: "insufficient_window",
        };
    }
    let tail = &even[even.len() - policy.window..];
    let one = BigRational::one();
    let mut min_lo = tail[0].1.clone();
    let mut max_hi = tail[0].2.clone();
    let mut outer = BigRational::zero();
    let mut inner: Option<BigRational> = None;
    for (_, lo, hi) in tail {
        if *lo < min_lo {
            min_lo = lo.clone();
        }
        if *hi > max_hi {
            max_hi = hi.clone();
        }
        let endpoint_far = (&one - lo).abs().max((&one - hi).abs());
        if endpoint_far > outer {
            outer = endpoint_far;
        }
        // Distance from 1 to the interval [lo, hi]; zero when it straddles 1.
        let gap = if *lo > one {
            lo - &one
        } else if *hi < one {
            &one - hi
        } else {
            BigRational::zero()
        };
        inner = Some(match inner {
            None => gap,
            Some(prev) => prev.min(gap),
        });
    }
    let width = &max_hi - &min_lo;
    let inner = inner.expect("window is nonempty");
    let settled = width <= policy.cauchy_tol;
    let window_span = Some((tail[0].0, tail[tail.len() - 1].0));
    let (verdict, note) = if !settled {
        (Verdict::Undecided, "not_settled")
    } else if outer <= policy.member_dist {
        (Verdict::Member, "ok")
    } else if inner > policy.nonmember_dist {
        (Verdict::Nonmember, "ok")
    } else {
        (Verdict::Undecided, "between_thresholds")
    };
    MembershipVerdict {
        verdict,
        points_used: even.len(),
        window: window_span,
        width: Some(width),
        outer_distance: Some(outer),
        inner_distance: Some(inner),
        settled,
        note,
    }
}
