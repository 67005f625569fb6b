//! Exact identity checks and spectral-radius estimation.

use std::collections::HashSet;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};

use crate::group::{Elem, Subgroup};
use crate::measure::Measure;
use crate::radial::RadialWalk;
use crate::{Error, Result};

use super::{product_profile, radial_profile, CapHit, EngineKind};

/// Both routes to the squared displacement `|g·xi_n - xi_n|²` and whether
/// they agreed exactly.
#[derive(Debug, Clone)]
pub struct DisplacementReport {
    pub n: u64,
    /// Sum of squared coordinate differences.
    pub direct: BigRational,
    /// `2 - 2·r_{2n}(g)` from the doubled-horizon ratio.
    pub via_ratio: BigRational,
    /// The ratio at horizon `2n` used by the second route.
    pub ratio_2n: BigRational,
    pub agree: bool,
}

/// Numerator (over the squared denominator) of the squared displacement
/// of the raw n-step vector under translation by `g`, summed over the
/// union of the two supports.
fn displacement_num(xi: &Measure, g: &Elem) -> BigInt {
    let group = xi.group().clone();
    let gi = group.inv(g);
    let mut union: HashSet<Elem> = HashSet::with_capacity(2 * xi.support_len());
    for (x, _) in xi.iter() {
        union.insert(group.mul(g, x));
        union.insert(x.clone());
    }
    let mut acc = BigInt::zero();
    for u in &union {
        let shifted = xi.numerator(&group.mul(&gi, u));
        let plain = xi.numerator(u);
        let d = shifted - plain;
        acc += &d * &d;
    }
    acc
}

/// Numerator of `p_{2n}(g)` as the inner product of the n-step vector
/// with its `g`-translate; no doubled convolution needed. Valid when the
/// vector is symmetric.
fn paired_num(xi: &Measure, g: &Elem) -> BigInt {
    let group = xi.group().clone();
    let mut acc = BigInt::zero();
    for (x, w) in xi.iter() {
        acc += w * xi.numerator(&group.mul(&group.inv(x), g));
    }
    acc
}

/// Computes the squared displacement of the normalized n-step vector
/// both directly and through the doubled-horizon ratio, reporting exact
/// agreement. Requires a verified-symmetric, deficit-free measure.
pub fn displacement(mu: &Measure, g: &Elem, n: u64, cap: usize) -> Result<DisplacementReport> {
    if !mu.is_symmetric() {
        return Err(Error::SymmetryRequired);
    }
    if !mu.is_exact() {
        return Err(Error::TruncatedMeasure {
            deficit: mu.deficit().to_string(),
        });
    }
    let xi = mu.power(n, cap)?;
    let norm_num = paired_num(&xi, &xi.group().identity());
    if norm_num.is_zero() {
        return Err(Error::ZeroReturn { n: 2 * n });
    }
    let direct = BigRational::new(displacement_num(&xi, g), norm_num.clone());
    let ratio_2n = BigRational::new(paired_num(&xi, g), norm_num);
    let two = BigRational::from_integer(2.into());
    let via_ratio = &two - &(&two * &ratio_2n);
    let agree = direct == via_ratio;
    Ok(DisplacementReport {
        n,
        direct,
        via_ratio,
        ratio_2n,
        agree,
    })
}

/// Triangle comparison for squared displacements at one horizon.
#[derive(Debug, Clone)]
pub struct TriangleReport {
    pub n: u64,
    pub disp_g: BigRational,
    pub disp_h: BigRational,
    pub disp_gh: BigRational,
    /// Whether `sqrt(disp_gh) <= sqrt(disp_g) + sqrt(disp_h)`.
    pub holds: bool,
}

/// Verifies the displacement triangle inequality for the product `g·h`
/// entirely in squared form: with `A = disp_gh`, `B = disp_g`,
/// `C = disp_h`, the inequality `sqrt(A) <= sqrt(B) + sqrt(C)` holds iff
/// `A - B - C <= 0` or `(A - B - C)² <= 4·B·C`.
pub fn subgroup_triangle(
    mu: &Measure,
    g: &Elem,
    h: &Elem,
    n: u64,
    cap: usize,
) -> Result<TriangleReport> {
    if !mu.is_symmetric() {
        return Err(Error::SymmetryRequired);
    }
    if !mu.is_exact() {
        return Err(Error::TruncatedMeasure {
            deficit: mu.deficit().to_string(),
        });
    }
    let xi = mu.power(n, cap)?;
    let gh = mu.group().mul(g, h);
    let norm_num = paired_num(&xi, &xi.group().identity());
    if norm_num.is_zero() {
        return Err(Error::ZeroReturn { n: 2 * n });
    }
    let disp_g = BigRational::new(displacement_num(&xi, g), norm_num.clone());
    let disp_h = BigRational::new(displacement_num(&xi, h), norm_num.clone());
    let disp_gh = BigRational::new(displacement_num(&xi, &gh), norm_num);
    let diff = &disp_gh - &disp_g - &disp_h;
    let holds = !diff.is_positive() || {
        let four = BigRational::from_integer(4.into());
        &diff * &diff <= four * &disp_g * &disp_h
    };
    Ok(TriangleReport {
        n,
        disp_g,
        disp_h,
        disp_gh,
        holds,
    })
}

/// Consistency of the two routes to horizon `k·n`: powers of `mu` versus
/// powers of `mu^k`.
#[derive(Debug, Clone)]
pub struct KPowerReport {
    pub k: u64,
    pub n: u64,
    /// The distributions at horizon `k·n` agree entry for entry.
    pub measures_equal: bool,
    /// Per target: ratio through `mu`, ratio through `mu^k`, agreement.
    pub ratios: Vec<(Elem, Option<BigRational>, Option<BigRational>, bool)>,
}

pub fn kpower_consistency(
    mu: &Measure,
    k: u64,
    n: u64,
    targets: &[Elem],
    cap: usize,
) -> Result<KPowerReport> {
    assert!(k >= 1 && n >= 1, "kpower requires k, n >= 1");
    let nu = mu.power(k, cap)?;
    let through_mu = mu.power(k * n, cap)?;
    let through_nu = nu.power(n, cap)?;
    let measures_equal = through_mu == through_nu;
    let identity = mu.group().identity();
    let ratio_of = |m: &Measure, t: &Elem| -> Option<BigRational> {
        let num_e = m.numerator(&identity);
        if num_e.is_zero() {
            None
        } else {
            Some(BigRational::new(m.numerator(t), num_e))
        }
    };
    let ratios = targets
        .iter()
        .map(|t| {
            let a = ratio_of(&through_mu, t);
            let b = ratio_of(&through_nu, t);
            let eq = a == b;
            (t.clone(), a, b, eq)
        })
        .collect();
    Ok(KPowerReport {
        k,
        n,
        measures_equal,
        ratios,
    })
}

/// One spectral checkpoint: `rho_m = p_m(e)^(1/m)`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralPoint {
    pub m: u64,
    pub rho: f64,
}

/// Exact comparison `p_{2m}(e) >= p_m(e)²`, which forces the checkpoint
/// sequence `rho_m` to be nondecreasing along doublings.
#[derive(Debug, Clone, Copy)]
pub struct DoublingCheck {
    pub from: u64,
    pub to: u64,
    pub nondecreasing: bool,
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub points: Vec<SpectralPoint>,
    pub doubling: Vec<DoublingCheck>,
    /// Estimate at the largest computed checkpoint.
    pub final_rho: Option<f64>,
    pub engine: EngineKind,
    pub capped: Option<CapHit>,
}

/// Natural log of a positive big integer, stable far beyond f64 range:
/// the top 53 bits carry the mantissa, the rest contributes `bits·ln 2`.
fn ln_big(x: &BigInt) -> f64 {
    debug_assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 512 {
        x.to_f64().expect("fits in f64 range").ln()
    } else {
        let shift = bits - 53;
        let top = (x >> shift).to_f64().expect("53-bit mantissa");
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn rho_from_return(m: u64, p: &BigRational) -> f64 {
    let ln_p = ln_big(p.numer()) - ln_big(p.denom());
    (ln_p / m as f64).exp()
}

/// Powers-of-two checkpoints up to `n_max`, plus `n_max` itself.
fn spectral_schedule(n_max: u64) -> Vec<u64> {
    let mut schedule = Vec::new();
    let mut m = 1;
    while m <= n_max {
        schedule.push(m);
        m = m.saturating_mul(2);
    }
    if *schedule.last().expect("n_max >= 1") != n_max {
        schedule.push(n_max);
    }
    schedule
}

/// Estimates the spectral radius from return probabilities along a
/// doubling schedule, verifying monotonicity exactly at each doubling.
/// Zero-return checkpoints (odd horizons of a period-2 walk) are skipped.
pub fn spectral_estimate(mu: &Measure, n_max: u64, cap: usize) -> Result<SpectralReport> {
    assert!(n_max >= 1, "spectral estimate requires n_max >= 1");
    if !mu.is_exact() {
        return Err(Error::TruncatedMeasure {
            deficit: mu.deficit().to_string(),
        });
    }
    let schedule = spectral_schedule(n_max);
    let mut returns: Vec<(u64, BigRational)> = Vec::new();
    let mut capped = None;
    let engine;
    if let Some(profile) = radial_profile(mu) {
        engine = EngineKind::Radial;
        let mut walk = RadialWalk::new(profile.rank, &profile.alpha)?;
        for &m in &schedule {
            walk.advance_to(m);
            let p = walk.sphere_mass(0);
            if p.is_positive() {
                returns.push((m, p));
            }
        }
    } else {
        engine = EngineKind::Sparse;
        let identity = mu.group().identity();
        let mut saves: Vec<(u64, Measure)> = Vec::new();
        let mut cur = mu.clone();
        let mut m = 1u64;
        loop {
            let p = BigRational::new(cur.numerator(&identity), cur.denom().clone());
            if p.is_positive() {
                returns.push((m, p));
            }
            saves.push((m, cur.clone()));
            if m.saturating_mul(2) > n_max {
                break;
            }
            cur = match cur.convolve(&cur, cap) {
                Ok(next) => next,
                Err(Error::SupportCapExceeded { cap, support }) => {
                    capped = Some(CapHit {
                        at_n: 2 * m,
                        cap,
                        support,
                    });
                    break;
                }
                Err(e) => return Err(e),
            };
            m *= 2;
        }
        // Final non-power checkpoint from the saved squares.
        if capped.is_none() && !n_max.is_power_of_two() {
            let mut acc: Option<Measure> = None;
            let mut ok = true;
            for (p, meas) in &saves {
                if n_max & p != 0 {
                    let next = match acc.take() {
                        None => meas.clone(),
                        Some(a) => match a.convolve(meas, cap) {
                            Ok(next) => next,
                            Err(Error::SupportCapExceeded { cap, support }) => {
                                capped = Some(CapHit {
                                    at_n: n_max,
                                    cap,
                                    support,
                                });
                                ok = false;
                                break;
                            }
                            Err(e) => return Err(e),
                        },
                    };
                    acc = Some(next);
                }
            }
            if ok {
                let final_m = acc.expect("n_max >= 1");
                let p = BigRational::new(final_m.numerator(&identity), final_m.denom().clone());
                if p.is_positive() {
                    returns.push((n_max, p));
                }
            }
        }
    }
    let points: Vec<SpectralPoint> = returns
        .iter()
        .map(|(m, p)| SpectralPoint {
            m: *m,
            rho: rho_from_return(*m, p),
        })
        .collect();
    let mut doubling = Vec::new();
    for (m, p) in &returns {
        if let Some((m2, q)) = returns.iter().find(|(m2, _)| *m2 == 2 * m) {
            doubling.push(DoublingCheck {
                from: *m,
                to: *m2,
                nondecreasing: *q >= p * p,
            });
        }
    }
    Ok(SpectralReport {
        final_rho: points.last().map(|p| p.rho),
        points,
        doubling,
        engine,
        capped,
    })
}

/// Outcome of one verification check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckResult {
    fn passed(name: &'static str, detail: impl Into<String>) -> Self {
        CheckResult {
            name,
            status: CheckStatus::Passed,
            detail: detail.into(),
        }
    }
    fn failed(name: &'static str, detail: impl Into<String>) -> Self {
        CheckResult {
            name,
            status: CheckStatus::Failed,
            detail: detail.into(),
        }
    }
    fn skipped(name: &'static str, detail: impl Into<String>) -> Self {
        CheckResult {
            name,
            status: CheckStatus::Skipped,
            detail: detail.into(),
        }
    }
    fn of(name: &'static str, ok: bool, detail: impl Into<String>) -> Self {
        if ok {
            Self::passed(name, detail)
        } else {
            Self::failed(name, detail)
        }
    }
}

/// Inputs to the verification suite.
#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig<'a> {
    pub mu: &'a Measure,
    /// Finite subgroup for the smoothing and chain checks; those checks
    /// are skipped without it.
    pub subgroup: Option<&'a Subgroup>,
    /// Horizon used by the power-based identities.
    pub n: u64,
    pub cap: usize,
}

/// Runs the built-in identity suite against one step measure, exactly.
/// Every check is a theorem for valid inputs, so any failure indicates a
/// corrupted input or a broken invariant, never numerical noise.
pub fn run_verification(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mu = cfg.mu;
    let n = cfg.n.max(2);
    let cap = cfg.cap;
    let group = mu.group().clone();
    let mut results = Vec::new();

    let delta = Measure::delta(group.clone());
    let left = delta.convolve(mu, cap)?;
    let right = mu.convolve(&delta, cap)?;
    results.push(CheckResult::of(
        "delta_identity",
        left == *mu && right == *mu,
        "point mass at the identity is a two-sided convolution unit",
    ));

    if mu.validate().symmetric {
        let power = mu.power(n, cap)?;
        let fresh = power.validate().symmetric;
        results.push(CheckResult::of(
            "power_symmetry",
            fresh,
            format!("step {n} distribution re-verified entry by entry"),
        ));
    } else {
        results.push(CheckResult::failed(
            "power_symmetry",
            "step measure is not symmetric",
        ));
    }

    {
        let gens = group.generators();
        let sample: Vec<_> = gens.into_iter().take(2).collect();
        let mut ok = true;
        let mut tested = 0;
        for g in &sample {
            let conj_then_power = mu.conjugate(g).power(n, cap)?;
            let power_then_conj = mu.power(n, cap)?.conjugate(g);
            tested += 1;
            if conj_then_power != power_then_conj {
                ok = false;
                break;
            }
        }
        results.push(CheckResult::of(
            "conjugation_covariance",
            ok,
            format!("conjugation commutes with taking step-{n} distributions ({tested} conjugators)"),
        ));
    }

    match cfg.subgroup {
        Some(f) => {
            let smoothed = mu.smooth(f)?;
            let pi = Measure::uniform_on(f);
            let sandwich = pi.convolve(mu, cap)?.convolve(&pi, cap)?;
            let same = smoothed == sandwich;
            let power = smoothed.power(n, cap)?;
            let mut coset_ok = true;
            let elems: Vec<Elem> = power
                .sorted_entries()
                .into_iter()
                .map(|(g, _)| g.clone())
                .take(500)
                .collect();
            'outer: for x in &elems {
                let base = power.numerator(x);
                for f1 in f.elements() {
                    for f2 in f.elements() {
                        let shifted = group.mul(&group.mul(f1, x), f2);
                        if power.numerator(&shifted) != base {
                            coset_ok = false;
                            break 'outer;
                        }
                    }
                }
            }
            results.push(CheckResult::of(
                "smoothing_invariance",
                same && coset_ok,
                format!(
                    "two-sided average equals the sandwich convolution and its step-{n} \
                     distribution is constant on double cosets ({} support points checked)",
                    elems.len()
                ),
            ));
        }
        None => results.push(CheckResult::skipped(
            "smoothing_invariance",
            "no finite subgroup supplied",
        )),
    }

    match product_profile(mu) {
        Some((phi, psi)) => {
            let assembled = Measure::product(
                &phi.power(n, cap)?,
                &psi.power(n, cap)?,
                group.clone(),
            )?;
            let direct = mu.power(n, cap)?;
            results.push(CheckResult::of(
                "product_factorization",
                assembled == direct,
                format!("step-{n} distribution splits coordinatewise"),
            ));
        }
        None => results.push(CheckResult::skipped(
            "product_factorization",
            "step measure is not a coordinate product",
        )),
    }

    {
        let g = group
            .generators()
            .into_iter()
            .next()
            .unwrap_or_else(|| group.identity());
        match displacement(mu, &g, n, cap) {
            Ok(report) => results.push(CheckResult::of(
                "displacement_identity",
                report.agree,
                format!(
                    "direct and ratio routes to the squared displacement of {} agree at step {n}",
                    group.format_elem(&g)
                ),
            )),
            Err(Error::SymmetryRequired) => results.push(CheckResult::failed(
                "displacement_identity",
                "step measure is not symmetric",
            )),
            Err(e) => return Err(e),
        }
    }

    {
        let report = kpower_consistency(mu, 2, 3, &[], cap)?;
        results.push(CheckResult::of(
            "kpower_consistency",
            report.measures_equal,
            "power of a power equals the straight power at horizon 6",
        ));
    }

    match cfg.subgroup {
        Some(f) => match crate::chain::FactorChain::build(mu, f, cap) {
            Ok(chain) => {
                let balanced = chain.detailed_balance();
                let stationary = chain.stationary_uniform();
                results.push(CheckResult::of(
                    "detailed_balance",
                    balanced && stationary,
                    "factor chain is reversible with uniform stationary law",
                ));
            }
            // A non-normal subgroup or one outside supp(kappa) breaks the chain's
            // hypotheses, so there is no balance identity to violate.
            Err(
                e @ (Error::NormalityViolation { .. } | Error::SubgroupNotInSupport { .. }),
            ) => {
                results.push(CheckResult::skipped("detailed_balance", e.to_string()));
            }
            Err(e) => return Err(e),
        },
        None => results.push(CheckResult::skipped(
            "detailed_balance",
            "no finite subgroup supplied",
        )),
    }

    Ok(results)
}
