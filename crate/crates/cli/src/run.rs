//! Command orchestration: resolve the spec, run the requested analysis,
//! and write the report files plus a run manifest.
//!
//! Outputs are deterministic byte for byte in exact mode: rationals are
//! reduced, orderings are canonical, and wall-clock timings go to
//! stderr, never into report files.

use crate::ast::ExperimentSpec;
use crate::error::{CliError, Outcome};
use crate::grammar::parse_spec;
use crate::output::{ensure_dir, series_csv, series_file_name, write_atomic};
use crate::resolve::{resolve, Resolved, ResolvedAnalysis};
use num::rational::BigRational;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use walklab_core::analysis::{
    classify, conjugacy_probe, run_verification, CheckStatus, ClassifyPolicy, MembershipVerdict,
    ProbeSource, TargetSeries, Verdict, VerifyConfig, WalkOptions, WalkOutcome,
};
use walklab_core::chain::FactorChain;
use walklab_core::group::{Elem, Group};
use walklab_core::measure::{Aperiodicity, Measure};
use walklab_core::Error;

pub struct RunConfig {
    pub spec_path: PathBuf,
    pub out: PathBuf,
    pub cap: usize,
    pub float: bool,
    pub seed: u64,
    pub inject_fault: bool,
}

pub fn execute(command: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(&cfg.spec_path).map_err(|e| {
        CliError::Io(format!("cannot read {}: {e}", cfg.spec_path.display()))
    })?;
    let spec = parse_spec(&text).map_err(|d| CliError::Spec(d.to_string()))?;
    check_command_shape(command, &spec, cfg)?;
    let base_dir = cfg
        .spec_path
        .parent()
        .map_or_else(|| Path::new(".").to_path_buf(), Path::to_path_buf);
    let mut resolved = resolve(&spec, &base_dir, cfg.cap)?;
    if cfg.inject_fault {
        let measure = resolved.measure.take().expect("checked above");
        resolved.measure = Some(inject_fault(&measure)?);
    }
    ensure_dir(&cfg.out)?;

    let (outputs, request, outcome) = match command {
        "describe" => run_describe(&resolved, cfg)?,
        "walk" => run_walk(&resolved, cfg)?,
        "classify" => run_classify(&resolved, cfg)?,
        "verify" => run_verify(&resolved, cfg)?,
        "probe" => run_probe(&resolved, cfg)?,
        "chain" => run_chain(&resolved, cfg)?,
        other => return Err(CliError::Spec(format!("unknown command `{other}`"))),
    };

    let manifest = json!({
        "command": command,
        "spec": spec.render(),
        "engine": { "name": "walklab", "version": env!("CARGO_PKG_VERSION") },
        "cap": cfg.cap,
        "float": cfg.float,
        "seed": cfg.seed,
        "fault_injected": cfg.inject_fault,
        "measure_validation": resolved.measure.as_ref().map(validation_json),
        "request": request,
        "outputs": outputs,
        "status": outcome.status(),
    });
    write_json(&cfg.out, "manifest.json", &manifest)?;
    Ok(outcome)
}

fn check_command_shape(command: &str, spec: &ExperimentSpec, cfg: &RunConfig) -> Result<(), CliError> {
    if command != "describe" {
        let analysis = spec.analysis.as_ref().ok_or_else(|| {
            CliError::Spec(format!("the spec has no analysis statement for `{command}`"))
        })?;
        if analysis.keyword() != command {
            return Err(CliError::Spec(format!(
                "spec requests `{}` but the command is `{command}`",
                analysis.keyword()
            )));
        }
        if spec.measure.is_none() {
            return Err(CliError::Spec(format!(
                "`{command}` needs a measure statement"
            )));
        }
    }
    if cfg.float && !matches!(command, "walk" | "classify" | "probe") {
        return Err(CliError::Spec(format!(
            "--float applies to walk, classify, and probe; `{command}` is exact-only"
        )));
    }
    if cfg.inject_fault && command != "verify" {
        return Err(CliError::Spec(
            "--inject-fault is a verify-only negative control".into(),
        ));
    }
    if cfg.inject_fault && spec.measure.is_none() {
        return Err(CliError::Spec("nothing to corrupt: no measure".into()));
    }
    Ok(())
}

/// Corrupts an exact measure deterministically: the mass of the inverse
/// of the first non-involution support element is folded onto the
/// element itself, breaking symmetry while keeping total mass one.
fn inject_fault(measure: &Measure) -> Result<Measure, CliError> {
    if !measure.is_exact() {
        return Err(CliError::Spec(
            "fault injection needs an exact (untruncated) measure".into(),
        ));
    }
    let group = measure.group().clone();
    let pivot = measure
        .sorted_entries()
        .into_iter()
        .map(|(x, _)| x.clone())
        .find(|x| group.inv(x) != *x)
        .ok_or_else(|| {
            CliError::Spec(
                "fault injection needs a non-involution support element".into(),
            )
        })?;
    let pivot_inv = group.inv(&pivot);
    let moved = measure.value(&pivot_inv);
    let weights: Vec<(Elem, BigRational)> = measure
        .sorted_entries()
        .into_iter()
        .filter(|(x, _)| **x != pivot_inv)
        .map(|(x, _)| {
            let mut w = measure.value(x);
            if *x == pivot {
                w += &moved;
            }
            (x.clone(), w)
        })
        .collect();
    Measure::from_weights(group, weights).map_err(|e| CliError::Spec(e.to_string()))
}

fn is_cap(e: &Error) -> bool {
    matches!(
        e,
        Error::SupportCapExceeded { .. } | Error::BallCapExceeded { .. }
    )
}

fn q(r: &BigRational) -> String {
    r.to_string()
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("cannot serialize {name}: {e}")))?;
    text.push('\n');
    write_atomic(dir, name, &text)
}

fn validation_json(measure: &Measure) -> Value {
    let report = measure.validate();
    json!({
        "symmetric": report.symmetric,
        "identity_mass": report.identity_mass,
        "aperiodicity": match report.aperiodic {
            Aperiodicity::Proved => "proved",
            Aperiodicity::PeriodTwoRisk => "period_two_risk",
            Aperiodicity::Unknown => "unknown",
        },
        "support_contains_standard_generators": report.support_contains_standard_generators,
        "deficit": q(&measure.deficit()),
        "support": measure.support_len(),
    })
}

fn names(group: &Arc<Group>, elems: &[Elem]) -> Vec<String> {
    elems.iter().map(|e| group.format_elem(e)).collect()
}

fn cap_hit_json(cap_hit: &Option<walklab_core::analysis::CapHit>) -> Value {
    match cap_hit {
        Some(hit) => json!({ "at_n": hit.at_n, "cap": hit.cap, "support": hit.support }),
        None => Value::Null,
    }
}

fn policy_json(policy: &ClassifyPolicy) -> Value {
    json!({
        "window": policy.window,
        "cauchy_tol": q(&policy.cauchy_tol),
        "member_dist": q(&policy.member_dist),
        "nonmember_dist": q(&policy.nonmember_dist),
    })
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Member => "member",
        Verdict::Nonmember => "nonmember",
        Verdict::Undecided => "undecided",
    }
}

/// Shortest-round-trip decimal companion for a report rational whose
/// exact form can run to thousands of digits.
fn approx(r: &BigRational) -> Option<f64> {
    use num::ToPrimitive;
    r.to_f64()
}

fn evidence_json(v: &MembershipVerdict) -> Value {
    json!({
        "points_used": v.points_used,
        "window": v.window.map(|(a, b)| vec![a, b]),
        "width": v.width.as_ref().map(q),
        "width_approx": v.width.as_ref().and_then(approx),
        "outer_distance": v.outer_distance.as_ref().map(q),
        "outer_distance_approx": v.outer_distance.as_ref().and_then(approx),
        "inner_distance": v.inner_distance.as_ref().map(q),
        "inner_distance_approx": v.inner_distance.as_ref().and_then(approx),
        "settled": v.settled,
        "note": v.note,
    })
}

type CommandReport = (Vec<String>, Value, Outcome);

fn run_describe(resolved: &Resolved, cfg: &RunConfig) -> Result<CommandReport, CliError> {
    let group = &resolved.group;
    let doc = json!({
        "group": {
            "descriptor": serde_json::to_value(group.descriptor())
                .map_err(|e| CliError::Io(format!("cannot serialize descriptor: {e}")))?,
            "order": group.order(),
            "generators": names(group, &group.generators()),
        },
        "measure": resolved.measure.as_ref().map(|m| json!({
            "table": m.to_json(),
            "validation": validation_json(m),
        })),
    });
    write_json(&cfg.out, "describe.json", &doc)?;
    Ok((vec!["describe.json".into()], Value::Null, Outcome::Clean))
}

/// Runs the ratio walk and writes one CSV per target; shared by walk
/// and classify.
fn walk_and_write(
    measure: &Measure,
    targets: &[Elem],
    n: u64,
    trunc: Option<BigRational>,
    cfg: &RunConfig,
) -> Result<(WalkOutcome, Vec<String>), CliError> {
    let opts = WalkOptions {
        cap: cfg.cap,
        per_step_truncation: trunc,
        float_mode: cfg.float,
    };
    let outcome = walklab_core::analysis::walk_ratios(measure, targets, n, &opts)?;
    let group = measure.group();
    let mut files = Vec::new();
    for (i, series) in outcome.series.iter().enumerate() {
        let file = series_file_name(i, &group.format_elem(&series.target));
        write_atomic(&cfg.out, &file, &series_csv(series))?;
        files.push(file);
    }
    Ok((outcome, files))
}

fn series_index_json(group: &Arc<Group>, series: &[TargetSeries], files: &[String]) -> Value {
    Value::Array(
        series
            .iter()
            .zip(files)
            .map(|(s, file)| {
                json!({
                    "target": group.format_elem(&s.target),
                    "engine": s.engine.tag(),
                    "points": s.data.len(),
                    "file": file,
                })
            })
            .collect(),
    )
}

fn run_walk(resolved: &Resolved, cfg: &RunConfig) -> Result<CommandReport, CliError> {
    let ResolvedAnalysis::Walk { n, targets, trunc } =
        resolved.analysis.as_ref().expect("shape checked")
    else {
        unreachable!("shape checked");
    };
    let measure = resolved.measure.as_ref().expect("shape checked");
    let (outcome, mut files) = walk_and_write(measure, targets, *n, trunc.clone(), cfg)?;
    let doc = json!({
        "requested_n": n,
        "reached_n": outcome.reached_n,
        "cap_hit": cap_hit_json(&outcome.cap_hit),
        "series": series_index_json(measure.group(), &outcome.series, &files),
    });
    write_json(&cfg.out, "walk.json", &doc)?;
    files.push("walk.json".into());
    let request = json!({
        "n": n,
        "targets": names(measure.group(), targets),
        "trunc": trunc.as_ref().map(q),
    });
    let status = if outcome.cap_hit.is_some() {
        Outcome::CapReached
    } else {
        Outcome::Clean
    };
    Ok((files, request, status))
}

fn run_classify(resolved: &Resolved, cfg: &RunConfig) -> Result<CommandReport, CliError> {
    let ResolvedAnalysis::Classify {
        n,
        targets,
        trunc,
        policy,
    } = resolved.analysis.as_ref().expect("shape checked")
    else {
        unreachable!("shape checked");
    };
    let measure = resolved.measure.as_ref().expect("shape checked");
    let (outcome, mut files) = walk_and_write(measure, targets, *n, trunc.clone(), cfg)?;
    let group = measure.group();
    let verdicts: Vec<Value> = outcome
        .series
        .iter()
        .map(|series| {
            let verdict = classify(&series.data, policy);
            json!({
                "target": group.format_elem(&series.target),
                "verdict": verdict_str(verdict.verdict),
                "policy": policy_json(policy),
                "evidence": evidence_json(&verdict),
            })
        })
        .collect();
    write_json(&cfg.out, "verdicts.json", &Value::Array(verdicts))?;
    files.push("verdicts.json".into());
    let request = json!({
        "n": n,
        "targets": names(group, targets),
        "trunc": trunc.as_ref().map(q),
        "policy": policy_json(policy),
    });
    let status = if outcome.cap_hit.is_some() {
        Outcome::CapReached
    } else {
        Outcome::Clean
    };
    Ok((files, request, status))
}

fn run_verify(resolved: &Resolved, cfg: &RunConfig) -> Result<CommandReport, CliError> {
    let ResolvedAnalysis::Verify { n, subgroup } =
        resolved.analysis.as_ref().expect("shape checked")
    else {
        unreachable!("shape checked");
    };
    let measure = resolved.measure.as_ref().expect("shape checked");
    let group = measure.group();
    let request = json!({
        "n": n,
        "subgroup": subgroup.as_ref().map(|f| names(group, f.elements())),
        "fault_injected": cfg.inject_fault,
    });
    let config = VerifyConfig {
        mu: measure,
        subgroup: subgroup.as_ref(),
        n: *n,
        cap: cfg.cap,
    };
    let results = match run_verification(&config) {
        Ok(results) => results,
        Err(e) if is_cap(&e) => {
            let doc = json!({ "error": e.to_string(), "checks": [] });
            write_json(&cfg.out, "verify.json", &doc)?;
            return Ok((vec!["verify.json".into()], request, Outcome::CapReached));
        }
        Err(e) => return Err(e.into()),
    };
    let any_failed = results.iter().any(|r| r.status == CheckStatus::Failed);
    let checks: Vec<Value> = results
        .iter()
        .map(|r| {
            json!({
                "name": r.name,
                "status": match r.status {
                    CheckStatus::Passed => "passed",
                    CheckStatus::Failed => "failed",
                    CheckStatus::Skipped => "skipped",
                },
                "detail": r.detail,
            })
        })
        .collect();
    let doc = json!({ "checks": checks, "all_passed": !any_failed });
    write_json(&cfg.out, "verify.json", &doc)?;
    let status = if any_failed {
        Outcome::IdentityViolation
    } else {
        Outcome::Clean
    };
    Ok((vec!["verify.json".into()], request, status))
}

fn run_probe(resolved: &Resolved, cfg: &RunConfig) -> Result<CommandReport, CliError> {
    let ResolvedAnalysis::Probe {
        base,
        n,
        source,
        policy,
    } = resolved.analysis.as_ref().expect("shape checked")
    else {
        unreachable!("shape checked");
    };
    let measure = resolved.measure.as_ref().expect("shape checked");
    let group = measure.group().clone();
    let opts = WalkOptions {
        cap: cfg.cap,
        per_step_truncation: None,
        float_mode: cfg.float,
    };
    let report = conjugacy_probe(measure, base, source, *n, &opts, policy)?;
    let candidates: Vec<Value> = report
        .candidates
        .iter()
        .map(|c| {
            json!({
                "conjugator": group.format_elem(&c.conjugator),
                "conjugate": group.format_elem(&c.conjugate),
                "verdict": verdict_str(c.verdict.verdict),
                "evidence": evidence_json(&c.verdict),
                "final_point": c.final_point.as_ref().map(|(n, lo, hi)| {
                    json!([n, q(lo), q(hi)])
                }),
            })
        })
        .collect();
    let doc = json!({
        "base": group.format_elem(&report.base),
        "conjugators": report.conjugators,
        "candidates": candidates,
        "verdicts_agree": report.verdicts_agree,
        "reached_n": report.reached_n,
        "cap_hit": cap_hit_json(&report.cap_hit),
        "policy": policy_json(policy),
    });
    write_json(&cfg.out, "probe.json", &doc)?;
    let request = json!({
        "base": group.format_elem(base),
        "n": n,
        "source": match source {
            ProbeSource::Ball { radius, .. } => json!({ "radius": radius }),
            ProbeSource::Explicit(cands) => json!({ "candidates": names(&group, cands) }),
        },
        "policy": policy_json(policy),
    });
    let status = if report.cap_hit.is_some() {
        Outcome::CapReached
    } else {
        Outcome::Clean
    };
    Ok((vec!["probe.json".into()], request, status))
}

fn run_chain(resolved: &Resolved, cfg: &RunConfig) -> Result<CommandReport, CliError> {
    let ResolvedAnalysis::Chain {
        subgroup,
        n,
        threshold,
    } = resolved.analysis.as_ref().expect("shape checked")
    else {
        unreachable!("shape checked");
    };
    let measure = resolved.measure.as_ref().expect("shape checked");
    let group = measure.group().clone();
    let request = json!({
        "F": names(&group, subgroup.elements()),
        "n": n,
        "threshold": q(threshold),
    });
    let chain = match FactorChain::build(measure, subgroup, cfg.cap) {
        Ok(chain) => chain,
        Err(e) if is_cap(&e) => {
            let doc = json!({ "error": e.to_string() });
            write_json(&cfg.out, "chain.json", &doc)?;
            return Ok((vec!["chain.json".into()], request, Outcome::CapReached));
        }
        Err(e) => return Err(e.into()),
    };
    let profile = chain.mixing_profile(*n, threshold);
    let (rell_outcome, rell_files) = walk_and_write(
        measure,
        chain.states(),
        *n,
        None,
        cfg,
    )?;
    let matrix: Vec<Vec<String>> = chain
        .matrix()
        .iter()
        .map(|row| row.iter().map(q).collect())
        .collect();
    let mixing: Vec<Value> = profile
        .entries
        .iter()
        .map(|(step, tv)| json!([step, q(tv)]))
        .collect();
    let doc = json!({
        "F": names(&group, chain.states()),
        "P": matrix,
        "balanced": chain.detailed_balance(),
        "stationary_uniform": chain.stationary_uniform(),
        "self_loops": chain.self_loops(),
        "identity_mass": q(chain.identity_mass()),
        "mixing": mixing,
        "threshold": q(threshold),
        "settled_at": profile.settled_at,
        "rell": rell_files,
    });
    write_json(&cfg.out, "chain.json", &doc)?;
    let mut files = rell_files;
    files.push("chain.json".into());
    let status = if rell_outcome.cap_hit.is_some() {
        Outcome::CapReached
    } else {
        Outcome::Clean
    };
    Ok((files, request, status))
}
