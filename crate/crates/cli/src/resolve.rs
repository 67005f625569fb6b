//! Resolution of a parsed spec against the group backends: descriptors
//! are built, element literals validated, and analysis parameters
//! materialized with their defaults.

use crate::ast::*;
use crate::error::CliError;
use num::rational::BigRational;
use std::path::Path;
use std::sync::Arc;
use walklab_core::analysis::{ClassifyPolicy, ProbeSource};
use walklab_core::group::{build_group, Elem, Group, GroupDescriptor, Subgroup, TableSpec};
use walklab_core::measure::Measure;

/// Default total-variation threshold for chain mixing profiles.
pub fn default_threshold() -> BigRational {
    BigRational::new(1.into(), 1_000_000.into())
}

/// Default horizon for the verification suite.
pub const DEFAULT_VERIFY_N: u64 = 6;

pub struct Resolved {
    pub group: Arc<Group>,
    pub measure: Option<Measure>,
    pub analysis: Option<ResolvedAnalysis>,
}

pub enum ResolvedAnalysis {
    Walk {
        n: u64,
        targets: Vec<Elem>,
        trunc: Option<BigRational>,
    },
    Classify {
        n: u64,
        targets: Vec<Elem>,
        trunc: Option<BigRational>,
        policy: ClassifyPolicy,
    },
    Verify {
        n: u64,
        subgroup: Option<Subgroup>,
    },
    Probe {
        base: Elem,
        n: u64,
        source: ProbeSource,
        policy: ClassifyPolicy,
    },
    Chain {
        subgroup: Subgroup,
        n: u64,
        threshold: BigRational,
    },
}

fn spec_err(e: impl std::fmt::Display) -> CliError {
    CliError::Spec(e.to_string())
}

fn descriptor(expr: &GroupExpr, base_dir: &Path) -> Result<GroupDescriptor, CliError> {
    Ok(match expr {
        GroupExpr::Free(d) => GroupDescriptor::Free { rank: *d },
        GroupExpr::Cyclic(m) => GroupDescriptor::Cyclic { order: *m },
        GroupExpr::Lattice(d) => GroupDescriptor::Lattice { dim: *d },
        GroupExpr::FiniteTable(path) => {
            let full = base_dir.join(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| CliError::Io(format!("cannot read {}: {e}", full.display())))?;
            let table: TableSpec = serde_json::from_str(&text).map_err(|e| {
                CliError::Spec(format!("malformed table document {}: {e}", full.display()))
            })?;
            GroupDescriptor::FiniteTable(table)
        }
        GroupExpr::FreeProduct(factors) => GroupDescriptor::FreeProduct {
            factors: factors
                .iter()
                .map(|f| descriptor(f, base_dir))
                .collect::<Result<_, _>>()?,
        },
        GroupExpr::DirectProduct(l, r) => GroupDescriptor::DirectProduct {
            left: Box::new(descriptor(l, base_dir)?),
            right: Box::new(descriptor(r, base_dir)?),
        },
    })
}

fn parse_elem(group: &Arc<Group>, text: &str) -> Result<Elem, CliError> {
    group.parse_elem(text).map_err(spec_err)
}

fn parse_elems(group: &Arc<Group>, texts: &[String]) -> Result<Vec<Elem>, CliError> {
    texts.iter().map(|t| parse_elem(group, t)).collect()
}

fn parse_subgroup(group: &Arc<Group>, texts: &[String]) -> Result<Subgroup, CliError> {
    let refs: Vec<&str> = texts.iter().map(|s| s.as_str()).collect();
    Subgroup::parse(group.clone(), &refs).map_err(spec_err)
}

fn resolve_measure(expr: &MeasureExpr, group: &Arc<Group>) -> Result<Measure, CliError> {
    match expr {
        MeasureExpr::LazyUniform(alpha) => {
            Measure::lazy_uniform(group.clone(), alpha).map_err(spec_err)
        }
        MeasureExpr::Delta => Ok(Measure::delta(group.clone())),
        MeasureExpr::Table(entries) => {
            let weights = entries
                .iter()
                .map(|(text, w)| Ok((parse_elem(group, text)?, w.clone())))
                .collect::<Result<Vec<_>, CliError>>()?;
            Measure::from_weights(group.clone(), weights).map_err(spec_err)
        }
        MeasureExpr::Product(le, re) => {
            let GroupDescriptor::DirectProduct { left, right } = group.descriptor() else {
                return Err(CliError::Spec(
                    "measure product(...) needs a direct_product group".into(),
                ));
            };
            let lg = build_group((**left).clone()).map_err(spec_err)?;
            let rg = build_group((**right).clone()).map_err(spec_err)?;
            let phi = resolve_measure(le, &lg)?;
            let psi = resolve_measure(re, &rg)?;
            Measure::product(&phi, &psi, group.clone()).map_err(spec_err)
        }
    }
}

fn apply_transforms(
    mut measure: Measure,
    transforms: &[Transform],
    group: &Arc<Group>,
    cap: usize,
) -> Result<Measure, CliError> {
    for t in transforms {
        measure = match t {
            Transform::Conjugate(text) => measure.conjugate(&parse_elem(group, text)?),
            Transform::Smooth(texts) => {
                let f = parse_subgroup(group, texts)?;
                measure.smooth(&f).map_err(spec_err)?
            }
            Transform::Truncate(eps) => measure.truncate(eps).map_err(spec_err)?,
            Transform::Power(k) => measure.power(*k, cap)?,
        };
    }
    Ok(measure)
}

fn policy_from(overrides: &PolicyOverrides) -> ClassifyPolicy {
    let mut policy = ClassifyPolicy::default();
    if let Some(w) = overrides.window {
        policy.window = w;
    }
    if let Some(t) = &overrides.cauchy_tol {
        policy.cauchy_tol = t.clone();
    }
    if let Some(t) = &overrides.member_dist {
        policy.member_dist = t.clone();
    }
    if let Some(t) = &overrides.nonmember_dist {
        policy.nonmember_dist = t.clone();
    }
    policy
}

pub fn resolve(spec: &ExperimentSpec, base_dir: &Path, cap: usize) -> Result<Resolved, CliError> {
    let group = build_group(descriptor(&spec.group, base_dir)?).map_err(spec_err)?;
    let measure = match &spec.measure {
        Some(m) => {
            let base = resolve_measure(&m.base, &group)?;
            Some(apply_transforms(base, &m.transforms, &group, cap)?)
        }
        None => None,
    };
    let analysis = match &spec.analysis {
        None => None,
        Some(a) => Some(match a {
            AnalysisExpr::Walk { n, targets, trunc } => ResolvedAnalysis::Walk {
                n: *n,
                targets: parse_elems(&group, targets)?,
                trunc: trunc.clone(),
            },
            AnalysisExpr::Classify {
                n,
                targets,
                trunc,
                policy,
            } => ResolvedAnalysis::Classify {
                n: *n,
                targets: parse_elems(&group, targets)?,
                trunc: trunc.clone(),
                policy: policy_from(policy),
            },
            AnalysisExpr::Verify { n, subgroup } => ResolvedAnalysis::Verify {
                n: n.unwrap_or(DEFAULT_VERIFY_N),
                subgroup: match subgroup {
                    Some(texts) => Some(parse_subgroup(&group, texts)?),
                    None => None,
                },
            },
            AnalysisExpr::Probe {
                base,
                n,
                source,
                policy,
            } => ResolvedAnalysis::Probe {
                base: parse_elem(&group, base)?,
                n: *n,
                source: match source {
                    ProbeSourceExpr::Radius(r) => ProbeSource::Ball {
                        radius: *r,
                        cap,
                    },
                    ProbeSourceExpr::Candidates(texts) => {
                        ProbeSource::Explicit(parse_elems(&group, texts)?)
                    }
                },
                policy: policy_from(policy),
            },
            AnalysisExpr::Chain {
                subgroup,
                n,
                threshold,
            } => {
                let subgroup = parse_subgroup(&group, subgroup)?;
                // The factor chain is only defined over a normal subgroup, so a
                // bad F is a defect of the experiment description itself.
                subgroup
                    .require_normal()
                    .map_err(|e| CliError::Spec(e.to_string()))?;
                ResolvedAnalysis::Chain {
                    subgroup,
                    n: *n,
                    threshold: threshold.clone().unwrap_or_else(default_threshold),
                }
            }
        }),
    };
    Ok(Resolved {
        group,
        measure,
        analysis,
    })
}
