//! Experiment description syntax tree and its canonical renderer.
//!
//! A spec is at most three statements: a group, a measure with an
//! optional transform pipeline, and an analysis request. Element
//! literals stay as raw strings here; they are checked against the
//! group during resolution.

use num::rational::BigRational;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupExpr {
    Free(u32),
    Cyclic(u32),
    Lattice(u32),
    /// Path to a JSON multiplication-table document, relative to the
    /// spec file.
    FiniteTable(String),
    FreeProduct(Vec<GroupExpr>),
    DirectProduct(Box<GroupExpr>, Box<GroupExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasureExpr {
    LazyUniform(BigRational),
    Delta,
    Table(Vec<(String, BigRational)>),
    Product(Box<MeasureExpr>, Box<MeasureExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transform {
    Conjugate(String),
    Smooth(Vec<String>),
    Truncate(BigRational),
    Power(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureSpec {
    pub base: MeasureExpr,
    pub transforms: Vec<Transform>,
}

/// Optional overrides for the classification policy defaults.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolicyOverrides {
    pub window: Option<usize>,
    pub cauchy_tol: Option<BigRational>,
    pub member_dist: Option<BigRational>,
    pub nonmember_dist: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeSourceExpr {
    Radius(u32),
    Candidates(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnalysisExpr {
    Walk {
        n: u64,
        targets: Vec<String>,
        trunc: Option<BigRational>,
    },
    Classify {
        n: u64,
        targets: Vec<String>,
        trunc: Option<BigRational>,
        policy: PolicyOverrides,
    },
    Verify {
        n: Option<u64>,
        subgroup: Option<Vec<String>>,
    },
    Probe {
        base: String,
        n: u64,
        source: ProbeSourceExpr,
        policy: PolicyOverrides,
    },
    Chain {
        subgroup: Vec<String>,
        n: u64,
        threshold: Option<BigRational>,
    },
}

impl AnalysisExpr {
    /// Statement keyword, which must match the invoked subcommand.
    pub fn keyword(&self) -> &'static str {
        match self {
            AnalysisExpr::Walk { .. } => "walk",
            AnalysisExpr::Classify { .. } => "classify",
            AnalysisExpr::Verify { .. } => "verify",
            AnalysisExpr::Probe { .. } => "probe",
            AnalysisExpr::Chain { .. } => "chain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub group: GroupExpr,
    pub measure: Option<MeasureSpec>,
    pub analysis: Option<AnalysisExpr>,
}

fn render_group(g: &GroupExpr, out: &mut String) {
    match g {
        GroupExpr::Free(d) => write!(out, "free({d})").unwrap(),
        GroupExpr::Cyclic(m) => write!(out, "cyclic({m})").unwrap(),
        GroupExpr::Lattice(d) => write!(out, "lattice({d})").unwrap(),
        GroupExpr::FiniteTable(path) => write!(out, "finite_table(\"{path}\")").unwrap(),
        GroupExpr::FreeProduct(factors) => {
            out.push_str("free_product(");
            for (i, f) in factors.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                render_group(f, out);
            }
            out.push(')');
        }
        GroupExpr::DirectProduct(l, r) => {
            out.push_str("direct_product(");
            render_group(l, out);
            out.push_str(", ");
            render_group(r, out);
            out.push(')');
        }
    }
}

fn render_measure(m: &MeasureExpr, out: &mut String) {
    match m {
        MeasureExpr::LazyUniform(a) => write!(out, "lazy_uniform({a})").unwrap(),
        MeasureExpr::Delta => out.push_str("delta"),
        MeasureExpr::Table(entries) => {
            out.push_str("table{");
            for (i, (el, w)) in entries.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write!(out, "{el}:{w}").unwrap();
            }
            out.push('}');
        }
        MeasureExpr::Product(l, r) => {
            out.push_str("product(");
            render_measure(l, out);
            out.push_str(", ");
            render_measure(r, out);
            out.push(')');
        }
    }
}

fn render_elems(elems: &[String], open: char, close: char, out: &mut String) {
    out.push(open);
    for (i, e) in elems.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(e);
    }
    out.push(close);
}

fn render_policy(p: &PolicyOverrides, out: &mut String) {
    if let Some(w) = p.window {
        write!(out, " window={w}").unwrap();
    }
    if let Some(t) = &p.cauchy_tol {
        write!(out, " cauchy_tol={t}").unwrap();
    }
    if let Some(t) = &p.member_dist {
        write!(out, " member_dist={t}").unwrap();
    }
    if let Some(t) = &p.nonmember_dist {
        write!(out, " nonmember_dist={t}").unwrap();
    }
}

fn render_analysis(a: &AnalysisExpr, out: &mut String) {
    match a {
        AnalysisExpr::Walk { n, targets, trunc } => {
            write!(out, "walk n={n} targets=").unwrap();
            render_elems(targets, '[', ']', out);
            if let Some(t) = trunc {
                write!(out, " trunc={t}").unwrap();
            }
        }
        AnalysisExpr::Classify {
            n,
            targets,
            trunc,
            policy,
        } => {
            write!(out, "classify n={n} targets=").unwrap();
            render_elems(targets, '[', ']', out);
            if let Some(t) = trunc {
                write!(out, " trunc={t}").unwrap();
            }
            render_policy(policy, out);
        }
        AnalysisExpr::Verify { n, subgroup } => {
            out.push_str("verify");
            if let Some(f) = subgroup {
                out.push_str(" F=");
                render_elems(f, '{', '}', out);
            }
            if let Some(n) = n {
                write!(out, " n={n}").unwrap();
            }
        }
        AnalysisExpr::Probe {
            base,
            n,
            source,
            policy,
        } => {
            write!(out, "probe base={base} n={n}").unwrap();
            match source {
                ProbeSourceExpr::Radius(r) => write!(out, " radius={r}").unwrap(),
                ProbeSourceExpr::Candidates(c) => {
                    out.push_str(" candidates=");
                    render_elems(c, '[', ']', out);
                }
            }
            render_policy(policy, out);
        }
        AnalysisExpr::Chain {
            subgroup,
            n,
            threshold,
        } => {
            out.push_str("chain F=");
            render_elems(subgroup, '{', '}', out);
            write!(out, " n={n}").unwrap();
            if let Some(t) = threshold {
                write!(out, " threshold={t}").unwrap();
            }
        }
    }
}

impl ExperimentSpec {
    /// Canonical one-line text form; parsing it reproduces the spec.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("group ");
        render_group(&self.group, &mut out);
        if let Some(m) = &self.measure {
            out.push_str("; measure ");
            render_measure(&m.base, &mut out);
            for t in &m.transforms {
                out.push_str(" |> ");
                match t {
                    Transform::Conjugate(g) => write!(out, "conjugate({g})").unwrap(),
                    Transform::Smooth(f) => {
                        out.push_str("smooth(");
                        render_elems(f, '{', '}', &mut out);
                        out.push(')');
                    }
                    Transform::Truncate(eps) => write!(out, "truncate({eps})").unwrap(),
                    Transform::Power(k) => write!(out, "power({k})").unwrap(),
                }
            }
        }
        if let Some(a) = &self.analysis {
            out.push_str("; ");
            render_analysis(a, &mut out);
        }
        out
    }
}
