//! Hand-rolled recursive-descent parser for the experiment grammar.
//!
//! Statements are separated by `;`: a `group` expression, an optional
//! `measure` pipeline, and an optional analysis request. Rationals are
//! written `p/q`; element literals are raw text validated later against
//! the declared group. `#` starts a comment running to end of line.

use crate::ast::*;
use num::rational::BigRational;
use num::BigInt;
use std::fmt;

/// Parse failure with a source position and a what-was-expected note.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for Diagnostic {}

pub fn parse_spec(text: &str) -> Result<ExperimentSpec, Diagnostic> {
    let mut p = Parser { src: text, pos: 0 };
    p.spec()
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'a> Parser<'a> {
    fn fail(&self, at: usize, message: impl Into<String>) -> Diagnostic {
        let consumed = &self.src[..at.min(self.src.len())];
        let line = consumed.matches('\n').count() + 1;
        let col = at - consumed.rfind('\n').map_or(0, |i| i + 1) + 1;
        Diagnostic {
            line,
            col,
            message: message.into(),
        }
    }

    fn expected(&self, what: &str) -> Diagnostic {
        let found = match self.rest().chars().next() {
            Some(c) => format!("found {c:?}"),
            None => "found end of input".into(),
        };
        self.fail(self.pos, format!("expected {what}, {found}"))
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        loop {
            let rest = self.rest();
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if self.rest().starts_with('#') {
                match self.rest().find('\n') {
                    Some(i) => self.pos += i + 1,
                    None => self.pos = self.src.len(),
                }
            } else {
                return;
            }
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> PResult<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.expected(&format!("`{token}`")))
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    /// Consumes an identifier: a letter followed by letters, digits, `_`.
    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() => {}
            _ => return None,
        }
        let end = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += end;
        Some(&rest[..end])
    }

    fn unsigned(&mut self) -> PResult<u64> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|(_, c)| !c.is_ascii_digit())
            .map_or(rest.len(), |(i, _)| i);
        if end == 0 {
            return Err(self.expected("an integer"));
        }
        let at = self.pos;
        self.pos += end;
        rest[..end]
            .parse()
            .map_err(|_| self.fail(at, "integer out of range"))
    }

    fn rational(&mut self) -> PResult<BigRational> {
        self.skip_ws();
        let at = self.pos;
        let negative = self.eat("-");
        let num = self.digits(at)?;
        let num = if negative { -num } else { num };
        if self.rest().starts_with('/') {
            self.pos += 1;
            let dat = self.pos;
            let den = self.digits(dat)?;
            if den == BigInt::from(0) {
                return Err(self.fail(dat, "denominator must be nonzero"));
            }
            Ok(BigRational::new(num, den))
        } else {
            Ok(BigRational::from_integer(num))
        }
    }

    fn digits(&mut self, at: usize) -> PResult<BigInt> {
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|(_, c)| !c.is_ascii_digit())
            .map_or(rest.len(), |(i, _)| i);
        if end == 0 {
            return Err(self.fail(at, "expected digits of a rational `p/q`"));
        }
        self.pos += end;
        Ok(rest[..end].parse().expect("digit run parses"))
    }

    /// Consumes a raw element literal: text up to the next delimiter at
    /// nesting depth zero. Parentheses nest (pair and vector literals).
    fn element(&mut self) -> PResult<String> {
        self.skip_ws();
        let rest = self.rest();
        let mut depth = 0usize;
        let mut end = rest.len();
        for (i, c) in rest.char_indices() {
            match c {
                '(' => depth += 1,
                ')' if depth > 0 => depth -= 1,
                ')' | ',' | ']' | '}' | ';' | ':' if depth == 0 => {
                    end = i;
                    break;
                }
                c if c.is_whitespace() && depth == 0 => {
                    end = i;
                    break;
                }
                _ => {}
            }
        }
        let text = rest[..end].trim_end();
        if text.is_empty() {
            return Err(self.expected("an element literal"));
        }
        self.pos += end;
        Ok(text.to_string())
    }

    fn element_list(&mut self, open: &str, close: &str) -> PResult<Vec<String>> {
        self.expect(open)?;
        let mut out = vec![self.element()?];
        while self.eat(",") {
            out.push(self.element()?);
        }
        self.expect(close)?;
        Ok(out)
    }

    fn string_literal(&mut self) -> PResult<String> {
        self.expect("\"")?;
        let rest = self.rest();
        match rest.find('"') {
            Some(end) => {
                let s = rest[..end].to_string();
                self.pos += end + 1;
                Ok(s)
            }
            None => Err(self.expected("a closing `\"`")),
        }
    }

    fn spec(&mut self) -> PResult<ExperimentSpec> {
        self.skip_ws();
        let at = self.pos;
        match self.ident() {
            Some("group") => {}
            _ => return Err(self.fail(at, "expected the `group` statement first")),
        }
        let group = self.group_expr()?;
        let mut measure = None;
        let mut analysis: Option<AnalysisExpr> = None;
        loop {
            if self.at_end() {
                break;
            }
            self.expect(";")?;
            if self.at_end() {
                break;
            }
            let at = self.pos;
            let word = self
                .ident()
                .ok_or_else(|| self.expected("a statement keyword"))?;
            match word {
                "measure" => {
                    if measure.is_some() {
                        return Err(self.fail(at, "duplicate measure statement"));
                    }
                    if analysis.is_some() {
                        return Err(self.fail(at, "measure must precede the analysis statement"));
                    }
                    measure = Some(self.measure_spec()?);
                }
                "walk" | "classify" | "verify" | "probe" | "chain" => {
                    if analysis.is_some() {
                        return Err(self.fail(at, "duplicate analysis statement"));
                    }
                    analysis = Some(self.analysis(word)?);
                }
                "group" => return Err(self.fail(at, "duplicate group statement")),
                other => {
                    return Err(self.fail(
                        at,
                        format!(
                            "unknown statement `{other}`; expected one of measure, walk, \
                             classify, verify, probe, chain"
                        ),
                    ))
                }
            }
        }
        Ok(ExperimentSpec {
            group,
            measure,
            analysis,
        })
    }

    fn group_expr(&mut self) -> PResult<GroupExpr> {
        self.skip_ws();
        let at = self.pos;
        let word = self
            .ident()
            .ok_or_else(|| self.expected("a group constructor"))?;
        match word {
            "free" => {
                self.expect("(")?;
                let d = self.unsigned()?;
                self.expect(")")?;
                Ok(GroupExpr::Free(self.as_u32(d, at)?))
            }
            "cyclic" => {
                self.expect("(")?;
                let m = self.unsigned()?;
                self.expect(")")?;
                Ok(GroupExpr::Cyclic(self.as_u32(m, at)?))
            }
            "lattice" => {
                self.expect("(")?;
                let d = self.unsigned()?;
                self.expect(")")?;
                Ok(GroupExpr::Lattice(self.as_u32(d, at)?))
            }
            "finite_table" => {
                self.expect("(")?;
                let path = self.string_literal()?;
                self.expect(")")?;
                Ok(GroupExpr::FiniteTable(path))
            }
            "free_product" => {
                self.expect("(")?;
                let mut factors = vec![self.group_expr()?];
                while self.eat(",") {
                    factors.push(self.group_expr()?);
                }
                self.expect(")")?;
                if factors.len() < 2 {
                    return Err(self.fail(at, "free_product needs at least two factors"));
                }
                Ok(GroupExpr::FreeProduct(factors))
            }
            "direct_product" => {
                self.expect("(")?;
                let left = self.group_expr()?;
                self.expect(",")?;
                let right = self.group_expr()?;
                self.expect(")")?;
                Ok(GroupExpr::DirectProduct(Box::new(left), Box::new(right)))
            }
            other => Err(self.fail(
                at,
                format!(
                    "unknown group constructor `{other}`; expected one of free, cyclic, \
                     lattice, finite_table, free_product, direct_product"
                ),
            )),
        }
    }

    fn as_u32(&self, v: u64, at: usize) -> PResult<u32> {
        u32::try_from(v).map_err(|_| self.fail(at, "parameter out of range"))
    }

    fn measure_spec(&mut self) -> PResult<MeasureSpec> {
        let base = self.measure_expr()?;
        let mut transforms = Vec::new();
        while self.eat("|>") {
            transforms.push(self.transform()?);
        }
        Ok(MeasureSpec { base, transforms })
    }

    fn measure_expr(&mut self) -> PResult<MeasureExpr> {
        self.skip_ws();
        let at = self.pos;
        let word = self
            .ident()
            .ok_or_else(|| self.expected("a measure constructor"))?;
        match word {
            "lazy_uniform" => {
                self.expect("(")?;
                let a = self.rational()?;
                self.expect(")")?;
                Ok(MeasureExpr::LazyUniform(a))
            }
            "delta" => Ok(MeasureExpr::Delta),
            "table" => {
                self.expect("{")?;
                let mut entries = Vec::new();
                loop {
                    let el = self.element()?;
                    self.expect(":")?;
                    let w = self.rational()?;
                    entries.push((el, w));
                    if !self.eat(",") {
                        break;
                    }
                }
                self.expect("}")?;
                Ok(MeasureExpr::Table(entries))
            }
            "product" => {
                self.expect("(")?;
                let left = self.measure_expr()?;
                self.expect(",")?;
                let right = self.measure_expr()?;
                self.expect(")")?;
                Ok(MeasureExpr::Product(Box::new(left), Box::new(right)))
            }
            other => Err(self.fail(
                at,
                format!(
                    "unknown measure constructor `{other}`; expected one of lazy_uniform, \
                     delta, table, product"
                ),
            )),
        }
    }

    fn transform(&mut self) -> PResult<Transform> {
        self.skip_ws();
        let at = self.pos;
        let word = self.ident().ok_or_else(|| self.expected("a transform"))?;
        match word {
            "conjugate" => {
                self.expect("(")?;
                let g = self.element()?;
                self.expect(")")?;
                Ok(Transform::Conjugate(g))
            }
            "smooth" => {
                self.expect("(")?;
                let f = self.element_list("{", "}")?;
                self.expect(")")?;
                Ok(Transform::Smooth(f))
            }
            "truncate" => {
                self.expect("(")?;
                let eps = self.rational()?;
                self.expect(")")?;
                Ok(Transform::Truncate(eps))
            }
            "power" => {
                self.expect("(")?;
                let k = self.unsigned()?;
                self.expect(")")?;
                Ok(Transform::Power(k))
            }
            other => Err(self.fail(
                at,
                format!(
                    "unknown transform `{other}`; expected one of conjugate, smooth, \
                     truncate, power"
                ),
            )),
        }
    }

    fn analysis(&mut self, keyword: &str) -> PResult<AnalysisExpr> {
        let mut params = Params::new(self, keyword);
        match keyword {
            "walk" => {
                params.read(&["n", "targets", "trunc"])?;
                Ok(AnalysisExpr::Walk {
                    n: params.require_n()?,
                    targets: params.require_targets()?,
                    trunc: params.rational("trunc"),
                })
            }
            "classify" => {
                params.read(&[
                    "n",
                    "targets",
                    "trunc",
                    "window",
                    "cauchy_tol",
                    "member_dist",
                    "nonmember_dist",
                ])?;
                Ok(AnalysisExpr::Classify {
                    n: params.require_n()?,
                    targets: params.require_targets()?,
                    trunc: params.rational("trunc"),
                    policy: params.policy()?,
                })
            }
            "verify" => {
                params.read(&["n", "F"])?;
                Ok(AnalysisExpr::Verify {
                    n: params.integer("n"),
                    subgroup: params.subgroup(),
                })
            }
            "probe" => {
                params.read(&[
                    "base",
                    "n",
                    "radius",
                    "candidates",
                    "window",
                    "cauchy_tol",
                    "member_dist",
                    "nonmember_dist",
                ])?;
                Ok(AnalysisExpr::Probe {
                    base: params.require_element("base")?,
                    n: params.require_n()?,
                    source: params.probe_source()?,
                    policy: params.policy()?,
                })
            }
            "chain" => {
                params.read(&["F", "n", "threshold"])?;
                Ok(AnalysisExpr::Chain {
                    subgroup: params
                        .subgroup()
                        .ok_or_else(|| params.missing("F={...}"))?,
                    n: params.require_n()?,
                    threshold: params.rational("threshold"),
                })
            }
            _ => unreachable!("caller dispatches on known keywords"),
        }
    }
}

/// One parsed `key=value` bag with kind-specific extraction helpers.
struct Params<'p, 'a> {
    parser: &'p mut Parser<'a>,
    keyword: &'p str,
    at: usize,
    integers: Vec<(String, u64)>,
    rationals: Vec<(String, BigRational)>,
    elements: Vec<(String, String)>,
    lists: Vec<(String, Vec<String>)>,
}

impl<'p, 'a> Params<'p, 'a> {
    fn new(parser: &'p mut Parser<'a>, keyword: &'p str) -> Self {
        let at = parser.pos;
        Params {
            parser,
            keyword,
            at,
            integers: Vec::new(),
            rationals: Vec::new(),
            elements: Vec::new(),
            lists: Vec::new(),
        }
    }

    fn read(&mut self, allowed: &[&str]) -> PResult<()> {
        loop {
            self.parser.skip_ws();
            if self.parser.pos >= self.parser.src.len() || self.parser.rest().starts_with(';') {
                return Ok(());
            }
            let at = self.parser.pos;
            let key = self
                .parser
                .ident()
                .ok_or_else(|| self.parser.expected("a `key=value` parameter"))?
                .to_string();
            if !allowed.contains(&key.as_str()) {
                return Err(self.parser.fail(
                    at,
                    format!(
                        "unknown parameter `{key}` for {}; expected one of {}",
                        self.keyword,
                        allowed.join(", ")
                    ),
                ));
            }
            if self.seen(&key) {
                return Err(self.parser.fail(at, format!("duplicate parameter `{key}`")));
            }
            self.parser.expect("=")?;
            match key.as_str() {
                "n" | "window" | "radius" => {
                    let v = self.parser.unsigned()?;
                    self.integers.push((key, v));
                }
                "trunc" | "cauchy_tol" | "member_dist" | "nonmember_dist" | "threshold" => {
                    let v = self.parser.rational()?;
                    self.rationals.push((key, v));
                }
                "base" => {
                    let v = self.parser.element()?;
                    self.elements.push((key, v));
                }
                "targets" | "candidates" => {
                    let v = self.parser.element_list("[", "]")?;
                    self.lists.push((key, v));
                }
                "F" => {
                    let v = self.parser.element_list("{", "}")?;
                    self.lists.push((key, v));
                }
                _ => unreachable!("allowed list covers the keys"),
            }
        }
    }

    fn seen(&self, key: &str) -> bool {
        self.integers.iter().any(|(k, _)| k == key)
            || self.rationals.iter().any(|(k, _)| k == key)
            || self.elements.iter().any(|(k, _)| k == key)
            || self.lists.iter().any(|(k, _)| k == key)
    }

    fn missing(&self, what: &str) -> Diagnostic {
        self.parser
            .fail(self.at, format!("{} requires {what}", self.keyword))
    }

    fn integer(&self, key: &str) -> Option<u64> {
        self.integers
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }

    fn rational(&self, key: &str) -> Option<BigRational> {
        self.rationals
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
    }

    fn list(&self, key: &str) -> Option<Vec<String>> {
        self.lists
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
    }

    fn subgroup(&self) -> Option<Vec<String>> {
        self.list("F")
    }

    fn require_n(&self) -> PResult<u64> {
        self.integer("n").ok_or_else(|| self.missing("n=INT"))
    }

    fn require_targets(&self) -> PResult<Vec<String>> {
        self.list("targets")
            .ok_or_else(|| self.missing("targets=[...]"))
    }

    fn require_element(&self, key: &str) -> PResult<String> {
        self.elements
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| self.missing(&format!("{key}=ELEMENT")))
    }

    fn probe_source(&self) -> PResult<ProbeSourceExpr> {
        let radius = self.integer("radius");
        let candidates = self.list("candidates");
        match (radius, candidates) {
            (Some(r), None) => Ok(ProbeSourceExpr::Radius(
                u32::try_from(r).map_err(|_| self.missing("a radius that fits in 32 bits"))?,
            )),
            (None, Some(c)) => Ok(ProbeSourceExpr::Candidates(c)),
            (None, None) => Err(self.missing("either radius=INT or candidates=[...]")),
            (Some(_), Some(_)) => Err(self
                .parser
                .fail(self.at, "probe takes radius or candidates, not both")),
        }
    }

    fn policy(&self) -> PResult<PolicyOverrides> {
        Ok(PolicyOverrides {
            window: self
                .integer("window")
                .map(|w| usize::try_from(w).expect("u64 fits usize on this platform")),
            cauchy_tol: self.rational("cauchy_tol"),
            member_dist: self.rational("member_dist"),
            nonmember_dist: self.rational("nonmember_dist"),
        })
    }
}
