//! Canonical text encodings of group elements, one convention per backend.
//!
//! - free groups: reduced words like `ab^-1a^2`; identity `e`
//! - cyclic groups: `e`, `c`, `c2`, ... (`cK` is the K-th power of the step)
//! - table groups: `e` and `g0`, `g1`, ... by table index
//! - free products: factor letters `a`, `b`, ... with an index suffix, so
//!   `ab2a` is a·b²·a in C2∗C3; identity `e`
//! - direct products: `(x,y)` with the factors' encodings
//! - lattices: a bare integer in dimension 1, `(3,-1)` style tuples otherwise
//!
//! Parsing always folds the pieces through group multiplication, so any
//! well-formed input lands on a canonical element even if it was written
//! unreduced (`aa` in a free group parses to `a^2`, `bb` in C2∗C3 to `b2`).

use std::fmt::Write as _;

use super::{Backend, Elem, ElemData, FiniteTable, Group};
use crate::{Error, Result};

fn letter(i: usize) -> Option<char> {
    if i < 26 {
        Some((b'a' + i as u8) as char)
    } else {
        None
    }
}

impl Group {
    /// Canonical string form of an element of this group.
    pub fn format_elem(&self, g: &Elem) -> String {
        match (&self.backend, &g.0) {
            (Backend::Free { .. }, ElemData::Word(w)) => {
                if w.is_empty() {
                    return "e".into();
                }
                let mut out = String::new();
                let mut i = 0;
                while i < w.len() {
                    let mut j = i;
                    while j < w.len() && w[j] == w[i] {
                        j += 1;
                    }
                    let gen = w[i].unsigned_abs() as usize;
                    let ch = letter(gen - 1).unwrap_or('#');
                    let exp = (j - i) as i64 * if w[i] < 0 { -1 } else { 1 };
                    if exp == 1 {
                        out.push(ch);
                    } else {
                        let _ = write!(out, "{ch}^{exp}");
                    }
                    i = j;
                }
                out
            }
            (Backend::Cyclic { .. }, ElemData::Index(i)) => match i {
                0 => "e".into(),
                1 => "c".into(),
                k => format!("c{k}"),
            },
            (Backend::Table(t), ElemData::Index(i)) => {
                if *i == t.id {
                    "e".into()
                } else {
                    format!("g{i}")
                }
            }
            (Backend::FreeProduct { factors }, ElemData::Syllables(s)) => {
                if s.is_empty() {
                    return "e".into();
                }
                let mut out = String::new();
                for &(f, x) in s {
                    let ch = letter(f as usize).unwrap_or('#');
                    out.push(ch);
                    if x != 1 || factors[f as usize].id == 1 {
                        let _ = write!(out, "{x}");
                    }
                }
                out
            }
            (Backend::DirectProduct { left, right }, ElemData::Pair(a, b)) => {
                format!("({},{})", left.format_elem(a), right.format_elem(b))
            }
            (Backend::Lattice { .. }, ElemData::Vector(v)) => {
                if v.len() == 1 {
                    format!("{}", v[0])
                } else {
                    let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                    format!("({})", inner.join(","))
                }
            }
            _ => "<invalid>".into(),
        }
    }

    /// Parses the backend's text convention into a canonical element.
    pub fn parse_elem(&self, text: &str) -> Result<Elem> {
        let text = text.trim();
        let err = |reason: &str| Error::ElementParse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        if text.is_empty() {
            return Err(err("empty element literal"));
        }
        if text == "e" {
            return Ok(self.identity());
        }
        match &self.backend {
            Backend::Free { rank } => {
                let mut acc = self.identity();
                let mut chars = text.chars().peekable();
                while let Some(ch) = chars.next() {
                    let gen = match ch {
                        'a'..='z' => (ch as u8 - b'a') as u32 + 1,
                        _ => return Err(err("expected a generator letter")),
                    };
                    if gen > *rank {
                        return Err(err(&format!("letter {ch} exceeds rank {rank}")));
                    }
                    let mut exp: i64 = 1;
                    if chars.peek() == Some(&'^') {
                        chars.next();
                        let mut num = String::new();
                        if chars.peek() == Some(&'-') {
                            num.push('-');
                            chars.next();
                        }
                        while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                            num.push(chars.next().expect("digit"));
                        }
                        exp = num
                            .parse()
                            .map_err(|_| err("malformed exponent after ^"))?;
                    }
                    let step = Elem(ElemData::Word(vec![if exp < 0 {
                        -(gen as i32)
                    } else {
                        gen as i32
                    }]));
                    for _ in 0..exp.unsigned_abs() {
                        acc = self.mul(&acc, &step);
                    }
                }
                Ok(acc)
            }
            Backend::Cyclic { order } => {
                let rest = text
                    .strip_prefix('c')
                    .ok_or_else(|| err("expected e or a power of c"))?;
                let k: u64 = if rest.is_empty() {
                    1
                } else {
                    rest.parse().map_err(|_| err("malformed power of c"))?
                };
                Ok(Elem(ElemData::Index((k % u64::from(*order)) as u32)))
            }
            Backend::Table(t) => {
                let rest = text
                    .strip_prefix('g')
                    .ok_or_else(|| err("expected e or an index like g3"))?;
                let i: u32 = rest.parse().map_err(|_| err("malformed table index"))?;
                if i >= t.order {
                    return Err(err(&format!("index {i} out of range for order {}", t.order)));
                }
                Ok(Elem(ElemData::Index(i)))
            }
            Backend::FreeProduct { factors } => {
                let mut acc = self.identity();
                let mut chars = text.chars().peekable();
                while let Some(ch) = chars.next() {
                    let f = match ch {
                        'a'..='z' => (ch as u8 - b'a') as usize,
                        _ => return Err(err("expected a factor letter")),
                    };
                    let table: &FiniteTable = factors
                        .get(f)
                        .ok_or_else(|| err(&format!("letter {ch} exceeds the factor count")))?;
                    let mut num = String::new();
                    while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                        num.push(chars.next().expect("digit"));
                    }
                    let x: u32 = if num.is_empty() {
                        if table.id == 1 {
                            return Err(err(&format!(
                                "bare {ch} is the factor identity; use an explicit index"
                            )));
                        }
                        1
                    } else {
                        num.parse().map_err(|_| err("malformed factor index"))?
                    };
                    if x >= table.order {
                        return Err(err(&format!(
                            "index {x} out of range for factor {ch} of order {}",
                            table.order
                        )));
                    }
                    if x == table.id {
                        continue;
                    }
                    acc = self.mul(&acc, &Elem(ElemData::Syllables(vec![(f as u16, x)])));
                }
                Ok(acc)
            }
            Backend::DirectProduct { left, right } => {
                let inner = text
                    .strip_prefix('(')
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| err("expected (x,y)"))?;
                let (l, r) = split_top_level(inner).ok_or_else(|| err("expected (x,y)"))?;
                Ok(Group::pair(left.parse_elem(l)?, right.parse_elem(r)?))
            }
            Backend::Lattice { dim } => {
                let dim = *dim as usize;
                let coords: Vec<i64> = if let Some(inner) =
                    text.strip_prefix('(').and_then(|s| s.strip_suffix(')'))
                {
                    inner
                        .split(',')
                        .map(|p| p.trim().parse::<i64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err("malformed integer coordinate"))?
                } else {
                    vec![text
                        .parse::<i64>()
                        .map_err(|_| err("expected an integer or a tuple"))?]
                };
                if coords.len() != dim {
                    return Err(err(&format!("expected {dim} coordinates, got {}", coords.len())));
                }
                Ok(Elem(ElemData::Vector(coords)))
            }
        }
    }
}

/// Splits `"x,y"` at the single top-level comma, respecting parentheses.
fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}
