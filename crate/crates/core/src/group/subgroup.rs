//! Finite subgroups given by explicit element lists, with closure and
//! normality certificates checked at construction.

use std::collections::HashSet;
use std::sync::Arc;

use super::{Elem, Group};
use crate::{Error, Result};

/// A finite subgroup of a parent group.
///
/// Construction verifies closure under multiplication and inversion and the
/// presence of the identity. Normality is certified against the parent's
/// standard generating set (conjugation by generators generates all
/// conjugations); the first violating pair is retained as a witness.
#[derive(Debug, Clone)]
pub struct Subgroup {
    parent: Arc<Group>,
    elements: Vec<Elem>,
    normal_witness: Option<(Elem, Elem)>,
}

impl Subgroup {
    pub fn new(parent: Arc<Group>, elems: impl IntoIterator<Item = Elem>) -> Result<Self> {
        let mut elements: Vec<Elem> = elems.into_iter().collect();
        elements.sort();
        elements.dedup();
        let set: HashSet<&Elem> = elements.iter().collect();
        if !set.contains(&parent.identity()) {
            return Err(Error::SubgroupNoIdentity);
        }
        for x in &elements {
            let xi = parent.inv(x);
            if !set.contains(&xi) {
                return Err(Error::SubgroupNotClosed {
                    witness: format!("{}^-1 = {}", parent.format_elem(x), parent.format_elem(&xi)),
                });
            }
            for y in &elements {
                let xy = parent.mul(x, y);
                if !set.contains(&xy) {
                    return Err(Error::SubgroupNotClosed {
                        witness: format!(
                            "{}·{} = {}",
                            parent.format_elem(x),
                            parent.format_elem(y),
                            parent.format_elem(&xy)
                        ),
                    });
                }
            }
        }
        let mut normal_witness = None;
        'outer: for s in parent.generators() {
            let si = parent.inv(&s);
            for f in &elements {
                let conj = parent.mul(&parent.mul(&si, f), &s);
                if !set.contains(&conj) {
                    normal_witness = Some((s.clone(), f.clone()));
                    break 'outer;
                }
            }
        }
        Ok(Subgroup {
            parent,
            elements,
            normal_witness,
        })
    }

    /// Subgroup from element literals in the parent's text convention.
    pub fn parse(parent: Arc<Group>, literals: &[&str]) -> Result<Self> {
        let elems = literals
            .iter()
            .map(|t| parent.parse_elem(t))
            .collect::<Result<Vec<_>>>()?;
        Subgroup::new(parent, elems)
    }

    pub fn parent(&self) -> &Arc<Group> {
        &self.parent
    }

    /// Elements in canonical order.
    pub fn elements(&self) -> &[Elem] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, g: &Elem) -> bool {
        self.elements.binary_search(g).is_ok()
    }

    /// Whether conjugation by every standard generator maps the subgroup into
    /// itself.
    pub fn is_normal(&self) -> bool {
        self.normal_witness.is_none()
    }

    /// The violating (generator, member) pair when not normal.
    pub fn normal_witness(&self) -> Option<(&Elem, &Elem)> {
        self.normal_witness.as_ref().map(|(s, f)| (s, f))
    }

    /// Errors with the witness pair unless the subgroup is normal.
    pub fn require_normal(&self) -> Result<()> {
        match &self.normal_witness {
            None => Ok(()),
            Some((s, f)) => Err(Error::NormalityViolation {
                conjugator: self.parent.format_elem(s),
                member: self.parent.format_elem(f),
            }),
        }
    }
}
