//! Group backends with canonical element normal forms.
//!
//! Every backend exposes the same small surface: identity, multiplication,
//! inversion, a standard symmetric generating set, breadth-first balls, and
//! geodesic word length. Elements are value-like and hash/compare by their
//! canonical encoding, so measures can key on them directly.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

mod subgroup;
mod text;

pub use subgroup::Subgroup;

/// Structural description of a group; the unit of serialization and equality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupDescriptor {
    /// Free group of the given rank (rank 1 is the integers with one letter).
    Free { rank: u32 },
    /// Cyclic group of the given order, at least 2.
    Cyclic { order: u32 },
    /// Explicit finite group given by its multiplication table.
    FiniteTable(TableSpec),
    /// Free product of two or more finite groups.
    FreeProduct { factors: Vec<GroupDescriptor> },
    /// Direct product of two groups.
    DirectProduct {
        left: Box<GroupDescriptor>,
        right: Box<GroupDescriptor>,
    },
    /// The integer lattice Z^dim with coordinate generators.
    Lattice { dim: u32 },
}

/// Raw multiplication-table data: `mul` is row-major, `mul[a*order + b]` is
/// the product `a·b`; `inv[a]` is the inverse; `id` indexes the identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSpec {
    pub order: usize,
    pub mul: Vec<usize>,
    pub inv: Vec<usize>,
    pub id: usize,
}

impl TableSpec {
    /// Checks the group axioms; returns which axiom failed and a witness.
    pub fn validate(&self) -> Result<()> {
        let n = self.order;
        if n == 0 {
            return Err(Error::DescriptorRange("table order 0".into()));
        }
        if self.mul.len() != n * n || self.inv.len() != n || self.id >= n {
            return Err(Error::TableNotAGroup {
                axiom: "shape",
                witness: format!("order {n}, mul len {}, inv len {}, id {}", self.mul.len(), self.inv.len(), self.id),
            });
        }
        if let Some(bad) = self.mul.iter().chain(self.inv.iter()).find(|&&v| v >= n) {
            return Err(Error::TableNotAGroup {
                axiom: "closure",
                witness: format!("entry {bad} out of range"),
            });
        }
        let m = |a: usize, b: usize| self.mul[a * n + b];
        for a in 0..n {
            if m(self.id, a) != a || m(a, self.id) != a {
                return Err(Error::TableNotAGroup {
                    axiom: "identity",
                    witness: format!("id·{a} or {a}·id"),
                });
            }
            if m(a, self.inv[a]) != self.id || m(self.inv[a], a) != self.id {
                return Err(Error::TableNotAGroup {
                    axiom: "inverse",
                    witness: format!("{a}"),
                });
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if m(m(a, b), c) != m(a, m(b, c)) {
                        return Err(Error::TableNotAGroup {
                            axiom: "associativity",
                            witness: format!("({a},{b},{c})"),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

impl GroupDescriptor {
    /// Number of elements, if finite.
    pub fn order(&self) -> Option<u64> {
        match self {
            GroupDescriptor::Free { .. } | GroupDescriptor::Lattice { .. } => None,
            GroupDescriptor::Cyclic { order } => Some(u64::from(*order)),
            GroupDescriptor::FiniteTable(spec) => Some(spec.order as u64),
            GroupDescriptor::FreeProduct { .. } => None,
            GroupDescriptor::DirectProduct { left, right } => {
                Some(left.order()?.checked_mul(right.order()?)?)
            }
        }
    }
}

/// A finite group in table form, used directly and as a free-product factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FiniteTable {
    pub order: u32,
    pub id: u32,
    mul: Vec<u32>,
    inv: Vec<u32>,
}

impl FiniteTable {
    fn from_spec(spec: &TableSpec) -> Result<Self> {
        spec.validate()?;
        Ok(FiniteTable {
            order: spec.order as u32,
            id: spec.id as u32,
            mul: spec.mul.iter().map(|&v| v as u32).collect(),
            inv: spec.inv.iter().map(|&v| v as u32).collect(),
        })
    }

    fn cyclic(order: u32) -> Self {
        let n = order;
        let mut mul = Vec::with_capacity((n * n) as usize);
        for a in 0..n {
            for b in 0..n {
                mul.push((a + b) % n);
            }
        }
        let inv = (0..n).map(|a| (n - a) % n).collect();
        FiniteTable { order: n, id: 0, mul, inv }
    }

    /// Table for any finite descriptor (cyclic, explicit table, or a direct
    /// product of finite descriptors), enumerating product elements row-major.
    fn from_descriptor(descr: &GroupDescriptor) -> Result<Self> {
        match descr {
            GroupDescriptor::Cyclic { order } => {
                if *order < 2 {
                    return Err(Error::DescriptorRange(format!("cyclic order {order} < 2")));
                }
                Ok(FiniteTable::cyclic(*order))
            }
            GroupDescriptor::FiniteTable(spec) => FiniteTable::from_spec(spec),
            GroupDescriptor::DirectProduct { left, right } => {
                let l = FiniteTable::from_descriptor(left)?;
                let r = FiniteTable::from_descriptor(right)?;
                let (lo, ro) = (l.order, r.order);
                let n = lo
                    .checked_mul(ro)
                    .ok_or_else(|| Error::DescriptorRange("product order overflow".into()))?;
                let pack = |a: u32, b: u32| a * ro + b;
                let mut mul = Vec::with_capacity((n as usize) * (n as usize));
                for a in 0..n {
                    for b in 0..n {
                        let (al, ar) = (a / ro, a % ro);
                        let (bl, br) = (b / ro, b % ro);
                        mul.push(pack(l.mul(al, bl), r.mul(ar, br)));
                    }
                }
                let inv = (0..n).map(|a| pack(l.inv(a / ro), r.inv(a % ro))).collect();
                Ok(FiniteTable { order: n, id: pack(l.id, r.id), mul, inv })
            }
            other => Err(Error::InfiniteFactor(format!("{other:?}"))),
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[(a * self.order + b) as usize]
    }

    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        self.inv[a as usize]
    }
}

/// A canonical group element. Equality, hashing, and ordering all act on the
/// canonical encoding, so two encodings are equal exactly when the group
/// elements are.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(pub(crate) ElemData);

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum ElemData {
    /// Reduced word; letter k in 1..=rank is generator k, -k its inverse.
    Word(Vec<i32>),
    /// Index into a cyclic or table group.
    Index(u32),
    /// Alternating (factor, element) syllables; element is never the factor
    /// identity and adjacent syllables come from different factors.
    Syllables(Vec<(u16, u32)>),
    /// Componentwise pair for direct products.
    Pair(Box<Elem>, Box<Elem>),
    /// Lattice vector.
    Vector(Vec<i64>),
}

enum Backend {
    Free { rank: u32 },
    Cyclic { order: u32 },
    Table(FiniteTable),
    FreeProduct { factors: Vec<FiniteTable> },
    DirectProduct { left: Arc<Group>, right: Arc<Group> },
    Lattice { dim: u32 },
}

/// An immutable group handle; safe to share and cheap to clone behind `Arc`.
pub struct Group {
    descriptor: GroupDescriptor,
    backend: Backend,
}

impl std::fmt::Debug for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Group({:?})", self.descriptor)
    }
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.descriptor == other.descriptor
    }
}
impl Eq for Group {}

/// Validates a descriptor and builds the group handle.
pub fn build_group(descriptor: GroupDescriptor) -> Result<Arc<Group>> {
    let backend = match &descriptor {
        GroupDescriptor::Free { rank } => {
            if *rank < 1 {
                return Err(Error::DescriptorRange("free rank must be at least 1".into()));
            }
            Backend::Free { rank: *rank }
        }
        GroupDescriptor::Cyclic { order } => {
            if *order < 2 {
                return Err(Error::DescriptorRange("cyclic order must be at least 2".into()));
            }
            Backend::Cyclic { order: *order }
        }
        GroupDescriptor::FiniteTable(spec) => Backend::Table(FiniteTable::from_spec(spec)?),
        GroupDescriptor::FreeProduct { factors } => {
            if factors.len() < 2 {
                return Err(Error::DescriptorRange("free product needs at least 2 factors".into()));
            }
            if factors.len() > u16::MAX as usize {
                return Err(Error::DescriptorRange("too many free product factors".into()));
            }
            let tables = factors
                .iter()
                .map(FiniteTable::from_descriptor)
                .collect::<Result<Vec<_>>>()?;
            Backend::FreeProduct { factors: tables }
        }
        GroupDescriptor::DirectProduct { left, right } => Backend::DirectProduct {
            left: build_group((**left).clone())?,
            right: build_group((**right).clone())?,
        },
        GroupDescriptor::Lattice { dim } => {
            if *dim < 1 {
                return Err(Error::DescriptorRange("lattice dimension must be at least 1".into()));
            }
            Backend::Lattice { dim: *dim }
        }
    };
    Ok(Arc::new(Group { descriptor, backend }))
}

impl Group {
    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    /// Number of elements, if finite.
    pub fn order(&self) -> Option<u64> {
        self.descriptor.order()
    }

    pub fn identity(&self) -> Elem {
        match &self.backend {
            Backend::Free { .. } => Elem(ElemData::Word(Vec::new())),
            Backend::Cyclic { .. } => Elem(ElemData::Index(0)),
            Backend::Table(t) => Elem(ElemData::Index(t.id)),
            Backend::FreeProduct { .. } => Elem(ElemData::Syllables(Vec::new())),
            Backend::DirectProduct { left, right } => Elem(ElemData::Pair(
                Box::new(left.identity()),
                Box::new(right.identity()),
            )),
            Backend::Lattice { dim } => Elem(ElemData::Vector(vec![0; *dim as usize])),
        }
    }

    pub fn is_identity(&self, g: &Elem) -> bool {
        *g == self.identity()
    }

    /// Canonical product of two elements.
    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match (&self.backend, &a.0, &b.0) {
            (Backend::Free { .. }, ElemData::Word(u), ElemData::Word(v)) => {
                let mut w = u.clone();
                w.reserve(v.len());
                for &x in v {
                    if w.last() == Some(&-x) {
                        w.pop();
                    } else {
                        w.push(x);
                    }
                }
                Elem(ElemData::Word(w))
            }
            (Backend::Cyclic { order }, ElemData::Index(i), ElemData::Index(j)) => {
                Elem(ElemData::Index((i + j) % order))
            }
            (Backend::Table(t), ElemData::Index(i), ElemData::Index(j)) => {
                Elem(ElemData::Index(t.mul(*i, *j)))
            }
            (Backend::FreeProduct { factors }, ElemData::Syllables(u), ElemData::Syllables(v)) => {
                let mut w = u.clone();
                w.reserve(v.len());
                for &(f, x) in v {
                    match w.last().copied() {
                        Some((g, y)) if g == f => {
                            let t = &factors[f as usize];
                            let z = t.mul(y, x);
                            if z == t.id {
                                w.pop();
                            } else {
                                *w.last_mut().expect("nonempty") = (f, z);
                            }
                        }
                        _ => w.push((f, x)),
                    }
                }
                Elem(ElemData::Syllables(w))
            }
            (Backend::DirectProduct { left, right }, ElemData::Pair(a1, a2), ElemData::Pair(b1, b2)) => {
                Elem(ElemData::Pair(
                    Box::new(left.mul(a1, b1)),
                    Box::new(right.mul(a2, b2)),
                ))
            }
            (Backend::Lattice { .. }, ElemData::Vector(u), ElemData::Vector(v)) => {
                Elem(ElemData::Vector(u.iter().zip(v).map(|(x, y)| x + y).collect()))
            }
            _ => panic!("element does not belong to this group"),
        }
    }

    /// Canonical inverse.
    pub fn inv(&self, a: &Elem) -> Elem {
        match (&self.backend, &a.0) {
            (Backend::Free { .. }, ElemData::Word(u)) => {
                Elem(ElemData::Word(u.iter().rev().map(|&x| -x).collect()))
            }
            (Backend::Cyclic { order }, ElemData::Index(i)) => {
                Elem(ElemData::Index((order - i) % order))
            }
            (Backend::Table(t), ElemData::Index(i)) => Elem(ElemData::Index(t.inv(*i))),
            (Backend::FreeProduct { factors }, ElemData::Syllables(u)) => Elem(ElemData::Syllables(
                u.iter()
                    .rev()
                    .map(|&(f, x)| (f, factors[f as usize].inv(x)))
                    .collect(),
            )),
            (Backend::DirectProduct { left, right }, ElemData::Pair(a1, a2)) => Elem(
                ElemData::Pair(Box::new(left.inv(a1)), Box::new(right.inv(a2))),
            ),
            (Backend::Lattice { .. }, ElemData::Vector(u)) => {
                Elem(ElemData::Vector(u.iter().map(|&x| -x).collect()))
            }
            _ => panic!("element does not belong to this group"),
        }
    }

    /// The standard symmetric generating set, sorted and deduplicated.
    ///
    /// Conventions: free groups use all generator letters and their inverses;
    /// cyclic groups use the step and its inverse; table groups use every
    /// non-identity element; free products use the union of the factors'
    /// non-identity elements; direct products embed both factors' sets;
    /// lattices use the unit vectors and their negatives.
    pub fn generators(&self) -> Vec<Elem> {
        let mut gens = match &self.backend {
            Backend::Free { rank } => {
                let mut v = Vec::with_capacity(2 * *rank as usize);
                for i in 1..=*rank as i32 {
                    v.push(Elem(ElemData::Word(vec![i])));
                    v.push(Elem(ElemData::Word(vec![-i])));
                }
                v
            }
            Backend::Cyclic { order } => {
                vec![
                    Elem(ElemData::Index(1)),
                    Elem(ElemData::Index(order - 1)),
                ]
            }
            Backend::Table(t) => (0..t.order)
                .filter(|&i| i != t.id)
                .map(|i| Elem(ElemData::Index(i)))
                .collect(),
            Backend::FreeProduct { factors } => {
                let mut v = Vec::new();
                for (fi, t) in factors.iter().enumerate() {
                    for x in 0..t.order {
                        if x != t.id {
                            v.push(Elem(ElemData::Syllables(vec![(fi as u16, x)])));
                        }
                    }
                }
                v
            }
            Backend::DirectProduct { left, right } => {
                let mut v = Vec::new();
                let (le, re) = (left.identity(), right.identity());
                for s in left.generators() {
                    v.push(Elem(ElemData::Pair(Box::new(s), Box::new(re.clone()))));
                }
                for s in right.generators() {
                    v.push(Elem(ElemData::Pair(Box::new(le.clone()), Box::new(s))));
                }
                v
            }
            Backend::Lattice { dim } => {
                let mut v = Vec::new();
                for i in 0..*dim as usize {
                    for sign in [1i64, -1] {
                        let mut coords = vec![0i64; *dim as usize];
                        coords[i] = sign;
                        v.push(Elem(ElemData::Vector(coords)));
                    }
                }
                v
            }
        };
        gens.sort();
        gens.dedup();
        gens
    }

    /// All elements of word length at most `radius`, breadth-first with each
    /// layer sorted by encoding; deterministic across runs.
    pub fn ball(&self, radius: u32, cap: usize) -> Result<Vec<Elem>> {
        let gens = self.generators();
        let mut seen: HashSet<Elem> = HashSet::new();
        let mut out = Vec::new();
        let mut frontier = vec![self.identity()];
        seen.insert(self.identity());
        out.push(self.identity());
        for r in 1..=radius {
            let mut layer = Vec::new();
            for x in &frontier {
                for s in &gens {
                    let y = self.mul(x, s);
                    if seen.insert(y.clone()) {
                        layer.push(y);
                    }
                }
            }
            if layer.is_empty() {
                break;
            }
            if out.len() + layer.len() > cap {
                return Err(Error::BallCapExceeded {
                    cap,
                    radius,
                    radius_reached: r - 1,
                });
            }
            layer.sort();
            out.extend(layer.iter().cloned());
            frontier = layer;
        }
        Ok(out)
    }

    /// Geodesic word length with respect to the standard generating set.
    pub fn word_length(&self, g: &Elem) -> u64 {
        match (&self.backend, &g.0) {
            (Backend::Free { .. }, ElemData::Word(u)) => u.len() as u64,
            (Backend::Cyclic { order }, ElemData::Index(i)) => u64::from((*i).min(order - i)),
            (Backend::Table(t), ElemData::Index(i)) => u64::from(*i != t.id),
            (Backend::FreeProduct { .. }, ElemData::Syllables(u)) => u.len() as u64,
            (Backend::DirectProduct { left, right }, ElemData::Pair(a, b)) => {
                left.word_length(a) + right.word_length(b)
            }
            (Backend::Lattice { .. }, ElemData::Vector(u)) => {
                u.iter().map(|&x| x.unsigned_abs()).sum()
            }
            _ => panic!("element does not belong to this group"),
        }
    }

    /// Whether the encoding is a canonical form of this group.
    pub fn is_valid(&self, g: &Elem) -> bool {
        match (&self.backend, &g.0) {
            (Backend::Free { rank }, ElemData::Word(u)) => {
                u.iter().all(|&x| x != 0 && x.unsigned_abs() <= *rank)
                    && u.windows(2).all(|w| w[0] != -w[1])
            }
            (Backend::Cyclic { order }, ElemData::Index(i)) => i < order,
            (Backend::Table(t), ElemData::Index(i)) => *i < t.order,
            (Backend::FreeProduct { factors }, ElemData::Syllables(u)) => {
                u.iter().all(|&(f, x)| {
                    factors
                        .get(f as usize)
                        .is_some_and(|t| x < t.order && x != t.id)
                }) && u.windows(2).all(|w| w[0].0 != w[1].0)
            }
            (Backend::DirectProduct { left, right }, ElemData::Pair(a, b)) => {
                left.is_valid(a) && right.is_valid(b)
            }
            (Backend::Lattice { dim }, ElemData::Vector(u)) => u.len() == *dim as usize,
            _ => false,
        }
    }

    /// Full element list for finite groups, in canonical order.
    pub fn elements(&self) -> Option<Vec<Elem>> {
        match &self.backend {
            Backend::Cyclic { order } => Some((0..*order).map(|i| Elem(ElemData::Index(i))).collect()),
            Backend::Table(t) => Some((0..t.order).map(|i| Elem(ElemData::Index(i))).collect()),
            Backend::DirectProduct { left, right } => {
                let ls = left.elements()?;
                let rs = right.elements()?;
                let mut out = Vec::with_capacity(ls.len() * rs.len());
                for l in &ls {
                    for r in &rs {
                        out.push(Elem(ElemData::Pair(Box::new(l.clone()), Box::new(r.clone()))));
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub(crate) fn backend_free_rank(&self) -> Option<u32> {
        match &self.backend {
            Backend::Free { rank } => Some(*rank),
            _ => None,
        }
    }

    pub(crate) fn backend_product(&self) -> Option<(&Arc<Group>, &Arc<Group>)> {
        match &self.backend {
            Backend::DirectProduct { left, right } => Some((left, right)),
            _ => None,
        }
    }

    pub(crate) fn split_pair(g: &Elem) -> Option<(&Elem, &Elem)> {
        match &g.0 {
            ElemData::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub(crate) fn pair(a: Elem, b: Elem) -> Elem {
        Elem(ElemData::Pair(Box::new(a), Box::new(b)))
    }
}
