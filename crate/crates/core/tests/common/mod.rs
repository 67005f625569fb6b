//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use num::rational::BigRational;
use walklab_core::group::{build_group, Elem, Group, GroupDescriptor, TableSpec};
use walklab_core::measure::Measure;
use walklab_core::DEFAULT_SUPPORT_CAP;

pub const CAP: usize = DEFAULT_SUPPORT_CAP;

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

pub fn free(rank: u32) -> Arc<Group> {
    build_group(GroupDescriptor::Free { rank }).unwrap()
}

pub fn cyclic(order: u32) -> Arc<Group> {
    build_group(GroupDescriptor::Cyclic { order }).unwrap()
}

pub fn line() -> Arc<Group> {
    build_group(GroupDescriptor::Lattice { dim: 1 }).unwrap()
}

pub fn grid() -> Arc<Group> {
    build_group(GroupDescriptor::Lattice { dim: 2 }).unwrap()
}

/// Free product of a 2-cycle (letter `a`) and a 3-cycle (letters `b`, `b2`).
pub fn c2_c3() -> Arc<Group> {
    build_group(GroupDescriptor::FreeProduct {
        factors: vec![
            GroupDescriptor::Cyclic { order: 2 },
            GroupDescriptor::Cyclic { order: 3 },
        ],
    })
    .unwrap()
}

/// Multiplication table of the symmetric group on three symbols, indexed
/// e, r, r2, s, sr, sr2 (r the 3-cycle, s a reflection).
pub fn s3_spec() -> TableSpec {
    TableSpec {
        order: 6,
        mul: vec![
            0, 1, 2, 3, 4, 5, //
            1, 2, 0, 5, 3, 4, //
            2, 0, 1, 4, 5, 3, //
            3, 4, 5, 0, 1, 2, //
            4, 5, 3, 2, 0, 1, //
            5, 3, 4, 1, 2, 0,
        ],
        inv: vec![0, 2, 1, 3, 4, 5],
        id: 0,
    }
}

pub fn s3() -> Arc<Group> {
    build_group(GroupDescriptor::FiniteTable(s3_spec())).unwrap()
}

pub fn f2_c3() -> Arc<Group> {
    build_group(GroupDescriptor::DirectProduct {
        left: Box::new(GroupDescriptor::Free { rank: 2 }),
        right: Box::new(GroupDescriptor::Cyclic { order: 3 }),
    })
    .unwrap()
}

pub fn el(group: &Arc<Group>, text: &str) -> Elem {
    group.parse_elem(text).unwrap()
}

pub fn lazy(group: &Arc<Group>, num: i64, den: i64) -> Measure {
    Measure::lazy_uniform(group.clone(), &rat(num, den)).unwrap()
}

/// The weighted 3-cycle step `{e: 1/2, c: 1/4, c2: 1/4}`.
pub fn c3_table_step() -> Measure {
    let g = cyclic(3);
    Measure::from_weights(
        g.clone(),
        vec![
            (el(&g, "e"), rat(1, 2)),
            (el(&g, "c"), rat(1, 4)),
            (el(&g, "c2"), rat(1, 4)),
        ],
    )
    .unwrap()
}

/// Lazy step on the symmetric group supported on one reflection and both
/// rotations: `{e: 1/4, r: 1/4, r2: 1/4, s: 1/4}`.
pub fn s3_step() -> Measure {
    let g = s3();
    Measure::from_weights(
        g.clone(),
        vec![
            (el(&g, "e"), rat(1, 4)),
            (el(&g, "g1"), rat(1, 4)),
            (el(&g, "g2"), rat(1, 4)),
            (el(&g, "g3"), rat(1, 4)),
        ],
    )
    .unwrap()
}

/// Product step on free(2) x cyclic(3): lazy uniform on the free part,
/// the weighted 3-cycle step on the finite part.
pub fn f2c3_step() -> Measure {
    let product_group = f2_c3();
    let phi = lazy(&free(2), 1, 4);
    let psi = c3_table_step();
    Measure::product(&phi, &psi, product_group).unwrap()
}
