//! Grammar round-trip property and diagnostic quality tests.
//!
//! The renderer produces a canonical one-line form; parsing that form
//! must reproduce the syntax tree exactly. Diagnostics carry line and
//! column positions that point at the offending token.

use num::rational::BigRational;
use num::BigInt;
use proptest::prelude::*;
use walklab_cli::ast::*;
use walklab_cli::grammar::parse_spec;

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Element literals drawn from the shapes the backends accept: short
/// words, signed integers, and coordinate pairs.
fn elem_strategy() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z][a-z0-9^]{0,4}",
        "-?[0-9]{1,3}",
        ("[a-z][a-z0-9]{0,2}", "-?[0-9]{1,2}").prop_map(|(a, b)| format!("({a},{b})")),
    ]
}

fn elems(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(elem_strategy(), 1..max)
}

fn rational_strategy() -> impl Strategy<Value = BigRational> {
    (-200i64..200, 1i64..50).prop_map(|(n, d)| rat(n, d))
}

fn group_strategy() -> impl Strategy<Value = GroupExpr> {
    let leaf = prop_oneof![
        (1u32..5).prop_map(GroupExpr::Free),
        (1u32..12).prop_map(GroupExpr::Cyclic),
        (1u32..4).prop_map(GroupExpr::Lattice),
        "[a-z][a-z0-9_]{0,8}\\.json".prop_map(GroupExpr::FiniteTable),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(GroupExpr::FreeProduct),
            (inner.clone(), inner)
                .prop_map(|(a, b)| GroupExpr::DirectProduct(Box::new(a), Box::new(b))),
        ]
    })
}

fn measure_strategy() -> impl Strategy<Value = MeasureExpr> {
    let leaf = prop_oneof![
        rational_strategy().prop_map(MeasureExpr::LazyUniform),
        Just(MeasureExpr::Delta),
        prop::collection::vec((elem_strategy(), rational_strategy()), 1..4)
            .prop_map(MeasureExpr::Table),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        (inner.clone(), inner)
            .prop_map(|(a, b)| MeasureExpr::Product(Box::new(a), Box::new(b)))
    })
}

fn transform_strategy() -> impl Strategy<Value = Transform> {
    prop_oneof![
        elem_strategy().prop_map(Transform::Conjugate),
        elems(4).prop_map(Transform::Smooth),
        rational_strategy().prop_map(Transform::Truncate),
        (1u64..20).prop_map(Transform::Power),
    ]
}

fn policy_strategy() -> impl Strategy<Value = PolicyOverrides> {
    (
        prop::option::of(1usize..100),
        prop::option::of(rational_strategy()),
        prop::option::of(rational_strategy()),
        prop::option::of(rational_strategy()),
    )
        .prop_map(|(window, cauchy_tol, member_dist, nonmember_dist)| PolicyOverrides {
            window,
            cauchy_tol,
            member_dist,
            nonmember_dist,
        })
}

fn analysis_strategy() -> impl Strategy<Value = AnalysisExpr> {
    prop_oneof![
        (1u64..500, elems(4), prop::option::of(rational_strategy()))
            .prop_map(|(n, targets, trunc)| AnalysisExpr::Walk { n, targets, trunc }),
        (
            1u64..500,
            elems(4),
            prop::option::of(rational_strategy()),
            policy_strategy()
        )
            .prop_map(|(n, targets, trunc, policy)| AnalysisExpr::Classify {
                n,
                targets,
                trunc,
                policy,
            }),
        (prop::option::of(1u64..50), prop::option::of(elems(5)))
            .prop_map(|(n, subgroup)| AnalysisExpr::Verify { n, subgroup }),
        (
            elem_strategy(),
            1u64..500,
            prop_oneof![
                (1u32..4).prop_map(ProbeSourceExpr::Radius),
                elems(4).prop_map(ProbeSourceExpr::Candidates),
            ],
            policy_strategy()
        )
            .prop_map(|(base, n, source, policy)| AnalysisExpr::Probe {
                base,
                n,
                source,
                policy,
            }),
        (elems(5), 1u64..100, prop::option::of(rational_strategy())).prop_map(
            |(subgroup, n, threshold)| AnalysisExpr::Chain {
                subgroup,
                n,
                threshold,
            }
        ),
    ]
}

fn spec_strategy() -> impl Strategy<Value = ExperimentSpec> {
    (
        group_strategy(),
        prop::option::of((
            measure_strategy(),
            prop::collection::vec(transform_strategy(), 0..3),
        )),
        prop::option::of(analysis_strategy()),
    )
        .prop_map(|(group, measure, analysis)| ExperimentSpec {
            group,
            measure: measure.map(|(base, transforms)| MeasureSpec { base, transforms }),
            analysis,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parse_inverts_render(spec in spec_strategy()) {
        let text = spec.render();
        let reparsed = parse_spec(&text)
            .unwrap_or_else(|d| panic!("failed to reparse {text:?}: {d}"));
        prop_assert_eq!(reparsed, spec);
    }

    #[test]
    fn render_is_a_fixed_point(spec in spec_strategy()) {
        let once = spec.render();
        let twice = parse_spec(&once).unwrap().render();
        prop_assert_eq!(once, twice);
    }
}

#[test]
fn smoothing_pipeline_example_parses() {
    let text = "group free_product(cyclic(2), cyclic(3)); \
                measure lazy_uniform(1/4) |> smooth({e,a}); \
                walk n=12 targets=[e,a,b]";
    let spec = parse_spec(text).unwrap();
    assert_eq!(
        spec.group,
        GroupExpr::FreeProduct(vec![GroupExpr::Cyclic(2), GroupExpr::Cyclic(3)])
    );
    let measure = spec.measure.as_ref().unwrap();
    assert_eq!(measure.base, MeasureExpr::LazyUniform(rat(1, 4)));
    assert_eq!(
        measure.transforms,
        vec![Transform::Smooth(vec!["e".into(), "a".into()])]
    );
    assert_eq!(
        spec.analysis,
        Some(AnalysisExpr::Walk {
            n: 12,
            targets: vec!["e".into(), "a".into(), "b".into()],
            trunc: None,
        })
    );
    assert_eq!(spec.render(), text);
}

#[test]
fn product_chain_example_parses() {
    let text = "group direct_product(free(2), cyclic(3)); \
                measure product(lazy_uniform(1/4), table{e:1/2, c:1/4, c2:1/4}); \
                chain F={(e,e),(e,c),(e,c2)} n=10";
    let spec = parse_spec(text).unwrap();
    assert_eq!(
        spec.group,
        GroupExpr::DirectProduct(
            Box::new(GroupExpr::Free(2)),
            Box::new(GroupExpr::Cyclic(3))
        )
    );
    let measure = spec.measure.as_ref().unwrap();
    assert_eq!(
        measure.base,
        MeasureExpr::Product(
            Box::new(MeasureExpr::LazyUniform(rat(1, 4))),
            Box::new(MeasureExpr::Table(vec![
                ("e".into(), rat(1, 2)),
                ("c".into(), rat(1, 4)),
                ("c2".into(), rat(1, 4)),
            ])),
        )
    );
    assert_eq!(
        spec.analysis,
        Some(AnalysisExpr::Chain {
            subgroup: vec!["(e,e)".into(), "(e,c)".into(), "(e,c2)".into()],
            n: 10,
            threshold: None,
        })
    );
    assert_eq!(spec.render(), text);
}

#[test]
fn comments_and_layout_are_ignored() {
    let text = "# an experiment\n\
                group free(2);   # the group\n\
                \n\
                measure lazy_uniform(0); # period-two shape\n\
                walk n=4 targets=[a]\n";
    let spec = parse_spec(text).unwrap();
    assert_eq!(spec.group, GroupExpr::Free(2));
    assert_eq!(
        spec.measure.unwrap().base,
        MeasureExpr::LazyUniform(rat(0, 1))
    );
}

#[test]
fn trailing_semicolon_is_allowed() {
    let spec = parse_spec("group cyclic(6);").unwrap();
    assert_eq!(spec.group, GroupExpr::Cyclic(6));
    assert!(spec.measure.is_none());
    assert!(spec.analysis.is_none());
}

#[test]
fn group_statement_must_come_first() {
    let err = parse_spec("measure delta").unwrap_err();
    assert_eq!((err.line, err.col), (1, 1));
    assert!(err.message.contains("`group` statement first"), "{err}");
}

#[test]
fn unknown_group_constructor_is_located() {
    let err = parse_spec("group fre(2)").unwrap_err();
    assert_eq!((err.line, err.col), (1, 7));
    assert!(err.message.contains("unknown group constructor `fre`"), "{err}");
}

#[test]
fn errors_on_later_lines_carry_the_line_number() {
    let err = parse_spec("group free(2);\nmeasure lazy_uniform(1/0)").unwrap_err();
    assert_eq!((err.line, err.col), (2, 24));
    assert!(err.message.contains("denominator must be nonzero"), "{err}");
}

#[test]
fn unknown_statement_lists_the_choices() {
    let err = parse_spec("group free(2); wander n=3").unwrap_err();
    assert!(err.message.contains("unknown statement `wander`"), "{err}");
    assert!(err.message.contains("walk"), "{err}");
}

#[test]
fn duplicate_statements_are_rejected() {
    let err = parse_spec("group free(2); group cyclic(3)").unwrap_err();
    assert!(err.message.contains("duplicate group"), "{err}");
    let err =
        parse_spec("group free(2); measure delta; measure delta").unwrap_err();
    assert!(err.message.contains("duplicate measure"), "{err}");
    let err = parse_spec(
        "group free(2); measure delta; walk n=1 targets=[a]; walk n=2 targets=[a]",
    )
    .unwrap_err();
    assert!(err.message.contains("duplicate analysis"), "{err}");
}

#[test]
fn measure_must_precede_analysis() {
    let err =
        parse_spec("group free(2); walk n=1 targets=[a]; measure delta").unwrap_err();
    assert!(err.message.contains("measure must precede"), "{err}");
}

#[test]
fn unknown_and_duplicate_parameters_are_rejected() {
    let err = parse_spec("group free(2); measure delta; walk n=2 bogus=3").unwrap_err();
    assert!(
        err.message.contains("unknown parameter `bogus` for walk"),
        "{err}"
    );
    assert!(err.message.contains("n, targets, trunc"), "{err}");
    let err =
        parse_spec("group free(2); measure delta; walk n=2 n=3 targets=[a]").unwrap_err();
    assert!(err.message.contains("duplicate parameter `n`"), "{err}");
}

#[test]
fn missing_required_parameters_are_reported() {
    let err = parse_spec("group free(2); measure delta; walk targets=[a]").unwrap_err();
    assert!(err.message.contains("walk requires n=INT"), "{err}");
    let err = parse_spec("group free(2); measure delta; walk n=2").unwrap_err();
    assert!(err.message.contains("walk requires targets=[...]"), "{err}");
    let err = parse_spec("group cyclic(3); measure delta; chain n=2").unwrap_err();
    assert!(err.message.contains("chain requires F={...}"), "{err}");
}

#[test]
fn probe_source_is_exactly_one_of_radius_or_candidates() {
    let err =
        parse_spec("group free(2); measure delta; probe base=a n=4").unwrap_err();
    assert!(
        err.message.contains("either radius=INT or candidates=[...]"),
        "{err}"
    );
    let err = parse_spec(
        "group free(2); measure delta; probe base=a n=4 radius=1 candidates=[b]",
    )
    .unwrap_err();
    assert!(err.message.contains("not both"), "{err}");
}

#[test]
fn free_product_needs_two_factors() {
    let err = parse_spec("group free_product(cyclic(2))").unwrap_err();
    assert!(err.message.contains("at least two factors"), "{err}");
}

#[test]
fn unterminated_table_path_is_reported() {
    let err = parse_spec("group finite_table(\"s3.json)").unwrap_err();
    assert!(err.message.contains("closing"), "{err}");
}

#[test]
fn empty_element_lists_are_rejected() {
    let err = parse_spec("group free(2); measure delta; walk n=1 targets=[]").unwrap_err();
    assert!(err.message.contains("element literal"), "{err}");
}

#[test]
fn nested_pair_literals_stay_whole() {
    let spec = parse_spec(
        "group direct_product(free(2), cyclic(3)); \
         measure delta; walk n=2 targets=[(ab,c2),(e,e)]",
    )
    .unwrap();
    match spec.analysis.unwrap() {
        AnalysisExpr::Walk { targets, .. } => {
            assert_eq!(targets, vec!["(ab,c2)".to_string(), "(e,e)".to_string()]);
        }
        other => panic!("unexpected analysis {other:?}"),
    }
}
