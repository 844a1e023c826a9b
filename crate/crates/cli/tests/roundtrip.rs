//! Serializing an instance and parsing it back gives the same instance.

use fairalloc::analysis::Setting;
use fairalloc::divisible::{DivInstance, DivValuation, PiecewiseLinear, Point, StepValuation};
use fairalloc::{Entitlements, IndivisibleInstance, IndivisibleValuation, Limits, Rational};
use fairalloc_cli::{parse_instance_str, serialize_instance, InstanceFile};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn arb_entitlements(n: usize) -> impl Strategy<Value = Entitlements> {
    proptest::collection::vec(1i64..40, n).prop_map(|w| {
        let t: i64 = w.iter().sum();
        Entitlements::new(w.iter().map(|&x| q(x, t)).collect()).expect("sums to one")
    })
}

fn arb_names(n: usize) -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec("\\PC{0,8}", n)
}

/// Nonnegative rationals with a positive total.
fn arb_values(m: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec((0i64..30, 1i64..7), m).prop_map(|xs| {
        let mut v: Vec<Rational> = xs.into_iter().map(|(a, b)| q(a, b)).collect();
        if v.iter().all(|x| *x == q(0, 1)) {
            v[0] = q(1, 1);
        }
        v
    })
}

fn subset_sum(values: &[Rational], s: usize) -> Rational {
    values.iter().enumerate().filter(|(e, _)| s >> e & 1 == 1).map(|(_, x)| x.clone()).sum()
}

fn arb_item_valuation(m: usize) -> impl Strategy<Value = IndivisibleValuation> {
    prop_oneof![
        arb_values(m).prop_map(|v| IndivisibleValuation::additive(v).unwrap()),
        (arb_values(m), 1i64..40).prop_map(|(v, c)| IndivisibleValuation::budget_additive(v, q(c, 2)).unwrap()),
        // The larger of two additive valuations is monotone but not additive.
        (arb_values(m), arb_values(m)).prop_map(move |(a, b)| {
            let table = (0..1usize << m).map(|s| subset_sum(&a, s).max(subset_sum(&b, s))).collect();
            IndivisibleValuation::table(m, table, &Limits::default()).unwrap()
        }),
    ]
}

fn arb_items() -> impl Strategy<Value = Setting> {
    (2usize..5, 1usize..6).prop_flat_map(|(n, m)| {
        (proptest::collection::vec(arb_item_valuation(m), n), arb_entitlements(n))
            .prop_map(move |(vals, b)| Setting::Items(IndivisibleInstance::new(m, vals, b).unwrap()))
    })
}

/// Increasing step values at distinct tenths, shifted by up to two infinitesimals when `symbolic`.
fn arb_steps(symbolic: bool) -> impl Strategy<Value = DivValuation> {
    let shift = if symbolic { -2i64..3 } else { 0i64..1 };
    proptest::collection::btree_map(1i64..10, (shift, 1i64..9), 1..5).prop_map(|steps| {
        let mut level = q(0, 1);
        let thresholds: Vec<(Point, Rational)> = steps
            .into_iter()
            .map(|(g, (s, rise))| {
                level += q(rise, 2);
                (Point::new(q(g, 10), q(s, 1)), level.clone())
            })
            .collect();
        DivValuation::Step(StepValuation::from_thresholds(&thresholds).unwrap())
    })
}

fn arb_piecewise() -> impl Strategy<Value = DivValuation> {
    proptest::collection::btree_map(1i64..10, 0i64..6, 0..4).prop_map(|inner| {
        let mut y = q(0, 1);
        let mut pts = vec![(q(0, 1), q(0, 1))];
        for (x, rise) in inner {
            y += q(rise, 3);
            pts.push((q(x, 10), y.clone()));
        }
        pts.push((q(1, 1), y + q(1, 1)));
        DivValuation::PiecewiseLinear(PiecewiseLinear::new(pts).unwrap())
    })
}

fn arb_good() -> impl Strategy<Value = Setting> {
    let steps = (2usize..5).prop_flat_map(|n| (proptest::collection::vec(arb_steps(true), n), arb_entitlements(n)));
    let linear = (2usize..5).prop_flat_map(|n| {
        (proptest::collection::vec(prop_oneof![arb_steps(false), arb_piecewise()], n), arb_entitlements(n))
    });
    let powers = (proptest::collection::vec((1i64..9, 1i64..5), 2), arb_entitlements(2)).prop_map(|(ps, b)| {
        (ps.into_iter().map(|(a, d)| DivValuation::power(q(a, d)).unwrap()).collect::<Vec<_>>(), b)
    });
    prop_oneof![steps, linear, powers].prop_map(|(vals, b)| Setting::Good(DivInstance::new(vals, b).unwrap()))
}

fn with_names(setting: impl Strategy<Value = Setting>) -> impl Strategy<Value = InstanceFile> {
    setting.prop_flat_map(|s| {
        let n = s.n();
        (Just(s), arb_names(n))
    })
    .prop_map(|(setting, names)| InstanceFile { names, setting })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn item_instances_round_trip(f in with_names(arb_items())) {
        let text = serialize_instance(&f);
        let back = parse_instance_str("generated", &text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn divisible_instances_round_trip(f in with_names(arb_good())) {
        let text = serialize_instance(&f);
        let back = parse_instance_str("generated", &text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(serialize_instance(&back), text);
    }
}
