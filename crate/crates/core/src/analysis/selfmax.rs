use crate::error::{Error, Result};
use crate::model::{Allocation, Bundle, IndivisibleInstance, IndivisibleValuation, Limits};
use crate::notions::{enumerate_with, Checker, Notion, ShareKind};
use crate::rational::Rational;
use crate::shares;

#[derive(Debug, Clone, PartialEq)]
pub struct SelfMaxReport {
    /// Share of the true valuation.
    pub share_true: Rational,
    /// Share of the reported valuation.
    pub share_alt: Rational,
    /// A bundle meeting the reported share while worth at most the true share.
    pub witness: Option<Bundle>,
    /// Least true value among bundles meeting the reported share.
    pub worst_bundle: Option<(Bundle, Rational)>,
    /// With an instance context: least true value over allocations acceptable to every agent
    /// when the agent reports the alternative valuation.
    pub worst_allocation: Option<(Allocation, Rational)>,
}

impl SelfMaxReport {
    pub fn self_maximizing(&self) -> bool {
        self.witness.is_some()
    }
}

fn share_of(kind: ShareKind, v: &IndivisibleValuation, b: &Rational, context: Option<(&IndivisibleInstance, usize)>, limits: &Limits) -> Result<Rational> {
    Ok(match kind {
        ShareKind::Prop => shares::prop_share(v, b)?,
        ShareKind::Aps => shares::aps(v, b, limits)?.value,
        ShareKind::Pess => shares::pessimistic_share_default(v, b, limits)?.value,
        ShareKind::MmsMinus => shares::mms_minus(v, b, limits)?.value,
        ShareKind::Wmms => {
            let (inst, i) = context.ok_or_else(|| Error::Argument("WMMS needs the full entitlement vector".into()))?;
            shares::wmms(&with_valuation(inst, i, v)?, i, limits)?.value
        }
    })
}

fn with_valuation(inst: &IndivisibleInstance, i: usize, v: &IndivisibleValuation) -> Result<IndivisibleInstance> {
    let mut vals = inst.valuations.clone();
    vals[i] = v.clone();
    IndivisibleInstance::new(inst.m, vals, inst.entitlements.clone())
}

/// Whether reporting `v_alt` instead of the true `v` cannot raise the worst bundle the share guarantees:
/// some bundle meets the reported share yet is worth at most the true share.
///
/// `context` supplies the other agents (their entitlements always, their valuations for
/// `worst_allocation`) and the agent's index; it is required for WMMS.
pub fn self_maximizing_check(
    kind: ShareKind,
    v: &IndivisibleValuation,
    v_alt: &IndivisibleValuation,
    b: &Rational,
    context: Option<(&IndivisibleInstance, usize)>,
    limits: &Limits,
) -> Result<SelfMaxReport> {
    let m = v.item_count();
    if v_alt.item_count() != m {
        return Err(Error::Structural("the two valuations cover different item counts".into()));
    }
    if let Some((inst, i)) = context {
        if inst.entitlements.get(i) != b || inst.m != m {
            return Err(Error::Argument("context disagrees with the entitlement or item count".into()));
        }
    }
    let share_true = share_of(kind, v, b, context, limits)?;
    let share_alt = share_of(kind, v_alt, b, context, limits)?;
    let (truth, alt) = (v.subset_values(limits)?, v_alt.subset_values(limits)?);
    let meets: Vec<usize> = (0..truth.len()).filter(|&s| alt[s] >= share_alt).collect();
    let witness = meets.iter().find(|&&s| truth[s] <= share_true).map(|&s| Bundle(s as u64));
    let worst_bundle = meets.iter().min_by(|&&x, &&y| truth[x].cmp(&truth[y])).map(|&s| (Bundle(s as u64), truth[s].clone()));
    let worst_allocation = match context {
        Some((inst, i)) => {
            let reported = with_valuation(inst, i, v_alt)?;
            let checker = Checker::new(&reported, *limits)?;
            let set = enumerate_with(&checker, Notion::Share(kind))?;
            set.allocations
                .into_iter()
                .map(|a| {
                    let value = v.value(a.bundles[i]);
                    (a, value)
                })
                .min_by(|x, y| x.1.cmp(&y.1))
        }
        None => None,
    };
    Ok(SelfMaxReport { share_true, share_alt, witness, worst_bundle, worst_allocation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Entitlements;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn add(xs: &[i64]) -> IndivisibleValuation {
        IndivisibleValuation::additive(xs.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn wmms_rewards_a_misreport() {
        let v = add(&[5, 3, 1]);
        let b = Entitlements::new(vec![rat(1, 2), rat(3, 10), rat(1, 5)]).unwrap();
        let inst = IndivisibleInstance::new(3, vec![v.clone(), v.clone(), v.clone()], b).unwrap();
        let r = self_maximizing_check(ShareKind::Wmms, &v, &add(&[5, 3, 2]), &rat(1, 2), Some((&inst, 0)), &Limits::default()).unwrap();
        assert_eq!(r.share_true, rat(5, 2));
        assert_eq!(r.share_alt, int(5));
        assert!(!r.self_maximizing());
        // Bundle {e2, e3} meets the reported share alone; inside an allocation every agent needs an item.
        assert_eq!(r.worst_bundle.unwrap().1, int(4));
        let (a, value) = r.worst_allocation.unwrap();
        assert_eq!(value, int(5));
        assert!(a.bundles[0].contains(0));
    }

    #[test]
    fn identical_report_is_self_maximizing() {
        let v = add(&[4, 2, 1]);
        for kind in [ShareKind::Aps, ShareKind::MmsMinus] {
            assert!(self_maximizing_check(kind, &v, &v, &rat(1, 3), None, &Limits::default()).unwrap().self_maximizing());
        }
    }

    #[test]
    fn unattained_prop_share_fails_even_for_the_truth() {
        // 7/3 is not the value of any bundle.
        let v = add(&[4, 2, 1]);
        let r = self_maximizing_check(ShareKind::Prop, &v, &v, &rat(1, 3), None, &Limits::default()).unwrap();
        assert_eq!(r.share_true, rat(7, 3));
        assert!(!r.self_maximizing());
        assert_eq!(r.worst_bundle.unwrap().1, int(3));
    }

    #[test]
    fn wmms_needs_context() {
        let v = add(&[1, 1]);
        assert!(self_maximizing_check(ShareKind::Wmms, &v, &v, &rat(1, 2), None, &Limits::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn aps_is_self_maximizing(
            (v, w) in (1usize..5).prop_flat_map(|m| (proptest::collection::vec(0i64..6, m), proptest::collection::vec(0i64..6, m))),
            k in 1i64..10,
        ) {
            let fix = |mut x: Vec<i64>| { if x.iter().all(|&y| y == 0) { x[0] = 1; } add(&x) };
            let r = self_maximizing_check(ShareKind::Aps, &fix(v), &fix(w), &rat(k, 10), None, &Limits::default()).unwrap();
            prop_assert!(r.self_maximizing());
        }
    }
}
