//! Pareto dominance, fronts, and evidence for the Pareto attitude of a notion.

use crate::enumerate::{check_assignment_bound, for_each_assignment};
use crate::error::Result;
use crate::model::{Allocation, IndivisibleInstance, Limits};
use crate::rational::Rational;

use super::{enumerate_with, Checker, Notion};

/// `p` is at least `q` everywhere and strictly larger somewhere.
pub fn profile_dominates(p: &[Rational], q: &[Rational]) -> bool {
    p.iter().zip(q).all(|(x, y)| x >= y) && p.iter().zip(q).any(|(x, y)| x > y)
}

pub fn pareto_dominates(instance: &IndivisibleInstance, a: &Allocation, b: &Allocation) -> bool {
    profile_dominates(&instance.value_profile(a), &instance.value_profile(b))
}

pub(crate) fn front_of_profiles(profiles: &[Vec<Rational>]) -> Vec<usize> {
    (0..profiles.len())
        .filter(|&k| !profiles.iter().any(|other| profile_dominates(other, &profiles[k])))
        .collect()
}

/// Indices of the members of `set` not dominated by another member.
pub fn pareto_front(instance: &IndivisibleInstance, set: &[Allocation]) -> Vec<usize> {
    let profiles: Vec<Vec<Rational>> = set.iter().map(|a| instance.value_profile(a)).collect();
    front_of_profiles(&profiles)
}

fn all_profiles(checker: &Checker<'_>) -> Result<Vec<(Allocation, Vec<Rational>)>> {
    let inst = checker.instance;
    check_assignment_bound(inst.m, inst.n(), &checker.limits, "Pareto scan")?;
    let mut out = Vec::new();
    for_each_assignment(inst.m, inst.n(), |_, bundles| {
        let a = Allocation { bundles: bundles.to_vec() };
        let p = checker.profile(&a);
        out.push((a, p));
    });
    Ok(out)
}

/// No complete allocation dominates `a`.
pub fn is_pareto_optimal(instance: &IndivisibleInstance, a: &Allocation, limits: &Limits) -> Result<bool> {
    let checker = Checker::new(instance, *limits)?;
    let mine = checker.profile(a);
    Ok(!all_profiles(&checker)?.iter().any(|(_, p)| profile_dominates(p, &mine)))
}

/// How a notion's acceptable set sits relative to Pareto dominance on one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoEvidence {
    pub notion: Notion,
    pub acceptable: usize,
    /// Every acceptable allocation is Pareto optimal.
    pub all_optimal: bool,
    /// Every allocation dominating an acceptable one is acceptable.
    pub closed_under_domination: bool,
    /// Nonempty acceptable set with no Pareto optimal member.
    pub no_optimal_member: bool,
    /// For each dominated acceptable allocation, one allocation dominating it.
    pub dominated: Vec<(Allocation, Allocation)>,
}

pub fn pareto_evidence(notion: Notion, instance: &IndivisibleInstance, limits: &Limits) -> Result<ParetoEvidence> {
    let checker = Checker::new(instance, *limits)?;
    let set = enumerate_with(&checker, notion)?;
    let everything = all_profiles(&checker)?;
    let mut closed = true;
    let mut dominated = Vec::new();
    for a in &set.allocations {
        let pa = checker.profile(a);
        let mut first = None;
        for (b, pb) in &everything {
            if profile_dominates(pb, &pa) {
                if first.is_none() {
                    first = Some(b.clone());
                }
                if closed && !set.allocations.contains(b) {
                    closed = false;
                }
            }
        }
        if let Some(b) = first {
            dominated.push((a.clone(), b));
        }
    }
    Ok(ParetoEvidence {
        notion,
        acceptable: set.len(),
        all_optimal: dominated.is_empty(),
        closed_under_domination: closed,
        no_optimal_member: !set.is_empty() && dominated.len() == set.len(),
        dominated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notions::tests::{additive_instance, arb_instance};
    use crate::notions::ShareKind;
    use proptest::prelude::*;

    fn five_item() -> IndivisibleInstance {
        additive_instance(&[&[5, 4, 3, 2, 1], &[4, 3, 3, 2, 2], &[4, 2, 2, 3, 3]], &[(1, 3), (1, 3), (1, 3)])
    }

    #[test]
    fn wef_allocations_all_dominated() {
        let inst = five_item();
        let good = Allocation::from_owners(&[0, 1, 1, 2, 2], 3);
        let wef1 = Allocation::from_owners(&[0, 1, 2, 2, 1], 3);
        let wef2 = Allocation::from_owners(&[0, 2, 1, 1, 2], 3);
        assert!(pareto_dominates(&inst, &good, &wef1));
        assert!(pareto_dominates(&inst, &good, &wef2));
        assert!(!pareto_dominates(&inst, &good, &good));
        let ev = pareto_evidence(Notion::Wef, &inst, &Limits::default()).unwrap();
        assert_eq!(ev.acceptable, 2);
        assert!(ev.no_optimal_member);
        let set = crate::notions::enumerate_acceptable(Notion::Wef, &inst, &Limits::default()).unwrap();
        let mut listed = set.allocations.clone();
        listed.sort();
        let mut expected = vec![wef1, wef2];
        expected.sort();
        assert_eq!(listed, expected);
    }

    #[test]
    fn swapping_first_two_items_dominates() {
        let inst = additive_instance(&[&[1, 1, 1], &[2, 1, 1], &[2, 1, 1]], &[(4, 10), (3, 10), (3, 10)]);
        let a = Allocation::from_owners(&[0, 1, 2], 3);
        let b = Allocation::from_owners(&[1, 0, 2], 3);
        assert!(pareto_dominates(&inst, &b, &a));
        assert!(!is_pareto_optimal(&inst, &a, &Limits::default()).unwrap());
        assert_eq!(pareto_front(&inst, &[a, b]), vec![1]);
        let ev = pareto_evidence(Notion::Ce, &inst, &Limits::default()).unwrap();
        assert!(ev.no_optimal_member);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn shares_pro_pareto_and_mwnsw_pareto(inst in arb_instance()) {
            let limits = Limits::default();
            for kind in [ShareKind::Prop, ShareKind::Aps, ShareKind::Wmms] {
                prop_assert!(pareto_evidence(Notion::Share(kind), &inst, &limits).unwrap().closed_under_domination);
            }
            prop_assert!(pareto_evidence(Notion::Mwnsw, &inst, &limits).unwrap().all_optimal);
        }
    }
}
