use std::cmp::Ordering;

use crate::divisible::DivValue;
use crate::error::{Error, Result};
use crate::model::{i_improves, Entitlements, Limits};
use crate::notions::Notion;

use super::{cmp, AnyAllocation, Setting, Side};

/// `b` improves on `b_prime` for `agent`: the agent's entitlement rises and nobody else's does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub b: Entitlements,
    pub b_prime: Entitlements,
    pub agent: usize,
}

impl Edge {
    pub fn new(b: Entitlements, b_prime: Entitlements, agent: usize) -> Result<Self> {
        if !i_improves(&b, &b_prime, agent)? {
            return Err(Error::Argument(format!("the first vector does not improve on the second for agent {}", agent + 1)));
        }
        Ok(Edge { b, b_prime, agent })
    }

    fn sides(&self, notion: Notion, setting: &Setting, limits: &Limits) -> Result<(Side, Side)> {
        Ok((setting.acceptable_under(notion, &self.b, limits)?, setting.acceptable_under(notion, &self.b_prime, limits)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeVerdict {
    Holds,
    Fails,
    /// One of the two acceptable sets is empty.
    Inapplicable,
}

/// An acceptable allocation with the value it gives the edge's agent.
#[derive(Debug, Clone, PartialEq)]
pub struct Valued {
    pub allocation: AnyAllocation,
    pub value: DivValue,
}

/// A verdict with the two allocations that decide it: one acceptable under `b`, one under `b_prime`.
#[derive(Debug, Clone, PartialEq)]
pub struct Judgement {
    pub verdict: EdgeVerdict,
    pub under_b: Option<Valued>,
    pub under_b_prime: Option<Valued>,
}

impl Judgement {
    fn inapplicable() -> Self {
        Judgement { verdict: EdgeVerdict::Inapplicable, under_b: None, under_b_prime: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Search<T> {
    Found(T),
    Absent,
    Inapplicable,
}

impl<T> Search<T> {
    pub fn found(&self) -> Option<&T> {
        match self {
            Search::Found(t) => Some(t),
            _ => None,
        }
    }
}

/// Every allocation acceptable under `b_prime` beats every one acceptable under `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Inversion {
    /// Best allocation for the agent under `b`.
    pub best_under_b: Valued,
    /// Worst allocation for the agent under `b_prime`.
    pub worst_under_b_prime: Valued,
}

/// A threshold separating the two acceptable sets the wrong way, with a strict gap on one side.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseDomination {
    /// The largest value under `b`.
    pub threshold: DivValue,
    pub best_under_b: Valued,
    pub worst_under_b_prime: Valued,
    /// An allocation acceptable under `b_prime` strictly above the threshold.
    pub above: Option<Valued>,
    /// An allocation acceptable under `b` strictly below the threshold.
    pub below: Option<Valued>,
    pub pareto_restricted: bool,
}

fn valued(side: &Side, k: usize, value: &DivValue) -> Valued {
    Valued { allocation: side.members[k].allocation.clone(), value: value.clone() }
}

fn upper(side_b: &Side, side_p: &Side, i: usize) -> Judgement {
    if side_b.is_empty() || side_p.is_empty() {
        return Judgement::inapplicable();
    }
    let (a, ap) = (side_b.argmax(i).unwrap(), side_p.argmax(i).unwrap());
    let (va, vp) = (&side_b.members[a].high[i], &side_p.members[ap].high[i]);
    let verdict = if cmp(va, vp) != Ordering::Less { EdgeVerdict::Holds } else { EdgeVerdict::Fails };
    Judgement { verdict, under_b: Some(valued(side_b, a, va)), under_b_prime: Some(valued(side_p, ap, vp)) }
}

fn lower(side_b: &Side, side_p: &Side, i: usize, pareto: bool) -> Judgement {
    if side_b.is_empty() || side_p.is_empty() {
        return Judgement::inapplicable();
    }
    let (a, ap) = (side_b.argmin(i, false).unwrap(), side_p.argmin(i, pareto).unwrap());
    let (va, vp) = (&side_b.members[a].low[i], &side_p.members[ap].low[i]);
    let verdict = if cmp(vp, va) != Ordering::Greater { EdgeVerdict::Holds } else { EdgeVerdict::Fails };
    Judgement { verdict, under_b: Some(valued(side_b, a, va)), under_b_prime: Some(valued(side_p, ap, vp)) }
}

fn inversion(side_b: &Side, side_p: &Side, i: usize) -> Search<Inversion> {
    if side_b.is_empty() || side_p.is_empty() {
        return Search::Inapplicable;
    }
    let (a, ap) = (side_b.argmax(i).unwrap(), side_p.argmin(i, false).unwrap());
    let (va, vp) = (&side_b.members[a].high[i], &side_p.members[ap].low[i]);
    if cmp(vp, va) == Ordering::Greater {
        Search::Found(Inversion { best_under_b: valued(side_b, a, va), worst_under_b_prime: valued(side_p, ap, vp) })
    } else {
        Search::Absent
    }
}

fn inverse_domination(side_b: &Side, side_p: &Side, i: usize, pareto: bool) -> Search<InverseDomination> {
    if side_b.is_empty() || side_p.is_empty() {
        return Search::Inapplicable;
    }
    let a = side_b.argmax(i).unwrap();
    let t = side_b.members[a].high[i].clone();
    let ap = side_p.argmin(i, false).unwrap();
    if cmp(&side_p.members[ap].low[i], &t) == Ordering::Less {
        return Search::Absent;
    }
    let top = side_p.argmax(i).unwrap();
    let above = (cmp(&side_p.members[top].high[i], &t) == Ordering::Greater)
        .then(|| valued(side_p, top, &side_p.members[top].high[i]));
    let below = side_b
        .argmin(i, pareto)
        .filter(|&k| cmp(&side_b.members[k].low[i], &t) == Ordering::Less)
        .map(|k| valued(side_b, k, &side_b.members[k].low[i]));
    if above.is_none() && below.is_none() {
        return Search::Absent;
    }
    Search::Found(InverseDomination {
        best_under_b: valued(side_b, a, &t),
        worst_under_b_prime: valued(side_p, ap, &side_p.members[ap].low[i]),
        threshold: t,
        above,
        below,
        pareto_restricted: pareto,
    })
}

/// Some allocation acceptable under `b` is at least as good for the agent as everything acceptable under `b_prime`.
pub fn check_upper(notion: Notion, setting: &Setting, edge: &Edge, limits: &Limits) -> Result<Judgement> {
    let (sb, sp) = edge.sides(notion, setting, limits)?;
    Ok(upper(&sb, &sp, edge.agent))
}

/// Some allocation acceptable under `b_prime` (on its Pareto front if `pareto`) is at most as good for
/// the agent as everything acceptable under `b`.
pub fn check_lower(notion: Notion, setting: &Setting, edge: &Edge, pareto: bool, limits: &Limits) -> Result<Judgement> {
    let (sb, sp) = edge.sides(notion, setting, limits)?;
    Ok(lower(&sb, &sp, edge.agent, pareto))
}

pub fn find_inversion(notion: Notion, setting: &Setting, edge: &Edge, limits: &Limits) -> Result<Search<Inversion>> {
    let (sb, sp) = edge.sides(notion, setting, limits)?;
    Ok(inversion(&sb, &sp, edge.agent))
}

/// Threshold reported is the largest value under `b`, which works whenever any threshold does.
pub fn find_inverse_domination(
    notion: Notion,
    setting: &Setting,
    edge: &Edge,
    pareto: bool,
    limits: &Limits,
) -> Result<Search<InverseDomination>> {
    let (sb, sp) = edge.sides(notion, setting, limits)?;
    Ok(inverse_domination(&sb, &sp, edge.agent, pareto))
}

/// All edge properties, computed from one enumeration of each acceptable set.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub notion: Notion,
    pub edge: Edge,
    pub upper: Judgement,
    pub lower: Judgement,
    pub lower_pareto: Judgement,
    pub inversion: Search<Inversion>,
    pub inverse_domination: Search<InverseDomination>,
    pub inverse_domination_pareto: Search<InverseDomination>,
}

pub fn monotonicity_report(notion: Notion, setting: &Setting, edge: &Edge, limits: &Limits) -> Result<MonotonicityReport> {
    let (sb, sp) = edge.sides(notion, setting, limits)?;
    let i = edge.agent;
    Ok(MonotonicityReport {
        notion,
        edge: edge.clone(),
        upper: upper(&sb, &sp, i),
        lower: lower(&sb, &sp, i, false),
        lower_pareto: lower(&sb, &sp, i, true),
        inversion: inversion(&sb, &sp, i),
        inverse_domination: inverse_domination(&sb, &sp, i, false),
        inverse_domination_pareto: inverse_domination(&sb, &sp, i, true),
    })
}

/// Re-checks that a witness allocation is acceptable and worth the stated value.
fn confirm(notion: Notion, setting: &Setting, b: &Entitlements, i: usize, w: &Valued, limits: &Limits) -> Result<bool> {
    let s = setting.with_entitlements(b)?;
    if !s.accepts(notion, &w.allocation, limits)? {
        return Ok(false);
    }
    // Cell members carry bounds over the whole cell, so only single allocations must match exactly.
    match &w.allocation {
        AnyAllocation::Items(_) => Ok(cmp(&s.values(&w.allocation)?[i], &w.value) == Ordering::Equal),
        AnyAllocation::Fractions(_) => Ok(true),
    }
}

impl Inversion {
    /// Re-derives the claim pairwise from both acceptable sets.
    pub fn validate(&self, notion: Notion, setting: &Setting, edge: &Edge, limits: &Limits) -> Result<bool> {
        let i = edge.agent;
        if !confirm(notion, setting, &edge.b, i, &self.best_under_b, limits)?
            || !confirm(notion, setting, &edge.b_prime, i, &self.worst_under_b_prime, limits)?
        {
            return Ok(false);
        }
        let (sb, sp) = edge.sides(notion, setting, limits)?;
        if sb.is_empty() || sp.is_empty() {
            return Ok(false);
        }
        Ok(sp.members.iter().all(|p| sb.members.iter().all(|a| cmp(&p.low[i], &a.high[i]) == Ordering::Greater)))
    }
}

impl InverseDomination {
    /// Re-derives the claim from both acceptable sets and the definition's two disjuncts.
    pub fn validate(&self, notion: Notion, setting: &Setting, edge: &Edge, limits: &Limits) -> Result<bool> {
        let i = edge.agent;
        let t = &self.threshold;
        let (sb, sp) = edge.sides(notion, setting, limits)?;
        if sb.is_empty() || sp.is_empty() {
            return Ok(false);
        }
        let separated = sb.members.iter().all(|a| cmp(&a.high[i], t) != Ordering::Greater)
            && sp.members.iter().all(|p| cmp(&p.low[i], t) != Ordering::Less);
        let above = match &self.above {
            Some(w) => confirm(notion, setting, &edge.b_prime, i, w, limits)? && cmp(&w.value, t) == Ordering::Greater,
            None => false,
        };
        let below = match &self.below {
            Some(w) => {
                let on_front = !self.pareto_restricted
                    || sb.pareto_front.iter().any(|&k| sb.members[k].allocation == w.allocation);
                on_front && confirm(notion, setting, &edge.b, i, w, limits)? && cmp(&w.value, t) == Ordering::Less
            }
            None => false,
        };
        Ok(separated && (above || below))
    }
}

/// Outcome of the internal monotonicity check.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalReport {
    pub holds: bool,
    /// An acceptable allocation, and agents `(i, j)` with the same valuation and `b_i >= b_j`, where `i`
    /// gets less than `j` and the swapped allocation is not acceptable.
    pub witness: Option<(AnyAllocation, usize, usize)>,
}

/// Agents with equal valuations: the one with the larger entitlement is not worse off,
/// unless swapping their shares keeps the allocation acceptable.
pub fn check_internal(notion: Notion, setting: &Setting, limits: &Limits) -> Result<InternalReport> {
    let side = setting.acceptable(notion, limits)?;
    let b = setting.entitlements();
    let n = setting.n();
    for m in &side.members {
        for i in 0..n {
            for j in 0..n {
                if i == j || !setting.same_valuation(i, j) || b[i] < b[j] {
                    continue;
                }
                if cmp(&m.values[i], &m.values[j]) == Ordering::Less
                    && !setting.accepts(notion, &m.allocation.swapped(i, j), limits)?
                {
                    return Ok(InternalReport { holds: false, witness: Some((m.allocation.clone(), i, j)) });
                }
            }
        }
    }
    Ok(InternalReport { holds: true, witness: None })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::PRINCIPAL;
    use super::*;
    use crate::notions::ShareKind;
    use crate::rational::int;
    use proptest::prelude::*;

    const PROP: Notion = Notion::Share(ShareKind::Prop);
    const APS: Notion = Notion::Share(ShareKind::Aps);

    fn exact(v: &DivValue) -> crate::rational::Rational {
        v.exact().unwrap().clone()
    }

    #[test]
    fn prop_upper_but_incentive_paradox() {
        let s = prop_incentive();
        let edge = Edge::new(ents(&["0.3", "0.3", "0.4"]), ents(&["0.2", "0.4", "0.4"]), 0).unwrap();
        let l = Limits::default();
        assert_eq!(check_upper(PROP, &s, &edge, &l).unwrap().verdict, EdgeVerdict::Holds);
        assert_eq!(check_lower(PROP, &s, &edge, true, &l).unwrap().verdict, EdgeVerdict::Fails);
        assert!(find_inversion(PROP, &s, &edge, &l).unwrap().found().is_none());
        let Search::Found(w) = find_inverse_domination(PROP, &s, &edge, true, &l).unwrap() else { panic!("no witness") };
        assert_eq!(exact(&w.threshold), int(2));
        let below = w.below.clone().unwrap();
        assert_eq!(exact(&below.value), int(1));
        assert_eq!(below.allocation.to_string(), "({e2}, {e3}, {e1})");
        assert!(w.above.is_none());
        assert!(w.validate(PROP, &s, &edge, &l).unwrap());
    }

    #[test]
    fn aps_not_lower_monotone_with_budget() {
        let s = aps_incentive();
        let edge = Edge::new(ents(&["0.51", "0.33", "0.16"]), ents(&["1/2", "1/3", "1/6"]), 0).unwrap();
        let l = Limits::default();
        let r = monotonicity_report(APS, &s, &edge, &l).unwrap();
        assert_eq!(r.upper.verdict, EdgeVerdict::Holds);
        assert_eq!(r.lower.verdict, EdgeVerdict::Fails);
        assert!(r.inversion.found().is_none());
        let w = r.inverse_domination_pareto.found().unwrap();
        assert_eq!(exact(&w.threshold), int(13));
        assert_eq!(exact(&w.below.as_ref().unwrap().value), int(12));
        assert!(w.validate(APS, &s, &edge, &l).unwrap());
    }

    #[test]
    fn ce_inversion_for_agent_three() {
        let s = ce_inversion();
        let edge = Edge::new(ents(&["0.36", "0.34", "0.30"]), ents(&["0.36", "0.38", "0.26"]), 2).unwrap();
        let l = Limits::default();
        let Search::Found(w) = find_inversion(Notion::Ce, &s, &edge, &l).unwrap() else { panic!("no inversion") };
        assert_eq!(exact(&w.best_under_b.value), int(4));
        assert_eq!(exact(&w.worst_under_b_prime.value), int(6));
        assert!(w.validate(Notion::Ce, &s, &edge, &l).unwrap());
        let r = monotonicity_report(Notion::Ce, &s, &edge, &l).unwrap();
        assert_eq!(r.upper.verdict, EdgeVerdict::Fails);
        assert_eq!(r.lower.verdict, EdgeVerdict::Fails);
    }

    /// Best value under `b` and worst under `b_prime` from a re-validated inversion witness.
    fn inversion_values(notion: Notion, s: &Setting, b: &[&str], bp: &[&str], i: usize) -> (DivValue, DivValue) {
        let edge = Edge::new(ents(b), ents(bp), i).unwrap();
        let l = Limits::default();
        let Search::Found(w) = find_inversion(notion, s, &edge, &l).unwrap() else { panic!("no inversion for {notion}") };
        assert!(w.validate(notion, s, &edge, &l).unwrap());
        (w.best_under_b.value, w.worst_under_b_prime.value)
    }

    #[test]
    fn wmms_inversion_for_agent_three() {
        let (got, lost) = inversion_values(Notion::Share(ShareKind::Wmms), &wmms_inversion(), &["0.44", "0.45", "0.11"], &["0.46", "0.45", "0.09"], 2);
        assert_eq!((exact(&got), exact(&lost)), (int(9), int(10)));
    }

    #[test]
    fn wef_inversion_for_agents_one_and_three() {
        let s = wef_inversion();
        let (got, lost) = inversion_values(Notion::Wef, &s, &["0.12", "0.12", "0.76"], &["0.11", "0.12", "0.77"], 0);
        assert_eq!((exact(&got), exact(&lost)), (int(10), int(11)));
        let (got, lost) = inversion_values(Notion::Wef, &s, &["0.11", "0.12", "0.77"], &["0.12", "0.12", "0.76"], 2);
        assert_eq!((exact(&got), exact(&lost)), (int(77), int(80)));
    }

    #[test]
    fn mwnsw_inversion_for_agent_one() {
        let (got, lost) = inversion_values(Notion::Mwnsw, &mwnsw_inversion(), &["0.66", "0.33", "0.01"], &["1/3", "1/3", "1/3"], 0);
        assert_eq!((exact(&got), exact(&lost)), (int(1), int(2)));
    }

    #[test]
    fn divisible_wef_inversion_for_agent_one() {
        let s = Setting::Good(crate::divisible::fixtures::wef_instance(&["0.3", "0.2", "0.5"]));
        let (got, lost) = inversion_values(Notion::Wef, &s, &["0.4", "0.1", "0.5"], &["0.3", "0.2", "0.5"], 0);
        assert_eq!((exact(&got), exact(&lost)), (int(4), int(5)));
    }

    #[test]
    fn divisible_mwnsw_inversion_for_agent_one() {
        let s = Setting::Good(crate::divisible::fixtures::nsw_instance(&["1/3", "1/3", "1/3"], 100));
        let (got, lost) = inversion_values(Notion::Mwnsw, &s, &["0.66", "0.01", "0.33"], &["1/3", "1/3", "1/3"], 0);
        assert_eq!((exact(&got), exact(&lost)), (int(1), int(2)));
    }

    #[test]
    fn empty_side_is_inapplicable() {
        // Two agents, one item: EF is never satisfiable.
        let s = additive(&[&[1], &[1]], &["1/2", "1/2"]);
        let edge = Edge::new(ents(&["2/3", "1/3"]), ents(&["1/2", "1/2"]), 0).unwrap();
        let r = monotonicity_report(Notion::Ef, &s, &edge, &Limits::default()).unwrap();
        assert_eq!(r.upper.verdict, EdgeVerdict::Inapplicable);
        assert_eq!(r.inversion, Search::Inapplicable);
    }

    #[test]
    fn edges_must_improve() {
        assert!(Edge::new(ents(&["1/2", "1/2"]), ents(&["1/2", "1/2"]), 0).is_err());
        assert!(Edge::new(ents(&["0.5", "0.25", "0.25"]), ents(&["0.4", "0.35", "0.25"]), 0).is_ok());
    }

    #[test]
    fn identical_agents_are_internally_monotone() {
        let s = additive(&[&[3, 1, 2], &[3, 1, 2]], &["1/2", "1/2"]);
        for notion in PRINCIPAL {
            assert!(check_internal(notion, &s, &Limits::default()).unwrap().holds, "{notion}");
        }
    }

    fn arb_setting() -> impl Strategy<Value = (Setting, Edge)> {
        (2usize..4, 1usize..4).prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(proptest::collection::vec(0i64..5, m), n),
                proptest::collection::vec(1i64..6, n),
                0..n,
                1i64..3,
            )
                .prop_map(move |(rows, w, i, gain)| {
                    let rows: Vec<Vec<i64>> = rows.into_iter().map(|mut r| {
                        if r.iter().all(|&x| x == 0) {
                            r[0] = 1;
                        }
                        r
                    }).collect();
                    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
                    // b' = w / (total + gain); b adds `gain` to agent i.
                    let total: i64 = w.iter().sum::<i64>() + gain;
                    let frac = |x: i64| format!("{x}/{total}");
                    let mut bp: Vec<i64> = w.clone();
                    bp[(i + 1) % n] += gain;
                    let mut b = w.clone();
                    b[i] += gain;
                    let bs: Vec<String> = b.iter().map(|&x| frac(x)).collect();
                    let bps: Vec<String> = bp.iter().map(|&x| frac(x)).collect();
                    let base: Vec<&str> = bs.iter().map(String::as_str).collect();
                    let setting = additive(&refs, &base);
                    let edge = Edge::new(
                        ents(&base),
                        ents(&bps.iter().map(String::as_str).collect::<Vec<_>>()),
                        i,
                    )
                    .unwrap();
                    (setting, edge)
                })
        })
    }

    #[test]
    fn zero_product_tie_break_can_skip_the_larger_entitlement() {
        let s = additive(&[&[1, 2], &[1, 2], &[1, 2]], &["1/4", "1/4", "1/2"]);
        let r = check_internal(Notion::Mwnsw, &s, &Limits::default()).unwrap();
        assert!(!r.holds);
        let (a, i, j) = r.witness.unwrap();
        assert_eq!((a.to_string().as_str(), i, j), ("({e1}, {e2}, {})", 2, 0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn implication_lattice_holds((setting, edge) in arb_setting()) {
            let l = Limits::default();
            for notion in PRINCIPAL {
                let r = monotonicity_report(notion, &setting, &edge, &l).unwrap();
                if let Search::Found(w) = &r.inversion {
                    prop_assert!(r.inverse_domination.found().is_some(), "{notion}: inversion without inverse-domination");
                    prop_assert!(w.validate(notion, &setting, &edge, &l).unwrap());
                }
                if r.upper.verdict == EdgeVerdict::Holds || r.lower.verdict == EdgeVerdict::Holds {
                    prop_assert!(r.inversion.found().is_none(), "{notion}: monotone verdict with an inversion");
                }
                for w in [&r.inverse_domination, &r.inverse_domination_pareto].into_iter().filter_map(Search::found) {
                    prop_assert!(w.validate(notion, &setting, &edge, &l).unwrap(), "{notion}: witness fails validation");
                }
            }
        }

        #[test]
        fn proper_shares_never_invert((setting, edge) in arb_setting()) {
            for notion in [PROP, APS] {
                let r = monotonicity_report(notion, &setting, &edge, &Limits::default()).unwrap();
                prop_assert_ne!(r.upper.verdict, EdgeVerdict::Fails, "{}", notion);
            }
        }

        #[test]
        fn same_valuation_agents_are_internally_monotone(row in proptest::collection::vec(0i64..5, 1..4), w in proptest::collection::vec(1i64..5, 3)) {
            let mut row = row;
            if row.iter().all(|&x| x == 0) {
                row[0] = 1;
            }
            let t: i64 = w.iter().sum();
            let b: Vec<String> = w.iter().map(|x| format!("{x}/{t}")).collect();
            let setting = additive(&[&row, &row, &row], &b.iter().map(String::as_str).collect::<Vec<_>>());
            // With fewer positive items than agents, MWNSW may pick any maximum-size support set.
            let full_support = row.iter().filter(|&&x| x > 0).count() >= 3;
            for notion in PRINCIPAL.into_iter().filter(|&x| full_support || x != Notion::Mwnsw) {
                prop_assert!(check_internal(notion, &setting, &Limits::default()).unwrap().holds, "{}", notion);
            }
        }
    }
}
