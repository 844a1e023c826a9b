//! Acceptability of allocations of indivisible items under each fairness notion.

pub mod pareto;
pub mod wnsw;

use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use num::{One, Signed, Zero};

use crate::enumerate::{check_assignment_bound, for_each_assignment};
use crate::error::{Error, Result};
use crate::exactlp::{solve, Bound, LinearProgram, LpOutcome, Relation, Sense};
use crate::model::{Allocation, Bundle, IndivisibleInstance, Limits};
use crate::rational::Rational;
use crate::shares::{self, minimal_sets};

pub use pareto::{
    is_pareto_optimal, pareto_dominates, pareto_evidence, pareto_front, profile_dominates, ParetoEvidence,
};
pub use wnsw::{mwnsw_set, wnsw_compare, wnsw_key, WnswKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShareKind {
    Prop,
    Aps,
    Pess,
    Wmms,
    MmsMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Notion {
    Share(ShareKind),
    Ef,
    Wef,
    Cef,
    Nde,
    Ce,
    Pce,
    Mwnsw,
}

impl Notion {
    pub const ALL: [Notion; 12] = [
        Notion::Share(ShareKind::Prop),
        Notion::Share(ShareKind::Aps),
        Notion::Share(ShareKind::Pess),
        Notion::Share(ShareKind::Wmms),
        Notion::Share(ShareKind::MmsMinus),
        Notion::Ef,
        Notion::Wef,
        Notion::Cef,
        Notion::Nde,
        Notion::Ce,
        Notion::Pce,
        Notion::Mwnsw,
    ];

    /// Whether the notion is only defined for allocations that hand out every item.
    pub fn needs_complete(self) -> bool {
        matches!(self, Notion::Ef | Notion::Wef | Notion::Cef | Notion::Nde | Notion::Mwnsw)
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Notion::Share(ShareKind::Prop) => "Prop",
            Notion::Share(ShareKind::Aps) => "APS",
            Notion::Share(ShareKind::Pess) => "Pess",
            Notion::Share(ShareKind::Wmms) => "WMMS",
            Notion::Share(ShareKind::MmsMinus) => "MMS-",
            Notion::Ef => "EF",
            Notion::Wef => "WEF",
            Notion::Cef => "CEF",
            Notion::Nde => "NDE",
            Notion::Ce => "CE",
            Notion::Pce => "PCE",
            Notion::Mwnsw => "MWNSW",
        };
        f.write_str(s)
    }
}

impl FromStr for Notion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "prop" => Notion::Share(ShareKind::Prop),
            "aps" => Notion::Share(ShareKind::Aps),
            "pess" => Notion::Share(ShareKind::Pess),
            "wmms" => Notion::Share(ShareKind::Wmms),
            "mms-" | "mmsminus" | "mms_minus" => Notion::Share(ShareKind::MmsMinus),
            "ef" => Notion::Ef,
            "wef" => Notion::Wef,
            "cef" => Notion::Cef,
            "nde" => Notion::Nde,
            "ce" => Notion::Ce,
            "pce" => Notion::Pce,
            "mwnsw" => Notion::Mwnsw,
            other => return Err(Error::Argument(format!("unknown notion '{other}'"))),
        })
    }
}

/// Item prices with the slack by which strictly better bundles exceed each budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CeCertificate {
    pub prices: Vec<Rational>,
    pub slack: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub acceptable: bool,
    pub certificate: Option<CeCertificate>,
}

impl Verdict {
    fn plain(acceptable: bool) -> Self {
        Verdict { acceptable, certificate: None }
    }
}

/// Evaluates notions on one instance, caching subset tables, shares and the best WNSW.
pub struct Checker<'a> {
    pub instance: &'a IndivisibleInstance,
    pub limits: Limits,
    tables: Vec<Vec<Rational>>,
    shares: RefCell<HashMap<ShareKind, Rc<Vec<Rational>>>>,
    aps_matrix: OnceCell<Vec<Vec<Rational>>>,
    best_wnsw: OnceCell<HashMap<u64, WnswKey>>,
    minimal: RefCell<HashMap<(usize, Rational, bool), Rc<Vec<Bundle>>>>,
}

impl<'a> Checker<'a> {
    pub fn new(instance: &'a IndivisibleInstance, limits: Limits) -> Result<Self> {
        let tables = instance.valuations.iter().map(|v| v.subset_values(&limits)).collect::<Result<_>>()?;
        Ok(Checker {
            instance,
            limits,
            tables,
            shares: RefCell::new(HashMap::new()),
            aps_matrix: OnceCell::new(),
            best_wnsw: OnceCell::new(),
            minimal: RefCell::new(HashMap::new()),
        })
    }

    /// `v_i(S)` from the cached table.
    pub fn value(&self, i: usize, s: Bundle) -> &Rational {
        &self.tables[i][s.0 as usize]
    }

    pub fn table(&self, i: usize) -> &[Rational] {
        &self.tables[i]
    }

    pub fn profile(&self, a: &Allocation) -> Vec<Rational> {
        (0..self.instance.n()).map(|i| self.value(i, a.bundles[i]).clone()).collect()
    }

    /// Share values of every agent under `kind`.
    pub fn shares(&self, kind: ShareKind) -> Result<Rc<Vec<Rational>>> {
        if let Some(v) = self.shares.borrow().get(&kind) {
            return Ok(v.clone());
        }
        let inst = self.instance;
        let b = inst.entitlements.as_slice();
        let values = (0..inst.n())
            .map(|i| {
                let v = &inst.valuations[i];
                match kind {
                    ShareKind::Prop => shares::prop_share(v, &b[i]),
                    ShareKind::Aps => shares::aps(v, &b[i], &self.limits).map(|r| r.value),
                    ShareKind::Pess => shares::pessimistic_share_default(v, &b[i], &self.limits).map(|r| r.value),
                    ShareKind::Wmms => shares::wmms(inst, i, &self.limits).map(|r| r.value),
                    ShareKind::MmsMinus => shares::mms_minus(v, &b[i], &self.limits).map(|r| r.value),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let values = Rc::new(values);
        self.shares.borrow_mut().insert(kind, values.clone());
        Ok(values)
    }

    /// `APS(v_i, b_j)` for every pair of agents.
    pub fn aps_matrix(&self) -> Result<&Vec<Vec<Rational>>> {
        if self.aps_matrix.get().is_none() {
            let inst = self.instance;
            let b = inst.entitlements.as_slice();
            let mut rows = Vec::with_capacity(inst.n());
            for v in &inst.valuations {
                rows.push(b.iter().map(|bj| shares::aps(v, bj, &self.limits).map(|r| r.value)).collect::<Result<_>>()?);
            }
            let _ = self.aps_matrix.set(rows);
        }
        Ok(self.aps_matrix.get().expect("set above"))
    }

    /// For every support set of maximum size, the largest WNSW key among complete
    /// allocations giving positive value to exactly that set.
    pub fn best_wnsw(&self) -> Result<&HashMap<u64, WnswKey>> {
        if self.best_wnsw.get().is_none() {
            let inst = self.instance;
            check_assignment_bound(inst.m, inst.n(), &self.limits, "MWNSW search")?;
            let mut best: HashMap<u64, WnswKey> = HashMap::new();
            let mut top = 0;
            for_each_assignment(inst.m, inst.n(), |_, bundles| {
                let values: Vec<&Rational> = (0..inst.n()).map(|i| self.value(i, bundles[i])).collect();
                let key = wnsw::key_from_values(&values, &inst.entitlements);
                if key.support < top {
                    return;
                }
                if key.support > top {
                    top = key.support;
                    best.clear();
                }
                let slot = best.entry(wnsw::support_mask(&values)).or_insert_with(|| key.clone());
                if key > *slot {
                    *slot = key;
                }
            });
            let _ = self.best_wnsw.set(best);
        }
        Ok(self.best_wnsw.get().expect("set above"))
    }

    /// Minimal bundles worth more than `t` (`strict`) or at least `t`.
    fn minimal_sets_of(&self, i: usize, t: &Rational, strict: bool) -> Rc<Vec<Bundle>> {
        let key = (i, t.clone(), strict);
        if let Some(v) = self.minimal.borrow().get(&key) {
            return v.clone();
        }
        let sets = Rc::new(if strict {
            minimal_sets(&self.tables[i], |x| x > t)
        } else {
            minimal_sets(&self.tables[i], |x| x >= t)
        });
        self.minimal.borrow_mut().insert(key, sets.clone());
        sets
    }

    pub fn check(&self, notion: Notion, a: &Allocation) -> Result<Verdict> {
        let inst = self.instance;
        inst.validate_allocation(a)?;
        if notion.needs_complete() && !a.is_complete(inst.m) {
            return Err(Error::Argument(format!("{notion} is defined only for complete allocations")));
        }
        let n = inst.n();
        let b = inst.entitlements.as_slice();
        let v = |i: usize, j: usize| self.value(i, a.bundles[j]);
        let all_pairs = |pred: &dyn Fn(usize, usize) -> bool| (0..n).all(|i| (0..n).all(|j| i == j || pred(i, j)));
        Ok(match notion {
            Notion::Share(kind) => {
                let s = self.shares(kind)?;
                Verdict::plain((0..n).all(|i| *v(i, i) >= s[i]))
            }
            Notion::Ef => Verdict::plain(all_pairs(&|i, j| v(i, i) >= v(i, j))),
            Notion::Wef => Verdict::plain(all_pairs(&|i, j| v(i, i) * &b[j] >= v(i, j) * &b[i])),
            Notion::Nde => Verdict::plain(all_pairs(&|i, j| b[i] <= b[j] || v(i, i) >= v(i, j))),
            Notion::Cef => {
                let aps = self.aps_matrix()?;
                Verdict::plain(all_pairs(&|i, j| calibrated_ok(v(i, i), &aps[i][i], v(i, j), &aps[i][j])))
            }
            Notion::Ce => self.equilibrium(a, false)?,
            Notion::Pce => self.equilibrium(a, true)?,
            Notion::Mwnsw => {
                let values: Vec<&Rational> = (0..n).map(|i| v(i, i)).collect();
                let key = wnsw::key_from_values(&values, &inst.entitlements);
                Verdict::plain(self.best_wnsw()?.get(&wnsw::support_mask(&values)) == Some(&key))
            }
        })
    }

    /// Searches for supporting prices with a price LP maximizing the strictness slack.
    ///
    /// Prices are nonnegative and only minimal bundles need constraints. For PCE the
    /// condition "cheapest among affordable bundles of highest value" becomes
    /// `p(T) >= p(A_i)` for every `T` with `v_i(T) = v_i(A_i)`: an unaffordable `T`
    /// has `p(T) > b_i >= p(A_i)` anyway, so the affordability clause can be dropped.
    /// For the equal-value family it suffices to take minimal bundles of value at least
    /// `v_i(A_i)`: those worth strictly more are already priced above `b_i`.
    ///
    /// Bundle rows enter lazily: the LP starts from the budget rows and gains the rows its
    /// optimum violates until none is violated (accept) or the slack drops to zero (reject).
    /// Each round solves a relaxation, so both outcomes agree with the full LP.
    fn equilibrium(&self, a: &Allocation, cheapest: bool) -> Result<Verdict> {
        let inst = self.instance;
        let m = inst.m;
        let b = inst.entitlements.as_slice();
        let eps = m;
        let mut lp = LinearProgram::new(m + 1, Sense::Maximize);
        lp.bounds[eps] = Bound { lower: None, upper: Some(Rational::one()) };
        lp.objective[eps] = Rational::one();
        // `price(t) - slack * with_slack - price(own) * minus_own >= rhs`
        struct Row {
            t: Bundle,
            minus_own: Bundle,
            with_slack: bool,
            rhs: Rational,
        }
        let mut pending: Vec<Row> = Vec::new();
        for i in 0..inst.n() {
            let own = a.bundles[i];
            let own_value = self.value(i, own);
            if !own.is_empty() {
                let row: Vec<(usize, Rational)> = own.items().map(|e| (e, Rational::one())).collect();
                lp.add_sparse(&row, Relation::Le, b[i].clone());
            }
            for &t in self.minimal_sets_of(i, own_value, true).iter() {
                pending.push(Row { t, minus_own: Bundle(0), with_slack: true, rhs: b[i].clone() });
            }
            if cheapest {
                for &t in self.minimal_sets_of(i, own_value, false).iter() {
                    if t != own && self.value(i, t) == own_value {
                        pending.push(Row { t, minus_own: own, with_slack: false, rhs: Rational::zero() });
                    }
                }
            }
        }
        loop {
            let point = match solve(&lp)? {
                LpOutcome::Optimal { value, point } if value.is_positive() => point,
                LpOutcome::Optimal { .. } | LpOutcome::Infeasible => return Ok(Verdict::plain(false)),
                LpOutcome::Unbounded => {
                    return Err(Error::Numeric("equilibrium LP with bounded slack reported unbounded".into()))
                }
            };
            let price = |s: Bundle| -> Rational { s.items().map(|e| &point[e]).sum() };
            let (violated, rest): (Vec<Row>, Vec<Row>) = pending.into_iter().partition(|r| {
                let mut lhs = price(r.t) - price(r.minus_own);
                if r.with_slack {
                    lhs -= &point[eps];
                }
                lhs < r.rhs
            });
            pending = rest;
            if violated.is_empty() {
                let slack = point[eps].clone();
                let mut prices = point;
                prices.truncate(m);
                return Ok(Verdict { acceptable: true, certificate: Some(CeCertificate { prices, slack }) });
            }
            for r in violated {
                let mut row: Vec<(usize, Rational)> = r.t.items().map(|e| (e, Rational::one())).collect();
                row.extend(r.minus_own.items().map(|e| (e, -Rational::one())));
                if r.with_slack {
                    row.push((eps, -Rational::one()));
                }
                lp.add_sparse(&row, Relation::Ge, r.rhs);
            }
        }
    }
}

/// `x / s >= y / t` with zero shares totalized: `s = 0` makes the left side
/// infinite; otherwise `t = 0` is satisfied only when `y = 0`.
fn calibrated_ok(x: &Rational, s: &Rational, y: &Rational, t: &Rational) -> bool {
    if s.is_zero() {
        true
    } else if t.is_zero() {
        y.is_zero()
    } else {
        x * t >= y * s
    }
}

/// Checks price support by scanning every bundle, independently of the LP.
pub fn verify_ce_prices(
    instance: &IndivisibleInstance,
    a: &Allocation,
    prices: &[Rational],
    cheapest: bool,
) -> bool {
    let b = instance.entitlements.as_slice();
    let price = |s: Bundle| -> Rational { s.items().map(|e| &prices[e]).sum() };
    if prices.len() != instance.m || prices.iter().any(|p| p.is_negative()) {
        return false;
    }
    (0..instance.n()).all(|i| {
        let own = a.bundles[i];
        let (own_price, own_value) = (price(own), instance.valuations[i].value(own));
        own_price <= b[i]
            && (0u64..1 << instance.m).map(Bundle).all(|t| {
                let (tp, tv) = (price(t), instance.valuations[i].value(t));
                tp > b[i] || tv < own_value || (tv == own_value && (!cheapest || tp >= own_price))
            })
    })
}

/// Every complete allocation accepted by a notion, in lexicographic owner order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptableSet {
    pub notion: Notion,
    pub allocations: Vec<Allocation>,
    /// Indices of the members not dominated by another member.
    pub pareto_front: Vec<usize>,
}

impl AcceptableSet {
    pub fn is_empty(&self) -> bool {
        self.allocations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.allocations.len()
    }
}

pub fn enumerate_acceptable(notion: Notion, instance: &IndivisibleInstance, limits: &Limits) -> Result<AcceptableSet> {
    let checker = Checker::new(instance, *limits)?;
    enumerate_with(&checker, notion)
}

pub fn enumerate_with(checker: &Checker<'_>, notion: Notion) -> Result<AcceptableSet> {
    let inst = checker.instance;
    check_assignment_bound(inst.m, inst.n(), &checker.limits, "acceptable-set enumeration")?;
    let mut allocations = Vec::new();
    let mut failure = None;
    for_each_assignment(inst.m, inst.n(), |_, bundles| {
        if failure.is_some() {
            return;
        }
        let a = Allocation { bundles: bundles.to_vec() };
        match checker.check(notion, &a) {
            Ok(v) if v.acceptable => allocations.push(a),
            Ok(_) => {}
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let profiles: Vec<Vec<Rational>> = allocations.iter().map(|a| checker.profile(a)).collect();
    let pareto_front = pareto::front_of_profiles(&profiles);
    Ok(AcceptableSet { notion, allocations, pareto_front })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Entitlements, IndivisibleValuation};
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    pub(crate) fn additive_instance(rows: &[&[i64]], b: &[(i64, i64)]) -> IndivisibleInstance {
        let vals = rows
            .iter()
            .map(|r| IndivisibleValuation::additive(r.iter().map(|&x| int(x)).collect()).unwrap())
            .collect();
        let b = Entitlements::new(b.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap();
        IndivisibleInstance::new(rows[0].len(), vals, b).unwrap()
    }

    fn alloc(owners: &[usize], n: usize) -> Allocation {
        Allocation::from_owners(owners, n)
    }

    #[test]
    fn notion_names_round_trip() {
        for n in Notion::ALL {
            assert_eq!(n.to_string().parse::<Notion>().unwrap(), n);
        }
        assert!("fair".parse::<Notion>().is_err());
    }

    #[test]
    fn ce_on_three_item_instance() {
        let inst = additive_instance(&[&[6, 5, 4], &[6, 4, 5], &[5, 4, 6]], &[(36, 100), (38, 100), (26, 100)]);
        let ch = Checker::new(&inst, Limits::default()).unwrap();
        let a = alloc(&[1, 0, 2], 3);
        let verdict = ch.check(Notion::Ce, &a).unwrap();
        assert!(verdict.acceptable);
        let cert = verdict.certificate.unwrap();
        assert!(verify_ce_prices(&inst, &a, &cert.prices, false));
        assert!(!ch.check(Notion::Ce, &alloc(&[0, 1, 2], 3)).unwrap().acceptable);
        let set = enumerate_with(&ch, Notion::Ce).unwrap();
        assert_eq!(set.allocations, vec![a]);
    }

    #[test]
    fn ce_without_pareto_optimality() {
        let inst = additive_instance(&[&[1, 1, 1], &[2, 1, 1], &[2, 1, 1]], &[(4, 10), (3, 10), (3, 10)]);
        let ch = Checker::new(&inst, Limits::default()).unwrap();
        let a = alloc(&[0, 1, 2], 3);
        assert!(ch.check(Notion::Ce, &a).unwrap().acceptable);
        let listed = [rat(4, 10), rat(3, 10), rat(3, 10)];
        assert!(verify_ce_prices(&inst, &a, &listed, false));
        assert!(!verify_ce_prices(&inst, &a, &listed, true));
        assert!(!ch.check(Notion::Pce, &a).unwrap().acceptable);
        let ce = enumerate_with(&ch, Notion::Ce).unwrap();
        assert_eq!(ce.allocations, vec![alloc(&[0, 1, 2], 3), alloc(&[0, 2, 1], 3)]);
        let pce = enumerate_with(&ch, Notion::Pce).unwrap();
        assert!(pce.allocations.iter().all(|x| !ce.allocations.contains(x)));
    }

    #[test]
    fn single_item_priced_at_half() {
        let inst = additive_instance(&[&[1], &[1]], &[(6, 10), (4, 10)]);
        let ch = Checker::new(&inst, Limits::default()).unwrap();
        let a = alloc(&[0], 2);
        assert!(ch.check(Notion::Ce, &a).unwrap().acceptable);
        assert!(verify_ce_prices(&inst, &a, &[rat(1, 2)], false));
        assert!(!ch.check(Notion::Ce, &alloc(&[1], 2)).unwrap().acceptable);
        // Two identical items: agent 1 cannot be made to pay all of her budget for one.
        let inst = additive_instance(&[&[1, 1], &[1, 1]], &[(6, 10), (4, 10)]);
        let ch = Checker::new(&inst, Limits::default()).unwrap();
        let pce = enumerate_with(&ch, Notion::Pce).unwrap();
        let ce = enumerate_with(&ch, Notion::Ce).unwrap();
        assert_eq!(ce.allocations, vec![alloc(&[0, 1], 2), alloc(&[1, 0], 2)]);
        assert_eq!(pce.allocations, ce.allocations);
        // Equal prices are forced, so agent 1 pays at most 0.4 for her item.
        let cert = ch.check(Notion::Pce, &alloc(&[0, 1], 2)).unwrap().certificate.unwrap();
        assert_eq!(cert.prices[0], cert.prices[1]);
        assert!(cert.prices[0] <= rat(4, 10));
    }

    #[test]
    fn share_notions_accept_partial_allocations() {
        let inst = additive_instance(&[&[2, 1, 0], &[0, 2, 1], &[3, 0, 2]], &[(2, 10), (4, 10), (4, 10)]);
        let ch = Checker::new(&inst, Limits::default()).unwrap();
        let partial = Allocation::new(vec![Bundle(1), Bundle(2), Bundle::EMPTY], 3).unwrap();
        assert!(!ch.check(Notion::Share(ShareKind::Prop), &partial).unwrap().acceptable);
        assert!(ch.check(Notion::Ef, &partial).is_err());
        let set = enumerate_with(&ch, Notion::Share(ShareKind::Prop)).unwrap();
        assert_eq!(set.allocations, vec![alloc(&[0, 1, 2], 3)]);
    }

    #[test]
    fn calibrated_totalization() {
        assert!(calibrated_ok(&int(0), &int(0), &int(5), &int(0)));
        assert!(calibrated_ok(&int(1), &int(2), &int(0), &int(0)));
        assert!(!calibrated_ok(&int(1), &int(2), &int(1), &int(0)));
        assert!(calibrated_ok(&int(2), &int(4), &int(1), &int(2)));
        assert!(!calibrated_ok(&int(1), &int(4), &int(1), &int(2)));
    }

    #[test]
    fn nde_only_looks_down() {
        let inst = additive_instance(&[&[1, 3], &[1, 3]], &[(6, 10), (4, 10)]);
        let ch = Checker::new(&inst, Limits::default()).unwrap();
        assert!(ch.check(Notion::Nde, &alloc(&[0, 1], 2)).unwrap().acceptable == false);
        assert!(ch.check(Notion::Nde, &alloc(&[1, 0], 2)).unwrap().acceptable);
    }

    pub(crate) fn arb_instance() -> impl Strategy<Value = IndivisibleInstance> {
        (2usize..4, 1usize..5).prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(proptest::collection::vec(0i64..7, m), n),
                proptest::collection::vec(1i64..6, n),
            )
                .prop_filter_map("valid", move |(rows, w)| {
                    let total: i64 = w.iter().sum();
                    let b = Entitlements::new(w.iter().map(|&x| rat(x, total)).collect()).ok()?;
                    let vals = rows
                        .into_iter()
                        .map(|r| IndivisibleValuation::additive(r.into_iter().map(int).collect()).ok())
                        .collect::<Option<Vec<_>>>()?;
                    IndivisibleInstance::new(m, vals, b).ok()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn equilibrium_implies_aps_and_certificates_verify(inst in arb_instance()) {
            let ch = Checker::new(&inst, Limits::default()).unwrap();
            let aps = ch.shares(ShareKind::Aps).unwrap();
            let ce = enumerate_with(&ch, Notion::Ce).unwrap();
            let pce = enumerate_with(&ch, Notion::Pce).unwrap();
            for a in &ce.allocations {
                for i in 0..inst.n() {
                    prop_assert!(*ch.value(i, a.bundles[i]) >= aps[i]);
                }
                let cert = ch.check(Notion::Ce, a).unwrap().certificate.unwrap();
                prop_assert!(verify_ce_prices(&inst, a, &cert.prices, false));
                if inst.entitlements.all_equal() {
                    prop_assert!(ch.check(Notion::Ef, a).unwrap().acceptable);
                }
            }
            for a in &pce.allocations {
                prop_assert!(ce.allocations.contains(a));
                let cert = ch.check(Notion::Pce, a).unwrap().certificate.unwrap();
                prop_assert!(verify_ce_prices(&inst, a, &cert.prices, true));
                prop_assert!(is_pareto_optimal(&inst, a, &Limits::default()).unwrap());
            }
        }

        #[test]
        fn wef_with_equal_entitlements_is_ef(inst in arb_instance()) {
            let n = inst.n();
            let eq = inst.with_entitlements(Entitlements::equal(n).unwrap()).unwrap();
            let limits = Limits::default();
            prop_assert_eq!(enumerate_acceptable(Notion::Wef, &eq, &limits).unwrap().allocations,
                enumerate_acceptable(Notion::Ef, &eq, &limits).unwrap().allocations);
        }

        #[test]
        fn scaling_one_valuation_keeps_acceptable_sets(inst in arb_instance(), who in 0usize..3, c in 1i64..6, d in 1i64..6) {
            let who = who % inst.n();
            let mut scaled = inst.clone();
            scaled.valuations[who] = inst.valuations[who].scaled(&rat(c, d)).unwrap();
            let limits = Limits::default();
            for notion in Notion::ALL {
                prop_assert_eq!(enumerate_acceptable(notion, &inst, &limits).unwrap().allocations,
                    enumerate_acceptable(notion, &scaled, &limits).unwrap().allocations, "{}", notion);
            }
        }
    }
}
