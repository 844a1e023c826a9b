//! Entitlements, valuations over indivisible items, bundles and allocations.

use crate::error::{Error, Result};
use crate::rational::{int, Rational};
use num::{One, Signed, Zero};
use std::fmt;

/// Bounds for exhaustive searches. The defaults suit desk-scale instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of complete allocations (or partitions) an enumeration may visit.
    pub enumeration: u128,
    /// Maximum item count for which all `2^m` subset values are tabulated.
    pub table_items: usize,
    /// Maximum size of the product of acceptable sets in a selection-rule search.
    pub selection: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { enumeration: 10_000_000, table_items: 20, selection: 1_000_000 }
    }
}

/// Entitlements `b`: every entry strictly between 0 and 1, summing to exactly 1, at least two agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entitlements(Vec<Rational>);

impl Entitlements {
    pub fn new(b: Vec<Rational>) -> Result<Self> {
        if b.len() < 2 {
            return Err(Error::Argument(format!("need at least two agents, got {}", b.len())));
        }
        for (i, x) in b.iter().enumerate() {
            if !x.is_positive() || *x >= Rational::one() {
                return Err(Error::Argument(format!("entitlement of agent {} is {x}, not in (0,1)", i + 1)));
            }
        }
        let total: Rational = b.iter().sum();
        if !total.is_one() {
            return Err(Error::Argument(format!(
                "entitlements sum to {total}; deficit {}",
                Rational::one() - &total
            )));
        }
        Ok(Entitlements(b))
    }

    /// `n` equal entitlements `1/n`.
    pub fn equal(n: usize) -> Result<Self> {
        Entitlements::new(vec![Rational::new(1.into(), (n as i64).into()); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn all_equal(&self) -> bool {
        self.0.iter().all(|x| *x == self.0[0])
    }
}

impl std::ops::Index<usize> for Entitlements {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

/// `b` i-improves `b_prime`: agent `i` strictly gains and nobody else gains.
pub fn i_improves(b: &Entitlements, b_prime: &Entitlements, i: usize) -> Result<bool> {
    if b.len() != b_prime.len() {
        return Err(Error::Structural(format!(
            "entitlement vectors have lengths {} and {}",
            b.len(),
            b_prime.len()
        )));
    }
    if i >= b.len() {
        return Err(Error::Structural(format!("agent index {i} out of range for {} agents", b.len())));
    }
    Ok(b[i] > b_prime[i] && (0..b.len()).all(|j| j == i || b[j] <= b_prime[j]))
}

/// A set of items, stored as a bitmask over item indices `0..64`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bundle(pub u64);

pub const MAX_ITEMS: usize = 64;

impl Bundle {
    pub const EMPTY: Bundle = Bundle(0);

    pub fn from_items(items: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &e in items {
            if e >= MAX_ITEMS {
                return Err(Error::Structural(format!("item index {e} exceeds {MAX_ITEMS}")));
            }
            mask |= 1 << e;
        }
        Ok(Bundle(mask))
    }

    /// All items `0..m`.
    pub fn full(m: usize) -> Self {
        if m >= 64 {
            Bundle(u64::MAX)
        } else {
            Bundle((1u64 << m) - 1)
        }
    }

    pub fn contains(self, e: usize) -> bool {
        e < 64 && self.0 >> e & 1 == 1
    }

    pub fn with(self, e: usize) -> Self {
        Bundle(self.0 | 1 << e)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Bundle) -> Self {
        Bundle(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: Bundle) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: Bundle) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn items(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let e = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(e)
            }
        })
    }

    pub fn within(self, m: usize) -> bool {
        self.is_subset(Bundle::full(m))
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Items are printed one-based, as `{e1,e3}`.
impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.items().map(|e| format!("e{}", e + 1)).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

/// Monotone, normalized valuation over `m` indivisible items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndivisibleValuation {
    Additive(Vec<Rational>),
    /// `v(S) = min(budget, sum of values in S)`.
    BudgetAdditive { values: Vec<Rational>, budget: Rational },
    /// Explicit value of every subset, indexed by bitmask.
    Table { m: usize, values: Vec<Rational> },
}

impl IndivisibleValuation {
    pub fn additive(values: Vec<Rational>) -> Result<Self> {
        if values.len() > MAX_ITEMS {
            return Err(Error::Argument(format!("at most {MAX_ITEMS} items are supported")));
        }
        if let Some(e) = values.iter().position(|x| x.is_negative()) {
            return Err(Error::Argument(format!("item e{} has negative value", e + 1)));
        }
        if values.iter().all(|x| x.is_zero()) {
            return Err(Error::Argument("valuation gives the full item set value 0".into()));
        }
        Ok(IndivisibleValuation::Additive(values))
    }

    pub fn budget_additive(values: Vec<Rational>, budget: Rational) -> Result<Self> {
        IndivisibleValuation::additive(values.clone())?;
        if !budget.is_positive() {
            return Err(Error::Argument(format!("budget {budget} is not positive")));
        }
        Ok(IndivisibleValuation::BudgetAdditive { values, budget })
    }

    /// Validates normalization, monotonicity and positivity of an explicit table.
    pub fn table(m: usize, values: Vec<Rational>, limits: &Limits) -> Result<Self> {
        if m > limits.table_items {
            return Err(Error::resource("table valuation", format!("2^{m}"), 1u128 << limits.table_items));
        }
        if values.len() != 1usize << m {
            return Err(Error::Structural(format!(
                "table over {m} items needs {} entries, got {}",
                1usize << m,
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::Argument("table value of the empty set must be 0".into()));
        }
        for mask in 1..values.len() {
            let mut rest = mask;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                if values[mask ^ bit] > values[mask] {
                    return Err(Error::Argument(format!(
                        "table is not monotone: {} has value {} but its subset {} has {}",
                        Bundle(mask as u64),
                        values[mask],
                        Bundle((mask ^ bit) as u64),
                        values[mask ^ bit]
                    )));
                }
                rest ^= bit;
            }
        }
        if !values[values.len() - 1].is_positive() {
            return Err(Error::Argument("valuation gives the full item set value 0".into()));
        }
        Ok(IndivisibleValuation::Table { m, values })
    }

    /// Items come in `groups` groups; a set is worth the number of groups it meets.
    ///
    /// With `n` groups of `n` items each, the maximin share for `n` agents is `n`,
    /// while giving every agent one whole group is envy-free at value 1.
    pub fn group_coverage(groups: &[Vec<usize>], m: usize, limits: &Limits) -> Result<Self> {
        let masks: Vec<u64> = groups
            .iter()
            .map(|g| Bundle::from_items(g).map(|b| b.0))
            .collect::<Result<_>>()?;
        if m > limits.table_items {
            return Err(Error::resource("table valuation", format!("2^{m}"), 1u128 << limits.table_items));
        }
        let values = (0..1u64 << m)
            .map(|s| int(masks.iter().filter(|&&g| g & s != 0).count() as i64))
            .collect();
        IndivisibleValuation::table(m, values, limits)
    }

    pub fn item_count(&self) -> usize {
        match self {
            IndivisibleValuation::Additive(v) => v.len(),
            IndivisibleValuation::BudgetAdditive { values, .. } => values.len(),
            IndivisibleValuation::Table { m, .. } => *m,
        }
    }

    pub fn value(&self, s: Bundle) -> Rational {
        match self {
            IndivisibleValuation::Additive(v) => s.items().filter(|&e| e < v.len()).map(|e| &v[e]).sum(),
            IndivisibleValuation::BudgetAdditive { values, budget } => {
                let total: Rational = s.items().filter(|&e| e < values.len()).map(|e| &values[e]).sum();
                if total > *budget {
                    budget.clone()
                } else {
                    total
                }
            }
            IndivisibleValuation::Table { m, values } => values[(s.0 & Bundle::full(*m).0) as usize].clone(),
        }
    }

    /// Value of a bundle, rejecting items outside the valuation's range.
    pub fn checked_value(&self, s: Bundle) -> Result<Rational> {
        if !s.within(self.item_count()) {
            return Err(Error::Structural(format!(
                "bundle {s} has items outside 1..{}",
                self.item_count()
            )));
        }
        Ok(self.value(s))
    }

    pub fn grand_value(&self) -> Rational {
        self.value(Bundle::full(self.item_count()))
    }

    /// Every subset value multiplied by `c`.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::Argument(format!("scale factor {c} is not positive")));
        }
        Ok(match self {
            IndivisibleValuation::Additive(v) => IndivisibleValuation::Additive(v.iter().map(|x| x * c).collect()),
            IndivisibleValuation::BudgetAdditive { values, budget } => IndivisibleValuation::BudgetAdditive {
                values: values.iter().map(|x| x * c).collect(),
                budget: budget * c,
            },
            IndivisibleValuation::Table { m, values } => {
                IndivisibleValuation::Table { m: *m, values: values.iter().map(|x| x * c).collect() }
            }
        })
    }

    /// All `2^m` subset values, indexed by bitmask.
    pub fn subset_values(&self, limits: &Limits) -> Result<Vec<Rational>> {
        let m = self.item_count();
        if let IndivisibleValuation::Table { values, .. } = self {
            return Ok(values.clone());
        }
        if m > limits.table_items {
            return Err(Error::resource("subset table", format!("2^{m}"), 1u128 << limits.table_items));
        }
        match self {
            IndivisibleValuation::Additive(v) => Ok(additive_table(v)),
            IndivisibleValuation::BudgetAdditive { values, budget } => Ok(additive_table(values)
                .into_iter()
                .map(|x| if x > *budget { budget.clone() } else { x })
                .collect()),
            IndivisibleValuation::Table { .. } => unreachable!(),
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, IndivisibleValuation::Additive(_))
    }
}

fn additive_table(v: &[Rational]) -> Vec<Rational> {
    let m = v.len();
    let mut out = vec![Rational::zero(); 1 << m];
    for mask in 1usize..1 << m {
        let low = mask.trailing_zeros() as usize;
        out[mask] = &out[mask & (mask - 1)] + &v[low];
    }
    out
}

/// An assignment of disjoint bundles to agents. Completeness is checked against the item count.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Allocation {
    pub bundles: Vec<Bundle>,
}

impl Allocation {
    /// Rejects overlapping bundles and out-of-range items; unallocated items are allowed.
    pub fn new(bundles: Vec<Bundle>, m: usize) -> Result<Self> {
        let mut seen = Bundle::EMPTY;
        for (i, b) in bundles.iter().enumerate() {
            if !b.within(m) {
                return Err(Error::Structural(format!("bundle of agent {} has items beyond e{m}", i + 1)));
            }
            if !seen.is_disjoint(*b) {
                return Err(Error::Structural(format!("bundle of agent {} overlaps an earlier bundle", i + 1)));
            }
            seen = seen.union(*b);
        }
        Ok(Allocation { bundles })
    }

    /// Builds the allocation in which item `e` goes to agent `owner[e]`.
    pub fn from_owners(owner: &[usize], n: usize) -> Self {
        let mut bundles = vec![Bundle::EMPTY; n];
        for (e, &i) in owner.iter().enumerate() {
            bundles[i] = bundles[i].with(e);
        }
        Allocation { bundles }
    }

    pub fn is_complete(&self, m: usize) -> bool {
        self.bundles.iter().fold(Bundle::EMPTY, |acc, b| acc.union(*b)) == Bundle::full(m)
    }

    pub fn len(&self) -> usize {
        self.bundles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bundles.is_empty()
    }

    /// The allocation with the bundles of agents `i` and `j` exchanged.
    pub fn swapped(&self, i: usize, j: usize) -> Self {
        let mut bundles = self.bundles.clone();
        bundles.swap(i, j);
        Allocation { bundles }
    }
}

impl fmt::Display for Allocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bundles.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Agents with entitlements and valuations over `m` indivisible items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndivisibleInstance {
    pub m: usize,
    pub valuations: Vec<IndivisibleValuation>,
    pub entitlements: Entitlements,
}

impl IndivisibleInstance {
    pub fn new(m: usize, valuations: Vec<IndivisibleValuation>, entitlements: Entitlements) -> Result<Self> {
        if valuations.len() != entitlements.len() {
            return Err(Error::Structural(format!(
                "{} valuations but {} entitlements",
                valuations.len(),
                entitlements.len()
            )));
        }
        if m > MAX_ITEMS {
            return Err(Error::Argument(format!("at most {MAX_ITEMS} items are supported")));
        }
        for (i, v) in valuations.iter().enumerate() {
            if v.item_count() != m {
                return Err(Error::Structural(format!(
                    "valuation of agent {} covers {} items, instance has {m}",
                    i + 1,
                    v.item_count()
                )));
            }
        }
        Ok(IndivisibleInstance { m, valuations, entitlements })
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    /// Same valuations, different entitlements.
    pub fn with_entitlements(&self, b: Entitlements) -> Result<Self> {
        IndivisibleInstance::new(self.m, self.valuations.clone(), b)
    }

    /// Value of agent `i` for her own bundle.
    pub fn own_value(&self, a: &Allocation, i: usize) -> Rational {
        self.valuations[i].value(a.bundles[i])
    }

    pub fn value_profile(&self, a: &Allocation) -> Vec<Rational> {
        (0..self.n()).map(|i| self.own_value(a, i)).collect()
    }

    /// Checks that `a` has one bundle per agent and fits the item range.
    pub fn validate_allocation(&self, a: &Allocation) -> Result<()> {
        if a.len() != self.n() {
            return Err(Error::Structural(format!("allocation has {} bundles for {} agents", a.len(), self.n())));
        }
        Allocation::new(a.bundles.clone(), self.m).map(|_| ())
    }

    /// Number of complete allocations, `n^m`.
    pub fn allocation_count(&self) -> u128 {
        (self.n() as u128).checked_pow(self.m as u32).unwrap_or(u128::MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    fn ent(xs: &[(i64, i64)]) -> Entitlements {
        Entitlements::new(xs.iter().map(|&(p, q)| rat(p, q)).collect()).unwrap()
    }

    #[test]
    fn improves_examples() {
        let b = ent(&[(3, 10), (3, 10), (4, 10)]);
        let bp = ent(&[(2, 10), (4, 10), (4, 10)]);
        assert!(i_improves(&b, &bp, 0).unwrap());
        assert!(!i_improves(&b, &b, 0).unwrap());
        let b = ent(&[(1, 2), (1, 4), (1, 4)]);
        let bp = ent(&[(4, 10), (35, 100), (25, 100)]);
        assert!(i_improves(&b, &bp, 0).unwrap());
        assert!(!i_improves(&b, &bp, 1).unwrap());
        assert!(matches!(i_improves(&b, &Entitlements::equal(2).unwrap(), 0), Err(Error::Structural(_))));
    }

    #[test]
    fn entitlement_validation_names_deficit() {
        let err = Entitlements::new(vec![rat(1, 3), rat(1, 3)]).unwrap_err();
        assert!(err.to_string().contains("deficit 1/3"), "{err}");
        assert!(Entitlements::new(vec![int(1), int(0)]).is_err());
        assert!(Entitlements::new(vec![int(1)]).is_err());
    }

    #[test]
    fn valuation_values() {
        let v = IndivisibleValuation::additive(ints(&[2, 1, 0])).unwrap();
        assert_eq!(v.value(Bundle::from_items(&[0, 1]).unwrap()), int(3));
        assert_eq!(v.value(Bundle::EMPTY), int(0));
        let ba = IndivisibleValuation::budget_additive(ints(&[11, 2, 4, 4, 4]), int(13)).unwrap();
        assert_eq!(ba.value(Bundle::from_items(&[0, 2]).unwrap()), int(13));
        assert_eq!(ba.value(Bundle::EMPTY), int(0));
        assert!(v.checked_value(Bundle::from_items(&[5]).unwrap()).is_err());
    }

    #[test]
    fn scaling() {
        let v = IndivisibleValuation::additive(ints(&[2, 1, 0])).unwrap();
        assert_eq!(v.scaled(&int(3)).unwrap(), IndivisibleValuation::additive(ints(&[6, 3, 0])).unwrap());
        assert_eq!(v.scaled(&int(1)).unwrap(), v);
        assert!(v.scaled(&int(0)).is_err());
    }

    #[test]
    fn table_validation() {
        let limits = Limits::default();
        assert!(IndivisibleValuation::table(1, ints(&[0, 1]), &limits).is_ok());
        assert!(IndivisibleValuation::table(1, ints(&[1, 1]), &limits).is_err());
        assert!(IndivisibleValuation::table(2, ints(&[0, 2, 1, 1]), &limits).is_err());
        assert!(IndivisibleValuation::table(2, ints(&[0, 1, 1]), &limits).is_err());
    }

    #[test]
    fn group_coverage_counts_groups() {
        let groups = vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]];
        let v = IndivisibleValuation::group_coverage(&groups, 9, &Limits::default()).unwrap();
        assert_eq!(v.value(Bundle::from_items(&[0, 1, 2]).unwrap()), int(1));
        assert_eq!(v.value(Bundle::from_items(&[0, 3, 6]).unwrap()), int(3));
        assert_eq!(v.grand_value(), int(3));
    }

    #[test]
    fn allocations() {
        let a = Allocation::new(vec![Bundle(0b01), Bundle(0b10)], 2).unwrap();
        assert!(a.is_complete(2));
        assert!(!Allocation::new(vec![Bundle(0b01), Bundle(0)], 2).unwrap().is_complete(2));
        assert!(Allocation::new(vec![Bundle(0b11), Bundle(0b10)], 2).is_err());
        assert_eq!(Allocation::from_owners(&[1, 0, 1], 2).to_string(), "({e2}, {e1,e3})");
    }

    fn arb_valuation() -> impl Strategy<Value = IndivisibleValuation> {
        let additive = proptest::collection::vec(0i64..20, 1..7).prop_filter_map("positive", |xs| {
            IndivisibleValuation::additive(ints(&xs)).ok()
        });
        let budget = (proptest::collection::vec(0i64..20, 1..7), 1i64..40).prop_filter_map("positive", |(xs, t)| {
            IndivisibleValuation::budget_additive(ints(&xs), int(t)).ok()
        });
        prop_oneof![additive, budget]
    }

    proptest! {
        #[test]
        fn monotone_under_inclusion(v in arb_valuation(), s in any::<u64>(), t in any::<u64>()) {
            let m = v.item_count();
            let small = Bundle(s & t & Bundle::full(m).0);
            let large = Bundle((s | t) & Bundle::full(m).0);
            prop_assert!(v.value(small) <= v.value(large));
        }

        #[test]
        fn scaling_commutes_with_value(v in arb_valuation(), s in any::<u64>(), p in 1i64..20, q in 1i64..20) {
            let c = rat(p, q);
            let bundle = Bundle(s & Bundle::full(v.item_count()).0);
            prop_assert_eq!(v.scaled(&c).unwrap().value(bundle), &c * v.value(bundle));
        }

        #[test]
        fn subset_table_agrees(v in arb_valuation()) {
            let table = v.subset_values(&Limits::default()).unwrap();
            for (mask, x) in table.iter().enumerate() {
                prop_assert_eq!(x, &v.value(Bundle(mask as u64)));
            }
        }

        #[test]
        fn improves_is_irreflexive_and_antisymmetric(xs in proptest::collection::vec(1i64..50, 2..5), ys in proptest::collection::vec(1i64..50, 2..5), i in 0usize..5) {
            let n = xs.len().min(ys.len());
            let i = i % n;
            let norm = |v: &[i64]| {
                let s: i64 = v[..n].iter().sum();
                Entitlements::new(v[..n].iter().map(|&x| rat(x, s)).collect()).unwrap()
            };
            let (b, bp) = (norm(&xs), norm(&ys));
            prop_assert!(!i_improves(&b, &b, i).unwrap());
            prop_assert!(!(i_improves(&b, &bp, i).unwrap() && i_improves(&bp, &b, i).unwrap()));
        }
    }
}
