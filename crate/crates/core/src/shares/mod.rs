//! Share values for indivisible goods: Prop, MMS, pessimistic, APS (both forms), WMMS, MMS⁻.

pub mod external;

use crate::enumerate::{check_assignment_bound, check_partition_bound, for_each_assignment, for_each_set_partition};
use crate::error::{Error, Result};
use crate::exactlp::{solve, LinearProgram, LpOutcome, Relation, Sense};
use crate::model::{Bundle, IndivisibleInstance, IndivisibleValuation, Limits};
use crate::rational::{int, Rational};
use num::{One, Signed, ToPrimitive, Zero};

/// Weighted bundles with total weight 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalPartition {
    pub columns: Vec<(Bundle, Rational)>,
}

impl FractionalPartition {
    pub fn total_weight(&self) -> Rational {
        self.columns.iter().map(|(_, w)| w).sum()
    }

    /// Every item is covered with total weight at most `c`.
    pub fn is_bounded(&self, c: &Rational, m: usize) -> bool {
        (0..m).all(|e| {
            let cover: Rational = self.columns.iter().filter(|(s, _)| s.contains(e)).map(|(_, w)| w).sum();
            cover <= *c
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// A maximizing partition; for WMMS the `j`-th bundle is the one scaled by `b_j`.
    Partition(Vec<Bundle>),
    Fractional(FractionalPartition),
    /// Item prices summing to 1 under which no affordable bundle beats the share.
    Prices(Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareReport {
    pub value: Rational,
    pub certificate: Certificate,
}

fn check_entitlement(b: &Rational) -> Result<()> {
    if !b.is_positive() || *b >= Rational::one() {
        return Err(Error::Argument(format!("entitlement {b} is not in (0,1)")));
    }
    Ok(())
}

/// `b · v(M)`.
pub fn prop_share(v: &IndivisibleValuation, b: &Rational) -> Result<Rational> {
    check_entitlement(b)?;
    Ok(b * v.grand_value())
}

/// Maximin share over partitions into `k` bundles, empty bundles allowed.
pub fn mms(v: &IndivisibleValuation, k: usize, limits: &Limits) -> Result<ShareReport> {
    if k == 0 {
        return Err(Error::Argument("MMS needs at least one bundle".into()));
    }
    let m = v.item_count();
    check_partition_bound(m, k, limits, "MMS partitions")?;
    let table = v.subset_values(limits)?;
    let mut best: Option<(Rational, Vec<Bundle>)> = None;
    for_each_set_partition(m, k, |blocks| {
        let worst = if blocks.len() < k {
            Rational::zero()
        } else {
            blocks.iter().map(|b| &table[b.0 as usize]).min().cloned().unwrap_or_else(Rational::zero)
        };
        if best.as_ref().map_or(true, |(x, _)| worst > *x) {
            let mut bundles = blocks.to_vec();
            bundles.resize(k, Bundle::EMPTY);
            best = Some((worst, bundles));
        }
    });
    let (value, bundles) = best.expect("at least one partition");
    Ok(ShareReport { value, certificate: Certificate::Partition(bundles) })
}

/// MMS⁻: the MMS for the `k` with `1/k <= b < 1/(k-1)`.
pub fn mms_minus(v: &IndivisibleValuation, b: &Rational, limits: &Limits) -> Result<ShareReport> {
    mms(v, mms_minus_k(b)?, limits)
}

/// The integer `k >= 2` with `1/k <= b < 1/(k-1)`.
pub fn mms_minus_k(b: &Rational) -> Result<usize> {
    check_entitlement(b)?;
    let k = b.recip().ceil().to_integer();
    k.to_usize().ok_or_else(|| Error::Argument(format!("entitlement {b} too small")))
}

/// Pessimistic (ℓ-out-of-d) share, maximizing over `d = 1..=d_max`.
pub fn pessimistic_share(v: &IndivisibleValuation, b: &Rational, d_max: usize, limits: &Limits) -> Result<ShareReport> {
    check_entitlement(b)?;
    if d_max == 0 {
        return Err(Error::Argument("d_max must be at least 1".into()));
    }
    let m = v.item_count();
    let blocks_cap = d_max.min(m);
    check_partition_bound(m, blocks_cap, limits, "pessimistic-share partitions")?;
    let table = v.subset_values(limits)?;
    // l(d) = floor(b d); a partition into j nonempty blocks padded with d - j empty
    // bundles is worst when the adversary takes as many empty bundles as possible.
    let ell: Vec<usize> = (0..=d_max)
        .map(|d| (b * int(d as i64)).floor().to_integer().to_usize().unwrap_or(0))
        .collect();
    let mut best = Rational::zero();
    let mut best_bundles = vec![Bundle::full(m)];
    for_each_set_partition(m, blocks_cap, |blocks| {
        let j = blocks.len();
        let worst_by_count = min_union_by_count(v, blocks, &table);
        for d in j.max(1)..=d_max {
            let l = ell[d];
            if l == 0 {
                continue;
            }
            let taken = l.saturating_sub(d - j);
            let value = &worst_by_count[taken];
            if *value > best {
                best = value.clone();
                let mut bundles = blocks.to_vec();
                bundles.resize(d, Bundle::EMPTY);
                best_bundles = bundles;
            }
        }
    });
    Ok(ShareReport { value: best, certificate: Certificate::Partition(best_bundles) })
}

/// `out[c]` = least value of a union of exactly `c` of the blocks.
fn min_union_by_count(v: &IndivisibleValuation, blocks: &[Bundle], table: &[Rational]) -> Vec<Rational> {
    let j = blocks.len();
    let additive_like = match v {
        IndivisibleValuation::Additive(_) => Some(None),
        IndivisibleValuation::BudgetAdditive { budget, .. } => Some(Some(budget)),
        IndivisibleValuation::Table { .. } => None,
    };
    if let Some(cap) = additive_like {
        // Additive part is minimized by the c cheapest blocks; the budget clamp is monotone.
        let raw: Vec<Rational> = match v {
            IndivisibleValuation::BudgetAdditive { values, .. } => {
                blocks.iter().map(|s| s.items().map(|e| &values[e]).sum()).collect()
            }
            _ => blocks.iter().map(|s| table[s.0 as usize].clone()).collect(),
        };
        let mut sorted = raw;
        sorted.sort();
        let mut out = Vec::with_capacity(j + 1);
        let mut acc = Rational::zero();
        out.push(acc.clone());
        for x in sorted {
            acc += x;
            out.push(match cap {
                Some(t) if acc > *t => t.clone(),
                _ => acc.clone(),
            });
        }
        return out;
    }
    let mut out: Vec<Option<Rational>> = vec![None; j + 1];
    for sel in 0u32..1 << j {
        let union = (0..j).filter(|&x| sel >> x & 1 == 1).fold(Bundle::EMPTY, |a, x| a.union(blocks[x]));
        let c = sel.count_ones() as usize;
        let val = &table[union.0 as usize];
        if out[c].as_ref().map_or(true, |cur| val < cur) {
            out[c] = Some(val.clone());
        }
    }
    out.into_iter().map(|x| x.expect("every count occurs")).collect()
}

/// Sorted distinct subset values.
fn distinct_values(table: &[Rational]) -> Vec<Rational> {
    let mut vals = table.to_vec();
    vals.sort();
    vals.dedup();
    vals
}

/// Bundles of value at least `t` none of whose proper subsets reach `t`.
fn minimal_bundles(table: &[Rational], t: &Rational) -> Vec<Bundle> {
    minimal_sets(table, |x| x >= t)
}

/// Bundles satisfying `keep` (an upward-closed condition on value) none of whose
/// one-item-smaller subsets satisfy it.
pub(crate) fn minimal_sets(table: &[Rational], keep: impl Fn(&Rational) -> bool) -> Vec<Bundle> {
    (0..table.len())
        .filter(|&s| {
            keep(&table[s]) && {
                let mut rest = s;
                let mut minimal = true;
                while rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    if keep(&table[s ^ bit]) {
                        minimal = false;
                        break;
                    }
                    rest ^= bit;
                }
                minimal
            }
        })
        .map(|s| Bundle(s as u64))
        .collect()
}

/// A `b`-bounded fractional partition into bundles of value at least `t`, if one exists.
fn bounded_partition(m: usize, table: &[Rational], t: &Rational, b: &Rational) -> Result<Option<FractionalPartition>> {
    let cols = minimal_bundles(table, t);
    if cols.is_empty() {
        return Ok(None);
    }
    let mut lp = LinearProgram::new(cols.len(), Sense::Minimize);
    lp.add(vec![Rational::one(); cols.len()], Relation::Eq, Rational::one());
    for e in 0..m {
        let row: Vec<Rational> =
            cols.iter().map(|s| if s.contains(e) { Rational::one() } else { Rational::zero() }).collect();
        if row.iter().any(|x| !x.is_zero()) {
            lp.add(row, Relation::Le, b.clone());
        }
    }
    match solve(&lp)? {
        LpOutcome::Optimal { point, .. } => Ok(Some(FractionalPartition {
            columns: cols.into_iter().zip(point).filter(|(_, w)| !w.is_zero()).collect(),
        })),
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Err(Error::Numeric("APS feasibility LP reported unbounded".into())),
    }
}

/// APS as the largest `t` admitting a `b`-bounded fractional partition into bundles worth at least `t`.
pub fn aps(v: &IndivisibleValuation, b: &Rational, limits: &Limits) -> Result<ShareReport> {
    check_entitlement(b)?;
    let m = v.item_count();
    let table = v.subset_values(limits)?;
    let values = distinct_values(&table);
    // values[0] = 0 is always reachable with the empty bundle at weight 1.
    let mut lo = 0usize;
    let mut lo_cert = bounded_partition(m, &table, &values[0], b)?.expect("empty bundle");
    let mut hi = values.len();
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match bounded_partition(m, &table, &values[mid], b)? {
            Some(cert) => {
                lo = mid;
                lo_cert = cert;
            }
            None => hi = mid,
        }
    }
    Ok(ShareReport { value: values[lo].clone(), certificate: Certificate::Fractional(lo_cert) })
}

/// Prices summing to 1 that make every bundle of value at least `t` cost more than `b`, if any.
fn blocking_prices(m: usize, table: &[Rational], t: &Rational, b: &Rational) -> Result<Option<Vec<Rational>>> {
    let sets = minimal_bundles(table, t);
    // Variables: p_0..p_{m-1} >= 0, then a free slack eps; maximize eps.
    let mut lp = LinearProgram::new(m + 1, Sense::Maximize);
    lp.bounds[m] = crate::exactlp::Bound::free();
    lp.objective[m] = Rational::one();
    let mut sum = vec![Rational::one(); m + 1];
    sum[m] = Rational::zero();
    lp.add(sum, Relation::Eq, Rational::one());
    for s in &sets {
        let mut row = vec![Rational::zero(); m + 1];
        for e in s.items() {
            row[e] = Rational::one();
        }
        row[m] = -Rational::one();
        lp.add(row, Relation::Ge, b.clone());
    }
    match solve(&lp)? {
        LpOutcome::Optimal { value, mut point } if value.is_positive() => {
            point.truncate(m);
            Ok(Some(point))
        }
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => {
            // No bundle reaches t at all, so any admissible prices block it.
            Ok(Some(vec![Rational::new(1.into(), (m as i64).into()); m]))
        }
    }
}

/// Largest value of a bundle affordable at `prices` with budget `b`.
pub fn max_affordable(table: &[Rational], prices: &[Rational], b: &Rational) -> Rational {
    table
        .iter()
        .enumerate()
        .filter(|(s, _)| Bundle(*s as u64).items().map(|e| &prices[e]).sum::<Rational>() <= *b)
        .map(|(_, v)| v.clone())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// APS as the minimum over admissible prices of the best affordable value.
///
/// Computed independently of [`aps`]: for each candidate threshold an LP looks for
/// prices that put every bundle reaching it strictly out of budget.
pub fn aps_dual(v: &IndivisibleValuation, b: &Rational, limits: &Limits) -> Result<ShareReport> {
    check_entitlement(b)?;
    let m = v.item_count();
    let table = v.subset_values(limits)?;
    let values = distinct_values(&table);
    // Blocking is monotone in t; find the first blocked index.
    let mut lo = 0usize; // not blocked
    let mut hi = values.len(); // blocked (virtual sentinel)
    let mut hi_prices: Option<Vec<Rational>> = None;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        match blocking_prices(m, &table, &values[mid], b)? {
            Some(p) => {
                hi = mid;
                hi_prices = Some(p);
            }
            None => lo = mid,
        }
    }
    let prices = match hi_prices {
        Some(p) => p,
        None if hi < values.len() => blocking_prices(m, &table, &values[hi], b)?.expect("blocked"),
        None => vec![Rational::new(1.into(), (m as i64).into()); m],
    };
    let value = max_affordable(&table, &prices, b);
    if value != values[lo] {
        return Err(Error::Numeric(format!(
            "price certificate yields {value}, threshold search gave {}",
            values[lo]
        )));
    }
    Ok(ShareReport { value, certificate: Certificate::Prices(prices) })
}

/// Weighted maximin share of agent `i`: best labeled partition for `min_j (b_i/b_j) v_i(A_j)`.
pub fn wmms(instance: &IndivisibleInstance, i: usize, limits: &Limits) -> Result<ShareReport> {
    let n = instance.n();
    if i >= n {
        return Err(Error::Structural(format!("agent index {i} out of range")));
    }
    let m = instance.m;
    check_assignment_bound(m, n, limits, "WMMS partitions")?;
    let table = instance.valuations[i].subset_values(limits)?;
    let b = instance.entitlements.as_slice();
    let ratio: Vec<Rational> = b.iter().map(|bj| &b[i] / bj).collect();
    let mut best: Option<(Rational, Vec<Bundle>)> = None;
    for_each_assignment(m, n, |_, bundles| {
        let worst = (0..n).map(|j| &ratio[j] * &table[bundles[j].0 as usize]).min().expect("n >= 2");
        if best.as_ref().map_or(true, |(x, _)| worst > *x) {
            best = Some((worst, bundles.to_vec()));
        }
    });
    let (value, bundles) = best.expect("at least one assignment");
    Ok(ShareReport { value, certificate: Certificate::Partition(bundles) })
}

/// Pessimistic share with the default `d_max = 2m`.
pub fn pessimistic_share_default(v: &IndivisibleValuation, b: &Rational, limits: &Limits) -> Result<ShareReport> {
    pessimistic_share(v, b, (2 * v.item_count()).max(1), limits)
}

/// Whether doubling `d_max` leaves the pessimistic share unchanged.
pub fn pessimistic_is_stable(v: &IndivisibleValuation, b: &Rational, d_max: usize, limits: &Limits) -> Result<bool> {
    Ok(pessimistic_share(v, b, d_max, limits)?.value == pessimistic_share(v, b, 2 * d_max, limits)?.value)
}
