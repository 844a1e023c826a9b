//! Monotonicity and paradox analysis over instances that differ only in their entitlements.
//!
//! Indivisible instances contribute one member per acceptable allocation. Divisible instances
//! contribute one member per acceptable cell, carrying the own-value range over the cell.

mod monotone;
mod scan;
mod selection;
mod selfmax;

use std::cmp::Ordering;
use std::fmt;

use crate::divisible::{div_acceptable_cells, div_check, DivAllocation, DivInstance, DivValue, TOLERANCE};
use crate::error::{Error, Result};
use crate::model::{Allocation, Entitlements, IndivisibleInstance, Limits};
use crate::notions::{enumerate_with, Checker, Notion, ShareKind};

pub use monotone::{
    check_internal, check_lower, check_upper, find_inverse_domination, find_inversion, monotonicity_report, Edge,
    EdgeVerdict, InternalReport, InverseDomination, Inversion, Judgement, MonotonicityReport, Search, Valued,
};
pub use scan::{paradox_scan, ParadoxWitness, ScanBudget, ScanReport};
pub use selection::{selection_search, EntitlementFamily, Nogood, SelectionSearchReport};
pub use selfmax::{self_maximizing_check, SelfMaxReport};

/// The six principal fairness notions.
pub const PRINCIPAL: [Notion; 6] = [
    Notion::Share(ShareKind::Prop),
    Notion::Share(ShareKind::Aps),
    Notion::Share(ShareKind::Wmms),
    Notion::Wef,
    Notion::Mwnsw,
    Notion::Ce,
];

/// Valuations over indivisible items or over one divisible good.
#[derive(Debug, Clone, PartialEq)]
pub enum Setting {
    Items(IndivisibleInstance),
    Good(DivInstance),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AnyAllocation {
    Items(Allocation),
    Fractions(DivAllocation),
}

impl AnyAllocation {
    /// The allocation with the shares of agents `i` and `j` exchanged.
    pub fn swapped(&self, i: usize, j: usize) -> Self {
        match self {
            AnyAllocation::Items(a) => AnyAllocation::Items(a.swapped(i, j)),
            AnyAllocation::Fractions(a) => {
                let mut x = a.x.clone();
                x.swap(i, j);
                AnyAllocation::Fractions(DivAllocation { x })
            }
        }
    }
}

impl fmt::Display for AnyAllocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyAllocation::Items(a) => a.fmt(f),
            AnyAllocation::Fractions(a) => a.fmt(f),
        }
    }
}

/// One acceptable allocation, or one acceptable cell of allocations.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    /// The allocation itself, or the cell's representative.
    pub allocation: AnyAllocation,
    /// Own values at `allocation`.
    pub values: Vec<DivValue>,
    /// Least own value of each agent over the member.
    pub low: Vec<DivValue>,
    /// Greatest own value of each agent over the member.
    pub high: Vec<DivValue>,
}

/// The acceptable set of one notion under one entitlement vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Side {
    pub notion: Notion,
    pub entitlements: Entitlements,
    pub members: Vec<Member>,
    /// Members whose value profile no other member dominates.
    pub pareto_front: Vec<usize>,
}

pub(crate) fn cmp(a: &DivValue, b: &DivValue) -> Ordering {
    a.compare(b, TOLERANCE)
}

impl Side {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    fn candidates(&self, front_only: bool) -> Vec<usize> {
        if front_only {
            self.pareto_front.clone()
        } else {
            (0..self.members.len()).collect()
        }
    }

    /// Member giving agent `i` the largest value (first on ties).
    pub fn argmax(&self, i: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for k in 0..self.members.len() {
            if best.map_or(true, |b| cmp(&self.members[k].high[i], &self.members[b].high[i]) == Ordering::Greater) {
                best = Some(k);
            }
        }
        best
    }

    /// Member giving agent `i` the smallest value, optionally among the Pareto front only.
    pub fn argmin(&self, i: usize, front_only: bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for k in self.candidates(front_only) {
            if best.map_or(true, |b| cmp(&self.members[k].low[i], &self.members[b].low[i]) == Ordering::Less) {
                best = Some(k);
            }
        }
        best
    }
}

fn dominates(p: &[DivValue], q: &[DivValue]) -> bool {
    let mut strict = false;
    for (x, y) in p.iter().zip(q) {
        match cmp(x, y) {
            Ordering::Less => return false,
            Ordering::Greater => strict = true,
            Ordering::Equal => {}
        }
    }
    strict
}

impl Setting {
    pub fn n(&self) -> usize {
        match self {
            Setting::Items(inst) => inst.n(),
            Setting::Good(inst) => inst.n(),
        }
    }

    pub fn entitlements(&self) -> &Entitlements {
        match self {
            Setting::Items(inst) => &inst.entitlements,
            Setting::Good(inst) => &inst.entitlements,
        }
    }

    pub fn with_entitlements(&self, b: &Entitlements) -> Result<Setting> {
        Ok(match self {
            Setting::Items(inst) => Setting::Items(inst.with_entitlements(b.clone())?),
            Setting::Good(inst) => Setting::Good(inst.with_entitlements(b.clone())?),
        })
    }

    pub fn same_valuation(&self, i: usize, j: usize) -> bool {
        match self {
            Setting::Items(inst) => inst.valuations[i] == inst.valuations[j],
            Setting::Good(inst) => inst.valuations[i] == inst.valuations[j],
        }
    }

    /// Own value of every agent.
    pub fn values(&self, a: &AnyAllocation) -> Result<Vec<DivValue>> {
        match (self, a) {
            (Setting::Items(inst), AnyAllocation::Items(a)) => {
                inst.validate_allocation(a)?;
                Ok(inst.value_profile(a).into_iter().map(DivValue::Exact).collect())
            }
            (Setting::Good(inst), AnyAllocation::Fractions(a)) => {
                inst.validate_allocation(a)?;
                (0..inst.n()).map(|i| inst.value(i, &a.x[i])).collect()
            }
            _ => Err(Error::Argument("allocation kind does not match the instance".into())),
        }
    }

    /// Decides acceptability of one allocation directly.
    pub fn accepts(&self, notion: Notion, a: &AnyAllocation, limits: &Limits) -> Result<bool> {
        match (self, a) {
            (Setting::Items(inst), AnyAllocation::Items(a)) => Ok(Checker::new(inst, *limits)?.check(notion, a)?.acceptable),
            (Setting::Good(inst), AnyAllocation::Fractions(a)) => div_check(notion, inst, a),
            _ => Err(Error::Argument("allocation kind does not match the instance".into())),
        }
    }

    /// The acceptable set under the setting's own entitlements.
    pub fn acceptable(&self, notion: Notion, limits: &Limits) -> Result<Side> {
        let members: Vec<Member> = match self {
            Setting::Items(inst) => {
                let checker = Checker::new(inst, *limits)?;
                enumerate_with(&checker, notion)?
                    .allocations
                    .into_iter()
                    .map(|a| {
                        let values: Vec<DivValue> = checker.profile(&a).into_iter().map(DivValue::Exact).collect();
                        Member { allocation: AnyAllocation::Items(a), low: values.clone(), high: values.clone(), values }
                    })
                    .collect()
            }
            Setting::Good(inst) => div_acceptable_cells(notion, inst, limits)?
                .into_iter()
                .map(|c| {
                    let values = (0..inst.n()).map(|i| inst.value(i, &c.representative.x[i])).collect::<Result<Vec<_>>>()?;
                    Ok(Member {
                        allocation: AnyAllocation::Fractions(c.representative.clone()),
                        values,
                        low: c.values.iter().map(|v| v.0.clone()).collect(),
                        high: c.values.iter().map(|v| v.1.clone()).collect(),
                    })
                })
                .collect::<Result<_>>()?,
        };
        let pareto_front = (0..members.len())
            .filter(|&k| !members.iter().any(|o| dominates(&o.values, &members[k].values)))
            .collect();
        Ok(Side { notion, entitlements: self.entitlements().clone(), members, pareto_front })
    }

    /// The acceptable set under entitlements `b`.
    pub fn acceptable_under(&self, notion: Notion, b: &Entitlements, limits: &Limits) -> Result<Side> {
        self.with_entitlements(b)?.acceptable(notion, limits)
    }
}
