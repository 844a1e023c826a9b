//! One divisible homogeneous good: exact step and piecewise-linear valuations,
//! numeric power valuations, shares, acceptability and acceptable-cell enumeration.
//!
//! Three evaluation modes are chosen from the valuations:
//! * all step valuations: values are constant on each cell, everything is exact;
//! * step and piecewise-linear mixed: values are affine on each cell and each notion
//!   becomes a small exact linear program;
//! * powers `x^p` for two agents: monotone conditions solved numerically.

mod cells;
mod mwnsw;
pub mod point;
mod shares;
pub mod valuation;

use std::fmt;

use crate::error::{Error, Result};
use crate::model::Entitlements;

pub use cells::{div_acceptable_cells, div_check, Cell};
pub use mwnsw::{div_mwnsw, proportional_wnsw, wnsw_attitude, AttitudeClass, AttitudeEvidence, DivMwnsw, WnswLevel};
pub use point::{pick_on_simplex, Interval, Point};
pub use shares::{div_share, div_shares, DivFraction, DivShares, DivWmms};
pub use valuation::{div_value, DivValuation, DivValue, PiecewiseLinear, Segment, StepValuation};

/// Absolute tolerance for numeric comparisons.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Step,
    Linear,
    Power,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivInstance {
    pub valuations: Vec<DivValuation>,
    pub entitlements: Entitlements,
}

impl DivInstance {
    pub fn new(valuations: Vec<DivValuation>, entitlements: Entitlements) -> Result<Self> {
        if valuations.len() != entitlements.len() {
            return Err(Error::Argument(format!(
                "{} valuations but {} entitlements",
                valuations.len(),
                entitlements.len()
            )));
        }
        let inst = DivInstance { valuations, entitlements };
        inst.regime()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn with_entitlements(&self, b: Entitlements) -> Result<Self> {
        DivInstance::new(self.valuations.clone(), b)
    }

    pub fn regime(&self) -> Result<Regime> {
        let powers = self.valuations.iter().filter(|v| matches!(v, DivValuation::Power(_))).count();
        if powers > 0 {
            if powers != self.n() || self.n() != 2 {
                return Err(Error::Argument(
                    "power valuations are supported for exactly two agents that both use powers".into(),
                ));
            }
            return Ok(Regime::Power);
        }
        if self.valuations.iter().any(|v| matches!(v, DivValuation::PiecewiseLinear(_))) {
            let symbolic = self.valuations.iter().any(|v| match v {
                DivValuation::Step(s) => s.breakpoints().iter().any(|p| !p.is_real()),
                _ => false,
            });
            if symbolic {
                return Err(Error::Argument(
                    "infinitesimal breakpoints cannot be mixed with piecewise-linear valuations".into(),
                ));
            }
            return Ok(Regime::Linear);
        }
        Ok(Regime::Step)
    }

    pub fn proportional(&self) -> DivAllocation {
        DivAllocation { x: self.entitlements.as_slice().iter().cloned().map(Point::real).collect() }
    }

    pub fn value(&self, i: usize, x: &Point) -> Result<DivValue> {
        div_value(&self.valuations[i], x)
    }

    pub fn validate_allocation(&self, a: &DivAllocation) -> Result<()> {
        if a.x.len() != self.n() {
            return Err(Error::Argument(format!("allocation has {} fractions for {} agents", a.x.len(), self.n())));
        }
        a.validate()
    }
}

/// Whether `a` gives every agent at least the most it gets anywhere in `cell`, and some agent
/// strictly more, so that `a` dominates every allocation in the cell.
pub fn dominates_cell(instance: &DivInstance, a: &DivAllocation, cell: &Cell) -> Result<bool> {
    instance.validate_allocation(a)?;
    let mut strict = false;
    for i in 0..instance.n() {
        match instance.value(i, &a.x[i])?.compare(cell.value_max(i), TOLERANCE) {
            std::cmp::Ordering::Less => return Ok(false),
            std::cmp::Ordering::Greater => strict = true,
            std::cmp::Ordering::Equal => {}
        }
    }
    Ok(strict)
}

/// Fractions of the good per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DivAllocation {
    pub x: Vec<Point>,
}

impl DivAllocation {
    pub fn new(x: Vec<Point>) -> Result<Self> {
        let a = DivAllocation { x };
        a.validate()?;
        Ok(a)
    }

    fn validate(&self) -> Result<()> {
        if let Some(p) = self.x.iter().find(|p| !p.in_unit()) {
            return Err(Error::Argument(format!("fraction {p} lies outside [0, 1]")));
        }
        let total: Point = self.x.iter().cloned().sum();
        if total != Point::one() {
            return Err(Error::Argument(format!("fractions sum to {total}, not 1")));
        }
        Ok(())
    }
}

impl fmt::Display for DivAllocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.x.iter().map(Point::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}
