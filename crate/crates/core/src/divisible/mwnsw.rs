//! Maximum weighted Nash social welfare and the WNSW attitude of a notion.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num::Signed;

use crate::error::Result;
use crate::model::Limits;
use crate::notions::wnsw::{key_from_values, support_mask};
use crate::notions::{Notion, WnswKey};
use crate::rational::{to_f64, Rational};

use super::cells::{div_acceptable_cells, div_check, Cell, Grid};
use super::point::{pick_on_simplex, Point};
use super::valuation::{div_value, DivValue};
use super::{DivAllocation, DivInstance, Regime, TOLERANCE};

/// Weighted Nash welfare of one allocation or bound.
#[derive(Debug, Clone, PartialEq)]
pub struct WnswLevel {
    /// Agents with positive value.
    pub support: usize,
    /// Exact integer-lifted key when every value is rational.
    pub key: Option<WnswKey>,
    /// `Σ b_i ln v_i` over the supported agents.
    pub log: f64,
}

impl WnswLevel {
    pub fn from_values(values: &[DivValue], b: &crate::model::Entitlements) -> Self {
        let exact: Option<Vec<&Rational>> = values.iter().map(DivValue::exact).collect();
        let positive = |v: &DivValue| match v {
            DivValue::Exact(r) => r.is_positive(),
            DivValue::Approx(x) => *x > TOLERANCE,
        };
        let support = values.iter().filter(|v| positive(v)).count();
        let log = values
            .iter()
            .zip(b.as_slice())
            .filter(|(v, _)| positive(v))
            .map(|(v, bi)| to_f64(bi) * v.approx().ln())
            .sum();
        WnswLevel { support, key: exact.map(|e| key_from_values(&e, b)), log }
    }

    /// `∏ v_i^{b_i}` over the supported agents.
    pub fn product(&self) -> f64 {
        self.log.exp()
    }

    pub fn compare(&self, other: &WnswLevel) -> Ordering {
        self.support.cmp(&other.support).then_with(|| match (&self.key, &other.key) {
            (Some(a), Some(b)) => a.product.cmp(&b.product),
            _ => {
                if (self.log - other.log).abs() <= TOLERANCE {
                    Ordering::Equal
                } else {
                    self.log.partial_cmp(&other.log).unwrap_or(Ordering::Equal)
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivMwnsw {
    /// Supremum of the welfare among allocations serving a largest set of agents.
    pub best: WnswLevel,
    /// Some allocation reaches the supremum.
    pub attained: bool,
    /// A maximizer, or a point of the closure where the supremum is approached.
    pub witness: DivAllocation,
    /// Acceptable cells: for each largest support set, the cells reaching its own supremum.
    pub cells: Vec<Cell>,
}

pub fn div_mwnsw(instance: &DivInstance, limits: &Limits) -> Result<DivMwnsw> {
    mwnsw_cells(instance, limits)
}

struct Candidate {
    mask: u64,
    level: WnswLevel,
    attained: bool,
    cell: Cell,
}

pub(crate) fn mwnsw_cells(inst: &DivInstance, limits: &Limits) -> Result<DivMwnsw> {
    let candidates = match inst.regime()? {
        Regime::Power => power_candidate(inst)?,
        regime => {
            let grid = Grid::new(inst)?;
            let mut out = Vec::new();
            grid.for_each_cell(&grid.all_atoms(), limits, &mut |choice| {
                let c = match regime {
                    Regime::Step => step_candidate(&grid, choice),
                    _ => linear_candidate(&grid, choice),
                };
                out.extend(c);
                Ok(())
            })?;
            out
        }
    };
    let top = candidates.iter().map(|c| c.level.support).max().unwrap_or(0);
    let mut best_per_mask: BTreeMap<u64, WnswLevel> = BTreeMap::new();
    for c in candidates.iter().filter(|c| c.level.support == top) {
        let slot = best_per_mask.entry(c.mask).or_insert_with(|| c.level.clone());
        if c.level.compare(slot) == Ordering::Greater {
            *slot = c.level.clone();
        }
    }
    let best = best_per_mask
        .values()
        .cloned()
        .max_by(|a, b| a.compare(b))
        .unwrap_or(WnswLevel { support: 0, key: None, log: 0.0 });
    let reaches = |c: &Candidate| c.attained && c.level.compare(&best_per_mask[&c.mask]) == Ordering::Equal;
    let cells: Vec<Cell> =
        candidates.iter().filter(|c| c.level.support == top && reaches(c)).map(|c| c.cell.clone()).collect();
    let top_hits: Vec<&Candidate> =
        candidates.iter().filter(|c| c.level.support == top && c.level.compare(&best) == Ordering::Equal).collect();
    let attained = top_hits.iter().any(|c| c.attained);
    let witness = top_hits
        .iter()
        .find(|c| c.attained)
        .or(top_hits.first())
        .map(|c| c.cell.representative.clone())
        .unwrap_or_else(|| inst.proportional());
    Ok(DivMwnsw { best, attained, witness, cells })
}

fn step_candidate(grid: &Grid<'_>, choice: &[usize]) -> Option<Candidate> {
    let n = choice.len();
    let values: Vec<Rational> = (0..n).map(|i| grid.value(i, choice[i])).collect();
    let refs: Vec<&Rational> = values.iter().collect();
    let mask = support_mask(&refs);
    let dv: Vec<DivValue> = values.into_iter().map(DivValue::Exact).collect();
    let level = WnswLevel::from_values(&dv, &grid.inst.entitlements);
    let cell = grid.box_cell(choice.iter().map(|&k| grid.atoms[k].clone()).collect(), choice)?;
    Some(Candidate { mask, level, attained: true, cell })
}

/// Maximizes the weighted log welfare over the closure of one cell.
///
/// Agents whose value increases on their atom share what the others leave at their
/// lower ends; the optimum is `x_i = clamp(b_i μ − a_i/s_i)` with `μ` fixed by the
/// budget, found by bisection.
fn linear_candidate(grid: &Grid<'_>, choice: &[usize]) -> Option<Candidate> {
    let inst = grid.inst;
    let n = choice.len();
    let boxes: Vec<_> = choice.iter().map(|&k| grid.atoms[k].clone()).collect();
    pick_on_simplex(&boxes)?;
    let b: Vec<f64> = inst.entitlements.as_slice().iter().map(to_f64).collect();
    let lo: Vec<f64> = boxes.iter().map(|x| x.lo.approx()).collect();
    let hi: Vec<f64> = boxes.iter().map(|x| x.hi.approx()).collect();
    let forms = |i: usize| &grid.forms[i][choice[i]];
    let inc: Vec<usize> = (0..n).filter(|&i| forms(i).s.is_positive() && !boxes[i].is_point()).collect();
    let free: Vec<usize> = (0..n).filter(|i| !inc.contains(i)).collect();
    let free_lo: f64 = free.iter().map(|&i| lo[i]).sum();
    let budget = 1.0 - free_lo;
    let shift: Vec<f64> = (0..n).map(|i| if inc.contains(&i) { to_f64(&forms(i).a) / to_f64(&forms(i).s) } else { 0.0 }).collect();
    let place = |mu: f64| -> Vec<f64> { inc.iter().map(|&i| (b[i] * mu - shift[i]).clamp(lo[i], hi[i])).collect() };
    let total = |mu: f64| -> f64 { place(mu).iter().sum() };
    let mut x_inc = place(0.0);
    if !inc.is_empty() {
        let mut top = 1.0;
        while total(top) < budget - 1e-15 && top < 1e12 {
            top *= 2.0;
        }
        let mut bottom = 0.0;
        for _ in 0..200 {
            let mid = (bottom + top) / 2.0;
            if total(mid) < budget {
                bottom = mid;
            } else {
                top = mid;
            }
        }
        x_inc = place(top);
    }
    let mut attained = true;
    for (k, &i) in inc.iter().enumerate() {
        let x = x_inc[k];
        if (!boxes[i].lo_closed && x <= lo[i] + TOLERANCE) || (!boxes[i].hi_closed && x >= hi[i] - TOLERANCE) {
            attained = false;
        }
    }
    let rest = 1.0 - x_inc.iter().sum::<f64>();
    if free.is_empty() {
        attained &= rest.abs() <= TOLERANCE;
    } else {
        let free_hi: f64 = free.iter().map(|&i| hi[i]).sum();
        if rest <= free_lo + TOLERANCE && !free.iter().all(|&i| boxes[i].lo_closed) {
            attained = false;
        }
        if rest >= free_hi - TOLERANCE && !free.iter().all(|&i| boxes[i].hi_closed) {
            attained = false;
        }
    }
    // Place free agents proportionally inside their ranges.
    let mut xs = vec![0.0; n];
    for (k, &i) in inc.iter().enumerate() {
        xs[i] = x_inc[k];
    }
    let width: f64 = free.iter().map(|&i| hi[i] - lo[i]).sum();
    for &i in &free {
        xs[i] = if width > 0.0 { lo[i] + (rest - free_lo).max(0.0) * (hi[i] - lo[i]) / width } else { lo[i] };
    }
    let values: Vec<DivValue> = (0..n)
        .map(|i| {
            let f = forms(i);
            if inc.contains(&i) {
                DivValue::Approx(to_f64(&f.a) + to_f64(&f.s) * xs[i])
            } else {
                DivValue::Exact(grid.value(i, choice[i]))
            }
        })
        .collect();
    let exact_values: Vec<Rational> = (0..n).map(|i| grid.value(i, choice[i])).collect();
    let refs: Vec<&Rational> = exact_values.iter().collect();
    let mask = support_mask(&refs);
    let mut level = WnswLevel::from_values(&values, &inst.entitlements);
    if level.support != mask.count_ones() as usize {
        // An increasing agent pinned where its value vanishes.
        level.log = f64::NEG_INFINITY;
        attained = false;
    }
    let representative = to_allocation(&xs);
    let x_range = xs.iter().map(|&x| (DivValue::Approx(x), DivValue::Approx(x))).collect();
    let values = values.into_iter().map(|v| (v.clone(), v)).collect();
    Some(Candidate { mask, level, attained, cell: Cell { atoms: boxes, representative, x_range, values } })
}

/// Rational fractions summing exactly to one.
fn to_allocation(xs: &[f64]) -> DivAllocation {
    let mut pts: Vec<Point> = xs.iter().map(|&x| Point::real(Rational::from_float(x.clamp(0.0, 1.0)).unwrap_or_default())).collect();
    let last = pts.len() - 1;
    let head: Point = pts[..last].iter().cloned().sum();
    pts[last] = Point::one() - head;
    DivAllocation { x: pts }
}

fn power_candidate(inst: &DivInstance) -> Result<Vec<Candidate>> {
    let cell = div_acceptable_cells(Notion::Mwnsw, inst, &Limits::default())?.remove(0);
    let values: Vec<DivValue> = (0..2).map(|i| cell.values[i].0.clone()).collect();
    let level = WnswLevel::from_values(&values, &inst.entitlements);
    Ok(vec![Candidate { mask: 0b11, level, attained: true, cell }])
}

/// Whether `a` is among the MWNSW allocations.
pub(crate) fn mwnsw_check(inst: &DivInstance, a: &DivAllocation) -> Result<bool> {
    mwnsw_accepts(&mwnsw_cells(inst, &Limits::default())?, inst, a)
}

/// Whether `a` is a maximizer, given the instance's precomputed maximizing cells.
pub(crate) fn mwnsw_accepts(best: &DivMwnsw, inst: &DivInstance, a: &DivAllocation) -> Result<bool> {
    let values: Vec<DivValue> = (0..inst.n()).map(|i| inst.value(i, &a.x[i])).collect::<Result<_>>()?;
    let level = WnswLevel::from_values(&values, &inst.entitlements);
    if level.support < best.best.support {
        return Ok(false);
    }
    // The best level for this support set is the maximum over cells with the same mask.
    let same_mask: Vec<&Cell> = best
        .cells
        .iter()
        .filter(|c| {
            let vals: Vec<DivValue> = (0..inst.n()).map(|i| c.values[i].0.clone()).collect();
            mask_of(&vals) == mask_of(&values)
        })
        .collect();
    Ok(same_mask.iter().any(|c| {
        let vals: Vec<DivValue> = (0..inst.n()).map(|i| c.values[i].0.clone()).collect();
        WnswLevel::from_values(&vals, &inst.entitlements).compare(&level) == Ordering::Equal
    }))
}

fn mask_of(values: &[DivValue]) -> u64 {
    values.iter().enumerate().filter(|(_, v)| v.approx() > TOLERANCE || v.exact().is_some_and(|r| r.is_positive())).fold(0, |m, (i, _)| m | 1 << i)
}

/// Welfare of the proportional allocation.
pub fn proportional_wnsw(inst: &DivInstance) -> Result<WnswLevel> {
    let values: Vec<DivValue> =
        (0..inst.n()).map(|i| div_value(&inst.valuations[i], &Point::real(inst.entitlements.get(i).clone()))).collect::<Result<_>>()?;
    Ok(WnswLevel::from_values(&values, &inst.entitlements))
}

/// How acceptable allocations compare with the proportional allocation on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttitudeClass {
    /// The proportional allocation is acceptable and nothing acceptable is worse.
    Neutral,
    /// The proportional allocation is acceptable and some acceptable allocation is worse.
    Risky,
    /// The proportional allocation is not acceptable and nothing acceptable is worse.
    Pro,
    /// Every acceptable allocation is worse than the proportional one.
    Non,
    /// Not acceptable, with acceptable allocations on both sides.
    Mixed,
    /// No acceptable allocation.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttitudeEvidence {
    pub notion: Notion,
    pub proportional_acceptable: bool,
    pub proportional: WnswLevel,
    /// Lowest and highest welfare over the acceptable set; bounds from per-agent
    /// value ranges when cells are not single points with constant values.
    pub min: Option<WnswLevel>,
    pub max: Option<WnswLevel>,
    pub cells: Vec<Cell>,
    pub class: AttitudeClass,
}

pub fn wnsw_attitude(notion: Notion, instance: &DivInstance, limits: &Limits) -> Result<AttitudeEvidence> {
    let proportional_acceptable = div_check(notion, instance, &instance.proportional())?;
    let proportional = proportional_wnsw(instance)?;
    let cells = div_acceptable_cells(notion, instance, limits)?;
    let b = &instance.entitlements;
    let mut min: Option<WnswLevel> = None;
    let mut max: Option<WnswLevel> = None;
    for c in &cells {
        let lo: Vec<DivValue> = c.values.iter().map(|v| v.0.clone()).collect();
        let hi: Vec<DivValue> = c.values.iter().map(|v| v.1.clone()).collect();
        let (lo, hi) = (WnswLevel::from_values(&lo, b), WnswLevel::from_values(&hi, b));
        if min.as_ref().map_or(true, |m| lo.compare(m) == Ordering::Less) {
            min = Some(lo);
        }
        if max.as_ref().map_or(true, |m| hi.compare(m) == Ordering::Greater) {
            max = Some(hi);
        }
    }
    let class = match (&min, &max) {
        (Some(lo), Some(hi)) => {
            let below = lo.compare(&proportional) == Ordering::Less;
            if proportional_acceptable {
                if below {
                    AttitudeClass::Risky
                } else {
                    AttitudeClass::Neutral
                }
            } else if !below {
                AttitudeClass::Pro
            } else if hi.compare(&proportional) == Ordering::Less {
                AttitudeClass::Non
            } else {
                AttitudeClass::Mixed
            }
        }
        _ => AttitudeClass::Infeasible,
    };
    Ok(AttitudeEvidence { notion, proportional_acceptable, proportional, min, max, cells, class })
}
