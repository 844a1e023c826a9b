use std::time::{Duration, Instant};

use crate::model::Limits;
use crate::notions::Notion;

use super::monotone::{monotonicity_report, Edge, InverseDomination, Inversion, Search};
use super::Setting;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanBudget {
    pub max_edges: usize,
    pub time: Option<Duration>,
}

impl Default for ScanBudget {
    fn default() -> Self {
        ScanBudget { max_edges: 1000, time: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParadoxWitness {
    Inversion { setting: Setting, edge: Edge, witness: Inversion },
    InverseDomination { setting: Setting, edge: Edge, witness: InverseDomination },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub notion: Notion,
    /// Re-validated witnesses in generation order.
    pub witnesses: Vec<ParadoxWitness>,
    pub edges_checked: usize,
    /// Edges skipped because an enumeration exceeded its bound.
    pub edges_skipped: usize,
    /// The generator ran dry before the budget did.
    pub complete: bool,
}

/// Runs the inversion and inverse-domination searches over generated edges. Only witnesses that
/// re-validate are kept; an exhausted budget returns what was found so far.
pub fn paradox_scan(
    notion: Notion,
    edges: impl IntoIterator<Item = (Setting, Edge)>,
    budget: ScanBudget,
    limits: &Limits,
) -> ScanReport {
    let start = Instant::now();
    let mut report = ScanReport { notion, witnesses: Vec::new(), edges_checked: 0, edges_skipped: 0, complete: false };
    let mut it = edges.into_iter();
    loop {
        if report.edges_checked + report.edges_skipped >= budget.max_edges || budget.time.is_some_and(|t| start.elapsed() >= t) {
            return report;
        }
        let Some((setting, edge)) = it.next() else {
            report.complete = true;
            return report;
        };
        let Ok(r) = monotonicity_report(notion, &setting, &edge, limits) else {
            report.edges_skipped += 1;
            continue;
        };
        report.edges_checked += 1;
        if let Search::Found(w) = r.inversion {
            if w.validate(notion, &setting, &edge, limits).unwrap_or(false) {
                report.witnesses.push(ParadoxWitness::Inversion { setting: setting.clone(), edge: edge.clone(), witness: w });
            }
        }
        // Prefer the stronger, Pareto-restricted form.
        let domination = match (r.inverse_domination_pareto, r.inverse_domination) {
            (Search::Found(w), _) | (_, Search::Found(w)) => Some(w),
            _ => None,
        };
        if let Some(w) = domination {
            if w.validate(notion, &setting, &edge, limits).unwrap_or(false) {
                report.witnesses.push(ParadoxWitness::InverseDomination { setting, edge, witness: w });
            }
        }
    }
}
