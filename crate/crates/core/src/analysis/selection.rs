use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{i_improves, Entitlements, Limits};
use crate::notions::Notion;

use super::{cmp, Setting, Side};

/// One instance under several entitlement vectors, with declared improvement edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EntitlementFamily {
    pub base: Setting,
    pub vectors: Vec<Entitlements>,
    /// `(p, q, i)`: `vectors[p]` improves on `vectors[q]` for agent `i`.
    pub edges: Vec<(usize, usize, usize)>,
}

impl EntitlementFamily {
    pub fn new(base: Setting, vectors: Vec<Entitlements>, edges: Vec<(usize, usize, usize)>) -> Result<Self> {
        for &(p, q, i) in &edges {
            if p >= vectors.len() || q >= vectors.len() {
                return Err(Error::Structural(format!("edge ({p}, {q}) refers to a missing vector")));
            }
            if !i_improves(&vectors[p], &vectors[q], i)? {
                return Err(Error::Argument(format!(
                    "vector {} does not improve on vector {} for agent {}",
                    p + 1,
                    q + 1,
                    i + 1
                )));
            }
        }
        Ok(EntitlementFamily { base, vectors, edges })
    }
}

/// Choices `(vector, member)` that already violate `edge`; any selection containing them fails.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Nogood {
    pub choices: [(usize, usize); 2],
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionSearchReport {
    pub notion: Notion,
    pub sides: Vec<Side>,
    /// A monotone selection: the chosen member per vector (`None` for empty acceptable sets).
    pub selection: Option<Vec<Option<usize>>>,
    /// When no selection exists, violated edge pairs covering every choice function.
    pub refutation: Vec<Nogood>,
}

impl SelectionSearchReport {
    pub fn exists(&self) -> bool {
        self.selection.is_some()
    }

    /// Enumerates every choice function and confirms each contains a nogood.
    pub fn refutation_is_exhaustive(&self, family: &EntitlementFamily) -> bool {
        if self.selection.is_some() {
            return false;
        }
        if self.refutation.iter().any(|g| !violates(&self.sides, family.edges[g.edge], g.choices[0].1, g.choices[1].1)) {
            return false;
        }
        let vars: Vec<usize> = (0..self.sides.len()).filter(|&v| !self.sides[v].is_empty()).collect();
        let mut pick = vec![0usize; self.sides.len()];
        loop {
            let covered = self.refutation.iter().any(|g| g.choices.iter().all(|&(v, k)| pick[v] == k));
            if !covered {
                return false;
            }
            let mut pos = 0;
            loop {
                if pos == vars.len() {
                    return true;
                }
                let v = vars[pos];
                pick[v] += 1;
                if pick[v] < self.sides[v].members.len() {
                    break;
                }
                pick[v] = 0;
                pos += 1;
            }
        }
    }
}

/// Whether choosing member `x` for `p` and `y` for `q` breaks edge `(p, q, i)`.
fn violates(sides: &[Side], (p, q, i): (usize, usize, usize), x: usize, y: usize) -> bool {
    cmp(&sides[p].members[x].values[i], &sides[q].members[y].values[i]) == Ordering::Less
}

/// Searches all choice functions over the family's acceptable sets for one that never lowers an
/// agent's value along an improvement edge. Edges touching an empty acceptable set impose nothing.
pub fn selection_search(notion: Notion, family: &EntitlementFamily, limits: &Limits) -> Result<SelectionSearchReport> {
    let sides: Vec<Side> =
        family.vectors.iter().map(|b| family.base.acceptable_under(notion, b, limits)).collect::<Result<_>>()?;
    let product = sides.iter().filter(|s| !s.is_empty()).try_fold(1u128, |acc, s| acc.checked_mul(s.members.len() as u128));
    match product {
        Some(p) if p <= limits.selection => {}
        _ => {
            let size = product.map_or("overflow".to_string(), |p| p.to_string());
            return Err(Error::Resource { what: "selection search".into(), size, bound: limits.selection });
        }
    }
    let edges: Vec<(usize, usize, usize)> =
        family.edges.iter().copied().filter(|&(p, q, _)| !sides[p].is_empty() && !sides[q].is_empty()).collect();
    let edge_index = |e: (usize, usize, usize)| family.edges.iter().position(|&f| f == e).expect("filtered edge");

    // Arc consistency: keep a member only while every incident edge has a compatible partner.
    let mut domains: Vec<Vec<usize>> = sides.iter().map(|s| (0..s.members.len()).collect()).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &(p, q, i) in &edges {
            let before = domains[p].len() + domains[q].len();
            let dq = domains[q].clone();
            domains[p].retain(|&x| dq.iter().any(|&y| !violates(&sides, (p, q, i), x, y)));
            let dp = domains[p].clone();
            domains[q].retain(|&y| dp.iter().any(|&x| !violates(&sides, (p, q, i), x, y)));
            changed |= domains[p].len() + domains[q].len() != before;
        }
    }
    let wiped = (0..sides.len()).any(|v| !sides[v].is_empty() && domains[v].is_empty());
    if !wiped {
        let mut order: Vec<usize> = (0..sides.len()).filter(|&v| !sides[v].is_empty()).collect();
        order.sort_by_key(|&v| domains[v].len());
        let mut pick: Vec<Option<usize>> = vec![None; sides.len()];
        let mut sink = Vec::new();
        if dfs(&sides, &edges, &domains, &order, 0, &mut pick, &mut sink) {
            return Ok(SelectionSearchReport { notion, sides, selection: Some(pick), refutation: Vec::new() });
        }
    }
    // No selection: rebuild the argument over the full domains so it covers every choice function.
    let full: Vec<Vec<usize>> = sides.iter().map(|s| (0..s.members.len()).collect()).collect();
    let mut order: Vec<usize> = (0..sides.len()).filter(|&v| !sides[v].is_empty()).collect();
    order.sort_by_key(|&v| full[v].len());
    let mut pick: Vec<Option<usize>> = vec![None; sides.len()];
    let mut found = Vec::new();
    let ok = dfs(&sides, &edges, &full, &order, 0, &mut pick, &mut found);
    debug_assert!(!ok);
    let mut refutation: Vec<Nogood> = Vec::new();
    for (e, x, y) in found {
        let g = Nogood { choices: [(e.0, x), (e.1, y)], edge: edge_index(e) };
        if !refutation.contains(&g) {
            refutation.push(g);
        }
    }
    Ok(SelectionSearchReport { notion, sides, selection: None, refutation })
}

/// Depth-first assignment; records the violated edge at every dead end.
fn dfs(
    sides: &[Side],
    edges: &[(usize, usize, usize)],
    domains: &[Vec<usize>],
    order: &[usize],
    depth: usize,
    pick: &mut Vec<Option<usize>>,
    dead_ends: &mut Vec<((usize, usize, usize), usize, usize)>,
) -> bool {
    if depth == order.len() {
        return true;
    }
    let v = order[depth];
    for &x in &domains[v] {
        pick[v] = Some(x);
        let broken = edges.iter().find(|&&(p, q, i)| {
            (p == v || q == v) && matches!((pick[p], pick[q]), (Some(a), Some(b)) if violates(sides, (p, q, i), a, b))
        });
        match broken {
            Some(&e) => dead_ends.push((e, pick[e.0].unwrap(), pick[e.1].unwrap())),
            None => {
                if dfs(sides, edges, domains, order, depth + 1, pick, dead_ends) {
                    return true;
                }
            }
        }
    }
    pick[v] = None;
    false
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::notions::ShareKind;

    const PROP: Notion = Notion::Share(ShareKind::Prop);

    #[test]
    fn prop_has_no_monotone_selection() {
        let vectors = vec![
            ents(&["0.25", "0.25", "0.25", "0.25"]),
            ents(&["0.24", "0.25", "0.26", "0.25"]),
            ents(&["0.25", "0.24", "0.25", "0.26"]),
        ];
        let family = EntitlementFamily::new(prop_global(), vectors, vec![(0, 1, 0), (0, 2, 1)]).unwrap();
        let r = selection_search(PROP, &family, &Limits::default()).unwrap();
        assert_eq!(r.sides.iter().map(|s| s.members.len()).collect::<Vec<_>>(), vec![2, 1, 1]);
        assert!(!r.exists());
        assert!(r.refutation_is_exhaustive(&family));
        assert_eq!(r.refutation.len(), 2);
    }

    #[test]
    fn wmms_divisible_family_has_no_monotone_selection() {
        let b = |x: &[&str]| ents(x);
        let vectors = vec![
            b(&["0.1", "0.1", "0.4", "0.4"]),
            b(&["0.2", "0.1", "0.3", "0.4"]),
            b(&["0.1", "0.2", "0.3", "0.4"]),
            b(&["0.01", "0.1", "0.49", "0.4"]),
            b(&["0.01", "0.1", "0.4", "0.49"]),
        ];
        let base = Setting::Good(crate::divisible::fixtures::delta_family(&["0.1", "0.1", "0.4", "0.4"]));
        let edges = (0..4).map(|i| (i + 1, 0, i)).collect();
        let family = EntitlementFamily::new(base, vectors, edges).unwrap();
        let r = selection_search(Notion::Share(ShareKind::Wmms), &family, &Limits::default()).unwrap();
        assert!(!r.sides[0].is_empty());
        for side in &r.sides[1..] {
            assert_eq!(side.members.len(), 1);
        }
        assert!(!r.exists());
        assert!(r.refutation_is_exhaustive(&family));
    }

    #[test]
    fn consistent_family_has_a_selection() {
        let s = prop_incentive();
        let family = EntitlementFamily::new(s, vec![ents(&["0.2", "0.4", "0.4"]), ents(&["0.1", "0.5", "0.4"])], vec![(0, 1, 0)]).unwrap();
        let r = selection_search(PROP, &family, &Limits::default()).unwrap();
        assert!(r.exists());
        assert!(!r.refutation_is_exhaustive(&family));
    }

    #[test]
    fn bad_edges_rejected() {
        let v = vec![ents(&["1/2", "1/2"]), ents(&["1/3", "2/3"])];
        assert!(EntitlementFamily::new(prop_incentive(), v, vec![(1, 0, 0)]).is_err());
    }

    #[test]
    fn selection_bound_is_enforced() {
        let vectors = vec![ents(&["0.25", "0.25", "0.25", "0.25"])];
        let family = EntitlementFamily::new(prop_global(), vectors, vec![]).unwrap();
        let tight = Limits { selection: 1, ..Limits::default() };
        assert!(matches!(selection_search(PROP, &family, &tight), Err(Error::Resource { .. })));
    }
}
