//! Acceptability of divisible allocations and enumeration of acceptable cells.
//!
//! The grid holds every breakpoint, every entitlement, 0 and 1. An atom is a grid
//! point or the open interval between two neighbours, and a cell assigns one atom
//! to each agent. Every valuation is constant (steps) or affine (piecewise linear)
//! on every atom, so each notion is decided per cell exactly.

use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactlp::{solve, Bound, LinearProgram, LpOutcome, Relation, Sense};
use crate::model::Limits;
use crate::notions::Notion;
use crate::rational::{to_f64, Rational};

use super::mwnsw::{mwnsw_check, mwnsw_cells};
use super::point::{pick_on_simplex, Interval, Point};
use super::shares::div_share;
use super::valuation::{better_exact, div_value, need_exact, DivValuation, DivValue};
use super::{DivAllocation, DivInstance, Regime, TOLERANCE};

/// A region of allocations on which the notion's verdict is constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Per-agent atom; empty for power valuations.
    pub atoms: Vec<Interval>,
    /// An acceptable allocation inside the cell.
    pub representative: DivAllocation,
    /// Per-agent fraction range over the acceptable part of the cell (closure).
    pub x_range: Vec<(DivValue, DivValue)>,
    /// Per-agent own-value range over the acceptable part of the cell (closure).
    pub values: Vec<(DivValue, DivValue)>,
}

impl Cell {
    pub fn value_min(&self, i: usize) -> &DivValue {
        &self.values[i].0
    }

    pub fn value_max(&self, i: usize) -> &DivValue {
        &self.values[i].1
    }
}

/// `a + s·x` on one atom.
#[derive(Debug, Clone)]
pub(crate) struct Affine {
    pub a: Rational,
    pub s: Rational,
}

impl Affine {
    pub fn at(&self, x: &Rational) -> Rational {
        &self.a + &self.s * x
    }
}

/// Where the fractions an agent strictly prefers begin.
#[derive(Debug, Clone)]
enum Better {
    Nothing,
    /// Anything larger than the agent's own fraction.
    AtSelf,
    Start(Point, bool),
}

pub(crate) struct Grid<'a> {
    pub inst: &'a DivInstance,
    pub atoms: Vec<Interval>,
    /// `forms[i][k]`: agent `i`'s valuation on atom `k`.
    pub forms: Vec<Vec<Affine>>,
}

fn atom_anchor(atom: &Interval) -> Point {
    atom.pick().expect("atoms are nonempty")
}

impl<'a> Grid<'a> {
    pub fn new(inst: &'a DivInstance) -> Result<Self> {
        if inst.regime()? == Regime::Power {
            return Err(Error::Argument("power valuations have no breakpoint grid".into()));
        }
        let mut pts = vec![Point::zero(), Point::one()];
        pts.extend(inst.entitlements.as_slice().iter().cloned().map(Point::real));
        for v in &inst.valuations {
            match v {
                DivValuation::Step(s) => pts.extend(s.breakpoints()),
                DivValuation::PiecewiseLinear(p) => pts.extend(p.points().iter().map(|(x, _)| Point::real(x.clone()))),
                DivValuation::Power(_) => unreachable!(),
            }
        }
        pts.sort();
        pts.dedup();
        let mut atoms = Vec::with_capacity(2 * pts.len());
        for w in pts.windows(2) {
            atoms.push(Interval::point(w[0].clone()));
            atoms.push(Interval::open(w[0].clone(), w[1].clone()));
        }
        atoms.push(Interval::point(Point::one()));
        let forms = inst
            .valuations
            .iter()
            .map(|v| atoms.iter().map(|atom| affine_on(v, atom)).collect())
            .collect();
        Ok(Grid { inst, atoms, forms })
    }

    fn n(&self) -> usize {
        self.inst.n()
    }

    /// Agent `i`'s value on atom `k` at its anchor point.
    pub fn value(&self, i: usize, k: usize) -> Rational {
        let f = &self.forms[i][k];
        if f.s.is_zero() {
            f.a.clone()
        } else {
            f.at(&atom_anchor(&self.atoms[k]).g)
        }
    }

    /// Largest value agent `i` reaches on atom `k` (its closure, for affine pieces).
    fn value_sup(&self, i: usize, k: usize) -> Rational {
        let f = &self.forms[i][k];
        if f.s.is_zero() {
            f.a.clone()
        } else {
            f.at(&self.atoms[k].hi.g)
        }
    }

    fn increasing(&self, i: usize, k: usize) -> bool {
        self.forms[i][k].s.is_positive() && !self.atoms[k].is_point()
    }

    fn better(&self, i: usize, k: usize) -> Better {
        if self.increasing(i, k) {
            return Better::AtSelf;
        }
        match better_exact(&self.inst.valuations[i], &self.value(i, k)) {
            None => Better::Nothing,
            Some((p, closed)) => Better::Start(p, closed),
        }
    }

    /// Whether the atom consists of the cheapest fractions at their value level.
    fn level_start(&self, i: usize, k: usize) -> bool {
        if self.increasing(i, k) {
            return true;
        }
        let atom = &self.atoms[k];
        atom.is_point() && need_exact(&self.inst.valuations[i], &self.value(i, k)) == Some((atom.lo.clone(), true))
    }

    /// Visits every choice of atoms (in lexicographic order) whose boxes meet the simplex.
    pub fn for_each_cell(
        &self,
        allowed: &[Vec<usize>],
        limits: &Limits,
        visit: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        let n = self.n();
        let hull = |ks: &[usize]| -> Option<Interval> {
            let first = ks.first()?;
            let last = ks.last()?;
            let (a, b) = (&self.atoms[*first], &self.atoms[*last]);
            Some(Interval { lo: a.lo.clone(), lo_closed: a.lo_closed, hi: b.hi.clone(), hi_closed: b.hi_closed })
        };
        let mut suffix = vec![Interval::point(Point::zero()); n + 1];
        for i in (0..n).rev() {
            match hull(&allowed[i]) {
                Some(h) => suffix[i] = h.plus(&suffix[i + 1]),
                None => return Ok(()),
            }
        }
        let mut nodes: u128 = 0;
        let mut choice = Vec::with_capacity(n);
        self.dfs(allowed, &suffix, Interval::point(Point::zero()), &mut choice, &mut nodes, limits, visit)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        allowed: &[Vec<usize>],
        suffix: &[Interval],
        partial: Interval,
        choice: &mut Vec<usize>,
        nodes: &mut u128,
        limits: &Limits,
        visit: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        let i = choice.len();
        if i == self.n() {
            return visit(choice);
        }
        for &k in &allowed[i] {
            *nodes += 1;
            if *nodes > limits.enumeration {
                return Err(Error::resource("cell enumeration", format!("more than {} nodes over {} atoms per agent", limits.enumeration, self.atoms.len()), limits.enumeration));
            }
            let next = partial.plus(&self.atoms[k]);
            if !next.plus(&suffix[i + 1]).contains(&Point::one()) {
                continue;
            }
            choice.push(k);
            self.dfs(allowed, suffix, next, choice, nodes, limits, visit)?;
            choice.pop();
        }
        Ok(())
    }

    pub fn all_atoms(&self) -> Vec<Vec<usize>> {
        vec![(0..self.atoms.len()).collect(); self.n()]
    }

    fn boxes(&self, choice: &[usize]) -> Vec<Interval> {
        choice.iter().map(|&k| self.atoms[k].clone()).collect()
    }

    /// A cell whose acceptable part is the whole (possibly tightened) box.
    pub fn box_cell(&self, boxes: Vec<Interval>, choice: &[usize]) -> Option<Cell> {
        let x = pick_on_simplex(&boxes)?;
        let exact = |p: &Point| if p.is_real() { DivValue::Exact(p.g.clone()) } else { DivValue::Approx(p.approx()) };
        let x_range = boxes.iter().map(|b| (exact(&b.lo), exact(&b.hi))).collect();
        let values = (0..self.n())
            .map(|i| {
                let f = &self.forms[i][choice[i]];
                if f.s.is_zero() {
                    (DivValue::Exact(f.a.clone()), DivValue::Exact(f.a.clone()))
                } else {
                    (DivValue::Exact(f.at(&boxes[i].lo.g)), DivValue::Exact(f.at(&boxes[i].hi.g)))
                }
            })
            .collect();
        Some(Cell { atoms: boxes, representative: DivAllocation { x }, x_range, values })
    }
}

fn affine_on(v: &DivValuation, atom: &Interval) -> Affine {
    let anchor = atom_anchor(atom);
    match v {
        DivValuation::Step(s) => Affine { a: s.value(&anchor).expect("inside [0, 1]"), s: Rational::zero() },
        DivValuation::PiecewiseLinear(p) => {
            if atom.is_point() {
                Affine { a: p.value(&anchor.g), s: Rational::zero() }
            } else {
                let (a, s) = p.affine(p.piece(&anchor.g));
                Affine { a, s }
            }
        }
        DivValuation::Power(_) => unreachable!(),
    }
}

/// Share thresholds and the calibrated-envy matrix, all exact.
struct Prepared {
    shares: Vec<Rational>,
    aps: Vec<Vec<Rational>>,
}

fn prepare(notion: Notion, inst: &DivInstance) -> Result<Prepared> {
    let n = inst.n();
    let exact = |v: DivValue| v.exact().cloned().ok_or_else(|| Error::Numeric("expected an exact value".into()));
    let shares = match notion {
        Notion::Share(kind) => (0..n).map(|i| exact(div_share(kind, inst, i)?)).collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    let aps = if notion == Notion::Cef { exact_aps_matrix(inst)? } else { Vec::new() };
    Ok(Prepared { shares, aps })
}

/// `aps[i][j] = v_i(b_j)`: the APS of agent `i` at entitlement `b_j`.
fn exact_aps_matrix(inst: &DivInstance) -> Result<Vec<Vec<Rational>>> {
    let b = inst.entitlements.as_slice();
    inst.valuations
        .iter()
        .map(|v| {
            b.iter()
                .map(|bj| {
                    div_value(v, &Point::real(bj.clone()))?
                        .exact()
                        .cloned()
                        .ok_or_else(|| Error::Numeric("expected an exact value".into()))
                })
                .collect()
        })
        .collect()
}

fn calibrated_ok(x: &Rational, s: &Rational, y: &Rational, t: &Rational) -> bool {
    if s.is_zero() {
        true
    } else if t.is_zero() {
        y.is_zero()
    } else {
        x * t >= y * s
    }
}

/// Acceptable cells of `notion`, in lexicographic order of their atoms.
pub fn div_acceptable_cells(notion: Notion, instance: &DivInstance, limits: &Limits) -> Result<Vec<Cell>> {
    match instance.regime()? {
        Regime::Power => power_cells(notion, instance),
        _ if notion == Notion::Mwnsw => Ok(mwnsw_cells(instance, limits)?.cells),
        regime => {
            let grid = Grid::new(instance)?;
            let prep = prepare(notion, instance)?;
            let mut allowed = grid.all_atoms();
            if let Notion::Share(_) = notion {
                for (i, ks) in allowed.iter_mut().enumerate() {
                    ks.retain(|&k| grid.value_sup(i, k) >= prep.shares[i]);
                }
            }
            let mut out = Vec::new();
            grid.for_each_cell(&allowed, limits, &mut |choice| {
                let cell = match regime {
                    Regime::Step => step_cell(&grid, &prep, notion, choice),
                    _ => linear_cell(&grid, &prep, notion, choice)?,
                };
                out.extend(cell);
                Ok(())
            })?;
            Ok(out)
        }
    }
}

fn step_cell(grid: &Grid<'_>, prep: &Prepared, notion: Notion, choice: &[usize]) -> Option<Cell> {
    let n = grid.n();
    let b = grid.inst.entitlements.as_slice();
    let v = |i: usize, j: usize| grid.value(i, choice[j]);
    let pairs_ok = |pred: &dyn Fn(usize, usize) -> bool| (0..n).all(|i| (0..n).all(|j| i == j || pred(i, j)));
    let mut boxes = grid.boxes(choice);
    let ok = match notion {
        Notion::Share(_) => (0..n).all(|i| v(i, i) >= prep.shares[i]),
        Notion::Ef => pairs_ok(&|i, j| v(i, i) >= v(i, j)),
        Notion::Wef => pairs_ok(&|i, j| v(i, i) * &b[j] >= v(i, j) * &b[i]),
        Notion::Nde => pairs_ok(&|i, j| b[i] <= b[j] || v(i, i) >= v(i, j)),
        Notion::Cef => pairs_ok(&|i, j| calibrated_ok(&v(i, i), &prep.aps[i][i], &v(i, j), &prep.aps[i][j])),
        Notion::Ce | Notion::Pce => {
            let better: Vec<Better> = (0..n).map(|i| grid.better(i, choice[i])).collect();
            if better.iter().all(|x| matches!(x, Better::Nothing)) {
                true
            } else if notion == Notion::Pce && !(0..n).all(|i| grid.level_start(i, choice[i])) {
                false
            } else {
                // With z = 1/P: x_i <= b_i z for all i, and b_i z below each better start.
                let mut cap: Option<(Point, bool)> = None;
                for (i, bt) in better.iter().enumerate() {
                    if let Better::Start(y, closed) = bt {
                        let z = y.div(&b[i]);
                        cap = match cap {
                            None => Some((z, *closed)),
                            Some((c, _)) if z < c => Some((z, *closed)),
                            Some((c, s)) if z == c => Some((c, s || *closed)),
                            keep => keep,
                        };
                    }
                }
                let (z, strict) = cap.expect("some agent has a better start");
                for (j, bx) in boxes.iter_mut().enumerate() {
                    *bx = bx.cap_above(&z.scale(&b[j]), !strict);
                }
                true
            }
        }
        Notion::Mwnsw => unreachable!("handled separately"),
    };
    if ok {
        grid.box_cell(boxes, choice)
    } else {
        None
    }
}

/// Variables `x_0..x_{n-1}`, then `z = 1/P` for equilibria, then the strictness slack.
fn linear_program(
    grid: &Grid<'_>,
    prep: &Prepared,
    notion: Notion,
    choice: &[usize],
    closure: bool,
) -> Option<(LinearProgram, usize)> {
    let n = grid.n();
    let b = grid.inst.entitlements.as_slice();
    let equilibrium = matches!(notion, Notion::Ce | Notion::Pce);
    let z = n;
    let eps = n + usize::from(equilibrium);
    let mut lp = LinearProgram::new(eps + 1, Sense::Maximize);
    lp.objective[eps] = Rational::one();
    lp.bounds[eps] = if closure {
        Bound { lower: Some(Rational::zero()), upper: Some(Rational::zero()) }
    } else {
        Bound { lower: None, upper: Some(Rational::one()) }
    };
    let one = Rational::one;
    for (i, &k) in choice.iter().enumerate() {
        let atom = &grid.atoms[k];
        lp.bounds[i] = Bound { lower: Some(atom.lo.g.clone()), upper: Some(atom.hi.g.clone()) };
        if !atom.lo_closed {
            lp.add_sparse(&[(i, one()), (eps, -one())], Relation::Ge, atom.lo.g.clone());
        }
        if !atom.hi_closed {
            lp.add_sparse(&[(i, one()), (eps, one())], Relation::Le, atom.hi.g.clone());
        }
    }
    let all: Vec<(usize, Rational)> = (0..n).map(|i| (i, one())).collect();
    lp.add_sparse(&all, Relation::Eq, one());
    let f = |i: usize, j: usize| &grid.forms[i][choice[j]];
    let pairs = || (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)));
    match notion {
        Notion::Share(_) => {
            for i in 0..n {
                let fi = f(i, i);
                lp.add_sparse(&[(i, fi.s.clone())], Relation::Ge, &prep.shares[i] - &fi.a);
            }
        }
        Notion::Ef | Notion::Nde => {
            for (i, j) in pairs() {
                if notion == Notion::Nde && b[i] <= b[j] {
                    continue;
                }
                let (fi, fj) = (f(i, i), f(i, j));
                lp.add_sparse(&[(i, fi.s.clone()), (j, -fj.s.clone())], Relation::Ge, &fj.a - &fi.a);
            }
        }
        Notion::Wef => {
            for (i, j) in pairs() {
                let (fi, fj) = (f(i, i), f(i, j));
                lp.add_sparse(
                    &[(i, &b[j] * &fi.s), (j, -(&b[i] * &fj.s))],
                    Relation::Ge,
                    &b[i] * &fj.a - &b[j] * &fi.a,
                );
            }
        }
        Notion::Cef => {
            for (i, j) in pairs() {
                let (sii, sij) = (&prep.aps[i][i], &prep.aps[i][j]);
                let (fi, fj) = (f(i, i), f(i, j));
                if sii.is_zero() {
                    continue;
                }
                if sij.is_zero() {
                    lp.add_sparse(&[(j, fj.s.clone())], Relation::Le, -fj.a.clone());
                } else {
                    lp.add_sparse(&[(i, sij * &fi.s), (j, -(sii * &fj.s))], Relation::Ge, sii * &fj.a - sij * &fi.a);
                }
            }
        }
        Notion::Ce | Notion::Pce => {
            let better: Vec<Better> = (0..n).map(|i| grid.better(i, choice[i])).collect();
            if !better.iter().all(|x| matches!(x, Better::Nothing)) {
                if notion == Notion::Pce && !(0..n).all(|i| grid.level_start(i, choice[i])) {
                    return None;
                }
                for (i, bt) in better.iter().enumerate() {
                    lp.add_sparse(&[(i, one()), (z, -b[i].clone())], Relation::Le, Rational::zero());
                    match bt {
                        Better::Nothing => {}
                        Better::AtSelf => {
                            lp.add_sparse(&[(i, one()), (z, -b[i].clone())], Relation::Ge, Rational::zero());
                        }
                        Better::Start(y, closed) => {
                            let mut row = vec![(z, b[i].clone())];
                            if *closed {
                                row.push((eps, one()));
                            }
                            lp.add_sparse(&row, Relation::Le, y.g.clone());
                        }
                    }
                }
            }
        }
        Notion::Mwnsw => unreachable!("handled separately"),
    }
    Some((lp, eps))
}

fn linear_cell(grid: &Grid<'_>, prep: &Prepared, notion: Notion, choice: &[usize]) -> Result<Option<Cell>> {
    let n = grid.n();
    let boxes = grid.boxes(choice);
    if pick_on_simplex(&boxes).is_none() {
        return Ok(None);
    }
    let Some((lp, _)) = linear_program(grid, prep, notion, choice, false) else { return Ok(None) };
    let point = match solve(&lp)? {
        LpOutcome::Optimal { value, point } if value.is_positive() => point,
        LpOutcome::Optimal { .. } | LpOutcome::Infeasible => return Ok(None),
        LpOutcome::Unbounded => return Err(Error::Numeric("cell LP with bounded slack reported unbounded".into())),
    };
    let x: Vec<Point> = point[..n].iter().cloned().map(Point::real).collect();
    let (closed_lp, _) = linear_program(grid, prep, notion, choice, true).expect("same cell");
    let mut x_range = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let mut ends = Vec::with_capacity(2);
        for sense in [Sense::Minimize, Sense::Maximize] {
            let mut lp = closed_lp.clone();
            lp.sense = sense;
            lp.objective = vec![Rational::zero(); lp.vars()];
            lp.objective[i] = Rational::one();
            match solve(&lp)? {
                LpOutcome::Optimal { value, .. } => ends.push(value),
                _ => return Err(Error::Numeric("closure of a nonempty cell is empty or unbounded".into())),
            }
        }
        let f = &grid.forms[i][choice[i]];
        values.push((DivValue::Exact(f.at(&ends[0])), DivValue::Exact(f.at(&ends[1]))));
        x_range.push((DivValue::Exact(ends[0].clone()), DivValue::Exact(ends[1].clone())));
    }
    Ok(Some(Cell { atoms: boxes, representative: DivAllocation { x }, x_range, values }))
}

/// Two power valuations: every notion accepts an interval of agent 1's fraction.
fn power_cells(notion: Notion, inst: &DivInstance) -> Result<Vec<Cell>> {
    let b: Vec<f64> = inst.entitlements.as_slice().iter().map(to_f64).collect();
    let p: Vec<f64> = inst
        .valuations
        .iter()
        .map(|v| match v {
            DivValuation::Power(e) => to_f64(e),
            _ => unreachable!(),
        })
        .collect();
    let v = |i: usize, x: f64| x.max(0.0).powf(p[i]);
    let (lo, hi) = match notion {
        Notion::Ce | Notion::Pce => (b[0], b[0]),
        Notion::Mwnsw => {
            let x = b[0] * p[0] / (b[0] * p[0] + b[1] * p[1]);
            (x, x)
        }
        _ => {
            // f1 grows with x1 (agent 1's condition), f2 shrinks (agent 2's).
            let (f1, f2): (Box<dyn Fn(f64) -> f64>, Box<dyn Fn(f64) -> f64>) = match notion {
                Notion::Share(kind) => {
                    let s1 = div_share(kind, inst, 0)?.approx();
                    let s2 = div_share(kind, inst, 1)?.approx();
                    (Box::new(move |x| v(0, x) - s1), Box::new(move |x| v(1, 1.0 - x) - s2))
                }
                Notion::Ef => (Box::new(move |x| v(0, x) - v(0, 1.0 - x)), Box::new(move |x| v(1, 1.0 - x) - v(1, x))),
                Notion::Wef => {
                    let (b1, b2) = (b[0], b[1]);
                    (
                        Box::new(move |x| b2 * v(0, x) - b1 * v(0, 1.0 - x)),
                        Box::new(move |x| b1 * v(1, 1.0 - x) - b2 * v(1, x)),
                    )
                }
                Notion::Nde => {
                    let (b1, b2) = (b[0], b[1]);
                    (
                        Box::new(move |x| if b1 > b2 { v(0, x) - v(0, 1.0 - x) } else { 1.0 }),
                        Box::new(move |x| if b2 > b1 { v(1, 1.0 - x) - v(1, x) } else { 1.0 }),
                    )
                }
                Notion::Cef => {
                    let a = [[v(0, b[0]), v(0, b[1])], [v(1, b[0]), v(1, b[1])]];
                    (
                        Box::new(move |x| a[0][1] * v(0, x) - a[0][0] * v(0, 1.0 - x)),
                        Box::new(move |x| a[1][0] * v(1, 1.0 - x) - a[1][1] * v(1, x)),
                    )
                }
                _ => unreachable!(),
            };
            let lo = if f1(0.0) >= -TOLERANCE { 0.0 } else if f1(1.0) < -TOLERANCE { 2.0 } else { bisect(|x| f1(x) >= 0.0, false) };
            let hi = if f2(1.0) >= -TOLERANCE { 1.0 } else if f2(0.0) < -TOLERANCE { -1.0 } else { bisect(|x| f2(x) >= 0.0, true) };
            (lo, hi)
        }
    };
    if lo > hi + TOLERANCE {
        return Ok(Vec::new());
    }
    let hi = hi.max(lo);
    let mid = (lo + hi) / 2.0;
    let x1 = Rational::from_float(mid).ok_or_else(|| Error::Numeric("non-finite fraction".into()))?;
    let representative = DivAllocation { x: vec![Point::real(x1.clone()), Point::real(Rational::one() - x1)] };
    let x_range = vec![(DivValue::Approx(lo), DivValue::Approx(hi)), (DivValue::Approx(1.0 - hi), DivValue::Approx(1.0 - lo))];
    let values = vec![
        (DivValue::Approx(v(0, lo)), DivValue::Approx(v(0, hi))),
        (DivValue::Approx(v(1, 1.0 - hi)), DivValue::Approx(v(1, 1.0 - lo))),
    ];
    Ok(vec![Cell { atoms: Vec::new(), representative, x_range, values }])
}

/// Boundary of a monotone predicate on `[0, 1]`: the least true point, or the
/// largest true point when `true_below`.
fn bisect(pred: impl Fn(f64) -> bool, true_below: bool) -> f64 {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let m = (a + b) / 2.0;
        if pred(m) != true_below {
            b = m;
        } else {
            a = m;
        }
    }
    if true_below {
        a
    } else {
        b
    }
}

/// Whether `notion` accepts the allocation, decided directly at its fractions.
pub fn div_check(notion: Notion, instance: &DivInstance, a: &DivAllocation) -> Result<bool> {
    instance.validate_allocation(a)?;
    let n = instance.n();
    let b = instance.entitlements.as_slice();
    if instance.regime()? == Regime::Power {
        return power_check(notion, instance, a);
    }
    let value = |i: usize, x: &Point| -> Result<Rational> {
        Ok(div_value(&instance.valuations[i], x)?.exact().expect("exact valuation").clone())
    };
    let mut vm = vec![vec![Rational::zero(); n]; n];
    for (i, row) in vm.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = value(i, &a.x[j])?;
        }
    }
    let pairs_ok = |pred: &dyn Fn(usize, usize) -> bool| (0..n).all(|i| (0..n).all(|j| i == j || pred(i, j)));
    Ok(match notion {
        Notion::Share(kind) => {
            let mut ok = true;
            for i in 0..n {
                let s = div_share(kind, instance, i)?;
                ok &= vm[i][i] >= *s.exact().expect("exact valuation");
            }
            ok
        }
        Notion::Ef => pairs_ok(&|i, j| vm[i][i] >= vm[i][j]),
        Notion::Wef => pairs_ok(&|i, j| &vm[i][i] * &b[j] >= &vm[i][j] * &b[i]),
        Notion::Nde => pairs_ok(&|i, j| b[i] <= b[j] || vm[i][i] >= vm[i][j]),
        Notion::Cef => {
            let aps = exact_aps_matrix(instance)?;
            pairs_ok(&|i, j| calibrated_ok(&vm[i][i], &aps[i][i], &vm[i][j], &aps[i][j]))
        }
        Notion::Ce | Notion::Pce => {
            let starts: Vec<Option<(Point, bool)>> =
                (0..n).map(|i| better_exact(&instance.valuations[i], &vm[i][i])).collect();
            if starts.iter().all(Option::is_none) {
                true
            } else {
                // Need max_i x_i/b_i <= z and z below every better start over b_i.
                let floor = (0..n).map(|i| a.x[i].div(&b[i])).max().expect("agents");
                let mut ok = true;
                for (i, st) in starts.iter().enumerate() {
                    if let Some((y, closed)) = st {
                        let cap = y.div(&b[i]);
                        ok &= if *closed { floor < cap } else { floor <= cap };
                    }
                }
                if ok && notion == Notion::Pce {
                    ok = (0..n).all(|i| need_exact(&instance.valuations[i], &vm[i][i]) == Some((a.x[i].clone(), true)));
                }
                ok
            }
        }
        Notion::Mwnsw => mwnsw_check(instance, a)?,
    })
}

fn power_check(notion: Notion, inst: &DivInstance, a: &DivAllocation) -> Result<bool> {
    let x: Vec<f64> = a.x.iter().map(Point::approx).collect();
    let n = inst.n();
    let b: Vec<f64> = inst.entitlements.as_slice().iter().map(to_f64).collect();
    let v = |i: usize, y: f64| -> Result<f64> { Ok(div_value(&inst.valuations[i], &Point::real(Rational::from_float(y).expect("finite")))?.approx()) };
    let mut vm = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            vm[i][j] = v(i, x[j])?;
        }
    }
    let ge = |l: f64, r: f64| l >= r - TOLERANCE;
    let pairs_ok = |pred: &dyn Fn(usize, usize) -> bool| (0..n).all(|i| (0..n).all(|j| i == j || pred(i, j)));
    Ok(match notion {
        Notion::Share(kind) => {
            let mut ok = true;
            for i in 0..n {
                ok &= ge(vm[i][i], div_share(kind, inst, i)?.approx());
            }
            ok
        }
        Notion::Ef => pairs_ok(&|i, j| ge(vm[i][i], vm[i][j])),
        Notion::Wef => pairs_ok(&|i, j| ge(vm[i][i] * b[j], vm[i][j] * b[i])),
        Notion::Nde => pairs_ok(&|i, j| b[i] <= b[j] || ge(vm[i][i], vm[i][j])),
        Notion::Cef => {
            let mut aps = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    aps[i][j] = v(i, b[j])?;
                }
            }
            pairs_ok(&|i, j| ge(vm[i][i] * aps[i][j], vm[i][j] * aps[i][i]))
        }
        // Strictly increasing valuations: only the proportional allocation clears.
        Notion::Ce | Notion::Pce => (0..n).all(|i| (x[i] - b[i]).abs() <= TOLERANCE),
        Notion::Mwnsw => mwnsw_check(inst, a)?,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::notions::ShareKind;
    use crate::rational::int;
    use super::super::mwnsw::{mwnsw_accepts, mwnsw_cells};
    use proptest::prelude::*;

    fn alloc(xs: &[&str]) -> DivAllocation {
        DivAllocation::new(xs.iter().map(|s| pt(s)).collect()).unwrap()
    }

    #[test]
    fn wef_values_for_agent_one() {
        let limits = Limits::default();
        let good = wef_instance(&["0.3", "0.2", "0.5"]);
        assert!(div_check(Notion::Wef, &good, &alloc(&["0.3", "0.2", "0.5"])).unwrap());
        let cells = div_acceptable_cells(Notion::Wef, &good, &limits).unwrap();
        assert!(!cells.is_empty());
        for c in &cells {
            assert_eq!(c.values[0].0, DivValue::Exact(int(5)));
            assert!(div_check(Notion::Wef, &good, &c.representative).unwrap());
        }
        let worse = wef_instance(&["0.4", "0.1", "0.5"]);
        assert!(div_check(Notion::Wef, &worse, &alloc(&["0.25", "0.2", "0.55"])).unwrap());
        let cells = div_acceptable_cells(Notion::Wef, &worse, &limits).unwrap();
        assert!(!cells.is_empty());
        for c in &cells {
            assert_eq!(c.values[0].0, DivValue::Exact(int(4)));
        }
    }

    #[test]
    fn proportional_point_is_ce_and_aps() {
        for b in [["0.3", "0.2", "0.5"], ["0.4", "0.1", "0.5"]] {
            let inst = wef_instance(&b);
            let prop = inst.proportional();
            assert!(div_check(Notion::Ce, &inst, &prop).unwrap());
            assert!(div_check(Notion::Share(ShareKind::Aps), &inst, &prop).unwrap());
        }
        let inst = incentive_instance(&["1/2", "1/4", "1/4"]);
        assert!(div_check(Notion::Ce, &inst, &inst.proportional()).unwrap());
    }

    #[test]
    fn wmms_cell_on_incentive_instance() {
        let inst = incentive_instance(&["1/2", "1/4", "1/4"]);
        let a = alloc(&["5/8", "1/4", "1/8"]);
        assert!(div_check(Notion::Share(ShareKind::Wmms), &inst, &a).unwrap());
        let cells = div_acceptable_cells(Notion::Share(ShareKind::Wmms), &inst, &Limits::default()).unwrap();
        let hit = cells.iter().find(|c| c.atoms.iter().zip(&a.x).all(|(atom, x)| atom.contains(x))).expect("covered");
        assert_eq!(hit.values[0].1, DivValue::Exact(int(2)));
        assert!(cells.iter().any(|c| c.values[0].1 == DivValue::Exact(int(2))));
    }

    #[test]
    fn linear_agents_envy_check() {
        let inst = DivInstance::new(
            vec![linear(), pl(&[("0", "0"), ("1/4", "1/2"), ("1/2", "1/2"), ("1", "1")])],
            ents(&["1/2", "1/2"]),
        )
        .unwrap();
        assert!(div_check(Notion::Ef, &inst, &alloc(&["1/2", "1/2"])).unwrap());
        assert!(!div_check(Notion::Ef, &inst, &alloc(&["3/4", "1/4"])).unwrap());
        let cells = div_acceptable_cells(Notion::Ef, &inst, &Limits::default()).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].representative, alloc(&["1/2", "1/2"]));
        assert_eq!(cells[0].x_range[0], (DivValue::Exact(r("1/2")), DivValue::Exact(r("1/2"))));
    }

    #[test]
    fn prop_unique_on_convex_concave_instance() {
        let v = pl(&[("0", "0"), ("1/3", "1/4"), ("2/3", "3/4"), ("3/4", "1"), ("1", "1")]);
        let inst = DivInstance::new(vec![v.clone(), v], ents(&["1/4", "3/4"])).unwrap();
        assert!(!div_check(Notion::Share(ShareKind::Prop), &inst, &inst.proportional()).unwrap());
        let cells = div_acceptable_cells(Notion::Share(ShareKind::Prop), &inst, &Limits::default()).unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].representative, alloc(&["1/3", "2/3"]));
    }

    #[test]
    fn power_instances() {
        let inst = DivInstance::new(
            vec![DivValuation::power(int(1)).unwrap(), DivValuation::power(r("1/2")).unwrap()],
            ents(&["1/3", "2/3"]),
        )
        .unwrap();
        assert!(div_acceptable_cells(Notion::Wef, &inst, &Limits::default()).unwrap().is_empty());
        assert!(div_acceptable_cells(Notion::Share(ShareKind::Wmms), &inst, &Limits::default()).unwrap().is_empty());
        let root = DivValuation::power(r("1/2")).unwrap();
        let inst = DivInstance::new(vec![root.clone(), root], ents(&["1/3", "2/3"])).unwrap();
        let cells = div_acceptable_cells(Notion::Wef, &inst, &Limits::default()).unwrap();
        assert_eq!(cells.len(), 1);
        assert!((cells[0].x_range[0].0.approx() - 0.2).abs() < 1e-9);
        assert!((cells[0].x_range[0].1.approx() - 0.2).abs() < 1e-9);
        assert!(div_check(Notion::Ce, &inst, &inst.proportional()).unwrap());
    }

    fn arb_step() -> impl Strategy<Value = DivValuation> {
        proptest::collection::btree_map(1i64..8, 1i64..4, 1..4).prop_flat_map(|m| {
            let steps: Vec<(i64, i64)> = m.into_iter().collect();
            proptest::collection::vec(any::<bool>(), steps.len()).prop_map(move |closed| {
                let mut segs = Vec::new();
                let mut lo = (pt("0"), true);
                let mut value = Rational::zero();
                let mut acc = Rational::zero();
                for ((t, inc), c) in steps.iter().zip(&closed) {
                    let p = Point::real(Rational::new((*t).into(), 8.into()));
                    segs.push(super::super::Segment {
                        span: Interval { lo: lo.0.clone(), lo_closed: lo.1, hi: p.clone(), hi_closed: !c },
                        value: value.clone(),
                    });
                    acc += int(*inc);
                    value = acc.clone();
                    lo = (p, *c);
                }
                segs.push(super::super::Segment {
                    span: Interval { lo: lo.0, lo_closed: lo.1, hi: pt("1"), hi_closed: true },
                    value,
                });
                DivValuation::Step(super::super::StepValuation::new(segs).unwrap())
            })
        })
    }

    fn arb_ents() -> impl Strategy<Value = crate::model::Entitlements> {
        proptest::collection::vec(1i64..5, 2..4).prop_map(|w| {
            let t: i64 = w.iter().sum();
            crate::model::Entitlements::new(w.iter().map(|x| Rational::new((*x).into(), t.into())).collect()).unwrap()
        })
    }

    /// Entitlements in eighths, so the sampling grid stays small.
    fn arb_eighths() -> impl Strategy<Value = crate::model::Entitlements> {
        prop_oneof![(1i64..8).prop_map(|a| vec![a, 8 - a]), (1i64..7, 1i64..7).prop_filter("sum", |(a, c)| a + c < 8).prop_map(|(a, c)| vec![a, c, 8 - a - c])]
            .prop_map(|w| crate::model::Entitlements::new(w.iter().map(|x| Rational::new((*x).into(), 8.into())).collect()).unwrap())
    }

    fn grid_points(n: usize, den: i64) -> Vec<DivAllocation> {
        let mut out = Vec::new();
        let mut cur = vec![0i64; n];
        fn rec(k: usize, left: i64, den: i64, cur: &mut Vec<i64>, out: &mut Vec<DivAllocation>) {
            if k + 1 == cur.len() {
                cur[k] = left;
                out.push(DivAllocation { x: cur.iter().map(|&c| Point::real(Rational::new(c.into(), den.into()))).collect() });
                return;
            }
            for c in 0..=left {
                cur[k] = c;
                rec(k + 1, left - c, den, cur, out);
            }
        }
        rec(0, den, den, &mut cur, &mut out);
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn shared_valuation_admits_wmms(v in arb_step(), b in arb_ents()) {
            let inst = DivInstance::new(vec![v; b.len()], b).unwrap();
            let cells = div_acceptable_cells(Notion::Share(ShareKind::Wmms), &inst, &Limits::default()).unwrap();
            prop_assert!(!cells.is_empty());
        }

        #[test]
        fn proportional_point_passes_aps_and_ce(vs in proptest::collection::vec(arb_step(), 3), b in arb_ents()) {
            let inst = DivInstance::new(vs[..b.len()].to_vec(), b).unwrap();
            let prop = inst.proportional();
            prop_assert!(div_check(Notion::Share(ShareKind::Aps), &inst, &prop).unwrap());
            prop_assert!(div_check(Notion::Ce, &inst, &prop).unwrap());
        }

    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn cells_cover_every_acceptable_sample(vs in proptest::collection::vec(arb_step(), 3), b in arb_eighths()) {
            let inst = DivInstance::new(vs[..b.len()].to_vec(), b).unwrap();
            let grid = Grid::new(&inst).unwrap();
            let den: i64 = grid.atoms.iter().map(|a| a.lo.g.denom().clone()).fold(num::BigInt::one(), |l, d| num::integer::lcm(l, d)).try_into().unwrap();
            let samples = grid_points(inst.n(), den * 4);
            let best = mwnsw_cells(&inst, &Limits::default()).unwrap();
            let judge = |notion: Notion, a: &DivAllocation| match notion {
                Notion::Mwnsw => mwnsw_accepts(&best, &inst, a).unwrap(),
                _ => div_check(notion, &inst, a).unwrap(),
            };
            for notion in Notion::ALL {
                let cells = div_acceptable_cells(notion, &inst, &Limits::default()).unwrap();
                for c in &cells {
                    prop_assert!(judge(notion, &c.representative), "{} representative {}", notion, c.representative);
                }
                for a in &samples {
                    let inside = cells.iter().any(|c| c.atoms.iter().zip(&a.x).all(|(atom, x)| atom.contains(x)));
                    prop_assert_eq!(judge(notion, a), inside, "{} at {}", notion, a);
                }
            }
        }
    }
}
