//! Exact linear programming over the rationals.
//!
//! Two-phase dense tableau simplex with Bland's rule. Every pivot is exact, so the
//! returned point satisfies the constraints with no tolerance and identical inputs
//! always produce identical outputs.

use crate::error::{Error, Result};
use crate::rational::Rational;
use num::{Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `None` on either side means unbounded in that direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Bound {
    pub fn nonnegative() -> Self {
        Bound { lower: Some(Rational::zero()), upper: None }
    }

    pub fn free() -> Self {
        Bound { lower: None, upper: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpOutcome::Infeasible)
    }
}

impl LinearProgram {
    /// `vars` nonnegative variables, zero objective, no constraints.
    pub fn new(vars: usize, sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: vec![Rational::zero(); vars],
            constraints: Vec::new(),
            bounds: vec![Bound::nonnegative(); vars],
        }
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    /// Adds `sum coeff * x_var <op> rhs` from a sparse term list.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.vars()];
        for (j, c) in terms {
            coeffs[*j] += c;
        }
        self.add(coeffs, relation, rhs);
    }

    fn validate(&self) -> Result<()> {
        let n = self.vars();
        if self.bounds.len() != n {
            return Err(Error::Structural(format!("{} bounds for {n} variables", self.bounds.len())));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Structural(format!(
                    "constraint {k} has {} coefficients for {n} variables",
                    c.coeffs.len()
                )));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
                if l > u {
                    return Err(Error::Structural(format!("variable {j} has lower bound {l} above upper {u}")));
                }
            }
        }
        Ok(())
    }
}

/// How an original variable is rebuilt from the nonnegative standard-form columns.
struct VarMap {
    offset: Rational,
    terms: Vec<(usize, i8)>,
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.vars();

    // Standard form: x_j = offset + sum(sign * y_k) with y >= 0.
    let mut maps = Vec::with_capacity(n);
    let mut ny = 0usize;
    let mut extra_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &lp.bounds {
        match (&b.lower, &b.upper) {
            (Some(l), u) => {
                maps.push(VarMap { offset: l.clone(), terms: vec![(ny, 1)] });
                if let Some(u) = u {
                    extra_rows.push((ny, u - l));
                }
                ny += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap { offset: u.clone(), terms: vec![(ny, -1)] });
                ny += 1;
            }
            (None, None) => {
                maps.push(VarMap { offset: Rational::zero(), terms: vec![(ny, 1), (ny + 1, -1)] });
                ny += 2;
            }
        }
    }

    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![Rational::zero(); ny];
        let mut rhs = c.rhs.clone();
        for (j, coef) in c.coeffs.iter().enumerate() {
            if coef.is_zero() {
                continue;
            }
            rhs -= coef * &maps[j].offset;
            for &(k, sign) in &maps[j].terms {
                if sign > 0 {
                    a[k] += coef;
                } else {
                    a[k] -= coef;
                }
            }
        }
        rows.push((a, c.relation, rhs));
    }
    for (k, cap) in extra_rows {
        let mut a = vec![Rational::zero(); ny];
        a[k] = Rational::from_integer(1.into());
        rows.push((a, Relation::Le, cap));
    }
    for row in rows.iter_mut() {
        if row.2.is_negative() {
            for x in row.0.iter_mut() {
                *x = -x.clone();
            }
            row.2 = -row.2.clone();
            row.1 = match row.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }

    // Minimize c·y, with the objective constant from the offsets kept aside.
    let mut cost = vec![Rational::zero(); ny];
    for (j, coef) in lp.objective.iter().enumerate() {
        let signed = if lp.sense == Sense::Maximize { -coef.clone() } else { coef.clone() };
        for &(k, sign) in &maps[j].terms {
            if sign > 0 {
                cost[k] += &signed;
            } else {
                cost[k] -= &signed;
            }
        }
    }

    let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let art_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let first_slack = ny;
    let first_art = ny + slack_count;
    let width = first_art + art_count;

    let mut tab = Tableau { rows: Vec::with_capacity(rows.len()), basis: Vec::with_capacity(rows.len()), width };
    let (mut s, mut a) = (first_slack, first_art);
    for (coeffs, rel, rhs) in rows {
        let mut r = coeffs;
        r.resize(width + 1, Rational::zero());
        r[width] = rhs;
        match rel {
            Relation::Le => {
                r[s] = Rational::from_integer(1.into());
                tab.basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                r[s] = Rational::from_integer((-1).into());
                r[a] = Rational::from_integer(1.into());
                tab.basis.push(a);
                s += 1;
                a += 1;
            }
            Relation::Eq => {
                r[a] = Rational::from_integer(1.into());
                tab.basis.push(a);
                a += 1;
            }
        }
        tab.rows.push(r);
    }

    // Phase one: minimize the sum of artificial variables.
    if art_count > 0 {
        let mut phase1 = vec![Rational::zero(); width];
        for c in phase1.iter_mut().skip(first_art) {
            *c = Rational::from_integer(1.into());
        }
        let mut obj = tab.reduced_costs(&phase1);
        match tab.run(&mut obj, width)? {
            Run::Optimal => {}
            Run::Unbounded => return Err(Error::Numeric("phase one reported unbounded".into())),
        }
        if !obj[width].is_zero() {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining zero-valued artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= first_art {
                match (0..first_art).find(|&j| !tab.rows[r][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(r, j, &mut obj);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    let mut full_cost = cost;
    full_cost.resize(width, Rational::zero());
    let mut obj = tab.reduced_costs(&full_cost);
    match tab.run(&mut obj, first_art)? {
        Run::Unbounded => return Ok(LpOutcome::Unbounded),
        Run::Optimal => {}
    }

    let mut y = vec![Rational::zero(); ny];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < ny {
            y[b] = tab.rows[r][width].clone();
        }
    }
    let point: Vec<Rational> = maps
        .iter()
        .map(|m| {
            let mut x = m.offset.clone();
            for &(k, sign) in &m.terms {
                if sign > 0 {
                    x += &y[k];
                } else {
                    x -= &y[k];
                }
            }
            x
        })
        .collect();
    let value = lp.objective.iter().zip(&point).map(|(c, x)| c * x).sum();
    Ok(LpOutcome::Optimal { value, point })
}

/// True iff the constraint system (with bounds) admits a point.
pub fn feasible(lp: &LinearProgram) -> Result<bool> {
    let mut probe = lp.clone();
    probe.objective = vec![Rational::zero(); lp.vars()];
    Ok(solve(&probe)?.is_feasible())
}

enum Run {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    /// Objective row `[d_0 .. d_{w-1}, -z]` for minimizing `cost·y` at the current basis.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut obj: Vec<Rational> = cost.to_vec();
        obj.push(Rational::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, x) in self.rows[r].iter().enumerate() {
                if !x.is_zero() {
                    obj[j] -= cb * x;
                }
            }
        }
        obj
    }

    fn pivot(&mut self, r: usize, j: usize, obj: &mut [Rational]) {
        let p = self.rows[r][j].clone();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x /= &p;
            }
        }
        let pivot_row = self.rows[r].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&k| !pivot_row[k].is_zero()).collect();
        for (q, row) in self.rows.iter_mut().enumerate() {
            if q == r || row[j].is_zero() {
                continue;
            }
            let f = row[j].clone();
            for &k in &nz {
                row[k] -= &f * &pivot_row[k];
            }
        }
        if !obj[j].is_zero() {
            let f = obj[j].clone();
            for &k in &nz {
                obj[k] -= &f * &pivot_row[k];
            }
        }
        self.basis[r] = j;
    }

    /// Bland's rule: lowest-index improving column enters, ties in the ratio test go
    /// to the lowest-index basic variable. Columns at or beyond `limit` never enter.
    fn run(&mut self, obj: &mut [Rational], limit: usize) -> Result<Run> {
        let rhs = self.width;
        loop {
            let Some(j) = (0..limit).find(|&j| obj[j].is_negative()) else {
                return Ok(Run::Optimal);
            };
            let mut best: Option<(usize, Rational)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                if row[j].is_positive() {
                    let ratio = &row[rhs] / &row[j];
                    let better = match &best {
                        None => true,
                        Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            match best {
                None => return Ok(Run::Unbounded),
                Some((r, _)) => self.pivot(r, j, obj),
            }
        }
    }
}
