//! Shares of a divisible good: proportional, APS, WMMS and MMS⁻.

use num::{One, Signed, Zero};

use crate::error::Result;
use crate::notions::ShareKind;
use crate::rational::{to_f64, Rational};
use crate::shares::mms_minus_k;

use super::point::Point;
use super::valuation::{div_value, need_exact, DivValuation, DivValue};
use super::DivInstance;

/// The least fraction worth a given value.
#[derive(Debug, Clone, PartialEq)]
pub enum DivFraction {
    /// Fractions `>= point` qualify when `closed`, fractions `> point` otherwise.
    Exact { point: Point, closed: bool },
    Approx(f64),
}

impl DivFraction {
    pub fn approx(&self) -> f64 {
        match self {
            DivFraction::Exact { point, .. } => point.approx(),
            DivFraction::Approx(x) => *x,
        }
    }
}

impl std::fmt::Display for DivFraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DivFraction::Exact { point, closed: true } => write!(f, "{point}"),
            DivFraction::Exact { point, closed: false } => write!(f, ">{point}"),
            DivFraction::Approx(x) => f.write_str(&crate::rational::format_approx(*x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivWmms {
    pub value: DivValue,
    /// Least fraction giving the agent its WMMS.
    pub fraction: DivFraction,
    /// A partition of the good achieving the WMMS, one fraction per agent.
    pub partition: Vec<DivFraction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivShares {
    pub prop: DivValue,
    pub aps: DivValue,
    pub mms_minus: DivValue,
    pub wmms: DivWmms,
}

fn rational_to_point(x: &Rational) -> Point {
    Point::real(x.clone())
}

pub fn div_shares(instance: &DivInstance, i: usize) -> Result<DivShares> {
    let v = &instance.valuations[i];
    let b = instance.entitlements.get(i);
    let prop = match v.max_value() {
        DivValue::Exact(m) => DivValue::Exact(b * m),
        DivValue::Approx(m) => DivValue::Approx(to_f64(b) * m),
    };
    let aps = div_value(v, &rational_to_point(b))?;
    let k = mms_minus_k(b)?;
    let mms_minus = div_value(v, &Point::real(Rational::new(1.into(), k.into())))?;
    let wmms = wmms(v, instance.entitlements.as_slice(), i);
    Ok(DivShares { prop, aps, mms_minus, wmms })
}

/// One share value; the pessimistic share equals the APS for one homogeneous good.
pub fn div_share(kind: ShareKind, instance: &DivInstance, i: usize) -> Result<DivValue> {
    let s = div_shares(instance, i)?;
    Ok(match kind {
        ShareKind::Prop => s.prop,
        ShareKind::Aps | ShareKind::Pess => s.aps,
        ShareKind::Wmms => s.wmms.value,
        ShareKind::MmsMinus => s.mms_minus,
    })
}

fn wmms(v: &DivValuation, b: &[Rational], i: usize) -> DivWmms {
    match v {
        DivValuation::Power(p) => {
            let p = to_f64(p);
            let bf: Vec<f64> = b.iter().map(to_f64).collect();
            let sum: f64 = bf.iter().map(|x| x.powf(1.0 / p)).sum();
            let ratio = sum.powf(-p);
            let value = bf[i] * ratio;
            DivWmms {
                value: DivValue::Approx(value),
                fraction: DivFraction::Approx(value.powf(1.0 / p)),
                partition: bf.iter().map(|x| DivFraction::Approx((ratio * x).powf(1.0 / p))).collect(),
            }
        }
        _ => wmms_exact(v, b, i),
    }
}

/// Sum of least fractions for the ratio `r`, and whether every one is attained.
fn requirement(v: &DivValuation, b: &[Rational], r: &Rational) -> Option<(Point, bool, Vec<(Point, bool)>)> {
    let needs: Vec<(Point, bool)> = b.iter().map(|bj| need_exact(v, &(r * bj))).collect::<Option<_>>()?;
    let total: Point = needs.iter().map(|(p, _)| p.clone()).sum();
    let all_closed = needs.iter().all(|(_, c)| *c);
    Some((total, all_closed, needs))
}

fn fits(req: &Option<(Point, bool, Vec<(Point, bool)>)>) -> bool {
    match req {
        Some((total, closed, _)) => *total < Point::one() || (*total == Point::one() && *closed),
        None => false,
    }
}

/// Largest `R` such that the good splits into parts worth at least `R·b_j` each.
/// The WMMS is `b_i · R`.
fn wmms_exact(v: &DivValuation, b: &[Rational], i: usize) -> DivWmms {
    let levels: Vec<Rational> = match v {
        DivValuation::Step(s) => s.levels(),
        DivValuation::PiecewiseLinear(p) => p.points().iter().map(|(_, y)| y.clone()).collect(),
        DivValuation::Power(_) => unreachable!("handled numerically"),
    };
    let mut cands: Vec<Rational> =
        levels.iter().filter(|l| l.is_positive()).flat_map(|l| b.iter().map(move |bj| l / bj)).collect();
    cands.push(Rational::zero());
    cands.sort();
    cands.dedup();
    // Feasibility is monotone in R; find the last feasible candidate.
    let mut lo = 0;
    let mut hi = cands.len();
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if fits(&requirement(v, b, &cands[mid])) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = cands[lo].clone();
    let next = cands.get(lo + 1).and_then(|c| requirement(v, b, c).map(|req| (c, req.0.g)));
    if let (DivValuation::PiecewiseLinear(_), Some((next, s_next))) = (v, next) {
        // Between consecutive candidates the total requirement is affine in R.
        let mid = (&r + next) / Rational::from_integer(2.into());
        let s_mid = requirement(v, b, &mid).expect("below the cap").0.g;
        let slope = (&s_next - &s_mid) / (next - &mid);
        let s_start = &s_mid - &slope * (&mid - &r);
        if s_start <= Rational::one() && slope.is_positive() {
            r = &r + (Rational::one() - s_start) / slope;
        }
    }
    let (_, _, needs) = requirement(v, b, &r).expect("feasible");
    let value = b[i].clone() * &r;
    let (fp, fc) = need_exact(v, &value).expect("feasible");
    DivWmms {
        value: DivValue::Exact(value),
        fraction: DivFraction::Exact { point: fp, closed: fc },
        partition: complete_partition(needs),
    }
}

/// Spreads the unneeded remainder over the parts whose threshold is not attained.
fn complete_partition(needs: Vec<(Point, bool)>) -> Vec<DivFraction> {
    let total: Point = needs.iter().map(|(p, _)| p.clone()).sum();
    let rest = Point::one() - total;
    let open: Vec<usize> = (0..needs.len()).filter(|&j| !needs[j].1).collect();
    let mut parts: Vec<Point> = needs.iter().map(|(p, _)| p.clone()).collect();
    if rest > Point::zero() {
        if open.is_empty() {
            let last = parts.len() - 1;
            parts[last] = parts[last].clone() + rest;
        } else {
            let share = rest.div(&Rational::from_integer(open.len().into()));
            for j in open {
                parts[j] = parts[j].clone() + share.clone();
            }
        }
    }
    parts.into_iter().map(|point| DivFraction::Exact { point, closed: true }).collect()
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::{DivAllocation, DivInstance, DivValuation};
    use super::*;
    use crate::rational::int;

    fn exact_wmms(inst: &DivInstance, i: usize) -> (Rational, DivFraction) {
        let w = div_shares(inst, i).unwrap().wmms;
        (w.value.exact().unwrap().clone(), w.fraction)
    }

    /// Max over partitions of min_j (b_i / b_j) v_i(P_j). The first three parts range over
    /// breakpoints shifted by at most one infinitesimal; the last part takes the remainder.
    fn brute_force_wmms(inst: &DivInstance, i: usize) -> Rational {
        let DivValuation::Step(v) = &inst.valuations[i] else { panic!("step valuations only") };
        let mut parts: Vec<Point> = vec![Point::zero()];
        for p in v.breakpoints() {
            for s in -1..=1 {
                let q = p.clone() + Point::new(Rational::zero(), int(s));
                if q.in_unit() {
                    parts.push(q);
                }
            }
        }
        parts.sort();
        parts.dedup();
        let b = inst.entitlements.as_slice();
        let n = inst.n();
        let mut best = Rational::zero();
        let mut idx = vec![0usize; n - 1];
        loop {
            let mut x: Vec<Point> = idx.iter().map(|&k| parts[k].clone()).collect();
            let rest = Point::one() - x.iter().cloned().sum::<Point>();
            if rest.in_unit() {
                x.push(rest);
                let worst = (0..n)
                    .map(|j| div_value(&inst.valuations[i], &x[j]).unwrap().exact().unwrap().clone() * &b[i] / &b[j])
                    .min()
                    .unwrap();
                best = best.max(worst);
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < parts.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                return best;
            }
        }
    }

    fn closed(p: Point) -> DivFraction {
        DivFraction::Exact { point: p, closed: true }
    }

    #[test]
    fn wmms_on_incentive_instance() {
        let inst = incentive_instance(&["1/2", "1/4", "1/4"]);
        let vals: Vec<Rational> = (0..3).map(|i| exact_wmms(&inst, i).0).collect();
        assert_eq!(vals, vec![int(1), r("1/4"), int(1)]);
        let inst = incentive_instance(&["5/8", "1/8", "1/4"]);
        let vals: Vec<Rational> = (0..3).map(|i| exact_wmms(&inst, i).0).collect();
        assert_eq!(vals, vec![int(1), r("1/8"), int(2)]);
        let w3 = div_shares(&inst, 2).unwrap().wmms;
        assert_eq!(w3.fraction, closed(pt("3/8")));
    }

    #[test]
    fn wmms_partitions_are_valid() {
        for b in [["1/2", "1/4", "1/4"], ["5/8", "1/8", "1/4"]] {
            let inst = incentive_instance(&b);
            for i in 0..3 {
                let w = div_shares(&inst, i).unwrap().wmms;
                let parts: Vec<Point> = w
                    .partition
                    .iter()
                    .map(|f| match f {
                        DivFraction::Exact { point, .. } => point.clone(),
                        _ => panic!(),
                    })
                    .collect();
                DivAllocation::new(parts.clone()).unwrap();
                for (j, x) in parts.iter().enumerate() {
                    let got = div_value(&inst.valuations[i], x).unwrap();
                    let owed = w.value.exact().unwrap() * inst.entitlements.get(j) / inst.entitlements.get(i);
                    assert!(got.exact().unwrap() >= &owed, "agent {i} part {j}");
                }
            }
        }
    }

    #[test]
    fn wmms_of_power_valuations() {
        let inst = DivInstance::new(
            vec![DivValuation::power(int(1)).unwrap(), DivValuation::power(r("1/2")).unwrap()],
            ents(&["1/3", "2/3"]),
        )
        .unwrap();
        let w1 = div_shares(&inst, 0).unwrap().wmms;
        assert!((w1.value.approx() - 1.0 / 3.0).abs() < 1e-12);
        let w2 = div_shares(&inst, 1).unwrap().wmms;
        assert!((w2.value.approx() - 2.0 / 5f64.sqrt()).abs() < 1e-9);
        assert!((w2.fraction.approx() - 0.8).abs() < 1e-9);
        assert!((w2.partition[0].approx() - 0.2).abs() < 1e-9);
        assert!((w2.partition[1].approx() - 0.8).abs() < 1e-9);
        assert!(w1.fraction.approx() + w2.fraction.approx() > 1.0);
    }

    #[test]
    fn twenty_wmms_values_with_infinitesimals() {
        let vectors = [
            ["0.1", "0.1", "0.4", "0.4"],
            ["0.2", "0.1", "0.3", "0.4"],
            ["0.1", "0.2", "0.3", "0.4"],
            ["0.01", "0.1", "0.49", "0.4"],
            ["0.01", "0.1", "0.4", "0.49"],
        ];
        let expected: [[(&str, Point); 5]; 4] = [
            [("1", d("0.1", -2)), ("4/3", d("0.1", -1)), ("2/3", d("0.1", -2)), ("4/49", d("0.1", -2)), ("4/49", d("0.1", -2))],
            [("1", d("0.1", -2)), ("2/3", d("0.1", -2)), ("4/3", d("0.1", -1)), ("2", d("0.1", 5)), ("2", d("0.1", 5))],
            [("4", d("0.4", -2)), ("3", d("0.4", -2)), ("3", d("0.4", -2)), ("4.9", d("0.4", -1)), ("4", d("0.4", -2))],
            [("4", d("0.4", -2)), ("5", d("0.4", 5)), ("5", d("0.4", 5)), ("4", d("0.4", -2)), ("4.9", d("0.4", -1))],
        ];
        for (k, b) in vectors.iter().enumerate() {
            let inst = delta_family(b);
            for i in 0..4 {
                let (value, fraction) = exact_wmms(&inst, i);
                assert_eq!(value, brute_force_wmms(&inst, i), "agent {} vector {k}", i + 1);
                assert_eq!(value, r(expected[i][k].0), "agent {} vector {k}", i + 1);
                assert_eq!(fraction, closed(expected[i][k].1.clone()), "agent {} vector {k}", i + 1);
            }
        }
    }

    /// The good as `m` identical items: a bundle of `k` items is worth `v(k/m)`.
    fn discretized(v: &DivValuation, m: usize) -> crate::model::IndivisibleValuation {
        let values = (0..1usize << m)
            .map(|mask| {
                let k = Rational::new((mask.count_ones() as i64).into(), (m as i64).into());
                div_value(v, &Point::real(k)).unwrap().exact().unwrap().clone()
            })
            .collect();
        crate::model::IndivisibleValuation::table(m, values, &crate::model::Limits::default()).unwrap()
    }

    #[test]
    fn aps_matches_identical_item_discretization() {
        let seg = |lo: &str, lc, hi: &str, hc, v: i64| super::super::Segment {
            span: super::super::Interval { lo: pt(lo), lo_closed: lc, hi: pt(hi), hi_closed: hc },
            value: int(v),
        };
        let open_left = DivValuation::Step(
            super::super::StepValuation::new(vec![
                seg("0", true, "0", true, 0),
                seg("0", false, "1/4", true, 1),
                seg("1/4", false, "1/2", false, 2),
                seg("1/2", true, "1", true, 5),
            ])
            .unwrap(),
        );
        let valuations = [
            thresholds(&[(pt("1/4"), 1), (pt("1/2"), 3), (pt("3/4"), 4)]),
            thresholds(&[(pt("1/2"), 2)]),
            open_left,
        ];
        // Breakpoints and entitlements are quarters and eighths, so 8 items resolve them all.
        let m = 8;
        for v in &valuations {
            let items = discretized(v, m);
            for k in 1..m as i64 {
                let b = Rational::new(k.into(), (m as i64).into());
                let inst = DivInstance::new(vec![v.clone(), v.clone()], crate::model::Entitlements::new(vec![b.clone(), Rational::one() - &b]).unwrap()).unwrap();
                let divisible = div_shares(&inst, 0).unwrap().aps;
                let indivisible = crate::shares::aps(&items, &b, &crate::model::Limits::default()).unwrap().value;
                assert_eq!(divisible, DivValue::Exact(indivisible), "b = {b}");
            }
        }
    }

    #[test]
    fn piecewise_linear_wmms_solves_inside_a_piece() {
        // v = min(2x, ...) concave: (0,0) (1/2,1) (1,3/2)
        let v = pl(&[("0", "0"), ("1/2", "1"), ("1", "3/2")]);
        let inst = DivInstance::new(vec![v.clone(), v], ents(&["1/2", "1/2"])).unwrap();
        // equal split: each gets v(1/2) = 1, R = 2, WMMS = 1
        assert_eq!(exact_wmms(&inst, 0).0, int(1));
        let inst = DivInstance::new(vec![pl(&[("0", "0"), ("1/2", "1"), ("1", "3/2")]), linear()], ents(&["1/3", "2/3"])).unwrap();
        let (value, _) = exact_wmms(&inst, 0);
        // need(R/3) + need(2R/3) = 1; with both on the first piece: R/6 + R/3 = 1 gives R = 2 but
        // 2R/3 = 4/3 > 1 is on the second piece: need(y) = 1/2 + (y-1) for y >= 1, so R/6 + 1/2 + 2R/3 - 1 = 1, R = 9/5.
        assert_eq!(value, r("3/5"));
    }

    #[test]
    fn shares_of_proportional_point() {
        let inst = incentive_instance(&["5/8", "1/8", "1/4"]);
        let s = div_shares(&inst, 0).unwrap();
        assert_eq!(s.prop, DivValue::Exact(r("5/4")));
        assert_eq!(s.aps, DivValue::Exact(int(2)));
        assert_eq!(s.mms_minus, DivValue::Exact(int(1)));
    }
}
