//! Valuations of fractions of one homogeneous good.

use std::fmt;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_approx, format_rational, to_f64, Rational};

use super::point::{Interval, Point};

/// A value that is exact for step and piecewise-linear valuations and numeric for powers.
#[derive(Debug, Clone, PartialEq)]
pub enum DivValue {
    Exact(Rational),
    Approx(f64),
}

impl DivValue {
    pub fn approx(&self) -> f64 {
        match self {
            DivValue::Exact(r) => to_f64(r),
            DivValue::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            DivValue::Exact(r) => Some(r),
            DivValue::Approx(_) => None,
        }
    }

    /// Exact when both sides are exact; otherwise within `tol` counts as equal.
    pub fn compare(&self, other: &DivValue, tol: f64) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (DivValue::Exact(a), DivValue::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.approx(), other.approx());
                if (a - b).abs() <= tol {
                    Ordering::Equal
                } else if a < b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }
}

impl fmt::Display for DivValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivValue::Exact(r) => f.write_str(&format_rational(r)),
            DivValue::Approx(x) => f.write_str(&format_approx(*x)),
        }
    }
}

/// One constant piece of a step valuation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    pub span: Interval,
    pub value: Rational,
}

/// Piecewise-constant valuation with explicit open and closed endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepValuation {
    segments: Vec<Segment>,
}

impl StepValuation {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let bad = |msg: String| Err(Error::Argument(format!("step valuation: {msg}")));
        let Some(first) = segments.first() else { return bad("no segments".into()) };
        if first.span.lo != Point::zero() || !first.span.lo_closed {
            return bad("the first segment must start at a closed 0".into());
        }
        if !first.value.is_zero() {
            return bad(format!("the value at 0 must be 0, got {}", first.value));
        }
        let last = segments.last().expect("nonempty");
        if last.span.hi != Point::one() || !last.span.hi_closed {
            return bad("the last segment must end at a closed 1".into());
        }
        for (k, seg) in segments.iter().enumerate() {
            if seg.span.is_empty() {
                return bad(format!("segment {} {} is empty", k + 1, seg.span));
            }
            if !seg.span.lo.in_unit() || !seg.span.hi.in_unit() {
                return bad(format!("segment {} leaves [0, 1]", k + 1));
            }
            if seg.value.is_negative() {
                return bad(format!("segment {} has a negative value", k + 1));
            }
        }
        for (k, pair) in segments.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if a.span.hi != b.span.lo || a.span.hi_closed == b.span.lo_closed {
                return bad(format!(
                    "segments {} and {} must meet at one point covered exactly once, got {} then {}",
                    k + 1,
                    k + 2,
                    a.span,
                    b.span
                ));
            }
            if b.value < a.value {
                return bad(format!("values must be nondecreasing, segment {} drops", k + 2));
            }
        }
        Ok(StepValuation { segments })
    }

    /// Value 0 below the first threshold and `values[k]` from threshold `k` (inclusive) on.
    pub fn from_thresholds(steps: &[(Point, Rational)]) -> Result<Self> {
        let mut segments = Vec::new();
        let mut lo = Point::zero();
        let mut value = Rational::zero();
        for (t, v) in steps {
            segments.push(Segment {
                span: Interval { lo: lo.clone(), lo_closed: true, hi: t.clone(), hi_closed: false },
                value,
            });
            lo = t.clone();
            value = v.clone();
        }
        segments.push(Segment { span: Interval { lo, lo_closed: true, hi: Point::one(), hi_closed: true }, value });
        StepValuation::new(segments)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn segment_of(&self, x: &Point) -> Option<&Segment> {
        self.segments.iter().find(|s| s.span.contains(x))
    }

    pub fn value(&self, x: &Point) -> Result<Rational> {
        self.segment_of(x)
            .map(|s| s.value.clone())
            .ok_or_else(|| Error::Argument(format!("fraction {x} lies outside [0, 1]")))
    }

    pub fn max_value(&self) -> &Rational {
        &self.segments.last().expect("nonempty").value
    }

    /// Distinct segment values in increasing order.
    pub fn levels(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = self.segments.iter().map(|s| s.value.clone()).collect();
        out.dedup();
        out
    }

    /// Endpoints of all segments.
    pub fn breakpoints(&self) -> Vec<Point> {
        let mut out: Vec<Point> = self.segments.iter().flat_map(|s| [s.span.lo.clone(), s.span.hi.clone()]).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Start of the first segment with value at least `y`, as `(point, closed)`.
    pub fn need(&self, y: &Rational) -> Option<(Point, bool)> {
        if !y.is_positive() {
            return Some((Point::zero(), true));
        }
        self.segments.iter().find(|s| s.value >= *y).map(|s| (s.span.lo.clone(), s.span.lo_closed))
    }

    /// Start of the first segment worth strictly more than `y`.
    pub fn better_than(&self, y: &Rational) -> Option<(Point, bool)> {
        self.segments.iter().find(|s| s.value > *y).map(|s| (s.span.lo.clone(), s.span.lo_closed))
    }

    /// Multiply every value by `c > 0`.
    pub fn scaled(&self, c: &Rational) -> StepValuation {
        StepValuation {
            segments: self.segments.iter().map(|s| Segment { span: s.span.clone(), value: &s.value * c }).collect(),
        }
    }
}

/// Continuous piecewise-linear valuation through `(0, 0)` and the given points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PiecewiseLinear {
    points: Vec<(Rational, Rational)>,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::Argument(format!("piecewise-linear valuation: {msg}")));
        if points.len() < 2 {
            return bad("needs at least two points");
        }
        if points[0] != (Rational::zero(), Rational::zero()) {
            return bad("must start at (0, 0)");
        }
        if points.last().expect("nonempty").0 != Rational::from_integer(1.into()) {
            return bad("must end at x = 1");
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return bad("x coordinates must increase");
            }
            if w[1].1 < w[0].1 {
                return bad("values must be nondecreasing");
            }
        }
        if points.last().expect("nonempty").1.is_zero() {
            return bad("must not be identically zero");
        }
        Ok(PiecewiseLinear { points })
    }

    pub fn points(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    /// Index `k` of the piece `[x_k, x_{k+1}]` holding `x`, preferring the right piece at a breakpoint.
    pub fn piece(&self, x: &Rational) -> usize {
        let last = self.points.len() - 2;
        (0..=last).find(|&k| *x < self.points[k + 1].0).unwrap_or(last)
    }

    /// `(intercept, slope)` of piece `k`.
    pub fn affine(&self, k: usize) -> (Rational, Rational) {
        let (x0, y0) = &self.points[k];
        let (x1, y1) = &self.points[k + 1];
        let slope = (y1 - y0) / (x1 - x0);
        (y0 - &slope * x0, slope)
    }

    pub fn value(&self, x: &Rational) -> Rational {
        let (a, s) = self.affine(self.piece(x));
        a + s * x
    }

    pub fn max_value(&self) -> &Rational {
        &self.points.last().expect("nonempty").1
    }

    /// Least `x` with `v(x) >= y`; always attained.
    pub fn need(&self, y: &Rational) -> Option<Rational> {
        if !y.is_positive() {
            return Some(Rational::zero());
        }
        for w in self.points.windows(2) {
            let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
            if y1 >= y {
                return Some(x0 + (y - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        None
    }

    /// `{z : v(z) > y}` is `(sup, 1]`; returns the sup.
    pub fn better_than(&self, y: &Rational) -> Option<Rational> {
        for w in self.points.windows(2) {
            let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
            if y1 > y {
                let start = if y0 >= y { x0.clone() } else { x0 + (y - y0) * (x1 - x0) / (y1 - y0) };
                return Some(start);
            }
        }
        None
    }
}

/// A valuation of fractions of the good.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DivValuation {
    Step(StepValuation),
    PiecewiseLinear(PiecewiseLinear),
    /// `v(x) = x^p` with `p > 0`.
    Power(Rational),
}

impl DivValuation {
    pub fn power(p: Rational) -> Result<Self> {
        if !p.is_positive() {
            return Err(Error::Argument(format!("power exponent must be positive, got {p}")));
        }
        Ok(DivValuation::Power(p))
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, DivValuation::Power(_))
    }

    pub fn max_value(&self) -> DivValue {
        match self {
            DivValuation::Step(s) => DivValue::Exact(s.max_value().clone()),
            DivValuation::PiecewiseLinear(p) => DivValue::Exact(p.max_value().clone()),
            DivValuation::Power(_) => DivValue::Exact(Rational::from_integer(1.into())),
        }
    }
}

fn require_real(x: &Point) -> Result<&Rational> {
    if !x.is_real() {
        return Err(Error::Argument(format!("infinitesimal offsets need a step valuation, got {x}")));
    }
    if !x.in_unit() {
        return Err(Error::Argument(format!("fraction {x} lies outside [0, 1]")));
    }
    Ok(&x.g)
}

/// The value of fraction `x`.
pub fn div_value(v: &DivValuation, x: &Point) -> Result<DivValue> {
    match v {
        DivValuation::Step(s) => s.value(x).map(DivValue::Exact),
        DivValuation::PiecewiseLinear(p) => Ok(DivValue::Exact(p.value(require_real(x)?))),
        DivValuation::Power(e) => Ok(DivValue::Approx(to_f64(require_real(x)?).powf(to_f64(e)))),
    }
}

/// Least fraction worth at least `y` under an exact valuation, with whether it is attained.
pub(crate) fn need_exact(v: &DivValuation, y: &Rational) -> Option<(Point, bool)> {
    match v {
        DivValuation::Step(s) => s.need(y),
        DivValuation::PiecewiseLinear(p) => p.need(y).map(|x| (Point::real(x), true)),
        DivValuation::Power(_) => None,
    }
}

/// Start of `{z : v(z) > y}` for an exact valuation, with whether the start belongs to the set.
pub(crate) fn better_exact(v: &DivValuation, y: &Rational) -> Option<(Point, bool)> {
    match v {
        DivValuation::Step(s) => s.better_than(y),
        DivValuation::PiecewiseLinear(p) => p.better_than(y).map(|x| (Point::real(x), false)),
        DivValuation::Power(_) => None,
    }
}
