//! Fractions of the good extended by a symbolic positive infinitesimal `δ`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num::{One, Signed, Zero};

use crate::rational::{format_rational, to_f64, Rational};

/// The fraction `g + s·δ`, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub g: Rational,
    pub s: Rational,
}

impl Point {
    pub fn new(g: Rational, s: Rational) -> Self {
        Point { g, s }
    }

    pub fn real(g: Rational) -> Self {
        Point { g, s: Rational::zero() }
    }

    pub fn zero() -> Self {
        Point::real(Rational::zero())
    }

    pub fn one() -> Self {
        Point::real(Rational::one())
    }

    pub fn is_real(&self) -> bool {
        self.s.is_zero()
    }

    /// Lies in `[0, 1]` once `δ` is taken small enough.
    pub fn in_unit(&self) -> bool {
        *self >= Point::zero() && *self <= Point::one()
    }

    pub fn scale(&self, c: &Rational) -> Point {
        Point { g: &self.g * c, s: &self.s * c }
    }

    pub fn div(&self, c: &Rational) -> Point {
        Point { g: &self.g / c, s: &self.s / c }
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        (self.clone() + other.clone()).div(&Rational::from_integer(2.into()))
    }

    /// The real part; `δ` is dropped.
    pub fn approx(&self) -> f64 {
        to_f64(&self.g)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point { g: self.g + o.g, s: self.s + o.s }
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point { g: self.g - o.g, s: self.s - o.s }
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point { g: -self.g, s: -self.s }
    }
}

impl std::iter::Sum for Point {
    fn sum<I: Iterator<Item = Point>>(iter: I) -> Point {
        iter.fold(Point::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = format_rational(&self.g);
        if self.s.is_zero() {
            return f.write_str(&g);
        }
        let mag = self.s.abs();
        let coef = if mag.is_one() { String::new() } else { format_rational(&mag) };
        let sign = if self.s.is_negative() { '-' } else { '+' };
        if self.g.is_zero() && sign == '+' {
            write!(f, "{coef}δ")
        } else {
            write!(f, "{g}{sign}{coef}δ")
        }
    }
}

/// An interval of fractions with explicit endpoint closure; may be a single point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Point,
    pub lo_closed: bool,
    pub hi: Point,
    pub hi_closed: bool,
}

impl Interval {
    pub fn point(p: Point) -> Self {
        Interval { lo: p.clone(), lo_closed: true, hi: p, hi_closed: true }
    }

    pub fn open(lo: Point, hi: Point) -> Self {
        Interval { lo, lo_closed: false, hi, hi_closed: false }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            Ordering::Less => false,
            Ordering::Equal => !(self.lo_closed && self.hi_closed),
            Ordering::Greater => true,
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    /// Intersection with `{x <= u}` (`closed`) or `{x < u}`.
    pub fn cap_above(&self, u: &Point, closed: bool) -> Interval {
        let mut out = self.clone();
        match u.cmp(&self.hi) {
            Ordering::Less => {
                out.hi = u.clone();
                out.hi_closed = closed;
            }
            Ordering::Equal => out.hi_closed &= closed,
            Ordering::Greater => {}
        }
        out
    }

    /// Minkowski sum.
    pub fn plus(&self, o: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone() + o.lo.clone(),
            lo_closed: self.lo_closed && o.lo_closed,
            hi: self.hi.clone() + o.hi.clone(),
            hi_closed: self.hi_closed && o.hi_closed,
        }
    }

    /// `{t - x : x in self}`.
    pub fn reflect_from(&self, t: &Point) -> Interval {
        Interval {
            lo: t.clone() - self.hi.clone(),
            lo_closed: self.hi_closed,
            hi: t.clone() - self.lo.clone(),
            hi_closed: self.lo_closed,
        }
    }

    pub fn intersect(&self, o: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.cmp(&o.lo) {
            Ordering::Less => (o.lo.clone(), o.lo_closed),
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && o.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&o.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (o.hi.clone(), o.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && o.hi_closed),
        };
        Interval { lo, lo_closed, hi, hi_closed }
    }

    /// Some member, preferring the midpoint.
    pub fn pick(&self) -> Option<Point> {
        if self.is_empty() {
            None
        } else if self.is_point() {
            Some(self.lo.clone())
        } else {
            Some(self.lo.midpoint(&self.hi))
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() && self.lo_closed && self.hi_closed {
            return write!(f, "{{{}}}", self.lo);
        }
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// A point with `Σ x_i = 1` and `x_i ∈ I_i` for every `i`, if one exists.
pub fn pick_on_simplex(boxes: &[Interval]) -> Option<Vec<Point>> {
    let n = boxes.len();
    if boxes.iter().any(Interval::is_empty) {
        return None;
    }
    // suffix[k] = set of sums achievable by boxes k..n
    let mut suffix = vec![Interval::point(Point::zero()); n + 1];
    for k in (0..n).rev() {
        suffix[k] = boxes[k].plus(&suffix[k + 1]);
    }
    if !suffix[0].contains(&Point::one()) {
        return None;
    }
    let mut remaining = Point::one();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let choice = boxes[k].intersect(&suffix[k + 1].reflect_from(&remaining));
        let x = choice.pick()?;
        remaining = remaining - x.clone();
        out.push(x);
    }
    Some(out)
}
