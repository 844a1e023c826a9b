//! Textual forms of numbers, fractions of the good and allocations.

use fairalloc::divisible::{DivAllocation, DivValue, Point};
use fairalloc::rational::{format_rational, parse_rational};
use fairalloc::{Allocation, Bundle, Rational};
use num::Zero;

/// Parses `g`, `g+sd` or `g-sd`, where `d` (or `δ`) is the infinitesimal and `s` may be omitted.
pub fn parse_point(text: &str) -> Result<Point, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('d').or_else(|| t.strip_suffix('δ')) else {
        return parse_rational(&t).map(Point::real);
    };
    let split = body.char_indices().skip(1).filter(|&(_, c)| c == '+' || c == '-').map(|(k, _)| k).last();
    let (g, coef) = match split {
        Some(k) => (parse_rational(&body[..k])?, &body[k..]),
        None => (Rational::zero(), body),
    };
    let s = match coef {
        "" | "+" => Rational::from_integer(1.into()),
        "-" => Rational::from_integer((-1).into()),
        c => parse_rational(c)?,
    };
    Ok(Point::new(g, s))
}

/// Canonical point text, with `d` standing for the infinitesimal.
pub fn format_point(p: &Point) -> String {
    p.to_string().replace('δ', "d")
}

pub fn format_value(v: &DivValue) -> String {
    v.to_string()
}

/// `({e1},{e2,e3},{})`; items may also be written as plain 1-based numbers.
pub fn parse_allocation(text: &str, n: usize, m: usize) -> Result<Allocation, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| format!("allocation `{text}` must be written as ({{..}}, {{..}}, ...)"))?;
    let mut bundles = Vec::new();
    let mut rest = inner;
    while !rest.is_empty() {
        let body_end = rest.find('}').ok_or_else(|| format!("unclosed bundle in `{text}`"))?;
        let body = rest[..body_end].strip_prefix('{').ok_or_else(|| format!("bundle must start with '{{' in `{text}`"))?;
        let mut items = Vec::new();
        for tok in body.split(',').filter(|s| !s.is_empty()) {
            let k: usize = tok
                .trim_start_matches('e')
                .parse()
                .map_err(|_| format!("bad item `{tok}` in `{text}`"))?;
            if k == 0 || k > m {
                return Err(format!("item `{tok}` is outside e1..e{m}"));
            }
            items.push(k - 1);
        }
        bundles.push(Bundle::from_items(&items).map_err(|e| e.to_string())?);
        rest = &rest[body_end + 1..];
        rest = rest.strip_prefix(',').unwrap_or(rest);
    }
    if bundles.len() != n {
        return Err(format!("allocation has {} bundles for {n} agents", bundles.len()));
    }
    Allocation::new(bundles, m).map_err(|e| e.to_string())
}

/// `(0.3, 0.2, 0.5)`; each entry is a point.
pub fn parse_fractions(text: &str, n: usize) -> Result<DivAllocation, String> {
    let t = text.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| format!("fractions `{text}` must be written as (x1, x2, ...)"))?;
    let x: Vec<Point> = inner.split(',').map(parse_point).collect::<Result<_, _>>()?;
    if x.len() != n {
        return Err(format!("{} fractions for {n} agents", x.len()));
    }
    DivAllocation::new(x).map_err(|e| e.to_string())
}

/// An expected value: exact, an inequality, or approximate.
#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    Exact(Point),
    Less(Rational),
    Greater(Rational),
    Approx(f64),
}

impl Expected {
    pub fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim();
        if let Some(r) = t.strip_prefix('<') {
            return parse_rational(r).map(Expected::Less);
        }
        if let Some(r) = t.strip_prefix('>') {
            return parse_rational(r).map(Expected::Greater);
        }
        if let Some(r) = t.strip_prefix('~') {
            return r.trim().parse::<f64>().map(Expected::Approx).map_err(|e| format!("bad number `{r}`: {e}"));
        }
        parse_point(t).map(Expected::Exact)
    }

    /// Whether a computed value meets the expectation; numeric values use `tol`.
    pub fn matches(&self, v: &DivValue, tol: f64) -> bool {
        let approx = v.approx();
        match (self, v) {
            (Expected::Exact(p), DivValue::Exact(r)) => p.is_real() && &p.g == r,
            (Expected::Exact(p), DivValue::Approx(x)) => p.is_real() && (p.approx() - x).abs() <= tol,
            (Expected::Less(r), DivValue::Exact(x)) => x < r,
            (Expected::Greater(r), DivValue::Exact(x)) => x > r,
            (Expected::Less(r), _) => approx < fairalloc::rational::to_f64(r) - tol,
            (Expected::Greater(r), _) => approx > fairalloc::rational::to_f64(r) + tol,
            (Expected::Approx(e), _) => (e - approx).abs() <= tol,
        }
    }

    pub fn matches_point(&self, p: &Point, tol: f64) -> bool {
        match self {
            Expected::Exact(e) => e == p,
            _ if p.is_real() => self.matches(&DivValue::Exact(p.g.clone()), tol),
            _ => false,
        }
    }
}

impl std::fmt::Display for Expected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expected::Exact(p) => f.write_str(&format_point(p)),
            Expected::Less(r) => write!(f, "<{}", format_rational(r)),
            Expected::Greater(r) => write!(f, ">{}", format_rational(r)),
            Expected::Approx(x) => write!(f, "~{x}"),
        }
    }
}
