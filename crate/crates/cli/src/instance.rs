//! Instance files: a TOML document with a `kind`, an optional item count and one `[[agent]]`
//! table per agent holding its name, entitlement and exactly one valuation block.
//!
//! ```toml
//! kind = "indivisible"
//!
//! [[agent]]
//! name = "1"
//! entitlement = "0.2"
//! additive = [2, 1, 0]
//! ```
//!
//! Non-integers are written as quoted strings (`"0.46"`, `"11/5"`, `"0.1-2d"`) so they stay exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;

use fairalloc::analysis::Setting;
use fairalloc::divisible::{DivInstance, DivValuation, Interval, PiecewiseLinear, Point, Segment, StepValuation};
use fairalloc::rational::{format_rational, parse_rational};
use fairalloc::{Bundle, Entitlements, IndivisibleInstance, IndivisibleValuation, Limits, Rational};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, CliResult};
use crate::text::{format_point, parse_point};

/// A parsed instance together with the agents' display names.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub names: Vec<String>,
    pub setting: Setting,
}

impl InstanceFile {
    pub fn n(&self) -> usize {
        self.names.len()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub(crate) enum Num {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct InstanceDoc {
    kind: Spanned<String>,
    items: Option<Spanned<usize>>,
    #[serde(rename = "agent", default)]
    agents: Vec<Spanned<AgentDoc>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    name: Option<String>,
    entitlement: Spanned<Num>,
    additive: Option<Vec<Spanned<Num>>>,
    budget_additive: Option<BudgetDoc>,
    table: Option<Spanned<BTreeMap<String, Spanned<Num>>>>,
    coverage: Option<Spanned<Vec<Vec<usize>>>>,
    step: Option<Vec<Spanned<String>>>,
    thresholds: Option<Vec<Spanned<String>>>,
    power: Option<Spanned<Num>>,
    piecewise_linear: Option<Vec<(Spanned<Num>, Spanned<Num>)>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetDoc {
    values: Vec<Spanned<Num>>,
    budget: Spanned<Num>,
}

/// Turns spans into positioned errors.
pub(crate) struct Src<'a> {
    pub origin: &'a str,
    pub text: &'a str,
}

impl Src<'_> {
    pub fn err(&self, span: Range<usize>, message: impl Into<String>) -> CliError {
        CliError::at(self.origin, self.text, span.start, message)
    }

    pub fn num(&self, v: &Spanned<Num>) -> CliResult<Rational> {
        match v.get_ref() {
            Num::Int(k) => Ok(Rational::from_integer((*k).into())),
            Num::Text(s) => parse_rational(s).map_err(|m| self.err(v.span(), m)),
            Num::Float(x) => Err(self.err(v.span(), format!("write {x} as a quoted string such as \"{x}\" to keep it exact"))),
        }
    }

    pub fn toml<T: serde::de::DeserializeOwned>(&self) -> CliResult<T> {
        toml::from_str(self.text).map_err(|e| {
            let at = e.span().map_or(0, |s| s.start);
            self.err(at..at, e.message().to_string())
        })
    }
}

pub fn parse_instance_str(origin: &str, text: &str) -> CliResult<InstanceFile> {
    let src = Src { origin, text };
    let doc: InstanceDoc = src.toml()?;
    build(&src, doc)
}

pub fn parse_instance(path: &std::path::Path) -> CliResult<InstanceFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_instance_str(&path.display().to_string(), &text)
}

/// Parses an instance embedded in a larger document.
pub(crate) fn build(src: &Src<'_>, doc: InstanceDoc) -> CliResult<InstanceFile> {
    if doc.agents.len() < 2 {
        return Err(src.err(doc.kind.span(), "an instance needs at least two [[agent]] tables"));
    }
    let names: Vec<String> = doc
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| a.get_ref().name.clone().unwrap_or_else(|| (i + 1).to_string()))
        .collect();
    let b: Vec<Rational> = doc.agents.iter().map(|a| src.num(&a.get_ref().entitlement)).collect::<CliResult<_>>()?;
    let b = Entitlements::new(b).map_err(|e| CliError::Invalid(format!("{}: {e}", src.origin)))?;
    let setting = match doc.kind.get_ref().as_str() {
        "indivisible" => {
            let vals: Vec<IndivisibleValuation> =
                doc.agents.iter().map(|a| indivisible(src, a, doc.items.as_ref())).collect::<CliResult<_>>()?;
            let m = match &doc.items {
                Some(m) => *m.get_ref(),
                None => vals[0].item_count(),
            };
            for (a, v) in doc.agents.iter().zip(&vals) {
                if v.item_count() != m {
                    return Err(src.err(a.span(), format!("valuation covers {} items, expected {m}", v.item_count())));
                }
            }
            Setting::Items(IndivisibleInstance::new(m, vals, b).map_err(|e| CliError::Invalid(e.to_string()))?)
        }
        "divisible" => {
            if let Some(m) = &doc.items {
                return Err(src.err(m.span(), "`items` applies to indivisible instances only"));
            }
            let vals: Vec<DivValuation> = doc.agents.iter().map(|a| divisible(src, a)).collect::<CliResult<_>>()?;
            Setting::Good(DivInstance::new(vals, b).map_err(|e| CliError::Invalid(e.to_string()))?)
        }
        other => return Err(src.err(doc.kind.span(), format!("kind must be \"indivisible\" or \"divisible\", not \"{other}\""))),
    };
    Ok(InstanceFile { names, setting })
}

fn one_block(src: &Src<'_>, agent: &Spanned<AgentDoc>) -> CliResult<()> {
    let a = agent.get_ref();
    let count = [
        a.additive.is_some(),
        a.budget_additive.is_some(),
        a.table.is_some(),
        a.coverage.is_some(),
        a.step.is_some(),
        a.thresholds.is_some(),
        a.power.is_some(),
        a.piecewise_linear.is_some(),
    ]
    .iter()
    .filter(|&&x| x)
    .count();
    if count != 1 {
        return Err(src.err(agent.span(), format!("each agent needs exactly one valuation block, found {count}")));
    }
    Ok(())
}

fn indivisible(src: &Src<'_>, agent: &Spanned<AgentDoc>, items: Option<&Spanned<usize>>) -> CliResult<IndivisibleValuation> {
    one_block(src, agent)?;
    let a = agent.get_ref();
    let invalid = |e: fairalloc::Error| src.err(agent.span(), e.to_string());
    if let Some(vs) = &a.additive {
        let values = vs.iter().map(|v| src.num(v)).collect::<CliResult<_>>()?;
        return IndivisibleValuation::additive(values).map_err(invalid);
    }
    if let Some(ba) = &a.budget_additive {
        let values = ba.values.iter().map(|v| src.num(v)).collect::<CliResult<_>>()?;
        return IndivisibleValuation::budget_additive(values, src.num(&ba.budget)?).map_err(invalid);
    }
    let m = items.map(|m| *m.get_ref()).ok_or_else(|| src.err(agent.span(), "table and coverage valuations need `items` at the top level"))?;
    let limits = Limits::default();
    if let Some(t) = &a.table {
        if m > limits.table_items {
            return Err(src.err(t.span(), format!("tables support at most {} items", limits.table_items)));
        }
        let mut values: Vec<Option<Rational>> = vec![None; 1 << m];
        for (key, v) in t.get_ref() {
            let items: Vec<usize> = key
                .trim()
                .trim_start_matches('{')
                .trim_end_matches('}')
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.trim_start_matches('e').parse::<usize>().ok().filter(|&k| k >= 1 && k <= m).map(|k| k - 1))
                .collect::<Option<_>>()
                .ok_or_else(|| src.err(v.span(), format!("bad bundle key \"{key}\"")))?;
            let mask = Bundle::from_items(&items).map_err(|e| src.err(v.span(), e.to_string()))?;
            values[mask.0 as usize] = Some(src.num(v)?);
        }
        let values: Vec<Rational> = values
            .into_iter()
            .enumerate()
            .map(|(s, v)| v.ok_or_else(|| src.err(t.span(), format!("table lacks bundle {}", Bundle(s as u64)))))
            .collect::<CliResult<_>>()?;
        return IndivisibleValuation::table(m, values, &limits).map_err(|e| src.err(t.span(), e.to_string()));
    }
    let groups = a.coverage.as_ref().expect("one block present");
    let zero_based: Vec<Vec<usize>> = groups
        .get_ref()
        .iter()
        .map(|g| g.iter().map(|&k| k.checked_sub(1).filter(|&k| k < m)).collect::<Option<_>>())
        .collect::<Option<_>>()
        .ok_or_else(|| src.err(groups.span(), format!("coverage items must lie in 1..={m}")))?;
    IndivisibleValuation::group_coverage(&zero_based, m, &limits).map_err(|e| src.err(groups.span(), e.to_string()))
}

fn divisible(src: &Src<'_>, agent: &Spanned<AgentDoc>) -> CliResult<DivValuation> {
    one_block(src, agent)?;
    let a = agent.get_ref();
    if let Some(segs) = &a.step {
        let segments = segs.iter().map(|s| segment(src, s)).collect::<CliResult<_>>()?;
        return StepValuation::new(segments).map(DivValuation::Step).map_err(|e| src.err(agent.span(), e.to_string()));
    }
    if let Some(ts) = &a.thresholds {
        let steps = ts.iter().map(|t| threshold(src, t)).collect::<CliResult<Vec<_>>>()?;
        return StepValuation::from_thresholds(&steps).map(DivValuation::Step).map_err(|e| src.err(agent.span(), e.to_string()));
    }
    if let Some(p) = &a.power {
        return DivValuation::power(src.num(p)?).map_err(|e| src.err(p.span(), e.to_string()));
    }
    if let Some(points) = &a.piecewise_linear {
        let pts = points.iter().map(|(x, y)| Ok((src.num(x)?, src.num(y)?))).collect::<CliResult<_>>()?;
        return PiecewiseLinear::new(pts).map(DivValuation::PiecewiseLinear).map_err(|e| src.err(agent.span(), e.to_string()));
    }
    Err(src.err(agent.span(), "divisible agents take a step, thresholds, power or piecewise_linear valuation"))
}

/// `"x: value"`: the value holds from fraction `x` (inclusive) up to the next threshold.
fn threshold(src: &Src<'_>, s: &Spanned<String>) -> CliResult<(Point, Rational)> {
    let bad = |m: &str| src.err(s.span(), format!("threshold \"{}\": {m}", s.get_ref()));
    let (x, value) = s.get_ref().rsplit_once(':').ok_or_else(|| bad("expected `fraction: value`"))?;
    Ok((parse_point(x).map_err(|m| bad(&m))?, parse_rational(value).map_err(|m| bad(&m))?))
}

/// `"(lo, hi]: value"`, or `"{p}: value"` for a single point.
fn segment(src: &Src<'_>, s: &Spanned<String>) -> CliResult<Segment> {
    let bad = |m: &str| src.err(s.span(), format!("segment \"{}\": {m}", s.get_ref()));
    let (span, value) = s.get_ref().rsplit_once(':').ok_or_else(|| bad("expected `interval: value`"))?;
    let value = parse_rational(value).map_err(|m| bad(&m))?;
    let span = span.trim();
    let interval = if let Some(p) = span.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
        Interval::point(parse_point(p).map_err(|m| bad(&m))?)
    } else {
        let lo_closed = match span.chars().next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(bad("interval must open with '[' or '('")),
        };
        let hi_closed = match span.chars().last() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(bad("interval must close with ']' or ')'")),
        };
        let (lo, hi) = span[1..span.len() - 1].split_once(',').ok_or_else(|| bad("expected two endpoints"))?;
        Interval {
            lo: parse_point(lo).map_err(|m| bad(&m))?,
            lo_closed,
            hi: parse_point(hi).map_err(|m| bad(&m))?,
            hi_closed,
        }
    };
    Ok(Segment { span: interval, value })
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn list(values: &[Rational]) -> String {
    let parts: Vec<String> = values.iter().map(|v| quoted(&format_rational(v))).collect();
    format!("[{}]", parts.join(", "))
}

fn segment_text(s: &Segment) -> String {
    let i = &s.span;
    let span = if i.is_point() && i.lo_closed && i.hi_closed {
        format!("{{{}}}", format_point(&i.lo))
    } else {
        let l = if i.lo_closed { '[' } else { '(' };
        let r = if i.hi_closed { ']' } else { ')' };
        format!("{l}{}, {}{r}", format_point(&i.lo), format_point(&i.hi))
    };
    format!("{span}: {}", format_rational(&s.value))
}

/// Canonical text of an instance; parsing it yields the same instance.
pub fn serialize_instance(f: &InstanceFile) -> String {
    let mut out = String::new();
    let b = f.setting.entitlements();
    match &f.setting {
        Setting::Items(inst) => {
            let _ = writeln!(out, "kind = \"indivisible\"\nitems = {}", inst.m);
            for (i, v) in inst.valuations.iter().enumerate() {
                let _ = writeln!(out, "\n[[agent]]\nname = {}\nentitlement = {}", quoted(&f.names[i]), quoted(&format_rational(b.get(i))));
                match v {
                    IndivisibleValuation::Additive(xs) => {
                        let _ = writeln!(out, "additive = {}", list(xs));
                    }
                    IndivisibleValuation::BudgetAdditive { values, budget } => {
                        let _ = writeln!(out, "budget_additive = {{ values = {}, budget = {} }}", list(values), quoted(&format_rational(budget)));
                    }
                    IndivisibleValuation::Table { values, .. } => {
                        let entries: Vec<String> = values
                            .iter()
                            .enumerate()
                            .map(|(s, x)| format!("{} = {}", quoted(&Bundle(s as u64).to_string()), quoted(&format_rational(x))))
                            .collect();
                        let _ = writeln!(out, "table = {{ {} }}", entries.join(", "));
                    }
                }
            }
        }
        Setting::Good(inst) => {
            out.push_str("kind = \"divisible\"\n");
            for (i, v) in inst.valuations.iter().enumerate() {
                let _ = writeln!(out, "\n[[agent]]\nname = {}\nentitlement = {}", quoted(&f.names[i]), quoted(&format_rational(b.get(i))));
                match v {
                    DivValuation::Step(s) => {
                        let segs: Vec<String> = s.segments().iter().map(|x| quoted(&segment_text(x))).collect();
                        let _ = writeln!(out, "step = [{}]", segs.join(", "));
                    }
                    DivValuation::PiecewiseLinear(p) => {
                        let pts: Vec<String> = p
                            .points()
                            .iter()
                            .map(|(x, y)| format!("[{}, {}]", quoted(&format_rational(x)), quoted(&format_rational(y))))
                            .collect();
                        let _ = writeln!(out, "piecewise_linear = [{}]", pts.join(", "));
                    }
                    DivValuation::Power(p) => {
                        let _ = writeln!(out, "power = {}", quoted(&format_rational(p)));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fairalloc::rational::{int, rat};

    const PROP: &str = r#"
kind = "indivisible"

[[agent]]
name = "1"
entitlement = "0.2"
additive = [2, 1, 0]

[[agent]]
entitlement = "0.4"
additive = [0, 2, 1]

[[agent]]
entitlement = "2/5"
additive = ["3", 0, 2]
"#;

    #[test]
    fn parses_an_additive_instance() {
        let f = parse_instance_str("prop", PROP).unwrap();
        assert_eq!(f.names, vec!["1", "2", "3"]);
        let Setting::Items(inst) = &f.setting else { panic!("kind") };
        assert_eq!(inst.m, 3);
        assert_eq!(inst.entitlements.as_slice(), &[rat(1, 5), rat(2, 5), rat(2, 5)]);
        assert_eq!(inst.valuations[2], IndivisibleValuation::additive(vec![int(3), int(0), int(2)]).unwrap());
    }

    #[test]
    fn thirds_are_exact() {
        let text = "kind = \"indivisible\"\n[[agent]]\nentitlement = \"1/3\"\nadditive = [1]\n[[agent]]\nentitlement = \"1/3\"\nadditive = [1]\n[[agent]]\nentitlement = \"1/3\"\nadditive = [1]\n";
        let f = parse_instance_str("t", text).unwrap();
        assert_eq!(f.setting.entitlements().as_slice(), &[rat(1, 3), rat(1, 3), rat(1, 3)]);
    }

    #[test]
    fn errors_carry_positions() {
        let text = PROP.replace("entitlement = \"0.4\"", "entitlement = 0.4");
        match parse_instance_str("f", &text).unwrap_err() {
            CliError::Parse { line, column, .. } => assert_eq!((line, column), (10, 15)),
            e => panic!("{e}"),
        }
        let text = PROP.replace("additive = [0, 2, 1]", "additive = [0, 2, 1");
        assert!(matches!(parse_instance_str("f", &text).unwrap_err(), CliError::Parse { line: 13, column: 1, .. }));
        let text = PROP.replace("\"3\"", "\"3x\"");
        assert!(matches!(parse_instance_str("f", &text).unwrap_err(), CliError::Parse { line: 15, .. }));
    }

    #[test]
    fn entitlement_deficit_is_named() {
        let text = PROP.replace("\"2/5\"", "\"0.3\"");
        let CliError::Invalid(m) = parse_instance_str("f", &text).unwrap_err() else { panic!("kind") };
        assert!(m.contains("1/10"), "{m}");
    }

    #[test]
    fn open_interval_steps() {
        let text = r#"
kind = "divisible"
[[agent]]
entitlement = "1/2"
step = ["{0}: 0", "(0, 1/4): 1", "[1/4, 1]: 2"]
[[agent]]
entitlement = "1/2"
piecewise_linear = [[0, 0], [1, 1]]
"#;
        let f = parse_instance_str("s", text).unwrap();
        let Setting::Good(inst) = &f.setting else { panic!("kind") };
        let DivValuation::Step(s) = &inst.valuations[0] else { panic!("step") };
        assert_eq!(s.segments()[1].span, Interval::open(parse_point("0").unwrap(), parse_point("1/4").unwrap()));
        assert_eq!(parse_instance_str("s", &serialize_instance(&f)).unwrap(), f);
    }

    #[test]
    fn thresholds_with_infinitesimals() {
        let text = r#"
kind = "divisible"
[[agent]]
entitlement = "1/2"
thresholds = ["d: 1", "0.1-2d: 2"]
[[agent]]
entitlement = "1/2"
thresholds = ["1/2: 1"]
"#;
        let f = parse_instance_str("t", text).unwrap();
        let Setting::Good(inst) = &f.setting else { panic!("kind") };
        let v = &inst.valuations[0];
        assert_eq!(inst.value(0, &parse_point("0.1-3d").unwrap()).unwrap(), fairalloc::divisible::DivValue::Exact(int(1)));
        assert_eq!(fairalloc::divisible::div_value(v, &parse_point("0.1-2d").unwrap()).unwrap().exact(), Some(&int(2)));
        assert_eq!(parse_instance_str("t", &serialize_instance(&f)).unwrap(), f);
    }
}
