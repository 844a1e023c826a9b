//! Reproduction corpus. Each case file names the table or appendix it reproduces, points at
//! an instance file, optionally declares an entitlement family and lists `[[expect]]` tables.
//!
//! ```toml
//! source = "tab:WMMSInversion"
//! title = "WMMS inversion"
//! instance = "../instances/wmms_inversion.toml"
//!
//! [[expect]]
//! check = "shares"
//! share = "WMMS"
//! values = ["46", "45", "11/5"]
//! ```
//!
//! Any expectation may carry a `note` explaining a known discrepancy; it is printed with the
//! result but does not change the verdict.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use fairalloc::analysis::{
    check_lower, check_upper, find_inverse_domination, find_inversion, selection_search, self_maximizing_check,
    AnyAllocation, Edge, EdgeVerdict, EntitlementFamily, Search, Setting,
};
use fairalloc::divisible::{
    div_acceptable_cells, div_shares, dominates_cell, wnsw_attitude, DivFraction, DivValue, WnswLevel,
};
use fairalloc::notions::{pareto_dominates, pareto_evidence, verify_ce_prices, Checker, Notion, ShareKind};
use fairalloc::rational::{format_rational, parse_rational};
use fairalloc::shares::external::{intended_partition, ExternalConstruction};
use fairalloc::{Entitlements, IndivisibleValuation, Limits, Rational};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, CliResult};
use crate::instance::{parse_instance, InstanceFile, Num, Src};
use crate::text::{format_value, parse_allocation, parse_fractions, parse_point, Expected};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseDoc {
    source: Option<Spanned<String>>,
    title: Option<String>,
    instance: Option<Spanned<String>>,
    family: Option<Spanned<FamilyDoc>>,
    #[serde(default)]
    expect: Vec<Spanned<toml::Table>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyDoc {
    vectors: Vec<Vec<Spanned<Num>>>,
    /// `[p, q, i]`, 1-based: vector `p` improves on vector `q` for agent `i`.
    edges: Vec<Spanned<[usize; 3]>>,
}

fn yes() -> bool {
    true
}

/// One expected result. Agents and vectors are 1-based; `b` defaults to the instance's entitlements.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case", deny_unknown_fields)]
pub(crate) enum Check {
    Shares {
        share: String,
        b: Option<Vec<Num>>,
        agents: Option<Vec<usize>>,
        values: Vec<String>,
        fractions: Option<Vec<String>>,
    },
    Acceptable {
        notion: String,
        b: Option<Vec<Num>>,
        count: Option<usize>,
        allocations: Option<Vec<String>>,
        includes: Option<Vec<String>>,
        excludes: Option<Vec<String>>,
        profiles: Option<Vec<Vec<String>>>,
    },
    Inversion {
        notion: String,
        b: Vec<Num>,
        b_prime: Vec<Num>,
        agent: usize,
        #[serde(default = "yes")]
        found: bool,
        under_b: Option<String>,
        under_b_prime: Option<String>,
    },
    InverseDomination {
        notion: String,
        b: Vec<Num>,
        b_prime: Vec<Num>,
        agent: usize,
        #[serde(default)]
        pareto: bool,
        #[serde(default = "yes")]
        found: bool,
        threshold: Option<String>,
        below: Option<String>,
        above: Option<String>,
    },
    Monotone {
        property: String,
        notion: String,
        b: Vec<Num>,
        b_prime: Vec<Num>,
        agent: usize,
        holds: bool,
    },
    Selection {
        notion: String,
        exists: bool,
    },
    Pareto {
        notion: String,
        b: Option<Vec<Num>>,
        dominator: Option<String>,
        all_optimal: Option<bool>,
        any_optimal: Option<bool>,
    },
    Prices {
        b: Option<Vec<Num>>,
        allocation: String,
        prices: Vec<Num>,
        #[serde(default)]
        cheapest: bool,
        #[serde(default = "yes")]
        supported: bool,
    },
    Welfare {
        notion: String,
        b: Option<Vec<Num>>,
        class: Option<String>,
        proportional_acceptable: Option<bool>,
        proportional: Option<String>,
        min: Option<String>,
        max: Option<String>,
    },
    Values {
        agent: usize,
        at: Vec<String>,
        values: Vec<String>,
    },
    External {
        q: u32,
        epsilon: String,
        bundle_values: Vec<String>,
        mms_drop: String,
    },
    SelfMax {
        share: String,
        agent: usize,
        report: Vec<Num>,
        self_maximizing: bool,
        share_true: Option<String>,
        share_alt: Option<String>,
        worst_allocation: Option<String>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Expectation {
    pub check: Check,
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Case {
    /// File stem of the case.
    pub id: String,
    pub source: Option<String>,
    pub title: Option<String>,
    pub instance: Option<InstanceFile>,
    pub family: Option<EntitlementFamily>,
    pub(crate) expectations: Vec<Expectation>,
}

impl Case {
    pub fn expectation_count(&self) -> usize {
        self.expectations.len()
    }
}

fn num(n: &Num) -> Result<Rational, String> {
    match n {
        Num::Int(k) => Ok(Rational::from_integer((*k).into())),
        Num::Text(s) => parse_rational(s),
        Num::Float(x) => Err(format!("write {x} as a quoted string to keep it exact")),
    }
}

fn vector(v: &[Num]) -> Result<Entitlements, String> {
    let b = v.iter().map(num).collect::<Result<Vec<_>, _>>()?;
    Entitlements::new(b).map_err(|e| e.to_string())
}

pub fn load_case(path: &Path) -> CliResult<Case> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let origin = path.display().to_string();
    let src = Src { origin: &origin, text: &text };
    let doc: CaseDoc = src.toml()?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let instance = match &doc.instance {
        Some(p) => Some(parse_instance(&dir.join(p.get_ref())).map_err(|e| match e {
            CliError::Io(m) => src.err(p.span(), m),
            e => e,
        })?),
        None => None,
    };
    let family = match &doc.family {
        Some(f) => {
            let Some(inst) = &instance else {
                return Err(src.err(f.span(), "a family needs an instance"));
            };
            let fd = f.get_ref();
            let vectors = fd
                .vectors
                .iter()
                .map(|v| {
                    let b = v.iter().map(|x| src.num(x)).collect::<CliResult<Vec<_>>>()?;
                    let at = v.first().map_or(f.span(), |x| x.span());
                    Entitlements::new(b).map_err(|e| src.err(at, e.to_string()))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let mut edges = Vec::new();
            for e in &fd.edges {
                let [p, q, i] = *e.get_ref();
                if p == 0 || q == 0 || i == 0 || p > vectors.len() || q > vectors.len() || i > inst.n() {
                    return Err(src.err(e.span(), "edge entries are 1-based vector, vector, agent"));
                }
                edges.push((p - 1, q - 1, i - 1));
            }
            Some(EntitlementFamily::new(inst.setting.clone(), vectors, edges).map_err(|e| src.err(f.span(), e.to_string()))?)
        }
        None => None,
    };
    let mut expectations = Vec::new();
    for t in &doc.expect {
        let mut table = t.get_ref().clone();
        let note = match table.remove("note") {
            Some(toml::Value::String(s)) => Some(s),
            Some(_) => return Err(src.err(t.span(), "note must be a string")),
            None => None,
        };
        let check: Check = toml::Value::Table(table).try_into().map_err(|e| src.err(t.span(), e.to_string().trim().to_string()))?;
        expectations.push(Expectation { check, note });
    }
    let id = path.file_stem().map_or_else(|| origin.clone(), |s| s.to_string_lossy().into_owned());
    Ok(Case {
        id,
        source: doc.source.map(|s| s.into_inner()),
        title: doc.title,
        instance,
        family,
        expectations,
    })
}

/// The verdict on one expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub case: String,
    pub source: String,
    pub label: String,
    pub pass: bool,
    pub detail: String,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusReport {
    pub results: Vec<CheckResult>,
}

impl CorpusReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub limits: Limits,
    pub tolerance: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { limits: Limits::default(), tolerance: fairalloc::divisible::TOLERANCE }
    }
}

/// Loads every case under `dir/cases` whose id or source contains `selector`, runs the cases in
/// parallel and reports in id order. Without a selector the source index is checked too.
pub fn run_corpus(dir: &Path, selector: Option<&str>, opts: &RunOptions) -> CliResult<CorpusReport> {
    let cases_dir = dir.join("cases");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&cases_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", cases_dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    let cases = paths.iter().map(|p| load_case(p)).collect::<CliResult<Vec<_>>>()?;
    let chosen: Vec<&Case> = cases
        .iter()
        .filter(|c| selector.map_or(true, |s| c.id.contains(s) || c.source.as_deref().is_some_and(|x| x.contains(s))))
        .collect();
    if chosen.is_empty() {
        return Err(CliError::Invalid(format!("no corpus case matches `{}`", selector.unwrap_or(""))));
    }
    let mut results: Vec<CheckResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = chosen.iter().map(|c| scope.spawn(move || run_case(c, opts))).collect();
        handles.into_iter().flat_map(|h| h.join().expect("case runner panicked")).collect()
    });
    if selector.is_none() {
        results.extend(check_index(dir, &cases)?);
    }
    Ok(CorpusReport { results })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexDoc {
    sources: Vec<String>,
}

/// Every listed source is reproduced by at least one case.
fn check_index(dir: &Path, cases: &[Case]) -> CliResult<Vec<CheckResult>> {
    let path = dir.join("index.toml");
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let origin = path.display().to_string();
    let index: IndexDoc = Src { origin: &origin, text: &text }.toml()?;
    let covered: HashSet<&str> = cases.iter().filter_map(|c| c.source.as_deref()).collect();
    Ok(index
        .sources
        .iter()
        .map(|s| {
            let pass = covered.contains(s.as_str());
            CheckResult {
                case: "index".into(),
                source: s.clone(),
                label: "covered by a case".into(),
                pass,
                detail: if pass { "yes".into() } else { "no case reproduces it".into() },
                note: None,
            }
        })
        .collect())
}

pub fn run_case(case: &Case, opts: &RunOptions) -> Vec<CheckResult> {
    let ctx = Ctx { case, limits: opts.limits, tol: opts.tolerance };
    case.expectations
        .iter()
        .map(|e| {
            let (pass, detail) = match ctx.run(&e.check) {
                Ok(r) => r,
                Err(m) => (false, format!("error: {m}")),
            };
            CheckResult {
                case: case.id.clone(),
                source: case.source.clone().unwrap_or_default(),
                label: label(&e.check),
                pass,
                detail,
                note: e.note.clone(),
            }
        })
        .collect()
}

fn nums_text(v: &[Num]) -> String {
    let parts: Vec<String> = v
        .iter()
        .map(|n| match n {
            Num::Int(k) => k.to_string(),
            Num::Float(x) => x.to_string(),
            Num::Text(s) => s.clone(),
        })
        .collect();
    format!("({})", parts.join(", "))
}

fn at(b: &Option<Vec<Num>>) -> String {
    b.as_ref().map_or_else(String::new, |v| format!(" at {}", nums_text(v)))
}

fn label(c: &Check) -> String {
    match c {
        Check::Shares { share, b, .. } => format!("{share} shares{}", at(b)),
        Check::Acceptable { notion, b, .. } => format!("{notion} acceptable set{}", at(b)),
        Check::Inversion { notion, b, b_prime, agent, .. } => {
            format!("{notion} inversion for agent {agent}, {} over {}", nums_text(b), nums_text(b_prime))
        }
        Check::InverseDomination { notion, b, b_prime, agent, pareto, .. } => format!(
            "{notion} inverse domination{} for agent {agent}, {} over {}",
            if *pareto { " (Pareto)" } else { "" },
            nums_text(b),
            nums_text(b_prime)
        ),
        Check::Monotone { property, notion, b, b_prime, agent, .. } => {
            format!("{notion} {property} monotonicity for agent {agent}, {} over {}", nums_text(b), nums_text(b_prime))
        }
        Check::Selection { notion, .. } => format!("{notion} monotone selection over the family"),
        Check::Pareto { notion, b, .. } => format!("{notion} Pareto evidence{}", at(b)),
        Check::Prices { allocation, .. } => format!("CE prices for {allocation}"),
        Check::Welfare { notion, b, .. } => format!("{notion} welfare attitude{}", at(b)),
        Check::Values { agent, .. } => format!("values of agent {agent}"),
        Check::External { q, .. } => format!("external construction with q = {q}"),
        Check::SelfMax { share, agent, report, .. } => format!("{share} self-maximizing for agent {agent} reporting {}", nums_text(report)),
    }
}

struct Ctx<'a> {
    case: &'a Case,
    limits: Limits,
    tol: f64,
}

type Outcome = Result<(bool, String), String>;

fn notion_of(s: &str) -> Result<Notion, String> {
    s.parse().map_err(|e: fairalloc::Error| e.to_string())
}

fn share_of(s: &str) -> Result<ShareKind, String> {
    match notion_of(s)? {
        Notion::Share(k) => Ok(k),
        n => Err(format!("{n} is not a share")),
    }
}

fn expected(s: &str) -> Result<Expected, String> {
    Expected::parse(s)
}

fn opt_matches(e: &Option<String>, v: Option<&DivValue>, tol: f64) -> Result<bool, String> {
    match (e, v) {
        (None, _) => Ok(true),
        (Some(e), Some(v)) => Ok(expected(e)?.matches(v, tol)),
        (Some(_), None) => Ok(false),
    }
}

fn fraction_matches(e: &str, f: &DivFraction, tol: f64) -> Result<bool, String> {
    let e = e.trim();
    Ok(match f {
        DivFraction::Exact { point, closed } => {
            let (open, body) = match e.strip_prefix('>') {
                Some(b) => (true, b),
                None => (false, e),
            };
            parse_point(body)? == *point && *closed != open
        }
        DivFraction::Approx(x) => expected(e)?.matches(&DivValue::Approx(*x), tol),
    })
}

fn list<T: std::fmt::Display>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn brief(xs: &[AnyAllocation]) -> String {
    const SHOWN: usize = 4;
    let head = list(xs.iter().take(SHOWN));
    if xs.len() > SHOWN {
        format!("{head}, ... ({} total)", xs.len())
    } else {
        head
    }
}

fn level_value(l: &WnswLevel) -> DivValue {
    match &l.key {
        Some(k) => DivValue::Exact(k.product.clone()),
        None => DivValue::Approx(l.product()),
    }
}

impl Ctx<'_> {
    fn setting(&self) -> Result<&Setting, String> {
        self.case.instance.as_ref().map(|f| &f.setting).ok_or_else(|| "this check needs an instance".to_string())
    }

    fn under(&self, b: &Option<Vec<Num>>) -> Result<Setting, String> {
        let s = self.setting()?;
        match b {
            Some(v) => s.with_entitlements(&vector(v)?).map_err(|e| e.to_string()),
            None => Ok(s.clone()),
        }
    }

    fn agent(&self, k: usize) -> Result<usize, String> {
        let n = self.setting()?.n();
        if k == 0 || k > n {
            return Err(format!("agent {k} is outside 1..={n}"));
        }
        Ok(k - 1)
    }

    fn edge(&self, b: &[Num], bp: &[Num], agent: usize) -> Result<Edge, String> {
        Edge::new(vector(b)?, vector(bp)?, self.agent(agent)?).map_err(|e| e.to_string())
    }

    fn allocation(&self, s: &Setting, text: &str) -> Result<AnyAllocation, String> {
        Ok(match s {
            Setting::Items(inst) => AnyAllocation::Items(parse_allocation(text, inst.n(), inst.m)?),
            Setting::Good(inst) => AnyAllocation::Fractions(parse_fractions(text, inst.n())?),
        })
    }

    fn run(&self, c: &Check) -> Outcome {
        let e = |x: fairalloc::Error| x.to_string();
        let (limits, tol) = (&self.limits, self.tol);
        match c {
            Check::Shares { share, b, agents, values, fractions } => {
                let s = self.under(b)?;
                let kind = share_of(share)?;
                let agents: Vec<usize> = match agents {
                    Some(a) => a.iter().map(|&k| self.agent(k)).collect::<Result<_, _>>()?,
                    None => (0..s.n()).collect(),
                };
                if values.len() != agents.len() {
                    return Err(format!("{} values for {} agents", values.len(), agents.len()));
                }
                let mut got_fractions = Vec::new();
                let got: Vec<DivValue> = match &s {
                    Setting::Items(inst) => {
                        if fractions.is_some() {
                            return Err("fractions apply to a divisible good".into());
                        }
                        let sh = Checker::new(inst, *limits).and_then(|c| c.shares(kind)).map_err(e)?;
                        agents.iter().map(|&i| DivValue::Exact(sh[i].clone())).collect()
                    }
                    Setting::Good(inst) => {
                        let mut out = Vec::new();
                        for &i in &agents {
                            let d = div_shares(inst, i).map_err(e)?;
                            out.push(match kind {
                                ShareKind::Prop => d.prop,
                                ShareKind::Aps | ShareKind::Pess => d.aps,
                                ShareKind::MmsMinus => d.mms_minus,
                                ShareKind::Wmms => d.wmms.value,
                            });
                            got_fractions.push(d.wmms.fraction);
                        }
                        out
                    }
                };
                let mut ok = true;
                for (x, v) in values.iter().zip(&got) {
                    ok &= expected(x)?.matches(v, tol);
                }
                let mut detail = format!("got {}", list(got.iter().map(format_value)));
                if let Some(fs) = fractions {
                    if kind != ShareKind::Wmms || fs.len() != agents.len() {
                        return Err("fractions need the WMMS share and one entry per agent".into());
                    }
                    for (x, f) in fs.iter().zip(&got_fractions) {
                        ok &= fraction_matches(x, f, tol)?;
                    }
                    detail += &format!("; fractions {}", list(got_fractions.iter().map(|f| f.to_string().replace('δ', "d"))));
                }
                Ok((ok, detail))
            }
            Check::Acceptable { notion, b, count, allocations, includes, excludes, profiles } => {
                let s = self.under(b)?;
                let notion = notion_of(notion)?;
                let side = s.acceptable(notion, limits).map_err(e)?;
                let members: Vec<AnyAllocation> = side.members.iter().map(|m| m.allocation.clone()).collect();
                let mut ok = count.map_or(true, |c| c == members.len());
                let mut detail = format!("{} acceptable: {}", members.len(), brief(&members));
                if let Some(list) = allocations {
                    let want: HashSet<AnyAllocation> = list.iter().map(|t| self.allocation(&s, t)).collect::<Result<_, _>>()?;
                    match &s {
                        Setting::Items(_) => ok &= members.iter().cloned().collect::<HashSet<_>>() == want,
                        Setting::Good(inst) => {
                            let cells = div_acceptable_cells(notion, inst, limits).map_err(e)?;
                            let points = cells.iter().all(|c| c.x_range.iter().all(|(lo, hi)| lo.exact().is_some() && lo == hi));
                            if !points {
                                detail += "; some acceptable cell is not a single allocation";
                            }
                            let reps: HashSet<AnyAllocation> =
                                cells.iter().map(|c| AnyAllocation::Fractions(c.representative.clone())).collect();
                            ok &= points && reps == want;
                        }
                    }
                }
                for t in includes.iter().flatten() {
                    ok &= s.accepts(notion, &self.allocation(&s, t)?, limits).map_err(e)?;
                }
                for t in excludes.iter().flatten() {
                    ok &= !s.accepts(notion, &self.allocation(&s, t)?, limits).map_err(e)?;
                }
                if let Some(ps) = profiles {
                    let want: Vec<Vec<Expected>> =
                        ps.iter().map(|p| p.iter().map(|x| expected(x)).collect()).collect::<Result<_, _>>()?;
                    let fits = |vals: &[DivValue], p: &[Expected]| vals.len() == p.len() && p.iter().zip(vals).all(|(x, v)| x.matches(v, tol));
                    ok &= side.members.iter().all(|m| want.iter().any(|p| fits(&m.values, p)))
                        && want.iter().all(|p| side.members.iter().any(|m| fits(&m.values, p)));
                    let got: Vec<String> = side.members.iter().map(|m| format!("({})", list(m.values.iter().map(format_value)))).collect();
                    detail += &format!("; profiles {}", got.join(" "));
                }
                Ok((ok, detail))
            }
            Check::Inversion { notion, b, b_prime, agent, found, under_b, under_b_prime } => {
                let s = self.setting()?;
                let notion = notion_of(notion)?;
                let edge = self.edge(b, b_prime, *agent)?;
                match find_inversion(notion, s, &edge, limits).map_err(e)? {
                    Search::Found(w) => {
                        let valid = w.validate(notion, s, &edge, limits).map_err(e)?;
                        let ok = *found
                            && valid
                            && opt_matches(under_b, Some(&w.best_under_b.value), tol)?
                            && opt_matches(under_b_prime, Some(&w.worst_under_b_prime.value), tol)?;
                        Ok((
                            ok,
                            format!(
                                "best {} at {} under b, worst {} at {} under b'{}",
                                w.best_under_b.value,
                                w.best_under_b.allocation,
                                w.worst_under_b_prime.value,
                                w.worst_under_b_prime.allocation,
                                if valid { "" } else { " (did not re-validate)" }
                            ),
                        ))
                    }
                    Search::Absent => Ok((!found, "no inversion".into())),
                    Search::Inapplicable => Ok((false, "an acceptable set is empty".into())),
                }
            }
            Check::InverseDomination { notion, b, b_prime, agent, pareto, found, threshold, below, above } => {
                let s = self.setting()?;
                let notion = notion_of(notion)?;
                let edge = self.edge(b, b_prime, *agent)?;
                match find_inverse_domination(notion, s, &edge, *pareto, limits).map_err(e)? {
                    Search::Found(w) => {
                        let valid = w.validate(notion, s, &edge, limits).map_err(e)?;
                        let ok = *found
                            && valid
                            && opt_matches(threshold, Some(&w.threshold), tol)?
                            && opt_matches(below, w.below.as_ref().map(|v| &v.value), tol)?
                            && opt_matches(above, w.above.as_ref().map(|v| &v.value), tol)?;
                        let side = |v: &Option<fairalloc::analysis::Valued>| {
                            v.as_ref().map_or_else(|| "none".to_string(), |v| format!("{} at {}", v.value, v.allocation))
                        };
                        Ok((
                            ok,
                            format!(
                                "threshold {}, below {}, above {}{}",
                                w.threshold,
                                side(&w.below),
                                side(&w.above),
                                if valid { "" } else { " (did not re-validate)" }
                            ),
                        ))
                    }
                    Search::Absent => Ok((!found, "no inverse domination".into())),
                    Search::Inapplicable => Ok((false, "an acceptable set is empty".into())),
                }
            }
            Check::Monotone { property, notion, b, b_prime, agent, holds } => {
                let s = self.setting()?;
                let notion = notion_of(notion)?;
                let edge = self.edge(b, b_prime, *agent)?;
                let j = match property.as_str() {
                    "upper" => check_upper(notion, s, &edge, limits),
                    "lower" => check_lower(notion, s, &edge, false, limits),
                    "lower_pareto" => check_lower(notion, s, &edge, true, limits),
                    p => return Err(format!("property `{p}` is not upper, lower or lower_pareto")),
                }
                .map_err(e)?;
                let ok = match j.verdict {
                    EdgeVerdict::Holds => *holds,
                    EdgeVerdict::Fails => !holds,
                    EdgeVerdict::Inapplicable => false,
                };
                Ok((ok, format!("{:?}", j.verdict).to_lowercase()))
            }
            Check::Selection { notion, exists } => {
                let family = self.case.family.as_ref().ok_or("this check needs a [family]")?;
                let r = selection_search(notion_of(notion)?, family, limits).map_err(e)?;
                let sizes = list(r.sides.iter().map(|s| s.members.len()));
                if r.exists() {
                    Ok((*exists, format!("a monotone selection exists; acceptable set sizes {sizes}")))
                } else {
                    let exhaustive = r.refutation_is_exhaustive(family);
                    Ok((
                        !exists && exhaustive,
                        format!(
                            "no monotone selection; {} nogoods{}; acceptable set sizes {sizes}",
                            r.refutation.len(),
                            if exhaustive { ", refutation exhaustive" } else { ", refutation incomplete" }
                        ),
                    ))
                }
            }
            Check::Pareto { notion, b, dominator, all_optimal, any_optimal } => {
                let s = self.under(b)?;
                let notion = notion_of(notion)?;
                let mut ok = true;
                let mut detail = Vec::new();
                if let Some(d) = dominator {
                    let dom = self.allocation(&s, d)?;
                    let all = match (&s, &dom) {
                        (Setting::Items(inst), AnyAllocation::Items(a)) => {
                            let side = s.acceptable(notion, limits).map_err(e)?;
                            detail.push(format!("{} acceptable", side.members.len()));
                            side.members.iter().all(|m| match &m.allocation {
                                AnyAllocation::Items(x) => pareto_dominates(inst, a, x),
                                AnyAllocation::Fractions(_) => false,
                            }) && !side.is_empty()
                        }
                        (Setting::Good(inst), AnyAllocation::Fractions(a)) => {
                            let cells = div_acceptable_cells(notion, inst, limits).map_err(e)?;
                            detail.push(format!("{} acceptable cells", cells.len()));
                            let mut all = !cells.is_empty();
                            for c in &cells {
                                all &= dominates_cell(inst, a, c).map_err(e)?;
                            }
                            all
                        }
                        _ => unreachable!("allocation parsed for its own setting"),
                    };
                    detail.push(format!("{d} dominates all: {all}"));
                    ok &= all;
                }
                if all_optimal.is_some() || any_optimal.is_some() {
                    let Setting::Items(inst) = &s else {
                        return Err("Pareto optimality over a divisible good is not enumerable".into());
                    };
                    let ev = pareto_evidence(notion, inst, limits).map_err(e)?;
                    let any = ev.acceptable > 0 && !ev.no_optimal_member;
                    ok &= all_optimal.map_or(true, |x| x == ev.all_optimal) && any_optimal.map_or(true, |x| x == any);
                    detail.push(format!("all optimal: {}, some optimal: {any}", ev.all_optimal));
                }
                Ok((ok, detail.join("; ")))
            }
            Check::Prices { b, allocation, prices, cheapest, supported } => {
                let s = self.under(b)?;
                let Setting::Items(inst) = &s else {
                    return Err("price checks apply to indivisible items".into());
                };
                let a = parse_allocation(allocation, inst.n(), inst.m)?;
                let p = prices.iter().map(num).collect::<Result<Vec<_>, _>>()?;
                let got = verify_ce_prices(inst, &a, &p, *cheapest);
                Ok((got == *supported, format!("prices {} support it: {got}", list(p.iter().map(format_rational)))))
            }
            Check::Welfare { notion, b, class, proportional_acceptable, proportional, min, max } => {
                let s = self.under(b)?;
                let Setting::Good(inst) = &s else {
                    return Err("welfare attitudes apply to a divisible good".into());
                };
                let ev = wnsw_attitude(notion_of(notion)?, inst, limits).map_err(e)?;
                let got_class = format!("{:?}", ev.class).to_lowercase();
                let ok = class.as_ref().map_or(true, |c| c.to_lowercase() == got_class)
                    && proportional_acceptable.map_or(true, |p| p == ev.proportional_acceptable)
                    && opt_matches(proportional, Some(&level_value(&ev.proportional)), tol)?
                    && opt_matches(min, ev.min.as_ref().map(level_value).as_ref(), tol)?
                    && opt_matches(max, ev.max.as_ref().map(level_value).as_ref(), tol)?;
                let show = |l: &Option<WnswLevel>| l.as_ref().map_or_else(|| "none".into(), |l| level_value(l).to_string());
                Ok((
                    ok,
                    format!(
                        "class {got_class}, proportional {} ({}), acceptable range {} .. {}",
                        level_value(&ev.proportional),
                        if ev.proportional_acceptable { "acceptable" } else { "not acceptable" },
                        show(&ev.min),
                        show(&ev.max)
                    ),
                ))
            }
            Check::Values { agent, at, values } => {
                let Setting::Good(inst) = self.setting()? else {
                    return Err("value checks apply to a divisible good".into());
                };
                let i = self.agent(*agent)?;
                if at.len() != values.len() {
                    return Err("`at` and `values` differ in length".into());
                }
                let mut ok = true;
                let mut got = Vec::new();
                for (x, v) in at.iter().zip(values) {
                    let val = inst.value(i, &parse_point(x)?).map_err(e)?;
                    ok &= expected(v)?.matches(&val, tol);
                    got.push(val);
                }
                Ok((ok, format!("got {}", list(got.iter().map(format_value)))))
            }
            Check::External { q, epsilon, bundle_values, mms_drop } => {
                let eps = parse_rational(epsilon)?;
                let before = ExternalConstruction::new(*q, Rational::from_integer(0.into())).map_err(e)?;
                let after = ExternalConstruction::new(*q, eps.clone()).map_err(e)?;
                let (vb, va) = (before.valuation(), after.valuation());
                if bundle_values.len() != 3 {
                    return Err("bundle_values needs one entry per agent".into());
                }
                let mut ok = true;
                let mut got = Vec::new();
                for (agent, want) in bundle_values.iter().enumerate() {
                    let want = parse_rational(want)?;
                    let bundles = intended_partition(agent);
                    ok &= bundles.iter().all(|&s| vb.value(s) == want);
                    // The adjustment leaves the first two agents' intended bundles untouched.
                    if agent < 2 {
                        ok &= bundles.iter().all(|&s| va.value(s) == want);
                    }
                    got.push(format!("{} bundles of {}", bundles.len(), format_rational(&vb.value(bundles[0]))));
                }
                let drop = before.mms_six().map_err(e)?.value - after.mms_six().map_err(e)?.value;
                ok &= drop == parse_rational(mms_drop)?;
                got.push(format!("MMS drop {}", format_rational(&drop)));
                Ok((ok, got.join("; ")))
            }
            Check::SelfMax { share, agent, report, self_maximizing, share_true, share_alt, worst_allocation } => {
                let Setting::Items(inst) = self.setting()? else {
                    return Err("self-maximizing checks apply to indivisible items".into());
                };
                let i = self.agent(*agent)?;
                let alt = report.iter().map(num).collect::<Result<Vec<_>, _>>()?;
                let v_alt = IndivisibleValuation::additive(alt).map_err(e)?;
                let kind = share_of(share)?;
                let b = inst.entitlements.get(i);
                let r = self_maximizing_check(kind, &inst.valuations[i], &v_alt, b, Some((inst, i)), limits).map_err(e)?;
                let worst = r.worst_allocation.as_ref().map(|(_, v)| DivValue::Exact(v.clone()));
                let ok = r.self_maximizing() == *self_maximizing
                    && opt_matches(share_true, Some(&DivValue::Exact(r.share_true.clone())), tol)?
                    && opt_matches(share_alt, Some(&DivValue::Exact(r.share_alt.clone())), tol)?
                    && opt_matches(worst_allocation, worst.as_ref(), tol)?;
                Ok((
                    ok,
                    format!(
                        "self-maximizing {}, true share {}, reported share {}, worst allocation value {}",
                        r.self_maximizing(),
                        format_rational(&r.share_true),
                        format_rational(&r.share_alt),
                        worst.map_or_else(|| "none".into(), |w| w.to_string())
                    ),
                ))
            }
        }
    }
}
