//! The `shares`, `check`, `enumerate`, `paradox` and `reproduce` commands. Each returns a
//! report and the process exit code: 0 on success, 1 when the checked property fails.

use std::path::{Path, PathBuf};

use fairalloc::analysis::{
    monotonicity_report, selection_search, AnyAllocation, Edge, EdgeVerdict, Search, Setting, PRINCIPAL,
};
use fairalloc::divisible::{div_check, div_shares, DivValue};
use fairalloc::notions::{Checker, Notion, ShareKind};
use fairalloc::rational::format_rational;
use fairalloc::{Entitlements, Limits};

use crate::corpus::{load_case, run_corpus, RunOptions};
use crate::error::{CliError, CliResult};
use crate::instance::InstanceFile;
use crate::output::Report;
use crate::text::{format_value, parse_allocation, parse_fractions};

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub limits: Limits,
    pub tolerance: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { limits: Limits::default(), tolerance: fairalloc::divisible::TOLERANCE }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

const SHARES: [ShareKind; 5] = [ShareKind::Prop, ShareKind::Aps, ShareKind::Pess, ShareKind::Wmms, ShareKind::MmsMinus];

fn join<T: std::fmt::Display>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn vector_text(b: &Entitlements) -> String {
    format!("({})", join(b.as_slice().iter().map(format_rational)))
}

fn share_kinds(notion: Option<Notion>) -> CliResult<Vec<ShareKind>> {
    match notion {
        None => Ok(SHARES.to_vec()),
        Some(Notion::Share(k)) => Ok(vec![k]),
        Some(n) => Err(CliError::Invalid(format!("{n} is not a share"))),
    }
}

pub fn shares(file: &InstanceFile, notion: Option<Notion>, opts: &Options) -> CliResult<Outcome> {
    let kinds = share_kinds(notion)?;
    let mut report = Report::default();
    let mut emit = |name: String, values: Vec<String>| {
        for (i, v) in values.iter().enumerate() {
            let fields = [("kind", name.clone()), ("agent", file.names[i].clone()), ("value", v.clone())];
            if i == 0 {
                report.push("share", format!("{name}: {}", values.join(", ")), &fields);
            } else {
                report.push_machine("share", &fields);
            }
        }
    };
    match &file.setting {
        Setting::Items(inst) => {
            let checker = Checker::new(inst, opts.limits)?;
            for k in kinds {
                let values = checker.shares(k)?;
                emit(Notion::Share(k).to_string(), values.iter().map(format_rational).collect());
            }
        }
        Setting::Good(inst) => {
            let all = (0..inst.n()).map(|i| div_shares(inst, i)).collect::<fairalloc::Result<Vec<_>>>()?;
            for k in kinds {
                let values: Vec<String> = all
                    .iter()
                    .map(|s| match k {
                        ShareKind::Prop => format_value(&s.prop),
                        ShareKind::Aps | ShareKind::Pess => format_value(&s.aps),
                        ShareKind::MmsMinus => format_value(&s.mms_minus),
                        ShareKind::Wmms => format_value(&s.wmms.value),
                    })
                    .collect();
                emit(Notion::Share(k).to_string(), values);
                if k == ShareKind::Wmms {
                    let fractions = all.iter().map(|s| s.wmms.fraction.to_string().replace('δ', "d")).collect();
                    emit("WMMS fraction".into(), fractions);
                }
            }
        }
    }
    Ok(Outcome { report, code: 0 })
}

fn parse_any(setting: &Setting, text: &str) -> CliResult<AnyAllocation> {
    match setting {
        Setting::Items(inst) => parse_allocation(text, inst.n(), inst.m).map(AnyAllocation::Items),
        Setting::Good(inst) => parse_fractions(text, inst.n()).map(AnyAllocation::Fractions),
    }
    .map_err(CliError::Invalid)
}

pub fn check(file: &InstanceFile, notion: Notion, allocation: &str, opts: &Options) -> CliResult<Outcome> {
    let a = parse_any(&file.setting, allocation)?;
    let mut report = Report::default();
    let values = file.setting.values(&a)?;
    let (acceptable, prices) = match (&file.setting, &a) {
        (Setting::Items(inst), AnyAllocation::Items(x)) => {
            let v = Checker::new(inst, opts.limits)?.check(notion, x)?;
            (v.acceptable, v.certificate.map(|c| c.prices))
        }
        (Setting::Good(inst), AnyAllocation::Fractions(x)) => (div_check(notion, inst, x)?, None),
        _ => unreachable!("allocation parsed for its own setting"),
    };
    let verdict = if acceptable { "acceptable" } else { "not acceptable" };
    report.push(
        "verdict",
        format!("{notion}: {a} is {verdict}"),
        &[("notion", notion.to_string()), ("allocation", a.to_string()), ("acceptable", acceptable.to_string())],
    );
    let values_text = join(values.iter().map(format_value));
    report.push("values", format!("values: {values_text}"), &[("values", values_text.clone())]);
    if let Some(p) = prices {
        let p = join(p.iter().map(format_rational));
        report.push("prices", format!("prices: {p}"), &[("prices", p.clone())]);
    }
    Ok(Outcome { report, code: if acceptable { 0 } else { 1 } })
}

fn value_range(lo: &DivValue, hi: &DivValue) -> String {
    if lo == hi {
        format_value(lo)
    } else {
        format!("{}..{}", format_value(lo), format_value(hi))
    }
}

pub fn enumerate(file: &InstanceFile, notion: Notion, pareto_front: bool, opts: &Options) -> CliResult<Outcome> {
    let side = file.setting.acceptable(notion, &opts.limits)?;
    let mut report = Report::default();
    let what = match file.setting {
        Setting::Items(_) => "allocations",
        Setting::Good(_) => "cells",
    };
    report.push(
        "summary",
        format!("{notion}: {} acceptable {what}, {} on the Pareto front", side.members.len(), side.pareto_front.len()),
        &[
            ("notion", notion.to_string()),
            ("acceptable", side.members.len().to_string()),
            ("front", side.pareto_front.len().to_string()),
        ],
    );
    for (k, m) in side.members.iter().enumerate() {
        let front = side.pareto_front.contains(&k);
        if pareto_front && !front {
            continue;
        }
        let values = join(m.low.iter().zip(&m.high).map(|(lo, hi)| value_range(lo, hi)));
        let mark = if front { "  [front]" } else { "" };
        report.push(
            "member",
            format!("{}  values {values}{mark}", m.allocation),
            &[("allocation", m.allocation.to_string()), ("values", values.clone()), ("front", front.to_string())],
        );
    }
    Ok(Outcome { report, code: 0 })
}

fn verdict_text(v: EdgeVerdict) -> &'static str {
    match v {
        EdgeVerdict::Holds => "holds",
        EdgeVerdict::Fails => "fails",
        EdgeVerdict::Inapplicable => "n/a",
    }
}

fn search_text<T>(s: &Search<T>) -> &'static str {
    match s {
        Search::Found(_) => "found",
        Search::Absent => "none",
        Search::Inapplicable => "n/a",
    }
}

/// Monotonicity of every declared edge of a family file, then the monotone-selection search.
/// Exits 3 when some notion hit an enumeration bound.
pub fn paradox(path: &Path, notion: Option<Notion>, opts: &Options) -> CliResult<Outcome> {
    let case = load_case(path)?;
    let family = case.family.as_ref().ok_or_else(|| CliError::Invalid(format!("{}: no [family] table", path.display())))?;
    let notions: Vec<Notion> = notion.map_or_else(|| PRINCIPAL.to_vec(), |n| vec![n]);
    let mut report = Report::default();
    let mut code = 0;
    for n in notions {
        let mut failed = None;
        for &(p, q, i) in &family.edges {
            let edge = Edge::new(family.vectors[p].clone(), family.vectors[q].clone(), i)?;
            match monotonicity_report(n, &family.base, &edge, &opts.limits) {
                Ok(r) => {
                    let fields = [
                        ("notion", n.to_string()),
                        ("edge", format!("{}>{}", p + 1, q + 1)),
                        ("agent", (i + 1).to_string()),
                        ("upper", verdict_text(r.upper.verdict).to_string()),
                        ("lower", verdict_text(r.lower.verdict).to_string()),
                        ("lower_pareto", verdict_text(r.lower_pareto.verdict).to_string()),
                        ("inversion", search_text(&r.inversion).to_string()),
                        ("inverse_domination", search_text(&r.inverse_domination).to_string()),
                    ];
                    let text = format!(
                        "{n} {} over {} for agent {}: upper {}, lower {}, lower on front {}, inversion {}, inverse domination {}",
                        vector_text(&edge.b),
                        vector_text(&edge.b_prime),
                        i + 1,
                        fields[3].1,
                        fields[4].1,
                        fields[5].1,
                        fields[6].1,
                        fields[7].1
                    );
                    report.push("edge", text, &fields);
                }
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        let e = match failed {
            Some(e) => e,
            None => match selection_search(n, family, &opts.limits) {
                Ok(r) => {
                    let exists = r.exists();
                    let text = if exists {
                        format!("{n}: a monotone selection exists")
                    } else {
                        format!("{n}: no monotone selection ({} nogoods)", r.refutation.len())
                    };
                    report.push("selection", text, &[("notion", n.to_string()), ("exists", exists.to_string())]);
                    continue;
                }
                Err(e) => e,
            },
        };
        if matches!(e, fairalloc::Error::Resource { .. }) {
            code = 3;
        }
        report.push("error", format!("{n}: {e}"), &[("notion", n.to_string()), ("error", e.to_string())]);
    }
    Ok(Outcome { report, code })
}

/// `./corpus` when present, otherwise the corpus shipped next to the workspace.
pub fn default_corpus() -> PathBuf {
    let local = PathBuf::from("corpus");
    if local.join("index.toml").exists() {
        local
    } else {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
    }
}

pub fn reproduce(dir: &Path, selector: Option<&str>, opts: &Options) -> CliResult<Outcome> {
    let run = RunOptions { limits: opts.limits, tolerance: opts.tolerance };
    let corpus = run_corpus(dir, selector, &run)?;
    let mut report = Report::default();
    for r in &corpus.results {
        let status = if r.pass { "PASS" } else { "FAIL" };
        let note = r.note.as_ref().filter(|_| !r.pass).map_or_else(String::new, |n| format!("\n      note: {n}"));
        report.push(
            "check",
            format!("{status}  {} [{}] {}: {}{note}", r.case, r.source, r.label, r.detail),
            &[
                ("status", status.to_string()),
                ("case", r.case.clone()),
                ("source", r.source.clone()),
                ("check", r.label.clone()),
                ("detail", r.detail.clone()),
                ("note", r.note.clone().unwrap_or_default()),
            ],
        );
    }
    let failed = corpus.mismatches().count();
    report.push(
        "summary",
        format!("{} checks, {} passed, {failed} failed", corpus.results.len(), corpus.results.len() - failed),
        &[("checks", corpus.results.len().to_string()), ("failed", failed.to_string())],
    );
    Ok(Outcome { report, code: if failed == 0 { 0 } else { 1 } })
}
