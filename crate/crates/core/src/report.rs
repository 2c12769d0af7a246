//! The reproduction record: per-term enclosures, aggregates and verdicts.
//!
//! Enclosure endpoints are written as decimal strings with 12 significant
//! digits, the lower endpoint rounded down and the upper rounded up, so that
//! reading a report back never tightens anything. Aggregates are computed
//! from the decimal strings themselves, which makes them reproducible from
//! the document alone.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::sieve::aggregate::{
    self, legacy_fixed_sum, paper_bound, FixedSum, PaperBound, AGGREGATE_TARGET,
    LEGACY_AGGREGATE_TARGET, RHO_TARGET,
};
use crate::sieve::{Mode, TermId, TermResult};

pub const SCHEMA_VERSION: u32 = 1;
const DIGITS: usize = 12;

/// `m · 10^e` with a 12-digit mantissa, as a string.
fn decimal(m: i128, e: i32) -> String {
    let neg = m < 0;
    let digits = m.unsigned_abs().to_string();
    let lead = digits.len() as i32 - 1;
    let (int, frac) = digits.split_at(1);
    let frac = frac.trim_end_matches('0');
    let exp = e + lead;
    let sign = if neg { "-" } else { "" };
    if frac.is_empty() {
        format!("{sign}{int}e{exp}")
    } else {
        format!("{sign}{int}.{frac}e{exp}")
    }
}

/// Decimal string `d` with `d ≤ x` (`up = false`) or `d ≥ x` (`up = true`).
pub fn format_directed(x: f64, up: bool) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let mut m: i128 = mant.replace('.', "").parse().expect("mantissa");
    let e = exp - (DIGITS as i32 - 1);
    loop {
        let s = decimal(m, e);
        let enc = Enclosure::from_decimal(&s).expect("own decimal parses");
        if (up && enc.lo() >= x) || (!up && enc.hi() <= x) {
            return s;
        }
        m += if up { 1 } else { -1 };
    }
}

/// Enclosure as a pair of outward-rounded decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecimalEnclosure {
    pub lo: String,
    pub hi: String,
}

impl DecimalEnclosure {
    pub fn from_enclosure(e: &Enclosure) -> Self {
        DecimalEnclosure { lo: format_directed(e.lo(), false), hi: format_directed(e.hi(), true) }
    }

    /// Enclosure of every real between the two decimals.
    pub fn to_enclosure(&self) -> Result<Enclosure> {
        let lo = Enclosure::from_decimal(&self.lo)?;
        let hi = Enclosure::from_decimal(&self.hi)?;
        Ok(Enclosure::new(lo.lo(), hi.hi())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub id: TermId,
    #[serde(flatten)]
    pub bounds: DecimalEnclosure,
    pub paper_bound: Option<PaperBound>,
    /// Whether the enclosure certifies the paper bound; `None` if there is none.
    pub pass: Option<bool>,
    pub cells: u64,
    pub seconds: f64,
    pub certified: bool,
    pub budget_exceeded: bool,
    pub guard_hits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauEntry {
    #[serde(flatten)]
    pub bounds: DecimalEnclosure,
    pub admissible: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegacyEntry {
    /// Fixed sum from the older published term bounds.
    pub fixed_sum: DecimalEnclosure,
    pub total: DecimalEnclosure,
    pub target: f64,
    pub pass: bool,
    pub tau: Option<TauEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub fixed_sum: DecimalEnclosure,
    pub total: DecimalEnclosure,
    pub total_target: f64,
    pub total_pass: bool,
    pub total_below_one: bool,
    pub solved_tau: Option<TauEntry>,
    pub solve_error: Option<String>,
    pub primed_fixed_sum: DecimalEnclosure,
    pub rho_coefficient: DecimalEnclosure,
    pub rho_target: f64,
    pub rho_pass: bool,
    pub legacy: Option<LegacyEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub schema_version: u32,
    pub tau: f64,
    pub legacy_bounds: bool,
    pub mode: Mode,
    pub terms: Vec<TermEntry>,
    pub aggregates: Aggregates,
    pub budget_exceeded: bool,
    /// Every paper bound, the total target and the `ρ` target hold.
    pub all_pass: bool,
}

fn entry(r: &TermResult, legacy: bool) -> TermEntry {
    let bound = paper_bound(r.id, legacy);
    TermEntry {
        id: r.id,
        bounds: DecimalEnclosure::from_enclosure(&r.enclosure),
        paper_bound: bound,
        pass: bound.map(|b| r.certified && b.holds(&r.enclosure)),
        cells: r.cells,
        seconds: r.seconds,
        certified: r.certified,
        budget_exceeded: r.budget_exceeded,
        guard_hits: r.guard_hits,
    }
}

/// Term results with enclosures replaced by what the report's strings say.
fn reread(terms: &[TermEntry], mode: Mode) -> Result<Vec<TermResult>> {
    terms
        .iter()
        .map(|t| {
            Ok(TermResult {
                id: t.id,
                enclosure: t.bounds.to_enclosure()?,
                cells: t.cells,
                seconds: t.seconds,
                certified: t.certified,
                budget_exceeded: t.budget_exceeded,
                guard_hits: t.guard_hits,
                mode,
                target_width: 0.0,
            })
        })
        .collect()
}

fn tau_entry(fixed: &FixedSum) -> Result<TauEntry> {
    let sol = aggregate::solve_tau(fixed)?;
    Ok(TauEntry { bounds: DecimalEnclosure::from_enclosure(&sol.tau), admissible: sol.admissible })
}

/// Aggregate values `(total, ρ coefficient)` recomputed from a report's
/// per-term strings.
pub fn rederive(report: &BoundsReport) -> Result<(Enclosure, Enclosure)> {
    let rs = reread(&report.terms, report.mode)?;
    Ok((aggregate::total_s(report.tau, &rs)?, aggregate::rho_coefficient(report.tau, &rs)?))
}

/// Assembles the report from results for all sixteen terms.
pub fn build_report(results: &[TermResult], tau: f64, legacy: bool) -> Result<BoundsReport> {
    let mode = results.first().map(|r| r.mode).unwrap_or(Mode::Rigorous);
    let mut terms = Vec::with_capacity(TermId::ALL.len());
    for id in TermId::ALL {
        let r = results.iter().find(|r| r.id == id).ok_or_else(|| Error::MissingTerm(id.to_string()))?;
        terms.push(entry(r, legacy));
    }
    let rs = reread(&terms, mode)?;
    let fixed = FixedSum::from_results(&rs, false)?;
    let primed = FixedSum::from_results(&rs, true)?;
    let total = aggregate::total_s_with(tau, &fixed)?;
    let rho = aggregate::rho_coefficient(tau, &rs)?;
    let certified = rs.iter().all(|r| r.certified);
    let total_target = if legacy { LEGACY_AGGREGATE_TARGET } else { AGGREGATE_TARGET };
    let (solved_tau, solve_error) = match tau_entry(&fixed) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let legacy_entry = if legacy {
        let lf = legacy_fixed_sum();
        let lt = aggregate::total_s_with(tau, &lf)?;
        Some(LegacyEntry {
            fixed_sum: DecimalEnclosure::from_enclosure(&lf.value),
            total: DecimalEnclosure::from_enclosure(&lt),
            target: LEGACY_AGGREGATE_TARGET,
            pass: lt.hi() < LEGACY_AGGREGATE_TARGET,
            tau: tau_entry(&lf).ok(),
        })
    } else {
        None
    };
    let aggregates = Aggregates {
        fixed_sum: DecimalEnclosure::from_enclosure(&fixed.value),
        total: DecimalEnclosure::from_enclosure(&total),
        total_target,
        total_pass: certified && total.hi() < total_target,
        total_below_one: certified && total.hi() < 1.0,
        solved_tau,
        solve_error,
        primed_fixed_sum: DecimalEnclosure::from_enclosure(&primed.value),
        rho_coefficient: DecimalEnclosure::from_enclosure(&rho),
        rho_target: RHO_TARGET,
        rho_pass: certified && rho.hi() < RHO_TARGET,
        legacy: legacy_entry,
    };
    let budget_exceeded = terms.iter().any(|t| t.budget_exceeded);
    let all_pass = !budget_exceeded
        && terms.iter().all(|t| t.pass != Some(false))
        && aggregates.total_pass
        && aggregates.rho_pass
        && aggregates.legacy.as_ref().is_none_or(|l| l.pass);
    Ok(BoundsReport {
        schema_version: SCHEMA_VERSION,
        tau,
        legacy_bounds: legacy,
        mode,
        terms,
        aggregates,
        budget_exceeded,
        all_pass,
    })
}

/// Output format of reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

impl BoundsReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: BoundsReport = serde_json::from_str(s)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema version {}", r.schema_version)));
        }
        Ok(r)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,lo,hi,bound_kind,bound,pass,cells,seconds\n");
        for t in &self.terms {
            let (kind, value) = match t.paper_bound {
                Some(b) => (format!("{:?}", b.kind).to_lowercase(), b.value.to_string()),
                None => (String::new(), String::new()),
            };
            let pass = t.pass.map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{kind},{value},{pass},{},{}", t.id, t.bounds.lo, t.bounds.hi, t.cells, t.seconds);
        }
        let a = &self.aggregates;
        let _ = writeln!(s, "total,{},{},upper,{},{},,", a.total.lo, a.total.hi, a.total_target, a.total_pass);
        let _ = writeln!(s, "rho,{},{},upper,{},{},,", a.rho_coefficient.lo, a.rho_coefficient.hi, a.rho_target, a.rho_pass);
        if let Some(t) = &a.solved_tau {
            let _ = writeln!(s, "tau,{},{},,,,,", t.bounds.lo, t.bounds.hi);
        }
        if let Some(l) = &a.legacy {
            let _ = writeln!(s, "legacy_total,{},{},upper,{},{},,", l.total.lo, l.total.hi, l.target, l.pass);
        }
        s
    }

    pub fn to_human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "tau = {}  mode = {}{}", self.tau, self.mode, if self.legacy_bounds { "  (older bounds)" } else { "" });
        let _ = writeln!(s, "{:<5} {:>20} {:>20} {:>12} {:>6} {:>10} {:>8}", "term", "lo", "hi", "bound", "pass", "cells", "secs");
        for t in &self.terms {
            let bound = match t.paper_bound {
                Some(b) => format!("{}{}", if b.kind == aggregate::BoundKind::Upper { "<" } else { ">" }, b.value),
                None => "-".into(),
            };
            let pass = match t.pass {
                Some(true) => "ok",
                Some(false) => "FAIL",
                None => "-",
            };
            let _ = writeln!(
                s,
                "{:<5} {:>20} {:>20} {:>12} {:>6} {:>10} {:>8.2}{}",
                t.id.to_string(), t.bounds.lo, t.bounds.hi, bound, pass, t.cells, t.seconds,
                if t.budget_exceeded { "  budget exceeded" } else { "" }
            );
        }
        let a = &self.aggregates;
        let verdict = |b: bool| if b { "ok" } else { "FAIL" };
        let _ = writeln!(s, "fixed sum      [{}, {}]", a.fixed_sum.lo, a.fixed_sum.hi);
        let _ = writeln!(s, "total S(tau)   [{}, {}]  < {}: {}  < 1: {}", a.total.lo, a.total.hi, a.total_target, verdict(a.total_pass), verdict(a.total_below_one));
        match (&a.solved_tau, &a.solve_error) {
            (Some(t), _) => {
                let _ = writeln!(s, "solved tau     [{}, {}]  admissible {}", t.bounds.lo, t.bounds.hi, t.admissible);
            }
            (None, Some(e)) => {
                let _ = writeln!(s, "solved tau     {e}");
            }
            _ => {}
        }
        let _ = writeln!(s, "rho coeff      [{}, {}]  < {}: {}", a.rho_coefficient.lo, a.rho_coefficient.hi, a.rho_target, verdict(a.rho_pass));
        if let Some(l) = &a.legacy {
            let _ = writeln!(s, "older total    [{}, {}]  < {}: {}", l.total.lo, l.total.hi, l.target, verdict(l.pass));
            if let Some(t) = &l.tau {
                let _ = writeln!(s, "older tau      admissible {}", t.admissible);
            }
        }
        let _ = writeln!(s, "overall: {}", verdict(self.all_pass));
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => self.to_json()?,
            Format::Csv => self.to_csv(),
            Format::Human => self.to_human(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::closed_form_term;

    #[test]
    fn directed_decimals_bracket() {
        for x in [1.0 / 3.0, 0.028611, -0.0599, 2.0f64.sqrt(), 1e-17, 123456.789, 0.1] {
            let lo = Enclosure::from_decimal(&format_directed(x, false)).unwrap();
            let hi = Enclosure::from_decimal(&format_directed(x, true)).unwrap();
            assert!(lo.hi() <= x && hi.lo() >= x, "{x}");
            assert!(hi.hi() - lo.lo() <= x.abs() * 3e-11, "{x}");
        }
        assert_eq!(format_directed(0.5, false), "5e-1");
        assert_eq!(format_directed(0.0, true), "0");
    }

    #[test]
    fn decimal_enclosure_round_trip_does_not_tighten() {
        let e = Enclosure::ratio(1, 3);
        let d = DecimalEnclosure::from_enclosure(&e);
        assert!(d.to_enclosure().unwrap().contains_enclosure(&e));
    }

    fn fake_results() -> Vec<TermResult> {
        TermId::ALL
            .iter()
            .map(|&id| {
                let enclosure = closed_form_term(id, Enclosure::from_f64_decimal(1.317).unwrap())
                    .unwrap_or_else(|_| {
                        let b = paper_bound(id, false).unwrap().value;
                        Enclosure::new(b * 0.999, b * 0.9995).unwrap()
                    });
                TermResult {
                    id,
                    enclosure,
                    cells: 1,
                    seconds: 0.0,
                    certified: true,
                    budget_exceeded: false,
                    guard_hits: 0,
                    mode: Mode::Rigorous,
                    target_width: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn report_round_trips() {
        let report = build_report(&fake_results(), 1.317, false).unwrap();
        let back = BoundsReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
        let (total, rho) = rederive(&back).unwrap();
        assert_eq!(DecimalEnclosure::from_enclosure(&total), report.aggregates.total);
        assert_eq!(DecimalEnclosure::from_enclosure(&rho), report.aggregates.rho_coefficient);
        assert!(report.to_csv().lines().count() > 16);
        assert!(report.to_human().contains("overall"));
    }

    #[test]
    fn missing_term_is_an_error() {
        let mut rs = fake_results();
        rs.pop();
        assert!(build_report(&rs, 1.317, false).is_err());
    }
}
