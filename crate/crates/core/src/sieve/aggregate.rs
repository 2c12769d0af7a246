//! Aggregates built from term enclosures: the sieve total `S(τ)`, the
//! largest admissible exponent, and the primitive-divisor coefficient.

use serde::{Deserialize, Serialize};

use super::{closed_form_term, TermId, TermResult};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};

/// Target for the current total at `τ = 1.317`.
pub const AGGREGATE_TARGET: f64 = 0.9993;
/// Target for the total built from the older term bounds at `τ = 1.312`.
pub const LEGACY_AGGREGATE_TARGET: f64 = 0.998;
/// Target for the `ρ(x)/x` coefficient.
pub const RHO_TARGET: f64 = 0.838;

/// Direction of a published bound on a term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperBound {
    pub kind: BoundKind,
    pub value: f64,
}

impl PaperBound {
    /// Whether the enclosure certifies the bound.
    pub fn holds(&self, e: &Enclosure) -> bool {
        match self.kind {
            BoundKind::Upper => e.hi() <= self.value,
            BoundKind::Lower => e.lo() >= self.value,
        }
    }
}

/// Published bound for a term, if any. `legacy` selects the older, weaker
/// values for `G1..G4`, `G6`; primed terms have no older values.
pub fn paper_bound(id: TermId, legacy: bool) -> Option<PaperBound> {
    use BoundKind::*;
    use TermId::*;
    let (kind, value) = match (id, legacy) {
        (G1, false) => (Upper, 0.028611),
        (G2, false) => (Upper, 0.086062),
        (G3, false) => (Upper, 0.030992),
        (G4, false) => (Upper, 0.0001),
        (G6, false) => (Lower, 0.059841),
        (G1, true) => (Upper, 0.0287),
        (G2, true) => (Upper, 0.08622),
        (G3, true) => (Upper, 0.03107),
        (G4, true) => (Upper, 0.00011),
        (G6, true) => (Lower, 0.035631),
        (G0p, _) => (Upper, 0.154151),
        (G1p, _) => (Upper, 0.027475),
        (G2p, _) => (Upper, 0.077933),
        (G3p, _) => (Upper, 0.026835),
        (G4p, _) => (Upper, 0.00009),
        (G6p, _) => (Lower, 0.05016),
        _ => return None,
    };
    Some(PaperBound { kind, value })
}

fn find(results: &[TermResult], id: TermId) -> Result<Enclosure> {
    results
        .iter()
        .find(|r| r.id == id)
        .map(|r| r.enclosure)
        .ok_or_else(|| Error::MissingTerm(id.to_string()))
}

/// `G0 + G1 + G2 + G3 + G4 + G5 − G6` (or the primed sum).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedSum {
    pub value: Enclosure,
    pub primed: bool,
}

impl FixedSum {
    pub fn from_results(results: &[TermResult], primed: bool) -> Result<FixedSum> {
        let mut value = Enclosure::ZERO;
        for i in 0..=6 {
            let id = TermId::from_parts(i, primed).expect("valid index");
            let e = find(results, id)?;
            value = if i == 6 { value - e } else { value + e };
        }
        Ok(FixedSum { value, primed })
    }
}

/// Fixed sum built from the older published bounds, taking each of
/// `G1..G4` in `[0, bound]` and `G6` at its lower bound. Only the upper
/// endpoint is meaningful.
pub fn legacy_fixed_sum() -> FixedSum {
    let mut value = Enclosure::ratio(1, 6) + Enclosure::ratio(29, 72);
    for id in [TermId::G1, TermId::G2, TermId::G3, TermId::G4] {
        let b = paper_bound(id, true).expect("legacy bound").value;
        value = value + Enclosure::from_f64_decimal(b).expect("finite").hull(&Enclosure::ZERO);
    }
    let g6 = paper_bound(TermId::G6, true).expect("legacy bound").value;
    value = value - Enclosure::from_f64_decimal(g6).expect("finite");
    FixedSum { value, primed: false }
}

fn tau_enclosure(tau: f64) -> Result<Enclosure> {
    if !tau.is_finite() {
        return Err(Error::Config(format!("invalid tau {tau}")));
    }
    Ok(Enclosure::from_f64_decimal(tau)?)
}

/// `S(τ) = fixed + G7(τ)` with `τ` read as a decimal.
pub fn total_s_with(tau: f64, fixed: &FixedSum) -> Result<Enclosure> {
    if fixed.primed {
        return Err(Error::Config("total S needs the unprimed fixed sum".into()));
    }
    Ok(fixed.value + closed_form_term(TermId::G7, tau_enclosure(tau)?)?)
}

/// `S(τ)` from computed terms `G0..G6`.
pub fn total_s(tau: f64, results: &[TermResult]) -> Result<Enclosure> {
    total_s_with(tau, &FixedSum::from_results(results, false)?)
}

/// `ρ(x)/x` coefficient: primed fixed sum plus `G7p(τ) = 4(τ − 5/4)`.
pub fn rho_coefficient(tau: f64, results: &[TermResult]) -> Result<Enclosure> {
    let fixed = FixedSum::from_results(results, true)?;
    Ok(fixed.value + closed_form_term(TermId::G7p, tau_enclosure(tau)?)?)
}

/// The largest exponent the fixed sum allows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauSolution {
    /// Enclosure of `sqrt(25/16 + (1 − F.hi)/2)`.
    pub tau: Enclosure,
    /// `tau.lo` truncated to four decimals.
    pub admissible: String,
    /// Upper bound of `S(admissible)`; at most 1.
    pub total_at_admissible: f64,
}

/// Solves `S(τ) = 1` with the upper endpoint of the fixed sum.
pub fn solve_tau(fixed: &FixedSum) -> Result<TauSolution> {
    if fixed.primed {
        return Err(Error::Config("tau is solved from the unprimed fixed sum".into()));
    }
    let f_hi = fixed.value.hi();
    if f_hi >= 1.0 {
        return Err(Error::Infeasible(format!("fixed sum upper bound {f_hi} is at least 1")));
    }
    let f = Enclosure::point(f_hi);
    let tau = (Enclosure::ratio(25, 16) + (Enclosure::ONE - f) * Enclosure::ratio(1, 2)).sqrt()?;
    // S is increasing in τ, so any point not above τ* is admissible; confirm
    // with the certified forward evaluation.
    let mut lo = tau.lo();
    // Checked the way `total_s_with` reads `τ`, as the decimal of `t`.
    let within = |t: f64| -> Result<bool> { Ok(total_s_with(t, fixed)?.hi() <= 1.0) };
    let mut steps = 0;
    while !within(lo)? {
        lo = lo.next_down();
        steps += 1;
        if steps > 64 {
            return Err(Error::Infeasible("cannot certify the exponent".into()));
        }
    }
    let tau = Enclosure::new(lo, tau.hi().max(lo))?;
    let truncated = (lo * 1e4).floor() as i64;
    let mut admissible_n = truncated;
    // Truncation in binary may land one step high; walk down until certified.
    loop {
        let t = Enclosure::ratio(admissible_n, 10_000);
        let total = fixed.value + closed_form_term(TermId::G7, t).unwrap_or(Enclosure::ZERO);
        if t.hi() <= lo && total.hi() <= 1.0 {
            let admissible = format!("{}.{:04}", admissible_n / 10_000, admissible_n % 10_000);
            return Ok(TauSolution { tau, admissible, total_at_admissible: total.hi() });
        }
        admissible_n -= 1;
        if admissible_n < 12_500 {
            return Err(Error::Infeasible("no admissible exponent at or above 5/4".into()));
        }
    }
}
