//! The sixteen sieve integrals `G0..G7` and `G0p..G7p`.
//!
//! Every two-dimensional term has the shape
//! `∫ α^p ∫_{β_lo(α)}^{β_hi(α)} ω((α−β)/β)/β² dβ dα` with affine limits, and
//! the four-dimensional `G4`/`G4p` nest three `β` integrals under the
//! indicator `f4`. Primed terms drop the factor `α` (`p = 0` instead of 1).

mod adaptive;
pub mod aggregate;
mod g4;
mod slab;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::buchstab::BuchstabTable;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};

pub use aggregate::{
    legacy_fixed_sum, rho_coefficient, solve_tau, total_s, total_s_with, FixedSum, TauSolution,
};

/// `σ(α) = (2 − α)/3`.
pub fn sigma(alpha: Enclosure) -> Enclosure {
    (Enclosure::point(2.0) - alpha).try_div(Enclosure::point(3.0)).expect("nonzero")
}

/// `ξ(α) = 3/2 − α`.
pub fn xi(alpha: Enclosure) -> Enclosure {
    Enclosure::ratio(3, 2) - alpha
}

/// Indicator of the configurations kept in `G4`: none of `β1+β2`, `β1+β3`,
/// `β2+β3`, `β1+β2+β3` lies in the closed band `[α − 1, σ(α)]`.
pub fn f4(alpha: f64, b1: f64, b2: f64, b3: f64) -> bool {
    let lo = alpha - 1.0;
    let hi = (2.0 - alpha) / 3.0;
    [b1 + b2, b1 + b3, b2 + b3, b1 + b2 + b3].iter().all(|&s| s < lo || s > hi)
}

/// Classification of a box against the `f4` indicator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellClass {
    /// `f4 ≡ 1` on the box.
    Inside,
    /// `f4 ≡ 0` on the box.
    Outside,
    Boundary,
}

/// Classifies a box (given as enclosures of each coordinate) for `f4`.
pub fn f4_cell(alpha: Enclosure, b1: Enclosure, b2: Enclosure, b3: Enclosure) -> CellClass {
    let band_lo = alpha - Enclosure::ONE;
    let band_hi = sigma(alpha);
    let sums = [b1 + b2, b1 + b3, b2 + b3, b1 + b2 + b3];
    let mut all_clear = true;
    for s in sums {
        let above = s.lo() > band_hi.hi();
        let below = s.hi() < band_lo.lo();
        if above || below {
            continue;
        }
        all_clear = false;
        if s.lo() >= band_lo.hi() && s.hi() <= band_hi.lo() {
            return CellClass::Outside;
        }
    }
    if all_clear {
        CellClass::Inside
    } else {
        CellClass::Boundary
    }
}

/// One of the sixteen integrals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermId {
    G0,
    G1,
    G2,
    G3,
    G4,
    G5,
    G6,
    G7,
    G0p,
    G1p,
    G2p,
    G3p,
    G4p,
    G5p,
    G6p,
    G7p,
}

impl TermId {
    pub const ALL: [TermId; 16] = [
        TermId::G0,
        TermId::G1,
        TermId::G2,
        TermId::G3,
        TermId::G4,
        TermId::G5,
        TermId::G6,
        TermId::G7,
        TermId::G0p,
        TermId::G1p,
        TermId::G2p,
        TermId::G3p,
        TermId::G4p,
        TermId::G5p,
        TermId::G6p,
        TermId::G7p,
    ];

    pub fn index(self) -> usize {
        self as usize % 8
    }

    pub fn is_primed(self) -> bool {
        (self as usize) >= 8
    }

    pub fn from_parts(index: usize, primed: bool) -> Option<TermId> {
        (index < 8).then(|| TermId::ALL[index + if primed { 8 } else { 0 }])
    }

    pub fn primed(self) -> TermId {
        TermId::from_parts(self.index(), true).unwrap()
    }

    pub fn unprimed(self) -> TermId {
        TermId::from_parts(self.index(), false).unwrap()
    }

    pub fn as_str(self) -> &'static str {
        const NAMES: [&str; 16] = [
            "G0", "G1", "G2", "G3", "G4", "G5", "G6", "G7", "G0p", "G1p", "G2p", "G3p", "G4p",
            "G5p", "G6p", "G7p",
        ];
        NAMES[self as usize]
    }

    pub fn spec(self) -> TermSpec {
        TermSpec::of(self)
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TermId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (body, primed) = match t.strip_suffix(['p', 'P', '\'']) {
            Some(b) => (b, true),
            None => (t, false),
        };
        let idx = body
            .strip_prefix(['G', 'g'])
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i < 8)
            .ok_or_else(|| Error::Config(format!("unknown term {s:?}")))?;
        Ok(TermId::from_parts(idx, primed).unwrap())
    }
}

/// An exact rational `num/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub const fn new(num: i64, den: i64) -> Self {
        Rational { num, den }
    }
    pub fn enclosure(self) -> Enclosure {
        Enclosure::ratio(self.num, self.den)
    }
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// An inner limit `β = (n0 + n1 α)/den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limit {
    pub n0: i64,
    pub n1: i64,
    pub den: i64,
}

impl Limit {
    pub const SIGMA: Limit = Limit { n0: 2, n1: -1, den: 3 };
    pub const XI: Limit = Limit { n0: 3, n1: -2, den: 2 };
    pub const HALF_ALPHA: Limit = Limit { n0: 0, n1: 1, den: 2 };
    pub const ALPHA_MINUS_TWO_SIGMA: Limit = Limit { n0: -4, n1: 5, den: 3 };
    pub const ALPHA_MINUS_ONE: Limit = Limit { n0: -1, n1: 1, den: 1 };
    /// `σ(α) − α + 1`, the common lower limit of the `G4` variables.
    pub const SIGMA_MINUS_ALPHA_PLUS_ONE: Limit = Limit { n0: 5, n1: -4, den: 3 };

    pub fn eval(self, alpha: Enclosure) -> Enclosure {
        (Enclosure::from_i64(self.n0) + Enclosure::from_i64(self.n1) * alpha)
            .try_div(Enclosure::from_i64(self.den))
            .expect("nonzero denominator")
    }

    pub fn eval_f64(self, alpha: f64) -> f64 {
        (self.n0 as f64 + self.n1 as f64 * alpha) / self.den as f64
    }
}

/// One double integral `∫_{a0}^{a1} ∫_{lower(α)}^{upper(α)} … dβ dα`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlabPart {
    pub alpha: (Rational, Rational),
    pub lower: Limit,
    pub upper: Limit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// `base · ∫ α^p dα` in closed form.
    Closed { base: i64 },
    /// Sum of double integrals.
    Slab(Vec<SlabPart>),
    /// `∫ dα ∫_L^{α−1} dβ1 ∫_L^{β1} dβ2 ∫_L^{β2} dβ3 f4 · …` with
    /// `L = σ(α) − α + 1`.
    Nested4,
}

/// Static description of a term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub id: TermId,
    pub dimension: usize,
    /// `α` range; for `G7`/`G7p` the upper end is `τ` and this holds `5/4`.
    pub alpha: (Rational, Rational),
    pub shape: Shape,
    /// Exponent `p` of the weight `α^p`.
    pub alpha_power: i32,
    /// `+1`, or `−1` for the subtracted `G6`/`G6p`.
    pub sign: i32,
    pub indicator: bool,
    pub tau_dependent: bool,
}

impl TermSpec {
    pub fn of(id: TermId) -> TermSpec {
        let r = Rational::new;
        let primed = id.is_primed();
        let p2 = if primed { 0 } else { 1 };
        let slab = |a0: Rational, a1: Rational, lower: Limit, upper: Limit| SlabPart {
            alpha: (a0, a1),
            lower,
            upper,
        };
        let (dimension, alpha, shape, alpha_power) = match id.index() {
            0 => (1, (r(1, 1), r(7, 6)), Shape::Closed { base: 1 }, if primed { -1 } else { 0 }),
            1 => (
                2,
                (r(1, 1), r(17, 16)),
                Shape::Slab(vec![
                    slab(r(1, 1), r(17, 16), Limit::SIGMA, Limit::ALPHA_MINUS_TWO_SIGMA),
                    slab(r(1, 1), r(17, 16), Limit::XI, Limit::HALF_ALPHA),
                ]),
                p2,
            ),
            2 => (
                2,
                (r(17, 16), r(8, 7)),
                Shape::Slab(vec![slab(r(17, 16), r(8, 7), Limit::SIGMA, Limit::HALF_ALPHA)]),
                p2,
            ),
            3 => (
                2,
                (r(8, 7), r(7, 6)),
                Shape::Slab(vec![slab(r(8, 7), r(7, 6), Limit::SIGMA, Limit::HALF_ALPHA)]),
                p2,
            ),
            4 => (4, (r(8, 7), r(7, 6)), Shape::Nested4, p2),
            5 => (1, (r(7, 6), r(5, 4)), Shape::Closed { base: 4 }, p2),
            6 => (
                2,
                (r(7, 6), r(5, 4)),
                Shape::Slab(vec![slab(r(7, 6), r(5, 4), Limit::ALPHA_MINUS_ONE, Limit::SIGMA)]),
                p2,
            ),
            _ => (1, (r(5, 4), r(5, 4)), Shape::Closed { base: 4 }, p2),
        };
        TermSpec {
            id,
            dimension,
            alpha,
            shape,
            alpha_power,
            sign: if id.index() == 6 { -1 } else { 1 },
            indicator: id.index() == 4,
            tau_dependent: id.index() == 7,
        }
    }
}

/// `α^p` for `p ∈ {−1, 0, 1}`.
fn alpha_pow(alpha: Enclosure, p: i32) -> Result<Enclosure> {
    Ok(match p {
        0 => Enclosure::ONE,
        1 => alpha,
        -1 => alpha.recip()?,
        _ => return Err(Error::Config(format!("unsupported alpha power {p}"))),
    })
}

/// Enclosure of a term's integrand at a point or over a box.
///
/// Coordinates are `[α]` (closed forms), `[α, β]` (double integrals) or
/// `[α, β1, β2, β3]` (`G4`, `G4p`, including the indicator).
pub fn integrand(id: TermId, x: &[Enclosure], table: &BuchstabTable) -> Result<Enclosure> {
    let spec = id.spec();
    let need = spec.dimension;
    if x.len() != need {
        return Err(Error::Config(format!("{id} takes {need} coordinates, got {}", x.len())));
    }
    let alpha = x[0];
    let w = alpha_pow(alpha, spec.alpha_power)?;
    match spec.shape {
        Shape::Closed { base } => Ok(Enclosure::from_i64(base) * w),
        Shape::Slab(_) => {
            let beta = x[1];
            let u = (alpha - beta).try_div(beta)?;
            Ok(w * table.omega(u)?.try_div(beta.sqr())?)
        }
        Shape::Nested4 => {
            let (b1, b2, b3) = (x[1], x[2], x[3]);
            let u = (alpha - b1 - b2 - b3).try_div(b3)?;
            let val = w * table.omega(u)?.try_div(b1 * b2 * b3.sqr())?;
            Ok(match f4_cell(alpha, b1, b2, b3) {
                CellClass::Inside => val,
                CellClass::Outside => Enclosure::ZERO,
                CellClass::Boundary => val.hull(&Enclosure::ZERO),
            })
        }
    }
}

/// Exact closed forms: `G0 = 1/6`, `G5 = 29/72`, `G7 = 2(τ² − 25/16)`,
/// `G0p = ln(7/6)`, `G5p = 1/3`, `G7p = 4(τ − 5/4)`.
pub fn closed_form_term(id: TermId, tau: Enclosure) -> Result<Enclosure> {
    let five_quarters = Enclosure::ratio(5, 4);
    let check_tau = || {
        if tau.lo() < 1.25 {
            Err(Error::Domain(format!("tau must be at least 5/4, got {tau}")))
        } else {
            Ok(())
        }
    };
    match id {
        TermId::G0 => Ok(Enclosure::ratio(1, 6)),
        TermId::G5 => Ok(Enclosure::ratio(29, 72)),
        TermId::G0p => Ok(Enclosure::ratio(7, 6).ln()?),
        TermId::G5p => Ok(Enclosure::ratio(1, 3)),
        TermId::G7 => {
            check_tau()?;
            Ok(Enclosure::point(2.0) * (tau.sqr() - Enclosure::ratio(25, 16)))
        }
        TermId::G7p => {
            check_tau()?;
            Ok(Enclosure::point(4.0) * (tau - five_quarters))
        }
        other => Err(Error::Config(format!("{other} has no closed form"))),
    }
}

/// Rigorous (certified) or fast (uncertified point estimate) evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rigorous,
    Fast,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rigorous" => Ok(Mode::Rigorous),
            "fast" => Ok(Mode::Fast),
            _ => Err(Error::Config(format!("unknown mode {s:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Rigorous => "rigorous",
            Mode::Fast => "fast",
        })
    }
}

pub const DEFAULT_WIDTH_2D: f64 = 1e-10;
pub const DEFAULT_WIDTH_4D: f64 = 1e-6;
pub const DEFAULT_MAX_CELLS: u64 = 20_000_000;

/// Quadrature settings shared by all terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub mode: Mode,
    /// Target enclosure width for the double integrals.
    pub target_width_2d: f64,
    /// Target enclosure width for `G4`/`G4p`.
    pub target_width_4d: f64,
    pub max_cells: u64,
    pub seeded_breakpoints: bool,
    /// Worker threads for box evaluation; results do not depend on it.
    pub parallelism: usize,
    /// Exponent `τ` (decimal), used by `G7`/`G7p`.
    pub tau: f64,
}

pub type ComputeConfig = QuadratureConfig;

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            mode: Mode::Rigorous,
            target_width_2d: DEFAULT_WIDTH_2D,
            target_width_4d: DEFAULT_WIDTH_4D,
            max_cells: DEFAULT_MAX_CELLS,
            seeded_breakpoints: true,
            parallelism: default_parallelism(),
            tau: 1.317,
        }
    }
}

/// Thread count from `BUCHSTAB_THREADS`, else the available parallelism.
pub fn default_parallelism() -> usize {
    std::env::var("BUCHSTAB_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("target width", self.target_width_2d), ("4-d target width", self.target_width_4d)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {w}")));
            }
        }
        if self.max_cells < 1 {
            return Err(Error::Config("max cells must be at least 1".into()));
        }
        if self.parallelism < 1 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        self.tau_enclosure()?;
        Ok(())
    }

    pub fn tau_enclosure(&self) -> Result<Enclosure> {
        if !self.tau.is_finite() {
            return Err(Error::Config(format!("invalid tau {}", self.tau)));
        }
        Ok(Enclosure::from_f64_decimal(self.tau)?)
    }

    pub fn target_for(&self, id: TermId) -> f64 {
        if id.index() == 4 {
            self.target_width_4d
        } else {
            self.target_width_2d
        }
    }
}

/// Result of evaluating one term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermResult {
    pub id: TermId,
    pub enclosure: Enclosure,
    pub cells: u64,
    pub seconds: f64,
    pub certified: bool,
    pub budget_exceeded: bool,
    /// Evaluations that relied on `ω(u) = 0` below `u = 1`.
    pub guard_hits: u64,
    pub mode: Mode,
    pub target_width: f64,
}

/// Outcome of an integration engine before wrapping in a [`TermResult`].
#[derive(Clone, Copy, Debug)]
pub(crate) struct Integral {
    pub value: Enclosure,
    pub cells: u64,
    pub budget_exceeded: bool,
}

/// Evaluates one term.
pub fn compute_term(id: TermId, config: &QuadratureConfig, table: &BuchstabTable) -> Result<TermResult> {
    config.validate()?;
    let start = Instant::now();
    let guards_before = table.guard_hits();
    let spec = id.spec();
    let target = config.target_for(id);
    let integral = match (&spec.shape, config.mode) {
        (Shape::Closed { .. }, mode) => {
            let v = closed_form_term(id, config.tau_enclosure()?)?;
            let v = if mode == Mode::Fast { Enclosure::point(v.mid()) } else { v };
            Integral { value: v, cells: 0, budget_exceeded: false }
        }
        (Shape::Slab(parts), Mode::Rigorous) => slab::integrate(parts, spec.alpha_power, config, table)?,
        (Shape::Slab(parts), Mode::Fast) => slab::fast(parts, spec.alpha_power, table)?,
        (Shape::Nested4, Mode::Rigorous) => g4::integrate(spec.alpha_power, true, config, table)?,
        (Shape::Nested4, Mode::Fast) => g4::fast(spec.alpha_power, true, table)?,
    };
    Ok(TermResult {
        id,
        enclosure: integral.value,
        cells: integral.cells,
        seconds: start.elapsed().as_secs_f64(),
        certified: config.mode == Mode::Rigorous,
        budget_exceeded: integral.budget_exceeded,
        guard_hits: table.guard_hits() - guards_before,
        mode: config.mode,
        target_width: target,
    })
}

/// Rigorous enclosures of each double integral making up a term, in order
/// (`G1` has two; the other double-integral terms one).
pub fn compute_parts(id: TermId, config: &QuadratureConfig, table: &BuchstabTable) -> Result<Vec<Enclosure>> {
    config.validate()?;
    let spec = id.spec();
    let Shape::Slab(parts) = &spec.shape else {
        return Err(Error::Config(format!("{id} is not a sum of double integrals")));
    };
    parts
        .iter()
        .map(|p| Ok(slab::integrate(std::slice::from_ref(p), spec.alpha_power, config, table)?.value))
        .collect()
}

/// `G4` (or `G4p` when `primed`) with the indicator replaced by 1.
pub fn compute_g4_unconstrained(
    primed: bool,
    config: &QuadratureConfig,
    table: &BuchstabTable,
) -> Result<TermResult> {
    config.validate()?;
    let start = Instant::now();
    let id = if primed { TermId::G4p } else { TermId::G4 };
    let p = id.spec().alpha_power;
    let integral = match config.mode {
        Mode::Rigorous => g4::integrate(p, false, config, table)?,
        Mode::Fast => g4::fast(p, false, table)?,
    };
    Ok(TermResult {
        id,
        enclosure: integral.value,
        cells: integral.cells,
        seconds: start.elapsed().as_secs_f64(),
        certified: config.mode == Mode::Rigorous,
        budget_exceeded: integral.budget_exceeded,
        guard_hits: 0,
        mode: config.mode,
        target_width: config.target_width_4d,
    })
}
