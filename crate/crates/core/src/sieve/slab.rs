//! Double integrals `∫ α^p ∫_{β_lo}^{β_hi} ω((α−β)/β)/β² dβ dα`.
//!
//! With `v = α/β` the inner integral is exact:
//! `∫ α ω((α−β)/β)/β² dβ = g(α/β_lo) − g(α/β_hi)`, `g(v) = v ω(v)`.
//! What remains is a one-dimensional integral of
//! `F(α) = α^{p−1} (g(v_lo(α)) − g(v_hi(α)))`, enclosed per `α`-interval by
//! a second-order Taylor form (first order where `F` has a kink).

use super::adaptive::{self, Problem, Seed};
use super::{Integral, Limit, QuadratureConfig, SlabPart};
use crate::buchstab::BuchstabTable;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::scalar::Jet2;

const INITIAL_SLABS: usize = 8;
const FAST_POINTS: usize = 200_000;

/// `v = α/β = den α/(n0 + n1 α)` with its first two `α`-derivatives.
fn v_jet(limit: Limit, alpha: Enclosure) -> Result<Jet2> {
    let den = Enclosure::from_i64(limit.den);
    if limit.n0 == 0 {
        let v = den.try_div(Enclosure::from_i64(limit.n1))?;
        return Ok(Jet2 { v, d1: Enclosure::ZERO, d2: Enclosure::ZERO });
    }
    let n0 = Enclosure::from_i64(limit.n0);
    let n1 = Enclosure::from_i64(limit.n1);
    let q = n0 + n1 * alpha;
    if !(q.certainly_positive()) {
        return Err(Error::Domain(format!("inner limit not positive at alpha = {alpha}")));
    }
    let v = if alpha.is_point() {
        (den * alpha).try_div(q)?
    } else {
        // Monotone in α: the range is spanned by the endpoint values.
        let at = |a: f64| -> Result<Enclosure> {
            let a = Enclosure::point(a);
            Ok((den * a).try_div(n0 + n1 * a)?)
        };
        at(alpha.lo())?.hull(&at(alpha.hi())?)
    };
    let d1 = (den * n0).try_div(q.sqr())?;
    let d2 = (Enclosure::point(-2.0) * den * n0 * n1).try_div(q.sqr() * q)?;
    Ok(Jet2 { v, d1, d2 })
}

/// `g ∘ v` as a jet. Needs `v` away from 2 when `second` is set.
fn g_jet(table: &BuchstabTable, v: Jet2, second: bool) -> Result<Jet2> {
    let g = table.g(v.v)?;
    let g1 = table.g_deriv(v.v)?;
    let d2 = if second {
        table.g_second(v.v)? * v.d1.sqr() + g1 * v.d2
    } else {
        Enclosure::ZERO
    };
    Ok(Jet2 { v: g, d1: g1 * v.d1, d2 })
}

fn straddles(v: Enclosure, x: f64) -> bool {
    v.lo() < x && x < v.hi()
}

/// `(upper − lower)(α) · den_lo · den_hi` as `c0 + c1 α`.
fn gap(part: &SlabPart) -> (i64, i64) {
    let (l, u) = (part.lower, part.upper);
    (u.n0 * l.den - l.n0 * u.den, u.n1 * l.den - l.n1 * u.den)
}

struct SlabEval<'a> {
    part: SlabPart,
    power: i32,
    table: &'a BuchstabTable,
}

impl SlabEval<'_> {
    /// Jet of `α^{p−1}`.
    fn weight(&self, alpha: Enclosure) -> Result<Jet2> {
        Ok(match self.power - 1 {
            0 => Jet2 { v: Enclosure::ONE, d1: Enclosure::ZERO, d2: Enclosure::ZERO },
            -1 => {
                let r = alpha.recip()?;
                let r2 = r.sqr();
                Jet2 { v: r, d1: -r2, d2: Enclosure::point(2.0) * r2 * r }
            }
            p => return Err(Error::Config(format!("unsupported alpha power {}", p + 1))),
        })
    }

    fn f_jet(&self, alpha: Enclosure, second: bool) -> Result<Jet2> {
        let lo = g_jet(self.table, v_jet(self.part.lower, alpha)?, second)?;
        let hi = g_jet(self.table, v_jet(self.part.upper, alpha)?, second)?;
        Ok(self.weight(alpha)?.mul(lo.sub(hi)))
    }

    fn f_value(&self, alpha: Enclosure) -> Result<Enclosure> {
        let lo = self.table.g(v_jet(self.part.lower, alpha)?.v)?;
        let hi = self.table.g(v_jet(self.part.upper, alpha)?.v)?;
        Ok(self.weight(alpha)?.v * (lo - hi))
    }

    /// Sign of the inner range length over `[a, b]`: `Some(true)` if
    /// nonnegative throughout, `Some(false)` if nonpositive throughout.
    fn range_sign(&self, a: f64, b: f64) -> Option<bool> {
        let (c0, c1) = gap(&self.part);
        let at = |x: f64| Enclosure::from_i64(c0) + Enclosure::from_i64(c1) * Enclosure::point(x);
        let (ga, gb) = (at(a), at(b));
        if ga.lo() >= 0.0 && gb.lo() >= 0.0 {
            Some(true)
        } else if ga.hi() <= 0.0 && gb.hi() <= 0.0 {
            Some(false)
        } else {
            None
        }
    }

    /// Enclosure of `∫_a^b F`.
    fn interval(&self, a: f64, b: f64) -> Result<Enclosure> {
        let (ea, eb) = (Enclosure::point(a), Enclosure::point(b));
        let w = eb - ea;
        let box_ = Enclosure::new(a, b)?;
        let nonneg = match self.range_sign(a, b) {
            Some(false) => return Ok(Enclosure::ZERO),
            Some(true) => true,
            None => false,
        };
        let fr = self.f_value(box_)?.clamp_nonnegative();
        let zeroth = w * fr.hull(&if nonneg { fr } else { Enclosure::ZERO });
        if !nonneg {
            return Ok(zeroth);
        }
        let c = (0.5 * a + 0.5 * b).clamp(a, b);
        let ec = Enclosure::point(c);
        let fc = self.f_value(ec)?;
        let (r, l) = (eb - ec, ec - ea);
        let half = Enclosure::ratio(1, 2);
        let sixth = Enclosure::ratio(1, 6);
        let vlo = v_jet(self.part.lower, box_)?.v;
        let vhi = v_jet(self.part.upper, box_)?.v;
        let smooth = !straddles(vlo, 2.0) && !straddles(vhi, 2.0);
        let jet = self.f_jet(box_, smooth)?;
        let out = if smooth {
            w * fc + jet.d1 * (r.sqr() - l.sqr()) * half + jet.d2 * (r.sqr() * r + l.sqr() * l) * sixth
        } else {
            w * fc + jet.d1 * r.sqr() * half - jet.d1 * l.sqr() * half
        };
        Ok(out.tighten(&zeroth))
    }

    fn approx(&self, alpha: f64) -> f64 {
        let t = self.table;
        let v = |l: Limit| if l.n0 == 0 { l.den as f64 / l.n1 as f64 } else { alpha / l.eval_f64(alpha) };
        let lo = self.part.lower.eval_f64(alpha);
        let hi = self.part.upper.eval_f64(alpha);
        if hi <= lo {
            return 0.0;
        }
        let w = if self.power == 0 { 1.0 / alpha } else { 1.0 };
        w * (t.g_approx(v(self.part.lower)) - t.g_approx(v(self.part.upper)))
    }
}

/// Values of `α` in `(a, b)` where a limit's `v` crosses an integer in 2..=9.
fn seeded_breakpoints(part: &SlabPart, a: f64, b: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for l in [part.lower, part.upper] {
        if l.n0 == 0 {
            continue;
        }
        for m in 2..=9i64 {
            // den α = m (n0 + n1 α)  ⇒  α = m n0 / (den − m n1)
            let d = l.den - m * l.n1;
            if d != 0 {
                let x = (m * l.n0) as f64 / d as f64;
                if x > a && x < b {
                    out.push(x);
                }
            }
        }
    }
    out
}

pub(crate) fn integrate(
    parts: &[SlabPart],
    power: i32,
    config: &QuadratureConfig,
    table: &BuchstabTable,
) -> Result<Integral> {
    let evals: Vec<SlabEval<'_>> =
        parts.iter().map(|&part| SlabEval { part, power, table }).collect();
    let mut seeds = Vec::new();
    let mut fixed = Enclosure::ZERO;
    let mut scale = 0.0f64;
    for (idx, e) in evals.iter().enumerate() {
        let a0 = e.part.alpha.0.enclosure();
        let a1 = e.part.alpha.1.enclosure();
        let (lo, hi) = (a0.hi(), a1.lo());
        if lo >= hi {
            return Err(Error::Config("degenerate alpha range".into()));
        }
        scale = scale.max(hi - lo);
        // Inexact rational endpoints leave slivers of width ≤ 1 ulp whose
        // share of the true range is unknown: enclose by [0, w]·F.
        for s in [a0, a1] {
            if !s.is_point() {
                let w = Enclosure::new(0.0, s.width())?;
                let f = e.f_value(s)?.clamp_nonnegative().hull(&Enclosure::ZERO);
                fixed += w * f;
            }
        }
        let mut cuts: Vec<f64> =
            (0..=INITIAL_SLABS).map(|k| lo + (hi - lo) * k as f64 / INITIAL_SLABS as f64).collect();
        cuts[INITIAL_SLABS] = hi;
        if config.seeded_breakpoints {
            cuts.extend(seeded_breakpoints(&e.part, lo, hi));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            seeds.push(Seed { lo: [w[0]], hi: [w[1]], part: idx });
        }
    }
    let eval = |part: usize, lo: &[f64; 1], hi: &[f64; 1]| evals[part].interval(lo[0], hi[0]);
    let problem = Problem { parts: evals.len(), seeds, fixed, scale: [scale], eval: &eval };
    adaptive::run(&problem, config.target_width_2d, config.max_cells, config.parallelism)
}

/// Midpoint rule on a fixed grid of the reduced one-dimensional integrand.
pub(crate) fn fast(parts: &[SlabPart], power: i32, table: &BuchstabTable) -> Result<Integral> {
    let mut total = 0.0;
    for &part in parts {
        let e = SlabEval { part, power, table };
        let (a, b) = (part.alpha.0.to_f64(), part.alpha.1.to_f64());
        let h = (b - a) / FAST_POINTS as f64;
        let sum: f64 = (0..FAST_POINTS).map(|k| e.approx(a + (k as f64 + 0.5) * h)).sum();
        total += sum * h;
    }
    Ok(Integral { value: Enclosure::point(total), cells: (parts.len() * FAST_POINTS) as u64, budget_exceeded: false })
}
