//! The four-dimensional terms `G4`, `G4p`.
//!
//! The `β3` integral is done exactly: for fixed `(α, β1, β2)` the set of
//! admissible `β3` is `[L, β2]` minus the bands where `β_i + β3` or
//! `β1 + β2 + β3` falls in `[α − 1, σ]`, and over each admissible interval
//! `[t0, t1]` we have `∫ ω((A−β3)/β3)/β3² dβ3 = (g(A/t0) − g(A/t1))/A` with
//! `A = α − β1 − β2`.
//!
//! The remaining simplex `L ≤ β2 ≤ β1 ≤ α − 1` is mapped to the unit square,
//! `β1 = L + K s1`, `β2 = L + K s1 s2` with `K = α − 1 − L`, Jacobian
//! `K² s1`. On boxes where the ordering of all interval endpoints is certain
//! the integrand is smooth and a first-order centered form is used; other
//! boxes get the conservative enclosure `[0, volume · sup]`.

use rayon::prelude::*;

use super::adaptive::{self, Problem, Seed};
use super::{f4_cell, CellClass, Integral, QuadratureConfig, Rational};
use crate::buchstab::BuchstabTable;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::scalar::{Grad, Scalar};

const ALPHA_RANGE: (Rational, Rational) = (Rational::new(8, 7), Rational::new(7, 6));
const INITIAL_SPLITS: usize = 4;
const FAST_ALPHA: usize = 96;
const FAST_S: usize = 192;

/// `(c0 + ca α)/3 + c1 β1 + c2 β2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Affine {
    c0: i64,
    ca: i64,
    c1: i64,
    c2: i64,
}

impl Affine {
    const fn new(c0: i64, ca: i64, c1: i64, c2: i64) -> Self {
        Affine { c0, ca, c1, c2 }
    }

    fn sub(self, o: Affine) -> Affine {
        Affine::new(self.c0 - o.c0, self.ca - o.ca, self.c1 - o.c1, self.c2 - o.c2)
    }

    /// Coefficients of `(p0 + pa α)/3 + K s1 (c1 + c2 s2)` after substituting
    /// the map (`L = (5 − 4α)/3`).
    fn mapped(self) -> (i64, i64) {
        let s = self.c1 + self.c2;
        (self.c0 + 5 * s, self.ca - 4 * s)
    }

    fn eval<S: Scalar>(self, x: &Coords<S>) -> S {
        let (p0, pa) = self.mapped();
        let third = Enclosure::ratio(1, 3);
        let lin = S::constant(Enclosure::from_i64(p0) * third)
            + S::constant(Enclosure::from_i64(pa) * third) * x.alpha;
        let q = S::constant(Enclosure::from_i64(self.c1))
            + S::constant(Enclosure::from_i64(self.c2)) * x.s2;
        lin + x.k * x.s1 * q
    }

    fn eval_f64(self, alpha: f64, b1: f64, b2: f64) -> f64 {
        (self.c0 as f64 + self.ca as f64 * alpha) / 3.0 + self.c1 as f64 * b1 + self.c2 as f64 * b2
    }

    /// Exact range over a box, up to rounding.
    ///
    /// With `K = (7α − 8)/3`: `7·value = (7 p0 + 8 pa)/3 + K·(pa + 7 s1 (c1 + c2 s2))`.
    /// `K` depends on `α` only and the second factor is bilinear in
    /// `(s1, s2)`, so the range is the product of the factor ranges, the
    /// latter attained at the corners.
    fn range(self, b: &BoxRanges) -> Enclosure {
        let (p0, pa) = self.mapped();
        let cst = Enclosure::ratio(7 * p0 + 8 * pa, 3);
        let mut r: Option<Enclosure> = None;
        for s1 in [b.s1.lo(), b.s1.hi()] {
            for s2 in [b.s2.lo(), b.s2.hi()] {
                let v = Enclosure::from_i64(pa)
                    + Enclosure::point(7.0 * s1)
                        * (Enclosure::from_i64(self.c1) + Enclosure::from_i64(self.c2) * Enclosure::point(s2));
                r = Some(r.map_or(v, |acc| acc.hull(&v)));
            }
        }
        (cst + b.k * r.unwrap()).try_div(Enclosure::point(7.0)).unwrap()
    }
}

const LOWER: Affine = Affine::new(5, -4, 0, 0);
const BETA2: Affine = Affine::new(0, 0, 0, 1);
const ALPHA: Affine = Affine::new(0, 3, 0, 0);
const A_REST: Affine = Affine::new(0, 3, -1, -1);
const BETA1: Affine = Affine::new(0, 0, 1, 0);

/// `α − 1 − S` and `σ − S` for `S = c1 β1 + c2 β2`.
fn band(c1: i64, c2: i64) -> (Affine, Affine) {
    (Affine::new(-3, 3, -c1, -c2), Affine::new(2, -1, -c1, -c2))
}

/// Sums entering `f4` that involve `β3`, as `(c1, c2)` in `β3 + c1 β1 + c2 β2`.
const BAND_SUMS: [(i64, i64); 3] = [(1, 0), (0, 1), (1, 1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Event {
    Start,
    End,
    Open(usize),
    Close(usize),
}

fn breakpoints(indicator: bool) -> Vec<(Affine, Event)> {
    let mut pts = vec![(LOWER, Event::Start), (BETA2, Event::End)];
    if indicator {
        for (k, &(c1, c2)) in BAND_SUMS.iter().enumerate() {
            let (lo, hi) = band(c1, c2);
            pts.push((lo, Event::Open(k)));
            pts.push((hi, Event::Close(k)));
        }
    }
    pts
}

/// Admissible segments from breakpoints sorted in increasing order.
fn walk(sorted: &[(Affine, Event)]) -> Vec<(usize, usize)> {
    let (mut started, mut ended) = (false, false);
    let mut opened = [false; 3];
    let mut closed = [false; 3];
    let mut segs: Vec<(usize, usize)> = Vec::new();
    for i in 0..sorted.len().saturating_sub(1) {
        match sorted[i].1 {
            Event::Start => started = true,
            Event::End => ended = true,
            Event::Open(k) => opened[k] = true,
            Event::Close(k) => closed[k] = true,
        }
        let free = (0..3).all(|k| !(opened[k] && !closed[k]));
        if started && !ended && free && sorted[i].0 != sorted[i + 1].0 {
            match segs.last_mut() {
                Some(last) if last.1 == i => last.1 = i + 1,
                _ => segs.push((i, i + 1)),
            }
        }
    }
    segs
}

/// Box in mapped coordinates with the derived ranges used for decisions.
struct BoxRanges {
    alpha: Enclosure,
    s1: Enclosure,
    s2: Enclosure,
    k: Enclosure,
}

impl BoxRanges {
    fn new(lo: &[f64; 3], hi: &[f64; 3]) -> Result<Self> {
        let alpha = Enclosure::new(lo[0], hi[0])?;
        let k = Enclosure::new(k_of(lo[0]).lo(), k_of(hi[0]).hi())?;
        Ok(BoxRanges { alpha, s1: Enclosure::new(lo[1], hi[1])?, s2: Enclosure::new(lo[2], hi[2])?, k })
    }
}

fn k_of(alpha: f64) -> Enclosure {
    (Enclosure::point(7.0) * Enclosure::point(alpha) - Enclosure::point(8.0))
        .try_div(Enclosure::point(3.0))
        .unwrap()
}

struct Coords<S> {
    alpha: S,
    s1: S,
    s2: S,
    k: S,
}

impl<S: Scalar> Coords<S> {
    fn new(alpha: S, s1: S, s2: S) -> Self {
        let k = (S::constant(Enclosure::point(7.0)) * alpha - S::constant(Enclosure::point(8.0)))
            * S::constant(Enclosure::ratio(1, 3));
        Coords { alpha, s1, s2, k }
    }
}

/// Decision about a box: the integrand is identically zero, smooth with the
/// listed admissible segments, or undetermined.
enum Structure {
    Zero,
    Segments(Vec<(Affine, Affine)>),
    Undetermined,
}

struct G4Eval<'a> {
    power: i32,
    indicator: bool,
    table: &'a BuchstabTable,
    points: Vec<(Affine, Event)>,
}

impl<'a> G4Eval<'a> {
    fn new(power: i32, indicator: bool, table: &'a BuchstabTable) -> Self {
        G4Eval { power, indicator, table, points: breakpoints(indicator) }
    }

    /// `β1 + β2` against the band: `Some(true)` if certainly inside a.e.,
    /// `Some(false)` if certainly outside a.e., `None` otherwise.
    fn pair_in_band(&self, b: &BoxRanges) -> Option<bool> {
        if !self.indicator {
            return Some(false);
        }
        let (lo, hi) = band(1, 1);
        // β1 + β2 − (α − 1) = −lo,  σ − β1 − β2 = hi
        let above_lo = Affine::new(-lo.c0, -lo.ca, -lo.c1, -lo.c2).range(b);
        let below_hi = hi.range(b);
        if above_lo.lo() >= 0.0 && below_hi.lo() >= 0.0 {
            Some(true)
        } else if above_lo.hi() <= 0.0 || below_hi.hi() <= 0.0 {
            Some(false)
        } else {
            None
        }
    }

    fn structure(&self, lo: &[f64; 3], hi: &[f64; 3], b: &BoxRanges) -> Structure {
        match self.pair_in_band(b) {
            Some(true) => return Structure::Zero,
            None => return Structure::Undetermined,
            Some(false) => {}
        }
        let c: [f64; 3] = std::array::from_fn(|i| 0.5 * lo[i] + 0.5 * hi[i]);
        let (a, b1, b2) = mapped_f64(c[0], c[1], c[2]);
        let mut pts = self.points.clone();
        pts.sort_by(|x, y| x.0.eval_f64(a, b1, b2).total_cmp(&y.0.eval_f64(a, b1, b2)));
        for w in pts.windows(2) {
            if w[0].0 != w[1].0 && w[1].0.sub(w[0].0).range(b).lo() < 0.0 {
                return Structure::Undetermined;
            }
        }
        let segs = walk(&pts);
        if segs.is_empty() {
            Structure::Zero
        } else {
            Structure::Segments(segs.into_iter().map(|(i, j)| (pts[i].0, pts[j].0)).collect())
        }
    }

    /// `J α^p/(β1 β2) · Σ (g(A/t0) − g(A/t1))/A`.
    fn integrand<S: Scalar>(&self, x: &Coords<S>, segs: &[(Affine, Affine)]) -> Result<S> {
        let a_rest = A_REST.eval(x);
        let g_at = |t: Affine| -> Result<S> {
            let v = a_rest.try_div(t.eval(x))?;
            let val = self.table.g(v.value())?;
            let dv = if S::NEEDS_DERIVATIVE { self.table.g_deriv(v.value())? } else { Enclosure::ZERO };
            Ok(v.chain(val, dv))
        };
        let mut sum = S::constant(Enclosure::ZERO);
        for &(t0, t1) in segs {
            sum = sum + g_at(t0)? - g_at(t1)?;
        }
        let b1 = BETA1.eval(x);
        let b2 = BETA2.eval(x);
        let mut pref = x.k * x.k * x.s1;
        if self.power == 1 {
            pref = pref * x.alpha;
        }
        Ok((pref * sum).try_div(b1 * b2 * a_rest)?)
    }

    fn centered(&self, lo: &[f64; 3], hi: &[f64; 3], b: &BoxRanges, segs: &[(Affine, Affine)]) -> Result<Enclosure> {
        let gx = Coords::new(
            Grad::<3>::var(b.alpha, 0),
            Grad::<3>::var(b.s1, 1),
            Grad::<3>::var(b.s2, 2),
        );
        let over = self.integrand(&gx, segs)?;
        let c: [f64; 3] = std::array::from_fn(|i| (0.5 * lo[i] + 0.5 * hi[i]).clamp(lo[i], hi[i]));
        let cx = Coords::new(Enclosure::point(c[0]), Enclosure::point(c[1]), Enclosure::point(c[2]));
        let at_c = self.integrand(&cx, segs)?;
        let w: [Enclosure; 3] = std::array::from_fn(|i| Enclosure::point(hi[i]) - Enclosure::point(lo[i]));
        let vol = w[0] * w[1] * w[2];
        let half = Enclosure::ratio(1, 2);
        let mut out = vol * at_c;
        for i in 0..3 {
            let others = w[(i + 1) % 3] * w[(i + 2) % 3];
            let r = Enclosure::point(hi[i]) - Enclosure::point(c[i]);
            let l = Enclosure::point(c[i]) - Enclosure::point(lo[i]);
            out = out + over.d[i] * others * r.sqr() * half - over.d[i] * others * l.sqr() * half;
        }
        let zeroth = vol * over.v.clamp_nonnegative();
        Ok(out.clamp_nonnegative().tighten(&zeroth))
    }

    /// `[0, volume · sup]` from a piecewise bound on the `β3` integral.
    fn fallback(&self, lo: &[f64; 3], hi: &[f64; 3], b: &BoxRanges) -> Result<Enclosure> {
        let vol = (Enclosure::point(hi[0]) - Enclosure::point(lo[0]))
            * (Enclosure::point(hi[1]) - Enclosure::point(lo[1]))
            * (Enclosure::point(hi[2]) - Enclosure::point(lo[2]));
        if self.pair_in_band(b) == Some(true) {
            return Ok(Enclosure::ZERO);
        }
        let lower = LOWER.range(b);
        let upper = BETA2.range(b);
        let (b1, b2) = (BETA1.range(b), upper);
        let a_rest = A_REST.range(b);
        let alpha = ALPHA.range(b).tighten(&b.alpha);
        let mut cuts = vec![lower.lo(), upper.hi()];
        let bands: Vec<(Enclosure, Enclosure)> = if self.indicator {
            BAND_SUMS.iter().map(|&(c1, c2)| {
                let (l, h) = band(c1, c2);
                (l.range(b), h.range(b))
            }).collect()
        } else {
            Vec::new()
        };
        for e in [lower, upper].iter().chain(bands.iter().flat_map(|(l, h)| [l, h])) {
            for x in [e.lo(), e.hi()] {
                if x > lower.lo() && x < upper.hi() {
                    cuts.push(x);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut phi = 0.0f64;
        for w in cuts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            if t0 >= t1 || t0 <= 0.0 {
                continue;
            }
            let piece = Enclosure::new(t0, t1)?;
            if self.indicator {
                let banned = bands.iter().any(|(l, h)| t0 >= l.hi() && t1 <= h.lo());
                if banned || f4_cell(alpha, b1, b2, piece) == CellClass::Outside {
                    continue;
                }
            }
            let (e0, e1) = (Enclosure::point(t0), Enclosure::point(t1));
            let u_lo = (Enclosure::point(a_rest.lo()) - e1).try_div(e1)?;
            let u_hi = (Enclosure::point(a_rest.hi()) - e0).try_div(e0)?;
            let u = Enclosure::new(u_lo.lo(), u_hi.hi().max(u_lo.lo()))?;
            let by_omega = self.table.omega(u)?.hi() * (e0.recip()? - e1.recip()?).hi();
            let g_hi = self.table.g(Enclosure::point(a_rest.hi()).try_div(e0)?)?.hi();
            let g_lo = self.table.g(Enclosure::point(a_rest.lo()).try_div(e1)?)?.lo();
            let by_g = ((Enclosure::point(g_hi) - Enclosure::point(g_lo))
                .try_div(Enclosure::point(a_rest.lo()))?)
            .hi();
            let bound = by_omega.min(by_g).max(0.0);
            phi = (Enclosure::point(phi) + Enclosure::point(bound)).hi();
        }
        let mut pref = b.k.sqr() * b.s1;
        if self.power == 1 {
            pref = pref * alpha;
        }
        let pref = pref.try_div(b1 * b2)?;
        let sup = (pref * Enclosure::point(phi)).hi().max(0.0);
        Ok(vol * Enclosure::new(0.0, sup)?)
    }

    fn eval_box(&self, lo: &[f64; 3], hi: &[f64; 3]) -> Result<Enclosure> {
        let b = BoxRanges::new(lo, hi)?;
        match self.structure(lo, hi, &b) {
            Structure::Zero => Ok(Enclosure::ZERO),
            Structure::Segments(segs) => match self.centered(lo, hi, &b, &segs) {
                Ok(v) => Ok(v),
                Err(_) => self.fallback(lo, hi, &b),
            },
            Structure::Undetermined => self.fallback(lo, hi, &b),
        }
    }

    /// Uncertified integrand in mapped coordinates.
    fn approx(&self, alpha: f64, s1: f64, s2: f64) -> f64 {
        let k = (7.0 * alpha - 8.0) / 3.0;
        let (_, b1, b2) = mapped_f64(alpha, s1, s2);
        if self.indicator {
            let s = b1 + b2;
            if s >= alpha - 1.0 && s <= (2.0 - alpha) / 3.0 {
                return 0.0;
            }
        }
        let a_rest = alpha - b1 - b2;
        let mut pts: Vec<(f64, Event)> =
            self.points.iter().map(|(p, e)| (p.eval_f64(alpha, b1, b2), *e)).collect();
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (mut started, mut ended) = (false, false);
        let mut depth = [false; 3];
        let mut sum = 0.0;
        for i in 0..pts.len() - 1 {
            match pts[i].1 {
                Event::Start => started = true,
                Event::End => ended = true,
                Event::Open(j) => depth[j] = true,
                Event::Close(j) => depth[j] = false,
            }
            if started && !ended && !depth.iter().any(|&d| d) && pts[i + 1].0 > pts[i].0 {
                sum += self.table.g_approx(a_rest / pts[i].0) - self.table.g_approx(a_rest / pts[i + 1].0);
            }
        }
        let w = if self.power == 1 { alpha } else { 1.0 };
        k * k * s1 * w * sum / (b1 * b2 * a_rest)
    }
}

fn mapped_f64(alpha: f64, s1: f64, s2: f64) -> (f64, f64, f64) {
    let l = (5.0 - 4.0 * alpha) / 3.0;
    let k = (7.0 * alpha - 8.0) / 3.0;
    (alpha, l + k * s1, l + k * s1 * s2)
}

pub(crate) fn integrate(power: i32, indicator: bool, config: &QuadratureConfig, table: &BuchstabTable) -> Result<Integral> {
    let ev = G4Eval::new(power, indicator, table);
    let a0 = ALPHA_RANGE.0.enclosure();
    let a1 = ALPHA_RANGE.1.enclosure();
    let (lo, hi) = (a0.hi(), a1.lo());
    let mut fixed = Enclosure::ZERO;
    for s in [a0, a1] {
        if !s.is_point() {
            fixed += ev.fallback(&[s.lo(), 0.0, 0.0], &[s.hi(), 1.0, 1.0], &BoxRanges::new(&[s.lo(), 0.0, 0.0], &[s.hi(), 1.0, 1.0])?)?;
        }
    }
    let n = INITIAL_SPLITS;
    let mut seeds = Vec::with_capacity(n * n * n);
    let at = |k: usize, a: f64, b: f64| if k == n { b } else { a + (b - a) * k as f64 / n as f64 };
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                seeds.push(Seed {
                    lo: [at(i, lo, hi), at(j, 0.0, 1.0), at(l, 0.0, 1.0)],
                    hi: [at(i + 1, lo, hi), at(j + 1, 0.0, 1.0), at(l + 1, 0.0, 1.0)],
                    part: 0,
                });
            }
        }
    }
    let eval = |_: usize, l: &[f64; 3], h: &[f64; 3]| ev.eval_box(l, h);
    let problem = Problem { parts: 1, seeds, fixed, scale: [hi - lo, 1.0, 1.0], eval: &eval };
    adaptive::run(&problem, config.target_width_4d, config.max_cells, config.parallelism)
        .map_err(|e| match e {
            Error::Range { .. } => e,
            other => other,
        })
}

/// Midpoint rule on a fixed `(α, s1, s2)` grid with the exact `β3` integral.
pub(crate) fn fast(power: i32, indicator: bool, table: &BuchstabTable) -> Result<Integral> {
    let ev = G4Eval::new(power, indicator, table);
    let (a, b) = (ALPHA_RANGE.0.to_f64(), ALPHA_RANGE.1.to_f64());
    let ha = (b - a) / FAST_ALPHA as f64;
    let hs = 1.0 / FAST_S as f64;
    let slices: Vec<f64> = (0..FAST_ALPHA)
        .into_par_iter()
        .map(|i| {
            let alpha = a + (i as f64 + 0.5) * ha;
            let mut acc = 0.0;
            for j in 0..FAST_S {
                let s1 = (j as f64 + 0.5) * hs;
                for l in 0..FAST_S {
                    acc += ev.approx(alpha, s1, (l as f64 + 0.5) * hs);
                }
            }
            acc
        })
        .collect();
    let total = slices.iter().sum::<f64>() * ha * hs * hs;
    Ok(Integral {
        value: Enclosure::point(total),
        cells: (FAST_ALPHA * FAST_S * FAST_S) as u64,
        budget_exceeded: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_box() -> ([f64; 3], [f64; 3]) {
        ([8.0 / 7.0 + 1e-3, 0.0, 0.0], [7.0 / 6.0, 1.0, 1.0])
    }

    #[test]
    fn affine_range_contains_samples() {
        let (lo, hi) = ([1.15, 0.2, 0.3], [1.16, 0.6, 0.9]);
        let b = BoxRanges::new(&lo, &hi).unwrap();
        for p in breakpoints(true).iter().map(|x| x.0).chain([A_REST, BETA1]) {
            let r = p.range(&b);
            for i in 0..=4 {
                for j in 0..=4 {
                    for k in 0..=4 {
                        let a = lo[0] + (hi[0] - lo[0]) * i as f64 / 4.0;
                        let s1 = lo[1] + (hi[1] - lo[1]) * j as f64 / 4.0;
                        let s2 = lo[2] + (hi[2] - lo[2]) * k as f64 / 4.0;
                        let (_, b1, b2) = mapped_f64(a, s1, s2);
                        let v = p.eval_f64(a, b1, b2);
                        assert!(r.lo() - 1e-12 <= v && v <= r.hi() + 1e-12, "{p:?}: {v} not in {r:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn ties_on_faces_are_certain() {
        // β1 − β2 = K s1 (1 − s2) ≥ 0 with equality on the face s2 = 1.
        let b = BoxRanges::new(&[1.15, 0.5, 0.9], &[1.16, 0.6, 1.0]).unwrap();
        assert!(BETA1.sub(BETA2).range(&b).lo() >= 0.0);
        // σ − β1 − L = K (1 − s1) ≥ 0 with equality on s1 = 1.
        let b = BoxRanges::new(&[1.15, 0.9, 0.2], &[1.16, 1.0, 0.3]).unwrap();
        let (_, sig_b1) = band(1, 0);
        assert!(sig_b1.sub(LOWER).range(&b).lo() >= 0.0);
    }

    #[test]
    fn walk_excludes_bands() {
        let mk = |e| (LOWER, e);
        // Start, Open, Close, End with distinct dummy forms.
        let pts = vec![
            (Affine::new(0, 0, 0, 0), Event::Start),
            (Affine::new(1, 0, 0, 0), Event::Open(0)),
            (Affine::new(2, 0, 0, 0), Event::Close(0)),
            (Affine::new(3, 0, 0, 0), Event::End),
        ];
        assert_eq!(walk(&pts), vec![(0, 1), (2, 3)]);
        let _ = mk(Event::Start);
    }

    #[test]
    fn box_enclosures_contain_midpoint_sums() {
        let table = BuchstabTable::build(10.0, 1e-4).unwrap();
        for indicator in [true, false] {
            let ev = G4Eval::new(1, indicator, &table);
            let (lo, hi) = full_box();
            for (l, h) in [
                ([lo[0], 0.5, 0.5], [lo[0] + 0.005, 0.75, 0.75]),
                ([1.16, 0.25, 0.75], [hi[0], 0.5, 1.0]),
                ([1.155, 0.8, 0.4], [1.16, 1.0, 0.6]),
            ] {
                let enc = ev.eval_box(&l, &h).unwrap();
                let n = 40;
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let x: [f64; 3] = std::array::from_fn(|d| {
                                let t = [i, j, k][d] as f64 + 0.5;
                                l[d] + (h[d] - l[d]) * t / n as f64
                            });
                            acc += ev.approx(x[0], x[1], x[2]);
                        }
                    }
                }
                let vol: f64 = (0..3).map(|d| h[d] - l[d]).product();
                let est = acc * vol / (n * n * n) as f64;
                let slack = 1e-3 * enc.width() + 1e-12;
                assert!(enc.lo() - slack <= est && est <= enc.hi() + slack, "{enc:?} vs {est}");
            }
        }
    }
}
