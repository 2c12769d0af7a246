//! Independent, uncertified cross-checks.
//!
//! Nothing here touches [`crate::buchstab::BuchstabTable`] or enclosure
//! arithmetic: `ω` comes from a separate plain-`f64` method-of-steps solve,
//! and the integrals are estimated by Monte Carlo or nested midpoint sums.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sieve::{f4, Shape, TermId};

const OMEGA_STEPS: usize = 4000;
const OMEGA_MAX: f64 = 10.0;
const CHUNK: u64 = 1 << 16;

/// Buchstab's `ω` on `[1, 10]` by the trapezoid rule applied to
/// `(u ω(u))' = ω(u − 1)`, linearly interpolated.
pub struct OmegaGrid {
    n: usize,
    values: Vec<f64>,
}

impl OmegaGrid {
    pub fn new(steps_per_unit: usize) -> Self {
        let n = steps_per_unit;
        let h = 1.0 / n as f64;
        let total = ((OMEGA_MAX - 1.0) * n as f64).round() as usize;
        let mut values = Vec::with_capacity(total + 1);
        for i in 0..=n {
            values.push(1.0 / (1.0 + i as f64 * h));
        }
        let mut g = 1.0;
        for i in n + 1..=total {
            g += 0.5 * h * (values[i - 1 - n] + values[i - n]);
            values.push(g / (1.0 + i as f64 * h));
        }
        OmegaGrid { n, values }
    }

    /// `ω(u)`, zero below 1.
    pub fn eval(&self, u: f64) -> f64 {
        if u < 1.0 {
            return 0.0;
        }
        let x = (u - 1.0) * self.n as f64;
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let t = x - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

fn omega_grid() -> &'static OmegaGrid {
    static GRID: OnceLock<OmegaGrid> = OnceLock::new();
    GRID.get_or_init(|| OmegaGrid::new(OMEGA_STEPS))
}

/// `ω(u)` from the independent solver.
pub fn omega_f64(u: f64) -> f64 {
    omega_grid().eval(u)
}

/// Integration region and integrand of one term in plain `f64`.
struct Geometry {
    shape: Shape,
    alpha: (f64, f64),
    power: i32,
}

impl Geometry {
    fn new(id: TermId, tau: f64) -> Result<Self> {
        let spec = id.spec();
        let mut alpha = (spec.alpha.0.to_f64(), spec.alpha.1.to_f64());
        if spec.tau_dependent {
            if !(tau.is_finite() && tau >= 1.25) {
                return Err(Error::Domain(format!("tau must be at least 5/4, got {tau}")));
            }
            alpha.1 = tau;
        }
        Ok(Geometry { shape: spec.shape, alpha, power: spec.alpha_power })
    }

    fn weight(&self, a: f64) -> f64 {
        a.powi(self.power)
    }

    /// Box containing the region: `α` first, then the `β` coordinates.
    fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut b = vec![self.alpha];
        match &self.shape {
            Shape::Closed { .. } => {}
            Shape::Slab(parts) => {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for p in parts {
                    for a in [p.alpha.0.to_f64(), p.alpha.1.to_f64()] {
                        lo = lo.min(p.lower.eval_f64(a)).min(p.upper.eval_f64(a));
                        hi = hi.max(p.lower.eval_f64(a)).max(p.upper.eval_f64(a));
                    }
                }
                b.push((lo, hi));
            }
            Shape::Nested4 => {
                let lo = (5.0 - 4.0 * self.alpha.1) / 3.0;
                let hi = self.alpha.1 - 1.0;
                b.extend([(lo, hi); 3]);
            }
        }
        b
    }

    /// Integrand times the region indicator at a point.
    fn value(&self, x: &[f64]) -> f64 {
        let a = x[0];
        match &self.shape {
            Shape::Closed { base } => *base as f64 * self.weight(a),
            Shape::Slab(parts) => {
                let b = x[1];
                let inside = parts.iter().filter(|p| {
                    a >= p.alpha.0.to_f64()
                        && a <= p.alpha.1.to_f64()
                        && b >= p.lower.eval_f64(a)
                        && b <= p.upper.eval_f64(a)
                });
                let k = inside.count() as f64;
                if k == 0.0 {
                    0.0
                } else {
                    k * self.weight(a) * omega_f64((a - b) / b) / (b * b)
                }
            }
            Shape::Nested4 => {
                let (b1, b2, b3) = (x[1], x[2], x[3]);
                let l = (5.0 - 4.0 * a) / 3.0;
                if !(l <= b3 && b3 <= b2 && b2 <= b1 && b1 <= a - 1.0) || !f4(a, b1, b2, b3) {
                    return 0.0;
                }
                self.weight(a) * omega_f64((a - b1 - b2 - b3) / b3) / (b1 * b2 * b3 * b3)
            }
        }
    }
}

/// Monte Carlo estimate of a term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub id: TermId,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    /// Samples that fell inside the region.
    pub accepted: u64,
    pub seed: u64,
    /// No sample landed in the region; `mean` and `stderr` are meaningless.
    pub degenerate: bool,
}

impl OracleEstimate {
    /// Whether `value` lies within four standard errors of the mean.
    pub fn agrees_with(&self, value: f64) -> bool {
        !self.degenerate && (self.mean - value).abs() <= 4.0 * self.stderr + 1e-12
    }
}

#[derive(Clone, Copy)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    accepted: u64,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        let mean = self.mean + delta * o.n as f64 / n as f64;
        let m2 = self.m2 + o.m2 + delta * delta * self.n as f64 * o.n as f64 / n as f64;
        Moments { n, mean, m2, accepted: self.accepted + o.accepted }
    }
}

/// Uniform sampling over the term's bounding box, ChaCha8 seeded with `seed`;
/// chunk `k` of 2^16 samples uses stream `k`, so the result does not depend
/// on how chunks are scheduled.
pub fn mc_term(id: TermId, samples: u64, seed: u64, tau: f64) -> Result<OracleEstimate> {
    if samples < 10_000 {
        return Err(Error::Config(format!("need at least 10^4 samples, got {samples}")));
    }
    let geo = Geometry::new(id, tau)?;
    let bbox = geo.bounding_box();
    let volume: f64 = bbox.iter().map(|(a, b)| b - a).product();
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let count = CHUNK.min(samples - k * CHUNK);
            let mut m = Moments { n: 0, mean: 0.0, m2: 0.0, accepted: 0 };
            let mut x = vec![0.0; bbox.len()];
            for _ in 0..count {
                for (xi, (a, b)) in x.iter_mut().zip(&bbox) {
                    *xi = a + (b - a) * rng.random::<f64>();
                }
                let v = volume * geo.value(&x);
                if v != 0.0 {
                    m.accepted += 1;
                }
                m.n += 1;
                let d = v - m.mean;
                m.mean += d / m.n as f64;
                m.m2 += d * (v - m.mean);
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments { n: 0, mean: 0.0, m2: 0.0, accepted: 0 }, Moments::merge);
    let var = if total.n > 1 { total.m2 / (total.n - 1) as f64 } else { 0.0 };
    Ok(OracleEstimate {
        id,
        mean: total.mean,
        stderr: (var.max(0.0) / total.n as f64).sqrt(),
        samples: total.n,
        accepted: total.accepted,
        seed,
        degenerate: total.accepted == 0,
    })
}

fn midpoints(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = (hi - lo) / n as f64;
    (0..n).map(move |i| (lo + (i as f64 + 0.5) * h, h))
}

/// Nested midpoint rule with `grid` points per dimension, each inner range
/// following its limits.
pub fn riemann_fast(id: TermId, grid: usize, tau: f64) -> Result<f64> {
    if grid < 10 {
        return Err(Error::Config(format!("grid must be at least 10, got {grid}")));
    }
    let geo = Geometry::new(id, tau)?;
    let total = match &geo.shape {
        Shape::Closed { .. } => {
            midpoints(geo.alpha.0, geo.alpha.1, grid).map(|(a, h)| h * geo.value(&[a])).sum()
        }
        Shape::Slab(parts) => parts
            .iter()
            .map(|p| {
                let (a0, a1) = (p.alpha.0.to_f64(), p.alpha.1.to_f64());
                midpoints(a0, a1, grid)
                    .collect::<Vec<_>>()
                    .into_par_iter()
                    .map(|(a, ha)| {
                        let (lo, hi) = (p.lower.eval_f64(a), p.upper.eval_f64(a));
                        if hi <= lo {
                            return 0.0;
                        }
                        let w = geo.weight(a);
                        ha * midpoints(lo, hi, grid)
                            .map(|(b, hb)| hb * w * omega_f64((a - b) / b) / (b * b))
                            .sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .sum(),
        Shape::Nested4 => midpoints(geo.alpha.0, geo.alpha.1, grid)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(a, ha)| {
                let l = (5.0 - 4.0 * a) / 3.0;
                let mut acc = 0.0;
                for (b1, h1) in midpoints(l, a - 1.0, grid) {
                    for (b2, h2) in midpoints(l, b1, grid) {
                        for (b3, h3) in midpoints(l, b2, grid) {
                            acc += h1 * h2 * h3 * geo.value(&[a, b1, b2, b3]);
                        }
                    }
                }
                ha * acc
            })
            .sum(),
    };
    Ok(total)
}

/// Count of `n ∈ [2, x_max]` whose `n² + 1` has a primitive divisor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveCount {
    pub x_max: u64,
    pub count: u64,
    /// `count / (x_max − 1)`.
    pub ratio: f64,
}

pub const EMPIRICAL_MAX: u64 = 10_000_000;

/// Largest prime factor of `n² + 1` for every `n ≤ x_max`.
///
/// Processing `n` in increasing order and dividing each prime out of all
/// `m ≡ ±n (mod p)`: when `n` is reached, the primes left in `n² + 1` are
/// exactly those with smallest root `n`, hence larger than `2n`, and at most
/// one such prime fits. So what is left is 1 or a prime.
pub fn largest_prime_factors(x_max: u64) -> Vec<u64> {
    let len = x_max as usize + 1;
    let mut rest: Vec<u64> = (0..len as u64).map(|n| n * n + 1).collect();
    let mut largest = vec![1u64; len];
    for n in 1..len {
        let p = rest[n];
        if p == 1 {
            continue;
        }
        for root in [n as u64, p - (n as u64) % p] {
            let mut m = root;
            while m < len as u64 {
                let i = m as usize;
                while rest[i] % p == 0 {
                    rest[i] /= p;
                }
                largest[i] = largest[i].max(p);
                m = match m.checked_add(p) {
                    Some(v) => v,
                    None => break,
                };
            }
            if p == 2 {
                break;
            }
        }
    }
    largest
}

/// Counts `n ∈ [2, x_max]` with `P⁺(n² + 1) > 2n`.
pub fn empirical_rho(x_max: u64) -> Result<PrimitiveCount> {
    if !(2..=EMPIRICAL_MAX).contains(&x_max) {
        return Err(Error::Config(format!("x_max must be in [2, {EMPIRICAL_MAX}], got {x_max}")));
    }
    let lpf = largest_prime_factors(x_max);
    let count = (2..=x_max).filter(|&n| lpf[n as usize] > 2 * n).count() as u64;
    Ok(PrimitiveCount { x_max, count, ratio: count as f64 / (x_max - 1) as f64 })
}

/// Count from the definition: `n² + 1` has a prime factor dividing no
/// earlier `m² + 1`, `1 ≤ m < n`. Trial division; for small `x_max`.
pub fn primitive_count_by_definition(x_max: u64) -> Result<PrimitiveCount> {
    if !(2..=100_000).contains(&x_max) {
        return Err(Error::Config(format!("x_max must be in [2, 100000], got {x_max}")));
    }
    let mut seen = std::collections::HashSet::new();
    let mut count = 0;
    for n in 1..=x_max {
        let mut m = n * n + 1;
        let mut fresh = false;
        let mut d = 2;
        while d * d <= m {
            if m % d == 0 {
                fresh |= seen.insert(d);
                while m % d == 0 {
                    m /= d;
                }
            }
            d += 1;
        }
        if m > 1 {
            fresh |= seen.insert(m);
        }
        if fresh && n >= 2 {
            count += 1;
        }
    }
    Ok(PrimitiveCount { x_max, count, ratio: count as f64 / (x_max - 1) as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_solver_matches_closed_forms() {
        assert!((omega_f64(1.5) - 2.0 / 3.0).abs() < 1e-12);
        assert!((omega_f64(2.5) - 0.5621860432).abs() < 1e-7);
        assert!((omega_f64(3.0) - 0.5643823935).abs() < 1e-7);
        assert!((omega_f64(8.0) - 0.5614594836).abs() < 1e-7);
        assert_eq!(omega_f64(0.9), 0.0);
    }

    #[test]
    fn small_counts() {
        assert_eq!(empirical_rho(7).unwrap().count, 4);
        assert_eq!(empirical_rho(2).unwrap().count, 1);
        assert!(empirical_rho(1).is_err());
        assert!(empirical_rho(EMPIRICAL_MAX + 1).is_err());
    }

    #[test]
    fn largest_factors_by_trial_division() {
        let lpf = largest_prime_factors(300);
        for n in 1..=300u64 {
            let mut m = n * n + 1;
            let mut big = 1;
            let mut d = 2;
            while d * d <= m {
                while m % d == 0 {
                    m /= d;
                    big = d;
                }
                d += 1;
            }
            if m > 1 {
                big = big.max(m);
            }
            assert_eq!(lpf[n as usize], big, "n = {n}");
        }
    }

    #[test]
    fn criterion_matches_definition() {
        for x in [2, 7, 50, 1000] {
            assert_eq!(empirical_rho(x).unwrap().count, primitive_count_by_definition(x).unwrap().count);
        }
    }

    #[test]
    fn mc_is_deterministic_and_needs_samples() {
        let a = mc_term(TermId::G2, 20_000, 3, 1.317).unwrap();
        let b = mc_term(TermId::G2, 20_000, 3, 1.317).unwrap();
        assert_eq!(a, b);
        assert!(mc_term(TermId::G2, 100, 3, 1.317).is_err());
    }

    #[test]
    fn mc_closed_form() {
        let e = mc_term(TermId::G0, 100_000, 9, 1.317).unwrap();
        assert!(e.agrees_with(1.0 / 6.0), "{e:?}");
    }

    #[test]
    fn riemann_closed_forms() {
        assert!((riemann_fast(TermId::G5, 10_000, 1.317).unwrap() - 29.0 / 72.0).abs() < 1e-6);
        assert!((riemann_fast(TermId::G7p, 10_000, 1.317).unwrap() - 0.268).abs() < 1e-9);
        assert!(riemann_fast(TermId::G5, 5, 1.317).is_err());
    }
}
