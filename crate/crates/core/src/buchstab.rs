//! Certified tabulation of Buchstab's function.
//!
//! `ω(u) = 1/u` on `[1, 2]` and `(u ω(u))' = ω(u − 1)` for `u ≥ 2`. Writing
//! `g(v) = v ω(v) = 1 + ∫₂^v ω(t − 1) dt` (and `g ≡ 1` for `v ≤ 2`), the
//! delay equation becomes `g' (v) = ω(v − 1)`, which is what the sieve
//! integrals actually need: the inner `β`-integral of `ω((α−β)/β)/β²` is a
//! difference of `g` values.
//!
//! The grid has `N = 1/h` steps per unit, so every integer is a node and `ω`
//! is smooth inside each cell. Nodes on `[1, 3]` use closed forms; beyond 3
//! each step is a trapezoid rule with a certified `h³/12 · ω''` remainder.
//! Every cell also carries enclosures of `ω`, `ω'` and `ω''` over the cell.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::enclosure::Enclosure;
use crate::error::{Error, Result};

const BLOCK_SMALL: usize = 64;
const BLOCK_LARGE: usize = 4096;

/// Default table parameters.
pub const DEFAULT_U_MAX: f64 = 10.0;
pub const DEFAULT_H: f64 = 1e-4;

/// Hulls of consecutive cells, for fast range queries over long intervals.
#[derive(Debug, Clone)]
struct BlockHull {
    cells: Vec<Enclosure>,
    small: Vec<Enclosure>,
    large: Vec<Enclosure>,
}

impl BlockHull {
    fn new(cells: Vec<Enclosure>) -> Self {
        let fold = |chunk: &[Enclosure]| chunk.iter().skip(1).fold(chunk[0], |a, b| a.hull(b));
        let small = cells.chunks(BLOCK_SMALL).map(fold).collect();
        let large = cells.chunks(BLOCK_LARGE).map(fold).collect();
        BlockHull { cells, small, large }
    }

    /// Hull over cells `i0..=i1`.
    fn hull(&self, i0: usize, i1: usize) -> Enclosure {
        let mut acc = self.cells[i0];
        let mut i = i0;
        while i <= i1 {
            if i % BLOCK_LARGE == 0 && i + BLOCK_LARGE - 1 <= i1 {
                acc = acc.hull(&self.large[i / BLOCK_LARGE]);
                i += BLOCK_LARGE;
            } else if i % BLOCK_SMALL == 0 && i + BLOCK_SMALL - 1 <= i1 {
                acc = acc.hull(&self.small[i / BLOCK_SMALL]);
                i += BLOCK_SMALL;
            } else {
                acc = acc.hull(&self.cells[i]);
                i += 1;
            }
        }
        acc
    }
}

/// Counts evaluations where the `ω(u) = 0, u < 1` convention was used.
#[derive(Debug, Default)]
pub struct GuardCounter(AtomicU64);

impl GuardCounter {
    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
    fn hit(&self, u: Enclosure) {
        let prev = self.0.fetch_add(1, Ordering::Relaxed);
        if prev == 0 {
            log::warn!("omega evaluated below u = 1 ({u}); using omega = 0 there");
        } else {
            log::debug!("omega guard fired at {u}");
        }
    }
}

/// Piecewise certified representation of `ω` on `[1, u_max]`.
#[derive(Debug)]
pub struct BuchstabTable {
    u_max: f64,
    n: usize,
    h: Enclosure,
    nodes: Vec<Enclosure>,
    omega: Vec<Enclosure>,
    g: Vec<Enclosure>,
    cell: BlockHull,
    d1: BlockHull,
    d2: BlockHull,
    guard: GuardCounter,
}

/// `ω` on `[1, 3]` from its closed forms.
pub fn omega_closed(u: Enclosure) -> Result<Enclosure> {
    if u.lo() < 1.0 || u.hi() > 3.0 {
        return Err(Error::Domain(format!("closed form of omega needs u in [1, 3], got {u}")));
    }
    let mut out: Option<Enclosure> = None;
    if u.lo() <= 2.0 {
        let part = Enclosure::new(u.lo(), u.hi().min(2.0))?;
        out = Some(part.recip()?);
    }
    if u.hi() >= 2.0 {
        let part = Enclosure::new(u.lo().max(2.0), u.hi())?;
        let v = (Enclosure::ONE + (part - Enclosure::ONE).ln()?).try_div(part)?;
        // On [2, 3] the closed form lies in [1/2, (1 + ln 2)/2].
        let v = v.tighten(&Enclosure::new(0.5, 0.6)?);
        out = Some(match out {
            Some(o) => o.hull(&v),
            None => v,
        });
    }
    Ok(out.expect("u intersects [1, 3]"))
}

/// `g(v) = 1 + ln(v − 1)` on `[2, 3]`.
fn g_closed(v: Enclosure) -> Result<Enclosure> {
    Ok(Enclosure::ONE + (v - Enclosure::ONE).ln()?)
}

/// Builds a table; see [`BuchstabTable::build`].
pub fn build_table(u_max: f64, h: f64) -> Result<BuchstabTable> {
    BuchstabTable::build(u_max, h)
}

/// `ω(u)` from a table; see [`BuchstabTable::omega`].
pub fn omega(u: Enclosure, table: &BuchstabTable) -> Result<Enclosure> {
    table.omega(u)
}

impl BuchstabTable {
    /// Builds a table on `[1, u_max]` with step `h`.
    ///
    /// `1/h` must be an integer (up to 1e-9 relative), so that the integers
    /// 2, 3, … where `ω` loses smoothness are grid nodes.
    pub fn build(u_max: f64, h: f64) -> Result<Self> {
        if !(u_max.is_finite() && u_max >= 9.0) {
            return Err(Error::Config(format!("u_max must be >= 9, got {u_max}")));
        }
        if u_max > 1000.0 {
            return Err(Error::Config(format!("u_max {u_max} is unreasonably large")));
        }
        if !(h.is_finite() && h > 0.0 && h <= 1e-3) {
            return Err(Error::Config(format!("step h must lie in (0, 1e-3], got {h}")));
        }
        let nf = (1.0 / h).round();
        if ((nf * h) - 1.0).abs() > 1e-9 || nf > 1e8 {
            return Err(Error::Config(format!("1/h must be an integer, got h = {h}")));
        }
        let n = nf as usize;
        let n_cells = ((u_max - 1.0) * nf).ceil() as usize;
        let n_cells = n_cells.max(2 * n + 1);
        Ok(Self::build_with(u_max, n, n_cells))
    }

    fn build_with(u_max: f64, n: usize, n_cells: usize) -> Self {
        let hh = Enclosure::ratio(1, n as i64);
        let h3_12 = hh * hh * hh * Enclosure::ratio(1, 12);
        let half = Enclosure::ratio(1, 2);
        let unit = Enclosure::new(0.0, 1.0).unwrap();
        let nodes: Vec<Enclosure> =
            (0..=n_cells).map(|i| Enclosure::ratio((n + i) as i64, n as i64)).collect();

        let mut omega = vec![Enclosure::ZERO; n_cells + 1];
        let mut g = vec![Enclosure::ONE; n_cells + 1];
        let mut cell = vec![Enclosure::ZERO; n_cells];
        let mut d1 = vec![Enclosure::ZERO; n_cells];
        let mut d2 = vec![Enclosure::ZERO; n_cells];

        for i in 0..=n.min(n_cells) {
            omega[i] = nodes[i].recip().unwrap();
        }
        for i in (n + 1)..=(2 * n).min(n_cells) {
            g[i] = g_closed(nodes[i]).unwrap();
            omega[i] = g[i].try_div(nodes[i]).unwrap();
        }
        // Cells on [1, 2]: ω = 1/u, ω' = −ω², ω'' = 2ω³.
        for i in 0..n {
            let c = Enclosure::new(omega[i + 1].lo(), omega[i].hi()).unwrap();
            cell[i] = c;
            d1[i] = -c.sqr();
            d2[i] = Enclosure::point(2.0) * c * c.sqr();
        }
        for i in n..n_cells {
            let j = i - n;
            if i >= 2 * n {
                // Trapezoid step for ∫ ω(t − 1) dt over cell i; the argument
                // runs over cell j, where ω is smooth.
                let trap = g[i] + hh * (omega[j] + omega[j + 1]) * half - h3_12 * d2[j];
                let crude = g[i] + hh * cell[j];
                g[i + 1] = trap.tighten(&crude);
                omega[i + 1] = g[i + 1].try_div(nodes[i + 1]).unwrap();
            }
            let ucell = Enclosure::new(nodes[i].lo(), nodes[i + 1].hi()).unwrap();
            let span = hh * unit;
            // ω(x) = g(x)/x with g(x) ∈ g_i + [0, h]·ω(cell j).
            let gx = (g[i] + span * cell[j])
                .tighten(&Enclosure::new(g[i].lo(), g[i + 1].hi()).unwrap());
            let crude = gx.try_div(ucell).unwrap();
            let slope = (cell[j] - crude).try_div(ucell).unwrap();
            let refined = (omega[i] + span * slope)
                .tighten(&(omega[i + 1] - span * slope))
                .tighten(&crude);
            let slope = (cell[j] - refined).try_div(ucell).unwrap().tighten(&slope);
            cell[i] = refined;
            d1[i] = slope;
            d2[i] = (d1[j] - Enclosure::point(2.0) * slope).try_div(ucell).unwrap();
        }

        BuchstabTable {
            u_max,
            n,
            h: hh,
            nodes,
            omega,
            g,
            cell: BlockHull::new(cell),
            d1: BlockHull::new(d1),
            d2: BlockHull::new(d2),
            guard: GuardCounter::default(),
        }
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// The grid step `h = 1/N` as an enclosure.
    pub fn step(&self) -> Enclosure {
        self.h
    }

    pub fn steps_per_unit(&self) -> usize {
        self.n
    }

    pub fn cell_count(&self) -> usize {
        self.cell.cells.len()
    }

    /// Enclosure of `ω` over cell `i`, i.e. `u ∈ [1 + i h, 1 + (i+1) h]`.
    pub fn cell(&self, i: usize) -> Enclosure {
        self.cell.cells[i]
    }

    pub fn node(&self, i: usize) -> Enclosure {
        self.nodes[i]
    }

    pub fn omega_at_node(&self, i: usize) -> Enclosure {
        self.omega[i]
    }

    /// Enclosure of `∫₂^{u_i} ω(t − 1) dt` (zero for `u_i ≤ 2`).
    pub fn integral_prefix(&self, i: usize) -> Enclosure {
        if i <= self.n {
            Enclosure::ZERO
        } else {
            self.g[i] - Enclosure::ONE
        }
    }

    /// Number of evaluations that relied on `ω(u) = 0` for `u < 1`.
    pub fn guard_hits(&self) -> u64 {
        self.guard.get()
    }

    fn last_cell(&self) -> usize {
        self.cell.cells.len() - 1
    }

    /// Index of the cell whose nominal span contains `x` (`x ≥ 1`).
    fn nominal_cell(&self, x: f64) -> usize {
        let k = ((x - 1.0) * self.n as f64).floor();
        (k.max(0.0) as usize).min(self.last_cell())
    }

    /// Range of cells that may contain `x`, given the node enclosures.
    fn cells_for(&self, x: f64) -> (usize, usize) {
        let k = self.nominal_cell(x);
        let mut a = k;
        let mut b = k;
        while a > 0 && x <= self.nodes[a].hi() {
            a -= 1;
        }
        while b < self.last_cell() && x >= self.nodes[b + 1].lo() {
            b += 1;
        }
        (a, b)
    }

    fn check_range(&self, hi: f64) -> Result<()> {
        if hi > self.u_max {
            Err(Error::Range { u: hi, u_max: self.u_max })
        } else {
            Ok(())
        }
    }

    /// Enclosure of `{ω(u) : u ∈ u}`, with `ω = 0` below 1.
    pub fn omega(&self, u: Enclosure) -> Result<Enclosure> {
        self.check_range(u.hi())?;
        if u.hi() < 1.0 {
            self.guard.hit(u);
            return Ok(Enclosure::ZERO);
        }
        if u.lo() < 1.0 {
            self.guard.hit(u);
            let upper = self.omega(Enclosure::new(1.0, u.hi())?)?;
            return Ok(upper.hull(&Enclosure::ZERO));
        }
        let (a, _) = self.cells_for(u.lo());
        let (_, b) = self.cells_for(u.hi());
        let mut out = self.cell.hull(a, b);
        if b - a <= 2 {
            // First-order form from the left endpoint.
            let slope = self.d1.hull(a, b);
            let w = Enclosure::point(u.hi()) - Enclosure::point(u.lo());
            let w = Enclosure::new(0.0, w.hi())?;
            let lhs = self.omega_point(u.lo())? + w * slope;
            out = out.tighten(&lhs);
        }
        if u.hi() <= 3.0 {
            out = out.tighten(&omega_closed(u)?);
        }
        Ok(out)
    }

    /// Enclosure of `ω(x)` at an exact binary64 point `x ≥ 1`.
    fn omega_point(&self, x: f64) -> Result<Enclosure> {
        let (a, b) = self.cells_for(x);
        let k = self.nominal_cell(x);
        let slope = self.d1.hull(a, b);
        let px = Enclosure::point(x);
        let left = self.omega[k] + (px - self.nodes[k]) * slope;
        let right = self.omega[k + 1] - (self.nodes[k + 1] - px) * slope;
        let mut out = left.tighten(&right).tighten(&self.cell.hull(a, b));
        if x <= 3.0 {
            out = out.tighten(&omega_closed(px)?);
        }
        Ok(out)
    }

    /// Enclosure of `ω'` over `u`, taking `ω' = 0` below 1. `u` must not
    /// straddle 1, where `ω` jumps.
    pub fn omega_deriv(&self, u: Enclosure) -> Result<Enclosure> {
        self.check_range(u.hi())?;
        if u.hi() < 1.0 {
            return Ok(Enclosure::ZERO);
        }
        if u.lo() < 1.0 {
            return Err(Error::Domain(format!("omega' is not bounded across u = 1 ({u})")));
        }
        let (a, _) = self.cells_for(u.lo());
        let (_, b) = self.cells_for(u.hi());
        Ok(self.d1.hull(a, b))
    }

    /// Enclosure of `ω''` over `u ≥ 1`.
    pub fn omega_second(&self, u: Enclosure) -> Result<Enclosure> {
        self.check_range(u.hi())?;
        if u.lo() < 1.0 {
            return Err(Error::Domain(format!("omega'' requires u >= 1 ({u})")));
        }
        let (a, _) = self.cells_for(u.lo());
        let (_, b) = self.cells_for(u.hi());
        Ok(self.d2.hull(a, b))
    }

    /// Enclosure of `g(x) = x ω(x)` (`≡ 1` for `x ≤ 2`) at a binary64 point.
    pub fn g_point(&self, x: f64) -> Result<Enclosure> {
        self.check_range(x)?;
        if x <= 2.0 {
            return Ok(Enclosure::ONE);
        }
        let px = Enclosure::point(x);
        if x <= 3.0 {
            return g_closed(px);
        }
        // Cells are aligned to integers, so shifting indices by N maps the
        // cells around x exactly onto those around x − 1.
        let (a, b) = self.cells_for(x);
        let k = self.nominal_cell(x);
        let j = k - self.n;
        let slope = self.d1.hull(a - self.n, b - self.n);
        let half = Enclosure::ratio(1, 2);
        let d = px - self.nodes[k];
        let e = self.nodes[k + 1] - px;
        let left = self.g[k] + d * self.omega[j] + half * d.sqr() * slope;
        let right = self.g[k + 1] - e * self.omega[j + 1] + half * e.sqr() * slope;
        Ok(left.tighten(&right))
    }

    /// Enclosure of `g` over `v`; `g` is nondecreasing.
    pub fn g(&self, v: Enclosure) -> Result<Enclosure> {
        if v.is_point() {
            return self.g_point(v.lo());
        }
        let lo = self.g_point(v.lo())?;
        let hi = self.g_point(v.hi())?;
        Ok(Enclosure::new(lo.lo(), hi.hi().max(lo.lo()))?)
    }

    /// `g'(v) = ω(v − 1)`, zero for `v < 2`.
    pub fn g_deriv(&self, v: Enclosure) -> Result<Enclosure> {
        self.omega_quiet(v - Enclosure::ONE)
    }

    /// `g''(v) = ω'(v − 1)`; `v` must not straddle 2.
    pub fn g_second(&self, v: Enclosure) -> Result<Enclosure> {
        self.omega_deriv(v - Enclosure::ONE)
    }

    /// Like [`Self::omega`] but the `u < 1` convention is part of the
    /// definition of `g'` and is not counted as a guard event.
    fn omega_quiet(&self, u: Enclosure) -> Result<Enclosure> {
        if u.hi() < 1.0 {
            return Ok(Enclosure::ZERO);
        }
        if u.lo() < 1.0 {
            let upper = self.omega(Enclosure::new(1.0, u.hi())?)?;
            return Ok(upper.hull(&Enclosure::ZERO));
        }
        self.omega(u)
    }

    /// Uncertified midpoint value of `g(x)`, for fast estimates.
    pub fn g_approx(&self, x: f64) -> f64 {
        if x <= 2.0 {
            return 1.0;
        }
        if x <= 3.0 {
            return 1.0 + (x - 1.0).ln();
        }
        let k = self.nominal_cell(x.min(self.u_max));
        let j = k - self.n;
        let d = x - self.nodes[k].mid();
        self.g[k].mid() + d * self.omega[j].mid() + 0.5 * d * d * self.d1.cells[j].mid()
    }

    /// Uncertified midpoint value of `ω(u)` (zero below 1).
    pub fn omega_approx(&self, u: f64) -> f64 {
        if u < 1.0 {
            return 0.0;
        }
        if u <= 2.0 {
            return 1.0 / u;
        }
        if u <= 3.0 {
            return (1.0 + (u - 1.0).ln()) / u;
        }
        let k = self.nominal_cell(u.min(self.u_max));
        let d = u - self.nodes[k].mid();
        self.omega[k].mid() + d * self.d1.cells[k].mid()
    }
}
