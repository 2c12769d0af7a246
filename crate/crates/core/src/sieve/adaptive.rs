//! Adaptive bisection over axis-aligned boxes.
//!
//! Each round refines the quarter of the boxes with the widest contribution
//! (ties broken by creation index), splitting each on its widest scaled
//! dimension. Children are evaluated in parallel but stored and summed in
//! creation order, so results are bit-identical for any thread count.
//!
//! Every round's total still contains the exact integral, so each part keeps
//! the running intersection of its per-round sums. A run with a smaller
//! target follows the same rounds further, which makes its result nested in
//! the coarser one.

use rayon::prelude::*;

use super::Integral;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};

const REFINE_FRACTION: f64 = 0.25;

/// An initial box and the part of the integral it belongs to.
pub(crate) struct Seed<const D: usize> {
    pub lo: [f64; D],
    pub hi: [f64; D],
    pub part: usize,
}

struct Region<const D: usize> {
    lo: [f64; D],
    hi: [f64; D],
    part: usize,
    id: u64,
    value: Enclosure,
    frozen: bool,
}

pub(crate) struct Problem<'a, const D: usize> {
    pub parts: usize,
    pub seeds: Vec<Seed<D>>,
    /// Contributions outside the boxes (end slivers), added to the total.
    pub fixed: Enclosure,
    /// Per-dimension scale used to pick the split dimension.
    pub scale: [f64; D],
    pub eval: &'a (dyn Fn(usize, &[f64; D], &[f64; D]) -> Result<Enclosure> + Sync),
}

fn split<const D: usize>(r: &Region<D>, scale: &[f64; D]) -> Option<([f64; D], [f64; D], [f64; D], [f64; D])> {
    let mut dims: Vec<usize> = (0..D).collect();
    dims.sort_by(|&a, &b| {
        let wa = (r.hi[a] - r.lo[a]) / scale[a];
        let wb = (r.hi[b] - r.lo[b]) / scale[b];
        wb.total_cmp(&wa).then(a.cmp(&b))
    });
    for d in dims {
        let m = 0.5 * r.lo[d] + 0.5 * r.hi[d];
        if m > r.lo[d] && m < r.hi[d] {
            let mut hi_a = r.hi;
            hi_a[d] = m;
            let mut lo_b = r.lo;
            lo_b[d] = m;
            return Some((r.lo, hi_a, lo_b, r.hi));
        }
    }
    None
}

pub(crate) fn run<const D: usize>(
    problem: &Problem<'_, D>,
    target: f64,
    max_cells: u64,
    parallelism: usize,
) -> Result<Integral> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_inner(problem, target, max_cells))
}

fn evaluate<const D: usize>(
    problem: &Problem<'_, D>,
    boxes: Vec<([f64; D], [f64; D], usize, u64)>,
) -> Result<Vec<Region<D>>> {
    boxes
        .into_par_iter()
        .map(|(lo, hi, part, id)| {
            let value = (problem.eval)(part, &lo, &hi)?;
            Ok(Region { lo, hi, part, id, value, frozen: false })
        })
        .collect()
}

fn run_inner<const D: usize>(problem: &Problem<'_, D>, target: f64, max_cells: u64) -> Result<Integral> {
    let mut next_id = 0u64;
    let initial = problem
        .seeds
        .iter()
        .map(|s| {
            next_id += 1;
            (s.lo, s.hi, s.part, next_id - 1)
        })
        .collect();
    let mut regions = evaluate(problem, initial)?;
    let mut cells = regions.len() as u64;
    let mut budget_exceeded = cells > max_cells;
    let mut running: Vec<Option<Enclosure>> = vec![None; problem.parts];
    let mut total;
    let mut round = 0u32;

    loop {
        let mut sums = vec![Enclosure::ZERO; problem.parts];
        for r in &regions {
            sums[r.part] += r.value;
        }
        for (p, s) in sums.iter().enumerate() {
            running[p] = Some(match running[p] {
                None => *s,
                Some(prev) => prev.intersect(s).ok_or_else(|| {
                    Error::InconsistentEnclosure(format!(
                        "part {p}: refined sum {s} is disjoint from {prev}"
                    ))
                })?,
            });
        }
        total = running.iter().map(|s| s.unwrap()).sum::<Enclosure>() + problem.fixed;
        log::debug!("round {round}: {} boxes, total {total}, width {:e}", regions.len(), total.width());
        if total.width() <= target || budget_exceeded {
            break;
        }
        let remaining = max_cells.saturating_sub(cells);
        let candidates: Vec<usize> = (0..regions.len())
            .filter(|&i| !regions[i].frozen && regions[i].value.width() > 0.0)
            .collect();
        if candidates.is_empty() {
            break;
        }
        let wanted = ((regions.len() as f64 * REFINE_FRACTION).ceil() as usize).max(1);
        let k = wanted.min(candidates.len()).min((remaining / 2) as usize);
        if k == 0 {
            budget_exceeded = true;
            break;
        }
        let mut order = candidates;
        let cmp = |a: &usize, b: &usize| {
            let (ra, rb) = (&regions[*a], &regions[*b]);
            rb.value.width().total_cmp(&ra.value.width()).then(ra.id.cmp(&rb.id))
        };
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, cmp);
            order.truncate(k);
        }
        order.sort_unstable();

        let mut selected = vec![false; regions.len()];
        let mut children = Vec::with_capacity(2 * k);
        for &i in &order {
            let r = &regions[i];
            match split(r, &problem.scale) {
                Some((lo_a, hi_a, lo_b, hi_b)) => {
                    selected[i] = true;
                    children.push((lo_a, hi_a, r.part, next_id));
                    children.push((lo_b, hi_b, r.part, next_id + 1));
                    next_id += 2;
                }
                None => {}
            }
        }
        for &i in &order {
            if !selected[i] {
                regions[i].frozen = true;
            }
        }
        cells += children.len() as u64;
        let new = evaluate(problem, children)?;
        let mut kept: Vec<Region<D>> = Vec::with_capacity(regions.len() + new.len());
        for (i, r) in regions.into_iter().enumerate() {
            if !selected[i] {
                kept.push(r);
            }
        }
        kept.extend(new);
        regions = kept;
        round += 1;
    }

    Ok(Integral { value: total, cells, budget_exceeded })
}
