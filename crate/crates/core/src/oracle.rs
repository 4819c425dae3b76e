//! Brute-force ground truth, independent of the interior-point path.
//!
//! At a fixed partition the rate constraints are linear in `(R1, R2, R3)`,
//! so the exact maximizer is found by enumerating all vertices of the
//! three-variable polytope. Searching the partition space is a grid scan
//! with deterministic local refinement. Exponential in the partition
//! dimension by design; this is a certification tool, not a solver.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{ChannelConfig, PowerPartition, RateVector, WeightVector};
use crate::rates::bound;
use crate::regions::RegionId;
use crate::{Error, Result};

/// Grid-search parameters: `n` points per partition axis, then
/// `refine_rounds` of pattern refinement shrinking the step by
/// `refine_shrink` whenever no move improves.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub n: usize,
    pub refine_rounds: usize,
    pub refine_shrink: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n: 9,
            refine_rounds: 60,
            refine_shrink: 0.5,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidWeights("grid needs at least 3 points per axis"));
        }
        Ok(())
    }
}

/// Halfspace `a . R <= d`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Plane {
    pub(crate) a: [f64; 3],
    pub(crate) d: f64,
}

fn planes_at(
    region: RegionId,
    c: &ChannelConfig,
    theta: &PowerPartition,
    r0: f64,
) -> Vec<Plane> {
    let mut planes: Vec<Plane> = region
        .constraint_ids()
        .iter()
        .map(|id| Plane {
            a: id.rate_coeffs(),
            d: bound(*id, c, theta) - r0,
        })
        .collect();
    for k in 0..3 {
        let mut a = [0.0; 3];
        a[k] = -1.0;
        planes.push(Plane { a, d: 0.0 });
    }
    planes
}

fn solve3(rows: [&Plane; 3]) -> Option<[f64; 3]> {
    let m = [rows[0].a, rows[1].a, rows[2].a];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det.abs() < 1e-10 {
        return None;
    }
    let b = [rows[0].d, rows[1].d, rows[2].d];
    let inv_det = 1.0 / det;
    let x = [
        (b[0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (b[1] * m[2][2] - m[1][2] * b[2])
            + m[0][2] * (b[1] * m[2][1] - m[1][1] * b[2]))
            * inv_det,
        (m[0][0] * (b[1] * m[2][2] - m[1][2] * b[2])
            - b[0] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * b[2] - b[1] * m[2][0]))
            * inv_det,
        (m[0][0] * (m[1][1] * b[2] - b[1] * m[2][1])
            - m[0][1] * (m[1][0] * b[2] - b[1] * m[2][0])
            + b[0] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
            * inv_det,
    ];
    Some(x)
}

/// Exact maximizer of `w . x` over `{x >= 0, a_i . x <= d_i}` by vertex
/// enumeration, or `None` when the origin is infeasible. Callers append the
/// coordinate planes themselves.
pub(crate) fn vertex_lp(planes: &[Plane], wv: [f64; 3]) -> Option<([f64; 3], f64)> {
    if planes.iter().any(|p| p.d < -1e-12) {
        return None;
    }
    let n = planes.len();
    let mut best: Option<([f64; 3], f64)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let Some(x) = solve3([&planes[i], &planes[j], &planes[k]]) else {
                    continue;
                };
                if x.iter().any(|v| !v.is_finite() || *v < -1e-10) {
                    continue;
                }
                let feas = planes.iter().all(|p| {
                    p.a[0] * x[0] + p.a[1] * x[1] + p.a[2] * x[2]
                        <= p.d + 1e-10 * (1.0 + p.d.abs())
                });
                if !feas {
                    continue;
                }
                let obj = wv[0] * x[0] + wv[1] * x[1] + wv[2] * x[2];
                let better = match &best {
                    None => true,
                    Some((bx, b)) => {
                        let eps = 1e-12 * (1.0 + b.abs());
                        obj > *b + eps || (obj >= *b - eps && x < *bx)
                    }
                };
                if better {
                    best = Some((x, obj));
                }
            }
        }
    }
    Some(best.expect("polytope contains the origin, so a vertex exists"))
}

/// Exact maximizer of `w . (R1, R2, R3)` over the rate polytope of `region`
/// at the fixed partition `theta`, by vertex enumeration.
pub fn max_rates_given_partition(
    c: &ChannelConfig,
    theta: &PowerPartition,
    r0: f64,
    w: &WeightVector,
    region: RegionId,
) -> Result<(RateVector, f64)> {
    w.validate()?;
    let planes = planes_at(region.restricted(), c, theta, r0);
    let Some((x, obj)) = vertex_lp(&planes, w.as_array()) else {
        return Err(Error::InfeasibleR0 { r0 });
    };
    Ok((
        RateVector::new(r0, x[0].max(0.0), x[1].max(0.0), x[2].max(0.0)),
        obj,
    ))
}

/// Best point found by the grid search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSearchResult {
    pub theta: PowerPartition,
    pub rates: RateVector,
    pub objective: f64,
}

fn lex_less(a: &PowerPartition, b: &PowerPartition) -> bool {
    a.as_array() < b.as_array()
}

/// Candidate moves for one refinement round: single-coordinate steps plus
/// within-subchannel transfers that keep the layer sums fixed.
fn candidate_moves(theta: &PowerPartition, step: f64) -> Vec<PowerPartition> {
    let base = theta.as_array();
    let mut out = Vec::with_capacity(16);
    for k in 0..4 {
        for s in [step, -step] {
            let mut t = base;
            t[k] = (t[k] + s).max(0.0);
            out.push(PowerPartition::from_array(t));
        }
    }
    for (i, j) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
        let mut t = base;
        let d = step.min(t[j]);
        t[i] += d;
        t[j] -= d;
        out.push(PowerPartition::from_array(t));
    }
    out.retain(|p| p.is_valid(0.0));
    out
}

/// Refine `start` by deterministic pattern ascent of the fixed-partition LP
/// value. Accepts only strict improvements; shrinks the step when no move
/// improves. Returns the best point visited.
pub(crate) fn refine(
    c: &ChannelConfig,
    r0: f64,
    w: &WeightVector,
    region: RegionId,
    start: PowerPartition,
    mut step: f64,
    rounds: usize,
    shrink: f64,
) -> Option<GridSearchResult> {
    let eval = |p: &PowerPartition| -> Option<(RateVector, f64)> {
        max_rates_given_partition(c, p, r0, w, region).ok()
    };
    let (mut rates, mut obj) = eval(&start)?;
    let mut theta = start;
    for _ in 0..rounds {
        let mut best_move: Option<(PowerPartition, RateVector, f64)> = None;
        for cand in candidate_moves(&theta, step) {
            if let Some((r, o)) = eval(&cand) {
                let better = match &best_move {
                    None => o > obj,
                    Some((_, _, bo)) => o > *bo,
                };
                if better {
                    best_move = Some((cand, r, o));
                }
            }
        }
        match best_move {
            Some((t, r, o)) => {
                theta = t;
                rates = r;
                obj = o;
            }
            None => {
                step *= shrink;
                if step < 1e-10 {
                    break;
                }
            }
        }
    }
    Some(GridSearchResult {
        theta,
        rates,
        objective: obj,
    })
}

/// Exhaustive scan over the partition grid followed by refinement of the top
/// cells. Grid cells are evaluated in parallel; the reduction is
/// deterministic with a lexicographic tie-break on the partition.
pub fn grid_search(
    c: &ChannelConfig,
    r0: f64,
    w: &WeightVector,
    region: RegionId,
    spec: &GridSpec,
) -> Result<GridSearchResult> {
    spec.validate()?;
    w.validate()?;
    let n = spec.n;
    let levels: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let mut pairs = Vec::new();
    for (i, &a) in levels.iter().enumerate() {
        for &b in &levels[..n - i] {
            pairs.push((a, b));
        }
    }
    let cells: Vec<PowerPartition> = pairs
        .iter()
        .flat_map(|&(a11, a12)| {
            pairs
                .iter()
                .map(move |&(a21, a22)| PowerPartition::new(a11, a12, a21, a22))
        })
        .collect();

    let mut scored: Vec<(PowerPartition, RateVector, f64)> = cells
        .par_iter()
        .filter_map(|theta| {
            max_rates_given_partition(c, theta, r0, w, region)
                .ok()
                .map(|(r, o)| (*theta, r, o))
        })
        .collect();
    if scored.is_empty() {
        return Err(Error::InfeasibleR0 { r0 });
    }
    scored.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then_with(|| a.0.as_array().partial_cmp(&b.0.as_array()).unwrap())
    });

    let step0 = 1.0 / (n - 1) as f64;
    let top: Vec<PowerPartition> = scored.iter().take(5).map(|(t, _, _)| *t).collect();
    let refined: Vec<GridSearchResult> = top
        .par_iter()
        .filter_map(|start| {
            refine(
                c,
                r0,
                w,
                region,
                *start,
                step0,
                spec.refine_rounds,
                spec.refine_shrink,
            )
        })
        .collect();

    let mut best = GridSearchResult {
        theta: scored[0].0,
        rates: scored[0].1,
        objective: scored[0].2,
    };
    for cand in refined {
        if cand.objective > best.objective
            || (cand.objective == best.objective && lex_less(&cand.theta, &best.theta))
        {
            best = cand;
        }
    }
    Ok(best)
}
