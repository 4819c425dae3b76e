//! Weighted sum-rate maximizers.
//!
//! `solve_relaxed` maximizes over the log-domain convex form with a
//! logarithmic barrier: the barrier parameter decreases geometrically while
//! an inner Newton iteration with backtracking recenters, and the final
//! duals certify optimality through the relaxed KKT residual. The restricted
//! (shared-partition) problem is possibly nonconvex, so `solve_restricted`
//! is a deterministic multi-start search: the oracle grid plus the relaxed
//! solution's partitions as seeds, refined by pattern ascent.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::channel::{validate, ChannelConfig, PowerPartition, RateVector, WeightVector};
use crate::gp::{
    build_problem_for, to_log_point, to_partitions, ConvexProblem, GpConId, LogDomainPoint, NX,
    NZ,
};
use crate::kkt::{recover_multipliers19, residual_19, Multipliers19, ResidualReport};
use crate::oracle::{self, GridSpec};
use crate::rates::r0_max;
use crate::regions::{RegionId, RelaxedPoint};
use crate::{tol, Error, Result};

/// Termination state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Converged,
    IterationLimit,
    Infeasible,
}

/// Outcome of a relaxed or restricted solve. Restricted solves store the
/// shared partition in all three slots.
#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub rates: RateVector,
    pub alpha: PowerPartition,
    pub alpha_p: PowerPartition,
    pub alpha_pp: PowerPartition,
    pub objective: f64,
    pub status: SolveStatus,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub multipliers: Multipliers19,
}

impl SolveResult {
    pub fn relaxed_point(&self) -> RelaxedPoint {
        RelaxedPoint {
            alpha: self.alpha,
            alpha_p: self.alpha_p,
            alpha_pp: self.alpha_pp,
            rates: self.rates,
        }
    }
}

/// Maximize the weighted sum-rate over the first relaxed region.
pub fn solve_relaxed(c: &ChannelConfig, r0: f64, w: &WeightVector) -> Result<SolveResult> {
    solve_relaxed_region(c, r0, w, RegionId::Relaxed1)
}

/// Maximize the weighted sum-rate over the second relaxed region.
pub fn solve_region2_relaxed(c: &ChannelConfig, r0: f64, w: &WeightVector) -> Result<SolveResult> {
    solve_relaxed_region(c, r0, w, RegionId::Relaxed2)
}

/// Barrier solve of either relaxed region.
pub fn solve_relaxed_region(
    c: &ChannelConfig,
    r0: f64,
    w: &WeightVector,
    region: RegionId,
) -> Result<SolveResult> {
    let c = validate(*c)?;
    w.validate()?;
    let cap = r0_max(&c);
    if !(-1e-12..=cap + 1e-12).contains(&r0) {
        return Err(Error::R0OutOfRange { r0, r0_max: cap });
    }
    let r0 = r0.max(0.0);
    if r0 >= cap - 1e-9 {
        return Ok(saturated_solution(&c, cap.min(r0), w, region));
    }
    let problem = build_problem_for(&c, r0, w, region)?;
    let frozen = frozen_mask(&c);
    let z0 = initial_point(&problem, &frozen)?;
    let (z, iterations) = barrier_minimize(&problem, z0, &frozen);

    let point = LogDomainPoint::from_slice(&z);
    let (alpha, alpha_p, alpha_pp) = to_partitions(&point, &c)?;
    let rates = RateVector::new(r0, point.r[0].max(0.0), point.r[1].max(0.0), point.r[2].max(0.0));
    let raw = RelaxedPoint {
        alpha,
        alpha_p,
        alpha_pp,
        rates,
    };
    let mut relaxed = polish(&c, region, &raw, w, r0);
    let mut multipliers = recover_multipliers19(&c, region, &relaxed, w, r0);
    let mut report = residual_19(&c, region, &relaxed, &multipliers, w, r0);
    if report.max_residual > tol::SOLVER_KKT {
        // Degenerate complementarity pairs leave a sqrt-of-gap blur on the
        // central path; sharpen the partitions by exact ascent of the
        // fixed-partition LP value, then certify again.
        let refined = refine_partition_triple(&c, region, &relaxed, w, r0);
        relaxed = polish(&c, region, &refined, w, r0);
        if w.dot(&refined.rates) > w.dot(&relaxed.rates) {
            relaxed = refined;
        }
        multipliers = recover_multipliers19(&c, region, &relaxed, w, r0);
        report = residual_19(&c, region, &relaxed, &multipliers, w, r0);
    }
    let (alpha, alpha_p, alpha_pp) = (relaxed.alpha, relaxed.alpha_p, relaxed.alpha_pp);
    let rates = relaxed.rates;
    let point = to_log_point(&c, &alpha, &alpha_p, &alpha_pp, &rates);
    let feasible = problem.max_violation(&point) <= 2.0 * tol::FEASIBILITY;
    let status = if report.max_residual <= tol::SOLVER_KKT && feasible {
        SolveStatus::Converged
    } else {
        SolveStatus::IterationLimit
    };
    Ok(SolveResult {
        rates,
        alpha,
        alpha_p,
        alpha_pp,
        objective: w.dot(&rates),
        status,
        kkt_residual: report.max_residual,
        iterations,
        multipliers,
    })
}

/// Relaxed residual report for a result (convenience for callers that want
/// the per-equation breakdown rather than just the max).
pub fn residual_report(
    c: &ChannelConfig,
    region: RegionId,
    res: &SolveResult,
    w: &WeightVector,
) -> ResidualReport {
    residual_19(
        c,
        region,
        &res.relaxed_point(),
        &res.multipliers,
        w,
        res.rates.r0,
    )
}

/// At the common-rate cap every particular rate collapses to zero on the
/// binding receiver's chain; return that point with explicitly constructed
/// multipliers so the certificate is still checked, not assumed.
fn saturated_solution(
    c: &ChannelConfig,
    r0: f64,
    w: &WeightVector,
    region: RegionId,
) -> SolveResult {
    let [n11, n12, n13] = c.n1;
    let [n21, n22, n23] = c.n2;
    let args = [
        crate::rates::half_log_ratio(n11 + c.p1, n11)
            + crate::rates::half_log_ratio(n23 + c.p2, n23),
        crate::rates::half_log_ratio(n12 + c.p1, n12)
            + crate::rates::half_log_ratio(n22 + c.p2, n22),
        crate::rates::half_log_ratio(n13 + c.p1, n13)
            + crate::rates::half_log_ratio(n21 + c.p2, n21),
    ];
    let binding = args
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;
    let wmax = w.w1.max(w.w2).max(w.w3);
    let mut m = Multipliers19::ZERO;
    match binding {
        0 => {
            // Y-chain binds: choose chain multipliers satisfying the
            // projected stationarity cone at the zero partition.
            let l0123 = wmax + 1.0;
            let l012 = 1.0;
            let l01 = (l012 + l0123) * (n23 - n22) / n22
                + (l0123 * (n23 - n21) / n21 - l012).max(0.0)
                + wmax
                + 1.0;
            m.lambda = [0.0, l01, l012, l0123];
        }
        1 => {
            let e0123 = wmax + 1.0;
            let e02 = (e0123 * (n12 - n11) / n11)
                .max(e0123 * (n22 - n21) / n21)
                .max(wmax)
                + 1.0;
            m.eta = [0.0, e02, 0.0, e0123];
        }
        _ => {
            let x0123 = wmax + 1.0;
            let x023 = 1.0;
            let x03 = (x023 + x0123) * (n13 - n12) / n12
                + (x0123 * (n13 - n11) / n11 - x023).max(0.0)
                + wmax
                + 1.0;
            m.xi = [0.0, x03, x023, x0123];
        }
    }
    let rates = RateVector::new(r0, 0.0, 0.0, 0.0);
    let point = RelaxedPoint::synchronized(PowerPartition::ZERO, rates);
    let report = residual_19(c, region, &point, &m, w, r0);
    let status = if report.max_residual <= tol::SOLVER_KKT {
        SolveStatus::Converged
    } else {
        SolveStatus::IterationLimit
    };
    SolveResult {
        rates,
        alpha: PowerPartition::ZERO,
        alpha_p: PowerPartition::ZERO,
        alpha_pp: PowerPartition::ZERO,
        objective: 0.0,
        status,
        kkt_residual: report.max_residual,
        iterations: 0,
        multipliers: m,
    }
}

/// Exact weighted sum-rate at a fixed partition triple: the vertex LP with
/// per-family bounds.
fn relaxed_lp(
    c: &ChannelConfig,
    region: RegionId,
    alpha: &PowerPartition,
    alpha_p: &PowerPartition,
    alpha_pp: &PowerPartition,
    w: &WeightVector,
    r0: f64,
) -> Option<(RateVector, f64)> {
    let planes: Vec<oracle::Plane> = region
        .constraint_ids()
        .iter()
        .map(|id| {
            let part = match id.family() {
                crate::rates::Family::F => alpha,
                crate::rates::Family::G => alpha_p,
                crate::rates::Family::H => alpha_pp,
            };
            oracle::Plane {
                a: id.rate_coeffs(),
                d: crate::rates::bound(*id, c, part) - r0,
            }
        })
        .chain((0..3).map(|k| {
            let mut a = [0.0; 3];
            a[k] = -1.0;
            oracle::Plane { a, d: 0.0 }
        }))
        .collect();
    let (x, obj) = oracle::vertex_lp(&planes, w.as_array())?;
    Some((
        RateVector::new(r0, x[0].max(0.0), x[1].max(0.0), x[2].max(0.0)),
        obj,
    ))
}

/// Deterministic pattern ascent of the exact LP value over the three
/// partitions, used to sharpen a barrier point whose certificate fell short.
fn refine_partition_triple(
    c: &ChannelConfig,
    region: RegionId,
    start: &RelaxedPoint,
    w: &WeightVector,
    r0: f64,
) -> RelaxedPoint {
    let mut parts = [start.alpha, start.alpha_p, start.alpha_pp];
    let Some((mut rates, mut obj)) = relaxed_lp(c, region, &parts[0], &parts[1], &parts[2], w, r0)
    else {
        return *start;
    };
    let mut step = 1e-2;
    for _ in 0..160 {
        let mut best: Option<([PowerPartition; 3], RateVector, f64)> = None;
        for g in 0..3 {
            let base = parts[g].as_array();
            let mut cands: Vec<[f64; 4]> = Vec::with_capacity(12);
            for k in 0..4 {
                for s in [step, -step] {
                    let mut t = base;
                    t[k] = (t[k] + s).max(0.0);
                    cands.push(t);
                }
            }
            for (i, j) in [(0usize, 1usize), (1, 0), (2, 3), (3, 2)] {
                let mut t = base;
                let d = step.min(t[j]);
                t[i] += d;
                t[j] -= d;
                cands.push(t);
            }
            for t in cands {
                let cand = PowerPartition::from_array(t);
                if !cand.is_valid(0.0) {
                    continue;
                }
                let mut trial = parts;
                trial[g] = cand;
                if let Some((r, o)) = relaxed_lp(c, region, &trial[0], &trial[1], &trial[2], w, r0)
                {
                    let better = match &best {
                        None => o > obj,
                        Some((_, _, bo)) => o > *bo,
                    };
                    if better {
                        best = Some((trial, r, o));
                    }
                }
            }
        }
        match best {
            Some((trial, r, o)) => {
                parts = trial;
                rates = r;
                obj = o;
            }
            None => {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
    }
    RelaxedPoint {
        alpha: parts[0],
        alpha_p: parts[1],
        alpha_pp: parts[2],
        rates,
    }
}

/// Clean up a barrier point. The rates are always re-solved exactly by the
/// vertex LP at the final partitions (a pure improvement over the interior
/// rates); snapping near-boundary partition entries to zero is kept only
/// when it does not cost objective. Exact boundary coordinates remove the
/// square-root blur that degenerate complementarity pairs leave on the
/// central path.
fn polish(
    c: &ChannelConfig,
    region: RegionId,
    raw: &RelaxedPoint,
    w: &WeightVector,
    r0: f64,
) -> RelaxedPoint {
    const SNAP: f64 = 1e-4;
    let snap_partition = |p: &PowerPartition| {
        let mut arr = p.as_array();
        for v in arr.iter_mut() {
            if *v < SNAP {
                *v = 0.0;
            }
        }
        PowerPartition::from_array(arr)
    };
    let mut best = *raw;
    let mut best_obj = w.dot(&raw.rates);
    if let Some((rates, obj)) =
        relaxed_lp(c, region, &raw.alpha, &raw.alpha_p, &raw.alpha_pp, w, r0)
    {
        if obj >= best_obj {
            best = RelaxedPoint {
                rates,
                ..*raw
            };
            best_obj = obj;
        }
    }
    let alpha = snap_partition(&raw.alpha);
    let alpha_p = snap_partition(&raw.alpha_p);
    let alpha_pp = snap_partition(&raw.alpha_pp);
    if let Some((rates, obj)) = relaxed_lp(c, region, &alpha, &alpha_p, &alpha_pp, w, r0) {
        if obj >= best_obj - 1e-12 * (1.0 + best_obj.abs()) {
            best = RelaxedPoint {
                alpha,
                alpha_p,
                alpha_pp,
                rates,
            };
        }
    }
    best
}

/// Log-variable box ranges implied by the domain constraints. When a range
/// collapses (vanishing subchannel power) the variable is frozen at a
/// nominal interior partition value and dropped from the Newton system;
/// its effect on every bound is below the range itself.
fn frozen_mask(c: &ChannelConfig) -> [Option<f64>; NZ] {
    let [n11, n12, _] = c.n1;
    let [n21, n22, _] = c.n2;
    let lo_hi: [(f64, f64); NX] = [
        (n11 / 2.0, c.p1 + n11),
        (n11 / 2.0, c.p1 + n11),
        (n21, c.p2 + n21),
        (n22, c.p2 + n22),
        (n11, c.p1 + n11),
        (n12 - n11, c.p1 + n12 - n11),
        (n21, c.p2 + n21),
        (n22 - n21, c.p2 + n22 - n21),
        (n11, c.p1 + n11),
        (n12, c.p1 + n12),
        (n21 / 2.0, c.p2 + n21 / 2.0),
        (n21 / 2.0, c.p2 + n21 / 2.0),
    ];
    let nominal = PowerPartition::uniform(0.25);
    let tnom = crate::gp::forward_transform(c, &nominal, &nominal, &nominal);
    let mut mask = [None; NZ];
    for j in 0..NX {
        let (lo, hi) = lo_hi[j];
        if hi.ln() - lo.ln() <= 1e-6 {
            mask[3 + j] = Some(tnom[j].ln());
        }
    }
    mask
}

/// Strictly feasible start: uniform partitions scaled inward until the
/// level-0 bounds clear the common rate, rates at a fraction of the
/// remaining margin.
fn initial_point(problem: &ConvexProblem, frozen: &[Option<f64>; NZ]) -> Result<[f64; NZ]> {
    let c = &problem.config;
    let mut s = 1.0 / 3.0;
    for _ in 0..100 {
        let part = PowerPartition::uniform(s);
        let point = to_log_point(
            c,
            &part,
            &part,
            &part,
            &RateVector::new(problem.r0, 0.0, 0.0, 0.0),
        );
        let mut z = point.as_vec();
        for (k, f) in frozen.iter().enumerate() {
            if let Some(v) = f {
                z[k] = *v;
            }
        }
        let point = LogDomainPoint::from_slice(&z);
        // Margin of the rate constraints at zero particular rates, in
        // natural units (the residuals carry a factor of two).
        let margin = problem
            .constraints
            .iter()
            .filter(|con| matches!(con.id, GpConId::Rate(_)))
            .map(|con| -con.value(&point) / 2.0)
            .fold(f64::INFINITY, f64::min);
        if margin > 1e-7 * (1.0 + problem.r0) {
            let mut r = margin / 6.0;
            for _ in 0..60 {
                let mut z2 = z;
                z2[0] = r;
                z2[1] = r;
                z2[2] = r;
                let p2 = LogDomainPoint::from_slice(&z2);
                if problem.max_violation(&p2) < 0.0 {
                    return Ok(z2);
                }
                r *= 0.5;
            }
        }
        s *= 0.5;
    }
    Err(Error::InfeasibleR0 { r0: problem.r0 })
}

/// Indices of constraints kept in the barrier: everything with at least one
/// unfrozen variable (fully frozen domain constraints are constants).
fn barrier_set(problem: &ConvexProblem, frozen: &[Option<f64>; NZ]) -> Vec<usize> {
    problem
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, con)| {
            let g_touches_free = |j: usize| frozen[3 + j].is_none();
            let has_free_var = con.rate_coef.iter().any(|v| *v != 0.0)
                || con.terms.iter().any(|t| match t {
                    crate::gp::Term::LogShiftExp { j, .. } => g_touches_free(*j),
                    crate::gp::Term::Lse2 { j1, j2 } => g_touches_free(*j1) || g_touches_free(*j2),
                    crate::gp::Term::Lin { j, .. } => g_touches_free(*j),
                });
            has_free_var
        })
        .map(|(i, _)| i)
        .collect()
}

/// Outer barrier loop. Returns the final point and the total Newton
/// iteration count.
fn barrier_minimize(
    problem: &ConvexProblem,
    z0: [f64; NZ],
    frozen: &[Option<f64>; NZ],
) -> ([f64; NZ], usize) {
    let barrier = barrier_set(problem, frozen);
    let m = barrier.len() as f64;
    let mut t = 1.0;
    let t_final = m / tol::BARRIER_GAP;
    let mut z = z0;
    let mut total_iters = 0;
    loop {
        let iters = newton_center(problem, &barrier, &mut z, t, frozen);
        total_iters += iters;
        if t >= t_final {
            break;
        }
        t = (t * 10.0).min(t_final);
    }
    (z, total_iters)
}

/// Damped Newton minimization of the barrier objective at fixed `t`.
fn newton_center(
    problem: &ConvexProblem,
    barrier: &[usize],
    z: &mut [f64; NZ],
    t: f64,
    frozen: &[Option<f64>; NZ],
) -> usize {
    let wv = [
        problem.weights.w1,
        problem.weights.w2,
        problem.weights.w3,
    ];
    let mut iters = 0;
    for _ in 0..150 {
        iters += 1;
        let point = LogDomainPoint::from_slice(z);
        let mut grad = DVector::zeros(NZ);
        for k in 0..3 {
            grad[k] = -t * wv[k];
        }
        let mut hess = DMatrix::zeros(NZ, NZ);
        let mut phi = -t * (wv[0] * z[0] + wv[1] * z[1] + wv[2] * z[2]);
        for &i in barrier {
            let con = &problem.constraints[i];
            let v = con.value(&point);
            debug_assert!(v < 0.0, "barrier point must stay strictly feasible");
            phi -= (-v).ln();
            let g = con.grad(&point);
            let inv = -1.0 / v;
            for a in 0..NZ {
                if g[a] == 0.0 {
                    continue;
                }
                grad[a] += inv * g[a];
                for b in 0..NZ {
                    if g[b] != 0.0 {
                        hess[(a, b)] += g[a] * g[b] * inv * inv;
                    }
                }
            }
            con.add_hessian(&point, inv, &mut hess);
        }
        // Frozen coordinates: pin with identity rows and zero gradient.
        for (k, f) in frozen.iter().enumerate() {
            if f.is_some() {
                grad[k] = 0.0;
                for a in 0..NZ {
                    hess[(k, a)] = 0.0;
                    hess[(a, k)] = 0.0;
                }
                hess[(k, k)] = 1.0;
            }
        }

        let step = solve_direction(&hess, &grad);
        let decrement = -grad.dot(&step);
        if decrement <= 1e-11 {
            break;
        }
        // Backtracking line search with a feasibility guard.
        let mut s = 1.0;
        let mut accepted = false;
        while s > 1e-13 {
            let mut z_new = *z;
            for k in 0..NZ {
                z_new[k] += s * step[k];
            }
            let p_new = LogDomainPoint::from_slice(&z_new);
            let feasible = barrier
                .iter()
                .all(|&i| problem.constraints[i].value(&p_new) < 0.0);
            if feasible {
                let mut phi_new = -t * (wv[0] * z_new[0] + wv[1] * z_new[1] + wv[2] * z_new[2]);
                for &i in barrier {
                    phi_new -= (-problem.constraints[i].value(&p_new)).ln();
                }
                if phi_new <= phi + 1e-4 * s * grad.dot(&step) {
                    *z = z_new;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    iters
}

/// Newton direction with escalating ridge regularization; falls back to
/// steepest descent if the factorization keeps failing.
fn solve_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let mut ridge = 0.0;
    let scale = hess.diagonal().amax().max(1.0);
    for _ in 0..8 {
        let mut h = hess.clone();
        if ridge > 0.0 {
            for k in 0..h.nrows() {
                h[(k, k)] += ridge;
            }
        }
        if let Some(chol) = h.cholesky() {
            return -chol.solve(grad);
        }
        ridge = if ridge == 0.0 { 1e-12 * scale } else { ridge * 100.0 };
    }
    -grad / grad.norm().max(1.0)
}

/// Multi-start search for the restricted (single-partition) problem: oracle
/// grid plus the relaxed solution's three partitions as seeds, refined by
/// deterministic pattern ascent. The best value is a lower bound on the
/// relaxed optimum; the result is certified by synchronizing the partitions
/// and checking the relaxed KKT residual.
pub fn solve_restricted(c: &ChannelConfig, r0: f64, w: &WeightVector) -> Result<SolveResult> {
    let c = validate(*c)?;
    w.validate()?;
    let cap = r0_max(&c);
    if !(-1e-12..=cap + 1e-12).contains(&r0) {
        return Err(Error::R0OutOfRange { r0, r0_max: cap });
    }
    let r0 = r0.max(0.0).min(cap);
    let spec = GridSpec::default();
    let mut best = oracle::grid_search(&c, r0, w, RegionId::Region1, &spec)?;

    // Seeds from the relaxed solution (projected into the simplex).
    if let Ok(relaxed) = solve_relaxed(&c, r0, w) {
        for seed in [relaxed.alpha, relaxed.alpha_p, relaxed.alpha_pp] {
            let mut arr = seed.as_array();
            for v in arr.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
            let mut seed = PowerPartition::from_array(arr);
            for i in 1..=2 {
                let s = seed.sum(i);
                if s > 1.0 {
                    let scale = 1.0 / s;
                    if i == 1 {
                        seed.a11 *= scale;
                        seed.a12 *= scale;
                    } else {
                        seed.a21 *= scale;
                        seed.a22 *= scale;
                    }
                }
            }
            if let Some(refined) = oracle::refine(
                &c,
                r0,
                w,
                RegionId::Region1,
                seed,
                0.125,
                spec.refine_rounds,
                spec.refine_shrink,
            ) {
                let better = refined.objective > best.objective
                    || (refined.objective == best.objective
                        && refined.theta.as_array() < best.theta.as_array());
                if better {
                    best = oracle::GridSearchResult {
                        theta: refined.theta,
                        rates: refined.rates,
                        objective: refined.objective,
                    };
                }
            }
        }
    }

    let (multipliers, report) =
        crate::kkt::certify_synchronized(&c, RegionId::Relaxed1, &best.theta, &best.rates, w, r0);
    let status = if report.max_residual <= tol::SOLVER_KKT {
        SolveStatus::Converged
    } else {
        SolveStatus::IterationLimit
    };
    Ok(SolveResult {
        rates: best.rates,
        alpha: best.theta,
        alpha_p: best.theta,
        alpha_pp: best.theta,
        objective: best.objective,
        status,
        kkt_residual: report.max_residual,
        iterations: spec.refine_rounds,
        multipliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kkt::check_lemma_signs;

    fn reference() -> ChannelConfig {
        ChannelConfig::new(10.0, 10.0, [1.0, 2.0, 4.0], [1.0, 2.0, 4.0])
    }

    #[test]
    fn relaxed_w100_maximizes_r1_only() {
        let c = reference();
        let res = solve_relaxed(&c, 0.0, &WeightVector::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(res.status, SolveStatus::Converged);
        // R1 cap is the Y-receiver full-power sum 0.5 ln(38.5); the other
        // rates carry no weight and collapse.
        assert!((res.rates.r1 - 1.825_329_120_646_869_3).abs() < 1e-5);
        assert!(res.rates.r2 < 1e-5);
        assert!(res.rates.r3 < 1e-5);
    }

    #[test]
    fn relaxed_reference_value_and_certificate() {
        let c = reference();
        let w = WeightVector::new(3.0, 2.0, 1.0);
        let res = solve_relaxed(&c, 0.5, &w).unwrap();
        assert_eq!(res.status, SolveStatus::Converged);
        assert!(res.kkt_residual <= tol::SOLVER_KKT);
        // Frozen closed-form optimum: 3 (f01 - 0.5) + ln 2 at layer sums
        // (s2, a21) = (0.2, 0).
        assert!(
            (res.objective - 4.060_936_880_338_307).abs() < 1e-6,
            "objective {}",
            res.objective
        );
        assert!(check_lemma_signs(&res.multipliers).pass());
        // The Y-chain carries the weight at this ordering.
        assert!(res.multipliers.lambda[1] > 0.5);
        assert!(res.multipliers.eta.iter().all(|v| *v < 1e-6));
    }

    #[test]
    fn saturated_r0_gives_zero_objective() {
        let c = reference();
        let cap = r0_max(&c);
        let res = solve_relaxed(&c, cap, &WeightVector::new(3.0, 2.0, 1.0)).unwrap();
        assert_eq!(res.status, SolveStatus::Converged);
        assert_eq!(res.objective, 0.0);
        assert!(res.kkt_residual <= tol::SOLVER_KKT);
        assert!(check_lemma_signs(&res.multipliers).pass());
    }

    #[test]
    fn r0_out_of_range_rejected() {
        let c = reference();
        let cap = r0_max(&c);
        assert!(matches!(
            solve_relaxed(&c, cap + 1e-3, &WeightVector::new(1.0, 0.5, 0.2)),
            Err(Error::R0OutOfRange { .. })
        ));
    }

    #[test]
    fn restricted_matches_relaxed_on_reference() {
        let c = reference();
        let w = WeightVector::new(3.0, 2.0, 1.0);
        let relaxed = solve_relaxed(&c, 0.5, &w).unwrap();
        let restricted = solve_restricted(&c, 0.5, &w).unwrap();
        assert!(restricted.objective <= relaxed.objective + 1e-9);
        assert!(
            (relaxed.objective - restricted.objective).abs()
                <= tol::TIGHTNESS_REL * relaxed.objective.max(1.0)
        );
        assert_eq!(restricted.status, SolveStatus::Converged);
    }

    #[test]
    fn restricted_active_set_examples() {
        let c = reference();
        let res = solve_restricted(&c, 0.5, &WeightVector::new(3.0, 2.0, 1.0)).unwrap();
        let rep = crate::rates::spc_report(&c, &res.alpha, &res.rates);
        for id in ["f01", "f012", "f0123"] {
            assert!(
                rep.entry(id).unwrap().active,
                "{id} should be active, slack {}",
                rep.slack(id).unwrap()
            );
        }
        let res = solve_restricted(&c, 0.5, &WeightVector::new(2.0, 3.0, 1.0)).unwrap();
        let rep = crate::rates::spc_report(&c, &res.alpha, &res.rates);
        for id in ["g02", "g012", "g0123"] {
            assert!(
                rep.entry(id).unwrap().active,
                "{id} should be active, slack {}",
                rep.slack(id).unwrap()
            );
        }
    }

    #[test]
    fn region2_mirror_symmetry() {
        // On a channel with mirrored subchannels, solving the second region
        // with reversed weights equals solving the first region on the
        // mirrored channel.
        let c = ChannelConfig::new(7.0, 12.0, [0.8, 1.7, 3.1], [1.2, 2.2, 4.5]);
        let w = WeightVector::new(3.0, 2.0, 1.0);
        let wr = WeightVector::new(1.0, 2.0, 3.0);
        let a = solve_region2_relaxed(&c, 0.4, &wr).unwrap();
        let b = solve_relaxed(&c.mirrored(), 0.4, &w).unwrap();
        assert!(
            (a.objective - b.objective).abs() < 1e-6,
            "{} vs {}",
            a.objective,
            b.objective
        );
    }

    #[test]
    fn region2_positive_objective() {
        let c = reference();
        let res = solve_region2_relaxed(&c, 0.0, &WeightVector::new(1.0, 0.0, 0.0)).unwrap();
        assert!(res.objective > 0.1);
    }

    #[test]
    fn region2_reference_value() {
        // Mirror of the first-region frozen value at reversed weights on the
        // symmetric reference channel, R0 = 0.3.
        let c = reference();
        let res = solve_region2_relaxed(&c, 0.3, &WeightVector::new(1.0, 2.0, 3.0)).unwrap();
        assert!(
            (res.objective - 4.660_936_880_338_307).abs() < 1e-6,
            "objective {}",
            res.objective
        );
    }

    #[test]
    fn objective_monotone_in_r0() {
        let c = reference();
        let w = WeightVector::new(2.0, 3.0, 1.0);
        let cap = r0_max(&c);
        let mut last = f64::INFINITY;
        for k in 0..6 {
            let r0 = cap * k as f64 / 6.0;
            let res = solve_relaxed(&c, r0, &w).unwrap();
            assert!(
                res.objective <= last + 1e-7,
                "objective rose from {last} to {} at r0 = {r0}",
                res.objective
            );
            last = res.objective;
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let c = ChannelConfig::new(9.0, 14.0, [0.9, 2.1, 3.3], [0.7, 1.5, 3.9]);
        let w = WeightVector::new(2.2, 3.1, 1.4);
        let a = solve_relaxed(&c, 0.37, &w).unwrap();
        let b = solve_relaxed(&c, 0.37, &w).unwrap();
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.rates, b.rates);
        assert_eq!(a.alpha, b.alpha);
    }

    #[test]
    fn tiny_subchannel_power_freezes_cleanly() {
        // Degenerate second subchannel: the solve must still converge and
        // certify; the second subchannel contributes nothing.
        let c = ChannelConfig::new(10.0, 1e-9, [1.0, 2.0, 4.0], [1.0, 2.0, 4.0]);
        let w = WeightVector::new(3.0, 2.0, 1.0);
        let res = solve_relaxed(&c, 0.2, &w).unwrap();
        assert_eq!(res.status, SolveStatus::Converged, "residual {}", res.kkt_residual);
        assert!(res.rates.r1 > 0.0);
    }
}
