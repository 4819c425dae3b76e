//! KKT residuals, closed-form multiplier patterns, and multiplier
//! sign-structure checks.
//!
//! Two first-order systems are covered: the restricted problem (one shared
//! partition, twelve multipliers `beta`) and the relaxed problem (three
//! partitions; multiplier groups `lambda`, `eta`, `xi` plus one simplex
//! multiplier per subchannel per group). Stationarity in the partition
//! variables is written for the doubled bounds (log ratios without the
//! one-half factor), matching the scale of the closed-form patterns; the
//! zero set is unchanged.
//!
//! Both residuals are *projected*: at a variable sitting on its lower bound
//! the stationarity component only penalizes the ascent direction, and at an
//! active simplex sum the corresponding multiplier absorbs the common
//! gradient. Interior points reduce to the plain equations.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::channel::{ChannelConfig, PowerPartition, RateVector, WeightVector};
use crate::oracle::{grid_search, GridSpec};
use crate::rates::{bound, grad2_bound, spc_report, ConstraintId};
use crate::regions::{Point, RegionId, RelaxedPoint};
use crate::{tol, Error, Result};

/// The six strict orderings of `(w1, w2, w3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OrderingCase {
    /// `w1 > w2 > w3`
    W123,
    /// `w2 > w1 > w3`
    W213,
    /// `w1 > w3 > w2`
    W132,
    /// `w3 > w2 > w1`
    W321,
    /// `w3 > w1 > w2`
    W312,
    /// `w2 > w3 > w1`
    W231,
}

impl OrderingCase {
    pub const ALL: [OrderingCase; 6] = [
        OrderingCase::W123,
        OrderingCase::W213,
        OrderingCase::W132,
        OrderingCase::W321,
        OrderingCase::W312,
        OrderingCase::W231,
    ];

    /// Weight indices (0-based) from largest to smallest.
    pub fn descending_indices(&self) -> [usize; 3] {
        match self {
            OrderingCase::W123 => [0, 1, 2],
            OrderingCase::W213 => [1, 0, 2],
            OrderingCase::W132 => [0, 2, 1],
            OrderingCase::W321 => [2, 1, 0],
            OrderingCase::W312 => [2, 0, 1],
            OrderingCase::W231 => [1, 2, 0],
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            OrderingCase::W123 => "w1>w2>w3",
            OrderingCase::W213 => "w2>w1>w3",
            OrderingCase::W132 => "w1>w3>w2",
            OrderingCase::W321 => "w3>w2>w1",
            OrderingCase::W312 => "w3>w1>w2",
            OrderingCase::W231 => "w2>w3>w1",
        }
    }
}

impl std::fmt::Display for OrderingCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Strict ordering of a weight vector; ties are rejected rather than
/// perturbed. Callers may pre-perturb by 1e-9 if they need boundary weights.
pub fn ordering_of(w: &WeightVector) -> Result<OrderingCase> {
    let (w1, w2, w3) = (w.w1, w.w2, w.w3);
    if w1 == w2 || w2 == w3 || w1 == w3 {
        return Err(Error::TiedWeights);
    }
    Ok(if w1 > w2 && w2 > w3 {
        OrderingCase::W123
    } else if w2 > w1 && w1 > w3 {
        OrderingCase::W213
    } else if w1 > w3 && w3 > w2 {
        OrderingCase::W132
    } else if w3 > w2 && w2 > w1 {
        OrderingCase::W321
    } else if w3 > w1 && w1 > w2 {
        OrderingCase::W312
    } else {
        OrderingCase::W231
    })
}

/// Multipliers of the restricted system, indexed in constraint order:
/// `beta[0..4]` on the Y-chain, `beta[4..8]` on the Z-chain (without the
/// removed `g023`), `beta[8..12]` on the W-chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Multipliers17 {
    pub beta: [f64; 12],
}

impl Multipliers17 {
    pub const ZERO: Multipliers17 = Multipliers17 { beta: [0.0; 12] };
}

/// Multipliers of the relaxed system. `lambda` pairs with the Y-family
/// constraints on `alpha`, `eta` with the Z-family on `alpha'` (its third
/// slot holds whichever middle constraint the region keeps), `xi` with the
/// W-family on `alpha''`. `mu*` are the per-subchannel simplex multipliers
/// of the three groups, in the doubled-bound scale of the stationarity
/// equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Multipliers19 {
    pub lambda: [f64; 4],
    pub eta: [f64; 4],
    pub xi: [f64; 4],
    pub mu: [f64; 2],
    pub mu_p: [f64; 2],
    pub mu_pp: [f64; 2],
}

impl Multipliers19 {
    pub const ZERO: Multipliers19 = Multipliers19 {
        lambda: [0.0; 4],
        eta: [0.0; 4],
        xi: [0.0; 4],
        mu: [0.0; 2],
        mu_p: [0.0; 2],
        mu_pp: [0.0; 2],
    };

    /// All twelve rate-constraint multipliers in region constraint order.
    pub fn rate_multipliers(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        out[..4].copy_from_slice(&self.lambda);
        out[4..8].copy_from_slice(&self.eta);
        out[8..].copy_from_slice(&self.xi);
        out
    }
}

/// Per-equation residual breakdown keyed by the equation labels of the two
/// systems (`"17a"`..`"17s"`, `"19a"`..`"19r"`).
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub by_equation: BTreeMap<String, f64>,
}

impl ResidualReport {
    fn from_map(by_equation: BTreeMap<String, f64>) -> Self {
        let max_residual = by_equation.values().fold(0.0f64, |a, b| a.max(*b));
        ResidualReport {
            max_residual,
            by_equation,
        }
    }
}

/// Projected stationarity components for one partition and one family of
/// weighted gradients: returns the per-entry residuals after absorbing an
/// active simplex sum into the multiplier `mu` (estimated when `None`).
fn partition_stationarity(
    c: &ChannelConfig,
    part: &PowerPartition,
    ids: &[ConstraintId],
    ms: &[f64],
    mu: Option<[f64; 2]>,
) -> ([f64; 4], [f64; 2]) {
    let mut stat = [0.0; 4];
    for (id, m) in ids.iter().zip(ms) {
        if *m == 0.0 {
            continue;
        }
        let g = grad2_bound(*id, c, part);
        for k in 0..4 {
            stat[k] += m * g[k];
        }
    }
    let entries = part.as_array();
    let mut mu_used = [0.0; 2];
    let mut out = [0.0; 4];
    for i in 0..2 {
        let sum_active = part.sum(i + 1) >= 1.0 - tol::ACTIVITY;
        let idx = [2 * i, 2 * i + 1];
        let mu_i = match mu {
            Some(m) => m[i],
            None => {
                if sum_active {
                    // Absorb the mean interior gradient; clamp to the cone.
                    let interior: Vec<f64> = idx
                        .iter()
                        .filter(|&&j| entries[j] > tol::ACTIVITY)
                        .map(|&j| stat[j])
                        .collect();
                    if interior.is_empty() {
                        0.0
                    } else {
                        (interior.iter().sum::<f64>() / interior.len() as f64).max(0.0)
                    }
                } else {
                    0.0
                }
            }
        };
        mu_used[i] = mu_i;
        for &j in &idx {
            let resid = stat[j] - if sum_active { mu_i } else { 0.0 };
            out[j] = if entries[j] <= tol::ACTIVITY {
                // At the lower bound only an ascent direction is a defect.
                resid.max(0.0)
            } else {
                resid.abs()
            };
        }
        // A multiplier on an inactive sum is its own defect.
        if !sum_active {
            out[idx[0]] = out[idx[0]].max(mu_i.abs());
        }
    }
    (out, mu_used)
}

/// Rate-stationarity components `w_k - sum of participating multipliers`,
/// projected at rates sitting on zero.
fn rate_stationarity(
    ids: &[ConstraintId],
    ms: &[f64],
    w: &WeightVector,
    rates: &RateVector,
) -> [f64; 3] {
    let wv = w.as_array();
    let rv = rates.particular();
    let mut out = [0.0; 3];
    for k in 0..3 {
        let mut grad = wv[k];
        for (id, m) in ids.iter().zip(ms) {
            grad -= m * id.rate_coeffs()[k];
        }
        out[k] = if rv[k] <= tol::ACTIVITY {
            grad.max(0.0)
        } else {
            grad.abs()
        };
    }
    out
}

/// Residual of the restricted first-order system at `(theta, rates, beta)`.
///
/// Aggregates, in the max norm: rate and partition stationarity, primal
/// feasibility, multiplier nonnegativity, and complementarity products.
pub fn residual_17(
    c: &ChannelConfig,
    theta: &PowerPartition,
    rates: &RateVector,
    beta: &Multipliers17,
    w: &WeightVector,
    r0: f64,
) -> ResidualReport {
    let ids = RegionId::Region1.constraint_ids();
    let mut eq = BTreeMap::new();
    let full = RateVector::new(r0, rates.r1, rates.r2, rates.r3);

    let stat_r = rate_stationarity(ids, &beta.beta, w, &full);
    eq.insert("17a".into(), stat_r[0]);
    eq.insert("17b".into(), stat_r[1]);
    eq.insert("17c".into(), stat_r[2]);

    let (stat_a, _) = partition_stationarity(c, theta, ids, &beta.beta, None);
    // Variable order of the displayed equations: a21, a22, a12, a11.
    eq.insert("17d".into(), stat_a[2]);
    eq.insert("17e".into(), stat_a[3]);
    eq.insert("17f".into(), stat_a[1]);
    eq.insert("17g".into(), stat_a[0]);

    for (pos, (id, m)) in ids.iter().zip(beta.beta).enumerate() {
        let slack = bound(*id, c, theta) - id.rate_sum(&full);
        let key = format!("17{}", (b'h' + pos as u8) as char);
        let worst = (-slack).max(-m).max((m * slack).abs());
        eq.insert(key, worst.max(0.0));
    }
    // Primal feasibility of rates and partition box.
    let mut prim: f64 = 0.0;
    for v in [full.r0, full.r1, full.r2, full.r3] {
        prim = prim.max(-v);
    }
    for v in theta.as_array() {
        prim = prim.max(-v);
    }
    prim = prim.max(theta.sum(1) - 1.0).max(theta.sum(2) - 1.0);
    eq.insert("primal".into(), prim.max(0.0));

    ResidualReport::from_map(eq)
}

/// Residual of the relaxed first-order system at a relaxed point with the
/// given multipliers. `region` selects which middle Z-constraint the `eta`
/// group pairs with.
pub fn residual_19(
    c: &ChannelConfig,
    region: RegionId,
    point: &RelaxedPoint,
    m: &Multipliers19,
    w: &WeightVector,
    r0: f64,
) -> ResidualReport {
    debug_assert!(region.is_relaxed());
    let ids = region.constraint_ids();
    let ms = m.rate_multipliers();
    let mut eq = BTreeMap::new();
    let full = RateVector::new(r0, point.rates.r1, point.rates.r2, point.rates.r3);

    let stat_r = rate_stationarity(ids, &ms, w, &full);
    eq.insert("19a".into(), stat_r[0]);
    eq.insert("19b".into(), stat_r[1]);
    eq.insert("19c".into(), stat_r[2]);

    let groups = [
        ("19d", &point.alpha, &ids[0..4], &ms[0..4], m.mu),
        ("19e", &point.alpha_p, &ids[4..8], &ms[4..8], m.mu_p),
        ("19f", &point.alpha_pp, &ids[8..12], &ms[8..12], m.mu_pp),
    ];
    for (key, part, gids, gms, mu) in groups {
        let (stat, _) = partition_stationarity(c, part, gids, gms, Some(mu));
        let mut worst = stat.iter().fold(0.0f64, |a, b| a.max(*b));
        for i in 0..2 {
            worst = worst.max(-mu[i]); // nonnegativity
            worst = worst.max((mu[i] * (1.0 - part.sum(i + 1))).abs()); // complementarity
        }
        eq.insert(key.into(), worst);
    }

    for (pos, (id, mc)) in ids.iter().zip(ms).enumerate() {
        let part = point.partition_for(id.family());
        let slack = bound(*id, c, part) - id.rate_sum(&full);
        let key = format!("19{}", (b'g' + pos as u8) as char);
        let worst = (-slack).max(-mc).max((mc * slack).abs());
        eq.insert(key, worst.max(0.0));
    }

    let mut prim: f64 = 0.0;
    for v in [full.r0, full.r1, full.r2, full.r3] {
        prim = prim.max(-v);
    }
    for part in [&point.alpha, &point.alpha_p, &point.alpha_pp] {
        for v in part.as_array() {
            prim = prim.max(-v);
        }
        prim = prim.max(part.sum(1) - 1.0).max(part.sum(2) - 1.0);
    }
    eq.insert("primal".into(), prim.max(0.0));

    ResidualReport::from_map(eq)
}

/// Closed-form multiplier patterns of the restricted system per strict
/// weight ordering.
///
/// For `w1 > w2 > w3` the Y-chain carries the full weight
/// (`beta = (w1-w2, w2-w3, w3)` on its last three constraints); for
/// `w2 > w1 > w3` the Z-chain does. For `w1 > w3 > w2` the reduced system
/// with `R2 = 0` puts `(w1-w3, w3)` on the two surviving Z-chain sum
/// constraints. The remaining orderings mirror these under the Y/W swap,
/// mapping the Y-chain onto the W-chain.
pub fn recover_multipliers(ordering: OrderingCase, w: &WeightVector) -> Result<Multipliers17> {
    w.validate()?;
    let (w1, w2, w3) = (w.w1, w.w2, w.w3);
    let mut beta = [0.0; 12];
    match ordering {
        OrderingCase::W123 => {
            beta[1] = w1 - w2;
            beta[2] = w2 - w3;
            beta[3] = w3;
        }
        OrderingCase::W213 => {
            beta[5] = w2 - w1;
            beta[6] = w1 - w3;
            beta[7] = w3;
        }
        OrderingCase::W132 => {
            beta[6] = w1 - w3;
            beta[7] = w3;
        }
        OrderingCase::W321 => {
            beta[9] = w3 - w2;
            beta[10] = w2 - w1;
            beta[11] = w1;
        }
        OrderingCase::W312 => {
            beta[9] = w3 - w1;
            beta[11] = w1;
        }
        OrderingCase::W231 => return Err(Error::UnsupportedOrdering("w2>w3>w1")),
    }
    if beta.iter().any(|b| *b < 0.0) {
        return Err(Error::TiedWeights);
    }
    Ok(Multipliers17 { beta })
}

/// Expected binding structure at the restricted optimum per ordering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ExpectedActives {
    Constraints {
        ids: Vec<ConstraintId>,
        r2_zero: bool,
    },
    /// The restricted optimum for this ordering leaves the full region; its
    /// boundary is generated through the other reduced region instead.
    NotInRegion1,
}

/// The sum-rate constraints that bind at the restricted optimum for each
/// strict ordering, in the regime where the interior construction applies.
pub fn expected_active_set(ordering: OrderingCase) -> ExpectedActives {
    use ConstraintId::*;
    match ordering {
        OrderingCase::W123 => ExpectedActives::Constraints {
            ids: vec![F01, F012, F0123],
            r2_zero: false,
        },
        OrderingCase::W213 => ExpectedActives::Constraints {
            ids: vec![G02, G012, G0123],
            r2_zero: false,
        },
        OrderingCase::W132 => ExpectedActives::Constraints {
            ids: vec![G012, G0123],
            r2_zero: true,
        },
        OrderingCase::W321 => ExpectedActives::Constraints {
            ids: vec![H03, H023, H0123],
            r2_zero: false,
        },
        OrderingCase::W312 => ExpectedActives::Constraints {
            ids: vec![H03, H0123],
            r2_zero: true,
        },
        OrderingCase::W231 => ExpectedActives::NotInRegion1,
    }
}

/// Result of the multiplier sign-structure checks.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub violations: Vec<String>,
}

impl LemmaReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the structural sign patterns of a relaxed multiplier set: the
/// level-0 multipliers vanish; the Y-chain group is all-zero or
/// all-positive; the Z-chain group is all-zero or has its first and last
/// members positive; the W-chain group is all-zero or all-positive.
pub fn check_lemma_signs(m: &Multipliers19) -> LemmaReport {
    let z = tol::MULTIPLIER_ZERO;
    let mut violations = Vec::new();
    for (name, v) in [
        ("lambda0", m.lambda[0]),
        ("eta0", m.eta[0]),
        ("xi0", m.xi[0]),
    ] {
        if v.abs() > z {
            violations.push(format!("{name} = {v} should vanish"));
        }
    }
    let group = |name: &str, g: &[f64], need_all: bool, violations: &mut Vec<String>| {
        let all_zero = g.iter().all(|v| v.abs() <= z);
        if all_zero {
            return;
        }
        if need_all {
            if !g.iter().all(|v| *v > z) {
                violations.push(format!("{name} group neither all-zero nor all-positive: {g:?}"));
            }
        } else if !(g[0] > z && g[2] > z) {
            violations.push(format!(
                "{name} group nonzero but first/last members not positive: {g:?}"
            ));
        }
    };
    group("lambda", &m.lambda[1..4], true, &mut violations);
    group("eta", &m.eta[1..4], false, &mut violations);
    group("xi", &m.xi[1..4], true, &mut violations);
    LemmaReport { violations }
}

/// Least-squares recovery of relaxed multipliers at a given point.
///
/// Complementarity fixes every multiplier whose constraint is slack to zero;
/// the remaining ones (plus simplex multipliers on active sums) solve the
/// stationarity equations in the least-squares sense, with negative
/// components clipped and re-solved. Used to certify candidate optima that
/// did not come out of the barrier solver.
pub fn recover_multipliers19(
    c: &ChannelConfig,
    region: RegionId,
    point: &RelaxedPoint,
    w: &WeightVector,
    r0: f64,
) -> Multipliers19 {
    // Valid certificates put nothing on the level-0 constraints, so try that
    // support first; fall back to the full support only if it certifies
    // better (level-0 bounds can bind at the common-rate cap).
    let restricted = recover_with_support(c, region, point, w, r0, false);
    let rep = residual_19(c, region, point, &restricted, w, r0);
    if rep.max_residual <= tol::SOLVER_KKT {
        return restricted;
    }
    let full = recover_with_support(c, region, point, w, r0, true);
    let rep_full = residual_19(c, region, point, &full, w, r0);
    if rep_full.max_residual < rep.max_residual {
        full
    } else {
        restricted
    }
}

fn recover_with_support(
    c: &ChannelConfig,
    region: RegionId,
    point: &RelaxedPoint,
    w: &WeightVector,
    r0: f64,
    allow_level0: bool,
) -> Multipliers19 {
    let ids = region.constraint_ids();
    let full = RateVector::new(r0, point.rates.r1, point.rates.r2, point.rates.r3);

    // Column layout: 12 rate multipliers then 6 simplex multipliers.
    let mut free = [false; 18];
    for (k, id) in ids.iter().enumerate() {
        let part = point.partition_for(id.family());
        let slack = bound(*id, c, part) - id.rate_sum(&full);
        let level0 = !id.involves_particular_rates();
        free[k] = slack.abs() <= 10.0 * tol::ACTIVITY && (allow_level0 || !level0);
    }
    let parts = [&point.alpha, &point.alpha_p, &point.alpha_pp];
    for (g, part) in parts.iter().enumerate() {
        for i in 0..2 {
            free[12 + 2 * g + i] = part.sum(i + 1) >= 1.0 - 10.0 * tol::ACTIVITY;
        }
    }

    // Equality rows: rate stationarity for positive rates, partition
    // stationarity for interior entries.
    let mut rows: Vec<[f64; 18]> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let rv = full.particular();
    let wv = w.as_array();
    let rate_row = |k: usize| {
        let mut row = [0.0; 18];
        for (c_idx, id) in ids.iter().enumerate() {
            row[c_idx] = id.rate_coeffs()[k];
        }
        row
    };
    let stat_row = |g: usize, j: usize| {
        let part = parts[g];
        let mut row = [0.0; 18];
        for (k_local, id) in ids[4 * g..4 * g + 4].iter().enumerate() {
            row[4 * g + k_local] = grad2_bound(*id, c, part)[j];
        }
        let i = j / 2;
        if part.sum(i + 1) >= 1.0 - 10.0 * tol::ACTIVITY {
            row[12 + 2 * g + i] = -1.0;
        }
        row
    };
    for k in 0..3 {
        if rv[k] > tol::ACTIVITY {
            rows.push(rate_row(k));
            rhs.push(wv[k]);
        }
    }
    for (g, part) in parts.iter().enumerate() {
        let entries = part.as_array();
        for j in 0..4 {
            if entries[j] > tol::ACTIVITY {
                rows.push(stat_row(g, j));
                rhs.push(0.0);
            }
        }
    }

    // Outer loop: solve, then repair violated sign conditions at boundary
    // coordinates by promoting them to equality rows.
    let mut solution = [0.0f64; 18];
    for _ in 0..6 {
        solution = nnls_by_support(&rows, &rhs, &free);
        let mut repaired = false;
        for (g, part) in parts.iter().enumerate() {
            let entries = part.as_array();
            for j in 0..4 {
                if entries[j] > tol::ACTIVITY {
                    continue;
                }
                let row = stat_row(g, j);
                let stat: f64 = (0..18).map(|i| row[i] * solution[i]).sum();
                if stat > 1e-9 {
                    rows.push(row);
                    rhs.push(0.0);
                    repaired = true;
                }
            }
        }
        for k in 0..3 {
            if rv[k] > tol::ACTIVITY {
                continue;
            }
            let row = rate_row(k);
            let lhs: f64 = (0..18).map(|i| row[i] * solution[i]).sum();
            if wv[k] - lhs > 1e-9 {
                rows.push(row);
                rhs.push(wv[k]);
                repaired = true;
            }
        }
        if !repaired {
            break;
        }
    }

    let mut m = Multipliers19::ZERO;
    m.lambda.copy_from_slice(&solution[0..4]);
    m.eta.copy_from_slice(&solution[4..8]);
    m.xi.copy_from_slice(&solution[8..12]);
    m.mu = [solution[12], solution[13]];
    m.mu_p = [solution[14], solution[15]];
    m.mu_pp = [solution[16], solution[17]];
    m
}

/// Least squares over the free columns with nonnegativity enforced by
/// iteratively dropping negative components from the support.
fn nnls_by_support(rows: &[[f64; 18]], rhs: &[f64], free: &[bool; 18]) -> [f64; 18] {
    let mut active: Vec<usize> = (0..18).filter(|&i| free[i]).collect();
    let mut solution = [0.0f64; 18];
    for _ in 0..8 {
        if active.is_empty() || rows.is_empty() {
            break;
        }
        let a = nalgebra::DMatrix::from_fn(rows.len(), active.len(), |r, ci| rows[r][active[ci]]);
        let b = nalgebra::DVector::from_iterator(rhs.len(), rhs.iter().copied());
        let svd = a.svd(true, true);
        let x = svd
            .solve(&b, 1e-12)
            .unwrap_or_else(|_| nalgebra::DVector::zeros(active.len()));
        solution = [0.0; 18];
        for (ci, &col) in active.iter().enumerate() {
            solution[col] = x[ci];
        }
        let negative: Vec<usize> = active
            .iter()
            .copied()
            .filter(|&i| solution[i] < -1e-12)
            .collect();
        if negative.is_empty() {
            break;
        }
        active.retain(|i| !negative.contains(i));
        for i in negative {
            solution[i] = 0.0;
        }
    }
    for v in solution.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    solution
}

/// Certify a candidate restricted optimum as a relaxed optimum: synchronize
/// the partitions, recover multipliers by least squares, and return them
/// with the relaxed residual. A near-zero residual proves (by convexity of
/// the log-domain form) that the candidate value is the relaxed optimum,
/// i.e. that the relaxation is tight at this instance.
pub fn certify_synchronized(
    c: &ChannelConfig,
    region: RegionId,
    theta: &PowerPartition,
    rates: &RateVector,
    w: &WeightVector,
    r0: f64,
) -> (Multipliers19, ResidualReport) {
    let point = RelaxedPoint::synchronized(*theta, *rates);
    let m = recover_multipliers19(c, region, &point, w, r0);
    let rep = residual_19(c, region, &point, &m, w, r0);
    (m, rep)
}

/// Outcome of checking the excluded ordering on the first reduced region.
#[derive(Debug, Clone, Serialize)]
pub struct ExclusionReport {
    pub theta: PowerPartition,
    pub rates: RateVector,
    pub objective: f64,
    pub g023_slack: f64,
    pub in_region2: bool,
    pub in_spc: bool,
}

/// For weights ordered `w2 > w3 > w1`, compute the restricted optimum of the
/// first reduced region and report the slack of the removed constraint
/// there. In the regime where the optimum carries positive `R2` and `R3`,
/// that slack is strictly negative: the point escapes the full region and
/// must be generated through the other reduced region instead.
pub fn region1_excludes_w231(
    c: &ChannelConfig,
    r0: f64,
    w: &WeightVector,
) -> Result<ExclusionReport> {
    if ordering_of(w)? != OrderingCase::W231 {
        return Err(Error::InvalidWeights("expected ordering w2 > w3 > w1"));
    }
    let best = grid_search(c, r0, w, RegionId::Region1, &GridSpec::default())?;
    let g023_slack = bound(ConstraintId::G023, c, &best.theta)
        - ConstraintId::G023.rate_sum(&best.rates);
    let point = Point::Shared {
        theta: best.theta,
        rates: best.rates,
    };
    let in_region2 = crate::regions::feasible(RegionId::Region2, c, &point)?.feasible;
    let in_spc = spc_report(c, &best.theta, &best.rates).feasible;
    Ok(ExclusionReport {
        theta: best.theta,
        rates: best.rates,
        objective: best.objective,
        g023_slack,
        in_region2,
        in_spc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::validate;

    fn reference() -> ChannelConfig {
        validate(ChannelConfig::new(
            10.0,
            10.0,
            [1.0, 2.0, 4.0],
            [1.0, 2.0, 4.0],
        ))
        .unwrap()
    }

    #[test]
    fn ordering_detection() {
        assert_eq!(
            ordering_of(&WeightVector::new(3.0, 2.0, 1.0)).unwrap(),
            OrderingCase::W123
        );
        assert_eq!(
            ordering_of(&WeightVector::new(2.0, 3.0, 1.0)).unwrap(),
            OrderingCase::W213
        );
        assert_eq!(
            ordering_of(&WeightVector::new(1.0, 3.0, 2.0)).unwrap(),
            OrderingCase::W231
        );
        assert!(matches!(
            ordering_of(&WeightVector::new(1.0, 1.0, 2.0)),
            Err(Error::TiedWeights)
        ));
    }

    #[test]
    fn recover_patterns() {
        let w = WeightVector::new(3.0, 2.0, 1.0);
        let m = recover_multipliers(OrderingCase::W123, &w).unwrap();
        assert_eq!(m.beta[1], 1.0);
        assert_eq!(m.beta[2], 1.0);
        assert_eq!(m.beta[3], 1.0);
        assert!(m.beta.iter().enumerate().all(|(i, b)| *b == 0.0 || (1..=3).contains(&i)));

        let w = WeightVector::new(2.0, 3.0, 1.0);
        let m = recover_multipliers(OrderingCase::W213, &w).unwrap();
        assert_eq!(m.beta[5], 1.0);
        assert_eq!(m.beta[6], 1.0);
        assert_eq!(m.beta[7], 1.0);

        assert!(matches!(
            recover_multipliers(OrderingCase::W231, &WeightVector::new(1.0, 3.0, 2.0)),
            Err(Error::UnsupportedOrdering(_))
        ));
    }

    #[test]
    fn recovered_patterns_satisfy_rate_stationarity() {
        // The closed-form patterns zero the rate-stationarity equations (with
        // R2 = 0 projection for the two middle-weight-last orderings).
        for (ordering, w) in [
            (OrderingCase::W123, WeightVector::new(0.5, 0.3, 0.2)),
            (OrderingCase::W213, WeightVector::new(0.3, 0.5, 0.2)),
            (OrderingCase::W132, WeightVector::new(0.5, 0.2, 0.3)),
            (OrderingCase::W321, WeightVector::new(0.2, 0.3, 0.5)),
            (OrderingCase::W312, WeightVector::new(0.3, 0.2, 0.5)),
        ] {
            let m = recover_multipliers(ordering, &w).unwrap();
            let r2 = match expected_active_set(ordering) {
                ExpectedActives::Constraints { r2_zero, .. } => {
                    if r2_zero {
                        0.0
                    } else {
                        0.1
                    }
                }
                _ => unreachable!(),
            };
            let rates = RateVector::new(0.0, 0.1, r2, 0.1);
            let ids = RegionId::Region1.constraint_ids();
            let stat = rate_stationarity(ids, &m.beta, &w, &rates);
            for s in stat {
                assert!(s < 1e-12, "{ordering}: stationarity {stat:?}");
            }
        }
    }

    #[test]
    fn residual_17_zero_multipliers_unit_weights() {
        let c = reference();
        let theta = PowerPartition::uniform(0.2);
        let rates = RateVector::new(0.1, 0.1, 0.1, 0.1);
        let w = WeightVector::new(1.0, 1.0, 1.0);
        let rep = residual_17(&c, &theta, &rates, &Multipliers17::ZERO, &w, 0.1);
        for key in ["17a", "17b", "17c"] {
            assert_eq!(rep.by_equation[key], 1.0);
        }
        // Zero multipliers trivially satisfy the partition equations.
        for key in ["17d", "17e", "17f", "17g"] {
            assert_eq!(rep.by_equation[key], 0.0);
        }
        assert_eq!(rep.max_residual, 1.0);
    }

    #[test]
    fn residual_17_perturbed_active_multiplier() {
        // Perturbing one chain multiplier by 0.1 moves stationarity and
        // complementarity by a comparable amount.
        let c = reference();
        let w = WeightVector::new(3.0, 2.0, 1.0);
        let theta = PowerPartition::new(0.2, 0.0, 0.0, 0.2);
        let f = crate::rates::eval_f(&c, &theta);
        let r0 = 0.5;
        let rates = RateVector::new(
            r0,
            f.f01 - r0,
            f.f012 - f.f01,
            f.f0123 - f.f012,
        );
        let mut beta = recover_multipliers(OrderingCase::W123, &w).unwrap();
        let base = residual_17(&c, &theta, &rates, &beta, &w, r0);
        assert!(base.max_residual < 1e-9, "base {}", base.max_residual);
        beta.beta[1] += 0.1;
        let bumped = residual_17(&c, &theta, &rates, &beta, &w, r0);
        assert!(bumped.by_equation["17a"] >= 0.09);
    }

    #[test]
    fn residual_19_lemma2_violation_scale() {
        // A level-0 multiplier of 0.1 shows up in the alpha stationarity at
        // scale 0.1 * P1 / (N11 + s1 P1) >= 0.1 * P1 / (N11 + P1).
        let c = reference();
        let w = WeightVector::new(3.0, 2.0, 1.0);
        let theta = PowerPartition::uniform(0.2);
        let point = RelaxedPoint::synchronized(theta, RateVector::new(0.1, 0.1, 0.1, 0.1));
        let mut m = Multipliers19::ZERO;
        m.lambda[0] = 0.1;
        let rep = residual_19(&c, RegionId::Relaxed1, &point, &m, &w, 0.1);
        let floor = 0.1 * c.p1 / (c.n1[0] + c.p1);
        assert!(
            rep.by_equation["19d"] >= floor,
            "{} vs {floor}",
            rep.by_equation["19d"]
        );
    }

    #[test]
    fn residual_19_all_zero_multipliers() {
        let c = reference();
        let w = WeightVector::new(0.0, 0.0, 1.0);
        let theta = PowerPartition::uniform(0.2);
        let point = RelaxedPoint::synchronized(theta, RateVector::new(0.1, 0.1, 0.1, 0.1));
        let rep = residual_19(&c, RegionId::Relaxed1, &point, &Multipliers19::ZERO, &w, 0.1);
        assert_eq!(rep.by_equation["19c"], 1.0);
    }

    #[test]
    fn lemma_checks_on_patterns() {
        let mut m = Multipliers19::ZERO;
        assert!(check_lemma_signs(&m).pass());
        m.lambda = [0.0, 1.0, 1.0, 1.0];
        assert!(check_lemma_signs(&m).pass());
        m.lambda = [0.0, 1.0, 0.0, 1.0];
        assert!(!check_lemma_signs(&m).pass());
        m.lambda = [0.0; 4];
        m.eta = [0.0, 0.5, 0.0, 0.5];
        assert!(check_lemma_signs(&m).pass(), "middle eta member may vanish");
        m.eta = [0.0, 0.0, 0.5, 0.5];
        assert!(!check_lemma_signs(&m).pass());
        m.eta = [0.0; 4];
        m.xi = [0.1, 0.5, 0.5, 0.5];
        assert!(!check_lemma_signs(&m).pass(), "xi0 must vanish");
    }

    #[test]
    fn expected_active_sets() {
        use ConstraintId::*;
        assert_eq!(
            expected_active_set(OrderingCase::W123),
            ExpectedActives::Constraints {
                ids: vec![F01, F012, F0123],
                r2_zero: false
            }
        );
        assert_eq!(
            expected_active_set(OrderingCase::W213),
            ExpectedActives::Constraints {
                ids: vec![G02, G012, G0123],
                r2_zero: false
            }
        );
        assert_eq!(
            expected_active_set(OrderingCase::W231),
            ExpectedActives::NotInRegion1
        );
    }

    #[test]
    fn w123_restricted_optimum_certifies_and_matches_pattern() {
        // At the interior-regime reference instance the closed-form point
        // (layer sums s2 = 0.2, a21 = 0) plus the recovered pattern solves
        // both first-order systems.
        let c = reference();
        let w = WeightVector::new(3.0, 2.0, 1.0);
        let r0 = 0.5;
        let theta = PowerPartition::new(0.2, 0.0, 0.0, 0.2);
        let f = crate::rates::eval_f(&c, &theta);
        let rates = RateVector::new(r0, f.f01 - r0, f.f012 - f.f01, f.f0123 - f.f012);
        let beta = recover_multipliers(OrderingCase::W123, &w).unwrap();
        let rep17 = residual_17(&c, &theta, &rates, &beta, &w, r0);
        assert!(rep17.max_residual < 1e-9, "{:?}", rep17.by_equation);

        let (m, rep19) = certify_synchronized(&c, RegionId::Relaxed1, &theta, &rates, &w, r0);
        assert!(rep19.max_residual < 1e-7, "{:?}", rep19.by_equation);
        assert!(check_lemma_signs(&m).pass());
    }

    #[test]
    fn exclusion_reference_instance() {
        let c = reference();
        let w = WeightVector::new(1.0, 3.0, 2.0);
        let rep = region1_excludes_w231(&c, 0.3, &w).unwrap();
        assert!(rep.rates.r2 > 1e-3);
        assert!(rep.rates.r3 > 1e-3);
        assert!(rep.g023_slack < -1e-6, "slack {}", rep.g023_slack);
        assert!(!rep.in_region2);
        assert!(!rep.in_spc);
        // Control: a w1-dominant ordering keeps the removed constraint slack.
        let res = grid_search(
            &c,
            0.3,
            &WeightVector::new(3.0, 2.0, 1.0),
            RegionId::Region1,
            &GridSpec::default(),
        )
        .unwrap();
        let slack = bound(ConstraintId::G023, &c, &res.theta)
            - ConstraintId::G023.rate_sum(&res.rates);
        assert!(slack >= -1e-9);
    }
}
