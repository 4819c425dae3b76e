//! The thirteen superposition-coding bound functions and everything built
//! directly on them: the capacity function, the common-rate cap, per-point
//! constraint reports, the redundancy-gap identities, and the partition
//! gradients used by the KKT residuals.
//!
//! Each bound is a sum of half-log ratios. Ratios are evaluated as
//! `ln(num) - ln(den)` rather than `ln(num/den)` for better conditioning when
//! the ratio approaches one.

use serde::Serialize;

use crate::channel::{ChannelConfig, PowerPartition, RateVector};
use crate::{tol, Error, Result};

/// Half the log of a ratio of positive quantities.
#[inline]
pub fn half_log_ratio(num: f64, den: f64) -> f64 {
    0.5 * (num.ln() - den.ln())
}

/// Gaussian capacity of a scalar channel with SNR `x`: `0.5 ln(1 + x)`.
pub fn cap(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::NegativeArgument(x));
    }
    Ok(0.5 * x.ln_1p())
}

/// Stable identifiers for the thirteen rate constraints.
///
/// The names are shared across modules and appear verbatim in CSV and JSON
/// output, so active-set comparisons can be made by string identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintId {
    F0,
    F01,
    F012,
    F0123,
    G0,
    G02,
    G012,
    G023,
    G0123,
    H0,
    H03,
    H023,
    H0123,
}

/// Constraint family, named after the receiver whose decoding chain it
/// describes: F for Y, G for Z, H for W.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    F,
    G,
    H,
}

impl ConstraintId {
    pub const ALL: [ConstraintId; 13] = [
        ConstraintId::F0,
        ConstraintId::F01,
        ConstraintId::F012,
        ConstraintId::F0123,
        ConstraintId::G0,
        ConstraintId::G02,
        ConstraintId::G012,
        ConstraintId::G023,
        ConstraintId::G0123,
        ConstraintId::H0,
        ConstraintId::H03,
        ConstraintId::H023,
        ConstraintId::H0123,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConstraintId::F0 => "f0",
            ConstraintId::F01 => "f01",
            ConstraintId::F012 => "f012",
            ConstraintId::F0123 => "f0123",
            ConstraintId::G0 => "g0",
            ConstraintId::G02 => "g02",
            ConstraintId::G012 => "g012",
            ConstraintId::G023 => "g023",
            ConstraintId::G0123 => "g0123",
            ConstraintId::H0 => "h0",
            ConstraintId::H03 => "h03",
            ConstraintId::H023 => "h023",
            ConstraintId::H0123 => "h0123",
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ConstraintId::F0 | ConstraintId::F01 | ConstraintId::F012 | ConstraintId::F0123 => {
                Family::F
            }
            ConstraintId::G0
            | ConstraintId::G02
            | ConstraintId::G012
            | ConstraintId::G023
            | ConstraintId::G0123 => Family::G,
            _ => Family::H,
        }
    }

    /// Coefficients of `(R1, R2, R3)` on the left-hand side of the
    /// constraint. The common rate always participates with coefficient one.
    pub fn rate_coeffs(&self) -> [f64; 3] {
        match self {
            ConstraintId::F0 | ConstraintId::G0 | ConstraintId::H0 => [0.0, 0.0, 0.0],
            ConstraintId::F01 => [1.0, 0.0, 0.0],
            ConstraintId::F012 | ConstraintId::G012 => [1.0, 1.0, 0.0],
            ConstraintId::F0123
            | ConstraintId::G0123
            | ConstraintId::H0123 => [1.0, 1.0, 1.0],
            ConstraintId::G02 => [0.0, 1.0, 0.0],
            ConstraintId::G023 | ConstraintId::H023 => [0.0, 1.0, 1.0],
            ConstraintId::H03 => [0.0, 0.0, 1.0],
        }
    }

    /// Whether the constraint involves any particular rate at all.
    pub fn involves_particular_rates(&self) -> bool {
        self.rate_coeffs().iter().any(|c| *c != 0.0)
    }

    /// Left-hand side `R0 + sum of participating particular rates`.
    pub fn rate_sum(&self, r: &RateVector) -> f64 {
        let c = self.rate_coeffs();
        r.r0 + c[0] * r.r1 + c[1] * r.r2 + c[2] * r.r3
    }
}

impl std::fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bounds along receiver Y's decoding chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FChain {
    pub f0: f64,
    pub f01: f64,
    pub f012: f64,
    pub f0123: f64,
}

/// Bounds along receiver Z's decoding chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GChain {
    pub g0: f64,
    pub g02: f64,
    pub g012: f64,
    pub g023: f64,
    pub g0123: f64,
}

/// Bounds along receiver W's decoding chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HChain {
    pub h0: f64,
    pub h03: f64,
    pub h023: f64,
    pub h0123: f64,
}

/// Evaluate receiver Y's chain at partition `a`.
pub fn eval_f(c: &ChannelConfig, a: &PowerPartition) -> FChain {
    let (s1, s2) = (a.sum(1), a.sum(2));
    let f0 = half_log_ratio(c.n1[0] + c.p1, c.n1[0] + s1 * c.p1)
        + half_log_ratio(c.n2[2] + c.p2, c.n2[2] + s2 * c.p2);
    let f01 = half_log_ratio(c.n1[0] + c.p1, c.n1[0])
        + half_log_ratio(c.n2[2] + c.p2, c.n2[2] + s2 * c.p2);
    let f012 = f01 + half_log_ratio(c.n2[1] + s2 * c.p2, c.n2[1] + a.a21 * c.p2);
    let f0123 = f012 + half_log_ratio(c.n2[0] + a.a21 * c.p2, c.n2[0]);
    FChain {
        f0,
        f01,
        f012,
        f0123,
    }
}

/// Evaluate receiver Z's chain at partition `a`.
///
/// The four-message bound decomposes two ways (through `g012` or through
/// `g023`); both are computed and must agree to machine-level relative error.
pub fn eval_g(c: &ChannelConfig, a: &PowerPartition) -> GChain {
    let (s1, s2) = (a.sum(1), a.sum(2));
    let g0 = half_log_ratio(c.n1[1] + c.p1, c.n1[1] + s1 * c.p1)
        + half_log_ratio(c.n2[1] + c.p2, c.n2[1] + s2 * c.p2);
    let g02 = half_log_ratio(c.n1[1] + c.p1, c.n1[1] + a.a11 * c.p1)
        + half_log_ratio(c.n2[1] + c.p2, c.n2[1] + a.a21 * c.p2);
    let inc1 = half_log_ratio(c.n1[0] + a.a11 * c.p1, c.n1[0]);
    let inc2 = half_log_ratio(c.n2[0] + a.a21 * c.p2, c.n2[0]);
    let g012 = g02 + inc1;
    let g023 = g02 + inc2;
    let g0123 = g012 + inc2;
    let g0123_alt = g023 + inc1;
    let scale = g0123.abs().max(1.0);
    assert!(
        (g0123 - g0123_alt).abs() <= tol::CHAIN_IDENTITY_REL * scale,
        "four-message bound decompositions disagree: {g0123} vs {g0123_alt}"
    );
    GChain {
        g0,
        g02,
        g012,
        g023,
        g0123,
    }
}

/// Evaluate receiver W's chain at partition `a`.
pub fn eval_h(c: &ChannelConfig, a: &PowerPartition) -> HChain {
    let (s1, s2) = (a.sum(1), a.sum(2));
    let h0 = half_log_ratio(c.n1[2] + c.p1, c.n1[2] + s1 * c.p1)
        + half_log_ratio(c.n2[0] + c.p2, c.n2[0] + s2 * c.p2);
    let h03 = half_log_ratio(c.n1[2] + c.p1, c.n1[2] + s1 * c.p1)
        + half_log_ratio(c.n2[0] + c.p2, c.n2[0]);
    let h023 = h03 + half_log_ratio(c.n1[1] + s1 * c.p1, c.n1[1] + a.a11 * c.p1);
    let h0123 = h023 + half_log_ratio(c.n1[0] + a.a11 * c.p1, c.n1[0]);
    HChain {
        h0,
        h03,
        h023,
        h0123,
    }
}

/// Right-hand side of one rate constraint at partition `a`.
pub fn bound(id: ConstraintId, c: &ChannelConfig, a: &PowerPartition) -> f64 {
    match id.family() {
        Family::F => {
            let f = eval_f(c, a);
            match id {
                ConstraintId::F0 => f.f0,
                ConstraintId::F01 => f.f01,
                ConstraintId::F012 => f.f012,
                _ => f.f0123,
            }
        }
        Family::G => {
            let g = eval_g(c, a);
            match id {
                ConstraintId::G0 => g.g0,
                ConstraintId::G02 => g.g02,
                ConstraintId::G012 => g.g012,
                ConstraintId::G023 => g.g023,
                _ => g.g0123,
            }
        }
        Family::H => {
            let h = eval_h(c, a);
            match id {
                ConstraintId::H0 => h.h0,
                ConstraintId::H03 => h.h03,
                ConstraintId::H023 => h.h023,
                _ => h.h0123,
            }
        }
    }
}

/// Gradient of **twice** the bound with respect to the four partition
/// entries `(a11, a12, a21, a22)`.
///
/// The factor of two matches the convention of the stationarity equations,
/// which are written for the log-ratio bounds without their one-half factor;
/// the zero set is unchanged.
pub fn grad2_bound(id: ConstraintId, c: &ChannelConfig, a: &PowerPartition) -> [f64; 4] {
    let (s1, s2) = (a.sum(1), a.sum(2));
    let d1 = |n: f64, x: f64| c.p1 / (n + x * c.p1);
    let d2 = |n: f64, x: f64| c.p2 / (n + x * c.p2);
    match id {
        ConstraintId::F0 => [
            -d1(c.n1[0], s1),
            -d1(c.n1[0], s1),
            -d2(c.n2[2], s2),
            -d2(c.n2[2], s2),
        ],
        ConstraintId::F01 => [0.0, 0.0, -d2(c.n2[2], s2), -d2(c.n2[2], s2)],
        ConstraintId::F012 => [
            0.0,
            0.0,
            -d2(c.n2[2], s2) + d2(c.n2[1], s2) - d2(c.n2[1], a.a21),
            -d2(c.n2[2], s2) + d2(c.n2[1], s2),
        ],
        ConstraintId::F0123 => [
            0.0,
            0.0,
            -d2(c.n2[2], s2) + d2(c.n2[1], s2) - d2(c.n2[1], a.a21) + d2(c.n2[0], a.a21),
            -d2(c.n2[2], s2) + d2(c.n2[1], s2),
        ],
        ConstraintId::G0 => [
            -d1(c.n1[1], s1),
            -d1(c.n1[1], s1),
            -d2(c.n2[1], s2),
            -d2(c.n2[1], s2),
        ],
        ConstraintId::G02 => [-d1(c.n1[1], a.a11), 0.0, -d2(c.n2[1], a.a21), 0.0],
        ConstraintId::G012 => [
            -d1(c.n1[1], a.a11) + d1(c.n1[0], a.a11),
            0.0,
            -d2(c.n2[1], a.a21),
            0.0,
        ],
        ConstraintId::G023 => [
            -d1(c.n1[1], a.a11),
            0.0,
            -d2(c.n2[1], a.a21) + d2(c.n2[0], a.a21),
            0.0,
        ],
        ConstraintId::G0123 => [
            -d1(c.n1[1], a.a11) + d1(c.n1[0], a.a11),
            0.0,
            -d2(c.n2[1], a.a21) + d2(c.n2[0], a.a21),
            0.0,
        ],
        ConstraintId::H0 => [
            -d1(c.n1[2], s1),
            -d1(c.n1[2], s1),
            -d2(c.n2[0], s2),
            -d2(c.n2[0], s2),
        ],
        ConstraintId::H03 => [-d1(c.n1[2], s1), -d1(c.n1[2], s1), 0.0, 0.0],
        ConstraintId::H023 => [
            -d1(c.n1[2], s1) + d1(c.n1[1], s1) - d1(c.n1[1], a.a11),
            -d1(c.n1[2], s1) + d1(c.n1[1], s1),
            0.0,
            0.0,
        ],
        ConstraintId::H0123 => [
            -d1(c.n1[2], s1) + d1(c.n1[1], s1) - d1(c.n1[1], a.a11) + d1(c.n1[0], a.a11),
            -d1(c.n1[2], s1) + d1(c.n1[1], s1),
            0.0,
            0.0,
        ],
    }
}

/// Largest common rate supported by all three receivers: the minimum of the
/// three full-power two-subchannel capacity sums.
pub fn r0_max(c: &ChannelConfig) -> f64 {
    let y = half_log_ratio(c.n1[0] + c.p1, c.n1[0]) + half_log_ratio(c.n2[2] + c.p2, c.n2[2]);
    let z = half_log_ratio(c.n1[1] + c.p1, c.n1[1]) + half_log_ratio(c.n2[1] + c.p2, c.n2[1]);
    let w = half_log_ratio(c.n1[2] + c.p1, c.n1[2]) + half_log_ratio(c.n2[0] + c.p2, c.n2[0]);
    y.min(z).min(w)
}

/// One row of a constraint report.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintEntry {
    pub id: String,
    pub bound: f64,
    pub sum: f64,
    pub slack: f64,
    pub active: bool,
}

impl ConstraintEntry {
    fn new(id: impl Into<String>, bound: f64, sum: f64) -> Self {
        let slack = bound - sum;
        ConstraintEntry {
            id: id.into(),
            bound,
            sum,
            slack,
            active: slack.abs() <= tol::ACTIVITY,
        }
    }
}

/// Slack and activity of every constraint of a region at one point.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintReport {
    pub entries: Vec<ConstraintEntry>,
    pub feasible: bool,
}

impl ConstraintReport {
    pub fn from_entries(entries: Vec<ConstraintEntry>) -> Self {
        let feasible = entries.iter().all(|e| e.slack >= -tol::FEASIBILITY);
        ConstraintReport { entries, feasible }
    }

    pub fn entry(&self, id: &str) -> Option<&ConstraintEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn slack(&self, id: &str) -> Option<f64> {
        self.entry(id).map(|e| e.slack)
    }

    /// Identifiers of active rate constraints, in canonical order.
    pub fn active_ids(&self) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| e.active)
            .map(|e| e.id.clone())
            .collect()
    }

    pub fn min_slack(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.slack)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Entries for the rate constraints in `ids` at `(theta, r)`.
pub(crate) fn rate_entries(
    ids: &[ConstraintId],
    c: &ChannelConfig,
    theta: &PowerPartition,
    r: &RateVector,
) -> Vec<ConstraintEntry> {
    ids.iter()
        .map(|id| ConstraintEntry::new(id.as_str(), bound(*id, c, theta), id.rate_sum(r)))
        .collect()
}

/// Nonnegativity entries for the four rates.
pub(crate) fn nonneg_entries(r: &RateVector) -> Vec<ConstraintEntry> {
    [("r0", r.r0), ("r1", r.r1), ("r2", r.r2), ("r3", r.r3)]
        .into_iter()
        .map(|(name, v)| ConstraintEntry::new(format!("{name}_nonneg"), v, 0.0))
        .collect()
}

/// Simplex entries for one partition; `label` distinguishes the partition
/// groups of a relaxed point.
pub(crate) fn partition_entries(label: &str, p: &PowerPartition) -> Vec<ConstraintEntry> {
    let mut out = Vec::with_capacity(6);
    for (name, v) in [
        ("11", p.a11),
        ("12", p.a12),
        ("21", p.a21),
        ("22", p.a22),
    ] {
        out.push(ConstraintEntry::new(format!("{label}{name}_nonneg"), v, 0.0));
    }
    out.push(ConstraintEntry::new(
        format!("{label}1_sum"),
        1.0,
        p.sum(1),
    ));
    out.push(ConstraintEntry::new(
        format!("{label}2_sum"),
        1.0,
        p.sum(2),
    ));
    out
}

/// Evaluate the full constraint system at `(theta, r)`: the thirteen rate
/// inequalities plus rate nonnegativity and partition feasibility.
pub fn spc_report(c: &ChannelConfig, theta: &PowerPartition, r: &RateVector) -> ConstraintReport {
    let mut entries = rate_entries(&ConstraintId::ALL, c, theta, r);
    entries.extend(nonneg_entries(r));
    entries.extend(partition_entries("theta", theta));
    ConstraintReport::from_entries(entries)
}

/// The two redundancy gaps: how far the two dropped sum constraints sit above
/// the four-message bounds that dominate them.
///
/// `gap_a` compares receiver Y's chain extended by the full layer-1+2 gain on
/// subchannel 2 against the four-message bound; `gap_b` is the symmetric
/// quantity through receiver W's chain on subchannel 1. Both are strictly
/// positive whenever the corresponding second-layer fraction is.
pub fn redundancy_gap(c: &ChannelConfig, theta: &PowerPartition) -> (f64, f64) {
    let f = eval_f(c, theta);
    let h = eval_h(c, theta);
    let s1 = theta.sum(1);
    let s2 = theta.sum(2);
    let gap_a =
        f.f01 + half_log_ratio(c.n2[0] + s2 * c.p2, c.n2[0]) - f.f0123;
    let gap_b =
        h.h03 + half_log_ratio(c.n1[0] + s1 * c.p1, c.n1[0]) - h.h0123;
    (gap_a, gap_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::validate;
    use proptest::prelude::*;

    pub(crate) fn reference() -> ChannelConfig {
        validate(ChannelConfig::new(
            10.0,
            10.0,
            [1.0, 2.0, 4.0],
            [1.0, 2.0, 4.0],
        ))
        .unwrap()
    }

    fn quarter() -> PowerPartition {
        PowerPartition::uniform(0.25)
    }

    #[test]
    fn cap_examples() {
        assert_eq!(cap(0.0).unwrap(), 0.0);
        assert!((cap(1.0).unwrap() - 0.346_573_590_279_972_65).abs() < 1e-15);
        assert!((cap(3.0).unwrap() - 0.693_147_180_559_945_31).abs() < 1e-15);
        assert!(cap(-1e-12).is_err());
    }

    #[test]
    fn eval_f_at_zero_partition() {
        let c = reference();
        let f = eval_f(&c, &PowerPartition::ZERO);
        let expect = cap(c.p1 / c.n1[0]).unwrap() + cap(c.p2 / c.n2[2]).unwrap();
        assert!((f.f0 - expect).abs() < 1e-14);
        assert_eq!(f.f0, f.f01);
        assert_eq!(f.f01, f.f012);
        assert_eq!(f.f012, f.f0123);
    }

    #[test]
    fn eval_f_full_power_lower_layers() {
        // Entire budget in the first two layers, all of subchannel 2 in
        // layer 1: the common-message bound collapses to zero.
        let c = reference();
        let a = PowerPartition::new(0.5, 0.5, 1.0, 0.0);
        let f = eval_f(&c, &a);
        assert!(f.f0.abs() < 1e-14);
    }

    #[test]
    fn eval_f_reference_value() {
        // 0.5 ln(11/6) + 0.5 ln(14/9), recomputed at high precision.
        let f = eval_f(&reference(), &quarter());
        assert!((f.f0 - 0.523_984_277_924_677_39).abs() < 1e-14);
    }

    #[test]
    fn eval_g_at_zero_partition() {
        let c = reference();
        let g = eval_g(&c, &PowerPartition::ZERO);
        let expect = cap(c.p1 / c.n1[1]).unwrap() + cap(c.p2 / c.n2[1]).unwrap();
        assert!((g.g02 - expect).abs() < 1e-14);
        assert_eq!(g.g012, g.g02);
        assert_eq!(g.g023, g.g02);
        assert_eq!(g.g0123, g.g02);
    }

    #[test]
    fn eval_g_reference_value() {
        // 0.5 ln(12/4.5) * 2 = ln(8/3).
        let g = eval_g(&reference(), &quarter());
        assert!((g.g02 - 0.980_829_253_011_726_24).abs() < 1e-14);
    }

    #[test]
    fn eval_h_at_zero_partition() {
        let c = reference();
        let h = eval_h(&c, &PowerPartition::ZERO);
        let expect = cap(c.p1 / c.n1[2]).unwrap() + cap(c.p2 / c.n2[0]).unwrap();
        assert!((h.h0 - expect).abs() < 1e-14);
        assert_eq!(h.h03, h.h0);
        assert_eq!(h.h023, h.h03);
        assert_eq!(h.h0123, h.h03);
    }

    #[test]
    fn eval_h_saturated_partition_kills_h0() {
        let c = reference();
        let a = PowerPartition::new(0.5, 0.5, 0.5, 0.5);
        let h = eval_h(&c, &a);
        assert!(h.h0.abs() < 1e-14);
    }

    #[test]
    fn eval_h_reference_value() {
        // 0.5 ln(14/9) + 0.5 ln(11), recomputed at high precision.
        let h = eval_h(&reference(), &quarter());
        assert!((h.h03 - 1.419_864_012_538_704_89).abs() < 1e-14);
    }

    #[test]
    fn r0_max_reference_is_ln6() {
        assert!((r0_max(&reference()) - 6.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn r0_max_vanishes_with_power() {
        let c = ChannelConfig::new(1e-12, 1e-12, [1.0, 2.0, 4.0], [1.0, 2.0, 4.0]);
        assert!(r0_max(&c) < 1e-12);
    }

    #[test]
    fn r0_max_symmetric_channel_ties_outer_arguments() {
        let c = reference();
        let y = cap(c.p1 / c.n1[0]).unwrap() + cap(c.p2 / c.n2[2]).unwrap();
        let w = cap(c.p1 / c.n1[2]).unwrap() + cap(c.p2 / c.n2[0]).unwrap();
        assert!((y - w).abs() < 1e-14);
    }

    #[test]
    fn spc_report_zero_rates_feasible() {
        let c = reference();
        let r = RateVector::new(0.0, 0.0, 0.0, 0.0);
        let rep = spc_report(&c, &quarter(), &r);
        assert!(rep.feasible);
        for id in ConstraintId::ALL {
            let e = rep.entry(id.as_str()).unwrap();
            assert!((e.slack - e.bound).abs() < 1e-15);
        }
    }

    #[test]
    fn spc_report_constructed_violation() {
        let c = reference();
        let f = eval_f(&c, &PowerPartition::ZERO);
        let r = RateVector::new(0.0, f.f01 + 1e-3, 0.0, 0.0);
        let rep = spc_report(&c, &PowerPartition::ZERO, &r);
        assert!(!rep.feasible);
        assert!(rep.slack("f01").unwrap() < 0.0);
    }

    #[test]
    fn spc_report_oracle_point_actives() {
        // Exact maximizer of 3 R1 + 2 R2 + R3 at the uniform quarter
        // partition with R0 = 0.2, frozen from an independent LP solve:
        // the binding set is {f01, g012, g0123}.
        let c = reference();
        let r = RateVector::new(
            0.2,
            1.219_864_012_538_705,
            0.187_346_724_720_705,
            0.626_381_484_247_684,
        );
        let rep = spc_report(&c, &quarter(), &r);
        assert!(rep.feasible);
        let active: Vec<String> = rep
            .entries
            .iter()
            .filter(|e| e.active && ConstraintId::ALL.iter().any(|id| id.as_str() == e.id))
            .map(|e| e.id.clone())
            .collect();
        assert_eq!(active, vec!["f01", "g012", "g0123"]);
    }

    #[test]
    fn redundancy_gap_vanishes_without_second_layers() {
        let c = reference();
        let t = PowerPartition::new(0.3, 0.0, 0.4, 0.0);
        let (gap_a, gap_b) = redundancy_gap(&c, &t);
        assert!(gap_a.abs() < 1e-12);
        assert!(gap_b.abs() < 1e-12);
    }

    #[test]
    fn redundancy_gap_reference_value() {
        // gap_a = 0.5 ln(54/49) at the uniform quarter partition.
        let (gap_a, gap_b) = redundancy_gap(&reference(), &quarter());
        assert!((gap_a - 0.048_581_874_226_823_89).abs() < 1e-14);
        // The reference channel is symmetric, so both gaps agree.
        assert!((gap_a - gap_b).abs() < 1e-14);
    }

    #[test]
    fn grad2_matches_central_differences() {
        let c = validate(ChannelConfig::new(
            7.0,
            13.0,
            [0.6, 1.7, 3.9],
            [1.2, 2.9, 3.4],
        ))
        .unwrap();
        let base = PowerPartition::new(0.21, 0.17, 0.33, 0.12);
        let h = 1e-6;
        for id in ConstraintId::ALL {
            let g = grad2_bound(id, &c, &base);
            for k in 0..4 {
                let mut up = base.as_array();
                let mut dn = base.as_array();
                up[k] += h;
                dn[k] -= h;
                let fd = (bound(id, &c, &PowerPartition::from_array(up))
                    - bound(id, &c, &PowerPartition::from_array(dn)))
                    / h; // central difference of 2*bound
                assert!(
                    (g[k] - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
                    "{id} entry {k}: {} vs {fd}",
                    g[k]
                );
            }
        }
    }

    proptest! {
        #[test]
        fn chains_are_monotone(
            a11 in 0.0..0.5f64, a12 in 0.0..0.5f64,
            a21 in 0.0..0.5f64, a22 in 0.0..0.5f64,
            p1 in 0.5..30.0f64, p2 in 0.5..30.0f64,
            n11 in 0.2..2.0f64, d12 in 0.1..3.0f64, d13 in 0.1..3.0f64,
            n21 in 0.2..2.0f64, d22 in 0.1..3.0f64, d23 in 0.1..3.0f64,
        ) {
            let c = ChannelConfig::new(p1, p2, [n11, n11 + d12, n11 + d12 + d13],
                                       [n21, n21 + d22, n21 + d22 + d23]);
            let a = PowerPartition::new(a11, a12, a21, a22);
            let f = eval_f(&c, &a);
            prop_assert!(f.f0 <= f.f01 + 1e-12);
            prop_assert!(f.f01 <= f.f012 + 1e-12);
            prop_assert!(f.f012 <= f.f0123 + 1e-12);
            let g = eval_g(&c, &a);
            prop_assert!(g.g0 <= g.g02 + 1e-12);
            prop_assert!(g.g02 <= g.g012 + 1e-12);
            prop_assert!(g.g02 <= g.g023 + 1e-12);
            prop_assert!(g.g012 <= g.g0123 + 1e-12);
            prop_assert!(g.g023 <= g.g0123 + 1e-12);
            let h = eval_h(&c, &a);
            prop_assert!(h.h0 <= h.h03 + 1e-12);
            prop_assert!(h.h03 <= h.h023 + 1e-12);
            prop_assert!(h.h023 <= h.h0123 + 1e-12);
        }

        #[test]
        fn redundancy_gaps_positive_with_second_layers(
            a11 in 0.0..0.5f64, a12 in 1e-6..0.5f64,
            a21 in 0.0..0.5f64, a22 in 1e-6..0.5f64,
        ) {
            let c = reference();
            let a = PowerPartition::new(a11, a12, a21, a22);
            let (gap_a, gap_b) = redundancy_gap(&c, &a);
            prop_assert!(gap_a > 0.0);
            prop_assert!(gap_b > 0.0);
        }

        #[test]
        fn rates_are_lipschitz_on_segments(
            a in proptest::array::uniform4(0.0..0.48f64),
            b in proptest::array::uniform4(0.0..0.48f64),
            t in 0.0..1.0f64,
        ) {
            // Continuity probe: bound differences along a segment are
            // controlled by the segment length.
            let c = reference();
            let pa = PowerPartition::from_array(a);
            let pb = PowerPartition::from_array(b);
            let mid = PowerPartition::from_array([
                a[0] + t * (b[0] - a[0]),
                a[1] + t * (b[1] - a[1]),
                a[2] + t * (b[2] - a[2]),
                a[3] + t * (b[3] - a[3]),
            ]);
            let seg: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
            // max |grad2| is bounded by 3 * P/N over this box; use a hard cap.
            let lip = 0.5 * 3.0 * 10.0 / 1.0;
            for id in ConstraintId::ALL {
                let va = bound(id, &c, &pa);
                let vm = bound(id, &c, &mid);
                prop_assert!((va - vm).abs() <= lip * seg + 1e-12,
                    "{id}: |{va} - {vm}| vs {}", lip * seg);
            }
        }

        #[test]
        fn degrading_a_noise_rung_never_raises_dependent_bounds(
            bump in 0.01..0.5f64,
            a in proptest::array::uniform4(0.05..0.4f64),
        ) {
            // Raise the middle rung of ladder 2 (preserving order); every
            // bound with that rung in a denominator position must not grow.
            let base = reference();
            let mut worse = base;
            worse.n2[1] += bump; // still < n2[2] = 4 for bump <= 0.5 from 2.0
            let p = PowerPartition::from_array(a);
            for id in [ConstraintId::G0, ConstraintId::G02, ConstraintId::G012,
                       ConstraintId::G023, ConstraintId::G0123,
                       ConstraintId::F012, ConstraintId::F0123] {
                prop_assert!(bound(id, &worse, &p) <= bound(id, &base, &p) + 1e-12);
            }
        }
    }
}
