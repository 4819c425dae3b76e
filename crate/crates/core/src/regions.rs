//! The five constraint families as first-class objects.
//!
//! `Spc` is the full thirteen-constraint system. `Region1` removes the
//! Z-receiver bound on `R0 + R2 + R3`; `Region2` removes the one on
//! `R0 + R1 + R2`. `Relaxed1`/`Relaxed2` keep the same constraint lists but
//! evaluate each receiver family at its own partition, which is what makes
//! the weighted sum-rate problem convex after the log-domain transform.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{ChannelConfig, PowerPartition, RateVector};
use crate::rates::{
    self, bound, nonneg_entries, partition_entries, rate_entries, ConstraintId, ConstraintReport,
    Family,
};
use crate::{tol, Error, Result};

/// Identifier of a constraint family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionId {
    Spc,
    Region1,
    Region2,
    Relaxed1,
    Relaxed2,
}

const SPC_IDS: [ConstraintId; 13] = ConstraintId::ALL;

const REGION1_IDS: [ConstraintId; 12] = [
    ConstraintId::F0,
    ConstraintId::F01,
    ConstraintId::F012,
    ConstraintId::F0123,
    ConstraintId::G0,
    ConstraintId::G02,
    ConstraintId::G012,
    ConstraintId::G0123,
    ConstraintId::H0,
    ConstraintId::H03,
    ConstraintId::H023,
    ConstraintId::H0123,
];

const REGION2_IDS: [ConstraintId; 12] = [
    ConstraintId::F0,
    ConstraintId::F01,
    ConstraintId::F012,
    ConstraintId::F0123,
    ConstraintId::G0,
    ConstraintId::G02,
    ConstraintId::G023,
    ConstraintId::G0123,
    ConstraintId::H0,
    ConstraintId::H03,
    ConstraintId::H023,
    ConstraintId::H0123,
];

impl RegionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionId::Spc => "spc",
            RegionId::Region1 => "region1",
            RegionId::Region2 => "region2",
            RegionId::Relaxed1 => "relaxed1",
            RegionId::Relaxed2 => "relaxed2",
        }
    }

    /// The rate constraints making up the region.
    pub fn constraint_ids(&self) -> &'static [ConstraintId] {
        match self {
            RegionId::Spc => &SPC_IDS,
            RegionId::Region1 | RegionId::Relaxed1 => &REGION1_IDS,
            RegionId::Region2 | RegionId::Relaxed2 => &REGION2_IDS,
        }
    }

    /// Whether the region evaluates each family at its own partition.
    pub fn is_relaxed(&self) -> bool {
        matches!(self, RegionId::Relaxed1 | RegionId::Relaxed2)
    }

    /// The restricted (shared-partition) counterpart of a relaxed region.
    pub fn restricted(&self) -> RegionId {
        match self {
            RegionId::Relaxed1 => RegionId::Region1,
            RegionId::Relaxed2 => RegionId::Region2,
            other => *other,
        }
    }
}

impl std::fmt::Display for RegionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A point of a relaxed region: one partition per receiver family plus the
/// rate vector. `alpha` feeds the Y-chain, `alpha_p` the Z-chain, and
/// `alpha_pp` the W-chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxedPoint {
    pub alpha: PowerPartition,
    pub alpha_p: PowerPartition,
    pub alpha_pp: PowerPartition,
    pub rates: RateVector,
}

impl RelaxedPoint {
    pub fn synchronized(theta: PowerPartition, rates: RateVector) -> Self {
        RelaxedPoint {
            alpha: theta,
            alpha_p: theta,
            alpha_pp: theta,
            rates,
        }
    }

    pub fn partition_for(&self, family: Family) -> &PowerPartition {
        match family {
            Family::F => &self.alpha,
            Family::G => &self.alpha_p,
            Family::H => &self.alpha_pp,
        }
    }
}

/// A point to test against a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    /// One partition shared by all families.
    Shared {
        theta: PowerPartition,
        rates: RateVector,
    },
    /// Independent partitions per family.
    Relaxed(RelaxedPoint),
}

/// Evaluate every constraint of region `id` at `point`.
///
/// Shared-partition regions accept `Point::Shared`; relaxed regions accept
/// `Point::Relaxed`. Anything else is a shape mismatch.
pub fn feasible(id: RegionId, c: &ChannelConfig, point: &Point) -> Result<ConstraintReport> {
    match (id.is_relaxed(), point) {
        (false, Point::Shared { theta, rates }) => {
            let mut entries = rate_entries(id.constraint_ids(), c, theta, rates);
            entries.extend(nonneg_entries(rates));
            entries.extend(partition_entries("theta", theta));
            Ok(ConstraintReport::from_entries(entries))
        }
        (true, Point::Relaxed(p)) => {
            let mut entries = Vec::new();
            for cid in id.constraint_ids() {
                let part = p.partition_for(cid.family());
                let b = bound(*cid, c, part);
                entries.push(crate::rates::ConstraintEntry {
                    id: cid.as_str().into(),
                    bound: b,
                    sum: cid.rate_sum(&p.rates),
                    slack: b - cid.rate_sum(&p.rates),
                    active: (b - cid.rate_sum(&p.rates)).abs() <= tol::ACTIVITY,
                });
            }
            entries.extend(nonneg_entries(&p.rates));
            entries.extend(partition_entries("alpha", &p.alpha));
            entries.extend(partition_entries("alphap", &p.alpha_p));
            entries.extend(partition_entries("alphapp", &p.alpha_pp));
            Ok(ConstraintReport::from_entries(entries))
        }
        (false, Point::Relaxed(_)) => Err(Error::PointShapeMismatch {
            region: id.as_str(),
            expected: "shared-partition",
        }),
        (true, Point::Shared { .. }) => Err(Error::PointShapeMismatch {
            region: id.as_str(),
            expected: "relaxed",
        }),
    }
}

/// Can `rates` be realized inside `region` with **some** partitions?
///
/// The relaxed families decouple, so each family's best feasibility margin
/// can be searched on its own small partition face; the rates are achievable
/// iff every family admits a nonnegative margin. Used to implement the
/// region-intersection logic at the rate level.
pub fn rates_achievable(
    region: RegionId,
    c: &ChannelConfig,
    rates: &RateVector,
    tol_margin: f64,
) -> bool {
    if !rates.is_nonnegative(tol::FEASIBILITY) {
        return false;
    }
    let ids = region.constraint_ids();
    let f_ids: Vec<ConstraintId> = ids.iter().copied().filter(|i| i.family() == Family::F).collect();
    let g_ids: Vec<ConstraintId> = ids.iter().copied().filter(|i| i.family() == Family::G).collect();
    let h_ids: Vec<ConstraintId> = ids.iter().copied().filter(|i| i.family() == Family::H).collect();

    // For each family the margin is maximized on a two-dimensional face of
    // the partition simplex: the remaining entries only shrink the level-0
    // bound and are best set to zero.
    let margin = |ids: &[ConstraintId], make: &dyn Fn(f64, f64) -> PowerPartition| -> f64 {
        let eval = |u: f64, v: f64| -> f64 {
            let p = make(u, v);
            ids.iter()
                .map(|id| bound(*id, c, &p) - id.rate_sum(rates))
                .fold(f64::INFINITY, f64::min)
        };
        let n = 64;
        let mut best = f64::NEG_INFINITY;
        let mut at = (0.0, 0.0);
        for i in 0..=n {
            let u = i as f64 / n as f64;
            for j in 0..=(n - i) {
                let v = j as f64 / n as f64;
                let m = eval(u, v);
                if m > best {
                    best = m;
                    at = (u, v);
                }
            }
        }
        // Pattern refinement around the best cell down to a fine step.
        let mut step = 1.0 / n as f64;
        while step > 1e-10 {
            let mut moved = false;
            for (du, dv) in [
                (step, 0.0),
                (-step, 0.0),
                (0.0, step),
                (0.0, -step),
                (step, -step),
                (-step, step),
            ] {
                let u = (at.0 + du).clamp(0.0, 1.0);
                let v = (at.1 + dv).clamp(0.0, 1.0 - u);
                let m = eval(u, v);
                if m > best {
                    best = m;
                    at = (u, v);
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best
    };

    let f_margin = margin(&f_ids, &|u, v| PowerPartition::new(0.0, 0.0, u, v));
    if f_margin < -tol_margin {
        return false;
    }
    let g_margin = margin(&g_ids, &|u, v| PowerPartition::new(u, 0.0, v, 0.0));
    if g_margin < -tol_margin {
        return false;
    }
    let h_margin = margin(&h_ids, &|u, v| PowerPartition::new(u, v, 0.0, 0.0));
    h_margin >= -tol_margin
}

/// One sampled counterexample of the intersection identity.
#[derive(Debug, Clone, Serialize)]
pub struct IntersectionCounterexample {
    pub theta: PowerPartition,
    pub rates: RateVector,
    pub in_spc: bool,
    pub in_region1: bool,
    pub in_region2: bool,
}

/// Result of sampling the identity "full region = intersection of the two
/// one-constraint-removed regions" on random points.
#[derive(Debug, Clone, Serialize)]
pub struct IntersectionReport {
    pub samples: usize,
    pub counterexamples: Vec<IntersectionCounterexample>,
}

impl IntersectionReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Sample `(theta, rates)` pairs, feasible and infeasible alike, and check
/// that membership in the full region coincides with joint membership in the
/// two reduced regions at every sample.
pub fn intersection_is_spc(c: &ChannelConfig, samples: usize, seed: u64) -> IntersectionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counterexamples = Vec::new();
    for _ in 0..samples {
        let theta = crate::sample::partition(&mut rng);
        // Rates near the boundary in a random direction: scale a random
        // feasible-ish profile by a factor around one so that roughly half
        // the samples leave the region.
        let scale: f64 = rng.gen_range(0.0..1.6);
        let f = rates::eval_f(c, &theta);
        let g = rates::eval_g(c, &theta);
        let h = rates::eval_h(c, &theta);
        let r0 = rng.gen_range(0.0..f.f0.min(g.g0).min(h.h0).max(1e-6));
        let budget = (f.f0123.min(g.g0123).min(h.h0123) - r0).max(0.0);
        let mut parts = [
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..1.0),
        ];
        let total: f64 = parts.iter().sum();
        parts.iter_mut().for_each(|p| *p *= scale * budget / total);
        let rates = RateVector::new(r0, parts[0], parts[1], parts[2]);

        let point = Point::Shared { theta, rates };
        let in_spc = feasible(RegionId::Spc, c, &point).unwrap().feasible;
        let in_r1 = feasible(RegionId::Region1, c, &point).unwrap().feasible;
        let in_r2 = feasible(RegionId::Region2, c, &point).unwrap().feasible;
        if in_spc != (in_r1 && in_r2) {
            counterexamples.push(IntersectionCounterexample {
                theta,
                rates,
                in_spc,
                in_region1: in_r1,
                in_region2: in_r2,
            });
        }
    }
    IntersectionReport {
        samples,
        counterexamples,
    }
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
    fn zero_point_feasible_everywhere() {
        let c = reference();
        let zero = RateVector::new(0.0, 0.0, 0.0, 0.0);
        let shared = Point::Shared {
            theta: PowerPartition::ZERO,
            rates: zero,
        };
        let relaxed = Point::Relaxed(RelaxedPoint::synchronized(PowerPartition::ZERO, zero));
        for id in [RegionId::Spc, RegionId::Region1, RegionId::Region2] {
            assert!(feasible(id, &c, &shared).unwrap().feasible);
        }
        for id in [RegionId::Relaxed1, RegionId::Relaxed2] {
            assert!(feasible(id, &c, &relaxed).unwrap().feasible);
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let c = reference();
        let zero = RateVector::new(0.0, 0.0, 0.0, 0.0);
        let shared = Point::Shared {
            theta: PowerPartition::ZERO,
            rates: zero,
        };
        assert!(matches!(
            feasible(RegionId::Relaxed1, &c, &shared),
            Err(Error::PointShapeMismatch { .. })
        ));
        let relaxed = Point::Relaxed(RelaxedPoint::synchronized(PowerPartition::ZERO, zero));
        assert!(matches!(
            feasible(RegionId::Spc, &c, &relaxed),
            Err(Error::PointShapeMismatch { .. })
        ));
    }

    #[test]
    fn spc_feasible_implies_reduced_regions() {
        let c = reference();
        let theta = PowerPartition::uniform(0.25);
        let r = RateVector::new(0.2, 0.5, 0.1, 0.2);
        let p = Point::Shared { theta, rates: r };
        assert!(feasible(RegionId::Spc, &c, &p).unwrap().feasible);
        assert!(feasible(RegionId::Region1, &c, &p).unwrap().feasible);
        assert!(feasible(RegionId::Region2, &c, &p).unwrap().feasible);
    }

    #[test]
    fn synchronized_relaxed_point_matches_shared_region1() {
        let c = reference();
        let theta = PowerPartition::uniform(0.2);
        for rates in [
            RateVector::new(0.2, 0.6, 0.2, 0.1),
            RateVector::new(0.2, 2.0, 0.2, 0.1),
            RateVector::new(0.4, 0.9, 0.35, 0.3),
        ] {
            let shared = feasible(RegionId::Region1, &c, &Point::Shared { theta, rates }).unwrap();
            let relaxed = feasible(
                RegionId::Relaxed1,
                &c,
                &Point::Relaxed(RelaxedPoint::synchronized(theta, rates)),
            )
            .unwrap();
            assert_eq!(shared.feasible, relaxed.feasible);
        }
    }

    #[test]
    fn violating_only_g023_separates_the_regions() {
        let c = reference();
        let theta = PowerPartition::uniform(0.25);
        let g = rates::eval_g(&c, &theta);
        // R2 + R3 just above the g023 bound, everything else slack.
        let r0 = 0.05;
        let r = RateVector::new(r0, 0.0, g.g02 - r0 - 0.02, g.g023 - g.g02 + 0.04);
        let p = Point::Shared { theta, rates: r };
        let rep1 = feasible(RegionId::Region1, &c, &p).unwrap();
        let rep2 = feasible(RegionId::Region2, &c, &p).unwrap();
        let spc = feasible(RegionId::Spc, &c, &p).unwrap();
        assert!(rep1.feasible, "min slack {}", rep1.min_slack());
        assert!(!rep2.feasible);
        assert!(!spc.feasible);
    }

    #[test]
    fn violating_only_g012_separates_the_regions() {
        let c = reference();
        let theta = PowerPartition::uniform(0.25);
        let g = rates::eval_g(&c, &theta);
        let r0 = 0.05;
        // R1 + R2 just above the g012 bound; keep f-family slack by putting
        // the excess on R1 (the f01 bound is looser at this partition).
        let r = RateVector::new(r0, g.g012 - g.g02 + 0.04, g.g02 - r0 - 0.02, 0.0);
        let p = Point::Shared { theta, rates: r };
        let rep1 = feasible(RegionId::Region1, &c, &p).unwrap();
        let rep2 = feasible(RegionId::Region2, &c, &p).unwrap();
        let spc = feasible(RegionId::Spc, &c, &p).unwrap();
        assert!(!rep1.feasible);
        assert!(rep2.feasible, "min slack {}", rep2.min_slack());
        assert!(!spc.feasible);
    }

    #[test]
    fn intersection_identity_holds_on_samples() {
        let c = reference();
        let rep = intersection_is_spc(&c, 2000, 17);
        assert!(rep.holds(), "counterexamples: {:?}", rep.counterexamples);
    }

    #[test]
    fn achievable_rates_detected() {
        let c = reference();
        // A comfortably interior point.
        let r = RateVector::new(0.2, 0.5, 0.2, 0.2);
        assert!(rates_achievable(RegionId::Relaxed1, &c, &r, 1e-9));
        // Far outside any bound.
        let r = RateVector::new(0.2, 5.0, 5.0, 5.0);
        assert!(!rates_achievable(RegionId::Relaxed1, &c, &r, 1e-9));
    }
}
