//! Log-domain convex form of the relaxed weighted sum-rate problem.
//!
//! Exponentiating the rates and shifting each partition variable by a
//! noise-ladder constant turns every constraint into a posynomial; taking
//! logs then yields a convex program in the rates and twelve log-variables.
//! Each family's variables carry their own shifts:
//!
//! * Y-family (`alpha`): `T11 = a11 P1 + N11/2`, `T12 = a12 P1 + N11/2`,
//!   `T21 = a21 P2 + N21`, `T22 = (a21 + a22) P2 + N22`;
//! * Z-family (`alpha'`): `T'i1 = b_i1 P_i + N_i1`,
//!   `T'i2 = b_i2 P_i + (N_i2 - N_i1)`;
//! * W-family (`alpha''`): mirrors the Y-family with the subchannels swapped.
//!
//! Degradedness makes every additive shift strictly positive, so all
//! exponential sums stay positive and the log-domain constraint functions are
//! sums of `log(shift + e^x)` and two-term log-sum-exp pieces, hence convex.
//! The within-family shifts are chosen so each constraint matches the
//! original bound term for term; the partition round trip pins this down.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::channel::{ChannelConfig, PowerPartition, RateVector, WeightVector};
use crate::rates::{r0_max, ConstraintId};
use crate::regions::RegionId;
use crate::{Error, Result};

/// Number of log-domain partition variables.
pub const NX: usize = 12;
/// Number of optimization variables: three rates plus the twelve logs.
pub const NZ: usize = 15;

// Indices into the X block.
pub const X11: usize = 0;
pub const X12: usize = 1;
pub const X21: usize = 2;
pub const X22: usize = 3;
pub const XP11: usize = 4;
pub const XP12: usize = 5;
pub const XP21: usize = 6;
pub const XP22: usize = 7;
pub const XQ11: usize = 8;
pub const XQ12: usize = 9;
pub const XQ21: usize = 10;
pub const XQ22: usize = 11;

/// Free variables of the log-domain problem: the three particular rates and
/// the twelve log-transformed partition variables. The common rate is fixed
/// problem data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDomainPoint {
    pub r: [f64; 3],
    pub x: [f64; NX],
}

impl LogDomainPoint {
    pub fn as_vec(&self) -> [f64; NZ] {
        let mut z = [0.0; NZ];
        z[..3].copy_from_slice(&self.r);
        z[3..].copy_from_slice(&self.x);
        z
    }

    pub fn from_slice(z: &[f64]) -> Self {
        let mut p = LogDomainPoint {
            r: [0.0; 3],
            x: [0.0; NX],
        };
        p.r.copy_from_slice(&z[..3]);
        p.x.copy_from_slice(&z[3..NZ]);
        p
    }
}

/// One additive piece of a log-domain constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Term {
    /// `ln(shift + e^{x_j})`, `shift >= 0`.
    LogShiftExp { j: usize, shift: f64 },
    /// `ln(e^{x_j1} + e^{x_j2})`.
    Lse2 { j1: usize, j2: usize },
    /// `coef * x_j`.
    Lin { j: usize, coef: f64 },
}

impl Term {
    fn value(&self, x: &[f64; NX]) -> f64 {
        match *self {
            Term::LogShiftExp { j, shift } => lse2(x[j], shift.ln()),
            Term::Lse2 { j1, j2 } => lse2(x[j1], x[j2]),
            Term::Lin { j, coef } => coef * x[j],
        }
    }

    fn add_grad(&self, x: &[f64; NX], out: &mut [f64; NZ]) {
        match *self {
            Term::LogShiftExp { j, shift } => {
                let v = lse2(x[j], shift.ln());
                out[3 + j] += (x[j] - v).exp();
            }
            Term::Lse2 { j1, j2 } => {
                let v = lse2(x[j1], x[j2]);
                out[3 + j1] += (x[j1] - v).exp();
                out[3 + j2] += (x[j2] - v).exp();
            }
            Term::Lin { j, coef } => out[3 + j] += coef,
        }
    }

    fn add_hessian(&self, x: &[f64; NX], wt: f64, h: &mut DMatrix<f64>) {
        match *self {
            Term::LogShiftExp { j, shift } => {
                let v = lse2(x[j], shift.ln());
                let s = (x[j] - v).exp();
                h[(3 + j, 3 + j)] += wt * s * (1.0 - s);
            }
            Term::Lse2 { j1, j2 } => {
                let v = lse2(x[j1], x[j2]);
                let p1 = (x[j1] - v).exp();
                let p2 = (x[j2] - v).exp();
                h[(3 + j1, 3 + j1)] += wt * p1 * (1.0 - p1);
                h[(3 + j2, 3 + j2)] += wt * p2 * (1.0 - p2);
                h[(3 + j1, 3 + j2)] -= wt * p1 * p2;
                h[(3 + j2, 3 + j1)] -= wt * p1 * p2;
            }
            Term::Lin { .. } => {}
        }
    }
}

/// Two-argument log-sum-exp with max shift.
#[inline]
fn lse2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Partition group of a domain constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Group {
    Alpha,
    AlphaP,
    AlphaPp,
}

impl Group {
    fn label(&self) -> &'static str {
        match self {
            Group::Alpha => "alpha",
            Group::AlphaP => "alphap",
            Group::AlphaPp => "alphapp",
        }
    }
}

/// Identifier of a log-domain constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum GpConId {
    /// One of the rate bounds.
    Rate(ConstraintId),
    /// Layer fractions on subchannel `i` of `group` sum to at most one.
    SumBound { group: Group, i: usize },
    /// Entry `(i, l)` of `group` is nonnegative.
    EntryBound { group: Group, i: usize, l: usize },
    /// `R_k >= 0`.
    RateNonneg(usize),
}

impl std::fmt::Display for GpConId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GpConId::Rate(id) => f.write_str(id.as_str()),
            GpConId::SumBound { group, i } => write!(f, "{}{}_sum", group.label(), i),
            GpConId::EntryBound { group, i, l } => write!(f, "{}{}{}_lb", group.label(), i, l),
            GpConId::RateNonneg(k) => write!(f, "r{k}_nonneg"),
        }
    }
}

/// One convex constraint `value(point) <= 0`.
#[derive(Debug, Clone)]
pub struct GpConstraint {
    pub id: GpConId,
    pub rate_coef: [f64; 3],
    pub constant: f64,
    pub terms: Vec<Term>,
}

impl GpConstraint {
    pub fn value(&self, p: &LogDomainPoint) -> f64 {
        let mut v = self.constant;
        for k in 0..3 {
            v += self.rate_coef[k] * p.r[k];
        }
        for t in &self.terms {
            v += t.value(&p.x);
        }
        v
    }

    pub fn grad(&self, p: &LogDomainPoint) -> [f64; NZ] {
        let mut g = [0.0; NZ];
        g[..3].copy_from_slice(&self.rate_coef);
        for t in &self.terms {
            t.add_grad(&p.x, &mut g);
        }
        g
    }

    /// Accumulate `wt * hessian(self)` into `h`.
    pub fn add_hessian(&self, p: &LogDomainPoint, wt: f64, h: &mut DMatrix<f64>) {
        for t in &self.terms {
            t.add_hessian(&p.x, wt, h);
        }
    }
}

/// The convex log-domain problem for fixed channel data, common rate, and
/// weights: maximize `w . (R1, R2, R3)` subject to the listed constraints.
#[derive(Debug, Clone)]
pub struct ConvexProblem {
    pub config: ChannelConfig,
    pub r0: f64,
    pub weights: WeightVector,
    pub region: RegionId,
    pub constraints: Vec<GpConstraint>,
}

impl ConvexProblem {
    pub fn objective(&self, p: &LogDomainPoint) -> f64 {
        self.weights.w1 * p.r[0] + self.weights.w2 * p.r[1] + self.weights.w3 * p.r[2]
    }

    pub fn rate_constraint_count(&self) -> usize {
        self.constraints
            .iter()
            .filter(|c| matches!(c.id, GpConId::Rate(_)))
            .count()
    }

    /// Largest constraint value (positive means infeasible).
    pub fn max_violation(&self, p: &LogDomainPoint) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.value(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Result of a full problem evaluation at one point.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub objective: f64,
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; NZ]>,
}

/// Evaluate objective, every constraint residual, and every analytic
/// gradient at `p`.
pub fn eval(problem: &ConvexProblem, p: &LogDomainPoint) -> Evaluation {
    let values = problem.constraints.iter().map(|c| c.value(p)).collect();
    let gradients = problem.constraints.iter().map(|c| c.grad(p)).collect();
    Evaluation {
        objective: problem.objective(p),
        values,
        gradients,
    }
}

/// Build the log-domain problem for one of the two relaxed regions.
pub fn build_problem_for(
    c: &ChannelConfig,
    r0: f64,
    w: &WeightVector,
    region: RegionId,
) -> Result<ConvexProblem> {
    if !region.is_relaxed() {
        return Err(Error::PointShapeMismatch {
            region: region.as_str(),
            expected: "relaxed",
        });
    }
    w.validate()?;
    let cap = r0_max(c);
    if !(0.0..=cap + 1e-12).contains(&r0) {
        return Err(Error::R0OutOfRange { r0, r0_max: cap });
    }

    let [n11, n12, n13] = c.n1;
    let [n21, n22, n23] = c.n2;
    let (p1, p2) = (c.p1, c.p2);
    let two_r0 = 2.0 * r0;
    let mut cons: Vec<GpConstraint> = Vec::with_capacity(33);
    let mut rate = |id: ConstraintId, coef: [f64; 3], constant: f64, terms: Vec<Term>| {
        cons.push(GpConstraint {
            id: GpConId::Rate(id),
            rate_coef: coef,
            constant: two_r0 + constant,
            terms,
        });
    };

    // Y-family bounds on the alpha group.
    let f01_const = -(n11 + p1).ln() + n11.ln() - (n23 + p2).ln();
    rate(
        ConstraintId::F0,
        [0.0; 3],
        -(n11 + p1).ln() - (n23 + p2).ln(),
        vec![
            Term::Lse2 { j1: X11, j2: X12 },
            Term::LogShiftExp {
                j: X22,
                shift: n23 - n22,
            },
        ],
    );
    rate(
        ConstraintId::F01,
        [2.0, 0.0, 0.0],
        f01_const,
        vec![Term::LogShiftExp {
            j: X22,
            shift: n23 - n22,
        }],
    );
    rate(
        ConstraintId::F012,
        [2.0, 2.0, 0.0],
        f01_const,
        vec![
            Term::LogShiftExp {
                j: X22,
                shift: n23 - n22,
            },
            Term::Lin { j: X22, coef: -1.0 },
            Term::LogShiftExp {
                j: X21,
                shift: n22 - n21,
            },
        ],
    );
    rate(
        ConstraintId::F0123,
        [2.0, 2.0, 2.0],
        f01_const + n21.ln(),
        vec![
            Term::LogShiftExp {
                j: X22,
                shift: n23 - n22,
            },
            Term::Lin { j: X22, coef: -1.0 },
            Term::LogShiftExp {
                j: X21,
                shift: n22 - n21,
            },
            Term::Lin { j: X21, coef: -1.0 },
        ],
    );

    // Z-family bounds on the alpha' group.
    let g_const = -(n12 + p1).ln() - (n22 + p2).ln();
    rate(
        ConstraintId::G0,
        [0.0; 3],
        g_const,
        vec![
            Term::Lse2 { j1: XP11, j2: XP12 },
            Term::Lse2 { j1: XP21, j2: XP22 },
        ],
    );
    let g02_terms = || {
        vec![
            Term::LogShiftExp {
                j: XP11,
                shift: n12 - n11,
            },
            Term::LogShiftExp {
                j: XP21,
                shift: n22 - n21,
            },
        ]
    };
    rate(ConstraintId::G02, [0.0, 2.0, 0.0], g_const, g02_terms());
    match region {
        RegionId::Relaxed1 => {
            let mut t = g02_terms();
            t.push(Term::Lin { j: XP11, coef: -1.0 });
            rate(ConstraintId::G012, [2.0, 2.0, 0.0], g_const + n11.ln(), t);
        }
        _ => {
            let mut t = g02_terms();
            t.push(Term::Lin { j: XP21, coef: -1.0 });
            rate(ConstraintId::G023, [0.0, 2.0, 2.0], g_const + n21.ln(), t);
        }
    }
    let mut g0123_terms = g02_terms();
    g0123_terms.push(Term::Lin { j: XP11, coef: -1.0 });
    g0123_terms.push(Term::Lin { j: XP21, coef: -1.0 });
    rate(
        ConstraintId::G0123,
        [2.0, 2.0, 2.0],
        g_const + n11.ln() + n21.ln(),
        g0123_terms,
    );

    // W-family bounds on the alpha'' group.
    let h_const = -(n13 + p1).ln() - (n21 + p2).ln();
    rate(
        ConstraintId::H0,
        [0.0; 3],
        h_const,
        vec![
            Term::LogShiftExp {
                j: XQ12,
                shift: n13 - n12,
            },
            Term::Lse2 { j1: XQ21, j2: XQ22 },
        ],
    );
    rate(
        ConstraintId::H03,
        [0.0, 0.0, 2.0],
        h_const + n21.ln(),
        vec![Term::LogShiftExp {
            j: XQ12,
            shift: n13 - n12,
        }],
    );
    rate(
        ConstraintId::H023,
        [0.0, 2.0, 2.0],
        h_const + n21.ln(),
        vec![
            Term::LogShiftExp {
                j: XQ12,
                shift: n13 - n12,
            },
            Term::Lin { j: XQ12, coef: -1.0 },
            Term::LogShiftExp {
                j: XQ11,
                shift: n12 - n11,
            },
        ],
    );
    rate(
        ConstraintId::H0123,
        [2.0, 2.0, 2.0],
        h_const + n21.ln() + n11.ln(),
        vec![
            Term::LogShiftExp {
                j: XQ12,
                shift: n13 - n12,
            },
            Term::Lin { j: XQ12, coef: -1.0 },
            Term::LogShiftExp {
                j: XQ11,
                shift: n12 - n11,
            },
            Term::Lin { j: XQ11, coef: -1.0 },
        ],
    );

    // Domain constraints: simplex sums and entry lower bounds per group,
    // written directly on the log variables.
    let mut dom = |id: GpConId, constant: f64, terms: Vec<Term>| {
        cons.push(GpConstraint {
            id,
            rate_coef: [0.0; 3],
            constant,
            terms,
        });
    };
    dom(
        GpConId::SumBound {
            group: Group::Alpha,
            i: 1,
        },
        -(p1 + n11).ln(),
        vec![Term::Lse2 { j1: X11, j2: X12 }],
    );
    dom(
        GpConId::SumBound {
            group: Group::Alpha,
            i: 2,
        },
        -(p2 + n22).ln(),
        vec![Term::Lin { j: X22, coef: 1.0 }],
    );
    dom(
        GpConId::EntryBound {
            group: Group::Alpha,
            i: 1,
            l: 1,
        },
        (n11 / 2.0).ln(),
        vec![Term::Lin { j: X11, coef: -1.0 }],
    );
    dom(
        GpConId::EntryBound {
            group: Group::Alpha,
            i: 1,
            l: 2,
        },
        (n11 / 2.0).ln(),
        vec![Term::Lin { j: X12, coef: -1.0 }],
    );
    dom(
        GpConId::EntryBound {
            group: Group::Alpha,
            i: 2,
            l: 1,
        },
        n21.ln(),
        vec![Term::Lin { j: X21, coef: -1.0 }],
    );
    dom(
        GpConId::EntryBound {
            group: Group::Alpha,
            i: 2,
            l: 2,
        },
        0.0,
        vec![
            Term::LogShiftExp {
                j: X21,
                shift: n22 - n21,
            },
            Term::Lin { j: X22, coef: -1.0 },
        ],
    );
    dom(
        GpConId::SumBound {
            group: Group::AlphaP,
            i: 1,
        },
        -(p1 + n12).ln(),
        vec![Term::Lse2 { j1: XP11, j2: XP12 }],
    );
    dom(
        GpConId::SumBound {
            group: Group::AlphaP,
            i: 2,
        },
        -(p2 + n22).ln(),
        vec![Term::Lse2 { j1: XP21, j2: XP22 }],
    );
    for (l, j, lb) in [
        (1, XP11, n11),
        (2, XP12, n12 - n11),
    ] {
        dom(
            GpConId::EntryBound {
                group: Group::AlphaP,
                i: 1,
                l,
            },
            lb.ln(),
            vec![Term::Lin { j, coef: -1.0 }],
        );
    }
    for (l, j, lb) in [
        (1, XP21, n21),
        (2, XP22, n22 - n21),
    ] {
        dom(
            GpConId::EntryBound {
                group: Group::AlphaP,
                i: 2,
                l,
            },
            lb.ln(),
            vec![Term::Lin { j, coef: -1.0 }],
        );
    }
    dom(
        GpConId::SumBound {
            group: Group::AlphaPp,
            i: 1,
        },
        -(p1 + n12).ln(),
        vec![Term::Lin { j: XQ12, coef: 1.0 }],
    );
    dom(
        GpConId::SumBound {
            group: Group::AlphaPp,
            i: 2,
        },
        -(p2 + n21).ln(),
        vec![Term::Lse2 { j1: XQ21, j2: XQ22 }],
    );
    dom(
        GpConId::EntryBound {
            group: Group::AlphaPp,
            i: 1,
            l: 1,
        },
        n11.ln(),
        vec![Term::Lin { j: XQ11, coef: -1.0 }],
    );
    dom(
        GpConId::EntryBound {
            group: Group::AlphaPp,
            i: 1,
            l: 2,
        },
        0.0,
        vec![
            Term::LogShiftExp {
                j: XQ11,
                shift: n12 - n11,
            },
            Term::Lin { j: XQ12, coef: -1.0 },
        ],
    );
    dom(
        GpConId::EntryBound {
            group: Group::AlphaPp,
            i: 2,
            l: 1,
        },
        (n21 / 2.0).ln(),
        vec![Term::Lin { j: XQ21, coef: -1.0 }],
    );
    dom(
        GpConId::EntryBound {
            group: Group::AlphaPp,
            i: 2,
            l: 2,
        },
        (n21 / 2.0).ln(),
        vec![Term::Lin { j: XQ22, coef: -1.0 }],
    );

    // Rate nonnegativity.
    for k in 0..3 {
        let mut coef = [0.0; 3];
        coef[k] = -1.0;
        cons.push(GpConstraint {
            id: GpConId::RateNonneg(k + 1),
            rate_coef: coef,
            constant: 0.0,
            terms: vec![],
        });
    }

    Ok(ConvexProblem {
        config: *c,
        r0,
        weights: *w,
        region,
        constraints: cons,
    })
}

/// Build the log-domain problem for the first relaxed region.
pub fn build_problem(c: &ChannelConfig, r0: f64, w: &WeightVector) -> Result<ConvexProblem> {
    build_problem_for(c, r0, w, RegionId::Relaxed1)
}

/// Shifted power variables `T` for the three partitions.
pub fn forward_transform(
    c: &ChannelConfig,
    a: &PowerPartition,
    ap: &PowerPartition,
    app: &PowerPartition,
) -> [f64; NX] {
    let [n11, n12, _] = c.n1;
    let [n21, n22, _] = c.n2;
    [
        a.a11 * c.p1 + n11 / 2.0,
        a.a12 * c.p1 + n11 / 2.0,
        a.a21 * c.p2 + n21,
        (a.a21 + a.a22) * c.p2 + n22,
        ap.a11 * c.p1 + n11,
        ap.a12 * c.p1 + (n12 - n11),
        ap.a21 * c.p2 + n21,
        ap.a22 * c.p2 + (n22 - n21),
        app.a11 * c.p1 + n11,
        (app.a11 + app.a12) * c.p1 + n12,
        app.a21 * c.p2 + n21 / 2.0,
        app.a22 * c.p2 + n21 / 2.0,
    ]
}

/// Full log-domain point from partitions and rates.
pub fn to_log_point(
    c: &ChannelConfig,
    a: &PowerPartition,
    ap: &PowerPartition,
    app: &PowerPartition,
    rates: &RateVector,
) -> LogDomainPoint {
    let t = forward_transform(c, a, ap, app);
    let mut x = [0.0; NX];
    for (xi, ti) in x.iter_mut().zip(t) {
        *xi = ti.ln();
    }
    LogDomainPoint {
        r: [rates.r1, rates.r2, rates.r3],
        x,
    }
}

/// Invert the change of variables back to the three partitions.
pub fn to_partitions(
    p: &LogDomainPoint,
    c: &ChannelConfig,
) -> Result<(PowerPartition, PowerPartition, PowerPartition)> {
    let [n11, n12, _] = c.n1;
    let [n21, n22, _] = c.n2;
    let t: Vec<f64> = p.x.iter().map(|x| x.exp()).collect();
    let fractions = [
        ("a11", (t[X11] - n11 / 2.0) / c.p1),
        ("a12", (t[X12] - n11 / 2.0) / c.p1),
        ("a21", (t[X21] - n21) / c.p2),
        ("a22", (t[X22] - t[X21] + n21 - n22) / c.p2),
        ("ap11", (t[XP11] - n11) / c.p1),
        ("ap12", (t[XP12] - (n12 - n11)) / c.p1),
        ("ap21", (t[XP21] - n21) / c.p2),
        ("ap22", (t[XP22] - (n22 - n21)) / c.p2),
        ("app11", (t[XQ11] - n11) / c.p1),
        ("app12", (t[XQ12] - t[XQ11] + n11 - n12) / c.p1),
        ("app21", (t[XQ21] - n21 / 2.0) / c.p2),
        ("app22", (t[XQ22] - n21 / 2.0) / c.p2),
    ];
    let tol = 1e-8;
    for (name, v) in &fractions {
        if !(*v >= -tol && *v <= 1.0 + tol) {
            return Err(Error::DomainViolation {
                name: (*name).into(),
                value: *v,
            });
        }
    }
    let v: Vec<f64> = fractions.iter().map(|(_, v)| *v).collect();
    Ok((
        PowerPartition::new(v[0], v[1], v[2], v[3]),
        PowerPartition::new(v[4], v[5], v[6], v[7]),
        PowerPartition::new(v[8], v[9], v[10], v[11]),
    ))
}

/// Jacobian of the map from `(R1, R2, R3, alpha, alpha', alpha'')` to the
/// log-domain variables, evaluated at strictly interior partitions.
///
/// Block diagonal: identity on the rates, then one lower-triangular block per
/// partition group with strictly positive diagonal, hence nonsingular.
pub fn jacobian(
    c: &ChannelConfig,
    a: &PowerPartition,
    ap: &PowerPartition,
    app: &PowerPartition,
) -> Result<DMatrix<f64>> {
    for (label, p) in [("alpha", a), ("alphap", ap), ("alphapp", app)] {
        let arr = p.as_array();
        if arr.iter().any(|v| *v <= 0.0) || p.sum(1) >= 1.0 || p.sum(2) >= 1.0 {
            return Err(Error::SingularAtBoundary(format!(
                "{label} = {arr:?} is not strictly interior"
            )));
        }
    }
    let t = forward_transform(c, a, ap, app);
    let mut j = DMatrix::zeros(NZ, NZ);
    for k in 0..3 {
        j[(k, k)] = 1.0;
    }
    // Column layout mirrors the row layout: a11 a12 a21 a22, then the primed
    // and double-primed groups.
    let col = |group: usize, entry: usize| 3 + 4 * group + entry;
    j[(3 + X11, col(0, 0))] = c.p1 / t[X11];
    j[(3 + X12, col(0, 1))] = c.p1 / t[X12];
    j[(3 + X21, col(0, 2))] = c.p2 / t[X21];
    j[(3 + X22, col(0, 2))] = c.p2 / t[X22];
    j[(3 + X22, col(0, 3))] = c.p2 / t[X22];
    j[(3 + XP11, col(1, 0))] = c.p1 / t[XP11];
    j[(3 + XP12, col(1, 1))] = c.p1 / t[XP12];
    j[(3 + XP21, col(1, 2))] = c.p2 / t[XP21];
    j[(3 + XP22, col(1, 3))] = c.p2 / t[XP22];
    j[(3 + XQ11, col(2, 0))] = c.p1 / t[XQ11];
    j[(3 + XQ12, col(2, 0))] = c.p1 / t[XQ12];
    j[(3 + XQ12, col(2, 1))] = c.p1 / t[XQ12];
    j[(3 + XQ21, col(2, 2))] = c.p2 / t[XQ21];
    j[(3 + XQ22, col(2, 3))] = c.p2 / t[XQ22];
    debug_assert!(j.iter().all(|v| v.is_finite()));
    Ok(j)
}
