//! Physical channel parameters and the value types shared by every module.
//!
//! The channel is a product of two parallel Gaussian subchannels, each with a
//! three-level noise ladder. The receiver mapping is fixed: on subchannel 1
//! receiver Y sees `N1[0]`, Z sees `N1[1]`, W sees `N1[2]`; on subchannel 2
//! the order reverses (W sees `N2[0]`, Z sees `N2[1]`, Y sees `N2[2]`).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Transmit powers and the two noise-variance ladders.
///
/// All quantities are linear (not dB). Degradedness requires each ladder to
/// increase strictly; several derivations divide by ladder differences, so
/// strictness is enforced exactly, with no tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigJson", into = "ConfigJson")]
pub struct ChannelConfig {
    pub p1: f64,
    pub p2: f64,
    pub n1: [f64; 3],
    pub n2: [f64; 3],
}

/// Wire format: `{"P": [P1, P2], "N1": [..], "N2": [..]}`.
#[derive(Serialize, Deserialize)]
struct ConfigJson {
    #[serde(rename = "P")]
    p: [f64; 2],
    #[serde(rename = "N1")]
    n1: [f64; 3],
    #[serde(rename = "N2")]
    n2: [f64; 3],
}

impl TryFrom<ConfigJson> for ChannelConfig {
    type Error = Error;
    fn try_from(j: ConfigJson) -> Result<Self> {
        let c = ChannelConfig {
            p1: j.p[0],
            p2: j.p[1],
            n1: j.n1,
            n2: j.n2,
        };
        for (name, v) in [("P1", c.p1), ("P2", c.p2)] {
            if !v.is_finite() {
                return Err(Error::NonpositiveParameter { name, value: v });
            }
        }
        for (name, ladder) in [("N1", &c.n1), ("N2", &c.n2)] {
            if ladder.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonpositiveParameter {
                    name,
                    value: f64::NAN,
                });
            }
        }
        Ok(c)
    }
}

impl From<ChannelConfig> for ConfigJson {
    fn from(c: ChannelConfig) -> Self {
        ConfigJson {
            p: [c.p1, c.p2],
            n1: c.n1,
            n2: c.n2,
        }
    }
}

impl ChannelConfig {
    pub fn new(p1: f64, p2: f64, n1: [f64; 3], n2: [f64; 3]) -> Self {
        ChannelConfig { p1, p2, n1, n2 }
    }

    /// Transmit power on subchannel `i` (1-based).
    pub fn power(&self, i: usize) -> f64 {
        match i {
            1 => self.p1,
            2 => self.p2,
            _ => panic!("subchannel index must be 1 or 2"),
        }
    }

    /// Noise variance at degradation level `j` (1-based) on subchannel `i`.
    pub fn noise(&self, i: usize, j: usize) -> f64 {
        let ladder = match i {
            1 => &self.n1,
            2 => &self.n2,
            _ => panic!("subchannel index must be 1 or 2"),
        };
        ladder[j - 1]
    }

    /// Swap the roles of the two subchannels.
    ///
    /// Reverses the Y/W receiver roles, which maps the first removed-constraint
    /// region onto the second.
    pub fn mirrored(&self) -> Self {
        ChannelConfig {
            p1: self.p2,
            p2: self.p1,
            n1: self.n2,
            n2: self.n1,
        }
    }
}

/// Validate powers, positivity, and strict degradedness of both ladders.
pub fn validate(config: ChannelConfig) -> Result<ChannelConfig> {
    for (name, v) in [("P1", config.p1), ("P2", config.p2)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonpositiveParameter { name, value: v });
        }
    }
    for (i, ladder) in [(1usize, &config.n1), (2, &config.n2)] {
        for (j, &v) in ladder.iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonpositiveParameter {
                    name: if i == 1 { "N1" } else { "N2" },
                    value: v,
                });
            }
            if j > 0 && !(ladder[j - 1] < v) {
                return Err(Error::DegradednessViolation { i, j });
            }
        }
    }
    Ok(config)
}

/// Fractions of each subchannel's power assigned to the first two
/// superposition layers. The third fraction is implicit:
/// `1 - (first + second)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerPartition {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl PowerPartition {
    pub const ZERO: PowerPartition = PowerPartition {
        a11: 0.0,
        a12: 0.0,
        a21: 0.0,
        a22: 0.0,
    };

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        PowerPartition { a11, a12, a21, a22 }
    }

    pub fn uniform(v: f64) -> Self {
        PowerPartition::new(v, v, v, v)
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        PowerPartition::new(a[0], a[1], a[2], a[3])
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    /// Layer-1 + layer-2 fraction on subchannel `i` (1-based).
    pub fn sum(&self, i: usize) -> f64 {
        match i {
            1 => self.a11 + self.a12,
            2 => self.a21 + self.a22,
            _ => panic!("subchannel index must be 1 or 2"),
        }
    }

    /// Entry `(i, l)`, both 1-based.
    pub fn entry(&self, i: usize, l: usize) -> f64 {
        match (i, l) {
            (1, 1) => self.a11,
            (1, 2) => self.a12,
            (2, 1) => self.a21,
            (2, 2) => self.a22,
            _ => panic!("partition entry index out of range"),
        }
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let a = self.as_array();
        a.iter().all(|v| v.is_finite() && *v >= -tol)
            && self.sum(1) <= 1.0 + tol
            && self.sum(2) <= 1.0 + tol
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.is_valid(tol) {
            Ok(())
        } else {
            let a = self.as_array();
            let names = ["a11", "a12", "a21", "a22"];
            for (name, v) in names.iter().zip(a) {
                if !(v.is_finite() && v >= -tol) {
                    return Err(Error::DomainViolation {
                        name: (*name).into(),
                        value: v,
                    });
                }
            }
            let i = if self.sum(1) > 1.0 + tol { 1 } else { 2 };
            Err(Error::DomainViolation {
                name: format!("a{i}1 + a{i}2"),
                value: self.sum(i),
            })
        }
    }
}

/// The implicit third fraction on subchannel `i`: `1 - (first + second)`.
pub fn alpha3(p: &PowerPartition, i: usize) -> f64 {
    1.0 - p.sum(i)
}

/// Information rates in nats per channel use; `r0` is the common rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateVector {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl RateVector {
    pub fn new(r0: f64, r1: f64, r2: f64, r3: f64) -> Self {
        RateVector { r0, r1, r2, r3 }
    }

    pub fn particular(&self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        [self.r0, self.r1, self.r2, self.r3]
            .iter()
            .all(|v| v.is_finite() && *v >= -tol)
    }
}

/// Nonnegative weights on the three particular rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl WeightVector {
    pub fn new(w1: f64, w2: f64, w3: f64) -> Self {
        WeightVector { w1, w2, w3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w1, self.w2, self.w3]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidWeights("entries must be finite and >= 0"));
        }
        if w.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidWeights("at least one entry must be > 0"));
        }
        Ok(())
    }

    /// Scale so the entries sum to one. The maximizing rate vector is
    /// unchanged under positive scaling of the weights.
    pub fn normalized(&self) -> Self {
        let s = self.w1 + self.w2 + self.w3;
        WeightVector::new(self.w1 / s, self.w2 / s, self.w3 / s)
    }

    pub fn dot(&self, r: &RateVector) -> f64 {
        self.w1 * r.r1 + self.w2 * r.r2 + self.w3 * r.r3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_accepts_strict_ladders() {
        let c = ChannelConfig::new(10.0, 10.0, [1.0, 2.0, 4.0], [1.0, 2.0, 4.0]);
        assert_eq!(validate(c).unwrap(), c);
    }

    #[test]
    fn validate_rejects_equal_rungs() {
        let c = ChannelConfig::new(10.0, 10.0, [2.0, 2.0, 4.0], [1.0, 2.0, 4.0]);
        assert_eq!(
            validate(c).unwrap_err(),
            Error::DegradednessViolation { i: 1, j: 1 }
        );
    }

    #[test]
    fn validate_rejects_decreasing_ladder() {
        let c = ChannelConfig::new(10.0, 10.0, [1.0, 2.0, 4.0], [4.0, 2.0, 1.0]);
        assert_eq!(
            validate(c).unwrap_err(),
            Error::DegradednessViolation { i: 2, j: 1 }
        );
    }

    #[test]
    fn validate_rejects_nonpositive_power() {
        let c = ChannelConfig::new(0.0, 10.0, [1.0, 2.0, 4.0], [1.0, 2.0, 4.0]);
        assert!(matches!(
            validate(c).unwrap_err(),
            Error::NonpositiveParameter { name: "P1", .. }
        ));
    }

    #[test]
    fn validate_is_idempotent() {
        let c = ChannelConfig::new(3.0, 7.0, [0.5, 0.9, 2.0], [0.2, 1.1, 1.2]);
        let once = validate(c).unwrap();
        assert_eq!(validate(once).unwrap(), once);
    }

    #[test]
    fn alpha3_examples() {
        assert_eq!(alpha3(&PowerPartition::ZERO, 1), 1.0);
        assert_eq!(alpha3(&PowerPartition::new(0.5, 0.5, 0.0, 0.0), 1), 0.0);
        let p = PowerPartition::new(0.25, 0.25, 0.1, 0.2);
        assert!((alpha3(&p, 2) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"P": [10.0, 10.0], "N1": [1.0, 2.0, 4.0], "N2": [1.0, 2.0, 4.0]}"#;
        let c: ChannelConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.p1, 10.0);
        assert_eq!(c.n2, [1.0, 2.0, 4.0]);
        let back = serde_json::to_string(&c).unwrap();
        let again: ChannelConfig = serde_json::from_str(&back).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn config_json_rejects_nonfinite() {
        let text = r#"{"P": [10.0, 1e999], "N1": [1.0, 2.0, 4.0], "N2": [1.0, 2.0, 4.0]}"#;
        assert!(serde_json::from_str::<ChannelConfig>(text).is_err());
    }

    #[test]
    fn mirrored_swaps_subchannels() {
        let c = ChannelConfig::new(3.0, 7.0, [0.5, 0.9, 2.0], [0.2, 1.1, 1.2]);
        let m = c.mirrored();
        assert_eq!(m.p1, 7.0);
        assert_eq!(m.n1, [0.2, 1.1, 1.2]);
        assert_eq!(m.mirrored(), c);
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::new(0.0, 0.0, 0.0).validate().is_err());
        assert!(WeightVector::new(1.0, -0.1, 0.0).validate().is_err());
        assert!(WeightVector::new(3.0, 2.0, 1.0).validate().is_ok());
        let n = WeightVector::new(3.0, 2.0, 1.0).normalized();
        assert!((n.w1 + n.w2 + n.w3 - 1.0).abs() < 1e-15);
    }
}
