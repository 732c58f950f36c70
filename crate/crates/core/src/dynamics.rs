//! Coupled network dynamics of the form `dx_i/dt = f(x_i) + Σ_j A_ij g(x_i, x_j)`.
//!
//! Three families are provided:
//!
//! | family      | self term `f(x)`               | interaction `g(x_i, x_j)`        |
//! |-------------|--------------------------------|----------------------------------|
//! | ecological  | `B + x(1 - x/K)(x/C - 1)`      | `x_i x_j / (D + E x_i + H x_j)`  |
//! | regulatory  | `-B x^f`                       | `R x_j^h / (x_j^h + 1)`          |
//! | epidemic    | `-B x`                         | `R (1 - x_i) x_j`                |
//!
//! The ecological family has an Allee threshold at `C` and is bistable; the
//! regulatory and epidemic families have an absorbing state at `x = 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("invalid {family} parameters: {reason}")]
    InvalidParams { family: Family, reason: String },
    #[error("{family} dynamics has no parameter {name:?}")]
    UnknownParam { family: Family, name: String },
    #[error("perturbation r={r} for {name} exceeds the allowed magnitude {limit}")]
    PerturbationTooLarge { name: String, r: f64, limit: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown dynamics family {0:?}")]
    UnknownFamily(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ecological,
    Regulatory,
    Epidemic,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Ecological, Family::Regulatory, Family::Epidemic];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ecological => "ecological",
            Family::Regulatory => "regulatory",
            Family::Epidemic => "epidemic",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = DynamicsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ecological" | "eco" => Ok(Family::Ecological),
            "regulatory" | "gene" => Ok(Family::Regulatory),
            "epidemic" | "sis" => Ok(Family::Epidemic),
            _ => Err(DynamicsError::UnknownFamily(s.to_string())),
        }
    }
}

/// Mutualistic species abundance with migration and an Allee effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EcologicalParams {
    /// Incoming migration rate.
    #[serde(rename = "B")]
    pub b: f64,
    /// Carrying capacity.
    #[serde(rename = "K")]
    pub k: f64,
    /// Allee threshold.
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

impl Default for EcologicalParams {
    fn default() -> Self {
        Self { b: 0.1, k: 5.0, c: 1.0, d: 5.0, e: 0.9, h: 0.1 }
    }
}

/// Gene expression with Hill-type activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegulatoryParams {
    /// Degradation rate.
    #[serde(rename = "B")]
    pub b: f64,
    /// Degradation exponent.
    #[serde(rename = "f")]
    pub f_exp: f64,
    /// Activation strength.
    #[serde(rename = "R")]
    pub r: f64,
    /// Hill coefficient.
    #[serde(rename = "h")]
    pub hill: f64,
}

impl Default for RegulatoryParams {
    fn default() -> Self {
        Self { b: 1.0, f_exp: 1.0, r: 1.0, hill: 2.0 }
    }
}

/// SIS epidemic spreading; `x_i` is the infection probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpidemicParams {
    /// Recovery rate.
    #[serde(rename = "B")]
    pub b: f64,
    /// Transmission rate.
    #[serde(rename = "R")]
    pub r: f64,
}

impl Default for EpidemicParams {
    fn default() -> Self {
        Self { b: 1.0, r: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DynamicsModel {
    Ecological(EcologicalParams),
    Regulatory(RegulatoryParams),
    Epidemic(EpidemicParams),
}

/// States below this are treated as the absorbing zero state of the
/// regulatory and epidemic families.
pub const EXTINCTION_TOL: f64 = 1e-6;

static CLAMPED_STATES: AtomicU64 = AtomicU64::new(0);

/// Number of negative states clamped to zero before a fractional power,
/// process-wide.
pub fn clamped_state_count() -> u64 {
    CLAMPED_STATES.load(Ordering::Relaxed)
}

#[inline]
fn nonneg(x: f64) -> f64 {
    if x < 0.0 {
        CLAMPED_STATES.fetch_add(1, Ordering::Relaxed);
        0.0
    } else {
        x
    }
}

#[inline]
fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 2.0 {
        x * x
    } else {
        x.powf(e)
    }
}

fn finite_positive(family: Family, pairs: &[(&str, f64)]) -> Result<(), DynamicsError> {
    for &(name, v) in pairs {
        if !v.is_finite() || v <= 0.0 {
            return Err(DynamicsError::InvalidParams {
                family,
                reason: format!("{name} must be finite and positive, got {v}"),
            });
        }
    }
    Ok(())
}

impl DynamicsModel {
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Ecological => DynamicsModel::Ecological(EcologicalParams::default()),
            Family::Regulatory => DynamicsModel::Regulatory(RegulatoryParams::default()),
            Family::Epidemic => DynamicsModel::Epidemic(EpidemicParams::default()),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            DynamicsModel::Ecological(_) => Family::Ecological,
            DynamicsModel::Regulatory(_) => Family::Regulatory,
            DynamicsModel::Epidemic(_) => Family::Epidemic,
        }
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let family = self.family();
        finite_positive(family, &self.params())?;
        if let DynamicsModel::Ecological(p) = self {
            if p.k <= p.c {
                return Err(DynamicsError::InvalidParams {
                    family,
                    reason: format!("need K > C, got K={} C={}", p.k, p.c),
                });
            }
        }
        Ok(())
    }

    /// Parameter names and values in a fixed order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            DynamicsModel::Ecological(p) => vec![
                ("B", p.b),
                ("K", p.k),
                ("C", p.c),
                ("D", p.d),
                ("E", p.e),
                ("H", p.h),
            ],
            DynamicsModel::Regulatory(p) => {
                vec![("B", p.b), ("f", p.f_exp), ("R", p.r), ("h", p.hill)]
            }
            DynamicsModel::Epidemic(p) => vec![("B", p.b), ("R", p.r)],
        }
    }

    fn param_mut(&mut self, name: &str) -> Option<&mut f64> {
        match self {
            DynamicsModel::Ecological(p) => match name {
                "B" => Some(&mut p.b),
                "K" => Some(&mut p.k),
                "C" => Some(&mut p.c),
                "D" => Some(&mut p.d),
                "E" => Some(&mut p.e),
                "H" => Some(&mut p.h),
                _ => None,
            },
            DynamicsModel::Regulatory(p) => match name {
                "B" => Some(&mut p.b),
                "f" => Some(&mut p.f_exp),
                "R" => Some(&mut p.r),
                "h" => Some(&mut p.hill),
                _ => None,
            },
            DynamicsModel::Epidemic(p) => match name {
                "B" => Some(&mut p.b),
                "R" => Some(&mut p.r),
                _ => None,
            },
        }
    }

    /// Overrides one parameter, validating the result.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self, DynamicsError> {
        let mut out = *self;
        let family = self.family();
        *out.param_mut(name).ok_or_else(|| DynamicsError::UnknownParam {
            family,
            name: name.to_string(),
        })? = value;
        out.validate()?;
        Ok(out)
    }

    /// Multiplies each named parameter `p` by `1 + r`.
    ///
    /// `|r|` may not exceed `limit`, and the perturbed model must still satisfy
    /// its family's invariants.
    pub fn perturb(&self, factors: &[(&str, f64)], limit: f64) -> Result<Self, DynamicsError> {
        let mut out = *self;
        let family = self.family();
        for &(name, r) in factors {
            if !(r.abs() <= limit) {
                return Err(DynamicsError::PerturbationTooLarge {
                    name: name.to_string(),
                    r,
                    limit,
                });
            }
            let p = out.param_mut(name).ok_or_else(|| DynamicsError::UnknownParam {
                family,
                name: name.to_string(),
            })?;
            *p *= 1.0 + r;
        }
        out.validate()?;
        Ok(out)
    }

    /// Self-dynamics `f(x)`. Negative states are clamped to zero before a
    /// fractional power is taken.
    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        match *self {
            DynamicsModel::Ecological(p) => p.b + x * (1.0 - x / p.k) * (x / p.c - 1.0),
            DynamicsModel::Regulatory(p) => -p.b * pow(nonneg(x), p.f_exp),
            DynamicsModel::Epidemic(p) => -p.b * x,
        }
    }

    /// Interaction `g(x_i, x_j)`: the effect of neighbor state `xj` on `xi`.
    #[inline]
    pub fn g(&self, xi: f64, xj: f64) -> f64 {
        match *self {
            DynamicsModel::Ecological(p) => xi * xj / (p.d + p.e * xi + p.h * xj),
            DynamicsModel::Regulatory(p) => {
                let a = pow(nonneg(xj), p.hill);
                p.r * a / (a + 1.0)
            }
            DynamicsModel::Epidemic(p) => p.r * (1.0 - xi) * xj,
        }
    }

    /// Checked `f`: rejects non-finite input and negative input to a
    /// non-integer power.
    pub fn f_eval(&self, x: f64) -> Result<f64, DynamicsError> {
        if !x.is_finite() {
            return Err(DynamicsError::Domain(format!("non-finite state {x}")));
        }
        if let DynamicsModel::Regulatory(p) = self {
            if x < 0.0 {
                if p.f_exp.fract() != 0.0 {
                    return Err(DynamicsError::Domain(format!(
                        "negative state {x} raised to non-integer power {}",
                        p.f_exp
                    )));
                }
                return Ok(-p.b * x.powi(p.f_exp as i32));
            }
        }
        Ok(self.f(x))
    }

    /// Checked `g`: both states must be finite and nonnegative.
    pub fn g_eval(&self, xi: f64, xj: f64) -> Result<f64, DynamicsError> {
        if !xi.is_finite() || !xj.is_finite() || xi < 0.0 || xj < 0.0 {
            return Err(DynamicsError::Domain(format!(
                "interaction needs finite nonnegative states, got ({xi}, {xj})"
            )));
        }
        if let DynamicsModel::Ecological(p) = self {
            let den = p.d + p.e * xi + p.h * xj;
            if den <= 0.0 {
                return Err(DynamicsError::Domain(format!(
                    "ecological interaction denominator {den} <= 0"
                )));
            }
        }
        Ok(self.g(xi, xj))
    }

    /// Whether `x` sits at the family's absorbing zero state, i.e. the state
    /// of a vertex with no effective neighbors.
    pub fn is_extinct(&self, x: f64) -> bool {
        match self {
            DynamicsModel::Ecological(_) => false,
            DynamicsModel::Regulatory(_) | DynamicsModel::Epidemic(_) => x <= EXTINCTION_TOL,
        }
    }

    /// Initial state for ground-truth simulation: the high-abundance basin for
    /// the ecological family, `1` for regulatory and `0.5` for epidemic.
    pub fn default_initial_state(&self) -> f64 {
        match *self {
            DynamicsModel::Ecological(p) => p.k + 1.0,
            DynamicsModel::Regulatory(_) => 1.0,
            DynamicsModel::Epidemic(_) => 0.5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn epi() -> DynamicsModel {
        DynamicsModel::default_for(Family::Epidemic)
    }
    fn reg() -> DynamicsModel {
        DynamicsModel::default_for(Family::Regulatory)
    }
    fn eco() -> DynamicsModel {
        DynamicsModel::default_for(Family::Ecological)
    }

    #[test]
    fn f_examples() {
        assert_eq!(epi().f_eval(0.75).unwrap(), -0.75);
        assert_eq!(reg().f_eval(2.0).unwrap(), -2.0);
        assert!((eco().f_eval(0.0).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn g_examples() {
        assert_eq!(epi().g_eval(0.75, 0.75).unwrap(), 0.1875);
        assert!((reg().g_eval(0.3, 2.0).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(eco().g_eval(0.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        let frac = reg().with_param("f", 0.5).unwrap();
        assert!(matches!(frac.f_eval(-1.0), Err(DynamicsError::Domain(_))));
        // Integer exponent is fine below zero.
        assert_eq!(reg().f_eval(-2.0).unwrap(), 2.0);
        assert!(epi().g_eval(-0.1, 0.5).is_err());
        assert!(epi().f_eval(f64::NAN).is_err());
    }

    #[test]
    fn perturbation() {
        assert_eq!(epi().perturb(&[("B", 0.0)], 0.5).unwrap(), epi());
        let h = eco().perturb(&[("H", 0.5)], 0.5).unwrap();
        match h {
            DynamicsModel::Ecological(p) => {
                assert!((p.h - 0.15).abs() < 1e-15);
                assert_eq!(p.b, 0.1);
            }
            _ => unreachable!(),
        }
        let c = eco().perturb(&[("C", -0.5)], 0.5).unwrap();
        assert_eq!(c.params()[2], ("C", 0.5));
        assert!(matches!(
            eco().perturb(&[("C", 0.6)], 0.5),
            Err(DynamicsError::PerturbationTooLarge { .. })
        ));
        // K=5, C=5.5 violates K > C even within a permissive limit.
        assert!(matches!(
            eco().perturb(&[("C", 4.5)], 10.0),
            Err(DynamicsError::InvalidParams { .. })
        ));
        assert!(matches!(
            epi().perturb(&[("H", 0.1)], 0.5),
            Err(DynamicsError::UnknownParam { .. })
        ));
    }

    #[test]
    fn serde_uses_family_tag_and_symbol_names() {
        let m: DynamicsModel = serde_json::from_str(r#"{"family":"epidemic","B":2.0}"#).unwrap();
        assert_eq!(m, DynamicsModel::Epidemic(EpidemicParams { b: 2.0, r: 1.0 }));
        let back = serde_json::to_string(&reg()).unwrap();
        assert!(back.contains(r#""family":"regulatory""#) && back.contains(r#""h":2.0"#));
        assert!(serde_json::from_str::<DynamicsModel>(r#"{"family":"epidemic","Q":1}"#).is_err());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("Epidemic".parse::<Family>().unwrap(), Family::Epidemic);
        assert!("chemistry".parse::<Family>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn epidemic_saturates_at_full_infection(xj in 0.0f64..10.0) {
                prop_assert_eq!(epi().g(1.0, xj), 0.0);
            }

            #[test]
            fn regulatory_interaction_ignores_receiver(a in 0.0f64..10.0, b in 0.0f64..10.0, xj in 0.0f64..10.0) {
                prop_assert_eq!(reg().g(a, xj), reg().g(b, xj));
            }

            #[test]
            fn ecological_interaction_nonneg_and_monotone(xi in 0.0f64..20.0, xj in 0.0f64..20.0, dx in 0.0f64..5.0) {
                let m = eco();
                prop_assert!(m.g(xi, xj) >= 0.0);
                prop_assert!(m.g(xi, xj + dx) >= m.g(xi, xj));
            }

            #[test]
            fn evaluations_are_pure(x in 0.0f64..10.0, y in 0.0f64..10.0) {
                for m in [eco(), reg(), epi()] {
                    prop_assert_eq!(m.f(x).to_bits(), m.f(x).to_bits());
                    prop_assert_eq!(m.g(x, y).to_bits(), m.g(x, y).to_bits());
                }
            }
        }
    }
}
