//! JSON descriptions of measures, statistics and whole experiments, and the
//! `a+bi` complex syntax used on the command line.

use crate::error::{Error, Result};
use crate::linstat::{Eta, ScaledStatistic};
use crate::measures::{CircleMeasure, VerblunskySequence};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

/// Parse `a`, `bi`, `a+bi`, `a-bi` (also `i`, `-i`, exponents such as
/// `1e-3-2.5e2i`). Both parts must be finite.
pub fn parse_complex(text: &str) -> Result<C64> {
    let s = text.trim();
    let err = || Error::Parse(format!("cannot read {text:?} as a complex number"));
    if s.is_empty() || !s.is_ascii() {
        return Err(err());
    }
    let finite = |v: f64| if v.is_finite() { Ok(v) } else { Err(err()) };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(finite(real_literal(s).ok_or_else(err)?)?, 0.0));
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (real_literal(&body[..k]).ok_or_else(err)?, imaginary_literal(&body[k..]).ok_or_else(err)?),
        None => (0.0, imaginary_literal(body).ok_or_else(err)?),
    };
    Ok(C64::new(finite(re)?, finite(im)?))
}

/// Decimal literal; rejects the `inf`/`nan` spellings `f64::from_str` allows.
fn real_literal(s: &str) -> Option<f64> {
    if s.is_empty() || s.bytes().any(|b| b.is_ascii_alphabetic() && b != b'e' && b != b'E') {
        return None;
    }
    s.parse().ok()
}

/// Coefficient of `i`; a bare sign stands for one.
fn imaginary_literal(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => real_literal(s),
    }
}

/// Complex number as `{"re": .., "im": ..}` on output; on input also a
/// plain number or an `a+bi` string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Complex(pub C64);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReIm {
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexRepr {
    Parts(ReIm),
    Real(f64),
    Text(String),
}

impl Serialize for Complex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ReIm { re: self.0.re, im: self.0.im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Complex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let z = match ComplexRepr::deserialize(d)? {
            ComplexRepr::Parts(p) => C64::new(p.re, p.im),
            ComplexRepr::Real(x) => C64::new(x, 0.0),
            ComplexRepr::Text(t) => parse_complex(&t).map_err(serde::de::Error::custom)?,
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(serde::de::Error::custom("complex parts must be finite"));
        }
        Ok(Complex(z))
    }
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Complex(z)
    }
}

/// Catalog entry, e.g. `{"kind":"geronimus","alpha":0.5}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    Cue,
    Geronimus { alpha: f64 },
    BernsteinSzego { r: f64 },
    SingleMoment,
    InsertedMassPoint { mass: f64, angle: f64 },
    HuaPickrell { delta: f64 },
    /// `α_k = base_k + c·(k+1)^{−β}`.
    Perturbed { base: Box<MeasureSpec>, c: Complex, beta: f64 },
    ExplicitList { alphas: Vec<Complex> },
}

impl MeasureSpec {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("measure: {e}")))
    }

    pub fn sequence(&self) -> Result<VerblunskySequence> {
        Ok(match self {
            MeasureSpec::Cue => VerblunskySequence::cue(),
            MeasureSpec::Geronimus { alpha } => VerblunskySequence::geronimus(*alpha)?,
            MeasureSpec::BernsteinSzego { r } => VerblunskySequence::bernstein_szego(*r)?,
            MeasureSpec::SingleMoment => VerblunskySequence::single_moment(),
            MeasureSpec::InsertedMassPoint { mass, angle } => VerblunskySequence::inserted_mass_point(*mass, *angle)?,
            MeasureSpec::HuaPickrell { delta } => VerblunskySequence::hua_pickrell(*delta)?,
            MeasureSpec::Perturbed { base, c, beta } => VerblunskySequence::perturbed(base.sequence()?, c.0, *beta)?,
            MeasureSpec::ExplicitList { alphas } => {
                let alphas: Vec<C64> = alphas.iter().map(|a| a.0).collect();
                if let Some((index, a)) = alphas.iter().enumerate().find(|(_, a)| !(a.norm() < 1.0)) {
                    return Err(Error::OutOfDisk { index, modulus: a.norm() });
                }
                VerblunskySequence::explicit(alphas)
            }
        })
    }

    /// The catalog measure; coefficient-only kinds have none.
    pub fn measure(&self) -> Result<CircleMeasure> {
        CircleMeasure::for_sequence(&self.sequence()?)
    }
}

/// Test function, e.g. `{"kind":"poisson","eta":{"re":1,"im":0.5}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StatisticSpec {
    Poisson { eta: Complex },
    RationalImag { poles: Vec<Complex>, coeffs: Vec<f64> },
}

impl StatisticSpec {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("statistic: {e}")))
    }

    pub fn build(&self, gamma: f64, theta0: f64, n: usize) -> Result<ScaledStatistic> {
        match self {
            StatisticSpec::Poisson { eta } => ScaledStatistic::poisson(Eta::Constant(eta.0), gamma, theta0, n),
            StatisticSpec::RationalImag { poles, coeffs } => {
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("rational statistic coefficients must be finite"));
                }
                ScaledStatistic::rational_imag(poles.iter().map(|p| p.0).collect(), coeffs.clone(), gamma, theta0, n)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// One measure against the limiting variance.
    Clt,
    /// Two measures against each other.
    Universality,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Convergence threshold of the truncation buffer doubling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_buffer: Option<usize>,
    /// Sampler envelope cells per chart.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_orders() -> usize {
    4
}

/// Everything needed to rerun an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub measure: MeasureSpec,
    /// Second measure for universality sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<MeasureSpec>,
    pub statistic: StatisticSpec,
    pub n_grid: Vec<usize>,
    pub gamma: f64,
    #[serde(default)]
    pub theta0: f64,
    #[serde(default = "default_orders")]
    pub orders: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub samples: usize,
    #[serde(default)]
    pub mode: Option<SweepMode>,
    #[serde(default)]
    pub outputs: OutputPaths,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn parse(json: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(json).map_err(|e| Error::Parse(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.n_grid.is_empty() {
            return Err(Error::invalid("n-grid is empty"));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::invalid("n-grid entries must be positive"));
        }
        if !self.n_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("n-grid must be strictly increasing"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::invalid(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !self.theta0.is_finite() {
            return Err(Error::invalid("theta0 must be finite"));
        }
        if self.orders == 0 || self.orders > crate::cumulants::MAX_TRACE_ORDER {
            return Err(Error::Unsupported(format!("orders must lie in 1..=6, got {}", self.orders)));
        }
        if self.mode == Some(SweepMode::Universality) && self.reference.is_none() {
            return Err(Error::invalid("universality mode needs a reference measure"));
        }
        if let Some(t) = self.tolerances.truncation {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid("truncation tolerance must be positive"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("configs always serialize");
        hex::encode(Sha256::digest(compact.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_syntax() {
        let cases = [
            ("1+0i", C64::new(1.0, 0.0)),
            ("1", C64::new(1.0, 0.0)),
            ("-2.5i", C64::new(0.0, -2.5)),
            ("i", C64::new(0.0, 1.0)),
            ("-i", C64::new(0.0, -1.0)),
            ("0.5-i", C64::new(0.5, -1.0)),
            ("1e-3+2E2i", C64::new(1e-3, 200.0)),
            ("-1e+2-1e-2i", C64::new(-100.0, -0.01)),
        ];
        for (text, z) in cases {
            assert_eq!(parse_complex(text).unwrap(), z, "{text}");
        }
        for bad in ["", "i+", "1+", "nan", "inf", "1+nani", "++1i", "1i2", "1+2i3i", "e", "∞"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn measure_json_round_trip() {
        let m = MeasureSpec::parse(r#"{"kind":"perturbed","base":{"kind":"geronimus","alpha":0.4},"c":"0.3","beta":0.8}"#)
            .unwrap();
        let again = MeasureSpec::parse(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, again);
        assert!(MeasureSpec::parse(r#"{"kind":"geronimus","alpha":0.4,"extra":1}"#).is_err());
        assert!(MeasureSpec::parse(r#"{"kind":"explicit-list","alphas":[{"re":1.5,"im":0}]}"#).unwrap().sequence().is_err());
    }
}
