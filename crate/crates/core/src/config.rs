//! Run configuration: the structured-text document driving builds. Unknown
//! fields are errors so a typo in a weighting knob cannot pass silently.

use std::fmt;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::network::Architecture;
use crate::sampling::{ArchitecturePool, ParamDistribution};
use crate::selection::ExponentVariant;

/// Inverse temperature: a non-negative real, or `+inf` for the
/// zero-temperature limit (written `"inf"` in config and artifact files).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beta(f64);

impl Beta {
    pub const INFINITE: Beta = Beta(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::Parameter(format!(
                "beta must be >= 0 or \"inf\", got {value}"
            )));
        }
        Ok(Beta(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BetaVisitor;
        impl Visitor<'_> for BetaVisitor {
            type Value = Beta;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Beta, E> {
                Beta::new(v).map_err(|e| E::custom(e.to_string()))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Beta, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Beta, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Beta, E> {
                match v {
                    "inf" => Ok(Beta::INFINITE),
                    other => Err(E::custom(format!(
                        "beta string must be \"inf\", got {other:?}"
                    ))),
                }
            }
        }
        d.deserialize_any(BetaVisitor)
    }
}

/// How members are selected and weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Rejection sampling: keep only zero-error networks, weight uniformly.
    ZeroError,
    /// Gibbs weighting by error count over one prior ensemble.
    Gibbs,
    /// Gibbs weighting by error count plus architecture complexity over a
    /// mixed-architecture pool.
    MixedArch,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::ZeroError => "zero_error",
            Mode::Gibbs => "gibbs",
            Mode::MixedArch => "mixed_arch",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolEntryConfig {
    pub architecture: Architecture,
    /// Complexity k; defaults to the architecture's neuron count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolConfig {
    pub entries: Vec<PoolEntryConfig>,
    /// Selection probabilities; defaults to uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_weights: Option<Vec<f64>>,
}

fn default_max_attempts() -> u64 {
    10_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub n: u64,
    pub beta: Beta,
    pub distribution: ParamDistribution,
    pub pool: PoolConfig,
    pub master_seed: u64,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u64,
    #[serde(default)]
    pub exponent_variant: ExponentVariant,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::Config("max_attempts must be at least 1".into()));
        }
        self.distribution
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.build_pool()?;
        Ok(())
    }

    /// Materialize the architecture pool, applying k defaults.
    pub fn build_pool(&self) -> Result<ArchitecturePool> {
        let entries = self
            .pool
            .entries
            .iter()
            .map(|e| (e.architecture.clone(), e.k))
            .collect();
        ArchitecturePool::new(entries, self.pool.selection_weights.clone())
            .map_err(|e| Error::Config(e.to_string()))
    }
}
