//! Random network generation with deterministic seeded substreams.
//!
//! Every sample index owns an independent substream derived from
//! `(master_seed, sample_index)` by a counter-based construction, so a batch
//! is reproducible for any worker count and any evaluation order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Architecture, NetworkParams, NeuronParams};

/// Identifies one substream: sample `sample_index` of the run seeded by
/// `master_seed`. The substream is a pure function of both fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub sample_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, sample_index: u64) -> Self {
        SeedSpec {
            master_seed,
            sample_index,
        }
    }
}

// Domain tags keep draws for different purposes decorrelated even when they
// share a (master_seed, sample_index) pair.
pub(crate) const STREAM_PARAMS: u64 = 0x7061_7261;
pub(crate) const STREAM_ARCH: u64 = 0x6172_6368;
pub(crate) const STREAM_SHUFFLE: u64 = 0x7368_7566;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based generator: output i is `mix64(key + (i+1)*GOLDEN)`, the
/// splitmix64 stream keyed by a hash of (master_seed, sample_index, domain).
#[derive(Debug, Clone)]
pub(crate) struct SubstreamRng {
    key: u64,
    counter: u64,
}

impl SubstreamRng {
    pub(crate) fn new(seed: SeedSpec, domain: u64) -> Self {
        let a = mix64(seed.master_seed.wrapping_add(GOLDEN));
        let b = mix64(
            seed.sample_index
                .wrapping_mul(GOLDEN)
                .wrapping_add(mix64(domain)),
        );
        SubstreamRng {
            key: mix64(a ^ b.rotate_left(32)),
            counter: 0,
        }
    }

    #[inline]
    pub(crate) fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in [0,1) with 53 random bits.
    #[inline]
    pub(crate) fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    #[inline]
    pub(crate) fn next_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0,1], keeps ln finite
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform index in [0, n) by 128-bit fixed-point multiply.
    #[inline]
    pub(crate) fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

/// The shared law of every weight and threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamDistribution {
    Normal { mean: f64, stddev: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Uniform over a finite value set; the measure the exact-enumeration
    /// oracle shares with the sampler.
    Grid { values: Vec<f64> },
}

impl ParamDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            ParamDistribution::Normal { mean, stddev } => {
                if !mean.is_finite() || !stddev.is_finite() || *stddev <= 0.0 {
                    return Err(Error::Parameter(format!(
                        "normal distribution requires finite mean and stddev > 0, got ({mean}, {stddev})"
                    )));
                }
            }
            ParamDistribution::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return Err(Error::Parameter(format!(
                        "uniform distribution requires lo < hi, got ({lo}, {hi})"
                    )));
                }
            }
            ParamDistribution::Grid { values } => {
                if values.is_empty() {
                    return Err(Error::Parameter("grid distribution needs at least one value".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parameter("grid values must be finite".into()));
                }
                for (i, v) in values.iter().enumerate() {
                    if values[..i].contains(v) {
                        return Err(Error::Parameter(format!("grid value {v} appears twice")));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn draw(&self, rng: &mut SubstreamRng) -> f64 {
        match self {
            ParamDistribution::Normal { mean, stddev } => mean + stddev * rng.next_normal(),
            ParamDistribution::Uniform { lo, hi } => lo + (hi - lo) * rng.next_f64(),
            ParamDistribution::Grid { values } => values[rng.next_index(values.len())],
        }
    }

    /// Grid support, if this is a grid distribution.
    pub fn grid_values(&self) -> Option<&[f64]> {
        match self {
            ParamDistribution::Grid { values } => Some(values),
            _ => None,
        }
    }
}

/// One architecture in a pool together with its complexity penalty k.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub architecture: Architecture,
    pub complexity: f64,
}

/// A finite family of architectures with selection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchitecturePool {
    entries: Vec<PoolEntry>,
    selection_weights: Vec<f64>,
}

impl ArchitecturePool {
    /// `selection_weights = None` selects uniformly. Complexity defaults to
    /// the architecture's neuron count when `None` is given per entry.
    pub fn new(
        entries: Vec<(Architecture, Option<f64>)>,
        selection_weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Parameter("architecture pool must be non-empty".into()));
        }
        let mut built = Vec::with_capacity(entries.len());
        for (arch, k) in entries {
            arch.validate()?;
            let complexity = k.unwrap_or(arch.neuron_count() as f64);
            if !complexity.is_finite() || complexity < 0.0 {
                return Err(Error::Parameter(format!(
                    "complexity for architecture {:?} must be finite and >= 0, got {complexity}",
                    arch.id
                )));
            }
            if built.iter().any(|e: &PoolEntry| e.architecture.id == arch.id) {
                return Err(Error::Parameter(format!(
                    "duplicate architecture id {:?} in pool",
                    arch.id
                )));
            }
            built.push(PoolEntry {
                architecture: arch,
                complexity,
            });
        }
        let dim = built[0].architecture.input_dim;
        if built.iter().any(|e| e.architecture.input_dim != dim) {
            return Err(Error::Dimension(
                "all pool architectures must share one input dimension".into(),
            ));
        }
        let weights = match selection_weights {
            Some(w) => {
                if w.len() != built.len() {
                    return Err(Error::Parameter(format!(
                        "{} selection weights for {} pool entries",
                        w.len(),
                        built.len()
                    )));
                }
                if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::Parameter("selection weights must be finite and >= 0".into()));
                }
                let sum: f64 = w.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::Parameter(format!(
                        "selection weights sum to {sum}, expected 1 within 1e-12"
                    )));
                }
                w
            }
            None => vec![1.0 / built.len() as f64; built.len()],
        };
        Ok(ArchitecturePool {
            entries: built,
            selection_weights: weights,
        })
    }

    pub fn single(arch: Architecture, complexity: Option<f64>) -> Result<Self> {
        ArchitecturePool::new(vec![(arch, complexity)], None)
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn selection_weights(&self) -> &[f64] {
        &self.selection_weights
    }

    pub fn input_dim(&self) -> usize {
        self.entries[0].architecture.input_dim
    }

    pub fn entry_by_id(&self, id: &str) -> Option<&PoolEntry> {
        self.entries.iter().find(|e| e.architecture.id == id)
    }

    pub(crate) fn pick(&self, rng: &mut SubstreamRng) -> usize {
        let u = rng.next_f64();
        let mut acc = 0.0;
        for (i, w) in self.selection_weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.entries.len() - 1
    }
}

/// Draw every weight and threshold i.i.d. from `dist` using the substream
/// for `seed`. Neurons are filled layer-major, weights before threshold.
pub fn sample_params(
    arch: &Architecture,
    dist: &ParamDistribution,
    seed: SeedSpec,
) -> NetworkParams {
    let mut rng = SubstreamRng::new(seed, STREAM_PARAMS);
    sample_params_with(arch, dist, &mut rng)
}

pub(crate) fn sample_params_with(
    arch: &Architecture,
    dist: &ParamDistribution,
    rng: &mut SubstreamRng,
) -> NetworkParams {
    let mut neurons = Vec::with_capacity(arch.neuron_count());
    for (fan_in, width) in arch.fan_ins() {
        for _ in 0..width {
            let weights = (0..fan_in).map(|_| dist.draw(rng)).collect();
            let threshold = dist.draw(rng);
            neurons.push(NeuronParams { weights, threshold });
        }
    }
    NetworkParams {
        architecture_id: arch.id.clone(),
        neurons,
    }
}

/// Select a pool entry with the pool's selection probabilities;
/// deterministic in `seed`.
pub fn sample_architecture(pool: &ArchitecturePool, seed: SeedSpec) -> &Architecture {
    let mut rng = SubstreamRng::new(seed, STREAM_ARCH);
    &pool.entries[pool.pick(&mut rng)].architecture
}
