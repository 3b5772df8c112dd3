//! Scoring sampled networks on the training set and weighting them under a
//! Gibbs measure. The energy of a member is its error count m, plus the
//! architecture complexity k(c) in mixed-architecture mode.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::TrainingSet;
use crate::error::{Error, Result};
use crate::network::{eval_network_unchecked, Architecture, EvalScratch, NetworkParams};
use crate::sampling::{
    sample_params_with, ArchitecturePool, ParamDistribution, SeedSpec, SubstreamRng, STREAM_ARCH,
    STREAM_PARAMS,
};

/// How architecture complexity enters the member weight exponent.
/// `ScaledComplexity` uses exp(-beta * (m + k)); `FixedComplexity` uses
/// exp(-beta * m - k), leaving the complexity term temperature-independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentVariant {
    #[default]
    ScaledComplexity,
    FixedComplexity,
}

/// One sampled network with its training-set score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredNetwork {
    pub params: NetworkParams,
    /// Error count m on the training set.
    pub errors: u32,
    /// Complexity k(c) included in the energy; 0 outside mixed mode.
    pub complexity: f64,
    /// m + complexity.
    pub energy: f64,
    pub sample_index: u64,
}

impl ScoredNetwork {
    pub fn architecture_id(&self) -> &str {
        &self.params.architecture_id
    }
}

/// Decision rule applied to a network output in [0,1]: class 1 iff v >= 0.5.
/// Identity on hard outputs; the tie goes to 1, consistent with step(0) = 1.
#[inline]
pub fn classify(value: f64) -> u8 {
    u8::from(value >= 0.5)
}

/// Number of training points misclassified by the network.
pub fn error_count(params: &NetworkParams, arch: &Architecture, ts: &TrainingSet) -> Result<u32> {
    if ts.input_dim() != arch.input_dim {
        return Err(Error::Dimension(format!(
            "training set dimension {} does not match architecture {:?} input {}",
            ts.input_dim(),
            arch.id,
            arch.input_dim
        )));
    }
    params.validate_against(arch)?;
    let mut scratch = EvalScratch::for_arch(arch);
    Ok(error_count_unchecked(params, arch, ts, &mut scratch))
}

pub(crate) fn error_count_unchecked(
    params: &NetworkParams,
    arch: &Architecture,
    ts: &TrainingSet,
    scratch: &mut EvalScratch,
) -> u32 {
    let mut m = 0;
    for p in ts.points() {
        let v = eval_network_unchecked(params, arch, &p.x, scratch);
        if classify(v) != p.label {
            m += 1;
        }
    }
    m
}

/// Sample (architecture, params) for one index and score it. This is the
/// shared path of `score_batch` and the rejection sampler, so a rejection
/// run over the same seed sees exactly the members a scored batch sees.
fn sample_scored(
    pool: &ArchitecturePool,
    dist: &ParamDistribution,
    ts: &TrainingSet,
    master_seed: u64,
    index: u64,
    apply_complexity: bool,
    scratch: &mut Option<EvalScratch>,
) -> ScoredNetwork {
    let seed = SeedSpec::new(master_seed, index);
    let entry = {
        let mut rng = SubstreamRng::new(seed, STREAM_ARCH);
        &pool.entries()[pool.pick(&mut rng)]
    };
    let mut rng = SubstreamRng::new(seed, STREAM_PARAMS);
    let params = sample_params_with(&entry.architecture, dist, &mut rng);
    let mut sc = scratch
        .take()
        .unwrap_or_else(|| EvalScratch::for_arch(&entry.architecture));
    let errors = error_count_unchecked(&params, &entry.architecture, ts, &mut sc);
    *scratch = Some(sc);
    let complexity = if apply_complexity { entry.complexity } else { 0.0 };
    ScoredNetwork {
        params,
        errors,
        complexity,
        energy: errors as f64 + complexity,
        sample_index: index,
    }
}

/// Score the sample indices in `range`: one network per index, deterministic
/// in the master seed and independent of worker count.
pub fn score_batch(
    range: std::ops::Range<u64>,
    pool: &ArchitecturePool,
    dist: &ParamDistribution,
    ts: &TrainingSet,
    master_seed: u64,
    apply_complexity: bool,
) -> Result<Vec<ScoredNetwork>> {
    dist.validate()?;
    if pool.input_dim() != ts.input_dim() {
        return Err(Error::Dimension(format!(
            "training set dimension {} does not match pool input dimension {}",
            ts.input_dim(),
            pool.input_dim()
        )));
    }
    Ok(range
        .into_par_iter()
        .map_init(
            || None,
            |scratch, index| {
                sample_scored(pool, dist, ts, master_seed, index, apply_complexity, scratch)
            },
        )
        .collect())
}

/// Result of rejection sampling: the accepted members plus the attempt
/// accounting behind the acceptance rate.
#[derive(Debug, Clone)]
pub struct Acceptance {
    pub members: Vec<ScoredNetwork>,
    pub accepted: u64,
    pub attempted: u64,
}

impl Acceptance {
    pub fn rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.accepted as f64 / self.attempted as f64
        }
    }
}

const REJECTION_CHUNK: u64 = 4096;

/// Draw from the prior ensemble and keep zero-error networks until
/// `target_count` are collected. Attempts are indexed substreams scanned in
/// order, so the result is reproducible for any worker count. Exhausting
/// `max_attempts` yields `AcceptanceTooLow` carrying the observed rate.
pub fn accept_zero_error_pool(
    pool: &ArchitecturePool,
    dist: &ParamDistribution,
    ts: &TrainingSet,
    master_seed: u64,
    target_count: u64,
    max_attempts: u64,
) -> Result<Acceptance> {
    if target_count == 0 {
        return Err(Error::Parameter("target_count must be at least 1".into()));
    }
    if max_attempts == 0 {
        return Err(Error::Parameter("max_attempts must be at least 1".into()));
    }
    dist.validate()?;
    if pool.input_dim() != ts.input_dim() {
        return Err(Error::Dimension(format!(
            "training set dimension {} does not match pool input dimension {}",
            ts.input_dim(),
            pool.input_dim()
        )));
    }

    let mut members = Vec::with_capacity(target_count as usize);
    let mut start = 0u64;
    while start < max_attempts {
        let end = (start + REJECTION_CHUNK).min(max_attempts);
        let chunk: Vec<Option<ScoredNetwork>> = (start..end)
            .into_par_iter()
            .map_init(
                || None,
                |scratch, index| {
                    let scored =
                        sample_scored(pool, dist, ts, master_seed, index, false, scratch);
                    (scored.errors == 0).then_some(scored)
                },
            )
            .collect();
        for (offset, slot) in chunk.into_iter().enumerate() {
            if let Some(scored) = slot {
                members.push(scored);
                if members.len() as u64 == target_count {
                    return Ok(Acceptance {
                        accepted: target_count,
                        attempted: start + offset as u64 + 1,
                        members,
                    });
                }
            }
        }
        start = end;
    }
    let accepted = members.len() as u64;
    Err(Error::AcceptanceTooLow {
        accepted,
        attempted: max_attempts,
        target: target_count,
        rate: accepted as f64 / max_attempts as f64,
    })
}

/// Single-architecture rejection sampling.
pub fn accept_zero_error(
    arch: &Architecture,
    dist: &ParamDistribution,
    ts: &TrainingSet,
    master_seed: u64,
    target_count: u64,
    max_attempts: u64,
) -> Result<Acceptance> {
    let pool = ArchitecturePool::single(arch.clone(), None)?;
    accept_zero_error_pool(&pool, dist, ts, master_seed, target_count, max_attempts)
}

/// Per-member logit slope/offset so that the weight is exp(-beta*a - b).
#[inline]
fn logit_terms(member: &ScoredNetwork, variant: ExponentVariant) -> (f64, f64) {
    match variant {
        ExponentVariant::ScaledComplexity => (member.energy, 0.0),
        ExponentVariant::FixedComplexity => (member.errors as f64, member.complexity),
    }
}

/// Gibbs weights over member energies with the complexity term handled per
/// `variant`. Computed in the log domain (max-logit shift); `beta` may be
/// `f64::INFINITY`, which concentrates the weights on the minimum-energy set.
pub fn gibbs_weights_variant(
    members: &[ScoredNetwork],
    beta: f64,
    variant: ExponentVariant,
) -> Result<Vec<f64>> {
    if members.is_empty() {
        return Err(Error::Parameter("cannot weight an empty member list".into()));
    }
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::Parameter(format!(
            "beta must be >= 0 or +inf, got {beta}"
        )));
    }

    if beta.is_infinite() {
        // Zero temperature: support is exactly the argmin of the slope term.
        let min_a = members
            .iter()
            .map(|m| logit_terms(m, variant).0)
            .fold(f64::INFINITY, f64::min);
        let min_b = members
            .iter()
            .filter(|m| logit_terms(m, variant).0 == min_a)
            .map(|m| logit_terms(m, variant).1)
            .fold(f64::INFINITY, f64::min);
        let raw: Vec<f64> = members
            .iter()
            .map(|m| {
                let (a, b) = logit_terms(m, variant);
                if a == min_a {
                    (min_b - b).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        return Ok(raw.into_iter().map(|w| w / total).collect());
    }

    let max_logit = members
        .iter()
        .map(|m| {
            let (a, b) = logit_terms(m, variant);
            -beta * a - b
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = members
        .iter()
        .map(|m| {
            let (a, b) = logit_terms(m, variant);
            (-beta * a - b - max_logit).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Gibbs weights on the stored energies: w_a proportional to
/// exp(-beta * energy_a).
pub fn gibbs_weights(members: &[ScoredNetwork], beta: f64) -> Result<Vec<f64>> {
    gibbs_weights_variant(members, beta, ExponentVariant::ScaledComplexity)
}
