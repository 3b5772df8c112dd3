//! Building the weighted ensemble and evaluating the averaged network.
//!
//! The ensemble average at a point is a convex combination of member
//! outputs, so it always lies in [0,1]; by the law of large numbers it
//! converges to the expected output of one selected network, and the
//! reported standard error tracks that convergence.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::config::{Beta, Mode, RunConfig};
use crate::data::TrainingSet;
use crate::error::{Error, Result};
use crate::network::{eval_network_unchecked, Architecture, EvalScratch};
use crate::sampling::PoolEntry;
use crate::selection::{
    accept_zero_error_pool, classify, gibbs_weights_variant, score_batch, ExponentVariant,
    ScoredNetwork,
};

/// Weighted-average value at one point with its Monte Carlo standard error.
/// `n_effective` is the inverse sum of squared weights: n for uniform
/// weights, smaller when the Gibbs measure concentrates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_effective: f64,
}

/// An immutable built ensemble: scored members, their probability weights,
/// and enough provenance to reproduce or validate the build.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsEnsemble {
    pub mode: Mode,
    pub beta: Beta,
    pub exponent_variant: ExponentVariant,
    pub master_seed: u64,
    pub training_fingerprint: String,
    pub architectures: Vec<PoolEntry>,
    pub members: Vec<ScoredNetwork>,
    pub weights: Vec<f64>,
    /// Attempts consumed by rejection sampling, if this is a zero-error build.
    pub attempted: Option<u64>,
}

impl GibbsEnsemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.architectures[0].architecture.input_dim
    }

    pub fn acceptance_rate(&self) -> Option<f64> {
        self.attempted
            .map(|attempts| self.members.len() as f64 / attempts as f64)
    }

    fn arch_index(&self) -> HashMap<&str, &Architecture> {
        self.architectures
            .iter()
            .map(|e| (e.architecture.id.as_str(), &e.architecture))
            .collect()
    }

    /// Check every structural invariant; used after artifact loads.
    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Artifact("ensemble has no members".into()));
        }
        if self.architectures.is_empty() {
            return Err(Error::Artifact("ensemble lists no architectures".into()));
        }
        for entry in &self.architectures {
            entry.architecture.validate()?;
            if !entry.complexity.is_finite() || entry.complexity < 0.0 {
                return Err(Error::Artifact(format!(
                    "architecture {:?} has invalid complexity {}",
                    entry.architecture.id, entry.complexity
                )));
            }
        }
        let dim = self.input_dim();
        if self
            .architectures
            .iter()
            .any(|e| e.architecture.input_dim != dim)
        {
            return Err(Error::Artifact(
                "architectures disagree on input dimension".into(),
            ));
        }
        if self.weights.len() != self.members.len() {
            return Err(Error::Artifact(format!(
                "{} weights for {} members",
                self.weights.len(),
                self.members.len()
            )));
        }
        let sum: f64 = self.weights.iter().sum();
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Artifact(format!(
                "weights are not a probability vector (sum {sum})"
            )));
        }
        let index = self.arch_index();
        for member in &self.members {
            let arch = index.get(member.architecture_id()).ok_or_else(|| {
                Error::Artifact(format!(
                    "member {} references unknown architecture {:?}",
                    member.sample_index,
                    member.architecture_id()
                ))
            })?;
            member.params.validate_against(arch)?;
            if !member.energy.is_finite()
                || !member.complexity.is_finite()
                || member.complexity < 0.0
                || (member.energy - (member.errors as f64 + member.complexity)).abs() > 1e-12
            {
                return Err(Error::Artifact(format!(
                    "member {} has inconsistent energy {} for m {} and complexity {}",
                    member.sample_index, member.energy, member.errors, member.complexity
                )));
            }
        }
        if self.mode == Mode::ZeroError {
            if self.members.iter().any(|m| m.errors != 0) {
                return Err(Error::Artifact(
                    "zero-error ensemble contains a member with errors".into(),
                ));
            }
            let uniform = 1.0 / self.members.len() as f64;
            if self.weights.iter().any(|w| (w - uniform).abs() > 1e-12) {
                return Err(Error::Artifact(
                    "zero-error ensemble weights must be uniform".into(),
                ));
            }
        }
        Ok(())
    }

    /// Weighted average of member outputs at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<EnsembleEstimate> {
        self.estimate_prefix(self.members.len(), &self.weights, x)
    }

    /// Class decision at `x`: 1 iff the averaged value is at least 0.5.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(classify(self.evaluate(x)?.value))
    }

    /// Fraction of training points the averaged network classifies correctly.
    pub fn training_accuracy(&self, ts: &TrainingSet) -> Result<f64> {
        let mut hits = 0usize;
        for p in ts.points() {
            if self.predict(&p.x)? == p.label {
                hits += 1;
            }
        }
        Ok(hits as f64 / ts.len() as f64)
    }

    /// Per-architecture Gibbs weight mass, in `architectures` order.
    pub fn architecture_mass(&self) -> Vec<f64> {
        let position: HashMap<&str, usize> = self
            .architectures
            .iter()
            .enumerate()
            .map(|(i, e)| (e.architecture.id.as_str(), i))
            .collect();
        let mut mass = vec![0.0; self.architectures.len()];
        for (member, w) in self.members.iter().zip(&self.weights) {
            mass[position[member.architecture_id()]] += w;
        }
        mass
    }

    /// Mean member energy under the current weights.
    pub fn mean_energy(&self) -> f64 {
        self.members
            .iter()
            .zip(&self.weights)
            .map(|(m, w)| w * m.energy)
            .sum()
    }

    /// Recompute the weights of the stored members at a different inverse
    /// temperature, without resampling.
    pub fn reweighted(&self, beta: Beta) -> Result<GibbsEnsemble> {
        if self.mode == Mode::ZeroError {
            return Err(Error::Parameter(
                "zero-error ensembles have fixed uniform weights".into(),
            ));
        }
        let weights = gibbs_weights_variant(&self.members, beta.value(), self.exponent_variant)?;
        Ok(GibbsEnsemble {
            beta,
            weights,
            ..self.clone()
        })
    }

    fn estimate_prefix(&self, n: usize, weights: &[f64], x: &[f64]) -> Result<EnsembleEstimate> {
        let dim = self.input_dim();
        if x.len() != dim {
            return Err(Error::Dimension(format!(
                "point has dimension {}, ensemble expects {dim}",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite probe coordinate".into()));
        }
        let index = self.arch_index();
        let members = &self.members[..n];
        let outputs: Vec<f64> = members
            .par_iter()
            .map_init(
                || None::<EvalScratch>,
                |scratch, member| {
                    let arch = index[member.architecture_id()];
                    let sc = scratch.get_or_insert_with(|| EvalScratch::for_arch(arch));
                    eval_network_unchecked(&member.params, arch, x, sc)
                },
            )
            .collect();

        // Ratio form: when every member agrees the value is exactly 0 or 1,
        // because numerator and denominator are then the identical sum.
        let mut num = 0.0;
        let mut den = 0.0;
        for (f, w) in outputs.iter().zip(weights) {
            num += w * f;
            den += w;
        }
        let value = num / den;
        let mut sum_sq = 0.0;
        for (f, w) in outputs.iter().zip(weights) {
            let wn = w / den;
            sum_sq += wn * wn * (f - value) * (f - value);
        }
        let inv_n_eff: f64 = weights.iter().map(|w| (w / den) * (w / den)).sum();
        Ok(EnsembleEstimate {
            value,
            std_error: sum_sq.sqrt(),
            n_effective: 1.0 / inv_n_eff,
        })
    }
}

/// Build an ensemble from a validated run config. Deterministic in
/// `config.master_seed` for any worker count.
pub fn build(ts: &TrainingSet, config: &RunConfig) -> Result<GibbsEnsemble> {
    config.validate()?;
    let pool = config.build_pool()?;
    if pool.input_dim() != ts.input_dim() {
        return Err(Error::Config(format!(
            "pool input dimension {} does not match dataset dimension {}",
            pool.input_dim(),
            ts.input_dim()
        )));
    }

    let (members, weights, attempted) = match config.mode {
        Mode::ZeroError => {
            let acc = accept_zero_error_pool(
                &pool,
                &config.distribution,
                ts,
                config.master_seed,
                config.n,
                config.max_attempts,
            )?;
            let uniform = 1.0 / acc.members.len() as f64;
            let weights = vec![uniform; acc.members.len()];
            (acc.members, weights, Some(acc.attempted))
        }
        Mode::Gibbs | Mode::MixedArch => {
            let apply_complexity = config.mode == Mode::MixedArch;
            let members = score_batch(
                0..config.n,
                &pool,
                &config.distribution,
                ts,
                config.master_seed,
                apply_complexity,
            )?;
            let weights = gibbs_weights_variant(
                &members,
                config.beta.value(),
                config.exponent_variant,
            )?;
            (members, weights, None)
        }
    };

    Ok(GibbsEnsemble {
        mode: config.mode,
        beta: config.beta,
        exponent_variant: config.exponent_variant,
        master_seed: config.master_seed,
        training_fingerprint: ts.fingerprint(),
        architectures: pool.entries().to_vec(),
        members,
        weights,
        attempted,
    })
}

/// One row of a convergence study: the estimate at `probe_index` using only
/// the first `n` members.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    pub probe_index: usize,
    pub value: f64,
    pub std_error: f64,
}

/// Law-of-large-numbers diagnostics: build the full-size ensemble once and
/// evaluate nested prefixes, so each row reuses the same substreams and the
/// curve shows pure averaging behavior. For zero-error mode the prefix is
/// the first `n` accepted members.
pub fn convergence_curve(
    ts: &TrainingSet,
    config: &RunConfig,
    n_schedule: &[u64],
    probes: &[Vec<f64>],
) -> Result<(GibbsEnsemble, Vec<ConvergenceRow>)> {
    if n_schedule.is_empty() {
        return Err(Error::Parameter("schedule must be non-empty".into()));
    }
    if n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("schedule must be strictly increasing".into()));
    }
    if n_schedule[0] == 0 {
        return Err(Error::Parameter("schedule entries must be at least 1".into()));
    }
    if probes.is_empty() {
        return Err(Error::Parameter("at least one probe point is required".into()));
    }
    let n_max = *n_schedule.last().unwrap();
    let mut full_config = config.clone();
    full_config.n = n_max;
    let ensemble = build(ts, &full_config)?;

    let mut rows = Vec::with_capacity(n_schedule.len() * probes.len());
    for &n in n_schedule {
        let n = n as usize;
        let weights: Vec<f64> = match config.mode {
            Mode::ZeroError => vec![1.0 / n as f64; n],
            Mode::Gibbs | Mode::MixedArch => gibbs_weights_variant(
                &ensemble.members[..n],
                config.beta.value(),
                config.exponent_variant,
            )?,
        };
        for (probe_index, probe) in probes.iter().enumerate() {
            let est = ensemble.estimate_prefix(n, &weights, probe)?;
            rows.push(ConvergenceRow {
                n: n as u64,
                probe_index,
                value: est.value,
                std_error: est.std_error,
            });
        }
    }
    Ok((ensemble, rows))
}
