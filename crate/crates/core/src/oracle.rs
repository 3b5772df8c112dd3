//! Exact Gibbs averages by brute-force enumeration of every network on a
//! finite parameter grid. This is the ground truth the Monte Carlo
//! estimator is checked against: the grid measure here is identical to
//! `ParamDistribution::Grid`, so any discrepancy is sampling error alone.

use rayon::prelude::*;

use crate::data::TrainingSet;
use crate::error::{Error, Result};
use crate::network::{
    eval_network_unchecked, Architecture, EvalScratch, NetworkParams, NeuronParams,
};
use crate::sampling::ParamDistribution;
use crate::selection::{error_count_unchecked, ExponentVariant};

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// A finite parameter space: every weight and threshold of `arch` ranges
/// over `value_grid`, with the uniform measure.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub arch: Architecture,
    pub value_grid: Vec<f64>,
    cap: u128,
}

impl GridSpec {
    pub fn new(arch: Architecture, value_grid: Vec<f64>) -> Result<Self> {
        Self::with_cap(arch, value_grid, DEFAULT_ENUMERATION_CAP)
    }

    pub fn with_cap(arch: Architecture, value_grid: Vec<f64>, cap: u128) -> Result<Self> {
        arch.validate()?;
        ParamDistribution::Grid {
            values: value_grid.clone(),
        }
        .validate()?;
        Ok(GridSpec {
            arch,
            value_grid,
            cap,
        })
    }

    /// Grid spec sharing the measure of a `Grid` distribution.
    pub fn from_distribution(arch: Architecture, dist: &ParamDistribution) -> Result<Self> {
        let values = dist.grid_values().ok_or_else(|| {
            Error::Parameter("oracle enumeration requires a grid distribution".into())
        })?;
        Self::new(arch, values.to_vec())
    }

    /// |grid|^param_count, the number of distinct networks enumerated.
    pub fn enumeration_size(&self) -> u128 {
        let g = self.value_grid.len() as u128;
        let mut size: u128 = 1;
        for _ in 0..self.arch.param_count() {
            size = size.saturating_mul(g);
        }
        size
    }

    fn checked_size(&self) -> Result<u64> {
        let size = self.enumeration_size();
        if size > self.cap {
            return Err(Error::ResourceLimit {
                size,
                cap: self.cap,
            });
        }
        Ok(size as u64)
    }
}

/// Accumulator for one error-count level: how many assignments hit it and
/// the (compensated) sum of their outputs at the probe point.
#[derive(Debug, Clone, Copy, Default)]
struct Bucket {
    count: u64,
    f_sum: f64,
    f_comp: f64,
}

impl Bucket {
    #[inline]
    fn add_f(&mut self, v: f64) {
        // Kahan compensated summation keeps the scan order-independent
        // to well below the 1e-12 tolerance.
        let y = v - self.f_comp;
        let t = self.f_sum + y;
        self.f_comp = (t - self.f_sum) - y;
        self.f_sum = t;
    }

    fn merge(&mut self, other: &Bucket) {
        self.count += other.count;
        self.add_f(other.f_sum);
        self.add_f(other.f_comp);
    }
}

/// Map from flat parameter index to its slot in the layer-major layout;
/// `usize::MAX` marks the threshold slot.
fn param_layout(arch: &Architecture) -> Vec<(usize, usize)> {
    let mut layout = Vec::with_capacity(arch.param_count());
    let mut neuron = 0;
    for (fan_in, width) in arch.fan_ins() {
        for _ in 0..width {
            for w in 0..fan_in {
                layout.push((neuron, w));
            }
            layout.push((neuron, usize::MAX));
            neuron += 1;
        }
    }
    layout
}

fn blank_params(arch: &Architecture) -> NetworkParams {
    let mut neurons = Vec::with_capacity(arch.neuron_count());
    for (fan_in, width) in arch.fan_ins() {
        for _ in 0..width {
            neurons.push(NeuronParams {
                weights: vec![0.0; fan_in],
                threshold: 0.0,
            });
        }
    }
    NetworkParams {
        architecture_id: arch.id.clone(),
        neurons,
    }
}

const SCAN_BLOCK: u64 = 16_384;

/// Enumerate the whole grid, bucketing assignments by error count. When a
/// probe point is given, also accumulate the network outputs there. Blocks
/// are scanned in parallel and merged in a fixed order, so the result does
/// not depend on the worker count.
fn bucket_scan(spec: &GridSpec, ts: &TrainingSet, x: Option<&[f64]>) -> Result<Vec<Bucket>> {
    if spec.arch.input_dim != ts.input_dim() {
        return Err(Error::Dimension(format!(
            "training set dimension {} does not match architecture {:?} input {}",
            ts.input_dim(),
            spec.arch.id,
            spec.arch.input_dim
        )));
    }
    if let Some(probe) = x {
        if probe.len() != spec.arch.input_dim {
            return Err(Error::Dimension(format!(
                "probe has dimension {}, expected {}",
                probe.len(),
                spec.arch.input_dim
            )));
        }
        if probe.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite probe coordinate".into()));
        }
    }
    let total = spec.checked_size()?;
    let layout = param_layout(&spec.arch);
    let g = spec.value_grid.len() as u64;
    let n_buckets = ts.len() + 1;

    let block_tables: Vec<Vec<Bucket>> = (0..total.div_ceil(SCAN_BLOCK))
        .into_par_iter()
        .map(|block| {
            let start = block * SCAN_BLOCK;
            let end = (start + SCAN_BLOCK).min(total);
            let mut buckets = vec![Bucket::default(); n_buckets];
            let mut params = blank_params(&spec.arch);
            let mut scratch = EvalScratch::for_arch(&spec.arch);

            // digits of `start` in base g, least significant first
            let mut digits = vec![0u64; layout.len()];
            let mut rem = start;
            for d in digits.iter_mut() {
                *d = rem % g;
                rem /= g;
            }
            let assign = |params: &mut NetworkParams, j: usize, digit: u64| {
                let value = spec.value_grid[digit as usize];
                let (neuron, slot) = layout[j];
                if slot == usize::MAX {
                    params.neurons[neuron].threshold = value;
                } else {
                    params.neurons[neuron].weights[slot] = value;
                }
            };
            for (j, &d) in digits.iter().enumerate() {
                assign(&mut params, j, d);
            }

            for i in start..end {
                if i > start {
                    // odometer step: bump the lowest digit, carrying upward
                    let mut j = 0;
                    loop {
                        digits[j] += 1;
                        if digits[j] < g {
                            assign(&mut params, j, digits[j]);
                            break;
                        }
                        digits[j] = 0;
                        assign(&mut params, j, 0);
                        j += 1;
                    }
                }
                let m = error_count_unchecked(&params, &spec.arch, ts, &mut scratch) as usize;
                let bucket = &mut buckets[m];
                bucket.count += 1;
                if let Some(probe) = x {
                    bucket.add_f(eval_network_unchecked(&params, &spec.arch, probe, &mut scratch));
                }
            }
            buckets
        })
        .collect();

    let mut merged = vec![Bucket::default(); n_buckets];
    for table in &block_tables {
        for (acc, b) in merged.iter_mut().zip(table) {
            acc.merge(b);
        }
    }
    Ok(merged)
}

/// Error-count distribution over the whole grid: entry m holds the number
/// of assignments with exactly m training errors.
pub fn energy_histogram(spec: &GridSpec, ts: &TrainingSet) -> Result<Vec<u64>> {
    Ok(bucket_scan(spec, ts, None)?
        .into_iter()
        .map(|b| b.count)
        .collect())
}

fn validate_beta(beta: f64) -> Result<()> {
    if beta.is_nan() || beta < 0.0 {
        return Err(Error::Parameter(format!(
            "beta must be >= 0 or +inf, got {beta}"
        )));
    }
    Ok(())
}

/// One occupied (group, error-level) cell of a mixture enumeration.
struct GroupTerm {
    group: usize,
    /// group selection weight divided by the group's enumeration size
    measure: f64,
    /// logit is -beta * slope - offset
    slope: f64,
    offset: f64,
    count: f64,
    f_sum: f64,
}

fn collect_terms(
    groups: &[(Vec<Bucket>, f64, f64)], // (buckets, selection weight, k)
    variant: ExponentVariant,
) -> Vec<GroupTerm> {
    let mut terms = Vec::new();
    for (group, (buckets, sel, k)) in groups.iter().enumerate() {
        let total: u64 = buckets.iter().map(|b| b.count).sum();
        for (m, b) in buckets.iter().enumerate() {
            if b.count == 0 {
                continue;
            }
            let (slope, offset) = match variant {
                ExponentVariant::ScaledComplexity => (m as f64 + k, 0.0),
                ExponentVariant::FixedComplexity => (m as f64, *k),
            };
            terms.push(GroupTerm {
                group,
                measure: sel / total as f64,
                slope,
                offset,
                count: b.count as f64,
                f_sum: b.f_sum + b.f_comp,
            });
        }
    }
    terms
}

/// Combine occupied cells into (value numerator, denominator, per-group
/// weight mass). At beta = +inf only the minimum-slope cells survive,
/// weighted by exp(-offset).
fn combine_terms(terms: &[GroupTerm], beta: f64, n_groups: usize) -> (f64, f64, Vec<f64>) {
    let mut numer = 0.0;
    let mut denom = 0.0;
    let mut mass = vec![0.0; n_groups];
    if beta.is_infinite() {
        let min_slope = terms.iter().map(|t| t.slope).fold(f64::INFINITY, f64::min);
        let min_offset = terms
            .iter()
            .filter(|t| t.slope == min_slope)
            .map(|t| t.offset)
            .fold(f64::INFINITY, f64::min);
        for t in terms.iter().filter(|t| t.slope == min_slope) {
            let w = t.measure * (min_offset - t.offset).exp();
            numer += w * t.f_sum;
            denom += w * t.count;
            mass[t.group] += w * t.count;
        }
    } else {
        let max_logit = terms
            .iter()
            .map(|t| -beta * t.slope - t.offset)
            .fold(f64::NEG_INFINITY, f64::max);
        for t in terms {
            let w = t.measure * (-beta * t.slope - t.offset - max_logit).exp();
            numer += w * t.f_sum;
            denom += w * t.count;
            mass[t.group] += w * t.count;
        }
    }
    for m in mass.iter_mut() {
        *m /= denom;
    }
    (numer, denom, mass)
}

/// Exact Gibbs average of the network output at `x` over the full grid:
/// sum of e^{-beta(m + k_c)} f(x) over all assignments divided by the same
/// sum without f. The constant `k_c` cancels; it is accepted to mirror the
/// mixture form. At beta = +inf this is the plain average over the
/// minimum-energy assignments.
pub fn exact_average(
    spec: &GridSpec,
    ts: &TrainingSet,
    beta: f64,
    k_c: f64,
    x: &[f64],
) -> Result<f64> {
    validate_beta(beta)?;
    if !k_c.is_finite() || k_c < 0.0 {
        return Err(Error::Parameter(format!(
            "complexity must be finite and >= 0, got {k_c}"
        )));
    }
    let buckets = bucket_scan(spec, ts, Some(x))?;
    let groups = [(buckets, 1.0, k_c)];
    let terms = collect_terms(&groups, ExponentVariant::ScaledComplexity);
    let (numer, denom, _) = combine_terms(&terms, beta, 1);
    Ok(numer / denom)
}

/// Exact mixture average over several architectures: each group is an
/// independent grid enumeration entered with its pool selection weight and
/// complexity k(c).
pub fn exact_mixed_average(
    specs: &[(GridSpec, f64)],
    selection_weights: &[f64],
    ts: &TrainingSet,
    beta: f64,
    variant: ExponentVariant,
    x: &[f64],
) -> Result<f64> {
    let groups = mixture_groups(specs, selection_weights, ts, beta, Some(x))?;
    let terms = collect_terms(&groups, variant);
    let (numer, denom, _) = combine_terms(&terms, beta, groups.len());
    Ok(numer / denom)
}

/// Exact per-architecture Gibbs weight mass: the probability that a member
/// drawn from the weighted mixture carries each architecture. Sums to 1.
pub fn exact_architecture_mass(
    specs: &[(GridSpec, f64)],
    selection_weights: &[f64],
    ts: &TrainingSet,
    beta: f64,
    variant: ExponentVariant,
) -> Result<Vec<f64>> {
    let groups = mixture_groups(specs, selection_weights, ts, beta, None)?;
    let terms = collect_terms(&groups, variant);
    let (_, _, mass) = combine_terms(&terms, beta, groups.len());
    Ok(mass)
}

fn mixture_groups(
    specs: &[(GridSpec, f64)],
    selection_weights: &[f64],
    ts: &TrainingSet,
    beta: f64,
    x: Option<&[f64]>,
) -> Result<Vec<(Vec<Bucket>, f64, f64)>> {
    validate_beta(beta)?;
    if specs.is_empty() {
        return Err(Error::Parameter("mixture needs at least one grid spec".into()));
    }
    if specs.len() != selection_weights.len() {
        return Err(Error::Parameter(format!(
            "{} selection weights for {} grid specs",
            selection_weights.len(),
            specs.len()
        )));
    }
    let sum: f64 = selection_weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 || selection_weights.iter().any(|w| *w < 0.0) {
        return Err(Error::Parameter(
            "selection weights must be non-negative and sum to 1".into(),
        ));
    }
    for (spec, k) in specs {
        if !k.is_finite() || *k < 0.0 {
            return Err(Error::Parameter(format!(
                "complexity for architecture {:?} must be finite and >= 0, got {k}",
                spec.arch.id
            )));
        }
    }
    specs
        .iter()
        .zip(selection_weights)
        .map(|((spec, k), &sel)| Ok((bucket_scan(spec, ts, x)?, sel, *k)))
        .collect()
}
