//! Feedforward networks built from hard-threshold and logistic neurons.
//!
//! A network is a fully connected layered composition of neurons. Hard
//! networks are {0,1}-valued indicator functions of unions of half-space
//! intersections; smooth networks take values in (0,1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neuron activation. `Hard` is the step function with the boundary
/// convention step(0) = 1; `Smooth` is the logistic 1/(1+e^-x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Hard,
    Smooth,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Hard => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Smooth => 1.0 / (1.0 + (-x).exp()),
        }
    }
}

/// A fully connected layered network shape: input dimension, the width of
/// each layer (the last layer always has width 1), and the activation used
/// by every neuron. `id` names the architecture inside a pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Architecture {
    pub id: String,
    pub input_dim: usize,
    pub layers: Vec<usize>,
    pub activation: Activation,
}

impl Architecture {
    pub fn new(
        id: impl Into<String>,
        input_dim: usize,
        layers: Vec<usize>,
        activation: Activation,
    ) -> Result<Self> {
        let arch = Architecture {
            id: id.into(),
            input_dim,
            layers,
            activation,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::Parameter("architecture id must be non-empty".into()));
        }
        if self.input_dim == 0 {
            return Err(Error::Parameter(format!(
                "architecture {:?}: input_dim must be positive",
                self.id
            )));
        }
        if self.layers.is_empty() {
            return Err(Error::Parameter(format!(
                "architecture {:?}: layers must be non-empty",
                self.id
            )));
        }
        if self.layers.contains(&0) {
            return Err(Error::Parameter(format!(
                "architecture {:?}: layer widths must be positive",
                self.id
            )));
        }
        if *self.layers.last().unwrap() != 1 {
            return Err(Error::Parameter(format!(
                "architecture {:?}: final layer width must be 1",
                self.id
            )));
        }
        Ok(())
    }

    /// Total number of neurons, the default complexity k(c).
    pub fn neuron_count(&self) -> usize {
        self.layers.iter().sum()
    }

    /// Fan-in of each layer: the input dimension for the first layer and the
    /// previous layer's width after that.
    pub fn fan_ins(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let prev = std::iter::once(self.input_dim).chain(self.layers.iter().copied());
        prev.zip(self.layers.iter().copied())
    }

    /// Number of real parameters: sum over layers of (fan_in + 1) * width.
    pub fn param_count(&self) -> usize {
        self.fan_ins()
            .map(|(fan_in, width)| (fan_in + 1) * width)
            .sum()
    }

    /// Widest intermediate vector produced during evaluation.
    pub(crate) fn max_width(&self) -> usize {
        self.layers
            .iter()
            .copied()
            .max()
            .unwrap_or(1)
            .max(self.input_dim)
    }
}

/// Weights and threshold of one neuron.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    pub weights: Vec<f64>,
    pub threshold: f64,
}

/// The full parameter set of one sampled network. Neurons are stored
/// layer-major: all neurons of the first layer in order, then the second
/// layer, and so on. This order is the sampling and serialization contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub architecture_id: String,
    pub neurons: Vec<NeuronParams>,
}

impl NetworkParams {
    /// Check that the parameter block matches `arch`: one neuron per
    /// architecture slot, weight-vector lengths equal to the fan-in, and
    /// every entry finite.
    pub fn validate_against(&self, arch: &Architecture) -> Result<()> {
        if self.architecture_id != arch.id {
            return Err(Error::Parameter(format!(
                "params belong to architecture {:?}, expected {:?}",
                self.architecture_id, arch.id
            )));
        }
        if self.neurons.len() != arch.neuron_count() {
            return Err(Error::Dimension(format!(
                "architecture {:?} has {} neurons, params carry {}",
                arch.id,
                arch.neuron_count(),
                self.neurons.len()
            )));
        }
        let mut idx = 0;
        for (fan_in, width) in arch.fan_ins() {
            for _ in 0..width {
                let neuron = &self.neurons[idx];
                if neuron.weights.len() != fan_in {
                    return Err(Error::Dimension(format!(
                        "neuron {} expects fan-in {}, params carry {}",
                        idx,
                        fan_in,
                        neuron.weights.len()
                    )));
                }
                if !neuron.threshold.is_finite()
                    || neuron.weights.iter().any(|w| !w.is_finite())
                {
                    return Err(Error::Domain(format!(
                        "neuron {}: non-finite parameter",
                        idx
                    )));
                }
                idx += 1;
            }
        }
        Ok(())
    }
}

/// Evaluate a single neuron: activation(sum_i w_i x_i - threshold).
/// Hard activation returns exactly 0 or 1, with activation(0) = 1.
pub fn eval_neuron(
    weights: &[f64],
    threshold: f64,
    inputs: &[f64],
    activation: Activation,
) -> Result<f64> {
    if weights.len() != inputs.len() {
        return Err(Error::Dimension(format!(
            "neuron has {} weights but received {} inputs",
            weights.len(),
            inputs.len()
        )));
    }
    if !threshold.is_finite()
        || weights.iter().any(|w| !w.is_finite())
        || inputs.iter().any(|x| !x.is_finite())
    {
        return Err(Error::Domain("non-finite value in neuron evaluation".into()));
    }
    Ok(neuron_raw(weights, threshold, inputs, activation))
}

#[inline]
fn neuron_raw(weights: &[f64], threshold: f64, inputs: &[f64], activation: Activation) -> f64 {
    let mut acc = 0.0;
    for (w, x) in weights.iter().zip(inputs) {
        acc += w * x;
    }
    activation.apply(acc - threshold)
}

/// Evaluate the network at `x`, feeding each layer's outputs to the next.
/// Output lies in [0,1]; Hard networks return exactly 0 or 1.
pub fn eval_network(params: &NetworkParams, arch: &Architecture, x: &[f64]) -> Result<f64> {
    if x.len() != arch.input_dim {
        return Err(Error::Dimension(format!(
            "architecture {:?} expects {} inputs, got {}",
            arch.id,
            arch.input_dim,
            x.len()
        )));
    }
    params.validate_against(arch)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite input coordinate".into()));
    }
    let mut scratch = EvalScratch::for_arch(arch);
    Ok(eval_network_unchecked(params, arch, x, &mut scratch))
}

/// Reusable buffers for repeated evaluation of one architecture.
#[derive(Debug, Clone)]
pub(crate) struct EvalScratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl EvalScratch {
    pub(crate) fn for_arch(arch: &Architecture) -> Self {
        let cap = arch.max_width();
        EvalScratch {
            a: Vec::with_capacity(cap),
            b: Vec::with_capacity(cap),
        }
    }
}

/// Evaluation core without validation; callers guarantee `params` matches
/// `arch` and `x` has the architecture's input dimension.
pub(crate) fn eval_network_unchecked(
    params: &NetworkParams,
    arch: &Architecture,
    x: &[f64],
    scratch: &mut EvalScratch,
) -> f64 {
    scratch.a.clear();
    scratch.a.extend_from_slice(x);
    let mut idx = 0;
    for &width in &arch.layers {
        scratch.b.clear();
        for _ in 0..width {
            let neuron = &params.neurons[idx];
            scratch.b.push(neuron_raw(
                &neuron.weights,
                neuron.threshold,
                &scratch.a,
                arch.activation,
            ));
            idx += 1;
        }
        std::mem::swap(&mut scratch.a, &mut scratch.b);
    }
    scratch.a[0]
}
