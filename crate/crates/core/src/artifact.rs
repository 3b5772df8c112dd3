//! Ensemble artifact files: a JSON document holding the mode, weighting
//! parameters, architectures, and every member's parameters, error count,
//! energy, and probability weight. Loading re-validates all invariants, and
//! values round-trip bit-exactly, so a reloaded artifact evaluates
//! identically to the in-memory ensemble that produced it.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Beta, Mode};
use crate::ensemble::GibbsEnsemble;
use crate::error::{Error, Result};
use crate::network::{Activation, Architecture, NetworkParams, NeuronParams};
use crate::sampling::PoolEntry;
use crate::selection::{ExponentVariant, ScoredNetwork};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArtifactDoc {
    format_version: u32,
    mode: Mode,
    beta: Beta,
    exponent_variant: ExponentVariant,
    master_seed: u64,
    training_fingerprint: String,
    architectures: Vec<ArtifactArch>,
    members: Vec<ArtifactMember>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArtifactArch {
    id: String,
    input_dim: usize,
    layers: Vec<usize>,
    activation: Activation,
    k: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArtifactMember {
    architecture_id: String,
    /// Per-neuron weight vectors, layer-major.
    weights: Vec<Vec<f64>>,
    /// Per-neuron thresholds, same order.
    thresholds: Vec<f64>,
    m: u32,
    energy: f64,
    /// Probability weight in the ensemble average.
    weight: f64,
    sample_index: u64,
}

fn to_doc(ens: &GibbsEnsemble) -> ArtifactDoc {
    ArtifactDoc {
        format_version: FORMAT_VERSION,
        mode: ens.mode,
        beta: ens.beta,
        exponent_variant: ens.exponent_variant,
        master_seed: ens.master_seed,
        training_fingerprint: ens.training_fingerprint.clone(),
        architectures: ens
            .architectures
            .iter()
            .map(|e| ArtifactArch {
                id: e.architecture.id.clone(),
                input_dim: e.architecture.input_dim,
                layers: e.architecture.layers.clone(),
                activation: e.architecture.activation,
                k: e.complexity,
            })
            .collect(),
        members: ens
            .members
            .iter()
            .zip(&ens.weights)
            .map(|(m, &w)| ArtifactMember {
                architecture_id: m.params.architecture_id.clone(),
                weights: m.params.neurons.iter().map(|n| n.weights.clone()).collect(),
                thresholds: m.params.neurons.iter().map(|n| n.threshold).collect(),
                m: m.errors,
                energy: m.energy,
                weight: w,
                sample_index: m.sample_index,
            })
            .collect(),
    }
}

fn from_doc(doc: ArtifactDoc) -> Result<GibbsEnsemble> {
    if doc.format_version != FORMAT_VERSION {
        return Err(Error::Artifact(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let architectures: Vec<PoolEntry> = doc
        .architectures
        .into_iter()
        .map(|a| {
            Ok(PoolEntry {
                architecture: Architecture::new(a.id, a.input_dim, a.layers, a.activation)?,
                complexity: a.k,
            })
        })
        .collect::<Result<_>>()?;
    let mut members = Vec::with_capacity(doc.members.len());
    let mut weights = Vec::with_capacity(doc.members.len());
    for m in doc.members {
        if m.weights.len() != m.thresholds.len() {
            return Err(Error::Artifact(format!(
                "member {}: {} weight vectors but {} thresholds",
                m.sample_index,
                m.weights.len(),
                m.thresholds.len()
            )));
        }
        let neurons = m
            .weights
            .into_iter()
            .zip(m.thresholds)
            .map(|(weights, threshold)| NeuronParams { weights, threshold })
            .collect();
        let energy = m.energy;
        let complexity = energy - m.m as f64;
        members.push(ScoredNetwork {
            params: NetworkParams {
                architecture_id: m.architecture_id,
                neurons,
            },
            errors: m.m,
            complexity,
            energy,
            sample_index: m.sample_index,
        });
        weights.push(m.weight);
    }
    let ens = GibbsEnsemble {
        mode: doc.mode,
        beta: doc.beta,
        exponent_variant: doc.exponent_variant,
        master_seed: doc.master_seed,
        training_fingerprint: doc.training_fingerprint,
        architectures,
        members,
        weights,
        attempted: None,
    };
    ens.validate()?;
    Ok(ens)
}

pub fn save_ensemble(ens: &GibbsEnsemble, mut out: impl Write) -> Result<()> {
    serde_json::to_writer(&mut out, &to_doc(ens)).map_err(io_or_artifact)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn save_ensemble_to_path(ens: &GibbsEnsemble, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    save_ensemble(ens, std::io::BufWriter::new(file))
}

pub fn load_ensemble(mut input: impl Read) -> Result<GibbsEnsemble> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let doc: ArtifactDoc =
        serde_json::from_str(&text).map_err(|e| Error::Artifact(e.to_string()))?;
    from_doc(doc)
}

pub fn load_ensemble_from_path(path: impl AsRef<Path>) -> Result<GibbsEnsemble> {
    let file = std::fs::File::open(path)?;
    load_ensemble(std::io::BufReader::new(file))
}

fn io_or_artifact(e: serde_json::Error) -> Error {
    if e.is_io() {
        Error::Io(e.into())
    } else {
        Error::Artifact(e.to_string())
    }
}
