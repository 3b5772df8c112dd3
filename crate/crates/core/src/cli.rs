//! Command implementations behind the `ensnet` binary. Every command is
//! deterministic given its config, including under any worker count:
//! summaries go to stdout, diagnostics to stderr, and data files carry
//! full-precision values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::artifact::{load_ensemble_from_path, save_ensemble_to_path};
use crate::config::{Beta, Mode, RunConfig};
use crate::data::{holdout_split, load_dataset, load_points, save_dataset_to_path};
use crate::ensemble::{build, convergence_curve, GibbsEnsemble};
use crate::error::{Error, Result};
use crate::oracle::{exact_mixed_average, GridSpec};

fn load_config_with_seed(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = seed {
        config.master_seed = seed;
    }
    Ok(config)
}

fn energy_histogram_lines(ens: &GibbsEnsemble) -> String {
    let mut counts: BTreeMap<u64, (f64, u64)> = BTreeMap::new();
    for m in &ens.members {
        let e = counts.entry(m.energy.to_bits()).or_insert((m.energy, 0));
        e.1 += 1;
    }
    let mut rows: Vec<(f64, u64)> = counts.into_values().collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = String::new();
    for (energy, count) in rows {
        let _ = writeln!(out, "  {energy}: {count}");
    }
    out
}

/// Build an ensemble from a config and dataset, write the artifact, and
/// return the summary text.
pub fn cmd_build(
    config_path: &Path,
    data_path: &Path,
    out_path: &Path,
    seed: Option<u64>,
) -> Result<String> {
    let config = load_config_with_seed(config_path, seed)?;
    let ts = load_dataset(data_path)?;
    let ens = build(&ts, &config)?;
    save_ensemble_to_path(&ens, out_path)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "mode: {}", ens.mode);
    let _ = writeln!(summary, "members: {}", ens.len());
    let _ = writeln!(summary, "beta: {}", ens.beta);
    if let (Some(rate), Some(attempted)) = (ens.acceptance_rate(), ens.attempted) {
        let _ = writeln!(
            summary,
            "acceptance rate: {rate:.6} ({}/{attempted})",
            ens.len()
        );
    }
    let _ = writeln!(summary, "energy histogram:");
    summary.push_str(&energy_histogram_lines(&ens));
    let _ = writeln!(
        summary,
        "training accuracy: {:.4}",
        ens.training_accuracy(&ts)?
    );
    let _ = writeln!(summary, "artifact: {}", out_path.display());
    Ok(summary)
}

/// Evaluate an artifact at unlabeled points, writing
/// `x1..xN,value,std_error,label_hat` rows.
pub fn cmd_predict(artifact_path: &Path, points_path: &Path, out_path: &Path) -> Result<String> {
    let ens = load_ensemble_from_path(artifact_path)?;
    let points = load_points(points_path, Some(ens.input_dim()))?;

    let mut out = std::io::BufWriter::new(std::fs::File::create(out_path)?);
    let header: Vec<String> = (1..=ens.input_dim()).map(|i| format!("x{i}")).collect();
    writeln!(out, "{},value,std_error,label_hat", header.join(","))?;
    for x in &points {
        let est = ens.evaluate(x)?;
        let coords: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
        writeln!(
            out,
            "{},{},{},{}",
            coords.join(","),
            est.value,
            est.std_error,
            crate::selection::classify(est.value)
        )?;
    }
    out.flush()?;
    Ok(format!(
        "predictions: {} points -> {}\n",
        points.len(),
        out_path.display()
    ))
}

/// Rebuild weights for each beta over one sampled member set and report
/// accuracy, mean energy, and per-architecture weight mass.
pub fn cmd_sweep_beta(
    config_path: &Path,
    data_path: &Path,
    betas: &[Beta],
    holdout_path: Option<&Path>,
    out_path: Option<&Path>,
    seed: Option<u64>,
) -> Result<String> {
    if betas.is_empty() {
        return Err(Error::Parameter("at least one beta is required".into()));
    }
    let config = load_config_with_seed(config_path, seed)?;
    if config.mode == Mode::ZeroError {
        return Err(Error::Config(
            "sweep-beta needs a gibbs or mixed_arch config; zero_error has no beta".into(),
        ));
    }
    let ts = load_dataset(data_path)?;
    let holdout = holdout_path.map(load_dataset).transpose()?;
    let ens = build(&ts, &config)?;

    let mut table = String::new();
    let mass_cols: Vec<String> = ens
        .architectures
        .iter()
        .map(|e| format!("mass_{}", e.architecture.id))
        .collect();
    let _ = writeln!(
        table,
        "beta,train_accuracy,holdout_accuracy,mean_energy,{}",
        mass_cols.join(",")
    );
    for &beta in betas {
        let re = ens.reweighted(beta)?;
        let train_acc = re.training_accuracy(&ts)?;
        let holdout_acc = match &holdout {
            Some(h) => format!("{}", re.training_accuracy(h)?),
            None => String::new(),
        };
        let mass: Vec<String> = re
            .architecture_mass()
            .iter()
            .map(|m| format!("{m}"))
            .collect();
        let _ = writeln!(
            table,
            "{beta},{train_acc},{holdout_acc},{},{}",
            re.mean_energy(),
            mass.join(",")
        );
    }
    write_table(out_path, &table)
}

/// Law-of-large-numbers study over a member-count schedule.
pub fn cmd_convergence(
    config_path: &Path,
    data_path: &Path,
    schedule: &[u64],
    probes_path: &Path,
    out_path: Option<&Path>,
    seed: Option<u64>,
) -> Result<String> {
    let config = load_config_with_seed(config_path, seed)?;
    let ts = load_dataset(data_path)?;
    let probes = load_points(probes_path, Some(ts.input_dim()))?;
    let (_, rows) = convergence_curve(&ts, &config, schedule, &probes)?;

    let mut table = String::from("n,probe_index,value,std_error\n");
    for row in rows {
        let _ = writeln!(
            table,
            "{},{},{},{}",
            row.n, row.probe_index, row.value, row.std_error
        );
    }
    write_table(out_path, &table)
}

fn write_table(out_path: Option<&Path>, table: &str) -> Result<String> {
    match out_path {
        Some(path) => {
            std::fs::write(path, table)?;
            Ok(format!("table: {}\n", path.display()))
        }
        None => Ok(table.to_string()),
    }
}

/// Outcome of the oracle comparison; `failed` drives exit code 1.
pub struct OracleOutcome {
    pub stdout: String,
    pub warnings: Vec<String>,
    pub failed: bool,
}

#[derive(serde::Serialize)]
struct OracleProbeRecord {
    x: Vec<f64>,
    exact_value: f64,
    mc_value: f64,
    std_error: f64,
    z: f64,
}

#[derive(serde::Serialize)]
struct OracleReport {
    beta: Beta,
    mode: Mode,
    exponent_variant: crate::selection::ExponentVariant,
    n: u64,
    master_seed: u64,
    architectures: Vec<String>,
    value_grid: Vec<f64>,
    enumeration_sizes: Vec<u64>,
    probes: Vec<OracleProbeRecord>,
}

/// Compare the Monte Carlo estimator against the exact enumeration over the
/// identical grid measure. |z| > 5 at any probe is a hard failure;
/// 3 < |z| <= 5 is reported as a warning.
pub fn cmd_oracle(
    config_path: &Path,
    data_path: &Path,
    probes_path: &Path,
    out_path: Option<&Path>,
    seed: Option<u64>,
) -> Result<OracleOutcome> {
    let config = load_config_with_seed(config_path, seed)?;
    let grid = config
        .distribution
        .grid_values()
        .ok_or_else(|| {
            Error::Config("oracle comparison requires a grid distribution".into())
        })?
        .to_vec();
    let ts = load_dataset(data_path)?;
    let probes = load_points(probes_path, Some(ts.input_dim()))?;

    let pool = config.build_pool()?;
    let specs: Vec<(GridSpec, f64)> = pool
        .entries()
        .iter()
        .map(|e| {
            let k = if config.mode == Mode::MixedArch {
                e.complexity
            } else {
                0.0
            };
            Ok((GridSpec::new(e.architecture.clone(), grid.clone())?, k))
        })
        .collect::<Result<_>>()?;
    // a zero-error build estimates the zero-temperature average
    let exact_beta = if config.mode == Mode::ZeroError {
        f64::INFINITY
    } else {
        config.beta.value()
    };

    let ens = build(&ts, &config)?;

    let mut stdout = String::from("probe_index,exact_value,mc_value,std_error,z\n");
    let mut warnings = Vec::new();
    let mut failed = false;
    let mut records = Vec::with_capacity(probes.len());
    for (i, x) in probes.iter().enumerate() {
        let exact = exact_mixed_average(
            &specs,
            pool.selection_weights(),
            &ts,
            exact_beta,
            config.exponent_variant,
            x,
        )?;
        let est = ens.evaluate(x)?;
        let diff = est.value - exact;
        let z = if est.std_error > 0.0 {
            diff / est.std_error
        } else if diff.abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        if z.abs() > 5.0 {
            failed = true;
        } else if z.abs() > 3.0 {
            warnings.push(format!(
                "probe {i}: |z| = {:.2} exceeds 3 (mc {} vs exact {exact})",
                z.abs(),
                est.value
            ));
        }
        let _ = writeln!(stdout, "{i},{exact},{},{},{z}", est.value, est.std_error);
        records.push(OracleProbeRecord {
            x: x.clone(),
            exact_value: exact,
            mc_value: est.value,
            std_error: est.std_error,
            z,
        });
    }

    if let Some(path) = out_path {
        let report = OracleReport {
            beta: config.beta,
            mode: config.mode,
            exponent_variant: config.exponent_variant,
            n: config.n,
            master_seed: config.master_seed,
            architectures: specs.iter().map(|(s, _)| s.arch.id.clone()).collect(),
            value_grid: grid,
            enumeration_sizes: specs
                .iter()
                .map(|(s, _)| s.enumeration_size() as u64)
                .collect(),
            probes: records,
        };
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(&mut file, &report)
            .map_err(|e| Error::Artifact(e.to_string()))?;
        file.write_all(b"\n")?;
        file.flush()?;
    }

    Ok(OracleOutcome {
        stdout,
        warnings,
        failed,
    })
}

/// Deterministic holdout split written as two dataset files.
pub fn cmd_split(
    data_path: &Path,
    fraction: f64,
    seed: u64,
    out_train: &Path,
    out_test: &Path,
) -> Result<String> {
    let ts = load_dataset(data_path)?;
    let (test, train) = holdout_split(&ts, fraction, seed)?;
    save_dataset_to_path(&train, out_train)?;
    save_dataset_to_path(&test, out_test)?;
    Ok(format!(
        "train: {} points -> {}\ntest: {} points -> {}\n",
        train.len(),
        out_train.display(),
        test.len(),
        out_test.display()
    ))
}
