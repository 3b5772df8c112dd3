//! Training data: labeled points, CSV loading, and holdout splits.
//!
//! CSV schema: header `x1,...,xN,label`, one point per row, decimal reals,
//! label last with value `0` or `1`. Row numbers in errors count data rows
//! starting at 1 (the header is row 0).

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sampling::{SeedSpec, SubstreamRng, STREAM_SHUFFLE};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub x: Vec<f64>,
    pub label: u8,
}

impl LabeledPoint {
    pub fn new(x: Vec<f64>, label: u8) -> Result<Self> {
        if label > 1 {
            return Err(Error::Parameter(format!(
                "label must be 0 or 1, got {label}"
            )));
        }
        if x.is_empty() {
            return Err(Error::Parameter("point must have at least one coordinate".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite coordinate in labeled point".into()));
        }
        Ok(LabeledPoint { x, label })
    }
}

/// An immutable labeled sample. All points share one dimension and no two
/// identical points carry contradictory labels (zero-error selection would
/// be impossible otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    points: Vec<LabeledPoint>,
    input_dim: usize,
}

impl TrainingSet {
    pub fn new(points: Vec<LabeledPoint>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::Parameter("training set must be non-empty".into()));
        };
        let input_dim = first.x.len();
        let mut seen: HashMap<Vec<u64>, u8> = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.x.len() != input_dim {
                return Err(Error::Dimension(format!(
                    "point {} has dimension {}, expected {}",
                    i + 1,
                    p.x.len(),
                    input_dim
                )));
            }
            let key: Vec<u64> = p.x.iter().map(|v| v.to_bits()).collect();
            if let Some(&prev) = seen.get(&key) {
                if prev != p.label {
                    return Err(Error::Parameter(format!(
                        "point {} duplicates an earlier point with a contradictory label",
                        i + 1
                    )));
                }
            } else {
                seen.insert(key, p.label);
            }
        }
        Ok(TrainingSet { points, input_dim })
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    /// FNV-1a hash over the canonical byte encoding, used as the artifact
    /// provenance fingerprint.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(&(self.input_dim as u64).to_le_bytes());
        eat(&(self.points.len() as u64).to_le_bytes());
        for p in &self.points {
            for v in &p.x {
                eat(&v.to_bits().to_le_bytes());
            }
            eat(&[p.label]);
        }
        format!("fnv1a:{h:016x}")
    }
}

fn parse_header(headers: &csv::StringRecord, require_label: bool) -> Result<(usize, bool)> {
    let cols: Vec<&str> = headers.iter().map(str::trim).collect();
    if cols.is_empty() {
        return Err(Error::Dataset {
            row: 0,
            msg: "empty header".into(),
        });
    }
    let has_label = cols.last() == Some(&"label");
    let dim = if has_label { cols.len() - 1 } else { cols.len() };
    if dim == 0 {
        return Err(Error::Dataset {
            row: 0,
            msg: "header has no feature columns".into(),
        });
    }
    if require_label && !has_label {
        return Err(Error::Dataset {
            row: 0,
            msg: "last header column must be `label`".into(),
        });
    }
    for (i, col) in cols.iter().take(dim).enumerate() {
        let expected = format!("x{}", i + 1);
        if *col != expected {
            return Err(Error::Dataset {
                row: 0,
                msg: format!("header column {} is {col:?}, expected {expected:?}", i + 1),
            });
        }
    }
    Ok((dim, has_label))
}

fn parse_coord(field: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Dataset {
        row,
        msg: format!("column x{col}: cannot parse {field:?} as a real number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Dataset {
            row,
            msg: format!("column x{col}: non-finite value {field:?}"),
        });
    }
    Ok(v)
}

/// Load a labeled dataset. Row order is preserved; malformed rows,
/// non-binary labels, inconsistent dimensions and contradictory duplicates
/// are rejected with the offending row number.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<TrainingSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path.as_ref()).map_err(csv_io)?;
    let (dim, _) = parse_header(reader.headers().map_err(csv_io)?, true)?;

    let mut points = Vec::new();
    let mut seen: HashMap<Vec<u64>, u8> = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(csv_io)?;
        if record.len() != dim + 1 {
            return Err(Error::Dataset {
                row,
                msg: format!("expected {} columns, found {}", dim + 1, record.len()),
            });
        }
        let mut x = Vec::with_capacity(dim);
        for c in 0..dim {
            x.push(parse_coord(&record[c], row, c + 1)?);
        }
        let label = match record[dim].trim() {
            "0" => 0u8,
            "1" => 1u8,
            other => {
                return Err(Error::Dataset {
                    row,
                    msg: format!("label must be 0 or 1, got {other:?}"),
                })
            }
        };
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(&prev) = seen.get(&key) {
            if prev != label {
                return Err(Error::Dataset {
                    row,
                    msg: "duplicates an earlier point with a contradictory label".into(),
                });
            }
        } else {
            seen.insert(key, label);
        }
        points.push(LabeledPoint { x, label });
    }
    if points.is_empty() {
        return Err(Error::Dataset {
            row: 0,
            msg: "dataset has no data rows".into(),
        });
    }
    TrainingSet::new(points)
}

/// Unlabeled evaluation points: same schema as a dataset, the trailing
/// `label` column optional and ignored when present.
pub fn load_points(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path.as_ref()).map_err(csv_io)?;
    let (dim, has_label) = parse_header(reader.headers().map_err(csv_io)?, false)?;
    if let Some(expected) = expected_dim {
        if dim != expected {
            return Err(Error::Dimension(format!(
                "points have dimension {dim}, expected {expected}"
            )));
        }
    }
    let width = dim + usize::from(has_label);
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(csv_io)?;
        if record.len() != width {
            return Err(Error::Dataset {
                row,
                msg: format!("expected {} columns, found {}", width, record.len()),
            });
        }
        let mut x = Vec::with_capacity(dim);
        for c in 0..dim {
            x.push(parse_coord(&record[c], row, c + 1)?);
        }
        points.push(x);
    }
    if points.is_empty() {
        return Err(Error::Dataset {
            row: 0,
            msg: "points file has no data rows".into(),
        });
    }
    Ok(points)
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Dataset {
            row: 0,
            msg: format!("{other:?}"),
        },
    }
}

/// Write a dataset back out in the canonical CSV schema. Values round-trip
/// through `load_dataset` bit-exactly.
pub fn save_dataset(ts: &TrainingSet, mut out: impl Write) -> Result<()> {
    let header: Vec<String> = (1..=ts.input_dim()).map(|i| format!("x{i}")).collect();
    writeln!(out, "{},label", header.join(","))?;
    for p in ts.points() {
        let coords: Vec<String> = p.x.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{},{}", coords.join(","), p.label)?;
    }
    Ok(())
}

pub fn save_dataset_to_path(ts: &TrainingSet, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    save_dataset(ts, std::io::BufWriter::new(file))
}

/// Deterministic holdout split: shuffle by `seed`, then cut off
/// `round(fraction * n)` points. Returns `(holdout, rest)`; both parts must
/// be non-empty.
pub fn holdout_split(
    ts: &TrainingSet,
    fraction: f64,
    seed: u64,
) -> Result<(TrainingSet, TrainingSet)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "holdout fraction must lie in (0,1), got {fraction}"
        )));
    }
    let n = ts.len();
    let take = (fraction * n as f64).round() as usize;
    if take == 0 || take >= n {
        return Err(Error::Parameter(format!(
            "fraction {fraction} on {n} points leaves an empty part"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = SubstreamRng::new(SeedSpec::new(seed, 0), STREAM_SHUFFLE);
    // Fisher-Yates
    for i in (1..n).rev() {
        let j = rng.next_index(i + 1);
        order.swap(i, j);
    }
    let holdout: Vec<LabeledPoint> = order[..take]
        .iter()
        .map(|&i| ts.points()[i].clone())
        .collect();
    let rest: Vec<LabeledPoint> = order[take..]
        .iter()
        .map(|&i| ts.points()[i].clone())
        .collect();
    Ok((TrainingSet::new(holdout)?, TrainingSet::new(rest)?))
}

/// The canonical 4-point XOR toy set.
#[cfg(test)]
pub(crate) fn xor_set() -> TrainingSet {
    TrainingSet::new(vec![
        LabeledPoint::new(vec![0.0, 0.0], 0).unwrap(),
        LabeledPoint::new(vec![0.0, 1.0], 1).unwrap(),
        LabeledPoint::new(vec![1.0, 0.0], 1).unwrap(),
        LabeledPoint::new(vec![1.0, 1.0], 0).unwrap(),
    ])
    .unwrap()
}
