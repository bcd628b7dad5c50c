//! Datasets: synthetic Gaussian benchmarks, CSV ingestion and min-max scaling.
//!
//! The CSV format is a header row `f0,...,f{D-1},label` followed by one example
//! per line: decimal features and a non-negative integer class id in the last
//! column. Features are written in shortest round-trip form, so a
//! save/load cycle is value-exact.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, LabelVector, Result};

/// Class mix used by the default three-class benchmark (minority, middle, majority).
pub const DEFAULT_PROPORTIONS: [f64; 3] = [0.1660, 0.3445, 0.4894];

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: LabelVector,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: LabelVector, classes: usize) -> Result<Self> {
        labels.check_against(features.nrows(), classes)?;
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset features".into()));
        }
        let feature_names = (0..features.ncols()).map(|d| format!("f{d}")).collect();
        let class_names = (0..classes).map(|k| format!("class{k}")).collect();
        Ok(Self { features, labels, feature_names, class_names })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }

    pub fn dims(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    /// Rows `rows` as a batch of features with their labels.
    pub fn select(&self, rows: &[usize]) -> (Array2<f64>, LabelVector) {
        let x = self.features.select(ndarray::Axis(0), rows);
        (x, self.labels.select(rows))
    }

    /// Same data, reinterpreted as having `classes` classes.
    pub fn with_classes(mut self, classes: usize) -> Result<Self> {
        self.labels.check_against(self.len(), classes)?;
        self.class_names = (0..classes).map(|k| format!("class{k}")).collect();
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// Isotropic Gaussian blobs, one per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub dims: usize,
    /// `classes` rows of `dims` values.
    pub class_means: Vec<Vec<f64>>,
    /// Per-class standard deviation.
    pub spread: Vec<f64>,
    /// Class proportions; uniform when absent.
    pub proportions: Option<Vec<f64>>,
    /// Example counts per split; per-class counts follow the proportions.
    pub sizes: SplitSizes,
    pub seed: u64,
}

impl SyntheticSpec {
    /// The default limited-data benchmark: three overlapping classes with an
    /// imbalanced mix, 300/300/1500 examples.
    pub fn limited_data(seed: u64) -> Self {
        let dims = 8;
        Self {
            classes: 3,
            dims,
            class_means: vec![
                blob_center(dims, &[(0, 2.0), (1, 1.2)]),
                blob_center(dims, &[(0, 1.0), (2, 1.2)]),
                blob_center(dims, &[(1, -0.4), (2, -0.6)]),
            ],
            spread: vec![1.0; 3],
            proportions: Some(DEFAULT_PROPORTIONS.to_vec()),
            sizes: SplitSizes { train: 300, val: 300, test: 1500 },
            seed,
        }
    }

    /// Three well-separated blobs with the default class mix and a larger
    /// training split (1000/300/1500).
    pub fn separable(seed: u64) -> Self {
        let dims = 4;
        Self {
            classes: 3,
            dims,
            class_means: vec![
                blob_center(dims, &[(0, 4.0)]),
                blob_center(dims, &[(1, 4.0)]),
                blob_center(dims, &[(2, 4.0)]),
            ],
            spread: vec![0.05; 3],
            proportions: Some(DEFAULT_PROPORTIONS.to_vec()),
            sizes: SplitSizes { train: 1000, val: 300, test: 1500 },
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    fn validate(&self) -> Result<Vec<f64>> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.classes));
        }
        if self.dims == 0 {
            return bad("need at least one feature dimension".into());
        }
        if self.class_means.len() != self.classes || self.class_means.iter().any(|m| m.len() != self.dims) {
            return bad(format!("class_means must be {}x{}", self.classes, self.dims));
        }
        if self.class_means.iter().flatten().any(|v| !v.is_finite()) {
            return bad("class means must be finite".into());
        }
        if self.spread.len() != self.classes || self.spread.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return bad("spread must hold one positive finite value per class".into());
        }
        let props = match &self.proportions {
            None => vec![1.0 / self.classes as f64; self.classes],
            Some(p) => {
                let total: f64 = p.iter().sum();
                if p.len() != self.classes
                    || p.iter().any(|&v| v.is_nan() || v <= 0.0)
                    || (total - 1.0).abs() > 1e-3
                {
                    return bad(format!("proportions must be {} positive values summing to 1", self.classes));
                }
                p.iter().map(|v| v / total).collect()
            }
        };
        for (name, n) in [("train", self.sizes.train), ("val", self.sizes.val), ("test", self.sizes.test)] {
            if class_counts(n, &props).contains(&0) {
                return bad(format!("{name} split of {n} leaves a class empty"));
            }
        }
        Ok(props)
    }
}

fn blob_center(dims: usize, entries: &[(usize, f64)]) -> Vec<f64> {
    let mut v = vec![0.0; dims];
    for &(d, x) in entries {
        v[d] = x;
    }
    v
}

/// Largest-remainder apportionment of `total` examples over `props`.
pub fn class_counts(total: usize, props: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = props.iter().map(|p| p * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..props.len()).collect();
    // Stable sort keeps ties in class order.
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let missing = total - counts.iter().sum::<usize>();
    for &k in order.iter().take(missing) {
        counts[k] += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

fn draw_split(spec: &SyntheticSpec, props: &[f64], n: usize, stream: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    let counts = class_counts(n, props);
    let mut labels: Vec<usize> =
        counts.iter().enumerate().flat_map(|(k, &m)| std::iter::repeat_n(k, m)).collect();
    labels.shuffle(&mut rng);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let mut features = Array2::zeros((n, spec.dims));
    for (mut row, &y) in features.rows_mut().into_iter().zip(&labels) {
        for (d, v) in row.iter_mut().enumerate() {
            *v = spec.class_means[y][d] + spec.spread[y] * noise.sample(&mut rng);
        }
    }
    Dataset::new(features, LabelVector::new(labels)?, spec.classes)
}

/// Draws train, validation and test splits independently from the same blobs.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<Splits> {
    let props = spec.validate()?;
    Ok(Splits {
        train: draw_split(spec, &props, spec.sizes.train, 0)?,
        val: draw_split(spec, &props, spec.sizes.val, 1)?,
        test: draw_split(spec, &props, spec.sizes.test, 2)?,
    })
}

pub fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = std::io::BufWriter::new(File::create(path).map_err(io)?);
    let mut header: Vec<String> = (0..data.dims()).map(|d| format!("f{d}")).collect();
    header.push("label".into());
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for (row, y) in data.features.rows().into_iter().zip(data.labels.as_slice()) {
        let mut line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        line.push(y.to_string());
        writeln!(out, "{}", line.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("ragged row: expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    };
    Error::Parse { line, message }
}

/// Reads the CSV format described in the module docs.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.iter().next_back().map(str::trim) != Some("label") {
        return Err(Error::Parse {
            line: 1,
            message: "missing 'label' column (must be the last header field)".into(),
        });
    }
    let dims = header.len() - 1;
    let mut flat = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        for (d, cell) in record.iter().take(dims).enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {}: '{cell}' is not a number", header[d].trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column {}: non-finite value", header[d].trim()),
                });
            }
            flat.push(v);
        }
        let cell = record[dims].trim();
        let y: usize = cell.parse().map_err(|_| Error::Parse {
            line,
            message: format!("label '{cell}' is not a non-negative integer"),
        })?;
        labels.push(y);
    }
    if labels.is_empty() {
        return Err(Error::Parse { line: 1, message: "no data rows".into() });
    }
    let n = labels.len();
    let labels = LabelVector::new(labels)?;
    let classes = labels.implied_classes().max(2);
    let features = Array2::from_shape_vec((n, dims), flat).map_err(|e| Error::Shape(e.to_string()))?;
    let mut data = Dataset::new(features, labels, classes)?;
    data.feature_names = header.iter().take(dims).map(|h| h.trim().to_string()).collect();
    Ok(data)
}

/// Per-feature range fitted on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_minmax(train: &Dataset) -> Result<NormalizationParams> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("cannot fit min-max on an empty split".into()));
    }
    let cols = train.features.columns();
    Ok(NormalizationParams {
        min: cols.into_iter().map(|c| c.fold(f64::INFINITY, |m, &v| m.min(v))).collect(),
        max: train
            .features
            .columns()
            .into_iter()
            .map(|c| c.fold(f64::NEG_INFINITY, |m, &v| m.max(v)))
            .collect(),
    })
}

impl NormalizationParams {
    /// Maps each feature to `[0, 1]` using the fitted range, clamping values
    /// outside it. Constant features map to 0.
    pub fn apply(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.min.len() {
            return Err(Error::Shape(format!(
                "{} features, normalisation fitted on {}",
                features.ncols(),
                self.min.len()
            )));
        }
        let mut out = features.to_owned();
        for (d, mut col) in out.columns_mut().into_iter().enumerate() {
            let (lo, hi) = (self.min[d], self.max[d]);
            let range = hi - lo;
            col.mapv_inplace(|v| if range > 0.0 { ((v - lo) / range).clamp(0.0, 1.0) } else { 0.0 });
        }
        Ok(out)
    }
}

pub fn apply_minmax(params: &NormalizationParams, data: &Dataset) -> Result<Dataset> {
    Ok(Dataset { features: params.apply(data.features.view())?, ..data.clone() })
}
