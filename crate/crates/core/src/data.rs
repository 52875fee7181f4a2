//! CSV ingestion, time-series shingling and synthetic benchmark generators.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::domain::{AttributeSpec, ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column names recognised as the label column when a schema does not name one.
pub const LABEL_COLUMNS: [&str; 2] = ["anomaly", "label"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaKind {
    Continuous,
    CategoricalOrdered,
    CategoricalUnordered,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: SchemaKind,
    /// Required for categorical columns unless `categories` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_size: Option<u32>,
    /// Category labels in code order; cells are matched against these strings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

/// Which CSV columns to read and how to type them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSchema>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Schema {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

enum Decoder {
    Continuous,
    Codes(u32),
    Named(HashMap<String, u32>),
}

struct Plan {
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
    index: Vec<usize>,
    decoders: Vec<Decoder>,
    label: Option<usize>,
}

fn plan(header: &csv::StringRecord, schema: Option<&Schema>) -> Result<Plan> {
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let listed: Vec<&str> = schema.map_or_else(Vec::new, |s| s.columns.iter().map(|c| c.name.as_str()).collect());
    let label = match schema.and_then(|s| s.label.as_deref()) {
        Some(name) => Some(position(name)?),
        None => header
            .iter()
            .position(|h| LABEL_COLUMNS.contains(&h) && !listed.contains(&h)),
    };

    let mut p = Plan {
        names: Vec::new(),
        kinds: Vec::new(),
        index: Vec::new(),
        decoders: Vec::new(),
        label,
    };
    match schema {
        Some(s) => {
            for c in &s.columns {
                let idx = position(&c.name)?;
                let bad = |reason: &str| Error::InvalidAttribute {
                    column: p.names.len(),
                    reason: format!("{}: {reason}", c.name),
                };
                let (kind, decoder) = match c.kind {
                    SchemaKind::Continuous => (ColumnKind::Continuous, Decoder::Continuous),
                    SchemaKind::CategoricalOrdered | SchemaKind::CategoricalUnordered => {
                        let (size, decoder) = match (&c.categories, c.domain_size) {
                            (Some(cats), size) => {
                                if size.is_some_and(|s| s as usize != cats.len()) {
                                    return Err(bad("domain_size disagrees with the category list"));
                                }
                                let map = cats.iter().enumerate().map(|(i, n)| (n.clone(), i as u32)).collect();
                                (cats.len() as u32, Decoder::Named(map))
                            }
                            (None, Some(size)) => (size, Decoder::Codes(size)),
                            (None, None) => return Err(bad("categorical column needs domain_size or categories")),
                        };
                        if size == 0 {
                            return Err(bad("empty category domain"));
                        }
                        let kind = if c.kind == SchemaKind::CategoricalOrdered {
                            ColumnKind::CategoricalOrdered { domain_size: size }
                        } else {
                            ColumnKind::CategoricalUnordered { domain_size: size }
                        };
                        (kind, decoder)
                    }
                };
                p.names.push(c.name.clone());
                p.kinds.push(kind);
                p.index.push(idx);
                p.decoders.push(decoder);
            }
        }
        None => {
            for (idx, name) in header.iter().enumerate() {
                if Some(idx) == label {
                    continue;
                }
                p.names.push(name.to_string());
                p.kinds.push(ColumnKind::Continuous);
                p.index.push(idx);
                p.decoders.push(Decoder::Continuous);
            }
        }
    }
    if p.names.is_empty() {
        return Err(Error::NoColumns);
    }
    Ok(p)
}

fn parse_label(cell: &str) -> Option<bool> {
    match cell.trim() {
        "1" | "true" | "True" | "TRUE" => Some(true),
        "0" | "false" | "False" | "FALSE" => Some(false),
        other => other.parse::<f64>().ok().filter(|v| *v == 0.0 || *v == 1.0).map(|v| v == 1.0),
    }
}

/// Reads a headed CSV into a dataset. Without a schema every column other
/// than a label column (`anomaly` or `label`) is continuous.
///
/// Row numbers in errors count data rows from 1.
pub fn read_csv<F: Scalar, R: Read>(reader: R, schema: Option<&Schema>) -> Result<Dataset<F>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let p = plan(&header, schema)?;
    let mut values = Vec::new();
    let mut labels = p.label.map(|_| Vec::new());
    let mut record = csv::StringRecord::new();
    let mut row = 0;
    while rdr.read_record(&mut record)? {
        row += 1;
        let parse_err = |column: &str, reason: String| Error::Parse {
            row,
            column: column.to_string(),
            reason,
        };
        for ((name, &idx), decoder) in p.names.iter().zip(&p.index).zip(&p.decoders) {
            let cell = record.get(idx).unwrap_or("");
            let v = match decoder {
                Decoder::Continuous => {
                    let v: f64 = cell.parse().map_err(|_| parse_err(name, format!("{cell:?} is not a number")))?;
                    if !v.is_finite() {
                        return Err(parse_err(name, format!("{cell:?} is not finite")));
                    }
                    F::of(v)
                }
                Decoder::Codes(size) => match cell.parse::<u32>() {
                    Ok(c) if c < *size => F::of_usize(c as usize),
                    _ => return Err(parse_err(name, format!("{cell:?} is not a code in [0, {size})"))),
                },
                Decoder::Named(map) => match map.get(cell) {
                    Some(&c) => F::of_usize(c as usize),
                    None => return Err(parse_err(name, format!("unknown category {cell:?}"))),
                },
            };
            values.push(v);
        }
        if let (Some(idx), Some(labels)) = (p.label, labels.as_mut()) {
            let cell = record.get(idx).unwrap_or("");
            let l = parse_label(cell).ok_or_else(|| parse_err(&header[idx], format!("{cell:?} is not a 0/1 label")))?;
            labels.push(l);
        }
    }
    if row == 0 {
        return Err(Error::EmptyInput);
    }
    Dataset::from_values(p.names, &p.kinds, values, labels)
}

pub fn load_csv<F: Scalar>(path: &Path, schema: Option<&Schema>) -> Result<Dataset<F>> {
    read_csv(std::fs::File::open(path)?, schema)
}

/// Writes the dataset with a header, appending an `anomaly` column when labelled.
pub fn write_csv<F: Scalar, W: Write>(writer: W, dataset: &Dataset<F>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = dataset.names().iter().map(String::as_str).collect();
    if dataset.labels().is_some() {
        header.push("anomaly");
    }
    w.write_record(&header)?;
    for (i, row) in dataset.rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = dataset.labels() {
            rec.push(u8::from(l[i]).to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// The schema describing a dataset's columns, for writing next to generated data.
pub fn schema_of<F: Scalar>(dataset: &Dataset<F>) -> Schema {
    let columns = dataset
        .names()
        .iter()
        .zip(dataset.columns())
        .map(|(name, spec)| {
            let (kind, domain_size) = match *spec {
                AttributeSpec::Continuous { .. } => (SchemaKind::Continuous, None),
                AttributeSpec::CategoricalOrdered { domain_size } => (SchemaKind::CategoricalOrdered, Some(domain_size)),
                AttributeSpec::CategoricalUnordered { domain_size } => (SchemaKind::CategoricalUnordered, Some(domain_size)),
            };
            ColumnSchema {
                name: name.clone(),
                kind,
                domain_size,
                categories: None,
            }
        })
        .collect();
    Schema {
        columns,
        label: dataset.labels().map(|_| "anomaly".to_string()),
    }
}

/// Sliding windows of width `w`; a window is anomalous if any of its time steps is.
pub fn shingle<F: Scalar>(series: &[F], labels: Option<&[bool]>, w: usize) -> Result<Dataset<F>> {
    if w == 0 {
        return Err(Error::InvalidParameter("window width must be positive".into()));
    }
    if series.len() < w {
        return Err(Error::SeriesTooShort { len: series.len(), width: w });
    }
    if let Some(l) = labels {
        if l.len() != series.len() {
            return Err(Error::Shape(format!("{} labels for a series of length {}", l.len(), series.len())));
        }
    }
    let rows = series.len() - w + 1;
    let mut values = Vec::with_capacity(rows * w);
    for win in series.windows(w) {
        values.extend_from_slice(win);
    }
    let window_labels = labels.map(|l| l.windows(w).map(|win| win.iter().any(|&b| b)).collect());
    let names = (0..w).map(|j| format!("t{j}")).collect();
    Dataset::from_values(names, &vec![ColumnKind::Continuous; w], values, window_labels)
}

/// A generated dataset plus the parameters needed to reproduce and describe it.
#[derive(Clone, Debug)]
pub struct Generated {
    pub dataset: Dataset<f64>,
    pub metadata: serde_json::Value,
}

/// Writes generator metadata as pretty JSON.
pub fn write_metadata(path: &Path, metadata: &serde_json::Value) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(metadata)?)?;
    Ok(())
}

fn names(prefix: &str, d: usize) -> Vec<String> {
    (0..d).map(|j| format!("{prefix}{j}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskingConfig {
    pub normal: usize,
    pub anomalies: usize,
    pub d: usize,
}

impl Default for MaskingConfig {
    fn default() -> Self {
        Self {
            normal: 970,
            anomalies: 30,
            d: 10,
        }
    }
}

/// Random corners of `{-1, 1}^d` plus a clump of identical all-zero anomalies, shuffled.
pub fn gen_masking(config: &MaskingConfig, seed: u64) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = config.d;
    let mut rows: Vec<(Vec<f64>, bool)> = (0..config.normal)
        .map(|_| ((0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(), false))
        .collect();
    rows.extend((0..config.anomalies).map(|_| (vec![0.0; d], true)));
    rows.shuffle(&mut rng);
    let labels = rows.iter().map(|r| r.1).collect();
    let values = rows.into_iter().flat_map(|r| r.0).collect();
    let dataset = Dataset::from_values(names("x", d), &vec![ColumnKind::Continuous; d], values, Some(labels))?;
    let metadata = json!({
        "generator": "masking",
        "seed": seed,
        "normal": config.normal,
        "anomalies": config.anomalies,
        "d": d,
    });
    Ok(Generated { dataset, metadata })
}

/// One planar Gaussian with covariance `R diag(l1, l2) R^T`, `R` a rotation by `angle`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarGaussian {
    pub mean: [f64; 2],
    pub angle: f64,
    pub eigenvalues: [f64; 2],
}

impl PlanarGaussian {
    fn axes(&self) -> ([f64; 2], [f64; 2]) {
        let (s, c) = self.angle.sin_cos();
        ([c, s], [-s, c])
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> [f64; 2] {
        let (u, v) = self.axes();
        let a: f64 = rng.sample::<f64, _>(StandardNormal) * self.eigenvalues[0].sqrt();
        let b: f64 = rng.sample::<f64, _>(StandardNormal) * self.eigenvalues[1].sqrt();
        [self.mean[0] + a * u[0] + b * v[0], self.mean[1] + a * u[1] + b * v[1]]
    }

    /// Density evaluated in the eigenbasis.
    pub fn density(&self, x: [f64; 2]) -> f64 {
        let (u, v) = self.axes();
        let dx = [x[0] - self.mean[0], x[1] - self.mean[1]];
        let a = dx[0] * u[0] + dx[1] * u[1];
        let b = dx[0] * v[0] + dx[1] * v[1];
        let [l1, l2] = self.eigenvalues;
        (-0.5 * (a * a / l1 + b * b / l2)).exp() / (2.0 * PI * (l1 * l2).sqrt())
    }
}

/// Equal-weight mixture of two planar Gaussians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub components: [PlanarGaussian; 2],
}

impl Mixture {
    pub fn density(&self, x: [f64; 2]) -> f64 {
        0.5 * self.components[0].density(x) + 0.5 * self.components[1].density(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureConfig {
    pub n: usize,
    pub anomalies: usize,
    pub d_noise: usize,
    pub noise_range: (f64, f64),
    pub mean_distance: f64,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            anomalies: 100,
            d_noise: 0,
            noise_range: (-2.0, 2.0),
            mean_distance: 5.0,
        }
    }
}

/// Two random-orientation planar Gaussians (eigenvalues 1 and 2) plus uniform
/// noise columns. The lowest-density points under the mixture are labelled.
pub fn gen_gaussian_mixture(config: &MixtureConfig, seed: u64) -> Result<Generated> {
    let (lo, hi) = config.noise_range;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("noise range [{lo}, {hi}] is empty")));
    }
    if config.anomalies > config.n {
        return Err(Error::InvalidParameter("more anomalies than points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let direction = rng.random_range(0.0..2.0 * PI);
    let mut component = |mean: [f64; 2]| PlanarGaussian {
        mean,
        angle: rng.random_range(0.0..PI),
        eigenvalues: [1.0, 2.0],
    };
    let first = component([0.0, 0.0]);
    let second = component([config.mean_distance * direction.cos(), config.mean_distance * direction.sin()]);
    let mixture = Mixture {
        components: [first, second],
    };

    let d = 2 + config.d_noise;
    let mut values = Vec::with_capacity(config.n * d);
    let mut density = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let which = usize::from(rng.random::<bool>());
        let p = mixture.components[which].sample(&mut rng);
        density.push(mixture.density(p));
        values.extend_from_slice(&p);
        values.extend((0..config.d_noise).map(|_| rng.random_range(lo..hi)));
    }
    let mut order: Vec<usize> = (0..config.n).collect();
    order.sort_by(|&a, &b| density[a].total_cmp(&density[b]).then(a.cmp(&b)));
    let mut labels = vec![false; config.n];
    for &i in &order[..config.anomalies] {
        labels[i] = true;
    }

    let mut names = vec!["g0".to_string(), "g1".to_string()];
    names.extend((0..config.d_noise).map(|j| format!("noise{j}")));
    let dataset = Dataset::from_values(names, &vec![ColumnKind::Continuous; d], values, Some(labels))?;
    let metadata = json!({
        "generator": "gaussian",
        "seed": seed,
        "n": config.n,
        "anomalies": config.anomalies,
        "d_noise": config.d_noise,
        "noise_range": [lo, hi],
        "weights": [0.5, 0.5],
        "mixture": mixture,
    });
    Ok(Generated { dataset, metadata })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineConfig {
    pub length: usize,
    pub period: f64,
    pub amplitude: f64,
    pub segments: usize,
    pub segment_length: usize,
    pub noise_sigma: f64,
}

impl Default for SineConfig {
    fn default() -> Self {
        Self {
            length: 4000,
            period: 40.0,
            amplitude: 1.0,
            segments: 10,
            segment_length: 20,
            noise_sigma: 0.05,
        }
    }
}

/// A labelled time series.
#[derive(Clone, Debug)]
pub struct Series {
    pub values: Vec<f64>,
    pub labels: Vec<bool>,
    /// Time step whose value each frozen segment repeats; the segment is the next `segment_length` steps.
    pub anchors: Vec<usize>,
    pub metadata: serde_json::Value,
}

impl Series {
    /// The series as a one-column dataset named `value`.
    pub fn to_dataset(&self) -> Result<Dataset<f64>> {
        Dataset::from_values(
            vec!["value".into()],
            &[ColumnKind::Continuous],
            self.values.clone(),
            Some(self.labels.clone()),
        )
    }
}

/// A sine wave with segments where the value is held fixed, plus Gaussian noise.
///
/// Frozen segments are separated from each other by at least one period.
pub fn gen_sine(config: &SineConfig, seed: u64) -> Result<Series> {
    let SineConfig {
        length,
        period,
        amplitude,
        segments,
        segment_length,
        noise_sigma,
    } = *config;
    if !(period > 0.0) || noise_sigma < 0.0 {
        return Err(Error::InvalidParameter("period must be positive and noise nonnegative".into()));
    }
    if segments > 0 && length <= segment_length + 1 {
        return Err(Error::SeriesTooShort { len: length, width: segment_length + 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = segment_length + period.ceil() as usize;
    let mut anchors: Vec<usize> = Vec::with_capacity(segments);
    let mut attempts = 0;
    while anchors.len() < segments {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::InvalidParameter(format!(
                "cannot place {segments} separated segments in a series of length {length}"
            )));
        }
        let a = rng.random_range(0..length - segment_length);
        if anchors.iter().all(|&b| a.abs_diff(b) >= gap) {
            anchors.push(a);
        }
    }
    anchors.sort_unstable();

    let mut values: Vec<f64> = (0..length).map(|i| amplitude * (2.0 * PI * i as f64 / period).sin()).collect();
    let mut labels = vec![false; length];
    for &a in &anchors {
        for i in a + 1..=a + segment_length {
            values[i] = values[a];
            labels[i] = true;
        }
    }
    if noise_sigma > 0.0 {
        for v in &mut values {
            *v += noise_sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }
    let metadata = json!({
        "generator": "sine",
        "seed": seed,
        "length": length,
        "period": period,
        "amplitude": amplitude,
        "segments": segments,
        "segment_length": segment_length,
        "noise_sigma": noise_sigma,
        "anchors": anchors,
    });
    Ok(Series {
        values,
        labels,
        anchors,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_typed_columns_and_labels() {
        let text = "a,b,anomaly\n1,2,0\n3,4,1\n5,6,0\n";
        let ds: Dataset<f64> = read_csv(text.as_bytes(), None).unwrap();
        assert_eq!((ds.n(), ds.d()), (3, 2));
        assert_eq!(ds.labels().unwrap(), &[false, true, false]);

        let schema = Schema::from_json(
            r#"{"columns":[{"name":"b","kind":"continuous"},
                {"name":"c","kind":"categorical_unordered","categories":["x","y","z"]},
                {"name":"o","kind":"categorical_ordered","domain_size":4}],"label":"anomaly"}"#,
        )
        .unwrap();
        let text = "c,b,o,anomaly\ny,2.5,3,1\nz,1,0,0\n";
        let ds: Dataset<f64> = read_csv(text.as_bytes(), Some(&schema)).unwrap();
        assert_eq!(ds.names(), &["b", "c", "o"]);
        assert_eq!(ds.row(0), &[2.5, 1.0, 3.0]);
        assert_eq!(ds.columns()[1], AttributeSpec::CategoricalUnordered { domain_size: 3 });
    }

    #[test]
    fn errors_name_row_and_column() {
        let err = read_csv::<f64, _>("a,b\n1,2\n3,oops\n".as_bytes(), None).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => assert_eq!((row, column.as_str()), (2, "b")),
            e => panic!("unexpected {e}"),
        }
        let schema = Schema::from_json(r#"{"columns":[{"name":"z","kind":"continuous"}]}"#).unwrap();
        assert!(matches!(read_csv::<f64, _>("a\n1\n".as_bytes(), Some(&schema)), Err(Error::MissingColumn(_))));
        let schema = Schema::from_json(r#"{"columns":[{"name":"a","kind":"categorical_ordered","domain_size":2}]}"#).unwrap();
        assert!(matches!(read_csv::<f64, _>("a\n5\n".as_bytes(), Some(&schema)), Err(Error::Parse { .. })));
        assert!(matches!(read_csv::<f64, _>("a\n".as_bytes(), None), Err(Error::EmptyInput)));
    }

    #[test]
    fn csv_round_trip() {
        let g = gen_masking(&MaskingConfig::default(), 3).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &g.dataset).unwrap();
        let back: Dataset<f64> = read_csv(buf.as_slice(), None).unwrap();
        assert_eq!(back, g.dataset);
    }

    #[test]
    fn shingle_examples() {
        let ds = shingle(&[1.0, 2.0, 3.0, 4.0], None, 2).unwrap();
        assert_eq!(ds.values(), &[1.0, 2.0, 2.0, 3.0, 3.0, 4.0]);
        let ds = shingle(&[7.0; 5], Some(&[false, false, true, false, false]), 2).unwrap();
        assert!(ds.rows().all(|r| r == [7.0, 7.0]));
        assert_eq!(ds.labels().unwrap(), &[false, true, true, false]);
        assert!(matches!(shingle(&[1.0], None, 2), Err(Error::SeriesTooShort { .. })));
        let long = vec![0.5; 10_000];
        assert_eq!(shingle(&long, None, 10).unwrap().n(), 9991);
    }

    #[test]
    fn masking_shape() {
        let g = gen_masking(&MaskingConfig::default(), 7).unwrap();
        let ds = &g.dataset;
        assert_eq!((ds.n(), ds.d()), (1000, 10));
        let labels = ds.labels().unwrap();
        assert_eq!(labels.iter().filter(|&&b| b).count(), 30);
        for (i, row) in ds.rows().enumerate() {
            if labels[i] {
                assert!(row.iter().all(|&v| v == 0.0));
            } else {
                assert!(row.iter().all(|&v| v == 1.0 || v == -1.0));
            }
        }
        // 970 draws from 1024 corners: most points are unique.
        let mut corners: Vec<Vec<i8>> = ds
            .rows()
            .zip(labels)
            .filter(|(_, &l)| !l)
            .map(|(r, _)| r.iter().map(|&v| v as i8).collect())
            .collect();
        corners.sort();
        corners.dedup();
        assert!(corners.len() > 970 / 2);
    }

    #[test]
    fn mixture_density_matches_matrix_form() {
        let g = gen_gaussian_mixture(&MixtureConfig::default(), 11).unwrap();
        let mixture: Mixture = serde_json::from_value(g.metadata["mixture"].clone()).unwrap();
        // Covariance assembled explicitly and inverted with the 2x2 adjugate.
        let pdf = |c: &PlanarGaussian, x: [f64; 2]| {
            let (s, co) = c.angle.sin_cos();
            let [l1, l2] = c.eigenvalues;
            let (a, b, d) = (l1 * co * co + l2 * s * s, (l1 - l2) * co * s, l1 * s * s + l2 * co * co);
            let det = a * d - b * b;
            let (dx, dy) = (x[0] - c.mean[0], x[1] - c.mean[1]);
            let q = (d * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
            (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
        };
        let ds = &g.dataset;
        let dens: Vec<f64> = ds
            .rows()
            .map(|r| 0.5 * pdf(&mixture.components[0], [r[0], r[1]]) + 0.5 * pdf(&mixture.components[1], [r[0], r[1]]))
            .collect();
        for (r, &p) in ds.rows().zip(&dens) {
            assert!((mixture.density([r[0], r[1]]) - p).abs() <= 1e-12 * p.max(1e-300));
        }
        let mut order: Vec<usize> = (0..ds.n()).collect();
        order.sort_by(|&a, &b| dens[a].total_cmp(&dens[b]));
        let labels = ds.labels().unwrap();
        assert!(order[..100].iter().all(|&i| labels[i]));
    }

    #[test]
    fn mixture_noise_columns() {
        let c = MixtureConfig { d_noise: 3, noise_range: (-10.0, 10.0), ..Default::default() };
        let g = gen_gaussian_mixture(&c, 1).unwrap();
        assert_eq!(g.dataset.d(), 5);
        assert!(g.dataset.column(4).all(|v| (-10.0..10.0).contains(&v)));
        assert!(g.dataset.column(4).any(|v| v.abs() > 2.0));
        assert_eq!(g.dataset.labels().unwrap().iter().filter(|&&b| b).count(), 100);
        let g0 = gen_gaussian_mixture(&MixtureConfig::default(), 1).unwrap();
        assert_eq!(g0.dataset.d(), 2);
    }

    #[test]
    fn sine_segments() {
        let c = SineConfig { noise_sigma: 0.0, ..Default::default() };
        let s = gen_sine(&c, 5).unwrap();
        assert_eq!(s.values.len(), 4000);
        assert_eq!(s.anchors.len(), 10);
        assert_eq!(s.labels.iter().filter(|&&b| b).count(), 200);
        for w in s.anchors.windows(2) {
            assert!(w[1] - w[0] >= 20 + 40);
        }
        for &a in &s.anchors {
            assert!(s.values[a + 1..=a + 20].iter().all(|&v| v == s.values[a]));
        }
        let plain = gen_sine(&SineConfig { segments: 0, noise_sigma: 0.0, ..Default::default() }, 5).unwrap();
        for (i, v) in plain.values.iter().enumerate() {
            assert_eq!(*v, (2.0 * PI * i as f64 / 40.0).sin());
        }
        assert!(plain.labels.iter().all(|&b| !b));
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_gaussian_mixture(&MixtureConfig::default(), 9).unwrap();
        let b = gen_gaussian_mixture(&MixtureConfig::default(), 9).unwrap();
        assert_eq!(a.dataset, b.dataset);
        let c = gen_gaussian_mixture(&MixtureConfig::default(), 10).unwrap();
        assert_ne!(a.dataset, c.dataset);
        assert_eq!(gen_sine(&SineConfig::default(), 2).unwrap().values, gen_sine(&SineConfig::default(), 2).unwrap().values);
    }
}
