//! Subcommand implementations.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use pidforest::baseline::{IsoParams, IsolationForest};
use pidforest::data::{
    gen_gaussian_mixture, gen_masking, gen_sine, load_csv, schema_of, shingle, write_csv, write_metadata, ColumnSchema,
    Generated, MaskingConfig, MixtureConfig, Schema, SchemaKind, SineConfig,
};
use pidforest::eval;
use pidforest::forest::{FeatureRange, ScoreReport};
use pidforest::oracle::{self, BooleanDataset};
use pidforest::{ColumnTransform, Dataset, Error, Forest, HyperParams, Interval, ScoreMode};
use serde_json::{json, Value};

use crate::failure::{Failure, Kind};
use crate::{Detector, EvalArgs, FitArgs, Format, Generator, Metric, OracleArgs, OracleKind, ScoreArgs, ScoreBy};

type Outcome = Result<(), Failure>;

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Failure::from(e).context(p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_schema(path: Option<&Path>) -> Result<Option<Schema>, Failure> {
    path.map(|p| Schema::load(p).map_err(|e| Failure::from(e).context(p.display())))
        .transpose()
}

fn read_data(path: &Path, schema: Option<&Schema>) -> Result<Dataset<f64>, Failure> {
    load_csv(path, schema).map_err(|e| Failure::from(e).context(path.display()))
}

/// The read schema implied by a model: its columns, typed by their stored transforms.
fn model_schema(forest: &Forest<f64>) -> Schema {
    let columns = forest
        .names()
        .iter()
        .zip(&forest.transform().columns)
        .map(|(name, t)| {
            let (kind, domain_size) = match *t {
                ColumnTransform::Affine { .. } | ColumnTransform::Constant { .. } => (SchemaKind::Continuous, None),
                ColumnTransform::Ordered { domain_size } => (SchemaKind::CategoricalOrdered, Some(domain_size)),
                ColumnTransform::Unordered { domain_size } => (SchemaKind::CategoricalUnordered, Some(domain_size)),
            };
            ColumnSchema {
                name: name.clone(),
                kind,
                domain_size,
                categories: None,
            }
        })
        .collect();
    Schema { columns, label: None }
}

pub fn fit(a: &FitArgs) -> Outcome {
    let schema = read_schema(a.schema.as_deref())?;
    let ds = read_data(&a.input, schema.as_ref())?;
    let params = HyperParams {
        num_trees: a.trees,
        samples_per_tree: a.samples,
        max_degree: a.degree,
        max_depth: a.depth,
        seed: a.seed,
    };
    let forest = Forest::fit(&ds, &params)?;
    forest.save(&a.out).map_err(|e| Failure::from(e).context(a.out.display()))?;
    Ok(())
}

fn range_cells(range: &FeatureRange<f64>) -> [String; 2] {
    match range {
        FeatureRange::Range { lo, hi } => [lo.to_string(), hi.to_string()],
        // Unordered witnesses list their admissible codes in the `lo` cell.
        FeatureRange::Codes(codes) => [codes.iter().map(u32::to_string).collect::<Vec<_>>().join(";"), String::new()],
    }
}

fn write_scores_csv(out: Box<dyn Write>, reports: &[ScoreReport<f64>], width: usize) -> Outcome {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["row_id".to_string(), "score".to_string()];
    for i in 1..=width {
        header.extend([format!("witness_{i}_col"), format!("witness_{i}_lo"), format!("witness_{i}_hi")]);
    }
    w.write_record(&header).map_err(Error::from)?;
    for (row, r) in reports.iter().enumerate() {
        let mut rec = vec![row.to_string(), r.score.to_string()];
        for i in 0..width {
            match r.witness.get(i) {
                Some(f) => {
                    rec.push(f.name.clone());
                    rec.extend(range_cells(&f.range));
                }
                None => rec.extend([String::new(), String::new(), String::new()]),
            }
        }
        w.write_record(&rec).map_err(Error::from)?;
    }
    w.flush()?;
    Ok(())
}

fn write_scores_jsonl(mut out: Box<dyn Write>, reports: &[ScoreReport<f64>]) -> Outcome {
    for (row, r) in reports.iter().enumerate() {
        let line = json!({
            "row_id": row,
            "score": r.score,
            "tree": r.tree,
            "leaf": r.leaf,
            "witness": r.witness,
        });
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn score(a: &ScoreArgs) -> Outcome {
    let forest = Forest::<f64>::load(&a.model).map_err(|e| Failure::from(e).into_model_error().context(a.model.display()))?;
    let schema = match read_schema(a.schema.as_deref())? {
        Some(s) => s,
        None => model_schema(&forest),
    };
    let ds = read_data(&a.input, Some(&schema))?;
    let mode = match a.score_by {
        ScoreBy::Sparsity => ScoreMode::Sparsity,
        ScoreBy::Depth => ScoreMode::Depth,
    };
    let reports = forest.score(&ds, mode)?;
    let out = sink(a.out.as_deref())?;
    match a.format {
        Format::Csv => write_scores_csv(out, &reports, a.witness),
        Format::Jsonl => write_scores_jsonl(out, &reports),
    }
}

fn parse_label(cell: &str) -> Option<bool> {
    match cell.trim() {
        "1" | "true" | "True" | "TRUE" => Some(true),
        "0" | "false" | "False" | "FALSE" => Some(false),
        other => other.parse::<f64>().ok().filter(|v| *v == 0.0 || *v == 1.0).map(|v| v == 1.0),
    }
}

/// Reads one named column (the first of `names` present) from a headed CSV.
fn read_column<T>(path: &Path, names: &[&str], parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>, Failure> {
    let file = File::open(path).map_err(|e| Failure::from(e).context(path.display()))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let header = rdr.headers().map_err(Error::from)?.clone();
    let (idx, name) = names
        .iter()
        .find_map(|n| header.iter().position(|h| h == *n).map(|i| (i, *n)))
        .ok_or_else(|| Failure::from(Error::MissingColumn(names.join("|"))).context(path.display()))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(Error::from)?;
        let cell = rec.get(idx).unwrap_or("");
        let v = parse(cell).ok_or_else(|| {
            Failure::from(Error::Parse {
                row: i + 1,
                column: name.to_string(),
                reason: format!("{cell:?} is not valid"),
            })
            .context(path.display())
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn eval(a: &EvalArgs) -> Outcome {
    let scores: Vec<f64> = read_column(&a.scores, &["score"], |c| c.parse::<f64>().ok().filter(|v| !v.is_nan()))?;
    let labels: Vec<bool> = read_column(&a.labels, &pidforest::data::LABEL_COLUMNS, parse_label)?;
    if scores.len() != labels.len() {
        return Err(Failure::new(Kind::Schema, format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    match a.metric {
        Metric::Auc => println!("auc={}", eval::auc(&scores, &labels)?),
        Metric::Topfrac => {
            let recall = eval::top_fraction_accuracy(&scores, &labels, a.fraction)?;
            let precision = eval::top_fraction_precision(&scores, &labels, a.fraction)?;
            println!("topfrac={recall} precision={precision} fraction={}", a.fraction);
        }
    }
    if let Some(path) = &a.roc_out {
        let points = eval::roc_points(&scores, &labels)?;
        eval::write_roc_csv(sink(Some(path))?, &points)?;
    }
    Ok(())
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_generated(g: &Generated, out: &Path) -> Outcome {
    write_csv(sink(Some(out))?, &g.dataset)?;
    write_metadata(&sidecar(out, ".meta.json"), &g.metadata)?;
    let schema = serde_json::to_string_pretty(&schema_of(&g.dataset)).map_err(Error::from)?;
    std::fs::write(sidecar(out, ".schema.json"), schema)?;
    Ok(())
}

pub fn synth(g: &Generator) -> Outcome {
    match g {
        Generator::Masking { normal, anomalies, dim, common } => {
            let cfg = MaskingConfig {
                normal: *normal,
                anomalies: *anomalies,
                d: *dim,
            };
            write_generated(&gen_masking(&cfg, common.seed)?, &common.out)
        }
        Generator::Gaussian {
            n,
            anomalies,
            d_noise,
            noise_lo,
            noise_hi,
            mean_distance,
            common,
        } => {
            let cfg = MixtureConfig {
                n: *n,
                anomalies: *anomalies,
                d_noise: *d_noise,
                noise_range: (*noise_lo, *noise_hi),
                mean_distance: *mean_distance,
            };
            write_generated(&gen_gaussian_mixture(&cfg, common.seed)?, &common.out)
        }
        Generator::Sine {
            length,
            period,
            amplitude,
            segments,
            segment_length,
            noise_sigma,
            window,
            common,
        } => {
            let cfg = SineConfig {
                length: *length,
                period: *period,
                amplitude: *amplitude,
                segments: *segments,
                segment_length: *segment_length,
                noise_sigma: *noise_sigma,
            };
            let series = gen_sine(&cfg, common.seed)?;
            let mut metadata = series.metadata.clone();
            let dataset = match window {
                Some(w) => {
                    if let Value::Object(m) = &mut metadata {
                        m.insert("window".into(), json!(w));
                    }
                    shingle(&series.values, Some(&series.labels), *w)?
                }
                None => series.to_dataset()?,
            };
            write_generated(&Generated { dataset, metadata }, &common.out)
        }
    }
}

fn interval_cells(i: &Interval<f64>) -> [String; 2] {
    match i {
        Interval::Range { lo, hi } => [lo.to_string(), hi.to_string()],
        Interval::Codes { codes, .. } => [codes.iter().map(u32::to_string).collect::<Vec<_>>().join(";"), String::new()],
    }
}

pub fn oracle(a: &OracleArgs) -> Outcome {
    let ds = read_data(&a.input, None)?;
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    match a.kind {
        OracleKind::Pid1d => {
            if ds.d() != 1 {
                return Err(Failure::new(Kind::Data, format!("pid1d needs one column, found {}", ds.d())));
            }
            let scores = oracle::pidscore_1d(ds.values())?;
            w.write_record(["row_id", "log2_score", "lo", "hi"]).map_err(Error::from)?;
            for (i, s) in scores.iter().enumerate() {
                w.write_record([i.to_string(), s.log2_score.to_string(), s.lo.to_string(), s.hi.to_string()])
                    .map_err(Error::from)?;
            }
        }
        OracleKind::Boolean => {
            let rows = ds
                .rows()
                .enumerate()
                .map(|(i, r)| {
                    r.iter()
                        .enumerate()
                        .map(|(j, &v)| {
                            if v == 0.0 || v == 1.0 {
                                Ok(v as u8)
                            } else {
                                Err(Error::OutOfDomain {
                                    row: i + 1,
                                    column: j,
                                    reason: format!("{v} is not Boolean"),
                                })
                            }
                        })
                        .collect()
                })
                .collect::<Result<Vec<Vec<u8>>, Error>>()?;
            let data = BooleanDataset::from_rows(&rows)?;
            w.write_record(["row_id", "id_length", "pid_length", "pid_coords", "log2_max_sparsity"])
                .map_err(Error::from)?;
            for (i, &x) in data.points().iter().enumerate() {
                let id = match oracle::id_length(x, &data) {
                    Ok(len) => len.to_string(),
                    Err(Error::DuplicatePoints) => String::new(),
                    Err(e) => return Err(e.into()),
                };
                let pid = oracle::pid_length_boolean(x, &data)?;
                let coords = pid.coords.iter().map(|c| ds.names()[*c].clone()).collect::<Vec<_>>().join(";");
                let best = oracle::max_boolean_subcube_sparsity(x, &data)?;
                w.write_record([i.to_string(), id, pid.length().to_string(), coords, best.log2().to_string()])
                    .map_err(Error::from)?;
            }
        }
        OracleKind::Subcube => {
            let points: Vec<Vec<f64>> = ds.rows().map(<[f64]>::to_vec).collect();
            let mut header = vec!["row_id".to_string(), "log2_score".to_string()];
            for name in ds.names() {
                header.extend([format!("{name}_lo"), format!("{name}_hi")]);
            }
            w.write_record(&header).map_err(Error::from)?;
            for (i, x) in points.iter().enumerate() {
                let (score, cube) = oracle::pidscore_bruteforce(x, &points)?;
                let mut rec = vec![i.to_string(), score.to_string()];
                for interval in cube.intervals() {
                    rec.extend(interval_cells(interval));
                }
                w.write_record(&rec).map_err(Error::from)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn baseline(d: &Detector) -> Outcome {
    let Detector::Iforest {
        input,
        schema,
        score_input,
        trees,
        samples,
        seed,
        out,
    } = d;
    let schema = read_schema(schema.as_deref())?;
    let train = read_data(input, schema.as_ref())?;
    let params = IsoParams {
        num_trees: *trees,
        samples_per_tree: *samples,
        seed: *seed,
    };
    let model = IsolationForest::fit(&train, &params)?;
    let scores = match score_input {
        Some(p) => model.score_values(&read_data(p, schema.as_ref())?)?,
        None => model.score_values(&train)?,
    };
    let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
    w.write_record(["row_id", "score"]).map_err(Error::from)?;
    for (i, s) in scores.iter().enumerate() {
        w.write_record([i.to_string(), s.to_string()]).map_err(Error::from)?;
    }
    w.flush()?;
    Ok(())
}
