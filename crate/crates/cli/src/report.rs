//! CSV and JSON report files, each with a matching reader.
//!
//! Floats are written with Rust's shortest round-trip formatting; undefined
//! values are empty CSV cells or JSON `null`.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use rocktex::descriptors::{DescriptorParams, Method};
use rocktex::evaluation::{
    binary_tallies, metrics, per_class_report, Aggregate, BinaryTallies, ConfusionMatrix, Metrics,
};
use rocktex::similarity::Metric;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::archive::SCHEMA_VERSION;

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn parse_f64(cell: &str, what: &str) -> Result<f64> {
    cell.parse().with_context(|| format!("{what}: '{cell}' is not a number"))
}

fn parse_opt(cell: &str, what: &str) -> Result<Option<f64>> {
    if cell.is_empty() {
        Ok(None)
    } else {
        parse_f64(cell, what).map(Some)
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))
}

/// Square distance matrix labelled by file.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTable {
    pub files: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

pub fn write_similarity(path: &Path, table: &SimilarityTable) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(std::iter::once("file").chain(table.files.iter().map(String::as_str)))?;
    for (file, row) in table.files.iter().zip(&table.matrix) {
        w.write_record(std::iter::once(file.clone()).chain(row.iter().map(f64::to_string)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_similarity(path: &Path) -> Result<SimilarityTable> {
    let mut r = reader(path)?;
    let files: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
    let mut matrix = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        ensure!(rec.get(0) == files.get(i).map(String::as_str), "{}: row {i} label mismatch", path.display());
        let row = rec
            .iter()
            .skip(1)
            .map(|c| parse_f64(c, "distance"))
            .collect::<Result<Vec<_>>>()?;
        ensure!(row.len() == files.len(), "{}: row {i} has {} cells", path.display(), row.len());
        matrix.push(row);
    }
    ensure!(matrix.len() == files.len(), "{}: matrix is not square", path.display());
    Ok(SimilarityTable { files, matrix })
}

/// Mean distances for one class: between distinct members, and from members
/// to every other image.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMeanRow {
    pub label: String,
    pub class: String,
    pub images: usize,
    pub intra_mean: Option<f64>,
    pub inter_mean: Option<f64>,
}

/// `labels[i]` is the class index of row `i`.
pub fn class_means(label: &str, classes: &[String], labels: &[usize], matrix: &[Vec<f64>]) -> Vec<ClassMeanRow> {
    classes
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let (mut intra, mut n_intra, mut inter, mut n_inter) = (0.0, 0usize, 0.0, 0usize);
            for (i, &li) in labels.iter().enumerate() {
                if li != c {
                    continue;
                }
                for (j, &lj) in labels.iter().enumerate() {
                    if lj == c && j > i {
                        intra += matrix[i][j];
                        n_intra += 1;
                    } else if lj != c {
                        inter += matrix[i][j];
                        n_inter += 1;
                    }
                }
            }
            ClassMeanRow {
                label: label.to_string(),
                class: name.clone(),
                images: labels.iter().filter(|&&l| l == c).count(),
                intra_mean: (n_intra > 0).then(|| intra / n_intra as f64),
                inter_mean: (n_inter > 0).then(|| inter / n_inter as f64),
            }
        })
        .collect()
}

const CLASS_MEAN_HEADER: [&str; 5] = ["params", "class", "images", "intra_mean", "inter_mean"];

pub fn write_class_means(path: &Path, rows: &[ClassMeanRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(CLASS_MEAN_HEADER)?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.class.clone(),
            r.images.to_string(),
            fmt_opt(r.intra_mean),
            fmt_opt(r.inter_mean),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_class_means(path: &Path) -> Result<Vec<ClassMeanRow>> {
    let mut r = reader(path)?;
    ensure!(r.headers()? == CLASS_MEAN_HEADER.as_slice(), "{}: unexpected header", path.display());
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(ClassMeanRow {
                label: rec[0].to_string(),
                class: rec[1].to_string(),
                images: rec[2].parse().context("image count")?,
                intra_mean: parse_opt(&rec[3], "intra_mean")?,
                inter_mean: parse_opt(&rec[4], "inter_mean")?,
            })
        })
        .collect()
}

/// Rows are true classes, columns predicted classes.
pub fn write_confusion(path: &Path, classes: &[String], cm: &ConfusionMatrix) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(std::iter::once("class").chain(classes.iter().map(String::as_str)))?;
    for (name, row) in classes.iter().zip(cm.rows()) {
        w.write_record(std::iter::once(name.clone()).chain(row.iter().map(u64::to_string)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_confusion(path: &Path) -> Result<(Vec<String>, ConfusionMatrix)> {
    let mut r = reader(path)?;
    let classes: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        ensure!(rec.get(0) == classes.get(i).map(String::as_str), "{}: row {i} label mismatch", path.display());
        rows.push(
            rec.iter()
                .skip(1)
                .map(|c| c.parse::<u64>().with_context(|| format!("count '{c}'")))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    ensure!(rows.len() == classes.len(), "{}: matrix is not square", path.display());
    Ok((classes, ConfusionMatrix::from_rows(&rows)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: String,
    pub vp: u64,
    pub fp: u64,
    pub vn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: Option<f64>,
    pub positive_accuracy: Option<f64>,
    pub negative_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub method: Option<Method>,
    pub params: Option<DescriptorParams>,
    pub label: String,
    pub metric: Option<Metric>,
    pub aggregate: Option<Aggregate>,
    pub classes: Vec<String>,
    pub confusion: Vec<Vec<u64>>,
    /// One-vs-rest tallies summed over classes.
    pub tallies: BinaryTallies,
    pub metrics: Metrics,
    /// Fraction of images assigned to the wrong class.
    pub misclassification_rate: Option<f64>,
    pub per_class: Vec<ClassRow>,
}

impl MetricsReport {
    /// Indicators of a confusion matrix; run provenance fields start empty.
    pub fn from_confusion(label: &str, classes: &[String], cm: &ConfusionMatrix) -> Result<Self> {
        if classes.len() != cm.classes() {
            bail!("{} class names for a {}-class matrix", classes.len(), cm.classes());
        }
        let per_class = per_class_report(cm)
            .into_iter()
            .map(|r| ClassRow {
                class: classes[r.class].clone(),
                vp: r.tallies.vp,
                fp: r.tallies.fp,
                vn: r.tallies.vn,
                fn_: r.tallies.fn_,
                accuracy: r.accuracy,
                positive_accuracy: r.positive_accuracy,
                negative_accuracy: r.negative_accuracy,
            })
            .collect();
        let tallies = binary_tallies(cm);
        let total = cm.total();
        Ok(MetricsReport {
            schema_version: SCHEMA_VERSION,
            method: None,
            params: None,
            label: label.to_string(),
            metric: None,
            aggregate: None,
            classes: classes.to_vec(),
            confusion: cm.rows(),
            tallies,
            metrics: metrics(&tallies),
            misclassification_rate: (total > 0).then(|| 1.0 - cm.diagonal() as f64 / total as f64),
            per_class,
        })
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{}: malformed JSON", path.display()))
}

/// One descriptor vector per row.
#[derive(Debug, Clone, PartialEq)]
pub struct HistRow {
    pub file: String,
    pub class: String,
    pub bins: Vec<f64>,
}

pub fn write_hist_dump(path: &Path, rows: &[HistRow]) -> Result<()> {
    let n_bins = rows.first().map_or(0, |r| r.bins.len());
    ensure!(rows.iter().all(|r| r.bins.len() == n_bins), "histograms differ in length");
    let mut w = writer(path)?;
    let header: Vec<String> = ["file".to_string(), "class".to_string()]
        .into_iter()
        .chain((0..n_bins).map(|b| format!("bin_{b}")))
        .collect();
    w.write_record(&header)?;
    for r in rows {
        w.write_record([r.file.clone(), r.class.clone()].into_iter().chain(r.bins.iter().map(f64::to_string)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_hist_dump(path: &Path) -> Result<Vec<HistRow>> {
    let mut r = reader(path)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(HistRow {
                file: rec[0].to_string(),
                class: rec[1].to_string(),
                bins: rec.iter().skip(2).map(|c| parse_f64(c, "bin")).collect::<Result<_>>()?,
            })
        })
        .collect()
}

/// Mean and standard deviation of one pair's cross-channel code map.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStatsRow {
    pub file: String,
    pub class: String,
    pub label: String,
    pub pair: String,
    pub mean: f64,
    pub std: f64,
}

const PAIR_STATS_HEADER: [&str; 6] = ["file", "class", "params", "pair", "mean", "std"];

pub fn write_pair_stats(path: &Path, rows: &[PairStatsRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(PAIR_STATS_HEADER)?;
    for r in rows {
        w.write_record([
            r.file.clone(),
            r.class.clone(),
            r.label.clone(),
            r.pair.clone(),
            r.mean.to_string(),
            r.std.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pair_stats(path: &Path) -> Result<Vec<PairStatsRow>> {
    let mut r = reader(path)?;
    ensure!(r.headers()? == PAIR_STATS_HEADER.as_slice(), "{}: unexpected header", path.display());
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(PairStatsRow {
                file: rec[0].to_string(),
                class: rec[1].to_string(),
                label: rec[2].to_string(),
                pair: rec[3].to_string(),
                mean: parse_f64(&rec[4], "mean")?,
                std: parse_f64(&rec[5], "std")?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_means_by_hand() {
        // a0 a1 | b0 b1
        let m = vec![
            vec![0.0, 0.1, 0.6, 0.8],
            vec![0.1, 0.0, 0.5, 0.7],
            vec![0.6, 0.5, 0.0, 0.3],
            vec![0.8, 0.7, 0.3, 0.0],
        ];
        let classes = vec!["a".to_string(), "b".to_string()];
        let rows = class_means("x", &classes, &[0, 0, 1, 1], &m);
        assert_eq!(rows[0].intra_mean, Some(0.1));
        assert_eq!(rows[1].intra_mean, Some(0.3));
        let inter = (0.6 + 0.8 + 0.5 + 0.7) / 4.0;
        assert!((rows[0].inter_mean.unwrap() - inter).abs() < 1e-15);
        assert!((rows[1].inter_mean.unwrap() - inter).abs() < 1e-15);
        assert_eq!(rows[0].images, 2);
    }

    #[test]
    fn singleton_class_has_no_intra_mean() {
        let rows = class_means("x", &["a".to_string()], &[0], &[vec![0.0]]);
        assert_eq!(rows[0].intra_mean, None);
        assert_eq!(rows[0].inter_mean, None);
    }

    #[test]
    fn confusion_report_totals() {
        let cm = ConfusionMatrix::from_rows(&[vec![3, 1], vec![0, 4]]).unwrap();
        let names = vec!["a".to_string(), "b".to_string()];
        let r = MetricsReport::from_confusion("toy", &names, &cm).unwrap();
        assert_eq!(r.misclassification_rate, Some(1.0 / 8.0));
        assert_eq!((r.tallies.vp, r.tallies.fp, r.tallies.vn, r.tallies.fn_), (7, 1, 7, 1));
        assert_eq!(r.per_class[1].positive_accuracy, Some(0.8));
        assert!(MetricsReport::from_confusion("toy", &names[..1], &cm).is_err());
    }
}
