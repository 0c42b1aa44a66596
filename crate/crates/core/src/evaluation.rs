//! Leave-one-out nearest-class classification and confusion-matrix
//! indicators.
//!
//! A query is assigned to the class whose members are, on average, closest
//! to it (mean of the per-member distances; median optionally). Ties go to
//! the lowest class index.
//!
//! Binary tallies are one-vs-rest per class and summed over classes
//! (micro-averaging): with `K` classes and `n` items every item takes part
//! in `K` binary decisions, so `VP + FP + VN + FN = K n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::descriptors::DescriptorRecord;
use crate::error::{Error, Result};
use crate::similarity::Metric;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCorpus {
    classes: Vec<String>,
    items: Vec<(usize, DescriptorRecord)>,
}

impl LabeledCorpus {
    /// Every class needs at least two items so a leave-one-out query always
    /// has a same-class neighbour.
    pub fn new(classes: Vec<String>, items: Vec<(usize, DescriptorRecord)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut counts = vec![0usize; classes.len()];
        for (class, _) in &items {
            *counts
                .get_mut(*class)
                .ok_or_else(|| Error::InvalidCorpus(format!("class index {class} out of range")))? += 1;
        }
        if let Some(c) = counts.iter().position(|&n| n < 2) {
            return Err(Error::InvalidCorpus(format!(
                "class '{}' has {} item(s); at least 2 are required",
                classes[c], counts[c]
            )));
        }
        let len = items[0].1.vector.len();
        if items.iter().any(|(_, r)| r.vector.len() != len) {
            return Err(Error::InvalidCorpus("descriptor lengths differ".into()));
        }
        Ok(LabeledCorpus { classes, items })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn items(&self) -> &[(usize, DescriptorRecord)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn class_counts(&self) -> Vec<u64> {
        let mut counts = vec![0; self.classes.len()];
        for (c, _) in &self.items {
            counts[*c] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    #[default]
    Mean,
    Median,
}

fn aggregate(mut d: Vec<f64>, how: Aggregate) -> f64 {
    match how {
        Aggregate::Mean => d.iter().sum::<f64>() / d.len() as f64,
        Aggregate::Median => {
            d.sort_by(f64::total_cmp);
            let n = d.len();
            if n % 2 == 1 {
                d[n / 2]
            } else {
                0.5 * (d[n / 2 - 1] + d[n / 2])
            }
        }
    }
}

/// Picks the class with the smallest aggregated distance from a set of
/// `(class, distance)` observations.
fn decide(n_classes: usize, observations: impl Iterator<Item = (usize, f64)>, how: Aggregate) -> Result<usize> {
    let mut per_class: Vec<Vec<f64>> = vec![Vec::new(); n_classes];
    for (c, d) in observations {
        per_class[c].push(d);
    }
    per_class
        .into_iter()
        .enumerate()
        .filter(|(_, d)| !d.is_empty())
        .map(|(c, d)| (c, aggregate(d, how)))
        .fold(None, |best: Option<(usize, f64)>, (c, score)| match best {
            Some((_, b)) if score >= b => best,
            _ => Some((c, score)),
        })
        .map(|(c, _)| c)
        .ok_or(Error::EmptyCorpus)
}

/// Class with the smallest mean distance to `query`, skipping corpus item
/// `exclude` (the query itself under leave-one-out).
pub fn classify(query: &[f64], exclude: Option<usize>, corpus: &LabeledCorpus, metric: Metric) -> Result<usize> {
    classify_with(query, exclude, corpus, metric, Aggregate::Mean)
}

pub fn classify_with(
    query: &[f64],
    exclude: Option<usize>,
    corpus: &LabeledCorpus,
    metric: Metric,
    how: Aggregate,
) -> Result<usize> {
    let distances = corpus
        .items
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != exclude)
        .map(|(_, (c, r))| Ok((*c, metric.distance(query, &r.vector)?)))
        .collect::<Result<Vec<_>>>()?;
    decide(corpus.classes.len(), distances.into_iter(), how)
}

/// Symmetric matrix of pairwise distances between corpus items.
pub fn distance_matrix(records: &[&[f64]], metric: Metric) -> Result<Vec<Vec<f64>>> {
    let n = records.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Ok(0.0)
                    } else {
                        // evaluate each unordered pair one way so the matrix is exactly symmetric
                        let (a, b) = if i < j { (i, j) } else { (j, i) };
                        metric.distance(records[a], records[b])
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows)
}

/// `K x K` counts; rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: usize) -> Self {
        ConfusionMatrix {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidCorpus("confusion matrix must be square".into()));
        }
        Ok(ConfusionMatrix {
            classes: k,
            counts: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn add(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.classes + predicted] += 1;
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.classes.max(1)).map(<[u64]>::to_vec).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        (0..self.classes).map(|p| self.get(truth, p)).sum()
    }

    pub fn col_sum(&self, predicted: usize) -> u64 {
        (0..self.classes).map(|t| self.get(t, predicted)).sum()
    }

    pub fn diagonal(&self) -> u64 {
        (0..self.classes).map(|c| self.get(c, c)).sum()
    }

    /// One-vs-rest tallies for a single class.
    pub fn class_tallies(&self, class: usize) -> BinaryTallies {
        let vp = self.get(class, class);
        let fn_ = self.row_sum(class) - vp;
        let fp = self.col_sum(class) - vp;
        BinaryTallies {
            vp,
            fp,
            vn: self.total() - vp - fn_ - fp,
            fn_,
        }
    }
}

/// Leave-one-out confusion matrix of the whole corpus.
pub fn confusion(corpus: &LabeledCorpus, metric: Metric) -> Result<ConfusionMatrix> {
    confusion_with(corpus, metric, Aggregate::Mean)
}

pub fn confusion_with(corpus: &LabeledCorpus, metric: Metric, how: Aggregate) -> Result<ConfusionMatrix> {
    let vectors: Vec<&[f64]> = corpus.items.iter().map(|(_, r)| r.vector.as_slice()).collect();
    let d = distance_matrix(&vectors, metric)?;
    let predictions = predict_all(corpus, &d, how)?;
    let mut cm = ConfusionMatrix::zeros(corpus.classes.len());
    for ((truth, _), predicted) in corpus.items.iter().zip(predictions) {
        cm.add(*truth, predicted);
    }
    Ok(cm)
}

/// Leave-one-out predictions given a precomputed distance matrix.
pub fn predict_all(corpus: &LabeledCorpus, distances: &[Vec<f64>], how: Aggregate) -> Result<Vec<usize>> {
    (0..corpus.len())
        .into_par_iter()
        .map(|i| {
            let obs = corpus
                .items
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(j, (c, _))| (*c, distances[i][j]));
            decide(corpus.classes.len(), obs, how)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BinaryTallies {
    pub vp: u64,
    pub fp: u64,
    pub vn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl BinaryTallies {
    pub fn total(&self) -> u64 {
        self.vp + self.fp + self.vn + self.fn_
    }
}

impl std::ops::Add for BinaryTallies {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        BinaryTallies {
            vp: self.vp + o.vp,
            fp: self.fp + o.fp,
            vn: self.vn + o.vn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

/// One-vs-rest tallies summed over every class.
pub fn binary_tallies(cm: &ConfusionMatrix) -> BinaryTallies {
    (0..cm.classes)
        .map(|c| cm.class_tallies(c))
        .fold(BinaryTallies::default(), |a, b| a + b)
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Indicators; `None` marks a metric whose denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// VP / (VP + FN)
    pub sensitivity: Option<f64>,
    /// VN / (VN + FP)
    pub specificity: Option<f64>,
    /// VP / (VP + FP)
    pub precision: Option<f64>,
    /// VN / (VN + FN)
    pub negative_predictive_value: Option<f64>,
    /// (VP + VN) / total
    pub accuracy: Option<f64>,
    pub error_rate: Option<f64>,
}

pub fn metrics(t: &BinaryTallies) -> Metrics {
    let accuracy = ratio(t.vp + t.vn, t.total());
    Metrics {
        sensitivity: ratio(t.vp, t.vp + t.fn_),
        specificity: ratio(t.vn, t.vn + t.fp),
        precision: ratio(t.vp, t.vp + t.fp),
        negative_predictive_value: ratio(t.vn, t.vn + t.fn_),
        accuracy,
        error_rate: accuracy.map(|a| 1.0 - a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: usize,
    pub tallies: BinaryTallies,
    /// (VP + VN) / total
    pub accuracy: Option<f64>,
    /// VP / (VP + FP)
    pub positive_accuracy: Option<f64>,
    /// VN / (VN + FN)
    pub negative_accuracy: Option<f64>,
}

pub fn per_class_report(cm: &ConfusionMatrix) -> Vec<ClassReport> {
    (0..cm.classes)
        .map(|class| {
            let t = cm.class_tallies(class);
            ClassReport {
                class,
                tallies: t,
                accuracy: ratio(t.vp + t.vn, t.total()),
                positive_accuracy: ratio(t.vp, t.vp + t.fp),
                negative_accuracy: ratio(t.vn, t.vn + t.fn_),
            }
        })
        .collect()
}

/// Mean per-class accuracy over a group of classes; `None` if any member's
/// accuracy is undefined or the group is empty.
pub fn group_mean_accuracy(reports: &[ClassReport], group: &[usize]) -> Option<f64> {
    if group.is_empty() {
        return None;
    }
    let sum = group
        .iter()
        .map(|&c| reports.get(c).and_then(|r| r.accuracy))
        .sum::<Option<f64>>()?;
    Some(sum / group.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptors::{DescriptorParams, Method};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rocktex_oracles::oracle_classify;

    fn record(v: Vec<f64>) -> DescriptorRecord {
        DescriptorRecord {
            method: Method::RgbHist,
            params: DescriptorParams::RgbHist,
            vector: v,
        }
    }

    fn random_hist(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let s: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / s).collect()
    }

    fn random_corpus(seed: u64, classes: usize, per_class: usize) -> LabeledCorpus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = (0..classes * per_class)
            .map(|i| (i / per_class, record(random_hist(&mut rng, 6))))
            .collect();
        LabeledCorpus::new((0..classes).map(|c| format!("c{c}")).collect(), items).unwrap()
    }

    #[test]
    fn corpus_validation() {
        let one = vec![(0, record(vec![1.0])), (1, record(vec![1.0])), (1, record(vec![1.0]))];
        assert!(matches!(
            LabeledCorpus::new(vec!["a".into(), "b".into()], one),
            Err(Error::InvalidCorpus(_))
        ));
        assert!(matches!(LabeledCorpus::new(vec![], vec![]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn nearest_identical_item_wins() {
        let items = vec![
            (0, record(vec![1.0, 0.0, 0.0])),
            (0, record(vec![1.0, 0.0, 0.0])),
            (1, record(vec![0.0, 1.0, 0.0])),
            (1, record(vec![0.0, 0.0, 1.0])),
        ];
        let corpus = LabeledCorpus::new(vec!["a".into(), "b".into()], items).unwrap();
        assert_eq!(classify(&[1.0, 0.0, 0.0], None, &corpus, Metric::Hi).unwrap(), 0);
        assert_eq!(classify(&[0.0, 1.0, 0.0], Some(3), &corpus, Metric::Chi2).unwrap(), 1);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let items = vec![
            (0, record(vec![1.0, 0.0])),
            (0, record(vec![1.0, 0.0])),
            (1, record(vec![0.0, 1.0])),
            (1, record(vec![0.0, 1.0])),
        ];
        let corpus = LabeledCorpus::new(vec!["a".into(), "b".into()], items).unwrap();
        assert_eq!(classify(&[0.5, 0.5], None, &corpus, Metric::Hi).unwrap(), 0);
    }

    #[test]
    fn classify_matches_exhaustive_scan() {
        for seed in 0..20 {
            let corpus = random_corpus(seed, 4, 3);
            let labels: Vec<usize> = corpus.items().iter().map(|(c, _)| *c).collect();
            for metric in [Metric::Hi, Metric::Chi2] {
                for q in 0..corpus.len() {
                    let v = &corpus.items()[q].1.vector;
                    let got = classify(v, Some(q), &corpus, metric).unwrap();
                    let want = oracle_classify(&labels, 4, q, |a, b| {
                        metric.distance(&corpus.items()[a].1.vector, &corpus.items()[b].1.vector).unwrap()
                    });
                    assert_eq!(Some(got), want);
                }
                let cm = confusion(&corpus, metric).unwrap();
                let mut expected = ConfusionMatrix::zeros(4);
                for (q, &truth) in labels.iter().enumerate() {
                    let predicted = oracle_classify(&labels, 4, q, |a, b| {
                        metric.distance(&corpus.items()[a].1.vector, &corpus.items()[b].1.vector).unwrap()
                    });
                    expected.add(truth, predicted.unwrap());
                }
                assert_eq!(cm, expected);
            }
        }
    }

    #[test]
    fn separable_corpus_gives_diagonal() {
        let mut items = Vec::new();
        for c in 0..4 {
            for _ in 0..3 {
                let mut v = vec![0.0; 4];
                v[c] = 1.0;
                items.push((c, record(v)));
            }
        }
        let corpus = LabeledCorpus::new((0..4).map(|c| c.to_string()).collect(), items).unwrap();
        let cm = confusion(&corpus, Metric::Hi).unwrap();
        assert_eq!(cm.diagonal(), 12);
        let m = metrics(&binary_tallies(&cm));
        assert_eq!(m.accuracy, Some(1.0));
        assert_eq!(m.error_rate, Some(0.0));
    }

    #[test]
    fn median_aggregate() {
        assert_eq!(aggregate(vec![3.0, 1.0, 2.0], Aggregate::Median), 2.0);
        assert_eq!(aggregate(vec![4.0, 1.0, 2.0, 3.0], Aggregate::Median), 2.5);
    }

    #[test]
    fn tallies_examples() {
        let identity: Vec<Vec<u64>> = (0..8).map(|i| (0..8).map(|j| if i == j { 5 } else { 0 }).collect()).collect();
        let t = binary_tallies(&ConfusionMatrix::from_rows(&identity).unwrap());
        assert_eq!(t, BinaryTallies { vp: 40, fp: 0, vn: 280, fn_: 0 });

        let toy = ConfusionMatrix::from_rows(&[vec![3, 1], vec![0, 4]]).unwrap();
        // class 0: vp 3, fn 1, fp 0, vn 4; class 1: vp 4, fn 0, fp 1, vn 3
        assert_eq!(binary_tallies(&toy), BinaryTallies { vp: 7, fp: 1, vn: 7, fn_: 1 });
    }

    #[test]
    fn metrics_undefined_denominators() {
        let m = metrics(&BinaryTallies { vp: 0, fp: 0, vn: 5, fn_: 0 });
        assert_eq!(m.sensitivity, None);
        assert_eq!(m.precision, None);
        assert_eq!(m.specificity, Some(1.0));
        assert_eq!(metrics(&BinaryTallies::default()).accuracy, None);
    }

    #[test]
    fn all_correct_metrics() {
        let m = metrics(&BinaryTallies { vp: 10, fp: 0, vn: 30, fn_: 0 });
        assert_eq!(m.sensitivity, Some(1.0));
        assert_eq!(m.specificity, Some(1.0));
        assert_eq!(m.accuracy, Some(1.0));
    }

    #[test]
    fn distance_matrix_is_symmetric() {
        let corpus = random_corpus(7, 3, 3);
        let v: Vec<&[f64]> = corpus.items().iter().map(|(_, r)| r.vector.as_slice()).collect();
        let d = distance_matrix(&v, Metric::Chi2).unwrap();
        for (i, row) in d.iter().enumerate() {
            assert_eq!(row[i], 0.0);
            for (j, &x) in row.iter().enumerate() {
                assert_eq!(x, d[j][i]);
            }
        }
    }

    proptest! {
        #[test]
        fn confusion_rows_match_counts(seed in 0u64..200, classes in 2usize..5, per in 2usize..5) {
            let corpus = random_corpus(seed, classes, per);
            let cm = confusion(&corpus, Metric::Hi).unwrap();
            for (c, n) in corpus.class_counts().iter().enumerate() {
                prop_assert_eq!(cm.row_sum(c), *n);
            }
            prop_assert_eq!(cm.total(), corpus.len() as u64);
            let t = binary_tallies(&cm);
            prop_assert_eq!(t.total(), (classes * corpus.len()) as u64);
            let m = metrics(&t);
            prop_assert!((m.error_rate.unwrap() - (1.0 - m.accuracy.unwrap())).abs() < 1e-12);
        }

        // mean aggregation commutes with positive affine maps of the distances
        #[test]
        fn argmin_survives_affine_distance_maps(seed in 0u64..200, gain in 0.5f64..8.0, offset in 0.0f64..3.0) {
            let corpus = random_corpus(seed, 3, 4);
            let v: Vec<&[f64]> = corpus.items().iter().map(|(_, r)| r.vector.as_slice()).collect();
            let d = distance_matrix(&v, Metric::Hi).unwrap();
            let mapped: Vec<Vec<f64>> = d.iter().map(|r| r.iter().map(|x| gain * x + offset).collect()).collect();
            let a = predict_all(&corpus, &d, Aggregate::Mean).unwrap();
            let b = predict_all(&corpus, &mapped, Aggregate::Mean).unwrap();
            // only compare decisions that are not near-ties
            for i in 0..corpus.len() {
                let mut means: Vec<f64> = (0..3).map(|c| {
                    let ds: Vec<f64> = (0..corpus.len()).filter(|&j| j != i && corpus.items()[j].0 == c).map(|j| d[i][j]).collect();
                    ds.iter().sum::<f64>() / ds.len() as f64
                }).collect();
                means.sort_by(f64::total_cmp);
                if means[1] - means[0] > 1e-9 {
                    prop_assert_eq!(a[i], b[i]);
                }
            }
        }
    }
}
