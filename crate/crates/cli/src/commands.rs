//! Command implementations. Each writes its files only after all
//! computation is done, in a fixed order.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use image::{ColorType, ImageFormat};
use rayon::prelude::*;
use rocktex::descriptors::{
    extract_with_stats, full_grid, reporting_grid, DescriptorParams, GaborSetting, Method,
};
use rocktex::evaluation::{confusion_with, distance_matrix, Aggregate, LabeledCorpus};
use rocktex::gabor::GaborParams;
use rocktex::lbp::LbpConfig;
use rocktex::similarity::Metric;
use rocktex::synth::{generate, SynthSpec};

use crate::archive::{group_by_params, group_stems, params_label, read_archive, write_archive, ArchiveRecord, ARCHIVE_FILE};
use crate::ingest::{ingest, load_image, scan, CorpusManifest};
use crate::report::{
    class_means, write_class_means, write_confusion, write_hist_dump, write_json, write_pair_stats,
    write_similarity, HistRow, MetricsReport, PairStatsRow, SimilarityTable,
};

pub const PAIR_STATS_FILE: &str = "pair_stats.csv";
pub const CLASS_MEANS_FILE: &str = "class_means.csv";

fn create_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))
}

/// Writes `out/<class>/img_NN.png` for every generated image.
pub fn synth(seed: u64, spec: &SynthSpec, out: &Path) -> Result<Vec<PathBuf>> {
    let corpus = generate(seed, spec)?;
    let mut written = Vec::new();
    for class in &corpus {
        let dir = out.join(&class.name);
        create_dir(&dir)?;
        for (i, img) in class.images.iter().enumerate() {
            let path = dir.join(format!("img_{:02}.png", i + 1));
            image::save_buffer_with_format(
                &path,
                &img.to_interleaved(),
                img.width() as u32,
                img.height() as u32,
                ColorType::Rgb8,
                ImageFormat::Png,
            )
            .with_context(|| format!("cannot write {}", path.display()))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Lists and decodes the whole corpus.
pub fn ingest_check(root: &Path) -> Result<CorpusManifest> {
    ingest(root)
}

/// Which Gabor filters G-ALBPCSF runs with.
#[derive(Debug, Clone, PartialEq)]
pub enum GaborSelection {
    /// Wavelengths 4 and 8 at 0, 45, 90, 135 and 180 degrees.
    Reporting,
    /// All 40 `(mu, nu)` filters.
    Full,
    /// Every `(lambda, theta)` combination.
    Wavelengths { lambdas: Vec<f64>, thetas: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractOptions {
    pub method: Method,
    pub lbp: LbpConfig,
    pub gabor_sigma: f64,
    pub gabor_f: f64,
    pub gabor: GaborSelection,
    pub dct_k: Vec<usize>,
}

impl ExtractOptions {
    pub fn new(method: Method) -> Self {
        ExtractOptions {
            method,
            lbp: LbpConfig::default(),
            gabor_sigma: rocktex::gabor::DEFAULT_SIGMA,
            gabor_f: rocktex::gabor::DEFAULT_F,
            gabor: GaborSelection::Reporting,
            dct_k: vec![rocktex::descriptors::DEFAULT_DCT_K],
        }
    }

    /// One entry per descriptor computed for each image.
    pub fn param_grid(&self) -> Result<Vec<DescriptorParams>> {
        self.lbp.validate()?;
        let lbp = self.lbp;
        Ok(match self.method {
            Method::RgbHist => vec![DescriptorParams::RgbHist],
            Method::Lbp => vec![DescriptorParams::Lbp { lbp }],
            Method::Albpcsf => vec![DescriptorParams::Albpcsf { lbp }],
            Method::GAlbpcsf => {
                let (sigma, f) = (self.gabor_sigma, self.gabor_f);
                let settings = match &self.gabor {
                    GaborSelection::Reporting => reporting_grid(sigma, f)?,
                    GaborSelection::Full => full_grid(sigma, f)?,
                    GaborSelection::Wavelengths { lambdas, thetas } => {
                        let mut v = Vec::new();
                        for &lambda in lambdas {
                            for &theta in thetas {
                                v.push(GaborSetting::from_wavelength(lambda, theta, sigma, f)?);
                            }
                        }
                        v
                    }
                };
                if settings.is_empty() {
                    bail!("no Gabor filters selected");
                }
                // fail early on bad sigma / f rather than once per image
                GaborParams::new(0, 0, sigma, f)?;
                settings
                    .into_iter()
                    .map(|gabor| DescriptorParams::Gabor { lbp, gabor })
                    .collect()
            }
            Method::DAlbpcsf => {
                if self.dct_k.is_empty() {
                    bail!("no DCT block size given");
                }
                self.dct_k.iter().map(|&k| DescriptorParams::Dct { lbp, k }).collect()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractSummary {
    pub images: usize,
    pub records: usize,
    /// `(file, message)` for every image that could not be processed.
    pub failures: Vec<(String, String)>,
    pub archive: PathBuf,
    pub pair_stats: Option<PathBuf>,
}

type ImageOutput = (Vec<ArchiveRecord>, Vec<PairStatsRow>);

fn extract_image(path: &Path, file: &str, class: &str, grid: &[DescriptorParams]) -> Result<ImageOutput> {
    let img = load_image(path)?;
    let mut records = Vec::with_capacity(grid.len());
    let mut stats = Vec::new();
    for params in grid {
        let (record, pairs) =
            extract_with_stats(&img, params).with_context(|| format!("{file}: {}", params_label(params)))?;
        for p in pairs.into_iter().flatten() {
            stats.push(PairStatsRow {
                file: file.to_string(),
                class: class.to_string(),
                label: params_label(params),
                pair: p.pair.to_string(),
                mean: p.mean,
                std: p.std,
            });
        }
        records.push(ArchiveRecord::new(file.to_string(), class.to_string(), record));
    }
    Ok((records, stats))
}

/// Descriptors for every image. Per-image failures are collected and the
/// remaining images are still processed.
pub fn extract(root: &Path, opts: &ExtractOptions, out: &Path) -> Result<ExtractSummary> {
    let manifest = scan(root)?;
    let grid = opts.param_grid()?;
    let names = manifest.class_names();
    let items = manifest.items();
    let results: Vec<(String, Result<ImageOutput>)> = items
        .par_iter()
        .map(|&(class, path)| {
            let file = manifest.relative_name(path);
            let res = extract_image(path, &file, &names[class], &grid);
            (file, res)
        })
        .collect();

    let mut records = Vec::new();
    let mut stats = Vec::new();
    let mut failures = Vec::new();
    for (file, res) in results {
        match res {
            Ok((r, s)) => {
                records.extend(r);
                stats.extend(s);
            }
            Err(e) => failures.push((file, format!("{e:#}"))),
        }
    }

    create_dir(out)?;
    let archive = out.join(ARCHIVE_FILE);
    write_archive(&archive, &records)?;
    let pair_stats = if stats.is_empty() {
        None
    } else {
        let path = out.join(PAIR_STATS_FILE);
        write_pair_stats(&path, &stats)?;
        Some(path)
    };
    Ok(ExtractSummary {
        images: items.len(),
        records: records.len(),
        failures,
        archive,
        pair_stats,
    })
}

/// Class names in lexicographic order and each record's class index.
fn class_index(records: &[&ArchiveRecord]) -> (Vec<String>, Vec<usize>) {
    let mut classes: Vec<String> = records.iter().map(|r| r.class.clone()).collect();
    classes.sort();
    classes.dedup();
    let labels = records
        .iter()
        .map(|r| classes.binary_search(&r.class).expect("class collected above"))
        .collect();
    (classes, labels)
}

/// Pairwise distance matrix per parameter set plus the per-class mean table.
pub fn compare(archive: &Path, metric: Metric, out: &Path) -> Result<Vec<PathBuf>> {
    let records = read_archive(archive)?;
    if records.is_empty() {
        bail!("archive {} has no records", archive.display());
    }
    let groups = group_by_params(&records);
    let stems = group_stems(&groups.iter().map(|(p, _)| *p).collect::<Vec<_>>());

    let mut tables = Vec::new();
    let mut mean_rows = Vec::new();
    for ((params, members), stem) in groups.iter().zip(&stems) {
        let vectors: Vec<&[f64]> = members.iter().map(|r| r.vector.as_slice()).collect();
        let matrix = distance_matrix(&vectors, metric).with_context(|| params_label(params))?;
        let (classes, labels) = class_index(members);
        mean_rows.extend(class_means(&params_label(params), &classes, &labels, &matrix));
        let table = SimilarityTable {
            files: members.iter().map(|r| r.file.clone()).collect(),
            matrix,
        };
        tables.push((out.join(format!("similarity_{stem}.csv")), table));
    }

    create_dir(out)?;
    let mut written = Vec::new();
    for (path, table) in &tables {
        write_similarity(path, table)?;
        written.push(path.clone());
    }
    let means = out.join(CLASS_MEANS_FILE);
    write_class_means(&means, &mean_rows)?;
    written.push(means);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOutcome {
    pub label: String,
    pub report: MetricsReport,
    pub files: Vec<PathBuf>,
}

/// Leave-one-out classification per parameter set.
pub fn classify(
    archive: &Path,
    metric: Metric,
    aggregate: Aggregate,
    dump_hist: bool,
    out: &Path,
) -> Result<Vec<ClassifyOutcome>> {
    let records = read_archive(archive)?;
    if records.is_empty() {
        bail!("archive {} has no records", archive.display());
    }
    let groups = group_by_params(&records);
    let stems = group_stems(&groups.iter().map(|(p, _)| *p).collect::<Vec<_>>());

    let mut pending = Vec::new();
    for ((params, members), stem) in groups.iter().zip(&stems) {
        let label = params_label(params);
        let (classes, labels) = class_index(members);
        let items = labels.iter().zip(members).map(|(&c, r)| (c, r.descriptor())).collect();
        let corpus = LabeledCorpus::new(classes.clone(), items).with_context(|| label.clone())?;
        let cm = confusion_with(&corpus, metric, aggregate).with_context(|| label.clone())?;
        let mut report = MetricsReport::from_confusion(&label, &classes, &cm)?;
        report.method = Some(params.method());
        report.params = Some(*params);
        report.metric = Some(metric);
        report.aggregate = Some(aggregate);
        let hist = dump_hist.then(|| {
            members
                .iter()
                .map(|r| HistRow {
                    file: r.file.clone(),
                    class: r.class.clone(),
                    bins: r.vector.clone(),
                })
                .collect::<Vec<_>>()
        });
        pending.push((stem, label, classes, cm, report, hist));
    }

    create_dir(out)?;
    let mut outcomes = Vec::new();
    for (stem, label, classes, cm, report, hist) in pending {
        let mut files = vec![out.join(format!("confusion_{stem}.csv")), out.join(format!("metrics_{stem}.json"))];
        write_confusion(&files[0], &classes, &cm)?;
        write_json(&files[1], &report)?;
        if let Some(rows) = hist {
            let path = out.join(format!("hist_{stem}.csv"));
            write_hist_dump(&path, &rows)?;
            files.push(path);
        }
        outcomes.push(ClassifyOutcome { label, report, files });
    }
    Ok(outcomes)
}
