use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rocktex::descriptors::{Method, DEFAULT_DCT_K};
use rocktex::evaluation::Aggregate;
use rocktex::gabor::{DEFAULT_F, DEFAULT_SIGMA};
use rocktex::lbp::{LbpConfig, LbpVariant};
use rocktex::similarity::Metric;
use rocktex::synth::SynthSpec;
use rocktex_cli::commands::{self, ExtractOptions, GaborSelection};

/// Color texture descriptors and leave-one-out evaluation for image corpora.
#[derive(Debug, Parser)]
#[command(name = "rocktex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutArg {
    /// Output directory.
    #[arg(long, env = "ROCKTEX_OUT", default_value = "rocktex-out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a seeded synthetic corpus (one folder per class, PNG files).
    Synth {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        classes: usize,
        #[arg(long, default_value_t = 5)]
        per_class: usize,
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// List and decode a corpus, reporting its classes.
    IngestCheck { root: PathBuf },
    /// Compute descriptors for every image into a JSONL archive.
    Extract {
        root: PathBuf,
        #[command(flatten)]
        desc: DescriptorArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Pairwise distance matrices and per-class mean distances.
    Compare {
        archive: PathBuf,
        #[arg(long, default_value = "hi")]
        metric: Metric,
        #[command(flatten)]
        out: OutArg,
    },
    /// Leave-one-out classification: confusion matrix and indicators.
    Classify {
        archive: PathBuf,
        #[arg(long, default_value = "hi")]
        metric: Metric,
        #[arg(long, value_enum, default_value_t = AggregateArg::Mean)]
        aggregate: AggregateArg,
        /// Also write every descriptor vector as CSV.
        #[arg(long)]
        dump_hist: bool,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Basic,
    Ri,
    Riu2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AggregateArg {
    Mean,
    Median,
}

#[derive(Debug, Args)]
struct DescriptorArgs {
    /// rgb-hist, lbp, albpcsf, g-albpcsf or d-albpcsf.
    #[arg(long, default_value = "d-albpcsf")]
    method: Method,
    #[arg(long, value_enum, default_value_t = VariantArg::Basic)]
    lbp_variant: VariantArg,
    /// LBP sampling points.
    #[arg(long, default_value_t = 8)]
    p: usize,
    /// LBP radius in pixels.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    gabor_sigma: f64,
    #[arg(long, default_value_t = DEFAULT_F)]
    gabor_f: f64,
    /// Gabor wavelengths in pixels (4 f^nu), comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "full_bank")]
    lambda: Vec<f64>,
    /// Gabor orientations in degrees (multiples of 22.5), comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "full_bank")]
    theta: Vec<f64>,
    /// Use all 40 Gabor filters.
    #[arg(long)]
    full_bank: bool,
    /// DCT low-frequency block sides, comma separated [default: 32].
    #[arg(long, value_delimiter = ',')]
    dct_k: Vec<usize>,
}

impl DescriptorArgs {
    fn options(&self) -> Result<ExtractOptions> {
        let variant = match self.lbp_variant {
            VariantArg::Basic => LbpVariant::Basic,
            VariantArg::Ri => LbpVariant::RotationInvariant,
            VariantArg::Riu2 => LbpVariant::Riu2,
        };
        let gabor = if self.full_bank {
            GaborSelection::Full
        } else if self.lambda.is_empty() && self.theta.is_empty() {
            GaborSelection::Reporting
        } else {
            let or = |v: &[f64], d: &[f64]| if v.is_empty() { d.to_vec() } else { v.to_vec() };
            GaborSelection::Wavelengths {
                lambdas: or(&self.lambda, &[4.0, 4.0 * self.gabor_f * self.gabor_f]),
                thetas: or(&self.theta, &[0.0, 45.0, 90.0, 135.0, 180.0]),
            }
        };
        Ok(ExtractOptions {
            method: self.method,
            lbp: LbpConfig::new(self.p, self.r, variant)?,
            gabor_sigma: self.gabor_sigma,
            gabor_f: self.gabor_f,
            gabor,
            dct_k: if self.dct_k.is_empty() {
                vec![DEFAULT_DCT_K]
            } else {
                self.dct_k.clone()
            },
        })
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Synth {
            seed,
            classes,
            per_class,
            width,
            height,
            out,
        } => {
            let spec = SynthSpec {
                classes,
                per_class,
                width,
                height,
            };
            let files = commands::synth(seed, &spec, &out.out)?;
            println!("wrote {} images to {}", files.len(), out.out.display());
        }
        Command::IngestCheck { root } => {
            let manifest = commands::ingest_check(&root)?;
            for (i, class) in manifest.classes.iter().enumerate() {
                println!("{}\t{}\t{} images", i + 1, class.name, class.files.len());
            }
            println!("{} classes, {} images", manifest.classes.len(), manifest.len());
        }
        Command::Extract { root, desc, out } => {
            let summary = commands::extract(&root, &desc.options()?, &out.out)?;
            println!(
                "{} records from {} images -> {}",
                summary.records,
                summary.images,
                summary.archive.display()
            );
            if let Some(p) = &summary.pair_stats {
                println!("pair statistics -> {}", p.display());
            }
            if !summary.failures.is_empty() {
                eprintln!("{} image(s) failed:", summary.failures.len());
                for (file, msg) in &summary.failures {
                    eprintln!("  {file}: {msg}");
                }
                return Ok(false);
            }
        }
        Command::Compare { archive, metric, out } => {
            for path in commands::compare(&archive, metric, &out.out)? {
                println!("{}", path.display());
            }
        }
        Command::Classify {
            archive,
            metric,
            aggregate,
            dump_hist,
            out,
        } => {
            let aggregate = match aggregate {
                AggregateArg::Mean => Aggregate::Mean,
                AggregateArg::Median => Aggregate::Median,
            };
            for outcome in commands::classify(&archive, metric, aggregate, dump_hist, &out.out)? {
                let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
                let m = &outcome.report.metrics;
                println!(
                    "{}: misclassified {}, sensitivity {}, specificity {}, accuracy {}, error rate {}",
                    outcome.label,
                    fmt(outcome.report.misclassification_rate),
                    fmt(m.sensitivity),
                    fmt(m.specificity),
                    fmt(m.accuracy),
                    fmt(m.error_rate)
                );
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
