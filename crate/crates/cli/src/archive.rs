//! Descriptor archive: one JSON record per line.
//!
//! ```text
//! {"schema_version":1,"file":"class_01/img_01.png","class":"class_01",
//!  "method":"d-albpcsf","params":{"kind":"dct",...},"vector":[...]}
//! ```
//!
//! Floats are written in shortest round-trip form, so reading an archive and
//! writing it again reproduces the same bytes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use rocktex::descriptors::{DescriptorParams, DescriptorRecord, Method};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
pub const ARCHIVE_FILE: &str = "descriptors.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveRecord {
    pub schema_version: u32,
    pub file: String,
    pub class: String,
    pub method: Method,
    pub params: DescriptorParams,
    pub vector: Vec<f64>,
}

impl ArchiveRecord {
    pub fn new(file: String, class: String, record: DescriptorRecord) -> Self {
        ArchiveRecord {
            schema_version: SCHEMA_VERSION,
            file,
            class,
            method: record.method,
            params: record.params,
            vector: record.vector,
        }
    }

    pub fn descriptor(&self) -> DescriptorRecord {
        DescriptorRecord {
            method: self.method,
            params: self.params,
            vector: self.vector.clone(),
        }
    }
}

fn trim_float(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Short human-readable label, used in report file names and tables.
pub fn params_label(params: &DescriptorParams) -> String {
    let lbp = |cfg: &rocktex::lbp::LbpConfig| {
        let variant = match cfg.variant {
            rocktex::lbp::LbpVariant::Basic => "basic",
            rocktex::lbp::LbpVariant::RotationInvariant => "ri",
            rocktex::lbp::LbpVariant::Riu2 => "riu2",
        };
        format!("p{}-r{}-{variant}", cfg.points, cfg.radius)
    };
    let method = params.method().name();
    match params {
        DescriptorParams::RgbHist => method.to_string(),
        DescriptorParams::Lbp { lbp: cfg } | DescriptorParams::Albpcsf { lbp: cfg } => {
            format!("{method}-{}", lbp(cfg))
        }
        DescriptorParams::Gabor { lbp: cfg, gabor } => format!(
            "{method}-{}-l{}-t{}",
            lbp(cfg),
            trim_float(gabor.lambda),
            trim_float(gabor.theta_deg)
        ),
        DescriptorParams::Dct { lbp: cfg, k } => format!("{method}-{}-k{k}", lbp(cfg)),
    }
}

/// Exact grouping key: records with equal keys were produced by the same
/// method and parameters.
pub fn params_key(params: &DescriptorParams) -> String {
    serde_json::to_string(params).expect("params serialize")
}

pub fn write_archive(path: &Path, records: &[ArchiveRecord]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut out = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_archive(path: &Path) -> Result<Vec<ArchiveRecord>> {
    let file = File::open(path).with_context(|| format!("cannot open archive {}", path.display()))?;
    let mut records = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ArchiveRecord = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: malformed record", path.display(), n + 1))?;
        if record.schema_version != SCHEMA_VERSION {
            bail!(
                "{}:{}: schema version {} is not supported (expected {SCHEMA_VERSION})",
                path.display(),
                n + 1,
                record.schema_version
            );
        }
        records.push(record);
    }
    Ok(records)
}

/// Records grouped by [`params_key`], groups in order of first appearance.
pub fn group_by_params(records: &[ArchiveRecord]) -> Vec<(DescriptorParams, Vec<&ArchiveRecord>)> {
    let mut groups: Vec<(String, DescriptorParams, Vec<&ArchiveRecord>)> = Vec::new();
    for r in records {
        let key = params_key(&r.params);
        match groups.iter_mut().find(|(k, ..)| *k == key) {
            Some((.., members)) => members.push(r),
            None => groups.push((key, r.params, vec![r])),
        }
    }
    groups.into_iter().map(|(_, p, m)| (p, m)).collect()
}

/// File-name stems for the groups: the label, suffixed on collision.
pub fn group_stems(params: &[DescriptorParams]) -> Vec<String> {
    let mut stems: Vec<String> = Vec::with_capacity(params.len());
    for p in params {
        let label = params_label(p);
        let mut stem = label.clone();
        let mut n = 2;
        while stems.contains(&stem) {
            stem = format!("{label}-{n}");
            n += 1;
        }
        stems.push(stem);
    }
    stems
}
