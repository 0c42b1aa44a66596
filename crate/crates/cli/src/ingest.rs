//! Corpus layout: one sub-directory per class, images inside.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use image::{DynamicImage, ImageReader};
use rayon::prelude::*;
use rocktex::{ColorImage, ColorSpace};

/// File extensions picked up by [`scan`], compared case-insensitively.
pub const IMAGE_EXTENSIONS: [&str; 3] = ["png", "ppm", "pnm"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEntry {
    pub name: String,
    pub files: Vec<PathBuf>,
}

/// Classes sorted by name, files sorted by file name. A class's index is its
/// position in `classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusManifest {
    pub root: PathBuf,
    pub classes: Vec<ClassEntry>,
}

impl CorpusManifest {
    pub fn len(&self) -> usize {
        self.classes.iter().map(|c| c.files.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    /// `(class index, path)` in manifest order.
    pub fn items(&self) -> Vec<(usize, &Path)> {
        self.classes
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.files.iter().map(move |f| (i, f.as_path())))
            .collect()
    }

    /// `class/file` with forward slashes, for use in archives and reports.
    pub fn relative_name(&self, path: &Path) -> String {
        let rel = path.strip_prefix(&self.root).unwrap_or(path);
        rel.components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/")
    }
}

fn is_image_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("cannot read directory {}", dir.display()))? {
        let path = entry?.path();
        let hidden = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('.'));
        if !hidden {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Lists the corpus without decoding anything.
pub fn scan(root: &Path) -> Result<CorpusManifest> {
    if !root.is_dir() {
        bail!("corpus root {} is not a directory", root.display());
    }
    let mut classes = Vec::new();
    for dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let name = dir
            .file_name()
            .and_then(|n| n.to_str())
            .with_context(|| format!("class directory {} is not valid UTF-8", dir.display()))?
            .to_string();
        let files: Vec<PathBuf> = sorted_entries(&dir)?
            .into_iter()
            .filter(|p| p.is_file() && is_image_file(p))
            .collect();
        if files.len() < 2 {
            bail!(
                "class '{name}' ({}) has {} image(s); at least 2 are required",
                dir.display(),
                files.len()
            );
        }
        classes.push(ClassEntry { name, files });
    }
    if classes.len() < 2 {
        bail!("corpus {} has {} class folder(s); at least 2 are required", root.display(), classes.len());
    }
    Ok(CorpusManifest {
        root: root.to_path_buf(),
        classes,
    })
}

/// Decodes an 8-bit, 3-channel image.
pub fn load_image(path: &Path) -> Result<ColorImage> {
    let decoded = ImageReader::open(path)
        .and_then(|r| r.with_guessed_format())
        .with_context(|| format!("{}: cannot open", path.display()))?
        .decode()
        .with_context(|| format!("{}: cannot decode", path.display()))?;
    let DynamicImage::ImageRgb8(buf) = decoded else {
        bail!(
            "{}: expected an 8-bit 3-channel image, found {:?}",
            path.display(),
            decoded.color()
        );
    };
    let (w, h) = buf.dimensions();
    ColorImage::from_interleaved(w as usize, h as usize, ColorSpace::Rgb, buf.as_raw())
        .with_context(|| format!("{}: unusable image", path.display()))
}

/// [`scan`] plus a decode of every image; the first failing file (in
/// manifest order) is reported.
pub fn ingest(root: &Path) -> Result<CorpusManifest> {
    let manifest = scan(root)?;
    let failures: Vec<Option<anyhow::Error>> = manifest
        .items()
        .par_iter()
        .map(|(_, path)| load_image(path).err())
        .collect();
    if let Some(err) = failures.into_iter().flatten().next() {
        return Err(err);
    }
    Ok(manifest)
}
