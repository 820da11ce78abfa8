//! Deterministic corpus augmentation.
//!
//! Each `(source image, pass)` pair gets its own random stream derived from
//! the master seed and the image's relative path, so the outputs and the
//! manifest are identical for any worker count or traversal order.
//!
//! Manifest format (JSON Lines, UTF-8). Every line is an object whose first
//! key is `"kind"`:
//!
//! * `header`: `format_version`, `rng`, `master_seed`, `passes`, `cfg`
//! * `entry`: `source_path`, `pass_index`, `output_path`, `record`,
//!   `content_digest`
//! * `warning`: `path`, `message` (inputs that were skipped)
//!
//! Entries are sorted by `(source_path, pass_index)`. 64-bit seeds and
//! digests are 16-digit lowercase hex strings.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digest::{fnv1a64, image_digest};
use crate::error::{Error, Result};
use crate::imaging::{load_image, save_image, Image};
use crate::rce::{apply_rce, AugmentationRecord, Branch, RceConfig};
use crate::region::{splitmix64, RngStream, RNG_ALGORITHM};
use crate::FORMAT_VERSION;

/// File name the CLI writes the manifest to, inside the output root.
pub const MANIFEST_FILE: &str = "manifest.jsonl";

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

#[derive(Debug, Clone)]
pub struct CorpusJob {
    pub input_root: PathBuf,
    pub output_root: PathBuf,
    pub cfg: RceConfig,
    pub master_seed: u64,
    pub workers: usize,
    /// Augmented copies per source image.
    pub passes: u32,
}

impl CorpusJob {
    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.passes == 0 {
            return Err(Error::Config("passes must be at least 1".into()));
        }
        if !self.input_root.is_dir() {
            return Err(Error::Io {
                path: self.input_root.clone(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "input directory does not exist"),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub format_version: String,
    pub rng: String,
    #[serde(with = "crate::hex_u64")]
    pub master_seed: u64,
    pub passes: u32,
    pub cfg: RceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source_path: String,
    pub pass_index: u32,
    pub output_path: String,
    pub record: AugmentationRecord,
    #[serde(with = "crate::hex_u64")]
    pub content_digest: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Warning {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: ManifestHeader,
    pub entries: Vec<ManifestEntry>,
    pub warnings: Vec<Warning>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Header(ManifestHeader),
    Entry(ManifestEntry),
    Warning(Warning),
}

impl Manifest {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: Line| {
            out.push_str(&serde_json::to_string(&line).expect("manifest lines always serialize"));
            out.push('\n');
        };
        push(Line::Header(self.header.clone()));
        for e in &self.entries {
            push(Line::Entry(e.clone()));
        }
        for w in &self.warnings {
            push(Line::Warning(w.clone()));
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut header = None;
        let mut entries = Vec::new();
        let mut warnings = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parsed: Line = serde_json::from_str(line)
                .map_err(|e| Error::Manifest(format!("line {}: {e}", i + 1)))?;
            match parsed {
                Line::Header(h) if header.is_none() && i == 0 => header = Some(h),
                Line::Header(_) => return Err(Error::Manifest(format!("line {}: unexpected header", i + 1))),
                Line::Entry(e) => entries.push(e),
                Line::Warning(w) => warnings.push(w),
            }
        }
        let header = header.ok_or_else(|| Error::Manifest("missing header line".into()))?;
        Ok(Self {
            header,
            entries,
            warnings,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_jsonl()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_jsonl(&text)
    }

    /// Entry count per branch, in [`Branch::ALL`] order.
    pub fn branch_counts(&self) -> BTreeMap<Branch, usize> {
        let mut counts: BTreeMap<Branch, usize> = Branch::ALL.iter().map(|&b| (b, 0)).collect();
        for e in &self.entries {
            *counts.entry(e.record.branch).or_default() += 1;
        }
        counts
    }
}

/// Normalizes a relative path to `/` separators without a leading `./`.
pub fn canonical_path(rel: &str) -> String {
    let unified = rel.replace('\\', "/");
    unified
        .split('/')
        .filter(|c| !c.is_empty() && *c != ".")
        .collect::<Vec<_>>()
        .join("/")
}

/// `splitmix64(master_seed ^ fnv1a64(path) ^ pass_index)` over the canonical path.
pub fn derive_stream_seed(master_seed: u64, source_path: &str, pass_index: u32) -> u64 {
    let path = canonical_path(source_path);
    splitmix64(master_seed ^ fnv1a64(path.as_bytes()) ^ u64::from(pass_index))
}

/// `dir/name.ext` becomes `dir/name__rce<pass>.png`.
pub fn output_path_for(source_path: &str, pass_index: u32) -> String {
    let path = canonical_path(source_path);
    let (dir, file) = match path.rfind('/') {
        Some(i) => (&path[..=i], &path[i + 1..]),
        None => ("", path.as_str()),
    };
    let stem = match file.rfind('.') {
        Some(i) if i > 0 => &file[..i],
        _ => file,
    };
    format!("{dir}{stem}__rce{pass_index}.png")
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

fn relative_string(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    canonical_path(&rel.to_string_lossy())
}

/// Candidate image files under `root`, as sorted canonical relative paths,
/// plus warnings for anything that could not be listed.
fn discover(root: &Path, exclude: Option<&Path>) -> (Vec<String>, Vec<Warning>) {
    let mut found = Vec::new();
    let mut warnings = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .follow_links(true)
        .into_iter()
        .filter_entry(|e| exclude.is_none_or(|x| e.path() != x));
    for entry in walker {
        match entry {
            Ok(e) if e.file_type().is_file() && is_image(e.path()) => {
                found.push(relative_string(root, e.path()));
            }
            Ok(_) => {}
            Err(err) => warnings.push(Warning {
                path: err.path().map(|p| relative_string(root, p)).unwrap_or_default(),
                message: err.to_string(),
            }),
        }
    }
    found.sort();
    (found, warnings)
}

enum SourceOutcome {
    Done(Vec<ManifestEntry>),
    Skipped(Warning),
}

/// Augments every image under `job.input_root` and writes the results under
/// `job.output_root`. The manifest is returned, not written.
pub fn run_corpus(job: &CorpusJob) -> Result<Manifest> {
    job.validate()?;
    fs::create_dir_all(&job.output_root).map_err(|source| Error::Io {
        path: job.output_root.clone(),
        source,
    })?;
    // Keep a nested output directory out of the input listing.
    let exclude = fs::canonicalize(&job.output_root).ok().and_then(|out| {
        let input = fs::canonicalize(&job.input_root).ok()?;
        let inner = out.strip_prefix(&input).ok()?;
        if inner.as_os_str().is_empty() {
            return None;
        }
        Some(job.input_root.join(inner))
    });
    let (sources, mut warnings) = discover(&job.input_root, exclude.as_deref());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", job.workers)))?;
    let total = sources.len() * job.passes as usize;
    let written = AtomicUsize::new(0);

    let outcomes: Vec<SourceOutcome> = pool.install(|| {
        sources
            .par_iter()
            .map(|rel| process_source(job, rel, &written, total))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut entries = Vec::with_capacity(total);
    for outcome in outcomes {
        match outcome {
            SourceOutcome::Done(mut e) => entries.append(&mut e),
            SourceOutcome::Skipped(w) => warnings.push(w),
        }
    }
    entries.sort_by(|a, b| (&a.source_path, a.pass_index).cmp(&(&b.source_path, b.pass_index)));
    warnings.sort_by(|a, b| a.path.cmp(&b.path));

    Ok(Manifest {
        header: ManifestHeader {
            format_version: FORMAT_VERSION.to_string(),
            rng: RNG_ALGORITHM.to_string(),
            master_seed: job.master_seed,
            passes: job.passes,
            cfg: job.cfg,
        },
        entries,
        warnings,
    })
}

fn process_source(job: &CorpusJob, rel: &str, written: &AtomicUsize, total: usize) -> Result<SourceOutcome> {
    let img = match load_image(job.input_root.join(rel)) {
        Ok(img) => img,
        Err(e) => {
            // The path is already in the warning; keep messages free of the
            // machine-specific input root.
            let message = match e {
                Error::Decode { message, .. } => message,
                Error::Io { source, .. } => source.to_string(),
                other => other.to_string(),
            };
            return Ok(SourceOutcome::Skipped(Warning {
                path: rel.to_string(),
                message,
            }));
        }
    };
    let mut entries = Vec::with_capacity(job.passes as usize);
    for pass_index in 0..job.passes {
        let mut rng = RngStream::from_seed(derive_stream_seed(job.master_seed, rel, pass_index));
        let (out, record) = apply_rce(&img, &job.cfg, &mut rng);
        let output_path = output_path_for(rel, pass_index);
        let dest = job.output_root.join(&output_path);
        let saved = dest
            .parent()
            .map_or(Ok(()), |dir| {
                fs::create_dir_all(dir).map_err(|source| Error::Io {
                    path: dir.to_path_buf(),
                    source,
                })
            })
            .and_then(|()| save_image(&out, &dest));
        if let Err(e) = saved {
            return Err(Error::PartialWrite {
                path: dest,
                completed: written.load(Ordering::SeqCst),
                total,
                source: Box::new(e),
            });
        }
        written.fetch_add(1, Ordering::SeqCst);
        entries.push(ManifestEntry {
            source_path: rel.to_string(),
            pass_index,
            output_path,
            record,
            content_digest: image_digest(&out),
        });
    }
    Ok(SourceOutcome::Done(entries))
}

/// Recomputes one entry's output from its source and recorded seed, and
/// checks it against the recorded digest.
pub fn replay(entry: &ManifestEntry, input_root: impl AsRef<Path>, cfg: &RceConfig) -> Result<Image> {
    let img = load_image(input_root.as_ref().join(&entry.source_path))?;
    let mut rng = RngStream::from_seed(entry.record.stream_seed);
    let (out, _) = apply_rce(&img, cfg, &mut rng);
    let actual = image_digest(&out);
    if actual != entry.content_digest {
        return Err(Error::DigestMismatch {
            source_path: entry.source_path.clone(),
            pass_index: entry.pass_index,
            expected: entry.content_digest,
            actual,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalization() {
        assert_eq!(canonical_path("a\\b.png"), "a/b.png");
        assert_eq!(canonical_path("./a//b.png"), "a/b.png");
        assert_eq!(
            derive_stream_seed(5, "a/b.png", 0),
            derive_stream_seed(5, "a\\b.png", 0)
        );
    }

    #[test]
    fn seed_derivation_formula() {
        let expected = splitmix64(9 ^ fnv1a64(b"cam1/0001.png") ^ 3);
        assert_eq!(derive_stream_seed(9, "cam1/0001.png", 3), expected);
        assert_eq!(derive_stream_seed(9, "x.png", 1), derive_stream_seed(9, "x.png", 1));
        assert_ne!(derive_stream_seed(9, "x.png", 0), derive_stream_seed(9, "x.png", 1));
    }

    #[test]
    fn output_names() {
        assert_eq!(output_path_for("a/b/c.png", 0), "a/b/c__rce0.png");
        assert_eq!(output_path_for("c.JPG", 12), "c__rce12.png");
        assert_eq!(output_path_for("dir\\noext", 1), "dir/noext__rce1.png");
        assert_eq!(output_path_for(".hidden", 0), ".hidden__rce0.png");
    }

    #[test]
    fn extension_filter() {
        assert!(is_image(Path::new("a/b.PNG")));
        assert!(is_image(Path::new("b.jpeg")));
        assert!(!is_image(Path::new("manifest.jsonl")));
        assert!(!is_image(Path::new("png")));
    }
}
