use std::path::{Path, PathBuf};

use clap::Args;
use rce_core::pipeline::{run_corpus, CorpusJob, MANIFEST_FILE};
use rce_core::{Direction, RceConfig};
use serde::Deserialize;

use crate::CliError;

#[derive(Args, Debug, Default)]
pub struct ApplyArgs {
    /// Directory of source images (PNG, JPEG, BMP).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Directory for augmented PNGs and manifest.jsonl.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Erasing probability [default: 0.40]
    #[arg(long = "p-r")]
    p_r: Option<f64>,
    /// Global (whole-image) probability given erasing [default: 0.15]
    #[arg(long = "p-g")]
    p_g: Option<f64>,
    /// Master seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Augmented copies per source image [default: 1]
    #[arg(long)]
    passes: Option<u32>,
    /// Worker threads [default: available cores]
    #[arg(long)]
    workers: Option<usize>,
    /// Smallest rectangle area fraction [default: 0.02]
    #[arg(long = "area-lo")]
    area_lo: Option<f64>,
    /// Largest rectangle area fraction [default: 0.4]
    #[arg(long = "area-hi")]
    area_hi: Option<f64>,
    /// Smallest aspect ratio h/w [default: 0.3]
    #[arg(long = "aspect-lo")]
    aspect_lo: Option<f64>,
    /// Largest aspect ratio h/w [default: 3.3333 (1/0.3)]
    #[arg(long = "aspect-hi")]
    aspect_hi: Option<f64>,
    /// Rectangle sampling attempts before giving up [default: 100]
    #[arg(long = "max-attempts")]
    max_attempts: Option<u32>,
    /// Which image supplies the local patch [default: gray-on-color]
    #[arg(long, value_parser = parse_direction)]
    direction: Option<Direction>,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: rce_core::Error| e.to_string())
}

/// Config file mirror of [`ApplyArgs`].
#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    p_r: Option<f64>,
    p_g: Option<f64>,
    seed: Option<u64>,
    passes: Option<u32>,
    workers: Option<usize>,
    area_lo: Option<f64>,
    area_hi: Option<f64>,
    aspect_lo: Option<f64>,
    aspect_hi: Option<f64>,
    max_attempts: Option<u32>,
    direction: Option<Direction>,
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn build_job(args: ApplyArgs) -> Result<CorpusJob, CliError> {
    let file = match &args.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    let input = args
        .input
        .or(file.input)
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let output = args
        .output
        .or(file.output)
        .ok_or_else(|| CliError::Usage("--output is required".into()))?;

    let mut cfg = RceConfig::default();
    cfg.p_r = args.p_r.or(file.p_r).unwrap_or(cfg.p_r);
    cfg.p_g = args.p_g.or(file.p_g).unwrap_or(cfg.p_g);
    cfg.direction = args.direction.or(file.direction).unwrap_or(cfg.direction);
    let r = &mut cfg.region;
    r.area_lo = args.area_lo.or(file.area_lo).unwrap_or(r.area_lo);
    r.area_hi = args.area_hi.or(file.area_hi).unwrap_or(r.area_hi);
    r.aspect_lo = args.aspect_lo.or(file.aspect_lo).unwrap_or(r.aspect_lo);
    r.aspect_hi = args.aspect_hi.or(file.aspect_hi).unwrap_or(r.aspect_hi);
    r.max_attempts = args.max_attempts.or(file.max_attempts).unwrap_or(r.max_attempts);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let workers = match args.workers.or(file.workers) {
        Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let passes = args.passes.or(file.passes).unwrap_or(1);
    if passes == 0 {
        return Err(CliError::Usage("--passes must be at least 1".into()));
    }
    if !input.is_dir() {
        return Err(CliError::Io(format!("{}: input directory does not exist", input.display())));
    }
    Ok(CorpusJob {
        input_root: input,
        output_root: output,
        cfg,
        master_seed: args.seed.or(file.seed).unwrap_or(0),
        workers,
        passes,
    })
}

pub fn run(args: ApplyArgs) -> Result<(), CliError> {
    let job = build_job(args)?;
    let manifest = run_corpus(&job)?;
    let manifest_path = job.output_root.join(MANIFEST_FILE);
    manifest.write(&manifest_path)?;

    for w in &manifest.warnings {
        eprintln!("warning: skipped {}: {}", w.path, w.message);
    }
    let sources = manifest.entries.len() / job.passes as usize;
    println!(
        "{} images x {} passes -> {} outputs",
        sources,
        job.passes,
        manifest.entries.len()
    );
    for (branch, n) in manifest.branch_counts() {
        println!("{:<12} {n}", branch.as_str());
    }
    println!("{:<12} {}", "skipped", manifest.warnings.len());
    println!("manifest: {}", manifest_path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args_with_dirs(dir: &Path) -> ApplyArgs {
        ApplyArgs {
            input: Some(dir.to_path_buf()),
            output: Some(dir.join("out")),
            ..Default::default()
        }
    }

    #[test]
    fn defaults_match_core() {
        let dir = tempfile::tempdir().unwrap();
        let job = build_job(args_with_dirs(dir.path())).unwrap();
        assert_eq!(job.cfg, RceConfig::default());
        assert_eq!((job.master_seed, job.passes), (0, 1));
        assert!(job.workers >= 1);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        std::fs::write(&cfg, "p-r = 0.9\np-g = 0.5\nseed = 3\ndirection = \"color-on-gray\"\n").unwrap();
        let args = ApplyArgs {
            p_r: Some(0.2),
            config: Some(cfg),
            ..args_with_dirs(dir.path())
        };
        let job = build_job(args).unwrap();
        assert_eq!(job.cfg.p_r, 0.2);
        assert_eq!(job.cfg.p_g, 0.5);
        assert_eq!(job.master_seed, 3);
        assert_eq!(job.cfg.direction, Direction::ColorOnGray);
    }

    #[test]
    fn unknown_config_key_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        std::fs::write(&cfg, "p_r = 0.9\n").unwrap();
        let args = ApplyArgs {
            config: Some(cfg),
            ..args_with_dirs(dir.path())
        };
        assert!(matches!(build_job(args), Err(CliError::Usage(_))));
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        for args in [
            ApplyArgs { p_r: Some(1.5), ..args_with_dirs(dir.path()) },
            ApplyArgs { p_g: Some(-0.1), ..args_with_dirs(dir.path()) },
            ApplyArgs { workers: Some(0), ..args_with_dirs(dir.path()) },
            ApplyArgs { passes: Some(0), ..args_with_dirs(dir.path()) },
            ApplyArgs { area_lo: Some(0.0), ..args_with_dirs(dir.path()) },
            ApplyArgs { input: None, ..args_with_dirs(dir.path()) },
        ] {
            assert!(matches!(build_job(args), Err(CliError::Usage(_))));
        }
    }

    #[test]
    fn missing_input_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let args = ApplyArgs {
            input: Some(dir.path().join("nope")),
            ..args_with_dirs(dir.path())
        };
        assert!(matches!(build_job(args), Err(CliError::Io(_))));
    }
}
