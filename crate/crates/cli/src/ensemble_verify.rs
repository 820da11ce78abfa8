use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use rce_core::ensemble::{brute_force_error, Label, SubstitutionReport, VoteInstance};

use crate::CliError;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Instance file: "N k", the expected labels, then N rows of ±1.
    #[arg(long)]
    instance: PathBuf,
    /// Component to substitute, 1-based.
    #[arg(long)]
    substitute: usize,
    /// File with one line of k ±1 labels to put in place of the component.
    #[arg(long, conflicts_with = "search")]
    replacement: Option<PathBuf>,
    /// Enumerate all 2^k replacements and list the ones that lower the error.
    #[arg(long)]
    search: bool,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn labels(v: &[Label]) -> String {
    let parts: Vec<_> = v.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(" "))
}

fn checks(r: &SubstitutionReport) -> String {
    let parts: Vec<_> = r.per_sample_ok.iter().map(|&ok| if ok { "ok" } else { "FAIL" }).collect();
    parts.join(" ")
}

/// Builds the full text report. Separate from printing for testing.
pub fn report(args: &VerifyArgs) -> Result<String, CliError> {
    let inst: VoteInstance = read(&args.instance)?
        .parse()
        .map_err(|e| CliError::Data(format!("{}: {e}", args.instance.display())))?;
    let n = inst.n_components();
    if args.substitute == 0 || args.substitute > n {
        return Err(CliError::Data(format!(
            "--substitute {} out of range (components are numbered 1..={n})",
            args.substitute
        )));
    }
    let e = args.substitute - 1;

    let mut out = String::new();
    writeln!(out, "instance: N = {n}, k = {}", inst.n_samples()).unwrap();
    for i in 0..n {
        writeln!(out, "E_{} = {}", i + 1, inst.component_error(i)?).unwrap();
    }
    writeln!(
        out,
        "ensemble error = {} (vote-count check {}), ties = {}",
        inst.ensemble_error(),
        brute_force_error(&inst),
        inst.tie_count()
    )
    .unwrap();

    if let Some(path) = &args.replacement {
        let replacement = VoteInstance::parse_labels(&read(path)?, inst.n_samples())
            .map_err(|err| CliError::Data(format!("{}: {err}", path.display())))?;
        let r = inst.substitute_and_compare(e, &replacement)?;
        writeln!(out, "substitute component {} with {}", args.substitute, labels(&replacement)).unwrap();
        writeln!(out, "  error before = {}", r.error_before).unwrap();
        writeln!(out, "  error after  = {}", r.error_after).unwrap();
        writeln!(out, "  ties before = {}, after = {}", r.tie_count_before, r.tie_count_after).unwrap();
        writeln!(out, "  per-sample check: {}", checks(&r)).unwrap();
        writeln!(out, "  benefit: {}", if r.benefit { "yes" } else { "no" }).unwrap();
    } else if args.search {
        let found = inst.search_beneficial_substitutions(e)?;
        writeln!(
            out,
            "search over 2^{} replacements for component {}: {} lower the error",
            inst.n_samples(),
            args.substitute,
            found.len()
        )
        .unwrap();
        for (rep, r) in &found {
            writeln!(
                out,
                "  {}  error after = {}  ties = {}  per-sample: {}",
                labels(rep),
                r.error_after,
                r.tie_count_after,
                checks(r)
            )
            .unwrap();
        }
    }
    Ok(out)
}

pub fn run(args: VerifyArgs) -> Result<(), CliError> {
    print!("{}", report(&args)?);
    Ok(())
}
