//! Branch-frequency sweeps.
//!
//! Every sweep point replays the same trial seeds, so differences between
//! rows come from the swept parameter alone.

use std::io::Write;

use clap::{Args, ValueEnum};
use rce_core::rce::decide;
use rce_core::region::seed_sequence;
use rce_core::{Branch, RceConfig, RngStream};

use crate::CliError;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "p_r")]
    PR,
    #[value(name = "p_g")]
    PG,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::PR => "p_r",
            SweepParam::PG => "p_g",
        }
    }
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Parameter to sweep.
    #[arg(long, value_enum)]
    sweep: SweepParam,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    step: f64,
    /// Random streams per sweep point.
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    width: u32,
    #[arg(long, default_value_t = 128)]
    height: u32,
    /// p_r held fixed while sweeping p_g.
    #[arg(long = "p-r", default_value_t = rce_core::rce::DEFAULT_P_R)]
    p_r: f64,
    /// p_g held fixed while sweeping p_r.
    #[arg(long = "p-g", default_value_t = rce_core::rce::DEFAULT_P_G)]
    p_g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub identity: f64,
    pub global: f64,
    pub local: f64,
    pub local_nofit: f64,
    pub gray_fraction: f64,
}

/// `from, from + step, ...` up to `to`, each rounded to 9 decimals.
pub fn sweep_points(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Usage(format!("--step must be positive, got {step}")));
    }
    if from.is_nan() || to.is_nan() || from > to {
        return Err(CliError::Usage(format!("empty sweep range: from {from} > to {to}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as u64 + 1;
    Ok((0..n)
        .map(|i| ((from + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

pub fn sweep(args: &StatsArgs) -> Result<Vec<SweepRow>, CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if args.width == 0 || args.height == 0 {
        return Err(CliError::Usage("--width and --height must be at least 1".into()));
    }
    let points = sweep_points(args.from, args.to, args.step)?;
    let seeds: Vec<u64> = seed_sequence(args.seed).take(args.trials as usize).collect();
    let n = args.trials as f64;
    points
        .into_iter()
        .map(|value| {
            let mut cfg = RceConfig { p_r: args.p_r, p_g: args.p_g, ..Default::default() };
            match args.sweep {
                SweepParam::PR => cfg.p_r = value,
                SweepParam::PG => cfg.p_g = value,
            }
            cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let mut counts = [0u64; 4];
            let mut gray = 0.0;
            for &s in &seeds {
                let rec = decide(args.width, args.height, &cfg, &mut RngStream::from_seed(s));
                counts[rec.branch as usize] += 1;
                gray += rec.gray_fraction(args.width, args.height);
            }
            let freq = |b: Branch| counts[b as usize] as f64 / n;
            Ok(SweepRow {
                value,
                identity: freq(Branch::Identity),
                global: freq(Branch::Global),
                local: freq(Branch::Local),
                local_nofit: freq(Branch::LocalNofit),
                gray_fraction: gray / n,
            })
        })
        .collect()
}

pub fn write_csv(param: SweepParam, rows: &[SweepRow], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record([param.name(), "identity", "global", "local", "local_nofit", "gray_fraction"])
        .map_err(io)?;
    for r in rows {
        w.write_record(
            [r.value, r.identity, r.global, r.local, r.local_nofit, r.gray_fraction].map(|v| v.to_string()),
        )
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn run(args: StatsArgs) -> Result<(), CliError> {
    let rows = sweep(&args)?;
    write_csv(args.sweep, &rows, std::io::stdout().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(sweep: SweepParam, from: f64, to: f64, step: f64, trials: u64) -> StatsArgs {
        StatsArgs {
            sweep,
            from,
            to,
            step,
            trials,
            seed: 1,
            width: 256,
            height: 128,
            p_r: 0.4,
            p_g: 0.15,
        }
    }

    #[test]
    fn points_are_clean() {
        assert_eq!(sweep_points(0.0, 1.0, 0.5).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(sweep_points(0.0, 0.3, 0.1).unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(sweep_points(0.2, 0.2, 0.1).unwrap(), vec![0.2]);
    }

    #[test]
    fn bad_ranges() {
        assert!(matches!(sweep_points(0.0, 1.0, 0.0), Err(CliError::Usage(_))));
        assert!(matches!(sweep_points(0.0, 1.0, -0.1), Err(CliError::Usage(_))));
        assert!(matches!(sweep_points(0.6, 0.5, 0.1), Err(CliError::Usage(_))));
        assert!(matches!(sweep(&args(SweepParam::PR, 0.0, 1.5, 0.5, 10)), Err(CliError::Usage(_))));
    }

    #[test]
    fn rows_sum_to_one() {
        let rows = sweep(&args(SweepParam::PR, 0.0, 1.0, 0.25, 2000)).unwrap();
        for r in &rows {
            let total = r.identity + r.global + r.local + r.local_nofit;
            assert!((total - 1.0).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&r.gray_fraction));
        }
        assert_eq!(rows[0].identity, 1.0);
        assert_eq!(rows[0].gray_fraction, 0.0);
        assert_eq!(rows.last().unwrap().identity, 0.0);
    }

    #[test]
    fn csv_layout() {
        let rows = sweep(&args(SweepParam::PG, 0.0, 1.0, 1.0, 10)).unwrap();
        let mut buf = Vec::new();
        write_csv(SweepParam::PG, &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("p_g,identity,global,local,local_nofit,gray_fraction"));
        assert_eq!(lines.count(), 2);
    }
}
