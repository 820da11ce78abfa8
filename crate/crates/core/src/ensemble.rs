//! Majority-vote analysis of a two-class ensemble.
//!
//! An instance holds the expected labels `o_j` for `k` samples and the
//! outputs `f_ij` of `N` components, all in `{-1, +1}`. The ensemble output
//! on sample `j` is the sign of the vote sum `S_j`; a zero sum is a tie and
//! counts as an error. Error rates are exact fractions over `k`.
//!
//! Indices are zero-based throughout this module.
//!
//! Text format (used by the CLI):
//!
//! ```text
//! N k
//! o_1 ... o_k
//! f_11 ... f_1k
//! ...
//! f_N1 ... f_Nk
//! ```
//!
//! Tokens are `+1`, `1` or `-1`. Blank lines and `#` comments are ignored.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Exact error rate `errors / k`.
pub type ErrorRate = Ratio<u64>;

/// Largest `k` for which [`VoteInstance::search_beneficial_substitutions`]
/// enumerates all `2^k` replacements.
pub const MAX_SEARCH_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    pub fn value(self) -> i64 {
        match self {
            Label::Neg => -1,
            Label::Pos => 1,
        }
    }

    pub fn from_sign(v: i64) -> Option<Label> {
        match v {
            -1 => Some(Label::Neg),
            1 => Some(Label::Pos),
            _ => None,
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Neg => Label::Pos,
            Label::Pos => Label::Neg,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Neg => "-1",
            Label::Pos => "+1",
        })
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i64(self.value())
    }
}

/// `Error(x)`: 0 for a correct product `+1`, 1 for `-1` and for a tie `0`.
fn error_of(product: i64) -> u64 {
    u64::from(product != 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteInstance {
    n_components: usize,
    n_samples: usize,
    expected: Vec<Label>,
    /// Row-major `N x k`.
    outputs: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubstitutionReport {
    pub index_e: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub error_before: ErrorRate,
    #[serde(serialize_with = "ser_ratio")]
    pub error_after: ErrorRate,
    /// Per sample: `Error(f'_j o_j) <= Error(f_j o_j)`.
    pub per_sample_ok: Vec<bool>,
    pub benefit: bool,
    pub tie_count_before: usize,
    pub tie_count_after: usize,
}

fn ser_ratio<S: serde::Serializer>(r: &ErrorRate, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl SubstitutionReport {
    pub fn all_samples_ok(&self) -> bool {
        self.per_sample_ok.iter().all(|&ok| ok)
    }
}

impl VoteInstance {
    pub fn new(expected: Vec<Label>, rows: Vec<Vec<Label>>) -> Result<Self> {
        let k = expected.len();
        let n = rows.len();
        if k == 0 || n == 0 {
            return Err(Error::Shape(format!("need N >= 1 and k >= 1, got N = {n}, k = {k}")));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != k) {
            return Err(Error::Shape(format!("row {i} has {} entries, expected {k}", row.len())));
        }
        Ok(Self {
            n_components: n,
            n_samples: k,
            expected,
            outputs: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds an instance from `±1` integers.
    pub fn from_signs(expected: &[i64], rows: &[Vec<i64>]) -> Result<Self> {
        let conv = |v: &[i64]| -> Result<Vec<Label>> {
            v.iter()
                .map(|&x| Label::from_sign(x).ok_or_else(|| Error::Shape(format!("label {x} is not -1 or +1"))))
                .collect()
        };
        let rows = rows.iter().map(|r| conv(r)).collect::<Result<Vec<_>>>()?;
        Self::new(conv(expected)?, rows)
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn expected(&self) -> &[Label] {
        &self.expected
    }

    pub fn row(&self, i: usize) -> &[Label] {
        &self.outputs[i * self.n_samples..(i + 1) * self.n_samples]
    }

    pub fn output(&self, i: usize, j: usize) -> Label {
        self.outputs[i * self.n_samples + j]
    }

    fn check_component(&self, i: usize) -> Result<()> {
        if i < self.n_components {
            Ok(())
        } else {
            Err(Error::Index {
                what: "component",
                index: i,
                valid: format!("0..{}", self.n_components),
            })
        }
    }

    fn check_sample(&self, j: usize) -> Result<()> {
        if j < self.n_samples {
            Ok(())
        } else {
            Err(Error::Index {
                what: "sample",
                index: j,
                valid: format!("0..{}", self.n_samples),
            })
        }
    }

    fn rate(&self, errors: u64) -> ErrorRate {
        Ratio::new(errors, self.n_samples as u64)
    }

    /// `E_i`: fraction of samples where component `i` disagrees with `O`.
    pub fn component_error(&self, i: usize) -> Result<ErrorRate> {
        self.check_component(i)?;
        let errors = self
            .row(i)
            .iter()
            .zip(&self.expected)
            .map(|(f, o)| error_of(f.value() * o.value()))
            .sum();
        Ok(self.rate(errors))
    }

    /// `S_j = sum_i f_ij`.
    pub fn vote_sum(&self, j: usize) -> Result<i64> {
        self.check_sample(j)?;
        Ok(self.vote_sum_unchecked(j))
    }

    fn vote_sum_unchecked(&self, j: usize) -> i64 {
        (0..self.n_components).map(|i| self.output(i, j).value()).sum()
    }

    /// `Sgn(S_j)` in `{-1, 0, +1}`.
    pub fn ensemble_output(&self, j: usize) -> Result<i64> {
        Ok(self.vote_sum(j)?.signum())
    }

    /// `Ê`, with ties counted as errors.
    pub fn ensemble_error(&self) -> ErrorRate {
        let errors = (0..self.n_samples)
            .map(|j| error_of(self.vote_sum_unchecked(j).signum() * self.expected[j].value()))
            .sum();
        self.rate(errors)
    }

    /// Number of samples with `S_j = 0`.
    pub fn tie_count(&self) -> usize {
        (0..self.n_samples).filter(|&j| self.vote_sum_unchecked(j) == 0).count()
    }

    /// Replaces component `e` with `replacement` and compares errors.
    pub fn substitute_and_compare(&self, e: usize, replacement: &[Label]) -> Result<SubstitutionReport> {
        self.check_component(e)?;
        if replacement.len() != self.n_samples {
            return Err(Error::Shape(format!(
                "replacement has {} entries, expected {}",
                replacement.len(),
                self.n_samples
            )));
        }
        let rest = self.sums_without(e);
        Ok(self.report(e, &rest, replacement))
    }

    /// `S_j - f_ej` for every sample.
    fn sums_without(&self, e: usize) -> Vec<i64> {
        (0..self.n_samples)
            .map(|j| self.vote_sum_unchecked(j) - self.output(e, j).value())
            .collect()
    }

    fn report(&self, e: usize, rest: &[i64], replacement: &[Label]) -> SubstitutionReport {
        let mut before = 0;
        let mut after = 0;
        let mut ties_before = 0;
        let mut ties_after = 0;
        let mut per_sample_ok = Vec::with_capacity(self.n_samples);
        for j in 0..self.n_samples {
            let o = self.expected[j].value();
            let s = rest[j] + self.output(e, j).value();
            let s_new = rest[j] + replacement[j].value();
            let err = error_of(s.signum() * o);
            let err_new = error_of(s_new.signum() * o);
            before += err;
            after += err_new;
            ties_before += usize::from(s == 0);
            ties_after += usize::from(s_new == 0);
            per_sample_ok.push(err_new <= err);
        }
        let report = SubstitutionReport {
            index_e: e,
            error_before: self.rate(before),
            error_after: self.rate(after),
            benefit: after <= before,
            per_sample_ok,
            tie_count_before: ties_before,
            tie_count_after: ties_after,
        };
        // Summing the per-sample inequality over all samples gives Ê' <= Ê.
        assert!(
            !report.all_samples_ok() || report.benefit,
            "per-sample inequality held everywhere but the total error grew"
        );
        report
    }

    /// Every replacement of component `e` that strictly lowers `Ê`, sorted
    /// by the new error (stable in enumeration order for equal errors).
    ///
    /// Candidates are enumerated by mask `m` in `0..2^k`, with sample `j`
    /// set to `+1` when bit `j` of `m` is set.
    pub fn search_beneficial_substitutions(&self, e: usize) -> Result<Vec<(Vec<Label>, SubstitutionReport)>> {
        self.check_component(e)?;
        let k = self.n_samples;
        if k > MAX_SEARCH_SAMPLES {
            return Err(Error::SearchTooLarge {
                k,
                limit: MAX_SEARCH_SAMPLES,
            });
        }
        let rest = self.sums_without(e);
        let before = self.ensemble_error();
        let expected: Vec<i64> = self.expected.iter().map(|o| o.value()).collect();
        let mut found: Vec<_> = (0u32..1 << k)
            .into_par_iter()
            .filter_map(|mask| {
                let label = |j: usize| if mask >> j & 1 == 1 { 1 } else { -1 };
                let errors: u64 = (0..k).map(|j| error_of((rest[j] + label(j)).signum() * expected[j])).sum();
                if self.rate(errors) >= before {
                    return None;
                }
                let replacement: Vec<Label> = (0..k).map(|j| Label::from_sign(label(j)).unwrap()).collect();
                let report = self.report(e, &rest, &replacement);
                Some((replacement, report))
            })
            .collect();
        found.sort_by_key(|(_, r)| r.error_after);
        Ok(found)
    }

    /// Parses a single line of `k` labels (the replacement-file format).
    pub fn parse_labels(text: &str, k: usize) -> Result<Vec<Label>> {
        let mut lines = data_lines(text);
        let Some((line_no, line)) = lines.next() else {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "empty input, expected a line of labels".into(),
            });
        };
        let labels = parse_label_line(line_no, line, k)?;
        if let Some((extra, l)) = lines.next() {
            return Err(Error::Parse {
                line: extra,
                column: first_column(l),
                message: "unexpected extra line".into(),
            });
        }
        Ok(labels)
    }
}

/// Recomputes `Ê` by counting each side's votes per sample, independently
/// of the sign-of-sum formulation.
pub fn brute_force_error(inst: &VoteInstance) -> ErrorRate {
    let mut wrong = 0u64;
    for j in 0..inst.n_samples() {
        let mut pos = 0usize;
        let mut neg = 0usize;
        for i in 0..inst.n_components() {
            match inst.output(i, j) {
                Label::Pos => pos += 1,
                Label::Neg => neg += 1,
            }
        }
        let winner = if pos > neg {
            Some(Label::Pos)
        } else if neg > pos {
            Some(Label::Neg)
        } else {
            None
        };
        if winner != Some(inst.expected()[j]) {
            wrong += 1;
        }
    }
    Ratio::new(wrong, inst.n_samples() as u64)
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("");
        (!line.trim().is_empty()).then_some((i + 1, line))
    })
}

fn first_column(line: &str) -> usize {
    line.len() - line.trim_start().len() + 1
}

/// Tokens with their 1-based column.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let base = line.as_ptr() as usize;
    line.split_whitespace().map(move |t| (t.as_ptr() as usize - base + 1, t))
}

fn parse_label_line(line_no: usize, line: &str, k: usize) -> Result<Vec<Label>> {
    let mut out = Vec::with_capacity(k);
    for (column, tok) in tokens(line) {
        let label = match tok {
            "+1" | "1" => Label::Pos,
            "-1" => Label::Neg,
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    column,
                    message: format!("invalid label {other:?}, expected +1 or -1"),
                })
            }
        };
        if out.len() == k {
            return Err(Error::Parse {
                line: line_no,
                column,
                message: format!("too many labels, expected {k}"),
            });
        }
        out.push(label);
    }
    if out.len() < k {
        return Err(Error::Parse {
            line: line_no,
            column: line.trim_end().len() + 1,
            message: format!("expected {k} labels, found {}", out.len()),
        });
    }
    Ok(out)
}

fn parse_count(line_no: usize, column: usize, tok: &str, name: &str) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(Error::Parse {
            line: line_no,
            column,
            message: format!("invalid {name} {tok:?}, expected a positive integer"),
        }),
    }
}

impl FromStr for VoteInstance {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = data_lines(text);
        let Some((hdr_no, header)) = lines.next() else {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                message: "empty instance, expected header \"N k\"".into(),
            });
        };
        let head: Vec<_> = tokens(header).collect();
        if head.len() != 2 {
            return Err(Error::Parse {
                line: hdr_no,
                column: head.get(2).map_or(first_column(header), |t| t.0),
                message: format!("header must be \"N k\", found {} tokens", head.len()),
            });
        }
        let n = parse_count(hdr_no, head[0].0, head[0].1, "component count N")?;
        let k = parse_count(hdr_no, head[1].0, head[1].1, "sample count k")?;

        let mut next_row = |what: &str| -> Result<Vec<Label>> {
            match lines.next() {
                Some((no, line)) => parse_label_line(no, line, k),
                None => Err(Error::Parse {
                    line: text.lines().count() + 1,
                    column: 1,
                    message: format!("unexpected end of input, expected {what}"),
                }),
            }
        };
        let expected = next_row("expected labels O")?;
        let rows = (1..=n)
            .map(|i| next_row(&format!("row {i} of {n}")))
            .collect::<Result<Vec<_>>>()?;
        if let Some((no, line)) = lines.next() {
            return Err(Error::Parse {
                line: no,
                column: first_column(line),
                message: format!("unexpected extra line after {n} rows"),
            });
        }
        VoteInstance::new(expected, rows)
    }
}

impl fmt::Display for VoteInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Label]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        writeln!(f, "{} {}", self.n_components, self.n_samples)?;
        writeln!(f, "{}", join(&self.expected))?;
        for i in 0..self.n_components {
            writeln!(f, "{}", join(self.row(i)))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: u64, d: u64) -> ErrorRate {
        Ratio::new(n, d)
    }

    fn worked() -> VoteInstance {
        VoteInstance::from_signs(&[1, 1], &[vec![1, 1], vec![-1, -1], vec![1, -1]]).unwrap()
    }

    #[test]
    fn component_errors() {
        let inst = VoteInstance::from_signs(&[1, 1, 1], &[vec![1, 1, 1], vec![1, 1, -1], vec![-1, -1, -1]]).unwrap();
        assert_eq!(inst.component_error(0).unwrap(), r(0, 1));
        assert_eq!(inst.component_error(1).unwrap(), r(1, 3));
        assert_eq!(inst.component_error(2).unwrap(), r(1, 1));
        assert!(matches!(inst.component_error(3), Err(Error::Index { .. })));
    }

    #[test]
    fn vote_sums_and_signs() {
        let three = VoteInstance::from_signs(&[1], &[vec![1], vec![1], vec![1]]).unwrap();
        assert_eq!(three.vote_sum(0).unwrap(), 3);
        assert_eq!(three.ensemble_output(0).unwrap(), 1);
        let two = VoteInstance::from_signs(&[1], &[vec![1], vec![-1]]).unwrap();
        assert_eq!(two.vote_sum(0).unwrap(), 0);
        assert_eq!(two.ensemble_output(0).unwrap(), 0);
        let five = VoteInstance::from_signs(&[1], &[vec![1], vec![1], vec![-1], vec![-1], vec![-1]]).unwrap();
        assert_eq!(five.vote_sum(0).unwrap(), -1);
        assert_eq!(five.ensemble_output(0).unwrap(), -1);
        assert!(five.vote_sum(1).is_err());
    }

    #[test]
    fn ensemble_errors() {
        let perfect = VoteInstance::from_signs(&[1, -1], &[vec![1, -1], vec![1, -1]]).unwrap();
        assert_eq!(perfect.ensemble_error(), r(0, 1));
        assert_eq!(worked().ensemble_error(), r(1, 2));
        let tie = VoteInstance::from_signs(&[1], &[vec![1], vec![-1]]).unwrap();
        assert_eq!(tie.ensemble_error(), r(1, 1));
        assert_eq!(tie.tie_count(), 1);
    }

    #[test]
    fn identity_substitution() {
        let inst = worked();
        for e in 0..3 {
            let rep = inst.substitute_and_compare(e, inst.row(e)).unwrap();
            assert_eq!(rep.error_before, rep.error_after);
            assert!(rep.all_samples_ok() && rep.benefit);
        }
    }

    #[test]
    fn worked_substitution() {
        let inst = worked();
        let rep = inst.substitute_and_compare(2, &[Label::Pos, Label::Pos]).unwrap();
        assert_eq!(rep.error_before, r(1, 2));
        assert_eq!(rep.error_after, r(0, 1));
        assert!(rep.benefit);
        assert_eq!(rep.per_sample_ok, vec![true, true]);
    }

    #[test]
    fn one_deviating_voter_is_outvoted() {
        let inst = VoteInstance::from_signs(&[1], &[vec![1], vec![1], vec![1]]).unwrap();
        let rep = inst.substitute_and_compare(0, &[Label::Neg]).unwrap();
        assert_eq!((rep.error_before, rep.error_after), (r(0, 1), r(0, 1)));
        assert!(rep.benefit);
    }

    #[test]
    fn substitution_argument_errors() {
        let inst = worked();
        assert!(matches!(inst.substitute_and_compare(3, &[Label::Pos; 2]), Err(Error::Index { .. })));
        assert!(matches!(inst.substitute_and_compare(0, &[Label::Pos; 3]), Err(Error::Shape(_))));
    }

    #[test]
    fn search_finds_worked_replacement() {
        let found = worked().search_beneficial_substitutions(2).unwrap();
        assert!(!found.is_empty());
        assert_eq!(found[0].0, vec![Label::Pos, Label::Pos]);
        assert_eq!(found[0].1.error_after, r(0, 1));
        assert!(found.iter().all(|(_, rep)| rep.benefit && rep.error_after < rep.error_before));
        assert!(found.windows(2).all(|w| w[0].1.error_after <= w[1].1.error_after));
    }

    #[test]
    fn search_on_perfect_instance_is_empty() {
        let inst = VoteInstance::from_signs(&[1, -1, 1], &vec![vec![1, -1, 1]; 3]).unwrap();
        assert!(inst.search_beneficial_substitutions(1).unwrap().is_empty());
    }

    #[test]
    fn search_refuses_large_k() {
        let inst = VoteInstance::from_signs(&[1; 21], &[vec![1; 21]]).unwrap();
        assert!(matches!(
            inst.search_beneficial_substitutions(0),
            Err(Error::SearchTooLarge { k: 21, .. })
        ));
    }

    #[test]
    fn single_component_reduces_to_component_error() {
        let inst = VoteInstance::from_signs(&[1, -1, 1, 1], &[vec![1, 1, -1, 1]]).unwrap();
        assert_eq!(inst.ensemble_error(), inst.component_error(0).unwrap());
        assert_eq!(brute_force_error(&inst), inst.component_error(0).unwrap());
    }

    #[test]
    fn parse_and_print() {
        let text = "# worked case\n3 2\n+1 +1\n+1 +1\n-1 -1\n1 -1\n\n";
        let inst: VoteInstance = text.parse().unwrap();
        assert_eq!(inst, worked());
        assert_eq!(inst.to_string().parse::<VoteInstance>().unwrap(), inst);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let bad_token = "2 2\n+1 +1\n+1 0\n-1 -1\n";
        match bad_token.parse::<VoteInstance>() {
            Err(Error::Parse { line, column, message }) => {
                assert_eq!((line, column), (3, 4));
                assert!(message.contains("\"0\""), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let short = "2 3\n+1 +1 +1\n+1 +1\n";
        assert!(matches!(short.parse::<VoteInstance>(), Err(Error::Parse { line: 3, .. })));
        let missing = "2 1\n+1\n+1\n";
        assert!(matches!(missing.parse::<VoteInstance>(), Err(Error::Parse { .. })));
        let header = "2 x\n";
        assert!(matches!(header.parse::<VoteInstance>(), Err(Error::Parse { line: 1, column: 3, .. })));
        let extra = "1 1\n+1\n+1\n-1\n";
        assert!(matches!(extra.parse::<VoteInstance>(), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn parse_replacement_line() {
        assert_eq!(VoteInstance::parse_labels("+1 -1\n", 2).unwrap(), vec![Label::Pos, Label::Neg]);
        assert!(VoteInstance::parse_labels("+1\n", 2).is_err());
        assert!(VoteInstance::parse_labels("", 2).is_err());
    }

    fn instance_strategy() -> impl Strategy<Value = VoteInstance> {
        (1usize..=9, 1usize..=12).prop_flat_map(|(n, k)| {
            (
                proptest::collection::vec(any::<bool>(), k),
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), k), n),
            )
                .prop_map(|(o, f)| {
                    let lab = |b: &bool| if *b { Label::Pos } else { Label::Neg };
                    VoteInstance::new(o.iter().map(lab).collect(), f.iter().map(|r| r.iter().map(lab).collect()).collect())
                        .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn oracle_agrees(inst in instance_strategy()) {
            prop_assert_eq!(inst.ensemble_error(), brute_force_error(&inst));
        }

        #[test]
        fn vote_sum_parity(inst in instance_strategy()) {
            let n = inst.n_components() as i64;
            for j in 0..inst.n_samples() {
                let s = inst.vote_sum(j).unwrap();
                prop_assert!(s.abs() <= n && (s - n) % 2 == 0);
            }
            if n % 2 == 1 {
                prop_assert_eq!(inst.tie_count(), 0);
            }
        }

        #[test]
        fn component_errors_are_multiples_of_one_over_k(inst in instance_strategy()) {
            let k = inst.n_samples() as u64;
            for i in 0..inst.n_components() {
                let e = inst.component_error(i).unwrap();
                prop_assert!(k.is_multiple_of(*e.denom()) && *e.numer() <= *e.denom());
            }
        }

        #[test]
        fn text_round_trip(inst in instance_strategy()) {
            prop_assert_eq!(inst.to_string().parse::<VoteInstance>().unwrap(), inst);
        }
    }
}
