//! Experiment report rows, CSV emission and parsing, and per-cell summaries.

use crate::{CliError, CliResult};
use aad_core::Method;
use std::path::Path;

pub const CSV_HEADER: &str = "method,training_size,fold,seed,transductive_accuracy,\
inductive_accuracy,wall_time_seconds,normalized_cpu_time,iterations_run,converged";

pub const SUMMARY_HEADER: &str = "method,training_size,n,transductive_mean,transductive_std,\
inductive_mean,inductive_std,normalized_cpu_time_mean,normalized_cpu_time_std";

/// One (method, size, fold, seed) cell. The transductive accuracy is absent
/// for the supervised method, which is evaluated inductively only.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub method: Method,
    pub training_size: usize,
    pub fold: usize,
    pub seed: u64,
    pub transductive_accuracy: Option<f64>,
    pub inductive_accuracy: f64,
    pub wall_time_seconds: f64,
    pub normalized_cpu_time: f64,
    pub iterations_run: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    /// Canonical row order: (method name, training size, fold, seed).
    pub fn sort_rows(&mut self) {
        self.rows.sort_by(|a, b| {
            (a.method.name(), a.training_size, a.fold, a.seed)
                .cmp(&(b.method.name(), b.training_size, b.fold, b.seed))
        });
    }
}

/// Formats a float with 6 significant digits, preferring plain decimal
/// notation for moderate magnitudes.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..6).contains(&exp) {
        let prec = (5 - exp).max(0) as usize;
        format!("{v:.prec$}")
    } else {
        format!("{v:.5e}")
    }
}

fn row_line(r: &ReportRow) -> String {
    let trans = r
        .transductive_accuracy
        .map(fmt_sig)
        .unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.method.name(),
        r.training_size,
        r.fold,
        r.seed,
        trans,
        fmt_sig(r.inductive_accuracy),
        fmt_sig(r.wall_time_seconds),
        fmt_sig(r.normalized_cpu_time),
        r.iterations_run,
        r.converged
    )
}

pub fn to_csv_string(report: &ExperimentReport) -> String {
    let mut sorted = report.clone();
    sorted.sort_rows();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &sorted.rows {
        out.push_str(&row_line(r));
        out.push('\n');
    }
    out
}

pub fn emit_csv(report: &ExperimentReport, path: &Path) -> CliResult<()> {
    std::fs::write(path, to_csv_string(report))?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str, lineno: usize) -> CliResult<T> {
    s.parse()
        .map_err(|_| CliError::Data(format!("line {lineno}: bad {what} '{s}'")))
}

pub fn parse_csv(text: &str) -> CliResult<ExperimentReport> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == CSV_HEADER => {}
        _ => return Err(CliError::Data("missing or wrong CSV header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(CliError::Data(format!(
                "line {lineno}: expected 10 fields, got {}",
                f.len()
            )));
        }
        rows.push(ReportRow {
            method: f[0]
                .parse()
                .map_err(|_| CliError::Data(format!("line {lineno}: unknown method '{}'", f[0])))?,
            training_size: parse_field(f[1], "training_size", lineno)?,
            fold: parse_field(f[2], "fold", lineno)?,
            seed: parse_field(f[3], "seed", lineno)?,
            transductive_accuracy: if f[4].is_empty() {
                None
            } else {
                Some(parse_field(f[4], "transductive_accuracy", lineno)?)
            },
            inductive_accuracy: parse_field(f[5], "inductive_accuracy", lineno)?,
            wall_time_seconds: parse_field(f[6], "wall_time_seconds", lineno)?,
            normalized_cpu_time: parse_field(f[7], "normalized_cpu_time", lineno)?,
            iterations_run: parse_field(f[8], "iterations_run", lineno)?,
            converged: parse_field(f[9], "converged", lineno)?,
        });
    }
    Ok(ExperimentReport { rows })
}

pub fn read_csv(path: &Path) -> CliResult<ExperimentReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parse_csv(&text)
}

/// Mean and population standard deviation.
pub fn mean_std(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per (method, training_size) aggregate across folds and seeds.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub method: Method,
    pub training_size: usize,
    pub n: usize,
    /// Absent when no row in the group carries a transductive accuracy.
    pub transductive: Option<(f64, f64)>,
    pub inductive: (f64, f64),
    pub normalized_cpu_time: (f64, f64),
}

pub fn summarize(report: &ExperimentReport) -> Vec<SummaryRow> {
    let mut sorted = report.clone();
    sorted.sort_rows();
    let mut out: Vec<SummaryRow> = Vec::new();
    let mut i = 0;
    while i < sorted.rows.len() {
        let key = (sorted.rows[i].method, sorted.rows[i].training_size);
        let mut j = i;
        while j < sorted.rows.len()
            && (sorted.rows[j].method, sorted.rows[j].training_size) == key
        {
            j += 1;
        }
        let group = &sorted.rows[i..j];
        let trans: Vec<f64> = group
            .iter()
            .filter_map(|r| r.transductive_accuracy)
            .collect();
        let ind: Vec<f64> = group.iter().map(|r| r.inductive_accuracy).collect();
        let norm: Vec<f64> = group.iter().map(|r| r.normalized_cpu_time).collect();
        out.push(SummaryRow {
            method: key.0,
            training_size: key.1,
            n: group.len(),
            transductive: if trans.is_empty() {
                None
            } else {
                Some(mean_std(&trans))
            },
            inductive: mean_std(&ind),
            normalized_cpu_time: mean_std(&norm),
        });
        i = j;
    }
    out
}

pub fn summary_to_csv_string(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let (tm, ts) = match r.transductive {
            Some((m, s)) => (fmt_sig(m), fmt_sig(s)),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.method.name(),
            r.training_size,
            r.n,
            tm,
            ts,
            fmt_sig(r.inductive.0),
            fmt_sig(r.inductive.1),
            fmt_sig(r.normalized_cpu_time.0),
            fmt_sig(r.normalized_cpu_time.1)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn row(method: Method, size: usize, fold: usize, seed: u64, acc: f64) -> ReportRow {
        ReportRow {
            method,
            training_size: size,
            fold,
            seed,
            transductive_accuracy: Some(acc),
            inductive_accuracy: acc,
            wall_time_seconds: 0.5,
            normalized_cpu_time: 1.0,
            iterations_run: 3,
            converged: true,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let s = to_csv_string(&ExperimentReport::default());
        assert_eq!(s, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn one_row_roundtrips() {
        let report = ExperimentReport {
            rows: vec![row(Method::Single, 10, 1, 7, 0.875)],
        };
        let back = parse_csv(&to_csv_string(&report)).unwrap();
        assert_eq!(back.rows.len(), 1);
        let r = &back.rows[0];
        assert_eq!(r.method, Method::Single);
        assert_eq!(r.training_size, 10);
        assert_eq!(r.fold, 1);
        assert_eq!(r.seed, 7);
        assert_eq!(r.transductive_accuracy, Some(0.875));
        assert_eq!(r.inductive_accuracy, 0.875);
        assert_eq!(r.iterations_run, 3);
        assert!(r.converged);
    }

    #[test]
    fn supervised_row_has_empty_transductive_field() {
        let mut r = row(Method::Supervised, 10, 0, 0, 0.9);
        r.transductive_accuracy = None;
        let s = to_csv_string(&ExperimentReport { rows: vec![r] });
        let line = s.lines().nth(1).unwrap();
        assert!(line.starts_with("supervised,10,0,0,,0.900000,"));
        let back = parse_csv(&s).unwrap();
        assert_eq!(back.rows[0].transductive_accuracy, None);
    }

    #[test]
    fn row_order_is_invariant_to_insertion_order() {
        let a = vec![
            row(Method::Two, 5, 0, 0, 0.5),
            row(Method::Single, 10, 1, 2, 0.6),
            row(Method::Single, 10, 0, 9, 0.7),
            row(Method::Single, 5, 2, 1, 0.8),
        ];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(
            to_csv_string(&ExperimentReport { rows: a }),
            to_csv_string(&ExperimentReport { rows: b })
        );
    }

    #[test]
    fn fmt_sig_gives_six_significant_digits() {
        assert_eq!(fmt_sig(0.5), "0.500000");
        assert_eq!(fmt_sig(1.0), "1.00000");
        assert_eq!(fmt_sig(0.9666666666), "0.966667");
        assert_eq!(fmt_sig(123456.0), "123456");
        assert_eq!(fmt_sig(0.000123456749), "0.000123457");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.2345678e-7), "1.23457e-7");
    }

    #[test]
    fn single_row_summary_has_zero_std() {
        let report = ExperimentReport {
            rows: vec![row(Method::Single, 10, 0, 0, 0.8)],
        };
        let s = summarize(&report);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].n, 1);
        assert_eq!(s[0].inductive, (0.8, 0.0));
        assert_eq!(s[0].transductive, Some((0.8, 0.0)));
    }

    #[test]
    fn two_row_summary_matches_population_statistics() {
        let report = ExperimentReport {
            rows: vec![
                row(Method::Single, 10, 0, 0, 0.4),
                row(Method::Single, 10, 1, 0, 0.6),
            ],
        };
        let s = summarize(&report);
        let (m, sd) = s[0].inductive;
        assert!((m - 0.5).abs() < 1e-15);
        assert!((sd - 0.1).abs() < 1e-15);
    }

    #[test]
    fn summary_matches_independent_statistics_on_random_rows() {
        use statrs::statistics::Statistics;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let rows: Vec<ReportRow> = (0..100)
            .map(|i| {
                let mut r = row(Method::Soft, 20, i % 3, (i / 3) as u64, rng.gen_range(0.0..1.0));
                r.inductive_accuracy = rng.gen_range(0.0..1.0);
                r.normalized_cpu_time = rng.gen_range(0.5..4.0);
                r
            })
            .collect();
        let trans: Vec<f64> = rows.iter().map(|r| r.transductive_accuracy.unwrap()).collect();
        let ind: Vec<f64> = rows.iter().map(|r| r.inductive_accuracy).collect();
        let norm: Vec<f64> = rows.iter().map(|r| r.normalized_cpu_time).collect();
        let s = &summarize(&ExperimentReport { rows: rows.clone() })[0];
        let check = |got: (f64, f64), vals: &[f64]| {
            let mean = Statistics::mean(vals);
            let std = Statistics::population_variance(vals).sqrt();
            assert!((got.0 - mean).abs() <= 1e-12);
            assert!((got.1 - std).abs() <= 1e-12);
        };
        check(s.transductive.unwrap(), &trans);
        check(s.inductive, &ind);
        check(s.normalized_cpu_time, &norm);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(parse_csv("not,a,header\n").is_err());
        let bad_fields = format!("{CSV_HEADER}\nsingle,10,0\n");
        assert!(parse_csv(&bad_fields).is_err());
        let bad_method = format!("{CSV_HEADER}\nwhat,10,0,0,,0.5,0.1,1.0,3,true\n");
        assert!(parse_csv(&bad_method).is_err());
    }
}
