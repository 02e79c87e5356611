//! Plain-text and CSV renderings of reports. Percentages print with one
//! decimal in tables and four in CSV; undefined values print as `n/a`.

use std::fmt::Write;

use super::{EvalReport, FeatureScore};

fn cell(value: Option<f64>, decimals: usize) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.decimals$}"))
}

/// Metrics as rows and learners as columns, right-aligned.
pub fn render_report_table(report: &EvalReport) -> String {
    let mut columns: Vec<Vec<String>> = vec![vec![String::new(), "Prec_1".into(), "Prec_0".into(), "Accu.".into()]];
    for r in &report.results {
        let mut col = vec![r.label.clone()];
        match &r.outcome {
            Ok(s) => {
                let p = s.pooled;
                col.extend([cell(p.prec_1(), 1), cell(p.prec_0(), 1), cell(p.accuracy(), 1)]);
            }
            Err(_) => col.extend(std::iter::repeat_n("error".to_string(), 3)),
        }
        columns.push(col);
    }
    let widths: Vec<usize> = columns.iter().map(|c| c.iter().map(String::len).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for row in 0..4 {
        let line: Vec<String> = columns
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(j, (c, &w))| {
                if j == 0 {
                    format!("{:<w$}", c[row])
                } else {
                    format!("{:>w$}", c[row])
                }
            })
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
    }
    for r in &report.results {
        if let Err(e) = &r.outcome {
            writeln!(out, "{}: {e}", r.label).unwrap();
        }
    }
    out
}

/// One line per learner with pooled counts and metrics.
pub fn render_report_csv(report: &EvalReport) -> String {
    let mut out = String::from("learner,algorithm,prec_1,prec_0,accuracy,tp,fp,tn,fn,error\n");
    for r in &report.results {
        let id = r.spec.algorithm.id();
        match &r.outcome {
            Ok(s) => {
                let p = s.pooled;
                writeln!(
                    out,
                    "{},{id},{},{},{},{},{},{},{},",
                    r.label,
                    cell(p.prec_1(), 4),
                    cell(p.prec_0(), 4),
                    cell(p.accuracy(), 4),
                    p.tp,
                    p.fp,
                    p.tn,
                    p.fn_
                )
                .unwrap();
            }
            Err(e) => writeln!(out, "{},{id},,,,,,,,\"{}\"", r.label, e.to_string().replace('"', "\"\"")).unwrap(),
        }
    }
    out
}

pub fn render_ranking_table(scores: &[FeatureScore]) -> String {
    let width = scores.iter().map(|s| s.feature.len()).max().unwrap_or(0).max(7);
    let mut out = format!("{:>4}  {:<width$}  {}\n", "Rank", "Feature", "Gain");
    for (i, s) in scores.iter().enumerate() {
        writeln!(out, "{:>4}  {:<width$}  {:.6}", i + 1, s.feature, s.gain).unwrap();
    }
    out
}

pub fn render_ranking_csv(scores: &[FeatureScore]) -> String {
    let mut out = String::from("rank,feature,gain\n");
    for (i, s) in scores.iter().enumerate() {
        writeln!(out, "{},{},{:.6}", i + 1, s.feature, s.gain).unwrap();
    }
    out
}
