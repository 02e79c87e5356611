//! Pipeline subcommands. Each reads its inputs from files, writes its
//! outputs under the output directory and returns a short summary.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use churnforge::evaluation::{
    compare_learners, rank_features, render_ranking_csv, render_ranking_table, render_report_csv, render_report_table, select_best,
    ConfusionMatrix,
};
use churnforge::features::{extract_churn, extract_winback, standard_windows, FeatureMatrix, Role, Row, Task, WindowSpec};
use churnforge::learners::{train, Algorithm, Model};
use churnforge::model_io::{load_model, save_adtree, save_model};
use churnforge::rebalance::{oversample, undersample};
use churnforge::telco::{generate, read_tables, write_tables, TelcoDataset};

use crate::config::PipelineConfig;
use crate::error::CliError;
use crate::task::Direction;

pub const TRAIN_FILE: &str = "train.csv";
pub const TEST_FILE: &str = "test.csv";
pub const TEST_LABELS_FILE: &str = "test_labels.csv";
pub const COMPARISON_TXT: &str = "comparison.txt";
pub const COMPARISON_CSV: &str = "comparison.csv";
pub const BEST_FILE: &str = "best_learner.txt";
pub const MODEL_FILE: &str = "model.cfm";
pub const ADTREE_FILE: &str = "model.adt";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const HOLDOUT_FILE: &str = "holdout.csv";
pub const RANKING_TXT: &str = "feature_ranking.txt";
pub const RANKING_CSV: &str = "feature_ranking.csv";

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn read_matrix(path: &Path) -> Result<FeatureMatrix, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    FeatureMatrix::read_csv(BufReader::new(file)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_matrix(matrix: &FeatureMatrix, path: &Path) -> Result<(), CliError> {
    let mut buf = Vec::new();
    matrix.write_csv(&mut buf)?;
    write_file(path, std::str::from_utf8(&buf).expect("csv output is UTF-8"))
}

fn out(c: &PipelineConfig, name: &str) -> PathBuf {
    c.out_dir.join(name)
}

pub fn cmd_generate(c: &PipelineConfig) -> Result<String, CliError> {
    let data = generate(&c.generator_config())?;
    write_tables(&data, &c.data_dir)?;
    Ok(format!("wrote {} subscribers to {}", data.subscribers.len(), c.data_dir.display()))
}

fn extract(data: &TelcoDataset, c: &PipelineConfig, role: Role) -> Result<FeatureMatrix, CliError> {
    let window: WindowSpec = standard_windows(c.task.task, role);
    Ok(match c.task.task {
        Task::Churn => extract_churn(data, &window, c.task.population)?,
        Task::Winback => extract_winback(data, &window, c.task.population)?,
    })
}

/// Writes the labeled training matrix, the unlabeled test matrix and the
/// test labels as a separate holdout file.
pub fn cmd_extract(c: &PipelineConfig) -> Result<String, CliError> {
    let data = read_tables(&c.data_dir)?;
    let train_m = extract(&data, c, Role::Train)?;
    let test_m = extract(&data, c, Role::Test)?;
    write_matrix(&train_m, &out(c, TRAIN_FILE))?;
    write_matrix(&test_m.without_labels(), &out(c, TEST_FILE))?;
    let mut labels = String::from("billing_id,label\n");
    for r in test_m.rows() {
        writeln!(labels, "{},{}", r.billing_id, r.label.expect("extraction labels every row")).unwrap();
    }
    write_file(&out(c, TEST_LABELS_FILE), &labels)?;
    let (n0, n1) = train_m.class_counts().unwrap_or((0, 0));
    Ok(format!(
        "{}: {} training rows ({n1} positive, {n0} negative), {} test rows",
        c.task,
        train_m.len(),
        test_m.len()
    ))
}

/// Cross-validates every configured learner on the undersampled training
/// matrix and records the best one.
pub fn cmd_compare(c: &PipelineConfig) -> Result<String, CliError> {
    let balanced = undersample(&read_matrix(&out(c, TRAIN_FILE))?, c.seed)?;
    let specs: Vec<_> = c.learners.iter().map(|&a| c.learner_spec(a)).collect();
    let report = compare_learners(&balanced, &specs, c.folds, c.seed)?;
    let best = select_best(&report)?;
    let table = render_report_table(&report);
    let text = format!(
        "{}, {}-fold cross-validation on {} balanced rows\n\n{table}",
        c.task,
        c.folds,
        balanced.len()
    );
    write_file(&out(c, COMPARISON_TXT), &text)?;
    write_file(&out(c, COMPARISON_CSV), &render_report_csv(&report))?;
    let chosen = report.results[best].spec.algorithm;
    write_file(&out(c, BEST_FILE), &format!("{chosen}\n"))?;
    Ok(format!("{text}\nbest: {}", chosen.display_name()))
}

/// Retrains the selected learner on the oversampled training matrix.
pub fn cmd_train_final(c: &PipelineConfig) -> Result<String, CliError> {
    let best_path = out(c, BEST_FILE);
    let algorithm = if best_path.exists() {
        let id = fs::read_to_string(&best_path).map_err(|e| io_err(&best_path, e))?;
        id.trim().parse::<Algorithm>()?
    } else {
        c.final_learner
    };
    let over = oversample(&read_matrix(&out(c, TRAIN_FILE))?, c.seed)?;
    let model = train(&over, &c.learner_spec(algorithm))?;
    save_model(&model, &out(c, MODEL_FILE))?;
    if let Model::AdTree(t) = &model.model {
        save_adtree(t, &out(c, ADTREE_FILE))?;
    }
    Ok(format!("trained {} on {} oversampled rows", algorithm.display_name(), over.len()))
}

/// Test rows in ranking order: highest score first for churn and win-back
/// problems, the exact reverse for loyalty problems. Equal scores order by
/// billing id.
pub fn rank_rows(billing_ids: &[&str], scores: &[f64], direction: Direction) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| billing_ids[a].cmp(billing_ids[b])));
    if direction == Direction::Loyal {
        order.reverse();
    }
    order
}

fn read_labels(path: &Path) -> Result<std::collections::HashMap<String, u8>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, h)| h) != Some("billing_id,label") {
        return Err(CliError::Io(format!("{}: expected header billing_id,label", path.display())));
    }
    lines
        .map(|(n, l)| match l.split_once(',') {
            Some((id, "0")) => Ok((id.to_string(), 0)),
            Some((id, "1")) => Ok((id.to_string(), 1)),
            _ => Err(CliError::Io(format!("{}:{}: malformed label row", path.display(), n + 1))),
        })
        .collect()
}

fn metrics_line(name: &str, m: &ConfusionMatrix) -> String {
    let f = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    format!(
        "{name},{},{},{},{},{},{},{},{}\n",
        m.total(),
        f(m.prec_1()),
        f(m.prec_0()),
        f(m.accuracy()),
        m.tp,
        m.fp,
        m.tn,
        m.fn_
    )
}

/// Scores the unlabeled test matrix and writes the top-N ranking. With
/// holdout labels configured it also scores predictions against them, on all
/// rows and on a class-balanced undersample.
pub fn cmd_predict(c: &PipelineConfig) -> Result<String, CliError> {
    let model = load_model(&out(c, MODEL_FILE))?;
    let test = read_matrix(&out(c, TEST_FILE))?;
    let test = if test.features() == model.features.as_slice() {
        test
    } else {
        test.conform_to(&model.features)?
    };
    let predictions = model.predict_matrix(&test)?;
    let ids: Vec<&str> = test.rows().iter().map(|r| r.billing_id.as_str()).collect();
    let scores: Vec<f64> = predictions.iter().map(|p| p.score).collect();
    let order = rank_rows(&ids, &scores, c.task.direction);
    let mut csv = String::from("billing_id,score,rank\n");
    for (rank, &i) in order.iter().take(c.top_n).enumerate() {
        writeln!(csv, "{},{},{}", ids[i], scores[i], rank + 1).unwrap();
    }
    write_file(&out(c, PREDICTIONS_FILE), &csv)?;
    let mut summary = format!("wrote {} of {} ranked rows for {}", order.len().min(c.top_n), order.len(), c.task);

    if let Some(path) = &c.holdout_labels {
        let labels = read_labels(path)?;
        let rows = test
            .rows()
            .iter()
            .map(|r| {
                let label = labels.get(&r.billing_id).copied();
                label
                    .map(|y| Row {
                        label: Some(y),
                        ..r.clone()
                    })
                    .ok_or_else(|| CliError::Io(format!("no holdout label for {}", r.billing_id)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let labeled = FeatureMatrix::from_rows(test.features().to_vec(), rows)?;
        let all = ConfusionMatrix::from_pairs(predictions.iter().map(|p| p.class).zip(labeled.labels().expect("labeled")));
        let balanced = undersample(&labeled, c.seed)?;
        let bal_preds = model.predict_matrix(&balanced)?;
        let bal = ConfusionMatrix::from_pairs(bal_preds.iter().map(|p| p.class).zip(balanced.labels().expect("labeled")));
        let text = format!(
            "set,rows,prec_1,prec_0,accuracy,tp,fp,tn,fn\n{}{}",
            metrics_line("all", &all),
            metrics_line("balanced", &bal)
        );
        write_file(&out(c, HOLDOUT_FILE), &text)?;
        let pct = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.1}"));
        write!(
            summary,
            "\nholdout Prec_1 {} (balanced {}), accuracy {} (balanced {})",
            pct(all.prec_1()),
            pct(bal.prec_1()),
            pct(all.accuracy()),
            pct(bal.accuracy())
        )
        .unwrap();
    }
    Ok(summary)
}

/// Ranks features by single-split information gain on the undersampled
/// training matrix.
pub fn cmd_rank_features(c: &PipelineConfig) -> Result<String, CliError> {
    let balanced = undersample(&read_matrix(&out(c, TRAIN_FILE))?, c.seed)?;
    let scores = rank_features(&balanced, c.rank_top_n);
    let table = render_ranking_table(&scores);
    write_file(&out(c, RANKING_TXT), &table)?;
    write_file(&out(c, RANKING_CSV), &render_ranking_csv(&scores))?;
    Ok(table)
}
