//! Report files: per-fold CSV, timing CSV, text tables and length-sweep plot data.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::cv::{CvResult, EvalReport, SweepPoint};
use crate::error::{Error, Result};
use crate::recommend::MethodKind;

pub const REPORT_CSV: &str = "report.csv";
pub const TIMINGS_CSV: &str = "timings.csv";
pub const REPORT_TXT: &str = "report.txt";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const DIVERSITY_PLOT_CSV: &str = "plot_diversity_vs_length.csv";
pub const DISPLACEMENT_PLOT_CSV: &str = "plot_displacement_vs_length.csv";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportFiles {
    pub written: Vec<PathBuf>,
}

const COLUMNS: [&str; 10] = [
    "model",
    "fold",
    "sessions",
    "precision_pair",
    "recall_pair",
    "pairs_f1",
    "diversity",
    "diversity_raw",
    "displacement_sum_km",
    "displacement_mean_km",
];

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn csv_with_header(path: &Path, comment: &str) -> Result<csv::Writer<BufWriter<File>>> {
    let mut w = create(path)?;
    writeln!(w, "# {comment}").map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(w))
}

fn finish(w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .flush()
        .map_err(|e| Error::io(path, e))
}

fn fold_label(fold: Option<usize>) -> String {
    fold.map_or_else(|| "mean".to_string(), |f| f.to_string())
}

/// Display name for a method tag, or the tag itself for unknown methods.
pub fn display_name(tag: &str) -> String {
    tag.parse::<MethodKind>().map_or_else(|_| tag.to_string(), |m| m.display_name().to_string())
}

/// Write `report.csv`, `timings.csv` and `report.txt` into `dir`. Timings
/// live in their own file so the report itself is reproducible byte for byte.
pub fn write_report(dir: &Path, result: &CvResult, header: &str, diversity_raw: bool) -> Result<ReportFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = ReportFiles::default();
    let rows: Vec<&EvalReport> = result.folds.iter().chain(&result.aggregate).collect();

    let path = dir.join(REPORT_CSV);
    let mut w = csv_with_header(&path, header)?;
    w.write_record(COLUMNS)?;
    for r in &rows {
        w.write_record([
            r.model.clone(),
            fold_label(r.fold),
            r.sessions.to_string(),
            r.precision.to_string(),
            r.recall.to_string(),
            r.pairs_f1.to_string(),
            r.diversity.to_string(),
            r.diversity_raw.to_string(),
            r.displacement_sum_km.to_string(),
            r.displacement_mean_km.to_string(),
        ])?;
    }
    finish(w, &path)?;
    files.written.push(path);

    let path = dir.join(TIMINGS_CSV);
    let mut w = csv_with_header(&path, header)?;
    w.write_record(["model", "fold", "seconds"])?;
    for r in &rows {
        w.write_record([r.model.clone(), fold_label(r.fold), format!("{:.3}", r.seconds)])?;
    }
    finish(w, &path)?;
    files.written.push(path);

    let path = dir.join(REPORT_TXT);
    fs::write(&path, render_tables(&result.aggregate, header, diversity_raw)).map_err(|e| Error::io(&path, e))?;
    files.written.push(path);

    if !result.sweep.is_empty() {
        files.written.extend(write_sweep(dir, &result.sweep, header)?.written);
    }
    Ok(files)
}

/// Rows of a `report.csv`.
pub fn read_report_csv(path: &Path) -> Result<Vec<EvalReport>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let idx: Vec<usize> = COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[idx[i]].parse().map_err(|_| Error::Invalid(format!("bad number {:?} in column {}", &rec[idx[i]], COLUMNS[i])))
        };
        let fold = match &rec[idx[1]] {
            "mean" => None,
            f => Some(f.parse().map_err(|_| Error::Invalid(format!("bad fold {f:?}")))?),
        };
        out.push(EvalReport {
            model: rec[idx[0]].to_string(),
            fold,
            sessions: rec[idx[2]].parse().map_err(|_| Error::Invalid(format!("bad session count {:?}", &rec[idx[2]])))?,
            precision: num(3)?,
            recall: num(4)?,
            pairs_f1: num(5)?,
            diversity: num(6)?,
            diversity_raw: num(7)?,
            displacement_sum_km: num(8)?,
            displacement_mean_km: num(9)?,
            seconds: 0.0,
        });
    }
    Ok(out)
}

fn table(out: &mut String, title: &str, head: &[&str], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = head.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        parts.join(" | ").trim_end().to_string()
    };
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", line(&head.iter().map(|h| h.to_string()).collect::<Vec<_>>()));
    let _ = writeln!(out, "{}", rule.join("-+-"));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
    out.push('\n');
}

/// Two text tables over fold-averaged rows: pair scores, then diversity and
/// displacement.
pub fn render_tables(aggregate: &[EvalReport], header: &str, diversity_raw: bool) -> String {
    let mut out = format!("# {header}\n\n");
    let rows: Vec<Vec<String>> = aggregate
        .iter()
        .map(|r| {
            vec![
                display_name(&r.model),
                format!("{:.5}", r.precision),
                format!("{:.5}", r.recall),
                format!("{:.5}", r.pairs_f1),
            ]
        })
        .collect();
    table(&mut out, "Pair F-score", &["Models", "Precision_PAIR", "Recall_PAIR", "Pair-F1"], &rows);
    let mut head = vec!["Models", "Diversity"];
    if diversity_raw {
        head.push("Diversity (pairs)");
    }
    head.extend(["Displacement (km)", "Mean displacement (km)"]);
    let rows: Vec<Vec<String>> = aggregate
        .iter()
        .map(|r| {
            let mut row = vec![display_name(&r.model), format!("{:.5}", r.diversity)];
            if diversity_raw {
                row.push(format!("{:.3}", r.diversity_raw));
            }
            row.push(format!("{:.3}", r.displacement_sum_km));
            row.push(format!("{:.3}", r.displacement_mean_km));
            row
        })
        .collect();
    table(&mut out, "Diversity and displacement", &head, &rows);
    out
}

/// Write `sweep.csv` (long format) plus one wide plot table per metric with
/// a `length` column and one column per method.
pub fn write_sweep(dir: &Path, sweep: &[SweepPoint], header: &str) -> Result<ReportFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = ReportFiles::default();
    let path = dir.join(SWEEP_CSV);
    let mut w = csv_with_header(&path, header)?;
    w.write_record(["model", "length", "sessions", "diversity", "displacement_mean_km"])?;
    for p in sweep {
        w.write_record([
            p.model.clone(),
            p.length.to_string(),
            p.sessions.to_string(),
            p.diversity.to_string(),
            p.displacement_mean_km.to_string(),
        ])?;
    }
    finish(w, &path)?;
    files.written.push(path);

    let mut models: Vec<&str> = Vec::new();
    for p in sweep {
        if !models.contains(&p.model.as_str()) {
            models.push(&p.model);
        }
    }
    let lengths: BTreeSet<usize> = sweep.iter().map(|p| p.length).collect();
    for (name, pick) in [
        (DIVERSITY_PLOT_CSV, (|p: &SweepPoint| p.diversity) as fn(&SweepPoint) -> f64),
        (DISPLACEMENT_PLOT_CSV, |p: &SweepPoint| p.displacement_mean_km),
    ] {
        let path = dir.join(name);
        let mut w = csv_with_header(&path, header)?;
        let mut head = vec!["length".to_string()];
        head.extend(models.iter().map(|m| display_name(m)));
        w.write_record(&head)?;
        for &len in &lengths {
            let mut row = vec![len.to_string()];
            for m in &models {
                row.push(
                    sweep
                        .iter()
                        .find(|p| p.model == *m && p.length == len)
                        .map_or_else(String::new, |p| pick(p).to_string()),
                );
            }
            w.write_record(&row)?;
        }
        finish(w, &path)?;
        files.written.push(path);
    }
    Ok(files)
}

/// Points of a `sweep.csv`.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepPoint>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
