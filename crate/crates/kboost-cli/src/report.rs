//! Report serialization: one CSV per study table plus a JSON metadata file
//! carrying seeds, grids and tuned parameters. Files are written from fully
//! aggregated in-memory results, so identical configurations produce
//! byte-identical output.

use std::path::{Path, PathBuf};

use crate::experiments::{BenchmarkReport, RealReport};
use crate::io::{fmt_g17, write_atomic, IoError};

fn push_row(out: &mut String, fields: &[String]) {
    out.push_str(&fields.join(","));
    out.push('\n');
}

/// Write a simulation-study report. Returns the created file paths.
pub fn write_benchmark_report(
    report: &BenchmarkReport,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, IoError> {
    let (csv_name, mut body) = match report.study.as_str() {
        "lowrank" => ("table2.csv", String::from("n,d,mean,sd\n")),
        "robust" => ("table5.csv", String::from("c,n,method,variant,mean,sd\n")),
        _ => ("table1.csv", String::from("kernel,n,method,mean,sd\n")),
    };

    for cell in &report.cells {
        match report.study.as_str() {
            "lowrank" => {
                let d = cell.rank.map_or_else(|| cell.n.to_string(), |d| d.to_string());
                push_row(
                    &mut body,
                    &[
                        cell.n.to_string(),
                        d,
                        fmt_g17(cell.mean),
                        fmt_g17(cell.sd),
                    ],
                );
            }
            "robust" => {
                let (c, variant) = match cell.c {
                    Some(c) => (fmt_g17(c), "robust"),
                    None => (String::from("-"), "nonrobust"),
                };
                push_row(
                    &mut body,
                    &[
                        c,
                        cell.n.to_string(),
                        cell.method.name().to_string(),
                        variant.to_string(),
                        fmt_g17(cell.mean),
                        fmt_g17(cell.sd),
                    ],
                );
            }
            _ => {
                push_row(
                    &mut body,
                    &[
                        cell.kernel.0.name().to_string(),
                        cell.n.to_string(),
                        cell.method.name().to_string(),
                        fmt_g17(cell.mean),
                        fmt_g17(cell.sd),
                    ],
                );
            }
        }
    }

    let csv_path = out_dir.join(csv_name);
    write_atomic(&csv_path, body.as_bytes())?;
    let meta_path = out_dir.join("metadata.json");
    let meta = serde_json::to_string_pretty(report).expect("report serializes");
    write_atomic(&meta_path, meta.as_bytes())?;
    Ok(vec![csv_path, meta_path])
}

/// Write the real-data report (`table6.csv` + metadata).
pub fn write_real_report(report: &RealReport, out_dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let mut body = String::from("method,variant,factor,c,param,b,mse\n");
    for row in &report.rows {
        let (variant, factor, c) = match (row.factor, row.c) {
            (Some(f), Some(c)) => ("robust", fmt_g17(f), fmt_g17(c)),
            _ => ("nonrobust", String::from("-"), String::from("-")),
        };
        push_row(
            &mut body,
            &[
                row.method.name().to_string(),
                variant.to_string(),
                factor,
                c,
                fmt_g17(row.param),
                row.b.to_string(),
                fmt_g17(row.mse),
            ],
        );
    }
    let csv_path = out_dir.join("table6.csv");
    write_atomic(&csv_path, body.as_bytes())?;
    let meta_path = out_dir.join("metadata.json");
    let meta = serde_json::to_string_pretty(report).expect("report serializes");
    write_atomic(&meta_path, meta.as_bytes())?;
    Ok(vec![csv_path, meta_path])
}
