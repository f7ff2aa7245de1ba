//! Report emission: metrics CSV (long format), explanation JSON records,
//! DOT edit scripts, and the tier comparison table. Field ordering and
//! file ordering are stable, so identical inputs produce byte-identical
//! trees.

use super::experiment::ExperimentOutput;
use super::ingest::Corpus;
use super::PipelineError;
use crate::metrics::{compare_tiers, MetricsReport};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

fn write(path: &Path, text: &str) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| PipelineError::Io {
            context: format!("creating {}", parent.display()),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| PipelineError::Io {
        context: format!("writing {}", path.display()),
        source: e,
    })
}

/// Write every report artifact under `out_dir`; returns the files written,
/// sorted.
pub fn emit_reports(
    outputs: &[ExperimentOutput],
    corpus: &Corpus,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>, PipelineError> {
    let out_dir = out_dir.as_ref();
    let mut written = Vec::new();

    // Long-format metrics: one row per (engine, metric, k, value).
    let mut metrics_csv = String::from("engine,metric,k,value\n");
    for output in outputs {
        for (metric, k, value) in output.report.rows() {
            let k_field = if k == 0 { String::new() } else { k.to_string() };
            metrics_csv.push_str(&format!(
                "{},{metric},{k_field},{value}\n",
                output.engine_label
            ));
        }
    }
    let metrics_path = out_dir.join("metrics.csv");
    write(&metrics_path, &metrics_csv)?;
    written.push(metrics_path);

    for output in outputs {
        let mut jsonl = String::new();
        for record in &output.explanations {
            jsonl.push_str(&serde_json::to_string(record).expect("record serializes"));
            jsonl.push('\n');
        }
        let path = out_dir.join(format!("explanations-{}.jsonl", output.engine_label));
        write(&path, &jsonl)?;
        written.push(path);

        for record in &output.explanations {
            let source = corpus
                .graph(&record.query_id)
                .expect("query graph exists in corpus");
            let dot = record.script().to_dot(source);
            let path = out_dir
                .join("dot")
                .join(&output.engine_label)
                .join(format!("{}.dot", record.query_id));
            write(&path, &dot)?;
            written.push(path);
        }
    }

    if outputs.len() >= 2 {
        let reports: BTreeMap<String, MetricsReport> = outputs
            .iter()
            .map(|o| (o.engine_label.clone(), o.report.clone()))
            .collect();
        let table = compare_tiers(&reports);
        let csv_path = out_dir.join("comparison.csv");
        write(&csv_path, &table.to_csv())?;
        written.push(csv_path);
        let txt_path = out_dir.join("comparison.txt");
        write(&txt_path, &table.to_text())?;
        written.push(txt_path);
    }

    written.sort();
    Ok(written)
}
