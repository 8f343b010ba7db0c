use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::config::ReportFormat;
use super::run::RunReport;

/// Writes `bytes` to a sibling temp file, then renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// One CSV row: identification columns, hyper-parameters, counts, then
/// metrics in name order.
pub fn metrics_csv(report: &RunReport) -> Result<String> {
    let mut header = vec![
        "backend".to_string(),
        "task".into(),
        "config_hash".into(),
        "eta".into(),
        "lambda".into(),
        "alpha".into(),
        "records".into(),
        "skipped".into(),
    ];
    let mut row = vec![
        report.backend.clone(),
        report.config.task.to_string(),
        report.config_hash.clone(),
        report.resolved.eta.to_string(),
        report.resolved.lambda.to_string(),
        report.resolved.alpha.to_string(),
        report.stats.processed.to_string(),
        report.stats.skipped.to_string(),
    ];
    for (name, value) in &report.metrics.values {
        header.push(name.clone());
        row.push(value.to_string());
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))
        .and_then(|b| String::from_utf8(b).map_err(|e| Error::Config(e.to_string())))
}

/// Writes `report.json` and/or `metrics.csv` into `dir`; recall runs also get
/// `recall.json` / `recall.csv`. Returns the written paths.
pub fn emit_report(report: &RunReport, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    if formats.is_empty() {
        return Err(Error::Config("formats: at least one report format is required".into()));
    }
    let mut written = Vec::new();
    for format in formats {
        match format {
            ReportFormat::Json => {
                let path = dir.join("report.json");
                let mut text = serde_json::to_string_pretty(report)?;
                text.push('\n');
                write_atomic(&path, text.as_bytes())?;
                written.push(path);
                if let Some(m) = &report.recall {
                    let path = dir.join("recall.json");
                    write_atomic(&path, (m.to_json()? + "\n").as_bytes())?;
                    written.push(path);
                }
            }
            ReportFormat::Csv => {
                let path = dir.join("metrics.csv");
                write_atomic(&path, metrics_csv(report)?.as_bytes())?;
                written.push(path);
                if let Some(m) = &report.recall {
                    let path = dir.join("recall.csv");
                    let mut buf = Vec::new();
                    m.write_csv(&mut buf)?;
                    write_atomic(&path, &buf)?;
                    written.push(path);
                }
            }
        }
    }
    Ok(written)
}
