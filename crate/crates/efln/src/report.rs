//! Result serialization: CSV tables and JSON documents, each embedding the
//! effective run configuration so any output file can be fed back in to
//! reproduce the run.
//!
//! CSV files open with a comment block (`# ` prefixed lines) holding the
//! configuration in TOML, followed by a header line and data rows. JSON
//! files are a single object `{"config": ..., "results": ...}`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::experiments::{IdentifyOutcome, LearningCurve, SweepPoint, SweepVariable};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("serializing configuration: {0}")]
    TomlSer(#[from] toml::ser::Error),
    #[error("parsing embedded configuration: {0}")]
    TomlDe(#[from] toml::de::Error),
    #[error("serializing results: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path} has no embedded configuration block")]
    MissingConfig { path: String },
    #[error("{path} is missing a header line")]
    MissingHeader { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

/// JSON document shape shared by every scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<C, R> {
    pub config: C,
    pub results: R,
}

fn io_err(path: &Path, source: std::io::Error) -> ReportError {
    ReportError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// The embedded-config comment block: the TOML form of `config`, each line
/// prefixed with `# `.
pub fn config_comment_block(config: &impl Serialize) -> Result<String, ReportError> {
    let toml_text = toml::to_string(config)?;
    let mut block = String::with_capacity(toml_text.len() + 64);
    for line in toml_text.lines() {
        if line.is_empty() {
            block.push_str("#\n");
        } else {
            let _ = writeln!(block, "# {line}");
        }
    }
    Ok(block)
}

/// Writes a CSV table with the configuration echoed in a leading comment
/// block. An empty row set still produces the comment block and header.
pub fn write_csv(
    path: &Path,
    config: &impl Serialize,
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<(), ReportError> {
    let mut text = config_comment_block(config)?;
    text.push_str(&columns.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Recovers the configuration embedded in a CSV comment block.
pub fn read_csv_config<C: DeserializeOwned>(path: &Path) -> Result<C, ReportError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut toml_text = String::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            toml_text.push_str(rest.strip_prefix(' ').unwrap_or(rest));
            toml_text.push('\n');
        } else {
            break;
        }
    }
    if toml_text.is_empty() {
        return Err(ReportError::MissingConfig {
            path: path.display().to_string(),
        });
    }
    Ok(toml::from_str(&toml_text)?)
}

/// Reads back a CSV table, skipping the comment block: header then rows.
pub fn read_csv_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), ReportError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| ReportError::MissingHeader {
            path: path.display().to_string(),
        })?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Ok((header, rows))
}

pub fn write_json<C: Serialize, R: Serialize>(
    path: &Path,
    config: &C,
    results: &R,
) -> Result<(), ReportError> {
    let doc = serde_json::json!({ "config": config, "results": results });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_json<C: DeserializeOwned, R: DeserializeOwned>(
    path: &Path,
) -> Result<Document<C, R>, ReportError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Steady-state sweep table: sweep value, theory, simulation, all in dB.
pub fn sweep_table(sweep: SweepVariable, points: &[SweepPoint]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let x_name = match sweep {
        SweepVariable::StepSize => "mu",
        SweepVariable::Snr => "snr_db",
    };
    let rows = points
        .iter()
        .map(|p| {
            vec![
                p.x.to_string(),
                p.theory_db().to_string(),
                p.simulated_db().map_or_else(String::new, |v| v.to_string()),
            ]
        })
        .collect();
    (vec![x_name, "theory_db", "sim_db"], rows)
}

/// Learning curves in long format, one row per iteration per variant.
pub fn curves_table(curves: &[LearningCurve]) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let mut rows = Vec::new();
    for curve in curves {
        for (i, v) in curve.emse_db.iter().enumerate() {
            rows.push(vec![i.to_string(), curve.label.clone(), v.to_string()]);
        }
    }
    (vec!["iteration", "algorithm", "emse_db"], rows)
}

/// Identification trace in wide format: the record plus one prediction
/// column per model.
pub fn identify_trace_table(outcome: &IdentifyOutcome) -> (Vec<String>, Vec<Vec<String>>) {
    let mut columns = vec!["index".to_string(), "input".to_string(), "desired".to_string()];
    let predictions: Vec<Vec<f64>> = outcome
        .reports
        .iter()
        .map(|r| {
            columns.push(format!("predicted_{}", r.label));
            outcome.predicted(r)
        })
        .collect();
    let rows = (0..outcome.samples)
        .map(|i| {
            let mut row = vec![
                i.to_string(),
                outcome.inputs[i].to_string(),
                outcome.desired[i].to_string(),
            ];
            row.extend(predictions.iter().map(|p| p[i].to_string()));
            row
        })
        .collect();
    (columns, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_identify, DataSource, IdentifyConfig};

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    struct DemoConfig {
        seed: u64,
        label: String,
        grid: Vec<f64>,
    }

    fn demo() -> DemoConfig {
        DemoConfig {
            seed: 42,
            label: "demo".to_string(),
            grid: vec![0.1, 1.0],
        }
    }

    #[test]
    fn csv_embeds_and_recovers_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let rows = vec![vec!["1".to_string(), "2.5".to_string()]];
        write_csv(&path, &demo(), &["a", "b"], &rows).unwrap();
        let recovered: DemoConfig = read_csv_config(&path).unwrap();
        assert_eq!(recovered, demo());
        let (header, data) = read_csv_rows(&path).unwrap();
        assert_eq!(header, vec!["a", "b"]);
        assert_eq!(data, rows);
    }

    #[test]
    fn empty_result_set_still_has_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_csv(&path, &demo(), &["x", "y", "z"], &[]).unwrap();
        let (header, data) = read_csv_rows(&path).unwrap();
        assert_eq!(header, vec!["x", "y", "z"]);
        assert!(data.is_empty());
    }

    #[test]
    fn json_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        let results = vec![1.0f64, 2.0, 3.0];
        write_json(&path, &demo(), &results).unwrap();
        let doc: Document<DemoConfig, Vec<f64>> = read_json(&path).unwrap();
        assert_eq!(doc.config, demo());
        assert_eq!(doc.results, results);
    }

    #[test]
    fn csv_without_comment_block_reports_missing_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plain.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        let err = read_csv_config::<DemoConfig>(&path).unwrap_err();
        assert!(matches!(err, ReportError::MissingConfig { .. }));
    }

    #[test]
    fn identify_trace_layout() {
        let cfg = IdentifyConfig {
            source: DataSource::Synthetic { samples: 50 },
            ..IdentifyConfig::default()
        };
        let outcome = run_identify(&cfg).unwrap();
        let (columns, rows) = identify_trace_table(&outcome);
        assert_eq!(
            columns,
            vec![
                "index",
                "input",
                "desired",
                "predicted_efln-isr",
                "predicted_sovf-isr"
            ]
        );
        assert_eq!(rows.len(), 50);
        assert_eq!(rows[0].len(), 5);
        // prediction + error reconstructs desired
        let d: f64 = rows[7][2].parse().unwrap();
        let p: f64 = rows[7][3].parse().unwrap();
        let e = outcome.reports[0].errors[7];
        assert!((d - p - e).abs() < 1e-15);
    }

    #[test]
    fn format_parse() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert_eq!("JSON".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert!("yaml".parse::<OutputFormat>().is_err());
    }
}
