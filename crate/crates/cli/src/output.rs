//! The three output files of a run. Each starts with the same provenance
//! block so that any file on its own identifies the run that wrote it.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use ucp_core::lab::{ExperimentResult, Outcome};

pub const RUN_FILE: &str = "run.json";
pub const ROWS_FILE: &str = "rows.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub run_id: String,
    pub config_hash: String,
    pub seed: u64,
    pub grid_resolution: String,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    passed: bool,
    exit_code: i32,
    result: &'a ExperimentResult,
    config: serde_json::Value,
}

#[derive(Serialize)]
struct FullReport<'a, R> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    reports: &'a [R],
}

fn format_value(v: f64) -> String {
    format!("{v}")
}

fn write_rows(path: &Path, prov: &Provenance, result: &ExperimentResult) -> io::Result<()> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    writeln!(file, "# tool: {} {}", prov.tool, prov.version)?;
    writeln!(file, "# experiment: {}", prov.experiment)?;
    writeln!(file, "# run_id: {}", prov.run_id)?;
    writeln!(file, "# config_hash: {}", prov.config_hash)?;
    writeln!(file, "# seed: {}", prov.seed)?;
    writeln!(file, "# grid_resolution: {}", prov.grid_resolution)?;
    let mut csv = csv::Writer::from_writer(file);
    let mut header = result.columns.clone();
    header.extend(["config_hash".to_string(), "seed".to_string()]);
    csv.write_record(&header)?;
    let seed = prov.seed.to_string();
    for row in &result.rows {
        let mut rec: Vec<String> = row.iter().copied().map(format_value).collect();
        rec.push(prov.config_hash.clone());
        rec.push(seed.clone());
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> io::Result<()> {
    let mut file = io::BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    file.flush()
}

/// Writes `run.json`, `rows.csv` and `report.json` into `dir`.
pub fn write_outputs<R: Serialize>(
    dir: &Path,
    prov: &Provenance,
    config: serde_json::Value,
    outcome: &Outcome<R>,
    exit_code: i32,
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let summary = RunSummary {
        provenance: prov,
        passed: outcome.result.passed(),
        exit_code,
        result: &outcome.result,
        config,
    };
    write_json(&dir.join(RUN_FILE), &summary)?;
    write_rows(&dir.join(ROWS_FILE), prov, &outcome.result)?;
    write_json(
        &dir.join(REPORT_FILE),
        &FullReport {
            provenance: prov,
            reports: &outcome.reports,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_block_and_provenance_columns() {
        let dir = tempfile::tempdir().unwrap();
        let mut result = ExperimentResult::new("x", 5, &["a", "b"]);
        result.push_row(vec![1.5, f64::INFINITY]);
        let prov = Provenance {
            tool: "ucp",
            version: "0",
            experiment: "x".into(),
            run_id: "abc".into(),
            config_hash: "abcdef".into(),
            seed: 5,
            grid_resolution: "circle n=8".into(),
        };
        let outcome = Outcome::<()> { result, reports: vec![] };
        write_outputs(dir.path(), &prov, serde_json::json!({}), &outcome, 0).unwrap();
        let text = fs::read_to_string(dir.path().join(ROWS_FILE)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[..6].iter().all(|l| l.starts_with("# ")));
        assert_eq!(lines[6], "a,b,config_hash,seed");
        assert_eq!(lines[7], "1.5,inf,abcdef,5");
        let run: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(RUN_FILE)).unwrap()).unwrap();
        assert_eq!(run["run_id"], "abc");
        assert_eq!(run["result"]["rows"][0][1], serde_json::Value::Null);
    }
}
