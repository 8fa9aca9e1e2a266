//! Plot-ready output: CSV with one row per tau, or JSON carrying the full
//! result including coefficient vectors.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::sweep::SweepResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// Serialize the result to a string in the requested format.
pub fn render(result: &SweepResult, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => to_json(result),
        OutputFormat::Csv => to_csv(result),
    }
}

/// Write the rendered result to a file.
pub fn emit(result: &SweepResult, format: OutputFormat, path: &Path) -> io::Result<()> {
    std::fs::write(path, render(result, format))
}

/// Full JSON document; parses back to an identical [`SweepResult`].
pub fn to_json(result: &SweepResult) -> String {
    let mut text = serde_json::to_string_pretty(result).expect("result serializes");
    text.push('\n');
    text
}

/// Parse a JSON document produced by [`to_json`].
pub fn from_json(text: &str) -> serde_json::Result<SweepResult> {
    serde_json::from_str(text)
}

/// One header row, one row per tau. Scalar columns only: per ansatz order
/// `k` the columns `lambda1_k{k}`, `lambda_rmt_k{k}`, `param_distance_k{k}`;
/// coefficient vectors live in the JSON output. Missing diagnostics are
/// empty cells.
pub fn to_csv(result: &SweepResult) -> String {
    let orders: Vec<u8> = result
        .ansatz_labels
        .iter()
        .map(|l| l.order)
        .collect();

    let mut out = String::new();
    out.push_str("tau,qbar_e,spacing_ratio,participation_ratio");
    for k in &orders {
        let _ = write!(out, ",lambda1_k{k},lambda_rmt_k{k},param_distance_k{k}");
    }
    out.push_str(",error\n");

    for record in &result.records {
        let _ = write!(out, "{}", record.tau);
        push_opt(&mut out, record.qbar_e);
        push_opt(&mut out, record.spacing_ratio);
        push_opt(&mut out, record.participation_ratio);
        for k in &orders {
            match record.orders.iter().find(|o| o.order == *k) {
                Some(o) => {
                    push_opt(&mut out, Some(o.lambda1));
                    push_opt(&mut out, o.lambda_rmt);
                    push_opt(&mut out, Some(o.parameter_distance));
                }
                None => out.push_str(",,,"),
            }
        }
        out.push(',');
        if let Some(err) = &record.error {
            let _ = write!(out, "{:?}", err); // quoted, commas escaped
        }
        out.push('\n');
    }
    out
}

fn push_opt(out: &mut String, value: Option<f64>) {
    out.push(',');
    if let Some(v) = value {
        // Display for f64 is the shortest round-tripping representation
        let _ = write!(out, "{v}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Preset, SweepConfig, TauGrid};
    use crate::sweep::run_sweep;

    fn small_config() -> SweepConfig {
        let mut config = SweepConfig::preset(Preset::Fig3);
        config.two_s = 20; // S = 10, D = 21
        config.tau = TauGrid::Explicit { grid: vec![0.5, 1.0, 4.0] };
        config.total_time = 10.0;
        config.ansatz_orders = vec![0, 1];
        config.diagnostics.rmt = false; // quadrature is the slow part
        config
    }

    #[test]
    fn json_round_trip_is_identity() {
        let result = run_sweep(&small_config(), 1).unwrap();
        let text = to_json(&result);
        let parsed = from_json(&text).unwrap();
        assert_eq!(result, parsed);
    }

    #[test]
    fn csv_has_one_row_per_tau_and_documented_columns() {
        let result = run_sweep(&small_config(), 1).unwrap();
        let csv = to_csv(&result);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 3);
        let header = lines[0];
        for column in [
            "tau",
            "qbar_e",
            "spacing_ratio",
            "participation_ratio",
            "lambda1_k0",
            "lambda_rmt_k0",
            "param_distance_k0",
            "lambda1_k1",
        ] {
            assert!(header.contains(column), "missing column {column}");
        }
        // every data row has the same number of fields as the header
        let n_fields = header.split(',').count();
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), n_fields, "row {line}");
        }
    }

    #[test]
    fn formats_parse() {
        assert_eq!("csv".parse::<OutputFormat>().unwrap(), OutputFormat::Csv);
        assert_eq!("JSON".parse::<OutputFormat>().unwrap(), OutputFormat::Json);
        assert!("yaml".parse::<OutputFormat>().is_err());
    }
}
