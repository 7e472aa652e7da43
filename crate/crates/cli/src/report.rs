//! JSON and CSV output of sweep reports.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::experiment::RunReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

pub const CSV_HEADER: [&str; 11] = [
    "method",
    "k",
    "s",
    "t",
    "seed",
    "objective_rel",
    "objective_ratio",
    "constraint_rel",
    "eps_observed",
    "wall_ms",
    "error",
];

pub fn write_json<W: Write>(report: &RunReport, out: W) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(out, report)
}

pub fn read_json(text: &str) -> serde_json::Result<RunReport> {
    serde_json::from_str(text)
}

/// One row per record, preceded by a header row.
pub fn write_csv<W: Write>(report: &RunReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt_usize = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    let opt_f64 = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &report.records {
        w.write_record([
            r.method.clone(),
            r.k.to_string(),
            opt_usize(r.s),
            opt_usize(r.t),
            r.seed.to_string(),
            opt_f64(r.objective_rel),
            opt_f64(r.objective_ratio),
            opt_f64(r.constraint_rel),
            opt_f64(r.eps_observed),
            r.wall_ms.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report<W: Write>(report: &RunReport, format: OutputFormat, out: W) -> anyhow::Result<()> {
    match format {
        OutputFormat::Json => write_json(report, out)?,
        OutputFormat::Csv => write_csv(report, out)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::RunRecord;

    fn record(seed: u64, error: Option<&str>) -> RunRecord {
        RunRecord {
            method: "left".into(),
            k: 3,
            s: Some(12),
            t: None,
            seed,
            objective_rel: error.is_none().then_some(0.25),
            objective_ratio: None,
            constraint_rel: Some(1e-3),
            eps_observed: None,
            wall_ms: 1.5,
            error: error.map(str::to_string),
        }
    }

    #[test]
    fn empty_report_is_valid_json_and_csv() {
        let report = RunReport::empty();
        let mut json = Vec::new();
        write_json(&report, &mut json).unwrap();
        assert_eq!(read_json(std::str::from_utf8(&json).unwrap()).unwrap(), report);
        let mut csv_out = Vec::new();
        write_csv(&report, &mut csv_out).unwrap();
        assert_eq!(String::from_utf8(csv_out).unwrap().lines().count(), 1);
    }

    #[test]
    fn csv_rows_follow_records() {
        let report = RunReport::from_records(None, vec![record(1, None), record(0, Some("rank, deficient"))]);
        let mut out = Vec::new();
        write_csv(&report, &mut out).unwrap();
        let mut rdr = csv::Reader::from_reader(out.as_slice());
        let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[0][4], "0");
        assert_eq!(&rows[0][10], "rank, deficient");
        assert_eq!(&rows[1][5], "0.25");
        assert_eq!(&rows[1][3], "");
    }

    #[test]
    fn json_round_trip() {
        let report = RunReport::from_records(None, vec![record(2, None), record(1, None)]);
        let mut out = Vec::new();
        write_json(&report, &mut out).unwrap();
        let back = read_json(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.aggregates[0].runs, 2);
    }
}
