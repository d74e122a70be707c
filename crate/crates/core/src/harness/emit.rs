use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::Method;
use super::trial::TrialReport;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 14] = [
    "experiment_id",
    "trial",
    "method",
    "noise_pos_sigma_m",
    "noise_rot_sigma_deg",
    "bias_pos_m",
    "bias_rot_deg",
    "num_agents",
    "outlier_rate",
    "pos_rmse_m",
    "pos_mae_m",
    "rot_rmse_deg",
    "rot_mae_deg",
    "clamp_events",
];

/// One method's aggregate errors for one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment_id: String,
    pub trial: usize,
    pub method: Method,
    pub noise_pos_sigma_m: f64,
    pub noise_rot_sigma_deg: f64,
    pub bias_pos_m: f64,
    pub bias_rot_deg: f64,
    pub num_agents: usize,
    pub outlier_rate: f64,
    pub pos_rmse_m: f64,
    pub pos_mae_m: f64,
    pub rot_rmse_deg: f64,
    pub rot_mae_deg: f64,
    pub clamp_events: usize,
}

pub fn rows_from_reports(reports: &[TrialReport]) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for r in reports {
        for (&method, a) in &r.aggregates {
            rows.push(ReportRow {
                experiment_id: r.experiment_id.clone(),
                trial: r.trial,
                method,
                noise_pos_sigma_m: r.noise_pos_sigma_m,
                noise_rot_sigma_deg: r.noise_rot_sigma_deg,
                bias_pos_m: r.bias_pos_m,
                bias_rot_deg: r.bias_rot_deg,
                num_agents: r.num_agents,
                outlier_rate: r.outlier_rate,
                pos_rmse_m: a.position_rmse,
                pos_mae_m: a.position_mae,
                rot_rmse_deg: a.rotation_rmse,
                rot_mae_deg: a.rotation_mae,
                clamp_events: r.flags.get(&method).map_or(0, |f| f.clamp_events),
            });
        }
    }
    rows
}

fn num(v: f64) -> String {
    format!("{v:.9e}")
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.experiment_id.clone(),
            r.trial.to_string(),
            r.method.name().to_string(),
            num(r.noise_pos_sigma_m),
            num(r.noise_rot_sigma_deg),
            num(r.bias_pos_m),
            num(r.bias_rot_deg),
            r.num_agents.to_string(),
            num(r.outlier_rate),
            num(r.pos_rmse_m),
            num(r.pos_mae_m),
            num(r.rot_rmse_deg),
            num(r.rot_mae_deg),
            r.clamp_events.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::InvalidParameter(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_json<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, rows)?;
    Ok(())
}

pub fn read_json<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
    Ok(serde_json::from_reader(input)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn write_rows_to_path(rows: &[ReportRow], path: &Path, format: Format) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(rows, &mut w)?,
        Format::Json => write_json(rows, &mut w)?,
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows_from_path(path: &Path, format: Format) -> Result<Vec<ReportRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let r = BufReader::new(file);
    match format {
        Format::Csv => read_csv(r),
        Format::Json => read_json(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(trial: usize) -> ReportRow {
        ReportRow {
            experiment_id: "e,1".into(),
            trial,
            method: Method::TReweight,
            noise_pos_sigma_m: 0.4,
            noise_rot_sigma_deg: 4.0,
            bias_pos_m: 0.0,
            bias_rot_deg: 0.0,
            num_agents: 7,
            outlier_rate: 0.2,
            pos_rmse_m: 0.123_456_789_123,
            pos_mae_m: 1e-17,
            rot_rmse_deg: 3.0,
            rot_mae_deg: 2.5,
            clamp_events: 4,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn csv_round_trip_to_nine_digits() {
        let rows = vec![row(0), row(1)];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("1.234567891e-1"));
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].experiment_id, "e,1");
        assert!((back[0].pos_rmse_m - rows[0].pos_rmse_m).abs() < 1e-9 * rows[0].pos_rmse_m);
        assert_eq!(back[0].method, Method::TReweight);
    }

    #[test]
    fn json_round_trip_exact() {
        let rows = vec![row(3)];
        let mut buf = Vec::new();
        write_json(&rows, &mut buf).unwrap();
        assert_eq!(read_json(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn io_error_names_path() {
        let e = write_rows_to_path(&[], Path::new("/nonexistent/dir/x.csv"), Format::Csv).unwrap_err();
        assert_eq!(e.kind(), "io");
        assert!(e.to_string().contains("/nonexistent/dir/x.csv"));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
