use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One result row. Columns follow the field order; missing values are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub run_id: String,
    pub model: String,
    pub method: String,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "S")]
    pub s: usize,
    pub h: f64,
    pub train_loss: Option<f64>,
    pub test_loss: Option<f64>,
    #[serde(rename = "E_net_vs_f")]
    pub e_net_vs_f: Option<f64>,
    #[serde(rename = "E_net_vs_imdeK")]
    pub e_net_vs_imde: Option<f64>,
    pub order: Option<f64>,
    /// `ok`, or `failed: <reason>` for a cell that could not be computed.
    pub status: String,
}

pub const COLUMNS: [&str; 12] = [
    "run_id",
    "model",
    "method",
    "T",
    "S",
    "h",
    "train_loss",
    "test_loss",
    "E_net_vs_f",
    "E_net_vs_imdeK",
    "order",
    "status",
];

pub fn write_reports<W: Write>(out: W, rows: &[ErrorReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(COLUMNS)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_reports<R: Read>(input: R) -> Result<Vec<ErrorReport>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<ErrorReport>, _>>()?)
}

pub fn save_reports(path: &Path, rows: &[ErrorReport]) -> Result<()> {
    write_reports(std::fs::File::create(path)?, rows)
}

pub fn load_reports(path: &Path) -> Result<Vec<ErrorReport>> {
    read_reports(std::fs::File::open(path)?)
}

/// Writes a loss curve as `step,loss` rows.
pub fn write_curve<W: Write>(out: W, curve: &[(u64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "loss"])?;
    for (step, loss) in curve {
        w.serialize((step, loss))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve<R: Read>(input: R) -> Result<Vec<(u64, f64)>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<Vec<(u64, f64)>, _>>()?)
}
