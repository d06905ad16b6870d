//! Plain CSV matrices of floats with a header row. Values are written in
//! shortest round-trip form, so reading back is exact.

use crate::error::{Error, Result};
use std::path::Path;

fn parse_error(path: &Path, message: impl ToString) -> Error {
    Error::Parse {
        file: path.display().to_string(),
        message: message.to_string(),
    }
}

pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| parse_error(path, e))?;
    w.write_record(header).map_err(|e| parse_error(path, e))?;
    for row in rows {
        let row = row.as_ref();
        if row.len() != header.len() {
            return Err(Error::Dimension(format!(
                "{}: row of {} values for {} columns",
                path.display(),
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| parse_error(path, e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| parse_error(path, e))?;
    let header = r
        .headers()
        .map_err(|e| parse_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| parse_error(path, e))?;
        let row = rec
            .iter()
            .map(|v| v.trim().parse::<f64>().map_err(|e| parse_error(path, format!("'{v}': {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
