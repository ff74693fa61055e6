//! CSV persistence of sweep results.

use super::{Scheme, SweepPoint, SweepResult};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 16] = [
    "snr_db",
    "scheme",
    "n",
    "R",
    "t_list",
    "trials",
    "bits",
    "bit_errors",
    "ber",
    "block_errors",
    "bler",
    "vac_errors",
    "idx_errors_per_order",
    "data_errors",
    "seed",
    "iters",
];

fn join<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Header plus one row per SNR point. Floats use the shortest decimal that
/// parses back to the same value.
pub fn emit_csv(result: &SweepResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let t_list = join(&result.t);
    for p in &result.points {
        w.write_record([
            p.snr_db.to_string(),
            result.scheme.to_string(),
            result.n.to_string(),
            result.t.len().to_string(),
            t_list.clone(),
            p.trials.to_string(),
            p.bits.to_string(),
            p.bit_errors.to_string(),
            p.ber.to_string(),
            p.block_errors.to_string(),
            p.bler.to_string(),
            p.vac_errors.to_string(),
            join(&p.idx_errors),
            p.data_errors.to_string(),
            result.seed.to_string(),
            result.iters.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or_default();
    raw.parse().map_err(|_| {
        Error::Parse(format!(
            "column {} has unparsable value {raw:?}",
            CSV_HEADER[i]
        ))
    })
}

fn list<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<Vec<T>> {
    let raw = rec.get(i).unwrap_or_default();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(';')
        .map(|v| {
            v.parse().map_err(|_| {
                Error::Parse(format!(
                    "column {} has unparsable value {raw:?}",
                    CSV_HEADER[i]
                ))
            })
        })
        .collect()
}

/// Reads back the output of [`emit_csv`]. Wall times are not stored and
/// come back empty.
pub fn parse_csv(text: &str) -> Result<SweepResult> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut meta: Option<(Scheme, usize, Vec<usize>, u64, usize)> = None;
    let mut points = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let row_meta = (
            field::<Scheme>(&rec, 1)?,
            field::<usize>(&rec, 2)?,
            list::<usize>(&rec, 4)?,
            field::<u64>(&rec, 14)?,
            field::<usize>(&rec, 15)?,
        );
        if field::<usize>(&rec, 3)? != row_meta.2.len() {
            return Err(Error::Parse("R does not match t_list".into()));
        }
        match &meta {
            Some(m) if *m != row_meta => {
                return Err(Error::Parse("rows describe different sweeps".into()))
            }
            Some(_) => {}
            None => meta = Some(row_meta),
        }
        points.push(SweepPoint {
            snr_db: field(&rec, 0)?,
            trials: field(&rec, 5)?,
            bits: field(&rec, 6)?,
            bit_errors: field(&rec, 7)?,
            ber: field(&rec, 8)?,
            block_errors: field(&rec, 9)?,
            bler: field(&rec, 10)?,
            vac_errors: field(&rec, 11)?,
            idx_errors: list(&rec, 12)?,
            data_errors: field(&rec, 13)?,
        });
    }
    let (scheme, n, t, seed, iters) =
        meta.ok_or_else(|| Error::Parse("csv holds no data rows".into()))?;
    Ok(SweepResult {
        scheme,
        n,
        t,
        seed,
        iters,
        points,
        wall_times: Vec::new(),
    })
}

/// One row of a bound-versus-SNR table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub snr_db: f64,
    pub n0: f64,
    pub bound: f64,
    pub stderr: f64,
    pub mode: String,
}

pub const BOUND_HEADER: [&str; 5] = ["snr_db", "n0", "bound", "stderr", "mode"];

/// Bound table with columns `snr_db, n0, bound, stderr, mode`.
pub fn emit_bound_csv(rows: &[BoundRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BOUND_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.snr_db.to_string(),
            r.n0.to_string(),
            r.bound.to_string(),
            r.stderr.to_string(),
            r.mode.clone(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}
