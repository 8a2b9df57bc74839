//! Trade-CSV and patch-CSV formats.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use patchscale_core::market::{FirmId, Side, StockId, Trade};
use patchscale_core::patch::{classify, Direction, DirectionalPatch, Patch};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

pub const TRADE_HEADER: [&str; 5] = ["timestamp", "firm_id", "stock_id", "side", "value"];

fn row_err(line: u64, reason: impl std::fmt::Display) -> AppError {
    AppError::Data(format!("line {line}: {reason}"))
}

fn parse_value(s: &str, line: u64) -> Result<f64> {
    let ok = !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_digit() || b == b'.' || b == b'-' || b == b'+')
        && s.bytes().any(|b| b.is_ascii_digit());
    let v: f64 = match ok.then(|| s.parse().ok()).flatten() {
        Some(v) => v,
        None => return Err(row_err(line, format!("invalid value '{s}'"))),
    };
    if !(v > 0.0) || !v.is_finite() {
        return Err(row_err(line, format!("value must be > 0, got {s}")));
    }
    Ok(v)
}

fn parse_side(s: &str, line: u64) -> Result<Side> {
    match s {
        "B" => Ok(Side::Buy),
        "S" => Ok(Side::Sell),
        _ => Err(row_err(line, format!("side must be B or S, got '{s}'"))),
    }
}

fn side_code(side: Side) -> &'static str {
    match side {
        Side::Buy => "B",
        Side::Sell => "S",
    }
}

/// Parse a trade tape. Rows come back in file order.
pub fn parse_trades<R: Read>(source: R) -> Result<Vec<Trade>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let header = rdr
        .headers()
        .map_err(|e| row_err(1, e))?
        .clone();
    if header.iter().ne(TRADE_HEADER) {
        return Err(row_err(
            1,
            format!("expected header '{}'", TRADE_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            row_err(line, e)
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line());
        let timestamp: u64 = record[0]
            .parse()
            .map_err(|_| row_err(line, format!("invalid timestamp '{}'", &record[0])))?;
        if record[1].is_empty() || record[2].is_empty() {
            return Err(row_err(line, "empty firm_id or stock_id"));
        }
        let side = parse_side(&record[3], line)?;
        let value = parse_value(&record[4], line)?;
        out.push(Trade {
            timestamp,
            firm: FirmId(record[1].to_string()),
            stock: StockId(record[2].to_string()),
            side,
            value,
        });
    }
    Ok(out)
}

pub fn write_trades<W: Write>(sink: W, trades: &[Trade]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e: csv::Error| AppError::Data(format!("writing trades: {e}"));
    w.write_record(TRADE_HEADER).map_err(err)?;
    for t in trades {
        w.write_record([
            t.timestamp.to_string().as_str(),
            &t.firm.0,
            &t.stock.0,
            side_code(t.side),
            &t.value.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| AppError::Data(format!("writing trades: {e}")))
}

pub fn read_trades_file(path: &Path) -> Result<Vec<Trade>> {
    let f = File::open(path).map_err(|e| AppError::io(path, e))?;
    parse_trades(BufReader::new(f)).map_err(|e| match e {
        AppError::Data(m) => AppError::Data(format!("{}: {m}", path.display())),
        e => e,
    })
}

pub fn write_trades_file(path: &Path, trades: &[Trade]) -> Result<()> {
    let f = File::create(path).map_err(|e| AppError::io(path, e))?;
    write_trades(BufWriter::new(f), trades)
}

// ---------------------------------------------------------------------------
// Patches

/// One row of `patches.csv`. `N_m` and `V_m` are empty for non-directional
/// patches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchRow {
    pub firm_id: String,
    pub stock_id: String,
    pub start: usize,
    pub end: usize,
    /// `B`, `S` or `N`.
    pub direction: String,
    #[serde(rename = "T")]
    pub t: u64,
    #[serde(rename = "N_m")]
    pub n_m: Option<usize>,
    #[serde(rename = "V_m")]
    pub v_m: Option<f64>,
    #[serde(rename = "V_b")]
    pub v_b: f64,
    #[serde(rename = "V_s")]
    pub v_s: f64,
}

impl PatchRow {
    pub fn new(patch: &Patch, theta: f64) -> Self {
        let (direction, n_m, v_m) = match classify(patch, theta) {
            Direction::Buy => ("B", Some(patch.n_buy), Some(patch.v_buy)),
            Direction::Sell => ("S", Some(patch.n_sell), Some(patch.v_sell)),
            Direction::NonDirectional => ("N", None, None),
        };
        PatchRow {
            firm_id: patch.firm.0.clone(),
            stock_id: patch.stock.0.clone(),
            start: patch.start,
            end: patch.end,
            direction: direction.into(),
            t: patch.duration(),
            n_m,
            v_m,
            v_b: patch.v_buy,
            v_s: patch.v_sell,
        }
    }

    pub fn n_trades(&self) -> usize {
        self.end - self.start
    }

    pub fn is_directional(&self) -> bool {
        self.direction != "N"
    }

    /// Rebuild the directional patch. Absolute timestamps are not exported,
    /// so the patch starts at 0.
    pub fn to_directional(&self) -> Option<DirectionalPatch> {
        let side = match self.direction.as_str() {
            "B" => Side::Buy,
            "S" => Side::Sell,
            _ => return None,
        };
        let n_m = self.n_m?;
        let value = self.v_m?;
        let other = self.n_trades().saturating_sub(n_m);
        let (n_buy, n_sell) = match side {
            Side::Buy => (n_m, other),
            Side::Sell => (other, n_m),
        };
        Some(DirectionalPatch {
            patch: Patch {
                firm: FirmId(self.firm_id.clone()),
                stock: StockId(self.stock_id.clone()),
                start: self.start,
                end: self.end,
                v_buy: self.v_b,
                v_sell: self.v_s,
                v_total: self.v_b + self.v_s,
                n_buy,
                n_sell,
                t_first: 0,
                t_last: self.t,
            },
            side,
            duration: self.t,
            n_trades: n_m,
            value,
        })
    }

    fn check(&self, line: u64) -> Result<()> {
        let ok = self.end > self.start
            && match self.direction.as_str() {
                "B" | "S" => matches!((self.n_m, self.v_m), (Some(n), Some(v)) if n <= self.end - self.start && v > 0.0),
                "N" => self.n_m.is_none() && self.v_m.is_none(),
                _ => false,
            };
        if ok {
            Ok(())
        } else {
            Err(row_err(line, "inconsistent patch row"))
        }
    }
}

/// Write any serializable rows as CSV with a header.
pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let f = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    for r in rows {
        w.serialize(r).map_err(|e| AppError::io(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

/// Write rows with an explicit header; useful when `rows` may be empty.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let f = File::create(path).map_err(|e| AppError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    w.write_record(header).map_err(|e| AppError::io(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| AppError::io(path, e))?;
    }
    w.flush().map_err(|e| AppError::io(path, e))
}

pub const PATCH_HEADER: [&str; 10] = [
    "firm_id", "stock_id", "start", "end", "direction", "T", "N_m", "V_m", "V_b", "V_s",
];

pub fn write_patches(path: &Path, rows: &[PatchRow]) -> Result<()> {
    if rows.is_empty() {
        return write_table(path, &PATCH_HEADER, &[]);
    }
    write_rows(path, rows)
}

pub fn read_patches(path: &Path) -> Result<Vec<PatchRow>> {
    let f = File::open(path).map_err(|e| AppError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(BufReader::new(f));
    let mut out = Vec::new();
    for rec in rdr.deserialize::<PatchRow>() {
        let row = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            AppError::Data(format!("{}: line {line}: {e}", path.display()))
        })?;
        row.check(out.len() as u64 + 2)
            .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
        out.push(row);
    }
    Ok(out)
}
