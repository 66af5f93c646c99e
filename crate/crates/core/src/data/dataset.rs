use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

pub const CSV_HEADER: [&str; 4] = ["x", "y", "component", "paired"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairRow {
    pub x: f64,
    pub y: f64,
    pub component: usize,
    pub paired: bool,
}

/// Rows of `(x, y, component)` plus a mask marking which rows may be used as
/// pairs. Unmasked rows are only seen through their marginals.
#[derive(Clone, Debug, PartialEq)]
pub struct PairDataset {
    rows: Vec<PairRow>,
}

impl PairDataset {
    pub fn new(rows: Vec<PairRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::contract("dataset", "no rows"));
        }
        Ok(PairDataset { rows })
    }

    pub fn rows(&self) -> &[PairRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_components(&self) -> usize {
        self.rows.iter().map(|r| r.component + 1).max().unwrap_or(0)
    }

    pub fn paired_count(&self) -> usize {
        self.rows.iter().filter(|r| r.paired).count()
    }

    pub fn paired_per_component(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_components()];
        for r in self.rows.iter().filter(|r| r.paired) {
            counts[r.component] += 1;
        }
        counts
    }

    /// All `(x, y)` points regardless of the mask.
    pub fn points(&self) -> Vec<[f64; 2]> {
        self.rows.iter().map(|r| [r.x, r.y]).collect()
    }

    pub fn paired_points(&self) -> Vec<[f64; 2]> {
        self.rows.iter().filter(|r| r.paired).map(|r| [r.x, r.y]).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.y).collect()
    }

    /// Marks a stratified random subset of `round(fraction * len)` rows as
    /// paired. Per-component quotas are `floor(total / K)` with the remainder
    /// handed to the lowest component indices.
    pub fn split_semi_supervised(&self, fraction: f64, seed: u64) -> Result<PairDataset> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::contract(
                "paired-fraction",
                format!("{fraction} is outside [0, 1]"),
            ));
        }
        let k = self.num_components();
        let target = (fraction * self.len() as f64).round() as usize;
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (i, r) in self.rows.iter().enumerate() {
            members[r.component].push(i);
        }
        let mut rows = self.rows.clone();
        rows.iter_mut().for_each(|r| r.paired = false);
        let mut rng = stream_rng(seed, Stream::Split);
        for (c, idx) in members.iter().enumerate() {
            let quota = target / k + usize::from(c < target % k);
            if quota > idx.len() {
                return Err(Error::contract(
                    "paired-fraction",
                    format!("component {c} has {} rows but needs {quota} paired", idx.len()),
                ));
            }
            for j in sample(&mut rng, idx.len(), quota) {
                rows[idx[j]].paired = true;
            }
        }
        Ok(PairDataset { rows })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                format!("{:.16e}", r.x),
                format!("{:.16e}", r.y),
                r.component.to_string(),
                u8::from(r.paired).to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
        let mut records = rdr.records();
        let header = match records.next() {
            None => return Err(Error::Format("empty dataset file".into())),
            Some(h) => h.map_err(csv_err)?,
        };
        if header.iter().map(str::trim).ne(CSV_HEADER) {
            return Err(Error::Format(format!(
                "expected header `{}`, found `{}`",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for rec in records {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let bad = |msg: String| Error::Parse { line, message: msg };
            if rec.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", rec.len())));
            }
            let num = |i: usize| -> Result<f64> {
                let s = rec[i].trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("{} is not a finite number: {s:?}", CSV_HEADER[i])))
            };
            let x = num(0)?;
            let y = num(1)?;
            let component = rec[2]
                .trim()
                .parse::<usize>()
                .map_err(|_| bad(format!("component is not an index: {:?}", &rec[2])))?;
            let paired = match rec[3].trim() {
                "1" | "true" => true,
                "0" | "false" => false,
                other => return Err(bad(format!("paired must be 0 or 1: {other:?}"))),
            };
            rows.push(PairRow {
                x,
                y,
                component,
                paired,
            });
        }
        if rows.is_empty() {
            return Err(Error::Format("dataset file has a header but no rows".into()));
        }
        Ok(PairDataset { rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(File::open(path)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

pub fn split_semi_supervised(dataset: &PairDataset, fraction: f64, seed: u64) -> Result<PairDataset> {
    dataset.split_semi_supervised(fraction, seed)
}
