use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::{Error, Result};

/// Column order of every result table.
pub const COLUMNS: [&str; 12] = [
    "experiment",
    "replicate",
    "epsilon",
    "delta",
    "alpha",
    "hurst",
    "theta",
    "sigma",
    "eta",
    "n",
    "statistic",
    "value",
];

/// One long-format result: a named statistic of one replicate in one
/// parameter cell. Parameters that do not apply stay empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub replicate: Option<u64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub hurst: Option<f64>,
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
    pub eta: Option<f64>,
    /// Size of the cell: sample count, matrix dimension, node count.
    pub n: Option<u64>,
    pub statistic: String,
    pub value: f64,
}

impl ResultRow {
    pub fn new(experiment: &str, statistic: &str, value: f64) -> Self {
        Self {
            experiment: experiment.to_string(),
            statistic: statistic.to_string(),
            value,
            ..Self::default()
        }
    }

    pub fn replicate(mut self, r: u64) -> Self {
        self.replicate = Some(r);
        self
    }

    pub fn epsilon(mut self, v: f64) -> Self {
        self.epsilon = Some(v);
        self
    }

    pub fn delta(mut self, v: f64) -> Self {
        self.delta = Some(v);
        self
    }

    pub fn alpha(mut self, v: f64) -> Self {
        self.alpha = Some(v);
        self
    }

    pub fn hurst(mut self, v: f64) -> Self {
        self.hurst = Some(v);
        self
    }

    pub fn theta(mut self, v: f64) -> Self {
        self.theta = Some(v);
        self
    }

    pub fn sigma(mut self, v: f64) -> Self {
        self.sigma = Some(v);
        self
    }

    pub fn eta(mut self, v: f64) -> Self {
        self.eta = Some(v);
        self
    }

    pub fn n(mut self, v: usize) -> Self {
        self.n = Some(v as u64);
        self
    }

    fn record(&self) -> [String; 12] {
        let f = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        [
            self.experiment.clone(),
            self.replicate.map(|r| r.to_string()).unwrap_or_default(),
            f(self.epsilon),
            f(self.delta),
            f(self.alpha),
            f(self.hurst),
            f(self.theta),
            f(self.sigma),
            f(self.eta),
            self.n.map(|r| r.to_string()).unwrap_or_default(),
            self.statistic.clone(),
            format_float(self.value),
        ]
    }
}

/// 17 significant digits, enough to reparse the identical `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_rows<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_rows(rows, std::fs::File::create(path)?)
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::invalid("unexpected CSV header"));
    }
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| Error::invalid(format!("bad number `{s}`")))
        }
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let int = |s: &str| -> Result<Option<u64>> {
            match s {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| Error::invalid(format!("bad integer `{s}`"))),
            }
        };
        rows.push(ResultRow {
            experiment: rec[0].to_string(),
            replicate: int(&rec[1])?,
            epsilon: opt(&rec[2])?,
            delta: opt(&rec[3])?,
            alpha: opt(&rec[4])?,
            hurst: opt(&rec[5])?,
            theta: opt(&rec[6])?,
            sigma: opt(&rec[7])?,
            eta: opt(&rec[8])?,
            n: int(&rec[9])?,
            statistic: rec[10].to_string(),
            value: opt(&rec[11])?.ok_or_else(|| Error::invalid("missing value"))?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    read_rows(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let mut buf = Vec::new();
        write_rows(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), COLUMNS.join(",") + "\n");
    }

    #[test]
    fn round_trip_is_exact() {
        let rows = vec![
            ResultRow::new("clt", "z", 0.1).replicate(3).hurst(0.7).delta(1.0 / 3.0),
            ResultRow::new("scan", "max_trace", -1e-300).eta(f64::MIN_POSITIVE).n(64),
        ];
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("1.0000000000000001e-1"));
        assert_eq!(read_rows(buf.as_slice()).unwrap(), rows);
    }
}
