//! CSV tables for lattice functions and tabular reports.
//!
//! Every file has a mandatory header row. Reals are written with 17
//! significant digits so that a write/read cycle reproduces the bits.

use std::fs::File;
use std::path::Path;

use crate::error::{QslError, Result};
use crate::lattice::GridFunction;

pub const LATTICE_HEADER: [&str; 5] = ["n", "x", "re", "im", "logscale"];

/// Formats a real with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> QslError {
    QslError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> QslError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(path, source),
        other => QslError::Ingestion {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Writes a header plus rows. An empty `rows` yields a header-only file.
pub fn write_csv<P, H, R>(path: P, header: &[H], rows: R) -> Result<()>
where
    P: AsRef<Path>,
    H: AsRef<str>,
    R: IntoIterator<Item = Vec<String>>,
{
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header.iter().map(|h| h.as_ref()))
        .map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Rows `n,x,re,im,logscale` for every index of the window.
pub fn lattice_rows(f: &GridFunction) -> Vec<Vec<String>> {
    let l = f.lattice();
    l.indices()
        .map(|n| {
            let m = f.mantissa(n).expect("index in window");
            let ls = f.logscale(n).expect("index in window");
            vec![
                n.to_string(),
                fmt_real(l.q().powi(n as i32)),
                fmt_real(m.re),
                fmt_real(m.im),
                fmt_real(ls),
            ]
        })
        .collect()
}

pub fn write_lattice_function(path: impl AsRef<Path>, f: &GridFunction) -> Result<()> {
    write_csv(path, &LATTICE_HEADER, lattice_rows(f))
}

/// One parsed row of a lattice-function table.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeRow {
    pub line: u64,
    pub n: i64,
    pub x: f64,
    pub re: f64,
    pub im: f64,
    pub logscale: f64,
}

/// Reads `n,x,re,im[,logscale]` rows. Column order is fixed; the header
/// must name them.
pub fn read_lattice_rows(path: impl AsRef<Path>) -> Result<Vec<LatticeRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let ingest = |line: u64, message: String| QslError::Ingestion {
        path: path.to_path_buf(),
        line,
        message,
    };
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 4 || names.len() > 5 || names[..] != LATTICE_HEADER[..names.len()] {
        return Err(ingest(
            1,
            format!("expected header n,x,re,im[,logscale], found {}", names.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let real = |i: usize, name: &str| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| ingest(line, format!("missing column {name}")))?
                .parse::<f64>()
                .map_err(|e| ingest(line, format!("column {name}: {e}")))
        };
        let n = rec
            .get(0)
            .unwrap_or_default()
            .parse::<i64>()
            .map_err(|e| ingest(line, format!("column n: {e}")))?;
        let logscale = if names.len() == 5 { real(4, "logscale")? } else { 0.0 };
        rows.push(LatticeRow {
            line,
            n,
            x: real(1, "x")?,
            re: real(2, "re")?,
            im: real(3, "im")?,
            logscale,
        });
    }
    Ok(rows)
}
