//! Deterministic CSV and JSON writers.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{FunctionalRow, FunctionalTrace};

/// Shortest decimal that reads back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:?}")
    }
}

/// Functional columns; the first line is a `#` comment naming the digest.
pub fn trace_csv_bytes(digest: &str, ft: &FunctionalTrace) -> Result<Vec<u8>> {
    let mut buf = format!("# digest {digest}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(FunctionalRow::HEADER)?;
        for r in &ft.rows {
            w.write_record(r.values().iter().map(|v| fmt_f64(*v)))?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub fn write_trace_csv(path: &Path, digest: &str, ft: &FunctionalTrace) -> Result<()> {
    std::fs::write(path, trace_csv_bytes(digest, ft)?)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Generic CSV table with a digest comment line.
pub fn write_table(path: &Path, digest: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut buf = format!("# digest {digest}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    std::fs::write(path, buf)?;
    Ok(())
}

/// Reads the `t` and `E` columns of a trace CSV, skipping `#` comments.
pub fn read_trace_energy(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Input(format!("{}: no `{name}` column", path.display())))
    };
    let (it, ie) = (col("t")?, col("E")?);
    let (mut t, mut e) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::Input(format!("{}: `{}` is not a number", path.display(), &rec[i])))
        };
        t.push(parse(it)?);
        e.push(parse(ie)?);
    }
    Ok((t, e))
}
