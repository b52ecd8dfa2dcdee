use std::io::{Read, Write};

use super::Configuration;
use crate::error::{invalid, Result};
use crate::fmt_f64;

impl Configuration {
    /// Writes `id,x1,...,xp` followed by one row per point, 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string()];
        header.extend((1..=self.dim()).map(|k| format!("x{k}")));
        w.write_record(&header)?;
        for (i, pt) in self.points().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(pt.iter().map(|&v| fmt_f64(v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`Configuration::write_csv`]. Rows may
    /// appear in any order; ids must cover `0..n` exactly once.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.get(0) != Some("id") || header.len() < 2 {
            return invalid("configuration CSV must start with an `id,x1,...` header");
        }
        let dim = header.len() - 1;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let id: usize = rec[0]
                .trim()
                .parse()
                .map_err(|_| crate::Error::InvalidInput(format!("bad id `{}`", &rec[0])))?;
            let mut pt = Vec::with_capacity(dim);
            for field in rec.iter().skip(1) {
                pt.push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| crate::Error::InvalidInput(format!("bad coordinate `{field}`")))?,
                );
            }
            rows.push((id, pt));
        }
        rows.sort_by_key(|(id, _)| *id);
        for (k, (id, _)) in rows.iter().enumerate() {
            if *id != k {
                return invalid(format!("configuration ids must be 0..n, found {id} at position {k}"));
            }
        }
        let points: Vec<Vec<f64>> = rows.into_iter().map(|(_, p)| p).collect();
        Configuration::from_points(&points)
    }
}
