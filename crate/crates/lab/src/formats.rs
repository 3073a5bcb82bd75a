//! Field snapshots and kernel tables.
//!
//! Binary snapshot layout, all little-endian: `dim: u64`, `m: u64`,
//! `t_max: f64`, `seed: u64`, then `m^dim` row-major `f64` values.

use std::io::{self, Read, Write};

use anyhow::{bail, Context};
use gmc_core::field::GridSpec;

/// Grids larger than this are refused by the CSV snapshot writer.
pub const MAX_CSV_POINTS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub t_max: f64,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn write_binary(&self, mut w: impl Write) -> io::Result<()> {
        w.write_all(&(self.grid.dim as u64).to_le_bytes())?;
        w.write_all(&(self.grid.m as u64).to_le_bytes())?;
        w.write_all(&self.t_max.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> anyhow::Result<Snapshot> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut dyn Read| -> anyhow::Result<[u8; 8]> {
            r.read_exact(&mut word).context("truncated snapshot")?;
            Ok(word)
        };
        let dim = u64::from_le_bytes(next(&mut r)?) as usize;
        let m = u64::from_le_bytes(next(&mut r)?) as usize;
        let t_max = f64::from_le_bytes(next(&mut r)?);
        let seed = u64::from_le_bytes(next(&mut r)?);
        let grid = GridSpec::new(dim, m)?;
        let mut values = Vec::with_capacity(grid.points());
        for _ in 0..grid.points() {
            values.push(f64::from_le_bytes(next(&mut r)?));
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            bail!("{} trailing bytes after snapshot payload", rest.len());
        }
        Ok(Snapshot { grid, t_max, seed, values })
    }

    /// `x1[,x2],value` with 12 significant digits.
    pub fn to_csv(&self) -> anyhow::Result<String> {
        if self.values.len() > MAX_CSV_POINTS {
            bail!("{} points is too many for a CSV snapshot", self.values.len());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.grid.dim == 1 {
            w.write_record(["x1", "value"])?;
        } else {
            w.write_record(["x1", "x2", "value"])?;
        }
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.coords(i);
            let mut rec: Vec<String> = x[..self.grid.dim].iter().map(|c| format!("{c:.11e}")).collect();
            rec.push(format!("{v:.11e}"));
            w.write_record(&rec)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// `r,value` table.
pub fn table_csv(rows: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::from("r,value\n");
    for (r, v) in rows {
        s.push_str(&format!("{r:.11e},{v:.11e}\n"));
    }
    s
}
