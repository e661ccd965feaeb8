use std::io::{Read, Write};

use super::{SampleBatch, MODULE};
use crate::error::{Error, Result};

pub const BATCH_MAGIC: &[u8; 8] = b"MVGBAT01";

/// Columnar export: magic, then `n`, `count`, `seed` as little-endian
/// `u64`, then each of the `n` columns as `count` little-endian `f64`.
pub fn write_batch(batch: &SampleBatch, mut w: impl Write) -> std::io::Result<()> {
    let n = batch.n();
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(batch.count() as usize); n];
    let mut buf = Vec::new();
    for c in 0..batch.chunks() {
        batch.fill_chunk(c, &mut buf);
        for row in buf.chunks_exact(n) {
            for (col, v) in cols.iter_mut().zip(row) {
                col.push(*v);
            }
        }
    }
    w.write_all(BATCH_MAGIC)?;
    for v in [n as u64, batch.count(), batch.seed()] {
        w.write_all(&v.to_le_bytes())?;
    }
    for col in &cols {
        for v in col {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

/// Columns of an exported batch, with its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchColumns {
    pub seed: u64,
    pub columns: Vec<Vec<f64>>,
}

pub fn read_batch(mut r: impl Read) -> Result<BatchColumns> {
    let io = |e: std::io::Error| Error::bad_input(MODULE, format!("batch file: {e}"));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != BATCH_MAGIC {
        return Err(Error::bad_input(MODULE, "batch file: bad magic header"));
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut dyn Read| -> Result<u64> {
        r.read_exact(&mut word).map_err(io)?;
        Ok(u64::from_le_bytes(word))
    };
    let n = next(&mut r)? as usize;
    let count = next(&mut r)? as usize;
    let seed = next(&mut r)?;
    let mut columns = Vec::with_capacity(n);
    for _ in 0..n {
        let mut col = Vec::with_capacity(count);
        for _ in 0..count {
            col.push(f64::from_bits(next(&mut r)?));
        }
        columns.push(col);
    }
    Ok(BatchColumns { seed, columns })
}
