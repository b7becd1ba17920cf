use std::io::{Read, Write};

use super::Matrix;
use crate::error::{Error, Result};

/// A model exposing its trainable blocks in a fixed order.
///
/// Gradient containers use the same type as the parameters so blocks line up
/// one-to-one.
pub trait Parameters {
    fn blocks(&self) -> Vec<(String, &Matrix)>;
    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix)>;

    fn num_parameters(&self) -> usize {
        self.blocks().iter().map(|(_, m)| m.len()).sum()
    }

    fn zero(&mut self) {
        for (_, m) in self.blocks_mut() {
            m.fill(0.0);
        }
    }

    /// `self += alpha · other`.
    fn accumulate(&mut self, alpha: f64, other: &Self)
    where
        Self: Sized,
    {
        for ((_, a), (_, b)) in self.blocks_mut().into_iter().zip(other.blocks()) {
            a.axpy(alpha, b);
        }
    }
}

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"CAPSPARM";
pub const SNAPSHOT_VERSION: u32 = 1;

/// Write `magic | version | n_blocks | (name_len, name, rows, cols)* | f64 LE data*`.
pub fn write_snapshot<P: Parameters, W: Write>(params: &P, mut w: W) -> std::io::Result<()> {
    let blocks = params.blocks();
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&(blocks.len() as u32).to_le_bytes())?;
    for (name, m) in &blocks {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(m.rows() as u64).to_le_bytes())?;
        w.write_all(&(m.cols() as u64).to_le_bytes())?;
    }
    for (_, m) in &blocks {
        for v in m.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| Error::Snapshot(e.to_string()))?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| Error::Snapshot(e.to_string()))?;
    Ok(u64::from_le_bytes(b))
}

/// Read every block of a snapshot.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<Vec<(String, Matrix)>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|e| Error::Snapshot(e.to_string()))?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    let mut header = Vec::with_capacity(n);
    for _ in 0..n {
        let len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; len];
        r.read_exact(&mut name).map_err(|e| Error::Snapshot(e.to_string()))?;
        let name = String::from_utf8(name).map_err(|e| Error::Snapshot(e.to_string()))?;
        let rows = read_u64(&mut r)? as usize;
        let cols = read_u64(&mut r)? as usize;
        header.push((name, rows, cols));
    }
    let mut out = Vec::with_capacity(n);
    for (name, rows, cols) in header {
        let mut data = vec![0.0; rows * cols];
        for v in data.iter_mut() {
            *v = f64::from_bits(read_u64(&mut r)?);
        }
        out.push((name, Matrix::from_vec(rows, cols, data)?));
    }
    Ok(out)
}

/// Load a snapshot into an already-shaped parameter set, checking names and shapes.
pub fn read_snapshot_into<P: Parameters, R: Read>(params: &mut P, r: R) -> Result<()> {
    let loaded = read_snapshot(r)?;
    let mut blocks = params.blocks_mut();
    if loaded.len() != blocks.len() {
        return Err(Error::Snapshot(format!(
            "expected {} blocks, found {}",
            blocks.len(),
            loaded.len()
        )));
    }
    for ((name, target), (lname, m)) in blocks.iter_mut().zip(loaded) {
        if *name != lname || target.shape() != m.shape() {
            return Err(Error::Snapshot(format!(
                "block mismatch: expected {name} {:?}, found {lname} {:?}",
                target.shape(),
                m.shape()
            )));
        }
        **target = m;
    }
    Ok(())
}
