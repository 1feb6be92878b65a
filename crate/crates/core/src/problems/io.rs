//! Binary instance container, all fields little-endian:
//!
//! ```text
//! magic    8 bytes  "GINXLSQ\0"
//! version  u32
//! n, m, omega        u64
//! density  f64
//! seed     u64
//! nnz      u64
//! nnz x (row u64, col u64, value f64)
//! B        m * n f64, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::{InstanceMeta, SparseMatrix, SpectrahedronLSQ};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"GINXLSQ\0";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_instance<W: Write>(inst: &SpectrahedronLSQ, mut w: W) -> Result<()> {
    let meta = inst.meta();
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for v in [meta.n as u64, meta.m as u64, meta.omega as u64] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&meta.density.to_le_bytes())?;
    w.write_all(&meta.seed.to_le_bytes())?;
    let entries = inst.a().entries();
    w.write_all(&(entries.len() as u64).to_le_bytes())?;
    for &(i, j, a) in entries {
        w.write_all(&(i as u64).to_le_bytes())?;
        w.write_all(&(j as u64).to_le_bytes())?;
        w.write_all(&a.to_le_bytes())?;
    }
    let b = inst.b();
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            w.write_all(&b[(i, j)].to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

fn read_usize<R: Read>(r: &mut R, what: &str) -> Result<usize> {
    let v = read_u64(r)?;
    usize::try_from(v).map_err(|_| Error::Format(format!("{what} = {v} does not fit in memory")))
}

pub fn read_instance<R: Read>(mut r: R) -> Result<SpectrahedronLSQ> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not an instance file (bad magic)".into()));
    }
    let mut version = [0u8; 4];
    r.read_exact(&mut version)?;
    let version = u32::from_le_bytes(version);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = read_usize(&mut r, "n")?;
    let m = read_usize(&mut r, "m")?;
    let omega = read_usize(&mut r, "omega")?;
    let density = read_f64(&mut r)?;
    let seed = read_u64(&mut r)?;
    let nnz = read_usize(&mut r, "nnz")?;
    if n.checked_mul(m).map_or(true, |cells| nnz > cells) {
        return Err(Error::Format(format!("{nnz} entries in a {m}x{n} matrix")));
    }
    let mut entries = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let i = read_usize(&mut r, "row")?;
        let j = read_usize(&mut r, "col")?;
        entries.push((i, j, read_f64(&mut r)?));
    }
    let mut b = DMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            b[(i, j)] = read_f64(&mut r)?;
        }
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after B".into()));
    }
    let a = SparseMatrix::new(m, n, entries).map_err(|e| Error::Format(e.to_string()))?;
    SpectrahedronLSQ::new(
        a,
        b,
        InstanceMeta {
            n,
            m,
            omega,
            density,
            seed,
        },
    )
}

pub fn save_instance(inst: &SpectrahedronLSQ, path: impl AsRef<Path>) -> Result<()> {
    write_instance(inst, BufWriter::new(File::create(path)?))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<SpectrahedronLSQ> {
    read_instance(BufReader::new(File::open(path)?))
}
