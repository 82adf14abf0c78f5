//! The `CFLD` binary field format.
//!
//! Layout (all little-endian): magic `CFLD`, `u32` version, `u32` n, `u32` N,
//! `f64` L, `u8` representation (0 spatial, 1 spectral), then `N^n` complex
//! values as `(re, im)` pairs of `f64`, row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, Rep};

pub const MAGIC: &[u8; 4] = b"CFLD";
pub const VERSION: u32 = 1;

pub fn write_to<W: Write>(field: &Field, mut w: W) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.points() as u32).to_le_bytes())?;
    w.write_all(&g.length().to_le_bytes())?;
    w.write_all(&[match field.rep() {
        Rep::Spatial => 0u8,
        Rep::Spectral => 1u8,
    }])?;
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_from<R: Read>(mut r: R) -> Result<Field> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    let points = read_u32(&mut r)? as usize;
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf8)?;
    let length = f64::from_le_bytes(buf8);
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let rep = match flag[0] {
        0 => Rep::Spatial,
        1 => Rep::Spectral,
        other => return Err(Error::Format(format!("bad representation flag {other}"))),
    };
    let grid = Grid::new(dim, points, length)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut pair = [0u8; 16];
    for _ in 0..grid.len() {
        r.read_exact(&mut pair)?;
        let re = f64::from_le_bytes(pair[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(pair[8..].try_into().expect("8 bytes"));
        values.push(Complex64::new(re, im));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format("trailing bytes after field data".into()));
    }
    Field::from_values(&grid, rep, values)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn write_file(field: &Field, path: impl AsRef<Path>) -> Result<()> {
    write_to(field, BufWriter::new(File::create(path)?))
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Field> {
    read_from(BufReader::new(File::open(path)?))
}
