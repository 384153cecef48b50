//! Flat binary snapshots.
//!
//! Layout, all little-endian:
//! `b"MXSNAP01"`, u32 dim, u32 normal axis, u32 component count,
//! dim x u64 points per axis, dim x f64 lengths, f64 time,
//! then every component as `len` f64 values in grid order.

use std::io::{Read, Write};

use crate::error::{MaxlabError, Result};
use crate::field::{FieldState, ScalarField};
use crate::grid::TorusGrid;

const MAGIC: &[u8; 8] = b"MXSNAP01";

pub fn write_snapshot<W: Write>(mut w: W, state: &FieldState) -> Result<()> {
    let g = state.grid();
    let comps: Vec<&ScalarField> = state.components().collect();
    w.write_all(MAGIC)?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.normal_axis() as u32).to_le_bytes())?;
    w.write_all(&(comps.len() as u32).to_le_bytes())?;
    for &n in g.shape() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for &l in g.lengths() {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&state.time.to_le_bytes())?;
    let mut buf = Vec::with_capacity(g.len() * 8);
    for c in comps {
        buf.clear();
        for v in c.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<FieldState> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(MaxlabError::InvalidInput("not a snapshot file".into()));
    }
    let dim = read_u32(&mut r)? as usize;
    let normal = read_u32(&mut r)? as usize;
    let ncomp = read_u32(&mut r)? as usize;
    if !(2..=3).contains(&dim) {
        return Err(MaxlabError::InvalidInput(format!("snapshot dimension {dim}")));
    }
    let mut shape = Vec::with_capacity(dim);
    for _ in 0..dim {
        shape.push(read_u64(&mut r)? as usize);
    }
    let mut lengths = Vec::with_capacity(dim);
    for _ in 0..dim {
        lengths.push(read_f64(&mut r)?);
    }
    let time = read_f64(&mut r)?;
    let grid = TorusGrid::new(&shape, &lengths, normal)?;
    let mut comps = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let mut raw = vec![0u8; grid.len() * 8];
        r.read_exact(&mut raw)?;
        let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        comps.push(ScalarField::new(&grid, data)?);
    }
    let ne = if dim == 2 { 2 } else { 3 };
    let h = comps.split_off(ne.min(comps.len()));
    FieldState::new(time, comps, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let g = TorusGrid::new(&[6, 8], &[1.0, 2.5], 1).unwrap();
        let mut s = FieldState::zeros(&g);
        s.time = 0.75;
        s.e[1] = ScalarField::from_fn(&g, |x| x[0] - 2.0 * x[1]);
        let mut bytes = Vec::new();
        write_snapshot(&mut bytes, &s).unwrap();
        let back = read_snapshot(bytes.as_slice()).unwrap();
        assert_eq!(back.time, 0.75);
        assert_eq!(back.max_diff(&s), 0.0);
        assert_eq!(back.grid(), &g);
    }
}
