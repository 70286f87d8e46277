//! Binary snapshot format.
//!
//! Layout (bit-exact contract):
//!
//! ```text
//! STRATWAVE1 nx nz Lx Lz t\n      ASCII header, space-separated
//! v[0..nx*nz]                     little-endian IEEE f64, row-major (ix, iz)
//! rho[0..nx*nz]
//! psi[0..nx*nz]
//! ```
//!
//! Header floats are written in shortest round-trip form, so parsing
//! recovers them exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField};
use crate::model::FieldState;

pub const MAGIC: &str = "STRATWAVE1";

pub fn write_snapshot(w: &mut impl Write, state: &FieldState) -> Result<()> {
    state.validate()?;
    let grid = state.grid();
    writeln!(
        w,
        "{MAGIC} {} {} {} {} {}",
        grid.nx(),
        grid.nz(),
        grid.lx(),
        grid.lz(),
        state.t
    )?;
    for field in [&state.v, &state.rho, &state.psi] {
        for &value in field.values() {
            w.write_all(&value.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_snapshot(r: &mut impl Read) -> Result<FieldState> {
    let mut header = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        let n = r.read(&mut byte)?;
        if n == 0 {
            return Err(Error::SnapshotFormat("truncated header".into()));
        }
        if byte[0] == b'\n' {
            break;
        }
        header.push(byte[0]);
        if header.len() > 256 {
            return Err(Error::SnapshotFormat("header line too long".into()));
        }
    }
    let header = String::from_utf8(header)
        .map_err(|_| Error::SnapshotFormat("header is not UTF-8".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 6 || parts[0] != MAGIC {
        return Err(Error::SnapshotFormat(format!(
            "expected `{MAGIC} nx nz Lx Lz t`, got `{header}`"
        )));
    }
    let nx: usize = parts[1]
        .parse()
        .map_err(|_| Error::SnapshotFormat("bad nx".into()))?;
    let nz: usize = parts[2]
        .parse()
        .map_err(|_| Error::SnapshotFormat("bad nz".into()))?;
    let lx: f64 = parts[3]
        .parse()
        .map_err(|_| Error::SnapshotFormat("bad Lx".into()))?;
    let lz: f64 = parts[4]
        .parse()
        .map_err(|_| Error::SnapshotFormat("bad Lz".into()))?;
    let t: f64 = parts[5]
        .parse()
        .map_err(|_| Error::SnapshotFormat("bad t".into()))?;
    let grid = Grid2D::new(nx, nz, lx, lz)?;

    let mut read_field = || -> Result<ScalarField> {
        let mut buf = vec![0u8; grid.len() * 8];
        r.read_exact(&mut buf)
            .map_err(|_| Error::SnapshotFormat("truncated field data".into()))?;
        let values = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        ScalarField::from_values(grid, values)
    };
    let v = read_field()?;
    let rho = read_field()?;
    let psi = read_field()?;
    let state = FieldState { t, v, rho, psi };
    state.validate()?;
    Ok(state)
}

pub fn write_snapshot_file(path: impl AsRef<Path>, state: &FieldState) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_snapshot(&mut w, state)?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot_file(path: impl AsRef<Path>) -> Result<FieldState> {
    read_snapshot(&mut BufReader::new(File::open(path)?))
}
