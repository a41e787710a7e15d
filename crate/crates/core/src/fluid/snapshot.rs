//! Snapshot files: a self-describing binary layout and a CSV grid dump.
//!
//! Binary layout: 8-byte magic `GFSNAP01`, u64 little-endian header length,
//! JSON header, then every field as little-endian f64 in header order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FluidState, Grid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"GFSNAP01";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    t: f64,
    grid: Grid,
    fields: Vec<String>,
}

fn field_names(n: usize) -> Vec<String> {
    let mut f: Vec<String> = (0..n).map(|i| format!("u{i}")).collect();
    f.push("rho".into());
    f.push("S".into());
    f
}

pub fn write_binary<W: Write>(state: &FluidState, mut w: W) -> Result<()> {
    let header = Header { t: state.t, grid: state.grid.clone(), fields: field_names(state.dim()) };
    let h = serde_json::to_vec(&header).map_err(|e| Error::Numeric(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&(h.len() as u64).to_le_bytes())?;
    w.write_all(&h)?;
    for field in state.u.iter().chain([&state.rho, &state.s]) {
        for v in field {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<FluidState> {
    let bad = |m: &str| Error::config("snapshot", m);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let mut h = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut h)?;
    let header: Header = serde_json::from_slice(&h).map_err(|e| bad(&e.to_string()))?;
    let n = header.grid.dim();
    if header.fields != field_names(n) {
        return Err(bad("unexpected field list"));
    }
    let m = header.grid.len();
    let mut read_field = || -> Result<Vec<f64>> {
        let mut buf = vec![0u8; 8 * m];
        r.read_exact(&mut buf)?;
        Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    };
    let mut u = Vec::with_capacity(n);
    for _ in 0..n {
        u.push(read_field()?);
    }
    let rho = read_field()?;
    let s = read_field()?;
    Ok(FluidState { grid: header.grid, t: header.t, u, rho, s })
}

/// One row per grid point: index, coordinates, u components, ρ, S.
pub fn write_csv<W: Write>(state: &FluidState, w: W) -> Result<()> {
    let n = state.dim();
    let mut wr = csv::Writer::from_writer(w);
    let mut head = vec!["index".to_string()];
    head.extend((0..n).map(|a| format!("x{a}")));
    head.extend(field_names(n));
    wr.write_record(&head).map_err(csv_err)?;
    for idx in 0..state.len() {
        let mut row = vec![idx.to_string()];
        row.extend(state.grid.point(idx).iter().map(|v| format!("{v:e}")));
        row.extend(state.u.iter().map(|c| format!("{:e}", c[idx])));
        row.push(format!("{:e}", state.rho[idx]));
        row.push(format!("{:e}", state.s[idx]));
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

pub fn save(state: &FluidState, path: &Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    if path.extension().is_some_and(|e| e == "csv") {
        write_csv(state, f)
    } else {
        write_binary(state, f)
    }
}

pub fn load(path: &Path) -> Result<FluidState> {
    read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
}
