//! Binary cache for assembled kernel tables.
//!
//! Layout (little-endian throughout):
//!   magic "PHNK", version byte 0x01,
//!   u32 n, f64 quad_tol,
//!   n x f64 nodes, n x f64 weights, n x f64 V, n^2 x f64 K (row-major),
//!   f64 v0, f64 c1, f64 c2,
//!   trailing CRC-32 (IEEE) of all preceding bytes.

use crate::error::{Error, Result};
use crate::grid::WaveGrid;
use crate::kernel::KernelTable;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"PHNK";
const VERSION: u8 = 0x01;

fn crc32_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    for (i, slot) in table.iter_mut().enumerate() {
        let mut c = i as u32;
        for _ in 0..8 {
            c = if c & 1 != 0 {
                0xEDB8_8320 ^ (c >> 1)
            } else {
                c >> 1
            };
        }
        *slot = c;
    }
    table
}

pub fn crc32(data: &[u8]) -> u32 {
    static TABLE: std::sync::OnceLock<[u32; 256]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(crc32_table);
    let mut c = 0xFFFF_FFFFu32;
    for &b in data {
        c = table[((c ^ b as u32) & 0xFF) as usize] ^ (c >> 8);
    }
    c ^ 0xFFFF_FFFF
}

fn push_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

pub fn encode(table: &KernelTable) -> Vec<u8> {
    let n = table.grid.n;
    let mut buf = Vec::with_capacity(17 + 8 * (3 * n + n * n + 3) + 4);
    buf.extend_from_slice(MAGIC);
    buf.push(VERSION);
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    push_f64(&mut buf, table.quad_tol);
    for &x in &table.grid.nodes {
        push_f64(&mut buf, x);
    }
    for _ in 0..n {
        push_f64(&mut buf, table.grid.weight);
    }
    for &x in &table.v {
        push_f64(&mut buf, x);
    }
    for &x in &table.k {
        push_f64(&mut buf, x);
    }
    push_f64(&mut buf, table.v0);
    push_f64(&mut buf, table.c1);
    push_f64(&mut buf, table.c2);
    let crc = crc32(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::CacheFormat("truncated cache file".into()));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode(data: &[u8]) -> Result<KernelTable> {
    if data.len() < 4 + 1 + 4 + 8 + 4 {
        return Err(Error::CacheFormat("cache file too short".into()));
    }
    let (body, crc_bytes) = data.split_at(data.len() - 4);
    let stored = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    let actual = crc32(body);
    if stored != actual {
        return Err(Error::CacheFormat(format!(
            "CRC mismatch: stored {stored:#010x}, computed {actual:#010x}"
        )));
    }
    let mut r = Reader { data: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::CacheFormat("bad magic, expected PHNK".into()));
    }
    if r.take(1)?[0] != VERSION {
        return Err(Error::CacheFormat("unsupported cache version".into()));
    }
    let n = r.u32()? as usize;
    let quad_tol = r.f64()?;
    let expected = 17 + 8 * (3 * n + n * n + 3);
    if body.len() != expected {
        return Err(Error::CacheFormat(format!(
            "length mismatch for n = {n}: {} vs {expected}",
            body.len()
        )));
    }
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        nodes.push(r.f64()?);
    }
    let mut weights = Vec::with_capacity(n);
    for _ in 0..n {
        weights.push(r.f64()?);
    }
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        v.push(r.f64()?);
    }
    let mut k = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        k.push(r.f64()?);
    }
    let v0 = r.f64()?;
    let c1 = r.f64()?;
    let c2 = r.f64()?;
    let reference = WaveGrid::new(n);
    if nodes
        .iter()
        .zip(&reference.nodes)
        .any(|(a, b)| (a - b).abs() > 1e-15)
        || weights.iter().any(|&wi| (wi - reference.weight).abs() > 1e-18)
    {
        return Err(Error::CacheFormat(
            "grid is not the canonical midpoint grid".into(),
        ));
    }
    let wprof: Vec<f64> = reference
        .nodes
        .iter()
        .zip(&v)
        .map(|(&kk, &vv)| vv / kk.abs().powf(5.0 / 3.0))
        .collect();
    let c0_bound = wprof.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let band = (0.8 * (n as f64).powf(1.0 / 3.0)).round().max(2.0) as usize;
    Ok(KernelTable {
        grid: reference,
        k,
        v,
        wprof,
        v0,
        c1,
        c2,
        c0_bound,
        quad_tol,
        singular_cells: 0,
        band,
    })
}

pub fn save(table: &KernelTable, path: &Path) -> Result<()> {
    let bytes = encode(table);
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<KernelTable> {
    let mut f = std::fs::File::open(path)?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    decode(&buf)
}
