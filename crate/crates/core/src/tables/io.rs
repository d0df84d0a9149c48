//! Binary LUT file and CSV export.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "LCCD" | version u16 | S u32 | M u32 | n_max u32
//! | f[1..=S] u16 | Lg+[1..=n_max] u32 | Lg-[1..=n_max] u32 | crc32 u32
//! ```
//!
//! The CRC covers every preceding byte.

use std::io::{self, Write};

use super::{FTable, LgTables, TableConfig, TableError, TableSet};

pub const MAGIC: &[u8; 4] = b"LCCD";
pub const FORMAT_VERSION: u16 = 1;

const HEADER_LEN: usize = 4 + 2 + 3 * 4;

pub fn serialize(tables: &TableSet) -> Vec<u8> {
    let c = tables.config();
    let body = c.s as usize * 2 + c.n_max as usize * 8;
    let mut out = Vec::with_capacity(HEADER_LEN + body + 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for v in [c.s, c.m, c.n_max] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &f in tables.f().entries() {
        // Mantissas are below M <= 2^16.
        out.extend_from_slice(&(f as u16).to_le_bytes());
    }
    for &v in tables
        .lg()
        .plus_entries()
        .iter()
        .chain(tables.lg().minus_entries())
    {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> &'a [u8] {
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        s
    }

    fn u16(&mut self) -> u16 {
        u16::from_le_bytes(self.take(2).try_into().unwrap())
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take(4).try_into().unwrap())
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<TableSet, TableError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(TableError::BadMagic);
    }
    // Any truncation or corruption shows up as a CRC mismatch before lengths are trusted.
    if bytes.len() < HEADER_LEN + 4 {
        return Err(TableError::Checksum {
            stored: 0,
            computed: crc32fast::hash(bytes),
        });
    }
    let (payload, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(TableError::Checksum { stored, computed });
    }

    let mut r = Reader {
        bytes: payload,
        pos: 4,
    };
    let version = r.u16();
    if version != FORMAT_VERSION {
        return Err(TableError::VersionMismatch(version));
    }
    let config = TableConfig {
        s: r.u32(),
        m: r.u32(),
        n_max: r.u32(),
    };
    config.check()?;
    let expected = HEADER_LEN + config.s as usize * 2 + config.n_max as usize * 8;
    if payload.len() != expected {
        return Err(TableError::Invariant(format!(
            "payload is {} bytes, expected {expected} for {config}",
            payload.len()
        )));
    }
    let f: Vec<u32> = (0..config.s).map(|_| r.u16() as u32).collect();
    let plus: Vec<u32> = (0..config.n_max).map(|_| r.u32()).collect();
    let minus: Vec<u32> = (0..config.n_max).map(|_| r.u32()).collect();
    let f = FTable::from_entries(config.s, config.m, f)?;
    let lg = LgTables::from_entries(plus, minus)?;
    TableSet::from_parts(config, f, lg)
}

/// Text export, one `kind,n_or_s,value` row per table entry.
pub fn write_csv<W: Write>(tables: &TableSet, mut out: W) -> io::Result<()> {
    writeln!(out, "kind,n_or_s,value")?;
    for (r, f) in tables.f().entries().iter().enumerate() {
        writeln!(out, "f,{},{}", r + 1, f)?;
    }
    for (n, v) in tables.lg().plus_entries().iter().enumerate() {
        writeln!(out, "lg_plus,{},{}", n + 1, v)?;
    }
    for (n, v) in tables.lg().minus_entries().iter().enumerate() {
        writeln!(out, "lg_minus,{},{}", n + 1, v)?;
    }
    Ok(())
}
