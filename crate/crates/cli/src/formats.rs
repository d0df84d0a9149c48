//! Index and sequence file encodings.
//!
//! Indices are `k` bits packed MSB-first into `ceil(k/8)` bytes with zero padding, or
//! the hex text of those bytes. Sequences are ASCII `0`/`1` plus a newline, or packed
//! like indices.

use logccdm::{CcSequence, IndexWord};

use crate::error::{CliError, CliResult};

pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
        out[i / 8] |= 0x80 >> (i % 8);
    }
    out
}

/// First `len` bits of `bytes`; everything after them must be zero.
pub fn unpack_bits(bytes: &[u8], len: usize, what: &str) -> CliResult<Vec<bool>> {
    if bytes.len() != len.div_ceil(8) {
        return Err(CliError::invalid(format!(
            "{what} length: expected {len} bits in {} bytes, got {} bytes",
            len.div_ceil(8),
            bytes.len()
        )));
    }
    let bits: Vec<bool> = (0..len)
        .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
        .collect();
    if pack_bits(&bits) != bytes {
        return Err(CliError::invalid(format!(
            "{what} padding bits after bit {len} are not zero"
        )));
    }
    Ok(bits)
}

pub fn encode_index(v: &IndexWord, hex_text: bool) -> Vec<u8> {
    let packed = pack_bits(&v.bits());
    if hex_text {
        format!("{}\n", hex::encode(packed)).into_bytes()
    } else {
        packed
    }
}

pub fn decode_index(bytes: &[u8], k: usize, hex_text: bool) -> CliResult<IndexWord> {
    let raw;
    let packed = if hex_text {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| CliError::invalid("index: hex input is not text"))?;
        raw = hex::decode(text.trim()).map_err(|e| CliError::invalid(format!("index: {e}")))?;
        &raw[..]
    } else {
        bytes
    };
    let bits = unpack_bits(packed, k, "index")?;
    Ok(IndexWord::from_bits(&bits))
}

pub fn encode_sequence(x: &CcSequence, packed: bool) -> Vec<u8> {
    if packed {
        let bits: Vec<bool> = x.symbols().iter().map(|&s| s == 1).collect();
        pack_bits(&bits)
    } else {
        let mut out: Vec<u8> = x.symbols().iter().map(|&s| b'0' + s).collect();
        out.push(b'\n');
        out
    }
}

pub fn decode_sequence(bytes: &[u8], len: usize, packed: bool) -> CliResult<CcSequence> {
    let symbols: Vec<u8> = if packed {
        unpack_bits(bytes, len, "sequence")?
            .into_iter()
            .map(u8::from)
            .collect()
    } else {
        let text = bytes.strip_suffix(b"\n").unwrap_or(bytes);
        let text = text.strip_suffix(b"\r").unwrap_or(text);
        text.iter()
            .map(|&c| match c {
                b'0' | b'1' => Ok(c - b'0'),
                other => Err(CliError::invalid(format!(
                    "sequence: unexpected byte 0x{other:02x}"
                ))),
            })
            .collect::<CliResult<_>>()?
    };
    if symbols.len() != len {
        return Err(CliError::invalid(format!(
            "sequence length: expected {len} symbols, got {}",
            symbols.len()
        )));
    }
    Ok(CcSequence::new(symbols)?)
}
