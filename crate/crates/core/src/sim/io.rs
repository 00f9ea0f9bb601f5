//! Transcript files.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! "DIRT" | u8 version | u32 header length | JSON header | u64 rounds | packed (A, B) bits
//! ```
//!
//! The header holds the parameters, seed and stream. Round `i` stores `A_i`
//! at bit `2i` and `B_i` (0 when not recorded) at bit `2i + 1`, LSB first.
//! Test flags and inputs are not stored; the reader regenerates them from
//! the seed.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{replay_inputs, Origin, Round, SimError, Transcript};
use crate::geat::ProtocolParams;

pub const TRANSCRIPT_MAGIC: &[u8; 4] = b"DIRT";
pub const TRANSCRIPT_VERSION: u8 = 1;
const CSV_SCHEMA: &str = "# di_rand_transcript_csv v1";

#[derive(Serialize, Deserialize)]
struct Header {
    params: ProtocolParams,
    seed: u64,
    stream: u64,
}

pub fn write_transcript_binary<W: Write>(mut out: W, t: &Transcript) -> Result<(), SimError> {
    let origin = t.origin().ok_or(SimError::NoOrigin)?;
    let header = serde_json::to_vec(&Header {
        params: t.params().clone(),
        seed: origin.seed,
        stream: origin.stream,
    })
    .map_err(|e| SimError::Format(e.to_string()))?;
    out.write_all(TRANSCRIPT_MAGIC)?;
    out.write_all(&[TRANSCRIPT_VERSION])?;
    out.write_all(&(header.len() as u32).to_le_bytes())?;
    out.write_all(&header)?;
    out.write_all(&(t.len() as u64).to_le_bytes())?;

    let mut packed = vec![0u8; (2 * t.len()).div_ceil(8)];
    for (i, r) in t.rounds().enumerate() {
        let bits = r.a | (r.b.unwrap_or(0) << 1);
        packed[i / 4] |= bits << (2 * (i % 4));
    }
    out.write_all(&packed)?;
    Ok(())
}

pub fn read_transcript_binary<R: Read>(mut input: R) -> Result<Transcript, SimError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != TRANSCRIPT_MAGIC {
        return Err(SimError::Format("bad magic".into()));
    }
    let mut version = [0u8; 1];
    input.read_exact(&mut version)?;
    if version[0] != TRANSCRIPT_VERSION {
        return Err(SimError::Format(format!("unsupported version {}", version[0])));
    }
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let mut header = vec![0u8; u32::from_le_bytes(len) as usize];
    input.read_exact(&mut header)?;
    let header: Header = serde_json::from_slice(&header).map_err(|e| SimError::Format(e.to_string()))?;
    let mut n = [0u8; 8];
    input.read_exact(&mut n)?;
    let n = u64::from_le_bytes(n);
    let mut packed = vec![0u8; (2 * n as usize).div_ceil(8)];
    input.read_exact(&mut packed)?;

    let origin = Origin {
        seed: header.seed,
        stream: header.stream,
    };
    let keep_b = header.params.rand_type.records_generation_b();
    let rounds = replay_inputs(&header.params, origin, n)
        .into_iter()
        .enumerate()
        .map(|(i, (t, x, y))| {
            let bits = packed[i / 4] >> (2 * (i % 4));
            Round {
                t,
                x,
                y,
                a: bits & 1,
                b: (t || keep_b).then_some((bits >> 1) & 1),
            }
        });
    Transcript::assemble(rounds, &header.params, Some(origin))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

/// Debug CSV: comment lines with schema, seed and parameters, then one row
/// per round. `-` marks an unrecorded value.
pub fn write_transcript_csv<W: Write>(mut out: W, t: &Transcript) -> Result<(), SimError> {
    writeln!(out, "{CSV_SCHEMA}")?;
    if let Some(o) = t.origin() {
        writeln!(out, "# seed={}", o.seed)?;
        writeln!(out, "# stream={}", o.stream)?;
    }
    let params = serde_json::to_string(t.params()).map_err(|e| SimError::Format(e.to_string()))?;
    writeln!(out, "# params={params}")?;
    writeln!(out, "# verdict={}", t.verdict())?;

    let n_zero = t.params().class.n_zero();
    let mut w = csv::Writer::from_writer(out);
    let mut head: Vec<String> = ["round", "t", "x", "y", "a", "b", "c_win"].map(String::from).to_vec();
    head.extend((0..n_zero).map(|j| format!("c_z{j}")));
    w.write_record(&head).map_err(csv_err)?;
    for (i, r) in t.rounds().enumerate() {
        let mut row = vec![
            i.to_string(),
            u8::from(r.t).to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.a.to_string(),
            opt(r.b),
            opt(t.c_win()[i].map(u8::from)),
        ];
        row.extend((0..n_zero).map(|j| opt(t.c_zero(j)[i].map(u8::from))));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> SimError {
    SimError::Io(e.into())
}
