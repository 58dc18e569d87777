//! On-disk formats.
//!
//! Dataset files: the magic bytes `KNNV`, then version, `n` and `d` as
//! little-endian `u32`, then `n·d` little-endian `f32` coordinates, row-major.
//!
//! Neighbor files come in two flavors. Text has one line per query:
//! the query id followed by tab-separated `index:distance` fields, distances
//! written with 9 significant digits. Binary mirrors the dataset header with
//! magic `KNNR`, version, `n`, and the per-row neighbor count `m`, then for
//! every row `m` pairs of (`u32` index, `f32` distance), little-endian.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::dataset::Dataset;
use crate::error::{KnnError, Result};
use crate::heap::{Neighbor, NeighborList};
use crate::metric::Distance;

pub const DATASET_MAGIC: [u8; 4] = *b"KNNV";
pub const NEIGHBORS_MAGIC: [u8; 4] = *b"KNNR";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 16;

fn format_err(msg: impl Into<String>) -> KnnError {
    KnnError::Format(msg.into())
}

fn read_header(r: &mut impl Read, magic: [u8; 4]) -> Result<(u32, u32)> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => format_err("file shorter than its 16-byte header"),
        _ => KnnError::Io(e),
    })?;
    if header[..4] != magic {
        return Err(format_err(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&header[..4]),
            String::from_utf8_lossy(&magic)
        )));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    if word(4) != FORMAT_VERSION {
        return Err(format_err(format!("unsupported version {}", word(4))));
    }
    Ok((word(8), word(12)))
}

fn write_header(w: &mut impl Write, magic: [u8; 4], a: u32, b: u32) -> io::Result<()> {
    w.write_all(&magic)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&a.to_le_bytes())?;
    w.write_all(&b.to_le_bytes())
}

pub fn read_dataset(mut r: impl Read) -> Result<Dataset> {
    let (n, d) = read_header(&mut r, DATASET_MAGIC)?;
    let (n, d) = (n as usize, d as usize);
    let count = n
        .checked_mul(d)
        .filter(|c| c.checked_mul(4).is_some())
        .ok_or_else(|| format_err(format!("{n} x {d} is too large")))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 4 {
        return Err(format_err(format!(
            "header declares {n} x {d} = {} payload bytes, file has {}",
            count * 4,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Dataset::new(n, d, values)
}

pub fn write_dataset(mut w: impl Write, ds: &Dataset) -> Result<()> {
    write_header(&mut w, DATASET_MAGIC, ds.n() as u32, ds.d() as u32)?;
    for v in ds.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    read_dataset(BufReader::new(File::open(path)?))
}

pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    write_dataset(BufWriter::new(File::create(path)?), ds)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Text,
    Binary,
}

impl FromStr for OutputFormat {
    type Err = KnnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "binary" => Ok(OutputFormat::Binary),
            other => Err(KnnError::config(format!("unknown output format {other:?}"))),
        }
    }
}

/// Formats `x` like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    const SIG: i32 = 9;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (SIG - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_neighbors_text(mut w: impl Write, lists: &[NeighborList]) -> Result<()> {
    let mut line = String::new();
    for list in lists {
        line.clear();
        line.push_str(&list.query.to_string());
        for nb in &list.neighbors {
            line.push('\t');
            line.push_str(&nb.index.to_string());
            line.push(':');
            line.push_str(&format_sig9(nb.distance as f64));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_neighbors_binary(mut w: impl Write, lists: &[NeighborList]) -> Result<()> {
    let m = lists.first().map_or(0, NeighborList::len);
    if let Some(bad) = lists.iter().find(|l| l.len() != m) {
        return Err(format_err(format!(
            "binary output needs equal row lengths; query {} has {} neighbors, expected {m}",
            bad.query,
            bad.len()
        )));
    }
    write_header(&mut w, NEIGHBORS_MAGIC, lists.len() as u32, m as u32)?;
    for list in lists {
        for nb in &list.neighbors {
            w.write_all(&nb.index.to_le_bytes())?;
            w.write_all(&(nb.distance as f32).to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_neighbors_binary(mut r: impl Read) -> Result<Vec<NeighborList>> {
    let (n, m) = read_header(&mut r, NEIGHBORS_MAGIC)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let expected = n as usize * m as usize * 8;
    if bytes.len() != expected {
        return Err(format_err(format!("expected {expected} payload bytes, found {}", bytes.len())));
    }
    let pairs: Vec<Neighbor> = bytes
        .chunks_exact(8)
        .map(|c| {
            let index = u32::from_le_bytes(c[..4].try_into().unwrap());
            let distance = f32::from_le_bytes(c[4..].try_into().unwrap());
            Neighbor::new(distance as Distance, index)
        })
        .collect();
    let m = m as usize;
    Ok((0..n as usize)
        .map(|q| NeighborList::new(q, pairs[q * m..(q + 1) * m].to_vec()))
        .collect())
}

pub fn write_neighbors(w: impl Write, lists: &[NeighborList], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Text => write_neighbors_text(w, lists),
        OutputFormat::Binary => write_neighbors_binary(w, lists),
    }
}

/// Renders neighbor lists into a byte buffer.
pub fn render_neighbors(lists: &[NeighborList], format: OutputFormat) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_neighbors(&mut out, lists, format)?;
    Ok(out)
}
