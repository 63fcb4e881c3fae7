//! Mono 32-bit float WAV files: RIFF with IEEE-float format tag 3,
//! little-endian, canonical 44-byte header. Samples are narrowed from the
//! internal `f64` representation on write and widened back on read.

use std::io::Write;
use std::path::Path;

use crate::audio::Waveform;
use crate::error::{Error, Result};

const FORMAT_IEEE_FLOAT: u16 = 3;

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_error(path: &Path, offset: usize, message: impl std::fmt::Display) -> Error {
    Error::FileFormat {
        path: path.to_path_buf(),
        message: format!("byte {offset}: {message}"),
    }
}

pub fn write_wav(path: &Path, waveform: &Waveform) -> Result<()> {
    let data_size = (waveform.len() * 4) as u32;
    let mut out = Vec::with_capacity(44 + data_size as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_size).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_IEEE_FLOAT.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&waveform.sample_rate().to_le_bytes());
    out.extend_from_slice(&(waveform.sample_rate() * 4).to_le_bytes());
    out.extend_from_slice(&4u16.to_le_bytes()); // block align
    out.extend_from_slice(&32u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_size.to_le_bytes());
    for &sample in waveform.samples() {
        out.extend_from_slice(&(sample as f32).to_le_bytes());
    }
    let mut file = std::fs::File::create(path).map_err(|e| io_error(path, e))?;
    file.write_all(&out).map_err(|e| io_error(path, e))
}

struct FmtChunk {
    sample_rate: u32,
}

fn parse_fmt(path: &Path, offset: usize, chunk: &[u8]) -> Result<FmtChunk> {
    if chunk.len() < 16 {
        return Err(format_error(path, offset, "fmt chunk shorter than 16 bytes"));
    }
    let format_tag = u16::from_le_bytes([chunk[0], chunk[1]]);
    if format_tag != FORMAT_IEEE_FLOAT {
        return Err(format_error(
            path,
            offset,
            format!("format tag {format_tag}, expected {FORMAT_IEEE_FLOAT} (IEEE float)"),
        ));
    }
    let channels = u16::from_le_bytes([chunk[2], chunk[3]]);
    if channels != 1 {
        return Err(format_error(
            path,
            offset + 2,
            format!("{channels} channels, expected mono"),
        ));
    }
    let bits = u16::from_le_bytes([chunk[14], chunk[15]]);
    if bits != 32 {
        return Err(format_error(
            path,
            offset + 14,
            format!("{bits} bits per sample, expected 32"),
        ));
    }
    Ok(FmtChunk {
        sample_rate: u32::from_le_bytes([chunk[4], chunk[5], chunk[6], chunk[7]]),
    })
}

pub fn read_wav(path: &Path) -> Result<Waveform> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" {
        return Err(format_error(path, 0, "missing RIFF header"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(format_error(path, 8, "missing WAVE tag"));
    }
    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<(usize, usize)> = None;
    let mut cursor = 12usize;
    while cursor + 8 <= bytes.len() {
        let id = &bytes[cursor..cursor + 4];
        let size = u32::from_le_bytes([
            bytes[cursor + 4],
            bytes[cursor + 5],
            bytes[cursor + 6],
            bytes[cursor + 7],
        ]) as usize;
        let body = cursor + 8;
        if body + size > bytes.len() {
            return Err(format_error(
                path,
                cursor + 4,
                format!("chunk size {size} runs past end of file"),
            ));
        }
        match id {
            b"fmt " => fmt = Some(parse_fmt(path, body, &bytes[body..body + size])?),
            b"data" => data = Some((body, size)),
            _ => {}
        }
        // Chunks are word-aligned; odd sizes carry one pad byte.
        cursor = body + size + (size & 1);
    }
    let fmt = fmt.ok_or_else(|| format_error(path, bytes.len(), "no fmt chunk"))?;
    let (data_offset, data_size) =
        data.ok_or_else(|| format_error(path, bytes.len(), "no data chunk"))?;
    if data_size % 4 != 0 {
        return Err(format_error(
            path,
            data_offset,
            format!("data size {data_size} is not a multiple of 4"),
        ));
    }
    let samples = bytes[data_offset..data_offset + data_size]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    Waveform::new(samples, fmt.sample_rate)
}
