//! PFT1 feature-map file format: 4-byte magic `PFT1`, one LF-terminated
//! ASCII header line `H W C variant`, then `H*W*C` little-endian f32 values
//! in row-major channel-fastest order. Bit-exact across platforms.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{FeatureMap, Variant};

const MAGIC: &[u8; 4] = b"PFT1";
const MAX_HEADER_BYTES: usize = 128;

#[derive(Debug, Error)]
pub enum PftError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic, not a PFT1 file")]
    BadMagic,
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("payload holds {got} values, header promises {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

pub fn write_feature_map_to(map: &FeatureMap, mut w: impl Write) -> io::Result<()> {
    w.write_all(MAGIC)?;
    writeln!(
        w,
        "{} {} {} {}",
        map.height,
        map.width,
        map.channels(),
        map.variant.name()
    )?;
    for value in &map.data {
        w.write_all(&value.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_feature_map(map: &FeatureMap, path: impl AsRef<Path>) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_feature_map_to(map, &mut w)?;
    w.flush()
}

pub fn read_feature_map(path: impl AsRef<Path>) -> Result<FeatureMap, PftError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(PftError::BadMagic);
    }

    let mut header = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte)?;
        if byte[0] == b'\n' {
            break;
        }
        header.push(byte[0]);
        if header.len() > MAX_HEADER_BYTES {
            return Err(PftError::BadHeader("header line too long".to_string()));
        }
    }
    let header =
        String::from_utf8(header).map_err(|e| PftError::BadHeader(e.to_string()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(PftError::BadHeader(format!(
            "expected `H W C variant`, got `{header}`"
        )));
    }
    let height: usize = fields[0]
        .parse()
        .map_err(|_| PftError::BadHeader(format!("bad height `{}`", fields[0])))?;
    let width: usize = fields[1]
        .parse()
        .map_err(|_| PftError::BadHeader(format!("bad width `{}`", fields[1])))?;
    let channels: usize = fields[2]
        .parse()
        .map_err(|_| PftError::BadHeader(format!("bad channel count `{}`", fields[2])))?;
    let variant: Variant = fields[3]
        .parse()
        .map_err(|_| PftError::BadHeader(format!("bad variant `{}`", fields[3])))?;
    if channels != variant.channels() {
        return Err(PftError::BadHeader(format!(
            "variant {variant} carries {} channels, header says {channels}",
            variant.channels()
        )));
    }

    let expected = height * width * channels;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != expected * 4 {
        return Err(PftError::SizeMismatch {
            expected,
            got: payload.len() / 4,
        });
    }
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok(FeatureMap {
        height,
        width,
        variant,
        data,
    })
}
