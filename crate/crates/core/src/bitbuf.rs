//! Packed MSB-first bit sequences and their on-disk form.
//!
//! On disk a stream is the raw packed bytes (final byte zero-padded) plus a
//! JSON sidecar at `<path>.meta.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{QwalkError, Result};
use crate::extraction::{CommitmentScheme, GenerationMode};
use crate::walk::WalkSpec;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Everything needed to replay a generation run bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationMetadata {
    pub spec: WalkSpec,
    pub spec_digest: String,
    pub scheme: CommitmentScheme,
    pub seed: u64,
    pub rounds: usize,
    pub bit_count: usize,
    pub mode: GenerationMode,
    pub tool_version: String,
    /// Always a classical PRNG; the output is pseudo-random.
    pub prng: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BitBuffer {
    bytes: Vec<u8>,
    bit_count: usize,
    metadata: Option<GenerationMetadata>,
}

impl BitBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut buf = Self::new();
        buf.extend(bits);
        buf
    }

    /// Rebuilds a buffer from packed bytes; padding bits past `bit_count` must be zero.
    pub fn from_bytes(bytes: Vec<u8>, bit_count: usize) -> Result<Self> {
        if bytes.len() != bit_count.div_ceil(8) {
            return Err(QwalkError::MalformedBuffer(format!(
                "{} bytes cannot hold exactly {bit_count} bits",
                bytes.len()
            )));
        }
        let pad = bytes.len() * 8 - bit_count;
        if pad > 0 {
            let mask = (1u8 << pad) - 1;
            if bytes[bytes.len() - 1] & mask != 0 {
                return Err(QwalkError::MalformedBuffer("non-zero padding bits".into()));
            }
        }
        Ok(Self {
            bytes,
            bit_count,
            metadata: None,
        })
    }

    /// Parses a string of `0`/`1` characters; other characters are rejected.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(QwalkError::MalformedBuffer(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(Self::from_bits)
    }

    pub fn push(&mut self, bit: bool) {
        if self.bit_count.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            let last = self.bytes.len() - 1;
            self.bytes[last] |= 0x80 >> (self.bit_count % 8);
        }
        self.bit_count += 1;
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.bit_count).then(|| self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    pub fn len(&self) -> usize {
        self.bit_count
    }

    pub fn is_empty(&self) -> bool {
        self.bit_count == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.bit_count).map(|i| self.bytes[i / 8] & (0x80 >> (i % 8)) != 0)
    }

    pub fn to_vec(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Keeps the first `n` bits, re-zeroing the padding.
    pub fn truncate(&mut self, n: usize) {
        if n >= self.bit_count {
            return;
        }
        self.bytes.truncate(n.div_ceil(8));
        let pad = self.bytes.len() * 8 - n;
        if pad > 0 {
            let last = self.bytes.len() - 1;
            self.bytes[last] &= !((1u8 << pad) - 1);
        }
        self.bit_count = n;
        if let Some(meta) = self.metadata.as_mut() {
            meta.bit_count = n;
        }
    }

    pub fn metadata(&self) -> Option<&GenerationMetadata> {
        self.metadata.as_ref()
    }

    pub fn set_metadata(&mut self, meta: GenerationMetadata) {
        self.metadata = Some(meta);
    }

    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut name = path.as_os_str().to_owned();
        name.push(".meta.json");
        PathBuf::from(name)
    }

    /// Writes the packed stream and, when present, the metadata sidecar.
    pub fn write_files(&self, path: &Path) -> Result<()> {
        fs::write(path, &self.bytes).map_err(|e| QwalkError::io(path, e))?;
        if let Some(meta) = &self.metadata {
            let side = Self::sidecar_path(path);
            let mut text = serde_json::to_string_pretty(meta)?;
            text.push('\n');
            fs::write(&side, text).map_err(|e| QwalkError::io(&side, e))?;
        }
        Ok(())
    }

    /// Reads a stream; the sidecar supplies the exact bit count when it exists,
    /// otherwise every byte is taken as eight bits.
    pub fn read_files(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| QwalkError::io(path, e))?;
        let side = Self::sidecar_path(path);
        if side.exists() {
            let text = fs::read_to_string(&side).map_err(|e| QwalkError::io(&side, e))?;
            let meta: GenerationMetadata = serde_json::from_str(&text)?;
            let mut buf = Self::from_bytes(bytes, meta.bit_count)?;
            buf.metadata = Some(meta);
            Ok(buf)
        } else {
            let n = bytes.len() * 8;
            Self::from_bytes(bytes, n)
        }
    }
}

impl Extend<bool> for BitBuffer {
    fn extend<I: IntoIterator<Item = bool>>(&mut self, iter: I) {
        for bit in iter {
            self.push(bit);
        }
    }
}

impl std::fmt::Display for BitBuffer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}
