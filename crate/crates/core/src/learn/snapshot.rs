//! Frozen policy snapshots and their binary file format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   4 bytes  "DDQS"
//! version u32      format version (1)
//! session u32      training session index
//! step    u64      training step of the snapshot
//! score   f64      driving score; NaN when not yet evaluated
//! tag     u32 + n  UTF-8 metadata (the harness stores its config hash)
//! layers  u32 + k  layer widths (u32 each): 201, 64, 64, 9
//! params  f64 * m  parameters in network layout order
//! ```
//!
//! Parameters are stored as `f64` regardless of the in-memory scalar, so
//! `f64` snapshots round-trip bit-exactly and a reloaded snapshot
//! reproduces identical actions on identical observations.

use crate::error::{Error, Result};
use crate::learn::net::{QNet, ACTION_DIM, HIDDEN_DIM, OBS_DIM, PARAM_COUNT};
use crate::scalar::Real;
use std::io::{Read, Write};
use std::path::Path;

pub const SNAPSHOT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"DDQS";

#[derive(Clone, Debug, PartialEq)]
pub struct PolicySnapshot<T> {
    params: Vec<T>,
    pub session: u32,
    pub step: u64,
    pub score: Option<f64>,
    pub tag: String,
}

impl<T: Real> PolicySnapshot<T> {
    pub fn new(net: &QNet<T>, session: u32, step: u64) -> Self {
        Self { params: net.params().to_vec(), session, step, score: None, tag: String::new() }
    }

    /// Stable id used in logs, reports, and file names.
    pub fn policy_id(&self) -> String {
        format!("sess{:02}-{:08}", self.session, self.step)
    }

    pub fn net(&self) -> QNet<T> {
        QNet::from_params(self.params.clone()).expect("snapshot params validated at construction")
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        w.write_all(&self.session.to_le_bytes())?;
        w.write_all(&self.step.to_le_bytes())?;
        w.write_all(&self.score.unwrap_or(f64::NAN).to_le_bytes())?;
        let tag = self.tag.as_bytes();
        w.write_all(&(tag.len() as u32).to_le_bytes())?;
        w.write_all(tag)?;
        let layers = [OBS_DIM as u32, HIDDEN_DIM as u32, HIDDEN_DIM as u32, ACTION_DIM as u32];
        w.write_all(&(layers.len() as u32).to_le_bytes())?;
        for l in layers {
            w.write_all(&l.to_le_bytes())?;
        }
        for p in &self.params {
            w.write_all(&p.to_f64_lossy().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(PARAM_COUNT * 8 + 64);
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::SnapshotFormat("bad magic".into()));
        }
        let version = read_u32(r)?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::SnapshotFormat(format!("unsupported version {version}")));
        }
        let session = read_u32(r)?;
        let step = read_u64(r)?;
        let score_raw = read_f64(r)?;
        let score = if score_raw.is_nan() { None } else { Some(score_raw) };
        let tag_len = read_u32(r)? as usize;
        if tag_len > 1 << 20 {
            return Err(Error::SnapshotFormat("implausible tag length".into()));
        }
        let mut tag_bytes = vec![0u8; tag_len];
        r.read_exact(&mut tag_bytes)?;
        let tag = String::from_utf8(tag_bytes)
            .map_err(|_| Error::SnapshotFormat("tag is not UTF-8".into()))?;
        let layer_count = read_u32(r)? as usize;
        let mut layers = Vec::with_capacity(layer_count);
        for _ in 0..layer_count {
            layers.push(read_u32(r)? as usize);
        }
        if layers != [OBS_DIM, HIDDEN_DIM, HIDDEN_DIM, ACTION_DIM] {
            return Err(Error::SnapshotFormat(format!(
                "layer sizes {layers:?} do not match the {OBS_DIM}->{ACTION_DIM} contract"
            )));
        }
        let mut params = Vec::with_capacity(PARAM_COUNT);
        for _ in 0..PARAM_COUNT {
            params.push(T::of(read_f64(r)?));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::SnapshotFormat("trailing bytes after parameters".into()));
        }
        Ok(Self { params, session, step, score, tag })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let data = std::fs::read(path)?;
        Self::read_from(&mut data.as_slice())
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
