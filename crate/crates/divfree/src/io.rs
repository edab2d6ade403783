//! On-disk trajectory format and run manifests.
//!
//! ## FLO1 layout
//!
//! | field   | bytes | content                                   |
//! |---------|-------|-------------------------------------------|
//! | magic   | 4     | `"FLO1"`                                  |
//! | version | 4     | u32 LE, `1`                               |
//! | ndim    | 4     | u32 LE, `4`                               |
//! | dims    | 16    | four u32 LE: `T, C, H, W` (C = 2 velocity)|
//! | dtype   | 1     | u8, `1` = float64 LE                      |
//! | payload | 8·T·C·H·W | row-major, T-major float64            |
//! | footer  | 8     | u64 LE payload byte length                |
//!
//! Round trips are bit-exact. Each writer also emits a JSON sidecar manifest
//! (`<file>.json`) carrying the full configuration echo, seed, tool version,
//! timestamp, and a SHA-256 checksum of the file; the checksum is verified on
//! read when the sidecar is present.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::VectorField2;
use crate::grid::Grid;

pub const FLO_MAGIC: [u8; 4] = *b"FLO1";
pub const FLO_VERSION: u32 = 1;
pub const FLO_DTYPE_F64: u8 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 16 + 1;

/// In-memory image of a FLO1 file: dims `(T, C, H, W)` plus flat payload.
#[derive(Debug, Clone, PartialEq)]
pub struct FloFile {
    pub dims: [u32; 4],
    pub data: Vec<f64>,
}

impl FloFile {
    pub fn new(dims: [u32; 4], data: Vec<f64>) -> Result<Self> {
        let expect = dims.iter().map(|&d| d as usize).product::<usize>();
        if data.len() != expect {
            return Err(Error::BadHeader(format!(
                "payload holds {} values but dims {:?} imply {}",
                data.len(),
                dims,
                expect
            )));
        }
        Ok(Self { dims, data })
    }

    /// Stack velocity frames into a `(T, 2, H, W)` file.
    pub fn from_frames(frames: &[VectorField2]) -> Self {
        assert!(!frames.is_empty(), "no frames to write");
        let grid = frames[0].grid();
        let (h, w) = grid.shape();
        let mut data = Vec::with_capacity(frames.len() * 2 * h * w);
        for frame in frames {
            assert_eq!(frame.grid(), grid, "frames live on different grids");
            data.extend(frame.u().iter());
            data.extend(frame.v().iter());
        }
        Self {
            dims: [frames.len() as u32, 2, h as u32, w as u32],
            data,
        }
    }

    /// Unpack into velocity frames; requires `C = 2` and a valid grid.
    pub fn to_frames(&self) -> Result<Vec<VectorField2>> {
        let [t, c, h, w] = self.dims;
        if c != 2 {
            return Err(Error::BadHeader(format!(
                "expected 2 channels (velocity), got {c}"
            )));
        }
        let grid = Grid::rectangular(w as usize, h as usize)?;
        let plane = (h * w) as usize;
        let mut frames = Vec::with_capacity(t as usize);
        for ti in 0..t as usize {
            let base = ti * 2 * plane;
            let u = ndarray::Array2::from_shape_vec(
                (h as usize, w as usize),
                self.data[base..base + plane].to_vec(),
            )
            .expect("length checked");
            let v = ndarray::Array2::from_shape_vec(
                (h as usize, w as usize),
                self.data[base + plane..base + 2 * plane].to_vec(),
            )
            .expect("length checked");
            frames.push(VectorField2::from_arrays(grid, u, v)?);
        }
        Ok(frames)
    }

    pub fn frame_count(&self) -> usize {
        self.dims[0] as usize
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload_len = (self.data.len() * 8) as u64;
        let mut out = Vec::with_capacity(HEADER_LEN + self.data.len() * 8 + 8);
        out.extend_from_slice(&FLO_MAGIC);
        out.extend_from_slice(&FLO_VERSION.to_le_bytes());
        out.extend_from_slice(&4u32.to_le_bytes());
        for d in self.dims {
            out.extend_from_slice(&d.to_le_bytes());
        }
        out.push(FLO_DTYPE_F64);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&payload_len.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN + 8 {
            return Err(Error::BadHeader(format!(
                "file is {} bytes, shorter than header + footer",
                bytes.len()
            )));
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != FLO_MAGIC {
            return Err(Error::BadMagic {
                offset: 0,
                expected: FLO_MAGIC,
                got: magic,
            });
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FLO_VERSION {
            return Err(Error::BadHeader(format!("unsupported version {version}")));
        }
        let ndim = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if ndim != 4 {
            return Err(Error::BadHeader(format!("expected ndim 4, got {ndim}")));
        }
        let mut dims = [0u32; 4];
        for (d, chunk) in dims.iter_mut().zip(bytes[12..28].chunks_exact(4)) {
            *d = u32::from_le_bytes(chunk.try_into().unwrap());
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::BadHeader(format!("zero-sized dims {dims:?}")));
        }
        let dtype = bytes[28];
        if dtype != FLO_DTYPE_F64 {
            return Err(Error::BadHeader(format!("unsupported dtype {dtype}")));
        }
        let count = dims.iter().map(|&d| d as u64).product::<u64>();
        let payload_len = count
            .checked_mul(8)
            .ok_or_else(|| Error::BadHeader(format!("dims {dims:?} overflow")))?;
        let expected_total = HEADER_LEN as u64 + payload_len + 8;
        if bytes.len() as u64 != expected_total {
            return Err(Error::BadHeader(format!(
                "dims {dims:?} imply {expected_total} bytes, file has {}",
                bytes.len()
            )));
        }
        let footer = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().unwrap());
        if footer != payload_len {
            return Err(Error::FooterMismatch {
                expected: payload_len,
                got: footer,
            });
        }
        let mut data = Vec::with_capacity(count as usize);
        for chunk in bytes[HEADER_LEN..bytes.len() - 8].chunks_exact(8) {
            data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
        }
        Ok(Self { dims, data })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    /// Read and validate a file; if a sidecar manifest exists, its checksum
    /// is verified too.
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let flo = Self::from_bytes(&bytes)?;
        let sidecar = manifest_path(path);
        if sidecar.exists() {
            let manifest = RunManifest::read(&sidecar)?;
            manifest.verify(&bytes)?;
        }
        Ok(flo)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Sidecar manifest path: `foo.flo` → `foo.flo.json`.
pub fn manifest_path(flo_path: &Path) -> PathBuf {
    let mut os = flo_path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

/// Per-frame divergence bookkeeping recorded by the writers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameDivergence {
    pub frame: usize,
    /// Mean squared spectral divergence.
    pub spectral: f64,
    /// Mean squared central-difference divergence (finite-difference noise).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub central_difference: Option<f64>,
    /// Divergence error before projection (projection runs).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pre_projection: Option<f64>,
}

/// JSON sidecar: enough to regenerate the payload bit-exactly, plus a
/// checksum to detect corruption.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub created_utc: String,
    /// The subcommand and flags that produced the file.
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Full configuration echo.
    pub config: serde_json::Value,
    pub checksum_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_divergence: Option<Vec<FrameDivergence>>,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value, flo_bytes: &[u8]) -> Self {
        Self {
            tool: "divfree".to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_utc: chrono::Utc::now().to_rfc3339(),
            command: command.to_string(),
            seed,
            config,
            checksum_sha256: sha256_hex(flo_bytes),
            frame_divergence: None,
        }
    }

    pub fn with_frame_divergence(mut self, frames: Vec<FrameDivergence>) -> Self {
        self.frame_divergence = Some(frames);
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, serde_json::to_string_pretty(self)?)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn verify(&self, flo_bytes: &[u8]) -> Result<()> {
        let got = sha256_hex(flo_bytes);
        if got != self.checksum_sha256 {
            return Err(Error::ChecksumMismatch {
                expected: self.checksum_sha256.clone(),
                got,
            });
        }
        Ok(())
    }
}
