//! On-disk cache of measured DN traces.
//!
//! Each file is a single ASCII header line followed by little-endian
//! `f64` data:
//!
//! ```text
//! WTRACE <version> f64 <ndim> <d0>x<d1>.. <dt>,<dx1>,<dx2> <seed> <sha256 of data>
//! ```
//!
//! Files live under a directory named after a fingerprint of every
//! parameter that affects the measurement, and are keyed by angle, sweep
//! index and noise seed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::SpaceTimeGrid;
use crate::solver::DNTrace;

pub const MAGIC: &str = "WTRACE";
pub const VERSION: u32 = 1;

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArrayHeader {
    pub version: u32,
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
    pub seed: u64,
    pub checksum: String,
}

impl ArrayHeader {
    fn render(&self) -> String {
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        let spacing: Vec<String> = self.spacing.iter().map(|s| format!("{s:e}")).collect();
        format!(
            "{MAGIC} {} f64 {} {} {} {} {}\n",
            self.version,
            self.dims.len(),
            dims.join("x"),
            spacing.join(","),
            self.seed,
            self.checksum
        )
    }

    fn parse(line: &str) -> Result<Self> {
        let bad = |what: &str| Error::Cache(format!("malformed header ({what}): {line:?}"));
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(bad("field count"));
        }
        if fields[0] != MAGIC {
            return Err(bad("magic"));
        }
        if fields[2] != "f64" {
            return Err(bad("dtype"));
        }
        let version = fields[1].parse().map_err(|_| bad("version"))?;
        let ndim: usize = fields[3].parse().map_err(|_| bad("ndim"))?;
        let dims = fields[4]
            .split('x')
            .map(|d| d.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("dims"))?;
        if dims.len() != ndim {
            return Err(bad("ndim"));
        }
        let spacing = fields[5]
            .split(',')
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("spacing"))?;
        let seed = fields[6].parse().map_err(|_| bad("seed"))?;
        Ok(Self { version, dims, spacing, seed, checksum: fields[7].to_string() })
    }
}

pub fn write_array(path: &Path, dims: &[usize], spacing: &[f64], seed: u64, data: &[f64]) -> Result<()> {
    if dims.iter().product::<usize>() != data.len() {
        return Err(Error::ShapeMismatch(format!("dims {dims:?} do not match {} values", data.len())));
    }
    let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
    let header = ArrayHeader {
        version: VERSION,
        dims: dims.to_vec(),
        spacing: spacing.to_vec(),
        seed,
        checksum: sha256_hex(&bytes),
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    // write then rename so an interrupted run never leaves a torn file
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp)?;
    f.write_all(header.render().as_bytes())?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_array(path: &Path) -> Result<(ArrayHeader, Vec<f64>)> {
    let raw = fs::read(path)?;
    let nl = raw
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Cache(format!("{}: missing header", path.display())))?;
    let line = std::str::from_utf8(&raw[..nl]).map_err(|_| Error::Cache("header is not ASCII".into()))?;
    let header = ArrayHeader::parse(line)?;
    if header.version != VERSION {
        return Err(Error::Cache(format!("unsupported version {}", header.version)));
    }
    let body = &raw[nl + 1..];
    let n: usize = header.dims.iter().product();
    if body.len() != 8 * n {
        return Err(Error::Cache(format!("{}: expected {} bytes of data, found {}", path.display(), 8 * n, body.len())));
    }
    if sha256_hex(body) != header.checksum {
        return Err(Error::Cache(format!("{}: checksum mismatch", path.display())));
    }
    let data = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((header, data))
}

/// Cache directory for one measurement configuration.
#[derive(Clone, Debug)]
pub struct TraceStore {
    dir: PathBuf,
    grid: SpaceTimeGrid,
}

impl TraceStore {
    /// `fingerprint` must capture every parameter the traces depend on
    /// other than angle, sweep index and seed.
    pub fn open(root: &Path, fingerprint: &str, grid: SpaceTimeGrid) -> Result<Self> {
        let dir = root.join(fingerprint);
        fs::create_dir_all(&dir)?;
        Ok(Self { dir, grid })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, angle_deg: f64, index: usize, seed: u64) -> PathBuf {
        self.dir.join(format!("theta_{:016x}_j{index:03}_s{seed:016x}.bin", angle_deg.to_bits()))
    }

    pub fn load(&self, angle_deg: f64, index: usize, seed: u64) -> Result<Option<DNTrace>> {
        let path = self.path(angle_deg, index, seed);
        if !path.exists() {
            return Ok(None);
        }
        let (header, data) = read_array(&path)?;
        let sp = self.grid.space;
        let trace = DNTrace::from_values(sp.n1, sp.n2, self.grid.nt, data)?;
        if header.dims != [trace.nt(), trace.boundary_len()] || header.seed != seed {
            return Err(Error::Cache(format!("{}: header does not match the key", path.display())));
        }
        Ok(Some(trace))
    }

    pub fn store(&self, angle_deg: f64, index: usize, seed: u64, trace: &DNTrace) -> Result<()> {
        let g = &self.grid;
        write_array(
            &self.path(angle_deg, index, seed),
            &[trace.nt(), trace.boundary_len()],
            &[g.dt(), g.space.dx1(), g.space.dx2()],
            seed,
            trace.values(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let grid = SpaceTimeGrid::centered_square(0.5, 6, 3.0, 40).unwrap();
        let store = TraceStore::open(dir.path(), "abc", grid).unwrap();
        let nb = 20;
        let values: Vec<f64> = (0..nb * 40).map(|k| (k as f64).sin()).collect();
        let t = DNTrace::from_values(6, 6, 40, values).unwrap();
        assert!(store.load(12.5, 3, 9).unwrap().is_none());
        store.store(12.5, 3, 9, &t).unwrap();
        let back = store.load(12.5, 3, 9).unwrap().unwrap();
        assert_eq!(back.values(), t.values());

        let path = store.path(12.5, 3, 9);
        let mut raw = fs::read(&path).unwrap();
        let header_line = std::str::from_utf8(&raw[..raw.iter().position(|&b| b == b'\n').unwrap()]).unwrap();
        assert_eq!(header_line.split_whitespace().count(), 8);
        let last = raw.len() - 1;
        raw[last] ^= 1;
        fs::write(&path, raw).unwrap();
        assert!(matches!(store.load(12.5, 3, 9), Err(Error::Cache(_))));
    }
}
