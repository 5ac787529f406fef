//! Binary spectrum cache.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes | field                                          |
//! |-------|------------------------------------------------|
//! | 8     | magic `ENTASYMS`                               |
//! | 4     | format version (`1`)                           |
//! | 4     | chain length `L`                               |
//! | 4     | vector kind: `0` real, `1` complex             |
//! | 4     | reserved, zero                                 |
//! | 32    | SHA-256 digest of the model/parameter key      |
//! | 8·D   | energies                                       |
//! | …     | eigenvectors, column-major; complex as (re,im) |

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use faer::Mat;
use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};

use super::{EigenSpectrum, EigenVectors};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"ENTASYMS";
pub const VERSION: u32 = 1;

/// SHA-256 of a canonical `(model, L, parameters)` key string.
pub fn param_digest(key: &str) -> [u8; 32] {
    Sha256::digest(key.as_bytes()).into()
}

fn io_err(e: io::Error) -> Error {
    Error::Cache(e.to_string())
}

pub fn write_spectrum<W: Write>(mut w: W, sites: u32, digest: &[u8; 32], spec: &EigenSpectrum) -> Result<()> {
    let kind: u32 = if spec.is_real() { 0 } else { 1 };
    let mut buf = Vec::with_capacity(56 + 8 * spec.dim());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&sites.to_le_bytes());
    buf.extend_from_slice(&kind.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(digest);
    for e in spec.energies() {
        buf.extend_from_slice(&e.to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)?;
    let d = spec.dim();
    let mut col = Vec::with_capacity(16 * d);
    for k in 0..d {
        col.clear();
        match spec.vectors() {
            EigenVectors::Real(m) => m.col(k).iter().for_each(|x| col.extend_from_slice(&x.to_le_bytes())),
            EigenVectors::Complex(m) => m.col(k).iter().for_each(|z| {
                col.extend_from_slice(&z.re.to_le_bytes());
                col.extend_from_slice(&z.im.to_le_bytes());
            }),
        }
        w.write_all(&col).map_err(io_err)?;
    }
    Ok(())
}

fn read_u32(bytes: &[u8]) -> u32 {
    u32::from_le_bytes(bytes.try_into().unwrap())
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut raw = vec![0u8; 8 * n];
    r.read_exact(&mut raw).map_err(io_err)?;
    Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

/// Reads a cached spectrum, checking the header against `(sites, digest)`.
pub fn read_spectrum<R: Read>(mut r: R, sites: u32, digest: &[u8; 32]) -> Result<EigenSpectrum> {
    let mut head = [0u8; 56];
    r.read_exact(&mut head).map_err(io_err)?;
    if &head[0..8] != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = read_u32(&head[8..12]);
    if version != VERSION {
        return Err(Error::Cache(format!("unsupported cache version {version}")));
    }
    let l = read_u32(&head[12..16]);
    if l != sites {
        return Err(Error::Cache(format!("cache holds L = {l}, expected {sites}")));
    }
    if &head[24..56] != digest {
        return Err(Error::Cache("parameter digest mismatch".into()));
    }
    let d = 1usize << l;
    let energies = read_f64s(&mut r, d)?;
    let vectors = match read_u32(&head[16..20]) {
        0 => {
            let raw = read_f64s(&mut r, d * d)?;
            EigenVectors::Real(Mat::from_fn(d, d, |i, j| raw[j * d + i]))
        }
        1 => {
            let raw = read_f64s(&mut r, 2 * d * d)?;
            EigenVectors::Complex(Mat::from_fn(d, d, |i, j| {
                let k = 2 * (j * d + i);
                C64::new(raw[k], raw[k + 1])
            }))
        }
        other => return Err(Error::Cache(format!("unknown vector kind {other}"))),
    };
    EigenSpectrum::from_parts(energies, vectors)
}

pub fn cache_path(dir: &Path, digest: &[u8; 32]) -> PathBuf {
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("spectrum-{hex}.bin"))
}

/// Loads a cached spectrum if present and valid, otherwise computes and stores it.
pub fn load_or_compute<F>(dir: &Path, sites: u32, key: &str, compute: F) -> Result<EigenSpectrum>
where
    F: FnOnce() -> Result<EigenSpectrum>,
{
    let digest = param_digest(key);
    let path = cache_path(dir, &digest);
    if let Ok(file) = fs::File::open(&path) {
        match read_spectrum(io::BufReader::new(file), sites, &digest) {
            Ok(spec) => return Ok(spec),
            Err(e) => log::warn!("ignoring unusable cache file {}: {e}", path.display()),
        }
    }
    let spec = compute()?;
    fs::create_dir_all(dir).map_err(io_err)?;
    let tmp = path.with_extension("tmp");
    {
        let file = fs::File::create(&tmp).map_err(io_err)?;
        let mut w = io::BufWriter::new(file);
        write_spectrum(&mut w, sites, &digest, &spec)?;
        w.flush().map_err(io_err)?;
    }
    fs::rename(&tmp, &path).map_err(io_err)?;
    Ok(spec)
}
