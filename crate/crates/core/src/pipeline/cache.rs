//! Versioned little-endian binary caches.
//!
//! | file  | layout |
//! |-------|--------|
//! | `KRNC` | magic, version `u32`, `n u32`, `p u32`, `p²` × `i64` row-major, `p` × `u64` centralizer orders |
//! | `KRNT` | magic, version `u32`, `n u32`, count `u64`, count × (`u16 i`, `u16 j`, `u16 k`, `u32 g`) |
//! | `KRNB` | magic, version `u32`, `n u32`, `p u32`, eigenvalue `f64`, `p` × `f64` w, `p` × `f64` b |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::bloading::{b_loadings, BLoadingTable};
use crate::characters::{character_table_with, CharacterTable};
use crate::error::{Error, Result};
use crate::kronecker::{kronecker_tensor, KroneckerTensor};
use crate::partitions::PartitionSet;

pub const CHAR_MAGIC: &[u8; 4] = b"KRNC";
pub const TENSOR_MAGIC: &[u8; 4] = b"KRNT";
pub const BLOAD_MAGIC: &[u8; 4] = b"KRNB";
pub const FORMAT_VERSION: u32 = 1;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "KRONCOEF_CACHE";

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self.buf.get(self.pos..end).ok_or_else(|| Error::Integrity {
            offset: self.pos as u64,
            reason: format!("truncated: need {N} more bytes, file has {}", self.buf.len()),
        })?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length"))
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        let found: [u8; 4] = self.take()?;
        if &found != magic {
            return Err(Error::Integrity {
                offset: 0,
                reason: format!("bad magic {found:?}, expected {magic:?}"),
            });
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Integrity {
                offset: self.pos as u64,
                reason: format!("{} trailing bytes", self.buf.len() - self.pos),
            });
        }
        Ok(())
    }

    fn integrity(&self, reason: impl Into<String>) -> Error {
        Error::Integrity {
            offset: self.pos as u64,
            reason: reason.into(),
        }
    }
}

fn expected_p(n: u32, r: &Reader) -> Result<usize> {
    PartitionSet::new(n as usize)
        .map(|s| s.len())
        .map_err(|_| r.integrity(format!("stored n = {n} is not supported")))
}

pub fn encode_char_table(t: &CharacterTable) -> Vec<u8> {
    let p = t.size();
    let mut out = Vec::with_capacity(16 + p * p * 8 + p * 8);
    out.extend_from_slice(CHAR_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(t.n() as u32).to_le_bytes());
    out.extend_from_slice(&(p as u32).to_le_bytes());
    for &x in t.entries() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for c in t.classes() {
        out.extend_from_slice(&c.centralizer_order.to_le_bytes());
    }
    out
}

pub fn decode_char_table(buf: &[u8]) -> Result<CharacterTable> {
    let mut r = Reader::new(buf);
    r.header(CHAR_MAGIC)?;
    let n = r.u32()?;
    let p = r.u32()? as usize;
    if p != expected_p(n, &r)? {
        return Err(r.integrity(format!("p = {p} does not match p({n})")));
    }
    let chi = (0..p * p).map(|_| r.i64()).collect::<Result<Vec<_>>>()?;
    let z = (0..p).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    CharacterTable::from_raw(n as usize, chi, z).map_err(|e| Error::Integrity {
        offset: 16,
        reason: e.to_string(),
    })
}

pub fn encode_tensor(t: &KroneckerTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + t.canonical_len() * 10);
    out.extend_from_slice(TENSOR_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(t.n() as u32).to_le_bytes());
    out.extend_from_slice(&(t.canonical_len() as u64).to_le_bytes());
    for ((i, j, k), g) in t.iter() {
        out.extend_from_slice(&(i as u16).to_le_bytes());
        out.extend_from_slice(&(j as u16).to_le_bytes());
        out.extend_from_slice(&(k as u16).to_le_bytes());
        out.extend_from_slice(&g.to_le_bytes());
    }
    out
}

pub fn decode_tensor(buf: &[u8]) -> Result<KroneckerTensor> {
    let mut r = Reader::new(buf);
    r.header(TENSOR_MAGIC)?;
    let n = r.u32()?;
    let p = expected_p(n, &r)?;
    let count = r.u64()? as usize;
    if count != crate::kronecker::canonical_count(p) {
        return Err(r.integrity(format!("entry count {count} wrong for p({n}) = {p}")));
    }
    let mut values = Vec::with_capacity(count);
    for i in 0..p {
        for j in i..p {
            for k in j..p {
                let at = r.pos;
                let triple = (r.u16()? as usize, r.u16()? as usize, r.u16()? as usize);
                if triple != (i, j, k) {
                    return Err(Error::Integrity {
                        offset: at as u64,
                        reason: format!("expected triple ({i}, {j}, {k}), found {triple:?}"),
                    });
                }
                values.push(r.u32()?);
            }
        }
    }
    r.finish()?;
    KroneckerTensor::from_values(n as usize, p, values)
}

pub fn encode_bloadings(t: &BLoadingTable) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(BLOAD_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(t.n as u32).to_le_bytes());
    out.extend_from_slice(&(t.size() as u32).to_le_bytes());
    out.extend_from_slice(&t.eigenvalue.to_le_bytes());
    for x in t.w.iter().chain(&t.b) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode_bloadings(buf: &[u8]) -> Result<BLoadingTable> {
    let mut r = Reader::new(buf);
    r.header(BLOAD_MAGIC)?;
    let n = r.u32()?;
    let p = r.u32()? as usize;
    if p != expected_p(n, &r)? {
        return Err(r.integrity(format!("p = {p} does not match p({n})")));
    }
    let eigenvalue = r.f64()?;
    let w = (0..p).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let b = (0..p).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    BLoadingTable::from_parts(n as usize, eigenvalue, w, b)
}

/// A directory of cache files, one per object and `n`.
#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Cache { dir })
    }

    /// Explicit directory first, then `$KRONCOEF_CACHE`; `None` disables caching.
    pub fn resolve(explicit: Option<&Path>) -> Result<Option<Self>> {
        match explicit {
            Some(dir) => Cache::new(dir).map(Some),
            None => match std::env::var_os(CACHE_ENV) {
                Some(dir) if !dir.is_empty() => Cache::new(PathBuf::from(dir)).map(Some),
                _ => Ok(None),
            },
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn char_table_path(&self, n: usize) -> PathBuf {
        self.dir.join(format!("chartable_n{n}.krnc"))
    }

    pub fn tensor_path(&self, n: usize) -> PathBuf {
        self.dir.join(format!("tensor_n{n}.krnt"))
    }

    pub fn bloadings_path(&self, n: usize) -> PathBuf {
        self.dir.join(format!("bload_n{n}.krnb"))
    }

    pub fn store_char_table(&self, t: &CharacterTable) -> Result<()> {
        write_atomic(&self.char_table_path(t.n()), &encode_char_table(t))
    }

    pub fn store_tensor(&self, t: &KroneckerTensor) -> Result<()> {
        write_atomic(&self.tensor_path(t.n()), &encode_tensor(t))
    }

    pub fn store_bloadings(&self, t: &BLoadingTable) -> Result<()> {
        write_atomic(&self.bloadings_path(t.n), &encode_bloadings(t))
    }

    pub fn load_char_table(&self, n: usize) -> Result<Option<CharacterTable>> {
        load(&self.char_table_path(n), decode_char_table)
    }

    pub fn load_tensor(&self, n: usize) -> Result<Option<KroneckerTensor>> {
        load(&self.tensor_path(n), decode_tensor)
    }

    pub fn load_bloadings(&self, n: usize) -> Result<Option<BLoadingTable>> {
        load(&self.bloadings_path(n), decode_bloadings)
    }
}

fn load<T>(path: &Path, decode: impl Fn(&[u8]) -> Result<T>) -> Result<Option<T>> {
    match fs::read(path) {
        Ok(bytes) => decode(&bytes).map(Some),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Loads from the cache when present; otherwise computes and stores. A cache
/// file that fails to decode is reported, never overwritten.
pub fn char_table(n: usize, cache: Option<&Cache>, verify: bool) -> Result<CharacterTable> {
    if let Some(c) = cache {
        if let Some(t) = c.load_char_table(n)? {
            return Ok(t);
        }
    }
    let t = character_table_with(n, verify)?;
    if let Some(c) = cache {
        c.store_char_table(&t)?;
    }
    Ok(t)
}

pub fn tensor(n: usize, cache: Option<&Cache>, chars: &CharacterTable) -> Result<KroneckerTensor> {
    if let Some(c) = cache {
        if let Some(t) = c.load_tensor(n)? {
            return Ok(t);
        }
    }
    let t = kronecker_tensor(n, chars)?;
    if let Some(c) = cache {
        c.store_tensor(&t)?;
    }
    Ok(t)
}

pub fn bloadings(n: usize, cache: Option<&Cache>) -> Result<BLoadingTable> {
    if let Some(c) = cache {
        if let Some(t) = c.load_bloadings(n)? {
            return Ok(t);
        }
    }
    let t = b_loadings(n)?;
    if let Some(c) = cache {
        c.store_bloadings(&t)?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::character_table;

    #[test]
    fn char_table_round_trip_is_bit_exact() {
        let t = character_table(10).unwrap();
        let bytes = encode_char_table(&t);
        assert_eq!(&bytes[..4], b"KRNC");
        assert_eq!(decode_char_table(&bytes).unwrap(), t);
        assert_eq!(encode_char_table(&decode_char_table(&bytes).unwrap()), bytes);
    }

    #[test]
    fn truncation_and_version_are_detected() {
        let t = character_table(5).unwrap();
        let bytes = encode_char_table(&t);
        match decode_char_table(&bytes[..bytes.len() - 3]) {
            Err(Error::Integrity { offset, .. }) => assert!(offset > 16),
            other => panic!("{other:?}"),
        }
        let mut bumped = bytes.clone();
        bumped[4] += 1;
        assert!(matches!(
            decode_char_table(&bumped),
            Err(Error::VersionMismatch { found: 2, expected: 1 })
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode_char_table(&extra), Err(Error::Integrity { .. })));
        let mut wrong = bytes;
        wrong[16] = 7;
        assert!(matches!(decode_char_table(&wrong), Err(Error::Integrity { .. })));
    }

    #[test]
    fn tensor_and_bload_round_trip() {
        let chars = character_table(7).unwrap();
        let t = kronecker_tensor(7, &chars).unwrap();
        let bytes = encode_tensor(&t);
        assert_eq!(bytes.len(), 20 + t.canonical_len() * 10);
        assert_eq!(decode_tensor(&bytes).unwrap(), t);
        let mut swapped = bytes.clone();
        swapped[20] = 1;
        assert!(matches!(decode_tensor(&swapped), Err(Error::Integrity { offset: 20, .. })));

        let b = b_loadings(9).unwrap();
        let back = decode_bloadings(&encode_bloadings(&b)).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn corrupt_files_are_not_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path()).unwrap();
        let t = char_table(6, Some(&cache), true).unwrap();
        assert_eq!(cache.load_char_table(6).unwrap().unwrap(), t);
        let path = cache.char_table_path(6);
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..20]).unwrap();
        assert!(char_table(6, Some(&cache), true).is_err());
        assert_eq!(fs::read(&path).unwrap().len(), 20);
    }
}
