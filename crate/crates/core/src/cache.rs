//! Append-only zero cache: one JSON object per line.
//!
//! Zero lines carry `k, beta, gamma, multiplicity, residual, ctx_digest`.
//! After the zeros of a scan a coverage line `k, t_lo, t_hi, ctx_digest,
//! count` is appended; a range is served from the cache only when a
//! coverage line with the current digest spans it, so a scan interrupted
//! mid-write is never mistaken for a complete one.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::context::EvalContext;
use crate::error::Result;
use crate::zeroscan::{scan_strip, ScanOptions, ZeroRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRecord {
    pub k: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub ctx_digest: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum CacheLine {
    Zero(ZeroRecord),
    Coverage(CoverageRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptLine {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

/// Records for one `k` and digest, plus what was skipped while reading.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CacheContents {
    pub zeros: Vec<ZeroRecord>,
    pub coverage: Vec<CoverageRecord>,
    /// Lines for this `k` written under a different context digest.
    pub stale: usize,
    pub corrupt: Vec<CorruptLine>,
}

#[derive(Debug, Clone)]
pub struct ZeroCache {
    path: PathBuf,
}

/// Environment variable naming the default cache file.
pub const CACHE_ENV: &str = "ZKZ_CACHE";

impl ZeroCache {
    pub fn new(path: impl AsRef<Path>) -> ZeroCache {
        ZeroCache { path: path.as_ref().to_path_buf() }
    }

    /// The cache named by `ZKZ_CACHE`, if set.
    pub fn from_env() -> Option<ZeroCache> {
        std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(ZeroCache::new)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn read(&self, k: usize, ctx_digest: &str) -> Result<CacheContents> {
        let mut out = CacheContents::default();
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(e.into()),
        };
        file.lock_shared()?;
        for (i, line) in BufReader::new(&file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<CacheLine>(&line) {
                Ok(CacheLine::Zero(z)) if z.k == k => {
                    if z.ctx_digest == ctx_digest {
                        out.zeros.push(z);
                    } else {
                        out.stale += 1;
                    }
                }
                Ok(CacheLine::Coverage(c)) if c.k == k => {
                    if c.ctx_digest == ctx_digest {
                        out.coverage.push(c);
                    } else {
                        out.stale += 1;
                    }
                }
                Ok(_) => {}
                Err(e) => {
                    log::warn!("{}:{}: corrupt cache line: {e}", self.path.display(), i + 1);
                    out.corrupt.push(CorruptLine { line: i + 1, message: e.to_string() });
                }
            }
        }
        if out.stale > 0 {
            log::warn!("{}: {} lines for k = {k} have a stale context digest", self.path.display(), out.stale);
        }
        Ok(out)
    }

    /// Zeros with `t_lo < γ ≤ t_hi` if one recorded scan covers the range.
    pub fn lookup(&self, k: usize, t_lo: f64, t_hi: f64, ctx_digest: &str) -> Result<Option<Vec<ZeroRecord>>> {
        let contents = self.read(k, ctx_digest)?;
        if !contents.coverage.iter().any(|c| c.t_lo <= t_lo && c.t_hi >= t_hi) {
            return Ok(None);
        }
        let mut zeros: Vec<ZeroRecord> =
            contents.zeros.into_iter().filter(|z| z.gamma > t_lo && z.gamma <= t_hi).collect();
        zeros.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.beta.total_cmp(&b.beta)));
        // overlapping scans store the same zero more than once
        zeros.dedup_by(|a, b| (a.gamma - b.gamma).abs() < 1e-9 && (a.beta - b.beta).abs() < 1e-9);
        Ok(Some(zeros))
    }

    /// Appends a completed scan of `(t_lo, t_hi]`.
    pub fn store(&self, k: usize, t_lo: f64, t_hi: f64, ctx_digest: &str, zeros: &[ZeroRecord]) -> Result<()> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        file.lock()?;
        let mut buf = Vec::new();
        for z in zeros {
            serde_json::to_writer(&mut buf, &CacheLine::Zero(z.clone())).expect("zero records serialize");
            buf.push(b'\n');
        }
        let count = zeros.iter().map(|z| z.multiplicity as usize).sum();
        let cov = CoverageRecord { k, t_lo, t_hi, ctx_digest: ctx_digest.to_string(), count };
        serde_json::to_writer(&mut buf, &CacheLine::Coverage(cov)).expect("coverage records serialize");
        buf.push(b'\n');
        (&file).write_all(&buf)?;
        (&file).flush()?;
        Ok(())
    }
}

/// Zeros with `t_lo < γ ≤ t_hi`, from `cache` when a matching scan is
/// recorded there and otherwise scanned and appended. The flag reports a
/// cache hit.
pub fn locate_cached(
    k: usize,
    t_lo: f64,
    t_hi: f64,
    ctx: &EvalContext,
    opts: &ScanOptions,
    cache: Option<&ZeroCache>,
) -> Result<(Vec<ZeroRecord>, bool)> {
    let digest = ctx.digest();
    if let Some(c) = cache {
        if let Some(z) = c.lookup(k, t_lo, t_hi, &digest)? {
            return Ok((z, true));
        }
    }
    let scan = scan_strip(k, t_lo, t_hi, ctx, opts)?;
    if let Some(c) = cache {
        c.store(k, t_lo, t_hi, &digest, &scan.zeros)?;
    }
    Ok((scan.zeros, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero(k: usize, gamma: f64, digest: &str) -> ZeroRecord {
        ZeroRecord { k, beta: 1.5, gamma, multiplicity: 1, residual: 1e-14, ctx_digest: digest.into() }
    }

    #[test]
    fn round_trip_and_coverage() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ZeroCache::new(dir.path().join("sub/zeros.jsonl"));
        assert_eq!(cache.lookup(1, 0.0, 10.0, "d").unwrap(), None);
        cache.store(1, 0.001, 50.0, "d", &[zero(1, 23.3, "d"), zero(1, 31.7, "d")]).unwrap();
        assert_eq!(cache.lookup(1, 0.001, 30.0, "d").unwrap().unwrap().len(), 1);
        assert_eq!(cache.lookup(1, 0.001, 60.0, "d").unwrap(), None);
        assert_eq!(cache.lookup(2, 0.001, 30.0, "d").unwrap(), None);
        assert_eq!(cache.lookup(1, 0.001, 30.0, "other").unwrap(), None);
        cache.store(1, 20.0, 40.0, "d", &[zero(1, 23.3, "d"), zero(1, 31.7, "d")]).unwrap();
        assert_eq!(cache.lookup(1, 10.0, 40.0, "d").unwrap().unwrap().len(), 2);
        assert_eq!(cache.read(1, "other").unwrap().stale, 6);
    }

    #[test]
    fn cached_scan_matches_cold_scan() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ZeroCache::new(dir.path().join("zeros.jsonl"));
        let ctx = EvalContext::default();
        let opts = ScanOptions::default();
        let (cold, hit) = locate_cached(1, 1e-3, 40.0, &ctx, &opts, Some(&cache)).unwrap();
        assert!(!hit && cold.len() == 3);
        let (warm, hit) = locate_cached(1, 1e-3, 40.0, &ctx, &opts, Some(&cache)).unwrap();
        assert!(hit);
        assert_eq!(cold, warm);
        let other = ctx.with_abs_tol(1e-11);
        let (_, hit) = locate_cached(1, 1e-3, 40.0, &other, &opts, Some(&cache)).unwrap();
        assert!(!hit);
    }

    #[test]
    fn corrupt_lines_are_reported_with_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zeros.jsonl");
        let cache = ZeroCache::new(&path);
        cache.store(1, 0.001, 50.0, "d", &[zero(1, 23.3, "d")]).unwrap();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        writeln!(f, "{{\"k\": 1, \"beta\": ").unwrap();
        let c = cache.read(1, "d").unwrap();
        assert_eq!(c.corrupt.len(), 1);
        assert_eq!(c.corrupt[0].line, 3);
        assert_eq!(c.zeros.len(), 1);
    }
}
