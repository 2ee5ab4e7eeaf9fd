//! Von Mangoldt coefficients, Chebyshev prefix sums, and their binary cache.
//!
//! The table is built by a segmented smallest-prime-factor sieve: each
//! 2^20-entry segment gets a u32 scratch array holding the least prime
//! factor (0 for primes and for 0/1), written by ascending base primes
//! starting from p^2 so primes stay unmarked. A number with least factor p
//! has a nonzero coefficient exactly when dividing out p leaves 1, in which
//! case the value is log p. Segments are independent and may fill in
//! parallel; the prefix pass is a single sequential compensated sweep, so
//! rebuilds are bit-identical regardless of thread count.

use crate::error::Error;
use crate::sum::Neumaier;
use crate::Result;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

const SEGMENT: usize = 1 << 20;

/// Memory ceiling for the two f64 arrays; requests beyond it fail with a
/// capacity error instead of thrashing the machine.
const BUDGET_BYTES: u64 = 7 << 29; // 3.5 GiB

/// Prime-power log table up to a fixed bound.
///
/// `lambda[n]` is log p when n = p^k and 0 otherwise; `psi_prefix[n]` is the
/// running compensated sum of `lambda` through n. Index 0 is padding so that
/// indices coincide with integers.
pub struct MangoldtTable {
    x: u64,
    lambda: Vec<f64>,
    psi_prefix: Vec<f64>,
}

impl std::fmt::Debug for MangoldtTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MangoldtTable")
            .field("x", &self.x)
            .field("psi_x", &self.psi_prefix.last())
            .finish_non_exhaustive()
    }
}

/// Builds the table for 1 <= X <= 10^9 (memory budget permitting).
pub fn build_mangoldt_table(x: u64) -> Result<MangoldtTable> {
    if x == 0 {
        return Err(Error::capacity("table bound must be at least 1"));
    }
    if x > 1_000_000_000 {
        return Err(Error::parameter(format!("table bound {x} exceeds 10^9")));
    }
    let bytes = 16 * (x + 1);
    if bytes > BUDGET_BYTES {
        return Err(Error::capacity(format!(
            "table of bound {x} needs {bytes} bytes, budget is {BUDGET_BYTES}"
        )));
    }
    let n = x as usize;
    let mut lambda = vec![0.0f64; n + 1];
    if n >= 2 {
        let bases = base_primes(isqrt(n));
        fill_lambda(&mut lambda, &bases);
    }
    Ok(MangoldtTable::from_lambda(x, lambda))
}

fn fill_lambda(lambda: &mut [f64], bases: &[u32]) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        lambda
            .par_chunks_mut(SEGMENT)
            .enumerate()
            .for_each(|(s, chunk)| fill_segment(s * SEGMENT, chunk, bases));
    }
    #[cfg(not(feature = "parallel"))]
    for (s, chunk) in lambda.chunks_mut(SEGMENT).enumerate() {
        fill_segment(s * SEGMENT, chunk, bases);
    }
}

/// Fills `chunk` (absolute indices lo..lo+len) with von Mangoldt values.
// spf = 0 is the "untouched" sentinel, not a division guard
#[allow(clippy::manual_checked_ops)]
fn fill_segment(lo: usize, chunk: &mut [f64], bases: &[u32]) {
    let hi = lo + chunk.len();
    let mut spf = vec![0u32; chunk.len()];
    for &p in bases {
        let p = p as usize;
        let p2 = p * p;
        if p2 >= hi {
            break;
        }
        let start = p2.max(lo.div_ceil(p) * p);
        let mut m = start;
        while m < hi {
            let slot = &mut spf[m - lo];
            if *slot == 0 {
                *slot = p as u32;
            }
            m += p;
        }
    }
    for i in lo.max(2)..hi {
        let p = spf[i - lo] as usize;
        if p == 0 {
            // untouched by every base prime below sqrt, hence prime
            chunk[i - lo] = (i as f64).ln();
        } else {
            let mut m = i / p;
            while m.is_multiple_of(p) {
                m /= p;
            }
            if m == 1 {
                chunk[i - lo] = (p as f64).ln();
            }
        }
    }
}

fn base_primes(limit: usize) -> Vec<u32> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for p in 2..=limit {
        if !composite[p] {
            out.push(p as u32);
            let mut m = p * p;
            while m <= limit {
                composite[m] = true;
                m += p;
            }
        }
    }
    out
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    while r * r > n {
        r -= 1;
    }
    r
}

impl MangoldtTable {
    fn from_lambda(x: u64, lambda: Vec<f64>) -> Self {
        let mut psi_prefix = Vec::with_capacity(lambda.len());
        let mut acc = Neumaier::new();
        for &v in &lambda {
            acc.add(v);
            psi_prefix.push(acc.total());
        }
        MangoldtTable {
            x,
            lambda,
            psi_prefix,
        }
    }

    /// Wraps explicit coefficients (index = integer, entry 0 unused and 0);
    /// mainly for degenerate tables in tests and cross-checks.
    pub fn from_lambda_values(lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() < 2 {
            return Err(Error::capacity("need entries for at least 0 and 1"));
        }
        if lambda[0] != 0.0 || lambda[1] != 0.0 {
            return Err(Error::parameter("entries 0 and 1 must be zero"));
        }
        let x = (lambda.len() - 1) as u64;
        Ok(Self::from_lambda(x, lambda))
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    /// Coefficients indexed by integer, length x + 1.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Running sums, same indexing.
    pub fn psi_prefix(&self) -> &[f64] {
        &self.psi_prefix
    }

    /// psi(y): sum of coefficients up to floor(y). Left-continuous step.
    pub fn psi(&self, y: f64) -> Result<f64> {
        if !y.is_finite() || y < 0.0 {
            return Err(Error::parameter(format!("psi wants finite y >= 0, got {y}")));
        }
        if y > self.x as f64 {
            return Err(Error::parameter(format!(
                "psi({y}) beyond table bound {}",
                self.x
            )));
        }
        Ok(self.psi_prefix[y as usize])
    }

    /// Largest value of |psi(y) - y| / (sqrt(y) log^2 y) over integer
    /// y in [100, y_max]. The square-root cancellation scale.
    pub fn psi_rh_ratio(&self, y_max: u64) -> Result<f64> {
        if y_max < 100 || y_max > self.x {
            return Err(Error::parameter(format!(
                "psi_rh_ratio wants 100 <= Y <= {}, got {y_max}",
                self.x
            )));
        }
        let mut best = 0.0f64;
        for y in 100..=y_max as usize {
            let yf = y as f64;
            let l = yf.ln();
            let r = (self.psi_prefix[y] - yf).abs() / (yf.sqrt() * l * l);
            best = best.max(r);
        }
        Ok(best)
    }

    /// Writes the binary cache into `dir`, returning the file path.
    pub fn save_cache(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("mangoldt_{}.bin", self.x));
        let file = File::create(&path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let mut w = CheckedWriter {
            inner: BufWriter::new(file),
            fnv: Fnv::new(),
        };
        let ctx = |e| Error::Io {
            path: path.clone(),
            source: e,
        };
        w.put(MAGIC).map_err(ctx)?;
        w.put(&[1u8]).map_err(ctx)?; // little-endian payload
        w.put(&self.x.to_le_bytes()).map_err(ctx)?;
        for &v in &self.lambda {
            w.put(&v.to_le_bytes()).map_err(ctx)?;
        }
        for &v in &self.psi_prefix {
            w.put(&v.to_le_bytes()).map_err(ctx)?;
        }
        let digest = w.fnv.finish();
        w.inner.write_all(&digest.to_le_bytes()).map_err(ctx)?;
        w.inner.flush().map_err(ctx)?;
        Ok(path)
    }

    /// Reads a cache previously written by `save_cache` for the same bound.
    pub fn load_cache(x: u64, dir: &Path) -> Result<Self> {
        let path = dir.join(format!("mangoldt_{x}.bin"));
        let file = File::open(&path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let mut r = CheckedReader {
            inner: BufReader::new(file),
            fnv: Fnv::new(),
        };
        let ctx = |e| Error::Io {
            path: path.clone(),
            source: e,
        };
        let mut head = [0u8; 8];
        r.get(&mut head).map_err(ctx)?;
        if head != *MAGIC {
            return Err(Error::Format("cache magic mismatch".into()));
        }
        let mut endian = [0u8; 1];
        r.get(&mut endian).map_err(ctx)?;
        if endian[0] != 1 {
            return Err(Error::Format(format!(
                "unsupported cache byte order tag {}",
                endian[0]
            )));
        }
        let mut xb = [0u8; 8];
        r.get(&mut xb).map_err(ctx)?;
        let stored = u64::from_le_bytes(xb);
        if stored != x {
            return Err(Error::Format(format!(
                "cache holds bound {stored}, expected {x}"
            )));
        }
        let n = x as usize + 1;
        let read_array = |r: &mut CheckedReader<BufReader<File>>| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(n);
            let mut buf = [0u8; 8];
            for _ in 0..n {
                r.get(&mut buf).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                out.push(f64::from_le_bytes(buf));
            }
            Ok(out)
        };
        let lambda = read_array(&mut r)?;
        let psi_prefix = read_array(&mut r)?;
        let digest = r.fnv.finish();
        let mut tail = [0u8; 8];
        r.get(&mut tail).map_err(ctx)?;
        if u64::from_le_bytes(tail) != digest {
            return Err(Error::Format("cache checksum mismatch".into()));
        }
        Ok(MangoldtTable {
            x,
            lambda,
            psi_prefix,
        })
    }
}

const MAGIC: &[u8; 8] = b"PSILAB01";

/// FNV-1a, 64-bit.
pub(crate) struct Fnv(u64);

impl Fnv {
    pub(crate) fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
    pub(crate) fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    pub(crate) fn finish(&self) -> u64 {
        self.0
    }
}

struct CheckedWriter<W: Write> {
    inner: W,
    fnv: Fnv,
}

impl<W: Write> CheckedWriter<W> {
    fn put(&mut self, bytes: &[u8]) -> std::io::Result<()> {
        self.fnv.update(bytes);
        self.inner.write_all(bytes)
    }
}

struct CheckedReader<R: Read> {
    inner: R,
    fnv: Fnv,
}

impl<R: Read> CheckedReader<R> {
    fn get(&mut self, buf: &mut [u8]) -> std::io::Result<()> {
        self.inner.read_exact(buf)?;
        self.fnv.update(buf);
        Ok(())
    }
}
