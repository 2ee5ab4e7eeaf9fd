//! Pair correlation of zeta-zero ordinates.
//!
//! The form factor is evaluated two independent ways: a blocked double
//! sum over zero pairs, and a damped exponential-sum integral that hits
//! the same value through the Fourier pair 4/(4+u^2) <-> e^{-2|t|}. The
//! second route is also the proof that the quantity is nonnegative.

use std::path::Path;

use serde::Serialize;

use crate::error::Error;
use crate::mangoldt::Fnv;
use crate::models::{AsymptoticHypothesis, ReportInputs, ResidualReport};
use crate::quad::integrate_composite;
use crate::sum::{Execution, Neumaier, DEFAULT_CHUNK};
use crate::Result;

/// Ascending ordinates of zeta zeros up to some height.
///
/// An empty table is valid; it vouches for the zero-free range below the
/// first ordinate near 14.13, so its height is 14.
#[derive(Debug, Clone)]
pub struct ZeroTable {
    gammas: Vec<f64>,
    source_digest: u64,
    max_height: f64,
}

impl ZeroTable {
    /// Builds a table from ordinates already in memory. The digest is
    /// taken over the ordinate bit patterns.
    pub fn from_ordinates(gammas: Vec<f64>) -> Result<Self> {
        for (i, &g) in gammas.iter().enumerate() {
            check_ordinate(g).map_err(|msg| {
                Error::parameter(format!("ordinate {}: {msg}", i + 1))
            })?;
            if i > 0 && gammas[i - 1] >= g {
                return Err(Error::Monotonicity {
                    index: i + 1,
                    message: format!("{g} does not exceed {}", gammas[i - 1]),
                });
            }
        }
        let mut fnv = Fnv::new();
        for &g in &gammas {
            fnv.update(&g.to_bits().to_le_bytes());
        }
        let max_height = gammas.last().copied().unwrap_or(14.0);
        Ok(ZeroTable {
            gammas,
            source_digest: fnv.finish(),
            max_height,
        })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn source_digest(&self) -> u64 {
        self.source_digest
    }

    pub fn max_height(&self) -> f64 {
        self.max_height
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }
}

fn check_ordinate(g: f64) -> std::result::Result<(), String> {
    if !g.is_finite() {
        return Err(format!("{g} is not finite"));
    }
    if g <= 14.0 {
        return Err(format!("{g} lies below the first zero near 14.13"));
    }
    Ok(())
}

/// Reads one decimal ordinate per line; `#` lines and blanks are skipped.
/// The digest covers the raw file bytes.
pub fn load_zeros(path: impl AsRef<Path>) -> Result<ZeroTable> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut fnv = Fnv::new();
    fnv.update(&bytes);
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse {
        line: 0,
        message: format!("file is not UTF-8: {e}"),
    })?;
    let mut gammas = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let g: f64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("{line:?} is not a decimal ordinate"),
        })?;
        check_ordinate(g).map_err(|message| Error::Parse {
            line: i + 1,
            message,
        })?;
        if let Some(&prev) = gammas.last() {
            if prev >= g {
                return Err(Error::Monotonicity {
                    index: gammas.len() + 1,
                    message: format!("{g} does not exceed {prev}"),
                });
            }
        }
        gammas.push(g);
    }
    let max_height = gammas.last().copied().unwrap_or(14.0);
    Ok(ZeroTable {
        gammas,
        source_digest: fnv.finish(),
        max_height,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FMethod {
    Naive,
    Integral,
}

/// Pairs farther apart contribute below 1e-12 each; with the zeros'
/// logarithmic density the neglected total stays far under the 1e-4
/// cross-method budget on any table that fits in memory.
const PAIR_GAP_CUTOFF: f64 = 2e6;

/// Form factor over the zeros up to height t, by either route.
pub fn compute_f(zeros: &ZeroTable, x: f64, t: f64, method: FMethod) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::parameter(format!(
            "frequency argument must be a positive real, got {x}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::parameter(format!(
            "height must be a positive real, got {t}"
        )));
    }
    if t > zeros.max_height {
        return Err(Error::parameter(format!(
            "height {t} exceeds the table's reach {}; truncating silently would drop pairs",
            zeros.max_height
        )));
    }
    let n = zeros.gammas.partition_point(|&g| g <= t);
    let g = &zeros.gammas[..n];
    if g.is_empty() {
        return Ok(0.0);
    }
    let lx = x.ln();
    match method {
        FMethod::Naive => {
            Ok(Execution::auto().sum_chunks(n, DEFAULT_CHUNK, |range| {
                let mut acc = Neumaier::new();
                for i in range {
                    acc.add(1.0);
                    for j in (i + 1)..n {
                        let d = g[j] - g[i];
                        if d > PAIR_GAP_CUTOFF {
                            break;
                        }
                        acc.add(8.0 * (d * lx).cos() / (4.0 + d * d));
                    }
                }
                acc
            }))
        }
        FMethod::Integral => {
            let weighted_power = |t_: f64| {
                let s = lx + t_;
                let mut re = Neumaier::new();
                let mut im = Neumaier::new();
                for &gamma in g {
                    let (sv, cv) = (gamma * s).sin_cos();
                    re.add(cv);
                    im.add(sv);
                }
                let (a, b) = (re.total(), im.total());
                (-2.0 * t_.abs()).exp() * (a * a + b * b)
            };
            // truncation at |t| = 20 leaves e^{-40} N^2 / 4 in the tail
            let breaks: Vec<f64> = (0..=160).map(|k| -20.0 + 0.25 * k as f64).collect();
            let q = integrate_composite(weighted_power, &breaks, 1e-7, 1e-12)?;
            Ok(q.value)
        }
    }
}

/// Predicted form-factor size (T/2pi)(log(T/2pi) - 1).
pub fn f_main_term(t: f64) -> f64 {
    let v = t / (2.0 * std::f64::consts::PI);
    v * (v.ln() - 1.0)
}

/// Form factor against its main term (T/2pi)(log(T/2pi) - 1). With a
/// hypothesis the displayed envelope T^{1-a} (log T)^{-b} is evaluated;
/// without one the envelope is 0 and the ratio is left NaN.
pub fn f_residual(
    zeros: &ZeroTable,
    x: f64,
    t: f64,
    hyp: Option<&AsymptoticHypothesis>,
) -> Result<ResidualReport> {
    let computed = compute_f(zeros, x, t, FMethod::Naive)?;
    let main_term = f_main_term(t);
    let envelope = match hyp {
        Some(h) => t.powf(1.0 - h.a) / t.ln().powf(h.b),
        None => 0.0,
    };
    let mut inputs = ReportInputs::bare(x, "T", t);
    if let Some(h) = hyp {
        inputs.a = Some(h.a);
        inputs.b = Some(h.b);
    }
    Ok(ResidualReport::new(computed, main_term, envelope, inputs))
}
