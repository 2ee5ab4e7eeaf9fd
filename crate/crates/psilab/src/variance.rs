//! Variance of prime counts in short windows, exact by event sweep.
//!
//! The window sum psi(x+h) - psi(x) only changes where floor(x) or
//! floor(x+h) jumps, so each variance integral is a finite weighted sum
//! over the segments between those breakpoints. Segment values come from
//! prefix-sum lookups at the segment midpoint rather than from a running
//! state, which makes chunks of segments independent: the parallel sweep
//! returns the same bits as the sequential one.

use crate::error::Error;
use crate::expsum::{lag_weighted_energy, ExpSumGrid};
use crate::kernels::KernelKind;
use crate::mangoldt::MangoldtTable;
use crate::models::{envelope_e, envelope_e_tilde, Mode, ReportInputs, ResidualReport};
use crate::sum::{Execution, Neumaier, DEFAULT_CHUNK};
use crate::Result;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    EventSweep,
    Laplace,
    WeightedK,
    WeightedU,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceResult {
    pub x: u64,
    pub h: f64,
    pub value: f64,
    pub method: VarianceMethod,
    pub breakpoints_processed: u64,
}

/// Ascending breakpoints of x -> (floor(x), floor(x+h)) over [lo, hi],
/// endpoints included. Integer positions are exact; shifted positions
/// round once as m - h.
fn full_breaks(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(((hi - lo) * 2.2) as usize + 4);
    out.push(lo);
    let mut n = lo.floor() + 1.0;
    let mut m = (lo + h).floor() + 1.0;
    loop {
        let a = n;
        let b = m - h;
        let next = a.min(b);
        if next >= hi {
            break;
        }
        out.push(next);
        if a == next {
            n += 1.0;
        }
        if b == next {
            m += 1.0;
        }
    }
    out.push(hi);
    out
}

/// Compensated sum of f over nonempty segments, chunked deterministically.
fn sweep_sum<F>(breaks: &[f64], f: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    let n_seg = breaks.len() - 1;
    Execution::auto().sum_chunks(n_seg, DEFAULT_CHUNK, |range| {
        let mut acc = Neumaier::new();
        for i in range {
            let (u, v) = (breaks[i], breaks[i + 1]);
            if v > u {
                acc.add(f(u, v));
            }
        }
        acc
    })
}

fn check_window(x: u64, h: f64) -> Result<()> {
    if !(1.0 <= h && h <= x as f64) {
        return Err(Error::parameter(format!(
            "window length must lie in [1, {x}], got {h}"
        )));
    }
    Ok(())
}

fn check_table_reach(table: &MangoldtTable, needed: u64, what: &str) -> Result<()> {
    if table.x() < needed {
        return Err(Error::capacity(format!(
            "{what} reads up to {needed} but the table stops at {}",
            table.x()
        )));
    }
    Ok(())
}

/// J(X, h): integral over [1, X] of (psi(x+h) - psi(x) - h)^2, exact.
pub fn compute_j(table: &MangoldtTable, x: u64, h: f64) -> Result<VarianceResult> {
    check_window(x, h)?;
    check_table_reach(table, x + h.ceil() as u64 + 1, "window sweep")?;
    let xf = x as f64;
    let psi = table.psi_prefix();
    let breaks = full_breaks(1.0, xf, h);
    let value = sweep_sum(&breaks, |u, v| {
        let mid = 0.5 * (u + v);
        let w = psi[(mid + h) as usize] - psi[mid as usize] - h;
        w * w * (v - u)
    });
    Ok(VarianceResult {
        x,
        h,
        value,
        method: VarianceMethod::EventSweep,
        breakpoints_processed: (breaks.len() - 1) as u64,
    })
}

/// Upper truncation point with tail below tail_eps * h * X: the weight
/// there is tail_eps / (h + 40)^2, swallowing the window sum's square.
fn smoothed_cutoff_x(x: u64, h: f64, tail_eps: f64) -> f64 {
    0.5 * x as f64 * ((1.0 / tail_eps).ln() + 2.0 * (h + 40.0).ln())
}

/// Smoothed variance: integral over [0, inf) of the same square against
/// e^{-2x/X}, by the same sweep with exponential segment weights.
pub fn compute_j_tilde(
    table: &MangoldtTable,
    x: u64,
    h: f64,
    tail_eps: f64,
) -> Result<VarianceResult> {
    check_window(x, h)?;
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(Error::parameter(format!(
            "tail threshold must lie in (0, 1), got {tail_eps}"
        )));
    }
    let xf = x as f64;
    let x_max = smoothed_cutoff_x(x, h, tail_eps);
    check_table_reach(table, (x_max + h).ceil() as u64 + 1, "smoothed sweep")?;
    let psi = table.psi_prefix();
    let breaks = full_breaks(0.0, x_max, h);
    let value = sweep_sum(&breaks, |u, v| {
        let mid = 0.5 * (u + v);
        let w = psi[(mid + h) as usize] - psi[mid as usize] - h;
        // exact weight X/2 (e^{-2u/X} - e^{-2v/X}), stable for thin segments
        let weight = -0.5 * xf * (-2.0 * u / xf).exp() * (-2.0 * (v - u) / xf).exp_m1();
        w * w * weight
    });
    Ok(VarianceResult {
        x,
        h,
        value,
        method: VarianceMethod::EventSweep,
        breakpoints_processed: (breaks.len() - 1) as u64,
    })
}

/// 1 - (1 + z) e^{-z} without cancellation for small z.
fn ramp_weight(z: f64) -> f64 {
    if z < 0.1 {
        // sum over j >= 2 of (-1)^j z^j (j-1)/j!
        let mut term = z * z / 2.0;
        let mut sum = term;
        for j in 2..12u32 {
            term *= -z * j as f64 / ((j - 1) as f64 * (j + 1) as f64);
            sum += term;
        }
        sum
    } else {
        1.0 - (1.0 + z) * (-z).exp()
    }
}

/// Truncation point for the cumulative route: deeper than the direct
/// sweep, since the linearly growing cumulative costs two extra decades
/// of damping.
fn laplace_t_max(x: u64, h: f64) -> f64 {
    let xf = x as f64;
    0.5 * xf * (1e12f64.ln() + 2.0 * (h + 40.0).ln() + 2.0 * (xf + 2.0).ln())
}

/// Prefix-table length the cumulative route reads up to.
pub fn laplace_reach(x: u64, h: f64) -> u64 {
    (laplace_t_max(x, h) + h).ceil() as u64 + 1
}

/// Prefix-table length `compute_j_tilde` reads up to.
pub fn smoothed_reach(x: u64, h: f64, tail_eps: f64) -> u64 {
    (smoothed_cutoff_x(x, h, tail_eps) + h).ceil() as u64 + 1
}

/// The smoothed variance reached through the cumulative of the plain one:
/// (2/X) * integral over (0, inf) of J0(t) e^{-2t/X} dt, where J0 is the
/// from-zero cumulative of the window-square. J0 is piecewise linear on
/// the sweep segments, so each segment's transform is closed-form and the
/// whole integral is exact up to the certified truncation.
pub fn j_tilde_via_laplace(table: &MangoldtTable, x: u64, h: f64) -> Result<f64> {
    check_window(x, h)?;
    let xf = x as f64;
    let t_max = laplace_t_max(x, h);
    check_table_reach(table, laplace_reach(x, h), "cumulative sweep")?;
    let psi = table.psi_prefix();
    let breaks = full_breaks(0.0, t_max, h);
    let n_seg = breaks.len() - 1;
    // sequential prefix pass: cumulative J0 at every breakpoint
    let mut consts = Vec::with_capacity(n_seg);
    let mut cum = Vec::with_capacity(n_seg);
    let mut acc = Neumaier::new();
    for i in 0..n_seg {
        let (u, v) = (breaks[i], breaks[i + 1]);
        cum.push(acc.total());
        let mid = 0.5 * (u + v);
        let w = psi[(mid + h) as usize] - psi[mid as usize] - h;
        consts.push(w * w);
        acc.add(w * w * (v - u));
    }
    let s = 2.0 / xf;
    let value = Execution::auto().sum_chunks(n_seg, DEFAULT_CHUNK, |range| {
        let mut part = Neumaier::new();
        for i in range {
            let (u, v) = (breaks[i], breaks[i + 1]);
            if v <= u {
                continue;
            }
            let w = v - u;
            let scale = (-s * u).exp();
            // integral of (cum + c (t-u)) e^{-st} over the segment
            part.add(scale * (cum[i] * -(-s * w).exp_m1() / s + consts[i] * ramp_weight(s * w) / (s * s)));
        }
        part
    });
    Ok(s * value)
}

/// Second moment of |R|^2 against the width-h weight, exactly.
///
/// Kind K sums the finitely many weighted autocorrelations over one
/// period. Kind U integrates the squared windowed coefficient sum over
/// the whole line by event sweep; the two agree identically in exact
/// arithmetic. The smoothed flag only records that the grid carries
/// smoothed coefficients; either way the grid's own sequence is used,
/// truncated where the grid was (the truncation bound is the grid's).
pub fn weighted_second_moment(
    grid: &ExpSumGrid,
    h: f64,
    kind: KernelKind,
    smoothed: bool,
) -> Result<f64> {
    let _ = smoothed;
    if !(h >= 1.0) {
        return Err(Error::parameter(format!(
            "window length must be at least 1, got {h}"
        )));
    }
    match kind {
        KernelKind::K => Ok(lag_weighted_energy(grid.autocorr(), h)),
        KernelKind::U => {
            let coeffs = grid.coeffs();
            let degree = coeffs.len() - 1;
            let mut prefix = Vec::with_capacity(coeffs.len());
            let mut acc = Neumaier::new();
            for &c in coeffs {
                acc.add(c);
                prefix.push(acc.total());
            }
            let look = |y: f64| {
                if y < 1.0 {
                    0.0
                } else {
                    prefix[(y as usize).min(degree)]
                }
            };
            let breaks = full_breaks(1.0 - h, degree as f64, h);
            Ok(sweep_sum(&breaks, |u, v| {
                let mid = 0.5 * (u + v);
                let g = look(mid + h) - look(mid);
                g * g * (v - u)
            }))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma3Mode {
    Plain,
    Smoothed,
}

/// Weighted second moment against its variance counterpart, with the
/// conditional residual envelope and the observed constant.
pub fn lemma3_residual(
    table: &MangoldtTable,
    grid: &ExpSumGrid,
    x: u64,
    h: f64,
    mode: Lemma3Mode,
) -> Result<ResidualReport> {
    if grid.x() != x {
        return Err(Error::parameter(format!(
            "grid was built for X = {}, residual wants X = {x}",
            grid.x()
        )));
    }
    let (moment, counterpart, envelope) = match mode {
        Lemma3Mode::Plain => (
            weighted_second_moment(grid, h, KernelKind::K, false)?,
            compute_j(table, x, h)?.value,
            envelope_e(x, h, Mode::Rh)?,
        ),
        Lemma3Mode::Smoothed => (
            weighted_second_moment(grid, h, KernelKind::K, true)?,
            compute_j_tilde(table, x, h, 1e-12)?.value,
            envelope_e_tilde(x, h, Mode::Rh)?,
        ),
    };
    let mut inputs = ReportInputs::bare(x as f64, "h", h);
    inputs.mode = Some(Mode::Rh);
    Ok(ResidualReport::new(moment, counterpart, envelope, inputs))
}
