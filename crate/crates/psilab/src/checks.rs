//! Identity suite behind the verify command.
//!
//! Each check exercises an equality the rest of the crate relies on and
//! reports a deterministic one-line summary. Nothing here depends on
//! wall-clock time or thread count, so two runs of the same suite are
//! byte-identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expsum::{build_grid, default_grid_size, r_truncated_exact, ExpSumGrid};
use crate::kernels::{fejer_weight, kernel_moments, sinc_weight, verify_k_transf, KernelKind};
use crate::mangoldt::{build_mangoldt_table, MangoldtTable};
use crate::models::{EULER_GAMMA, LOG_2PI};
use crate::sum::{Execution, Neumaier};
use crate::variance::{
    compute_j_tilde, j_tilde_via_laplace, laplace_reach, weighted_second_moment,
};
use crate::{baseline, Error, Result};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from_worst(name: &'static str, worst: f64, bound: f64) -> Self {
        CheckResult {
            name,
            passed: worst <= bound,
            detail: format!("worst deviation {worst:.3e} against bound {bound:.1e}"),
        }
    }
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

/// Masses of both kernels against the closed forms: plain masses h/2,
/// U log mass -(h/2)(log 2pi + gamma - 1), K log mass within a frozen
/// distance of the same expression.
fn kernel_mass_check() -> Result<CheckResult> {
    let log_mass_scale = LOG_2PI + EULER_GAMMA - 1.0;
    // worst deviation as a fraction of its own tolerance
    let mut score: f64 = 0.0;
    let mut k_dev: f64 = 0.0;
    for h in [1.0, 2.0, 7.0, 10.5, 100.0] {
        let mk = kernel_moments(KernelKind::K, h)?;
        let mu = kernel_moments(KernelKind::U, h)?;
        let half = h / 2.0;
        let log_want = -half * log_mass_scale;
        score = score
            .max(rel(mk.mass, half) / 1e-10)
            .max(rel(mu.mass, half) / 1e-8)
            .max(rel(mu.log_mass, log_want) / 1e-6);
        k_dev = k_dev.max((mk.log_mass - log_want).abs());
    }
    Ok(CheckResult {
        name: "kernel-masses",
        passed: score <= 1.0 && k_dev <= baseline::K_LOG_MASS_DEV_BOUND,
        detail: format!(
            "mass deviations at {score:.3} of tolerance; K log-mass offset {k_dev:.4} (bound {})",
            baseline::K_LOG_MASS_DEV_BOUND
        ),
    })
}

/// Asymptotic trigamma, valid to ~1e-30 relative for z >= 1e4.
fn trigamma_tail(z: f64) -> f64 {
    let i = 1.0 / z;
    let i2 = i * i;
    i * (1.0 + i * (0.5 + i * (1.0 / 6.0 - i2 * (1.0 / 30.0 - i2 / 42.0))))
}

/// Periodization of U against K on seeded random (alpha, h): the lattice
/// sum over |n| <= N plus the two-sided trigamma mean tail. Window
/// lengths keep a margin from integers so the oscillatory remainder
/// stays below 1e-8.
pub fn poisson_check() -> CheckResult {
    const N: usize = 10_000;
    let maxima = Execution::auto().map_chunks(1000, 64, |range| {
        let mut worst: f64 = 0.0;
        for k in range {
            let mut rng = ChaCha8Rng::seed_from_u64(0x9E37_79B9_7F4A_7C15 ^ (k as u64));
            let alpha = rng.gen_range(-0.5..0.5);
            let h = rng.gen_range(1..10) as f64 + rng.gen_range(0.05..0.95);
            let mut acc = Neumaier::new();
            for n in -(N as i64)..=(N as i64) {
                acc.add(sinc_weight(n as f64 + alpha, h));
            }
            let m = N as f64 + 1.0;
            let tail = (trigamma_tail(m + alpha) + trigamma_tail(m - alpha))
                / (2.0 * std::f64::consts::PI * std::f64::consts::PI);
            let diff = (acc.total() + tail - fejer_weight(alpha, h)).abs();
            worst = worst.max(diff);
        }
        worst
    });
    let worst = maxima.into_iter().fold(0.0f64, f64::max);
    CheckResult::from_worst("poisson", worst, 1e-6)
}

/// Full-width truncated moment against the plain coefficient energy.
fn parseval_check(table: &MangoldtTable, grid: &ExpSumGrid) -> Result<CheckResult> {
    let moment = r_truncated_exact(grid, 0.5)?;
    let mut acc = Neumaier::new();
    for &c in &grid.coeffs()[1..] {
        acc.add(c * c);
    }
    let gap = rel(moment, acc.total());
    Ok(CheckResult {
        name: "parseval",
        passed: gap <= 1e-9,
        detail: format!("X = {}; relative gap {gap:.3e} (bound 1e-9)", table.x()),
    })
}

/// Taper transform against the integral of its second derivative
/// weighted by U.
fn k_transf_check() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for eta in [0.05, 0.1, 0.2] {
        for t in [0.0, 0.5, 1.0, 1.0 + eta / 2.0, 1.0 + eta, 2.0] {
            let (lhs, rhs) = verify_k_transf(t, eta)?;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(CheckResult::from_worst("k-transf", worst, 1e-6))
}

/// K-weighted and U-weighted second moments of the same grid.
fn gallagher_check(grid: &ExpSumGrid) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for h in [1.0, 5.0, 20.0] {
        let k = weighted_second_moment(grid, h, KernelKind::K, false)?;
        let u = weighted_second_moment(grid, h, KernelKind::U, false)?;
        worst = worst.max(rel(k, u));
    }
    Ok(CheckResult::from_worst("gallagher", worst, 1e-6))
}

/// Smoothed variance by direct sweep against the cumulative transform.
fn j_jtilde_check(table: &MangoldtTable, x: u64) -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for h in [1.0, 2.0, 5.0] {
        let direct = compute_j_tilde(table, x, h, 1e-12)?.value;
        let transformed = j_tilde_via_laplace(table, x, h)?;
        worst = worst.max(rel(direct, transformed));
    }
    Ok(CheckResult::from_worst("j-jtilde", worst, 1e-4))
}

/// Runs every identity check at scale x. The suite fails closed: any
/// check that cannot even run surfaces as an error instead of a line.
pub fn run_suite(x: u64) -> Result<Vec<CheckResult>> {
    if x < 21 {
        return Err(Error::parameter(format!(
            "the identity suite exercises windows up to 20, so X must be at least 21, got {x}"
        )));
    }
    let table = build_mangoldt_table(x)?;
    let grid = build_grid(&table, default_grid_size(x))?;
    let sweep_table = build_mangoldt_table(laplace_reach(x, 5.0))?;
    Ok(vec![
        kernel_mass_check()?,
        poisson_check(),
        parseval_check(&table, &grid)?,
        k_transf_check()?,
        gallagher_check(&grid)?,
        j_jtilde_check(&sweep_table, x)?,
    ])
}
