//! Exponential sums over prime powers and the difference sum R.
//!
//! The central object is the coefficient sequence c_n = Lambda(n) - 1 for
//! n up to X. Its exponential sum R(alpha) = sum c_n e(n alpha) is a
//! trigonometric polynomial of degree X, so |R|^2 has degree < 2X + 2 and
//! any integral of |R|^2 against an explicit weight reduces to the
//! autocorrelations A_j = sum_n c_n c_{n+j}. Both R on a uniform grid and
//! the A_j come from two FFT passes; everything downstream is closed-form
//! summation in a fixed order, so results do not depend on thread count.

use crate::error::Error;
use crate::mangoldt::{build_mangoldt_table, MangoldtTable};
use crate::models::c_prime_from_c;
use crate::quad::integrate_composite;
use crate::sum::Neumaier;
use crate::Result;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Distance from y to the nearest integer, signed.
fn reduced(y: f64) -> f64 {
    y - y.round()
}

/// T(alpha): geometric sum of e(n alpha) for 1 <= n <= X, in closed form.
/// Integer alpha gives the degenerate value X.
pub fn eval_t(alpha: f64, x: u64) -> Complex64 {
    assert!(x >= 1);
    let xf = x as f64;
    if reduced(alpha) == 0.0 {
        return Complex64::new(xf, 0.0);
    }
    let ratio = (std::f64::consts::PI * xf * alpha).sin() / (std::f64::consts::PI * alpha).sin();
    Complex64::from_polar(ratio, std::f64::consts::PI * (xf + 1.0) * alpha)
}

/// S(alpha): sum of Lambda(n) e(n alpha) over the table, compensated,
/// fixed ascending order. S(0) reproduces the prefix sum at X exactly.
pub fn eval_s(alpha: f64, table: &MangoldtTable) -> Complex64 {
    let mut re = Neumaier::new();
    let mut im = Neumaier::new();
    for (n, &l) in table.lambda().iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let theta = 2.0 * std::f64::consts::PI * reduced(n as f64 * alpha);
        re.add(l * theta.cos());
        im.add(l * theta.sin());
    }
    Complex64::new(re.total(), im.total())
}

/// Uniform samples of R(alpha) = S(alpha) - T(alpha) and the
/// autocorrelations of its coefficients.
pub struct ExpSumGrid {
    x: u64,
    m: usize,
    coeffs: Vec<f64>,
    r_values: Vec<Complex64>,
    autocorr: Vec<f64>,
}

impl std::fmt::Debug for ExpSumGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExpSumGrid")
            .field("x", &self.x)
            .field("m", &self.m)
            .finish_non_exhaustive()
    }
}

/// Smallest power of two admissible as a grid size for bound x.
pub fn default_grid_size(x: u64) -> usize {
    ((2 * x + 2) as usize).next_power_of_two()
}

/// Samples R on the grid alpha_k = k/M and extracts autocorrelations.
/// M must be at least 2X + 2 so the power spectrum does not alias.
pub fn build_grid(table: &MangoldtTable, m: usize) -> Result<ExpSumGrid> {
    let coeffs: Vec<f64> = table
        .lambda()
        .iter()
        .enumerate()
        .map(|(n, &l)| if n == 0 { 0.0 } else { l - 1.0 })
        .collect();
    grid_from_coeffs(table.x(), coeffs, m)
}

fn grid_from_coeffs(x: u64, coeffs: Vec<f64>, m: usize) -> Result<ExpSumGrid> {
    let degree = coeffs.len() - 1;
    if m < 2 * degree + 2 {
        return Err(Error::parameter(format!(
            "grid size {m} aliases autocorrelations, need at least {}",
            2 * degree + 2
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (n, &c) in coeffs.iter().enumerate().skip(1) {
        buf[n].re = c;
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    // real coefficients force conjugate symmetry; stamp it so the upper
    // half is bit-identical to the lower regardless of FFT internals
    buf[0].im = 0.0;
    if m.is_multiple_of(2) {
        buf[m / 2].im = 0.0;
    }
    for k in 1..m.div_ceil(2) {
        buf[m - k] = buf[k].conj();
    }
    let mut power: Vec<Complex64> = buf
        .iter()
        .map(|z| Complex64::new(z.norm_sqr(), 0.0))
        .collect();
    planner.plan_fft_forward(m).process(&mut power);
    let scale = 1.0 / m as f64;
    let autocorr = power[..=degree].iter().map(|z| z.re * scale).collect();
    Ok(ExpSumGrid {
        x,
        m,
        coeffs,
        r_values: buf,
        autocorr,
    })
}

impl ExpSumGrid {
    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    /// Coefficients indexed by n; entry 0 is zero padding.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// R(k/M) for k = 0..M.
    pub fn r_values(&self) -> &[Complex64] {
        &self.r_values
    }

    /// A_j for j = 0..=degree; A_0 is the coefficient energy.
    pub fn autocorr(&self) -> &[f64] {
        &self.autocorr
    }

    /// R(alpha) by direct coefficient summation. Linear in the degree;
    /// the independent slow path behind the quadrature oracle.
    pub fn r_direct(&self, alpha: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (n, &c) in self.coeffs.iter().enumerate().skip(1) {
            if c == 0.0 {
                continue;
            }
            let theta = 2.0 * std::f64::consts::PI * reduced(n as f64 * alpha);
            re += c * theta.cos();
            im += c * theta.sin();
        }
        Complex64::new(re, im)
    }
}

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi <= 0.5) {
        return Err(Error::parameter(format!(
            "integration half-width must lie in (0, 1/2], got {xi}"
        )));
    }
    Ok(())
}

/// Integral of |R|^2 over [-xi, xi], exactly, through the autocorrelations:
/// 2 xi A_0 + sum_j A_j 2 sin(2 pi j xi)/(pi j) in ascending j.
pub fn r_truncated_exact(grid: &ExpSumGrid, xi: f64) -> Result<f64> {
    check_xi(xi)?;
    exact_from_autocorr(&grid.autocorr, xi)
}

fn exact_from_autocorr(autocorr: &[f64], xi: f64) -> Result<f64> {
    let mut acc = Neumaier::new();
    acc.add(2.0 * xi * autocorr[0]);
    for (j, &a) in autocorr.iter().enumerate().skip(1) {
        let jf = j as f64;
        let s = (2.0 * std::f64::consts::PI * reduced(jf * xi)).sin();
        acc.add(a * 2.0 * s / (std::f64::consts::PI * jf));
    }
    Ok(acc.total())
}

/// Same integral by adaptive quadrature on direct samples of |R|^2.
/// Exists to validate the exact path; relative tolerance 1e-8.
pub fn r_truncated_quadrature(grid: &ExpSumGrid, xi: f64) -> Result<f64> {
    check_xi(xi)?;
    let degree = grid.coeffs.len() - 1;
    // a few seed panels per oscillation of the degree-X polynomial
    let n_seed = ((4.0 * degree as f64 * xi).ceil() as usize).clamp(8, 8192);
    let step = 2.0 * xi / n_seed as f64;
    let mut breaks: Vec<f64> = (0..n_seed).map(|k| -xi + k as f64 * step).collect();
    breaks.push(xi);
    let value = integrate_composite(
        |alpha| grid.r_direct(alpha).norm_sqr(),
        &breaks,
        1e-9,
        1e-300,
    )?;
    Ok(value.value)
}

/// Smoothed variant: coefficients (Lambda(n) - 1) e^{-n/X} truncated where
/// the weight drops below tail_eps / X, then the same exact integral.
/// The table argument fixes X; the longer auxiliary table is built here,
/// so its capacity failure surfaces as this operation's error.
pub fn smoothed_r_truncated(table: &MangoldtTable, xi: f64, tail_eps: f64) -> Result<f64> {
    check_xi(xi)?;
    let grid = build_smoothed_grid(table, tail_eps)?;
    exact_from_autocorr(&grid.autocorr, xi)
}

/// Grid over the smoothed coefficients (Lambda(n) - 1) e^{-n/X}, truncated
/// where the weight drops below tail_eps / X. The grid keeps the table's X
/// even though its coefficient sequence runs longer.
pub fn build_smoothed_grid(table: &MangoldtTable, tail_eps: f64) -> Result<ExpSumGrid> {
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(Error::parameter(format!(
            "tail threshold must lie in (0, 1), got {tail_eps}"
        )));
    }
    let coeffs = smoothed_coeffs(table, tail_eps)?;
    let m = default_grid_size(coeffs.len() as u64 - 1);
    grid_from_coeffs(table.x(), coeffs, m)
}

/// Truncation length for the smoothed coefficients at threshold tail_eps.
pub fn smoothed_cutoff(x: u64, tail_eps: f64) -> u64 {
    let xf = x as f64;
    (xf * (xf.ln() + (1.0 / tail_eps).ln())).ceil() as u64
}

fn smoothed_coeffs(table: &MangoldtTable, tail_eps: f64) -> Result<Vec<f64>> {
    let x = table.x();
    let n0 = smoothed_cutoff(x, tail_eps);
    let aux = build_mangoldt_table(n0)?;
    let xf = x as f64;
    let coeffs = aux
        .lambda()
        .iter()
        .enumerate()
        .map(|(n, &l)| {
            if n == 0 {
                0.0
            } else {
                (l - 1.0) * (-(n as f64) / xf).exp()
            }
        })
        .collect();
    Ok(coeffs)
}

/// Reference density X log(X alpha) + (c/2 + 1) X for |R|^2 near the origin.
pub fn f_model(x: u64, alpha: f64, c: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::parameter(format!(
            "model density needs alpha > 0, got {alpha}"
        )));
    }
    let xf = x as f64;
    Ok(xf * (xf * alpha).ln() + (c / 2.0 + 1.0) * xf)
}

/// Sum over lags |j| <= h of (h - |j|) A_|j|: the one-period integral of
/// |R|^2 against the lag-weight window, exact because the window has
/// finitely many Fourier coefficients.
pub(crate) fn lag_weighted_energy(autocorr: &[f64], h: f64) -> f64 {
    let j_max = (h.floor() as usize).min(autocorr.len() - 1);
    let mut acc = Neumaier::new();
    acc.add(h * autocorr[0]);
    for (j, &a) in autocorr.iter().enumerate().take(j_max + 1).skip(1) {
        let w = h - j as f64;
        if w > 0.0 {
            acc.add(2.0 * w * a);
        }
    }
    acc.total()
}

/// Closed form of xi^2 * integral over (0, inf) of f(X, alpha) U(alpha, x/xi).
pub fn f_part_closed(x: f64, xi: f64, big_x: u64, c: f64) -> f64 {
    let xf = big_x as f64;
    let v = x * xf * xi;
    0.5 * v * ((xf * xi / x).ln() + c_prime_from_c(c))
}

/// g(x, xi): the U-weighted second moment of |R|^2 - f over (0, inf),
/// scaled by xi^2. The |R|^2 part collapses over one period against the
/// periodized weight (exact coefficient sum); the f part is closed form.
pub fn g_diagnostic(grid: &ExpSumGrid, x: f64, xi: f64, c: f64) -> Result<f64> {
    check_xi(xi)?;
    if !(x > 0.0) {
        return Err(Error::parameter(format!(
            "diagnostic scale must be positive, got {x}"
        )));
    }
    let h = x / xi;
    // one period of |R|^2 against the lag-weight window, times 1/2 for
    // the half-line, times xi^2
    let r_part = 0.5 * xi * xi * lag_weighted_energy(&grid.autocorr, h);
    Ok(r_part - f_part_closed(x, xi, grid.x, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_moments, KernelKind};
    use rand::{Rng, SeedableRng};

    fn table(x: u64) -> MangoldtTable {
        build_mangoldt_table(x).unwrap()
    }

    #[test]
    fn geometric_sum_examples() {
        let t = eval_t(0.0, 5);
        assert_eq!(t, Complex64::new(5.0, 0.0));
        assert_eq!(eval_t(3.0, 7), Complex64::new(7.0, 0.0));
        let t = eval_t(0.5, 3);
        assert!((t.re + 1.0).abs() < 1e-14 && t.im.abs() < 1e-14);
        let t = eval_t(0.25, 4);
        assert!(t.norm() < 1e-12);
    }

    #[test]
    fn geometric_sum_matches_direct_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let x = rng.gen_range(1..=50u64);
            let alpha: f64 = rng.gen_range(-1.5..1.5);
            let mut direct = Complex64::new(0.0, 0.0);
            for n in 1..=x {
                let th = 2.0 * std::f64::consts::PI * n as f64 * alpha;
                direct += Complex64::new(th.cos(), th.sin());
            }
            let fast = eval_t(alpha, x);
            assert!(
                (fast - direct).norm() < 1e-9 * (1.0 + direct.norm()),
                "x = {x}, alpha = {alpha}"
            );
            let dist = reduced(alpha).abs();
            let bound = if dist == 0.0 {
                x as f64
            } else {
                (x as f64).min(0.5 / dist)
            };
            assert!(fast.norm() <= bound * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn prime_sum_values() {
        let t10 = table(10);
        let s0 = eval_s(0.0, &t10);
        assert_eq!(s0.re.to_bits(), t10.psi_prefix()[10].to_bits());
        assert_eq!(s0.im, 0.0);
        // alternating signs at half: 2 log 2 - log 3 - log 5
        let s = eval_s(0.5, &table(5));
        assert!((s.re - -1.32175583998231945).abs() < 1e-14);
        assert!(s.im.abs() < 1e-14);
        // shifting alpha by 1 leaves every phase untouched
        let a = eval_s(1.0, &t10);
        assert_eq!(a.re.to_bits(), s0.re.to_bits());
        assert_eq!(a.im.to_bits(), s0.im.to_bits());
    }

    #[test]
    fn grid_small_cases() {
        let t4 = table(4);
        let g = build_grid(&t4, 16).unwrap();
        // R(0) = psi(4) - 4
        assert!((g.r_values()[0].re - -1.51509335021199969).abs() < 1e-12);
        assert_eq!(g.r_values()[0].im, 0.0);
        // A_0 = 1 + (log2 - 1)^2 + (log3 - 1)^2 + (log2 - 1)^2
        assert!((g.autocorr()[0] - 1.19804168907298421).abs() < 1e-12);
        assert_eq!(build_grid(&t4, 9).unwrap_err().exit_code(), 1);
        assert!(build_grid(&t4, 10).is_ok());
    }

    #[test]
    fn grid_symmetry_is_bitwise() {
        let g = build_grid(&table(100), 256).unwrap();
        let r = g.r_values();
        for k in 1..128 {
            assert_eq!(r[256 - k].re.to_bits(), r[k].re.to_bits());
            assert_eq!(r[256 - k].im.to_bits(), (-r[k].im).to_bits());
        }
        assert_eq!(r[0].im, 0.0);
        assert_eq!(r[128].im, 0.0);
    }

    #[test]
    fn autocorr_matches_direct_lags() {
        let t = table(12);
        let g = build_grid(&t, 32).unwrap();
        let c = g.coeffs();
        for j in 0..=12usize {
            let mut direct = 0.0;
            for n in 1..=(12 - j) {
                direct += c[n] * c[n + j];
            }
            assert!(
                (g.autocorr()[j] - direct).abs() < 1e-12,
                "lag {j}: {} vs {direct}",
                g.autocorr()[j]
            );
        }
    }

    #[test]
    fn grid_rebuild_is_bit_identical() {
        let t = table(300);
        let a = build_grid(&t, 1024).unwrap();
        let b = build_grid(&t, 1024).unwrap();
        assert!(a
            .r_values()
            .iter()
            .zip(b.r_values())
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
        assert!(a
            .autocorr()
            .iter()
            .zip(b.autocorr())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn parseval_energy() {
        // grid A_0 against the direct coefficient energy
        let t = table(1000);
        let g = build_grid(&t, default_grid_size(1000)).unwrap();
        let mut acc = Neumaier::new();
        for &c in &g.coeffs()[1..] {
            acc.add(c * c);
        }
        assert!((g.autocorr()[0] - acc.total()).abs() < 1e-12 * acc.total());
    }

    #[test]
    fn truncated_integral_exact_values() {
        let g = build_grid(&table(10), 32).unwrap();
        let full = r_truncated_exact(&g, 0.5).unwrap();
        assert!((full - 4.56808530454553684).abs() < 1e-12 * full);
        assert!(r_truncated_exact(&g, 1e-12).unwrap() < 1e-9);
        assert!(r_truncated_exact(&g, 0.0).is_err());
        assert!(r_truncated_exact(&g, 0.6).is_err());
        assert!(r_truncated_exact(&g, -0.1).is_err());
    }

    #[test]
    fn quadrature_agrees_with_exact_path() {
        let g10 = build_grid(&table(10), 32).unwrap();
        let q = r_truncated_quadrature(&g10, 0.5).unwrap();
        assert!((q - 4.56808530454553684).abs() < 1e-7 * q);

        let g100 = build_grid(&table(100), 256).unwrap();
        let e = r_truncated_exact(&g100, 0.2).unwrap();
        let q = r_truncated_quadrature(&g100, 0.2).unwrap();
        assert!((q - e).abs() < 1e-6 * e.abs());

        let g1000 = build_grid(&table(1000), 2048).unwrap();
        let e = r_truncated_exact(&g1000, 0.01).unwrap();
        let q = r_truncated_quadrature(&g1000, 0.01).unwrap();
        assert!((q - e).abs() < 1e-6 * e.abs());
    }

    #[test]
    fn truncated_integral_is_monotone_in_width() {
        let g = build_grid(&table(10), 32).unwrap();
        let a = r_truncated_quadrature(&g, 0.1).unwrap();
        let b = r_truncated_quadrature(&g, 0.15).unwrap();
        let c = r_truncated_quadrature(&g, 0.25).unwrap();
        assert!(a >= 0.0 && b >= a && c >= b);
    }

    #[test]
    fn smoothed_full_width_is_weighted_energy() {
        let t = table(50);
        let got = smoothed_r_truncated(&t, 0.5, 1e-12).unwrap();
        let n0 = smoothed_cutoff(50, 1e-12);
        let aux = table(n0);
        let mut acc = Neumaier::new();
        for (n, &l) in aux.lambda().iter().enumerate().skip(1) {
            let c = (l - 1.0) * (-(n as f64) / 50.0).exp();
            acc.add(c * c);
        }
        let want = acc.total();
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
        assert!(smoothed_r_truncated(&t, 1e-9, 1e-12).unwrap() < 1e-5);
        assert!(smoothed_r_truncated(&t, 0.5, 2.0).is_err());
    }

    #[test]
    fn smoothed_matches_fine_grid_quadrature() {
        // Simpson rule on a dense uniform sampling of |R~|^2, sampled by an
        // oversized transform of the same coefficients
        let x: u64 = 1000;
        let xi = 0.05;
        let t = table(x);
        let got = smoothed_r_truncated(&t, xi, 1e-12).unwrap();

        let coeffs = smoothed_coeffs(&t, 1e-12).unwrap();
        let m: usize = 1 << 21;
        let mut planner = FftPlanner::<f64>::new();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (n, &c) in coeffs.iter().enumerate().skip(1) {
            buf[n].re = c;
        }
        planner.plan_fft_inverse(m).process(&mut buf);
        let power: Vec<f64> = buf.iter().map(|z| z.norm_sqr()).collect();
        let k_max = (xi * m as f64).floor() as usize;
        let step = 1.0 / m as f64;
        let mut simpson = Neumaier::new();
        for k in -(k_max as i64)..=(k_max as i64) {
            let s = power[k.unsigned_abs() as usize];
            let w = if k.unsigned_abs() as usize == k_max {
                1.0
            } else if k.rem_euclid(2) == 1 {
                4.0
            } else {
                2.0
            };
            simpson.add(w * s);
        }
        let mut oracle = simpson.total() * step / 3.0;
        // end strips between the last grid point and xi, one per side
        let direct = |alpha: f64| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (n, &c) in coeffs.iter().enumerate().skip(1) {
                let th = 2.0 * std::f64::consts::PI * reduced(n as f64 * alpha);
                re += c * th.cos();
                im += c * th.sin();
            }
            re * re + im * im
        };
        let edge = k_max as f64 * step;
        oracle += 2.0 * (xi - edge) * direct(0.5 * (edge + xi));
        assert!((got - oracle).abs() < 1e-5 * oracle, "{got} vs {oracle}");
    }

    #[test]
    fn model_density_values() {
        let x = 100u64;
        assert!((f_model(x, 0.01, -4.0).unwrap() - -100.0).abs() < 1e-10);
        let e_over_x = std::f64::consts::E / 100.0;
        assert!((f_model(x, e_over_x, 0.0).unwrap() - 200.0).abs() < 1e-10);
        let want = 100.0 * (2f64).ln() - 100.0;
        assert!((f_model(100, 0.02, -4.0).unwrap() - want).abs() < 1e-12 * want.abs());
        assert!(f_model(x, 0.0, -4.0).is_err());
        assert!(f_model(x, -0.5, -4.0).is_err());
    }

    #[test]
    fn f_part_closed_form_matches_numerics() {
        // split the weighted integral of X log(X alpha) + (c/2 + 1) X into
        // the weight's mass and log-mass, both integrated numerically
        let c = -4.0;
        for (x, xi, big_x) in [(0.1, 0.05, 1000u64), (0.3, 0.1, 100), (2.0, 0.5, 50)] {
            let h = x / xi;
            let m = kernel_moments(KernelKind::U, h).unwrap();
            let xf = big_x as f64;
            let numeric =
                xi * xi * xf * (m.log_mass + ((xf / h).ln() + c / 2.0 + 1.0) * m.mass);
            let closed = f_part_closed(x, xi, big_x, c);
            assert!(
                (numeric - closed).abs() < 1e-6 * closed.abs().max(1.0),
                "x = {x}, xi = {xi}: {numeric} vs {closed}"
            );
        }
    }

    #[test]
    fn diagnostic_reduces_to_energy_at_unit_window() {
        // h = 1 keeps only the lag-0 term: xi^2 A_0 / 2 minus the f part
        let t = table(200);
        let g = build_grid(&t, 512).unwrap();
        let xi = 0.25;
        let got = g_diagnostic(&g, xi, xi, -4.0).unwrap();
        let want = 0.5 * xi * xi * g.autocorr()[0] - f_part_closed(xi, xi, 200, -4.0);
        assert!((got - want).abs() < 1e-12 * want.abs().max(1.0));
        assert!(g_diagnostic(&g, 0.0, xi, -4.0).is_err());
        assert!(g_diagnostic(&g, 0.5, 0.7, -4.0).is_err());
    }

    #[test]
    fn diagnostic_stays_inside_quadratic_log_envelope() {
        let x: u64 = 1000;
        let t = table(x);
        let g = build_grid(&t, default_grid_size(x)).unwrap();
        let xi = 0.05;
        let xf = x as f64;
        let hi = xi * xf.sqrt();
        let logs = xf.ln() * xf.ln();
        let mut worst = 0.0f64;
        for k in 0..=20 {
            let xx = xi + (hi - xi) * k as f64 / 20.0;
            let gv = g_diagnostic(&g, xx, xi, -4.0).unwrap();
            worst = worst.max(gv.abs() / (xx * xf * xi * logs));
        }
        // generous ceiling; the frozen calibration lives elsewhere
        assert!(worst < 10.0, "envelope ratio {worst}");
    }
}
