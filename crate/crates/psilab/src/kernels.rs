//! Trigonometric weight kernels and the special functions attached to them.
//!
//! Three families live here. `fejer_weight` is the triangle-coefficient
//! kernel K(alpha, h) = sum over |n| <= h of (h - |n|) e(n alpha), evaluated
//! in closed form for real h >= 0; `sinc_weight` is its continuous sibling
//! U(alpha, h) = (sin(pi h alpha) / (pi alpha))^2, and Poisson summation ties
//! the two together: summing U over integer shifts of alpha reproduces K.
//! `smoothing_kernel` is the band-limited taper whose transform equals 1 on
//! [-1, 1], decays as a raised cosine on [1, 1+eta], and vanishes beyond.
//!
//! All evaluation paths avoid cancellation near removable singularities by
//! switching to short even series in the offending variable; the switch
//! points are chosen so both sides agree to machine precision.

use crate::error::Error;
use crate::quad::{integrate_composite, integrate_log_origin};
use crate::sum::Neumaier;
use crate::Result;
use num_complex::Complex64;
use std::f64::consts::PI;

/// sin(v)/v. The only special point is v = 0; sin(v)/v itself is free of
/// cancellation everywhere else.
#[inline]
pub fn sinc(v: f64) -> f64 {
    if v == 0.0 {
        1.0
    } else {
        v.sin() / v
    }
}

/// d/dv [sin(v)/v]. Series below |v| = 0.45, where the direct form loses
/// digits to cancellation.
#[inline]
fn sinc_d1(v: f64) -> f64 {
    if v.abs() <= 0.45 {
        let v2 = v * v;
        v * (-1.0 / 3.0
            + v2 * (1.0 / 30.0
                + v2 * (-1.0 / 840.0
                    + v2 * (1.0 / 45360.0
                        + v2 * (-1.0 / 3991680.0 + v2 * (1.0 / 518918400.0))))))
    } else {
        (v * v.cos() - v.sin()) / (v * v)
    }
}

/// d2/dv2 [sin(v)/v].
#[inline]
fn sinc_d2(v: f64) -> f64 {
    if v.abs() <= 0.45 {
        let v2 = v * v;
        -1.0 / 3.0
            + v2 * (1.0 / 10.0
                + v2 * (-1.0 / 168.0
                    + v2 * (1.0 / 6480.0
                        + v2 * (-1.0 / 443520.0 + v2 * (1.0 / 47174400.0)))))
    } else {
        ((2.0 - v * v) * v.sin() - 2.0 * v * v.cos()) / (v * v * v)
    }
}

/// K(alpha, h) for real h >= 0: 1-periodic, even, nonnegative.
///
/// With h0 = floor(h) and f = h - h0, the sum splits into a Fejer part and f
/// times a Dirichlet part,
///
///   K = r^2 + f (1 + 2 c r),   r = sin(pi h0 a)/sin(pi a),  c = cos(pi (h0+1) a),
///
/// which regroups as (r + f c)^2 + f (1 - f c^2). Both summands are
/// nonnegative for f < 1, so the value cannot go negative by rounding.
/// r is computed as h0 sinc(pi h0 d)/sinc(pi d) on the reduced d = a - round(a),
/// smooth through d = 0.
pub fn fejer_weight(alpha: f64, h: f64) -> f64 {
    assert!(h >= 0.0, "fejer_weight wants h >= 0");
    let h0 = h.floor();
    let f = h - h0;
    let d = alpha - alpha.round();
    let r = h0 * sinc(PI * h0 * d) / sinc(PI * d);
    let c = (PI * (h0 + 1.0) * d).cos();
    (r + f * c) * (r + f * c) + f * (1.0 - f * c * c)
}

/// dK/d(alpha) for h >= 1. Odd and 1-periodic; returns the limit 0 at
/// integer alpha.
pub fn fejer_weight_derivative(alpha: f64, h: f64) -> f64 {
    assert!(h >= 1.0, "fejer_weight_derivative wants h >= 1");
    let h0 = h.floor();
    let f = h - h0;
    let d = alpha - alpha.round();
    let sd = sinc(PI * d);
    let shd = sinc(PI * h0 * d);
    let r = h0 * shd / sd;
    // r' through the sinc quotient keeps the odd limit r'(0) = 0 exact.
    let rp = PI * h0 * (h0 * sinc_d1(PI * h0 * d) * sd - shd * sinc_d1(PI * d)) / (sd * sd);
    let c = (PI * (h0 + 1.0) * d).cos();
    let cp = -PI * (h0 + 1.0) * (PI * (h0 + 1.0) * d).sin();
    2.0 * r * rp + 2.0 * f * (cp * r + c * rp)
}

/// U(alpha, h) = (sin(pi h alpha)/(pi alpha))^2 with U(0, h) = h^2.
pub fn sinc_weight(alpha: f64, h: f64) -> f64 {
    assert!(h >= 0.0, "sinc_weight wants h >= 0");
    let s = sinc(PI * h * alpha);
    h * h * s * s
}

/// si(x) = Si(x) - pi/2 = -integral of sin(t)/t over [x, infinity).
///
/// Power series up to x = 8, and the continued fraction of the exponential
/// integral at imaginary argument beyond (si(x) = Im E1(ix)), so both
/// branches deliver near machine precision.
pub fn sine_integral_si(x: f64) -> f64 {
    assert!(x >= 0.0, "sine_integral_si wants x >= 0");
    if x < 8.0 {
        // Si(x) = sum (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
        let mut term = x; // x^(2k+1)/(2k+1)! without the extra 1/(2k+1)
        let mut acc = Neumaier::new();
        acc.add(x);
        let mut k = 0u32;
        while term.abs() > 1e-20 && k < 60 {
            k += 1;
            let tk = 2.0 * k as f64;
            term *= -x * x / (tk * (tk + 1.0));
            acc.add(term / (tk + 1.0));
        }
        acc.total() - std::f64::consts::FRAC_PI_2
    } else {
        im_e1_imag_axis(x)
    }
}

/// Im E1(ix) for x >= 8 via the modified Lentz continued fraction
/// E1(z) = exp(-z) / (z + 1 - 1/(z + 3 - 4/(z + 5 - 9/(...)))).
fn im_e1_imag_axis(x: f64) -> f64 {
    let z = Complex64::new(0.0, x);
    let tiny = Complex64::new(1e-300, 0.0);
    let mut f = z + 1.0;
    if f.norm() == 0.0 {
        f = tiny;
    }
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for k in 1..200 {
        let a = -((k * k) as f64);
        let b = z + (2 * k + 1) as f64;
        d = b + a * d;
        if d.norm() == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    ((-z).exp() / f).im
}

/// Two-term large-x form -cos(x)/x - sin(x)/x^2, kept as an independent
/// cross-check of the continued fraction.
pub fn si_asymptotic(x: f64) -> f64 {
    -x.cos() / x - x.sin() / (x * x)
}

/// Which part of the band-limited taper to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothingPart {
    Value,
    Transform,
    SecondDerivative,
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 0.25) {
        return Err(Error::parameter(format!(
            "taper width eta must lie in (0, 1/4), got {eta}"
        )));
    }
    Ok(())
}

/// Band-limited taper K_eta and its transform.
///
/// Value: K_eta(x) = [sin(2 pi x) + sin(2 pi (1+eta) x)] / [2 pi x (1 - 4 eta^2 x^2)],
/// an entire, even function; the apparent singularities at x = 0 and
/// x = 1/(2 eta) are removable and handled by dedicated branches.
/// Transform: 1 on |t| <= 1, cos^2(pi(|t|-1)/(2 eta)) on 1 < |t| < 1+eta,
/// 0 beyond. Second derivative: closed form of d2/dx2 K_eta(x).
pub fn smoothing_kernel(x_or_t: f64, eta: f64, part: SmoothingPart) -> Result<f64> {
    check_eta(eta)?;
    match part {
        SmoothingPart::Transform => {
            let t = x_or_t.abs();
            Ok(if t <= 1.0 {
                1.0
            } else if t < 1.0 + eta {
                let c = (PI * (t - 1.0) / (2.0 * eta)).cos();
                c * c
            } else {
                0.0
            })
        }
        SmoothingPart::Value => Ok(k_eta_parts(x_or_t.abs(), eta).0),
        SmoothingPart::SecondDerivative => Ok(k_eta_parts(x_or_t.abs(), eta).2),
    }
}

/// (K_eta, K_eta', K_eta'') at x >= 0.
///
/// For x <= 0.05 a composed Maclaurin series in x^2; otherwise the factored
/// product g(x) * (pi/2) sinc(pi eta (x - x0)) with x0 = 1/(2 eta) and
/// g = sin(pi (2+eta) x) / (pi x (1 + 2 eta x)), which is smooth on x > 0
/// and exact at the taper midpoint x0.
fn k_eta_parts(x: f64, eta: f64) -> (f64, f64, f64) {
    debug_assert!(x >= 0.0);
    if x <= 0.05 {
        k_eta_series(x, eta)
    } else {
        k_eta_product(x, eta)
    }
}

/// Maclaurin branch, accurate for |x| <= ~0.06.
fn k_eta_series(x: f64, eta: f64) -> (f64, f64, f64) {
    let a = PI * (2.0 + eta);
    // K_eta = (2+eta) * sinc(a x) * cos(pi eta x) / (1 - 4 eta^2 x^2);
    // multiply the three even series, coefficients in powers of x^2.
    let b = PI * eta;
    let g4 = 4.0 * eta * eta;
    let mut s_ser = [0.0f64; 7]; // sinc(a x)
    let mut c_ser = [0.0f64; 7]; // cos(b x)
    let mut r_ser = [0.0f64; 7]; // 1/(1 - g4 x^2)
    let mut fact = 1.0; // (2k+1)!
    let mut factc = 1.0; // (2k)!
    let mut apow = 1.0;
    let mut bpow = 1.0;
    let mut rpow = 1.0;
    let mut sign = 1.0;
    for k in 0..7usize {
        if k > 0 {
            let kf = k as f64;
            fact *= (2.0 * kf) * (2.0 * kf + 1.0);
            factc *= (2.0 * kf - 1.0) * (2.0 * kf);
            apow *= a * a;
            bpow *= b * b;
            rpow *= g4;
            sign = -sign;
        }
        s_ser[k] = sign * apow / fact;
        c_ser[k] = sign * bpow / factc;
        r_ser[k] = rpow;
    }
    let mut q = [0.0f64; 7];
    for i in 0..7 {
        for j in 0..7 - i {
            for l in 0..7 - i - j {
                q[i + j + l] += s_ser[i] * c_ser[j] * r_ser[l];
            }
        }
    }
    let x2 = x * x;
    let scale = 2.0 + eta;
    let mut v = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for k in (0..7usize).rev() {
        let kf = 2.0 * k as f64;
        v = v * x2 + q[k];
        if k >= 1 {
            d1 = d1 * x2 + kf * q[k];
            d2 = d2 * x2 + kf * (kf - 1.0) * q[k];
        }
    }
    (scale * v, scale * d1 * x, scale * d2)
}

/// Factored product branch, exact for all x > 0.
fn k_eta_product(x: f64, eta: f64) -> (f64, f64, f64) {
    let a = PI * (2.0 + eta);
    let x0 = 1.0 / (2.0 * eta);
    let q = PI * x * (1.0 + 2.0 * eta * x);
    let qp = PI * (1.0 + 4.0 * eta * x);
    let qpp = 4.0 * PI * eta;
    let sn = (a * x).sin();
    let g = sn / q;
    let gp = (a * (a * x).cos() - g * qp) / q;
    let gpp = (-a * a * sn - 2.0 * gp * qp - g * qpp) / q;
    let w = PI * eta;
    let v = w * (x - x0);
    let s = sinc(v);
    let s1 = sinc_d1(v);
    let s2 = sinc_d2(v);
    let half_pi = 0.5 * PI;
    (
        half_pi * g * s,
        half_pi * (gp * s + g * w * s1),
        half_pi * (gpp * s + 2.0 * gp * w * s1 + g * w * w * s2),
    )
}

/// Which kernel a moment request refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    K,
    U,
}

/// Mass and log-weighted mass of a kernel.
#[derive(Clone, Copy, Debug)]
pub struct KernelMoments {
    /// K: integral over [0, 1/2]. U: integral over [0, infinity).
    pub mass: f64,
    /// Same ranges with weight log(h * alpha).
    pub log_mass: f64,
}

/// Computes kernel masses by adaptive quadrature.
///
/// The K integrals run over one half period with panel seeds at the
/// oscillation scale 1/h. The U integrals run over [0, 3000/h] numerically;
/// the rest of the line is added in closed form, exactly for the mass (via
/// si) and with a certified sub-tolerance remainder for the log mass.
pub fn kernel_moments(kind: KernelKind, h: f64) -> Result<KernelMoments> {
    if !(h >= 1.0) {
        return Err(Error::parameter(format!("kernel_moments wants h >= 1, got {h}")));
    }
    match kind {
        KernelKind::K => {
            let step = 0.5 / (2.0 * h.ceil() + 2.0);
            let mut breaks: Vec<f64> = Vec::new();
            let mut z = step;
            while z < 0.5 {
                breaks.push(z);
                z += step;
            }
            breaks.push(0.5);
            let mut full = vec![0.0];
            full.extend_from_slice(&breaks);
            let mass = integrate_composite(|a| fejer_weight(a, h), &full, 1e-11, 1e-12)?.value;
            // log leg: singular piece below the first seed, oscillatory rest
            let near = integrate_log_origin(|a| (h * a).ln() * fejer_weight(a, h), step, 1e-9, 1e-12)?;
            let far = integrate_composite(|a| (h * a).ln() * fejer_weight(a, h), &breaks, 1e-9, 1e-12)?;
            Ok(KernelMoments {
                mass,
                log_mass: near.value + far.value,
            })
        }
        KernelKind::U => {
            let a_cut = 3000.0 / h;
            let first = 1.0 / h;
            let mut breaks = vec![first];
            let mut z = 2.0 * first;
            while z < a_cut {
                breaks.push(z);
                z += first;
            }
            breaks.push(a_cut);
            let near_mass = integrate_log_origin(|a| sinc_weight(a, h), first, 1e-11, 1e-13)?;
            let far_mass = integrate_composite(|a| sinc_weight(a, h), &breaks, 1e-11, 1e-13)?;
            let mass = near_mass.value + far_mass.value + u_mass_tail(a_cut, h);
            let near_log =
                integrate_log_origin(|a| (h * a).ln() * sinc_weight(a, h), first, 1e-9, 1e-12)?;
            let far_log =
                integrate_composite(|a| (h * a).ln() * sinc_weight(a, h), &breaks, 1e-9, 1e-12)?;
            let log_mass = near_log.value + far_log.value + u_log_tail(a_cut, h);
            Ok(KernelMoments { mass, log_mass })
        }
    }
}

/// Exact tail of the U mass over [A, infinity):
/// (1/(2 pi^2)) [1/A - cos(2 pi h A)/A - 2 pi h si(2 pi h A)].
fn u_mass_tail(a: f64, h: f64) -> f64 {
    let w = 2.0 * PI * h * a;
    (1.0 / a - w.cos() / a - 2.0 * PI * h * sine_integral_si(w)) / (2.0 * PI * PI)
}

/// Tail of the U log mass over [A, infinity). The principal and first
/// boundary terms are kept; the remaining oscillatory integral is bounded by
/// (log(hA)+1)/(2 pi^3 h A^2), below 1e-8 h at A = 3000/h.
fn u_log_tail(a: f64, h: f64) -> f64 {
    let lha = (h * a).ln();
    let w = 2.0 * PI * h * a;
    ((lha + 1.0) / a + lha * w.sin() / (2.0 * PI * h * a * a)) / (2.0 * PI * PI)
}

/// Checks the transform identity: the taper's transform at t equals the
/// integral of K_eta''(x) U(t, x) over x in [0, infinity).
///
/// Returns (transform value, integral value). The x-range is split at
/// A ~ 60/eta: below, direct quadrature; above, the integrand is unwound by
/// two integrations by parts into boundary terms plus 2 K_eta(x) cos(2 pi t x),
/// whose four constituent sinusoids over the cubic-decay denominator are
/// themselves reduced to boundary terms with a certified remainder.
pub fn verify_k_transf(t: f64, eta: f64) -> Result<(f64, f64)> {
    check_eta(eta)?;
    let t = t.abs();
    let lhs = smoothing_kernel(t, eta, SmoothingPart::Transform)?;

    // Frequencies of sin(2 pi x), sin(2 pi (1+eta) x) beaten against cos(2 pi t x).
    let omegas = [
        2.0 * PI * (1.0 + eta + t),
        2.0 * PI * (1.0 + eta - t),
        2.0 * PI * (1.0 + t),
        2.0 * PI * (1.0 - t),
    ];
    // Pick A so the double-by-parts remainder of every nonzero-frequency term
    // is certified below 2.5e-10.
    let mut a_cut: f64 = 60.0 / eta;
    for &w in &omegas {
        if w.abs() > 1e-9 {
            let need = (3.1 / (8.0 * PI * eta * eta * w * w * 2.5e-10)).powf(0.25);
            a_cut = a_cut.max(need);
        }
    }

    // Oscillation scale of K_eta''(x) U(t, x): (2+eta)/2 + t cycles per unit.
    let freq = 0.5 * (2.0 + eta) + t;
    let step = 1.0 / (1.3 * freq);
    let mut breaks = vec![0.0];
    let mut z = step;
    while z < a_cut {
        breaks.push(z);
        z += step;
    }
    breaks.push(a_cut);
    let body = integrate_composite(
        |x| k_eta_parts(x, eta).2 * u_value(t, x),
        &breaks,
        1e-9,
        1e-9,
    )?;

    let (k_a, kp_a, _) = k_eta_parts(a_cut, eta);
    let boundary = -kp_a * u_value(t, a_cut) + k_a * u_d1(t, a_cut);

    // Tail: 2 int_A^inf K_eta(x) cos(2 pi t x) dx as four sinusoids over
    // D(x) = 2 pi x (1 - 4 eta^2 x^2), each integrated by parts twice.
    let dd = |x: f64| 2.0 * PI * x * (1.0 - 4.0 * eta * eta * x * x);
    let ddp = |x: f64| 2.0 * PI * (1.0 - 12.0 * eta * eta * x * x);
    let g_a = 1.0 / dd(a_cut);
    let gp_a = -ddp(a_cut) / (dd(a_cut) * dd(a_cut));
    let mut tail = 0.0;
    for &w in &omegas {
        if w.abs() <= 1e-9 {
            continue;
        }
        tail += 0.5 * ((w * a_cut).cos() * g_a / w - (w * a_cut).sin() * gp_a / (w * w));
    }

    Ok((lhs, body.value + boundary + tail))
}

/// U(t, x) seen as a function of its width argument x, with the t -> 0
/// limits filled in: value x^2, slope 2x, curvature 2 cos(2 pi t x).
fn u_value(t: f64, x: f64) -> f64 {
    let s = sinc(PI * t * x);
    x * x * s * s
}

fn u_d1(t: f64, x: f64) -> f64 {
    2.0 * x * sinc(2.0 * PI * t * x)
}
