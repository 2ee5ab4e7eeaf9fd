//! Main terms, error envelopes, admissible parameter ranges, and the
//! residual reports tying them to computed quantities.
//!
//! Everything here is closed-form arithmetic on (X, h, xi, a, b, c). The
//! envelopes evaluate displayed bounds as formulas; how large the hidden
//! constants actually are is always reported as an empirical ratio, never
//! assumed.

use crate::error::Error;
use crate::expsum::{r_truncated_exact, ExpSumGrid};
use crate::mangoldt::MangoldtTable;
use crate::variance::compute_j;
use crate::Result;
use serde::Serialize;

pub const EULER_GAMMA: f64 = 0.577215664901532860606512090082;
pub const LOG_2PI: f64 = 1.837877066409345483560659472811;

/// Epsilon used in range conditions that hold "for every fixed epsilon".
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Which displayed branch of an envelope applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    UnconditionalSmallH,
    UnconditionalLargeH,
    Rh,
}

/// Parameter bundle (a, b, c) with the derived c' and envelope branch.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticHypothesis {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub c_prime: f64,
    pub mode: Mode,
}

impl AsymptoticHypothesis {
    pub fn new(a: f64, b: f64, c: f64, mode: Mode) -> Result<Self> {
        if !(0.0..1.0).contains(&a) {
            return Err(Error::parameter(format!("a must lie in [0, 1), got {a}")));
        }
        if !(b >= 0.0) {
            return Err(Error::parameter(format!("b must be nonnegative, got {b}")));
        }
        if !c.is_finite() {
            return Err(Error::parameter(format!("c must be finite, got {c}")));
        }
        Ok(AsymptoticHypothesis {
            a,
            b,
            c,
            c_prime: c_prime_from_c(c),
            mode,
        })
    }

    /// c = -4 with (a, b) = (0, 3), the strongest-bound defaults.
    pub fn rh_default() -> Self {
        Self::new(0.0, 3.0, -4.0, Mode::Rh).unwrap()
    }
}

/// c' = c/2 + 2 - gamma - log(2 pi).
pub fn c_prime_from_c(c: f64) -> f64 {
    c / 2.0 + 2.0 - EULER_GAMMA - LOG_2PI
}

/// Inverse of `c_prime_from_c`.
pub fn c_from_c_prime(c_prime: f64) -> f64 {
    2.0 * (c_prime - 2.0 + EULER_GAMMA + LOG_2PI)
}

/// hX (log(X/h) + c'), the predicted size of the short-interval variance.
pub fn j_main_term(x: u64, h: f64, c_prime: f64) -> Result<f64> {
    let xf = x as f64;
    if !(1.0 <= h && h <= xf) {
        return Err(Error::parameter(format!(
            "window length must lie in [1, {x}], got {h}"
        )));
    }
    Ok(h * xf * ((xf / h).ln() + c_prime))
}

/// 2 X xi log(X xi) + c X xi, the predicted size of the truncated
/// second moment.
pub fn r_main_term(x: u64, xi: f64, c: f64) -> Result<f64> {
    if !(xi > 0.0 && xi <= 0.5) {
        return Err(Error::parameter(format!(
            "half-width must lie in (0, 1/2], got {xi}"
        )));
    }
    let v = x as f64 * xi;
    Ok(2.0 * v * v.ln() + c * v)
}

fn check_h_range(x: u64, h: f64, lo: f64, hi: f64, label: &str) -> Result<()> {
    if !(h > lo && h <= hi) {
        return Err(Error::parameter(format!(
            "{label} branch wants h in ({lo}, {hi}] at X = {x}, got {h}"
        )));
    }
    Ok(())
}

/// Envelope for the residual of the plain weighted second moment.
pub fn envelope_e(x: u64, h: f64, mode: Mode) -> Result<f64> {
    let xf = x as f64;
    let l = xf.ln();
    match mode {
        Mode::UnconditionalSmallH => {
            check_h_range(x, h, 0.0, xf.powf(DEFAULT_EPSILON), "small-window")?;
            Ok((h + 1.0).powi(3) * l * l)
        }
        Mode::UnconditionalLargeH => {
            // boundary h = X^epsilon admitted on both sides
            if !(h >= xf.powf(DEFAULT_EPSILON) && h <= xf) {
                return Err(Error::parameter(format!(
                    "large-window branch wants h in [X^eps, X] at X = {x}, got {h}"
                )));
            }
            Ok(h.powi(3))
        }
        Mode::Rh => {
            check_h_range(x, h, 0.0, xf, "square-root-cancellation")?;
            Ok((h + 1.0) * xf * l.powi(4))
        }
    }
}

/// Envelope for the residual of the smoothed weighted second moment.
/// Same branches, with a sharper conditional bound.
pub fn envelope_e_tilde(x: u64, h: f64, mode: Mode) -> Result<f64> {
    let xf = x as f64;
    let l = xf.ln();
    match mode {
        Mode::UnconditionalSmallH | Mode::UnconditionalLargeH => envelope_e(x, h, mode),
        Mode::Rh => {
            check_h_range(x, h, 0.0, xf, "square-root-cancellation")?;
            Ok((h + 1.0) * (h + 1.0) * l.powi(4))
        }
    }
}

/// The (a, b)-dependent remainder scale: hX loglog X (log X)^{-b} when
/// a = 0, hX (h/X)^a (log X)^{-b} when a > 0.
pub fn envelope_r_ab(x: u64, h: f64, a: f64, b: f64) -> Result<f64> {
    let xf = x as f64;
    if !(0.0..1.0).contains(&a) || !(b >= 0.0) {
        return Err(Error::parameter(format!(
            "remainder scale wants a in [0, 1) and b >= 0, got ({a}, {b})"
        )));
    }
    if x < 3 || !(1.0 <= h && h <= xf) {
        return Err(Error::parameter(format!(
            "remainder scale wants X >= 3 and h in [1, X], got X = {x}, h = {h}"
        )));
    }
    let l = xf.ln();
    if a == 0.0 {
        Ok(h * xf * l.ln() * l.powf(-b))
    } else {
        Ok(h * xf * (h / xf).powf(a) * l.powf(-b))
    }
}

/// Which parameter the admissible bracket is solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Bracket of admissible xi for a given window length h.
    XiRangeForH,
    /// Bracket of window lengths h over which the variance hypothesis
    /// must hold for a given xi.
    HRangeForXi,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibleRange {
    pub lo: f64,
    pub hi: f64,
    /// Derived lower-bound constraint on h (with implied constant 1);
    /// always true in the h-range direction where it does not apply.
    pub advisory_ok: bool,
}

/// The displayed uniformity brackets. An empty bracket comes back with
/// lo > hi rather than as an error.
pub fn admissible_ranges(
    hyp: &AsymptoticHypothesis,
    x: u64,
    given: f64,
    direction: Direction,
) -> Result<AdmissibleRange> {
    let xf = x as f64;
    let l = xf.ln();
    let (a, b) = (hyp.a, hyp.b);
    match direction {
        Direction::XiRangeForH => {
            let h = given;
            if !(1.0 <= h && h <= xf) {
                return Err(Error::parameter(format!(
                    "window length must lie in [1, {x}], got {h}"
                )));
            }
            let lo = (h / xf).powf(a) * l.powf(-b - 4.0) / h;
            let hi = ((xf / h).powf(a) * l.powf(b + 4.0) / h).min(0.5);
            let advisory_ok = h >= xf.powf(a / (a + 1.0)) * l.powf((b + 4.0) / (a + 1.0));
            Ok(AdmissibleRange { lo, hi, advisory_ok })
        }
        Direction::HRangeForXi => {
            let xi = given;
            if !(xi > 0.0 && xi <= 0.5) {
                return Err(Error::parameter(format!(
                    "half-width must lie in (0, 1/2], got {xi}"
                )));
            }
            let v = xf * xi;
            let lo = v.powf(-a / (2.0 * a + 6.0)) * l.powf(-(a + b + 4.0) / (2.0 * a + 6.0)) / xi;
            let hi = v.powf(4.0 * a / (a + 3.0)) * l.powf((3.0 * a + 4.0 * b + 13.0) / (a + 3.0)) / xi;
            Ok(AdmissibleRange {
                lo,
                hi,
                advisory_ok: true,
            })
        }
    }
}

/// Split of a composite envelope into its displayed summands.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeParts {
    pub x_term: f64,
    pub e_term: f64,
    pub r_ab_term: f64,
}

/// Echo of the inputs a report was computed from.
#[derive(Debug, Clone, Serialize)]
pub struct ReportInputs {
    pub x: f64,
    pub param_name: &'static str,
    pub param: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub advisory: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope_parts: Option<EnvelopeParts>,
}

impl ReportInputs {
    pub fn bare(x: f64, param_name: &'static str, param: f64) -> Self {
        ReportInputs {
            x,
            param_name,
            param,
            a: None,
            b: None,
            c: None,
            mode: None,
            advisory: None,
            envelope_parts: None,
        }
    }

    fn with_hypothesis(mut self, hyp: &AsymptoticHypothesis) -> Self {
        self.a = Some(hyp.a);
        self.b = Some(hyp.b);
        self.c = Some(hyp.c);
        self.mode = Some(hyp.mode);
        self
    }
}

/// A computed quantity against its predicted main term and envelope.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub computed: f64,
    pub main_term: f64,
    pub residual: f64,
    pub envelope: f64,
    pub empirical_constant: f64,
    pub inputs: ReportInputs,
}

impl ResidualReport {
    pub fn new(computed: f64, main_term: f64, envelope: f64, inputs: ReportInputs) -> Self {
        let residual = computed - main_term;
        let empirical_constant = if envelope > 0.0 {
            residual.abs() / envelope
        } else {
            f64::NAN
        };
        ResidualReport {
            computed,
            main_term,
            residual,
            envelope,
            empirical_constant,
            inputs,
        }
    }

    pub const CSV_HEADER: &'static str =
        "computed,main_term,residual,envelope,empirical_constant,X,param,a,b,c";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.computed,
            self.main_term,
            self.residual,
            self.envelope,
            self.empirical_constant,
            self.inputs.x,
            self.inputs.param,
            opt(self.inputs.a),
            opt(self.inputs.b),
            opt(self.inputs.c),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Report for the variance direction: computed J(X, h) against
/// hX(log(X/h) + c') with envelope X + E + R_ab, components echoed.
pub fn theorem1_report(
    table: &MangoldtTable,
    grid: &ExpSumGrid,
    x: u64,
    h: f64,
    hyp: &AsymptoticHypothesis,
) -> Result<ResidualReport> {
    if hyp.a == 0.0 && hyp.b == 0.0 {
        return Err(Error::parameter("(a, b) = (0, 0) is excluded"));
    }
    if grid.x() != x {
        return Err(Error::parameter(format!(
            "grid was built for X = {}, report wants X = {x}",
            grid.x()
        )));
    }
    let computed = compute_j(table, x, h)?.value;
    let main_term = j_main_term(x, h, hyp.c_prime)?;
    let e_term = envelope_e(x, h, hyp.mode)?;
    let r_ab_term = envelope_r_ab(x, h, hyp.a, hyp.b)?;
    let xf = x as f64;
    let envelope = xf + e_term + r_ab_term;
    let range = admissible_ranges(hyp, x, h, Direction::XiRangeForH)?;
    let mut advisory = None;
    if !range.advisory_ok {
        advisory = Some(format!(
            "window length {h} sits below the derived lower bound X^(a/(a+1)) (log X)^((b+4)/(a+1))"
        ));
    } else if range.lo > range.hi {
        advisory = Some("admissible xi bracket is empty at this scale".into());
    }
    let mut inputs = ReportInputs::bare(x as f64, "h", h).with_hypothesis(hyp);
    inputs.advisory = advisory;
    inputs.envelope_parts = Some(EnvelopeParts {
        x_term: xf,
        e_term,
        r_ab_term,
    });
    Ok(ResidualReport::new(computed, main_term, envelope, inputs))
}

/// Report for the truncated-second-moment direction: computed R(X, xi)
/// against 2X xi log(X xi) + cX xi with the displayed envelope.
pub fn theorem2_report(
    grid: &ExpSumGrid,
    x: u64,
    xi: f64,
    hyp: &AsymptoticHypothesis,
) -> Result<ResidualReport> {
    if hyp.a == 0.0 && hyp.b == 0.0 {
        return Err(Error::parameter("(a, b) = (0, 0) is excluded"));
    }
    if grid.x() != x {
        return Err(Error::parameter(format!(
            "grid was built for X = {}, report wants X = {x}",
            grid.x()
        )));
    }
    let computed = r_truncated_exact(grid, xi)?;
    let main_term = r_main_term(x, xi, hyp.c)?;
    let xf = x as f64;
    let (a, b) = (hyp.a, hyp.b);
    let envelope = (xf * xi).powf(3.0 / (3.0 + a)) / xf.ln().powf((b - a - 2.0) / (3.0 + a));
    let mut notes = Vec::new();
    if a == 0.0 && b <= 2.0 {
        notes.push("a = 0 needs b > 2 for the envelope to undercut the main term".to_string());
    }
    if xi < xf.powf(-0.5 + DEFAULT_EPSILON) {
        notes.push(format!(
            "xi = {xi} sits below the stated lower range X^(-1/2+eps)"
        ));
    }
    let mut inputs = ReportInputs::bare(x as f64, "xi", xi).with_hypothesis(hyp);
    if !notes.is_empty() {
        inputs.advisory = Some(notes.join("; "));
    }
    Ok(ResidualReport::new(computed, main_term, envelope, inputs))
}
