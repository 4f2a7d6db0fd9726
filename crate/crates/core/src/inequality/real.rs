use super::IneqError;
use crate::moments::{hyp_real_corr, MomentError, SERIES_TOLERANCE};
use crate::report::{CheckReport, Margin, Status};

/// Decision tolerance for float margins, relative to `max(1, |lhs|)`.
pub const REAL_TOLERANCE: f64 = 1e-9;

/// Real exponents `(y2, y3)` with `r = (y2+1)(y3+1) + 1` and
/// `t = 1/(r + (1 + 1/y2)(1 + 1/y3))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealGpiParams {
    pub y2: f64,
    pub y3: f64,
    pub r: f64,
    pub t: f64,
}

impl RealGpiParams {
    pub fn new(y2: f64, y3: f64) -> Result<Self, IneqError> {
        if !(y2 > 0.0 && y3 > 0.0 && y2.is_finite() && y3.is_finite()) {
            return Err(IneqError::BadRealExponents { y2, y3 });
        }
        let r = (y2 + 1.0) * (y3 + 1.0) + 1.0;
        let t = 1.0 / (r + (1.0 + 1.0 / y2) * (1.0 + 1.0 / y3));
        Ok(Self { y2, y3, r, t })
    }

    /// `H` with `m = y/2`.
    pub fn h(&self, z: f64) -> f64 {
        let (y2, y3, r) = (self.y2, self.y3, self.r);
        let s = (y2 + y3 + 2.0) / 2.0;
        let d = (y3 - y2) / 2.0;
        let rad = (d * (r * z - 1.0)).powi(2) + ((y2 + 1.0) * (y3 + 1.0)).powi(3) * z;
        (s * (r * z - 1.0) + rad.sqrt()) / (r * r * z - 1.0)
    }

    fn tag(&self, report: CheckReport) -> CheckReport {
        report.with("y2", self.y2).with("y3", self.y3)
    }
}

fn float_status(margin: f64, scale: f64) -> (Status, f64) {
    let tol = REAL_TOLERANCE * scale.abs().max(1.0);
    let status = if margin > tol {
        Status::Holds
    } else if margin < -tol {
        Status::Fails
    } else {
        Status::Indeterminate
    };
    (status, tol)
}

fn series_meta(report: CheckReport) -> CheckReport {
    report
        .with_meta("series_tail_bound", SERIES_TOLERANCE)
        .with_meta("at_unit_correlation", "Gauss summation via ln-Gamma")
}

fn check_corr(x: f64) -> Result<(), IneqError> {
    if !(x.abs() <= 1.0) {
        return Err(IneqError::CorrelationOutOfRange(x.to_string()));
    }
    Ok(())
}

/// Margin of the real-exponent GPI in normalized form:
/// `a^2 (y3+1) F(-y3/2-1,-y2/2;1/2;x^2) + (y2+1) F(-y3/2,-y2/2-1;1/2;x^2)
///  + 2ax (y3+1)(y2+1) F(-y3/2,-y2/2;3/2;x^2) - (a^2 + 1 + 2ax)`.
/// Returns `(margin, lhs)`.
pub fn gpi_real_margin(rp: &RealGpiParams, a: f64, x: f64) -> Result<(f64, f64), IneqError> {
    check_corr(x)?;
    let (y2, y3) = (rp.y2, rp.y3);
    let fa = hyp_real_corr(-y3 / 2.0 - 1.0, -y2 / 2.0, 0.5, x)?;
    let fb = hyp_real_corr(-y3 / 2.0, -y2 / 2.0 - 1.0, 0.5, x)?;
    let fc = hyp_real_corr(-y3 / 2.0, -y2 / 2.0, 1.5, x)?;
    let lhs = a * a * (y3 + 1.0) * fa + (y2 + 1.0) * fb + 2.0 * a * x * (y3 + 1.0) * (y2 + 1.0) * fc;
    Ok((lhs - (a * a + 1.0 + 2.0 * a * x), lhs))
}

pub fn check_gpi_real(rp: &RealGpiParams, a: f64, x: f64) -> Result<CheckReport, IneqError> {
    let (margin, lhs) = gpi_real_margin(rp, a, x)?;
    let (status, tol) = float_status(margin, lhs);
    let report = rp
        .tag(CheckReport::new("gpi_real", status))
        .with("a", a)
        .with("x", x)
        .with_margin(Margin::Float { value: margin, tolerance: tol });
    Ok(series_meta(report))
}

/// Real-exponent MRI at unit variances and correlation `x`; the comparison is
/// `F(-y2/2,-y3/2;3/2;x^2)/F(-y2/2,-y3/2;1/2;x^2)` against 1 or `H(x^2)`.
pub fn check_mri_real(rp: &RealGpiParams, x: f64) -> Result<CheckReport, IneqError> {
    check_corr(x)?;
    let base = rp.tag(CheckReport::new("mri_real", Status::Holds)).with("x", x);
    if x == 0.0 {
        return Ok(base
            .with_margin(Margin::Float { value: 0.0, tolerance: 0.0 })
            .with_note("equality: X2 and X3 independent"));
    }
    let z = x * x;
    let (a, b) = (-rp.y2 / 2.0, -rp.y3 / 2.0);
    let f1 = hyp_real_corr(a, b, 0.5, x)?;
    let f2 = hyp_real_corr(a, b, 1.5, x)?;
    let ratio = f2 / f1;
    let (branch, bound) = if z <= rp.t { ("covariance", 1.0) } else { ("h_bound", rp.h(z)) };
    let margin = (bound - ratio) * x.abs();
    let (status, tol) = float_status(margin, 1.0);
    let mut report = CheckReport { status, ..base }
        .with("branch", branch)
        .with("ratio", ratio)
        .with("bound", bound)
        .with_margin(Margin::Float { value: margin, tolerance: tol });
    if status == Status::Fails {
        report = report.with_witness(format!("x={x}"), margin);
    }
    Ok(series_meta(report))
}

/// Searches `x = k/grid_n` (`k = 1..=grid_n`) for a real-exponent MRI
/// violation. Points with `0.999 < |x| < 1` are skipped (series range).
pub fn find_mri_real_violation(rp: &RealGpiParams, grid_n: u32) -> Result<CheckReport, IneqError> {
    let mut found: Vec<(f64, f64)> = Vec::new();
    let mut skipped = 0usize;
    for k in 1..=grid_n {
        let x = k as f64 / grid_n as f64;
        match check_mri_real(rp, x) {
            Ok(r) if r.status == Status::Fails => {
                if let Some(Margin::Float { value, .. }) = r.margin {
                    found.push((x, value));
                }
            }
            Ok(_) => {}
            Err(IneqError::Moment(MomentError::CorrelationOutOfRange(_))) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let status = if found.is_empty() { Status::Fails } else { Status::Verified };
    let mut report = rp
        .tag(CheckReport::new("mri_real.violation_search", status))
        .with("grid", grid_n)
        .with("violations", found.len())
        .with("skipped", skipped);
    if let (Some(first), Some(last)) = (found.first(), found.last()) {
        let worst = found.iter().cloned().fold(first.clone(), |acc, v| if v.1 < acc.1 { v } else { acc });
        report = report
            .with_witness(format!("x={}", worst.0), worst.1)
            .with_note(format!("violating grid x range: [{}, {}]", first.0, last.0));
    }
    Ok(series_meta(report))
}
