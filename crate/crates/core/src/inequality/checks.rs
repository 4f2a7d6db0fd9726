use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{h_compare, h_value, refine_sign, s_poly, GpiParams, IneqError};
use crate::exactnum::{int, BigRational, RationalInterval};
use crate::gausshyp::{double_factorial_odd, half, hyp_poly, three_halves};
use crate::moments::{triple_even_moment, GaussianPair, TripleSpec};
use crate::polyring::MultiPoly;
use crate::report::{CheckReport, Margin, Status};

fn f1_f2(p: &GpiParams, z: &BigRational) -> (BigRational, BigRational) {
    let f1 = hyp_poly(p.m2(), p.m3(), &half()).eval_univariate(z).expect("univariate");
    let f2 = hyp_poly(p.m2(), p.m3(), &three_halves()).eval_univariate(z).expect("univariate");
    (f1, f2)
}

fn tag(report: CheckReport, p: &GpiParams) -> CheckReport {
    report.with("m2", p.m2()).with("m3", p.m3())
}

/// GPI margin `E[X1^2 X2^{2m2} X3^{2m3}] - E[X1^2] E[X2^{2m2}] E[X3^{2m3}]`
/// for `X1 = X2 + a X3`, unit-variance `(X2, X3)` with correlation `x`.
pub fn gpi_margin(p: &GpiParams, a: &BigRational, x: &BigRational) -> Result<BigRational, IneqError> {
    if x.abs() > BigRational::one() {
        return Err(IneqError::CorrelationOutOfRange(x.to_string()));
    }
    let triple = TripleSpec::new(a.clone(), x.clone())?;
    let lhs = triple_even_moment(&triple, p.m2(), p.m3());
    let e1 = BigRational::one() + a * a + int(2) * a * x;
    let marginals = BigRational::from_integer(double_factorial_odd(p.m2()) * double_factorial_odd(p.m3()));
    Ok(lhs - e1 * marginals)
}

pub fn check_gpi(p: &GpiParams, a: &BigRational, x: &BigRational) -> Result<CheckReport, IneqError> {
    let margin = gpi_margin(p, a, x)?;
    let status = if margin.is_negative() {
        Status::Fails
    } else {
        Status::Holds
    };
    let mut report = tag(CheckReport::new("gpi", status), p)
        .with("a", a)
        .with("x", x)
        .with_margin(Margin::exact(&margin));
    if margin.is_zero() {
        report = report.with_note("equality");
    }
    if status == Status::Fails {
        report = report.with_witness(format!("a={a}, x={x}"), &margin);
    }
    Ok(report)
}

/// Exact MRI evaluation. Both sides are `|Cov|` times a factor, and the
/// left factor is `f2(x^2)/f1(x^2)`, so the comparison reduces to
/// `f2/f1 <= 1` (when `x^2 <= t`) or `f2/f1 <= H(x^2)` (decided by [`h_compare`]).
pub fn check_mri(p: &GpiParams, pair: &GaussianPair, width: &BigRational) -> Result<CheckReport, IneqError> {
    let z = pair.corr_squared();
    let cov_abs = pair.cov().abs();
    let base = tag(CheckReport::new("mri", Status::Holds), p)
        .with("var2", pair.var2())
        .with("var3", pair.var3())
        .with("cov", pair.cov());
    if cov_abs.is_zero() {
        return Ok(base
            .with("branch", "covariance")
            .with_margin(Margin::exact(&BigRational::zero()))
            .with_note("equality: X2 and X3 independent"));
    }
    let (f1, f2) = f1_f2(p, &z);
    let ratio = &f2 / &f1;
    let lhs = &cov_abs * &ratio;
    if z <= *p.t() {
        let margin = &cov_abs * (BigRational::one() - &ratio);
        let status = if margin.is_negative() { Status::Fails } else { Status::Holds };
        let mut report = CheckReport { status, ..base }
            .with("branch", "covariance")
            .with("lhs", &lhs)
            .with_margin(Margin::exact(&margin));
        if status == Status::Fails {
            report = report.with_witness(format!("corr^2={z}"), &margin);
        }
        return Ok(report);
    }
    let order = h_compare(p, &z, &ratio)?;
    let status = match order {
        Ordering::Less => Status::Fails,
        _ => Status::Holds,
    };
    let h = h_value(p, &z, width)?;
    let margin = h.shift(&-ratio.clone()).scale(&cov_abs);
    let mut report = CheckReport { status, ..base }
        .with("branch", "h_bound")
        .with("lhs", &lhs)
        .with_margin(Margin::enclosure(&margin));
    if order == Ordering::Equal {
        report = report.with_note("equality");
    }
    if status == Status::Fails {
        report = report.with_witness(format!("corr^2={z}"), format!("f2/f1={ratio} > H"));
    }
    Ok(report)
}

/// Searches `x = k/grid_n`, `k = grid_n, ..., 1`, for a unit-variance MRI
/// violation. Succeeds (`verified`) when a violation is found.
pub fn find_mri_violation(p: &GpiParams, grid_n: u32, width: &BigRational) -> Result<CheckReport, IneqError> {
    let mut violations = Vec::new();
    for k in (1..=grid_n as i64).rev() {
        let x = BigRational::new(k.into(), (grid_n as i64).into());
        let pair = GaussianPair::unit(x.clone())?;
        let r = check_mri(p, &pair, width)?;
        if r.status == Status::Fails {
            violations.push((x, r));
        }
    }
    let status = if violations.is_empty() { Status::Fails } else { Status::Verified };
    let mut report = tag(CheckReport::new("mri.violation_search", status), p)
        .with("grid", grid_n)
        .with("violations", violations.len());
    if let Some((x, r)) = violations.first() {
        report = report.with_witness(format!("x={x}"), r.subject.get("lhs").cloned().unwrap_or_default());
        report.margin = r.margin.clone();
    }
    if let (Some((lo, _)), Some((hi, _))) = (violations.last(), violations.first()) {
        report = report.with_note(format!("violating grid x range: [{lo}, {hi}]"));
    }
    Ok(report)
}

fn open_unit_domain(p: &GpiParams, z: &BigRational) -> Result<(), IneqError> {
    if *z <= p.h_domain_lo() || *z >= BigRational::one() {
        return Err(IneqError::Domain {
            what: "hfri",
            z: z.to_string(),
            domain: format!("(1/r^2, 1) = ({}, 1)", p.h_domain_lo()),
        });
    }
    Ok(())
}

/// Ratio inequality `f1/f2 > 1/H(z)`, decided exactly as `S(z) > 0`.
pub fn hfri_check(p: &GpiParams, z: &BigRational) -> Result<CheckReport, IneqError> {
    hfri_check_with(p, &s_poly(p), z)
}

/// [`hfri_check`] with a precomputed `S` polynomial.
pub fn hfri_check_with(p: &GpiParams, s: &MultiPoly, z: &BigRational) -> Result<CheckReport, IneqError> {
    open_unit_domain(p, z)?;
    let value = s.eval_univariate(z)?;
    let status = if value.is_positive() { Status::Holds } else { Status::Fails };
    let mut report = tag(CheckReport::new("hfri", status), p)
        .with("z", z)
        .with_margin(Margin::exact(&value));
    if *z <= *p.t() {
        report = report.with_note("z <= t: outside the range where the ratio bound is needed");
    }
    if status == Status::Fails {
        report = report.with_witness(format!("z={z}"), &value);
    }
    Ok(report)
}

/// Enclosure of `f1/f2 - 1/H(z)`, refined until its sign is known or the cap is hit.
pub fn hfri_interval_margin(
    p: &GpiParams,
    z: &BigRational,
    width: &BigRational,
    refine_max: u32,
) -> Result<(RationalInterval, BigRational), IneqError> {
    open_unit_domain(p, z)?;
    let (f1, f2) = f1_f2(p, z);
    let ratio = f1 / f2;
    refine_sign(width, refine_max, |w| {
        let h = h_value(p, z, w)?;
        Ok(h.recip()?.scale(&-BigRational::one()).shift(&ratio))
    })
}

/// The squared form of the ratio inequality before any rewriting:
/// `[(2m2+1) F(-m2-1,-m3;1/2;z) - 1][(2m3+1) F(-m2,-m3-1;1/2;z) - 1] - z[(r-1) f2 - 1]^2`.
pub fn squared_ratio_margin(p: &GpiParams, z: &BigRational) -> BigRational {
    let c = half();
    let one = BigRational::one();
    let fa = hyp_poly(p.m2() + 1, p.m3(), &c).eval_univariate(z).expect("univariate");
    let fb = hyp_poly(p.m2(), p.m3() + 1, &c).eval_univariate(z).expect("univariate");
    let (_, f2) = f1_f2(p, z);
    let left = (int(2 * p.m2() as i64 + 1) * fa - &one) * (int(2 * p.m3() as i64 + 1) * fb - &one);
    let inner = p.rm1() * f2 - &one;
    left - z * &inner * &inner
}

/// Lower bounds on `H`: `H > 1/2` on `(1/r^2, 1/r]` and `H > 1/7` on `(1/r, 2.75/(m2 m3)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HBoundBranch {
    Half,
    Seventh,
}

impl HBoundBranch {
    pub fn bound(self) -> BigRational {
        match self {
            HBoundBranch::Half => BigRational::new(1.into(), 2.into()),
            HBoundBranch::Seventh => BigRational::new(1.into(), 7.into()),
        }
    }

    /// `(lo, hi]` on which the bound is claimed.
    pub fn domain(self, p: &GpiParams) -> (BigRational, BigRational) {
        let inv_r = p.r().recip();
        match self {
            HBoundBranch::Half => (p.h_domain_lo(), inv_r),
            HBoundBranch::Seventh => (inv_r, p.case_split().min(BigRational::one())),
        }
    }
}

/// Exact check of the `H` lower bound at one point.
pub fn h_lower_bound_check(p: &GpiParams, z: &BigRational, which: HBoundBranch) -> Result<CheckReport, IneqError> {
    let (lo, hi) = which.domain(p);
    if *z <= lo || *z > hi {
        return Err(IneqError::Domain {
            what: "H lower bound",
            z: z.to_string(),
            domain: format!("({lo}, {hi}]"),
        });
    }
    let k = which.bound();
    let order = h_compare(p, z, &k)?;
    let status = if order == Ordering::Greater { Status::Holds } else { Status::Fails };
    let mut report = tag(CheckReport::new(format!("h_lower_bound.{}", branch_name(which)), status), p)
        .with("z", z)
        .with("bound", &k);
    if status == Status::Fails {
        report = report.with_witness(format!("z={z}"), "H <= bound");
    }
    Ok(report)
}

fn branch_name(which: HBoundBranch) -> &'static str {
    match which {
        HBoundBranch::Half => "half",
        HBoundBranch::Seventh => "seventh",
    }
}
