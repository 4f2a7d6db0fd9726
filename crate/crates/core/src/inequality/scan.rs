use std::str::FromStr;

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    h_slope_margin, g_value, h_lower_bound_check, h_value, hfri_check_with, refine_sign, radical_margin,
    s_poly, GpiParams, IneqError, HBoundBranch,
};
use crate::exactnum::{int, BigRational, RationalInterval, Sign};
use crate::report::{combine, CheckReport, Margin, PointVerdict, Status};

/// Named predicates that can be sampled over a `z` interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanPredicate {
    /// `S(z) > 0` (exact).
    Hfri,
    /// `G(z) < 0` (enclosure).
    GNegative,
    /// The `H, H'` inequality obtained from `G' = 0` (enclosure).
    #[serde(alias = "aug13v")]
    HSlope,
    /// Its radical-separated form `L(z) > N(z)/sqrt(D(z))` (enclosure).
    #[serde(alias = "rrrr")]
    HSlopeRadical,
    /// `H(z) > 1/2` (exact).
    HHalf,
    /// `H(z) > 1/7` (exact).
    HSeventh,
}

impl ScanPredicate {
    pub const ALL: [ScanPredicate; 6] = [
        ScanPredicate::Hfri,
        ScanPredicate::GNegative,
        ScanPredicate::HSlope,
        ScanPredicate::HSlopeRadical,
        ScanPredicate::HHalf,
        ScanPredicate::HSeventh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScanPredicate::Hfri => "hfri",
            ScanPredicate::GNegative => "g_negative",
            ScanPredicate::HSlope => "h_slope",
            ScanPredicate::HSlopeRadical => "h_slope_radical",
            ScanPredicate::HHalf => "h_half",
            ScanPredicate::HSeventh => "h_seventh",
        }
    }

    /// Default interval of the predicate for the given exponents.
    pub fn default_interval(self, p: &GpiParams) -> ScanInterval {
        let one = BigRational::one();
        match self {
            ScanPredicate::Hfri => ScanInterval::open(p.t().clone(), one),
            ScanPredicate::GNegative | ScanPredicate::HSlope => ScanInterval::open(p.case_split(), one),
            ScanPredicate::HSlopeRadical => ScanInterval::open(p.case_split(), p.radical_upper()),
            ScanPredicate::HHalf => {
                let (lo, hi) = HBoundBranch::Half.domain(p);
                ScanInterval::left_open(lo, hi)
            }
            ScanPredicate::HSeventh => {
                let (lo, hi) = HBoundBranch::Seventh.domain(p);
                ScanInterval::left_open(lo, hi)
            }
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, ScanPredicate::Hfri | ScanPredicate::HHalf | ScanPredicate::HSeventh)
    }
}

impl FromStr for ScanPredicate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('-', "_");
        // Older short names, still accepted on the command line.
        let norm = match norm.as_str() {
            "aug13v" => "h_slope".to_string(),
            "rrrr" => "h_slope_radical".to_string(),
            _ => norm,
        };
        ScanPredicate::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .ok_or_else(|| format!("unknown predicate `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanInterval {
    pub lo: BigRational,
    pub hi: BigRational,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl ScanInterval {
    pub fn open(lo: BigRational, hi: BigRational) -> Self {
        Self { lo, hi, lo_open: true, hi_open: true }
    }

    pub fn left_open(lo: BigRational, hi: BigRational) -> Self {
        Self { lo, hi, lo_open: true, hi_open: false }
    }

    fn describe(&self) -> String {
        format!(
            "{}{}, {}{}",
            if self.lo_open { "(" } else { "[" },
            self.lo,
            self.hi,
            if self.hi_open { ")" } else { "]" }
        )
    }

    /// `z_k = lo + k (hi - lo)/(n - 1)`, with open ends moved inward by `(hi - lo)/(10 n)`.
    pub fn grid(&self, n: usize) -> Result<(Vec<BigRational>, BigRational), IneqError> {
        if n < 2 {
            return Err(IneqError::GridTooSmall(n));
        }
        let span = &self.hi - &self.lo;
        let step = &span / int(n as i64 - 1);
        let nudge = &span / int(10 * n as i64);
        let points = (0..n)
            .map(|k| {
                let mut z = &self.lo + &step * int(k as i64);
                if k == 0 && self.lo_open {
                    z += &nudge;
                }
                if k == n - 1 && self.hi_open {
                    z -= &nudge;
                }
                z
            })
            .collect();
        Ok((points, nudge))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanOptions {
    pub grid_n: usize,
    pub width: BigRational,
    pub refine_max: u32,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid_n: 101,
            width: BigRational::new(1.into(), 1_000_000.into()),
            refine_max: 20,
        }
    }
}

fn enclosure_status(iv: &RationalInterval) -> Status {
    match iv.sign() {
        Sign::Positive => Status::Holds,
        Sign::Indeterminate => Status::Indeterminate,
        Sign::Negative | Sign::Zero => Status::Fails,
    }
}

fn eval_point(
    pred: ScanPredicate,
    p: &GpiParams,
    s: Option<&crate::polyring::MultiPoly>,
    index: usize,
    z: &BigRational,
    opts: &ScanOptions,
) -> Result<PointVerdict, IneqError> {
    let refined = |f: &dyn Fn(&BigRational) -> Result<RationalInterval, IneqError>| {
        refine_sign(&opts.width, opts.refine_max, f)
    };
    let (status, margin, width) = match pred {
        ScanPredicate::Hfri => {
            let r = hfri_check_with(p, s.expect("S precomputed"), z)?;
            (r.status, r.margin.expect("exact margin"), None)
        }
        ScanPredicate::HHalf | ScanPredicate::HSeventh => {
            let which = if pred == ScanPredicate::HHalf { HBoundBranch::Half } else { HBoundBranch::Seventh };
            let r = h_lower_bound_check(p, z, which)?;
            let h = h_value(p, z, &opts.width)?.shift(&-which.bound());
            (r.status, Margin::enclosure(&h), None)
        }
        ScanPredicate::GNegative => {
            // Reported margin is -G so that positive means the predicate holds.
            let (iv, w) = refined(&|w| Ok(g_value(p, z, w)?.scale(&-BigRational::one())))?;
            (enclosure_status(&iv), Margin::enclosure(&iv), Some(w))
        }
        ScanPredicate::HSlope => {
            let (iv, w) = refined(&|w| h_slope_margin(p, z, w))?;
            (enclosure_status(&iv), Margin::enclosure(&iv), Some(w))
        }
        ScanPredicate::HSlopeRadical => {
            let (iv, w) = refined(&|w| radical_margin(p, z, w))?;
            (enclosure_status(&iv), Margin::enclosure(&iv), Some(w))
        }
    };
    Ok(PointVerdict {
        index,
        z: z.to_string(),
        status,
        margin,
        sqrt_width: width.map(|w| w.to_string()),
    })
}

/// Evaluates `pred` on a uniform rational grid over `interval`. Points are
/// evaluated in parallel and reported in index order.
pub fn scan(
    pred: ScanPredicate,
    p: &GpiParams,
    interval: &ScanInterval,
    opts: &ScanOptions,
) -> Result<CheckReport, IneqError> {
    let (points, nudge) = interval.grid(opts.grid_n)?;
    let s = (pred == ScanPredicate::Hfri).then(|| s_poly(p));
    let verdicts: Vec<PointVerdict> = points
        .par_iter()
        .enumerate()
        .map(|(k, z)| eval_point(pred, p, s.as_ref(), k, z, opts))
        .collect::<Result<_, _>>()?;

    let status = combine(verdicts.iter().map(|v| v.status), Status::Holds);
    let failures: Vec<&PointVerdict> = verdicts.iter().filter(|v| v.status == Status::Fails).collect();
    let indeterminate: Vec<usize> = verdicts
        .iter()
        .filter(|v| v.status == Status::Indeterminate)
        .map(|v| v.index)
        .collect();
    let mut report = CheckReport::new(format!("scan.{}", pred.name()), status)
        .with("m2", p.m2())
        .with("m3", p.m3())
        .with("interval", interval.describe())
        .with("grid", opts.grid_n)
        .with("endpoint_nudge", &nudge)
        .with("failures", failures.len())
        .with("indeterminate", indeterminate.len())
        .with("evaluation", if pred.is_exact() { "exact" } else { "enclosure" });
    if !pred.is_exact() {
        report = report
            .with("width", &opts.width)
            .with("refine_max", opts.refine_max);
    }
    if let Some(first) = failures.first() {
        report = report.with_witness(format!("z={}", first.z), format!("point {}", first.index));
    }
    if !indeterminate.is_empty() {
        report = report.with_note(format!("indeterminate point indices: {indeterminate:?}"));
    }
    report.points = verdicts;
    Ok(report)
}
