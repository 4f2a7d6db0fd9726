use std::fs;

use gpi_core::bundled;
use gpi_core::exactnum::{int, rat, to_f64, BigRational};
use gpi_core::inequality::{
    check_gpi, check_gpi_real, check_mri, f_at_origin_expected, f_truncated_poly, find_mri_real_violation,
    find_mri_violation, g_poly, h_poly, hfri_check_with, hfri_interval_margin, make_params, s_poly,
    s_poly_symbolic, scan, GpiParams, RealGpiParams, ScanInterval, ScanOptions, ScanPredicate,
};
use gpi_core::exactnum::Sign;
use gpi_core::moments::{
    abs_moment_real, even_moment, mc_moment, mixed_abs_moment_real, odd_moment, wick_moment, GaussianPair,
    McExponents, MixedKind, MC_GENERATOR,
};
use gpi_core::polyring::MultiPoly;
use gpi_core::report::{CheckReport, Margin, Status};
use gpi_core::soscert::{verify_bracket_positivity, verify_nonneg_coeffs, verify_sos, SosCertificate};
use num_traits::Signed;
use rayon::prelude::*;

use crate::args::{CheckKind, Command, ExpandTarget, SosAction};
use crate::config::RunConfig;
use crate::error::CliError;

/// Monte Carlo agreement threshold, in standard errors.
pub const MC_SIGMAS: f64 = 4.0;

pub fn execute(cmd: &Command, cfg: &mut RunConfig) -> Result<Vec<CheckReport>, CliError> {
    match cmd {
        Command::Sos { action: SosAction::Verify { all, bracket, file } } => {
            sos_verify(cfg, *all, *bracket, file.as_deref())
        }
        Command::Expand { target, compare, compare_reference } => match target {
            ExpandTarget::H => expand_h(cfg, *compare),
            ExpandTarget::G => Ok(vec![expand_g(*compare_reference)]),
            ExpandTarget::S => expand_s(cfg),
        },
        Command::Check { kind, find_violation } => match kind {
            CheckKind::Gpi => check_gpi_cmd(cfg),
            CheckKind::Mri => check_mri_cmd(cfg, *find_violation),
            CheckKind::Hfri => check_hfri_cmd(cfg),
            CheckKind::GpiReal => check_gpi_real_cmd(cfg, *find_violation),
        },
        Command::Scan { predicate } => scan_cmd(cfg, *predicate),
        Command::Oracle { .. } => oracle_cmd(cfg),
        Command::Params { .. } => params_cmd(cfg),
    }
}

fn params(cfg: &RunConfig) -> Result<GpiParams, CliError> {
    let (m2, m3) = cfg.require_m()?;
    Ok(make_params(m2, m3)?)
}

fn h_index(cfg: &RunConfig) -> Result<u32, CliError> {
    match cfg.m2 {
        Some(m2 @ 1..=7) => Ok(m2),
        Some(m2) => Err(CliError::Usage(format!("--m2 must be in 1..=7 for h (got {m2})"))),
        None => Err(CliError::Usage("this command needs --m2".into())),
    }
}

fn sos_verify(
    cfg: &RunConfig,
    all: bool,
    bracket: bool,
    file: Option<&std::path::Path>,
) -> Result<Vec<CheckReport>, CliError> {
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cert = SosCertificate::from_json_str(&text)?;
        return Ok(vec![verify_sos(&cert)?.with("file", path.display())]);
    }
    let indices: Vec<u32> = if all || cfg.m2.is_none() { (1..=7).collect() } else { vec![h_index(cfg)?] };
    let mut reports: Vec<CheckReport> = indices
        .par_iter()
        .map(|&m2| Ok(verify_sos(&SosCertificate::bundled(m2)?)?))
        .collect::<Result<_, CliError>>()?;
    if bracket {
        let brackets: Vec<CheckReport> = indices
            .par_iter()
            .map(|&m2| Ok(verify_bracket_positivity(m2)?))
            .collect::<Result<_, CliError>>()?;
        reports.extend(brackets);
    }
    Ok(reports)
}

fn describe_poly(report: CheckReport, p: &MultiPoly) -> CheckReport {
    let mut r = report
        .with("terms", p.len())
        .with("total_degree", p.total_degree())
        .with("only_even_exponents", p.only_even_exponents());
    if let Some(min) = p.min_coefficient() {
        r = r.with("min_coefficient", min);
    }
    r
}

fn expand_h(cfg: &RunConfig, compare: bool) -> Result<Vec<CheckReport>, CliError> {
    let m2 = h_index(cfg)?;
    let h = h_poly(m2)?;
    let mut report = describe_poly(CheckReport::new("expand.h", Status::Verified), &h)
        .with("m2", m2)
        .with_polynomial(&h);
    if compare {
        let reference = bundled::h_expansion(m2).expect("bundled for 1..=7");
        let diff = &h - &reference;
        report = report.with("compared_with", "bundled reference expansion");
        if !diff.is_zero() {
            report.status = Status::ResidualNonzero;
            report = report.with_residual(&diff);
        }
    }
    Ok(vec![report])
}

fn expand_g(compare_reference: bool) -> CheckReport {
    let g = g_poly();
    let degrees = ["a", "b", "c"].map(|v| g.degree_in(v).expect("g ring"));
    let caps = [16, 16, 18];
    let nonneg = verify_nonneg_coeffs(&g, "g");
    let f_origin = f_truncated_poly()
        .eval_at(&[("x2", int(8)), ("x3", int(8)), ("u", int(0))])
        .expect("f ring");
    let mut status = nonneg.status;
    let mut report = CheckReport::new("expand.g", Status::Verified);
    if !g.only_even_exponents() || degrees.iter().zip(caps).any(|(d, c)| *d > c) || f_origin != f_at_origin_expected() {
        status = Status::Fails;
    }
    report = describe_poly(report, &g)
        .with("degrees", format!("{degrees:?}"))
        .with("f_at_8_8_0", &f_origin);
    report.witnesses = nonneg.witnesses;
    if compare_reference {
        let reference = bundled::g_expansion();
        report = report
            .with("reference_terms", reference.len())
            .with("reference_constant_term", reference.constant_term());
        if let Some(min) = reference.min_coefficient() {
            report = report.with("reference_min_coefficient", min);
        }
        match g.ratio_to(&reference) {
            Some(k) if k.is_positive() => {
                report = report
                    .with("scalar", &k)
                    .with_note(format!("regenerated g = {k} * reference expansion"));
            }
            _ => {
                status = Status::ResidualNonzero;
                report = report.with_note("regenerated g is not a positive multiple of the reference expansion");
            }
        }
    } else {
        report = report.with_polynomial(&g);
    }
    report.status = status;
    report
}

fn expand_s(cfg: &RunConfig) -> Result<Vec<CheckReport>, CliError> {
    let report = match (cfg.m2, cfg.m3) {
        (Some(_), Some(_)) => {
            let p = params(cfg)?;
            let s = s_poly(&p);
            describe_poly(CheckReport::new("expand.s", Status::Verified), &s)
                .with("m2", p.m2())
                .with("m3", p.m3())
                .with_polynomial(&s)
        }
        (Some(m2), None) if m2 >= 1 => {
            let s = s_poly_symbolic(m2);
            describe_poly(CheckReport::new("expand.s", Status::Verified), &s)
                .with("m2", m2)
                .with("m3", "symbolic")
                .with_polynomial(&s)
        }
        _ => return Err(CliError::Usage("expand s needs --m2 (and optionally --m3)".into())),
    };
    Ok(vec![report])
}

/// `k/den` for `k = -n..=n`.
fn symmetric_grid(n: i64, den: i64) -> Vec<BigRational> {
    (-n..=n).map(|k| rat(k, den)).collect()
}

fn check_gpi_cmd(cfg: &RunConfig) -> Result<Vec<CheckReport>, CliError> {
    let p = params(cfg)?;
    let a_values = cfg.rational_opt("a", &cfg.a)?.map(|a| vec![a]).unwrap_or_else(|| symmetric_grid(3, 4));
    let x_values = cfg.rational_opt("x", &cfg.x)?.map(|x| vec![x]).unwrap_or_else(|| symmetric_grid(10, 10));
    let pairs: Vec<(BigRational, BigRational)> = a_values
        .iter()
        .flat_map(|a| x_values.iter().map(move |x| (a.clone(), x.clone())))
        .collect();
    Ok(pairs
        .par_iter()
        .map(|(a, x)| check_gpi(&p, a, x))
        .collect::<Result<_, _>>()?)
}

fn check_mri_cmd(cfg: &mut RunConfig, find_violation: bool) -> Result<Vec<CheckReport>, CliError> {
    let p = params(cfg)?;
    let width = cfg.width()?;
    if find_violation {
        let n = cfg.grid_or(100);
        return Ok(vec![find_mri_violation(&p, n as u32, &width)?]);
    }
    let xs = cfg.rational_opt("x", &cfg.x)?.map(|x| vec![x]).unwrap_or_else(|| symmetric_grid(10, 10));
    Ok(xs
        .par_iter()
        .map(|x| {
            let pair = GaussianPair::unit(x.clone())?;
            Ok(check_mri(&p, &pair, &width)?)
        })
        .collect::<Result<_, CliError>>()?)
}

/// Exact `S(z) > 0` together with the sign of the interval enclosure of
/// `f1/f2 - 1/H`; the two must agree.
fn hfri_point(p: &GpiParams, s: &MultiPoly, z: &BigRational, cfg: &RunConfig) -> Result<CheckReport, CliError> {
    let exact = hfri_check_with(p, s, z)?;
    let (iv, w) = hfri_interval_margin(p, z, &cfg.width()?, cfg.refine_max())?;
    let interval_status = match iv.sign() {
        Sign::Positive => Status::Holds,
        Sign::Negative | Sign::Zero => Status::Fails,
        Sign::Indeterminate => Status::Indeterminate,
    };
    let mut report = exact
        .with("interval_margin", format!("[{}, {}]", iv.lo(), iv.hi()))
        .with("interval_width", &w);
    if interval_status == Status::Indeterminate {
        report = report.with_note("interval sign indeterminate after refinement");
        if report.status == Status::Holds {
            report.status = Status::Indeterminate;
        }
    } else if interval_status != report.status {
        report = report.with_note("exact and interval evaluations disagree");
        report.status = Status::Fails;
    }
    Ok(report)
}

fn check_hfri_cmd(cfg: &mut RunConfig) -> Result<Vec<CheckReport>, CliError> {
    let p = params(cfg)?;
    let s = s_poly(&p);
    let zs = match cfg.rational_opt("z", &cfg.z)? {
        Some(z) => vec![z],
        None => {
            let n = cfg.grid_or(101);
            ScanInterval::open(p.h_domain_lo(), int(1)).grid(n)?.0
        }
    };
    let cfg = &*cfg;
    Ok(zs
        .par_iter()
        .map(|z| hfri_point(&p, &s, z, cfg))
        .collect::<Result<_, _>>()?)
}

fn check_gpi_real_cmd(cfg: &mut RunConfig, find_violation: bool) -> Result<Vec<CheckReport>, CliError> {
    let (y2, y3) = cfg.require_y()?;
    let rp = RealGpiParams::new(y2, y3)?;
    if find_violation {
        let n = cfg.grid_or(1000);
        return Ok(vec![find_mri_real_violation(&rp, n as u32)?]);
    }
    let a_values = cfg.rational_opt("a", &cfg.a)?.map(|a| vec![a]).unwrap_or_else(|| symmetric_grid(3, 4));
    let x_values = cfg.rational_opt("x", &cfg.x)?.map(|x| vec![x]).unwrap_or_else(|| symmetric_grid(10, 10));
    let mut out = Vec::new();
    for a in &a_values {
        for x in &x_values {
            out.push(check_gpi_real(&rp, to_f64(a), to_f64(x))?);
        }
    }
    Ok(out)
}

fn scan_cmd(cfg: &mut RunConfig, pred: ScanPredicate) -> Result<Vec<CheckReport>, CliError> {
    let p = params(cfg)?;
    let mut interval = pred.default_interval(&p);
    if let Some(lo) = cfg.rational_opt("z-lo", &cfg.z_lo)? {
        interval.lo = lo;
    }
    if let Some(hi) = cfg.rational_opt("z-hi", &cfg.z_hi)? {
        interval.hi = hi;
    }
    if interval.lo >= interval.hi {
        return Err(CliError::Usage(format!("empty scan interval [{}, {}]", interval.lo, interval.hi)));
    }
    let default_grid = if pred.is_exact() && pred != ScanPredicate::Hfri { 51 } else { 101 };
    let opts = ScanOptions {
        grid_n: cfg.grid_or(default_grid),
        width: cfg.width()?,
        refine_max: cfg.refine_max(),
    };
    Ok(vec![scan(pred, &p, &interval, &opts)?])
}

/// The correlations used by the exact oracle comparison: tenths in
/// `[-1, 1]` plus four off-grid values.
pub fn oracle_correlations() -> Vec<BigRational> {
    let mut xs = symmetric_grid(10, 10);
    xs.extend([rat(-2, 7), rat(-1, 3), rat(1, 3), rat(2, 7)]);
    xs
}

fn oracle_exact(m2: u32, m3: u32, xs: &[BigRational]) -> Result<CheckReport, CliError> {
    let mut mismatches = Vec::new();
    for x in xs {
        let pair = GaussianPair::unit(x.clone())?;
        if even_moment(m2, m3, &pair) != wick_moment(2 * m2, 2 * m3, &pair) {
            mismatches.push(format!("even at x={x}"));
        }
        if odd_moment(m2, m3, &pair) != wick_moment(2 * m2 + 1, 2 * m3 + 1, &pair) {
            mismatches.push(format!("odd at x={x}"));
        }
    }
    let status = if mismatches.is_empty() { Status::Verified } else { Status::Fails };
    let mut r = CheckReport::new("oracle.moments", status)
        .with("m2", m2)
        .with("m3", m3)
        .with("comparisons", 2 * xs.len());
    for m in mismatches {
        r = r.with_witness(m, "formula != Wick recursion");
    }
    Ok(r)
}

fn oracle_mc(cfg: &RunConfig, y2: f64, y3: f64) -> Result<Vec<CheckReport>, CliError> {
    let x = to_f64(&cfg.rational_opt("x", &cfg.x)?.unwrap_or_else(|| rat(1, 2)));
    let (n, seed) = (cfg.samples(), cfg.seed());
    let cases: [(&str, f64, McExponents); 3] = [
        (
            "abs_moment",
            abs_moment_real(y2)?,
            McExponents { p: y2, q: 0.0, signed2: false, signed3: false },
        ),
        (
            "even_shift2",
            mixed_abs_moment_real(MixedKind::EvenShift2, y2, y3, x)?,
            McExponents { p: y2, q: y3 + 2.0, signed2: false, signed3: false },
        ),
        (
            "odd_signed",
            mixed_abs_moment_real(MixedKind::OddSigned, y2, y3, x)?,
            McExponents { p: y2 + 1.0, q: y3 + 1.0, signed2: true, signed3: true },
        ),
    ];
    Ok(cases
        .into_iter()
        .map(|(name, formula, exps)| {
            let est = mc_moment(exps, 1.0, 1.0, x, n, seed);
            let z = (formula - est.mean) / est.stderr;
            let status = if z.abs() <= MC_SIGMAS { Status::Holds } else { Status::Fails };
            CheckReport::new(format!("oracle.mc.{name}"), status)
                .with("y2", y2)
                .with("y3", y3)
                .with("x", x)
                .with("formula", formula)
                .with("mc_mean", est.mean)
                .with("mc_stderr", est.stderr)
                .with("z_score", z)
                .with_margin(Margin::Float { value: MC_SIGMAS - z.abs(), tolerance: 0.0 })
                .with_meta("generator", MC_GENERATOR)
                .with_meta("samples", n)
                .with_meta("seed", seed)
        })
        .collect())
}

fn oracle_cmd(cfg: &RunConfig) -> Result<Vec<CheckReport>, CliError> {
    if cfg.y2.is_some() || cfg.y3.is_some() {
        let (y2, y3) = cfg.require_y()?;
        return oracle_mc(cfg, y2, y3);
    }
    let xs = match cfg.rational_opt("x", &cfg.x)? {
        Some(x) => vec![x],
        None => oracle_correlations(),
    };
    let pairs: Vec<(u32, u32)> = match (cfg.m2, cfg.m3) {
        (Some(m2), Some(m3)) => vec![(m2, m3)],
        (None, None) => (0..=8).flat_map(|a| (0..=8).map(move |b| (a, b))).collect(),
        _ => return Err(CliError::Usage("give both --m2 and --m3, or neither".into())),
    };
    pairs.par_iter().map(|&(m2, m3)| oracle_exact(m2, m3, &xs)).collect()
}

fn params_cmd(cfg: &RunConfig) -> Result<Vec<CheckReport>, CliError> {
    let p = params(cfg)?;
    let summary = serde_json::to_value(p.summary()).expect("summary serializes");
    let mut report = CheckReport::new("params", Status::Verified);
    if let serde_json::Value::Object(map) = summary {
        for (k, v) in map {
            let text = match v {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            report = report.with(&k, text);
        }
    }
    Ok(vec![report])
}
