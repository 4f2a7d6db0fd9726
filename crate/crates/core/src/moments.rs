//! Gaussian product moments.
//!
//! Integer exponents are handled exactly through the hypergeometric moment
//! formulas, with an independent Stein/Wick recursion as oracle. Real
//! exponents (unit variances only) go through double-precision series and a
//! seeded Monte Carlo estimator.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::exactnum::{int, BigRational};
use crate::gausshyp::{double_factorial_odd, half, hyp_poly, three_halves};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("variances must be positive (got {var2}, {var3})")]
    NonPositiveVariance { var2: String, var3: String },
    #[error("covariance {cov} exceeds sqrt(var2*var3)")]
    CovarianceTooLarge { cov: String },
    #[error("|x| = {0} is outside the convergent range; need |x| < 1 (or exactly 1 where supported)")]
    CorrelationOutOfRange(f64),
    #[error("series did not reach tolerance within {0} terms")]
    NoConvergence(usize),
    #[error("invalid exponent {0}")]
    BadExponent(f64),
}

/// A centered bivariate Gaussian law for `(X2, X3)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianPair {
    var2: BigRational,
    var3: BigRational,
    cov: BigRational,
}

impl GaussianPair {
    pub fn new(var2: BigRational, var3: BigRational, cov: BigRational) -> Result<Self, MomentError> {
        if !var2.is_positive() || !var3.is_positive() {
            return Err(MomentError::NonPositiveVariance {
                var2: var2.to_string(),
                var3: var3.to_string(),
            });
        }
        if &cov * &cov > &var2 * &var3 {
            return Err(MomentError::CovarianceTooLarge {
                cov: cov.to_string(),
            });
        }
        Ok(Self { var2, var3, cov })
    }

    /// Unit variances with correlation `x`.
    pub fn unit(x: BigRational) -> Result<Self, MomentError> {
        Self::new(BigRational::one(), BigRational::one(), x)
    }

    pub fn var2(&self) -> &BigRational {
        &self.var2
    }

    pub fn var3(&self) -> &BigRational {
        &self.var3
    }

    pub fn cov(&self) -> &BigRational {
        &self.cov
    }

    /// `Corr(X2, X3)^2`, always rational.
    pub fn corr_squared(&self) -> BigRational {
        &self.cov * &self.cov / (&self.var2 * &self.var3)
    }
}

/// `(X1, X2, X3)` with unit-variance `X2, X3` and `X1 = X2 + a X3`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSpec {
    pub pair: GaussianPair,
    pub a: BigRational,
}

impl TripleSpec {
    pub fn new(a: BigRational, x: BigRational) -> Result<Self, MomentError> {
        Ok(Self {
            pair: GaussianPair::unit(x)?,
            a,
        })
    }
}

fn big(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

/// `E[X^{2m}] = (2m-1)!! var^m`.
pub fn marginal_even(m: u32, var: &BigRational) -> BigRational {
    big(double_factorial_odd(m)) * num_traits::pow(var.clone(), m as usize)
}

/// `E[X2^{2m2} X3^{2m3}] = (2m2-1)!!(2m3-1)!! var2^m2 var3^m3 F(-m2,-m3;1/2;x^2)`.
pub fn even_moment(m2: u32, m3: u32, pair: &GaussianPair) -> BigRational {
    let f = hyp_poly(m2, m3, &half())
        .eval_univariate(&pair.corr_squared())
        .expect("univariate");
    marginal_even(m2, &pair.var2) * marginal_even(m3, &pair.var3) * f
}

/// `E[X2^{2m2+1} X3^{2m3+1}] = (2m2+1)!!(2m3+1)!! var2^m2 var3^m3 cov F(-m2,-m3;3/2;x^2)`.
pub fn odd_moment(m2: u32, m3: u32, pair: &GaussianPair) -> BigRational {
    let f = hyp_poly(m2, m3, &three_halves())
        .eval_univariate(&pair.corr_squared())
        .expect("univariate");
    big(double_factorial_odd(m2 + 1) * double_factorial_odd(m3 + 1))
        * num_traits::pow(pair.var2.clone(), m2 as usize)
        * num_traits::pow(pair.var3.clone(), m3 as usize)
        * &pair.cov
        * f
}

/// `E[X2^p X3^q]` by the recursion `M(p,q) = (p-1) var2 M(p-2,q) + q cov M(p-1,q-1)`.
/// The memo table is local to the call.
pub fn wick_moment(p: u32, q: u32, pair: &GaussianPair) -> BigRational {
    if (p + q) % 2 == 1 {
        return BigRational::zero();
    }
    let (p, q) = (p as usize, q as usize);
    let mut table = vec![vec![BigRational::zero(); q + 1]; p + 1];
    table[0][0] = BigRational::one();
    for j in 2..=q {
        table[0][j] = int(j as i64 - 1) * &pair.var3 * &table[0][j - 2];
    }
    for i in 1..=p {
        for j in 0..=q {
            if (i + j) % 2 == 1 {
                continue;
            }
            let mut v = BigRational::zero();
            if i >= 2 {
                v += int(i as i64 - 1) * &pair.var2 * &table[i - 2][j];
            }
            if j >= 1 {
                v += int(j as i64) * &pair.cov * &table[i - 1][j - 1];
            }
            table[i][j] = v;
        }
    }
    table[p][q].clone()
}

/// `E[(X2 + a X3)^2 X2^{2m2} X3^{2m3}]`.
pub fn triple_even_moment(triple: &TripleSpec, m2: u32, m3: u32) -> BigRational {
    let a = &triple.a;
    a * a * even_moment(m2, m3 + 1, &triple.pair)
        + even_moment(m2 + 1, m3, &triple.pair)
        + int(2) * a * odd_moment(m2, m3, &triple.pair)
}

// ---------------------------------------------------------------------------
// Real exponents (unit variances).

/// Target size of the truncated tail in the float series, relative to
/// `max(1, |partial sum|)`.
pub const SERIES_TOLERANCE: f64 = 1e-12;
/// Largest `|x|` handled by the series; `|x| = 1` uses Gauss's summation instead.
pub const MAX_SERIES_CORRELATION: f64 = 0.999;
const MAX_SERIES_TERMS: usize = 2_000_000;

/// Description of the Monte Carlo generator, for report metadata.
pub const MC_GENERATOR: &str =
    "ChaCha8 (rand_chacha), one stream per 65536-sample block; normals via ziggurat (rand_distr::StandardNormal)";

/// `F(a, b; c; z)` in double precision for `0 <= z < 1`, stopping once a
/// ratio bound on the tail is below [`SERIES_TOLERANCE`].
pub fn hyp_real(a: f64, b: f64, c: f64, z: f64) -> Result<f64, MomentError> {
    if !(0.0..1.0).contains(&z) || c <= 0.0 {
        return Err(MomentError::CorrelationOutOfRange(z.sqrt()));
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for n in 0..MAX_SERIES_TERMS {
        if term == 0.0 {
            return Ok(sum);
        }
        let nf = n as f64;
        // For k >= n past every sign change, t_{k+1}/t_k <= z (1 + d/n + e/n^2)
        // with d, e the positive parts of (a+b-c-1) and (ab-c).
        if nf > a.abs().max(b.abs()) + 1.0 {
            let d = (a + b - c - 1.0).max(0.0);
            let e = (a * b - c).max(0.0);
            let rho = z * (1.0 + d / nf + e / (nf * nf));
            if rho < 1.0 && term.abs() / (1.0 - rho) < SERIES_TOLERANCE * sum.abs().max(1.0) {
                return Ok(sum);
            }
        }
        sum += term;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
    }
    Err(MomentError::NoConvergence(MAX_SERIES_TERMS))
}

/// Gauss's summation `F(a,b;c;1) = Γ(c)Γ(c-a-b) / (Γ(c-a)Γ(c-b))`, valid for
/// `c - a - b > 0`; all four Gamma arguments must be positive here.
pub fn hyp_real_at_one(a: f64, b: f64, c: f64) -> Result<f64, MomentError> {
    let args = [c, c - a - b, c - a, c - b];
    if args.iter().any(|v| *v <= 0.0) {
        return Err(MomentError::CorrelationOutOfRange(1.0));
    }
    Ok((ln_gamma(c) + ln_gamma(c - a - b) - ln_gamma(c - a) - ln_gamma(c - b)).exp())
}

/// `F(a,b;c;x^2)` dispatching between the series (`|x| <= 0.999`) and Gauss's
/// summation (`|x| = 1`).
pub fn hyp_real_corr(a: f64, b: f64, c: f64, x: f64) -> Result<f64, MomentError> {
    let ax = x.abs();
    if ax == 1.0 {
        hyp_real_at_one(a, b, c)
    } else if ax <= MAX_SERIES_CORRELATION {
        hyp_real(a, b, c, x * x)
    } else {
        Err(MomentError::CorrelationOutOfRange(x))
    }
}

/// `E|X|^y = 2^{y/2} Γ((y+1)/2) / sqrt(pi)` for standard normal `X`.
pub fn abs_moment_real(y: f64) -> Result<f64, MomentError> {
    if !(y >= 0.0) {
        return Err(MomentError::BadExponent(y));
    }
    Ok((0.5 * y * std::f64::consts::LN_2 + ln_gamma((y + 1.0) / 2.0)
        - 0.5 * std::f64::consts::PI.ln())
    .exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedKind {
    /// `E[|X2|^{y2} |X3|^{y3+2}]`
    EvenShift2,
    /// `E[|X2|^{y2} X2 |X3|^{y3} X3]`
    OddSigned,
}

fn mixed_prefactor(y2: f64, y3: f64) -> f64 {
    ((y2 + y3) / 2.0 * std::f64::consts::LN_2 + ln_gamma((y2 + 1.0) / 2.0)
        + ln_gamma((y3 + 1.0) / 2.0)
        - std::f64::consts::PI.ln())
    .exp()
}

/// Mixed absolute moments of a unit-variance pair with correlation `x`.
pub fn mixed_abs_moment_real(kind: MixedKind, y2: f64, y3: f64, x: f64) -> Result<f64, MomentError> {
    if !(y2 >= 0.0) {
        return Err(MomentError::BadExponent(y2));
    }
    if !(y3 >= 0.0) {
        return Err(MomentError::BadExponent(y3));
    }
    let pre = mixed_prefactor(y2, y3);
    match kind {
        MixedKind::EvenShift2 => {
            let f = hyp_real_corr(-y3 / 2.0 - 1.0, -y2 / 2.0, 0.5, x)?;
            Ok((y3 + 1.0) * pre * f)
        }
        MixedKind::OddSigned => {
            let f = hyp_real_corr(-y2 / 2.0, -y3 / 2.0, 1.5, x)?;
            Ok(x * (y2 + 1.0) * (y3 + 1.0) * pre * f)
        }
    }
}

/// Which product moment [`mc_moment`] estimates:
/// `E[|X2|^p s2(X2) |X3|^q s3(X3)]`, with `s` the sign when the flag is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McExponents {
    pub p: f64,
    pub q: f64,
    pub signed2: bool,
    pub signed3: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

const MC_BLOCK: u64 = 1 << 16;

/// Monte Carlo estimate of a product moment of `(X2, X3)` with the given
/// variances and covariance. Samples are generated in fixed-size blocks, each
/// from its own ChaCha stream, so the result depends only on `(n, seed)` and
/// not on the number of worker threads.
pub fn mc_moment(
    exps: McExponents,
    var2: f64,
    var3: f64,
    cov: f64,
    n: u64,
    seed: u64,
) -> McEstimate {
    let s2 = var2.sqrt();
    let s3 = var3.sqrt();
    let rho = (cov / (s2 * s3)).clamp(-1.0, 1.0);
    let rho_c = (1.0 - rho * rho).max(0.0).sqrt();
    let blocks = n.div_ceil(MC_BLOCK);
    let sample = |z1: f64, z2: f64| {
        let x2 = s2 * z1;
        let x3 = s3 * (rho * z1 + rho_c * z2);
        let mut v = x2.abs().powf(exps.p) * x3.abs().powf(exps.q);
        if exps.signed2 {
            v *= x2.signum();
        }
        if exps.signed3 {
            v *= x3.signum();
        }
        v
    };
    // Per-block (count, mean, M2), merged in block order (Chan et al.).
    let partials: Vec<(f64, f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = MC_BLOCK.min(n - b * MC_BLOCK);
            let (mut mean, mut m2) = (0.0f64, 0.0f64);
            for i in 0..count {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                let v = sample(z1, z2);
                let delta = v - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (v - mean);
            }
            (count as f64, mean, m2)
        })
        .collect();
    let (mut count, mut mean, mut m2) = (0.0f64, 0.0f64, 0.0f64);
    for (cb, mb, m2b) in partials {
        let total = count + cb;
        let delta = mb - mean;
        mean += delta * cb / total;
        m2 += m2b + delta * delta * count * cb / total;
        count = total;
    }
    let variance = if count > 1.0 { m2 / (count - 1.0) } else { 0.0 };
    McEstimate {
        mean,
        stderr: (variance / count).sqrt(),
        n,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, to_f64};
    use proptest::prelude::*;

    fn unit(n: i64, d: i64) -> GaussianPair {
        GaussianPair::unit(rat(n, d)).unwrap()
    }

    #[test]
    fn exact_examples() {
        assert_eq!(even_moment(1, 1, &unit(1, 2)), rat(3, 2));
        assert_eq!(even_moment(1, 2, &unit(1, 2)), int(6));
        let indep = GaussianPair::new(int(2), int(3), int(0)).unwrap();
        assert_eq!(even_moment(2, 3, &indep), int(3 * 15 * 4 * 27));
        assert_eq!(odd_moment(1, 1, &unit(1, 2)), rat(21, 4));
        assert_eq!(odd_moment(3, 2, &unit(0, 1)), int(0));
        assert_eq!(odd_moment(0, 0, &unit(3, 10)), rat(3, 10));
        assert_eq!(wick_moment(2, 2, &unit(1, 2)), rat(3, 2));
        assert_eq!(wick_moment(3, 3, &unit(1, 2)), rat(21, 4));
        assert_eq!(wick_moment(1, 0, &unit(1, 2)), int(0));
    }

    #[test]
    fn triple_examples() {
        let triple = TripleSpec::new(int(-1), rat(1, 2)).unwrap();
        assert_eq!(triple_even_moment(&triple, 1, 1), rat(3, 2));
        let x_only = TripleSpec::new(int(0), rat(1, 3)).unwrap();
        assert_eq!(
            triple_even_moment(&x_only, 2, 1),
            even_moment(3, 1, &x_only.pair)
        );
        // Independence: a^2 (2m3+1) + (2m2+1) times the marginal product.
        let (m2, m3) = (2u32, 3u32);
        let triple = TripleSpec::new(rat(5, 2), int(0)).unwrap();
        let marg = marginal_even(m2, &int(1)) * marginal_even(m3, &int(1));
        let expected = (rat(25, 4) * int(2 * m3 as i64 + 1) + int(2 * m2 as i64 + 1)) * marg;
        assert_eq!(triple_even_moment(&triple, m2, m3), expected);
    }

    #[test]
    fn triple_matches_wick_expansion() {
        for (n, d) in [(-1, 1), (-3, 4), (0, 1), (2, 5), (1, 1)] {
            let triple = TripleSpec::new(rat(-7, 3), rat(n, d)).unwrap();
            for m2 in 0..4 {
                for m3 in 0..4 {
                    let p = &triple.pair;
                    let a = &triple.a;
                    let w = a * a * wick_moment(2 * m2, 2 * m3 + 2, p)
                        + wick_moment(2 * m2 + 2, 2 * m3, p)
                        + int(2) * a * wick_moment(2 * m2 + 1, 2 * m3 + 1, p);
                    assert_eq!(triple_even_moment(&triple, m2, m3), w);
                }
            }
        }
    }

    #[test]
    fn oracle_equivalence_small_grid() {
        for k in -4..=4 {
            let pair = GaussianPair::new(rat(3, 2), rat(2, 5), rat(k, 10)).unwrap();
            for m2 in 0..=5 {
                for m3 in 0..=5 {
                    assert_eq!(even_moment(m2, m3, &pair), wick_moment(2 * m2, 2 * m3, &pair));
                    assert_eq!(
                        odd_moment(m2, m3, &pair),
                        wick_moment(2 * m2 + 1, 2 * m3 + 1, &pair)
                    );
                }
            }
        }
    }

    #[test]
    fn pair_validation() {
        assert!(GaussianPair::new(int(0), int(1), int(0)).is_err());
        assert!(GaussianPair::unit(rat(11, 10)).is_err());
        assert!(GaussianPair::unit(int(-1)).is_ok());
    }

    /// The bivariate inequality between odd and shifted even moments; it is
    /// the MRI/HFRI relation in moment form.
    #[test]
    fn moment_cross_inequality() {
        for m2 in 1..=6u32 {
            for m3 in m2..=6u32 {
                for k in 1..10 {
                    for sign in [-1, 1] {
                        let x = rat(sign * k, 10);
                        let pair = GaussianPair::unit(x.clone()).unwrap();
                        let base = marginal_even(m2, &int(1)) * marginal_even(m3, &int(1));
                        let lhs = odd_moment(m2, m3, &pair) - &base * &x;
                        let r2 = even_moment(m2 + 1, m3, &pair) - &base;
                        let r3 = even_moment(m2, m3 + 1, &pair) - &base;
                        assert!(&lhs * &lhs < r2 * r3, "m2={m2} m3={m3} x={x}");
                    }
                }
            }
        }
    }

    #[test]
    fn real_abs_moments() {
        assert!((abs_moment_real(2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((abs_moment_real(1.0).unwrap() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert!((abs_moment_real(4.0).unwrap() - 3.0).abs() < 1e-13);
        assert!(abs_moment_real(-1.0).is_err());
    }

    #[test]
    fn real_mixed_matches_exact_at_even_integers() {
        for (m2, m3) in [(0u32, 0u32), (1, 1), (1, 2), (2, 3), (3, 3)] {
            for k in [-9i64, -5, 0, 3, 7, 10] {
                let x = rat(k, 10);
                let pair = GaussianPair::unit(x.clone()).unwrap();
                let xf = to_f64(&x);
                let (y2, y3) = (2.0 * m2 as f64, 2.0 * m3 as f64);
                let even = mixed_abs_moment_real(MixedKind::EvenShift2, y2, y3, xf).unwrap();
                let exact_even = to_f64(&even_moment(m2, m3 + 1, &pair));
                assert!((even - exact_even).abs() < 1e-9 * exact_even.abs().max(1.0));
                let odd = mixed_abs_moment_real(MixedKind::OddSigned, y2, y3, xf).unwrap();
                let exact_odd = to_f64(&odd_moment(m2, m3, &pair));
                assert!((odd - exact_odd).abs() < 1e-9 * exact_odd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn series_edges() {
        assert!(hyp_real_corr(-1.3, -2.2, 0.5, 0.9995).is_err());
        assert!(hyp_real_corr(-1.3, -2.2, 0.5, 1.2).is_err());
        // Continuity at |x| = 1: the series close to 1 approaches Gauss's value.
        let at_one = hyp_real_corr(-1.5, -2.5, 0.5, 1.0).unwrap();
        let near = hyp_real_corr(-1.5, -2.5, 0.5, 0.999).unwrap();
        assert!((at_one - near).abs() < 1e-2 * at_one.abs());
    }

    #[test]
    fn monte_carlo_examples() {
        let sq = McExponents { p: 2.0, q: 0.0, signed2: false, signed3: false };
        let est = mc_moment(sq, 1.0, 1.0, 0.5, 1_000_000, 1);
        assert!((est.mean - 1.0).abs() < 3.0 * est.stderr);
        let prod = McExponents { p: 2.0, q: 2.0, signed2: false, signed3: false };
        let est = mc_moment(prod, 1.0, 1.0, 0.5, 1_000_000, 7);
        assert!((est.mean - 1.5).abs() < 4.0 * est.stderr);
        let cross = McExponents { p: 1.0, q: 1.0, signed2: true, signed3: true };
        let est = mc_moment(cross, 1.0, 1.0, 0.3, 1_000_000, 3);
        assert!((est.mean - 0.3).abs() < 4.0 * est.stderr);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let e = McExponents { p: 1.5, q: 0.5, signed2: true, signed3: false };
        let a = mc_moment(e, 1.0, 2.0, 0.4, 200_000, 11);
        let b = mc_moment(e, 1.0, 2.0, 0.4, 200_000, 11);
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| mc_moment(e, 1.0, 2.0, 0.4, 200_000, 11));
        assert_eq!(a, c);
    }

    proptest! {
        #[test]
        fn scaling_covariance(m2 in 0u32..5, m3 in 0u32..5, s in 1i64..5, t in 1i64..5, k in -9i64..10) {
            let pair = unit(k, 10);
            let (s, t) = (int(s), int(t));
            let scaled = GaussianPair::new(&s * &s, &t * &t, &s * &t * rat(k, 10)).unwrap();
            let factor = num_traits::pow(s, 2 * m2 as usize) * num_traits::pow(t, 2 * m3 as usize);
            prop_assert_eq!(even_moment(m2, m3, &scaled), even_moment(m2, m3, &pair) * factor);
        }

        #[test]
        fn signs_and_parity(m2 in 0u32..6, m3 in 0u32..6, k in -10i64..11) {
            let pair = unit(k, 10);
            prop_assert!(even_moment(m2, m3, &pair).is_positive());
            let odd = odd_moment(m2, m3, &pair);
            prop_assert_eq!(odd.signum(), rat(k, 10).signum());
            prop_assert!(wick_moment(2 * m2 + 1, 2 * m3, &pair).is_zero());
        }
    }
}
