use std::cmp::Ordering;

use num_traits::{One, Zero};

use super::{GpiParams, IneqError};
use crate::exactnum::{int, sqrt_enclosure, BigRational, RationalInterval, Sign};
use crate::gausshyp::{half, hyp_poly, hyp_value_at_one};

fn domain_err(what: &'static str, z: &BigRational, domain: String) -> IneqError {
    IneqError::Domain {
        what,
        z: z.to_string(),
        domain,
    }
}

/// Requires `1/r^2 < z <= 1`.
fn check_h_domain(p: &GpiParams, z: &BigRational) -> Result<(), IneqError> {
    if *z <= p.h_domain_lo() || *z > BigRational::one() {
        return Err(domain_err("H", z, format!("(1/r^2, 1] = ({}, 1]", p.h_domain_lo())));
    }
    Ok(())
}

/// `H(1) = 2(m2+m3+1) / (2 + (2m2+1)(2m3+1))`.
pub fn h_at_one(p: &GpiParams) -> BigRational {
    int(2) * p.s() / (p.r() + BigRational::one())
}

/// `H` at `z = 1` from the defining formula. The radicand there is
/// `(m2+m3+1)^2 (r-1)^2`, so the square root is exact.
pub fn h_direct_at_one(p: &GpiParams) -> Option<BigRational> {
    let one = BigRational::one();
    let root = crate::exactnum::exact_sqrt(&p.radicand(&one))?;
    let rm = p.r() - &one;
    Some((p.s() * &rm + root) / (p.r() * p.r() - &one))
}

/// The `H` numerator `s(rz-1) + q` over `r^2 z - 1`, for an enclosure `q` of `sqrt(D)`.
fn h_from_root(p: &GpiParams, z: &BigRational, root: &RationalInterval) -> RationalInterval {
    let one = BigRational::one();
    let num_shift = p.s() * (p.r() * z - &one);
    let den = p.r() * p.r() * z - &one;
    root.shift(&num_shift).scale(&den.recip())
}

/// `H'` from an enclosure `q` of `sqrt(D)`:
/// `[2r(r-1)s q - (1+r^2 z)(r-1)^3 + 2 d^2 r (r-1)(rz-1)] / (2 (r^2 z - 1)^2 q)`.
fn h_prime_from_root(
    p: &GpiParams,
    z: &BigRational,
    root: &RationalInterval,
) -> Result<RationalInterval, IneqError> {
    let one = BigRational::one();
    let r = p.r();
    let rm1 = p.rm1();
    let rz1 = r * z - &one;
    let r2z1 = r * r * z - &one;
    let d = p.d();
    let constant = -(&one + r * r * z) * &rm1 * &rm1 * &rm1 + int(2) * &d * &d * r * &rm1 * &rz1;
    let num = root.scale(&(int(2) * r * &rm1 * p.s())).shift(&constant);
    let den = root.scale(&(int(2) * &r2z1 * &r2z1));
    Ok(num.checked_div(&den)?)
}

fn root_enclosure(p: &GpiParams, z: &BigRational, width: &BigRational) -> Result<RationalInterval, IneqError> {
    Ok(sqrt_enclosure(&p.radicand(z), width)?)
}

/// Rigorous enclosure of `H(z)` for `1/r^2 < z <= 1`; `width` bounds the
/// width of the square-root enclosure.
pub fn h_value(p: &GpiParams, z: &BigRational, width: &BigRational) -> Result<RationalInterval, IneqError> {
    check_h_domain(p, z)?;
    let root = root_enclosure(p, z, width)?;
    Ok(h_from_root(p, z, &root))
}

/// Rigorous enclosure of `H'(z)`.
pub fn h_prime_value(
    p: &GpiParams,
    z: &BigRational,
    width: &BigRational,
) -> Result<RationalInterval, IneqError> {
    check_h_domain(p, z)?;
    let root = root_enclosure(p, z, width)?;
    h_prime_from_root(p, z, &root)
}

/// Exact comparison of `H(z)` with a rational `k`. With
/// `R = k(r^2 z - 1) - s(rz-1)`, `H > k` iff `sqrt(D) > R`, i.e. `R < 0` or `D > R^2`.
pub fn h_compare(p: &GpiParams, z: &BigRational, k: &BigRational) -> Result<Ordering, IneqError> {
    check_h_domain(p, z)?;
    let one = BigRational::one();
    let rr = k * (p.r() * p.r() * z - &one) - p.s() * (p.r() * z - &one);
    if rr < BigRational::zero() {
        return Ok(Ordering::Greater);
    }
    Ok(p.radicand(z).cmp(&(&rr * &rr)))
}

/// `G(z) = F(-m2-1,-m3;1/2;z) - [(1-z) + (2m3+1) z H(z)] F(-m2,-m3;1/2;z)` from a root enclosure.
fn g_from_root(p: &GpiParams, z: &BigRational, root: &RationalInterval) -> RationalInterval {
    let one = BigRational::one();
    let c = half();
    let f_lower = hyp_poly(p.m2() + 1, p.m3(), &c).eval_univariate(z).expect("univariate");
    let f = hyp_poly(p.m2(), p.m3(), &c).eval_univariate(z).expect("univariate");
    let h = h_from_root(p, z, root);
    let bracket = h.scale(&(int(2 * p.m3() as i64 + 1) * z)).shift(&(&one - z));
    bracket.scale(&-f).shift(&f_lower)
}

/// Rigorous enclosure of `G(z)` for `1/r^2 < z <= 1`.
pub fn g_value(p: &GpiParams, z: &BigRational, width: &BigRational) -> Result<RationalInterval, IneqError> {
    check_h_domain(p, z)?;
    let root = root_enclosure(p, z, width)?;
    Ok(g_from_root(p, z, &root))
}

/// Exact `G(1) = F(-m2-1,-m3;1/2;1) - (2m3+1) H(1) F(-m2,-m3;1/2;1)`.
pub fn g_at_one(p: &GpiParams) -> BigRational {
    let c = half();
    hyp_value_at_one(p.m2() + 1, p.m3(), &c)
        - int(2 * p.m3() as i64 + 1) * h_at_one(p) * hyp_value_at_one(p.m2(), p.m3(), &c)
}

/// Closed form `-[(2m2-1)(2m3-1) - 2] / ((2m2+1)(r+1)) * F(-m2,-m3;1/2;1)`.
pub fn g_at_one_closed_form(p: &GpiParams) -> BigRational {
    let (m2, m3) = (p.m2() as i64, p.m3() as i64);
    let factor = int((2 * m2 - 1) * (2 * m3 - 1) - 2);
    -factor / (int(2 * m2 + 1) * (p.r() + BigRational::one()))
        * hyp_value_at_one(p.m2(), p.m3(), &half())
}

/// Margin of the derivative-side inequality
/// `(1-z) + [2(m2+m3+1) z - 1] H < (r-1) z H^2 + 2 z (1-z) H'`
/// (right side minus left side), enclosed.
pub fn h_slope_margin(
    p: &GpiParams,
    z: &BigRational,
    width: &BigRational,
) -> Result<RationalInterval, IneqError> {
    check_h_domain(p, z)?;
    let one = BigRational::one();
    let root = root_enclosure(p, z, width)?;
    let h = h_from_root(p, z, &root);
    let hp = h_prime_from_root(p, z, &root)?;
    let rhs = &h.square().scale(&(p.rm1() * z)) + &hp.scale(&(int(2) * z * (&one - z)));
    let lhs = h
        .scale(&(int(2) * p.s() * z - &one))
        .shift(&(&one - z));
    Ok(&rhs - &lhs)
}

/// The rational left side `L(z)` and the numerator `N(z)` of the right side of
/// the radical-free form `L(z) > N(z)/sqrt(D(z))`.
pub fn radical_sides(p: &GpiParams, z: &BigRational) -> (BigRational, BigRational) {
    let one = BigRational::one();
    let r = p.r();
    let s = p.s();
    let d2 = p.d() * p.d();
    let rm1 = p.rm1();
    let z2 = z * z;
    let z3 = &z2 * z;
    let r2 = r * r;
    let r3 = &r2 * r;
    let l = -&one + int(4) * z - int(4) * r * z + int(3) * &r2 * z + &z2 - int(8) * r * &z2
        + int(8) * &r2 * &z2
        - int(4) * &r3 * &z2
        + &r2 * &z3
        + &s * (&one - int(3) * r * z + &r2 * z + int(2) * r * &z2 - int(2) * &r2 * &z2 + &r3 * &z2)
        - int(2) * &d2 * (int(2) * z - r * z - int(3) * r * &z2 + &r2 * &z2 + &r2 * &z3);
    let rz1 = r * z - &one;
    let n = &rm1 * z * (&one - z) * (&rm1 * &rm1 * (&one + &r2 * z) - int(2) * &d2 * r * &rz1)
        + (int(2) * &s * z * (r + r * z - int(2)) - (&r2 * z - &one)) * p.radicand(z);
    (l, n)
}

/// `L(z) - N(z)/sqrt(D(z))`, enclosed.
pub fn radical_margin(
    p: &GpiParams,
    z: &BigRational,
    width: &BigRational,
) -> Result<RationalInterval, IneqError> {
    check_h_domain(p, z)?;
    let (l, n) = radical_sides(p, z);
    let root = root_enclosure(p, z, width)?;
    let ratio = RationalInterval::point(n).checked_div(&root)?;
    Ok(ratio.scale(&-BigRational::one()).shift(&l))
}

/// Re-evaluates `eval(width)` with halving widths until its sign is
/// determined or `refine_max` halvings have been spent. Returns the last
/// enclosure and the width that produced it.
pub fn refine_sign<F>(
    width: &BigRational,
    refine_max: u32,
    mut eval: F,
) -> Result<(RationalInterval, BigRational), IneqError>
where
    F: FnMut(&BigRational) -> Result<RationalInterval, IneqError>,
{
    let mut w = width.clone();
    let mut iv = eval(&w)?;
    for _ in 0..refine_max {
        if iv.sign() != Sign::Indeterminate {
            break;
        }
        w /= int(2);
        iv = eval(&w)?;
    }
    Ok((iv, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, to_f64};
    use crate::inequality::make_params;

    fn w() -> BigRational {
        rat(1, 1_000_000)
    }

    /// Floating-point H straight from the definition, as an oracle.
    fn h_float(p: &GpiParams, z: f64) -> f64 {
        let r = to_f64(p.r());
        let s = to_f64(&p.s());
        let d = to_f64(&p.d());
        let rad = (d * (r * z - 1.0)).powi(2) + (r - 1.0).powi(3) * z;
        (s * (r * z - 1.0) + rad.sqrt()) / (r * r * z - 1.0)
    }

    #[test]
    fn h_at_one_examples() {
        let p11 = make_params(1, 1).unwrap();
        assert_eq!(h_at_one(&p11), rat(6, 11));
        let iv = h_value(&p11, &int(1), &w()).unwrap();
        assert!(iv.is_point() && iv.contains(&rat(6, 11)));
        assert_eq!(h_at_one(&make_params(2, 3).unwrap()), rat(12, 37));
        for m2 in 1..=12 {
            for m3 in m2..=12 {
                let p = make_params(m2, m3).unwrap();
                assert_eq!(h_direct_at_one(&p), Some(h_at_one(&p)));
            }
        }
    }

    #[test]
    fn h_matches_float_oracle() {
        let p = make_params(3, 5).unwrap();
        for k in 1..20 {
            let z = rat(k, 20);
            if z <= p.h_domain_lo() {
                continue;
            }
            let iv = h_value(&p, &z, &w()).unwrap();
            let f = h_float(&p, to_f64(&z));
            assert!((to_f64(&iv.midpoint()) - f).abs() < 1e-9);
            // Derivative against a central difference.
            let hp = to_f64(&h_prime_value(&p, &z, &w()).unwrap().midpoint());
            let e = 1e-6;
            let zf = to_f64(&z);
            let fd = (h_float(&p, zf + e) - h_float(&p, zf - e)) / (2.0 * e);
            assert!((hp - fd).abs() < 1e-5 * fd.abs().max(1.0), "z={z} {hp} {fd}");
        }
    }

    #[test]
    fn h_domain_enforced() {
        let p = make_params(1, 1).unwrap();
        assert!(h_value(&p, &rat(1, 100), &w()).is_err());
        assert!(h_value(&p, &rat(11, 10), &w()).is_err());
        assert!(h_value(&p, &rat(101, 10000), &w()).is_ok());
    }

    #[test]
    fn exact_comparison_agrees_with_enclosure() {
        let p = make_params(8, 8).unwrap();
        for z in [rat(1, 289), rat(11, 256), rat(1, 2), int(1)] {
            for k in [rat(1, 7), rat(1, 2), int(1)] {
                let ord = h_compare(&p, &z, &k).unwrap();
                let iv = h_value(&p, &z, &rat(1, 1 << 40)).unwrap();
                match ord {
                    Ordering::Greater => assert!(iv.lo() > &k || iv.contains(&k)),
                    Ordering::Less => assert!(iv.hi() < &k || iv.contains(&k)),
                    Ordering::Equal => assert!(iv.contains(&k)),
                }
            }
        }
        // H(t) = 1 exactly for every pair.
        let p = make_params(2, 5).unwrap();
        assert_eq!(h_compare(&p, &p.t().clone(), &int(1)).unwrap(), Ordering::Equal);
    }

    #[test]
    fn g_at_one_values() {
        assert_eq!(g_at_one(&make_params(1, 1).unwrap()), rat(1, 11));
        for m2 in 1..=12 {
            for m3 in m2..=12 {
                let p = make_params(m2, m3).unwrap();
                assert_eq!(g_at_one(&p), g_at_one_closed_form(&p));
                let iv = g_value(&p, &int(1), &w()).unwrap();
                assert!(iv.contains(&g_at_one(&p)));
            }
        }
        assert!(g_at_one(&make_params(8, 8).unwrap()) < BigRational::zero());
    }

    #[test]
    fn g_negative_just_above_bound() {
        let p = make_params(8, 10).unwrap();
        let z = p.case_split() + rat(1, 10_000);
        let (iv, _) = refine_sign(&w(), 20, |w| g_value(&p, &z, w)).unwrap();
        assert_eq!(iv.sign(), Sign::Negative);
    }

    #[test]
    fn slope_predicates_positive_for_8_8() {
        let p = make_params(8, 8).unwrap();
        let lo = p.case_split();
        let hi = p.radical_upper();
        for k in 1..10 {
            let z = &lo + (&hi - &lo) * rat(k, 10);
            assert_eq!(radical_margin(&p, &z, &w()).unwrap().sign(), Sign::Positive);
        }
        for k in 1..10 {
            let z = &lo + (int(1) - &lo) * rat(k, 10);
            assert_eq!(h_slope_margin(&p, &z, &w()).unwrap().sign(), Sign::Positive);
        }
    }

    #[test]
    fn refinement_halves_width() {
        let mut calls = 0;
        let (_, width) = refine_sign(&int(1), 3, |w| {
            calls += 1;
            let c = w.clone();
            Ok(RationalInterval::new(-c.clone(), c)?)
        })
        .unwrap();
        assert_eq!(calls, 4);
        assert_eq!(width, rat(1, 8));
    }
}
