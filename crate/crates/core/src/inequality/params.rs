use num_traits::{One, Zero};
use serde::Serialize;

use super::IneqError;
use crate::exactnum::{int, rat, BigRational};

/// Integer exponent pair `(m2, m3)` with its derived constants
/// `r = (2m2+1)(2m3+1) + 1` and `t = 1/(r + (1 + 1/(2m2))(1 + 1/(2m3)))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GpiParams {
    m2: u32,
    m3: u32,
    r: BigRational,
    t: BigRational,
    in_s: bool,
}

/// Summary of a [`GpiParams`], as shown by `params show`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamsSummary {
    pub m2: u32,
    pub m3: u32,
    pub r: String,
    pub t: String,
    pub one_over_r_squared: String,
    pub one_over_r: String,
    pub case_split: String,
    pub radical_upper: String,
    pub h_at_one: String,
    pub in_s: bool,
}

/// The exponent set on which the MRI is claimed: `(1, m3 >= 5)`,
/// `(2, m3 >= 3)` and `(m2 >= 3, m3 >= m2)`.
pub fn in_s(m2: u32, m3: u32) -> bool {
    (m2 == 1 && m3 >= 5) || (m2 == 2 && m3 >= 3) || (m2 >= 3 && m3 >= m2)
}

pub fn make_params(m2: u32, m3: u32) -> Result<GpiParams, IneqError> {
    GpiParams::new(m2, m3)
}

impl GpiParams {
    pub fn new(m2: u32, m3: u32) -> Result<Self, IneqError> {
        if m2 == 0 || m3 == 0 {
            return Err(IneqError::BadExponents { m2, m3 });
        }
        let a = int(2 * m2 as i64 + 1);
        let b = int(2 * m3 as i64 + 1);
        let r = &a * &b + BigRational::one();
        let corr = (BigRational::one() + rat(1, 2 * m2 as i64))
            * (BigRational::one() + rat(1, 2 * m3 as i64));
        let t = (&r + corr).recip();
        let p = Self {
            m2,
            m3,
            r,
            t,
            in_s: in_s(m2, m3),
        };
        let r2 = &p.r * &p.r;
        if !(r2.recip() < p.t && p.t < p.r.recip()) {
            return Err(IneqError::Invariant(format!(
                "1/r^2 < t < 1/r fails for ({m2}, {m3})"
            )));
        }
        let s = p.s();
        let d = p.d();
        if &s * &s != &d * &d + p.rm1() {
            return Err(IneqError::Invariant("(m2+m3+1)^2 != (m3-m2)^2 + (r-1)".into()));
        }
        Ok(p)
    }

    pub fn m2(&self) -> u32 {
        self.m2
    }

    pub fn m3(&self) -> u32 {
        self.m3
    }

    pub fn r(&self) -> &BigRational {
        &self.r
    }

    pub fn t(&self) -> &BigRational {
        &self.t
    }

    pub fn in_s(&self) -> bool {
        self.in_s
    }

    /// `m2 + m3 + 1`.
    pub fn s(&self) -> BigRational {
        int(self.m2 as i64 + self.m3 as i64 + 1)
    }

    /// `m3 - m2`.
    pub fn d(&self) -> BigRational {
        int(self.m3 as i64 - self.m2 as i64)
    }

    /// `r - 1 = (2m2+1)(2m3+1)`.
    pub fn rm1(&self) -> BigRational {
        &self.r - BigRational::one()
    }

    /// `1/r^2`, the left end of the domain of `H`.
    pub fn h_domain_lo(&self) -> BigRational {
        (&self.r * &self.r).recip()
    }

    /// `2.75/(m2 m3)`, the split point of the large-exponent analysis.
    pub fn case_split(&self) -> BigRational {
        rat(11, 4) / int(self.m2 as i64 * self.m3 as i64)
    }

    /// `2.1/(2m2+1)`, right end of the radical-separated slope scan.
    pub fn radical_upper(&self) -> BigRational {
        rat(21, 10) / int(2 * self.m2 as i64 + 1)
    }

    /// Radicand of `H`: `D(z) = (d (rz-1))^2 + (r-1)^3 z`.
    pub fn radicand(&self, z: &BigRational) -> BigRational {
        let rz1 = &self.r * z - BigRational::one();
        let dd = self.d() * &rz1;
        let rm1 = self.rm1();
        &dd * &dd + &rm1 * &rm1 * &rm1 * z
    }

    pub fn summary(&self) -> ParamsSummary {
        ParamsSummary {
            m2: self.m2,
            m3: self.m3,
            r: self.r.to_string(),
            t: self.t.to_string(),
            one_over_r_squared: self.h_domain_lo().to_string(),
            one_over_r: self.r.recip().to_string(),
            case_split: self.case_split().to_string(),
            radical_upper: self.radical_upper().to_string(),
            h_at_one: super::h_at_one(self).to_string(),
            in_s: self.in_s,
        }
    }
}

/// The quadratic `(1-z) y^2 + 2 beta y + gamma` whose positivity at
/// `y = f1/f2` is the ratio inequality, with
/// `beta = s(rz-1)/(r-1)` and `gamma = (1 - r^2 z)/(r-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    pub beta: BigRational,
    pub gamma: BigRational,
    pub leading: BigRational,
}

impl QuadraticForm {
    /// Builds the form and checks
    /// `beta^2 - (1-z) gamma = (d(1-rz)/(r-1))^2 + (r-1) z` exactly.
    pub fn new(p: &GpiParams, z: &BigRational) -> Result<Self, IneqError> {
        let one = BigRational::one();
        let rm1 = p.rm1();
        let rz = p.r() * z;
        let beta = -(p.s() * (&one - &rz)) / &rm1;
        let gamma = (&one - p.r() * &rz) / &rm1;
        let leading = &one - z;
        let form = Self {
            beta,
            gamma,
            leading,
        };
        let rhs_inner = p.d() * (&one - &rz) / &rm1;
        let rhs = &rhs_inner * &rhs_inner + &rm1 * z;
        if form.discriminant() != rhs {
            return Err(IneqError::Invariant(format!(
                "beta^2 - (1-z) gamma identity fails at z = {z}"
            )));
        }
        Ok(form)
    }

    /// `beta^2 - (1-z) gamma`.
    pub fn discriminant(&self) -> BigRational {
        &self.beta * &self.beta - &self.leading * &self.gamma
    }

    pub fn eval(&self, y: &BigRational) -> BigRational {
        &self.leading * y * y + int(2) * &self.beta * y + &self.gamma
    }

    pub fn is_degenerate(&self) -> bool {
        self.leading.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let p = make_params(1, 1).unwrap();
        assert_eq!(p.r(), &int(10));
        assert_eq!(p.t(), &rat(4, 49));
        assert!(!p.in_s());
        let p = make_params(2, 3).unwrap();
        assert_eq!(p.r(), &int(36));
        assert_eq!(p.t(), &rat(24, 899));
        assert!(p.in_s());
        assert!(make_params(1, 5).unwrap().in_s());
        assert!(make_params(0, 5).is_err());
    }

    #[test]
    fn membership() {
        assert!(!in_s(1, 4));
        assert!(!in_s(2, 2));
        assert!(in_s(3, 3));
        assert!(in_s(8, 12));
        assert!(!in_s(5, 4));
    }

    #[test]
    fn parameter_identities() {
        for m2 in 1..=12 {
            for m3 in m2..=12 {
                // Construction enforces 1/r^2 < t < 1/r and the square identity.
                make_params(m2, m3).unwrap();
            }
        }
    }

    proptest! {
        #[test]
        fn quadratic_form_identity(m2 in 1u32..15, m3 in 1u32..15, n in 1i64..1000, d in 1i64..1000) {
            let p = make_params(m2, m3).unwrap();
            let z = rat(n.min(d), d.max(n));
            prop_assert!(QuadraticForm::new(&p, &z).is_ok());
        }
    }
}
