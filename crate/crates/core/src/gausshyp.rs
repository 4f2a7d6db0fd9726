//! Terminating Gauss hypergeometric polynomials `F(a, b; c; z)`.
//!
//! With `a = -m2`, `b = -m3` the series stops after `min(m2, m3)` terms, so
//! every object here is an exact polynomial in `z`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{int, BigRational};
use crate::polyring::{falling_factorial, MultiPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypError {
    #[error("F({a}, {b}; {c}; z) does not terminate: neither upper parameter is a non-positive integer")]
    NonTerminating {
        a: BigRational,
        b: BigRational,
        c: BigRational,
    },
    #[error("lower parameter {0} hits a pole of the series")]
    LowerPole(BigRational),
}

/// `(x)_n = x (x+1) ... (x+n-1)`.
pub fn pochhammer(x: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut term = x.clone();
    for _ in 0..n {
        acc *= &term;
        term += BigRational::one();
    }
    acc
}

fn nonpositive_integer(q: &BigRational) -> Option<u32> {
    if q.is_integer() && !q.is_positive() {
        (-q.to_integer()).to_u32()
    } else {
        None
    }
}

/// Terminating series `sum_j (a)_j (b)_j / ((c)_j j!) z^j` for arbitrary
/// rational parameters, at least one of `a`, `b` a non-positive integer.
pub fn hyp_terminating(
    a: &BigRational,
    b: &BigRational,
    c: &BigRational,
) -> Result<MultiPoly, HypError> {
    let degree = match (nonpositive_integer(a), nonpositive_integer(b)) {
        (Some(n), Some(m)) => n.min(m),
        (Some(n), None) | (None, Some(n)) => n,
        (None, None) => {
            return Err(HypError::NonTerminating {
                a: a.clone(),
                b: b.clone(),
                c: c.clone(),
            })
        }
    };
    let mut terms = Vec::with_capacity(degree as usize + 1);
    let mut coeff = BigRational::one();
    for j in 0..=degree {
        terms.push((vec![j], coeff.clone()));
        if j == degree {
            break;
        }
        let jj = int(j as i64);
        let denom = (c + &jj) * (&jj + BigRational::one());
        if denom.is_zero() {
            return Err(HypError::LowerPole(c.clone()));
        }
        coeff = coeff * (a + &jj) * (b + &jj) / denom;
    }
    Ok(MultiPoly::from_terms(&["z"], terms).expect("univariate terms"))
}

/// `F(-m2, -m3; c; z)` as a polynomial in `z`.
pub fn hyp_poly(m2: u32, m3: u32, c: &BigRational) -> MultiPoly {
    hyp_terminating(&int(-(m2 as i64)), &int(-(m3 as i64)), c)
        .expect("negative integer upper parameters always terminate")
}

/// `F(-m2, -m3; c; z)` with `m3` kept as an indeterminate; ring `(z, m3)`.
///
/// The `z^j` coefficient is `m2!/(m2-j)! * m3(m3-1)...(m3-j+1) / ((c)_j j!)`.
pub fn hyp_poly_symbolic_m3(m2: u32, c: &BigRational) -> MultiPoly {
    let vars = ["z", "m3"];
    let m3 = MultiPoly::var(&vars, "m3").expect("m3 in ring");
    let z = MultiPoly::var(&vars, "z").expect("z in ring");
    let mut acc = MultiPoly::zero(&vars);
    let mut m2_falling = BigRational::one();
    let mut j_factorial = BigRational::one();
    for j in 0..=m2 {
        if j > 0 {
            m2_falling *= int((m2 - j + 1) as i64);
            j_factorial *= int(j as i64);
        }
        let scalar = &m2_falling / (pochhammer(c, j) * &j_factorial);
        let term = &falling_factorial(&m3, j) * &z.pow(j);
        acc = &acc + &term.scale(&scalar);
    }
    acc
}

/// Exact `F(-m2, -m3; c; 1)` by Chu–Vandermonde: `(c + m3)_{m2} / (c)_{m2}`.
pub fn hyp_value_at_one(m2: u32, m3: u32, c: &BigRational) -> BigRational {
    let shifted = c + int(m3 as i64);
    pochhammer(&shifted, m2) / pochhammer(c, m2)
}

/// Gauss's contiguous relations, each written as `expression = 0`.
/// Serialized names also accept the short labels `rel21`, `rel31`, `rel37`, `rel38`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `z F' - a [F(a+1) - F]`
    Derivative,
    /// Same identity as [`Relation::Derivative`], kept as a separate entry.
    #[serde(alias = "rel21")]
    DerivativeShifted,
    /// `[c - 2a - (b-a) z] F + a (1-z) F(a+1) - (c-a) F(a-1)`
    #[serde(alias = "rel31")]
    ShiftA,
    /// `(b-a)(1-z) F - (c-a) F(a-1) + (c-b) F(b-1)`
    #[serde(alias = "rel37")]
    ShiftAB,
    /// `c (1-z) F - c F(a-1) + (c-b) z F(c+1)`
    #[serde(alias = "rel38")]
    ShiftC,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::Derivative,
        Relation::DerivativeShifted,
        Relation::ShiftA,
        Relation::ShiftAB,
        Relation::ShiftC,
    ];
}

/// Left-hand side of `relation` for `a = -m2`, `b = -m3`, assembled from
/// terminating series. Identically zero when the relation holds.
pub fn contiguous_residual(relation: Relation, m2: u32, m3: u32, c: &BigRational) -> MultiPoly {
    let one = BigRational::one();
    let a = int(-(m2 as i64));
    let b = int(-(m3 as i64));
    let f = |a: &BigRational, b: &BigRational, c: &BigRational| {
        hyp_terminating(a, b, c).expect("contiguous shifts stay terminating")
    };
    let k = |q: BigRational| MultiPoly::constant(&["z"], q);
    let z = MultiPoly::var(&["z"], "z").expect("z");
    let one_minus_z = &k(one.clone()) - &z;

    let base = f(&a, &b, c);
    match relation {
        Relation::Derivative | Relation::DerivativeShifted => {
            let lhs = &z * &base.derivative("z").expect("z");
            let rhs = (&f(&(&a + &one), &b, c) - &base).scale(&a);
            &lhs - &rhs
        }
        Relation::ShiftA => {
            let lead = &k(c - &a - &a) - &z.scale(&(&b - &a));
            let t1 = &lead * &base;
            let t2 = (&one_minus_z * &f(&(&a + &one), &b, c)).scale(&a);
            let t3 = f(&(&a - &one), &b, c).scale(&(c - &a));
            &(&t1 + &t2) - &t3
        }
        Relation::ShiftAB => {
            let t1 = (&one_minus_z * &base).scale(&(&b - &a));
            let t2 = f(&(&a - &one), &b, c).scale(&(c - &a));
            let t3 = f(&a, &(&b - &one), c).scale(&(c - &b));
            &(&t1 - &t2) + &t3
        }
        Relation::ShiftC => {
            let t1 = (&one_minus_z * &base).scale(c);
            let t2 = f(&(&a - &one), &b, c).scale(c);
            let t3 = (&z * &f(&a, &b, &(c + &one))).scale(&(c - &b));
            &(&t1 - &t2) + &t3
        }
    }
}

/// `1/2` and `3/2`, the only lower parameters the moment formulas need.
pub fn half() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2))
}

pub fn three_halves() -> BigRational {
    BigRational::new(BigInt::from(3), BigInt::from(2))
}

/// `(2m-1)!! = 1 * 3 * ... * (2m-1)`, with `(-1)!! = 1`.
pub fn double_factorial_odd(m: u32) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, k| acc * BigInt::from(2 * k - 1))
}

/// Factorial as a big integer.
pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}
