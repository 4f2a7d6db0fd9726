use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::One;

use super::{GpiParams, IneqError};
use crate::exactnum::{int, rat, BigRational};
use crate::gausshyp::{factorial, half, hyp_poly, hyp_poly_symbolic_m3, three_halves};
use crate::polyring::{falling_factorial, MultiPoly};

/// Truncation order of the large-exponent bracket.
pub const F_TRUNCATION: u32 = 4;
/// `17!` clears every factorial denominator of the truncated bracket.
pub const F_SCALE_FACTORIAL: u32 = 17;
/// Shift applied to both exponents in `g`: `x2 = a^2 + 8`, `x3 = b^2 + 8`.
pub const G_EXPONENT_SHIFT: i64 = 8;

fn big(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

/// Assembles `(r-1)(1-z) f1^2 + 2 s (rz-1) f1 f2 - (r^2 z - 1) f2^2` with the
/// scalar pieces given as polynomials (so `m3` may be symbolic).
fn assemble_s(rm1: &MultiPoly, s: &MultiPoly, z: &MultiPoly, f1: &MultiPoly, f2: &MultiPoly) -> MultiPoly {
    let vars = z.vars();
    let one = MultiPoly::one(&vars);
    let r = rm1 + &one;
    let one_minus_z = &one - z;
    let rz1 = &(&r * z) - &one;
    let r2z1 = &(&(&r * &r) * z) - &one;
    let t1 = &(&(rm1 * &one_minus_z) * f1) * f1;
    let t2 = (&(&(s * &rz1) * f1) * f2).scale(&int(2));
    let t3 = &(&r2z1 * f2) * f2;
    &(&t1 + &t2) - &t3
}

/// `S_{m2,m3}(z)`, positive exactly where the ratio inequality holds (for `z > 1/r^2`).
pub fn s_poly(p: &GpiParams) -> MultiPoly {
    let vars = ["z"];
    let k = |q: BigRational| MultiPoly::constant(&vars, q);
    let z = MultiPoly::var(&vars, "z").expect("z");
    let f1 = hyp_poly(p.m2(), p.m3(), &half());
    let f2 = hyp_poly(p.m2(), p.m3(), &three_halves());
    assemble_s(&k(p.rm1()), &k(p.s()), &z, &f1, &f2)
}

/// `S` with `m3` left symbolic; ring `(z, m3)`.
pub fn s_poly_symbolic(m2: u32) -> MultiPoly {
    let vars = ["z", "m3"];
    let z = MultiPoly::var(&vars, "z").expect("z");
    let m3 = MultiPoly::var(&vars, "m3").expect("m3");
    let one = MultiPoly::one(&vars);
    let two_m3_1 = &m3.scale(&int(2)) + &one;
    let rm1 = two_m3_1.scale(&int(2 * m2 as i64 + 1));
    let s = &m3 + &MultiPoly::constant(&vars, int(m2 as i64 + 1));
    let f1 = hyp_poly_symbolic_m3(m2, &half());
    let f2 = hyp_poly_symbolic_m3(m2, &three_halves());
    assemble_s(&rm1, &s, &z, &f1, &f2)
}

/// `m3 - b^2` used to build `h_{m2}`: 5 for `m2 = 1`, 3 for `m2 = 2`, `m2` otherwise.
pub fn h_m3_offset(m2: u32) -> u32 {
    match m2 {
        1 => 5,
        2 => 3,
        _ => m2,
    }
}

/// `h_{m2}(b, c) = (1+c^2)^{2m2+1} S_{m2,m3}(c^2/(1+c^2))` with `m3 = b^2 + offset`.
pub fn h_poly(m2: u32) -> Result<MultiPoly, IneqError> {
    if !(1..=7).contains(&m2) {
        return Err(IneqError::HIndexOutOfRange(m2));
    }
    let bvars = ["b"];
    let m3 = &MultiPoly::var(&bvars, "b")?.pow(2)
        + &MultiPoly::constant(&bvars, int(h_m3_offset(m2) as i64));
    let s = s_poly_symbolic(m2).substitute("m3", &m3)?;
    let cvars = ["c"];
    let c2 = MultiPoly::var(&cvars, "c")?.pow(2);
    let den = &MultiPoly::one(&cvars) + &c2;
    let h = s.substitute_rational("z", &c2, &den, 2 * m2 + 1)?;
    Ok(h.in_ring(&["b", "c"])?)
}

/// Truncated bracket `17! (x2 x3)^3 + sum_{j=1}^{4} 4^j u^j (x2 x3)^{4-j}
/// (x2-1)_{j-1} (x3-1)_{j-1} 17!/(2j + odd)!`, with falling factorials.
fn f_bracket(odd: bool) -> MultiPoly {
    let vars = ["x2", "x3", "u"];
    let x2 = MultiPoly::var(&vars, "x2").expect("x2");
    let x3 = MultiPoly::var(&vars, "x3").expect("x3");
    let u = MultiPoly::var(&vars, "u").expect("u");
    let one = MultiPoly::one(&vars);
    let scale = factorial(F_SCALE_FACTORIAL);
    let prod = &x2 * &x3;
    let x2m1 = &x2 - &one;
    let x3m1 = &x3 - &one;
    let mut acc = prod.pow(3).scale(&big(scale.clone()));
    for j in 1..=F_TRUNCATION {
        let denom = factorial(2 * j + odd as u32);
        let coeff = big(BigInt::from(4u32).pow(j) * &scale / denom);
        let term = &(&(&u.pow(j) * &prod.pow(F_TRUNCATION - j)) * &falling_factorial(&x2m1, j - 1))
            * &falling_factorial(&x3m1, j - 1);
        acc = &acc + &term.scale(&coeff);
    }
    acc
}

/// `f(x2, x3, u)`: the truncated inequality with `u = m2 m3 z`, cleared of
/// denominators.
pub fn f_truncated_poly() -> MultiPoly {
    let vars = ["x2", "x3", "u"];
    let x2 = MultiPoly::var(&vars, "x2").expect("x2");
    let x3 = MultiPoly::var(&vars, "x3").expect("x3");
    let u = MultiPoly::var(&vars, "u").expect("u");
    let one = MultiPoly::one(&vars);
    let b1 = f_bracket(false);
    let b2 = f_bracket(true);
    let prod = &x2 * &x3;
    let rm1 = &(&x2.scale(&int(2)) + &one) * &(&x3.scale(&int(2)) + &one);
    let r = &rm1 + &one;
    let s = &(&x2 + &x3) + &one;
    let t1 = &(&(&rm1 * &(&prod - &u)) * &b1) * &b1;
    let t2 = (&(&(&s * &(&(&r * &u) - &prod)) * &b1) * &b2).scale(&int(2));
    let t3 = &(&(&(&(&r * &r) * &u) - &prod) * &b2) * &b2;
    &(&t1 + &t2) - &t3
}

fn g_cache() -> &'static MultiPoly {
    static G: OnceLock<MultiPoly> = OnceLock::new();
    G.get_or_init(|| {
        let f = f_truncated_poly();
        let avars = ["a"];
        let shift = MultiPoly::constant(&avars, int(G_EXPONENT_SHIFT));
        let x2 = &MultiPoly::var(&avars, "a").expect("a").pow(2) + &shift;
        let bvars = ["b"];
        let x3 = &MultiPoly::var(&bvars, "b").expect("b").pow(2)
            + &MultiPoly::constant(&bvars, int(G_EXPONENT_SHIFT));
        let cvars = ["c"];
        let c2 = MultiPoly::var(&cvars, "c").expect("c").pow(2);
        let num = c2.scale(&rat(11, 4));
        let den = &MultiPoly::one(&cvars) + &c2;
        let g = f
            .substitute("x2", &x2)
            .and_then(|p| p.substitute("x3", &x3))
            .and_then(|p| p.substitute_rational("u", &num, &den, 9))
            .expect("g construction");
        g.in_ring(&["a", "b", "c"]).expect("g ring")
    })
}

/// `g(a,b,c) = (1+c^2)^9 f(a^2+8, b^2+8, 2.75 c^2/(1+c^2))`. Computed once per process.
pub fn g_poly() -> MultiPoly {
    g_cache().clone()
}

/// Reference value `f(8, 8, 0) = 2^50 (17!)^2`.
pub fn f_at_origin_expected() -> BigRational {
    let s = big(factorial(F_SCALE_FACTORIAL));
    big(BigInt::one() << 50) * &s * &s
}
