//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`MultiPoly`] owns an ordered variable list (its ring) and a map from
//! exponent vectors to non-zero coefficients. Binary operations on
//! polynomials over different rings first extend both operands to the union
//! of their variable lists, keeping the left operand's order and appending
//! new variables from the right.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{parse_rational, BigRational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("no value assigned to variable `{0}`")]
    MissingAssignment(String),
    #[error("exponent vector {exps:?} does not match ring of {nvars} variables")]
    ExponentLength { exps: Vec<u32>, nvars: usize },
    #[error("clear_power {given} is below the degree {needed} of `{var}`")]
    InsufficientClearPower { var: String, needed: u32, given: u32 },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid coefficient `{0}`")]
    BadCoefficient(String),
    #[error("duplicate variable `{0}` in ring")]
    DuplicateVariable(String),
    #[error("malformed polynomial JSON: {0}")]
    Json(String),
}

/// Exponent vector, one entry per ring variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Self(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

#[derive(Debug, Clone)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, BigRational>,
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        if self.vars == other.vars {
            self.terms == other.terms
        } else {
            (self - other).is_zero()
        }
    }
}

impl Eq for MultiPoly {}

fn owned_vars(vars: &[&str]) -> Vec<String> {
    vars.iter().map(|v| v.to_string()).collect()
}

impl MultiPoly {
    pub fn zero(vars: &[&str]) -> Self {
        Self {
            vars: owned_vars(vars),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[&str], c: BigRational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial(vec![0; vars.len()]), c);
        }
        p
    }

    pub fn one(vars: &[&str]) -> Self {
        Self::constant(vars, BigRational::one())
    }

    /// The polynomial consisting of the single variable `name` in ring `vars`.
    pub fn var(vars: &[&str], name: &str) -> Result<Self, PolyError> {
        let idx = vars
            .iter()
            .position(|v| *v == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        let mut exps = vec![0; vars.len()];
        exps[idx] = 1;
        let mut p = Self::zero(vars);
        p.terms.insert(Monomial(exps), BigRational::one());
        Ok(p)
    }

    pub fn from_terms<I>(vars: &[&str], terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        Self::from_terms_owned(owned_vars(vars), terms)
    }

    fn from_terms_owned<I>(vars: Vec<String>, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(PolyError::DuplicateVariable(v.clone()));
            }
        }
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (exps, c) in terms {
            if exps.len() != vars.len() {
                return Err(PolyError::ExponentLength {
                    exps,
                    nvars: vars.len(),
                });
            }
            *map.entry(Monomial(exps)).or_insert_with(BigRational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(Self { vars, terms: map })
    }

    pub fn vars(&self) -> Vec<&str> {
        self.vars.iter().map(String::as_str).collect()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn var_index(&self, name: &str) -> Result<usize, PolyError> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }

    /// Coefficient of the monomial with the given exponents (zero if absent).
    pub fn coeff(&self, exps: &[u32]) -> BigRational {
        self.terms
            .get(&Monomial(exps.to_vec()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Coefficient looked up by named exponents; unnamed variables have exponent 0.
    pub fn coeff_of(&self, named: &[(&str, u32)]) -> Result<BigRational, PolyError> {
        let mut exps = vec![0; self.vars.len()];
        for (name, e) in named {
            match self.var_index(name) {
                Ok(i) => exps[i] = *e,
                Err(_) if *e == 0 => {}
                Err(err) => return Err(err),
            }
        }
        Ok(self.coeff(&exps))
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(&vec![0; self.vars.len()])
    }

    pub fn degree_in(&self, name: &str) -> Result<u32, PolyError> {
        let i = self.var_index(name)?;
        Ok(self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn min_coefficient(&self) -> Option<&BigRational> {
        self.terms.values().min()
    }

    pub fn negative_terms(&self) -> Vec<(Monomial, BigRational)> {
        self.terms
            .iter()
            .filter(|(_, c)| c.is_negative())
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect()
    }

    pub fn only_even_exponents(&self) -> bool {
        self.terms.keys().all(|m| m.0.iter().all(|e| e % 2 == 0))
    }

    /// Re-expresses the polynomial over `vars`, which must contain every
    /// variable that actually occurs. Unused variables may be dropped.
    pub fn in_ring(&self, vars: &[&str]) -> Result<Self, PolyError> {
        let target = owned_vars(vars);
        let mut map_idx = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            match target.iter().position(|t| t == v) {
                Some(j) => map_idx.push(Some(j)),
                None => {
                    if self.terms.keys().any(|m| m.0[i] != 0) {
                        return Err(PolyError::UnknownVariable(v.clone()));
                    }
                    map_idx.push(None);
                }
            }
        }
        let terms = self.terms.iter().map(|(m, c)| {
            let mut exps = vec![0; target.len()];
            for (i, e) in m.0.iter().enumerate() {
                if let Some(j) = map_idx[i] {
                    exps[j] = *e;
                }
            }
            (exps, c.clone())
        }).collect::<Vec<_>>();
        Self::from_terms_owned(target, terms)
    }

    fn union_vars(&self, other: &Self) -> Vec<String> {
        let mut vars = self.vars.clone();
        for v in &other.vars {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        vars
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let vars = self.union_vars(other);
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        (
            self.in_ring(&refs).expect("superset ring"),
            other.in_ring(&refs).expect("superset ring"),
        )
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self {
                vars: self.vars.clone(),
                terms: BTreeMap::new(),
            };
        }
        Self {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(&self.vars());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Splits into coefficients of powers of `var`: `p = sum_k coeffs[k] * var^k`.
    fn collect_in(&self, idx: usize) -> Vec<BTreeMap<Monomial, BigRational>> {
        let mut out: Vec<BTreeMap<Monomial, BigRational>> = Vec::new();
        for (m, c) in &self.terms {
            let k = m.0[idx] as usize;
            if out.len() <= k {
                out.resize_with(k + 1, BTreeMap::new);
            }
            let mut rest = m.0.clone();
            rest.remove(idx);
            out[k].insert(Monomial(rest), c.clone());
        }
        out
    }

    /// Composition `p(var <- replacement)`. The result lives over the remaining
    /// variables of `p` followed by any new variables of `replacement`.
    pub fn substitute(&self, var: &str, replacement: &MultiPoly) -> Result<Self, PolyError> {
        self.substitute_impl(var, replacement, None)
    }

    /// Returns `den^clear_power * p(var <- num/den)`, a polynomial as long as
    /// `clear_power >= deg_var(p)`.
    pub fn substitute_rational(
        &self,
        var: &str,
        num: &MultiPoly,
        den: &MultiPoly,
        clear_power: u32,
    ) -> Result<Self, PolyError> {
        let needed = self.degree_in(var)?;
        if clear_power < needed {
            return Err(PolyError::InsufficientClearPower {
                var: var.to_string(),
                needed,
                given: clear_power,
            });
        }
        self.substitute_impl(var, num, Some((den, clear_power)))
    }

    fn substitute_impl(
        &self,
        var: &str,
        num: &MultiPoly,
        den: Option<(&MultiPoly, u32)>,
    ) -> Result<Self, PolyError> {
        let idx = self.var_index(var)?;
        let mut rest_vars: Vec<String> = self.vars.clone();
        rest_vars.remove(idx);
        let rest_refs: Vec<&str> = rest_vars.iter().map(String::as_str).collect();
        let blocks = self.collect_in(idx);

        let base_ring = Self::zero(&rest_refs);
        let num = &base_ring + num;
        let ring = match den {
            Some((d, _)) => &num + &(&base_ring + d).scale(&BigRational::zero()),
            None => num.clone(),
        };
        let ring_vars = ring.vars();
        let num = num.in_ring(&ring_vars)?;
        let den = match den {
            Some((d, power)) => Some((d.in_ring(&ring_vars)?, power)),
            None => None,
        };

        let mut num_powers = vec![Self::one(&ring_vars)];
        for k in 1..blocks.len() {
            let next = &num_powers[k - 1] * &num;
            num_powers.push(next);
        }
        let den_powers: Vec<Self> = match &den {
            Some((d, power)) => {
                let mut v = vec![Self::one(&ring_vars)];
                for k in 1..=*power as usize {
                    let next = &v[k - 1] * d;
                    v.push(next);
                }
                v
            }
            None => Vec::new(),
        };

        let mut acc = Self::zero(&ring_vars);
        for (k, block) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                continue;
            }
            let coeff = Self {
                vars: rest_vars.clone(),
                terms: block,
            }
            .in_ring(&ring_vars)?;
            let mut term = &coeff * &num_powers[k];
            if let Some((_, power)) = &den {
                term = &term * &den_powers[*power as usize - k];
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }

    pub fn derivative(&self, var: &str) -> Result<Self, PolyError> {
        let idx = self.var_index(var)?;
        let terms = self.terms.iter().filter(|(m, _)| m.0[idx] > 0).map(|(m, c)| {
            let mut exps = m.0.clone();
            let e = exps[idx];
            exps[idx] -= 1;
            (exps, c * BigRational::from_integer(BigInt::from(e)))
        });
        Self::from_terms_owned(self.vars.clone(), terms)
    }

    pub fn eval(&self, point: &BTreeMap<String, BigRational>) -> Result<BigRational, PolyError> {
        let values: Vec<&BigRational> = self
            .vars
            .iter()
            .map(|v| {
                point
                    .get(v)
                    .ok_or_else(|| PolyError::MissingAssignment(v.clone()))
            })
            .collect::<Result<_, _>>()?;
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (e, x) in m.0.iter().zip(&values) {
                if *e > 0 {
                    t *= num_traits::pow(BigRational::clone(x), *e as usize);
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// Convenience form of [`MultiPoly::eval`] taking `(name, value)` pairs.
    pub fn eval_at(&self, point: &[(&str, BigRational)]) -> Result<BigRational, PolyError> {
        let map = point
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        self.eval(&map)
    }

    /// Horner evaluation of a polynomial in a single variable.
    pub fn eval_univariate(&self, x: &BigRational) -> Result<BigRational, PolyError> {
        if self.vars.len() != 1 {
            return Err(PolyError::MissingAssignment(format!(
                "expected a univariate ring, got {:?}",
                self.vars
            )));
        }
        let deg = self.total_degree() as usize;
        let mut coeffs = vec![BigRational::zero(); deg + 1];
        for (m, c) in &self.terms {
            coeffs[m.0[0] as usize] = c.clone();
        }
        let mut acc = BigRational::zero();
        for c in coeffs.into_iter().rev() {
            acc = acc * x + c;
        }
        Ok(acc)
    }

    /// Gcd of numerators over lcm of denominators: `p / content` has coprime
    /// integer coefficients.
    pub fn content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return BigRational::zero();
        }
        BigRational::new(num, den)
    }

    /// If `self = ratio * other` for a single rational `ratio`, returns it.
    pub fn ratio_to(&self, other: &MultiPoly) -> Option<BigRational> {
        let (a, b) = self.aligned(other);
        if a.terms.len() != b.terms.len() || b.is_zero() {
            return None;
        }
        let mut ratio: Option<BigRational> = None;
        for (m, cb) in &b.terms {
            let ca = a.terms.get(m)?;
            let r = ca / cb;
            match &ratio {
                None => ratio = Some(r),
                Some(existing) if *existing == r => {}
                Some(_) => return None,
            }
        }
        ratio
    }

    /// Terms sorted by descending graded-lexicographic order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then_with(|| b.0.cmp(&a.0)));
        v
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            vars: self.vars.clone(),
            terms: self
                .sorted_terms()
                .into_iter()
                .map(|(m, c)| TermJson {
                    c: c.to_string(),
                    e: m.0.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<Self, PolyError> {
        let terms = json
            .terms
            .iter()
            .map(|t| {
                parse_rational(&t.c)
                    .map(|c| (t.e.clone(), c))
                    .map_err(|_| PolyError::BadCoefficient(t.c.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_terms_owned(json.vars.clone(), terms)
    }

    pub fn from_json_str(text: &str) -> Result<Self, PolyError> {
        let json: PolyJson =
            serde_json::from_str(text).map_err(|e| PolyError::Json(e.to_string()))?;
        Self::from_json(&json)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("polynomial JSON is always serializable")
    }

    /// Human-readable form, e.g. `8/3*b^6*c^6 + 48*b^4 - 1`.
    pub fn to_expr_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            for (v, e) in self.vars.iter().zip(&m.0) {
                match e {
                    0 => {}
                    1 => factors.push(v.clone()),
                    _ => factors.push(format!("{v}^{e}")),
                }
            }
            if !abs.is_one() || factors.is_empty() {
                factors.insert(0, abs.to_string());
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Parses an expression over the given ring. Identifiers not in `vars`
    /// are rejected.
    pub fn parse(text: &str, vars: &[&str]) -> Result<Self, PolyError> {
        parser::parse(text, Some(owned_vars(vars)))
    }

    /// Parses an expression, taking the ring from identifiers in order of appearance.
    pub fn parse_infer(text: &str) -> Result<Self, PolyError> {
        parser::parse(text, None)
    }
}

/// `base * (base - 1) * ... * (base - j + 1)`; the empty product for `j = 0`.
pub fn falling_factorial(base: &MultiPoly, j: u32) -> MultiPoly {
    let vars = base.vars();
    let mut acc = MultiPoly::one(&vars);
    for i in 0..j {
        let shifted = base - &MultiPoly::constant(&vars, BigRational::from_integer(BigInt::from(i)));
        acc = &acc * &shifted;
    }
    acc
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_expr_string())
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let (mut a, b) = self.aligned(rhs);
        for (m, c) in b.terms {
            match a.terms.get_mut(&m) {
                Some(existing) => {
                    *existing += c;
                    if existing.is_zero() {
                        a.terms.remove(&m);
                    }
                }
                None => {
                    a.terms.insert(m, c);
                }
            }
        }
        a
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let (a, b) = self.aligned(rhs);
        let mut acc: HashMap<Monomial, BigRational> =
            HashMap::with_capacity(a.terms.len() * b.terms.len() / 2 + 1);
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let prod = ca * cb;
                acc.entry(ma.mul(mb))
                    .and_modify(|c| *c += &prod)
                    .or_insert(prod);
            }
        }
        MultiPoly {
            vars: a.vars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// On-disk polynomial: `{"vars": [...], "terms": [{"c": "48", "e": [6, 4]}, ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub vars: Vec<String>,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub c: String,
    pub e: Vec<u32>,
}

mod parser {
    use super::*;

    #[derive(Debug, Clone, PartialEq)]
    enum Tok {
        Num(String),
        Ident(String),
        Plus,
        Minus,
        Star,
        Slash,
        Caret,
        LParen,
        RParen,
    }

    struct Token {
        tok: Tok,
        line: usize,
        column: usize,
    }

    fn err(line: usize, column: usize, message: impl Into<String>) -> PolyError {
        PolyError::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn tokenize(text: &str) -> Result<Vec<Token>, PolyError> {
        let mut out = Vec::new();
        let chars: Vec<char> = text.chars().collect();
        let (mut i, mut line, mut col) = (0, 1, 1);
        while i < chars.len() {
            let ch = chars[i];
            let (l, c) = (line, col);
            if ch == '\n' {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            if ch.is_whitespace() {
                i += 1;
                col += 1;
                continue;
            }
            let single = match ch {
                '+' => Some(Tok::Plus),
                '-' => Some(Tok::Minus),
                '*' => Some(Tok::Star),
                '/' => Some(Tok::Slash),
                '^' => Some(Tok::Caret),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Token { tok, line: l, column: c });
                i += 1;
                col += 1;
                continue;
            }
            if ch.is_ascii_digit() || ch == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token { tok: Tok::Num(s), line: l, column: c });
                continue;
            }
            if ch.is_alphabetic() || ch == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token { tok: Tok::Ident(s), line: l, column: c });
                continue;
            }
            return Err(err(l, c, format!("unexpected character `{ch}`")));
        }
        Ok(out)
    }

    struct Parser {
        toks: Vec<Token>,
        pos: usize,
        vars: Vec<String>,
        end: (usize, usize),
    }

    pub(super) fn parse(text: &str, vars: Option<Vec<String>>) -> Result<MultiPoly, PolyError> {
        let toks = tokenize(text)?;
        let vars = match vars {
            Some(v) => v,
            None => {
                let mut v: Vec<String> = Vec::new();
                for t in &toks {
                    if let Tok::Ident(name) = &t.tok {
                        if !v.contains(name) {
                            v.push(name.clone());
                        }
                    }
                }
                v
            }
        };
        let last_line = text.lines().count().max(1);
        let last_col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
        let mut p = Parser {
            toks,
            pos: 0,
            vars,
            end: (last_line, last_col),
        };
        if p.toks.is_empty() {
            return Err(err(1, 1, "empty expression"));
        }
        let value = p.expr()?;
        if let Some(t) = p.toks.get(p.pos) {
            return Err(err(t.line, t.column, "unexpected trailing input"));
        }
        Ok(value)
    }

    impl Parser {
        fn ring(&self) -> Vec<&str> {
            self.vars.iter().map(String::as_str).collect()
        }

        fn peek(&self) -> Option<&Tok> {
            self.toks.get(self.pos).map(|t| &t.tok)
        }

        fn here(&self) -> (usize, usize) {
            self.toks
                .get(self.pos)
                .map(|t| (t.line, t.column))
                .unwrap_or(self.end)
        }

        fn expr(&mut self) -> Result<MultiPoly, PolyError> {
            let mut acc = self.term()?;
            loop {
                match self.peek() {
                    Some(Tok::Plus) => {
                        self.pos += 1;
                        acc = &acc + &self.term()?;
                    }
                    Some(Tok::Minus) => {
                        self.pos += 1;
                        acc = &acc - &self.term()?;
                    }
                    _ => return Ok(acc),
                }
            }
        }

        fn term(&mut self) -> Result<MultiPoly, PolyError> {
            let mut acc = self.power()?;
            loop {
                match self.peek() {
                    Some(Tok::Star) => {
                        self.pos += 1;
                        acc = &acc * &self.power()?;
                    }
                    Some(Tok::Slash) => {
                        self.pos += 1;
                        let (line, column) = self.here();
                        let divisor = self.power()?;
                        let constant = divisor.constant_term();
                        if divisor.len() > 1 || (divisor.len() == 1 && constant.is_zero()) {
                            return Err(err(line, column, "division by a non-constant"));
                        }
                        if constant.is_zero() {
                            return Err(err(line, column, "division by zero"));
                        }
                        acc = acc.scale(&constant.recip());
                    }
                    Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                        acc = &acc * &self.power()?;
                    }
                    _ => return Ok(acc),
                }
            }
        }

        fn power(&mut self) -> Result<MultiPoly, PolyError> {
            let base = self.atom()?;
            if self.peek() == Some(&Tok::Caret) {
                self.pos += 1;
                let (line, column) = self.here();
                match self.peek().cloned() {
                    Some(Tok::Num(s)) => {
                        self.pos += 1;
                        let k: u32 = s
                            .parse()
                            .map_err(|_| err(line, column, format!("bad exponent `{s}`")))?;
                        return Ok(base.pow(k));
                    }
                    _ => return Err(err(line, column, "expected a non-negative integer exponent")),
                }
            }
            Ok(base)
        }

        fn atom(&mut self) -> Result<MultiPoly, PolyError> {
            let (line, column) = self.here();
            let tok = self
                .peek()
                .cloned()
                .ok_or_else(|| err(line, column, "unexpected end of input"))?;
            self.pos += 1;
            match tok {
                Tok::Num(s) => {
                    let c = parse_rational(&s)
                        .map_err(|_| err(line, column, format!("bad number `{s}`")))?;
                    Ok(MultiPoly::constant(&self.ring(), c))
                }
                Tok::Ident(name) => MultiPoly::var(&self.ring(), &name).map_err(|_| {
                    err(line, column, format!("unknown variable `{name}`"))
                }),
                Tok::Minus => Ok(-&self.power()?),
                Tok::Plus => self.power(),
                Tok::LParen => {
                    let inner = self.expr()?;
                    let (l2, c2) = self.here();
                    if self.peek() != Some(&Tok::RParen) {
                        return Err(err(l2, c2, "expected `)`"));
                    }
                    self.pos += 1;
                    Ok(inner)
                }
                other => Err(err(line, column, format!("unexpected token {other:?}"))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat};
    use proptest::prelude::*;

    fn p(text: &str, vars: &[&str]) -> MultiPoly {
        MultiPoly::parse(text, vars).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let a = p("1 + 2*z", &["z"]);
        assert_eq!(&a * &a, p("1 + 4*z + 4*z^2", &["z"]));
        assert_eq!(p("1 + c^2", &["c"]).pow(3), p("1 + 3*c^2 + 3*c^4 + c^6", &["c"]));
        let zero = &a - &a;
        assert!(zero.is_zero());
        assert_eq!(zero.len(), 0);
    }

    #[test]
    fn substitute_examples() {
        let m3 = p("m3^2", &["m3"]);
        let got = m3.substitute("m3", &p("b^2 + 5", &["b"])).unwrap();
        assert_eq!(got, p("b^4 + 10*b^2 + 25", &["b"]));
        let x2 = p("x2", &["x2"]);
        assert_eq!(x2.substitute("x2", &p("a^2 + 8", &["a"])).unwrap(), p("a^2 + 8", &["a"]));
        let z = p("z", &["z"]);
        assert!(z.substitute("z", &MultiPoly::zero(&[])).unwrap().is_zero());
        assert_eq!(
            z.substitute("w", &MultiPoly::zero(&[])),
            Err(PolyError::UnknownVariable("w".into()))
        );
    }

    #[test]
    fn substitute_rational_examples() {
        let num = p("c^2", &["c"]);
        let den = p("1 + c^2", &["c"]);
        let z = p("z", &["z"]);
        assert_eq!(z.substitute_rational("z", &num, &den, 1).unwrap(), p("c^2", &["c"]));
        let one_minus = p("1 - z", &["z"]);
        assert_eq!(
            one_minus.substitute_rational("z", &num, &den, 1).unwrap(),
            p("1", &["c"])
        );
        let z2 = p("z^2", &["z"]);
        assert_eq!(
            z2.substitute_rational("z", &num, &den, 3).unwrap(),
            p("c^4*(1 + c^2)", &["c"])
        );
        assert!(matches!(
            z2.substitute_rational("z", &num, &den, 1),
            Err(PolyError::InsufficientClearPower { needed: 2, given: 1, .. })
        ));
    }

    #[test]
    fn falling_factorial_examples() {
        let m3 = p("m3", &["m3"]);
        assert_eq!(falling_factorial(&m3, 0), p("1", &["m3"]));
        assert_eq!(falling_factorial(&m3, 2), p("m3^2 - m3", &["m3"]));
        // Coefficient-wise oracle: expand (x-1)(x-2)(x-3) by hand.
        let got = falling_factorial(&p("x2 - 1", &["x2"]), 3);
        let expected = MultiPoly::from_terms(
            &["x2"],
            vec![
                (vec![3], int(1)),
                (vec![2], int(-6)),
                (vec![1], int(11)),
                (vec![0], int(-6)),
            ],
        )
        .unwrap();
        assert_eq!(got, expected);
    }

    #[test]
    fn eval_and_coeff_examples() {
        let a = p("1 + 2*z", &["z"]);
        assert_eq!(a.eval_at(&[("z", rat(1, 2))]).unwrap(), int(2));
        assert_eq!(a.eval_univariate(&rat(1, 2)).unwrap(), int(2));
        assert_eq!(
            a.eval_at(&[("w", int(1))]),
            Err(PolyError::MissingAssignment("z".into()))
        );
        let h1_bracket = p(
            "48*b^6*c^4 + 664*b^4*c^4 - 48*b^4*c^2 + 2884*b^2*c^4 - 546*b^2*c^2 + 36*b^2 + 3003*c^6 + 3766*c^4 - 1557*c^2 + 180",
            &["b", "c"],
        );
        assert_eq!(h1_bracket.coeff(&[6, 4]), int(48));
        assert_eq!(h1_bracket.coeff_of(&[("b", 6), ("c", 4)]).unwrap(), int(48));
        assert_eq!(h1_bracket.coeff(&[1, 1]), int(0));
    }

    #[test]
    fn parse_examples() {
        let a = MultiPoly::parse_infer("1 + 2*z").unwrap();
        assert_eq!(a.vars(), vec!["z"]);
        assert_eq!(a.coeff(&[0]), int(1));
        assert_eq!(a.coeff(&[1]), int(2));
        let t = p("3/2*b^2*c", &["b", "c"]);
        assert_eq!(t.len(), 1);
        assert_eq!(t.coeff(&[2, 1]), rat(3, 2));
        // Mathematica-style implicit products and decimal constants.
        let m = p("68923472314160553238917/4 a^4 b^12 + 2.75 c", &["a", "b", "c"]);
        assert_eq!(
            m.coeff(&[4, 12, 0]),
            parse_rational("68923472314160553238917/4").unwrap()
        );
        assert_eq!(m.coeff(&[0, 0, 1]), rat(11, 4));
    }

    #[test]
    fn parse_errors_carry_positions() {
        match MultiPoly::parse("1 + 2*q", &["z"]) {
            Err(PolyError::Parse { line, column, .. }) => assert_eq!((line, column), (1, 7)),
            other => panic!("unexpected {other:?}"),
        }
        match MultiPoly::parse("1 +\n  2*z^", &["z"]) {
            Err(PolyError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(MultiPoly::parse("z / z", &["z"]).is_err());
        assert!(MultiPoly::parse("(1 + z", &["z"]).is_err());
        assert!(MultiPoly::parse("1 $ 2", &["z"]).is_err());
        assert!(MultiPoly::parse("", &["z"]).is_err());
    }

    #[test]
    fn json_format() {
        let text = r#"{"vars": ["b","c"], "terms": [{"c": "48", "e": [6,4]}, {"c": "-3/2", "e": [0,0]}]}"#;
        let q = MultiPoly::from_json_str(text).unwrap();
        assert_eq!(q.coeff(&[6, 4]), int(48));
        assert_eq!(q.constant_term(), rat(-3, 2));
        assert_eq!(MultiPoly::from_json_str(&q.to_json_string()).unwrap(), q);
        let bad = r#"{"vars": ["b"], "terms": [{"c": "1", "e": [1,2]}]}"#;
        assert!(matches!(MultiPoly::from_json_str(bad), Err(PolyError::ExponentLength { .. })));
        let bad_coeff = r#"{"vars": ["b"], "terms": [{"c": "x", "e": [1]}]}"#;
        assert!(matches!(MultiPoly::from_json_str(bad_coeff), Err(PolyError::BadCoefficient(_))));
    }

    #[test]
    fn mismatched_rings_align() {
        let a = p("z + 1", &["z"]);
        let b = p("c", &["c"]);
        let s = &a + &b;
        assert_eq!(s.vars(), vec!["z", "c"]);
        assert_eq!(s, p("z + c + 1", &["c", "z"]));
        assert_eq!(s.in_ring(&["c", "z"]).unwrap().vars(), vec!["c", "z"]);
        assert!(s.in_ring(&["c"]).is_err());
    }

    #[test]
    fn content_and_ratio() {
        let a = p("6*x^2 + 4/3*x", &["x"]);
        assert_eq!(a.content(), rat(2, 3));
        let b = a.scale(&rat(-5, 7));
        assert_eq!(b.ratio_to(&a), Some(rat(-5, 7)));
        assert_eq!(p("x + 1", &["x"]).ratio_to(&p("x + 2", &["x"])), None);
    }

    #[test]
    fn derivative_works() {
        assert_eq!(p("3*z^3 + z + 7", &["z"]).derivative("z").unwrap(), p("9*z^2 + 1", &["z"]));
    }

    const VARS: [&str; 3] = ["x", "y", "w"];

    fn poly_strategy() -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec(((0u32..4, 0u32..4, 0u32..3), -9i64..10, 1i64..5), 0..6).prop_map(
            |terms| {
                MultiPoly::from_terms(
                    &VARS,
                    terms
                        .into_iter()
                        .map(|((a, b, c), n, d)| (vec![a, b, c], rat(n, d))),
                )
                .unwrap()
            },
        )
    }

    fn point() -> impl Strategy<Value = Vec<BigRational>> {
        prop::collection::vec((-6i64..7, 1i64..4).prop_map(|(n, d)| rat(n, d)), 3)
    }

    proptest! {
        #[test]
        fn ring_axioms(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a * &b).terms().all(|(_, c)| !c.is_zero()));
        }

        #[test]
        fn substitution_is_homomorphism(a in poly_strategy(), b in poly_strategy(), r in poly_strategy()) {
            let r = r.in_ring(&VARS).unwrap();
            let s = |q: &MultiPoly| q.substitute("x", &r).unwrap();
            prop_assert_eq!(s(&(&a * &b)), &s(&a) * &s(&b));
            prop_assert_eq!(s(&(&a + &b)), &s(&a) + &s(&b));
        }

        #[test]
        fn eval_commutes_with_substitution(a in poly_strategy(), r in poly_strategy(), pt in point()) {
            let assign: Vec<(&str, BigRational)> = VARS.iter().copied().zip(pt.iter().cloned()).collect();
            let composed = a.substitute("x", &r).unwrap();
            let rest: Vec<(&str, BigRational)> = assign.iter().filter(|(k, _)| *k != "x").cloned().collect();
            let mut full = rest.clone();
            full.push(("x", r.eval_at(&assign).unwrap()));
            prop_assert_eq!(composed.eval_at(&assign).unwrap(), a.eval_at(&full).unwrap());
        }

        #[test]
        fn text_and_json_round_trip(a in poly_strategy()) {
            prop_assert_eq!(MultiPoly::parse(&a.to_expr_string(), &VARS).unwrap(), a.clone());
            prop_assert_eq!(MultiPoly::from_json(&a.to_json()).unwrap(), a);
        }
    }
}
