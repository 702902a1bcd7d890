//! Exact arithmetic in `Z[q]` and in the local ring `R = Z[q]_(p,q-1)`.
//!
//! `IntPoly` is a dense polynomial in `q` with arbitrary-precision integer
//! coefficients; it houses the q-analogs `(n)_q`, q-factorials and Gaussian
//! binomials. `LocalScalar` is a fraction of `IntPoly`s whose denominator is
//! a unit at the maximal ideal `(p, q-1)`, i.e. an element of `R`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as DeError;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::context::Context;
use crate::error::{QError, QResult};

/// A polynomial in `q` with integer coefficients, stored densely in
/// ascending order with no trailing zeros (the zero polynomial is empty).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        IntPoly::constant(1)
    }

    /// The variable `q`.
    pub fn q() -> Self {
        IntPoly::monomial(BigInt::one(), 1)
    }

    pub fn constant(c: i64) -> Self {
        IntPoly::from_coeffs(vec![BigInt::from(c)])
    }

    pub fn constant_big(c: BigInt) -> Self {
        IntPoly::from_coeffs(vec![c])
    }

    pub fn monomial(c: BigInt, degree: usize) -> Self {
        if c.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); degree + 1];
        coeffs[degree] = c;
        IntPoly { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree of a nonzero polynomial; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval_at_one(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return IntPoly::zero();
        }
        IntPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = IntPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Substitution `q -> q^m`: spreads coefficient `i` to index `i*m`.
    pub fn subst_q_power(&self, m: usize) -> Self {
        assert!(m >= 1, "substitution exponent must be positive");
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); (self.coeffs.len() - 1) * m + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * m] = c.clone();
        }
        IntPoly::from_coeffs(coeffs)
    }

    /// Coefficients of `f(u + 1)`, i.e. the expansion of `f` in powers of `q - 1`,
    /// by repeated synthetic division by `q - 1`.
    pub fn shift_coeffs(&self) -> Vec<BigInt> {
        let mut work = self.coeffs.clone();
        let mut out = Vec::with_capacity(work.len());
        for _ in 0..work.len() {
            // divide work by (q - 1): remainder is work(1)
            let mut quot = vec![BigInt::zero(); work.len().saturating_sub(1)];
            let mut carry = BigInt::zero();
            for i in (0..work.len()).rev() {
                carry += &work[i];
                if i > 0 {
                    quot[i - 1] = carry.clone();
                }
            }
            out.push(carry);
            work = quot;
        }
        out
    }

    /// Exact quotient `self / g` in `Z[q]`, when it exists.
    ///
    /// Monic divisors (every q-analog used here) go through pure integer
    /// long division; the general case falls back to long division over the
    /// rationals followed by an integrality check.
    pub fn exact_div(&self, g: &IntPoly) -> QResult<IntPoly> {
        if g.is_zero() {
            return Err(QError::Domain("division by the zero polynomial".into()));
        }
        if self.is_zero() {
            return Ok(IntPoly::zero());
        }
        if self.coeffs.len() < g.coeffs.len() {
            return Err(QError::NonDivisible {
                context: format!("({}) / ({}): degree too small", self, g),
            });
        }
        if g.coeffs.last().map_or(false, BigInt::is_one) {
            return self.exact_div_monic(g);
        }
        let mut rem: Vec<BigRational> = self
            .coeffs
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let div: Vec<BigRational> = g
            .coeffs
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let dn = div.len();
        let lead = div[dn - 1].clone();
        let mut quot = vec![BigRational::zero(); rem.len() - dn + 1];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dn - 1] / &lead;
            if !c.is_zero() {
                for (j, d) in div.iter().enumerate() {
                    let t = &c * d;
                    rem[i + j] -= t;
                }
            }
            quot[i] = c;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            let rendered = render_rational_poly(&rem);
            return Err(QError::NonDivisible {
                context: format!("({}) / ({}): remainder {}", self, g, rendered),
            });
        }
        let mut out = Vec::with_capacity(quot.len());
        for c in quot {
            if !c.denom().is_one() {
                return Err(QError::NonDivisible {
                    context: format!("({}) / ({}): non-integer quotient", self, g),
                });
            }
            out.push(c.numer().clone());
        }
        Ok(IntPoly::from_coeffs(out))
    }

    fn exact_div_monic(&self, g: &IntPoly) -> QResult<IntPoly> {
        if self.coeffs.len() < g.coeffs.len() {
            return Err(QError::NonDivisible {
                context: format!("({}) / ({}): degree too small", self, g),
            });
        }
        let mut rem = self.coeffs.clone();
        let dn = g.coeffs.len();
        let mut quot = vec![BigInt::zero(); rem.len() - dn + 1];
        for i in (0..quot.len()).rev() {
            let c = std::mem::take(&mut rem[i + dn - 1]);
            if !c.is_zero() {
                for (j, d) in g.coeffs.iter().enumerate().take(dn - 1) {
                    rem[i + j] -= &c * d;
                }
            }
            quot[i] = c;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(QError::NonDivisible {
                context: format!(
                    "({}) / ({}): remainder {}",
                    self,
                    g,
                    IntPoly::from_coeffs(rem)
                ),
            });
        }
        Ok(IntPoly::from_coeffs(quot))
    }

    /// True when every coefficient is divisible by `d`.
    pub fn divisible_by_int(&self, d: &BigInt) -> bool {
        self.coeffs.iter().all(|c| (c % d).is_zero())
    }

    /// Exact division of every coefficient by `d`.
    pub fn div_int_exact(&self, d: &BigInt) -> QResult<IntPoly> {
        if !self.divisible_by_int(d) {
            return Err(QError::NonDivisible {
                context: format!("({}) / {}: non-integer coefficient", self, d),
            });
        }
        Ok(IntPoly {
            coeffs: self.coeffs.iter().map(|c| c / d).collect(),
        })
    }
}

fn render_rational_poly(coeffs: &[BigRational]) -> String {
    let ints: Vec<BigInt> = coeffs
        .iter()
        .map(|c| {
            if c.denom().is_one() {
                c.numer().clone()
            } else {
                BigInt::zero()
            }
        })
        .collect();
    if coeffs.iter().all(|c| c.denom().is_one()) {
        format!("{}", IntPoly::from_coeffs(ints))
    } else {
        "non-integral remainder".to_string()
    }
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        IntPoly::from_coeffs(coeffs)
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        self + &(-rhs)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        IntPoly::from_coeffs(coeffs)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{}", mag)?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{}", mag)?;
                    }
                    if i == 1 {
                        write!(f, "q")?;
                    } else {
                        write!(f, "q^{}", i)?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for IntPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let strings: Vec<String> = Vec::deserialize(deserializer)?;
        let mut coeffs = Vec::with_capacity(strings.len());
        for s in strings {
            let c: BigInt = s
                .parse()
                .map_err(|_| D::Error::custom(format!("invalid integer coefficient {:?}", s)))?;
            coeffs.push(c);
        }
        Ok(IntPoly::from_coeffs(coeffs))
    }
}

/// The q-analog `(n)_q = 1 + q + ... + q^(n-1)`; `(0)_q = 0`.
pub fn q_int(n: usize) -> IntPoly {
    IntPoly::from_coeffs(vec![BigInt::one(); n])
}

/// `(n)_q! = (1)_q (2)_q ... (n)_q`.
pub fn q_factorial(n: usize) -> IntPoly {
    let mut acc = IntPoly::one();
    for j in 1..=n {
        acc = &acc * &q_int(j);
    }
    acc
}

/// Gaussian binomial by the Pascal-type recurrence
/// `C(n,k)_q = C(n-1,k-1)_q + q^k C(n-1,k)_q`.
pub fn q_binomial(n: usize, k: usize) -> QResult<IntPoly> {
    if k > n {
        return Err(QError::Domain(format!(
            "q-binomial index out of range: k = {} > n = {}",
            k, n
        )));
    }
    // row-by-row; row m holds C(m, j)_q for j <= min(k, m)
    let mut row = vec![IntPoly::one()];
    for m in 1..=n {
        let width = k.min(m);
        let mut next = Vec::with_capacity(width + 1);
        next.push(IntPoly::one());
        for j in 1..=width {
            let mut entry = row[j - 1].clone();
            if let Some(u) = row.get(j) {
                entry = &entry + &(&IntPoly::monomial(BigInt::one(), j) * u);
            }
            next.push(entry);
        }
        row = next;
    }
    Ok(row[k].clone())
}

/// `Phi_{p^e}(q) = (p)_{q^{p^(e-1)}}`, the irreducible factor of `(p^e)_q`
/// that is not a unit of the local ring.
pub fn cyclotomic_pk(p: u32, e: u32) -> IntPoly {
    let inner = (p as usize).pow(e - 1);
    q_int(p as usize).subst_q_power(inner)
}

/// Order with respect to the maximal ideal `(p, q-1)`; zero has infinite order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AdicOrder {
    Finite(u64),
    Infinite,
}

impl AdicOrder {
    pub fn is_zero(&self) -> bool {
        matches!(self, AdicOrder::Finite(0))
    }

    pub fn at_least(&self, k: u64) -> bool {
        match self {
            AdicOrder::Finite(v) => *v >= k,
            AdicOrder::Infinite => true,
        }
    }
}

impl fmt::Display for AdicOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdicOrder::Finite(v) => write!(f, "{}", v),
            AdicOrder::Infinite => write!(f, "inf"),
        }
    }
}

fn int_p_valuation(c: &BigInt, p: &BigInt) -> u64 {
    debug_assert!(!c.is_zero());
    let mut v = 0;
    let mut c = c.clone();
    loop {
        let (q, r) = c.div_rem(p);
        if r.is_zero() {
            v += 1;
            c = q;
        } else {
            return v;
        }
    }
}

/// Largest `k` with `f` in `(p, q-1)^k`, computed by expanding `f` in powers
/// of `q - 1` and minimizing `j + v_p(c_j)` over the shifted coefficients.
/// The expansion is produced incrementally so that units are detected after
/// a single synthetic-division pass.
pub fn adic_order(f: &IntPoly, ctx: &Context) -> AdicOrder {
    if f.is_zero() {
        return AdicOrder::Infinite;
    }
    let p = BigInt::from(ctx.p());
    let mut work = f.coeffs.clone();
    let mut best = u64::MAX;
    let mut j = 0u64;
    while !work.is_empty() {
        // divide work by (q - 1): remainder is work(1)
        let mut quot = vec![BigInt::zero(); work.len() - 1];
        let mut carry = BigInt::zero();
        for i in (0..work.len()).rev() {
            carry += &work[i];
            if i > 0 {
                quot[i - 1] = carry.clone();
            }
        }
        if !carry.is_zero() {
            best = best.min(j + int_p_valuation(&carry, &p));
        }
        if best <= j + 1 {
            // later terms contribute at least j + 1
            break;
        }
        while quot.last().map_or(false, Zero::is_zero) {
            quot.pop();
        }
        work = quot;
        j += 1;
    }
    AdicOrder::Finite(best)
}

/// An element of the local ring `R = Z[q]_(p,q-1)`, stored as an unreduced
/// fraction. Equality is cross-multiplication; fractions are only normalized
/// on demand for display.
#[derive(Debug, Clone)]
pub struct LocalScalar {
    num: IntPoly,
    den: IntPoly,
}

impl LocalScalar {
    /// Builds `num/den`, validating that `den` is a unit of `R`
    /// (its value at `q = 1` is not divisible by `p`).
    pub fn new(num: IntPoly, den: IntPoly, ctx: &Context) -> QResult<Self> {
        if den.is_zero() {
            return Err(QError::Domain("zero denominator".into()));
        }
        if (den.eval_at_one() % BigInt::from(ctx.p())).is_zero() {
            return Err(QError::DenominatorNotUnit {
                den: den.to_string(),
                p: ctx.p(),
            });
        }
        Ok(LocalScalar { num, den }.canon())
    }

    pub fn from_int_poly(num: IntPoly) -> Self {
        LocalScalar {
            num,
            den: IntPoly::one(),
        }
        .canon()
    }

    pub fn from_int(c: i64) -> Self {
        LocalScalar::from_int_poly(IntPoly::constant(c))
    }

    pub fn zero() -> Self {
        LocalScalar::from_int(0)
    }

    pub fn one() -> Self {
        LocalScalar::from_int(1)
    }

    pub fn num(&self) -> &IntPoly {
        &self.num
    }

    pub fn den(&self) -> &IntPoly {
        &self.den
    }

    fn canon(mut self) -> Self {
        if self.num.is_zero() {
            self.den = IntPoly::one();
            return self;
        }
        // most intermediate fractions are exactly divisible; clearing the
        // denominator early keeps products from compounding
        if !self.den.is_one() && self.den.coeffs().last().map_or(false, BigInt::is_one) {
            if let Ok(q) = self.num.exact_div_monic(&self.den) {
                self.num = q;
                self.den = IntPoly::one();
            }
        }
        self
    }

    /// Builds `num/den` when the denominator is not a unit, by cancelling the
    /// non-unit content of `den` into `num`.
    ///
    /// The only non-unit prime factors a q-analog denominator can carry are
    /// the integer `p` and the cyclotomics `Phi_{p^e}(q)`; each is stripped
    /// from `den` with multiplicity, and the same factor must divide `num`
    /// exactly or the quotient does not lie in `R`.
    pub fn from_quotient(num: IntPoly, den: IntPoly, ctx: &Context) -> QResult<Self> {
        if den.is_zero() {
            return Err(QError::Domain("zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(LocalScalar::zero());
        }
        let mut num = num;
        let mut den = den;
        let p = ctx.p();
        let pbig = BigInt::from(p);
        let mut e = 1u32;
        loop {
            let c = cyclotomic_pk(p, e);
            if c.degree() > den.degree() {
                break;
            }
            while let Ok(d) = den.exact_div(&c) {
                den = d;
                num = num.exact_div(&c).map_err(|_| QError::NonDivisible {
                    context: format!("({}) not divisible by {}", num, c),
                })?;
            }
            e += 1;
        }
        while den.divisible_by_int(&pbig) {
            den = den.div_int_exact(&pbig).unwrap();
            num = num.div_int_exact(&pbig).map_err(|_| QError::NonDivisible {
                context: format!("({}) not divisible by {}", num, p),
            })?;
        }
        LocalScalar::new(num, den, ctx)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Exact division by an integer, staying in `R`.
    pub fn div_int_exact(&self, d: &BigInt) -> QResult<Self> {
        Ok(LocalScalar {
            num: self.num.div_int_exact(d)?,
            den: self.den.clone(),
        }
        .canon())
    }

    /// Exact division by a polynomial `g` whose non-unit content is a product
    /// of `p` and `Phi_{p^e}`; this covers every q-analog divisor used here.
    pub fn div_poly_exact(&self, g: &IntPoly, ctx: &Context) -> QResult<Self> {
        LocalScalar::from_quotient(self.num.clone(), &self.den * g, ctx)
    }

    /// Divides the numerator exactly by `g`, keeping the validated
    /// denominator. Fails when `g` does not divide the numerator in `Z[q]`.
    pub fn div_num_exact(&self, g: &IntPoly) -> QResult<Self> {
        Ok(LocalScalar {
            num: self.num.exact_div(g)?,
            den: self.den.clone(),
        }
        .canon())
    }

    /// Exact division by another scalar.
    pub fn div_exact(&self, other: &LocalScalar, ctx: &Context) -> QResult<Self> {
        if other.is_zero() {
            return Err(QError::Domain("division by zero scalar".into()));
        }
        LocalScalar::from_quotient(&self.num * &other.den, &self.den * &other.num, ctx)
    }

    /// Multiplicative inverse, defined exactly for units of `R`.
    pub fn invert(&self, ctx: &Context) -> QResult<Self> {
        LocalScalar::one().div_exact(self, ctx)
    }

    /// Applies `q -> q^p` to numerator and denominator; the value at `q = 1`
    /// is unchanged, so the result is again a valid scalar.
    pub fn phi(&self, ctx: &Context) -> Self {
        let p = ctx.p() as usize;
        LocalScalar {
            num: self.num.subst_q_power(p),
            den: self.den.subst_q_power(p),
        }
    }

    /// Order of the fraction: the denominator has order zero by the type
    /// invariant, so this is the order of the numerator.
    pub fn adic_order(&self, ctx: &Context) -> AdicOrder {
        adic_order(&self.num, ctx)
    }

    /// True iff the scalar is a unit of `R`, i.e. has order zero.
    pub fn is_unit(&self, ctx: &Context) -> bool {
        self.adic_order(ctx).is_zero()
    }

    /// Optional normalization used for display and serialized tables:
    /// cancels integer content, the sign of the denominator, and the
    /// denominator itself whenever it divides the numerator exactly.
    pub fn normalized(&self) -> Self {
        if self.num.is_zero() {
            return LocalScalar::zero();
        }
        if let Ok(q) = self.num.exact_div(&self.den) {
            return LocalScalar::from_int_poly(q);
        }
        let mut content = BigInt::zero();
        for c in self.num.coeffs().iter().chain(self.den.coeffs()) {
            content = content.gcd(c);
        }
        if self.den.coeffs().last().map_or(false, Signed::is_negative) {
            content = -content;
        }
        LocalScalar {
            num: self.num.div_int_exact(&content).unwrap(),
            den: self.den.div_int_exact(&content).unwrap(),
        }
    }
}

impl PartialEq for LocalScalar {
    fn eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Eq for LocalScalar {}

impl Add for &LocalScalar {
    type Output = LocalScalar;
    fn add(self, rhs: &LocalScalar) -> LocalScalar {
        if self.den == rhs.den {
            return LocalScalar {
                num: &self.num + &rhs.num,
                den: self.den.clone(),
            }
            .canon();
        }
        LocalScalar {
            num: &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            den: &self.den * &rhs.den,
        }
        .canon()
    }
}

impl Sub for &LocalScalar {
    type Output = LocalScalar;
    fn sub(self, rhs: &LocalScalar) -> LocalScalar {
        self + &(-rhs)
    }
}

impl Neg for &LocalScalar {
    type Output = LocalScalar;
    fn neg(self) -> LocalScalar {
        LocalScalar {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Mul for &LocalScalar {
    type Output = LocalScalar;
    fn mul(self, rhs: &LocalScalar) -> LocalScalar {
        LocalScalar {
            num: &self.num * &rhs.num,
            den: &self.den * &rhs.den,
        }
        .canon()
    }
}

impl fmt::Display for LocalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.normalized();
        if n.den.is_one() {
            write!(f, "{}", n.num)
        } else {
            write!(f, "({})/({})", n.num, n.den)
        }
    }
}

impl Serialize for LocalScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("LocalScalar", 2)?;
        st.serialize_field("num", &self.num)?;
        st.serialize_field("den", &self.den)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for LocalScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            num: IntPoly,
            den: IntPoly,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        // the unit condition depends on p and is re-checked against a Context
        Ok(LocalScalar {
            num: raw.num,
            den: raw.den,
        })
    }
}

impl LocalScalar {
    /// Re-validates the denominator against a context, for deserialized data.
    pub fn validate(&self, ctx: &Context) -> QResult<()> {
        LocalScalar::new(self.num.clone(), self.den.clone(), ctx).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u32) -> Context {
        Context::new(p).unwrap()
    }

    fn poly(coeffs: &[i64]) -> IntPoly {
        IntPoly::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    #[test]
    fn q_int_basics() {
        assert!(q_int(0).is_zero());
        assert_eq!(q_int(1), IntPoly::one());
        assert_eq!(q_int(3), poly(&[1, 1, 1]));
    }

    #[test]
    fn q_int_specializes_to_n() {
        for n in 0..=12 {
            assert_eq!(q_int(n).eval_at_one(), BigInt::from(n));
        }
    }

    #[test]
    fn q_factorial_three() {
        // (1+q)(1+q+q^2)
        assert_eq!(q_factorial(3), poly(&[1, 2, 2, 1]));
    }

    #[test]
    fn q_binomial_values() {
        for n in 0..=6 {
            assert_eq!(q_binomial(n, 0).unwrap(), IntPoly::one());
            assert_eq!(q_binomial(n, n).unwrap(), IntPoly::one());
        }
        assert_eq!(q_binomial(4, 2).unwrap(), poly(&[1, 1, 2, 1, 1]));
        assert!(q_binomial(3, 4).is_err());
    }

    #[test]
    fn q_binomial_matches_factorial_division() {
        for n in 0..=12usize {
            for k in 0..=n {
                let denom = &q_factorial(k) * &q_factorial(n - k);
                let via_div = q_factorial(n).exact_div(&denom).unwrap();
                let via_rec = q_binomial(n, k).unwrap();
                assert_eq!(via_div, via_rec, "n={} k={}", n, k);
                assert_eq!(via_rec, q_binomial(n, n - k).unwrap());
            }
        }
    }

    #[test]
    fn subst_q_power_examples() {
        assert_eq!(poly(&[1, 1]).subst_q_power(2), poly(&[1, 0, 1]));
        assert_eq!(q_int(2).subst_q_power(3), poly(&[1, 0, 0, 1]));
        assert!(IntPoly::zero().subst_q_power(3).is_zero());
    }

    #[test]
    fn exact_div_examples() {
        // (q^2 - 1) / (q - 1) = q + 1
        assert_eq!(
            poly(&[-1, 0, 1]).exact_div(&poly(&[-1, 1])).unwrap(),
            poly(&[1, 1])
        );
        let denom = &q_factorial(2) * &q_factorial(2);
        assert_eq!(
            q_factorial(4).exact_div(&denom).unwrap(),
            q_binomial(4, 2).unwrap()
        );
        assert!(matches!(
            poly(&[1, 1]).exact_div(&poly(&[-1, 1])),
            Err(QError::NonDivisible { .. })
        ));
    }

    #[test]
    fn exact_div_non_monic() {
        let f = &poly(&[2, 4]) * &poly(&[3, 0, 5]);
        assert_eq!(f.exact_div(&poly(&[2, 4])).unwrap(), poly(&[3, 0, 5]));
        assert!(poly(&[1, 0, 1]).exact_div(&poly(&[0, 2])).is_err());
    }

    #[test]
    fn adic_order_examples() {
        let c2 = ctx(2);
        assert_eq!(adic_order(&poly(&[2]), &c2), AdicOrder::Finite(1));
        assert_eq!(adic_order(&q_int(2), &c2), AdicOrder::Finite(1));
        assert_eq!(adic_order(&IntPoly::one(), &c2), AdicOrder::Finite(0));
        assert_eq!(adic_order(&IntPoly::zero(), &c2), AdicOrder::Infinite);
        // (q-1)^2 * 2 has order 3
        let f = &(&poly(&[-1, 1]) * &poly(&[-1, 1])) * &poly(&[2]);
        assert_eq!(adic_order(&f, &c2), AdicOrder::Finite(3));
    }

    #[test]
    fn adic_order_superadditive() {
        let c3 = ctx(3);
        let samples = [
            poly(&[3]),
            poly(&[-1, 1]),
            q_int(3),
            poly(&[2, 1]),
            poly(&[9, -1, 1]),
            q_int(6),
        ];
        for f in &samples {
            for g in &samples {
                let of = adic_order(f, &c3);
                let og = adic_order(g, &c3);
                let ofg = adic_order(&(f * g), &c3);
                if let (AdicOrder::Finite(a), AdicOrder::Finite(b)) = (of, og) {
                    assert!(ofg.at_least(a + b));
                    // the associated graded is a domain on these witnesses
                    assert_eq!(ofg, AdicOrder::Finite(a + b));
                }
            }
        }
    }

    #[test]
    fn local_scalar_constructors() {
        let c2 = ctx(2);
        assert!(LocalScalar::new(IntPoly::one(), q_int(3), &c2).is_ok());
        assert!(matches!(
            LocalScalar::new(IntPoly::one(), q_int(2), &c2),
            Err(QError::DenominatorNotUnit { .. })
        ));
    }

    #[test]
    fn unit_detection() {
        let c2 = ctx(2);
        assert!(LocalScalar::from_int_poly(q_int(3)).is_unit(&c2));
        assert!(!LocalScalar::from_int_poly(q_int(2)).is_unit(&c2));
        assert!(LocalScalar::from_int_poly(IntPoly::q()).is_unit(&c2));
    }

    #[test]
    fn phi_scalar_examples() {
        let c3 = ctx(3);
        let q = LocalScalar::from_int_poly(IntPoly::q());
        assert_eq!(
            q.phi(&c3),
            LocalScalar::from_int_poly(IntPoly::monomial(BigInt::one(), 3))
        );
        let n5 = LocalScalar::from_int_poly(q_int(5));
        assert_eq!(
            n5.phi(&c3),
            LocalScalar::from_int_poly(q_int(5).subst_q_power(3))
        );
        assert_eq!(LocalScalar::one().phi(&c3), LocalScalar::one());
    }

    #[test]
    fn from_quotient_cancels_non_unit_content() {
        let c2 = ctx(2);
        // (4)_q! / ((2)_q! (2)_q!) = C(4,2)_q, denominator (1+q)^2 is non-unit
        let den = &q_factorial(2) * &q_factorial(2);
        let s = LocalScalar::from_quotient(q_factorial(4), den, &c2).unwrap();
        assert_eq!(s, LocalScalar::from_int_poly(q_binomial(4, 2).unwrap()));
        assert!(s.den().is_one());
        // 1 / (1+q) is not in R at p = 2
        assert!(LocalScalar::from_quotient(IntPoly::one(), q_int(2), &c2).is_err());
        // 1 / (3)_q is fine at p = 2
        let t = LocalScalar::from_quotient(IntPoly::one(), q_int(3), &c2).unwrap();
        assert!(t.is_unit(&c2));
    }

    #[test]
    fn from_quotient_strips_integer_p_content() {
        let c2 = ctx(2);
        let s = LocalScalar::from_quotient(poly(&[2, 2]), poly(&[2]), &c2).unwrap();
        assert_eq!(s, LocalScalar::from_int_poly(poly(&[1, 1])));
        assert!(LocalScalar::from_quotient(poly(&[1]), poly(&[2]), &c2).is_err());
    }

    #[test]
    fn cross_multiplication_equality() {
        let c2 = ctx(2);
        let a = LocalScalar::new(q_int(3), IntPoly::one(), &c2).unwrap();
        let b = LocalScalar::new(&q_int(3) * &q_int(5), q_int(5), &c2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn congruence_p_qk_mod_q_minus_one_and_mod_p() {
        // (p)_{q^k} = p mod (q-1) and (p)_{q^k} = (k)_q^(p-1) (q-1)^(p-1) mod p
        for p in [2usize, 3, 5] {
            let c = ctx(p as u32);
            for k in 1..=5usize {
                let lhs = q_int(p).subst_q_power(k);
                let d1 = &lhs - &IntPoly::constant(p as i64);
                assert!(d1.exact_div(&poly(&[-1, 1])).is_ok(), "p={} k={}", p, k);
                let rhs = &q_int(k).pow(p - 1) * &poly(&[-1, 1]).pow(p - 1);
                let d2 = &lhs - &rhs;
                assert!(
                    d2.divisible_by_int(&BigInt::from(p)),
                    "p={} k={}: {}",
                    p,
                    k,
                    d2
                );
                assert!(adic_order(&lhs, &c).at_least(1));
            }
        }
    }

    #[test]
    fn display_formats() {
        assert_eq!(format!("{}", q_int(3)), "1 + q + q^2");
        assert_eq!(format!("{}", poly(&[-1, 0, 2])), "-1 + 2q^2");
        assert_eq!(format!("{}", IntPoly::zero()), "0");
        let d2 = IntPoly::from_coeffs(vec![
            BigInt::zero(),
            BigInt::one(),
            BigInt::one(),
            BigInt::one(),
        ]);
        assert_eq!(format!("{}", d2), "q + q^2 + q^3");
    }

    #[test]
    fn serialization_round_trip() {
        let c2 = ctx(2);
        let s = LocalScalar::new(q_int(5), q_int(3), &c2).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"num\""));
        let back: LocalScalar = serde_json::from_str(&json).unwrap();
        assert!(back.validate(&c2).is_ok());
        assert_eq!(back, s);
        let p: IntPoly = serde_json::from_str("[\"1\",\"0\",\"-3\"]").unwrap();
        assert_eq!(p, poly(&[1, 0, -3]));
    }
}
