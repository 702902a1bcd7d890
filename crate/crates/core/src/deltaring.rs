//! Delta-structures on `A = R[x]` and `A[xi]`: Frobenius lifts,
//! p-derivations, length-two Witt pairs, delta-ideal closures, and the
//! q-divided-power predicate checked on ideal generators.
//!
//! `x` has rank one (`delta(x) = 0`), and `A[xi]` carries the symmetric
//! structure in which `x + xi` has rank one as well. Since both rings are
//! p-torsion-free, `delta` is computed as `(phi(f) - f^p) / p` with an exact
//! division; a division failure there is a bug, not a data error.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::error::{QError, QResult};
use crate::qarith::{q_int, AdicOrder, IntPoly, LocalScalar};

/// A polynomial in the coordinate `x` with `LocalScalar` coefficients:
/// an element of `A = R[x]`. Canonical form has no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct APoly {
    coeffs: Vec<LocalScalar>,
}

impl APoly {
    pub fn zero() -> Self {
        APoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        APoly::constant(LocalScalar::one())
    }

    /// The coordinate `x`.
    pub fn x() -> Self {
        APoly::monomial(LocalScalar::one(), 1)
    }

    pub fn constant(c: LocalScalar) -> Self {
        APoly::from_coeffs(vec![c])
    }

    pub fn from_int(c: i64) -> Self {
        APoly::constant(LocalScalar::from_int(c))
    }

    pub fn from_int_poly(f: IntPoly) -> Self {
        APoly::constant(LocalScalar::from_int_poly(f))
    }

    pub fn monomial(c: LocalScalar, degree: usize) -> Self {
        if c.is_zero() {
            return APoly::zero();
        }
        let mut coeffs = vec![LocalScalar::zero(); degree + 1];
        coeffs[degree] = c;
        APoly { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<LocalScalar>) -> Self {
        while coeffs.last().map_or(false, LocalScalar::is_zero) {
            coeffs.pop();
        }
        APoly { coeffs }
    }

    pub fn coeffs(&self) -> &[LocalScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> LocalScalar {
        self.coeffs.get(i).cloned().unwrap_or_else(LocalScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// True when the polynomial is a scalar (degree zero or zero).
    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn scale(&self, c: &LocalScalar) -> Self {
        if c.is_zero() {
            return APoly::zero();
        }
        APoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = APoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluation at another element of `A` (used by Frobenius variants).
    pub fn eval_at(&self, value: &APoly) -> APoly {
        let mut acc = APoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * value) + &APoly::constant(c.clone());
        }
        acc
    }

    pub fn div_int_exact(&self, d: &BigInt) -> QResult<APoly> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.div_int_exact(d)?);
        }
        Ok(APoly::from_coeffs(out))
    }

    pub fn div_poly_exact(&self, g: &IntPoly, ctx: &Context) -> QResult<APoly> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.div_poly_exact(g, ctx)?);
        }
        Ok(APoly::from_coeffs(out))
    }

    /// Minimum adic order over the coefficients.
    pub fn adic_order(&self, ctx: &Context) -> AdicOrder {
        self.coeffs
            .iter()
            .map(|c| c.adic_order(ctx))
            .min()
            .unwrap_or(AdicOrder::Infinite)
    }
}

impl Add for &APoly {
    type Output = APoly;
    fn add(self, rhs: &APoly) -> APoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![LocalScalar::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] = &coeffs[i] + c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            coeffs[i] = &coeffs[i] + c;
        }
        APoly::from_coeffs(coeffs)
    }
}

impl Sub for &APoly {
    type Output = APoly;
    fn sub(self, rhs: &APoly) -> APoly {
        self + &(-rhs)
    }
}

impl Neg for &APoly {
    type Output = APoly;
    fn neg(self) -> APoly {
        APoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &APoly {
    type Output = APoly;
    fn mul(self, rhs: &APoly) -> APoly {
        if self.is_zero() || rhs.is_zero() {
            return APoly::zero();
        }
        let mut coeffs = vec![LocalScalar::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        APoly::from_coeffs(coeffs)
    }
}

impl fmt::Display for APoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let rendered = c.to_string();
            let needs_parens = rendered.contains(' ') || rendered.contains('/');
            match i {
                0 => write!(f, "{}", rendered)?,
                _ => {
                    if rendered == "1" {
                        // coefficient one is left implicit
                    } else if needs_parens {
                        write!(f, "({})*", rendered)?;
                    } else {
                        write!(f, "{}*", rendered)?;
                    }
                    if i == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{}", i)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// A polynomial in `xi` with `APoly` coefficients: an element of `A[xi]`.
/// This also models `P = A (x) A`, via `p2(x) = x + xi`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AXiPoly {
    coeffs: Vec<APoly>,
}

impl AXiPoly {
    pub fn zero() -> Self {
        AXiPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        AXiPoly::constant(APoly::one())
    }

    /// The indeterminate `xi`.
    pub fn xi() -> Self {
        AXiPoly::from_coeffs(vec![APoly::zero(), APoly::one()])
    }

    /// `x` viewed inside `A[xi]`.
    pub fn x() -> Self {
        AXiPoly::constant(APoly::x())
    }

    pub fn constant(c: APoly) -> Self {
        AXiPoly::from_coeffs(vec![c])
    }

    pub fn from_coeffs(mut coeffs: Vec<APoly>) -> Self {
        while coeffs.last().map_or(false, APoly::is_zero) {
            coeffs.pop();
        }
        AXiPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[APoly] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> APoly {
        self.coeffs.get(j).cloned().unwrap_or_else(APoly::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn xi_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &APoly) -> Self {
        if c.is_zero() {
            return AXiPoly::zero();
        }
        AXiPoly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = AXiPoly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn div_int_exact(&self, d: &BigInt) -> QResult<AXiPoly> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.div_int_exact(d)?);
        }
        Ok(AXiPoly::from_coeffs(out))
    }

    pub fn div_poly_exact(&self, g: &IntPoly, ctx: &Context) -> QResult<AXiPoly> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c.div_poly_exact(g, ctx)?);
        }
        Ok(AXiPoly::from_coeffs(out))
    }

    pub fn adic_order(&self, ctx: &Context) -> AdicOrder {
        self.coeffs
            .iter()
            .map(|c| c.adic_order(ctx))
            .min()
            .unwrap_or(AdicOrder::Infinite)
    }
}

impl Add for &AXiPoly {
    type Output = AXiPoly;
    fn add(self, rhs: &AXiPoly) -> AXiPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = vec![APoly::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] = &coeffs[i] + c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            coeffs[i] = &coeffs[i] + c;
        }
        AXiPoly::from_coeffs(coeffs)
    }
}

impl Sub for &AXiPoly {
    type Output = AXiPoly;
    fn sub(self, rhs: &AXiPoly) -> AXiPoly {
        self + &(-rhs)
    }
}

impl Neg for &AXiPoly {
    type Output = AXiPoly;
    fn neg(self) -> AXiPoly {
        AXiPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Mul for &AXiPoly {
    type Output = AXiPoly;
    fn mul(self, rhs: &AXiPoly) -> AXiPoly {
        if self.is_zero() || rhs.is_zero() {
            return AXiPoly::zero();
        }
        let mut coeffs = vec![APoly::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        AXiPoly::from_coeffs(coeffs)
    }
}

impl fmt::Display for AXiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{}", c)?,
                _ => {
                    write!(f, "({})*", c)?;
                    if j == 1 {
                        write!(f, "xi")?;
                    } else {
                        write!(f, "xi^{}", j)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// `binom(p, k) / p` for `1 <= k <= p-1`, an integer.
fn binom_over_p(p: u32, k: u32) -> BigInt {
    let mut b = BigInt::one();
    for i in 0..k {
        b = b * BigInt::from(p - i) / BigInt::from(i + 1);
    }
    let (q, r) = num_integer::Integer::div_rem(&b, &BigInt::from(p));
    debug_assert!(r.is_zero());
    q
}

/// Absolute Frobenius of `A`: `q -> q^p` on scalars and `x -> x^p`.
pub fn frobenius_a(f: &APoly, ctx: &Context) -> APoly {
    let p = ctx.p() as usize;
    if f.is_zero() {
        return APoly::zero();
    }
    let mut coeffs = vec![LocalScalar::zero(); (f.coeffs.len() - 1) * p + 1];
    for (i, c) in f.coeffs.iter().enumerate() {
        coeffs[i * p] = c.phi(ctx);
    }
    APoly::from_coeffs(coeffs)
}

/// `delta` on `A`, from the Frobenius by exact division by `p`.
pub fn delta_a(f: &APoly, ctx: &Context) -> APoly {
    let diff = &frobenius_a(f, ctx) - &f.pow(ctx.p() as usize);
    diff.div_int_exact(&BigInt::from(ctx.p()))
        .expect("A is p-torsion-free: (phi(f) - f^p)/p must be exact")
}

/// Frobenius image of `xi` under the symmetric structure:
/// `phi(xi) = (x + xi)^p - x^p`.
pub fn frobenius_xi_image(ctx: &Context) -> AXiPoly {
    let p = ctx.p() as usize;
    let x_plus_xi = &AXiPoly::x() + &AXiPoly::xi();
    &x_plus_xi.pow(p) - &AXiPoly::constant(APoly::x().pow(p))
}

/// Absolute Frobenius of `A[xi]` for the symmetric structure
/// (`x + xi` has rank one), extended as a ring morphism over `frobenius_a`.
pub fn frobenius_axi(f: &AXiPoly, ctx: &Context) -> AXiPoly {
    let phi_xi = frobenius_xi_image(ctx);
    let mut acc = AXiPoly::zero();
    for c in f.coeffs.iter().rev() {
        acc = &(&acc * &phi_xi) + &AXiPoly::constant(frobenius_a(c, ctx));
    }
    acc
}

/// `delta` on `A[xi]` for the symmetric structure.
pub fn delta_axi(f: &AXiPoly, ctx: &Context) -> AXiPoly {
    let diff = &frobenius_axi(f, ctx) - &f.pow(ctx.p() as usize);
    diff.div_int_exact(&BigInt::from(ctx.p()))
        .expect("A[xi] is p-torsion-free: (phi(f) - f^p)/p must be exact")
}

/// Closed formula for `delta(xi)`: the sum of `(1/p) binom(p,i) x^(p-i) xi^i`
/// over `0 < i < p`. Depends on `x` but not on `q`.
pub fn delta_xi_closed(ctx: &Context) -> AXiPoly {
    let p = ctx.p();
    let mut coeffs = vec![APoly::zero(); p as usize];
    for i in 1..p {
        let c = binom_over_p(p, i);
        coeffs[i as usize] = APoly::monomial(
            LocalScalar::from_int_poly(IntPoly::constant_big(c)),
            (p - i) as usize,
        );
    }
    AXiPoly::from_coeffs(coeffs)
}

/// The alternative Frobenius on `A[xi]` for `p = 2` in which `x` is not of
/// rank one: `phi_c(x) = x^2 + 2c`, `phi_c(xi) = xi^2 + 2 x xi`.
pub fn frobenius_axi_c(f: &AXiPoly, c: &APoly, ctx: &Context) -> QResult<AXiPoly> {
    if ctx.p() != 2 {
        return Err(QError::UnsupportedPrime(ctx.p()));
    }
    // phi_c(x) = x^2 + 2c
    let phi_x = &APoly::x().pow(2) + &c.scale(&LocalScalar::from_int(2));
    // phi_c(xi) = xi^2 + 2x xi
    let phi_xi = AXiPoly::from_coeffs(vec![
        APoly::zero(),
        APoly::monomial(LocalScalar::from_int(2), 1),
        APoly::one(),
    ]);
    let mut acc = AXiPoly::zero();
    for g in f.coeffs.iter().rev() {
        let g_phi = APoly::from_coeffs(g.coeffs().iter().map(|s| s.phi(ctx)).collect());
        let coeff = g_phi.eval_at(&phi_x);
        acc = &(&acc * &phi_xi) + &AXiPoly::constant(coeff);
    }
    Ok(acc)
}

/// A length-two Witt pair `(f, delta-component)` over `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WittPair {
    pub first: APoly,
    pub second: APoly,
}

impl WittPair {
    pub fn new(first: APoly, second: APoly) -> Self {
        WittPair { first, second }
    }

    pub fn zero() -> Self {
        WittPair::new(APoly::zero(), APoly::zero())
    }

    /// The section `f -> (f, delta(f))` of the projection.
    pub fn section(f: &APoly, ctx: &Context) -> Self {
        WittPair::new(f.clone(), delta_a(f, ctx))
    }
}

/// Witt-pair addition: the unique law making projection and ghost map ring
/// morphisms. The second component is
/// `g + g' - sum_k (1/p) binom(p,k) f^(p-k) f'^k`.
pub fn witt_add(a: &WittPair, b: &WittPair, ctx: &Context) -> WittPair {
    let p = ctx.p();
    let mut corr = APoly::zero();
    for k in 1..p {
        let coeff = LocalScalar::from_int_poly(IntPoly::constant_big(binom_over_p(p, k)));
        let term = &a.first.pow((p - k) as usize) * &b.first.pow(k as usize);
        corr = &corr + &term.scale(&coeff);
    }
    WittPair::new(
        &a.first + &b.first,
        &(&a.second + &b.second) - &corr,
    )
}

/// Witt-pair multiplication: second component `f^p g' + g f'^p + p g g'`.
pub fn witt_mul(a: &WittPair, b: &WittPair, ctx: &Context) -> WittPair {
    let p = ctx.p() as usize;
    let fp = a.first.pow(p);
    let gp = b.first.pow(p);
    let cross = (&a.second * &b.second).scale(&LocalScalar::from_int(ctx.p() as i64));
    WittPair::new(
        &a.first * &b.first,
        &(&(&fp * &b.second) + &(&a.second * &gp)) + &cross,
    )
}

/// Ghost map `(f, g) -> f^p + p g`.
pub fn ghost(a: &WittPair, ctx: &Context) -> APoly {
    let p = ctx.p() as usize;
    &a.first.pow(p) + &a.second.scale(&LocalScalar::from_int(p as i64))
}

/// Truncated generator family `{delta^j(g) : g in gens, j <= bound}` for the
/// delta-closure of the ideal generated by `gens`.
#[derive(Debug, Clone)]
pub struct DeltaClosure {
    pub bound: usize,
    pub generators: Vec<AXiPoly>,
}

pub fn delta_closure_gens(gens: &[AXiPoly], bound: usize, ctx: &Context) -> DeltaClosure {
    let mut generators = Vec::with_capacity(gens.len() * (bound + 1));
    for g in gens {
        let mut cur = g.clone();
        generators.push(cur.clone());
        for _ in 0..bound {
            cur = delta_axi(&cur, ctx);
            generators.push(cur.clone());
        }
    }
    DeltaClosure { bound, generators }
}

/// Outcome of the q-divided-power generator test.
#[derive(Debug, Clone)]
pub struct QpdOutcome {
    pub pass: bool,
    pub witness: Option<String>,
}

impl QpdOutcome {
    pub fn fail_with(witness: impl Into<String>) -> Self {
        QpdOutcome {
            pass: false,
            witness: Some(witness.into()),
        }
    }

    pub fn pass_outcome() -> Self {
        QpdOutcome {
            pass: true,
            witness: None,
        }
    }
}

/// Checks the q-divided-power condition on a generator `f` of an ideal of
/// `A[xi]`: `phi(f) - (p)_q delta(f)` must be exactly divisible by `(p)_q`
/// with quotient inside the ideal described by `ideal_test`. Also certifies
/// that `f^p` has positive adic order (topological nilpotence of `f`).
pub fn qpd_check_poly(
    f: &AXiPoly,
    ideal_test: &dyn Fn(&AXiPoly) -> bool,
    ctx: &Context,
) -> QpdOutcome {
    let p_q = q_int(ctx.p() as usize);
    let phi = frobenius_axi(f, ctx);
    let delta = delta_axi(f, ctx);
    let w = &phi - &delta.scale(&APoly::from_int_poly(p_q.clone()));
    let quotient = match w.div_poly_exact(&p_q, ctx) {
        Ok(v) => v,
        Err(e) => return QpdOutcome::fail_with(format!("phi(f) - (p)_q delta(f) not in (p)_q: {}", e)),
    };
    if !f.is_zero() {
        let nilp = f.pow(ctx.p() as usize).adic_order(ctx);
        if !nilp.at_least(1) {
            return QpdOutcome::fail_with(format!("f^p has adic order {}", nilp));
        }
    }
    if ideal_test(&quotient) {
        QpdOutcome::pass_outcome()
    } else {
        QpdOutcome::fail_with(format!("quotient outside ideal: {}", quotient))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::qarith::adic_order;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ctx(p: u32) -> Context {
        Context::new(p).unwrap()
    }

    pub(crate) fn sample_apoly(rng: &mut StdRng, max_deg: usize) -> APoly {
        let deg = rng.gen_range(0..=max_deg);
        APoly::from_coeffs(
            (0..=deg)
                .map(|_| {
                    let c: i64 = rng.gen_range(-3..=3);
                    let qdeg = rng.gen_range(0..=1);
                    LocalScalar::from_int_poly(IntPoly::monomial(BigInt::from(c), qdeg))
                })
                .collect(),
        )
    }

    pub(crate) fn sample_axipoly(rng: &mut StdRng, max_deg: usize) -> AXiPoly {
        let deg = rng.gen_range(0..=max_deg);
        AXiPoly::from_coeffs((0..=deg).map(|_| sample_apoly(rng, max_deg)).collect())
    }

    #[test]
    fn ghost_and_witt_identities() {
        for p in [2u32, 3] {
            let c = ctx(p);
            let mut rng = StdRng::seed_from_u64(7);
            for _ in 0..50 {
                let f = sample_apoly(&mut rng, 2);
                let g = sample_apoly(&mut rng, 2);
                let sf = WittPair::section(&f, &c);
                let sg = WittPair::section(&g, &c);
                // the section is a ring morphism into Witt pairs
                assert_eq!(witt_add(&sf, &sg, &c), WittPair::section(&(&f + &g), &c));
                assert_eq!(witt_mul(&sf, &sg, &c), WittPair::section(&(&f * &g), &c));
                // ghost of the section is the Frobenius
                assert_eq!(ghost(&sf, &c), frobenius_a(&f, &c));
            }
        }
    }

    #[test]
    fn witt_examples() {
        let c = ctx(2);
        let x = WittPair::new(APoly::x(), APoly::zero());
        let zero = WittPair::zero();
        assert_eq!(witt_add(&x, &zero, &c), x);
        let sq = witt_mul(&x, &x, &c);
        assert_eq!(sq.first, APoly::x().pow(2));
        assert!(sq.second.is_zero());
        let f = APoly::from_int(5);
        let g = APoly::from_int(7);
        assert_eq!(
            ghost(&WittPair::new(f.clone(), g.clone()), &c),
            &f.pow(2) + &g.scale(&LocalScalar::from_int(2))
        );
    }

    #[test]
    fn x_has_rank_one() {
        for p in [2u32, 3, 5] {
            let c = ctx(p);
            assert_eq!(frobenius_a(&APoly::x(), &c), APoly::x().pow(p as usize));
            assert!(delta_a(&APoly::x(), &c).is_zero());
        }
    }

    #[test]
    fn delta_of_integer_constants() {
        // delta(n) = (n - n^p)/p
        let c = ctx(2);
        assert_eq!(delta_a(&APoly::from_int(2), &c), APoly::from_int(-1));
        let c3 = ctx(3);
        assert_eq!(delta_a(&APoly::from_int(3), &c3), APoly::from_int(-8));
    }

    #[test]
    fn delta_of_p_q_is_distinguished() {
        // delta((p)_q) = 1 mod (p, q-1)
        for p in [2u32, 3, 5] {
            let c = ctx(p);
            let pq = APoly::from_int_poly(q_int(p as usize));
            let d = delta_a(&pq, &c);
            let diff = &d - &APoly::one();
            assert!(diff.adic_order(&c).at_least(1), "p={}", p);
        }
    }

    #[test]
    fn symmetric_structure_on_xi() {
        let c = ctx(2);
        // phi(xi) = xi^2 + 2x xi
        let expect = AXiPoly::from_coeffs(vec![
            APoly::zero(),
            APoly::monomial(LocalScalar::from_int(2), 1),
            APoly::one(),
        ]);
        assert_eq!(frobenius_axi(&AXiPoly::xi(), &c), expect);
        // delta(xi) = x xi at p = 2
        let dxi = delta_axi(&AXiPoly::xi(), &c);
        assert_eq!(
            dxi,
            AXiPoly::from_coeffs(vec![APoly::zero(), APoly::x()])
        );
        assert_eq!(dxi, delta_xi_closed(&c));
    }

    #[test]
    fn delta_xi_matches_closed_formula() {
        for p in [2u32, 3, 5] {
            let c = ctx(p);
            assert_eq!(delta_axi(&AXiPoly::xi(), &c), delta_xi_closed(&c), "p={}", p);
        }
    }

    #[test]
    fn x_plus_xi_has_rank_one() {
        for p in [2u32, 3] {
            let c = ctx(p);
            let s = &AXiPoly::x() + &AXiPoly::xi();
            assert_eq!(frobenius_axi(&s, &c), s.pow(p as usize));
            assert!(delta_axi(&s, &c).is_zero());
        }
    }

    #[test]
    fn delta_axioms_on_samples() {
        for p in [2u32, 3] {
            let c = ctx(p);
            let pi = p as usize;
            let mut rng = StdRng::seed_from_u64(11);
            for _ in 0..50 {
                let f = sample_axipoly(&mut rng, 2);
                let g = sample_axipoly(&mut rng, 2);
                let (df, dg) = (delta_axi(&f, &c), delta_axi(&g, &c));
                let (pf, pg) = (frobenius_axi(&f, &c), frobenius_axi(&g, &c));
                // sum rule
                let mut corr = AXiPoly::zero();
                for k in 1..p {
                    let coeff = APoly::from_int_poly(IntPoly::constant_big(binom_over_p(p, k)));
                    corr = &corr
                        + &(&f.pow((p - k) as usize) * &g.pow(k as usize)).scale(&coeff);
                }
                assert_eq!(delta_axi(&(&f + &g), &c), &(&df + &dg) - &corr);
                // product rule, symmetric and both asymmetric forms
                let prod = delta_axi(&(&f * &g), &c);
                let sym = &(&(&f.pow(pi) * &dg) + &(&df * &g.pow(pi)))
                    + &(&df * &dg).scale(&APoly::from_int(p as i64));
                assert_eq!(prod, sym);
                assert_eq!(prod, &(&df * &g.pow(pi)) + &(&pf * &dg));
                assert_eq!(prod, &(&f.pow(pi) * &dg) + &(&df * &pg));
                // phi(f) = f^p mod p
                let red = &pf - &f.pow(pi);
                assert!(red.div_int_exact(&BigInt::from(p)).is_ok());
                // phi and delta commute
                assert_eq!(delta_axi(&pf, &c), frobenius_axi(&df, &c));
            }
        }
    }

    #[test]
    fn alternative_frobenius_at_two() {
        let c = ctx(2);
        let zero = APoly::zero();
        let one = APoly::one();
        // phi_0 agrees with the symmetric Frobenius
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let f = sample_axipoly(&mut rng, 2);
            assert_eq!(
                frobenius_axi_c(&f, &zero, &c).unwrap(),
                frobenius_axi(&f, &c)
            );
        }
        // phi_c(x) = x^2 + 2c
        let phix = frobenius_axi_c(&AXiPoly::x(), &one, &c).unwrap();
        assert_eq!(
            phix,
            AXiPoly::constant(&APoly::x().pow(2) + &APoly::from_int(2))
        );
        assert_eq!(
            frobenius_axi_c(&AXiPoly::xi(), &one, &ctx(3)).unwrap_err(),
            QError::UnsupportedPrime(3)
        );
    }

    #[test]
    fn delta_closure_examples() {
        let c = ctx(2);
        // (q-1) generates a delta-ideal: every delta^j(q-1) is divisible by q-1
        let qm1 = AXiPoly::constant(APoly::from_int_poly(IntPoly::from_coeffs(vec![
            BigInt::from(-1),
            BigInt::from(1),
        ])));
        let closure = delta_closure_gens(&[qm1], 3, &c);
        let qm1_poly = IntPoly::from_coeffs(vec![BigInt::from(-1), BigInt::from(1)]);
        for g in &closure.generators {
            for apoly in g.coeffs() {
                for s in apoly.coeffs() {
                    assert!(s.num().exact_div(&qm1_poly).is_ok() || s.is_zero());
                }
            }
        }
        // zero generator stays zero
        let z = delta_closure_gens(&[AXiPoly::zero()], 4, &c);
        assert!(z.generators.iter().all(AXiPoly::is_zero));
        // {xi} at bound 1 gives {xi, x xi}
        let cl = delta_closure_gens(&[AXiPoly::xi()], 1, &c);
        assert_eq!(cl.generators.len(), 2);
        assert_eq!(cl.generators[0], AXiPoly::xi());
        assert_eq!(
            cl.generators[1],
            AXiPoly::from_coeffs(vec![APoly::zero(), APoly::x()])
        );
    }

    #[test]
    fn qpd_on_q_minus_one() {
        // phi(q-1) = (p)_q (q-1), so the quotient stays in (q-1)
        for p in [2u32, 3, 5] {
            let c = ctx(p);
            let qm1_poly = IntPoly::from_coeffs(vec![BigInt::from(-1), BigInt::from(1)]);
            let f = AXiPoly::constant(APoly::from_int_poly(qm1_poly.clone()));
            let test = move |g: &AXiPoly| {
                g.coeffs().iter().all(|ap| {
                    ap.coeffs()
                        .iter()
                        .all(|s| s.is_zero() || s.num().exact_div(&qm1_poly).is_ok())
                })
            };
            let outcome = qpd_check_poly(&f, &test, &c);
            assert!(outcome.pass, "p={}: {:?}", p, outcome.witness);
        }
    }

    #[test]
    fn qpd_on_zero() {
        let c = ctx(3);
        let outcome = qpd_check_poly(&AXiPoly::zero(), &|g| g.is_zero(), &c);
        assert!(outcome.pass);
    }

    #[test]
    fn adic_order_of_nested_values() {
        let c = ctx(2);
        let f = AXiPoly::from_coeffs(vec![
            APoly::from_int(4),
            APoly::from_int_poly(q_int(2)),
        ]);
        assert_eq!(f.adic_order(&c), AdicOrder::Finite(1));
        assert_eq!(adic_order(&q_int(2), &c), AdicOrder::Finite(1));
    }
}
