//! The twisted-power basis of `A[xi]`, the twisted divided-power algebra
//! `A<xi>_q`, and its Frobenius / delta / gamma structure.
//!
//! `A<xi>_q` is free as an `A`-module on generators `xi^[n]`, heuristically
//! `xi^(n) / (n)_q!`. The product of two basis vectors is
//!
//! ```text
//! xi^[n] xi^[m] = sum_i q^(i(i-1)/2) C(n+m-i,n)_q C(n,i)_q (q-1)^i x^i xi^[n+m-i]
//! ```
//!
//! over `0 <= i <= min(n,m)` — structure constants that do not depend on the
//! prime, so they are memoized per `(n, m)` and shared by every context. The
//! Frobenius acts on the basis through the divided coefficients `b_{n,i}`,
//! whose membership in `R` is itself one of the verified claims.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::One;
use once_cell::sync::Lazy;

use crate::context::Context;
use crate::deltaring::{frobenius_a, frobenius_xi_image, APoly, AXiPoly, QpdOutcome};
use crate::error::{QError, QResult};
use crate::qarith::{q_binomial, q_factorial, q_int, AdicOrder, IntPoly, LocalScalar};

/// An element of `A<xi>_q`: a finitely supported sum of `f_n xi^[n]` with
/// `APoly` coefficients and no stored zeros. The largest supported index is
/// the degree-filtration level of the element.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DividedElem {
    terms: BTreeMap<usize, APoly>,
}

impl DividedElem {
    pub fn zero() -> Self {
        DividedElem::default()
    }

    pub fn one() -> Self {
        DividedElem::basis(0)
    }

    /// The basis vector `xi^[n]`.
    pub fn basis(n: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(n, APoly::one());
        DividedElem { terms }
    }

    /// `f . xi^[0]`, the canonical inclusion of `A`.
    pub fn from_apoly(f: &APoly) -> Self {
        DividedElem::single(0, f.clone())
    }

    pub fn single(n: usize, f: APoly) -> Self {
        let mut out = DividedElem::zero();
        out.insert_add(n, f);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&usize, &APoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, n: usize) -> APoly {
        self.terms.get(&n).cloned().unwrap_or_else(APoly::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Filtration degree: the largest supported index.
    pub fn max_index(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }

    /// True when the element lies in the augmentation ideal `I^[1]`.
    pub fn in_augmentation_ideal(&self) -> bool {
        !self.terms.contains_key(&0)
    }

    /// The augmentation `e`: the index-zero coefficient.
    pub fn augmentation(&self) -> APoly {
        self.coeff(0)
    }

    pub fn insert_add(&mut self, idx: usize, value: APoly) {
        if value.is_zero() {
            return;
        }
        match self.terms.entry(idx) {
            Entry::Occupied(mut e) => {
                let s = &*e.get() + &value;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
            Entry::Vacant(e) => {
                e.insert(value);
            }
        }
    }

    pub fn add(&self, other: &DividedElem) -> DividedElem {
        let mut out = self.clone();
        for (&n, f) in other.terms() {
            out.insert_add(n, f.clone());
        }
        out
    }

    pub fn sub(&self, other: &DividedElem) -> DividedElem {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DividedElem {
        DividedElem {
            terms: self.terms.iter().map(|(&n, f)| (n, -f)).collect(),
        }
    }

    pub fn scale_apoly(&self, f: &APoly) -> DividedElem {
        let mut out = DividedElem::zero();
        if f.is_zero() {
            return out;
        }
        for (&n, g) in self.terms() {
            out.insert_add(n, f * g);
        }
        out
    }

    pub fn scale(&self, c: &LocalScalar) -> DividedElem {
        self.scale_apoly(&APoly::constant(c.clone()))
    }

    pub fn adic_order(&self, ctx: &Context) -> AdicOrder {
        self.terms
            .values()
            .map(|f| f.adic_order(ctx))
            .min()
            .unwrap_or(AdicOrder::Infinite)
    }

    pub fn div_int_exact(&self, d: &BigInt) -> QResult<DividedElem> {
        let mut terms = BTreeMap::new();
        for (&n, f) in self.terms() {
            terms.insert(n, f.div_int_exact(d)?);
        }
        Ok(DividedElem { terms })
    }

    pub fn div_poly_exact(&self, g: &IntPoly, ctx: &Context) -> QResult<DividedElem> {
        let mut terms = BTreeMap::new();
        for (&n, f) in self.terms() {
            terms.insert(n, f.div_poly_exact(g, ctx)?);
        }
        Ok(DividedElem { terms })
    }
}

impl fmt::Display for DividedElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&n, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if n == 0 {
                write!(f, "{}", c)?;
            } else if c == &APoly::one() {
                write!(f, "xi^[{}]", n)?;
            } else {
                write!(f, "({})*xi^[{}]", c, n)?;
            }
        }
        Ok(())
    }
}

type MulTable = Vec<(usize, APoly)>;

static MUL_TABLES: Lazy<Mutex<HashMap<(usize, usize), Arc<MulTable>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Structure constants of `xi^[n] xi^[m]` as pairs (output index, coefficient).
fn mul_basis_table(n: usize, m: usize) -> Arc<MulTable> {
    if let Some(t) = MUL_TABLES.lock().unwrap().get(&(n, m)) {
        return Arc::clone(t);
    }
    let q_minus_one = IntPoly::from_coeffs(vec![BigInt::from(-1), BigInt::from(1)]);
    let mut table = Vec::with_capacity(n.min(m) + 1);
    for i in 0..=n.min(m) {
        let qpow = if i >= 1 { i * (i - 1) / 2 } else { 0 };
        let mut scalar = IntPoly::monomial(BigInt::one(), qpow);
        scalar = &scalar * &q_binomial(n + m - i, n).expect("binomial range");
        scalar = &scalar * &q_binomial(n, i).expect("binomial range");
        scalar = &scalar * &q_minus_one.pow(i);
        table.push((
            n + m - i,
            APoly::monomial(LocalScalar::from_int_poly(scalar), i),
        ));
    }
    let arc = Arc::new(table);
    MUL_TABLES.lock().unwrap().insert((n, m), Arc::clone(&arc));
    arc
}

/// Product in `A<xi>_q`, bilinear over the basis rule.
pub fn dp_mul(u: &DividedElem, v: &DividedElem) -> DividedElem {
    let mut out = DividedElem::zero();
    for (&n, f) in u.terms() {
        for (&m, g) in v.terms() {
            let fg = f * g;
            for (idx, c) in mul_basis_table(n, m).iter() {
                out.insert_add(*idx, &fg * c);
            }
        }
    }
    out
}

pub fn dp_pow(u: &DividedElem, e: usize) -> DividedElem {
    let mut acc = DividedElem::one();
    for _ in 0..e {
        acc = dp_mul(&acc, u);
    }
    acc
}

static TWISTED_POWERS: Lazy<Mutex<Vec<AXiPoly>>> = Lazy::new(|| Mutex::new(vec![AXiPoly::one()]));

/// The twisted power `xi^(n) = xi (xi + (1-q)x) ... (xi + (1-q^(n-1))x)`.
pub fn twisted_power(n: usize) -> AXiPoly {
    let mut cache = TWISTED_POWERS.lock().unwrap();
    while cache.len() <= n {
        let k = cache.len() - 1;
        // next factor: xi + (1 - q^k) x
        let coeff = &IntPoly::one() - &IntPoly::monomial(BigInt::one(), k);
        let factor = AXiPoly::from_coeffs(vec![
            APoly::monomial(LocalScalar::from_int_poly(coeff), 1),
            APoly::one(),
        ]);
        let next = &cache[k] * &factor;
        cache.push(next);
    }
    cache[n].clone()
}

/// Coefficients of `f` in the twisted-power basis, by back-substitution
/// against the monic `xi^(n)`.
pub fn to_twisted_basis(f: &AXiPoly) -> Vec<APoly> {
    let Some(d) = f.xi_degree() else {
        return Vec::new();
    };
    let mut rem = f.clone();
    let mut out = vec![APoly::zero(); d + 1];
    for n in (0..=d).rev() {
        let c = rem.coeff(n);
        if !c.is_zero() {
            rem = &rem - &twisted_power(n).scale(&c);
            out[n] = c;
        }
    }
    debug_assert!(rem.is_zero());
    out
}

pub fn from_twisted_basis(coeffs: &[APoly]) -> AXiPoly {
    let mut acc = AXiPoly::zero();
    for (n, c) in coeffs.iter().enumerate() {
        if !c.is_zero() {
            acc = &acc + &twisted_power(n).scale(c);
        }
    }
    acc
}

/// The natural ring map `A[xi] -> A<xi>_q`, `xi^(n) -> (n)_q! xi^[n]`.
pub fn embed_poly(f: &AXiPoly) -> DividedElem {
    let coeffs = to_twisted_basis(f);
    let mut out = DividedElem::zero();
    for (n, c) in coeffs.into_iter().enumerate() {
        if !c.is_zero() {
            out.insert_add(n, c.scale(&LocalScalar::from_int_poly(q_factorial(n))));
        }
    }
    out
}

/// Twisted Frobenius coefficient `a_{n,i}`, zero outside `n <= i <= pn`:
/// `a_{n,i} = sum_j (-1)^(n-j) q^(p(n-j)(n-j-1)/2) C(n,j)_{q^p} C(pj,i)_q`.
pub fn coeff_a(n: usize, i: usize, ctx: &Context) -> LocalScalar {
    let p = ctx.p() as usize;
    if i < n || i > p * n {
        return LocalScalar::zero();
    }
    let mut acc = IntPoly::zero();
    for j in 0..=n {
        if p * j < i {
            continue;
        }
        let e = n - j;
        let qpow = if e >= 1 { p * e * (e - 1) / 2 } else { 0 };
        let outer = q_binomial(n, j).expect("range").subst_q_power(p);
        let inner = q_binomial(p * j, i).expect("range");
        let mut term = &(&IntPoly::monomial(BigInt::one(), qpow) * &outer) * &inner;
        if e % 2 == 1 {
            term = -&term;
        }
        acc = &acc + &term;
    }
    LocalScalar::from_int_poly(acc)
}

/// `phi(xi^(n))` computed directly as the product of the Frobenius images of
/// the twisted factors, returned in the twisted basis. This is the
/// independent route against which `coeff_a` is validated.
pub fn frobenius_of_twisted_power(n: usize, ctx: &Context) -> Vec<APoly> {
    let p = ctx.p() as usize;
    let phi_xi = frobenius_xi_image(ctx);
    let mut prod = AXiPoly::one();
    for k in 0..n {
        // phi(xi + (1 - q^k) x) = phi(xi) + (1 - q^(pk)) x^p
        let coeff = &IntPoly::one() - &IntPoly::monomial(BigInt::one(), p * k);
        let shift = APoly::monomial(LocalScalar::from_int_poly(coeff), p);
        let factor = &phi_xi + &AXiPoly::constant(shift);
        prod = &prod * &factor;
    }
    to_twisted_basis(&prod)
}

/// Divided Frobenius coefficient `b_{n,i} = (i)_q! a_{n,i} / ((n)_{q^p}! (p)_q^n)`.
///
/// Computed by exact division in `R`; success of the division is exactly the
/// claim that `b_{n,i}` lies in `R`.
pub fn coeff_b(n: usize, i: usize, ctx: &Context) -> QResult<LocalScalar> {
    let p = ctx.p() as usize;
    let a = coeff_a(n, i, ctx);
    let num = &q_factorial(i) * a.num();
    let den = &(&q_factorial(n).subst_q_power(p) * &q_int(p).pow(n)) * a.den();
    LocalScalar::from_quotient(num, den, ctx)
}

static FROBENIUS_BASIS: Lazy<Mutex<HashMap<(u32, usize), Arc<DividedElem>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// `phi(xi^[n]) = (p)_q^n sum_i b_{n,i} x^(pn-i) xi^[i]`, memoized per `(p, n)`.
pub fn frobenius_basis(n: usize, ctx: &Context) -> QResult<DividedElem> {
    let p = ctx.p() as usize;
    ctx.check_budget(p * n)?;
    let key = (ctx.p(), n);
    if let Some(v) = FROBENIUS_BASIS.lock().unwrap().get(&key) {
        return Ok((**v).clone());
    }
    let scale = LocalScalar::from_int_poly(q_int(p).pow(n));
    let mut out = DividedElem::zero();
    for i in n..=(p * n) {
        let b = coeff_b(n, i, ctx)?;
        let coeff = APoly::monomial(&b * &scale, p * n - i);
        out.insert_add(i, coeff);
    }
    FROBENIUS_BASIS
        .lock()
        .unwrap()
        .insert(key, Arc::new(out.clone()));
    Ok(out)
}

/// Absolute Frobenius of `A<xi>_q`, semilinear over `frobenius_a`.
pub fn frobenius_dp(u: &DividedElem, ctx: &Context) -> QResult<DividedElem> {
    let mut out = DividedElem::zero();
    for (&n, f) in u.terms() {
        let img = frobenius_basis(n, ctx)?;
        out = out.add(&img.scale_apoly(&frobenius_a(f, ctx)));
    }
    Ok(out)
}

/// `delta` on `A<xi>_q`: `(phi(u) - u^p) / p` with exact division.
pub fn delta_dp(u: &DividedElem, ctx: &Context) -> QResult<DividedElem> {
    let p = ctx.p() as usize;
    let diff = frobenius_dp(u, ctx)?.sub(&dp_pow(u, p));
    Ok(diff
        .div_int_exact(&BigInt::from(ctx.p()))
        .expect("A<xi>_q is p-torsion-free: (phi(u) - u^p)/p must be exact"))
}

/// `gamma(u) = phi(u)/(p)_q - delta(u)` on the augmentation ideal.
pub fn gamma_dp(u: &DividedElem, ctx: &Context) -> QResult<DividedElem> {
    if !u.in_augmentation_ideal() {
        return Err(QError::Domain(
            "gamma is only defined on the augmentation ideal".into(),
        ));
    }
    let p = ctx.p() as usize;
    let phi = frobenius_dp(u, ctx)?;
    let divided = phi.div_poly_exact(&q_int(p), ctx)?;
    let delta = phi
        .sub(&dp_pow(u, p))
        .div_int_exact(&BigInt::from(ctx.p()))
        .expect("A<xi>_q is p-torsion-free: (phi(u) - u^p)/p must be exact");
    Ok(divided.sub(&delta))
}

/// Leading coefficient `d_n` of `delta(xi^[n])` at index `np`:
/// `d_n = (((n)_q!)^p - (n)_{q^p}!) (np)_q! / (p (n)_{q^p}! ((n)_q!)^p)`,
/// computed by exact division and cross-checked against `delta_dp`.
pub fn leading_d(n: usize, ctx: &Context) -> QResult<LocalScalar> {
    if n == 0 {
        return Err(QError::Domain("leading coefficient needs n >= 1".into()));
    }
    let p = ctx.p() as usize;
    let fact = q_factorial(n);
    let fact_p = fact.pow(p);
    let fact_phi = fact.subst_q_power(p);
    let num = &(&fact_p - &fact_phi) * &q_factorial(n * p);
    let den = &(&IntPoly::constant(p as i64) * &fact_phi) * &fact_p;
    let formula = LocalScalar::from_quotient(num, den, ctx)?;
    // cross-check against the direct computation
    let direct = delta_dp(&DividedElem::basis(n), ctx)?.coeff(n * p);
    if !direct.is_constant() || direct.coeff(0) != formula {
        return Err(QError::Internal(format!(
            "leading coefficient mismatch at n = {}: formula {} vs direct {}",
            n, formula, direct
        )));
    }
    Ok(formula)
}

/// Iterates `gamma` on `xi`: returns `gamma^r(xi)` together with its leading
/// coefficient `c_r` at index `p^r`, and certifies that the remainder lies
/// in the filtration step below `p^r`.
pub fn gamma_tower(r: u32, ctx: &Context) -> QResult<(DividedElem, LocalScalar)> {
    if r == 0 {
        return Err(QError::Domain("gamma tower needs r >= 1".into()));
    }
    let p = ctx.p() as usize;
    let target = p
        .checked_pow(r)
        .ok_or_else(|| QError::Domain("p^r overflows the index range".into()))?;
    ctx.check_budget(target)?;
    let mut cur = DividedElem::basis(1);
    for _ in 0..r {
        cur = gamma_dp(&cur, ctx)?;
    }
    if cur.max_index().map_or(false, |m| m > target) {
        return Err(QError::Internal(format!(
            "gamma^{}(xi) exceeds filtration degree {}",
            r, target
        )));
    }
    let lead = cur.coeff(target);
    if !lead.is_constant() {
        return Err(QError::Internal(format!(
            "leading coefficient of gamma^{}(xi) is not a scalar: {}",
            r, lead
        )));
    }
    Ok((cur, lead.coeff(0)))
}

/// Change-of-basis matrix expressing `v_n = prod_r gamma^r(xi)^(k_r)`
/// (with `n = sum k_r p^r` the base-p digits) in the basis `xi^[0..N]`.
/// Row `n`, column `k` holds the coefficient of `xi^[k]` in `v_n`.
pub fn v_basis_matrix(max_n: usize, ctx: &Context) -> QResult<Vec<Vec<APoly>>> {
    ctx.check_budget(max_n)?;
    let p = ctx.p() as usize;
    // gamma^0(xi) = xi
    let mut tower = vec![DividedElem::basis(1)];
    {
        let mut pr = p;
        let mut r = 1u32;
        while pr <= max_n {
            tower.push(gamma_tower(r, ctx)?.0);
            r += 1;
            pr *= p;
        }
    }
    let mut matrix = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let mut v = DividedElem::one();
        let mut digits = n;
        let mut r = 0;
        while digits > 0 {
            let k = digits % p;
            if k > 0 {
                v = dp_mul(&v, &dp_pow(&tower[r], k));
            }
            digits /= p;
            r += 1;
        }
        matrix.push((0..=max_n).map(|k| v.coeff(k)).collect());
    }
    Ok(matrix)
}

/// The class of an element in `A<xi>_q / I^[n+1]`, stored densely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedDivided {
    level: usize,
    terms: Vec<APoly>,
}

impl TruncatedDivided {
    pub fn zero(level: usize) -> Self {
        TruncatedDivided {
            level,
            terms: vec![APoly::zero(); level + 1],
        }
    }

    pub fn one(level: usize) -> Self {
        let mut t = TruncatedDivided::zero(level);
        t.terms[0] = APoly::one();
        t
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeff(&self, k: usize) -> APoly {
        self.terms.get(k).cloned().unwrap_or_else(APoly::zero)
    }

    pub fn set_coeff(&mut self, k: usize, f: APoly) {
        if k <= self.level {
            self.terms[k] = f;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(APoly::is_zero)
    }

    pub fn add(&self, other: &TruncatedDivided) -> QResult<TruncatedDivided> {
        check_levels(self, other)?;
        Ok(TruncatedDivided {
            level: self.level,
            terms: self
                .terms
                .iter()
                .zip(&other.terms)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &TruncatedDivided) -> QResult<TruncatedDivided> {
        check_levels(self, other)?;
        Ok(TruncatedDivided {
            level: self.level,
            terms: self
                .terms
                .iter()
                .zip(&other.terms)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale_apoly(&self, f: &APoly) -> TruncatedDivided {
        TruncatedDivided {
            level: self.level,
            terms: self.terms.iter().map(|a| a * f).collect(),
        }
    }

    pub fn to_divided(&self) -> DividedElem {
        let mut out = DividedElem::zero();
        for (k, f) in self.terms.iter().enumerate() {
            out.insert_add(k, f.clone());
        }
        out
    }
}

impl fmt::Display for TruncatedDivided {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_divided())
    }
}

fn check_levels(a: &TruncatedDivided, b: &TruncatedDivided) -> QResult<()> {
    if a.level != b.level {
        Err(QError::LevelMismatch {
            left: a.level,
            right: b.level,
        })
    } else {
        Ok(())
    }
}

/// Drops every term of index above `n`.
pub fn truncate(u: &DividedElem, n: usize) -> TruncatedDivided {
    let mut out = TruncatedDivided::zero(n);
    for (&k, f) in u.terms() {
        if k <= n {
            out.terms[k] = f.clone();
        }
    }
    out
}

/// Product in the quotient `A<xi>_q / I^[n+1]`. Well-defined because the
/// basis rule never lowers an output index below `max(n, m)`.
pub fn trunc_mul(a: &TruncatedDivided, b: &TruncatedDivided) -> QResult<TruncatedDivided> {
    check_levels(a, b)?;
    Ok(truncate(&dp_mul(&a.to_divided(), &b.to_divided()), a.level))
}

/// q-divided-power check on an element of `A<xi>_q` (normally a generator
/// `xi^[n]` of the augmentation ideal).
pub fn qpd_check_divided(
    f: &DividedElem,
    ideal_test: &dyn Fn(&DividedElem) -> bool,
    ctx: &Context,
) -> QpdOutcome {
    let p = ctx.p() as usize;
    let p_q = q_int(p);
    let phi = match frobenius_dp(f, ctx) {
        Ok(v) => v,
        Err(e) => return QpdOutcome::fail_with(format!("frobenius failed: {}", e)),
    };
    let delta = phi
        .sub(&dp_pow(f, p))
        .div_int_exact(&BigInt::from(ctx.p()))
        .expect("A<xi>_q is p-torsion-free");
    let w = phi.sub(&delta.scale(&LocalScalar::from_int_poly(p_q.clone())));
    let quotient = match w.div_poly_exact(&p_q, ctx) {
        Ok(v) => v,
        Err(e) => {
            return QpdOutcome::fail_with(format!("phi(f) - (p)_q delta(f) not in (p)_q: {}", e))
        }
    };
    if !f.is_zero() {
        let nilp = dp_pow(f, p).adic_order(ctx);
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
