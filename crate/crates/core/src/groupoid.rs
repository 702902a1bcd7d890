//! The q-Taylor map `theta`, the flip `tau`, the diagonal, and the twisted
//! tensor product carrying the groupoid structure of `A<xi>_q`.
//!
//! The tensor `A<xi>_q (x)'_A A<xi>_q` uses `theta` for the A-structure of
//! the left factor, so a scalar sitting in the right factor migrates left
//! through `theta`. `TensorElem` keeps every element in that normalized form
//! (all A-coefficients in the left factor), which makes equality of tensors
//! plain coefficient equality.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::One;
use once_cell::sync::Lazy;

use crate::context::Context;
use crate::deltaring::{APoly, AXiPoly};
use crate::error::{QError, QResult};
use crate::qarith::{q_binomial, q_factorial, IntPoly, LocalScalar};
use crate::report::{CheckResult, SuiteReport};
use crate::twisted::{dp_mul, from_twisted_basis, truncate, DividedElem, TruncatedDivided};

static THETA_MONOMIALS: Lazy<Mutex<Vec<DividedElem>>> =
    Lazy::new(|| Mutex::new(vec![DividedElem::one()]));

/// `theta(x^m) = sum_k C(m,k)_q (k)_q! x^(m-k) xi^[k]`, the image of a
/// monomial under the q-Taylor map.
fn theta_monomial(m: usize) -> DividedElem {
    let mut cache = THETA_MONOMIALS.lock().unwrap();
    while cache.len() <= m {
        let n = cache.len();
        let mut img = DividedElem::zero();
        for k in 0..=n {
            let scalar = &q_binomial(n, k).expect("range") * &q_factorial(k);
            img.insert_add(
                k,
                APoly::monomial(LocalScalar::from_int_poly(scalar), n - k),
            );
        }
        cache.push(img);
    }
    cache[m].clone()
}

/// The q-Taylor map of level zero: the ring morphism `A -> A<xi>_q`
/// with `theta(x) = x + xi`. Finitely supported on polynomials.
pub fn theta(f: &APoly) -> DividedElem {
    let mut out = DividedElem::zero();
    for (i, c) in f.coeffs().iter().enumerate() {
        if !c.is_zero() {
            out = out.add(&theta_monomial(i).scale(c));
        }
    }
    out
}

/// `theta` followed by truncation to `A<xi>_q / I^[n+1]`.
pub fn theta_trunc(f: &APoly, level: usize) -> TruncatedDivided {
    truncate(&theta(f), level)
}

/// Closed form for the flip of a twisted power, in the twisted basis:
/// `tau(xi^(n)) = sum_k (-1)^k q^(k(k-1)/2) (1-q)^(n-k) (n-k)_q!
///                C(n-1,k-1)_q C(n,k)_q x^(n-k) xi^(k)`.
pub fn flip_twisted(n: usize) -> AXiPoly {
    if n == 0 {
        return AXiPoly::one();
    }
    let one_minus_q = IntPoly::from_coeffs(vec![BigInt::from(1), BigInt::from(-1)]);
    let mut coeffs = vec![APoly::zero(); n + 1];
    for k in 1..=n {
        let mut scalar = IntPoly::monomial(BigInt::one(), k * (k - 1) / 2);
        scalar = &scalar * &one_minus_q.pow(n - k);
        scalar = &scalar * &q_factorial(n - k);
        scalar = &scalar * &q_binomial(n - 1, k - 1).expect("range");
        scalar = &scalar * &q_binomial(n, k).expect("range");
        if k % 2 == 1 {
            scalar = -&scalar;
        }
        coeffs[k] = APoly::monomial(LocalScalar::from_int_poly(scalar), n - k);
    }
    from_twisted_basis(&coeffs)
}

/// The defining route for the flip of a twisted power:
/// `tau(xi^(n)) = prod_k (x - q^k (x + xi))`, expanded directly.
pub fn flip_twisted_product(n: usize) -> AXiPoly {
    let mut prod = AXiPoly::one();
    for k in 0..n {
        // x - q^k (x + xi)
        let xc = &IntPoly::one() - &IntPoly::monomial(BigInt::one(), k);
        let factor = AXiPoly::from_coeffs(vec![
            APoly::monomial(LocalScalar::from_int_poly(xc), 1),
            APoly::from_int_poly(-&IntPoly::monomial(BigInt::one(), k)),
        ]);
        prod = &prod * &factor;
    }
    prod
}

static FLIP_BASIS: Lazy<Mutex<Vec<DividedElem>>> =
    Lazy::new(|| Mutex::new(vec![DividedElem::one()]));

/// `tau(xi^[n]) = sum_k (-1)^k q^(k(k-1)/2) (1-q)^(n-k) C(n-1,k-1)_q
/// x^(n-k) xi^[k]` for `n >= 1`; `tau(xi^[0]) = 1`.
pub fn flip_basis(n: usize) -> DividedElem {
    let mut cache = FLIP_BASIS.lock().unwrap();
    let one_minus_q = IntPoly::from_coeffs(vec![BigInt::from(1), BigInt::from(-1)]);
    while cache.len() <= n {
        let m = cache.len();
        let mut img = DividedElem::zero();
        for k in 1..=m {
            let mut scalar = IntPoly::monomial(BigInt::one(), k * (k - 1) / 2);
            scalar = &scalar * &one_minus_q.pow(m - k);
            scalar = &scalar * &q_binomial(m - 1, k - 1).expect("range");
            if k % 2 == 1 {
                scalar = -&scalar;
            }
            img.insert_add(
                k,
                APoly::monomial(LocalScalar::from_int_poly(scalar), m - k),
            );
        }
        cache.push(img);
    }
    cache[n].clone()
}

/// The flip map on `A<xi>_q`: the involutive R-algebra automorphism with
/// `tau(f) = theta(f)` for `f` in `A` and the basis images of `flip_basis`.
pub fn flip(u: &DividedElem) -> DividedElem {
    let mut out = DividedElem::zero();
    for (&n, f) in u.terms() {
        out = out.add(&dp_mul(&theta(f), &flip_basis(n)));
    }
    out
}

/// An element of `A<xi>_q (x)'_A A<xi>_q` in left-normalized form:
/// finitely many terms `f_(i,j) . (xi^[i] (x) xi^[j])` with `f_(i,j)` acting
/// on the left factor. When `levels = Some((n, m))` the element lives in the
/// truncated tensor and indices beyond the levels are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorElem {
    levels: Option<(usize, usize)>,
    terms: BTreeMap<(usize, usize), APoly>,
}

impl TensorElem {
    pub fn zero(levels: Option<(usize, usize)>) -> Self {
        TensorElem {
            levels,
            terms: BTreeMap::new(),
        }
    }

    pub fn levels(&self) -> Option<(usize, usize)> {
        self.levels
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &APoly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: usize, j: usize) -> APoly {
        self.terms
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(APoly::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn insert_add(&mut self, idx: (usize, usize), value: APoly) {
        if value.is_zero() {
            return;
        }
        if let Some((n, m)) = self.levels {
            if idx.0 > n || idx.1 > m {
                return;
            }
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

    pub fn add(&self, other: &TensorElem) -> QResult<TensorElem> {
        check_tensor_levels(self, other)?;
        let mut out = self.clone();
        for (&idx, f) in other.terms() {
            out.insert_add(idx, f.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TensorElem) -> QResult<TensorElem> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TensorElem {
        TensorElem {
            levels: self.levels,
            terms: self.terms.iter().map(|(&idx, f)| (idx, -f)).collect(),
        }
    }

    /// Applies the augmentation to the left factor: `e (x) Id`.
    pub fn counit_left(&self) -> DividedElem {
        let mut out = DividedElem::zero();
        for (&(i, j), f) in self.terms() {
            if i == 0 {
                out.insert_add(j, f.clone());
            }
        }
        out
    }

    /// Applies the augmentation to the right factor: `Id (x) e`.
    pub fn counit_right(&self) -> DividedElem {
        let mut out = DividedElem::zero();
        for (&(i, j), f) in self.terms() {
            if j == 0 {
                out.insert_add(i, f.clone());
            }
        }
        out
    }

    /// Total multiplication after flipping the right factor:
    /// `u (x) v -> u . tau(v)`.
    pub fn mul_flip_right(&self) -> DividedElem {
        let mut out = DividedElem::zero();
        for (&(i, j), f) in self.terms() {
            out = out.add(&dp_mul(&DividedElem::single(i, f.clone()), &flip_basis(j)));
        }
        out
    }

    /// Total multiplication after flipping the left factor:
    /// `u (x) v -> tau(u) . v`.
    pub fn mul_flip_left(&self) -> DividedElem {
        let mut out = DividedElem::zero();
        for (&(i, j), f) in self.terms() {
            out = out.add(&dp_mul(
                &flip(&DividedElem::single(i, f.clone())),
                &DividedElem::basis(j),
            ));
        }
        out
    }
}

impl fmt::Display for TensorElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j), c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c == &APoly::one() {
                write!(f, "xi^[{}] (x) xi^[{}]", i, j)?;
            } else {
                write!(f, "({})*xi^[{}] (x) xi^[{}]", c, i, j)?;
            }
        }
        Ok(())
    }
}

fn check_tensor_levels(a: &TensorElem, b: &TensorElem) -> QResult<()> {
    if a.levels != b.levels {
        let render = |l: Option<(usize, usize)>| match l {
            Some((n, m)) => n * 1000 + m,
            None => usize::MAX,
        };
        return Err(QError::LevelMismatch {
            left: render(a.levels),
            right: render(b.levels),
        });
    }
    Ok(())
}

/// Builds `u (x) v` in normalized form: right-factor A-coefficients migrate
/// into the left factor through `theta`.
pub fn tensor_of(u: &DividedElem, v: &DividedElem, levels: Option<(usize, usize)>) -> TensorElem {
    let mut out = TensorElem::zero(levels);
    for (&j, g) in v.terms() {
        if let Some((_, m)) = levels {
            if j > m {
                continue;
            }
        }
        let left = dp_mul(u, &theta(g));
        for (&i, f) in left.terms() {
            out.insert_add((i, j), f.clone());
        }
    }
    out
}

/// `p1(u) = u (x) 1`.
pub fn tensor_p1(u: &DividedElem, levels: Option<(usize, usize)>) -> TensorElem {
    tensor_of(u, &DividedElem::one(), levels)
}

/// `p2(u) = 1 (x) u`.
pub fn tensor_p2(u: &DividedElem, levels: Option<(usize, usize)>) -> TensorElem {
    tensor_of(&DividedElem::one(), u, levels)
}

/// Product of normalized tensors: componentwise products, with the A-part of
/// the right component migrated left through `theta`.
pub fn tensor_mul(a: &TensorElem, b: &TensorElem) -> QResult<TensorElem> {
    check_tensor_levels(a, b)?;
    let mut out = TensorElem::zero(a.levels);
    for (&(i1, j1), f) in a.terms() {
        for (&(i2, j2), g) in b.terms() {
            let left = dp_mul(
                &DividedElem::single(i1, f.clone()),
                &DividedElem::single(i2, g.clone()),
            );
            let right = dp_mul(&DividedElem::basis(j1), &DividedElem::basis(j2));
            for (&jr, h) in right.terms() {
                if let Some((_, m)) = out.levels {
                    if jr > m {
                        continue;
                    }
                }
                let migrated = dp_mul(&left, &theta(h));
                for (&il, fl) in migrated.terms() {
                    out.insert_add((il, jr), fl.clone());
                }
            }
        }
    }
    Ok(out)
}

/// The diagonal `xi^[n] -> sum_(i+j=n) xi^[i] (x) xi^[j]`, extended
/// A-linearly over the left structure.
pub fn diag(u: &DividedElem) -> TensorElem {
    let mut out = TensorElem::zero(None);
    for (&n, f) in u.terms() {
        for i in 0..=n {
            out.insert_add((i, n - i), f.clone());
        }
    }
    out
}

/// Diagonal of finite order: input at level `n + m`, output truncated to
/// `(n, m)`.
pub fn diag_trunc(u: &TruncatedDivided, n: usize, m: usize) -> QResult<TensorElem> {
    if u.level() != n + m {
        return Err(QError::LevelMismatch {
            left: u.level(),
            right: n + m,
        });
    }
    let mut out = TensorElem::zero(Some((n, m)));
    for k in 0..=u.level() {
        let f = u.coeff(k);
        if f.is_zero() {
            continue;
        }
        for i in 0..=k {
            out.insert_add((i, k - i), f.clone());
        }
    }
    Ok(out)
}

/// A three-factor tensor in left-normalized form, used for coassociativity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TensorElem3 {
    terms: BTreeMap<(usize, usize, usize), APoly>,
}

impl TensorElem3 {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert_add(&mut self, idx: (usize, usize, usize), value: APoly) {
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
}

impl fmt::Display for TensorElem3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(i, j, k), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})*xi^[{}] (x) xi^[{}] (x) xi^[{}]", c, i, j, k)?;
        }
        Ok(())
    }
}

/// `(diag (x) Id)` applied to a normalized tensor.
pub fn diag_tensor_left(t: &TensorElem) -> TensorElem3 {
    let mut out = TensorElem3::default();
    for (&(i, j), f) in t.terms() {
        for a in 0..=i {
            out.insert_add((a, i - a, j), f.clone());
        }
    }
    out
}

/// `(Id (x) diag)` applied to a normalized tensor.
pub fn diag_tensor_right(t: &TensorElem) -> TensorElem3 {
    let mut out = TensorElem3::default();
    for (&(i, j), f) in t.terms() {
        for a in 0..=j {
            out.insert_add((i, a, j - a), f.clone());
        }
    }
    out
}

/// Matrix of the basis images of the flip in `A<xi>_q / I^[n+1]`:
/// entry `(j, k)` is the coefficient of `xi^[j]` in `tau(xi^[k])`.
/// Upper-triangular with diagonal `(-1)^k q^(k(k-1)/2)`, hence invertible.
pub fn tau_matrix(n: usize) -> Vec<Vec<APoly>> {
    let mut m = vec![vec![APoly::zero(); n + 1]; n + 1];
    for k in 0..=n {
        let img = flip_basis(k);
        for (&j, f) in img.terms() {
            if j <= n {
                m[j][k] = f.clone();
            }
        }
    }
    m
}

/// Inverse of `tau_matrix` by back-substitution against the unit diagonal.
pub fn tau_matrix_inverse(n: usize, ctx: &Context) -> QResult<Vec<Vec<APoly>>> {
    let m = tau_matrix(n);
    let mut diag_inv = Vec::with_capacity(n + 1);
    for (k, row) in m.iter().enumerate() {
        let d = &row[k];
        if !d.is_constant() {
            return Err(QError::Internal("non-scalar diagonal in tau matrix".into()));
        }
        diag_inv.push(d.coeff(0).invert(ctx)?);
    }
    let mut inv = vec![vec![APoly::zero(); n + 1]; n + 1];
    for c in 0..=n {
        // solve M y = e_c from the diagonal upward
        inv[c][c] = APoly::constant(diag_inv[c].clone());
        for i in (0..c).rev() {
            let mut acc = APoly::zero();
            for j in (i + 1)..=c {
                acc = &acc + &(&m[i][j] * &inv[j][c]);
            }
            inv[i][c] = (-&acc).scale(&diag_inv[i]);
        }
    }
    Ok(inv)
}

/// Runs the seven commutative-diagram families of the groupoid structure at
/// finite index bounds and returns a structured report with witnesses.
pub fn groupoid_suite(bound: usize, antipode_bound: usize, ctx: &Context) -> SuiteReport {
    let mut report = SuiteReport::new("groupoid", ctx.p(), bound);
    let monomials: Vec<APoly> = (0..=bound.min(6)).map(|m| APoly::x().pow(m)).collect();

    // (1) counit against both A-structures
    for (m, f) in monomials.iter().enumerate() {
        report.push(CheckResult::from_eq(
            format!("1-counit-can-x^{}", m),
            &DividedElem::from_apoly(f).augmentation(),
            f,
        ));
        report.push(CheckResult::from_eq(
            format!("1-counit-theta-x^{}", m),
            &theta(f).augmentation(),
            f,
        ));
    }

    // (2) diagonal against the two projections
    for (m, f) in monomials.iter().enumerate() {
        let can = DividedElem::from_apoly(f);
        let th = theta(f);
        report.push(CheckResult::from_eq(
            format!("2-diag-can-p1-x^{}", m),
            &diag(&can),
            &tensor_p1(&can, None),
        ));
        report.push(CheckResult::from_eq(
            format!("2-diag-theta-p2-x^{}", m),
            &diag(&th),
            &tensor_p2(&th, None),
        ));
    }
    // multiplicativity over the basis, which transports (2) to the xi^[n]
    for n in 0..=bound.min(5) {
        for m in 0..=bound.min(5) {
            let lhs = diag(&dp_mul(&DividedElem::basis(n), &DividedElem::basis(m)));
            let rhs = tensor_mul(&diag(&DividedElem::basis(n)), &diag(&DividedElem::basis(m)))
                .expect("levels match");
            report.push(CheckResult::from_eq(
                format!("2-diag-multiplicative-{}-{}", n, m),
                &lhs,
                &rhs,
            ));
        }
    }

    // (3) counit laws of the coproduct
    for n in 0..=bound {
        let u = DividedElem::basis(n);
        let d = diag(&u);
        report.push(CheckResult::from_eq(
            format!("3-counit-left-xi[{}]", n),
            &d.counit_left(),
            &u,
        ));
        report.push(CheckResult::from_eq(
            format!("3-counit-right-xi[{}]", n),
            &d.counit_right(),
            &u,
        ));
    }

    // (4) coassociativity
    for n in 0..=bound {
        let d = diag(&DividedElem::basis(n));
        report.push(CheckResult::from_eq(
            format!("4-coassoc-xi[{}]", n),
            &diag_tensor_left(&d),
            &diag_tensor_right(&d),
        ));
    }

    // (5) flip exchanges the two A-structures
    for (m, f) in monomials.iter().enumerate() {
        report.push(CheckResult::from_eq(
            format!("5-flip-can-theta-x^{}", m),
            &flip(&DividedElem::from_apoly(f)),
            &theta(f),
        ));
        report.push(CheckResult::from_eq(
            format!("5-flip-theta-can-x^{}", m),
            &flip(&theta(f)),
            &DividedElem::from_apoly(f),
        ));
    }

    // (6) the augmentation is flip-invariant
    for n in 0..=bound {
        let u = DividedElem::single(n, APoly::x());
        report.push(CheckResult::from_eq(
            format!("6-counit-flip-xi[{}]", n),
            &flip(&u).augmentation(),
            &u.augmentation(),
        ));
    }

    // (7) antipode-type diagrams
    for n in 0..=bound {
        let u = DividedElem::single(n, APoly::x());
        let d = diag(&u);
        let expect_can = DividedElem::from_apoly(&u.augmentation());
        let expect_theta = theta(&u.augmentation());
        report.push(CheckResult::from_eq(
            format!("7-antipode-id-tau-xi[{}]", n),
            &d.mul_flip_right(),
            &expect_can,
        ));
        report.push(CheckResult::from_eq(
            format!("7-antipode-tau-id-xi[{}]", n),
            &d.mul_flip_left(),
            &expect_theta,
        ));
    }
    for k in 0..=antipode_bound {
        let mut sum = DividedElem::zero();
        for i in 0..=k {
            sum = sum.add(&dp_mul(&flip_basis(i), &DividedElem::basis(k - i)));
        }
        let expect = if k == 0 {
            DividedElem::one()
        } else {
            DividedElem::zero()
        };
        report.push(CheckResult::from_eq(
            format!("7-antipode-sum-k{:02}", k),
            &sum,
            &expect,
        ));
    }

    report.canonicalize();
    report
}
