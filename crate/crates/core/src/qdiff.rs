//! The automorphism `sigma(x) = qx`, the Jackson q-derivation, the
//! noncommutative operator ring generated by `partial_q`, finite q-Taylor
//! structures and stratifications on free modules, and the extraction of a
//! `partial_q`-action matrix from a stratification (the computational
//! content of a q-crystal).
//!
//! A `QModule` is a free module with the action of `partial_q` on the chosen
//! basis given by a matrix `B` (`partial(e_j) = sum_i B[i][j] e_i`). Its
//! order-`n` q-Taylor matrix `E[i][j] = sum_k B^(k)[i][j] xi^[k]` over the
//! truncated divided-power algebra is the stratification, and the explicit
//! inverse is assembled from the flip images and `theta`.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::deltaring::APoly;
use crate::error::{QError, QResult};
use crate::groupoid::{diag_trunc, flip_basis, tensor_of, theta_trunc, TensorElem};
use crate::qarith::{q_int, AdicOrder, IntPoly, LocalScalar};
use crate::report::CheckResult;
use crate::twisted::{trunc_mul, truncate, DividedElem, TruncatedDivided};

/// The R-algebra endomorphism of `A` with `sigma(x) = qx`:
/// coefficient `i` is multiplied by `q^i`.
pub fn sigma_apply(f: &APoly) -> APoly {
    let out = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            c * &LocalScalar::from_int_poly(IntPoly::monomial(num_bigint::BigInt::from(1), i))
        })
        .collect();
    APoly::from_coeffs(out)
}

/// The Jackson q-derivation: the exact quotient `(f(qx) - f(x)) / ((q-1)x)`,
/// sending `x^n` to `(n)_q x^(n-1)`.
pub fn jackson(f: &APoly) -> APoly {
    let diff = &sigma_apply(f) - f;
    if diff.is_zero() {
        return APoly::zero();
    }
    let qm1 = IntPoly::from_coeffs(vec![num_bigint::BigInt::from(-1), num_bigint::BigInt::from(1)]);
    debug_assert!(diff.coeff(0).is_zero(), "sigma(f) - f must vanish at x = 0");
    let mut out = Vec::with_capacity(f.coeffs().len().saturating_sub(1));
    for i in 1..f.coeffs().len() {
        let c = diff.coeff(i);
        out.push(
            c.div_num_exact(&qm1)
                .expect("(q^i - 1) is divisible by q - 1"),
        );
    }
    APoly::from_coeffs(out)
}

/// An element `sum_k f_k partial^k` of the q-differential operator ring, in
/// normal form with all `partial`s on the right.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QDiffOp {
    coeffs: Vec<APoly>,
}

impl QDiffOp {
    pub fn zero() -> Self {
        QDiffOp { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        QDiffOp::from_coeffs(vec![APoly::one()])
    }

    /// The generator `partial_q`.
    pub fn partial() -> Self {
        QDiffOp::from_coeffs(vec![APoly::zero(), APoly::one()])
    }

    pub fn scalar(f: APoly) -> Self {
        QDiffOp::from_coeffs(vec![f])
    }

    pub fn from_coeffs(mut coeffs: Vec<APoly>) -> Self {
        while coeffs.last().map_or(false, APoly::is_zero) {
            coeffs.pop();
        }
        QDiffOp { coeffs }
    }

    pub fn coeffs(&self) -> &[APoly] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> APoly {
        self.coeffs.get(k).cloned().unwrap_or_else(APoly::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Operator order: the largest `partial`-exponent.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &QDiffOp) -> QDiffOp {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![APoly::zero(); n];
        for (k, f) in self.coeffs.iter().enumerate() {
            coeffs[k] = &coeffs[k] + f;
        }
        for (k, f) in other.coeffs.iter().enumerate() {
            coeffs[k] = &coeffs[k] + f;
        }
        QDiffOp::from_coeffs(coeffs)
    }

    fn scale_left(&self, f: &APoly) -> QDiffOp {
        QDiffOp::from_coeffs(self.coeffs.iter().map(|c| f * c).collect())
    }

    fn shift(&self, l: usize) -> QDiffOp {
        if self.is_zero() {
            return QDiffOp::zero();
        }
        let mut coeffs = vec![APoly::zero(); self.coeffs.len() + l];
        for (k, f) in self.coeffs.iter().enumerate() {
            coeffs[k + l] = f.clone();
        }
        QDiffOp::from_coeffs(coeffs)
    }
}

impl fmt::Display for QDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", c)?,
                1 => write!(f, "({})*D", c)?,
                _ => write!(f, "({})*D^{}", c, k)?,
            }
        }
        Ok(())
    }
}

/// `partial . (op)`: one application of the commutation rule
/// `partial f = sigma(f) partial + jackson(f)`.
fn partial_compose(op: &QDiffOp) -> QDiffOp {
    let mut coeffs = vec![APoly::zero(); op.coeffs.len() + 1];
    for (m, h) in op.coeffs.iter().enumerate() {
        coeffs[m + 1] = &coeffs[m + 1] + &sigma_apply(h);
        coeffs[m] = &coeffs[m] + &jackson(h);
    }
    QDiffOp::from_coeffs(coeffs)
}

/// Normal-form product of two operators.
pub fn qdo_mul(a: &QDiffOp, b: &QDiffOp) -> QDiffOp {
    let mut out = QDiffOp::zero();
    for (l, g) in b.coeffs.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        // partial^k . g, then shift by l and multiply by f_k on the left
        let mut composed = QDiffOp::scalar(g.clone());
        for (k, f) in a.coeffs.iter().enumerate() {
            if k > 0 {
                composed = partial_compose(&composed);
            }
            if f.is_zero() {
                continue;
            }
            out = out.add(&composed.scale_left(f).shift(l));
        }
    }
    out
}

/// Applies an operator to an element of `A`.
pub fn qdo_apply(a: &QDiffOp, f: &APoly) -> APoly {
    let mut out = APoly::zero();
    let mut derived = f.clone();
    for (k, c) in a.coeffs.iter().enumerate() {
        if k > 0 {
            derived = jackson(&derived);
        }
        out = &out + &(c * &derived);
    }
    out
}

/// A free module with a `partial_q`-action matrix on the chosen basis:
/// `partial(e_j) = sum_i B[i][j] e_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QModule {
    rank: usize,
    action: Vec<Vec<APoly>>,
}

impl QModule {
    pub fn new(rank: usize, action: Vec<Vec<APoly>>) -> QResult<Self> {
        if rank == 0 {
            return Err(QError::Domain("module rank must be at least 1".into()));
        }
        if action.len() != rank || action.iter().any(|row| row.len() != rank) {
            return Err(QError::RankMismatch {
                expected: rank,
                got: action.len(),
            });
        }
        Ok(QModule { rank, action })
    }

    /// Rank-one module recovering the Jackson derivation on `A`.
    pub fn trivial() -> Self {
        QModule {
            rank: 1,
            action: vec![vec![APoly::zero()]],
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn action(&self) -> &[Vec<APoly>] {
        &self.action
    }
}

/// Coordinates of an element of a free module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModElem {
    coords: Vec<APoly>,
}

impl ModElem {
    pub fn new(coords: Vec<APoly>) -> Self {
        ModElem { coords }
    }

    pub fn basis_vector(rank: usize, j: usize) -> Self {
        let mut coords = vec![APoly::zero(); rank];
        coords[j] = APoly::one();
        ModElem { coords }
    }

    pub fn coords(&self) -> &[APoly] {
        &self.coords
    }

    pub fn adic_order(&self, ctx: &Context) -> AdicOrder {
        self.coords
            .iter()
            .map(|c| c.adic_order(ctx))
            .min()
            .unwrap_or(AdicOrder::Infinite)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(APoly::is_zero)
    }
}

/// The module q-derivation: `partial(sum f_j e_j) =
/// sum jackson(f_j) e_j + sum sigma(f_j) B e_j`.
pub fn mod_apply_partial(m: &QModule, s: &ModElem, _ctx: &Context) -> QResult<ModElem> {
    if s.coords.len() != m.rank {
        return Err(QError::RankMismatch {
            expected: m.rank,
            got: s.coords.len(),
        });
    }
    let mut out = vec![APoly::zero(); m.rank];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = jackson(&s.coords[i]);
        for j in 0..m.rank {
            *slot = &*slot + &(&m.action[i][j] * &sigma_apply(&s.coords[j]));
        }
    }
    Ok(ModElem::new(out))
}

/// Matrices of `partial^k` on the basis for `k = 0..=k_max`.
pub fn partial_power_matrices(m: &QModule, k_max: usize, ctx: &Context) -> Vec<Vec<Vec<APoly>>> {
    let r = m.rank;
    let mut mats = Vec::with_capacity(k_max + 1);
    let mut id = vec![vec![APoly::zero(); r]; r];
    for (i, row) in id.iter_mut().enumerate() {
        row[i] = APoly::one();
    }
    mats.push(id);
    for k in 0..k_max {
        let prev = &mats[k];
        let mut next = vec![vec![APoly::zero(); r]; r];
        for j in 0..r {
            let col = ModElem::new((0..r).map(|i| prev[i][j].clone()).collect());
            let img = mod_apply_partial(m, &col, ctx).expect("rank is consistent");
            for (i, row) in next.iter_mut().enumerate() {
                row[j] = img.coords[i].clone();
            }
        }
        mats.push(next);
    }
    mats
}

/// The order-`n` q-Taylor matrix `E[i][j] = sum_k partial^k[i][j] xi^[k]`
/// over the level-`n` truncated algebra; `E` is the stratification matrix.
pub fn taylor_n(m: &QModule, n: usize, ctx: &Context) -> Vec<Vec<TruncatedDivided>> {
    let mats = partial_power_matrices(m, n, ctx);
    let r = m.rank;
    let mut out = vec![vec![TruncatedDivided::zero(n); r]; r];
    for i in 0..r {
        for j in 0..r {
            for (k, mat) in mats.iter().enumerate() {
                out[i][j].set_coeff(k, mat[i][j].clone());
            }
        }
    }
    out
}

/// The stratification matrix of order `n` (the truncated-algebra-linear
/// extension of the q-Taylor matrix).
pub fn strat_eps(m: &QModule, n: usize, ctx: &Context) -> Vec<Vec<TruncatedDivided>> {
    taylor_n(m, n, ctx)
}

/// Matrices of `partial^k` until the action vanishes. The depth is finite
/// exactly for actions that are nilpotent on the basis (strictly triangular
/// matrices with polynomial entries); otherwise this fails.
fn partial_matrices_to_depth(m: &QModule, ctx: &Context) -> QResult<Vec<Vec<Vec<APoly>>>> {
    let max_deg = m
        .action
        .iter()
        .flatten()
        .filter_map(|f| f.degree())
        .max()
        .unwrap_or(0);
    let cap = m.rank * (max_deg + 2) + 4;
    let mats = partial_power_matrices(m, cap, ctx);
    let depth = mats
        .iter()
        .position(|mat| mat.iter().flatten().all(APoly::is_zero));
    match depth {
        Some(d) => Ok(mats[..d].to_vec()),
        None => Err(QError::Domain(format!(
            "the partial-action is not nilpotent within {} steps; the explicit \
             inverse is an adically convergent series, not a polynomial matrix",
            cap
        ))),
    }
}

/// Explicit inverse of the stratification:
/// `inv[l][i] = sum_k tau(xi^[k]) theta(partial^k[l][i])`,
/// where the sum runs to the nilpotency depth of the action and each
/// `tau(xi^[k])` is truncated to level `n`. The flip image of `xi^[k]` does
/// not vanish in the quotient for `k > n`, so cutting the sum at `n` would
/// leave the composite off by the antipode tail; running it to the depth
/// makes both composites the identity exactly.
pub fn strat_eps_inv(m: &QModule, n: usize, ctx: &Context) -> QResult<Vec<Vec<TruncatedDivided>>> {
    let mats = partial_matrices_to_depth(m, ctx)?;
    let r = m.rank;
    let mut out = vec![vec![TruncatedDivided::zero(n); r]; r];
    for l in 0..r {
        for i in 0..r {
            for (k, mat) in mats.iter().enumerate() {
                let entry = &mat[l][i];
                if entry.is_zero() {
                    continue;
                }
                let flip_k = truncate(&flip_basis(k), n);
                let term = trunc_mul(&flip_k, &theta_trunc(entry, n)).expect("levels match");
                out[l][i] = out[l][i].add(&term).expect("levels match");
            }
        }
    }
    Ok(out)
}

/// Product of matrices over the truncated algebra.
pub fn trunc_matrix_mul(
    a: &[Vec<TruncatedDivided>],
    b: &[Vec<TruncatedDivided>],
) -> QResult<Vec<Vec<TruncatedDivided>>> {
    let r = a.len();
    let level = a[0][0].level();
    let mut out = vec![vec![TruncatedDivided::zero(level); r]; r];
    for i in 0..r {
        for j in 0..r {
            for (k, bk) in b.iter().enumerate() {
                let prod = trunc_mul(&a[i][k], &bk[j])?;
                out[i][j] = out[i][j].add(&prod)?;
            }
        }
    }
    Ok(out)
}

/// True when the matrix is the identity over the truncated algebra.
pub fn trunc_matrix_is_identity(m: &[Vec<TruncatedDivided>]) -> bool {
    let level = m[0][0].level();
    m.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, e)| {
            let expect = if i == j {
                TruncatedDivided::one(level)
            } else {
                TruncatedDivided::zero(level)
            };
            *e == expect
        })
    })
}

/// Checks the composition law of the q-Taylor structure on the basis:
/// `(taylor_n (x) Id) . taylor_m = (Id (x) diag_{n,m}) . taylor_{n+m}`,
/// together with the counit law `(Id (x) e) . taylor_n = Id`.
pub fn cocycle_check(m: &QModule, n: usize, mm: usize, ctx: &Context) -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let r = m.rank;
    let levels = Some((n, mm));
    let t_n = taylor_n(m, n, ctx);
    let t_m = taylor_n(m, mm, ctx);
    let t_nm = taylor_n(m, n + mm, ctx);
    for j in 0..r {
        for a in 0..r {
            // left route: expand e_j to order mm, then each e_i to order n
            let mut lhs = TensorElem::zero(levels);
            for i in 0..r {
                let t = tensor_of(
                    &t_n[a][i].to_divided(),
                    &t_m[i][j].to_divided(),
                    levels,
                );
                lhs = lhs.add(&t).expect("levels match");
            }
            // right route: expand e_j to order n + mm and split the index
            let rhs = diag_trunc(&t_nm[a][j], n, mm).expect("level is n+mm");
            checks.push(CheckResult::from_eq(
                format!("cocycle-{}-{}-basis{}-row{}", n, mm, j, a),
                &lhs,
                &rhs,
            ));
        }
    }
    for j in 0..r {
        for i in 0..r {
            let got = t_n[i][j].coeff(0);
            let expect = if i == j { APoly::one() } else { APoly::zero() };
            checks.push(CheckResult::from_eq(
                format!("counit-{}-basis{}-row{}", n, j, i),
                &got,
                &expect,
            ));
        }
    }
    checks
}

/// One row of a quasi-nilpotence certificate.
#[derive(Debug, Clone)]
pub struct NilpotenceRow {
    pub basis: usize,
    pub power: usize,
    pub order: AdicOrder,
    pub required: u64,
    pub ok: bool,
}

/// Finite-stage witness of topological quasi-nilpotence: for every basis
/// vector and `k <= k_max`, the adic order of `partial^k(e_j)` must reach
/// `floor(k / window)`. A certificate is evidence at finite depth, not a
/// proof of the limit.
#[derive(Debug, Clone)]
pub struct NilpotenceCertificate {
    pub pass: bool,
    pub rows: Vec<NilpotenceRow>,
}

pub fn quasinilpotent_certificate(
    m: &QModule,
    k_max: usize,
    window: usize,
    ctx: &Context,
) -> QResult<NilpotenceCertificate> {
    if k_max == 0 || window == 0 {
        return Err(QError::Domain(
            "certificate needs k_max >= 1 and window >= 1".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut pass = true;
    for j in 0..m.rank {
        let mut s = ModElem::basis_vector(m.rank, j);
        for k in 1..=k_max {
            s = mod_apply_partial(m, &s, ctx)?;
            let order = s.adic_order(ctx);
            let required = (k / window) as u64;
            let ok = order.at_least(required);
            pass &= ok;
            rows.push(NilpotenceRow {
                basis: j,
                power: k,
                order,
                required,
                ok,
            });
        }
    }
    Ok(NilpotenceCertificate { pass, rows })
}

/// Recovers the `partial_q`-action matrix from a stratification matrix over
/// the level-`N` truncated algebra: the pullback along the augmentation must
/// be the identity, the action is the coefficient of `xi^[1]`, and the input
/// must agree with the stratification rebuilt from that action.
pub fn crystal_to_dmodule(
    transition: &[Vec<TruncatedDivided>],
    ctx: &Context,
) -> QResult<QModule> {
    let r = transition.len();
    if r == 0 || transition.iter().any(|row| row.len() != r) {
        return Err(QError::RankMismatch {
            expected: r.max(1),
            got: transition.first().map_or(0, |row| row.len()),
        });
    }
    let level = transition[0][0].level();
    // e-pullback must be the identity
    for (i, row) in transition.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            if e.level() != level {
                return Err(QError::LevelMismatch {
                    left: e.level(),
                    right: level,
                });
            }
            let expect = if i == j { APoly::one() } else { APoly::zero() };
            if e.coeff(0) != expect {
                return Err(QError::NotAStratification {
                    witness: format!("pullback along e is not the identity at ({}, {})", i, j),
                });
            }
        }
    }
    let action: Vec<Vec<APoly>> = transition
        .iter()
        .map(|row| row.iter().map(|e| e.coeff(1)).collect())
        .collect();
    let module = QModule::new(r, action)?;
    let rebuilt = strat_eps(&module, level, ctx);
    for i in 0..r {
        for j in 0..r {
            if rebuilt[i][j] != transition[i][j] {
                for k in 0..=level {
                    if rebuilt[i][j].coeff(k) != transition[i][j].coeff(k) {
                        return Err(QError::NotAStratification {
                            witness: format!(
                                "entry ({}, {}) differs at index {}: {} vs {}",
                                i,
                                j,
                                k,
                                transition[i][j].coeff(k),
                                rebuilt[i][j].coeff(k)
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok(module)
}

/// A random strictly-triangular module with small polynomial entries; its
/// `partial`-action is nilpotent, so the quasi-nilpotence certificate holds
/// with order infinity past a finite depth.
pub fn random_nilpotent_module(rank: usize, seed: u64) -> QModule {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut action = vec![vec![APoly::zero(); rank]; rank];
    for (i, row) in action.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            if j > i {
                let c: i64 = rng.gen_range(-2..=2);
                let deg = rng.gen_range(0..=1);
                *slot = APoly::monomial(LocalScalar::from_int(c), deg);
            }
        }
    }
    QModule::new(rank, action).expect("rank is positive")
}

/// `B = [(q-1)]`: a rank-one module whose certificate orders grow linearly.
pub fn q_minus_one_module() -> QModule {
    let qm1 = IntPoly::from_coeffs(vec![num_bigint::BigInt::from(-1), num_bigint::BigInt::from(1)]);
    QModule::new(1, vec![vec![APoly::from_int_poly(qm1)]]).expect("rank 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::theta;
    use crate::qarith::q_factorial;

    fn ctx(p: u32) -> Context {
        Context::new(p).unwrap()
    }

    fn sample_apoly(rng: &mut StdRng) -> APoly {
        crate::deltaring::tests::sample_apoly(rng, 3)
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(
            sigma_apply(&APoly::x()),
            APoly::monomial(LocalScalar::from_int_poly(IntPoly::q()), 1)
        );
        assert_eq!(sigma_apply(&APoly::from_int(5)), APoly::from_int(5));
        let x3 = APoly::x().pow(3);
        assert_eq!(
            sigma_apply(&x3),
            x3.scale(&LocalScalar::from_int_poly(IntPoly::monomial(
                num_bigint::BigInt::from(1),
                3
            )))
        );
    }

    #[test]
    fn jackson_examples() {
        // x^3 -> (3)_q x^2
        assert_eq!(
            jackson(&APoly::x().pow(3)),
            APoly::monomial(LocalScalar::from_int_poly(q_int(3)), 2)
        );
        assert!(jackson(&APoly::from_int(9)).is_zero());
        assert!(jackson(&APoly::zero()).is_zero());
    }

    #[test]
    fn jackson_twisted_leibniz() {
        let mut rng = StdRng::seed_from_u64(51);
        for _ in 0..100 {
            let f = sample_apoly(&mut rng);
            let g = sample_apoly(&mut rng);
            let lhs = jackson(&(&f * &g));
            let rhs = &(&f * &jackson(&g)) + &(&sigma_apply(&g) * &jackson(&f));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn sigma_partial_commutation() {
        // jackson(sigma(f)) = q sigma(jackson(f))
        let q = LocalScalar::from_int_poly(IntPoly::q());
        let mut rng = StdRng::seed_from_u64(53);
        for _ in 0..50 {
            let f = sample_apoly(&mut rng);
            assert_eq!(
                jackson(&sigma_apply(&f)),
                sigma_apply(&jackson(&f)).scale(&q)
            );
        }
    }

    #[test]
    fn operator_commutation_rule() {
        // partial . x = q x partial + 1
        let x_op = QDiffOp::scalar(APoly::x());
        let prod = qdo_mul(&QDiffOp::partial(), &x_op);
        assert_eq!(prod.coeff(0), APoly::one());
        assert_eq!(
            prod.coeff(1),
            APoly::monomial(LocalScalar::from_int_poly(IntPoly::q()), 1)
        );
        // identity is neutral
        let mut rng = StdRng::seed_from_u64(57);
        for _ in 0..20 {
            let a = QDiffOp::from_coeffs(vec![sample_apoly(&mut rng), sample_apoly(&mut rng)]);
            assert_eq!(qdo_mul(&QDiffOp::one(), &a), a);
            assert_eq!(qdo_mul(&a, &QDiffOp::one()), a);
        }
    }

    #[test]
    fn operator_application() {
        // partial^2 (x^2) = (2)_q (1)_q = (2)_q!
        let dd = qdo_mul(&QDiffOp::partial(), &QDiffOp::partial());
        assert_eq!(
            qdo_apply(&dd, &APoly::x().pow(2)),
            APoly::from_int_poly(q_factorial(2))
        );
    }

    #[test]
    fn operator_ring_laws() {
        let mut rng = StdRng::seed_from_u64(59);
        for _ in 0..100 {
            let mk = |rng: &mut StdRng| {
                QDiffOp::from_coeffs(
                    (0..=rng.gen_range(0..=3))
                        .map(|_| crate::deltaring::tests::sample_apoly(rng, 2))
                        .collect(),
                )
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let c = mk(&mut rng);
            assert_eq!(qdo_mul(&qdo_mul(&a, &b), &c), qdo_mul(&a, &qdo_mul(&b, &c)));
            // action on A is a ring morphism
            let f = sample_apoly(&mut rng);
            assert_eq!(
                qdo_apply(&qdo_mul(&a, &b), &f),
                qdo_apply(&a, &qdo_apply(&b, &f))
            );
        }
    }

    #[test]
    fn module_action_examples() {
        let c = ctx(2);
        // rank one with B = 0 recovers the Jackson derivation
        let m = QModule::trivial();
        let s = ModElem::new(vec![APoly::x().pow(3)]);
        assert_eq!(
            mod_apply_partial(&m, &s, &c).unwrap().coords()[0],
            APoly::monomial(LocalScalar::from_int_poly(q_int(3)), 2)
        );
        // B = [lambda] on the unit vector returns lambda
        let lambda = APoly::from_int_poly(q_int(3));
        let m2 = QModule::new(1, vec![vec![lambda.clone()]]).unwrap();
        let one = ModElem::basis_vector(1, 0);
        assert_eq!(mod_apply_partial(&m2, &one, &c).unwrap().coords()[0], lambda);
        // twisted Leibniz for the module action
        let mut rng = StdRng::seed_from_u64(61);
        for _ in 0..50 {
            let f = sample_apoly(&mut rng);
            let s = ModElem::new(vec![sample_apoly(&mut rng), sample_apoly(&mut rng)]);
            let m3 = random_nilpotent_module(2, 7);
            let fs = ModElem::new(s.coords().iter().map(|c0| &f * c0).collect());
            let lhs = mod_apply_partial(&m3, &fs, &c).unwrap();
            let ds = mod_apply_partial(&m3, &s, &c).unwrap();
            let rhs = ModElem::new(
                (0..2)
                    .map(|i| {
                        &(&jackson(&f) * &s.coords()[i]) + &(&sigma_apply(&f) * &ds.coords()[i])
                    })
                    .collect(),
            );
            assert_eq!(lhs, rhs);
        }
        // rank mismatch is rejected
        assert!(matches!(
            mod_apply_partial(&m2, &ModElem::basis_vector(2, 0), &c),
            Err(QError::RankMismatch { .. })
        ));
    }

    #[test]
    fn taylor_matrix_examples() {
        let c = ctx(2);
        // order zero is the identity
        let m = random_nilpotent_module(2, 3);
        assert!(trunc_matrix_is_identity(&taylor_n(&m, 0, &c)));
        // rank one, B = 0: the expansion of f is theta(f) truncated
        let triv = QModule::trivial();
        let mats = partial_power_matrices(&triv, 3, &c);
        let f = APoly::x().pow(2);
        let mut expansion = TruncatedDivided::zero(3);
        let mut der = f.clone();
        for k in 0..=3 {
            if k > 0 {
                der = jackson(&der);
            }
            expansion.set_coeff(k, der.clone());
        }
        assert_eq!(expansion, theta_trunc(&f, 3));
        assert_eq!(mats[1][0][0], APoly::zero());
    }

    #[test]
    fn q_taylor_expansion_matches_theta() {
        // theta(f) = sum_k jackson^k(f) xi^[k]
        let mut rng = StdRng::seed_from_u64(67);
        for _ in 0..50 {
            let f = sample_apoly(&mut rng);
            let mut expect = DividedElem::zero();
            let mut der = f.clone();
            let mut k = 0;
            loop {
                expect.insert_add(k, der.clone());
                if der.is_zero() {
                    break;
                }
                der = jackson(&der);
                k += 1;
            }
            assert_eq!(theta(&f), expect);
        }
    }

    #[test]
    fn stratification_round_trip() {
        let c = ctx(2);
        let modules = [
            QModule::trivial(),
            random_nilpotent_module(2, 11),
            random_nilpotent_module(3, 13),
        ];
        for (idx, m) in modules.iter().enumerate() {
            for n in 0..=4usize {
                let e = strat_eps(m, n, &c);
                let einv = strat_eps_inv(m, n, &c).unwrap();
                let left = trunc_matrix_mul(&einv, &e).unwrap();
                let right = trunc_matrix_mul(&e, &einv).unwrap();
                assert!(trunc_matrix_is_identity(&left), "module {} n={}", idx, n);
                assert!(trunc_matrix_is_identity(&right), "module {} n={}", idx, n);
            }
        }
    }

    #[test]
    fn inverse_series_needs_a_nilpotent_action() {
        // B = [(q-1)] is topologically quasi-nilpotent but not nilpotent:
        // the explicit inverse is an adic series, not a polynomial matrix
        let c = ctx(2);
        assert!(matches!(
            strat_eps_inv(&q_minus_one_module(), 2, &c),
            Err(QError::Domain(_))
        ));
    }

    #[test]
    fn inverse_series_runs_past_the_level() {
        // depth-3 chain: at level 1 the inverse needs the k = 2 term, whose
        // flip image survives truncation
        let c = ctx(2);
        let mut action = vec![vec![APoly::zero(); 3]; 3];
        action[1][2] = APoly::one();
        action[0][1] = APoly::one();
        let m = QModule::new(3, action).unwrap();
        let e = strat_eps(&m, 1, &c);
        let einv = strat_eps_inv(&m, 1, &c).unwrap();
        assert!(trunc_matrix_is_identity(&trunc_matrix_mul(&einv, &e).unwrap()));
        assert!(trunc_matrix_is_identity(&trunc_matrix_mul(&e, &einv).unwrap()));
    }

    #[test]
    fn cocycle_passes() {
        let c = ctx(2);
        let modules = [
            QModule::trivial(),
            q_minus_one_module(),
            random_nilpotent_module(2, 17),
        ];
        for m in &modules {
            for n in 0..=2usize {
                for mm in 0..=2usize {
                    for check in cocycle_check(m, n, mm, &c) {
                        assert!(check.pass, "{}: {:?}", check.name, check.witness);
                    }
                }
            }
        }
    }

    #[test]
    fn nilpotence_certificates() {
        let c = ctx(2);
        // B = [(q-1)]: orders grow at least linearly
        let cert = quasinilpotent_certificate(&q_minus_one_module(), 5, 1, &c).unwrap();
        assert!(cert.pass);
        // polynomial entries die under repeated differentiation
        let cert2 = quasinilpotent_certificate(&QModule::trivial(), 4, 1, &c).unwrap();
        assert!(cert2.pass);
        // B = [1] stays a unit forever
        let stuck = QModule::new(1, vec![vec![APoly::one()]]).unwrap();
        let cert3 = quasinilpotent_certificate(&stuck, 4, 2, &c).unwrap();
        assert!(!cert3.pass);
    }

    #[test]
    fn crystal_round_trip() {
        let c = ctx(2);
        for rank in 1..=3usize {
            let m = random_nilpotent_module(rank, 19 + rank as u64);
            for level in 1..=4usize {
                let e = strat_eps(&m, level, &c);
                let back = crystal_to_dmodule(&e, &c).unwrap();
                assert_eq!(&back, &m, "rank={} level={}", rank, level);
            }
        }
        // identity transition gives the zero action
        let id: Vec<Vec<TruncatedDivided>> = vec![vec![TruncatedDivided::one(3)]];
        let z = crystal_to_dmodule(&id, &c).unwrap();
        assert!(z.action()[0][0].is_zero());
        // violating the pullback condition is rejected
        let mut bad = TruncatedDivided::one(2);
        bad.set_coeff(0, APoly::x());
        assert!(matches!(
            crystal_to_dmodule(&[vec![bad]], &c),
            Err(QError::NotAStratification { .. })
        ));
        // a tampered higher coefficient is not a stratification either
        let m = random_nilpotent_module(2, 23);
        let mut e = strat_eps(&m, 3, &c);
        e[0][1].set_coeff(3, APoly::x());
        assert!(matches!(
            crystal_to_dmodule(&e, &c),
            Err(QError::NotAStratification { .. })
        ));
    }
}
