//! Pointwise Finsler's lemma for a fixed pair `(Q, B)`.
//!
//! The four equivalent statements are
//!
//! * (F1) `x^T Q x < 0` for every nonzero `x` with `B x = 0`;
//! * (F2) some scalar `mu` gives `Q - mu B^T B < 0`;
//! * (F3) some `X` gives `Q + X B + B^T X^T < 0`;
//! * (F4) `(B^perp)^T Q B^perp < 0`.
//!
//! F1 is decided through F4. When `B` has full column rank, F1 and F4 are
//! empty statements and hold trivially, and F2/F3 always admit the closed-form
//! witnesses of [`construct_mu`] and [`construct_x`].
//!
//! The feasible multipliers form an open half-line `(mu_inf, +inf)`; [`mu_inf`]
//! returns its left end, `+inf` when the set is empty and `-inf` when every
//! real multiplier works (`B = 0`, `Q < 0`).

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symlin::{kernel_basis, RectMatrix, SymMatrix};

const MAX_BRACKET_STEPS: usize = 200;
const MAX_BISECTIONS: usize = 400;
const MAX_MARGIN_DOUBLINGS: usize = 60;

/// Real number extended with both infinities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Scalar> ExtendedReal<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Value as a plain scalar, mapping the tags onto IEEE infinities.
    pub fn to_scalar(&self) -> T {
        match *self {
            ExtendedReal::NegInf => T::neg_infinity(),
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInf => T::infinity(),
        }
    }

    pub fn from_scalar(v: T) -> Self {
        if v == T::infinity() {
            ExtendedReal::PosInf
        } else if v == T::neg_infinity() {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::Finite(v)
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl<T: Scalar> PartialOrd for ExtendedReal<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.partial_cmp(b),
            (NegInf, NegInf) | (PosInf, PosInf) => Some(Ordering::Equal),
            (NegInf, _) | (_, PosInf) => Some(Ordering::Less),
            (_, NegInf) | (PosInf, _) => Some(Ordering::Greater),
        }
    }
}

impl<T: Scalar> fmt::Display for ExtendedReal<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInf => f.write_str("-inf"),
            ExtendedReal::PosInf => f.write_str("+inf"),
            ExtendedReal::Finite(v) => write!(f, "{:.12e}", v),
        }
    }
}

/// Numerical tolerances shared by every test in the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<T> {
    /// Relative margin of strict definiteness, see [`SymMatrix::is_neg_def`].
    pub def_tol: T,
    /// Relative singular-value cutoff for rank decisions; also the absolute
    /// threshold below which `B` counts as the zero matrix.
    pub rank_tol: T,
    /// Absolute plus relative width at which bisection stops.
    pub bisect_tol: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        let t = T::c(1e-10).max(T::epsilon() * T::c(1024.0));
        Self {
            def_tol: t,
            rank_tol: t,
            bisect_tol: t,
        }
    }
}

impl<T: Scalar> Tolerances<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v.is_finite() && v > T::zero();
        if ok(self.def_tol) && ok(self.rank_tol) && ok(self.bisect_tol) {
            Ok(())
        } else {
            Err(Error::InvalidInput("tolerances must be positive and finite".into()))
        }
    }
}

/// Outcome of checking all four statements for one `(Q, B)`.
#[derive(Clone, Debug)]
pub struct FinslerCertificate<T> {
    pub verdict_f1: bool,
    pub verdict_f2: bool,
    pub verdict_f3: bool,
    pub verdict_f4: bool,
    /// Left end of the open interval of feasible multipliers.
    pub mu_inf: ExtendedReal<T>,
    /// A verified multiplier: `mu_inf` plus a margin when finite.
    pub mu_witness: ExtendedReal<T>,
    /// `X = -mu/2 B^T` for a verified `mu`.
    pub x_witness: Option<RectMatrix<T>>,
    /// Closed-form multiplier, present when `B` has full column rank.
    pub closed_form_mu: Option<T>,
    pub rank: usize,
    /// Largest eigenvalue of the kernel-restricted form, absent when the
    /// kernel is trivial.
    pub kernel_lambda_max: Option<T>,
    pub tolerances: Tolerances<T>,
    /// All four verdicts agree.
    pub consistent: bool,
}

impl<T: Scalar> FinslerCertificate<T> {
    pub fn feasible(&self) -> bool {
        self.verdict_f4
    }
}

fn check_dims<T: Scalar>(q: &SymMatrix<T>, b: &RectMatrix<T>) -> Result<()> {
    if b.cols() != q.dim() {
        return Err(Error::InvalidInput(format!(
            "Q is {n}x{n} but B is {}x{}",
            b.rows(),
            b.cols(),
            n = q.dim()
        )));
    }
    Ok(())
}

fn is_zero_b<T: Scalar>(b: &RectMatrix<T>, tols: &Tolerances<T>) -> bool {
    b.max_abs() <= tols.rank_tol
}

/// Kernel basis of `B`, treating `max|b_ij| <= rank_tol` as `B = 0`.
fn kernel<T: Scalar>(b: &RectMatrix<T>, tols: &Tolerances<T>) -> Result<RectMatrix<T>> {
    if is_zero_b(b, tols) {
        Ok(RectMatrix::identity(b.cols()))
    } else {
        kernel_basis(b, tols.rank_tol)
    }
}

/// `lambda_max(Q - mu B^T B)` with `N = B^T B` precomputed.
pub fn shifted_lambda_max<T: Scalar>(q: &SymMatrix<T>, n: &SymMatrix<T>, mu: T) -> Result<T> {
    q.combine(n, -mu)?.lambda_max()
}

/// Whether `Q - mu B^T B` passes the relative negative-definiteness test.
pub fn multiplier_verifies<T: Scalar>(
    q: &SymMatrix<T>,
    b: &RectMatrix<T>,
    mu: T,
    tols: &Tolerances<T>,
) -> Result<bool> {
    check_dims(q, b)?;
    q.combine(&b.gram(), -mu)?.is_neg_def(tols.def_tol)
}

/// (F4): negativity of `Q` on `Ker(B)`; true when the kernel is trivial.
pub fn check_f4<T: Scalar>(q: &SymMatrix<T>, b: &RectMatrix<T>, tols: &Tolerances<T>) -> Result<bool> {
    check_dims(q, b)?;
    let k = kernel(b, tols)?;
    if k.cols() == 0 {
        return Ok(true);
    }
    q.congruence(&k)?.is_neg_def(tols.def_tol)
}

/// Infimum of `{mu : Q - mu B^T B < 0}`.
///
/// Uses the closed form `lambda_max(N^{-1/2} Q N^{-1/2})` when `B` has full
/// column rank and bisection on `mu -> lambda_max(Q - mu N)` otherwise.
pub fn mu_inf<T: Scalar>(
    q: &SymMatrix<T>,
    b: &RectMatrix<T>,
    tols: &Tolerances<T>,
) -> Result<ExtendedReal<T>> {
    check_dims(q, b)?;
    if let Some(special) = degenerate_case(q, b, tols)? {
        return Ok(special);
    }
    if b.rank(tols.rank_tol)? == q.dim() {
        mu_inf_fast(q, b, tols).map(ExtendedReal::Finite)
    } else {
        bisect_mu(q, &b.gram(), tols).map(ExtendedReal::Finite)
    }
}

/// Handles `B = 0` and an empty multiplier set; `None` means the infimum is
/// finite.
fn degenerate_case<T: Scalar>(
    q: &SymMatrix<T>,
    b: &RectMatrix<T>,
    tols: &Tolerances<T>,
) -> Result<Option<ExtendedReal<T>>> {
    if is_zero_b(b, tols) {
        return Ok(Some(if q.is_neg_def(tols.def_tol)? {
            ExtendedReal::NegInf
        } else {
            ExtendedReal::PosInf
        }));
    }
    if !check_f4(q, b, tols)? {
        return Ok(Some(ExtendedReal::PosInf));
    }
    Ok(None)
}

/// Closed-form infimum for full-column-rank `B`.
pub fn mu_inf_fast<T: Scalar>(q: &SymMatrix<T>, b: &RectMatrix<T>, tols: &Tolerances<T>) -> Result<T> {
    check_dims(q, b)?;
    let rank = b.rank(tols.rank_tol)?;
    if rank < q.dim() {
        return Err(Error::RankDeficient { rank, cols: q.dim() });
    }
    let e = b.gram().eig()?;
    if e.values.first().is_some_and(|&l| l <= T::zero()) {
        return Err(Error::RankDeficient { rank, cols: q.dim() });
    }
    let inv_sqrt = e.reassemble(|l| T::one() / l.sqrt());
    q.congruence(&inv_sqrt.to_rect())?.lambda_max()
}

/// Bisection route to `mu_inf`, valid for any `B` whose multiplier set is a
/// nonempty proper half-line.
pub fn mu_inf_bisect<T: Scalar>(
    q: &SymMatrix<T>,
    b: &RectMatrix<T>,
    tols: &Tolerances<T>,
) -> Result<ExtendedReal<T>> {
    check_dims(q, b)?;
    if let Some(special) = degenerate_case(q, b, tols)? {
        return Ok(special);
    }
    bisect_mu(q, &b.gram(), tols).map(ExtendedReal::Finite)
}

fn bisect_mu<T: Scalar>(q: &SymMatrix<T>, n: &SymMatrix<T>, tols: &Tolerances<T>) -> Result<T> {
    let f = |mu: T| shifted_lambda_max(q, n, mu);
    let n_eig = n.eig()?;
    let n_max = n_eig.values.last().copied().unwrap_or(T::zero());
    let lambda_plus = n_eig
        .values
        .iter()
        .copied()
        .find(|&l| l > tols.rank_tol * n_max)
        .ok_or_else(|| Error::Numerical("B^T B has no positive eigenvalue".into()))?;
    let q_max = q.lambda_max()?;

    let mut hi = T::one() + (q_max + q_max.abs()) / lambda_plus;
    let mut steps = 0;
    while f(hi)? >= T::zero() {
        hi = hi + hi;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
            return Err(Error::Numerical("no feasible upper bracket for mu".into()));
        }
    }
    let mut lo = -(T::one() + q.max_abs()) / lambda_plus;
    if lo >= hi {
        lo = hi - (T::one() + hi.abs());
    }
    steps = 0;
    while f(lo)? < T::zero() {
        let width = hi - lo;
        hi = lo;
        lo = lo - width - width;
        steps += 1;
        if steps > MAX_BRACKET_STEPS || !lo.is_finite() {
            return Err(Error::Numerical("no infeasible lower bracket for mu".into()));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let scale = lo.abs().max(hi.abs());
        if hi - lo <= tols.bisect_tol * (T::one() + scale) {
            break;
        }
        let mid = lo + (hi - lo) * T::c(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo + (hi - lo) * T::c(0.5))
}

/// Default margin added to a finite `mu_inf` before verification.
pub fn default_margin<T: Scalar>(mu_inf: T) -> T {
    T::c(1e-6).max(T::c(1e-6) * mu_inf.abs())
}

/// A verified multiplier above `mu_inf`. The margin starts at
/// [`default_margin`] and doubles until the relative definiteness test
/// passes. Infinite infima are passed through.
pub fn witness_mu<T: Scalar>(
    q: &SymMatrix<T>,
    b: &RectMatrix<T>,
    tols: &Tolerances<T>,
) -> Result<ExtendedReal<T>> {
    let inf = mu_inf(q, b, tols)?;
    match inf {
        ExtendedReal::Finite(m) => verified_above(q, &b.gram(), m, default_margin(m), tols)
            .map(ExtendedReal::Finite),
        other => Ok(other),
    }
}

pub(crate) fn verified_above<T: Scalar>(
    q: &SymMatrix<T>,
    n: &SymMatrix<T>,
    base: T,
    margin: T,
    tols: &Tolerances<T>,
) -> Result<T> {
    let mut margin = margin;
    for _ in 0..MAX_MARGIN_DOUBLINGS {
        let mu = base + margin;
        if q.combine(n, -mu)?.is_neg_def(tols.def_tol)? {
            return Ok(mu);
        }
        margin = margin + margin;
    }
    Err(Error::Numerical(format!(
        "no multiplier above {base:e} passes the definiteness test"
    )))
}

/// Closed-form multiplier `1 + (lambda_max(Q) + |lambda_max(Q)|) / lambda_min(B^T B)`
/// for full-column-rank `B`.
pub fn construct_mu<T: Scalar>(q: &SymMatrix<T>, b: &RectMatrix<T>, tols: &Tolerances<T>) -> Result<T> {
    check_dims(q, b)?;
    let rank = b.rank(tols.rank_tol)?;
    let n_min = b.gram().lambda_min()?;
    if rank < q.dim() || n_min <= T::zero() {
        return Err(Error::RankDeficient { rank, cols: q.dim() });
    }
    let q_max = q.lambda_max()?;
    let q_max = if q_max.is_finite() { q_max } else { T::zero() };
    Ok(T::one() + (q_max + q_max.abs()) / n_min)
}

/// `X = -mu/2 B^T`, the slack matrix induced by a scalar multiplier.
pub fn x_from_mu<T: Scalar>(b: &RectMatrix<T>, mu: T) -> RectMatrix<T> {
    b.transpose().scale(-mu * T::c(0.5))
}

/// `Q + X B + B^T X^T`.
pub fn slack_form<T: Scalar>(q: &SymMatrix<T>, x: &RectMatrix<T>, b: &RectMatrix<T>) -> Result<SymMatrix<T>> {
    let xb = x.matmul(b)?;
    let sym = xb.add(&xb.transpose())?.symmetric_part()?;
    q.add(&sym)
}

/// Slack matrix for a caller-supplied multiplier, verified.
pub fn x_for_mu<T: Scalar>(
    q: &SymMatrix<T>,
    b: &RectMatrix<T>,
    mu: T,
    tols: &Tolerances<T>,
) -> Result<RectMatrix<T>> {
    check_dims(q, b)?;
    let x = x_from_mu(b, mu);
    if slack_form(q, &x, b)?.is_neg_def(tols.def_tol)? {
        Ok(x)
    } else {
        Err(Error::Infeasible(format!("mu = {mu:e} is not a feasible multiplier")))
    }
}

/// A verified slack matrix `X` with `Q + X B + B^T X^T < 0`.
///
/// Full-column-rank `B` uses the closed form; otherwise `mu_inf` plus a
/// margin. Fails with [`Error::Infeasible`] when (F4) does not hold.
pub fn construct_x<T: Scalar>(
    q: &SymMatrix<T>,
    b: &RectMatrix<T>,
    tols: &Tolerances<T>,
) -> Result<RectMatrix<T>> {
    check_dims(q, b)?;
    if let Ok(mu) = construct_mu(q, b, tols) {
        if let Ok(x) = x_for_mu(q, b, mu, tols) {
            return Ok(x);
        }
    }
    match witness_mu(q, b, tols)? {
        ExtendedReal::PosInf => Err(Error::Infeasible(
            "Q is not negative definite on Ker(B)".into(),
        )),
        ExtendedReal::NegInf => x_for_mu(q, b, T::zero(), tols),
        ExtendedReal::Finite(mu) => x_for_mu(q, b, mu, tols),
    }
}

/// Evaluates all four statements and assembles their witnesses.
pub fn certify<T: Scalar>(
    q: &SymMatrix<T>,
    b: &RectMatrix<T>,
    tols: &Tolerances<T>,
) -> Result<FinslerCertificate<T>> {
    tols.validate()?;
    check_dims(q, b)?;
    let k = kernel(b, tols)?;
    let rank = q.dim() - k.cols();
    let kernel_lambda_max = if k.cols() == 0 {
        None
    } else {
        Some(q.congruence(&k)?.lambda_max()?)
    };
    let verdict_f4 = check_f4(q, b, tols)?;
    let inf = mu_inf(q, b, tols)?;
    let mu_witness = match inf {
        ExtendedReal::Finite(m) => {
            ExtendedReal::Finite(verified_above(q, &b.gram(), m, default_margin(m), tols)?)
        }
        other => other,
    };
    let verdict_f2 = match mu_witness {
        ExtendedReal::Finite(mu) => multiplier_verifies(q, b, mu, tols)?,
        ExtendedReal::NegInf => q.is_neg_def(tols.def_tol)?,
        ExtendedReal::PosInf => false,
    };
    let x_witness = match construct_x(q, b, tols) {
        Ok(x) => Some(x),
        Err(Error::Infeasible(_)) => None,
        Err(e) => return Err(e),
    };
    let verdict_f3 = x_witness.is_some();
    let closed_form_mu = construct_mu(q, b, tols).ok();
    let verdict_f1 = verdict_f4;
    Ok(FinslerCertificate {
        verdict_f1,
        verdict_f2,
        verdict_f3,
        verdict_f4,
        mu_inf: inf,
        mu_witness,
        x_witness,
        closed_form_mu,
        rank,
        kernel_lambda_max,
        tolerances: *tols,
        consistent: verdict_f1 == verdict_f2 && verdict_f2 == verdict_f3 && verdict_f3 == verdict_f4,
    })
}
