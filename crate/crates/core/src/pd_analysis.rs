//! Finsler analysis over parameter grids.
//!
//! A [`MuProfile`] tabulates `mu_inf(s)` on a grid. From it we derive a
//! constant multiplier (finite supremum), a continuous multiplier
//! `max(mu_inf + eps, 0)`, a polynomial slack matrix `X = -mu/2 B^T`, and the
//! bound-function tests. Every verdict here is a grid verdict: a finite
//! supremum over finitely many points says nothing about the continuum, so
//! trend diagnostics across refinements are reported next to it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::finsler_point::{mu_inf, ExtendedReal, Tolerances};
use crate::pd_models::{to_f64, MatrixFn, ParamDomain};
use crate::scalar::Scalar;
use crate::symlin::{RectMatrix, SymMatrix};

/// `mu_inf` sampled on a grid.
#[derive(Clone, Debug)]
pub struct MuProfile<T> {
    pub points: Vec<Vec<T>>,
    pub mu_inf_values: Vec<ExtendedReal<T>>,
    pub sup_mu_inf: ExtendedReal<T>,
    pub any_infeasible: bool,
    /// First grid point attaining a finite supremum.
    pub argmax_point: Option<Vec<T>>,
}

impl<T: Scalar> MuProfile<T> {
    pub fn from_values(points: Vec<Vec<T>>, values: Vec<ExtendedReal<T>>) -> Self {
        let (sup, argmax) = sup_with_argmax(&points, &values);
        Self {
            any_infeasible: values.iter().any(|v| *v == ExtendedReal::PosInf),
            points,
            mu_inf_values: values,
            sup_mu_inf: sup,
            argmax_point: argmax,
        }
    }
}

fn sup_with_argmax<T: Scalar>(
    points: &[Vec<T>],
    values: &[ExtendedReal<T>],
) -> (ExtendedReal<T>, Option<Vec<T>>) {
    let mut sup = ExtendedReal::NegInf;
    let mut arg = None;
    for (p, v) in points.iter().zip(values) {
        if *v > sup {
            sup = *v;
            arg = Some(p.clone());
        }
    }
    match sup {
        ExtendedReal::Finite(_) => (sup, arg),
        other => (other, None),
    }
}

/// `(Q(s), B(s)^T B(s))` at one point.
fn eval_pair<T: Scalar>(qf: &MatrixFn<T>, bf: &MatrixFn<T>, s: &[T]) -> Result<(SymMatrix<T>, RectMatrix<T>)> {
    let q = qf.eval_sym(s)?;
    let b = bf.eval(s)?;
    if b.cols() != q.dim() {
        return Err(Error::InvalidInput(format!(
            "Q(s) is {n}x{n} but B(s) is {}x{}",
            b.rows(),
            b.cols(),
            n = q.dim()
        )));
    }
    Ok((q, b))
}

fn at<T: Scalar, R>(s: &[T], r: Result<R>) -> Result<R> {
    r.map_err(|e| e.at_point(to_f64(s)))
}

/// Tabulates `mu_inf` over the grid. Points are evaluated in parallel and
/// assembled in grid order.
pub fn profile<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    dom: &ParamDomain<T>,
    tols: &Tolerances<T>,
) -> Result<MuProfile<T>> {
    tols.validate()?;
    let points = dom.points();
    let values = points
        .par_iter()
        .map(|s| {
            at(s, eval_pair(qf, bf, s).and_then(|(q, b)| mu_inf(&q, &b, tols)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MuProfile::from_values(points, values))
}

/// Whether one constant multiplier passes the definiteness test at every
/// listed point.
pub fn verify_constant<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    points: &[Vec<T>],
    mu: T,
    tols: &Tolerances<T>,
) -> Result<bool> {
    let flags = points
        .par_iter()
        .map(|s| {
            at(
                s,
                eval_pair(qf, bf, s)
                    .and_then(|(q, b)| q.combine(&b.gram(), -mu)?.is_neg_def(tols.def_tol)),
            )
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(flags.into_iter().all(|f| f))
}

/// Definiteness of `Q(s_k) - mu_k B(s_k)^T B(s_k)` per point.
pub fn verify_pointwise<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    points: &[Vec<T>],
    mus: &[T],
    tols: &Tolerances<T>,
) -> Result<Vec<bool>> {
    if points.len() != mus.len() {
        return Err(Error::InvalidInput("one multiplier per point required".into()));
    }
    points
        .par_iter()
        .zip(mus.par_iter())
        .map(|(s, &mu)| {
            at(
                s,
                eval_pair(qf, bf, s)
                    .and_then(|(q, b)| q.combine(&b.gram(), -mu)?.is_neg_def(tols.def_tol)),
            )
        })
        .collect()
}

/// Constant multiplier `sup mu_inf + margin`, re-verified at every grid point.
///
/// Returns `+inf` when some point is infeasible and `margin` when every point
/// is unconstrained; never `-inf`.
pub fn synth_constant<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    prof: &MuProfile<T>,
    margin: T,
    tols: &Tolerances<T>,
) -> Result<ExtendedReal<T>> {
    if !(margin > T::zero()) {
        return Err(Error::InvalidInput("margin must be positive".into()));
    }
    let mu = match prof.sup_mu_inf {
        ExtendedReal::PosInf => return Ok(ExtendedReal::PosInf),
        ExtendedReal::NegInf => margin,
        ExtendedReal::Finite(sup) => sup + margin,
    };
    if verify_constant(qf, bf, &prof.points, mu, tols)? {
        Ok(ExtendedReal::Finite(mu))
    } else {
        Err(Error::Consistency(format!(
            "constant multiplier {mu:e} fails verification on the grid; margin too small for def_tol"
        )))
    }
}

/// Suprema of `mu_inf` across a sequence of grids.
#[derive(Clone, Debug)]
pub struct SupTrend<T> {
    pub grid_sizes: Vec<usize>,
    pub sups: Vec<ExtendedReal<T>>,
    /// `sup_last / sup_prev` for the two finest grids when both are finite and
    /// the coarser one is positive.
    pub growth_ratio: Option<T>,
    /// The supremum more than doubled, or became infinite, on the finest step.
    pub suspected_unbounded: bool,
}

/// Ratio above which one refinement step flags a supremum as suspected
/// unbounded.
pub const GROWTH_FACTOR: f64 = 2.0;

fn trend_from<T: Scalar>(grid_sizes: Vec<usize>, sups: Vec<ExtendedReal<T>>) -> SupTrend<T> {
    let (mut ratio, mut flag) = (None, false);
    if sups.len() >= 2 {
        let (prev, last) = (sups[sups.len() - 2], sups[sups.len() - 1]);
        match (prev, last) {
            (ExtendedReal::Finite(p), ExtendedReal::Finite(l)) if p > T::zero() => {
                let r = l / p;
                ratio = Some(r);
                flag = r > T::c(GROWTH_FACTOR);
            }
            (ExtendedReal::Finite(_) | ExtendedReal::NegInf, ExtendedReal::PosInf) => flag = true,
            _ => {}
        }
    }
    SupTrend {
        grid_sizes,
        sups,
        growth_ratio: ratio,
        suspected_unbounded: flag,
    }
}

/// Trend of `sup mu_inf` over explicitly supplied grids, coarsest first.
pub fn sup_trend_over<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    grids: &[ParamDomain<T>],
    tols: &Tolerances<T>,
) -> Result<SupTrend<T>> {
    let mut sizes = Vec::with_capacity(grids.len());
    let mut sups = Vec::with_capacity(grids.len());
    for g in grids {
        sizes.push(g.len());
        sups.push(profile(qf, bf, g, tols)?.sup_mu_inf);
    }
    Ok(trend_from(sizes, sups))
}

/// Trend of `sup mu_inf` over `dom` refined `0..=levels` times.
pub fn sup_trend<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    dom: &ParamDomain<T>,
    levels: u32,
    tols: &Tolerances<T>,
) -> Result<SupTrend<T>> {
    let grids: Vec<_> = (0..=levels).map(|l| dom.refine(l)).collect();
    sup_trend_over(qf, bf, &grids, tols)
}

/// Continuous multiplier `max(mu_inf(s) + eps, 0)` on a grid.
#[derive(Clone, Debug)]
pub struct ContinuousMu<T> {
    pub domain: ParamDomain<T>,
    pub points: Vec<Vec<T>>,
    pub mu_inf_values: Vec<ExtendedReal<T>>,
    pub values: Vec<T>,
    /// Only grid values carry a verification status.
    pub verified: Vec<bool>,
    pub eps: T,
}

impl<T: Scalar> ContinuousMu<T> {
    pub fn all_verified(&self) -> bool {
        self.verified.iter().all(|&v| v)
    }

    /// Piecewise-multilinear interpolation between grid values. Advisory
    /// off the grid. Only box grids can be interpolated; other domains answer
    /// at their own points only.
    pub fn interpolate(&self, s: &[T]) -> Result<T> {
        match &self.domain {
            ParamDomain::BoxGrid { axes } => {
                if s.len() != axes.len() {
                    return Err(Error::InvalidInput("point dimension mismatch".into()));
                }
                let mut cells = Vec::with_capacity(axes.len());
                for (a, &x) in axes.iter().zip(s) {
                    if x < a.lo || x > a.hi {
                        return Err(Error::UncoveredPoint { point: to_f64(s) });
                    }
                    if a.count == 1 {
                        cells.push((0, T::zero()));
                        continue;
                    }
                    let h = (a.hi - a.lo) / T::from_count(a.count - 1);
                    let pos = (x - a.lo) / h;
                    let i = pos.floor().to_usize().unwrap_or(0).min(a.count - 2);
                    cells.push((i, pos - T::from_count(i)));
                }
                let mut strides = vec![1usize; axes.len()];
                for k in (0..axes.len().saturating_sub(1)).rev() {
                    strides[k] = strides[k + 1] * axes[k + 1].count;
                }
                let mut acc = T::zero();
                for corner in 0..(1usize << axes.len()) {
                    let mut w = T::one();
                    let mut idx = 0;
                    for (k, &(i, t)) in cells.iter().enumerate() {
                        let up = (corner >> k) & 1 == 1;
                        w = w * if up { t } else { T::one() - t };
                        idx += (i + usize::from(up)) * strides[k];
                    }
                    if w != T::zero() {
                        acc = acc + w * self.values[idx];
                    }
                }
                Ok(acc)
            }
            _ => self
                .points
                .iter()
                .position(|p| p.as_slice() == s)
                .map(|i| self.values[i])
                .ok_or_else(|| Error::UncoveredPoint { point: to_f64(s) }),
        }
    }

    /// The grid values as a tabulated scalar function.
    pub fn to_matrix_fn(&self) -> Result<MatrixFn<T>> {
        MatrixFn::tabulated(
            1,
            1,
            true,
            self.points
                .iter()
                .zip(&self.values)
                .map(|(p, &v)| (p.clone(), RectMatrix::from_fn(1, 1, |_, _| v)))
                .collect(),
        )
    }
}

/// Continuous multiplier `max(mu_inf(s) + eps, 0)`, verified at every grid
/// point. Fails on the first infeasible point.
pub fn synth_continuous<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    dom: &ParamDomain<T>,
    eps: T,
    tols: &Tolerances<T>,
) -> Result<ContinuousMu<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let prof = profile(qf, bf, dom, tols)?;
    if let Some(i) = prof.mu_inf_values.iter().position(|v| *v == ExtendedReal::PosInf) {
        return Err(Error::Infeasible(
            "empty multiplier set on the grid".to_string(),
        )
        .at_point(to_f64(&prof.points[i])));
    }
    let values: Vec<T> = prof
        .mu_inf_values
        .iter()
        .map(|v| match *v {
            ExtendedReal::Finite(m) => (m + eps).max(T::zero()),
            _ => T::zero(),
        })
        .collect();
    let verified = verify_pointwise(qf, bf, &prof.points, &values, tols)?;
    Ok(ContinuousMu {
        domain: dom.clone(),
        points: prof.points,
        mu_inf_values: prof.mu_inf_values,
        values,
        verified,
        eps,
    })
}

/// Polynomial slack matrix `X(s) = -mu/2 B(s)^T` for polynomial `B`, with
/// the constant `mu` from [`synth_constant`]. Its degree equals that of `B`.
pub fn synth_polynomial_x<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    dom: &ParamDomain<T>,
    margin: T,
    tols: &Tolerances<T>,
) -> Result<(T, MatrixFn<T>)> {
    let poly = bf
        .as_poly()
        .ok_or_else(|| Error::NotApplicable("B must be a polynomial matrix".into()))?;
    let prof = profile(qf, bf, dom, tols)?;
    let mu = match synth_constant(qf, bf, &prof, margin, tols)? {
        ExtendedReal::Finite(mu) => mu,
        _ => return Err(Error::Infeasible("no constant multiplier on the grid".into())),
    };
    let (m, n) = bf.shape();
    let half = -mu * T::c(0.5);
    let x = MatrixFn::poly(
        n,
        m,
        false,
        poly.nvars,
        poly.terms
            .iter()
            .map(|(e, c)| (e.clone(), c.transpose().scale(half)))
            .collect(),
    )?;
    for s in &prof.points {
        let ok = at(s, (|| {
            let (q, b) = eval_pair(qf, bf, s)?;
            crate::finsler_point::slack_form(&q, &x.eval(s)?, &b)?.is_neg_def(tols.def_tol)
        })())?;
        if !ok {
            return Err(Error::Consistency(format!(
                "polynomial slack fails at {:?}",
                to_f64(s)
            )));
        }
    }
    Ok((mu, x))
}

/// Scalar bounding functions `l_Q I <= Q(s) <= u_Q I`, `l_R I <= B^T B <= u_R I`.
#[derive(Clone, Debug)]
pub struct BoundFns<T: Scalar> {
    pub ell_q: MatrixFn<T>,
    pub u_q: MatrixFn<T>,
    pub ell_r: MatrixFn<T>,
    pub u_r: MatrixFn<T>,
}

impl<T: Scalar> BoundFns<T> {
    /// Exact bounds from eigenvalues of `Q(s)` and `B(s)^T B(s)`.
    pub fn exact(qf: &MatrixFn<T>, bf: &MatrixFn<T>) -> Self {
        let extreme = |f: MatrixFn<T>, gram: bool, top: bool| {
            MatrixFn::scalar(move |s: &[T]| {
                let m = if gram {
                    f.eval(s).map(|b| b.gram())
                } else {
                    f.eval_sym(s)
                };
                m.and_then(|m| if top { m.lambda_max() } else { m.lambda_min() })
                    .unwrap_or(T::nan())
            })
        };
        Self {
            ell_q: extreme(qf.clone(), false, false),
            u_q: extreme(qf.clone(), false, true),
            ell_r: extreme(bf.clone(), true, false),
            u_r: extreme(bf.clone(), true, true),
        }
    }

    /// Checks the sandwich inequalities at every grid point, with slack
    /// `def_tol * (1 + |bound|)`.
    pub fn validate(
        &self,
        qf: &MatrixFn<T>,
        bf: &MatrixFn<T>,
        dom: &ParamDomain<T>,
        tols: &Tolerances<T>,
    ) -> Result<()> {
        for s in dom.points() {
            at(&s, (|| {
                let (q, b) = eval_pair(qf, bf, &s)?;
                let qe = q.eig()?;
                let ne = b.gram().eig()?;
                let (qmin, qmax) = (qe.values[0], *qe.values.last().unwrap());
                let (nmin, nmax) = (ne.values[0], *ne.values.last().unwrap());
                let slack = |v: T| tols.def_tol * (T::one() + v.abs());
                let lq = self.ell_q.eval_scalar(&s)?;
                let uq = self.u_q.eval_scalar(&s)?;
                let lr = self.ell_r.eval_scalar(&s)?;
                let ur = self.u_r.eval_scalar(&s)?;
                if lq > qmin + slack(lq)
                    || uq < qmax - slack(uq)
                    || lr > nmin + slack(lr)
                    || ur < nmax - slack(ur)
                {
                    return Err(Error::InvalidInput("bound functions do not sandwich Q and B^T B".into()));
                }
                Ok(())
            })())?;
        }
        Ok(())
    }
}

/// How a grid supremum is judged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPolicy<T> {
    /// Suprema above this value are reported as unbounded.
    pub sup_threshold: Option<T>,
    /// Extra refinement levels used to estimate growth; zero disables it.
    pub refine_levels: u32,
}

impl<T: Scalar> Default for GridPolicy<T> {
    fn default() -> Self {
        Self {
            sup_threshold: None,
            refine_levels: 0,
        }
    }
}

/// Outcome of a bound-function test on a grid.
#[derive(Clone, Debug)]
pub struct BoundVerdict<T> {
    pub points: Vec<Vec<T>>,
    /// Per-point infimum of the scalar condition.
    pub infima: Vec<ExtendedReal<T>>,
    pub sup: ExtendedReal<T>,
    pub argmax: Option<Vec<T>>,
    pub trend: Option<SupTrend<T>>,
    pub passed: bool,
}

/// `inf{mu >= 0 : a - mu * b < 0}`: zero when `a < 0`, `a / b` when `b > 0`,
/// `+inf` otherwise. The open boundary is reported as the infimum itself.
pub fn scalar_infimum<T: Scalar>(a: T, b: T) -> ExtendedReal<T> {
    if a < T::zero() {
        ExtendedReal::Finite(T::zero())
    } else if b > T::zero() {
        ExtendedReal::Finite(a / b)
    } else {
        ExtendedReal::PosInf
    }
}

fn scalar_sup_test<T: Scalar>(
    a: &MatrixFn<T>,
    b: &MatrixFn<T>,
    dom: &ParamDomain<T>,
    policy: &GridPolicy<T>,
) -> Result<BoundVerdict<T>> {
    let eval_grid = |g: &ParamDomain<T>| -> Result<(Vec<Vec<T>>, Vec<ExtendedReal<T>>)> {
        let pts = g.points();
        let vals = pts
            .iter()
            .map(|s| at(s, Ok(scalar_infimum(a.eval_scalar(s)?, b.eval_scalar(s)?))))
            .collect::<Result<Vec<_>>>()?;
        Ok((pts, vals))
    };
    let (points, infima) = eval_grid(dom)?;
    let (sup, argmax) = sup_with_argmax(&points, &infima);
    let trend = if policy.refine_levels > 0 {
        let mut sizes = vec![points.len()];
        let mut sups = vec![sup];
        for l in 1..=policy.refine_levels {
            let g = dom.refine(l);
            let (p, v) = eval_grid(&g)?;
            sizes.push(p.len());
            sups.push(sup_with_argmax(&p, &v).0);
        }
        Some(trend_from(sizes, sups))
    } else {
        None
    };
    let below_threshold = match (sup, policy.sup_threshold) {
        (ExtendedReal::Finite(v), Some(t)) => v <= t,
        (ExtendedReal::PosInf, _) => false,
        _ => true,
    };
    let passed = below_threshold && !trend.as_ref().is_some_and(|t| t.suspected_unbounded);
    Ok(BoundVerdict {
        points,
        infima,
        sup,
        argmax,
        trend,
        passed,
    })
}

/// Necessary condition for a finite `sup mu_inf`:
/// `sup_s inf{mu >= 0 : l_Q(s) - mu u_R(s) < 0} < inf`.
pub fn bound_test_necessary<T: Scalar>(
    bounds: &BoundFns<T>,
    dom: &ParamDomain<T>,
    policy: &GridPolicy<T>,
) -> Result<BoundVerdict<T>> {
    scalar_sup_test(&bounds.ell_q, &bounds.u_r, dom, policy)
}

/// Sufficient condition for a finite `sup mu_inf`:
/// `sup_s inf{mu >= 0 : u_Q(s) - mu l_R(s) < 0} < inf`.
pub fn bound_test_sufficient<T: Scalar>(
    bounds: &BoundFns<T>,
    dom: &ParamDomain<T>,
    policy: &GridPolicy<T>,
) -> Result<BoundVerdict<T>> {
    scalar_sup_test(&bounds.u_q, &bounds.ell_r, dom, policy)
}

/// Outcome of the exact test for scalar `Q` and `B`.
#[derive(Clone, Debug)]
pub struct ScalarTestVerdict<T> {
    /// Grid points where `B(s) = 0` (within `rank_tol`).
    pub zero_set: Vec<Vec<T>>,
    pub zero_set_ok: bool,
    /// `sup Q / B^2` over the remaining points, `-inf` when there are none.
    pub sup_ratio: ExtendedReal<T>,
    pub passed: bool,
}

/// Scalar case: `Q < 0` where `B = 0` and `sup Q / B^2 < inf` elsewhere.
pub fn bound_test_scalar<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    dom: &ParamDomain<T>,
    tols: &Tolerances<T>,
    policy: &GridPolicy<T>,
) -> Result<ScalarTestVerdict<T>> {
    let mut zero_set = Vec::new();
    let mut zero_ok = true;
    let mut sup = ExtendedReal::NegInf;
    for s in dom.points() {
        let q = at(&s, qf.eval_scalar(&s))?;
        let b = at(&s, bf.eval_scalar(&s))?;
        if b.abs() <= tols.rank_tol {
            zero_ok &= q <= -tols.def_tol * (T::one() + q.abs());
            zero_set.push(s);
        } else {
            sup = sup.max(ExtendedReal::Finite(q / (b * b)));
        }
    }
    let bounded = match (sup, policy.sup_threshold) {
        (ExtendedReal::Finite(v), Some(t)) => v <= t,
        (ExtendedReal::PosInf, _) => false,
        _ => true,
    };
    Ok(ScalarTestVerdict {
        zero_set,
        zero_set_ok: zero_ok,
        sup_ratio: sup,
        passed: zero_ok && bounded,
    })
}

/// Constant multiplier from bounds: `sup_s (u_Q + |u_Q|) / l_R + 1`.
///
/// Requires `l_R > 0` at every grid point. When `check` supplies `(Q, B)` the
/// result is verified pointwise.
pub fn synth_from_bounds<T: Scalar>(
    bounds: &BoundFns<T>,
    dom: &ParamDomain<T>,
    check: Option<(&MatrixFn<T>, &MatrixFn<T>)>,
    tols: &Tolerances<T>,
) -> Result<T> {
    let points = dom.points();
    let mut sup = T::neg_infinity();
    for s in &points {
        let lr = at(s, bounds.ell_r.eval_scalar(s))?;
        if !(lr > T::zero()) {
            return Err(Error::NotApplicable(format!(
                "lower bound of B^T B is {lr:e} <= 0 at {:?}",
                to_f64(s)
            )));
        }
        let uq = at(s, bounds.u_q.eval_scalar(s))?;
        sup = sup.max((uq + uq.abs()) / lr);
    }
    let mu = sup + T::one();
    if let Some((qf, bf)) = check {
        if !verify_constant(qf, bf, &points, mu, tols)? {
            return Err(Error::Consistency(format!(
                "bound-based multiplier {mu:e} fails verification"
            )));
        }
    }
    Ok(mu)
}

/// Bound-based multiplier with `u_Q = lambda_max(Q)`, `l_R = lambda_min(B^T B)`;
/// requires full column rank of `B(s)` at every grid point.
pub fn synth_full_rank<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    dom: &ParamDomain<T>,
    tols: &Tolerances<T>,
) -> Result<T> {
    for s in dom.points() {
        let b = at(&s, bf.eval(&s))?;
        let rank = at(&s, b.rank(tols.rank_tol))?;
        if rank < b.cols() {
            return Err(Error::NotApplicable(format!(
                "B is rank deficient ({rank} < {}) at {:?}",
                b.cols(),
                to_f64(&s)
            )));
        }
    }
    synth_from_bounds(&BoundFns::exact(qf, bf), dom, Some((qf, bf)), tols)
}

/// Per-point classification of a claimed multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditStatus {
    /// Passes the relative negative-definiteness test.
    Strict,
    /// `|lambda_max|` within the definiteness tolerance of zero.
    Boundary,
    Violation,
}

impl AuditStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            AuditStatus::Strict => "strict",
            AuditStatus::Boundary => "boundary",
            AuditStatus::Violation => "violation",
        }
    }
}

/// Classifies `Q - mu B^T B` at one point.
pub fn classify<T: Scalar>(m: &SymMatrix<T>, tols: &Tolerances<T>) -> Result<(T, AuditStatus)> {
    let lmax = m.lambda_max()?;
    let band = tols.def_tol * (T::one() + m.max_abs());
    let status = if lmax <= -band {
        AuditStatus::Strict
    } else if lmax.abs() < band {
        AuditStatus::Boundary
    } else {
        AuditStatus::Violation
    };
    Ok((lmax, status))
}

/// Audit of a claimed multiplier function against the grid.
#[derive(Clone, Debug)]
pub struct MultiplierAudit<T> {
    pub points: Vec<Vec<T>>,
    pub claimed: Vec<T>,
    pub claimed_lambda_max: Vec<T>,
    pub status: Vec<AuditStatus>,
    pub mu_inf: Vec<ExtendedReal<T>>,
}

impl<T: Scalar> MultiplierAudit<T> {
    pub fn count(&self, s: AuditStatus) -> usize {
        self.status.iter().filter(|&&x| x == s).count()
    }
}

/// Evaluates a claimed multiplier `rho(s)` on the grid and records, per
/// point, `lambda_max(Q - rho B^T B)`, its classification and the true
/// `mu_inf`.
pub fn audit_multiplier<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    claimed: &MatrixFn<T>,
    dom: &ParamDomain<T>,
    tols: &Tolerances<T>,
) -> Result<MultiplierAudit<T>> {
    let points = dom.points();
    let rows = points
        .par_iter()
        .map(|s| {
            at(s, (|| {
                let (q, b) = eval_pair(qf, bf, s)?;
                let rho = claimed.eval_scalar(s)?;
                let (lmax, status) = classify(&q.combine(&b.gram(), -rho)?, tols)?;
                Ok((rho, lmax, status, mu_inf(&q, &b, tols)?))
            })())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut audit = MultiplierAudit {
        points,
        claimed: Vec::with_capacity(rows.len()),
        claimed_lambda_max: Vec::with_capacity(rows.len()),
        status: Vec::with_capacity(rows.len()),
        mu_inf: Vec::with_capacity(rows.len()),
    };
    for (rho, l, st, m) in rows {
        audit.claimed.push(rho);
        audit.claimed_lambda_max.push(l);
        audit.status.push(st);
        audit.mu_inf.push(m);
    }
    Ok(audit)
}

/// The exponential-stabilizability family with its claimed multiplier
/// `rho(x) = e^{-x1}` and the closed-form infimum `(1 + 3 x2^2)^2 e^{-x1}`
/// obtained from the 2x2 determinant condition.
pub mod example2 {
    use super::*;
    use crate::pd_models::{Axis, Builtin};

    pub fn q<T: Scalar>() -> MatrixFn<T> {
        MatrixFn::builtin(Builtin::Example2Q)
    }

    pub fn b<T: Scalar>() -> MatrixFn<T> {
        MatrixFn::builtin(Builtin::Example2B)
    }

    pub fn claimed_rho<T: Scalar>() -> MatrixFn<T> {
        MatrixFn::scalar(|x: &[T]| (-x[0]).exp())
    }

    pub fn rho_inf_closed_form<T: Scalar>(x: &[T]) -> T {
        let a = T::one() + T::c(3.0) * x[1] * x[1];
        a * a * (-x[0]).exp()
    }

    /// `[-1, 1]^2` with `count` points per axis.
    pub fn square_grid<T: Scalar>(count: usize) -> Result<ParamDomain<T>> {
        let axis = Axis {
            lo: -T::one(),
            hi: T::one(),
            count,
        };
        ParamDomain::box_grid(vec![axis, axis])
    }

    /// Claimed multiplier audit plus the corrected infimum profile.
    #[derive(Clone, Debug)]
    pub struct Example2Audit<T> {
        pub audit: MultiplierAudit<T>,
        pub rho_inf_closed_form: Vec<T>,
        /// `max |mu_inf - closed form|` over the grid.
        pub max_abs_deviation: T,
        pub margin: T,
        /// `closed form + margin` passes the definiteness test, per point.
        pub corrected_verified: Vec<bool>,
    }

    pub fn audit<T: Scalar>(
        dom: &ParamDomain<T>,
        margin: T,
        tols: &Tolerances<T>,
    ) -> Result<Example2Audit<T>> {
        let (qf, bf) = (q::<T>(), b::<T>());
        let audit = audit_multiplier(&qf, &bf, &claimed_rho(), dom, tols)?;
        let closed: Vec<T> = audit.points.iter().map(|x| rho_inf_closed_form(x)).collect();
        let mut dev = T::zero();
        for (m, c) in audit.mu_inf.iter().zip(&closed) {
            let d = match m {
                ExtendedReal::Finite(v) => (*v - *c).abs(),
                _ => T::infinity(),
            };
            dev = dev.max(d);
        }
        let corrected_verified = audit
            .points
            .iter()
            .zip(&closed)
            .map(|(x, &c)| {
                let (q, b) = eval_pair(&qf, &bf, x)?;
                q.combine(&b.gram(), -(c + margin))?.is_neg_def(tols.def_tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Example2Audit {
            audit,
            rho_inf_closed_form: closed,
            max_abs_deviation: dev,
            margin,
            corrected_verified,
        })
    }
}

/// Grid-scale verdicts for the functional classes of multipliers.
#[derive(Clone, Debug)]
pub struct GridReport<T> {
    pub profile: MuProfile<T>,
    /// A pointwise multiplier exists at every grid point.
    pub f2a: bool,
    /// The continuous construction verifies at every grid point.
    pub f2b: bool,
    /// Implied by `f2d`; rational multipliers are recognized, not synthesized.
    pub f2c: bool,
    /// A polynomial multiplier (here the constant one) verifies.
    pub f2d: bool,
    /// A constant multiplier verifies.
    pub f2e: bool,
    pub constant_mu: ExtendedReal<T>,
    pub continuous: Option<ContinuousMu<T>>,
    pub trend: Option<SupTrend<T>>,
}

pub fn grid_report<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    dom: &ParamDomain<T>,
    margin: T,
    eps: T,
    refine_levels: u32,
    tols: &Tolerances<T>,
) -> Result<GridReport<T>> {
    let prof = profile(qf, bf, dom, tols)?;
    let f2a = !prof.any_infeasible;
    let continuous = if f2a {
        Some(synth_continuous(qf, bf, dom, eps, tols)?)
    } else {
        None
    };
    let f2b = continuous.as_ref().is_some_and(ContinuousMu::all_verified);
    let constant_mu = synth_constant(qf, bf, &prof, margin, tols)?;
    let f2e = constant_mu.is_finite();
    let trend = if refine_levels > 0 {
        Some(sup_trend(qf, bf, dom, refine_levels, tols)?)
    } else {
        None
    };
    Ok(GridReport {
        profile: prof,
        f2a,
        f2b,
        f2c: f2e,
        f2d: f2e,
        f2e,
        constant_mu,
        continuous,
        trend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pd_models::{Builtin, QChoice};

    fn ex1(q: QChoice<f64>) -> (MatrixFn<f64>, MatrixFn<f64>) {
        (MatrixFn::builtin(Builtin::Example1Q(q)), MatrixFn::builtin(Builtin::Example1B))
    }

    fn t() -> Tolerances<f64> {
        Tolerances::default()
    }

    #[test]
    fn example1_linear_profile() {
        let (q, b) = ex1(QChoice::Linear);
        let dom = ParamDomain::interval(0.5, 2.0, 4).unwrap();
        let p = profile(&q, &b, &dom, &t()).unwrap();
        for (s, v) in p.points.iter().zip(&p.mu_inf_values) {
            let want = 1.0 / s[0];
            assert!((v.finite().unwrap() - want).abs() <= 1e-8 * want);
        }
        assert!((p.sup_mu_inf.finite().unwrap() - 2.0).abs() < 1e-8);
        assert_eq!(p.argmax_point, Some(vec![0.5]));
    }

    #[test]
    fn example1_exp_profile() {
        let (q, b) = ex1(QChoice::Exp);
        let dom = ParamDomain::interval(1.0, 3.0, 3).unwrap();
        let p = profile(&q, &b, &dom, &t()).unwrap();
        let e = std::f64::consts::E;
        let want = [e, e * e / 4.0, e * e * e / 9.0];
        for (v, w) in p.mu_inf_values.iter().zip(want) {
            assert!((v.finite().unwrap() - w).abs() <= 1e-8 * w);
        }
        assert!((p.sup_mu_inf.finite().unwrap() - e).abs() <= 1e-8 * e);
        assert_eq!(p.argmax_point, Some(vec![1.0]));
    }

    #[test]
    fn infeasible_constant_family() {
        let q = MatrixFn::constant_sym(SymMatrix::from_diag(&[1.0, 0.0]));
        let b = MatrixFn::constant(RectMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap(), false);
        let dom = ParamDomain::interval(0.0, 1.0, 5).unwrap();
        let p = profile(&q, &b, &dom, &t()).unwrap();
        assert!(p.any_infeasible);
        assert_eq!(p.sup_mu_inf, ExtendedReal::PosInf);
        assert_eq!(synth_constant(&q, &b, &p, 1e-3, &t()).unwrap(), ExtendedReal::PosInf);
        assert!(synth_continuous(&q, &b, &dom, 1e-3, &t()).is_err());
    }

    #[test]
    fn constant_synthesis_example1() {
        let (q, b) = ex1(QChoice::Linear);
        let dom = ParamDomain::interval(0.5, 2.0, 4).unwrap();
        let p = profile(&q, &b, &dom, &t()).unwrap();
        let mu = synth_constant(&q, &b, &p, 1e-6, &t()).unwrap().finite().unwrap();
        assert!((mu - (2.0 + 1e-6)).abs() < 1e-8);

        let dom = ParamDomain::interval(0.01, 2.0, 200).unwrap();
        let p = profile(&q, &b, &dom, &t()).unwrap();
        let mu = synth_constant(&q, &b, &p, 1e-3, &t()).unwrap().finite().unwrap();
        assert!((mu - 100.001).abs() < 1e-6);
        // at s = 0.01 the slack is margin * s^2, below the relative tolerance
        assert!(matches!(synth_constant(&q, &b, &p, 1e-7, &t()), Err(Error::Consistency(_))));
    }

    #[test]
    fn unconstrained_constant_is_margin() {
        let q = MatrixFn::constant_sym(SymMatrix::from_diag(&[-1.0, -1.0]));
        let b = MatrixFn::constant(RectMatrix::zeros(1, 2), false);
        let dom = ParamDomain::interval(0.0, 1.0, 3).unwrap();
        let p = profile(&q, &b, &dom, &t()).unwrap();
        assert_eq!(p.sup_mu_inf, ExtendedReal::NegInf);
        assert_eq!(synth_constant(&q, &b, &p, 0.25, &t()).unwrap(), ExtendedReal::Finite(0.25));
        let c = synth_continuous(&q, &b, &dom, 1e-3, &t()).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.0));
        assert!(c.all_verified());
    }

    #[test]
    fn continuous_example1_and_interpolation() {
        let (q, b) = ex1(QChoice::Linear);
        let dom = ParamDomain::interval(0.5, 2.0, 4).unwrap();
        let c = synth_continuous(&q, &b, &dom, 1e-4, &t()).unwrap();
        assert!(c.all_verified());
        for (s, v) in c.points.iter().zip(&c.values) {
            assert!((v - (1.0 / s[0] + 1e-4)).abs() < 1e-8);
        }
        let mid = c.interpolate(&[0.75]).unwrap();
        assert!((mid - 0.5 * (c.values[0] + c.values[1])).abs() < 1e-12);
        assert!(c.interpolate(&[3.0]).is_err());
    }

    #[test]
    fn jump_family_has_pointwise_but_growing_profile() {
        let (q, b) = ex1(QChoice::Jump { s_bar: 1.0, q_bar: 0.5 });
        let grids: Vec<_> = (1..=4)
            .map(|k| {
                let gap = 0.5f64.powi(k * 2);
                ParamDomain::finite_set(vec![vec![0.5], vec![1.0], vec![1.0 + gap], vec![2.0]]).unwrap()
            })
            .collect();
        let trend = sup_trend_over(&q, &b, &grids, &t()).unwrap();
        assert!(trend.sups.iter().all(|s| s.is_finite()));
        assert!(trend.suspected_unbounded);
    }

    #[test]
    fn refinement_towards_zero_flags_growth() {
        let (q, b) = ex1(QChoice::Linear);
        let grids: Vec<_> = (1..=5)
            .map(|k| ParamDomain::interval(0.5f64.powi(2 * k), 2.0, 9).unwrap())
            .collect();
        let trend = sup_trend_over(&q, &b, &grids, &t()).unwrap();
        assert!(trend.suspected_unbounded);
        assert!((trend.growth_ratio.unwrap() - 4.0).abs() < 1e-6);

        let dom = ParamDomain::interval(0.5, 2.0, 4).unwrap();
        let trend = sup_trend(&q, &b, &dom, 2, &t()).unwrap();
        assert!(!trend.suspected_unbounded);
    }

    #[test]
    fn bound_tests() {
        let dom = ParamDomain::interval(0.0, 1.0, 11).unwrap();
        let neg = BoundFns {
            ell_q: MatrixFn::scalar(|_: &[f64]| -1.0),
            u_q: MatrixFn::scalar(|_: &[f64]| -1.0),
            ell_r: MatrixFn::scalar(|_: &[f64]| 1.0),
            u_r: MatrixFn::scalar(|_: &[f64]| 1.0),
        };
        let p = GridPolicy::default();
        assert!(bound_test_necessary(&neg, &dom, &p).unwrap().passed);
        assert!(bound_test_sufficient(&neg, &dom, &p).unwrap().passed);

        let growing = BoundFns {
            ell_q: MatrixFn::scalar(|s: &[f64]| s[0]),
            u_q: MatrixFn::scalar(|s: &[f64]| s[0]),
            ell_r: MatrixFn::scalar(|s: &[f64]| s[0] * s[0]),
            u_r: MatrixFn::scalar(|s: &[f64]| s[0] * s[0]),
        };
        let near_zero = ParamDomain::interval(0.01, 1.0, 100).unwrap();
        let v = bound_test_necessary(&growing, &near_zero, &p).unwrap();
        assert!(v.passed);
        assert!((v.sup.finite().unwrap() - 100.0).abs() < 1e-9);
        let thresholded = GridPolicy { sup_threshold: Some(50.0), refine_levels: 0 };
        assert!(!bound_test_necessary(&growing, &near_zero, &thresholded).unwrap().passed);
        // grid through s = 0 hits l_Q = 0, u_R = 0
        assert!(!bound_test_necessary(&growing, &dom, &p).unwrap().passed);

        let flat = BoundFns {
            ell_q: MatrixFn::scalar(|_: &[f64]| 1.0),
            u_q: MatrixFn::scalar(|_: &[f64]| 1.0),
            ell_r: MatrixFn::scalar(|_: &[f64]| 0.0),
            u_r: MatrixFn::scalar(|_: &[f64]| 0.0),
        };
        assert!(!bound_test_necessary(&flat, &dom, &p).unwrap().passed);
        assert!(!bound_test_sufficient(&flat, &dom, &p).unwrap().passed);

        let sine = BoundFns {
            ell_q: MatrixFn::scalar(|s: &[f64]| s[0].sin() - 2.0),
            u_q: MatrixFn::scalar(|s: &[f64]| s[0].sin() + 2.0),
            ell_r: MatrixFn::scalar(|_: &[f64]| 1.0),
            u_r: MatrixFn::scalar(|_: &[f64]| 1.0),
        };
        let circle = ParamDomain::interval(0.0, 2.0 * std::f64::consts::PI, 64).unwrap();
        let v = bound_test_sufficient(&sine, &circle, &p).unwrap();
        assert!(v.passed && v.sup.finite().unwrap() <= 3.0);
    }

    #[test]
    fn scalar_case() {
        let tol = t();
        let p = GridPolicy::default();
        let lin = MatrixFn::scalar(|s: &[f64]| s[0]);
        let v = bound_test_scalar(&lin, &lin, &ParamDomain::interval(0.5, 1.0, 6).unwrap(), &tol, &p).unwrap();
        assert!(v.passed && v.zero_set.is_empty());
        assert!((v.sup_ratio.finite().unwrap() - 2.0).abs() < 1e-12);
        let v = bound_test_scalar(&lin, &lin, &ParamDomain::interval(0.0, 1.0, 6).unwrap(), &tol, &p).unwrap();
        assert!(!v.passed && v.zero_set == vec![vec![0.0]]);
        let neg = MatrixFn::scalar(|_: &[f64]| -1.0);
        let zero = MatrixFn::scalar(|_: &[f64]| 0.0);
        let v = bound_test_scalar(&neg, &zero, &ParamDomain::interval(0.0, 1.0, 6).unwrap(), &tol, &p).unwrap();
        assert!(v.passed);
    }

    #[test]
    fn bounds_synthesis() {
        let tol = t();
        let q = MatrixFn::custom(2, 2, true, |s: &[f64]| {
            RectMatrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, s[0].sin()]]).unwrap()
        });
        let b = MatrixFn::constant(RectMatrix::identity(2), false);
        let dom = ParamDomain::interval(0.0, 2.0 * std::f64::consts::PI, 5).unwrap();
        let bounds = BoundFns::exact(&q, &b);
        bounds.validate(&q, &b, &dom, &tol).unwrap();
        let mu = synth_from_bounds(&bounds, &dom, Some((&q, &b)), &tol).unwrap();
        assert!((mu - 3.0).abs() < 1e-12);
        assert!((synth_full_rank(&q, &b, &dom, &tol).unwrap() - 3.0).abs() < 1e-12);

        let trivial = BoundFns {
            ell_q: MatrixFn::scalar(|_: &[f64]| -1.0),
            u_q: MatrixFn::scalar(|_: &[f64]| -1.0),
            ell_r: MatrixFn::scalar(|_: &[f64]| 1.0),
            u_r: MatrixFn::scalar(|_: &[f64]| 1.0),
        };
        assert_eq!(synth_from_bounds(&trivial, &dom, None, &tol).unwrap(), 1.0);

        let grid = example2::square_grid::<f64>(5).unwrap();
        let r = synth_full_rank(&example2::q(), &example2::b(), &grid, &tol);
        assert!(matches!(r, Err(Error::NotApplicable(_))));
        let r = synth_from_bounds(&BoundFns::exact(&example2::q(), &example2::b()), &grid, None, &tol);
        assert!(matches!(r, Err(Error::NotApplicable(_))));
    }

    #[test]
    fn bad_bounds_rejected() {
        let q = MatrixFn::constant_sym(SymMatrix::from_diag(&[-1.0, 2.0]));
        let b = MatrixFn::constant(RectMatrix::identity(2), false);
        let dom = ParamDomain::interval(0.0, 1.0, 3).unwrap();
        let mut bounds = BoundFns::exact(&q, &b);
        bounds.u_q = MatrixFn::scalar(|_: &[f64]| 1.0);
        assert!(bounds.validate(&q, &b, &dom, &t()).is_err());
    }

    #[test]
    fn polynomial_slack() {
        let q = MatrixFn::constant_sym(SymMatrix::from_diag(&[-1.0, 1.0]));
        let b = MatrixFn::poly(
            1,
            2,
            false,
            1,
            vec![
                (vec![0], RectMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap()),
                (vec![1], RectMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap()),
            ],
        )
        .unwrap();
        let dom = ParamDomain::interval(0.0, 1.0, 5).unwrap();
        let (mu, x) = synth_polynomial_x(&q, &b, &dom, 1e-3, &t()).unwrap();
        assert!((mu - (1.0 + 1e-3)).abs() < 1e-8);
        assert_eq!(x.shape(), (2, 1));
        assert_eq!(x.as_poly().unwrap().degree(), 1);
        let not_poly = MatrixFn::builtin(Builtin::Example1B);
        assert!(synth_polynomial_x(&q, &not_poly, &dom, 1e-3, &t()).is_err());
    }

    #[test]
    fn example2_audit_origin() {
        let dom = ParamDomain::finite_set(vec![vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let a = example2::audit(&dom, 1e-6, &t()).unwrap();
        assert_eq!(a.audit.status[0], AuditStatus::Boundary);
        assert!(a.audit.claimed_lambda_max[0].abs() < 1e-12);
        assert_eq!(a.audit.status[1], AuditStatus::Violation);
        assert!((a.audit.mu_inf[0].finite().unwrap() - 1.0).abs() < 1e-9);
        assert!((a.audit.mu_inf[1].finite().unwrap() - 16.0).abs() < 1e-8);
        assert!(a.corrected_verified.iter().all(|&v| v));
    }
}
