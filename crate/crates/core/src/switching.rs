//! Multipliers for finitely many modes and piecewise-constant families.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::finsler_point::{mu_inf, ExtendedReal, Tolerances};
use crate::pd_models::{to_f64, MatrixFn, ParamDomain, Region};
use crate::scalar::Scalar;
use crate::symlin::{RectMatrix, SymMatrix};

/// Finite set of `(Q, B)` values.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeSet<T> {
    /// Mode `i` is `(Q_i, B_i)`.
    Paired(Vec<(SymMatrix<T>, RectMatrix<T>)>),
    /// Every `Q_i` is combined with every `B_j`.
    Product {
        qs: Vec<SymMatrix<T>>,
        bs: Vec<RectMatrix<T>>,
    },
}

fn check_uniform<T: Scalar>(qs: &[&SymMatrix<T>], bs: &[&RectMatrix<T>]) -> Result<()> {
    if qs.is_empty() || bs.is_empty() {
        return Err(Error::InvalidInput("mode set is empty".into()));
    }
    let n = qs[0].dim();
    let m = bs[0].rows();
    if qs.iter().any(|q| q.dim() != n) || bs.iter().any(|b| b.shape() != (m, n)) {
        return Err(Error::InvalidInput(format!(
            "modes must share Q: {n}x{n} and B: {m}x{n}"
        )));
    }
    Ok(())
}

impl<T: Scalar> ModeSet<T> {
    pub fn paired(modes: Vec<(SymMatrix<T>, RectMatrix<T>)>) -> Result<Self> {
        let qs: Vec<_> = modes.iter().map(|(q, _)| q).collect();
        let bs: Vec<_> = modes.iter().map(|(_, b)| b).collect();
        check_uniform(&qs, &bs)?;
        Ok(ModeSet::Paired(modes))
    }

    pub fn product(qs: Vec<SymMatrix<T>>, bs: Vec<RectMatrix<T>>) -> Result<Self> {
        check_uniform(&qs.iter().collect::<Vec<_>>(), &bs.iter().collect::<Vec<_>>())?;
        Ok(ModeSet::Product { qs, bs })
    }

    /// Index pairs `(i, j)` checked by a certificate, `i` major.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        match self {
            ModeSet::Paired(m) => (0..m.len()).map(|i| (i, i)).collect(),
            ModeSet::Product { qs, bs } => (0..qs.len())
                .flat_map(|i| (0..bs.len()).map(move |j| (i, j)))
                .collect(),
        }
    }

    fn pair(&self, (i, j): (usize, usize)) -> (&SymMatrix<T>, &RectMatrix<T>) {
        match self {
            ModeSet::Paired(m) => (&m[i].0, &m[j].1),
            ModeSet::Product { qs, bs } => (&qs[i], &bs[j]),
        }
    }
}

/// One multiplier shared by all checked pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeCertificate<T> {
    /// `max mu_inf + margin`; `margin` when every pair is unconstrained.
    pub mu_bar: ExtendedReal<T>,
    pub pairs: Vec<(usize, usize)>,
    pub mu_inf: Vec<ExtendedReal<T>>,
}

fn certify_pairs<T: Scalar>(ms: &ModeSet<T>, margin: T, tols: &Tolerances<T>) -> Result<ModeCertificate<T>> {
    if !(margin > T::zero()) {
        return Err(Error::InvalidInput("margin must be positive".into()));
    }
    let pairs = ms.pairs();
    let infs = pairs
        .par_iter()
        .map(|&p| {
            let (q, b) = ms.pair(p);
            mu_inf(q, b, tols)
        })
        .collect::<Result<Vec<_>>>()?;
    let sup = infs.iter().fold(ExtendedReal::NegInf, |a, &b| a.max(b));
    let mu_bar = match sup {
        ExtendedReal::PosInf => ExtendedReal::PosInf,
        ExtendedReal::NegInf => ExtendedReal::Finite(margin),
        ExtendedReal::Finite(s) => ExtendedReal::Finite(s + margin),
    };
    if let ExtendedReal::Finite(mu) = mu_bar {
        for &p in &pairs {
            let (q, b) = ms.pair(p);
            if !q.combine(&b.gram(), -mu)?.is_neg_def(tols.def_tol)? {
                return Err(Error::Consistency(format!(
                    "multiplier {mu:e} fails on pair {p:?}; margin too small for def_tol"
                )));
            }
        }
    }
    Ok(ModeCertificate {
        mu_bar,
        pairs,
        mu_inf: infs,
    })
}

/// Common multiplier for paired modes: `Q_i - mu B_i^T B_i < 0` for every `i`.
pub fn certify_modes<T: Scalar>(ms: &ModeSet<T>, margin: T, tols: &Tolerances<T>) -> Result<ModeCertificate<T>> {
    match ms {
        ModeSet::Paired(_) => certify_pairs(ms, margin, tols),
        ModeSet::Product { .. } => Err(Error::InvalidInput(
            "certify_modes needs a paired mode list".into(),
        )),
    }
}

/// Common multiplier for every combination `Q_i - mu B_j^T B_j < 0`.
pub fn certify_product<T: Scalar>(ms: &ModeSet<T>, margin: T, tols: &Tolerances<T>) -> Result<ModeCertificate<T>> {
    match ms {
        ModeSet::Product { .. } => certify_pairs(ms, margin, tols),
        ModeSet::Paired(_) => Err(Error::InvalidInput(
            "certify_product needs separate Q and B lists".into(),
        )),
    }
}

/// Common refinement of two box partitions; `(i, j, region)` for every
/// nonempty intersection.
pub fn intersect_regions<T: Scalar>(a: &[Region<T>], b: &[Region<T>]) -> Vec<(usize, usize, Vec<T>, Vec<T>)> {
    let mut out = Vec::new();
    for (i, ra) in a.iter().enumerate() {
        for (j, rb) in b.iter().enumerate() {
            if ra.lo.len() != rb.lo.len() {
                continue;
            }
            let lo: Vec<T> = ra.lo.iter().zip(&rb.lo).map(|(&x, &y)| x.max(y)).collect();
            let hi: Vec<T> = ra.hi.iter().zip(&rb.hi).map(|(&x, &y)| x.min(y)).collect();
            if lo.iter().zip(&hi).all(|(l, h)| l < h) {
                out.push((i, j, lo, hi));
            }
        }
    }
    out
}

/// Piecewise-constant multiplier on the common refinement of the partitions
/// of `Q` and `B`: `mu_inf + margin` per region (`margin` for unconstrained
/// regions). Every grid point of `dom` must fall into some region.
pub fn piecewise_mu<T: Scalar>(
    qf: &MatrixFn<T>,
    bf: &MatrixFn<T>,
    dom: &ParamDomain<T>,
    margin: T,
    tols: &Tolerances<T>,
) -> Result<MatrixFn<T>> {
    if !(margin > T::zero()) {
        return Err(Error::InvalidInput("margin must be positive".into()));
    }
    let (rq, rb) = match (qf.regions(), bf.regions()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidInput(
                "piecewise_mu needs piecewise-constant Q and B".into(),
            ))
        }
    };
    let mut regions = Vec::new();
    for (id, (i, j, lo, hi)) in intersect_regions(rq, rb).into_iter().enumerate() {
        let q = SymMatrix::from_rect(&rq[i].value)?;
        let b = &rb[j].value;
        let mu = match mu_inf(&q, b, tols)? {
            ExtendedReal::PosInf => return Err(Error::InfeasibleRegion { region: id }),
            ExtendedReal::NegInf => margin,
            ExtendedReal::Finite(m) => m + margin,
        };
        if !q.combine(&b.gram(), -mu)?.is_neg_def(tols.def_tol)? {
            return Err(Error::Consistency(format!(
                "region {id}: multiplier {mu:e} fails verification"
            )));
        }
        regions.push(Region {
            lo,
            hi,
            value: RectMatrix::from_fn(1, 1, |_, _| mu),
        });
    }
    let out = MatrixFn::piecewise(1, 1, true, regions)?;
    for s in dom.points() {
        out.eval(&s).map_err(|_| Error::UncoveredPoint { point: to_f64(&s) })?;
    }
    Ok(out)
}
