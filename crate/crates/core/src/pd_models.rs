//! Parameter sets and parameter-dependent matrix functions.
//!
//! Grids stand in for the parameter set: every "for all s" statement the
//! crate reports is certified on grid points only.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::symlin::{RectMatrix, SymMatrix};

/// One axis of a box grid: `count` equally spaced points from `lo` to `hi`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Axis<T> {
    pub lo: T,
    pub hi: T,
    pub count: usize,
}

/// Parameter set sampled as a finite point list.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamDomain<T> {
    /// Tensor grid over a box in `R^d`; the first axis varies slowest.
    BoxGrid { axes: Vec<Axis<T>> },
    /// Points `k / depth` of the unit simplex in `R^dim`, `sum k_i = depth`.
    SimplexGrid { dim: usize, depth: usize },
    FiniteSet { points: Vec<Vec<T>> },
}

impl<T: Scalar> ParamDomain<T> {
    pub fn box_grid(axes: Vec<Axis<T>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidInput("box grid needs at least one axis".into()));
        }
        for (i, a) in axes.iter().enumerate() {
            if !(a.lo.is_finite() && a.hi.is_finite() && a.lo < a.hi) || a.count < 2 {
                return Err(Error::InvalidInput(format!(
                    "axis {i}: need finite lo < hi and count >= 2"
                )));
            }
        }
        Ok(ParamDomain::BoxGrid { axes })
    }

    /// One-dimensional grid `lo, ..., hi` with `count` points.
    pub fn interval(lo: T, hi: T, count: usize) -> Result<Self> {
        Self::box_grid(vec![Axis { lo, hi, count }])
    }

    pub fn simplex_grid(dim: usize, depth: usize) -> Result<Self> {
        if dim == 0 || depth == 0 {
            return Err(Error::InvalidInput("simplex grid needs dim >= 1 and depth >= 1".into()));
        }
        Ok(ParamDomain::SimplexGrid { dim, depth })
    }

    pub fn finite_set(points: Vec<Vec<T>>) -> Result<Self> {
        let d = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidInput("finite set must be nonempty".into()))?;
        if points.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidInput("finite set points must be finite with equal dimension".into()));
        }
        Ok(ParamDomain::FiniteSet { points })
    }

    /// Dimension of each point.
    pub fn dim(&self) -> usize {
        match self {
            ParamDomain::BoxGrid { axes } => axes.len(),
            ParamDomain::SimplexGrid { dim, .. } => *dim,
            ParamDomain::FiniteSet { points } => points[0].len(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ParamDomain::BoxGrid { axes } => axes.iter().map(|a| a.count).product(),
            ParamDomain::SimplexGrid { dim, depth } => binomial(depth + dim - 1, dim - 1),
            ParamDomain::FiniteSet { points } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All points in deterministic order.
    pub fn points(&self) -> Vec<Vec<T>> {
        match self {
            ParamDomain::BoxGrid { axes } => {
                let coords: Vec<Vec<T>> = axes.iter().map(axis_values).collect();
                let mut out = vec![Vec::with_capacity(axes.len())];
                for c in &coords {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            c.iter().map(move |&v| {
                                let mut q = p.clone();
                                q.push(v);
                                q
                            })
                        })
                        .collect();
                }
                out
            }
            ParamDomain::SimplexGrid { dim, depth } => {
                let d = T::from_count(*depth);
                simplex_compositions(*dim, *depth)
                    .into_iter()
                    .map(|k| k.into_iter().map(|ki| T::from_count(ki) / d).collect())
                    .collect()
            }
            ParamDomain::FiniteSet { points } => points.clone(),
        }
    }

    /// Grid refined `levels` times: each box interval and each simplex step
    /// is halved per level. Finite sets are returned unchanged. Every point of
    /// the original grid is also a point of the refinement.
    pub fn refine(&self, levels: u32) -> Self {
        let f = 1usize << levels;
        match self {
            ParamDomain::BoxGrid { axes } => ParamDomain::BoxGrid {
                axes: axes
                    .iter()
                    .map(|a| Axis {
                        lo: a.lo,
                        hi: a.hi,
                        count: (a.count - 1) * f + 1,
                    })
                    .collect(),
            },
            ParamDomain::SimplexGrid { dim, depth } => ParamDomain::SimplexGrid {
                dim: *dim,
                depth: depth * f,
            },
            other => other.clone(),
        }
    }
}

fn axis_values<T: Scalar>(a: &Axis<T>) -> Vec<T> {
    let last = a.count - 1;
    let span = a.hi - a.lo;
    let denom = T::from_count(last);
    (0..a.count)
        .map(|i| {
            if i == last {
                a.hi
            } else {
                a.lo + span * T::from_count(i) / denom
            }
        })
        .collect()
}

/// All compositions of `depth` into `dim` nonnegative parts, first part
/// descending.
pub fn simplex_compositions(dim: usize, depth: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, rest: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if dim == 1 {
            prefix.push(rest);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=rest).rev() {
            prefix.push(k);
            rec(dim - 1, rest - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim > 0 {
        rec(dim, depth, &mut Vec::with_capacity(dim), &mut out);
    }
    out
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Polynomial matrix `sum_k coef_k * s^k` over `nvars` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix<T> {
    pub nvars: usize,
    pub terms: Vec<(Vec<u32>, RectMatrix<T>)>,
}

impl<T: Scalar> PolyMatrix<T> {
    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Direct monomial summation.
    pub fn eval_naive(&self, s: &[T], rows: usize, cols: usize) -> RectMatrix<T> {
        let mut out = RectMatrix::zeros(rows, cols);
        for (exp, coef) in &self.terms {
            let m = monomial(exp, s);
            out = out.add(&coef.scale(m)).expect("shape checked on construction");
        }
        out
    }

    /// Nested Horner evaluation, one variable at a time.
    pub fn eval_horner(&self, s: &[T], rows: usize, cols: usize) -> RectMatrix<T> {
        let refs: Vec<(&[u32], &RectMatrix<T>)> =
            self.terms.iter().map(|(e, c)| (e.as_slice(), c)).collect();
        horner(&refs, s, 0, rows, cols)
    }
}

fn monomial<T: Scalar>(exp: &[u32], s: &[T]) -> T {
    exp.iter()
        .zip(s)
        .fold(T::one(), |acc, (&e, &x)| acc * x.powi(e as i32))
}

fn horner<T: Scalar>(
    terms: &[(&[u32], &RectMatrix<T>)],
    s: &[T],
    var: usize,
    rows: usize,
    cols: usize,
) -> RectMatrix<T> {
    if var == s.len() {
        return terms
            .iter()
            .fold(RectMatrix::zeros(rows, cols), |acc, (_, c)| acc.add(c).unwrap());
    }
    let mut groups: BTreeMap<u32, Vec<(&[u32], &RectMatrix<T>)>> = BTreeMap::new();
    for &(e, c) in terms {
        groups.entry(e[var]).or_default().push((e, c));
    }
    let top = *groups.keys().next_back().unwrap_or(&0);
    let mut acc = RectMatrix::zeros(rows, cols);
    for deg in (0..=top).rev() {
        acc = acc.scale(s[var]);
        if let Some(g) = groups.get(&deg) {
            acc = acc.add(&horner(g, s, var + 1, rows, cols)).unwrap();
        }
    }
    acc
}

/// Axis-aligned half-open box `[lo, hi)` carrying a constant matrix.
/// Infinite bounds are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct Region<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub value: RectMatrix<T>,
}

impl<T: Scalar> Region<T> {
    pub fn contains(&self, s: &[T]) -> bool {
        s.len() == self.lo.len()
            && s.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&x, (&lo, &hi))| lo <= x && x < hi)
    }
}

/// Scalar `q(s)` of the first worked family `Q(s) = diag(-1, q(s))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QChoice<T> {
    Linear,
    Exp,
    /// `1 / (s - s_bar)` for `s > s_bar`, `q_bar` otherwise.
    Jump { s_bar: T, q_bar: T },
}

impl<T: Scalar> QChoice<T> {
    pub fn eval(&self, s: T) -> T {
        match *self {
            QChoice::Linear => s,
            QChoice::Exp => s.exp(),
            QChoice::Jump { s_bar, q_bar } => {
                if s > s_bar {
                    T::one() / (s - s_bar)
                } else {
                    q_bar
                }
            }
        }
    }
}

/// Closed-form families used as worked examples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin<T> {
    /// `diag(-1, q(s))`.
    Example1Q(QChoice<T>),
    /// `[0, s]`.
    Example1B,
    /// `[[-e^{x1}, 1 + 3 x2^2], [1 + 3 x2^2, 0]]`.
    Example2Q,
    /// `[0, 1]`.
    Example2B,
}

impl<T: Scalar> Builtin<T> {
    fn shape(&self) -> (usize, usize, bool, usize) {
        match self {
            Builtin::Example1Q(_) => (2, 2, true, 1),
            Builtin::Example1B => (1, 2, false, 1),
            Builtin::Example2Q => (2, 2, true, 2),
            Builtin::Example2B => (1, 2, false, 2),
        }
    }

    fn eval(&self, s: &[T]) -> RectMatrix<T> {
        let z = T::zero();
        let rows = match *self {
            Builtin::Example1Q(q) => vec![vec![-T::one(), z], vec![z, q.eval(s[0])]],
            Builtin::Example1B => vec![vec![z, s[0]]],
            Builtin::Example2Q => {
                let off = T::one() + T::c(3.0) * s[1] * s[1];
                vec![vec![-s[0].exp(), off], vec![off, z]]
            }
            Builtin::Example2B => vec![vec![z, T::one()]],
        };
        RectMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }
}

type CustomFn<T> = Arc<dyn Fn(&[T]) -> RectMatrix<T> + Send + Sync>;

#[derive(Clone)]
pub enum MatrixFnKind<T> {
    Constant(RectMatrix<T>),
    Poly(PolyMatrix<T>),
    /// Matrices attached to individual points, looked up with a relative
    /// coordinate tolerance of `1e-9`.
    Tabulated(Vec<(Vec<T>, RectMatrix<T>)>),
    PiecewiseConst(Vec<Region<T>>),
    Builtin(Builtin<T>),
    /// Arbitrary closure, for library callers. Not serializable.
    Custom(CustomFn<T>),
}

/// Parameter-dependent matrix with a fixed declared shape.
#[derive(Clone)]
pub struct MatrixFn<T> {
    rows: usize,
    cols: usize,
    symmetric: bool,
    /// Required point dimension, when the representation fixes one.
    nvars: Option<usize>,
    kind: MatrixFnKind<T>,
}

impl<T: Scalar> fmt::Debug for MatrixFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            MatrixFnKind::Constant(_) => "constant",
            MatrixFnKind::Poly(_) => "poly",
            MatrixFnKind::Tabulated(_) => "tabulated",
            MatrixFnKind::PiecewiseConst(_) => "piecewise_const",
            MatrixFnKind::Builtin(_) => "builtin",
            MatrixFnKind::Custom(_) => "custom",
        };
        write!(f, "MatrixFn({kind}, {}x{}, symmetric={})", self.rows, self.cols, self.symmetric)
    }
}

fn check_shape<T: Scalar>(m: &RectMatrix<T>, rows: usize, cols: usize) -> Result<()> {
    if m.shape() != (rows, cols) {
        return Err(Error::InvalidInput(format!(
            "matrix is {}x{}, declared {rows}x{cols}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

impl<T: Scalar> MatrixFn<T> {
    pub fn constant(value: RectMatrix<T>, symmetric: bool) -> Self {
        Self {
            rows: value.rows(),
            cols: value.cols(),
            symmetric,
            nvars: None,
            kind: MatrixFnKind::Constant(value),
        }
    }

    pub fn constant_sym(value: SymMatrix<T>) -> Self {
        Self::constant(value.to_rect(), true)
    }

    pub fn poly(
        rows: usize,
        cols: usize,
        symmetric: bool,
        nvars: usize,
        terms: Vec<(Vec<u32>, RectMatrix<T>)>,
    ) -> Result<Self> {
        for (e, c) in &terms {
            if e.len() != nvars {
                return Err(Error::InvalidInput(format!(
                    "exponent tuple {e:?} does not have {nvars} entries"
                )));
            }
            check_shape(c, rows, cols)?;
            if !c.is_finite() {
                return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
            }
        }
        Ok(Self {
            rows,
            cols,
            symmetric,
            nvars: Some(nvars),
            kind: MatrixFnKind::Poly(PolyMatrix { nvars, terms }),
        })
    }

    pub fn tabulated(
        rows: usize,
        cols: usize,
        symmetric: bool,
        table: Vec<(Vec<T>, RectMatrix<T>)>,
    ) -> Result<Self> {
        let d = table.first().map(|(p, _)| p.len());
        for (p, m) in &table {
            check_shape(m, rows, cols)?;
            if Some(p.len()) != d {
                return Err(Error::InvalidInput("tabulated points differ in dimension".into()));
            }
        }
        Ok(Self {
            rows,
            cols,
            symmetric,
            nvars: d,
            kind: MatrixFnKind::Tabulated(table),
        })
    }

    pub fn piecewise(rows: usize, cols: usize, symmetric: bool, regions: Vec<Region<T>>) -> Result<Self> {
        let d = regions.first().map(|r| r.lo.len());
        for r in &regions {
            check_shape(&r.value, rows, cols)?;
            if Some(r.lo.len()) != d || r.hi.len() != r.lo.len() {
                return Err(Error::InvalidInput("region bounds differ in dimension".into()));
            }
            if r.lo.iter().zip(&r.hi).any(|(l, h)| !(l < h)) {
                return Err(Error::InvalidInput("region needs lo < hi on every axis".into()));
            }
        }
        Ok(Self {
            rows,
            cols,
            symmetric,
            nvars: d,
            kind: MatrixFnKind::PiecewiseConst(regions),
        })
    }

    pub fn builtin(b: Builtin<T>) -> Self {
        let (rows, cols, symmetric, nvars) = b.shape();
        Self {
            rows,
            cols,
            symmetric,
            nvars: Some(nvars),
            kind: MatrixFnKind::Builtin(b),
        }
    }

    pub fn custom(
        rows: usize,
        cols: usize,
        symmetric: bool,
        f: impl Fn(&[T]) -> RectMatrix<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            rows,
            cols,
            symmetric,
            nvars: None,
            kind: MatrixFnKind::Custom(Arc::new(f)),
        }
    }

    /// Scalar (`1 x 1`) function from a closure.
    pub fn scalar(f: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Self::custom(1, 1, true, move |s| RectMatrix::from_fn(1, 1, |_, _| f(s)))
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn kind(&self) -> &MatrixFnKind<T> {
        &self.kind
    }

    pub fn as_poly(&self) -> Option<&PolyMatrix<T>> {
        match &self.kind {
            MatrixFnKind::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn regions(&self) -> Option<&[Region<T>]> {
        match &self.kind {
            MatrixFnKind::PiecewiseConst(r) => Some(r),
            _ => None,
        }
    }

    /// Value at `s`; symmetric functions are returned as `(A + A^T) / 2`.
    pub fn eval(&self, s: &[T]) -> Result<RectMatrix<T>> {
        if let Some(d) = self.nvars {
            if s.len() != d {
                return Err(Error::InvalidInput(format!(
                    "point has dimension {}, function expects {d}",
                    s.len()
                )));
            }
        }
        let raw = match &self.kind {
            MatrixFnKind::Constant(m) => m.clone(),
            MatrixFnKind::Poly(p) => p.eval_naive(s, self.rows, self.cols),
            MatrixFnKind::Tabulated(table) => table
                .iter()
                .find(|(p, _)| {
                    p.iter()
                        .zip(s)
                        .all(|(&a, &b)| (a - b).abs() <= T::c(1e-9) * (T::one() + a.abs()))
                })
                .map(|(_, m)| m.clone())
                .ok_or_else(|| uncovered(s))?,
            MatrixFnKind::PiecewiseConst(regions) => regions
                .iter()
                .find(|r| r.contains(s))
                .map(|r| r.value.clone())
                .ok_or_else(|| uncovered(s))?,
            MatrixFnKind::Builtin(b) => b.eval(s),
            MatrixFnKind::Custom(f) => f(s),
        };
        check_shape(&raw, self.rows, self.cols)?;
        if !raw.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite value at {:?}",
                to_f64(s)
            )));
        }
        if self.symmetric {
            Ok(raw.symmetric_part()?.to_rect())
        } else {
            Ok(raw)
        }
    }

    /// Value at `s` as a symmetric matrix.
    pub fn eval_sym(&self, s: &[T]) -> Result<SymMatrix<T>> {
        self.eval(s)?.symmetric_part()
    }

    /// Value of a `1 x 1` function.
    pub fn eval_scalar(&self, s: &[T]) -> Result<T> {
        if self.shape() != (1, 1) {
            return Err(Error::InvalidInput("expected a scalar (1x1) function".into()));
        }
        Ok(self.eval(s)?.get(0, 0))
    }

    /// Evaluates at every grid point, surfacing the first failure.
    pub fn check_coverage(&self, dom: &ParamDomain<T>) -> Result<()> {
        for p in dom.points() {
            self.eval(&p).map_err(|e| e.at_point(to_f64(&p)))?;
        }
        Ok(())
    }
}

fn uncovered<T: Scalar>(s: &[T]) -> Error {
    Error::UncoveredPoint { point: to_f64(s) }
}

pub(crate) fn to_f64<T: Scalar>(s: &[T]) -> Vec<f64> {
    s.iter().map(|v| v.to_f64_lossy()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn example_builtins() {
        let q = MatrixFn::builtin(Builtin::Example1Q(QChoice::Linear));
        assert_eq!(q.eval_sym(&[2.0]).unwrap(), SymMatrix::from_diag(&[-1.0, 2.0]));
        let q2 = MatrixFn::<f64>::builtin(Builtin::Example2Q);
        assert_eq!(
            q2.eval(&[0.0, 0.0]).unwrap().to_rows(),
            vec![vec![-1.0, 1.0], vec![1.0, 0.0]]
        );
        let b = MatrixFn::poly(1, 2, false, 1, vec![(vec![1], RectMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap())]).unwrap();
        assert_eq!(b.eval(&[0.5]).unwrap().to_rows(), vec![vec![0.0, 0.5]]);
    }

    #[test]
    fn jump_family() {
        let q = QChoice::Jump { s_bar: 1.0, q_bar: 0.5 };
        assert_eq!(q.eval(0.5), 0.5);
        assert_eq!(q.eval(1.0), 0.5);
        assert_eq!(q.eval(1.5), 2.0);
    }

    #[test]
    fn grid_examples() {
        let d = ParamDomain::interval(0.5, 2.0, 4).unwrap();
        assert_eq!(d.points(), vec![vec![0.5], vec![1.0], vec![1.5], vec![2.0]]);
        let s = ParamDomain::<f64>::simplex_grid(2, 2).unwrap();
        assert_eq!(s.points(), vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]]);
        let s3 = ParamDomain::<f64>::simplex_grid(3, 2).unwrap();
        assert_eq!(s3.points().len(), 6);
        assert_eq!(s3.len(), 6);
    }

    #[test]
    fn box_grid_order_and_refine() {
        let d = ParamDomain::box_grid(vec![
            Axis { lo: 0.0, hi: 1.0, count: 2 },
            Axis { lo: -1.0, hi: 1.0, count: 3 },
        ])
        .unwrap();
        let p = d.points();
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0.0, -1.0]);
        assert_eq!(p[1], vec![0.0, 0.0]);
        assert_eq!(p[5], vec![1.0, 1.0]);
        let r = d.refine(1);
        assert_eq!(r.len(), 3 * 5);
        let rp = r.points();
        assert!(p.iter().all(|x| rp.contains(x)));
    }

    #[test]
    fn invalid_domains() {
        assert!(ParamDomain::interval(1.0, 1.0, 3).is_err());
        assert!(ParamDomain::interval(0.0, 1.0, 1).is_err());
        assert!(ParamDomain::<f64>::finite_set(vec![]).is_err());
        assert!(ParamDomain::<f64>::simplex_grid(0, 2).is_err());
    }

    #[test]
    fn piecewise_half_open() {
        let one = RectMatrix::from_rows(&[vec![1.0]]).unwrap();
        let two = RectMatrix::from_rows(&[vec![2.0]]).unwrap();
        let f = MatrixFn::piecewise(
            1,
            1,
            true,
            vec![
                Region { lo: vec![0.0], hi: vec![1.0], value: one },
                Region { lo: vec![1.0], hi: vec![2.0], value: two },
            ],
        )
        .unwrap();
        assert_eq!(f.eval_scalar(&[0.999]).unwrap(), 1.0);
        assert_eq!(f.eval_scalar(&[1.0]).unwrap(), 2.0);
        assert!(matches!(f.eval(&[2.0]), Err(Error::UncoveredPoint { .. })));
        let dom = ParamDomain::interval(0.0, 2.0, 3).unwrap();
        assert!(matches!(f.check_coverage(&dom), Err(Error::AtPoint { .. })));
    }

    #[test]
    fn tabulated_lookup() {
        let f = MatrixFn::tabulated(
            1,
            1,
            true,
            vec![(vec![0.1 + 0.2], RectMatrix::from_rows(&[vec![7.0]]).unwrap())],
        )
        .unwrap();
        assert_eq!(f.eval_scalar(&[0.3]).unwrap(), 7.0);
        assert!(f.eval(&[0.4]).is_err());
    }

    #[test]
    fn symmetric_outputs_are_symmetrized() {
        let f = MatrixFn::custom(2, 2, true, |_s: &[f64]| {
            RectMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap()
        });
        assert_eq!(f.eval(&[0.0]).unwrap().to_rows(), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
    }

    proptest! {
        #[test]
        fn simplex_points_on_simplex(dim in 1usize..5, depth in 1usize..7) {
            let d = ParamDomain::<f64>::simplex_grid(dim, depth).unwrap();
            let pts = d.points();
            prop_assert_eq!(pts.len(), binomial(depth + dim - 1, dim - 1));
            for p in &pts {
                let s: f64 = p.iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-12);
                prop_assert!(p.iter().all(|&a| a >= 0.0));
            }
            for k in simplex_compositions(dim, depth) {
                prop_assert_eq!(k.iter().sum::<usize>(), depth);
            }
        }

        #[test]
        fn horner_matches_naive(
            coefs in proptest::collection::vec(-3.0f64..3.0, 20),
            s in proptest::collection::vec(-1.5f64..1.5, 2),
        ) {
            let mut terms = Vec::new();
            let mut it = coefs.into_iter();
            for a in 0..4u32 {
                for b in 0..(4 - a) {
                    let v = it.next().unwrap();
                    terms.push((vec![a, b], RectMatrix::from_rows(&[vec![v, -v]]).unwrap()));
                }
            }
            let p = MatrixFn::poly(1, 2, false, 2, terms).unwrap();
            let poly = p.as_poly().unwrap();
            let naive = poly.eval_naive(&s, 1, 2);
            let horner = poly.eval_horner(&s, 1, 2);
            for j in 0..2 {
                let (x, y) = (naive.get(0, j), horner.get(0, j));
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }
    }
}
