//! Polytopic systems `A(alpha) = sum alpha_i A_i` on the unit simplex:
//! relaxed LMI sets, exact variable counts, SDPA export and candidate checks.
//!
//! Scalar variables are numbered in declaration order. A symmetric `n x n`
//! variable contributes its upper triangle row by row, a general variable its
//! entries row by row.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

pub use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finsler_point::Tolerances;
use crate::pd_models::{binomial, simplex_compositions};
use crate::scalar::Scalar;
use crate::symlin::{RectMatrix, SymMatrix};

/// Vertices `A_1..A_N` of a matrix polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope<T> {
    vertices: Vec<RectMatrix<T>>,
}

impl<T: Scalar> Polytope<T> {
    pub fn new(vertices: Vec<RectMatrix<T>>) -> Result<Self> {
        let n = match vertices.first() {
            Some(a) => a.rows(),
            None => return Err(Error::InvalidInput("polytope needs at least one vertex".into())),
        };
        if n == 0 || vertices.iter().any(|a| a.shape() != (n, n)) {
            return Err(Error::InvalidInput("vertices must be square of a common size".into()));
        }
        if vertices.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("non-finite vertex entry".into()));
        }
        Ok(Self { vertices })
    }

    pub fn n(&self) -> usize {
        self.vertices[0].rows()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[RectMatrix<T>] {
        &self.vertices
    }

    /// `A(alpha)`; `alpha` must lie on the unit simplex.
    pub fn at(&self, alpha: &[T]) -> Result<RectMatrix<T>> {
        check_simplex(alpha, self.len())?;
        let n = self.n();
        let mut out = RectMatrix::zeros(n, n);
        for (a, &w) in self.vertices.iter().zip(alpha) {
            out = out.add(&a.scale(w))?;
        }
        Ok(out)
    }
}

fn check_simplex<T: Scalar>(alpha: &[T], len: usize) -> Result<()> {
    let sum: T = alpha.iter().copied().sum();
    let tol = T::c(1e-9).max(T::epsilon() * T::c(64.0));
    if alpha.len() != len || alpha.iter().any(|&a| !(a >= -tol)) || (sum - T::one()).abs() > tol {
        return Err(Error::InvalidInput(format!(
            "alpha must be a point of the unit simplex in R^{len}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Symmetric,
    General,
}

/// A matrix variable and the position of its first scalar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatVar {
    pub name: String,
    pub kind: VarKind,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

impl MatVar {
    pub fn scalar_count(&self) -> usize {
        match self.kind {
            VarKind::Symmetric => self.rows * (self.rows + 1) / 2,
            VarKind::General => self.rows * self.cols,
        }
    }

    /// `(row, col)` of every scalar in numbering order.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        match self.kind {
            VarKind::Symmetric => (0..self.rows)
                .flat_map(|r| (r..self.rows).map(move |c| (r, c)))
                .collect(),
            VarKind::General => (0..self.rows)
                .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
                .collect(),
        }
    }

    /// The variable's value when only scalar `(r, c)` is one.
    fn unit<T: Scalar>(&self, r: usize, c: usize) -> RectMatrix<T> {
        let mut m = RectMatrix::zeros(self.rows, self.cols);
        m.set(r, c, T::one());
        if self.kind == VarKind::Symmetric {
            m.set(c, r, T::one());
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// `F < 0`
    NegDef,
    /// `F > 0`
    PosDef,
}

/// `constant + sum_k x_k terms[k] (< or >) 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiConstraint<T> {
    pub label: String,
    pub sense: Sense,
    pub constant: SymMatrix<T>,
    /// Sorted by scalar index, no zero matrices.
    pub terms: Vec<(usize, SymMatrix<T>)>,
}

impl<T: Scalar> LmiConstraint<T> {
    pub fn dim(&self) -> usize {
        self.constant.dim()
    }

    pub fn evaluate(&self, x: &[T]) -> Result<SymMatrix<T>> {
        let mut m = self.constant.clone();
        for (k, e) in &self.terms {
            let v = *x.get(*k).ok_or_else(|| Error::InvalidInput(format!("scalar {k} missing")))?;
            if v != T::zero() {
                m = m.combine(e, v)?;
            }
        }
        Ok(m)
    }
}

/// Matrix variables plus affine constraints in their scalar entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LmiSet<T> {
    pub variables: Vec<MatVar>,
    pub constraints: Vec<LmiConstraint<T>>,
}

impl<T: Scalar> LmiSet<T> {
    pub fn new() -> Self {
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, rows: usize, cols: usize) -> usize {
        let v = MatVar {
            name: name.into(),
            kind,
            rows,
            cols: if kind == VarKind::Symmetric { rows } else { cols },
            offset: self.scalar_var_count(),
        };
        self.variables.push(v);
        self.variables.len() - 1
    }

    pub fn scalar_var_count(&self) -> usize {
        self.variables.iter().map(MatVar::scalar_count).sum()
    }

    /// `(variable name, row, col)` per scalar, in numbering order.
    pub fn scalar_labels(&self) -> Vec<(String, usize, usize)> {
        self.variables
            .iter()
            .flat_map(|v| v.entries().into_iter().map(move |(r, c)| (v.name.clone(), r, c)))
            .collect()
    }

    pub fn var(&self, name: &str) -> Option<&MatVar> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Scalar vector from named matrix values. Symmetric variables are read
    /// from their upper triangle.
    pub fn flatten(&self, assignment: &BTreeMap<String, RectMatrix<T>>) -> Result<Vec<T>> {
        let mut x = Vec::with_capacity(self.scalar_var_count());
        for v in &self.variables {
            let m = assignment
                .get(&v.name)
                .ok_or_else(|| Error::InvalidInput(format!("no value for variable {}", v.name)))?;
            if m.shape() != (v.rows, v.cols) {
                return Err(Error::InvalidInput(format!(
                    "variable {} must be {}x{}",
                    v.name, v.rows, v.cols
                )));
            }
            x.extend(v.entries().into_iter().map(|(r, c)| m.get(r, c)));
        }
        Ok(x)
    }

    pub fn evaluate(&self, x: &[T]) -> Result<Vec<SymMatrix<T>>> {
        if x.len() != self.scalar_var_count() {
            return Err(Error::InvalidInput(format!(
                "expected {} scalars, got {}",
                self.scalar_var_count(),
                x.len()
            )));
        }
        self.constraints.par_iter().map(|c| c.evaluate(x)).collect()
    }
}

/// Accumulates one constraint term by term.
struct Builder<T> {
    constant: SymMatrix<T>,
    terms: BTreeMap<usize, SymMatrix<T>>,
}

impl<T: Scalar> Builder<T> {
    fn new(dim: usize) -> Self {
        Self {
            constant: SymMatrix::zeros(dim),
            terms: BTreeMap::new(),
        }
    }

    fn add(&mut self, k: usize, m: &SymMatrix<T>, coef: T) -> Result<()> {
        let slot = self.terms.entry(k).or_insert_with(|| SymMatrix::zeros(m.dim()));
        *slot = slot.combine(m, coef)?;
        Ok(())
    }

    fn finish(self, label: String, sense: Sense) -> LmiConstraint<T> {
        LmiConstraint {
            label,
            sense,
            constant: self.constant,
            terms: self
                .terms
                .into_iter()
                .filter(|(_, m)| m.max_abs() != T::zero())
                .collect(),
        }
    }
}

/// `A^T P + P A` for the unit value of one symmetric scalar.
fn lyap_term<T: Scalar>(a: &RectMatrix<T>, p: &RectMatrix<T>) -> Result<SymMatrix<T>> {
    let pa = p.matmul(a)?;
    SymMatrix::from_rect(&pa.transpose().add(&pa)?)
}

fn positivity<T: Scalar>(set: &LmiSet<T>, var: usize, label: String) -> Result<LmiConstraint<T>> {
    let v = &set.variables[var];
    let mut b = Builder::new(v.rows);
    for (k, (r, c)) in v.entries().into_iter().enumerate() {
        b.add(v.offset + k, &SymMatrix::from_rect(&v.unit(r, c))?, T::one())?;
    }
    Ok(b.finish(label, Sense::PosDef))
}

/// `P_i > 0` and `A_i^T P_j + P_j A_i < 0` for every ordered pair `(i, j)`.
pub fn gen_lyapunov_g1<T: Scalar>(p: &Polytope<T>) -> Result<LmiSet<T>> {
    let n = p.n();
    let mut set = LmiSet::new();
    let vars: Vec<usize> = (0..p.len())
        .map(|i| set.add_var(format!("P{}", i + 1), VarKind::Symmetric, n, n))
        .collect();
    for (i, &v) in vars.iter().enumerate() {
        let c = positivity(&set, v, format!("P{} > 0", i + 1))?;
        set.constraints.push(c);
    }
    for (i, a) in p.vertices().iter().enumerate() {
        for (j, &v) in vars.iter().enumerate() {
            let var = &set.variables[v];
            let mut b = Builder::new(n);
            for (k, (r, c)) in var.entries().into_iter().enumerate() {
                b.add(var.offset + k, &lyap_term(a, &var.unit(r, c))?, T::one())?;
            }
            set.constraints
                .push(b.finish(format!("A{0}'P{1} + P{1}A{0} < 0", i + 1, j + 1), Sense::NegDef));
        }
    }
    Ok(set)
}

/// Monomial-collected form of the affine Lyapunov condition: one constraint
/// per `alpha_i^2` and per `alpha_i alpha_j`, `i < j`, the latter holding
/// both cross terms.
pub fn gen_lyapunov_collected<T: Scalar>(p: &Polytope<T>) -> Result<LmiSet<T>> {
    let n = p.n();
    let mut set = LmiSet::new();
    let vars: Vec<usize> = (0..p.len())
        .map(|i| set.add_var(format!("P{}", i + 1), VarKind::Symmetric, n, n))
        .collect();
    for (i, &v) in vars.iter().enumerate() {
        let c = positivity(&set, v, format!("P{} > 0", i + 1))?;
        set.constraints.push(c);
    }
    let a = p.vertices();
    for i in 0..p.len() {
        for j in i..p.len() {
            let mut b = Builder::new(n);
            let mut pairs = vec![(i, j)];
            if i != j {
                pairs.push((j, i));
            }
            for (ai, pj) in pairs {
                let var = &set.variables[vars[pj]];
                for (k, (r, c)) in var.entries().into_iter().enumerate() {
                    b.add(var.offset + k, &lyap_term(&a[ai], &var.unit(r, c))?, T::one())?;
                }
            }
            let label = if i == j {
                format!("a{}^2 < 0", i + 1)
            } else {
                format!("a{}a{} < 0", i + 1, j + 1)
            };
            set.constraints.push(b.finish(label, Sense::NegDef));
        }
    }
    Ok(set)
}

fn exponent_name(prefix: &str, e: &[usize]) -> String {
    let parts: Vec<String> = e.iter().map(usize::to_string).collect();
    format!("{prefix}[{}]", parts.join(","))
}

/// `k! / prod v_i!` with `sum v_i = k`.
fn multinomial(v: &[usize]) -> usize {
    let mut acc = 1;
    let mut total = 0;
    for &x in v {
        total += x;
        acc *= binomial(total, x);
    }
    acc
}

fn sub_exp(a: &[usize], b: &[usize]) -> Option<Vec<usize>> {
    a.iter().zip(b).map(|(&x, &y)| x.checked_sub(y)).collect()
}

/// Slack-variable relaxation of
/// `[0, P(alpha); P(alpha), 0] + X(alpha) [A(alpha), -I] + (.)^T < 0`
/// with `P` homogeneous of degree `g_p` and `X` (`2n x n`) homogeneous of
/// degree `g_x` on the simplex.
///
/// Both parts are homogenized to degree `max(g_p, g_x + 1)` by powers of
/// `sum alpha_i = 1`; every monomial of that degree yields one constraint.
/// Each coefficient `P_k` is additionally required positive definite.
pub fn gen_finsler_form<T: Scalar>(p: &Polytope<T>, g_p: usize, g_x: usize) -> Result<LmiSet<T>> {
    let (n, big_n) = (p.n(), p.len());
    let deg = g_p.max(g_x + 1);
    let p_exps = simplex_compositions(big_n, g_p);
    let x_exps = simplex_compositions(big_n, g_x);
    let mut set = LmiSet::new();
    let p_vars: Vec<usize> = p_exps
        .iter()
        .map(|e| set.add_var(exponent_name("P", e), VarKind::Symmetric, n, n))
        .collect();
    let x_vars: Vec<usize> = x_exps
        .iter()
        .map(|e| set.add_var(exponent_name("X", e), VarKind::General, 2 * n, n))
        .collect();

    // [A_i, -I]
    let m: Vec<RectMatrix<T>> = p
        .vertices()
        .iter()
        .map(|a| RectMatrix::from_fn(n, 2 * n, |r, c| if c < n { a.get(r, c) } else if c - n == r { -T::one() } else { T::zero() }))
        .collect();
    // unit contributions, computed once per scalar
    let p_units: Vec<SymMatrix<T>> = set.variables[p_vars[0]]
        .entries()
        .into_iter()
        .map(|(r, c)| {
            SymMatrix::from_lower_fn(2 * n, |i, j| {
                let hit = |a: usize, b: usize| (a == r && b == c) || (a == c && b == r);
                if i >= n && j < n && hit(i - n, j) {
                    T::one()
                } else {
                    T::zero()
                }
            })
        })
        .collect();
    let x_entries = set.variables[x_vars[0]].entries();
    let x_units: Vec<Vec<SymMatrix<T>>> = m
        .iter()
        .map(|mi| {
            x_entries
                .iter()
                .map(|&(r, c)| {
                    let mut xm = RectMatrix::zeros(2 * n, 2 * n);
                    for j in 0..2 * n {
                        xm.set(r, j, mi.get(c, j));
                    }
                    xm.symmetric_part().map(|s| s.scale(T::c(2.0)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    for &v in &p_vars {
        let c = positivity(&set, v, format!("{} > 0", set.variables[v].name))?;
        set.constraints.push(c);
    }
    for beta in simplex_compositions(big_n, deg) {
        let mut b = Builder::new(2 * n);
        for (gamma, &v) in p_exps.iter().zip(&p_vars) {
            if let Some(rest) = sub_exp(&beta, gamma) {
                let coef = T::from_count(multinomial(&rest));
                let off = set.variables[v].offset;
                for (k, u) in p_units.iter().enumerate() {
                    b.add(off + k, u, coef)?;
                }
            }
        }
        for (delta, &v) in x_exps.iter().zip(&x_vars) {
            let Some(rest) = sub_exp(&beta, delta) else { continue };
            for (i, units) in x_units.iter().enumerate() {
                if rest[i] == 0 {
                    continue;
                }
                let mut r = rest.clone();
                r[i] -= 1;
                let coef = T::from_count(multinomial(&r));
                let off = set.variables[v].offset;
                for (k, u) in units.iter().enumerate() {
                    b.add(off + k, u, coef)?;
                }
            }
        }
        set.constraints.push(b.finish(exponent_name("mono", &beta), Sense::NegDef));
    }
    Ok(set)
}

fn binomial_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn check_count_args(n: usize, big_n: usize) -> Result<()> {
    if n == 0 || big_n == 0 {
        return Err(Error::InvalidInput("n and N must be at least 1".into()));
    }
    Ok(())
}

/// `n (5n + 1) (N + g - 1)! / (2 g! (N - 1)!)`: `P` and `X` both of degree `g`.
pub fn count_full(n: usize, big_n: usize, g: usize) -> Result<BigUint> {
    check_count_args(n, big_n)?;
    let nn = BigUint::from(n);
    Ok(&nn * (BigUint::from(5u32) * &nn + 1u32) * binomial_big(big_n + g - 1, g) / 2u32)
}

/// `n (n + 1) (N + g - 1)! / (2 g! (N - 1)!) + 2 n^2 N`: `P` of degree `g`,
/// `X` linear.
pub fn count_reduced(n: usize, big_n: usize, g: usize) -> Result<BigUint> {
    check_count_args(n, big_n)?;
    let nn = BigUint::from(n);
    Ok(&nn * (&nn + 1u32) * binomial_big(big_n + g - 1, g) / 2u32 + BigUint::from(2u32) * &nn * &nn * big_n)
}

/// Margin per constraint: `-lambda_max` for `< 0`, `lambda_min` for `> 0`,
/// so that a positive margin means the constraint holds with room to spare.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport<T> {
    pub labels: Vec<String>,
    pub margins: Vec<T>,
    pub satisfied: Vec<bool>,
    pub all_satisfied: bool,
    pub first_violation: Option<usize>,
}

pub fn verify_vector<T: Scalar>(lmis: &LmiSet<T>, x: &[T], tols: &Tolerances<T>) -> Result<VerifyReport<T>> {
    let mats = lmis.evaluate(x)?;
    let rows = lmis
        .constraints
        .par_iter()
        .zip(mats.par_iter())
        .map(|(c, m)| match c.sense {
            Sense::NegDef => Ok((-m.lambda_max()?, m.is_neg_def(tols.def_tol)?)),
            Sense::PosDef => Ok((m.lambda_min()?, m.is_pos_def(tols.def_tol)?)),
        })
        .collect::<Result<Vec<(T, bool)>>>()?;
    let (margins, satisfied): (Vec<T>, Vec<bool>) = rows.into_iter().unzip();
    let first_violation = satisfied.iter().position(|s| !s);
    Ok(VerifyReport {
        labels: lmis.constraints.iter().map(|c| c.label.clone()).collect(),
        margins,
        satisfied,
        all_satisfied: first_violation.is_none(),
        first_violation,
    })
}

/// Evaluates every constraint at a named assignment.
pub fn verify_candidate<T: Scalar>(
    lmis: &LmiSet<T>,
    assignment: &BTreeMap<String, RectMatrix<T>>,
    tols: &Tolerances<T>,
) -> Result<VerifyReport<T>> {
    verify_vector(lmis, &lmis.flatten(assignment)?, tols)
}

/// `[[-mu A^T A, mu A^T + P], [mu A + P, -mu I]]`, i.e. `Q - mu B^T B` with
/// `Q = [[0, P], [P, 0]]`, `B = [A, -I]`.
pub fn finsler_block<T: Scalar>(a: &RectMatrix<T>, p: &SymMatrix<T>, mu: T) -> Result<SymMatrix<T>> {
    let n = a.rows();
    if a.shape() != (n, n) || p.dim() != n {
        return Err(Error::InvalidInput("A and P must be n x n".into()));
    }
    let ata = a.transpose().matmul(a)?;
    Ok(SymMatrix::from_lower_fn(2 * n, |i, j| match (i < n, j < n) {
        (true, true) => -mu * ata.get(i, j),
        (false, true) => mu * a.get(i - n, j) + p.get(i - n, j),
        (false, false) => {
            if i == j {
                -mu
            } else {
                T::zero()
            }
        }
        (true, false) => unreachable!("lower triangle only"),
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointwiseStability<T> {
    pub finsler_holds: bool,
    pub finsler_lambda_max: T,
    pub lyapunov_holds: bool,
    pub lyapunov_lambda_max: T,
}

/// Block test at `A(alpha)` together with the classical `A^T P + P A < 0`.
pub fn stability_finsler_pointwise<T: Scalar>(
    p: &Polytope<T>,
    alpha: &[T],
    pm: &SymMatrix<T>,
    mu: T,
    tols: &Tolerances<T>,
) -> Result<PointwiseStability<T>> {
    let a = p.at(alpha)?;
    let block = finsler_block(&a, pm, mu)?;
    let lyap = lyap_term(&a, &pm.to_rect())?;
    Ok(PointwiseStability {
        finsler_holds: block.is_neg_def(tols.def_tol)?,
        finsler_lambda_max: block.lambda_max()?,
        lyapunov_holds: lyap.is_neg_def(tols.def_tol)?,
        lyapunov_lambda_max: lyap.lambda_max()?,
    })
}

/// One `matno blkno i j value` line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdpaEntry {
    pub matno: usize,
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// Sparse SDPA problem: minimize `c^T x` subject to
/// `sum_k F_k x_k - F_0 >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpaProblem {
    pub comments: Vec<String>,
    pub m: usize,
    pub block_struct: Vec<i64>,
    pub c: Vec<f64>,
    pub entries: Vec<SdpaEntry>,
}

impl fmt::Display for SdpaProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.comments {
            writeln!(f, "\"{c}")?;
        }
        writeln!(f, "{}", self.m)?;
        writeln!(f, "{}", self.block_struct.len())?;
        let bs: Vec<String> = self.block_struct.iter().map(i64::to_string).collect();
        writeln!(f, "{}", bs.join(" "))?;
        let c: Vec<String> = self.c.iter().map(|v| format!("{v:e}")).collect();
        writeln!(f, "{}", c.join(" "))?;
        for e in &self.entries {
            writeln!(f, "{} {} {} {} {:e}", e.matno, e.block, e.i, e.j, e.value)?;
        }
        Ok(())
    }
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Parses the sparse SDPA format. Header punctuation (`{ } ( ) , =`) is
/// ignored, as are trailing non-numeric words on header lines.
pub fn parse_sdpa(text: &str) -> Result<SdpaProblem> {
    let mut comments = Vec::new();
    let mut lines = text.lines().peekable();
    while let Some(l) = lines.peek() {
        let t = l.trim_start();
        if let Some(c) = t.strip_prefix('"') {
            comments.push(c.to_string());
        } else if !t.starts_with('*') {
            break;
        }
        lines.next();
    }
    let clean = |l: &str| -> Vec<String> {
        l.chars()
            .map(|c| if "{}(),=".contains(c) { ' ' } else { c })
            .collect::<String>()
            .split_whitespace()
            .map(str::to_string)
            .collect()
    };
    let mut header: Vec<String> = Vec::new();
    let mut next_header = |want: usize, header: &mut Vec<String>| -> Result<Vec<String>> {
        while header.len() < want {
            let l = lines.next().ok_or_else(|| parse_err("truncated SDPA header"))?;
            header.extend(clean(l).into_iter().take_while(|t| t.parse::<f64>().is_ok()));
        }
        Ok(header.drain(..want).collect())
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| parse_err(format!("bad number {s:?}")));
    let int = |s: &str| s.parse::<i64>().map_err(|_| parse_err(format!("bad integer {s:?}")));
    let m = int(&next_header(1, &mut header)?[0])?;
    let nblocks = int(&next_header(1, &mut header)?[0])?;
    if m < 0 || nblocks < 1 {
        return Err(parse_err("m must be >= 0 and nblocks >= 1"));
    }
    let (m, nblocks) = (m as usize, nblocks as usize);
    let block_struct = next_header(nblocks, &mut header)?
        .iter()
        .map(|s| int(s))
        .collect::<Result<Vec<_>>>()?;
    if block_struct.iter().any(|&b| b == 0) {
        return Err(parse_err("zero block size"));
    }
    let c = next_header(m, &mut header)?
        .iter()
        .map(|s| num(s))
        .collect::<Result<Vec<_>>>()?;
    if !header.is_empty() {
        return Err(parse_err("unexpected data after the c vector"));
    }
    let mut entries = Vec::new();
    for l in lines {
        let toks = clean(l);
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(parse_err(format!("entry line needs 5 fields: {l:?}")));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|_| parse_err(format!("bad index {s:?}")));
        let e = SdpaEntry {
            matno: idx(&toks[0])?,
            block: idx(&toks[1])?,
            i: idx(&toks[2])?,
            j: idx(&toks[3])?,
            value: num(&toks[4])?,
        };
        let size = block_struct
            .get(e.block.wrapping_sub(1))
            .ok_or_else(|| parse_err(format!("block {} out of range", e.block)))?
            .unsigned_abs() as usize;
        if e.matno > m || e.i == 0 || e.j == 0 || e.i > size || e.j > size {
            return Err(parse_err(format!("entry out of range: {l:?}")));
        }
        entries.push(e);
    }
    Ok(SdpaProblem {
        comments,
        m,
        block_struct,
        c,
        entries,
    })
}

/// Variable map written next to an SDPA file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub matrix_variables: Vec<MatVar>,
    /// One entry per SDPA variable index (1-based).
    pub variables: Vec<SidecarScalar>,
    /// One entry per block.
    pub constraints: Vec<SidecarConstraint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarScalar {
    pub index: usize,
    pub name: String,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarConstraint {
    pub block: usize,
    pub label: String,
    pub sense: Sense,
}

fn push_upper<T: Scalar>(out: &mut Vec<SdpaEntry>, matno: usize, block: usize, m: &SymMatrix<T>, sign: f64) {
    for i in 0..m.dim() {
        for j in i..m.dim() {
            let v = m.get(i, j).to_f64_lossy();
            if v != 0.0 {
                out.push(SdpaEntry {
                    matno,
                    block,
                    i: i + 1,
                    j: j + 1,
                    value: sign * v,
                });
            }
        }
    }
}

impl<T: Scalar> LmiSet<T> {
    /// Strict inequalities become non-strict: `E < 0` is exported as
    /// `-E >= 0`, `E > 0` as `E >= 0`; one block per constraint, `c = 0`.
    pub fn to_sdpa(&self) -> SdpaProblem {
        let m = self.scalar_var_count();
        let mut entries = Vec::new();
        for (b, con) in self.constraints.iter().enumerate() {
            // F_0 = -constant for > 0, constant for < 0
            let (f0_sign, fk_sign) = match con.sense {
                Sense::NegDef => (1.0, -1.0),
                Sense::PosDef => (-1.0, 1.0),
            };
            push_upper(&mut entries, 0, b + 1, &con.constant, f0_sign);
            for (k, e) in &con.terms {
                push_upper(&mut entries, k + 1, b + 1, e, fk_sign);
            }
        }
        entries.sort_by_key(|e| (e.matno, e.block, e.i, e.j));
        SdpaProblem {
            comments: vec![format!(
                "finsler LMI export: {m} scalar variables, {} blocks",
                self.constraints.len()
            )],
            m,
            block_struct: self.constraints.iter().map(|c| c.dim() as i64).collect(),
            c: vec![0.0; m],
            entries,
        }
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            matrix_variables: self.variables.clone(),
            variables: self
                .scalar_labels()
                .into_iter()
                .enumerate()
                .map(|(k, (name, row, col))| SidecarScalar {
                    index: k + 1,
                    name,
                    row,
                    col,
                })
                .collect(),
            constraints: self
                .constraints
                .iter()
                .enumerate()
                .map(|(b, c)| SidecarConstraint {
                    block: b + 1,
                    label: c.label.clone(),
                    sense: c.sense,
                })
                .collect(),
        }
    }

    /// Writes `path` in sparse SDPA format and the variable map as JSON to
    /// `sidecar_path`.
    pub fn write_sdpa(&self, path: &Path, sidecar_path: &Path) -> Result<()> {
        std::fs::write(path, self.to_sdpa().to_string())?;
        std::fs::write(sidecar_path, serde_json::to_string_pretty(&self.sidecar())?)?;
        Ok(())
    }
}

/// Rebuilds the constraint set from an SDPA problem and its variable map.
pub fn lmi_set_from_sdpa(prob: &SdpaProblem, sidecar: &Sidecar) -> Result<LmiSet<f64>> {
    let nb = prob.block_struct.len();
    if sidecar.constraints.len() != nb {
        return Err(parse_err("sidecar and SDPA block counts differ"));
    }
    let count: usize = sidecar.matrix_variables.iter().map(MatVar::scalar_count).sum();
    if count != prob.m {
        return Err(parse_err("sidecar and SDPA variable counts differ"));
    }
    let dims: Vec<usize> = prob.block_struct.iter().map(|b| b.unsigned_abs() as usize).collect();
    let mut constants: Vec<SymMatrix<f64>> = dims.iter().map(|&d| SymMatrix::zeros(d)).collect();
    let mut terms: Vec<BTreeMap<usize, Vec<(usize, usize, f64)>>> = vec![BTreeMap::new(); nb];
    let mut const_entries: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nb];
    for e in &prob.entries {
        let (i, j) = (e.i.min(e.j) - 1, e.i.max(e.j) - 1);
        if e.matno == 0 {
            const_entries[e.block - 1].push((i, j, e.value));
        } else {
            terms[e.block - 1].entry(e.matno - 1).or_default().push((i, j, e.value));
        }
    }
    let fill = |d: usize, vals: &[(usize, usize, f64)], sign: f64| {
        let mut dense = vec![0.0; d * d];
        for &(i, j, v) in vals {
            dense[j * d + i] = sign * v;
        }
        SymMatrix::from_lower_fn(d, |r, c| dense[r * d + c])
    };
    let mut constraints = Vec::with_capacity(nb);
    for (b, sc) in sidecar.constraints.iter().enumerate() {
        let (f0_sign, fk_sign) = match sc.sense {
            Sense::NegDef => (1.0, -1.0),
            Sense::PosDef => (-1.0, 1.0),
        };
        constants[b] = fill(dims[b], &const_entries[b], f0_sign);
        constraints.push(LmiConstraint {
            label: sc.label.clone(),
            sense: sc.sense,
            constant: constants[b].clone(),
            terms: terms[b]
                .iter()
                .map(|(&k, vals)| (k, fill(dims[b], vals, fk_sign)))
                .collect(),
        });
    }
    Ok(LmiSet {
        variables: sidecar.matrix_variables.clone(),
        constraints,
    })
}
