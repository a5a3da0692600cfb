//! JSON input documents (always `f64`) and their conversion to model types.
//!
//! A matrix function is either a plain nested array (constant) or an object
//! tagged by `"kind"`: `constant`, `poly`, `tabulated`, `piecewise_const`,
//! `builtin`. Piecewise bounds may be `null` for an unbounded side.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finsler_point::Tolerances;
use crate::pd_analysis::BoundFns;
use crate::pd_models::{Axis, Builtin, MatrixFn, ParamDomain, QChoice, Region};
use crate::polytopic::Polytope;
use crate::switching::ModeSet;
use crate::symlin::{RectMatrix, SymMatrix};

pub type Rows = Vec<Vec<f64>>;

pub fn rect(rows: &Rows) -> Result<RectMatrix<f64>> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    RectMatrix::from_rows(rows)
}

pub fn sym(rows: &Rows) -> Result<SymMatrix<f64>> {
    SymMatrix::from_rows(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval { lo: f64, hi: f64, count: usize },
    Box { axes: Vec<Axis<f64>> },
    Simplex { dim: usize, depth: usize },
    Points { points: Vec<Vec<f64>> },
}

impl DomainSpec {
    pub fn build(&self) -> Result<ParamDomain<f64>> {
        match self {
            DomainSpec::Interval { lo, hi, count } => ParamDomain::interval(*lo, *hi, *count),
            DomainSpec::Box { axes } => ParamDomain::box_grid(axes.clone()),
            DomainSpec::Simplex { dim, depth } => ParamDomain::simplex_grid(*dim, *depth),
            DomainSpec::Points { points } => ParamDomain::finite_set(points.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub exp: Vec<u32>,
    pub coef: Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub point: Vec<f64>,
    pub value: Rows,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub lo: Vec<Option<f64>>,
    pub hi: Vec<Option<f64>>,
    pub value: Rows,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QChoiceSpec {
    Linear,
    Exp,
    Jump { s_bar: f64, q_bar: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinName {
    Example1Q,
    Example1B,
    Example2Q,
    Example2B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixFnObject {
    Constant {
        value: Rows,
    },
    Poly {
        nvars: usize,
        rows: usize,
        cols: usize,
        terms: Vec<TermSpec>,
    },
    Tabulated {
        table: Vec<TableEntry>,
    },
    PiecewiseConst {
        regions: Vec<RegionSpec>,
    },
    Builtin {
        name: BuiltinName,
        #[serde(default)]
        q: Option<QChoiceSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixFnSpec {
    Constant(Rows),
    Object(MatrixFnObject),
}

fn first_shape<'a>(mut it: impl Iterator<Item = &'a Rows>) -> Result<(usize, usize)> {
    let m = it
        .next()
        .ok_or_else(|| Error::InvalidInput("matrix function has no values".into()))?;
    let r = rect(m)?;
    Ok(r.shape())
}

impl MatrixFnSpec {
    /// `symmetric` marks the `Q` role.
    pub fn build(&self, symmetric: bool) -> Result<MatrixFn<f64>> {
        let obj = match self {
            MatrixFnSpec::Constant(rows) => {
                return Ok(MatrixFn::constant(checked(rows, symmetric)?, symmetric));
            }
            MatrixFnSpec::Object(o) => o,
        };
        match obj {
            MatrixFnObject::Constant { value } => Ok(MatrixFn::constant(checked(value, symmetric)?, symmetric)),
            MatrixFnObject::Poly {
                nvars,
                rows,
                cols,
                terms,
            } => MatrixFn::poly(
                *rows,
                *cols,
                symmetric,
                *nvars,
                terms
                    .iter()
                    .map(|t| Ok((t.exp.clone(), checked(&t.coef, symmetric)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
            MatrixFnObject::Tabulated { table } => {
                let (r, c) = first_shape(table.iter().map(|e| &e.value))?;
                MatrixFn::tabulated(
                    r,
                    c,
                    symmetric,
                    table
                        .iter()
                        .map(|e| Ok((e.point.clone(), checked(&e.value, symmetric)?)))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            MatrixFnObject::PiecewiseConst { regions } => {
                let (r, c) = first_shape(regions.iter().map(|e| &e.value))?;
                let bound = |v: &[Option<f64>], inf: f64| v.iter().map(|b| b.unwrap_or(inf)).collect();
                MatrixFn::piecewise(
                    r,
                    c,
                    symmetric,
                    regions
                        .iter()
                        .map(|e| {
                            Ok(Region {
                                lo: bound(&e.lo, f64::NEG_INFINITY),
                                hi: bound(&e.hi, f64::INFINITY),
                                value: checked(&e.value, symmetric)?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?,
                )
            }
            MatrixFnObject::Builtin { name, q } => {
                let b = match name {
                    BuiltinName::Example1Q => Builtin::Example1Q(match q.unwrap_or(QChoiceSpec::Linear) {
                        QChoiceSpec::Linear => QChoice::Linear,
                        QChoiceSpec::Exp => QChoice::Exp,
                        QChoiceSpec::Jump { s_bar, q_bar } => QChoice::Jump { s_bar, q_bar },
                    }),
                    BuiltinName::Example1B => Builtin::Example1B,
                    BuiltinName::Example2Q => Builtin::Example2Q,
                    BuiltinName::Example2B => Builtin::Example2B,
                };
                Ok(MatrixFn::builtin(b))
            }
        }
    }
}

fn checked(rows: &Rows, symmetric: bool) -> Result<RectMatrix<f64>> {
    if symmetric {
        Ok(sym(rows)?.to_rect())
    } else {
        rect(rows)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolSpec {
    pub def_tol: Option<f64>,
    pub rank_tol: Option<f64>,
    pub bisect_tol: Option<f64>,
}

impl TolSpec {
    /// Later overrides win; missing fields keep the defaults.
    pub fn apply(&self, base: Tolerances<f64>) -> Tolerances<f64> {
        Tolerances {
            def_tol: self.def_tol.unwrap_or(base.def_tol),
            rank_tol: self.rank_tol.unwrap_or(base.rank_tol),
            bisect_tol: self.bisect_tol.unwrap_or(base.bisect_tol),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub ell_q: MatrixFnSpec,
    pub u_q: MatrixFnSpec,
    pub ell_r: MatrixFnSpec,
    pub u_r: MatrixFnSpec,
}

/// `(Q, B)` at one point or over a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(rename = "Q")]
    pub q: MatrixFnSpec,
    #[serde(rename = "B")]
    pub b: MatrixFnSpec,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    /// Evaluation point for single-point certification.
    #[serde(default)]
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Option<TolSpec>,
    /// User-supplied bound functions; exact eigenvalue bounds when absent.
    #[serde(default)]
    pub bounds: Option<BoundsSpec>,
}

pub struct Problem {
    pub q: MatrixFn<f64>,
    pub b: MatrixFn<f64>,
    pub domain: Option<ParamDomain<f64>>,
    pub point: Option<Vec<f64>>,
    pub tolerances: TolSpec,
    pub bounds: Option<BoundFns<f64>>,
}

impl ProblemSpec {
    pub fn build(&self) -> Result<Problem> {
        let bounds = match &self.bounds {
            Some(b) => Some(BoundFns {
                ell_q: b.ell_q.build(true)?,
                u_q: b.u_q.build(true)?,
                ell_r: b.ell_r.build(true)?,
                u_r: b.u_r.build(true)?,
            }),
            None => None,
        };
        Ok(Problem {
            q: self.q.build(true)?,
            b: self.b.build(false)?,
            domain: self.domain.as_ref().map(DomainSpec::build).transpose()?,
            point: self.point.clone(),
            tolerances: self.tolerances.unwrap_or_default(),
            bounds,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    #[serde(rename = "Q")]
    pub q: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
}

/// `{"modes": [...]}` for paired modes or `{"Qs": [...], "Bs": [...]}` for
/// the product form. A piecewise problem uses `{"Q", "B", "domain"}` with
/// piecewise-constant functions instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SwitchingSpec {
    Paired {
        modes: Vec<ModeSpec>,
        #[serde(default)]
        tolerances: Option<TolSpec>,
    },
    Product {
        #[serde(rename = "Qs")]
        qs: Vec<Rows>,
        #[serde(rename = "Bs")]
        bs: Vec<Rows>,
        #[serde(default)]
        tolerances: Option<TolSpec>,
    },
    Piecewise(ProblemSpec),
}

impl SwitchingSpec {
    pub fn tolerances(&self) -> TolSpec {
        match self {
            SwitchingSpec::Paired { tolerances, .. } | SwitchingSpec::Product { tolerances, .. } => {
                tolerances.unwrap_or_default()
            }
            SwitchingSpec::Piecewise(p) => p.tolerances.unwrap_or_default(),
        }
    }

    /// `None` for the piecewise form.
    pub fn mode_set(&self) -> Result<Option<ModeSet<f64>>> {
        match self {
            SwitchingSpec::Paired { modes, .. } => Ok(Some(ModeSet::paired(
                modes
                    .iter()
                    .map(|m| Ok((sym(&m.q)?, rect(&m.b)?)))
                    .collect::<Result<Vec<_>>>()?,
            )?)),
            SwitchingSpec::Product { qs, bs, .. } => Ok(Some(ModeSet::product(
                qs.iter().map(sym).collect::<Result<Vec<_>>>()?,
                bs.iter().map(rect).collect::<Result<Vec<_>>>()?,
            )?)),
            SwitchingSpec::Piecewise(_) => Ok(None),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LmiForm {
    /// Vertex conditions for every ordered pair.
    #[default]
    LyapunovG1,
    /// Monomial-collected affine Lyapunov conditions.
    Collected,
    /// Slack-variable relaxation with polynomial `P` and `X`.
    Finsler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    pub vertices: Vec<Rows>,
    #[serde(default)]
    pub form: LmiForm,
    #[serde(default)]
    pub g_p: Option<usize>,
    #[serde(default)]
    pub g_x: Option<usize>,
    /// Candidate values by variable name, checked when present.
    #[serde(default)]
    pub candidate: Option<BTreeMap<String, Rows>>,
    #[serde(default)]
    pub tolerances: Option<TolSpec>,
}

impl PolytopeSpec {
    pub fn polytope(&self) -> Result<Polytope<f64>> {
        Polytope::new(self.vertices.iter().map(rect).collect::<Result<Vec<_>>>()?)
    }

    pub fn candidate(&self) -> Result<Option<BTreeMap<String, RectMatrix<f64>>>> {
        self.candidate
            .as_ref()
            .map(|c| c.iter().map(|(k, v)| Ok((k.clone(), rect(v)?))).collect())
            .transpose()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountCase {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub g: usize,
}

/// A single case or `{"cases": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CountsSpec {
    One(CountCase),
    Many { cases: Vec<CountCase> },
}

impl CountsSpec {
    pub fn cases(&self) -> Vec<CountCase> {
        match self {
            CountsSpec::One(c) => vec![*c],
            CountsSpec::Many { cases } => cases.clone(),
        }
    }
}
