use std::path::{Path, PathBuf};

use finsler_core::finsler_point::certify;
use finsler_core::pd_analysis::{
    self, bound_test_necessary, bound_test_scalar, bound_test_sufficient, example2, grid_report, profile,
    synth_constant, synth_continuous, synth_from_bounds, synth_polynomial_x, verify_pointwise, BoundFns,
    BoundVerdict, GridPolicy,
};
use finsler_core::polytopic::{count_full, count_reduced, gen_finsler_form, gen_lyapunov_collected, gen_lyapunov_g1, verify_candidate};
use finsler_core::schema::{CountsSpec, LmiForm, Problem, ProblemSpec, PolytopeSpec, SwitchingSpec, TolSpec};
use finsler_core::switching::{certify_modes, certify_product, piecewise_mu, ModeSet};
use finsler_core::{Error, ExtendedReal, ParamDomain, Result, Tolerances};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::output::{ext, ext_csv, matrix, num, point, sci};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub input: Option<PathBuf>,
    pub tol_overrides: TolSpec,
    pub margin: f64,
    pub eps: f64,
    pub grid_refine: u32,
    pub sup_threshold: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Feasible,
    Infeasible,
}

pub struct Outcome {
    pub report: Value,
    pub csv: Option<(Vec<String>, Vec<Vec<String>>)>,
    /// Extra files for the output directory.
    pub files: Vec<(String, String)>,
    pub status: Status,
}

impl Outcome {
    fn new(report: Value, status: Status) -> Self {
        Self {
            report,
            csv: None,
            files: Vec::new(),
            status,
        }
    }
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Feasible
    } else {
        Status::Infeasible
    }
}

fn read_input<T: DeserializeOwned>(cfg: &Config) -> Result<T> {
    let path = cfg
        .input
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("--input is required for this command".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::InvalidInput(format!("cannot read {}: {e}", path.display()))
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn tolerances(cfg: &Config, file: TolSpec) -> Result<Tolerances> {
    let t = cfg.tol_overrides.apply(file.apply(Tolerances::default()));
    t.validate()?;
    Ok(t)
}

fn tol_json(t: &Tolerances) -> Value {
    json!({"def_tol": t.def_tol, "rank_tol": t.rank_tol, "bisect_tol": t.bisect_tol})
}

fn load_problem(cfg: &Config) -> Result<(Problem, Tolerances)> {
    let spec: ProblemSpec = read_input(cfg)?;
    let p = spec.build()?;
    let t = tolerances(cfg, p.tolerances)?;
    Ok((p, t))
}

fn domain(p: &Problem, cfg: &Config) -> Result<ParamDomain> {
    p.domain
        .as_ref()
        .map(|d| d.refine(cfg.grid_refine))
        .ok_or_else(|| Error::InvalidInput("problem needs a \"domain\"".into()))
}

fn coords_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|k| format!("s{k}")).collect()
}

pub fn certify_cmd(cfg: &Config) -> Result<Outcome> {
    let (p, tols) = load_problem(cfg)?;
    if p.domain.is_none() {
        let s = p.point.clone().unwrap_or_default();
        let q = p.q.eval_sym(&s)?;
        let b = p.b.eval(&s)?;
        let c = certify(&q, &b, &tols)?;
        let report = json!({
            "command": "certify",
            "point": point(&s),
            "n": q.dim(),
            "m": b.rows(),
            "rank": c.rank,
            "verdicts": {"F1": c.verdict_f1, "F2": c.verdict_f2, "F3": c.verdict_f3, "F4": c.verdict_f4},
            "consistent": c.consistent,
            "feasible": c.feasible(),
            "mu_inf": ext(c.mu_inf),
            "mu_witness": ext(c.mu_witness),
            "closed_form_mu": c.closed_form_mu.map(num),
            "x_witness": c.x_witness.as_ref().map(matrix),
            "kernel_lambda_max": c.kernel_lambda_max.map(num),
            "tolerances": tol_json(&tols),
        });
        return Ok(Outcome::new(report, status(c.feasible())));
    }
    let dom = domain(&p, cfg)?;
    let r = grid_report(&p.q, &p.b, &dom, cfg.margin, cfg.eps, cfg.grid_refine.max(1), &tols)?;
    let trend = r.trend.as_ref().map(|t| {
        json!({
            "grid_sizes": t.grid_sizes,
            "sups": t.sups.iter().map(|&v| ext(v)).collect::<Vec<_>>(),
            "growth_ratio": t.growth_ratio.map(num),
            "suspected_unbounded": t.suspected_unbounded,
        })
    });
    let report = json!({
        "command": "certify",
        "scope": "grid",
        "grid_size": r.profile.points.len(),
        "verdicts": {"F2a": r.f2a, "F2b": r.f2b, "F2c": r.f2c, "F2d": r.f2d, "F2e": r.f2e},
        "sup_mu_inf": ext(r.profile.sup_mu_inf),
        "argmax_point": r.profile.argmax_point.as_deref().map(point),
        "constant_mu": ext(r.constant_mu),
        "margin": cfg.margin,
        "trend": trend,
        "tolerances": tol_json(&tols),
    });
    Ok(Outcome::new(report, status(r.f2e)))
}

pub fn profile_cmd(cfg: &Config) -> Result<Outcome> {
    let (p, tols) = load_problem(cfg)?;
    let dom = domain(&p, cfg)?;
    let prof = profile(&p.q, &p.b, &dom, &tols)?;
    // a point counts as verified when max(mu_inf + eps, 0) passes there
    let (idx, mus): (Vec<usize>, Vec<f64>) = prof
        .mu_inf_values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| match v {
            ExtendedReal::Finite(m) => Some((i, (m + cfg.eps).max(0.0))),
            ExtendedReal::NegInf => Some((i, 0.0)),
            ExtendedReal::PosInf => None,
        })
        .unzip();
    let pts: Vec<Vec<f64>> = idx.iter().map(|&i| prof.points[i].clone()).collect();
    let mut verified = vec![false; prof.points.len()];
    for (i, ok) in idx.into_iter().zip(verify_pointwise(&p.q, &p.b, &pts, &mus, &tols)?) {
        verified[i] = ok;
    }
    let report = json!({
        "command": "profile",
        "grid_size": prof.points.len(),
        "sup_mu_inf": ext(prof.sup_mu_inf),
        "argmax_point": prof.argmax_point.as_deref().map(point),
        "any_infeasible": prof.any_infeasible,
        "eps": cfg.eps,
        "points": prof.points.iter().zip(&prof.mu_inf_values).zip(&verified).map(|((s, &v), &ok)| {
            json!({"s": point(s), "mu_inf": ext(v), "verified": ok})
        }).collect::<Vec<_>>(),
        "tolerances": tol_json(&tols),
    });
    let mut header = coords_header(dom.dim());
    header.extend(["mu_inf".to_string(), "verified".to_string()]);
    let rows = prof
        .points
        .iter()
        .zip(&prof.mu_inf_values)
        .zip(&verified)
        .map(|((s, &v), ok)| {
            let mut r: Vec<String> = s.iter().map(|&x| sci(x)).collect();
            r.push(ext_csv(v));
            r.push(ok.to_string());
            r
        })
        .collect();
    let mut out = Outcome::new(report, status(!prof.any_infeasible));
    out.csv = Some((header, rows));
    Ok(out)
}

fn error_value(e: &Error) -> Value {
    json!({"error": e.to_string()})
}

pub fn synth_cmd(cfg: &Config) -> Result<Outcome> {
    let (p, tols) = load_problem(cfg)?;
    let dom = domain(&p, cfg)?;
    let prof = profile(&p.q, &p.b, &dom, &tols)?;
    let constant = synth_constant(&p.q, &p.b, &prof, cfg.margin, &tols)?;
    let continuous = if prof.any_infeasible {
        None
    } else {
        Some(synth_continuous(&p.q, &p.b, &dom, cfg.eps, &tols)?)
    };
    let polynomial = if p.b.as_poly().is_some() && constant.is_finite() {
        match synth_polynomial_x(&p.q, &p.b, &dom, cfg.margin, &tols) {
            Ok((mu, x)) => {
                let poly = x.as_poly().expect("polynomial slack");
                json!({
                    "mu": mu,
                    "degree": poly.degree(),
                    "terms": poly.terms.iter().map(|(e, c)| json!({"exp": e, "coef": matrix(c)})).collect::<Vec<_>>(),
                })
            }
            Err(e) => error_value(&e),
        }
    } else {
        Value::Null
    };
    let bounds = p.bounds.clone().unwrap_or_else(|| BoundFns::exact(&p.q, &p.b));
    let check = Some((&p.q, &p.b));
    let from_bounds = match synth_from_bounds(&bounds, &dom, check, &tols) {
        Ok(mu) => json!({"mu": mu}),
        Err(e) => error_value(&e),
    };
    let report = json!({
        "command": "synth",
        "grid_size": prof.points.len(),
        "sup_mu_inf": ext(prof.sup_mu_inf),
        "constant": {"mu": ext(constant), "margin": cfg.margin},
        "continuous": continuous.as_ref().map(|c| json!({
            "eps": c.eps,
            "all_verified": c.all_verified(),
            "points": c.points.iter().zip(&c.values).zip(&c.verified).map(|((s, &v), &ok)| {
                json!({"s": point(s), "mu": v, "verified": ok})
            }).collect::<Vec<_>>(),
        })),
        "polynomial_x": polynomial,
        "from_bounds": from_bounds,
        "tolerances": tol_json(&tols),
    });
    let mut out = Outcome::new(report, status(constant.is_finite()));
    let mut header = coords_header(dom.dim());
    header.extend(["mu_inf", "mu_continuous", "verified"].map(String::from));
    let rows = prof
        .points
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut r: Vec<String> = s.iter().map(|&x| sci(x)).collect();
            r.push(ext_csv(prof.mu_inf_values[i]));
            match &continuous {
                Some(c) => {
                    r.push(sci(c.values[i]));
                    r.push(c.verified[i].to_string());
                }
                None => {
                    r.push("+inf".into());
                    r.push("false".into());
                }
            }
            r
        })
        .collect();
    out.csv = Some((header, rows));
    Ok(out)
}

fn verdict_json(v: &BoundVerdict<f64>) -> Value {
    json!({
        "passed": v.passed,
        "sup": ext(v.sup),
        "argmax_point": v.argmax.as_deref().map(point),
        "trend": v.trend.as_ref().map(|t| json!({
            "grid_sizes": t.grid_sizes,
            "sups": t.sups.iter().map(|&s| ext(s)).collect::<Vec<_>>(),
            "growth_ratio": t.growth_ratio.map(num),
            "suspected_unbounded": t.suspected_unbounded,
        })),
    })
}

pub fn bounds_cmd(cfg: &Config) -> Result<Outcome> {
    let (p, tols) = load_problem(cfg)?;
    let dom = domain(&p, cfg)?;
    let supplied = p.bounds.is_some();
    let bounds = match p.bounds.clone() {
        Some(b) => {
            b.validate(&p.q, &p.b, &dom, &tols)?;
            b
        }
        None => BoundFns::exact(&p.q, &p.b),
    };
    let policy = GridPolicy {
        sup_threshold: cfg.sup_threshold,
        refine_levels: cfg.grid_refine,
    };
    let nec = bound_test_necessary(&bounds, &dom, &policy)?;
    let suf = bound_test_sufficient(&bounds, &dom, &policy)?;
    let scalar = if p.q.shape() == (1, 1) && p.b.shape() == (1, 1) {
        let v = bound_test_scalar(&p.q, &p.b, &dom, &tols, &policy)?;
        json!({
            "passed": v.passed,
            "zero_set": v.zero_set.iter().map(|s| point(s)).collect::<Vec<_>>(),
            "zero_set_ok": v.zero_set_ok,
            "sup_ratio": ext(v.sup_ratio),
        })
    } else {
        Value::Null
    };
    let full_rank = match pd_analysis::synth_full_rank(&p.q, &p.b, &dom, &tols) {
        Ok(mu) => json!({"mu": mu}),
        Err(e) => error_value(&e),
    };
    let report = json!({
        "command": "bounds",
        "bounds": if supplied { "supplied" } else { "exact" },
        "grid_size": dom.len(),
        "necessary": verdict_json(&nec),
        "sufficient": verdict_json(&suf),
        "scalar": scalar,
        "full_rank_mu": full_rank,
        "tolerances": tol_json(&tols),
    });
    Ok(Outcome::new(report, status(nec.passed)))
}

pub fn switching_cmd(cfg: &Config) -> Result<Outcome> {
    let spec: SwitchingSpec = read_input(cfg)?;
    let tols = tolerances(cfg, spec.tolerances())?;
    match spec.mode_set()? {
        Some(ms) => {
            let c = match ms {
                ModeSet::Paired(_) => certify_modes(&ms, cfg.margin, &tols)?,
                ModeSet::Product { .. } => certify_product(&ms, cfg.margin, &tols)?,
            };
            let form = if matches!(ms, ModeSet::Paired(_)) { "paired" } else { "product" };
            let report = json!({
                "command": "switching",
                "form": form,
                "mu_bar": ext(c.mu_bar),
                "margin": cfg.margin,
                "pairs": c.pairs.iter().zip(&c.mu_inf).map(|(&(i, j), &v)| {
                    json!({"q": i, "b": j, "mu_inf": ext(v)})
                }).collect::<Vec<_>>(),
                "tolerances": tol_json(&tols),
            });
            Ok(Outcome::new(report, status(c.mu_bar.is_finite())))
        }
        None => {
            let SwitchingSpec::Piecewise(ps) = spec else { unreachable!("mode_set covers the other forms") };
            let p = ps.build()?;
            let dom = domain(&p, cfg)?;
            match piecewise_mu(&p.q, &p.b, &dom, cfg.margin, &tols) {
                Ok(mu) => {
                    let regions = mu.regions().expect("piecewise result");
                    let report = json!({
                        "command": "switching",
                        "form": "piecewise",
                        "margin": cfg.margin,
                        "regions": regions.iter().map(|r| json!({
                            "lo": point(&r.lo),
                            "hi": point(&r.hi),
                            "mu": r.value.get(0, 0),
                        })).collect::<Vec<_>>(),
                        "tolerances": tol_json(&tols),
                    });
                    Ok(Outcome::new(report, Status::Feasible))
                }
                Err(Error::InfeasibleRegion { region }) => {
                    let report = json!({
                        "command": "switching",
                        "form": "piecewise",
                        "infeasible_region": region,
                    });
                    Ok(Outcome::new(report, Status::Infeasible))
                }
                Err(e) => Err(e),
            }
        }
    }
}

pub fn polytopic_cmd(cfg: &Config) -> Result<Outcome> {
    let spec: PolytopeSpec = read_input(cfg)?;
    let tols = tolerances(cfg, spec.tolerances.unwrap_or_default())?;
    let poly = spec.polytope()?;
    let (g_p, g_x) = (spec.g_p.unwrap_or(1), spec.g_x.unwrap_or(1));
    let set = match spec.form {
        LmiForm::LyapunovG1 => gen_lyapunov_g1(&poly)?,
        LmiForm::Collected => gen_lyapunov_collected(&poly)?,
        LmiForm::Finsler => gen_finsler_form(&poly, g_p, g_x)?,
    };
    let form = match spec.form {
        LmiForm::LyapunovG1 => "lyapunov_g1",
        LmiForm::Collected => "collected",
        LmiForm::Finsler => "finsler",
    };
    let (n, big_n) = (poly.n(), poly.len());
    let counts = if spec.form == LmiForm::Finsler {
        json!({
            "count_full": count_full(n, big_n, g_p)?.to_string(),
            "count_reduced": count_reduced(n, big_n, g_p)?.to_string(),
        })
    } else {
        Value::Null
    };
    let mut ok = true;
    let candidate = match spec.candidate()? {
        Some(asg) => {
            let rep = verify_candidate(&set, &asg, &tols)?;
            ok = rep.all_satisfied;
            json!({
                "all_satisfied": rep.all_satisfied,
                "first_violation": rep.first_violation.map(|i| rep.labels[i].clone()),
                "constraints": rep.labels.iter().zip(&rep.margins).zip(&rep.satisfied).map(|((l, &m), &s)| {
                    json!({"label": l, "margin": m, "satisfied": s})
                }).collect::<Vec<_>>(),
            })
        }
        None => Value::Null,
    };
    let report = json!({
        "command": "polytopic",
        "form": form,
        "n": n,
        "N": big_n,
        "g_p": if spec.form == LmiForm::Finsler { json!(g_p) } else { Value::Null },
        "g_x": if spec.form == LmiForm::Finsler { json!(g_x) } else { Value::Null },
        "scalar_var_count": set.scalar_var_count(),
        "constraint_count": set.constraints.len(),
        "variables": set.variables.iter().map(|v| v.name.clone()).collect::<Vec<_>>(),
        "counts": counts,
        "candidate": candidate,
        "sdpa": {"file": "lmi.dat-s", "sidecar": "lmi.vars.json"},
    });
    let mut out = Outcome::new(report, status(ok));
    out.files.push(("lmi.dat-s".into(), set.to_sdpa().to_string()));
    out.files.push((
        "lmi.vars.json".into(),
        serde_json::to_string_pretty(&set.sidecar())? + "\n",
    ));
    Ok(out)
}

pub fn counts_cmd(cfg: &Config) -> Result<Outcome> {
    let spec: CountsSpec = read_input(cfg)?;
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for c in spec.cases() {
        let full = count_full(c.n, c.big_n, c.g)?;
        let reduced = count_reduced(c.n, c.big_n, c.g)?;
        let diff = if full >= reduced {
            (&full - &reduced).to_string()
        } else {
            format!("-{}", &reduced - &full)
        };
        let as_json = |v: &finsler_core::polytopic::BigUint| match u64::try_from(v) {
            Ok(x) => json!(x),
            Err(_) => json!(v.to_string()),
        };
        items.push(json!({
            "n": c.n, "N": c.big_n, "g": c.g,
            "count_full": as_json(&full),
            "count_reduced": as_json(&reduced),
            "difference": diff,
        }));
        rows.push(vec![
            c.n.to_string(),
            c.big_n.to_string(),
            c.g.to_string(),
            full.to_string(),
            reduced.to_string(),
            diff,
        ]);
    }
    let mut out = Outcome::new(json!({"command": "counts", "cases": items}), Status::Feasible);
    out.csv = Some((
        ["n", "N", "g", "count_full", "count_reduced", "difference"].map(String::from).to_vec(),
        rows,
    ));
    Ok(out)
}

/// `[-1, 1]^2` with 21 points per axis before refinement.
pub const AUDIT_GRID_COUNT: usize = 21;

pub fn audit_example2_cmd(cfg: &Config) -> Result<Outcome> {
    let file_tols = match &cfg.input {
        Some(_) => read_input::<TolSpec>(cfg)?,
        None => TolSpec::default(),
    };
    let tols = tolerances(cfg, file_tols)?;
    let dom = example2::square_grid(AUDIT_GRID_COUNT)?.refine(cfg.grid_refine);
    let a = example2::audit(&dom, cfg.margin, &tols)?;
    let au = &a.audit;
    let origin = au.points.iter().position(|x| x[0] == 0.0 && x[1] == 0.0);
    let report = json!({
        "command": "audit-example2",
        "claimed_rho": "exp(-x1)",
        "corrected_rho_inf": "(1 + 3 x2^2)^2 exp(-x1)",
        "grid_size": au.points.len(),
        "claimed": {
            "strict": au.count(pd_analysis::AuditStatus::Strict),
            "boundary": au.count(pd_analysis::AuditStatus::Boundary),
            "violation": au.count(pd_analysis::AuditStatus::Violation),
            "origin": origin.map(|i| json!({
                "lambda_max": au.claimed_lambda_max[i],
                "status": au.status[i].as_str(),
                "rho_inf": ext(au.mu_inf[i]),
            })),
        },
        "corrected": {
            "margin": a.margin,
            "all_verified": a.corrected_verified.iter().all(|&v| v),
            "max_abs_deviation_from_closed_form": a.max_abs_deviation,
        },
        "points": au.points.iter().enumerate().map(|(i, x)| json!({
            "x": point(x),
            "claimed_rho": au.claimed[i],
            "lambda_max": au.claimed_lambda_max[i],
            "status": au.status[i].as_str(),
            "rho_inf": ext(au.mu_inf[i]),
            "rho_inf_closed_form": a.rho_inf_closed_form[i],
            "corrected_verified": a.corrected_verified[i],
        })).collect::<Vec<_>>(),
        "tolerances": tol_json(&tols),
    });
    let header = [
        "x1",
        "x2",
        "claimed_rho",
        "lambda_max",
        "status",
        "rho_inf",
        "rho_inf_closed_form",
        "corrected_verified",
    ]
    .map(String::from)
    .to_vec();
    let rows = au
        .points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            vec![
                sci(x[0]),
                sci(x[1]),
                sci(au.claimed[i]),
                sci(au.claimed_lambda_max[i]),
                au.status[i].as_str().to_string(),
                ext_csv(au.mu_inf[i]),
                sci(a.rho_inf_closed_form[i]),
                a.corrected_verified[i].to_string(),
            ]
        })
        .collect();
    let mut out = Outcome::new(report, Status::Feasible);
    out.csv = Some((header, rows));
    Ok(out)
}

pub fn write_outputs(dir: &Path, name: &str, out: &Outcome, format: Format) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{name}.json")), crate::output::to_json_string(&out.report))?;
    if let (Format::Csv, Some((h, r))) = (format, &out.csv) {
        std::fs::write(dir.join(format!("{name}.csv")), crate::output::csv_string(h, r))?;
    }
    for (f, text) in &out.files {
        std::fs::write(dir.join(f), text)?;
    }
    Ok(())
}
