//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Oracles are kept independent of the library: definiteness is decided by a
//! Cholesky factorization written here, kernels are fixed by construction,
//! and reference values come from closed forms.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use finsler_core::finsler_point::{
    certify, construct_mu, construct_x, mu_inf, mu_inf_bisect, mu_inf_fast, slack_form,
};
use finsler_core::pd_analysis::{
    bound_test_necessary, bound_test_sufficient, example2, profile, synth_constant, verify_constant,
    AuditStatus, BoundFns, GridPolicy,
};
use finsler_core::pd_models::{Builtin, MatrixFn, ParamDomain, QChoice};
use finsler_core::polytopic::{
    count_full, count_reduced, gen_finsler_form, gen_lyapunov_collected, gen_lyapunov_g1, lmi_set_from_sdpa,
    parse_sdpa, verify_candidate, Sidecar, VarKind,
};
use finsler_core::switching::{certify_product, ModeSet};
use finsler_core::{ExtendedReal, LmiSet, Polytope, RectMatrix, SymMatrix, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn tols() -> Tolerances {
    Tolerances::default()
}

/// Strict negative definiteness by Cholesky of `-A`.
fn chol_neg_def(a: &SymMatrix) -> bool {
    let n = a.dim();
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = -a.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    true
}

fn rand_rect(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> RectMatrix {
    RectMatrix::from_fn(rows, cols, |_, _| r.gen_range(-1.0..1.0))
}

fn rand_sym(r: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let a = rand_rect(r, n, n);
    SymMatrix::from_lower_fn(n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)))
}

/// Random orthogonal matrix by Gram-Schmidt on a random square matrix.
fn rand_orth(r: &mut ChaCha8Rng, n: usize) -> RectMatrix {
    loop {
        let a = rand_rect(r, n, n);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut v = a.column(j);
            for u in &cols {
                let d: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= d * y;
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-3 {
                ok = false;
                break;
            }
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
        if ok {
            return RectMatrix::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

/// `W M W^T` for symmetric `M`.
fn conj(w: &RectMatrix, m: &SymMatrix) -> SymMatrix {
    let p = w.matmul(&m.to_rect()).unwrap().matmul(&w.transpose()).unwrap();
    SymMatrix::from_lower_fn(p.rows(), |i, j| 0.5 * (p.get(i, j) + p.get(j, i)))
}

/// `B = U diag(sigma) [I_r 0] W^T`, `m x n`, rank `r`; the kernel is spanned
/// by the last `n - r` columns of `W`.
fn rank_profile_b(r: &mut ChaCha8Rng, m: usize, n: usize, rank: usize, w: &RectMatrix) -> RectMatrix {
    let u = rand_orth(r, m);
    let sigma: Vec<f64> = (0..rank).map(|_| r.gen_range(0.3..3.0)).collect();
    let core = RectMatrix::from_fn(m, n, |i, j| if i == j && i < rank { sigma[i] } else { 0.0 });
    u.matmul(&core).unwrap().matmul(&w.transpose()).unwrap()
}

/// `M` whose trailing `k x k` block is negative definite (`neg`) or has a
/// positive eigenvalue; the rest is random.
fn block_form(r: &mut ChaCha8Rng, n: usize, k: usize, neg: bool) -> SymMatrix {
    let m = rand_sym(r, n).scale(2.0);
    let start = n - k;
    let v = rand_orth(r, k);
    let d: Vec<f64> = (0..k)
        .map(|i| {
            if neg || i > 0 {
                -r.gen_range(0.5..3.0)
            } else {
                r.gen_range(0.5..3.0)
            }
        })
        .collect();
    let blk = conj(&v, &SymMatrix::from_diag(&d));
    SymMatrix::from_lower_fn(n, |i, j| {
        if i >= start && j >= start {
            blk.get(i - start, j - start)
        } else {
            m.get(i, j)
        }
    })
}

// 1

fn example1() -> Outcome {
    let start = Instant::now();
    let dom = ParamDomain::finite_set(vec![vec![0.5], vec![1.0], vec![1.5], vec![2.0]]).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (q, name) in [(QChoice::Linear, "s"), (QChoice::Exp, "e^s")] {
        let qf = MatrixFn::builtin(Builtin::Example1Q(q));
        let bf = MatrixFn::builtin(Builtin::Example1B);
        let prof = profile(&qf, &bf, &dom, &tols()).map_err(|e| e.to_string())?;
        for (s, m) in prof.points.iter().zip(&prof.mu_inf_values) {
            let want = q.eval(s[0]) / (s[0] * s[0]);
            let got = m.finite().ok_or(format!("q = {name}: mu_inf({}) = {m}", s[0]))?;
            let rel = (got - want).abs() / want;
            worst = worst.max(rel);
            if rel > 1e-8 {
                return Err(format!("q = {name}: mu_inf({}) = {got}, want {want}", s[0]));
            }
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(1) {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("8 points, max rel err {worst:.1e}, {t:.2?}"))
}

// 2

fn closed_form_witness() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    for case in 0..1000 {
        let n = r.gen_range(1..=6);
        let m = r.gen_range(n..=6);
        let w = rand_orth(&mut r, n);
        let b = rank_profile_b(&mut r, m, n, n, &w);
        let q = rand_sym(&mut r, n).scale(r.gen_range(0.1..10.0));
        let mu = construct_mu(&q, &b, &tols()).map_err(|e| format!("case {case}: construct_mu: {e}"))?;
        if !chol_neg_def(&q.combine(&b.gram(), -mu).unwrap()) {
            return Err(format!("case {case}: Q - mu B^T B not negative definite, mu = {mu}"));
        }
        let x = construct_x(&q, &b, &tols()).map_err(|e| format!("case {case}: construct_x: {e}"))?;
        if !chol_neg_def(&slack_form(&q, &x, &b).unwrap()) {
            return Err(format!("case {case}: Q + XB + B^T X^T not negative definite"));
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(10) {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("1000 instances, {t:.2?}"))
}

// 3

fn four_statement_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(3);
    let mut feasible = 0;
    let mut by_rank = [0usize; 7];
    for case in 0..1000 {
        let n = r.gen_range(1..=6);
        let rank = r.gen_range(0..=n);
        let m = r.gen_range(rank.max(1)..=6);
        let w = rand_orth(&mut r, n);
        let b = rank_profile_b(&mut r, m, n, rank, &w);
        let k = n - rank;
        // ground truth fixed by construction
        let truth = k == 0 || r.gen_bool(0.5);
        let q = conj(&w, &block_form(&mut r, n, k, truth));
        by_rank[rank] += 1;
        feasible += truth as usize;

        let cert = certify(&q, &b, &tols()).map_err(|e| format!("case {case}: {e}"))?;
        let verdicts = [cert.verdict_f1, cert.verdict_f2, cert.verdict_f3, cert.verdict_f4];
        if verdicts.iter().any(|&v| v != truth) || !cert.consistent {
            return Err(format!("case {case} (n={n}, rank={rank}): verdicts {verdicts:?}, truth {truth}"));
        }
        let inf = mu_inf(&q, &b, &tols()).map_err(|e| format!("case {case}: {e}"))?;
        if (inf != ExtendedReal::PosInf) != truth {
            return Err(format!("case {case}: mu_inf = {inf}, truth {truth}"));
        }
        match construct_x(&q, &b, &tols()) {
            Ok(x) if truth => {
                if !chol_neg_def(&slack_form(&q, &x, &b).unwrap()) {
                    return Err(format!("case {case}: constructed X fails"));
                }
            }
            Ok(_) => return Err(format!("case {case}: X constructed for an infeasible instance")),
            Err(e) if truth => return Err(format!("case {case}: construct_x failed: {e}")),
            Err(_) => {}
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(30) {
        return Err(format!("took {t:?}"));
    }
    Ok(format!("1000 instances ({feasible} feasible), by rank {:?}, {t:.2?}", &by_rank))
}

// 4

fn fast_vs_bisection() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for case in 0..500 {
        let n = r.gen_range(1..=6);
        let m = r.gen_range(n..=6);
        let w = rand_orth(&mut r, n);
        let b = rank_profile_b(&mut r, m, n, n, &w);
        let q = rand_sym(&mut r, n).scale(r.gen_range(0.1..10.0));
        let fast = mu_inf_fast(&q, &b, &tols()).map_err(|e| format!("case {case}: {e}"))?;
        let slow = mu_inf_bisect(&q, &b, &tols())
            .map_err(|e| format!("case {case}: {e}"))?
            .finite()
            .ok_or(format!("case {case}: bisection not finite"))?;
        let d = (fast - slow).abs() / (1.0 + fast.abs());
        worst = worst.max(d);
        if d > 1e-8 {
            return Err(format!("case {case}: fast {fast}, bisection {slow}"));
        }
    }
    Ok(format!("500 instances, max scaled diff {worst:.1e}"))
}

// 5

fn constant_synthesis() -> Outcome {
    let mut r = rng(5);
    let mut injected = 0;
    let mut accepted = 0;
    for case in 0..100 {
        let n = r.gen_range(2..=4);
        let rank = r.gen_range(1..n);
        let w = rand_orth(&mut r, n);
        let b0 = rank_profile_b(&mut r, rank, n, rank, &w);
        let m0 = block_form(&mut r, n, n - rank, true);
        // varies only outside the kernel block, so feasibility holds for all s
        let m1 = SymMatrix::from_lower_fn(n, |i, j| if i >= rank && j >= rank { 0.0 } else { r.gen_range(-1.0..1.0) });
        let qf = MatrixFn::custom(n, n, true, move |s: &[f64]| conj(&w, &m0.combine(&m1, -s[0]).unwrap()).to_rect());
        let bf = MatrixFn::custom(rank, n, false, move |s: &[f64]| b0.scale(1.0 + s[0] * s[0]));
        let dom = ParamDomain::interval(-1.0, 1.0, r.gen_range(5..=25)).unwrap();
        let prof = profile(&qf, &bf, &dom, &tols()).map_err(|e| format!("case {case}: {e}"))?;
        let sup = prof.sup_mu_inf.finite().ok_or(format!("case {case}: sup = {}", prof.sup_mu_inf))?;
        let margin = 1e-3 * (1.0 + sup.abs());
        let mu_bar = synth_constant(&qf, &bf, &prof, margin, &tols())
            .map_err(|e| format!("case {case}: {e}"))?
            .finite()
            .ok_or(format!("case {case}: no constant multiplier"))?;
        for s in &prof.points {
            let q = qf.eval_sym(s).unwrap();
            let b = bf.eval(s).unwrap();
            if !chol_neg_def(&q.combine(&b.gram(), -mu_bar).unwrap()) {
                return Err(format!("case {case}: mu_bar = {mu_bar} fails at s = {}", s[0]));
            }
        }
        for _ in 0..5 {
            let c = sup + r.gen_range(-2.0..2.0) * (1.0 + sup.abs());
            injected += 1;
            if verify_constant(&qf, &bf, &prof.points, c, &tols()).unwrap() {
                accepted += 1;
                if c < sup {
                    return Err(format!("case {case}: constant {c} verifies below sup {sup}"));
                }
                if sup > mu_bar {
                    return Err(format!("case {case}: sup {sup} above mu_bar {mu_bar}"));
                }
            }
        }
    }
    Ok(format!("100 problems verified; {accepted}/{injected} injected constants feasible, all >= sup"))
}

// 6

fn switching_pairs() -> Outcome {
    let margin = 1e-3;
    let qs = vec![SymMatrix::from_diag(&[-1.0, 1.0]), SymMatrix::from_diag(&[-1.0, 2.0])];
    let bs = vec![
        RectMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap(),
        RectMatrix::from_rows(&[vec![0.0, 2.0]]).unwrap(),
    ];
    let ms = ModeSet::product(qs.clone(), bs.clone()).map_err(|e| e.to_string())?;
    let cert = certify_product(&ms, margin, &tols()).map_err(|e| e.to_string())?;
    let mu_bar = cert.mu_bar.finite().ok_or("mu_bar not finite")?;
    // three of the pairs have rank-deficient B, so mu_inf comes from
    // bisection and carries its stopping width
    let want = 2.0 + margin;
    if (mu_bar - want).abs() > tols().bisect_tol * (1.0 + want) {
        return Err(format!("mu_bar = {mu_bar}, want {want}"));
    }
    if cert.pairs.len() != 4 {
        return Err(format!("{} pairs", cert.pairs.len()));
    }
    for &(i, j) in &cert.pairs {
        if !chol_neg_def(&qs[i].combine(&bs[j].gram(), -mu_bar).unwrap()) {
            return Err(format!("pair ({i}, {j}) fails"));
        }
    }
    Ok(format!("mu_bar = {mu_bar}, 4 pairs verified"))
}

// 7

/// Number of exponent vectors of total degree `g` in `big_n` variables, by
/// direct enumeration.
fn monomials(big_n: usize, g: usize) -> usize {
    fn rec(vars: usize, left: usize) -> usize {
        if vars == 1 {
            return 1;
        }
        (0..=left).map(|k| rec(vars - 1, left - k)).sum()
    }
    rec(big_n, g)
}

fn variable_counts() -> Outcome {
    let mut r = rng(7);
    let mut cases = 0;
    for n in 1..=4 {
        for big_n in 1..=5 {
            let p = Polytope::new((0..big_n).map(|_| rand_rect(&mut r, n, n)).collect()).unwrap();
            for g in 0..=3 {
                let full = gen_finsler_form(&p, g, g).map_err(|e| e.to_string())?;
                let reduced = gen_finsler_form(&p, g, 1).map_err(|e| e.to_string())?;
                let enumerate = |set: &LmiSet| -> (usize, usize, usize) {
                    let mut count = 0;
                    let (mut np, mut nx) = (0, 0);
                    for v in &set.variables {
                        count += v.entries().len();
                        match v.kind {
                            VarKind::Symmetric => np += 1,
                            VarKind::General => nx += 1,
                        }
                    }
                    (count, np, nx)
                };
                let (cf, fp, fx) = enumerate(&full);
                let (cr, rp, rx) = enumerate(&reduced);
                let want_f = count_full(n, big_n, g).unwrap();
                let want_r = count_reduced(n, big_n, g).unwrap();
                if want_f != cf.into() || want_r != cr.into() {
                    return Err(format!("(n, N, g) = ({n}, {big_n}, {g}): enumerated {cf}/{cr}, formulas {want_f}/{want_r}"));
                }
                if fp != monomials(big_n, g) || fx != fp || rp != fp || rx != monomials(big_n, 1) {
                    return Err(format!("(n, N, g) = ({n}, {big_n}, {g}): unexpected variable blocks"));
                }
                cases += 1;
            }
        }
    }
    let spot = (count_full(2, 3, 2).unwrap(), count_reduced(2, 3, 2).unwrap());
    if spot != (66u32.into(), 42u32.into()) {
        return Err(format!("(2, 3, 2) gives {} and {}", spot.0, spot.1));
    }
    Ok(format!("{cases} (n, N, g) cases exact; (2, 3, 2) -> 66, 42"))
}

// 8

fn example2_audit() -> Outcome {
    let dom = example2::square_grid(21).map_err(|e| e.to_string())?;
    let mut report = String::new();
    for margin in [1e-6, 1e-3, 1e-1, 1.0, 10.0] {
        let a = example2::audit(&dom, margin, &tols()).map_err(|e| e.to_string())?;
        let origin = a
            .audit
            .points
            .iter()
            .position(|x| x[0] == 0.0 && x[1] == 0.0)
            .ok_or("origin not on grid")?;
        let lmax = a.audit.claimed_lambda_max[origin];
        if lmax.abs() > 1e-12 || a.audit.status[origin] != AuditStatus::Boundary {
            return Err(format!("origin: lambda_max {lmax}, status {}", a.audit.status[origin].as_str()));
        }
        for (x, m) in a.audit.points.iter().zip(&a.audit.mu_inf) {
            let want = (1.0 + 3.0 * x[1] * x[1]).powi(2) * (-x[0]).exp();
            let got = m.finite().ok_or(format!("mu_inf at {x:?} = {m}"))?;
            if (got - want).abs() > 1e-8 {
                return Err(format!("rho_inf at {x:?}: {got}, closed form {want}"));
            }
        }
        if let Some(i) = a.corrected_verified.iter().position(|v| !v) {
            return Err(format!("corrected profile + {margin:e} fails at {:?}", a.audit.points[i]));
        }
        if report.is_empty() {
            report = format!(
                "origin lambda_max = {lmax:.1e} (boundary); claimed rho: {} boundary, {} violation; max dev {:.1e}",
                a.audit.count(AuditStatus::Boundary),
                a.audit.count(AuditStatus::Violation),
                a.max_abs_deviation
            );
        }
    }
    Ok(format!("{report}; corrected verified for margins 1e-6..10"))
}

// 9

fn bound_sandwich() -> Outcome {
    let mut r = rng(9);
    let (mut suff, mut finite, mut nec) = (0, 0, 0);
    for case in 0..200 {
        let n = r.gen_range(1..=4);
        let count = 11;
        let coeffs: Vec<(f64, f64, f64, f64)> = (0..n)
            .map(|_| {
                let a = r.gen_range(-2.0..1.0);
                let d = r.gen_range(-1.0..1.0);
                let c = r.gen_range(0.2..2.0);
                // roots on the grid, off the grid, or none in range
                let z = match r.gen_range(0..3) {
                    0 => r.gen_range(0..count) as f64 / (count - 1) as f64,
                    1 => r.gen_range(0.0..1.0),
                    _ => r.gen_range(1.5..3.0),
                };
                (a, d, c, z)
            })
            .collect();
        let cq = coeffs.clone();
        let qf = MatrixFn::custom(n, n, true, move |s: &[f64]| {
            let d: Vec<f64> = cq.iter().map(|&(a, d, _, _)| a + d * s[0]).collect();
            SymMatrix::from_diag(&d).to_rect()
        });
        let bf = MatrixFn::custom(n, n, false, move |s: &[f64]| {
            let d: Vec<f64> = coeffs.iter().map(|&(_, _, c, z)| c * (s[0] - z)).collect();
            SymMatrix::from_diag(&d).to_rect()
        });
        let dom = ParamDomain::interval(0.0, 1.0, count).unwrap();
        let bounds = BoundFns::exact(&qf, &bf);
        let policy = GridPolicy::default();
        let s = bound_test_sufficient(&bounds, &dom, &policy).map_err(|e| format!("case {case}: {e}"))?;
        let prof = profile(&qf, &bf, &dom, &tols()).map_err(|e| format!("case {case}: {e}"))?;
        let bounded = prof.sup_mu_inf != ExtendedReal::PosInf;
        let nv = bound_test_necessary(&bounds, &dom, &policy).map_err(|e| format!("case {case}: {e}"))?;
        if (s.passed && !bounded) || (bounded && !nv.passed) {
            return Err(format!(
                "case {case}: sufficient {}, sup {}, necessary {}",
                s.passed, prof.sup_mu_inf, nv.passed
            ));
        }
        suff += s.passed as usize;
        finite += bounded as usize;
        nec += nv.passed as usize;
    }
    Ok(format!("200 families: sufficient {suff} <= bounded {finite} <= necessary {nec}"))
}

// 10

fn random_assignment(r: &mut ChaCha8Rng, set: &LmiSet) -> BTreeMap<String, RectMatrix> {
    set.variables
        .iter()
        .map(|v| {
            let m = match v.kind {
                VarKind::Symmetric => rand_sym(r, v.rows).to_rect(),
                VarKind::General => rand_rect(r, v.rows, v.cols),
            };
            (v.name.clone(), m)
        })
        .collect()
}

fn sdpa_round_trip() -> Outcome {
    let mut r = rng(10);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut sets = 0;
    for case in 0..30 {
        let n = r.gen_range(1..=3);
        let big_n = r.gen_range(1..=3);
        let p = Polytope::new((0..big_n).map(|_| rand_rect(&mut r, n, n).scale(2.0)).collect()).unwrap();
        let set = match case % 3 {
            0 => gen_lyapunov_g1(&p),
            1 => gen_lyapunov_collected(&p),
            _ => gen_finsler_form(&p, r.gen_range(0..=2), r.gen_range(0..=2)),
        }
        .map_err(|e| format!("case {case}: {e}"))?;
        let (dat, vars) = (dir.path().join("lmi.dat-s"), dir.path().join("lmi.vars.json"));
        set.write_sdpa(&dat, &vars).map_err(|e| e.to_string())?;
        let prob = parse_sdpa(&std::fs::read_to_string(&dat).unwrap()).map_err(|e| format!("case {case}: {e}"))?;
        let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(&vars).unwrap()).map_err(|e| e.to_string())?;
        let back = lmi_set_from_sdpa(&prob, &sidecar).map_err(|e| format!("case {case}: {e}"))?;
        for _ in 0..3 {
            let a = random_assignment(&mut r, &set);
            let before = verify_candidate(&set, &a, &tols()).map_err(|e| e.to_string())?;
            let after = verify_candidate(&back, &a, &tols()).map_err(|e| e.to_string())?;
            if before.labels != after.labels || before.satisfied != after.satisfied {
                return Err(format!("case {case}: labels or verdicts differ"));
            }
            for (x, y) in before.margins.iter().zip(&after.margins) {
                worst = worst.max((x - y).abs());
                if (x - y).abs() > 1e-12 {
                    return Err(format!("case {case}: margin {x} became {y}"));
                }
            }
        }
        sets += 1;
    }
    Ok(format!("{sets} LMI sets, 3 candidates each, max margin diff {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("example 1 reproduction", example1),
        ("closed-form witness", closed_form_witness),
        ("four-statement equivalence", four_statement_equivalence),
        ("fast path vs bisection", fast_vs_bisection),
        ("constant synthesis", constant_synthesis),
        ("switching pairwise certificate", switching_pairs),
        ("variable counts", variable_counts),
        ("example 2 audit", example2_audit),
        ("bound-function sandwich", bound_sandwich),
        ("SDPA round trip", sdpa_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
