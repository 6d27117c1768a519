//! The verification suite: ten numbered checks `c1`..`c10`, each producing
//! [`VerificationReport`]s. `gibbs-series verify` and the acceptance tests
//! both run these.

use std::f64::consts::LN_2;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::conjugate::{box_conjugate, conjugate};
use crate::entropy::{
    alternating_attainment, alternating_witness, fit_gibbs, linear_minimizer_ratio, plateau_search, AltAttainment,
    FitStatus, WeightIndex,
};
use crate::error::{Error, Result};
use crate::numeric::Budget;
use crate::oracle::{
    alternating_gradient_series, check_box_gradient, check_fenchel_young, check_gradient_sum, primal_truncated,
    Convergence, Targets,
};
use crate::report::VerificationReport;
use crate::scenarios::{box_report, example1_table, BoxCase, BoxModel, VarsigmaSequence};
use crate::sequences::SigmaSequence;
use crate::series::{domain_info, eval};

pub const CLAIM_IDS: [&str; 10] = ["c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9", "c10"];

#[derive(Debug, Clone, Copy)]
pub struct ClaimOptions {
    /// Overrides the number of sampled points in sweeps.
    pub grid: Option<usize>,
    pub seed: u64,
    /// Worker threads for sweeps.
    pub jobs: usize,
    /// Term budget for witness searches.
    pub max_terms: Option<u64>,
}

impl Default for ClaimOptions {
    fn default() -> Self {
        ClaimOptions {
            grid: None,
            seed: 42,
            jobs: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            max_terms: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimOutcome {
    pub id: String,
    pub title: &'static str,
    pub pass: bool,
    pub checks: usize,
    pub failed: usize,
    pub reports: Vec<VerificationReport>,
    #[serde(skip)]
    pub elapsed_secs: f64,
}

impl ClaimOutcome {
    /// Reports whose claim name starts with `prefix`.
    pub fn part(&self, prefix: &str) -> Vec<&VerificationReport> {
        self.reports.iter().filter(|r| r.claim.starts_with(prefix)).collect()
    }

    pub fn part_passes(&self, prefix: &str) -> bool {
        let p = self.part(prefix);
        !p.is_empty() && p.iter().all(|r| r.pass)
    }
}

pub fn title(id: &str) -> Option<&'static str> {
    Some(match id {
        "c1" => "geometric series matches e^y/(1-e^y)",
        "c2" => "conjugate of the geometric series at u = 2",
        "c3" => "Gibbs weights (1/2)^n for (u, v) = (1, 2)",
        "c4" => "plateau slope and plateau witness for ln[n (ln n)^3]",
        "c5" => "box model: degenerate singleton and interior solution",
        "c6" => "gradient of the sum equals the sum of gradients",
        "c7" => "alternating gradient series and its convergence rule",
        "c8" => "attainment value and witnesses for the alternating problem",
        "c9" => "Fenchel-Young sweep",
        "c10" => "domain classification table",
        _ => return None,
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

pub fn run_claim(id: &str, opts: &ClaimOptions) -> Result<ClaimOutcome> {
    let title = title(id).ok_or_else(|| Error::InvalidArgument(format!("unknown claim `{id}` (expected c1..c10 or all)")))?;
    let start = Instant::now();
    let reports = match id {
        "c1" => c1(opts)?,
        "c2" => c2()?,
        "c3" => c3()?,
        "c4" => c4(opts)?,
        "c5" => c5()?,
        "c6" => c6(opts)?,
        "c7" => c7(opts)?,
        "c8" => c8()?,
        "c9" => c9(opts)?,
        "c10" => c10()?,
        _ => unreachable!(),
    };
    let failed = reports.iter().filter(|r| !r.pass).count();
    Ok(ClaimOutcome {
        id: id.to_string(),
        title,
        pass: failed == 0 && !reports.is_empty(),
        checks: reports.len(),
        failed,
        reports,
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all(opts: &ClaimOptions) -> Result<Vec<ClaimOutcome>> {
    CLAIM_IDS.iter().map(|id| run_claim(id, opts)).collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn error_report(claim: &str, params: serde_json::Value, e: &Error) -> VerificationReport {
    VerificationReport::compare(claim, params, f64::NAN, f64::NAN, 0.0)
        .with_pass(false)
        .with_meta(json!({ "error": e.to_string(), "kind": e.kind() }))
}

fn c1(opts: &ClaimOptions) -> Result<Vec<VerificationReport>> {
    let seq = SigmaSequence::linear();
    let ys = linspace(-10.0, -0.05, opts.grid.unwrap_or(50));
    let start = Instant::now();
    let mut reports = Vec::with_capacity(ys.len() + 1);
    for &y in &ys {
        let exact = y.exp() / -y.exp_m1();
        let e = eval(&seq, y, 0, 1e-14 * y.exp())?;
        let r = VerificationReport::compare("c1.value", json!({ "y": y }), e.estimate(), exact, 1e-12 * exact);
        reports.push(r);
    }
    let secs = start.elapsed().as_secs_f64();
    reports.push(
        VerificationReport::compare("c1.runtime", json!({ "points": ys.len() }), 0.0, 0.0, 0.0)
            .with_pass(secs < 1.0)
            .with_meta(json!({ "budget_secs": 1.0, "under_budget": secs < 1.0 })),
    );
    Ok(reports)
}

fn c2() -> Result<Vec<VerificationReport>> {
    let seq = SigmaSequence::linear();
    let exact = -1.0 - 2.0 * LN_2;
    let c = conjugate(&seq, 2.0, 1e-12)?;
    let value = c.value.finite().unwrap_or(f64::INFINITY);
    let y = c.attaining_y.unwrap_or(f64::NAN);
    let primal = primal_truncated(&seq, 1000, Targets::Energy(2.0), 1e-12)?;
    Ok(vec![
        VerificationReport::compare("c2.value", json!({ "u": 2.0 }), value, exact, 1e-9),
        VerificationReport::compare("c2.attaining_y", json!({ "u": 2.0 }), y, -LN_2, 1e-9),
        VerificationReport::compare("c2.primal", json!({ "u": 2.0, "N": 1000 }), primal.entropy, value, 1e-6)
            .with_meta(json!({ "iterations": primal.iterations })),
    ])
}

fn c3() -> Result<Vec<VerificationReport>> {
    let fit = fit_gibbs(&SigmaSequence::linear(), 1.0, 2.0, 1e-12)?;
    let mut reports = Vec::new();
    let q = linear_minimizer_ratio(2.0);
    reports.push(VerificationReport::compare("c3.ratio", json!({ "u": 2.0 }), q, 0.5, 1e-15));
    let law = fit.weights.ok_or_else(|| Error::numeric("c3", "no weights"))?;
    for w in law.prefix.iter().take(30) {
        let WeightIndex::Index(n) = w.index else { unreachable!() };
        reports.push(VerificationReport::compare(
            "c3.weight",
            json!({ "n": n }),
            w.weight,
            q.powi(n as i32),
            1e-10,
        ));
    }
    if law.prefix.len() < 30 {
        reports.push(
            VerificationReport::compare("c3.weight", json!({ "materialized": law.prefix.len() }), 0.0, 0.0, 0.0)
                .with_pass(false),
        );
    }
    Ok(reports)
}

fn c4(opts: &ClaimOptions) -> Result<Vec<VerificationReport>> {
    let seq = SigmaSequence::log_fam(3.0)?;
    let info = domain_info(&seq);
    let gamma = info.gamma.finite().ok_or_else(|| Error::numeric("c4", "gamma not finite"))?;
    let us: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|d| gamma + d).collect();
    let mut reports = Vec::new();
    let mut values = Vec::new();
    for &u in &us {
        values.push(conjugate(&seq, u, 1e-12)?.value.unwrap());
    }
    for i in 0..us.len() {
        for j in i + 1..us.len() {
            reports.push(VerificationReport::compare(
                "c4.slope",
                json!({ "u1": us[i], "u2": us[j], "gamma": gamma }),
                values[j] - values[i],
                -(us[j] - us[i]),
                1e-8,
            ));
        }
    }
    let budget = opts.max_terms.map(Budget::new).unwrap_or_default();
    for &u in &us {
        let params = json!({ "u": u, "eps": 1e-2, "max_terms": budget.limit() });
        match plateau_search(&seq, u, 1e-2, &budget) {
            Ok((w, _)) => reports.push(
                VerificationReport::compare("c4.witness", params, w.gap, 0.0, 1e-2)
                    .with_pass(w.gap <= 1e-2)
                    .with_meta(json!({
                        "support": w.support(),
                        "window_len": w.window_len,
                        "lambda": w.lambda,
                        "history": w.history,
                    })),
            ),
            Err(e) => reports.push(error_report("c4.witness", params, &e)),
        }
    }
    Ok(reports)
}

fn c5() -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    let s = box_report(1.0, 3.0)?;
    reports.push(
        VerificationReport::compare(
            "c5.singleton",
            json!({ "u": 1.0, "v": 3.0 }),
            s.entropy.finite().unwrap_or(f64::INFINITY),
            -1.0,
            1e-12,
        )
        .with_pass(
            s.case == BoxCase::DegenerateSingleton
                && s.status == FitStatus::BoundarySingleton
                && s.entropy.finite().is_some_and(|e| (e + 1.0).abs() <= 1e-12),
        ),
    );
    let r = box_report(1.0, 4.0)?;
    let m = r.moments.ok_or_else(|| Error::numeric("c5", "no moments"))?;
    reports.push(VerificationReport::compare("c5.mass", json!({ "u": 1.0, "v": 4.0 }), m.mass, 1.0, 1e-8));
    reports.push(VerificationReport::compare("c5.energy", json!({ "u": 1.0, "v": 4.0 }), m.energy, 4.0, 1e-8));
    let h = box_conjugate(1.0, 4.0, 1e-12)?.finite().unwrap_or(f64::INFINITY);
    let ent = r.entropy.finite().unwrap_or(f64::INFINITY);
    reports.push(
        VerificationReport::compare("c5.entropy", json!({ "u": 1.0, "v": 4.0 }), ent, h, 1e-7)
            .with_meta(json!({ "dual_point": r.dual_point })),
    );
    let primal = primal_truncated(
        &BoxModel::default().sequence(),
        200,
        Targets::MassEnergy { mass: 1.0, energy: 4.0 },
        1e-12,
    )?;
    reports.push(VerificationReport::compare(
        "c5.primal",
        json!({ "u": 1.0, "v": 4.0, "levels": 200 }),
        primal.entropy,
        ent,
        1e-6,
    ));
    Ok(reports)
}

fn c6(opts: &ClaimOptions) -> Result<Vec<VerificationReport>> {
    let n = opts.grid.unwrap_or(20);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6);
    let h = 1e-5;
    let tol = 1e-6;
    enum Job {
        Scalar(SigmaSequence, f64),
        Box(f64, f64),
    }
    let mut jobs = Vec::new();
    for seq in [SigmaSequence::linear(), SigmaSequence::quadratic()] {
        for _ in 0..n {
            jobs.push(Job::Scalar(seq.clone(), rng.gen_range(-5.0..-0.3)));
        }
    }
    for _ in 0..n {
        jobs.push(Job::Box(rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..-0.3)));
    }
    let pool = pool(opts.jobs)?;
    let out: Vec<Result<VerificationReport>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| match job {
                Job::Scalar(seq, y) => check_gradient_sum(seq, *y, h, tol),
                Job::Box(x, y) => check_box_gradient(1.0, *x, *y, h, tol),
            })
            .collect()
    });
    out.into_iter()
        .map(|r| {
            r.map(|mut r| {
                r.claim = format!("c6.{}", r.claim);
                r
            })
        })
        .collect()
}

fn c7(opts: &ClaimOptions) -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    let s = alternating_gradient_series(-LN_2, &VarsigmaSequence::PowerK(2.0), 200)?;
    reports.push(
        VerificationReport::compare("c7.identity", json!({ "x": -LN_2, "N": 200 }), s.second, -2.0 / 27.0, 1e-10)
            .with_meta(json!({ "reference": s.reference })),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x7);
    let mut drawn = 0;
    while drawn < opts.grid.unwrap_or(10) {
        let x: f64 = rng.gen_range(-4.0..-0.1);
        let a: f64 = rng.gen_range(0.1..3.0);
        if (x + a).abs() < 0.05 {
            continue;
        }
        drawn += 1;
        let g = alternating_gradient_series(x, &VarsigmaSequence::ExpAlpha(a), 200)?;
        let rule = if x + a < 0.0 {
            Convergence::Convergent
        } else {
            Convergence::Divergent
        };
        let mut r = VerificationReport::compare(
            "c7.classification",
            json!({ "x": x, "alpha": a }),
            g.last_ratio,
            (x + a).exp(),
            1e-9 * (x + a).exp(),
        )
        .with_meta(json!({ "numerical": g.classification, "rule": rule }));
        r.pass = g.classification == rule;
        reports.push(r);
    }
    Ok(reports)
}

fn c8() -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    let n2 = VarsigmaSequence::PowerK(2.0);
    let v_bar = match alternating_attainment(2.0, &n2, 1e-14)? {
        AltAttainment::Attained { v_bar, .. } => v_bar,
        AltAttainment::Divergent => f64::NAN,
    };
    reports.push(VerificationReport::compare("c8.attainment", json!({ "u": 2.0 }), v_bar, -2.0 / 27.0, 1e-12));
    for eps in [1e-1, 1e-2, 1e-3] {
        let params = json!({ "u": 2.0, "v": 0.0, "eps": eps });
        match alternating_witness(2.0, 0.0, eps, &n2, &Budget::default()) {
            Ok(w) => {
                let moments_ok = w.mass_residual.abs() <= 1e-12 && w.signed_residual.abs() <= 1e-12 * w.signed_scale.max(1.0);
                reports.push(
                    VerificationReport::compare("c8.witness", params, w.gap, 0.0, eps)
                        .with_pass(w.gap <= eps && moments_ok)
                        .with_meta(json!({
                            "prefix_len": w.prefix_len,
                            "pair_index": w.pair_index,
                            "mass_residual": w.mass_residual,
                            "signed_residual": w.signed_residual,
                        })),
                );
            }
            Err(e) => reports.push(error_report("c8.witness", params, &e)),
        }
    }
    Ok(reports)
}

fn c9(opts: &ClaimOptions) -> Result<Vec<VerificationReport>> {
    let n = opts.grid.unwrap_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9);
    let families = [
        (SigmaSequence::linear(), -6.0, -0.05),
        (SigmaSequence::quadratic(), -4.0, -0.05),
        (SigmaSequence::power(1.5)?, -4.0, -0.05),
        (SigmaSequence::log_fam(3.0)?, -4.0, -1.0),
        (SigmaSequence::box_triple(1.0)?, -3.0, -0.1),
    ];
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let k = rng.gen_range(0..families.len());
        let (seq, lo, hi) = &families[k];
        let y: f64 = rng.gen_range(*lo..*hi);
        let equality = rng.gen_bool(0.25);
        let u: Option<f64> = if equality { None } else { Some(rng.gen_range(0.0..12.0)) };
        samples.push((seq.clone(), y, u));
    }
    let pool = pool(opts.jobs)?;
    let out: Vec<Result<VerificationReport>> = pool.install(|| {
        samples
            .par_iter()
            .map(|(seq, y, u)| {
                let u = match u {
                    Some(u) => *u,
                    None => eval(seq, *y, 1, 1e-14)?.estimate(),
                };
                let mut r = check_fenchel_young(seq, *y, u, 1e-10, 1e-8)?;
                r.claim = "c9.fenchel_young".into();
                Ok(r)
            })
            .collect()
    });
    out.into_iter().collect()
}

fn c10() -> Result<Vec<VerificationReport>> {
    let mut reports = Vec::new();
    for row in example1_table()? {
        let certs_hold = row.certificates.iter().all(|c| c.holds);
        reports.push(
            VerificationReport::compare(
                "c10.row",
                json!({ "family": row.family, "theta_range": row.theta_range }),
                0.0,
                0.0,
                0.0,
            )
            .with_pass(row.matches_expected && certs_hold)
            .with_meta(json!({
                "class": row.boundary_class,
                "expected": row.expected_class,
                "gamma": row.gamma,
                "f_at_boundary": row.f_at_boundary,
                "certificates": row.certificates,
            })),
        );
    }
    if reports.len() != 5 {
        reports.push(
            VerificationReport::compare("c10.rows", json!({}), reports.len() as f64, 5.0, 0.0).with_pass(false),
        );
    }
    Ok(reports)
}
