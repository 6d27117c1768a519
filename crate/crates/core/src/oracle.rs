//! Independent cross-checks: a finite-dimensional primal solver,
//! finite-difference gradients of the series, Fenchel–Young gaps and the
//! alternating gradient series. None of these reuse the certified tail
//! machinery they are meant to check, except as the "analytic" side.

use serde::Serialize;
use serde_json::json;

use crate::conjugate::{conjugate, fenchel_young_gap};
use crate::entropy::{Weight, WeightIndex};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::numeric::{Accuracy, CompensatedSum};
use crate::report::VerificationReport;
use crate::scenarios::VarsigmaSequence;
use crate::sequences::{enumerate_box, Family, SigmaSequence};
use crate::series::{check_point, eval};

/// The first `n` exponents of `seq` in flattened order.
pub fn flattened(seq: &SigmaSequence, n: usize) -> Vec<(WeightIndex, f64)> {
    match seq.family() {
        Family::BoxTriple { kappa } => enumerate_box(*kappa, n)
            .into_iter()
            .map(|l| {
                let (k, ll, m) = l.triple;
                (WeightIndex::Triple(k, ll, m), l.sigma)
            })
            .collect(),
        _ => {
            let start = seq.start_index();
            (start..start + n as u64)
                .map(|i| (WeightIndex::Index(i), seq.raw(i)))
                .collect()
        }
    }
}

/// `ln Σ e^{a_i}`.
fn log_sum_exp(a: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = a.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + a.map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// `ln Σ σ^p e^{σ y}` over a finite support.
fn ln_moment(sig: &[f64], p: u32, y: f64) -> f64 {
    log_sum_exp(sig.iter().map(move |&s| p as f64 * s.ln() + s * y))
}

/// Moment targets for [`primal_truncated`].
#[derive(Debug, Clone, Copy, Serialize)]
pub enum Targets {
    /// `Σ σ_n u_n = energy`.
    Energy(f64),
    /// `Σ u_n = mass`, `Σ σ_n u_n = energy`.
    MassEnergy { mass: f64, energy: f64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimalSolution {
    pub entropy: f64,
    pub x: f64,
    pub y: f64,
    pub weights: Vec<Weight>,
    pub iterations: u32,
    pub residual: f64,
}

/// Solves `min Σ_{n ≤ N} u_n (ln u_n - 1)` under the given moments by
/// damped Newton on the finite dual.
pub fn primal_truncated(seq: &SigmaSequence, n_terms: usize, targets: Targets, tol: f64) -> Result<PrimalSolution> {
    if n_terms < 2 {
        return Err(Error::InvalidArgument("the truncated problem needs at least two terms".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if matches!(seq.family(), Family::LogLog) {
        return Err(Error::EmptyDomain);
    }
    let support = flattened(seq, n_terms);
    let sig: Vec<f64> = support.iter().map(|s| s.1).collect();
    let (x, y, iterations, residual) = match targets {
        Targets::Energy(b) => {
            if !(b > 0.0) {
                return Err(Error::Infeasible(format!("energy target {b} must be positive")));
            }
            let (y, it, r) = newton_1d(&sig, b.ln(), tol)?;
            (0.0, y, it, r)
        }
        Targets::MassEnergy { mass, energy } => {
            let (lo, hi) = (sig[0], *sig.last().expect("nonempty"));
            let ratio = energy / mass;
            if !(mass > 0.0) || !(ratio > lo && ratio < hi) {
                return Err(Error::Infeasible(format!(
                    "energy per unit mass {ratio} must lie strictly inside ({lo}, {hi}) for the first {n_terms} terms"
                )));
            }
            newton_2d(&sig, mass.ln(), energy.ln(), tol)?
        }
    };
    let mut entropy = CompensatedSum::new();
    let weights: Vec<Weight> = support
        .iter()
        .map(|&(index, s)| {
            let lw = x + s * y;
            let w = lw.exp();
            entropy.add(w * (lw - 1.0));
            Weight { index, weight: w }
        })
        .collect();
    Ok(PrimalSolution {
        entropy: entropy.value(),
        x,
        y,
        weights,
        iterations,
        residual,
    })
}

fn newton_1d(sig: &[f64], ln_b: f64, tol: f64) -> Result<(f64, u32, f64)> {
    let r = |y: f64| ln_moment(sig, 1, y) - ln_b;
    let mut y = 0.0;
    let mut res = r(y);
    for it in 1..=500 {
        if res.abs() <= 0.1 * tol {
            return Ok((y, it, res.abs()));
        }
        let slope = (ln_moment(sig, 2, y) - ln_moment(sig, 1, y)).exp();
        let mut step = -res / slope;
        loop {
            let cand = y + step;
            let rc = r(cand);
            if rc.abs() < res.abs() || step.abs() < 1e-300 {
                y = cand;
                res = rc;
                break;
            }
            step *= 0.5;
        }
    }
    Err(Error::numeric("primal oracle", format!("1-D Newton stalled at y = {y}, residual {res:e}")))
}

fn newton_2d(sig: &[f64], ln_a: f64, ln_b: f64, tol: f64) -> Result<(f64, f64, u32, f64)> {
    let resid = |x: f64, y: f64| {
        let (l0, l1) = (ln_moment(sig, 0, y), ln_moment(sig, 1, y));
        (x + l0 - ln_a, x + l1 - ln_b)
    };
    let norm = |r: (f64, f64)| r.0.abs().max(r.1.abs());
    let mut y = 0.0;
    let mut x = ln_a - ln_moment(sig, 0, y);
    let mut r = resid(x, y);
    for it in 1..=500 {
        if norm(r) <= 0.1 * tol {
            return Ok((x, y, it, norm(r)));
        }
        let (l0, l1, l2) = (ln_moment(sig, 0, y), ln_moment(sig, 1, y), ln_moment(sig, 2, y));
        let (j12, j22) = ((l1 - l0).exp(), (l2 - l1).exp());
        let det = j22 - j12;
        if !(det > 0.0) {
            return Err(Error::numeric("primal oracle", format!("singular Jacobian at y = {y}")));
        }
        let dx0 = -(j22 * r.0 - j12 * r.1) / det;
        let dy0 = -(r.1 - r.0) / det;
        let mut t = 1.0;
        loop {
            let (xc, yc) = (x + t * dx0, y + t * dy0);
            let rc = resid(xc, yc);
            if norm(rc) < norm(r) || t < 1e-12 {
                x = xc;
                y = yc;
                r = rc;
                break;
            }
            t *= 0.5;
        }
    }
    Err(Error::numeric("primal oracle", format!("2-D Newton stalled, residual {:e}", norm(r))))
}

/// Default finite-difference step `1e-5 max(1, |y|)`.
pub fn default_step(y: f64) -> f64 {
    1e-5 * y.abs().max(1.0)
}

fn f_value(seq: &SigmaSequence, y: f64) -> Result<f64> {
    Ok(eval(seq, y, 0, 1e-15)?.estimate())
}

/// Central difference of `f` at `y` against `Σ σ_n e^{σ_n y}`.
pub fn check_gradient_sum(seq: &SigmaSequence, y: f64, h: f64, tolerance: f64) -> Result<VerificationReport> {
    check_point(seq, y + h, 0)?;
    let fd = (f_value(seq, y + h)? - f_value(seq, y - h)?) / (2.0 * h);
    let exact = eval(seq, y, 1, 1e-14)?.estimate();
    Ok(VerificationReport::compare(
        "gradient-sum",
        json!({ "sequence": seq.label(), "y": y, "h": h }),
        fd,
        exact,
        tolerance,
    )
    .with_meta(json!({ "stencil": "central" })))
}

/// `h(x, y) = e^x f(κy)^3` and its gradient
/// `(e^x f^3, 3κ e^x f^2 f')`, with `f(y) = Σ_{k≥1} e^{k² y}`.
pub fn box_h(kappa: f64, x: f64, y: f64) -> Result<(f64, [f64; 2])> {
    let q = SigmaSequence::quadratic();
    let f = eval(&q, kappa * y, 0, 1e-15)?.estimate();
    let d = eval(&q, kappa * y, 1, 1e-15)?.estimate();
    let e = x.exp();
    Ok((e * f.powi(3), [e * f.powi(3), 3.0 * kappa * e * f * f * d]))
}

/// Central differences of `h` against its gradient; the gap is the larger
/// of the two component gaps.
pub fn check_box_gradient(kappa: f64, x: f64, y: f64, h: f64, tolerance: f64) -> Result<VerificationReport> {
    let hv = |x: f64, y: f64| -> Result<f64> { Ok(box_h(kappa, x, y)?.0) };
    let fd = [
        (hv(x + h, y)? - hv(x - h, y)?) / (2.0 * h),
        (hv(x, y + h)? - hv(x, y - h)?) / (2.0 * h),
    ];
    let (_, grad) = box_h(kappa, x, y)?;
    let gaps = [(fd[0] - grad[0]).abs(), (fd[1] - grad[1]).abs()];
    let worst = if gaps[0] >= gaps[1] { 0 } else { 1 };
    Ok(VerificationReport::compare(
        "box-gradient",
        json!({ "kappa": kappa, "x": x, "y": y, "h": h }),
        fd[worst],
        grad[worst],
        tolerance,
    )
    .with_meta(json!({ "fd": fd, "analytic": grad, "component_gaps": gaps })))
}

/// One-sided directional derivatives `f'_+(y; ±1)` by Richardson
/// extrapolation, compared with `±f'(y)`.
pub fn check_directional(seq: &SigmaSequence, y: f64, h: f64, tolerance: f64) -> Result<VerificationReport> {
    check_point(seq, y + h, 0)?;
    let f0 = f_value(seq, y)?;
    let one_sided = |dir: f64| -> Result<f64> {
        let d = |t: f64| -> Result<f64> { Ok((f_value(seq, y + dir * t)? - f0) / t) };
        Ok(2.0 * d(h / 2.0)? - d(h)?)
    };
    let plus = one_sided(1.0)?;
    let minus = one_sided(-1.0)?;
    let exact = eval(seq, y, 1, 1e-14)?.estimate();
    let gap = (plus - exact).abs().max((minus + exact).abs());
    Ok(VerificationReport::compare(
        "directional-derivative",
        json!({ "sequence": seq.label(), "y": y, "h": h }),
        plus,
        exact,
        tolerance,
    )
    .with_pass(gap <= tolerance)
    .with_meta(json!({ "forward": plus, "backward": minus, "max_gap": gap, "stencil": "one-sided richardson" })))
}

/// `f(y) + f*(u) - yu ≥ -tolerance`; when `u = f'(y)` (to within
/// `1e-12 max(1, u)`) the gap must also be at most `equality_tol`.
pub fn check_fenchel_young(
    seq: &SigmaSequence,
    y: f64,
    u: f64,
    tolerance: f64,
    equality_tol: f64,
) -> Result<VerificationReport> {
    let acc = Accuracy::new(1e-12);
    let gap = match fenchel_young_gap(seq, y, u, acc)? {
        ExtReal::Finite(g) => g,
        ExtReal::PosInfinity => f64::INFINITY,
    };
    let d = eval(seq, y, 1, 1e-13)?.estimate();
    let equality = (d - u).abs() <= 1e-12 * u.max(1.0);
    let pass = gap >= -tolerance && (!equality || gap <= equality_tol);
    let fstar = conjugate(seq, u, acc)?;
    Ok(VerificationReport {
        claim: "fenchel-young".into(),
        params: json!({ "sequence": seq.label(), "y": y, "u": u }),
        lhs: gap,
        rhs: 0.0,
        abs_gap: gap.abs(),
        rel_gap: gap.abs(),
        tolerance: if equality { equality_tol } else { tolerance },
        pass,
        meta: json!({ "equality_case": equality, "f_prime": d, "conjugate": fstar }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Convergence {
    Convergent,
    Divergent,
}

/// Partial sums of `Σ_n ∇g_n(x, 0) = Σ_n (n e^{nx}, (-1)^n ς_n e^{nx})`.
#[derive(Debug, Clone, Serialize)]
pub struct AltGradientSeries {
    pub x: f64,
    pub n: u64,
    pub first: f64,
    pub second: f64,
    /// Numerical ratio test on the last terms of the second component.
    pub classification: Convergence,
    pub last_ratio: f64,
    /// `(f'(x), 8f''(2x) - f''(x))` for `ς_n = n²`, or
    /// `(f'(x), -e^{x+α}/(1+e^{x+α}))` for convergent `ς_n = e^{αn}`.
    pub reference: Option<[f64; 2]>,
}

fn linear_f1(x: f64) -> f64 {
    let e = x.exp();
    e / ((1.0 - e) * (1.0 - e))
}

fn linear_f2(x: f64) -> f64 {
    let e = x.exp();
    e * (1.0 + e) / (1.0 - e).powi(3)
}

pub fn alternating_gradient_series(x: f64, varsigma: &VarsigmaSequence, n: u64) -> Result<AltGradientSeries> {
    if !(x < 0.0) {
        return Err(Error::InvalidArgument(format!("x must be negative, got {x}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two terms".into()));
    }
    let mut first = CompensatedSum::new();
    let mut second = CompensatedSum::new();
    let ln_term = |k: u64| varsigma.ln_value(k) + k as f64 * x;
    for k in 1..=n {
        let kf = k as f64;
        first.add(kf * (kf * x).exp());
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        second.add(sign * ln_term(k).exp());
    }
    let last_ratio = (ln_term(n) - ln_term(n - 1)).exp();
    let classification = if last_ratio < 1.0 {
        Convergence::Convergent
    } else {
        Convergence::Divergent
    };
    let reference = match *varsigma {
        VarsigmaSequence::PowerK(k) if k == 2.0 => Some([linear_f1(x), 8.0 * linear_f2(2.0 * x) - linear_f2(x)]),
        VarsigmaSequence::ExpAlpha(a) if x + a < 0.0 => {
            let e = (x + a).exp();
            Some([linear_f1(x), -e / (1.0 + e)])
        }
        _ => None,
    };
    Ok(AltGradientSeries {
        x,
        n,
        first: first.value(),
        second: second.value(),
        classification,
        last_ratio,
        reference,
    })
}

/// `sup_{y ≤ ȳ} Σ_{k > n} e^{σ_k y}`: the terms are increasing in `y`, so the
/// supremum is the tail at `ȳ`, bounded by `f(ȳ)` minus the first `n` terms.
pub fn normal_convergence_tail(seq: &SigmaSequence, y_bar: f64, n: usize) -> Result<f64> {
    let f = eval(seq, y_bar, 0, 1e-14)?;
    let partial: f64 = flattened(seq, n)
        .iter()
        .map(|&(_, s)| (s * y_bar).exp())
        .collect::<CompensatedSum>()
        .value();
    Ok((f.upper() - partial).max(0.0))
}
