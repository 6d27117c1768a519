//! Canned instances: the logarithmic-family domain table, the alternating
//! family `ς_n`, and the particle-in-a-box model.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::conjugate::box_conjugate_scaled;
use crate::entropy::{fit_gibbs, FitStatus, Moments, Weight, MAX_PREFIX};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::numeric::CompensatedSum;
use crate::oracle::{alternating_gradient_series, Convergence};
use crate::sequences::{enumerate_box, BoxLevel, SigmaSequence};
use crate::series::{domain_info, eval, BoundaryClass};

/// `ς_n` for the alternating two-moment problem. Every family has
/// `ς_n / n → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum VarsigmaSequence {
    /// `n^k`, `k > 1`.
    PowerK(f64),
    /// `e^{αn}`, `α > 0`.
    ExpAlpha(f64),
    /// `e^{n²}`.
    ExpSquare,
}

impl VarsigmaSequence {
    pub fn power(k: f64) -> Result<Self> {
        if !(k > 1.0) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!("varsigma power needs k > 1, got {k}")));
        }
        Ok(VarsigmaSequence::PowerK(k))
    }

    pub fn exp_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("varsigma exponent needs α > 0, got {alpha}")));
        }
        Ok(VarsigmaSequence::ExpAlpha(alpha))
    }

    /// `ln ς_n`.
    pub fn ln_value(&self, n: u64) -> f64 {
        let x = n as f64;
        match *self {
            VarsigmaSequence::PowerK(k) => k * x.ln(),
            VarsigmaSequence::ExpAlpha(a) => a * x,
            VarsigmaSequence::ExpSquare => x * x,
        }
    }

    pub fn value(&self, n: u64) -> f64 {
        self.ln_value(n).exp()
    }
}

impl fmt::Display for VarsigmaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarsigmaSequence::PowerK(k) if *k == 2.0 => write!(f, "n2"),
            VarsigmaSequence::PowerK(k) => write!(f, "pow:{k}"),
            VarsigmaSequence::ExpAlpha(a) => write!(f, "exp:{a}"),
            VarsigmaSequence::ExpSquare => write!(f, "expsq"),
        }
    }
}

/// Grammar: `n2`, `pow:<k>`, `exp:<α>`, `expsq`.
impl FromStr for VarsigmaSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::InvalidArgument(format!("`{head}` needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad parameter in `{s}`: {e}")))
        };
        match (head, arg) {
            ("n2", None) => Ok(VarsigmaSequence::PowerK(2.0)),
            ("expsq", None) => Ok(VarsigmaSequence::ExpSquare),
            ("pow", a) => VarsigmaSequence::power(num(a)?),
            ("exp", a) => VarsigmaSequence::exp_alpha(num(a)?),
            _ => Err(Error::InvalidArgument(format!(
                "unknown varsigma `{s}` (expected n2, pow:<k>, exp:<alpha>, expsq)"
            ))),
        }
    }
}

/// Numerical evidence for one entry of the domain table.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub claim: String,
    /// Number of terms summed.
    pub n: u64,
    pub partial: f64,
    /// Certified lower bound on the full sum (or on a divergent quantity).
    pub lower: f64,
    pub upper: ExtReal,
    pub holds: bool,
    pub constants: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Example1Row {
    pub family: String,
    pub theta_range: String,
    pub domain: String,
    pub boundary_class: BoundaryClass,
    pub boundary_slope: String,
    pub alpha: ExtReal,
    pub gamma: ExtReal,
    pub f_at_boundary: ExtReal,
    pub expected_class: BoundaryClass,
    pub matches_expected: bool,
    pub certificates: Vec<Certificate>,
}

const CERT_TERMS: u64 = 1_000_000;

fn partial_sum(seq: &SigmaSequence, n: u64, term: impl Fn(f64) -> f64) -> f64 {
    let start = seq.start_index();
    (start..start + n).map(|k| term(seq.raw(k))).collect::<CompensatedSum>().value()
}

fn finite_at(seq: &SigmaSequence, y: f64, p: u32, claim: &str) -> Certificate {
    match eval(seq, y, p, 1e-10) {
        Ok(e) => Certificate {
            claim: claim.into(),
            n: e.truncation_index,
            partial: e.value,
            lower: e.value,
            upper: ExtReal::Finite(e.upper()),
            holds: e.upper().is_finite(),
            constants: json!({ "y": y, "p": p, "tail_bound": e.tail_bound }),
        },
        Err(err) => Certificate {
            claim: claim.into(),
            n: 0,
            partial: f64::NAN,
            lower: f64::NAN,
            upper: ExtReal::PosInfinity,
            holds: false,
            constants: json!({ "y": y, "p": p, "error": err.to_string() }),
        },
    }
}

/// `Σ_{n≥3} 1/(n (ln n)^β)` diverges for `β ≤ 1`: the terms are decreasing,
/// so the partial sum to `N` exceeds `∫_3^{N+1} dt / (t (ln t)^β)`.
fn log_divergence(claim: &str, partial: f64, beta: f64) -> Certificate {
    let n = CERT_TERMS;
    let (a, b) = (3f64.ln(), ((n + 3) as f64).ln());
    let lower = if beta == 1.0 {
        b.ln() - a.ln()
    } else {
        (b.powf(1.0 - beta) - a.powf(1.0 - beta)) / (1.0 - beta)
    };
    Certificate {
        claim: claim.into(),
        n,
        partial,
        lower,
        upper: ExtReal::PosInfinity,
        holds: partial >= lower && lower > 0.0,
        constants: json!({
            "comparison": "sum_{n>=3} 1/(n (ln n)^beta) >= integral_3^{N+1} dt/(t (ln t)^beta), unbounded in N",
            "beta": beta,
        }),
    }
}

/// The five-row classification of `dom f` for `σ_n = n^θ`,
/// `ln[n (ln n)^θ]` in its three regimes, and `ln ln n`.
pub fn example1_table() -> Result<Vec<Example1Row>> {
    let mut rows = Vec::new();
    let mut push = |seq: SigmaSequence, theta_range: &str, domain: &str, slope: &str, expected: BoundaryClass, certs: Vec<Certificate>| {
        let info = domain_info(&seq);
        rows.push(Example1Row {
            family: seq.label(),
            theta_range: theta_range.into(),
            domain: domain.into(),
            boundary_class: info.boundary_class,
            boundary_slope: slope.into(),
            alpha: ExtReal::from(info.alpha),
            gamma: info.gamma,
            f_at_boundary: info.f_at_boundary,
            expected_class: expected,
            matches_expected: info.boundary_class == expected,
            certificates: certs,
        });
    };

    let power = SigmaSequence::power(1.0)?;
    let at_zero = Certificate {
        claim: "f(0) diverges: every term equals 1".into(),
        n: CERT_TERMS,
        partial: partial_sum(&power, CERT_TERMS, |_| 1.0),
        lower: CERT_TERMS as f64,
        upper: ExtReal::PosInfinity,
        holds: true,
        constants: json!({ "comparison": "partial sum to N equals N" }),
    };
    let near = finite_at(&power, -0.01, 0, "f(-0.01) is finite");
    push(power, "theta > 0 (sigma = n^theta)", "(-inf, 0)", "n/a (open)", BoundaryClass::OpenBoundary, vec![at_zero, near]);

    let low = SigmaSequence::log_fam(0.5)?;
    let s = partial_sum(&low, CERT_TERMS, |sig| (-sig).exp());
    let div = log_divergence("f(-1) diverges", s, 0.5);
    let inside = finite_at(&low, -1.05, 0, "f(-1.05) is finite");
    push(low, "theta <= 1", "(-inf, -1)", "n/a (open)", BoundaryClass::OpenBoundary, vec![div, inside]);

    let mid = SigmaSequence::log_fam(1.5)?;
    let at = finite_at(&mid, -1.0, 0, "f(-1) is finite");
    // σ e^{-σ} ≥ ln n / (n (ln n)^θ) because σ ≥ ln n from n = 3 on.
    let s = partial_sum(&mid, CERT_TERMS, |sig| sig * (-sig).exp());
    let slope = log_divergence("f'_-(-1) = sum sigma e^{-sigma} diverges", s, 0.5);
    push(mid, "1 < theta <= 2", "(-inf, -1]", "infinite", BoundaryClass::ClosedInfiniteSlope, vec![at, slope]);

    let high = SigmaSequence::log_fam(3.0)?;
    let f_at = finite_at(&high, -1.0, 0, "f(-1) is finite");
    let g_at = finite_at(&high, -1.0, 1, "gamma = f'_-(-1) is finite");
    push(high, "theta > 2", "(-inf, -1]", "finite", BoundaryClass::ClosedFiniteSlope, vec![f_at, g_at]);

    push(SigmaSequence::log_log(), "sigma = ln ln n", "empty", "n/a (empty)", BoundaryClass::EmptyDomain, vec![loglog_certificate(5.0)]);
    Ok(rows)
}

/// For `y = -a < 0`, `e^{σ_n y} = (ln n)^{-a} ≥ 1/n` once `(ln n)^a ≤ n`,
/// so the partial sums dominate a harmonic tail.
fn loglog_certificate(a: f64) -> Certificate {
    // n / (ln n)^a increases for ln n > a; find the first n past e^a where
    // it reaches 1.
    let mut n0 = a.exp().ceil() as u64;
    while (n0 as f64).ln().powf(a) > n0 as f64 {
        n0 = n0 + n0 / 8 + 1;
    }
    let n_end = n0 + CERT_TERMS;
    let partial: f64 = (n0..n_end).map(|n| (n as f64).ln().powf(-a)).collect::<CompensatedSum>().value();
    let lower = ((n_end as f64) / n0 as f64).ln();
    Certificate {
        claim: format!("f({}) diverges", -a),
        n: CERT_TERMS,
        partial,
        lower,
        upper: ExtReal::PosInfinity,
        holds: partial >= lower,
        constants: json!({
            "comparison": "(ln n)^y >= 1/n for n >= n0, and sum_{n0}^{N} 1/n >= ln((N+1)/n0) is unbounded",
            "n0": n0,
            "y": -a,
        }),
    }
}

/// The particle-in-a-box model `h(x, y) = e^x f(κy)^3`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoxModel {
    pub kappa: f64,
    /// Number of levels materialized in reports.
    pub level_budget: usize,
}

impl Default for BoxModel {
    fn default() -> Self {
        BoxModel {
            kappa: 1.0,
            level_budget: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoxCase {
    /// `v > 3κu > 0`.
    Interior,
    /// `v = 3κu > 0`: all mass on the ground level.
    DegenerateSingleton,
    /// `u = v = 0`.
    Origin,
    /// `u = 0 < v`: `h* = 0` but no sequence meets the constraints.
    EmptyFeasibleSet,
    /// `h* = +∞`.
    OutsideDomain,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxReport {
    pub kappa: f64,
    pub u: f64,
    pub v: f64,
    pub case: BoxCase,
    pub h_star: ExtReal,
    pub status: FitStatus,
    pub entropy: ExtReal,
    /// `(x, y)` with `∇h(x, y) = (u, v)`.
    pub dual_point: Option<[f64; 2]>,
    pub moments: Option<Moments>,
    pub weights: Vec<Weight>,
    pub note: Option<String>,
}

impl BoxModel {
    pub fn new(kappa: f64, level_budget: usize) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
        }
        Ok(BoxModel { kappa, level_budget })
    }

    pub fn sequence(&self) -> SigmaSequence {
        SigmaSequence::box_triple(self.kappa).expect("validated kappa")
    }

    pub fn levels(&self) -> Vec<BoxLevel> {
        enumerate_box(self.kappa, self.level_budget)
    }

    /// `h(x, y)` for `y < 0`.
    pub fn h(&self, x: f64, y: f64) -> Result<f64> {
        Ok(x.exp() * eval(&self.sequence(), y, 0, 1e-13)?.estimate())
    }

    /// `∇h(x, y) = (e^x f_box(y), e^x f_box'(y))`.
    pub fn grad_h(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let seq = self.sequence();
        let e = x.exp();
        Ok([
            e * eval(&seq, y, 0, 1e-13)?.estimate(),
            e * eval(&seq, y, 1, 1e-13)?.estimate(),
        ])
    }

    /// Classification, conjugate value and Gibbs solution at `(u, v)`.
    pub fn report(&self, u: f64, v: f64, tol: f64) -> Result<BoxReport> {
        if u.is_nan() || v.is_nan() {
            return Err(Error::InvalidArgument("u and v must be numbers".into()));
        }
        let ground = 3.0 * self.kappa;
        let case = if u < 0.0 || v < 0.0 {
            BoxCase::OutsideDomain
        } else if u == 0.0 && v == 0.0 {
            BoxCase::Origin
        } else if u == 0.0 {
            BoxCase::EmptyFeasibleSet
        } else if (v / u - ground).abs() <= 4.0 * f64::EPSILON * ground {
            BoxCase::DegenerateSingleton
        } else if v < ground * u {
            BoxCase::OutsideDomain
        } else {
            BoxCase::Interior
        };
        let h_star = box_conjugate_scaled(self.kappa, u, v, tol)?;
        let fit = fit_gibbs(&self.sequence(), u, v, tol)?;
        let dual_point = match (fit.dual_x, fit.dual_y) {
            (Some(x), Some(y)) => Some([x, y]),
            _ => None,
        };
        let weights = fit
            .weights
            .as_ref()
            .map(|w| w.prefix.iter().take(self.level_budget.min(MAX_PREFIX)).copied().collect())
            .unwrap_or_default();
        let note = match case {
            BoxCase::EmptyFeasibleSet => Some(format!(
                "no nonnegative sequence has zero mass and energy {v}, although h*(0, v) = 0"
            )),
            BoxCase::DegenerateSingleton => Some(
                "minimizer concentrated on (1,1,1); no interior multiplier pair (x, y) attains it".into(),
            ),
            _ => fit.reason.clone(),
        };
        Ok(BoxReport {
            kappa: self.kappa,
            u,
            v,
            case,
            h_star,
            status: fit.status,
            entropy: fit.entropy_value,
            dual_point,
            moments: fit.achieved_moments,
            weights,
            note,
        })
    }
}

/// [`BoxModel::report`] for `κ = 1`.
pub fn box_report(u: f64, v: f64) -> Result<BoxReport> {
    BoxModel::default().report(u, v, 1e-12)
}

/// A flat table for CSV or JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn example1_csv_table() -> Result<Table> {
    let mut t = Table::new(&[
        "family",
        "theta_range",
        "domain",
        "boundary_class",
        "boundary_slope",
        "gamma",
        "f_at_boundary",
        "matches_expected",
        "certificates",
    ]);
    for r in example1_table()? {
        let certs: Vec<String> = r
            .certificates
            .iter()
            .map(|c| format!("{} [N={} partial={} lower={} upper={} holds={}]", c.claim, c.n, c.partial, c.lower, c.upper, c.holds))
            .collect();
        t.rows.push(vec![
            r.family,
            r.theta_range,
            r.domain,
            format!("{:?}", r.boundary_class),
            r.boundary_slope,
            r.gamma.to_string(),
            r.f_at_boundary.to_string(),
            r.matches_expected.to_string(),
            certs.join("; "),
        ]);
    }
    Ok(t)
}

/// Partial sums of the alternating gradient series on a grid of `x`.
pub fn example2_table(n: u64) -> Result<Table> {
    let mut t = Table::new(&[
        "varsigma",
        "x",
        "n",
        "first",
        "second",
        "classification",
        "last_ratio",
        "reference_first",
        "reference_second",
    ]);
    let families = [
        VarsigmaSequence::PowerK(2.0),
        VarsigmaSequence::ExpAlpha(1.0),
        VarsigmaSequence::ExpAlpha(2.0),
        VarsigmaSequence::ExpSquare,
    ];
    let xs = [-3.0, -2.0, -std::f64::consts::LN_2, -0.5, -0.1];
    for vs in families {
        for &x in &xs {
            let n_used = if vs == VarsigmaSequence::ExpSquare { n.min(25) } else { n };
            let s = alternating_gradient_series(x, &vs, n_used)?;
            t.rows.push(vec![
                vs.to_string(),
                x.to_string(),
                n_used.to_string(),
                s.first.to_string(),
                s.second.to_string(),
                match s.classification {
                    Convergence::Convergent => "convergent".into(),
                    Convergence::Divergent => "divergent".into(),
                },
                s.last_ratio.to_string(),
                opt(s.reference.map(|r| r[0])),
                opt(s.reference.map(|r| r[1])),
            ]);
        }
    }
    Ok(t)
}

/// Box reports over a grid of `(u, v)`.
pub fn box_table(model: &BoxModel, points: &[(f64, f64)], tol: f64) -> Result<Table> {
    let mut t = Table::new(&["u", "v", "case", "h_star", "entropy", "status", "x", "y", "mass", "energy"]);
    for &(u, v) in points {
        let r = model.report(u, v, tol)?;
        t.rows.push(vec![
            u.to_string(),
            v.to_string(),
            format!("{:?}", r.case),
            r.h_star.to_string(),
            r.entropy.to_string(),
            format!("{:?}", r.status),
            opt(r.dual_point.map(|d| d[0])),
            opt(r.dual_point.map(|d| d[1])),
            opt(r.moments.map(|m| m.mass)),
            opt(r.moments.map(|m| m.energy)),
        ]);
    }
    Ok(t)
}

/// Default `(u, v)` grid for the box table: the boundary ray, the axis and
/// interior points.
pub fn default_box_grid() -> Vec<(f64, f64)> {
    vec![
        (0.0, 0.0),
        (0.0, 2.0),
        (1.0, 2.0),
        (1.0, 3.0),
        (2.0, 6.0),
        (1.0, 3.5),
        (1.0, 4.0),
        (1.0, 6.0),
        (2.0, 10.0),
        (0.5, 8.0),
        (1.0, 20.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varsigma_grammar() {
        assert_eq!("n2".parse::<VarsigmaSequence>().unwrap(), VarsigmaSequence::PowerK(2.0));
        assert_eq!("exp:0.5".parse::<VarsigmaSequence>().unwrap(), VarsigmaSequence::ExpAlpha(0.5));
        assert_eq!("expsq".parse::<VarsigmaSequence>().unwrap(), VarsigmaSequence::ExpSquare);
        assert!("pow:1".parse::<VarsigmaSequence>().is_err());
        assert!("exp".parse::<VarsigmaSequence>().is_err());
    }

    #[test]
    fn box_report_cases() {
        let r = box_report(1.0, 3.0).unwrap();
        assert_eq!(r.case, BoxCase::DegenerateSingleton);
        assert_eq!(r.entropy, ExtReal::Finite(-1.0));
        let r = box_report(0.0, 2.0).unwrap();
        assert_eq!(r.case, BoxCase::EmptyFeasibleSet);
        assert_eq!(r.h_star, ExtReal::Finite(0.0));
        assert_eq!(r.status, FitStatus::Infeasible);
        let r = box_report(1.0, 4.0).unwrap();
        assert_eq!(r.case, BoxCase::Interior);
        let m = r.moments.unwrap();
        assert!((m.mass - 1.0).abs() < 1e-8 && (m.energy - 4.0).abs() < 1e-8);
    }

    #[test]
    fn gradient_round_trip() {
        let model = BoxModel::default();
        for &(x, y) in &[(0.0, -1.0), (1.0, -0.3), (-2.0, -2.5)] {
            let [u, v] = model.grad_h(x, y).unwrap();
            assert!(v > 3.0 * u && u > 0.0);
            let d = model.report(u, v, 1e-12).unwrap().dual_point.unwrap();
            assert!((d[0] - x).abs() < 1e-8 && (d[1] - y).abs() < 1e-8, "{d:?} vs ({x}, {y})");
        }
    }
}
