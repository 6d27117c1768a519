//! Legendre–Fenchel conjugates: `exp*`, `f*` in every regime, `(ln f)*`,
//! and the two-moment conjugate `h*(u, v)` of `h(x, y) = e^x f(y)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::numeric::{find_root, Accuracy, RootOptions};
use crate::sequences::SigmaSequence;
use crate::series::{check_point, domain_info, eval, scaled_pair, scaled_sum, BoundaryClass, DomainInfo};

/// Which branch of the conjugate produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `u < 0`: `f* = +∞`.
    NegativeU,
    /// `u = 0`: `f*(0) = -inf f = 0`, not attained.
    Zero,
    /// `0 < u < γ`: attained at the unique `y` with `f'(y) = u`.
    Interior,
    /// `u = γ < ∞`: attained at `y = -α`.
    BoundaryGamma,
    /// `u > γ`: `f*(u) = -αu - f(-α)`.
    Plateau,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugateValue {
    pub value: ExtReal,
    pub regime: Regime,
    /// Point attaining the supremum, when there is one.
    pub attaining_y: Option<f64>,
    /// `|f'(attaining_y) - u|` for interior solutions.
    pub residual: Option<f64>,
}

/// `exp*(u) = u(ln u - 1)` for `u ≥ 0` (with `0 ln 0 = 0`), `+∞` for `u < 0`.
pub fn exp_conjugate(u: f64) -> ExtReal {
    if u < 0.0 {
        ExtReal::PosInfinity
    } else if u == 0.0 {
        ExtReal::Finite(0.0)
    } else {
        ExtReal::Finite(u * (u.ln() - 1.0))
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_nan() {
        return Err(Error::InvalidArgument(format!("{name} is NaN")));
    }
    Ok(())
}

fn non_empty(seq: &SigmaSequence) -> Result<DomainInfo> {
    let info = domain_info(seq);
    if info.boundary_class == BoundaryClass::EmptyDomain {
        return Err(Error::EmptyDomain);
    }
    Ok(info)
}

/// Upper end of the search interval: `-α` when `f'` or `φ` can be
/// evaluated there, otherwise `-α - 2^{-k}` for the first `k` with a sign
/// change, capped at `-1e-12` when `α = 0`.
fn upper_bracket<F>(info: &DomainInfo, mut g: F, what: &'static str) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let alpha = info.alpha;
    if info.boundary_class == BoundaryClass::ClosedFiniteSlope {
        let y = -alpha;
        return Ok((y, g(y)?));
    }
    let mut last = (f64::NAN, f64::NAN);
    for k in 0..=60 {
        let mut y = -alpha - (-(k as f64)).exp2();
        if alpha == 0.0 {
            y = y.min(-1e-12);
        }
        let v = g(y)?;
        last = (y, v);
        if v > 0.0 {
            return Ok(last);
        }
        if alpha == 0.0 && y == -1e-12 {
            break;
        }
    }
    Err(Error::numeric(
        what,
        format!(
            "target not bracketed below the domain boundary: at y = {:e} the residual is still {:e}",
            last.0, last.1
        ),
    ))
}

fn lower_bracket<F>(y_hi: f64, mut g: F, what: &'static str) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut last = (f64::NAN, f64::NAN);
    for k in 0..=12 {
        let y = y_hi - (k as f64).exp2();
        let v = g(y)?;
        last = (y, v);
        if v < 0.0 {
            return Ok(last);
        }
    }
    Err(Error::numeric(
        what,
        format!("no lower bracket: at y = {:e} the residual is still {:e}", last.0, last.1),
    ))
}

fn root_opts() -> RootOptions {
    RootOptions {
        xtol_abs: 1e-300,
        xtol_rel: 4.0 * f64::EPSILON,
        max_iter: 400,
    }
}

/// Solves `f'(y) = u` for `0 < u < γ`. Works with
/// `σ_min y + ln S_1(y) - ln u`, `S_1` the scaled derivative sum.
pub(crate) fn solve_f_prime(seq: &SigmaSequence, info: &DomainInfo, u: f64, acc: Accuracy) -> Result<f64> {
    let shift = seq.min_sigma();
    let inner = acc.with_tol(0.25 * acc.tol.max(1e-15) * shift.min(1.0));
    let ln_u = u.ln();
    let g = |y: f64| -> Result<f64> {
        let s1 = scaled_sum(seq, y, 1, shift, inner)?;
        Ok(shift * y + s1.mid().ln() - ln_u)
    };
    let (hi, g_hi) = upper_bracket(info, g, "conjugate root")?;
    let (lo, g_lo) = lower_bracket(hi, g, "conjugate root")?;
    find_root(g, lo, hi, g_lo, g_hi, root_opts())
}

/// Solves `φ(y) = v` for `σ_min < v < sup φ`.
pub(crate) fn solve_phi(seq: &SigmaSequence, info: &DomainInfo, v: f64, acc: Accuracy) -> Result<f64> {
    let ln_v = v.ln();
    let inner = acc.with_tol(acc.tol.max(1e-15));
    let g = |y: f64| -> Result<f64> {
        let (s0, s1) = scaled_pair(seq, y, inner)?;
        Ok(s1.mid().ln() - s0.mid().ln() - ln_v)
    };
    let (hi, g_hi) = upper_bracket(info, g, "phi inverse")?;
    let (lo, g_lo) = lower_bracket(hi, g, "phi inverse")?;
    find_root(g, lo, hi, g_lo, g_hi, root_opts())
}

/// `f*(u) = sup_y [yu - f(y)]`.
pub fn conjugate(seq: &SigmaSequence, u: f64, acc: impl Into<Accuracy>) -> Result<ConjugateValue> {
    let acc = acc.into();
    acc.validate()?;
    check_finite("u", u)?;
    let info = non_empty(seq)?;
    conjugate_with(seq, &info, u, acc)
}

pub(crate) fn conjugate_with(seq: &SigmaSequence, info: &DomainInfo, u: f64, acc: Accuracy) -> Result<ConjugateValue> {
    if u < 0.0 {
        return Ok(ConjugateValue {
            value: ExtReal::PosInfinity,
            regime: Regime::NegativeU,
            attaining_y: None,
            residual: None,
        });
    }
    if u == 0.0 {
        return Ok(ConjugateValue {
            value: ExtReal::Finite(0.0),
            regime: Regime::Zero,
            attaining_y: None,
            residual: None,
        });
    }
    if u == f64::INFINITY {
        return Err(Error::InvalidArgument("u must be finite".into()));
    }
    if let (ExtReal::Finite(gamma), ExtReal::Finite(f_alpha)) = (info.gamma, info.f_at_boundary) {
        if u >= gamma {
            let regime = if u <= gamma + info.gamma_bound {
                Regime::BoundaryGamma
            } else {
                Regime::Plateau
            };
            let f_alpha = f_alpha + 0.5 * info.f_at_boundary_bound;
            return Ok(ConjugateValue {
                value: ExtReal::Finite(-info.alpha * u - f_alpha),
                regime,
                attaining_y: Some(-info.alpha),
                residual: None,
            });
        }
    }
    let y = solve_f_prime(seq, info, u, acc)?;
    let d = eval(seq, y, 1, acc.with_tol(0.25 * acc.tol * u.max(1.0)))?;
    let residual = (d.estimate() - u).abs();
    if residual > acc.tol * u.max(1.0) {
        return Err(Error::numeric(
            "conjugate",
            format!("f'(y) = {} at y = {y:e} misses u = {u} by {residual:e}", d.estimate()),
        ));
    }
    let f = eval(seq, y, 0, acc.with_tol(0.25 * acc.tol))?;
    Ok(ConjugateValue {
        value: ExtReal::Finite(y * u - f.estimate()),
        regime: Regime::Interior,
        attaining_y: Some(y),
        residual: Some(residual),
    })
}

/// `(ln f)*(v)` together with the attaining point when there is one.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogConjugate {
    pub value: ExtReal,
    pub attaining_y: Option<f64>,
}

/// `(ln f)*(v) = sup_y [vy - ln f(y)]`.
pub fn log_f_conjugate(seq: &SigmaSequence, v: f64, acc: impl Into<Accuracy>) -> Result<ExtReal> {
    Ok(log_f_conjugate_point(seq, v, acc)?.value)
}

pub fn log_f_conjugate_point(seq: &SigmaSequence, v: f64, acc: impl Into<Accuracy>) -> Result<LogConjugate> {
    let acc = acc.into();
    acc.validate()?;
    check_finite("v", v)?;
    let info = non_empty(seq)?;
    log_f_conjugate_with(seq, &info, v, acc)
}

pub(crate) fn log_f_conjugate_with(
    seq: &SigmaSequence,
    info: &DomainInfo,
    v: f64,
    acc: Accuracy,
) -> Result<LogConjugate> {
    let sigma_min = seq.min_sigma();
    if v < sigma_min {
        return Ok(LogConjugate {
            value: ExtReal::PosInfinity,
            attaining_y: None,
        });
    }
    if v == sigma_min {
        return Ok(LogConjugate {
            value: ExtReal::Finite(-(seq.ground_multiplicity() as f64).ln()),
            attaining_y: None,
        });
    }
    if v == f64::INFINITY {
        return Err(Error::InvalidArgument("v must be finite".into()));
    }
    if let Some((sup_phi, ln_f_alpha)) = sup_phi(info) {
        if v >= sup_phi {
            return Ok(LogConjugate {
                value: ExtReal::Finite(-info.alpha * v - ln_f_alpha),
                attaining_y: Some(-info.alpha),
            });
        }
    }
    let y = solve_phi(seq, info, v, acc)?;
    let s0 = scaled_sum(seq, y, 0, sigma_min, acc.with_tol(0.25 * acc.tol))?;
    Ok(LogConjugate {
        value: ExtReal::Finite((v - sigma_min) * y - s0.mid().ln()),
        attaining_y: Some(y),
    })
}

/// `sup φ = γ / f(-α)` and `ln f(-α)` for closed finite-slope domains.
pub(crate) fn sup_phi(info: &DomainInfo) -> Option<(f64, f64)> {
    match (info.boundary_class, info.gamma, info.f_at_boundary) {
        (BoundaryClass::ClosedFiniteSlope, ExtReal::Finite(g), ExtReal::Finite(f)) => {
            let g = g + 0.5 * info.gamma_bound;
            let f = f + 0.5 * info.f_at_boundary_bound;
            Some((g / f, f.ln()))
        }
        _ => None,
    }
}

/// Conjugate of `h(x, y) = e^x f(y)`:
/// `h*(u, v) = u(ln u - 1) + u (ln f)*(v/u)` for `u > 0`,
/// `sup_{y ∈ dom f} yv = -αv` for `u = 0 ≤ v`, `+∞` otherwise.
pub fn pair_conjugate(seq: &SigmaSequence, u: f64, v: f64, acc: impl Into<Accuracy>) -> Result<ExtReal> {
    let acc = acc.into();
    acc.validate()?;
    check_finite("u", u)?;
    check_finite("v", v)?;
    let info = non_empty(seq)?;
    pair_conjugate_with(seq, &info, u, v, acc)
}

pub(crate) fn pair_conjugate_with(
    seq: &SigmaSequence,
    info: &DomainInfo,
    u: f64,
    v: f64,
    acc: Accuracy,
) -> Result<ExtReal> {
    if u < 0.0 || v < 0.0 {
        return Ok(ExtReal::PosInfinity);
    }
    if u == 0.0 {
        return Ok(ExtReal::Finite(-info.alpha * v + 0.0));
    }
    let inner = log_f_conjugate_with(seq, info, v / u, acc.with_tol(acc.tol / u.max(1.0)))?;
    Ok(match inner.value {
        ExtReal::Finite(l) => ExtReal::Finite(u * (u.ln() - 1.0) + u * l),
        ExtReal::PosInfinity => ExtReal::PosInfinity,
    })
}

/// `h*(u, v)` for the box model with `κ = 1`.
pub fn box_conjugate(u: f64, v: f64, acc: impl Into<Accuracy>) -> Result<ExtReal> {
    box_conjugate_scaled(1.0, u, v, acc)
}

/// `h*(u, v)` for `h(x, y) = e^x f(κy)^3`, `f(y) = Σ_{k≥1} e^{k² y}`:
/// `u(ln u - 1) + 3u (ln f)*(v / (3κu))` when `v ≥ 3κu > 0`, `0` when
/// `u = 0 ≤ v`, `+∞` otherwise.
pub fn box_conjugate_scaled(kappa: f64, u: f64, v: f64, acc: impl Into<Accuracy>) -> Result<ExtReal> {
    let acc = acc.into();
    acc.validate()?;
    check_finite("u", u)?;
    check_finite("v", v)?;
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
    }
    if u < 0.0 || v < 0.0 {
        return Ok(ExtReal::PosInfinity);
    }
    if u == 0.0 {
        return Ok(ExtReal::Finite(0.0));
    }
    let w = v / (3.0 * kappa * u);
    if w < 1.0 {
        return Ok(ExtReal::PosInfinity);
    }
    let quad = SigmaSequence::quadratic();
    let l = log_f_conjugate(&quad, w, acc.with_tol(acc.tol / (3.0 * u).max(1.0)))?;
    Ok(match l {
        ExtReal::Finite(l) => ExtReal::Finite(u * (u.ln() - 1.0) + 3.0 * u * l),
        ExtReal::PosInfinity => ExtReal::PosInfinity,
    })
}

/// `f(y) + f*(u) - yu`, nonnegative by Fenchel–Young.
pub fn fenchel_young_gap(seq: &SigmaSequence, y: f64, u: f64, acc: impl Into<Accuracy>) -> Result<ExtReal> {
    let acc = acc.into();
    check_point(seq, y, 0)?;
    let f = eval(seq, y, 0, acc.with_tol(0.25 * acc.tol))?;
    let c = conjugate(seq, u, acc)?;
    Ok(match c.value {
        ExtReal::Finite(c) => ExtReal::Finite(f.estimate() + c - y * u),
        ExtReal::PosInfinity => ExtReal::PosInfinity,
    })
}
