//! Certified evaluation of `f^(p)(y) = Σ_n σ_n^p e^{σ_n y}` and domain
//! classification of `f`.
//!
//! Every evaluation returns a bracket: the true value lies in
//! `[value, value + tail_bound]`. Three tail certificates are used:
//!
//! * geometric, for sequences with a positive increment gap;
//! * an incomplete-gamma integral bound, for `n^θ` with `θ < 1`;
//! * an integral-comparison bracket for `ln[n (ln n)^θ]`, where the tail is
//!   a convex decreasing function of `n` and the sum is squeezed between
//!   trapezoid and midpoint integrals.
//!
//! The box spectrum is evaluated through `f_box(y) = f_1(κy)^3` with
//! `f_1(y) = Σ_k e^{k² y}` and the Leibniz rule for derivatives.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::numeric::{integrate, ln_upper_gamma_bound, Accuracy, CompensatedSum};
use crate::sequences::{increment_gap, Family, SigmaSequence};

/// Where the domain `(-∞, -α) ⊂ dom f ⊂ (-∞, -α]` ends and how `f` behaves there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundaryClass {
    /// `dom f = ∅`.
    EmptyDomain,
    /// `dom f = (-∞, -α)`, `γ = ∞`.
    OpenBoundary,
    /// `dom f = (-∞, -α]`, `f'_-(-α) = γ = ∞`.
    ClosedInfiniteSlope,
    /// `dom f = (-∞, -α]`, `γ < ∞`.
    ClosedFiniteSlope,
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainInfo {
    /// `+∞` (serialized as `"+inf"`) for an empty domain.
    #[serde(serialize_with = "crate::report::ser_f64_ext")]
    pub alpha: f64,
    pub boundary_class: BoundaryClass,
    /// `γ = Σ σ_n e^{-σ_n α}`.
    pub gamma: ExtReal,
    /// Width of the certified bracket `[gamma, gamma + gamma_bound]`.
    pub gamma_bound: f64,
    pub f_at_boundary: ExtReal,
    pub f_at_boundary_bound: f64,
}

impl DomainInfo {
    /// Whether `y` is in `int(dom f)`.
    pub fn is_interior(&self, y: f64) -> bool {
        self.boundary_class != BoundaryClass::EmptyDomain && y < -self.alpha
    }

    pub fn is_closed(&self) -> bool {
        matches!(
            self.boundary_class,
            BoundaryClass::ClosedFiniteSlope | BoundaryClass::ClosedInfiniteSlope
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesEval {
    pub value: f64,
    pub derivative_order: u32,
    pub truncation_index: u64,
    pub tail_bound: f64,
    pub requested_tol: f64,
}

impl SeriesEval {
    /// Midpoint of the certified bracket.
    pub fn estimate(&self) -> f64 {
        self.value + 0.5 * self.tail_bound
    }

    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

/// The true sum lies in `[lo, lo + width]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bracket {
    pub lo: f64,
    pub width: f64,
    pub last_index: u64,
}

impl Bracket {
    pub fn mid(&self) -> f64 {
        self.lo + 0.5 * self.width
    }
}

fn classify(seq: &SigmaSequence) -> (f64, BoundaryClass) {
    match seq.family() {
        Family::Linear | Family::Power { .. } | Family::Quadratic | Family::BoxTriple { .. } => {
            (0.0, BoundaryClass::OpenBoundary)
        }
        Family::LogFam { theta } => {
            let class = if *theta <= 1.0 {
                BoundaryClass::OpenBoundary
            } else if *theta <= 2.0 {
                BoundaryClass::ClosedInfiniteSlope
            } else {
                BoundaryClass::ClosedFiniteSlope
            };
            (1.0, class)
        }
        Family::LogLog => (f64::INFINITY, BoundaryClass::EmptyDomain),
        Family::Custom(c) => (c.declared_alpha, c.declared_boundary),
    }
}

/// Classifies `dom f` and computes `γ` and `f(-α)` where they are finite.
pub fn domain_info(seq: &SigmaSequence) -> DomainInfo {
    let (alpha, class) = classify(seq);
    let mut info = DomainInfo {
        alpha,
        boundary_class: class,
        gamma: ExtReal::PosInfinity,
        gamma_bound: 0.0,
        f_at_boundary: ExtReal::PosInfinity,
        f_at_boundary_bound: 0.0,
    };
    let boundary_sum = |p: u32| -> (ExtReal, f64) {
        let acc = Accuracy::new(1e-12);
        match scaled_sum(seq, -alpha, p, 0.0, acc) {
            Ok(b) => (ExtReal::Finite(b.lo), b.width),
            Err(Error::BudgetExceeded { best, .. }) => (ExtReal::Finite(best.value), best.tail_bound),
            Err(_) => (ExtReal::PosInfinity, 0.0),
        }
    };
    match class {
        BoundaryClass::ClosedFiniteSlope => {
            (info.gamma, info.gamma_bound) = boundary_sum(1);
            (info.f_at_boundary, info.f_at_boundary_bound) = boundary_sum(0);
        }
        BoundaryClass::ClosedInfiniteSlope => {
            (info.f_at_boundary, info.f_at_boundary_bound) = boundary_sum(0);
        }
        BoundaryClass::OpenBoundary | BoundaryClass::EmptyDomain => {}
    }
    info
}

/// Checks that `f^(p)` may be evaluated at `y`.
pub(crate) fn check_point(seq: &SigmaSequence, y: f64, p: u32) -> Result<()> {
    let (alpha, class) = classify(seq);
    if class == BoundaryClass::EmptyDomain {
        return Err(Error::EmptyDomain);
    }
    if !y.is_finite() {
        return Err(Error::InvalidArgument(format!("y must be finite, got {y}")));
    }
    let ok = if y < -alpha {
        true
    } else if y == -alpha {
        match class {
            BoundaryClass::ClosedFiniteSlope => p <= 1,
            BoundaryClass::ClosedInfiniteSlope => p == 0,
            _ => false,
        }
    } else {
        false
    };
    if ok {
        Ok(())
    } else {
        Err(Error::OutsideDomain {
            y,
            p,
            info: Box::new(domain_info(seq)),
        })
    }
}

/// `f^(p)(y)` with a certified tail bound not exceeding `acc.tol`.
pub fn eval(seq: &SigmaSequence, y: f64, p: u32, acc: impl Into<Accuracy>) -> Result<SeriesEval> {
    let acc = acc.into();
    acc.validate()?;
    check_point(seq, y, p)?;
    let b = scaled_sum(seq, y, p, 0.0, acc)?;
    Ok(SeriesEval {
        value: b.lo,
        derivative_order: p,
        truncation_index: b.last_index,
        tail_bound: b.width,
        requested_tol: acc.tol,
    })
}

/// The two sums behind `φ = f'/f`, both scaled by `e^{-σ_min y}` so that
/// they stay representable for very negative `y`.
pub(crate) fn scaled_pair(seq: &SigmaSequence, y: f64, acc: Accuracy) -> Result<(Bracket, Bracket)> {
    let shift = seq.min_sigma();
    let s0 = scaled_sum(seq, y, 0, shift, acc.with_tol(0.25 * acc.tol))?;
    let s1 = scaled_sum(seq, y, 1, shift, acc.with_tol(0.25 * acc.tol * shift.min(1.0)))?;
    Ok((s0, s1))
}

/// `φ(y) = f'(y)/f(y)` to relative accuracy `tol`.
pub fn phi(seq: &SigmaSequence, y: f64, acc: impl Into<Accuracy>) -> Result<f64> {
    let acc = acc.into();
    acc.validate()?;
    check_point(seq, y, 1)?;
    let (s0, s1) = scaled_pair(seq, y, acc)?;
    Ok(s1.mid() / s0.mid())
}

/// `ln f(y)`, accurate to absolute error about `tol`.
pub fn ln_f(seq: &SigmaSequence, y: f64, acc: impl Into<Accuracy>) -> Result<f64> {
    let acc = acc.into();
    acc.validate()?;
    check_point(seq, y, 0)?;
    let shift = seq.min_sigma();
    let s0 = scaled_sum(seq, y, 0, shift, acc.with_tol(0.5 * acc.tol))?;
    Ok(shift * y + s0.mid().ln())
}

/// `e^{-shift·y} Σ σ_n^p e^{σ_n y}` as a certified bracket. No domain check.
pub(crate) fn scaled_sum(seq: &SigmaSequence, y: f64, p: u32, shift: f64, acc: Accuracy) -> Result<Bracket> {
    match seq.family() {
        Family::LogLog => Err(Error::EmptyDomain),
        Family::BoxTriple { kappa } => box_sum(*kappa, y, p, shift, acc),
        Family::LogFam { theta } => log_fam_sum(seq, *theta, y, p, shift, acc),
        Family::Power { theta } if *theta < 1.0 => power_gamma_sum(seq, *theta, y, p, shift, acc),
        Family::Custom(c) if c.declared_gap <= 0.0 => Err(Error::Precondition(format!(
            "custom sequence `{}` declares no positive increment gap; its tail cannot be bounded",
            c.name
        ))),
        _ => geometric_sum(seq, y, p, shift, acc),
    }
}

fn budget_error(acc: Accuracy, p: u32, partial: f64, bound: f64, last_index: u64) -> Error {
    Error::BudgetExceeded {
        requested_tol: acc.tol,
        max_terms: acc.max_terms,
        best: Box::new(SeriesEval {
            value: partial,
            derivative_order: p,
            truncation_index: last_index,
            tail_bound: bound,
            requested_tol: acc.tol,
        }),
    }
}

#[inline]
fn term(s: f64, p: u32, y: f64, shift: f64) -> f64 {
    let e = ((s - shift) * y).exp();
    if p == 0 {
        e
    } else {
        s.powi(p as i32) * e
    }
}

/// Terms after `N` are dominated by `T_{N+1} r^{n-N-1}` with
/// `r = e^{δ y} (σ_{N+2}/σ_{N+1})^p`, where `δ` is the increment gap.
fn geometric_sum(seq: &SigmaSequence, y: f64, p: u32, shift: f64, acc: Accuracy) -> Result<Bracket> {
    let start = seq.start_index();
    let mut sum = CompensatedSum::new();
    let mut n = start;
    let mut s_n = seq.raw(n);
    let mut best = f64::INFINITY;
    loop {
        sum.add(term(s_n, p, y, shift));
        let s_next = seq.raw(n + 1);
        let ratio = if p == 0 {
            1.0
        } else {
            (seq.raw(n + 2) / s_next).powi(p as i32)
        };
        let r = (increment_gap(seq, n + 1) * y).exp() * ratio;
        if r < 1.0 {
            let tail = term(s_next, p, y, shift) / (1.0 - r);
            best = tail;
            if tail <= acc.tol {
                let partial = sum.value();
                return Ok(Bracket {
                    lo: partial,
                    width: tail,
                    last_index: n,
                });
            }
        }
        if n - start + 1 >= acc.max_terms {
            return Err(budget_error(acc, p, sum.value(), best, n));
        }
        n += 1;
        s_n = s_next;
    }
}

/// `σ_n = n^θ`, `0 < θ < 1`: `Σ_{n>N} g(n) ≤ ∫_N^∞ g`, with
/// `∫_N^∞ t^{θp} e^{-c t^θ} dt = Γ(p + 1/θ, c N^θ) / (θ c^{p+1/θ})`.
fn power_gamma_sum(seq: &SigmaSequence, theta: f64, y: f64, p: u32, shift: f64, acc: Accuracy) -> Result<Bracket> {
    let c = -y;
    let a = p as f64 + 1.0 / theta;
    let start = seq.start_index();
    let mut sum = CompensatedSum::new();
    let mut best = f64::INFINITY;
    let mut n = start;
    loop {
        let s = seq.raw(n);
        sum.add(term(s, p, y, shift));
        let x = c * s;
        if x > p as f64 && x > (a - 1.0).max(0.0) {
            let ln_tail = ln_upper_gamma_bound(a, x) - theta.ln() - a * c.ln() - shift * y;
            let tail = ln_tail.exp();
            best = tail;
            if tail <= acc.tol {
                let partial = sum.value();
                return Ok(Bracket {
                    lo: partial,
                    width: tail,
                    last_index: n,
                });
            }
        }
        if n - start + 1 >= acc.max_terms {
            return Err(budget_error(acc, p, sum.value(), best, n));
        }
        n += 1;
    }
}

/// The continuous extension `g(t) = σ(t)^p e^{(σ(t) - shift) y}` of the
/// terms of the logarithmic family, `σ(t) = ln t + θ ln ln t`.
struct LogFamTail {
    theta: f64,
    y: f64,
    p: u32,
    shift: f64,
}

impl LogFamTail {
    fn sigma(&self, t: f64) -> f64 {
        t.ln() + self.theta * t.ln().ln()
    }

    fn g(&self, t: f64) -> f64 {
        term(self.sigma(t), self.p, self.y, self.shift)
    }

    /// `ln` of the integrand after the substitution `s = ln t`.
    fn ln_h(&self, s: f64) -> f64 {
        let sig = s + self.theta * s.ln();
        self.p as f64 * sig.ln() + self.theta * self.y * s.ln() + (1.0 + self.y) * s - self.shift * self.y
    }

    /// Smallest index from which `g` is decreasing and convex.
    fn convex_from(&self, start: u64) -> u64 {
        let p = self.p as f64;
        let need = (p + p.sqrt()) / self.y.abs();
        let mut t = start.max((self.theta.abs() + 1.0).exp().ceil() as u64).max(3);
        while self.sigma(t as f64) <= need {
            t *= 2;
        }
        t
    }

    /// `∫_a^∞ g(t) dt` and an error estimate.
    fn tail_integral(&self, a: f64, tol: f64) -> (f64, f64) {
        let l = a.ln();
        let th = self.theta;
        if self.y == -1.0 && self.p <= 1 {
            // Closed forms of ∫_L^∞ (s + θ ln s)^p s^{-θ} ds.
            let scale = self.shift.exp();
            let v = if self.p == 0 {
                l.powf(1.0 - th) / (th - 1.0)
            } else {
                l.powf(2.0 - th) / (th - 2.0)
                    + th * (l.powf(1.0 - th) * l.ln() / (th - 1.0) + l.powf(1.0 - th) / ((th - 1.0) * (th - 1.0)))
            };
            return (scale * v, scale * v * 4.0 * f64::EPSILON);
        }
        let c = -(1.0 + self.y);
        debug_assert!(c > 0.0);
        let p = self.p as f64;
        let mut s_max = l
            .max(2.0 * (2.0 * p + (th * self.y).abs()) / c)
            .max(10.0 * (th.abs() + 1.0).powi(2));
        let target = (1e-3 * tol).ln();
        let mut guard = 0;
        while (2.0 / c).ln() + self.ln_h(s_max) > target && guard < 400 {
            s_max *= 1.5;
            guard += 1;
        }
        let beyond = 2.0 / c * self.ln_h(s_max).exp();
        let z_max = (s_max / l).ln();
        let q = integrate(
            |z: f64| {
                let s = l * z.exp();
                (s.ln() + self.ln_h(s)).exp()
            },
            0.0,
            z_max,
            0.5 * tol,
            1e-14,
        );
        (q.value, q.error + beyond)
    }
}

fn log_fam_sum(seq: &SigmaSequence, theta: f64, y: f64, p: u32, shift: f64, acc: Accuracy) -> Result<Bracket> {
    let tail = LogFamTail { theta, y, p, shift };
    let start = seq.start_index();
    let n0 = tail.convex_from(start);
    let mut checkpoint = n0.max(start + 63);
    let mut sum = CompensatedSum::new();
    let mut n = start;
    let mut best = f64::INFINITY;
    let last_allowed = start + acc.max_terms - 1;
    loop {
        let stop = checkpoint.min(last_allowed);
        while n <= stop {
            sum.add(term(seq.raw(n), p, y, shift));
            n += 1;
        }
        let last = n - 1;
        if last >= n0 {
            // Σ_{k>N} g(k) ∈ [∫_{N+1}^∞ g + g(N+1)/2, ∫_{N+1/2}^∞ g] for convex decreasing g.
            let nf = last as f64;
            let qtol = acc.tol / 8.0;
            let (i1, e1) = tail.tail_integral(nf + 1.0, qtol);
            let d = integrate(|t| tail.g(t), nf + 0.5, nf + 1.0, qtol, 1e-15);
            let half = 0.5 * tail.g(nf + 1.0);
            let partial = sum.value();
            let lower = partial + i1 - e1 + half;
            let width = (d.value + d.error - half).max(0.0) + 2.0 * e1;
            best = best.min(width);
            if width <= acc.tol {
                return Ok(Bracket {
                    lo: lower,
                    width,
                    last_index: last,
                });
            }
        }
        if last >= last_allowed {
            return Err(budget_error(acc, p, sum.value(), best, last));
        }
        checkpoint = checkpoint.saturating_mul(2);
    }
}

fn multinomial3(p: u32, a: u32, b: u32) -> f64 {
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    fact(p) / (fact(a) * fact(b) * fact(p - a - b))
}

fn box_sum(kappa: f64, y: f64, p: u32, shift: f64, acc: Accuracy) -> Result<Bracket> {
    let axis = SigmaSequence::quadratic();
    let y1 = kappa * y;
    let axis_shift = shift / (3.0 * kappa);
    let scale = kappa.powi(p as i32);
    let mut factor_tol = acc.tol / 10.0;
    for _ in 0..6 {
        let mut factors = Vec::with_capacity(p as usize + 1);
        let mut last_index = 0;
        for order in 0..=p {
            let b = geometric_sum(&axis, y1, order, axis_shift, acc.with_tol(factor_tol))?;
            last_index = last_index.max(b.last_index);
            factors.push(b);
        }
        let (mut lo, mut hi) = (CompensatedSum::new(), CompensatedSum::new());
        for a in 0..=p {
            for b in 0..=(p - a) {
                let c = p - a - b;
                let w = scale * multinomial3(p, a, b);
                let (fa, fb, fc) = (factors[a as usize], factors[b as usize], factors[c as usize]);
                lo.add(w * fa.lo * fb.lo * fc.lo);
                hi.add(w * (fa.lo + fa.width) * (fb.lo + fb.width) * (fc.lo + fc.width));
            }
        }
        let (lo, hi) = (lo.value(), hi.value());
        let width = (hi - lo).max(0.0);
        if width <= acc.tol {
            return Ok(Bracket { lo, width, last_index });
        }
        factor_tol /= 100.0;
    }
    Err(Error::numeric("box series", format!("could not reach tolerance {:e} at y = {y}", acc.tol)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn brute(seq: &SigmaSequence, y: f64, p: u32, n_max: u64) -> f64 {
        (seq.start_index()..=n_max)
            .map(|n| {
                let s = seq.raw(n);
                s.powi(p as i32) * (s * y).exp()
            })
            .collect::<CompensatedSum>()
            .value()
    }

    #[test]
    fn linear_closed_forms() {
        let seq = SigmaSequence::linear();
        let v = eval(&seq, -LN_2, 0, 1e-12).unwrap();
        assert!((v.value - 1.0).abs() <= 1e-12, "{v:?}");
        assert!(v.tail_bound <= 1e-12);
        let d = eval(&seq, -LN_2, 1, 1e-12).unwrap();
        assert!((d.value - 2.0).abs() <= 1e-12, "{d:?}");
    }

    #[test]
    fn quadratic_at_minus_one() {
        let v = eval(&SigmaSequence::quadratic(), -1.0, 0, 1e-9).unwrap();
        // Σ e^{-k²}, k = 1..6 (remaining terms < 1e-20).
        let brute: f64 = (1..=6).map(|k: i32| (-(k * k) as f64).exp()).sum();
        assert!((v.value - brute).abs() <= 1e-9);
        assert!((v.value - 0.386_318_602_0).abs() < 1e-9);
    }

    #[test]
    fn domain_classes() {
        let d = domain_info(&SigmaSequence::power(1.0).unwrap());
        assert_eq!(d.alpha, 0.0);
        assert_eq!(d.boundary_class, BoundaryClass::OpenBoundary);
        assert_eq!(d.gamma, ExtReal::PosInfinity);

        assert_eq!(domain_info(&SigmaSequence::log_log()).boundary_class, BoundaryClass::EmptyDomain);
        assert_eq!(
            domain_info(&SigmaSequence::log_fam(0.5).unwrap()).boundary_class,
            BoundaryClass::OpenBoundary
        );
        assert_eq!(
            domain_info(&SigmaSequence::log_fam(1.5).unwrap()).boundary_class,
            BoundaryClass::ClosedInfiniteSlope
        );
        let d = domain_info(&SigmaSequence::log_fam(3.0).unwrap());
        assert_eq!(d.alpha, 1.0);
        assert_eq!(d.boundary_class, BoundaryClass::ClosedFiniteSlope);
        assert!(d.gamma.is_finite() && d.gamma_bound < 1e-10, "{d:?}");
        assert!(d.f_at_boundary.is_finite() && d.f_at_boundary_bound < 1e-10, "{d:?}");
    }

    #[test]
    fn log_fam_boundary_values_match_independent_estimate() {
        // Independent route: brute-force partial sum to 2·10^6 plus the
        // closed-form integral tail from N + 1/2.
        let seq = SigmaSequence::log_fam(3.0).unwrap();
        let d = domain_info(&seq);
        let n = 2_000_000u64;
        let l = (n as f64 + 0.5).ln();
        let f_tail = l.powi(-2) / 2.0;
        let g_tail = 1.0 / l + 3.0 * (l.powi(-2) * l.ln() / 2.0 + l.powi(-2) / 4.0);
        let f_est = brute(&seq, -1.0, 0, n) + f_tail;
        let g_est = brute(&seq, -1.0, 1, n) + g_tail;
        assert!((d.f_at_boundary.unwrap() - f_est).abs() < 1e-9, "{d:?} vs {f_est}");
        assert!((d.gamma.unwrap() - g_est).abs() < 1e-9, "{d:?} vs {g_est}");
    }

    #[test]
    fn log_fam_interior_brackets_brute_force() {
        let seq = SigmaSequence::log_fam(3.0).unwrap();
        for &y in &[-1.5, -2.0, -3.0] {
            for p in 0..=2 {
                let e = eval(&seq, y, p, 1e-10).unwrap();
                // With y ≤ -1.5 the brute-force tail after 10^6 is ~1e-4;
                // compare against a longer sum with its own integral tail.
                let n = 1_000_000u64;
                let tail = LogFamTail { theta: 3.0, y, p, shift: 0.0 };
                let (t, _) = tail.tail_integral(n as f64 + 0.5, 1e-13);
                let est = brute(&seq, y, p, n) + t;
                assert!((e.estimate() - est).abs() < 1e-9, "y={y} p={p}: {e:?} vs {est}");
            }
        }
    }

    #[test]
    fn power_below_one_uses_gamma_bound() {
        let seq = SigmaSequence::power(0.5).unwrap();
        let e = eval(&seq, -1.0, 1, 1e-10).unwrap();
        let brute = brute(&seq, -1.0, 1, 3_000_000);
        assert!(brute >= e.value - 1e-12 && brute <= e.upper() + 1e-12, "{e:?} vs {brute}");
    }

    #[test]
    fn box_factorization_matches_flattened_sum() {
        let levels = crate::sequences::enumerate_box(1.0, 20_000);
        for p in 0..=2u32 {
            let flat: f64 = levels.iter().map(|l| l.sigma.powi(p as i32) * (-0.7 * l.sigma).exp()).sum();
            let e = eval(&SigmaSequence::box_triple(1.0).unwrap(), -0.7, p, 1e-12).unwrap();
            assert!((e.estimate() - flat).abs() < 1e-11, "p={p}: {} vs {flat}", e.estimate());
        }
    }

    #[test]
    fn boundary_rules() {
        let seq = SigmaSequence::log_fam(3.0).unwrap();
        assert!(eval(&seq, -1.0, 0, 1e-10).is_ok());
        assert!(eval(&seq, -1.0, 1, 1e-10).is_ok());
        assert!(matches!(eval(&seq, -1.0, 2, 1e-10), Err(Error::OutsideDomain { .. })));
        let seq = SigmaSequence::log_fam(1.5).unwrap();
        assert!(eval(&seq, -1.0, 0, 1e-8).is_ok());
        assert!(matches!(eval(&seq, -1.0, 1, 1e-8), Err(Error::OutsideDomain { .. })));
        assert!(matches!(eval(&SigmaSequence::linear(), 0.0, 0, 1e-8), Err(Error::OutsideDomain { .. })));
        assert!(matches!(eval(&SigmaSequence::log_log(), -5.0, 0, 1e-8), Err(Error::EmptyDomain)));
    }

    #[test]
    fn budget_exceeded_carries_partial() {
        let acc = Accuracy::new(1e-12).with_max_terms(1000);
        match eval(&SigmaSequence::linear(), -1e-4, 0, acc) {
            Err(Error::BudgetExceeded { best, .. }) => {
                assert_eq!(best.truncation_index, 1000);
                assert!(best.value > 0.0);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn phi_limits() {
        assert!((phi(&SigmaSequence::linear(), -LN_2, 1e-13).unwrap() - 2.0).abs() < 1e-12);
        let q = SigmaSequence::quadratic();
        assert!((phi(&q, -50.0, 1e-15).unwrap() - 1.0).abs() <= 1e-15);
        assert!(phi(&q, -0.05, 1e-12).unwrap() > 10.0);
    }
}
