//! Small numerical kernels shared by the series, conjugate and entropy code:
//! compensated summation, adaptive Gauss–Kronrod quadrature, a bracketed
//! root solver and an incomplete-gamma tail bound.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default cap on the number of (flattened) series terms.
pub const DEFAULT_MAX_TERMS: u64 = 10_000_000;

/// Requested accuracy plus the term budget allowed to reach it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    pub tol: f64,
    pub max_terms: u64,
}

impl Accuracy {
    pub fn new(tol: f64) -> Self {
        Accuracy {
            tol,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }

    pub fn with_max_terms(mut self, max_terms: u64) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub(crate) fn with_tol(self, tol: f64) -> Self {
        Accuracy { tol, ..self }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_terms == 0 {
            return Err(Error::InvalidArgument("max_terms must be positive".into()));
        }
        Ok(())
    }
}

impl From<f64> for Accuracy {
    fn from(tol: f64) -> Self {
        Accuracy::new(tol)
    }
}

/// Term budget and cooperative cancellation for witness searches.
#[derive(Debug, Clone, Default)]
pub struct Budget {
    pub max_terms: Option<u64>,
    cancel: Option<Arc<AtomicBool>>,
}

impl Budget {
    pub fn new(max_terms: u64) -> Self {
        Budget {
            max_terms: Some(max_terms),
            cancel: None,
        }
    }

    /// Returns a flag that aborts the search with [`Error::Cancelled`] once set.
    pub fn cancel_token(&mut self) -> Arc<AtomicBool> {
        self.cancel.get_or_insert_with(|| Arc::new(AtomicBool::new(false))).clone()
    }

    pub fn limit(&self) -> u64 {
        self.max_terms.unwrap_or(DEFAULT_MAX_TERMS)
    }

    pub(crate) fn check(&self) -> Result<()> {
        match &self.cancel {
            Some(flag) if flag.load(Ordering::Relaxed) => Err(Error::Cancelled),
            _ => Ok(()),
        }
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1] (non-negative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Result of [`integrate`]: the estimate and an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Quadrature {
    const MAX_INTERVALS: usize = 2000;
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || parts.len() >= MAX_INTERVALS {
            return Quadrature { value: total, error: err };
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let total: f64 = parts.iter().map(|p| p.2).sum::<f64>();
            return Quadrature {
                value: total,
                error: f64::INFINITY,
            };
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Termination settings for [`find_root`].
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub xtol_abs: f64,
    pub xtol_rel: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            xtol_abs: 1e-300,
            xtol_rel: 1e-14,
            max_iter: 300,
        }
    }
}

/// Brent's method (inverse quadratic interpolation safeguarded by bisection)
/// on a bracket `[lo, hi]` whose endpoint values have opposite signs.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, f_lo: f64, f_hi: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::numeric(
            "root bracket",
            format!("no sign change: f({lo}) = {f_lo}, f({hi}) = {f_hi}"),
        ));
    }
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, f_lo, f_hi);
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..opts.max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * (opts.xtol_abs + opts.xtol_rel * b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
        if fb.is_nan() {
            return Err(Error::numeric("root solve", format!("NaN residual at {b}")));
        }
    }
    Err(Error::numeric(
        "root solve",
        format!("no convergence after {} iterations; bracket [{}, {}]", opts.max_iter, b.min(c), b.max(c)),
    ))
}

/// Natural log of an upper bound on the upper incomplete gamma function
/// `Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt`, valid for `x > max(a - 1, 0)`.
///
/// Uses `(1 + s/x)^{a-1} ≤ e^{(a-1)s/x}` for `a ≥ 1` and `≤ 1` otherwise.
pub fn ln_upper_gamma_bound(a: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0 && x > a - 1.0);
    let base = (a - 1.0) * x.ln() - x;
    if a > 1.0 {
        base - (1.0 - (a - 1.0) / x).ln()
    } else {
        base
    }
}
