//! Exponent sequences `σ_n` and the analytic metadata the tail bounds rely on.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::BoundaryClass;

/// A user-supplied exponent sequence. The library trusts the declared
/// domain data; it does not try to certify convergence of arbitrary code.
#[derive(Clone)]
pub struct CustomFamily {
    pub name: String,
    generator: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
    pub declared_alpha: f64,
    pub declared_gap: f64,
    pub declared_boundary: BoundaryClass,
}

impl CustomFamily {
    pub fn new<F>(name: impl Into<String>, generator: F, declared_alpha: f64, declared_gap: f64) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        CustomFamily {
            name: name.into(),
            generator: Arc::new(generator),
            declared_alpha,
            declared_gap,
            declared_boundary: BoundaryClass::OpenBoundary,
        }
    }

    pub fn with_boundary(mut self, class: BoundaryClass) -> Self {
        self.declared_boundary = class;
        self
    }
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily")
            .field("name", &self.name)
            .field("declared_alpha", &self.declared_alpha)
            .field("declared_gap", &self.declared_gap)
            .field("declared_boundary", &self.declared_boundary)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Family {
    /// `σ_n = n`
    Linear,
    /// `σ_n = n^θ`, `θ > 0`
    Power { theta: f64 },
    /// `σ_n = ln[n (ln n)^θ]`
    LogFam { theta: f64 },
    /// `σ_n = ln ln n`; not summable for any `y`.
    LogLog,
    /// `σ_n = n²`
    Quadratic,
    /// `σ_{k,l,m} = κ (k² + l² + m²)`, flattened in sorted order.
    BoxTriple { kappa: f64 },
    Custom(CustomFamily),
}

/// An exponent sequence together with the index it starts at.
#[derive(Debug, Clone)]
pub struct SigmaSequence {
    family: Family,
    start_index: u64,
}

impl SigmaSequence {
    pub fn linear() -> Self {
        SigmaSequence {
            family: Family::Linear,
            start_index: 1,
        }
    }

    pub fn power(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidArgument(format!("power exponent must be positive, got {theta}")));
        }
        Ok(SigmaSequence {
            family: Family::Power { theta },
            start_index: 1,
        })
    }

    pub fn quadratic() -> Self {
        SigmaSequence {
            family: Family::Quadratic,
            start_index: 1,
        }
    }

    /// `ln[n (ln n)^θ]` from `n = 3`. For `θ < -ln 3` the first terms are
    /// not monotone (or not positive) and the start is moved past them.
    pub fn log_fam(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("theta must be finite, got {theta}")));
        }
        let mut start = 3u64;
        loop {
            let ln_n = (start as f64).ln();
            if ln_n >= -theta && log_fam_sigma(theta, start) > 0.0 {
                break;
            }
            start += 1;
            if start > 1 << 40 {
                return Err(Error::InvalidArgument(format!("theta = {theta} too negative")));
            }
        }
        Ok(SigmaSequence {
            family: Family::LogFam { theta },
            start_index: start,
        })
    }

    pub fn log_log() -> Self {
        SigmaSequence {
            family: Family::LogLog,
            start_index: 3,
        }
    }

    pub fn box_triple(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
        }
        Ok(SigmaSequence {
            family: Family::BoxTriple { kappa },
            start_index: 1,
        })
    }

    pub fn custom(family: CustomFamily, start_index: u64) -> Result<Self> {
        if start_index < 1 {
            return Err(Error::InvalidArgument("start index must be at least 1".into()));
        }
        if !(family.declared_gap >= 0.0) || !(family.declared_alpha >= 0.0) {
            return Err(Error::InvalidArgument("declared gap and alpha must be non-negative".into()));
        }
        let first = (family.generator)(start_index);
        if !(first > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "custom sequence must start positive, sigma({start_index}) = {first}"
            )));
        }
        Ok(SigmaSequence {
            family: Family::Custom(family),
            start_index,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn start_index(&self) -> u64 {
        self.start_index
    }

    /// Smallest exponent, `σ_start` (the ground level for `BoxTriple`).
    pub fn min_sigma(&self) -> f64 {
        match &self.family {
            Family::BoxTriple { kappa } => 3.0 * kappa,
            _ => self.raw(self.start_index),
        }
    }

    /// Multiplicity of the lowest level. One for every built-in family.
    pub fn ground_multiplicity(&self) -> u64 {
        match &self.family {
            Family::Custom(_) => {
                let first = self.raw(self.start_index);
                let mut n = self.start_index + 1;
                while self.raw(n) == first {
                    n += 1;
                }
                n - self.start_index
            }
            _ => 1,
        }
    }

    /// `σ_n` without the start-index check; scalar families only.
    #[inline]
    pub(crate) fn raw(&self, n: u64) -> f64 {
        let x = n as f64;
        match &self.family {
            Family::Linear => x,
            Family::Power { theta } => x.powf(*theta),
            Family::LogFam { theta } => log_fam_sigma(*theta, n),
            Family::LogLog => x.ln().ln(),
            Family::Quadratic => x * x,
            Family::Custom(c) => (c.generator)(n),
            Family::BoxTriple { kappa } => enumerate_box(*kappa, n as usize).last().map(|l| l.sigma).unwrap_or(f64::NAN),
        }
    }

    /// Canonical textual form (`linear`, `power:2`, `box:1`, ...).
    pub fn label(&self) -> String {
        match &self.family {
            Family::Linear => "linear".into(),
            Family::Power { theta } => format!("power:{theta}"),
            Family::LogFam { theta } => format!("logfam:{theta}"),
            Family::LogLog => "loglog".into(),
            Family::Quadratic => "quadratic".into(),
            Family::BoxTriple { kappa } => format!("box:{kappa}"),
            Family::Custom(c) => format!("custom:{}", c.name),
        }
    }
}

fn log_fam_sigma(theta: f64, n: u64) -> f64 {
    let x = n as f64;
    x.ln() + theta * x.ln().ln()
}

impl fmt::Display for SigmaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for SigmaSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let param = |what: &str| -> Result<f64> {
            let a = arg.ok_or_else(|| Error::InvalidArgument(format!("`{name}` needs a parameter: {name}:<{what}>")))?;
            a.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad {what} `{a}` in `{s}`")))
        };
        let no_param = |seq: SigmaSequence| -> Result<SigmaSequence> {
            match arg {
                None => Ok(seq),
                Some(_) => Err(Error::InvalidArgument(format!("`{name}` takes no parameter"))),
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "linear" => no_param(SigmaSequence::linear()),
            "quadratic" => no_param(SigmaSequence::quadratic()),
            "loglog" => no_param(SigmaSequence::log_log()),
            "power" => SigmaSequence::power(param("theta")?),
            "logfam" => SigmaSequence::log_fam(param("theta")?),
            "box" => SigmaSequence::box_triple(param("kappa")?),
            other => Err(Error::InvalidArgument(format!(
                "unknown sequence `{other}` (expected linear, power:<θ>, logfam:<θ>, loglog, quadratic, box:<κ>)"
            ))),
        }
    }
}

/// `σ_n`, checked against the start index.
pub fn sigma(seq: &SigmaSequence, n: u64) -> Result<f64> {
    if n < seq.start_index {
        return Err(Error::IndexBelowStart {
            index: n,
            start: seq.start_index,
        });
    }
    Ok(seq.raw(n))
}

/// A lower bound `δ_N` on `σ_{n+1} - σ_n` for every `n ≥ N`.
///
/// Zero when the increments shrink to zero (logarithmic families, `n^θ`
/// with `θ < 1`) and for the flattened box spectrum, which has repeated
/// levels. A zero gap sends the series code down the integral-bound path.
pub fn increment_gap(seq: &SigmaSequence, n: u64) -> f64 {
    let n = n.max(seq.start_index) as f64;
    match &seq.family {
        Family::Linear => 1.0,
        Family::Quadratic => 2.0 * n + 1.0,
        Family::Power { theta } if *theta >= 1.0 => (n + 1.0).powf(*theta) - n.powf(*theta),
        Family::Custom(c) => c.declared_gap,
        Family::Power { .. } | Family::LogFam { .. } | Family::LogLog | Family::BoxTriple { .. } => 0.0,
    }
}

/// One level of the particle-in-a-box spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxLevel {
    pub triple: (u32, u32, u32),
    pub sigma: f64,
}

/// Number of positive triples with `k² + l² + m² ≤ s`.
fn box_count(s: u64) -> u64 {
    let mut count = 0;
    let mut k = 1u64;
    while k * k + 2 <= s {
        let mut l = 1u64;
        while k * k + l * l < s {
            count += isqrt(s - k * k - l * l);
            l += 1;
        }
        k += 1;
    }
    count
}

fn isqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// The first `budget` triples `(k, l, m)`, `k, l, m ≥ 1`, ordered by
/// `κ(k² + l² + m²)` and then lexicographically.
pub fn enumerate_box(kappa: f64, budget: usize) -> Vec<BoxLevel> {
    if budget == 0 {
        return Vec::new();
    }
    let mut s_max = 3u64;
    while box_count(s_max) < budget as u64 {
        s_max *= 2;
    }
    let mut triples = Vec::new();
    let mut k = 1u64;
    while k * k + 2 <= s_max {
        let mut l = 1u64;
        while k * k + l * l < s_max {
            let mut m = 1u64;
            while k * k + l * l + m * m <= s_max {
                triples.push((k * k + l * l + m * m, k as u32, l as u32, m as u32));
                m += 1;
            }
            l += 1;
        }
        k += 1;
    }
    triples.sort_unstable();
    triples.truncate(budget);
    triples
        .into_iter()
        .map(|(s, k, l, m)| BoxLevel {
            triple: (k, l, m),
            sigma: kappa * s as f64,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(&SigmaSequence::linear(), 3).unwrap(), 3.0);
        assert_eq!(sigma(&SigmaSequence::power(2.0).unwrap(), 4).unwrap(), 16.0);
        let s = sigma(&SigmaSequence::log_fam(1.0).unwrap(), 3).unwrap();
        assert!((s - (3.0 * 3f64.ln()).ln()).abs() < 1e-15);
        assert!((s - 1.192_660_116_284_808_7).abs() < 1e-12);
    }

    #[test]
    fn sigma_below_start_is_an_error() {
        let seq = SigmaSequence::log_fam(3.0).unwrap();
        assert_eq!(seq.start_index(), 3);
        assert!(matches!(sigma(&seq, 2), Err(Error::IndexBelowStart { index: 2, start: 3 })));
        assert!(sigma(&SigmaSequence::linear(), 0).is_err());
    }

    #[test]
    fn gaps() {
        assert_eq!(increment_gap(&SigmaSequence::linear(), 5), 1.0);
        assert_eq!(increment_gap(&SigmaSequence::quadratic(), 3), 7.0);
        assert_eq!(increment_gap(&SigmaSequence::log_fam(0.0).unwrap(), 10), 0.0);
        assert_eq!(increment_gap(&SigmaSequence::power(0.5).unwrap(), 10), 0.0);
        assert_eq!(increment_gap(&SigmaSequence::power(2.0).unwrap(), 2), 5.0);
    }

    #[test]
    fn box_enumeration_small_cases() {
        assert_eq!(
            enumerate_box(1.0, 1),
            vec![BoxLevel {
                triple: (1, 1, 1),
                sigma: 3.0
            }]
        );
        let four: Vec<_> = enumerate_box(1.0, 4).into_iter().map(|l| (l.triple, l.sigma)).collect();
        assert_eq!(
            four,
            vec![((1, 1, 1), 3.0), ((1, 1, 2), 6.0), ((1, 2, 1), 6.0), ((2, 1, 1), 6.0)]
        );
        let two: Vec<_> = enumerate_box(2.0, 2).into_iter().map(|l| (l.triple, l.sigma)).collect();
        assert_eq!(two, vec![((1, 1, 1), 6.0), ((1, 1, 2), 12.0)]);
    }

    #[test]
    fn box_enumeration_has_no_gaps() {
        // Brute force every triple with k²+l²+m² ≤ 100.
        let mut brute = Vec::new();
        for k in 1..=10u32 {
            for l in 1..=10u32 {
                for m in 1..=10u32 {
                    let s = k * k + l * l + m * m;
                    if s <= 100 {
                        brute.push((s, k, l, m));
                    }
                }
            }
        }
        brute.sort_unstable();
        let listed = enumerate_box(1.0, brute.len());
        let got: Vec<_> = listed.iter().map(|l| (l.sigma as u32, l.triple.0, l.triple.1, l.triple.2)).collect();
        assert_eq!(got, brute);
        assert_eq!(box_count(100), brute.len() as u64);
    }

    #[test]
    fn parses_mini_grammar() {
        for text in ["linear", "power:2", "logfam:3", "loglog", "quadratic", "box:1"] {
            let seq: SigmaSequence = text.parse().unwrap();
            assert_eq!(seq.label(), text);
        }
        assert!("power".parse::<SigmaSequence>().is_err());
        assert!("power:-1".parse::<SigmaSequence>().is_err());
        assert!("linear:2".parse::<SigmaSequence>().is_err());
        assert!("cubic".parse::<SigmaSequence>().is_err());
    }

    #[test]
    fn very_negative_theta_moves_start() {
        let seq = SigmaSequence::log_fam(-3.0).unwrap();
        assert!(seq.start_index() > 3);
        let s0 = seq.start_index();
        for n in s0..s0 + 200 {
            assert!(seq.raw(n) > 0.0);
            assert!(seq.raw(n + 1) >= seq.raw(n));
        }
    }
}
