//! Countable maximum-entropy problems
//! `min Σ u_n (ln u_n - 1)` under one or two linear moment constraints.
//!
//! Interior solutions have Gibbs form `u_n = e^{x + σ_n y}` with `(x, y)`
//! from the dual. When the infimum is not attained (the plateau `u > γ`,
//! or the alternating problem with `v ≠ v̄`) finite-support witnesses are
//! built whose entropy approaches the infimum.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::conjugate::{
    conjugate_with, exp_conjugate, pair_conjugate_with, solve_phi, sup_phi, Regime,
};
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::numeric::{Accuracy, Budget, CompensatedSum};
use crate::scenarios::VarsigmaSequence;
use crate::sequences::{enumerate_box, Family, SigmaSequence};
use crate::series::{domain_info, eval, BoundaryClass, DomainInfo};

/// Largest number of weights materialized in a [`WeightLaw`].
pub const MAX_PREFIX: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FitStatus {
    InteriorUnique,
    BoundarySingleton,
    PlateauNonAttained,
    Infeasible,
}

/// Position of a weight: a scalar index or a box triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightIndex {
    Index(u64),
    Triple(u32, u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weight {
    pub index: WeightIndex,
    pub weight: f64,
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Weight", 2)?;
        match self.index {
            WeightIndex::Index(n) => st.serialize_field("index", &n)?,
            WeightIndex::Triple(k, l, m) => st.serialize_field("triple", &[k, l, m])?,
        }
        st.serialize_field("weight", &self.weight)?;
        st.end()
    }
}

/// `u_n = e^{x + σ_n y}`, with the largest weights materialized and the
/// remaining mass bounded.
#[derive(Debug, Clone, Serialize)]
pub struct WeightLaw {
    pub x: f64,
    pub y: f64,
    pub prefix: Vec<Weight>,
    /// `Σ u_n` over the weights not in `prefix`.
    pub tail_mass: f64,
}

impl WeightLaw {
    /// `e^{x + σ y}`.
    pub fn weight_at(&self, sigma: f64) -> f64 {
        (self.x + sigma * self.y).exp()
    }
}

/// Achieved moments `(Σ u_n, Σ σ_n u_n)`; the true sums lie within the
/// stated bounds of the reported values.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Moments {
    pub mass: f64,
    pub energy: f64,
    pub mass_bound: f64,
    pub energy_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GibbsFit {
    pub status: FitStatus,
    /// Normalization multiplier; absent for single-constraint problems.
    pub dual_x: Option<f64>,
    pub dual_y: Option<f64>,
    pub weights: Option<WeightLaw>,
    pub achieved_moments: Option<Moments>,
    pub entropy_value: ExtReal,
    pub reason: Option<String>,
}

impl GibbsFit {
    fn infeasible(reason: impl Into<String>) -> Self {
        GibbsFit {
            status: FitStatus::Infeasible,
            dual_x: None,
            dual_y: None,
            weights: None,
            achieved_moments: None,
            entropy_value: ExtReal::PosInfinity,
            reason: Some(reason.into()),
        }
    }

    fn zero(status: FitStatus) -> Self {
        GibbsFit {
            status,
            dual_x: None,
            dual_y: None,
            weights: Some(WeightLaw {
                x: f64::NEG_INFINITY,
                y: 0.0,
                prefix: Vec::new(),
                tail_mass: 0.0,
            }),
            achieved_moments: Some(Moments {
                mass: 0.0,
                energy: 0.0,
                mass_bound: 0.0,
                energy_bound: 0.0,
            }),
            entropy_value: ExtReal::Finite(0.0),
            reason: None,
        }
    }
}

fn materialize(seq: &SigmaSequence, x: f64, y: f64, total_mass: f64, tol: f64) -> WeightLaw {
    let cutoff = tol * 1e-6;
    let mut prefix = Vec::new();
    let mut mass = CompensatedSum::new();
    match seq.family() {
        Family::BoxTriple { kappa } => {
            for level in enumerate_box(*kappa, MAX_PREFIX) {
                let w = (x + level.sigma * y).exp();
                if w < cutoff && !prefix.is_empty() {
                    break;
                }
                let (k, l, m) = level.triple;
                prefix.push(Weight {
                    index: WeightIndex::Triple(k, l, m),
                    weight: w,
                });
                mass.add(w);
            }
        }
        _ => {
            let start = seq.start_index();
            for n in start..start + MAX_PREFIX as u64 {
                let w = (x + seq.raw(n) * y).exp();
                if w < cutoff && !prefix.is_empty() {
                    break;
                }
                prefix.push(Weight {
                    index: WeightIndex::Index(n),
                    weight: w,
                });
                mass.add(w);
            }
        }
    }
    WeightLaw {
        x,
        y,
        prefix,
        tail_mass: (total_mass - mass.value()).max(0.0),
    }
}

/// Gibbs weights `e^{x + σ y}` with their achieved moments and entropy
/// `x M + y E - M`.
fn gibbs(seq: &SigmaSequence, x: f64, y: f64, acc: Accuracy) -> Result<(WeightLaw, Moments, f64)> {
    let scale = x.exp();
    let t = acc.tol / scale.max(1.0) * 0.1;
    let f0 = eval(seq, y, 0, acc.with_tol(t))?;
    let f1 = eval(seq, y, 1, acc.with_tol(t))?;
    let moments = Moments {
        mass: scale * f0.estimate(),
        energy: scale * f1.estimate(),
        mass_bound: scale * 0.5 * f0.tail_bound,
        energy_bound: scale * 0.5 * f1.tail_bound,
    };
    let entropy = x * moments.mass + y * moments.energy - moments.mass;
    let law = materialize(seq, x, y, moments.mass, acc.tol);
    Ok((law, moments, entropy))
}

fn ground_weight(seq: &SigmaSequence, u: f64) -> Weight {
    let index = match seq.family() {
        Family::BoxTriple { .. } => WeightIndex::Triple(1, 1, 1),
        _ => WeightIndex::Index(seq.start_index()),
    };
    Weight { index, weight: u }
}

/// `min { Σ u_n (ln u_n - 1) : Σ σ_n u_n = u }`.
pub fn min_entropy_moment(seq: &SigmaSequence, u: f64, acc: impl Into<Accuracy>) -> Result<GibbsFit> {
    let acc = acc.into();
    acc.validate()?;
    let info = domain_info(seq);
    if info.boundary_class == BoundaryClass::EmptyDomain {
        return Err(Error::EmptyDomain);
    }
    if u.is_nan() || u < 0.0 {
        return Ok(GibbsFit::infeasible(format!("moment u = {u} is negative")));
    }
    if u == 0.0 {
        return Ok(GibbsFit::zero(FitStatus::InteriorUnique));
    }
    let c = conjugate_with(seq, &info, u, acc)?;
    match c.regime {
        Regime::Interior | Regime::BoundaryGamma => {
            let y = c.attaining_y.expect("attained");
            let (law, moments, entropy) = gibbs(seq, 0.0, y, acc)?;
            Ok(GibbsFit {
                status: FitStatus::InteriorUnique,
                dual_x: None,
                dual_y: Some(y),
                weights: Some(law),
                achieved_moments: Some(moments),
                entropy_value: ExtReal::Finite(entropy),
                reason: None,
            })
        }
        Regime::Plateau => Ok(GibbsFit {
            status: FitStatus::PlateauNonAttained,
            dual_x: None,
            dual_y: None,
            weights: None,
            achieved_moments: None,
            entropy_value: c.value,
            reason: Some(format!(
                "u = {u} exceeds γ = {}; the infimum -αu - f(-α) is not attained",
                info.gamma
            )),
        }),
        Regime::NegativeU | Regime::Zero => unreachable!("handled above"),
    }
}

/// `min { Σ u_n (ln u_n - 1) : Σ u_n = u, Σ σ_n u_n = v }`.
pub fn fit_gibbs(seq: &SigmaSequence, u: f64, v: f64, acc: impl Into<Accuracy>) -> Result<GibbsFit> {
    let acc = acc.into();
    acc.validate()?;
    let info = domain_info(seq);
    if info.boundary_class == BoundaryClass::EmptyDomain {
        return Err(Error::EmptyDomain);
    }
    fit_gibbs_with(seq, &info, u, v, acc)
}

pub(crate) fn fit_gibbs_with(seq: &SigmaSequence, info: &DomainInfo, u: f64, v: f64, acc: Accuracy) -> Result<GibbsFit> {
    if u.is_nan() || v.is_nan() || u < 0.0 || v < 0.0 {
        return Ok(GibbsFit::infeasible(format!("moments must be nonnegative, got u = {u}, v = {v}")));
    }
    if u == 0.0 {
        if v == 0.0 {
            return Ok(GibbsFit::zero(FitStatus::BoundarySingleton));
        }
        let conj = pair_conjugate_with(seq, info, u, v, acc)?;
        return Ok(GibbsFit::infeasible(format!(
            "no nonnegative sequence has zero mass and energy {v}; the conjugate formula gives {conj} here"
        )));
    }
    let sigma_min = seq.min_sigma();
    let rho = v / u;
    let near_ground = (rho - sigma_min).abs() <= 4.0 * f64::EPSILON * sigma_min;
    if rho < sigma_min && !near_ground {
        return Ok(GibbsFit::infeasible(format!(
            "energy per unit mass {rho} is below the lowest level {sigma_min}"
        )));
    }
    if near_ground {
        if seq.ground_multiplicity() != 1 {
            return Ok(GibbsFit::infeasible("the lowest level is degenerate"));
        }
        let w = ground_weight(seq, u);
        return Ok(GibbsFit {
            status: FitStatus::BoundarySingleton,
            dual_x: None,
            dual_y: None,
            weights: Some(WeightLaw {
                x: f64::NAN,
                y: f64::NEG_INFINITY,
                prefix: vec![w],
                tail_mass: 0.0,
            }),
            achieved_moments: Some(Moments {
                mass: u,
                energy: u * sigma_min,
                mass_bound: 0.0,
                energy_bound: 0.0,
            }),
            entropy_value: exp_conjugate(u),
            reason: None,
        });
    }
    let y = match sup_phi(info) {
        Some((sup, _)) if rho > sup => {
            let value = pair_conjugate_with(seq, info, u, v, acc)?;
            return Ok(GibbsFit {
                status: FitStatus::PlateauNonAttained,
                dual_x: None,
                dual_y: None,
                weights: None,
                achieved_moments: None,
                entropy_value: value,
                reason: Some(format!("v/u = {rho} exceeds sup φ = {sup}; the infimum is not attained")),
            });
        }
        Some((sup, _)) if rho == sup => -info.alpha,
        _ => solve_phi(seq, info, rho, acc.with_tol(acc.tol / u.max(1.0)))?,
    };
    let f = eval(seq, y, 0, acc.with_tol(1e-3 * acc.tol.min(1.0)))?;
    let x = u.ln() - f.estimate().ln();
    let (law, moments, entropy) = gibbs(seq, x, y, acc)?;
    Ok(GibbsFit {
        status: FitStatus::InteriorUnique,
        dual_x: Some(x),
        dual_y: Some(y),
        weights: Some(law),
        achieved_moments: Some(moments),
        entropy_value: ExtReal::Finite(entropy),
        reason: None,
    })
}

/// One step of the plateau witness search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WitnessStep {
    pub q: u64,
    pub lambda: f64,
    pub gap: f64,
}

/// Finite-support weights with `Σ σ_n u_n = u`:
/// `e^{-σ_n α}` for `n < n̄`, `e^{-σ_n λ}` on `n̄ ≤ n < n̄ + q`, and the last
/// weight shifted by `last_adjustment` so that the moment is exact.
#[derive(Debug, Clone, Serialize)]
pub struct PlateauWitness {
    pub u: f64,
    pub alpha: f64,
    pub window_start: u64,
    pub window_len: u64,
    pub lambda: f64,
    pub last_adjustment: f64,
    pub entropy: f64,
    /// `f*(u) = -αu - f(-α)`.
    pub target: f64,
    pub gap: f64,
    pub history: Vec<WitnessStep>,
    /// Set when `u = γ`: the minimizer `e^{-σ_n α}` itself (infinite support).
    pub exact_minimizer: bool,
    #[serde(skip)]
    seq: Option<SigmaSequence>,
}

impl PlateauWitness {
    /// Support size (number of nonzero weights).
    pub fn support(&self) -> u64 {
        if self.exact_minimizer {
            u64::MAX
        } else {
            self.window_start - self.seq_start() + self.window_len
        }
    }

    fn seq_start(&self) -> u64 {
        self.seq.as_ref().map(|s| s.start_index()).unwrap_or(1)
    }

    /// The weights in index order, at most `limit` of them.
    pub fn weights(&self, limit: usize) -> Vec<Weight> {
        let Some(seq) = &self.seq else { return Vec::new() };
        let start = seq.start_index();
        let end = if self.exact_minimizer {
            u64::MAX
        } else {
            self.window_start + self.window_len
        };
        (start..end)
            .take(limit)
            .map(|n| {
                let s = seq.raw(n);
                let mut w = if n < self.window_start || self.exact_minimizer {
                    (-s * self.alpha).exp()
                } else {
                    (-s * self.lambda).exp()
                };
                if !self.exact_minimizer && n + 1 == end {
                    w += self.last_adjustment;
                }
                Weight {
                    index: WeightIndex::Index(n),
                    weight: w,
                }
            })
            .collect()
    }

    /// `(Σ σ_n u_n, Σ u_n (ln u_n - 1))` recomputed from the weights.
    pub fn recompute(&self) -> (f64, f64) {
        let n = self.support().min(usize::MAX as u64) as usize;
        let seq = self.seq.as_ref().expect("witness carries its sequence");
        let mut energy = CompensatedSum::new();
        let mut ent = CompensatedSum::new();
        for w in self.weights(n) {
            let WeightIndex::Index(i) = w.index else { unreachable!() };
            energy.add(seq.raw(i) * w.weight);
            ent.add(exp_conjugate(w.weight).unwrap());
        }
        (energy.value(), ent.value())
    }
}

/// Window energy `Σ σ e^{-σλ}` and its λ-derivative.
fn window_sums(sig: &[f64], lambda: f64) -> (f64, f64) {
    let mut h = CompensatedSum::new();
    let mut dh = CompensatedSum::new();
    for &s in sig {
        let t = s * (-s * lambda).exp();
        h.add(t);
        dh.add(-s * t);
    }
    (h.value(), dh.value())
}

/// ε-optimal witness for `f*(u)` on the plateau `u > γ`. Fails with
/// [`Error::WitnessBudget`] when the gap is still above `eps` once the
/// support reaches the term budget.
pub fn plateau_witness(seq: &SigmaSequence, u: f64, eps: f64, budget: &Budget) -> Result<PlateauWitness> {
    let (w, reached) = plateau_search(seq, u, eps, budget)?;
    if reached {
        Ok(w)
    } else {
        Err(Error::WitnessBudget {
            what: "plateau witness",
            max_terms: budget.limit(),
            best_gap: w.gap,
        })
    }
}

/// Like [`plateau_witness`] but returns the best witness found within the
/// budget, flagged with whether `eps` was reached.
pub fn plateau_search(seq: &SigmaSequence, u: f64, eps: f64, budget: &Budget) -> Result<(PlateauWitness, bool)> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let info = domain_info(seq);
    let (gamma, f_alpha) = match (info.boundary_class, info.gamma, info.f_at_boundary) {
        (BoundaryClass::ClosedFiniteSlope, ExtReal::Finite(g), ExtReal::Finite(f)) => {
            (g, f + 0.5 * info.f_at_boundary_bound)
        }
        (BoundaryClass::EmptyDomain, ..) => return Err(Error::EmptyDomain),
        _ => {
            return Err(Error::Precondition(format!(
                "γ = ∞ for `{seq}`: there is no plateau and f*(u) is attained for every u ≥ 0"
            )))
        }
    };
    let alpha = info.alpha;
    let target = -alpha * u - f_alpha;
    if u < gamma {
        return Err(Error::Precondition(format!("u = {u} is below γ = {gamma}; the minimum is attained")));
    }
    if u <= gamma + info.gamma_bound {
        return Ok((PlateauWitness {
            u,
            alpha,
            window_start: seq.start_index(),
            window_len: 0,
            lambda: alpha,
            last_adjustment: 0.0,
            entropy: target,
            target,
            gap: 0.0,
            history: Vec::new(),
            exact_minimizer: true,
            seq: Some(seq.clone()),
        }, true));
    }

    let start = seq.start_index();
    let max_terms = budget.limit();
    let mut n_bar = start;
    let mut prefix_energy = CompensatedSum::new();
    let mut prefix_entropy = CompensatedSum::new();
    while seq.raw(n_bar) < u {
        let s = seq.raw(n_bar);
        let w = (-s * alpha).exp();
        prefix_energy.add(s * w);
        prefix_entropy.add(w * (-s * alpha - 1.0));
        n_bar += 1;
        if n_bar - start >= max_terms {
            return Err(Error::WitnessBudget {
                what: "plateau witness prefix",
                max_terms,
                best_gap: f64::INFINITY,
            });
        }
    }
    let v = u - prefix_energy.value();
    let prefix_entropy = prefix_entropy.value();

    let mut sig: Vec<f64> = Vec::new();
    let mut lambda = 0.0f64;
    let mut history = Vec::new();
    let mut best: Option<PlateauWitness> = None;
    let mut q = 1u64;
    loop {
        budget.check()?;
        while (sig.len() as u64) < q {
            sig.push(seq.raw(n_bar + sig.len() as u64));
        }
        // Convex decreasing in λ and positive at the previous root, so Newton
        // iterates increase monotonically to the new root.
        for _ in 0..200 {
            let (h, dh) = window_sums(&sig, lambda);
            let step = (h - v) / dh;
            let next = (lambda - step).min(alpha);
            if !(next > lambda) || (next - lambda) <= 1e-15 * next.abs().max(1.0) {
                lambda = lambda.max(next.min(alpha));
                break;
            }
            lambda = next;
        }
        let (h, _) = window_sums(&sig, lambda);
        let last_sigma = *sig.last().expect("nonempty window");
        let last_w = (-last_sigma * lambda).exp();
        let adjustment = ((v - h) / last_sigma).max(-last_w);
        let mut ent = CompensatedSum::new();
        ent.add(prefix_entropy);
        for (i, &s) in sig.iter().enumerate() {
            let mut w = (-s * lambda).exp();
            if i + 1 == sig.len() {
                w += adjustment;
            }
            ent.add(exp_conjugate(w).unwrap());
        }
        let entropy = ent.value();
        let gap = entropy - target;
        history.push(WitnessStep { q, lambda, gap });
        let witness = PlateauWitness {
            u,
            alpha,
            window_start: n_bar,
            window_len: q,
            lambda,
            last_adjustment: adjustment,
            entropy,
            target,
            gap,
            history: history.clone(),
            exact_minimizer: false,
            seq: Some(seq.clone()),
        };
        if gap <= eps {
            return Ok((witness, true));
        }
        if best.as_ref().map_or(true, |b: &PlateauWitness| gap < b.gap) {
            best = Some(witness);
        }
        if n_bar - start + 2 * q > max_terms {
            let mut best = best.expect("at least one window tried");
            best.history = history;
            return Ok((best, false));
        }
        q *= 2;
    }
}


/// `q(u) = (1 + 2u - √(4u+1)) / (2u)`, the ratio of the minimizer
/// `γ̄_n = q^n` of `Σ γ_n (ln γ_n - 1)` subject to `Σ n γ_n = u`.
pub fn linear_minimizer_ratio(u: f64) -> f64 {
    2.0 * u / (1.0 + 2.0 * u + (4.0 * u + 1.0).sqrt())
}

/// Whether `v̄ = Σ (-1)^n ς_n q^n` converges, and its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum AltAttainment {
    Attained { v_bar: f64, terms: u64, tail_bound: f64 },
    Divergent,
}

/// Attainment test for the alternating two-moment problem: the infimum is
/// attained exactly at `v = v̄` when `v̄` converges.
pub fn alternating_attainment(u: f64, varsigma: &VarsigmaSequence, tol: f64) -> Result<AltAttainment> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::InvalidArgument(format!("u must be positive, got {u}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let q = linear_minimizer_ratio(u);
    match *varsigma {
        VarsigmaSequence::ExpSquare => Ok(AltAttainment::Divergent),
        VarsigmaSequence::ExpAlpha(a) => {
            let r = a.exp() * q;
            if r >= 1.0 {
                Ok(AltAttainment::Divergent)
            } else {
                Ok(AltAttainment::Attained {
                    v_bar: -r / (1.0 + r),
                    terms: 0,
                    tail_bound: 0.0,
                })
            }
        }
        VarsigmaSequence::PowerK(k) => {
            let ln_q = q.ln();
            let ln_a = |n: f64| k * n.ln() + n * ln_q;
            let mut sum = CompensatedSum::new();
            let mut n = 1u64;
            loop {
                let nf = n as f64;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sum.add(sign * ln_a(nf).exp());
                let r = ((nf + 2.0) / (nf + 1.0)).powf(k) * q;
                if r < 1.0 {
                    let tail = ln_a(nf + 1.0).exp() / (1.0 - r);
                    if tail <= 0.5 * tol {
                        return Ok(AltAttainment::Attained {
                            v_bar: sum.value(),
                            terms: n,
                            tail_bound: tail,
                        });
                    }
                }
                if n >= crate::numeric::DEFAULT_MAX_TERMS {
                    return Err(Error::numeric("alternating attainment", format!("no convergence after {n} terms")));
                }
                n += 1;
            }
        }
    }
}

/// Finite-support witness for the alternating problem
/// `min Σ γ_n (ln γ_n - 1)` s.t. `Σ n γ_n = u`, `Σ (-1)^n ς_n γ_n = v`.
#[derive(Debug, Clone, Serialize)]
pub struct AlternatingWitness {
    pub u: f64,
    pub v: f64,
    pub weights: Vec<Weight>,
    /// Prefix `γ̄_k = q^k` runs over `1..=prefix_len`.
    pub prefix_len: u64,
    /// The correcting pair sits at `(pair_index, pair_index + 1)`.
    pub pair_index: Option<u64>,
    pub entropy: f64,
    /// `f*(u)` for `σ_n = n`.
    pub target: f64,
    pub gap: f64,
    pub mass_residual: f64,
    pub signed_residual: f64,
    /// `Σ ς_n γ_n`; rounding in the signed moment is relative to this.
    pub signed_scale: f64,
}

pub fn alternating_witness(
    u: f64,
    v: f64,
    eps: f64,
    varsigma: &VarsigmaSequence,
    budget: &Budget,
) -> Result<AlternatingWitness> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if u.is_nan() || v.is_nan() || u < 0.0 {
        return Err(Error::Infeasible(format!("u = {u} must be nonnegative")));
    }
    if u == 0.0 {
        if v != 0.0 {
            return Err(Error::Infeasible(format!(
                "u = 0 forces every weight to vanish, so v = {v} cannot be met"
            )));
        }
        return Ok(AlternatingWitness {
            u,
            v,
            weights: Vec::new(),
            prefix_len: 0,
            pair_index: None,
            entropy: 0.0,
            target: 0.0,
            gap: 0.0,
            mass_residual: 0.0,
            signed_residual: 0.0,
            signed_scale: 0.0,
        });
    }
    let linear = SigmaSequence::linear();
    let target = crate::conjugate::conjugate(&linear, u, 1e-13)?.value.unwrap();
    let q = linear_minimizer_ratio(u);
    let ln_q = q.ln();
    let max_terms = budget.limit();

    // Tail of Σ |q^k (k ln q - 1)| and of Σ k q^k beyond n, in closed form.
    let tail_mass = |n: f64| q.powf(n + 1.0) * ((n + 1.0) - n * q) / ((1.0 - q) * (1.0 - q));
    let tail_entropy = |n: f64| tail_mass(n) * ln_q.abs() + q.powf(n + 1.0) / (1.0 - q);
    let mut n_bar = 1u64;
    while tail_entropy(n_bar as f64) > 0.5 * eps {
        n_bar += 1;
    }

    loop {
        budget.check()?;
        let mut weights = Vec::with_capacity(n_bar as usize + 2);
        let mut signed = CompensatedSum::new();
        let mut ent = CompensatedSum::new();
        for k in 1..=n_bar {
            let kf = k as f64;
            let w = (kf * ln_q).exp();
            weights.push(Weight {
                index: WeightIndex::Index(k),
                weight: w,
            });
            signed.add(alt_sign(k) * (varsigma.ln_value(k) + kf * ln_q).exp());
            ent.add(w * (kf * ln_q - 1.0));
        }
        let u_rest = tail_mass(n_bar as f64);
        let v_rest = v - signed.value();
        if !v_rest.is_finite() {
            return Err(Error::numeric(
                "alternating witness",
                format!("signed prefix sum overflows at n = {n_bar}"),
            ));
        }
        let ln_u = u_rest.ln();
        let ln_abs_v = v_rest.abs().ln();
        let fits = |m: u64| ln_u + varsigma.ln_value(m) >= (m as f64).ln() + ln_abs_v;
        let mut m = n_bar + 1;
        while !(fits(m) && fits(m + 1)) {
            m += 1;
            if m > max_terms {
                return Err(Error::WitnessBudget {
                    what: "alternating witness",
                    max_terms,
                    best_gap: f64::INFINITY,
                });
            }
        }
        // Solve m A + (m+1) B = u', (-1)^m (ς_m A - ς_{m+1} B) = v'
        // in the overflow-free form divided by ς_{m+1}.
        let mf = m as f64;
        let rho = (varsigma.ln_value(m) - varsigma.ln_value(m + 1)).exp();
        let sv = alt_sign(m) * v_rest * (-varsigma.ln_value(m + 1)).exp();
        let den = mf + (mf + 1.0) * rho;
        let a = ((u_rest + (mf + 1.0) * sv) / den).max(0.0);
        let b = ((u_rest * rho - mf * sv) / den).max(0.0);
        ent.add(exp_conjugate(a).unwrap());
        ent.add(exp_conjugate(b).unwrap());
        weights.push(Weight {
            index: WeightIndex::Index(m),
            weight: a,
        });
        weights.push(Weight {
            index: WeightIndex::Index(m + 1),
            weight: b,
        });
        let entropy = ent.value();
        let gap = entropy - target;

        let mut mass = CompensatedSum::new();
        let mut sig = CompensatedSum::new();
        let mut scale = CompensatedSum::new();
        for w in &weights {
            let WeightIndex::Index(n) = w.index else { unreachable!() };
            mass.add(n as f64 * w.weight);
            if w.weight > 0.0 {
                let t = (varsigma.ln_value(n) + w.weight.ln()).exp();
                sig.add(alt_sign(n) * t);
                scale.add(t);
            }
        }
        let witness = AlternatingWitness {
            u,
            v,
            weights,
            prefix_len: n_bar,
            pair_index: Some(m),
            entropy,
            target,
            gap,
            mass_residual: mass.value() - u,
            signed_residual: sig.value() - v,
            signed_scale: scale.value(),
        };
        if gap <= eps {
            return Ok(witness);
        }
        if 2 * n_bar > max_terms {
            return Err(Error::WitnessBudget {
                what: "alternating witness",
                max_terms,
                best_gap: gap,
            });
        }
        n_bar *= 2;
    }
}

fn alt_sign(n: u64) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
