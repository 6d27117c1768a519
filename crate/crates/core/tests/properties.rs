use gibbs_series::conjugate::{conjugate, fenchel_young_gap, log_f_conjugate, pair_conjugate};
use gibbs_series::entropy::{fit_gibbs, FitStatus, WeightIndex};
use gibbs_series::oracle::{box_h, check_gradient_sum, primal_truncated, Targets};
use gibbs_series::sequences::sigma;
use gibbs_series::series::{domain_info, eval, ln_f, phi};
use gibbs_series::SigmaSequence;
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// Sequences with open domain `y < 0`.
fn open_seq() -> impl Strategy<Value = SigmaSequence> {
    prop_oneof![
        Just(SigmaSequence::linear()),
        Just(SigmaSequence::quadratic()),
        (0.5f64..3.0).prop_map(|t| SigmaSequence::power(t).unwrap()),
        (0.5f64..2.0).prop_map(|k| SigmaSequence::box_triple(k).unwrap()),
    ]
}

/// A sequence paired with an interior point of its domain.
fn seq_and_y() -> impl Strategy<Value = (SigmaSequence, f64)> {
    prop_oneof![
        (open_seq(), -5.0f64..-0.3),
        ((2.5f64..4.0), -3.0f64..-1.05).prop_map(|(t, y)| (SigmaSequence::log_fam(t).unwrap(), y)),
    ]
}

fn f(seq: &SigmaSequence, y: f64, p: u32) -> f64 {
    eval(seq, y, p, TOL).unwrap().estimate()
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn sigma_is_nondecreasing(t in 0.3f64..4.0, k in 0usize..4) {
        let seq = match k {
            0 => SigmaSequence::power(t).unwrap(),
            1 => SigmaSequence::log_fam(t).unwrap(),
            2 => SigmaSequence::linear(),
            _ => SigmaSequence::quadratic(),
        };
        let start = seq.start_index();
        let mut prev = sigma(&seq, start).unwrap();
        prop_assert!((prev - seq.min_sigma()).abs() <= 1e-12 * prev.abs().max(1.0));
        for n in start + 1..start + 200 {
            let s = sigma(&seq, n).unwrap();
            prop_assert!(s >= prev, "sigma({n}) = {s} < {prev}");
            prev = s;
        }
    }

    #[test]
    fn tighter_eval_stays_in_bracket((seq, y) in seq_and_y(), p in 0u32..3) {
        let loose = eval(&seq, y, p, 1e-8).unwrap();
        let tight = eval(&seq, y, p, 1e-13).unwrap();
        let slack = 1e-14 * tight.value.abs().max(1.0);
        prop_assert!(tight.value >= loose.value - slack, "{loose:?} {tight:?}");
        prop_assert!(tight.upper() <= loose.upper() + slack, "{loose:?} {tight:?}");
        prop_assert!(loose.tail_bound <= 1e-8 * loose.value.abs().max(1.0) * 1.0001 + 1e-8);
    }

    #[test]
    fn f_and_ln_f_are_convex((seq, y) in seq_and_y(), d in 0.01f64..0.25) {
        let (a, b) = (y - d, y + d);
        prop_assume!(domain_info(&seq).is_interior(b) || b < 0.0 && seq.min_sigma() >= 0.0 && !domain_info(&seq).is_closed());
        let fm = f(&seq, y, 0);
        let fa = f(&seq, a, 0);
        let fb = f(&seq, b, 0);
        prop_assert!(fm <= 0.5 * (fa + fb) + 1e-12 * fm.abs().max(1.0));
        let lm = ln_f(&seq, y, TOL).unwrap();
        let la = ln_f(&seq, a, TOL).unwrap();
        let lb = ln_f(&seq, b, TOL).unwrap();
        prop_assert!(lm <= 0.5 * (la + lb) + 1e-11);
    }

    #[test]
    fn phi_is_nondecreasing((seq, y) in seq_and_y(), d in 0.001f64..0.5) {
        let lo = y - d;
        let a = phi(&seq, lo, TOL).unwrap();
        let b = phi(&seq, y, TOL).unwrap();
        prop_assert!(b >= a - 1e-10, "phi({lo}) = {a} > phi({y}) = {b}");
        prop_assert!(a >= seq.min_sigma() - 1e-10);
    }

    #[test]
    fn deep_points_are_dominated_by_the_ground_term(seq in open_seq()) {
        let y = -40.0;
        let v = f(&seq, y, 0);
        let bound = 2.0 * (seq.ground_multiplicity() as f64) * (seq.min_sigma() * y).exp();
        prop_assert!(v <= bound, "f(-40) = {v:e} > {bound:e}");
    }

    #[test]
    fn fenchel_young_is_nonnegative((seq, y) in seq_and_y(), u in 0.0f64..20.0) {
        let gap = fenchel_young_gap(&seq, y, u, TOL).unwrap();
        if let Some(g) = gap.finite() {
            prop_assert!(g >= -1e-9 * u.max(1.0), "gap {g}");
        }
    }

    #[test]
    fn fenchel_young_equality_at_the_gradient((seq, y) in seq_and_y()) {
        let u = f(&seq, y, 1);
        let g = fenchel_young_gap(&seq, y, u, TOL).unwrap().unwrap();
        prop_assert!(g.abs() <= 1e-8 * u.max(1.0), "gap {g} at u = {u}");
    }

    #[test]
    fn conjugate_is_convex(seq in open_seq(), a in 0.01f64..10.0, b in 0.01f64..10.0) {
        let c = |u: f64| conjugate(&seq, u, TOL).unwrap().value.unwrap();
        let m = 0.5 * (a + b);
        prop_assert!(c(m) <= 0.5 * (c(a) + c(b)) + 1e-9);
    }

    #[test]
    fn log_conjugate_is_convex(seq in open_seq(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let s0 = seq.min_sigma();
        let (va, vb) = (s0 + 0.05 + 4.0 * a, s0 + 0.05 + 4.0 * b);
        let c = |v: f64| log_f_conjugate(&seq, v, TOL).unwrap().unwrap();
        prop_assert!(c(0.5 * (va + vb)) <= 0.5 * (c(va) + c(vb)) + 1e-9);
    }

    #[test]
    fn conjugate_is_affine_on_the_plateau(t in 2.5f64..4.0, a in 0.1f64..5.0, b in 0.1f64..5.0) {
        let seq = SigmaSequence::log_fam(t).unwrap();
        let info = domain_info(&seq);
        let gamma = info.gamma.unwrap() + info.gamma_bound;
        let (ua, ub) = (gamma + a, gamma + b);
        let c = |u: f64| conjugate(&seq, u, TOL).unwrap().value.unwrap();
        let mid = c(0.5 * (ua + ub));
        prop_assert!((mid - 0.5 * (c(ua) + c(ub))).abs() <= 1e-9 * mid.abs().max(1.0));
        let fb = info.f_at_boundary.unwrap() + 0.5 * info.f_at_boundary_bound;
        prop_assert!((c(ua) - (-info.alpha * ua - fb)).abs() <= 1e-9 * ua.max(1.0));
    }

    #[test]
    fn gibbs_fit_recovers_the_dual_point((seq, y) in seq_and_y(), x in -1.0f64..1.0) {
        let e = x.exp();
        let (u, v) = (e * f(&seq, y, 0), e * f(&seq, y, 1));
        // tolerances are absolute; below this the moments themselves are unresolved
        prop_assume!(u > 1e-3);
        let fit = fit_gibbs(&seq, u, v, TOL).unwrap();
        prop_assert_eq!(fit.status, FitStatus::InteriorUnique);
        prop_assert!((fit.dual_y.unwrap() - y).abs() <= 1e-7 * y.abs().max(1.0), "{:?} vs {y}", fit.dual_y);
        prop_assert!((fit.dual_x.unwrap() - x).abs() <= 1e-7, "{:?} vs {x}", fit.dual_x);
        let h = fit.entropy_value.unwrap();
        let dual = pair_conjugate(&seq, u, v, TOL).unwrap().unwrap();
        prop_assert!((h - dual).abs() <= 1e-8 * h.abs().max(1.0), "{h} vs {dual}");
        prop_assert!((h - (x * u + y * v - u)).abs() <= 1e-8 * h.abs().max(1.0));
        let (fx, fy) = (fit.dual_x.unwrap(), fit.dual_y.unwrap());
        let law = fit.weights.unwrap();
        for w in law.prefix.iter().take(20) {
            if let WeightIndex::Index(n) = w.index {
                let expect = (fx + fy * sigma(&seq, n).unwrap()).exp();
                prop_assert!((w.weight - expect).abs() <= 1e-12 * expect);
            }
        }
    }

    #[test]
    fn feasible_perturbations_raise_entropy(y in -3.0f64..-0.3, x in -1.0f64..1.0, t in -1.0f64..1.0) {
        prop_assume!(t.abs() > 1e-3);
        let seq = SigmaSequence::quadratic();
        let s: Vec<f64> = (1..=3).map(|n| sigma(&seq, n).unwrap()).collect();
        let w: Vec<f64> = s.iter().map(|si| (x + y * si).exp()).collect();
        let d = [s[2] - s[1], s[0] - s[2], s[1] - s[0]];
        prop_assert!(d.iter().sum::<f64>().abs() < 1e-12);
        prop_assert!(d.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-9);
        let step = t * 0.5 * w.iter().cloned().fold(f64::INFINITY, f64::min)
            / d.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let delta: Vec<f64> = d.iter().map(|di| step * di).collect();
        let first: f64 = w.iter().zip(&delta).map(|(wi, di)| di * wi.ln()).sum();
        let first_scale: f64 = w.iter().zip(&delta).map(|(wi, di)| (di * wi.ln()).abs()).sum();
        prop_assert!(first.abs() <= 1e-12 * first_scale, "first-order change {first:e}");
        let second: f64 = w
            .iter()
            .zip(&delta)
            .map(|(wi, di)| (wi + di) * (di / wi).ln_1p() - di)
            .sum();
        prop_assert!(second > 0.0, "second-order change {second:e}");
    }

    #[test]
    fn box_gradient_round_trips(k in 0.5f64..2.0, x in -1.0f64..1.0, y in -3.0f64..-0.3) {
        let (_, g) = box_h(k, x, y).unwrap();
        let fit = fit_gibbs(&SigmaSequence::box_triple(k).unwrap(), g[0], g[1], TOL).unwrap();
        prop_assert!((fit.dual_x.unwrap() - x).abs() <= 1e-7);
        prop_assert!((fit.dual_y.unwrap() - y).abs() <= 1e-7 * y.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(cfg(16))]

    #[test]
    fn truncated_primal_sandwiches_the_dual(y in -2.0f64..-0.5, lin in any::<bool>()) {
        let seq = if lin { SigmaSequence::linear() } else { SigmaSequence::quadratic() };
        let (u, v) = (f(&seq, y, 0), f(&seq, y, 1));
        let target = pair_conjugate(&seq, u, v, TOL).unwrap().unwrap();
        let mut prev = f64::INFINITY;
        for n in [6usize, 12, 24, 48] {
            let sol = primal_truncated(&seq, n, Targets::MassEnergy { mass: u, energy: v }, 1e-12).unwrap();
            prop_assert!(sol.entropy >= target - 1e-9, "N = {n}: {} < {target}", sol.entropy);
            prop_assert!(sol.entropy <= prev + 1e-9, "N = {n}: {} > {prev}", sol.entropy);
            prev = sol.entropy;
        }
        prop_assert!((prev - target).abs() <= 1e-7 * target.abs().max(1.0));
    }

    #[test]
    fn central_difference_error_is_second_order((seq, y) in seq_and_y()) {
        let h = 2e-2;
        let e1 = check_gradient_sum(&seq, y, h, 1.0).unwrap().abs_gap;
        let e2 = check_gradient_sum(&seq, y, h / 2.0, 1.0).unwrap().abs_gap;
        prop_assume!(e2 > 1e-11);
        let ratio = e1 / e2;
        prop_assert!((3.5..4.5).contains(&ratio), "ratio {ratio} ({e1:e} / {e2:e})");
    }
}
