//! Reference values computed independently (40-digit mpmath: direct sums
//! with Euler–Maclaurin tails, root finding on the closed-form moments) and
//! frozen here.

use std::f64::consts::LN_2;

use gibbs_series::conjugate::{box_conjugate, conjugate, log_f_conjugate_point};
use gibbs_series::entropy::fit_gibbs;
use gibbs_series::series::{domain_info, eval};
use gibbs_series::SigmaSequence;

const LOGFAM3_F_AT_MINUS_ONE: f64 = 0.564_496_185_305_682_5;
const LOGFAM3_GAMMA: f64 = 1.833_083_587_401_045_9;
const LOGFAM3_F2_AT_MINUS_TWO: f64 = 0.220_268_226_678_324_25;
const QUAD_F_AT_MINUS_ONE: f64 = 0.386_318_602_413_326_08;
const QUAD_PHI_INV_2: f64 = -0.384_530_823_144_113_23;
const QUAD_LOG_CONJ_2: f64 = -0.695_582_040_353_455_04;
const QUAD_CONJ_1: f64 = -1.243_671_125_384_486_9;
const QUAD_CONJ_1_Y: f64 = -0.581_222_597_709_491_3;
const BOX_Y_STAR: f64 = -0.718_805_676_352_036_1;
const BOX_X_STAR: f64 = 1.819_268_298_386_746_1;
const BOX_H_STAR: f64 = -2.055_954_407_021_398_2;
const SQRT_SERIES_DERIV: f64 = 3.862_996_036_596_387_2;

fn close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (gap {:e})", (a - b).abs());
}

#[test]
fn log_family_boundary_values() {
    let info = domain_info(&SigmaSequence::log_fam(3.0).unwrap());
    let f = info.f_at_boundary.unwrap();
    let g = info.gamma.unwrap();
    assert!(f <= LOGFAM3_F_AT_MINUS_ONE + 1e-13 && LOGFAM3_F_AT_MINUS_ONE <= f + info.f_at_boundary_bound + 1e-13);
    assert!(g <= LOGFAM3_GAMMA + 1e-13 && LOGFAM3_GAMMA <= g + info.gamma_bound + 1e-13);
}

#[test]
fn log_family_second_derivative() {
    let e = eval(&SigmaSequence::log_fam(3.0).unwrap(), -2.0, 2, 1e-12).unwrap();
    assert!(e.value <= LOGFAM3_F2_AT_MINUS_TWO + 1e-14 && LOGFAM3_F2_AT_MINUS_TWO <= e.upper() + 1e-14, "{e:?}");
}

#[test]
fn quadratic_values() {
    let e = eval(&SigmaSequence::quadratic(), -1.0, 0, 1e-9).unwrap();
    close(e.value, QUAD_F_AT_MINUS_ONE, 1e-9, "f(-1)");
    let l = log_f_conjugate_point(&SigmaSequence::quadratic(), 2.0, 1e-12).unwrap();
    close(l.attaining_y.unwrap(), QUAD_PHI_INV_2, 1e-10, "phi^-1(2)");
    close(l.value.unwrap(), QUAD_LOG_CONJ_2, 1e-11, "(ln f)*(2)");
    let c = conjugate(&SigmaSequence::quadratic(), 1.0, 1e-12).unwrap();
    close(c.value.unwrap(), QUAD_CONJ_1, 1e-11, "f*(1)");
    close(c.attaining_y.unwrap(), QUAD_CONJ_1_Y, 1e-10, "y for f*(1)");
}

#[test]
fn box_interior_dual_point() {
    let fit = fit_gibbs(&SigmaSequence::box_triple(1.0).unwrap(), 1.0, 4.0, 1e-12).unwrap();
    close(fit.dual_y.unwrap(), BOX_Y_STAR, 1e-10, "y*");
    close(fit.dual_x.unwrap(), BOX_X_STAR, 1e-9, "x*");
    close(fit.entropy_value.unwrap(), BOX_H_STAR, 1e-10, "entropy");
    close(box_conjugate(1.0, 4.0, 1e-12).unwrap().unwrap(), BOX_H_STAR, 1e-10, "h*(1,4)");
}

#[test]
fn fractional_power_gamma_bound_path() {
    let e = eval(&SigmaSequence::power(0.5).unwrap(), -1.0, 1, 1e-11).unwrap();
    assert!(e.value <= SQRT_SERIES_DERIV + 1e-13 && SQRT_SERIES_DERIV <= e.upper() + 1e-13, "{e:?}");
}

#[test]
fn geometric_closed_forms() {
    let c = conjugate(&SigmaSequence::linear(), 2.0, 1e-12).unwrap();
    close(c.value.unwrap(), -1.0 - 2.0 * LN_2, 1e-11, "f*(2)");
}

#[test]
fn log_family_third_term() {
    let s = gibbs_series::sequences::sigma(&SigmaSequence::log_fam(1.0).unwrap(), 3).unwrap();
    close(s, 1.192_660_116_284_808_7, 1e-15, "sigma_3");
}
