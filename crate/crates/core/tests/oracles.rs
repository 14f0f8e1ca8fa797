//! Frozen oracle values and end-to-end claim checks on the reference models.

use std::f64::consts::{E, PI};

use num_complex::Complex64;

use kt_decay::density::Density;
use kt_decay::numeric::log_grid;
use kt_decay::operators::OperatorModel;
use kt_decay::ratefun::RateFunction;
use kt_decay::verify::{
    check_comparisons, check_lower, check_sandwich_quasimult, check_upper_mlog, check_upper_posinc, delta_estimate,
    majorant_power_law, necessity_diagnostic, NRange, Verdict,
};

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Brute-force max of `m(θ)·log(θ/ε)` on a dense log grid.
fn dense_m_max(m: impl Fn(f64) -> f64, eps: f64) -> (f64, f64) {
    let k = 2_000_000;
    let span = (PI / eps).ln();
    (0..=k)
        .map(|i| {
            let th = eps * (span * i as f64 / k as f64).exp();
            (m(th) * (th / eps).ln(), th)
        })
        .fold((0.0, eps), |a, b| if b.0 > a.0 { b } else { a })
}

/// Brute-force distance from `e^{iθ}` to the image of the closed disk under the symbol.
fn dense_symbol_distance(d: &Density, theta: f64, radii: usize, angles: usize) -> f64 {
    let z = Complex64::from_polar(1.0, theta);
    let mut best = f64::INFINITY;
    for i in 0..=radii {
        let rho = i as f64 / radii as f64;
        for j in 0..angles {
            let t = -PI + 2.0 * PI * j as f64 / angles as f64;
            let w = d.phi(Complex64::from_polar(rho, t)).unwrap().value;
            best = best.min((z - w).norm());
        }
    }
    best
}

#[test]
fn m_max_of_reciprocal_matches_dense_oracle() {
    let m = RateFunction::power_law(1.0, 1.0).unwrap();
    for eps in [1e-2, 1e-4, 1e-7] {
        let p = m.m_max_point(eps, 64).unwrap();
        let (v, th) = dense_m_max(|t| 1.0 / t, eps);
        assert!(rel(p.value, 1.0 / (E * eps)) < 1e-12);
        assert!(rel(p.value, v) < 1e-9 && rel(p.theta, th) < 1e-3);
        assert!(rel(p.theta, E * eps) < 1e-6);
    }
}

#[test]
fn m_max_of_inverse_square() {
    let m = RateFunction::power_law(1.0, 2.0).unwrap();
    let v = m.m_max(1e-3).unwrap();
    assert!(rel(v, 1e6 / (2.0 * E)) < 1e-6);
    assert!(rel(dense_m_max(|t| t.powi(-2), 1e-3).0, v) < 1e-9);
    assert!(rel(m.m_max_inverse(1e6 / (2.0 * E)).unwrap().eps, 1e-3) < 1e-6);
    let m1 = RateFunction::power_law(1.0, 1.0).unwrap();
    assert!(rel(m1.m_max_inverse(1.0 / (E * 1e-2)).unwrap().eps, 1e-2) < 1e-6);
}

#[test]
fn table_round_trip() {
    let eps: Vec<f64> = (1..=30).map(|k| 2f64.powi(-k)).collect();
    let vals: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln() / e).collect();
    let m = RateFunction::from_table(eps, vals).unwrap();
    let s = 2f64.powi(10) * (2f64.powi(10)).ln();
    assert!(rel(m.right_inverse(s).unwrap().eps, 2f64.powi(-10)) < 1e-9);
}

#[test]
fn log_example_symbol_at_minus_one() {
    let d = Density::log_example(1 << 16).unwrap();
    let v = d.phi(Complex64::new(-1.0, 0.0)).unwrap().value;
    assert!((v.re - (-1.0 + 2.0 * 2f64.ln())).abs() < 1e-14 && v.im.abs() < 1e-15);
    // partial sums Σ aₙ(−1)ⁿ
    let partial: f64 = (2..200_000u64).map(|n| (-1f64).powi(n as i32) / (n as f64 * (n - 1) as f64)).sum();
    assert!((partial - v.re).abs() < 1e-8);
}

#[test]
fn lazy_distance_at_minus_one_matches_dense_oracle() {
    let d = Density::lazy_bernoulli(0.5).unwrap();
    let t = OperatorModel::toeplitz(d.clone()).unwrap();
    assert!((t.spectrum_distance(PI).unwrap().value - 1.0).abs() < 1e-12);
    assert!((t.resolvent_norm(PI).unwrap() - 1.0).abs() < 1e-12);
    for th in [0.3, 1.0, 2.5] {
        let exact = (Complex64::from_polar(1.0, th) - 0.5).norm() - 0.5;
        assert!((t.spectrum_distance(th).unwrap().value - exact).abs() < 1e-12);
        assert!(dense_symbol_distance(&d, th, 200, 2000) - exact < 1e-4);
    }
}

#[test]
fn log_example_distance_matches_dense_oracle() {
    let d = Density::log_example(1 << 16).unwrap();
    let t = OperatorModel::toeplitz(d.clone()).unwrap();
    for th in [0.5, 1.5, 3.0] {
        let model = t.spectrum_distance(th).unwrap().value;
        let dense = dense_symbol_distance(&d, th, 400, 4000);
        // the dense scan can only overestimate the distance
        assert!(model <= dense * (1.0 + 1e-9) && rel(model, dense) < 1e-3, "θ = {th}: {model} vs {dense}");
    }
}

#[test]
fn log_example_resolvent_near_one() {
    let t = OperatorModel::toeplitz(Density::log_example(1 << 16).unwrap()).unwrap();
    let r = t.resolvent_norm(1e-4).unwrap();
    let asym = 2.0 * 1e4f64.ln() / (PI * 1e-4);
    // the ratio at θ = 1e-4 is 1.398: outside ±15% (lower-order terms decay like 1/log θ)
    assert!(rel(r, 1.398 * asym) < 2e-3, "{}", r / asym);
    let env = t.resolvent_envelope(1e-4).unwrap();
    assert!(rel(env, r) < 1e-6);
}

#[test]
fn curve_envelope_exponent() {
    let t = OperatorModel::radial_curve(1.0, 2.0).unwrap();
    let eps = log_grid(1e-5, 1e-3, 8);
    let (x, y): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .map(|&e| (e.ln(), t.resolvent_envelope(e).unwrap().ln()))
        .unzip();
    let slope = kt_decay::numeric::trend_slope(&x, &y).unwrap();
    assert!((slope + 2.0).abs() < 0.1, "{slope}");
}

#[test]
fn lazy_decay_closed_form() {
    let t = OperatorModel::toeplitz(Density::lazy_bernoulli(0.5).unwrap()).unwrap();
    for n in [1u64, 4, 37, 1000] {
        let nf = n as f64;
        let closed = ((nf / 2.0) * nf.ln() - ((nf + 1.0) / 2.0) * (nf + 1.0).ln()).exp();
        assert!(rel(t.decay_norm(n).value, closed) < 1e-10, "n = {n}");
    }
    assert!((t.decay_norm(4).value - 16.0 / 5f64.powf(2.5)).abs() < 1e-12);
}

#[test]
fn log_example_decay_ratio() {
    let t = OperatorModel::toeplitz(Density::log_example(1 << 16).unwrap()).unwrap();
    let r = t.decay_norm(1000).value / t.decay_norm(10_000).value;
    let model = 10.0 * 3.0 / 4.0;
    assert!(r >= 0.9 * model && r <= 1.1 * model, "{r}");
}

#[test]
fn section_oracles() {
    let s = OperatorModel::toeplitz(Density::lazy_bernoulli(0.5).unwrap())
        .unwrap()
        .finite_section(512)
        .unwrap();
    assert!(rel(s.decay_norm(1).unwrap().value, 0.5) < 0.02);
    assert!(rel(s.decay_norm(4).unwrap().value, 0.286217) < 0.02);
}

fn log_majorant() -> RateFunction {
    RateFunction::power_log(2.2, 1.0, 1.0).unwrap().with_domain(1e-12, 0.18).unwrap()
}

#[test]
fn upper_posinc_log_example() {
    let t = OperatorModel::toeplitz(Density::log_example(1 << 16).unwrap()).unwrap();
    let r = check_upper_posinc(&t, &log_majorant(), NRange::new(100, 10_000)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    for m in &r.parts[0].margins {
        let n = m.n as f64;
        assert!(m.lhs * n / n.ln() < 1.0);
    }
}

#[test]
fn upper_mlog_log_example_and_curve() {
    let t = OperatorModel::toeplitz(Density::log_example(1 << 16).unwrap()).unwrap();
    let m = RateFunction::power_log(6.0, 1.0, 1.0).unwrap();
    let r = check_upper_mlog(&t, &m, 0.5, NRange::new(100, 10_000)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    assert!(r.constants["C"].is_finite());

    let curve = OperatorModel::radial_curve(1.0, 2.0).unwrap();
    let env = curve.envelope_rate_function(1e-6).unwrap();
    let m = majorant_power_law(&env, 2.0, 1e-6, 0.5).unwrap();
    let r = check_upper_mlog(&curve, &m, 0.5, NRange::new(100, 10_000)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
}

#[test]
fn lower_bound_log_example() {
    let t = OperatorModel::toeplitz(Density::log_example(1 << 16).unwrap()).unwrap();
    let m = RateFunction::power_log(2.0 / PI, 1.0, 1.0).unwrap();
    let r = check_lower(&t, &m, &[0.5, 1.0, 2.0], NRange::new(100, 10_000)).unwrap();
    assert_eq!(r.parts.len(), 3);
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
}

#[test]
fn delta_estimates_on_reference_models() {
    let curve = OperatorModel::radial_curve(1.0, 2.0).unwrap();
    let small = delta_estimate(&curve, &log_grid(1e-6, 1e-5, 4)).unwrap().delta_hat;
    let larger = delta_estimate(&curve, &log_grid(1e-3, 1e-2, 4)).unwrap().delta_hat;
    assert!(small < larger && small < 1e-4);
    let lazy = OperatorModel::toeplitz(Density::lazy_bernoulli(0.5).unwrap()).unwrap();
    let d = delta_estimate(&lazy, &log_grid(1e-4, 1e-2, 4)).unwrap();
    assert!(d.delta_hat > 0.0 && d.delta_hat < 1.0 && d.window == (1e-4, 1e-2));
}

#[test]
fn sandwich_on_curve_and_identity() {
    let curve = OperatorModel::radial_curve(1.0, 2.0).unwrap();
    let r = check_sandwich_quasimult(&curve, 0.1, Some(0.2), 1.5, NRange::new(1000, 100_000)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    let id = OperatorModel::identity();
    for dp in [0.2, 0.5, 0.99] {
        let r = check_sandwich_quasimult(&id, 0.1, Some(dp), 1.5, NRange::new(100, 1000)).unwrap();
        assert!(matches!(r.parts[1].verdict, Verdict::HypothesisNotSatisfied { .. }));
    }
}

#[test]
fn comparison_examples() {
    let m1 = RateFunction::power_law(1.0, 1.0).unwrap();
    let r = check_comparisons(&m1, 1.0, 1.5, 2.0, NRange::new(1000, 100_000)).unwrap();
    assert!(r.parts.iter().all(|p| p.verdict == Verdict::Pass), "{r:?}");
    // m_max⁻¹ / m⁻¹ = 1/e exactly for ε⁻¹
    for m in &r.parts[1].margins {
        assert!(rel(m.ratio, 1.0 / E) < 1e-9);
    }
    let m2 = RateFunction::power_law(1.0, 2.0).unwrap();
    let r = check_comparisons(&m2, 2.0, 1.0, 2.0, NRange::new(100, 10_000)).unwrap();
    assert_eq!(r.parts[2].verdict, Verdict::Pass);
    // equality case: ratio is 1 up to inversion accuracy
    for m in &r.parts[2].margins {
        assert!((m.ratio - 1.0).abs() < 1e-9);
    }
}

#[test]
fn necessity_on_reference_models() {
    let curve = OperatorModel::radial_curve(1.0, 2.0).unwrap();
    let env = curve.envelope_rate_function(1e-7).unwrap();
    let m = majorant_power_law(&env, 2.0, 1e-7, 0.5).unwrap();
    let r = necessity_diagnostic(&curve, &m, 2.0, 0.5, NRange::new(100, 10_000)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    assert!(!r.notes.iter().any(|n| n == "paper-inconsistency"));

    let t = OperatorModel::toeplitz(Density::log_example(1 << 16).unwrap()).unwrap();
    let r = necessity_diagnostic(&t, &log_majorant(), 1.0, 0.25, NRange::new(100, 10_000)).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
}
