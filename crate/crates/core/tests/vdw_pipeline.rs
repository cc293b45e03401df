use std::time::Instant;

use cgf_core::mcgf::shift_to_v;
use cgf_core::quad::{integrate, QuadOptions};
use cgf_core::su11::{disentangle, exponent_factor, rx_operator, Bracket};
use cgf_core::vdw::{
    inner_integral_j, oracle_j, rx_oracle, second_order_energy, second_order_energy_oracle, TimeSeries,
    VdwConfig,
};
use num_complex::Complex64;

const PUBLISHED: f64 = 6.499026;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn c6_at_default_configuration() {
    let start = Instant::now();
    let r = second_order_energy(&VdwConfig::default()).unwrap();
    assert!(start.elapsed().as_secs() < 300);
    assert!(rel(r.c6, PUBLISHED) < 1e-3, "{r:?}");
    assert!(r.c6 > 0.0);
    assert!(r.imag_part.abs() <= 1e-8 * r.c6);
    assert!(r.estimated_error < 1e-6);
}

#[test]
fn c6_is_stable_under_tighter_tolerances_and_contour_changes() {
    let base = VdwConfig::default();
    let r = second_order_energy(&base).unwrap();
    let tight = second_order_energy(&VdwConfig { quad_tol: 1e-10, ..base }).unwrap();
    assert!(rel(tight.c6, r.c6) < 1e-4);
    assert!(rel(tight.c6, PUBLISHED) < 1e-4);
    for scale in [0.5, 2.0] {
        let moved = second_order_energy(&VdwConfig {
            contour_scale: scale,
            ..base
        })
        .unwrap();
        assert!((moved.c6 - r.c6).abs() < r.estimated_error.max(moved.estimated_error), "{scale}");
    }
}

#[test]
fn same_sign_square_integrates_to_nothing() {
    let r = second_order_energy(&VdwConfig {
        literal_square: true,
        ..VdwConfig::default()
    })
    .unwrap();
    assert!(r.c6.abs() < 1e-9, "{r:?}");
}

#[test]
fn c6_scales_with_the_coupling() {
    // atomic-unit scaling: c6 ∝ (e²)^-5 at ω = e²
    let r = second_order_energy(&VdwConfig::for_coupling(2.0)).unwrap();
    assert!(rel(r.c6 * 32.0, PUBLISHED) < 1e-3);
}

#[test]
fn series_matches_fock_oracle_on_contour() {
    let cfg = VdwConfig::default();
    let oracle = rx_oracle(&cfg).unwrap();
    let points = [
        Complex64::new(0.0, 0.05),
        Complex64::new(0.0, -0.05),
        Complex64::new(0.0, 0.7),
        Complex64::new(0.0, -0.7),
        Complex64::new(0.0, 5.0),
        Complex64::new(0.0, -5.0),
        Complex64::new(0.0, 60.0),
        Complex64::new(0.0, -60.0),
        Complex64::new(-0.3, 0.0),
        Complex64::new(0.3, 0.4),
    ];
    for alpha in points {
        let series = inner_integral_j(alpha, &cfg).unwrap().value;
        let direct = oracle_j(&oracle, alpha, &cfg).unwrap();
        assert!((series - direct).norm() < 1e-6 * direct.norm(), "{alpha}: {series} {direct}");
    }
}

#[test]
fn reflection_across_the_real_axis() {
    // the integrand carries a factor i, so J(ᾱ) = -conj J(α)
    let cfg = VdwConfig::default();
    for alpha in [Complex64::new(0.1, 0.8), Complex64::new(-0.4, 3.0)] {
        let a = inner_integral_j(alpha, &cfg).unwrap().value;
        let b = inner_integral_j(alpha.conj(), &cfg).unwrap().value;
        assert!((b + a.conj()).norm() < 1e-12 * a.norm());
    }
}

#[test]
fn degenerate_frequency_gives_three_poles() {
    let cfg = VdwConfig::default();
    let (v, _) = shift_to_v(Complex64::new(0.0, 0.0), 1.0).unwrap();
    assert_eq!(v, Complex64::new(1.0, 0.0));
    let j = inner_integral_j(Complex64::new(0.0, 0.0), &cfg).unwrap();
    assert!(j.terms <= 3);
    assert!((j.value - Complex64::new(0.0, -2.25)).norm() < 1e-13);
}

/// `∫₀^∞ dt e^{i(e² + iε)t} S(t)` by direct quadrature of the bracket.
fn damped_time_integral(alpha: Complex64, eps: f64) -> Complex64 {
    let rx = rx_operator();
    let bracket = Bracket::new(&rx, &rx);
    let (v, _) = shift_to_v(alpha, 1.0).unwrap();
    let f = exponent_factor(1.0, v, cgf_core::su11::Branch::Bound).unwrap();
    let k = Complex64::new(1.0, eps);
    let s = |t: f64| {
        let d = disentangle(&f, Complex64::new(t, 0.0))?;
        Ok(bracket.eval(&d, 1.0)? * (Complex64::i() * k * t).exp())
    };
    let opts = QuadOptions {
        rel_tol: 1e-12,
        max_evals: 200_000,
        ..QuadOptions::default()
    };
    if v.im == 0.0 {
        // S has period 4π/v for real v: integrate one period, sum the rest
        let period = 4.0 * std::f64::consts::PI / v.re;
        let one = integrate(&s, 0.0, period, &opts).unwrap().value;
        one / (1.0 - (Complex64::i() * k * period).exp())
    } else {
        // decays like e^{-0.9t} here; the tail past t = 60 is below 1e-23
        integrate(&s, 0.0, 60.0, &opts).unwrap().value
    }
}

#[test]
fn damped_integration_extrapolates_to_the_series() {
    let cfg = VdwConfig::default();
    let series = TimeSeries::for_rx(&cfg).unwrap();
    for alpha in [Complex64::new(-0.3, 0.0), Complex64::new(0.0, 0.5)] {
        let (v, _) = shift_to_v(alpha, 1.0).unwrap();
        let mut damped = Vec::new();
        for eps in [1e-2, 1e-3] {
            let numeric = damped_time_integral(alpha, eps);
            let exact = series.eval(v, Complex64::new(1.0, eps)).unwrap().value;
            assert!((numeric - exact).norm() < 1e-8 * exact.norm(), "{alpha} {eps}: {numeric} {exact}");
            damped.push(numeric);
        }
        let limit = (10.0 * damped[1] - damped[0]) / 9.0;
        let j0 = inner_integral_j(alpha, &cfg).unwrap().value;
        assert!((limit - j0).norm() < 1e-5 * j0.norm(), "{alpha}: {limit} {j0}");
    }
}

#[test]
fn oracle_pipeline_reproduces_c6() {
    let cfg = VdwConfig::default();
    let start = Instant::now();
    let o = second_order_energy_oracle(&cfg).unwrap();
    assert!(start.elapsed().as_secs() < 600);
    let s = second_order_energy(&cfg).unwrap();
    assert!(rel(o.c6, s.c6) < 1e-4, "{} {}", o.c6, s.c6);
}
