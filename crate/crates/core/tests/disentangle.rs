use cgf_core::fock::FockTruncation;
use cgf_core::hydrogenic::{generator, physical_operator, GeneratorName, PhysicalOpName};
use cgf_core::su11::{
    closed_form_rx_g_rx, disentangle, exponent_factor, fock_resolvent, rx_operator, Branch, Bracket,
    DisentangledExp, ExponentFactor, FockOracle, Su11Element,
};
use cgf_core::OperatorExpr;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn random_factors(seed: u64, n: usize) -> Vec<(ExponentFactor, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p: f64 = rng.gen_range(0.3..1.5);
            let q: f64 = rng.gen_range(-0.8..0.8) * p;
            let t: f64 = rng.gen_range(-2.0..2.0);
            (ExponentFactor::new(c(p), c(q)), t)
        })
        .collect()
}

#[test]
fn identity_at_zero_time() {
    for (f, _) in random_factors(1, 20) {
        let d = disentangle(&f, c(0.0)).unwrap();
        assert!(d.distance(&DisentangledExp::identity()) < 1e-15);
        assert!(d.c_zero.norm() < 1e-15);
    }
}

#[test]
fn group_law_and_unit_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (f, t1) in random_factors(3, 50) {
        let t2: f64 = rng.gen_range(-2.0..2.0);
        let g1 = disentangle(&f, c(t1)).unwrap().to_element();
        let g2 = disentangle(&f, c(t2)).unwrap().to_element();
        let composed = DisentangledExp::from_element(&g1.compose(&g2)).unwrap();
        let direct = disentangle(&f, c(t1 + t2)).unwrap();
        assert!(composed.distance(&direct) < 1e-10, "{f:?} {t1} {t2}");
        assert!((g1.det() - 1.0).norm() < 1e-12);
        let g = Su11Element::propagator(&f, c(t1));
        assert!(DisentangledExp::from_element(&g).unwrap().to_element().max_abs_diff(&g) < 1e-12);
    }
}

#[test]
fn product_form_matches_fock_exponential() {
    let trunc = FockTruncation::new(100).unwrap();
    let ops: Vec<(OperatorExpr, OperatorExpr)> = vec![
        (OperatorExpr::one(), OperatorExpr::one()),
        (physical_operator(PhysicalOpName::R), physical_operator(PhysicalOpName::R)),
        (generator(GeneratorName::M), generator(GeneratorName::Mdag)),
        (rx_operator(), rx_operator()),
    ];
    for (left, right) in &ops {
        let oracle = FockOracle::new(left, right, 1.0, trunc).unwrap();
        let bracket = Bracket::new(left, right);
        for (f, t) in random_factors(4, 6) {
            let d = disentangle(&f, c(t)).unwrap();
            let direct = oracle.propagate(&oracle.operator_from_factor(&f), t);
            let product = oracle.product_form(&d);
            let exact = bracket.eval(&d, 1.0).unwrap();
            let scale = direct.norm().max(1.0);
            assert!((product - direct).norm() < 1e-10 * scale, "{f:?} {t}: {product} {direct}");
            assert!((exact - direct).norm() < 1e-10 * scale, "{f:?} {t}: {exact} {direct}");
        }
    }
}

#[test]
fn degenerate_frequency_has_no_pair_terms() {
    let f = exponent_factor(1.3, c(1.3), Branch::Bound).unwrap();
    assert_eq!(f.q, c(0.0));
    let d = disentangle(&f, c(0.9)).unwrap();
    assert_eq!(d.c_plus, c(0.0));
    assert_eq!(d.c_minus, c(0.0));
    // only the e^{c0 (N+2)} phases survive
    let r = physical_operator(PhysicalOpName::R);
    let v = Bracket::new(&r, &r).eval(&d, 1.3).unwrap();
    let expect = (Complex64::new(0.0, -0.9 * 0.65 * 2.0).exp() + 0.5 * Complex64::new(0.0, -0.9 * 0.65 * 4.0).exp()) / (1.3 * 1.3);
    assert!((v - expect).norm() < 1e-14, "{v} {expect}");
}

#[test]
fn r_bracket_matches_fock_at_truncation_60() {
    let r = physical_operator(PhysicalOpName::R);
    let oracle = FockOracle::new(&r, &r, 1.0, FockTruncation::new(60).unwrap()).unwrap();
    let bracket = Bracket::new(&r, &r);
    for t in [0.2, 0.7, 1.9] {
        let f = exponent_factor(1.0, c(1.0), Branch::Bound).unwrap();
        let d = disentangle(&f, c(t)).unwrap();
        let direct = oracle.propagate(&oracle.operator_from_factor(&f), t);
        assert!((bracket.eval(&d, 1.0).unwrap() - direct).norm() < 1e-10);
    }
}

/// The 3×3×3 (ω, v, t) grid for the r x bracket.
#[test]
fn rx_bracket_grid_against_fock_and_printed_form() {
    let rx = rx_operator();
    let bracket = Bracket::new(&rx, &rx);
    let trunc = FockTruncation::new(240).unwrap();
    for omega in [0.7, 1.0, 1.6] {
        let oracle = FockOracle::new(&rx, &rx, omega, trunc).unwrap();
        for v in [0.5, 1.2, 2.0] {
            let f = exponent_factor(omega, c(v), Branch::Bound).unwrap();
            let a = oracle.operator_at_energy(c(-0.5 * v * v));
            for t in [0.25, 1.0, 2.5] {
                let d = disentangle(&f, c(t)).unwrap();
                let exact = bracket.eval(&d, omega).unwrap();
                let direct = oracle.propagate(&a, t);
                assert!((exact - direct).norm() < 1e-10 * exact.norm().max(1.0), "{omega} {v} {t}: {exact} {direct}");
                let printed = closed_form_rx_g_rx(omega, c(v), c(t), 1e-300).unwrap();
                assert!((printed - exact).norm() < 1e-8 * exact.norm(), "{omega} {v} {t}: {printed} {exact}");
            }
        }
    }
}

#[test]
fn continued_factor_matches_shifted_resolvent() {
    // E = -v²/2 with v = 1 - 0.6i: an off-axis energy reached by continuation
    let omega = 1.0;
    let v = Complex64::new(1.0, -0.6);
    let rx = rx_operator();
    let f = exponent_factor(omega, v, Branch::Bound).unwrap();
    let oracle = FockOracle::new(&rx, &rx, omega, FockTruncation::new(160).unwrap()).unwrap();
    let via_factor = oracle.resolvent(&oracle.operator_from_factor(&f), 1.0).unwrap();
    let via_energy = fock_resolvent(&rx, &rx, omega, v, 1.0, FockTruncation::new(160).unwrap()).unwrap();
    assert!((via_factor - via_energy).norm() < 1e-10 * via_energy.norm());
    let cont = exponent_factor(omega, c(0.8), Branch::Continuum).unwrap();
    let rotated = exponent_factor(omega, Complex64::new(0.0, -0.8), Branch::Bound).unwrap();
    assert!((cont.p - rotated.p).norm() < 1e-15 && (cont.q - rotated.q).norm() < 1e-15);
}

#[test]
fn vacuum_resolvent_is_diagonal_when_q_vanishes() {
    let one = OperatorExpr::one();
    let f = exponent_factor(0.9, c(0.9), Branch::Bound).unwrap();
    let got = fock_resolvent(&one, &one, 0.9, c(0.9), 1.0, FockTruncation::new(20).unwrap()).unwrap();
    assert!((got - 1.0 / (2.0 * f.p - 1.0)).norm() < 1e-13);
}

#[test]
fn rx_resolvent_converges_with_truncation() {
    let rx = rx_operator();
    let v = c(1.3);
    let vals: Vec<Complex64> = [20u32, 40, 80, 160]
        .iter()
        .map(|&n| fock_resolvent(&rx, &rx, 1.0, v, 1.0, FockTruncation::new(n).unwrap()).unwrap())
        .collect();
    let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    assert!(diffs.windows(2).all(|d| d[1] <= d[0]), "{diffs:?}");
    assert!(diffs[2] < 1e-8, "{diffs:?}");
}

#[test]
fn five_quarters_three_quarters_at_forty_quanta() {
    let f = ExponentFactor::new(c(1.25), c(0.75));
    let d = disentangle(&f, c(0.3)).unwrap();
    for (left, right) in [
        (OperatorExpr::one(), OperatorExpr::one()),
        (rx_operator(), rx_operator()),
        (generator(GeneratorName::Mdag), physical_operator(PhysicalOpName::R)),
    ] {
        let oracle = FockOracle::new(&left, &right, 1.0, FockTruncation::new(40).unwrap()).unwrap();
        let direct = oracle.propagate(&oracle.operator_from_factor(&f), 0.3);
        let exact = Bracket::new(&left, &right).eval(&d, 1.0).unwrap();
        assert!((exact - direct).norm() < 1e-10, "{exact} {direct}");
    }
}
