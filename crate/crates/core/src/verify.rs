//! Invariant suites behind `verify`: each returns printable lines and
//! pass/fail checks.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::Coefficient;
use crate::error::Result;
use crate::fock::FockTruncation;
use crate::hydrogenic::{check_closure, p_state, p_state_squared_norm, physical_operator, s_state, PhysicalOpName};
use crate::su11::{
    closed_form_rx_g_rx, disentangle, exponent_factor, rx_operator, Branch, Bracket, DisentangledExp,
    ExponentFactor, FockOracle,
};
use crate::vdw::{angular_check, first_order_check};
use crate::wick::OperatorExpr;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: &'static str,
    /// Informational output, printed before the checks.
    pub lines: Vec<String>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(suite: &'static str) -> Self {
        Self {
            suite,
            lines: Vec::new(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

pub const SUITES: [&str; 5] = ["closure", "norms", "first-order", "disentangle", "eq24"];

pub fn run(suite: &str) -> Result<Report> {
    match suite {
        "closure" => closure(),
        "norms" => norms(),
        "first-order" => first_order(),
        "disentangle" => disentangling(64, 7),
        "eq24" => eq24(),
        other => Err(crate::Error::InvalidArgument(format!(
            "unknown suite `{other}`, expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

pub fn closure() -> Result<Report> {
    let mut r = Report::new("closure");
    let report = check_closure()?;
    r.lines.extend(report.entries.iter().map(|e| e.to_string()));
    let resolved = report.entries.iter().filter(|e| e.residual.is_zero()).count();
    r.check(
        "closure",
        report.passed() && report.entries.len() == 105,
        format!("{resolved}/{} commutators in the span of the 15 generators", report.entries.len()),
    );
    Ok(r)
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, k| acc * k)
}

pub fn norms() -> Result<Report> {
    let mut r = Report::new("norms");
    for n in 0..=5u64 {
        let ket = s_state(n as i64)?;
        let raw = ket.raw_inner(&ket);
        let expect = Coefficient::from_bigint(factorial(n) * factorial(n + 1));
        let norm = ket.squared_norm();
        r.check(
            format!("s-state n={n}"),
            raw == expect && norm.is_one(),
            format!("raw <ns|ns> = {raw} = {n}!{}!, normalized = {norm}", n + 1),
        );
    }
    for n in 1..=3u64 {
        let ket = p_state(n as i64)?;
        let norm = ket.squared_norm();
        let closed = Coefficient::from_rational(p_state_squared_norm(n));
        r.lines.push(format!(
            "note: p-state n={n} under the s-state normalization has <p|p> = {norm} (closed form {})",
            p_state_squared_norm(n)
        ));
        r.check(format!("p-state n={n} closed form"), norm == closed, format!("{norm}"));
    }
    Ok(r)
}

pub fn first_order() -> Result<Report> {
    let mut r = Report::new("first-order");
    let fo = first_order_check();
    for (label, v) in &fo.components {
        r.check(format!("<0|{label}|0>"), v.is_zero(), v.to_string());
    }
    r.check("total", fo.total.is_zero(), fo.total.to_string());
    let ang = angular_check()?;
    for (probe, ratio) in &ang.ratios {
        r.lines.push(format!("angular weight with probe {probe}: {ratio}"));
    }
    r.check(
        "angular weight",
        ang.passed(),
        match ang.multiplicity() {
            Some(m) => format!("{m} (4 + 1 + 1)"),
            None => "probes disagree".into(),
        },
    );
    Ok(r)
}

fn random_samples(n: usize, seed: u64) -> Vec<(ExponentFactor, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p: f64 = rng.gen_range(0.3..1.5);
            let q: f64 = rng.gen_range(-0.8..0.8) * p;
            let t1: f64 = rng.gen_range(-2.0..2.0);
            let t2: f64 = rng.gen_range(-2.0..2.0);
            let c = |x: f64| Complex64::new(x, 0.0);
            (ExponentFactor::new(c(p), c(q)), t1, t2)
        })
        .collect()
}

/// Identity, group law, determinant and Fock-exponential agreement on
/// `samples` seeded random `(p, q, t)`.
pub fn disentangling(samples: usize, seed: u64) -> Result<Report> {
    let mut r = Report::new("disentangle");
    let c = |x: f64| Complex64::new(x, 0.0);
    let cases = random_samples(samples, seed);
    let mut id = 0.0f64;
    let mut law = 0.0f64;
    let mut det = 0.0f64;
    for (f, t1, t2) in &cases {
        id = id.max(disentangle(f, c(0.0))?.distance(&DisentangledExp::identity()));
        let g1 = disentangle(f, c(*t1))?.to_element();
        let g2 = disentangle(f, c(*t2))?.to_element();
        let composed = DisentangledExp::from_element(&g1.compose(&g2))?;
        law = law.max(composed.distance(&disentangle(f, c(t1 + t2))?));
        det = det.max((g1.det() - 1.0).norm());
    }
    r.check("identity at t=0", id == 0.0, format!("max deviation {id:.3e}"));
    r.check("group law", law <= 1e-10, format!("max deviation {law:.3e} over {samples} samples"));
    r.check("unit determinant", det <= 1e-12, format!("max |det - 1| {det:.3e}"));

    let probes: [(&str, OperatorExpr, OperatorExpr); 3] = [
        ("1", OperatorExpr::one(), OperatorExpr::one()),
        (
            "r",
            physical_operator(PhysicalOpName::R),
            physical_operator(PhysicalOpName::R),
        ),
        ("r*x_3", rx_operator(), rx_operator()),
    ];
    let trunc = FockTruncation::new(100)?;
    let mut worst = 0.0f64;
    for (_, left, right) in &probes {
        let oracle = FockOracle::new(left, right, 1.0, trunc)?;
        let bracket = Bracket::new(left, right);
        for (f, t, _) in cases.iter().take(16) {
            let d = disentangle(f, c(*t))?;
            let exact = bracket.eval(&d, 1.0)?;
            let direct = oracle.propagate(&oracle.operator_from_factor(f), *t);
            worst = worst.max((exact - direct).norm() / direct.norm().max(1.0));
        }
    }
    r.check(
        "Fock exponential",
        worst <= 1e-10,
        format!("max deviation {worst:.3e} (truncation {}, brackets 1, r, r*x_3)", trunc.max_quanta),
    );
    Ok(r)
}

pub const EQ24_OMEGA: [f64; 3] = [0.7, 1.0, 1.6];
pub const EQ24_V: [f64; 3] = [0.5, 1.2, 2.0];
pub const EQ24_T: [f64; 3] = [0.25, 1.0, 2.5];

/// `⟨0|rx exp(-it(½rp² + ½v²r)) rx|0⟩` on the (ω, v, t) grid: exact bracket
/// against the truncated-Fock exponential and against the printed closed form.
pub fn eq24() -> Result<Report> {
    let mut r = Report::new("eq24");
    let rx = rx_operator();
    let bracket = Bracket::new(&rx, &rx);
    let trunc = FockTruncation::new(240)?;
    let mut vs_fock = 0.0f64;
    let mut vs_print = 0.0f64;
    r.lines.push(format!("bracket polynomial: {}", bracket.polynomial()));
    for omega in EQ24_OMEGA {
        let oracle = FockOracle::new(&rx, &rx, omega, trunc)?;
        for v in EQ24_V {
            let vc = Complex64::new(v, 0.0);
            let f = exponent_factor(omega, vc, Branch::Bound)?;
            let a = oracle.operator_at_energy(Complex64::new(-0.5 * v * v, 0.0));
            for t in EQ24_T {
                let d = disentangle(&f, Complex64::new(t, 0.0))?;
                let exact = bracket.eval(&d, omega)?;
                let direct = oracle.propagate(&a, t);
                let printed = closed_form_rx_g_rx(omega, vc, Complex64::new(t, 0.0), 1e-300)?;
                let scale = exact.norm().max(1.0);
                vs_fock = vs_fock.max((exact - direct).norm() / scale);
                vs_print = vs_print.max((printed - exact).norm() / exact.norm());
                r.lines.push(format!(
                    "w={omega} v={v} t={t}: bracket {} fock {} printed {}",
                    fmt_complex(exact),
                    fmt_complex(direct),
                    fmt_complex(printed)
                ));
            }
        }
    }
    r.check(
        "bracket vs Fock",
        vs_fock <= 1e-10,
        format!("max deviation {vs_fock:.3e} over 27 points (truncation {})", trunc.max_quanta),
    );
    r.check(
        "printed closed form",
        vs_print <= 1e-8,
        format!(
            "max relative deviation {vs_print:.3e}; the printed expression holds as written with the exp(-itA) convention"
        ),
    );
    Ok(r)
}

/// `a + bi` with 15 significant digits.
pub fn fmt_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:.15e} {sign} {:.15e}i", z.re, z.im.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        for suite in ["closure", "norms", "first-order"] {
            let r = run(suite).unwrap();
            assert!(r.passed(), "{r}");
        }
        assert_eq!(closure().unwrap().lines.len(), 105);
        assert!(run("nope").is_err());
    }

    #[test]
    fn small_disentangle_suite() {
        let r = disentangling(8, 1).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn complex_format() {
        assert_eq!(fmt_complex(Complex64::new(1.0, -0.5)), "1.000000000000000e0 - 5.000000000000000e-1i");
    }
}
