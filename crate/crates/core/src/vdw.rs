//! Dispersion energy of two ground-state hydrogen atoms.
//!
//! The dipole–dipole coupling `β·r₁r₂(2z₁z₂ - x₁x₂ - y₁y₂)` (with `β = e²/R³`)
//! has zero expectation in the product ground state. The second-order energy
//! is a shift-convolution of two one-particle brackets
//!
//! `J(α) = ∫₀^∞ dt e^{ie²t} ⟨0|r x exp(-it(½rp² + ½ω²r - αr)) r x|0⟩`,
//!
//! `E⁽²⁾ = (3i/π) β² ω² ∫ dα J(α) J(-α)`,
//!
//! with the α path taken down the imaginary axis. `J` is summed in closed
//! form from the disentangled propagator: in `w = e^{-ivt/2}` every
//! disentangling coefficient is rational, so the bracket expands in powers of
//! `w²` with ratio `ρ = ((ω-v)/(ω+v))²` and each power integrates to a pole
//! term `i/(e² - vλ)`.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use serde::Serialize;

use crate::coeff::{Coefficient, GaussRational};
use crate::error::{Error, Result};
use crate::fock::FockTruncation;
use crate::hydrogenic::{physical_operator, GeneratorName, PhysicalOpName};
use crate::mcgf::{shift_to_v, ProductExpr};
use crate::quad::{integrate_half_line, QuadOptions};
use crate::su11::{rx_operator, Branch, Bracket, BracketTerm, FockOracle};
use crate::wick::OperatorExpr;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VdwConfig {
    pub omega: f64,
    pub e2: f64,
    pub series_tol: f64,
    pub quad_tol: f64,
    pub contour_scale: f64,
    pub truncation: u32,
    pub max_quad_evals: usize,
    pub max_series_terms: usize,
    /// Integrate the same-sign square `J(α)²` instead of `J(α)J(-α)`.
    pub literal_square: bool,
}

impl Default for VdwConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            e2: 1.0,
            series_tol: 1e-12,
            quad_tol: 1e-8,
            contour_scale: 1.0,
            truncation: 160,
            max_quad_evals: 20_000,
            max_series_terms: 5_000_000,
            literal_square: false,
        }
    }
}

impl VdwConfig {
    /// Ground state: `ω = e²`, contour scale `ω²`.
    pub fn for_coupling(e2: f64) -> Self {
        Self {
            omega: e2,
            e2,
            contour_scale: e2 * e2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} out of range: {v}")));
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad("omega", self.omega);
        }
        if !(self.e2 > 0.0 && self.e2.is_finite()) {
            return bad("e2", self.e2);
        }
        if !(self.series_tol > 0.0 && self.series_tol < 1.0) {
            return bad("series tolerance", self.series_tol);
        }
        if !(self.quad_tol > 0.0 && self.quad_tol < 1.0) {
            return bad("quadrature tolerance", self.quad_tol);
        }
        if !(self.contour_scale > 0.0 && self.contour_scale.is_finite()) {
            return bad("contour scale", self.contour_scale);
        }
        FockTruncation::new(self.truncation)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C6Result {
    pub c6: f64,
    pub estimated_error: f64,
    pub series_terms_used: usize,
    pub quad_nodes_used: usize,
    pub oracle_delta: Option<f64>,
    /// Imaginary part of the assembled `E⁽²⁾/β²`.
    pub imag_part: f64,
}

const LABELS: [&str; 3] = ["x1x2", "y1y2", "z1z2"];
const WEIGHTS: [i64; 3] = [-1, -1, 2];

/// The three components `c_λ r₁r₂ x_λ₁ x_λ₂` of the coupling, with
/// `c = (-1, -1, 2)`.
pub fn dipole_components() -> Vec<(&'static str, ProductExpr)> {
    let r1 = ProductExpr::first(&physical_operator(PhysicalOpName::R));
    let r2 = ProductExpr::second(&physical_operator(PhysicalOpName::R));
    let rr = r1.multiply(&r2);
    (0..3)
        .map(|k| {
            let x = physical_operator(PhysicalOpName::X(k as u8 + 1));
            let xx = ProductExpr::first(&x).multiply(&ProductExpr::second(&x));
            (LABELS[k], rr.multiply(&xx).scale(&Coefficient::from_int(WEIGHTS[k])))
        })
        .collect()
}

/// `r₁r₂(2z₁z₂ - x₁x₂ - y₁y₂)`; the scalar `β = e²/R³` is left out.
pub fn dipole_coupling() -> ProductExpr {
    dipole_components()
        .into_iter()
        .fold(ProductExpr::zero(), |acc, (_, c)| acc.add(&c))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderReport {
    pub components: Vec<(&'static str, Coefficient)>,
    pub total: Coefficient,
}

impl FirstOrderReport {
    pub fn passed(&self) -> bool {
        self.total.is_zero() && self.components.iter().all(|(_, c)| c.is_zero())
    }
}

/// Product-vacuum expectation of the coupling, per component and in total.
pub fn first_order_check() -> FirstOrderReport {
    FirstOrderReport {
        components: dipole_components()
            .into_iter()
            .map(|(l, c)| (l, c.vacuum_expectation()))
            .collect(),
        total: dipole_coupling().vacuum_expectation(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularCheck {
    /// `⟨V X⊗X V⟩ / ⟨rx₃ X rx₃⟩²` for each rotation-invariant probe `X`.
    pub ratios: Vec<(&'static str, Coefficient)>,
}

impl AngularCheck {
    pub fn multiplicity(&self) -> Option<GaussRational> {
        let first = self.ratios.first()?.1.as_constant()?;
        self.ratios
            .iter()
            .all(|(_, r)| r.as_constant().as_ref() == Some(&first))
            .then_some(first)
    }

    pub fn passed(&self) -> bool {
        self.multiplicity() == Some(GaussRational::from_int(6))
    }
}

/// Contracts the coupling with itself through rotation-invariant one-particle
/// probes and compares with the single `r x₃` bracket. A ratio of 6 for every
/// probe is the tensor weight `Σ c_λ² = 4 + 1 + 1` behind the `3/π` prefactor
/// (6 times the `1/2π` of the shift convolution).
pub fn angular_check() -> Result<AngularCheck> {
    let v = dipole_coupling();
    let rx = rx_operator();
    let probes: [(&'static str, OperatorExpr); 3] = [
        ("1", OperatorExpr::one()),
        ("N2", crate::hydrogenic::generator(GeneratorName::Nplus2)),
        ("r", physical_operator(PhysicalOpName::R)),
    ];
    let mut ratios = Vec::new();
    for (name, x) in probes {
        let xx = ProductExpr::tensor(&x, &x);
        let full = ProductExpr::vacuum_bracket(&v, &xx, &v);
        let single = rx.multiply(&x).multiply(&rx).vacuum_expectation();
        ratios.push((name, full.checked_div(&(&single * &single))?));
    }
    Ok(AngularCheck { ratios })
}

/// `J` evaluated with the number of series terms it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JValue {
    pub value: Complex64,
    pub terms: usize,
}

/// Pole-sum evaluation of `∫₀^∞ dt e^{iEt} ⟨0|L exp(-it(½rp² + ½v²r)) R|0⟩`.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    omega: f64,
    terms: Vec<BracketTerm>,
    tol: f64,
    max_terms: usize,
}

/// Denominators below this magnitude are treated as a pole on the path.
pub const POLE_FLOOR: f64 = 1e-10;

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl TimeSeries {
    pub fn new(bracket: &Bracket, omega: f64, tol: f64, max_terms: usize) -> Result<Self> {
        Ok(Self {
            omega,
            terms: bracket.terms_at(omega)?,
            tol,
            max_terms,
        })
    }

    pub fn for_rx(cfg: &VdwConfig) -> Result<Self> {
        let rx = rx_operator();
        Self::new(&Bracket::new(&rx, &rx), cfg.omega, cfg.series_tol, cfg.max_series_terms)
    }

    /// Sum at bound-branch parameter `v` (`Re v > 0`) and complex coupling.
    pub fn eval(&self, v: Complex64, coupling: Complex64) -> Result<JValue> {
        let w = self.omega;
        let p_over_v = (w * w + v * v) / (4.0 * w * v);
        let q_over_v = (v * v - w * w) / (4.0 * w * v);
        let kappa = p_over_v + 0.5;
        let rho = (p_over_v - 0.5) / kappa;
        let rho_abs = rho.norm();
        if rho_abs >= 1.0 {
            return Err(Error::SeriesDivergence(rho_abs));
        }
        struct Piece {
            pref: Complex64,
            m: u64,
            total: u64,
            half: f64,
        }
        let pieces: Vec<Piece> = self
            .terms
            .iter()
            .map(|t| {
                let m = (t.cp_pow + t.cm_pow) as u64;
                let total = m + t.e0_pow as u64;
                Piece {
                    pref: t.value * (-q_over_v).powu(m as u32) / kappa.powu(total as u32),
                    m,
                    total,
                    half: 0.5 * t.e0_pow as f64,
                }
            })
            .collect();
        let live = || pieces.iter().filter(|p| p.pref != Complex64::new(0.0, 0.0));
        let max_total = live().map(|p| p.total).max().unwrap_or(1);
        let max_m = live().map(|p| p.m).max().unwrap_or(0);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut rho_pow = vec![Complex64::new(1.0, 0.0)];
        let mut count = 0usize;
        let mut l = 0u64;
        loop {
            rho_pow.push(rho_pow[l as usize] * rho);
            let mut contrib = Complex64::new(0.0, 0.0);
            let mut envelope = 0.0;
            for p in &pieces {
                let mut a = Complex64::new(0.0, 0.0);
                let mut a_abs = 0.0;
                for i in 0..=p.m.min(l) {
                    let ll = l - i;
                    let c = binomial(p.m, i) * binomial(ll + p.total - 1, p.total - 1);
                    let term = c * rho_pow[ll as usize];
                    if i % 2 == 0 {
                        a += term;
                    } else {
                        a -= term;
                    }
                    a_abs += c * rho_abs.powi(ll as i32);
                }
                let den = coupling - v * (p.half + l as f64);
                if den.norm() < POLE_FLOOR {
                    return Err(Error::PoleHit(den.norm()));
                }
                contrib += p.pref * a * I / den;
                envelope += p.pref.norm() * a_abs / den.norm();
            }
            sum += contrib;
            count += 1;
            if l > max_m {
                let ratio = rho_abs * (1.0 + (max_total as f64 - 1.0) / (l as f64 + 1.0));
                if ratio < 1.0 && envelope * ratio / (1.0 - ratio) <= self.tol * sum.norm() {
                    break;
                }
            }
            if count >= self.max_terms {
                return Err(Error::SeriesBudget(count));
            }
            l += 1;
        }
        Ok(JValue { value: sum, terms: count })
    }
}

fn bound_v(alpha: Complex64, omega: f64) -> Result<Complex64> {
    match shift_to_v(alpha, omega)? {
        (v, Branch::Bound) => Ok(v),
        // E = +v²/2 is the bound formula at -iv
        (v, Branch::Continuum) => Ok(-I * v),
    }
}

/// `J(α)` by the pole series.
pub fn inner_integral_j(alpha: Complex64, cfg: &VdwConfig) -> Result<JValue> {
    let series = TimeSeries::for_rx(cfg)?;
    series.eval(bound_v(alpha, cfg.omega)?, Complex64::new(cfg.e2, 0.0))
}

/// `J(α)` by a truncated Fock-space linear solve: `-i(A - e²)⁻¹` with
/// `A = ½rp² + ½ω²r - αr`.
pub fn oracle_j(oracle: &FockOracle, alpha: Complex64, cfg: &VdwConfig) -> Result<Complex64> {
    let energy = Complex64::new(-0.5 * cfg.omega * cfg.omega, 0.0) + alpha;
    Ok(-I * oracle.resolvent_at_energy(energy, cfg.e2)?)
}

pub fn rx_oracle(cfg: &VdwConfig) -> Result<FockOracle> {
    let rx = rx_operator();
    FockOracle::new(&rx, &rx, cfg.omega, FockTruncation::new(cfg.truncation)?)
}

/// Integrates `J(is)J(-is)` over `s ≥ 0` and assembles
/// `c6 = -(6/π) ω² e² ∫ ds J(is)J(-is)`.
fn assemble<F>(cfg: &VdwConfig, j: F) -> Result<C6Result>
where
    F: Fn(Complex64) -> Result<JValue> + Sync,
{
    cfg.validate()?;
    let terms = AtomicUsize::new(0);
    let integrand = |s: f64| -> Result<Complex64> {
        let plus = j(Complex64::new(0.0, s))?;
        let minus = j(Complex64::new(0.0, -s))?;
        terms.fetch_add(plus.terms + minus.terms, Ordering::Relaxed);
        Ok(if cfg.literal_square {
            0.5 * (plus.value * plus.value + minus.value * minus.value)
        } else {
            plus.value * minus.value
        })
    };
    let opts = QuadOptions {
        rel_tol: cfg.quad_tol,
        // absolute floor: the same-sign square nearly cancels
        abs_tol: 1e-13,
        max_evals: cfg.max_quad_evals,
        ..QuadOptions::default()
    };
    let quad = integrate_half_line(&integrand, cfg.contour_scale, &opts)?;
    // E2/β² = (3i/π) ω² ∫_{+i∞}^{-i∞} dα J(α)J(-α) = (6/π) ω² ∫₀^∞ ds J(is)J(-is)
    let pref = 6.0 / std::f64::consts::PI * cfg.omega * cfg.omega;
    let e2_over_beta2 = quad.value * pref;
    if !cfg.literal_square && e2_over_beta2.im.abs() > 1e-8 * e2_over_beta2.norm() {
        return Err(Error::NonRealResult {
            real: e2_over_beta2.re,
            imag: e2_over_beta2.im,
        });
    }
    let c6 = -e2_over_beta2.re * cfg.e2;
    Ok(C6Result {
        c6,
        estimated_error: quad.error * pref * cfg.e2 + cfg.series_tol * c6.abs(),
        series_terms_used: terms.into_inner(),
        quad_nodes_used: quad.evals,
        oracle_delta: None,
        imag_part: e2_over_beta2.im,
    })
}

pub fn second_order_energy(cfg: &VdwConfig) -> Result<C6Result> {
    cfg.validate()?;
    let series = TimeSeries::for_rx(cfg)?;
    let coupling = Complex64::new(cfg.e2, 0.0);
    assemble(cfg, |alpha| series.eval(bound_v(alpha, cfg.omega)?, coupling))
}

/// The same assembly with every `J` from the Fock oracle.
pub fn second_order_energy_oracle(cfg: &VdwConfig) -> Result<C6Result> {
    cfg.validate()?;
    let oracle = rx_oracle(cfg)?;
    let mut r = assemble(cfg, |alpha| {
        Ok(JValue {
            value: oracle_j(&oracle, alpha, cfg)?,
            terms: 0,
        })
    })?;
    r.estimated_error = r.estimated_error.max(cfg.quad_tol * r.c6.abs());
    Ok(r)
}

/// Series result with `oracle_delta` filled from an oracle rerun.
pub fn second_order_energy_checked(cfg: &VdwConfig) -> Result<C6Result> {
    let mut r = second_order_energy(cfg)?;
    let o = second_order_energy_oracle(cfg)?;
    r.oracle_delta = Some((o.c6 - r.c6).abs() / r.c6.abs());
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_components_vanish_in_vacuum() {
        let report = first_order_check();
        assert!(report.passed());
        assert_eq!(report.components.len(), 3);
    }

    #[test]
    fn z_component_expands_through_the_dipole_map() {
        // z₁z₂ term: r⊗r times x₃⊗x₃
        let r = physical_operator(PhysicalOpName::R);
        let x = physical_operator(PhysicalOpName::X(3));
        let expect = ProductExpr::tensor(&r.multiply(&x), &r.multiply(&x)).scale(&Coefficient::from_int(2));
        assert_eq!(dipole_components()[2].1, expect);
        let ket = r.multiply(&x).apply_to_vacuum();
        assert!(ket.expr().degree() <= 4);
    }

    #[test]
    fn angular_weight_is_six() {
        let check = angular_check().unwrap();
        assert!(check.passed(), "{:?}", check.ratios);
    }

    #[test]
    fn j_at_equal_frequencies_is_three_poles() {
        let cfg = VdwConfig::default();
        let j = inner_integral_j(Complex64::new(0.0, 0.0), &cfg).unwrap();
        // S(t) = 2e^{-2it} + ½e^{-3it}, so J = i(2/(1-2) + ½/(1-3))
        assert!((j.value - Complex64::new(0.0, -2.25)).norm() < 1e-13);
    }

    #[test]
    fn config_validation() {
        assert!(VdwConfig::default().validate().is_ok());
        let bad = VdwConfig {
            quad_tol: 0.0,
            ..VdwConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = VdwConfig {
            contour_scale: -1.0,
            ..VdwConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn divergent_ratio_is_reported() {
        let series = TimeSeries::for_rx(&VdwConfig::default()).unwrap();
        let err = series.eval(Complex64::new(-0.5, 0.0), Complex64::new(1.0, 0.0));
        assert!(matches!(err, Err(Error::SeriesDivergence(_))));
    }
}
