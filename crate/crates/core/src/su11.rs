//! Disentangling of the oscillator Green-operator exponential.
//!
//! For energy `E = -v²/2` the r-weighted Coulomb operator is
//! `A = ½ r p² + ½ v² r = p·(N+2) + q·(M + M†)`, an element of the su(1,1)
//! algebra spanned by `K₀ = (N+2)/2`, `K₊ = M†`, `K₋ = M`. Its propagator
//! `exp(-itA)` is reduced to the normal-ordered product
//! `exp(c₊M†)·exp(c₀(N+2))·exp(c₋M)` through the faithful 2×2 representation
//! `K₀ = diag(½, -½)`, `K₊ = [[0,1],[0,0]]`, `K₋ = [[0,0],[-1,0]]`.

use num_complex::Complex64;
use serde::Serialize;

use crate::coeff::{Coefficient, GaussRational, Symbol, SymbolPowers, SymbolValues};
use crate::error::{Error, Result};
use crate::fock::{expm_action, inner, BandedLu, FockBasis, FockTruncation, SparseMatrix};
use crate::hydrogenic::{generator, physical_operator, GeneratorName, PhysicalOpName};
use crate::wick::{KetState, OperatorExpr};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sign of the energy in `E = ∓v²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `E = -v²/2`.
    Bound,
    /// `E = +v²/2`.
    Continuum,
}

/// Coefficients of `A = p·(N+2) + q·(M + M†)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFactor {
    pub p: Complex64,
    pub q: Complex64,
}

impl ExponentFactor {
    pub fn new(p: Complex64, q: Complex64) -> Self {
        Self { p, q }
    }

    /// `√(p² - q²)`, half the level spacing of `A` on a lowest-weight ladder.
    pub fn half_spacing(&self) -> Complex64 {
        let s = (self.p * self.p - self.q * self.q).sqrt();
        if s.re < 0.0 {
            -s
        } else {
            s
        }
    }
}

pub fn exponent_factor(omega: f64, v: Complex64, branch: Branch) -> Result<ExponentFactor> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    let w2 = Complex64::new(omega * omega, 0.0);
    let v2 = v * v;
    let den = 4.0 * omega;
    let (p, q) = match branch {
        Branch::Bound => ((w2 + v2) / den, (v2 - w2) / den),
        Branch::Continuum => ((w2 - v2) / den, (-w2 - v2) / den),
    };
    Ok(ExponentFactor { p, q })
}

/// Element of the 2×2 representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su11Element(pub [[Complex64; 2]; 2]);

impl Su11Element {
    pub fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    /// `exp(-it(2p·K₀ + q·(K₊ + K₋)))`. The generator is traceless, so
    /// `exp(X) = cosh(s)·1 + sinh(s)/s·X` with `s² = -det X`.
    pub fn propagator(factor: &ExponentFactor, t: Complex64) -> Self {
        let x = [
            [-I * t * factor.p, -I * t * factor.q],
            [I * t * factor.q, I * t * factor.p],
        ];
        let s2 = x[0][0] * x[0][0] + x[0][1] * x[1][0];
        let s = s2.sqrt();
        let (ch, shc) = if s.norm() < 1e-4 {
            (
                ONE + s2 / 2.0 + s2 * s2 / 24.0,
                ONE + s2 / 6.0 + s2 * s2 / 120.0,
            )
        } else {
            (s.cosh(), s.sinh() / s)
        };
        Self([
            [ch + shc * x[0][0], shc * x[0][1]],
            [shc * x[1][0], ch + shc * x[1][1]],
        ])
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }
}

/// `exp(c₊M†)·exp(c₀(N+2))·exp(c₋M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisentangledExp {
    pub c_plus: Complex64,
    pub c_zero: Complex64,
    pub c_minus: Complex64,
}

impl DisentangledExp {
    pub fn identity() -> Self {
        Self {
            c_plus: ZERO,
            c_zero: ZERO,
            c_minus: ZERO,
        }
    }

    pub fn to_element(&self) -> Su11Element {
        let e = self.c_zero.exp();
        let ei = (-self.c_zero).exp();
        Su11Element([
            [e - self.c_plus * self.c_minus * ei, self.c_plus * ei],
            [-self.c_minus * ei, ei],
        ])
    }

    /// Reads the triple off a unimodular group element.
    pub fn from_element(g: &Su11Element) -> Result<Self> {
        let g22 = g.0[1][1];
        let scale = g.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
        if g22.norm() <= 1e-14 * scale.max(1.0) {
            return Err(Error::Degenerate {
                t: format!("{g22}"),
            });
        }
        Ok(Self {
            c_plus: g.0[0][1] / g22,
            c_zero: -g22.ln(),
            c_minus: -g.0[1][0] / g22,
        })
    }

    /// Branch-free distance: compares `c₊`, `c₋` and `exp(-c₀)`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.c_plus - other.c_plus)
            .norm()
            .max((self.c_minus - other.c_minus).norm())
            .max(((-self.c_zero).exp() - (-other.c_zero).exp()).norm())
    }

    pub fn symbol_values(&self, omega: f64) -> SymbolValues {
        SymbolValues::omega(omega)
            .with(Symbol::CPlus, self.c_plus)
            .with(Symbol::CMinus, self.c_minus)
            .with(Symbol::ExpCZero, self.c_zero.exp())
    }
}

pub fn disentangle(factor: &ExponentFactor, t: Complex64) -> Result<DisentangledExp> {
    DisentangledExp::from_element(&Su11Element::propagator(factor, t)).map_err(|e| match e {
        Error::Degenerate { .. } => Error::Degenerate { t: format!("{t}") },
        other => other,
    })
}

/// Shift applied to `t` when the match is singular.
pub const DEGENERATE_NUDGE: f64 = 1e-9;

/// As [`disentangle`], retrying at `t·(1 + 1e-9 i)` on a singular match.
/// The flag reports whether the nudge was used.
pub fn disentangle_regularized(factor: &ExponentFactor, t: Complex64) -> Result<(DisentangledExp, bool)> {
    match disentangle(factor, t) {
        Ok(d) => Ok((d, false)),
        Err(Error::Degenerate { .. }) => {
            disentangle(factor, t * Complex64::new(1.0, DEGENERATE_NUDGE)).map(|d| (d, true))
        }
        Err(e) => Err(e),
    }
}

/// `⟨0|L · exp(c₊M†)·exp(c₀(N+2))·exp(c₋M) · R|0⟩` as an exact polynomial in
/// `c₊`, `c₋` and `e^{c₀}` (symbols [`Symbol::CPlus`], [`Symbol::CMinus`],
/// [`Symbol::ExpCZero`]), with ω kept formal.
///
/// `exp(c₋M)` terminates on the finite ket `R|0⟩`, `exp(c₀(N+2))` is diagonal
/// in the number of quanta, and `exp(c₊M†)` terminates against the finite
/// bra `⟨0|L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    poly: Coefficient,
}

/// One monomial `value · c₊ʲ c₋ᵏ e^{n c₀}` of a [`Bracket`] after ω is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketTerm {
    pub cp_pow: u32,
    pub cm_pow: u32,
    pub e0_pow: u32,
    pub value: Complex64,
}

fn pair_ladder(start: KetState) -> Vec<KetState> {
    let m = generator(GeneratorName::M);
    let mut out = vec![start];
    loop {
        let k = out.len() as i64;
        let next = out.last().unwrap().apply(&m);
        if next.is_zero() {
            break;
        }
        let scaled = KetState::new(next.expr().scale(&Coefficient::from_ratio(1, k)))
            .expect("M preserves creation-only kets");
        out.push(scaled);
    }
    out
}

impl Bracket {
    pub fn new(left: &OperatorExpr, right: &OperatorExpr) -> Self {
        // u_k = M^k R|0>/k!, w_j = M^j L†|0>/j!
        let kets = pair_ladder(right.apply_to_vacuum());
        let bras = pair_ladder(left.adjoint().apply_to_vacuum());
        let mut poly = Coefficient::zero();
        for (j, w) in bras.iter().enumerate() {
            let w_adj = w.expr().adjoint();
            for (k, u) in kets.iter().enumerate() {
                let top = u.expr().degree();
                for n in 0..=top {
                    let graded = u.expr().grade(n);
                    if graded.is_zero() {
                        continue;
                    }
                    let overlap = w_adj.multiply(&graded).vacuum_expectation();
                    if overlap.is_zero() {
                        continue;
                    }
                    let mut powers = SymbolPowers::default();
                    powers.0[Symbol::CPlus as usize] = j as i32;
                    powers.0[Symbol::CMinus as usize] = k as i32;
                    powers.0[Symbol::ExpCZero as usize] = n as i32 + 2;
                    poly += &(&overlap * &Coefficient::term(powers, GaussRational::one()));
                }
            }
        }
        Self { poly }
    }

    pub fn polynomial(&self) -> &Coefficient {
        &self.poly
    }

    pub fn eval(&self, dis: &DisentangledExp, omega: f64) -> Result<Complex64> {
        self.poly.eval(&dis.symbol_values(omega))
    }

    /// Numeric monomials with ω substituted.
    pub fn terms_at(&self, omega: f64) -> Result<Vec<BracketTerm>> {
        let values = SymbolValues::omega(omega);
        let mut grouped: std::collections::BTreeMap<(u32, u32, u32), Complex64> = Default::default();
        for (p, g) in self.poly.terms() {
            let key = (
                p.get(Symbol::CPlus) as u32,
                p.get(Symbol::CMinus) as u32,
                p.get(Symbol::ExpCZero) as u32,
            );
            let mut only_omega = SymbolPowers::default();
            only_omega.0[Symbol::Omega as usize] = p.get(Symbol::Omega);
            let value = Coefficient::term(only_omega, g.clone()).eval(&values)?;
            *grouped.entry(key).or_default() += value;
        }
        Ok(grouped
            .into_iter()
            .map(|((cp_pow, cm_pow, e0_pow), value)| BracketTerm {
                cp_pow,
                cm_pow,
                e0_pow,
                value,
            })
            .collect())
    }
}

pub fn sandwich(
    left: &OperatorExpr,
    right: &OperatorExpr,
    dis: &DisentangledExp,
    omega: f64,
) -> Result<Complex64> {
    Bracket::new(left, right).eval(dis, omega)
}

/// `r·x₃`, the dipole-weighted operator of the dispersion bracket.
pub fn rx_operator() -> OperatorExpr {
    physical_operator(PhysicalOpName::R).multiply(&physical_operator(PhysicalOpName::X(3)))
}

/// The printed closed form of `⟨0|r x exp(-it(½rp² + ½v²r)) r x|0⟩`,
/// evaluated verbatim. Kept for comparison with [`Bracket`].
pub fn closed_form_rx_g_rx(omega: f64, v: Complex64, t: Complex64, pole_floor: f64) -> Result<Complex64> {
    let w = Complex64::new(omega, 0.0);
    let z = (-I * v * t).exp();
    let plus = (w + v) * (w + v);
    let minus = (w - v) * (w - v);
    let base = plus - minus * z;
    let den = base.powi(6);
    if den.norm() < pole_floor {
        return Err(Error::PoleOnPath(den.norm()));
    }
    let num = 2048.0
        * v.powi(4)
        * w
        * w
        * (plus * z * z + (3.0 * v * v - 2.0 * w * w) * z.powi(3) + minus * z.powi(4));
    Ok(num / den)
}

/// Truncated Fock-space evaluation of brackets `⟨0|L f(A) R|0⟩` where `A` is
/// built from the physical operators `r` and `r p²` (or from the generators)
/// as explicit matrices. Independent of the 2×2 disentangling.
#[derive(Debug, Clone)]
pub struct FockOracle {
    basis: FockBasis,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
    r: SparseMatrix,
    rp2: SparseMatrix,
    n_plus_2: SparseMatrix,
    m_sum: SparseMatrix,
}

impl FockOracle {
    pub fn new(left: &OperatorExpr, right: &OperatorExpr, omega: f64, trunc: FockTruncation) -> Result<Self> {
        let lket = left.adjoint().apply_to_vacuum();
        let rket = right.apply_to_vacuum();
        let basis = FockBasis::for_kets(&[lket.expr(), rket.expr()], trunc);
        let values = SymbolValues::omega(omega);
        let degree = lket.expr().degree().max(rket.expr().degree());
        if degree > trunc.max_quanta {
            return Err(Error::InvalidArgument(format!(
                "truncation {} is below the state degree {degree}",
                trunc.max_quanta
            )));
        }
        let m_sum = basis.operator_matrix(
            &(&generator(GeneratorName::M) + &generator(GeneratorName::Mdag)),
            &values,
        )?;
        Ok(Self {
            left: basis.ket_vector(lket.expr(), &values)?,
            right: basis.ket_vector(rket.expr(), &values)?,
            r: basis.operator_matrix(&physical_operator(PhysicalOpName::R), &values)?,
            rp2: basis.operator_matrix(&physical_operator(PhysicalOpName::RP2), &values)?,
            n_plus_2: basis.operator_matrix(&generator(GeneratorName::Nplus2), &values)?,
            m_sum,
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `½ r p² - E r` for a (possibly complex) energy.
    pub fn operator_at_energy(&self, energy: Complex64) -> SparseMatrix {
        self.rp2.combine(Complex64::new(0.5, 0.0), &self.r, -energy)
    }

    /// `p(N+2) + q(M + M†)`.
    pub fn operator_from_factor(&self, factor: &ExponentFactor) -> SparseMatrix {
        self.n_plus_2.combine(factor.p, &self.m_sum, factor.q)
    }

    /// `⟨0|L (A - coupling)⁻¹ R|0⟩` by a banded direct solve.
    pub fn resolvent(&self, a: &SparseMatrix, coupling: f64) -> Result<Complex64> {
        let shifted = a.combine(ONE, &SparseMatrix::identity(a.dim()), Complex64::new(-coupling, 0.0));
        let lu = BandedLu::factor(&shifted)?;
        Ok(inner(&self.left, &lu.solve(&self.right)))
    }

    pub fn resolvent_at_energy(&self, energy: Complex64, coupling: f64) -> Result<Complex64> {
        self.resolvent(&self.operator_at_energy(energy), coupling)
    }

    /// `⟨0|L exp(-itA) R|0⟩`.
    pub fn propagate(&self, a: &SparseMatrix, t: f64) -> Complex64 {
        inner(&self.left, &expm_action(a, Complex64::new(0.0, -t), &self.right))
    }

    /// `⟨0|L exp(c₊M†) exp(c₀(N+2)) exp(c₋M) R|0⟩` from truncated matrices.
    pub fn product_form(&self, dis: &DisentangledExp) -> Complex64 {
        let values = SymbolValues::new();
        let m = self
            .basis
            .operator_matrix(&generator(GeneratorName::M), &values)
            .expect("numeric generator");
        let mdag = self
            .basis
            .operator_matrix(&generator(GeneratorName::Mdag), &values)
            .expect("numeric generator");
        let x = expm_action(&m, dis.c_minus, &self.right);
        let x = expm_action(&self.n_plus_2, dis.c_zero, &x);
        let x = expm_action(&mdag, dis.c_plus, &x);
        inner(&self.left, &x)
    }
}

/// `⟨0|L (½rp² + ½v²r - coupling)⁻¹ R|0⟩` in a truncated basis.
pub fn fock_resolvent(
    left: &OperatorExpr,
    right: &OperatorExpr,
    omega: f64,
    v: Complex64,
    coupling: f64,
    trunc: FockTruncation,
) -> Result<Complex64> {
    let oracle = FockOracle::new(left, right, omega, trunc)?;
    oracle.resolvent_at_energy(-v * v / 2.0, coupling)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponent_factor_examples() {
        let f = exponent_factor(1.0, c(1.0, 0.0), Branch::Bound).unwrap();
        assert!((f.p - c(0.5, 0.0)).norm() < 1e-15 && f.q.norm() < 1e-15);
        let f = exponent_factor(1.0, c(2.0, 0.0), Branch::Bound).unwrap();
        assert!((f.p - c(1.25, 0.0)).norm() < 1e-15);
        assert!((f.q - c(0.75, 0.0)).norm() < 1e-15);
        assert!(exponent_factor(0.0, c(1.0, 0.0), Branch::Bound).is_err());
        assert!(exponent_factor(-1.0, c(1.0, 0.0), Branch::Bound).is_err());
        // continuation v -> -iv maps Bound onto Continuum
        let v = c(0.7, 0.0);
        let cont = exponent_factor(1.0, v, Branch::Continuum).unwrap();
        let rot = exponent_factor(1.0, -I * v, Branch::Bound).unwrap();
        assert!((cont.p - rot.p).norm() < 1e-15 && (cont.q - rot.q).norm() < 1e-15);
        let imaginary = exponent_factor(1.0, c(0.0, 0.3), Branch::Bound).unwrap();
        assert!((imaginary.p - c(0.91 / 4.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_exponent_disentangles_trivially() {
        let f = ExponentFactor::new(c(0.8, 0.0), ZERO);
        let d = disentangle(&f, c(1.7, 0.0)).unwrap();
        assert!(d.c_plus.norm() < 1e-15 && d.c_minus.norm() < 1e-15);
        assert!((d.c_zero - c(0.0, -0.8 * 1.7)).norm() < 1e-14);
        let id = disentangle(&exponent_factor(1.0, c(2.0, 0.0), Branch::Bound).unwrap(), ZERO).unwrap();
        assert!(id.distance(&DisentangledExp::identity()) < 1e-15);
    }

    #[test]
    fn round_trip_through_element() {
        let f = ExponentFactor::new(c(1.25, 0.0), c(0.75, 0.0));
        let g = Su11Element::propagator(&f, c(0.3, 0.0));
        let d = DisentangledExp::from_element(&g).unwrap();
        assert!(d.to_element().max_abs_diff(&g) < 1e-14);
        assert!((g.det() - ONE).norm() < 1e-14);
    }

    #[test]
    fn degenerate_match_is_reported_and_nudged() {
        let g = Su11Element([[ONE, ONE], [-ONE, ZERO]]);
        assert!(matches!(DisentangledExp::from_element(&g), Err(Error::Degenerate { .. })));
        let f = ExponentFactor::new(c(0.5, 0.0), c(0.2, 0.0));
        let (_, nudged) = disentangle_regularized(&f, c(0.4, 0.0)).unwrap();
        assert!(!nudged);
        // p = 5/4, q = 3/4: g22 = cos t + 5/4 i sin t vanishes at tan t = 4i/5
        let f = ExponentFactor::new(c(1.25, 0.0), c(0.75, 0.0));
        let t = c(0.0, 0.8f64.atanh());
        assert!(matches!(disentangle(&f, t), Err(Error::Degenerate { .. })));
        let (d, nudged) = disentangle_regularized(&f, t).unwrap();
        assert!(nudged && d.c_plus.is_finite());
    }

    #[test]
    fn vacuum_bracket_is_one() {
        let one = OperatorExpr::one();
        let v = sandwich(&one, &one, &DisentangledExp::identity(), 1.0).unwrap();
        assert!((v - ONE).norm() < 1e-15);
    }

    #[test]
    fn closed_form_at_equal_frequencies() {
        let v = closed_form_rx_g_rx(1.0, c(1.0, 0.0), ZERO, 1e-300).unwrap();
        assert!((v - c(2.5, 0.0)).norm() < 1e-13);
        let t = c(0.7, 0.0);
        let got = closed_form_rx_g_rx(1.0, c(1.0, 0.0), t, 1e-300).unwrap();
        let expect = (2048.0 / 4096.0) * (4.0 * (-2.0 * I * t).exp() + (-3.0 * I * t).exp());
        assert!((got - expect).norm() < 1e-13);
    }

    #[test]
    fn vacuum_resolvent_is_diagonal() {
        let one = OperatorExpr::one();
        let trunc = FockTruncation::new(10).unwrap();
        let v = c(1.3, 0.0);
        let omega = 1.3;
        let f = exponent_factor(omega, v, Branch::Bound).unwrap();
        let got = fock_resolvent(&one, &one, omega, v, 0.5, trunc).unwrap();
        let expect = ONE / (2.0 * f.p - 0.5);
        assert!((got - expect).norm() < 1e-13);
    }
}
